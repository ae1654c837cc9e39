//! Shared independent oracles for integration tests.
//!
//! Nothing here calls into the library's eigenvalue or root-finding code;
//! that is the point.

/// Hand-rolled complex pair, kept separate from any crate the library uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C(pub f64, pub f64);

impl C {
    pub fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    pub fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    pub fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C(
            (self.0 * o.0 + self.1 * o.1) / d,
            (self.1 * o.0 - self.0 * o.1) / d,
        )
    }
    pub fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

/// Evaluates `z^K - c[0] z^(K-1) - ... - c[K-1]`.
fn poly_eval(coeffs: &[f64], z: C) -> C {
    let mut acc = C(1.0, 0.0);
    for &c in coeffs {
        acc = acc.mul(z).sub(C(c, 0.0));
    }
    acc
}

/// Durand-Kerner (Weierstrass) root finder for the monic polynomial
/// `z^K - c[0] z^(K-1) - ... - c[K-1]`. Independent oracle for the
/// companion-matrix eigenvalue path.
pub fn durand_kerner_roots(coeffs: &[f64]) -> Vec<C> {
    let k = coeffs.len();
    assert!(k >= 1);
    // Standard initialization on a non-real spiral.
    let seed = C(0.4, 0.9);
    let mut roots: Vec<C> = Vec::with_capacity(k);
    let mut acc = C(1.0, 0.0);
    for _ in 0..k {
        acc = acc.mul(seed);
        roots.push(acc);
    }
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for i in 0..k {
            let mut denom = C(1.0, 0.0);
            for j in 0..k {
                if j != i {
                    denom = denom.mul(roots[i].sub(roots[j]));
                }
            }
            let delta = poly_eval(coeffs, roots[i]).div(denom);
            roots[i] = roots[i].sub(delta);
            worst = worst.max(delta.abs());
        }
        if worst < 1e-13 {
            break;
        }
    }
    roots
}

/// Maximum root modulus of the same polynomial, for cross-checks against
/// the companion spectral radius.
pub fn max_root_modulus(coeffs: &[f64]) -> f64 {
    durand_kerner_roots(coeffs)
        .into_iter()
        .map(C::abs)
        .fold(0.0, f64::max)
}

