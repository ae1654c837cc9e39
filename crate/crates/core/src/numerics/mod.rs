//! Minimal dense linear algebra, spectral utilities, and the deterministic
//! random source used by every other module.

mod eigen;
mod matrix;
mod rng;
mod vector;

pub use eigen::{
    companion_matrix, companion_spectral_radius, hessenberg_eigenvalues, spectral_norm,
    symmetric_eigenvalues, symmetric_max_eigenvalue,
};
pub use matrix::Matrix;
pub use rng::{gaussian, RandomState};
pub use vector::Vector;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_dominates_symmetric_eigenvalues() {
        let mut rs = RandomState::new(11);
        for _ in 0..20 {
            let mut m = Matrix::zeros(4, 4);
            for i in 0..4 {
                for j in i..4 {
                    let x = rs.next_gaussian();
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            let eigs = symmetric_eigenvalues(&m).unwrap();
            let lmax = eigs.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            let sn = spectral_norm(&m).unwrap();
            assert!(sn >= lmax - 1e-9, "spectral norm {sn} < |eig| {lmax}");
        }
    }

    #[test]
    fn spectral_norm_dominates_companion_eigenvalues() {
        let mut rs = RandomState::new(12);
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..4).map(|_| rs.next_gaussian()).collect();
            let c = companion_matrix(&coeffs).unwrap();
            let rho = companion_spectral_radius(&coeffs).unwrap();
            let sn = spectral_norm(&c).unwrap();
            assert!(sn >= rho - 1e-9, "spectral norm {sn} < spectral radius {rho}");
        }
    }

    // The shift column of a K >= 2 companion matrix contains a unit vector,
    // so its largest singular value is at least 1.
    #[test]
    fn companion_spectral_norm_at_least_one_for_k_ge_2() {
        let mut rs = RandomState::new(13);
        for k in 2..=6 {
            for _ in 0..10 {
                let coeffs: Vec<f64> = (0..k).map(|_| rs.next_gaussian()).collect();
                let c = companion_matrix(&coeffs).unwrap();
                assert!(spectral_norm(&c).unwrap() >= 1.0 - 1e-12);
            }
        }
    }
}
