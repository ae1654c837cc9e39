//! Run-record CSV encoding: '.' decimal, 17 significant digits, comma
//! delimiter, one header row. Identical runs produce byte-identical files.

use crate::error::{Error, Result};
use crate::optim::Trajectory;
use crate::problems::fmt_f64;

pub const RUN_CSV_HEADER: &str = "step,loss,grad_norm,dist_to_opt,buffer_size,buffer_min_proxy,buffer_mean_age,buffer_max_age,gc_norm_mean,norm_gap";

/// One parsed row of a run CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub step: u64,
    pub loss: f64,
    pub grad_norm: f64,
    /// Empty field when the minimizer is unknown.
    pub dist_to_opt: Option<f64>,
    pub buffer_size: usize,
    pub buffer_min_proxy: f64,
    pub buffer_mean_age: f64,
    pub buffer_max_age: u64,
    pub gc_norm_mean: f64,
    pub norm_gap: f64,
}

pub fn write_run_csv(traj: &Trajectory) -> String {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for rec in &traj.steps {
        let dist = rec.dist_to_opt.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            rec.step,
            fmt_f64(rec.loss),
            fmt_f64(rec.grad_norm),
            dist,
            rec.buffer_size,
            fmt_f64(rec.buffer_min_proxy),
            fmt_f64(rec.buffer_mean_age),
            rec.buffer_max_age,
            fmt_f64(rec.gc_norm_mean),
            fmt_f64(rec.norm_gap),
        ));
    }
    out
}

/// Serializes a buffer snapshot, one entry per line.
pub fn buffer_snapshot_csv(rows: &[crate::buffer::BufferRow]) -> String {
    let mut out = String::from("proxy_norm,true_norm,age\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.proxy_norm),
            fmt_f64(row.true_norm),
            row.age
        ));
    }
    out
}

pub fn parse_run_csv(text: &str) -> Result<Vec<RunRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Empty("run csv"))?;
    if header != RUN_CSV_HEADER {
        return Err(Error::invalid(format!(
            "unexpected run csv header: '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::invalid(format!(
                "run csv line {}: expected 10 fields, got {}",
                lineno + 2,
                f.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("run csv line {}: bad float '{s}'", lineno + 2)))
        };
        let int = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::invalid(format!("run csv line {}: bad integer '{s}'", lineno + 2)))
        };
        rows.push(RunRow {
            step: int(f[0])?,
            loss: num(f[1])?,
            grad_norm: num(f[2])?,
            dist_to_opt: if f[3].is_empty() { None } else { Some(num(f[3])?) },
            buffer_size: int(f[4])? as usize,
            buffer_min_proxy: num(f[5])?,
            buffer_mean_age: num(f[6])?,
            buffer_max_age: int(f[7])?,
            gc_norm_mean: num(f[8])?,
            norm_gap: num(f[9])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::CriticalBuffer;
    use crate::numerics::{RandomState, Vector};
    use crate::optim::{train, AggregationMode, OptimizerState, RecordOptions};
    use crate::problems::{make_quadratic, GradientOracle, OracleMode};

    #[test]
    fn csv_round_trips_through_parser() {
        let p = make_quadratic(&[1.0, 5.0], None, false, 0).unwrap();
        let mut opt = OptimizerState::sgd(Vector::new(vec![1.0, -1.0]).unwrap(), 0.05).unwrap();
        let mut buf = CriticalBuffer::koth(3, 0.9).unwrap();
        let mut oracle = GradientOracle::new(
            OracleMode::AdditiveGaussian { sigma: 0.2 },
            RandomState::new(1),
        )
        .unwrap();
        let traj = train(
            &p,
            &mut opt,
            &mut buf,
            AggregationMode::Mean,
            20,
            &mut oracle,
            RecordOptions::default(),
        )
        .unwrap();
        let text = write_run_csv(&traj);
        let rows = parse_run_csv(&text).unwrap();
        assert_eq!(rows.len(), 20);
        for (row, rec) in rows.iter().zip(&traj.steps) {
            assert_eq!(row.step, rec.step);
            assert_eq!(row.loss, rec.loss);
            assert_eq!(row.dist_to_opt, rec.dist_to_opt);
            assert_eq!(row.norm_gap, rec.norm_gap);
        }
    }

    #[test]
    fn parser_rejects_malformed_input() {
        assert!(parse_run_csv("").is_err());
        assert!(parse_run_csv("wrong,header\n").is_err());
        let text = format!("{RUN_CSV_HEADER}\n1,2,3\n");
        assert!(parse_run_csv(&text).is_err());
    }

    #[test]
    fn buffer_snapshot_has_expected_rows() {
        let mut buf = CriticalBuffer::koth(3, 0.9).unwrap();
        buf.offer(Vector::new(vec![3.0]).unwrap(), 0).unwrap();
        buf.offer(Vector::new(vec![2.0]).unwrap(), 1).unwrap();
        buf.decay_all();
        let text = buffer_snapshot_csv(&buf.snapshot(1).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "proxy_norm,true_norm,age");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",1"), "oldest entry has age 1: {}", lines[1]);
        assert!(lines[2].ends_with(",0"));
    }
}
