//! Plot-ready CSV and JSON writers.
//!
//! Numbers are written with Rust's locale-free formatting: shortest round-trip
//! decimals for ordinary magnitudes and scientific notation for very small or
//! very large ones. Lines end with `\n`.

use std::io::{self, Write};

use meterlink_core::{ExactRmsd, Histogram, RmsdStatistics, SweepPoint};
use serde::Serialize;

/// Round-trip text for `v`.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish<W: Write>(w: csv::Writer<W>) -> io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint]) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["axis", "beta_star", "ws_star", "psuc", "throughput", "branch"])?;
    for p in points {
        let row = match &p.outcome {
            Ok(s) => [
                number(p.value),
                number(s.point.beta),
                number(s.point.w_s),
                number(s.point.p_suc),
                number(s.point.throughput),
                s.branch.as_str().to_string(),
            ],
            Err(e) => [
                number(p.value),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("ERROR:{e}"),
            ],
        };
        w.write_record(&row)?;
    }
    finish(w)
}

pub fn write_rmsd_sweep<W: Write>(out: W, rows: &[RmsdStatistics]) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["epsilon", "mean_rmsd", "stderr", "realizations", "seed"])?;
    for r in rows {
        w.write_record([
            number(r.epsilon),
            number(r.mean_rmsd),
            number(r.stderr),
            r.realizations().to_string(),
            r.seed.to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_histogram<W: Write>(out: W, h: &Histogram) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    for (i, count) in h.counts.iter().enumerate() {
        w.write_record([number(h.edges[i]), number(h.edges[i + 1]), count.to_string()])?;
    }
    finish(w)
}

pub fn write_exact<W: Write>(out: W, rows: &[ExactRmsd]) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["epsilon", "mean_rmsd", "std_rmsd", "patterns"])?;
    for r in rows {
        w.write_record([
            number(r.epsilon),
            number(r.mean_rmsd),
            number(r.std_rmsd),
            r.patterns.to_string(),
        ])?;
    }
    finish(w)
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use meterlink_core::{Constraints, Network, SolverOptions, SweepAxis};

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, 0.25, 8.643142511483322e-4, 1e-300, 5e-16, 1.5e20, -3.75, 227.0] {
            let s = number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            assert!(!s.contains(','));
        }
        assert_eq!(number(0.5), "0.5");
        assert_eq!(number(1e-300), "1e-300");
    }

    #[test]
    fn sweep_rows_carry_errors_in_place() {
        let net = Network::new(0.25, 4.0, 1.0, 1.0).unwrap();
        let c = Constraints::new(1.0, 0.1).unwrap();
        let pts = meterlink_core::sweep(&net, &c, SweepAxis::Epsilon, &[0.1, 0.3], &SolverOptions::default());
        let mut buf = Vec::new();
        write_sweep(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], "axis,beta_star,ws_star,psuc,throughput,branch");
        assert!(lines[1].starts_with("0.1,") && lines[1].ends_with(",outage_binding"));
        assert!(lines[2].starts_with("0.3,,,,,\"ERROR:epsilon = 0.3 is invalid"));
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn histogram_rows() {
        let h = meterlink_core::reconstruction::histogram(&[0.0, 1.0, 2.0], 2);
        let mut buf = Vec::new();
        write_histogram(&mut buf, &h).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bin_lo,bin_hi,count\n0,1,1\n1,2,2\n");
    }
}
