use alloc::vec::Vec;

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// `points` values from `from` to `to`, both included.
///
/// A single point yields `[from]`. Log spacing requires both ends positive.
pub fn grid(from: f64, to: f64, points: usize, scale: Scale) -> Result<Vec<f64>> {
    ensure(points >= 1, "points", points as f64, "at least one grid point")?;
    ensure(from.is_finite(), "from", from, "a finite grid start")?;
    ensure(to.is_finite(), "to", to, "a finite grid end")?;
    if points == 1 {
        return Ok(alloc::vec![from]);
    }
    let last = (points - 1) as f64;
    let values = match scale {
        Scale::Linear => (0..points)
            .map(|i| from + (to - from) * (i as f64 / last))
            .collect(),
        Scale::Log => {
            ensure(from > 0.0, "from", from, "a positive start for a log grid")?;
            ensure(to > 0.0, "to", to, "a positive end for a log grid")?;
            let (a, b) = (libm::log(from), libm::log(to));
            (0..points)
                .map(|i| libm::exp(a + (b - a) * (i as f64 / last)))
                .collect()
        }
    };
    let mut values: Vec<f64> = values;
    // pin the endpoints against rounding in exp/log
    values[0] = from;
    values[points - 1] = to;
    Ok(values)
}
