use serde::{Deserialize, Serialize};

use super::BulkDensity;
use crate::error::{Error, Result};
use crate::tensor::norm;

/// `t = 2^k`, `7 ≤ k ≤ 17`.
pub const DEFAULT_SCHEDULE: [f64; 11] =
    [128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0, 16384.0, 32768.0, 65536.0, 131072.0];

/// Envelope `|q(t) − q(s)| ≤ C (t^{-α} + s^{-α})` used as the Cauchy test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecessionOptions {
    pub alpha: f64,
    pub envelope: f64,
    /// The last schedule point must exceed this.
    pub threshold: f64,
}

impl Default for RecessionOptions {
    fn default() -> Self {
        Self { alpha: 0.5, envelope: 2.0, threshold: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecessionResult {
    pub value: f64,
    /// `(t, W(x, A, tM̂)/t)` with `M̂ = M/|M|`.
    pub quotients: Vec<(f64, f64)>,
    pub closed_form: bool,
    pub envelope_ok: bool,
    /// Largest `|q(t) − q(s)| / (t^{-α} + s^{-α})` seen.
    pub envelope_ratio: f64,
    pub divergent: bool,
}

/// `W^∞(x, A, M)` approximated by `|M| W(x, A, t M̂)/t` at the largest `t`,
/// or the closed form when the density provides one.
pub fn recession(
    w: &dyn BulkDensity,
    x: &[f64],
    a: &[f64],
    m: &[f64],
    schedule: &[f64],
    opts: &RecessionOptions,
) -> Result<RecessionResult> {
    if schedule.len() < 3 {
        return Err(Error::InvalidArgument("recession schedule needs at least 3 points".into()));
    }
    if schedule.windows(2).any(|p| !(p[1] > p[0])) || schedule[0] <= 0.0 {
        return Err(Error::InvalidArgument("recession schedule must be positive and strictly increasing".into()));
    }
    if *schedule.last().unwrap() <= opts.threshold {
        return Err(Error::InvalidArgument(format!(
            "last schedule point must exceed the threshold {}",
            opts.threshold
        )));
    }
    let len = norm(m);
    let closed = w.recession(x, a, m);
    if len == 0.0 {
        return Ok(RecessionResult {
            value: closed.unwrap_or(0.0),
            quotients: Vec::new(),
            closed_form: closed.is_some(),
            envelope_ok: true,
            envelope_ratio: 0.0,
            divergent: false,
        });
    }
    let unit: Vec<f64> = m.iter().map(|v| v / len).collect();
    let quotients: Vec<(f64, f64)> = schedule
        .iter()
        .map(|&t| {
            let tm: Vec<f64> = unit.iter().map(|v| v * t).collect();
            (t, w.eval(x, a, &tm) / t)
        })
        .collect();
    let rate = |t: f64| t.powf(-opts.alpha);
    let mut ratio: f64 = 0.0;
    for (i, (s, qs)) in quotients.iter().enumerate() {
        for (t, qt) in &quotients[i + 1..] {
            ratio = ratio.max((qt - qs).abs() / (rate(*s) + rate(*t)));
        }
    }
    let limit_unit = closed.map(|c| c / len);
    if let Some(l) = limit_unit {
        for (t, q) in &quotients {
            ratio = ratio.max((q - l).abs() / rate(*t));
        }
    }
    let envelope_ok = ratio <= opts.envelope;
    let value = match closed {
        Some(c) => c,
        None => len * quotients.last().unwrap().1,
    };
    Ok(RecessionResult {
        value,
        quotients,
        closed_form: closed.is_some(),
        envelope_ok,
        envelope_ratio: ratio,
        divergent: !ratio.is_finite() || !envelope_ok,
    })
}
