//! Least-squares fits of asymptotic laws along a trajectory.

use serde::Serialize;

use crate::error::{FlowError, Result};
use crate::functionals::DiagnosticsRecord;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(FlowError::GridMismatch("fit abscissae and ordinates differ in length".into()));
    }
    if n < 3 {
        return Err(FlowError::InsufficientSamples(format!("{n} points, need at least 3")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(FlowError::InsufficientSamples("abscissae do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(LinearFit { slope, intercept, r2, samples: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// `ln max|Rm|` against `t` over the final half of the run.
    ExpFlat,
    /// `ln |L²/t − slope|` and `ln sol_residual` against `ln t`.
    SolPower,
    /// `ln L` against `ln t` over the final half of the run.
    GrowthExponent,
}

impl std::str::FromStr for FitKind {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp-flat" => Ok(FitKind::ExpFlat),
            "sol-power" => Ok(FitKind::SolPower),
            "growth-exponent" => Ok(FitKind::GrowthExponent),
            _ => Err(FlowError::InvalidArgument(format!("unknown fit kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub kind: FitKind,
    pub fit: LinearFit,
    /// Secondary fit where the kind has one (the Sol residual decay).
    pub residual_fit: Option<LinearFit>,
    /// Limit of `L²/t` implied by the last record, for `sol-power`.
    pub limit_slope: Option<f64>,
    pub passed: bool,
    pub note: String,
}

fn final_half(records: &[DiagnosticsRecord]) -> &[DiagnosticsRecord] {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return records;
    };
    let mid = 0.5 * (first.t + last.t);
    let start = records.partition_point(|r| r.t < mid);
    &records[start..]
}

/// Below this the Sol residual is dominated by round-off and excluded.
pub const RESIDUAL_FLOOR: f64 = 1e-10;

/// `oracle_slope` is the expected limit of `L²/t` and is required for
/// `sol-power`.
pub fn fit_asymptotics(records: &[DiagnosticsRecord], kind: FitKind, oracle_slope: Option<f64>) -> Result<FitReport> {
    match kind {
        FitKind::ExpFlat => {
            let tail = final_half(records);
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                tail.iter().filter(|r| r.max_riem > 0.0).map(|r| (r.t, r.max_riem.ln())).unzip();
            let fit = linear_fit(&xs, &ys)?;
            Ok(FitReport {
                kind,
                fit,
                residual_fit: None,
                limit_slope: None,
                passed: fit.slope < 0.0 && fit.r2 > 0.99,
                note: format!("decay rate {:.6}, R² {:.6}", -fit.slope, fit.r2),
            })
        }
        FitKind::SolPower => {
            let slope = oracle_slope
                .ok_or_else(|| FlowError::InvalidArgument("sol-power needs the oracle slope".into()))?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.t > 0.0)
                .filter_map(|r| r.l.map(|l| (r.t, l * l / r.t - slope)))
                .filter(|&(_, d)| d.abs() > 0.0)
                .map(|(t, d)| (t.ln(), d.abs().ln()))
                .unzip();
            let fit = linear_fit(&xs, &ys)?;
            let (rx, ry): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.t > 0.0)
                .filter_map(|r| r.sol_residual.map(|d| (r.t, d)))
                .filter(|&(_, d)| d > RESIDUAL_FLOOR)
                .map(|(t, d)| (t.ln(), d.ln()))
                .unzip();
            let residual_fit = linear_fit(&rx, &ry).ok();
            let limit_slope = records.last().and_then(|r| r.l.map(|l| l * l / r.t));
            let passed = fit.slope < 0.0 && residual_fit.is_some_and(|f| f.slope < 0.0);
            Ok(FitReport {
                kind,
                fit,
                residual_fit,
                limit_slope,
                passed,
                note: format!(
                    "L²/t deviation exponent {:.4}; residual exponent {}",
                    fit.slope,
                    residual_fit.map_or("n/a".to_string(), |f| format!("{:.4}", f.slope))
                ),
            })
        }
        FitKind::GrowthExponent => {
            let tail = final_half(records);
            let (xs, ys): (Vec<f64>, Vec<f64>) = tail
                .iter()
                .filter(|r| r.t > 0.0)
                .filter_map(|r| r.l.map(|l| (r.t.ln(), l.ln())))
                .unzip();
            let fit = linear_fit(&xs, &ys)?;
            Ok(FitReport {
                kind,
                fit,
                residual_fit: None,
                limit_slope: None,
                passed: true,
                note: format!("L grows like t^{:.4} (reference exponent 1/6 = {:.4})", fit.slope, 1.0 / 6.0),
            })
        }
    }
}

/// Slope of `ln(t·max|Rm|)` against `ln t` over `t ≥ t_min`, and the supremum
/// of `t·max|Rm|` there.
pub fn curvature_decay(records: &[DiagnosticsRecord], t_min: f64) -> Result<(LinearFit, f64)> {
    let pts: Vec<(f64, f64)> =
        records.iter().filter(|r| r.t >= t_min && r.max_riem > 0.0).map(|r| (r.t, r.t * r.max_riem)).collect();
    let sup = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(t, v)| (t.ln(), v.ln())).unzip();
    Ok((linear_fit(&xs, &ys)?, sup))
}
