//! Pointwise bounds, identities and monotonicity checks over diagnostics rows.
//!
//! Every check reduces to a sequence of normalized margins; a check passes
//! when its worst margin is at least `−tolerance`.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::fit::curvature_decay;
use crate::flow::{FlowMode, StopReason};
use crate::functionals::DiagnosticsRecord;
use crate::holonomy::HolonomyClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    UExtrema,
    GradientBound,
    SLowerBound,
    RLowerBound,
    VolumeIdentity,
    VolumeLower,
    VolumeUpper,
    DissipationIdentity,
    EnergyDecay,
    VolumeOverT,
    SystoleMonotone,
    DetgExtrema,
    EnergyDensityBound,
    LengthIdentity,
    LengthOverSqrtT,
    LengthLower,
    CurvatureDecay,
    WPlusMonotone,
    ConjugateHeatMass,
    ExpectedStopReason,
}

pub const ALL_CHECKS: [Check; 20] = [
    Check::UExtrema,
    Check::GradientBound,
    Check::SLowerBound,
    Check::RLowerBound,
    Check::VolumeIdentity,
    Check::VolumeLower,
    Check::VolumeUpper,
    Check::DissipationIdentity,
    Check::EnergyDecay,
    Check::VolumeOverT,
    Check::SystoleMonotone,
    Check::DetgExtrema,
    Check::EnergyDensityBound,
    Check::LengthIdentity,
    Check::LengthOverSqrtT,
    Check::LengthLower,
    Check::CurvatureDecay,
    Check::WPlusMonotone,
    Check::ConjugateHeatMass,
    Check::ExpectedStopReason,
];

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::UExtrema => "u-extrema",
            Check::GradientBound => "gradient-bound",
            Check::SLowerBound => "s-lower-bound",
            Check::RLowerBound => "r-lower-bound",
            Check::VolumeIdentity => "volume-identity",
            Check::VolumeLower => "volume-lower",
            Check::VolumeUpper => "volume-upper",
            Check::DissipationIdentity => "dissipation-identity",
            Check::EnergyDecay => "energy-decay",
            Check::VolumeOverT => "volume-over-t",
            Check::SystoleMonotone => "systole-monotone",
            Check::DetgExtrema => "detg-extrema",
            Check::EnergyDensityBound => "energy-density-bound",
            Check::LengthIdentity => "length-identity",
            Check::LengthOverSqrtT => "length-over-sqrt-t",
            Check::LengthLower => "length-lower",
            Check::CurvatureDecay => "curvature-decay",
            Check::WPlusMonotone => "w-plus-monotone",
            Check::ConjugateHeatMass => "conjugate-heat-mass",
            Check::ExpectedStopReason => "expected-stop-reason",
        }
    }

    /// Reported but excluded from the overall verdict.
    pub fn is_diagnostic(&self) -> bool {
        matches!(self, Check::SystoleMonotone)
    }
}

impl std::str::FromStr for Check {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        ALL_CHECKS
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| FlowError::Config(format!("unknown check '{s}'")))
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative slack on pointwise bounds.
    pub bound: f64,
    /// Volume identity residual relative to `|4πχ| + E`.
    pub volume: f64,
    /// Energy identity residual relative to the dissipation.
    pub dissipation: f64,
    /// Length identity residual relative to `dL/dt`.
    pub length: f64,
    /// Per-step slack on monotone quantities, relative to their scale.
    pub monotone: f64,
    /// Absolute per-step slack on `W₊`.
    pub w_plus: f64,
    pub mass: f64,
    /// Bounds of the form `−1/t` and `2/t` are checked from this elapsed time on.
    pub bound_t_min: f64,
    /// Identities are checked only where the change across a step exceeds
    /// this fraction of the quantity.
    pub resolve: f64,
    pub decay_slope: f64,
    pub length_lower_factor: f64,
    pub length_lower_t_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bound: 1e-3,
            volume: 1e-4,
            dissipation: 1e-3,
            length: 1e-4,
            monotone: 1e-10,
            w_plus: 1e-6,
            mass: 1e-6,
            bound_t_min: 0.1,
            resolve: 1e-8,
            decay_slope: 0.1,
            length_lower_factor: 0.9,
            length_lower_t_min: 10.0,
        }
    }
}

/// What a verifier needs to know about a run besides its diagnostics rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: String,
    /// `torus`, `sphere-rotsym` or `bundle`.
    pub topology: String,
    pub mode: FlowMode,
    pub euler_characteristic: Option<i32>,
    pub holonomy_class: Option<HolonomyClass>,
    /// Translation length `2c` of a hyperbolic gluing.
    pub translation_length: Option<f64>,
    pub t_start: f64,
    /// Time origin for which `max ℰ ≤ 2/(t − t_origin)` holds from the start.
    pub t_origin: f64,
    pub expected_stop: StopReason,
    pub stop_reason: StopReason,
    /// Whether `t·max|Rm|` tends to a nonzero constant.
    pub curvature_scale_invariant: bool,
    pub conjugate_heat_mass_drift: Option<f64>,
}

impl RunMeta {
    pub fn is_bundle(&self) -> bool {
        self.topology == "bundle"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotApplicable => "n/a",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub diagnostic: bool,
    pub worst_margin: Option<f64>,
    pub worst_time: Option<f64>,
    pub tolerance: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub expected_stop: StopReason,
    pub stop_reason: StopReason,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.diagnostic || c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "scenario {}: stop {} (expected {})\n",
            self.scenario, self.stop_reason, self.expected_stop
        );
        for c in &self.checks {
            let margin = c.worst_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
            let time = c.worst_time.map_or("-".to_string(), |t| format!("{t:.6}"));
            let tag = if c.diagnostic { " [diagnostic]" } else { "" };
            s.push_str(&format!(
                "{:<22} {:<5} worst {margin:>11} at t {time:>12}  {}{tag}\n",
                c.name, c.status.to_string(), c.note
            ));
        }
        s.push_str(if self.passed() { "overall: pass\n" } else { "overall: fail\n" });
        s
    }
}

/// Tracks the smallest margin seen and where it occurred.
#[derive(Default)]
struct Worst {
    margin: Option<f64>,
    time: Option<f64>,
    samples: usize,
}

impl Worst {
    fn push(&mut self, margin: f64, t: f64) {
        self.samples += 1;
        // NaN margins count as the worst possible
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if self.margin.is_none_or(|w| m < w) {
            self.margin = Some(m);
            self.time = Some(t);
        }
    }

    fn finish(self, check: Check, tolerance: f64, note: String) -> CheckResult {
        let status = match self.margin {
            None => CheckStatus::NotApplicable,
            Some(m) if m >= -tolerance => CheckStatus::Pass,
            Some(_) => CheckStatus::Fail,
        };
        let note = if self.samples == 0 { "no resolvable samples".to_string() } else { note };
        CheckResult {
            name: check.name().into(),
            status,
            diagnostic: check.is_diagnostic(),
            worst_margin: self.margin,
            worst_time: self.time,
            tolerance,
            note,
        }
    }
}

fn not_applicable(check: Check, why: &str) -> CheckResult {
    CheckResult {
        name: check.name().into(),
        status: CheckStatus::NotApplicable,
        diagnostic: check.is_diagnostic(),
        worst_margin: None,
        worst_time: None,
        tolerance: 0.0,
        note: why.into(),
    }
}

fn column(records: &[DiagnosticsRecord], name: &str, get: impl Fn(&DiagnosticsRecord) -> Option<f64>) -> Result<Vec<f64>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| get(r).ok_or_else(|| FlowError::Format(format!("column {name} missing at row {i}"))))
        .collect()
}

/// Derivative at `ts[i]` of the interpolating polynomial through the given
/// abscissae, as weights on the ordinates.
fn derivative_weights(ts: &[f64], i: usize) -> Vec<f64> {
    let x0 = ts[i];
    (0..ts.len())
        .map(|j| {
            if j == i {
                (0..ts.len()).filter(|&m| m != i).map(|m| 1.0 / (x0 - ts[m])).sum()
            } else {
                let mut w = 1.0 / (ts[j] - x0);
                for m in (0..ts.len()).filter(|&m| m != i && m != j) {
                    w *= (x0 - ts[m]) / (ts[j] - ts[m]);
                }
                w
            }
        })
        .collect()
}

/// Five-point time derivatives at interior rows; `None` where the stencil
/// does not fit.
fn time_derivative(ts: &[f64], q: &[f64]) -> Vec<Option<f64>> {
    let n = ts.len();
    (0..n)
        .map(|k| {
            if k < 2 || k + 2 >= n {
                return None;
            }
            let w = derivative_weights(&ts[k - 2..=k + 2], 2);
            Some(w.iter().zip(&q[k - 2..=k + 2]).map(|(a, b)| a * b).sum())
        })
        .collect()
}

fn resolvable(rate: f64, ts: &[f64], k: usize, q: f64, tol: &Tolerances) -> bool {
    rate.abs() * (ts[k + 1] - ts[k - 1]) >= tol.resolve * q.abs()
}

/// Per-step monotonicity of `q` in the direction `sign` (+1 nondecreasing).
fn monotone(w: &mut Worst, ts: &[f64], q: &[f64], sign: f64, scale: f64) {
    for k in 1..q.len() {
        w.push(sign * (q[k] - q[k - 1]) / scale, ts[k]);
    }
}

fn extremum_scale(lo: &[f64], hi: &[f64]) -> f64 {
    let range = hi[0] - lo[0];
    let size = lo.iter().chain(hi).fold(0.0_f64, |m, v| m.max(v.abs()));
    range.max(1e-2 * size).max(f64::MIN_POSITIVE)
}

pub fn verify_bounds(
    records: &[DiagnosticsRecord],
    meta: &RunMeta,
    checks: &[Check],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if records.is_empty() {
        return Err(FlowError::InsufficientSamples("no diagnostics rows".into()));
    }
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let mut out = Vec::with_capacity(checks.len());
    for &check in checks {
        out.push(run_check(check, records, &ts, meta, tol)?);
    }
    Ok(VerificationReport {
        scenario: meta.scenario.clone(),
        expected_stop: meta.expected_stop,
        stop_reason: meta.stop_reason,
        checks: out,
    })
}

fn run_check(
    check: Check,
    records: &[DiagnosticsRecord],
    ts: &[f64],
    meta: &RunMeta,
    tol: &Tolerances,
) -> Result<CheckResult> {
    let bundle = meta.is_bundle();
    let warped_only = matches!(
        check,
        Check::UExtrema
            | Check::GradientBound
            | Check::SLowerBound
            | Check::RLowerBound
            | Check::VolumeIdentity
            | Check::VolumeLower
            | Check::VolumeUpper
            | Check::DissipationIdentity
            | Check::EnergyDecay
            | Check::VolumeOverT
            | Check::SystoleMonotone
    );
    let bundle_only = matches!(
        check,
        Check::DetgExtrema | Check::EnergyDensityBound | Check::LengthIdentity | Check::LengthOverSqrtT | Check::LengthLower
    );
    if warped_only && bundle {
        return Ok(not_applicable(check, "warped products only"));
    }
    if bundle_only && !bundle {
        return Ok(not_applicable(check, "torus bundles only"));
    }
    let t0 = meta.t_start;
    let v: Vec<f64> = records.iter().map(|r| r.v).collect();
    let e: Vec<f64> = records.iter().map(|r| r.e).collect();
    let mut w = Worst::default();
    let res = match check {
        Check::UExtrema => {
            let lo = column(records, "u_min", |r| r.u_min)?;
            let hi = column(records, "u_max", |r| r.u_max)?;
            let scale = extremum_scale(&lo, &hi);
            monotone(&mut w, ts, &lo, 1.0, scale);
            monotone(&mut w, ts, &hi, -1.0, scale);
            w.finish(check, tol.monotone, format!("C1 = {:.6e}, C2 = {:.6e}", lo[0], hi[0]))
        }
        Check::GradientBound => {
            let g = column(records, "max_gradu_sq", |r| r.max_gradu_sq)?;
            let c = g[0];
            for (k, &gk) in g.iter().enumerate() {
                let bound = c / (2.0 * c * (ts[k] - t0) + 1.0);
                let m = if bound > 0.0 { (bound - gk) / bound } else if gk == 0.0 { 0.0 } else { f64::NEG_INFINITY };
                w.push(m, ts[k]);
            }
            w.finish(check, tol.bound, format!("c = {c:.6e}"))
        }
        Check::SLowerBound | Check::RLowerBound => {
            let q = if check == Check::SLowerBound {
                records.iter().map(|r| r.min_s).collect()
            } else {
                column(records, "min_r", |r| r.min_r)?
            };
            for k in 0..q.len() {
                let tau = ts[k] - t0;
                if tau >= tol.bound_t_min {
                    w.push(q[k] * tau + 1.0, ts[k]);
                }
            }
            w.finish(check, tol.bound, "margin is 1 + t·min".into())
        }
        Check::VolumeIdentity => {
            let chi = meta
                .euler_characteristic
                .ok_or_else(|| FlowError::Format("meta lacks the Euler characteristic".into()))?;
            let four_pi_chi = 4.0 * std::f64::consts::PI * chi as f64;
            for (k, dv) in time_derivative(ts, &v).into_iter().enumerate() {
                let Some(dv) = dv else { continue };
                if !resolvable(dv, ts, k, v[k], tol) {
                    continue;
                }
                let rhs = -four_pi_chi + e[k];
                w.push(-(dv - rhs).abs() / (four_pi_chi.abs() + e[k]), ts[k]);
            }
            w.finish(check, tol.volume, "dV/dt = −4πχ + E".into())
        }
        Check::VolumeLower | Check::VolumeUpper => {
            let chi = meta
                .euler_characteristic
                .ok_or_else(|| FlowError::Format("meta lacks the Euler characteristic".into()))? as f64;
            let four_pi_chi = 4.0 * std::f64::consts::PI * chi;
            let c = column(records, "max_gradu_sq", |r| r.max_gradu_sq)?[0];
            let v0 = v[0];
            for k in 0..v.len() {
                let tau = ts[k] - t0;
                let scale = v0.abs() + four_pi_chi.abs() * tau;
                let m = if check == Check::VolumeLower {
                    (v[k] - (v0 - four_pi_chi * tau)) / scale
                } else {
                    let s = (2.0 * c * tau + 1.0).sqrt();
                    (-four_pi_chi * s * 2.0 * tau / (s + 1.0) + s * v0 - v[k]) / scale
                };
                w.push(m, ts[k]);
            }
            w.finish(check, tol.bound, format!("χ = {chi}"))
        }
        Check::DissipationIdentity => {
            let d = column(records, "dissipation", |r| r.dissipation)?;
            for (k, de) in time_derivative(ts, &e).into_iter().enumerate() {
                let Some(de) = de else { continue };
                if d[k] <= 0.0 || !resolvable(de, ts, k, e[k], tol) {
                    continue;
                }
                w.push(-(de + d[k]).abs() / d[k], ts[k]);
            }
            w.finish(check, tol.dissipation, "−dE/dt = ∫(|∇u|⁴ + 2(Δu)²)".into())
        }
        Check::EnergyDecay => {
            let d = column(records, "dissipation", |r| r.dissipation)?;
            for k in 0..d.len() {
                let need = e[k] * e[k] / v[k];
                let m = if d[k] > 0.0 { (d[k] - need) / d[k] } else if need == 0.0 { 0.0 } else { f64::NEG_INFINITY };
                w.push(m, ts[k]);
            }
            w.finish(check, tol.bound, "dE/dt ≤ −E²/V".into())
        }
        Check::VolumeOverT => {
            let idx: Vec<usize> = (0..ts.len()).filter(|&k| ts[k] - t0 >= 1.0).collect();
            let q: Vec<f64> = idx.iter().map(|&k| v[k] / (ts[k] - t0)).collect();
            let tt: Vec<f64> = idx.iter().map(|&k| ts[k]).collect();
            for k in 1..q.len() {
                w.push((q[k - 1] - q[k]) / q[k].abs().max(f64::MIN_POSITIVE), tt[k]);
            }
            w.finish(check, tol.monotone, "V/t nonincreasing for t ≥ 1".into())
        }
        Check::SystoleMonotone => {
            let pts: Vec<(f64, f64)> = records.iter().filter_map(|r| r.l.map(|l| (r.t, l))).collect();
            if meta.topology != "torus" {
                return Ok(not_applicable(check, "torus base only"));
            }
            for k in 1..pts.len() {
                w.push((pts[k].1 - pts[k - 1].1) / pts[k].1, pts[k].0);
            }
            w.finish(check, tol.monotone, format!("{} systole samples", pts.len()))
        }
        Check::DetgExtrema => {
            let lo = column(records, "detG_min", |r| r.det_g_min)?;
            let hi = column(records, "detG_max", |r| r.det_g_max)?;
            let scale = extremum_scale(&lo, &hi);
            monotone(&mut w, ts, &lo, 1.0, scale);
            monotone(&mut w, ts, &hi, -1.0, scale);
            w.finish(check, tol.monotone, "min det G nondecreasing, max nonincreasing".into())
        }
        Check::EnergyDensityBound => {
            let ed = column(records, "max_energy_density", |r| r.max_energy_density)?;
            for k in 0..ed.len() {
                let tau = ts[k] - meta.t_origin;
                if tau >= tol.bound_t_min {
                    w.push(1.0 - 0.5 * ed[k] * tau, ts[k]);
                }
            }
            w.finish(check, tol.bound, format!("max ℰ ≤ 2/(t − {:.6})", meta.t_origin))
        }
        Check::LengthIdentity => {
            if meta.mode != FlowMode::Modified {
                return Ok(not_applicable(check, "holds for the modified flow"));
            }
            let l = column(records, "L", |r| r.l)?;
            for (k, dl) in time_derivative(ts, &l).into_iter().enumerate() {
                let Some(dl) = dl else { continue };
                if !resolvable(dl, ts, k, l[k], tol) {
                    continue;
                }
                w.push(-(dl - 0.25 * e[k]).abs() / (dl.abs() + 1e-12), ts[k]);
            }
            w.finish(check, tol.length, "dL/dt = E/4".into())
        }
        Check::LengthOverSqrtT => {
            let l = column(records, "L", |r| r.l)?;
            let idx: Vec<usize> = (0..ts.len()).filter(|&k| ts[k] >= 1.0 && ts[k] > meta.t_origin).collect();
            for p in 1..idx.len() {
                let (a, b) = (idx[p - 1], idx[p]);
                let qa = l[a] / (ts[a] - meta.t_origin).sqrt();
                let qb = l[b] / (ts[b] - meta.t_origin).sqrt();
                w.push((qa - qb) / qb, ts[b]);
            }
            w.finish(check, tol.monotone, format!("L/√(t − {:.6}) nonincreasing", meta.t_origin))
        }
        Check::LengthLower => {
            let (Some(HolonomyClass::Hyperbolic), Some(c2)) = (meta.holonomy_class, meta.translation_length) else {
                return Ok(not_applicable(check, "hyperbolic holonomy only"));
            };
            let l = column(records, "L", |r| r.l)?;
            for k in 0..l.len() {
                if ts[k] >= tol.length_lower_t_min {
                    w.push(l[k] / (tol.length_lower_factor * c2 * ts[k].sqrt()) - 1.0, ts[k]);
                }
            }
            w.finish(check, 0.0, format!("L ≥ {}·{c2:.6}·√t", tol.length_lower_factor))
        }
        Check::CurvatureDecay => {
            if meta.expected_stop != StopReason::ReachedTEnd {
                return Ok(not_applicable(check, "finite-time singularity expected"));
            }
            let Ok((fit, sup)) = curvature_decay(records, 1.0) else {
                return Ok(not_applicable(check, "fewer than three rows with t ≥ 1"));
            };
            let m = if meta.curvature_scale_invariant {
                tol.decay_slope - fit.slope.abs()
            } else {
                tol.decay_slope - fit.slope
            };
            w.push(m, ts[ts.len() - 1]);
            w.finish(check, 0.0, format!("sup t·max|Rm| = {sup:.6e}, slope {:.4e}", fit.slope))
        }
        Check::WPlusMonotone => {
            let pts: Vec<(f64, f64)> = records.iter().filter_map(|r| r.w_plus.map(|x| (r.t, x))).collect();
            if pts.len() < 2 {
                return Ok(not_applicable(check, "no W₊ samples"));
            }
            for k in 1..pts.len() {
                w.push(pts[k].1 - pts[k - 1].1, pts[k].0);
            }
            w.finish(check, tol.w_plus, format!("{} samples", pts.len()))
        }
        Check::ConjugateHeatMass => {
            let Some(drift) = meta.conjugate_heat_mass_drift else {
                return Ok(not_applicable(check, "no conjugate heat solve"));
            };
            w.push(-drift, ts[0]);
            w.finish(check, tol.mass, format!("relative drift {drift:.3e}"))
        }
        Check::ExpectedStopReason => {
            w.push(if meta.stop_reason == meta.expected_stop { 0.0 } else { -1.0 }, ts[ts.len() - 1]);
            w.finish(check, 0.0, format!("{} (expected {})", meta.stop_reason, meta.expected_stop))
        }
    };
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(topology: &str) -> RunMeta {
        RunMeta {
            scenario: "test".into(),
            topology: topology.into(),
            mode: FlowMode::Modified,
            euler_characteristic: Some(0),
            holonomy_class: None,
            translation_length: None,
            t_start: 0.0,
            t_origin: 0.0,
            expected_stop: StopReason::ReachedTEnd,
            stop_reason: StopReason::ReachedTEnd,
            curvature_scale_invariant: false,
            conjugate_heat_mass_drift: None,
        }
    }

    #[test]
    fn derivative_weights_are_exact_for_quartics() {
        let ts = [0.0, 0.1, 0.25, 0.3, 0.5];
        let w = derivative_weights(&ts, 2);
        let d: f64 = w.iter().zip(&ts).map(|(a, t)| a * t.powi(4)).sum();
        assert!((d - 4.0 * 0.25f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn volume_identity_on_synthetic_rows() {
        // V = 10 + ∫E with E = e^{−t}
        let rows: Vec<_> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.01;
                DiagnosticsRecord { t, v: 11.0 - (-t).exp(), e: (-t).exp(), ..Default::default() }
            })
            .collect();
        let r = verify_bounds(&rows, &meta("torus"), &[Check::VolumeIdentity], &Tolerances::default()).unwrap();
        assert_eq!(r.checks[0].status, CheckStatus::Pass);
        let mut bad = rows.clone();
        bad[100].v = -bad[100].v;
        let r = verify_bounds(&bad, &meta("torus"), &[Check::VolumeIdentity], &Tolerances::default()).unwrap();
        assert_eq!(r.checks[0].status, CheckStatus::Fail);
        let t = r.checks[0].worst_time.unwrap();
        assert!((t - 1.0).abs() < 0.025, "{t}");
    }

    #[test]
    fn checks_outside_their_setting_are_not_applicable() {
        let rows = vec![DiagnosticsRecord::default(); 3];
        let r = verify_bounds(&rows, &meta("bundle"), &[Check::UExtrema, Check::LengthLower], &Tolerances::default())
            .unwrap();
        assert!(r.checks.iter().all(|c| c.status == CheckStatus::NotApplicable));
        let r = verify_bounds(&rows, &meta("torus"), &[Check::DetgExtrema], &Tolerances::default()).unwrap();
        assert_eq!(r.checks[0].status, CheckStatus::NotApplicable);
    }

    #[test]
    fn missing_column_is_rejected() {
        let rows = vec![DiagnosticsRecord::default(); 3];
        assert!(matches!(
            verify_bounds(&rows, &meta("torus"), &[Check::UExtrema], &Tolerances::default()),
            Err(FlowError::Format(_))
        ));
    }

    #[test]
    fn stop_reason_mismatch_fails() {
        let rows = vec![DiagnosticsRecord::default(); 1];
        let mut m = meta("torus");
        m.stop_reason = StopReason::StepUnderflow;
        let r = verify_bounds(&rows, &m, &[Check::ExpectedStopReason], &Tolerances::default()).unwrap();
        assert!(!r.passed());
        assert!(r.to_text().contains("overall: fail"));
    }

    #[test]
    fn check_names_round_trip() {
        for c in ALL_CHECKS {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
    }
}
