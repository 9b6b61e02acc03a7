//! Explicit RK4 integration of the reduced flows, adaptive step control,
//! trajectories and parabolic rescaling.

use serde::{Deserialize, Serialize};

use crate::bundle::{self, BundleState};
use crate::error::{FlowError, Result};
use crate::functionals::{self, DiagnosticsRecord};
use crate::mat2::Sym2;
use crate::warped::{SphereMetric, SurfaceMetric, TorusMetric, WarpedState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMode {
    Modified,
    Unmodified,
}

impl std::str::FromStr for FlowMode {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modified" => Ok(FlowMode::Modified),
            "unmodified" => Ok(FlowMode::Unmodified),
            _ => Err(FlowError::Config(format!("unknown mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for FlowMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FlowMode::Modified => "modified",
            FlowMode::Unmodified => "unmodified",
        })
    }
}

/// A discretized state that the engine can advance.
pub trait FlowState: Clone + Sized {
    fn time(&self) -> f64;
    fn set_time(&mut self, t: f64);
    /// Degrees of freedom packed into a flat vector.
    fn pack(&self) -> Vec<f64>;
    /// Inverse of `pack` on a state of the same shape; validates the result.
    fn unpack(&self, v: &[f64]) -> Result<Self>;
    /// Time derivative of the packed degrees of freedom.
    fn rate(&self, mode: FlowMode) -> Result<Vec<f64>>;
    fn validate(&self) -> Result<()>;
    fn min_spacing_sq(&self) -> f64;
    /// `max |Rm|` over the grid.
    fn max_riem(&self) -> Result<f64>;
    /// Diagnostics row; `full` also fills the expensive columns.
    fn diagnostics(&self, full: bool) -> Result<DiagnosticsRecord>;
}

impl FlowState for WarpedState {
    fn time(&self) -> f64 {
        self.time
    }

    fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::new();
        match &self.metric {
            SurfaceMetric::Torus(m) => {
                v.extend_from_slice(&m.g11);
                v.extend_from_slice(&m.g12);
                v.extend_from_slice(&m.g22);
            }
            SurfaceMetric::Sphere(m) => {
                v.push(m.a);
                v.extend_from_slice(&m.f);
            }
        }
        v.extend_from_slice(&self.u);
        v
    }

    fn unpack(&self, v: &[f64]) -> Result<Self> {
        let metric = match &self.metric {
            SurfaceMetric::Torus(m) => {
                let nn = m.n * m.n;
                check_len(v.len(), 4 * nn)?;
                SurfaceMetric::Torus(TorusMetric::new(
                    m.n,
                    v[..nn].to_vec(),
                    v[nn..2 * nn].to_vec(),
                    v[2 * nn..3 * nn].to_vec(),
                )?)
            }
            SurfaceMetric::Sphere(m) => {
                check_len(v.len(), 2 * m.n + 1)?;
                SurfaceMetric::Sphere(SphereMetric::new(m.n, v[0], v[1..=m.n].to_vec())?)
            }
        };
        let nodes = metric.nodes();
        WarpedState::new(metric, v[v.len() - nodes..].to_vec(), self.time)
    }

    fn rate(&self, mode: FlowMode) -> Result<Vec<f64>> {
        match &self.metric {
            SurfaceMetric::Torus(_) => {
                let r = crate::warped::rhs_warped(self, mode)?;
                let mut v = Vec::with_capacity(4 * r.du.len());
                v.extend(r.dg.iter().map(|d| d.xx));
                v.extend(r.dg.iter().map(|d| d.xy));
                v.extend(r.dg.iter().map(|d| d.yy));
                v.extend_from_slice(&r.du);
                Ok(v)
            }
            SurfaceMetric::Sphere(m) => {
                let (a_dot, ft, ut) = m.rates(&self.u, mode)?;
                let mut v = Vec::with_capacity(2 * m.n + 1);
                v.push(a_dot);
                v.extend(ft);
                v.extend(ut);
                Ok(v)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        WarpedState::validate(self)
    }

    fn min_spacing_sq(&self) -> f64 {
        self.metric.min_spacing_sq()
    }

    fn max_riem(&self) -> Result<f64> {
        Ok(self.geometry()?.max_riem())
    }

    fn diagnostics(&self, full: bool) -> Result<DiagnosticsRecord> {
        functionals::warped_functionals(self, full)
    }
}

impl FlowState for BundleState {
    fn time(&self) -> f64 {
        self.time
    }

    fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.n());
        v.extend_from_slice(&self.gyy);
        v.extend(self.g.iter().map(|g| g.xx));
        v.extend(self.g.iter().map(|g| g.xy));
        v.extend(self.g.iter().map(|g| g.yy));
        v
    }

    fn unpack(&self, v: &[f64]) -> Result<Self> {
        let n = self.n();
        check_len(v.len(), 4 * n)?;
        let g = (0..n).map(|k| Sym2::new(v[n + k], v[2 * n + k], v[3 * n + k])).collect();
        let s = BundleState { gyy: v[..n].to_vec(), g, ..self.clone() };
        s.validate()?;
        Ok(s)
    }

    fn rate(&self, mode: FlowMode) -> Result<Vec<f64>> {
        let r = bundle::rhs_bundle(self, mode)?;
        let mut v = Vec::with_capacity(4 * self.n());
        v.extend_from_slice(&r.dgyy);
        v.extend(r.dg.iter().map(|g| g.xx));
        v.extend(r.dg.iter().map(|g| g.xy));
        v.extend(r.dg.iter().map(|g| g.yy));
        Ok(v)
    }

    fn validate(&self) -> Result<()> {
        BundleState::validate(self)
    }

    fn min_spacing_sq(&self) -> f64 {
        BundleState::min_spacing_sq(self)
    }

    fn max_riem(&self) -> Result<f64> {
        let geo = self.geometry()?;
        Ok((0..self.n()).map(|k| geo.curvature_at(k).riem_norm_sq).fold(0.0, f64::max).sqrt())
    }

    fn diagnostics(&self, full: bool) -> Result<DiagnosticsRecord> {
        functionals::bundle_functionals(self, full)
    }
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(FlowError::GridMismatch(format!("packed state has {got} values, expected {want}")));
    }
    Ok(())
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

/// One classical RK4 step of size `dt`; any invalid stage is an error.
pub fn rk4_step<S: FlowState>(state: &S, dt: f64, mode: FlowMode) -> Result<S> {
    let t = state.time();
    let y = state.pack();
    let stage = |v: &[f64], tt: f64| -> Result<S> {
        let mut s = state.unpack(v)?;
        s.set_time(tt);
        Ok(s)
    };
    let k1 = state.rate(mode)?;
    let k2 = stage(&axpy(&y, 0.5 * dt, &k1), t + 0.5 * dt)?.rate(mode)?;
    let k3 = stage(&axpy(&y, 0.5 * dt, &k2), t + 0.5 * dt)?.rate(mode)?;
    let k4 = stage(&axpy(&y, dt, &k3), t + dt)?.rate(mode)?;
    let next: Vec<f64> = (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect();
    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(FlowError::NonFinite { field: "state", node: i });
    }
    stage(&next, t + dt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepController {
    pub cfl: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Stop once `max |Rm|` reaches this value.
    pub curvature_stop: f64,
    pub t_end: f64,
    /// Weight of `max |Rm|` in the step-size denominator.
    pub normalizer: f64,
}

impl Default for StepController {
    fn default() -> Self {
        StepController { cfl: 0.2, dt_min: 1e-12, dt_max: 1.0, curvature_stop: 1e6, t_end: 1.0, normalizer: 0.0 }
    }
}

impl StepController {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(FlowError::Config(format!("cfl must lie in (0,1), got {}", self.cfl)));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max) {
            return Err(FlowError::Config(format!(
                "need 0 < dt_min ≤ dt_max, got {} and {}",
                self.dt_min, self.dt_max
            )));
        }
        if !(self.curvature_stop > 0.0) || !self.t_end.is_finite() || !(self.normalizer >= 0.0) {
            return Err(FlowError::Config("curvature_stop, t_end and normalizer must be finite and positive".into()));
        }
        Ok(())
    }

    pub fn proposed_dt<S: FlowState>(&self, state: &S, max_riem: f64) -> f64 {
        let dt = self.cfl * state.min_spacing_sq() / (1.0 + max_riem * self.normalizer);
        let remaining = self.t_end - state.time();
        dt.min(self.dt_max).min(remaining.max(0.0))
    }
}

/// Advances by one accepted step, halving `dt` until the result is valid.
/// Returns the new state and the step size used.
pub fn step<S: FlowState>(state: &S, controller: &StepController, mode: FlowMode) -> Result<(S, f64)> {
    let max_riem = state.max_riem()?;
    let mut dt = controller.proposed_dt(state, max_riem);
    let floor = controller.dt_min.min(controller.t_end - state.time());
    loop {
        if dt < floor {
            return Err(FlowError::StepUnderflow { time: state.time(), dt_min: controller.dt_min });
        }
        match rk4_step(state, dt, mode) {
            Ok(next) => return Ok((next, dt)),
            Err(_) => dt *= 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ReachedTEnd,
    CurvatureBlowup,
    StepUnderflow,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::ReachedTEnd => "reached_t_end",
            StopReason::CurvatureBlowup => "curvature_blowup",
            StopReason::StepUnderflow => "step_underflow",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Time between stored snapshots; the first and last states are always stored.
    pub snapshot_dt: f64,
    /// Fill the expensive diagnostics columns on every step, not only at snapshots.
    pub full_diagnostics: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { snapshot_dt: f64::INFINITY, full_diagnostics: false }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub mode: FlowMode,
    /// One row per accepted step, the initial state first.
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<S>,
    pub stop_reason: StopReason,
}

impl<S: FlowState> Trajectory<S> {
    pub fn final_state(&self) -> &S {
        self.snapshots.last().expect("trajectory stores its final state")
    }
}

/// Single-owner simulation: the current state plus everything recorded so far.
pub struct Engine<S: FlowState> {
    pub state: S,
    pub controller: StepController,
    pub mode: FlowMode,
    pub options: RunOptions,
    pub trajectory: Trajectory<S>,
    next_snapshot: f64,
}

impl<S: FlowState> Engine<S> {
    pub fn new(initial: S, controller: StepController, mode: FlowMode, options: RunOptions) -> Result<Self> {
        controller.validate()?;
        initial.validate()?;
        let record = initial.diagnostics(true)?;
        let next_snapshot = initial.time() + options.snapshot_dt;
        let trajectory = Trajectory {
            mode,
            records: vec![record],
            snapshots: vec![initial.clone()],
            stop_reason: StopReason::ReachedTEnd,
        };
        Ok(Engine { state: initial, controller, mode, options, trajectory, next_snapshot })
    }

    fn done(&self) -> Option<StopReason> {
        let last = self.trajectory.records.last().expect("initial record");
        if last.max_riem >= self.controller.curvature_stop {
            Some(StopReason::CurvatureBlowup)
        } else if self.state.time() >= self.controller.t_end * (1.0 - 1e-14) {
            Some(StopReason::ReachedTEnd)
        } else {
            None
        }
    }

    /// Takes one step; returns the stop reason once the run is over.
    pub fn advance(&mut self) -> Result<Option<StopReason>> {
        if let Some(r) = self.done() {
            return Ok(Some(r));
        }
        let (next, dt) = match step(&self.state, &self.controller, self.mode) {
            Ok(v) => v,
            Err(FlowError::StepUnderflow { .. }) => return Ok(Some(StopReason::StepUnderflow)),
            Err(e) => return Err(e),
        };
        let snap = next.time() >= self.next_snapshot;
        let mut record = next.diagnostics(snap || self.options.full_diagnostics)?;
        record.dt = dt;
        self.trajectory.records.push(record);
        if snap {
            self.trajectory.snapshots.push(next.clone());
            while self.next_snapshot <= next.time() {
                self.next_snapshot += self.options.snapshot_dt;
            }
        }
        self.state = next;
        Ok(self.done())
    }

    pub fn run(mut self) -> Result<Trajectory<S>> {
        let reason = loop {
            if let Some(r) = self.advance()? {
                break r;
            }
        };
        self.finish(reason)
    }

    pub fn finish(mut self, reason: StopReason) -> Result<Trajectory<S>> {
        let last_snapshot_time = self.trajectory.snapshots.last().map(|s| s.time());
        if last_snapshot_time != Some(self.state.time()) {
            self.trajectory.snapshots.push(self.state.clone());
            let full = self.state.diagnostics(true)?;
            let last = self.trajectory.records.last_mut().expect("initial record");
            let dt = last.dt;
            *last = DiagnosticsRecord { dt, ..full };
        }
        self.trajectory.stop_reason = reason;
        Ok(self.trajectory)
    }
}

pub fn run<S: FlowState>(
    initial: S,
    controller: &StepController,
    mode: FlowMode,
    options: &RunOptions,
) -> Result<Trajectory<S>> {
    Engine::new(initial, controller.clone(), mode, options.clone())?.run()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescaleKind {
    /// `g(st)/s`, `u(st)`.
    Warped2d,
    /// As `Warped2d` with `u − ½ ln s`.
    Warped3d,
    /// `g_yy(st)/s`, `G(st)`.
    Bundle,
}

impl std::str::FromStr for RescaleKind {
    type Err = FlowError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warped-2d" => Ok(RescaleKind::Warped2d),
            "warped-3d" => Ok(RescaleKind::Warped3d),
            "bundle" => Ok(RescaleKind::Bundle),
            _ => Err(FlowError::InvalidArgument(format!("unknown rescale kind '{s}'"))),
        }
    }
}

pub trait Rescale: Sized {
    /// The rescaled solution at rescaled time `t/s`.
    fn rescale(&self, s: f64, kind: RescaleKind) -> Result<Self>;
}

fn check_scale(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(FlowError::InvalidArgument(format!("rescale factor must be positive, got {s}")));
    }
    Ok(())
}

impl Rescale for WarpedState {
    fn rescale(&self, s: f64, kind: RescaleKind) -> Result<Self> {
        check_scale(s)?;
        let shift = match kind {
            RescaleKind::Warped2d => 0.0,
            RescaleKind::Warped3d => -0.5 * s.ln(),
            RescaleKind::Bundle => {
                return Err(FlowError::InvalidArgument("bundle rescaling applied to a warped state".into()))
            }
        };
        Ok(WarpedState {
            metric: self.metric.scale(s),
            u: self.u.iter().map(|v| v + shift).collect(),
            time: self.time / s,
        })
    }
}

impl Rescale for BundleState {
    fn rescale(&self, s: f64, kind: RescaleKind) -> Result<Self> {
        check_scale(s)?;
        if kind != RescaleKind::Bundle {
            return Err(FlowError::InvalidArgument("warped rescaling applied to a bundle state".into()));
        }
        Ok(BundleState { gyy: self.gyy.iter().map(|v| v / s).collect(), time: self.time / s, ..self.clone() })
    }
}

pub fn parabolic_rescale<S: Rescale>(state: &S, s: f64, kind: RescaleKind) -> Result<S> {
    state.rescale(s, kind)
}

impl<S: Rescale + Clone> Trajectory<S> {
    pub fn rescaled(&self, s: f64, kind: RescaleKind) -> Result<Trajectory<S>> {
        let snapshots = self.snapshots.iter().map(|x| x.rescale(s, kind)).collect::<Result<_>>()?;
        let records = self.records.iter().map(|r| r.rescaled(s, kind)).collect();
        Ok(Trajectory { mode: self.mode, records, snapshots, stop_reason: self.stop_reason })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityProfile {
    pub t_est: f64,
    /// `(t, (T−t)·max R^N)` over the fitted window.
    pub normalized_max_r: Vec<(f64, f64)>,
    pub normalized_range: (f64, f64),
    /// `max K / min K` of the base at the last stored snapshots, oldest first.
    pub roundness: Vec<(f64, f64)>,
    pub warp_oscillation: f64,
}

/// Extinction-time estimate and normalized curvature near a finite-time
/// singularity. `T` comes from a least-squares line through `1/max R^N` over
/// the last decade of curvature growth.
pub fn singularity_profile(traj: &Trajectory<WarpedState>) -> Result<SingularityProfile> {
    if traj.stop_reason != StopReason::CurvatureBlowup {
        return Err(FlowError::NoBlowup);
    }
    let last = traj.records.last().ok_or(FlowError::NoBlowup)?;
    let r_end = last.max_r.ok_or(FlowError::NoBlowup)?;
    let window: Vec<(f64, f64)> = traj
        .records
        .iter()
        .filter_map(|r| r.max_r.map(|m| (r.t, m)))
        .filter(|&(_, m)| m >= 0.1 * r_end)
        .collect();
    if window.len() < 3 {
        return Err(FlowError::InsufficientSamples("fewer than three records in the last decade".into()));
    }
    let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = window.iter().map(|p| 1.0 / p.1).collect();
    let fit = crate::fit::linear_fit(&xs, &ys)?;
    let t_est = -fit.intercept / fit.slope;
    let normalized_max_r: Vec<(f64, f64)> = window.iter().map(|&(t, m)| (t, (t_est - t) * m)).collect();
    let lo = normalized_max_r.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = normalized_max_r.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let start = traj.snapshots.len().saturating_sub(5);
    let roundness = traj.snapshots[start..]
        .iter()
        .map(|s| {
            let geo = s.geometry()?;
            let kmax = geo.r_m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let kmin = geo.r_m.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok((s.time, kmax / kmin))
        })
        .collect::<Result<Vec<_>>>()?;
    let warp_oscillation = last.u_max.zip(last.u_min).map(|(a, b)| a - b).unwrap_or(0.0);
    Ok(SingularityProfile { t_est, normalized_max_r, normalized_range: (lo, hi), roundness, warp_oscillation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holonomy::Holonomy;
    use crate::mat2::Mat2;

    fn sol(n: usize, t: f64) -> BundleState {
        let g = (0..n)
            .map(|k| {
                let y = k as f64 / n as f64;
                Sym2::diag((2.0 * y).exp(), (-2.0 * y).exp())
            })
            .collect();
        BundleState::with_twist(vec![4.0 * t; n], g, Mat2::diag(1f64.exp(), (-1f64).exp()), t).unwrap()
    }

    #[test]
    fn flat_bundle_is_fixed() {
        let s = BundleState::new(vec![1.0; 16], vec![Sym2::IDENTITY; 16], Holonomy::identity(), 0.0).unwrap();
        let next = rk4_step(&s, 1e-3, FlowMode::Modified).unwrap();
        assert_eq!(next.gyy, s.gyy);
        assert_eq!(next.g, s.g);
        assert_eq!(next.time, 1e-3);
    }

    #[test]
    fn sol_step_grows_gyy_linearly() {
        let s = sol(128, 1.0);
        let dt = 1e-3;
        let next = rk4_step(&s, dt, FlowMode::Modified).unwrap();
        for k in 0..128 {
            assert!((next.gyy[k] - 4.0 * (1.0 + dt)).abs() < 1e-9);
            assert!((next.g[k] - s.g[k]).max_abs() < 1e-10);
        }
    }

    #[test]
    fn pack_round_trip() {
        let s = sol(16, 1.0);
        assert_eq!(s.unpack(&s.pack()).unwrap(), s);
        let w = WarpedState::new(SurfaceMetric::Sphere(SphereMetric::round(16, 1.0).unwrap()), vec![0.1; 16], 0.3)
            .unwrap();
        assert_eq!(w.unpack(&w.pack()).unwrap(), w);
    }

    #[test]
    fn step_halves_until_valid() {
        let s = sol(32, 1.0);
        let ctl = StepController { cfl: 0.5, dt_max: 1e3, t_end: 1e3, ..Default::default() };
        let (next, dt) = step(&s, &ctl, FlowMode::Modified).unwrap();
        assert!(dt > 0.0 && dt <= ctl.proposed_dt(&s, 0.0));
        assert!(next.validate().is_ok());
    }

    #[test]
    fn underflow_is_a_stop_reason() {
        let s = sol(32, 1.0);
        let ctl = StepController { cfl: 0.2, dt_min: 1.0, dt_max: 1.0, t_end: 10.0, ..Default::default() };
        let traj = run(s, &ctl, FlowMode::Modified, &RunOptions::default()).unwrap();
        assert_eq!(traj.stop_reason, StopReason::StepUnderflow);
        assert_eq!(traj.records.len(), 1);
    }

    #[test]
    fn short_final_step_is_not_an_underflow() {
        let s = sol(32, 1.0);
        let free = StepController { cfl: 0.2, t_end: 10.0, ..Default::default() }.proposed_dt(&s, 0.0);
        let ctl = StepController { cfl: 0.2, dt_min: 0.5 * free, t_end: 1.0 + 1.1 * free, ..Default::default() };
        let traj = run(s, &ctl, FlowMode::Modified, &RunOptions::default()).unwrap();
        assert_eq!(traj.stop_reason, StopReason::ReachedTEnd);
        assert_eq!(traj.records.len(), 3);
    }

    #[test]
    fn run_reaches_t_end_with_increasing_times() {
        let ctl = StepController { cfl: 0.4, t_end: 1.5, ..Default::default() };
        let opts = RunOptions { snapshot_dt: 0.1, ..Default::default() };
        let traj = run(sol(32, 1.0), &ctl, FlowMode::Modified, &opts).unwrap();
        assert_eq!(traj.stop_reason, StopReason::ReachedTEnd);
        assert!(traj.records.windows(2).all(|w| w[1].t > w[0].t));
        assert!(traj.snapshots.windows(2).all(|w| w[1].time > w[0].time));
        assert!((traj.final_state().time - 1.5).abs() < 1e-12);
        assert!(traj.snapshots.len() >= 6);
    }

    #[test]
    fn runs_are_deterministic() {
        let ctl = StepController { cfl: 0.4, t_end: 1.2, ..Default::default() };
        let a = run(sol(32, 1.0), &ctl, FlowMode::Modified, &RunOptions::default()).unwrap();
        let b = run(sol(32, 1.0), &ctl, FlowMode::Modified, &RunOptions::default()).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_state(), b.final_state());
    }

    #[test]
    fn rescale_identity_and_shift() {
        let w = WarpedState::new(SurfaceMetric::Sphere(SphereMetric::round(16, 1.0).unwrap()), vec![0.1; 16], 0.3)
            .unwrap();
        assert_eq!(w.rescale(1.0, RescaleKind::Warped2d).unwrap(), w);
        let a = w.rescale(4.0, RescaleKind::Warped2d).unwrap();
        let b = w.rescale(4.0, RescaleKind::Warped3d).unwrap();
        assert_eq!(a.metric, b.metric);
        for (x, y) in a.u.iter().zip(&b.u) {
            assert!((x - y - 0.5 * 4f64.ln()).abs() < 1e-15);
        }
        assert!(w.rescale(-1.0, RescaleKind::Warped2d).is_err());
        assert!(w.rescale(2.0, RescaleKind::Bundle).is_err());
    }

    #[test]
    fn profile_rejects_immortal_runs() {
        let m = SurfaceMetric::Torus(TorusMetric::constant(8, 1.0, 0.0, 1.0).unwrap());
        let w = WarpedState::new(m, vec![0.0; 64], 0.0).unwrap();
        let ctl = StepController { t_end: 0.01, ..Default::default() };
        let traj = run(w, &ctl, FlowMode::Modified, &RunOptions::default()).unwrap();
        assert!(matches!(singularity_profile(&traj), Err(FlowError::NoBlowup)));
    }
}
