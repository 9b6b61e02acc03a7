//! Plain-text run configuration: `[section]` headers and `key = value` lines.
//!
//! The `[run]` section must name a `scenario`; its preset supplies every
//! default, and the remaining keys override them. Unknown sections and keys
//! are errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{FlowError, Result};
use crate::flow::{FlowMode, StepController};
use crate::holonomy::Holonomy;
use crate::scenario::{preset_defaults, InitialParams, Preset};
use crate::verify::{Check, Tolerances, ALL_CHECKS};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifySettings {
    pub enabled: bool,
    pub checks: Vec<Check>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Preset,
    pub mode: FlowMode,
    pub n: usize,
    pub initial: InitialParams,
    pub controller: StepController,
    pub snapshot_dt: f64,
    pub output_dir: PathBuf,
    /// Fill the expensive diagnostics columns on every step.
    pub full_diagnostics: bool,
    /// Solve the conjugate heat equation backward and record `W₊` (bundles only).
    pub conjugate_heat: bool,
    pub verify: VerifySettings,
}

impl RunConfig {
    pub fn preset(scenario: Preset) -> Self {
        let d = preset_defaults(scenario);
        RunConfig {
            scenario,
            mode: d.mode,
            n: d.n,
            initial: d.initial,
            controller: d.controller,
            snapshot_dt: d.snapshot_dt,
            output_dir: PathBuf::from(format!("out/{scenario}")),
            full_diagnostics: false,
            conjugate_heat: false,
            verify: VerifySettings { enabled: true, checks: ALL_CHECKS.to_vec(), tolerances: Tolerances::default() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.controller.validate()?;
        if self.n < 8 {
            return Err(FlowError::Config(format!("grid.n must be at least 8, got {}", self.n)));
        }
        if !(self.snapshot_dt > 0.0) {
            return Err(FlowError::Config("run.snapshot_dt must be positive".into()));
        }
        if self.conjugate_heat && !self.scenario.is_bundle() {
            return Err(FlowError::Config("run.conjugate_heat applies to bundle scenarios only".into()));
        }
        if self.conjugate_heat && self.mode != FlowMode::Modified {
            return Err(FlowError::Config("run.conjugate_heat needs the modified flow".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = lex(text)?;
        let scenario = lines
            .iter()
            .find(|l| l.section == "run" && l.key == "scenario")
            .ok_or_else(|| FlowError::Config("[run] scenario is required".into()))?
            .value
            .parse::<Preset>()?;
        let mut cfg = RunConfig::preset(scenario);
        let mut seen = std::collections::HashSet::new();
        for l in &lines {
            if !seen.insert((l.section.as_str(), l.key.as_str())) {
                return Err(FlowError::Config(format!("line {}: duplicate key {}.{}", l.line, l.section, l.key)));
            }
            cfg.apply(l).map_err(|e| match e {
                FlowError::Config(m) => FlowError::Config(format!("line {}: {m}", l.line)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, l: &Line) -> Result<()> {
        let v = l.value.as_str();
        let p = &mut self.initial;
        let c = &mut self.controller;
        let t = &mut self.verify.tolerances;
        match (l.section.as_str(), l.key.as_str()) {
            ("run", "scenario") => {}
            ("run", "mode") => self.mode = v.parse()?,
            ("run", "snapshot_dt") => self.snapshot_dt = real(v)?,
            ("run", "output_dir") => self.output_dir = PathBuf::from(v),
            ("run", "full_diagnostics") => self.full_diagnostics = boolean(v)?,
            ("run", "conjugate_heat") => self.conjugate_heat = boolean(v)?,
            ("grid", "n") => {
                self.n = v.parse().map_err(|_| FlowError::Config(format!("'{v}' is not a grid size")))?
            }
            ("initial", "radius") => p.radius = real(v)?,
            ("initial", "bump") => p.bump = real(v)?,
            ("initial", "u_amp") => p.u_amp = real(v)?,
            ("initial", "lambda") => p.lambda = real(v)?,
            ("initial", "sigma") => p.sigma = real(v)?,
            ("initial", "w_amp") => p.w_amp = real(v)?,
            ("initial", "holonomy") => p.holonomy = holonomy(v)?,
            ("initial", "c") => p.c = real(v)?,
            ("initial", "a") => p.a = real(v)?,
            ("initial", "t_start") => p.t_start = real(v)?,
            ("initial", "eps") => p.eps = real(v)?,
            ("initial", "delta") => p.delta = real(v)?,
            ("initial", "s_amp") => p.s_amp = real(v)?,
            ("initial", "det_amp") => p.det_amp = real(v)?,
            ("initial", "length") => p.length = real(v)?,
            ("controller", "cfl") => c.cfl = real(v)?,
            ("controller", "dt_min") => c.dt_min = real(v)?,
            ("controller", "dt_max") => c.dt_max = real(v)?,
            ("controller", "curvature_stop") => c.curvature_stop = real(v)?,
            ("controller", "t_end") => c.t_end = real(v)?,
            ("controller", "normalizer") => c.normalizer = real(v)?,
            ("verify", "enabled") => self.verify.enabled = boolean(v)?,
            ("verify", "checks") => self.verify.checks = checks(v)?,
            ("verify", "bound") => t.bound = real(v)?,
            ("verify", "volume") => t.volume = real(v)?,
            ("verify", "dissipation") => t.dissipation = real(v)?,
            ("verify", "length") => t.length = real(v)?,
            ("verify", "monotone") => t.monotone = real(v)?,
            ("verify", "w_plus") => t.w_plus = real(v)?,
            ("verify", "mass") => t.mass = real(v)?,
            ("verify", "bound_t_min") => t.bound_t_min = real(v)?,
            ("verify", "resolve") => t.resolve = real(v)?,
            ("verify", "decay_slope") => t.decay_slope = real(v)?,
            ("verify", "length_lower_factor") => t.length_lower_factor = real(v)?,
            ("verify", "length_lower_t_min") => t.length_lower_t_min = real(v)?,
            (s, k) => return Err(FlowError::Config(format!("unknown key {s}.{k}"))),
        }
        Ok(())
    }

    /// Canonical text form listing every key.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.initial;
        let c = &self.controller;
        let t = &self.verify.tolerances;
        let h = p.holonomy.entries();
        let checks = if self.verify.checks == ALL_CHECKS {
            "all".to_string()
        } else {
            self.verify.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
        };
        let _ = write!(
            s,
            "[run]\nscenario = {}\nmode = {}\nsnapshot_dt = {:?}\noutput_dir = {}\nfull_diagnostics = {}\nconjugate_heat = {}\n\n",
            self.scenario,
            self.mode,
            self.snapshot_dt,
            self.output_dir.display(),
            self.full_diagnostics,
            self.conjugate_heat
        );
        let _ = write!(s, "[grid]\nn = {}\n\n", self.n);
        let _ = write!(
            s,
            "[initial]\nradius = {:?}\nbump = {:?}\nu_amp = {:?}\nlambda = {:?}\nsigma = {:?}\nw_amp = {:?}\n\
             holonomy = {} {} {} {}\nc = {:?}\na = {:?}\nt_start = {:?}\neps = {:?}\ndelta = {:?}\n\
             s_amp = {:?}\ndet_amp = {:?}\nlength = {:?}\n\n",
            p.radius, p.bump, p.u_amp, p.lambda, p.sigma, p.w_amp, h[0], h[1], h[2], h[3], p.c, p.a, p.t_start,
            p.eps, p.delta, p.s_amp, p.det_amp, p.length
        );
        let _ = write!(
            s,
            "[controller]\ncfl = {:?}\ndt_min = {:?}\ndt_max = {:?}\ncurvature_stop = {:?}\nt_end = {:?}\nnormalizer = {:?}\n\n",
            c.cfl, c.dt_min, c.dt_max, c.curvature_stop, c.t_end, c.normalizer
        );
        let _ = write!(
            s,
            "[verify]\nenabled = {}\nchecks = {checks}\nbound = {:?}\nvolume = {:?}\ndissipation = {:?}\n\
             length = {:?}\nmonotone = {:?}\nw_plus = {:?}\nmass = {:?}\nbound_t_min = {:?}\nresolve = {:?}\n\
             decay_slope = {:?}\nlength_lower_factor = {:?}\nlength_lower_t_min = {:?}\n",
            self.verify.enabled,
            t.bound,
            t.volume,
            t.dissipation,
            t.length,
            t.monotone,
            t.w_plus,
            t.mass,
            t.bound_t_min,
            t.resolve,
            t.decay_slope,
            t.length_lower_factor,
            t.length_lower_t_min
        );
        s
    }
}

struct Line {
    line: usize,
    section: String,
    key: String,
    value: String,
}

const SECTIONS: [&str; 5] = ["run", "grid", "initial", "controller", "verify"];

fn lex(text: &str) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| FlowError::Config(format!("line {line}: malformed section header")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(FlowError::Config(format!("line {line}: unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| FlowError::Config(format!("line {line}: expected key = value")))?;
        let section =
            section.clone().ok_or_else(|| FlowError::Config(format!("line {line}: key outside of a section")))?;
        out.push(Line { line, section, key: k.trim().to_string(), value: v.trim().to_string() });
    }
    Ok(out)
}

fn real(v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| FlowError::Config(format!("'{v}' is not a number")))?;
    if x.is_nan() {
        return Err(FlowError::Config("NaN is not allowed".into()));
    }
    Ok(x)
}

fn boolean(v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(FlowError::Config(format!("'{v}' is not true or false"))),
    }
}

fn holonomy(v: &str) -> Result<Holonomy> {
    let parts: Vec<i64> = v
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| FlowError::Config(format!("'{s}' is not an integer"))))
        .collect::<Result<_>>()?;
    let [a, b, c, d] = parts[..] else {
        return Err(FlowError::Config(format!("holonomy needs four integers, got {}", parts.len())));
    };
    Holonomy::new(a, b, c, d).map_err(|e| FlowError::Config(format!("holonomy {v}: {e}")))
}

fn checks(v: &str) -> Result<Vec<Check>> {
    if v == "all" {
        return Ok(ALL_CHECKS.to_vec());
    }
    let mut out: Vec<Check> = Vec::new();
    for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let c: Check = name.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PRESETS;

    #[test]
    fn minimal_config_takes_preset_defaults() {
        let c = RunConfig::parse("[run]\nscenario = sol-hyperbolic\n").unwrap();
        assert_eq!(c, RunConfig::preset(Preset::SolHyperbolic));
    }

    #[test]
    fn overrides_and_comments() {
        let text = "# comment\n[run]\nscenario = flat-elliptic  # trailing\nmode = unmodified\n\n[grid]\nn = 48\n\
                    [initial]\nholonomy = -1, -1, 1, 0\n[controller]\nt_end = 2.5\n[verify]\nchecks = detg-extrema, length-lower\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.mode, FlowMode::Unmodified);
        assert_eq!(c.n, 48);
        assert_eq!(c.initial.holonomy.entries(), [-1, -1, 1, 0]);
        assert_eq!(c.controller.t_end, 2.5);
        assert_eq!(c.verify.checks, vec![Check::DetgExtrema, Check::LengthLower]);
    }

    #[test]
    fn errors_are_config_errors() {
        for bad in [
            "[grid]\nn = 32\n",
            "[run]\nscenario = nowhere\n",
            "[run]\nscenario = sol-exact\nspeed = 3\n",
            "[run]\nscenario = sol-exact\n[extra]\n",
            "[run]\nscenario = sol-exact\n[grid]\nn = 4\n",
            "[run]\nscenario = sol-exact\n[grid]\nn = many\n",
            "[run]\nscenario = sol-exact\n[initial]\nholonomy = 2 1 1 2\n",
            "[run]\nscenario = sol-exact\n[initial]\nholonomy = 2 1 1\n",
            "[run]\nscenario = sol-exact\n[controller]\ncfl = 2\n",
            "[run]\nscenario = sol-exact\n[controller]\ncfl = 0.1\ncfl = 0.2\n",
            "[run]\nscenario = sol-exact\n[verify]\nchecks = everything\n",
            "[run]\nscenario = sphere-collapse\nconjugate_heat = true\n",
            "scenario = sol-exact\n",
            "[run\nscenario = sol-exact\n",
            "[run]\nscenario sol-exact\n",
        ] {
            assert!(matches!(RunConfig::parse(bad), Err(FlowError::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn serialization_round_trips() {
        for p in PRESETS {
            let mut c = RunConfig::preset(p);
            c.controller.dt_min = 3.0e-13;
            c.snapshot_dt = 0.1 + 0.2;
            let text = c.to_text();
            let back = RunConfig::parse(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_text(), text);
        }
    }
}
