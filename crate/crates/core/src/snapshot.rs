//! Stored states as JSON lines, one snapshot per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bundle::BundleState;
use crate::error::{FlowError, Result};
use crate::holonomy::Holonomy;
use crate::mat2::{Mat2, Sym2};
use crate::warped::{SphereMetric, SurfaceMetric, TorusMetric, WarpedState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "kebab-case")]
pub enum Snapshot {
    Torus {
        time: f64,
        n: usize,
        g11: Vec<f64>,
        g12: Vec<f64>,
        g22: Vec<f64>,
        u: Vec<f64>,
    },
    SphereRotsym {
        time: f64,
        n: usize,
        /// Scale `A` of the metric `A²(dx² + f² dφ²)`.
        a: f64,
        f: Vec<f64>,
        u: Vec<f64>,
    },
    Bundle {
        time: f64,
        n: usize,
        gyy: Vec<f64>,
        /// Fiber metric as `[xx, xy, yy]` per node.
        g: Vec<[f64; 3]>,
        holonomy: Option<[i64; 4]>,
        /// Row-major gluing matrix; equals the holonomy when one is given.
        twist: [f64; 4],
    },
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        match self {
            Snapshot::Torus { time, .. } | Snapshot::SphereRotsym { time, .. } | Snapshot::Bundle { time, .. } => *time,
        }
    }
}

impl From<&WarpedState> for Snapshot {
    fn from(s: &WarpedState) -> Self {
        match &s.metric {
            SurfaceMetric::Torus(m) => Snapshot::Torus {
                time: s.time,
                n: m.n,
                g11: m.g11.clone(),
                g12: m.g12.clone(),
                g22: m.g22.clone(),
                u: s.u.clone(),
            },
            SurfaceMetric::Sphere(m) => {
                Snapshot::SphereRotsym { time: s.time, n: m.n, a: m.a, f: m.f.clone(), u: s.u.clone() }
            }
        }
    }
}

impl From<&BundleState> for Snapshot {
    fn from(s: &BundleState) -> Self {
        let t = s.twist;
        Snapshot::Bundle {
            time: s.time,
            n: s.n(),
            gyy: s.gyy.clone(),
            g: s.g.iter().map(|g| [g.xx, g.xy, g.yy]).collect(),
            holonomy: s.holonomy.map(|h| h.entries()),
            twist: [t.a, t.b, t.c, t.d],
        }
    }
}

fn check_len(what: &str, len: usize, want: usize) -> Result<()> {
    if len != want {
        return Err(FlowError::Format(format!("{what} has {len} entries, expected {want}")));
    }
    Ok(())
}

impl TryFrom<&Snapshot> for WarpedState {
    type Error = FlowError;
    fn try_from(s: &Snapshot) -> Result<Self> {
        match s {
            Snapshot::Torus { time, n, g11, g12, g22, u } => {
                for (name, v) in [("g11", g11), ("g12", g12), ("g22", g22), ("u", u)] {
                    check_len(name, v.len(), n * n)?;
                }
                let m = TorusMetric::new(*n, g11.clone(), g12.clone(), g22.clone())?;
                WarpedState::new(SurfaceMetric::Torus(m), u.clone(), *time)
            }
            Snapshot::SphereRotsym { time, n, a, f, u } => {
                check_len("f", f.len(), *n)?;
                check_len("u", u.len(), *n)?;
                let m = SphereMetric::new(*n, *a, f.clone())?;
                WarpedState::new(SurfaceMetric::Sphere(m), u.clone(), *time)
            }
            Snapshot::Bundle { .. } => Err(FlowError::Format("expected a warped snapshot, found a bundle".into())),
        }
    }
}

impl TryFrom<&Snapshot> for BundleState {
    type Error = FlowError;
    fn try_from(s: &Snapshot) -> Result<Self> {
        let Snapshot::Bundle { time, n, gyy, g, holonomy, twist } = s else {
            return Err(FlowError::Format("expected a bundle snapshot".into()));
        };
        check_len("gyy", gyy.len(), *n)?;
        check_len("g", g.len(), *n)?;
        let g = g.iter().map(|c| Sym2::new(c[0], c[1], c[2])).collect();
        match holonomy {
            Some([a, b, c, d]) => BundleState::new(gyy.clone(), g, Holonomy::new(*a, *b, *c, *d)?, *time),
            None => {
                BundleState::with_twist(gyy.clone(), g, Mat2::new(twist[0], twist[1], twist[2], twist[3]), *time)
            }
        }
    }
}

pub fn write_snapshots<W: Write>(mut out: W, snapshots: &[Snapshot]) -> Result<()> {
    for s in snapshots {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshots<R: BufRead>(input: R) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| FlowError::Format(format!("snapshot line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{bundle_state, preset_defaults, warped_state, Preset};

    #[test]
    fn round_trip_is_exact() {
        for p in crate::scenario::PRESETS {
            let d = preset_defaults(p);
            let snap = if p.is_bundle() {
                Snapshot::from(&bundle_state(p, 16, &d.initial).unwrap())
            } else {
                Snapshot::from(&warped_state(p, 16, &d.initial).unwrap())
            };
            let mut buf = Vec::new();
            write_snapshots(&mut buf, std::slice::from_ref(&snap)).unwrap();
            let back = read_snapshots(buf.as_slice()).unwrap();
            assert_eq!(back, vec![snap.clone()]);
            if p.is_bundle() {
                let s = BundleState::try_from(&back[0]).unwrap();
                assert_eq!(Snapshot::from(&s), snap);
            } else {
                let s = WarpedState::try_from(&back[0]).unwrap();
                assert_eq!(Snapshot::from(&s), snap);
            }
        }
    }

    #[test]
    fn tagged_by_topology() {
        let d = preset_defaults(Preset::SolExact);
        let s = Snapshot::from(&bundle_state(Preset::SolExact, 16, &d.initial).unwrap());
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with(r#"{"topology":"bundle""#));
    }

    #[test]
    fn malformed_snapshots_are_rejected() {
        let bad = r#"{"topology":"sphere-rotsym","time":0,"n":16,"a":1,"f":[1,2],"u":[0,0]}"#;
        let snaps = read_snapshots(bad.as_bytes()).unwrap();
        assert!(matches!(WarpedState::try_from(&snaps[0]), Err(FlowError::Format(_))));
        assert!(read_snapshots("{not json".as_bytes()).is_err());
        let d = preset_defaults(Preset::SphereCollapse);
        let w = Snapshot::from(&warped_state(Preset::SphereCollapse, 16, &d.initial).unwrap());
        assert!(BundleState::try_from(&w).is_err());
    }
}
