//! Gluing data of a torus bundle over the circle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::mat2::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HolonomyClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for HolonomyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HolonomyClass::Elliptic => "elliptic",
            HolonomyClass::Parabolic => "parabolic",
            HolonomyClass::Hyperbolic => "hyperbolic",
        };
        f.write_str(s)
    }
}

/// An element of SL(2,ℤ), stored row-major as `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[i64; 4]", into = "[i64; 4]")]
pub struct Holonomy {
    entries: [i64; 4],
}

impl Holonomy {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(FlowError::DeterminantNotOne(det as f64));
        }
        Ok(Holonomy { entries: [a, b, c, d] })
    }

    pub fn identity() -> Self {
        Holonomy { entries: [1, 0, 0, 1] }
    }

    pub fn entries(&self) -> [i64; 4] {
        self.entries
    }

    pub fn trace(&self) -> i64 {
        self.entries[0] + self.entries[3]
    }

    pub fn as_mat2(&self) -> Mat2 {
        let [a, b, c, d] = self.entries;
        Mat2::new(a as f64, b as f64, c as f64, d as f64)
    }

    pub fn inverse(&self) -> Holonomy {
        let [a, b, c, d] = self.entries;
        Holonomy { entries: [d, -b, -c, a] }
    }

    pub fn compose(&self, other: &Holonomy) -> Holonomy {
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = other.entries;
        Holonomy { entries: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h] }
    }

    /// Elliptic ⇔ finite order; parabolic ⇔ |Tr| ≤ 2 and not elliptic;
    /// hyperbolic ⇔ no eigenvalue on the unit circle.
    pub fn class(&self) -> HolonomyClass {
        let tr = self.trace();
        if tr.abs() < 2 {
            HolonomyClass::Elliptic
        } else if tr.abs() == 2 {
            let [a, b, c, d] = self.entries;
            if b == 0 && c == 0 && a == d {
                HolonomyClass::Elliptic
            } else {
                HolonomyClass::Parabolic
            }
        } else {
            HolonomyClass::Hyperbolic
        }
    }

    /// Smallest k ≥ 1 with Hᵏ = I, if H is elliptic.
    pub fn order(&self) -> Option<u32> {
        if self.class() != HolonomyClass::Elliptic {
            return None;
        }
        let mut power = *self;
        for k in 1..=12 {
            if power == Holonomy::identity() {
                return Some(k);
            }
            power = power.compose(self);
        }
        None
    }
}

impl TryFrom<[i64; 4]> for Holonomy {
    type Error = FlowError;
    fn try_from(e: [i64; 4]) -> Result<Self> {
        Holonomy::new(e[0], e[1], e[2], e[3])
    }
}

impl From<Holonomy> for [i64; 4] {
    fn from(h: Holonomy) -> [i64; 4] {
        h.entries
    }
}

impl fmt::Display for Holonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "{a} {b} {c} {d}")
    }
}

/// Classification of a real SL(2,ℝ) gluing matrix by its trace.
pub fn classify_real(m: &Mat2) -> HolonomyClass {
    let tr = m.trace().abs();
    let tol = 1e-12;
    if tr < 2.0 - tol {
        HolonomyClass::Elliptic
    } else if tr <= 2.0 + tol {
        let offdiag = m.b.abs().max(m.c.abs()).max((m.a - m.d).abs());
        if offdiag <= tol {
            HolonomyClass::Elliptic
        } else {
            HolonomyClass::Parabolic
        }
    } else {
        HolonomyClass::Hyperbolic
    }
}
