use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{FlowError, Result};
use crate::mat2::Sym2;
use crate::stencil::{d1, d2};

use super::WarpedGeometry;

#[rustfmt::skip]
const STEPS: [(isize, isize); 16] = [
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (1, -1), (-1, 1), (-1, -1),
    (2, 1), (2, -1), (-2, 1), (-2, -1),
    (1, 2), (1, -2), (-1, 2), (-1, -2),
];

/// Min-heap entry for Dijkstra.
#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Metric on the periodic grid over `[0,1)²`, node `(i, j)` at index `j·n + i`
/// with `x = i/n`, `y = j/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusMetric {
    pub n: usize,
    pub g11: Vec<f64>,
    pub g12: Vec<f64>,
    pub g22: Vec<f64>,
}

struct Grid {
    n: usize,
    inv_h: f64,
    inv_h2: f64,
}

impl Grid {
    fn new(n: usize) -> Self {
        let h = 1.0 / n as f64;
        Grid { n, inv_h: 1.0 / h, inv_h2: 1.0 / (h * h) }
    }

    #[inline]
    fn at(&self, f: &[f64], i: usize, j: usize, di: isize, dj: isize) -> f64 {
        let n = self.n as isize;
        let ii = (i as isize + di).rem_euclid(n) as usize;
        let jj = (j as isize + dj).rem_euclid(n) as usize;
        f[jj * self.n + ii]
    }

    fn dx(&self, f: &[f64], i: usize, j: usize) -> f64 {
        d1(self.at(f, i, j, -2, 0), self.at(f, i, j, -1, 0), self.at(f, i, j, 1, 0), self.at(f, i, j, 2, 0), self.inv_h)
    }

    fn dy(&self, f: &[f64], i: usize, j: usize) -> f64 {
        d1(self.at(f, i, j, 0, -2), self.at(f, i, j, 0, -1), self.at(f, i, j, 0, 1), self.at(f, i, j, 0, 2), self.inv_h)
    }

    fn dxx(&self, f: &[f64], i: usize, j: usize) -> f64 {
        d2(
            self.at(f, i, j, -2, 0),
            self.at(f, i, j, -1, 0),
            f[j * self.n + i],
            self.at(f, i, j, 1, 0),
            self.at(f, i, j, 2, 0),
            self.inv_h2,
        )
    }

    fn dyy(&self, f: &[f64], i: usize, j: usize) -> f64 {
        d2(
            self.at(f, i, j, 0, -2),
            self.at(f, i, j, 0, -1),
            f[j * self.n + i],
            self.at(f, i, j, 0, 1),
            self.at(f, i, j, 0, 2),
            self.inv_h2,
        )
    }

    fn dxy(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let col = |di: isize| {
            d1(
                self.at(f, i, j, di, -2),
                self.at(f, i, j, di, -1),
                self.at(f, i, j, di, 1),
                self.at(f, i, j, di, 2),
                self.inv_h,
            )
        };
        d1(col(-2), col(-1), col(1), col(2), self.inv_h)
    }
}

impl TorusMetric {
    pub fn new(n: usize, g11: Vec<f64>, g12: Vec<f64>, g22: Vec<f64>) -> Result<Self> {
        if n < 5 {
            return Err(FlowError::InvalidArgument(format!("torus grid needs n ≥ 5, got {n}")));
        }
        let nn = n * n;
        if g11.len() != nn || g12.len() != nn || g22.len() != nn {
            return Err(FlowError::GridMismatch(format!("expected {nn} values per metric component")));
        }
        let m = TorusMetric { n, g11, g12, g22 };
        m.validate()?;
        Ok(m)
    }

    /// Constant metric `[[a, b], [b, c]]`.
    pub fn constant(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        let nn = n * n;
        TorusMetric::new(n, vec![a; nn], vec![b; nn], vec![c; nn])
    }

    pub fn at(&self, k: usize) -> Sym2 {
        Sym2::new(self.g11[k], self.g12[k], self.g22[k])
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..self.n * self.n {
            let g = self.at(k);
            if !g.is_finite() {
                return Err(FlowError::NonFinite { field: "metric", node: k });
            }
            if !g.is_positive_definite(1e-12) {
                return Err(FlowError::NonSpdMetric { node: k });
            }
        }
        Ok(())
    }

    pub fn min_spacing_sq(&self) -> f64 {
        let h = 1.0 / self.n as f64;
        let lmin = (0..self.n * self.n).map(|k| self.at(k).eigen().lo).fold(f64::INFINITY, f64::min);
        h * h * lmin
    }

    pub fn scale(&self, s: f64) -> TorusMetric {
        let f = |v: &Vec<f64>| v.iter().map(|x| x / s).collect();
        TorusMetric { n: self.n, g11: f(&self.g11), g12: f(&self.g12), g22: f(&self.g22) }
    }

    pub(super) fn geometry(&self, u: &[f64]) -> Result<WarpedGeometry> {
        let n = self.n;
        let nn = n * n;
        let grid = Grid::new(n);
        let h2 = 1.0 / (n * n) as f64;

        let mut metric = Vec::with_capacity(nn);
        let mut sqrt_det = Vec::with_capacity(nn);
        let mut christoffel = Vec::with_capacity(nn);
        let mut p = Vec::with_capacity(nn);
        let mut q = Vec::with_capacity(nn);

        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let g = self.at(k);
                let det = g.det();
                if !(g.xx > 0.0 && det > 0.0) {
                    return Err(FlowError::NonSpdMetric { node: k });
                }
                let gi = Sym2::new(g.yy / det, -g.xy / det, g.xx / det);
                let g11x = grid.dx(&self.g11, i, j);
                let g11y = grid.dy(&self.g11, i, j);
                let g12x = grid.dx(&self.g12, i, j);
                let g12y = grid.dy(&self.g12, i, j);
                let g22x = grid.dx(&self.g22, i, j);
                let g22y = grid.dy(&self.g22, i, j);
                // first-kind symbols Γ_{l,ij}
                let c1 = [0.5 * g11x, 0.5 * g11y, g12y - 0.5 * g22x];
                let c2 = [g12x - 0.5 * g11y, 0.5 * g22x, 0.5 * g22y];
                // second-kind Γ^k_{ij} for ij = 11, 12, 22
                let gam1 = [
                    gi.xx * c1[0] + gi.xy * c2[0],
                    gi.xx * c1[1] + gi.xy * c2[1],
                    gi.xx * c1[2] + gi.xy * c2[2],
                ];
                let gam2 = [
                    gi.xy * c1[0] + gi.yy * c2[0],
                    gi.xy * c1[1] + gi.yy * c2[1],
                    gi.xy * c1[2] + gi.yy * c2[2],
                ];
                let sd = det.sqrt();
                p.push(sd * gam2[0] / g.xx);
                q.push(sd * gam2[1] / g.xx);
                metric.push(g);
                sqrt_det.push(sd);
                christoffel.push((gi, gam1, gam2));
            }
        }

        let mut out = WarpedGeometry {
            metric,
            weights: sqrt_det.iter().map(|s| s * h2).collect(),
            r_m: Vec::with_capacity(nn),
            grad_u: Vec::with_capacity(nn),
            grad_u_sq: Vec::with_capacity(nn),
            hess_u: Vec::with_capacity(nn),
            lap_u: Vec::with_capacity(nn),
            t_norm_sq: Vec::with_capacity(nn),
        };

        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let (gi, gam1, gam2) = christoffel[k];
                // K√g = ∂_y(√g Γ²₁₁/g₁₁) − ∂_x(√g Γ²₁₂/g₁₁)
                let k_sqrt_g = grid.dy(&p, i, j) - grid.dx(&q, i, j);
                out.r_m.push(2.0 * k_sqrt_g / sqrt_det[k]);

                let ux = grid.dx(u, i, j);
                let uy = grid.dy(u, i, j);
                let hess = Sym2::new(
                    grid.dxx(u, i, j) - gam1[0] * ux - gam2[0] * uy,
                    grid.dxy(u, i, j) - gam1[1] * ux - gam2[1] * uy,
                    grid.dyy(u, i, j) - gam1[2] * ux - gam2[2] * uy,
                );
                let grad_sq = gi.xx * ux * ux + 2.0 * gi.xy * ux * uy + gi.yy * uy * uy;
                let lap = gi.xx * hess.xx + 2.0 * gi.xy * hess.xy + gi.yy * hess.yy;
                let t = hess + Sym2::new(ux * ux, ux * uy, uy * uy);
                let t_norm_sq = (gi.to_mat() * t.to_mat()).trace_sq();
                out.grad_u.push([ux, uy]);
                out.grad_u_sq.push(grad_sq);
                out.hess_u.push(hess);
                out.lap_u.push(lap);
                out.t_norm_sq.push(t_norm_sq);
            }
        }
        Ok(out)
    }

    /// Graph distances from node `src` on the periodic 16-neighbour grid.
    fn distances_from(&self, src: usize) -> Vec<f64> {
        let n = self.n;
        let h = 1.0 / n as f64;
        let mut dist = vec![f64::INFINITY; n * n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Item(0.0, src));
        while let Some(Item(d, idx)) = heap.pop() {
            if d > dist[idx] {
                continue;
            }
            let (i, j) = (idx % n, idx / n);
            let g0 = self.at(idx);
            for &(di, dj) in &STEPS {
                let ni = (i as isize + di).rem_euclid(n as isize) as usize;
                let nj = (j as isize + dj).rem_euclid(n as isize) as usize;
                let nidx = nj * n + ni;
                let (vx, vy) = (di as f64 * h, dj as f64 * h);
                let len = |g: Sym2| (g.xx * vx * vx + 2.0 * g.xy * vx * vy + g.yy * vy * vy).sqrt();
                let nd = d + 0.5 * (len(g0) + len(self.at(nidx)));
                if nd < dist[nidx] {
                    dist[nidx] = nd;
                    heap.push(Item(nd, nidx));
                }
            }
        }
        dist
    }

    /// Largest graph distance between grid nodes, taking sources on a
    /// sublattice of stride `max(1, n/16)`; with that stride the result
    /// undershoots the grid diameter by at most one stride length.
    pub(super) fn diameter(&self) -> f64 {
        let n = self.n;
        let stride = (n / 16).max(1);
        let mut best = 0.0f64;
        for j in (0..n).step_by(stride) {
            for i in (0..n).step_by(stride) {
                best = best.max(self.distances_from(j * n + i).into_iter().fold(0.0, f64::max));
            }
        }
        best
    }

    /// Shortest closed loop in the classes `(1, k)` and `(k, 1)`.
    pub(super) fn systole(&self) -> f64 {
        let along_x = self.shortest_crossing(false);
        let along_y = self.shortest_crossing(true);
        along_x.min(along_y)
    }

    /// Minimum over `j` of the graph distance from `(0, j)` to its translate by
    /// one period in `x` (or `y` when `transpose`), on the cylinder obtained by
    /// unrolling that direction.
    fn shortest_crossing(&self, transpose: bool) -> f64 {
        let n = self.n;
        let h = 1.0 / n as f64;
        let cols = n + 1;
        let metric_at = |a: usize, b: usize| -> Sym2 {
            // a runs along the unrolled direction
            let (i, j) = if transpose { (b, a % n) } else { (a % n, b) };
            self.at(j * n + i)
        };
        let edge = |a0: usize, b0: usize, a1: usize, b1: usize, da: isize, db: isize| -> f64 {
            let (vx, vy) = if transpose { (db as f64 * h, da as f64 * h) } else { (da as f64 * h, db as f64 * h) };
            let len = |g: Sym2| (g.xx * vx * vx + 2.0 * g.xy * vx * vy + g.yy * vy * vy).sqrt();
            0.5 * (len(metric_at(a0, b0)) + len(metric_at(a1, b1)))
        };

        let mut best = f64::INFINITY;
        let mut dist = vec![f64::INFINITY; cols * n];
        for start in 0..n {
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            let mut heap = BinaryHeap::new();
            dist[start * cols] = 0.0;
            heap.push(Item(0.0, start * cols));
            let target = start * cols + n;
            while let Some(Item(d, idx)) = heap.pop() {
                if d > dist[idx] || d >= best {
                    continue;
                }
                if idx == target {
                    best = best.min(d);
                    break;
                }
                let (b, a) = (idx / cols, idx % cols);
                for &(da, db) in &STEPS {
                    let na = a as isize + da;
                    if na < 0 || na >= cols as isize {
                        continue;
                    }
                    let nb = (b as isize + db).rem_euclid(n as isize) as usize;
                    let na = na as usize;
                    let nd = d + edge(a, b, na, nb, da, db);
                    let nidx = nb * cols + na;
                    if nd < dist[nidx] {
                        dist[nidx] = nd;
                        heap.push(Item(nd, nidx));
                    }
                }
            }
        }
        best
    }
}
