//! Globally adaptive cubature on triangles and axis-aligned squares.
//!
//! A region is integrated with a fixed interior rule and compared against the
//! same rule applied to its four congruent children. The leaf with the largest
//! disagreement is split until the summed disagreement drops below
//! `rel_tol` times the summed magnitude. All nodes are strictly interior and all
//! weights positive, so integrable point singularities sitting on region corners
//! never get evaluated and averages of pointwise bounds keep those bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geom::{midpoint, orient, Point};

/// Default cap on the number of leaves (the equivalent of eight uniform
/// quadrisections).
pub const DEFAULT_MAX_LEAVES: usize = 1 << 16;

pub trait Region: Copy {
    fn measure(&self) -> f64;
    fn split(&self) -> [Self; 4];
    /// Physical nodes and weights (weights sum to the measure).
    fn for_each_node(&self, f: impl FnMut(Point, f64));
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle(pub [Point; 3]);

impl Triangle {
    pub fn new(a: Point, b: Point, c: Point) -> Self {
        Triangle([a, b, c])
    }
}

// Symmetric 7-point rule, exact for polynomials of degree 5.
const TRI_RULE: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_18;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_34;
    const W2: f64 = 0.125_939_180_544_827_15;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

impl Region for Triangle {
    fn measure(&self) -> f64 {
        0.5 * orient(self.0[0], self.0[1], self.0[2]).abs()
    }

    fn split(&self) -> [Self; 4] {
        let [a, b, c] = self.0;
        let ab = midpoint(a, b);
        let bc = midpoint(b, c);
        let ca = midpoint(c, a);
        [
            Triangle([a, ab, ca]),
            Triangle([ab, b, bc]),
            Triangle([ca, bc, c]),
            Triangle([bc, ca, ab]),
        ]
    }

    fn for_each_node(&self, mut f: impl FnMut(Point, f64)) {
        let area = self.measure();
        let [a, b, c] = self.0;
        for (l, w) in TRI_RULE {
            let x = [
                l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
                l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
            ];
            f(x, w * area);
        }
    }
}

/// Axis-aligned square `[x0, x0 + side] x [y0, y0 + side]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    pub origin: Point,
    pub side: f64,
}

impl Square {
    pub fn new(origin: Point, side: f64) -> Self {
        Square { origin, side }
    }

    /// Dyadic square of side `2^-level` with lower-left corner `(ix, iy) 2^-level`.
    pub fn dyadic(level: u32, ix: usize, iy: usize) -> Self {
        let side = (0.5f64).powi(level as i32);
        Square {
            origin: [ix as f64 * side, iy as f64 * side],
            side,
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        let eps = 1e-12 * self.side;
        (0..2).all(|d| x[d] >= self.origin[d] - eps && x[d] <= self.origin[d] + self.side + eps)
    }
}

// 3-point Gauss-Legendre on [0, 1], tensorised.
const GL3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

impl Region for Square {
    fn measure(&self) -> f64 {
        self.side * self.side
    }

    fn split(&self) -> [Self; 4] {
        let h = 0.5 * self.side;
        let [x, y] = self.origin;
        [
            Square::new([x, y], h),
            Square::new([x + h, y], h),
            Square::new([x, y + h], h),
            Square::new([x + h, y + h], h),
        ]
    }

    fn for_each_node(&self, mut f: impl FnMut(Point, f64)) {
        let area = self.measure();
        for (sy, wy) in GL3 {
            for (sx, wx) in GL3 {
                let x = [self.origin[0] + sx * self.side, self.origin[1] + sy * self.side];
                f(x, wx * wy * area);
            }
        }
    }
}

/// Adaptive integration policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubature {
    pub rel_tol: f64,
    /// Uniform splits applied before adaptivity starts.
    pub min_depth: u32,
    pub max_leaves: usize,
}

impl Cubature {
    pub fn new(rel_tol: f64) -> Self {
        Cubature {
            rel_tol,
            min_depth: 1,
            max_leaves: DEFAULT_MAX_LEAVES,
        }
    }

    pub fn with_min_depth(mut self, depth: u32) -> Self {
        self.min_depth = depth;
        self
    }

    /// Integral of a vector-valued integrand over `region`.
    pub fn integrate<R: Region, const N: usize>(&self, region: R, f: impl Fn(Point) -> [f64; N]) -> Result<[f64; N]> {
        let mut seq = 0u64;
        let mut heap = BinaryHeap::new();
        let mut roots = vec![region];
        for _ in 0..self.min_depth {
            roots = roots.iter().flat_map(|r| r.split()).collect();
        }
        for r in roots {
            heap.push(Leaf::new(r, &f, seq)?);
            seq += 1;
        }
        loop {
            let scale = heap.iter().map(|l| l.abs_sum).sum::<f64>();
            let err: f64 = heap.iter().map(|l| l.err).sum();
            if err <= self.rel_tol * scale || err == 0.0 {
                break;
            }
            if heap.len() + 3 > self.max_leaves {
                return Err(Error::Quadrature {
                    rel_tol: self.rel_tol,
                    leaves: heap.len(),
                    estimate: err / scale.max(f64::MIN_POSITIVE),
                });
            }
            // split a batch of the worst leaves before re-summing
            let batch = (heap.len() / 8).max(1);
            for _ in 0..batch {
                let Some(worst) = heap.pop() else { break };
                if worst.err == 0.0 {
                    heap.push(worst);
                    break;
                }
                for child in worst.region.split() {
                    heap.push(Leaf::new(child, &f, seq)?);
                    seq += 1;
                }
            }
        }
        let mut leaves = heap.into_vec();
        leaves.sort_by_key(|l| l.seq);
        let mut out = [0.0; N];
        for l in &leaves {
            for k in 0..N {
                out[k] += l.fine[k];
            }
        }
        Ok(out)
    }

    /// Mean value over the region.
    pub fn average<R: Region, const N: usize>(&self, region: R, f: impl Fn(Point) -> [f64; N]) -> Result<[f64; N]> {
        let m = region.measure();
        Ok(self.integrate(region, f)?.map(|v| v / m))
    }

    pub fn average_scalar<R: Region>(&self, region: R, f: impl Fn(Point) -> f64) -> Result<f64> {
        Ok(self.average(region, |x| [f(x)])?[0])
    }
}

fn apply_rule<R: Region, const N: usize>(region: &R, f: &impl Fn(Point) -> [f64; N]) -> Result<[f64; N]> {
    let mut acc = [0.0; N];
    let mut bad = None;
    region.for_each_node(|x, w| {
        if bad.is_some() {
            return;
        }
        let v = f(x);
        if v.iter().any(|c| !c.is_finite()) {
            bad = Some(x);
            return;
        }
        for k in 0..N {
            acc[k] += w * v[k];
        }
    });
    match bad {
        Some(point) => Err(Error::Singularity { point }),
        None => Ok(acc),
    }
}

struct Leaf<R, const N: usize> {
    region: R,
    fine: [f64; N],
    err: f64,
    abs_sum: f64,
    seq: u64,
}

impl<R: Region, const N: usize> Leaf<R, N> {
    fn new(region: R, f: &impl Fn(Point) -> [f64; N], seq: u64) -> Result<Self> {
        let coarse = apply_rule(&region, f)?;
        let mut fine = [0.0; N];
        for child in region.split() {
            let v = apply_rule(&child, f)?;
            for k in 0..N {
                fine[k] += v[k];
            }
        }
        let err = (0..N).map(|k| (fine[k] - coarse[k]).abs()).fold(0.0, f64::max);
        let abs_sum = fine.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Leaf {
            region,
            fine,
            err,
            abs_sum,
            seq,
        })
    }
}

impl<R, const N: usize> PartialEq for Leaf<R, N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<R, const N: usize> Eq for Leaf<R, N> {}

impl<R, const N: usize> PartialOrd for Leaf<R, N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<R, const N: usize> Ord for Leaf<R, N> {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; older leaves first on ties
        self.err.total_cmp(&other.err).then_with(|| other.seq.cmp(&self.seq))
    }
}
