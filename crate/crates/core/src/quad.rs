//! Adaptive two-dimensional quadrature over axis-aligned rectangles.
//!
//! Each cell is estimated with a pair of tensor Gauss-Legendre rules (3x3
//! and 7x7); the absolute difference between the two serves as the cell's
//! error estimate. The cell with the largest estimate is repeatedly split
//! into four quadrants until the summed error drops below the requested
//! tolerance or the cell budget is exhausted. Callers seed the initial
//! cell list at known discontinuity lines (for the nonlinear-interference
//! integrand: channel edges), which keeps refinement local.
//!
//! The integrand is evaluated through a plain `Fn(F, F) -> F`; the engine
//! is generic over [`Scalar`] and fully deterministic: ties in the error
//! ordering are broken by cell creation order.
//!
//! # Example
//!
//! ```
//! use flexplan_core::quad::{adaptive_2d, QuadOptions, Rect};
//!
//! let opts = QuadOptions::with_rel_tol(1e-6);
//! let r = adaptive_2d(|x: f64, y: f64| x * x * y * y, &[Rect::new(0.0, 1.0, 0.0, 1.0)], &opts);
//! assert!(r.converged);
//! assert!((r.value - 1.0 / 9.0).abs() < 1e-12);
//! ```

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Scalar;

/// Gauss-Legendre abscissae/weights on [-1, 1], low-order member of the
/// embedded pair.
const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [
    0.555_555_555_555_555_6,
    0.888_888_888_888_888_8,
    0.555_555_555_555_555_6,
];

/// High-order member of the embedded pair.
const GL7_NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_5,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_5,
    0.949_107_912_342_758_5,
];
const GL7_WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

/// Axis-aligned integration cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<F> {
    pub x0: F,
    pub x1: F,
    pub y0: F,
    pub y1: F,
}

impl<F: Scalar> Rect<F> {
    pub fn new(x0: F, x1: F, y0: F, y1: F) -> Self {
        Self { x0, x1, y0, y1 }
    }

    fn is_degenerate(&self) -> bool {
        // NaN bounds fail the comparison and count as degenerate.
        self.x0.partial_cmp(&self.x1) != Some(Ordering::Less)
            || self.y0.partial_cmp(&self.y1) != Some(Ordering::Less)
    }
}

/// Tolerances and budget for one integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<F> {
    /// Stop once total error <= rel_tol * |total value|.
    pub rel_tol: F,
    /// Absolute floor under which the error is accepted regardless of the
    /// relative test; keeps integrals that are exactly zero convergent.
    pub abs_tol: F,
    /// Hard cap on the number of leaf cells.
    pub max_cells: usize,
}

impl<F: Scalar> QuadOptions<F> {
    pub fn with_rel_tol(rel_tol: F) -> Self {
        Self {
            rel_tol,
            abs_tol: F::zero(),
            max_cells: 40_000,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<F> {
    /// Best available estimate of the integral.
    pub value: F,
    /// Summed per-cell error estimates for `value`.
    pub error: F,
    /// Leaf cells at termination.
    pub cells: usize,
    /// Total integrand evaluations.
    pub evaluations: usize,
    /// Whether the tolerance was met within the cell budget.
    pub converged: bool,
}

struct HeapCell<F> {
    rect: Rect<F>,
    value: F,
    error: F,
    seq: u64,
}

impl<F: Scalar> PartialEq for HeapCell<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<F: Scalar> Eq for HeapCell<F> {}

impl<F: Scalar> PartialOrd for HeapCell<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Scalar> Ord for HeapCell<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; creation order breaks ties so refinement is
        // reproducible run to run.
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Evaluates the embedded rule pair on one cell.
///
/// Returns (high-order value, |high - low| error estimate, evaluations).
fn estimate_cell<F: Scalar>(f: &impl Fn(F, F) -> F, rect: &Rect<F>) -> (F, F, usize) {
    let half = F::from_f64(0.5);
    let hx = (rect.x1 - rect.x0) * half;
    let hy = (rect.y1 - rect.y0) * half;
    let cx = (rect.x1 + rect.x0) * half;
    let cy = (rect.y1 + rect.y0) * half;
    let scale = hx * hy;

    let mut low = F::zero();
    for (xi, wx) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
        let x = cx + hx * F::from_f64(*xi);
        for (yi, wy) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
            let y = cy + hy * F::from_f64(*yi);
            low = low + F::from_f64(wx * wy) * f(x, y);
        }
    }
    low = low * scale;

    let mut high = F::zero();
    for (xi, wx) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
        let x = cx + hx * F::from_f64(*xi);
        for (yi, wy) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
            let y = cy + hy * F::from_f64(*yi);
            high = high + F::from_f64(wx * wy) * f(x, y);
        }
    }
    high = high * scale;

    (high, (high - low).abs(), GL3_NODES.len().pow(2) + GL7_NODES.len().pow(2))
}

/// Integrates `f` over the union of `cells`, refining adaptively.
///
/// Degenerate (zero-area) cells contribute nothing. The cell list is
/// treated as a disjoint cover of the integration domain; overlapping
/// cells would be double-counted.
pub fn adaptive_2d<F: Scalar>(
    f: impl Fn(F, F) -> F,
    cells: &[Rect<F>],
    opts: &QuadOptions<F>,
) -> QuadResult<F> {
    let mut heap: BinaryHeap<HeapCell<F>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut evaluations = 0usize;
    let mut total_value = F::zero();
    let mut total_error = F::zero();

    for rect in cells {
        if rect.is_degenerate() {
            continue;
        }
        let (value, error, evals) = estimate_cell(&f, rect);
        evaluations += evals;
        total_value = total_value + value;
        total_error = total_error + error;
        heap.push(HeapCell {
            rect: *rect,
            value,
            error,
            seq,
        });
        seq += 1;
    }

    let tolerance_met = |value: F, error: F| -> bool {
        error <= opts.abs_tol || error <= opts.rel_tol * value.abs()
    };

    while !tolerance_met(total_value, total_error) && heap.len() + 3 <= opts.max_cells {
        let worst = match heap.pop() {
            Some(cell) => cell,
            None => break,
        };
        total_value = total_value - worst.value;
        total_error = total_error - worst.error;

        let half = F::from_f64(0.5);
        let xm = (worst.rect.x0 + worst.rect.x1) * half;
        let ym = (worst.rect.y0 + worst.rect.y1) * half;
        let quadrants = [
            Rect::new(worst.rect.x0, xm, worst.rect.y0, ym),
            Rect::new(xm, worst.rect.x1, worst.rect.y0, ym),
            Rect::new(worst.rect.x0, xm, ym, worst.rect.y1),
            Rect::new(xm, worst.rect.x1, ym, worst.rect.y1),
        ];
        for rect in quadrants {
            if rect.is_degenerate() {
                // Bisection of a finite cell cannot produce one, but guard
                // against midpoint collapse at the limits of precision.
                continue;
            }
            let (value, error, evals) = estimate_cell(&f, &rect);
            evaluations += evals;
            total_value = total_value + value;
            total_error = total_error + error;
            heap.push(HeapCell {
                rect,
                value,
                error,
                seq,
            });
            seq += 1;
        }
    }

    QuadResult {
        value: total_value,
        error: total_error,
        cells: heap.len(),
        evaluations,
        converged: tolerance_met(total_value, total_error),
    }
}
