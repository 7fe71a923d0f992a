//! Adaptive Gauss–Kronrod quadrature on bounded intervals.
//!
//! A 7/15-point Gauss–Kronrod rule with greedy bisection of the segment of
//! largest error estimate. The subdivision budget is capped; exhausting it
//! is an error, never a silent truncation.

use alloc::collections::BinaryHeap;

use num_complex::Complex64;

use crate::Error;

/// Maximum number of segments per integration piece.
pub const MAX_SEGMENTS: usize = 1 << 16;

/// Default absolute tolerance for internal quadratures.
pub const ABS_TOL: f64 = 1e-12;
/// Default relative tolerance for internal quadratures.
pub const REL_TOL: f64 = 1e-10;

// 15-point Kronrod abscissae (positive half, descending) and weights,
// with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Values that can be accumulated by the quadrature engine.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

struct Segment<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T> Eq for Segment<T> {}

impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, lo: f64, hi: f64) -> (T, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = T::zero();
    let mut gauss = T::zero();
    for (i, &x) in XGK.iter().enumerate() {
        let dx = half * x;
        let val = if x == 0.0 {
            f(center)
        } else {
            f(center - dx).add(f(center + dx))
        };
        kron = kron.add(val.scale(WGK[i]));
        // Odd Kronrod indices coincide with the Gauss nodes.
        if i % 2 == 1 {
            gauss = gauss.add(val.scale(WG[i / 2]));
        } else if x == 0.0 {
            gauss = gauss.add(val.scale(WG[3]));
        }
    }
    let value = kron.scale(half);
    let error = kron.sub(gauss).norm() * half;
    (value, error)
}

/// Integrate `f` over `[lo, hi]` to absolute tolerance `abs_tol` plus
/// relative tolerance `rel_tol`.
pub fn adaptive<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    what: &'static str,
) -> crate::Result<T> {
    if lo >= hi {
        return Ok(T::zero());
    }
    let (value, error) = kronrod(&f, lo, hi);
    let mut segments: BinaryHeap<Segment<T>> = BinaryHeap::new();
    segments.push(Segment { lo, hi, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let tol = abs_tol + rel_tol * total.norm();
        if total_err <= tol {
            break;
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureBudget { what, estimate: total.norm() });
        }
        // Split the segment of largest error estimate.
        let seg = segments.pop().expect("nonempty heap");
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // interval at floating-point resolution: accept as is
            segments.push(seg);
            break;
        }
        let (v1, e1) = kronrod(&f, seg.lo, mid);
        let (v2, e2) = kronrod(&f, mid, seg.hi);
        total = total.sub(seg.value).add(v1).add(v2);
        total_err += e1 + e2 - seg.error;
        segments.push(Segment { lo: seg.lo, hi: mid, value: v1, error: e1 });
        segments.push(Segment { lo: mid, hi: seg.hi, value: v2, error: e2 });
    }
    // re-sum for a numerically clean total
    let mut sum = T::zero();
    for seg in segments.iter() {
        sum = sum.add(seg.value);
    }
    Ok(sum)
}
