//! Characteristic triplets of infinitely divisible laws and their exact
//! arithmetic.
//!
//! A law is stored as `(a, b, r)`: real drift `a`, nonnegative second-order
//! part `b` and a finitely parametrised Lévy measure `r`. The `flavor` tag
//! records which Lévy–Khintchine formula interprets the triplet (free or
//! classical); the components themselves are shared, which is exactly what
//! makes the Bercovici–Pata map a flavor toggle.
//!
//! Lévy measures are point atoms away from zero, power-law pieces
//! `c·|t|^(-1-alpha)` on annuli `t_min < |t| < eps0`, and polynomial-density
//! pieces on intervals away from zero. The family is closed under addition,
//! scaling `t -> c·t` and small-jump truncation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::{self, adaptive};
use crate::{Error, Result};

/// Bounded continuous centering function: `-1` below `-1`, the identity on
/// `[-1, 1]`, `+1` above `1`. Odd and 1-Lipschitz.
pub fn sigma_centering(t: f64) -> f64 {
    t.clamp(-1.0, 1.0)
}

/// Point mass of a Lévy measure: location `t != 0`, mass `> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    pub t: f64,
    pub mass: f64,
}

/// Power-law piece with density `c_plus·t^(-1-alpha)` on `(t_min, eps0)` and
/// `c_minus·|t|^(-1-alpha)` on `(-eps0, -t_min)`.
///
/// `t_min = 0` is the usual small-jump piece; a positive `t_min` arises from
/// truncation and from scaling. `alpha < 2` keeps `∫ min(1, t²)` finite.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NearZero {
    pub alpha: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub eps0: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "is_zero"))]
    pub t_min: f64,
}

#[cfg(feature = "serde")]
fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// Polynomial density on a half-open interval `[lo, hi)` not containing 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BodyPiece {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl BodyPiece {
    fn density(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Exact integral of `t^n · density(t)` over `[lo, hi)`.
    fn poly_moment(&self, n: u32) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let p = k as i32 + n as i32 + 1;
            acc += c * (self.hi.powi(p) - self.lo.powi(p)) / p as f64;
        }
        acc
    }

    pub(crate) fn mass(&self) -> f64 {
        self.poly_moment(0)
    }
}

/// Finitely parametrised Lévy measure.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevyMeasure {
    #[cfg_attr(feature = "serde", serde(default))]
    pub atoms: Vec<Atom>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub near_zero: Vec<NearZero>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub body: Vec<BodyPiece>,
}

impl LevyMeasure {
    pub fn zero() -> Self {
        LevyMeasure::default()
    }

    /// Single point mass.
    pub fn dirac(t: f64, mass: f64) -> Self {
        LevyMeasure { atoms: vec![Atom { t, mass }], near_zero: Vec::new(), body: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.near_zero.is_empty() && self.body.is_empty()
    }

    /// Structural validation of the invariants.
    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if a.t == 0.0 || !a.t.is_finite() {
                return Err(Error::Invalid { what: "atom at 0 or non-finite location" });
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::Invalid { what: "atom mass must be positive" });
            }
        }
        for nz in &self.near_zero {
            if !(nz.alpha >= 0.0 && nz.alpha < 2.0) {
                return Err(Error::Invalid { what: "near-zero exponent must lie in [0, 2)" });
            }
            if nz.c_plus < 0.0 || nz.c_minus < 0.0 {
                return Err(Error::Invalid { what: "near-zero coefficients must be nonnegative" });
            }
            if !(nz.eps0 > 0.0) || nz.t_min < 0.0 || nz.t_min >= nz.eps0 {
                return Err(Error::Invalid { what: "near-zero window must satisfy 0 <= t_min < eps0" });
            }
        }
        // Same-exponent power windows must not overlap.
        for (i, p) in self.near_zero.iter().enumerate() {
            for q in self.near_zero.iter().skip(i + 1) {
                if p.alpha == q.alpha && p.t_min < q.eps0 && q.t_min < p.eps0 {
                    return Err(Error::Invalid { what: "overlapping power windows of equal exponent" });
                }
            }
        }
        for piece in &self.body {
            if !(piece.lo < piece.hi) {
                return Err(Error::Invalid { what: "empty body interval" });
            }
            if piece.lo < 0.0 && piece.hi > 0.0 {
                return Err(Error::Invalid { what: "body interval contains 0" });
            }
            // the |t|-range of the (one-sided) piece must avoid every
            // power-piece window
            let (lo_abs, hi_abs) = if piece.lo >= 0.0 {
                (piece.lo, piece.hi)
            } else {
                (-piece.hi, -piece.lo)
            };
            for nz in &self.near_zero {
                if lo_abs < nz.eps0 && nz.t_min < hi_abs {
                    return Err(Error::Invalid { what: "body interval overlaps a power-piece window" });
                }
            }
            // Density nonnegativity, spot-checked on a node ladder.
            for k in 0..=16 {
                let t = piece.lo + (piece.hi - piece.lo) * k as f64 / 16.0;
                if piece.density(t) < -1e-12 {
                    return Err(Error::Invalid { what: "negative body density" });
                }
            }
        }
        for (i, p) in self.body.iter().enumerate() {
            for q in self.body.iter().skip(i + 1) {
                if p.lo < q.hi && q.lo < p.hi {
                    return Err(Error::Invalid { what: "overlapping body intervals" });
                }
            }
        }
        Ok(())
    }

    /// Canonical ordering: atoms sorted and merged, power pieces sorted by
    /// `(alpha, t_min)`, body pieces sorted by interval. Zero-mass parts are
    /// dropped. Makes structural equality meaningful.
    pub fn normal_form(mut self) -> Self {
        self.atoms.retain(|a| a.mass != 0.0);
        self.atoms.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms.drain(..) {
            match atoms.last_mut() {
                Some(last) if last.t == a.t => last.mass += a.mass,
                _ => atoms.push(a),
            }
        }
        atoms.retain(|a| a.mass != 0.0);

        let near_zero = normalize_power_pieces(core::mem::take(&mut self.near_zero));
        let body = normalize_body_pieces(core::mem::take(&mut self.body));
        LevyMeasure { atoms, near_zero, body }
    }

    /// Sum of two Lévy measures.
    pub fn add(&self, other: &LevyMeasure) -> LevyMeasure {
        let mut out = self.clone();
        out.atoms.extend_from_slice(&other.atoms);
        out.near_zero.extend_from_slice(&other.near_zero);
        out.body.extend_from_slice(&other.body);
        out.normal_form()
    }

    /// Multiply all masses by `s >= 0`.
    pub fn scale_mass(&self, s: f64) -> LevyMeasure {
        if s == 0.0 {
            return LevyMeasure::zero();
        }
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.mass *= s;
        }
        for nz in &mut out.near_zero {
            nz.c_plus *= s;
            nz.c_minus *= s;
        }
        for piece in &mut out.body {
            for c in &mut piece.coeffs {
                *c *= s;
            }
        }
        out
    }

    /// Image of the measure under `t -> c·t`, `c != 0`.
    pub fn map_scale(&self, c: f64) -> LevyMeasure {
        assert!(c != 0.0, "map_scale requires c != 0");
        let mut out = LevyMeasure::zero();
        for a in &self.atoms {
            out.atoms.push(Atom { t: c * a.t, mass: a.mass });
        }
        let fac = c.abs();
        for nz in &self.near_zero {
            let boost = fac.powf(nz.alpha);
            let (c_plus, c_minus) = if c > 0.0 {
                (nz.c_plus * boost, nz.c_minus * boost)
            } else {
                (nz.c_minus * boost, nz.c_plus * boost)
            };
            out.near_zero.push(NearZero {
                alpha: nz.alpha,
                c_plus,
                c_minus,
                eps0: fac * nz.eps0,
                t_min: fac * nz.t_min,
            });
        }
        for piece in &self.body {
            // density(u) = old_density(u / c) / |c|
            let coeffs: Vec<f64> =
                piece.coeffs.iter().enumerate().map(|(k, &a)| a / (c.powi(k as i32) * fac)).collect();
            let (lo, hi) = if c > 0.0 { (c * piece.lo, c * piece.hi) } else { (c * piece.hi, c * piece.lo) };
            out.body.push(BodyPiece { lo, hi, coeffs });
        }
        out.normal_form()
    }

    /// Restriction to `|t| > eps` (small jumps removed).
    pub fn restrict_tail(&self, eps: f64) -> LevyMeasure {
        assert!(eps > 0.0, "restrict_tail requires eps > 0");
        let mut out = LevyMeasure::zero();
        for a in &self.atoms {
            if a.t.abs() > eps {
                out.atoms.push(*a);
            }
        }
        for nz in &self.near_zero {
            if eps < nz.eps0 {
                out.near_zero.push(NearZero { t_min: nz.t_min.max(eps), ..*nz });
            }
        }
        for piece in &self.body {
            if piece.hi <= -eps || piece.lo >= eps {
                out.body.push(piece.clone());
            } else if piece.lo < -eps && piece.hi > -eps {
                out.body.push(BodyPiece { lo: piece.lo, hi: -eps, coeffs: piece.coeffs.clone() });
            } else if piece.lo < eps && piece.hi > eps {
                out.body.push(BodyPiece { lo: eps, hi: piece.hi, coeffs: piece.coeffs.clone() });
            }
        }
        out.normal_form()
    }

    /// Quadrature-window comparison for measures on different
    /// parametrisations: atoms are matched exactly, continuous parts through
    /// the fixed integrand menu over a window ladder.
    pub fn close_to(&self, other: &LevyMeasure, tol: f64) -> bool {
        let a = self.clone().normal_form();
        let b = other.clone().normal_form();
        if a.atoms.len() != b.atoms.len() {
            return false;
        }
        for (x, y) in a.atoms.iter().zip(b.atoms.iter()) {
            if (x.t - y.t).abs() > tol * (1.0 + x.t.abs()) || (x.mass - y.mass).abs() > tol * (1.0 + x.mass) {
                return false;
            }
        }
        let ca = LevyMeasure { atoms: Vec::new(), ..a };
        let cb = LevyMeasure { atoms: Vec::new(), ..b };
        // only integrands finite for every Lévy measure
        let mut menu: Vec<LevyIntegrand> =
            vec![LevyIntegrand::MinOneT2, LevyIntegrand::TMinusSigma];
        for &w in &[0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            menu.push(LevyIntegrand::T2Window(w));
            menu.push(LevyIntegrand::TailIndicator(w));
            menu.push(LevyIntegrand::BumpRamp(w));
        }
        for g in menu {
            let va = match levy_quadrature(&ca, g) {
                Ok(v) => v,
                Err(_) => return false,
            };
            let vb = match levy_quadrature(&cb, g) {
                Ok(v) => v,
                Err(_) => return false,
            };
            if (va - vb).abs() > tol * (1.0 + va.abs().max(vb.abs())) {
                return false;
            }
        }
        true
    }
}

fn normalize_power_pieces(pieces: Vec<NearZero>) -> Vec<NearZero> {
    let mut pieces: Vec<NearZero> =
        pieces.into_iter().filter(|p| (p.c_plus != 0.0 || p.c_minus != 0.0) && p.t_min < p.eps0).collect();
    pieces.sort_by(|x, y| {
        x.alpha
            .partial_cmp(&y.alpha)
            .unwrap()
            .then(x.t_min.partial_cmp(&y.t_min).unwrap())
    });
    let mut out: Vec<NearZero> = Vec::new();
    let mut i = 0;
    while i < pieces.len() {
        // Group by exponent, then resolve overlapping windows by splitting
        // at all boundaries and summing coefficients per elementary window.
        let alpha = pieces[i].alpha;
        let mut group = Vec::new();
        while i < pieces.len() && pieces[i].alpha == alpha {
            group.push(pieces[i]);
            i += 1;
        }
        let mut bounds: Vec<f64> = Vec::new();
        for p in &group {
            bounds.push(p.t_min);
            bounds.push(p.eps0);
        }
        bounds.sort_by(|x, y| x.partial_cmp(y).unwrap());
        bounds.dedup();
        let mut merged: Vec<NearZero> = Vec::new();
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut c_plus = 0.0;
            let mut c_minus = 0.0;
            for p in &group {
                if p.t_min <= lo && hi <= p.eps0 {
                    c_plus += p.c_plus;
                    c_minus += p.c_minus;
                }
            }
            if c_plus == 0.0 && c_minus == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(prev) if prev.eps0 == lo && prev.c_plus == c_plus && prev.c_minus == c_minus => {
                    prev.eps0 = hi;
                }
                _ => merged.push(NearZero { alpha, c_plus, c_minus, eps0: hi, t_min: lo }),
            }
        }
        out.extend(merged);
    }
    out
}

fn normalize_body_pieces(pieces: Vec<BodyPiece>) -> Vec<BodyPiece> {
    let mut pieces: Vec<BodyPiece> =
        pieces.into_iter().filter(|p| p.lo < p.hi && p.coeffs.iter().any(|&c| c != 0.0)).collect();
    if pieces.is_empty() {
        return pieces;
    }
    let mut bounds: Vec<f64> = Vec::new();
    for p in &pieces {
        bounds.push(p.lo);
        bounds.push(p.hi);
    }
    bounds.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bounds.dedup();
    pieces.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    let mut out: Vec<BodyPiece> = Vec::new();
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut coeffs: Vec<f64> = Vec::new();
        for p in &pieces {
            if p.lo <= lo && hi <= p.hi {
                if coeffs.len() < p.coeffs.len() {
                    coeffs.resize(p.coeffs.len(), 0.0);
                }
                for (k, &c) in p.coeffs.iter().enumerate() {
                    coeffs[k] += c;
                }
            }
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(prev) if prev.hi == lo && prev.coeffs == coeffs => prev.hi = hi,
            _ => out.push(BodyPiece { lo, hi, coeffs }),
        }
    }
    out
}

/// Fixed menu of real integrands for [`levy_quadrature`]. Every shape is
/// `O(t²)` or better at 0, or carries an explicit divergence rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevyIntegrand {
    /// `min(1, t²)`
    MinOneT2,
    /// `t − ς(t)`
    TMinusSigma,
    /// `t^n`
    Power(u32),
    /// `ς(t)`
    Sigma,
    /// `|ς(t)|`
    AbsSigma,
    /// `t²·1_{[-w, w]}(t)`
    T2Window(f64),
    /// `1_{|t| > w}(t)`
    TailIndicator(f64),
    /// `clamp((|t| − δ)/δ, 0, 1)`: continuous, bounded, vanishing near 0
    BumpRamp(f64),
    /// `ς(c·t) − c·ς(t)`
    SigmaScaledDiff(f64),
    /// `min(1, c²·t²)`
    MinOneScaledT2(f64),
}

impl LevyIntegrand {
    /// Pointwise evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            LevyIntegrand::MinOneT2 => (t * t).min(1.0),
            LevyIntegrand::TMinusSigma => t - sigma_centering(t),
            LevyIntegrand::Power(n) => t.powi(n as i32),
            LevyIntegrand::Sigma => sigma_centering(t),
            LevyIntegrand::AbsSigma => sigma_centering(t).abs(),
            LevyIntegrand::T2Window(w) => {
                if t.abs() <= w {
                    t * t
                } else {
                    0.0
                }
            }
            LevyIntegrand::TailIndicator(w) => {
                if t.abs() > w {
                    1.0
                } else {
                    0.0
                }
            }
            LevyIntegrand::BumpRamp(d) => ((t.abs() - d) / d).clamp(0.0, 1.0),
            LevyIntegrand::SigmaScaledDiff(c) => sigma_centering(c * t) - c * sigma_centering(t),
            LevyIntegrand::MinOneScaledT2(c) => (c * c * t * t).min(1.0),
        }
    }

    /// Positive magnitudes where the integrand has kinks; adaptive pieces
    /// are split there.
    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            LevyIntegrand::MinOneT2 | LevyIntegrand::TMinusSigma | LevyIntegrand::Sigma | LevyIntegrand::AbsSigma => {
                vec![1.0]
            }
            LevyIntegrand::Power(_) => Vec::new(),
            LevyIntegrand::T2Window(w) | LevyIntegrand::TailIndicator(w) => vec![w],
            LevyIntegrand::BumpRamp(d) => vec![d, 2.0 * d],
            LevyIntegrand::SigmaScaledDiff(c) => {
                if c == 0.0 {
                    Vec::new()
                } else {
                    vec![1.0, 1.0 / c.abs()]
                }
            }
            LevyIntegrand::MinOneScaledT2(c) => {
                if c == 0.0 {
                    Vec::new()
                } else {
                    vec![1.0 / c.abs()]
                }
            }
        }
    }
}

/// `c·∫_lo^hi s^(p-1-alpha) ds`, the building block for power pieces.
/// Divergent at 0 when `lo = 0` and `p <= alpha`.
fn power_moment(c: f64, alpha: f64, lo: f64, hi: f64, p: f64) -> Result<f64> {
    if c == 0.0 || lo >= hi {
        return Ok(0.0);
    }
    let e = p - alpha;
    if lo == 0.0 && e <= 0.0 {
        return Err(Error::DivergentIntegral { what: "moment against a small-jump power piece" });
    }
    if e == 0.0 {
        return Ok(c * (hi / lo).ln());
    }
    Ok(c * (hi.powf(e) - lo.powf(e)) / e)
}

/// One-sided power-piece integral of a real menu integrand:
/// `c·∫_(lo,hi) g(side·s)·s^(-1-alpha) ds` with `side = ±1`.
fn power_side(g: LevyIntegrand, side: f64, c: f64, alpha: f64, lo: f64, hi: f64) -> Result<f64> {
    if c == 0.0 || lo >= hi {
        return Ok(0.0);
    }
    match g {
        LevyIntegrand::MinOneT2 => {
            let split = hi.min(1.0);
            let a = power_moment(c, alpha, lo, split.max(lo), 2.0)?;
            let b = power_moment(c, alpha, lo.max(1.0), hi, 0.0)?;
            Ok(a + b)
        }
        LevyIntegrand::TMinusSigma => {
            // side·(s − 1) on s > 1, zero below.
            let l = lo.max(1.0);
            Ok(side * (power_moment(c, alpha, l, hi, 1.0)? - power_moment(c, alpha, l, hi, 0.0)?))
        }
        LevyIntegrand::Power(n) => {
            let sign = if side < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            Ok(sign * power_moment(c, alpha, lo, hi, n as f64)?)
        }
        LevyIntegrand::Sigma => {
            let split = hi.min(1.0);
            let a = power_moment(c, alpha, lo, split.max(lo), 1.0)?;
            let b = power_moment(c, alpha, lo.max(1.0), hi, 0.0)?;
            Ok(side * (a + b))
        }
        LevyIntegrand::AbsSigma => {
            let split = hi.min(1.0);
            let a = power_moment(c, alpha, lo, split.max(lo), 1.0)?;
            let b = power_moment(c, alpha, lo.max(1.0), hi, 0.0)?;
            Ok(a + b)
        }
        LevyIntegrand::T2Window(w) => power_moment(c, alpha, lo, hi.min(w).max(lo), 2.0),
        LevyIntegrand::TailIndicator(w) => power_moment(c, alpha, lo.max(w), hi, 0.0),
        LevyIntegrand::BumpRamp(d) => {
            // (s − d)/d on (d, 2d], 1 beyond.
            let l = lo.max(d);
            let h = hi.min(2.0 * d).max(l);
            let ramp = (power_moment(c, alpha, l, h, 1.0)? - d * power_moment(c, alpha, l, h, 0.0)?) / d;
            let flat = power_moment(c, alpha, lo.max(2.0 * d), hi, 0.0)?;
            Ok(ramp + flat)
        }
        LevyIntegrand::SigmaScaledDiff(cf) => {
            if cf == 0.0 {
                return Ok(0.0);
            }
            // Vanishes identically for s <= min(1, 1/|cf|).
            let s0 = 1.0f64.min(1.0 / cf.abs());
            let l = lo.max(s0);
            if l >= hi {
                return Ok(0.0);
            }
            let mut cuts = vec![l, hi];
            for k in [1.0, 1.0 / cf.abs()] {
                if k > l && k < hi {
                    cuts.push(k);
                }
            }
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut total = 0.0;
            for w in cuts.windows(2) {
                total += adaptive(
                    |s: f64| g.eval(side * s) * c * s.powf(-1.0 - alpha),
                    w[0],
                    w[1],
                    quad::ABS_TOL,
                    quad::REL_TOL,
                    "power piece",
                )?;
            }
            Ok(total)
        }
        LevyIntegrand::MinOneScaledT2(cf) => {
            if cf == 0.0 {
                return Ok(0.0);
            }
            let s0 = 1.0 / cf.abs();
            let a = cf * cf * power_moment(c, alpha, lo, hi.min(s0).max(lo), 2.0)?;
            let b = power_moment(c, alpha, lo.max(s0), hi, 0.0)?;
            Ok(a + b)
        }
    }
}

fn body_integral(g: LevyIntegrand, piece: &BodyPiece) -> Result<f64> {
    if let LevyIntegrand::Power(n) = g {
        return Ok(piece.poly_moment(n));
    }
    let mut cuts = vec![piece.lo, piece.hi];
    for m in g.breakpoints() {
        for s in [m, -m] {
            if s > piece.lo && s < piece.hi {
                cuts.push(s);
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive(
            |t: f64| g.eval(t) * piece.density(t),
            w[0],
            w[1],
            quad::ABS_TOL,
            quad::REL_TOL,
            "body piece",
        )?;
    }
    Ok(total)
}

/// Integrate a menu integrand against a Lévy measure: atoms summed exactly,
/// power pieces by analytic antiderivatives of the leading term plus
/// quadrature of the remainder, body pieces by adaptive quadrature.
pub fn levy_quadrature(r: &LevyMeasure, g: LevyIntegrand) -> Result<f64> {
    let mut total = 0.0;
    for a in &r.atoms {
        total += a.mass * g.eval(a.t);
    }
    for nz in &r.near_zero {
        total += power_side(g, 1.0, nz.c_plus, nz.alpha, nz.t_min, nz.eps0)?;
        total += power_side(g, -1.0, nz.c_minus, nz.alpha, nz.t_min, nz.eps0)?;
    }
    for piece in &r.body {
        total += body_integral(g, piece)?;
    }
    Ok(total)
}

/// Complex kernels of the two Lévy–Khintchine formulas and their derivative.
#[derive(Debug, Clone, Copy)]
pub enum ComplexKernel {
    /// `1/(1-tz) - 1 - z·ς(t)`
    FreeCt(Complex64),
    /// `t²w/(1-tw) + (t - ς(t))`, the integrand of the R-transform
    RTransform(Complex64),
    /// `t²/(1-tw)²`, derivative of the R-transform integrand in `w`
    RPrime(Complex64),
    /// `exp(ity) - 1 - iy·ς(t)`
    ClassicalCf(f64),
}

/// `e^{ix} - 1 - ix + x²/2`, series-evaluated near 0 to avoid cancellation.
fn cexp_remainder(x: f64) -> Complex64 {
    if x.abs() < 0.5 {
        let ix = Complex64::new(0.0, x);
        let mut term = ix * ix * ix / 6.0;
        let mut sum = term;
        let mut k = 4.0;
        while term.norm() > 1e-25 {
            term = term * ix / k;
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        Complex64::new(x.cos() - 1.0 + 0.5 * x * x, x.sin() - x)
    }
}

impl ComplexKernel {
    /// Pointwise evaluation.
    pub fn eval(&self, t: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            ComplexKernel::FreeCt(z) => one / (one - t * z) - one - z * sigma_centering(t),
            ComplexKernel::RTransform(w) => {
                t * t * w / (one - t * w) + (t - sigma_centering(t))
            }
            ComplexKernel::RPrime(w) => {
                let d = one - t * w;
                t * t / (d * d)
            }
            ComplexKernel::ClassicalCf(y) => {
                Complex64::new(0.0, t * y).exp() - one - Complex64::new(0.0, y * sigma_centering(t))
            }
        }
    }

    /// Coefficient of the leading `t²` term at 0.
    fn leading_t2(&self) -> Complex64 {
        match *self {
            ComplexKernel::FreeCt(z) => z * z,
            ComplexKernel::RTransform(w) => w,
            ComplexKernel::RPrime(_) => Complex64::new(1.0, 0.0),
            ComplexKernel::ClassicalCf(y) => Complex64::new(-0.5 * y * y, 0.0),
        }
    }

    /// `eval(side·s) - leading_t2·s²` for `s <= 1`, in a cancellation-free
    /// form (`O(s³)` at 0).
    fn remainder_small(&self, side: f64, s: f64) -> Complex64 {
        let t = side * s;
        let one = Complex64::new(1.0, 0.0);
        match *self {
            ComplexKernel::FreeCt(z) => {
                let z3 = z * z * z;
                t * t * t * z3 / (one - t * z)
            }
            ComplexKernel::RTransform(w) => {
                let w2 = w * w;
                t * t * t * w2 / (one - t * w)
            }
            ComplexKernel::RPrime(w) => {
                let d = one - t * w;
                // t²[1/(1-tw)² - 1] = t³w(2 - tw)/(1-tw)²
                t * t * t * w * (Complex64::new(2.0, 0.0) - t * w) / (d * d)
            }
            ComplexKernel::ClassicalCf(y) => cexp_remainder(t * y),
        }
    }
}

fn power_side_complex(k: &ComplexKernel, side: f64, c: f64, alpha: f64, lo: f64, hi: f64) -> Result<Complex64> {
    if c == 0.0 || lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let inner_hi = hi.min(1.0);
    if lo < inner_hi {
        // Leading t² term analytic, O(s³) remainder by quadrature.
        total += k.leading_t2() * power_moment(c, alpha, lo, inner_hi, 2.0)?;
        total += adaptive(
            |s: f64| k.remainder_small(side, s) * (c * s.powf(-1.0 - alpha)),
            lo,
            inner_hi,
            quad::ABS_TOL,
            quad::REL_TOL,
            "power piece kernel",
        )?;
    }
    if hi > 1.0 {
        total += adaptive(
            |s: f64| k.eval(side * s) * (c * s.powf(-1.0 - alpha)),
            lo.max(1.0),
            hi,
            quad::ABS_TOL,
            quad::REL_TOL,
            "power piece kernel tail",
        )?;
    }
    Ok(total)
}

/// Integrate a complex Lévy–Khintchine kernel against a Lévy measure.
pub fn levy_quadrature_complex(r: &LevyMeasure, k: ComplexKernel) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for a in &r.atoms {
        total += k.eval(a.t) * a.mass;
    }
    for nz in &r.near_zero {
        total += power_side_complex(&k, 1.0, nz.c_plus, nz.alpha, nz.t_min, nz.eps0)?;
        total += power_side_complex(&k, -1.0, nz.c_minus, nz.alpha, nz.t_min, nz.eps0)?;
    }
    for piece in &r.body {
        let mut cuts = vec![piece.lo, piece.hi];
        for s in [-1.0, 1.0] {
            if s > piece.lo && s < piece.hi {
                cuts.push(s);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for w in cuts.windows(2) {
            total += adaptive(
                |t: f64| k.eval(t) * piece.density(t),
                w[0],
                w[1],
                quad::ABS_TOL,
                quad::REL_TOL,
                "body piece kernel",
            )?;
        }
    }
    Ok(total)
}

/// Which Lévy–Khintchine formula interprets a triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Flavor {
    Free,
    Classical,
}

/// Characteristic triplet of an infinitely divisible law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FreeTriplet {
    pub a: f64,
    pub b: f64,
    pub r: LevyMeasure,
    pub flavor: Flavor,
}

impl FreeTriplet {
    pub fn new(a: f64, b: f64, r: LevyMeasure, flavor: Flavor) -> Self {
        FreeTriplet { a, b, r, flavor }
    }

    pub fn free(a: f64, b: f64, r: LevyMeasure) -> Self {
        FreeTriplet::new(a, b, r, Flavor::Free)
    }

    pub fn classical(a: f64, b: f64, r: LevyMeasure) -> Self {
        FreeTriplet::new(a, b, r, Flavor::Classical)
    }

    /// The point mass `δ_c`.
    pub fn dirac(c: f64, flavor: Flavor) -> Self {
        FreeTriplet::new(c, 0.0, LevyMeasure::zero(), flavor)
    }

    /// The standard semicircle law `γ_{0,2}` (triplet `(0, 1, 0)`).
    pub fn semicircular_std() -> Self {
        FreeTriplet::free(0.0, 1.0, LevyMeasure::zero())
    }

    /// The free Poisson law of rate `lambda` (triplet `(λ, 0, λ·δ₁)`).
    pub fn free_poisson(lambda: f64) -> Self {
        assert!(lambda > 0.0);
        FreeTriplet::free(lambda, 0.0, LevyMeasure::dirac(1.0, lambda))
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.r.is_zero()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::Invalid { what: "non-finite triplet components" });
        }
        if self.b < 0.0 {
            return Err(Error::Invalid { what: "second-order part must be nonnegative" });
        }
        self.r.validate()
    }

    pub fn normal_form(self) -> Self {
        FreeTriplet { r: self.r.normal_form(), ..self }
    }
}

/// Componentwise sum: represents the free convolution of the laws (free
/// flavor) or their classical convolution (classical flavor).
pub fn triplet_add(u: &FreeTriplet, v: &FreeTriplet) -> Result<FreeTriplet> {
    if u.flavor != v.flavor {
        return Err(Error::FlavorMismatch);
    }
    Ok(FreeTriplet { a: u.a + v.a, b: u.b + v.b, r: u.r.add(&v.r), flavor: u.flavor })
}

/// The law scaling `D_c`: image of the law under `t -> c·t`.
pub fn triplet_scale(c: f64, u: &FreeTriplet) -> Result<FreeTriplet> {
    if c == 0.0 {
        return Ok(FreeTriplet::new(0.0, 0.0, LevyMeasure::zero(), u.flavor));
    }
    let correction = levy_quadrature(&u.r, LevyIntegrand::SigmaScaledDiff(c))?;
    Ok(FreeTriplet {
        a: c * u.a + correction,
        b: c * c * u.b,
        r: u.r.map_scale(c),
        flavor: u.flavor,
    })
}

/// Bercovici–Pata map: the classical triplet reinterpreted under the free
/// Lévy–Khintchine formula.
pub fn bp_lambda(u: &FreeTriplet) -> Result<FreeTriplet> {
    if u.flavor != Flavor::Classical {
        return Err(Error::FlavorMismatch);
    }
    Ok(FreeTriplet { flavor: Flavor::Free, ..u.clone() })
}

/// Inverse Bercovici–Pata map.
pub fn bp_lambda_inv(u: &FreeTriplet) -> Result<FreeTriplet> {
    if u.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    Ok(FreeTriplet { flavor: Flavor::Classical, ..u.clone() })
}

/// Cumulants of orders `1..=p`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CumulantVector {
    pub values: Vec<f64>,
}

impl CumulantVector {
    pub fn new(values: Vec<f64>) -> Self {
        CumulantVector { values }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }
}

fn cumulants_from_components(u: &FreeTriplet, p: usize) -> Result<CumulantVector> {
    let mut values = Vec::with_capacity(p);
    for n in 1..=p {
        let v = match n {
            1 => u.a + levy_quadrature(&u.r, LevyIntegrand::TMinusSigma)?,
            2 => u.b + levy_quadrature(&u.r, LevyIntegrand::Power(2))?,
            _ => levy_quadrature(&u.r, LevyIntegrand::Power(n as u32))?,
        };
        values.push(v);
    }
    Ok(CumulantVector::new(values))
}

/// Free cumulants `κ₁..κ_p` read off the free Lévy–Khintchine expansion:
/// `κ₁ = a + ∫(t−ς) dr`, `κ₂ = b + ∫t² dr`, `κ_n = ∫tⁿ dr` beyond.
pub fn free_cumulants_from_triplet(u: &FreeTriplet, p: usize) -> Result<CumulantVector> {
    if u.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    cumulants_from_components(u, p)
}

/// Classical cumulants from a classical triplet; the expansion coefficients
/// coincide with the free ones, which is the content of the Bercovici–Pata
/// consistency checks.
pub fn classical_cumulants_from_triplet(u: &FreeTriplet, p: usize) -> Result<CumulantVector> {
    if u.flavor != Flavor::Classical {
        return Err(Error::FlavorMismatch);
    }
    cumulants_from_components(u, p)
}
