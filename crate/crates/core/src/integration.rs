//! Integration of deterministic functions against a free Lévy basis.
//!
//! For a piecewise-polynomial integrand `f` the law of `∫ f dM` is again
//! triplet-backed: the drift and second-order parts are integrals of the
//! seed components against `κ`, and the Lévy part is the pushforward of
//! `κ ⊗ ρ` under `(x, t) -> f(x)·t` with mass mapped to 0 removed. For step
//! integrands everything is exact; the Lévy part of a general polynomial
//! integrand is handled by step refinement.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::levy_basis::{Cell, KappaAtom, SeedField, SetExpr};
use crate::quad::{self, adaptive};
use crate::transforms::eval_free_ct;
use crate::triplets::{levy_quadrature, levy_quadrature_complex, ComplexKernel, FreeTriplet, LevyIntegrand, LevyMeasure};
use crate::{Error, Result};

/// Default number of subintervals per piece when a polynomial integrand is
/// step-refined for the Lévy part.
pub const DEFAULT_REFINEMENT: usize = 256;

/// A piecewise-polynomial function on the carrier, zero outside its pieces.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Integrand {
    /// `(lo, hi, coefficients)`: `f(x) = Σ c_k x^k` on `[lo, hi)`.
    pub pieces: Vec<(f64, f64, Vec<f64>)>,
}

impl Integrand {
    /// Step function `Σ α_k·1_{A_k}` from values on disjoint intervals.
    pub fn step(pieces: &[(f64, f64, f64)]) -> Self {
        Integrand {
            pieces: pieces.iter().map(|&(lo, hi, v)| (lo, hi, alloc::vec![v])).collect(),
        }
    }

    /// Indicator of a set expression.
    pub fn indicator(set: &SetExpr) -> Self {
        Integrand {
            pieces: set.intervals.iter().map(|&(lo, hi)| (lo, hi, alloc::vec![1.0])).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (lo, hi, _) in &self.pieces {
            if !(lo < hi) {
                return Err(Error::Invalid { what: "empty integrand piece" });
            }
        }
        let mut iv: Vec<(f64, f64)> = self.pieces.iter().map(|p| (p.0, p.1)).collect();
        iv.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if iv.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::Invalid { what: "overlapping integrand pieces" });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        for (lo, hi, coeffs) in &self.pieces {
            if *lo <= x && x < *hi {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                return acc;
            }
        }
        0.0
    }

    pub fn is_step(&self) -> bool {
        self.pieces.iter().all(|(_, _, c)| c.len() <= 1)
    }

    pub fn support(&self) -> SetExpr {
        SetExpr::normalize(&self.pieces.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>())
    }

    /// Pointwise product with an indicator: `f·1_E`.
    pub fn restrict(&self, set: &SetExpr) -> Integrand {
        let mut pieces = Vec::new();
        for (lo, hi, coeffs) in &self.pieces {
            for &(a, b) in &set.intersect(&SetExpr::interval(*lo, *hi)).intervals {
                pieces.push((a, b, coeffs.clone()));
            }
        }
        Integrand { pieces }
    }

    /// Sum of two integrands with disjoint supports.
    pub fn disjoint_sum(&self, other: &Integrand) -> Result<Integrand> {
        if !self.support().intersect(&other.support()).is_empty() {
            return Err(Error::Invalid { what: "integrand supports overlap" });
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        Ok(Integrand { pieces })
    }

    pub fn scale(&self, c: f64) -> Integrand {
        Integrand {
            pieces: self
                .pieces
                .iter()
                .map(|(lo, hi, coeffs)| (*lo, *hi, coeffs.iter().map(|&a| c * a).collect()))
                .collect(),
        }
    }

    /// Midpoint step approximation with `n` subintervals per piece.
    pub fn step_refine(&self, n: usize) -> Integrand {
        let n = n.max(1);
        let mut pieces = Vec::new();
        for (lo, hi, coeffs) in &self.pieces {
            if coeffs.len() <= 1 {
                pieces.push((*lo, *hi, coeffs.clone()));
                continue;
            }
            let h = (hi - lo) / n as f64;
            for k in 0..n {
                let a = lo + k as f64 * h;
                let b = if k + 1 == n { *hi } else { lo + (k + 1) as f64 * h };
                let mid = 0.5 * (a + b);
                pieces.push((a, b, alloc::vec![self.eval(mid)]));
            }
        }
        Integrand { pieces }
    }

    /// Exact integral of `f(x)²·weight` over `[lo, hi) ∩ piece`, summed over
    /// pieces (polynomial antiderivative).
    fn square_integral(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for (plo, phi, coeffs) in &self.pieces {
            let a = lo.max(*plo);
            let b = hi.min(*phi);
            if a >= b {
                continue;
            }
            // square the polynomial
            let mut sq = alloc::vec![0.0; 2 * coeffs.len().saturating_sub(1) + 1];
            for (i, &ci) in coeffs.iter().enumerate() {
                for (j, &cj) in coeffs.iter().enumerate() {
                    sq[i + j] += ci * cj;
                }
            }
            for (k, &c) in sq.iter().enumerate() {
                let p = k as i32 + 1;
                total += c * (b.powi(p) - a.powi(p)) / p as f64;
            }
        }
        total
    }
}

/// The three integrability conditions and their values: the drift condition
/// `∫|f·θ + ∫(ς(ft) − f·ς(t)) dρ| dκ`, the second-order condition
/// `∫ f²σ² dκ` and the jump condition `∫∫ min(1, f²t²) dρ dκ`. Finiteness
/// is automatic for bounded integrands over a bounded carrier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegrabilityReport {
    pub drift_condition: f64,
    pub gaussian_condition: f64,
    pub jump_condition: f64,
    pub integrable: bool,
}

fn drift_density(cell_theta: f64, rho: &LevyMeasure, fx: f64) -> Result<f64> {
    Ok(fx * cell_theta + levy_quadrature(rho, LevyIntegrand::SigmaScaledDiff(fx))?)
}

/// Integrate `g(f(x))·κ_density` over `cell ∩ pieces of f`, adaptively in
/// `x` with pieces split out.
fn integrate_over_cell<G: Fn(f64) -> Result<f64>>(
    cell: &Cell,
    f: &Integrand,
    g: G,
) -> Result<f64> {
    let mut total = 0.0;
    for (plo, phi, coeffs) in &f.pieces {
        let lo = cell.lo.max(*plo);
        let hi = cell.hi.min(*phi);
        if lo >= hi {
            continue;
        }
        if coeffs.len() <= 1 {
            let v = coeffs.first().copied().unwrap_or(0.0);
            total += g(v)? * cell.kappa_density * (hi - lo);
        } else {
            // nested quadrature: the inner closure may fail, so thread the
            // error through a cell-level pass first
            let err = core::cell::Cell::new(None);
            let val = adaptive(
                |x: f64| match g(f.eval(x)) {
                    Ok(v) => v,
                    Err(e) => {
                        err.set(Some(e));
                        0.0
                    }
                },
                lo,
                hi,
                quad::ABS_TOL,
                quad::REL_TOL,
                "seed integral over cell",
            )?;
            if let Some(e) = err.take() {
                return Err(e);
            }
            total += val * cell.kappa_density;
        }
    }
    Ok(total)
}

/// Evaluate the three conditions of the integrability criterion.
pub fn integrability_check(field: &SeedField, f: &Integrand) -> Result<IntegrabilityReport> {
    f.validate()?;
    let mut drift = 0.0;
    let mut gaussian = 0.0;
    let mut jump = 0.0;
    for cell in &field.cells {
        drift += integrate_over_cell(cell, f, |fx| Ok(drift_density(cell.theta, &cell.rho, fx)?.abs()))?;
        gaussian += cell.sigma2 * cell.kappa_density * f.square_integral(cell.lo, cell.hi);
        jump += integrate_over_cell(cell, f, |fx| {
            levy_quadrature(&cell.rho, LevyIntegrand::MinOneScaledT2(fx))
        })?;
    }
    for at in &field.kappa_atoms {
        let fx = f.eval(at.x);
        drift += drift_density(at.theta, &at.rho, fx)?.abs() * at.mass;
        gaussian += fx * fx * at.sigma2 * at.mass;
        jump += levy_quadrature(&at.rho, LevyIntegrand::MinOneScaledT2(fx))? * at.mass;
    }
    Ok(IntegrabilityReport {
        drift_condition: drift,
        gaussian_condition: gaussian,
        jump_condition: jump,
        integrable: drift.is_finite() && gaussian.is_finite() && jump.is_finite(),
    })
}

/// Triplet of `∫ f dM`. For a step integrand the Lévy part is an exact
/// finite combination of scaled seed measures; for polynomial pieces it is
/// built from a step refinement with [`DEFAULT_REFINEMENT`] subintervals per
/// piece (drift and second-order parts are exact quadratures either way).
pub fn integral_triplet(field: &SeedField, f: &Integrand) -> Result<FreeTriplet> {
    integral_triplet_refined(field, f, DEFAULT_REFINEMENT)
}

/// [`integral_triplet`] with an explicit refinement of the Lévy-part step
/// approximation.
pub fn integral_triplet_refined(field: &SeedField, f: &Integrand, refine: usize) -> Result<FreeTriplet> {
    let report = integrability_check(field, f)?;
    if !report.integrable {
        return Err(Error::NotIntegrable);
    }
    let mut a = 0.0;
    let mut b = 0.0;
    for cell in &field.cells {
        a += integrate_over_cell(cell, f, |fx| drift_density(cell.theta, &cell.rho, fx))?;
        b += cell.sigma2 * cell.kappa_density * f.square_integral(cell.lo, cell.hi);
    }
    for at in &field.kappa_atoms {
        let fx = f.eval(at.x);
        a += drift_density(at.theta, &at.rho, fx)? * at.mass;
        b += fx * fx * at.sigma2 * at.mass;
    }
    // Lévy part: pushforward of κ ⊗ ρ under (x, t) -> f(x)·t, zeros removed.
    let step = if f.is_step() { f.clone() } else { f.step_refine(refine) };
    let mut r = LevyMeasure::zero();
    for cell in &field.cells {
        if cell.rho.is_zero() {
            continue;
        }
        for (plo, phi, coeffs) in &step.pieces {
            let lo = cell.lo.max(*plo);
            let hi = cell.hi.min(*phi);
            if lo >= hi {
                continue;
            }
            let alpha = coeffs.first().copied().unwrap_or(0.0);
            if alpha == 0.0 {
                continue;
            }
            let weight = cell.kappa_density * (hi - lo);
            r = r.add(&cell.rho.map_scale(alpha).scale_mass(weight));
        }
    }
    for at in &field.kappa_atoms {
        let fx = f.eval(at.x);
        if fx != 0.0 && !at.rho.is_zero() {
            r = r.add(&at.rho.map_scale(fx).scale_mass(at.mass));
        }
    }
    Ok(FreeTriplet::free(a, b, r))
}

/// Seed kernel `R(x, w) = θw + σ²w² + ∫(1/(1−tw) − 1 − wς(t)) dρ` of one
/// cell, evaluated pointwise.
fn seed_kernel(theta: f64, sigma2: f64, rho: &LevyMeasure, w: Complex64) -> Result<Complex64> {
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integral = levy_quadrature_complex(rho, ComplexKernel::FreeCt(w))?;
    Ok(theta * w + sigma2 * w * w + integral)
}

/// Direct evaluation of the cumulant transform of `∫ f dM` as
/// `∫ R(x, f(x)·z) κ(dx)`, bypassing the integral triplet.
pub fn integral_ct_direct(field: &SeedField, f: &Integrand, z: Complex64) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for cell in &field.cells {
        for (plo, phi, coeffs) in &f.pieces {
            let lo = cell.lo.max(*plo);
            let hi = cell.hi.min(*phi);
            if lo >= hi {
                continue;
            }
            if coeffs.len() <= 1 {
                let v = coeffs.first().copied().unwrap_or(0.0);
                total += seed_kernel(cell.theta, cell.sigma2, &cell.rho, v * z)?
                    * (cell.kappa_density * (hi - lo));
            } else {
                let err = core::cell::Cell::new(None);
                let val = adaptive(
                    |x: f64| match seed_kernel(cell.theta, cell.sigma2, &cell.rho, f.eval(x) * z) {
                        Ok(v) => v,
                        Err(e) => {
                            err.set(Some(e));
                            Complex64::new(0.0, 0.0)
                        }
                    },
                    lo,
                    hi,
                    quad::ABS_TOL,
                    quad::REL_TOL,
                    "seed kernel over cell",
                )?;
                if let Some(e) = err.take() {
                    return Err(e);
                }
                total += val * cell.kappa_density;
            }
        }
    }
    for at in &field.kappa_atoms {
        total += seed_kernel(at.theta, at.sigma2, &at.rho, f.eval(at.x) * z)? * at.mass;
    }
    Ok(total)
}

/// Compare `eval_free_ct(integral_triplet(field, f), z)` against the direct
/// kernel quadrature on a grid of points in the lower half-plane; returns
/// the maximum relative discrepancy.
pub fn integral_ct_check(field: &SeedField, f: &Integrand, z_grid: &[Complex64]) -> Result<f64> {
    let triplet = integral_triplet(field, f)?;
    let mut worst = 0.0f64;
    for &z in z_grid {
        if z.im >= 0.0 {
            return Err(Error::DomainError { what: "ct check grid needs Im z < 0" });
        }
        let lhs = eval_free_ct(&triplet, z)?;
        let rhs = integral_ct_direct(field, f, z)?;
        let denom = lhs.norm().max(rhs.norm()).max(1.0);
        worst = worst.max((lhs - rhs).norm() / denom);
    }
    Ok(worst)
}

/// The density basis `f·M(E) = ∫ f·1_E dM` for a step integrand: a new
/// field with the same carrier geometry whose marginal of every `E` equals
/// `integral_triplet(field, f·1_E)`.
pub fn density_field(field: &SeedField, f: &Integrand) -> Result<SeedField> {
    if !f.is_step() {
        return Err(Error::NotRepresentable {
            what: "density basis of a non-step integrand (use density_field_refined)",
        });
    }
    f.validate()?;
    let mut cells = Vec::new();
    for cell in &field.cells {
        // Split the cell at the integrand piece boundaries; parts where f
        // vanishes keep the geometry with a zero seed.
        let mut cuts = alloc::vec![cell.lo, cell.hi];
        for (plo, phi, _) in &f.pieces {
            for &c in &[*plo, *phi] {
                if c > cell.lo && c < cell.hi {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let alpha = f.eval(0.5 * (lo + hi));
            if alpha == 0.0 {
                cells.push(Cell {
                    lo,
                    hi,
                    theta: 0.0,
                    sigma2: 0.0,
                    rho: LevyMeasure::zero(),
                    kappa_density: cell.kappa_density,
                });
                continue;
            }
            let theta = drift_density(cell.theta, &cell.rho, alpha)?;
            let rho = if cell.rho.is_zero() { LevyMeasure::zero() } else { cell.rho.map_scale(alpha) };
            let sigma2 = alpha * alpha * cell.sigma2;
            cells.push(Cell { lo, hi, theta, sigma2, rho, kappa_density: cell.kappa_density });
        }
    }
    cells.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    let mut kappa_atoms = Vec::new();
    for at in &field.kappa_atoms {
        let fx = f.eval(at.x);
        if fx == 0.0 {
            continue;
        }
        let theta = drift_density(at.theta, &at.rho, fx)?;
        let rho = if at.rho.is_zero() { LevyMeasure::zero() } else { at.rho.map_scale(fx) };
        let sigma2 = fx * fx * at.sigma2;
        if theta == 0.0 && sigma2 == 0.0 && rho.is_zero() {
            continue;
        }
        kappa_atoms.push(KappaAtom { x: at.x, mass: at.mass, theta, sigma2, rho });
    }
    Ok(SeedField { cells, kappa_atoms })
}

/// Step-refine a polynomial integrand and build its density basis; also
/// returns the maximum relative cumulant-transform discrepancy of the
/// approximation over a default grid on the negative imaginary axis.
pub fn density_field_refined(field: &SeedField, f: &Integrand, refine: usize) -> Result<(SeedField, f64)> {
    let step = f.step_refine(refine);
    let new_field = density_field(field, &step)?;
    let carrier = field.carrier();
    let mut worst = 0.0f64;
    for k in 0..8 {
        let y = -10.0 + k as f64 * (10.0 - 0.1) / 7.0;
        let z = Complex64::new(0.0, y);
        let lhs = eval_free_ct(&triplet_of_whole(&new_field)?, z)?;
        let rhs = integral_ct_direct(field, &f.restrict(&carrier), z)?;
        let denom = lhs.norm().max(rhs.norm()).max(1.0);
        worst = worst.max((lhs - rhs).norm() / denom);
    }
    Ok((new_field, worst))
}

fn triplet_of_whole(field: &SeedField) -> Result<FreeTriplet> {
    crate::levy_basis::triplet_of_set(field, &field.carrier())
}
