//! Analytic transforms of triplet-backed laws: free cumulant transform,
//! R-transform, Cauchy transform via the subordination fixed point, spectral
//! densities by Stieltjes inversion, classical characteristic functions, and
//! triplet-level weak-convergence diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::triplets::{
    levy_quadrature, levy_quadrature_complex, ComplexKernel, Flavor, FreeTriplet, LevyIntegrand,
};
use crate::{Error, Result};

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_BUDGET: usize = 10_000;
const NEWTON_AFTER: usize = 200;

/// A point mass detected during Stieltjes inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointMass {
    pub x: f64,
    pub mass: f64,
}

/// Grid-sampled spectral density recovered from a Cauchy transform.
///
/// `cdf` integrates the absolutely continuous part only; atoms carry the
/// missing mass and are recorded separately.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
    pub atoms: Vec<PointMass>,
    pub support_estimate: (f64, f64),
    /// Grid indices where the inversion failed to converge (density is NaN).
    pub failed: Vec<usize>,
}

impl SpectralDensity {
    /// Assemble from point samples; `cdf` by trapezoid rule, support from
    /// the density threshold and atoms.
    pub fn from_samples(grid: Vec<f64>, density: Vec<f64>, atoms: Vec<PointMass>, failed: Vec<usize>) -> Self {
        let cdf = cumulative_trapezoid(&grid, &density);
        let support_estimate = support_from(&grid, &density, &atoms);
        SpectralDensity { grid, density, cdf, atoms, support_estimate, failed }
    }

    /// Tabulate a density given in closed form; `cdf` by trapezoid rule.
    pub fn tabulate<F: Fn(f64) -> f64>(grid: Vec<f64>, f: F, atoms: Vec<PointMass>) -> Self {
        let density: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        SpectralDensity::from_samples(grid, density, atoms, Vec::new())
    }

    /// Structural checks: nonnegative density, nondecreasing CDF bounded by
    /// one, and total mass (trapezoid integral of the density plus atoms)
    /// within `tol_mass` of one.
    pub fn validate(&self, tol_mass: f64) -> Result<()> {
        if self.density.iter().any(|&d| d.is_finite() && d < 0.0) {
            return Err(Error::Invalid { what: "negative density value" });
        }
        if self.cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid { what: "decreasing cdf" });
        }
        if self.cdf.last().copied().unwrap_or(0.0) > 1.0 + 1e-6 {
            return Err(Error::Invalid { what: "cdf exceeds one" });
        }
        let ac = trapezoid_mass(&self.grid, &self.density);
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        if (ac + atoms - 1.0).abs() > tol_mass {
            return Err(Error::Invalid { what: "total mass outside tolerance" });
        }
        Ok(())
    }

    /// Model CDF at `x`, atoms included.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let ac = if self.grid.is_empty() || x <= self.grid[0] {
            0.0
        } else if x >= *self.grid.last().unwrap() {
            *self.cdf.last().unwrap()
        } else {
            let i = self.grid.partition_point(|&g| g <= x) - 1;
            let (x0, x1) = (self.grid[i], self.grid[i + 1]);
            let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
        };
        let atom_mass: f64 = self.atoms.iter().filter(|a| a.x <= x).map(|a| a.mass).sum();
        ac + atom_mass
    }
}

fn cumulative_trapezoid(grid: &[f64], density: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for i in 0..grid.len() {
        if i > 0 {
            let d0 = if density[i - 1].is_nan() { 0.0 } else { density[i - 1] };
            let d1 = if density[i].is_nan() { 0.0 } else { density[i] };
            acc += 0.5 * (d0 + d1) * (grid[i] - grid[i - 1]);
        }
        // the raw trapezoid mass may overshoot one by the smearing bias;
        // the CDF itself stays capped
        cdf.push(acc.min(1.0));
    }
    cdf
}

fn trapezoid_mass(grid: &[f64], density: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        let d0 = if density[i - 1].is_nan() { 0.0 } else { density[i - 1] };
        let d1 = if density[i].is_nan() { 0.0 } else { density[i] };
        acc += 0.5 * (d0 + d1) * (grid[i] - grid[i - 1]);
    }
    acc
}

fn support_from(grid: &[f64], density: &[f64], atoms: &[PointMass]) -> (f64, f64) {
    let peak = density.iter().filter(|d| d.is_finite()).fold(0.0f64, |m, &d| m.max(d));
    let thresh = (1e-4 * peak).max(1e-9);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &d) in density.iter().enumerate() {
        if d.is_finite() && d > thresh {
            lo = lo.min(grid[i]);
            hi = hi.max(grid[i]);
        }
    }
    for a in atoms {
        lo = lo.min(a.x);
        hi = hi.max(a.x);
    }
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Free cumulant transform `C(z) = az + bz² + ∫(1/(1−tz) − 1 − zς(t)) dr`
/// on the lower half-plane.
pub fn eval_free_ct(u: &FreeTriplet, z: Complex64) -> Result<Complex64> {
    if u.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    if z.im >= 0.0 {
        return Err(Error::DomainError { what: "free cumulant transform needs Im z < 0" });
    }
    let integral = levy_quadrature_complex(&u.r, ComplexKernel::FreeCt(z))?;
    Ok(u.a * z + u.b * z * z + integral)
}

/// R-transform `R(w) = a + bw + ∫(t²w/(1−tw) + (t − ς(t))) dr`, so that
/// `C(z) = z·R(z)`.
pub fn eval_r_transform(u: &FreeTriplet, w: Complex64) -> Result<Complex64> {
    if u.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    if w.im >= 0.0 {
        return Err(Error::DomainError { what: "R-transform needs Im w < 0" });
    }
    r_transform_unchecked(u, w)
}

fn r_transform_unchecked(u: &FreeTriplet, w: Complex64) -> Result<Complex64> {
    let integral = levy_quadrature_complex(&u.r, ComplexKernel::RTransform(w))?;
    Ok(u.a + u.b * w + integral)
}

fn r_prime(u: &FreeTriplet, w: Complex64) -> Result<Complex64> {
    let integral = levy_quadrature_complex(&u.r, ComplexKernel::RPrime(w))?;
    Ok(u.b + integral)
}

/// Cauchy transform `G(z)` for `Im z > 0`, solving the subordination fixed
/// point `G = 1/(z − R(G))` by damped iteration with a Newton fallback.
/// The result satisfies `Im G < 0` and `|G − 1/(z − R(G))| <= 1e−12`.
pub fn cauchy_from_triplet(u: &FreeTriplet, z: Complex64) -> Result<Complex64> {
    if u.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    if z.im <= 0.0 {
        return Err(Error::DomainError { what: "Cauchy transform needs Im z > 0" });
    }
    let mut g = z.inv();
    let mut damping = 0.5;
    let mut prev_res = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iter in 0..FIXED_POINT_BUDGET {
        let r = r_transform_unchecked(u, g)?;
        let target = (z - r).inv();
        residual = (target - g).norm();
        // Near an atom |G| ~ mass/ε and the evaluation of 1/(z − R(G))
        // carries rounding noise of order |G|²·ε_machine; the absolute
        // tolerance is unreachable there.
        if residual <= FIXED_POINT_TOL.max(4e-16 * g.norm_sqr()) {
            return Ok(g);
        }
        let mut next = if iter >= NEWTON_AFTER {
            // Newton on Φ(G) = G − 1/(z − R(G)).
            let d = z - r;
            let dphi = Complex64::new(1.0, 0.0) - r_prime(u, g)? / (d * d);
            let candidate = g - (g - target) / dphi;
            if candidate.is_finite() && candidate.im < 0.0 {
                candidate
            } else {
                g + damping * (target - g)
            }
        } else {
            g + damping * (target - g)
        };
        // Plain iteration stalls near spectral edges: shrink the step when
        // the residual grows.
        if residual > prev_res {
            damping = (damping * 0.5).max(0.05);
        }
        prev_res = residual;
        if next.im >= 0.0 {
            next = Complex64::new(next.re, -1e-14);
        }
        g = next;
    }
    Err(Error::NoConvergence { what: "subordination fixed point", residual })
}

/// Options for [`density_from_triplet`].
#[derive(Debug, Clone)]
pub struct InversionOptions {
    /// Decreasing ladder of offsets `ε` used in `G(x + iε)`.
    pub eps_ladder: Vec<f64>,
    /// Report an atom where `ε·|Im G(x+iε)| > atom_threshold` on every rung.
    pub atom_threshold: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions { eps_ladder: vec![1e-3, 1e-4, 1e-5], atom_threshold: 1e-3 }
    }
}

/// Recover the spectral density of a free triplet on a grid by Stieltjes
/// inversion, `f(x) = −Im G(x+iε)/π`, Richardson-extrapolated across the
/// `ε`-ladder. Atoms are detected where `ε·Im G` does not vanish and are
/// recorded separately with the estimated mass. A grid point where the
/// fixed point fails to converge is flagged, not fatal.
pub fn density_from_triplet(
    u: &FreeTriplet,
    grid: &[f64],
    options: &InversionOptions,
) -> Result<SpectralDensity> {
    if u.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    let ladder = &options.eps_ladder;
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] >= w[0]) || ladder.iter().any(|&e| e <= 0.0) {
        return Err(Error::Invalid { what: "eps ladder must be decreasing and positive" });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid { what: "grid must be strictly increasing" });
    }
    let m = ladder.len();
    let mut density = Vec::with_capacity(grid.len());
    let mut atoms: Vec<PointMass> = Vec::new();
    let mut failed = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        let mut im_parts = Vec::with_capacity(m);
        let mut ok = true;
        for &eps in ladder {
            match cauchy_from_triplet(u, Complex64::new(x, eps)) {
                Ok(g) => im_parts.push(g.im),
                Err(Error::NoConvergence { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !ok {
            density.push(f64::NAN);
            failed.push(i);
            continue;
        }
        // At an atom ε·|Im G| is ladder-stable (≈ the mass); at an
        // unbounded-density edge it decays like √ε down the ladder, so a
        // threshold alone would misfire there.
        let masses: Vec<f64> =
            im_parts.iter().zip(ladder.iter()).map(|(&im, &eps)| eps * im.abs()).collect();
        let is_atom = masses.iter().all(|&m| m > options.atom_threshold)
            && masses[m - 1] >= 0.5 * masses[0];
        if is_atom {
            let mass = ladder[m - 1] * (-im_parts[m - 1]);
            atoms.push(PointMass { x, mass });
            // The AC part at an isolated atom is swamped by the pole.
            density.push(0.0);
            continue;
        }
        let f = if m >= 2 {
            // First-order Richardson in ε using the last two rungs.
            let (e0, e1) = (ladder[m - 2], ladder[m - 1]);
            let (f0, f1) =
                (-im_parts[m - 2] / core::f64::consts::PI, -im_parts[m - 1] / core::f64::consts::PI);
            f1 + (f1 - f0) * e1 / (e0 - e1)
        } else {
            -im_parts[0] / core::f64::consts::PI
        };
        density.push(f.max(0.0));
    }
    let cdf = cumulative_trapezoid(grid, &density);
    let support_estimate = support_from(grid, &density, &atoms);
    Ok(SpectralDensity { grid: grid.to_vec(), density, cdf, atoms, support_estimate, failed })
}

/// Classical Lévy–Khintchine characteristic function
/// `exp(iay − by²/2 + ∫(e^{ity} − 1 − iyς(t)) dr)`.
pub fn eval_classical_cf(u: &FreeTriplet, y: f64) -> Result<Complex64> {
    if u.flavor != Flavor::Classical {
        return Err(Error::FlavorMismatch);
    }
    let integral = levy_quadrature_complex(&u.r, ComplexKernel::ClassicalCf(y))?;
    let exponent = Complex64::new(0.0, u.a * y) - 0.5 * u.b * y * y + integral;
    Ok(exponent.exp())
}

/// Configuration of [`convergence_diagnostic`].
#[derive(Debug, Clone)]
pub struct DiagnosticOptions {
    /// Window radii for the second-order bracket.
    pub eps_grid: Vec<f64>,
    /// Negative ordinates `y`; the transforms are compared at `z = iy`.
    pub y_grid: Vec<f64>,
    /// Ramp offsets of the bump test family vanishing near 0.
    pub bump_deltas: Vec<f64>,
    pub tol_drift: f64,
    pub tol_levy: f64,
    pub tol_bracket: f64,
    pub tol_ct: f64,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        DiagnosticOptions {
            eps_grid: vec![0.05, 0.02, 0.01, 0.005, 0.002, 0.001],
            y_grid: vec![-10.0, -5.0, -2.0, -1.0, -0.5, -0.2, -0.1],
            bump_deltas: vec![0.25, 0.5, 1.0],
            tol_drift: 1e-3,
            tol_levy: 1e-3,
            tol_bracket: 1e-3,
            tol_ct: 1e-3,
        }
    }
}

/// Triplet-level diagnostics for weak convergence of a sequence of freely
/// infinitely divisible laws toward a target: drift gap, Lévy-measure gaps
/// against bump test functions vanishing near 0, the second-order bracket
/// `|b_n − b + ∫_{[−ε,ε]} t² dr_n|` over an ε-grid, and the cumulant
/// transform gap on the negative imaginary axis. A diagnostic on finite
/// data, not a limit decision.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub drift_gaps: Vec<f64>,
    pub levy_gaps: Vec<f64>,
    /// Bracket at the smallest window radius, per index.
    pub bracket_gaps: Vec<f64>,
    /// Bracket at the final index, per window radius.
    pub bracket_by_eps: Vec<f64>,
    pub ct_gaps: Vec<f64>,
    pub drift_pass: bool,
    pub levy_pass: bool,
    pub bracket_pass: bool,
    pub ct_pass: bool,
    pub pass: bool,
    /// The supplementary tightness condition for sequences outside the
    /// infinitely divisible class is not checked: all represented laws are
    /// infinitely divisible by construction.
    pub note: &'static str,
}

pub fn convergence_diagnostic(
    seq: &[FreeTriplet],
    target: &FreeTriplet,
    options: &DiagnosticOptions,
) -> Result<ConvergenceReport> {
    if seq.is_empty() {
        return Err(Error::Invalid { what: "empty sequence" });
    }
    if seq.iter().any(|u| u.flavor != Flavor::Free) || target.flavor != Flavor::Free {
        return Err(Error::FlavorMismatch);
    }
    let mut drift_gaps = Vec::with_capacity(seq.len());
    let mut levy_gaps = Vec::with_capacity(seq.len());
    let mut bracket_gaps = Vec::with_capacity(seq.len());
    let mut ct_gaps = Vec::with_capacity(seq.len());
    let mut target_bumps = Vec::new();
    for &d in &options.bump_deltas {
        target_bumps.push(levy_quadrature(&target.r, LevyIntegrand::BumpRamp(d))?);
    }
    let smallest_eps = options.eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut bracket_by_eps = vec![0.0; options.eps_grid.len()];
    for (n, u) in seq.iter().enumerate() {
        drift_gaps.push((u.a - target.a).abs());
        let mut levy_gap = 0.0f64;
        for (j, &d) in options.bump_deltas.iter().enumerate() {
            let v = levy_quadrature(&u.r, LevyIntegrand::BumpRamp(d))?;
            levy_gap = levy_gap.max((v - target_bumps[j]).abs());
        }
        levy_gaps.push(levy_gap);
        let small = levy_quadrature(&u.r, LevyIntegrand::T2Window(smallest_eps))?;
        bracket_gaps.push((u.b - target.b + small).abs());
        if n == seq.len() - 1 {
            for (k, &eps) in options.eps_grid.iter().enumerate() {
                let w = levy_quadrature(&u.r, LevyIntegrand::T2Window(eps))?;
                bracket_by_eps[k] = (u.b - target.b + w).abs();
            }
        }
        let mut ct_gap = 0.0f64;
        for &y in &options.y_grid {
            let z = Complex64::new(0.0, y);
            let cu = eval_free_ct(u, z)?;
            let ct = eval_free_ct(target, z)?;
            ct_gap = ct_gap.max((cu - ct).norm());
        }
        ct_gaps.push(ct_gap);
    }
    let last = seq.len() - 1;
    let drift_pass = drift_gaps[last] <= options.tol_drift;
    let levy_pass = levy_gaps[last] <= options.tol_levy;
    let bracket_pass = bracket_gaps[last] <= options.tol_bracket;
    let ct_pass = ct_gaps[last] <= options.tol_ct;
    Ok(ConvergenceReport {
        drift_gaps,
        levy_gaps,
        bracket_gaps,
        bracket_by_eps,
        ct_gaps,
        drift_pass,
        levy_pass,
        bracket_pass,
        ct_pass,
        pass: drift_pass && levy_pass && bracket_pass && ct_pass,
        note: "tightness supplement for non-infinitely-divisible sequences not checked",
    })
}

/// Semicircle density `γ_{c,ℓ}`: `2/(πℓ²)·√(ℓ² − (t−c)²)` on `[c−ℓ, c+ℓ]`.
pub fn semicircle_density(c: f64, l: f64, t: f64) -> f64 {
    let d = l * l - (t - c) * (t - c);
    if d <= 0.0 {
        0.0
    } else {
        2.0 / (core::f64::consts::PI * l * l) * d.sqrt()
    }
}

/// Semicircle CDF in closed form.
pub fn semicircle_cdf(c: f64, l: f64, t: f64) -> f64 {
    let x = (t - c) / l;
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / core::f64::consts::PI
    }
}

/// Marchenko–Pastur (free Poisson) density of rate `l`: the absolutely
/// continuous part `√((t−s)(u−t))/(2πt)` on `[s, u]` with `s, u = (1∓√ℓ)²`;
/// for `l < 1` an atom of mass `1−l` sits at 0 (not part of the density).
pub fn marchenko_pastur_density(l: f64, t: f64) -> f64 {
    let sq = l.sqrt();
    let s = (1.0 - sq) * (1.0 - sq);
    let u = (1.0 + sq) * (1.0 + sq);
    if t <= s || t >= u {
        0.0
    } else {
        ((t - s) * (u - t)).sqrt() / (2.0 * core::f64::consts::PI * t)
    }
}
