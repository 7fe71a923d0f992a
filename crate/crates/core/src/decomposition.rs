//! Kingman-type atomic/diffuse decomposition of free completely random
//! measures and the Lévy–Itô decomposition of free Lévy bases.
//!
//! Models are finitely presented: the atomic part is a list of point
//! components with their laws, the diffuse part is a seed field. Cumulant
//! measures are therefore exact sums, and the decompositions are syntactic
//! up to the checks the theory demands (positivity, moments, null-array
//! decay of equal-measure splits).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cumulants::MomentVector;
use crate::levy_basis::{Cell, KappaAtom, SeedField, SetExpr, SignedSetMeasure};
use crate::transforms::{density_from_triplet, InversionOptions};
use crate::triplets::{
    free_cumulants_from_triplet, levy_quadrature, FreeTriplet, LevyIntegrand, LevyMeasure,
};
use crate::{Error, Result};

/// The law of an atomic component: a full triplet or a finite moment list.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AtomLaw {
    Triplet(FreeTriplet),
    Moments(MomentVector),
}

impl AtomLaw {
    fn kappa1(&self) -> Result<f64> {
        match self {
            AtomLaw::Triplet(t) => free_cumulants_from_triplet(t, 1)
                .map(|k| k.values[0])
                .map_err(|_| Error::MissingMoments { what: "atom law lacks a first moment" }),
            AtomLaw::Moments(m) => m
                .values
                .first()
                .copied()
                .ok_or(Error::MissingMoments { what: "atom law lacks a first moment" }),
        }
    }

    fn kappa2(&self) -> Result<f64> {
        match self {
            AtomLaw::Triplet(t) => free_cumulants_from_triplet(t, 2)
                .map(|k| k.values[1])
                .map_err(|_| Error::MissingMoments { what: "atom law lacks a second moment" }),
            AtomLaw::Moments(m) => {
                if m.values.len() < 2 {
                    return Err(Error::MissingMoments { what: "atom law lacks a second moment" });
                }
                let var = m.values[1] - m.values[0] * m.values[0];
                if var < -1e-12 {
                    return Err(Error::Invalid { what: "moment vector with negative variance" });
                }
                Ok(var.max(0.0))
            }
        }
    }
}

/// One atomic component of a free completely random measure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelAtom {
    pub x: f64,
    pub law: AtomLaw,
    /// Support of the law claimed to lie in `[0, ∞)`.
    pub positive: bool,
}

/// A free completely random measure: diffuse seed field plus point
/// components with explicit laws.
///
/// Atoms store the law of their component, not an operator realization, so
/// joint distributions across overlapping sets are outside the model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FCRMModel {
    pub diffuse: SeedField,
    pub atoms: Vec<ModelAtom>,
}

impl FCRMModel {
    pub fn validate(&self) -> Result<()> {
        self.diffuse.validate()?;
        let mut xs: Vec<f64> = self.atoms.iter().map(|a| a.x).collect();
        xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid { what: "duplicate atom locations" });
        }
        Ok(())
    }
}

/// First-cumulant density of a cell per unit Lebesgue measure.
fn cell_kappa1_density(cell: &Cell) -> Result<f64> {
    Ok((cell.theta + levy_quadrature(&cell.rho, LevyIntegrand::TMinusSigma)?) * cell.kappa_density)
}

fn cell_kappa2_density(cell: &Cell) -> Result<f64> {
    Ok((cell.sigma2 + levy_quadrature(&cell.rho, LevyIntegrand::Power(2))?) * cell.kappa_density)
}

fn atom_kappa1(at: &KappaAtom) -> Result<f64> {
    Ok((at.theta + levy_quadrature(&at.rho, LevyIntegrand::TMinusSigma)?) * at.mass)
}

fn atom_kappa2(at: &KappaAtom) -> Result<f64> {
    Ok((at.sigma2 + levy_quadrature(&at.rho, LevyIntegrand::Power(2))?) * at.mass)
}

/// `μ₁(E)`: sum of first cumulants of atoms in `E` plus the first-cumulant
/// density of the diffuse part integrated over `E`.
pub fn first_cumulant_measure(model: &FCRMModel, set: &SetExpr) -> Result<f64> {
    let mut total = 0.0;
    for atom in &model.atoms {
        if set.contains(atom.x) {
            total += atom.law.kappa1()?;
        }
    }
    for cell in &model.diffuse.cells {
        let overlap = set.intersect(&SetExpr::interval(cell.lo, cell.hi)).length();
        if overlap > 0.0 {
            total += cell_kappa1_density(cell)? * overlap;
        }
    }
    for at in &model.diffuse.kappa_atoms {
        if set.contains(at.x) {
            total += atom_kappa1(at)?;
        }
    }
    Ok(total)
}

/// `μ₂(E) = κ₂(M(E))`, always nonnegative.
pub fn second_cumulant_measure(model: &FCRMModel, set: &SetExpr) -> Result<f64> {
    let mut total = 0.0;
    for atom in &model.atoms {
        if set.contains(atom.x) {
            total += atom.law.kappa2()?;
        }
    }
    for cell in &model.diffuse.cells {
        let overlap = set.intersect(&SetExpr::interval(cell.lo, cell.hi)).length();
        if overlap > 0.0 {
            total += cell_kappa2_density(cell)? * overlap;
        }
    }
    for at in &model.diffuse.kappa_atoms {
        if set.contains(at.x) {
            total += atom_kappa2(at)?;
        }
    }
    Ok(total)
}

/// Which cumulant measure controls the atomic/diffuse split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DecomposeMode {
    /// Positive components; control measure `μ = μ₁`.
    Positive,
    /// Second moments required; control measure `μ = |μ₁| + μ₂`.
    Signed,
}

/// An atom retained by the decomposition: its coefficient function is
/// `E -> 1{x ∈ E}` since the controlling measure gives it positive mass.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KingmanAtom {
    pub x: f64,
    pub law: AtomLaw,
    pub mu_mass: f64,
}

/// Null-array surrogate: for each `n`, the carrier is split into `n` pieces
/// of equal diffuse `μ`-measure and the largest Markov/Chebyshev tail bound
/// `μ(E_j)/(n-normalization)` is recorded; it must decay like `1/n`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NullArrayCheck {
    pub split_counts: Vec<usize>,
    /// `max_j μ_c(E_j)/ε` for each split count.
    pub max_bounds: Vec<f64>,
    pub eps: f64,
}

/// Result of the Kingman decomposition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KingmanDecomposition {
    pub atoms: Vec<KingmanAtom>,
    /// Atoms of zero controlling mass: their law must be the point mass at
    /// 0, and they are dropped from the atomic part.
    pub dropped: Vec<f64>,
    pub diffuse: SeedField,
    pub null_array: NullArrayCheck,
}

/// Support check for a triplet-backed law via the density support estimate.
fn support_is_nonnegative(t: &FreeTriplet) -> Result<bool> {
    // Bracket the support by cumulant heuristics, then look at the density.
    let k = free_cumulants_from_triplet(t, 2)?;
    let spread = 6.0 * k.values[1].abs().sqrt().max(1.0) + k.values[0].abs();
    let lo = -spread.max(2.0);
    let hi = spread.max(2.0) + k.values[0].abs();
    let n = 96;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let d = density_from_triplet(t, &grid, &InversionOptions::default())?;
    let tol = 0.05 * (hi - lo) / n as f64 + 1e-6;
    Ok(d.support_estimate.0 >= -(0.05f64.max(tol)) && d.atoms.iter().all(|a| a.x >= -1e-9))
}

fn diffuse_mu_density(cell: &Cell, mode: DecomposeMode) -> Result<f64> {
    match mode {
        DecomposeMode::Positive => cell_kappa1_density(cell),
        DecomposeMode::Signed => Ok(cell_kappa1_density(cell)?.abs() + cell_kappa2_density(cell)?),
    }
}

/// Split `set` into `n` pieces of equal measure with respect to a
/// piecewise-constant density over the field's cells.
fn split_equal_measure(field: &SeedField, set: &SetExpr, densities: &[f64], n: usize) -> Vec<SetExpr> {
    // Collect (interval, density) fragments of `set` in order.
    let mut fragments: Vec<(f64, f64, f64)> = Vec::new();
    for (cell, &d) in field.cells.iter().zip(densities) {
        for &(lo, hi) in &set.intersect(&SetExpr::interval(cell.lo, cell.hi)).intervals {
            fragments.push((lo, hi, d));
        }
    }
    fragments.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let total: f64 = fragments.iter().map(|&(lo, hi, d)| (hi - lo) * d).sum();
    let mut pieces: Vec<SetExpr> = Vec::with_capacity(n);
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut acc = 0.0;
    let mut k = 1usize;
    for &(lo, hi, d) in &fragments {
        let mut lo = lo;
        while k < n {
            let target = total * k as f64 / n as f64;
            let here = (hi - lo) * d;
            if acc + here < target || d == 0.0 {
                break;
            }
            let cut = lo + (target - acc) / d;
            current.push((lo, cut.min(hi)));
            pieces.push(SetExpr::normalize(&current));
            current.clear();
            acc = target;
            lo = cut.min(hi);
            k += 1;
        }
        if lo < hi {
            current.push((lo, hi));
            acc += (hi - lo) * d;
        }
    }
    pieces.push(SetExpr::normalize(&current));
    while pieces.len() < n {
        pieces.push(SetExpr::empty());
    }
    pieces
}

/// Kingman decomposition: atoms of positive controlling mass keep
/// coefficient `1{x ∈ E}`, zero-mass atoms are dropped (their law must be
/// `δ₀`), and the diffuse part is returned together with the null-array
/// decay check along equal-measure splits of the carrier.
pub fn kingman_decompose(model: &FCRMModel, mode: DecomposeMode) -> Result<KingmanDecomposition> {
    model.validate()?;
    if !model.diffuse.kappa_atoms.is_empty() {
        // A control-measure atom of the diffuse part is an atom of μ.
        for at in &model.diffuse.kappa_atoms {
            let mass = match mode {
                DecomposeMode::Positive => atom_kappa1(at)?,
                DecomposeMode::Signed => atom_kappa1(at)?.abs() + atom_kappa2(at)?,
            };
            if mass > 0.0 {
                return Err(Error::ModelNotDiffuse);
            }
        }
    }
    let mut atoms = Vec::new();
    let mut dropped = Vec::new();
    for atom in &model.atoms {
        if mode == DecomposeMode::Positive {
            if !atom.positive {
                return Err(Error::NegativeLawInPositiveMode { what: "atom not flagged positive" });
            }
            if let AtomLaw::Triplet(t) = &atom.law {
                if !support_is_nonnegative(t)? {
                    return Err(Error::NegativeLawInPositiveMode {
                        what: "atom law support extends below 0",
                    });
                }
            }
        }
        let mu_mass = match mode {
            DecomposeMode::Positive => {
                let k1 = atom.law.kappa1()?;
                if k1 < -1e-12 {
                    return Err(Error::NegativeLawInPositiveMode { what: "negative first cumulant" });
                }
                k1
            }
            DecomposeMode::Signed => atom.law.kappa1()?.abs() + atom.law.kappa2()?,
        };
        if mu_mass.abs() <= 1e-15 {
            dropped.push(atom.x);
        } else {
            atoms.push(KingmanAtom { x: atom.x, law: atom.law.clone(), mu_mass });
        }
    }
    if mode == DecomposeMode::Positive {
        // The diffuse part must itself be positive: nonnegative drift
        // density after compensation, no second-order part, jumps above 0.
        for cell in &model.diffuse.cells {
            if cell.sigma2 != 0.0 {
                return Err(Error::NegativeLawInPositiveMode {
                    what: "diffuse part carries a semicircular component",
                });
            }
            if has_negative_jumps(&cell.rho) {
                return Err(Error::NegativeLawInPositiveMode { what: "diffuse jumps below 0" });
            }
            let compensated = cell.theta - levy_quadrature(&cell.rho, LevyIntegrand::Sigma)?;
            if compensated < -1e-9 {
                return Err(Error::NegativeLawInPositiveMode { what: "diffuse drift below compensator" });
            }
        }
    }
    // Null-array decay along equal-μ splits of the carrier.
    let mut densities = Vec::with_capacity(model.diffuse.cells.len());
    for cell in &model.diffuse.cells {
        densities.push(diffuse_mu_density(cell, mode)?);
    }
    let carrier = model.diffuse.carrier();
    let eps = 1.0;
    let split_counts = vec![2usize, 4, 8];
    let mut max_bounds = Vec::with_capacity(split_counts.len());
    let diffuse_only = FCRMModel { diffuse: model.diffuse.clone(), atoms: Vec::new() };
    for &n in &split_counts {
        let pieces = split_equal_measure(&model.diffuse, &carrier, &densities, n);
        let mut worst = 0.0f64;
        for piece in &pieces {
            let mu = match mode {
                DecomposeMode::Positive => first_cumulant_measure(&diffuse_only, piece)?,
                DecomposeMode::Signed => {
                    // evaluated piecewise to honour the split measure
                    let mut v = 0.0;
                    for (cell, &d) in model.diffuse.cells.iter().zip(&densities) {
                        v += d * piece.intersect(&SetExpr::interval(cell.lo, cell.hi)).length();
                    }
                    v
                }
            };
            worst = worst.max(mu / eps);
        }
        max_bounds.push(worst);
    }
    Ok(KingmanDecomposition {
        atoms,
        dropped,
        diffuse: model.diffuse.clone(),
        null_array: NullArrayCheck { split_counts, max_bounds, eps },
    })
}

fn has_negative_jumps(rho: &LevyMeasure) -> bool {
    rho.atoms.iter().any(|a| a.t < 0.0)
        || rho.near_zero.iter().any(|nz| nz.c_minus != 0.0)
        || rho.body.iter().any(|p| p.lo < 0.0)
}

/// The three typed parts of the Lévy–Itô decomposition, plus the
/// compensated drift when `∫|ς| dF` is finite cell by cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevyItoParts {
    /// `Θ`: drift as a signed measure.
    pub drift: SignedSetMeasure,
    /// Semicircular part: seeds `(0, σ², 0)`.
    pub gaussian: SeedField,
    /// Jump part: seeds `(0, 0, ρ)`.
    pub jumps: SeedField,
    /// `Θ(E) − ∫ ς dF_E` when finite: the drift of the uncompensated-jump
    /// representation. For a free Poisson basis it vanishes identically.
    pub compensated_drift: Option<SignedSetMeasure>,
}

impl LevyItoParts {
    /// Recombine the parts into the marginal triplet of `E`.
    pub fn recombine(&self, set: &SetExpr) -> Result<FreeTriplet> {
        let a = self.drift.eval(set);
        let mut b = 0.0;
        let mut r = LevyMeasure::zero();
        for cell in &self.gaussian.cells {
            b += cell.sigma2 * cell.kappa_density * set.intersect(&SetExpr::interval(cell.lo, cell.hi)).length();
        }
        for at in &self.gaussian.kappa_atoms {
            if set.contains(at.x) {
                b += at.sigma2 * at.mass;
            }
        }
        for cell in &self.jumps.cells {
            let w = cell.kappa_density * set.intersect(&SetExpr::interval(cell.lo, cell.hi)).length();
            if w > 0.0 {
                r = r.add(&cell.rho.scale_mass(w));
            }
        }
        for at in &self.jumps.kappa_atoms {
            if set.contains(at.x) {
                r = r.add(&at.rho.scale_mass(at.mass));
            }
        }
        Ok(FreeTriplet::free(a, b, r))
    }
}

/// Split a basis into drift, semicircular and jump parts of disjoint types;
/// the marginal triplets recombine exactly.
pub fn levy_ito_split(field: &SeedField) -> Result<LevyItoParts> {
    let mut drift = SignedSetMeasure::default();
    let mut gaussian = SeedField::default();
    let mut jumps = SeedField::default();
    let mut compensated: Option<SignedSetMeasure> = Some(SignedSetMeasure::default());
    for cell in &field.cells {
        if cell.theta != 0.0 {
            drift.pieces.push((cell.lo, cell.hi, cell.theta * cell.kappa_density));
        }
        // both fields keep the full carrier, with zero seeds where the
        // component is absent
        gaussian.cells.push(Cell {
            lo: cell.lo,
            hi: cell.hi,
            theta: 0.0,
            sigma2: cell.sigma2,
            rho: LevyMeasure::zero(),
            kappa_density: cell.kappa_density,
        });
        jumps.cells.push(Cell {
            lo: cell.lo,
            hi: cell.hi,
            theta: 0.0,
            sigma2: 0.0,
            rho: cell.rho.clone(),
            kappa_density: cell.kappa_density,
        });
        if let Some(comp) = compensated.as_mut() {
            match levy_quadrature(&cell.rho, LevyIntegrand::AbsSigma) {
                Ok(_) => {
                    let d = (cell.theta - levy_quadrature(&cell.rho, LevyIntegrand::Sigma)?)
                        * cell.kappa_density;
                    if d != 0.0 {
                        comp.pieces.push((cell.lo, cell.hi, d));
                    }
                }
                Err(Error::DivergentIntegral { .. }) => compensated = None,
                Err(e) => return Err(e),
            }
        }
    }
    for at in &field.kappa_atoms {
        if at.theta != 0.0 {
            drift.atoms.push((at.x, at.theta * at.mass));
        }
        if at.sigma2 != 0.0 {
            gaussian.kappa_atoms.push(KappaAtom {
                x: at.x,
                mass: at.mass,
                theta: 0.0,
                sigma2: at.sigma2,
                rho: LevyMeasure::zero(),
            });
        }
        if !at.rho.is_zero() {
            jumps.kappa_atoms.push(KappaAtom {
                x: at.x,
                mass: at.mass,
                theta: 0.0,
                sigma2: 0.0,
                rho: at.rho.clone(),
            });
        }
        if let Some(comp) = compensated.as_mut() {
            match levy_quadrature(&at.rho, LevyIntegrand::AbsSigma) {
                Ok(_) => {
                    let m = (at.theta - levy_quadrature(&at.rho, LevyIntegrand::Sigma)?) * at.mass;
                    if m != 0.0 {
                        comp.atoms.push((at.x, m));
                    }
                }
                Err(Error::DivergentIntegral { .. }) => compensated = None,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(LevyItoParts { drift, gaussian, jumps, compensated_drift: compensated })
}

/// Remove jumps of magnitude at most `eps`: the truncated jump field with
/// seeds `(0, 0, ρ|_{|t| > ε})` per cell, and `F^{(ε)}_E(B) = F_E(B \ [−ε, ε])`.
pub fn truncate_small_jumps(field: &SeedField, eps: f64) -> Result<SeedField> {
    if !(eps > 0.0) {
        return Err(Error::Invalid { what: "truncation radius must be positive" });
    }
    let mut cells = Vec::new();
    for cell in &field.cells {
        let rho = cell.rho.restrict_tail(eps);
        cells.push(Cell {
            lo: cell.lo,
            hi: cell.hi,
            theta: 0.0,
            sigma2: 0.0,
            rho,
            kappa_density: cell.kappa_density,
        });
    }
    let mut kappa_atoms = Vec::new();
    for at in &field.kappa_atoms {
        let rho = at.rho.restrict_tail(eps);
        if rho.is_zero() {
            continue;
        }
        kappa_atoms.push(KappaAtom { x: at.x, mass: at.mass, theta: 0.0, sigma2: 0.0, rho });
    }
    Ok(SeedField { cells, kappa_atoms })
}
