//! Free Lévy bases over a ring of bounded interval unions.
//!
//! A basis is stored through its characteristic quadruplet `(θ, σ², ρ, κ)`:
//! piecewise-constant Lévy seeds over cells of the real line, with the
//! control measure `κ` given by a positive density per cell plus point
//! atoms. Marginals of sets are triplets, so everything downstream
//! (transforms, integration, decompositions) applies verbatim.

use alloc::vec;
use alloc::vec::Vec;

use crate::triplets::{levy_quadrature, FreeTriplet, LevyIntegrand, LevyMeasure};
use crate::{Error, Result};

/// Finite disjoint union of bounded half-open intervals `[lo, hi)`, kept
/// sorted; the computable fragment of a δ-ring of subsets of ℝ.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SetExpr {
    pub intervals: Vec<(f64, f64)>,
}

impl SetExpr {
    pub fn empty() -> Self {
        SetExpr::default()
    }

    /// Normal form of a raw interval list: empty intervals dropped,
    /// overlapping and adjacent intervals merged, result sorted.
    pub fn normalize(raw: &[(f64, f64)]) -> Self {
        let mut iv: Vec<(f64, f64)> = raw.iter().copied().filter(|&(lo, hi)| lo < hi).collect();
        iv.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (lo, hi) in iv {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        SetExpr { intervals: out }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        SetExpr::normalize(&[(lo, hi)])
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x < hi)
    }

    /// Total Lebesgue measure.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).sum()
    }

    pub fn union(&self, other: &SetExpr) -> SetExpr {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        SetExpr::normalize(&raw)
    }

    pub fn intersect(&self, other: &SetExpr) -> SetExpr {
        let mut raw = Vec::new();
        for &(alo, ahi) in &self.intervals {
            for &(blo, bhi) in &other.intervals {
                let lo = alo.max(blo);
                let hi = ahi.min(bhi);
                if lo < hi {
                    raw.push((lo, hi));
                }
            }
        }
        SetExpr::normalize(&raw)
    }

    pub fn diff(&self, other: &SetExpr) -> SetExpr {
        let mut raw = Vec::new();
        for &(alo, ahi) in &self.intervals {
            let mut lo = alo;
            for &(blo, bhi) in &other.intervals {
                if bhi <= lo || blo >= ahi {
                    continue;
                }
                if blo > lo {
                    raw.push((lo, blo));
                }
                lo = lo.max(bhi);
                if lo >= ahi {
                    break;
                }
            }
            if lo < ahi {
                raw.push((lo, ahi));
            }
        }
        SetExpr::normalize(&raw)
    }

    pub fn is_subset_of(&self, other: &SetExpr) -> bool {
        self.diff(other).is_empty()
    }
}

/// One cell of a seed field: constant Lévy seed `(theta, sigma2, rho)` on
/// `[lo, hi)` with control-measure density `kappa_density` there.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub theta: f64,
    pub sigma2: f64,
    pub rho: LevyMeasure,
    pub kappa_density: f64,
}

/// A control-measure atom carrying its own seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KappaAtom {
    pub x: f64,
    pub mass: f64,
    pub theta: f64,
    pub sigma2: f64,
    pub rho: LevyMeasure,
}

/// A free Lévy basis as a characteristic quadruplet over finitely many
/// cells and control-measure atoms.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedField {
    pub cells: Vec<Cell>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub kappa_atoms: Vec<KappaAtom>,
}

/// Seed size `|θ| + σ² + ∫ min(1, t²) dρ`; 1 for canonical seeds.
fn seed_size(theta: f64, sigma2: f64, rho: &LevyMeasure) -> Result<f64> {
    Ok(theta.abs() + sigma2 + levy_quadrature(rho, LevyIntegrand::MinOneT2)?)
}

impl SeedField {
    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            if !(c.lo < c.hi) {
                return Err(Error::Invalid { what: "empty cell interval" });
            }
            if !(c.kappa_density > 0.0) {
                return Err(Error::Invalid { what: "kappa density must be positive" });
            }
            if c.sigma2 < 0.0 {
                return Err(Error::Invalid { what: "sigma2 must be nonnegative" });
            }
            c.rho.validate()?;
        }
        let mut sorted: Vec<(f64, f64)> = self.cells.iter().map(|c| (c.lo, c.hi)).collect();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if sorted.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::Invalid { what: "overlapping cells" });
        }
        let carrier = self.carrier();
        for a in &self.kappa_atoms {
            if !(a.mass > 0.0) {
                return Err(Error::Invalid { what: "kappa atom mass must be positive" });
            }
            if a.sigma2 < 0.0 {
                return Err(Error::Invalid { what: "sigma2 must be nonnegative" });
            }
            a.rho.validate()?;
            if !carrier.contains(a.x) {
                return Err(Error::Invalid { what: "kappa atom outside the carrier" });
            }
        }
        let mut xs: Vec<f64> = self.kappa_atoms.iter().map(|a| a.x).collect();
        xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid { what: "duplicate kappa atoms" });
        }
        Ok(())
    }

    /// Union of the cell intervals.
    pub fn carrier(&self) -> SetExpr {
        SetExpr::normalize(&self.cells.iter().map(|c| (c.lo, c.hi)).collect::<Vec<_>>())
    }

    /// Whether every seed satisfies the normalization
    /// `|θ| + σ² + ∫min(1,t²) dρ = 1` within `tol`.
    pub fn is_canonical(&self, tol: f64) -> Result<bool> {
        for c in &self.cells {
            if (seed_size(c.theta, c.sigma2, &c.rho)? - 1.0).abs() > tol {
                return Ok(false);
            }
        }
        for a in &self.kappa_atoms {
            if (seed_size(a.theta, a.sigma2, &a.rho)? - 1.0).abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Stored control-measure value `κ(E)`.
    pub fn stored_kappa(&self, set: &SetExpr) -> f64 {
        let mut total = 0.0;
        for c in &self.cells {
            total += c.kappa_density * set.intersect(&SetExpr::interval(c.lo, c.hi)).length();
        }
        for a in &self.kappa_atoms {
            if set.contains(a.x) {
                total += a.mass;
            }
        }
        total
    }
}

/// Marginal triplet of a set: `Θ(E) = ∫_E θ dκ`, `Σ(E) = ∫_E σ² dκ`,
/// `F_E = ∫_E ρ(x, ·) κ(dx)` as a finite weighted sum of Lévy measures.
pub fn triplet_of_set(field: &SeedField, set: &SetExpr) -> Result<FreeTriplet> {
    if !set.is_subset_of(&field.carrier()) {
        return Err(Error::OutOfCarrier);
    }
    let mut a = 0.0;
    let mut b = 0.0;
    let mut r = LevyMeasure::zero();
    for c in &field.cells {
        let weight = c.kappa_density * set.intersect(&SetExpr::interval(c.lo, c.hi)).length();
        if weight == 0.0 {
            continue;
        }
        a += c.theta * weight;
        b += c.sigma2 * weight;
        r = r.add(&c.rho.scale_mass(weight));
    }
    for at in &field.kappa_atoms {
        if set.contains(at.x) {
            a += at.theta * at.mass;
            b += at.sigma2 * at.mass;
            r = r.add(&at.rho.scale_mass(at.mass));
        }
    }
    Ok(FreeTriplet::free(a, b, r))
}

/// Canonical control-measure value
/// `κ(E) = |Θ|(E) + Σ(E) + ∫ min(1, x²) dF_E`, computed from the marginal
/// measures; equals [`SeedField::stored_kappa`] for a canonical field.
pub fn control_measure(field: &SeedField, set: &SetExpr) -> Result<f64> {
    if !set.is_subset_of(&field.carrier()) {
        return Err(Error::OutOfCarrier);
    }
    let mut total = 0.0;
    for c in &field.cells {
        let weight = c.kappa_density * set.intersect(&SetExpr::interval(c.lo, c.hi)).length();
        if weight == 0.0 {
            continue;
        }
        total += weight * seed_size(c.theta, c.sigma2, &c.rho)?;
    }
    for at in &field.kappa_atoms {
        if set.contains(at.x) {
            total += at.mass * seed_size(at.theta, at.sigma2, &at.rho)?;
        }
    }
    Ok(total)
}

/// Rescale seeds and κ so every seed has unit size; zero-seed cells and
/// atoms are dropped. Marginal triplets are unchanged.
pub fn canonicalize_field(field: &SeedField) -> Result<SeedField> {
    let mut cells = Vec::with_capacity(field.cells.len());
    for c in &field.cells {
        let size = seed_size(c.theta, c.sigma2, &c.rho)?;
        if size == 0.0 {
            continue;
        }
        cells.push(Cell {
            lo: c.lo,
            hi: c.hi,
            theta: c.theta / size,
            sigma2: c.sigma2 / size,
            rho: c.rho.scale_mass(1.0 / size),
            kappa_density: c.kappa_density * size,
        });
    }
    let mut kappa_atoms = Vec::with_capacity(field.kappa_atoms.len());
    for a in &field.kappa_atoms {
        let size = seed_size(a.theta, a.sigma2, &a.rho)?;
        if size == 0.0 {
            continue;
        }
        kappa_atoms.push(KappaAtom {
            x: a.x,
            mass: a.mass * size,
            theta: a.theta / size,
            sigma2: a.sigma2 / size,
            rho: a.rho.scale_mass(1.0 / size),
        });
    }
    Ok(SeedField { cells, kappa_atoms })
}

/// A piecewise-constant density on disjoint intervals (an intensity measure
/// `η` for factorizable bases).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

/// Factorizable basis with constant seed `ν/c_ν` and `κ = c_ν·η`, where
/// `c_ν = |a| + b + ∫ min(1, t²) dr`. The marginal of `E` is `η(E)·(a,b,r)`.
pub fn make_factorizable(nu: &FreeTriplet, eta: &[DensityPiece]) -> Result<SeedField> {
    let c_nu = seed_size(nu.a, nu.b, &nu.r)?;
    if c_nu == 0.0 {
        return Err(Error::ZeroLaw);
    }
    let mut cells = Vec::new();
    for piece in eta {
        if !(piece.lo < piece.hi) || piece.density < 0.0 {
            return Err(Error::Invalid { what: "eta piece must have lo < hi and density >= 0" });
        }
        if piece.density == 0.0 {
            continue;
        }
        cells.push(Cell {
            lo: piece.lo,
            hi: piece.hi,
            theta: nu.a / c_nu,
            sigma2: nu.b / c_nu,
            rho: nu.r.scale_mass(1.0 / c_nu),
            kappa_density: c_nu * piece.density,
        });
    }
    let field = SeedField { cells, kappa_atoms: Vec::new() };
    field.validate()?;
    Ok(field)
}

/// Semicircular basis `G_η`: quadruplet `(0, 1, 0, η)`.
pub fn semicircular_basis(eta: &[DensityPiece]) -> Result<SeedField> {
    make_factorizable(&FreeTriplet::semicircular_std(), eta)
}

/// Free Poisson basis `P_η`: quadruplet `(1/2, 0, δ₁/2, 2η)`.
pub fn free_poisson_basis(eta: &[DensityPiece]) -> Result<SeedField> {
    make_factorizable(&FreeTriplet::free_poisson(1.0), eta)
}

/// A strictly monotone piecewise-linear map given by contiguous pieces.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiecewiseLinearMap {
    /// `(lo, hi, slope, intercept)`: `x -> slope·x + intercept` on `[lo, hi)`.
    pub pieces: Vec<(f64, f64, f64, f64)>,
}

impl PiecewiseLinearMap {
    pub fn identity(lo: f64, hi: f64) -> Self {
        PiecewiseLinearMap { pieces: vec![(lo, hi, 1.0, 0.0)] }
    }

    pub fn apply(&self, x: f64) -> Option<f64> {
        self.pieces
            .iter()
            .find(|&&(lo, hi, _, _)| lo <= x && x < hi)
            .map(|&(_, _, s, o)| s * x + o)
    }

    fn validate_on(&self, carrier: &SetExpr) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::NotInvertible);
        }
        let sign = self.pieces[0].2;
        if sign == 0.0 {
            return Err(Error::NotInvertible);
        }
        for &(lo, hi, slope, _) in &self.pieces {
            if !(lo < hi) || slope == 0.0 || (slope > 0.0) != (sign > 0.0) {
                return Err(Error::NotInvertible);
            }
        }
        let domain =
            SetExpr::normalize(&self.pieces.iter().map(|&(lo, hi, _, _)| (lo, hi)).collect::<Vec<_>>());
        if !carrier.is_subset_of(&domain) {
            return Err(Error::NotInvertible);
        }
        // Injectivity: images of the pieces must not overlap.
        let mut images: Vec<(f64, f64)> = self
            .pieces
            .iter()
            .map(|&(lo, hi, s, o)| {
                let (a, b) = (s * lo + o, s * hi + o);
                (a.min(b), a.max(b))
            })
            .collect();
        images.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if images.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::NotInvertible);
        }
        Ok(())
    }
}

/// Pushforward of a basis along a strictly monotone piecewise-linear map:
/// cells are mapped through, κ densities pick up `1/|slope|`, seeds are
/// unchanged, so the new marginal of `H` equals the old marginal of the
/// preimage of `H`.
pub fn pushforward_field(field: &SeedField, phi: &PiecewiseLinearMap) -> Result<SeedField> {
    phi.validate_on(&field.carrier())?;
    let mut cells = Vec::new();
    for c in &field.cells {
        for &(plo, phi_hi, slope, offset) in &phi.pieces {
            let lo = c.lo.max(plo);
            let hi = c.hi.min(phi_hi);
            if lo >= hi {
                continue;
            }
            let (a, b) = (slope * lo + offset, slope * hi + offset);
            cells.push(Cell {
                lo: a.min(b),
                hi: a.max(b),
                theta: c.theta,
                sigma2: c.sigma2,
                rho: c.rho.clone(),
                kappa_density: c.kappa_density / slope.abs(),
            });
        }
    }
    cells.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    let mut kappa_atoms = Vec::new();
    for at in &field.kappa_atoms {
        let x = phi.apply(at.x).ok_or(Error::NotInvertible)?;
        kappa_atoms.push(KappaAtom { x, ..at.clone() });
    }
    Ok(SeedField { cells, kappa_atoms })
}

/// Concentration `M^A(E) = M(A ∩ E)`: the field zeroed outside `A`. The
/// carrier is preserved (zero seeds outside `A`), so marginals of any set
/// inside the original carrier remain well-defined.
pub fn concentrate_field(field: &SeedField, set: &SetExpr) -> SeedField {
    let mut cells = Vec::new();
    for c in &field.cells {
        let cell_set = SetExpr::interval(c.lo, c.hi);
        for &(lo, hi) in &set.intersect(&cell_set).intervals {
            cells.push(Cell { lo, hi, ..c.clone() });
        }
        for &(lo, hi) in &cell_set.diff(set).intervals {
            cells.push(Cell {
                lo,
                hi,
                theta: 0.0,
                sigma2: 0.0,
                rho: LevyMeasure::zero(),
                kappa_density: c.kappa_density,
            });
        }
    }
    cells.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    let kappa_atoms = field.kappa_atoms.iter().filter(|a| set.contains(a.x)).cloned().collect();
    SeedField { cells, kappa_atoms }
}

/// A signed measure on interval unions: densities per interval plus signed
/// point masses, with a computable Hahn–Jordan split.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignedSetMeasure {
    /// `(lo, hi, density)` pieces with disjoint intervals.
    pub pieces: Vec<(f64, f64, f64)>,
    /// `(x, signed mass)` atoms.
    pub atoms: Vec<(f64, f64)>,
}

impl SignedSetMeasure {
    pub fn eval(&self, set: &SetExpr) -> f64 {
        let mut total = 0.0;
        for &(lo, hi, d) in &self.pieces {
            total += d * set.intersect(&SetExpr::interval(lo, hi)).length();
        }
        for &(x, m) in &self.atoms {
            if set.contains(x) {
                total += m;
            }
        }
        total
    }

    pub fn total_variation(&self, set: &SetExpr) -> f64 {
        let mut total = 0.0;
        for &(lo, hi, d) in &self.pieces {
            total += d.abs() * set.intersect(&SetExpr::interval(lo, hi)).length();
        }
        for &(x, m) in &self.atoms {
            if set.contains(x) {
                total += m.abs();
            }
        }
        total
    }

    /// Hahn–Jordan decomposition: positive and negative parts, singular to
    /// each other by the sign of the density/mass.
    pub fn hahn_jordan(&self) -> (SignedSetMeasure, SignedSetMeasure) {
        let mut plus = SignedSetMeasure::default();
        let mut minus = SignedSetMeasure::default();
        for &(lo, hi, d) in &self.pieces {
            if d > 0.0 {
                plus.pieces.push((lo, hi, d));
            } else if d < 0.0 {
                minus.pieces.push((lo, hi, -d));
            }
        }
        for &(x, m) in &self.atoms {
            if m > 0.0 {
                plus.atoms.push((x, m));
            } else if m < 0.0 {
                minus.atoms.push((x, -m));
            }
        }
        (plus, minus)
    }
}
