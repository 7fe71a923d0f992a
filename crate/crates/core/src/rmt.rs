//! Random-matrix Monte Carlo: ensembles whose empirical spectral
//! distributions converge to the laws the analytic modules predict.
//!
//! The Hermitian eigensolver is in-repo: a complex Hermitian matrix is
//! embedded as the doubled real symmetric matrix `[[X, -Y], [Y, X]]`
//! (every eigenvalue appears twice), reduced by Householder
//! tridiagonalization and finished with implicit-shift QL. Desk scale is
//! `n <= 2048`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::CounterRng;
use crate::transforms::SpectralDensity;
use crate::triplets::{levy_quadrature, FreeTriplet, LevyIntegrand, LevyMeasure};
use crate::{Error, Result};

/// Matrix ensemble specification.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum EnsembleKind {
    /// Hermitian Gaussian ensemble; ESD converges to the semicircle law of
    /// variance `variance`.
    Gue { variance: f64 },
    /// Complex Wishart `XX*/n` with `m = round(lambda·n)` columns; ESD
    /// converges to the Marchenko–Pastur law of rate `lambda`.
    Wishart { lambda: f64 },
    /// Matrix model of a freely infinitely divisible triplet with
    /// small-jump truncation `eps`.
    Fid { triplet: FreeTriplet, eps: f64 },
}

/// An ensemble together with its size and seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ensemble {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: EnsembleKind,
    pub n: usize,
    pub seed: u64,
}

impl Ensemble {
    pub fn sample(&self) -> Result<EigenSample> {
        if self.n < 2 {
            return Err(Error::Invalid { what: "ensemble size must be at least 2" });
        }
        match &self.kind {
            EnsembleKind::Gue { variance } => sample_gue(self.n, *variance, self.seed),
            EnsembleKind::Wishart { lambda } => sample_wishart(self.n, *lambda, self.seed),
            EnsembleKind::Fid { triplet, eps } => sample_fid_matrix(triplet, self.n, *eps, self.seed),
        }
    }
}

/// Sorted eigenvalues with sampling metadata.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenSample {
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
    pub kind: String,
}

impl EigenSample {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Empirical moment `(1/n) Σ λ_i^p`.
    pub fn moment(&self, p: u32) -> f64 {
        self.eigenvalues.iter().map(|&x| x.powi(p as i32)).sum::<f64>() / self.n() as f64
    }
}

// ---------------------------------------------------------------------------
// Eigensolver
// ---------------------------------------------------------------------------

/// Householder reduction of a symmetric matrix (row-major, destroyed) to
/// tridiagonal form; returns `(diagonal, subdiagonal)`. Only the lower
/// triangle is read and written.
#[allow(clippy::needless_range_loop)]
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0;
        for i in (k + 1)..n {
            norm2 += a[i * n + k] * a[i * n + k];
        }
        let alpha = a[(k + 1) * n + k];
        if norm2 == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let norm = norm2.sqrt();
        let beta = if alpha >= 0.0 { -norm } else { norm };
        if (norm2 - alpha * beta) == 0.0 {
            e[k] = beta;
            continue;
        }
        v[k + 1] = alpha - beta;
        for i in (k + 2)..n {
            v[i] = a[i * n + k];
        }
        let vtv = norm2 - 2.0 * beta * alpha + beta * beta;
        let tau = 2.0 / vtv;
        // p = tau·A·v on the trailing block, one pass over the lower triangle
        for x in p[(k + 1)..n].iter_mut() {
            *x = 0.0;
        }
        for i in (k + 1)..n {
            let vi = v[i];
            let row = &a[i * n..i * n + i];
            let mut acc = a[i * n + i] * vi;
            for j in (k + 1)..i {
                acc += row[j] * v[j];
                p[j] += row[j] * vi;
            }
            p[i] += acc;
        }
        let mut vtp = 0.0;
        for i in (k + 1)..n {
            p[i] *= tau;
            vtp += v[i] * p[i];
        }
        let corr = 0.5 * tau * vtp;
        for i in (k + 1)..n {
            p[i] -= corr * v[i];
        }
        // rank-two update of the lower triangle
        for i in (k + 1)..n {
            let (vi, pi) = (v[i], p[i]);
            let row = &mut a[i * n..i * n + i + 1];
            for j in (k + 1)..=i {
                row[j] -= vi * p[j] + pi * v[j];
            }
        }
        e[k] = beta;
        for i in (k + 1)..n {
            v[i] = 0.0;
        }
    }
    if n >= 2 {
        e[n - 2] = a[(n - 1) * n + (n - 2)];
    }
    let d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues only.
fn tql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    // shift subdiagonal into the 1..n convention with a leading slot
    let mut sub = vec![0.0; n];
    sub[..(n - 1)].copy_from_slice(&e[..n.saturating_sub(1)]);
    // deflation threshold blends the local relative test with the matrix
    // scale, so exact-zero diagonal blocks still deflate
    let anorm = d
        .iter()
        .zip(sub.iter())
        .fold(0.0f64, |m, (&x, &y)| m.max(x.abs() + y.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if sub[m].abs() <= f64::EPSILON * (dd + anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NoConvergence { what: "implicit-shift QL", residual: sub[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * sub[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + sub[l] / denom;
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * sub[i];
                let b = c * sub[i];
                r = f.hypot(g);
                sub[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    sub[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            sub[l] = g;
            sub[m] = 0.0;
        }
    }
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(())
}

/// Eigenvalues of a complex Hermitian matrix in row-major storage.
///
/// The matrix must be Hermitian within `1e-12` (relative to the largest
/// entry). The complex problem is solved through the doubled real symmetric
/// embedding, whose spectrum is that of the input with multiplicity two.
pub fn hermitian_eigenvalues(matrix: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if matrix.len() != n * n {
        return Err(Error::Invalid { what: "matrix storage does not match size" });
    }
    let mut scale = 0.0f64;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = matrix[i * n + j];
            scale = scale.max(x.norm());
            dev = dev.max((x - matrix[j * n + i].conj()).norm());
        }
    }
    if dev > 1e-12 * scale.max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let m = 2 * n;
    let mut doubled = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = matrix[i * n + j];
            doubled[i * m + j] = z.re;
            doubled[i * m + (j + n)] = -z.im;
            doubled[(i + n) * m + j] = z.im;
            doubled[(i + n) * m + (j + n)] = z.re;
        }
    }
    let (mut d, mut e) = tridiagonalize(&mut doubled, m);
    tql_implicit(&mut d, &mut e)?;
    // every eigenvalue appears exactly twice; take one of each pair
    let out: Vec<f64> = d.iter().step_by(2).copied().collect();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

fn hermitian_gaussian(n: usize, variance: f64, rng: &mut CounterRng) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    let diag_sd = (variance / n as f64).sqrt();
    let off_sd = (variance / (2.0 * n as f64)).sqrt();
    for i in 0..n {
        h[i * n + i] = Complex64::new(diag_sd * rng.normal(), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(off_sd * rng.normal(), off_sd * rng.normal());
            h[i * n + j] = z;
            h[j * n + i] = z.conj();
        }
    }
    h
}

/// GUE sample scaled so the ESD converges to the semicircle law of the
/// given variance (`γ_{0, 2√variance}`).
pub fn sample_gue(n: usize, variance: f64, seed: u64) -> Result<EigenSample> {
    if n < 2 {
        return Err(Error::Invalid { what: "ensemble size must be at least 2" });
    }
    if !(variance >= 0.0) {
        return Err(Error::Invalid { what: "variance must be nonnegative" });
    }
    let mut rng = CounterRng::for_component(seed, "gue");
    let h = hermitian_gaussian(n, variance, &mut rng);
    let eigenvalues = hermitian_eigenvalues(&h, n)?;
    Ok(EigenSample { eigenvalues, seed, kind: String::from("gue") })
}

/// Complex Wishart `XX*/n` with `m = round(lambda·n)` columns: ESD
/// converges to the Marchenko–Pastur law of rate `lambda`, including the
/// `(1−λ)δ₀` atom for `λ < 1`.
pub fn sample_wishart(n: usize, lambda: f64, seed: u64) -> Result<EigenSample> {
    if n < 2 {
        return Err(Error::Invalid { what: "ensemble size must be at least 2" });
    }
    if !(lambda > 0.0) {
        return Err(Error::Invalid { what: "aspect ratio must be positive" });
    }
    let m = (lambda * n as f64).round().max(1.0) as usize;
    let mut rng = CounterRng::for_component(seed, "wishart");
    let sd = (0.5f64).sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); n * m];
    for v in x.iter_mut() {
        *v = Complex64::new(sd * rng.normal(), sd * rng.normal());
    }
    // W = X X* / n, lower triangle then mirrored
    let mut w = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..m {
                s += x[i * m + k] * x[j * m + k].conj();
            }
            s /= n as f64;
            w[i * n + j] = s;
            w[j * n + i] = s.conj();
        }
        // exact real diagonal
        w[i * n + i] = Complex64::new(w[i * n + i].re, 0.0);
    }
    let eigenvalues = hermitian_eigenvalues(&w, n)?;
    Ok(EigenSample { eigenvalues, seed, kind: String::from("wishart") })
}

/// Draw one jump size from the normalized restriction of `r` to
/// `|t| > eps` (the measure must already be restricted).
fn sample_jump(r: &LevyMeasure, rng: &mut CounterRng) -> Result<f64> {
    // piece masses
    let mut masses: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for a in &r.atoms {
        masses.push(a.mass);
        total += a.mass;
    }
    for nz in &r.near_zero {
        for (c, _side) in [(nz.c_plus, 1.0), (nz.c_minus, -1.0)] {
            let mass = power_mass(c, nz.alpha, nz.t_min, nz.eps0)?;
            masses.push(mass);
            total += mass;
        }
    }
    for piece in &r.body {
        let mass = piece.mass();
        masses.push(mass);
        total += mass;
    }
    if !(total > 0.0) {
        return Err(Error::Invalid { what: "cannot sample from a zero measure" });
    }
    let mut pick = rng.uniform() * total;
    let mut idx = 0;
    while idx + 1 < masses.len() && pick > masses[idx] {
        pick -= masses[idx];
        idx += 1;
    }
    // resolve which piece idx refers to
    let mut offset = 0;
    for a in &r.atoms {
        if idx == offset {
            return Ok(a.t);
        }
        offset += 1;
    }
    for nz in &r.near_zero {
        for side in [1.0f64, -1.0] {
            if idx == offset {
                let u = rng.uniform();
                return Ok(side * power_inverse_cdf(nz.alpha, nz.t_min, nz.eps0, u));
            }
            offset += 1;
        }
    }
    for piece in &r.body {
        if idx == offset {
            return Ok(body_inverse_cdf(piece, rng.uniform()));
        }
        offset += 1;
    }
    Err(Error::Invalid { what: "jump piece selection out of range" })
}

fn power_mass(c: f64, alpha: f64, lo: f64, hi: f64) -> Result<f64> {
    if c == 0.0 || lo >= hi {
        return Ok(0.0);
    }
    if lo == 0.0 {
        return Err(Error::DivergentIntegral { what: "sampling an untruncated small-jump piece" });
    }
    if alpha == 0.0 {
        Ok(c * (hi / lo).ln())
    } else {
        Ok(c * (lo.powf(-alpha) - hi.powf(-alpha)) / alpha)
    }
}

fn power_inverse_cdf(alpha: f64, lo: f64, hi: f64, u: f64) -> f64 {
    if alpha == 0.0 {
        lo * (hi / lo).powf(u)
    } else {
        let a = lo.powf(-alpha);
        let b = hi.powf(-alpha);
        (a - u * (a - b)).powf(-1.0 / alpha)
    }
}

fn body_inverse_cdf(piece: &crate::triplets::BodyPiece, u: f64) -> f64 {
    let total = piece.mass();
    let target = u * total;
    let cdf = |x: f64| {
        let mut s = 0.0;
        for (k, &c) in piece.coeffs.iter().enumerate() {
            let p = k as i32 + 1;
            s += c * (x.powi(p) - piece.lo.powi(p)) / p as f64;
        }
        s
    };
    let (mut lo, mut hi) = (piece.lo, piece.hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Matrix model of a freely infinitely divisible law: drift times the
/// identity, a GUE block of variance `b`, and a compensated compound part
/// with `Poisson(n·r(|t| > eps))` rank-one jumps at sizes drawn from the
/// truncated Lévy measure. The ESD converges to the law of the triplet as
/// `n -> ∞`, `eps -> 0`.
pub fn sample_fid_matrix(u: &FreeTriplet, n: usize, eps: f64, seed: u64) -> Result<EigenSample> {
    if n < 2 {
        return Err(Error::Invalid { what: "ensemble size must be at least 2" });
    }
    if !(eps > 0.0) {
        return Err(Error::Invalid { what: "truncation radius must be positive" });
    }
    u.validate()?;
    let tail = u.r.restrict_tail(eps);
    let tail_mass = levy_quadrature(&tail, LevyIntegrand::TailIndicator(eps / 2.0))?;
    let compensator = levy_quadrature(&tail, LevyIntegrand::Sigma)?;
    let mut h = if u.b > 0.0 {
        let mut rng = CounterRng::for_component(seed, "fid-gaussian");
        hermitian_gaussian(n, u.b, &mut rng)
    } else {
        vec![Complex64::new(0.0, 0.0); n * n]
    };
    let shift = u.a - compensator;
    for i in 0..n {
        h[i * n + i] += shift;
    }
    if tail_mass > 0.0 {
        let mut rng = CounterRng::for_component(seed, "fid-jumps");
        let count = rng.poisson(n as f64 * tail_mass);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..count {
            let t = sample_jump(&tail, &mut rng)?;
            // uniform unit vector
            let mut norm2 = 0.0;
            for x in v.iter_mut() {
                *x = Complex64::new(rng.normal(), rng.normal());
                norm2 += x.norm_sqr();
            }
            let inv = norm2.sqrt().recip();
            for i in 0..n {
                for j in 0..=i {
                    let add = t * (v[i] * inv) * (v[j] * inv).conj();
                    h[i * n + j] += add;
                    if j < i {
                        h[j * n + i] += add.conj();
                    }
                }
            }
            for i in 0..n {
                h[i * n + i] = Complex64::new(h[i * n + i].re, 0.0);
            }
        }
    }
    let eigenvalues = hermitian_eigenvalues(&h, n)?;
    Ok(EigenSample { eigenvalues, seed, kind: String::from("fid") })
}

/// Haar unitary via Householder QR of a complex Gaussian matrix with the
/// R-diagonal phases fixed.
fn haar_unitary(n: usize, rng: &mut CounterRng) -> Vec<Complex64> {
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for v in a.iter_mut() {
        *v = Complex64::new(rng.normal(), rng.normal());
    }
    // Householder QR: store reflectors in-place, then accumulate Q.
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::with_capacity(n);
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n {
        let mut norm2 = 0.0;
        for i in k..n {
            norm2 += a[i * n + k].norm_sqr();
        }
        if norm2 == 0.0 {
            continue;
        }
        let alpha = a[k * n + k];
        let norm = norm2.sqrt();
        let phase = if alpha.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { alpha / alpha.norm() };
        let beta = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| a[i * n + k]).collect();
        v[0] -= beta;
        let vtv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vtv == 0.0 {
            continue;
        }
        let tau = 2.0 / vtv;
        // apply H = I − τ v v* to trailing columns
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in k..n {
                s += v[i - k].conj() * a[i * n + j];
            }
            s *= tau;
            for i in k..n {
                let sub = s * v[i - k];
                a[i * n + j] -= sub;
            }
        }
        // R diagonal phase at (k, k) is now `beta`-like; record it.
        let rkk = a[k * n + k];
        phases[k] = if rkk.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { rkk / rkk.norm() };
        reflectors.push((k, v, tau));
    }
    // Q = H_0 H_1 ... H_{n-1} I
    let mut q = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        q[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for &(k, ref v, tau) in reflectors.iter().rev() {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in k..n {
                s += v[i - k].conj() * q[i * n + j];
            }
            s *= tau;
            for i in k..n {
                let sub = s * v[i - k];
                q[i * n + j] -= sub;
            }
        }
    }
    // fix phases: U = Q·diag(phase(R_kk)) makes the distribution Haar
    for i in 0..n {
        for k in 0..n {
            q[i * n + k] *= phases[k];
        }
    }
    q
}

/// Eigenvalues of `diag(A) + U·diag(B)·U*` with `U` Haar: the matrix model
/// of the free convolution of the two empirical spectral distributions.
pub fn free_convolve_oracle(a: &EigenSample, b: &EigenSample, seed: u64) -> Result<EigenSample> {
    let n = a.n();
    if n != b.n() {
        return Err(Error::SizeMismatch { left: n, right: b.n() });
    }
    let mut rng = CounterRng::for_component(seed, "haar");
    let u = haar_unitary(n, &mut rng);
    // M = U·diag(b)·U*
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += u[i * n + k] * b.eigenvalues[k] * u[j * n + k].conj();
            }
            m[i * n + j] = s;
            m[j * n + i] = s.conj();
        }
        m[i * n + i] = Complex64::new(m[i * n + i].re, 0.0) + a.eigenvalues[i];
    }
    let eigenvalues = hermitian_eigenvalues(&m, n)?;
    Ok(EigenSample { eigenvalues, seed, kind: String::from("free-convolution") })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of a sample and a
/// model CDF (atoms included); samples outside the model grid are clamped.
pub fn ks_distance(sample: &EigenSample, model: &SpectralDensity) -> f64 {
    let n = sample.n();
    if n == 0 {
        return 1.0;
    }
    let mut worst = 0.0f64;
    for (i, &x) in sample.eigenvalues.iter().enumerate() {
        let f = model.cdf_at(x).clamp(0.0, 1.0);
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        worst = worst.max((f - lo).abs()).max((hi - f).abs());
    }
    worst
}
