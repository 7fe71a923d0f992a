//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Tolerances are pinned here; run with `--nocapture` to see the
//! verdict lines.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use freelevy_core::cumulants::{
    catalan, enumerate_nc, free_cumulants_to_moments, moments_to_free_cumulants,
};
use freelevy_core::decomposition::{
    kingman_decompose, levy_ito_split, truncate_small_jumps, AtomLaw, DecomposeMode, FCRMModel,
    ModelAtom,
};
use freelevy_core::integration::{integral_ct_check, integral_triplet, Integrand};
use freelevy_core::levy_basis::{
    free_poisson_basis, triplet_of_set, Cell, DensityPiece, SeedField, SetExpr,
};
use freelevy_core::rmt::{
    free_convolve_oracle, ks_distance, sample_fid_matrix, sample_gue, sample_wishart,
};
use freelevy_core::rng::CounterRng;
use freelevy_core::transforms::{
    convergence_diagnostic, density_from_triplet, eval_free_ct, marchenko_pastur_density,
    semicircle_cdf, semicircle_density, DiagnosticOptions, InversionOptions, PointMass,
    SpectralDensity,
};
use freelevy_core::triplets::{
    bp_lambda, classical_cumulants_from_triplet, free_cumulants_from_triplet, triplet_add,
    triplet_scale, Atom, BodyPiece, CumulantVector, Flavor, FreeTriplet, LevyMeasure, NearZero,
};

fn verdict(criterion: usize, name: &str, failures: &[String], detail: &str) {
    if failures.is_empty() {
        println!("[criterion {criterion}] PASS {name} — {detail}");
    } else {
        println!("[criterion {criterion}] FAIL {name} — {} issue(s)", failures.len());
        for f in failures {
            println!("    {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {criterion} failed: {failures:?}");
}

fn check_budget(failures: &mut Vec<String>, elapsed: Duration, budget: Duration, what: &str) {
    if elapsed > budget {
        failures.push(format!("{what} took {elapsed:?}, budget {budget:?}"));
    }
}

// ---------------------------------------------------------------------------
// random generators (seeded, deterministic)
// ---------------------------------------------------------------------------

fn rand_levy_measure(rng: &mut CounterRng, alpha_max: f64, c_max: f64, t_max: f64) -> LevyMeasure {
    let mut r = LevyMeasure::zero();
    let n_atoms = (rng.uniform() * 3.0) as usize;
    for _ in 0..n_atoms {
        let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
        r.atoms.push(Atom { t: sign * (0.2 + (t_max - 0.2) * rng.uniform()), mass: 0.1 + 0.6 * rng.uniform() });
    }
    if rng.uniform() < 0.5 {
        r.near_zero.push(NearZero {
            alpha: alpha_max * rng.uniform(),
            c_plus: c_max * rng.uniform(),
            c_minus: c_max * rng.uniform(),
            eps0: 0.3 + 0.7 * rng.uniform(),
            t_min: 0.0,
        });
    }
    if rng.uniform() < 0.3 {
        let lo = 1.0 + rng.uniform();
        r.body.push(BodyPiece {
            lo,
            hi: lo + 0.5 + 0.5 * rng.uniform(),
            coeffs: vec![0.1 + 0.3 * rng.uniform()],
        });
    }
    r.normal_form()
}

fn rand_triplet(rng: &mut CounterRng, flavor: Flavor, alpha_max: f64) -> FreeTriplet {
    FreeTriplet::new(
        2.0 * rng.uniform() - 1.0,
        rng.uniform(),
        rand_levy_measure(rng, alpha_max, 0.5, 2.5),
        flavor,
    )
}

fn rand_field(rng: &mut CounterRng, alpha_max: f64, c_max: f64) -> SeedField {
    let n_cells = 2 + (rng.uniform() * 3.0) as usize;
    let mut cells = Vec::new();
    let mut lo = 0.0;
    for _ in 0..n_cells {
        let hi = lo + 0.5 + 1.5 * rng.uniform();
        cells.push(Cell {
            lo,
            hi,
            theta: 2.0 * rng.uniform() - 1.0,
            sigma2: if rng.uniform() < 0.6 { rng.uniform() } else { 0.0 },
            rho: rand_levy_measure(rng, alpha_max, c_max, 2.0),
            kappa_density: 0.2 + 1.8 * rng.uniform(),
        });
        lo = hi;
    }
    let mut kappa_atoms = Vec::new();
    if rng.uniform() < 0.3 {
        kappa_atoms.push(freelevy_core::levy_basis::KappaAtom {
            x: lo * rng.uniform(),
            mass: 0.2 + 0.8 * rng.uniform(),
            theta: 2.0 * rng.uniform() - 1.0,
            sigma2: if rng.uniform() < 0.5 { rng.uniform() } else { 0.0 },
            rho: rand_levy_measure(rng, alpha_max, c_max, 2.0),
        });
    }
    SeedField { cells, kappa_atoms }
}

fn rand_step(rng: &mut CounterRng, carrier_hi: f64) -> Integrand {
    let n = 1 + (rng.uniform() * 3.0) as usize;
    let mut cuts = vec![0.0, carrier_hi];
    for _ in 0..n {
        cuts.push(carrier_hi * rng.uniform());
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut pieces = Vec::new();
    for w in cuts.windows(2) {
        if rng.uniform() < 0.75 {
            let v = 4.0 * rng.uniform() - 2.0;
            if v != 0.0 {
                pieces.push((w[0], w[1], v));
            }
        }
    }
    if pieces.is_empty() {
        pieces.push((0.0, carrier_hi, 1.0));
    }
    Integrand::step(&pieces)
}

fn lebesgue(lo: f64, hi: f64) -> Vec<DensityPiece> {
    vec![DensityPiece { lo, hi, density: 1.0 }]
}

fn semicircle_model(variance: f64) -> SpectralDensity {
    let l = 2.0 * variance.sqrt();
    let grid: Vec<f64> = (0..=4000).map(|i| -l - 0.5 + (2.0 * l + 1.0) * i as f64 / 4000.0).collect();
    let density: Vec<f64> = grid.iter().map(|&t| semicircle_density(0.0, l, t)).collect();
    let cdf: Vec<f64> = grid.iter().map(|&t| semicircle_cdf(0.0, l, t)).collect();
    SpectralDensity { grid, density, cdf, atoms: vec![], support_estimate: (-l, l), failed: vec![] }
}

fn mp_model(rate: f64) -> SpectralDensity {
    let hi = (1.0 + rate.sqrt()).powi(2) + 0.5;
    let grid: Vec<f64> = (0..=8000).map(|i| hi * (i as f64 / 8000.0).powi(2)).collect();
    let atoms = if rate < 1.0 { vec![PointMass { x: 0.0, mass: 1.0 - rate }] } else { vec![] };
    SpectralDensity::tabulate(grid, |t| marchenko_pastur_density(rate, t), atoms)
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_moment_cumulant_round_trip() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = CounterRng::for_component(20260801, "acceptance-c1");
    let mut worst = 0.0f64;
    for case in 0..100 {
        let order = 1 + (rng.uniform() * 12.0) as usize;
        let order = order.min(12);
        let values: Vec<f64> = (0..order).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let k = CumulantVector::new(values);
        let m = free_cumulants_to_moments(&k).unwrap();
        let back = moments_to_free_cumulants(&m).unwrap();
        for (j, (x, y)) in back.values.iter().zip(k.values.iter()).enumerate() {
            let err = (x - y).abs();
            worst = worst.max(err);
            if err > 1e-9 {
                failures.push(format!("case {case} order {} error {err:e}", j + 1));
            }
        }
    }
    for p in 1..=12 {
        let count = enumerate_nc(p).unwrap().len() as u64;
        if count != catalan(p) {
            failures.push(format!("|NC({p})| = {count}, Catalan = {}", catalan(p)));
        }
    }
    let elapsed = start.elapsed();
    check_budget(&mut failures, elapsed, Duration::from_secs(5), "criterion 1");
    verdict(1, "moment/cumulant round-trip", &failures, &format!("max abs error {worst:.2e}, NC counts exact, {elapsed:?}"));
}

#[test]
fn criterion_2_closed_form_density_recovery() {
    let mut failures = Vec::new();
    let opts = InversionOptions::default();

    let start = Instant::now();
    let grid: Vec<f64> = (0..=380).map(|i| -1.9 + 3.8 * i as f64 / 380.0).collect();
    let d = density_from_triplet(&FreeTriplet::semicircular_std(), &grid, &opts).unwrap();
    let mut sup_sc = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        sup_sc = sup_sc.max((d.density[i] - semicircle_density(0.0, 2.0, x)).abs());
    }
    let t_sc = start.elapsed();
    if sup_sc > 2e-3 {
        failures.push(format!("semicircle sup error {sup_sc:e} > 2e-3"));
    }
    check_budget(&mut failures, t_sc, Duration::from_secs(30), "semicircle recovery");

    let start = Instant::now();
    let grid: Vec<f64> = (0..=380).map(|i| 0.1 + 3.8 * i as f64 / 380.0).collect();
    let d = density_from_triplet(&FreeTriplet::free_poisson(1.0), &grid, &opts).unwrap();
    let mut sup_mp = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        sup_mp = sup_mp.max((d.density[i] - marchenko_pastur_density(1.0, x)).abs());
    }
    let t_mp = start.elapsed();
    if sup_mp > 5e-3 {
        failures.push(format!("mp sup error {sup_mp:e} > 5e-3"));
    }
    check_budget(&mut failures, t_mp, Duration::from_secs(30), "mp recovery");

    verdict(2, "closed-form density recovery", &failures, &format!("semicircle sup {sup_sc:.2e} ({t_sc:?}), mp sup {sup_mp:.2e} ({t_mp:?})"));
}

#[test]
fn criterion_3_linearization() {
    let mut failures = Vec::new();
    let mut rng = CounterRng::for_component(20260801, "acceptance-c3");
    let z_grid: Vec<Complex64> = (0..20)
        .map(|k| {
            let y = -10.0 + k as f64 * (10.0 - 0.1) / 19.0;
            Complex64::new(0.3 * ((k % 5) as f64 - 2.0), y)
        })
        .collect();
    let mut worst = 0.0f64;
    for case in 0..50 {
        let u = rand_triplet(&mut rng, Flavor::Free, 1.2);
        let v = rand_triplet(&mut rng, Flavor::Free, 1.2);
        let sum = triplet_add(&u, &v).unwrap();
        for &z in &z_grid {
            let lhs = eval_free_ct(&sum, z).unwrap();
            let rhs = eval_free_ct(&u, z).unwrap() + eval_free_ct(&v, z).unwrap();
            let rel = (lhs - rhs).norm() / lhs.norm().max(1.0);
            worst = worst.max(rel);
            if rel > 1e-10 {
                failures.push(format!("case {case} at z={z}: rel err {rel:e}"));
            }
        }
    }
    verdict(3, "cumulant transform linearizes convolution", &failures, &format!("50 pairs x 20 points, worst rel err {worst:.2e}"));
}

#[test]
fn criterion_4_bercovici_pata_consistency() {
    let mut failures = Vec::new();
    let mut rng = CounterRng::for_component(20260801, "acceptance-c4");
    let mut worst = 0.0f64;
    for case in 0..20 {
        let mu = rand_triplet(&mut rng, Flavor::Classical, 1.2);
        let nu = bp_lambda(&mu).unwrap();
        let classical = classical_cumulants_from_triplet(&mu, 8).unwrap();
        let free = free_cumulants_from_triplet(&nu, 8).unwrap();
        for j in 0..8 {
            let err = (classical.values[j] - free.values[j]).abs();
            worst = worst.max(err);
            if err > 1e-9 {
                failures.push(format!("case {case} order {}: {err:e}", j + 1));
            }
        }
    }

    // Gaussian -> semicircle at criterion-2 tolerance
    let gauss = FreeTriplet::classical(0.0, 1.0, LevyMeasure::zero());
    let semi = bp_lambda(&gauss).unwrap();
    let grid: Vec<f64> = (0..=190).map(|i| -1.9 + 3.8 * i as f64 / 190.0).collect();
    let d = density_from_triplet(&semi, &grid, &InversionOptions::default()).unwrap();
    let mut sup_sc = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        sup_sc = sup_sc.max((d.density[i] - semicircle_density(0.0, 2.0, x)).abs());
    }
    if sup_sc > 2e-3 {
        failures.push(format!("Λ(Gaussian) density error {sup_sc:e} > 2e-3"));
    }

    // Poisson -> mp₁ at criterion-2 tolerance
    let poisson = FreeTriplet::classical(1.0, 0.0, LevyMeasure::dirac(1.0, 1.0));
    let mp = bp_lambda(&poisson).unwrap();
    let grid: Vec<f64> = (0..=190).map(|i| 0.1 + 3.8 * i as f64 / 190.0).collect();
    let d = density_from_triplet(&mp, &grid, &InversionOptions::default()).unwrap();
    let mut sup_mp = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        sup_mp = sup_mp.max((d.density[i] - marchenko_pastur_density(1.0, x)).abs());
    }
    if sup_mp > 5e-3 {
        failures.push(format!("Λ(Poisson) density error {sup_mp:e} > 5e-3"));
    }

    verdict(4, "Bercovici–Pata consistency", &failures, &format!("cumulant gap {worst:.2e}, Λ(Gauss) sup {sup_sc:.2e}, Λ(Poisson) sup {sup_mp:.2e}"));
}

#[test]
fn criterion_5_integration_theory() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = CounterRng::for_component(20260801, "acceptance-c5");
    let z_grid: Vec<Complex64> =
        (0..10).map(|k| Complex64::new(0.0, -10.0 + k as f64 * (10.0 - 0.1) / 9.0)).collect();
    let mut worst_drift = 0.0f64;
    let mut worst_ct = 0.0f64;
    for case in 0..50 {
        let field = rand_field(&mut rng, 1.2, 0.5);
        let hi = field.carrier().intervals.last().unwrap().1;
        let f = rand_step(&mut rng, hi);
        let direct = integral_triplet(&field, &f).unwrap();
        // scaled-sum oracle: Σ_k D_{α_k} M(A_k) as triplets
        let mut oracle = FreeTriplet::free(0.0, 0.0, LevyMeasure::zero());
        for (lo, hi, coeffs) in &f.pieces {
            let alpha = coeffs[0];
            let part = triplet_of_set(&field, &SetExpr::interval(*lo, *hi)).unwrap();
            oracle = triplet_add(&oracle, &triplet_scale(alpha, &part).unwrap()).unwrap();
        }
        let drift_err = (direct.a - oracle.a).abs() / (1.0 + oracle.a.abs());
        let second_err = (direct.b - oracle.b).abs() / (1.0 + oracle.b.abs());
        worst_drift = worst_drift.max(drift_err).max(second_err);
        if drift_err > 1e-10 || second_err > 1e-12 {
            failures.push(format!("case {case}: drift err {drift_err:e}, second err {second_err:e}"));
        }
        if !direct.r.close_to(&oracle.r, 1e-7) {
            failures.push(format!("case {case}: Lévy parts differ beyond 1e-7"));
        }
        let ct = integral_ct_check(&field, &f, &z_grid).unwrap();
        worst_ct = worst_ct.max(ct);
        if ct > 1e-6 {
            failures.push(format!("case {case}: ct check {ct:e} > 1e-6"));
        }
    }
    let elapsed = start.elapsed();
    check_budget(&mut failures, elapsed, Duration::from_secs(60), "criterion 5");
    verdict(5, "integration against the basis", &failures, &format!("50 step integrals, worst drift/second rel {worst_drift:.2e}, worst ct {worst_ct:.2e}, {elapsed:?}"));
}

#[test]
fn criterion_6_levy_ito() {
    let mut failures = Vec::new();
    let mut rng = CounterRng::for_component(20260801, "acceptance-c6");
    for case in 0..50 {
        let field = rand_field(&mut rng, 0.5, 0.25);
        let parts = levy_ito_split(&field).unwrap();
        // typed parts
        if parts.gaussian.cells.iter().any(|c| !c.rho.is_zero() || c.theta != 0.0)
            || parts.jumps.cells.iter().any(|c| c.sigma2 != 0.0 || c.theta != 0.0)
        {
            failures.push(format!("case {case}: parts are not type-pure"));
        }
        // reassembly on random sets
        let hi = field.carrier().intervals.last().unwrap().1;
        for _ in 0..3 {
            let a = hi * rng.uniform();
            let b = hi * rng.uniform();
            let set = SetExpr::interval(a.min(b), a.max(b).max(a.min(b) + 1e-6));
            let original = triplet_of_set(&field, &set).unwrap();
            let back = parts.recombine(&set).unwrap();
            if (back.a - original.a).abs() > 1e-12 * (1.0 + original.a.abs())
                || (back.b - original.b).abs() > 1e-12 * (1.0 + original.b.abs())
            {
                failures.push(format!("case {case}: drift/second reassembly off"));
            }
            if !back.r.close_to(&original.r, 1e-8) {
                failures.push(format!("case {case}: Lévy reassembly beyond 1e-8"));
            }
        }
        // truncation converges to the jump part in the diagnostics
        let e = field.carrier();
        let target = triplet_of_set(&parts.jumps, &e).unwrap();
        let seq: Vec<FreeTriplet> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let t = truncate_small_jumps(&field, eps).unwrap();
                triplet_of_set(&t, &e).unwrap()
            })
            .collect();
        let opts = DiagnosticOptions::default(); // tolerances 1e-3
        let rep = convergence_diagnostic(&seq, &target, &opts).unwrap();
        if !rep.pass {
            failures.push(format!(
                "case {case}: truncation diagnostic failed (drift {:.1e} levy {:.1e} bracket {:.1e} ct {:.1e})",
                rep.drift_gaps[2], rep.levy_gaps[2], rep.bracket_gaps[2], rep.ct_gaps[2]
            ));
        }
    }

    // compensated drift of the free Poisson basis is exactly zero
    let p = free_poisson_basis(&lebesgue(0.0, 3.0)).unwrap();
    let parts = levy_ito_split(&p).unwrap();
    match parts.compensated_drift {
        Some(comp) => {
            let val = comp.eval(&SetExpr::interval(0.0, 3.0));
            if val != 0.0 {
                failures.push(format!("compensated drift of P_η is {val}, want exact 0"));
            }
        }
        None => failures.push("compensated drift of P_η not reported".into()),
    }

    verdict(6, "Lévy–Itô decomposition", &failures, "50 fields reassembled; truncation diagnostics at ε=1e-4 within 1e-3; P_η compensates to 0");
}

#[test]
fn criterion_7_kingman_decomposition() {
    let mut failures = Vec::new();
    let mut rng = CounterRng::for_component(20260801, "acceptance-c7");
    for case in 0..20 {
        // positive diffuse part: compensated subordinator seeds over cells
        let n_cells = 2 + (rng.uniform() * 2.0) as usize;
        let mut cells = Vec::new();
        let mut lo = 0.0;
        for _ in 0..n_cells {
            let hi = lo + 0.5 + rng.uniform();
            let mut r = LevyMeasure::dirac(0.3 + 1.2 * rng.uniform(), 0.2 + 0.6 * rng.uniform());
            if rng.uniform() < 0.4 {
                r.near_zero.push(NearZero {
                    alpha: 0.7 * rng.uniform(),
                    c_plus: 0.4 * rng.uniform(),
                    c_minus: 0.0,
                    eps0: 0.5,
                    t_min: 0.0,
                });
                r = r.normal_form();
            }
            let compensator =
                freelevy_core::triplets::levy_quadrature(&r, freelevy_core::triplets::LevyIntegrand::Sigma)
                    .unwrap();
            cells.push(Cell {
                lo,
                hi,
                theta: compensator + 0.3 * rng.uniform(),
                sigma2: 0.0,
                rho: r,
                kappa_density: 0.3 + 1.2 * rng.uniform(),
            });
            lo = hi;
        }
        let diffuse = SeedField { cells, kappa_atoms: vec![] };
        let n_atoms = 1 + (rng.uniform() * 2.0) as usize;
        let mut atoms = Vec::new();
        for j in 0..n_atoms {
            let law = if rng.uniform() < 0.5 {
                AtomLaw::Triplet(FreeTriplet::free_poisson(0.5 + rng.uniform()))
            } else {
                AtomLaw::Triplet(FreeTriplet::dirac(rng.uniform(), Flavor::Free))
            };
            atoms.push(ModelAtom { x: lo * (j as f64 + 0.5) / (n_atoms as f64), law, positive: true });
        }
        let model = FCRMModel { diffuse, atoms };
        let dec = match kingman_decompose(&model, DecomposeMode::Positive) {
            Ok(dec) => dec,
            Err(e) => {
                failures.push(format!("case {case}: decomposition failed: {e}"));
                continue;
            }
        };
        // μ₁ and μ₂ reproduced exactly from the parts
        let e = SetExpr::interval(0.0, lo);
        let diffuse_only = FCRMModel { diffuse: dec.diffuse.clone(), atoms: vec![] };
        let mu1_model = freelevy_core::decomposition::first_cumulant_measure(&model, &e).unwrap();
        let mu1_parts: f64 = dec
            .atoms
            .iter()
            .filter(|a| e.contains(a.x))
            .map(|a| a.mu_mass)
            .sum::<f64>()
            + freelevy_core::decomposition::first_cumulant_measure(&diffuse_only, &e).unwrap();
        if (mu1_model - mu1_parts).abs() > 1e-12 * (1.0 + mu1_model.abs()) {
            failures.push(format!("case {case}: μ₁ {mu1_model} vs parts {mu1_parts}"));
        }
        let mu2_model = freelevy_core::decomposition::second_cumulant_measure(&model, &e).unwrap();
        let mu2_parts: f64 = model
            .atoms
            .iter()
            .filter(|a| e.contains(a.x))
            .map(|a| match &a.law {
                AtomLaw::Triplet(t) => free_cumulants_from_triplet(t, 2).unwrap().values[1],
                AtomLaw::Moments(m) => m.values[1] - m.values[0] * m.values[0],
            })
            .sum::<f64>()
            + freelevy_core::decomposition::second_cumulant_measure(&diffuse_only, &e).unwrap();
        if (mu2_model - mu2_parts).abs() > 1e-12 * (1.0 + mu2_model.abs()) {
            failures.push(format!("case {case}: μ₂ {mu2_model} vs parts {mu2_parts}"));
        }
        // null-array bound decays like 1/n within factor 1.5
        let b = &dec.null_array.max_bounds;
        let ns = &dec.null_array.split_counts;
        if b[0] > 0.0 {
            for i in 1..b.len() {
                let expected = b[0] * ns[0] as f64 / ns[i] as f64;
                if b[i] > 1.5 * expected || b[i] < expected / 1.5 {
                    failures.push(format!("case {case}: bound at n={} is {} vs 1/n law {expected}", ns[i], b[i]));
                }
            }
        }
    }
    verdict(7, "Kingman decomposition", &failures, "20 positive models: μ₁/μ₂ exact, null-array decay 1/n within 1.5");
}

#[test]
fn criterion_8_rmt_oracle() {
    let start = Instant::now();
    let mut failures = Vec::new();

    let gue = sample_gue(1024, 1.0, 20260801).unwrap();
    let ks_gue = ks_distance(&gue, &semicircle_model(1.0));
    if ks_gue >= 0.05 {
        failures.push(format!("GUE(1024) KS {ks_gue} >= 0.05"));
    }

    let wis = sample_wishart(1024, 1.0, 20260802).unwrap();
    let ks_wis = ks_distance(&wis, &mp_model(1.0));
    if ks_wis >= 0.05 {
        failures.push(format!("Wishart(1024, λ=1) KS {ks_wis} >= 0.05"));
    }

    let fid = sample_fid_matrix(&FreeTriplet::free_poisson(1.0), 512, 1e-4, 20260803).unwrap();
    let ks_fid = ks_distance(&fid, &mp_model(1.0));
    if ks_fid >= 0.09 {
        failures.push(format!("compound model KS {ks_fid} >= 0.09"));
    }

    let a = sample_gue(512, 1.0, 20260804).unwrap();
    let b = sample_gue(512, 1.0, 20260805).unwrap();
    let conv = free_convolve_oracle(&a, &b, 20260806).unwrap();
    let ks_conv = ks_distance(&conv, &semicircle_model(2.0));
    if ks_conv >= 0.08 {
        failures.push(format!("free convolution KS {ks_conv} >= 0.08"));
    }

    // empirical moments of the compound model against cumulant predictions
    let mut rng = CounterRng::for_component(20260801, "acceptance-c8");
    let n = 512;
    let tol = 5.0 / (n as f64).sqrt();
    let mut worst_moment = 0.0f64;
    for case in 0..5 {
        let u = FreeTriplet::free(
            0.5 * (2.0 * rng.uniform() - 1.0),
            0.5 * rng.uniform(),
            {
                let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                LevyMeasure::dirac(sign * (0.4 + 0.5 * rng.uniform()), 0.2 + 0.5 * rng.uniform())
            },
        );
        let s = sample_fid_matrix(&u, n, 1e-4, 3000 + case).unwrap();
        let k = free_cumulants_from_triplet(&u, 4).unwrap();
        let m = free_cumulants_to_moments(&k).unwrap();
        for p in 1..=4usize {
            let err = (s.moment(p as u32) - m.values[p - 1]).abs();
            worst_moment = worst_moment.max(err);
            if err > tol {
                failures.push(format!("case {case} moment {p}: error {err} > {tol}"));
            }
        }
    }

    let elapsed = start.elapsed();
    check_budget(&mut failures, elapsed, Duration::from_secs(180), "criterion 8");
    verdict(8, "random-matrix oracle vs analytics", &failures, &format!("KS gue {ks_gue:.3}, wishart {ks_wis:.3}, fid {ks_fid:.3}, conv {ks_conv:.3}; worst moment err {worst_moment:.3} (tol {tol:.3}); {elapsed:?}"));
}

#[test]
fn criterion_9_determinism() {
    use std::process::Command;
    let mut failures = Vec::new();
    let dir = std::env::temp_dir().join("freelevy-acceptance-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let bin = env!("CARGO_BIN_EXE_freelevy");

    // seeded simulate pipelines, each run twice
    let ensembles = [
        r#"{"schema":1,"kind":"fid","triplet":{"a":1.0,"b":0.2,"r":{"atoms":[{"t":1.0,"mass":0.5}]},"flavor":"free"},"eps":1e-4,"n":96,"seed":424242}"#,
        r#"{"schema":1,"kind":"wishart","lambda":0.5,"n":96,"seed":424242}"#,
        r#"{"schema":1,"kind":"gue","variance":2.0,"n":96,"seed":424242}"#,
    ];
    for (which, ens) in ensembles.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let csv = dir.join(format!("eig{which}_{run}.csv"));
            let status = Command::new(bin)
                .args(["simulate", ens, "--out", csv.to_str().unwrap()])
                .status()
                .unwrap();
            assert!(status.success());
            let bytes = std::fs::read(&csv).unwrap();
            let sidecar = std::fs::read(dir.join(format!("eig{which}_{run}.json"))).unwrap();
            outputs.push((bytes, sidecar));
        }
        if outputs[0] != outputs[1] {
            failures.push(format!("simulate outputs differ between runs (ensemble {which})"));
        }
    }

    // density with different thread caps must be byte-identical
    let triplet = r#"{"schema":1,"a":1.0,"b":0.0,"r":{"atoms":[{"t":1.0,"mass":1.0}]},"flavor":"free"}"#;
    let mut density_outputs = Vec::new();
    for (run, threads) in ["1", "3"].iter().enumerate() {
        let csv = dir.join(format!("dens{run}.csv"));
        let status = Command::new(bin)
            .env("FREELEVY_THREADS", threads)
            .args(["density", triplet, "--grid", "-1:5:301", "--out", csv.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        density_outputs.push((
            std::fs::read(&csv).unwrap(),
            std::fs::read(dir.join(format!("dens{run}.json"))).unwrap(),
        ));
    }
    if density_outputs[0] != density_outputs[1] {
        failures.push("density outputs differ across thread counts".into());
    }

    verdict(9, "byte-identical seeded pipelines", &failures, "simulate twice and density under FREELEVY_THREADS=1 vs 3 agree");
}
