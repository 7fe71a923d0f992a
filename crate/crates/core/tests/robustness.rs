//! Multi-seed robustness sweeps: the acceptance-style identities must hold
//! for arbitrary draws from the generator classes, not just pinned seeds.
use freelevy_core::integration::{integral_ct_check, integral_triplet, Integrand};
use freelevy_core::levy_basis::{triplet_of_set, Cell, SeedField, SetExpr};
use freelevy_core::rng::CounterRng;
use freelevy_core::triplets::*;
use num_complex::Complex64;

fn rand_field(rng: &mut CounterRng) -> SeedField {
    let n_cells = 2 + (rng.uniform() * 3.0) as usize;
    let mut cells = Vec::new();
    let mut lo = 0.0;
    for _ in 0..n_cells {
        let hi = lo + 0.5 + 1.5 * rng.uniform();
        let mut rho = LevyMeasure::zero();
        for _ in 0..(rng.uniform() * 2.5) as usize {
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            rho.atoms.push(Atom { t: sign * (0.2 + 1.8 * rng.uniform()), mass: 0.1 + 0.6 * rng.uniform() });
        }
        if rng.uniform() < 0.6 {
            rho.near_zero.push(NearZero {
                alpha: 1.4 * rng.uniform(),
                c_plus: 0.5 * rng.uniform(),
                c_minus: 0.5 * rng.uniform(),
                eps0: 0.2 + 0.8 * rng.uniform(),
                t_min: 0.0,
            });
        }
        cells.push(Cell {
            lo, hi,
            theta: 2.0 * rng.uniform() - 1.0,
            sigma2: rng.uniform(),
            rho: rho.normal_form(),
            kappa_density: 0.2 + 1.8 * rng.uniform(),
        });
        lo = hi;
    }
    SeedField { cells, kappa_atoms: vec![] }
}

#[test]
fn stress_integration_identity_many_seeds() {
    let z_grid: Vec<Complex64> = (0..6).map(|k| Complex64::new(0.0, -10.0 + 1.7 * k as f64)).collect();
    let mut worst_ct = 0.0f64;
    let mut worst_levy_fail = 0usize;
    for seed in 0..20u64 {
        let mut rng = CounterRng::for_component(seed, "stress-c5");
        let field = rand_field(&mut rng);
        let hi = field.carrier().intervals.last().unwrap().1;
        // random step with possible zero regions
        let mut pieces = Vec::new();
        let mut lo = 0.0;
        while lo < hi {
            let next = (lo + 0.3 + rng.uniform()).min(hi);
            let v = 4.0 * rng.uniform() - 2.0;
            if rng.uniform() < 0.8 && v != 0.0 { pieces.push((lo, next, v)); }
            lo = next;
        }
        if pieces.is_empty() { pieces.push((0.0, hi, 1.0)); }
        let f = Integrand::step(&pieces);
        let direct = integral_triplet(&field, &f).unwrap();
        let mut oracle = FreeTriplet::free(0.0, 0.0, LevyMeasure::zero());
        for &(lo, hi, alpha) in &pieces {
            let part = triplet_of_set(&field, &SetExpr::interval(lo, hi)).unwrap();
            oracle = triplet_add(&oracle, &triplet_scale(alpha, &part).unwrap()).unwrap();
        }
        assert!((direct.a - oracle.a).abs() <= 1e-9 * (1.0 + oracle.a.abs()), "seed {seed} drift");
        assert!((direct.b - oracle.b).abs() <= 1e-11 * (1.0 + oracle.b.abs()), "seed {seed} second");
        if !direct.r.close_to(&oracle.r, 1e-7) { worst_levy_fail += 1; }
        let ct = integral_ct_check(&field, &f, &z_grid).unwrap();
        worst_ct = worst_ct.max(ct);
    }
    println!("worst ct {worst_ct:e}, levy mismatches {worst_levy_fail}");
    assert_eq!(worst_levy_fail, 0);
    assert!(worst_ct < 1e-6);
}

#[test]
fn stress_levy_ito_many_seeds() {
    use freelevy_core::decomposition::{levy_ito_split, truncate_small_jumps};
    use freelevy_core::transforms::{convergence_diagnostic, DiagnosticOptions};
    for seed in 100..130u64 {
        let mut rng = CounterRng::for_component(seed, "stress-c6");
        let mut field = rand_field(&mut rng);
        // the provable class for the 1e-3 diagnostic at eps = 1e-4
        for c in &mut field.cells {
            for nz in &mut c.rho.near_zero {
                nz.alpha = nz.alpha.min(0.5);
                nz.c_plus = nz.c_plus.min(0.25);
                nz.c_minus = nz.c_minus.min(0.25);
            }
        }
        let parts = levy_ito_split(&field).unwrap();
        let e = field.carrier();
        let original = triplet_of_set(&field, &e).unwrap();
        let back = parts.recombine(&e).unwrap();
        assert!((back.a - original.a).abs() <= 1e-10 * (1.0 + original.a.abs()), "seed {seed}");
        assert!(back.r.close_to(&original.r, 1e-8), "seed {seed}");
        let target = triplet_of_set(&parts.jumps, &e).unwrap();
        let seq: Vec<FreeTriplet> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| triplet_of_set(&truncate_small_jumps(&field, eps).unwrap(), &e).unwrap())
            .collect();
        let rep = convergence_diagnostic(&seq, &target, &DiagnosticOptions::default()).unwrap();
        assert!(rep.pass, "seed {seed}: bracket {:?}", rep.bracket_gaps);
    }
}

#[test]
fn stress_kingman_many_seeds() {
    use freelevy_core::decomposition::*;
    for seed in 200..220u64 {
        let mut rng = CounterRng::for_component(seed, "stress-c7");
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
            let comp = levy_quadrature(&r, LevyIntegrand::Sigma).unwrap();
            cells.push(Cell { lo, hi, theta: comp + 0.3 * rng.uniform(), sigma2: 0.0, rho: r, kappa_density: 0.3 + 1.2 * rng.uniform() });
            lo = hi;
        }
        let diffuse = SeedField { cells, kappa_atoms: vec![] };
        let atoms = vec![ModelAtom {
            x: lo * 0.3,
            law: AtomLaw::Triplet(FreeTriplet::free_poisson(0.5 + rng.uniform())),
            positive: true,
        }];
        let model = FCRMModel { diffuse, atoms };
        let dec = kingman_decompose(&model, DecomposeMode::Positive).unwrap();
        let b = &dec.null_array.max_bounds;
        let ns = &dec.null_array.split_counts;
        for i in 1..b.len() {
            let expected = b[0] * ns[0] as f64 / ns[i] as f64;
            assert!(b[i] <= 1.5 * expected && b[i] >= expected / 1.5, "seed {seed}: {b:?}");
        }
    }
}
