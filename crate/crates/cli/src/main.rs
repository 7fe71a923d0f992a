//! Command-line front end: parse triplet/field/model documents, dispatch to
//! the library, emit CSV and versioned JSON.

// Validation uses `!(x > 0.0)` so NaN fails the check as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod io;
mod setparse;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use freelevy_core::cumulants::{
    classical_cumulants_to_moments, free_cumulants_to_moments, moments_to_free_cumulants, MomentVector,
};
use freelevy_core::decomposition::{
    kingman_decompose, levy_ito_split, truncate_small_jumps, DecomposeMode, FCRMModel,
};
use freelevy_core::integration::{integral_ct_check, integral_triplet, Integrand};
use freelevy_core::levy_basis::{triplet_of_set, SeedField};
use freelevy_core::rmt::{ks_distance, Ensemble, EnsembleKind};
use freelevy_core::transforms::{
    convergence_diagnostic, density_from_triplet, marchenko_pastur_density, semicircle_cdf,
    semicircle_density, ConvergenceReport, DiagnosticOptions, InversionOptions, PointMass,
    SpectralDensity,
};
use freelevy_core::triplets::{
    bp_lambda, bp_lambda_inv, triplet_add, CumulantVector, Flavor, FreeTriplet,
};

use io::{Doc, Failure};

#[derive(Parser)]
#[command(name = "freelevy", version, about = "Triplet calculus for free Lévy bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the spectral density of a free triplet by Stieltjes inversion
    Density {
        /// Triplet document (path, inline JSON, or `-` for stdin)
        triplet: String,
        /// Evaluation grid lo:hi:n
        #[arg(long, default_value = "-5:5:601", allow_hyphen_values = true)]
        grid: String,
        /// Decreasing ladder of imaginary offsets
        #[arg(long, default_value = "1e-3,1e-4,1e-5")]
        eps: String,
        /// CSV output path; a JSON sidecar with atoms and support goes next to it
        #[arg(long)]
        out: String,
    },
    /// Free convolution of two triplets (componentwise triplet sum)
    Convolve {
        left: String,
        right: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Convert between moment and cumulant vectors (CSV in, CSV out)
    Cumulants {
        /// CSV input with a `value` header (path or `-`)
        input: String,
        #[arg(long, value_enum)]
        mode: CumulantMode,
        #[arg(long)]
        out: Option<String>,
    },
    /// Bercovici–Pata map: toggle the flavor of a triplet
    Bp {
        triplet: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Marginal triplet of a set under a seed field
    BasisTriplet {
        field: String,
        /// Set expression like "[0,1)∪[2,3)"
        #[arg(long)]
        set: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Triplet of the integral of a piecewise-polynomial function against a basis
    Integrate {
        field: String,
        integrand: String,
        #[arg(long)]
        out: Option<String>,
        /// Compare the triplet transform against the direct kernel quadrature
        #[arg(long)]
        check: bool,
        /// Also emit the spectral density of the integral law (CSV path)
        #[arg(long)]
        density_out: Option<String>,
        #[arg(long, default_value = "-5:5:601", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value = "1e-3,1e-4,1e-5")]
        eps: String,
    },
    /// Lévy–Itô split of a field into drift, semicircular and jump parts
    LevyIto {
        field: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Kingman decomposition of a free completely random measure model
    Decompose {
        model: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<String>,
    },
    /// Remove jumps of magnitude at most eps from a field
    Truncate {
        field: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sample a random-matrix ensemble and report the KS fit
    Simulate {
        ensemble: String,
        /// Override the seed stored in the ensemble document
        #[arg(long)]
        seed: Option<u64>,
        /// Eigenvalue CSV path; the KS report goes to a JSON sidecar
        #[arg(long)]
        out: String,
    },
    /// Triplet-level weak-convergence diagnostics for a sequence
    CheckConvergence {
        /// Document with `sequence` and `target` triplets
        input: String,
        /// Tolerance applied to all four conditions
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CumulantMode {
    /// moments -> free cumulants
    M2k,
    /// free cumulants -> moments
    K2m,
    /// classical cumulants -> moments
    K2mClassical,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Positive,
    Signed,
}

#[derive(Serialize, Deserialize)]
struct ConvergenceInput {
    sequence: Vec<FreeTriplet>,
    target: FreeTriplet,
}

#[derive(Serialize)]
struct DensitySidecar {
    schema: u32,
    atoms: Vec<PointMass>,
    support: (f64, f64),
    failed: Vec<usize>,
}

#[derive(Serialize)]
struct IntegrateOut {
    schema: u32,
    #[serde(flatten)]
    triplet: FreeTriplet,
    #[serde(skip_serializing_if = "Option::is_none")]
    ct_check: Option<f64>,
}

#[derive(Serialize)]
struct KsReportDoc {
    schema: u32,
    kind: String,
    n: usize,
    seed: u64,
    ks: f64,
    against: String,
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => {}
        Err(f) => {
            f.report();
            std::process::exit(f.code);
        }
    }
}

fn load_triplet(arg: &str) -> Result<FreeTriplet, Failure> {
    let doc: Doc<FreeTriplet> = io::parse_doc(&io::read_input(arg)?, "triplet")?;
    doc.check_schema("triplet")?;
    doc.payload.validate()?;
    Ok(doc.payload)
}

fn load_field(arg: &str) -> Result<SeedField, Failure> {
    let doc: Doc<SeedField> = io::parse_doc(&io::read_input(arg)?, "field")?;
    doc.check_schema("field")?;
    doc.payload.validate()?;
    Ok(doc.payload)
}

fn sidecar_path(out: &str) -> String {
    match out.rsplit_once('.') {
        Some((stem, _)) => format!("{stem}.json"),
        None => format!("{out}.json"),
    }
}

/// Evaluate the spectral density in parallel over grid chunks; the worker
/// count honours FREELEVY_THREADS and never changes the result.
fn density_parallel(
    u: &FreeTriplet,
    grid: &[f64],
    opts: &InversionOptions,
) -> Result<SpectralDensity, Failure> {
    let workers = io::worker_count().clamp(1, grid.len().max(1));
    if workers <= 1 || grid.len() < 32 {
        return density_from_triplet(u, grid, opts).map_err(Failure::from);
    }
    let chunk = grid.len().div_ceil(workers);
    let chunks: Vec<&[f64]> = grid.chunks(chunk).collect();
    let results: Vec<Result<SpectralDensity, freelevy_core::Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|part| scope.spawn(move || density_from_triplet(u, part, opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("density worker panicked")).collect()
    });
    let mut density = Vec::with_capacity(grid.len());
    let mut atoms = Vec::new();
    let mut failed = Vec::new();
    let mut offset = 0usize;
    for (part, res) in chunks.iter().zip(results) {
        let d = res.map_err(Failure::from)?;
        density.extend_from_slice(&d.density);
        atoms.extend_from_slice(&d.atoms);
        failed.extend(d.failed.iter().map(|i| i + offset));
        offset += part.len();
    }
    Ok(SpectralDensity::from_samples(grid.to_vec(), density, atoms, failed))
}

fn write_density_csv(out: &str, d: &SpectralDensity) -> Result<(), Failure> {
    let rows: Vec<Vec<f64>> = d
        .grid
        .iter()
        .zip(d.density.iter())
        .zip(d.cdf.iter())
        .map(|((&x, &f), &c)| vec![x, f, c])
        .collect();
    io::write_output(Some(out), &io::csv_table(&["x", "density", "cdf"], &rows))?;
    let sidecar = DensitySidecar {
        schema: io::SCHEMA_VERSION,
        atoms: d.atoms.clone(),
        support: d.support_estimate,
        failed: d.failed.clone(),
    };
    io::write_output(Some(&sidecar_path(out)), &io::to_json(&sidecar)?)
}

fn read_value_csv(arg: &str) -> Result<Vec<f64>, Failure> {
    let raw = io::read_input(arg)?;
    let mut values = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 && line.parse::<f64>().is_err() {
            // header row
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|e| Failure::validation("csv", format!("line {}: {e}", i + 1)))?,
        );
    }
    if values.is_empty() {
        return Err(Failure::validation("csv", "no values in input"));
    }
    Ok(values)
}

fn model_density(ensemble: &Ensemble, eigenvalues: &[f64]) -> Result<(SpectralDensity, String), Failure> {
    match &ensemble.kind {
        EnsembleKind::Gue { variance } => {
            let l = 2.0 * variance.max(1e-12).sqrt();
            let grid: Vec<f64> =
                (0..=2000).map(|i| -l - 0.5 + (2.0 * l + 1.0) * i as f64 / 2000.0).collect();
            let density: Vec<f64> = grid.iter().map(|&t| semicircle_density(0.0, l, t)).collect();
            let cdf: Vec<f64> = grid.iter().map(|&t| semicircle_cdf(0.0, l, t)).collect();
            Ok((
                SpectralDensity {
                    grid,
                    density,
                    cdf,
                    atoms: vec![],
                    support_estimate: (-l, l),
                    failed: vec![],
                },
                format!("semicircle(variance={variance})"),
            ))
        }
        EnsembleKind::Wishart { lambda } => {
            let hi = (1.0 + lambda.sqrt()).powi(2) + 0.5;
            let grid: Vec<f64> = (0..=4000).map(|i| hi * (i as f64 / 4000.0).powi(2)).collect();
            let atoms =
                if *lambda < 1.0 { vec![PointMass { x: 0.0, mass: 1.0 - lambda }] } else { vec![] };
            Ok((
                SpectralDensity::tabulate(grid, |t| marchenko_pastur_density(*lambda, t), atoms),
                format!("marchenko-pastur(rate={lambda})"),
            ))
        }
        EnsembleKind::Fid { triplet, .. } => {
            let lo = eigenvalues.first().copied().unwrap_or(-1.0) - 0.5;
            let hi = eigenvalues.last().copied().unwrap_or(1.0) + 0.5;
            let grid: Vec<f64> = (0..=800).map(|i| lo + (hi - lo) * i as f64 / 800.0).collect();
            let d = density_parallel(triplet, &grid, &InversionOptions::default())?;
            Ok((d, String::from("triplet-density")))
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Density { triplet, grid, eps, out } => {
            let u = load_triplet(&triplet)?;
            let grid = io::parse_grid(&grid)?;
            let opts = InversionOptions { eps_ladder: io::parse_ladder(&eps)?, ..Default::default() };
            let d = density_parallel(&u, &grid, &opts)?;
            write_density_csv(&out, &d)
        }
        Command::Convolve { left, right, out } => {
            let u = load_triplet(&left)?;
            let v = load_triplet(&right)?;
            let sum = triplet_add(&u, &v)?.normal_form();
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(sum))?)
        }
        Command::Cumulants { input, mode, out } => {
            let values = read_value_csv(&input)?;
            let converted = match mode {
                CumulantMode::M2k => moments_to_free_cumulants(&MomentVector::new(values))?.values,
                CumulantMode::K2m => free_cumulants_to_moments(&CumulantVector::new(values))?.values,
                CumulantMode::K2mClassical => {
                    classical_cumulants_to_moments(&CumulantVector::new(values))?.values
                }
            };
            let rows: Vec<Vec<f64>> = converted.iter().map(|&v| vec![v]).collect();
            io::write_output(out.as_deref(), &io::csv_table(&["value"], &rows))
        }
        Command::Bp { triplet, out } => {
            let u = load_triplet(&triplet)?;
            let mapped = match u.flavor {
                Flavor::Classical => bp_lambda(&u)?,
                Flavor::Free => bp_lambda_inv(&u)?,
            };
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(mapped))?)
        }
        Command::BasisTriplet { field, set, out } => {
            let f = load_field(&field)?;
            let set = setparse::parse_set_expr(&set).map_err(|e| Failure::validation("set", e))?;
            let t = triplet_of_set(&f, &set)?.normal_form();
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(t))?)
        }
        Command::Integrate { field, integrand, out, check, density_out, grid, eps } => {
            let f = load_field(&field)?;
            let doc: Doc<Integrand> = io::parse_doc(&io::read_input(&integrand)?, "integrand")?;
            doc.check_schema("integrand")?;
            doc.payload.validate()?;
            let t = integral_triplet(&f, &doc.payload)?.normal_form();
            let ct_check = if check {
                let z_grid: Vec<Complex64> = (0..20)
                    .map(|k| Complex64::new(0.0, -10.0 + k as f64 * (10.0 - 0.1) / 19.0))
                    .collect();
                Some(integral_ct_check(&f, &doc.payload, &z_grid)?)
            } else {
                None
            };
            if let Some(density_path) = density_out {
                let grid = io::parse_grid(&grid)?;
                let opts =
                    InversionOptions { eps_ladder: io::parse_ladder(&eps)?, ..Default::default() };
                let d = density_parallel(&t, &grid, &opts)?;
                write_density_csv(&density_path, &d)?;
            }
            let payload = IntegrateOut { schema: io::SCHEMA_VERSION, triplet: t, ct_check };
            io::write_output(out.as_deref(), &io::to_json(&payload)?)
        }
        Command::LevyIto { field, out } => {
            let f = load_field(&field)?;
            let parts = levy_ito_split(&f)?;
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(parts))?)
        }
        Command::Decompose { model, mode, out } => {
            let raw = io::read_input(&model)?;
            let doc: Doc<FCRMModel> = io::parse_doc(&raw, "model")?;
            doc.check_schema("model")?;
            let mode = match mode {
                ModeArg::Positive => DecomposeMode::Positive,
                ModeArg::Signed => DecomposeMode::Signed,
            };
            let dec = kingman_decompose(&doc.payload, mode)?;
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(dec))?)
        }
        Command::Truncate { field, eps, out } => {
            let f = load_field(&field)?;
            let t = truncate_small_jumps(&f, eps)?;
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(t))?)
        }
        Command::Simulate { ensemble, seed, out } => {
            let raw = io::read_input(&ensemble)?;
            let doc: Doc<Ensemble> = io::parse_doc(&raw, "ensemble")?;
            doc.check_schema("ensemble")?;
            let mut spec = doc.payload;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let sample = spec.sample()?;
            let rows: Vec<Vec<f64>> = sample.eigenvalues.iter().map(|&v| vec![v]).collect();
            io::write_output(Some(&out), &io::csv_table(&["eigenvalue"], &rows))?;
            let (model, against) = model_density(&spec, &sample.eigenvalues)?;
            let report = KsReportDoc {
                schema: io::SCHEMA_VERSION,
                kind: sample.kind.clone(),
                n: sample.n(),
                seed: sample.seed,
                ks: ks_distance(&sample, &model),
                against,
            };
            io::write_output(Some(&sidecar_path(&out)), &io::to_json(&report)?)
        }
        Command::CheckConvergence { input, tol, out } => {
            let raw = io::read_input(&input)?;
            let doc: Doc<ConvergenceInput> = io::parse_doc(&raw, "convergence input")?;
            doc.check_schema("convergence input")?;
            let opts = DiagnosticOptions {
                tol_drift: tol,
                tol_levy: tol,
                tol_bracket: tol,
                tol_ct: tol,
                ..Default::default()
            };
            let report: ConvergenceReport =
                convergence_diagnostic(&doc.payload.sequence, &doc.payload.target, &opts)?;
            io::write_output(out.as_deref(), &io::to_json(&Doc::new(report))?)
        }
    }
}
