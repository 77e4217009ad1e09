//! `koopman` — build periodic approximations of torus maps and compute
//! spectral projections and density functions of observables.
//!
//! Subcommands: `approximate` (build and persist a permutation),
//! `project` (spectral projection onto an arc), `density` (mollified
//! spectral density curve), `verify` (self-checks and file validation).
//! All outputs embed the run configuration; identical configurations
//! produce byte-identical files.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use koopman::io::{self, PermHeader, PERM_FORMAT_VERSION};
use koopman::oracles::{catmap_spectrum, dense_eig_oracle, CatObservable};
use koopman::{
    atoms, builtin_observable, cycle_decompose, density, discretize_analytic,
    discretize_matching, fourier_modes, koopman_apply, project, quality_report, Interval,
    LatticePartition, Mollifier, Observable, ObservableFn, PermutationMap, ProjectionMode,
    TorusMap,
};

const DEFAULT_ALPHA: f64 = TAU / 500.0;

#[derive(Parser)]
#[command(name = "koopman", version, about = "Koopman spectra via periodic approximations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the lattice permutation of a map and write it to disk.
    Approximate(ApproximateArgs),
    /// Project an observable onto a spectral arc and export the samples.
    Project(ProjectArgs),
    /// Evaluate the mollified spectral density on a uniform angle grid.
    Density(DensityArgs),
    /// Run the self-check suite; optionally validate a permutation file.
    Verify(VerifyArgs),
}

#[derive(Args, Serialize, Clone)]
struct MapArgs {
    /// Map name: translation | cat_map | anzai | chirikov | abc | identity.
    #[arg(long)]
    map: Option<String>,
    /// Translation vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    omega: Option<Vec<f64>>,
    /// Chirikov coupling.
    #[arg(long = "K", allow_hyphen_values = true)]
    k: Option<f64>,
    /// Anzai rotation number.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// ABC-map coefficients A,B,C.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    abc: Option<Vec<f64>>,
    /// Dimension for the identity map.
    #[arg(long)]
    dim: Option<usize>,
    /// Cells per axis (ñ).
    #[arg(long)]
    grid: Option<usize>,
    /// Construction mode: analytic | matching.
    #[arg(long, default_value = "analytic")]
    mode: String,
}

#[derive(Args, Serialize, Clone)]
struct ObservableArgs {
    /// Catalog observable name.
    #[arg(long)]
    observable: Option<String>,
    /// JSON file with Fourier modes: [{"k": [..], "re": .., "im": ..}, ..].
    #[arg(long)]
    modes_file: Option<PathBuf>,
}

#[derive(Args)]
struct ApproximateArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Output path of the permutation file.
    #[arg(long)]
    out: PathBuf,
    /// Permutation file format: bin | json.
    #[arg(long, default_value = "bin")]
    format: String,
    #[arg(long, env = "KOOPMAN_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Reuse a permutation file instead of rebuilding.
    #[arg(long)]
    perm_file: Option<PathBuf>,
    #[command(flatten)]
    observable: ObservableArgs,
    /// Arc endpoints A B (radians; may wrap across ±π).
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
    interval: Vec<f64>,
    /// Mollify the arc indicator with this kernel width.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Output format: csv | json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, env = "KOOPMAN_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long)]
    perm_file: Option<PathBuf>,
    #[command(flatten)]
    observable: ObservableArgs,
    /// Mollifier width (default 2π/500).
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of evaluation angles R on [−π, π).
    #[arg(long, default_value_t = 2048)]
    theta_points: usize,
    #[arg(long)]
    out: PathBuf,
    /// Output format: csv | json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, env = "KOOPMAN_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Validate this permutation file (header, bijectivity).
    #[arg(long)]
    perm_file: Option<PathBuf>,
    /// Skip the multi-resolution density convergence block.
    #[arg(long)]
    quick: bool,
    #[arg(long, env = "KOOPMAN_THREADS")]
    threads: Option<usize>,
}

/// Everything needed to reproduce a run; embedded in every output file.
#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a str,
    map: Option<&'a MapArgs>,
    observable: Option<&'a ObservableArgs>,
    perm_file: Option<String>,
    interval: Option<[f64; 2]>,
    alpha: Option<f64>,
    theta_points: Option<usize>,
    format: &'a str,
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // affects the parallel image evaluation in the matching construction
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn build_map(args: &MapArgs) -> Result<(TorusMap, &'static str, serde_json::Value)> {
    let name = args.map.as_deref().ok_or_else(|| anyhow!("--map is required"))?;
    match name {
        "translation" => {
            let omega = args
                .omega
                .clone()
                .ok_or_else(|| anyhow!("translation needs --omega"))?;
            let map = TorusMap::translation(&omega)?;
            Ok((map, "translation", serde_json::json!({ "omega": omega })))
        }
        "cat_map" => Ok((TorusMap::cat_map(), "cat_map", serde_json::json!({}))),
        "anzai" => {
            let gamma = args.gamma.ok_or_else(|| anyhow!("anzai needs --gamma"))?;
            Ok((TorusMap::anzai(gamma)?, "anzai", serde_json::json!({ "gamma": gamma })))
        }
        "chirikov" => {
            let k = args.k.ok_or_else(|| anyhow!("chirikov needs --K"))?;
            Ok((TorusMap::chirikov(k)?, "chirikov", serde_json::json!({ "K": k })))
        }
        "abc" => {
            let c = args.abc.clone().ok_or_else(|| anyhow!("abc needs --abc A,B,C"))?;
            if c.len() != 3 {
                bail!("--abc expects exactly three values");
            }
            Ok((
                TorusMap::abc(c[0], c[1], c[2])?,
                "abc",
                serde_json::json!({ "A": c[0], "B": c[1], "C": c[2] }),
            ))
        }
        "identity" => {
            let dim = args.dim.unwrap_or(2);
            Ok((TorusMap::identity(dim), "identity", serde_json::json!({ "dim": dim })))
        }
        other => bail!("unknown map '{other}'"),
    }
}

fn build_observable(args: &ObservableArgs) -> Result<ObservableFn> {
    match (&args.observable, &args.modes_file) {
        (Some(name), None) => Ok(builtin_observable(name)?),
        (None, Some(path)) => {
            #[derive(serde::Deserialize)]
            struct Mode {
                k: Vec<i64>,
                re: f64,
                im: f64,
            }
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let modes: Vec<Mode> = serde_json::from_str(&text)?;
            Ok(fourier_modes(
                modes
                    .into_iter()
                    .map(|m| (m.k, Complex64::new(m.re, m.im)))
                    .collect(),
            )?)
        }
        (Some(_), Some(_)) => bail!("--observable and --modes-file are mutually exclusive"),
        (None, None) => bail!("an observable is required (--observable or --modes-file)"),
    }
}

/// Build (or load) the permutation named by the arguments, together with the
/// header describing its construction.
fn obtain_permutation(
    map_args: &MapArgs,
    perm_file: &Option<PathBuf>,
) -> Result<(PermutationMap, PermHeader)> {
    if let Some(path) = perm_file {
        let (perm, header) = io::read_permutation(path)
            .with_context(|| format!("loading {}", path.display()))?;
        return Ok((perm, header));
    }
    let (map, name, params) = build_map(map_args)?;
    let grid = map_args.grid.ok_or_else(|| anyhow!("--grid is required"))?;
    let partition = LatticePartition::new(map.dim(), grid)?;
    let (perm, t_used) = match map_args.mode.as_str() {
        "analytic" => (discretize_analytic(&map, &partition)?, None),
        "matching" => {
            let (perm, t) = discretize_matching(&map, &partition)?;
            (perm, Some(t))
        }
        other => bail!("unknown mode '{other}' (expected analytic | matching)"),
    };
    let header = PermHeader {
        format_version: PERM_FORMAT_VERSION,
        m: map.dim(),
        n_tilde: grid,
        map: name.to_string(),
        params,
        mode: map_args.mode.clone(),
        t_used,
        config: None,
    };
    Ok((perm, header))
}

fn cmd_approximate(args: ApproximateArgs) -> Result<()> {
    init_threads(args.threads);
    let t0 = Instant::now();
    let (map, name, params) = build_map(&args.map)?;
    let grid = args.map.grid.ok_or_else(|| anyhow!("--grid is required"))?;
    let partition = LatticePartition::new(map.dim(), grid)?;
    let (perm, t_used) = match args.map.mode.as_str() {
        "analytic" => (discretize_analytic(&map, &partition)?, None),
        "matching" => {
            let (perm, t) = discretize_matching(&map, &partition)?;
            (perm, Some(t))
        }
        other => bail!("unknown mode '{other}' (expected analytic | matching)"),
    };

    let config = RunConfig {
        command: "approximate",
        map: Some(&args.map),
        observable: None,
        perm_file: None,
        interval: None,
        alpha: None,
        theta_points: None,
        format: &args.format,
    };
    let header = PermHeader {
        format_version: PERM_FORMAT_VERSION,
        m: map.dim(),
        n_tilde: grid,
        map: name.to_string(),
        params,
        mode: args.map.mode.clone(),
        t_used,
        config: Some(serde_json::to_value(&config)?),
    };
    match args.format.as_str() {
        "bin" => io::write_permutation_binary(&args.out, &perm, &header)?,
        "json" => io::write_permutation_json(&args.out, &perm, &header)?,
        other => bail!("unknown permutation format '{other}' (expected bin | json)"),
    }

    let decomp = cycle_decompose(&perm);
    let quality = quality_report(&perm, &map)?;
    let report = serde_json::json!({
        "out": args.out.display().to_string(),
        "q": perm.q(),
        "t_used": t_used,
        "quality": quality,
        "cycle_count": decomp.len(),
        "max_cycle_length": decomp.max_cycle_len(),
        "min_cycle_length": decomp.min_cycle_len(),
        "wall_seconds": t0.elapsed().as_secs_f64(),
    });
    println!("{report}");
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> Result<()> {
    init_threads(args.threads);
    let (perm, header) = obtain_permutation(&args.map, &args.perm_file)?;
    let obs_fn = build_observable(&args.observable)?;
    let g = Observable::sample(perm.partition(), &obs_fn)?;
    if args.interval.len() != 2 {
        bail!("--interval expects two endpoints");
    }
    let d = Interval::from_endpoints(args.interval[0], args.interval[1])?;
    let mode = match args.alpha {
        None => ProjectionMode::Hard,
        Some(a) => ProjectionMode::Mollified(a),
    };
    let result = project(&perm, &g, &d, mode)?;

    let config = serde_json::json!({
        "config": RunConfig {
            command: "project",
            map: Some(&args.map),
            observable: Some(&args.observable),
            perm_file: args.perm_file.as_ref().map(|p| p.display().to_string()),
            interval: Some([args.interval[0], args.interval[1]]),
            alpha: args.alpha,
            theta_points: None,
            format: &args.format,
        },
        "permutation": header,
    });
    match args.format.as_str() {
        "csv" => io::write_projection_csv(&args.out, perm.partition(), result.values(), &config)?,
        "json" => io::write_projection_json(&args.out, perm.partition(), result.values(), &config)?,
        other => bail!("unknown output format '{other}' (expected csv | json)"),
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_density(args: DensityArgs) -> Result<()> {
    init_threads(args.threads);
    let (perm, header) = obtain_permutation(&args.map, &args.perm_file)?;
    let obs_fn = build_observable(&args.observable)?;
    let g = Observable::sample(perm.partition(), &obs_fn)?;
    let alpha = args.alpha.unwrap_or(DEFAULT_ALPHA);
    if args.theta_points == 0 {
        bail!("--theta-points must be positive");
    }
    let thetas: Vec<f64> = (0..args.theta_points)
        .map(|i| -std::f64::consts::PI + TAU * i as f64 / args.theta_points as f64)
        .collect();
    let rho = density(&perm, &g, alpha, &thetas)?;

    let config = serde_json::json!({
        "config": RunConfig {
            command: "density",
            map: Some(&args.map),
            observable: Some(&args.observable),
            perm_file: args.perm_file.as_ref().map(|p| p.display().to_string()),
            interval: None,
            alpha: Some(alpha),
            theta_points: Some(args.theta_points),
            format: &args.format,
        },
        "permutation": header,
    });
    match args.format.as_str() {
        "csv" => io::write_density_csv(&args.out, &thetas, &rho, &config)?,
        "json" => io::write_density_json(&args.out, &thetas, &rho, &config)?,
        other => bail!("unknown output format '{other}' (expected csv | json)"),
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

/// Deterministic generator for the self-check suite; identical on every
/// platform, no external state.
struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [−1, 1).
    fn next_signed(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

struct Check {
    name: &'static str,
    outcome: std::result::Result<String, String>,
}

fn run_check(name: &'static str, f: impl FnOnce() -> Result<String>) -> Check {
    Check {
        name,
        outcome: f().map_err(|e| format!("{e:#}")),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    init_threads(args.threads);
    let mut checks: Vec<Check> = Vec::new();

    if let Some(path) = &args.perm_file {
        checks.push(run_check("permutation file", || {
            let (perm, header) = io::read_permutation(path)?;
            Ok(format!(
                "bijection on q={} cells, map '{}', mode {}",
                perm.q(),
                header.map,
                header.mode
            ))
        }));
    }

    checks.push(run_check("dense oracle agreement (random q ≤ 64)", || {
        let mut rng = SplitMix64::new(2024);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let q = 1 + (rng.next() % 64) as usize;
            let mut targets: Vec<u32> = (0..q as u32).collect();
            // Fisher–Yates with the deterministic generator
            for i in (1..q).rev() {
                targets.swap(i, (rng.next() % (i as u64 + 1)) as usize);
            }
            let perm = PermutationMap::new(LatticePartition::new(1, q)?, targets)?;
            let g = Observable::from_values(
                (0..q)
                    .map(|_| Complex64::new(rng.next_signed(), rng.next_signed()))
                    .collect(),
            )?;
            let fast = atoms(&perm, &g)?;
            let slow = dense_eig_oracle(&perm, &g)?;
            for (a, b) in fast.atoms().iter().zip(slow.atoms()) {
                worst = worst.max((a.mass - b.mass).abs()).max((a.theta - b.theta).abs());
            }
            if worst > 1e-9 {
                bail!("atom deviation {worst}");
            }
            let parseval = (fast.total_mass() - g.norm_sq()).abs();
            if parseval > 1e-12 * g.norm_sq().max(1.0) {
                bail!("Parseval defect {parseval}");
            }
            let d = Interval::new(-1.0, 1.0)?;
            let p1 = project(&perm, &g, &d, ProjectionMode::Hard)?;
            let p2 = project(&perm, &p1, &d, ProjectionMode::Hard)?;
            let idem = p1
                .values()
                .iter()
                .zip(p2.values())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0f64, f64::max);
            if idem > 1e-12 {
                bail!("projector not idempotent: {idem}");
            }
        }
        Ok(format!("20 instances, worst deviation {worst:.2e}"))
    }));

    checks.push(run_check("exact translation spectrum (ñ = 60)", || {
        let p = LatticePartition::new(2, 60)?;
        let map = TorusMap::translation(&[0.5, 1.0 / 3.0])?;
        let perm = discretize_analytic(&map, &p)?;
        let g = Observable::sample(&p, &builtin_observable("g_2d_translation")?)?;
        let set = atoms(&perm, &g)?;
        let near: f64 = set
            .atoms()
            .iter()
            .filter(|a| {
                (0..6).any(|k| {
                    koopman::circle_distance(a.theta, k as f64 * std::f64::consts::PI / 3.0) < 0.05
                })
            })
            .map(|a| a.mass)
            .sum();
        let err = (near - g.norm_sq()).abs();
        if err > 1e-10 {
            bail!("six-root mass error {err}");
        }
        Ok(format!("six-root mass error {err:.2e}"))
    }));

    checks.push(run_check("unitarity on builtins (ñ = 128)", || {
        let p = LatticePartition::new(2, 128)?;
        for (map, obs) in [
            (TorusMap::cat_map(), "g1"),
            (TorusMap::chirikov(0.15)?, "g_chirikov"),
            (TorusMap::anzai(1.0 / 3.0)?, "g_anzai"),
        ] {
            let perm = discretize_analytic(&map, &p)?;
            let g = Observable::sample(&p, &builtin_observable(obs)?)?;
            let ug = koopman_apply(&perm, &g)?;
            if (ug.norm_sq() - g.norm_sq()).abs() > 1e-12 * g.norm_sq() {
                bail!("norm drift for {obs}");
            }
        }
        Ok("3 builtins".into())
    }));

    if !args.quick {
        checks.push(run_check("cat-map density convergence (g2)", || {
            let grid: Vec<f64> = (0..2048)
                .map(|i| -std::f64::consts::PI + TAU * i as f64 / 2048.0)
                .collect();
            let moll = Mollifier::new(DEFAULT_ALPHA)?;
            let oracle = catmap_spectrum(CatObservable::G2);
            let truth: Vec<f64> = grid.iter().map(|&t| oracle.mollified_at(&moll, t)).collect();
            let mut errs = Vec::new();
            for n in [128usize, 256, 512] {
                let p = LatticePartition::new(2, n)?;
                let perm = discretize_analytic(&TorusMap::cat_map(), &p)?;
                let g = Observable::sample(&p, &builtin_observable("g2")?)?;
                let rho = density(&perm, &g, DEFAULT_ALPHA, &grid)?;
                let h = TAU / grid.len() as f64;
                errs.push(
                    rho.iter()
                        .zip(&truth)
                        .map(|(a, b)| (a - b).abs())
                        .sum::<f64>()
                        * h,
                );
            }
            if !(errs[1] <= 1.1 * errs[0] && errs[2] <= 1.1 * errs[1]) {
                bail!("L¹ errors not decreasing: {errs:?}");
            }
            Ok(format!("L¹ {:.4} → {:.4} → {:.4}", errs[0], errs[1], errs[2]))
        }));
    }

    let mut failed = 0;
    for check in &checks {
        match &check.outcome {
            Ok(detail) => println!("PASS  {:<42} {detail}", check.name),
            Err(e) => {
                failed += 1;
                println!("FAIL  {:<42} {e}", check.name);
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Approximate(args) => cmd_approximate(args),
        Cmd::Project(args) => cmd_project(args),
        Cmd::Density(args) => cmd_density(args),
        Cmd::Verify(args) => cmd_verify(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
