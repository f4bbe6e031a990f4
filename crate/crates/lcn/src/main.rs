use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lcn::backend::backend;
use lcn::config::{parse_levels, Config};
use lcn::invariants::run_invariants;
use lcn::output::float;
use lcn::study::{moment_diagnostics, reference_moments, solve, write_moments_csv};
use lcn::{run_convergence, Manufactured};
use lcn_core::{Discretization, SurfacePoint};

#[derive(Parser)]
#[command(
    name = "lcn",
    version,
    about = "Locally-corrected Nyström solver for surface integral equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Inclusive level range `a..b`.
    #[arg(long, global = true)]
    levels: Option<String>,
    #[arg(long, global = true)]
    p: Option<usize>,
    #[arg(long, global = true)]
    q: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at `mesh.level` and write the nodal solution.
    Solve,
    /// Convergence study over `--levels`.
    Converge,
    /// Run the invariant suites.
    Invariants,
    /// Per-node moment diagnostics at `mesh.level`.
    Moments,
}

fn load(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => Config::from_file(path).with_context(|| format!("loading {}", path.display()))?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(levels) = &common.levels {
        cfg.levels = parse_levels(levels)?;
    }
    if let Some(p) = common.p {
        cfg.scheme.p = p;
    }
    if let Some(q) = common.q {
        cfg.scheme.q = q;
    }
    Ok(cfg)
}

fn create(dir: &PathBuf, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load(&cli.common)?;
    let out = &cli.common.out;
    match cli.command {
        Command::Solve => {
            let spec = cfg.problem()?;
            let rhs = Manufactured::new(spec, cfg.scheme.oracle, cfg.oracle_tolerance)?;
            let disc = Discretization::new(&cfg.surface, cfg.level, spec.kernels, &cfg.scheme)?;
            let f = |y: &SurfacePoint| rhs.eval(y);
            let sol = solve(&disc, &f, cfg.solver_path, backend(cfg.backend).as_ref())?;
            if let Some(e) = rhs.take_error() {
                bail!(e);
            }
            let mut w = lcn::output::writer(create(out, "solution.csv")?);
            w.write_record(["node", "x", "y", "z", "phi"])?;
            for (a, (node, v)) in disc.nodes.nodes.iter().zip(&sol.values).enumerate() {
                let x = node.position();
                w.write_record([a.to_string(), float(x.x()), float(x.y()), float(x.z()), float(*v)])?;
            }
            w.flush()?;
            println!("n = {}, residual = {:e}", disc.len(), sol.residual);
        }
        Command::Converge => {
            let spec = cfg.problem()?;
            let report = run_convergence(&spec, cfg.levels.clone(), &cfg.study(), backend(cfg.backend).as_ref())?;
            report.write_csv(create(out, "convergence.csv")?)?;
            let table = report.table();
            fs::write(out.join("convergence.txt"), &table)?;
            print!("{table}");
        }
        Command::Invariants => {
            let report = run_invariants(&cfg)?;
            report.write_csv(create(out, "invariants.csv")?)?;
            for c in &report.checks {
                println!(
                    "{:<40} {:>12.4e} {:>12.4e} {}",
                    c.name,
                    c.measured,
                    c.threshold,
                    if c.ok() { "pass" } else { "FAIL" }
                );
            }
            if !report.all_ok() {
                bail!("invariant suite failed");
            }
        }
        Command::Moments => {
            let disc = Discretization::new(&cfg.surface, cfg.level, cfg.kernels()?, &cfg.scheme)?;
            let rows = moment_diagnostics(&disc, &reference_moments())?;
            write_moments_csv(&rows, create(out, "moments.csv")?)?;
            let worst = rows.iter().map(|r| r.moment_defect).fold(0.0, f64::max);
            println!("n = {}, max moment defect = {worst:e}", rows.len());
        }
    }
    Ok(())
}
