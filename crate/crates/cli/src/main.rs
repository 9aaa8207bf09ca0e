use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use levp_cli::run::{format_report, run_method, write_bench_summary, write_traces};
use levp_cli::{BenchConfig, Error, MatrixSource, MethodEntry, Result, RunSettings, Session, StartSpec, SyntheticSpec};
use levp_hubbard::{HubbardHamiltonian, LatticeSpec, DEFAULT_DIM_CAP};

#[derive(Parser)]
#[command(name = "levp", version, about = "Leading eigenvalues by coordinate-wise descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method and report the eigenvalue estimate.
    Solve(SolveArgs),
    /// Run a suite of methods from a JSON config.
    Bench(BenchArgs),
    /// Hubbard model utilities.
    Hubbard {
        #[command(subcommand)]
        command: HubbardCommand,
    },
    /// Run the landscape, line-search, engine and Hubbard invariant checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a synthetic matrix to a text file.
    Gen {
        /// `n=500,l1=108,seed=0`
        #[arg(long)]
        synthetic: SyntheticSpec,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum HubbardCommand {
    /// Sector dimension, nonzeros per column, diagonal range and momentum.
    Info {
        #[arg(long, num_args = 2, value_names = ["L1", "L2"], default_values_t = [4, 4])]
        l: Vec<usize>,
        #[arg(long)]
        nup: usize,
        #[arg(long)]
        ndown: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 4.0)]
        u: f64,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct MatrixArgs {
    /// Dense symmetric matrix: dimension, then entries row by row.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// `n=500,l1=108,seed=0`
    #[arg(long)]
    synthetic: Option<SyntheticSpec>,
    /// `l1=4,l2=4,nup=3,ndown=3,t=1,u=4`
    #[arg(long)]
    hubbard: Option<LatticeSpec>,
}

impl MatrixArgs {
    fn source(&self) -> Option<MatrixSource> {
        if let Some(p) = &self.matrix {
            Some(MatrixSource::File(p.clone()))
        } else if let Some(s) = self.synthetic {
            Some(MatrixSource::Synthetic(s))
        } else {
            self.hubbard.map(MatrixSource::Hubbard)
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Solve `scale·A + shift·I` (Hubbard default: 100).
    #[arg(long)]
    shift: Option<f64>,
    /// Hubbard default: −1.
    #[arg(long, allow_negative_numbers = true)]
    scale: Option<f64>,
    /// e.g. GCD-LS-LS, SCD-Grad-LS(1), SCD-Grad-vecLS(2), CD-Cyc-Grad, PM
    #[arg(long)]
    method: String,
    /// Sampling power for SCD-Grad names without a suffix.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Fixed stepsize; defaults to the safe bound for the matrix.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    replacement: bool,
    #[arg(long, action = ArgAction::Set, default_value_t = false)]
    averaged: bool,
    /// Allow greedy picks with k > 1 without averaging.
    #[arg(long)]
    naive: bool,
    /// e1, 10*e5, hf, 10*hf or file:PATH (default e1, Hubbard 10*hf).
    #[arg(long)]
    x0: Option<StartSpec>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000_000)]
    max_col_access: u64,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// Trace spacing in column accesses (default: the dimension).
    #[arg(long)]
    trace_every: Option<u64>,
    /// Directory for per-seed traces.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_col_access: Option<u64>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn solve(args: SolveArgs) -> Result<bool> {
    let source = args
        .matrix
        .source()
        .ok_or_else(|| Error::Usage("one of --matrix, --synthetic or --hubbard is required".into()))?;
    let session = Session::open(source, args.scale, args.shift)?;
    let entry = MethodEntry {
        method: args.method,
        t: args.t,
        k: args.k,
        gamma: args.gamma,
        replacement: args.replacement,
        averaged: args.averaged,
        naive: args.naive,
    };
    let settings = RunSettings {
        x0: args.x0,
        tol: args.tol,
        max_col_access: args.max_col_access,
        seeds: args.seeds,
        trace_every: args.trace_every,
    };
    let report = run_method(&session, &entry, &settings)?;
    print!("{}", format_report(&session, &report));
    if let Some(dir) = &args.out {
        write_traces(dir, &report, session.problem.dim())?;
    }
    Ok(report.converged())
}

fn bench(args: BenchArgs) -> Result<bool> {
    let mut cfg = BenchConfig::read(&args.config)?;
    let source = match args.matrix.source() {
        Some(s) => s,
        None => cfg.matrix.source()?,
    };
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.max_col_access = args.max_col_access.unwrap_or(cfg.max_col_access);
    cfg.seeds = args.seeds.unwrap_or(cfg.seeds);
    let out = args.out.or(cfg.out.clone());
    let x0 = cfg.x0.as_deref().map(str::parse).transpose()?;
    let session = Session::open(source, cfg.scale, cfg.shift)?;
    let settings = RunSettings {
        x0,
        tol: cfg.tol,
        max_col_access: cfg.max_col_access,
        seeds: cfg.seeds,
        trace_every: cfg.trace_every,
    };
    let mut reports = Vec::new();
    for entry in &cfg.methods {
        let report = run_method(&session, entry, &settings)?;
        print!("{}", format_report(&session, &report));
        println!();
        if let Some(dir) = &out {
            write_traces(dir, &report, session.problem.dim())?;
        }
        reports.push(report);
    }
    if let Some(dir) = &out {
        let path = write_bench_summary(dir, &reports)?;
        println!("summary written to {}", path.display());
    }
    Ok(reports.iter().all(|r| r.converged()))
}

fn hubbard_info(l: &[usize], nup: usize, ndown: usize, t: f64, u: f64) -> Result<bool> {
    let spec = LatticeSpec {
        l1: l[0],
        l2: l[1],
        t_hop: t,
        u,
        n_up: nup,
        n_down: ndown,
    };
    let h = HubbardHamiltonian::new(spec, DEFAULT_DIM_CAP)?;
    let info = h.info()?;
    println!(
        "lattice {}x{}  electrons {}+{}  t {}  U {}",
        spec.l1, spec.l2, nup, ndown, t, u
    );
    println!("Dim {}", info.dim);
    println!("sector momentum {}", info.sector);
    println!("HF index {}", info.hf_index);
    println!(
        "nnz per col min {} med {} max {}",
        info.nnz.min, info.nnz.median, info.nnz.max
    );
    println!("diagonal range [{}, {}]", info.diag_min, info.diag_max);
    Ok(true)
}

fn verify(seed: u64) -> Result<bool> {
    let mut ok = true;
    for check in levp_cli::verify::run_all(seed) {
        match check.result {
            Ok(detail) => println!("[ok]   {}: {detail}", check.name),
            Err(why) => {
                ok = false;
                println!("[FAIL] {}: {why}", check.name);
            }
        }
    }
    Ok(ok)
}

fn gen(spec: SyntheticSpec, out: PathBuf) -> Result<bool> {
    spec.build()?.write_text(&out)?;
    println!("wrote {}x{} matrix to {}", spec.n, spec.n, out.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Hubbard {
            command: HubbardCommand::Info { l, nup, ndown, t, u },
        } => hubbard_info(&l, nup, ndown, t, u),
        Command::Verify { seed } => verify(seed),
        Command::Gen { synthetic, out } => gen(synthetic, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
