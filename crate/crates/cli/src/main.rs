//! `belldistill`: rates, Werner curves, protocol search, sampling
//! diagnostics and bootstrap schedules for Bell-diagonal distillation.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on computational
//! errors. Data goes to stdout or `--out`; diagnostics go to stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use belldistill::{
    best_recurrence_then_hash, fmt_sig, make_plan, optimize, rate_2copy,
    rate_asymptotic_recurrence, residual_entropy_curve, success_bound, werner_curve, BlockDist,
    SearchConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "belldistill", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Input-state selection shared by the state-based subcommands.
/// Spectra are given in eigenvalue order λ00,λ01,λ10,λ11 (the order is
/// load-bearing: parity masks address the amp bit first).
#[derive(Args, Debug)]
struct StateArgs {
    /// Spectrum λ00,λ01,λ10,λ11; nonnegative, renormalized if the sum
    /// deviates by no more than 1e-9
    #[arg(long, value_name = "a,b,c,d", conflicts_with = "werner")]
    spectrum: Option<String>,
    /// Werner fidelity f, shorthand for the spectrum f,(1-f)/3,...
    #[arg(long, value_name = "f")]
    werner: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form rates (hashing, asymptotic recurrence, 2-copy,
    /// recurrence+hash) for one spectrum
    Rate {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Werner-state rate table over a fidelity grid, as CSV
    Curve {
        /// Fidelity grid lo:hi:step within (1/2, 1]
        #[arg(long, value_name = "lo:hi:step")]
        grid: String,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the best tree of each grid point into this
        /// directory, one file per point
        #[arg(long)]
        trees_dir: Option<PathBuf>,
    },
    /// Exhaustive protocol search on a block of identical copies
    Search {
        #[command(flatten)]
        state: StateArgs,
        /// Number of copies in the searched block
        #[arg(long, default_value_t = 2)]
        copies: usize,
        /// Write the best protocol tree here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Beam width for 5 or 6 copies (guess-guided search)
        #[arg(long)]
        beam_width: Option<usize>,
        /// Disable orbit canonicalization of memo keys
        #[arg(long)]
        no_canonicalization: bool,
    },
    /// Residual-entropy diagnostic: posterior entropy after k random
    /// independent parity checks on n sampled copies, as CSV
    Simulate {
        #[command(flatten)]
        state: StateArgs,
        /// Number of sampled copies (posterior enumerates all 4^n strings)
        #[arg(long)]
        n: usize,
        /// Number of parity checks (at most 2n)
        #[arg(long)]
        checks: usize,
        /// Number of trials to average over
        #[arg(long)]
        trials: usize,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bootstrap schedule converting an assisted rate into a
    /// non-assisted protocol, as CSV
    Bootstrap {
        /// Assisted distillation rate
        #[arg(long)]
        r: f64,
        /// Activating (non-assisted) rate
        #[arg(long)]
        k: f64,
        /// Total copies; scientific notation accepted
        #[arg(long)]
        n: String,
        /// Typicality exponent in the success bound
        #[arg(long, default_value_t = 0.01)]
        c: f64,
        /// Typicality prefactor in the success bound
        #[arg(long)]
        kerr: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Compute(belldistill::Error),
}

impl From<belldistill::Error> for CliError {
    fn from(e: belldistill::Error) -> Self {
        CliError::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn parse_state(state: &StateArgs) -> Result<BlockDist, CliError> {
    match (&state.spectrum, state.werner) {
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting flags"),
        (Some(text), None) => {
            let parts: Vec<&str> = text.split(',').collect();
            if parts.len() != 4 {
                return Err(usage(format!(
                    "--spectrum needs four comma-separated values, got {}",
                    parts.len()
                )));
            }
            let mut lam = [0.0f64; 4];
            for (slot, part) in lam.iter_mut().zip(&parts) {
                *slot = part
                    .trim()
                    .parse()
                    .map_err(|e| usage(format!("bad spectrum entry {:?}: {}", part, e)))?;
                if *slot < 0.0 {
                    return Err(usage(format!("spectrum entry {} is negative", slot)));
                }
            }
            let total: f64 = lam.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(usage(format!(
                    "spectrum sums to {}, more than 1e-9 away from 1",
                    total
                )));
            }
            for slot in lam.iter_mut() {
                *slot /= total;
            }
            Ok(BlockDist::from_spectrum(lam)?)
        }
        (None, Some(f)) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(usage(format!("--werner {} outside [0, 1]", f)));
            }
            let t = (1.0 - f) / 3.0;
            Ok(BlockDist::from_spectrum([f, t, t, t])?)
        }
        (None, None) => Err(usage("exactly one of --spectrum or --werner is required")),
    }
}

fn emit(out: &Option<PathBuf>, data: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, data)
            .map_err(|e| usage(format!("cannot write {}: {}", path.display(), e))),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--grid needs lo:hi:step, got {:?}", spec)));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|e| usage(format!("bad grid number {:?}: {}", p, e)))
        })
        .collect::<Result<_, _>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || hi < lo {
        return Err(usage("grid needs hi >= lo and step > 0"));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let f = lo + step * i as f64;
        if f > hi + 1e-12 {
            break;
        }
        grid.push(f.min(1.0));
        i += 1;
    }
    for &f in &grid {
        if !(f > 0.5 && f <= 1.0) {
            return Err(usage(format!(
                "grid point {} outside the entangled Werner region (1/2, 1]",
                f
            )));
        }
    }
    Ok(grid)
}

/// Recurrence rounds swept for the rate subcommand's rec_hash line.
const RATE_MAX_ROUNDS: usize = 20;

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Rate { state } => {
            let d = parse_state(&state)?;
            let hash = 1.0 - d.entropy_bits();
            println!("hash {}", fmt_sig(hash));
            println!("asym_rec {}", fmt_sig(rate_asymptotic_recurrence(&d)?));
            println!("two_copy {}", fmt_sig(rate_2copy(&d)?));
            println!(
                "rec_hash {}",
                fmt_sig(best_recurrence_then_hash(&d, RATE_MAX_ROUNDS)?)
            );
            Ok(())
        }
        Command::Curve {
            grid,
            out,
            trees_dir,
        } => {
            let grid = parse_grid(&grid)?;
            let cfg = SearchConfig::default();
            let curve = werner_curve(&grid, &cfg)?;
            for warning in &curve.warnings {
                eprintln!("warning: {warning}");
            }
            if let Some(dir) = &trees_dir {
                fs::create_dir_all(dir)
                    .map_err(|e| usage(format!("cannot create {}: {}", dir.display(), e)))?;
                for (i, (row, tree)) in curve.rows.iter().zip(&curve.trees).enumerate() {
                    let path = dir.join(format!("tree_{:03}_f{:.6}.txt", i, row.f));
                    fs::write(&path, tree.to_text())
                        .map_err(|e| usage(format!("cannot write {}: {}", path.display(), e)))?;
                }
            }
            emit(&out, &curve.to_csv())
        }
        Command::Search {
            state,
            copies,
            out,
            beam_width,
            no_canonicalization,
        } => {
            let single = parse_state(&state)?;
            if copies == 0 || copies > 6 {
                return Err(usage("--copies must lie in 1..=6"));
            }
            let block = single.tensor_power(copies)?;
            let cfg = SearchConfig {
                max_pairs: copies,
                canonicalization: !no_canonicalization,
                beam_width,
                ..SearchConfig::default()
            };
            let (rate, tree) = optimize(&block, &cfg)?;
            println!("optimized {}", fmt_sig(rate));
            match &out {
                Some(_) => emit(&out, &tree.to_text()),
                None => {
                    print!("{}", tree.to_text());
                    Ok(())
                }
            }
        }
        Command::Simulate {
            state,
            n,
            checks,
            trials,
            seed,
            out,
        } => {
            let d = parse_state(&state)?;
            let curve = residual_entropy_curve(&d, n, checks, trials, seed)?;
            let mut csv = String::from("k,mean_residual_entropy_bits,stddev\n");
            for point in curve {
                writeln!(
                    csv,
                    "{},{},{}",
                    point.checks_applied,
                    fmt_sig(point.mean_bits),
                    fmt_sig(point.stddev_bits)
                )
                .unwrap();
            }
            emit(&out, &csv)
        }
        Command::Bootstrap {
            r,
            k,
            n,
            c,
            kerr,
            out,
        } => {
            let n_float: f64 = n
                .parse()
                .map_err(|e| usage(format!("bad --n {:?}: {}", n, e)))?;
            if !(n_float >= 1.0) || n_float > 9.0e18 {
                return Err(usage(format!("--n {} outside 1..=9e18", n)));
            }
            let n_copies = n_float as u64;
            let kerr = kerr.unwrap_or(2.0);
            let plan = make_plan(n_copies, k, r)?;
            let bound = success_bound(n_copies, |m| (1.0 - 1.0 / m).max(0.0), kerr, c)?;
            let blocks: Vec<String> = plan.blocks().iter().map(|b| b.to_string()).collect();
            let csv = format!(
                "n,activating_copies,blocks,effective_rate,success_bound\n{},{},{},{},{}\n",
                plan.total_copies(),
                plan.activating_copies(),
                blocks.join(";"),
                fmt_sig(plan.effective_rate()),
                fmt_sig(bound)
            );
            emit(&out, &csv)
        }
    }
}
