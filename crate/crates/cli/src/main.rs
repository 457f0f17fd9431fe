use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rlfde::asymptote::classify;
use rlfde::catalog::{self, Example, Reproduction, EXAMPLES};
use rlfde::fracint::{frac_integral, SingularFunction};
use rlfde::num::fmt17;
use rlfde::solver::{solve, verify_solution};
use rlfde::specfile::SpecFile;
use rlfde::suite::{self, Suite};
use rlfde::verdict::PropertyVerdict;
use rlfde::Error;

const OK: u8 = 0;
const VERDICT_FAILED: u8 = 1;
const USAGE: u8 = 2;
const NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "rlfde", version, about = "Weighted Riemann-Liouville fractional differential equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate y(t) = ∫₀ᵗ (t-s)^(β-1) ρ(s) ds.
    Integrate {
        #[arg(long)]
        beta: f64,
        /// ρ as an expression in `s`.
        #[arg(long)]
        rho: String,
        /// Singularity exponent of ρ at 0 (ρ ~ s^-alpha).
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        t: f64,
    },
    /// Solve a spec file and write the trajectory as CSV.
    Solve {
        spec: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Classify a spec file and print the limit report as JSON.
    Asymptote {
        spec: PathBuf,
        /// Also solve and compare the extrapolated solver limit.
        #[arg(long)]
        solve: bool,
    },
    /// Run a property suite: lemmas, solver or all.
    Verify {
        #[arg(long)]
        suite: Suite,
    },
    /// Reproduce a shipped example (4.1 to 4.6) or all of them.
    Reproduce { example: String },
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec(_) | Error::Json(_) | Error::Expr(_) | Error::Io(_) | Error::Domain(_) => USAGE,
        Error::Numerical(_) | Error::NonConvergence { .. } | Error::MarchDivergence { .. } | Error::AtNode { .. } => NUMERICAL,
    }
}

fn fail(e: Error) -> u8 {
    eprintln!("error: {e}");
    error_code(&e)
}

fn print_verdicts<'a>(verdicts: impl IntoIterator<Item = &'a PropertyVerdict>) -> bool {
    let mut ok = true;
    for v in verdicts {
        println!("{v}");
        ok &= v.pass;
    }
    ok
}

fn integrate(beta: f64, rho: &str, alpha: f64, t: f64) -> Result<u8, Error> {
    let rho = SingularFunction::parse(rho, alpha)?;
    let q = frac_integral(&rho, beta, t)?;
    println!("y = {}", fmt17(q.value));
    println!("error_estimate = {}", fmt17(q.error_estimate));
    if !q.converged {
        eprintln!("warning: quadrature ladder did not converge");
        return Ok(NUMERICAL);
    }
    Ok(OK)
}

fn solve_cmd(spec_path: &PathBuf, out: &PathBuf) -> Result<u8, Error> {
    let file = SpecFile::read(spec_path)?;
    let spec = file.problem()?;
    let config = file.solver_config()?;
    let traj = solve(&spec, &config)?;
    let mut w = BufWriter::new(File::create(out)?);
    traj.write_csv(&mut w)?;
    w.flush()?;
    println!("nodes = {}", traj.len());
    println!("residual = {}", fmt17(traj.residual));
    println!("final t = {}, x = {}", fmt17(traj.final_time()), fmt17(traj.final_x()));
    let audit = verify_solution(&spec, &traj, config.tol);
    let mut ok = print_verdicts(audit.verdicts());
    if !audit.hypotheses_hold() {
        println!("note: monotonicity hypotheses not met; conclusion checks skipped");
        ok = audit.residual.pass;
    }
    Ok(if ok { OK } else { VERDICT_FAILED })
}

fn asymptote_cmd(spec_path: &PathBuf, with_solve: bool) -> Result<u8, Error> {
    let file = SpecFile::read(spec_path)?;
    let spec = file.problem()?;
    let mut report = classify(&spec);
    if with_solve {
        let traj = solve(&spec, &file.solver_config()?)?;
        report.attach_trajectory(&traj)?;
    }
    println!("{}", report.to_json()?);
    Ok(if report.agrees() { OK } else { VERDICT_FAILED })
}

fn verify_cmd(suite: Suite) -> u8 {
    let verdicts = suite::run(suite);
    let passed = verdicts.iter().filter(|v| v.pass).count();
    let ok = print_verdicts(&verdicts);
    println!("{passed}/{} checks passed", verdicts.len());
    if ok {
        OK
    } else {
        VERDICT_FAILED
    }
}

fn reproduce_row(r: &Reproduction) -> String {
    let e = r.example;
    let exact = (e.limit)();
    format!(
        "{:<5} {:<30} {:>24} {:>24} {:>10.3e} {:<5}",
        e.id,
        e.symbolic_limit,
        fmt17(exact),
        r.report.extrapolated_solver_limit.map_or("-".to_string(), fmt17),
        r.gap(),
        r.report.governing_theorem.label()
    )
}

fn reproduce_cmd(which: &str) -> Result<u8, Error> {
    let selected: Vec<&'static Example> = if which == "all" {
        EXAMPLES.iter().collect()
    } else {
        match catalog::find(which) {
            Some(e) => vec![e],
            None => {
                eprintln!("error: unknown example `{which}` (expected 4.1 to 4.6 or all)");
                return Ok(USAGE);
            }
        }
    };
    // Examples run concurrently; rows print in example order.
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = selected.iter().map(|&e| s.spawn(move || catalog::reproduce(e))).collect();
        handles.into_iter().map(|h| h.join().expect("reproduction thread panicked")).collect()
    });
    println!(
        "{:<5} {:<30} {:>24} {:>24} {:>10} {:<5}",
        "id", "limit", "value", "solver limit", "gap", "thm"
    );
    let mut code = OK;
    for (e, res) in selected.iter().zip(results) {
        match res {
            Ok(r) => {
                println!("{}", reproduce_row(&r));
                eprintln!("{}: {:.2}s", e.id, r.seconds);
                let classified = r.report.governing_theorem == e.governing;
                let predicted_ok = (r.report.predicted_limit - (e.limit)()).abs() <= 1e-10;
                if !(classified && predicted_ok && r.gap() <= rlfde::asymptote::AGREEMENT_TOL) {
                    code = code.max(VERDICT_FAILED);
                }
            }
            Err(err) => {
                println!("{:<5} error: {err}", e.id);
                code = code.max(error_code(&err));
            }
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let result = match &cli.command {
        Command::Integrate { beta, rho, alpha, t } => integrate(*beta, rho, *alpha, *t),
        Command::Solve { spec, out } => solve_cmd(spec, out),
        Command::Asymptote { spec, solve } => asymptote_cmd(spec, *solve),
        Command::Verify { suite } => Ok(verify_cmd(*suite)),
        Command::Reproduce { example } => reproduce_cmd(example),
    };
    ExitCode::from(result.unwrap_or_else(fail))
}
