#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dualcert::harness::{
    compute_reference, generate_instance, run_experiment, verify_report, AlphaRule,
    ExperimentConfig, GeneratorConfig, ReferenceSolution,
};
use dualcert::methods::MethodKind;
use dualcert::problem::InstanceFile;
use dualcert::Error;

#[derive(Parser)]
#[command(name = "dualcert", version, about = "Dual first-order methods with primal error certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 5)]
        q: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve the dual to high accuracy.
    Reference {
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
    },
    /// Run dual methods and write traces, certificates and a summary.
    Run {
        instance: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Comma-separated subset of pg,fista,tseng; may be empty.
        #[arg(long, default_value = "pg,fista,tseng")]
        methods: String,
        #[arg(long, default_value_t = 10_000)]
        k: usize,
        /// linear | compact | lipschitz | explicit:<val>
        #[arg(long, default_value = "linear")]
        alpha_rule: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Re-check the certificate reports in a run directory.
    Verify { dir: PathBuf },
}

fn parse_methods(s: &str) -> dualcert::Result<Vec<MethodKind>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(MethodKind::parse)
        .collect()
}

fn run(cli: Cli) -> dualcert::Result<ExitCode> {
    match cli.command {
        Command::Gen {
            seed,
            n,
            m,
            p,
            q,
            gamma,
            output,
        } => {
            let cfg = GeneratorConfig {
                seed,
                n,
                m,
                p,
                q,
                gamma,
                ..GeneratorConfig::default()
            };
            InstanceFile::from_instance(&generate_instance(&cfg)?)?.write(&output)?;
        }
        Command::Reference {
            instance,
            output,
            budget,
        } => {
            let inst = InstanceFile::read(&instance)?.to_instance()?;
            let r = compute_reference(&inst, budget)?;
            r.write(&output)?;
            println!(
                "f* = {:.15e}  d* = {:.15e}  gap = {:.3e}  iterations = {}",
                r.f_star, r.d_star, r.duality_gap, r.iterations
            );
        }
        Command::Run {
            instance,
            reference,
            methods,
            k,
            alpha_rule,
            output,
        } => {
            let methods = parse_methods(&methods)?;
            if methods.is_empty() {
                return Ok(ExitCode::SUCCESS);
            }
            let inst = InstanceFile::read(&instance)?.to_instance()?;
            let reference = ReferenceSolution::read(&reference)?;
            let cfg = ExperimentConfig::new(methods, k, alpha_rule.parse::<AlphaRule>()?);
            let out = run_experiment(&inst, &reference, &cfg, &output)?;
            for m in &out.methods {
                println!(
                    "{:<6} {} records, {} certificate violations",
                    m.trace.method,
                    m.trace.records.len(),
                    m.report.total_violations()
                );
            }
        }
        Command::Verify { dir } => {
            let outcome = verify_report(&dir)?;
            print!("{outcome}");
            if !outcome.passed() {
                eprintln!("violated: {}", outcome.violated_families().join(", "));
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::BudgetExhausted { best, .. } = &e {
                eprintln!("best iterate: d = {:.15e}, f = {:.15e}", best.d_star, best.f_star);
            }
            ExitCode::from(2)
        }
    }
}
