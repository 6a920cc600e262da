use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pme_ricci::harnack::{constants, Variant};
use pme_ricci::runner::{
    batch_exit_code, emit_report, key_reference, margin_table, parse_config, run_batch, standard_suite, RunSummary,
};

const CONFIG_ERROR: u8 = 4;

#[derive(Parser)]
#[command(version, about = "Forced porous medium equation under Ricci flow, with Harnack margin checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    #[command(after_long_help = key_reference())]
    Run {
        config: PathBuf,
        /// Output root; files go to DIR/<scenario name>/.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        /// Also run K refinements (h/2, dt/4 each) and report orders.
        #[arg(long, value_name = "K", default_value_t = 0)]
        refine: u32,
    },
    /// Run the six built-in scenarios.
    Suite {
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
    },
    /// Print the Harnack constants of every variant.
    CheckConstants { n: usize, p: f64, b: f64 },
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn write_all(summaries: &[RunSummary], root: &Path) -> bool {
    let mut ok = true;
    for s in summaries {
        print!("{}", margin_table(s));
        println!();
        if let Err(e) = emit_report(s, &root.join(&s.scenario)) {
            eprintln!("cannot write report for {}: {e}", s.scenario);
            ok = false;
        }
    }
    ok
}

fn finish(summaries: Vec<RunSummary>, root: &Path) -> ExitCode {
    let wrote = write_all(&summaries, root);
    let code = batch_exit_code(&summaries);
    ExitCode::from(if wrote { code as u8 } else { 2 })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, threads, refine } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", config.display());
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: invalid config\n{e}", config.display());
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let root = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let summaries = with_threads(threads, || run_batch(std::slice::from_ref(&cfg), refine));
            finish(summaries, &root)
        }
        Command::Suite { out, threads } => {
            let summaries = with_threads(threads, || run_batch(&standard_suite(), 0));
            finish(summaries, &out)
        }
        Command::CheckConstants { n, p, b } => {
            println!("{:<22} {:>6} {:>20} {:>20} {:>20} {:>20}", "variant", "b", "alpha", "d", "C0", "kappa");
            for variant in Variant::ALL {
                match constants(n, p, b, variant) {
                    Ok(c) => println!(
                        "{:<22} {:>6} {:>20} {:>20} {:>20} {:>20}",
                        variant.name(),
                        c.b,
                        c.alpha,
                        c.d,
                        c.c0,
                        c.kappa
                    ),
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::from(CONFIG_ERROR);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}
