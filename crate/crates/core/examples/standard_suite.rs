//! The six built-in scenarios and the dumbbell, run in parallel, with one
//! line per scenario.

use pme_ricci::runner::{batch_exit_code, dumbbell, run_batch, standard_suite};

fn main() {
    let mut configs = standard_suite();
    configs.push(dumbbell());
    let summaries = run_batch(&configs, 0);
    for s in &summaries {
        let worst = s.margins.iter().map(|m| m.worst_margin).fold(f64::NEG_INFINITY, f64::max);
        let drift = s.mass.as_ref().map_or(f64::NAN, |m| m.max_relative_drift);
        println!(
            "{:<20} {:<20} worst margin {worst:>9.4}  mass drift {drift:.1e}  {:.1}s",
            s.scenario,
            format!("{:?}", s.status),
            s.wall_clock_seconds
        );
        for skipped in &s.skipped {
            println!("    skipped: {skipped}");
        }
    }
    println!("batch exit code {}", batch_exit_code(&summaries));
}
