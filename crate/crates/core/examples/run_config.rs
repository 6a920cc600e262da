//! Parse a scenario from INI text, run it with one refinement level and
//! write the report files to a temporary directory.

use pme_ricci::runner::{emit_report, margin_table, parse_config, run_refined};

const SCENARIO: &str = "
[scenario]
name = example-surface

[manifold]
kind = rotsym_surface
cells = 64
profile = legendre2
profile_amplitude = 0.05

[pme]
p = 2
u0 = cosine_bump
u0_base = 1
u0_amplitude = 0.2
u0_mode = 2
T = 0.05
dt = 2.5e-4
store_every = 4

[checks]
variants = sharp_b2, general_b
b_values = 1.5, 3
identities = f_evolution, bochner
lyh = true
curves = 20
seed = 1
";

fn main() {
    // A misspelled key is reported with a suggestion.
    match parse_config(&SCENARIO.replace("u0_mode", "u0_mod")) {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected:\n{e}\n"),
    }

    let cfg = parse_config(SCENARIO).expect("valid scenario");
    let summary = run_refined(&cfg, 1);
    print!("{}", margin_table(&summary));
    if let Some(r) = &summary.refinement {
        for id in &r.identities {
            println!("{}: residuals {:?}, orders {:?}", id.id, id.residuals, id.orders);
        }
    }
    let dir = std::env::temp_dir().join("pme-ricci-example");
    match emit_report(&summary, &dir.join(&summary.scenario)) {
        Ok(files) => files.iter().for_each(|f| println!("wrote {}", f.display())),
        Err(e) => eprintln!("cannot write report: {e}"),
    }
    std::process::exit(summary.status.exit_code());
}
