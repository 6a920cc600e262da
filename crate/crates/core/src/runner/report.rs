//! Files written for one scenario: `summary.json`, `timeseries.csv` and
//! `margins.txt`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::RunSummary;

pub const CSV_FIXED_COLUMNS: [&str; 7] = ["t", "mass", "R_max_t", "u_min", "u_max", "v_min", "v_max"];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per stored time. `{}` formatting of `f64` is the shortest
/// string that parses back to the same value.
pub fn timeseries_csv(s: &RunSummary) -> String {
    let ts = &s.series;
    let mut out = CSV_FIXED_COLUMNS.join(",");
    for b in &ts.margin_b {
        write!(out, ",worst_F_margin_b{b}").unwrap();
    }
    out.push('\n');
    for k in 0..ts.t.len() {
        let fixed = [ts.t[k], ts.mass[k], ts.r_max_t[k], ts.u_min[k], ts.u_max[k], ts.v_min[k], ts.v_max[k]];
        let cells: Vec<String> = fixed
            .iter()
            .map(|x| x.to_string())
            .chain(ts.worst_f_margin.iter().map(|col| opt(col[k])))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Human-readable table of every check.
pub fn margin_table(s: &RunSummary) -> String {
    let mut out = String::new();
    writeln!(out, "scenario {}  status {:?}", s.scenario, s.status).unwrap();
    if let Some(e) = &s.error {
        writeln!(out, "error: {e}").unwrap();
    }
    if let Some(h) = &s.hypotheses {
        writeln!(
            out,
            "R in [{}, {}]  curvature_nonneg {}  pre_extinction {}",
            h.r_min, h.r_max, h.curvature_nonneg, h.pre_extinction
        )
        .unwrap();
    }
    if let Some(m) = &s.mass {
        writeln!(out, "mass drift {:e} (tol {:e}) {}", m.max_relative_drift, m.tolerance, verdict(m.pass)).unwrap();
    }
    if !s.margins.is_empty() || !s.paths.is_empty() {
        writeln!(out, "\n{:<28} {:>14} {:>10} {:>6} {:>12} {:>10}", "estimate", "worst_margin", "tol", "pass", "x", "t")
            .unwrap();
    }
    let margins = s.margins.iter().chain(s.paths.iter().flat_map(|p| [&p.multiplicative, &p.additive]));
    for m in margins {
        writeln!(
            out,
            "{:<28} {:>14.6e} {:>10.1e} {:>6} {:>12.6} {:>10.6}",
            m.estimate,
            m.worst_margin,
            m.tolerance,
            verdict(m.pass),
            m.location.coordinate,
            m.location.t
        )
        .unwrap();
    }
    if !s.identities.is_empty() {
        writeln!(out, "\n{:<28} {:>14} {:>10} {:>6}", "identity", "residual", "tol", "pass").unwrap();
        for i in &s.identities {
            writeln!(
                out,
                "{:<28} {:>14.6e} {:>10.1e} {:>6}",
                i.residual.id,
                i.residual.max_abs_residual,
                i.tolerance,
                verdict(i.pass)
            )
            .unwrap();
        }
    }
    if let Some(r) = &s.refinement {
        writeln!(out, "\nrefinement over {} levels", r.levels.len()).unwrap();
        for m in &r.margins {
            writeln!(out, "{:<28} {:>14.6e} -> {:>14.6e}  {:?}", m.estimate, m.coarse, m.fine, m.attribution).unwrap();
        }
        for i in &r.identities {
            let orders: Vec<String> = i.orders.iter().map(|o| format!("{o:.2}")).collect();
            writeln!(out, "{:<28} orders [{}] {}", i.id, orders.join(", "), verdict(i.pass)).unwrap();
        }
    }
    for skip in &s.skipped {
        writeln!(out, "skipped {skip}").unwrap();
    }
    out
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "FAIL"
    }
}

/// Write the three files into `dir`, creating it if needed.
pub fn emit_report(s: &RunSummary, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(s).map_err(io::Error::other)? + "\n";
    let files = [
        ("summary.json", json),
        ("timeseries.csv", timeseries_csv(s)),
        ("margins.txt", margin_table(s)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
