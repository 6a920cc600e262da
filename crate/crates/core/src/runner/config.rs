//! Sectioned `key = value` scenario files.

use std::fmt;
use std::path::PathBuf;

use ini::Ini;
use serde::{Deserialize, Serialize};

use crate::geometry::ManifoldState;
use crate::harnack::{Variant, PATH_TOLERANCE, TOL_INEQ};
use crate::pme::{InitialData, PmeParams};
use crate::ricci_flow::DEFAULT_CFL;

/// Every accepted key as `(section, key, meaning)`.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("scenario", "name", "scenario identifier, used as the output subdirectory"),
    ("manifold", "kind", "flat_torus | round_sphere | rotsym_surface"),
    ("manifold", "n", "dimension (round_sphere; the torus takes it from lengths)"),
    ("manifold", "r0_sq", "initial squared radius (round_sphere)"),
    ("manifold", "lengths", "comma-separated side lengths (flat_torus)"),
    ("manifold", "cells", "grid cells N >= 16"),
    ("manifold", "profile", "round | legendre2 | tabulated (rotsym_surface log conformal factor)"),
    ("manifold", "profile_amplitude", "amplitude of the legendre2 profile phi = A P2(cos theta)"),
    ("manifold", "profile_values", "comma-separated phi at the N+1 polar nodes (tabulated)"),
    ("pme", "p", "exponent p > 1"),
    ("pme", "a", "curvature forcing coefficient (default 1)"),
    ("pme", "u0", "constant | cosine_bump | tabulated"),
    ("pme", "u0_value", "value of the constant initial data"),
    ("pme", "u0_base", "base of the cosine bump"),
    ("pme", "u0_amplitude", "amplitude of the cosine bump"),
    ("pme", "u0_mode", "integer mode of the cosine bump"),
    ("pme", "u0_values", "comma-separated nodal initial data (tabulated)"),
    ("pme", "t0", "start time (default 0)"),
    ("pme", "T", "end time"),
    ("pme", "dt", "output step; substeps are chosen for stability"),
    ("pme", "store_every", "store every k-th output step (default 1)"),
    ("pme", "c_cfl", "stability fraction in (0, 1] (default 0.2)"),
    ("checks", "variants", "comma-separated estimate variants: sharp_b2, general_b, b1_limit, b1_bounded_gradient"),
    ("checks", "b_values", "comma-separated b >= 1 for general_b and the path checks"),
    ("checks", "identities", "comma-separated: f_evolution, f_rearranged, quotient_rule, bochner, yz_decomposition"),
    ("checks", "lyh", "true | false: trace curvature estimate along -grad v"),
    ("checks", "lnvv_alpha", "comma-separated alpha > 1 for the flat-space estimate (torus only)"),
    ("checks", "curves", "number of random space-time curves (0 disables the path checks)"),
    ("checks", "seed", "curve sampling seed"),
    ("checks", "t_min", "elapsed time excluded at the start (default 5% of the run)"),
    ("tolerances", "ineq", "pass threshold of the pointwise margins (default 1e-2)"),
    ("tolerances", "path", "allowed negative slack of the path checks (default 1e-6)"),
    ("tolerances", "identity", "pass threshold of identity residuals (default 1e-2)"),
    ("tolerances", "lyh", "pass threshold of the trace curvature margin (default 1e-2)"),
    ("tolerances", "mass", "allowed relative mass drift (default 1e-6)"),
    ("output", "dir", "output directory (overridden by --out)"),
];

/// Long help text listing every key.
pub fn key_reference() -> String {
    let mut out = String::from("Config keys:\n");
    let mut section = "";
    for (s, k, meaning) in KEYS {
        if *s != section {
            out.push_str(&format!("  [{s}]\n"));
            section = s;
        }
        out.push_str(&format!("    {k:<18} {meaning}\n"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Round,
    /// `phi = amplitude * P2(cos theta)`; large amplitudes pinch the equator.
    Legendre2 { amplitude: f64 },
    Tabulated { values: Vec<f64> },
}

impl Profile {
    pub fn phi(&self, theta: f64) -> f64 {
        match self {
            Profile::Round => 0.0,
            Profile::Legendre2 { amplitude } => {
                let c = theta.cos();
                amplitude * 0.5 * (3.0 * c * c - 1.0)
            }
            Profile::Tabulated { .. } => unreachable!("tabulated profiles are used directly"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    FlatTorus { lengths: Vec<f64>, cells: usize },
    RoundSphere { n: usize, r0_sq: f64, cells: usize },
    RotsymSurface { cells: usize, profile: Profile },
}

impl ManifoldSpec {
    pub fn cells(&self) -> usize {
        match self {
            ManifoldSpec::FlatTorus { cells, .. }
            | ManifoldSpec::RoundSphere { cells, .. }
            | ManifoldSpec::RotsymSurface { cells, .. } => *cells,
        }
    }

    /// Same manifold on `factor` times as many cells. Tabulated data cannot
    /// be refined.
    pub fn refined(&self, factor: usize) -> Option<ManifoldSpec> {
        let mut out = self.clone();
        match &mut out {
            ManifoldSpec::FlatTorus { cells, .. } | ManifoldSpec::RoundSphere { cells, .. } => *cells *= factor,
            ManifoldSpec::RotsymSurface { cells, profile } => {
                if matches!(profile, Profile::Tabulated { .. }) {
                    return None;
                }
                *cells *= factor;
            }
        }
        Some(out)
    }

    pub fn build(&self) -> crate::Result<ManifoldState> {
        match self {
            ManifoldSpec::FlatTorus { lengths, cells } => ManifoldState::flat_torus(lengths.clone(), *cells),
            ManifoldSpec::RoundSphere { n, r0_sq, cells } => ManifoldState::round_sphere(*n, *r0_sq, *cells),
            ManifoldSpec::RotsymSurface { profile: Profile::Tabulated { values }, .. } => {
                ManifoldState::rotsym_surface(values.clone())
            }
            ManifoldSpec::RotsymSurface { cells, profile } => ManifoldState::rotsym_from_fn(*cells, |t| profile.phi(t)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    FEvolution,
    FRearranged,
    QuotientRule,
    Bochner,
    YzDecomposition,
}

impl IdentityId {
    pub const ALL: [IdentityId; 5] = [
        IdentityId::FEvolution,
        IdentityId::FRearranged,
        IdentityId::QuotientRule,
        IdentityId::Bochner,
        IdentityId::YzDecomposition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::FEvolution => "f_evolution",
            IdentityId::FRearranged => "f_rearranged",
            IdentityId::QuotientRule => "quotient_rule",
            IdentityId::Bochner => "bochner",
            IdentityId::YzDecomposition => "yz_decomposition",
        }
    }

    pub fn parse(s: &str) -> Option<IdentityId> {
        IdentityId::ALL.into_iter().find(|i| i.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckList {
    pub variants: Vec<Variant>,
    pub b_values: Vec<f64>,
    pub identities: Vec<IdentityId>,
    pub lyh: bool,
    pub lnvv_alpha: Vec<f64>,
    pub curves: usize,
    pub seed: u64,
    pub t_min: Option<f64>,
}

impl CheckList {
    pub fn none() -> CheckList {
        CheckList {
            variants: vec![],
            b_values: vec![],
            identities: vec![],
            lyh: false,
            lnvv_alpha: vec![],
            curves: 0,
            seed: 0,
            t_min: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
            && self.identities.is_empty()
            && !self.lyh
            && self.lnvv_alpha.is_empty()
            && (self.curves == 0 || self.b_values.is_empty())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ineq: f64,
    pub path: f64,
    pub identity: f64,
    pub lyh: f64,
    pub mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ineq: TOL_INEQ, path: PATH_TOLERANCE, identity: 1e-2, lyh: TOL_INEQ, mass: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub manifold: ManifoldSpec,
    pub pme: PmeParams,
    pub checks: CheckList,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Grid `2^k` times finer, output step `4^k` times smaller, same stored
    /// times.
    pub fn refined(&self, k: u32) -> Option<ScenarioConfig> {
        let mut out = self.clone();
        out.manifold = self.manifold.refined(1 << k)?;
        if matches!(self.pme.initial, InitialData::Tabulated { .. }) {
            return None;
        }
        let f = 4usize.pow(k);
        out.pme.dt /= f as f64;
        out.pme.store_every *= f;
        Some(out)
    }
}

/// Every problem found in a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn suggest(section: &str, key: &str) -> Option<String> {
    let lower = key.to_ascii_lowercase();
    KEYS.iter()
        .map(|(s, k, _)| {
            let mut score = strsim::normalized_damerau_levenshtein(&lower, k);
            if *s == section {
                score += 0.1;
                // a truncated or extended spelling of a key in the same section
                if k.len() > 1 && (k.contains(lower.as_str()) || lower.contains(k)) {
                    score += 0.4;
                }
            }
            (score, s, k)
        })
        .filter(|(score, _, _)| *score >= 0.5)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s, k)| format!("{s}.{k}"))
}

/// Raw values of one file with typed accessors that record every failure.
struct Reader {
    entries: Vec<(String, String, String)>,
    issues: Vec<String>,
}

impl Reader {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.entries.iter().find(|(s, k, _)| s == section && k == key).map(|(_, _, v)| v.as_str())
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.raw(section, key).is_some()
    }

    fn parsed<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<T> {
        let raw = self.raw(section, key)?.to_string();
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.issues.push(format!("{section}.{key} = {raw:?} is not {what}"));
                None
            }
        }
    }

    fn required<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<T> {
        if !self.has(section, key) {
            self.issues.push(format!("missing required key {section}.{key}"));
            return None;
        }
        self.parsed(section, key, what)
    }

    fn real(&mut self, section: &str, key: &str) -> Option<f64> {
        let v: f64 = self.parsed(section, key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            self.issues.push(format!("{section}.{key} must be finite"));
            None
        }
    }

    fn required_real(&mut self, section: &str, key: &str) -> Option<f64> {
        if !self.has(section, key) {
            self.issues.push(format!("missing required key {section}.{key}"));
            return None;
        }
        self.real(section, key)
    }

    fn list<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<Vec<T>> {
        let raw = self.raw(section, key)?.to_string();
        let mut out = Vec::new();
        for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse::<T>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.issues.push(format!("{section}.{key}: {item:?} is not {what}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn names(&self, section: &str, key: &str) -> Vec<String> {
        self.raw(section, key)
            .map(|raw| raw.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
            .unwrap_or_default()
    }

    /// Keys present but meaningless for the chosen options.
    fn forbid(&mut self, section: &str, keys: &[&str], reason: &str) {
        for key in keys {
            if self.has(section, key) {
                self.issues.push(format!("{section}.{key} is not used {reason}"));
            }
        }
    }
}

/// Parse and validate a scenario file, reporting all problems at once.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let ini = Ini::load_from_str(text).map_err(|e| ConfigError { issues: vec![format!("syntax: {e}")] })?;
    let mut reader = Reader { entries: Vec::new(), issues: Vec::new() };
    for (section, props) in ini.iter() {
        let section = section.unwrap_or("");
        for (key, value) in props.iter() {
            let known = KEYS.iter().any(|(s, k, _)| *s == section && *k == key);
            if !known {
                let hint = suggest(section, key).map(|s| format!("; did you mean {s}?")).unwrap_or_default();
                let place = if section.is_empty() { String::from("outside any section") } else { format!("in [{section}]") };
                reader.issues.push(format!("unknown key {key:?} {place}{hint}"));
                continue;
            }
            if reader.has(section, key) {
                reader.issues.push(format!("duplicate key {section}.{key}"));
                continue;
            }
            reader.entries.push((section.to_string(), key.to_string(), value.trim().to_string()));
        }
    }
    let r = &mut reader;

    let name = r.raw("scenario", "name").map(String::from);
    if name.is_none() {
        r.issues.push("missing required key scenario.name".into());
    }
    if let Some(n) = &name {
        if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            r.issues.push(format!("scenario.name {n:?} must be nonempty and use only letters, digits, '-' and '_'"));
        }
    }

    let manifold = parse_manifold(r);
    let pme = parse_pme(r, manifold.as_ref());
    let checks = parse_checks(r, manifold.as_ref());
    let tolerances = parse_tolerances(r);
    let output = r.raw("output", "dir").map(PathBuf::from);

    if reader.issues.is_empty() {
        Ok(ScenarioConfig {
            name: name.expect("checked"),
            manifold: manifold.expect("checked"),
            pme: pme.expect("checked"),
            checks: checks.expect("checked"),
            tolerances: tolerances.expect("checked"),
            output,
        })
    } else {
        Err(ConfigError { issues: reader.issues })
    }
}

fn parse_manifold(r: &mut Reader) -> Option<ManifoldSpec> {
    let kind = r.raw("manifold", "kind").map(String::from);
    let cells: Option<usize> = r.required("manifold", "cells", "a nonnegative integer");
    if let Some(c) = cells {
        if c < crate::geometry::MIN_CELLS {
            r.issues.push(format!("manifold.cells = {c} is below the minimum {}", crate::geometry::MIN_CELLS));
        }
    }
    let profile_keys = ["profile", "profile_amplitude", "profile_values"];
    let spec = match kind.as_deref() {
        None => {
            r.issues.push("missing required key manifold.kind".into());
            None
        }
        Some("flat_torus") => {
            r.forbid("manifold", &["n", "r0_sq"], "by flat_torus");
            r.forbid("manifold", &profile_keys, "by flat_torus");
            let lengths: Option<Vec<f64>> = if r.has("manifold", "lengths") {
                r.list("manifold", "lengths", "a number")
            } else {
                r.issues.push("missing required key manifold.lengths".into());
                None
            };
            let lengths = lengths.and_then(|l| {
                if l.is_empty() || l.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    r.issues.push(format!("manifold.lengths must be positive, got {l:?}"));
                    None
                } else {
                    Some(l)
                }
            });
            Some(ManifoldSpec::FlatTorus { lengths: lengths?, cells: cells? })
        }
        Some("round_sphere") => {
            r.forbid("manifold", &["lengths"], "by round_sphere");
            r.forbid("manifold", &profile_keys, "by round_sphere");
            let n: Option<usize> = r.required("manifold", "n", "a nonnegative integer");
            if let Some(n) = n {
                if n < 2 {
                    r.issues.push(format!("manifold.n = {n} must be at least 2 for a sphere"));
                }
            }
            let r0 = r.required_real("manifold", "r0_sq");
            if let Some(x) = r0 {
                if x <= 0.0 {
                    r.issues.push(format!("manifold.r0_sq = {x} must be positive"));
                }
            }
            Some(ManifoldSpec::RoundSphere { n: n?, r0_sq: r0?, cells: cells? })
        }
        Some("rotsym_surface") => {
            r.forbid("manifold", &["lengths", "r0_sq"], "by rotsym_surface");
            if let Some(n) = r.parsed::<usize>("manifold", "n", "an integer") {
                if n != 2 {
                    r.issues.push(format!("manifold.n = {n}: rotsym_surface is two-dimensional"));
                }
            }
            let profile = match r.raw("manifold", "profile").unwrap_or("round") {
                "round" => {
                    r.forbid("manifold", &["profile_amplitude", "profile_values"], "by the round profile");
                    Some(Profile::Round)
                }
                "legendre2" => {
                    r.forbid("manifold", &["profile_values"], "by the legendre2 profile");
                    r.required_real("manifold", "profile_amplitude").map(|amplitude| Profile::Legendre2 { amplitude })
                }
                "tabulated" => {
                    r.forbid("manifold", &["profile_amplitude"], "by the tabulated profile");
                    if !r.has("manifold", "profile_values") {
                        r.issues.push("missing required key manifold.profile_values".into());
                    }
                    let values: Option<Vec<f64>> = r.list("manifold", "profile_values", "a number");
                    match (values, cells) {
                        (Some(v), Some(c)) if v.len() != c + 1 => {
                            r.issues.push(format!("manifold.profile_values has {} entries, need cells + 1 = {}", v.len(), c + 1));
                            None
                        }
                        (v, _) => v.map(|values| Profile::Tabulated { values }),
                    }
                }
                other => {
                    r.issues.push(format!("manifold.profile = {other:?}; expected round, legendre2 or tabulated"));
                    None
                }
            };
            Some(ManifoldSpec::RotsymSurface { cells: cells?, profile: profile? })
        }
        Some(other) => {
            r.issues.push(format!("manifold.kind = {other:?}; expected flat_torus, round_sphere or rotsym_surface"));
            None
        }
    };
    spec
}

fn parse_initial(r: &mut Reader, manifold: Option<&ManifoldSpec>) -> Option<InitialData> {
    let all = ["u0_value", "u0_base", "u0_amplitude", "u0_mode", "u0_values"];
    let kind = r.raw("pme", "u0").unwrap_or("constant").to_string();
    let own: &[&str] = match kind.as_str() {
        "constant" => &["u0_value"],
        "cosine_bump" => &["u0_base", "u0_amplitude", "u0_mode"],
        "tabulated" => &["u0_values"],
        other => {
            r.issues.push(format!("pme.u0 = {other:?}; expected constant, cosine_bump or tabulated"));
            return None;
        }
    };
    let others: Vec<&str> = all.iter().copied().filter(|k| !own.contains(k)).collect();
    r.forbid("pme", &others, &format!("by u0 = {kind}"));
    let data = match kind.as_str() {
        "constant" => {
            let value = if r.has("pme", "u0_value") { r.real("pme", "u0_value")? } else { 1.0 };
            if value <= 0.0 {
                r.issues.push(format!("pme.u0_value = {value} must be positive"));
                return None;
            }
            InitialData::Constant { value }
        }
        "cosine_bump" => {
            let base = r.required_real("pme", "u0_base");
            let amplitude = r.required_real("pme", "u0_amplitude");
            let mode: Option<u32> = r.required("pme", "u0_mode", "a nonnegative integer");
            let (base, amplitude, mode) = (base?, amplitude?, mode?);
            if amplitude.abs() >= base {
                r.issues.push(format!(
                    "cosine bump is not positive: |u0_amplitude| = {} >= u0_base = {base}",
                    amplitude.abs()
                ));
                return None;
            }
            InitialData::CosineBump { base, amplitude, mode }
        }
        _ => {
            if !r.has("pme", "u0_values") {
                r.issues.push("missing required key pme.u0_values".into());
                return None;
            }
            let values: Vec<f64> = r.list("pme", "u0_values", "a number")?;
            if values.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                r.issues.push("pme.u0_values must all be positive".into());
                return None;
            }
            if let Some(m) = manifold {
                let need = match m {
                    ManifoldSpec::FlatTorus { cells, .. } => *cells,
                    _ => m.cells() + 1,
                };
                if values.len() != need {
                    r.issues.push(format!("pme.u0_values has {} entries, the grid has {need} nodes", values.len()));
                    return None;
                }
            }
            InitialData::Tabulated { values }
        }
    };
    Some(data)
}

fn parse_pme(r: &mut Reader, manifold: Option<&ManifoldSpec>) -> Option<PmeParams> {
    let p = r.required_real("pme", "p");
    let a = if r.has("pme", "a") { r.real("pme", "a") } else { Some(1.0) };
    let initial = parse_initial(r, manifold);
    let t0 = if r.has("pme", "t0") { r.real("pme", "t0") } else { Some(0.0) };
    let t_end = r.required_real("pme", "T");
    let dt = r.required_real("pme", "dt");
    let store_every: Option<usize> =
        if r.has("pme", "store_every") { r.parsed("pme", "store_every", "a positive integer") } else { Some(1) };
    let c_cfl = if r.has("pme", "c_cfl") { r.real("pme", "c_cfl") } else { Some(DEFAULT_CFL) };

    if let Some(p) = p {
        if p <= 1.0 {
            r.issues.push(format!("pme.p = {p} must exceed 1"));
        }
    }
    if let Some(t0) = t0 {
        if t0 < 0.0 {
            r.issues.push(format!("pme.t0 = {t0} must be nonnegative"));
        }
    }
    if let (Some(t0), Some(t)) = (t0, t_end) {
        if t <= t0 {
            r.issues.push(format!("pme.T = {t} must exceed t0 = {t0}"));
        }
    }
    if let Some(dt) = dt {
        if dt <= 0.0 {
            r.issues.push(format!("pme.dt = {dt} must be positive"));
        }
    }
    if let Some(c) = c_cfl {
        if !(c > 0.0 && c <= 1.0) {
            r.issues.push(format!("pme.c_cfl = {c} must lie in (0, 1]"));
        }
    }
    if store_every == Some(0) {
        r.issues.push("pme.store_every must be at least 1".into());
    }
    if let (Some(ManifoldSpec::RoundSphere { n, r0_sq, .. }), Some(t)) = (manifold, t_end) {
        let ext = r0_sq / (2.0 * (*n as f64 - 1.0));
        if t >= ext {
            r.issues.push(format!(
                "pme.T = {t} is past extinction at t={ext}: r0_sq/(2(n-1)) = {r0_sq}/(2*({n}-1)) = {ext}"
            ));
        }
    }
    let params = PmeParams {
        p: p?,
        a: a?,
        initial: initial?,
        t0: t0?,
        t_end: t_end?,
        dt: dt?,
        store_every: store_every?,
        c_cfl: c_cfl?,
    };
    if params.t_end > params.t0 && params.dt > 0.0 && params.store_every > 0 {
        let steps = params.macro_steps();
        let span = params.t_end - params.t0;
        if steps == 0 || (steps as f64 * params.dt - span).abs() > 1e-9 * span {
            r.issues.push(format!("pme.dt = {} does not divide T - t0 = {span}", params.dt));
        } else if !steps.is_multiple_of(params.store_every) {
            r.issues.push(format!("pme.store_every = {} does not divide the {steps} output steps", params.store_every));
        } else if params.stored_count() < 3 {
            r.issues.push(format!("only {} stored states; need at least 3", params.stored_count()));
        }
    }
    Some(params)
}

fn parse_checks(r: &mut Reader, manifold: Option<&ManifoldSpec>) -> Option<CheckList> {
    let mut ok = true;
    let mut variants = Vec::new();
    for name in r.names("checks", "variants") {
        match Variant::parse(&name) {
            Some(v) => variants.push(v),
            None => {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                r.issues.push(format!("checks.variants: unknown variant {name:?}; expected one of {}", names.join(", ")));
                ok = false;
            }
        }
    }
    let mut identities = Vec::new();
    for name in r.names("checks", "identities") {
        match IdentityId::parse(&name) {
            Some(i) => identities.push(i),
            None => {
                let names: Vec<&str> = IdentityId::ALL.iter().map(|i| i.name()).collect();
                r.issues.push(format!("checks.identities: unknown identity {name:?}; expected one of {}", names.join(", ")));
                ok = false;
            }
        }
    }
    let a = if r.has("pme", "a") { r.real("pme", "a") } else { Some(1.0) };
    for id in [IdentityId::FRearranged, IdentityId::YzDecomposition] {
        if identities.contains(&id) && a.is_some_and(|a| a != 1.0) {
            r.issues.push(format!("checks.identities: {} needs pme.a = 1", id.name()));
            ok = false;
        }
    }
    let b_values: Vec<f64> = if r.has("checks", "b_values") { r.list("checks", "b_values", "a number")? } else { vec![] };
    if let Some(b) = b_values.iter().find(|b| !(b.is_finite() && **b >= 1.0)) {
        r.issues.push(format!("checks.b_values: b = {b} must be at least 1"));
        ok = false;
    }
    if variants.contains(&Variant::GeneralB) && b_values.is_empty() {
        r.issues.push("checks.variants lists general_b but checks.b_values is empty".into());
        ok = false;
    }
    let lyh = if r.has("checks", "lyh") { r.parsed("checks", "lyh", "true or false")? } else { false };
    let lnvv_alpha: Vec<f64> =
        if r.has("checks", "lnvv_alpha") { r.list("checks", "lnvv_alpha", "a number")? } else { vec![] };
    if let Some(a) = lnvv_alpha.iter().find(|a| !(**a > 1.0 && a.is_finite())) {
        r.issues.push(format!("checks.lnvv_alpha: alpha = {a} must exceed 1"));
        ok = false;
    }
    if !lnvv_alpha.is_empty() && !matches!(manifold, None | Some(ManifoldSpec::FlatTorus { .. })) {
        r.issues.push("checks.lnvv_alpha needs manifold.kind = flat_torus".into());
        ok = false;
    }
    let curves: usize = if r.has("checks", "curves") { r.parsed("checks", "curves", "a nonnegative integer")? } else { 0 };
    if curves > 0 && b_values.is_empty() {
        r.issues.push("checks.curves > 0 needs checks.b_values".into());
        ok = false;
    }
    let seed: u64 = if r.has("checks", "seed") { r.parsed("checks", "seed", "a nonnegative integer")? } else { 0 };
    let t_min = if r.has("checks", "t_min") { Some(r.real("checks", "t_min")?) } else { None };
    if let Some(t) = t_min {
        if t <= 0.0 {
            r.issues.push(format!("checks.t_min = {t} must be positive"));
            ok = false;
        }
    }
    ok.then_some(CheckList { variants, b_values, identities, lyh, lnvv_alpha, curves, seed, t_min })
}

fn parse_tolerances(r: &mut Reader) -> Option<Tolerances> {
    let mut tol = Tolerances::default();
    let mut ok = true;
    for (key, slot) in [
        ("ineq", &mut tol.ineq),
        ("path", &mut tol.path),
        ("identity", &mut tol.identity),
        ("lyh", &mut tol.lyh),
        ("mass", &mut tol.mass),
    ] {
        if r.has("tolerances", key) {
            match r.real("tolerances", key) {
                Some(v) if v >= 0.0 => *slot = v,
                Some(v) => {
                    r.issues.push(format!("tolerances.{key} = {v} must be nonnegative"));
                    ok = false;
                }
                None => ok = false,
            }
        }
    }
    ok.then_some(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = "[scenario]\nname = s\n[manifold]\nkind = round_sphere\nn = 2\nr0_sq = 1\ncells = 64\n[pme]\np = 2\nT = 0.2\ndt = 1e-4\n";

    #[test]
    fn minimal_sphere_is_valid() {
        let cfg = parse_config(SPHERE).unwrap();
        assert_eq!(cfg.manifold, ManifoldSpec::RoundSphere { n: 2, r0_sq: 1.0, cells: 64 });
        assert_eq!(cfg.pme.initial, InitialData::Constant { value: 1.0 });
        assert!(cfg.checks.is_empty());
    }

    #[test]
    fn extinction_shows_arithmetic() {
        let err = parse_config(&SPHERE.replace("T = 0.2", "T = 0.6")).unwrap_err();
        assert_eq!(err.issues.len(), 1, "{err}");
        assert!(err.issues[0].contains("extinction at t=0.5"), "{err}");
        assert!(err.issues[0].contains("1/(2*(2-1))"), "{err}");
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let err = parse_config(&format!("{SPHERE}[checks]\nalpha = 2\n")).unwrap_err();
        assert!(err.issues[0].contains("unknown key \"alpha\""), "{err}");
        assert!(err.issues[0].contains("did you mean checks.lnvv_alpha?"), "{err}");
        let err = parse_config(&SPHERE.replace("cells", "cels")).unwrap_err();
        assert!(err.to_string().contains("manifold.cells?"), "{err}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = SPHERE.replace("p = 2", "p = 0.5").replace("cells = 64", "cells = 4") + "[checks]\nvariants = sharp\n";
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues.len(), 3, "{err}");
    }

    #[test]
    fn every_key_is_documented_once() {
        for (i, (s, k, _)) in KEYS.iter().enumerate() {
            assert!(!KEYS[..i].iter().any(|(s2, k2, _)| s2 == s && k2 == k));
            assert!(key_reference().contains(k));
        }
    }

    #[test]
    fn refinement_keeps_stored_times() {
        let cfg = parse_config(&SPHERE.replace("dt = 1e-4", "dt = 1e-3\nstore_every = 10")).unwrap();
        let fine = cfg.refined(1).unwrap();
        assert_eq!(fine.manifold.cells(), 128);
        assert_eq!(fine.pme.stored_count(), cfg.pme.stored_count());
        assert_eq!(fine.pme.macro_steps(), 4 * cfg.pme.macro_steps());
    }
}
