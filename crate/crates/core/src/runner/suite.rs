//! Built-in scenarios, kept as config files so the CLI and the library run
//! the same definitions.

use super::config::{parse_config, ScenarioConfig};

pub const STANDARD_NAMES: [&str; 6] =
    ["torus-constant", "torus-bump", "sphere-homogeneous", "sphere-bump", "rotsym-round", "rotsym-perturbed"];

const STANDARD: [&str; 6] = [
    include_str!("../../configs/torus-constant.ini"),
    include_str!("../../configs/torus-bump.ini"),
    include_str!("../../configs/sphere-homogeneous.ini"),
    include_str!("../../configs/sphere-bump.ini"),
    include_str!("../../configs/rotsym-round.ini"),
    include_str!("../../configs/rotsym-perturbed.ini"),
];

const DUMBBELL: &str = include_str!("../../configs/dumbbell.ini");

fn load(text: &str) -> ScenarioConfig {
    parse_config(text).unwrap_or_else(|e| panic!("built-in config is invalid:\n{e}"))
}

/// The six scenarios on which every estimate is expected to hold.
pub fn standard_suite() -> Vec<ScenarioConfig> {
    STANDARD.iter().map(|t| load(t)).collect()
}

/// Surface with a pinched equator and negative curvature there.
pub fn dumbbell() -> ScenarioConfig {
    load(DUMBBELL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_ins_parse_with_their_names() {
        let names: Vec<String> = standard_suite().into_iter().map(|c| c.name).collect();
        assert_eq!(names, STANDARD_NAMES);
        assert_eq!(dumbbell().name, "dumbbell");
    }
}
