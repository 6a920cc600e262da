//! Harnack constants, the quantity `F`, worst-case margins of the global
//! estimates and the integrated inequalities along space-time curves.

mod classical;
mod constants;
mod margins;
mod paths;

pub use classical::{classical_ab_check, Barenblatt};
pub use constants::{constants, kappa, HarnackConstants, Variant};
pub use margins::{
    attribute_refinement, default_t_min, harnack_f, lnvv_check, lyh_check, margin_field, margin_series, r_max,
    theorem_margin, HarnackF, Location, MarginReport, Refinement, DEFAULT_T_MIN_FRACTION, TOL_INEQ,
};
pub use paths::{
    curve_action, curve_energy_at_start, lattice_action, path_harnack_check, path_sweep, Anchor, PathBounds,
    PathCheck, PathForm, PathSweep, SpaceTimeCurve, PATH_TOLERANCE,
};
