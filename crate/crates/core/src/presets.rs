//! Shortcuts to the built-in experiment setups.

use crate::config::{preset, RunConfig};
use crate::params::PhysicalParams;
use crate::state::{ForcingSet, InitialData};

pub fn straight_limit() -> RunConfig {
    preset("paper-5.1").expect("built-in")
}

pub fn double_limit() -> RunConfig {
    preset("paper-5.2").expect("built-in")
}

pub fn straight_limit_params() -> PhysicalParams {
    straight_limit().params
}

pub fn straight_limit_forcing() -> ForcingSet {
    straight_limit().forcing
}

pub fn straight_limit_initial_data() -> InitialData {
    straight_limit().ic
}

pub fn double_limit_params() -> PhysicalParams {
    double_limit().params
}

pub fn double_limit_forcing() -> ForcingSet {
    double_limit().forcing
}

pub fn double_limit_initial_data() -> InitialData {
    double_limit().ic
}
