//! Synthetic feeders bundled with the crate.
//!
//! `twobus` is a single 0.01+0.01j pu branch with one load on phase a,
//! `synth10` a ten-bus feeder with nine loads spread unevenly over the
//! phases, and `synth55` a 55-house radial feeder with service drops.
//! `feeders/generate.py` regenerates the JSON.

use crate::error::Result;
use crate::netmodel::NetworkModel;

pub const TWOBUS_JSON: &str = include_str!("../feeders/twobus.json");
pub const SYNTH10_JSON: &str = include_str!("../feeders/synth10.json");
pub const SYNTH55_JSON: &str = include_str!("../feeders/synth55.json");

pub const NAMES: [&str; 3] = ["twobus", "synth10", "synth55"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "twobus" => Some(TWOBUS_JSON),
        "synth10" => Some(SYNTH10_JSON),
        "synth55" => Some(SYNTH55_JSON),
        _ => None,
    }
}

pub fn builtin(name: &str) -> Option<Result<NetworkModel>> {
    source(name).map(NetworkModel::from_json_str)
}

fn bundled(text: &str) -> NetworkModel {
    NetworkModel::from_json_str(text).expect("bundled feeder is valid")
}

pub fn twobus() -> NetworkModel {
    bundled(TWOBUS_JSON)
}

pub fn synth10() -> NetworkModel {
    bundled(SYNTH10_JSON)
}

pub fn synth55() -> NetworkModel {
    bundled(SYNTH55_JSON)
}
