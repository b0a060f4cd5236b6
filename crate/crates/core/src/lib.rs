//! Stochastic PV hosting capacity of unbalanced three-phase LV feeders.
//!
//! Pipeline: a [`NetworkModel`] is assembled into a partitioned admittance
//! matrix, solved at nominal load with the Z-bus iteration, and linearized
//! into a [`MagnitudeModel`]. The [`hostcap`] estimators then sample PV
//! placements and compute Φ_ε with either the fixed-voltage (closed form per
//! scenario) or fixed-power (bisection on ε̂) method.
//!
//! ```no_run
//! use lvhc::{feeders, hostcap, loadflow::FeederModel};
//!
//! let model = FeederModel::build(feeders::synth55())?;
//! let samples = hostcap::run_fixed_voltage(&model.magnitude, 28, 1000, 7, model.v_plus())?;
//! let phi = hostcap::estimate_phi_eps(&samples, 0.05)?;
//! println!("Phi_5% = {:.2} pu", phi.phi_eps_total);
//! # Ok::<(), lvhc::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod feeders;
pub mod hostcap;
pub mod loadflow;
pub mod netmodel;
pub mod scenarios;

pub use error::{Error, Result, ValidationError};
pub use hostcap::{HcEstimate, HcSampleSet, MaxGen, Method};
pub use loadflow::{ComplexSolution, FeederModel, LinearModel, MagnitudeModel};
pub use netmodel::{NetworkModel, PartitionedAdmittance};
pub use scenarios::{IndicatorVector, Scenario};
