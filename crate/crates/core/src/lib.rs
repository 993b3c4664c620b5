//! Simulation of a PMSG wind turbine feeding the grid through a dual-buck
//! nine-switch back-to-back converter, with a battery and supercapacitor on
//! a third three-switch leg.
//!
//! The converter, plant and control math is generic over [`Scalar`] (`f32`
//! or `f64`); the fixed-step [`engine`] runs in `f64`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod engine;
pub mod modulation;
pub mod plant;
pub mod scalar;
pub mod shortcircuit;
pub mod sweep;
pub mod transforms;

pub use scalar::Scalar;

pub type RefParams64 = modulation::RefParams<f64>;
pub type ThreePhaseRef64 = modulation::ThreePhaseRef<f64>;
pub type CarrierConfig64 = modulation::CarrierConfig<f64>;
pub type ShootThroughParams64 = shortcircuit::ShootThroughParams<f64>;
pub type PmsgParams64 = plant::PmsgParams<f64>;
pub type PmsgState64 = plant::PmsgState<f64>;
pub type TurbineParams64 = plant::TurbineParams<f64>;
pub type BatteryParams64 = plant::BatteryParams<f64>;
pub type SupercapParams64 = plant::SupercapParams<f64>;
pub type GridParams64 = plant::GridParams<f64>;
pub type WindProfile64 = plant::WindProfile<f64>;
pub type PiState64 = control::PiState<f64>;
pub type HessSplit64 = control::HessSplit<f64>;
pub type DispatchCommand64 = control::DispatchCommand<f64>;
pub type ControlStack64 = control::ControlStack<f64>;

pub type RefParams32 = modulation::RefParams<f32>;
pub type ThreePhaseRef32 = modulation::ThreePhaseRef<f32>;
pub type ShootThroughParams32 = shortcircuit::ShootThroughParams<f32>;
pub type PmsgParams32 = plant::PmsgParams<f32>;
pub type PiState32 = control::PiState<f32>;
