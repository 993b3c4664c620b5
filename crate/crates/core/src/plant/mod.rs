//! Continuous-time plant models exposed as explicit derivative functions.

pub mod network;
pub mod pmsg;
pub mod storage;
pub mod turbine;
pub mod wind;

pub use network::{dc_link_derivative, grid_interface_derivatives, grid_power, GridParams};
pub use pmsg::{electrical_torque, pmsg_derivatives, terminal_power, PmsgDerivative, PmsgParams, PmsgState};
pub use storage::{battery_step, supercap_step, BatteryParams, BatteryStep, SupercapParams, SupercapStep};
pub use turbine::{aero_torque, CpCurve, TurbineParams, BETZ_LIMIT};
pub use wind::{wind_speed, Gust, Noise, Ramp, WindProfile, WindSpec};
