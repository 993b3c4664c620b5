//! Sampled control loops, run every control period with zero-order hold.

pub mod grid;
pub mod hess;
pub mod machine;
pub mod pi;
pub mod refs;
pub mod stack;

pub use grid::{grid_power_control, DispatchCommand, GridMeasurements, GridOutput, GridPowerControl};
pub use hess::{
    dc_link_voltage_control, hess_power_split, port_current_control, port_pi, BattMode, DcLinkOutput, DutyBounds,
    HessPolicy, HessSplit, PortOutput,
};
pub use machine::{available_voltage, machine_current_control, mppt_torque_ref, MachineCurrentControl, MachineOutput};
pub use pi::{PiOutput, PiState};
pub use refs::{implied_modulation_index, references_from_voltages, LegReferences};
pub use stack::{
    Bandwidths, Case, ControlFlags, ControlOutput, ControlStack, ConverterCommand, Measurements, StackParams,
};
