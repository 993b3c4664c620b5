//! Deterministic fixed-step simulation of the closed system.

pub mod model;
pub mod scenario;
pub mod simulation;
pub mod timeseries;

pub use model::{Connection, Evaluation, PlantModel, PlantState};
pub use scenario::{
    default_wind, ControlSettings, DispatchStep, Fidelity, GridSettings, HessSettings, ModulationSettings,
    OutputSettings, RunSettings, Scenario, ScenarioError, Schedule, TurbineSettings,
};
pub use simulation::{run, run_batch, EngineError, Simulation};
pub use timeseries::{AnomalyCounters, CsvError, Record, TimeSeries};
