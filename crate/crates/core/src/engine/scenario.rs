//! Scenario description: case, timing, wind, dispatch and every parameter
//! override. Serialised field names carry their units.

use crate::control::{Bandwidths, Case, StackParams};
use crate::plant::{BatteryParams, CpCurve, GridParams, PmsgParams, SupercapParams, TurbineParams, WindSpec};
use crate::plant::{Gust, Noise, Ramp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{key}: {message}")]
pub struct ScenarioError {
    /// Dotted path of the offending key.
    pub key: String,
    pub message: String,
}

fn invalid(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError { key: key.to_owned(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// Duty-averaged leg voltages.
    #[default]
    Averaged,
    /// Carrier comparison and instantaneous gate states.
    Switched,
}

impl Fidelity {
    /// Plant step used when the scenario leaves it unset.
    pub fn default_dt_plant(self) -> f64 {
        match self {
            Fidelity::Averaged => 20e-6,
            Fidelity::Switched => 1e-6,
        }
    }
}

/// One entry of the dispatch schedule: from `t_seconds` on, the grid is asked
/// for `p_pu` of rated power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchStep {
    pub t_seconds: f64,
    pub p_pu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub v_ll_rms_volts: f64,
    pub frequency_hertz: f64,
    pub l_filter_henries: f64,
    pub r_filter_ohms: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        let g = GridParams::<f64>::default();
        Self { v_ll_rms_volts: g.v_ll_rms, frequency_hertz: g.frequency, l_filter_henries: g.l_f, r_filter_ohms: g.r_f }
    }
}

impl GridSettings {
    pub fn params(&self) -> GridParams<f64> {
        GridParams {
            v_ll_rms: self.v_ll_rms_volts,
            frequency: self.frequency_hertz,
            l_f: self.l_filter_henries,
            r_f: self.r_filter_ohms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub case: Case,
    pub fidelity: Fidelity,
    pub duration_seconds: f64,
    /// Plant step; the fidelity's default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_plant_seconds: Option<f64>,
    pub dt_control_seconds: f64,
    pub log_interval_seconds: f64,
    pub seed: u64,
    pub dispatch_ramp_pu_per_second: f64,
    pub q_grid_pu: f64,
    pub wind: WindSpec,
    pub grid: GridSettings,
    pub dispatch: Vec<DispatchStep>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            case: Case::FullHess,
            fidelity: Fidelity::Averaged,
            duration_seconds: 25.0,
            dt_plant_seconds: None,
            dt_control_seconds: 100e-6,
            log_interval_seconds: 100e-6,
            seed: 7,
            dispatch_ramp_pu_per_second: 1.0,
            q_grid_pu: 0.0,
            wind: default_wind(),
            grid: GridSettings::default(),
            dispatch: vec![
                DispatchStep { t_seconds: 0.0, p_pu: 0.3 },
                DispatchStep { t_seconds: 25.0 / 3.0, p_pu: 0.4 },
                DispatchStep { t_seconds: 50.0 / 3.0, p_pu: 0.5 },
            ],
        }
    }
}

/// Mean 6 m/s with a gust, a ramp and low-frequency turbulence.
pub fn default_wind() -> WindSpec {
    WindSpec {
        mean: 6.0,
        gust: Gust { start: 4.0, duration: 4.0, amplitude: 3.0 },
        ramp: Ramp { start: 12.0, end: 20.0, slope: 0.25 },
        noise: Noise { amplitude: 0.3, f_low: 0.05, f_high: 2.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineSettings {
    pub air_density_kg_m3: f64,
    pub rated_wind_mps: f64,
    /// Rotor radius; sized for rated power at the rated wind when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_meters: Option<f64>,
    pub cp_coefficients: [f64; 6],
    pub omega_floor_radps: f64,
}

impl Default for TurbineSettings {
    fn default() -> Self {
        Self {
            air_density_kg_m3: 1.225,
            rated_wind_mps: 12.0,
            radius_meters: None,
            cp_coefficients: CpCurve::<f64>::default().c,
            omega_floor_radps: 0.05,
        }
    }
}

impl TurbineSettings {
    pub fn params(&self, p_rated: f64) -> TurbineParams<f64> {
        let curve = CpCurve { c: self.cp_coefficients };
        let mut t = match self.radius_meters {
            Some(r) => TurbineParams::new(self.air_density_kg_m3, r, curve),
            None => TurbineParams::sized_for(p_rated, self.rated_wind_mps, self.air_density_kg_m3, curve),
        };
        t.omega_floor = self.omega_floor_radps;
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HessSettings {
    pub v_dc_ref_volts: f64,
    pub dc_link_capacitance_farads: f64,
    pub battery_nominal_volts: f64,
    pub battery_capacity_kwh: f64,
    pub battery_ocv_empty_volts: f64,
    pub battery_ocv_span_volts: f64,
    pub battery_r_int_ohms: f64,
    pub battery_soc_initial: f64,
    pub sc_capacitance_farads: f64,
    pub sc_nominal_volts: f64,
    pub sc_initial_volts: f64,
    pub sc_r_series_ohms: f64,
    pub sc_floor_volts: f64,
    /// External filter inductor per DC/DC port.
    pub port_filter_henries: f64,
    /// Inductor built into the dual-buck leg, in series with the filter.
    pub embedded_inductor_henries: f64,
}

impl Default for HessSettings {
    fn default() -> Self {
        let b = BatteryParams::<f64>::default();
        let s = SupercapParams::<f64>::default();
        Self {
            v_dc_ref_volts: 2000.0,
            dc_link_capacitance_farads: 0.1,
            battery_nominal_volts: b.v_nom,
            battery_capacity_kwh: b.capacity / 3.6e6,
            battery_ocv_empty_volts: b.ocv_empty,
            battery_ocv_span_volts: b.ocv_span,
            battery_r_int_ohms: b.r_int,
            battery_soc_initial: 0.5,
            sc_capacitance_farads: s.capacitance,
            sc_nominal_volts: s.v_nom,
            sc_initial_volts: s.v_nom,
            sc_r_series_ohms: s.r_series,
            sc_floor_volts: s.v_floor,
            port_filter_henries: 1e-3,
            embedded_inductor_henries: 50e-6,
        }
    }
}

impl HessSettings {
    pub fn battery(&self) -> BatteryParams<f64> {
        BatteryParams {
            v_nom: self.battery_nominal_volts,
            capacity: self.battery_capacity_kwh * 3.6e6,
            ocv_empty: self.battery_ocv_empty_volts,
            ocv_span: self.battery_ocv_span_volts,
            r_int: self.battery_r_int_ohms,
        }
    }

    pub fn supercap(&self) -> SupercapParams<f64> {
        SupercapParams {
            capacitance: self.sc_capacitance_farads,
            v_nom: self.sc_nominal_volts,
            r_series: self.sc_r_series_ohms,
            v_floor: self.sc_floor_volts,
        }
    }

    pub fn port_inductance(&self) -> f64 {
        self.port_filter_henries + self.embedded_inductor_henries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSettings {
    pub current_bandwidth_hertz: f64,
    pub grid_power_bandwidth_hertz: f64,
    pub port_current_bandwidth_hertz: f64,
    pub dc_link_bandwidth_hertz: f64,
    pub grid_dc_link_bandwidth_hertz: f64,
    pub i_cc_amps: f64,
    pub cv_threshold_volts: f64,
    pub cv_hysteresis_volts: f64,
    pub deadband_pu: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub correction_limit_amps: f64,
    /// Torque ceiling; rated power over the speed at rated wind when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torque_limit_newton_meters: Option<f64>,
}

impl Default for ControlSettings {
    fn default() -> Self {
        let bw = Bandwidths::<f64>::default();
        Self {
            current_bandwidth_hertz: bw.current,
            grid_power_bandwidth_hertz: bw.grid_power,
            port_current_bandwidth_hertz: bw.port_current,
            dc_link_bandwidth_hertz: bw.dc_link,
            grid_dc_link_bandwidth_hertz: bw.grid_dc_link,
            i_cc_amps: 50.0,
            cv_threshold_volts: 800.0,
            cv_hysteresis_volts: 5.0,
            deadband_pu: 0.01,
            soc_min: 0.05,
            soc_max: 0.95,
            correction_limit_amps: 1500.0,
            torque_limit_newton_meters: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationSettings {
    pub carrier_frequency_hertz: f64,
}

impl Default for ModulationSettings {
    fn default() -> Self {
        Self { carrier_frequency_hertz: 5e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub write_csv: bool,
    pub write_plots: bool,
    /// Points per plotted trace after decimation.
    pub plot_points: usize,
    /// Start of the steady-state statistics window.
    pub settle_seconds: f64,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { write_csv: true, write_plots: true, plot_points: 2000, settle_seconds: 0.5 }
    }
}

/// A complete, self-contained simulation setup.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub scenario: RunSettings,
    pub pmsg: PmsgParams<f64>,
    pub turbine: TurbineSettings,
    pub hess: HessSettings,
    pub control: ControlSettings,
    pub modulation: ModulationSettings,
    pub output: OutputSettings,
}

/// Resolved step sizes in plant-step units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub steps_per_control: u64,
    pub steps_per_log: u64,
    pub total_steps: u64,
}

fn ratio(key: &str, num: f64, den: f64) -> Result<u64, ScenarioError> {
    let r = num / den;
    let n = r.round();
    if n < 1.0 || (r - n).abs() > 1e-6 * n {
        return Err(invalid(key, format!("must be a whole multiple of the plant step ({den:e} s)")));
    }
    Ok(n as u64)
}

impl Scenario {
    /// Defaults for one of the three storage configurations.
    pub fn for_case(case: Case) -> Self {
        let mut s = Scenario::default();
        s.scenario.case = case;
        s
    }

    pub fn dt_plant(&self) -> f64 {
        self.scenario.dt_plant_seconds.unwrap_or_else(|| self.scenario.fidelity.default_dt_plant())
    }

    pub fn schedule(&self) -> Result<Schedule, ScenarioError> {
        let dt = self.dt_plant();
        Ok(Schedule {
            steps_per_control: ratio("scenario.dt_control_seconds", self.scenario.dt_control_seconds, dt)?,
            steps_per_log: ratio("scenario.log_interval_seconds", self.scenario.log_interval_seconds, dt)?,
            total_steps: (self.scenario.duration_seconds / dt).round() as u64,
        })
    }

    /// Dispatch setpoint (pu) scheduled at `t`; zero before the first entry.
    pub fn dispatch_at(&self, t: f64) -> f64 {
        self.scenario.dispatch.iter().take_while(|d| d.t_seconds <= t).last().map_or(0.0, |d| d.p_pu)
    }

    pub fn turbine_params(&self) -> TurbineParams<f64> {
        self.turbine.params(self.pmsg.p_rated)
    }

    /// Torque ceiling applied to the MPPT command.
    pub fn torque_limit(&self) -> f64 {
        self.control.torque_limit_newton_meters.unwrap_or_else(|| {
            let t = self.turbine_params();
            self.pmsg.p_rated / t.optimal_speed(self.turbine.rated_wind_mps)
        })
    }

    pub fn stack_params(&self) -> StackParams<f64> {
        let c = &self.control;
        let turbine = self.turbine_params();
        StackParams {
            case: self.scenario.case,
            pmsg: self.pmsg,
            k_opt: turbine.k_opt(),
            torque_limit: self.torque_limit(),
            grid: self.scenario.grid.params(),
            p_base: self.pmsg.p_rated,
            v_dc_ref: self.hess.v_dc_ref_volts,
            c_dc: self.hess.dc_link_capacitance_farads,
            battery: self.hess.battery(),
            supercap: self.hess.supercap(),
            port_inductance: self.hess.port_inductance(),
            bandwidths: Bandwidths {
                current: c.current_bandwidth_hertz,
                grid_power: c.grid_power_bandwidth_hertz,
                port_current: c.port_current_bandwidth_hertz,
                dc_link: c.dc_link_bandwidth_hertz,
                grid_dc_link: c.grid_dc_link_bandwidth_hertz,
            },
            i_cc: c.i_cc_amps,
            v_cv: c.cv_threshold_volts,
            cv_hysteresis: c.cv_hysteresis_volts,
            deadband: c.deadband_pu * self.pmsg.p_rated,
            soc_min: c.soc_min,
            soc_max: c.soc_max,
            correction_limit: c.correction_limit_amps,
            dispatch_ramp: self.scenario.dispatch_ramp_pu_per_second,
            q_grid_ref: self.scenario.q_grid_pu,
            dt: self.scenario.dt_control_seconds,
        }
    }

    /// Checks every invariant the engine relies on.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let s = &self.scenario;
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive and finite, got {v}")))
            }
        };
        positive("scenario.duration_seconds", s.duration_seconds)?;
        positive("scenario.dt_control_seconds", s.dt_control_seconds)?;
        positive("scenario.log_interval_seconds", s.log_interval_seconds)?;
        positive("scenario.dt_plant_seconds", self.dt_plant())?;
        if self.dt_plant() > s.dt_control_seconds {
            return Err(invalid("scenario.dt_plant_seconds", "must not exceed the control period"));
        }
        self.schedule()?;
        if !(s.dispatch_ramp_pu_per_second > 0.0) {
            return Err(invalid("scenario.dispatch_ramp_pu_per_second", "must be positive"));
        }
        if !(s.q_grid_pu.abs() <= 1.2) {
            return Err(invalid("scenario.q_grid_pu", "must lie within ±1.2 pu"));
        }
        for (i, d) in s.dispatch.iter().enumerate() {
            if !(d.p_pu.abs() <= 1.2) {
                return Err(invalid(&format!("scenario.dispatch[{i}].p_pu"), "must lie within ±1.2 pu"));
            }
            if !(d.t_seconds >= 0.0) {
                return Err(invalid(&format!("scenario.dispatch[{i}].t_seconds"), "must be non-negative"));
            }
            if i > 0 && d.t_seconds < s.dispatch[i - 1].t_seconds {
                return Err(invalid(&format!("scenario.dispatch[{i}].t_seconds"), "schedule must be ordered in time"));
            }
        }
        s.wind.validate().map_err(|m| invalid("scenario.wind", m))?;
        let g = &s.grid;
        positive("scenario.grid.v_ll_rms_volts", g.v_ll_rms_volts)?;
        positive("scenario.grid.frequency_hertz", g.frequency_hertz)?;
        positive("scenario.grid.l_filter_henries", g.l_filter_henries)?;
        positive("scenario.grid.r_filter_ohms", g.r_filter_ohms)?;

        self.pmsg.validate().map_err(|m| invalid("pmsg", m))?;

        let t = &self.turbine;
        positive("turbine.air_density_kg_m3", t.air_density_kg_m3)?;
        positive("turbine.rated_wind_mps", t.rated_wind_mps)?;
        if let Some(r) = t.radius_meters {
            positive("turbine.radius_meters", r)?;
        }
        if t.cp_coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("turbine.cp_coefficients", "must be finite"));
        }
        if !(t.omega_floor_radps >= 0.0) {
            return Err(invalid("turbine.omega_floor_radps", "must be non-negative"));
        }
        let (_, cp_max) = CpCurve { c: t.cp_coefficients }.optimum();
        if !(cp_max > 0.0) {
            return Err(invalid("turbine.cp_coefficients", "power coefficient curve has no positive maximum"));
        }

        let h = &self.hess;
        for (key, v) in [
            ("hess.v_dc_ref_volts", h.v_dc_ref_volts),
            ("hess.dc_link_capacitance_farads", h.dc_link_capacitance_farads),
            ("hess.battery_nominal_volts", h.battery_nominal_volts),
            ("hess.battery_capacity_kwh", h.battery_capacity_kwh),
            ("hess.battery_ocv_empty_volts", h.battery_ocv_empty_volts),
            ("hess.battery_r_int_ohms", h.battery_r_int_ohms),
            ("hess.sc_capacitance_farads", h.sc_capacitance_farads),
            ("hess.sc_nominal_volts", h.sc_nominal_volts),
            ("hess.sc_initial_volts", h.sc_initial_volts),
            ("hess.sc_r_series_ohms", h.sc_r_series_ohms),
            ("hess.port_filter_henries", h.port_filter_henries),
        ] {
            positive(key, v)?;
        }
        if !(h.battery_ocv_span_volts >= 0.0) {
            return Err(invalid("hess.battery_ocv_span_volts", "must be non-negative"));
        }
        if !(h.embedded_inductor_henries >= 0.0) {
            return Err(invalid("hess.embedded_inductor_henries", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&h.battery_soc_initial) {
            return Err(invalid("hess.battery_soc_initial", "must lie in [0, 1]"));
        }
        if !(h.sc_floor_volts >= 0.0 && h.sc_floor_volts < h.sc_nominal_volts) {
            return Err(invalid("hess.sc_floor_volts", "must lie in [0, sc_nominal_volts)"));
        }
        // the port duties must respect the DC-leg ordering at nominal voltages
        if self.scenario.case.has_supercap() && h.sc_nominal_volts < h.battery_nominal_volts {
            return Err(invalid(
                "hess.sc_nominal_volts",
                "the upper (supercapacitor) port must not sit below the battery",
            ));
        }
        if h.sc_nominal_volts >= 0.95 * h.v_dc_ref_volts {
            return Err(invalid("hess.sc_nominal_volts", "must stay below 95% of the DC-link reference"));
        }

        let c = &self.control;
        for (key, v) in [
            ("control.current_bandwidth_hertz", c.current_bandwidth_hertz),
            ("control.grid_power_bandwidth_hertz", c.grid_power_bandwidth_hertz),
            ("control.port_current_bandwidth_hertz", c.port_current_bandwidth_hertz),
            ("control.dc_link_bandwidth_hertz", c.dc_link_bandwidth_hertz),
            ("control.grid_dc_link_bandwidth_hertz", c.grid_dc_link_bandwidth_hertz),
            ("control.i_cc_amps", c.i_cc_amps),
            ("control.cv_threshold_volts", c.cv_threshold_volts),
            ("control.correction_limit_amps", c.correction_limit_amps),
        ] {
            positive(key, v)?;
        }
        if !(c.cv_hysteresis_volts >= 0.0) {
            return Err(invalid("control.cv_hysteresis_volts", "must be non-negative"));
        }
        if !(c.deadband_pu >= 0.0) {
            return Err(invalid("control.deadband_pu", "must be non-negative"));
        }
        if !(0.0 <= c.soc_min && c.soc_min < c.soc_max && c.soc_max <= 1.0) {
            return Err(invalid("control.soc_min", "need 0 ≤ soc_min < soc_max ≤ 1"));
        }
        if let Some(t) = c.torque_limit_newton_meters {
            positive("control.torque_limit_newton_meters", t)?;
        }

        positive("modulation.carrier_frequency_hertz", self.modulation.carrier_frequency_hertz)?;
        if !(self.output.settle_seconds >= 0.0) {
            return Err(invalid("output.settle_seconds", "must be non-negative"));
        }
        if self.output.plot_points < 2 {
            return Err(invalid("output.plot_points", "must be at least 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for case in [Case::NoHess, Case::BatteryOnly, Case::FullHess] {
            Scenario::for_case(case).validate().unwrap();
        }
    }

    #[test]
    fn schedule_arithmetic() {
        let mut s = Scenario::default();
        s.scenario.duration_seconds = 5.0;
        let sch = s.schedule().unwrap();
        assert_eq!(sch.steps_per_control, 5);
        assert_eq!(sch.total_steps / sch.steps_per_log, 50_000);
        s.scenario.fidelity = Fidelity::Switched;
        assert_eq!(s.schedule().unwrap().steps_per_control, 100);
    }

    #[test]
    fn rejects_misaligned_control_period() {
        let mut s = Scenario::default();
        s.scenario.dt_plant_seconds = Some(30e-6);
        let err = s.validate().unwrap_err();
        assert_eq!(err.key, "scenario.dt_control_seconds");
    }

    #[test]
    fn dispatch_schedule_lookup() {
        let s = Scenario::default();
        assert_eq!(s.dispatch_at(0.0), 0.3);
        assert_eq!(s.dispatch_at(8.0), 0.3);
        assert_eq!(s.dispatch_at(9.0), 0.4);
        assert_eq!(s.dispatch_at(24.9), 0.5);
    }

    #[test]
    fn torque_limit_is_rated() {
        let s = Scenario::default();
        let t = s.turbine_params();
        let w = t.optimal_speed(12.0);
        assert!((s.torque_limit() * w - 1.5e6).abs() < 1e-6);
    }
}
