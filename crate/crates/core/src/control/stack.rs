//! The complete sampled controller: machine MPPT, grid dispatch, storage
//! split and DC-link regulation, ending in the nine leg references.

use super::grid::{DispatchCommand, GridMeasurements, GridPowerControl};
use super::hess::{
    dc_link_voltage_control, port_current_control, port_pi, BattMode, DutyBounds, HessPolicy, HessSplit,
};
use super::machine::{available_voltage, mppt_torque_ref, MachineCurrentControl};
use super::pi::PiState;
use super::refs::references_from_voltages;
use crate::modulation::{apply_offsets, ModulationError, ThreePhaseRef};
use crate::plant::network::GridParams;
use crate::plant::pmsg::{electrical_torque, PmsgParams, PmsgState};
use crate::plant::storage::{BatteryParams, SupercapParams};
use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};

/// Which storage elements sit on the DC leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Grid side regulates the DC link and exports whatever the turbine makes.
    NoHess,
    /// Battery regulates the DC link and absorbs all of the dispatch mismatch.
    BatteryOnly,
    /// CC/CV battery plus a supercapacitor taking the remainder.
    #[default]
    FullHess,
}

impl Case {
    pub fn has_battery(self) -> bool {
        !matches!(self, Case::NoHess)
    }

    pub fn has_supercap(self) -> bool {
        matches!(self, Case::FullHess)
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::NoHess => "no_hess",
            Case::BatteryOnly => "battery_only",
            Case::FullHess => "full_hess",
        }
    }
}

/// Closed-loop bandwidths (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths<T> {
    pub current: T,
    pub grid_power: T,
    pub port_current: T,
    /// Storage-side DC-link voltage loop.
    pub dc_link: T,
    /// Grid-side DC-link voltage loop, used only without storage.
    pub grid_dc_link: T,
}

impl<T: Scalar> Default for Bandwidths<T> {
    fn default() -> Self {
        Self {
            current: lit(500.0),
            grid_power: lit(50.0),
            port_current: lit(500.0),
            dc_link: lit(50.0),
            grid_dc_link: lit(10.0),
        }
    }
}

/// Everything the controller needs to know about the plant and its tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackParams<T> {
    pub case: Case,
    pub pmsg: PmsgParams<T>,
    pub k_opt: T,
    pub torque_limit: T,
    pub grid: GridParams<T>,
    pub p_base: T,
    pub v_dc_ref: T,
    pub c_dc: T,
    pub battery: BatteryParams<T>,
    pub supercap: SupercapParams<T>,
    pub port_inductance: T,
    pub bandwidths: Bandwidths<T>,
    pub i_cc: T,
    pub v_cv: T,
    pub cv_hysteresis: T,
    pub deadband: T,
    pub soc_min: T,
    pub soc_max: T,
    /// Bound on the DC-link correction current (A).
    pub correction_limit: T,
    /// Dispatch slew limit (pu/s).
    pub dispatch_ramp: T,
    pub q_grid_ref: T,
    /// Control period (s).
    pub dt: T,
}

/// Sampled plant quantities. Storage currents are positive when charging.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurements<T> {
    pub machine: PmsgState<T>,
    pub i_grid_d: T,
    pub i_grid_q: T,
    pub theta_grid: T,
    pub v_dc: T,
    pub i_batt: T,
    pub i_sc: T,
    pub v_batt: T,
    pub v_sc: T,
    pub soc: T,
}

/// References for the nine gates: grid phases on the upper outputs, machine
/// phases on the lower outputs, and the two DC/DC port duties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterCommand<T> {
    pub grid: ThreePhaseRef<T>,
    pub machine: ThreePhaseRef<T>,
    /// Supercapacitor port (upper output of the DC leg).
    pub dc_upper: T,
    /// Battery port (lower output of the DC leg).
    pub dc_lower: T,
}

impl<T: Scalar> ConverterCommand<T> {
    /// Leg-by-leg (upper, lower) reference pairs in A, B, C, DC order.
    pub fn legs(&self) -> [(T, T); 4] {
        [
            (self.grid.a, self.machine.a),
            (self.grid.b, self.machine.b),
            (self.grid.c, self.machine.c),
            (self.dc_upper, self.dc_lower),
        ]
    }
}

/// Conditions raised during one control step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControlFlags {
    pub reference_clamps: u32,
    pub overmodulation: bool,
    pub voltage_limit: bool,
    pub current_limit: bool,
    pub port_clamp: bool,
    pub correction_limit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput<T> {
    pub command: ConverterCommand<T>,
    pub t_e_cmd: T,
    /// Turbine power estimated at the machine terminals (W).
    pub p_wt: T,
    /// Slew-limited dispatch actually requested from the grid side (W).
    pub p_dispatch: T,
    pub split: HessSplit<T>,
    pub i_batt_ref: T,
    pub i_sc_ref: T,
    pub m_grid: T,
    pub m_machine: T,
    pub flags: ControlFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlStack<T> {
    params: StackParams<T>,
    machine: MachineCurrentControl<T>,
    grid: GridPowerControl<T>,
    /// DC-link voltage → grid power (W); no-storage case only.
    grid_dc: PiState<T>,
    /// DC-link voltage → storage correction current (A).
    dc_link: PiState<T>,
    policy: HessPolicy<T>,
    port_sc: PiState<T>,
    port_batt: PiState<T>,
    dispatch_pu: T,
}

impl<T: Scalar> ControlStack<T> {
    pub fn new(params: StackParams<T>) -> Self {
        let bw = params.bandwidths;
        let tau = T::TAU();
        let v_limit = available_voltage(params.v_dc_ref);
        let machine = MachineCurrentControl::tuned(params.pmsg, bw.current, v_limit);
        let grid = GridPowerControl::tuned(params.grid, params.p_base, bw.current, bw.grid_power, v_limit);

        let energy_gain = T::one() / (params.c_dc * params.v_dc_ref);
        let grid_dc = PiState::for_integrator(
            energy_gain,
            tau * bw.grid_dc_link,
            lit(4.0),
            grid.current_limit() * lit::<T>(1.5) * params.grid.v_phase_peak(),
        );

        // a port current change reaches the link scaled by its duty
        let v_port = if params.case.has_supercap() { params.supercap.v_nom } else { params.battery.v_nom };
        let duty_gain = v_port / (params.v_dc_ref * params.c_dc);
        let dc_link = PiState::for_integrator(duty_gain, tau * bw.dc_link, lit(4.0), params.correction_limit);

        let mut policy = HessPolicy::new(params.i_cc, params.battery);
        policy.v_cv = params.v_cv;
        policy.cv_hysteresis = params.cv_hysteresis;
        policy.deadband = params.deadband;
        policy.soc_min = params.soc_min;
        policy.soc_max = params.soc_max;

        Self {
            params,
            machine,
            grid,
            grid_dc,
            dc_link,
            policy,
            port_sc: port_pi(params.port_inductance, params.v_dc_ref, bw.port_current),
            port_batt: port_pi(params.port_inductance, params.v_dc_ref, bw.port_current),
            dispatch_pu: T::zero(),
        }
    }

    pub fn params(&self) -> &StackParams<T> {
        &self.params
    }

    /// Battery policy with its current CV latch.
    pub fn policy(&self) -> &HessPolicy<T> {
        &self.policy
    }

    /// Seeds the integrators so a plant sitting at equilibrium with `meas`
    /// sees no start-up transient.
    pub fn initialize(&mut self, meas: &Measurements<T>, dispatch_pu: T) {
        let p = self.params;
        let s = meas.machine;
        self.machine.pi_d.preset(p.pmsg.r_s * s.i_d);
        self.machine.pi_q.preset(p.pmsg.r_s * s.i_q);
        self.grid.pi_d.preset(p.grid.r_f * meas.i_grid_d);
        self.grid.pi_q.preset(p.grid.r_f * meas.i_grid_q);
        self.grid.pi_p.reset();
        self.dispatch_pu = dispatch_pu;

        let p_grid = self.grid_measurements(meas).p();
        self.grid_dc.preset(-p_grid);

        let p_wt = self.turbine_power(meas);
        let p_dispatch = dispatch_pu * p.p_base;
        match p.case {
            Case::NoHess => {}
            Case::BatteryOnly => {
                let i_ref = (p_wt - p_dispatch) / meas.v_batt;
                self.dc_link.preset(i_ref - meas.i_batt);
            }
            Case::FullHess => {
                let split = self.policy.split(p_wt, p_dispatch, meas.v_batt, meas.soc);
                self.dc_link.preset(split.p_sc_ref / meas.v_sc - meas.i_sc);
            }
        }
    }

    fn grid_measurements(&self, meas: &Measurements<T>) -> GridMeasurements<T> {
        let (v_gd, v_gq) = self.params.grid.v_dq();
        GridMeasurements { i_d: meas.i_grid_d, i_q: meas.i_grid_q, v_gd, v_gq, v_dc: meas.v_dc }
    }

    /// Electrical power at the machine terminals, `T_e·ω − 1.5·r_s·|i|²`.
    pub fn turbine_power(&self, meas: &Measurements<T>) -> T {
        let s = meas.machine;
        let pm = &self.params.pmsg;
        electrical_torque(pm, s.i_d, s.i_q) * s.omega_m - lit::<T>(1.5) * pm.r_s * (s.i_d * s.i_d + s.i_q * s.i_q)
    }

    fn ramp_dispatch(&mut self, target_pu: T) -> T {
        let p = &self.params;
        let step = p.dispatch_ramp * p.dt;
        let delta = (target_pu - self.dispatch_pu).max(-step).min(step);
        self.dispatch_pu += delta;
        self.dispatch_pu
    }

    /// One control period. `dispatch_pu` is the scheduled grid setpoint.
    pub fn step(&mut self, meas: &Measurements<T>, dispatch_pu: T) -> Result<ControlOutput<T>, ModulationError> {
        let p = self.params;
        let dt = p.dt;
        let mut flags = ControlFlags::default();
        let s = meas.machine;

        let t_e_cmd = mppt_torque_ref(s.omega_m, p.k_opt).min(p.torque_limit);
        let mach = self.machine.update(t_e_cmd, &s, meas.v_dc, dt);
        flags.voltage_limit |= mach.saturated;
        let p_wt = self.turbine_power(meas);

        let gm = self.grid_measurements(meas);
        let e_dc = p.v_dc_ref - meas.v_dc;
        let (p_grid_ref, p_dispatch) = match p.case {
            Case::NoHess => {
                let out = self.grid_dc.update(e_dc, dt);
                (-out.value, -out.value)
            }
            _ => {
                let pu = self.ramp_dispatch(dispatch_pu);
                (pu * p.p_base, pu * p.p_base)
            }
        };
        let q_ref = p.q_grid_ref * p.p_base;
        let (i_d_ref, i_q_ref) = self.grid.power_to_current(p_grid_ref, q_ref, &gm, dt);
        let g = self.grid.current_control(i_d_ref, i_q_ref, &gm, dt);
        flags.current_limit |= g.current_limited;
        flags.voltage_limit |= g.voltage_limited;

        let excess = p_wt - p_dispatch;
        let (split, i_batt_ref, i_sc_ref) = match p.case {
            Case::NoHess => (
                HessSplit { p_batt_ref: T::zero(), p_sc_ref: T::zero(), batt_mode: BattMode::Idle },
                T::zero(),
                T::zero(),
            ),
            Case::BatteryOnly => {
                let corr = dc_link_voltage_control(p.v_dc_ref, meas.v_dc, &mut self.dc_link, dt);
                flags.correction_limit |= corr.limited;
                let split = HessSplit { p_batt_ref: excess, p_sc_ref: T::zero(), batt_mode: BattMode::Follow };
                (split, excess / meas.v_batt - corr.i_corr, T::zero())
            }
            Case::FullHess => {
                let split = self.policy.split(p_wt, p_dispatch, meas.v_batt, meas.soc);
                let corr = dc_link_voltage_control(p.v_dc_ref, meas.v_dc, &mut self.dc_link, dt);
                flags.correction_limit |= corr.limited;
                (split, split.p_batt_ref / meas.v_batt, split.p_sc_ref / meas.v_sc - corr.i_corr)
            }
        };

        let dc_upper = if p.case.has_supercap() {
            let out = port_current_control(
                i_sc_ref,
                meas.i_sc,
                meas.v_sc,
                meas.v_dc,
                &mut self.port_sc,
                &DutyBounds::upper_port(),
                dt,
            );
            flags.port_clamp |= out.clamped;
            out.duty
        } else {
            T::one()
        };
        let dc_lower = if p.case.has_battery() {
            let out = port_current_control(
                i_batt_ref,
                meas.i_batt,
                meas.v_batt,
                meas.v_dc,
                &mut self.port_batt,
                &DutyBounds::lower_port(),
                dt,
            );
            flags.port_clamp |= out.clamped;
            out.duty
        } else {
            T::zero()
        };

        // references are held for a whole period: evaluate them mid-period
        let half = lit::<T>(0.5) * dt;
        let theta_g = meas.theta_grid + p.grid.omega() * half;
        let theta_e = s.theta_e + p.pmsg.pole_pairs() * s.omega_m * half;
        let grid_refs = references_from_voltages(g.v_d, g.v_q, theta_g, meas.v_dc);
        let mach_refs = references_from_voltages(mach.v_d, mach.v_q, theta_e, meas.v_dc);
        flags.overmodulation = grid_refs.overmodulated || mach_refs.overmodulated;
        let shifted = apply_offsets(&grid_refs.refs, &mach_refs.refs)?;
        flags.reference_clamps = shifted.clamps;

        Ok(ControlOutput {
            command: ConverterCommand { grid: shifted.upper, machine: shifted.lower, dc_upper, dc_lower },
            t_e_cmd,
            p_wt,
            p_dispatch,
            split,
            i_batt_ref,
            i_sc_ref,
            m_grid: grid_refs.m,
            m_machine: mach_refs.m,
            flags,
        })
    }

    /// The current dispatch command after slew limiting.
    pub fn dispatch(&self) -> DispatchCommand<T> {
        DispatchCommand { p_grid_ref: self.dispatch_pu, q_grid_ref: self.params.q_grid_ref }
    }
}
