//! The coupled plant seen through the converter: machine, turbine, grid
//! filter, DC link and the two storage ports, as one state vector.

use crate::control::Case;
use crate::plant::{
    aero_torque, electrical_torque, grid_interface_derivatives, pmsg_derivatives, wind_speed, BatteryParams,
    GridParams, PmsgParams, PmsgState, SupercapParams, TurbineParams, WindProfile,
};
use crate::transforms::{inv_park, park};

pub const STATE_LEN: usize = 12;

// state vector layout
pub const I_D: usize = 0;
pub const I_Q: usize = 1;
pub const OMEGA_M: usize = 2;
pub const THETA_E: usize = 3;
pub const I_GD: usize = 4;
pub const I_GQ: usize = 5;
pub const V_DC: usize = 6;
/// Battery port inductor current, positive charging.
pub const I_BATT: usize = 7;
/// Supercapacitor port inductor current, positive charging.
pub const I_SC: usize = 8;
pub const SOC: usize = 9;
pub const V_SC: usize = 10;
/// Running integral of power in minus power out, for the energy audit.
pub const E_NET: usize = 11;

pub type StateVector = [f64; STATE_LEN];

/// Named view of the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub machine: PmsgState<f64>,
    pub i_grid_d: f64,
    pub i_grid_q: f64,
    pub v_dc: f64,
    pub i_batt: f64,
    pub i_sc: f64,
    pub soc_batt: f64,
    pub v_sc: f64,
}

impl PlantState {
    pub fn from_vector(x: &StateVector) -> Self {
        Self {
            machine: PmsgState { i_d: x[I_D], i_q: x[I_Q], omega_m: x[OMEGA_M], theta_e: x[THETA_E] },
            i_grid_d: x[I_GD],
            i_grid_q: x[I_GQ],
            v_dc: x[V_DC],
            i_batt: x[I_BATT],
            i_sc: x[I_SC],
            soc_batt: x[SOC],
            v_sc: x[V_SC],
        }
    }

    pub fn to_vector(&self) -> StateVector {
        let mut x = [0.0; STATE_LEN];
        x[I_D] = self.machine.i_d;
        x[I_Q] = self.machine.i_q;
        x[OMEGA_M] = self.machine.omega_m;
        x[THETA_E] = self.machine.theta_e;
        x[I_GD] = self.i_grid_d;
        x[I_GQ] = self.i_grid_q;
        x[V_DC] = self.v_dc;
        x[I_BATT] = self.i_batt;
        x[I_SC] = self.i_sc;
        x[SOC] = self.soc_batt;
        x[V_SC] = self.v_sc;
        x
    }
}

/// Fraction of the plant-step each converter terminal spends tied to the
/// positive rail: the duty in averaged mode, 0 or 1 in switched mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Connection {
    pub grid: [f64; 3],
    pub machine: [f64; 3],
    pub sc: f64,
    pub batt: f64,
}

/// Derivatives plus the instantaneous quantities worth logging.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Evaluation {
    pub dx: StateVector,
    pub v_wind: f64,
    pub t_mech: f64,
    pub t_e: f64,
    pub p_mech: f64,
    pub p_grid: f64,
    pub p_batt: f64,
    pub p_sc: f64,
    pub p_loss: f64,
    pub v_batt: f64,
    pub v_sc_term: f64,
    pub i_grid_abc: [f64; 3],
    pub i_mach_abc: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub case: Case,
    pub pmsg: PmsgParams<f64>,
    pub turbine: TurbineParams<f64>,
    pub wind: WindProfile<f64>,
    pub grid: GridParams<f64>,
    pub battery: BatteryParams<f64>,
    pub supercap: SupercapParams<f64>,
    pub c_dc: f64,
    pub l_port: f64,
}

impl PlantModel {
    pub fn grid_angle(&self, t: f64) -> f64 {
        (self.grid.omega() * t).rem_euclid(std::f64::consts::TAU)
    }

    pub fn battery_terminal(&self, x: &StateVector) -> f64 {
        self.battery.terminal_voltage(x[SOC], -x[I_BATT])
    }

    pub fn supercap_terminal(&self, x: &StateVector) -> f64 {
        self.supercap.terminal_voltage(x[V_SC], -x[I_SC])
    }

    /// Energy held in the dynamic elements between the sources and sinks:
    /// rotor, machine and filter inductances, DC link and port inductors.
    pub fn stored_energy(&self, x: &StateVector) -> f64 {
        let p = &self.pmsg;
        0.5 * p.j * x[OMEGA_M] * x[OMEGA_M]
            + 0.75 * (p.l_d * x[I_D] * x[I_D] + p.l_q * x[I_Q] * x[I_Q])
            + 0.75 * self.grid.l_f * (x[I_GD] * x[I_GD] + x[I_GQ] * x[I_GQ])
            + 0.5 * self.c_dc * x[V_DC] * x[V_DC]
            + 0.5 * self.l_port * (x[I_BATT] * x[I_BATT] + x[I_SC] * x[I_SC])
    }

    pub fn evaluate(&self, x: &StateVector, t: f64, k: &Connection) -> Evaluation {
        let v_dc = x[V_DC];
        let theta_g = self.grid_angle(t);
        let theta_e = x[THETA_E];
        let mut dx = [0.0; STATE_LEN];

        // machine
        let s = PmsgState { i_d: x[I_D], i_q: x[I_Q], omega_m: x[OMEGA_M], theta_e };
        let (v_d, v_q) = park(k.machine.map(|kk| kk * v_dc), theta_e);
        let v_wind = wind_speed(&self.wind, t);
        let t_mech = aero_torque(&self.turbine, v_wind, s.omega_m);
        let md = pmsg_derivatives(&self.pmsg, &s, v_d, v_q, t_mech);
        dx[I_D] = md.di_d;
        dx[I_Q] = md.di_q;
        dx[OMEGA_M] = md.domega_m;
        dx[THETA_E] = md.dtheta_e;

        // grid filter
        let v_conv = park(k.grid.map(|kk| kk * v_dc), theta_g);
        let v_g = self.grid.v_dq();
        let (dgd, dgq) = grid_interface_derivatives((x[I_GD], x[I_GQ]), v_conv, v_g, &self.grid);
        dx[I_GD] = dgd;
        dx[I_GQ] = dgq;

        // storage ports
        let v_batt = self.battery_terminal(x);
        let v_sc_term = self.supercap_terminal(x);
        if self.case.has_battery() {
            dx[I_BATT] = (k.batt * v_dc - v_batt) / self.l_port;
            dx[SOC] = self.battery.soc_rate(-x[I_BATT]);
        }
        if self.case.has_supercap() {
            dx[I_SC] = (k.sc * v_dc - v_sc_term) / self.l_port;
            dx[V_SC] = self.supercap.voltage_rate(-x[I_SC]);
        }

        // DC node: machine terminals inject, grid terminals and ports draw
        let i_grid_abc = inv_park(x[I_GD], x[I_GQ], theta_g);
        let i_mach_abc = inv_park(s.i_d, s.i_q, theta_e);
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let i_net = dot(&k.machine, &i_mach_abc) - dot(&k.grid, &i_grid_abc) - k.sc * x[I_SC] - k.batt * x[I_BATT];
        dx[V_DC] = i_net / self.c_dc;

        let p_mech = t_mech * s.omega_m;
        let p_grid = 1.5 * (v_g.0 * x[I_GD] + v_g.1 * x[I_GQ]);
        let p_batt = v_batt * x[I_BATT];
        let p_sc = v_sc_term * x[I_SC];
        let p_loss = 1.5 * self.pmsg.r_s * (s.i_d * s.i_d + s.i_q * s.i_q)
            + 1.5 * self.grid.r_f * (x[I_GD] * x[I_GD] + x[I_GQ] * x[I_GQ]);
        dx[E_NET] = p_mech - p_grid - p_batt - p_sc - p_loss;

        Evaluation {
            dx,
            v_wind,
            t_mech,
            t_e: electrical_torque(&self.pmsg, s.i_d, s.i_q),
            p_mech,
            p_grid,
            p_batt,
            p_sc,
            p_loss,
            v_batt,
            v_sc_term,
            i_grid_abc,
            i_mach_abc,
        }
    }

    /// One classical fourth-order Runge–Kutta step with the connection held.
    pub fn rk4_step(&self, x: &StateVector, t: f64, h: f64, k: &Connection) -> StateVector {
        let f = |x: &StateVector, t: f64| self.evaluate(x, t, k).dx;
        let axpy = |x: &StateVector, a: f64, d: &StateVector| {
            let mut y = *x;
            for i in 0..STATE_LEN {
                y[i] += a * d[i];
            }
            y
        };
        let k1 = f(x, t);
        let k2 = f(&axpy(x, 0.5 * h, &k1), t + 0.5 * h);
        let k3 = f(&axpy(x, 0.5 * h, &k2), t + 0.5 * h);
        let k4 = f(&axpy(x, h, &k3), t + h);
        let mut y = *x;
        for i in 0..STATE_LEN {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        y
    }
}
