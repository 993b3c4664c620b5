//! Grid-side loops: dispatch power tracking and filter current control.

use super::machine::available_voltage;
use super::pi::PiState;
use crate::plant::network::GridParams;
use crate::scalar::{lit, Scalar};

/// Power setpoint for the grid side, per unit of the rated power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchCommand<T> {
    pub p_grid_ref: T,
    pub q_grid_ref: T,
}

impl<T: Scalar> DispatchCommand<T> {
    pub const LIMIT_PU: f64 = 1.2;

    pub fn new(p_grid_ref: T) -> Self {
        Self { p_grid_ref, q_grid_ref: T::zero() }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.p_grid_ref.abs() <= lit(Self::LIMIT_PU)) || !(self.q_grid_ref.abs() <= lit(Self::LIMIT_PU)) {
            return Err("dispatch setpoints must lie within ±1.2 pu");
        }
        Ok(())
    }
}

/// Sensor values used by the grid-side loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeasurements<T> {
    pub i_d: T,
    pub i_q: T,
    pub v_gd: T,
    pub v_gq: T,
    pub v_dc: T,
}

impl<T: Scalar> GridMeasurements<T> {
    pub fn p(&self) -> T {
        lit::<T>(1.5) * (self.v_gd * self.i_d + self.v_gq * self.i_q)
    }

    pub fn q(&self) -> T {
        lit::<T>(1.5) * (self.v_gq * self.i_d - self.v_gd * self.i_q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOutput<T> {
    pub v_d: T,
    pub v_q: T,
    pub i_d_ref: T,
    pub i_q_ref: T,
    pub current_limited: bool,
    pub voltage_limited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPowerControl<T> {
    pub grid: GridParams<T>,
    /// Power base for per-unit setpoints (W).
    pub p_base: T,
    /// Outer active-power loop, W error → A correction.
    pub pi_p: PiState<T>,
    pub pi_d: PiState<T>,
    pub pi_q: PiState<T>,
}

impl<T: Scalar> GridPowerControl<T> {
    /// Inner loops at `inner_hz` with cancelling zero; the outer power loop a
    /// decade or more slower at `outer_hz`.
    pub fn tuned(grid: GridParams<T>, p_base: T, inner_hz: T, outer_hz: T, v_limit: T) -> Self {
        let wc = T::TAU() * inner_hz;
        let wo = T::TAU() * outer_hz;
        let i_max = Self::current_limit_for(&grid, p_base);
        // power responds to i_d with gain 1.5·v_gd through the closed inner loop
        let p_per_amp = lit::<T>(1.5) * grid.v_phase_peak();
        Self {
            grid,
            p_base,
            pi_p: PiState::new(T::zero(), wo / p_per_amp, i_max),
            pi_d: PiState::for_rl_plant(grid.l_f, grid.r_f, wc, v_limit),
            pi_q: PiState::for_rl_plant(grid.l_f, grid.r_f, wc, v_limit),
        }
    }

    fn current_limit_for(grid: &GridParams<T>, p_base: T) -> T {
        lit::<T>(DispatchCommand::<T>::LIMIT_PU) * p_base / (lit::<T>(1.5) * grid.v_phase_peak())
    }

    /// Current magnitude corresponding to 1.2 pu at the nominal grid voltage.
    pub fn current_limit(&self) -> T {
        Self::current_limit_for(&self.grid, self.p_base)
    }

    /// Active power loop: dispatch in W → d-axis current reference.
    pub fn power_to_current(&mut self, p_ref: T, q_ref: T, meas: &GridMeasurements<T>, dt: T) -> (T, T) {
        let k = lit::<T>(1.5) * meas.v_gd;
        let correction = self.pi_p.update(p_ref - meas.p(), dt).value;
        (p_ref / k + correction, -q_ref / k)
    }

    /// Inner current loops with grid-voltage and cross-coupling feed-forward.
    pub fn current_control(&mut self, i_d_ref: T, i_q_ref: T, meas: &GridMeasurements<T>, dt: T) -> GridOutput<T> {
        let i_max = self.current_limit();
        let mag = i_d_ref.hypot(i_q_ref);
        let current_limited = mag > i_max;
        let (i_d_ref, i_q_ref) =
            if current_limited { (i_d_ref * i_max / mag, i_q_ref * i_max / mag) } else { (i_d_ref, i_q_ref) };
        let w_l = self.grid.omega() * self.grid.l_f;
        let u_d = self.pi_d.update(i_d_ref - meas.i_d, dt).value;
        let u_q = self.pi_q.update(i_q_ref - meas.i_q, dt).value;
        let mut v_d = u_d + meas.v_gd - w_l * meas.i_q;
        let mut v_q = u_q + meas.v_gq + w_l * meas.i_d;
        let v_max = available_voltage(meas.v_dc);
        let vm = v_d.hypot(v_q);
        let voltage_limited = vm > v_max;
        if voltage_limited {
            v_d *= v_max / vm;
            v_q *= v_max / vm;
            self.pi_d.revert();
            self.pi_q.revert();
        }
        GridOutput { v_d, v_q, i_d_ref, i_q_ref, current_limited, voltage_limited }
    }

    /// Full dispatch path: per-unit command → converter voltage references.
    pub fn update(&mut self, cmd: &DispatchCommand<T>, meas: &GridMeasurements<T>, dt: T) -> GridOutput<T> {
        let (i_d, i_q) = self.power_to_current(cmd.p_grid_ref * self.p_base, cmd.q_grid_ref * self.p_base, meas, dt);
        self.current_control(i_d, i_q, meas, dt)
    }
}

pub fn grid_power_control<T: Scalar>(
    ctrl: &mut GridPowerControl<T>,
    cmd: &DispatchCommand<T>,
    meas: &GridMeasurements<T>,
    dt: T,
) -> GridOutput<T> {
    ctrl.update(cmd, meas, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::network::grid_interface_derivatives;
    use approx::assert_relative_eq;

    fn ctrl() -> GridPowerControl<f64> {
        GridPowerControl::tuned(GridParams::default(), 1.5e6, 500.0, 50.0, 500.0)
    }

    #[test]
    fn matched_power_keeps_feedforward_reference() {
        let mut c = ctrl();
        let v = c.grid.v_phase_peak();
        let i_d = 0.3 * 1.5e6 / (1.5 * v);
        let m = GridMeasurements { i_d, i_q: 0.0, v_gd: v, v_gq: 0.0, v_dc: 2000.0 };
        let (d, q) = c.power_to_current(0.3 * 1.5e6, 0.0, &m, 1e-4);
        assert_relative_eq!(d, i_d, max_relative = 1e-12);
        assert_eq!(q, 0.0);
        // 450 kW at 575 V
        assert_relative_eq!(d, 450e3 / (1.5 * 469.485_534_033_442_5), max_relative = 1e-9);
    }

    #[test]
    fn rejects_large_dispatch() {
        assert!(DispatchCommand::new(1.3).validate().is_err());
        assert!(DispatchCommand::new(-0.5).validate().is_ok());
    }

    #[test]
    fn current_limit_flag() {
        let mut c = ctrl();
        let v = c.grid.v_phase_peak();
        let m = GridMeasurements { i_d: 0.0, i_q: 0.0, v_gd: v, v_gq: 0.0, v_dc: 2000.0 };
        let out = c.current_control(5000.0, 0.0, &m, 1e-4);
        assert!(out.current_limited);
        assert_relative_eq!(out.i_d_ref, c.current_limit(), max_relative = 1e-12);
    }

    #[test]
    fn closed_loop_tracks_dispatch_with_zero_reactive_current() {
        let mut c = ctrl();
        let g = c.grid;
        let mut i = (0.0f64, 0.0f64);
        let cmd = DispatchCommand::new(0.3);
        let h = 1e-5;
        // ramp the setpoint so the inner loops stay inside the voltage limit
        for k in 0..5000 {
            let ramp = (k as f64 * 1e-4 / 0.3).min(1.0);
            let m = GridMeasurements { i_d: i.0, i_q: i.1, v_gd: g.v_phase_peak(), v_gq: 0.0, v_dc: 2000.0 };
            let out = c.update(&DispatchCommand::new(cmd.p_grid_ref * ramp), &m, 1e-4);
            assert!(!out.voltage_limited);
            for _ in 0..10 {
                let d = grid_interface_derivatives(i, (out.v_d, out.v_q), g.v_dq(), &g);
                i.0 += h * d.0;
                i.1 += h * d.1;
            }
        }
        let p = 1.5 * g.v_phase_peak() * i.0;
        assert_relative_eq!(p, 450e3, max_relative = 1e-3);
        assert!(i.1.abs() < 1.0, "{}", i.1);
    }
}
