//! Permanent-magnet synchronous generator in the rotor dq frame.
//!
//! Generator convention: stator currents are positive flowing out of the
//! machine, `v_d`/`v_q` are terminal voltages, and positive `i_q` develops
//! braking torque against the positive wind torque.

use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct PmsgParams<T> {
    #[serde(rename = "r_s_ohms")]
    pub r_s: T,
    #[serde(rename = "l_d_henries")]
    pub l_d: T,
    #[serde(rename = "l_q_henries")]
    pub l_q: T,
    #[serde(rename = "psi_m_volt_seconds")]
    pub psi_m: T,
    #[serde(rename = "pole_pairs")]
    pub p: u32,
    #[serde(rename = "inertia_kg_m2")]
    pub j: T,
    #[serde(rename = "rated_power_watts")]
    pub p_rated: T,
}

impl<T: Scalar> Default for PmsgParams<T> {
    /// 1.5 MW direct-drive machine.
    fn default() -> Self {
        Self {
            r_s: lit(0.006),
            l_d: lit(0.3e-3),
            l_q: lit(0.3e-3),
            psi_m: lit(1.48),
            p: 40,
            j: lit(3.5e4),
            p_rated: lit(1.5e6),
        }
    }
}

impl<T: Scalar> PmsgParams<T> {
    pub fn validate(&self) -> Result<(), &'static str> {
        let positive = [self.r_s, self.l_d, self.l_q, self.psi_m, self.j, self.p_rated];
        if positive.iter().any(|v| !(*v > T::zero() && v.is_finite())) || self.p == 0 {
            return Err("all machine parameters must be strictly positive");
        }
        Ok(())
    }

    pub fn pole_pairs(&self) -> T {
        T::from_u32(self.p).unwrap()
    }

    /// Torque per ampere of q-axis current, `1.5·p·ψm`.
    pub fn torque_constant(&self) -> T {
        lit::<T>(1.5) * self.pole_pairs() * self.psi_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmsgState<T> {
    pub i_d: T,
    pub i_q: T,
    /// Mechanical speed (rad/s).
    pub omega_m: T,
    /// Electrical angle (rad), wrapped to [0, 2π) by the integrator.
    pub theta_e: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmsgDerivative<T> {
    pub di_d: T,
    pub di_q: T,
    pub domega_m: T,
    pub dtheta_e: T,
}

/// Electromagnetic (braking) torque.
pub fn electrical_torque<T: Scalar>(params: &PmsgParams<T>, i_d: T, i_q: T) -> T {
    let pp = params.pole_pairs();
    lit::<T>(1.5) * pp * (params.psi_m * i_q + (params.l_q - params.l_d) * i_d * i_q)
}

pub fn pmsg_derivatives<T: Scalar>(
    params: &PmsgParams<T>,
    state: &PmsgState<T>,
    v_d: T,
    v_q: T,
    t_mech: T,
) -> PmsgDerivative<T> {
    let omega_e = params.pole_pairs() * state.omega_m;
    let di_d = (-v_d - params.r_s * state.i_d + omega_e * params.l_q * state.i_q) / params.l_d;
    let di_q = (-v_q - params.r_s * state.i_q - omega_e * (params.l_d * state.i_d - params.psi_m)) / params.l_q;
    let t_e = electrical_torque(params, state.i_d, state.i_q);
    PmsgDerivative { di_d, di_q, domega_m: (t_mech - t_e) / params.j, dtheta_e: omega_e }
}

/// Power delivered at the stator terminals.
pub fn terminal_power<T: Scalar>(v_d: T, v_q: T, i_d: T, i_q: T) -> T {
    lit::<T>(1.5) * (v_d * i_d + v_q * i_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn torque_values() {
        let p = PmsgParams::<f64>::default();
        assert_eq!(electrical_torque(&p, 0.0, 0.0), 0.0);
        assert_relative_eq!(electrical_torque(&p, 0.0, 100.0), 8880.0, max_relative = 1e-12);
        assert_eq!(electrical_torque(&p, 350.0, 100.0), electrical_torque(&p, -900.0, 100.0));
    }

    #[test]
    fn steady_state_voltage() {
        let p = PmsgParams::<f64>::default();
        let s = PmsgState { i_d: 0.0, i_q: 1200.0, omega_m: 1.6, theta_e: 0.0 };
        let omega_e = 40.0 * 1.6;
        let v_q = omega_e * p.psi_m - p.r_s * s.i_q;
        let v_d = omega_e * p.l_q * s.i_q;
        let t_e = electrical_torque(&p, 0.0, s.i_q);
        let d = pmsg_derivatives(&p, &s, v_d, v_q, t_e);
        assert_abs_diff_eq!(d.di_d, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.di_q, 0.0, epsilon = 1e-9);
        assert_eq!(d.domega_m, 0.0);
        assert_eq!(d.dtheta_e, omega_e);
    }

    #[test]
    fn energy_consistency() {
        // stator power + losses + magnetic energy rate = electromechanical power
        let p = PmsgParams { l_d: 0.25e-3, ..PmsgParams::<f64>::default() };
        let s = PmsgState { i_d: -300.0, i_q: 900.0, omega_m: 2.0, theta_e: 1.0 };
        let (v_d, v_q) = (120.0, 90.0);
        let d = pmsg_derivatives(&p, &s, v_d, v_q, 0.0);
        let p_out = terminal_power(v_d, v_q, s.i_d, s.i_q);
        let loss = 1.5 * p.r_s * (s.i_d * s.i_d + s.i_q * s.i_q);
        let w_rate = 1.5 * (p.l_d * s.i_d * d.di_d + p.l_q * s.i_q * d.di_q);
        let p_em = electrical_torque(&p, s.i_d, s.i_q) * s.omega_m;
        assert_relative_eq!(p_out + loss + w_rate, p_em, max_relative = 1e-9);
    }

    #[test]
    fn locked_rotor_rl_response() {
        let p = PmsgParams::<f64>::default();
        let tau = p.l_q / p.r_s;
        assert_relative_eq!(tau, 0.05, max_relative = 1e-12);
        let v_q = -6.0;
        let mut s = PmsgState::default();
        let h = 1e-5;
        let mut t = 0.0;
        while t < 0.1 - 1e-12 {
            // forward Euler is adequate at h = τ/5000 for a 1e-3 check
            let d = pmsg_derivatives(&p, &s, 0.0, v_q, 0.0);
            s.i_q += h * d.di_q;
            t += h;
        }
        let expected = -v_q / p.r_s * (1.0 - (-t / tau).exp());
        assert_relative_eq!(s.i_q, expected, max_relative = 1e-3);
    }
}
