//! Machine-side loops: optimal-torque MPPT and dq current control.

use super::pi::PiState;
use crate::modulation::MODULATION_INDEX_LIMIT;
use crate::plant::pmsg::{PmsgParams, PmsgState};
use crate::scalar::{lit, Scalar};

/// Optimal-torque law `T = k_opt·ω²`.
pub fn mppt_torque_ref<T: Scalar>(omega_m: T, k_opt: T) -> T {
    let w = omega_m.max(T::zero());
    k_opt * w * w
}

/// Largest phase-voltage amplitude the dual-output leg can synthesise.
pub fn available_voltage<T: Scalar>(v_dc: T) -> T {
    lit::<T>(0.5 * MODULATION_INDEX_LIMIT) * v_dc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineOutput<T> {
    pub v_d: T,
    pub v_q: T,
    pub i_q_ref: T,
    /// The voltage vector was scaled back to the available voltage.
    pub saturated: bool,
}

/// Field-oriented current control with `i_d = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineCurrentControl<T> {
    pub params: PmsgParams<T>,
    pub pi_d: PiState<T>,
    pub pi_q: PiState<T>,
}

impl<T: Scalar> MachineCurrentControl<T> {
    /// Cancelling-zero tuning at the given closed-loop bandwidth (Hz).
    pub fn tuned(params: PmsgParams<T>, bandwidth_hz: T, v_limit: T) -> Self {
        let wc = T::TAU() * bandwidth_hz;
        Self {
            params,
            pi_d: PiState::for_rl_plant(params.l_d, params.r_s, wc, v_limit),
            pi_q: PiState::for_rl_plant(params.l_q, params.r_s, wc, v_limit),
        }
    }

    pub fn current_ref(&self, t_ref: T) -> T {
        t_ref / self.params.torque_constant()
    }

    /// Terminal voltage references for the torque command `t_ref`.
    pub fn update(&mut self, t_ref: T, state: &PmsgState<T>, v_dc: T, dt: T) -> MachineOutput<T> {
        let p = &self.params;
        let i_q_ref = self.current_ref(t_ref);
        let omega_e = p.pole_pairs() * state.omega_m;
        let u_d = self.pi_d.update(-state.i_d, dt).value;
        let u_q = self.pi_q.update(i_q_ref - state.i_q, dt).value;
        // generator convention: v = −(R + sL)i + back-EMF terms
        let mut v_d = -u_d + omega_e * p.l_q * state.i_q;
        let mut v_q = -u_q - omega_e * p.l_d * state.i_d + omega_e * p.psi_m;
        let v_max = available_voltage(v_dc);
        let mag = v_d.hypot(v_q);
        let saturated = mag > v_max;
        if saturated {
            let k = v_max / mag;
            v_d *= k;
            v_q *= k;
            self.pi_d.revert();
            self.pi_q.revert();
        }
        MachineOutput { v_d, v_q, i_q_ref, saturated }
    }
}

/// One-shot form of [`MachineCurrentControl::update`].
pub fn machine_current_control<T: Scalar>(
    ctrl: &mut MachineCurrentControl<T>,
    t_ref: T,
    state: &PmsgState<T>,
    v_dc: T,
    dt: T,
) -> MachineOutput<T> {
    ctrl.update(t_ref, state, v_dc, dt)
}
