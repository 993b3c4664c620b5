//! DC-link node and the L-filter between the inverter and a stiff grid.

use crate::scalar::{lit, Scalar};

/// `dv_dc/dt` for a net current `i_net` flowing into the capacitor node.
pub fn dc_link_derivative<T: Scalar>(c_dc: T, i_net: T) -> T {
    i_net / c_dc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams<T> {
    /// Line-to-line RMS voltage.
    pub v_ll_rms: T,
    pub frequency: T,
    /// Filter inductance per phase (H).
    pub l_f: T,
    /// Filter resistance per phase (Ω).
    pub r_f: T,
}

impl<T: Scalar> Default for GridParams<T> {
    /// 575 V, 60 Hz, 0.1 mH / 2 mΩ filter.
    fn default() -> Self {
        Self { v_ll_rms: lit(575.0), frequency: lit(60.0), l_f: lit(0.1e-3), r_f: lit(2e-3) }
    }
}

impl<T: Scalar> GridParams<T> {
    /// Peak phase voltage, `√2/√3 · V_ll`.
    pub fn v_phase_peak(&self) -> T {
        self.v_ll_rms * (lit::<T>(2.0) / lit(3.0)).sqrt()
    }

    pub fn omega(&self) -> T {
        T::TAU() * self.frequency
    }

    /// Grid voltage in a frame whose d-axis is aligned with phase a.
    pub fn v_dq(&self) -> (T, T) {
        (self.v_phase_peak(), T::zero())
    }
}

/// Current derivatives of the filter in the grid-synchronous frame; current
/// positive from converter to grid.
pub fn grid_interface_derivatives<T: Scalar>(
    i_dq: (T, T),
    v_conv_dq: (T, T),
    v_grid_dq: (T, T),
    params: &GridParams<T>,
) -> (T, T) {
    let w_l = params.omega() * params.l_f;
    let di_d = (v_conv_dq.0 - v_grid_dq.0 - params.r_f * i_dq.0 + w_l * i_dq.1) / params.l_f;
    let di_q = (v_conv_dq.1 - v_grid_dq.1 - params.r_f * i_dq.1 - w_l * i_dq.0) / params.l_f;
    (di_d, di_q)
}

/// Active power delivered into the grid.
pub fn grid_power<T: Scalar>(v_grid_dq: (T, T), i_dq: (T, T)) -> T {
    lit::<T>(1.5) * (v_grid_dq.0 * i_dq.0 + v_grid_dq.1 * i_dq.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dc_link() {
        assert_eq!(dc_link_derivative(0.1, 0.0), 0.0);
        assert_relative_eq!(dc_link_derivative(0.1, 100.0), 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn dc_link_energy_matches_trapezoidal_integral() {
        let c = 0.1;
        let i_net = |t: f64| 300.0 * (40.0 * t).sin() + 50.0;
        let h = 1e-5;
        let mut v = 2000.0;
        let mut energy_in = 0.0;
        for k in 0..20_000 {
            let t = k as f64 * h;
            // RK4 on the node, trapezoid on v·i
            let f = |tt: f64| dc_link_derivative(c, i_net(tt));
            let k1 = f(t);
            let k2 = f(t + h / 2.0);
            let k4 = f(t + h);
            let v_next = v + h / 6.0 * (k1 + 4.0 * k2 + k4);
            energy_in += 0.5 * h * (v * i_net(t) + v_next * i_net(t + h));
            v = v_next;
        }
        let stored = 0.5 * c * (v * v - 2000.0 * 2000.0);
        assert_relative_eq!(stored, energy_in, max_relative = 1e-3);
    }

    #[test]
    fn grid_equilibrium_and_power() {
        let g = GridParams::<f64>::default();
        assert_eq!(grid_interface_derivatives((0.0, 0.0), g.v_dq(), g.v_dq(), &g), (0.0, 0.0));
        assert_relative_eq!(g.v_phase_peak(), 469.485_534_033_4, max_relative = 1e-10);
        let i = (1000.0, 0.0);
        assert_relative_eq!(grid_power(g.v_dq(), i), 1.5 * g.v_phase_peak() * 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn filter_time_constant() {
        let g = GridParams::<f64>::default();
        let tau = g.l_f / g.r_f;
        // d-axis step with the cross-coupling held out by a zero-frequency grid
        let g0 = GridParams { frequency: 0.0, ..g };
        let mut i = (0.0, 0.0);
        let h = 1e-5;
        let v = (10.0, 0.0);
        let n = (tau / h).round() as usize;
        for _ in 0..n {
            let d = grid_interface_derivatives(i, v, (0.0, 0.0), &g0);
            let mid = (i.0 + 0.5 * h * d.0, i.1);
            let d2 = grid_interface_derivatives(mid, v, (0.0, 0.0), &g0);
            i.0 += h * d2.0;
        }
        let expected = 10.0 / g.r_f * (1.0 - (-1.0f64).exp());
        assert_relative_eq!(i.0, expected, max_relative = 1e-6);
    }
}
