//! Hybrid storage dispatch: CC/CV battery with the supercapacitor taking the
//! remainder, DC-link voltage regulation and the DC/DC port current loops.

use super::pi::PiState;
use crate::plant::storage::BatteryParams;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BattMode {
    #[default]
    Idle,
    /// Constant current at ±i_cc.
    Cc,
    /// Charging with the terminal voltage held at the CV threshold.
    Cv,
    /// Sole storage element: absorbs the whole excess, no current regime.
    Follow,
}

impl BattMode {
    pub fn code(self) -> u8 {
        match self {
            BattMode::Idle => 0,
            BattMode::Cc => 1,
            BattMode::Cv => 2,
            BattMode::Follow => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BattMode::Idle),
            1 => Some(BattMode::Cc),
            2 => Some(BattMode::Cv),
            3 => Some(BattMode::Follow),
            _ => None,
        }
    }
}

/// Storage power allocation; positive values charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessSplit<T> {
    pub p_batt_ref: T,
    pub p_sc_ref: T,
    pub batt_mode: BattMode,
}

/// Battery charge/discharge policy with CV hysteresis state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessPolicy<T> {
    pub i_cc: T,
    pub v_cv: T,
    pub cv_hysteresis: T,
    /// Below this |excess| the battery idles (W).
    pub deadband: T,
    pub soc_min: T,
    pub soc_max: T,
    pub battery: BatteryParams<T>,
    cv_latched: bool,
}

impl<T: Scalar> HessPolicy<T> {
    pub fn new(i_cc: T, battery: BatteryParams<T>) -> Self {
        Self {
            i_cc,
            v_cv: lit(800.0),
            cv_hysteresis: lit(5.0),
            deadband: lit(0.01 * 1.5e6),
            soc_min: lit(0.05),
            soc_max: lit(0.95),
            battery,
            cv_latched: false,
        }
    }

    pub fn cv_latched(&self) -> bool {
        self.cv_latched
    }

    /// Splits `p_wt − p_dispatch` between battery and supercapacitor.
    ///
    /// `v_batt` is the measured battery terminal voltage.
    pub fn split(&mut self, p_wt: T, p_dispatch: T, v_batt: T, soc: T) -> HessSplit<T> {
        let excess = p_wt - p_dispatch;
        let charging = excess > T::zero();

        if v_batt >= self.v_cv {
            self.cv_latched = true;
        } else if v_batt < self.v_cv - self.cv_hysteresis {
            self.cv_latched = false;
        }

        let blocked = (charging && soc >= self.soc_max) || (!charging && soc <= self.soc_min);
        let (p_batt_ref, batt_mode) = if excess.abs() < self.deadband || blocked {
            (T::zero(), BattMode::Idle)
        } else if charging && self.cv_latched {
            let i_cv = ((self.v_cv - self.battery.ocv(soc)) / self.battery.r_int).max(T::zero()).min(self.i_cc);
            (excess.min(i_cv * v_batt), BattMode::Cv)
        } else {
            let cap = self.i_cc * v_batt;
            (excess.signum() * excess.abs().min(cap), BattMode::Cc)
        };

        HessSplit { p_batt_ref, p_sc_ref: excess - p_batt_ref, batt_mode }
    }
}

/// Stateless split with default thresholds and the CV latch released.
pub fn hess_power_split<T: Scalar>(p_wt: T, p_dispatch: T, v_batt: T, soc: T, i_cc: T) -> HessSplit<T> {
    HessPolicy::new(i_cc, BatteryParams::default()).split(p_wt, p_dispatch, v_batt, soc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcLinkOutput<T> {
    /// Extra current to inject into the DC link from storage (A).
    pub i_corr: T,
    pub limited: bool,
}

/// PI on the DC-link voltage error; the output adds to the storage port
/// discharge current.
pub fn dc_link_voltage_control<T: Scalar>(v_dc_ref: T, v_dc: T, pi: &mut PiState<T>, dt: T) -> DcLinkOutput<T> {
    let out = pi.update(v_dc_ref - v_dc, dt);
    DcLinkOutput { i_corr: out.value, limited: out.saturated }
}

/// Duty window of one DC/DC port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DutyBounds<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> DutyBounds<T> {
    /// Upper (supercapacitor) port: never below the lower port's ceiling.
    pub fn upper_port() -> Self {
        Self { min: lit(0.5), max: lit(0.95) }
    }

    /// Lower (battery) port.
    pub fn lower_port() -> Self {
        Self { min: lit(0.05), max: lit(0.5) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortOutput<T> {
    pub duty: T,
    pub clamped: bool,
}

/// Port current loop: duty = `v_port/v_dc` feed-forward + PI on current
/// error. Currents are positive into the storage element.
pub fn port_current_control<T: Scalar>(
    i_ref: T,
    i_meas: T,
    v_port: T,
    v_dc: T,
    pi: &mut PiState<T>,
    bounds: &DutyBounds<T>,
    dt: T,
) -> PortOutput<T> {
    let ff = v_port / v_dc;
    let corr = pi.update(i_ref - i_meas, dt).value;
    let raw = ff + corr;
    let duty = raw.max(bounds.min).min(bounds.max);
    let clamped = duty != raw;
    if clamped {
        pi.revert();
    }
    PortOutput { duty, clamped }
}

/// Port current PI for inductance `l` behind a leg at `v_dc`.
pub fn port_pi<T: Scalar>(l: T, v_dc: T, bandwidth_hz: T) -> PiState<T> {
    let wc = T::TAU() * bandwidth_hz;
    PiState::for_integrator(v_dc / l, wc, lit(5.0), lit(0.45))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_excess_idles() {
        let s = hess_power_split(300e3, 300e3, 750.0, 0.5, 50.0);
        assert_eq!(s, HessSplit { p_batt_ref: 0.0, p_sc_ref: 0.0, batt_mode: BattMode::Idle });
    }

    #[test]
    fn cc_split_both_directions() {
        let s = hess_power_split(400e3, 300e3, 750.0, 0.5, 50.0);
        assert_eq!(s.batt_mode, BattMode::Cc);
        assert_relative_eq!(s.p_batt_ref, 37.5e3, max_relative = 1e-12);
        assert_relative_eq!(s.p_sc_ref, 62.5e3, max_relative = 1e-12);
        let s = hess_power_split(200e3, 300e3, 750.0, 0.5, 50.0);
        assert_relative_eq!(s.p_batt_ref, -37.5e3, max_relative = 1e-12);
        assert_relative_eq!(s.p_sc_ref, -62.5e3, max_relative = 1e-12);
    }

    #[test]
    fn small_excess_goes_to_battery() {
        let s = hess_power_split(325e3, 300e3, 750.0, 0.5, 50.0);
        assert_eq!(s.batt_mode, BattMode::Cc);
        assert_relative_eq!(s.p_batt_ref, 25e3, max_relative = 1e-12);
        assert_eq!(s.p_sc_ref, 0.0);
    }

    #[test]
    fn soc_limits_route_everything_to_supercap() {
        let full = hess_power_split(400e3, 300e3, 790.0, 0.96, 50.0);
        assert_eq!(full.batt_mode, BattMode::Idle);
        assert_eq!(full.p_sc_ref, 100e3);
        let empty = hess_power_split(200e3, 300e3, 705.0, 0.04, 50.0);
        assert_eq!(empty.batt_mode, BattMode::Idle);
        assert_eq!(empty.p_sc_ref, -100e3);
    }

    #[test]
    fn cv_with_hysteresis() {
        let mut pol = HessPolicy::new(50.0, BatteryParams::default());
        pol.soc_max = 1.0;
        // soc 0.93 → OCV 793 V; CV current (800 − 793)/0.05 = 140 A, capped at i_cc
        let s = pol.split(400e3, 300e3, 800.5, 0.93);
        assert_eq!(s.batt_mode, BattMode::Cv);
        assert_relative_eq!(s.p_batt_ref, 50.0 * 800.5, max_relative = 1e-12);
        // soc 0.99 → OCV 799 V; CV current 20 A
        let s = pol.split(400e3, 300e3, 797.0, 0.99);
        assert_eq!(s.batt_mode, BattMode::Cv);
        assert_relative_eq!(s.p_batt_ref, 797.0 * 20.0, max_relative = 1e-9);
        // inside the band the latch holds; below it releases
        assert!(pol.split(400e3, 300e3, 796.0, 0.9).batt_mode == BattMode::Cv);
        assert!(pol.split(400e3, 300e3, 794.0, 0.9).batt_mode == BattMode::Cc);
    }

    #[test]
    fn dc_link_regulator_idle_at_reference() {
        let mut pi = PiState::new(50.0, 4000.0, 1500.0);
        let out = dc_link_voltage_control(2000.0, 2000.0, &mut pi, 1e-4);
        assert_eq!(out.i_corr, 0.0);
        assert!(!out.limited);
    }

    #[test]
    fn port_feedforward_duties() {
        let mut pi = port_pi(1.05e-3, 2000.0, 500.0);
        let sc = port_current_control(0.0, 0.0, 1250.0, 2000.0, &mut pi, &DutyBounds::upper_port(), 1e-4);
        assert_eq!(sc.duty, 0.625);
        let b = port_current_control(0.0, 0.0, 750.0, 2000.0, &mut pi, &DutyBounds::lower_port(), 1e-4);
        assert_eq!(b.duty, 0.375);
        let hi = port_current_control(1e6, 0.0, 750.0, 2000.0, &mut pi, &DutyBounds::lower_port(), 1e-4);
        assert!(hi.clamped);
        assert_eq!(hi.duty, 0.5);
    }

    #[test]
    fn battery_current_step_settles() {
        let b = BatteryParams::<f64>::default();
        let l = 1.05e-3;
        let mut pi = port_pi(l, 2000.0, 500.0);
        let mut i = 0.0f64; // charging positive
        let soc = 0.5;
        let h = 1e-5;
        let mut settled_at = None;
        for k in 0..400 {
            let v_term = b.ocv(soc) + i * b.r_int;
            let out = port_current_control(50.0, i, v_term, 2000.0, &mut pi, &DutyBounds::lower_port(), 1e-4);
            for _ in 0..10 {
                let di = (out.duty * 2000.0 - b.ocv(soc) - i * b.r_int) / l;
                i += h * di;
            }
            if (i - 50.0).abs() > 2.5 {
                settled_at = None;
            } else if settled_at.is_none() {
                settled_at = Some(k);
            }
        }
        let k = settled_at.expect("never settled");
        assert!((k as f64) * 1e-4 < 0.02, "settled after {} ms", k as f64 * 0.1);
    }

    proptest! {
        #[test]
        fn split_conserves_power(p_wt in 0.0..2e6f64, p_d in -1.8e6..1.8e6f64, v in 690.0..810.0f64, soc in 0.0..1.0f64) {
            let s = hess_power_split(p_wt, p_d, v, soc, 50.0);
            let excess = p_wt - p_d;
            prop_assert!((s.p_batt_ref + s.p_sc_ref - excess).abs() <= 4.0 * f64::EPSILON * excess.abs().max(1.0));
            if s.batt_mode == BattMode::Cc && excess.abs() >= 50.0 * v {
                prop_assert!((s.p_batt_ref.abs() / v - 50.0).abs() < 1e-9);
            }
        }
    }
}
