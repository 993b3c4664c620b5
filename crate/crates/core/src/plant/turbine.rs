//! Rotor aerodynamics: exponential power-coefficient curve at zero pitch.

use crate::scalar::{lit, Scalar};

/// Betz limit, 16/27.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

/// `cp = c1·(c2/λi − c3·β − c4)·exp(−c5/λi) + c6·λ`, with
/// `1/λi = 1/(λ + 0.08β) − 0.035/(β³ + 1)` and β = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpCurve<T> {
    pub c: [T; 6],
}

impl<T: Scalar> Default for CpCurve<T> {
    fn default() -> Self {
        Self { c: [lit(0.5176), lit(116.0), lit(0.4), lit(5.0), lit(21.0), lit(0.0068)] }
    }
}

impl<T: Scalar> CpCurve<T> {
    /// Power coefficient at tip-speed ratio `lambda`, clamped to [0, Betz].
    pub fn cp(&self, lambda: T) -> T {
        if !(lambda > T::zero()) {
            return T::zero();
        }
        let [c1, c2, _c3, c4, c5, c6] = self.c;
        let inv_li = lambda.recip() - lit(0.035);
        let raw = c1 * (c2 * inv_li - c4) * (-c5 * inv_li).exp() + c6 * lambda;
        raw.max(T::zero()).min(lit(BETZ_LIMIT))
    }

    /// Golden-section search for the peak of the curve on [1, 20].
    pub fn optimum(&self) -> (T, T) {
        let phi = lit::<T>(0.618_033_988_749_894_9);
        let (mut lo, mut hi) = (lit::<T>(1.0), lit::<T>(20.0));
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (self.cp(x1), self.cp(x2));
        for _ in 0..200 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = self.cp(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = self.cp(x1);
            }
            if hi - lo < lit(1e-12) {
                break;
            }
        }
        let lambda = (lo + hi) * lit(0.5);
        (lambda, self.cp(lambda))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineParams<T> {
    /// Air density (kg/m³).
    pub rho: T,
    /// Rotor radius (m).
    pub radius: T,
    pub cp_curve: CpCurve<T>,
    pub lambda_opt: T,
    pub cp_max: T,
    /// Speed floor used in λ and T = P/ω at standstill (rad/s).
    pub omega_floor: T,
}

impl<T: Scalar> TurbineParams<T> {
    pub fn new(rho: T, radius: T, cp_curve: CpCurve<T>) -> Self {
        let (lambda_opt, cp_max) = cp_curve.optimum();
        Self { rho, radius, cp_curve, lambda_opt, cp_max, omega_floor: lit(0.05) }
    }

    /// Radius chosen so the rotor captures `p_rated` at `v_rated` on the optimum.
    pub fn sized_for(p_rated: T, v_rated: T, rho: T, cp_curve: CpCurve<T>) -> Self {
        let (lambda_opt, cp_max) = cp_curve.optimum();
        let swept = p_rated / (lit::<T>(0.5) * rho * cp_max * v_rated.powi(3));
        let radius = (swept / T::PI()).sqrt();
        Self { rho, radius, cp_curve, lambda_opt, cp_max, omega_floor: lit(0.05) }
    }

    /// Power carried by the wind through the rotor disc.
    pub fn available_power(&self, v_wind: T) -> T {
        lit::<T>(0.5) * self.rho * T::PI() * self.radius * self.radius * v_wind.powi(3)
    }

    pub fn tip_speed_ratio(&self, v_wind: T, omega_m: T) -> T {
        if v_wind > T::zero() {
            omega_m.max(self.omega_floor) * self.radius / v_wind
        } else {
            T::infinity()
        }
    }

    /// Rotor speed that places the rotor on the optimum for `v_wind`.
    pub fn optimal_speed(&self, v_wind: T) -> T {
        self.lambda_opt * v_wind / self.radius
    }

    /// Gain of the optimal torque law `T = k·ω²`.
    pub fn k_opt(&self) -> T {
        lit::<T>(0.5) * self.rho * T::PI() * self.radius.powi(5) * self.cp_max / self.lambda_opt.powi(3)
    }
}

impl<T: Scalar> Default for TurbineParams<T> {
    /// Sized for 1.5 MW at 12 m/s with sea-level air.
    fn default() -> Self {
        Self::sized_for(lit(1.5e6), lit(12.0), lit(1.225), CpCurve::default())
    }
}

/// Aerodynamic shaft torque (N·m), never negative.
pub fn aero_torque<T: Scalar>(params: &TurbineParams<T>, v_wind: T, omega_m: T) -> T {
    if !(v_wind > T::zero()) {
        return T::zero();
    }
    let omega = omega_m.max(params.omega_floor);
    let lambda = omega * params.radius / v_wind;
    params.cp_curve.cp(lambda) * params.available_power(v_wind) / omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn curve_optimum() {
        let (lambda, cp) = CpCurve::<f64>::default().optimum();
        assert!((lambda - 8.1).abs() < 0.05, "lambda_opt {lambda}");
        assert!((cp - 0.48).abs() < 0.002, "cp_max {cp}");
    }

    #[test]
    fn zero_wind_zero_torque() {
        let t = TurbineParams::<f64>::default();
        assert_eq!(aero_torque(&t, 0.0, 2.0), 0.0);
        assert_eq!(aero_torque(&t, 0.0, 0.0), 0.0);
    }

    #[test]
    fn rated_point() {
        let t = TurbineParams::<f64>::default();
        let w = t.optimal_speed(12.0);
        let p = aero_torque(&t, 12.0, w) * w;
        assert!((1.49e6..=1.51e6).contains(&p), "{p}");
        assert_relative_eq!(p, t.cp_max * t.available_power(12.0), max_relative = 1e-12);
    }

    #[test]
    fn optimal_torque_law_balances_rotor() {
        let t = TurbineParams::<f64>::default();
        let w = t.optimal_speed(6.0);
        assert_relative_eq!(t.k_opt() * w * w, aero_torque(&t, 6.0, w), max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn betz_bound(v in 0.0..30.0f64, w in 0.0..10.0f64) {
            let t = TurbineParams::<f64>::default();
            let torque = aero_torque(&t, v, w);
            prop_assert!(torque >= 0.0);
            prop_assert!(torque * w.max(t.omega_floor) <= BETZ_LIMIT * t.available_power(v) * (1.0 + 1e-12));
        }
    }
}
