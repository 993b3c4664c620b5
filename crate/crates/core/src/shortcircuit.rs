//! Shoot-through current through the embedded leg inductors.
//!
//! With all three switches of a leg on, the DC link drives current through
//! the two embedded inductors and the conducting devices, i.e. a series RL
//! circuit with a non-zero initial current.

use crate::scalar::{lit, Scalar};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootThroughError {
    #[error("invalid shoot-through parameters: {0}")]
    InvalidParams(&'static str),
    #[error("current limit {limit} A is never reached (asymptote {asymptote} A)")]
    UnreachableLimit { limit: f64, asymptote: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootThroughParams<T> {
    /// Current already flowing in the path when the fault starts (A).
    pub i_l0: T,
    pub v_dc: T,
    /// Total path resistance (Ω).
    pub r_eq: T,
    /// Total path inductance (H).
    pub l_eq: T,
}

impl<T: Scalar> ShootThroughParams<T> {
    /// Two embedded 50 µH inductors, 20 mΩ path, 2 kV link, no initial current.
    pub fn embedded_default() -> Self {
        Self { i_l0: T::zero(), v_dc: lit(2000.0), r_eq: lit(0.02), l_eq: lit(100e-6) }
    }

    pub fn validate(&self) -> Result<(), ShootThroughError> {
        if !(self.r_eq > T::zero()) {
            return Err(ShootThroughError::InvalidParams("r_eq must be positive"));
        }
        if !(self.l_eq > T::zero()) {
            return Err(ShootThroughError::InvalidParams("l_eq must be positive"));
        }
        if !(self.v_dc >= T::zero()) {
            return Err(ShootThroughError::InvalidParams("v_dc must be non-negative"));
        }
        if !self.i_l0.is_finite() {
            return Err(ShootThroughError::InvalidParams("i_l0 must be finite"));
        }
        Ok(())
    }

    pub fn time_constant(&self) -> T {
        self.l_eq / self.r_eq
    }

    /// Current the path settles to, `v_dc / r_eq`.
    pub fn asymptote(&self) -> T {
        self.v_dc / self.r_eq
    }
}

/// Path current `t` seconds after all three switches turn on.
pub fn shoot_through_current<T: Scalar>(p: &ShootThroughParams<T>, t: T) -> T {
    // exp_m1 keeps the small-t regime accurate
    let decay = -(-t / p.time_constant()).exp_m1();
    p.i_l0 + (p.asymptote() - p.i_l0) * decay
}

/// Time at which the path current first reaches `i_limit`.
///
/// Returns zero when the current already starts at or above the limit.
pub fn time_to_current_limit<T: Scalar>(p: &ShootThroughParams<T>, i_limit: T) -> Result<T, ShootThroughError> {
    p.validate()?;
    let asymptote = p.asymptote();
    if i_limit >= asymptote {
        return Err(ShootThroughError::UnreachableLimit {
            limit: i_limit.to_f64().unwrap_or(f64::NAN),
            asymptote: asymptote.to_f64().unwrap_or(f64::NAN),
        });
    }
    if i_limit <= p.i_l0 {
        return Ok(T::zero());
    }
    let fraction = (i_limit - p.i_l0) * p.r_eq / (p.v_dc - p.i_l0 * p.r_eq);
    Ok(-p.time_constant() * (-fraction).ln_1p())
}

/// Sampled waveform `(t, i)` from 0 to `t_max` inclusive.
pub fn shoot_through_trace<T: Scalar>(p: &ShootThroughParams<T>, t_max: T, samples: usize) -> Vec<(T, T)> {
    let n = samples.max(2);
    let last = T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|k| {
            let t = t_max * T::from_usize(k).unwrap() / last;
            (t, shoot_through_current(p, t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn initial_and_final_values() {
        let p = ShootThroughParams::<f64>::embedded_default();
        assert_eq!(shoot_through_current(&p, 0.0), 0.0);
        assert_relative_eq!(shoot_through_current(&p, 1.0), 1e5, max_relative = 1e-12);
    }

    #[test]
    fn one_microsecond() {
        let p = ShootThroughParams::<f64>::embedded_default();
        // 1e5 · (1 - e^(-1e-6/5e-3))
        assert_relative_eq!(shoot_through_current(&p, 1e-6), 19.998_000_133_326_667, max_relative = 1e-12);
    }

    #[test]
    fn crossing_times() {
        let p = ShootThroughParams::<f64>::embedded_default();
        let t = time_to_current_limit(&p, 100.0).unwrap();
        // -5 ms · ln(1 - 1e-3)
        assert_relative_eq!(t, 5.002_501_667_917_1e-6, max_relative = 1e-10);
        assert_relative_eq!(shoot_through_current(&p, t), 100.0, max_relative = 1e-9);

        let stray = ShootThroughParams { l_eq: 1e-6, ..p };
        let ts = time_to_current_limit(&stray, 100.0).unwrap();
        assert_relative_eq!(ts, 5.002_501_667_917_1e-8, max_relative = 1e-10);
        assert_relative_eq!(t / ts, 100.0, max_relative = 1e-12);

        let near = time_to_current_limit(&p, 1e-9).unwrap();
        assert!(near < 1e-15);
        assert_eq!(time_to_current_limit(&ShootThroughParams { i_l0: 200.0, ..p }, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn unreachable_limit() {
        let p = ShootThroughParams::<f64>::embedded_default();
        assert!(matches!(time_to_current_limit(&p, 1e5), Err(ShootThroughError::UnreachableLimit { .. })));
        assert!(time_to_current_limit(&ShootThroughParams { r_eq: 0.0, ..p }, 10.0).is_err());
    }

    #[test]
    fn decreasing_when_above_asymptote() {
        let p = ShootThroughParams { i_l0: 2e5, ..ShootThroughParams::<f64>::embedded_default() };
        let trace = shoot_through_trace(&p, 0.02, 200);
        assert!(trace.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn single_precision() {
        let p = ShootThroughParams::<f32>::embedded_default();
        let t = time_to_current_limit(&p, 100.0).unwrap();
        assert!((t - 5.0025e-6).abs() < 1e-9);
    }
}
