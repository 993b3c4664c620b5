//! Conversion of dq voltage commands into [0, 1] leg references.

use crate::modulation::{ThreePhaseRef, MODULATION_INDEX_LIMIT};
use crate::scalar::{lit, Scalar};
use crate::transforms::inv_park;

/// Modulation index implied by a phase-voltage amplitude, `2·|v|/v_dc`.
pub fn implied_modulation_index<T: Scalar>(v_d: T, v_q: T, v_dc: T) -> T {
    lit::<T>(2.0) * v_d.hypot(v_q) / v_dc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegReferences<T> {
    pub refs: ThreePhaseRef<T>,
    /// Modulation index after any scaling.
    pub m: T,
    /// The command exceeded the 0.5 limit and was scaled down uniformly.
    pub overmodulated: bool,
}

/// Inverse Park at `theta`, then `0.5 + v_phase/v_dc` per phase.
pub fn references_from_voltages<T: Scalar>(v_d: T, v_q: T, theta: T, v_dc: T) -> LegReferences<T> {
    let m = implied_modulation_index(v_d, v_q, v_dc);
    let limit = lit::<T>(MODULATION_INDEX_LIMIT);
    // commands sitting exactly on the voltage limit round to either side of it
    let overmodulated = m > limit * lit(1.0 + 1e-9);
    let scale = if m > limit { limit / m } else { T::one() };
    let abc = inv_park(v_d * scale, v_q * scale, theta);
    let half = lit::<T>(0.5);
    LegReferences { refs: ThreePhaseRef::from_array(abc.map(|v| half + v / v_dc)), m: m.min(limit), overmodulated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_vector_is_midpoint() {
        let r = references_from_voltages(0.0, 0.0, 1.1, 2000.0);
        assert_eq!(r.refs, ThreePhaseRef::splat(0.5));
        assert!(!r.overmodulated);
    }

    #[test]
    fn grid_service_fits_under_limit() {
        let peak = 575.0 * (2.0f64 / 3.0).sqrt();
        let r = references_from_voltages(peak, 0.0, 0.0, 2000.0);
        assert_relative_eq!(r.m, 0.469_485_534_033_442_5, max_relative = 1e-12);
        assert!(!r.overmodulated);
        assert_relative_eq!(r.refs.a, 0.5 + peak / 2000.0, max_relative = 1e-12);
    }

    #[test]
    fn excess_command_is_scaled() {
        let r = references_from_voltages(0.0f64, 600.0, 0.3, 2000.0);
        assert!(r.overmodulated);
        assert_eq!(r.m, 0.5);
        let spread = r.refs.to_array().map(|v| (v - 0.5) * 2000.0);
        let amp = spread.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(amp <= 500.0 + 1e-9);
    }
}
