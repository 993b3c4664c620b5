//! Carrier-based modulation of the three-switch dual-buck leg.
//!
//! Each leg carries two outputs: the upper terminal (grid side, phases ABC)
//! and the lower terminal (machine side, phases UVW). Switches S1 and S3 are
//! driven by comparing the upper and lower references against a shared
//! carrier; S2 is their exclusive-or, so exactly one switch is off at any
//! time and only the states `[110]`, `[101]` and `[011]` are produced.
//!
//! The upper reference must never fall below the lower reference of the same
//! leg. [`apply_offsets`] enforces that by pushing the upper set against the
//! top rail and the lower set against the bottom rail, which also yields a
//! discontinuous PWM pattern: the clamped phase does not switch.

use crate::scalar::{lit, third_turn, Scalar};
use std::fmt;
use thiserror::Error;

/// Largest modulation index for which upper/lower dominance is guaranteed.
pub const MODULATION_INDEX_LIMIT: f64 = 0.5;

/// Offset additions that overshoot [0, 1] by more than this count as
/// anomalies; smaller excursions are rounding noise and are clamped silently.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulationError {
    #[error("modulation index {m} exceeds the dual-output limit of 0.5")]
    ModulationLimit { m: f64 },
    #[error("invalid reference parameters: {0}")]
    InvalidParams(&'static str),
    #[error("dominance violated on phase {phase}: upper {upper} < lower {lower}")]
    DominanceViolation { phase: usize, upper: f64, lower: f64 },
    #[error("invalid leg state {0}")]
    InvalidState(LegState),
}

/// Sinusoidal reference parameters for one output set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefParams<T> {
    /// Modulation index, 0 ≤ m ≤ 0.5.
    pub m: T,
    /// Frequency in Hz.
    pub f: T,
    /// Initial phase in rad.
    pub phi: T,
    /// Common offset added to all three phases.
    pub v_off: T,
}

impl<T: Scalar> RefParams<T> {
    pub fn new(m: T, f: T, phi: T, v_off: T) -> Self {
        Self { m, f, phi, v_off }
    }

    pub fn validate(&self) -> Result<(), ModulationError> {
        if !(self.m.is_finite() && self.f.is_finite() && self.phi.is_finite()) {
            return Err(ModulationError::InvalidParams("non-finite parameter"));
        }
        if self.m < T::zero() {
            return Err(ModulationError::InvalidParams("negative modulation index"));
        }
        if self.m > lit(MODULATION_INDEX_LIMIT) {
            return Err(ModulationError::ModulationLimit { m: self.m.to_f64().unwrap_or(f64::NAN) });
        }
        if self.f < T::zero() {
            return Err(ModulationError::InvalidParams("negative frequency"));
        }
        Ok(())
    }
}

/// Instantaneous per-phase references on the [0, 1] duty scale.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreePhaseRef<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> ThreePhaseRef<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    pub fn from_array(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.a, self.b, self.c]
    }

    pub fn max(&self) -> T {
        self.a.max(self.b).max(self.c)
    }

    pub fn min(&self) -> T {
        self.a.min(self.b).min(self.c)
    }

    pub fn shifted(self, offset: T) -> Self {
        Self::new(self.a + offset, self.b + offset, self.c + offset)
    }

    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.a), f(self.b), f(self.c))
    }
}

/// Gate pattern `[S1 S2 S3]` of one three-switch leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LegState {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
}

impl LegState {
    /// Upper and middle switches on: both outputs tied to the positive rail.
    pub const S110: LegState = LegState { s1: true, s2: true, s3: false };
    /// Upper and lower switches on: upper output positive, lower output negative.
    pub const S101: LegState = LegState { s1: true, s2: false, s3: true };
    /// Middle and lower switches on: both outputs tied to the negative rail.
    pub const S011: LegState = LegState { s1: false, s2: true, s3: true };

    pub const fn new(s1: bool, s2: bool, s3: bool) -> Self {
        Self { s1, s2, s3 }
    }

    /// Exactly one switch off.
    pub fn is_valid(&self) -> bool {
        (self.s1 as u8 + self.s2 as u8 + self.s3 as u8) == 2
    }

    /// Three-bit code with S1 as the most significant bit (`[110]` → 6).
    pub fn code(&self) -> u8 {
        (self.s1 as u8) << 2 | (self.s2 as u8) << 1 | self.s3 as u8
    }

    pub fn from_code(code: u8) -> Self {
        Self::new(code & 4 != 0, code & 2 != 0, code & 1 != 0)
    }

    /// Number of gates that differ between two states.
    pub fn transitions_to(&self, next: &LegState) -> u32 {
        (self.s1 != next.s1) as u32 + (self.s2 != next.s2) as u32 + (self.s3 != next.s3) as u32
    }
}

impl fmt::Display for LegState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}{}{}]", self.s1 as u8, self.s2 as u8, self.s3 as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CarrierShape {
    /// Symmetric triangle: 0 at period start, 1 at half period.
    #[default]
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig<T> {
    /// Carrier (switching) frequency in Hz.
    pub f_sw: T,
    pub shape: CarrierShape,
}

impl<T: Scalar> CarrierConfig<T> {
    pub fn triangle(f_sw: T) -> Self {
        Self { f_sw, shape: CarrierShape::Triangle }
    }

    pub fn period(&self) -> T {
        self.f_sw.recip()
    }
}

impl<T: Scalar> Default for CarrierConfig<T> {
    fn default() -> Self {
        Self::triangle(lit(5_000.0))
    }
}

/// Evaluates the upper or lower reference set at time `t`.
///
/// Phase b leads by 2π/3 and phase c lags by 2π/3, each
/// `0.5 + 0.5·m·sin(2πft + φ ± 2π/3) + v_off`.
pub fn make_reference<T: Scalar>(params: &RefParams<T>, t: T) -> Result<ThreePhaseRef<T>, ModulationError> {
    params.validate()?;
    let half = lit::<T>(0.5);
    let angle = T::TAU() * params.f * t + params.phi;
    let phase = |shift: T| half + half * params.m * (angle + shift).sin() + params.v_off;
    Ok(ThreePhaseRef::new(phase(T::zero()), phase(third_turn()), phase(-third_turn::<T>())))
}

/// Offset that lifts the largest upper reference to exactly 1.
pub fn max_offset<T: Scalar>(upper: &ThreePhaseRef<T>) -> T {
    T::one() - upper.max()
}

/// Offset that drops the smallest lower reference to exactly 0.
pub fn min_offset<T: Scalar>(lower: &ThreePhaseRef<T>) -> T {
    -lower.min()
}

/// Result of [`apply_offsets`] or [`shift_references`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetRefs<T> {
    pub upper: ThreePhaseRef<T>,
    pub lower: ThreePhaseRef<T>,
    /// Phases that left [0, 1] by more than [`CLAMP_TOLERANCE`] and were clamped.
    pub clamps: u32,
}

/// Adds the maximum offset to the upper set and the minimum offset to the
/// lower set, then checks per-phase dominance.
pub fn apply_offsets<T: Scalar>(
    upper: &ThreePhaseRef<T>,
    lower: &ThreePhaseRef<T>,
) -> Result<OffsetRefs<T>, ModulationError> {
    let mut out = shift_references(upper, lower, max_offset(upper), min_offset(lower))?;
    // x + (1 - x) can round below 1; the clamped phase must sit exactly on the rail
    let top = argmax(&upper.to_array());
    let mut up = out.upper.to_array();
    up[top] = T::one();
    out.upper = ThreePhaseRef::from_array(up);
    Ok(out)
}

fn argmax<T: Scalar>(v: &[T; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Adds caller-chosen offsets to both sets, clamps into [0, 1] and checks
/// per-phase dominance.
pub fn shift_references<T: Scalar>(
    upper: &ThreePhaseRef<T>,
    lower: &ThreePhaseRef<T>,
    upper_offset: T,
    lower_offset: T,
) -> Result<OffsetRefs<T>, ModulationError> {
    let mut clamps = 0;
    let mut clamp = |v: T| {
        let tol = lit::<T>(CLAMP_TOLERANCE);
        if v > T::one() + tol || v < -tol {
            clamps += 1;
        }
        v.max(T::zero()).min(T::one())
    };
    let up = upper.shifted(upper_offset).to_array().map(&mut clamp);
    let lo = lower.shifted(lower_offset).to_array().map(&mut clamp);
    check_dominance(&up, &lo)?;
    Ok(OffsetRefs { upper: ThreePhaseRef::from_array(up), lower: ThreePhaseRef::from_array(lo), clamps })
}

fn check_dominance<T: Scalar>(upper: &[T; 3], lower: &[T; 3]) -> Result<(), ModulationError> {
    for (phase, (u, l)) in upper.iter().zip(lower).enumerate() {
        if u < l || u.is_nan() || l.is_nan() {
            return Err(ModulationError::DominanceViolation {
                phase,
                upper: u.to_f64().unwrap_or(f64::NAN),
                lower: l.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Triangular carrier value in [0, 1].
pub fn carrier<T: Scalar>(t: T, cfg: &CarrierConfig<T>) -> T {
    match cfg.shape {
        CarrierShape::Triangle => {
            let cycles = t * cfg.f_sw;
            let frac = cycles - cycles.floor();
            let two = lit::<T>(2.0);
            if frac <= lit(0.5) {
                two * frac
            } else {
                two - two * frac
            }
        }
    }
}

/// Raw comparator outputs without the dominance check.
///
/// Ties resolve to the switch-on branch: `S1 = c ≤ r_u`, `S3 = c ≥ r_l`.
/// If `r_u < r_l` the result can be the forbidden `[000]`.
pub fn gate_signals<T: Scalar>(r_u: T, r_l: T, c: T) -> LegState {
    let s1 = c <= r_u;
    let s3 = c >= r_l;
    LegState::new(s1, s1 ^ s3, s3)
}

/// Gate pattern of one leg for the given references and carrier sample.
pub fn pwm_leg<T: Scalar>(r_u: T, r_l: T, c: T) -> Result<LegState, ModulationError> {
    if !(r_u >= r_l) {
        return Err(ModulationError::DominanceViolation {
            phase: 0,
            upper: r_u.to_f64().unwrap_or(f64::NAN),
            lower: r_l.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(gate_signals(r_u, r_l, c))
}

/// Output voltages of a leg, referenced to the negative DC rail.
pub fn leg_terminal_voltages<T: Scalar>(state: LegState, v_dc: T) -> Result<(T, T), ModulationError> {
    match state {
        LegState::S110 => Ok((v_dc, v_dc)),
        LegState::S101 => Ok((v_dc, T::zero())),
        LegState::S011 => Ok((T::zero(), T::zero())),
        other => Err(ModulationError::InvalidState(other)),
    }
}

/// Carrier-period average of [`leg_terminal_voltages`].
pub fn averaged_leg_voltages<T: Scalar>(r_u: T, r_l: T, v_dc: T) -> Result<(T, T), ModulationError> {
    if !(r_u >= r_l) {
        return Err(ModulationError::DominanceViolation {
            phase: 0,
            upper: r_u.to_f64().unwrap_or(f64::NAN),
            lower: r_l.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((r_u * v_dc, r_l * v_dc))
}

/// Active-switch counts of the two converter arrangements.
///
/// The separated arrangement uses two 2-level three-phase bridges plus two
/// 2-switch DC/DC legs; the integrated one uses three AC legs and one DC leg
/// of three switches each. Literature quoting 15 switches for the separated
/// arrangement counts differently; both figures are kept here as computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchCounts {
    pub separated: usize,
    pub integrated: usize,
}

pub const fn switch_counts() -> SwitchCounts {
    SwitchCounts { separated: 6 + 6 + 2 + 2, integrated: 3 * 3 + 3 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rp(m: f64, f: f64, phi: f64, v_off: f64) -> RefParams<f64> {
        RefParams::new(m, f, phi, v_off)
    }

    #[test]
    fn reference_at_origin() {
        let r = make_reference(&rp(0.5, 60.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(r.a, 0.5);
        // 0.5 + 0.25·sin(2π/3)
        assert_abs_diff_eq!(r.b, 0.716_506_350_946_109_6, epsilon = 1e-12);
        assert_abs_diff_eq!(r.c, 0.283_493_649_053_890_4, epsilon = 1e-12);
    }

    #[test]
    fn zero_index_is_flat() {
        for t in [0.0, 0.013, 1.7] {
            let r = make_reference(&rp(0.0, 60.0, 0.0, 0.1), t).unwrap();
            for v in r.to_array() {
                assert_abs_diff_eq!(v, 0.6, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn rejects_overmodulation() {
        let err = make_reference(&rp(0.51, 60.0, 0.0, 0.0), 0.0).unwrap_err();
        assert!(matches!(err, ModulationError::ModulationLimit { .. }));
        assert!(make_reference(&rp(0.3, -1.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn offsets() {
        let up = ThreePhaseRef::new(0.75, 0.375, 0.375);
        let lo = ThreePhaseRef::new(0.25, 0.625, 0.625);
        assert_eq!(max_offset(&up), 0.25);
        assert_eq!(min_offset(&lo), -0.25);
        assert_eq!(max_offset(&ThreePhaseRef::new(1.0, 0.5, 0.5)), 0.0);
        assert_eq!(max_offset(&ThreePhaseRef::splat(0.5)), 0.5);
        assert_eq!(min_offset(&ThreePhaseRef::new(0.0, 0.5, 0.5)), 0.0);
        assert_eq!(min_offset(&ThreePhaseRef::splat(0.5)), -0.5);

        let out = apply_offsets(&up, &lo).unwrap();
        assert_eq!(out.upper, ThreePhaseRef::new(1.0, 0.625, 0.625));
        assert_eq!(out.lower, ThreePhaseRef::new(0.0, 0.375, 0.375));
        assert_eq!(out.clamps, 0);

        let flat = ThreePhaseRef::splat(0.5);
        let out = apply_offsets(&flat, &flat).unwrap();
        assert_eq!(out.upper, ThreePhaseRef::splat(1.0));
        assert_eq!(out.lower, ThreePhaseRef::splat(0.0));
    }

    #[test]
    fn caller_offsets_can_violate_dominance() {
        let up = ThreePhaseRef::new(0.75, 0.375, 0.375);
        let lo = ThreePhaseRef::new(0.25, 0.625, 0.625);
        let err = shift_references(&up, &lo, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, ModulationError::DominanceViolation { phase: 1, .. }));
    }

    #[test]
    fn large_overshoot_counts_as_clamp() {
        let up = ThreePhaseRef::new(0.9, 0.8, 0.7);
        let lo = ThreePhaseRef::splat(0.1);
        let out = shift_references(&up, &lo, 0.2, 0.0).unwrap();
        assert_eq!(out.clamps, 1);
        assert_eq!(out.upper.a, 1.0);
    }

    #[test]
    fn carrier_shape() {
        let cfg = CarrierConfig::triangle(5_000.0);
        assert_eq!(carrier(0.0, &cfg), 0.0);
        assert_abs_diff_eq!(carrier(0.5 / 5_000.0, &cfg), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(carrier(0.25 / 5_000.0, &cfg), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(carrier(0.75 / 5_000.0, &cfg), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pwm_truth_table() {
        assert_eq!(pwm_leg(0.8, 0.4, 0.2).unwrap(), LegState::S110);
        assert_eq!(pwm_leg(0.8, 0.4, 0.6).unwrap(), LegState::S101);
        assert_eq!(pwm_leg(0.8, 0.4, 0.9).unwrap(), LegState::S011);
        // ties go to the on branch
        assert_eq!(pwm_leg(0.5, 0.5, 0.5).unwrap(), LegState::S101);
        assert!(pwm_leg(0.3, 0.4, 0.35).is_err());
        assert_eq!(gate_signals(0.3, 0.4, 0.35).code(), 0);
    }

    #[test]
    fn terminal_voltages() {
        assert_eq!(leg_terminal_voltages(LegState::S110, 2000.0).unwrap(), (2000.0, 2000.0));
        assert_eq!(leg_terminal_voltages(LegState::S101, 2000.0).unwrap(), (2000.0, 0.0));
        assert_eq!(leg_terminal_voltages(LegState::S011, 2000.0).unwrap(), (0.0, 0.0));
        for code in [0u8, 1, 2, 4, 7] {
            assert!(leg_terminal_voltages(LegState::from_code(code), 2000.0_f64).is_err());
        }
    }

    #[test]
    fn averaged_voltages() {
        assert_eq!(averaged_leg_voltages(0.5, 0.5, 2000.0).unwrap(), (1000.0, 1000.0));
        assert_eq!(averaged_leg_voltages(1.0, 0.0, 2000.0).unwrap(), (2000.0, 0.0));
        assert_eq!(averaged_leg_voltages(0.625, 0.375, 2000.0).unwrap(), (1250.0, 750.0));
        assert!(averaged_leg_voltages(0.2, 0.3, 2000.0).is_err());
    }

    #[test]
    fn state_codes() {
        assert_eq!(LegState::S110.code(), 6);
        assert_eq!(LegState::S101.code(), 5);
        assert_eq!(LegState::S011.code(), 3);
        assert_eq!(LegState::S101.to_string(), "[101]");
        assert_eq!(LegState::S110.transitions_to(&LegState::S011), 2);
        let valid: Vec<u8> = (0..8).filter(|c| LegState::from_code(*c).is_valid()).collect();
        assert_eq!(valid, vec![3, 5, 6]);
    }

    #[test]
    fn switch_count_comparison() {
        let n = switch_counts();
        assert_eq!(n.separated, 16);
        assert_eq!(n.integrated, 12);
    }

    #[test]
    fn works_in_single_precision() {
        let r = make_reference(&RefParams::<f32>::new(0.5, 60.0, 0.0, 0.0), 0.0).unwrap();
        assert!((r.b - 0.716_506_4).abs() < 1e-6);
        assert_eq!(pwm_leg(0.8f32, 0.4, 0.6).unwrap(), LegState::S101);
    }

    #[test]
    fn dominance_sweep_sixty_over_twenty() {
        let up = rp(0.5, 60.0, 0.0, 0.0);
        let lo = rp(0.5, 20.0, 0.0, 0.0);
        for k in 0..10_000 {
            let t = k as f64 / 10_000.0 / 20.0;
            let out = apply_offsets(&make_reference(&up, t).unwrap(), &make_reference(&lo, t).unwrap()).unwrap();
            for (u, l) in out.upper.to_array().into_iter().zip(out.lower.to_array()) {
                assert!(u >= l && (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&l));
            }
        }
    }

    proptest! {
        #[test]
        fn pwm_never_emits_forbidden_states(r_l in 0.0..=1.0f64, span in 0.0..=1.0f64, c in 0.0..=1.0f64) {
            let r_u = r_l + (1.0 - r_l) * span;
            let s = pwm_leg(r_u, r_l, c).unwrap();
            prop_assert!(s.is_valid());
            prop_assert_eq!(s.s2, s.s1 ^ s.s3);
        }

        #[test]
        fn offsets_preserve_dominance(
            mu in 0.0..=0.5f64, ml in 0.0..=0.5f64,
            fu in 0.0..100.0f64, fl in 0.0..100.0f64,
            pu in 0.0..6.3f64, pl in 0.0..6.3f64, t in 0.0..1.0f64,
        ) {
            let up = make_reference(&rp(mu, fu, pu, 0.0), t).unwrap();
            let lo = make_reference(&rp(ml, fl, pl, 0.0), t).unwrap();
            let out = apply_offsets(&up, &lo).unwrap();
            prop_assert_eq!(out.clamps, 0);
            prop_assert_eq!(out.upper.max(), 1.0);
            prop_assert_eq!(out.lower.min(), 0.0);
        }
    }
}
