//! PI regulator with output saturation and anti-windup.

use crate::scalar::Scalar;

/// Discrete PI regulator, `u = kp·e + ki·∫e dt`.
///
/// The integrator stores `∫e dt` and is bounded to `±limit/ki`, so it can
/// never request more than the output limit on its own. While the output is
/// saturated the integrator only moves when the error unwinds it, plus a
/// back-calculation bleed of `antiwindup·(u_sat − u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiState<T> {
    pub kp: T,
    pub ki: T,
    pub integ: T,
    pub limit: T,
    pub antiwindup: T,
    last_integ: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiOutput<T> {
    pub value: T,
    pub saturated: bool,
}

impl<T: Scalar> PiState<T> {
    pub fn new(kp: T, ki: T, limit: T) -> Self {
        Self { kp, ki, integ: T::zero(), limit, antiwindup: T::zero(), last_integ: T::zero() }
    }

    pub fn with_antiwindup(mut self, gain: T) -> Self {
        self.antiwindup = gain;
        self
    }

    /// Pole-zero cancelling gains for a series RL plant `1/(Ls + R)`:
    /// closed loop becomes first order with bandwidth `omega_c`.
    pub fn for_rl_plant(l: T, r: T, omega_c: T, limit: T) -> Self {
        Self::new(omega_c * l, omega_c * r, limit)
    }

    /// Gains for an integrating plant `k/s`: crossover at `omega_c`, integral
    /// corner a factor `corner_ratio` below it.
    pub fn for_integrator(plant_gain: T, omega_c: T, corner_ratio: T, limit: T) -> Self {
        let kp = omega_c / plant_gain;
        Self::new(kp, kp * omega_c / corner_ratio, limit)
    }

    fn integ_bound(&self) -> T {
        if self.ki > T::zero() {
            self.limit / self.ki
        } else {
            T::zero()
        }
    }

    /// Advances the regulator by one sample with error `e`.
    pub fn update(&mut self, e: T, dt: T) -> PiOutput<T> {
        self.last_integ = self.integ;
        let candidate = self.integ + e * dt;
        let raw = self.kp * e + self.ki * candidate;
        let value = raw.max(-self.limit).min(self.limit);
        let saturated = value != raw;
        if saturated {
            // integrate only when the error pulls the output back inside
            if (raw > T::zero()) != (e > T::zero()) {
                self.integ = candidate;
            }
            if self.ki > T::zero() {
                self.integ += self.antiwindup * (value - raw) * dt / self.ki;
            }
        } else {
            self.integ = candidate;
        }
        let bound = self.integ_bound();
        self.integ = self.integ.max(-bound).min(bound);
        PiOutput { value, saturated }
    }

    /// Output for error `e` without touching the integrator.
    pub fn peek(&self, e: T) -> T {
        (self.kp * e + self.ki * self.integ).max(-self.limit).min(self.limit)
    }

    /// Restores the integrator to its value before the last [`update`](Self::update).
    pub fn revert(&mut self) {
        self.integ = self.last_integ;
    }

    /// Sets the integrator so that zero error yields `output`.
    pub fn preset(&mut self, output: T) {
        if self.ki > T::zero() {
            let bound = self.integ_bound();
            self.integ = (output / self.ki).max(-bound).min(bound);
            self.last_integ = self.integ;
        }
    }

    pub fn reset(&mut self) {
        self.integ = T::zero();
        self.last_integ = T::zero();
    }
}
