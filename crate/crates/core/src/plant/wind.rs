//! Four-component wind speed: mean, gust, ramp and band-limited noise.

use crate::scalar::{lit, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Number of sinusoids summed for the noise component.
const NOISE_TONES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gust {
    #[serde(rename = "start_seconds")]
    pub start: f64,
    #[serde(rename = "duration_seconds")]
    pub duration: f64,
    #[serde(rename = "amplitude_mps")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ramp {
    #[serde(rename = "start_seconds")]
    pub start: f64,
    #[serde(rename = "end_seconds")]
    pub end: f64,
    #[serde(rename = "slope_mps2")]
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    /// RMS value of the noise component.
    #[serde(rename = "amplitude_mps")]
    pub amplitude: f64,
    #[serde(rename = "low_hertz")]
    pub f_low: f64,
    #[serde(rename = "high_hertz")]
    pub f_high: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Self { amplitude: 0.0, f_low: 0.05, f_high: 2.0 }
    }
}

/// Wind description as it appears in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSpec {
    #[serde(rename = "mean_mps")]
    pub mean: f64,
    #[serde(default)]
    pub gust: Gust,
    #[serde(default)]
    pub ramp: Ramp,
    #[serde(default)]
    pub noise: Noise,
}

impl WindSpec {
    pub fn constant(mean: f64) -> Self {
        Self { mean, gust: Gust::default(), ramp: Ramp::default(), noise: Noise::default() }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let finite = [
            self.mean,
            self.gust.start,
            self.gust.duration,
            self.gust.amplitude,
            self.ramp.start,
            self.ramp.end,
            self.ramp.slope,
            self.noise.amplitude,
            self.noise.f_low,
            self.noise.f_high,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("wind parameters must be finite");
        }
        if self.mean < 0.0 {
            return Err("mean wind speed must be non-negative");
        }
        if self.gust.start < 0.0 || self.gust.duration < 0.0 {
            return Err("gust window must be non-negative");
        }
        if self.ramp.start < 0.0 || self.ramp.end < self.ramp.start {
            return Err("ramp window must be non-negative and ordered");
        }
        if self.noise.amplitude < 0.0 || self.noise.f_low <= 0.0 || self.noise.f_high < self.noise.f_low {
            return Err("noise band must be positive and ordered");
        }
        Ok(())
    }
}

/// A wind profile with its noise tones drawn from a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct WindProfile<T> {
    pub spec: WindSpec,
    pub seed: u64,
    /// (amplitude, angular frequency, phase) per tone.
    tones: Vec<(T, T, T)>,
}

impl<T: Scalar> WindProfile<T> {
    pub fn new(spec: WindSpec, seed: u64) -> Self {
        let mut tones = Vec::new();
        if spec.noise.amplitude > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // equal-power tones on a log-spaced grid keep the RMS at `amplitude`
            let amp = spec.noise.amplitude * (2.0 / NOISE_TONES as f64).sqrt();
            let ratio = spec.noise.f_high / spec.noise.f_low;
            for k in 0..NOISE_TONES {
                let frac = k as f64 / (NOISE_TONES - 1) as f64;
                let f = spec.noise.f_low * ratio.powf(frac);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                tones.push((lit(amp), lit(std::f64::consts::TAU * f), lit(phase)));
            }
        }
        Self { spec, seed, tones }
    }

    pub fn constant(mean: f64) -> Self {
        Self::new(WindSpec::constant(mean), 0)
    }
}

/// Wind speed in m/s at time `t`; never negative.
pub fn wind_speed<T: Scalar>(profile: &WindProfile<T>, t: T) -> T {
    let s = &profile.spec;
    let mut v = lit::<T>(s.mean);

    let g_start = lit::<T>(s.gust.start);
    let g_len = lit::<T>(s.gust.duration);
    if s.gust.duration > 0.0 && t >= g_start && t <= g_start + g_len {
        let x = (t - g_start) / g_len;
        v += lit::<T>(s.gust.amplitude * 0.5) * (T::one() - (T::TAU() * x).cos());
    }

    if s.ramp.end > s.ramp.start {
        let clamped = t.max(lit(s.ramp.start)).min(lit(s.ramp.end));
        v += lit::<T>(s.ramp.slope) * (clamped - lit(s.ramp.start));
    }

    for &(a, w, phi) in &profile.tones {
        v += a * (w * t + phi).sin();
    }
    v.max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_only() {
        let w = WindProfile::<f64>::constant(6.0);
        for t in [0.0, 3.3, 24.0] {
            assert_eq!(wind_speed(&w, t), 6.0);
        }
    }

    #[test]
    fn gust_peak_and_inactive_windows() {
        let spec = WindSpec { gust: Gust { start: 5.0, duration: 4.0, amplitude: 2.0 }, ..WindSpec::constant(6.0) };
        let w = WindProfile::<f64>::new(spec, 1);
        assert_eq!(wind_speed(&w, 4.9), 6.0);
        assert_abs_diff_eq!(wind_speed(&w, 7.0), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wind_speed(&w, 9.0), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn ramp_is_clamped() {
        let spec = WindSpec { ramp: Ramp { start: 10.0, end: 15.0, slope: 0.2 }, ..WindSpec::constant(6.0) };
        let w = WindProfile::<f64>::new(spec, 1);
        assert_eq!(wind_speed(&w, 9.0), 6.0);
        assert_abs_diff_eq!(wind_speed(&w, 12.5), 6.5, epsilon = 1e-12);
        assert_abs_diff_eq!(wind_speed(&w, 30.0), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn noise_is_seeded_and_has_requested_rms() {
        let spec = WindSpec { noise: Noise { amplitude: 0.5, ..Noise::default() }, ..WindSpec::constant(6.0) };
        let a = WindProfile::<f64>::new(spec, 7);
        let b = WindProfile::<f64>::new(spec, 7);
        let c = WindProfile::<f64>::new(spec, 8);
        assert_eq!(a, b);
        assert_ne!(wind_speed(&a, 1.234), wind_speed(&c, 1.234));
        let n = 200_000;
        let dt = 0.01;
        let ms: f64 = (0..n).map(|k| (wind_speed(&a, k as f64 * dt) - 6.0).powi(2)).sum::<f64>() / n as f64;
        assert!((ms.sqrt() - 0.5).abs() < 0.05, "rms {}", ms.sqrt());
    }
}
