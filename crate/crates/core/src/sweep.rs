//! Open-loop modulation sweep: two sinusoidal reference sets run through
//! the offset stage and the carrier comparators of three legs.

use crate::modulation::{
    apply_offsets, carrier, gate_signals, make_reference, CarrierConfig, LegState, ModulationError, RefParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub upper: RefParams<f64>,
    pub lower: RefParams<f64>,
    pub carrier: CarrierConfig<f64>,
    /// Apply the max/min offsets; otherwise the raw references drive the gates.
    pub offsets: bool,
    pub duration: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub t: f64,
    pub carrier: f64,
    pub upper_raw: [f64; 3],
    pub lower_raw: [f64; 3],
    /// References that reach the comparators.
    pub upper: [f64; 3],
    pub lower: [f64; 3],
    pub gates: [LegState; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseStats {
    /// Individual switch transitions over the sweep.
    pub transitions: u64,
    /// S1 transitions between samples whose upper reference sits on 1, plus
    /// S3 transitions between samples whose lower reference sits on 0.
    pub transitions_while_clamped: u64,
    pub clamped_samples: u64,
    pub dominance_violations: u64,
    pub invalid_states: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub samples: Vec<SweepSample>,
    pub phases: [PhaseStats; 3],
}

impl SweepResult {
    pub fn total_transitions(&self) -> u64 {
        self.phases.iter().map(|p| p.transitions).sum()
    }

    pub fn dominance_violations(&self) -> u64 {
        self.phases.iter().map(|p| p.dominance_violations).sum()
    }
}

pub fn modulation_sweep(cfg: &SweepConfig) -> Result<SweepResult, ModulationError> {
    if !(cfg.dt > 0.0 && cfg.duration >= 0.0) {
        return Err(ModulationError::InvalidParams("sweep needs a positive step and a non-negative duration"));
    }
    let n = (cfg.duration / cfg.dt).round() as usize;
    let mut samples: Vec<SweepSample> = Vec::with_capacity(n + 1);
    let mut phases = [PhaseStats::default(); 3];

    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let up = make_reference(&cfg.upper, t)?;
        let lo = make_reference(&cfg.lower, t)?;
        let (upper, lower) = if cfg.offsets {
            let o = apply_offsets(&up, &lo)?;
            (o.upper.to_array(), o.lower.to_array())
        } else {
            (up.to_array(), lo.to_array())
        };
        let c = carrier(t, &cfg.carrier);
        let gates = [0, 1, 2].map(|i| gate_signals(upper[i], lower[i], c));

        for i in 0..3 {
            let ph = &mut phases[i];
            ph.dominance_violations += u64::from(upper[i] < lower[i]);
            ph.invalid_states += u64::from(!gates[i].is_valid());
            let clamped_u = upper[i] == 1.0;
            let clamped_l = lower[i] == 0.0;
            ph.clamped_samples += u64::from(clamped_u || clamped_l);
            if let Some(prev) = samples.last() {
                ph.transitions += u64::from(prev.gates[i].transitions_to(&gates[i]));
                if clamped_u && prev.upper[i] == 1.0 {
                    ph.transitions_while_clamped += u64::from(prev.gates[i].s1 != gates[i].s1);
                }
                if clamped_l && prev.lower[i] == 0.0 {
                    ph.transitions_while_clamped += u64::from(prev.gates[i].s3 != gates[i].s3);
                }
            }
        }
        samples.push(SweepSample {
            t,
            carrier: c,
            upper_raw: up.to_array(),
            lower_raw: lo.to_array(),
            upper,
            lower,
            gates,
        });
    }
    Ok(SweepResult { samples, phases })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(offsets: bool) -> SweepConfig {
        SweepConfig {
            upper: RefParams::new(0.5, 60.0, 0.0, 0.0),
            lower: RefParams::new(0.5, 20.0, 0.0, 0.0),
            carrier: CarrierConfig::triangle(5e3),
            offsets,
            duration: 0.05,
            dt: 1e-6,
        }
    }

    #[test]
    fn offsets_clamp_without_switching() {
        let r = modulation_sweep(&cfg(true)).unwrap();
        assert_eq!(r.dominance_violations(), 0);
        for p in &r.phases {
            assert!(p.clamped_samples > 0);
            assert_eq!(p.transitions_while_clamped, 0);
            assert_eq!(p.invalid_states, 0);
        }
    }

    #[test]
    fn raw_references_overlap() {
        let r = modulation_sweep(&cfg(false)).unwrap();
        assert!(r.dominance_violations() > 0);
        let with = modulation_sweep(&cfg(true)).unwrap();
        assert!(with.total_transitions() < r.total_transitions());
    }
}
