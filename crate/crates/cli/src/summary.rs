//! Plain-text run summary: power statistics, DC-link deviation, battery
//! current distribution, per-dispatch-level tracking and anomaly counters.

use std::fmt::Write;

use dualbuck::control::BattMode;
use dualbuck::engine::{Record, Scenario, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub rms: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            sq += v * v;
            min = min.min(v);
            max = max.max(v);
        }
        (n > 0).then(|| Stats { mean: sum / n as f64, min, max, rms: (sq / n as f64).sqrt() })
    }
}

/// Nearest-rank percentile of an unsorted sample.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[((v.len() - 1) as f64 * p).round() as usize])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchLevel {
    pub start: f64,
    pub end: f64,
    pub p_pu: f64,
    pub p_grid: Option<Stats>,
    /// Largest deviation from the setpoint, relative to the setpoint.
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub samples: usize,
    pub settle: f64,
    pub p_wt: Option<Stats>,
    pub p_grid: Option<Stats>,
    pub p_batt: Option<Stats>,
    pub p_sc: Option<Stats>,
    pub v_dc_deviation: Option<Stats>,
    pub i_batt_percentiles: [(f64, Option<f64>); 5],
    pub i_batt_peak: f64,
    pub cc_samples: usize,
    pub cc_mean: Option<f64>,
    pub cc_in_band: f64,
    pub residual_peak: f64,
    pub levels: Vec<DispatchLevel>,
    pub anomalies: [(&'static str, u64); 9],
}

const CC_BAND: (f64, f64) = (45.0, 55.0);

impl Summary {
    pub fn new(scenario: &Scenario, ts: &TimeSeries) -> Self {
        let settle = scenario.output.settle_seconds;
        let steady: Vec<&Record> = ts.records.iter().filter(|r| r.t_seconds >= settle).collect();
        let col = |f: fn(&Record) -> f64| Stats::of(steady.iter().map(|r| f(r)));

        let i_batt: Vec<f64> = steady.iter().map(|r| r.i_batt_amps).collect();
        let cc: Vec<f64> =
            steady.iter().filter(|r| r.batt_mode == BattMode::Cc.code()).map(|r| r.i_batt_amps.abs()).collect();
        let in_band = cc.iter().filter(|i| (CC_BAND.0..=CC_BAND.1).contains(*i)).count();

        let steps = &scenario.scenario.dispatch;
        let p_base = scenario.pmsg.p_rated;
        let end_time = scenario.scenario.duration_seconds;
        let levels = steps
            .iter()
            .enumerate()
            .map(|(k, step)| {
                let end = steps.get(k + 1).map_or(end_time, |s| s.t_seconds);
                let target = step.p_pu * p_base;
                let window: Vec<f64> = ts
                    .records
                    .iter()
                    .filter(|r| r.t_seconds >= step.t_seconds + settle && r.t_seconds < end)
                    .map(|r| r.p_grid_watts)
                    .collect();
                let max_error = (target != 0.0)
                    .then(|| window.iter().map(|p| (p - target).abs() / target.abs()).reduce(f64::max))
                    .flatten();
                DispatchLevel { start: step.t_seconds, end, p_pu: step.p_pu, p_grid: Stats::of(window), max_error }
            })
            .collect();

        Summary {
            samples: ts.len(),
            settle,
            p_wt: col(|r| r.p_wt_watts),
            p_grid: col(|r| r.p_grid_watts),
            p_batt: col(|r| r.p_batt_watts),
            p_sc: col(|r| r.p_sc_watts),
            v_dc_deviation: Stats::of(steady.iter().map(|r| r.v_dc_volts - scenario.hess.v_dc_ref_volts)),
            i_batt_percentiles: [0.01, 0.05, 0.5, 0.95, 0.99].map(|p| (p, percentile(&i_batt, p))),
            i_batt_peak: ts.records.iter().map(|r| r.i_batt_amps.abs()).fold(0.0, f64::max),
            cc_samples: cc.len(),
            cc_mean: Stats::of(cc.iter().copied()).map(|s| s.mean),
            cc_in_band: if cc.is_empty() { 0.0 } else { in_band as f64 / cc.len() as f64 },
            residual_peak: ts.records.iter().map(|r| r.power_balance_residual_watts.abs()).fold(0.0, f64::max),
            levels,
            anomalies: ts.anomalies().named(),
        }
    }

    pub fn render(&self, scenario: &Scenario) -> String {
        let s = &scenario.scenario;
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "case: {}", s.case.label());
        let _ =
            writeln!(w, "fidelity: {:?}, dt_plant {:e} s, {} samples", s.fidelity, scenario.dt_plant(), self.samples);
        let _ = writeln!(w, "duration: {} s, seed {}", s.duration_seconds, s.seed);
        let _ = writeln!(w, "\npower after {} s [kW]           mean        min        max", self.settle);
        for (name, st) in
            [("turbine", self.p_wt), ("grid", self.p_grid), ("battery", self.p_batt), ("supercapacitor", self.p_sc)]
        {
            match st {
                Some(st) => {
                    let _ = writeln!(
                        w,
                        "  {name:<26}{:>10.1} {:>10.1} {:>10.1}",
                        st.mean / 1e3,
                        st.min / 1e3,
                        st.max / 1e3
                    );
                }
                None => {
                    let _ = writeln!(w, "  {name:<26}       n/a");
                }
            }
        }
        let _ = writeln!(w, "  power balance residual peak: {:.3e} W", self.residual_peak);

        if let Some(d) = self.v_dc_deviation {
            let _ = writeln!(w, "\nDC-link deviation from {} V", scenario.hess.v_dc_ref_volts);
            let _ = writeln!(w, "  min {:.3} V, max {:.3} V, RMS {:.4} V", d.min, d.max, d.rms);
        }

        let _ = writeln!(w, "\nbattery current (charging positive)");
        for (p, v) in self.i_batt_percentiles {
            if let Some(v) = v {
                let _ = writeln!(w, "  p{:<3} {v:>10.2} A", (p * 100.0).round());
            }
        }
        let _ = writeln!(w, "  max |i_batt| {:.1} A", self.i_batt_peak);
        match self.cc_mean {
            Some(mean) => {
                let _ = writeln!(
                    w,
                    "  CC mode: {} samples, mean |i_batt| {mean:.2} A, {:.1}% within [{}, {}] A",
                    self.cc_samples,
                    self.cc_in_band * 100.0,
                    CC_BAND.0,
                    CC_BAND.1
                );
            }
            None => {
                let _ = writeln!(w, "  CC mode: no samples");
            }
        }

        let _ = writeln!(w, "\ndispatch levels (first {} s of each level excluded)", self.settle);
        for l in &self.levels {
            let _ = write!(w, "  {:>7.3}-{:<7.3} s  {:>5.3} pu", l.start, l.end, l.p_pu);
            match (l.p_grid, l.max_error) {
                (Some(st), Some(e)) => {
                    let _ = writeln!(w, "  mean grid {:.1} kW, max error {:.3}%", st.mean / 1e3, e * 100.0);
                }
                (Some(st), None) => {
                    let _ = writeln!(w, "  mean grid {:.1} kW", st.mean / 1e3);
                }
                _ => {
                    let _ = writeln!(w, "  no settled samples");
                }
            }
        }

        let _ = writeln!(w, "\nanomalies");
        for (name, n) in self.anomalies {
            let _ = writeln!(w, "  {name:<18} {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_known_sample() {
        let s = Stats::of([1.0, -1.0, 3.0, -3.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max), (0.0, -3.0, 3.0));
        assert!((s.rms - 5.0f64.sqrt()).abs() < 1e-12);
        assert!(Stats::of(std::iter::empty()).is_none());
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (0..=100).rev().map(f64::from).collect();
        assert_eq!(percentile(&v, 0.5), Some(50.0));
        assert_eq!(percentile(&v, 0.95), Some(95.0));
        assert_eq!(percentile(&[], 0.5), None);
    }
}
