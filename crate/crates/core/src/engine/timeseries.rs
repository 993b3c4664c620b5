//! Logged signals, one record per sample, with a full-precision CSV form.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

macro_rules! record {
    ($(#[$doc:meta])* pub struct $name:ident {
        $( $(#[$fdoc:meta])* $field:ident : $ty:ty ),* $(,)?
    }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
        pub struct $name {
            $( $(#[$fdoc])* pub $field: $ty ),*
        }

        impl $name {
            /// Column names in CSV order.
            pub const FIELDS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Any column as `f64`, by name.
            pub fn get(&self, column: &str) -> Option<f64> {
                match column {
                    $( stringify!($field) => Some(self.$field as f64), )*
                    _ => None,
                }
            }
        }
    };
}

record! {
    /// One logged sample. Storage powers and currents are positive charging.
    pub struct Record {
        t_seconds: f64,
        v_wind_mps: f64,
        omega_m_radps: f64,
        t_mech_newton_meters: f64,
        t_e_cmd_newton_meters: f64,
        t_e_newton_meters: f64,
        p_mech_watts: f64,
        /// Turbine power as estimated by the controller.
        p_wt_watts: f64,
        p_grid_watts: f64,
        p_dispatch_watts: f64,
        p_excess_watts: f64,
        p_batt_ref_watts: f64,
        p_sc_ref_watts: f64,
        p_batt_watts: f64,
        p_sc_watts: f64,
        p_loss_watts: f64,
        /// Energy-audit mismatch over the last sample interval.
        power_balance_residual_watts: f64,
        v_dc_volts: f64,
        v_batt_volts: f64,
        v_sc_volts: f64,
        soc_batt: f64,
        i_batt_amps: f64,
        i_batt_ref_amps: f64,
        i_sc_amps: f64,
        i_sc_ref_amps: f64,
        i_grid_a_amps: f64,
        i_grid_b_amps: f64,
        i_grid_c_amps: f64,
        i_grid_d_amps: f64,
        i_grid_q_amps: f64,
        i_mach_u_amps: f64,
        i_mach_v_amps: f64,
        i_mach_w_amps: f64,
        i_mach_d_amps: f64,
        i_mach_q_amps: f64,
        m_grid: f64,
        m_machine: f64,
        duty_sc: f64,
        duty_batt: f64,
        batt_mode: u8,
        /// Leg state codes (S1 as the high bit); zero in averaged runs.
        gate_leg_a: u8,
        gate_leg_b: u8,
        gate_leg_c: u8,
        gate_leg_dc: u8,
        anomaly_reference_clamps: u64,
        anomaly_overmodulation: u64,
        anomaly_voltage_limit: u64,
        anomaly_current_limit: u64,
        anomaly_port_clamp: u64,
        anomaly_correction_limit: u64,
        anomaly_soc_saturation: u64,
        anomaly_sc_undervoltage: u64,
        anomaly_invalid_gate: u64,
    }
}

/// Running totals of abnormal conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AnomalyCounters {
    pub reference_clamps: u64,
    pub overmodulation: u64,
    pub voltage_limit: u64,
    pub current_limit: u64,
    pub port_clamp: u64,
    pub correction_limit: u64,
    pub soc_saturation: u64,
    pub sc_undervoltage: u64,
    pub invalid_gate: u64,
}

impl AnomalyCounters {
    pub fn total(&self) -> u64 {
        self.named().iter().map(|(_, v)| v).sum()
    }

    pub fn named(&self) -> [(&'static str, u64); 9] {
        [
            ("reference_clamps", self.reference_clamps),
            ("overmodulation", self.overmodulation),
            ("voltage_limit", self.voltage_limit),
            ("current_limit", self.current_limit),
            ("port_clamp", self.port_clamp),
            ("correction_limit", self.correction_limit),
            ("soc_saturation", self.soc_saturation),
            ("sc_undervoltage", self.sc_undervoltage),
            ("invalid_gate", self.invalid_gate),
        ]
    }

    pub(crate) fn stamp(&self, r: &mut Record) {
        r.anomaly_reference_clamps = self.reference_clamps;
        r.anomaly_overmodulation = self.overmodulation;
        r.anomaly_voltage_limit = self.voltage_limit;
        r.anomaly_current_limit = self.current_limit;
        r.anomaly_port_clamp = self.port_clamp;
        r.anomaly_correction_limit = self.correction_limit;
        r.anomaly_soc_saturation = self.soc_saturation;
        r.anomaly_sc_undervoltage = self.sc_undervoltage;
        r.anomaly_invalid_gate = self.invalid_gate;
    }

    pub fn from_record(r: &Record) -> Self {
        Self {
            reference_clamps: r.anomaly_reference_clamps,
            overmodulation: r.anomaly_overmodulation,
            voltage_limit: r.anomaly_voltage_limit,
            current_limit: r.anomaly_current_limit,
            port_clamp: r.anomaly_port_clamp,
            correction_limit: r.anomaly_correction_limit,
            soc_saturation: r.anomaly_soc_saturation,
            sc_undervoltage: r.anomaly_sc_undervoltage,
            invalid_gate: r.anomaly_invalid_gate,
        }
    }
}

/// Uniformly sampled run output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub records: Vec<Record>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sample_interval(&self) -> Option<f64> {
        match self.records.as_slice() {
            [a, b, ..] => Some(b.t_seconds - a.t_seconds),
            _ => None,
        }
    }

    /// One column as a vector.
    ///
    /// # Panics
    /// On an unknown column name.
    pub fn column(&self, name: &str) -> Vec<f64> {
        assert!(Record::FIELDS.contains(&name), "unknown column {name}");
        self.records.iter().map(|r| r.get(name).unwrap()).collect()
    }

    pub fn anomalies(&self) -> AnomalyCounters {
        self.records.last().map(AnomalyCounters::from_record).unwrap_or_default()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CsvError> {
        let mut out = csv::Writer::from_writer(w);
        if self.records.is_empty() {
            out.write_record(Record::FIELDS)?;
        }
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, CsvError> {
        let mut rdr = csv::Reader::from_reader(r);
        let records = rdr.deserialize().collect::<Result<Vec<Record>, _>>()?;
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_starts_with_time() {
        assert_eq!(Record::FIELDS[0], "t_seconds");
        let mut buf = Vec::new();
        TimeSeries::default().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_seconds,v_wind_mps,"));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut ts = TimeSeries::default();
        for k in 0..50 {
            let x = k as f64;
            ts.records.push(Record {
                t_seconds: x * 1e-4,
                v_dc_volts: 2000.0 + (x * 0.37).sin() * 1e-7,
                p_grid_watts: std::f64::consts::PI * 1e5 / (x + 1.0),
                soc_batt: 1.0 / 3.0 + 1e-17 * x,
                gate_leg_a: 6,
                anomaly_invalid_gate: u64::MAX - k,
                power_balance_residual_watts: -0.0,
                ..Default::default()
            });
        }
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let back = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), ts.len());
        for (a, b) in ts.records.iter().zip(&back.records) {
            for f in Record::FIELDS {
                assert_eq!(a.get(f).unwrap().to_bits(), b.get(f).unwrap().to_bits(), "{f}");
            }
        }
    }
}
