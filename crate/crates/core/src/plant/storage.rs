//! Battery and supercapacitor port models.
//!
//! Both step functions take the port current positive when discharging.

use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryParams<T> {
    pub v_nom: T,
    /// Rated energy (J).
    pub capacity: T,
    /// Open-circuit voltage at zero state of charge.
    pub ocv_empty: T,
    /// OCV rise from empty to full.
    pub ocv_span: T,
    pub r_int: T,
}

impl<T: Scalar> Default for BatteryParams<T> {
    /// 750 V, 200 kWh, OCV 700–800 V, 50 mΩ.
    fn default() -> Self {
        Self {
            v_nom: lit(750.0),
            capacity: lit(200.0 * 3.6e6),
            ocv_empty: lit(700.0),
            ocv_span: lit(100.0),
            r_int: lit(0.05),
        }
    }
}

impl<T: Scalar> BatteryParams<T> {
    pub fn ocv(&self, soc: T) -> T {
        self.ocv_empty + self.ocv_span * soc
    }

    /// d(soc)/dt for a discharge current.
    pub fn soc_rate(&self, i_discharge: T) -> T {
        -i_discharge * self.v_nom / self.capacity
    }

    pub fn terminal_voltage(&self, soc: T, i_discharge: T) -> T {
        self.ocv(soc) - i_discharge * self.r_int
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStep<T> {
    pub v_term: T,
    pub soc: T,
    /// Set when the updated charge left [0, 1] and was clamped.
    pub saturated: bool,
}

/// Coulomb-counting update over `dt`.
pub fn battery_step<T: Scalar>(params: &BatteryParams<T>, soc: T, i_batt: T, dt: T) -> BatteryStep<T> {
    let v_term = params.terminal_voltage(soc, i_batt);
    let next = soc + params.soc_rate(i_batt) * dt;
    let clamped = next.max(T::zero()).min(T::one());
    BatteryStep { v_term, soc: clamped, saturated: clamped != next }
}

/// Usable energy of the default supercapacitor bank.
pub const SUPERCAP_WINDOW_KWH: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupercapParams<T> {
    pub capacitance: T,
    pub v_nom: T,
    pub r_series: T,
    /// Undervoltage threshold.
    pub v_floor: T,
}

impl<T: Scalar> Default for SupercapParams<T> {
    /// 1000 F, 1250 V, 10 mΩ. The floor leaves a 100 kWh window between it
    /// and the nominal voltage, well short of the 217 kWh stored at 1250 V.
    fn default() -> Self {
        let (c, v_nom) = (lit::<T>(1000.0), lit::<T>(1250.0));
        let window = lit::<T>(SUPERCAP_WINDOW_KWH * 3.6e6);
        let v_floor = (v_nom * v_nom - lit::<T>(2.0) * window / c).sqrt();
        Self { capacitance: c, v_nom, r_series: lit(0.01), v_floor }
    }
}

impl<T: Scalar> SupercapParams<T> {
    pub fn voltage_rate(&self, i_discharge: T) -> T {
        -i_discharge / self.capacitance
    }

    pub fn terminal_voltage(&self, v_sc: T, i_discharge: T) -> T {
        v_sc - i_discharge * self.r_series
    }

    /// Energy stored at `v_sc`, ½CV².
    pub fn stored_energy(&self, v_sc: T) -> T {
        lit::<T>(0.5) * self.capacitance * v_sc * v_sc
    }

    /// Energy between the nominal voltage and the floor.
    pub fn usable_energy(&self) -> T {
        self.stored_energy(self.v_nom) - self.stored_energy(self.v_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupercapStep<T> {
    pub v_sc: T,
    pub v_term: T,
    pub undervoltage: bool,
}

pub fn supercap_step<T: Scalar>(params: &SupercapParams<T>, v_sc: T, i_sc: T, dt: T) -> SupercapStep<T> {
    let next = (v_sc + params.voltage_rate(i_sc) * dt).max(T::zero());
    SupercapStep { v_sc: next, v_term: params.terminal_voltage(next, i_sc), undervoltage: next < params.v_floor }
}
