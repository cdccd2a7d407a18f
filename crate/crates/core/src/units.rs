//! Physical constants and conversion between SI inputs and the internal
//! reduced units.
//!
//! Internally ħ = 1 and energies are measured in Δ_Σ, the sum of the two
//! gap parameters. Frequencies then come in units of Δ_Σ/ħ, admittances in
//! units of 1/R_J, inductances in ħR_J/Δ_Σ, capacitances in ħ/(Δ_Σ R_J),
//! and powers in Δ_Σ²/ħ. All conversions live here so that the numerical
//! modules never see an SI quantity.

pub const HBAR: f64 = 1.054_571_817e-34; // J s
pub const E_CHARGE: f64 = 1.602_176_634e-19; // C
pub const K_B: f64 = 1.380_649e-23; // J/K
pub const PLANCK_H: f64 = 6.626_070_15e-34; // J s

/// Superconducting flux quantum Φ0 = πħ/e.
pub const PHI_0: f64 = std::f64::consts::PI * HBAR / E_CHARGE;

/// Resistance quantum R_Q = 2πħ/(2e)² ≈ 6.45 kΩ.
pub const R_Q_OHM: f64 = std::f64::consts::PI * HBAR / (2.0 * E_CHARGE * E_CHARGE);

/// Scale factors tying the reduced system to SI. Built from the summed gap
/// and the junction tunnel resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitScales {
    /// Δ_Σ in joules.
    pub delta_sigma: f64,
    /// Tunnel resistance R_J in ohms.
    pub r_j: f64,
}

impl UnitScales {
    pub fn new(delta_sigma_j: f64, r_j_ohm: f64) -> Self {
        UnitScales { delta_sigma: delta_sigma_j, r_j: r_j_ohm }
    }

    /// Angular frequency unit Δ_Σ/ħ in rad/s.
    pub fn omega_unit(&self) -> f64 {
        self.delta_sigma / HBAR
    }

    /// Ordinary-frequency equivalent of the energy unit, Δ_Σ/h in Hz.
    pub fn freq_unit_hz(&self) -> f64 {
        self.delta_sigma / PLANCK_H
    }

    /// Inductance unit ħR_J/Δ_Σ in henry.
    pub fn l_unit(&self) -> f64 {
        HBAR * self.r_j / self.delta_sigma
    }

    /// Capacitance unit ħ/(Δ_Σ R_J) in farad.
    pub fn c_unit(&self) -> f64 {
        HBAR / (self.delta_sigma * self.r_j)
    }

    /// Power unit Δ_Σ²/ħ in watt.
    pub fn power_unit(&self) -> f64 {
        self.delta_sigma * self.delta_sigma / HBAR
    }

    pub fn temperature_to_reduced(&self, kelvin: f64) -> f64 {
        K_B * kelvin / self.delta_sigma
    }

    pub fn temperature_to_kelvin(&self, reduced: f64) -> f64 {
        reduced * self.delta_sigma / K_B
    }

    /// Ordinary frequency in Hz -> reduced angular frequency.
    pub fn hz_to_reduced(&self, hz: f64) -> f64 {
        hz / self.freq_unit_hz()
    }

    /// Reduced angular frequency -> ordinary frequency in Hz.
    pub fn reduced_to_hz(&self, omega: f64) -> f64 {
        omega * self.freq_unit_hz()
    }

    /// Drive voltage in volts -> eV0 in Δ_Σ units.
    pub fn voltage_to_reduced(&self, volts: f64) -> f64 {
        E_CHARGE * volts / self.delta_sigma
    }

    pub fn voltage_to_si(&self, reduced: f64) -> f64 {
        reduced * self.delta_sigma / E_CHARGE
    }

    pub fn inductance_to_reduced(&self, henry: f64) -> f64 {
        henry / self.l_unit()
    }

    pub fn capacitance_to_reduced(&self, farad: f64) -> f64 {
        farad / self.c_unit()
    }

    pub fn impedance_to_reduced(&self, ohm: f64) -> f64 {
        ohm / self.r_j
    }
}
