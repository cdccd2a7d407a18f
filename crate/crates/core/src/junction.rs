//! Static and driven junction response.
//!
//! A monochromatic drive V₀cos(Ωt) on top of a dc phase bias φ₀ enters
//! through the Fourier coefficients c_n = e^{iφ₀/2} J_n(-eV₀/ħΩ) of
//! e^{iφ_d/2}. A weak probe tone at ω then responds at every ω + nΩ with
//! harmonic admittances
//!
//! ```text
//! Y_{J,n}(ω) = (i/2ω) Σ_{n'} [c*_{n'-n}, c_{n-n'}]
//!              [[Π̃_n(ω,n'Ω), Π̃_s(ω,n'Ω)], [Π̃_s, Π̃_n]] [c_{n'}; c*_{-n'}]
//! ```
//!
//! in units of 1/R_J. The n'-sum is truncated at N_max(x), beyond which the
//! Bessel weights are superexponentially small.

use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::polarization::{Component, PolarizationTable};
use crate::units::R_Q_OHM;

/// Drive parameters in reduced units: phase bias in radians, amplitude as
/// eV₀ in Δ_Σ, drive angular frequency in Δ_Σ/ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub phase_bias: f64,
    pub amplitude: f64,
    pub drive_freq: f64,
}

impl DriveParams {
    pub fn new(phase_bias: f64, amplitude: f64, drive_freq: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(amplitude >= 0.0) {
            problems.push(format!("drive amplitude must be non-negative, got {amplitude}"));
        }
        if amplitude > 0.0 && !(drive_freq > 0.0) {
            problems.push(format!(
                "drive frequency must be positive when the amplitude is non-zero, got {drive_freq}"
            ));
        }
        if drive_freq < 0.0 {
            problems.push(format!("drive frequency must be non-negative, got {drive_freq}"));
        }
        if problems.is_empty() {
            Ok(DriveParams { phase_bias, amplitude, drive_freq })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Undriven junction at phase bias φ₀.
    pub fn static_bias(phase_bias: f64) -> Self {
        DriveParams { phase_bias, amplitude: 0.0, drive_freq: 1.0 }
    }

    /// Dimensionless drive index x = eV₀/(ħΩ).
    pub fn drive_index(&self) -> f64 {
        if self.amplitude == 0.0 { 0.0 } else { self.amplitude / self.drive_freq }
    }

    /// Drive phase φ_d(t) = φ₀ + 2x sin(Ωt).
    pub fn phase(&self, t: f64) -> f64 {
        self.phase_bias + 2.0 * self.drive_index() * (self.drive_freq * t).sin()
    }
}

/// Truncation order for the harmonic sums.
pub fn n_max(drive_index: f64) -> i32 {
    (drive_index + 10.0 * drive_index.cbrt() + 12.0).ceil() as i32
}

/// Fourier coefficient c_n = e^{iφ₀/2} J_n(-eV₀/ħΩ).
pub fn fourier_coeff(d: &DriveParams, n: i32) -> Complex64 {
    let phase = Complex64::from_polar(1.0, 0.5 * d.phase_bias);
    phase * bessel_j(n, -d.drive_index())
}

/// Precomputed drive data over a table: Fourier coefficients and the
/// polarization values at the drive harmonics n'Ω. Shared by admittance,
/// Keldysh, and kernel evaluations in hot loops.
pub struct DriveContext<'a> {
    pub table: &'a PolarizationTable,
    pub drive: DriveParams,
    pub n_max: i32,
    coeff: Vec<Complex64>,
    coeff_offset: i32,
    pi_n_at: Vec<Complex64>,
    pi_s_at: Vec<Complex64>,
}

impl<'a> DriveContext<'a> {
    pub fn new(table: &'a PolarizationTable, drive: DriveParams) -> Result<Self> {
        Self::with_extra_orders(table, drive, 0)
    }

    /// `extra` widens the stored coefficient range for harmonic indices
    /// n ≠ 0 in Y_{J,n} or G^K_{r,n}.
    pub fn with_extra_orders(
        table: &'a PolarizationTable,
        drive: DriveParams,
        extra: i32,
    ) -> Result<Self> {
        let x = drive.drive_index();
        let nm = if drive.amplitude == 0.0 { 0 } else { n_max(x) };
        let edge = bessel_j(nm, -x);
        if nm > 0 && edge * edge > 1e-12 {
            return Err(Error::TruncationWarning { weight: edge * edge });
        }
        let span = nm + extra.abs();
        let coeff: Vec<Complex64> =
            (-span..=span).map(|n| fourier_coeff(&drive, n)).collect();
        let mut pi_n_at = Vec::with_capacity((2 * nm + 1) as usize);
        let mut pi_s_at = Vec::with_capacity((2 * nm + 1) as usize);
        for np in -nm..=nm {
            let v = table.value(np as f64 * drive.drive_freq)?;
            pi_n_at.push(v.pi_n_ret);
            pi_s_at.push(v.pi_s_ret);
        }
        Ok(DriveContext {
            table,
            drive,
            n_max: nm,
            coeff,
            coeff_offset: span,
            pi_n_at,
            pi_s_at,
        })
    }

    pub fn c(&self, n: i32) -> Complex64 {
        let i = n + self.coeff_offset;
        if i < 0 || i as usize >= self.coeff.len() {
            Complex64::ZERO
        } else {
            self.coeff[i as usize]
        }
    }

    fn pi_ret_at_harmonic(&self, np: i32) -> (Complex64, Complex64) {
        let i = (np + self.n_max) as usize;
        (self.pi_n_at[i], self.pi_s_at[i])
    }

    /// Harmonic admittance Y_{J,n}(ω), units 1/R_J. ω must be non-zero.
    pub fn admittance(&self, n: i32, omega: f64) -> Result<Complex64> {
        assert!(omega != 0.0, "the ω = 0 inductive pole is exposed separately");
        let mut sum = Complex64::ZERO;
        for np in -self.n_max..=self.n_max {
            let a = self.c(np - n).conj();
            let b = self.c(n - np);
            let u = self.c(np);
            let v = self.c(-np).conj();
            if a.norm_sqr() + b.norm_sqr() < 1e-28 || u.norm_sqr() + v.norm_sqr() < 1e-28 {
                continue;
            }
            let wp = np as f64 * self.drive.drive_freq;
            let tn = self.table.pi_tilde(omega, wp, Component::Normal)?;
            let ts = self.table.pi_tilde(omega, wp, Component::Anomalous)?;
            sum += a * (tn * u + ts * v) + b * (ts * u + tn * v);
        }
        Ok(Complex64::new(0.0, 0.5 / omega) * sum)
    }

    /// Coefficient σ_J of the inductive pole, Y_{J,0}(ω) → iσ_J/ω as ω → 0.
    /// The effective inverse inductance of the driven junction is σ_J (in
    /// 1/(R_J · Δ_Σ/ħ) units).
    pub fn inductive_pole_coeff(&self) -> f64 {
        let mut sum = 0.0;
        for np in -self.n_max..=self.n_max {
            let u = self.c(np);
            let v = self.c(-np).conj();
            let a = u.conj();
            let b = v.conj();
            let (_, ps) = self.pi_ret_at_harmonic(np);
            // Π̃_n(0, n'Ω) vanishes and Π̃_s(0, n'Ω) = Π_s^R(n'Ω)/2, so the
            // (i/2ω) quadratic form leaves σ_J = ¼ Σ Re[(av + bu) Π_s];
            // imaginary parts cancel between ±n' by the reality relation.
            sum += 0.25 * ((a * v + b * u) * ps).re;
        }
        sum
    }

    /// Complex amplitudes A_n of the drive-only current harmonics; the
    /// physical current is I(t) = Im Σ_n A_n e^{-inΩt}, in Δ_Σ/(2eR_J).
    pub fn drive_current_harmonic(&self, n: i32) -> Complex64 {
        let mut sum = Complex64::ZERO;
        for np in -self.n_max..=self.n_max {
            let cn = self.c(np);
            if cn.norm_sqr() < 1e-28 {
                continue;
            }
            let (pn, ps) = self.pi_ret_at_harmonic(np);
            sum += cn * (self.c(n - np) * ps + self.c(np - n).conj() * pn);
        }
        sum * 0.5
    }
}

/// Admittance of the undriven junction, Y_J(ω; φ₀) = (i/ω)[Π̃_n(ω,0) +
/// Π̃_s(ω,0) cos φ₀].
pub fn static_admittance(
    table: &PolarizationTable,
    phase_bias: f64,
    omega: f64,
) -> Result<Complex64> {
    assert!(omega != 0.0, "the ω = 0 inductive pole is exposed separately");
    let tn = table.pi_tilde(omega, 0.0, Component::Normal)?;
    let ts = table.pi_tilde(omega, 0.0, Component::Anomalous)?;
    Ok(Complex64::new(0.0, 1.0 / omega) * (tn + ts * phase_bias.cos()))
}

/// Harmonic admittance of the driven junction; collapses to the static
/// admittance for V₀ = 0, n = 0.
pub fn driven_admittance(
    table: &PolarizationTable,
    d: &DriveParams,
    n: i32,
    omega: f64,
) -> Result<Complex64> {
    DriveContext::with_extra_orders(table, *d, n)?.admittance(n, omega)
}

/// dc Josephson current (Φ₀/4π)Π_s^R(0) sin φ₀ in units of Δ_Σ/(2eR_J).
pub fn dc_josephson_current(table: &PolarizationTable, phase_bias: f64) -> Result<f64> {
    Ok(0.5 * table.pi_s_ret(0.0)?.re * phase_bias.sin())
}

/// Drive-only current harmonics over an inclusive index range.
pub fn drive_current_harmonics(
    table: &PolarizationTable,
    d: &DriveParams,
    n_range: std::ops::RangeInclusive<i32>,
) -> Result<Vec<Complex64>> {
    let extra = (*n_range.start()).abs().max((*n_range.end()).abs());
    let ctx = DriveContext::with_extra_orders(table, *d, extra)?;
    Ok(n_range.map(|n| ctx.drive_current_harmonic(n)).collect())
}

/// Josephson energy E_J = ½(Φ₀/2π)²Π_s^R(0), returned in Δ_Σ units:
/// E_J/Δ_Σ = Π̂_s(0) · R_Q/(4π R_J).
pub fn josephson_energy(table: &PolarizationTable) -> Result<f64> {
    let r_j = table.params().tunnel_resistance;
    Ok(table.pi_s_ret(0.0)?.re * R_Q_OHM / (4.0 * std::f64::consts::PI * r_j))
}

/// Closed-form Ambegaokar-Baratoff energy for a symmetric junction,
/// E_J = (R_Q/2R_J) Δ tanh(Δ/2k_BT), in Δ_Σ units (Δ = Δ_Σ/2).
pub fn ambegaokar_baratoff_energy(tunnel_resistance: f64, temperature: f64) -> f64 {
    let delta = 0.5;
    R_Q_OHM / (2.0 * tunnel_resistance) * delta * (delta / (2.0 * temperature)).tanh()
}
