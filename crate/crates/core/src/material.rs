//! BCS quasiclassical Green's functions of a superconducting lead.
//!
//! The retarded components are
//!
//! ```text
//! g^R(ω) = -(ω + iν) / sqrt(Δ² - (ω + iν)²)
//! f^R(ω) = -Δ       / sqrt(Δ² - (ω + iν)²)
//! ```
//!
//! with the principal complex square root; with ν > 0 the argument never
//! touches the branch cut, so no case analysis is needed. Advanced
//! components are complex conjugates at real ω, and the Keldysh components
//! follow from the occupation factor, g^K = (g^R - g^A)(1 - 2n).
//!
//! All quantities are in reduced units: energies and ħω in Δ_Σ, rates in
//! Δ_Σ/ħ.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Regularization floor substituted when a lead is configured with a
/// vanishing Dynes rate. Keeps the branch-point integrands finite while
/// leaving the logarithmic features sharp on plotting scales.
pub const NU_MIN: f64 = 1e-6;

/// One superconducting lead: gap, Dynes broadening, and temperature, all
/// reduced (gap and k_B T in Δ_Σ, Dynes rate in Δ_Σ/ħ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadParams {
    pub gap: f64,
    pub dynes_rate: f64,
    pub temperature: f64,
}

/// Normal (g) and anomalous (f) components at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensValue {
    pub g: Complex64,
    pub f: Complex64,
}

impl LeadParams {
    pub fn new(gap: f64, dynes_rate: f64, temperature: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(gap > 0.0) {
            problems.push(format!("lead gap must be positive, got {gap}"));
        }
        if !(dynes_rate >= 0.0) {
            problems.push(format!("Dynes rate must be non-negative, got {dynes_rate}"));
        }
        if !(temperature >= 0.0) {
            problems.push(format!("lead temperature must be non-negative, got {temperature}"));
        }
        if problems.is_empty() {
            Ok(LeadParams { gap, dynes_rate, temperature })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Dynes rate with the ν = 0 floor substituted.
    pub fn effective_dynes(&self) -> f64 {
        if self.dynes_rate > 0.0 { self.dynes_rate } else { NU_MIN }
    }

    pub fn green_retarded(&self, omega: f64) -> GreensValue {
        let z = Complex64::new(omega, self.effective_dynes());
        let root = (Complex64::new(self.gap * self.gap, 0.0) - z * z).sqrt();
        GreensValue { g: -z / root, f: -Complex64::new(self.gap, 0.0) / root }
    }

    pub fn green_advanced(&self, omega: f64) -> GreensValue {
        let r = self.green_retarded(omega);
        GreensValue { g: r.g.conj(), f: r.f.conj() }
    }

    pub fn green_keldysh(&self, omega: f64) -> GreensValue {
        let r = self.green_retarded(omega);
        let h = self.thermal_sign(omega);
        GreensValue {
            g: (r.g - r.g.conj()) * h,
            f: (r.f - r.f.conj()) * h,
        }
    }

    /// Fermi-Dirac occupation at energy ε; exact step at T = 0.
    pub fn occupation(&self, energy: f64) -> f64 {
        if self.temperature == 0.0 {
            return match energy.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Less) => 1.0,
                Some(std::cmp::Ordering::Greater) => 0.0,
                _ => 0.5,
            };
        }
        let x = energy / self.temperature;
        if x > 0.0 {
            let t = (-x).exp();
            t / (1.0 + t)
        } else {
            1.0 / (1.0 + x.exp())
        }
    }

    /// 1 - 2n(ε) = tanh(ε/2k_BT); sign function at T = 0.
    pub fn thermal_sign(&self, energy: f64) -> f64 {
        if self.temperature == 0.0 {
            if energy == 0.0 { 0.0 } else { energy.signum() }
        } else {
            (energy / (2.0 * self.temperature)).tanh()
        }
    }
}

/// coth(x) with the Laurent series 1/x + x/3 substituted close to zero.
pub fn coth_safe(x: f64) -> f64 {
    const X_MIN: f64 = 1e-4;
    if x.abs() <= X_MIN {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lead(gap: f64, nu: f64, t: f64) -> LeadParams {
        LeadParams::new(gap, nu, t).unwrap()
    }

    #[test]
    fn zero_frequency_values() {
        let l = lead(0.5, 0.0, 0.0);
        let r = l.green_retarded(0.0);
        assert!(r.g.norm() < 1e-5);
        assert!((r.f - Complex64::new(-1.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn above_gap_retarded_limit() {
        // g^R at ħω = 2Δ tends to -2i/√3 as ν -> 0; evaluate at decreasing ν
        // and check the trend converges to the closed-form limit.
        let target = Complex64::new(0.0, -2.0 / 3.0f64.sqrt());
        let mut prev_err = f64::INFINITY;
        for nu in [1e-2, 1e-3, 1e-4, 1e-5] {
            let l = lead(0.5, nu, 0.0);
            let err = (l.green_retarded(1.0).g - target).norm();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-4, "residual {prev_err}");
    }

    #[test]
    fn subgap_real_branch() {
        let l = lead(0.5, 0.0, 0.0);
        let r = l.green_retarded(0.3 * 0.5);
        let expect = 0.3 / (1.0 - 0.09f64).sqrt();
        assert!((r.g.re.abs() - expect).abs() < 1e-4);
        assert!(r.g.im.abs() < 10.0 * NU_MIN);
        assert!(r.f.im.abs() < 10.0 * NU_MIN);
    }

    #[test]
    fn advanced_is_conjugate() {
        let l = lead(0.5, 3e-3, 0.1);
        for &w in &[-2.3, -0.7, 0.0, 0.4, 1.0, 5.0] {
            let r = l.green_retarded(w);
            let a = l.green_advanced(w);
            assert_eq!(a.g, r.g.conj());
            assert_eq!(a.f, r.f.conj());
        }
        // closed-form limit: g^A(2Δ) = +2i/√3 as ν -> 0
        let a = lead(0.5, 1e-5, 0.0).green_advanced(1.0);
        assert!((a.g - Complex64::new(0.0, 2.0 / 3.0f64.sqrt())).norm() < 1e-4);
    }

    #[test]
    fn parity_relations() {
        let l = lead(0.5, 0.0, 0.0);
        for &w in &[0.1, 0.5, 0.99, 1.3, 4.0] {
            let p = l.green_retarded(w);
            let m = l.green_retarded(-w);
            assert!((m.g + p.g.conj()).norm() < 1e-10);
            assert!((m.f - p.f.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn keldysh_values() {
        // T = 0 below the gap: g^R - g^A = 0, so g^K = 0.
        let cold = lead(0.5, 0.0, 0.0);
        assert!(cold.green_keldysh(0.2).g.norm() < 1e-4);
        // ω = 0 at any T: 1 - 2n = 0.
        let warm = lead(0.5, 0.0, 0.08);
        assert_eq!(warm.green_keldysh(0.0).g, Complex64::new(0.0, 0.0));
        // Direct formula at finite T above the gap.
        let w = 0.75;
        let k = warm.green_keldysh(w);
        let r = warm.green_retarded(w);
        let expect = (r.g - r.g.conj()) * (w / (2.0 * 0.08)).tanh();
        assert!((k.g - expect).norm() < 1e-12);
        // Both Keldysh components are purely imaginary; g^K is odd in ω
        // (Im g^R even, occupation factor odd) while f^K is even
        // (Im f^R odd), so g^K(ω) = conj(g^K(-ω)) and f^K(ω) = -conj(f^K(-ω)).
        for &x in &[0.3, 0.8, 1.7] {
            let kp = warm.green_keldysh(x);
            let km = warm.green_keldysh(-x);
            assert!((kp.g - km.g.conj()).norm() < 1e-10);
            assert!((kp.f + km.f.conj()).norm() < 1e-10);
            assert!(kp.g.re.abs() < 1e-14 && kp.f.re.abs() < 1e-14);
        }
    }

    #[test]
    fn occupation_values() {
        let l = lead(0.5, 0.0, 0.04);
        assert_eq!(l.occupation(0.0), 0.5);
        assert!(l.occupation(1e4) < 1e-300);
        assert!((l.occupation(0.04) - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-12);
        let t0 = lead(0.5, 0.0, 0.0);
        assert_eq!(t0.occupation(-0.1), 1.0);
        assert_eq!(t0.occupation(0.1), 0.0);
        assert_eq!(t0.occupation(0.0), 0.5);
    }

    #[test]
    fn coth_safe_values() {
        assert!((coth_safe(1.0) - 1.3130352854993312).abs() < 1e-12);
        assert!((coth_safe(40.0) - 1.0).abs() < 1e-12);
        let x = 1e-12;
        assert!((coth_safe(x) - 1e12).abs() / 1e12 < 1e-9);
        assert_eq!(coth_safe(-x), -coth_safe(x));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LeadParams::new(0.0, 0.0, 0.1).is_err());
        assert!(LeadParams::new(0.5, -1.0, 0.1).is_err());
        assert!(LeadParams::new(0.5, 0.0, -0.1).is_err());
    }
}
