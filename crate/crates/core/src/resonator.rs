//! LC circuit shunted by the driven junction: retarded and Keldysh Green's
//! functions, transmission, resonance metrics, heat flow, and the
//! steady-state quasitemperature.
//!
//! The flux-flux retarded propagator carries the whole junction response in
//! the frequency-preserving admittance,
//!
//! ```text
//! G^R_{r,0}(ω) = L_r / (ω² L_r C_r + iω L_r Y_{J,0}(ω) - 1)
//! ```
//!
//! and the harmonic Keldysh components are the c-weighted quadratic forms
//! of Π^K sandwiched between G^R and G^A. All quantities reduced: L in
//! ħR_J/Δ_Σ, C in ħ/(Δ_Σ R_J), temperatures in Δ_Σ, powers in Δ_Σ²/ħ.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::junction::{DriveContext, DriveParams};
use crate::material::coth_safe;
use crate::polarization::PolarizationTable;
use crate::quadrature::{adaptive_panels, gk15_nodes, QuadSettings};
use crate::units::{UnitScales, R_Q_OHM};

/// LC circuit with the probe line, reduced units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorCircuit {
    pub inductance: f64,
    pub capacitance: f64,
    pub coupling_capacitance: f64,
    pub probe_impedance: f64,
    pub probe_temperature: f64,
}

impl ResonatorCircuit {
    pub fn new(
        inductance: f64,
        capacitance: f64,
        coupling_capacitance: f64,
        probe_impedance: f64,
        probe_temperature: f64,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        if !(inductance > 0.0) {
            problems.push(format!("inductance must be positive, got {inductance}"));
        }
        if !(capacitance > 0.0) {
            problems.push(format!("capacitance must be positive, got {capacitance}"));
        }
        if !(coupling_capacitance >= 0.0) {
            problems.push(format!(
                "coupling capacitance must be non-negative, got {coupling_capacitance}"
            ));
        }
        if !(probe_impedance > 0.0) {
            problems.push(format!("probe impedance must be positive, got {probe_impedance}"));
        }
        if !(probe_temperature >= 0.0) {
            problems.push(format!("probe temperature must be non-negative, got {probe_temperature}"));
        }
        if problems.is_empty() {
            Ok(ResonatorCircuit {
                inductance,
                capacitance,
                coupling_capacitance,
                probe_impedance,
                probe_temperature,
            })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Bare resonance ω_r = 1/√(L_r C_r).
    pub fn omega_r(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }

    /// Z_r/R_Q in the given unit system; the quasiclassical treatment
    /// assumes this is small.
    pub fn impedance_ratio(&self, units: &UnitScales) -> f64 {
        let z_r = (self.inductance / self.capacitance).sqrt() * units.r_j;
        z_r / R_Q_OHM
    }
}

/// Spectrum of the driven resonator around its resonance, with the derived
/// line metrics.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub grid: Vec<f64>,
    pub g_ret: Vec<Complex64>,
    pub g_kel: Vec<Complex64>,
    pub stark_freq: f64,
    pub linewidth: f64,
    pub non_lorentzian: bool,
    pub ks_distance: f64,
}

/// Resonator + drive evaluation context over one polarization table.
pub struct ResonatorSolver<'a> {
    pub circuit: ResonatorCircuit,
    ctx: DriveContext<'a>,
}

impl<'a> ResonatorSolver<'a> {
    pub fn new(
        circuit: ResonatorCircuit,
        table: &'a PolarizationTable,
        drive: DriveParams,
    ) -> Result<Self> {
        Ok(ResonatorSolver { circuit, ctx: DriveContext::new(table, drive)? })
    }

    pub fn drive(&self) -> &DriveParams {
        &self.ctx.drive
    }

    pub fn admittance(&self, omega: f64) -> Result<Complex64> {
        self.ctx.admittance(0, omega)
    }

    /// G^R_{r,0}(ω); the advanced component is its conjugate.
    pub fn g_retarded(&self, omega: f64) -> Result<Complex64> {
        let l = self.circuit.inductance;
        let c = self.circuit.capacitance;
        let y = self.ctx.admittance(0, omega)?;
        let denom = Complex64::new(omega * omega * l * c - 1.0, 0.0)
            + Complex64::new(0.0, omega * l) * y;
        Ok(Complex64::new(l, 0.0) / denom)
    }

    /// Harmonic-n Keldysh component
    /// G^K_{r,n}(ω) = (1/16) G^R(ω+nΩ) G^A(ω) Σ_{n'} [c†] τ₃Π^K τ₃ [c];
    /// the τ₃ sandwich makes the anomalous cross terms enter with +Π_s^K.
    pub fn g_keldysh(&self, n: i32, omega: f64) -> Result<Complex64> {
        let gr = self.g_retarded(omega + n as f64 * self.ctx.drive.drive_freq)?;
        let ga = self.g_retarded(omega)?.conj();
        let mut sum = Complex64::ZERO;
        for np in -self.ctx.n_max..=self.ctx.n_max {
            let a = self.ctx.c(np - n).conj();
            let b = self.ctx.c(n - np);
            let u = self.ctx.c(np);
            let v = self.ctx.c(-np).conj();
            if a.norm_sqr() + b.norm_sqr() < 1e-28 || u.norm_sqr() + v.norm_sqr() < 1e-28 {
                continue;
            }
            let w = omega + np as f64 * self.ctx.drive.drive_freq;
            let val = self.ctx.table.value(w)?;
            let (kn, ks) = (val.pi_n_kel, val.pi_s_kel);
            sum += a * (kn * u + ks * v) + b * (ks * u + kn * v);
        }
        Ok(gr * ga * sum / 16.0)
    }

    /// Transmission through the weakly coupled probe, to second order in
    /// the coupling capacitance.
    pub fn s21(&self, omega: f64) -> Result<Complex64> {
        let q = omega * self.circuit.probe_impedance * self.circuit.coupling_capacitance;
        if self.circuit.coupling_capacitance == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let g = self.g_retarded(omega)?;
        let cp = self.circuit.coupling_capacitance;
        let zp = self.circuit.probe_impedance;
        Ok(Complex64::new(1.0 - 0.25 * q * q, 0.5 * q)
            - Complex64::new(0.0, 0.5) * omega.powi(3) * zp * cp * cp * g)
    }

    /// Junction-loaded resonance: root of Re[1/G^R](ω) above zero. Used to
    /// center spectrum grids; the measured extremum is what gets reported.
    pub fn locate_resonance(&self) -> Result<f64> {
        let l = self.circuit.inductance;
        let c = self.circuit.capacitance;
        let w_r = self.circuit.omega_r();
        let re_d = |w: f64| -> Result<f64> {
            let y = self.ctx.admittance(0, w)?;
            Ok(w * w * l * c - w * l * y.im - 1.0)
        };
        let (mut lo, mut hi) = (0.3 * w_r, 2.0 * w_r);
        let (mut flo, fhi) = (re_d(lo)?, re_d(hi)?);
        if flo.signum() == fhi.signum() {
            return Err(Error::ResonanceNotFound);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = re_d(mid)?;
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * w_r {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Damping estimate Re Y(ω̃)/C_r used for grid sizing.
    pub fn linewidth_estimate(&self, omega_tilde: f64) -> Result<f64> {
        let y = self.ctx.admittance(0, omega_tilde)?;
        Ok((y.re / self.circuit.capacitance).max(1e-14))
    }

    /// Spectrum on an automatically refined grid around the resonance.
    pub fn spectrum(&self, half_span_linewidths: f64, points: usize) -> Result<SpectralResult> {
        let wt = self.locate_resonance()?;
        let gamma = self.linewidth_estimate(wt)?;
        let mut grid = Vec::with_capacity(points + 64);
        let half = half_span_linewidths * gamma;
        for i in 0..points {
            grid.push(wt - half + 2.0 * half * i as f64 / (points - 1) as f64);
        }
        // coarse wings so the global extremum search sees the background
        for i in 0..32 {
            let f = 0.90 + 0.20 * i as f64 / 31.0;
            grid.push(wt * f);
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-16);
        grid.retain(|&w| w > 0.0);
        self.spectrum_on_grid(&grid)
    }

    /// Spectrum on a caller-supplied grid.
    pub fn spectrum_on_grid(&self, grid: &[f64]) -> Result<SpectralResult> {
        let g_ret: Result<Vec<Complex64>> = grid.iter().map(|&w| self.g_retarded(w)).collect();
        let g_ret = g_ret?;
        let g_kel: Result<Vec<Complex64>> = grid.iter().map(|&w| self.g_keldysh(0, w)).collect();
        let g_kel = g_kel?;
        let mut out = SpectralResult {
            grid: grid.to_vec(),
            g_ret,
            g_kel,
            stark_freq: 0.0,
            linewidth: 0.0,
            non_lorentzian: false,
            ks_distance: 0.0,
        };
        out.stark_freq = stark_shifted_freq(&out)?;
        let lw = linewidth(&out)?;
        out.linewidth = lw.fwhm;
        out.non_lorentzian = lw.non_lorentzian;
        out.ks_distance = lw.ks_distance;
        Ok(out)
    }
}

/// ac-Stark-shifted resonance: frequency of the global extremum of
/// |Im G^R|, refined by a local quadratic fit.
pub fn stark_shifted_freq(spectrum: &SpectralResult) -> Result<f64> {
    let mag: Vec<f64> = spectrum.g_ret.iter().map(|g| g.im.abs()).collect();
    let k = mag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::ResonanceNotFound)?;
    if k == 0 || k + 1 == mag.len() {
        return Err(Error::ResonanceNotFound);
    }
    // parabola through the three points around the maximum; the slopes d1,
    // d2 live at the segment midpoints, so the vertex is m1 - d1/curvature
    let (x0, x1, x2) = (spectrum.grid[k - 1], spectrum.grid[k], spectrum.grid[k + 1]);
    let (y0, y1, y2) = (mag[k - 1], mag[k], mag[k + 1]);
    let d1 = (y1 - y0) / (x1 - x0);
    let d2 = (y2 - y1) / (x2 - x1);
    let m1 = 0.5 * (x0 + x1);
    let m2 = 0.5 * (x1 + x2);
    let curv = (d2 - d1) / (m2 - m1);
    if curv >= 0.0 {
        return Ok(x1);
    }
    Ok((m1 - d1 / curv).clamp(x0, x2))
}

/// Full width at half maximum of |Im G^R| plus a Lorentzian-shape check
/// (Kolmogorov distance of the normalized line to its best-fit Lorentzian).
#[derive(Debug, Clone, Copy)]
pub struct LinewidthResult {
    pub fwhm: f64,
    pub non_lorentzian: bool,
    pub ks_distance: f64,
}

pub fn linewidth(spectrum: &SpectralResult) -> Result<LinewidthResult> {
    let mag: Vec<f64> = spectrum.g_ret.iter().map(|g| g.im.abs()).collect();
    let grid = &spectrum.grid;
    let k = mag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::ResonanceNotFound)?;
    if k == 0 || k + 1 == mag.len() {
        return Err(Error::ResonanceNotFound);
    }
    let peak = mag[k];
    let half = 0.5 * peak;
    // crossings by linear interpolation outward from the peak
    let mut left = None;
    for i in (0..k).rev() {
        if mag[i] <= half {
            let t = (half - mag[i]) / (mag[i + 1] - mag[i]);
            left = Some(grid[i] + t * (grid[i + 1] - grid[i]));
            break;
        }
    }
    let mut right = None;
    for i in k + 1..mag.len() {
        if mag[i] <= half {
            let t = (half - mag[i - 1]) / (mag[i] - mag[i - 1]);
            right = Some(grid[i - 1] + t * (grid[i] - grid[i - 1]));
            break;
        }
    }
    let (a, b) = match (left, right) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::ResonanceNotFound),
    };
    let fwhm = b - a;
    let center = stark_shifted_freq(spectrum)?;

    // Kolmogorov distance over a ±10 FWHM window
    let lo = center - 10.0 * fwhm;
    let hi = center + 10.0 * fwhm;
    let mut cum = 0.0;
    let mut data_cdf: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid.len() {
        let w = grid[i];
        if w < lo || w > hi {
            continue;
        }
        if let Some((wp, mp)) = prev {
            cum += 0.5 * (mag[i] + mp) * (w - wp);
        }
        data_cdf.push((w, cum));
        prev = Some((w, mag[i]));
    }
    if cum <= 0.0 || data_cdf.len() < 8 {
        return Ok(LinewidthResult { fwhm, non_lorentzian: false, ks_distance: 0.0 });
    }
    let model = |w: f64| ((w - center) * 2.0 / fwhm).atan();
    let (m_lo, m_hi) = (model(data_cdf[0].0), model(data_cdf[data_cdf.len() - 1].0));
    let mut ks = 0.0f64;
    for &(w, c) in &data_cdf {
        let f_data = c / cum;
        let f_model = (model(w) - m_lo) / (m_hi - m_lo);
        ks = ks.max((f_data - f_model).abs());
    }
    Ok(LinewidthResult { fwhm, non_lorentzian: ks > 0.05, ks_distance: ks })
}

/// Cached heat-flow integrand: the probe temperature only enters through a
/// coth factor, so one adaptive refinement at a reference temperature
/// serves every bisection step.
pub struct HeatSolver {
    /// (ω, weight, Im G^K ω⁴, Im G^R ω⁴) at the quadrature nodes.
    nodes: Vec<(f64, f64, f64, f64)>,
    prefactor: f64,
}

impl HeatSolver {
    pub fn new(solver: &ResonatorSolver<'_>, settings: &QuadSettings) -> Result<Self> {
        let drive = solver.drive();
        let omega_cut = 1.0 + (solver.ctx.n_max + 2).max(3) as f64 * drive.drive_freq.max(0.05);
        let omega_cut = omega_cut.min(solver.ctx.table.omega_max() - solver.ctx.n_max as f64 * drive.drive_freq - 1e-9);
        let wt = solver.locate_resonance()?;
        let gamma = solver.linewidth_estimate(wt)?;

        let mut seeds = vec![0.0, omega_cut, wt, solver.circuit.omega_r()];
        for k in [1.0, 2.0, 5.0, 15.0, 50.0, 200.0] {
            seeds.push(wt - k * gamma);
            seeds.push(wt + k * gamma);
        }
        // Cooper-pair-breaking thresholds folded by the drive
        for n in -solver.ctx.n_max..=solver.ctx.n_max {
            for s in [-1.0, 1.0] {
                let w = s + n as f64 * drive.drive_freq;
                if w > 0.0 && w < omega_cut {
                    seeds.push(w);
                }
            }
        }
        seeds.retain(|&w| (0.0..=omega_cut).contains(&w));
        seeds.sort_by(f64::total_cmp);
        seeds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let t_ref = solver.circuit.probe_temperature.max(1e-4);
        let f = |w: f64| -> [Complex64; 1] {
            if w <= 0.0 {
                return [Complex64::ZERO];
            }
            let gk = solver.g_keldysh(0, w).unwrap_or(Complex64::ZERO);
            let gr = solver.g_retarded(w).unwrap_or(Complex64::ZERO);
            let w4 = w.powi(4);
            [Complex64::new(gk.im * w4, gr.im * w4 * coth_safe(w / (2.0 * t_ref)))]
        };
        let panels = adaptive_panels(&f, &seeds, settings)?;
        let mut nodes = Vec::with_capacity(panels.len() * 15);
        for (a, b) in panels {
            for (w, weight) in gk15_nodes(a, b) {
                let gk = solver.g_keldysh(0, w)?;
                let gr = solver.g_retarded(w)?;
                let w4 = w.powi(4);
                nodes.push((w, weight, gk.im * w4, gr.im * w4));
            }
        }
        let cp = solver.circuit.coupling_capacitance;
        let zp = solver.circuit.probe_impedance;
        // even integrand: factor 2 for the negative half-line
        let prefactor = 2.0 * (cp * cp * zp / 2.0) / (2.0 * std::f64::consts::PI);
        Ok(HeatSolver { nodes, prefactor })
    }

    /// Noise- and period-averaged power flowing from the probe into the
    /// resonator at probe temperature `t_probe` (reduced Δ_Σ²/ħ units).
    pub fn power(&self, t_probe: f64) -> f64 {
        assert!(t_probe > 0.0);
        let mut sum = 0.0;
        for &(w, weight, imgk_w4, imgr_w4) in &self.nodes {
            sum += weight * (imgk_w4 - imgr_w4 * coth_safe(w / (2.0 * t_probe)));
        }
        self.prefactor * sum
    }
}

/// Probe-temperature bracket for the quasitemperature root, reduced units.
#[derive(Debug, Clone, Copy)]
pub struct QuasitempBracket {
    pub t_lo: f64,
    pub t_hi: f64,
    pub tol: f64,
}

impl QuasitempBracket {
    /// Standard search bracket [1 mK, 10 K] with 0.1 mK tolerance.
    pub fn from_units(units: &UnitScales) -> Self {
        QuasitempBracket {
            t_lo: units.temperature_to_reduced(1e-3),
            t_hi: units.temperature_to_reduced(10.0),
            tol: units.temperature_to_reduced(1e-4),
        }
    }
}

/// Heat power from the probe at `t_probe`, convenience wrapper that builds
/// the cached integrand once.
pub fn heat_power(
    circuit: &ResonatorCircuit,
    table: &PolarizationTable,
    d: &DriveParams,
    t_probe: f64,
) -> Result<f64> {
    let solver = ResonatorSolver::new(*circuit, table, *d)?;
    let heat = HeatSolver::new(&solver, &QuadSettings::default())?;
    Ok(heat.power(t_probe))
}

/// Steady-state quasitemperature: probe temperature at which the averaged
/// heat flow vanishes, found by bisection. P(T_p) is increasing in T_p, so
/// a sign change on the bracket is required.
pub fn quasitemperature(
    circuit: &ResonatorCircuit,
    table: &PolarizationTable,
    d: &DriveParams,
    bracket: &QuasitempBracket,
) -> Result<f64> {
    let solver = ResonatorSolver::new(*circuit, table, *d)?;
    let heat = HeatSolver::new(&solver, &QuadSettings::default())?;
    quasitemperature_from(&heat, bracket)
}

pub fn quasitemperature_from(heat: &HeatSolver, bracket: &QuasitempBracket) -> Result<f64> {
    let (mut lo, mut hi) = (bracket.t_lo, bracket.t_hi);
    let p_lo = heat.power(lo);
    let p_hi = heat.power(hi);
    if p_lo.signum() == p_hi.signum() {
        return Err(Error::NoSignChange { p_low: p_lo, p_high: p_hi });
    }
    while hi - lo > bracket.tol {
        let mid = 0.5 * (lo + hi);
        if heat.power(mid).signum() == p_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One cell of a drive-parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub drive_freq: f64,
    pub amplitude: f64,
    pub qtemp: Option<f64>,
    pub linewidth: Option<f64>,
    pub stark_freq: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

/// Quasitemperature and linewidth over a grid of drive frequency and
/// amplitude. Failed cells carry their error tag instead of being dropped.
/// Cells are independent and evaluated in parallel.
pub fn sweep_map(
    circuit: &ResonatorCircuit,
    table: &PolarizationTable,
    phase_bias: f64,
    drive_freqs: &[f64],
    amplitudes: &[f64],
    bracket: &QuasitempBracket,
) -> SweepResult {
    let cells: Vec<(f64, f64)> = amplitudes
        .iter()
        .flat_map(|&v| drive_freqs.iter().map(move |&f| (f, v)))
        .collect();
    let points = cells
        .par_iter()
        .map(|&(freq, amp)| {
            let run = || -> Result<(f64, f64, f64)> {
                let d = DriveParams::new(phase_bias, amp, freq)?;
                let solver = ResonatorSolver::new(*circuit, table, d)?;
                let spec = solver.spectrum(30.0, 801)?;
                let heat = HeatSolver::new(&solver, &QuadSettings::default())?;
                let t_r = quasitemperature_from(&heat, bracket)?;
                Ok((t_r, spec.linewidth, spec.stark_freq))
            };
            match run() {
                Ok((t_r, lw, sf)) => SweepPoint {
                    drive_freq: freq,
                    amplitude: amp,
                    qtemp: Some(t_r),
                    linewidth: Some(lw),
                    stark_freq: Some(sf),
                    status: "ok".into(),
                },
                Err(e) => SweepPoint {
                    drive_freq: freq,
                    amplitude: amp,
                    qtemp: None,
                    linewidth: None,
                    stark_freq: None,
                    status: e.kind().into(),
                },
            }
        })
        .collect();
    SweepResult { points }
}
