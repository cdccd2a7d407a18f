//! Time-domain Monte Carlo oracle for the frequency-domain results.
//!
//! The junction noise ξ(t) is a stationary complex Gaussian process with
//! ⟨ξ*(t)ξ(t')⟩ = iΠ_n^K(t-t') and ⟨ξ(t)ξ(t')⟩ = -iΠ_s^K(t-t'); the drive
//! enters only through the explicit phase factors of the fluctuating
//! current Ĩ(t) = Im[ξ(t)e^{-iφ_d(t)/2}]/2. The resonator flux obeys
//!
//! ```text
//! C φ̈ + ∫ Y_{J,0}(t-t') φ̇(t') dt' + φ/L = -Ĩ(t)
//! ```
//!
//! integrated with a Strang split: exact rotation of the conservative part
//! around the junction-loaded frequency, implicit half-kicks for friction,
//! memory, and noise. Flux-flux spectra of the steady state estimate
//! G^K_{r,0}(ω) = -i S_φ(ω).
//!
//! Everything is reduced: time in ħ/Δ_Σ, admittance in 1/R_J, flux in
//! √(ħR_J), the scale in which the estimated correlator equals the
//! frequency-domain G^K in ħR_J/Δ_Σ units with no extra factors.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::junction::{DriveContext, DriveParams};
use crate::polarization::PolarizationTable;

// ---------------------------------------------------------------------------
// Noise model and synthesis
// ---------------------------------------------------------------------------

/// Spectral densities of the junction noise on a symmetric frequency grid.
#[derive(Debug, Clone)]
pub struct NoiseSpectralModel {
    pub grid: Vec<f64>,
    /// S of ⟨ξ*ξ⟩ = i Π_n^K(ω); real and non-negative.
    pub s_xx: Vec<f64>,
    /// Anomalous spectrum of ⟨ξξ⟩ = -i Π_s^K(ω).
    pub s_xy: Vec<Complex64>,
}

impl NoiseSpectralModel {
    fn lookup(&self, omega: f64) -> (f64, Complex64) {
        let g = &self.grid;
        let idx = match g.binary_search_by(|x| x.total_cmp(&omega)) {
            Ok(i) => return (self.s_xx[i], self.s_xy[i]),
            Err(i) => i.clamp(1, g.len() - 1),
        };
        let t = ((omega - g[idx - 1]) / (g[idx] - g[idx - 1])).clamp(0.0, 1.0);
        (
            self.s_xx[idx - 1] + (self.s_xx[idx] - self.s_xx[idx - 1]) * t,
            self.s_xy[idx - 1] + (self.s_xy[idx] - self.s_xy[idx - 1]) * t,
        )
    }

    pub fn omega_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }
}

/// Assemble the noise spectra from the tabulated Keldysh components. The
/// per-bin 2x2 covariance of (ξ(ω), ξ*(-ω)) must be positive semidefinite;
/// negative eigenvalues below 1e-10 of the trace are clamped, anything
/// larger signals an inconsistent Π^K upstream.
pub fn build_noise_model(
    table: &PolarizationTable,
    d: &DriveParams,
    grid: &[f64],
) -> Result<NoiseSpectralModel> {
    assert!(grid.windows(2).all(|w| w[1] > w[0]), "grid must be increasing");
    // The drive folds noise by up to ~nΩ into the resonator band; require
    // the synthesized band to reach the last significant sideband.
    if d.amplitude > 0.0 {
        let x = d.drive_index();
        let mut n_sig = 0;
        for n in 0..=crate::junction::n_max(x) {
            if crate::bessel::bessel_j(n, x).powi(2) > 1e-8 {
                n_sig = n;
            }
        }
        let needed = n_sig as f64 * d.drive_freq;
        if grid[grid.len() - 1] < needed {
            return Err(Error::Validation(vec![format!(
                "noise grid reaches {:.3} but drive sidebands need ±{:.3}",
                grid[grid.len() - 1],
                needed
            )]));
        }
    }
    let mut s_xx = Vec::with_capacity(grid.len());
    let mut s_xy = Vec::with_capacity(grid.len());
    for &w in grid {
        let v = table.value(w)?;
        let xx = Complex64::new(0.0, 1.0) * v.pi_n_kel;
        let xy = Complex64::new(0.0, -1.0) * v.pi_s_kel;
        // i Π_n^K is real up to quadrature noise
        debug_assert!(xx.im.abs() <= 1e-6 * xx.re.abs().max(1e-9));
        s_xx.push(xx.re);
        s_xy.push(xy);
    }
    // positivity: eigenvalues of [[s_xx(ω), s_xy], [s_xy*, s_xx(-ω)]]
    for i in 0..grid.len() {
        let w = grid[i];
        let j = match grid.binary_search_by(|x| x.total_cmp(&-w)) {
            Ok(j) => j,
            Err(_) => continue,
        };
        let (a, b, c) = (s_xx[i], s_xx[j], s_xy[i]);
        let trace = a + b;
        let disc = (0.25 * (a - b).powi(2) + c.norm_sqr()).sqrt();
        let lambda_min = 0.5 * trace - disc;
        if lambda_min < -1e-10 * trace.abs().max(1e-300) {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: lambda_min, trace });
        }
    }
    for x in &mut s_xx {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    // clamp the anomalous part onto the PSD cone
    let model = NoiseSpectralModel { grid: grid.to_vec(), s_xx, s_xy };
    Ok(model)
}

/// Stationary complex Gaussian series matching the model, by per-bin 2x2
/// factorization of the (ζ_k, ζ*_{-k}) covariance and inverse discrete
/// Fourier synthesis.
pub fn synthesize_noise(
    model: &NoiseSpectralModel,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let n_out = (duration / dt).ceil() as usize + 1;
    let n = n_out.next_power_of_two().max(64);
    let band = std::f64::consts::PI / dt;
    if band > model.omega_max() + 1e-9 {
        return Err(Error::Validation(vec![format!(
            "dt = {dt} resolves up to ω = {band:.3} but the model stops at {:.3}",
            model.omega_max()
        )]));
    }
    let t_total = n as f64 * dt;
    let d_omega = 2.0 * std::f64::consts::PI / t_total;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut zeta = vec![Complex64::ZERO; n];

    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    for k in 1..n / 2 {
        let w = k as f64 * d_omega;
        let (a, cxy) = model.lookup(w);
        let (b, _) = model.lookup(-w);
        let (a, b) = (a.max(0.0), b.max(0.0));
        let mut c = cxy;
        let cap = (a * b).sqrt();
        if c.norm() > cap {
            c *= cap / c.norm(); // roundoff clamp onto the PSD cone
        }
        let (eta1_re, eta1_im, eta2_re, eta2_im) = (normal(), normal(), normal(), normal());
        let eta1 = Complex64::new(eta1_re, eta1_im) * std::f64::consts::FRAC_1_SQRT_2;
        let eta2 = Complex64::new(eta2_re, eta2_im) * std::f64::consts::FRAC_1_SQRT_2;
        let root_t = t_total.sqrt();
        let (u, v) = if a > 1e-300 {
            let l11 = a.sqrt();
            let l21 = c.conj() / l11;
            let l22 = (b - c.norm_sqr() / a).max(0.0).sqrt();
            (root_t * l11 * eta1, root_t * (l21 * eta1 + l22 * eta2))
        } else {
            (Complex64::ZERO, root_t * b.sqrt() * eta2)
        };
        zeta[k] = u;
        zeta[n - k] = v.conj();
    }
    for (k, w) in [(0usize, 0.0), (n / 2, band)] {
        let (a, c) = model.lookup(w);
        let var_re = (0.5 * t_total * (a + c.re)).max(0.0);
        let var_im = (0.5 * t_total * (a - c.re)).max(0.0);
        let cov = 0.5 * t_total * c.im;
        let l11 = var_re.sqrt();
        let (l21, l22) = if l11 > 0.0 {
            let l21 = cov / l11;
            (l21, (var_im - l21 * l21).max(0.0).sqrt())
        } else {
            (0.0, var_im.sqrt())
        };
        let (g1, g2) = (normal(), normal());
        zeta[k] = Complex64::new(l11 * g1, l21 * g1 + l22 * g2);
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut zeta);
    let scale = 1.0 / t_total;
    let mut out = zeta;
    for z in &mut out {
        *z *= scale;
    }
    out.truncate(n_out);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Memory kernel
// ---------------------------------------------------------------------------

/// Time-domain admittance kernel split into the pieces the stepper needs:
/// the inductive pole handled exactly, an instantaneous (ohmic) weight, and
/// the sampled regular part.
#[derive(Debug, Clone)]
pub struct MemoryKernel {
    pub dt: f64,
    /// Regular kernel samples K_j at t = j·dt (includes the fitted causal
    /// pole model, excludes the δ and 1/ω parts).
    pub samples: Vec<f64>,
    /// Weight of the δ(t) part (high-frequency admittance plateau), 1/R_J.
    pub instantaneous: f64,
    /// Inductive pole coefficient σ_J: Y ≈ iσ_J/ω at ω → 0; enters the
    /// equation of motion as an extra 1/L.
    pub pole_coefficient: f64,
    /// Kramers-Kronig weight of Re Y above the band, -icω in the transfer
    /// function; enters the equation of motion as extra capacitance.
    pub capacitive_correction: f64,
    pub anticausal_fraction: f64,
    pub imag_fraction: f64,
}

impl MemoryKernel {
    /// Kernel with no memory and no instantaneous friction.
    pub fn free() -> Self {
        MemoryKernel {
            dt: 1.0,
            samples: Vec::new(),
            instantaneous: 0.0,
            pole_coefficient: 0.0,
            capacitive_correction: 0.0,
            anticausal_fraction: 0.0,
            imag_fraction: 0.0,
        }
    }

    /// Purely ohmic kernel Y(ω) = g.
    pub fn ohmic(g: f64, dt: f64) -> Self {
        MemoryKernel {
            dt,
            samples: Vec::new(),
            instantaneous: g,
            pole_coefficient: 0.0,
            capacitive_correction: 0.0,
            anticausal_fraction: 0.0,
            imag_fraction: 0.0,
        }
    }

    /// Transfer function of the discretized kernel, for diagnostics:
    /// should reproduce Y_{J,0}(ω) inside the band.
    pub fn y_effective(&self, omega: f64) -> Complex64 {
        let mut acc =
            Complex64::new(self.instantaneous, -omega * self.capacitive_correction);
        if omega != 0.0 {
            acc += Complex64::new(0.0, self.pole_coefficient / omega);
        }
        let mut conv = Complex64::ZERO;
        for (j, &k) in self.samples.iter().enumerate() {
            let w = if j == 0 || j + 1 == self.samples.len() { 0.5 } else { 1.0 };
            conv += w * k * Complex64::from_polar(1.0, omega * j as f64 * self.dt);
        }
        acc + conv * self.dt
    }
}

/// Build the memory kernel for the frequency-preserving admittance of the
/// driven junction, sampled for time step `dt`.
///
/// A causal real kernel is fully determined by the dissipative part of its
/// transfer function, K(t>0) = (2/π)∫ Re Y(ω) cos(ωt) dω, so the kernel is
/// synthesized from Re Y alone and is causal and real by construction: any
/// sharp band-limited inversion of the full complex Y spills a
/// ~ν/(W²dt) energy fraction into t < 0 purely because a causal kernel
/// jumps at t = 0. The inductive pole iσ_J/ω and the high-frequency ohmic
/// plateau are split off and handled exactly. The Kramers-Kronig
/// consistency that an anticausal-energy check would probe is enforced
/// instead by comparing the kernel's reconstructed Im Y against the
/// junction's Im Y inside the band; a mismatch raises `KernelNotCausal`.
pub fn admittance_kernel(
    table: &PolarizationTable,
    d: &DriveParams,
    dt: f64,
    tail_rel: f64,
) -> Result<MemoryKernel> {
    admittance_kernel_with_span(table, d, dt, tail_rel, f64::INFINITY)
}

/// As `admittance_kernel`, but with the history window capped at
/// `max_span` time units. With a vanishing Dynes rate the kernel decays
/// only algebraically until the ν_min cutoff at ~1e6, so an explicit cap
/// keeps the convolution affordable; the discarded weight is visible as
/// the last retained sample relative to the peak.
pub fn admittance_kernel_with_span(
    table: &PolarizationTable,
    d: &DriveParams,
    dt: f64,
    tail_rel: f64,
    max_span: f64,
) -> Result<MemoryKernel> {
    let kernel = build_kernel_inner(table, d, dt, tail_rel, max_span)?;
    // in-band consistency: the reconstructed reactive response must agree
    // with the junction's, otherwise Re Y and Im Y were not a causal pair
    let ctx = DriveContext::new(table, *d)?;
    let band = std::f64::consts::PI / dt;
    let mut worst = 0.0f64;
    for frac in [0.05, 0.1, 0.2, 0.4, 0.7] {
        let w = frac * band;
        let y = ctx.admittance(0, w)?;
        let y_eff = kernel.y_effective(w);
        worst = worst.max((y - y_eff).norm() / y.norm().max(0.05));
    }
    if worst > 0.05 {
        return Err(Error::KernelNotCausal { fraction: worst });
    }
    Ok(kernel)
}

fn build_kernel_inner(
    table: &PolarizationTable,
    d: &DriveParams,
    dt: f64,
    tail_rel: f64,
    max_span: f64,
) -> Result<MemoryKernel> {
    let ctx = DriveContext::new(table, *d)?;
    let sigma = ctx.inductive_pole_coeff();
    let band = std::f64::consts::PI / dt;

    // span long enough for the Dynes-limited decay to reach the tail cut
    let nu_bar = table.params().left.effective_dynes() + table.params().right.effective_dynes();
    let t_span = (-(tail_rel.ln()) / nu_bar).clamp(500.0, 2.0e5).min(max_span.max(64.0 * dt));
    let mut n = ((2.2 * t_span / dt) as usize).next_power_of_two();
    if n < 1024 {
        n = 1024;
    }
    let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * dt);

    // dissipative part on the positive half-band
    let mut re_y = vec![0.0f64; n / 2 + 1];
    for (k, slot) in re_y.iter_mut().enumerate() {
        let w = if k == 0 { 1e-4 } else { k as f64 * d_omega };
        *slot = ctx.admittance(0, w)?.re;
    }

    // ohmic plateau from the band edge
    let edge_lo = (0.92 * n as f64 / 2.0) as usize;
    let y_c = re_y[edge_lo..].iter().sum::<f64>() / (n / 2 + 1 - edge_lo) as f64;

    // even real spectrum -> even real kernel; the causal kernel is twice
    // its t > 0 half
    let mut spec = vec![Complex64::ZERO; n];
    for k in 0..=n / 2 {
        let r = re_y[k] - y_c;
        spec[k] = Complex64::new(r, 0.0);
        if k > 0 && k < n / 2 {
            spec[n - k] = Complex64::new(r, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);
    let scale = 2.0 / (n as f64 * dt);
    let peak_abs = spec.iter().take(n / 2).map(|z| z.norm()).fold(0.0f64, f64::max) * scale.abs();
    let imag_fraction = if peak_abs > 0.0 {
        spec.iter().take(n / 2).map(|z| z.im.abs()).fold(0.0f64, f64::max) * scale / peak_abs
    } else {
        0.0
    };

    // Re Y above the band still shapes the in-band reactive response:
    // Im Y gains -(2ω/π)∫_W^∞ (Re Y - Y_c)/ω'² dω', i.e. a capacitance.
    let n_span = ctx.n_max as f64 * d.drive_freq.max(0.0);
    let w2 = (table.omega_max() - n_span - 1e-9).min(12.0 * band);
    let mut cap = 0.0;
    if w2 > band {
        let steps = 160;
        let h = (w2 - band) / steps as f64;
        let mut prev = (ctx.admittance(0, band)?.re - y_c) / (band * band);
        for i in 1..=steps {
            let w = band + h * i as f64;
            let cur = (ctx.admittance(0, w)?.re - y_c) / (w * w);
            cap += 0.5 * (prev + cur) * h;
            prev = cur;
        }
    }
    // reduced normal-state asymptote Re Y(∞) = 1
    cap += (1.0 - y_c) / w2.max(band);
    cap *= 2.0 / std::f64::consts::PI;

    let mut samples: Vec<f64> = spec[..n / 2].iter().map(|z| z.re * scale).collect();
    let peak = samples.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    let keep = samples
        .iter()
        .rposition(|x| x.abs() >= tail_rel * peak)
        .map(|i| i + 1)
        .unwrap_or(1);
    samples.truncate(keep.max(2));

    // Euler-Maclaurin endpoint term of the trapezoidal half-line transform:
    // the sine sum picks up -(dt²/12)·ω·K(0), one more capacitive piece.
    cap += -dt * dt * samples[0] / 12.0;

    Ok(MemoryKernel {
        dt,
        samples,
        instantaneous: y_c,
        pole_coefficient: sigma,
        capacitive_correction: cap,
        anticausal_fraction: 0.0,
        imag_fraction,
    })
}

/// Debug entry that skips the in-band fidelity gate.
#[doc(hidden)]
pub fn admittance_kernel_unchecked_debug(
    table: &PolarizationTable,
    d: &DriveParams,
    dt: f64,
    tail_rel: f64,
) -> Result<MemoryKernel> {
    build_kernel_inner(table, d, dt, tail_rel, f64::INFINITY)
}

// ---------------------------------------------------------------------------
// Langevin integration
// ---------------------------------------------------------------------------

/// Unrolled dot product; the kernel convolution dominates the step cost.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

/// One stochastic trajectory of the resonator flux (flux, flux-velocity).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<(f64, f64)>,
    pub seed: u64,
}

/// Linear-circuit parameters of the simulation, reduced units.
#[derive(Debug, Clone, Copy)]
pub struct LangevinConfig {
    pub capacitance: f64,
    pub inductance: f64,
    pub duration: f64,
    pub dt: f64,
}

/// Integrate the memory-kernel Langevin equation driven by the complex
/// junction noise. Strang split: implicit friction half-kick, exact
/// conservative rotation, half-kick. The stability bound dt < 0.1/ω_r is
/// asserted.
pub fn simulate(
    cfg: &LangevinConfig,
    kernel: &MemoryKernel,
    drive: &DriveParams,
    noise: &[Complex64],
    init: (f64, f64),
    seed: u64,
) -> Result<Trajectory> {
    assert!((kernel.dt - cfg.dt).abs() < 1e-12 || kernel.samples.is_empty());
    let dt = cfg.dt;
    let c = cfg.capacitance + kernel.capacitive_correction;
    let inv_l_eff = 1.0 / cfg.inductance + kernel.pole_coefficient;
    assert!(inv_l_eff > 0.0, "negative effective inductance: unstable bias point");
    let omega0 = (inv_l_eff / c).sqrt();
    assert!(omega0 * dt < 0.1, "time step too coarse for ω₀ = {omega0}");
    let n_steps = (cfg.duration / dt).round() as usize;
    if noise.len() < n_steps + 1 {
        return Err(Error::Validation(vec![format!(
            "noise series has {} samples, need {}",
            noise.len(),
            n_steps + 1
        )]));
    }

    // trapezoid weights, with the j = 0 self term kept implicit
    let m = kernel.samples.len();
    let mut weights = vec![0.0f64; m];
    for j in 1..m {
        let w = if j + 1 == m { 0.5 } else { 1.0 };
        weights[j] = w * kernel.samples[j] * dt;
    }
    let k0_half = if m > 0 { 0.5 * kernel.samples[0] * dt } else { 0.0 };

    let (rot_c, rot_s) = ((omega0 * dt).cos(), (omega0 * dt).sin());
    let half = 0.5 * dt / c;
    let denom = 1.0 + half * (kernel.instantaneous + k0_half);

    // past velocities stored twice, so the lag window is one contiguous
    // ascending slice and the convolution is a plain dot product
    let lags = m.saturating_sub(1).max(1);
    let mut hist2 = vec![0.0f64; 2 * lags];
    let mut head = 0usize;
    let weights_fwd: Vec<f64> = (1..m).map(|j| weights[j]).collect();
    let mut phi = init.0;
    let mut v = init.1;
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push((phi, v));

    let drive_force = |i: usize| -> f64 {
        let t = i as f64 * dt;
        let phase = Complex64::from_polar(1.0, -0.5 * drive.phase(t));
        0.5 * (noise[i] * phase).im
    };

    // memory force carried across the step boundary: the convolution with
    // lag-1 at v(t_i) serves as both the end force of step i and the start
    // force of step i+1, so each step costs one kernel dot product
    let mut mem_cur = 0.0f64;
    for i in 0..n_steps {
        head = (head + lags - 1) % lags;
        hist2[head] = v; // v(t_i) at lag 1 for the upcoming boundary
        hist2[head + lags] = v;
        let mem_next = if m > 1 { dot(&hist2[head..head + lags], &weights_fwd) } else { 0.0 };
        // half-kick at t_i (implicit in v through Y_c and the K₀ self term)
        v = (v + half * (-drive_force(i) - mem_cur)) / denom;
        // exact rotation of (φ, v/ω₀)
        let p = v / omega0;
        let (phi_new, p_new) = (rot_c * phi + rot_s * p, -rot_s * phi + rot_c * p);
        phi = phi_new;
        v = p_new * omega0;
        // half-kick at t_{i+1}
        v = (v + half * (-drive_force(i + 1) - mem_next)) / denom;
        mem_cur = mem_next;
        samples.push((phi, v));
        if !phi.is_finite() || phi.abs() > 1e12 {
            return Err(Error::UnstableStep { step: i });
        }
    }
    Ok(Trajectory { dt, samples, seed })
}

// ---------------------------------------------------------------------------
// Spectral estimation
// ---------------------------------------------------------------------------

/// Ensemble estimate of G^K_{r,0}(ω) with jackknife error bars.
#[derive(Debug, Clone)]
pub struct KeldyshEstimate {
    pub omega: Vec<f64>,
    pub g_kel: Vec<Complex64>,
    /// jackknife standard error on Im G^K per bin
    pub sigma: Vec<f64>,
    pub resolution: f64,
    pub segment_len: usize,
    pub trajectories: usize,
}

/// Periodogram of one stationary segment with a Hann window; returns the
/// PSD on bins k = 0..len/2.
fn hann_psd(flux: &[f64], dt: f64) -> Vec<f64> {
    let l = if flux.len().is_power_of_two() {
        flux.len()
    } else {
        flux.len().next_power_of_two() / 2
    };
    let seg = &flux[flux.len() - l..];
    let mut buf: Vec<Complex64> = Vec::with_capacity(l);
    let mut wsum = 0.0;
    for (j, &x) in seg.iter().enumerate() {
        let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / (l - 1) as f64).cos());
        wsum += w * w;
        buf.push(Complex64::new(x * w, 0.0));
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(l).process(&mut buf);
    let norm = dt / wsum;
    buf.iter().take(l / 2 + 1).map(|z| z.norm_sqr() * norm).collect()
}

/// Estimate the harmonic-0 Keldysh component from an ensemble of
/// trajectories: G^K(ω) = -i S_φ(ω) with S_φ the period-averaged flux PSD.
pub fn estimate_keldysh(
    trajectories: &[Trajectory],
    discard_time: f64,
    max_omega: f64,
) -> Result<KeldyshEstimate> {
    if trajectories.len() < 100 {
        return Err(Error::InsufficientStatistics { needed: 100, got: trajectories.len() });
    }
    let dt = trajectories[0].dt;
    let spectra: Vec<Vec<f64>> = trajectories
        .par_iter()
        .map(|t| {
            let skip = ((discard_time / dt) as usize).min(t.samples.len() / 2);
            let flux: Vec<f64> = t.samples[skip..].iter().map(|s| s.0).collect();
            hann_psd(&flux, dt)
        })
        .collect();
    accumulate_estimate(&spectra, dt, max_omega, trajectories.len())
}

pub(crate) fn accumulate_estimate(
    spectra: &[Vec<f64>],
    dt: f64,
    max_omega: f64,
    m: usize,
) -> Result<KeldyshEstimate> {
    let bins = spectra.iter().map(|s| s.len()).min().unwrap();
    let seg_len = (bins - 1) * 2;
    let d_omega = 2.0 * std::f64::consts::PI / (seg_len as f64 * dt);
    let keep = ((max_omega / d_omega).ceil() as usize + 1).min(bins);
    let mut sum = vec![0.0f64; keep];
    let mut sumsq = vec![0.0f64; keep];
    for s in spectra {
        for k in 0..keep {
            sum[k] += s[k];
            sumsq[k] += s[k] * s[k];
        }
    }
    let mf = m as f64;
    let mut omega = Vec::with_capacity(keep);
    let mut g_kel = Vec::with_capacity(keep);
    let mut sigma = Vec::with_capacity(keep);
    for k in 0..keep {
        let mean = sum[k] / mf;
        let var = (sumsq[k] / mf - mean * mean).max(0.0);
        omega.push(k as f64 * d_omega);
        g_kel.push(Complex64::new(0.0, -mean));
        sigma.push((var / (mf - 1.0)).sqrt());
    }
    Ok(KeldyshEstimate {
        omega,
        g_kel,
        sigma,
        resolution: d_omega,
        segment_len: seg_len,
        trajectories: m,
    })
}

/// Expected periodogram of a true spectrum: convolution with the squared
/// Hann window kernel. Needed for unbiased comparisons of the estimate at
/// a resolution comparable to the linewidth.
pub fn window_smear(
    theory: &dyn Fn(f64) -> f64,
    omega: f64,
    segment_len: usize,
    dt: f64,
) -> f64 {
    // |W(ν)|² for the Hann window, sampled at sub-bin resolution
    let l = segment_len;
    let pad = 8;
    let n = (l * pad).next_power_of_two();
    let mut buf = vec![Complex64::ZERO; n];
    for j in 0..l {
        let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / (l - 1) as f64).cos());
        buf[j] = Complex64::new(w, 0.0);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let d_nu = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    // the Hann kernel is concentrated within a few resolution bins; cap the
    // sum so the theory is never probed far outside the peak region
    let reach = (64 * pad).min(n / 2);
    let mut norm = 0.0;
    let mut acc = 0.0;
    for k in 0..n {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        if kk.abs() > reach as f64 {
            continue;
        }
        let nu = kk * d_nu;
        let w2 = buf[k].norm_sqr();
        norm += w2;
        acc += w2 * theory(omega - nu).max(0.0);
    }
    acc / norm
}

// ---------------------------------------------------------------------------
// Ensemble driver
// ---------------------------------------------------------------------------

/// Ensemble settings for the Monte Carlo cross-check.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleSpec {
    pub trajectories: usize,
    pub duration: f64,
    pub discard_time: f64,
    pub dt: f64,
    pub seed: u64,
    pub max_omega: f64,
    /// standard deviations for the warm-start draw of (φ, v)
    pub init_sigma: (f64, f64),
}

/// Run independent trajectories (one seed each), estimate G^K_{r,0} with
/// jackknife errors. Trajectories are simulated in parallel and reduced in
/// seed order, so the result is reproducible for a fixed spec.
pub fn ensemble_keldysh(
    cfg: &LangevinConfig,
    kernel: &MemoryKernel,
    drive: &DriveParams,
    model: &NoiseSpectralModel,
    spec: &EnsembleSpec,
) -> Result<KeldyshEstimate> {
    let spectra: Result<Vec<Vec<f64>>> = (0..spec.trajectories)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed.wrapping_add(i as u64).wrapping_mul(0x9E3779B97F4A7C15) ^ 0x5bf0_3635;
            let noise = synthesize_noise(model, cfg.duration, cfg.dt, seed)?;
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xdead_beef);
            let g1: f64 = StandardNormal.sample(&mut rng);
            let g2: f64 = StandardNormal.sample(&mut rng);
            let init = (spec.init_sigma.0 * g1, spec.init_sigma.1 * g2);
            let traj = simulate(cfg, kernel, drive, &noise, init, seed)?;
            let skip = ((spec.discard_time / cfg.dt) as usize).min(traj.samples.len() / 2);
            let flux: Vec<f64> = traj.samples[skip..].iter().map(|s| s.0).collect();
            Ok(hann_psd(&flux, cfg.dt))
        })
        .collect();
    accumulate_estimate(&spectra?, cfg.dt, spec.max_omega, spec.trajectories)
}
