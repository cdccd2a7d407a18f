//! Polarization operators of the tunnel junction.
//!
//! The retarded components are frequency-domain convolutions of the lead
//! Green's functions,
//!
//! ```text
//! Π_n^R(ω) = -i ∫ [ g_l^R(ω') g_r^K(ω'-ω) + g_l^K(ω') g_r^A(ω'-ω) ] dω'
//! Π_s^R(ω) = same with f in place of g
//! ```
//!
//! in units of Δ_Σ/(ħ R_J) with the 1/R_J prefactor absorbed. The Keldysh
//! components are evaluated either directly or through the
//! fluctuation-dissipation relation Π^K = (Π^R - Π^A) coth(ω/2k_BT).
//!
//! The direct Keldysh convolution is computed in the equivalent form
//! (g_l^R - g_l^A)(g_r^R - g_r^A)[h_l h_r - 1]: the g^R g^R and g^A g^A
//! products that complete this rewriting integrate to zero by closing the
//! contour in one half-plane, and the combined integrand decays
//! exponentially instead of approaching a constant, which the written-out
//! sum of g^R g^A + g^A g^R + g^K g^K does not.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::material::{coth_safe, LeadParams};
use crate::quadrature::{integrate_real_line, QuadSettings};

/// Integration cutoff for the convolution variable, in Δ_Σ/ħ. Beyond it the
/// tails are folded in by the 1/ω substitution.
const OMEGA_PRIME_CUTOFF: f64 = 40.0;

/// Junction: two leads and the normal-state tunnel resistance. Reduced gaps
/// must sum to one, i.e. energies are measured in Δ_Σ = Δ_l + Δ_r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    pub left: LeadParams,
    pub right: LeadParams,
    /// R_J in ohms; only unit conversions at the boundary use it.
    pub tunnel_resistance: f64,
}

/// All four tabulated components at one frequency, units Δ_Σ/(ħ R_J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationValue {
    pub pi_n_ret: Complex64,
    pub pi_s_ret: Complex64,
    pub pi_n_kel: Complex64,
    pub pi_s_kel: Complex64,
}

/// Selector for the shorthand combinations built from the retarded table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Normal,
    Anomalous,
}

impl JunctionParams {
    pub fn new(left: LeadParams, right: LeadParams, tunnel_resistance: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(tunnel_resistance > 0.0) {
            problems.push(format!("tunnel resistance must be positive, got {tunnel_resistance}"));
        }
        if (left.gap + right.gap - 1.0).abs() > 1e-9 {
            problems.push(format!(
                "reduced gaps must sum to one (energy unit is the summed gap), got {} + {}",
                left.gap, right.gap
            ));
        }
        if problems.is_empty() {
            Ok(JunctionParams { left, right, tunnel_resistance })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Symmetric junction at a common temperature, gaps 0.5 each.
    pub fn symmetric(dynes_rate: f64, temperature: f64, tunnel_resistance: f64) -> Result<Self> {
        let lead = LeadParams::new(0.5, dynes_rate, temperature)?;
        JunctionParams::new(lead, lead, tunnel_resistance)
    }

    fn breakpoints(&self, omega: f64) -> Vec<f64> {
        let dl = self.left.gap;
        let dr = self.right.gap;
        vec![
            -dl, dl, -dr, dr,
            omega - dl, omega + dl, omega - dr, omega + dr,
        ]
    }

    /// Retarded polarization components (Π_n^R, Π_s^R) at reduced ω.
    pub fn pi_retarded(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        self.pi_retarded_with(omega, &QuadSettings::default())
    }

    pub fn pi_retarded_with(
        &self,
        omega: f64,
        settings: &QuadSettings,
    ) -> Result<(Complex64, Complex64)> {
        let l = self.left;
        let r = self.right;
        let f = move |wp: f64| -> [Complex64; 2] {
            let gl = l.green_retarded(wp);
            let gr = r.green_retarded(wp - omega);
            let hl = l.thermal_sign(wp);
            let hr = r.thermal_sign(wp - omega);
            let gr_a = gr.g.conj();
            let fr_a = gr.f.conj();
            let gl_k = (gl.g - gl.g.conj()) * hl;
            let fl_k = (gl.f - gl.f.conj()) * hl;
            let gr_k = (gr.g - gr_a) * hr;
            let fr_k = (gr.f - fr_a) * hr;
            [gl.g * gr_k + gl_k * gr_a, gl.f * fr_k + fl_k * fr_a]
        };
        let v = integrate_real_line(&f, &self.breakpoints(omega), OMEGA_PRIME_CUTOFF, settings)?;
        let mi = Complex64::new(0.0, -1.0);
        Ok((mi * v[0], mi * v[1]))
    }

    /// Keldysh components by direct quadrature of the convolution; valid for
    /// unequal lead temperatures as well.
    pub fn pi_keldysh_direct(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        self.pi_keldysh_direct_with(omega, &QuadSettings::default())
    }

    pub fn pi_keldysh_direct_with(
        &self,
        omega: f64,
        settings: &QuadSettings,
    ) -> Result<(Complex64, Complex64)> {
        let l = self.left;
        let r = self.right;
        let f = move |wp: f64| -> [Complex64; 2] {
            let gl = l.green_retarded(wp);
            let gr = r.green_retarded(wp - omega);
            let occupation_factor = l.thermal_sign(wp) * r.thermal_sign(wp - omega) - 1.0;
            let dg_l = gl.g - gl.g.conj();
            let df_l = gl.f - gl.f.conj();
            let dg_r = gr.g - gr.g.conj();
            let df_r = gr.f - gr.f.conj();
            [dg_l * dg_r * occupation_factor, df_l * df_r * occupation_factor]
        };
        let v = integrate_real_line(&f, &self.breakpoints(omega), OMEGA_PRIME_CUTOFF, settings)?;
        let mi = Complex64::new(0.0, -1.0);
        Ok((mi * v[0], mi * v[1]))
    }

    /// Keldysh components through the fluctuation-dissipation theorem.
    /// Requires both leads at the same temperature.
    pub fn pi_keldysh_fdt(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        self.pi_keldysh_fdt_with(omega, &QuadSettings::default())
    }

    pub fn pi_keldysh_fdt_with(
        &self,
        omega: f64,
        settings: &QuadSettings,
    ) -> Result<(Complex64, Complex64)> {
        if (self.left.temperature - self.right.temperature).abs() > 1e-12 {
            return Err(Error::TemperatureMismatch);
        }
        let t = self.left.temperature;
        // Im Π^R vanishes identically at ω = 0 while coth diverges; evaluate
        // the product just off zero where it is regular.
        let w = if omega == 0.0 { 1e-9 } else { omega };
        let (pn, ps) = self.pi_retarded_with(w, settings)?;
        let factor = if t == 0.0 {
            if w == 0.0 { 0.0 } else { w.signum() }
        } else {
            coth_safe(w / (2.0 * t))
        };
        let two_i = Complex64::new(0.0, 2.0);
        Ok((two_i * pn.im * factor, two_i * ps.im * factor))
    }
}

/// Node layout for a polarization table: a uniform base grid plus geometric
/// clusters around every branch-point frequency.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub omega_max: f64,
    pub base_points: usize,
    /// Half-width of the refined window around each singular frequency.
    pub cluster_halfwidth: f64,
    /// Number of geometric halvings inside each window.
    pub cluster_levels: u32,
}

impl GridSpec {
    pub fn new(omega_max: f64, base_points: usize) -> Self {
        GridSpec { omega_max, base_points, cluster_halfwidth: 0.06, cluster_levels: 18 }
    }
}

/// Tabulated polarization operators with linear interpolation between nodes.
///
/// For equal-temperature junctions only the retarded components are stored;
/// the Keldysh components are produced at lookup time as
/// 2i·Im Π^R(ω)·coth(ω/2k_BT), which keeps the fluctuation-dissipation
/// identity exact at every interpolated frequency, not just at the nodes.
#[derive(Debug, Clone)]
pub struct PolarizationTable {
    grid: Vec<f64>,
    ret_values: Vec<(Complex64, Complex64)>,
    /// Direct-quadrature Keldysh values; `None` selects the FDT form.
    kel_values: Option<Vec<(Complex64, Complex64)>>,
    params: JunctionParams,
    settings: QuadSettings,
    quad_hash: u64,
}

/// Singular frequencies of the retarded components: pair breaking at
/// ±(Δ_l + Δ_r) and thermal-quasiparticle features at ±(Δ_l - Δ_r).
pub fn singular_frequencies(j: &JunctionParams) -> Vec<f64> {
    let sum = j.left.gap + j.right.gap;
    let diff = j.left.gap - j.right.gap;
    let mut s = vec![sum, -sum];
    s.push(diff);
    s.push(-diff);
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    s
}

pub fn build_grid(j: &JunctionParams, spec: &GridSpec) -> Vec<f64> {
    let mut grid = Vec::with_capacity(spec.base_points + 200);
    let n = spec.base_points.max(2);
    for i in 0..n {
        grid.push(-spec.omega_max + 2.0 * spec.omega_max * i as f64 / (n - 1) as f64);
    }
    for s in singular_frequencies(j) {
        grid.push(s);
        let mut w = spec.cluster_halfwidth;
        for _ in 0..spec.cluster_levels {
            grid.push(s - w);
            grid.push(s + w);
            w *= 0.5;
        }
    }
    grid.retain(|w| w.abs() <= spec.omega_max + 1e-12);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

/// Build a table over the requested grid. Nodes are independent and are
/// computed in parallel; Keldysh components use the FDT shortcut when the
/// leads share a temperature and the direct convolution otherwise.
pub fn build_table(j: &JunctionParams, spec: &GridSpec) -> Result<PolarizationTable> {
    build_table_with(j, spec, &QuadSettings::default())
}

pub fn build_table_with(
    j: &JunctionParams,
    spec: &GridSpec,
    settings: &QuadSettings,
) -> Result<PolarizationTable> {
    let grid = build_grid(j, spec);
    let equal_t = (j.left.temperature - j.right.temperature).abs() <= 1e-12;
    let ret_values: Result<Vec<(Complex64, Complex64)>> =
        grid.par_iter().map(|&w| j.pi_retarded_with(w, settings)).collect();
    let ret_values = ret_values?;
    let kel_values = if equal_t {
        None
    } else {
        let v: Result<Vec<(Complex64, Complex64)>> =
            grid.par_iter().map(|&w| j.pi_keldysh_direct_with(w, settings)).collect();
        Some(v?)
    };
    let quad_hash = hash_settings(j, spec, settings);
    Ok(PolarizationTable { grid, ret_values, kel_values, params: *j, settings: *settings, quad_hash })
}

fn hash_settings(j: &JunctionParams, spec: &GridSpec, s: &QuadSettings) -> u64 {
    // FNV-1a over the numbers that determine the table contents.
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |x: f64| {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(j.left.gap);
    eat(j.left.dynes_rate);
    eat(j.left.temperature);
    eat(j.right.gap);
    eat(j.right.dynes_rate);
    eat(j.right.temperature);
    eat(j.tunnel_resistance);
    eat(spec.omega_max);
    eat(spec.base_points as f64);
    eat(spec.cluster_halfwidth);
    eat(spec.cluster_levels as f64);
    eat(s.rel_tol);
    eat(s.max_panels as f64);
    h
}

impl PolarizationTable {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn params(&self) -> &JunctionParams {
        &self.params
    }

    pub fn quad_hash(&self) -> u64 {
        self.quad_hash
    }

    pub fn omega_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn omega_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn covers(&self, omega: f64) -> bool {
        omega >= self.omega_min() && omega <= self.omega_max()
    }

    fn range_err(&self, omega: f64) -> Error {
        Error::OutOfTableRange { omega, min: self.omega_min(), max: self.omega_max() }
    }

    /// Linear interpolation of all four components.
    pub fn value(&self, omega: f64) -> Result<PolarizationValue> {
        if !self.covers(omega) {
            return Err(self.range_err(omega));
        }
        let (pi_n_ret, pi_s_ret, kel_direct) =
            match self.grid.binary_search_by(|x| x.total_cmp(&omega)) {
                Ok(i) => (
                    self.ret_values[i].0,
                    self.ret_values[i].1,
                    self.kel_values.as_ref().map(|k| k[i]),
                ),
                Err(idx) => {
                    let (i0, i1) = (idx - 1, idx);
                    let t = (omega - self.grid[i0]) / (self.grid[i1] - self.grid[i0]);
                    let lerp = |x: Complex64, y: Complex64| x + (y - x) * t;
                    let a = &self.ret_values[i0];
                    let b = &self.ret_values[i1];
                    let kel = self
                        .kel_values
                        .as_ref()
                        .map(|k| (lerp(k[i0].0, k[i1].0), lerp(k[i0].1, k[i1].1)));
                    (lerp(a.0, b.0), lerp(a.1, b.1), kel)
                }
            };
        let (pi_n_kel, pi_s_kel) = match kel_direct {
            Some(k) => k,
            None => {
                let t = self.params.left.temperature;
                let factor = if t == 0.0 {
                    if omega == 0.0 { 0.0 } else { omega.signum() }
                } else if omega == 0.0 {
                    0.0
                } else {
                    coth_safe(omega / (2.0 * t))
                };
                let two_i = Complex64::new(0.0, 2.0);
                (two_i * pi_n_ret.im * factor, two_i * pi_s_ret.im * factor)
            }
        };
        Ok(PolarizationValue { pi_n_ret, pi_s_ret, pi_n_kel, pi_s_kel })
    }

    pub fn pi_n_ret(&self, omega: f64) -> Result<Complex64> {
        Ok(self.value(omega)?.pi_n_ret)
    }

    pub fn pi_s_ret(&self, omega: f64) -> Result<Complex64> {
        Ok(self.value(omega)?.pi_s_ret)
    }

    pub fn pi_n_kel(&self, omega: f64) -> Result<Complex64> {
        Ok(self.value(omega)?.pi_n_kel)
    }

    pub fn pi_s_kel(&self, omega: f64) -> Result<Complex64> {
        Ok(self.value(omega)?.pi_s_kel)
    }

    /// Shorthand combinations entering every admittance formula:
    /// Π̃_n(ω, ω') = [Π_n^R(ω+ω') - Π_n^R(ω')]/4,
    /// Π̃_s(ω, ω') = [Π_s^R(ω+ω') + Π_s^R(ω')]/4.
    pub fn pi_tilde(&self, omega: f64, omega_prime: f64, kind: Component) -> Result<Complex64> {
        let shifted = self.value(omega + omega_prime)?;
        let base = self.value(omega_prime)?;
        Ok(match kind {
            Component::Normal => (shifted.pi_n_ret - base.pi_n_ret) * 0.25,
            Component::Anomalous => (shifted.pi_s_ret + base.pi_s_ret) * 0.25,
        })
    }
}

/// Kramers-Kronig self-check: reconstruct Re Π^R from Im Π^R with a
/// twice-subtracted principal-value transform (Im Π_n grows linearly, so two
/// subtractions anchored at ω = 0 are needed) and a linear model for the
/// tail beyond the table. Returns max |Re - reconstruction| / max |Re| over
/// the interior of the grid, for the worse of the two components.
pub fn kramers_kronig_residual(table: &PolarizationTable) -> f64 {
    let pick_n = |v: &PolarizationValue| v.pi_n_ret;
    let pick_s = |v: &PolarizationValue| v.pi_s_ret;
    let rn = kk_residual_component(table, &pick_n);
    let rs = kk_residual_component(table, &pick_s);
    rn.max(rs)
}

fn kk_residual_component(
    table: &PolarizationTable,
    pick: &dyn Fn(&PolarizationValue) -> Complex64,
) -> f64 {
    let grid = &table.grid;
    let n = grid.len();
    let m = table.omega_max().min(-table.omega_min());
    let node_vals: Vec<Complex64> = grid
        .iter()
        .map(|&w| pick(&table.value(w).expect("node within range")))
        .collect();
    let im: Vec<f64> = node_vals.iter().map(|v| v.im).collect();
    let re: Vec<f64> = node_vals.iter().map(|v| v.re).collect();

    // Linear tail model Im Π ≈ αω + β sgn(ω), fitted on the outer 20%.
    let (mut s_ww, mut s_wy, mut s_sy, mut s_ws, mut s_ss) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        if grid[i].abs() >= 0.8 * m {
            let w = grid[i];
            let s = w.signum();
            s_ww += w * w;
            s_ws += w * s;
            s_ss += 1.0;
            s_wy += w * im[i];
            s_sy += s * im[i];
        }
    }
    let det = s_ww * s_ss - s_ws * s_ws;
    let (alpha, beta) = if det.abs() > 1e-12 {
        ((s_wy * s_ss - s_sy * s_ws) / det, (s_sy * s_ww - s_wy * s_ws) / det)
    } else {
        (0.0, 0.0)
    };

    // Values at the anchor ω = 0.
    let re0 = interp_on(grid, &re, 0.0);
    let re_slope0 = {
        let h = 1e-3 * m;
        (interp_on(grid, &re, h) - interp_on(grid, &re, -h)) / (2.0 * h)
    };

    // positive-half nodes for the piecewise-linear transform
    let first_pos = grid.iter().position(|&g| g > 0.0).unwrap_or(n);
    let pos_w = &grid[first_pos..];
    let pos_im = &im[first_pos..];

    // Reconstruct on the positive half; Re Π is even by the reality relation.
    // Twice subtracted (Im Π_n grows linearly):
    // Re Π_rec(ω) = Re Π(0) + ω Re Π'(0)
    //             + (ω²/π) P∫_0^M 2 Im Π(ω')/(ω'(ω'²-ω²)) dω' + tail,
    // with the kernel split by partial fractions,
    //   2/(ω'(ω'²-ω²)) = (1/ω²)[-2/ω' + 1/(ω'-ω) + 1/(ω'+ω)],
    // and each segment integrated exactly for linear Im Π, which keeps the
    // reconstruction faithful across the logarithmic branch points.
    let mut worst = 0.0f64;
    let mut re_scale = 0.0f64;
    for j_idx in 0..n {
        let w = grid[j_idx];
        if w < 0.05 * m || w > 0.7 * m {
            continue;
        }
        re_scale = re_scale.max(re[j_idx].abs());

        let mut acc = 0.0;
        // segment (0, first node]: Im passes through zero at ω' = 0
        if !pos_w.is_empty() && pos_w[0] > 0.0 {
            let (w1, y1) = (pos_w[0], pos_im[0]);
            let b = y1 / w1; // linear through the origin
            acc += -2.0 * b * w1;
            acc += seg_linear_pv(0.0, w1, 0.0, y1, w); // 1/(ω'-ω)
            acc += seg_linear_shift(0.0, w1, 0.0, y1, w); // 1/(ω'+ω)
        }
        for i in 1..pos_w.len() {
            let (w1, w2) = (pos_w[i - 1], pos_w[i]);
            let (y1, y2) = (pos_im[i - 1], pos_im[i]);
            if w2 <= w1 {
                continue;
            }
            // -2/ω' piece, exact for linear y
            let b = (y2 - y1) / (w2 - w1);
            let a = y1 - b * w1;
            acc += -2.0 * (a * (w2 / w1).ln() + b * (w2 - w1));
            acc += seg_linear_pv(w1, w2, y1, y2, w);
            acc += seg_linear_shift(w1, w2, y1, y2, w);
        }

        // tail of the linear model beyond M:
        // ∫_M^∞ 2(αω'+β)/(ω'(ω'²-ω²)) dω', scaled below by ω²/π
        let tail_alpha = -(alpha * w) * ((m - w) / (m + w)).ln();
        let tail_beta = -beta * (1.0 - (w * w) / (m * m)).ln();
        let rec = re0
            + w * re_slope0
            + (acc + tail_alpha + tail_beta) / std::f64::consts::PI;
        worst = worst.max((re[j_idx] - rec).abs());
    }
    if re_scale == 0.0 {
        return 0.0;
    }
    worst / re_scale
}

/// Exact P∫ of a linear interpolant against 1/(ω'-ω) over one segment.
fn seg_linear_pv(w1: f64, w2: f64, y1: f64, y2: f64, w: f64) -> f64 {
    let b = (y2 - y1) / (w2 - w1);
    let yw = y1 + b * (w - w1); // interpolant evaluated at the pole
    let log = ((w2 - w).abs().max(f64::MIN_POSITIVE) / (w1 - w).abs().max(f64::MIN_POSITIVE)).ln();
    b * (w2 - w1) + yw * log
}

/// ∫ of a linear interpolant against 1/(ω'+ω) over one segment (regular).
fn seg_linear_shift(w1: f64, w2: f64, y1: f64, y2: f64, w: f64) -> f64 {
    let b = (y2 - y1) / (w2 - w1);
    let ym = y1 + b * (-w - w1); // interpolant continued to ω' = -ω
    let log = ((w2 + w) / (w1 + w)).ln();
    b * (w2 - w1) + ym * log
}

fn interp_on(grid: &[f64], y: &[f64], x: f64) -> f64 {
    let idx = match grid.binary_search_by(|g| g.total_cmp(&x)) {
        Ok(i) => return y[i],
        Err(i) => i.clamp(1, grid.len() - 1),
    };
    let t = (x - grid[idx - 1]) / (grid[idx] - grid[idx - 1]);
    y[idx - 1] + (y[idx] - y[idx - 1]) * t
}

// ---------------------------------------------------------------------------
// CSV export / import
// ---------------------------------------------------------------------------

impl PolarizationTable {
    /// Header records the junction parameters and the quadrature hash so a
    /// reloaded table can be traced to its origin.
    pub fn export_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        let j = &self.params;
        writeln!(w, "# qpj polarization table v1")?;
        writeln!(
            w,
            "# junction: gap_l={:.12e} gap_r={:.12e} nu_l={:.12e} nu_r={:.12e} temp_l={:.12e} temp_r={:.12e} r_j_ohm={:.12e}",
            j.left.gap, j.right.gap, j.left.dynes_rate, j.right.dynes_rate,
            j.left.temperature, j.right.temperature, j.tunnel_resistance
        )?;
        writeln!(
            w,
            "# quadrature: rel_tol={:.3e} max_panels={} hash={:#018x}",
            self.settings.rel_tol, self.settings.max_panels, self.quad_hash
        )?;
        writeln!(
            w,
            "omega,re_pi_n_ret,im_pi_n_ret,re_pi_s_ret,im_pi_s_ret,re_pi_n_kel,im_pi_n_kel,re_pi_s_kel,im_pi_s_kel"
        )?;
        for &w0 in &self.grid {
            let v = self.value(w0)?;
            writeln!(
                w,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                w0,
                v.pi_n_ret.re, v.pi_n_ret.im,
                v.pi_s_ret.re, v.pi_s_ret.im,
                v.pi_n_kel.re, v.pi_n_kel.im,
                v.pi_s_kel.re, v.pi_s_kel.im
            )?;
        }
        Ok(())
    }

    pub fn import_csv(r: impl std::io::BufRead) -> Result<PolarizationTable> {
        let mut params: Option<JunctionParams> = None;
        let mut hash: u64 = 0;
        let mut grid = Vec::new();
        let mut ret_values = Vec::new();
        let mut kel_values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            if let Some(rest) = line.strip_prefix("# junction:") {
                let mut kv = std::collections::HashMap::new();
                for tok in rest.split_whitespace() {
                    if let Some((k, v)) = tok.split_once('=') {
                        let v: f64 = v
                            .parse()
                            .map_err(|_| err(format!("bad junction number in `{tok}`")))?;
                        kv.insert(k.to_string(), v);
                    }
                }
                let get = |k: &str| {
                    kv.get(k).copied().ok_or_else(|| err(format!("missing junction key {k}")))
                };
                let left = LeadParams::new(get("gap_l")?, get("nu_l")?, get("temp_l")?)?;
                let right = LeadParams::new(get("gap_r")?, get("nu_r")?, get("temp_r")?)?;
                params = Some(JunctionParams::new(left, right, get("r_j_ohm")?)?);
                continue;
            }
            if let Some(rest) = line.strip_prefix("# quadrature:") {
                for tok in rest.split_whitespace() {
                    if let Some(h) = tok.strip_prefix("hash=") {
                        let h = h.trim_start_matches("0x");
                        hash = u64::from_str_radix(h, 16)
                            .map_err(|_| err("bad quadrature hash".into()))?;
                    }
                }
                continue;
            }
            if line.starts_with('#') || line.starts_with("omega,") {
                continue;
            }
            let nums: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err("bad data row".into()))?;
            if nums.len() != 9 {
                return Err(err(format!("expected 9 columns, got {}", nums.len())));
            }
            grid.push(nums[0]);
            ret_values.push((Complex64::new(nums[1], nums[2]), Complex64::new(nums[3], nums[4])));
            kel_values.push((Complex64::new(nums[5], nums[6]), Complex64::new(nums[7], nums[8])));
        }
        let params = params.ok_or(Error::Parse { line: 0, message: "missing junction header".into() })?;
        if grid.len() < 2 {
            return Err(Error::Parse { line: 0, message: "table has fewer than two rows".into() });
        }
        if !grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Parse { line: 0, message: "grid not strictly increasing".into() });
        }
        // equal-temperature tables regain the exact interpolated FDT form
        let equal_t = (params.left.temperature - params.right.temperature).abs() <= 1e-12;
        Ok(PolarizationTable {
            grid,
            ret_values,
            kel_values: if equal_t { None } else { Some(kel_values) },
            params,
            settings: QuadSettings::default(),
            quad_hash: hash,
        })
    }
}
