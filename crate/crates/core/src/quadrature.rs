//! Adaptive Gauss-Kronrod quadrature for vector-valued integrands.
//!
//! The polarization integrals have inverse-square-root integrable
//! singularities exactly at the lead branch energies, so panels are seeded
//! at caller-supplied breakpoints and the worst panel is bisected until the
//! summed error estimate meets the tolerance. Semi-infinite tails are
//! folded in through the substitution u = 1/ω.

use num_complex::Complex64;

use crate::error::{Error, Result};

// 7-15 Gauss-Kronrod nodes and weights (positive half; nodes are interior,
// so endpoint singularities are never evaluated).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    /// Relative tolerance on the summed panel error.
    pub rel_tol: f64,
    /// Absolute floor for the error target.
    pub abs_tol: f64,
    /// Hard cap on the number of panels.
    pub max_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { rel_tol: 1e-9, abs_tol: 1e-12, max_panels: 4000 }
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [Complex64; N],
    error: f64,
}

fn gk15<const N: usize, F: Fn(f64) -> [Complex64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = [Complex64::ZERO; N];
    let mut gauss = [Complex64::ZERO; N];

    let fc = f(c);
    for i in 0..N {
        kronrod[i] = fc[i] * WGK[7];
        gauss[i] = fc[i] * WG[3];
    }
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        for i in 0..N {
            let s = f1[i] + f2[i];
            kronrod[i] += s * WGK[j];
            if j % 2 == 1 {
                // odd Kronrod indices are the embedded Gauss-7 nodes
                gauss[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0;
    for i in 0..N {
        kronrod[i] *= h;
        gauss[i] *= h;
        err += (kronrod[i] - gauss[i]).norm();
    }
    Panel { a, b, value: kronrod, error: err }
}

/// Integrate `f` over `[points[0], points[last]]` with initial panel edges
/// at every breakpoint, bisecting the worst panel until the error estimate
/// satisfies the tolerance.
pub fn integrate<const N: usize, F: Fn(f64) -> [Complex64; N]>(
    f: &F,
    points: &[f64],
    settings: &QuadSettings,
) -> Result<[Complex64; N]> {
    Ok(refine(f, points, settings)?
        .iter()
        .fold([Complex64::ZERO; N], |mut acc, p| {
            for i in 0..N {
                acc[i] += p.value[i];
            }
            acc
        }))
}

/// Run the adaptive refinement and hand back the converged panel edges, so
/// a caller can re-evaluate a related integrand on the same node set.
pub fn adaptive_panels<const N: usize, F: Fn(f64) -> [Complex64; N]>(
    f: &F,
    points: &[f64],
    settings: &QuadSettings,
) -> Result<Vec<(f64, f64)>> {
    let mut edges: Vec<(f64, f64)> = refine(f, points, settings)?
        .iter()
        .map(|p| (p.a, p.b))
        .collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(edges)
}

/// Fixed 15-point Gauss-Kronrod nodes and weights on a panel, for callers
/// that cache integrand samples.
pub fn gk15_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    out[0] = (c, WGK[7] * h);
    let mut k = 1;
    for (j, &x) in XGK.iter().take(7).enumerate() {
        out[k] = (c - h * x, WGK[j] * h);
        out[k + 1] = (c + h * x, WGK[j] * h);
        k += 2;
    }
    out
}

fn refine<const N: usize, F: Fn(f64) -> [Complex64; N]>(
    f: &F,
    points: &[f64],
    settings: &QuadSettings,
) -> Result<Vec<Panel<N>>> {
    assert!(points.len() >= 2, "need at least two breakpoints");
    let mut panels: Vec<Panel<N>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(f, w[0], w[1]))
        .collect();

    loop {
        let mut total_err = 0.0;
        let mut total_mag = 0.0;
        for p in &panels {
            total_err += p.error;
            for v in &p.value {
                total_mag += v.norm();
            }
        }
        let tol = (settings.rel_tol * total_mag).max(settings.abs_tol);
        if total_err <= tol {
            break;
        }
        if panels.len() >= settings.max_panels {
            return Err(Error::QuadratureNotConverged { estimate: total_err, tolerance: tol });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval exhausted at machine precision; accept what we have
            break;
        }
        panels[worst] = gk15(f, a, mid);
        panels.push(gk15(f, mid, b));
    }

    Ok(panels)
}

/// Integrate over the whole real line: adaptively on [-cutoff, cutoff] with
/// the given interior breakpoints, plus both tails via u = 1/ω, which turns
/// any integrand decaying at least like 1/ω² into a regular one.
pub fn integrate_real_line<const N: usize, F: Fn(f64) -> [Complex64; N]>(
    f: &F,
    interior_points: &[f64],
    cutoff: f64,
    settings: &QuadSettings,
) -> Result<[Complex64; N]> {
    let mut points: Vec<f64> = vec![-cutoff, cutoff];
    points.extend(interior_points.iter().copied().filter(|p| p.abs() < cutoff));
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut total = integrate(f, &points, settings)?;

    // tail accuracy only needs to hold relative to the core result
    let core_mag: f64 = total.iter().map(|v| v.norm()).sum();
    let tail_settings = QuadSettings {
        abs_tol: settings.abs_tol.max(0.1 * settings.rel_tol * core_mag),
        ..*settings
    };
    let settings = &tail_settings;

    let upper = |u: f64| -> [Complex64; N] {
        let w = 1.0 / u;
        let mut v = f(w);
        for x in &mut v {
            *x *= w * w;
        }
        v
    };
    let lower = |u: f64| -> [Complex64; N] {
        let w = -1.0 / u;
        let mut v = f(w);
        for x in &mut v {
            *x *= w * w;
        }
        v
    };
    // The integrand values are O(1) cancellations, so 1/u² amplifies
    // roundoff without bound as u -> 0. Anything the cap discards decays at
    // least like 1/ω² and is below 1e-8 of the tail itself.
    let u_min = 1e-4 / cutoff;
    let tail_pts = [u_min, 1.0 / cutoff];
    let up = integrate(&upper, &tail_pts, settings)?;
    let lo = integrate(&lower, &tail_pts, settings)?;
    for i in 0..N {
        total[i] += up[i] + lo[i];
    }
    Ok(total)
}
