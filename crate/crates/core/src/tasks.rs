//! Task orchestration for the CLI: builds the reduced system from a
//! configuration, runs the requested computation, and emits CSV files.
//!
//! CSV dialect: comma separators, '.' decimal point, one header row,
//! '#'-prefixed metadata lines carrying the tool version and the config
//! hash. Identical config and seed produce byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{ReducedSystem, RunConfig};
use crate::error::Result;
use crate::junction::{static_admittance, DriveContext, DriveParams};
use crate::material::LeadParams;
use crate::polarization::{
    build_table, kramers_kronig_residual, GridSpec, JunctionParams, PolarizationTable,
};
use crate::quadrature::QuadSettings;
use crate::resonator::{
    quasitemperature_from, sweep_map, HeatSolver, ResonatorCircuit, ResonatorSolver,
};
use crate::stochastic::{
    admittance_kernel_with_span, build_noise_model, ensemble_keldysh, simulate, window_smear,
    EnsembleSpec, LangevinConfig,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Polarization,
    Admittance,
    Spectrum,
    QtempMap,
    Montecarlo,
    Fig1,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "polarization" => Ok(Task::Polarization),
            "admittance" => Ok(Task::Admittance),
            "spectrum" => Ok(Task::Spectrum),
            "qtemp-map" => Ok(Task::QtempMap),
            "montecarlo" => Ok(Task::Montecarlo),
            "fig1" => Ok(Task::Fig1),
            "fig3" => Ok(Task::Fig3),
            "fig4" => Ok(Task::Fig4),
            "fig5" => Ok(Task::Fig5),
            "fig6" => Ok(Task::Fig6),
            other => Err(format!(
                "unknown task `{other}`; expected polarization|admittance|spectrum|qtemp-map|montecarlo|fig1|fig3|fig4|fig5|fig6"
            )),
        }
    }
}

struct CsvFile {
    file: std::io::BufWriter<std::fs::File>,
    path: PathBuf,
}

impl CsvFile {
    fn create(dir: &Path, name: &str, cfg: &RunConfig, task: &str) -> Result<CsvFile> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(file, "# qpj v{VERSION} task={task} config_hash={:#018x}", cfg.hash())?;
        Ok(CsvFile { file, path })
    }

    fn meta(&mut self, line: &str) -> Result<()> {
        writeln!(self.file, "# {line}")?;
        Ok(())
    }

    fn header(&mut self, columns: &str) -> Result<()> {
        writeln!(self.file, "{columns}")?;
        Ok(())
    }

    fn row(&mut self, values: &[f64]) -> Result<()> {
        let mut first = true;
        for v in values {
            if !first {
                write!(self.file, ",")?;
            }
            write!(self.file, "{v:.12e}")?;
            first = false;
        }
        writeln!(self.file)?;
        Ok(())
    }

    fn row_with_status(&mut self, values: &[f64], status: &str) -> Result<()> {
        for v in values {
            write!(self.file, "{v:.12e},")?;
        }
        writeln!(self.file, "{status}")?;
        Ok(())
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.file.flush()?;
        Ok(self.path)
    }
}

fn quad_settings(cfg: &RunConfig) -> QuadSettings {
    QuadSettings { rel_tol: cfg.quad_tol, ..QuadSettings::default() }
}

fn system_table(cfg: &RunConfig, sys: &ReducedSystem) -> Result<PolarizationTable> {
    let spec = GridSpec::new(cfg.omega_max, cfg.base_points);
    crate::polarization::build_table_with(&sys.junction, &spec, &quad_settings(cfg))
}

/// Run one task, writing outputs under `out_dir`; returns the file paths.
pub fn run_task(cfg: &RunConfig, task: Task, out_dir: &Path) -> Result<Vec<PathBuf>> {
    match task {
        Task::Polarization => task_polarization(cfg, out_dir),
        Task::Admittance => task_admittance(cfg, out_dir),
        Task::Spectrum => task_spectrum(cfg, out_dir),
        Task::QtempMap => task_qtemp_map(cfg, out_dir),
        Task::Montecarlo => task_montecarlo(cfg, out_dir),
        Task::Fig1 => task_fig1(cfg, out_dir),
        Task::Fig3 => task_fig3(cfg, out_dir),
        Task::Fig4 => task_fig4(cfg, out_dir),
        Task::Fig5 => task_fig5(cfg, out_dir),
        Task::Fig6 => task_fig6(cfg, out_dir),
    }
}

fn task_polarization(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let residual = kramers_kronig_residual(&table);
    std::fs::create_dir_all(out)?;
    let path = out.join("polarization.csv");
    let mut buf = Vec::new();
    writeln!(buf, "# qpj v{VERSION} task=polarization config_hash={:#018x}", cfg.hash())?;
    writeln!(buf, "# kramers_kronig_residual={residual:.6e}")?;
    table.export_csv(&mut buf)?;
    std::fs::write(&path, buf)?;
    Ok(vec![path])
}

fn task_admittance(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let phi0 = sys.drive.phase_bias;
    let grid = symmetric_grid(3.0_f64.min(cfg.omega_max), 1201);

    let mut stat = CsvFile::create(out, "admittance_static.csv", cfg, "admittance")?;
    stat.meta("static junction admittance, reduced units: omega in Delta_Sigma/hbar, Y in 1/R_J")?;
    stat.header("omega,re_y,im_y")?;
    for &w in &grid {
        let y = static_admittance(&table, phi0, w)?;
        stat.row(&[w, y.re, y.im])?;
    }

    let mut drv = CsvFile::create(out, "admittance_driven.csv", cfg, "admittance")?;
    drv.meta("frequency-preserving admittance Y_J0 of the driven junction, reduced units")?;
    drv.header("omega,re_y,im_y")?;
    let ctx = DriveContext::new(&table, sys.drive)?;
    for &w in &grid {
        let y = ctx.admittance(0, w)?;
        drv.row(&[w, y.re, y.im])?;
    }
    Ok(vec![stat.finish()?, drv.finish()?])
}

fn task_spectrum(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let solver = ResonatorSolver::new(sys.circuit, &table, sys.drive)?;
    let spec = solver.spectrum(40.0, 1601)?;
    let u = &sys.units;
    let l_unit = u.l_unit();

    let mut f = CsvFile::create(out, "spectrum.csv", cfg, "spectrum")?;
    f.meta("resonator spectrum: omega in Hz (ordinary frequency), G^R in henry, S21 dimensionless")?;
    f.meta(&format!(
        "stark_freq_hz={:.9e} gamma_hz={:.9e} non_lorentzian={} ks_distance={:.4}",
        u.reduced_to_hz(spec.stark_freq),
        u.reduced_to_hz(spec.linewidth),
        spec.non_lorentzian,
        spec.ks_distance
    ))?;
    f.header("omega,im_gr,re_gr,abs_s21")?;
    for (i, &w) in spec.grid.iter().enumerate() {
        let s21 = solver.s21(w)?;
        f.row(&[
            u.reduced_to_hz(w),
            spec.g_ret[i].im * l_unit,
            spec.g_ret[i].re * l_unit,
            s21.norm(),
        ])?;
    }
    Ok(vec![f.finish()?])
}

fn task_qtemp_map(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let u = &sys.units;
    let freqs = linspace_hz(cfg.map_freq_ghz, u);
    let amps: Vec<f64> = linspace(cfg.map_amplitude_mv)
        .iter()
        .map(|mv| u.voltage_to_reduced(mv * 1e-3))
        .collect();
    let sweep = sweep_map(&sys.circuit, &table, sys.drive.phase_bias, &freqs, &amps, &sys.bracket);

    let mut f = CsvFile::create(out, "qtemp_map.csv", cfg, "qtemp-map")?;
    f.meta("drive sweep: omega_drive in Hz, V0 in volts, T_r in kelvin, gamma in Hz")?;
    f.header("omega_drive_hz,v0_v,t_r_k,gamma_hz,status")?;
    for p in &sweep.points {
        f.row_with_status(
            &[
                u.reduced_to_hz(p.drive_freq),
                u.voltage_to_si(p.amplitude),
                p.qtemp.map(|t| u.temperature_to_kelvin(t)).unwrap_or(f64::NAN),
                p.linewidth.map(|g| u.reduced_to_hz(g)).unwrap_or(f64::NAN),
            ],
            &p.status,
        )?;
    }
    Ok(vec![f.finish()?])
}

fn task_montecarlo(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let solver = ResonatorSolver::new(sys.circuit, &table, sys.drive)?;
    let spec = solver.spectrum(30.0, 801)?;
    let u = &sys.units;
    let dt = cfg.dt;

    // a transient-free estimate needs several resonator lifetimes
    let needed = 8.0 / spec.linewidth.max(1e-12);
    if cfg.duration < needed {
        return Err(crate::error::Error::Validation(vec![format!(
            "numerics.duration = {:.3e} is below 8/γ = {:.3e} (reduced time units) at this \
             working point; raise numerics.duration, or raise junction.dynes_* to broaden the \
             resonance (see config/montecarlo.cfg)",
            cfg.duration, needed
        )]));
    }

    // cap the history window at a fifth of the run; with a vanishing Dynes
    // rate the kernel decays only algebraically and would otherwise exceed
    // the trajectory itself
    let kernel =
        admittance_kernel_with_span(&table, &sys.drive, dt, 1e-8, cfg.duration / 5.0)?;
    let band = std::f64::consts::PI / dt;
    let ngrid: Vec<f64> = (0..=3200).map(|i| -band + i as f64 * band / 1600.0).collect();
    let model = build_noise_model(&table, &sys.drive, &ngrid)?;

    // warm start at the steady-state scale estimated from the spectrum
    let mut phi2 = 0.0;
    for i in 1..spec.grid.len() {
        phi2 += 0.5 * (-spec.g_kel[i - 1].im - spec.g_kel[i].im)
            * (spec.grid[i] - spec.grid[i - 1]);
    }
    phi2 = (phi2 / std::f64::consts::PI).max(0.0);

    let lcfg = LangevinConfig {
        capacitance: sys.circuit.capacitance,
        inductance: sys.circuit.inductance,
        duration: cfg.duration,
        dt,
    };
    let espec = EnsembleSpec {
        trajectories: cfg.trajectories,
        duration: cfg.duration,
        discard_time: (cfg.duration / 3.0).min(3.0 / spec.linewidth.max(1e-12)),
        dt,
        seed: cfg.seed,
        max_omega: (3.0 * spec.stark_freq).min(band),
        init_sigma: (phi2.sqrt(), spec.stark_freq * phi2.sqrt()),
    };
    let est = ensemble_keldysh(&lcfg, &kernel, &sys.drive, &model, &espec)?;

    let mut f = CsvFile::create(out, "correlator.csv", cfg, "montecarlo")?;
    f.meta("Monte Carlo Keldysh correlator vs frequency-domain result; omega in Hz, G^K in henry")?;
    f.meta(&format!(
        "trajectories={} duration={} dt={} resolution_hz={:.6e} kernel_samples={} kernel_edge_rel={:.3e}",
        cfg.trajectories,
        cfg.duration,
        dt,
        u.reduced_to_hz(est.resolution),
        kernel.samples.len(),
        kernel.samples.last().copied().unwrap_or(0.0).abs()
            / kernel.samples.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300)
    ))?;
    f.header("omega_hz,im_gk_mc,sigma_mc,im_gk_theory")?;
    let theory = |w: f64| -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        solver.g_keldysh(0, w).map(|g| -g.im).unwrap_or(0.0)
    };
    let l_unit = u.l_unit();
    // decimate to a plottable row count; the smeared theory column costs a
    // window convolution per row
    let stride = (est.omega.len() / 1200).max(1);
    let rows: Vec<[f64; 4]> = (0..est.omega.len())
        .step_by(stride)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&k| {
            let w = est.omega[k];
            let smeared = window_smear(&theory, w, est.segment_len, dt);
            [
                u.reduced_to_hz(w),
                est.g_kel[k].im * l_unit,
                est.sigma[k] * l_unit,
                -smeared * l_unit,
            ]
        })
        .collect();
    for row in rows {
        f.row(&row)?;
    }
    let correlator = f.finish()?;

    // one trajectory dumped as raw little-endian f64 (phi, v) records
    let noise = crate::stochastic::synthesize_noise(&model, cfg.duration, dt, cfg.seed)?;
    let traj = simulate(&lcfg, &kernel, &sys.drive, &noise, (0.0, 0.0), cfg.seed)?;
    let mut raw = Vec::with_capacity(traj.samples.len() * 16);
    for (phi, v) in &traj.samples {
        raw.extend_from_slice(&phi.to_le_bytes());
        raw.extend_from_slice(&v.to_le_bytes());
    }
    let traj_path = out.join("trajectory.bin");
    std::fs::write(&traj_path, raw)?;
    Ok(vec![correlator, traj_path])
}

/// Polarization overview curves: cold and hot symmetric junctions plus
/// the hot asymmetric case with its split thermal features.
fn task_fig1(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let grid = symmetric_grid(3.0, 1001);
    let settings = quad_settings(cfg);
    let r_j = cfg.resistance_kohm * 1e3;
    let cases: [(&str, JunctionParams); 3] = [
        ("fig1_cold_symmetric.csv", JunctionParams::symmetric(0.0, 0.04, r_j)?),
        ("fig1_hot_symmetric.csv", JunctionParams::symmetric(0.0, 0.32, r_j)?),
        (
            "fig1_hot_asymmetric.csv",
            JunctionParams::new(
                LeadParams::new(0.6, 0.0, 0.32)?,
                LeadParams::new(0.4, 0.0, 0.32)?,
                r_j,
            )?,
        ),
    ];
    let mut paths = Vec::new();
    for (name, junction) in cases {
        let rows: Result<Vec<[f64; 5]>> = grid
            .par_iter()
            .map(|&w| {
                let (pn, ps) = junction.pi_retarded_with(w, &settings)?;
                Ok([w, pn.re, pn.im, ps.re, ps.im])
            })
            .collect();
        let mut f = CsvFile::create(out, name, cfg, "fig1")?;
        f.meta("retarded polarization operators, reduced units: omega in Delta_Sigma/hbar, Pi in Delta_Sigma/(hbar R_J)")?;
        f.meta(&format!(
            "gap_l={} gap_r={} k_B T={} (Delta_Sigma units)",
            junction.left.gap, junction.right.gap, junction.left.temperature
        ))?;
        f.header("omega,re_pi_n,im_pi_n,re_pi_s,im_pi_s")?;
        for row in rows? {
            f.row(&row)?;
        }
        paths.push(f.finish()?);
    }
    Ok(paths)
}

fn task_fig3(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let r_j = cfg.resistance_kohm * 1e3;
    let grid = symmetric_grid(3.0, 1201);
    let mut paths = Vec::new();
    for (tag, temp) in [("cold", 0.04), ("hot", 0.32)] {
        let junction = JunctionParams::symmetric(0.0, temp, r_j)?;
        let table = build_table(&junction, &GridSpec::new(4.0, 601))?;
        for (ptag, phi0) in [("phi0", 0.0), ("phipi", std::f64::consts::PI)] {
            let name = format!("fig3_{tag}_{ptag}.csv");
            let mut f = CsvFile::create(out, &name, cfg, "fig3")?;
            f.meta("static junction admittance, reduced units")?;
            f.meta(&format!("k_B T = {temp} Delta_Sigma, phase bias = {phi0}"))?;
            f.header("omega,re_y,im_y")?;
            for &w in &grid {
                let y = static_admittance(&table, phi0, w)?;
                f.row(&[w, y.re, y.im])?;
            }
            paths.push(f.finish()?);
        }
    }
    Ok(paths)
}

fn task_fig4(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let r_j = cfg.resistance_kohm * 1e3;
    let junction = JunctionParams::symmetric(0.0, 0.04, r_j)?;
    let omega_drive = 0.155;
    let ev0 = 0.5;
    let n_max = crate::junction::n_max(ev0 / omega_drive);
    let omega_max = 3.2 + (n_max as f64 + 1.0) * omega_drive;
    let table = build_table(&junction, &GridSpec::new(omega_max, 901))?;
    let grid = symmetric_grid(3.0, 1501);
    let mut paths = Vec::new();
    for (ptag, phi0) in [("phi0", 0.0), ("phipi", std::f64::consts::PI)] {
        let d = DriveParams::new(phi0, ev0, omega_drive)?;
        let ctx = DriveContext::new(&table, d)?;
        let name = format!("fig4_{ptag}.csv");
        let mut f = CsvFile::create(out, &name, cfg, "fig4")?;
        f.meta("driven-junction admittance Y_J0, reduced units")?;
        f.meta(&format!(
            "k_B T = 0.04, drive Omega = {omega_drive}, eV0 = {ev0} (Delta_Sigma units), phase bias = {phi0}"
        ))?;
        f.header("omega,re_y,im_y")?;
        for &w in &grid {
            let y = ctx.admittance(0, w)?;
            f.row(&[w, y.re, y.im])?;
        }
        paths.push(f.finish()?);
    }
    // companion amplitude map of the dissipative part
    let mut f = CsvFile::create(out, "fig4_map.csv", cfg, "fig4")?;
    f.meta("Re Y_J0 over drive amplitude, phase bias 0, reduced units")?;
    f.header("omega,ev0,re_y")?;
    let coarse = symmetric_grid(3.0, 301);
    for i in 0..=40 {
        let amp = 0.8 * i as f64 / 40.0;
        let d = DriveParams::new(0.0, amp, omega_drive)?;
        let ctx = DriveContext::new(&table, d)?;
        for &w in &coarse {
            let y = ctx.admittance(0, w)?;
            f.row(&[w, amp, y.re])?;
        }
    }
    paths.push(f.finish()?);
    Ok(paths)
}

fn task_fig5(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let u = &sys.units;
    let l_unit = u.l_unit();
    // locate the three-photon resonances of the undriven-ish resonance
    let probe = ResonatorSolver::new(
        sys.circuit,
        &table,
        DriveParams::new(sys.drive.phase_bias, sys.drive.amplitude, 0.33)?,
    )?;
    let wt0 = probe.locate_resonance()?;
    let mut paths = Vec::new();
    for (tag, sign) in [("a", 1.0), ("b", -1.0)] {
        let omega_star = (1.0 - sign * wt0) / 3.0;
        let name = format!("fig5{tag}.csv");
        let mut f = CsvFile::create(out, &name, cfg, "fig5")?;
        f.meta("Im G^R of the driven resonator near resonance; omega in Hz, G^R in henry")?;
        f.meta(&format!(
            "resonance condition {}omega_r + 3 Omega = Delta_Sigma/hbar",
            if sign > 0.0 { "+" } else { "-" }
        ))?;
        f.header("omega_hz,im_gr,drive_ghz")?;
        for detune in [-0.01, 0.0, 0.01] {
            let omega_d = omega_star * (1.0 + detune);
            let d = DriveParams::new(sys.drive.phase_bias, sys.drive.amplitude, omega_d)?;
            let solver = ResonatorSolver::new(sys.circuit, &table, d)?;
            let spec = solver.spectrum(25.0, 601)?;
            for (i, &w) in spec.grid.iter().enumerate() {
                f.row(&[
                    u.reduced_to_hz(w),
                    spec.g_ret[i].im * l_unit,
                    u.reduced_to_hz(omega_d) / 1e9,
                ])?;
            }
        }
        paths.push(f.finish()?);
    }
    Ok(paths)
}

fn task_fig6(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sys = cfg.to_reduced()?;
    let table = system_table(cfg, &sys)?;
    let u = &sys.units;
    let freqs = linspace_hz(cfg.map_freq_ghz, u);
    let amps: Vec<f64> = linspace(cfg.map_amplitude_mv)
        .iter()
        .map(|mv| u.voltage_to_reduced(mv * 1e-3))
        .collect();
    let sweep = sweep_map(&sys.circuit, &table, sys.drive.phase_bias, &freqs, &amps, &sys.bracket);
    let mut f = CsvFile::create(out, "fig6.csv", cfg, "fig6")?;
    f.meta("quasitemperature and decay rate over the drive plane")?;
    f.header("omega_ghz,v0_mv,t_r_k,gamma_hz,status")?;
    for p in &sweep.points {
        f.row_with_status(
            &[
                u.reduced_to_hz(p.drive_freq) / 1e9,
                u.voltage_to_si(p.amplitude) * 1e3,
                p.qtemp.map(|t| u.temperature_to_kelvin(t)).unwrap_or(f64::NAN),
                p.linewidth.map(|g| u.reduced_to_hz(g)).unwrap_or(f64::NAN),
            ],
            &p.status,
        )?;
    }
    Ok(vec![f.finish()?])
}

fn symmetric_grid(half: f64, points: usize) -> Vec<f64> {
    // even count keeps ω = 0 off the grid (admittances carry a 1/ω pole)
    let n = if points % 2 == 0 { points } else { points + 1 };
    (0..n)
        .map(|i| -half + 2.0 * half * (i as f64 + 0.5) / n as f64)
        .collect()
}

fn linspace(range: (f64, f64, usize)) -> Vec<f64> {
    let (a, b, n) = range;
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn linspace_hz(range_ghz: (f64, f64, usize), u: &crate::units::UnitScales) -> Vec<f64> {
    linspace(range_ghz).iter().map(|g| u.hz_to_reduced(g * 1e9)).collect()
}

/// Quasitemperature at a single drive point; used by the tests and the
/// python bindings.
pub fn quasitemperature_at(
    circuit: &ResonatorCircuit,
    table: &PolarizationTable,
    drive: &DriveParams,
    bracket: &crate::resonator::QuasitempBracket,
) -> Result<(f64, f64)> {
    let solver = ResonatorSolver::new(*circuit, table, *drive)?;
    let spec = solver.spectrum(30.0, 801)?;
    let heat = HeatSolver::new(&solver, &QuadSettings::default())?;
    let t_r = quasitemperature_from(&heat, bracket)?;
    Ok((t_r, spec.linewidth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> RunConfig {
        // full frequency span for the drive sidebands, coarse base grid
        RunConfig { base_points: 301, ..RunConfig::default() }
    }

    #[test]
    fn fig1_emits_expected_columns() {
        let dir = std::env::temp_dir().join(format!("qpj_test_fig1_{}", std::process::id()));
        let cfg = small_cfg();
        let paths = task_fig1(&cfg, &dir).unwrap();
        assert_eq!(paths.len(), 3);
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "omega,re_pi_n,im_pi_n,re_pi_s,im_pi_s");
        let rows = text.lines().filter(|l| !l.starts_with('#') && l.contains(',')).count();
        assert_eq!(rows - 1, 1002); // header + even point count over ±3
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn deterministic_output() {
        let cfg = small_cfg();
        let base = std::env::temp_dir().join(format!("qpj_test_det_{}", std::process::id()));
        let d1 = base.join("run1");
        let d2 = base.join("run2");
        let p1 = task_admittance(&cfg, &d1).unwrap();
        let p2 = task_admittance(&cfg, &d2).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            let x = std::fs::read(a).unwrap();
            let y = std::fs::read(b).unwrap();
            assert_eq!(x, y, "outputs differ between identical runs");
        }
        std::fs::remove_dir_all(&base).ok();
    }

    #[test]
    fn spectrum_task_reports_resonance() {
        let mut cfg = small_cfg();
        cfg.amplitude_mv = 0.0;
        let dir = std::env::temp_dir().join(format!("qpj_test_spec_{}", std::process::id()));
        let paths = task_spectrum(&cfg, &dir).unwrap();
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        let meta = text.lines().find(|l| l.contains("stark_freq_hz")).unwrap();
        let hz: f64 = meta
            .split("stark_freq_hz=")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert!((hz / 1e9 - 5.0).abs() < 0.3, "resonance at {hz} Hz");
        std::fs::remove_dir_all(&dir).ok();
    }
}
