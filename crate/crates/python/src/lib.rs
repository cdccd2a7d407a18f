//! Python bindings: a `System` wraps one configuration (same INI format as
//! the CLI) and lazily builds its polarization table; methods mirror the
//! main library operations. Inputs are SI where the config is SI, reduced
//! frequencies (Δ_Σ/ħ units) where the library is reduced.

use std::sync::OnceLock;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qpj::config::{ReducedSystem, RunConfig};
use qpj::junction;
use qpj::polarization::{build_table_with, GridSpec, PolarizationTable};
use qpj::quadrature::QuadSettings;
use qpj::resonator::{
    quasitemperature_from, HeatSolver, ResonatorSolver,
};

fn err_py(e: qpj::Error) -> PyErr {
    match &e {
        qpj::Error::Validation(_) | qpj::Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// One configured junction + resonator system.
#[pyclass]
struct System {
    cfg: RunConfig,
    reduced: ReducedSystem,
    table: OnceLock<PolarizationTable>,
}

impl System {
    fn table(&self) -> PyResult<&PolarizationTable> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let spec = GridSpec::new(self.cfg.omega_max, self.cfg.base_points);
        let settings = QuadSettings { rel_tol: self.cfg.quad_tol, ..QuadSettings::default() };
        let t = build_table_with(&self.reduced.junction, &spec, &settings).map_err(err_py)?;
        Ok(self.table.get_or_init(|| t))
    }

    fn solver<'a>(&'a self) -> PyResult<ResonatorSolver<'a>> {
        ResonatorSolver::new(self.reduced.circuit, self.table()?, self.reduced.drive)
            .map_err(err_py)
    }
}

#[pymethods]
impl System {
    /// Build from configuration text (same format as the CLI config file).
    #[new]
    fn new(config_text: &str) -> PyResult<Self> {
        let cfg = RunConfig::parse_str(config_text).map_err(err_py)?;
        let reduced = cfg.to_reduced().map_err(err_py)?;
        Ok(System { cfg, reduced, table: OnceLock::new() })
    }

    /// The shipped Table-1 defaults rendered as config text.
    #[staticmethod]
    fn default_config() -> String {
        RunConfig::default().canonical()
    }

    /// Summed gap Δ_Σ expressed as an ordinary frequency in Hz.
    fn gap_frequency_hz(&self) -> f64 {
        self.reduced.units.freq_unit_hz()
    }

    /// Bare LC resonance in Hz.
    fn resonator_frequency_hz(&self) -> f64 {
        self.reduced.units.reduced_to_hz(self.reduced.circuit.omega_r())
    }

    /// Normal and anomalous retarded lead Green's functions at reduced ω.
    fn green_retarded(&self, omega: f64) -> (Complex64, Complex64) {
        let g = self.reduced.junction.left.green_retarded(omega);
        (g.g, g.f)
    }

    /// Retarded polarization components (Π_n^R, Π_s^R) at reduced ω, from
    /// the tabulated operator.
    fn pi_retarded(&self, omega: f64) -> PyResult<(Complex64, Complex64)> {
        let v = self.table()?.value(omega).map_err(err_py)?;
        Ok((v.pi_n_ret, v.pi_s_ret))
    }

    /// Keldysh polarization components at reduced ω.
    fn pi_keldysh(&self, omega: f64) -> PyResult<(Complex64, Complex64)> {
        let v = self.table()?.value(omega).map_err(err_py)?;
        Ok((v.pi_n_kel, v.pi_s_kel))
    }

    /// Josephson energy in Δ_Σ units.
    fn josephson_energy(&self) -> PyResult<f64> {
        junction::josephson_energy(self.table()?).map_err(err_py)
    }

    /// dc Josephson current at the configured phase bias, Δ_Σ/(2eR_J).
    fn dc_josephson_current(&self) -> PyResult<f64> {
        junction::dc_josephson_current(self.table()?, self.reduced.drive.phase_bias)
            .map_err(err_py)
    }

    /// Static junction admittance at reduced ω, units 1/R_J.
    fn static_admittance(&self, omega: f64) -> PyResult<Complex64> {
        junction::static_admittance(self.table()?, self.reduced.drive.phase_bias, omega)
            .map_err(err_py)
    }

    /// Harmonic admittance Y_{J,n}(ω) of the driven junction, units 1/R_J.
    fn driven_admittance(&self, n: i32, omega: f64) -> PyResult<Complex64> {
        junction::driven_admittance(self.table()?, &self.reduced.drive, n, omega).map_err(err_py)
    }

    /// Fourier coefficient c_n of the drive phase factor.
    fn fourier_coeff(&self, n: i32) -> Complex64 {
        junction::fourier_coeff(&self.reduced.drive, n)
    }

    /// Retarded resonator Green's function at reduced ω, reduced units.
    fn g_retarded(&self, omega: f64) -> PyResult<Complex64> {
        self.solver()?.g_retarded(omega).map_err(err_py)
    }

    /// Harmonic-n Keldysh component of the resonator at reduced ω.
    fn g_keldysh(&self, n: i32, omega: f64) -> PyResult<Complex64> {
        self.solver()?.g_keldysh(n, omega).map_err(err_py)
    }

    /// Transmission S21 at reduced ω.
    fn s21(&self, omega: f64) -> PyResult<Complex64> {
        self.solver()?.s21(omega).map_err(err_py)
    }

    /// (stark_freq_hz, linewidth_hz, non_lorentzian, ks_distance) of the
    /// driven resonance.
    fn resonance(&self) -> PyResult<(f64, f64, bool, f64)> {
        let spec = self.solver()?.spectrum(30.0, 801).map_err(err_py)?;
        let u = &self.reduced.units;
        Ok((
            u.reduced_to_hz(spec.stark_freq),
            u.reduced_to_hz(spec.linewidth),
            spec.non_lorentzian,
            spec.ks_distance,
        ))
    }

    /// Averaged heat flow from the probe at `t_probe_k` kelvin, in watts.
    fn heat_power(&self, t_probe_k: f64) -> PyResult<f64> {
        let solver = self.solver()?;
        let heat = HeatSolver::new(&solver, &QuadSettings::default()).map_err(err_py)?;
        let u = &self.reduced.units;
        Ok(heat.power(u.temperature_to_reduced(t_probe_k)) * u.power_unit())
    }

    /// Steady-state quasitemperature of the driven resonator, kelvin.
    fn quasitemperature(&self) -> PyResult<f64> {
        let solver = self.solver()?;
        let heat = HeatSolver::new(&solver, &QuadSettings::default()).map_err(err_py)?;
        let t = quasitemperature_from(&heat, &self.reduced.bracket).map_err(err_py)?;
        Ok(self.reduced.units.temperature_to_kelvin(t))
    }

    /// Kramers-Kronig self-check residual of the tabulated operator.
    fn kramers_kronig_residual(&self) -> PyResult<f64> {
        Ok(qpj::polarization::kramers_kronig_residual(self.table()?))
    }

    /// Truncation order of the harmonic sums for the configured drive.
    fn n_max(&self) -> i32 {
        if self.reduced.drive.amplitude == 0.0 {
            0
        } else {
            junction::n_max(self.reduced.drive.drive_index())
        }
    }
}

/// Bessel function of the first kind, integer order.
#[pyfunction]
fn bessel_j(n: i32, x: f64) -> f64 {
    qpj::bessel::bessel_j(n, x)
}

/// coth with the small-argument series, as used by the FDT factors.
#[pyfunction]
fn coth_safe(x: f64) -> f64 {
    qpj::material::coth_safe(x)
}

/// Closed-form Ambegaokar-Baratoff energy for a symmetric junction, Δ_Σ
/// units; `temperature` reduced.
#[pyfunction]
fn ambegaokar_baratoff_energy(resistance_ohm: f64, temperature: f64) -> f64 {
    junction::ambegaokar_baratoff_energy(resistance_ohm, temperature)
}

#[pymodule]
fn qpj_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(coth_safe, m)?)?;
    m.add_function(wrap_pyfunction!(ambegaokar_baratoff_energy, m)?)?;
    m.add("__version__", qpj::tasks::VERSION)?;
    Ok(())
}
