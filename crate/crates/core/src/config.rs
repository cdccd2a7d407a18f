//! Run configuration: flat INI-style key-value text with section headers,
//! SI units at the boundary, validation that collects every problem, and
//! conversion to the reduced parameter set used by the numerics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::junction::DriveParams;
use crate::material::LeadParams;
use crate::polarization::JunctionParams;
use crate::resonator::{QuasitempBracket, ResonatorCircuit};
use crate::units::{UnitScales, E_CHARGE};

/// SI-facing configuration, one field per config key.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [junction]
    pub gap_left_mev: f64,
    pub gap_right_mev: f64,
    /// Dynes parameters ħν/Δ per lead, dimensionless.
    pub dynes_left: f64,
    pub dynes_right: f64,
    pub resistance_kohm: f64,
    pub temperature_k: f64,
    // [drive]
    pub phase_bias_pi: f64,
    pub amplitude_mv: f64,
    pub frequency_ghz: f64,
    // [circuit]
    pub inductance_nh: f64,
    pub capacitance_ff: f64,
    pub coupling_ff: f64,
    pub probe_impedance_ohm: f64,
    pub probe_temperature_k: f64,
    // [numerics]
    pub omega_max: f64,
    pub base_points: usize,
    pub quad_tol: f64,
    pub seed: u64,
    pub trajectories: usize,
    pub duration: f64,
    pub dt: f64,
    pub threads: usize,
    pub map_freq_ghz: (f64, f64, usize),
    pub map_amplitude_mv: (f64, f64, usize),
}

/// Table-1 defaults: C_r = 637 fF, L_r = 1.59 nH, Δ = 0.2 meV per lead,
/// R_J = 30 kΩ, T_s = 0.2 K; C_p = 1 fF and Z_p = 50 Ω are artifact
/// defaults that only set absolute power scales.
impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gap_left_mev: 0.2,
            gap_right_mev: 0.2,
            dynes_left: 0.0,
            dynes_right: 0.0,
            resistance_kohm: 30.0,
            temperature_k: 0.2,
            phase_bias_pi: 0.0,
            amplitude_mv: 0.2,
            frequency_ghz: 32.0,
            inductance_nh: 1.59,
            capacitance_ff: 637.0,
            coupling_ff: 1.0,
            probe_impedance_ohm: 50.0,
            probe_temperature_k: 0.2,
            omega_max: 18.5,
            base_points: 901,
            quad_tol: 1e-9,
            seed: 1,
            trajectories: 100,
            duration: 1.0e5,
            dt: 1.0,
            threads: 0,
            map_freq_ghz: (29.0, 36.0, 15),
            map_amplitude_mv: (0.2, 0.2, 1),
        }
    }
}

/// Everything the numerical modules need, in reduced units, plus the unit
/// scales for converting outputs back to SI.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub junction: JunctionParams,
    pub drive: DriveParams,
    pub circuit: ResonatorCircuit,
    pub units: UnitScales,
    pub bracket: QuasitempBracket,
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or(Error::Parse { line: lineno + 1, message: "unterminated section header".into() })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: lineno + 1,
                message: format!("expected key = value, got `{line}`"),
            })?;
            let full = format!("{}.{}", section, key.trim());
            kv.insert(full, (lineno + 1, value.trim().to_string()));
        }
        Self::from_map(kv)
    }

    pub fn parse_file(path: &std::path::Path) -> Result<RunConfig> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    fn from_map(mut kv: BTreeMap<String, (usize, String)>) -> Result<RunConfig> {
        let mut problems: Vec<String> = Vec::new();
        let mut cfg = RunConfig::default();

        // the physical parameters must be stated explicitly; numerics and
        // the probe-side defaults may be omitted
        const REQUIRED: &[&str] = &[
            "junction.gap_left_mev",
            "junction.gap_right_mev",
            "junction.resistance_kohm",
            "junction.temperature_k",
            "drive.phase_bias_pi",
            "drive.amplitude_mv",
            "drive.frequency_ghz",
            "circuit.inductance_nh",
            "circuit.capacitance_ff",
        ];
        for key in REQUIRED {
            if !kv.contains_key(*key) {
                problems.push(format!("missing required key `{key}`"));
            }
        }

        fn take_f64(
            kv: &mut BTreeMap<String, (usize, String)>,
            problems: &mut Vec<String>,
            key: &str,
            slot: &mut f64,
        ) {
            if let Some((line, v)) = kv.remove(key) {
                match v.parse::<f64>() {
                    Ok(x) => *slot = x,
                    Err(_) => problems.push(format!("line {line}: {key} is not a number: `{v}`")),
                }
            }
        }
        fn take_usize(
            kv: &mut BTreeMap<String, (usize, String)>,
            problems: &mut Vec<String>,
            key: &str,
            slot: &mut usize,
        ) {
            if let Some((line, v)) = kv.remove(key) {
                match v.parse::<usize>() {
                    Ok(x) => *slot = x,
                    Err(_) => problems.push(format!("line {line}: {key} is not an integer: `{v}`")),
                }
            }
        }
        fn take_range(
            kv: &mut BTreeMap<String, (usize, String)>,
            problems: &mut Vec<String>,
            key: &str,
            slot: &mut (f64, f64, usize),
        ) {
            if let Some((line, v)) = kv.remove(key) {
                let parts: Vec<&str> = v.split(':').collect();
                let parsed = (|| -> Option<(f64, f64, usize)> {
                    if parts.len() != 3 {
                        return None;
                    }
                    Some((parts[0].parse().ok()?, parts[1].parse().ok()?, parts[2].parse().ok()?))
                })();
                match parsed {
                    Some(r) => *slot = r,
                    None => problems
                        .push(format!("line {line}: {key} must be start:stop:count, got `{v}`")),
                }
            }
        }

        take_f64(&mut kv, &mut problems, "junction.gap_left_mev", &mut cfg.gap_left_mev);
        take_f64(&mut kv, &mut problems, "junction.gap_right_mev", &mut cfg.gap_right_mev);
        take_f64(&mut kv, &mut problems, "junction.dynes_left", &mut cfg.dynes_left);
        take_f64(&mut kv, &mut problems, "junction.dynes_right", &mut cfg.dynes_right);
        take_f64(&mut kv, &mut problems, "junction.resistance_kohm", &mut cfg.resistance_kohm);
        take_f64(&mut kv, &mut problems, "junction.temperature_k", &mut cfg.temperature_k);
        take_f64(&mut kv, &mut problems, "drive.phase_bias_pi", &mut cfg.phase_bias_pi);
        take_f64(&mut kv, &mut problems, "drive.amplitude_mv", &mut cfg.amplitude_mv);
        take_f64(&mut kv, &mut problems, "drive.frequency_ghz", &mut cfg.frequency_ghz);
        take_f64(&mut kv, &mut problems, "circuit.inductance_nh", &mut cfg.inductance_nh);
        take_f64(&mut kv, &mut problems, "circuit.capacitance_ff", &mut cfg.capacitance_ff);
        take_f64(&mut kv, &mut problems, "circuit.coupling_ff", &mut cfg.coupling_ff);
        take_f64(&mut kv, &mut problems, "circuit.probe_impedance_ohm", &mut cfg.probe_impedance_ohm);
        take_f64(&mut kv, &mut problems, "circuit.probe_temperature_k", &mut cfg.probe_temperature_k);
        take_f64(&mut kv, &mut problems, "numerics.omega_max", &mut cfg.omega_max);
        take_usize(&mut kv, &mut problems, "numerics.base_points", &mut cfg.base_points);
        take_f64(&mut kv, &mut problems, "numerics.quad_tol", &mut cfg.quad_tol);
        take_usize(&mut kv, &mut problems, "numerics.trajectories", &mut cfg.trajectories);
        take_f64(&mut kv, &mut problems, "numerics.duration", &mut cfg.duration);
        take_f64(&mut kv, &mut problems, "numerics.dt", &mut cfg.dt);
        take_usize(&mut kv, &mut problems, "numerics.threads", &mut cfg.threads);
        take_range(&mut kv, &mut problems, "numerics.map_freq_ghz", &mut cfg.map_freq_ghz);
        take_range(&mut kv, &mut problems, "numerics.map_amplitude_mv", &mut cfg.map_amplitude_mv);
        if let Some((line, v)) = kv.remove("numerics.seed") {
            match v.parse::<u64>() {
                Ok(x) => cfg.seed = x,
                Err(_) => problems.push(format!("line {line}: numerics.seed is not an integer: `{v}`")),
            }
        }

        for (key, (line, _)) in &kv {
            problems.push(format!("line {line}: unknown key `{key}`"));
        }
        problems.extend(cfg.validate());
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(problems))
        }
    }

    fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let positive = [
            ("junction.gap_left_mev", self.gap_left_mev),
            ("junction.gap_right_mev", self.gap_right_mev),
            ("junction.resistance_kohm", self.resistance_kohm),
            ("circuit.inductance_nh", self.inductance_nh),
            ("circuit.capacitance_ff", self.capacitance_ff),
            ("circuit.probe_impedance_ohm", self.probe_impedance_ohm),
            ("circuit.probe_temperature_k", self.probe_temperature_k),
            ("numerics.omega_max", self.omega_max),
            ("numerics.quad_tol", self.quad_tol),
            ("numerics.duration", self.duration),
            ("numerics.dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                problems.push(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("junction.dynes_left", self.dynes_left),
            ("junction.dynes_right", self.dynes_right),
            ("junction.temperature_k", self.temperature_k),
            ("drive.amplitude_mv", self.amplitude_mv),
            ("circuit.coupling_ff", self.coupling_ff),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) {
                problems.push(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.amplitude_mv > 0.0 && !(self.frequency_ghz > 0.0) {
            problems.push(format!(
                "drive.frequency_ghz must be positive when the drive amplitude is non-zero, got {}",
                self.frequency_ghz
            ));
        }
        if self.base_points < 2 {
            problems.push(format!("numerics.base_points must be at least 2, got {}", self.base_points));
        }
        if self.map_freq_ghz.2 == 0 || self.map_amplitude_mv.2 == 0 {
            problems.push("sweep ranges need at least one point".into());
        }
        problems
    }

    /// Δ_Σ in joules.
    pub fn delta_sigma_joule(&self) -> f64 {
        (self.gap_left_mev + self.gap_right_mev) * 1e-3 * E_CHARGE
    }

    pub fn unit_scales(&self) -> UnitScales {
        UnitScales::new(self.delta_sigma_joule(), self.resistance_kohm * 1e3)
    }

    /// Convert to reduced units; fixes ħ = 1, the energy unit Δ_Σ, and the
    /// conductance unit 1/R_J.
    pub fn to_reduced(&self) -> Result<ReducedSystem> {
        let units = self.unit_scales();
        let delta_sum_mev = self.gap_left_mev + self.gap_right_mev;
        let gap_l = self.gap_left_mev / delta_sum_mev;
        let gap_r = self.gap_right_mev / delta_sum_mev;
        let left = LeadParams::new(
            gap_l,
            self.dynes_left * gap_l,
            units.temperature_to_reduced(self.temperature_k),
        )?;
        let right = LeadParams::new(
            gap_r,
            self.dynes_right * gap_r,
            units.temperature_to_reduced(self.temperature_k),
        )?;
        let junction = JunctionParams::new(left, right, self.resistance_kohm * 1e3)?;
        let drive = DriveParams::new(
            self.phase_bias_pi * std::f64::consts::PI,
            units.voltage_to_reduced(self.amplitude_mv * 1e-3),
            units.hz_to_reduced(self.frequency_ghz * 1e9),
        )?;
        let circuit = ResonatorCircuit::new(
            units.inductance_to_reduced(self.inductance_nh * 1e-9),
            units.capacitance_to_reduced(self.capacitance_ff * 1e-15),
            units.capacitance_to_reduced(self.coupling_ff * 1e-15),
            units.impedance_to_reduced(self.probe_impedance_ohm),
            units.temperature_to_reduced(self.probe_temperature_k),
        )?;
        let bracket = QuasitempBracket::from_units(&units);
        Ok(ReducedSystem { junction, drive, circuit, units, bracket })
    }

    /// Canonical key-value rendering; also what the config hash is over.
    pub fn canonical(&self) -> String {
        format!(
            "[junction]\n\
             gap_left_mev = {}\n\
             gap_right_mev = {}\n\
             dynes_left = {}\n\
             dynes_right = {}\n\
             resistance_kohm = {}\n\
             temperature_k = {}\n\
             \n[drive]\n\
             phase_bias_pi = {}\n\
             amplitude_mv = {}\n\
             frequency_ghz = {}\n\
             \n[circuit]\n\
             inductance_nh = {}\n\
             capacitance_ff = {}\n\
             coupling_ff = {}\n\
             probe_impedance_ohm = {}\n\
             probe_temperature_k = {}\n\
             \n[numerics]\n\
             omega_max = {}\n\
             base_points = {}\n\
             quad_tol = {}\n\
             seed = {}\n\
             trajectories = {}\n\
             duration = {}\n\
             dt = {}\n\
             threads = {}\n\
             map_freq_ghz = {}:{}:{}\n\
             map_amplitude_mv = {}:{}:{}\n",
            self.gap_left_mev,
            self.gap_right_mev,
            self.dynes_left,
            self.dynes_right,
            self.resistance_kohm,
            self.temperature_k,
            self.phase_bias_pi,
            self.amplitude_mv,
            self.frequency_ghz,
            self.inductance_nh,
            self.capacitance_ff,
            self.coupling_ff,
            self.probe_impedance_ohm,
            self.probe_temperature_k,
            self.omega_max,
            self.base_points,
            self.quad_tol,
            self.seed,
            self.trajectories,
            self.duration,
            self.dt,
            self.threads,
            self.map_freq_ghz.0,
            self.map_freq_ghz.1,
            self.map_freq_ghz.2,
            self.map_amplitude_mv.0,
            self.map_amplitude_mv.1,
            self.map_amplitude_mv.2,
        )
    }

    /// FNV-1a hash of the canonical rendering, recorded in CSV metadata.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}
