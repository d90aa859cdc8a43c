//! INI configuration: `[model]`, `[rates]`, `[sweep]` and `[output]`.
//!
//! Every key is declared in [`KEYS`]. Anything else is rejected with the
//! nearest known key as a suggestion.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;
use std::path::Path;

use hybridmem_core::lindblad::DecoherenceRates;
use hybridmem_core::protocols::TargetPhase;
use ini::{Ini, ParseOption};

use crate::error::{CliError, Result};
use crate::scenario::Scenario;

pub const SECTIONS: [&str; 4] = ["model", "rates", "sweep", "output"];

pub struct KeySpec {
    pub name: &'static str,
    pub doc: &'static str,
}

const fn key(name: &'static str, doc: &'static str) -> KeySpec {
    KeySpec { name, doc }
}

/// Every accepted `section.key`.
pub const KEYS: &[KeySpec] = &[
    key(
        "model.alphas",
        "CBJJ input amplitudes alpha (beta = sqrt(1 - alpha^2)), one curve each",
    ),
    key(
        "model.deltas",
        "coupling mismatch delta = (g_td - g_tc)/g0 for resonant runs, one curve each",
    ),
    key("model.k", "timing integer k in (2k+1) x protocol time"),
    key("model.fock_cutoff", "highest resonator Fock level kept"),
    key(
        "model.target_phase",
        "corrected | raw: absorb the deterministic stored-branch phase into the target",
    ),
    key(
        "model.dispersive_hamiltonian",
        "effective | full: exchange Hamiltonian, or Stark-shifted lab-frame form",
    ),
    key("model.protocol", "resonant | dispersive | w-state (custom scenario)"),
    key(
        "model.omega_c",
        "resonator frequency for the full dispersive model (model units)",
    ),
    key(
        "model.detuning",
        "emitter-resonator detuning for the full dispersive model (model units)",
    ),
    key(
        "model.coupling",
        "emitter-resonator coupling for the full dispersive model (model units)",
    ),
    key(
        "model.coupling_ratios",
        "g/detuning values checked by validate-dispersive",
    ),
    key(
        "model.duration",
        "validate-dispersive duration in model units, or auto for pi/(2 eta)",
    ),
    key("model.ensembles", "number of NV ensembles for W-state runs"),
    key("model.dt", "largest integration step in model units"),
    key(
        "model.renormalize",
        "renormalize the trace at every record (true | false)",
    ),
    key("model.bias_ratio", "I_b/I_c for both device cases"),
    key("model.critical_current", "resonant case I_c (A)"),
    key("model.junction_capacitance", "resonant case C_J (F)"),
    key("model.di_critical_current", "dispersive case I_c (A)"),
    key("model.di_junction_capacitance", "dispersive case C_J (F)"),
    key("model.resonator_inductance", "F_t (H)"),
    key("model.resonator_capacitance", "C_t (F)"),
    key("model.wiring_capacitance", "C_0 (F)"),
    key("model.coupling_capacitance", "C_c (F)"),
    key(
        "model.renormalize_resonator",
        "include the wiring/coupling shift of omega_c (true | false)",
    ),
    key("model.nv_count", "number of NV centres per ensemble"),
    key(
        "model.nv_single_coupling_hz",
        "single-NV vacuum Rabi frequency g_s/2pi (Hz)",
    ),
    key(
        "model.dispersive_coupling_hz",
        "g/2pi used for eta in the dispersive case (Hz)",
    ),
    key(
        "model.dispersive_detuning_hz",
        "Delta/2pi used for eta in the dispersive case (Hz)",
    ),
    key("rates.kappa", "resonator decay rate"),
    key("rates.gamma_10", "CBJJ spontaneous emission rate"),
    key("rates.gamma_tunnel", "CBJJ tunnelling rate Gamma_1"),
    key("rates.gamma_phi", "CBJJ pure dephasing rate"),
    key("rates.gamma", "sets gamma_10 = gamma_tunnel = gamma_phi at once"),
    key("rates.gamma_values", "joint CBJJ rates, one curve each (fig4b)"),
    key("sweep.x_start", "first axis start"),
    key("sweep.x_stop", "first axis stop"),
    key("sweep.x_points", "first axis sample count"),
    key("sweep.y_start", "second axis start"),
    key("sweep.y_stop", "second axis stop"),
    key("sweep.y_points", "second axis sample count"),
    key(
        "sweep.t_stop",
        "last sampled time in model units, or auto for 3 x protocol time",
    ),
    key("sweep.t_points", "number of sampled times"),
    key("output.name", "file stem of the CSV and metadata files"),
];

fn known_key(full: &str) -> bool {
    KEYS.iter().any(|k| k.name == full)
}

/// Closest candidate by edit distance, if reasonably close.
pub fn suggest<'a>(name: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<String> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(name, c), c))
        .min()
        .filter(|(d, c)| *d <= (c.len() / 3).max(3))
        .map(|(_, c)| c.to_string())
}

/// Validated `section.key = value` pairs as written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let opt = ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..ParseOption::default()
        };
        // the INI parser reports an unclosed header on the following line
        for (i, l) in text.lines().enumerate() {
            let l = l.trim();
            if l.starts_with('[') && !l.contains(']') {
                return Err(CliError::Parse {
                    line: i + 1,
                    message: format!("unterminated section header `{l}`"),
                });
            }
        }
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| CliError::Parse {
            line: e.line,
            message: e.msg.to_string(),
        })?;
        let mut entries = BTreeMap::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(CliError::Config(format!("key `{k}` appears before any [section]")));
                }
                continue;
            };
            if !SECTIONS.contains(&section) {
                return Err(CliError::Unknown {
                    what: "section",
                    name: section.to_string(),
                    suggestion: suggest(section, SECTIONS),
                });
            }
            for (k, v) in props.iter() {
                let full = format!("{section}.{k}");
                if !known_key(&full) {
                    return Err(CliError::Unknown {
                        what: "key",
                        name: full.clone(),
                        suggestion: suggest(&full, KEYS.iter().map(|k| k.name)),
                    });
                }
                if props.get_all(k).count() > 1 {
                    return Err(CliError::Config(format!("key `{full}` given more than once")));
                }
                entries.insert(full, v.trim().to_string());
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn value_err(key: &str, message: impl Into<String>) -> CliError {
    CliError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| value_err(key, format!("expected a number, got `{s}`")))?;
    if !v.is_finite() {
        return Err(value_err(key, "must be finite"));
    }
    Ok(v)
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(key, t))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(value_err(key, "expected at least one value"));
    }
    Ok(out)
}

fn parse_int<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| value_err(key, format!("expected a non-negative integer, got `{s}`")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(value_err(key, format!("expected true or false, got `{s}`"))),
    }
}

fn parse_choice<T: Copy>(key: &str, s: &str, choices: &[(&str, T)]) -> Result<T> {
    choices.iter().find(|(n, _)| *n == s).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
        let hint = suggest(s, names.iter().copied())
            .map(|h| format!(" (did you mean `{h}`?)"))
            .unwrap_or_default();
        value_err(key, format!("expected one of {}, got `{s}`{hint}", names.join(", ")))
    })
}

fn parse_auto(key: &str, s: &str) -> Result<Option<f64>> {
    if s == "auto" {
        Ok(None)
    } else {
        parse_f64(key, s).map(Some)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiHamiltonian {
    Effective,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Resonant,
    Dispersive,
    WState,
}

const PHASES: &[(&str, TargetPhase)] = &[("corrected", TargetPhase::Corrected), ("raw", TargetPhase::Raw)];
const DI_HAMILTONIANS: &[(&str, DiHamiltonian)] =
    &[("effective", DiHamiltonian::Effective), ("full", DiHamiltonian::Full)];
const PROTOCOLS: &[(&str, Protocol)] = &[
    ("resonant", Protocol::Resonant),
    ("dispersive", Protocol::Dispersive),
    ("w-state", Protocol::WState),
];

fn choice_name<T: PartialEq>(choices: &[(&'static str, T)], v: &T) -> &'static str {
    choices.iter().find(|(_, c)| c == v).map(|(n, _)| *n).unwrap_or("?")
}

/// One sweep axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSettings {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Circuit values for `params-report`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviceSettings {
    pub bias_ratio: f64,
    pub critical_current: f64,
    pub junction_capacitance: f64,
    pub di_critical_current: f64,
    pub di_junction_capacitance: f64,
    pub resonator_inductance: f64,
    pub resonator_capacitance: f64,
    pub wiring_capacitance: f64,
    pub coupling_capacitance: f64,
    pub renormalize_resonator: bool,
    pub nv_count: u64,
    pub nv_single_coupling_hz: f64,
    pub dispersive_coupling_hz: f64,
    pub dispersive_detuning_hz: f64,
}

impl Default for DeviceSettings {
    fn default() -> Self {
        Self {
            bias_ratio: 0.99,
            critical_current: 67e-6,
            junction_capacitance: 71.5e-12,
            di_critical_current: 2.177e-6,
            di_junction_capacitance: 2.3e-12,
            resonator_inductance: 60.7e-9,
            resonator_capacitance: 2e-12,
            wiring_capacitance: 0.0,
            coupling_capacitance: 60e-15,
            renormalize_resonator: false,
            nv_count: 1_000_000_000_000,
            nv_single_coupling_hz: 10.0,
            dispersive_coupling_hz: 50e6,
            dispersive_detuning_hz: 250e6,
        }
    }
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub k: u32,
    pub fock_cutoff: usize,
    pub target_phase: TargetPhase,
    pub dispersive_hamiltonian: DiHamiltonian,
    pub protocol: Protocol,
    pub omega_c: f64,
    pub detuning: f64,
    pub coupling: f64,
    pub coupling_ratios: Vec<f64>,
    pub duration: Option<f64>,
    pub ensembles: usize,
    pub dt: f64,
    pub renormalize: bool,
    pub device: DeviceSettings,
    pub rates: DecoherenceRates,
    pub gamma_values: Vec<f64>,
    pub x: AxisSettings,
    pub y: AxisSettings,
    pub t_stop: Option<f64>,
    pub t_points: usize,
    pub output_name: String,
}

impl Settings {
    /// Default parameterization of each scenario.
    pub fn defaults(scenario: Scenario) -> Self {
        let axis = AxisSettings {
            start: 0.0,
            stop: 0.1,
            points: 41,
        };
        let mut s = Settings {
            alphas: vec![FRAC_1_SQRT_2],
            deltas: vec![0.0],
            k: 0,
            fock_cutoff: 2,
            target_phase: TargetPhase::Corrected,
            dispersive_hamiltonian: DiHamiltonian::Effective,
            protocol: Protocol::Resonant,
            omega_c: 262.0,
            detuning: 25.0,
            coupling: 5.0,
            coupling_ratios: vec![0.04, 0.2],
            duration: None,
            ensembles: 3,
            dt: 0.001,
            renormalize: false,
            device: DeviceSettings::default(),
            rates: DecoherenceRates::zero(),
            gamma_values: vec![1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0],
            x: axis,
            y: axis,
            t_stop: None,
            t_points: 600,
            output_name: scenario.name().to_string(),
        };
        match scenario {
            Scenario::Fig3a => {
                s.deltas = vec![0.0, -0.1, 0.1];
                s.rates = DecoherenceRates::new(0.01, 0.01, 0.01, 0.01).expect("static rates");
            }
            Scenario::Fig3b => {
                s.alphas = vec![(0.5f64).sqrt(), (1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()];
                s.rates = DecoherenceRates::new(0.0, 0.03, 0.015, 0.015).expect("static rates");
                s.t_stop = Some(3.0);
            }
            Scenario::Custom => {
                s.rates = DecoherenceRates::new(0.01, 0.01, 0.01, 0.01).expect("static rates");
            }
            _ => {}
        }
        s
    }

    /// Defaults for `scenario` overridden by `raw`.
    pub fn resolve(scenario: Scenario, raw: &RawConfig) -> Result<Self> {
        let mut s = Self::defaults(scenario);
        for key in raw.keys() {
            if !scenario.keys().contains(&key) {
                log::warn!("{key} is not used by scenario {}", scenario.name());
            }
        }
        let f = |k: &str| raw.get(k);
        if let Some(v) = f("model.alphas") {
            s.alphas = parse_list("model.alphas", v)?;
        }
        if let Some(v) = f("model.deltas") {
            s.deltas = parse_list("model.deltas", v)?;
        }
        if let Some(v) = f("model.k") {
            s.k = parse_int("model.k", v)?;
        }
        if let Some(v) = f("model.fock_cutoff") {
            s.fock_cutoff = parse_int("model.fock_cutoff", v)?;
        }
        if let Some(v) = f("model.target_phase") {
            s.target_phase = parse_choice("model.target_phase", v, PHASES)?;
        }
        if let Some(v) = f("model.dispersive_hamiltonian") {
            s.dispersive_hamiltonian = parse_choice("model.dispersive_hamiltonian", v, DI_HAMILTONIANS)?;
        }
        if let Some(v) = f("model.protocol") {
            s.protocol = parse_choice("model.protocol", v, PROTOCOLS)?;
        }
        for (k, slot) in [
            ("model.omega_c", &mut s.omega_c),
            ("model.detuning", &mut s.detuning),
            ("model.coupling", &mut s.coupling),
            ("model.dt", &mut s.dt),
            ("model.bias_ratio", &mut s.device.bias_ratio),
            ("model.critical_current", &mut s.device.critical_current),
            ("model.junction_capacitance", &mut s.device.junction_capacitance),
            ("model.di_critical_current", &mut s.device.di_critical_current),
            ("model.di_junction_capacitance", &mut s.device.di_junction_capacitance),
            ("model.resonator_inductance", &mut s.device.resonator_inductance),
            ("model.resonator_capacitance", &mut s.device.resonator_capacitance),
            ("model.wiring_capacitance", &mut s.device.wiring_capacitance),
            ("model.coupling_capacitance", &mut s.device.coupling_capacitance),
            ("model.nv_single_coupling_hz", &mut s.device.nv_single_coupling_hz),
            ("model.dispersive_coupling_hz", &mut s.device.dispersive_coupling_hz),
            ("model.dispersive_detuning_hz", &mut s.device.dispersive_detuning_hz),
            ("sweep.x_start", &mut s.x.start),
            ("sweep.x_stop", &mut s.x.stop),
            ("sweep.y_start", &mut s.y.start),
            ("sweep.y_stop", &mut s.y.stop),
        ] {
            if let Some(v) = f(k) {
                *slot = parse_f64(k, v)?;
            }
        }
        if let Some(v) = f("model.coupling_ratios") {
            s.coupling_ratios = parse_list("model.coupling_ratios", v)?;
        }
        if let Some(v) = f("model.duration") {
            s.duration = parse_auto("model.duration", v)?;
        }
        if let Some(v) = f("model.ensembles") {
            s.ensembles = parse_int("model.ensembles", v)?;
        }
        if let Some(v) = f("model.renormalize") {
            s.renormalize = parse_bool("model.renormalize", v)?;
        }
        if let Some(v) = f("model.renormalize_resonator") {
            s.device.renormalize_resonator = parse_bool("model.renormalize_resonator", v)?;
        }
        if let Some(v) = f("model.nv_count") {
            s.device.nv_count = parse_int("model.nv_count", v)?;
        }
        for (k, slot) in [
            ("sweep.x_points", &mut s.x.points),
            ("sweep.y_points", &mut s.y.points),
            ("sweep.t_points", &mut s.t_points),
        ] {
            if let Some(v) = f(k) {
                *slot = parse_int(k, v)?;
            }
        }
        if let Some(v) = f("sweep.t_stop") {
            s.t_stop = parse_auto("sweep.t_stop", v)?;
        }
        if let Some(v) = f("output.name") {
            if v.is_empty() || v.contains(['/', '\\']) {
                return Err(value_err(
                    "output.name",
                    format!("expected a plain file stem, got `{v}`"),
                ));
            }
            s.output_name = v.to_string();
        }
        s.resolve_rates(raw)?;
        if let Some(v) = f("rates.gamma_values") {
            s.gamma_values = parse_list("rates.gamma_values", v)?;
        }
        s.validate()?;
        Ok(s)
    }

    fn resolve_rates(&mut self, raw: &RawConfig) -> Result<()> {
        let mut r = self.rates;
        if let Some(v) = raw.get("rates.kappa") {
            r.kappa = parse_f64("rates.kappa", v)?;
        }
        let individual = ["rates.gamma_10", "rates.gamma_tunnel", "rates.gamma_phi"];
        if let Some(v) = raw.get("rates.gamma") {
            if let Some(k) = individual.iter().find(|k| raw.get(k).is_some()) {
                return Err(CliError::Config(format!(
                    "rates.gamma and {k} both given; use one or the other"
                )));
            }
            let g = parse_f64("rates.gamma", v)?;
            r.gamma_10 = g;
            r.gamma_tunnel = g;
            r.gamma_phi = g;
        }
        for (k, slot) in individual
            .iter()
            .zip([&mut r.gamma_10, &mut r.gamma_tunnel, &mut r.gamma_phi])
        {
            if let Some(v) = raw.get(k) {
                *slot = parse_f64(k, v)?;
            }
        }
        for (k, v) in [
            ("rates.kappa", r.kappa),
            ("rates.gamma_10", r.gamma_10),
            ("rates.gamma_tunnel", r.gamma_tunnel),
            ("rates.gamma_phi", r.gamma_phi),
        ] {
            if v < 0.0 {
                return Err(value_err(k, format!("rates must be non-negative, got {v}")));
            }
        }
        self.rates = r;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(value_err("model.alphas", format!("alpha must lie in [0, 1], got {a}")));
        }
        if let Some(d) = self.deltas.iter().find(|d| d.abs() > 0.5) {
            return Err(value_err(
                "model.deltas",
                format!("delta must lie in [-0.5, 0.5], got {d}"),
            ));
        }
        if self.fock_cutoff < 1 {
            return Err(value_err("model.fock_cutoff", "must be at least 1"));
        }
        if !(self.dt > 0.0) {
            return Err(value_err("model.dt", "must be positive"));
        }
        if !(2..=6).contains(&self.ensembles) {
            return Err(value_err(
                "model.ensembles",
                format!("must lie in 2..=6, got {}", self.ensembles),
            ));
        }
        if let Some(g) = self.gamma_values.iter().find(|g| **g < 0.0) {
            return Err(value_err(
                "rates.gamma_values",
                format!("rates must be non-negative, got {g}"),
            ));
        }
        if let Some(r) = self.coupling_ratios.iter().find(|r| !(**r > 0.0)) {
            return Err(value_err(
                "model.coupling_ratios",
                format!("ratios must be positive, got {r}"),
            ));
        }
        if self.t_points < 2 {
            return Err(value_err("sweep.t_points", "need at least 2 points"));
        }
        if let Some(t) = self.t_stop.filter(|t| !(*t > 0.0)) {
            return Err(value_err("sweep.t_stop", format!("must be positive, got {t}")));
        }
        if let Some(t) = self.duration.filter(|t| !(*t > 0.0)) {
            return Err(value_err("model.duration", format!("must be positive, got {t}")));
        }
        Ok(())
    }

    /// Value of `key` as it would be written in a config file.
    pub fn value_of(&self, key: &str) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let auto = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
        let d = &self.device;
        match key {
            "model.alphas" => list(&self.alphas),
            "model.deltas" => list(&self.deltas),
            "model.k" => self.k.to_string(),
            "model.fock_cutoff" => self.fock_cutoff.to_string(),
            "model.target_phase" => choice_name(PHASES, &self.target_phase).into(),
            "model.dispersive_hamiltonian" => choice_name(DI_HAMILTONIANS, &self.dispersive_hamiltonian).into(),
            "model.protocol" => choice_name(PROTOCOLS, &self.protocol).into(),
            "model.omega_c" => self.omega_c.to_string(),
            "model.detuning" => self.detuning.to_string(),
            "model.coupling" => self.coupling.to_string(),
            "model.coupling_ratios" => list(&self.coupling_ratios),
            "model.duration" => auto(self.duration),
            "model.ensembles" => self.ensembles.to_string(),
            "model.dt" => self.dt.to_string(),
            "model.renormalize" => self.renormalize.to_string(),
            "model.bias_ratio" => d.bias_ratio.to_string(),
            "model.critical_current" => d.critical_current.to_string(),
            "model.junction_capacitance" => d.junction_capacitance.to_string(),
            "model.di_critical_current" => d.di_critical_current.to_string(),
            "model.di_junction_capacitance" => d.di_junction_capacitance.to_string(),
            "model.resonator_inductance" => d.resonator_inductance.to_string(),
            "model.resonator_capacitance" => d.resonator_capacitance.to_string(),
            "model.wiring_capacitance" => d.wiring_capacitance.to_string(),
            "model.coupling_capacitance" => d.coupling_capacitance.to_string(),
            "model.renormalize_resonator" => d.renormalize_resonator.to_string(),
            "model.nv_count" => d.nv_count.to_string(),
            "model.nv_single_coupling_hz" => d.nv_single_coupling_hz.to_string(),
            "model.dispersive_coupling_hz" => d.dispersive_coupling_hz.to_string(),
            "model.dispersive_detuning_hz" => d.dispersive_detuning_hz.to_string(),
            "rates.kappa" => self.rates.kappa.to_string(),
            "rates.gamma_10" => self.rates.gamma_10.to_string(),
            "rates.gamma_tunnel" => self.rates.gamma_tunnel.to_string(),
            "rates.gamma_phi" => self.rates.gamma_phi.to_string(),
            "rates.gamma" => "unset".into(),
            "rates.gamma_values" => list(&self.gamma_values),
            "sweep.x_start" => self.x.start.to_string(),
            "sweep.x_stop" => self.x.stop.to_string(),
            "sweep.x_points" => self.x.points.to_string(),
            "sweep.y_start" => self.y.start.to_string(),
            "sweep.y_stop" => self.y.stop.to_string(),
            "sweep.y_points" => self.y.points.to_string(),
            "sweep.t_stop" => auto(self.t_stop),
            "sweep.t_points" => self.t_points.to_string(),
            "output.name" => self.output_name.clone(),
            _ => String::new(),
        }
    }
}

/// Commented INI listing every key `scenario` reads, with its default.
pub fn print_defaults(scenario: Scenario) -> String {
    let s = Settings::defaults(scenario);
    let mut out = format!("# defaults for `{}`\n# {}\n", scenario.name(), scenario.description());
    out.push_str("# rates are in model units: g0 = 1 for resonant runs, eta = 1 otherwise\n");
    let used = scenario.keys();
    for section in SECTIONS {
        let keys: Vec<&KeySpec> = KEYS
            .iter()
            .filter(|k| used.contains(&k.name) && k.name.split('.').next() == Some(section))
            .collect();
        if keys.is_empty() {
            continue;
        }
        let _ = write!(out, "\n[{section}]\n");
        for k in keys {
            let short = &k.name[section.len() + 1..];
            let _ = writeln!(out, "# {}", k.doc);
            if k.name == "rates.gamma" {
                let _ = writeln!(out, "# {short} =");
            } else {
                let _ = writeln!(out, "{short} = {}", s.value_of(k.name));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_scenario_defaults() {
        let raw = RawConfig::parse("").unwrap();
        let s = Settings::resolve(Scenario::Fig3a, &raw).unwrap();
        assert_eq!(s.rates, DecoherenceRates::new(0.01, 0.01, 0.01, 0.01).unwrap());
        assert_eq!(s.deltas, vec![0.0, -0.1, 0.1]);
    }

    #[test]
    fn negative_rate_rejected() {
        let raw = RawConfig::parse("[rates]\nkappa = -1\n").unwrap();
        let err = Settings::resolve(Scenario::Fig2c, &raw).unwrap_err();
        assert!(err.to_string().contains("non-negative"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_key_suggests_neighbour() {
        let err = RawConfig::parse("[rates]\nkapa = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("did you mean `rates.kappa`"), "{err}");
        let err = RawConfig::parse("[rate]\nkappa = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("`rates`"), "{err}");
    }

    #[test]
    fn parse_error_has_line() {
        let err = RawConfig::parse("[model]\nk = 1\n[sweep\n").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn stray_key_and_duplicates() {
        assert!(RawConfig::parse("k = 1\n").is_err());
        assert!(RawConfig::parse("[model]\nk = 1\nk = 2\n").is_err());
    }

    #[test]
    fn joint_gamma() {
        let raw = RawConfig::parse("[rates]\ngamma = 0.02\n").unwrap();
        let s = Settings::resolve(Scenario::Fig2c, &raw).unwrap();
        assert_eq!(
            (s.rates.gamma_10, s.rates.gamma_tunnel, s.rates.gamma_phi),
            (0.02, 0.02, 0.02)
        );
        let raw = RawConfig::parse("[rates]\ngamma = 0.02\ngamma_phi = 0.1\n").unwrap();
        assert!(Settings::resolve(Scenario::Fig2c, &raw).is_err());
    }

    #[test]
    fn choices_and_lists() {
        let raw = RawConfig::parse("[model]\ntarget_phase = raw\nalphas = 0.6, 0.8\n").unwrap();
        let s = Settings::resolve(Scenario::Fig3a, &raw).unwrap();
        assert_eq!(s.target_phase, TargetPhase::Raw);
        assert_eq!(s.alphas, vec![0.6, 0.8]);
        let raw = RawConfig::parse("[model]\ntarget_phase = corected\n").unwrap();
        let err = Settings::resolve(Scenario::Fig3a, &raw).unwrap_err();
        assert!(err.to_string().contains("corrected"));
    }

    #[test]
    fn defaults_round_trip() {
        for sc in Scenario::ALL {
            let text = print_defaults(sc);
            let raw = RawConfig::parse(&text).unwrap();
            assert_eq!(
                Settings::resolve(sc, &raw).unwrap(),
                Settings::defaults(sc),
                "{}",
                sc.name()
            );
        }
    }
}
