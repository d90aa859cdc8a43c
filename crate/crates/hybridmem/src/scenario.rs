//! Named scenarios: decoherence grids, fidelity traces, the device survey and
//! the dispersive-approximation check.

use hybridmem_core::device::{self, from_hz, to_hz, CbjjParams, DerivedFrequencies, NveParams, TlrParams};
use hybridmem_core::hamiltonian::ModelParams;
use hybridmem_core::lindblad::{DecoherenceRates, Diagnostics, RenormPolicy};
use hybridmem_core::protocols::{
    di_transfer, protocol_time, ri_transfer, validate_dispersive, w_state_prepare, ProtocolKind, Sampling,
    TransferMode, TransferResult, TransferSpec, WStateResult, WStateSpec,
};

use crate::config::{suggest, DiHamiltonian, Protocol, Settings};
use crate::error::{CliError, Result};
use crate::output::{format_number, Cell, Metadata, Table};
use crate::sweep::{run_ordered, Axis, SweepGrid};

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-9;
pub const EIGENVALUE_FLOOR: f64 = -1e-8;
pub const TOP_FOCK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4b,
    Fig4c,
    ParamsReport,
    ValidateDispersive,
    Custom,
}

const NUMERICS: &[&str] = &["model.dt", "model.renormalize", "model.k", "output.name"];
const DI_MODEL: &[&str] = &[
    "model.dispersive_hamiltonian",
    "model.omega_c",
    "model.detuning",
    "model.coupling",
];
const CBJJ_RATES: &[&str] = &["rates.gamma_10", "rates.gamma_tunnel", "rates.gamma_phi", "rates.gamma"];
const XY: &[&str] = &[
    "sweep.x_start",
    "sweep.x_stop",
    "sweep.x_points",
    "sweep.y_start",
    "sweep.y_stop",
    "sweep.y_points",
];
const X: &[&str] = &["sweep.x_start", "sweep.x_stop", "sweep.x_points"];
const TRACE: &[&str] = &["sweep.t_stop", "sweep.t_points"];
const DEVICE: &[&str] = &[
    "model.bias_ratio",
    "model.critical_current",
    "model.junction_capacitance",
    "model.di_critical_current",
    "model.di_junction_capacitance",
    "model.resonator_inductance",
    "model.resonator_capacitance",
    "model.wiring_capacitance",
    "model.coupling_capacitance",
    "model.renormalize_resonator",
    "model.nv_count",
    "model.nv_single_coupling_hz",
    "model.dispersive_coupling_hz",
    "model.dispersive_detuning_hz",
];

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Fig2c,
        Scenario::Fig2d,
        Scenario::Fig3a,
        Scenario::Fig3b,
        Scenario::Fig4b,
        Scenario::Fig4c,
        Scenario::ParamsReport,
        Scenario::ValidateDispersive,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2c => "fig2c",
            Scenario::Fig2d => "fig2d",
            Scenario::Fig3a => "fig3a",
            Scenario::Fig3b => "fig3b",
            Scenario::Fig4b => "fig4b",
            Scenario::Fig4c => "fig4c",
            Scenario::ParamsReport => "params-report",
            Scenario::ValidateDispersive => "validate-dispersive",
            Scenario::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Fig2c => "resonant transfer fidelity at t_R over kappa/g0 (x) and gamma/g0 (y)",
            Scenario::Fig2d => {
                "dispersive transfer fidelity at t_D over gamma_10/eta = Gamma_1/eta (x) and gamma_phi/eta (y)"
            }
            Scenario::Fig3a => "resonant transfer fidelity against g0 t, one curve per delta",
            Scenario::Fig3b => "dispersive transfer fidelity against eta t, one curve per alpha",
            Scenario::Fig4b => "W-state fidelity against eta t, one curve per joint CBJJ rate",
            Scenario::Fig4c => "W-state fidelity at the gating time over gamma/eta (x)",
            Scenario::ParamsReport => "frequencies, couplings and leakage from circuit parameters",
            Scenario::ValidateDispersive => "full three-body dynamics against the effective exchange",
            Scenario::Custom => "fidelity trace for any protocol with explicit rates",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CliError::Unknown {
                what: "scenario",
                name: name.to_string(),
                suggestion: suggest(name, Self::ALL.iter().map(|s| s.name())),
            })
    }

    /// Config keys this scenario reads.
    pub fn keys(self) -> Vec<&'static str> {
        let mut k: Vec<&'static str> = Vec::new();
        let mut add = |xs: &[&'static str]| k.extend_from_slice(xs);
        match self {
            Scenario::Fig2c => {
                add(&["model.alphas", "model.fock_cutoff", "model.target_phase"]);
                add(XY);
                add(NUMERICS);
            }
            Scenario::Fig2d => {
                add(&["model.alphas", "model.target_phase"]);
                add(DI_MODEL);
                add(XY);
                add(NUMERICS);
            }
            Scenario::Fig3a => {
                add(&[
                    "model.alphas",
                    "model.deltas",
                    "model.fock_cutoff",
                    "model.target_phase",
                    "rates.kappa",
                ]);
                add(CBJJ_RATES);
                add(TRACE);
                add(NUMERICS);
            }
            Scenario::Fig3b => {
                add(&["model.alphas", "model.target_phase"]);
                add(DI_MODEL);
                add(CBJJ_RATES);
                add(TRACE);
                add(NUMERICS);
            }
            Scenario::Fig4b => {
                add(&["model.ensembles", "rates.gamma_values"]);
                add(TRACE);
                add(NUMERICS);
            }
            Scenario::Fig4c => {
                add(&["model.ensembles"]);
                add(X);
                add(NUMERICS);
            }
            Scenario::ParamsReport => {
                add(DEVICE);
                add(&["output.name"]);
            }
            Scenario::ValidateDispersive => {
                add(&[
                    "model.omega_c",
                    "model.detuning",
                    "model.coupling_ratios",
                    "model.duration",
                    "model.fock_cutoff",
                    "output.name",
                ]);
            }
            Scenario::Custom => {
                add(&[
                    "model.protocol",
                    "model.alphas",
                    "model.deltas",
                    "model.fock_cutoff",
                    "model.target_phase",
                    "model.ensembles",
                    "rates.kappa",
                ]);
                add(DI_MODEL);
                add(CBJJ_RATES);
                add(TRACE);
                add(NUMERICS);
            }
        }
        k
    }
}

/// A cell whose diagnostics exceeded the hygiene limits.
#[derive(Clone, Debug, PartialEq)]
pub struct HygieneFailure {
    pub cell: String,
    pub message: String,
}

/// Everything a scenario produces before it is written out.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub table: Table,
    pub metadata: Metadata,
    pub failures: Vec<HygieneFailure>,
}

/// Violated hygiene limit, if any.
pub fn hygiene(d: &Diagnostics) -> Option<String> {
    let mut bad = Vec::new();
    if !(d.trace_error <= TRACE_TOL) {
        bad.push(format!("trace error {:.3e}", d.trace_error));
    }
    if !(d.hermiticity_error <= HERMITICITY_TOL) {
        bad.push(format!("hermiticity error {:.3e}", d.hermiticity_error));
    }
    if !(d.min_eigenvalue >= EIGENVALUE_FLOOR) {
        bad.push(format!("min eigenvalue {:.3e}", d.min_eigenvalue));
    }
    if let Some(p) = d.top_fock_population.filter(|p| !(*p <= TOP_FOCK_TOL)) {
        bad.push(format!("top Fock population {p:.3e}"));
    }
    (!bad.is_empty()).then(|| bad.join(", "))
}

fn diagnostics_cells(d: &Diagnostics) -> Vec<Cell> {
    vec![
        d.trace_error.into(),
        d.hermiticity_error.into(),
        d.min_eigenvalue.into(),
        d.top_fock_population.into(),
    ]
}

const DIAGNOSTIC_COLUMNS: [&str; 4] = [
    "trace_error",
    "hermiticity_error",
    "min_eigenvalue",
    "top_fock_population",
];

/// Short label for a parameter value in a column name.
pub fn label(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn renorm(s: &Settings) -> RenormPolicy {
    if s.renormalize {
        RenormPolicy::TraceEachRecord
    } else {
        RenormPolicy::Off
    }
}

fn dispersive_mode(s: &Settings) -> TransferMode {
    match s.dispersive_hamiltonian {
        DiHamiltonian::Effective => TransferMode::Dispersive,
        DiHamiltonian::Full => {
            let mut p = ModelParams::symmetric_dispersive(s.omega_c, s.detuning, s.coupling);
            p.n_max = s.fock_cutoff;
            TransferMode::DispersiveFull(p)
        }
    }
}

fn transfer_spec(s: &Settings, alpha: f64, mode: TransferMode, rates: DecoherenceRates) -> Result<TransferSpec> {
    let mut spec = TransferSpec::with_real_alpha(alpha, mode).map_err(CliError::Model)?;
    spec.rates = rates;
    spec.k = s.k;
    spec.max_dt = s.dt;
    spec.phase = s.target_phase;
    spec.fock_cutoff = s.fock_cutoff;
    spec.renorm = renorm(s);
    Ok(spec)
}

fn single_alpha(s: &Settings) -> Result<f64> {
    match s.alphas.as_slice() {
        [a] => Ok(*a),
        _ => Err(CliError::Value {
            key: "model.alphas".into(),
            message: "grid scenarios take exactly one alpha".into(),
        }),
    }
}

fn common_metadata(scenario: Scenario, s: &Settings) -> Metadata {
    let mut m = Metadata::default();
    m.set("scenario", scenario.name());
    m.set("version", crate::output::version());
    for key in scenario.keys() {
        m.set(format!("param.{key}"), s.value_of(key));
    }
    m.set("renorm_policy", if s.renormalize { "trace-each-record" } else { "off" });
    m
}

fn record_diagnostics(m: &mut Metadata, prefix: &str, d: &Diagnostics) {
    m.set(format!("{prefix}trace_error"), format_number(d.trace_error));
    m.set(format!("{prefix}hermiticity_error"), format_number(d.hermiticity_error));
    m.set(format!("{prefix}min_eigenvalue"), format_number(d.min_eigenvalue));
    if let Some(p) = d.top_fock_population {
        m.set(format!("{prefix}top_fock_population"), format_number(p));
    }
}

fn finish(mut out: RunOutput, worst: Diagnostics) -> RunOutput {
    record_diagnostics(&mut out.metadata, "worst_", &worst);
    out.metadata
        .set("diagnostics", if out.failures.is_empty() { "pass" } else { "fail" });
    out
}

/// Runs `scenario` on `pool`.
pub fn run(scenario: Scenario, s: &Settings, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    match scenario {
        Scenario::Fig2c => fig2c(s, pool),
        Scenario::Fig2d => fig2d(s, pool),
        Scenario::Fig3a => resonant_traces(scenario, s, pool, s.rates),
        Scenario::Fig3b => dispersive_traces(scenario, s, pool),
        Scenario::Fig4b => {
            let rates = s
                .gamma_values
                .iter()
                .map(|&g| DecoherenceRates::cbjj_uniform(0.0, g).map(|r| (format!("gamma_{}", label(g)), r)))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(CliError::Model)?;
            w_traces(scenario, s, pool, rates)
        }
        Scenario::Fig4c => fig4c(s, pool),
        Scenario::ParamsReport => params_report(s),
        Scenario::ValidateDispersive => dispersive_check(s, pool),
        Scenario::Custom => match s.protocol {
            Protocol::Resonant => resonant_traces(scenario, s, pool, s.rates),
            Protocol::Dispersive => dispersive_traces(scenario, s, pool),
            Protocol::WState => w_traces(scenario, s, pool, vec![("rates".into(), s.rates)]),
        },
    }
}

struct GridCell {
    fidelity: f64,
    extra: Vec<Cell>,
    diagnostics: Diagnostics,
    dt: f64,
}

fn run_grid(
    scenario: Scenario,
    s: &Settings,
    pool: &rayon::ThreadPool,
    grid: SweepGrid,
    extra_columns: &[&str],
    cell: impl Fn(&[f64]) -> hybridmem_core::Result<GridCell> + Sync,
) -> Result<RunOutput> {
    let coords = grid.cells();
    let describe = |i: usize, c: &[f64]| {
        let parts: Vec<String> = grid
            .axes
            .iter()
            .zip(c)
            .map(|(a, v)| format!("{} = {v}", a.name))
            .collect();
        format!("cell {i} ({})", parts.join(", "))
    };
    let results = run_ordered(pool, &coords, |i, c| {
        cell(c).map_err(|e| CliError::from_core(describe(i, c), e))
    })?;

    let mut header: Vec<String> = grid.axes.iter().map(|a| a.name.clone()).collect();
    header.push("fidelity".into());
    header.extend(extra_columns.iter().map(|c| c.to_string()));
    header.extend(DIAGNOSTIC_COLUMNS.iter().map(|c| c.to_string()));
    let mut out = RunOutput {
        table: Table::new(header),
        metadata: common_metadata(scenario, s),
        failures: Vec::new(),
    };
    let mut worst = Diagnostics::clean();
    for (i, (c, r)) in coords.iter().zip(&results).enumerate() {
        let mut row: Vec<Cell> = c.iter().map(|&x| x.into()).collect();
        row.push(r.fidelity.into());
        row.extend(r.extra.iter().cloned());
        row.extend(diagnostics_cells(&r.diagnostics));
        out.table.push(row);
        worst = worst.worst(r.diagnostics);
        if let Some(message) = hygiene(&r.diagnostics) {
            out.failures.push(HygieneFailure {
                cell: describe(i, c),
                message,
            });
        }
    }
    out.metadata.set("cells", results.len());
    if let Some(r) = results.first() {
        out.metadata.set("dt", format_number(r.dt));
    }
    Ok(finish(out, worst))
}

fn fig2c(s: &Settings, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let alpha = single_alpha(s)?;
    let grid = SweepGrid::new(vec![Axis::new("kappa_over_g0", s.x), Axis::new("gamma_over_g0", s.y)])?;
    let base = transfer_spec(s, alpha, TransferMode::Resonant, DecoherenceRates::zero())?;
    let mut out = run_grid(Scenario::Fig2c, s, pool, grid, &[], |c| {
        let mut spec = base.clone();
        spec.rates = DecoherenceRates::new(c[0], c[1], c[1], c[1])?;
        let r = ri_transfer(&spec)?;
        Ok(GridCell {
            fidelity: r.fidelity_at_protocol_time,
            extra: Vec::new(),
            diagnostics: r.diagnostics,
            dt: r.dt,
        })
    })?;
    out.metadata.set(
        "protocol_time",
        format_number(base.protocol_time().map_err(CliError::Model)?),
    );
    Ok(out)
}

fn fig2d(s: &Settings, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let alpha = single_alpha(s)?;
    let grid = SweepGrid::new(vec![
        Axis::new("gamma_10_over_eta", s.x),
        Axis::new("gamma_phi_over_eta", s.y),
    ])?;
    let base = transfer_spec(s, alpha, dispersive_mode(s), DecoherenceRates::zero())?;
    let mut out = run_grid(Scenario::Fig2d, s, pool, grid, &[], |c| {
        let mut spec = base.clone();
        spec.rates = DecoherenceRates::new(0.0, c[0], c[0], c[1])?;
        let r = di_transfer(&spec)?;
        Ok(GridCell {
            fidelity: r.fidelity_at_protocol_time,
            extra: Vec::new(),
            diagnostics: r.diagnostics,
            dt: r.dt,
        })
    })?;
    out.metadata.set(
        "protocol_time",
        format_number(base.protocol_time().map_err(CliError::Model)?),
    );
    Ok(out)
}

fn fig4c(s: &Settings, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let grid = SweepGrid::new(vec![Axis::new("gamma_over_eta", s.x)])?;
    let base = w_spec(s, DecoherenceRates::zero(), None)?;
    let mut out = run_grid(
        Scenario::Fig4c,
        s,
        pool,
        grid,
        &["conditional_fidelity", "success_probability"],
        |c| {
            let mut spec = base.clone();
            spec.rates = DecoherenceRates::cbjj_uniform(0.0, c[0])?;
            let r = w_state_prepare(&spec)?;
            Ok(GridCell {
                fidelity: r.unconditional.fidelity_at_protocol_time,
                extra: vec![r.conditional_fidelity_at_gating.into(), r.success_probability.into()],
                diagnostics: r.unconditional.diagnostics,
                dt: r.unconditional.dt,
            })
        },
    )?;
    out.metadata.set("gating_time", format_number(base.gating_time()));
    Ok(out)
}

fn sampling(s: &Settings, protocol_time: f64) -> Result<Sampling> {
    Sampling::new(s.t_stop.unwrap_or(3.0 * protocol_time), s.t_points).map_err(CliError::Model)
}

/// Table with a shared time column and per-curve fidelity traces.
fn trace_output(scenario: Scenario, s: &Settings, time_column: &str, curves: &[(String, TransferResult)]) -> RunOutput {
    let mut header = vec![time_column.to_string()];
    header.extend(curves.iter().map(|(l, _)| format!("fidelity_{l}")));
    let mut out = RunOutput {
        table: Table::new(header),
        metadata: common_metadata(scenario, s),
        failures: Vec::new(),
    };
    let times = &curves[0].1.times;
    for (i, t) in times.iter().enumerate() {
        let mut row = vec![Cell::from(*t)];
        row.extend(curves.iter().map(|(_, r)| Cell::from(r.fidelities[i])));
        out.table.push(row);
    }
    for (l, r) in curves {
        curve_metadata(&mut out, l, r);
    }
    out
}

fn curve_metadata(out: &mut RunOutput, l: &str, r: &TransferResult) {
    let m = &mut out.metadata;
    m.set(format!("curve.{l}.protocol_time"), format_number(r.protocol_time));
    m.set(
        format!("curve.{l}.fidelity_at_protocol_time"),
        format_number(r.fidelity_at_protocol_time),
    );
    m.set(format!("curve.{l}.peak_fidelity"), format_number(r.peak_fidelity));
    m.set(format!("curve.{l}.peak_time"), format_number(r.peak_time));
    m.set(format!("curve.{l}.dt"), format_number(r.dt));
    record_diagnostics(m, &format!("curve.{l}."), &r.diagnostics);
    if let Some(message) = hygiene(&r.diagnostics) {
        out.failures.push(HygieneFailure {
            cell: format!("curve {l}"),
            message,
        });
    }
}

fn worst_of<'a>(rs: impl IntoIterator<Item = &'a TransferResult>) -> Diagnostics {
    rs.into_iter()
        .map(|r| r.diagnostics)
        .fold(Diagnostics::clean(), Diagnostics::worst)
}

fn resonant_traces(
    scenario: Scenario,
    s: &Settings,
    pool: &rayon::ThreadPool,
    rates: DecoherenceRates,
) -> Result<RunOutput> {
    let mut specs = Vec::new();
    for &a in &s.alphas {
        for &d in &s.deltas {
            let mut spec = transfer_spec(s, a, TransferMode::Resonant, rates)?;
            spec.delta = d;
            let l = if s.alphas.len() > 1 {
                format!("alpha_{}_delta_{}", label(a), label(d))
            } else {
                format!("delta_{}", label(d))
            };
            specs.push((l, spec));
        }
    }
    let t_r = protocol_time(ProtocolKind::Resonant, s.k, 1.0, 0);
    let sampling = sampling(s, t_r)?;
    let curves = run_ordered(pool, &specs, |_, (l, spec)| {
        let mut spec = spec.clone();
        spec.sampling = Some(sampling);
        ri_transfer(&spec)
            .map(|r| (l.clone(), r))
            .map_err(|e| CliError::from_core(format!("curve {l}"), e))
    })?;
    let out = trace_output(scenario, s, "g0_t", &curves);
    let worst = worst_of(curves.iter().map(|(_, r)| r));
    Ok(finish(out, worst))
}

fn dispersive_traces(scenario: Scenario, s: &Settings, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let mode = dispersive_mode(s);
    let specs = s
        .alphas
        .iter()
        .map(|&a| Ok((format!("alpha_{}", label(a)), transfer_spec(s, a, mode, s.rates)?)))
        .collect::<Result<Vec<_>>>()?;
    let t_d = specs[0].1.protocol_time().map_err(CliError::Model)?;
    let sampling = sampling(s, t_d)?;
    let curves = run_ordered(pool, &specs, |_, (l, spec)| {
        let mut spec = spec.clone();
        spec.sampling = Some(sampling);
        di_transfer(&spec)
            .map(|r| (l.clone(), r))
            .map_err(|e| CliError::from_core(format!("curve {l}"), e))
    })?;
    let mut out = trace_output(scenario, s, "eta_t", &curves);
    if let TransferMode::DispersiveFull(p) = mode {
        out.metadata
            .set("eta", format_number(p.eta().map_err(CliError::Model)?));
    }
    let worst = worst_of(curves.iter().map(|(_, r)| r));
    Ok(finish(out, worst))
}

fn w_spec(s: &Settings, rates: DecoherenceRates, sampling: Option<Sampling>) -> Result<WStateSpec> {
    let mut spec = WStateSpec::new(s.ensembles, rates).map_err(CliError::Model)?;
    spec.k = s.k;
    spec.max_dt = s.dt;
    spec.renorm = renorm(s);
    spec.sampling = sampling;
    Ok(spec)
}

fn w_traces(
    scenario: Scenario,
    s: &Settings,
    pool: &rayon::ThreadPool,
    curves: Vec<(String, DecoherenceRates)>,
) -> Result<RunOutput> {
    let t_w = protocol_time(ProtocolKind::WState, s.k, 1.0, s.ensembles);
    let sampling = sampling(s, t_w)?;
    let results: Vec<(String, WStateResult)> = run_ordered(pool, &curves, |_, (l, rates)| {
        let spec = w_spec(s, *rates, Some(sampling))?;
        w_state_prepare(&spec)
            .map(|r| (l.clone(), r))
            .map_err(|e| CliError::from_core(format!("curve {l}"), e))
    })?;

    let mut header = vec!["eta_t".to_string()];
    for (l, _) in &results {
        header.push(format!("fidelity_{l}"));
        header.push(format!("conditional_fidelity_{l}"));
        header.push(format!("success_probability_{l}"));
    }
    let mut out = RunOutput {
        table: Table::new(header),
        metadata: common_metadata(scenario, s),
        failures: Vec::new(),
    };
    for (i, t) in results[0].1.unconditional.times.iter().enumerate() {
        let mut row = vec![Cell::from(*t)];
        for (_, r) in &results {
            let c = r.conditional.as_ref().expect("conditional trace requested");
            row.push(r.unconditional.fidelities[i].into());
            row.push(c.fidelities[i].into());
            row.push(c.probabilities[i].into());
        }
        out.table.push(row);
    }
    out.metadata.set("gating_time", format_number(t_w));
    for (l, r) in &results {
        curve_metadata(&mut out, l, &r.unconditional);
        out.metadata.set(
            format!("curve.{l}.success_probability"),
            format_number(r.success_probability),
        );
        if let Some(f) = r.conditional_fidelity_at_gating {
            out.metadata
                .set(format!("curve.{l}.conditional_fidelity_at_gating"), format_number(f));
        }
    }
    let worst = worst_of(results.iter().map(|(_, r)| &r.unconditional));
    Ok(finish(out, worst))
}

fn params_report(s: &Settings) -> Result<RunOutput> {
    let d = &s.device;
    let model = CliError::Model;
    let tlr = TlrParams::new(
        d.resonator_inductance,
        d.resonator_capacitance,
        d.wiring_capacitance,
        d.coupling_capacitance,
        None,
    )
    .map_err(model)?;
    let nve = NveParams::new(d.nv_count, from_hz(d.nv_single_coupling_hz)).map_err(model)?;
    let ri_junction =
        CbjjParams::with_bias_ratio(d.bias_ratio, d.critical_current, d.junction_capacitance).map_err(model)?;
    let di_junction =
        CbjjParams::with_bias_ratio(d.bias_ratio, d.di_critical_current, d.di_junction_capacitance).map_err(model)?;
    let ri = DerivedFrequencies::compute(&ri_junction, &tlr, &nve, d.renormalize_resonator).map_err(model)?;
    let di = DerivedFrequencies::compute(&di_junction, &tlr, &nve, d.renormalize_resonator).map_err(model)?;
    let g = from_hz(d.dispersive_coupling_hz);
    let delta = from_hz(d.dispersive_detuning_hz);
    let eta = device::effective_eta(g, g, delta, delta).map_err(model)?;

    let mut out = RunOutput {
        table: Table::new(["case", "quantity", "angular_rad_per_s", "frequency_hz"]),
        metadata: common_metadata(Scenario::ParamsReport, s),
        failures: Vec::new(),
    };
    let mut rows = |case: &str, f: &DerivedFrequencies| {
        for (name, w) in [
            ("omega_p", f.omega_p),
            ("omega_10", f.omega_10),
            ("omega_21", f.omega_21),
            ("level_separation", f.level_separation),
            ("omega_c", f.omega_c),
            ("g_tc", f.g_tc),
            ("g_td", f.g_td),
            ("delta_tc", f.delta_tc),
            ("delta_td", f.delta_td),
        ] {
            out.table
                .push(vec![case.into(), name.into(), w.into(), to_hz(w).into()]);
        }
        out.table
            .push(vec![case.into(), "phase_delta0".into(), f.phase.into(), Cell::Empty]);
        out.table
            .push(vec![case.into(), "leakage".into(), f.leakage.into(), Cell::Empty]);
    };
    rows("resonant", &ri);
    rows("dispersive", &di);
    out.table.push(vec![
        "dispersive".into(),
        "eta".into(),
        eta.eta.into(),
        to_hz(eta.eta).into(),
    ]);
    out.table.push(vec![
        "dispersive".into(),
        "dispersive_ratio".into(),
        eta.validity.into(),
        Cell::Empty,
    ]);
    out.metadata.set("diagnostics", "pass");
    Ok(out)
}

fn dispersive_check(s: &Settings, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let reports = run_ordered(pool, &s.coupling_ratios, |_, &r| {
        let mut p = ModelParams::symmetric_dispersive(s.omega_c, s.detuning, r * s.detuning.abs());
        p.n_max = s.fock_cutoff;
        validate_dispersive(&p, s.duration).map_err(CliError::Model)
    })?;
    let mut out = RunOutput {
        table: Table::new([
            "coupling_ratio",
            "coupling",
            "detuning",
            "omega_c",
            "eta",
            "duration",
            "samples",
            "max_cbjj_deviation",
            "real_photon_population",
            "photon_bound",
            "max_bare_photon_population",
            "within_weak_coupling_bounds",
        ]),
        metadata: common_metadata(Scenario::ValidateDispersive, s),
        failures: Vec::new(),
    };
    for (r, rep) in s.coupling_ratios.iter().zip(&reports) {
        let bound = r * r;
        let ok = rep.max_cbjj_deviation <= 0.01 && rep.real_photon_population <= 1.1 * bound;
        out.table.push(vec![
            (*r).into(),
            rep.params.g_tc.into(),
            rep.params.delta_tc().into(),
            rep.params.omega_c.into(),
            rep.eta.into(),
            rep.duration.into(),
            (rep.samples as f64).into(),
            rep.max_cbjj_deviation.into(),
            rep.real_photon_population.into(),
            bound.into(),
            rep.max_bare_photon_population.into(),
            (if ok { "true" } else { "false" }).into(),
        ]);
    }
    out.metadata.set("diagnostics", "pass");
    Ok(out)
}
