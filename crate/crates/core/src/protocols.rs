//! Storage protocols: resonant (RI) and dispersive (DI) transfer of a CBJJ
//! state into an NVE, and W-state preparation over several ensembles.
//!
//! Exact closed-system transfer leaves a fixed local phase on the stored
//! branch: `−β` after the resonant sequence and `−iβ` after the exchange.
//! [`TargetPhase::Corrected`] absorbs that phase into the target so a perfect
//! transfer scores one; [`TargetPhase::Raw`] compares against `α|0⟩ + β|1⟩`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, sin, sqrt};
use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    h_dispersive, h_exchange, h_multi, h_resonant, h_total, hybrid_layout, multi_layout, nve_label, pair_layout,
    ModelParams, CBJJ, TLR,
};
use crate::hilbert::{
    embed_at, fidelity, project_with_threshold, qubit_ops, DensityMatrix, Ket, Operator, SpaceLayout,
    DEFAULT_BRANCH_THRESHOLD,
};
use crate::linalg::{CVector, C64, ONE, ZERO};
use crate::lindblad::{
    evolve_rk4_at, stable_step, standard_channels, CollapseChannel, DecoherenceRates, Diagnostics, RenormPolicy,
};

/// Default integration step in model units (1/g₀ or 1/η).
pub const DEFAULT_MAX_DT: f64 = 0.001;
/// Largest δ accepted by the resonant protocol.
pub const MAX_MISMATCH: f64 = 0.5;
/// Ensemble counts accepted by the W-state protocol.
pub const W_STATE_RANGE: core::ops::RangeInclusive<usize> = 2..=6;

const NORM_TOL: f64 = 1e-12;

/// Which timing rule applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    Resonant,
    Dispersive,
    WState,
}

/// `t_R = (2k+1)π/(√2 g₀)`, `t_D = (2k+1)π/(2η)` or `t_W = (2k+1)π/(2√N η)`.
///
/// `rate` is g₀ for the resonant protocol and η otherwise; `n` is only read
/// for the W state.
pub fn protocol_time(kind: ProtocolKind, k: u32, rate: f64, n: usize) -> f64 {
    let odd = (2 * k + 1) as f64;
    match kind {
        ProtocolKind::Resonant => odd * PI / (sqrt(2.0) * rate),
        ProtocolKind::Dispersive => odd * PI / (2.0 * rate),
        ProtocolKind::WState => odd * PI / (2.0 * sqrt(n as f64) * rate),
    }
}

/// Hamiltonian used for a transfer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransferMode {
    /// `h_resonant` with g_tc = g₀ = 1 and g_td = (1 + δ)g₀.
    Resonant,
    /// `h_exchange(1)` on the CBJJ–NVE pair.
    Dispersive,
    /// Vacuum-reduced second-order Hamiltonian with Stark shifts, in the lab
    /// frame; times are in units of the η the parameters imply.
    DispersiveFull(ModelParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TargetPhase {
    #[default]
    Corrected,
    Raw,
}

/// Uniform time grid `[0, t_max]` with `points` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampling {
    pub t_max: f64,
    pub points: usize,
}

impl Sampling {
    pub fn new(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sampling needs t_max > 0 and at least 2 points, got t_max = {t_max}, points = {points}"
            )));
        }
        Ok(Self { t_max, points })
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.t_max / (self.points - 1) as f64;
        (0..self.points).map(|i| i as f64 * step).collect()
    }
}

/// Input of [`ri_transfer`] and [`di_transfer`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpec {
    pub alpha: C64,
    pub beta: C64,
    pub mode: TransferMode,
    /// (g_td − g_tc)/g₀; resonant mode only.
    pub delta: f64,
    pub rates: DecoherenceRates,
    pub k: u32,
    /// Fidelity trace; `None` evaluates the protocol time only.
    pub sampling: Option<Sampling>,
    pub max_dt: f64,
    pub phase: TargetPhase,
    /// Highest Fock level kept for the resonator.
    pub fock_cutoff: usize,
    pub renorm: RenormPolicy,
}

impl TransferSpec {
    pub fn new(alpha: C64, beta: C64, mode: TransferMode) -> Result<Self> {
        let spec = Self {
            alpha,
            beta,
            mode,
            delta: 0.0,
            rates: DecoherenceRates::zero(),
            k: 0,
            sampling: None,
            max_dt: DEFAULT_MAX_DT,
            phase: TargetPhase::Corrected,
            fock_cutoff: 2,
            renorm: RenormPolicy::Off,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Real input `α|0⟩ + √(1−α²)|1⟩`.
    pub fn with_real_alpha(alpha: f64, mode: TransferMode) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Self::new(C64::from(alpha), C64::from(sqrt(1.0 - alpha * alpha)), mode)
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "|alpha|^2 + |beta|^2 = {norm}, expected 1"
            )));
        }
        if !(self.delta.abs() <= MAX_MISMATCH) {
            return Err(Error::InvalidParameter(format!(
                "coupling mismatch {} outside [-{MAX_MISMATCH}, {MAX_MISMATCH}]",
                self.delta
            )));
        }
        if self.delta != 0.0 && self.mode != TransferMode::Resonant {
            return Err(Error::InvalidParameter(
                "coupling mismatch only applies to resonant transfer".into(),
            ));
        }
        if !(self.max_dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.max_dt
            )));
        }
        if self.fock_cutoff < 1 {
            return Err(Error::InvalidParameter("Fock cutoff must be at least 1".into()));
        }
        self.rates.validate()
    }

    /// Protocol time in model units.
    pub fn protocol_time(&self) -> Result<f64> {
        Ok(match self.mode {
            TransferMode::Resonant => protocol_time(ProtocolKind::Resonant, self.k, 1.0, 0),
            TransferMode::Dispersive => protocol_time(ProtocolKind::Dispersive, self.k, 1.0, 0),
            TransferMode::DispersiveFull(p) => protocol_time(ProtocolKind::Dispersive, self.k, p.eta()?, 0),
        })
    }
}

/// Fidelity trace of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferResult {
    pub times: Vec<f64>,
    pub fidelities: Vec<f64>,
    pub protocol_time: f64,
    pub fidelity_at_protocol_time: f64,
    /// Largest fidelity over the trace and the protocol time.
    pub peak_fidelity: f64,
    pub peak_time: f64,
    /// Worst case over every recorded state.
    pub diagnostics: Diagnostics,
    /// Integration step actually used.
    pub dt: f64,
}

/// Stored state with the closed-system phase optionally absorbed.
///
/// Resonant layouts give `α|0,0,0⟩ − β|0,0,1⟩`, pair layouts
/// `α|0,0⟩ − iβ|0,1⟩`; with [`TargetPhase::Raw`] the stored branch carries
/// `+β`.
pub fn target_state(alpha: C64, beta: C64, layout: &SpaceLayout, phase: TargetPhase) -> Result<Ket> {
    let resonant = layout.slot_of(TLR).is_some();
    let stored = match (phase, resonant) {
        (TargetPhase::Raw, _) => beta,
        (TargetPhase::Corrected, true) => -beta,
        (TargetPhase::Corrected, false) => C64::new(0.0, -1.0) * beta,
    };
    let zeros = vec![0; layout.len()];
    let mut one = zeros.clone();
    *one.last_mut().expect("non-empty layout") = 1;
    if beta == ZERO {
        return Ket::superposition(layout, &[(alpha, &zeros)]);
    }
    if alpha == ZERO {
        return Ket::superposition(layout, &[(stored, &one)]);
    }
    Ket::superposition(layout, &[(alpha, &zeros), (stored, &one)])
}

/// Input state `(α|0⟩ + β|1⟩)_C` with every other subsystem in |0⟩.
fn input_state(alpha: C64, beta: C64, layout: &SpaceLayout) -> Result<DensityMatrix> {
    let zeros = vec![0; layout.len()];
    let mut one = zeros.clone();
    one[layout.slot_of(CBJJ).expect("cbjj slot")] = 1;
    let terms: Vec<(C64, &[usize])> = [(alpha, zeros.as_slice()), (beta, one.as_slice())]
        .into_iter()
        .filter(|(c, _)| *c != ZERO)
        .collect();
    Ok(DensityMatrix::pure(&Ket::superposition(layout, &terms)?))
}

/// Sample times merged with the protocol time.
struct Schedule {
    times: Vec<f64>,
    /// Index in `times` of each trace sample.
    trace: Vec<usize>,
    protocol: usize,
}

impl Schedule {
    fn new(sampling: Option<Sampling>, protocol_time: f64) -> Self {
        let grid = sampling.map(|s| s.times()).unwrap_or_default();
        let tol = 1e-12 * protocol_time.max(1.0);
        let mut times = Vec::with_capacity(grid.len() + 1);
        let mut trace = Vec::with_capacity(grid.len());
        let mut protocol = None;
        let push_protocol = |times: &mut Vec<f64>, protocol: &mut Option<usize>| {
            times.push(protocol_time);
            *protocol = Some(times.len() - 1);
        };
        for t in grid {
            if protocol.is_none() {
                if (t - protocol_time).abs() <= tol {
                    push_protocol(&mut times, &mut protocol);
                    trace.push(times.len() - 1);
                    continue;
                }
                if t > protocol_time {
                    push_protocol(&mut times, &mut protocol);
                }
            }
            times.push(t);
            trace.push(times.len() - 1);
        }
        if protocol.is_none() {
            push_protocol(&mut times, &mut protocol);
        }
        Self {
            times,
            trace,
            protocol: protocol.expect("protocol time scheduled"),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_transfer(
    rho0: &DensityMatrix,
    h: &Operator,
    channels: &[CollapseChannel],
    target: impl Fn(f64) -> Ket,
    protocol_time: f64,
    sampling: Option<Sampling>,
    max_dt: f64,
    renorm: RenormPolicy,
) -> Result<(TransferResult, Vec<DensityMatrix>, Schedule)> {
    let schedule = Schedule::new(sampling, protocol_time);
    let traj = evolve_rk4_at(rho0, h, channels, &schedule.times, max_dt, renorm)?;
    let all: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| fidelity(&target(t), rho))
        .collect::<Result<_>>()?;
    let (peak_idx, peak) =
        all.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, f)| if f > best.1 { (i, f) } else { best },
        );
    let result = TransferResult {
        times: schedule.trace.iter().map(|&i| traj.times[i]).collect(),
        fidelities: schedule.trace.iter().map(|&i| all[i]).collect(),
        protocol_time,
        fidelity_at_protocol_time: all[schedule.protocol],
        peak_fidelity: peak,
        peak_time: traj.times[peak_idx],
        diagnostics: traj.worst_diagnostics(),
        dt: traj.dt,
    };
    Ok((result, traj.states, schedule))
}

/// Resonant transfer through a real photon in the resonator.
///
/// Evolves `(α|0⟩ + β|1⟩)_C ⊗ |0⟩_T ⊗ |0⟩_D` under
/// `h_resonant(1, 1 + δ)` with all four decoherence channels.
pub fn ri_transfer(spec: &TransferSpec) -> Result<TransferResult> {
    spec.validate()?;
    if spec.mode != TransferMode::Resonant {
        return Err(Error::InvalidParameter("ri_transfer needs the resonant mode".into()));
    }
    let layout = hybrid_layout(spec.fock_cutoff)?;
    let h = h_resonant(1.0, 1.0 + spec.delta, spec.fock_cutoff)?;
    let channels = standard_channels(&spec.rates, &layout)?;
    let rho0 = input_state(spec.alpha, spec.beta, &layout)?;
    let target = target_state(spec.alpha, spec.beta, &layout, spec.phase)?;
    let t_p = spec.protocol_time()?;
    let max_dt = stable_step(&h, spec.max_dt);
    Ok(run_transfer(
        &rho0,
        &h,
        &channels,
        |_| target.clone(),
        t_p,
        spec.sampling,
        max_dt,
        spec.renorm,
    )?
    .0)
}

/// Dispersive transfer through virtual photons.
///
/// The resonator never appears: only the CBJJ channels act, and κ is
/// ignored.
pub fn di_transfer(spec: &TransferSpec) -> Result<TransferResult> {
    spec.validate()?;
    let layout = pair_layout();
    let h = match spec.mode {
        TransferMode::Dispersive => h_exchange(1.0),
        TransferMode::DispersiveFull(p) => h_dispersive(&p, true)?,
        TransferMode::Resonant => return Err(Error::InvalidParameter("di_transfer needs a dispersive mode".into())),
    };
    let channels = standard_channels(&spec.rates, &layout)?;
    let rho0 = input_state(spec.alpha, spec.beta, &layout)?;
    let target = target_state(spec.alpha, spec.beta, &layout, spec.phase)?;
    let t_p = spec.protocol_time()?;
    let max_dt = stable_step(&h, spec.max_dt);
    // In the lab frame the target follows the free (diagonal) evolution.
    let free: Vec<f64> = h.matrix().diagonal().iter().map(|z| z.re).collect();
    let rotating = matches!(spec.mode, TransferMode::DispersiveFull(_));
    let target_at = |t: f64| {
        if !rotating {
            return target.clone();
        }
        let amps = CVector::from_iterator(
            free.len(),
            target
                .amplitudes()
                .iter()
                .zip(&free)
                .map(|(a, &e)| a * C64::from_polar(1.0, -e * t)),
        );
        Ket::new(amps, layout.clone()).expect("unit vector")
    };
    Ok(run_transfer(&rho0, &h, &channels, target_at, t_p, spec.sampling, max_dt, spec.renorm)?.0)
}

/// Input of [`w_state_prepare`].
#[derive(Clone, Debug, PartialEq)]
pub struct WStateSpec {
    pub n: usize,
    pub eta: f64,
    pub rates: DecoherenceRates,
    /// Also report the state after reading the CBJJ out in |1⟩_c.
    pub conditional: bool,
    pub k: u32,
    pub sampling: Option<Sampling>,
    pub max_dt: f64,
    pub branch_threshold: f64,
    pub renorm: RenormPolicy,
}

impl WStateSpec {
    pub fn new(n: usize, rates: DecoherenceRates) -> Result<Self> {
        let spec = Self {
            n,
            eta: 1.0,
            rates,
            conditional: true,
            k: 0,
            sampling: None,
            max_dt: DEFAULT_MAX_DT,
            branch_threshold: DEFAULT_BRANCH_THRESHOLD,
            renorm: RenormPolicy::Off,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !W_STATE_RANGE.contains(&self.n) {
            return Err(Error::InvalidParameter(format!(
                "ensemble count {} outside {}..={}",
                self.n,
                W_STATE_RANGE.start(),
                W_STATE_RANGE.end()
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be positive, got {}",
                self.eta
            )));
        }
        if !(self.max_dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.max_dt
            )));
        }
        self.rates.validate()
    }

    pub fn gating_time(&self) -> f64 {
        protocol_time(ProtocolKind::WState, self.k, self.eta, self.n)
    }
}

/// Conditional branch aligned with the unconditional trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalTrace {
    /// Fidelity after projecting onto |1⟩_c; `None` where the branch weight is
    /// below threshold.
    pub fidelities: Vec<Option<f64>>,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WStateResult {
    /// Fidelity against |1⟩_c ⊗ |W⟩_N without readout.
    pub unconditional: TransferResult,
    pub conditional: Option<ConditionalTrace>,
    /// Weight of the |1⟩_c branch at the gating time.
    pub success_probability: f64,
    pub conditional_fidelity_at_gating: Option<f64>,
}

/// `(1/√N) Σⱼ |1…0ⱼ…1⟩`, optionally preceded by the CBJJ in |1⟩_c.
pub fn w_target(n: usize) -> Result<Ket> {
    let layout = multi_layout(n)?;
    let amp = C64::from(1.0 / sqrt(n as f64));
    let levels: Vec<Vec<usize>> = (1..=n)
        .map(|j| {
            let mut l = vec![1; n + 1];
            l[j] = 0;
            l
        })
        .collect();
    let terms: Vec<(C64, &[usize])> = levels.iter().map(|l| (amp, l.as_slice())).collect();
    Ket::superposition(&layout, &terms)
}

/// Multi-ensemble W-state preparation from `|0⟩_c |1⟩₁…|1⟩_N` under H_M
/// with CBJJ-only decoherence.
pub fn w_state_prepare(spec: &WStateSpec) -> Result<WStateResult> {
    spec.validate()?;
    let n = spec.n;
    let layout = multi_layout(n)?;
    let h = h_multi(&vec![spec.eta; n], n)?;
    let channels = standard_channels(&spec.rates, &layout)?;
    let mut start = vec![1; n + 1];
    start[0] = 0;
    let rho0 = DensityMatrix::pure(&Ket::basis(&layout, &start)?);
    let target = w_target(n)?;
    let t_w = spec.gating_time();
    // Model units are 1/η, so the default step scales with the coupling.
    let max_dt = stable_step(&h, spec.max_dt / spec.eta);
    let (unconditional, states, schedule) = run_transfer(
        &rho0,
        &h,
        &channels,
        |_| target.clone(),
        t_w,
        spec.sampling,
        max_dt,
        spec.renorm,
    )?;

    let proj = embed_at(&qubit_ops().proj1, CBJJ, &layout)?;
    let branch = |rho: &DensityMatrix| -> Result<(Option<f64>, f64)> {
        match project_with_threshold(rho, &proj, spec.branch_threshold) {
            Ok((post, p)) => Ok((Some(fidelity(&target, &post)?), p)),
            Err(Error::NegligibleBranch { probability, .. }) => Ok((None, probability)),
            Err(e) => Err(e),
        }
    };
    let (gate_f, gate_p) = branch(&states[schedule.protocol])?;
    let conditional = if spec.conditional {
        let mut fidelities = Vec::with_capacity(schedule.trace.len());
        let mut probabilities = Vec::with_capacity(schedule.trace.len());
        for &i in &schedule.trace {
            let (f, p) = branch(&states[i])?;
            fidelities.push(f);
            probabilities.push(p);
        }
        Some(ConditionalTrace {
            fidelities,
            probabilities,
        })
    } else {
        None
    };
    Ok(WStateResult {
        unconditional,
        conditional,
        success_probability: gate_p,
        conditional_fidelity_at_gating: if spec.conditional { gate_f } else { None },
    })
}

/// Closed-system comparison of the three-body Hamiltonian with the
/// effective exchange.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersiveReport {
    pub params: ModelParams,
    /// Largest g/|Δ| over the two couplings.
    pub coupling_ratio: f64,
    pub eta: f64,
    pub duration: f64,
    pub samples: usize,
    /// max_t |P₁,C(full) − cos²(ηt)|.
    pub max_cbjj_deviation: f64,
    /// Weight of photon-like dressed states in the initial state; conserved.
    pub real_photon_population: f64,
    /// max_t ⟨a†a⟩ in the bare basis, including virtual dressing.
    pub max_bare_photon_population: f64,
}

/// Evolves `|1_C, 0_T, 0_D⟩` exactly under [`h_total`] and compares the CBJJ
/// population with the `h_exchange(η)` prediction `cos²(ηt)`.
///
/// Real photons are counted with the dressed number operator: each
/// eigenvector of the Hamiltonian is assigned the rounded photon number it
/// carries, which separates photon-like states from the virtual cloud around
/// emitter-like states. `duration` defaults to `π/(2η)`.
pub fn validate_dispersive(p: &ModelParams, duration: Option<f64>) -> Result<DispersiveReport> {
    p.check_dispersive()?;
    let eta = p.eta()?;
    let duration = match duration {
        Some(d) if d > 0.0 && d.is_finite() => d,
        Some(d) => return Err(Error::InvalidParameter(format!("duration must be positive, got {d}"))),
        None if eta != 0.0 => protocol_time(ProtocolKind::Dispersive, 0, eta.abs(), 0),
        None => {
            return Err(Error::InvalidParameter(
                "duration required when the couplings vanish".into(),
            ))
        }
    };
    let h = h_total(p)?;
    let layout = h.layout().clone();
    let number_slot = layout.slot_of(TLR).expect("hybrid layout");
    let cbjj_slot = layout.slot_of(CBJJ).expect("hybrid layout");

    // Only the single-excitation sector is reachable from the initial state.
    let sector: Vec<usize> = (0..layout.total_dim())
        .filter(|&i| layout.levels_of(i).iter().sum::<usize>() == 1)
        .collect();
    let hs = h.restrict(&sector);
    let eig = SymmetricEigen::new(hs);
    let vecs = &eig.eigenvectors;
    let energies: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let photons: Vec<f64> = sector
        .iter()
        .map(|&i| layout.levels_of(i)[number_slot] as f64)
        .collect();
    let excited: Vec<bool> = sector.iter().map(|&i| layout.levels_of(i)[cbjj_slot] == 1).collect();
    let start = sector
        .iter()
        .position(|&i| i == layout.basis_index(&[1, 0, 0]).unwrap())
        .expect("in sector");
    let c0: CVector = CVector::from_iterator(sector.len(), (0..sector.len()).map(|k| vecs[(start, k)].conj()));

    let mut real_photon_population = 0.0;
    for k in 0..sector.len() {
        let n_k: f64 = (0..sector.len()).map(|i| vecs[(i, k)].norm_sqr() * photons[i]).sum();
        if libm::round(n_k) >= 1.0 {
            real_photon_population += c0[k].norm_sqr();
        }
    }

    let width = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - energies.iter().copied().fold(f64::INFINITY, f64::min);
    let spacing = if width > 0.0 { PI / (4.0 * width) } else { duration };
    let samples = (libm::ceil(duration / spacing) as usize).max(1) + 1;
    let mut max_dev: f64 = 0.0;
    let mut max_bare: f64 = 0.0;
    let mut amps = CVector::zeros(sector.len());
    for s in 0..samples {
        let t = duration * s as f64 / (samples - 1) as f64;
        let phased = CVector::from_iterator(
            sector.len(),
            (0..sector.len()).map(|k| c0[k] * C64::from_polar(1.0, -energies[k] * t)),
        );
        amps.gemv(ONE, vecs, &phased, ZERO);
        let mut p_excited = 0.0;
        let mut n_bare = 0.0;
        for (i, a) in amps.iter().enumerate() {
            let w = a.norm_sqr();
            if excited[i] {
                p_excited += w;
            }
            n_bare += w * photons[i];
        }
        let c = cos(eta * t);
        max_dev = max_dev.max((p_excited - c * c).abs());
        max_bare = max_bare.max(n_bare);
    }
    let ratio = |g: f64, d: f64| if g == 0.0 { 0.0 } else { g / d.abs() };
    Ok(DispersiveReport {
        params: *p,
        coupling_ratio: ratio(p.g_tc, p.delta_tc()).max(ratio(p.g_td, p.delta_td())),
        eta,
        duration,
        samples,
        max_cbjj_deviation: max_dev,
        real_photon_population,
        max_bare_photon_population: max_bare,
    })
}

/// `sin²(√N η t)`, the closed-system unconditional W fidelity.
pub fn w_closed_fidelity(n: usize, eta: f64, t: f64) -> f64 {
    let s = sin(sqrt(n as f64) * eta * t);
    s * s
}

/// Labels of the ensembles in a W layout, for reporting.
pub fn w_labels(n: usize) -> Vec<alloc::string::String> {
    (1..=n).map(nve_label).collect()
}
