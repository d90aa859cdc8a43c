//! Master-equation integration.
//!
//! The dissipator uses the factor-two convention
//! `D[A]ρ = 2AρA† − A†Aρ − ρA†A`, so a channel with prefactor `r/2` empties
//! its source level at rate `r`.
//!
//! [`evolve_rk4`] is the production integrator; [`evolve_exact`] propagates
//! the vectorized generator with a matrix exponential and serves as its
//! independent check.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{CBJJ, TLR};
use crate::hilbert::{annihilation, embed_at, qubit_ops, DensityMatrix, Operator, SpaceLayout};
use crate::linalg::{self, CMatrix, C64, I, ONE, ZERO};

/// Largest accepted `dt · ρ(H)`.
pub const MAX_STEP_SCALE: f64 = 0.05;
/// Largest Hilbert-space dimension accepted by the superoperator routines.
pub const LIOUVILLIAN_MAX_DIM: usize = 64;
/// Trace error or negative eigenvalue beyond which integration aborts.
pub const BREACH_TOL: f64 = 1e-6;

/// The four phenomenological rates, in model units.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecoherenceRates {
    /// TLR decay κ.
    pub kappa: f64,
    /// CBJJ spontaneous emission γ₁₀.
    pub gamma_10: f64,
    /// CBJJ tunnelling Γ₁.
    pub gamma_tunnel: f64,
    /// CBJJ pure dephasing γ_φ.
    pub gamma_phi: f64,
}

impl DecoherenceRates {
    pub fn new(kappa: f64, gamma_10: f64, gamma_tunnel: f64, gamma_phi: f64) -> Result<Self> {
        let r = Self {
            kappa,
            gamma_10,
            gamma_tunnel,
            gamma_phi,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// γ_φ = γ₁₀ = Γ₁ = `gamma`, with resonator decay `kappa`.
    pub fn cbjj_uniform(kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(kappa, gamma, gamma, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("gamma_10", self.gamma_10),
            ("gamma_tunnel", self.gamma_tunnel),
            ("gamma_phi", self.gamma_phi),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "rate {name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One `prefactor · D[operator]` term.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseChannel {
    pub operator: Operator,
    pub prefactor: f64,
}

impl CollapseChannel {
    pub fn new(operator: Operator, prefactor: f64) -> Result<Self> {
        if !(prefactor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "channel prefactor must be non-negative, got {prefactor}"
            )));
        }
        Ok(Self { operator, prefactor })
    }
}

/// Channels κ/2·D[a], (γ₁₀+Γ₁)/2·D[σ-] and γ_φ/2·D[σz] on `layout`.
///
/// The resonator channel is only added when the layout has a `tlr` slot;
/// CBJJ channels always act on the `cbjj` slot. Zero-rate channels are
/// omitted.
pub fn standard_channels(rates: &DecoherenceRates, layout: &SpaceLayout) -> Result<Vec<CollapseChannel>> {
    rates.validate()?;
    let q = qubit_ops();
    let mut out = Vec::new();
    if let Some(slot) = layout.slot_of(TLR) {
        if rates.kappa > 0.0 {
            let a = embed_at(&annihilation(layout.dims()[slot])?, TLR, layout)?;
            out.push(CollapseChannel::new(a, rates.kappa / 2.0)?);
        }
    }
    let decay = rates.gamma_10 + rates.gamma_tunnel;
    if decay > 0.0 {
        out.push(CollapseChannel::new(
            embed_at(&q.sigma_minus, CBJJ, layout)?,
            decay / 2.0,
        )?);
    }
    if rates.gamma_phi > 0.0 {
        out.push(CollapseChannel::new(
            embed_at(&q.sigma_z, CBJJ, layout)?,
            rates.gamma_phi / 2.0,
        )?);
    }
    Ok(out)
}

fn dissipate(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ad = a.adjoint();
    let ada = &ad * a;
    (a * rho * &ad).scale(2.0) - &ada * rho - rho * &ada
}

/// `D[A]ρ = 2AρA† − A†Aρ − ρA†A`.
pub fn dissipator(a: &Operator, rho: &DensityMatrix) -> Result<CMatrix> {
    check_layout(a.layout(), rho.layout())?;
    Ok(dissipate(a.matrix(), rho.matrix()))
}

fn check_layout(a: &SpaceLayout, b: &SpaceLayout) -> Result<()> {
    if a != b {
        return Err(Error::LayoutMismatch(format!("{:?} vs {:?}", a.labels(), b.labels())));
    }
    Ok(())
}

/// `−i[H, ρ] + Σ c_k D[A_k]ρ`.
pub fn master_rhs(h: &Operator, channels: &[CollapseChannel], rho: &DensityMatrix) -> Result<CMatrix> {
    check_layout(h.layout(), rho.layout())?;
    let r = rho.matrix();
    let hm = h.matrix();
    let mut out = (hm * r - r * hm) * (-I);
    for ch in channels {
        check_layout(ch.operator.layout(), rho.layout())?;
        out += dissipate(ch.operator.matrix(), r).scale(ch.prefactor);
    }
    Ok(out)
}

/// Nonzero entries `(row, col, value)` of a matrix.
type Entries = Vec<(usize, usize, C64)>;

fn entries(m: &CMatrix) -> Entries {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != ZERO {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Generator term, stored sparse when that is cheaper than a dense product.
enum Term {
    Dense(CMatrix, CMatrix),
    Sparse(Entries),
}

impl Term {
    fn new(m: CMatrix, sparse_limit: usize) -> Self {
        let e = entries(&m);
        if e.len() <= sparse_limit {
            Term::Sparse(e)
        } else {
            let adj = m.adjoint();
            Term::Dense(m, adj)
        }
    }
}

/// Precomputed generator in the form
/// `ρ̇ = −i(H_eff ρ − ρ H_eff†) + Σ J ρ J†` with `H_eff = H − i Σ c A†A`
/// and `J = √(2c) A`.
struct Generator {
    h_eff: Term,
    jumps: Vec<Term>,
    scratch: CMatrix,
}

impl Generator {
    fn new(h: &Operator, channels: &[CollapseChannel]) -> Result<Self> {
        let d = h.dim();
        let mut h_eff = h.matrix().clone();
        let mut jumps = Vec::with_capacity(channels.len());
        for ch in channels {
            check_layout(ch.operator.layout(), h.layout())?;
            if ch.prefactor == 0.0 {
                continue;
            }
            let a = ch.operator.matrix();
            h_eff -= (a.adjoint() * a) * C64::new(0.0, ch.prefactor);
            jumps.push(Term::new(a.scale(libm::sqrt(2.0 * ch.prefactor)), 2 * d));
        }
        Ok(Self {
            h_eff: Term::new(h_eff, d * d / 4),
            jumps,
            scratch: CMatrix::zeros(d, d),
        })
    }

    fn apply(&mut self, rho: &CMatrix, out: &mut CMatrix) {
        let d = rho.nrows();
        match &self.h_eff {
            Term::Dense(h, h_adj) => {
                out.gemm(-I, h, rho, ZERO);
                out.gemm(I, rho, h_adj, ONE);
            }
            Term::Sparse(h) => {
                out.fill(ZERO);
                let x = rho.as_slice();
                let y = out.as_mut_slice();
                // column-major: element (r, c) sits at r + c d
                for &(r, k, v) in h {
                    let a = -I * v;
                    let b = I * v.conj();
                    for c in 0..d {
                        y[r + c * d] += a * x[k + c * d];
                        // (ρ H†)(c, r) += ρ(c, k) conj(H(r, k))
                        y[c + r * d] += b * x[c + k * d];
                    }
                }
            }
        }
        for j in &self.jumps {
            match j {
                Term::Dense(j, jd) => {
                    self.scratch.gemm(ONE, j, rho, ZERO);
                    out.gemm(ONE, &self.scratch, jd, ONE);
                }
                Term::Sparse(e) => {
                    let x = rho.as_slice();
                    let y = out.as_mut_slice();
                    for &(r, k, a) in e {
                        for &(c, l, b) in e {
                            y[r + c * d] += a * x[k + l * d] * b.conj();
                        }
                    }
                }
            }
        }
    }
}

fn add_scaled(y: &mut CMatrix, a: C64, x: &CMatrix) {
    y.zip_apply(x, |yi, xi| *yi += a * xi);
}

/// Classical fourth-order Runge–Kutta stepper with preallocated stages.
struct Rk4 {
    gen: Generator,
    k1: CMatrix,
    k2: CMatrix,
    k3: CMatrix,
    k4: CMatrix,
    stage: CMatrix,
}

impl Rk4 {
    fn new(gen: Generator, d: usize) -> Self {
        let z = CMatrix::zeros(d, d);
        Self {
            gen,
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            stage: z,
        }
    }

    fn step(&mut self, rho: &mut CMatrix, dt: f64) {
        let half = C64::from(dt / 2.0);
        self.gen.apply(rho, &mut self.k1);
        self.stage.copy_from(rho);
        add_scaled(&mut self.stage, half, &self.k1);
        self.gen.apply(&self.stage, &mut self.k2);
        self.stage.copy_from(rho);
        add_scaled(&mut self.stage, half, &self.k2);
        self.gen.apply(&self.stage, &mut self.k3);
        self.stage.copy_from(rho);
        add_scaled(&mut self.stage, C64::from(dt), &self.k3);
        self.gen.apply(&self.stage, &mut self.k4);
        let sixth = C64::from(dt / 6.0);
        let third = C64::from(dt / 3.0);
        add_scaled(rho, sixth, &self.k1);
        add_scaled(rho, third, &self.k2);
        add_scaled(rho, third, &self.k3);
        add_scaled(rho, sixth, &self.k4);
    }
}

/// What happens to the trace at each record.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RenormPolicy {
    #[default]
    Off,
    /// Divide by the trace after each record's diagnostics are taken.
    TraceEachRecord,
}

/// Fixed-step schedule: `t_final` is reached in whole steps of at most `dt`,
/// recording every `record_stride` steps plus the initial and final states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub renorm: RenormPolicy,
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_final: f64, record_stride: usize) -> Self {
        Self {
            dt,
            t_final,
            record_stride,
            renorm: RenormPolicy::Off,
        }
    }

    /// Number of steps and the step actually used (`≤ dt`).
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final <= 0.0 {
            return (0, self.dt);
        }
        let n = libm::ceil(self.t_final / self.dt - 1e-9).max(1.0) as usize;
        (n, self.t_final / n as f64)
    }

    pub fn validate(&self, h: &Operator) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "final time must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record stride must be at least 1".into()));
        }
        check_step(h, self.dt)
    }
}

/// Enforces `dt · ρ(H) ≤ MAX_STEP_SCALE`.
pub fn check_step(h: &Operator, dt: f64) -> Result<()> {
    let product = dt * linalg::spectral_radius_hermitian(h.matrix());
    if product > MAX_STEP_SCALE {
        return Err(Error::StepTooLarge {
            dt,
            product,
            limit: MAX_STEP_SCALE,
        });
    }
    Ok(())
}

/// Largest step no bigger than `preferred` that satisfies [`check_step`].
pub fn stable_step(h: &Operator, preferred: f64) -> f64 {
    let radius = linalg::spectral_radius_hermitian(h.matrix());
    if radius == 0.0 {
        preferred
    } else {
        preferred.min(0.999 * MAX_STEP_SCALE / radius)
    }
}

/// Numerical health of one recorded state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Population of the highest Fock level; `None` without a resonator.
    pub top_fock_population: Option<f64>,
}

impl Diagnostics {
    /// Elementwise worst case of two records.
    pub fn worst(self, other: Diagnostics) -> Diagnostics {
        Diagnostics {
            trace_error: self.trace_error.max(other.trace_error),
            hermiticity_error: self.hermiticity_error.max(other.hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
            top_fock_population: match (self.top_fock_population, other.top_fock_population) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }

    pub fn clean() -> Diagnostics {
        Diagnostics {
            trace_error: 0.0,
            hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            top_fock_population: None,
        }
    }
}

/// Recorded evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<Diagnostics>,
    /// Step size actually used (the last segment's, for scheduled runs).
    pub dt: f64,
    pub renorm: RenormPolicy,
}

impl Trajectory {
    pub fn worst_diagnostics(&self) -> Diagnostics {
        self.diagnostics
            .iter()
            .copied()
            .fold(Diagnostics::clean(), Diagnostics::worst)
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

struct Recorder {
    layout: SpaceLayout,
    top_fock: Option<Vec<usize>>,
    renorm: RenormPolicy,
    out: Trajectory,
}

impl Recorder {
    fn new(layout: &SpaceLayout, renorm: RenormPolicy, dt: f64) -> Self {
        let top_fock = layout.slot_of(TLR).map(|slot| {
            let top = layout.dims()[slot] - 1;
            (0..layout.total_dim())
                .filter(|&i| layout.levels_of(i)[slot] == top)
                .collect()
        });
        Self {
            layout: layout.clone(),
            top_fock,
            renorm,
            out: Trajectory {
                times: Vec::new(),
                states: Vec::new(),
                diagnostics: Vec::new(),
                dt,
                renorm,
            },
        }
    }

    fn record(&mut self, t: f64, rho: &mut CMatrix) -> Result<()> {
        let s = crate::hilbert::StateDiagnostics::of(rho);
        let diag = Diagnostics {
            trace_error: s.trace_error,
            hermiticity_error: s.hermiticity_error,
            min_eigenvalue: s.min_eigenvalue,
            top_fock_population: self
                .top_fock
                .as_ref()
                .map(|idx| idx.iter().map(|&i| rho[(i, i)].re).sum()),
        };
        if !(diag.trace_error <= BREACH_TOL) || !(diag.min_eigenvalue >= -BREACH_TOL) {
            return Err(Error::DiagnosticBreach {
                time: t,
                trace_error: diag.trace_error,
                min_eigenvalue: diag.min_eigenvalue,
            });
        }
        if self.renorm == RenormPolicy::TraceEachRecord {
            let tr = linalg::trace(rho).re;
            *rho /= C64::from(tr);
        }
        self.out.times.push(t);
        self.out
            .states
            .push(DensityMatrix::from_parts_unchecked(rho.clone(), self.layout.clone()));
        self.out.diagnostics.push(diag);
        Ok(())
    }
}

fn setup(rho0: &DensityMatrix, h: &Operator, channels: &[CollapseChannel]) -> Result<Rk4> {
    check_layout(h.layout(), rho0.layout())?;
    let gen = Generator::new(h, channels)?;
    Ok(Rk4::new(gen, h.dim()))
}

/// Fixed-step RK4 integration of [`master_rhs`].
pub fn evolve_rk4(
    rho0: &DensityMatrix,
    h: &Operator,
    channels: &[CollapseChannel],
    config: &EvolutionConfig,
) -> Result<Trajectory> {
    config.validate(h)?;
    let mut rk = setup(rho0, h, channels)?;
    let (steps, dt) = config.steps();
    let mut rec = Recorder::new(rho0.layout(), config.renorm, dt);
    let mut rho = rho0.matrix().clone();
    rec.record(0.0, &mut rho)?;
    for n in 1..=steps {
        rk.step(&mut rho, dt);
        if n % config.record_stride == 0 || n == steps {
            rec.record(n as f64 * dt, &mut rho)?;
        }
    }
    Ok(rec.out)
}

/// RK4 integration that records exactly at the given times.
///
/// `times` must be non-negative and strictly increasing. Each interval is
/// split into equal steps no larger than `max_dt`. The initial state is
/// recorded only if `times[0] == 0`.
pub fn evolve_rk4_at(
    rho0: &DensityMatrix,
    h: &Operator,
    channels: &[CollapseChannel],
    times: &[f64],
    max_dt: f64,
    renorm: RenormPolicy,
) -> Result<Trajectory> {
    if !(max_dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {max_dt}"
        )));
    }
    check_step(h, max_dt)?;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "record times must be non-negative and strictly increasing".into(),
        ));
    }
    let mut rk = setup(rho0, h, channels)?;
    let mut rec = Recorder::new(rho0.layout(), renorm, max_dt);
    let mut rho = rho0.matrix().clone();
    let mut now = 0.0;
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let n = libm::ceil(span / max_dt - 1e-9).max(1.0) as usize;
            let dt = span / n as f64;
            for _ in 0..n {
                rk.step(&mut rho, dt);
            }
            rec.out.dt = dt;
        }
        now = t;
        rec.record(t, &mut rho)?;
    }
    Ok(rec.out)
}

/// Superoperator `L` with `vec(ρ̇) = L vec(ρ)` (column stacking).
pub fn liouvillian(h: &Operator, channels: &[CollapseChannel]) -> Result<CMatrix> {
    let d = h.dim();
    if d > LIOUVILLIAN_MAX_DIM {
        return Err(Error::DimensionGuard {
            dim: d,
            max: LIOUVILLIAN_MAX_DIM,
        });
    }
    let id = CMatrix::identity(d, d);
    let hm = h.matrix();
    // vec(AXB) = (Bᵀ ⊗ A) vec(X)
    let mut l = (id.kronecker(hm) - hm.transpose().kronecker(&id)) * (-I);
    for ch in channels {
        check_layout(ch.operator.layout(), h.layout())?;
        let a = ch.operator.matrix();
        let ada = a.adjoint() * a;
        let term = a.conjugate().kronecker(a).scale(2.0) - id.kronecker(&ada) - ada.transpose().kronecker(&id);
        l += term.scale(ch.prefactor);
    }
    Ok(l)
}

/// `vec(ρ(t)) = exp(L t) vec(ρ₀)`.
pub fn evolve_exact(rho0: &DensityMatrix, h: &Operator, channels: &[CollapseChannel], t: f64) -> Result<DensityMatrix> {
    Ok(evolve_exact_at(rho0, h, channels, &[t])?.remove(0))
}

/// [`evolve_exact`] at several times, sharing one Liouvillian.
pub fn evolve_exact_at(
    rho0: &DensityMatrix,
    h: &Operator,
    channels: &[CollapseChannel],
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    check_layout(h.layout(), rho0.layout())?;
    let l = liouvillian(h, channels)?;
    let d = h.dim();
    let v0 = linalg::vec_of(rho0.matrix());
    let out = times
        .iter()
        .map(|&t| {
            let prop: DMatrix<C64> = linalg::expm(&(&l * C64::from(t)));
            let m = linalg::unvec(&(prop * &v0), d);
            DensityMatrix::from_parts_unchecked(m, rho0.layout().clone())
        })
        .collect();
    Ok(out)
}
