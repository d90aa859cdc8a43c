//! Hamiltonian builders for the CBJJ–TLR–NVE system.
//!
//! The ensemble is kept as an effective qubit on {|0⟩_D, |1⟩_D} with
//! `S+ = |1⟩_D⟨0|` and `S^z = |1⟩⟨1| − |0⟩⟨0|`. Simulations run in model
//! units where either g₀ = 1 (resonant) or η = 1 (dispersive).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::device;
use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed_at, qubit_ops, Operator, SpaceLayout};

pub const CBJJ: &str = "cbjj";
pub const TLR: &str = "tlr";
pub const NVE: &str = "nve";

/// Minimum |Δ|/g accepted by the dispersive builders without an override.
pub const MIN_DISPERSIVE_RATIO: f64 = 3.0;

/// (CBJJ, TLR, NVE) with Fock cutoff `n_max`.
pub fn hybrid_layout(n_max: usize) -> Result<SpaceLayout> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("Fock cutoff must be at least 1".into()));
    }
    SpaceLayout::new(&[(CBJJ, 2), (TLR, n_max + 1), (NVE, 2)])
}

/// (CBJJ, NVE) once the bus has been eliminated.
pub fn pair_layout() -> SpaceLayout {
    SpaceLayout::new(&[(CBJJ, 2), (NVE, 2)]).expect("static layout")
}

/// Label of the `j`-th ensemble (1-based) in a multi-ensemble layout.
pub fn nve_label(j: usize) -> String {
    format!("{NVE}{j}")
}

/// (CBJJ, NVE₁, …, NVE_N).
pub fn multi_layout(n: usize) -> Result<SpaceLayout> {
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one ensemble".into()));
    }
    let labels: Vec<String> = (1..=n).map(nve_label).collect();
    let mut parts: Vec<(&str, usize)> = alloc::vec![(CBJJ, 2)];
    parts.extend(labels.iter().map(|l| (l.as_str(), 2)));
    SpaceLayout::new(&parts)
}

/// Parameters of the three-body Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub omega_10: f64,
    pub omega_c: f64,
    pub omega_eg: f64,
    pub g_tc: f64,
    pub g_td: f64,
    pub n_max: usize,
    /// Skip the |Δ|/g ≥ 3 guard of the dispersive builders.
    pub allow_strong_coupling: bool,
}

impl ModelParams {
    pub fn new(omega_10: f64, omega_c: f64, omega_eg: f64, g_tc: f64, g_td: f64) -> Self {
        Self {
            omega_10,
            omega_c,
            omega_eg,
            g_tc,
            g_td,
            n_max: 2,
            allow_strong_coupling: false,
        }
    }

    /// Symmetric dispersive point: both emitters at ω_c + Δ with coupling g.
    pub fn symmetric_dispersive(omega_c: f64, detuning: f64, g: f64) -> Self {
        Self::new(omega_c + detuning, omega_c, omega_c + detuning, g, g)
    }

    /// Δ_tc = ω₁₀ − ω_c.
    pub fn delta_tc(&self) -> f64 {
        self.omega_10 - self.omega_c
    }

    /// Δ_td = ω_eg − ω_c.
    pub fn delta_td(&self) -> f64 {
        self.omega_eg - self.omega_c
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("Fock cutoff must be at least 1".into()));
        }
        if !(self.g_tc >= 0.0 && self.g_td >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "couplings must be non-negative, got g_tc = {}, g_td = {}",
                self.g_tc, self.g_td
            )));
        }
        Ok(())
    }

    /// Smallest |Δ|/g over the two couplings (infinite when uncoupled).
    pub fn dispersive_ratio(&self) -> f64 {
        let ratio = |d: f64, g: f64| if g == 0.0 { f64::INFINITY } else { d.abs() / g };
        ratio(self.delta_tc(), self.g_tc).min(ratio(self.delta_td(), self.g_td))
    }

    pub fn check_dispersive(&self) -> Result<()> {
        self.validate()?;
        if self.delta_tc() == 0.0 || self.delta_td() == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        let ratio = self.dispersive_ratio();
        if ratio < MIN_DISPERSIVE_RATIO && !self.allow_strong_coupling {
            return Err(Error::DispersiveInvalid { ratio });
        }
        Ok(())
    }

    pub fn eta(&self) -> Result<f64> {
        Ok(device::effective_eta(self.g_tc, self.g_td, self.delta_tc(), self.delta_td())?.eta)
    }
}

/// Operators of the hybrid layout, embedded once.
struct HybridOps {
    sz: Operator,
    sp: Operator,
    sm: Operator,
    a: Operator,
    ad: Operator,
    szd: Operator,
    spd: Operator,
    smd: Operator,
}

impl HybridOps {
    fn new(layout: &SpaceLayout) -> Result<Self> {
        let q = qubit_ops();
        let n = layout.dims()[layout.slot_of(TLR).expect("hybrid layout")];
        let a = embed_at(&annihilation(n)?, TLR, layout)?;
        Ok(Self {
            sz: embed_at(&q.sigma_z, CBJJ, layout)?,
            sp: embed_at(&q.sigma_plus, CBJJ, layout)?,
            sm: embed_at(&q.sigma_minus, CBJJ, layout)?,
            ad: a.adjoint(),
            a,
            szd: embed_at(&q.sigma_z, NVE, layout)?,
            spd: embed_at(&q.sigma_plus, NVE, layout)?,
            smd: embed_at(&q.sigma_minus, NVE, layout)?,
        })
    }

    fn number(&self) -> Operator {
        &self.ad * &self.a
    }

    fn jc_cbjj(&self) -> Operator {
        &(&self.sp * &self.a) + &(&self.sm * &self.ad)
    }

    fn jc_nve(&self) -> Operator {
        &(&self.spd * &self.a) + &(&self.smd * &self.ad)
    }
}

/// (ω₁₀/2)σz + ω_c a†a + (ω_eg/2)S^z + g_tc(σ+a + σ-a†) + g_td(S+a + S-a†).
pub fn h_total(p: &ModelParams) -> Result<Operator> {
    p.validate()?;
    let layout = hybrid_layout(p.n_max)?;
    let o = HybridOps::new(&layout)?;
    let h = &(&(&o.sz.scale(p.omega_10 / 2.0) + &o.number().scale(p.omega_c)) + &o.szd.scale(p.omega_eg / 2.0))
        + &(&o.jc_cbjj().scale(p.g_tc) + &o.jc_nve().scale(p.g_td));
    Ok(h)
}

/// Resonant interaction-picture Hamiltonian g_tc(σ+a + σ-a†) + g_td(S+a + S-a†).
pub fn h_resonant(g_tc: f64, g_td: f64, n_max: usize) -> Result<Operator> {
    let layout = hybrid_layout(n_max)?;
    let o = HybridOps::new(&layout)?;
    Ok(&o.jc_cbjj().scale(g_tc) + &o.jc_nve().scale(g_td))
}

/// Second-order (bus-eliminated) Hamiltonian.
///
/// With `vacuum_reduced = false` the result lives on the hybrid layout and
/// keeps the photon-number-dependent Stark terms; with `true` the bus is
/// assumed in vacuum and the result lives on [`pair_layout`].
pub fn h_dispersive(p: &ModelParams, vacuum_reduced: bool) -> Result<Operator> {
    p.check_dispersive()?;
    let eta = p.eta()?;
    let chi_c = p.g_tc * p.g_tc / p.delta_tc();
    let chi_d = p.g_td * p.g_td / p.delta_td();
    if vacuum_reduced {
        let layout = pair_layout();
        let q = qubit_ops();
        let sz = embed_at(&q.sigma_z, CBJJ, &layout)?;
        let szd = embed_at(&q.sigma_z, NVE, &layout)?;
        let h = &(&sz.scale(p.omega_10 / 2.0 + chi_c / 2.0) + &szd.scale(p.omega_eg / 2.0 + chi_d / 2.0))
            + &h_exchange(eta);
        return Ok(h);
    }
    let layout = hybrid_layout(p.n_max)?;
    let o = HybridOps::new(&layout)?;
    let n = o.number();
    let bare = &(&n.scale(p.omega_c) + &o.sz.scale(p.omega_10 / 2.0)) + &o.szd.scale(p.omega_eg / 2.0);
    let stark_c = (&(&o.sp * &o.sm) + &(&o.sz * &n)).scale(chi_c);
    let stark_d = (&(&o.spd * &o.smd) + &(&o.szd * &n)).scale(chi_d);
    let exchange = (&(&o.spd * &o.sm) + &(&o.smd * &o.sp)).scale(eta);
    Ok(&(&bare + &stark_c) + &(&stark_d + &exchange))
}

/// η(S+σ- + S-σ+) on [`pair_layout`].
pub fn h_exchange(eta: f64) -> Operator {
    let layout = pair_layout();
    let q = qubit_ops();
    let emb = |op: &Operator, label: &str| embed_at(op, label, &layout).expect("qubit on qubit slot");
    let term = &(&emb(&q.sigma_plus, NVE) * &emb(&q.sigma_minus, CBJJ))
        + &(&emb(&q.sigma_minus, NVE) * &emb(&q.sigma_plus, CBJJ));
    term.scale(eta)
}

/// Σᵢ ηᵢ(Sᵢ+σ- + Sᵢ-σ+) on [`multi_layout`]`(n)`.
pub fn h_multi(etas: &[f64], n: usize) -> Result<Operator> {
    if etas.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: etas.len(),
        });
    }
    let layout = multi_layout(n)?;
    let q = qubit_ops();
    let sp = embed_at(&q.sigma_plus, CBJJ, &layout)?;
    let sm = embed_at(&q.sigma_minus, CBJJ, &layout)?;
    let mut h = Operator::zeros(&layout);
    for (j, &eta) in etas.iter().enumerate() {
        let label = nve_label(j + 1);
        let spj = embed_at(&q.sigma_plus, &label, &layout)?;
        let smj = embed_at(&q.sigma_minus, &label, &layout)?;
        let term = &(&spj * &sm) + &(&smj * &sp);
        h = &h + &term.scale(eta);
    }
    Ok(h)
}

/// |1⟩⟨1|_C + a†a + |1⟩⟨1|_D on the hybrid layout.
pub fn excitation_number(n_max: usize) -> Result<Operator> {
    let layout = hybrid_layout(n_max)?;
    let q = qubit_ops();
    let a = embed_at(&annihilation(n_max + 1)?, TLR, &layout)?;
    Ok(&(&embed_at(&q.proj1, CBJJ, &layout)? + &(&a.adjoint() * &a)) + &embed_at(&q.proj1, NVE, &layout)?)
}

/// |1⟩⟨1|_C + Σⱼ |1⟩⟨1|_j on the multi-ensemble layout.
///
/// Equivalently N minus the number of flipped spins |0⟩ⱼ plus the CBJJ
/// excitation: each flip |1⟩ⱼ → |0⟩ⱼ is paid for by |0⟩_C → |1⟩_C.
pub fn multi_excitation_number(n: usize) -> Result<Operator> {
    let layout = multi_layout(n)?;
    let q = qubit_ops();
    let mut total = embed_at(&q.proj1, CBJJ, &layout)?;
    for j in 1..=n {
        total = &total + &embed_at(&q.proj1, &nve_label(j), &layout)?;
    }
    Ok(total)
}
