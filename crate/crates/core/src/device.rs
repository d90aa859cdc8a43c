//! Circuit parameters to frequencies and couplings.
//!
//! Every frequency is angular (rad/s). Divide by 2π for Hz.

use alloc::format;

use libm::{atan, cos, sin, sqrt};

use crate::error::{Error, Result};

use core::f64::consts::PI;

pub mod constants {
    /// Magnetic flux quantum h/2e (Wb).
    pub const FLUX_QUANTUM: f64 = 2.067833848e-15;
    /// Reduced Planck constant (J·s).
    pub const HBAR: f64 = 1.054571817e-34;
    /// NV zero-field splitting, 2π · 2.87 GHz.
    pub const NV_ZERO_FIELD_SPLITTING: f64 = 2.0 * core::f64::consts::PI * 2.87e9;
}

/// Ratio ω₁₀/ω_p, taken as exact.
pub const OMEGA_10_RATIO: f64 = 0.9;
/// Ratio ω₂₁/ω_p, taken as exact.
pub const OMEGA_21_RATIO: f64 = 0.81;

/// Dispersive validity ratio g/|Δ| above which a warning is logged.
pub const DISPERSIVE_WARN_RATIO: f64 = 0.3;

/// Current-biased Josephson junction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbjjParams {
    /// Bias current I_b (A).
    pub bias_current: f64,
    /// Critical current I_c (A).
    pub critical_current: f64,
    /// Junction capacitance C_J (F).
    pub junction_capacitance: f64,
}

impl CbjjParams {
    pub fn new(bias_current: f64, critical_current: f64, junction_capacitance: f64) -> Result<Self> {
        let p = Self {
            bias_current,
            critical_current,
            junction_capacitance,
        };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor from the bias ratio I_b/I_c.
    pub fn with_bias_ratio(ratio: f64, critical_current: f64, junction_capacitance: f64) -> Result<Self> {
        Self::new(ratio * critical_current, critical_current, junction_capacitance)
    }

    pub fn bias_ratio(&self) -> f64 {
        self.bias_current / self.critical_current
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.critical_current > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "critical current must be positive, got {}",
                self.critical_current
            )));
        }
        if !(self.junction_capacitance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "junction capacitance must be positive, got {}",
                self.junction_capacitance
            )));
        }
        if !(self.bias_current > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bias current must be positive, got {}",
                self.bias_current
            )));
        }
        if self.bias_current >= self.critical_current {
            return Err(Error::PastCriticalBias {
                ratio: self.bias_ratio(),
            });
        }
        Ok(())
    }
}

/// Transmission-line resonator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TlrParams {
    /// Total inductance F_t (H).
    pub inductance: f64,
    /// Total capacitance C_t (F).
    pub capacitance: f64,
    /// Wiring capacitance C_0 (F).
    pub wiring_capacitance: f64,
    /// Coupling capacitance C_c (F).
    pub coupling_capacitance: f64,
    /// Resonator length L (m); only needed for mode profiles.
    pub length: Option<f64>,
}

impl TlrParams {
    pub fn new(
        inductance: f64,
        capacitance: f64,
        wiring_capacitance: f64,
        coupling_capacitance: f64,
        length: Option<f64>,
    ) -> Result<Self> {
        let p = Self {
            inductance,
            capacitance,
            wiring_capacitance,
            coupling_capacitance,
            length,
        };
        p.validate()?;
        Ok(p)
    }

    /// ε₁ = 2C_0/C_t.
    pub fn epsilon_wiring(&self) -> f64 {
        2.0 * self.wiring_capacitance / self.capacitance
    }

    /// ε₂ = C_c/C_t.
    pub fn epsilon_coupling(&self) -> f64 {
        self.coupling_capacitance / self.capacitance
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inductance > 0.0 && self.capacitance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resonator inductance and capacitance must be positive, got {} H, {} F",
                self.inductance, self.capacitance
            )));
        }
        if !(self.wiring_capacitance >= 0.0 && self.coupling_capacitance >= 0.0) {
            return Err(Error::InvalidParameter(
                "wiring and coupling capacitances must be non-negative".into(),
            ));
        }
        let (e1, e2) = (self.epsilon_wiring(), self.epsilon_coupling());
        if e1 >= 0.1 || e2 >= 0.1 {
            return Err(Error::InvalidParameter(format!(
                "capacitive renormalization outside the weak regime: eps1 = {e1:.4}, eps2 = {e2:.4} (both must be < 0.1)"
            )));
        }
        if let Some(l) = self.length {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "resonator length must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// Nitrogen-vacancy centre ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NveParams {
    /// Number of NV centres N.
    pub count: u64,
    /// Single-NV vacuum Rabi frequency g_s (rad/s).
    pub single_coupling: f64,
    /// Ensemble splitting ω_eg (rad/s).
    pub splitting: f64,
}

impl NveParams {
    pub fn new(count: u64, single_coupling: f64) -> Result<Self> {
        let p = Self {
            count,
            single_coupling,
            splitting: constants::NV_ZERO_FIELD_SPLITTING,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(
                "ensemble must contain at least one NV centre".into(),
            ));
        }
        if !(self.single_coupling > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "single-NV coupling must be positive, got {}",
                self.single_coupling
            )));
        }
        Ok(())
    }
}

/// Junction level structure in the bottom of the washboard well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JunctionFrequencies {
    pub plasma: f64,
    pub omega_10: f64,
    pub omega_21: f64,
}

impl JunctionFrequencies {
    /// Ξ = |ω₂₁ − ω₁₀|.
    pub fn level_separation(&self) -> f64 {
        (self.omega_21 - self.omega_10).abs()
    }
}

/// ω_p = [(2 − 2I_b/I_c)(2πI_c/Φ₀C_J)²]^{1/4}, with ω₁₀ = 0.9ω_p and ω₂₁ = 0.81ω_p.
pub fn plasma_frequency(p: &CbjjParams) -> Result<JunctionFrequencies> {
    p.validate()?;
    let drive = 2.0 * PI * p.critical_current / (constants::FLUX_QUANTUM * p.junction_capacitance);
    let plasma = sqrt(sqrt(2.0 - 2.0 * p.bias_ratio()) * drive);
    Ok(JunctionFrequencies {
        plasma,
        omega_10: OMEGA_10_RATIO * plasma,
        omega_21: OMEGA_21_RATIO * plasma,
    })
}

/// Full-wave resonator mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonatorMode {
    /// ω_c (rad/s).
    pub omega_c: f64,
    /// Phase offset δ₀ (rad), tan δ₀ = 2πε₂.
    pub phase: f64,
}

pub fn resonator_frequency(p: &TlrParams) -> Result<ResonatorMode> {
    p.validate()?;
    let renorm = 1.0 - p.epsilon_wiring() - p.epsilon_coupling();
    Ok(ResonatorMode {
        omega_c: 2.0 * PI * renorm / sqrt(p.inductance * p.capacitance),
        phase: atan(2.0 * PI * p.epsilon_coupling()),
    })
}

/// g_tc = [2C_t(C_J + C_c)]^{-1/2} ω_c C_c cos δ₀.
pub fn coupling_gtc(tlr: &TlrParams, cbjj: &CbjjParams, omega_c: f64, phase: f64) -> f64 {
    let c_c = tlr.coupling_capacitance;
    omega_c * c_c * cos(phase) / sqrt(2.0 * tlr.capacitance * (cbjj.junction_capacitance + c_c))
}

/// g_td = √N g_s.
pub fn ensemble_coupling(n: &NveParams) -> f64 {
    sqrt(n.count as f64) * n.single_coupling
}

/// Second-order exchange rate together with its validity figure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveCoupling {
    pub eta: f64,
    /// max(g_tc/|Δ_tc|, g_td/|Δ_td|).
    pub validity: f64,
}

impl EffectiveCoupling {
    pub fn is_suspect(&self) -> bool {
        self.validity > DISPERSIVE_WARN_RATIO
    }
}

/// η = g_tc g_td (1/2Δ_tc + 1/2Δ_td).
pub fn effective_eta(g_tc: f64, g_td: f64, delta_tc: f64, delta_td: f64) -> Result<EffectiveCoupling> {
    if delta_tc == 0.0 || delta_td == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let eta = g_tc * g_td * (0.5 / delta_tc + 0.5 / delta_td);
    let validity = (g_tc / delta_tc.abs()).max(g_td / delta_td.abs());
    let out = EffectiveCoupling { eta, validity };
    if out.is_suspect() {
        log::warn!("dispersive coupling used at g/|Δ| = {validity:.3} > {DISPERSIVE_WARN_RATIO}; η is unreliable");
    }
    Ok(out)
}

/// Population leaking to |2⟩_C: P = g_tc² / (g_tc² + Ξ²).
pub fn leakage_probability(g_tc: f64, level_separation: f64) -> Result<f64> {
    if !(level_separation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "level separation must be positive, got {level_separation}"
        )));
    }
    let g2 = g_tc * g_tc;
    Ok(g2 / (g2 + level_separation * level_separation))
}

/// Zero-point voltage and current amplitudes at position `x` along the resonator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeAmplitudes {
    /// √(ħω_c/C_t) cos(kx + δ₀) in volts.
    pub voltage: f64,
    /// √(ħω_c/F_t) sin(kx + δ₀) in amperes.
    pub current: f64,
}

pub fn mode_profile(x: f64, tlr: &TlrParams, omega_c: f64, phase: f64) -> Result<ModeAmplitudes> {
    let length = tlr.length.ok_or(Error::LengthUnset)?;
    if !(length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "resonator length must be positive, got {length}"
        )));
    }
    if !(0.0..=length).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "position {x} outside the resonator [0, {length}]"
        )));
    }
    let k = 2.0 * PI / length;
    let arg = k * x + phase;
    let energy = constants::HBAR * omega_c;
    Ok(ModeAmplitudes {
        voltage: sqrt(energy / tlr.capacitance) * cos(arg),
        current: sqrt(energy / tlr.inductance) * sin(arg),
    })
}

/// Everything derivable from one set of circuit parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedFrequencies {
    pub omega_p: f64,
    pub omega_10: f64,
    pub omega_21: f64,
    pub level_separation: f64,
    pub omega_c: f64,
    pub phase: f64,
    pub g_tc: f64,
    pub g_td: f64,
    pub delta_tc: f64,
    pub delta_td: f64,
    /// Present only when both couplings are below their detunings.
    pub effective: Option<EffectiveCoupling>,
    pub leakage: f64,
}

impl DerivedFrequencies {
    /// With `renormalize = false` the resonator frequency ignores ε₁ and ε₂
    /// (the phase δ₀ still follows ε₂).
    pub fn compute(cbjj: &CbjjParams, tlr: &TlrParams, nve: &NveParams, renormalize: bool) -> Result<Self> {
        nve.validate()?;
        let junction = plasma_frequency(cbjj)?;
        let mut mode = resonator_frequency(tlr)?;
        if !renormalize {
            mode.omega_c = 2.0 * PI / sqrt(tlr.inductance * tlr.capacitance);
        }
        let g_tc = coupling_gtc(tlr, cbjj, mode.omega_c, mode.phase);
        let g_td = ensemble_coupling(nve);
        let delta_tc = junction.omega_10 - mode.omega_c;
        let delta_td = nve.splitting - mode.omega_c;
        let dispersive = g_tc < delta_tc.abs() && g_td < delta_td.abs();
        let effective = if dispersive {
            Some(effective_eta(g_tc, g_td, delta_tc, delta_td)?)
        } else {
            None
        };
        let leakage = leakage_probability(g_tc, junction.level_separation())?;
        Ok(Self {
            omega_p: junction.plasma,
            omega_10: junction.omega_10,
            omega_21: junction.omega_21,
            level_separation: junction.level_separation(),
            omega_c: mode.omega_c,
            phase: mode.phase,
            g_tc,
            g_td,
            delta_tc,
            delta_td,
            effective,
            leakage,
        })
    }
}

/// Angular frequency to cycles per second.
pub fn to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Cycles per second to angular frequency.
pub fn from_hz(f: f64) -> f64 {
    2.0 * PI * f
}
