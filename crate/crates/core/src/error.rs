use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("slot {slot} ({label}) has dimension {expected}, operator has dimension {found}")]
    SlotDimension {
        slot: usize,
        label: String,
        expected: usize,
        found: usize,
    },

    #[error("slot {slot} out of range for a layout with {len} subsystems")]
    SlotOutOfRange { slot: usize, len: usize },

    #[error("matrix is {rows}x{cols}, expected square of dimension {expected}")]
    MatrixShape { rows: usize, cols: usize, expected: usize },

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("operator is not a projector (hermiticity error {hermiticity:.3e}, idempotency error {idempotency:.3e})")]
    NotProjector { hermiticity: f64, idempotency: f64 },

    #[error("measurement branch has negligible weight (p = {probability:.3e} < {threshold:.3e})")]
    NegligibleBranch { probability: f64, threshold: f64 },

    #[error("fidelity has non-negligible imaginary part {0:.3e}")]
    ComplexFidelity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("junction past critical bias, no bound states (I_b/I_c = {ratio})")]
    PastCriticalBias { ratio: f64 },

    #[error("zero detuning: dispersive coupling undefined")]
    ZeroDetuning,

    #[error("dispersive approximation invalid: |detuning|/coupling = {ratio:.3} < 3")]
    DispersiveInvalid { ratio: f64 },

    #[error("resonator length unset")]
    LengthUnset,

    #[error("expected {expected} coupling rates, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("time step {dt:.3e} too large: dt * spectral radius = {product:.3e} > {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error("diagnostic breach at t = {time}: trace error {trace_error:.3e}, min eigenvalue {min_eigenvalue:.3e}")]
    DiagnosticBreach {
        time: f64,
        trace_error: f64,
        min_eigenvalue: f64,
    },

    #[error("dimension {dim} exceeds the superoperator guard of {max}")]
    DimensionGuard { dim: usize, max: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
