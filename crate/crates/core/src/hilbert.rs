//! Dense operator algebra on an ordered tensor product of finite subsystems.
//!
//! Qubit conventions follow the hybrid-memory model throughout the crate:
//! `σ+ = |1⟩⟨0|`, `σ- = |0⟩⟨1|` and `σz = |1⟩⟨1| - |0⟩⟨0|`. Note the sign of
//! `σz` is opposite to the common `|0⟩`-up physics convention.
//!
//! Subsystems are always ordered (CBJJ, TLR, NVE₁, …, NVE_N); see
//! [`crate::hamiltonian`] for the standard layouts.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

/// Default weight below which a projective measurement branch is rejected.
pub const DEFAULT_BRANCH_THRESHOLD: f64 = 1e-12;

/// Tolerances a [`DensityMatrix`] must meet on construction.
pub const STATE_HERMITICITY_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-9;
pub const STATE_EIGENVALUE_FLOOR: f64 = -1e-8;

/// Ordered list of named subsystems and their dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SpaceLayout {
    pub fn new(subsystems: &[(&str, usize)]) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidLayout("no subsystems".to_string()));
        }
        let mut dims = Vec::with_capacity(subsystems.len());
        let mut labels: Vec<String> = Vec::with_capacity(subsystems.len());
        for &(label, dim) in subsystems {
            if dim < 2 {
                return Err(Error::InvalidLayout(format!(
                    "subsystem {label:?} has dimension {dim} < 2"
                )));
            }
            if labels.iter().any(|l| l == label) {
                return Err(Error::InvalidLayout(format!("duplicate label {label:?}")));
            }
            dims.push(dim);
            labels.push(label.to_string());
        }
        Ok(Self { dims, labels })
    }

    /// Layout of a single subsystem.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new(&[(label, dim)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn slot_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Layout of `self ⊗ other`. A label already present on the left gets a
    /// positional suffix (`qubit` → `qubit#2`) so labels stay unique.
    pub fn concat(&self, other: &SpaceLayout) -> SpaceLayout {
        let mut dims = self.dims.clone();
        let mut labels = self.labels.clone();
        for (label, &dim) in other.labels.iter().zip(&other.dims) {
            let mut candidate = label.clone();
            let mut k = 2;
            while labels.contains(&candidate) {
                candidate = format!("{label}#{k}");
                k += 1;
            }
            labels.push(candidate);
            dims.push(dim);
        }
        SpaceLayout { dims, labels }
    }

    /// Flat basis index of the product state with the given per-subsystem levels.
    pub fn basis_index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.dims.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} levels given for {} subsystems",
                levels.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (slot, (&level, &dim)) in levels.iter().zip(&self.dims).enumerate() {
            if level >= dim {
                return Err(Error::InvalidParameter(format!(
                    "level {level} out of range for slot {slot} ({}) of dimension {dim}",
                    self.labels[slot]
                )));
            }
            idx = idx * dim + level;
        }
        Ok(idx)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut levels = alloc::vec![0; self.dims.len()];
        for (slot, &dim) in self.dims.iter().enumerate().rev() {
            levels[slot] = index % dim;
            index /= dim;
        }
        levels
    }

    fn check_same(&self, other: &SpaceLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.labels, other.labels
            )))
        }
    }
}

/// Dense complex operator on a [`SpaceLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    layout: SpaceLayout,
}

impl Operator {
    pub fn new(matrix: CMatrix, layout: SpaceLayout) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::MatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: d,
            });
        }
        Ok(Self { matrix, layout })
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: CMatrix::identity(d, d),
            layout: layout.clone(),
        }
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: CMatrix::zeros(d, d),
            layout: layout.clone(),
        }
    }

    /// `|ket⟩⟨bra|` for two product basis states.
    pub fn transition(layout: &SpaceLayout, ket: &[usize], bra: &[usize]) -> Result<Self> {
        let mut op = Self::zeros(layout);
        let (i, j) = (layout.basis_index(ket)?, layout.basis_index(bra)?);
        op.matrix[(i, j)] = ONE;
        Ok(op)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            layout: self.layout.clone(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            layout: self.layout.clone(),
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Diagonal part in the product basis.
    pub fn diagonal_part(&self) -> Self {
        Self {
            matrix: CMatrix::from_diagonal(&self.matrix.diagonal()),
            layout: self.layout.clone(),
        }
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Compresses onto the span of the given basis indices: `V† A V`.
    pub fn restrict(&self, indices: &[usize]) -> CMatrix {
        CMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.matrix[(indices[r], indices[c])]
        })
    }

    /// Expectation value `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, ket: &Ket) -> Result<C64> {
        self.layout.check_same(&ket.layout)?;
        Ok(ket.amplitudes.dotc(&(&self.matrix * &ket.amplitudes)))
    }

    /// `Tr(A ρ)`.
    pub fn expectation_mixed(&self, rho: &DensityMatrix) -> Result<C64> {
        self.layout.check_same(&rho.layout)?;
        Ok(linalg::trace(&(&self.matrix * &rho.matrix)))
    }

    pub fn apply(&self, ket: &Ket) -> Result<CVector> {
        self.layout.check_same(&ket.layout)?;
        Ok(&self.matrix * &ket.amplitudes)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            layout: self.layout.clone(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            layout: self.layout.clone(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator {
            matrix: &self.matrix * &rhs.matrix,
            layout: self.layout.clone(),
        }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator {
            matrix: &self.matrix * rhs,
            layout: self.layout.clone(),
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// Kronecker product; `a`'s subsystems come first.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator {
        matrix: a.matrix.kronecker(&b.matrix),
        layout: a.layout.concat(&b.layout),
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on `slot`.
pub fn embed(op: &Operator, slot: usize, layout: &SpaceLayout) -> Result<Operator> {
    if slot >= layout.len() {
        return Err(Error::SlotOutOfRange {
            slot,
            len: layout.len(),
        });
    }
    let expected = layout.dims[slot];
    if op.dim() != expected {
        return Err(Error::SlotDimension {
            slot,
            label: layout.labels[slot].clone(),
            expected,
            found: op.dim(),
        });
    }
    let left: usize = layout.dims[..slot].iter().product();
    let right: usize = layout.dims[slot + 1..].iter().product();
    let matrix = CMatrix::identity(left, left)
        .kronecker(&op.matrix)
        .kronecker(&CMatrix::identity(right, right));
    Ok(Operator {
        matrix,
        layout: layout.clone(),
    })
}

/// [`embed`] addressed by subsystem label.
pub fn embed_at(op: &Operator, label: &str, layout: &SpaceLayout) -> Result<Operator> {
    let slot = layout
        .slot_of(label)
        .ok_or_else(|| Error::LayoutMismatch(format!("no subsystem labelled {label:?}")))?;
    embed(op, slot, layout)
}

/// Truncated bosonic lowering operator with `⟨n-1|a|n⟩ = √n`.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("Fock space dimension {dim} < 2")));
    }
    let layout = SpaceLayout::single("mode", dim)?;
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::from(libm::sqrt(n as f64));
    }
    Operator::new(m, layout)
}

/// Single-qubit operator set in the `σz = |1⟩⟨1| - |0⟩⟨0|` convention.
#[derive(Clone, Debug)]
pub struct QubitOps {
    pub sigma_z: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
    pub proj0: Operator,
    pub proj1: Operator,
}

pub fn qubit_ops() -> QubitOps {
    let layout = SpaceLayout::single("qubit", 2).expect("static layout");
    let op = |entries: [C64; 4]| {
        Operator::new(CMatrix::from_row_slice(2, 2, &entries), layout.clone()).expect("2x2 on a qubit")
    };
    let m1 = C64::from(-1.0);
    QubitOps {
        sigma_z: op([m1, ZERO, ZERO, ONE]),
        sigma_plus: op([ZERO, ZERO, ONE, ZERO]),
        sigma_minus: op([ZERO, ONE, ZERO, ZERO]),
        proj0: op([ONE, ZERO, ZERO, ZERO]),
        proj1: op([ZERO, ZERO, ZERO, ONE]),
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: CVector,
    layout: SpaceLayout,
}

impl Ket {
    /// Normalizes `amplitudes`; a zero vector is rejected.
    pub fn new(amplitudes: CVector, layout: SpaceLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::MatrixShape {
                rows: amplitudes.len(),
                cols: 1,
                expected: layout.total_dim(),
            });
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
            layout,
        })
    }

    pub fn basis(layout: &SpaceLayout, levels: &[usize]) -> Result<Self> {
        let mut v = CVector::zeros(layout.total_dim());
        v[layout.basis_index(levels)?] = ONE;
        Ok(Self {
            amplitudes: v,
            layout: layout.clone(),
        })
    }

    /// Normalized superposition `Σ c_k |levels_k⟩`.
    pub fn superposition(layout: &SpaceLayout, terms: &[(C64, &[usize])]) -> Result<Self> {
        let mut v = CVector::zeros(layout.total_dim());
        for (c, levels) in terms {
            v[layout.basis_index(levels)?] += *c;
        }
        Self::new(v, layout.clone())
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            layout: self.layout.concat(&other.layout),
        }
    }

    /// Multiplies by a global phase `e^{iφ}`.
    pub fn with_phase(&self, phase: f64) -> Ket {
        Ket {
            amplitudes: &self.amplitudes * C64::from_polar(1.0, phase),
            layout: self.layout.clone(),
        }
    }

    pub fn overlap(&self, other: &Ket) -> Result<C64> {
        self.layout.check_same(&other.layout)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Numerical health of a density matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn of(m: &CMatrix) -> Self {
        Self {
            trace_error: (linalg::trace(m) - ONE).norm(),
            hermiticity_error: linalg::hermiticity_error(m),
            min_eigenvalue: linalg::hermitian_eigenvalues(m).first().copied().unwrap_or(0.0),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.trace_error <= STATE_TRACE_TOL
            && self.hermiticity_error <= STATE_HERMITICITY_TOL
            && self.min_eigenvalue >= STATE_EIGENVALUE_FLOOR
    }
}

/// Mixed state. Positivity is checked, never repaired.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    layout: SpaceLayout,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and the eigenvalue floor.
    pub fn new(matrix: CMatrix, layout: SpaceLayout) -> Result<Self> {
        let op = Operator::new(matrix, layout)?;
        let diag = StateDiagnostics::of(&op.matrix);
        if !diag.is_valid() {
            return Err(Error::InvalidState(format!(
                "trace error {:.3e}, hermiticity error {:.3e}, min eigenvalue {:.3e}",
                diag.trace_error, diag.hermiticity_error, diag.min_eigenvalue
            )));
        }
        Ok(Self {
            matrix: op.matrix,
            layout: op.layout,
        })
    }

    /// For integrator output whose diagnostics are tracked separately.
    pub(crate) fn from_parts_unchecked(matrix: CMatrix, layout: SpaceLayout) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self { matrix, layout }
    }

    pub fn pure(ket: &Ket) -> Self {
        Self {
            matrix: &ket.amplitudes * ket.amplitudes.adjoint(),
            layout: ket.layout.clone(),
        }
    }

    pub fn maximally_mixed(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: CMatrix::identity(d, d).unscale(d as f64),
            layout: layout.clone(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics::of(&self.matrix)
    }

    /// Population `⟨levels|ρ|levels⟩` of a product basis state.
    pub fn population(&self, levels: &[usize]) -> Result<f64> {
        let i = self.layout.basis_index(levels)?;
        Ok(self.matrix[(i, i)].re)
    }

    /// Total population with subsystem `slot` in `level`.
    pub fn subsystem_population(&self, slot: usize, level: usize) -> f64 {
        (0..self.matrix.nrows())
            .filter(|&i| self.layout.levels_of(i)[slot] == level)
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }
}

/// `Re ⟨target|ρ|target⟩`.
pub fn fidelity(target: &Ket, rho: &DensityMatrix) -> Result<f64> {
    target.layout.check_same(&rho.layout)?;
    let f = target.amplitudes.dotc(&(&rho.matrix * &target.amplitudes));
    if f.im.abs() >= 1e-10 {
        return Err(Error::ComplexFidelity(f.im));
    }
    Ok(f.re)
}

/// Ideal projective measurement with the default branch threshold.
pub fn project(rho: &DensityMatrix, projector: &Operator) -> Result<(DensityMatrix, f64)> {
    project_with_threshold(rho, projector, DEFAULT_BRANCH_THRESHOLD)
}

/// Returns the conditional state `PρP/p` and the branch weight `p = Tr(PρP)`.
pub fn project_with_threshold(
    rho: &DensityMatrix,
    projector: &Operator,
    threshold: f64,
) -> Result<(DensityMatrix, f64)> {
    projector.layout.check_same(&rho.layout)?;
    let p_mat = &projector.matrix;
    let hermiticity = linalg::hermiticity_error(p_mat);
    let idempotency = linalg::max_abs(&(p_mat * p_mat - p_mat));
    if hermiticity > 1e-10 || idempotency > 1e-10 {
        return Err(Error::NotProjector {
            hermiticity,
            idempotency,
        });
    }
    let branch = p_mat * &rho.matrix * p_mat;
    let probability = linalg::trace(&branch).re;
    if !(probability >= threshold) {
        return Err(Error::NegligibleBranch { probability, threshold });
    }
    let conditional = DensityMatrix::new(branch.unscale(probability), rho.layout.clone())?;
    Ok((conditional, probability))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        linalg::max_abs(&(a - b)) <= tol
    }

    fn id(label: &str, d: usize) -> Operator {
        Operator::identity(&SpaceLayout::single(label, d).unwrap())
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let t = tensor(&id("a", 2), &id("b", 3));
        assert_eq!(t.matrix(), &CMatrix::identity(6, 6));
        assert_eq!(t.layout().dims(), &[2, 3]);
    }

    #[test]
    fn tensor_sigma_z_eigenvector() {
        let q = qubit_ops();
        let op = tensor(&q.sigma_z, &id("b", 2));
        let ket = Ket::basis(op.layout(), &[1, 0]).unwrap();
        let out = op.apply(&ket).unwrap();
        assert!((out - ket.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn tensor_sigma_plus_with_ladder_has_two_entries() {
        let q = qubit_ops();
        let a = annihilation(3).unwrap();
        let t = tensor(&q.sigma_plus, &a);
        let nonzero: Vec<C64> = t.matrix().iter().copied().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 2);
        let mut values: Vec<f64> = nonzero.iter().map(|z| z.re).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values[0], 1.0);
        assert!((values[1] - libm::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn duplicate_labels_get_suffix() {
        let q = qubit_ops();
        let t = tensor(&q.sigma_z, &q.sigma_z);
        assert_eq!(t.layout().labels(), &["qubit".to_string(), "qubit#2".to_string()]);
    }

    #[test]
    fn embed_matches_definition() {
        let q = qubit_ops();
        let layout = SpaceLayout::new(&[("a", 2), ("b", 2)]).unwrap();
        let e = embed(&q.sigma_z, 0, &layout).unwrap();
        assert_eq!(e.matrix(), tensor(&q.sigma_z, &id("b", 2)).matrix());
    }

    #[test]
    fn embed_identity_is_identity() {
        let layout = SpaceLayout::new(&[("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let e = embed(&id("x", 3), 1, &layout).unwrap();
        assert_eq!(e.matrix(), &CMatrix::identity(12, 12));
    }

    #[test]
    fn embed_ladder_matrix_element() {
        let layout = SpaceLayout::new(&[("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let e = embed(&annihilation(3).unwrap(), 1, &layout).unwrap();
        let i = layout.basis_index(&[0, 0, 0]).unwrap();
        let j = layout.basis_index(&[0, 1, 0]).unwrap();
        assert_eq!(e.matrix()[(i, j)], ONE);
    }

    #[test]
    fn embed_dimension_mismatch_names_slot() {
        let layout = SpaceLayout::new(&[("cbjj", 2), ("tlr", 3)]).unwrap();
        let err = embed(&qubit_ops().sigma_z, 1, &layout).unwrap_err();
        assert!(matches!(err, Error::SlotDimension { slot: 1, .. }));
        assert!(alloc::format!("{err}").contains("tlr"));
    }

    #[test]
    fn annihilation_entries() {
        let a2 = annihilation(2).unwrap();
        assert_eq!(a2.matrix(), &CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        let a3 = annihilation(3).unwrap();
        assert_eq!(a3.matrix()[(0, 1)], ONE);
        assert!((a3.matrix()[(1, 2)].re - libm::sqrt(2.0)).abs() < 1e-15);
        let number = &a3.adjoint() * &a3;
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![ZERO, ONE, C64::from(2.0)]));
        assert!(close(number.matrix(), &expect, 1e-14));
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn qubit_algebra() {
        let q = qubit_ops();
        let ground = Ket::basis(q.sigma_plus.layout(), &[0]).unwrap();
        let excited = Ket::basis(q.sigma_plus.layout(), &[1]).unwrap();
        assert_eq!(&q.sigma_plus.apply(&ground).unwrap(), excited.amplitudes());
        let anti = &(&q.sigma_plus * &q.sigma_minus) + &(&q.sigma_minus * &q.sigma_plus);
        assert_eq!(anti.matrix(), &CMatrix::identity(2, 2));
        let comm = q.sigma_plus.commutator(&q.sigma_minus);
        assert_eq!(comm.matrix(), q.sigma_z.matrix());
        assert_eq!((&q.proj1 - &q.proj0).matrix(), q.sigma_z.matrix());
    }

    #[test]
    fn fidelity_examples() {
        let layout = SpaceLayout::single("q", 2).unwrap();
        let psi = Ket::superposition(&layout, &[(C64::new(0.3, 0.4), &[0]), (ONE, &[1])]).unwrap();
        assert!((fidelity(&psi, &DensityMatrix::pure(&psi)).unwrap() - 1.0).abs() < 1e-14);

        let zero = Ket::basis(&layout, &[0]).unwrap();
        let one = Ket::basis(&layout, &[1]).unwrap();
        assert_eq!(fidelity(&zero, &DensityMatrix::pure(&one)).unwrap(), 0.0);

        let plus = Ket::superposition(&layout, &[(ONE, &[0]), (ONE, &[1])]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(&layout);
        assert!((fidelity(&plus, &mixed).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_rejects_layout_mismatch() {
        let a = SpaceLayout::single("q", 2).unwrap();
        let b = SpaceLayout::single("r", 2).unwrap();
        let k = Ket::basis(&a, &[0]).unwrap();
        let rho = DensityMatrix::maximally_mixed(&b);
        assert!(matches!(fidelity(&k, &rho), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn projection_examples() {
        let q = qubit_ops();
        let layout = q.proj1.layout().clone();
        let one = DensityMatrix::pure(&Ket::basis(&layout, &[1]).unwrap());
        let (post, p) = project(&one, &q.proj1).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(close(post.matrix(), one.matrix(), 1e-15));

        let plus = Ket::superposition(&layout, &[(ONE, &[0]), (ONE, &[1])]).unwrap();
        let (post, p) = project(&DensityMatrix::pure(&plus), &q.proj0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(close(post.matrix(), q.proj0.matrix(), 1e-15));

        let err = project(&one, &q.proj0).unwrap_err();
        assert!(matches!(err, Error::NegligibleBranch { .. }));
        assert!(alloc::format!("{err}").contains("negligible weight"));
    }

    #[test]
    fn projection_rejects_non_projector() {
        let q = qubit_ops();
        let rho = DensityMatrix::maximally_mixed(q.sigma_z.layout());
        assert!(matches!(project(&rho, &q.sigma_plus), Err(Error::NotProjector { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        let layout = SpaceLayout::single("q", 2).unwrap();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace, layout.clone()).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[C64::from(1.1), ZERO, ZERO, C64::from(-0.1)]);
        assert!(DensityMatrix::new(negative, layout.clone()).is_err());
        let ok = CMatrix::identity(2, 2).unscale(2.0);
        assert!(DensityMatrix::new(ok, layout).is_ok());
    }

    #[test]
    fn layout_rejects_bad_input() {
        assert!(SpaceLayout::new(&[("a", 1)]).is_err());
        assert!(SpaceLayout::new(&[("a", 2), ("a", 2)]).is_err());
        let l = SpaceLayout::new(&[("a", 2), ("b", 3), ("c", 2)]).unwrap();
        for i in 0..l.total_dim() {
            assert_eq!(l.basis_index(&l.levels_of(i)).unwrap(), i);
        }
    }

    fn small_matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
            .prop_map(move |v| CMatrix::from_iterator(dim, dim, v.into_iter().map(|(re, im)| C64::new(re, im))))
    }

    fn on(label: &str, m: CMatrix) -> Operator {
        let d = m.nrows();
        Operator::new(m, SpaceLayout::single(label, d).unwrap()).unwrap()
    }

    proptest! {
        #[test]
        fn mixed_product_property(a in small_matrix(2), b in small_matrix(3), c in small_matrix(2), d in small_matrix(3)) {
            let (a, c) = (on("x", a), on("x", c));
            let (b, d) = (on("y", b), on("y", d));
            let lhs = &tensor(&a, &b) * &tensor(&c, &d);
            let rhs = tensor(&(&a * &c), &(&b * &d));
            prop_assert!(close(lhs.matrix(), rhs.matrix(), 1e-12));
        }

        #[test]
        fn embeds_on_distinct_slots_commute(x in small_matrix(2), y in small_matrix(3), i in 0usize..3, j in 0usize..3) {
            prop_assume!(i != j);
            let layout = SpaceLayout::new(&[("a", 2), ("b", 3), ("c", 2)]).unwrap();
            let dims = [2, 3, 2];
            let pick = |k: usize| if dims[k] == 2 { x.clone() } else { y.clone() };
            let ex = embed(&on("p", pick(i)), i, &layout).unwrap();
            let ey = embed(&on("q", pick(j)), j, &layout).unwrap();
            prop_assert!(close((&ex * &ey).matrix(), (&ey * &ex).matrix(), 1e-12));
        }

        #[test]
        fn fidelity_linear_and_phase_invariant(
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
            w in 0.0f64..1.0,
            phase in -3.2f64..3.2,
        ) {
            let layout = SpaceLayout::new(&[("a", 2), ("b", 2)]).unwrap();
            let v = CVector::from_iterator(4, amps.iter().map(|&(r, i)| C64::new(r, i)));
            prop_assume!(v.norm() > 1e-3);
            let psi = Ket::new(v, layout.clone()).unwrap();
            let other = Ket::basis(&layout, &[1, 0]).unwrap();
            let rho1 = DensityMatrix::pure(&other);
            let rho2 = DensityMatrix::maximally_mixed(&layout);
            let mix = DensityMatrix::new(
                rho1.matrix().scale(w) + rho2.matrix().scale(1.0 - w),
                layout.clone(),
            ).unwrap();
            let f_mix = fidelity(&psi, &mix).unwrap();
            let f_lin = w * fidelity(&psi, &rho1).unwrap() + (1.0 - w) * fidelity(&psi, &rho2).unwrap();
            prop_assert!((f_mix - f_lin).abs() < 1e-12);
            let f_phase = fidelity(&psi.with_phase(phase), &mix).unwrap();
            prop_assert!((f_phase - f_mix).abs() < 1e-12);
        }

        #[test]
        fn projection_returns_unit_trace(
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        ) {
            let layout = SpaceLayout::new(&[("a", 2), ("b", 2)]).unwrap();
            let v = CVector::from_iterator(4, amps.iter().map(|&(r, i)| C64::new(r, i)));
            prop_assume!(v.norm() > 1e-3);
            let rho = DensityMatrix::pure(&Ket::new(v, layout.clone()).unwrap());
            let p1 = embed(&qubit_ops().proj1, 0, &layout).unwrap();
            match project(&rho, &p1) {
                Ok((post, _)) => prop_assert!((post.trace().re - 1.0).abs() < 1e-9),
                Err(Error::NegligibleBranch { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
