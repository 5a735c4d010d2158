//! Pure states, general operators and density matrices over a subsystem layout.

use std::ops::Deref;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::layout::{Party, SubsystemLayout};
use crate::tensor::linalg;
use crate::tensor::matrix::Matrix;

/// Tolerance for construction-level invariants (norm, trace, Hermiticity).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance on the smallest eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-10;

fn check_finite(values: &[C64], what: &'static str) -> Result<()> {
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

fn label_positions(layout: &SubsystemLayout, labels: &[&str]) -> Result<Vec<usize>> {
    let mut positions = Vec::with_capacity(labels.len());
    for l in labels {
        let p = layout.position(l)?;
        if positions.contains(&p) {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
        positions.push(p);
    }
    Ok(positions)
}

/// Index map for a reordering: `map[new] = old`.
fn permutation_map(layout: &SubsystemLayout, order: &[&str]) -> Result<(SubsystemLayout, Vec<usize>)> {
    let positions = layout.permutation_positions(order)?;
    let (map, _) = layout.split_offsets(&positions);
    Ok((layout.permuted(order)?, map))
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SubsystemLayout,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized within [`CONSTRUCTION_TOL`].
    pub fn new(layout: SubsystemLayout, amps: Vec<C64>) -> Result<Self> {
        let state = Self::unchecked_norm(layout, amps)?;
        let dev = (state.norm() - 1.0).abs();
        if dev > CONSTRUCTION_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(state)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(layout: SubsystemLayout, amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::unchecked_norm(layout, amps)?;
        let norm = state.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(1.0));
        }
        state.amps.iter_mut().for_each(|z| *z /= norm);
        Ok(state)
    }

    fn unchecked_norm(layout: SubsystemLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: amps.len() });
        }
        check_finite(&amps, "state amplitudes")?;
        Ok(Self { layout, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let n = layout.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, found: index });
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Componentwise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self { layout: self.layout.clone(), amps: self.amps.iter().map(|z| z.conj()).collect() }
    }

    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self { layout: self.layout.relabeled(labels)?, amps: self.amps.clone() })
    }

    pub fn with_parties(&self, parties: &[Party]) -> Result<Self> {
        Ok(Self { layout: self.layout.with_parties(parties)?, amps: self.amps.clone() })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_operator_unchecked(Operator {
            layout: self.layout.clone(),
            matrix: Matrix::outer(&self.amps),
        })
    }

    /// Reduced density matrix on `keep` (result in layout order), computed
    /// without forming the full projector.
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut positions = label_positions(&self.layout, keep)?;
        positions.sort_unstable();
        let (kept, traced) = self.layout.split_offsets(&positions);
        let labels: Vec<&str> = positions.iter().map(|&p| self.layout.labels()[p]).collect();
        let layout = self.layout.restricted(&labels)?;
        let n = kept.len();
        let matrix = Matrix::from_fn(n, |a, b| {
            traced.iter().map(|t| self.amps[kept[a] + t] * self.amps[kept[b] + t].conj()).sum()
        });
        Ok(DensityMatrix::from_operator_unchecked(Operator { layout, matrix }))
    }

    /// Applies `op` to the subsystems `labels` (in that order, first most
    /// significant), identity elsewhere. The result is renormalized only by
    /// the caller's choice; a unitary keeps the norm.
    pub fn apply_local(&self, labels: &[&str], op: &Matrix) -> Result<Self> {
        let positions = label_positions(&self.layout, labels)?;
        let (sel, rest) = self.layout.split_offsets(&positions);
        if op.dim() != sel.len() {
            return Err(Error::DimensionMismatch { expected: sel.len(), found: op.dim() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut column = vec![C64::new(0.0, 0.0); sel.len()];
        for &r in &rest {
            for (b, s) in sel.iter().enumerate() {
                column[b] = self.amps[s + r];
            }
            for (a, s) in sel.iter().enumerate() {
                out[s + r] = (0..sel.len()).map(|b| op[(a, b)] * column[b]).sum();
            }
        }
        Ok(Self { layout: self.layout.clone(), amps: out })
    }

    /// Contracts `⟨target|` against the subsystems `labels`.
    ///
    /// Returns the squared norm of the contracted vector together with its
    /// normalized version on the remaining subsystems (layout order).
    pub fn project_out(&self, labels: &[&str], target: &StateVector) -> Result<(f64, StateVector)> {
        let positions = label_positions(&self.layout, labels)?;
        let dims: Vec<usize> = positions.iter().map(|&p| self.layout.subsystems()[p].dim).collect();
        if dims != target.layout.dims() {
            return Err(Error::DimensionMismatch { expected: dims.iter().product(), found: target.dim() });
        }
        let remaining: Vec<&str> = self.layout.labels().into_iter().filter(|l| !labels.contains(l)).collect();
        if remaining.is_empty() {
            return Err(Error::InvalidLayout("nothing left after projection".into()));
        }
        let (sel, rest) = self.layout.split_offsets(&positions);
        let amps: Vec<C64> =
            rest.iter().map(|r| sel.iter().zip(&target.amps).map(|(s, t)| t.conj() * self.amps[s + r]).sum()).collect();
        let weight: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        let layout = self.layout.restricted(&remaining)?;
        Ok((weight, StateVector::normalized(layout, amps)?))
    }
}

/// A square operator acting on the composite space of a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SubsystemLayout,
    matrix: Matrix,
}

impl Operator {
    pub fn new(layout: SubsystemLayout, matrix: Matrix) -> Result<Self> {
        if matrix.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: matrix.dim() });
        }
        Ok(Self { layout, matrix })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self { layout: self.layout.relabeled(labels)?, matrix: self.matrix.clone() })
    }

    /// Transposes every index belonging to `labels`.
    pub fn partial_transpose_labels(&self, labels: &[&str]) -> Result<Operator> {
        let positions = label_positions(&self.layout, labels)?;
        let (sel, rest) = self.layout.split_offsets(&positions);
        let n = self.dim();
        let src = self.matrix.as_slice();
        let mut out = Matrix::zeros(n);
        let dst = out.as_mut_slice();
        for &si in &sel {
            for &ri in &rest {
                let row = si + ri;
                for &sj in &sel {
                    for &rj in &rest {
                        dst[row * n + sj + rj] = src[(sj + ri) * n + si + rj];
                    }
                }
            }
        }
        Ok(Operator { layout: self.layout.clone(), matrix: out })
    }

    /// Partial transpose over every subsystem of `party`.
    pub fn partial_transpose(&self, party: Party) -> Result<Operator> {
        let labels = self.layout.party_labels(party);
        if labels.is_empty() {
            return Err(Error::InvalidCut(format!("party {party} holds no subsystems")));
        }
        self.partial_transpose_labels(&labels)
    }

    /// Trace over everything outside `keep`; result in layout order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Operator> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut positions = label_positions(&self.layout, keep)?;
        positions.sort_unstable();
        let (kept, traced) = self.layout.split_offsets(&positions);
        let labels: Vec<&str> = positions.iter().map(|&p| self.layout.labels()[p]).collect();
        let layout = self.layout.restricted(&labels)?;
        let matrix =
            Matrix::from_fn(kept.len(), |a, b| traced.iter().map(|t| self.matrix[(kept[a] + t, kept[b] + t)]).sum());
        Ok(Operator { layout, matrix })
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl Deref for DensityMatrix {
    type Target = Operator;

    fn deref(&self) -> &Operator {
        &self.op
    }
}

impl DensityMatrix {
    /// Checks Hermiticity and trace; positivity is left to [`Self::validate`].
    pub fn new(layout: SubsystemLayout, matrix: Matrix) -> Result<Self> {
        let op = Operator::new(layout, matrix)?;
        let herm = op.matrix.hermiticity_deviation();
        if herm > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = op.matrix.trace();
        let dev = (tr - C64::new(1.0, 0.0)).norm();
        if dev > CONSTRUCTION_TOL {
            return Err(Error::BadTrace(dev));
        }
        Ok(Self { op })
    }

    /// Full invariant check including the smallest eigenvalue.
    pub fn validate(&self) -> Result<()> {
        let eig = linalg::hermitian_eigenvalues(&self.op.matrix)?;
        let min = eig.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        let matrix = Matrix::identity(n).scale_real(1.0 / n as f64);
        Self { op: Operator { layout, matrix } }
    }

    /// Convex combination `Σ w_k ρ_k`; weights must sum to 1.
    pub fn mixture(terms: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidLayout("empty mixture".into()))?;
        let layout = first.1.layout().clone();
        let mut acc = Matrix::zeros(layout.total_dim());
        for (w, rho) in terms {
            if rho.layout() != &layout {
                return Err(Error::InvalidLayout("mixture terms have different layouts".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidLayout(format!("negative mixture weight {w}")));
            }
            acc = &acc + &rho.matrix().scale_real(*w);
        }
        Self::new(layout, acc)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.op.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self { op: self.op.relabeled(labels)? })
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        Ok(Self { op: self.op.partial_trace(keep)? })
    }
}

/// Shared structure of objects living on a [`SubsystemLayout`].
pub trait Composite: Sized {
    fn layout(&self) -> &SubsystemLayout;
    fn tensor(&self, other: &Self) -> Result<Self>;
    fn permute(&self, order: &[&str]) -> Result<Self>;
}

impl Composite for StateVector {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Ok(Self { layout, amps })
    }

    fn permute(&self, order: &[&str]) -> Result<Self> {
        let (layout, map) = permutation_map(&self.layout, order)?;
        Ok(Self { layout, amps: map.iter().map(|&old| self.amps[old]).collect() })
    }
}

impl Composite for Operator {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, matrix: self.matrix.kron(&other.matrix) })
    }

    fn permute(&self, order: &[&str]) -> Result<Self> {
        let (layout, map) = permutation_map(&self.layout, order)?;
        let matrix = Matrix::from_fn(map.len(), |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self { layout, matrix })
    }
}

impl Composite for DensityMatrix {
    fn layout(&self) -> &SubsystemLayout {
        &self.op.layout
    }

    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { op: self.op.tensor(&other.op)? })
    }

    fn permute(&self, order: &[&str]) -> Result<Self> {
        Ok(Self { op: self.op.permute(order)? })
    }
}

pub fn tensor_product<T: Composite>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Reorders subsystems to `order`; the physical content is unchanged.
pub fn permute_subsystems<T: Composite>(x: &T, order: &[&str]) -> Result<T> {
    x.permute(order)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

pub fn partial_transpose(op: &Operator, party: Party) -> Result<Operator> {
    op.partial_transpose(party)
}

/// Anything a pure reference state can be compared against.
pub trait FidelityTarget {
    fn fidelity_with(&self, phi: &StateVector) -> Result<f64>;
}

impl FidelityTarget for StateVector {
    fn fidelity_with(&self, phi: &StateVector) -> Result<f64> {
        Ok(phi.inner(self)?.norm_sqr().clamp(0.0, 1.0))
    }
}

impl FidelityTarget for DensityMatrix {
    fn fidelity_with(&self, phi: &StateVector) -> Result<f64> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: phi.dim() });
        }
        let rho_phi = self.matrix().apply(phi.amplitudes());
        let f: C64 = phi.amplitudes().iter().zip(&rho_phi).map(|(a, b)| a.conj() * b).sum();
        Ok(f.re.clamp(0.0, 1.0))
    }
}

/// `⟨φ|ρ|φ⟩`, or `|⟨φ|χ⟩|²` for a pure target.
pub fn fidelity_pure<T: FidelityTarget + ?Sized>(phi: &StateVector, target: &T) -> Result<f64> {
    target.fidelity_with(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubits(labels: &[&str]) -> SubsystemLayout {
        SubsystemLayout::new(labels.iter().map(|l| crate::tensor::layout::Subsystem::new(*l, 2, Party::A)).collect())
            .unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = StateVector::basis(qubits(&["x"]), 0).unwrap();
        let one = StateVector::basis(qubits(&["y"]), 1).unwrap();
        let s = tensor_product(&zero, &one).unwrap();
        let expect: Vec<C64> = [0., 1., 0., 0.].iter().map(|&r| C64::new(r, 0.)).collect();
        assert_eq!(s.amplitudes(), expect.as_slice());
    }

    #[test]
    fn label_collision() {
        let a = StateVector::basis(qubits(&["x"]), 0).unwrap();
        assert!(matches!(tensor_product(&a, &a), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn swap_subsystems() {
        let s = StateVector::basis(qubits(&["x", "y"]), 1).unwrap();
        let swapped = permute_subsystems(&s, &["y", "x"]).unwrap();
        assert_eq!(swapped.amplitudes()[2], C64::new(1.0, 0.0));
        assert_eq!(swapped.layout().labels(), vec!["y", "x"]);
        let same = permute_subsystems(&s, &["x", "y"]).unwrap();
        assert_eq!(same, s);
    }

    #[test]
    fn unnormalized_rejected() {
        let amps = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(StateVector::new(qubits(&["x"]), amps.clone()), Err(Error::NotNormalized(_))));
        let s = StateVector::normalized(qubits(&["x"]), amps).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_keep_is_error() {
        let rho = DensityMatrix::maximally_mixed(qubits(&["x", "y"]));
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::EmptyKeep)));
        let same = partial_trace(&rho, &["x", "y"]).unwrap();
        assert_eq!(same, rho);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = StateVector::basis(qubits(&["x"]), 0).unwrap();
        let rho = DensityMatrix::maximally_mixed(qubits(&["x", "y"]));
        assert!(matches!(fidelity_pure(&a, &rho), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_orthogonal_and_equal() {
        let a = StateVector::basis(qubits(&["x"]), 0).unwrap();
        let b = StateVector::basis(qubits(&["x"]), 1).unwrap();
        assert_eq!(fidelity_pure(&a, &b).unwrap(), 0.0);
        assert_eq!(fidelity_pure(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn density_rejects_bad_trace() {
        let m = Matrix::identity(2);
        assert!(matches!(DensityMatrix::new(qubits(&["x"]), m), Err(Error::BadTrace(_))));
    }

    #[test]
    fn validate_catches_negative_eigenvalue() {
        let m = Matrix::from_diagonal(&[1.5, -0.5]);
        let rho = DensityMatrix::new(qubits(&["x"]), m).unwrap();
        assert!(matches!(rho.validate(), Err(Error::NotPositive(_))));
    }

    #[test]
    fn apply_and_project() {
        // X on y maps |00⟩ to |01⟩; projecting x onto |0⟩ leaves |1⟩ on y.
        let s = StateVector::basis(qubits(&["x", "y"]), 0).unwrap();
        let x = Matrix::from_row_major(2, vec![C64::new(0., 0.), C64::new(1., 0.), C64::new(1., 0.), C64::new(0., 0.)])
            .unwrap();
        let t = s.apply_local(&["y"], &x).unwrap();
        assert_eq!(t.amplitudes()[1], C64::new(1.0, 0.0));
        let zero = StateVector::basis(qubits(&["x"]), 0).unwrap();
        let (w, rest) = t.project_out(&["x"], &zero).unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(rest.layout().labels(), vec!["y"]);
        assert_eq!(rest.amplitudes()[1], C64::new(1.0, 0.0));
    }
}
