//! Entanglement diagnostics across an Alice:Bob cut.
//!
//! Logarithms are base 2 throughout, so entropies and log-negativities are in
//! ebits. Distillable entanglement itself is never computed; it is bracketed
//! by the single-copy distillation protocol from below and by the
//! log-negativity from above.

use std::borrow::Cow;
use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::protocols::distill_copy;
use crate::report::Check;
use crate::states::{as_bipartite, bell_state_on, build_rho, build_rho_s, rho_from_factors, BellIndex};
use crate::tensor::{
    hermitian_eigenvalues, linalg, trace_norm, Composite, DensityMatrix, Party, StateVector, SubsystemLayout,
};

/// Bipartition of a layout's labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub party_a: BTreeSet<String>,
    pub party_b: BTreeSet<String>,
}

impl Cut {
    pub fn new<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<Self> {
        let party_a: BTreeSet<String> = a.iter().map(|s| s.as_ref().to_string()).collect();
        let party_b: BTreeSet<String> = b.iter().map(|s| s.as_ref().to_string()).collect();
        if party_a.is_empty() || party_b.is_empty() {
            return Err(Error::InvalidCut("both sides must be nonempty".into()));
        }
        if let Some(l) = party_a.intersection(&party_b).next() {
            return Err(Error::InvalidCut(format!("`{l}` on both sides")));
        }
        Ok(Self { party_a, party_b })
    }

    /// The cut given by the layout's own party tags.
    pub fn from_parties(layout: &SubsystemLayout) -> Result<Self> {
        Self::new(&layout.party_labels(Party::A), &layout.party_labels(Party::B))
    }

    pub fn validate(&self, layout: &SubsystemLayout) -> Result<()> {
        let all: BTreeSet<String> = layout.labels().into_iter().map(String::from).collect();
        let union: BTreeSet<String> = self.party_a.union(&self.party_b).cloned().collect();
        if union != all {
            return Err(Error::InvalidCut(format!("cut covers {:?}, layout has {:?}", union, all)));
        }
        Ok(())
    }

    fn a_labels(&self) -> Vec<&str> {
        self.party_a.iter().map(String::as_str).collect()
    }

    fn b_labels(&self) -> Vec<&str> {
        self.party_b.iter().map(String::as_str).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schmidt {
    /// Descending, nonnegative; `min(D_A, D_B)` entries.
    pub coefficients: Vec<f64>,
    /// Number of coefficients above [`SCHMIDT_RANK_TOL`].
    pub rank: usize,
}

pub const SCHMIDT_RANK_TOL: f64 = 1e-10;

pub fn schmidt_decomposition(phi: &StateVector, cut: &Cut) -> Result<Schmidt> {
    cut.validate(phi.layout())?;
    let a = cut.a_labels();
    let mut order = a.clone();
    order.extend(cut.b_labels());
    let arranged = phi.permute(&order)?;
    let rows: usize = a.iter().map(|l| phi.layout().get(l).map(|s| s.dim)).product::<Result<usize>>()?;
    let cols = phi.dim() / rows;
    let coefficients = linalg::singular_values(rows, cols, arranged.amplitudes());
    let rank = coefficients.iter().filter(|&&c| c > SCHMIDT_RANK_TOL).count();
    Ok(Schmidt { coefficients, rank })
}

/// `−Σ p_k log₂ p_k` over a probability vector, zero entries skipped.
pub fn shannon_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    probabilities.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum::<f64>().max(0.0)
}

pub fn entanglement_entropy(phi: &StateVector, cut: &Cut) -> Result<f64> {
    let s = schmidt_decomposition(phi, cut)?;
    let max = (s.coefficients.len() as f64).log2();
    Ok(shannon_bits(s.coefficients.iter().map(|c| c * c)).min(max))
}

/// Pure or mixed input to the mixed-state diagnostics.
pub trait AsDensity {
    fn as_density(&self) -> Cow<'_, DensityMatrix>;
}

impl AsDensity for DensityMatrix {
    fn as_density(&self) -> Cow<'_, DensityMatrix> {
        Cow::Borrowed(self)
    }
}

impl AsDensity for StateVector {
    fn as_density(&self) -> Cow<'_, DensityMatrix> {
        Cow::Owned(self.to_density())
    }
}

fn partial_transpose_eigenvalues(rho: &DensityMatrix, cut: &Cut) -> Result<Vec<f64>> {
    cut.validate(rho.layout())?;
    let pt = rho.partial_transpose_labels(&cut.b_labels())?;
    hermitian_eigenvalues(pt.matrix())
}

/// `log₂ ‖ρ^{T_B}‖₁`, clamped at 0 from below.
pub fn log_negativity<T: AsDensity + ?Sized>(rho: &T, cut: &Cut) -> Result<f64> {
    let rho = rho.as_density();
    cut.validate(rho.layout())?;
    let pt = rho.partial_transpose_labels(&cut.b_labels())?;
    Ok(trace_norm(pt.matrix())?.log2().max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PptVerdict {
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
}

/// Smallest eigenvalue of the partial transpose tolerated as "positive".
pub const PPT_TOL: f64 = 1e-10;

pub fn ppt_check(rho: &DensityMatrix, cut: &Cut) -> Result<PptVerdict> {
    let eig = partial_transpose_eigenvalues(rho, cut)?;
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
    Ok(PptVerdict { is_ppt: min_eigenvalue >= -PPT_TOL, min_eigenvalue })
}

/// The four product terms `¼ |φ_{m,n}⟩⟨φ_{m,n}|_{A1A2} ⊗ |φ_{m,n}⟩⟨φ_{m,n}|_{B1B2}`,
/// each on layout `A1 A2 B1 B2` with A1, A2 held by A and B1, B2 by B.
pub fn smolin_separable_terms() -> Vec<(f64, DensityMatrix)> {
    BellIndex::all(2)
        .map(|idx| {
            let alice = bell_state_on(idx, "A1", "A2").with_parties(&[Party::A, Party::A]).expect("two parties");
            let bob = bell_state_on(idx, "B1", "B2").with_parties(&[Party::B, Party::B]).expect("two parties");
            let term = alice.to_density().tensor(&bob.to_density()).expect("disjoint labels");
            (0.25, term)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmolinCheck {
    pub equal: bool,
    /// Frobenius norm of `ρ_s − Σ_k w_k τ_k` after reordering.
    pub distance: f64,
}

/// Compares `ρ_s` at `d = 2` with the explicit separable mixture of
/// [`smolin_separable_terms`] reordered to `A1 B1 A2 B2`.
pub fn smolin_decomposition_check(d: usize, tolerance: f64) -> Result<SmolinCheck> {
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let mixture = DensityMatrix::mixture(&smolin_separable_terms())?;
    let reordered = mixture.permute(&["A1", "B1", "A2", "B2"])?;
    let rho_s = build_rho_s(2)?;
    let distance = (rho_s.matrix() - reordered.matrix()).frobenius_norm();
    Ok(SmolinCheck { equal: distance <= tolerance, distance })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithNecessityBound,
    BelowNecessityBound,
}

/// Computable ingredients of the argument that the resource must be maximally
/// entangled.
#[derive(Clone, Debug, Serialize)]
pub struct NecessityReport {
    pub d: usize,
    /// `‖ρ − Π(ρ_s ⊗ |ψ⟩⟨ψ|)Π†‖_F`
    pub factorization_distance: f64,
    pub rho_s_ppt: PptVerdict,
    pub log_negativity_rho: f64,
    pub log_negativity_rho_s: f64,
    pub log_negativity_psi: f64,
    /// Smallest output fidelity with `|φ_{0,0}⟩` over all mixture components.
    pub distill_min_fidelity: f64,
    /// Largest `|E(output) − log₂ d|` over all branches of all components.
    pub distill_entropy_error: f64,
    pub schmidt: Schmidt,
    pub entropy: f64,
    pub verdict: Verdict,
    pub psi_is_mes: bool,
}

/// Tolerances used by [`NecessityReport::checks`].
#[derive(Clone, Copy, Debug)]
pub struct NecessityTolerances {
    pub exact: f64,
    pub psd: f64,
    pub spectral: f64,
}

impl Default for NecessityTolerances {
    fn default() -> Self {
        Self { exact: 1e-12, psd: PPT_TOL, spectral: 1e-9 }
    }
}

pub fn necessity_report(d: usize, psi: &StateVector) -> Result<NecessityReport> {
    necessity_report_with(d, psi, NecessityTolerances::default())
}

pub fn necessity_report_with(d: usize, psi: &StateVector, tol: NecessityTolerances) -> Result<NecessityReport> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let psi = as_bipartite(psi)?;
    let rho = build_rho(d, &psi)?;
    let factored = rho_from_factors(d, &psi)?;
    let factorization_distance = (rho.matrix() - factored.matrix()).frobenius_norm();

    let rho_s = build_rho_s(d)?;
    let rho_s_cut = Cut::from_parties(rho_s.layout())?;
    let rho_s_ppt = ppt_check(&rho_s, &rho_s_cut)?;
    let log_negativity_rho_s = log_negativity(&rho_s, &rho_s_cut)?;
    let log_negativity_rho = log_negativity(&rho, &Cut::from_parties(rho.layout())?)?;
    let psi_cut = Cut::from_parties(psi.layout())?;
    let log_negativity_psi = log_negativity(&psi, &psi_cut)?;

    let target_entropy = (d as f64).log2();
    let output_cut = Cut::new(&["A3"], &["B3"])?;
    let mut distill_min_fidelity = 1.0f64;
    let mut distill_entropy_error = 0.0f64;
    if psi.layout().dims() == [d, d] {
        for component in BellIndex::all(d) {
            let run = distill_copy(d, component, &psi)?;
            distill_min_fidelity = distill_min_fidelity.min(run.fidelity()?);
            for b in &run.branches {
                let e = entanglement_entropy(&b.output, &output_cut)?;
                distill_entropy_error = distill_entropy_error.max((e - target_entropy).abs());
            }
        }
    } else {
        distill_min_fidelity = 0.0;
        distill_entropy_error = f64::INFINITY;
    }

    let schmidt = schmidt_decomposition(&psi, &psi_cut)?;
    let entropy = entanglement_entropy(&psi, &psi_cut)?;
    let verdict = if entropy >= target_entropy - tol.exact && schmidt.rank >= d {
        Verdict::ConsistentWithNecessityBound
    } else {
        Verdict::BelowNecessityBound
    };
    let uniform = 1.0 / (d as f64).sqrt();
    let psi_is_mes =
        schmidt.coefficients.len() == d && schmidt.coefficients.iter().all(|c| (c - uniform).abs() <= tol.exact);

    Ok(NecessityReport {
        d,
        factorization_distance,
        rho_s_ppt,
        log_negativity_rho,
        log_negativity_rho_s,
        log_negativity_psi,
        distill_min_fidelity,
        distill_entropy_error,
        schmidt,
        entropy,
        verdict,
        psi_is_mes,
    })
}

impl NecessityReport {
    /// Report rows for checks (a)–(e). The distillation and verdict rows are
    /// informational unless `ψ` is maximally entangled.
    pub fn checks(&self, psi_label: &str, tol: NecessityTolerances) -> Vec<Check> {
        let d = self.d;
        let info = !self.psi_is_mes;
        let with_psi = |c: Check| c.param("psi", json!(psi_label));
        vec![
            with_psi(Check::at_most("necessity.factorization", d, self.factorization_distance, tol.exact)),
            with_psi(Check::at_least("necessity.rho_s_ppt", d, self.rho_s_ppt.min_eigenvalue, -tol.psd)),
            with_psi(
                Check::at_most(
                    "necessity.lognegativity_chain",
                    d,
                    (self.log_negativity_rho - self.log_negativity_rho_s - self.log_negativity_psi)
                        .abs()
                        .max((self.log_negativity_rho - self.log_negativity_psi).abs()),
                    tol.spectral,
                )
                .param("log_negativity_rho", json!(self.log_negativity_rho))
                .param("log_negativity_psi", json!(self.log_negativity_psi)),
            ),
            with_psi(Check::at_most("necessity.distill_fidelity", d, 1.0 - self.distill_min_fidelity, tol.exact))
                .informational(info),
            with_psi(Check::at_most("necessity.distill_entropy", d, self.distill_entropy_error, tol.exact))
                .informational(info),
            with_psi(
                Check::new(
                    "necessity.verdict",
                    d,
                    self.entropy,
                    tol.exact,
                    self.verdict == Verdict::ConsistentWithNecessityBound,
                )
                .param("schmidt_rank", json!(self.schmidt.rank))
                .param("verdict", json!(self.verdict)),
            )
            .informational(info),
        ]
    }
}
