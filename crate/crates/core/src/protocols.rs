//! LOCC protocols simulated by exhaustive branch enumeration.
//!
//! Every measurement produces one branch per outcome with its exact
//! probability; branches below [`PRUNE_THRESHOLD`] are dropped and their mass
//! is accumulated so callers can report it. Each surviving branch carries a
//! [`Transcript`] of the local operations and classical messages that led
//! to it.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::{as_bipartite, bell_state, bell_state_on, weyl_operator, BellIndex};
use crate::tensor::{Composite, DensityMatrix, FidelityTarget, Matrix, Party, StateVector, SubsystemLayout};

/// Branches with probability at or below this are discarded.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// One measurement outcome.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: BellIndex,
    pub probability: f64,
    /// The full state after the Lüders update, renormalized.
    pub post_state: StateVector,
}

#[derive(Clone, Debug)]
pub struct Measurement {
    pub branches: Vec<Branch>,
    pub pruned: Vec<(BellIndex, f64)>,
}

impl Measurement {
    pub fn pruned_mass(&self) -> f64 {
        self.pruned.iter().map(|(_, p)| p).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    LocalUnitary {
        labels: Vec<String>,
        operator: String,
        /// Step index of the message or own measurement this choice depends on.
        conditioned_on: Option<usize>,
    },
    Measurement {
        labels: Vec<String>,
        basis: String,
        outcome: BellIndex,
    },
    ClassicalMessage {
        to: Party,
        payload: BellIndex,
        /// Step index of the sender's measurement being announced.
        reports: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub actor: Party,
    #[serde(flatten)]
    pub action: Action,
}

/// Ordered record of one protocol branch.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Transcript {
    pub steps: Vec<Step>,
}

impl Transcript {
    fn push(&mut self, actor: Party, action: Action) -> usize {
        self.steps.push(Step { actor, action });
        self.steps.len() - 1
    }

    pub fn measurement(&mut self, actor: Party, labels: &[&str], outcome: BellIndex) -> usize {
        self.push(
            actor,
            Action::Measurement {
                labels: labels.iter().map(|s| s.to_string()).collect(),
                basis: "bell".into(),
                outcome,
            },
        )
    }

    pub fn message(&mut self, actor: Party, payload: BellIndex, reports: usize) -> usize {
        self.push(actor, Action::ClassicalMessage { to: actor.other(), payload, reports })
    }

    pub fn unitary(&mut self, actor: Party, labels: &[&str], operator: String, conditioned_on: Option<usize>) -> usize {
        self.push(
            actor,
            Action::LocalUnitary { labels: labels.iter().map(|s| s.to_string()).collect(), operator, conditioned_on },
        )
    }

    pub fn messages(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| matches!(s.action, Action::ClassicalMessage { .. }))
    }

    /// Checks that every step is local to its actor and that messages and
    /// conditioned operations only refer to information the actor holds.
    pub fn validate(&self, layout: &SubsystemLayout) -> Result<()> {
        let owns = |actor: Party, labels: &[String]| -> Result<()> {
            for l in labels {
                let s = layout.get(l)?;
                if s.party != actor {
                    return Err(Error::Transcript(format!("{actor} acts on `{l}` held by {}", s.party)));
                }
            }
            Ok(())
        };
        for (k, step) in self.steps.iter().enumerate() {
            match &step.action {
                Action::Measurement { labels, .. } => owns(step.actor, labels)?,
                Action::LocalUnitary { labels, conditioned_on, .. } => {
                    owns(step.actor, labels)?;
                    if let Some(c) = *conditioned_on {
                        let ok = c < k
                            && match &self.steps[c].action {
                                Action::ClassicalMessage { to, .. } => *to == step.actor,
                                Action::Measurement { .. } => self.steps[c].actor == step.actor,
                                Action::LocalUnitary { .. } => false,
                            };
                        if !ok {
                            return Err(Error::Transcript(format!(
                                "step {k} is conditioned on step {c}, which {} has not learned",
                                step.actor
                            )));
                        }
                    }
                }
                Action::ClassicalMessage { to, payload, reports } => {
                    if *to == step.actor {
                        return Err(Error::Transcript(format!("step {k}: message to self")));
                    }
                    let ok = *reports < k
                        && self.steps[*reports].actor == step.actor
                        && matches!(&self.steps[*reports].action,
                            Action::Measurement { outcome, .. } if outcome == payload);
                    if !ok {
                        return Err(Error::Transcript(format!(
                            "step {k}: message does not report a prior measurement by {}",
                            step.actor
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn actor_of(layout: &SubsystemLayout, pair: [&str; 2]) -> Result<(Party, usize)> {
    let a = layout.get(pair[0])?;
    let b = layout.get(pair[1])?;
    if a.dim != b.dim {
        return Err(Error::UnequalDims(pair[0].into(), pair[1].into()));
    }
    if a.party != b.party {
        return Err(Error::NotCoLocated(pair[0].into(), pair[1].into()));
    }
    Ok((a.party, a.dim))
}

/// Projective measurement of `pair` (first label as the first tensor factor)
/// in the basis `{|φ_{m,n}⟩}`.
pub fn bell_measurement(state: &StateVector, pair: [&str; 2]) -> Result<Measurement> {
    if pair[0] == pair[1] {
        return Err(Error::DuplicateLabel(pair[0].into()));
    }
    let (_, d) = actor_of(state.layout(), pair)?;
    let mut branches = Vec::with_capacity(d * d);
    let mut pruned = Vec::new();
    for outcome in BellIndex::all(d) {
        let projector = Matrix::outer(bell_state(outcome).amplitudes());
        let projected = state.apply_local(&pair, &projector)?;
        let probability = projected.norm().powi(2);
        if probability <= PRUNE_THRESHOLD {
            pruned.push((outcome, probability));
            continue;
        }
        let post_state = StateVector::normalized(projected.layout().clone(), projected.amplitudes().to_vec())?;
        branches.push(Branch { outcome, probability, post_state });
    }
    Ok(Measurement { branches, pruned })
}

/// Correction `W_{m,n} = Z^n X^{−m}` Bob applies after Alice announces `(m, n)`,
/// i.e. `W|j⟩ = ω^{(j−m)n}|j − m⟩`.
pub fn teleport_correction(idx: BellIndex) -> Matrix {
    let d = idx.d;
    Matrix::from_fn(d, |i, j| {
        if i == (j + d - idx.m) % d {
            crate::states::root_of_unity(d, i * idx.n)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[derive(Clone, Debug)]
pub struct TeleportBranch {
    pub outcome: BellIndex,
    pub probability: f64,
    /// Bob's qudit after the correction, labeled as his resource half.
    pub output: StateVector,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct Teleportation {
    pub branches: Vec<TeleportBranch>,
    pub pruned_mass: f64,
    /// Layout of the joint `χ ⊗ resource` system the transcripts refer to.
    pub layout: SubsystemLayout,
}

impl Teleportation {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability-weighted fidelity of the outputs with `chi`.
    pub fn average_fidelity(&self, chi: &StateVector) -> Result<f64> {
        self.branches.iter().map(|b| Ok(b.probability * b.output.fidelity_with(chi)?)).sum()
    }

    pub fn min_fidelity(&self, chi: &StateVector) -> Result<f64> {
        self.branches.iter().map(|b| b.output.fidelity_with(chi)).try_fold(1.0f64, |acc, f| Ok(acc.min(f?)))
    }
}

/// Teleports the single qudit `chi` (held by A) through `resource`.
///
/// Alice Bell-measures `(χ, her resource half)`, announces `(m, n)`, and Bob
/// applies [`teleport_correction`] to his half.
pub fn teleport(chi: &StateVector, resource: &StateVector) -> Result<Teleportation> {
    let resource = as_bipartite(resource)?;
    let chi_layout = chi.layout();
    if chi_layout.len() != 1 {
        return Err(Error::InvalidLayout(format!("teleported state must be one qudit, got {chi_layout}")));
    }
    let c = &chi_layout.subsystems()[0];
    if c.party != Party::A {
        return Err(Error::NotCoLocated(c.label.clone(), "Alice's resource half".into()));
    }
    let dims = resource.layout().dims();
    if dims[0] != c.dim || dims[1] != c.dim {
        return Err(Error::DimensionMismatch { expected: c.dim, found: dims[0].max(dims[1]) });
    }
    let labels = resource.layout().labels();
    let (a, b) = (labels[0].to_string(), labels[1].to_string());
    let joint = chi.tensor(&resource)?;
    let pair = [c.label.as_str(), a.as_str()];
    let measured = bell_measurement(&joint, pair)?;
    let pruned_mass = measured.pruned_mass();
    let mut branches = Vec::with_capacity(measured.branches.len());
    for br in measured.branches {
        let mut transcript = Transcript::default();
        let meas = transcript.measurement(Party::A, &pair, br.outcome);
        let msg = transcript.message(Party::A, br.outcome, meas);
        let corrected = br.post_state.apply_local(&[b.as_str()], &teleport_correction(br.outcome))?;
        transcript.unitary(Party::B, &[b.as_str()], format!("W{}", br.outcome), Some(msg));
        let (_, output) = corrected.project_out(&pair, &bell_state(br.outcome))?;
        branches.push(TeleportBranch { outcome: br.outcome, probability: br.probability, output, transcript });
    }
    Ok(Teleportation { branches, pruned_mass, layout: joint.layout().clone() })
}

#[derive(Clone, Debug)]
pub struct DiscriminationBranch {
    /// Alice's teleportation outcome.
    pub alice: BellIndex,
    /// Bob's Bell-measurement outcome, announced as the guess.
    pub announced: BellIndex,
    pub probability: f64,
    pub post_state: StateVector,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct Discrimination {
    pub d: usize,
    pub branches: Vec<DiscriminationBranch>,
    pub pruned_mass: f64,
    /// Bob's reduced state after Alice's measurement, averaged over her
    /// outcomes, before any message reaches him.
    pub bob_pre_message: DensityMatrix,
    pub layout: SubsystemLayout,
}

impl Discrimination {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability of each announced index, over all `d²` indices in order.
    pub fn distribution(&self) -> Vec<(BellIndex, f64)> {
        let mut acc: BTreeMap<BellIndex, f64> = BellIndex::all(self.d).map(|i| (i, 0.0)).collect();
        for b in &self.branches {
            *acc.get_mut(&b.announced).expect("announced index in range") += b.probability;
        }
        acc.into_iter().collect()
    }

    pub fn probability_of(&self, idx: BellIndex) -> f64 {
        self.branches.iter().filter(|b| b.announced == idx).map(|b| b.probability).sum()
    }
}

/// Discrimination run on an arbitrary joint state: the flag pair `flag`
/// (A half, B half) is identified using the resource pair `res`.
fn run_discrimination(state: &StateVector, flag: [&str; 2], res: [&str; 2]) -> Result<Discrimination> {
    let layout = state.layout();
    let d = layout.get(flag[0])?.dim;
    let alice_pair = [flag[0], res[0]];
    let bob_pair = [res[1], flag[1]];
    for (pair, party) in [(alice_pair, Party::A), (bob_pair, Party::B)] {
        let (actor, _) = actor_of(layout, pair)?;
        if actor != party {
            return Err(Error::NotCoLocated(pair[0].into(), pair[1].into()));
        }
    }
    if layout.get(res[1])?.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: layout.get(res[1])?.dim });
    }
    let bob_labels = layout.party_labels(Party::B);

    let alice = bell_measurement(state, alice_pair)?;
    let mut pruned_mass = alice.pruned_mass();
    let mut bob_view =
        Matrix::zeros(bob_labels.iter().map(|l| layout.get(l).map(|s| s.dim)).product::<Result<usize>>()?);
    let mut branches = Vec::new();
    for ab in &alice.branches {
        let reduced = ab.post_state.reduced(&bob_labels)?;
        bob_view = &bob_view + &reduced.matrix().scale_real(ab.probability);

        let mut transcript = Transcript::default();
        let meas = transcript.measurement(Party::A, &alice_pair, ab.outcome);
        let msg = transcript.message(Party::A, ab.outcome, meas);
        let corrected = ab.post_state.apply_local(&[res[1]], &teleport_correction(ab.outcome))?;
        transcript.unitary(Party::B, &[res[1]], format!("W{}", ab.outcome), Some(msg));

        let bob = bell_measurement(&corrected, bob_pair)?;
        pruned_mass += ab.probability * bob.pruned_mass();
        for bb in bob.branches {
            let mut t = transcript.clone();
            let bmeas = t.measurement(Party::B, &bob_pair, bb.outcome);
            t.message(Party::B, bb.outcome, bmeas);
            branches.push(DiscriminationBranch {
                alice: ab.outcome,
                announced: bb.outcome,
                probability: ab.probability * bb.probability,
                post_state: bb.post_state,
                transcript: t,
            });
        }
    }
    let bob_layout = layout.restricted(&bob_labels)?;
    Ok(Discrimination {
        d,
        branches,
        pruned_mass,
        bob_pre_message: DensityMatrix::new(bob_layout, bob_view)?,
        layout: layout.clone(),
    })
}

/// Identifies `|φ_hidden⟩` on `A1 B1` using `resource` on `A2 B2`: Alice
/// teleports `A1` into `B2`, then Bob Bell-measures `(B2, B1)` and announces
/// the result.
pub fn discriminate(hidden: BellIndex, resource: &StateVector) -> Result<Discrimination> {
    let resource = as_bipartite(resource)?.relabeled(&["A2", "B2"])?;
    let dims = resource.layout().dims();
    if dims != [hidden.d, hidden.d] {
        return Err(Error::DimensionMismatch { expected: hidden.d, found: dims[0].max(dims[1]) });
    }
    let joint = bell_state_on(hidden, "A1", "B1").tensor(&resource)?;
    run_discrimination(&joint, ["A1", "B1"], ["A2", "B2"])
}

#[derive(Clone, Debug)]
pub struct DistillBranch {
    pub announced: BellIndex,
    pub probability: f64,
    /// Residual pair on `A3 B3` after Bob's inverse Weyl correction.
    pub output: StateVector,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct Distillation {
    pub component: BellIndex,
    pub branches: Vec<DistillBranch>,
    pub pruned_mass: f64,
    pub layout: SubsystemLayout,
}

impl Distillation {
    /// The announced index when the run is deterministic.
    pub fn announced(&self) -> Option<BellIndex> {
        let first = self.branches.first()?.announced;
        self.branches.iter().all(|b| b.announced == first).then_some(first)
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Branch-averaged state of `A3 B3`.
    pub fn output_density(&self) -> Result<DensityMatrix> {
        let total = self.total_probability();
        let terms: Vec<(f64, DensityMatrix)> =
            self.branches.iter().map(|b| (b.probability / total, b.output.to_density())).collect();
        DensityMatrix::mixture(&terms)
    }

    /// Fidelity of the averaged output with `|φ_{0,0}⟩`.
    pub fn fidelity(&self) -> Result<f64> {
        let target = bell_state(BellIndex::new(self.component.d, 0, 0)?);
        self.output_density()?.fidelity_with(&target)
    }
}

/// Processes one term of the flagged mixture: the flag `|φ_{m,n}⟩` on `A1 B1`
/// is identified with `psi` on `A2 B2`, then Bob undoes `U_{m,−n}` on `B3`,
/// leaving `|φ_{0,0}⟩` on `A3 B3` when the flag was read correctly.
pub fn distill_copy(d: usize, component: BellIndex, psi: &StateVector) -> Result<Distillation> {
    if component.d != d {
        return Err(Error::DimensionMismatch { expected: d, found: component.d });
    }
    let resource = as_bipartite(psi)?.relabeled(&["A2", "B2"])?;
    let joint = bell_state_on(component, "A1", "B1").tensor(&resource)?.tensor(&bell_state_on(
        component.conjugate(),
        "A3",
        "B3",
    ))?;
    let disc = run_discrimination(&joint, ["A1", "B1"], ["A2", "B2"])?;
    let mut branches = Vec::with_capacity(disc.branches.len());
    for br in disc.branches {
        let undo = weyl_operator(br.announced.conjugate()).adjoint();
        let corrected = br.post_state.apply_local(&["B3"], &undo)?;
        let mut transcript = br.transcript;
        let bob_meas = transcript
            .steps
            .iter()
            .rposition(|s| s.actor == Party::B && matches!(s.action, Action::Measurement { .. }));
        transcript.unitary(Party::B, &["B3"], format!("U{}†", br.announced.conjugate()), bob_meas);
        let (_, rest) = corrected.project_out(&["A1", "A2"], &bell_state(br.alice))?;
        let (_, output) = rest.project_out(&["B2", "B1"], &bell_state(br.announced))?;
        branches.push(DistillBranch { announced: br.announced, probability: br.probability, output, transcript });
    }
    Ok(Distillation { component, branches, pruned_mass: disc.pruned_mass, layout: joint.layout().clone() })
}

/// Draws `shots` outcomes from an exact distribution (demonstration only).
pub fn sample_outcomes(
    distribution: &[(BellIndex, f64)],
    shots: usize,
    seed: u64,
) -> Result<BTreeMap<BellIndex, usize>> {
    let weights: Vec<f64> = distribution.iter().map(|(_, p)| p.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidResource(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(distribution[dist.sample(&mut rng)].0).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{resource_state, ResourceSpec};
    use crate::tensor::Subsystem;

    fn idx(d: usize, m: usize, n: usize) -> BellIndex {
        BellIndex::new(d, m, n).unwrap()
    }

    #[test]
    fn eigenstate_measures_deterministically() {
        let s = bell_state(idx(2, 1, 1)).with_parties(&[Party::A, Party::A]).unwrap();
        let m = bell_measurement(&s, ["A", "B"]).unwrap();
        assert_eq!(m.branches.len(), 1);
        assert_eq!(m.branches[0].outcome, idx(2, 1, 1));
        assert!((m.branches[0].probability - 1.0).abs() < 1e-12);
        assert!((m.total_probability() + m.pruned_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_splits_evenly() {
        let layout = SubsystemLayout::from_triples(&[("A", 2, Party::A), ("B", 2, Party::A)]).unwrap();
        let s = StateVector::basis(layout, 0).unwrap();
        let m = bell_measurement(&s, ["A", "B"]).unwrap();
        let outcomes: Vec<_> = m.branches.iter().map(|b| (b.outcome, b.probability)).collect();
        assert_eq!(outcomes.len(), 2);
        assert_eq!(outcomes[0].0, idx(2, 0, 0));
        assert_eq!(outcomes[1].0, idx(2, 0, 1));
        for (_, p) in outcomes {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_requires_co_located_equal_dims() {
        let s = bell_state(idx(2, 0, 0));
        assert!(matches!(bell_measurement(&s, ["A", "B"]), Err(Error::NotCoLocated(..))));
        let layout =
            SubsystemLayout::new(vec![Subsystem::new("x", 2, Party::A), Subsystem::new("y", 3, Party::A)]).unwrap();
        let s = StateVector::basis(layout, 0).unwrap();
        assert!(matches!(bell_measurement(&s, ["x", "y"]), Err(Error::UnequalDims(..))));
    }

    #[test]
    fn teleport_rejects_mismatched_dims() {
        let chi = crate::states::haar_random_state(&[3], 0).unwrap();
        let res = resource_state(&ResourceSpec::Mes(2)).unwrap();
        assert!(matches!(teleport(&chi, &res), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn teleport_transcript_is_valid() {
        let chi = crate::states::haar_random_state(&[2], 3).unwrap().relabeled(&["C"]).unwrap();
        let res = resource_state(&ResourceSpec::Mes(2)).unwrap();
        let t = teleport(&chi, &res).unwrap();
        for b in &t.branches {
            b.transcript.validate(&t.layout).unwrap();
            assert_eq!(b.transcript.messages().count(), 1);
        }
    }

    #[test]
    fn forged_transcripts_rejected() {
        let layout = SubsystemLayout::from_triples(&[("A", 2, Party::A), ("B", 2, Party::B)]).unwrap();
        let mut t = Transcript::default();
        t.unitary(Party::B, &["B"], "X".into(), Some(0));
        assert!(t.validate(&layout).is_err());

        let mut t = Transcript::default();
        let m = t.measurement(Party::A, &["A"], idx(2, 0, 0));
        t.message(Party::B, idx(2, 0, 0), m);
        assert!(t.validate(&layout).is_err());

        let mut t = Transcript::default();
        t.measurement(Party::A, &["B"], idx(2, 0, 0));
        assert!(t.validate(&layout).is_err());
    }

    #[test]
    fn discriminate_checks_resource() {
        let res = resource_state(&ResourceSpec::Mes(3)).unwrap();
        assert!(matches!(discriminate(idx(2, 0, 0), &res), Err(Error::DimensionMismatch { .. })));
        let not_bipartite = crate::states::haar_random_state(&[2, 2], 0).unwrap();
        assert!(matches!(discriminate(idx(2, 0, 0), &not_bipartite), Err(Error::NotBipartite(_))));
    }

    #[test]
    fn sampling_follows_point_mass() {
        let dist = vec![(idx(2, 0, 0), 0.0), (idx(2, 1, 0), 1.0)];
        let counts = sample_outcomes(&dist, 50, 9).unwrap();
        assert_eq!(counts.get(&idx(2, 1, 0)), Some(&50));
    }
}
