//! Verification suites assembling protocol and diagnostic checks into reports.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::entanglement::{
    entanglement_entropy, log_negativity, necessity_report_with, ppt_check, smolin_decomposition_check, Cut,
    NecessityTolerances,
};
use crate::error::{Error, Result};
use crate::protocols::{discriminate, distill_copy, teleport};
use crate::report::{Check, Report};
use crate::states::{
    as_bipartite, bell_basis, bell_state, build_rho, build_rho_s, conjugate_state, haar_random_state, resource_state,
    rho_from_factors, weyl_operator, BellIndex, ResourceSpec,
};
use crate::tensor::{fidelity_pure, DensityMatrix, Matrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Basis,
    Teleport,
    Discriminate,
    Necessity,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Basis, Suite::Teleport, Suite::Discriminate, Suite::Necessity];

    /// Parses a comma-separated list; `all` expands to every suite.
    pub fn parse_list(text: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if part == "all" {
                out.extend(Suite::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basis" => Ok(Suite::Basis),
            "teleport" => Ok(Suite::Teleport),
            "discriminate" => Ok(Suite::Discriminate),
            "necessity" => Ok(Suite::Necessity),
            other => Err(Error::UnknownSuite(other.to_string())),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Basis => "basis",
            Suite::Teleport => "teleport",
            Suite::Discriminate => "discriminate",
            Suite::Necessity => "necessity",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Construction-level identities: norms, fidelities, probabilities.
    pub exact: f64,
    /// Smallest admissible eigenvalue magnitude below zero.
    pub psd: f64,
    /// Identities through an eigensolver.
    pub spectral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { exact: 1e-12, psd: 1e-10, spectral: 1e-9 }
    }
}

impl From<Tolerances> for NecessityTolerances {
    fn from(t: Tolerances) -> Self {
        NecessityTolerances { exact: t.exact, psd: t.psd, spectral: t.spectral }
    }
}

/// Success probabilities of a weak resource must stay below `1 − WEAK_MARGIN`
/// for at least one index.
pub const WEAK_MARGIN: f64 = 1e-6;
/// Haar-random inputs per dimension in the teleportation suite.
pub const TELEPORT_INPUTS: usize = 20;
/// Largest `d` for anything that builds `ρ`.
pub const RHO_MAX_D: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub suites: Vec<Suite>,
    pub max_d: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl SuiteConfig {
    pub fn new(suites: Vec<Suite>, max_d: usize, seed: u64) -> Self {
        Self { suites, max_d, seed, tolerances: Tolerances::default() }
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn state_diff(a: &StateVector, b: &StateVector) -> f64 {
    max_abs(a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()))
}

/// Orthonormality, completeness, maximal entanglement, Weyl displacement and
/// conjugation of the canonical basis.
pub fn basis_checks(d: usize, tol: &Tolerances) -> Result<Report> {
    let basis = bell_basis(d);
    let n = basis.len();
    let gram = Matrix::from_fn(n, |i, j| basis[i].inner(&basis[j]).expect("same dimension"));
    let gram_err = gram.max_abs_diff(&Matrix::identity(n));

    let mut completeness = Matrix::zeros(d * d);
    for s in &basis {
        completeness = &completeness + &Matrix::outer(s.amplitudes());
    }
    let completeness_err = completeness.max_abs_diff(&Matrix::identity(d * d));

    let mixed = Matrix::identity(d).scale_real(1.0 / d as f64);
    let mut reduction_err = 0.0f64;
    let mut entropy_err = 0.0f64;
    let mut weyl_err = 0.0f64;
    let mut conj_err = 0.0f64;
    let root = bell_state(BellIndex::new(d, 0, 0)?);
    let cut = Cut::new(&["A"], &["B"])?;
    for (idx, s) in BellIndex::all(d).zip(&basis) {
        for keep in ["A", "B"] {
            reduction_err = reduction_err.max(s.reduced(&[keep])?.matrix().max_abs_diff(&mixed));
        }
        entropy_err = entropy_err.max((entanglement_entropy(s, &cut)? - (d as f64).log2()).abs());
        weyl_err = weyl_err.max(state_diff(&root.apply_local(&["B"], &weyl_operator(idx))?, s));
        conj_err = conj_err.max(state_diff(&conjugate_state(s), &bell_state(idx.conjugate())));
    }
    let mut report = Report::new();
    report.extend([
        Check::at_most("basis.gram", d, gram_err, tol.exact),
        Check::at_most("basis.completeness", d, completeness_err, tol.exact),
        Check::at_most("basis.reductions", d, reduction_err, tol.exact),
        Check::at_most("basis.entropy", d, entropy_err, tol.exact),
        Check::at_most("basis.weyl_displacement", d, weyl_err, tol.exact),
        Check::at_most("basis.conjugation", d, conj_err, tol.exact),
    ]);
    Ok(report)
}

/// Deterministic per-`(d, k)` seeds for the teleportation inputs.
pub fn input_seed(seed: u64, d: usize, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((d as u64) << 32).wrapping_add(k as u64)
}

pub fn haar_inputs(d: usize, count: usize, seed: u64) -> Result<Vec<StateVector>> {
    (0..count).map(|k| haar_random_state(&[d], input_seed(seed, d, k))?.relabeled(&["C"])).collect()
}

/// Teleports every input through `resource`; checks are informational unless
/// the resource is maximally entangled.
pub fn teleport_checks(
    d: usize,
    resource: &StateVector,
    inputs: &[StateVector],
    tol: &Tolerances,
    label: &str,
) -> Result<Report> {
    let resource_is_mes = is_mes(resource, d)?;
    let mut count_err = 0usize;
    let mut prob_err = 0.0f64;
    let mut fid_err = 0.0f64;
    let mut completeness_err = 0.0f64;
    let mut avg_fid = 0.0f64;
    let mut transcript_errors = 0usize;
    let mut pruned = 0.0;
    for chi in inputs {
        let run = teleport(chi, resource)?;
        pruned += run.pruned_mass;
        count_err = count_err.max(run.branches.len().abs_diff(d * d));
        completeness_err = completeness_err.max((run.total_probability() + run.pruned_mass - 1.0).abs());
        for b in &run.branches {
            prob_err = prob_err.max((b.probability - 1.0 / (d * d) as f64).abs());
            fid_err = fid_err.max(1.0 - fidelity_pure(chi, &b.output)?);
            if b.transcript.validate(&run.layout).is_err() {
                transcript_errors += 1;
            }
        }
        avg_fid += run.average_fidelity(chi)? / inputs.len() as f64;
    }
    let info = !resource_is_mes;
    let p = |c: Check| c.param("resource", json!(label)).param("inputs", json!(inputs.len())).informational(info);
    let mut report = Report::new();
    report.pruned_mass = pruned;
    report.extend([
        p(Check::at_most("teleport.branch_count", d, count_err as f64, 0.0)),
        p(Check::at_most("teleport.probability", d, prob_err, tol.exact)),
        p(Check::at_most("teleport.fidelity", d, fid_err, tol.exact)),
        p(Check::at_most("teleport.average_fidelity", d, 1.0 - avg_fid, tol.exact)),
        p(Check::at_most("teleport.completeness", d, completeness_err, tol.exact)).informational(false),
        p(Check::at_most("teleport.transcripts", d, transcript_errors as f64, 0.0)).informational(false),
    ]);
    Ok(report)
}

fn is_mes(psi: &StateVector, d: usize) -> Result<bool> {
    let psi = as_bipartite(psi)?;
    if psi.layout().dims() != [d, d] {
        return Ok(false);
    }
    let cut = Cut::from_parties(psi.layout())?;
    let s = crate::entanglement::schmidt_decomposition(&psi, &cut)?;
    let uniform = 1.0 / (d as f64).sqrt();
    Ok(s.coefficients.iter().all(|c| (c - uniform).abs() <= 1e-12))
}

/// Runs discrimination for each hidden index. With a maximally entangled
/// resource, success must be certain; otherwise rows are informational.
pub fn discrimination_checks(
    d: usize,
    hidden: &[BellIndex],
    resource: &StateVector,
    tol: &Tolerances,
    label: &str,
) -> Result<Report> {
    let resource_is_mes = is_mes(resource, d)?;
    let mut report = Report::new();
    let mut completeness_err = 0.0f64;
    let mut transcript_errors = 0usize;
    let mut bob_views: Vec<DensityMatrix> = Vec::new();
    let mut worst_success = 1.0f64;
    for &h in hidden {
        let run = discriminate(h, resource)?;
        report.pruned_mass += run.pruned_mass;
        completeness_err = completeness_err.max((run.total_probability() + run.pruned_mass - 1.0).abs());
        for b in &run.branches {
            if b.transcript.validate(&run.layout).is_err() {
                transcript_errors += 1;
            }
        }
        let success = run.probability_of(h);
        worst_success = worst_success.min(success);
        report.push(
            Check::at_most("discriminate.success", d, 1.0 - success, tol.exact)
                .param("hidden", json!(h.to_string()))
                .param("resource", json!(label))
                .param("success_probability", json!(success))
                .informational(!resource_is_mes),
        );
        bob_views.push(run.bob_pre_message);
    }
    let no_signal =
        bob_views.iter().skip(1).map(|v| v.matrix().max_abs_diff(bob_views[0].matrix())).fold(0.0, f64::max);
    let p = |c: Check| c.param("resource", json!(label));
    report.extend([
        p(Check::at_most("discriminate.completeness", d, completeness_err, tol.exact)),
        p(Check::at_most("discriminate.no_signaling", d, no_signal, tol.exact)),
        p(Check::at_most("discriminate.transcripts", d, transcript_errors as f64, 0.0)),
        p(Check::at_most("discriminate.min_success", d, 1.0 - worst_success, tol.exact))
            .informational(!resource_is_mes),
    ]);
    Ok(report)
}

/// The weak-resource row: some hidden index must fail with probability above
/// [`WEAK_MARGIN`].
pub fn weak_resource_check(d: usize, resource: &StateVector, label: &str) -> Result<Check> {
    let mut worst = 1.0f64;
    let mut worst_idx = BellIndex::new(d, 0, 0)?;
    for h in BellIndex::all(d) {
        let p = discriminate(h, resource)?.probability_of(h);
        if p < worst {
            worst = p;
            worst_idx = h;
        }
    }
    Ok(Check::new("discriminate.weak_resource", d, worst, 1.0 - WEAK_MARGIN, worst < 1.0 - WEAK_MARGIN)
        .param("resource", json!(label))
        .param("hidden", json!(worst_idx.to_string())))
}

/// Schmidt resource with squared coefficients `probs`, zero-padded to `d`.
pub fn schmidt_resource(probs: &[f64], d: usize) -> Result<StateVector> {
    let mut c: Vec<f64> = probs.iter().map(|p| p.sqrt()).collect();
    c.resize(d.max(c.len()), 0.0);
    resource_state(&ResourceSpec::schmidt(c)?)
}

/// Resources used by the necessity suite: label and state.
pub fn necessity_resources(d: usize) -> Result<Vec<(String, StateVector)>> {
    Ok(vec![
        (format!("mes:{d}"), resource_state(&ResourceSpec::Mes(d))?),
        ("schmidt^2:0.8,0.2".into(), schmidt_resource(&[0.8, 0.2], d)?),
        ("schmidt^2:0.6,0.4".into(), schmidt_resource(&[0.6, 0.4], d)?),
        ("schmidt^2:1".into(), schmidt_resource(&[1.0], d)?),
    ])
}

pub fn necessity_checks(d: usize, psi: &StateVector, label: &str, tol: &Tolerances) -> Result<Report> {
    let nt: NecessityTolerances = (*tol).into();
    let nr = necessity_report_with(d, psi, nt)?;
    let mut report = Report::new();
    report.extend(nr.checks(label, nt));
    if nr.psi_is_mes {
        report.push(Check::at_most(
            "necessity.lognegativity_mes",
            d,
            (nr.log_negativity_psi - (d as f64).log2()).abs(),
            tol.spectral,
        ));
    } else {
        // A weak resource must be flagged below the bound.
        report.push(
            Check::new(
                "necessity.weak_resource_flagged",
                d,
                nr.entropy,
                (d as f64).log2(),
                nr.verdict == crate::entanglement::Verdict::BelowNecessityBound,
            )
            .param("psi", json!(label)),
        );
    }
    Ok(report)
}

/// Individual `ρ` diagnostics selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoCheck {
    Ppt,
    Reorder,
    LogNegativity,
    Smolin,
    All,
}

impl FromStr for RhoCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ppt" => Ok(RhoCheck::Ppt),
            "reorder" => Ok(RhoCheck::Reorder),
            "lognegativity" => Ok(RhoCheck::LogNegativity),
            "smolin" => Ok(RhoCheck::Smolin),
            "all" => Ok(RhoCheck::All),
            other => Err(Error::InvalidResource(format!("unknown rho check `{other}`"))),
        }
    }
}

pub fn rho_checks(d: usize, psi: &StateVector, label: &str, which: RhoCheck, tol: &Tolerances) -> Result<Report> {
    if !(2..=RHO_MAX_D).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let want = |c: RhoCheck| which == RhoCheck::All || which == c;
    let mut report = Report::new();
    let p = |c: Check| c.param("psi", json!(label));
    if want(RhoCheck::Reorder) {
        let rho = build_rho(d, psi)?;
        let factored = rho_from_factors(d, psi)?;
        let dist = (rho.matrix() - factored.matrix()).frobenius_norm();
        report.push(p(Check::at_most("rho.reorder", d, dist, tol.exact)));
    }
    if want(RhoCheck::Ppt) {
        let rho_s = build_rho_s(d)?;
        let v = ppt_check(&rho_s, &Cut::from_parties(rho_s.layout())?)?;
        report.push(Check::at_least("rho.rho_s_ppt", d, v.min_eigenvalue, -tol.psd));
    }
    if want(RhoCheck::LogNegativity) {
        let rho = build_rho(d, psi)?;
        let ln_rho = log_negativity(&rho, &Cut::from_parties(rho.layout())?)?;
        let psi_b = as_bipartite(psi)?;
        let ln_psi = log_negativity(&psi_b, &Cut::from_parties(psi_b.layout())?)?;
        report.push(
            p(Check::at_most("rho.lognegativity", d, (ln_rho - ln_psi).abs(), tol.spectral))
                .param("log_negativity_rho", json!(ln_rho))
                .param("log_negativity_psi", json!(ln_psi)),
        );
    }
    if want(RhoCheck::Smolin) && d == 2 {
        let s = smolin_decomposition_check(2, tol.exact)?;
        report.push(Check::new("rho.smolin", 2, s.distance, tol.exact, s.equal));
    }
    Ok(report)
}

/// Single-copy distillation of each listed mixture component.
pub fn distill_checks(
    d: usize,
    components: &[BellIndex],
    psi: &StateVector,
    label: &str,
    tol: &Tolerances,
) -> Result<Report> {
    let resource_is_mes = is_mes(psi, d)?;
    let cut = Cut::new(&["A3"], &["B3"])?;
    let mut report = Report::new();
    for &c in components {
        let run = distill_copy(d, c, psi)?;
        report.pruned_mass += run.pruned_mass;
        let fid = run.fidelity()?;
        let mut entropy_err = 0.0f64;
        for b in &run.branches {
            entropy_err = entropy_err.max((entanglement_entropy(&b.output, &cut)? - (d as f64).log2()).abs());
        }
        let announced = run.announced().map(|a| a.to_string()).unwrap_or_else(|| "mixed".into());
        let p = |ch: Check| {
            ch.param("component", json!(c.to_string()))
                .param("resource", json!(label))
                .param("announced", json!(announced))
                .informational(!resource_is_mes)
        };
        report.extend([
            p(Check::at_most("distill.fidelity", d, 1.0 - fid, tol.exact)),
            p(Check::at_most("distill.entropy", d, entropy_err, tol.exact)),
        ]);
    }
    Ok(report)
}

fn suite_cases(suite: Suite, max_d: usize) -> Vec<usize> {
    let top = match suite {
        Suite::Necessity => max_d.min(RHO_MAX_D),
        _ => max_d,
    };
    (2..=top).collect()
}

fn run_case(suite: Suite, d: usize, config: &SuiteConfig) -> Result<Report> {
    let tol = &config.tolerances;
    match suite {
        Suite::Basis => basis_checks(d, tol),
        Suite::Teleport => {
            let inputs = haar_inputs(d, TELEPORT_INPUTS, config.seed)?;
            let mut report =
                teleport_checks(d, &resource_state(&ResourceSpec::Mes(d))?, &inputs, tol, &format!("mes:{d}"))?;
            let product = schmidt_resource(&[1.0], d)?;
            let weak = teleport_checks(d, &product, &inputs, tol, "schmidt^2:1")?;
            let avg_fid = 1.0
                - weak
                    .checks
                    .iter()
                    .find(|c| c.name == "teleport.average_fidelity")
                    .map(|c| c.measured)
                    .expect("average fidelity row");
            report.push(
                Check::new(
                    "teleport.product_resource_fidelity",
                    d,
                    avg_fid,
                    1.0 - WEAK_MARGIN,
                    avg_fid < 1.0 - WEAK_MARGIN,
                )
                .param("resource", json!("schmidt^2:1")),
            );
            Ok(report)
        }
        Suite::Discriminate => {
            let hidden: Vec<BellIndex> = BellIndex::all(d).collect();
            let mut report =
                discrimination_checks(d, &hidden, &resource_state(&ResourceSpec::Mes(d))?, tol, &format!("mes:{d}"))?;
            report.push(weak_resource_check(d, &schmidt_resource(&[0.8, 0.2], d)?, "schmidt^2:0.8,0.2")?);
            Ok(report)
        }
        Suite::Necessity => {
            let mut report = Report::new();
            for (label, psi) in necessity_resources(d)? {
                report.merge(necessity_checks(d, &psi, &label, tol)?);
            }
            if d == 2 {
                let s = smolin_decomposition_check(2, tol.exact)?;
                report.push(Check::new("necessity.smolin", 2, s.distance, tol.exact, s.equal));
            }
            let components: Vec<BellIndex> = BellIndex::all(d).collect();
            report.merge(distill_checks(
                d,
                &components,
                &resource_state(&ResourceSpec::Mes(d))?,
                &format!("mes:{d}"),
                tol,
            )?);
            Ok(report)
        }
    }
}

/// Runs the configured suites over `d = 2..=max_d` (necessity capped at 3).
/// Independent cases run in parallel; the merged report is sorted.
pub fn run_suite(config: &SuiteConfig) -> Result<Report> {
    if !(2..=6).contains(&config.max_d) {
        return Err(Error::UnsupportedDimension(config.max_d));
    }
    let cases: Vec<(Suite, usize)> =
        config.suites.iter().flat_map(|&s| suite_cases(s, config.max_d).into_iter().map(move |d| (s, d))).collect();
    let reports: Vec<Report> = cases.par_iter().map(|&(s, d)| run_case(s, d, config)).collect::<Result<Vec<_>>>()?;
    let mut merged = Report::new();
    for r in reports {
        merged.merge(r);
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse_list("all").unwrap(), Suite::ALL.to_vec());
        assert_eq!(Suite::parse_list("teleport,basis,basis").unwrap(), vec![Suite::Basis, Suite::Teleport]);
        assert!(matches!(Suite::parse_list("basis,nope"), Err(Error::UnknownSuite(_))));
        assert!(Suite::parse_list("").unwrap().is_empty());
    }

    #[test]
    fn empty_suite_list_gives_empty_report() {
        let r = run_suite(&SuiteConfig::new(vec![], 4, 0)).unwrap();
        assert!(r.checks.is_empty());
        assert!(r.all_pass());
    }

    #[test]
    fn basis_suite_passes_to_d4() {
        let r = run_suite(&SuiteConfig::new(vec![Suite::Basis], 4, 0)).unwrap();
        assert_eq!(r.checks.len(), 6 * 3);
        assert!(r.all_pass(), "{:#?}", r.checks);
    }

    #[test]
    fn rho_checks_respect_budget() {
        let psi = resource_state(&ResourceSpec::Mes(4)).unwrap();
        assert!(matches!(
            rho_checks(4, &psi, "mes", RhoCheck::All, &Tolerances::default()),
            Err(Error::UnsupportedDimension(4))
        ));
    }
}
