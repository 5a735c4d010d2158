//! The canonical maximally entangled basis, Weyl operators, resource states
//! and the flagged mixtures `ρ` and `ρ_s`.
//!
//! The basis is
//!
//! ```text
//! |φ_{m,n}⟩ = d^{-1/2} Σ_j ω^{jn} |j⟩|j ⊕ m⟩,   ω = e^{2πi/d},
//! ```
//!
//! with `⊕` addition mod `d`, and the Weyl operator
//! `U_{m,n}|j⟩ = ω^{jn}|j ⊕ m⟩` satisfies `|φ_{m,n}⟩ = (1 ⊗ U_{m,n})|φ_{0,0}⟩`.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::json::read_state_file;
use crate::tensor::{Composite, DensityMatrix, Matrix, Party, StateVector, Subsystem, SubsystemLayout};

/// Labels of the six subsystems of `ρ`, in tensor order.
pub const RHO_LABELS: [&str; 6] = ["A1", "B1", "A2", "B2", "A3", "B3"];
/// Labels of the four subsystems of `ρ_s`, in tensor order.
pub const RHO_S_LABELS: [&str; 4] = ["A1", "B1", "A2", "B2"];

/// Index `(m, n)` of `|φ_{m,n}⟩` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellIndex {
    pub d: usize,
    pub m: usize,
    pub n: usize,
}

impl BellIndex {
    pub fn new(d: usize, m: usize, n: usize) -> Result<Self> {
        if d < 2 || m >= d || n >= d {
            return Err(Error::InvalidBellIndex { d, m, n });
        }
        Ok(Self { d, m, n })
    }

    /// `(m, −n)` with `−n` taken as `(d − n) mod d`; the index of the complex
    /// conjugate state.
    pub fn conjugate(self) -> Self {
        Self { n: (self.d - self.n) % self.d, ..self }
    }

    /// All `d²` indices in `(m, n)` lexicographic order.
    pub fn all(d: usize) -> impl Iterator<Item = BellIndex> {
        (0..d).flat_map(move |m| (0..d).map(move |n| BellIndex { d, m, n }))
    }

    /// Position in [`BellIndex::all`].
    pub fn ordinal(self) -> usize {
        self.m * self.d + self.n
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// `ω^k = e^{2πik/d}`, exact at multiples of a quarter turn.
pub fn root_of_unity(d: usize, k: usize) -> C64 {
    let k = k % d;
    if (4 * k).is_multiple_of(d) {
        return match 4 * k / d {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

fn two_qudit_layout(d_a: usize, d_b: usize, a: &str, b: &str) -> SubsystemLayout {
    SubsystemLayout::new(vec![Subsystem::new(a, d_a, Party::A), Subsystem::new(b, d_b, Party::B)])
        .expect("two distinct labels with dims >= 2")
}

/// `|φ_{m,n}⟩` on subsystems `A` (party A) and `B` (party B).
pub fn bell_state(idx: BellIndex) -> StateVector {
    bell_state_on(idx, "A", "B")
}

/// `|φ_{m,n}⟩` with custom labels for the two halves.
pub fn bell_state_on(idx: BellIndex, a: &str, b: &str) -> StateVector {
    let d = idx.d;
    let amp = 1.0 / (d as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        amps[j * d + (j + idx.m) % d] = root_of_unity(d, j * idx.n) * amp;
    }
    StateVector::new(two_qudit_layout(d, d, a, b), amps).expect("canonical basis state is normalized")
}

/// Shift `X|j⟩ = |j ⊕ 1⟩`.
pub fn shift(d: usize) -> Matrix {
    Matrix::from_fn(d, |i, j| if i == (j + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Clock `Z|j⟩ = ω^j|j⟩`.
pub fn clock(d: usize) -> Matrix {
    Matrix::from_fn(d, |i, j| if i == j { root_of_unity(d, j) } else { C64::new(0.0, 0.0) })
}

/// `U_{m,n}|j⟩ = ω^{jn}|j ⊕ m⟩`.
pub fn weyl_operator(idx: BellIndex) -> Matrix {
    let d = idx.d;
    Matrix::from_fn(d, |i, j| if i == (j + idx.m) % d { root_of_unity(d, j * idx.n) } else { C64::new(0.0, 0.0) })
}

/// The `d²` basis states in `(m, n)` lexicographic order.
pub fn bell_basis(d: usize) -> Vec<StateVector> {
    BellIndex::all(d).map(bell_state).collect()
}

pub fn conjugate_state(phi: &StateVector) -> StateVector {
    phi.conj()
}

/// The shared resource `ψ`.
#[derive(Clone, Debug, PartialEq)]
pub enum ResourceSpec {
    /// `|φ_{0,0}⟩` in dimension `d`.
    Mes(usize),
    /// `Σ_k c_k |k⟩|k⟩`, local dimension `max(len, 2)`.
    Schmidt(Vec<f64>),
    /// A two-subsystem state file with one A and one B subsystem.
    File(PathBuf),
}

/// Squared coefficients may be off by this much in parsed strings and are
/// then renormalized.
const PARSE_NORM_SLACK: f64 = 1e-4;

impl ResourceSpec {
    /// Strictly validated Schmidt coefficients.
    pub fn schmidt(coefficients: Vec<f64>) -> Result<Self> {
        validate_schmidt(&coefficients)?;
        Ok(ResourceSpec::Schmidt(coefficients))
    }

    /// Parses `mes`, `mes:D`, `schmidt:c0,c1,...` or `file:PATH`.
    ///
    /// `d` is the local dimension used by `mes` and the length Schmidt lists
    /// are zero-padded to. Parsed Schmidt coefficients are renormalized when
    /// their squares sum to 1 within 1e-4, which admits truncated decimals.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (text, None),
        };
        match (kind, arg) {
            ("mes", None) => Ok(ResourceSpec::Mes(d)),
            ("mes", Some(a)) => {
                let dim: usize =
                    a.trim().parse().map_err(|_| Error::InvalidResource(format!("bad dimension `{a}`")))?;
                if dim < 2 {
                    return Err(Error::InvalidResource(format!("dimension {dim} < 2")));
                }
                Ok(ResourceSpec::Mes(dim))
            }
            ("schmidt", Some(a)) => {
                let mut coeffs = a
                    .split(',')
                    .map(|c| {
                        c.trim().parse::<f64>().map_err(|_| Error::InvalidResource(format!("bad coefficient `{c}`")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if coeffs.len() > d {
                    return Err(Error::InvalidResource(format!(
                        "{} coefficients exceed local dimension {d}",
                        coeffs.len()
                    )));
                }
                if coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return Err(Error::InvalidResource("coefficients must be finite and nonnegative".into()));
                }
                let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
                if (norm_sq - 1.0).abs() > PARSE_NORM_SLACK {
                    return Err(Error::InvalidResource(format!("squared coefficients sum to {norm_sq}, not 1")));
                }
                let norm = norm_sq.sqrt();
                coeffs.iter_mut().for_each(|c| *c /= norm);
                coeffs.resize(d, 0.0);
                Self::schmidt(coeffs)
            }
            ("file", Some(a)) if !a.is_empty() => Ok(ResourceSpec::File(PathBuf::from(a))),
            _ => Err(Error::InvalidResource(format!("unrecognized resource `{text}`"))),
        }
    }

    pub fn is_mes(&self) -> bool {
        matches!(self, ResourceSpec::Mes(_))
    }
}

impl fmt::Display for ResourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceSpec::Mes(d) => write!(f, "mes:{d}"),
            ResourceSpec::Schmidt(c) => {
                let parts: Vec<String> = c.iter().map(|x| format!("{x:.16e}")).collect();
                write!(f, "schmidt:{}", parts.join(","))
            }
            ResourceSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn validate_schmidt(c: &[f64]) -> Result<()> {
    if c.is_empty() {
        return Err(Error::InvalidResource("no Schmidt coefficients".into()));
    }
    if c.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidResource("coefficients must be finite and nonnegative".into()));
    }
    if c.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidResource("coefficients must be sorted descending".into()));
    }
    let norm_sq: f64 = c.iter().map(|x| x * x).sum();
    if (norm_sq - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidResource(format!("squared coefficients sum to {norm_sq}, not 1")));
    }
    Ok(())
}

/// Checks that `psi` has exactly one A and one B subsystem, returning it
/// reordered so the A half comes first.
pub fn as_bipartite(psi: &StateVector) -> Result<StateVector> {
    let layout = psi.layout();
    let parties = layout.parties();
    match parties.as_slice() {
        [Party::A, Party::B] => Ok(psi.clone()),
        [Party::B, Party::A] => {
            let labels = layout.labels();
            psi.permute(&[labels[1], labels[0]])
        }
        _ => Err(Error::NotBipartite(format!("layout {layout}"))),
    }
}

pub fn resource_state(spec: &ResourceSpec) -> Result<StateVector> {
    match spec {
        ResourceSpec::Mes(d) => Ok(bell_state(BellIndex::new(*d, 0, 0)?)),
        ResourceSpec::Schmidt(c) => {
            validate_schmidt(c)?;
            let d = c.len().max(2);
            let mut amps = vec![C64::new(0.0, 0.0); d * d];
            for (k, &ck) in c.iter().enumerate() {
                amps[k * d + k] = C64::new(ck, 0.0);
            }
            StateVector::new(two_qudit_layout(d, d, "A", "B"), amps)
        }
        ResourceSpec::File(path) => {
            let state = read_state_file(path)?.into_state()?;
            as_bipartite(&state)
        }
    }
}

fn projector(idx: BellIndex) -> Matrix {
    Matrix::outer(bell_state(idx).amplitudes())
}

/// `ρ = d⁻² Σ_{m,n} |φ_{m,n}⟩⟨φ_{m,n}| ⊗ |ψ⟩⟨ψ| ⊗ |φ_{m,−n}⟩⟨φ_{m,−n}|` on
/// `A1 B1 A2 B2 A3 B3`.
pub fn build_rho(d: usize, psi: &StateVector) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let psi = as_bipartite(psi)?;
    let dims = psi.layout().dims();
    let layout = SubsystemLayout::new(vec![
        Subsystem::new("A1", d, Party::A),
        Subsystem::new("B1", d, Party::B),
        Subsystem::new("A2", dims[0], Party::A),
        Subsystem::new("B2", dims[1], Party::B),
        Subsystem::new("A3", d, Party::A),
        Subsystem::new("B3", d, Party::B),
    ])?;
    let resource = Matrix::outer(psi.amplitudes());
    let weight = 1.0 / (d * d) as f64;
    let mut acc = Matrix::zeros(layout.total_dim());
    for idx in BellIndex::all(d) {
        let term = projector(idx).kron(&resource).kron(&projector(idx.conjugate()));
        acc = &acc + &term;
    }
    DensityMatrix::new(layout, acc.scale_real(weight))
}

/// `ρ_s = d⁻² Σ_{m,n} |φ_{m,n}⟩⟨φ_{m,n}| ⊗ |φ_{m,−n}⟩⟨φ_{m,−n}|` on `A1 B1 A2 B2`.
pub fn build_rho_s(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let layout = SubsystemLayout::new(vec![
        Subsystem::new("A1", d, Party::A),
        Subsystem::new("B1", d, Party::B),
        Subsystem::new("A2", d, Party::A),
        Subsystem::new("B2", d, Party::B),
    ])?;
    let weight = 1.0 / (d * d) as f64;
    let mut acc = Matrix::zeros(layout.total_dim());
    for idx in BellIndex::all(d) {
        acc = &acc + &projector(idx).kron(&projector(idx.conjugate()));
    }
    DensityMatrix::new(layout, acc.scale_real(weight))
}

/// `ρ` assembled as `Π (ρ_s ⊗ |ψ⟩⟨ψ|) Π†`: `ρ_s` placed on `A1 B1 A3 B3`,
/// `ψ` on `A2 B2`, then reordered to [`RHO_LABELS`].
pub fn rho_from_factors(d: usize, psi: &StateVector) -> Result<DensityMatrix> {
    let psi = as_bipartite(psi)?.relabeled(&["A2", "B2"])?;
    let rho_s = build_rho_s(d)?.relabeled(&["A1", "B1", "A3", "B3"])?;
    rho_s.tensor(&psi.to_density())?.permute(&RHO_LABELS)
}

/// Haar-random pure state on subsystems `q0, q1, …` (all held by A).
///
/// The seed drives a ChaCha20 stream from which the real and imaginary parts
/// of each amplitude are drawn as independent standard normals, in amplitude
/// order; the vector is then normalized. Same seed and dims, same bits.
pub fn haar_random_state(dims: &[usize], seed: u64) -> Result<StateVector> {
    let layout = SubsystemLayout::new(
        dims.iter().enumerate().map(|(k, &d)| Subsystem::new(format!("q{k}"), d, Party::A)).collect(),
    )?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let amps: Vec<C64> = (0..layout.total_dim())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    StateVector::normalized(layout, amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn bell_index_bounds() {
        assert!(BellIndex::new(3, 3, 0).is_err());
        assert!(BellIndex::new(1, 0, 0).is_err());
        assert_eq!(BellIndex::new(5, 2, 0).unwrap().conjugate().n, 0);
        assert_eq!(BellIndex::new(5, 2, 2).unwrap().conjugate().n, 3);
    }

    #[test]
    fn d2_singlet_and_phi_plus() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = bell_state(BellIndex::new(2, 0, 0).unwrap());
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in phi.amplitudes().iter().zip(expect) {
            assert!(close(*a, C64::new(e, 0.0)));
        }
        let singlet = bell_state(BellIndex::new(2, 1, 1).unwrap());
        let expect = [0.0, h, -h, 0.0];
        for (a, e) in singlet.amplitudes().iter().zip(expect) {
            assert!(close(*a, C64::new(e, 0.0)));
        }
    }

    #[test]
    fn d3_phases() {
        let s = bell_state(BellIndex::new(3, 1, 2).unwrap());
        let amp = 1.0 / 3f64.sqrt();
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let a = s.amplitudes();
        assert!(close(a[1], C64::new(amp, 0.0))); // |0,1⟩
        assert!(close(a[3 + 2], w.powu(2) * amp)); // |1,2⟩
        assert!(close(a[6], w.powu(4) * amp)); // |2,0⟩
        assert_eq!(a.iter().filter(|z| z.norm() > 0.0).count(), 3);
    }

    #[test]
    fn weyl_small_cases() {
        let u = weyl_operator(BellIndex::new(2, 1, 1).unwrap());
        let expect = [[0.0, -1.0], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(u[(i, j)], C64::new(expect[i][j], 0.0)));
            }
        }
        for d in 2..6 {
            assert_eq!(weyl_operator(BellIndex::new(d, 0, 0).unwrap()), Matrix::identity(d));
        }
    }

    #[test]
    fn weyl_is_phase_times_shift() {
        // U_{m,n} = X^m Z^n
        for d in 2..5 {
            for idx in BellIndex::all(d) {
                let mut expect = Matrix::identity(d);
                for _ in 0..idx.m {
                    expect = &shift(d) * &expect;
                }
                let mut zn = Matrix::identity(d);
                for _ in 0..idx.n {
                    zn = &clock(d) * &zn;
                }
                expect = &expect * &zn;
                assert!(weyl_operator(idx).max_abs_diff(&expect) < 1e-12);
            }
        }
    }

    #[test]
    fn resource_parsing() {
        assert_eq!(ResourceSpec::parse("mes", 3).unwrap(), ResourceSpec::Mes(3));
        assert_eq!(ResourceSpec::parse("mes:4", 3).unwrap(), ResourceSpec::Mes(4));
        let s = ResourceSpec::parse("schmidt:0.894427,0.447214", 3).unwrap();
        match s {
            ResourceSpec::Schmidt(c) => {
                assert_eq!(c.len(), 3);
                assert_eq!(c[2], 0.0);
                assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(ResourceSpec::parse("schmidt:0.5,0.5", 2).is_err());
        assert!(ResourceSpec::parse("schmidt:0.2,0.979795897113271", 2).is_err());
        assert!(ResourceSpec::parse("schmidt:1,0,0", 2).is_err());
        assert!(ResourceSpec::parse("bogus", 2).is_err());
        assert!(ResourceSpec::parse("file:", 2).is_err());
        assert_eq!(
            ResourceSpec::parse("file:/tmp/x.json", 2).unwrap(),
            ResourceSpec::File(PathBuf::from("/tmp/x.json"))
        );
    }

    #[test]
    fn strict_schmidt_validation() {
        assert!(ResourceSpec::schmidt(vec![0.8f64.sqrt(), 0.2f64.sqrt()]).is_ok());
        assert!(ResourceSpec::schmidt(vec![0.2f64.sqrt(), 0.8f64.sqrt()]).is_err());
        assert!(ResourceSpec::schmidt(vec![0.9, 0.1]).is_err());
        assert!(ResourceSpec::schmidt(vec![]).is_err());
    }

    #[test]
    fn product_resource() {
        let s = resource_state(&ResourceSpec::Schmidt(vec![1.0])).unwrap();
        assert_eq!(s.layout().dims(), vec![2, 2]);
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert_eq!(s.norm(), 1.0);
    }

    #[test]
    fn rho_needs_bipartite_resource() {
        let s = haar_random_state(&[2, 2], 1).unwrap();
        assert!(matches!(build_rho(2, &s), Err(Error::NotBipartite(_))));
    }

    #[test]
    fn haar_is_deterministic() {
        let a = haar_random_state(&[3, 2], 42).unwrap();
        let b = haar_random_state(&[3, 2], 42).unwrap();
        let c = haar_random_state(&[3, 2], 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
