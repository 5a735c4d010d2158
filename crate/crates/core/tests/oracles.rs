//! Values recomputed by independent, deliberately naive routes.

mod common;

use common::{brute_partial_trace, brute_partial_transpose, jacobi_hermitian_eigenvalues, random_density};
use mes_locc::entanglement::{entanglement_entropy, log_negativity, Cut};
use mes_locc::protocols::{discriminate, teleport, teleport_correction};
use mes_locc::states::{
    bell_state, build_rho, build_rho_s, clock, haar_random_state, resource_state, shift, weyl_operator, BellIndex,
    ResourceSpec,
};
use mes_locc::suite::schmidt_resource;
use mes_locc::tensor::{
    fidelity_pure, hermitian_eigenvalues, trace_norm, Composite, DensityMatrix, Matrix, Party, StateVector,
    SubsystemLayout,
};
use num_complex::Complex64 as C64;

fn idx(d: usize, m: usize, n: usize) -> BellIndex {
    BellIndex::new(d, m, n).unwrap()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn eigensolver_agrees_with_jacobi() {
    for (k, dims) in [[2usize, 2], [2, 3], [3, 3]].iter().enumerate() {
        let rho = random_density(dims, 11 + k as u64);
        let fast = hermitian_eigenvalues(rho.matrix()).unwrap();
        let slow = jacobi_hermitian_eigenvalues(rho.matrix());
        assert_close(&fast, &slow, 1e-10);
    }
}

#[test]
fn mes_partial_transpose_spectrum() {
    for d in 2..=3 {
        let phi = bell_state(idx(d, 0, 0)).to_density();
        let pt = phi.partial_transpose(Party::B).unwrap();
        let eig = jacobi_hermitian_eigenvalues(pt.matrix());
        // Swap operator / d: (d(d-1)/2) eigenvalues -1/d, the rest +1/d.
        let neg = d * (d - 1) / 2;
        let mut expected = vec![-1.0 / d as f64; neg];
        expected.extend(vec![1.0 / d as f64; d * d - neg]);
        assert_close(&eig, &expected, 1e-12);
        assert!((trace_norm(pt.matrix()).unwrap() - d as f64).abs() < 1e-12);
    }
}

#[test]
fn partial_trace_matches_index_loops() {
    let rho = random_density(&[2, 3, 2], 5);
    for keep in [vec!["q0"], vec!["q1"], vec!["q2", "q0"], vec!["q1", "q2"]] {
        let fast = rho.partial_trace(&keep).unwrap();
        let slow = brute_partial_trace(&rho, &keep);
        assert!(fast.matrix().max_abs_diff(&slow) < 1e-14, "keep {keep:?}");
    }
}

#[test]
fn partial_transpose_matches_index_loops() {
    let rho = random_density(&[3, 2, 2], 6);
    for labels in [vec!["q0"], vec!["q1", "q2"], vec!["q2"]] {
        let fast = rho.partial_transpose_labels(&labels).unwrap();
        let slow = brute_partial_transpose(&rho, &labels);
        assert_eq!(fast.matrix().max_abs_diff(&slow), 0.0, "labels {labels:?}");
    }
}

#[test]
fn teleport_correction_is_the_unique_weyl_fix() {
    // Search all d² Weyl operators for the one undoing each outcome and
    // compare with the closed form up to a global phase.
    for d in 2..=4 {
        let chi = haar_random_state(&[d], 3).unwrap().relabeled(&["C"]).unwrap();
        let resource = resource_state(&ResourceSpec::Mes(d)).unwrap();
        let run = teleport(&chi, &resource).unwrap();
        let plain: Vec<C64> = chi.amplitudes().to_vec();
        for br in &run.branches {
            let w = teleport_correction(br.outcome);
            let uncorrected = w.adjoint().apply(br.output.amplitudes());
            let fixes: Vec<BellIndex> = BellIndex::all(d)
                .filter(|&k| {
                    let fixed = weyl_operator(k).apply(&uncorrected);
                    let overlap: C64 = fixed.iter().zip(&plain).map(|(a, b)| a.conj() * b).sum();
                    (overlap.norm() - 1.0).abs() < 1e-12
                })
                .collect();
            assert_eq!(fixes.len(), 1);
            let found = weyl_operator(fixes[0]);
            let phase = (0..d * d)
                .map(|k| (k / d, k % d))
                .find(|&(i, j)| w[(i, j)].norm() > 0.5)
                .map(|(i, j)| found[(i, j)] / w[(i, j)])
                .unwrap();
            assert!((found.max_abs_diff(&w.scale(phase))) < 1e-12);
        }
    }
}

#[test]
fn weyl_composition_phase() {
    // U_{m,n} U_{m',n'} = ω^{n m'} U_{m+m', n+n'}
    for d in 2..=4 {
        for a in BellIndex::all(d) {
            for b in BellIndex::all(d) {
                let lhs = &weyl_operator(a) * &weyl_operator(b);
                let sum = idx(d, (a.m + b.m) % d, (a.n + b.n) % d);
                let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((a.n * b.m) % d) as f64 / d as f64);
                assert!(lhs.max_abs_diff(&weyl_operator(sum).scale(omega)) < 1e-12);
            }
        }
        assert!(weyl_operator(idx(d, 1, 0)).max_abs_diff(&shift(d)) < 1e-15);
        assert!(weyl_operator(idx(d, 0, 1)).max_abs_diff(&clock(d)) < 1e-15);
    }
}

#[test]
fn weyl_displacement_of_bell_states() {
    // (I ⊗ U_{m,n})|φ_{0,0}⟩ = |φ_{m,n}⟩ exactly.
    for d in 2..=4 {
        let base = bell_state(idx(d, 0, 0));
        for k in BellIndex::all(d) {
            let moved = base.apply_local(&["B"], &weyl_operator(k)).unwrap();
            let target = bell_state(k);
            let diff =
                moved.amplitudes().iter().zip(target.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "{k}");
        }
    }
}

#[test]
fn schmidt_entropy_by_hand() {
    let h = -(0.8f64 * 0.8f64.log2() + 0.2 * 0.2f64.log2());
    assert!((h - 0.721_928_094_887_362_3).abs() < 1e-15);
    let psi = schmidt_resource(&[0.8, 0.2], 2).unwrap();
    let e = entanglement_entropy(&psi, &Cut::from_parties(psi.layout()).unwrap()).unwrap();
    assert!((e - h).abs() < 1e-12);
    // Pure-state log-negativity is 2 log₂ Σ c_k.
    let ln = log_negativity(&psi, &Cut::from_parties(psi.layout()).unwrap()).unwrap();
    assert!((ln - 2.0 * (0.8f64.sqrt() + 0.2f64.sqrt()).log2()).abs() < 1e-12);
}

#[test]
fn haar_overlap_mean() {
    // E|⟨0|χ⟩|² = 1/D with variance (D−1)/(D²(D+1)).
    let dim = 4usize;
    let samples = 4000;
    let mean =
        (0..samples).map(|s| haar_random_state(&[dim], 1000 + s).unwrap().amplitudes()[0].norm_sqr()).sum::<f64>()
            / samples as f64;
    let d = dim as f64;
    let sigma = ((d - 1.0) / (d * d * (d + 1.0)) / samples as f64).sqrt();
    assert!((mean - 1.0 / d).abs() < 5.0 * sigma, "mean {mean}, sigma {sigma}");
}

#[test]
fn haar_seed_reproducible() {
    let a = haar_random_state(&[3, 2], 42).unwrap();
    let b = haar_random_state(&[3, 2], 42).unwrap();
    assert_eq!(a.amplitudes(), b.amplitudes());
    assert_ne!(a.amplitudes(), haar_random_state(&[3, 2], 43).unwrap().amplitudes());
}

#[test]
fn purities() {
    let rho = build_rho(2, &resource_state(&ResourceSpec::Mes(2)).unwrap()).unwrap();
    assert!((rho.purity() - 0.25).abs() < 1e-12);
    for d in 2..=3 {
        assert!((build_rho_s(d).unwrap().purity() - 1.0 / (d * d) as f64).abs() < 1e-12);
    }
}

#[test]
fn fidelity_with_maximally_mixed() {
    let phi = bell_state(idx(2, 0, 0));
    let mixed = DensityMatrix::maximally_mixed(phi.layout().clone());
    assert!((fidelity_pure(&phi, &mixed).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn bob_learns_nothing_before_the_message() {
    for d in 2..=3 {
        let resource = resource_state(&ResourceSpec::Mes(d)).unwrap();
        let mut reference: Option<Matrix> = None;
        for hidden in BellIndex::all(d) {
            let run = discriminate(hidden, &resource).unwrap();
            let bob = run.bob_pre_message.matrix().clone();
            match &reference {
                None => reference = Some(bob),
                Some(r) => assert!(r.max_abs_diff(&bob) < 1e-12),
            }
        }
    }
}

#[test]
fn product_resource_teleports_poorly() {
    let d = 2;
    let resource = schmidt_resource(&[1.0], d).unwrap();
    let chi = haar_random_state(&[d], 9).unwrap().relabeled(&["C"]).unwrap();
    let f = teleport(&chi, &resource).unwrap().average_fidelity(&chi).unwrap();
    assert!(f < 1.0 - 1e-6);
}

#[test]
fn product_state_layout_roundtrip() {
    let layout = SubsystemLayout::from_triples(&[("x", 2, Party::A), ("y", 3, Party::B)]).unwrap();
    let s = StateVector::basis(layout, 4).unwrap();
    let p = s.permute(&["y", "x"]).unwrap();
    // |1⟩|1⟩ in (2,3) is index 4; in (3,2) it is index 3.
    assert_eq!(p.amplitudes()[3], C64::new(1.0, 0.0));
}
