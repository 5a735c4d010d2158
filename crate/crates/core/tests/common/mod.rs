//! Test-only reference implementations.

#![allow(dead_code)]

use mes_locc::tensor::{DensityMatrix, Matrix, SubsystemLayout};
use mes_locc::tensor::{Party, StateVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi on the real embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is the original one doubled.
pub fn jacobi_hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let size = 2 * n;
    let mut a = vec![vec![0.0f64; size]; size];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..size)
            .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..size {
            for q in p + 1..size {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (head, tail) = a.split_at_mut(q);
                for (x, y) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (apk, aqk) = (*x, *y);
                    *x = c * apk - s * aqk;
                    *y = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..size).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

/// Partial trace by looping over every pair of full basis indices. Kept
/// subsystems stay in layout order.
pub fn brute_partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Matrix {
    let layout = rho.layout();
    let dims = layout.dims();
    let mut kept: Vec<usize> = keep.iter().map(|l| layout.position(l).unwrap()).collect();
    kept.sort_unstable();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = Matrix::zeros(out_dim);
    let total = layout.total_dim();
    for i in 0..total {
        let di = digits(i, &dims);
        for j in 0..total {
            let dj = digits(j, &dims);
            let traced_equal = (0..dims.len()).filter(|k| !kept.contains(k)).all(|k| di[k] == dj[k]);
            if !traced_equal {
                continue;
            }
            let r = undigits(&kept.iter().map(|&k| di[k]).collect::<Vec<_>>(), &kept_dims);
            let c = undigits(&kept.iter().map(|&k| dj[k]).collect::<Vec<_>>(), &kept_dims);
            out[(r, c)] += rho.matrix()[(i, j)];
        }
    }
    out
}

/// Partial transpose by swapping the chosen digits of row and column.
pub fn brute_partial_transpose(rho: &DensityMatrix, labels: &[&str]) -> Matrix {
    let layout = rho.layout();
    let dims = layout.dims();
    let swap: Vec<usize> = labels.iter().map(|l| layout.position(l).unwrap()).collect();
    let total = layout.total_dim();
    Matrix::from_fn(total, |i, j| {
        let mut di = digits(i, &dims);
        let mut dj = digits(j, &dims);
        for &k in &swap {
            std::mem::swap(&mut di[k], &mut dj[k]);
        }
        rho.matrix()[(undigits(&di, &dims), undigits(&dj, &dims))]
    })
}

/// Random full-rank density matrix on `q0, q1, …`, alternating parties.
pub fn random_density(dims: &[usize], seed: u64) -> DensityMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let triples: Vec<(String, usize, Party)> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| (format!("q{k}"), d, if k % 2 == 0 { Party::A } else { Party::B }))
        .collect();
    let layout = SubsystemLayout::from_triples(&triples).unwrap();
    let n = layout.total_dim();
    let g = Matrix::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(layout, m.scale_real(1.0 / tr)).unwrap()
}

/// Random pure state with the same labeling as [`random_density`].
pub fn random_state(dims: &[usize], seed: u64) -> StateVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let triples: Vec<(String, usize, Party)> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| (format!("q{k}"), d, if k % 2 == 0 { Party::A } else { Party::B }))
        .collect();
    let layout = SubsystemLayout::from_triples(&triples).unwrap();
    let amps = (0..layout.total_dim()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    StateVector::normalized(layout, amps).unwrap()
}
