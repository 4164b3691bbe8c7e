//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

/// Euler-Mascheroni constant; an irrational mixing weight that makes
/// accidental coincidences in `A + gamma * B` unlikely.
const MIX: f64 = 0.577_215_664_901_532_9;
const CLUSTER_TOL: f64 = 1e-6;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Deterministic pairwise summation (fixed tree independent of threads).
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// In-place unnormalized Walsh-Hadamard transform; `len` must be a power of two.
pub fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max |(u^dagger u - I)_{ij}|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMat::identity(u.nrows(), u.ncols()))
}

pub fn hermiticity_defect(h: &CMat) -> f64 {
    max_abs_diff(h, &h.adjoint())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn diag_matrix(d: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_row_slice(d))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let dim = h.nrows();
    let real = h.iter().all(|z| z.im == 0.0);
    let (vals, vecs): (Vec<f64>, CMat) = if real {
        let re = h.map(|z| z.re);
        let eig = SymmetricEigen::new(re);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| c(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(h.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = CMat::from_fn(dim, dim, |r, col| vecs[(r, order[col])]);
    (sorted_vals, sorted_vecs)
}

/// Eigenvalues only of a Hermitian matrix, ascending.
pub fn eigvalsh(h: &CMat) -> Vec<f64> {
    let real = h.iter().all(|z| z.im == 0.0);
    let mut vals: Vec<f64> = if real {
        SymmetricEigen::new(h.map(|z| z.re)).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigendecomposition `u = V diag(e^{i theta}) V^dagger` of a unitary,
/// with `theta` in `(-pi, pi]`.
///
/// Hermitian and anti-Hermitian parts commute for a normal matrix, so the
/// eigenbasis of `A + gamma B` is shared; near-degenerate clusters of that
/// combination are split again by diagonalizing `B` inside the cluster.
pub fn unitary_eig(u: &CMat) -> Result<(Vec<f64>, CMat)> {
    let dim = u.nrows();
    if u.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", dim, u.ncols()),
        });
    }
    let ud = u.adjoint();
    let a = (u + &ud).scale(0.5);
    let b = (u - &ud) * c(0.0, -0.5);
    let m = &a + b.scale(MIX);
    let (mvals, mut vecs) = eigh(&m);

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && mvals[end] - mvals[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            let vc = vecs.columns(start, end - start).into_owned();
            let bc = vc.adjoint() * &b * &vc;
            let bc = (&bc + bc.adjoint()).scale(0.5);
            let (_, w) = eigh(&bc);
            let rotated = vc * w;
            vecs.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }

    let uv = u * &vecs;
    let phases = (0..dim)
        .map(|j| {
            let z = vecs.column(j).dotc(&uv.column(j));
            let theta = z.arg();
            if theta <= -std::f64::consts::PI {
                std::f64::consts::PI
            } else {
                theta
            }
        })
        .collect();
    Ok((phases, vecs))
}

/// `V diag(d) V^dagger`.
pub fn reconstruct(vecs: &CMat, d: &[C64]) -> CMat {
    let mut scaled = vecs.clone();
    for (j, &dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut_c(dj);
    }
    scaled * vecs.adjoint()
}

trait ScaleMutC {
    fn scale_mut_c(&mut self, s: C64);
}

impl<S> ScaleMutC for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_c(&mut self, s: C64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// Von Neumann entropy (nats) from a list of eigenvalues; tiny or negative
/// eigenvalues are dropped.
pub fn entropy_from_eigs(eigs: &[f64]) -> f64 {
    -eigs.iter().filter(|&&p| p > 1e-15).map(|&p| p * p.ln()).sum::<f64>()
}
