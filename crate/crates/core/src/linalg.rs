//! Dense complex/real linear-algebra helpers shared by the theory back-ends.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Deterministic RNG for a master seed and an independent stream index.
/// Per-trial streams keep parallel runs reproducible regardless of scheduling.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending
/// and the eigenvector columns permuted to match.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    // symmetrize so round-off never leaks a non-Hermitian part into the solver
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

pub fn kron_c(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_r(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

/// Largest absolute entry.
pub fn sup_norm(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn sup_norm_vec(v: &RVec) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn sup_norm_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// |v><v|
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn basis_ket(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = ONE;
    v
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && sup_norm_c(&(u.adjoint() * u - CMat::identity(u.nrows(), u.ncols()))) < tol
}

/// Haar-random pure state: normalized complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v / c(n, 0.0)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// the triangular factor's diagonal pushed back into Q.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMat::from_fn(d, d, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal) * scale,
            rng.sample::<f64, _>(StandardNormal) * scale,
        )
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / c(rjj.norm(), 0.0) } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Extend orthonormal columns to a full unitary by Gram-Schmidt against the
/// computational basis.
pub fn complete_unitary(columns: &[CVec], d: usize, tol: f64) -> Option<CMat> {
    let mut basis: Vec<CVec> = Vec::with_capacity(d);
    for v in columns {
        let mut w = v.clone();
        for b in &basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
        let n = w.norm();
        if n < tol.max(1e-12) || (n - 1.0).abs() > 1e-6 {
            return None;
        }
        basis.push(w / c(n, 0.0));
    }
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut w = basis_ket(d, i);
        for b in &basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
        let n = w.norm();
        if n > 1e-8 {
            basis.push(w / c(n, 0.0));
        }
    }
    if basis.len() != d {
        return None;
    }
    Some(CMat::from_columns(&basis))
}

/// Binomial coefficient as a float (exact for the small arguments used here).
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(7, 0);
        for d in 1..6 {
            let u = haar_unitary(d, &mut rng);
            assert!(is_unitary(&u, 1e-12));
        }
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals.len(), 3);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[2] - 3.0).abs() < 1e-12);
        let recon = &vecs * CMat::from_diagonal(&CVec::from_iterator(3, vals.iter().map(|&x| c(x, 0.0)))) * vecs.adjoint();
        assert!(sup_norm_c(&(recon - m)) < 1e-12);
    }

    #[test]
    fn completion_keeps_given_columns() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVec::from_vec(vec![c(h, 0.0), c(h, 0.0), ZERO]);
        let u = complete_unitary(std::slice::from_ref(&plus), 3, 1e-9).unwrap();
        assert!(is_unitary(&u, 1e-12));
        assert!((u.column(0) - plus).norm() < 1e-12);
    }

    #[test]
    fn same_seed_same_stream_is_reproducible() {
        let a = haar_state(4, &mut rng_for(42, 3));
        let b = haar_state(4, &mut rng_for(42, 3));
        let other = haar_state(4, &mut rng_for(42, 4));
        assert_eq!(a, b);
        assert_ne!(a, other);
    }
}
