//! Dense complex linear algebra helpers shared by the quantum modules:
//! per-register operator application on multi-register state vectors,
//! Hermitian/PSD checks, and PSD square roots.

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Total dimension of a register layout.
pub fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Applies `op` to register `reg` of a state vector laid out row-major
/// (register 0 most significant).
pub fn apply_to_register(state: &CVec, op: &CMat, reg: usize, dims: &[usize]) -> CVec {
    let d = dims[reg];
    assert_eq!(op.nrows(), d);
    assert_eq!(op.ncols(), d);
    let stride: usize = dims[reg + 1..].iter().product();
    let block = d * stride;
    let total = total_dim(dims);
    assert_eq!(state.len(), total);
    let mut out = CVec::zeros(total);
    for outer in 0..total / block {
        for inner in 0..stride {
            let base = outer * block + inner;
            for row in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..d {
                    acc += op[(row, col)] * state[base + col * stride];
                }
                out[base + row * stride] = acc;
            }
        }
    }
    out
}

/// <a|b> with conjugation on the left argument.
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

/// <psi| (x)_i ops[i] |psi> for one operator per register (use `None` for
/// registers that are not acted on).
pub fn expectation(state: &CVec, ops: &[Option<&CMat>], dims: &[usize]) -> C64 {
    let mut v = state.clone();
    for (reg, op) in ops.iter().enumerate() {
        if let Some(op) = op {
            v = apply_to_register(&v, op, reg, dims);
        }
    }
    inner(state, &v)
}

/// Reorders registers: register `k` of the result holds what register
/// `perm[k]` held in `state`.
pub fn permute_registers(state: &CVec, dims: &[usize], perm: &[usize]) -> CVec {
    let r = dims.len();
    assert_eq!(perm.len(), r);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total = total_dim(dims);
    let old_strides = strides(dims);
    let new_strides = strides(&new_dims);
    let mut out = CVec::zeros(total);
    let mut idx = vec![0usize; r];
    for flat in 0..total {
        // decompose flat in the new layout
        let mut rem = flat;
        for k in 0..r {
            idx[k] = rem / new_strides[k];
            rem %= new_strides[k];
        }
        let mut old_flat = 0;
        for k in 0..r {
            old_flat += idx[k] * old_strides[perm[k]];
        }
        out[flat] = state[old_flat];
    }
    out
}

/// All permutations of 0..n in a deterministic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(cur, k + 1, out);
            cur.swap(k, i);
        }
    }
    rec(&mut cur, 0, &mut out);
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let r = dims.len();
    let mut s = vec![1usize; r];
    for k in (0..r.saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Reduced density matrix of a pure state on register `reg`.
pub fn reduced_density(state: &CVec, dims: &[usize], reg: usize) -> CMat {
    let d = dims[reg];
    let stride: usize = dims[reg + 1..].iter().product();
    let block = d * stride;
    let total = total_dim(dims);
    let mut rho = CMat::zeros(d, d);
    for outer in 0..total / block {
        for inner in 0..stride {
            let base = outer * block + inner;
            for i in 0..d {
                for j in 0..d {
                    rho[(i, j)] += state[base + i * stride] * state[base + j * stride].conj();
                }
            }
        }
    }
    rho
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    max_abs_entry(&(m - m.adjoint())) <= tol
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    *hermitian_eigenvalues(m).first().expect("nonempty matrix")
}

/// Operator norm via the largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    let mm = m.adjoint() * m;
    hermitian_eigenvalues(&mm).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Square root of a PSD Hermitian matrix (small negative eigenvalues are
/// clamped to zero).
pub fn psd_sqrt(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut out = CMat::zeros(d, d);
    for k in 0..d {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        if lam == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += lam * v[i] * v[j].conj();
            }
        }
    }
    out
}

/// Inverse square root of a positive definite Hermitian matrix; eigenvalues
/// below `floor` are clamped up to it.
pub fn psd_inv_sqrt(m: &CMat, floor: f64) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut out = CMat::zeros(d, d);
    for k in 0..d {
        let lam = eig.eigenvalues[k].max(floor);
        let s = 1.0 / lam.sqrt();
        let v = eig.eigenvectors.column(k);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += s * v[i] * v[j].conj();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn epr() -> CVec {
        let s = 1.0 / 2f64.sqrt();
        CVec::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
    }

    #[test]
    fn apply_and_expectation() {
        let psi = epr();
        let p0 = CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        // <EPR| P0 (x) P0 |EPR> = 1/2
        let v = expectation(&psi, &[Some(&p0), Some(&p0)], &[2, 2]);
        assert!((v.re - 0.5).abs() < 1e-12 && v.im.abs() < 1e-12);
        let id = identity(2);
        let v = expectation(&psi, &[Some(&id), None], &[2, 2]);
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_and_reduction() {
        // |01> on 2x2
        let mut psi = CVec::zeros(4);
        psi[1] = c(1., 0.);
        let swapped = permute_registers(&psi, &[2, 2], &[1, 0]);
        // |10>
        assert!((swapped[2].re - 1.0).abs() < 1e-12);
        let rho = reduced_density(&epr(), &[2, 2], 0);
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((rho[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(rho[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn sqrt_roundtrip() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c(2., 0.), c(0.5, 0.5), c(0.5, -0.5), c(1., 0.)],
        );
        let m = &m * m.adjoint(); // PSD
        let s = psd_sqrt(&m);
        assert!(max_abs_entry(&(&s * &s - &m)) < 1e-10);
        assert!(is_hermitian(&s, 1e-12));
    }
}
