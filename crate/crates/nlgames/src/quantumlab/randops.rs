//! Random states, Hermitian operators and POVMs for tests and audits.

use crate::linalg::{c, identity, psd_inv_sqrt, CMat, CVec};
use crate::quantumlab::state::MultiRegisterState;
use crate::quantumlab::submeas::SubMeasurement;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    let mut v = CVec::zeros(n);
    loop {
        for i in 0..n {
            v[i] = c(gauss(rng), gauss(rng));
        }
        let norm = v.norm();
        if norm > 1e-6 {
            return v / c(norm, 0.0);
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_state(registers: usize, dim: usize, rng: &mut ChaCha8Rng) -> MultiRegisterState {
    let v = random_unit_vector(dim.pow(registers as u32), rng);
    MultiRegisterState::new(registers, dim, v).expect("unit vector")
}

/// A permutation-invariant random state: symmetrize a random vector over
/// all register permutations and renormalize.
pub fn random_symmetric_state(
    registers: usize,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> MultiRegisterState {
    use crate::linalg::{permutations, permute_registers};
    let dims = vec![dim; registers];
    loop {
        let v = random_unit_vector(dim.pow(registers as u32), rng);
        let mut acc = CVec::zeros(v.len());
        for perm in permutations(registers) {
            acc += permute_registers(&v, &dims, &perm);
        }
        let norm = acc.norm();
        if norm > 1e-6 {
            return MultiRegisterState::new(registers, dim, acc / c(norm, 0.0))
                .expect("unit vector");
        }
    }
}

pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = c(gauss(rng), gauss(rng));
        }
    }
    (&m + m.adjoint()) * c(0.5, 0.0)
}

pub fn random_psd(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let m = random_hermitian(dim, rng);
    &m * &m
}

/// A random complete POVM with `outcomes` elements: PSD parts normalized by
/// S^(-1/2) conjugation.
pub fn random_povm(dim: usize, outcomes: usize, rng: &mut ChaCha8Rng) -> SubMeasurement {
    loop {
        let parts: Vec<CMat> = (0..outcomes)
            .map(|_| {
                let p = random_psd(dim, rng);
                p + identity(dim) * c(1e-6, 0.0)
            })
            .collect();
        let mut sum = CMat::zeros(dim, dim);
        for p in &parts {
            sum += p;
        }
        let s = psd_inv_sqrt(&sum, 1e-12);
        let els: Vec<CMat> = parts.iter().map(|p| &s * p * &s).collect();
        if let Ok(m) = SubMeasurement::new(dim, els) {
            if m.is_complete(1e-8) {
                return m;
            }
        }
    }
}

/// A random projective measurement: eigenprojectors of a random Hermitian,
/// grouped into `outcomes` bins.
pub fn random_projective_povm(
    dim: usize,
    outcomes: usize,
    rng: &mut ChaCha8Rng,
) -> SubMeasurement {
    assert!(outcomes <= dim);
    let h = random_hermitian(dim, rng);
    let eig = h.symmetric_eigen();
    let mut els = vec![CMat::zeros(dim, dim); outcomes];
    for k in 0..dim {
        let v = eig.eigenvectors.column(k);
        let p = v * v.adjoint();
        els[k % outcomes] += p;
    }
    SubMeasurement::new(dim, els)
        .expect("projectors form a sub-measurement")
        .claim_projective()
        .expect("eigenprojector bins are projective")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn generators_produce_valid_objects() {
        let mut rng = StreamSeed::new(1, "randops").rng();
        let s = random_state(2, 3, &mut rng);
        assert_eq!(s.vector().len(), 9);
        let m = random_povm(3, 2, &mut rng);
        assert!(m.is_complete(1e-8));
        let p = random_projective_povm(3, 2, &mut rng);
        assert!(p.is_projective() && p.is_complete(1e-8));
        let sym = random_symmetric_state(3, 2, &mut rng);
        assert!(sym.is_permutation_invariant(1e-9));
    }
}
