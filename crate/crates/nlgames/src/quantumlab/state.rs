//! Multi-register pure states with identical per-register dimension.

use crate::error::{Error, Result};
use crate::linalg::{permutations, permute_registers, reduced_density, CMat, CVec};

const NORM_TOL: f64 = 1e-10;

/// A unit vector on H^(x r) with dim(H) fixed across registers.
#[derive(Debug, Clone)]
pub struct MultiRegisterState {
    registers: usize,
    dim: usize,
    state: CVec,
}

impl MultiRegisterState {
    pub fn new(registers: usize, dim: usize, state: CVec) -> Result<Self> {
        let total = dim.checked_pow(registers as u32).ok_or(Error::TooLarge(u128::MAX, 0))?;
        if state.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: state.len() });
        }
        if (state.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvariantViolated(format!("state norm {} != 1", state.norm())));
        }
        Ok(MultiRegisterState { registers, dim, state })
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self) -> &CVec {
        &self.state
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.dim; self.registers]
    }

    /// Reduced density on a single register.
    pub fn reduced(&self, register: usize) -> CMat {
        reduced_density(&self.state, &self.dims(), register)
    }

    /// Largest norm deviation under any register permutation; zero for
    /// permutation-invariant states.
    pub fn swap_residual(&self) -> f64 {
        let dims = self.dims();
        permutations(self.registers)
            .into_iter()
            .map(|perm| (permute_registers(&self.state, &dims, &perm) - &self.state).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_permutation_invariant(&self, tol: f64) -> bool {
        self.swap_residual() <= tol
    }
}
