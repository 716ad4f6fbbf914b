//! Sub-measurements (PSD families summing to at most identity) and the
//! robust-triple specification.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, identity, is_hermitian, max_abs_entry, CMat};

const PSD_FLOOR: f64 = -1e-10;
const SUM_SLACK: f64 = 1e-10;
const PROJECTIVE_TOL: f64 = 1e-8;

/// A finite set of PSD operators on one register with sum <= Id.
#[derive(Debug, Clone)]
pub struct SubMeasurement {
    dim: usize,
    elements: Vec<CMat>,
    projective: bool,
}

impl SubMeasurement {
    pub fn new(dim: usize, elements: Vec<CMat>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvariantViolated("empty sub-measurement".into()));
        }
        let mut sum = CMat::zeros(dim, dim);
        for (i, el) in elements.iter().enumerate() {
            if el.nrows() != dim || el.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: el.nrows() });
            }
            if !is_hermitian(el, 1e-9) {
                return Err(Error::InvariantViolated(format!("element {i} not Hermitian")));
            }
            let min = hermitian_eigenvalues(el)[0];
            if min < PSD_FLOOR {
                return Err(Error::InvariantViolated(format!(
                    "element {i} has eigenvalue {min} below the PSD floor"
                )));
            }
            sum += el;
        }
        let excess = hermitian_eigenvalues(&(&sum - identity(dim)))
            .last()
            .copied()
            .unwrap_or(0.0);
        if excess > SUM_SLACK {
            return Err(Error::InvariantViolated(format!(
                "elements sum beyond identity by {excess}"
            )));
        }
        Ok(SubMeasurement { dim, elements, projective: false })
    }

    /// Claims projectivity and verifies ||E^2 - E|| <= 1e-8 per element.
    pub fn claim_projective(mut self) -> Result<Self> {
        for (i, el) in self.elements.iter().enumerate() {
            let residual = max_abs_entry(&(el * el - el));
            if residual > PROJECTIVE_TOL {
                return Err(Error::InvariantViolated(format!(
                    "element {i} fails projectivity by {residual}"
                )));
            }
        }
        self.projective = true;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &CMat {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// Sum of all elements.
    pub fn total(&self) -> CMat {
        let mut sum = CMat::zeros(self.dim, self.dim);
        for el in &self.elements {
            sum += el;
        }
        sum
    }

    /// Whether the elements sum to identity within `tol`.
    pub fn is_complete(&self, tol: f64) -> bool {
        max_abs_entry(&(self.total() - identity(self.dim))) <= tol
    }
}

/// Graph + per-vertex measurements + explicit function family; the carrier
/// of the robustness metrics.
#[derive(Debug, Clone)]
pub struct RobustTripleSpec {
    /// Adjacency lists; N(v) must not contain v (the walk excludes self).
    pub neighbors: Vec<Vec<usize>>,
    /// Number of outcomes per vertex measurement.
    pub outcomes: usize,
    /// One complete measurement per vertex, outcomes indexed 0..outcomes.
    pub vertex_measurements: Vec<SubMeasurement>,
    /// Explicit function family: each g maps vertex index to outcome index.
    pub functions: Vec<Vec<usize>>,
}

impl RobustTripleSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.neighbors.len();
        if self.vertex_measurements.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.vertex_measurements.len(),
            });
        }
        if self.functions.is_empty() {
            return Err(Error::InvariantViolated("empty function family".into()));
        }
        for (v, m) in self.vertex_measurements.iter().enumerate() {
            if m.len() != self.outcomes {
                return Err(Error::InvariantViolated(format!(
                    "vertex {v} has {} outcomes, expected {}",
                    m.len(),
                    self.outcomes
                )));
            }
            if !m.is_complete(1e-9) {
                return Err(Error::InvariantViolated(format!(
                    "vertex {v} measurement incomplete"
                )));
            }
        }
        for (i, g) in self.functions.iter().enumerate() {
            if g.len() != n {
                return Err(Error::InvariantViolated(format!("function {i} not total on V")));
            }
            if g.iter().any(|&a| a >= self.outcomes) {
                return Err(Error::InvariantViolated(format!("function {i} out of range")));
            }
        }
        for (v, ns) in self.neighbors.iter().enumerate() {
            if ns.contains(&v) {
                return Err(Error::InvariantViolated(format!("vertex {v} has a self-loop")));
            }
            if ns.is_empty() {
                return Err(Error::InvariantViolated(format!("vertex {v} is isolated")));
            }
            if ns.iter().any(|&u| u >= self.neighbors.len()) {
                return Err(Error::InvariantViolated("neighbor out of range".into()));
            }
        }
        Ok(())
    }
}
