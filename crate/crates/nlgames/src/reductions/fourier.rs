//! Fourier analysis of answer tables over function spaces F_U, and the
//! decoding measurement built from squared coefficients.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Fourier coefficients of a table A: F_U -> R, indexed by subsets alpha of
/// the point set {+-1}^U (as bit masks over the N = 2^|U| points):
/// coeff[alpha] = E_f chi_alpha(f) A_f.
#[derive(Debug, Clone)]
pub struct FourierTable {
    /// N, the number of points of {+-1}^U.
    pub points: usize,
    pub coeffs: Vec<f64>,
}

impl FourierTable {
    pub fn parseval_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

const MAX_POINTS: usize = 16; // |U| <= 4

fn check_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::InvalidStrategy("table length must be a power of two".into()));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_POINTS {
        return Err(Error::TooLarge(len as u128, 1 << MAX_POINTS));
    }
    Ok(n)
}

/// Walsh transform of a scalar answer table. The input is indexed by
/// functions f in F_U encoded as masks over the N points (bit x set means
/// f(x) = -1); chi_alpha(f) = (-1)^|f restricted to alpha|.
pub fn fourier_transform(values: &[f64]) -> Result<FourierTable> {
    let n = check_len(values.len())?;
    let mut coeffs = values.to_vec();
    let mut h = 1usize;
    while h < coeffs.len() {
        for base in (0..coeffs.len()).step_by(2 * h) {
            for i in base..base + h {
                let (a, b) = (coeffs[i], coeffs[i + h]);
                coeffs[i] = a + b;
                coeffs[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / values.len() as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    Ok(FourierTable { points: n, coeffs })
}

/// Same transform for operator-valued tables (toy scales only).
pub fn fourier_transform_ops(values: &[CMat]) -> Result<Vec<CMat>> {
    check_len(values.len())?;
    let mut coeffs = values.to_vec();
    let mut h = 1usize;
    while h < coeffs.len() {
        for base in (0..coeffs.len()).step_by(2 * h) {
            for i in base..base + h {
                let a = coeffs[i].clone();
                let b = coeffs[i + h].clone();
                coeffs[i] = &a + &b;
                coeffs[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = crate::linalg::c(1.0 / values.len() as f64, 0.0);
    for c in &mut coeffs {
        *c *= scale;
    }
    Ok(coeffs)
}

/// The probabilistic decoding strategy: measure alpha with probability
/// coeff[alpha]^2, then answer a uniformly random assignment x in alpha.
pub struct DecodedStrategy {
    table: FourierTable,
    cumulative: Vec<f64>,
}

impl DecodedStrategy {
    /// Requires the squared coefficients to sum to one within 1e-9 (exact
    /// for +-1-valued tables by Parseval).
    pub fn new(table: FourierTable) -> Result<Self> {
        let total = table.parseval_sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvariantViolated(format!(
                "squared Fourier mass {total} != 1"
            )));
        }
        let mut cumulative = Vec::with_capacity(table.coeffs.len());
        let mut acc = 0.0;
        for c in &table.coeffs {
            acc += c * c;
            cumulative.push(acc);
        }
        Ok(DecodedStrategy { table, cumulative })
    }

    pub fn table(&self) -> &FourierTable {
        &self.table
    }

    /// Samples an assignment mask over the |U| source questions, or None on
    /// the empty set (excluded for folded tables, whose even coefficients
    /// vanish).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Option<u32> {
        let x: f64 = rng.gen_range(0.0..1.0);
        let alpha = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&x).expect("finite"))
        {
            Ok(i) | Err(i) => i.min(self.cumulative.len() - 1),
        };
        if alpha == 0 {
            return None;
        }
        // uniform set bit of alpha: a point of {+-1}^U, i.e. an assignment
        let choices: Vec<u32> = (0..self.table.points as u32)
            .filter(|b| alpha >> b & 1 == 1)
            .collect();
        Some(choices[rng.gen_range(0..choices.len())])
    }
}
