//! The public SDP interface: Hermitian blocks, linear constraints, and the
//! lowering onto the real solver core. Complex blocks go through the
//! standard 2x2 real embedding h = a + ib -> [[a, -b], [b, a]]; real blocks
//! pass through unchanged.

use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, CMat};
use crate::optim::solver::{solve_real, RealSdp};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Eq,
    Le,
    Ge,
}

/// sum_b Re<coeffs_b, X_b>  (=, <=, >=)  rhs, with <A, X> = tr(A X).
#[derive(Debug, Clone)]
pub struct SdpConstraint {
    pub coeffs: Vec<CMat>,
    pub rhs: f64,
    pub kind: ConstraintKind,
}

/// Maximization problem over PSD Hermitian blocks.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: Vec<CMat>,
    pub constraints: Vec<SdpConstraint>,
}

#[derive(Debug, Clone, Copy)]
pub struct IterRecord {
    pub mu: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal blocks (complex Hermitian, PSD within solver tolerance).
    pub blocks: Vec<CMat>,
    /// Dual multiplier per constraint.
    pub dual: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub log: Vec<IterRecord>,
}

const DEFAULT_MAX_ITERS: usize = 10_000;
const DIM_CAP: usize = 200;

fn embed(h: &CMat) -> DMatrix<f64> {
    let d = h.nrows();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = h[(i, j)].re;
            out[(i + d, j + d)] = h[(i, j)].re;
            out[(i, j + d)] = -h[(i, j)].im;
            out[(i + d, j)] = h[(i, j)].im;
        }
    }
    out
}

fn unembed(m: &DMatrix<f64>, d: usize) -> CMat {
    let mut out = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re = 0.5 * (m[(i, j)] + m[(i + d, j + d)]);
            let im = 0.5 * (m[(i + d, j)] - m[(i, j + d)]);
            out[(i, j)] = crate::linalg::c(re, im);
        }
    }
    // exact Hermitization against roundoff
    (&out + out.adjoint()) * crate::linalg::c(0.5, 0.0)
}

fn block_is_real(problem: &SdpProblem, b: usize) -> bool {
    let im = |m: &CMat| m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    im(&problem.objective[b]) == 0.0
        && problem.constraints.iter().all(|c| im(&c.coeffs[b]) == 0.0)
}

fn real_part(m: &CMat) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Solves the problem with the interior-point core; `Unsolved` carries the
/// best iterate data when convergence fails within the iteration cap.
pub fn solve_sdp(problem: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    let nb = problem.block_dims.len();
    if problem.objective.len() != nb {
        return Err(Error::DimensionMismatch { expected: nb, got: problem.objective.len() });
    }
    let total: usize = problem.block_dims.iter().sum();
    if total > DIM_CAP {
        return Err(Error::TooLarge(total as u128, DIM_CAP as u128));
    }
    for (b, &d) in problem.block_dims.iter().enumerate() {
        if problem.objective[b].nrows() != d {
            return Err(Error::DimensionMismatch { expected: d, got: problem.objective[b].nrows() });
        }
        if !is_hermitian(&problem.objective[b], 1e-9) {
            return Err(Error::InvariantViolated(format!("objective block {b} not Hermitian")));
        }
    }
    for (i, c) in problem.constraints.iter().enumerate() {
        if c.coeffs.len() != nb {
            return Err(Error::DimensionMismatch { expected: nb, got: c.coeffs.len() });
        }
        for (b, a) in c.coeffs.iter().enumerate() {
            if a.nrows() != problem.block_dims[b] || !is_hermitian(a, 1e-9) {
                return Err(Error::InvariantViolated(format!(
                    "constraint {i} block {b} not Hermitian of the right size"
                )));
            }
        }
    }

    // lowering: real blocks pass through, complex blocks embed with the
    // coefficient halving that keeps <.,.> values unchanged
    let real_blocks: Vec<bool> = (0..nb).map(|b| block_is_real(problem, b)).collect();
    let lower = |m: &CMat, b: usize| -> DMatrix<f64> {
        if real_blocks[b] {
            real_part(m)
        } else {
            embed(m) * 0.5
        }
    };
    let mut block_dims: Vec<usize> = (0..nb)
        .map(|b| {
            if real_blocks[b] {
                problem.block_dims[b]
            } else {
                2 * problem.block_dims[b]
            }
        })
        .collect();
    let mut objective: Vec<DMatrix<f64>> =
        (0..nb).map(|b| lower(&problem.objective[b], b)).collect();

    // inequality slacks become 1x1 blocks
    let mut constraints: Vec<(Vec<DMatrix<f64>>, f64)> = Vec::new();
    let n_slack = problem
        .constraints
        .iter()
        .filter(|c| c.kind != ConstraintKind::Eq)
        .count();
    let slack_base = nb;
    for _ in 0..n_slack {
        block_dims.push(1);
        objective.push(DMatrix::zeros(1, 1));
    }
    let mut slack_idx = 0usize;
    for c in &problem.constraints {
        let mut coeffs: Vec<DMatrix<f64>> = (0..nb).map(|b| lower(&c.coeffs[b], b)).collect();
        for s in 0..n_slack {
            let val = if c.kind != ConstraintKind::Eq && s == slack_idx {
                match c.kind {
                    ConstraintKind::Le => 1.0,
                    ConstraintKind::Ge => -1.0,
                    ConstraintKind::Eq => unreachable!(),
                }
            } else {
                0.0
            };
            coeffs.push(DMatrix::from_element(1, 1, val));
        }
        if c.kind != ConstraintKind::Eq {
            slack_idx += 1;
        }
        constraints.push((coeffs, c.rhs));
    }
    let _ = slack_base;

    let real = RealSdp { block_dims, objective, constraints };
    let sol = solve_real(&real, tol, DEFAULT_MAX_ITERS);

    let blocks: Vec<CMat> = (0..nb)
        .map(|b| {
            if real_blocks[b] {
                let d = problem.block_dims[b];
                CMat::from_fn(d, d, |i, j| {
                    crate::linalg::c(0.5 * (sol.x[b][(i, j)] + sol.x[b][(j, i)]), 0.0)
                })
            } else {
                unembed(&sol.x[b], problem.block_dims[b])
            }
        })
        .collect();
    let log: Vec<IterRecord> = sol
        .log
        .iter()
        .map(|s| IterRecord {
            mu: s.mu,
            gap: s.gap,
            primal_residual: s.primal_residual,
            dual_residual: s.dual_residual,
        })
        .collect();
    if !sol.converged {
        return Err(Error::Unsolved { iterations: sol.iterations, gap: sol.gap });
    }
    Ok(SdpSolution {
        blocks,
        dual: sol.y.clone(),
        primal_value: sol.primal,
        dual_value: sol.dual,
        gap: (sol.primal - sol.dual).abs(),
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
        log,
    })
}

impl SdpProblem {
    /// Plain-text instance dump (block sizes plus constraint triples) for
    /// external cross-checking.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        write!(out, "sdp blocks").unwrap();
        for d in &self.block_dims {
            write!(out, " {d}").unwrap();
        }
        out.push('\n');
        let dump_mat = |out: &mut String, m: &CMat| {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    if z.norm() != 0.0 {
                        writeln!(out, "  {i} {j} {:.17e} {:.17e}", z.re, z.im).unwrap();
                    }
                }
            }
        };
        for (b, c) in self.objective.iter().enumerate() {
            writeln!(out, "objective block {b}").unwrap();
            dump_mat(&mut out, c);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let kind = match c.kind {
                ConstraintKind::Eq => "=",
                ConstraintKind::Le => "<=",
                ConstraintKind::Ge => ">=",
            };
            writeln!(out, "constraint {i} {kind} {:.17e}", c.rhs).unwrap();
            for (b, a) in c.coeffs.iter().enumerate() {
                writeln!(out, " block {b}").unwrap();
                dump_mat(&mut out, a);
            }
        }
        out
    }
}
