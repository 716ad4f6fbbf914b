//! The interior-point core: an infeasible primal-dual path-following method
//! with a Mehrotra-style adaptive centering parameter, on block-diagonal
//! real symmetric data.
//!
//!   max  sum_b <C_b, X_b>   s.t.  sum_b <A_ib, X_b> = rhs_i,  X_b psd
//!   min  rhs' y             s.t.  Z_b = sum_i y_i A_ib - C_b psd
//!
//! Everything is dense; the intended scale is a few blocks of dimension
//! below ~30 and at most a few hundred constraints.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct RealSdp {
    pub block_dims: Vec<usize>,
    pub objective: Vec<DMatrix<f64>>,
    /// One entry per constraint: per-block coefficient matrices and the rhs.
    pub constraints: Vec<(Vec<DMatrix<f64>>, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IterStat {
    pub mu: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct RealSolution {
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log: Vec<IterStat>,
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest alpha in (0, 1] with X + alpha D psd, backed off by `tau`.
fn max_step(x: &DMatrix<f64>, d: &DMatrix<f64>, tau: f64) -> f64 {
    let Some(chol) = x.clone().cholesky() else { return 1e-8 };
    let l = chol.l();
    // W = L^-1 D L^-T
    let li_d = l.solve_lower_triangular(d).expect("L invertible");
    let w = l
        .solve_lower_triangular(&li_d.transpose())
        .expect("L invertible");
    let lam_min = sym(&w)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lam_min >= 0.0 {
        1.0
    } else {
        (tau * (-1.0 / lam_min)).min(1.0)
    }
}

pub(crate) fn solve_real(problem: &RealSdp, tol: f64, max_iter: usize) -> RealSolution {
    let nb = problem.block_dims.len();
    let m = problem.constraints.len();
    let n_total: usize = problem.block_dims.iter().sum();

    let data_scale = problem
        .objective
        .iter()
        .map(|c| c.amax())
        .chain(problem.constraints.iter().map(|(a, r)| {
            a.iter().map(|ab| ab.amax()).fold(r.abs(), f64::max)
        }))
        .fold(1.0, f64::max);
    let s0 = data_scale.max(1.0);

    let mut x: Vec<DMatrix<f64>> = problem
        .block_dims
        .iter()
        .map(|&d| DMatrix::identity(d, d) * s0)
        .collect();
    let mut z = x.clone();
    let mut y = DVector::zeros(m);

    let rhs_norm: f64 = problem
        .constraints
        .iter()
        .map(|(_, r)| r.abs())
        .fold(0.0, f64::max);
    let obj_norm: f64 = problem.objective.iter().map(|c| c.amax()).fold(0.0, f64::max);

    let mut log = Vec::new();
    let mut best: Option<RealSolution> = None;

    for iter in 0..max_iter {
        // residuals
        let a_of = |x: &Vec<DMatrix<f64>>| -> DVector<f64> {
            DVector::from_iterator(
                m,
                problem.constraints.iter().map(|(a, _)| {
                    (0..nb).map(|b| dot(&a[b], &x[b])).sum::<f64>()
                }),
            )
        };
        let ax = a_of(&x);
        let rp = DVector::from_iterator(
            m,
            problem.constraints.iter().zip(ax.iter()).map(|((_, r), v)| r - v),
        );
        // dual residual per block: Rd = C + Z - A^T y (want zero)
        let rd: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| {
                let mut at_y = DMatrix::zeros(
                    problem.block_dims[b],
                    problem.block_dims[b],
                );
                for (i, (a, _)) in problem.constraints.iter().enumerate() {
                    at_y += &a[b] * y[i];
                }
                &problem.objective[b] + &z[b] - at_y
            })
            .collect();

        let mu: f64 = (0..nb).map(|b| dot(&x[b], &z[b])).sum::<f64>() / n_total as f64;
        let primal: f64 = (0..nb).map(|b| dot(&problem.objective[b], &x[b])).sum();
        let dual: f64 = problem
            .constraints
            .iter()
            .zip(y.iter())
            .map(|((_, r), yi)| r * yi)
            .sum();
        let gap = (primal - dual).abs() / (1.0 + primal.abs().max(dual.abs()));
        let rp_norm = rp.amax() / (1.0 + rhs_norm);
        let rd_norm =
            rd.iter().map(|r| r.amax()).fold(0.0, f64::max) / (1.0 + obj_norm);

        log.push(IterStat { mu, gap, primal_residual: rp_norm, dual_residual: rd_norm });

        let current = RealSolution {
            x: x.clone(),
            y: y.iter().copied().collect(),
            z: z.clone(),
            primal,
            dual,
            gap,
            primal_residual: rp_norm,
            dual_residual: rd_norm,
            iterations: iter,
            converged: false,
            log: log.clone(),
        };
        let better = match &best {
            None => true,
            Some(b) => {
                gap + rp_norm + rd_norm
                    < b.gap + b.primal_residual + b.dual_residual
            }
        };
        if better {
            best = Some(current);
        }

        if gap <= tol && rp_norm <= tol && rd_norm <= tol {
            let mut out = best.expect("recorded");
            out.converged = true;
            out.iterations = iter;
            return out;
        }

        // Z inverses
        let mut failed = false;
        let zinv: Vec<DMatrix<f64>> = z
            .iter()
            .map(|zb| match zb.clone().cholesky() {
                Some(c) => c.inverse(),
                None => {
                    failed = true;
                    DMatrix::identity(zb.nrows(), zb.ncols())
                }
            })
            .collect();
        if failed {
            break;
        }

        // Schur complement M_ij = sum_b <A_i, X A_j Zinv>
        let mut schur = DMatrix::zeros(m, m);
        for b in 0..nb {
            let pre: Vec<DMatrix<f64>> = problem
                .constraints
                .iter()
                .map(|(a, _)| &x[b] * &a[b] * &zinv[b])
                .collect();
            for i in 0..m {
                for j in 0..m {
                    schur[(i, j)] += dot(&problem.constraints[i].0[b], &pre[j]);
                }
            }
        }
        let Some(lu) = try_lu(&schur) else { break };

        // a direction for a given centering target sigma*mu and optional
        // second-order correction term Ecorr = dXaff dZaff
        let direction = |sigma_mu: f64,
                         corr: Option<&Vec<DMatrix<f64>>>|
         -> Option<(Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>)> {
            let mut rhs = DVector::zeros(m);
            for (i, (a, _)) in problem.constraints.iter().enumerate() {
                let mut acc = -problem.constraints[i].1;
                for b in 0..nb {
                    let mut t = &zinv[b] * sigma_mu;
                    t += &x[b] * &rd[b] * &zinv[b];
                    if let Some(e) = corr {
                        t -= &e[b] * &zinv[b];
                    }
                    acc += dot(&a[b], &t);
                }
                rhs[i] = acc;
            }
            let dy = lu.solve(&rhs)?;
            let mut dz = Vec::with_capacity(nb);
            let mut dx = Vec::with_capacity(nb);
            for b in 0..nb {
                let mut at_dy =
                    DMatrix::zeros(problem.block_dims[b], problem.block_dims[b]);
                for (i, (a, _)) in problem.constraints.iter().enumerate() {
                    at_dy += &a[b] * dy[i];
                }
                let dzb = at_dy - &rd[b];
                let mut dxb = &zinv[b] * sigma_mu - &x[b] - &x[b] * &dzb * &zinv[b];
                if let Some(e) = corr {
                    dxb -= &e[b] * &zinv[b];
                }
                dx.push(sym(&dxb));
                dz.push(sym(&dzb));
            }
            Some((dx, dy, dz))
        };

        // predictor
        let Some((dx_aff, _, dz_aff)) = direction(0.0, None) else { break };
        let ap = (0..nb)
            .map(|b| max_step(&x[b], &dx_aff[b], 1.0))
            .fold(1.0f64, f64::min);
        let ad = (0..nb)
            .map(|b| max_step(&z[b], &dz_aff[b], 1.0))
            .fold(1.0f64, f64::min);
        let gap_aff: f64 = (0..nb)
            .map(|b| dot(&(&x[b] + &dx_aff[b] * ap), &(&z[b] + &dz_aff[b] * ad)))
            .sum::<f64>()
            / n_total as f64;
        let sigma = (gap_aff / mu).powi(3).clamp(1e-6, 0.9);

        // corrector
        let corr: Vec<DMatrix<f64>> =
            (0..nb).map(|b| &dx_aff[b] * &dz_aff[b]).collect();
        let Some((dx, dy, dz)) = direction(sigma * mu, Some(&corr)) else { break };

        let tau = 0.97f64;
        let ap = (0..nb)
            .map(|b| max_step(&x[b], &dx[b], tau))
            .fold(1.0f64, f64::min);
        let ad = (0..nb)
            .map(|b| max_step(&z[b], &dz[b], tau))
            .fold(1.0f64, f64::min);
        for b in 0..nb {
            x[b] += &dx[b] * ap;
            z[b] += &dz[b] * ad;
        }
        y += dy * ad;

        if x.iter().chain(z.iter()).any(|mm| mm.iter().any(|v| !v.is_finite())) {
            break;
        }
    }

    let mut out = best.expect("at least one iterate");
    out.converged = false;
    out
}

fn try_lu(m: &DMatrix<f64>) -> Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let lu = m.clone().lu();
    if lu.determinant().abs() < 1e-300 {
        None
    } else {
        Some(lu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_bound() {
        // max t s.t. t <= 1: block [t] psd, slack s: t + s = 1
        let problem = RealSdp {
            block_dims: vec![1, 1],
            objective: vec![
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, 0.0),
            ],
            constraints: vec![(
                vec![
                    DMatrix::from_element(1, 1, 1.0),
                    DMatrix::from_element(1, 1, 1.0),
                ],
                1.0,
            )],
        };
        let sol = solve_real(&problem, 1e-9, 200);
        assert!(sol.converged);
        assert!((sol.primal - 1.0).abs() < 1e-7);
        assert!((sol.dual - 1.0).abs() < 1e-7);
    }

    #[test]
    fn diagonal_operator_pick() {
        // max Tr(T C), 0 <= T <= Id, C = diag(2, -1): optimum 2 at diag(1,0)
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0]));
        let one = |i: usize, j: usize| {
            let mut e = DMatrix::zeros(2, 2);
            e[(i, j)] = 1.0;
            e
        };
        let sym_pair = |i: usize, j: usize| {
            let mut e = DMatrix::zeros(2, 2);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            e
        };
        // T + S = Id over the symmetric basis
        let problem = RealSdp {
            block_dims: vec![2, 2],
            objective: vec![c, DMatrix::zeros(2, 2)],
            constraints: vec![
                (vec![one(0, 0), one(0, 0)], 1.0),
                (vec![one(1, 1), one(1, 1)], 1.0),
                (vec![sym_pair(0, 1), sym_pair(0, 1)], 0.0),
            ],
        };
        let sol = solve_real(&problem, 1e-9, 200);
        assert!(sol.converged, "gap {} rp {} rd {}", sol.gap, sol.primal_residual, sol.dual_residual);
        assert!((sol.primal - 2.0).abs() < 1e-6, "primal {}", sol.primal);
        assert!((sol.x[0][(0, 0)] - 1.0).abs() < 1e-5);
        assert!(sol.x[0][(1, 1)].abs() < 1e-5);
    }

    #[test]
    fn infeasible_reports_unconverged() {
        // t >= 0 and t + s = -1 with s >= 0: infeasible
        let problem = RealSdp {
            block_dims: vec![1, 1],
            objective: vec![
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::zeros(1, 1),
            ],
            constraints: vec![(
                vec![
                    DMatrix::from_element(1, 1, 1.0),
                    DMatrix::from_element(1, 1, 1.0),
                ],
                -1.0,
            )],
        };
        let sol = solve_real(&problem, 1e-9, 120);
        assert!(!sol.converged);
    }
}
