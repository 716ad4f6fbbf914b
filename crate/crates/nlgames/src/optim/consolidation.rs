//! The consolidation SDP: upgrade a mildly consistent sub-measurement into
//! a complete one. Primal: max sum_g <T^g, rho^(1/2) Abar^g rho^(1/2)> over
//! T^g >= 0 with sum T <= Id; dual: min tr X over X >= rho^(1/2) Abar^g
//! rho^(1/2). Strong duality holds, the optimal primal normalizes to
//! sum T = Id, and complementary slackness ties T^g to the dual X.

use crate::error::{Error, Result};
use crate::linalg::{c, identity, is_hermitian, min_eigenvalue, psd_sqrt, CMat};
use crate::optim::problem::{solve_sdp, ConstraintKind, SdpConstraint, SdpProblem};
use crate::quantumlab::SubMeasurement;

#[derive(Debug, Clone)]
pub struct ConsolidationResult {
    /// Optimal primal blocks, normalized so that they sum to the identity
    /// (the slack block is absorbed into outcome 0).
    pub t_blocks: Vec<CMat>,
    /// The dual certificate X (>= every rho^(1/2) Abar^g rho^(1/2)).
    pub x_dual: CMat,
    /// Primal optimum.
    pub omega: f64,
    /// |primal - dual|.
    pub gap: f64,
    /// Frobenius norms of T^g X - T^g rho^(1/2) Abar^g rho^(1/2), per g.
    pub slackness_residuals: Vec<f64>,
    /// || sum_g T^g - Id || after normalization (exactly zero by
    /// construction; reported for the audit trail).
    pub completeness_residual: f64,
    /// Objective value lost (or gained) by the normalization; at the
    /// optimum the slack carries no objective weight, so this stays within
    /// solver tolerance.
    pub normalization_shift: f64,
}

/// Solves the consolidation SDP. `rho` must be PSD with unit trace and
/// invertible (restrict to its support first otherwise); each Abar must be
/// PSD below the identity.
pub fn consolidation_sdp(rho: &CMat, abar: &[CMat], tol: f64) -> Result<ConsolidationResult> {
    let d = rho.nrows();
    if !is_hermitian(rho, 1e-9) || min_eigenvalue(rho) < 1e-12 {
        return Err(Error::InvariantViolated(
            "rho must be Hermitian positive definite".into(),
        ));
    }
    let tr: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::InvariantViolated(format!("tr rho = {tr}, expected 1")));
    }
    if abar.is_empty() {
        return Err(Error::InvariantViolated("empty outcome family".into()));
    }
    for (g, a) in abar.iter().enumerate() {
        if a.nrows() != d || !is_hermitian(a, 1e-9) {
            return Err(Error::DimensionMismatch { expected: d, got: a.nrows() });
        }
        if min_eigenvalue(a) < -1e-9 || min_eigenvalue(&(identity(d) - a)) < -1e-9 {
            return Err(Error::InvariantViolated(format!(
                "Abar[{g}] must satisfy 0 <= A <= Id"
            )));
        }
    }

    let sqrt_rho = psd_sqrt(rho);
    let cost: Vec<CMat> = abar
        .iter()
        .map(|a| {
            let m = &sqrt_rho * a * &sqrt_rho;
            (&m + m.adjoint()) * c(0.5, 0.0)
        })
        .collect();

    let ng = abar.len();
    let mut block_dims = vec![d; ng];
    block_dims.push(d); // slack
    let mut objective = cost.clone();
    objective.push(CMat::zeros(d, d));

    // sum_g T^g + S = Id over a Hermitian basis
    let mut constraints = Vec::new();
    let mut basis: Vec<CMat> = Vec::new();
    for i in 0..d {
        let mut e = CMat::zeros(d, d);
        e[(i, i)] = c(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = c(1.0, 0.0);
            e[(j, i)] = c(1.0, 0.0);
            basis.push(e);
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = c(0.0, -1.0);
            e[(j, i)] = c(0.0, 1.0);
            basis.push(e);
        }
    }
    for e in &basis {
        let rhs: f64 = (0..d).map(|i| e[(i, i)].re).sum(); // Re<E, Id>
        constraints.push(SdpConstraint {
            coeffs: vec![e.clone(); ng + 1],
            rhs,
            kind: ConstraintKind::Eq,
        });
    }

    let problem = SdpProblem { block_dims, objective, constraints };
    let sol = solve_sdp(&problem, tol)?;

    // dual certificate: X = sum_k y_k E_k
    let mut x_dual = CMat::zeros(d, d);
    for (k, e) in basis.iter().enumerate() {
        x_dual += e * c(sol.dual[k], 0.0);
    }

    let mut t_blocks: Vec<CMat> = sol.blocks[..ng].to_vec();
    let slack = sol.blocks[ng].clone();
    let shift = (&cost[0] * &slack).trace().re;
    t_blocks[0] += &slack;
    // re-impose the exact identity sum on outcome 0
    let mut total = CMat::zeros(d, d);
    for t in &t_blocks {
        total += t;
    }
    let defect = identity(d) - &total;
    t_blocks[0] += &defect;
    let completeness_residual = crate::linalg::max_abs_entry(&defect);

    let slackness_residuals: Vec<f64> = t_blocks
        .iter()
        .zip(&cost)
        .map(|(t, cg)| {
            let r = t * &x_dual - t * cg;
            r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        })
        .collect();

    Ok(ConsolidationResult {
        t_blocks,
        x_dual,
        omega: sol.primal_value,
        gap: sol.gap,
        slackness_residuals,
        completeness_residual,
        normalization_shift: shift,
    })
}

#[derive(Debug, Clone)]
pub struct ImprovedSubmeasurement {
    pub s: SubMeasurement,
    /// Smallest eigenvalue across outcomes (>= -1e-10 by the invariants).
    pub min_eigenvalue: f64,
    /// Largest eigenvalue of sum S - Id (<= 1e-10).
    pub sum_excess: f64,
}

/// The improved sub-measurement S^g = E_v A_v^{g(v)} T^g A_v^{g(v)}.
/// `vertex_measurements[v]` supplies A_v; `outcome_fns[g][v]` the value
/// g(v); `weights` the point distribution (uniform when absent).
pub fn improved_submeasurement(
    t_blocks: &[CMat],
    vertex_measurements: &[SubMeasurement],
    outcome_fns: &[Vec<usize>],
    weights: Option<&[f64]>,
) -> Result<ImprovedSubmeasurement> {
    if t_blocks.len() != outcome_fns.len() {
        return Err(Error::DimensionMismatch {
            expected: outcome_fns.len(),
            got: t_blocks.len(),
        });
    }
    let nv = vertex_measurements.len();
    if nv == 0 {
        return Err(Error::InvariantViolated("no vertices".into()));
    }
    let uniform = vec![1.0 / nv as f64; nv];
    let w = weights.unwrap_or(&uniform);
    let d = t_blocks[0].nrows();
    let mut blocks = Vec::with_capacity(t_blocks.len());
    for (t, g) in t_blocks.iter().zip(outcome_fns) {
        if g.len() != nv {
            return Err(Error::InvariantViolated("outcome function not total on V".into()));
        }
        let mut s = CMat::zeros(d, d);
        for (v, &wv) in w.iter().enumerate() {
            let a = vertex_measurements[v].element(g[v]);
            s += (a * t * a) * c(wv, 0.0);
        }
        blocks.push((&s + s.adjoint()) * c(0.5, 0.0));
    }
    let min_eig = blocks.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min);
    let mut total = CMat::zeros(d, d);
    for b in &blocks {
        total += b;
    }
    let excess = crate::linalg::hermitian_eigenvalues(&(total - identity(d)))
        .last()
        .copied()
        .unwrap_or(0.0);
    // the SubMeasurement constructor re-checks the invariants and reports
    // the offending eigenvalue on failure
    let s = SubMeasurement::new(d, blocks)?;
    Ok(ImprovedSubmeasurement { s, min_eigenvalue: min_eig, sum_excess: excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantumlab::randops::{random_projective_povm, random_state};
    use crate::rng::StreamSeed;

    #[test]
    fn single_identity_outcome() {
        let rho = identity(2) * c(0.5, 0.0);
        let res = consolidation_sdp(&rho, &[identity(2)], 1e-8).unwrap();
        assert!((res.omega - 1.0).abs() < 1e-6);
        assert_eq!(res.completeness_residual, 0.0);
    }

    #[test]
    fn commuting_diagonal_family_matches_assignment_optimum() {
        // rho and Abar all diagonal: the optimum assigns every basis state
        // to its best outcome: omega = sum_i rho_ii max_g A^g_ii
        let mut rng = StreamSeed::new(111, "consolidation-diag").rng();
        use rand::Rng;
        for _ in 0..5 {
            let d = 3;
            let probs: Vec<f64> = {
                let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|x| x / s).collect()
            };
            let rho = CMat::from_fn(d, d, |i, j| {
                if i == j {
                    c(probs[i], 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            let ng = 3;
            let avals: Vec<Vec<f64>> = (0..ng)
                .map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let abar: Vec<CMat> = avals
                .iter()
                .map(|vals| {
                    CMat::from_fn(d, d, |i, j| {
                        if i == j {
                            c(vals[i], 0.0)
                        } else {
                            c(0.0, 0.0)
                        }
                    })
                })
                .collect();
            let want: f64 = (0..d)
                .map(|i| probs[i] * avals.iter().map(|v| v[i]).fold(0.0, f64::max))
                .sum();
            let res = consolidation_sdp(&rho, &abar, 1e-8).unwrap();
            assert!((res.omega - want).abs() < 1e-6, "{} vs {want}", res.omega);
        }
    }

    #[test]
    fn random_instances_certify() {
        let mut rng = StreamSeed::new(113, "consolidation-rand").rng();
        for _ in 0..10 {
            let d = 4;
            let state = random_state(2, d, &mut rng);
            let mut rho = state.reduced(0);
            // mix toward the maximally mixed state so rho stays invertible
            rho = rho * c(0.9, 0.0) + identity(d) * c(0.1 / d as f64, 0.0);
            let fam = random_projective_povm(d, 3, &mut rng);
            let abar: Vec<CMat> = fam.elements().to_vec();
            let res = consolidation_sdp(&rho, &abar, 1e-8).unwrap();
            assert!(res.gap <= 1e-6, "gap {}", res.gap);
            for r in &res.slackness_residuals {
                assert!(*r <= 1e-5, "slackness {r}");
            }
            // dual feasibility: X >= rho^(1/2) Abar rho^(1/2)
            let sq = psd_sqrt(&rho);
            for a in &abar {
                let m = &res.x_dual - &sq * a * &sq;
                assert!(min_eigenvalue(&((&m + m.adjoint()) * c(0.5, 0.0))) > -1e-6);
            }
            // normalized primal is a complete measurement
            let sm = SubMeasurement::new(d, res.t_blocks.clone());
            assert!(sm.is_ok());
            assert!(res.normalization_shift.abs() < 1e-5);
        }
    }

    #[test]
    fn improved_submeasurement_identity_case() {
        // T^g = Id/|G| with projective A: S^g = E_v A_v^{g(v)} / |G|
        let mut rng = StreamSeed::new(115, "improved").rng();
        let d = 3;
        let a0 = random_projective_povm(d, 2, &mut rng);
        let a1 = random_projective_povm(d, 2, &mut rng);
        let t = vec![identity(d) * c(0.5, 0.0), identity(d) * c(0.5, 0.0)];
        let fns = vec![vec![0, 1], vec![1, 0]];
        let out = improved_submeasurement(&t, &[a0.clone(), a1.clone()], &fns, None).unwrap();
        for (k, g) in fns.iter().enumerate() {
            let mut want = CMat::zeros(d, d);
            want += a0.element(g[0]) * c(0.25, 0.0);
            want += a1.element(g[1]) * c(0.25, 0.0);
            assert!(crate::linalg::max_abs_entry(&(out.s.element(k) - want)) < 1e-10);
        }
        // single-point family: S^g = A^{g(v)} T^g A^{g(v)} exactly
        let t = vec![a0.element(0) * c(0.7, 0.0), a0.element(1) * c(0.7, 0.0)];
        let fns = vec![vec![0], vec![1]];
        let out = improved_submeasurement(&t, &[a0.clone()], &fns, None).unwrap();
        for k in 0..2 {
            let a = a0.element(fns[k][0]);
            let want = a * &t[k] * a;
            assert!(crate::linalg::max_abs_entry(&(out.s.element(k) - want)) < 1e-10);
        }
    }
}
