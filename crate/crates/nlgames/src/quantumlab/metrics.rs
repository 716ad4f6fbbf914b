//! The state-induced bilinear form, norms, consistency parameters, the
//! closeness-from-consistency audit, and robust-triple metrics.

use crate::error::{Error, Result};
use crate::linalg::{apply_to_register, inner, CMat, C64};
use crate::quantumlab::state::MultiRegisterState;
use crate::quantumlab::submeas::{RobustTripleSpec, SubMeasurement};

const IMAG_TOL: f64 = 1e-9;

/// <A, B>_Psi = <Psi| A (x) B (x) Id^(r-2) |Psi> at registers (0, 1).
pub fn pairwise_form(a: &CMat, b: &CMat, state: &MultiRegisterState) -> Result<C64> {
    pairwise_form_at(a, b, state, 0, 1)
}

/// Same bilinear form evaluated at an explicit register pair; for
/// permutation-invariant states the placement does not matter.
pub fn pairwise_form_at(
    a: &CMat,
    b: &CMat,
    state: &MultiRegisterState,
    reg_a: usize,
    reg_b: usize,
) -> Result<C64> {
    if state.registers() < 2 {
        return Err(Error::InvalidStrategy("pairwise form needs r >= 2".into()));
    }
    if reg_a == reg_b {
        return Err(Error::InvalidStrategy("registers must be distinct".into()));
    }
    let d = state.dim();
    if a.nrows() != d || b.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.nrows() });
    }
    let dims = state.dims();
    let va = apply_to_register(state.vector(), a, reg_a, &dims);
    let vab = apply_to_register(&va, b, reg_b, &dims);
    Ok(inner(state.vector(), &vab))
}

/// Tr_rho(A) = <Psi| A (x) Id^(r-1) |Psi>, as a complex number.
pub fn trace_rho(a: &CMat, state: &MultiRegisterState) -> Result<C64> {
    let dims = state.dims();
    let va = apply_to_register(state.vector(), a, 0, &dims);
    Ok(inner(state.vector(), &va))
}

/// The two state norms of an operator: (||A||_Psi, ||A||'_Psi), i.e. the
/// square roots of <Psi| A A^dag (x) Id |Psi> and <Psi| A^dag A (x) Id |Psi>.
pub fn state_norm(a: &CMat, state: &MultiRegisterState) -> Result<(f64, f64)> {
    let aad = a * a.adjoint();
    let ada = a.adjoint() * a;
    let x = real_part(trace_rho(&aad, state)?)?;
    let y = real_part(trace_rho(&ada, state)?)?;
    Ok((x.max(0.0).sqrt(), y.max(0.0).sqrt()))
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::InvariantViolated(format!("imaginary residue {}", z.im)));
    }
    Ok(z.re)
}

/// The three quality parameters of a sub-measurement M with outcomes g
/// relative to per-point reference families A.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyMetrics {
    /// E_v sum_{g,a: g(v) != a} Tr_rho(M^g (x) A_v^a)
    pub delta_consistency: f64,
    /// Tr_rho(M (x) (Id - M))
    pub gamma_projectivity: f64,
    /// 1 - Tr_rho(M)
    pub eta_completeness: f64,
}

/// Computes the consistency parameters. `outcome_fns[k][v]` is the value
/// that M's k-th outcome assigns to point v; `reference[v]` is the
/// measurement applied at point v; `weights`, when given, is the point
/// distribution (uniform otherwise).
pub fn consistency_metrics(
    m: &SubMeasurement,
    outcome_fns: &[Vec<usize>],
    reference: &[SubMeasurement],
    state: &MultiRegisterState,
    weights: Option<&[f64]>,
) -> Result<ConsistencyMetrics> {
    if outcome_fns.len() != m.len() {
        return Err(Error::DimensionMismatch { expected: m.len(), got: outcome_fns.len() });
    }
    let npoints = reference.len();
    if npoints == 0 {
        return Err(Error::InvariantViolated("no reference points".into()));
    }
    let uniform = vec![1.0 / npoints as f64; npoints];
    let w = weights.unwrap_or(&uniform);
    if w.len() != npoints {
        return Err(Error::DimensionMismatch { expected: npoints, got: w.len() });
    }

    let mut delta = C64::new(0.0, 0.0);
    for (k, g) in outcome_fns.iter().enumerate() {
        if g.len() != npoints {
            return Err(Error::InvariantViolated(format!("outcome {k} not total on V")));
        }
        for (v, &wv) in w.iter().enumerate() {
            for a in 0..reference[v].len() {
                if g[v] != a {
                    delta += C64::new(wv, 0.0)
                        * pairwise_form(m.element(k), reference[v].element(a), state)?;
                }
            }
        }
    }

    let total = m.total();
    let id = crate::linalg::identity(m.dim());
    let gamma = pairwise_form(&total, &(&id - &total), state)?;
    let trm = trace_rho(&total, state)?;
    Ok(ConsistencyMetrics {
        delta_consistency: real_part(delta)?,
        gamma_projectivity: real_part(gamma)?,
        eta_completeness: 1.0 - real_part(trm)?,
    })
}

/// Result of the closeness-from-consistency audit on two measurements.
#[derive(Debug, Clone, Copy)]
pub struct ClosenessReport {
    /// sum_a ||A^a - B^a||_Psi^2
    pub lhs: f64,
    /// 1 - sum_a <A^a, B^a>
    pub delta: f64,
    /// 2 delta + 4 sqrt(delta)
    pub bound: f64,
}

/// Two single-register measurements that answer consistently are close in
/// the state norm: lhs <= 2 delta + 4 sqrt(delta). Needs r >= 3 registers
/// and a permutation-invariant state.
pub fn closeness_from_consistency(
    a: &SubMeasurement,
    b: &SubMeasurement,
    state: &MultiRegisterState,
) -> Result<ClosenessReport> {
    if state.registers() < 3 {
        return Err(Error::InvalidStrategy("closeness audit needs r >= 3".into()));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let mut lhs = 0.0;
    let mut ip = C64::new(0.0, 0.0);
    for k in 0..a.len() {
        let diff = a.element(k) - b.element(k);
        let (n, _) = state_norm(&diff, state)?;
        lhs += n * n;
        ip += pairwise_form(a.element(k), b.element(k), state)?;
    }
    let delta = (1.0 - real_part(ip)?).max(0.0);
    Ok(ClosenessReport { lhs, delta, bound: 2.0 * delta + 4.0 * delta.sqrt() })
}

/// The four robustness quantities of Definition-style triples, plus the
/// random-walk mixing curve (uniform over neighbors, self excluded).
#[derive(Debug, Clone)]
pub struct RobustTripleMetrics {
    /// E_v sum_a <A_v^a, Id - A_v^a>
    pub delta_self_consistency: f64,
    /// max_{g != g'} Pr_v[g(v) = g'(v)]
    pub delta_intersection: f64,
    /// E_v E_{v' in N(v)} sum_g <R^g, (A_v^{g(v)} - A_{v'}^{g(v')})^2>
    pub delta_stability: f64,
    /// E_v || p_k(v) - u ||_1 for k = 1..cap
    pub mixing_curve: Vec<f64>,
}

pub fn robust_triple_metrics(
    spec: &RobustTripleSpec,
    state: &MultiRegisterState,
    probe: &SubMeasurement,
    mixing_steps: usize,
) -> Result<RobustTripleMetrics> {
    spec.validate()?;
    if probe.len() != spec.functions.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.functions.len(),
            got: probe.len(),
        });
    }
    let n = spec.neighbors.len();
    let id = crate::linalg::identity(state.dim());

    let mut d1 = 0.0;
    for m in &spec.vertex_measurements {
        for a in 0..m.len() {
            let el = m.element(a);
            d1 += real_part(pairwise_form(el, &(&id - el), state)?)?;
        }
    }
    d1 /= n as f64;

    let mut d2 = 0.0f64;
    for (i, g) in spec.functions.iter().enumerate() {
        for gp in spec.functions.iter().skip(i + 1) {
            let agree = g.iter().zip(gp).filter(|(x, y)| x == y).count();
            d2 = d2.max(agree as f64 / n as f64);
        }
    }

    let mut d3 = 0.0;
    for (v, ns) in spec.neighbors.iter().enumerate() {
        let mut inner_acc = 0.0;
        for &vp in ns {
            for (k, g) in spec.functions.iter().enumerate() {
                let diff = spec.vertex_measurements[v].element(g[v])
                    - spec.vertex_measurements[vp].element(g[vp]);
                let sq = &diff * &diff;
                inner_acc += real_part(pairwise_form(probe.element(k), &sq, state)?)?;
            }
        }
        d3 += inner_acc / ns.len() as f64;
    }
    d3 /= n as f64;

    // mixing curve of the simple random walk
    let mut curve = Vec::with_capacity(mixing_steps);
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            let mut row = vec![0.0; n];
            row[v] = 1.0;
            row
        })
        .collect();
    let u = 1.0 / n as f64;
    for _ in 0..mixing_steps {
        let next: Vec<Vec<f64>> = dist
            .iter()
            .map(|row| {
                let mut out = vec![0.0; n];
                for (v, &p) in row.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let share = p / spec.neighbors[v].len() as f64;
                    for &w in &spec.neighbors[v] {
                        out[w] += share;
                    }
                }
                out
            })
            .collect();
        dist = next;
        let avg_l1: f64 = dist
            .iter()
            .map(|row| row.iter().map(|&p| (p - u).abs()).sum::<f64>())
            .sum::<f64>()
            / n as f64;
        curve.push(avg_l1);
    }

    Ok(RobustTripleMetrics {
        delta_self_consistency: d1,
        delta_intersection: d2,
        delta_stability: d3,
        mixing_curve: curve,
    })
}
