//! Sparse multivariate polynomials.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldParams};
use num::BigRational;
use rand::RngCore;
use std::collections::BTreeMap;

/// A sparse multivariate polynomial: a map from exponent vectors to nonzero
/// coefficients. The exponent-vector length equals `num_vars` for every
/// stored term; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    num_vars: usize,
    field: FieldParams,
    terms: BTreeMap<Vec<u32>, FieldElem>,
}

impl MultiPoly {
    pub fn zero(field: FieldParams, num_vars: usize) -> Self {
        MultiPoly { num_vars, field, terms: BTreeMap::new() }
    }

    pub fn constant(field: FieldParams, num_vars: usize, c: FieldElem) -> Self {
        let mut p = Self::zero(field, num_vars);
        p.add_term(vec![0; num_vars], c);
        p
    }

    /// The monomial x_i.
    pub fn variable(field: FieldParams, num_vars: usize, i: usize) -> Self {
        assert!(i < num_vars);
        let mut e = vec![0u32; num_vars];
        e[i] = 1;
        let mut p = Self::zero(field, num_vars);
        p.add_term(e, field.one());
        p
    }

    pub fn from_terms<I>(field: FieldParams, num_vars: usize, it: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, FieldElem)>,
    {
        let mut p = Self::zero(field, num_vars);
        for (e, c) in it {
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch { expected: num_vars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Maximum exponent of variable `i` over all terms.
    pub fn degree_in(&self, i: usize) -> usize {
        self.terms.keys().map(|e| e[i] as usize).max().unwrap_or(0)
    }

    fn add_term(&mut self, expo: Vec<u32>, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(expo) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    o.insert(s);
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, other.num_vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: FieldElem) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.field, self.num_vars);
        }
        let mut out = MultiPoly::zero(self.field, self.num_vars);
        for (e, a) in &self.terms {
            out.add_term(e.clone(), *a * c);
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.scale(-other.field.one()))
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, other.num_vars);
        let mut out = MultiPoly::zero(self.field, self.num_vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, *c1 * *c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.field, self.num_vars, self.field.one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Exact evaluation with per-variable power caching.
    pub fn evaluate(&self, point: &[FieldElem]) -> Result<FieldElem> {
        if point.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, got: point.len() });
        }
        let mut caches: Vec<Vec<FieldElem>> = point.iter().map(|&x| vec![self.field.one(), x]).collect();
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &exp) in e.iter().enumerate() {
                let cache = &mut caches[i];
                while cache.len() <= exp as usize {
                    let last = *cache.last().unwrap();
                    cache.push(last * point[i]);
                }
                t = t * cache[exp as usize];
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Substitutes polynomial `subs[i]` for variable `i`; all `subs` share a
    /// variable count, which becomes the result's.
    pub fn compose(&self, subs: &[MultiPoly]) -> Result<MultiPoly> {
        if subs.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, got: subs.len() });
        }
        let out_vars = subs.first().map(|s| s.num_vars).unwrap_or(0);
        let mut caches: Vec<Vec<MultiPoly>> = subs
            .iter()
            .map(|s| vec![MultiPoly::constant(self.field, out_vars, self.field.one()), s.clone()])
            .collect();
        let mut acc = MultiPoly::zero(self.field, out_vars);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(self.field, out_vars, *c);
            for (i, &exp) in e.iter().enumerate() {
                let cache = &mut caches[i];
                while cache.len() <= exp as usize {
                    let last = cache.last().unwrap().clone();
                    cache.push(last.mul(&subs[i]));
                }
                t = t.mul(&cache[exp as usize]);
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Uniformly random polynomial of total degree <= d (coefficients of all
    /// monomials drawn uniformly, so the zero polynomial is possible).
    pub fn sample<R: RngCore>(field: FieldParams, num_vars: usize, d: usize, rng: &mut R) -> Self {
        let mut p = MultiPoly::zero(field, num_vars);
        for e in monomials_up_to(num_vars, d) {
            p.add_term(e, field.sample_uniform(rng));
        }
        p
    }
}

/// All polynomials in `m` variables of total degree <= d over F, i.e. every
/// coefficient assignment on the monomial basis. Only sensible at tiny
/// parameters; used to enumerate protocol answer alphabets.
pub fn monomial_polys_up_to(field: FieldParams, m: usize, d: usize) -> Vec<MultiPoly> {
    let monos = monomials_up_to(m, d);
    let q = field.modulus();
    let total = (q as u128).pow(monos.len() as u32);
    let mut out = Vec::with_capacity(total as usize);
    let mut coeffs = vec![0u64; monos.len()];
    loop {
        let p = MultiPoly::from_terms(
            field,
            m,
            monos
                .iter()
                .zip(&coeffs)
                .map(|(e, &c)| (e.clone(), field.elem(c))),
        )
        .expect("exponent lengths match");
        out.push(p);
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return out;
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// All exponent vectors of `m` variables with total degree <= d.
pub(crate) fn monomials_up_to(m: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; m];
    fn rec(i: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e as u32;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// Univariate Lagrange basis polynomial through `nodes`, equal to 1 at
/// `nodes[j]` and 0 at the others. Dense arithmetic, converted to a sparse
/// polynomial in variable `var` of `num_vars`.
pub(crate) fn lagrange_basis(
    field: FieldParams,
    nodes: &[FieldElem],
    j: usize,
    num_vars: usize,
    var: usize,
) -> MultiPoly {
    let mut coeffs: Vec<FieldElem> = vec![field.one()]; // dense, low to high
    let mut denom = field.one();
    for (i, &xi) in nodes.iter().enumerate() {
        if i == j {
            continue;
        }
        // multiply by (X - xi)
        let mut next = vec![field.zero(); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] = next[k + 1] + c;
            next[k] = next[k] + c * (-xi);
        }
        coeffs = next;
        denom = denom * (nodes[j] - xi);
    }
    let dinv = denom.inv().expect("distinct nodes");
    let mut p = MultiPoly::zero(field, num_vars);
    for (k, &c) in coeffs.iter().enumerate() {
        let mut e = vec![0u32; num_vars];
        e[var] = k as u32;
        p.add_term(e, c * dinv);
    }
    p
}

/// Univariate interpolation through (nodes[i], values[i]), returned as a
/// polynomial in variable `var` of `num_vars`.
pub(crate) fn interpolate_univariate(
    field: FieldParams,
    nodes: &[FieldElem],
    values: &[FieldElem],
    num_vars: usize,
    var: usize,
) -> MultiPoly {
    assert_eq!(nodes.len(), values.len());
    let mut acc = MultiPoly::zero(field, num_vars);
    for (j, &v) in values.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        acc = acc.add(&lagrange_basis(field, nodes, j, num_vars, var).scale(v));
    }
    acc
}

/// The unique polynomial with degree <= h in each variable agreeing with
/// `values` on the grid {0..h}^m, by iterated univariate Lagrange
/// interpolation. `values` maps grid coordinates to field elements and must
/// cover the full grid.
pub fn low_degree_extension(
    field: FieldParams,
    values: &std::collections::HashMap<Vec<u64>, FieldElem>,
    h: u64,
    m: usize,
) -> Result<MultiPoly> {
    if field.modulus() < h + 1 {
        return Err(Error::FieldTooSmall { need: h + 1, have: field.modulus() });
    }
    let total = (h + 1).pow(m as u32);
    if values.len() as u64 != total {
        let mut probe = vec![0u64; m];
        loop {
            if !values.contains_key(&probe) {
                return Err(Error::GridIncomplete(probe));
            }
            let mut i = 0;
            loop {
                if i == m {
                    return Err(Error::GridIncomplete(vec![]));
                }
                probe[i] += 1;
                if probe[i] <= h {
                    break;
                }
                probe[i] = 0;
                i += 1;
            }
        }
    }
    let mut prefix = Vec::new();
    lde_rec(field, values, h, m, &mut prefix)
}

fn lde_rec(
    field: FieldParams,
    values: &std::collections::HashMap<Vec<u64>, FieldElem>,
    h: u64,
    m: usize,
    prefix: &mut Vec<u64>,
) -> Result<MultiPoly> {
    let k = prefix.len();
    if k == m {
        let v = *values
            .get(prefix)
            .ok_or_else(|| Error::GridIncomplete(prefix.clone()))?;
        return Ok(MultiPoly::constant(field, 0, v));
    }
    let nodes: Vec<FieldElem> = (0..=h).map(|a| field.elem(a)).collect();
    // interpolate in variable k, treating deeper variables recursively
    let mut acc = MultiPoly::zero(field, m - k);
    for a in 0..nodes.len() {
        prefix.push(a as u64);
        let sub = lde_rec(field, values, h, m, prefix)?; // in m-k-1 vars
        prefix.pop();
        let lifted = lift_front(&sub, 1); // in m-k vars, var 0 is x_k
        let basis = lagrange_basis(field, &nodes, a, m - k, 0);
        acc = acc.add(&lifted.mul(&basis));
    }
    Ok(acc)
}

/// Re-index a polynomial in v vars to v+extra vars, shifting existing
/// variables to the back.
fn lift_front(p: &MultiPoly, extra: usize) -> MultiPoly {
    let mut out = MultiPoly::zero(p.field(), p.num_vars() + extra);
    for (e, c) in p.terms() {
        let mut e2 = vec![0u32; extra];
        e2.extend_from_slice(e);
        out.add_term(e2, *c);
    }
    out
}

/// The variable-substitution map that rewrites a bivariate polynomial of
/// total degree <= d as a multilinear polynomial in m' = 2*ceil(log2(d+1))
/// variables, where the new variables stand for x^(2^i) and y^(2^i).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharpMap {
    pub source_degree: usize,
    pub target_dim: usize,
}

impl SharpMap {
    pub fn bivariate(d: usize) -> Self {
        let t = log2_ceil(d + 1);
        SharpMap { source_degree: d, target_dim: 2 * t }
    }

    pub fn univariate(d: usize) -> Self {
        let t = log2_ceil(d + 1);
        SharpMap { source_degree: d, target_dim: t }
    }
}

pub(crate) fn log2_ceil(n: usize) -> usize {
    let mut t = 0;
    while (1usize << t) < n {
        t += 1;
    }
    t
}

/// Image of a point (x, y) under the substitution map for degree bound d:
/// (x^(2^0), ..., x^(2^(t-1)), y^(2^0), ..., y^(2^(t-1))).
pub fn sharp_apply(d: usize, point: (FieldElem, FieldElem)) -> Vec<FieldElem> {
    let t = log2_ceil(d + 1);
    let mut out = Vec::with_capacity(2 * t);
    for i in 0..t {
        out.push(point.0.pow(1u64 << i));
    }
    for i in 0..t {
        out.push(point.1.pow(1u64 << i));
    }
    out
}

/// Univariate analogue: t |-> (t^(2^0), ..., t^(2^(t-1))).
pub fn sharp_apply_univariate(d: usize, x: FieldElem) -> Vec<FieldElem> {
    let t = log2_ceil(d + 1);
    (0..t).map(|i| x.pow(1u64 << i)).collect()
}

/// Rewrites a bivariate polynomial with degree <= d in each variable as a
/// polynomial with individual degree <= 1 per variable satisfying
/// g'(sharp_apply(d, P)) = g(P).
pub fn substitute_vars(g: &MultiPoly, d: usize) -> Result<MultiPoly> {
    if g.num_vars() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: g.num_vars() });
    }
    let dmax = g.degree_in(0).max(g.degree_in(1));
    if dmax > d {
        return Err(Error::DegreeTooHigh { got: dmax, bound: d });
    }
    let t = log2_ceil(d + 1);
    let mp = 2 * t;
    let mut out = MultiPoly::zero(g.field(), mp);
    for (e, c) in g.terms() {
        let mut expo = vec![0u32; mp];
        for i in 0..t {
            if (e[0] >> i) & 1 == 1 {
                expo[i] = 1;
            }
            if (e[1] >> i) & 1 == 1 {
                expo[t + i] = 1;
            }
        }
        out.add_term(expo, *c);
    }
    Ok(out)
}

/// Univariate analogue of [`substitute_vars`].
pub fn substitute_vars_univariate(g: &MultiPoly, d: usize) -> Result<MultiPoly> {
    if g.num_vars() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: g.num_vars() });
    }
    if g.total_degree() > d {
        return Err(Error::DegreeTooHigh { got: g.total_degree(), bound: d });
    }
    let t = log2_ceil(d + 1);
    let mut out = MultiPoly::zero(g.field(), t);
    for (e, c) in g.terms() {
        let mut expo = vec![0u32; t];
        for i in 0..t {
            if (e[0] >> i) & 1 == 1 {
                expo[i] = 1;
            }
        }
        out.add_term(expo, *c);
    }
    Ok(out)
}

/// Exact zero fraction by full enumeration of F^m (requires q^m <= cap).
pub fn zero_fraction_exhaustive(p: &MultiPoly, cap: u128) -> Result<BigRational> {
    if p.is_zero() {
        return Err(Error::InvariantViolated("zero polynomial".into()));
    }
    let q = p.field().modulus() as u128;
    let total = q.checked_pow(p.num_vars() as u32).ok_or(Error::TooLarge(u128::MAX, cap))?;
    if total > cap {
        return Err(Error::TooLarge(total, cap));
    }
    let mut zeros = 0u128;
    let mut point = vec![p.field().zero(); p.num_vars()];
    let mut idx = vec![0u64; p.num_vars()];
    loop {
        if p.evaluate(&point)?.is_zero() {
            zeros += 1;
        }
        let mut i = 0;
        loop {
            if i == p.num_vars() {
                let z = num::BigInt::from(zeros);
                let t = num::BigInt::from(total);
                return Ok(BigRational::new(z, t));
            }
            idx[i] += 1;
            if idx[i] < p.field().modulus() {
                point[i] = p.field().elem(idx[i]);
                break;
            }
            idx[i] = 0;
            point[i] = p.field().zero();
            i += 1;
        }
    }
}

/// Empirical zero fraction over `trials` uniform points.
pub fn zero_fraction_sampled<R: RngCore>(
    p: &MultiPoly,
    trials: u64,
    rng: &mut R,
) -> Result<BigRational> {
    if p.is_zero() {
        return Err(Error::InvariantViolated("zero polynomial".into()));
    }
    let mut zeros = 0u64;
    for _ in 0..trials {
        let point = p.field().sample_point(p.num_vars(), rng);
        if p.evaluate(&point)?.is_zero() {
            zeros += 1;
        }
    }
    Ok(BigRational::new(zeros.into(), trials.into()))
}

impl std::fmt::Display for MultiPoly {
    /// Canonical listing: one `coeff e1 .. em` clause per term, `;`-joined.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, ";")?;
            }
            first = false;
            write!(f, "{}", c.value())?;
            for x in e {
                write!(f, " {x}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::rng::StreamSeed;
    use std::collections::HashMap;

    #[test]
    fn evaluate_examples() {
        let f7 = make_field(7).unwrap();
        // X^2 + Y at (2,3) = 4 + 3 = 0
        let p = MultiPoly::from_terms(
            f7,
            2,
            [(vec![2, 0], f7.one()), (vec![0, 1], f7.one())],
        )
        .unwrap();
        assert_eq!(p.evaluate(&[f7.elem(2), f7.elem(3)]).unwrap(), f7.zero());
        let z = MultiPoly::zero(f7, 2);
        assert_eq!(z.evaluate(&[f7.elem(5), f7.elem(6)]).unwrap(), f7.zero());
        assert!(p.evaluate(&[f7.elem(1)]).is_err());
    }

    #[test]
    fn evaluate_matches_naive_oracle() {
        let f = make_field(101).unwrap();
        let mut rng = StreamSeed::new(3, "poly-eval").rng();
        for _ in 0..200 {
            let p = MultiPoly::sample(f, 3, 4, &mut rng);
            let point = f.sample_point(3, &mut rng);
            // naive monomial-sum oracle
            let mut want = f.zero();
            for (e, c) in p.terms() {
                let mut t = *c;
                for (i, &exp) in e.iter().enumerate() {
                    for _ in 0..exp {
                        t = t * point[i];
                    }
                }
                want = want + t;
            }
            assert_eq!(p.evaluate(&point).unwrap(), want);
        }
    }

    #[test]
    fn lde_linear_interpolation() {
        let f = make_field(7).unwrap();
        // m=1, h=1, v(0)=a, v(1)=b -> a + (b-a) X
        let a = f.elem(3);
        let b = f.elem(5);
        let mut values = HashMap::new();
        values.insert(vec![0], a);
        values.insert(vec![1], b);
        let p = low_degree_extension(f, &values, 1, 1).unwrap();
        let expect = MultiPoly::from_terms(f, 1, [(vec![0], a), (vec![1], b - a)]).unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn lde_reproduces_low_individual_degree_polys() {
        let f = make_field(11).unwrap();
        let mut rng = StreamSeed::new(8, "poly-lde").rng();
        let h = 2u64;
        let m = 2usize;
        for _ in 0..20 {
            // random poly with individual degrees <= h
            let mut g = MultiPoly::zero(f, m);
            for e0 in 0..=h as u32 {
                for e1 in 0..=h as u32 {
                    g = g.add(
                        &MultiPoly::from_terms(f, m, [(vec![e0, e1], f.sample_uniform(&mut rng))])
                            .unwrap(),
                    );
                }
            }
            let mut values = HashMap::new();
            for a in 0..=h {
                for b in 0..=h {
                    values.insert(vec![a, b], g.evaluate(&[f.elem(a), f.elem(b)]).unwrap());
                }
            }
            let p = low_degree_extension(f, &values, h, m).unwrap();
            assert_eq!(p, g, "uniqueness: coefficient-level agreement");
        }
    }

    #[test]
    fn lde_zero_and_errors() {
        let f = make_field(5).unwrap();
        let mut values = HashMap::new();
        for a in 0..=1 {
            for b in 0..=1 {
                values.insert(vec![a, b], f.zero());
            }
        }
        assert!(low_degree_extension(f, &values, 1, 2).unwrap().is_zero());
        values.remove(&vec![1, 1]);
        assert!(matches!(
            low_degree_extension(f, &values, 1, 2),
            Err(Error::GridIncomplete(_))
        ));
        let f3 = make_field(3).unwrap();
        assert!(matches!(
            low_degree_extension(f3, &HashMap::new(), 4, 1),
            Err(Error::FieldTooSmall { .. })
        ));
    }

    #[test]
    fn lde_degree_bound_per_variable() {
        let f = make_field(7).unwrap();
        let mut rng = StreamSeed::new(9, "poly-lde2").rng();
        let h = 2u64;
        let m = 3usize;
        let mut values = HashMap::new();
        let mut idx = vec![0u64; m];
        loop {
            values.insert(idx.clone(), f.sample_uniform(&mut rng));
            let mut i = 0;
            loop {
                if i == m {
                    let p = low_degree_extension(f, &values, h, m).unwrap();
                    for v in 0..m {
                        assert!(p.degree_in(v) <= h as usize);
                    }
                    for (grid, want) in &values {
                        let pt: Vec<_> = grid.iter().map(|&a| f.elem(a)).collect();
                        assert_eq!(p.evaluate(&pt).unwrap(), *want);
                    }
                    return;
                }
                idx[i] += 1;
                if idx[i] <= h {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn sharp_apply_examples() {
        let f = make_field(101).unwrap();
        // d=3 (t=2): (2,3) -> (2,4,3,9)
        let img = sharp_apply(3, (f.elem(2), f.elem(3)));
        assert_eq!(
            img,
            vec![f.elem(2), f.elem(4), f.elem(3), f.elem(9)]
        );
        // d=1 (t=1): identity
        let img = sharp_apply(1, (f.elem(7), f.elem(9)));
        assert_eq!(img, vec![f.elem(7), f.elem(9)]);
        assert_eq!(SharpMap::bivariate(3).target_dim, 4);
        assert_eq!(SharpMap::univariate(8).target_dim, 4);
    }

    #[test]
    fn substitute_vars_identity() {
        let f = make_field(101).unwrap();
        let mut rng = StreamSeed::new(17, "poly-subst").rng();
        for d in [1usize, 2, 3, 7] {
            for _ in 0..100 {
                let g = MultiPoly::sample(f, 2, d, &mut rng);
                let gp = substitute_vars(&g, d).unwrap();
                for v in 0..gp.num_vars() {
                    assert!(gp.degree_in(v) <= 1);
                }
                for _ in 0..10 {
                    let x = f.sample_uniform(&mut rng);
                    let y = f.sample_uniform(&mut rng);
                    assert_eq!(
                        gp.evaluate(&sharp_apply(d, (x, y))).unwrap(),
                        g.evaluate(&[x, y]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn substitute_vars_structure() {
        let f = make_field(101).unwrap();
        // g = X^3 Y, d=3: decomposes as x~0 * x~1 * y~0
        let g = MultiPoly::from_terms(f, 2, [(vec![3, 1], f.one())]).unwrap();
        let gp = substitute_vars(&g, 3).unwrap();
        assert_eq!(gp.num_terms(), 1);
        let (e, _) = gp.terms().next().unwrap();
        assert_eq!(e, &vec![1, 1, 1, 0]);
        // g = X^2 -> x~1 alone
        let g = MultiPoly::from_terms(f, 2, [(vec![2, 0], f.one())]).unwrap();
        let gp = substitute_vars(&g, 3).unwrap();
        let (e, _) = gp.terms().next().unwrap();
        assert_eq!(e, &vec![0, 1, 0, 0]);
        // constants survive
        let g = MultiPoly::constant(f, 2, f.elem(9));
        assert_eq!(substitute_vars(&g, 3).unwrap(), MultiPoly::constant(f, 4, f.elem(9)));
        // degree guard
        let g = MultiPoly::from_terms(f, 2, [(vec![4, 0], f.one())]).unwrap();
        assert!(substitute_vars(&g, 3).is_err());
    }

    #[test]
    fn zero_fraction_small_cases() {
        let f = make_field(17).unwrap();
        let x = MultiPoly::variable(f, 1, 0);
        let frac = zero_fraction_exhaustive(&x, 1 << 20).unwrap();
        assert_eq!(frac, BigRational::new(1.into(), 17.into()));
        let z = MultiPoly::zero(f, 1);
        assert!(zero_fraction_exhaustive(&z, 1 << 20).is_err());
    }

    #[test]
    fn schwartz_zippel_exhaustive() {
        // product of d distinct linear forms in 1 var hits exactly d/q;
        // random polys stay at or below d/q
        let mut rng = StreamSeed::new(23, "poly-sz").rng();
        for q in [5u64, 17] {
            let f = make_field(q).unwrap();
            for d in 1..=3usize {
                let mut p = MultiPoly::constant(f, 1, f.one());
                for r in 0..d {
                    let x = MultiPoly::variable(f, 1, 0);
                    let root = MultiPoly::constant(f, 1, -f.elem(r as u64));
                    p = p.mul(&x.add(&root));
                }
                let frac = zero_fraction_exhaustive(&p, 1 << 20).unwrap();
                assert_eq!(frac, BigRational::new((d as u64).into(), q.into()));
            }
            for m in 1..=2usize {
                for d in 1..=4usize {
                    let p = loop {
                        let p = MultiPoly::sample(f, m, d, &mut rng);
                        if !p.is_zero() {
                            break p;
                        }
                    };
                    let frac = zero_fraction_exhaustive(&p, 1 << 20).unwrap();
                    let bound = BigRational::new((p.total_degree() as u64).into(), q.into());
                    assert!(frac <= bound, "SZ violated: {frac} > {bound}");
                }
            }
        }
    }
}
