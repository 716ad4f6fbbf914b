//! Affine subspaces of F^m with a canonical representation.
//!
//! The referee and the honest players must agree on one coordinate system
//! per subspace, so every subspace is stored canonicalized: directions in
//! reduced row-echelon form, base point reduced against the pivot columns.
//! Two parameterizations of the same point set canonicalize identically.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldParams};
use crate::polyalg::poly::MultiPoly;
use rand::RngCore;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineSubspace {
    field: FieldParams,
    ambient: usize,
    base: Vec<FieldElem>,
    dirs: Vec<Vec<FieldElem>>,
    pivots: Vec<usize>,
}

/// Result of a raw (z; y_1..y_k) draw.
#[derive(Debug, Clone)]
pub enum SubspaceDraw {
    /// The raw directions were linearly dependent; protocol referees
    /// auto-accept on this event.
    Dependent,
    Independent(AffineSubspace),
}

impl AffineSubspace {
    /// Canonicalizes (base; dirs); errors if the directions are dependent.
    pub fn new(
        field: FieldParams,
        base: Vec<FieldElem>,
        dirs: Vec<Vec<FieldElem>>,
    ) -> Result<Self> {
        let m = base.len();
        for d in &dirs {
            if d.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: d.len() });
            }
        }
        let k = dirs.len();
        let (rows, pivots) = rref(dirs);
        if rows.len() < k {
            return Err(Error::DependentDirections);
        }
        let mut z = base;
        for (i, &p) in pivots.iter().enumerate() {
            let c = z[p];
            if !c.is_zero() {
                for j in 0..m {
                    z[j] = z[j] - c * rows[i][j];
                }
            }
        }
        Ok(AffineSubspace { field, ambient: m, base: z, dirs: rows, pivots })
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn base(&self) -> &[FieldElem] {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<FieldElem>] {
        &self.dirs
    }

    /// The point z + sum_i alpha_i y_i in canonical coordinates.
    pub fn point_at(&self, alpha: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: alpha.len() });
        }
        let mut p = self.base.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for j in 0..self.ambient {
                p[j] = p[j] + a * self.dirs[i][j];
            }
        }
        Ok(p)
    }

    /// Canonical coordinates of a point, or None if it is not in the
    /// subspace. With the base reduced against the pivots, the coordinate
    /// along direction i can be read off the i-th pivot column.
    pub fn coords_of(&self, point: &[FieldElem]) -> Option<Vec<FieldElem>> {
        if point.len() != self.ambient {
            return None;
        }
        let alpha: Vec<FieldElem> = self.pivots.iter().map(|&p| point[p]).collect();
        let back = self.point_at(&alpha).ok()?;
        if back == point {
            Some(alpha)
        } else {
            None
        }
    }

    pub fn contains(&self, point: &[FieldElem]) -> bool {
        self.coords_of(point).is_some()
    }

    /// A uniform point of the subspace.
    pub fn sample_point<R: RngCore>(&self, rng: &mut R) -> (Vec<FieldElem>, Vec<FieldElem>) {
        let alpha = self.field.sample_point(self.dim(), rng);
        let p = self.point_at(&alpha).expect("dimension fixed");
        (p, alpha)
    }
}

/// Reduced row-echelon form; returns (nonzero rows, pivot columns).
fn rref(mut rows: Vec<Vec<FieldElem>>) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    let n = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..m {
        if r == n {
            break;
        }
        let Some(sel) = (r..n).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = rows[r][col].inv().expect("nonzero pivot");
        for j in 0..m {
            rows[r][j] = rows[r][j] * inv;
        }
        for i in 0..n {
            if i != r && !rows[i][col].is_zero() {
                let c = rows[i][col];
                for j in 0..m {
                    rows[i][j] = rows[i][j] - c * rows[r][j];
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Restriction of `p` to the subspace, as a polynomial in the subspace's
/// canonical coordinates. The result agrees pointwise: q(alpha) = p(z + sum
/// alpha_i y_i), and the total degree does not increase.
pub fn restrict_to_subspace(p: &MultiPoly, s: &AffineSubspace) -> Result<MultiPoly> {
    if p.num_vars() != s.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: p.num_vars(), got: s.ambient_dim() });
    }
    let k = s.dim();
    let f = s.field();
    // each ambient coordinate becomes an affine form in the k coordinates
    let forms: Vec<MultiPoly> = (0..s.ambient_dim())
        .map(|j| {
            let mut form = MultiPoly::constant(f, k, s.base()[j]);
            for i in 0..k {
                form = form.add(&MultiPoly::variable(f, k, i).scale(s.directions()[i][j]));
            }
            form
        })
        .collect();
    p.compose(&forms)
}

/// Draw z uniform and k uniform directions; dependent draws are flagged
/// rather than resampled so referees can auto-accept on them.
pub fn sample_subspace<R: RngCore>(
    field: FieldParams,
    m: usize,
    k: usize,
    rng: &mut R,
) -> SubspaceDraw {
    let base = field.sample_point(m, rng);
    let dirs: Vec<Vec<FieldElem>> = (0..k).map(|_| field.sample_point(m, rng)).collect();
    match AffineSubspace::new(field, base, dirs) {
        Ok(s) => SubspaceDraw::Independent(s),
        Err(_) => SubspaceDraw::Dependent,
    }
}

/// All q^k points of the subspace, in coordinate order.
pub fn enumerate_points(s: &AffineSubspace, cap: u128) -> Result<Vec<Vec<FieldElem>>> {
    let q = s.field().modulus() as u128;
    let total = q.pow(s.dim() as u32);
    if total > cap {
        return Err(Error::TooLarge(total, cap));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut alpha = vec![s.field().zero(); s.dim()];
    let mut idx = vec![0u64; s.dim()];
    loop {
        out.push(s.point_at(&alpha)?);
        let mut i = 0;
        loop {
            if i == s.dim() {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < s.field().modulus() {
                alpha[i] = s.field().elem(idx[i]);
                break;
            }
            idx[i] = 0;
            alpha[i] = s.field().zero();
            i += 1;
        }
    }
}

/// Number of k-dimensional affine subspaces of F_q^m:
/// q^(m-k) * prod_{i<k} (q^m - q^i) / (q^k - q^i).
pub fn subspace_count(q: u64, m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let q = q as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= q.pow(m as u32) - q.pow(i as u32);
        den *= q.pow(k as u32) - q.pow(i as u32);
    }
    (num / den) * q.pow((m - k) as u32)
}

/// All k-dimensional affine subspaces of F_q^m, by direct enumeration of
/// canonical forms (RREF pivot patterns x free cells x reduced base points).
pub fn enumerate_subspaces(
    field: FieldParams,
    m: usize,
    k: usize,
    cap: u128,
) -> Result<Vec<AffineSubspace>> {
    let total = subspace_count(field.modulus(), m, k);
    if total > cap {
        return Err(Error::TooLarge(total, cap));
    }
    let mut out = Vec::with_capacity(total as usize);
    for pivots in combinations(m, k) {
        // free cells: row i may have arbitrary entries in non-pivot columns
        // strictly right of its pivot
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for col in p + 1..m {
                if !pivots.contains(&col) {
                    free.push((i, col));
                }
            }
        }
        let q = field.modulus();
        let mut assign = vec![0u64; free.len()];
        loop {
            let mut rows = vec![vec![field.zero(); m]; k];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = field.one();
            }
            for (t, &(i, col)) in free.iter().enumerate() {
                rows[i][col] = field.elem(assign[t]);
            }
            // base points: zero on pivot columns
            let nonpivot: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
            let mut bidx = vec![0u64; nonpivot.len()];
            loop {
                let mut base = vec![field.zero(); m];
                for (t, &c) in nonpivot.iter().enumerate() {
                    base[c] = field.elem(bidx[t]);
                }
                out.push(AffineSubspace {
                    field,
                    ambient: m,
                    base,
                    dirs: rows.clone(),
                    pivots: pivots.clone(),
                });
                if !increment(&mut bidx, q) {
                    break;
                }
            }
            if !increment(&mut assign, q) {
                break;
            }
        }
    }
    debug_assert_eq!(out.len() as u128, total);
    Ok(out)
}

fn increment(digits: &mut [u64], q: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

impl std::fmt::Display for AffineSubspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.base.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        for d in &self.dirs {
            write!(f, "|")?;
            for (i, x) in d.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::rng::StreamSeed;

    #[test]
    fn canonicalization_is_parameterization_invariant() {
        let f = make_field(7).unwrap();
        let mut rng = StreamSeed::new(31, "subspace-canon").rng();
        for _ in 0..200 {
            let s = loop {
                match sample_subspace(f, 4, 2, &mut rng) {
                    SubspaceDraw::Independent(s) => break s,
                    SubspaceDraw::Dependent => continue,
                }
            };
            // reparameterize: new base = point of s, new dirs = random
            // invertible combination of the old ones
            let (p, _) = s.sample_point(&mut rng);
            let (a, b, c, d) = loop {
                let a = f.sample_uniform(&mut rng);
                let b = f.sample_uniform(&mut rng);
                let c = f.sample_uniform(&mut rng);
                let d = f.sample_uniform(&mut rng);
                if !(a * d - b * c).is_zero() {
                    break (a, b, c, d);
                }
            };
            let y1: Vec<_> = (0..4)
                .map(|j| a * s.directions()[0][j] + b * s.directions()[1][j])
                .collect();
            let y2: Vec<_> = (0..4)
                .map(|j| c * s.directions()[0][j] + d * s.directions()[1][j])
                .collect();
            let s2 = AffineSubspace::new(f, p, vec![y1, y2]).unwrap();
            assert_eq!(s, s2);
        }
    }

    #[test]
    fn coords_roundtrip_and_membership() {
        let f = make_field(5).unwrap();
        let s = AffineSubspace::new(
            f,
            vec![f.elem(1), f.elem(2), f.elem(3)],
            vec![
                vec![f.elem(1), f.elem(0), f.elem(2)],
                vec![f.elem(0), f.elem(1), f.elem(4)],
            ],
        )
        .unwrap();
        let alpha = vec![f.elem(2), f.elem(3)];
        let p = s.point_at(&alpha).unwrap();
        assert_eq!(s.coords_of(&p).unwrap(), alpha);
        let outside = vec![f.elem(0), f.elem(0), f.elem(1)];
        if s.contains(&outside) {
            // fine, just exercises the branch
        } else {
            assert!(s.coords_of(&outside).is_none());
        }
    }

    #[test]
    fn dependent_directions_rejected_and_flagged() {
        let f = make_field(5).unwrap();
        let err = AffineSubspace::new(
            f,
            vec![f.zero(), f.zero()],
            vec![vec![f.elem(1), f.elem(2)], vec![f.elem(2), f.elem(4)]],
        );
        assert!(matches!(err, Err(Error::DependentDirections)));
        // forced rng: an all-zero stream draws zero directions
        struct ZeroRng;
        impl RngCore for ZeroRng {
            fn next_u32(&mut self) -> u32 {
                0
            }
            fn next_u64(&mut self) -> u64 {
                0
            }
            fn fill_bytes(&mut self, dest: &mut [u8]) {
                dest.fill(0)
            }
            fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
                dest.fill(0);
                Ok(())
            }
        }
        assert!(matches!(sample_subspace(f, 2, 2, &mut ZeroRng), SubspaceDraw::Dependent));
    }

    #[test]
    fn enumerate_counts() {
        let f = make_field(5).unwrap();
        // m=2, k=2: the whole plane, 25 points
        let s = AffineSubspace::new(
            f,
            vec![f.zero(), f.zero()],
            vec![vec![f.one(), f.zero()], vec![f.zero(), f.one()]],
        )
        .unwrap();
        assert_eq!(enumerate_points(&s, 1 << 20).unwrap().len(), 25);
        // lines in F_3^2: 12 of them
        let f3 = make_field(3).unwrap();
        let lines = enumerate_subspaces(f3, 2, 1, 1 << 20).unwrap();
        assert_eq!(lines.len(), 12);
        assert_eq!(subspace_count(3, 2, 1), 12);
        assert_eq!(subspace_count(5, 2, 2), 1);
        // planes of F_5^4
        assert_eq!(
            enumerate_subspaces(f, 4, 2, 1 << 20).unwrap().len() as u128,
            subspace_count(5, 4, 2)
        );
    }

    #[test]
    fn sampled_lines_uniform_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let f = make_field(3).unwrap();
        let lines = enumerate_subspaces(f, 2, 1, 1 << 20).unwrap();
        let mut counts = std::collections::HashMap::new();
        let mut rng = StreamSeed::new(77, "subspace-chi2").rng();
        let mut n = 0usize;
        for _ in 0..100_000 {
            if let SubspaceDraw::Independent(s) = sample_subspace(f, 2, 1, &mut rng) {
                *counts.entry(format!("{s}")).or_insert(0usize) += 1;
                n += 1;
            }
        }
        assert_eq!(counts.len(), lines.len());
        let expected = n as f64 / lines.len() as f64;
        let stat: f64 = counts
            .values()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let p = 1.0 - ChiSquared::new(lines.len() as f64 - 1.0).unwrap().cdf(stat);
        assert!(p > 0.001, "stat {stat}, p {p}");
    }

    #[test]
    fn restriction_examples() {
        let f = make_field(7).unwrap();
        // p = X1 + X2 on the line (0,0) + t(1,1) -> 2T
        let p = MultiPoly::from_terms(
            f,
            2,
            [(vec![1, 0], f.one()), (vec![0, 1], f.one())],
        )
        .unwrap();
        let line = AffineSubspace::new(
            f,
            vec![f.zero(), f.zero()],
            vec![vec![f.one(), f.one()]],
        )
        .unwrap();
        let q = restrict_to_subspace(&p, &line).unwrap();
        let want = MultiPoly::from_terms(f, 1, [(vec![1], f.elem(2))]).unwrap();
        assert_eq!(q, want);
        // constants restrict to themselves
        let c = MultiPoly::constant(f, 2, f.elem(5));
        assert_eq!(restrict_to_subspace(&c, &line).unwrap(), MultiPoly::constant(f, 1, f.elem(5)));
    }

    #[test]
    fn restriction_pointwise_random() {
        let f = make_field(11).unwrap();
        let mut rng = StreamSeed::new(13, "subspace-restrict").rng();
        for _ in 0..100 {
            let p = MultiPoly::sample(f, 3, 3, &mut rng);
            let s = loop {
                match sample_subspace(f, 3, 2, &mut rng) {
                    SubspaceDraw::Independent(s) => break s,
                    _ => continue,
                }
            };
            let q = restrict_to_subspace(&p, &s).unwrap();
            assert!(q.total_degree() <= p.total_degree());
            for _ in 0..20 {
                let alpha = f.sample_point(2, &mut rng);
                let lifted = s.point_at(&alpha).unwrap();
                assert_eq!(q.evaluate(&alpha).unwrap(), p.evaluate(&lifted).unwrap());
            }
        }
    }
}
