//! Degree-4 curves: the query geometry that aggregates a few points of F^m
//! into one univariate restriction.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldParams};
use crate::polyalg::poly::{interpolate_univariate, MultiPoly};

/// A curve in F^m given by m univariate coordinate polynomials of degree <= 4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve4 {
    field: FieldParams,
    coords: Vec<MultiPoly>,
}

/// The fixed interpolation parameters for a curve through four points.
pub const CURVE_NODES: [u64; 4] = [0, 1, 2, 3];

impl Curve4 {
    pub fn new(field: FieldParams, coords: Vec<MultiPoly>) -> Result<Self> {
        for c in &coords {
            if c.num_vars() != 1 {
                return Err(Error::DimensionMismatch { expected: 1, got: c.num_vars() });
            }
            if c.total_degree() > 4 {
                return Err(Error::DegreeTooHigh { got: c.total_degree(), bound: 4 });
            }
        }
        Ok(Curve4 { field, coords })
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[MultiPoly] {
        &self.coords
    }

    pub fn evaluate(&self, t: FieldElem) -> Vec<FieldElem> {
        self.coords
            .iter()
            .map(|c| c.evaluate(&[t]).expect("univariate"))
            .collect()
    }
}

/// The curve through four points at parameters t = 0, 1, 2, 3 (coordinates
/// interpolated independently, degree <= 3 each). Coincident points are fine:
/// the parameters stay distinct.
pub fn curve_through(points: &[Vec<FieldElem>]) -> Result<Curve4> {
    if points.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: points.len() });
    }
    let m = points[0].len();
    for p in points {
        if p.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: p.len() });
        }
    }
    let field = points[0][0].field();
    if field.modulus() < 4 {
        return Err(Error::FieldTooSmall { need: 4, have: field.modulus() });
    }
    let nodes: Vec<FieldElem> = CURVE_NODES.iter().map(|&t| field.elem(t)).collect();
    let coords = (0..m)
        .map(|j| {
            let values: Vec<FieldElem> = points.iter().map(|p| p[j]).collect();
            interpolate_univariate(field, &nodes, &values, 1, 0)
        })
        .collect();
    Curve4::new(field, coords)
}

/// The univariate polynomial t -> p(c(t)); degree <= 4 * deg(p).
pub fn restrict_to_curve(p: &MultiPoly, c: &Curve4) -> Result<MultiPoly> {
    if p.num_vars() != c.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: p.num_vars(), got: c.ambient_dim() });
    }
    let out = p.compose(c.coords())?;
    debug_assert!(out.total_degree() <= 4 * p.total_degree());
    Ok(out)
}

impl std::fmt::Display for Curve4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "c(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::rng::StreamSeed;

    #[test]
    fn interpolates_its_points() {
        let f = make_field(101).unwrap();
        let mut rng = StreamSeed::new(41, "curve").rng();
        for _ in 0..100 {
            let pts: Vec<Vec<FieldElem>> = (0..4).map(|_| f.sample_point(3, &mut rng)).collect();
            let c = curve_through(&pts).unwrap();
            for (i, t) in CURVE_NODES.iter().enumerate() {
                assert_eq!(c.evaluate(f.elem(*t)), pts[i]);
            }
        }
    }

    #[test]
    fn constant_curve_through_equal_points() {
        let f = make_field(7).unwrap();
        let p = vec![f.elem(2), f.elem(5)];
        let c = curve_through(&[p.clone(), p.clone(), p.clone(), p.clone()]).unwrap();
        for t in 0..7 {
            assert_eq!(c.evaluate(f.elem(t)), p);
        }
        assert!(c.coords().iter().all(|q| q.total_degree() == 0));
    }

    #[test]
    fn field_too_small() {
        let f = make_field(3).unwrap();
        let p = vec![f.elem(0)];
        assert!(matches!(
            curve_through(&[p.clone(), p.clone(), p.clone(), p]),
            Err(Error::FieldTooSmall { .. })
        ));
    }

    #[test]
    fn restriction_degree_and_agreement() {
        let f = make_field(101).unwrap();
        let mut rng = StreamSeed::new(43, "curve-restrict").rng();
        for _ in 0..50 {
            let p = MultiPoly::sample(f, 2, 3, &mut rng);
            let pts: Vec<Vec<FieldElem>> = (0..4).map(|_| f.sample_point(2, &mut rng)).collect();
            let c = curve_through(&pts).unwrap();
            let r = restrict_to_curve(&p, &c).unwrap();
            assert!(r.total_degree() <= 4 * p.total_degree());
            for _ in 0..100 {
                let t = f.sample_uniform(&mut rng);
                assert_eq!(r.evaluate(&[t]).unwrap(), p.evaluate(&c.evaluate(t)).unwrap());
            }
        }
        // linear p on a curve with affine coordinates stays degree <= 1
        let p = MultiPoly::from_terms(f, 2, [(vec![1, 0], f.one()), (vec![0, 1], f.elem(3))])
            .unwrap();
        let a = f.sample_point(2, &mut rng);
        let step: Vec<FieldElem> = f.sample_point(2, &mut rng);
        let pts: Vec<Vec<FieldElem>> = (0..4u64)
            .map(|i| {
                (0..2)
                    .map(|j| a[j] + f.elem(i) * step[j])
                    .collect()
            })
            .collect();
        let c = curve_through(&pts).unwrap();
        assert!(c.coords().iter().all(|q| q.total_degree() <= 1));
        assert!(restrict_to_curve(&p, &c).unwrap().total_degree() <= 1);
    }
}
