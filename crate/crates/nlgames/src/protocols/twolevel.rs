//! The two-level low-degree test: the plane answer is re-encoded through
//! variable substitution so that answers shrink from (d+1)^2 to (d'+1)^2
//! coefficients, at the price of a second test level over F^{m'}.
//!
//! The second player's question is the pair (s, #x) in both sub-tests, with
//! x uniform on s, so the two sub-tests are indistinguishable to that
//! player by construction.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldParams};
use crate::gamecore::{EnumerableReferee, PlayerStrategy, Referee, Round, Weight};
use crate::polyalg::{
    enumerate_subspaces, restrict_to_subspace, sharp_apply, substitute_vars, AffineSubspace,
    MultiPoly, SharpMap,
};
use crate::protocols::{
    all_player_tuples, dependence_probability, independence_probability, pick_players, ratio,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct TwoLevelParams {
    pub d: usize,
    pub m: usize,
    pub r: usize,
    pub field: FieldParams,
}

impl TwoLevelParams {
    pub fn new(d: usize, m: usize, r: usize, field: FieldParams) -> Result<Self> {
        if m < 2 || r < 2 || d < 1 {
            return Err(Error::InvalidGame("two-level test needs m >= 2, r >= 2, d >= 1".into()));
        }
        Ok(TwoLevelParams { d, m, r, field })
    }

    /// d' = m' = 2 ceil(log2(d+1)).
    pub fn inner_dim(&self) -> usize {
        SharpMap::bivariate(self.d).target_dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TlQuestion {
    /// A point of F^m.
    Point(Vec<FieldElem>),
    /// A plane of F^m together with a substituted point of F^{m'}.
    PlanePoint(AffineSubspace, Vec<FieldElem>),
    /// A plane of F^m together with a plane of F^{m'}.
    PlanePlane(AffineSubspace, AffineSubspace),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TlAnswer {
    Value(FieldElem),
    /// Bivariate polynomial of degree <= d' on the inner plane.
    Poly(MultiPoly),
}

impl std::fmt::Display for TlQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_pt = |f: &mut std::fmt::Formatter<'_>, p: &[FieldElem]| -> std::fmt::Result {
            write!(f, "(")?;
            for (i, x) in p.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            TlQuestion::Point(p) => {
                write!(f, "x")?;
                fmt_pt(f, p)
            }
            TlQuestion::PlanePoint(s, p) => {
                write!(f, "s{s}#")?;
                fmt_pt(f, p)
            }
            TlQuestion::PlanePlane(s, sp) => write!(f, "s{s}s'{sp}"),
        }
    }
}

impl std::fmt::Display for TlAnswer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TlAnswer::Value(v) => write!(f, "{v}"),
            TlAnswer::Poly(p) => write!(f, "g[{p}]"),
        }
    }
}

pub struct TwoLevelTest {
    pub params: TwoLevelParams,
}

impl TwoLevelTest {
    pub fn new(params: TwoLevelParams) -> Self {
        TwoLevelTest { params }
    }

    fn sharp(&self, alpha: &[FieldElem]) -> Vec<FieldElem> {
        sharp_apply(self.params.d, (alpha[0], alpha[1]))
    }
}

impl Referee for TwoLevelTest {
    type Question = TlQuestion;
    type Answer = TlAnswer;
    type Aux = ();

    fn players(&self) -> usize {
        self.params.r
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<TlQuestion, ()> {
        let f = self.params.field;
        let m = self.params.m;
        let x = f.sample_point(m, rng);
        let y1 = f.sample_point(m, rng);
        let y2 = f.sample_point(m, rng);
        let Ok(s) = AffineSubspace::new(f, x, vec![y1, y2]) else {
            return Round::auto(());
        };
        // the second player's question: x~ uniform on s, sent as (s, #x~)
        let alpha = f.sample_point(2, rng);
        let point = s.point_at(&alpha).expect("plane has dim 2");
        let sharp_pt = self.sharp(&alpha);
        let players = pick_players(self.params.r, 2, rng);
        if rng.gen_bool(0.5) {
            // consistency sub-test: the first player sees the raw point
            Round {
                auto_accept: false,
                queries: vec![
                    (players[0], TlQuestion::Point(point)),
                    (players[1], TlQuestion::PlanePoint(s, sharp_pt)),
                ],
                aux: (),
            }
        } else {
            // inner-evaluation sub-test: a random inner plane through #x~
            let mp = self.params.inner_dim();
            let y1p = f.sample_point(mp, rng);
            let y2p = f.sample_point(mp, rng);
            let Ok(sp) = AffineSubspace::new(f, sharp_pt.clone(), vec![y1p, y2p]) else {
                return Round::auto(());
            };
            Round {
                auto_accept: false,
                queries: vec![
                    (players[0], TlQuestion::PlanePlane(s.clone(), sp)),
                    (players[1], TlQuestion::PlanePoint(s, sharp_pt)),
                ],
                aux: (),
            }
        }
    }

    fn accepts(&self, round: &Round<TlQuestion, ()>, answers: &[TlAnswer]) -> bool {
        match (&round.queries[0].1, &round.queries[1].1) {
            (TlQuestion::Point(_), TlQuestion::PlanePoint(..)) => {
                let (TlAnswer::Value(a), TlAnswer::Value(ap)) = (&answers[0], &answers[1]) else {
                    return false;
                };
                a == ap
            }
            (TlQuestion::PlanePlane(_, sp), TlQuestion::PlanePoint(_, pt)) => {
                let (TlAnswer::Poly(g), TlAnswer::Value(ap)) = (&answers[0], &answers[1]) else {
                    return false;
                };
                if g.num_vars() != 2 || g.total_degree() > self.params.inner_dim() {
                    return false;
                }
                let Some(coords) = sp.coords_of(pt) else { return false };
                match g.evaluate(&coords) {
                    Ok(v) => v == *ap,
                    Err(_) => false,
                }
            }
            _ => false,
        }
    }
}

impl EnumerableReferee for TwoLevelTest {
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<TlQuestion, ()>)>> {
        let f = self.params.field;
        let q = f.modulus() as u128;
        let m = self.params.m;
        let mp = self.params.inner_dim();
        let planes = crate::polyalg::subspace_count(f.modulus(), m, 2);
        let inner_through = crate::polyalg::subspace_count(f.modulus(), mp, 2) / q.pow((mp - 2) as u32);
        let pairs = (self.params.r * (self.params.r - 1)) as u128;
        let total = planes * q * q * pairs * (1 + inner_through) + 2;
        if total > cap {
            return Err(Error::TooLarge(total, cap));
        }

        let p_outer_dep = dependence_probability(f, m, 2);
        let p_outer = independence_probability(f, m, 2);
        let p_inner_dep = dependence_probability(f, mp, 2);
        let p_inner = independence_probability(f, mp, 2);

        let mut out = Vec::new();
        let auto_mass = p_outer_dep + p_outer.clone() * ratio(1, 2) * p_inner_dep;
        if !crate::protocols::is_zero_weight(&auto_mass) {
            out.push((auto_mass, Round::auto(())));
        }

        let base = p_outer / ratio(planes * q * q * pairs, 1);
        let all_inner = enumerate_subspaces(f, mp, 2, cap)?;
        for s in enumerate_subspaces(f, m, 2, cap)? {
            for a0 in 0..f.modulus() {
                for a1 in 0..f.modulus() {
                    let alpha = vec![f.elem(a0), f.elem(a1)];
                    let point = s.point_at(&alpha)?;
                    let sharp_pt = self.sharp(&alpha);
                    for players in all_player_tuples(self.params.r, 2) {
                        // sub-test 1
                        out.push((
                            base.clone() * ratio(1, 2),
                            Round {
                                auto_accept: false,
                                queries: vec![
                                    (players[0], TlQuestion::Point(point.clone())),
                                    (
                                        players[1],
                                        TlQuestion::PlanePoint(s.clone(), sharp_pt.clone()),
                                    ),
                                ],
                                aux: (),
                            },
                        ));
                        // sub-test 2: inner planes through the sharp point
                        let w2 = base.clone() * ratio(1, 2) * p_inner.clone()
                            / ratio(inner_through, 1);
                        for sp in all_inner.iter().filter(|sp| sp.contains(&sharp_pt)) {
                            out.push((
                                w2.clone(),
                                Round {
                                    auto_accept: false,
                                    queries: vec![
                                        (
                                            players[0],
                                            TlQuestion::PlanePlane(s.clone(), sp.clone()),
                                        ),
                                        (
                                            players[1],
                                            TlQuestion::PlanePoint(s.clone(), sharp_pt.clone()),
                                        ),
                                    ],
                                    aux: (),
                                },
                            ));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Honest strategy: all answers derive from one global polynomial of total
/// degree <= d via restriction and variable substitution.
pub struct HonestTwoLevel {
    global: MultiPoly,
    d: usize,
}

impl HonestTwoLevel {
    pub fn new(global: MultiPoly, d: usize) -> Result<Self> {
        if global.total_degree() > d {
            return Err(Error::DegreeTooHigh { got: global.total_degree(), bound: d });
        }
        Ok(HonestTwoLevel { global, d })
    }

    /// The substituted plane polynomial g'_s over F^{m'}.
    fn substituted(&self, s: &AffineSubspace) -> MultiPoly {
        let g_s = restrict_to_subspace(&self.global, s).expect("ambient match");
        substitute_vars(&g_s, self.d).expect("degree bound holds")
    }
}

impl PlayerStrategy<TlQuestion, TlAnswer> for HonestTwoLevel {
    fn answer(&self, _player: usize, q: &TlQuestion) -> TlAnswer {
        match q {
            TlQuestion::Point(x) => TlAnswer::Value(self.global.evaluate(x).expect("dims")),
            TlQuestion::PlanePoint(s, pt) => {
                TlAnswer::Value(self.substituted(s).evaluate(pt).expect("dims"))
            }
            TlQuestion::PlanePlane(s, sp) => {
                TlAnswer::Poly(restrict_to_subspace(&self.substituted(s), sp).expect("dims"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::gamecore::{exhaustive_value, FnStrategy};
    use crate::rng::StreamSeed;
    use num::One;
    use std::collections::HashMap;

    fn test_q5_d1() -> TwoLevelTest {
        TwoLevelTest::new(TwoLevelParams::new(1, 2, 2, make_field(5).unwrap()).unwrap())
    }

    #[test]
    fn honest_passes_exhaustively_q5_d1() {
        let t = test_q5_d1();
        let mut rng = StreamSeed::new(11, "tl-honest").rng();
        for _ in 0..5 {
            let g = MultiPoly::sample(t.params.field, 2, 1, &mut rng);
            let honest = HonestTwoLevel::new(g, 1).unwrap();
            let v = exhaustive_value(&t, &honest, 1 << 22).unwrap();
            assert!(v.is_one(), "honest acceptance {v}");
        }
    }

    #[test]
    fn mismatched_values_rejected() {
        let t = test_q5_d1();
        let f = t.params.field;
        let g = MultiPoly::variable(f, 2, 0);
        let honest = HonestTwoLevel::new(g, 1).unwrap();
        // shift every raw point answer: sub-test 1 must reject whenever run
        let shifted = FnStrategy(|pl: usize, q: &TlQuestion| match q {
            TlQuestion::Point(_) => {
                let TlAnswer::Value(v) = honest.answer(pl, q) else { unreachable!() };
                TlAnswer::Value(v + f.one())
            }
            _ => honest.answer(pl, q),
        });
        let v = exhaustive_value(&t, &shifted, 1 << 22).unwrap();
        // auto mass + the whole sub-test-2 mass survives
        let survive = Weight::one()
            - independence_probability(f, 2, 2) * ratio(1, 2);
        assert_eq!(v, survive);
    }

    #[test]
    fn second_player_marginal_identical_across_subtests() {
        let t = test_q5_d1();
        let mut m1: HashMap<String, Weight> = HashMap::new();
        let mut m2: HashMap<String, Weight> = HashMap::new();
        use num::Zero;
        let mut w1 = Weight::zero();
        let mut w2 = Weight::zero();
        for (w, round) in t.enumerate_rounds(1 << 22).unwrap() {
            if round.auto_accept {
                continue;
            }
            let key = format!("{}", round.queries[1].1);
            match round.queries[0].1 {
                TlQuestion::Point(_) => {
                    *m1.entry(key).or_insert_with(Weight::zero) += w.clone();
                    w1 += w;
                }
                TlQuestion::PlanePlane(..) => {
                    *m2.entry(key).or_insert_with(Weight::zero) += w.clone();
                    w2 += w;
                }
                _ => panic!("unexpected first-player question"),
            }
        }
        // normalize by sub-test mass and compare
        assert_eq!(m1.len(), m2.len());
        for (k, v1) in &m1 {
            let v2 = m2.get(k).expect("same support");
            assert_eq!(v1.clone() / w1.clone(), v2.clone() / w2.clone(), "marginal at {k}");
        }
    }

    #[test]
    fn dependent_draws_auto_accept() {
        // forced rng drawing all zeros gives dependent directions
        let t = test_q5_d1();
        let rounds = t.enumerate_rounds(1 << 22).unwrap();
        let auto: Weight = rounds
            .iter()
            .filter(|(_, r)| r.auto_accept)
            .map(|(w, _)| w.clone())
            .sum();
        let expect = dependence_probability(t.params.field, 2, 2)
            + independence_probability(t.params.field, 2, 2)
                * ratio(1, 2)
                * dependence_probability(t.params.field, 2, 2);
        assert_eq!(auto, expect);
    }
}
