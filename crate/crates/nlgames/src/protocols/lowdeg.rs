//! The plane-vs-point low-degree test: one player returns the restriction
//! of a degree-d polynomial to a random plane, another its value at a
//! random point of that plane; accept iff they agree (auto-accept when the
//! plane directions come out dependent).

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldParams};
use crate::gamecore::{EnumerableReferee, PlayerStrategy, Referee, Round, Weight};
use crate::polyalg::{
    enumerate_points, enumerate_subspaces, restrict_to_subspace, AffineSubspace, MultiPoly,
};
use crate::protocols::{
    all_player_tuples, dependence_probability, independence_probability, pick_players, ratio,
};
use rand_chacha::ChaCha8Rng;

/// Parameters of the low-degree test. Soundness analyses need r >= 3 and a
/// large field; neither is enforced for sampling, but `soundness_ready`
/// reports whether the r requirement holds and `field_margin` reports
/// q / (d m / eps) for a requested eps (the universal exponents are
/// unknown, so this is informational only).
#[derive(Debug, Clone, Copy)]
pub struct LowDegreeParams {
    pub d: usize,
    pub m: usize,
    pub r: usize,
    pub field: FieldParams,
}

impl LowDegreeParams {
    pub fn new(d: usize, m: usize, r: usize, field: FieldParams) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGame("low-degree test needs m >= 2".into()));
        }
        if r < 2 {
            return Err(Error::InvalidGame("need at least 2 players".into()));
        }
        if d < 1 {
            return Err(Error::InvalidGame("degree must be positive".into()));
        }
        Ok(LowDegreeParams { d, m, r, field })
    }

    pub fn soundness_ready(&self) -> bool {
        self.r >= 3
    }

    pub fn field_margin(&self, eps: f64) -> f64 {
        self.field.modulus() as f64 / ((self.d * self.m) as f64 / eps)
    }

    /// Two-level derived parameters: d' = m' = 2 ceil(log2(d+1)).
    pub fn two_level_dim(&self) -> usize {
        crate::polyalg::SharpMap::bivariate(self.d).target_dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LdQuestion {
    Plane(AffineSubspace),
    Point(Vec<FieldElem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LdAnswer {
    /// Bivariate polynomial in the plane's canonical coordinates.
    Poly(MultiPoly),
    Value(FieldElem),
}

impl std::fmt::Display for LdQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LdQuestion::Plane(s) => write!(f, "s{s}"),
            LdQuestion::Point(p) => {
                write!(f, "x(")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl std::fmt::Display for LdAnswer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LdAnswer::Poly(p) => write!(f, "g[{p}]"),
            LdAnswer::Value(v) => write!(f, "{v}"),
        }
    }
}

pub struct LowDegreeTest {
    pub params: LowDegreeParams,
}

impl LowDegreeTest {
    pub fn new(params: LowDegreeParams) -> Self {
        LowDegreeTest { params }
    }
}

impl Referee for LowDegreeTest {
    type Question = LdQuestion;
    type Answer = LdAnswer;
    type Aux = ();

    fn players(&self) -> usize {
        self.params.r
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<LdQuestion, ()> {
        let f = self.params.field;
        let m = self.params.m;
        let x = f.sample_point(m, rng);
        let y1 = f.sample_point(m, rng);
        let y2 = f.sample_point(m, rng);
        let s = match AffineSubspace::new(f, x.clone(), vec![y1, y2]) {
            Ok(s) => s,
            Err(_) => return Round::auto(()),
        };
        let players = pick_players(self.params.r, 2, rng);
        Round {
            auto_accept: false,
            queries: vec![
                (players[0], LdQuestion::Plane(s)),
                (players[1], LdQuestion::Point(x)),
            ],
            aux: (),
        }
    }

    fn accepts(&self, round: &Round<LdQuestion, ()>, answers: &[LdAnswer]) -> bool {
        let (LdQuestion::Plane(s), LdQuestion::Point(x)) =
            (&round.queries[0].1, &round.queries[1].1)
        else {
            return false;
        };
        // over-degree or ill-shaped polynomial answers are malformed: reject
        let LdAnswer::Poly(g) = &answers[0] else { return false };
        let LdAnswer::Value(a) = &answers[1] else { return false };
        if g.num_vars() != 2 || g.total_degree() > self.params.d {
            return false;
        }
        let Some(coords) = s.coords_of(x) else { return false };
        match g.evaluate(&coords) {
            Ok(v) => v == *a,
            Err(_) => false,
        }
    }
}

impl EnumerableReferee for LowDegreeTest {
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<LdQuestion, ()>)>> {
        let f = self.params.field;
        let q = f.modulus() as u128;
        let m = self.params.m;
        let planes = crate::polyalg::subspace_count(f.modulus(), m, 2);
        let pairs = (self.params.r * (self.params.r - 1)) as u128;
        let total = planes * q * q * pairs + 1;
        if total > cap {
            return Err(Error::TooLarge(total, cap));
        }
        let mut out = Vec::with_capacity(total as usize);
        let p_dep = dependence_probability(f, m, 2);
        if !crate::protocols::is_zero_weight(&p_dep) {
            out.push((p_dep, Round::auto(())));
        }
        let p_indep = independence_probability(f, m, 2);
        let per = p_indep / ratio(planes * q * q * pairs, 1);
        for s in enumerate_subspaces(f, m, 2, cap)? {
            for x in enumerate_points(&s, cap)? {
                for players in all_player_tuples(self.params.r, 2) {
                    out.push((
                        per.clone(),
                        Round {
                            auto_accept: false,
                            queries: vec![
                                (players[0], LdQuestion::Plane(s.clone())),
                                (players[1], LdQuestion::Point(x.clone())),
                            ],
                            aux: (),
                        },
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Answers every question according to one global polynomial of degree <= d.
pub struct HonestLowDegree {
    global: MultiPoly,
}

impl HonestLowDegree {
    pub fn new(global: MultiPoly, d: usize) -> Result<Self> {
        if global.total_degree() > d {
            return Err(Error::DegreeTooHigh { got: global.total_degree(), bound: d });
        }
        Ok(HonestLowDegree { global })
    }
}

impl PlayerStrategy<LdQuestion, LdAnswer> for HonestLowDegree {
    fn answer(&self, _player: usize, q: &LdQuestion) -> LdAnswer {
        match q {
            LdQuestion::Plane(s) => {
                LdAnswer::Poly(restrict_to_subspace(&self.global, s).expect("ambient match"))
            }
            LdQuestion::Point(x) => {
                LdAnswer::Value(self.global.evaluate(x).expect("dimension match"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::gamecore::{exhaustive_value, monte_carlo, FnStrategy};
    use crate::rng::StreamSeed;
    use num::{One, Zero};

    fn params(q: u64, m: usize, d: usize, r: usize) -> LowDegreeParams {
        LowDegreeParams::new(d, m, r, make_field(q).unwrap()).unwrap()
    }

    #[test]
    fn honest_passes_exhaustively_q5_m2_d2() {
        let p = params(5, 2, 2, 2);
        let test = LowDegreeTest::new(p);
        let mut rng = StreamSeed::new(1, "ld-honest").rng();
        for _ in 0..5 {
            let g = MultiPoly::sample(p.field, 2, 2, &mut rng);
            let honest = HonestLowDegree::new(g, 2).unwrap();
            let v = exhaustive_value(&test, &honest, 1 << 20).unwrap();
            assert!(v.is_one(), "honest acceptance {v}");
        }
        // zero polynomial too
        let honest = HonestLowDegree::new(MultiPoly::zero(p.field, 2), 2).unwrap();
        assert!(exhaustive_value(&test, &honest, 1 << 20).unwrap().is_one());
    }

    #[test]
    fn weights_sum_to_one_and_auto_accept_flagged() {
        let p = params(3, 2, 1, 3);
        let test = LowDegreeTest::new(p);
        let rounds = test.enumerate_rounds(1 << 20).unwrap();
        let total: Weight = rounds.iter().map(|(w, _)| w.clone()).sum();
        assert!(total.is_one());
        assert!(rounds.iter().any(|(_, r)| r.auto_accept));
    }

    #[test]
    fn wrong_value_and_overdegree_rejected() {
        let p = params(5, 2, 2, 2);
        let test = LowDegreeTest::new(p);
        let mut rng = StreamSeed::new(2, "ld-reject").rng();
        let g = MultiPoly::sample(p.field, 2, 2, &mut rng);
        let honest = HonestLowDegree::new(g.clone(), 2).unwrap();
        // a = g(x) + 1 must always reject
        let off_by_one = FnStrategy(|pl: usize, q: &LdQuestion| match q {
            LdQuestion::Point(_) => {
                let LdAnswer::Value(v) = honest.answer(pl, q) else { unreachable!() };
                LdAnswer::Value(v + v.field().one())
            }
            _ => honest.answer(pl, q),
        });
        let v = exhaustive_value(&test, &off_by_one, 1 << 20).unwrap();
        // only the auto-accept mass survives
        assert_eq!(v, dependence_probability(p.field, 2, 2));
        // an over-degree plane answer is malformed and loses
        let overdeg = FnStrategy(|pl: usize, q: &LdQuestion| match q {
            LdQuestion::Plane(_) => {
                let cube = MultiPoly::from_terms(
                    p.field,
                    2,
                    [(vec![3, 0], p.field.one())],
                )
                .unwrap();
                LdAnswer::Poly(cube)
            }
            _ => honest.answer(pl, q),
        });
        let v = exhaustive_value(&test, &overdeg, 1 << 20).unwrap();
        assert_eq!(v, dependence_probability(p.field, 2, 2));
    }

    #[test]
    fn corrupting_one_point_loses_exactly_its_weight() {
        let p = params(5, 2, 2, 2);
        let test = LowDegreeTest::new(p);
        let f = p.field;
        let g = MultiPoly::variable(f, 2, 0);
        let honest = HonestLowDegree::new(g.clone(), 2).unwrap();
        let target: Vec<FieldElem> = vec![f.elem(1), f.elem(2)];
        let corrupted = FnStrategy(|pl: usize, q: &LdQuestion| match q {
            LdQuestion::Point(x) if *x == target => {
                LdAnswer::Value(g.evaluate(x).unwrap() + f.one())
            }
            _ => honest.answer(pl, q),
        });
        let v = exhaustive_value(&test, &corrupted, 1 << 20).unwrap();
        // the point marginal is uniform over F^m within the non-auto mass
        let q2 = f.modulus() as u128;
        let expected = Weight::one()
            - independence_probability(f, 2, 2) * ratio(1, q2 * q2);
        assert_eq!(v, expected);
    }

    #[test]
    fn point_marginal_uniform_and_membership() {
        // exhaustive m=2, q=5: each point appears with equal weight, and
        // the point always lies in the plane
        let p = params(5, 2, 2, 2);
        let test = LowDegreeTest::new(p);
        let mut weights = std::collections::HashMap::new();
        for (w, round) in test.enumerate_rounds(1 << 20).unwrap() {
            if round.auto_accept {
                continue;
            }
            let (LdQuestion::Plane(s), LdQuestion::Point(x)) =
                (&round.queries[0].1, &round.queries[1].1)
            else {
                panic!()
            };
            assert!(s.contains(x));
            *weights.entry(format!("{x:?}")).or_insert(Weight::zero()) += w;
        }
        let vals: Vec<&Weight> = weights.values().collect();
        assert_eq!(weights.len(), 25);
        assert!(vals.iter().all(|w| *w == vals[0]));
    }

    #[test]
    fn sampler_matches_honest_completeness() {
        let p = params(5, 3, 2, 3);
        let test = LowDegreeTest::new(p);
        let mut rng = StreamSeed::new(3, "ld-mc").rng();
        let g = MultiPoly::sample(p.field, 3, 2, &mut rng);
        let honest = HonestLowDegree::new(g, 2).unwrap();
        let seed = StreamSeed::new(4, "ld-mc-run");
        let rep = monte_carlo(&test, &honest, 20_000, &seed);
        assert_eq!(rep.accepted, rep.rounds);
    }
}
