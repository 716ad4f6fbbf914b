//! The 3-SAT test: with probability 1/2 the two-level low-degree test on
//! the assignment polynomial, else a clause check through a degree-4 curve
//! and its substituted re-encoding.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldParams};
use crate::gamecore::{EnumerableReferee, PlayerStrategy, Referee, Round, Weight};
use crate::polyalg::{
    curve_through, low_degree_extension, restrict_to_curve, sharp_apply_univariate,
    substitute_vars_univariate, Curve4, MultiPoly, SharpMap,
};
use crate::protocols::{pick_players, ratio, HonestTwoLevel, TlQuestion, TwoLevelParams, TwoLevelTest};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// One 3-SAT clause: three literals, each a variable index (0-based) with a
/// polarity (true = positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clause {
    pub lits: [(usize, bool); 3],
}

impl Clause {
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.lits.iter().any(|&(v, pos)| assignment[v] == pos)
    }

    /// Whether three boolean values for the clause variables (in literal
    /// order) satisfy it.
    pub fn satisfied_by_values(&self, values: [bool; 3]) -> bool {
        self.lits
            .iter()
            .zip(values)
            .any(|(&(_, pos), val)| val == pos)
    }
}

#[derive(Debug, Clone)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn violated_fraction(&self, assignment: &[bool]) -> f64 {
        let bad = self.clauses.iter().filter(|c| !c.satisfied_by(assignment)).count();
        bad as f64 / self.clauses.len() as f64
    }
}

/// Derived test parameters. `h`, `m` follow the standard derivation from n
/// unless constructed via [`SatParams::custom`], which serves table-scale
/// experiments; both keep the invariants (h+1)^m >= n and q >= max(h+1, 4).
#[derive(Debug, Clone, Copy)]
pub struct SatParams {
    pub n: usize,
    pub h: u64,
    pub m: usize,
    pub d: usize,
    /// d' = m' = ceil(log2(4d+1)), the curve-answer substitution dimension.
    pub dprime: usize,
    pub r: usize,
    pub field: FieldParams,
}

/// h = ceil(log2 n), m = ceil(log2 n / log2 log2 n), d = mh,
/// d' = m' = ceil(log2(4d+1)).
pub fn sat_params(n: usize, r: usize, field: FieldParams) -> Result<SatParams> {
    if n < 3 {
        return Err(Error::InvalidGame("need n >= 3 variables".into()));
    }
    let log_n = (n as f64).log2();
    let h = log_n.ceil() as u64;
    let m = (log_n / log_n.log2()).ceil() as usize;
    SatParams::custom(n, h, m, r, field)
}

impl SatParams {
    /// Explicit (h, m) pair; the Fig-formula invariants that do not pin h
    /// and m are still enforced.
    pub fn custom(n: usize, h: u64, m: usize, r: usize, field: FieldParams) -> Result<SatParams> {
        if m < 2 {
            return Err(Error::InvalidGame("need m >= 2".into()));
        }
        let need = (h + 1).max(4);
        if field.modulus() < need {
            return Err(Error::FieldTooSmall { need, have: field.modulus() });
        }
        let capacity = (h + 1).checked_pow(m as u32).ok_or(Error::TooLarge(u128::MAX, 0))?;
        if capacity < n as u64 {
            return Err(Error::InvalidGame(format!(
                "grid (h+1)^m = {capacity} cannot hold {n} variables"
            )));
        }
        let d = m * h as usize;
        let dprime = SharpMap::univariate(4 * d).target_dim;
        Ok(SatParams { n, h, m, d, dprime, r, field })
    }

    /// Grid point of a variable: its index written base (h+1),
    /// little-endian, m digits.
    pub fn var_point(&self, var: usize) -> Vec<FieldElem> {
        let mut v = var as u64;
        let base = self.h + 1;
        (0..self.m)
            .map(|_| {
                let digit = v % base;
                v /= base;
                self.field.elem(digit)
            })
            .collect()
    }

    fn two_level(&self) -> TwoLevelParams {
        TwoLevelParams::new(self.d, self.m, self.r, self.field).expect("valid by construction")
    }

    /// Longest question length in bits for the two-level component:
    /// 3 m log q + 3 m' log q, compared against 6 max(m, m') log q.
    pub fn question_bits(&self) -> (usize, usize) {
        let bits = self.field.bit_length() as usize;
        let mp = self.two_level().inner_dim();
        let actual = 3 * self.m * bits + 3 * mp * bits;
        let bound = 6 * self.m.max(mp) * bits;
        (actual, bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatQuestion {
    /// Two-level low-degree question over the assignment polynomial.
    Tl(TlQuestion),
    /// A degree-4 curve and a substituted point of F^{m'}.
    CurvePoint(Curve4, Vec<FieldElem>),
    /// A curve in F^m and a degree-4 curve in F^{m'}.
    CurveCurve(Curve4, Curve4),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatAnswer {
    Value(FieldElem),
    /// Plane answers are bivariate, curve answers univariate.
    Poly(MultiPoly),
}

impl std::fmt::Display for SatQuestion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SatQuestion::Tl(q) => write!(f, "tl:{q}"),
            SatQuestion::CurvePoint(c, p) => {
                write!(f, "{c}#(")?;
                for (i, x) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            SatQuestion::CurveCurve(c, cp) => write!(f, "{c}~{cp}"),
        }
    }
}

impl std::fmt::Display for SatAnswer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SatAnswer::Value(v) => write!(f, "{v}"),
            SatAnswer::Poly(p) => write!(f, "g[{p}]"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SatAux {
    TwoLevel,
    Consistency,
    ClauseCheck(Clause),
}

pub struct SatTest {
    pub params: SatParams,
    pub cnf: Cnf,
    inner: TwoLevelTest,
}

impl SatTest {
    pub fn new(params: SatParams, cnf: Cnf) -> Result<Self> {
        if cnf.num_vars > params.n {
            return Err(Error::InvalidGame("formula has more variables than n".into()));
        }
        if cnf.clauses.is_empty() {
            return Err(Error::InvalidGame("formula has no clauses".into()));
        }
        for c in &cnf.clauses {
            if c.lits.iter().any(|&(v, _)| v >= params.n) {
                return Err(Error::InvalidGame("literal out of range".into()));
            }
        }
        let inner = TwoLevelTest::new(params.two_level());
        Ok(SatTest { params, cnf, inner })
    }

    /// The curve through the three clause-variable points and w,
    /// at parameters 0, 1, 2, 3.
    fn clause_curve(&self, clause: &Clause, w: &[FieldElem]) -> Curve4 {
        let pts = [
            self.params.var_point(clause.lits[0].0),
            self.params.var_point(clause.lits[1].0),
            self.params.var_point(clause.lits[2].0),
            w.to_vec(),
        ];
        curve_through(&pts).expect("field size checked at construction")
    }

    /// Image of curve parameter t under the univariate substitution map for
    /// degree 4d.
    fn sharp_param(&self, t: u64) -> Vec<FieldElem> {
        sharp_apply_univariate(4 * self.params.d, self.params.field.elem(t))
    }

    /// The curve c' in F^{m'} through (#0, #1, #2, w').
    fn inner_curve(&self, wp: &[FieldElem]) -> Curve4 {
        let pts = [
            self.sharp_param(0),
            self.sharp_param(1),
            self.sharp_param(2),
            wp.to_vec(),
        ];
        curve_through(&pts).expect("field size checked at construction")
    }
}

impl Referee for SatTest {
    type Question = SatQuestion;
    type Answer = SatAnswer;
    type Aux = SatAux;

    fn players(&self) -> usize {
        self.params.r
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<SatQuestion, SatAux> {
        if rng.gen_bool(0.5) {
            // two-level low-degree component
            let r = self.inner.sample_round(rng);
            return Round {
                auto_accept: r.auto_accept,
                queries: r
                    .queries
                    .into_iter()
                    .map(|(p, q)| (p, SatQuestion::Tl(q)))
                    .collect(),
                aux: SatAux::TwoLevel,
            };
        }
        let f = self.params.field;
        let clause = self.cnf.clauses[rng.gen_range(0..self.cnf.clauses.len())];
        let w = f.sample_point(self.params.m, rng);
        let c = self.clause_curve(&clause, &w);
        let players = pick_players(self.params.r, 2, rng);
        if rng.gen_bool(0.5) {
            // point-vs-curve consistency at w = c(3)
            Round {
                auto_accept: false,
                queries: vec![
                    (players[0], SatQuestion::Tl(TlQuestion::Point(w))),
                    (players[1], SatQuestion::CurvePoint(c, self.sharp_param(3))),
                ],
                aux: SatAux::Consistency,
            }
        } else {
            // clause check on the substituted curve
            let wp = f.sample_point(self.params.dprime, rng);
            let cp = self.inner_curve(&wp);
            Round {
                auto_accept: false,
                queries: vec![
                    (players[0], SatQuestion::CurvePoint(c.clone(), wp)),
                    (players[1], SatQuestion::CurveCurve(c, cp)),
                ],
                aux: SatAux::ClauseCheck(clause),
            }
        }
    }

    fn accepts(&self, round: &Round<SatQuestion, SatAux>, answers: &[SatAnswer]) -> bool {
        match &round.aux {
            SatAux::TwoLevel => {
                let mut tl_queries = Vec::with_capacity(round.queries.len());
                for (p, q) in &round.queries {
                    let SatQuestion::Tl(q) = q else { return false };
                    tl_queries.push((*p, q.clone()));
                }
                let mut tl_answers = Vec::with_capacity(answers.len());
                for a in answers {
                    match a {
                        SatAnswer::Value(v) => tl_answers.push(crate::protocols::TlAnswer::Value(*v)),
                        SatAnswer::Poly(p) => {
                            tl_answers.push(crate::protocols::TlAnswer::Poly(p.clone()))
                        }
                    }
                }
                let tl_round = Round { auto_accept: false, queries: tl_queries, aux: () };
                self.inner.accepts(&tl_round, &tl_answers)
            }
            SatAux::Consistency => {
                let (SatAnswer::Value(a), SatAnswer::Value(ap)) = (&answers[0], &answers[1])
                else {
                    return false;
                };
                a == ap
            }
            SatAux::ClauseCheck(clause) => {
                let (SatAnswer::Value(a), SatAnswer::Poly(g)) = (&answers[0], &answers[1]) else {
                    return false;
                };
                if g.num_vars() != 1 || g.total_degree() > 4 * self.params.dprime {
                    return false;
                }
                let f = self.params.field;
                let eval = |t: u64| g.evaluate(&[f.elem(t)]).expect("univariate");
                // the three clause values must be boolean and satisfying
                let mut vals = [false; 3];
                for (slot, val) in vals.iter_mut().enumerate() {
                    let v = eval(slot as u64);
                    if v == f.zero() {
                        *val = false;
                    } else if v == f.one() {
                        *val = true;
                    } else {
                        return false;
                    }
                }
                if !clause.satisfied_by_values(vals) {
                    return false;
                }
                eval(3) == *a
            }
        }
    }
}

impl EnumerableReferee for SatTest {
    fn enumerate_rounds(&self, cap: u128) -> Result<Vec<(Weight, Round<SatQuestion, SatAux>)>> {
        let f = self.params.field;
        let q = f.modulus() as u128;
        let ncl = self.cnf.clauses.len() as u128;
        let pairs = (self.params.r * (self.params.r - 1)) as u128;
        let qm = q.pow(self.params.m as u32);
        let qmp = q.pow(self.params.dprime as u32);
        let branch_b = ncl * qm * pairs * (1 + qmp);
        if branch_b > cap {
            return Err(Error::TooLarge(branch_b, cap));
        }
        let mut out: Vec<(Weight, Round<SatQuestion, SatAux>)> = Vec::new();
        let half = ratio(1, 2);
        for (w, r) in self.inner.enumerate_rounds(cap)? {
            out.push((
                w * half.clone(),
                Round {
                    auto_accept: r.auto_accept,
                    queries: r
                        .queries
                        .into_iter()
                        .map(|(p, q)| (p, SatQuestion::Tl(q)))
                        .collect(),
                    aux: SatAux::TwoLevel,
                },
            ));
        }
        let wb1 = ratio(1, 4) / ratio(ncl * qm * pairs, 1);
        let wb2 = ratio(1, 4) / ratio(ncl * qm * pairs * qmp, 1);
        for clause in &self.cnf.clauses {
            let mut w_pt = vec![0u64; self.params.m];
            loop {
                let w: Vec<FieldElem> = w_pt.iter().map(|&x| f.elem(x)).collect();
                let c = self.clause_curve(clause, &w);
                for players in crate::protocols::all_player_tuples(self.params.r, 2) {
                    out.push((
                        wb1.clone(),
                        Round {
                            auto_accept: false,
                            queries: vec![
                                (players[0], SatQuestion::Tl(TlQuestion::Point(w.clone()))),
                                (
                                    players[1],
                                    SatQuestion::CurvePoint(c.clone(), self.sharp_param(3)),
                                ),
                            ],
                            aux: SatAux::Consistency,
                        },
                    ));
                    let mut wp_idx = vec![0u64; self.params.dprime];
                    loop {
                        let wp: Vec<FieldElem> = wp_idx.iter().map(|&x| f.elem(x)).collect();
                        let cp = self.inner_curve(&wp);
                        out.push((
                            wb2.clone(),
                            Round {
                                auto_accept: false,
                                queries: vec![
                                    (players[0], SatQuestion::CurvePoint(c.clone(), wp)),
                                    (players[1], SatQuestion::CurveCurve(c.clone(), cp)),
                                ],
                                aux: SatAux::ClauseCheck(*clause),
                            },
                        ));
                        if !incr(&mut wp_idx, f.modulus()) {
                            break;
                        }
                    }
                }
                if !incr(&mut w_pt, f.modulus()) {
                    break;
                }
            }
        }
        Ok(out)
    }
}

fn incr(digits: &mut [u64], q: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

/// Honest strategy: the low-degree extension of an assignment (variables on
/// their grid points, remaining grid points zero), answered through
/// restriction and substitution for every question type.
pub struct HonestSat {
    params: SatParams,
    global: MultiPoly,
    tl: HonestTwoLevel,
}

impl HonestSat {
    pub fn new(params: SatParams, assignment: &[bool]) -> Result<Self> {
        if assignment.len() != params.n {
            return Err(Error::DimensionMismatch { expected: params.n, got: assignment.len() });
        }
        let f = params.field;
        let mut values: HashMap<Vec<u64>, FieldElem> = HashMap::new();
        let base = params.h + 1;
        let mut idx = vec![0u64; params.m];
        loop {
            values.insert(idx.clone(), f.zero());
            if !incr(&mut idx, base) {
                break;
            }
        }
        for (var, &bit) in assignment.iter().enumerate() {
            let pt: Vec<u64> = {
                let mut v = var as u64;
                (0..params.m)
                    .map(|_| {
                        let d = v % base;
                        v /= base;
                        d
                    })
                    .collect()
            };
            values.insert(pt, if bit { f.one() } else { f.zero() });
        }
        let global = low_degree_extension(f, &values, params.h, params.m)?;
        let tl = HonestTwoLevel::new(global.clone(), params.d)?;
        Ok(HonestSat { params, global, tl })
    }

    pub fn global(&self) -> &MultiPoly {
        &self.global
    }

    /// The substituted restriction of the assignment polynomial to a curve.
    fn curve_poly(&self, c: &Curve4) -> MultiPoly {
        let restricted = restrict_to_curve(&self.global, c).expect("ambient match");
        substitute_vars_univariate(&restricted, 4 * self.params.d).expect("degree bound")
    }
}

impl PlayerStrategy<SatQuestion, SatAnswer> for HonestSat {
    fn answer(&self, player: usize, q: &SatQuestion) -> SatAnswer {
        match q {
            SatQuestion::Tl(tq) => match self.tl.answer(player, tq) {
                crate::protocols::TlAnswer::Value(v) => SatAnswer::Value(v),
                crate::protocols::TlAnswer::Poly(p) => SatAnswer::Poly(p),
            },
            SatQuestion::CurvePoint(c, pt) => {
                SatAnswer::Value(self.curve_poly(c).evaluate(pt).expect("dims"))
            }
            SatQuestion::CurveCurve(c, cp) => {
                SatAnswer::Poly(restrict_to_curve(&self.curve_poly(c), cp).expect("dims"))
            }
        }
    }
}
