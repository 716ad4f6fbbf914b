//! Stage 1: the three-player game G_phi, a wrapper around the 3-SAT test
//! with the field prime drawn from the configured interval and size
//! reporting.

use crate::error::{Error, Result};
use crate::field::{make_field, next_prime};
use crate::gamecore::{EnumerableReferee, Referee, Round, Weight};
use crate::protocols::{sat_params, Cnf, SatAnswer, SatAux, SatQuestion, SatTest};
use crate::reductions::config::ReductionConfig;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct GphiReport {
    pub n: usize,
    pub field_modulus: u64,
    /// Whether the prime search had to widen the configured interval.
    pub interval_widened: bool,
    /// Longest two-level question in bits, and the 6 max(m, m') log q bound.
    pub question_bits: (usize, usize),
    /// Longest answer in bits (the inner-plane polynomial answer).
    pub answer_bits: usize,
}

/// G_phi: the (phi, n, 3, F) 3-SAT test as a three-player game.
pub struct GphiGame {
    test: SatTest,
    report: GphiReport,
}

impl GphiGame {
    pub fn test(&self) -> &SatTest {
        &self.test
    }

    pub fn report(&self) -> &GphiReport {
        &self.report
    }
}

impl Referee for GphiGame {
    type Question = SatQuestion;
    type Answer = SatAnswer;
    type Aux = SatAux;

    fn players(&self) -> usize {
        self.test.players()
    }

    fn sample_round(&self, rng: &mut ChaCha8Rng) -> Round<Self::Question, Self::Aux> {
        self.test.sample_round(rng)
    }

    fn accepts(&self, round: &Round<Self::Question, Self::Aux>, answers: &[Self::Answer]) -> bool {
        self.test.accepts(round, answers)
    }
}

impl EnumerableReferee for GphiGame {
    fn enumerate_rounds(
        &self,
        cap: u128,
    ) -> Result<Vec<(Weight, Round<Self::Question, Self::Aux>)>> {
        self.test.enumerate_rounds(cap)
    }
}

/// Builds G_phi: picks a prime q in [(log2 n / eps1)^e, 2 (log2 n / eps1)^e]
/// (doubling the upper end until a prime is found, which Bertrand's
/// postulate prevents from ever being needed), derives the 3-SAT test
/// parameters, and records the complexity report.
pub fn build_game_gphi(cnf: Cnf, eps1: f64, config: &ReductionConfig) -> Result<GphiGame> {
    config.validate()?;
    if eps1 <= 0.0 {
        return Err(Error::InvalidGame("eps1 must be positive".into()));
    }
    let n = cnf.num_vars;
    if n < 3 {
        return Err(Error::InvalidGame("need n >= 3".into()));
    }
    let base = ((n as f64).log2() / eps1).powi(config.d3_exponent as i32);
    // the interval is intersected with the validity floor q >= max(h+1, 4)
    let h = (n as f64).log2().ceil() as u64;
    let lo = (base.ceil().max(2.0) as u64).max(h + 1).max(4);
    let mut hi = (2.0 * base).floor().max(lo as f64) as u64;
    let mut widened = false;
    let q = loop {
        let p = next_prime(lo);
        if p <= hi {
            break p;
        }
        hi = hi.saturating_mul(2);
        widened = true;
    };
    let field = make_field(q)?;
    let params = sat_params(n, 3, field)?;
    let question_bits = params.question_bits();
    // the longest answer is the inner-plane polynomial: a bivariate
    // polynomial of total degree <= d' over F
    let dprime2 = crate::polyalg::SharpMap::bivariate(params.d).target_dim;
    let coeffs = (dprime2 + 1) * (dprime2 + 2) / 2;
    let answer_bits = coeffs * field.bit_length() as usize;
    let report = GphiReport {
        n,
        field_modulus: q,
        interval_widened: widened,
        question_bits,
        answer_bits,
    };
    Ok(GphiGame { test: SatTest::new(params, cnf)?, report })
}
