//! Textual file formats: polynomials, game tables, strategies, states and
//! operators, DIMACS CNF, QUADEQ instances. Round-trips are bit-exact;
//! floating-point fields are printed with 17 significant digits.

use crate::error::{Error, Result};
use crate::field::{make_field, FieldElem, FieldParams};
use crate::gamecore::{DeterministicStrategy, Predicate, QuantumStrategy, TableGame, Weight};
use crate::linalg::{c, CMat, CVec};
use crate::polyalg::MultiPoly;
use crate::protocols::{Clause, Cnf, QuadeqEquation, QuadeqInstance};
use num::BigInt;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

fn parse_err(what: &str, line: &str) -> Error {
    Error::Parse(format!("{what}: {line:?}"))
}

// ---------------------------------------------------------------- polynomials

/// `p <modulus> m <vars>` header, then one `coeff e1 .. em` line per term.
pub fn write_poly(p: &MultiPoly) -> String {
    let mut out = String::new();
    writeln!(out, "p {} m {}", p.field().modulus(), p.num_vars()).unwrap();
    for (e, coeff) in p.terms() {
        write!(out, "{}", coeff.value()).unwrap();
        for x in e {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_poly(text: &str) -> Result<MultiPoly> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err("empty polynomial", text))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [p_tag, modulus, m_tag, vars] = parts.as_slice() else {
        return Err(parse_err("polynomial header", header));
    };
    if *p_tag != "p" || *m_tag != "m" {
        return Err(parse_err("polynomial header", header));
    }
    let field = make_field(modulus.parse().map_err(|_| parse_err("modulus", header))?)?;
    let num_vars: usize = vars.parse().map_err(|_| parse_err("var count", header))?;
    let mut terms = Vec::new();
    for line in lines {
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != num_vars + 1 {
            return Err(parse_err("term arity", line));
        }
        let coeff = field.elem(nums[0].parse().map_err(|_| parse_err("coefficient", line))?);
        let expo: Vec<u32> = nums[1..]
            .iter()
            .map(|x| x.parse().map_err(|_| parse_err("exponent", line)))
            .collect::<Result<_>>()?;
        terms.push((expo, coeff));
    }
    MultiPoly::from_terms(field, num_vars, terms)
}

// ---------------------------------------------------------------- game tables

/// Structured text: a header line `game r <r> q <|Q|> a <|A|> xor <0/1>
/// symmetric <0/1>`, the alphabets, the distribution block (`q1 .. qr
/// num/den` per line) and the predicate block (accepted tuples, or a named
/// checker reference for compiled games).
pub fn write_game(game: &TableGame) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "game r {} q {} a {} xor {} symmetric {}",
        game.players(),
        game.questions().len(),
        game.answers().len(),
        game.is_xor() as u8,
        game.is_symmetric() as u8
    )
    .unwrap();
    for q in game.questions() {
        writeln!(out, "question {q}").unwrap();
    }
    for a in game.answers() {
        writeln!(out, "answer {a}").unwrap();
    }
    writeln!(out, "pi {}", game.dist().len()).unwrap();
    for (tuple, w) in game.dist() {
        for q in tuple {
            write!(out, "{q} ").unwrap();
        }
        writeln!(out, "{}/{}", w.numer(), w.denom()).unwrap();
    }
    match game.predicate() {
        Predicate::Table(set) => {
            writeln!(out, "V table {}", set.len()).unwrap();
            for (q, a) in set {
                write!(out, "accept").unwrap();
                for x in q {
                    write!(out, " {x}").unwrap();
                }
                write!(out, " |").unwrap();
                for x in a {
                    write!(out, " {x}").unwrap();
                }
                out.push('\n');
            }
        }
        Predicate::Checker(ch) => {
            writeln!(out, "V checker {}", ch.name()).unwrap();
        }
    }
    out
}

/// Reads a game table; only `V table` predicates are self-contained, a
/// checker reference fails with a parse error naming the checker.
pub fn read_game(text: &str) -> Result<TableGame> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let header = lines.next().ok_or_else(|| parse_err("empty game", text))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 11 || h[0] != "game" {
        return Err(parse_err("game header", header));
    }
    let r: usize = h[2].parse().map_err(|_| parse_err("r", header))?;
    let nq: usize = h[4].parse().map_err(|_| parse_err("|Q|", header))?;
    let na: usize = h[6].parse().map_err(|_| parse_err("|A|", header))?;
    let xor = h[8] == "1";
    let symmetric = h[10] == "1";
    let mut questions = Vec::with_capacity(nq);
    for _ in 0..nq {
        let line = lines.next().ok_or_else(|| parse_err("missing question", text))?;
        questions.push(
            line.strip_prefix("question ")
                .ok_or_else(|| parse_err("question line", line))?
                .to_string(),
        );
    }
    let mut answers = Vec::with_capacity(na);
    for _ in 0..na {
        let line = lines.next().ok_or_else(|| parse_err("missing answer", text))?;
        answers.push(
            line.strip_prefix("answer ")
                .ok_or_else(|| parse_err("answer line", line))?
                .to_string(),
        );
    }
    let pi_header = lines.next().ok_or_else(|| parse_err("missing pi", text))?;
    let count: usize = pi_header
        .strip_prefix("pi ")
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| parse_err("pi header", pi_header))?;
    let mut dist = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines.next().ok_or_else(|| parse_err("missing pi row", text))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != r + 1 {
            return Err(parse_err("pi row arity", line));
        }
        let tuple: Vec<usize> = parts[..r]
            .iter()
            .map(|x| x.parse().map_err(|_| parse_err("question index", line)))
            .collect::<Result<_>>()?;
        let (num, den) = parts[r]
            .split_once('/')
            .ok_or_else(|| parse_err("weight", line))?;
        let w = Weight::new(
            BigInt::from_str(num).map_err(|_| parse_err("weight numerator", line))?,
            BigInt::from_str(den).map_err(|_| parse_err("weight denominator", line))?,
        );
        dist.push((tuple, w));
    }
    let v_header = lines.next().ok_or_else(|| parse_err("missing V", text))?;
    let vh: Vec<&str> = v_header.split_whitespace().collect();
    let predicate = match vh.as_slice() {
        ["V", "table", n] => {
            let n: usize = n.parse().map_err(|_| parse_err("V size", v_header))?;
            let mut set = BTreeSet::new();
            for _ in 0..n {
                let line = lines.next().ok_or_else(|| parse_err("missing accept row", text))?;
                let row = line
                    .strip_prefix("accept ")
                    .ok_or_else(|| parse_err("accept row", line))?;
                let (qs, asr) = row.split_once(" | ").ok_or_else(|| parse_err("accept row", line))?;
                let q: Vec<usize> = qs
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| parse_err("accept q", line)))
                    .collect::<Result<_>>()?;
                let a: Vec<usize> = asr
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| parse_err("accept a", line)))
                    .collect::<Result<_>>()?;
                set.insert((q, a));
            }
            Predicate::Table(set)
        }
        ["V", "checker", name] => {
            return Err(Error::Parse(format!(
                "game uses the named checker {name:?}; checker-backed games do not round-trip \
                 through text"
            )));
        }
        _ => return Err(parse_err("V header", v_header)),
    };
    let mut game = TableGame::new(r, questions, answers, dist, predicate)?;
    if xor {
        game = game.claim_xor()?;
    }
    if symmetric {
        game = game.claim_symmetric()?;
    }
    Ok(game)
}

// ----------------------------------------------------------------- strategies

/// Deterministic strategies as `player <p> q <token> a <token>` triples.
pub fn write_deterministic(game: &TableGame, s: &DeterministicStrategy) -> String {
    let mut out = String::new();
    writeln!(out, "deterministic r {}", game.players()).unwrap();
    for p in 0..game.players() {
        for (qi, q) in game.questions().iter().enumerate() {
            writeln!(out, "player {p} q {q} a {}", game.answers()[s.answer(p, qi)]).unwrap();
        }
    }
    out
}

pub fn read_deterministic(game: &TableGame, text: &str) -> Result<DeterministicStrategy> {
    let mut tables = vec![vec![usize::MAX; game.questions().len()]; game.players()];
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let rest = line.strip_prefix("player ").ok_or_else(|| parse_err("strategy row", line))?;
        let (p, rest) = rest.split_once(" q ").ok_or_else(|| parse_err("strategy row", line))?;
        let (q, a) = rest.split_once(" a ").ok_or_else(|| parse_err("strategy row", line))?;
        let p: usize = p.parse().map_err(|_| parse_err("player", line))?;
        let qi = game.question_index(q).ok_or_else(|| parse_err("unknown question", line))?;
        let ai = game.answer_index(a).ok_or_else(|| parse_err("unknown answer", line))?;
        if p >= game.players() {
            return Err(parse_err("player out of range", line));
        }
        tables[p][qi] = ai;
    }
    if tables.iter().any(|t| t.contains(&usize::MAX)) {
        return Err(Error::InvalidStrategy("strategy not total on Q".into()));
    }
    DeterministicStrategy::new(game, tables)
}

fn write_cvec(out: &mut String, v: &CVec) {
    for z in v.iter() {
        writeln!(out, "{:.17e} {:.17e}", z.re, z.im).unwrap();
    }
}

fn write_cmat(out: &mut String, m: &CMat) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            write!(out, "{:.17e} {:.17e}", z.re, z.im).unwrap();
            out.push(if j + 1 == m.ncols() { '\n' } else { ' ' });
        }
    }
}

fn parse_floats(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|x| x.parse::<f64>().map_err(|_| parse_err("float", line)))
        .collect()
}

/// Quantum strategies: a dimension header, the state amplitudes, then one
/// row-major complex matrix per (player, question, answer).
pub fn write_quantum(game: &TableGame, qs: &QuantumStrategy) -> String {
    let mut out = String::new();
    write!(out, "quantum r {} dims", game.players()).unwrap();
    for d in qs.dims() {
        write!(out, " {d}").unwrap();
    }
    out.push('\n');
    writeln!(out, "state {}", qs.state().len()).unwrap();
    write_cvec(&mut out, qs.state());
    for p in 0..game.players() {
        for (qi, q) in game.questions().iter().enumerate() {
            for (ai, a) in game.answers().iter().enumerate() {
                writeln!(out, "povm player {p} q {q} a {a} dim {}", qs.dims()[p]).unwrap();
                write_cmat(&mut out, &qs.povm(p, qi)[ai]);
            }
        }
    }
    out
}

pub fn read_quantum(game: &TableGame, text: &str) -> Result<QuantumStrategy> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err("empty strategy", text))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() < 4 || h[0] != "quantum" {
        return Err(parse_err("quantum header", header));
    }
    let r: usize = h[2].parse().map_err(|_| parse_err("r", header))?;
    let dims: Vec<usize> = h[4..]
        .iter()
        .map(|x| x.parse().map_err(|_| parse_err("dim", header)))
        .collect::<Result<_>>()?;
    if dims.len() != r || r != game.players() {
        return Err(parse_err("dims arity", header));
    }
    let state_header = lines.next().ok_or_else(|| parse_err("missing state", text))?;
    let len: usize = state_header
        .strip_prefix("state ")
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| parse_err("state header", state_header))?;
    let mut amps = Vec::with_capacity(len);
    for _ in 0..len {
        let line = lines.next().ok_or_else(|| parse_err("missing amplitude", text))?;
        let f = parse_floats(line)?;
        if f.len() != 2 {
            return Err(parse_err("amplitude", line));
        }
        amps.push(c(f[0], f[1]));
    }
    let state = CVec::from_vec(amps);
    let mut povms: Vec<Vec<Vec<CMat>>> =
        vec![vec![Vec::new(); game.questions().len()]; game.players()];
    let mut pending: Vec<&str> = lines.collect();
    pending.reverse();
    while let Some(line) = pending.pop() {
        let h: Vec<&str> = line.split_whitespace().collect();
        if h.len() != 9 || h[0] != "povm" {
            return Err(parse_err("povm header", line));
        }
        let p: usize = h[2].parse().map_err(|_| parse_err("player", line))?;
        let q = game.question_index(h[4]).ok_or_else(|| parse_err("question", line))?;
        let _a = game.answer_index(h[6]).ok_or_else(|| parse_err("answer", line))?;
        let d: usize = h[8].parse().map_err(|_| parse_err("dim", line))?;
        let mut m = CMat::zeros(d, d);
        for i in 0..d {
            let row = pending.pop().ok_or_else(|| parse_err("missing matrix row", line))?;
            let f = parse_floats(row)?;
            if f.len() != 2 * d {
                return Err(parse_err("matrix row", row));
            }
            for j in 0..d {
                m[(i, j)] = c(f[2 * j], f[2 * j + 1]);
            }
        }
        povms[p][q].push(m);
    }
    QuantumStrategy::new(dims, state, povms)
}

/// Bare states and operator families share the quantum-strategy matrix
/// syntax: `state <len>` + amplitudes, `op <name> dim <d>` + rows.
pub fn write_operator_block(name: &str, m: &CMat) -> String {
    let mut out = String::new();
    writeln!(out, "op {name} dim {}", m.nrows()).unwrap();
    write_cmat(&mut out, m);
    out
}

pub fn write_state_block(v: &CVec) -> String {
    let mut out = String::new();
    writeln!(out, "state {}", v.len()).unwrap();
    write_cvec(&mut out, v);
    out
}

/// Parses a file of `state`/`op` blocks.
pub fn read_blocks(text: &str) -> Result<(Vec<CVec>, Vec<(String, CMat)>)> {
    let mut states = Vec::new();
    let mut ops = Vec::new();
    let mut lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    lines.reverse();
    while let Some(line) = lines.pop() {
        if let Some(rest) = line.strip_prefix("state ") {
            let len: usize = rest.parse().map_err(|_| parse_err("state len", line))?;
            let mut amps = Vec::with_capacity(len);
            for _ in 0..len {
                let row = lines.pop().ok_or_else(|| parse_err("missing amplitude", line))?;
                let f = parse_floats(row)?;
                if f.len() != 2 {
                    return Err(parse_err("amplitude", row));
                }
                amps.push(c(f[0], f[1]));
            }
            states.push(CVec::from_vec(amps));
        } else if let Some(rest) = line.strip_prefix("op ") {
            let (name, dim) = rest
                .split_once(" dim ")
                .ok_or_else(|| parse_err("op header", line))?;
            let d: usize = dim.parse().map_err(|_| parse_err("op dim", line))?;
            let mut m = CMat::zeros(d, d);
            for i in 0..d {
                let row = lines.pop().ok_or_else(|| parse_err("missing op row", line))?;
                let f = parse_floats(row)?;
                if f.len() != 2 * d {
                    return Err(parse_err("op row", row));
                }
                for j in 0..d {
                    m[(i, j)] = c(f[2 * j], f[2 * j + 1]);
                }
            }
            ops.push((name.to_string(), m));
        } else {
            return Err(parse_err("block header", line));
        }
    }
    Ok((states, ops))
}

// --------------------------------------------------------------------- DIMACS

/// DIMACS CNF reader; clauses shorter than three literals are padded by
/// repeating the last literal, longer ones are rejected.
pub fn read_dimacs(text: &str) -> Result<Cnf> {
    let mut num_vars = 0usize;
    let mut clauses = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') || line == "0" {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(parse_err("problem line", line));
            }
            num_vars = parts[0].parse().map_err(|_| parse_err("var count", line))?;
            continue;
        }
        let mut lits = Vec::new();
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| parse_err("literal", line))?;
            if v == 0 {
                break;
            }
            let var = v.unsigned_abs() as usize - 1;
            if var >= num_vars {
                return Err(parse_err("literal out of range", line));
            }
            lits.push((var, v > 0));
        }
        if lits.is_empty() {
            continue;
        }
        if lits.len() > 3 {
            return Err(Error::Parse(format!("clause with {} literals; need 3-SAT", lits.len())));
        }
        while lits.len() < 3 {
            lits.push(*lits.last().unwrap());
        }
        clauses.push(Clause { lits: [lits[0], lits[1], lits[2]] });
    }
    if num_vars == 0 || clauses.is_empty() {
        return Err(Error::Parse("no problem line or no clauses".into()));
    }
    Ok(Cnf { num_vars, clauses })
}

// --------------------------------------------------------------------- QUADEQ

/// `quadeq K <k> n <n>` header, then per equation one line of `i j` index
/// pairs (1-based) terminated by `= <0/1>`.
pub fn write_quadeq(inst: &QuadeqInstance) -> String {
    let mut out = String::new();
    writeln!(out, "quadeq K {} n {}", inst.num_equations(), inst.num_vars()).unwrap();
    for eq in inst.equations() {
        for (i, j) in eq.pairs() {
            write!(out, "{} {} ", i + 1, j + 1).unwrap();
        }
        writeln!(out, "= {}", eq.constant as u8).unwrap();
    }
    out
}

/// Reads a standard two-chunk instance (n must be even).
pub fn read_quadeq(text: &str) -> Result<QuadeqInstance> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err("empty instance", text))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 5 || h[0] != "quadeq" {
        return Err(parse_err("quadeq header", header));
    }
    let k: usize = h[2].parse().map_err(|_| parse_err("K", header))?;
    let n: usize = h[4].parse().map_err(|_| parse_err("n", header))?;
    let mut equations = Vec::with_capacity(k);
    for _ in 0..k {
        let line = lines.next().ok_or_else(|| parse_err("missing equation", text))?;
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| parse_err("equation", line))?;
        let idx: Vec<usize> = lhs
            .split_whitespace()
            .map(|x| x.parse::<usize>().map_err(|_| parse_err("index", line)))
            .collect::<Result<_>>()?;
        if idx.len() % 2 != 0 {
            return Err(parse_err("odd index count", line));
        }
        if idx.iter().any(|&i| i == 0 || i > n) {
            return Err(parse_err("index out of range", line));
        }
        let pairs: Vec<(usize, usize)> =
            idx.chunks(2).map(|ch| (ch[0] - 1, ch[1] - 1)).collect();
        let constant = match rhs.trim() {
            "0" => false,
            "1" => true,
            _ => return Err(parse_err("constant", line)),
        };
        equations.push(QuadeqEquation::new(pairs, constant));
    }
    QuadeqInstance::standard(n, equations)
}

// ----------------------------------------------------------------- field text

pub fn parse_field_elem(field: FieldParams, tok: &str) -> Result<FieldElem> {
    Ok(field.elem(tok.parse().map_err(|_| parse_err("field element", tok))?))
}
