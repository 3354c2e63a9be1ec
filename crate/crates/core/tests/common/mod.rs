//! Shared generators and reference implementations for the integration and
//! acceptance tests. The reference evaluator and parser share no code with
//! the library beyond the AST types.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ipverify_core::ltl::{Atom, CmpOp, NumExpr};
use ipverify_core::monitor::{StateSnapshot, Trace, TraceEvent};
use ipverify_core::{parse_ltl, LtlFormula, Value, VarRef};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LENGTH_RULE: &str = "G(reLen != 19 -> F(cntLenRd' = cntLenRd + 1 && totalLenRd' = totalLenRd + 1 && reVal = FALSE))";

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

pub fn fixture(rel: &str) -> PathBuf {
    repo_root().join("fixtures").join(rel)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Random formulas and traces

pub const VARS: [&str; 3] = ["x", "y", "z"];
pub const DOMAIN: [i64; 4] = [0, 1, 2, 19];
const OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

fn random_var(r: &mut ChaCha8Rng) -> NumExpr {
    let name = *VARS.choose(r).unwrap();
    if r.random_bool(0.4) {
        NumExpr::primed(name)
    } else {
        NumExpr::var(name)
    }
}

fn random_term(r: &mut ChaCha8Rng) -> NumExpr {
    match r.random_range(0..6) {
        0 => NumExpr::add(random_var(r), NumExpr::int(*DOMAIN.choose(r).unwrap())),
        1 => NumExpr::sub(random_var(r), random_var(r)),
        2 => NumExpr::int(*DOMAIN.choose(r).unwrap()),
        _ => random_var(r),
    }
}

pub fn random_atom(r: &mut ChaCha8Rng) -> LtlFormula {
    match r.random_range(0..8) {
        0 => LtlFormula::Atom(Atom::truthy(random_var(r))),
        1 => LtlFormula::constant(r.random_bool(0.5)),
        _ => LtlFormula::atom(random_var(r), *OPS.choose(r).unwrap(), random_term(r)),
    }
}

/// Formula of depth at most `depth` (an atom has depth 1).
pub fn random_formula(r: &mut ChaCha8Rng, depth: usize) -> LtlFormula {
    if depth <= 1 || r.random_bool(0.2) {
        return random_atom(r);
    }
    let sub = |r: &mut ChaCha8Rng| random_formula(r, depth - 1);
    match r.random_range(0..9) {
        0 => LtlFormula::not(sub(r)),
        1 => LtlFormula::and(sub(r), sub(r)),
        2 => LtlFormula::or(sub(r), sub(r)),
        3 => LtlFormula::implies(sub(r), sub(r)),
        4 => LtlFormula::iff(sub(r), sub(r)),
        5 => LtlFormula::next(sub(r)),
        6 => LtlFormula::until(sub(r), sub(r)),
        7 => LtlFormula::globally(sub(r)),
        _ => LtlFormula::finally(sub(r)),
    }
}

pub fn random_trace(r: &mut ChaCha8Rng, max_len: usize) -> Trace {
    let len = r.random_range(1..=max_len);
    let snap = |r: &mut ChaCha8Rng| {
        StateSnapshot(VARS.iter().map(|v| (v.to_string(), Value::Int(*DOMAIN.choose(r).unwrap()))).collect())
    };
    let events = (0..len).map(|_| TraceEvent { pre: snap(r), post: snap(r), label: None }).collect();
    Trace::new(events).unwrap()
}

/// All formulas of depth <= 2 over the given atoms.
pub fn all_small_formulas(atoms: &[LtlFormula]) -> Vec<LtlFormula> {
    let mut out = atoms.to_vec();
    for a in atoms {
        out.push(LtlFormula::not(a.clone()));
        out.push(LtlFormula::next(a.clone()));
        out.push(LtlFormula::globally(a.clone()));
        out.push(LtlFormula::finally(a.clone()));
        for b in atoms {
            out.push(LtlFormula::and(a.clone(), b.clone()));
            out.push(LtlFormula::or(a.clone(), b.clone()));
            out.push(LtlFormula::implies(a.clone(), b.clone()));
            out.push(LtlFormula::iff(a.clone(), b.clone()));
            out.push(LtlFormula::until(a.clone(), b.clone()));
        }
    }
    out
}

/// Boolean atoms `p`, `p'`, `q` and every trace of length 1..=`max_len` over
/// the three bits they read.
pub fn boolean_universe(max_len: usize) -> (Vec<LtlFormula>, Vec<Trace>) {
    let atoms = vec![
        LtlFormula::prop("p"),
        LtlFormula::Atom(Atom::truthy(NumExpr::primed("p"))),
        LtlFormula::prop("q"),
    ];
    let event = |bits: u32| TraceEvent {
        pre: StateSnapshot::from([("p", Value::Bool(bits & 1 != 0)), ("q", Value::Bool(bits & 4 != 0))]),
        post: StateSnapshot::from([("p", Value::Bool(bits & 2 != 0)), ("q", Value::Bool(false))]),
        label: None,
    };
    let mut traces = Vec::new();
    for len in 1..=max_len {
        for code in 0..8u32.pow(len as u32) {
            let events = (0..len).map(|i| event((code >> (3 * i)) & 7)).collect();
            traces.push(Trace::new(events).unwrap());
        }
    }
    (atoms, traces)
}

// ---------------------------------------------------------------------------
// Reference evaluator: the finite-trace semantics written out literally.

fn ref_value(v: Value) -> Option<i128> {
    match v {
        Value::Bool(b) => Some(if b { 1 } else { 0 }),
        Value::Int(i) => Some(i.into()),
        Value::UInt(u) => Some(u.into()),
        Value::Float(_) => None,
    }
}

fn ref_term(t: &NumExpr, e: &TraceEvent) -> i128 {
    match t {
        NumExpr::Var(VarRef { name, primed }) => {
            let snap = if *primed { &e.post } else { &e.pre };
            ref_value(snap.0[name]).expect("integer-valued reference traces")
        }
        NumExpr::Lit(v) => ref_value(*v).expect("integer literal"),
        NumExpr::Add(l, r) => ref_term(l, e) + ref_term(r, e),
        NumExpr::Sub(l, r) => ref_term(l, e) - ref_term(r, e),
    }
}

fn ref_atom(a: &Atom, e: &TraceEvent) -> bool {
    let (l, r) = (ref_term(&a.lhs, e), ref_term(&a.rhs, e));
    match a.op {
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Gt => l > r,
        CmpOp::Ge => l >= r,
    }
}

/// `(trace, i) |= f`.
pub fn ref_sat(f: &LtlFormula, t: &[TraceEvent], i: usize) -> bool {
    let n = t.len();
    match f {
        LtlFormula::Atom(a) => ref_atom(a, &t[i]),
        LtlFormula::Not(g) => !ref_sat(g, t, i),
        LtlFormula::And(l, r) => ref_sat(l, t, i) && ref_sat(r, t, i),
        LtlFormula::Or(l, r) => ref_sat(l, t, i) || ref_sat(r, t, i),
        LtlFormula::Implies(l, r) => !ref_sat(l, t, i) || ref_sat(r, t, i),
        LtlFormula::Iff(l, r) => ref_sat(l, t, i) == ref_sat(r, t, i),
        LtlFormula::Next(g) => i + 1 < n && ref_sat(g, t, i + 1),
        LtlFormula::Until(l, r) => (i..n).any(|k| ref_sat(r, t, k) && (i..k).all(|j| ref_sat(l, t, j))),
        LtlFormula::Globally(g) => (i..n).all(|k| ref_sat(g, t, k)),
        LtlFormula::Finally(g) => (i..n).any(|k| ref_sat(g, t, k)),
    }
}

// ---------------------------------------------------------------------------
// Precedence oracle: random unparenthesised token strings, parsed by
// splitting at the loosest operator.

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Atom(String),
    Unary(&'static str),
    Binary(&'static str),
    Open,
    Close,
}

const ATOMS: [&str; 6] = ["a", "b", "c", "x' >= 2", "y == 19", "TRUE"];
const UNARY: [&str; 4] = ["~", "X", "G", "F"];
const BINARY: [&str; 7] = ["U", "&", "&&", "|", "||", "->", "<->"];

fn gen_operand(r: &mut ChaCha8Rng, depth: usize, out: &mut Vec<Tok>) {
    while r.random_bool(0.3) {
        out.push(Tok::Unary(UNARY.choose(r).unwrap()));
    }
    if depth > 0 && r.random_bool(0.25) {
        out.push(Tok::Open);
        gen_expr(r, depth - 1, out);
        out.push(Tok::Close);
    } else {
        out.push(Tok::Atom(ATOMS.choose(r).unwrap().to_string()));
    }
}

fn gen_expr(r: &mut ChaCha8Rng, depth: usize, out: &mut Vec<Tok>) {
    gen_operand(r, depth, out);
    for _ in 0..r.random_range(0..4) {
        out.push(Tok::Binary(BINARY.choose(r).unwrap()));
        gen_operand(r, depth, out);
    }
}

pub fn random_token_string(r: &mut ChaCha8Rng) -> Vec<Tok> {
    let mut out = Vec::new();
    gen_expr(r, 2, &mut out);
    out
}

pub fn tokens_to_text(toks: &[Tok]) -> String {
    toks.iter()
        .map(|t| match t {
            Tok::Atom(a) => a.as_str(),
            Tok::Unary(s) | Tok::Binary(s) => s,
            Tok::Open => "(",
            Tok::Close => ")",
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Binding levels, loosest first, with associativity (`true` = right).
const LEVELS: [(&[&str], bool); 5] = [
    (&["<->"], false),
    (&["->"], true),
    (&["|", "||"], false),
    (&["&", "&&"], false),
    (&["U"], true),
];

fn build(op: &str, l: LtlFormula, r: LtlFormula) -> LtlFormula {
    match op {
        "<->" => LtlFormula::iff(l, r),
        "->" => LtlFormula::implies(l, r),
        "|" | "||" => LtlFormula::or(l, r),
        "&" | "&&" => LtlFormula::and(l, r),
        _ => LtlFormula::until(l, r),
    }
}

/// Reference parse of a token string produced by `random_token_string`.
pub fn oracle_parse(toks: &[Tok]) -> LtlFormula {
    // Top-level (paren depth 0) binary operator positions.
    let mut depth = 0i32;
    let mut top: Vec<(usize, &str)> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::Open => depth += 1,
            Tok::Close => depth -= 1,
            Tok::Binary(op) if depth == 0 => top.push((i, op)),
            _ => {}
        }
    }
    for (ops, right) in LEVELS {
        let mut at = top.iter().filter(|(_, op)| ops.contains(op));
        let split = if right { at.next() } else { at.next_back() };
        if let Some(&(i, op)) = split {
            return build(op, oracle_parse(&toks[..i]), oracle_parse(&toks[i + 1..]));
        }
    }
    match &toks[0] {
        Tok::Unary(op) => {
            let g = oracle_parse(&toks[1..]);
            match *op {
                "~" => LtlFormula::not(g),
                "X" => LtlFormula::next(g),
                "G" => LtlFormula::globally(g),
                _ => LtlFormula::finally(g),
            }
        }
        Tok::Open => {
            assert_eq!(toks.last(), Some(&Tok::Close), "balanced operand");
            oracle_parse(&toks[1..toks.len() - 1])
        }
        Tok::Atom(a) => {
            assert_eq!(toks.len(), 1, "atom operand");
            parse_ltl(a).expect("atom parses on its own")
        }
        t => panic!("unexpected token {t:?}"),
    }
}

// ---------------------------------------------------------------------------
// Directory snapshots

/// Relative path -> bytes for every file under `root`, skipping `skip`
/// subdirectories.
pub fn tree(root: &Path, skip: &[&str]) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, skip: &[&str], out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            if path.is_dir() {
                if !skip.contains(&rel.as_str()) {
                    walk(root, &path, skip, out);
                }
            } else {
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, skip, &mut out);
    out
}
