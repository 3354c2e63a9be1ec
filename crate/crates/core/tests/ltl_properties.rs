mod common;

use common::*;
use ipverify_core::monitor::{evaluate, Trace, DEFAULT_EPS};
use ipverify_core::{collect_vars, parse_ltl, render_ltl, LtlFormula};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn holds(f: &LtlFormula, t: &Trace) -> bool {
    evaluate(f, t, DEFAULT_EPS).expect("generated traces define every variable").holds()
}

#[test]
fn precedence_matches_reference_parser() {
    let mut r = rng(7);
    for _ in 0..2000 {
        let toks = random_token_string(&mut r);
        let text = tokens_to_text(&toks);
        let got = parse_ltl(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(got, oracle_parse(&toks), "{text}");
    }
}

#[test]
fn evaluator_matches_reference_on_random_cases() {
    let mut r = rng(11);
    for _ in 0..10_000 {
        let f = random_formula(&mut r, 4);
        let t = random_trace(&mut r, 6);
        assert_eq!(holds(&f, &t), ref_sat(&f, &t.events, 0), "{} on {}", render_ltl(&f), t.to_jsonl());
    }
}

#[test]
fn evaluator_matches_reference_exhaustively() {
    let (atoms, traces) = boolean_universe(3);
    for f in all_small_formulas(&atoms) {
        for t in &traces {
            assert_eq!(holds(&f, t), ref_sat(&f, &t.events, 0), "{} on {}", render_ltl(&f), t.to_jsonl());
        }
    }
}

#[test]
fn temporal_laws_on_random_cases() {
    let mut r = rng(13);
    for _ in 0..10_000 {
        let (phi, psi) = (random_formula(&mut r, 4), random_formula(&mut r, 4));
        let t = random_trace(&mut r, 6);
        let g = LtlFormula::globally(phi.clone());
        let not_f_not = LtlFormula::not(LtlFormula::finally(LtlFormula::not(phi.clone())));
        assert_eq!(holds(&g, &t), holds(&not_f_not, &t));
        let f = LtlFormula::finally(phi.clone());
        assert_eq!(holds(&f, &t), holds(&LtlFormula::until(LtlFormula::constant(true), phi.clone()), &t));
        let u = LtlFormula::until(phi.clone(), psi.clone());
        let expansion = LtlFormula::or(psi.clone(), LtlFormula::and(phi.clone(), LtlFormula::next(u.clone())));
        assert_eq!(holds(&u, &t), holds(&expansion, &t), "{}", render_ltl(&u));
    }
}

fn g_free(f: &LtlFormula) -> bool {
    match f {
        LtlFormula::Atom(_) => true,
        LtlFormula::Globally(_) => false,
        LtlFormula::Not(g) | LtlFormula::Next(g) | LtlFormula::Finally(g) => g_free(g),
        LtlFormula::And(l, r)
        | LtlFormula::Or(l, r)
        | LtlFormula::Implies(l, r)
        | LtlFormula::Iff(l, r)
        | LtlFormula::Until(l, r) => g_free(l) && g_free(r),
    }
}

/// Negation can hide a G (`~F~p`); only positive bodies are monotone.
fn positive(f: &LtlFormula) -> bool {
    match f {
        LtlFormula::Atom(_) => true,
        LtlFormula::Not(_) | LtlFormula::Implies(..) | LtlFormula::Iff(..) => false,
        LtlFormula::Next(g) | LtlFormula::Finally(g) | LtlFormula::Globally(g) => positive(g),
        LtlFormula::And(l, r) | LtlFormula::Or(l, r) | LtlFormula::Until(l, r) => positive(l) && positive(r),
    }
}

#[test]
fn eventually_survives_trace_extension() {
    let mut r = rng(17);
    let mut checked = 0;
    while checked < 2000 {
        let body = random_formula(&mut r, 3);
        if !g_free(&body) || !positive(&body) {
            continue;
        }
        let f = LtlFormula::finally(body);
        let t = random_trace(&mut r, 4);
        if !holds(&f, &t) {
            continue;
        }
        let tail = random_trace(&mut r, 3);
        let mut events = t.events.clone();
        events.extend(tail.events);
        assert!(holds(&f, &Trace::new(events).unwrap()), "{}", render_ltl(&f));
        checked += 1;
    }
}

fn arb_formula() -> impl Strategy<Value = LtlFormula> {
    (any::<u64>(), 1usize..=6).prop_map(|(seed, depth)| random_formula(&mut ChaCha8Rng::seed_from_u64(seed), depth))
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(f in arb_formula()) {
        prop_assert_eq!(parse_ltl(&render_ltl(&f)).unwrap(), f);
    }

    #[test]
    fn parser_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_ltl(&text) {
            prop_assert!(e.position <= text.len());
        }
    }

    #[test]
    fn parser_is_total_on_operator_soup(
        parts in proptest::collection::vec(
            prop::sample::select(vec!["G", "F", "X", "U", "~", "&", "|", "->", "<->", "(", ")", "a", "b'", "1", "==", "+", "TRUE"]),
            0..24,
        )
    ) {
        let text = parts.join(" ");
        if let Err(e) = parse_ltl(&text) {
            prop_assert!(e.position <= text.len());
        }
    }

    #[test]
    fn conjunction_only_adds_variables(f in arb_formula(), g in arb_formula()) {
        let both = collect_vars(&LtlFormula::and(f.clone(), g));
        prop_assert!(collect_vars(&f).is_subset(&both));
    }

    #[test]
    fn evaluation_is_pure(f in arb_formula(), seed in any::<u64>()) {
        let t = random_trace(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        prop_assert_eq!(evaluate(&f, &t, DEFAULT_EPS), evaluate(&f, &t, DEFAULT_EPS));
    }
}
