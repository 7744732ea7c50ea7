mod common;

use cpcert::bdd::solve;
use cpcert::circuit::{brute_force_count, parse_order, CircuitError, Qdimacs, Quant};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Reference semantics straight from the clause list: enumerate the counted
/// variables, then decide the eliminated blocks variable by variable,
/// outermost first.
fn qbf_count(q: &Qdimacs) -> u64 {
    let counted = q.counted_vars();
    let blocks: Vec<(Quant, u32)> = match q.prefix.first() {
        Some((Quant::Exists, _)) => &q.prefix[1..],
        _ => &q.prefix[..],
    }
    .iter()
    .flat_map(|(k, vs)| vs.iter().map(move |&v| (*k, v)))
    .collect();
    let mut val = vec![false; q.num_vars as usize + 1];
    let mut count = 0;
    for bits in 0u64..1 << counted.len() {
        for (i, &v) in counted.iter().enumerate() {
            val[v as usize] = bits >> i & 1 == 1;
        }
        if decide(q, &blocks, &mut val) {
            count += 1;
        }
    }
    count
}

fn decide(q: &Qdimacs, blocks: &[(Quant, u32)], val: &mut [bool]) -> bool {
    let Some(&(kind, v)) = blocks.first() else {
        return q.clauses.iter().all(|c| c.iter().any(|&l| val[l.unsigned_abs() as usize] == (l > 0)));
    };
    let mut branch = |b: bool| {
        val[v as usize] = b;
        decide(q, &blocks[1..], val)
    };
    match kind {
        Quant::Exists => branch(false) || branch(true),
        Quant::Forall => branch(false) && branch(true),
    }
}

fn parse_err(text: &str) -> CircuitError {
    Qdimacs::parse(text).expect_err(text)
}

#[test]
fn random_instances_match_the_clause_semantics() {
    let mut rng = ChaCha20Rng::seed_from_u64(51);
    for i in 0..300 {
        let n = 1 + i % 9;
        let text = common::random_qdimacs(&mut rng, n, 1 + (i as usize % 17), 3, i % 3 != 0);
        let q = Qdimacs::parse(&text).unwrap();
        let dag = q.to_dag(None).unwrap();
        let want = BigUint::from(qbf_count(&q));
        assert_eq!(solve(&dag).count, want, "{text}");
        assert_eq!(brute_force_count(&dag).unwrap(), want, "{text}");
    }
}

#[test]
fn any_order_gives_the_same_count() {
    let mut rng = ChaCha20Rng::seed_from_u64(52);
    for i in 0..100 {
        let text = common::random_qdimacs(&mut rng, 6, 10, 3, i % 2 == 0);
        let q = Qdimacs::parse(&text).unwrap();
        let want = solve(&q.to_dag(None).unwrap()).count;
        let mut order = q.default_order();
        order.reverse();
        assert_eq!(solve(&q.to_dag(Some(&order)).unwrap()).count, want, "{text}");
    }
}

#[test]
fn display_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(53);
    for _ in 0..50 {
        let q = Qdimacs::parse(&common::random_qdimacs(&mut rng, 7, 9, 3, true)).unwrap();
        assert_eq!(Qdimacs::parse(&q.to_string()).unwrap(), q);
    }
}

#[test]
fn outermost_existential_block_is_counted() {
    let q = Qdimacs::parse("p cnf 4 1\ne 1 2 0\na 3 0\ne 4 0\n1 3 4 0\n").unwrap();
    assert_eq!(q.counted_vars(), vec![1, 2]);
    let q = Qdimacs::parse("p cnf 3 1\na 1 0\ne 2 0\n1 2 3 0\n").unwrap();
    assert_eq!(q.counted_vars(), vec![3]);
}

#[test]
fn adjacent_blocks_of_one_kind_merge() {
    let q = Qdimacs::parse("p cnf 3 1\ne 1 0\ne 2 0\na 3 0\n1 2 3 0\n").unwrap();
    assert_eq!(q.prefix, vec![(Quant::Exists, vec![1, 2]), (Quant::Forall, vec![3])]);
    assert_eq!(q.counted_vars(), vec![1, 2]);
}

#[test]
fn clauses_may_span_lines() {
    let q = Qdimacs::parse("p cnf 3 2\n1 2\n3 0 -1\n0\n").unwrap();
    assert_eq!(q.clauses, vec![vec![1, 2, 3], vec![-1]]);
}

#[test]
fn malformed_input_is_reported_with_a_line() {
    for (text, line) in [
        ("", 1),
        ("1 2 0\n", 1),
        ("p dnf 2 1\n", 1),
        ("p cnf 2\n", 1),
        ("p cnf 2 1\np cnf 2 1\n", 2),
        ("p cnf 2 1\n1 3 0\n", 2),
        ("p cnf 2 1\n1 x 0\n", 2),
        ("p cnf 2 1\n1 2\n", 2),
        ("p cnf 2 1\na 1\n1 0\n", 2),
        ("p cnf 2 1\na 1 0\ne 1 0\n2 0\n", 3),
        ("p cnf 2 1\n1 0\na 2 0\n", 3),
    ] {
        match parse_err(text) {
            CircuitError::Parse { line: l, .. } => assert_eq!(l, line, "{text:?}"),
            e => panic!("{text:?}: {e}"),
        }
    }
}

#[test]
fn bad_orders_are_refused() {
    let q = Qdimacs::parse("p cnf 3 1\n1 2 3 0\n").unwrap();
    for order in [vec![1, 2], vec![1, 2, 2], vec![1, 2, 4], vec![0, 1, 2]] {
        assert!(matches!(q.to_dag(Some(&order)), Err(CircuitError::BadOrder(_))), "{order:?}");
    }
    assert_eq!(parse_order("c root first\n3 1\n2\n").unwrap(), vec![3, 1, 2]);
    assert!(parse_order("3 -1 2").is_err());
}
