//! Oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use cpcert::circuit::{random::random_cpe, random::RandomCpeParams, CpeDag, NodeId, NodeKind, Qdimacs};
use cpcert::FieldElem;
use num_bigint::BigUint;
use rand::Rng;

/// Arithmetisation of the circuit evaluated straight from the node kinds,
/// at a point indexed by level. Knows nothing about BDDs.
pub fn arith(dag: &CpeDag, id: NodeId, point: &[FieldElem]) -> FieldElem {
    let mut pt = point.to_vec();
    arith_in(dag, id, &mut pt, &mut HashMap::new())
}

fn arith_in(dag: &CpeDag, id: NodeId, pt: &mut Vec<FieldElem>, memo: &mut HashMap<NodeId, FieldElem>) -> FieldElem {
    if let Some(&v) = memo.get(&id) {
        return v;
    }
    let one = FieldElem::ONE;
    let v = match dag.kind(id) {
        NodeKind::True => one,
        NodeKind::False => FieldElem::ZERO,
        NodeKind::Var(l) => pt[l as usize],
        NodeKind::Not(c) => one - arith_in(dag, c, pt, memo),
        NodeKind::And(a, b) => arith_in(dag, a, pt, memo) * arith_in(dag, b, pt, memo),
        NodeKind::Or(a, b) => {
            let (x, y) = (arith_in(dag, a, pt, memo), arith_in(dag, b, pt, memo));
            x + y - x * y
        }
        NodeKind::PEval { var, value, child } => {
            // The substituted point is a different context: fresh memo.
            let saved = pt[var as usize];
            pt[var as usize] = FieldElem::from_bool(value);
            let v = arith_in(dag, child, pt, &mut HashMap::new());
            pt[var as usize] = saved;
            v
        }
    };
    memo.insert(id, v);
    v
}

/// Model count by enumerating the counted levels and evaluating the
/// arithmetisation at 0/1 points.
pub fn oracle_count(dag: &CpeDag) -> BigUint {
    let levels: Vec<u32> = dag.counted().iter_asc().collect();
    assert!(levels.len() <= 20, "oracle enumeration too large");
    let mut pt = vec![FieldElem::ZERO; dag.num_levels() as usize + 1];
    let mut count = BigUint::from(0u32);
    for bits in 0u64..1 << levels.len() {
        for (i, &l) in levels.iter().enumerate() {
            pt[l as usize] = FieldElem::from_bool(bits >> i & 1 == 1);
        }
        let v = arith(dag, dag.root(), &pt);
        assert!(v == FieldElem::ZERO || v == FieldElem::ONE, "non-binary value at a binary point");
        if v == FieldElem::ONE {
            count += 1u32;
        }
    }
    count
}

pub fn random_dag<R: Rng>(rng: &mut R, max_vars: u32, max_nodes: usize) -> CpeDag {
    let num_vars = rng.gen_range(1..=max_vars);
    random_cpe(rng, &RandomCpeParams { num_vars, max_nodes, ..Default::default() })
}

/// Random k-CNF with an optional random quantifier prefix, as QDIMACS text.
pub fn random_qdimacs<R: Rng>(rng: &mut R, n: u32, m: usize, k: usize, quantified: bool) -> String {
    let mut s = format!("p cnf {n} {m}\n");
    if quantified && n >= 2 {
        let mut vars: Vec<u32> = (1..=n).collect();
        for i in (1..vars.len()).rev() {
            vars.swap(i, rng.gen_range(0..=i));
        }
        let mut forall = rng.gen_bool(0.5);
        let mut rest = &vars[..rng.gen_range(1..n as usize)];
        while !rest.is_empty() {
            let take = rng.gen_range(1..=rest.len());
            let block: Vec<String> = rest[..take].iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{} {} 0", if forall { "a" } else { "e" }, block.join(" "));
            rest = &rest[take..];
            forall = !forall;
        }
    }
    for _ in 0..m {
        let mut c: Vec<i64> = Vec::new();
        while c.len() < k.min(n as usize) {
            let v = rng.gen_range(1..=n) as i64;
            if c.iter().any(|l| l.abs() == v) {
                continue;
            }
            c.push(if rng.gen_bool(0.5) { v } else { -v });
        }
        for l in c {
            let _ = write!(s, "{l} ");
        }
        s.push_str("0\n");
    }
    s
}

pub fn dag_of(text: &str) -> CpeDag {
    Qdimacs::parse(text).expect("valid QDIMACS").to_dag(None).expect("valid order")
}

/// Domino-style family: a chain of implications and of three-literal links
/// over `n` variables, so the circuit grows linearly in `n`. The top eighth
/// of the variables is universally quantified and the bottom eighth
/// existentially, which keeps the counted set below the field guard.
pub fn domino(n: u32) -> String {
    assert!(n >= 8);
    let q = n / 8;
    let mut s = format!("p cnf {n} {}\n", 2 * (n - 1));
    let counted: Vec<String> = (q + 1..=n - q).map(|v| v.to_string()).collect();
    let _ = writeln!(s, "e {} 0", counted.join(" "));
    let top: Vec<String> = (n - q + 1..=n).map(|v| v.to_string()).collect();
    let _ = writeln!(s, "a {} 0", top.join(" "));
    let bottom: Vec<String> = (1..=q).map(|v| v.to_string()).collect();
    let _ = writeln!(s, "e {} 0", bottom.join(" "));
    for i in 1..n {
        let _ = writeln!(s, "-{i} {} 0", i + 1);
        let j = if i + 2 <= n { i + 2 } else { 1 };
        let _ = writeln!(s, "{i} -{} {j} 0", i + 1);
    }
    s
}

/// The QDIMACS files shipped with the tests.
pub fn data_files() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .expect("tests/data exists")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "qdimacs"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).expect("readable"))
        })
        .collect();
    out.sort();
    out
}

/// Data files plus random quantified CNFs with at most ten variables, `total`
/// instances in all.
pub fn qdimacs_corpus<R: Rng>(rng: &mut R, total: usize) -> Vec<(String, CpeDag)> {
    let mut out: Vec<(String, CpeDag)> = data_files().into_iter().map(|(n, t)| (n, dag_of(&t))).collect();
    let mut i = 0;
    while out.len() < total {
        let n = rng.gen_range(3..=10);
        let m = rng.gen_range(n as usize..=3 * n as usize);
        let text = random_qdimacs(rng, n, m, 3, i % 4 != 0);
        out.push((format!("random-{i}"), dag_of(&text)));
        i += 1;
    }
    out
}
