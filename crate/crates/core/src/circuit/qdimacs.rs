//! QDIMACS input.
//!
//! Variables of the outermost existential block, and variables that are
//! not quantified at all, are counted. All other blocks are eliminated with
//! the quantifier macros, innermost block first.

use std::fmt;

use super::dag::{CpeDag, NodeId};
use super::varset::VarSet;
use super::CircuitError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Quant {
    Exists,
    Forall,
}

/// A parsed QDIMACS problem. Variable names are the 1-based file indices.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Qdimacs {
    pub num_vars: u32,
    pub prefix: Vec<(Quant, Vec<u32>)>,
    pub clauses: Vec<Vec<i32>>,
}

fn err(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, msg: msg.into() }
}

fn parse_int(tok: &str, line: usize) -> Result<i64, CircuitError> {
    tok.parse::<i64>().map_err(|_| err(line, format!("expected an integer, found {tok:?}")))
}

impl Qdimacs {
    pub fn parse(text: &str) -> Result<Qdimacs, CircuitError> {
        let mut header: Option<(u32, usize)> = None;
        let mut q = Qdimacs::default();
        let mut quantified = VarSet::new();
        let mut current: Vec<i32> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('c') {
                continue;
            }
            if t.starts_with('%') {
                break;
            }
            let mut toks = t.split_whitespace();
            let first = toks.next().unwrap_or_default();
            if first == "p" {
                if header.is_some() {
                    return Err(err(line, "duplicate problem line"));
                }
                let fmt = toks.next();
                if fmt != Some("cnf") {
                    return Err(err(line, "expected \"p cnf <vars> <clauses>\""));
                }
                let v = toks.next().ok_or_else(|| err(line, "missing variable count"))?;
                let c = toks.next().ok_or_else(|| err(line, "missing clause count"))?;
                if toks.next().is_some() {
                    return Err(err(line, "trailing tokens after problem line"));
                }
                let v = parse_int(v, line)?;
                let c = parse_int(c, line)?;
                if !(0..=u32::MAX as i64 / 2).contains(&v) || c < 0 {
                    return Err(err(line, "counts must be non-negative"));
                }
                header = Some((v as u32, c as usize));
                q.num_vars = v as u32;
                continue;
            }
            let Some((num_vars, _)) = header else {
                return Err(err(line, "missing problem line before data"));
            };
            if first == "a" || first == "e" {
                if !q.clauses.is_empty() || !current.is_empty() {
                    return Err(err(line, "quantifier line after clauses"));
                }
                let kind = if first == "a" { Quant::Forall } else { Quant::Exists };
                let mut vars = Vec::new();
                let mut terminated = false;
                for tok in toks {
                    if terminated {
                        return Err(err(line, "tokens after terminating 0"));
                    }
                    let v = parse_int(tok, line)?;
                    if v == 0 {
                        terminated = true;
                        continue;
                    }
                    if v < 0 || v > num_vars as i64 {
                        return Err(err(line, format!("variable {v} out of range 1..={num_vars}")));
                    }
                    let v = v as u32;
                    if quantified.contains(v) {
                        return Err(err(line, format!("variable {v} quantified twice")));
                    }
                    quantified.insert(v);
                    vars.push(v);
                }
                if !terminated {
                    return Err(err(line, "quantifier line not terminated by 0"));
                }
                // Adjacent blocks of one kind form a single block.
                match q.prefix.last_mut() {
                    Some((k, block)) if *k == kind => block.extend(vars),
                    _ => q.prefix.push((kind, vars)),
                }
                continue;
            }
            for tok in std::iter::once(first).chain(toks) {
                let lit = parse_int(tok, line)?;
                if lit == 0 {
                    q.clauses.push(std::mem::take(&mut current));
                    continue;
                }
                if lit.unsigned_abs() > num_vars as u64 {
                    return Err(err(line, format!("literal {lit} out of range 1..={num_vars}")));
                }
                current.push(lit as i32);
            }
        }
        if header.is_none() {
            return Err(err(last_line.max(1), "missing problem line"));
        }
        if !current.is_empty() {
            return Err(err(last_line, "last clause not terminated by 0"));
        }
        Ok(q)
    }

    /// Names of the counted variables, ascending.
    pub fn counted_vars(&self) -> Vec<u32> {
        let mut quantified = VarSet::new();
        for (i, (kind, vars)) in self.prefix.iter().enumerate() {
            if i == 0 && *kind == Quant::Exists {
                continue;
            }
            vars.iter().for_each(|&v| quantified.insert(v));
        }
        (1..=self.num_vars).filter(|&v| !quantified.contains(v)).collect()
    }

    fn eliminated_blocks(&self) -> &[(Quant, Vec<u32>)] {
        match self.prefix.first() {
            Some((Quant::Exists, _)) => &self.prefix[1..],
            _ => &self.prefix[..],
        }
    }

    /// Default variable order, listed from the root level downward: counted
    /// variables first, then the eliminated blocks from outermost to
    /// innermost. Within a group, higher indices sit higher.
    pub fn default_order(&self) -> Vec<u32> {
        let mut order: Vec<u32> = self.counted_vars().into_iter().rev().collect();
        for (_, vars) in self.eliminated_blocks() {
            let mut vs = vars.clone();
            vs.sort_unstable_by(|a, b| b.cmp(a));
            order.extend(vs);
        }
        order
    }

    /// Builds the circuit. `order` lists every variable once, root level first.
    pub fn to_dag(&self, order: Option<&[u32]>) -> Result<CpeDag, CircuitError> {
        let default;
        let order = match order {
            Some(o) => o,
            None => {
                default = self.default_order();
                &default
            }
        };
        let n = self.num_vars;
        if order.len() != n as usize {
            return Err(CircuitError::BadOrder(format!("order lists {} variables, expected {n}", order.len())));
        }
        let mut level_of = vec![0u32; n as usize + 1];
        let mut names = vec![0u32; n as usize + 1];
        for (pos, &v) in order.iter().enumerate() {
            if v == 0 || v > n {
                return Err(CircuitError::BadOrder(format!("variable {v} out of range")));
            }
            if level_of[v as usize] != 0 {
                return Err(CircuitError::BadOrder(format!("variable {v} listed twice")));
            }
            let level = n - pos as u32;
            level_of[v as usize] = level;
            names[level as usize] = v;
        }

        let mut dag = CpeDag::new(n);
        dag.set_names(names);
        let mut clause_nodes = Vec::with_capacity(self.clauses.len());
        for clause in &self.clauses {
            let lits: Vec<NodeId> = clause
                .iter()
                .map(|&lit| {
                    let x = dag.var(level_of[lit.unsigned_abs() as usize]);
                    if lit < 0 {
                        dag.not(x)
                    } else {
                        x
                    }
                })
                .collect();
            clause_nodes.push(dag.or_all(&lits));
        }
        let mut root = dag.and_all(&clause_nodes);
        for (kind, vars) in self.eliminated_blocks().iter().rev() {
            for &v in vars {
                let l = level_of[v as usize];
                root = match kind {
                    Quant::Forall => dag.forall(l, root),
                    Quant::Exists => dag.exists(l, root),
                };
            }
        }
        dag.set_root(root);
        let counted: VarSet = self.counted_vars().into_iter().map(|v| level_of[v as usize]).collect();
        dag.set_counted(counted)?;
        Ok(dag)
    }
}

impl fmt::Display for Qdimacs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for (kind, vars) in &self.prefix {
            write!(f, "{}", if *kind == Quant::Forall { "a" } else { "e" })?;
            for v in vars {
                write!(f, " {v}")?;
            }
            writeln!(f, " 0")?;
        }
        for c in &self.clauses {
            for lit in c {
                write!(f, "{lit} ")?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Parses and builds with the default order.
pub fn parse_qdimacs(text: &str) -> Result<CpeDag, CircuitError> {
    Qdimacs::parse(text)?.to_dag(None)
}

/// Parses an order file: whitespace-separated variable indices, root level
/// first. Lines starting with `c` are comments.
pub fn parse_order(text: &str) -> Result<Vec<u32>, CircuitError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.starts_with('c') {
            continue;
        }
        for tok in t.split_whitespace() {
            let v = parse_int(tok, idx + 1)?;
            if v <= 0 || v > u32::MAX as i64 {
                return Err(err(idx + 1, format!("invalid variable {v}")));
            }
            out.push(v as u32);
        }
    }
    Ok(out)
}
