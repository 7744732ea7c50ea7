use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::channel::Endpoint;
use super::message::{Message, MessageKind, RejectReason, NO_VAR, VERDICT_ORDINAL};
use super::{restrict, setup_guard, Verdict};
use crate::bdd::BinOp;
use crate::circuit::{Cpd, CpdRef, CpeDag, NodeKind};
use crate::field::FieldElem;
use crate::unipoly::UniPoly;

/// `[sigma] [[psi]] = k`, with `sigma` aligned to the node's free levels
/// (highest first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub sigma: Vec<FieldElem>,
    pub k: FieldElem,
}

/// Counters kept by the verifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifierStats {
    pub challenges: u64,
    pub draws: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierReport {
    pub verdict: Verdict,
    pub stats: VerifierStats,
}

type Step<T> = Result<T, (RejectReason, u32)>;

struct Verifier<'a, E: Endpoint + ?Sized> {
    dag: &'a CpeDag,
    cpd: Cpd,
    ep: &'a mut E,
    rng: ChaCha20Rng,
    pending: Option<FieldElem>,
    claims: Vec<Vec<Claim>>,
    stats: VerifierStats,
}

/// Runs the verifier against a prover on `ep` and sends the verdict.
///
/// Channel failures and malformed messages end the run with
/// [`RejectReason::ProtocolViolation`].
pub fn verifier_run<E: Endpoint + ?Sized>(dag: &CpeDag, ep: &mut E, seed: u64) -> VerifierReport {
    if setup_guard(dag).is_err() {
        let verdict = Verdict::Reject { reason: RejectReason::SetupGuard, ordinal: VERDICT_ORDINAL };
        let _ = ep.send(&verdict.to_message().encode());
        return VerifierReport { verdict, stats: VerifierStats::default() };
    }
    let cpd = Cpd::new(dag);
    let claims = vec![Vec::new(); cpd.len()];
    let mut v = Verifier {
        dag,
        cpd,
        ep,
        rng: ChaCha20Rng::seed_from_u64(seed),
        pending: None,
        claims,
        stats: VerifierStats::default(),
    };
    let verdict = match v.run() {
        Ok(count) => Verdict::Accept { count },
        Err((reason, ordinal)) => Verdict::Reject { reason, ordinal },
    };
    let _ = v.ep.send(&verdict.to_message().encode());
    VerifierReport { verdict, stats: v.stats }
}

impl<E: Endpoint + ?Sized> Verifier<'_, E> {
    fn run(&mut self) -> Step<FieldElem> {
        let root = self.dag.root();
        let k = self.ask_value(0)?;
        let sigma = vec![FieldElem::HALF; self.cpd.free_levels(root).len()];
        self.claims[0].push(Claim { sigma, k });
        for ord in 0..self.cpd.len() as u32 {
            self.process(ord)?;
        }
        debug_assert!(self.claims.iter().all(Vec::is_empty));
        Ok(k * FieldElem::pow2(self.dag.num_counted() as u64))
    }

    fn process(&mut self, ord: u32) -> Step<()> {
        let r = self.cpd.get(ord).expect("ordinal in range");
        let mut claims = std::mem::take(&mut self.claims[ord as usize]);
        let Some(first) = claims.first() else {
            debug_assert!(false, "reachable reference without claims");
            return Ok(());
        };
        let width = first.sigma.len();

        // Merge: unify the points one level at a time, highest first.
        if claims.len() > 1 {
            for pos in 0..width {
                let s0 = claims[0].sigma[pos];
                if claims.iter().all(|c| c.sigma[pos] == s0) {
                    continue;
                }
                let var = self.cpd.free_levels(r.node)[pos];
                let mut polys = Vec::with_capacity(claims.len());
                for c in &claims {
                    let p = self.ask_poly(ord, var)?;
                    if p.eval(c.sigma[pos]) != c.k {
                        return Err((RejectReason::MergePoly, ord));
                    }
                    polys.push(p);
                }
                let x = self.draw();
                for (c, p) in claims.iter_mut().zip(&polys) {
                    c.sigma[pos] = x;
                    c.k = p.eval(x);
                }
            }
            if claims.iter().any(|c| c.k != claims[0].k) {
                return Err((RejectReason::MergeMismatch, ord));
            }
        }
        let Claim { mut sigma, k } = claims.swap_remove(0);

        if r.red > 0 {
            let pos = r.red as usize - 1;
            let var = self.cpd.free_levels(r.node)[pos];
            let child = self.ordinal(CpdRef::new(r.node, r.red - 1));
            let p = self.ask_poly(child, var)?;
            if p.degree_reduce().eval(sigma[pos]) != k {
                return Err((RejectReason::Reduction, ord));
            }
            let x = self.draw();
            sigma[pos] = x;
            self.claims[child as usize].push(Claim { sigma, k: p.eval(x) });
            return Ok(());
        }

        let levels = self.cpd.free_levels(r.node);
        match self.dag.kind(r.node) {
            NodeKind::True | NodeKind::False | NodeKind::Var(_) => {
                let want = match self.dag.kind(r.node) {
                    NodeKind::True => FieldElem::ONE,
                    NodeKind::False => FieldElem::ZERO,
                    _ => sigma[0],
                };
                if k != want {
                    return Err((RejectReason::Leaf, ord));
                }
            }
            NodeKind::Not(c) => {
                let child = self.ordinal(self.cpd.top(self.dag, c));
                self.claims[child as usize].push(Claim { sigma, k: FieldElem::ONE - k });
            }
            NodeKind::PEval { var, value, child } => {
                let s = restrict(levels, &sigma, self.cpd.free_levels(child), Some((var, FieldElem::from_bool(value))));
                let c = self.ordinal(self.cpd.top(self.dag, child));
                self.claims[c as usize].push(Claim { sigma: s, k });
            }
            NodeKind::And(a, b) | NodeKind::Or(a, b) => {
                let op = if matches!(self.dag.kind(r.node), NodeKind::And(..)) { BinOp::And } else { BinOp::Or };
                let (oa, ob) = (self.ordinal(self.cpd.top(self.dag, a)), self.ordinal(self.cpd.top(self.dag, b)));
                let sa = restrict(levels, &sigma, self.cpd.free_levels(a), None);
                let sb = restrict(levels, &sigma, self.cpd.free_levels(b), None);
                let ka = self.ask_value(oa)?;
                let kb = self.ask_value(ob)?;
                if op.eval_field(ka, kb) != k {
                    return Err((RejectReason::Operator, ord));
                }
                self.claims[oa as usize].push(Claim { sigma: sa, k: ka });
                self.claims[ob as usize].push(Claim { sigma: sb, k: kb });
            }
        }
        Ok(())
    }

    fn ordinal(&self, r: CpdRef) -> u32 {
        self.cpd.ordinal(r).expect("child of a reachable reference is reachable")
    }

    fn draw(&mut self) -> FieldElem {
        let x = FieldElem::random(&mut self.rng);
        self.stats.draws += 1;
        debug_assert!(self.pending.is_none(), "two draws without a message in between");
        self.pending = Some(x);
        x
    }

    fn challenge(&mut self, ord: u32, var: u16) -> Step<()> {
        let kind = match self.pending.take() {
            Some(x) => MessageKind::ChallengeReveal(x),
            None => MessageKind::Challenge,
        };
        self.stats.challenges += 1;
        self.ep.send(&Message::new(kind, ord, var).encode()).map_err(|_| (RejectReason::ProtocolViolation, ord))
    }

    fn answer(&mut self, ord: u32, var: u16) -> Step<MessageKind> {
        let violation = (RejectReason::ProtocolViolation, ord);
        let frame = self.ep.recv().map_err(|_| violation)?;
        let msg = Message::decode(&frame).map_err(|_| violation)?;
        if msg.kind == MessageKind::Abort {
            return Err((RejectReason::ProverAbort, ord));
        }
        if msg.ordinal != ord || msg.var != var {
            return Err(violation);
        }
        Ok(msg.kind)
    }

    fn ask_value(&mut self, ord: u32) -> Step<FieldElem> {
        self.challenge(ord, NO_VAR)?;
        match self.answer(ord, NO_VAR)? {
            MessageKind::Value(v) => Ok(v),
            _ => Err((RejectReason::ProtocolViolation, ord)),
        }
    }

    fn ask_poly(&mut self, ord: u32, var: u32) -> Step<UniPoly> {
        let var = var as u16;
        self.challenge(ord, var)?;
        match self.answer(ord, var)? {
            MessageKind::Poly(p) => Ok(p),
            _ => Err((RejectReason::ProtocolViolation, ord)),
        }
    }
}
