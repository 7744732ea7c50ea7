use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::channel::Endpoint;
use super::message::{Message, MessageKind, NO_VAR};
use super::restrict;
use crate::bdd::{build_bottom_up, BddArena, BddEvaluator, BddRef};
use crate::circuit::{Cpd, CpdRef, CpeDag, NodeId, NodeKind};
use crate::ebdd::{compute_ebdd, ChainCache, EbddDiffLog, EbddEvaluator};
use crate::field::FieldElem;
use crate::unipoly::UniPoly;

/// Deliberate deviations from the honest strategy, used to exercise
/// soundness. Answer indices count every value and polynomial sent, starting
/// with the initial value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Corruption {
    #[default]
    None,
    /// Claim one more than the true initial value.
    FlipInitialK,
    /// Add one to a value, or to the constant term of a polynomial.
    AddOneAt(u64),
    /// Replace the answer with a different random one drawn from `seed`.
    RandomAt { index: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProverConfig {
    /// Answer degree-reduction chains incrementally instead of evaluating
    /// every view from scratch.
    pub opt_eval: bool,
    pub corruption: Corruption,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProverReport {
    pub answers: u64,
    /// Time spent building BDDs and eBDD logs.
    pub build_ms: f64,
    /// Time spent computing answers, excluding time blocked on the channel.
    pub answer_ms: f64,
    /// Whether the prover stopped because it could not follow the verifier.
    pub aborted: bool,
}

/// BDDs for every node plus the eBDD log of every binary node.
pub struct ProverState {
    pub arena: BddArena,
    pub bdds: Vec<BddRef>,
    pub logs: Vec<Option<EbddDiffLog>>,
}

impl ProverState {
    pub fn build(dag: &CpeDag) -> Self {
        let mut arena = BddArena::new();
        let n = dag.num_levels();
        let mut logs: Vec<Option<EbddDiffLog>> = (0..dag.arena_len()).map(|_| None).collect();
        let bdds = build_bottom_up(dag, &mut arena, |arena, id, op, u, v| {
            let log = compute_ebdd(arena, op, u, v, n);
            let f = log.final_bdd();
            logs[id.index()] = Some(log);
            f
        });
        ProverState { arena, bdds, logs }
    }
}

enum Stop {
    Verdict,
    Abort,
}

struct Prover<'a, E: Endpoint + ?Sized> {
    dag: &'a CpeDag,
    cpd: Cpd,
    st: &'a ProverState,
    ep: &'a mut E,
    cfg: ProverConfig,
    lookahead: Option<Message>,
    sigmas: Vec<Vec<Vec<FieldElem>>>,
    answers: u64,
    dense: Vec<FieldElem>,
    bdd_ev: BddEvaluator,
    e_ev: EbddEvaluator,
    /// Node whose chain the cache is on, if any.
    chain: Option<NodeId>,
    cache: ChainCache,
}

/// Builds the prover state and answers the verifier on `ep` until a verdict
/// arrives.
pub fn prover_run<E: Endpoint + ?Sized>(dag: &CpeDag, ep: &mut E, cfg: ProverConfig) -> ProverReport {
    let t = Instant::now();
    let st = ProverState::build(dag);
    let build_ms = t.elapsed().as_secs_f64() * 1e3;
    let mut report = prover_answer(dag, &st, ep, cfg);
    report.build_ms = build_ms;
    report
}

/// The answering phase on a prebuilt state.
pub fn prover_answer<E: Endpoint + ?Sized>(
    dag: &CpeDag,
    st: &ProverState,
    ep: &mut E,
    cfg: ProverConfig,
) -> ProverReport {
    let t = Instant::now();
    let blocked0 = ep.blocked();
    let cpd = Cpd::new(dag);
    let sigmas = vec![Vec::new(); cpd.len()];
    let mut p = Prover {
        dag,
        cpd,
        st,
        ep,
        cfg,
        lookahead: None,
        sigmas,
        answers: 0,
        dense: vec![FieldElem::ZERO; dag.num_levels() as usize + 1],
        bdd_ev: BddEvaluator::new(),
        e_ev: EbddEvaluator::new(),
        chain: None,
        cache: ChainCache::new(),
    };
    let aborted = match p.run() {
        Ok(()) | Err(Stop::Verdict) => false,
        Err(Stop::Abort) => {
            let _ = p.ep.send(&Message::new(MessageKind::Abort, 0, NO_VAR).encode());
            true
        }
    };
    let blocked = p.ep.blocked() - blocked0;
    ProverReport {
        answers: p.answers,
        build_ms: 0.0,
        answer_ms: t.elapsed().saturating_sub(blocked).as_secs_f64() * 1e3,
        aborted,
    }
}

impl<E: Endpoint + ?Sized> Prover<'_, E> {
    fn run(&mut self) -> Result<(), Stop> {
        let root = self.dag.root();
        let sigma = vec![FieldElem::HALF; self.cpd.free_levels(root).len()];
        self.expect(0, NO_VAR)?;
        let v = self.eval_ref(self.cpd.get(0).expect("root"), &sigma, None);
        self.send_value(0, v.c0)?;
        self.sigmas[0].push(sigma);
        for ord in 0..self.cpd.len() as u32 {
            self.process(ord)?;
        }
        // Only the verdict can follow.
        match self.next() {
            Err(stop) => Err(stop),
            Ok(_) => Err(Stop::Abort),
        }
    }

    fn process(&mut self, ord: u32) -> Result<(), Stop> {
        let r = self.cpd.get(ord).expect("ordinal in range");
        let mut claims = std::mem::take(&mut self.sigmas[ord as usize]);
        if claims.is_empty() {
            return Ok(());
        }
        if claims.len() > 1 {
            for pos in 0..claims[0].len() {
                let s0 = claims[0][pos];
                if claims.iter().all(|c| c[pos] == s0) {
                    continue;
                }
                let var = self.cpd.free_levels(r.node)[pos];
                for c in &claims {
                    self.expect(ord, var as u16)?;
                    let p = self.eval_ref(r, c, Some(pos));
                    self.send_poly(ord, var as u16, p)?;
                }
                let x = self.draw_point()?;
                for c in claims.iter_mut() {
                    c[pos] = x;
                }
            }
        }
        let mut sigma = claims.swap_remove(0);

        if r.red > 0 {
            let pos = r.red as usize - 1;
            let var = self.cpd.free_levels(r.node)[pos];
            let child_ref = CpdRef::new(r.node, r.red - 1);
            let child = self.ordinal(child_ref);
            self.expect(child, var as u16)?;
            let p = if self.cfg.opt_eval {
                self.chain_answer(r, &sigma)
            } else {
                self.eval_ref(child_ref, &sigma, Some(pos))
            };
            self.send_poly(child, var as u16, p)?;
            let x = self.draw_point()?;
            sigma[pos] = x;
            if self.chain == Some(r.node) {
                self.cache.advance(&self.st.arena, self.st.logs[r.node.index()].as_ref().expect("log"), x);
            }
            self.sigmas[child as usize].push(sigma);
            return Ok(());
        }

        let levels = self.cpd.free_levels(r.node);
        match self.dag.kind(r.node) {
            NodeKind::True | NodeKind::False | NodeKind::Var(_) => {}
            NodeKind::Not(c) => {
                let child = self.ordinal(self.cpd.top(self.dag, c));
                self.sigmas[child as usize].push(sigma);
            }
            NodeKind::PEval { var, value, child } => {
                let s = restrict(levels, &sigma, self.cpd.free_levels(child), Some((var, FieldElem::from_bool(value))));
                let c = self.ordinal(self.cpd.top(self.dag, child));
                self.sigmas[c as usize].push(s);
            }
            NodeKind::And(a, b) | NodeKind::Or(a, b) => {
                let sa = restrict(levels, &sigma, self.cpd.free_levels(a), None);
                let sb = restrict(levels, &sigma, self.cpd.free_levels(b), None);
                let cached = self.chain.take() == Some(r.node);
                for (child, s) in [(a, &sa), (b, &sb)] {
                    let top = self.cpd.top(self.dag, child);
                    let o = self.ordinal(top);
                    self.expect(o, NO_VAR)?;
                    let v = if cached {
                        let log = self.st.logs[r.node.index()].as_ref().expect("log");
                        self.cache.final_value(&self.st.arena, log, self.st.bdds[child.index()])
                    } else {
                        self.eval_ref(top, s, None).c0
                    };
                    self.send_value(o, v)?;
                }
                let (oa, ob) = (self.ordinal(self.cpd.top(self.dag, a)), self.ordinal(self.cpd.top(self.dag, b)));
                self.sigmas[oa as usize].push(sa);
                self.sigmas[ob as usize].push(sb);
            }
        }
        Ok(())
    }

    /// Answer for the challenge below chain entry `r` via the chain cache,
    /// starting a fresh cache at the top of a chain.
    fn chain_answer(&mut self, r: CpdRef, sigma: &[FieldElem]) -> UniPoly {
        let log = self.st.logs[r.node.index()].as_ref().expect("binary node has a log");
        if r.red == self.cpd.chain_len(r.node) {
            let levels = self.cpd.free_levels(r.node);
            for (&l, &s) in levels.iter().zip(sigma) {
                self.dense[l as usize] = s;
            }
            self.cache.start(&self.st.arena, log, levels, &self.dense);
            self.chain = Some(r.node);
        }
        assert_eq!(self.chain, Some(r.node), "chain cache started at the top");
        self.cache.answer(&self.st.arena, log)
    }

    /// `[sigma] [[r]]` with the level at `free_pos` left symbolic.
    fn eval_ref(&mut self, r: CpdRef, sigma: &[FieldElem], free_pos: Option<usize>) -> UniPoly {
        let levels = self.cpd.free_levels(r.node);
        for (&l, &s) in levels.iter().zip(sigma) {
            self.dense[l as usize] = s;
        }
        let free = free_pos.map(|p| levels[p]);
        let arena = &self.st.arena;
        if r.red == self.cpd.chain_len(r.node) {
            self.bdd_ev.reset(arena);
            return self.bdd_ev.eval(arena, self.st.bdds[r.node.index()], &self.dense, free).to_poly();
        }
        let log = self.st.logs[r.node.index()].as_ref().expect("binary node has a log");
        let view = if r.red == 0 { 0 } else { self.dag.num_levels() - levels[r.red as usize - 1] + 1 };
        self.e_ev.eval(arena, log, view, &self.dense, free)
    }

    fn ordinal(&self, r: CpdRef) -> u32 {
        self.cpd.ordinal(r).expect("reachable")
    }

    fn next(&mut self) -> Result<Message, Stop> {
        let msg = match self.lookahead.take() {
            Some(m) => m,
            None => {
                let frame = self.ep.recv().map_err(|_| Stop::Abort)?;
                Message::decode(&frame).map_err(|_| Stop::Abort)?
            }
        };
        if msg.is_verdict() {
            return Err(Stop::Verdict);
        }
        Ok(msg)
    }

    fn expect(&mut self, ord: u32, var: u16) -> Result<(), Stop> {
        let msg = self.next()?;
        if msg.kind != MessageKind::Challenge || msg.ordinal != ord || msg.var != var {
            return Err(Stop::Abort);
        }
        Ok(())
    }

    /// The verifier has drawn a random element; it arrives with the next
    /// challenge, which is kept for the following `expect`.
    fn draw_point(&mut self) -> Result<FieldElem, Stop> {
        let msg = self.next()?;
        match msg.kind {
            MessageKind::ChallengeReveal(x) => {
                self.lookahead = Some(Message { kind: MessageKind::Challenge, ..msg });
                Ok(x)
            }
            _ => Err(Stop::Abort),
        }
    }

    fn corrupt(&mut self, honest: MessageKind) -> MessageKind {
        let idx = self.answers;
        self.answers += 1;
        match self.cfg.corruption {
            Corruption::None => honest,
            Corruption::FlipInitialK => match honest {
                MessageKind::Value(v) if idx == 0 => MessageKind::Value(v + FieldElem::ONE),
                _ => honest,
            },
            Corruption::AddOneAt(i) if i == idx => match honest {
                MessageKind::Value(v) => MessageKind::Value(v + FieldElem::ONE),
                MessageKind::Poly(p) => MessageKind::Poly(p + UniPoly::ONE),
                other => other,
            },
            Corruption::RandomAt { index, seed } if index == idx => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                loop {
                    let cand = match honest {
                        MessageKind::Value(_) => MessageKind::Value(FieldElem::random(&mut rng)),
                        MessageKind::Poly(_) => MessageKind::Poly(UniPoly::new(
                            FieldElem::random(&mut rng),
                            FieldElem::random(&mut rng),
                            FieldElem::random(&mut rng),
                        )),
                        other => return other,
                    };
                    if cand != honest {
                        return cand;
                    }
                }
            }
            _ => honest,
        }
    }

    fn send_value(&mut self, ord: u32, v: FieldElem) -> Result<(), Stop> {
        let kind = self.corrupt(MessageKind::Value(v));
        self.ep.send(&Message::new(kind, ord, NO_VAR).encode()).map_err(|_| Stop::Abort)
    }

    fn send_poly(&mut self, ord: u32, var: u16, p: UniPoly) -> Result<(), Stop> {
        let kind = self.corrupt(MessageKind::Poly(p));
        self.ep.send(&Message::new(kind, ord, var).encode()).map_err(|_| Stop::Abort)
    }
}
