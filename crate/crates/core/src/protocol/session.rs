use std::time::Instant;

use super::channel::{mem_pair, Endpoint};
use super::prover::{prover_run, Corruption, ProverConfig, ProverReport};
use super::transcript::{Recorder, Transcript};
use super::verifier::{verifier_run, VerifierStats};
use super::Verdict;
use crate::circuit::CpeDag;

const PROVER_STACK: usize = 64 << 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SessionConfig {
    pub seed: u64,
    pub opt_eval: bool,
    pub corruption: Corruption,
    pub record: bool,
}

/// Byte counts are from the verifier's side.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SessionStats {
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub rounds: u64,
    pub prover_build_ms: f64,
    pub prover_answer_ms: f64,
    pub verifier_ms: f64,
}

impl SessionStats {
    /// Total prover time, build plus answering.
    pub fn prover_ms(&self) -> f64 {
        self.prover_build_ms + self.prover_answer_ms
    }

    /// Total framed bytes in both directions.
    pub fn certificate_bytes(&self) -> u64 {
        self.bytes_sent + self.bytes_received
    }
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub verdict: Verdict,
    pub stats: SessionStats,
    pub verifier: VerifierStats,
    pub prover: ProverReport,
    pub transcript: Option<Transcript>,
}

/// Runs prover and verifier in one process: the prover on its own thread,
/// the verifier on the caller's.
pub fn run_session(dag: &CpeDag, cfg: &SessionConfig) -> SessionOutcome {
    let (vep, mut pep) = mem_pair();
    let pcfg = ProverConfig { opt_eval: cfg.opt_eval, corruption: cfg.corruption };
    std::thread::scope(|s| {
        let prover = std::thread::Builder::new()
            .name("prover".into())
            .stack_size(PROVER_STACK)
            .spawn_scoped(s, move || prover_run(dag, &mut pep, pcfg))
            .expect("spawn prover thread");

        let t = Instant::now();
        let (report, ep, transcript) = if cfg.record {
            let mut rec = Recorder::new(vep);
            let report = verifier_run(dag, &mut rec, cfg.seed);
            let (ep, tr) = rec.into_transcript(cfg.seed);
            (report, ep, Some(tr))
        } else {
            let mut ep = vep;
            let report = verifier_run(dag, &mut ep, cfg.seed);
            (report, ep, None)
        };
        let verifier_ms = t.elapsed().saturating_sub(ep.blocked()).as_secs_f64() * 1e3;
        let bytes_sent = ep.bytes_sent();
        let bytes_received = ep.bytes_received();
        drop(ep);
        let prover = prover.join().unwrap_or(ProverReport { aborted: true, ..Default::default() });
        SessionOutcome {
            verdict: report.verdict,
            stats: SessionStats {
                bytes_sent,
                bytes_received,
                rounds: report.stats.challenges,
                prover_build_ms: prover.build_ms,
                prover_answer_ms: prover.answer_ms,
                verifier_ms,
            },
            verifier: report.stats,
            prover,
            transcript,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{brute_force_count, random::random_cpe, random::RandomCpeParams};
    use crate::field::FieldElem;
    use crate::protocol::message::{Message, MessageKind};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// forall y. (not x or (x and y)), x at level 2, y at level 1.
    fn forall_example() -> CpeDag {
        let mut d = CpeDag::new(2);
        let x = d.var(2);
        let y = d.var(1);
        let nx = d.not(x);
        let xy = d.and(x, y);
        let body = d.or(nx, xy);
        let root = d.forall(1, body);
        d.set_root(root);
        d
    }

    fn honest(seed: u64) -> SessionConfig {
        SessionConfig { seed, record: true, ..Default::default() }
    }

    #[test]
    fn forall_example_accepts_with_count_one() {
        let d = forall_example();
        let out = run_session(&d, &honest(1));
        assert_eq!(out.verdict, Verdict::Accept { count: FieldElem::ONE });
        let t = out.transcript.unwrap();
        // The first answer is K = 1 - 1/2.
        let k = Message::decode(&t.frames[1]).unwrap();
        assert_eq!(k.kind, MessageKind::Value(FieldElem::HALF));
        assert_eq!(FieldElem::HALF.value(), 1 << 60);
    }

    #[test]
    fn flipped_initial_value_is_rejected() {
        let d = forall_example();
        let cfg = SessionConfig { corruption: Corruption::FlipInitialK, ..honest(2) };
        assert!(!run_session(&d, &cfg).verdict.is_accept());
    }

    #[test]
    fn random_circuits_accept_with_brute_force_count() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for i in 0..150 {
            let d = random_cpe(&mut rng, &RandomCpeParams { num_vars: 6, ..Default::default() });
            let want = brute_force_count(&d).unwrap();
            for opt_eval in [false, true] {
                let cfg = SessionConfig { seed: i, opt_eval, ..Default::default() };
                match run_session(&d, &cfg).verdict {
                    Verdict::Accept { count } => assert_eq!(BigUint::from(count.value()), want, "instance {i}"),
                    v => panic!("instance {i} opt={opt_eval}: {v:?}"),
                }
            }
        }
    }

    #[test]
    fn optimised_answers_are_byte_identical() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        for i in 0..60 {
            let d = random_cpe(&mut rng, &RandomCpeParams { num_vars: 7, ..Default::default() });
            let a = run_session(&d, &honest(i)).transcript.unwrap();
            let b = run_session(&d, &SessionConfig { opt_eval: true, ..honest(i) }).transcript.unwrap();
            assert_eq!(a, b, "instance {i}");
        }
    }

    #[test]
    fn single_corrupted_answers_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        for i in 0..40 {
            let d = random_cpe(&mut rng, &RandomCpeParams { num_vars: 5, ..Default::default() });
            let answers = run_session(&d, &honest(i)).prover.answers;
            for idx in 0..answers {
                let cfg = SessionConfig { corruption: Corruption::AddOneAt(idx), ..honest(i) };
                let v = run_session(&d, &cfg).verdict;
                assert!(!v.is_accept(), "instance {i} answer {idx}");
            }
        }
    }
}
