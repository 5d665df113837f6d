use std::time::{Duration, Instant};

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{CliError, CliResult};
use crate::algebra::{GeneratorSet, Scalar};
use crate::bulletproofs::{
    bp_verify, link_keygen, CollabOptions, CommitMode, IpaMode, LinkStatement, VerifyOptions,
};
use crate::circuit::{sample_circuit, Circuit};
use crate::cplink::SsKeys;
use crate::pedersen::{Commitment, CommitmentKey};
use crate::session::{PartyOutcome, Session, SessionLink};

pub const CSV_HEADER: &str =
    "scheme,n_constraints,n_parties,commit_mode,ipa_mode,phase,ms,messages,bytes,proof_bytes,verify_ok";

const PHASES: [&str; 4] = ["commit", "assign", "prove", "link"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransportKind {
    Mem,
    Tcp,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub constraints: usize,
    pub parties: usize,
    pub inputs: usize,
    pub commit_mode: CommitMode,
    pub ipa_mode: IpaMode,
    pub transport: TransportKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub scheme: String,
    pub n_constraints: usize,
    pub n_parties: usize,
    pub commit_mode: CommitMode,
    pub ipa_mode: IpaMode,
    pub phase: String,
    pub ms: f64,
    pub messages: u64,
    pub bytes: u64,
    pub proof_bytes: usize,
    pub verify_ok: bool,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{},{},{},{}",
            self.scheme,
            self.n_constraints,
            self.n_parties,
            self.commit_mode.as_str(),
            self.ipa_mode.as_str(),
            self.phase,
            self.ms,
            self.messages,
            self.bytes,
            self.proof_bytes,
            self.verify_ok
        )
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Re-verifies party 0's proof and link; every party must hold the same proof.
pub(crate) fn verify_outcomes(
    circuit: &Circuit,
    outcomes: &[PartyOutcome],
    keys: &SsKeys,
    c_hat: Option<Commitment>,
) -> CliResult<Duration> {
    let first = &outcomes[0].output;
    if outcomes
        .iter()
        .any(|o| o.output.proof.proof != first.proof.proof)
    {
        return Err(CliError::VerifyFailed(
            "parties output different proofs".into(),
        ));
    }
    let c_hat = c_hat
        .or(first.c_hat)
        .ok_or_else(|| CliError::VerifyFailed("no external commitment".into()))?;
    let link = first
        .proof
        .link
        .as_ref()
        .ok_or_else(|| CliError::VerifyFailed("no linking proof".into()))?;
    let gens = GeneratorSet::new(circuit.cs.n);
    let start = Instant::now();
    bp_verify(
        &circuit.cs,
        &gens,
        &first.proof.v,
        &first.proof.proof,
        Some(LinkStatement {
            vk: &keys.vk,
            c_hat: &c_hat,
            proof: link,
        }),
        VerifyOptions::default(),
    )
    .map_err(|e| CliError::VerifyFailed(format!("{e:?}")))?;
    Ok(start.elapsed())
}

/// Per-phase records for one verified run: wall time is the slowest party,
/// traffic is summed over parties.
pub(crate) fn phase_records(
    scheme: &str,
    circuit: &Circuit,
    commit_mode: CommitMode,
    ipa_mode: IpaMode,
    outcomes: &[PartyOutcome],
    verify_time: Duration,
) -> Vec<BenchRecord> {
    let proof_bytes = outcomes[0].output.proof.proof.to_bytes(&circuit.cs).len();
    let record = |phase: &str, ms: f64, messages: u64, bytes: u64| BenchRecord {
        scheme: scheme.to_string(),
        n_constraints: circuit.used_gates,
        n_parties: outcomes.len(),
        commit_mode,
        ipa_mode,
        phase: phase.to_string(),
        ms,
        messages,
        bytes,
        proof_bytes,
        verify_ok: true,
    };
    let mut rows = Vec::new();
    let (mut total_ms, mut total_msgs, mut total_bytes) = (0.0, 0, 0);
    for phase in PHASES {
        let mut worst = Duration::ZERO;
        let (mut msgs, mut bytes) = (0, 0);
        for o in outcomes {
            if let Some(p) = o.output.phases.iter().find(|p| p.phase == phase) {
                worst = worst.max(p.elapsed);
                msgs += p.traffic.messages_sent;
                bytes += p.traffic.bytes_sent;
            }
        }
        total_ms += ms(worst);
        total_msgs += msgs;
        total_bytes += bytes;
        rows.push(record(phase, ms(worst), msgs, bytes));
    }
    rows.push(record("verify", ms(verify_time), 0, 0));
    rows.push(record("total", total_ms, total_msgs, total_bytes));
    rows
}

/// Random inputs below 2^32 so the sample circuit's values stay readable in logs.
fn bench_values(m: usize, seed: u64) -> Vec<Scalar> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x7661_6c73);
    (0..m).map(|_| Scalar::from(rng.gen::<u32>())).collect()
}

/// Runs one configuration end to end and re-verifies the result.
pub fn run_bench(cfg: &BenchConfig, seed: u64) -> CliResult<Vec<BenchRecord>> {
    if cfg.parties == 0 || cfg.inputs == 0 || cfg.constraints == 0 {
        return Err(CliError::Usage(
            "constraints, parties and inputs must be positive".into(),
        ));
    }
    let circuit = sample_circuit(cfg.constraints, cfg.inputs)?;
    let gens = GeneratorSet::new(circuit.cs.n);
    let ck_ext = CommitmentKey::setup_with_tag("colcp/bench/ext", cfg.inputs)?;
    let keys = link_keygen(
        &gens,
        &ck_ext,
        &mut ChaCha20Rng::seed_from_u64(seed ^ 0x6b65_7973),
    )?;
    let opts = CollabOptions {
        commit_mode: cfg.commit_mode,
        ipa_mode: cfg.ipa_mode,
        check_satisfied: true,
    };
    let session = Session::new(&circuit, cfg.parties, bench_values(cfg.inputs, seed), opts)?
        .with_link(SessionLink::create(&keys, &ck_ext))
        .with_seed(seed);
    let outcomes = match cfg.transport {
        TransportKind::Mem => session.run_in_memory()?,
        TransportKind::Tcp => session.run_tcp_loopback()?,
    };
    let verify_time = verify_outcomes(&circuit, &outcomes, &keys, None)?;
    Ok(phase_records(
        "col-cp-bp",
        &circuit,
        cfg.commit_mode,
        cfg.ipa_mode,
        &outcomes,
        verify_time,
    ))
}
