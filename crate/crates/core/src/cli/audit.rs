use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::bench::{phase_records, verify_outcomes, BenchRecord};
use super::{CliError, CliResult};
use crate::algebra::{GeneratorSet, Scalar, UniformRand};
use crate::bulletproofs::{link_keygen, CollabOptions, CommitMode, IpaMode};
use crate::circuit::{
    embed_signed, embed_signed_threshold, range_check_64, sum_threshold, Circuit, CircuitBuilder,
};
use crate::error::Result;
use crate::pedersen::{commit, Commitment, CommitmentKey, Opening, OwnershipMap};
use crate::session::{PartyOutcome, Session, SessionLink};

/// Banks holding signed transactions; the claim is `sum >= threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditScenario {
    pub transactions: Vec<Vec<i64>>,
    pub threshold: i64,
}

impl AuditScenario {
    /// `tx` transactions split evenly over `banks`, drawn from the seed.
    /// Without an explicit threshold, uses the true net minus one.
    pub fn generate(banks: usize, tx: usize, threshold: Option<i64>, seed: u64) -> CliResult<Self> {
        if banks == 0 || tx == 0 || !tx.is_multiple_of(banks) {
            return Err(CliError::Usage(format!(
                "need banks >= 1 and tx a positive multiple of banks (banks={banks}, tx={tx})"
            )));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x61_7564_6974);
        let transactions: Vec<Vec<i64>> = (0..banks)
            .map(|_| {
                (0..tx / banks)
                    .map(|_| rng.gen_range(-1_000_000..=1_000_000))
                    .collect()
            })
            .collect();
        let mut s = Self {
            transactions,
            threshold: 0,
        };
        s.threshold = match threshold {
            Some(t) => t,
            None => i64::try_from(s.net() - 1)
                .map_err(|_| CliError::Usage("net out of range".into()))?,
        };
        Ok(s)
    }

    pub fn banks(&self) -> usize {
        self.transactions.len()
    }

    pub fn tx_count(&self) -> usize {
        self.transactions.iter().map(Vec::len).sum()
    }

    pub fn net(&self) -> i128 {
        self.transactions.iter().flatten().map(|&x| x as i128).sum()
    }

    pub fn is_satisfiable(&self) -> bool {
        self.net() >= self.threshold as i128
    }

    fn embedded(&self) -> Vec<Vec<Scalar>> {
        self.transactions
            .iter()
            .map(|b| b.iter().map(|&x| embed_signed(x)).collect())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    /// Local per-bank range proofs plus one small collaborative threshold proof.
    Composed,
    /// One collaborative proof of every check.
    Monolithic,
}

impl AuditMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditMode::Composed => "composed",
            AuditMode::Monolithic => "monolithic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub accepted: bool,
    pub records: Vec<BenchRecord>,
    /// Beaver multiplications of party 0 over all multi-party runs.
    pub mpc_multiplications: u64,
    /// Messages sent, summed over all parties of all runs.
    pub messages: u64,
    pub bytes: u64,
    /// Gates of the collaborative proof.
    pub collab_gates: usize,
    /// Linear constraint rows of the collaborative proof.
    pub collab_rows: usize,
    /// Single-bank proofs produced without interaction.
    pub local_proofs: usize,
}

impl AuditReport {
    pub fn summary(&self) -> String {
        format!(
            "audit mode={} verdict={} collab_gates={} collab_rows={} local_proofs={} mpc_multiplications={} messages={} bytes={}",
            self.mode.as_str(),
            if self.accepted { "accepted" } else { "rejected" },
            self.collab_gates,
            self.collab_rows,
            self.local_proofs,
            self.mpc_multiplications,
            self.messages,
            self.bytes
        )
    }
}

/// Per-bank range checks.
fn range_circuit(k: usize) -> Result<Circuit> {
    let mut b = CircuitBuilder::new();
    for v in b.alloc_committed(k) {
        range_check_64(&mut b, v)?;
    }
    Ok(b.finalize())
}

fn threshold_circuit(k: usize, t: Scalar, with_ranges: bool) -> Result<Circuit> {
    let mut b = CircuitBuilder::new();
    let vs = b.alloc_committed(k);
    if with_ranges {
        for v in &vs {
            range_check_64(&mut b, *v)?;
        }
    }
    sum_threshold(&mut b, &vs, t)?;
    Ok(b.finalize())
}

struct Run {
    outcomes: Vec<PartyOutcome>,
    records: Vec<BenchRecord>,
}

#[allow(clippy::too_many_arguments)]
fn prove_linked(
    scheme: &str,
    circuit: &Circuit,
    map: OwnershipMap,
    values: Vec<Scalar>,
    ck: &CommitmentKey,
    c_hat: Commitment,
    opening_parts: Vec<Scalar>,
    seed: u64,
) -> CliResult<Run> {
    let gens = GeneratorSet::new(circuit.cs.n);
    let keys = link_keygen(
        &gens,
        ck,
        &mut ChaCha20Rng::seed_from_u64(seed ^ 0x6c69_6e6b),
    )?;
    let opts = CollabOptions {
        commit_mode: CommitMode::Cts,
        ipa_mode: IpaMode::Local,
        check_satisfied: true,
    };
    let outcomes = Session::new(circuit, 1, values, opts)?
        .with_map(map)?
        .with_link(SessionLink::existing(&keys, c_hat, opening_parts))
        .with_seed(seed)
        .run_in_memory()?;
    let verify_time = verify_outcomes(circuit, &outcomes, &keys, Some(c_hat))?;
    let records = phase_records(
        scheme,
        circuit,
        opts.commit_mode,
        opts.ipa_mode,
        &outcomes,
        verify_time,
    );
    Ok(Run { outcomes, records })
}

/// Runs the scenario in the given mode. Each bank's transactions are bound by
/// a Pedersen vector commitment; every proof links to those commitments.
pub fn run_audit(s: &AuditScenario, mode: AuditMode, seed: u64) -> CliResult<AuditReport> {
    if !s.is_satisfiable() {
        return Err(CliError::Unsatisfiable(format!(
            "net of transactions {} is below the threshold {}",
            s.net(),
            s.threshold
        )));
    }
    let banks = s.banks();
    let k = s.tx_count();
    let embedded = s.embedded();
    let all: Vec<Scalar> = embedded.iter().flatten().copied().collect();
    let map = OwnershipMap::contiguous(k, banks)?;

    let ck = CommitmentKey::setup_with_tag("colcp/audit/tx", k)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6f70_656e);
    let openings: Vec<Scalar> = (0..banks).map(|_| Scalar::rand(&mut rng)).collect();
    let bank_keys = (0..banks)
        .map(|b| ck.restrict(map.slots_of(b)))
        .collect::<Result<Vec<_>>>()?;
    let bank_commitments = (0..banks)
        .map(|b| commit(&bank_keys[b], &embedded[b], &Opening(openings[b])))
        .collect::<Result<Vec<_>>>()?;
    let c_all = Commitment(bank_commitments.iter().map(|c| c.0).sum());
    let t = embed_signed_threshold(s.threshold, k);

    let mut runs = Vec::new();
    let mut local_proofs = 0;
    let collab_circuit = match mode {
        AuditMode::Composed => {
            for b in 0..banks {
                let circuit = range_circuit(embedded[b].len())?;
                let m = circuit.cs.m;
                runs.push(prove_linked(
                    "audit-composed-local",
                    &circuit,
                    OwnershipMap::contiguous(m, 1)?,
                    embedded[b].clone(),
                    &bank_keys[b],
                    bank_commitments[b],
                    vec![openings[b]],
                    seed.wrapping_add(b as u64 + 1),
                )?);
                local_proofs += 1;
            }
            threshold_circuit(k, t, false)?
        }
        AuditMode::Monolithic => threshold_circuit(k, t, true)?,
    };
    let scheme = match mode {
        AuditMode::Composed => "audit-composed-sum",
        AuditMode::Monolithic => "audit-monolithic",
    };
    runs.push(prove_linked(
        scheme,
        &collab_circuit,
        map,
        all,
        &ck,
        c_all,
        openings,
        seed,
    )?);

    let mut report = AuditReport {
        mode,
        accepted: true,
        records: Vec::new(),
        mpc_multiplications: 0,
        messages: 0,
        bytes: 0,
        collab_gates: collab_circuit.used_gates,
        collab_rows: collab_circuit.cs.q,
        local_proofs,
    };
    for run in runs {
        if run.outcomes.len() > 1 {
            report.mpc_multiplications += run.outcomes[0].counters.multiplications;
        }
        for o in &run.outcomes {
            report.messages += o.traffic.messages_sent;
            report.bytes += o.traffic.bytes_sent;
        }
        report.records.extend(run.records);
    }
    Ok(report)
}
