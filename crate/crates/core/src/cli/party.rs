use std::path::Path;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::bench::verify_outcomes;
use super::{CliError, CliResult};
use crate::algebra::{ByteReader, ByteWriter, GeneratorSet, Scalar, G1_BYTES};
use crate::bulletproofs::{link_keygen, BulletproofProof, CollabOptions, CommitMode, IpaMode};
use crate::circuit::{less_than_pow2_circuit, odd_circuit, sample_circuit, Circuit};
use crate::cplink::{CpLinkProof, SsKeys};
use crate::error::{Error, Result};
use crate::pedersen::{Commitment, CommitmentKey, OwnershipMap};
use crate::session::{PartyOutcome, Session, SessionLink};
use crate::transport::{Network, Topology};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitKind {
    /// `gates` multiplications over `inputs` values.
    Sample { gates: usize, inputs: usize },
    /// One value below `2^bits`.
    Range { bits: usize },
    /// One odd value whose half fits in `bits` bits.
    Odd { bits: usize },
}

/// What every party of a TCP run agrees to compute.
///
/// ```text
/// circuit = sample      # sample | range | odd
/// gates = 16            # sample only
/// inputs = 2            # sample only
/// bits = 4              # range / odd only
/// commit = cts          # cts | stc
/// ipa = local           # local | distributed
/// values = 3, 5         # optional; derived from the seed otherwise
/// ownership = 0: 0; 1: 1   # optional; contiguous otherwise
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub circuit: CircuitKind,
    pub commit_mode: CommitMode,
    pub ipa_mode: IpaMode,
    pub values: Option<Vec<u64>>,
    pub ownership: Option<String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl Job {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut kv = std::collections::BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("job line {}: expected `key = value`", i + 1)))?;
            if kv
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(bad(format!(
                    "job line {}: duplicate key `{}`",
                    i + 1,
                    k.trim()
                )));
            }
        }
        let num = |key: &str, default: Option<usize>| -> CliResult<usize> {
            match kv.get(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| bad(format!("job: `{key}` must be a number"))),
                None => default.ok_or_else(|| bad(format!("job: missing `{key}`"))),
            }
        };
        let circuit = match kv.get("circuit").map(String::as_str).unwrap_or("sample") {
            "sample" => CircuitKind::Sample {
                gates: num("gates", None)?,
                inputs: num("inputs", Some(1))?,
            },
            "range" => CircuitKind::Range {
                bits: num("bits", None)?,
            },
            "odd" => CircuitKind::Odd {
                bits: num("bits", None)?,
            },
            other => return Err(bad(format!("job: unknown circuit `{other}`"))),
        };
        let commit_mode = kv
            .get("commit")
            .map(|v| v.parse())
            .transpose()
            .map_err(|e: Error| bad(e.to_string()))?
            .unwrap_or(CommitMode::Cts);
        let ipa_mode = kv
            .get("ipa")
            .map(|v| v.parse())
            .transpose()
            .map_err(|e: Error| bad(e.to_string()))?
            .unwrap_or(IpaMode::Local);
        let values = kv
            .get("values")
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("job: `values` must be comma separated unsigned integers"))
            })
            .transpose()?;
        let ownership = kv.get("ownership").map(|s| s.replace(';', "\n"));
        let known = [
            "circuit",
            "gates",
            "inputs",
            "bits",
            "commit",
            "ipa",
            "values",
            "ownership",
        ];
        if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(bad(format!("job: unknown key `{k}`")));
        }
        Ok(Self {
            circuit,
            commit_mode,
            ipa_mode,
            values,
            ownership,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn build_circuit(&self) -> Result<Circuit> {
        match self.circuit {
            CircuitKind::Sample { gates, inputs } => sample_circuit(gates, inputs),
            CircuitKind::Range { bits } => less_than_pow2_circuit(bits),
            CircuitKind::Odd { bits } => odd_circuit(bits),
        }
    }

    pub fn options(&self) -> CollabOptions {
        CollabOptions {
            commit_mode: self.commit_mode,
            ipa_mode: self.ipa_mode,
            check_satisfied: true,
        }
    }
}

/// Public output of a job: circuit digest, `V`, external commitment, proof, link.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementBundle {
    pub digest: [u8; 32],
    pub v: Vec<Commitment>,
    pub c_hat: Commitment,
    pub proof: Vec<u8>,
    pub link: CpLinkProof,
}

const STATEMENT_MAGIC: &[u8; 4] = b"CPST";

impl StatementBundle {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(STATEMENT_MAGIC)
            .put_bytes(&self.digest)
            .put_len(self.v.len());
        for c in &self.v {
            w.put_g1(&c.0);
        }
        w.put_g1(&self.c_hat.0)
            .put_blob(&self.proof)
            .put_g1(&self.link.0);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != STATEMENT_MAGIC {
            return Err(Error::Decode("not a statement bundle".into()));
        }
        let mut digest = [0u8; 32];
        digest.copy_from_slice(r.take(32)?);
        let n = r.len_prefix(G1_BYTES)?;
        let v = (0..n)
            .map(|_| r.g1().map(Commitment))
            .collect::<Result<Vec<_>>>()?;
        let c_hat = Commitment(r.g1()?);
        let proof = r.blob()?.to_vec();
        BulletproofProof::decode(&proof)?;
        let link = CpLinkProof(r.g1()?);
        r.finish()?;
        Ok(Self {
            digest,
            v,
            c_hat,
            proof,
            link,
        })
    }
}

struct Prepared {
    circuit: Circuit,
    ck_ext: CommitmentKey,
    keys: SsKeys,
    values: Vec<Scalar>,
    map: OwnershipMap,
}

/// Every process derives the same public keys and dealer output from the seed,
/// standing in for a trusted setup.
fn prepare(job: &Job, n_parties: usize, seed: u64) -> CliResult<Prepared> {
    let circuit = job.build_circuit()?;
    let m = circuit.cs.m;
    let gens = GeneratorSet::new(circuit.cs.n);
    let ck_ext = CommitmentKey::setup_with_tag("colcp/job/ext", m)?;
    let keys = link_keygen(
        &gens,
        &ck_ext,
        &mut ChaCha20Rng::seed_from_u64(seed ^ 0x6b65_7973),
    )?;
    let values = match &job.values {
        Some(v) if v.len() != m => {
            return Err(bad(format!("job: {m} values needed, {} given", v.len())))
        }
        Some(v) => v.iter().map(|x| Scalar::from(*x)).collect(),
        None => (0..m as u64)
            .map(|i| Scalar::from(seed.wrapping_mul(31).wrapping_add(2 * i + 3)))
            .collect(),
    };
    let map = match &job.ownership {
        Some(text) => OwnershipMap::parse(m, n_parties, text).map_err(|e| bad(e.to_string()))?,
        None => OwnershipMap::contiguous(m, n_parties)?,
    };
    Ok(Prepared {
        circuit,
        ck_ext,
        keys,
        values,
        map,
    })
}

fn session<'a>(p: &'a Prepared, job: &Job, seed: u64) -> CliResult<Session<'a>> {
    Ok(
        Session::new(&p.circuit, 1, p.values.clone(), job.options())?
            .with_map(p.map.clone())?
            .with_link(SessionLink::create(&p.keys, &p.ck_ext))
            .with_seed(seed),
    )
}

fn bundle(p: &Prepared, outcomes: &[PartyOutcome]) -> CliResult<StatementBundle> {
    verify_outcomes(&p.circuit, outcomes, &p.keys, None)?;
    let out = &outcomes[0].output;
    Ok(StatementBundle {
        digest: p.circuit.cs.digest(),
        v: out.proof.v.clone(),
        c_hat: out.c_hat.expect("link requested"),
        proof: out.proof.proof.to_bytes(&p.circuit.cs),
        link: out.proof.link.expect("link requested"),
    })
}

/// All parties of `job` in this process; the reference for TCP runs.
pub fn run_job_in_memory(job: &Job, n_parties: usize, seed: u64) -> CliResult<StatementBundle> {
    let p = prepare(job, n_parties, seed)?;
    let outcomes = session(&p, job, seed)?.run_in_memory()?;
    bundle(&p, &outcomes)
}

/// Party `id` of the topology in `config`, running the job in `role`.
pub fn run_party(
    id: usize,
    config: &Path,
    role: &Path,
    seed: u64,
    timeout: Duration,
) -> CliResult<StatementBundle> {
    let topology =
        Topology::load(config).map_err(|e| bad(format!("topology {}: {e}", config.display())))?;
    if id >= topology.len() {
        return Err(bad(format!(
            "--id {id} out of range for {} parties",
            topology.len()
        )));
    }
    let job = Job::load(role)?;
    let p = prepare(&job, topology.len(), seed)?;
    let net = Network::tcp(id, &topology, timeout).map_err(Error::from)?;
    let outcome = session(&p, &job, seed)?.run_on(net)?;
    bundle(&p, std::slice::from_ref(&outcome))
}
