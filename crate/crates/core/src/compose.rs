//! AND-composition of collaborative proofs over one shared commitment.
//!
//! A shared slice `u_0` is committed once as `c^s`. Each sub-statement is
//! proven by its own group of parties, possibly disjoint from the others, and
//! carries a linking proof from its `sum V_j` to `c^s`. The conjunction holds
//! when every sub-proof verifies and every link points at the same `c^s` bytes.

use rand::{CryptoRng, RngCore};

use crate::algebra::{ByteReader, ByteWriter, GeneratorSet, Scalar, G1_BYTES};
use crate::bulletproofs::{
    bp_verify, link_keygen, BulletproofProof, CollabOptions, LinkStatement, VerifyOptions,
};
use crate::circuit::{Circuit, ConstraintSystem};
use crate::cplink::{CpLinkProof, SsKeys, SsVerifyingKey};
use crate::error::{Error, Result};
use crate::pedersen::{Commitment, CommitmentKey, OwnershipMap};
use crate::session::{Session, SessionLink};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubStatement {
    pub digest: [u8; 32],
    pub v: Vec<Commitment>,
    /// The shared commitment this sub-proof was linked against.
    pub c_s: Commitment,
    pub proof: BulletproofProof,
    pub link: CpLinkProof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComposedStatement {
    pub shared_commitment: Commitment,
    pub subs: Vec<SubStatement>,
}

/// Verifier material for one sub-statement.
#[derive(Clone, Debug)]
pub struct SubKeys {
    pub cs: ConstraintSystem,
    pub vk: SsVerifyingKey,
}

/// One prover group: its members (global party ids, for bookkeeping) and
/// the relation it proves about `u_0`.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub parties: Vec<usize>,
    pub circuit: Circuit,
    pub keys: SsKeys,
    pub opts: CollabOptions,
}

impl GroupSpec {
    /// Generates the linking keys between this circuit's `V` and `ck_s`.
    pub fn new<R: RngCore + CryptoRng>(
        parties: Vec<usize>,
        circuit: Circuit,
        ck_s: &CommitmentKey,
        opts: CollabOptions,
        rng: &mut R,
    ) -> Result<Self> {
        let keys = link_keygen(&GeneratorSet::new(circuit.cs.n), ck_s, rng)?;
        Ok(Self {
            parties,
            circuit,
            keys,
            opts,
        })
    }

    pub fn verifier_keys(&self) -> SubKeys {
        SubKeys {
            cs: self.circuit.cs.clone(),
            vk: self.keys.vk.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ProverGroupPlan {
    pub groups: Vec<GroupSpec>,
}

/// The shared slice in the hands of each group's first member (the data owner).
#[derive(Clone, Copy, Debug)]
pub struct SharedInput {
    pub c_s: Commitment,
    pub u0: Scalar,
    pub o_s: Scalar,
}

/// Runs every group in parallel; a failing group does not affect the others.
pub fn compose_prove_groups(
    plan: &ProverGroupPlan,
    input: &SharedInput,
    seed: u64,
) -> Vec<Result<SubStatement>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = plan
            .groups
            .iter()
            .enumerate()
            .map(|(gi, group)| {
                s.spawn(move || prove_group(group, input, seed.wrapping_add(gi as u64)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("group thread panicked"))
            .collect()
    })
}

/// All groups must succeed.
pub fn compose_prove(
    plan: &ProverGroupPlan,
    input: &SharedInput,
    seed: u64,
) -> Result<ComposedStatement> {
    let subs = compose_prove_groups(plan, input, seed)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ComposedStatement {
        shared_commitment: input.c_s,
        subs,
    })
}

fn prove_group(group: &GroupSpec, input: &SharedInput, seed: u64) -> Result<SubStatement> {
    let n = group.parties.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty prover group".into()));
    }
    if group.circuit.cs.m != 1 {
        return Err(Error::InvalidParameter(
            "group circuits take exactly u_0".into(),
        ));
    }
    let map = OwnershipMap::new(
        1,
        (0..n)
            .map(|p| if p == 0 { vec![0] } else { vec![] })
            .collect(),
    )?;
    let mut opening_parts = vec![Scalar::from(0u64); n];
    opening_parts[0] = input.o_s;
    let outs = Session::new(&group.circuit, 1, vec![input.u0], group.opts)?
        .with_map(map)?
        .with_link(SessionLink::existing(&group.keys, input.c_s, opening_parts))
        .with_seed(seed)
        .run_in_memory()?;
    let first = outs
        .into_iter()
        .next()
        .expect("at least one party")
        .output
        .proof;
    Ok(SubStatement {
        digest: group.circuit.cs.digest(),
        v: first.v,
        c_s: input.c_s,
        proof: first.proof,
        link: first.link.expect("link requested"),
    })
}

/// True iff every sub-proof verifies and all of them reference the shared
/// commitment byte for byte. The empty conjunction is true.
pub fn verify_composed(stmt: &ComposedStatement, keys: &[SubKeys]) -> bool {
    if stmt.subs.len() != keys.len() {
        return false;
    }
    let shared = stmt.shared_commitment.to_bytes();
    stmt.subs.iter().zip(keys).all(|(sub, k)| {
        if sub.c_s.to_bytes() != shared || sub.digest != k.cs.digest() {
            return false;
        }
        let gens = GeneratorSet::new(k.cs.n);
        bp_verify(
            &k.cs,
            &gens,
            &sub.v,
            &sub.proof,
            Some(LinkStatement {
                vk: &k.vk,
                c_hat: &stmt.shared_commitment,
                proof: &sub.link,
            }),
            VerifyOptions::default(),
        )
        .is_ok()
    })
}

const BUNDLE_MAGIC: &[u8; 4] = b"CPCB";

impl ProverGroupPlan {
    pub fn verifier_keys(&self) -> Vec<SubKeys> {
        self.groups.iter().map(GroupSpec::verifier_keys).collect()
    }
}

impl ComposedStatement {
    /// Shared commitment, then a count-prefixed list of
    /// `(digest, V list, c^s, proof blob, link)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(BUNDLE_MAGIC)
            .put_g1(&self.shared_commitment.0)
            .put_len(self.subs.len());
        for sub in &self.subs {
            w.put_bytes(&sub.digest);
            w.put_len(sub.v.len());
            for c in &sub.v {
                w.put_g1(&c.0);
            }
            w.put_g1(&sub.c_s.0);
            let header = crate::bulletproofs::ProofHeader {
                n: 1 << sub.proof.ipa.rounds(),
                m: sub.v.len(),
                q: 0,
                digest: sub.digest,
            };
            w.put_blob(&sub.proof.encode(&header));
            w.put_g1(&sub.link.0);
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != BUNDLE_MAGIC {
            return Err(Error::Decode("not a composed statement".into()));
        }
        let shared_commitment = Commitment(r.g1()?);
        let count = r.len_prefix(32 + 4 + 2 * G1_BYTES)?;
        let mut subs = Vec::with_capacity(count);
        for _ in 0..count {
            let mut digest = [0u8; 32];
            digest.copy_from_slice(r.take(32)?);
            let nv = r.len_prefix(G1_BYTES)?;
            let v = (0..nv)
                .map(|_| r.g1().map(Commitment))
                .collect::<Result<Vec<_>>>()?;
            let c_s = Commitment(r.g1()?);
            let (header, proof) = BulletproofProof::decode(r.blob()?)?;
            if header.digest != digest || header.m != nv {
                return Err(Error::Decode("sub-proof header mismatch".into()));
            }
            let link = CpLinkProof(r.g1()?);
            subs.push(SubStatement {
                digest,
                v,
                c_s,
                proof,
                link,
            });
        }
        r.finish()?;
        Ok(Self {
            shared_commitment,
            subs,
        })
    }
}
