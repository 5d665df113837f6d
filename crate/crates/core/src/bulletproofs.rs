//! Bulletproofs for arithmetic circuits in the commit-and-prove setting.
//!
//! Committed inputs are `V_j = g^{v_j} h^{gamma_j}`. A proof shows that the
//! committed values extend to a satisfying assignment of a [`ConstraintSystem`];
//! an optional linking proof ties `sum_j V_j` to an external Pedersen vector
//! commitment over the same values.
//!
//! The same verifier accepts proofs from [`bp_prove_single`] (one prover, all
//! values in the clear) and [`bp_prove_collab`] (N provers over SPDZ shares).
//!
//! Transcript order: circuit digest and sizes, `V`, then `A_I, A_O, S` for
//! `y, z`, then `T_1, T_3..T_6` for `x`, then `tau_x, mu, t_hat` for `x_u`,
//! then the inner-product rounds.

use std::time::{Duration, Instant};

use ark_ff::{batch_inversion, Field, One, Zero};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::algebra::{
    inner_product, msm, powers, sha256, ByteReader, ByteWriter, GeneratorSet, Scalar, UniformRand,
    CURVE_ID, G1, G1_BYTES, HASH_ID, SCALAR_BYTES,
};
use crate::circuit::{
    assign_collab, is_satisfied, Assignment, Circuit, ConstraintSystem, SharedAssignment,
};
use crate::cplink::{
    cplink_keygen, cplink_prove, cplink_prove_collab, cplink_verify, CpLinkProof, SsKeys,
    SsVerifyingKey,
};
use crate::error::{Error, Result};
use crate::ipa::{dipa_prove, dipa_triples, ipa_prove, verification_scalars, IpaProof};
use crate::mpc::{linear_combination, AuthShare, DealerRequest, Party};
use crate::pedersen::{
    combine_partials_batch, cts_commit_shared, stc_commit, Commitment, CommitmentKey, OwnershipMap,
};
use crate::transcript::Transcript;
use crate::transport::TrafficStats;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BulletproofProof {
    pub a_i: G1,
    pub a_o: G1,
    pub s: G1,
    pub t1: G1,
    pub t3: G1,
    pub t4: G1,
    pub t5: G1,
    pub t6: G1,
    pub tau_x: Scalar,
    pub mu: Scalar,
    pub t_hat: Scalar,
    pub ipa: IpaProof,
}

/// Fixed part of the proof encoding: everything but the IPA rounds.
pub const PROOF_HEADER_BYTES: usize = 4 + 1 + 1 + 1 + 4 + 4 + 4 + 32;
const PROOF_MAGIC: &[u8; 4] = b"CPBP";
const PROOF_VERSION: u8 = 1;

/// Encoded size for a circuit of `n` gates (after padding).
pub fn proof_size(n: usize) -> usize {
    let k = n.max(1).next_power_of_two().trailing_zeros() as usize;
    PROOF_HEADER_BYTES + 4 + G1_BYTES * (8 + 2 * k) + SCALAR_BYTES * 5
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofHeader {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub digest: [u8; 32],
}

impl ProofHeader {
    pub fn for_system(cs: &ConstraintSystem) -> Self {
        Self {
            n: cs.n,
            m: cs.m,
            q: cs.q,
            digest: cs.digest(),
        }
    }
}

impl BulletproofProof {
    pub fn points(&self) -> [G1; 8] {
        [
            self.a_i, self.a_o, self.s, self.t1, self.t3, self.t4, self.t5, self.t6,
        ]
    }

    pub fn to_bytes(&self, cs: &ConstraintSystem) -> Vec<u8> {
        self.encode(&ProofHeader::for_system(cs))
    }

    pub fn encode(&self, header: &ProofHeader) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(PROOF_MAGIC)
            .put_u8(PROOF_VERSION)
            .put_u8(CURVE_ID)
            .put_u8(HASH_ID)
            .put_u32(header.n as u32)
            .put_u32(header.m as u32)
            .put_u32(header.q as u32)
            .put_bytes(&header.digest);
        for p in self.points() {
            w.put_g1(&p);
        }
        w.put_scalar(&self.tau_x)
            .put_scalar(&self.mu)
            .put_scalar(&self.t_hat);
        self.ipa.write_to(&mut w);
        w.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<(ProofHeader, Self)> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != PROOF_MAGIC {
            return Err(Error::Decode("not a proof".into()));
        }
        if r.u8()? != PROOF_VERSION {
            return Err(Error::Decode("unsupported proof version".into()));
        }
        if r.u8()? != CURVE_ID || r.u8()? != HASH_ID {
            return Err(Error::Decode("unsupported curve or hash".into()));
        }
        let n = r.u32()? as usize;
        let m = r.u32()? as usize;
        let q = r.u32()? as usize;
        let mut digest = [0u8; 32];
        digest.copy_from_slice(r.take(32)?);
        let mut pts = [G1::zero(); 8];
        for p in pts.iter_mut() {
            *p = r.g1()?;
        }
        let tau_x = r.scalar()?;
        let mu = r.scalar()?;
        let t_hat = r.scalar()?;
        let ipa = IpaProof::read_from(&mut r)?;
        r.finish()?;
        let [a_i, a_o, s, t1, t3, t4, t5, t6] = pts;
        Ok((
            ProofHeader { n, m, q, digest },
            Self {
                a_i,
                a_o,
                s,
                t1,
                t3,
                t4,
                t5,
                t6,
                tau_x,
                mu,
                t_hat,
                ipa,
            },
        ))
    }

    /// Decodes and checks that the header matches `cs`.
    pub fn decode_for(cs: &ConstraintSystem, bytes: &[u8]) -> Result<Self> {
        let (header, proof) = Self::decode(bytes)?;
        if header != ProofHeader::for_system(cs) {
            return Err(Error::Decode("proof is for a different circuit".into()));
        }
        Ok(proof)
    }
}

/// Key `[h, g, ..., g]` (m copies of `g`) under which `sum_j V_j` is a Pedersen
/// commitment to `(v_1, ..., v_m)` with opening `sum_j gamma_j`.
pub fn bp_side_key(gens: &GeneratorSet, m: usize) -> Result<CommitmentKey> {
    let mut g = vec![gens.h];
    g.extend(std::iter::repeat_n(gens.g, m));
    CommitmentKey::from_generators(g)
}

/// Linking keys between `sum_j V_j` and a commitment under `ck_ext`.
pub fn link_keygen<R: RngCore + CryptoRng>(
    gens: &GeneratorSet,
    ck_ext: &CommitmentKey,
    rng: &mut R,
) -> Result<SsKeys> {
    cplink_keygen(&bp_side_key(gens, ck_ext.message_len())?, ck_ext, rng)
}

/// `sum_j V_j`.
pub fn combined_commitment(v: &[Commitment]) -> Commitment {
    Commitment(v.iter().map(|c| c.0).sum())
}

fn statement_transcript(cs: &ConstraintSystem, v: &[Commitment]) -> Transcript {
    let mut t = Transcript::new(b"colcp/bulletproof");
    t.append_message(b"st", &cs.digest());
    t.append_u64(b"n", cs.n as u64);
    t.append_u64(b"m", cs.m as u64);
    t.append_u64(b"q", cs.q as u64);
    for c in v {
        t.append_point(b"V", &c.0);
    }
    t
}

fn absorb_round1(t: &mut Transcript, a_i: &G1, a_o: &G1, s: &G1) -> (Scalar, Scalar) {
    t.append_point(b"A_I", a_i);
    t.append_point(b"A_O", a_o);
    t.append_point(b"S", s);
    (t.challenge_scalar("y"), t.challenge_scalar("z"))
}

fn absorb_round2(t: &mut Transcript, ts: &[G1; 5]) -> Scalar {
    for (label, p) in [b"T_1", b"T_3", b"T_4", b"T_5", b"T_6"].iter().zip(ts) {
        t.append_point(*label, p);
    }
    t.challenge_scalar("x")
}

fn absorb_round3(t: &mut Transcript, tau_x: &Scalar, mu: &Scalar, t_hat: &Scalar) -> Scalar {
    t.append_scalar(b"tau_x", tau_x);
    t.append_scalar(b"mu", mu);
    t.append_scalar(b"t_hat", t_hat);
    t.challenge_scalar("x_u")
}

/// Everything derived from `y, z` and the circuit.
#[derive(Clone, Debug)]
pub struct PublicTerms {
    pub y_pows: Vec<Scalar>,
    pub y_inv_pows: Vec<Scalar>,
    /// `z_vec W_L`, `z_vec W_R`, `z_vec W_O`, `z_vec W_V` with `z_vec = (z, ..., z^Q)`.
    pub zl: Vec<Scalar>,
    pub zr: Vec<Scalar>,
    pub zo: Vec<Scalar>,
    pub zv: Vec<Scalar>,
    pub zc: Scalar,
    /// `y^{-n} o (z W_R)`.
    pub zr_scaled: Vec<Scalar>,
    pub delta: Scalar,
}

impl PublicTerms {
    pub fn new(cs: &ConstraintSystem, y: Scalar, z: Scalar) -> Self {
        let y_pows = powers(y, cs.n);
        let mut y_inv_pows = y_pows.clone();
        batch_inversion(&mut y_inv_pows);
        let z_vec: Vec<Scalar> = powers(z, cs.q + 1).into_iter().skip(1).collect();
        let w = cs.weighted(&z_vec);
        let zr_scaled: Vec<Scalar> = y_inv_pows.iter().zip(&w.r).map(|(a, b)| *a * b).collect();
        let delta = inner_product(&zr_scaled, &w.l);
        Self {
            y_pows,
            y_inv_pows,
            zl: w.l,
            zr: w.r,
            zo: w.o,
            zv: w.v,
            zc: w.c,
            zr_scaled,
            delta,
        }
    }

    /// `-y^n + z W_O`, the constant coefficient of `r(X)`.
    pub fn r0(&self) -> Vec<Scalar> {
        self.y_pows
            .iter()
            .zip(&self.zo)
            .map(|(y, o)| *o - y)
            .collect()
    }
}

/// `h'_i = h_i^{y^{-(i-1)}}`.
fn h_prime(gens: &GeneratorSet, y_inv_pows: &[Scalar]) -> Vec<G1> {
    gens.h_vec
        .iter()
        .zip(y_inv_pows)
        .map(|(h, s)| *h * s)
        .collect()
}

/// Coefficient vectors of `l(X) = l1 X + l2 X^2 + l3 X^3` and
/// `r(X) = r0 + r1 X + r3 X^3`.
#[derive(Clone, Debug)]
pub struct VectorPolys {
    pub l1: Vec<Scalar>,
    pub l2: Vec<Scalar>,
    pub l3: Vec<Scalar>,
    pub r0: Vec<Scalar>,
    pub r1: Vec<Scalar>,
    pub r3: Vec<Scalar>,
}

impl VectorPolys {
    pub fn new(asg: &Assignment, s_l: &[Scalar], s_r: &[Scalar], pt: &PublicTerms) -> Self {
        let hadamard =
            |a: &[Scalar], b: &[Scalar]| a.iter().zip(b).map(|(x, y)| *x * y).collect::<Vec<_>>();
        let add =
            |a: &[Scalar], b: &[Scalar]| a.iter().zip(b).map(|(x, y)| *x + y).collect::<Vec<_>>();
        Self {
            l1: add(&asg.a_l, &pt.zr_scaled),
            l2: asg.a_o.clone(),
            l3: s_l.to_vec(),
            r0: pt.r0(),
            r1: add(&hadamard(&pt.y_pows, &asg.a_r), &pt.zl),
            r3: hadamard(&pt.y_pows, s_r),
        }
    }

    /// `t_0, ..., t_6` of `t(X) = <l(X), r(X)>`.
    pub fn t_coefficients(&self) -> [Scalar; 7] {
        let ip = inner_product;
        [
            Scalar::zero(),
            ip(&self.l1, &self.r0),
            ip(&self.l1, &self.r1) + ip(&self.l2, &self.r0),
            ip(&self.l2, &self.r1) + ip(&self.l3, &self.r0),
            ip(&self.l1, &self.r3) + ip(&self.l3, &self.r1),
            ip(&self.l2, &self.r3),
            ip(&self.l3, &self.r3),
        ]
    }

    pub fn eval_l(&self, x: Scalar) -> Vec<Scalar> {
        let (x2, x3) = (x * x, x * x * x);
        (0..self.l1.len())
            .map(|i| self.l1[i] * x + self.l2[i] * x2 + self.l3[i] * x3)
            .collect()
    }

    pub fn eval_r(&self, x: Scalar) -> Vec<Scalar> {
        let x3 = x * x * x;
        (0..self.r0.len())
            .map(|i| self.r0[i] + self.r1[i] * x + self.r3[i] * x3)
            .collect()
    }
}

/// Plaintext link inputs: linking keys and the opening of the external commitment.
#[derive(Clone, Copy, Debug)]
pub struct LinkWitness<'a> {
    pub ek: &'a [G1],
    pub o_hat: Scalar,
}

#[derive(Clone, Debug)]
pub struct SingleProof {
    pub proof: BulletproofProof,
    pub v: Vec<Commitment>,
    pub link: Option<CpLinkProof>,
    pub challenges: Vec<(&'static str, Scalar)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProveOptions {
    /// Refuse to prove an assignment that does not satisfy the circuit.
    pub check_satisfied: bool,
}

impl Default for ProveOptions {
    fn default() -> Self {
        Self {
            check_satisfied: true,
        }
    }
}

/// One prover with the whole witness.
pub fn bp_prove_single<R: RngCore + CryptoRng>(
    cs: &ConstraintSystem,
    asg: &Assignment,
    gens: &GeneratorSet,
    link: Option<LinkWitness<'_>>,
    opts: ProveOptions,
    rng: &mut R,
) -> Result<SingleProof> {
    let n = cs.n;
    check_generators(cs, gens)?;
    if asg.a_l.len() != n || asg.a_r.len() != n || asg.a_o.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: asg.a_l.len(),
        });
    }
    if asg.v.len() != cs.m || asg.gamma.len() != cs.m {
        return Err(Error::LengthMismatch {
            expected: cs.m,
            got: asg.v.len(),
        });
    }
    if opts.check_satisfied && !is_satisfied(cs, asg) {
        return Err(Error::Unsatisfied);
    }
    let (g, h) = (gens.g, gens.h);
    let v: Vec<Commitment> = asg
        .v
        .iter()
        .zip(&asg.gamma)
        .map(|(v, gm)| Commitment(g * v + h * gm))
        .collect();
    let mut t = statement_transcript(cs, &v);

    let alpha = Scalar::rand(rng);
    let beta = Scalar::rand(rng);
    let rho = Scalar::rand(rng);
    let s_l: Vec<Scalar> = (0..n).map(|_| Scalar::rand(rng)).collect();
    let s_r: Vec<Scalar> = (0..n).map(|_| Scalar::rand(rng)).collect();
    let taus: [Scalar; 5] = std::array::from_fn(|_| Scalar::rand(rng));

    let a_i = h * alpha + msm(&gens.g_vec, &asg.a_l)? + msm(&gens.h_vec, &asg.a_r)?;
    let a_o = h * beta + msm(&gens.g_vec, &asg.a_o)?;
    let s = h * rho + msm(&gens.g_vec, &s_l)? + msm(&gens.h_vec, &s_r)?;
    let (y, z) = absorb_round1(&mut t, &a_i, &a_o, &s);

    let pt = PublicTerms::new(cs, y, z);
    let polys = VectorPolys::new(asg, &s_l, &s_r, &pt);
    let tc = polys.t_coefficients();
    let ts: [G1; 5] = std::array::from_fn(|k| {
        let j = [1, 3, 4, 5, 6][k];
        g * tc[j] + h * taus[k]
    });
    let x = absorb_round2(&mut t, &ts);

    let l = polys.eval_l(x);
    let r = polys.eval_r(x);
    let t_hat = inner_product(&l, &r);
    let xp = powers(x, 7);
    let tau_x = taus[0] * xp[1]
        + taus[1] * xp[3]
        + taus[2] * xp[4]
        + taus[3] * xp[5]
        + taus[4] * xp[6]
        + xp[2] * inner_product(&pt.zv, &asg.gamma);
    let mu = alpha * x + beta * xp[2] + rho * xp[3];
    let x_u = absorb_round3(&mut t, &tau_x, &mu, &t_hat);

    let hp = h_prime(gens, &pt.y_inv_pows);
    let ipa = ipa_prove(&gens.g_vec, &hp, &(g * x_u), &l, &r, &mut t)?;

    let link = match link {
        Some(lw) => {
            let gamma_sum: Scalar = asg.gamma.iter().sum();
            Some(cplink_prove(
                lw.ek,
                &crate::pedersen::Opening(gamma_sum),
                &crate::pedersen::Opening(lw.o_hat),
                &asg.v,
            )?)
        }
        None => None,
    };
    let [t1, t3, t4, t5, t6] = ts;
    Ok(SingleProof {
        proof: BulletproofProof {
            a_i,
            a_o,
            s,
            t1,
            t3,
            t4,
            t5,
            t6,
            tau_x,
            mu,
            t_hat,
            ipa,
        },
        v,
        link,
        challenges: t.challenges().to_vec(),
    })
}

fn check_generators(cs: &ConstraintSystem, gens: &GeneratorSet) -> Result<()> {
    if gens.len() != cs.n {
        return Err(Error::LengthMismatch {
            expected: cs.n,
            got: gens.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VerificationError {
    #[error("malformed statement: {0}")]
    Malformed(String),
    #[error("polynomial evaluation check failed")]
    PolyEval,
    #[error("inner-product argument failed")]
    Ipa,
    #[error("commitment link failed")]
    Link,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// The `g^{t_hat} h^{tau_x}` consistency check. Disabling it makes the
    /// verifier unsound; the switch exists only for experiments.
    pub check_poly_eval: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            check_poly_eval: true,
        }
    }
}

/// What the verifier needs to check a link to an external commitment.
#[derive(Clone, Copy, Debug)]
pub struct LinkStatement<'a> {
    pub vk: &'a SsVerifyingKey,
    pub c_hat: &'a Commitment,
    pub proof: &'a CpLinkProof,
}

pub fn bp_verify(
    cs: &ConstraintSystem,
    gens: &GeneratorSet,
    v: &[Commitment],
    proof: &BulletproofProof,
    link: Option<LinkStatement<'_>>,
    opts: VerifyOptions,
) -> std::result::Result<(), VerificationError> {
    let n = cs.n;
    if gens.len() != n {
        return Err(VerificationError::Malformed("generator count".into()));
    }
    if v.len() != cs.m {
        return Err(VerificationError::Malformed(format!(
            "expected {} commitments, got {}",
            cs.m,
            v.len()
        )));
    }
    let k = n.trailing_zeros() as usize;
    if !n.is_power_of_two() || proof.ipa.l.len() != k || proof.ipa.r.len() != k {
        return Err(VerificationError::Malformed(
            "inner-product round count".into(),
        ));
    }

    let mut t = statement_transcript(cs, v);
    let (y, z) = absorb_round1(&mut t, &proof.a_i, &proof.a_o, &proof.s);
    let x = absorb_round2(&mut t, &[proof.t1, proof.t3, proof.t4, proof.t5, proof.t6]);
    let x_u = absorb_round3(&mut t, &proof.tau_x, &proof.mu, &proof.t_hat);
    let pt = PublicTerms::new(cs, y, z);
    let xp = powers(x, 7);
    let (g, h) = (gens.g, gens.h);

    if opts.check_poly_eval {
        let mut bases = vec![g, h];
        let mut exps = vec![proof.t_hat - xp[2] * (pt.delta + pt.zc), proof.tau_x];
        for (vj, wj) in v.iter().zip(&pt.zv) {
            bases.push(vj.0);
            exps.push(-xp[2] * wj);
        }
        for (p, j) in [proof.t1, proof.t3, proof.t4, proof.t5, proof.t6]
            .iter()
            .zip([1, 3, 4, 5, 6])
        {
            bases.push(*p);
            exps.push(-xp[j]);
        }
        if !msm(&bases, &exps).map(|acc| acc.is_zero()).unwrap_or(false) {
            return Err(VerificationError::PolyEval);
        }
    }

    let vs = verification_scalars(n, &proof.ipa, &mut t)
        .ok_or_else(|| VerificationError::Malformed("inner-product proof".into()))?;
    let (a, b) = (proof.ipa.a, proof.ipa.b);
    let mut bases = Vec::with_capacity(2 * n + 2 * k + 5);
    let mut exps = Vec::with_capacity(bases.capacity());
    for i in 0..n {
        bases.push(gens.g_vec[i]);
        exps.push(a * vs.s[i] - x * pt.zr_scaled[i]);
        bases.push(gens.h_vec[i]);
        let yi = pt.y_inv_pows[i];
        exps.push(yi * b * vs.s_inv(i) + Scalar::one() - yi * (x * pt.zl[i] + pt.zo[i]));
    }
    bases.extend([g, h, proof.a_i, proof.a_o, proof.s]);
    exps.extend([x_u * (a * b - proof.t_hat), proof.mu, -x, -xp[2], -xp[3]]);
    for j in 0..k {
        bases.push(proof.ipa.l[j]);
        exps.push(-vs.challenges[j].square());
        bases.push(proof.ipa.r[j]);
        exps.push(-vs.challenges_inv[j].square());
    }
    if !msm(&bases, &exps).map(|acc| acc.is_zero()).unwrap_or(false) {
        return Err(VerificationError::Ipa);
    }

    if let Some(ls) = link {
        if cs.m == 0 || !cplink_verify(ls.vk, &combined_commitment(v), ls.c_hat, ls.proof) {
            return Err(VerificationError::Link);
        }
    }
    Ok(())
}

/// Every challenge the verifier derives for `proof`, in order.
pub fn replay_challenges(
    cs: &ConstraintSystem,
    v: &[Commitment],
    proof: &BulletproofProof,
) -> Vec<(&'static str, Scalar)> {
    let mut t = statement_transcript(cs, v);
    absorb_round1(&mut t, &proof.a_i, &proof.a_o, &proof.s);
    absorb_round2(&mut t, &[proof.t1, proof.t3, proof.t4, proof.t5, proof.t6]);
    absorb_round3(&mut t, &proof.tau_x, &proof.mu, &proof.t_hat);
    let _ = verification_scalars(cs.n, &proof.ipa, &mut t);
    t.challenges().to_vec()
}

// ---------------------------------------------------------------------------
// Collaborative proving

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommitMode {
    /// Commit-then-Share.
    Cts,
    /// Share-then-Commit.
    Stc,
}

impl CommitMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommitMode::Cts => "cts",
            CommitMode::Stc => "stc",
        }
    }
}

impl std::str::FromStr for CommitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cts" => Ok(CommitMode::Cts),
            "stc" => Ok(CommitMode::Stc),
            _ => Err(Error::InvalidParameter(format!("commit mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IpaMode {
    /// Open `l, r` and let every party run the IPA itself.
    Local,
    /// Run the IPA on shares.
    Distributed,
}

impl IpaMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            IpaMode::Local => "local",
            IpaMode::Distributed => "distributed",
        }
    }
}

impl std::str::FromStr for IpaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(IpaMode::Local),
            "distributed" => Ok(IpaMode::Distributed),
            _ => Err(Error::InvalidParameter(format!("IPA mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CollabOptions {
    pub commit_mode: CommitMode,
    pub ipa_mode: IpaMode,
    pub check_satisfied: bool,
}

impl Default for CollabOptions {
    fn default() -> Self {
        Self {
            commit_mode: CommitMode::Cts,
            ipa_mode: IpaMode::Local,
            check_satisfied: true,
        }
    }
}

/// Shares of the committed inputs together with their public commitments.
#[derive(Clone, Debug)]
pub struct CommittedInputs {
    pub v: Vec<AuthShare>,
    pub gamma: Vec<AuthShare>,
    pub commitments: Vec<Commitment>,
}

/// Shares every input slot from its owner and produces `V_j = g^{v_j} h^{gamma_j}`.
///
/// With Commit-then-Share, `gamma_j` is the sum of one input-mask plaintext per
/// party, so each party commits to its own slots plus its part of every
/// `gamma_j`. With Share-then-Commit, `gamma_j` is a dealer random and each party
/// commits to its shares. Either way all `m` partial commitments travel in one
/// broadcast.
pub fn commit_inputs(
    party: &mut Party,
    gens: &GeneratorSet,
    map: &OwnershipMap,
    own_values: &[Scalar],
    mode: CommitMode,
) -> Result<CommittedInputs> {
    let m = map.n_slots();
    if map.n_parties() != party.n() {
        return Err(Error::InvalidParameter(
            "ownership map does not match party count".into(),
        ));
    }
    let me = party.id();
    if own_values.len() != map.slots_of(me).len() {
        return Err(Error::LengthMismatch {
            expected: map.slots_of(me).len(),
            got: own_values.len(),
        });
    }
    let v = share_slots(party, map, own_values)?;
    let (g, h) = (gens.g, gens.h);

    let (gamma, partials) = match mode {
        CommitMode::Cts => {
            let mut gamma = Vec::with_capacity(m);
            let mut partials = Vec::with_capacity(m);
            for slot in 0..m {
                let mut share = AuthShare::zero(me);
                let mut own = Scalar::zero();
                for owner in 0..party.n() {
                    let mask = party.pop_mask(owner)?;
                    share = share + mask.share;
                    if owner == me {
                        own = mask.value.expect("own mask");
                    }
                }
                gamma.push(share);
                let mut p = h * own;
                if let Some(pos) = map.slots_of(me).iter().position(|s| *s == slot) {
                    p += g * own_values[pos];
                }
                partials.push(p);
            }
            (gamma, partials)
        }
        CommitMode::Stc => {
            let gamma = party.random_shares(m)?;
            let partials = v
                .iter()
                .zip(&gamma)
                .map(|(vs, gs)| g * vs.value + h * gs.value)
                .collect();
            (gamma, partials)
        }
    };
    let commitments = combine_partials_batch(party, &partials)?
        .into_iter()
        .map(Commitment)
        .collect();
    Ok(CommittedInputs {
        v,
        gamma,
        commitments,
    })
}

/// Authenticated shares of every slot, each input by its owner.
pub fn share_slots(
    party: &mut Party,
    map: &OwnershipMap,
    own_values: &[Scalar],
) -> Result<Vec<AuthShare>> {
    let me = party.id();
    let mut v = vec![AuthShare::zero(me); map.n_slots()];
    for owner in 0..party.n() {
        let slots = map.slots_of(owner);
        if slots.is_empty() {
            continue;
        }
        let shares = party.share_inputs(owner, (owner == me).then_some(own_values), slots.len())?;
        for (s, sh) in slots.iter().zip(shares) {
            v[*s] = sh;
        }
    }
    Ok(v)
}

/// Shared link inputs for a collaborative proof.
#[derive(Clone, Copy, Debug)]
pub struct SharedLinkWitness<'a> {
    pub ek: &'a [G1],
    pub o_hat: AuthShare,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseRecord {
    pub phase: &'static str,
    pub elapsed: Duration,
    pub traffic: TrafficStats,
}

#[derive(Clone, Debug)]
pub struct CollabProof {
    pub proof: BulletproofProof,
    pub v: Vec<Commitment>,
    pub link: Option<CpLinkProof>,
    pub challenges: Vec<(&'static str, Scalar)>,
}

/// Collaborative proof over an already shared, already committed assignment.
pub fn bp_prove_collab(
    party: &mut Party,
    cs: &ConstraintSystem,
    shared: &SharedAssignment,
    v: &[Commitment],
    gens: &GeneratorSet,
    link: Option<SharedLinkWitness<'_>>,
    opts: CollabOptions,
) -> Result<CollabProof> {
    let n = cs.n;
    check_generators(cs, gens)?;
    if shared.a_l.len() != n || shared.a_r.len() != n || shared.a_o.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: shared.a_l.len(),
        });
    }
    if shared.v.len() != cs.m || shared.gamma.len() != cs.m || v.len() != cs.m {
        return Err(Error::LengthMismatch {
            expected: cs.m,
            got: shared.v.len(),
        });
    }
    if opts.check_satisfied {
        check_linear_constraints(party, cs, shared, v)?;
    }
    let me = party.id();
    let (g, h) = (gens.g, gens.h);
    let mut t = statement_transcript(cs, v);

    // Blinders: alpha, beta, rho, s_L, s_R, tau_1, tau_3..tau_6.
    let blind = party.random_shares(3 + 2 * n + 5)?;
    let (alpha, beta, rho) = (blind[0], blind[1], blind[2]);
    let s_l = &blind[3..3 + n];
    let s_r = &blind[3 + n..3 + 2 * n];
    let taus = &blind[3 + 2 * n..];

    let vals = |v: &[AuthShare]| v.iter().map(|s| s.value).collect::<Vec<_>>();
    let a_i_share = h * alpha.value
        + msm(&gens.g_vec, &vals(&shared.a_l))?
        + msm(&gens.h_vec, &vals(&shared.a_r))?;
    let a_o_share = h * beta.value + msm(&gens.g_vec, &vals(&shared.a_o))?;
    let s_share = h * rho.value + msm(&gens.g_vec, &vals(s_l))? + msm(&gens.h_vec, &vals(s_r))?;
    let opened = party.open_group_batch(&[a_i_share, a_o_share, s_share])?;
    let (a_i, a_o, s) = (opened[0], opened[1], opened[2]);
    let (y, z) = absorb_round1(&mut t, &a_i, &a_o, &s);

    let pt = PublicTerms::new(cs, y, z);
    let l1: Vec<AuthShare> = shared
        .a_l
        .iter()
        .zip(&pt.zr_scaled)
        .map(|(a, c)| party.add_public(a, *c))
        .collect();
    let l2 = shared.a_o.clone();
    let l3 = s_l.to_vec();
    let r0 = pt.r0();
    let r1: Vec<AuthShare> = shared
        .a_r
        .iter()
        .zip(&pt.y_pows)
        .zip(&pt.zl)
        .map(|((a, y), c)| party.add_public(&(*a * *y), *c))
        .collect();
    let r3: Vec<AuthShare> = s_r.iter().zip(&pt.y_pows).map(|(s, y)| *s * *y).collect();

    let ips = party.inner_products(&[
        (&l1, &r1),
        (&l1, &r3),
        (&l2, &r1),
        (&l2, &r3),
        (&l3, &r1),
        (&l3, &r3),
    ])?;
    let t1 = linear_combination(me, &l1, &r0);
    let t3 = ips[2] + linear_combination(me, &l3, &r0);
    let t4 = ips[1] + ips[4];
    let t5 = ips[3];
    let t6 = ips[5];
    let t_shares = [t1, t3, t4, t5, t6];
    let t_group: Vec<G1> = t_shares
        .iter()
        .zip(taus)
        .map(|(tj, tau)| g * tj.value + h * tau.value)
        .collect();
    let ts_vec = party.open_group_batch(&t_group)?;
    let ts: [G1; 5] = [ts_vec[0], ts_vec[1], ts_vec[2], ts_vec[3], ts_vec[4]];
    let x = absorb_round2(&mut t, &ts);

    let xp = powers(x, 7);
    let l: Vec<AuthShare> = (0..n)
        .map(|i| l1[i] * xp[1] + l2[i] * xp[2] + l3[i] * xp[3])
        .collect();
    let r: Vec<AuthShare> = (0..n)
        .map(|i| party.add_public(&(r1[i] * xp[1] + r3[i] * xp[3]), r0[i]))
        .collect();
    let tau_x = taus[0] * xp[1]
        + taus[1] * xp[3]
        + taus[2] * xp[4]
        + taus[3] * xp[5]
        + taus[4] * xp[6]
        + linear_combination(me, &shared.gamma, &pt.zv) * xp[2];
    let mu = alpha * xp[1] + beta * xp[2] + rho * xp[3];
    let hp = h_prime(gens, &pt.y_inv_pows);

    let ipa = match opts.ipa_mode {
        IpaMode::Local => {
            let mut batch = vec![tau_x, mu];
            batch.extend_from_slice(&l);
            batch.extend_from_slice(&r);
            let opened = party.open_batch(&batch)?;
            party.check_macs()?;
            let (tau_x, mu) = (opened[0], opened[1]);
            let l_open = &opened[2..2 + n];
            let r_open = &opened[2 + n..];
            let t_hat = inner_product(l_open, r_open);
            let x_u = absorb_round3(&mut t, &tau_x, &mu, &t_hat);
            let ipa = ipa_prove(&gens.g_vec, &hp, &(g * x_u), l_open, r_open, &mut t)?;
            cross_check(party, &ipa)?;
            (tau_x, mu, t_hat, ipa)
        }
        IpaMode::Distributed => {
            let t_hat_share = party.inner_products(&[(&l, &r)])?[0];
            let opened = party.open_batch(&[tau_x, mu, t_hat_share])?;
            party.check_macs()?;
            let (tau_x, mu, t_hat) = (opened[0], opened[1], opened[2]);
            let x_u = absorb_round3(&mut t, &tau_x, &mu, &t_hat);
            let ipa = dipa_prove(party, &gens.g_vec, &hp, &(g * x_u), &l, &r, &mut t)?;
            (tau_x, mu, t_hat, ipa)
        }
    };
    let (tau_x, mu, t_hat, ipa) = ipa;
    let challenges = t.challenges().to_vec();

    let link = match link {
        Some(lw) => {
            let gamma_sum = shared
                .gamma
                .iter()
                .fold(AuthShare::zero(me), |acc, s| acc + *s);
            Some(cplink_prove_collab(
                party, lw.ek, &gamma_sum, &lw.o_hat, &shared.v,
            )?)
        }
        None => None,
    };

    Ok(CollabProof {
        proof: BulletproofProof {
            a_i,
            a_o,
            s,
            t1: ts[0],
            t3: ts[1],
            t4: ts[2],
            t5: ts[3],
            t6: ts[4],
            tau_x,
            mu,
            t_hat,
            ipa,
        },
        v: v.to_vec(),
        link,
        challenges,
    })
}

/// Opens a random combination of the linear-constraint residuals; a nonzero
/// result means the shared witness does not satisfy the circuit.
fn check_linear_constraints(
    party: &mut Party,
    cs: &ConstraintSystem,
    shared: &SharedAssignment,
    v: &[Commitment],
) -> Result<()> {
    if cs.q == 0 {
        return Ok(());
    }
    let mut seed = ByteWriter::new();
    seed.put_bytes(b"colcp/residual-check")
        .put_bytes(&cs.digest());
    for c in v {
        seed.put_g1(&c.0);
    }
    let mut rng = ChaCha20Rng::from_seed(sha256(&seed.into_bytes()));
    let weights: Vec<Scalar> = (0..cs.q).map(|_| Scalar::rand(&mut rng)).collect();
    let w = cs.weighted(&weights);
    let me = party.id();
    let residual = linear_combination(me, &shared.a_l, &w.l)
        + linear_combination(me, &shared.a_r, &w.r)
        + linear_combination(me, &shared.a_o, &w.o)
        - linear_combination(me, &shared.v, &w.v);
    let residual = party.add_public(&residual, -w.c);
    if party.open(&residual)? != Scalar::zero() {
        return Err(Error::Unsatisfied);
    }
    Ok(())
}

/// Every party must release the same IPA; compare digests before returning.
fn cross_check(party: &mut Party, ipa: &IpaProof) -> Result<()> {
    if party.n() == 1 {
        return Ok(());
    }
    let digest = sha256(&ipa.to_bytes());
    let all = party.net().exchange("ipa-check", digest.to_vec())?;
    if all.iter().any(|d| d.as_slice() != digest) {
        return Err(Error::Divergence(
            "inner-product proofs differ between parties".into(),
        ));
    }
    Ok(())
}

/// How the external commitment `c_hat` comes about.
#[derive(Clone, Debug)]
pub enum ExternalCommitment<'a> {
    /// Create it during the commit phase, under this key, with the same commit mode.
    Create(&'a CommitmentKey),
    /// It already exists; the parties hold shares of its opening.
    Existing { c_hat: Commitment, o_hat: AuthShare },
}

#[derive(Clone, Debug)]
pub struct LinkSetup<'a> {
    pub ek: &'a [G1],
    pub external: ExternalCommitment<'a>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub proof: CollabProof,
    pub c_hat: Option<Commitment>,
    pub phases: Vec<PhaseRecord>,
}

/// Commit, assign, prove and link, timing each phase.
pub fn run_pipeline(
    party: &mut Party,
    circuit: &Circuit,
    gens: &GeneratorSet,
    map: &OwnershipMap,
    own_values: &[Scalar],
    link: Option<LinkSetup<'_>>,
    opts: CollabOptions,
) -> Result<PipelineOutput> {
    let mut phases = Vec::new();
    let mut mark = (Instant::now(), party.stats());
    let mut record = |party: &Party, name: &'static str, phases: &mut Vec<PhaseRecord>| {
        let now = (Instant::now(), party.stats());
        phases.push(PhaseRecord {
            phase: name,
            elapsed: now.0 - mark.0,
            traffic: now.1 - mark.1,
        });
        mark = now;
    };

    let inputs = commit_inputs(party, gens, map, own_values, opts.commit_mode)?;
    let mut external = None;
    if let Some(setup) = &link {
        external = Some(match &setup.external {
            ExternalCommitment::Create(ck) => match opts.commit_mode {
                CommitMode::Cts => {
                    let out = cts_commit_shared(party, ck, map, own_values)?;
                    (out.commitment, out.opening_share)
                }
                CommitMode::Stc => {
                    let o = party.random_shares(1)?[0];
                    (stc_commit(party, ck, &inputs.v, &o)?, o)
                }
            },
            ExternalCommitment::Existing { c_hat, o_hat } => (*c_hat, *o_hat),
        });
    }
    record(party, "commit", &mut phases);

    let shared = assign_collab(party, circuit, &inputs.v, &inputs.gamma)?;
    record(party, "assign", &mut phases);

    let mut proof = bp_prove_collab(
        party,
        &circuit.cs,
        &shared,
        &inputs.commitments,
        gens,
        None,
        opts,
    )?;
    record(party, "prove", &mut phases);

    if let (Some(setup), Some((_, o_hat))) = (&link, &external) {
        let gamma_sum = shared
            .gamma
            .iter()
            .fold(AuthShare::zero(party.id()), |acc, s| acc + *s);
        proof.link = Some(cplink_prove_collab(
            party, setup.ek, &gamma_sum, o_hat, &shared.v,
        )?);
    }
    record(party, "link", &mut phases);

    Ok(PipelineOutput {
        proof,
        c_hat: external.map(|(c, _)| c),
        phases,
    })
}

/// Dealer budget for one [`run_pipeline`] call by `n_parties` parties.
pub fn pipeline_requirements(
    circuit: &Circuit,
    n_parties: usize,
    opts: CollabOptions,
    link: bool,
) -> DealerRequest {
    let n = circuit.cs.n;
    let m = circuit.cs.m;
    let mut req = circuit.assign_requirements();
    req.triples += 6 * n;
    if opts.ipa_mode == IpaMode::Distributed {
        req.triples += n + dipa_triples(n);
    }
    // Slot sharing takes at most m masks from any one owner.
    req.input_masks += m;
    req.randoms += 3 + 2 * n + 5;
    match opts.commit_mode {
        CommitMode::Cts => req.input_masks += m + usize::from(link),
        CommitMode::Stc => req.randoms += m + usize::from(link),
    }
    let _ = n_parties;
    req
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{assign_plain, CircuitBuilder, LinearCombination};

    fn one_gate() -> Circuit {
        let mut b = CircuitBuilder::new();
        let v = b.alloc_committed(1)[0];
        let (_, _, o) = b.multiply(Scalar::from(3u64), Scalar::from(4u64)).unwrap();
        b.constrain(LinearCombination::from(o) - v).unwrap();
        b.finalize()
    }

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(11)
    }

    #[test]
    fn polynomial_identity_and_blinding() {
        let c = one_gate();
        let mut rng = rng();
        let asg = assign_plain(&c, &[Scalar::from(12u64)], &[Scalar::from(5u64)]).unwrap();
        let pt = PublicTerms::new(&c.cs, Scalar::rand(&mut rng), Scalar::rand(&mut rng));
        let s_l = vec![Scalar::rand(&mut rng)];
        let s_r = vec![Scalar::rand(&mut rng)];
        let polys = VectorPolys::new(&asg, &s_l, &s_r, &pt);
        let tc = polys.t_coefficients();
        assert_eq!(tc[2], inner_product(&pt.zv, &asg.v) + pt.zc + pt.delta);
        for _ in 0..10 {
            let x = Scalar::rand(&mut rng);
            let t_x: Scalar = powers(x, 7).iter().zip(&tc).map(|(a, b)| *a * b).sum();
            assert_eq!(inner_product(&polys.eval_l(x), &polys.eval_r(x)), t_x);
        }
    }

    #[test]
    fn single_prover_roundtrip() {
        let c = one_gate();
        let gens = GeneratorSet::new(c.cs.n);
        let asg = assign_plain(&c, &[Scalar::from(12u64)], &[Scalar::from(5u64)]).unwrap();
        let out = bp_prove_single(
            &c.cs,
            &asg,
            &gens,
            None,
            ProveOptions::default(),
            &mut rng(),
        )
        .unwrap();
        assert_eq!(
            bp_verify(
                &c.cs,
                &gens,
                &out.v,
                &out.proof,
                None,
                VerifyOptions::default()
            ),
            Ok(())
        );
        let mut bad = out.proof.clone();
        bad.tau_x += Scalar::one();
        assert_eq!(
            bp_verify(&c.cs, &gens, &out.v, &bad, None, VerifyOptions::default()),
            Err(VerificationError::PolyEval)
        );
        let bytes = out.proof.to_bytes(&c.cs);
        assert_eq!(bytes.len(), proof_size(c.cs.n));
        assert_eq!(
            BulletproofProof::decode_for(&c.cs, &bytes).unwrap(),
            out.proof
        );
        assert_eq!(replay_challenges(&c.cs, &out.v, &out.proof), out.challenges);
    }

    #[test]
    fn unsatisfied_is_refused() {
        let c = one_gate();
        let gens = GeneratorSet::new(c.cs.n);
        let asg = assign_plain(&c, &[Scalar::from(13u64)], &[Scalar::from(5u64)]).unwrap();
        assert!(matches!(
            bp_prove_single(
                &c.cs,
                &asg,
                &gens,
                None,
                ProveOptions::default(),
                &mut rng()
            ),
            Err(Error::Unsatisfied)
        ));
        let forced = bp_prove_single(
            &c.cs,
            &asg,
            &gens,
            None,
            ProveOptions {
                check_satisfied: false,
            },
            &mut rng(),
        )
        .unwrap();
        assert!(bp_verify(
            &c.cs,
            &gens,
            &forced.v,
            &forced.proof,
            None,
            VerifyOptions::default()
        )
        .is_err());
    }

    #[test]
    fn empty_input_circuit() {
        let mut b = CircuitBuilder::new();
        let (_, _, o) = b.multiply(Scalar::from(2u64), Scalar::from(5u64)).unwrap();
        b.constrain(LinearCombination::from(o) - Scalar::from(10u64))
            .unwrap();
        let c = b.finalize();
        let gens = GeneratorSet::new(c.cs.n);
        let asg = assign_plain(&c, &[], &[]).unwrap();
        let out = bp_prove_single(
            &c.cs,
            &asg,
            &gens,
            None,
            ProveOptions::default(),
            &mut rng(),
        )
        .unwrap();
        assert!(out.v.is_empty());
        assert_eq!(
            bp_verify(
                &c.cs,
                &gens,
                &out.v,
                &out.proof,
                None,
                VerifyOptions::default()
            ),
            Ok(())
        );
    }
}
