//! Linear-subspace argument over G1 and the commitment-linking proof built on it.
//!
//! A statement `x = M w` with `M` a public matrix of group elements is proven
//! by a single group element `pi = <w, P>` where `P = M^T k` for a secret `k`.
//! Verification is one pairing-product check. Linking two Pedersen commitments
//! under different keys is the special case where `M` stacks both keys.
//!
//! Keygen is a trusted setup: whoever sees `(k, a)` can forge proofs. The
//! trapdoor is wiped before keygen returns.

use rand::{CryptoRng, RngCore};
use zeroize::Zeroize;

use crate::algebra::{
    encode_g1, g2_generator, msm, pairing_product_check, ByteReader, ByteWriter, Scalar,
    UniformRand, G1, G2,
};
use crate::error::{Error, Result};
use crate::mpc::{AuthShare, Party};
use crate::pedersen::{Commitment, CommitmentKey, Opening};

/// Sparse `l x t` matrix over G1; absent entries are the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, G1)>,
}

impl SubspaceMatrix {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix shape {rows}x{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries: Vec::new(),
        })
    }

    pub fn set(&mut self, row: usize, col: usize, value: G1) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::InvalidParameter(format!(
                "entry ({row},{col}) out of range"
            )));
        }
        self.entries.retain(|(r, c, _)| (*r, *c) != (row, col));
        if value != G1::default() {
            self.entries.push((row, col, value));
            self.entries.sort_by_key(|(r, c, _)| (*r, *c));
        }
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> G1 {
        self.entries
            .iter()
            .find(|(r, c, _)| (*r, *c) == (row, col))
            .map(|(_, _, v)| *v)
            .unwrap_or_default()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of non-identity entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `x = M w`, one group element per row.
    pub fn apply(&self, w: &[Scalar]) -> Result<Vec<G1>> {
        if w.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: w.len(),
            });
        }
        let mut out = vec![G1::default(); self.rows];
        for (row, slot) in out.iter_mut().enumerate() {
            let (bases, exps): (Vec<G1>, Vec<Scalar>) = self
                .entries
                .iter()
                .filter(|(r, _, _)| *r == row)
                .map(|(_, c, v)| (*v, w[*c]))
                .unzip();
            *slot = msm(&bases, &exps)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsVerifyingKey {
    pub c_prime: Vec<G2>,
    pub a_prime: G2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsKeys {
    pub ek: Vec<G1>,
    pub vk: SsVerifyingKey,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CpLinkProof(pub G1);

impl CpLinkProof {
    pub fn to_bytes(&self) -> [u8; crate::algebra::G1_BYTES] {
        encode_g1(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        crate::algebra::decode_g1(bytes).map(CpLinkProof)
    }
}

const KEYS_MAGIC: &[u8; 4] = b"CPSS";
const KEYS_VERSION: u16 = 1;

impl SsKeys {
    pub fn rows(&self) -> usize {
        self.vk.c_prime.len()
    }

    pub fn cols(&self) -> usize {
        self.ek.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(KEYS_MAGIC)
            .put_u16(KEYS_VERSION)
            .put_u32(self.rows() as u32)
            .put_u32(self.cols() as u32);
        for p in &self.ek {
            w.put_g1(p);
        }
        for q in &self.vk.c_prime {
            w.put_g2(q);
        }
        w.put_g2(&self.vk.a_prime);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != KEYS_MAGIC {
            return Err(Error::Decode("not a subspace key file".into()));
        }
        if r.u16()? != KEYS_VERSION {
            return Err(Error::Decode("unsupported key version".into()));
        }
        let l = r.u32()? as usize;
        let t = r.u32()? as usize;
        if l == 0 || t == 0 {
            return Err(Error::Decode("empty key".into()));
        }
        let ek = (0..t).map(|_| r.g1()).collect::<Result<Vec<_>>>()?;
        let c_prime = (0..l).map(|_| r.g2()).collect::<Result<Vec<_>>>()?;
        let a_prime = r.g2()?;
        r.finish()?;
        Ok(Self {
            ek,
            vk: SsVerifyingKey { c_prime, a_prime },
        })
    }
}

pub fn ss_keygen<R: RngCore + CryptoRng>(m: &SubspaceMatrix, rng: &mut R) -> SsKeys {
    let mut k: Vec<Scalar> = (0..m.rows).map(|_| Scalar::rand(rng)).collect();
    let mut a = Scalar::rand(rng);

    let mut ek = vec![G1::default(); m.cols];
    for (row, col, v) in &m.entries {
        ek[*col] += *v * k[*row];
    }
    let g2 = g2_generator();
    let c_prime = k.iter().map(|ki| g2 * (a * ki)).collect();
    let a_prime = g2 * a;

    k.zeroize();
    a.zeroize();
    SsKeys {
        ek,
        vk: SsVerifyingKey { c_prime, a_prime },
    }
}

pub fn ss_prove(ek: &[G1], w: &[Scalar]) -> Result<CpLinkProof> {
    msm(ek, w).map(CpLinkProof)
}

/// `prod_i e(x_i, C'_i) == e(pi, a')`.
pub fn ss_verify(vk: &SsVerifyingKey, x: &[G1], pi: &CpLinkProof) -> bool {
    if x.len() != vk.c_prime.len() {
        return false;
    }
    let lhs: Vec<(G1, G2)> = x.iter().copied().zip(vk.c_prime.iter().copied()).collect();
    pairing_product_check(&lhs, (pi.0, vk.a_prime))
}

/// Matrix linking commitments under `keys` (all of equal message length `n`):
/// row `r` has `keys[r].g_0` in column `r` and `keys[r].g_1..g_n` in the
/// trailing `n` columns.
pub fn link_matrix(keys: &[&CommitmentKey]) -> Result<SubspaceMatrix> {
    let l = keys.len();
    let n = keys
        .first()
        .ok_or_else(|| Error::InvalidParameter("no commitment keys".into()))?
        .message_len();
    let mut m = SubspaceMatrix::new(l, l + n)?;
    for (r, ck) in keys.iter().enumerate() {
        if ck.message_len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: ck.message_len(),
            });
        }
        m.set(r, r, ck.opening_base())?;
        for (j, g) in ck.message_bases().iter().enumerate() {
            m.set(r, l + j, *g)?;
        }
    }
    Ok(m)
}

/// Keys for proving that `c` under `ck` and `c'` under `ck_prime` open to the
/// same message.
pub fn cplink_keygen<R: RngCore + CryptoRng>(
    ck: &CommitmentKey,
    ck_prime: &CommitmentKey,
    rng: &mut R,
) -> Result<SsKeys> {
    cplink_keygen_multi(&[ck, ck_prime], rng)
}

/// Linking keys for any number of commitments to one message.
pub fn cplink_keygen_multi<R: RngCore + CryptoRng>(
    keys: &[&CommitmentKey],
    rng: &mut R,
) -> Result<SsKeys> {
    Ok(ss_keygen(&link_matrix(keys)?, rng))
}

pub fn cplink_prove(
    ek: &[G1],
    o: &Opening,
    o_prime: &Opening,
    u: &[Scalar],
) -> Result<CpLinkProof> {
    cplink_prove_multi(ek, &[*o, *o_prime], u)
}

pub fn cplink_prove_multi(ek: &[G1], openings: &[Opening], u: &[Scalar]) -> Result<CpLinkProof> {
    let w: Vec<Scalar> = openings
        .iter()
        .map(|o| o.0)
        .chain(u.iter().copied())
        .collect();
    if w.len() != ek.len() {
        return Err(Error::LengthMismatch {
            expected: ek.len(),
            got: w.len(),
        });
    }
    ss_prove(ek, &w)
}

pub fn cplink_verify(
    vk: &SsVerifyingKey,
    c: &Commitment,
    c_prime: &Commitment,
    pi: &CpLinkProof,
) -> bool {
    ss_verify(vk, &[c.0, c_prime.0], pi)
}

pub fn cplink_verify_multi(vk: &SsVerifyingKey, cs: &[Commitment], pi: &CpLinkProof) -> bool {
    let x: Vec<G1> = cs.iter().map(|c| c.0).collect();
    ss_verify(vk, &x, pi)
}

/// This party's share of the linking proof: the same MSM on value shares.
pub fn cplink_local_share(ek: &[G1], openings: &[AuthShare], u: &[AuthShare]) -> Result<G1> {
    let w: Vec<Scalar> = openings.iter().chain(u).map(|s| s.value).collect();
    if w.len() != ek.len() {
        return Err(Error::LengthMismatch {
            expected: ek.len(),
            got: w.len(),
        });
    }
    msm(ek, &w)
}

/// Collaborative linking proof: prove on shares locally, then open the sum.
pub fn cplink_prove_collab(
    party: &mut Party,
    ek: &[G1],
    o: &AuthShare,
    o_prime: &AuthShare,
    u: &[AuthShare],
) -> Result<CpLinkProof> {
    cplink_prove_collab_multi(party, ek, &[*o, *o_prime], u)
}

pub fn cplink_prove_collab_multi(
    party: &mut Party,
    ek: &[G1],
    openings: &[AuthShare],
    u: &[AuthShare],
) -> Result<CpLinkProof> {
    let local = cplink_local_share(ek, openings, u)?;
    Ok(CpLinkProof(party.open_group_batch(&[local])?[0]))
}
