//! Inner-product argument: proves knowledge of `a, b` with
//! `P = g^a h^b u^{<a,b>}` using `log2 n` rounds of halving.
//!
//! Round `j` sends `L_j, R_j`, derives `x_j` from the running transcript and
//! folds
//!
//! ```text
//! a' = a_lo x + a_hi x^-1      g' = g_lo^{x^-1} g_hi^{x}
//! b' = b_lo x^-1 + b_hi x      h' = h_lo^{x} h_hi^{x^-1}
//! ```
//!
//! The verifier never folds: it checks everything in one multi-exponentiation.
//! The argument is not zero-knowledge and is not meant to be.

use ark_ff::{batch_inversion, Field, One, Zero};

use crate::algebra::{
    inner_product, msm, ByteReader, ByteWriter, Scalar, G1, G1_BYTES, SCALAR_BYTES,
};
use crate::error::{Error, Result};
use crate::mpc::{AuthShare, Party};
use crate::transcript::Transcript;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpaProof {
    pub l: Vec<G1>,
    pub r: Vec<G1>,
    pub a: Scalar,
    pub b: Scalar,
}

impl IpaProof {
    pub fn rounds(&self) -> usize {
        self.l.len()
    }

    /// `u32 k`, then `L_1 R_1 ... L_k R_k`, then `a, b`.
    pub fn write_to(&self, w: &mut ByteWriter) {
        w.put_u32(self.l.len() as u32);
        for (l, r) in self.l.iter().zip(&self.r) {
            w.put_g1(l).put_g1(r);
        }
        w.put_scalar(&self.a).put_scalar(&self.b);
    }

    pub fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let k = r.u32()? as usize;
        if k > 64 || r.remaining() < k * 2 * G1_BYTES + 2 * SCALAR_BYTES {
            return Err(Error::Decode("truncated inner-product proof".into()));
        }
        let mut l = Vec::with_capacity(k);
        let mut rr = Vec::with_capacity(k);
        for _ in 0..k {
            l.push(r.g1()?);
            rr.push(r.g1()?);
        }
        Ok(Self {
            l,
            r: rr,
            a: r.scalar()?,
            b: r.scalar()?,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        self.write_to(&mut w);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let p = Self::read_from(&mut r)?;
        r.finish()?;
        Ok(p)
    }

    pub fn serialized_len(&self) -> usize {
        4 + 2 * self.l.len() * G1_BYTES + 2 * SCALAR_BYTES
    }
}

/// Zero-pads scalars and pads generators with the identity up to a power of two.
fn padded<T: Clone>(v: &[T], fill: T) -> Vec<T> {
    let n = v.len().max(1).next_power_of_two();
    let mut out = v.to_vec();
    out.resize(n, fill);
    out
}

fn check_lengths(g: &[G1], h: &[G1], a: usize, b: usize) -> Result<()> {
    for got in [h.len(), a, b] {
        if got != g.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                got,
            });
        }
    }
    if g.is_empty() {
        return Err(Error::InvalidParameter(
            "empty inner-product instance".into(),
        ));
    }
    Ok(())
}

fn begin(transcript: &mut Transcript, n: usize) {
    transcript.append_u64(b"ipa/n", n as u64);
    transcript.append_scalar(b"ipa/x0", &Scalar::zero());
}

fn round_challenge(transcript: &mut Transcript, l: &G1, r: &G1) -> Result<(Scalar, Scalar)> {
    transcript.append_point(b"ipa/L", l);
    transcript.append_point(b"ipa/R", r);
    let x = transcript.challenge_scalar("ipa/x");
    let x_inv = x
        .inverse()
        .ok_or_else(|| Error::InvalidParameter("zero challenge".into()))?;
    Ok((x, x_inv))
}

fn fold_generators(lo: &[G1], hi: &[G1], s_lo: Scalar, s_hi: Scalar) -> Vec<G1> {
    lo.iter()
        .zip(hi)
        .map(|(l, h)| *l * s_lo + *h * s_hi)
        .collect()
}

pub fn ipa_prove(
    g_vec: &[G1],
    h_vec: &[G1],
    u: &G1,
    a: &[Scalar],
    b: &[Scalar],
    transcript: &mut Transcript,
) -> Result<IpaProof> {
    check_lengths(g_vec, h_vec, a.len(), b.len())?;
    let mut g = padded(g_vec, G1::zero());
    let mut h = padded(h_vec, G1::zero());
    let mut a = padded(a, Scalar::zero());
    let mut b = padded(b, Scalar::zero());
    begin(transcript, g.len());

    let mut ls = Vec::new();
    let mut rs = Vec::new();
    while a.len() > 1 {
        let half = a.len() / 2;
        let (a_lo, a_hi) = a.split_at(half);
        let (b_lo, b_hi) = b.split_at(half);
        let (g_lo, g_hi) = g.split_at(half);
        let (h_lo, h_hi) = h.split_at(half);
        let c_l = inner_product(a_lo, b_hi);
        let c_r = inner_product(a_hi, b_lo);
        let l = msm(g_hi, a_lo)? + msm(h_lo, b_hi)? + *u * c_l;
        let r = msm(g_lo, a_hi)? + msm(h_hi, b_lo)? + *u * c_r;
        let (x, x_inv) = round_challenge(transcript, &l, &r)?;
        ls.push(l);
        rs.push(r);

        let a2: Vec<Scalar> = a_lo
            .iter()
            .zip(a_hi)
            .map(|(lo, hi)| *lo * x + *hi * x_inv)
            .collect();
        let b2: Vec<Scalar> = b_lo
            .iter()
            .zip(b_hi)
            .map(|(lo, hi)| *lo * x_inv + *hi * x)
            .collect();
        let g2 = fold_generators(g_lo, g_hi, x_inv, x);
        let h2 = fold_generators(h_lo, h_hi, x, x_inv);
        a = a2;
        b = b2;
        g = g2;
        h = h2;
    }
    Ok(IpaProof {
        l: ls,
        r: rs,
        a: a[0],
        b: b[0],
    })
}

/// Round challenges and the verifier's `s` vector, `s_i = prod_j x_j^{+-1}`
/// with `+1` where bit `j` of `i` (most significant first) is set.
#[derive(Clone, Debug)]
pub struct VerificationScalars {
    pub challenges: Vec<Scalar>,
    pub challenges_inv: Vec<Scalar>,
    pub s: Vec<Scalar>,
}

impl VerificationScalars {
    /// `1 / s_i`, which is `s` at the bit-complemented index.
    pub fn s_inv(&self, i: usize) -> Scalar {
        self.s[self.s.len() - 1 - i]
    }
}

/// Replays the transcript for `proof` over `n` (padded) positions.
pub fn verification_scalars(
    n: usize,
    proof: &IpaProof,
    transcript: &mut Transcript,
) -> Option<VerificationScalars> {
    let n = n.max(1).next_power_of_two();
    let k = n.trailing_zeros() as usize;
    if proof.l.len() != k || proof.r.len() != k {
        return None;
    }
    begin(transcript, n);
    let mut xs = Vec::with_capacity(k);
    for (l, r) in proof.l.iter().zip(&proof.r) {
        transcript.append_point(b"ipa/L", l);
        transcript.append_point(b"ipa/R", r);
        xs.push(transcript.challenge_scalar("ipa/x"));
    }
    let mut inv = xs.clone();
    batch_inversion(&mut inv);

    let mut s = vec![inv.iter().product::<Scalar>(); n];
    let x_sq: Vec<Scalar> = xs.iter().map(|x| x.square()).collect();
    for i in 1..n {
        // Flip the lowest set bit of i back to zero and multiply in x_j^2.
        let lowest = i.trailing_zeros() as usize;
        let j = k - 1 - lowest;
        s[i] = s[i - (1 << lowest)] * x_sq[j];
    }
    Some(VerificationScalars {
        challenges: xs,
        challenges_inv: inv,
        s,
    })
}

/// Checks `g^{a s} h^{b / s} u^{ab} = P prod L_j^{x_j^2} R_j^{x_j^-2}` as one
/// multi-exponentiation of `2n + 2k + 2` terms.
pub fn ipa_verify(
    g_vec: &[G1],
    h_vec: &[G1],
    u: &G1,
    p: &G1,
    proof: &IpaProof,
    transcript: &mut Transcript,
) -> bool {
    if g_vec.len() != h_vec.len() || g_vec.is_empty() {
        return false;
    }
    let g = padded(g_vec, G1::zero());
    let h = padded(h_vec, G1::zero());
    let n = g.len();
    let Some(vs) = verification_scalars(n, proof, transcript) else {
        return false;
    };
    let mut bases = Vec::with_capacity(2 * n + 2 * vs.challenges.len() + 2);
    let mut exps = Vec::with_capacity(bases.capacity());
    for i in 0..n {
        bases.push(g[i]);
        exps.push(proof.a * vs.s[i]);
        bases.push(h[i]);
        exps.push(proof.b * vs.s_inv(i));
    }
    bases.push(*u);
    exps.push(proof.a * proof.b);
    bases.push(*p);
    exps.push(-Scalar::one());
    for j in 0..vs.challenges.len() {
        bases.push(proof.l[j]);
        exps.push(-vs.challenges[j].square());
        bases.push(proof.r[j]);
        exps.push(-vs.challenges_inv[j].square());
    }
    matches!(msm(&bases, &exps), Ok(acc) if acc.is_zero())
}

/// Distributed prover over shared `a, b`. Each round computes `c_L, c_R` with
/// Beaver inner products and opens group shares of `L_j, R_j`; the folded
/// `a', b'` are opened at the end. The output equals [`ipa_prove`] on the
/// reconstructed vectors.
pub fn dipa_prove(
    party: &mut Party,
    g_vec: &[G1],
    h_vec: &[G1],
    u: &G1,
    a: &[AuthShare],
    b: &[AuthShare],
    transcript: &mut Transcript,
) -> Result<IpaProof> {
    check_lengths(g_vec, h_vec, a.len(), b.len())?;
    let zero = AuthShare::zero(party.id());
    let mut g = padded(g_vec, G1::zero());
    let mut h = padded(h_vec, G1::zero());
    let mut a = padded(a, zero);
    let mut b = padded(b, zero);
    begin(transcript, g.len());

    let mut ls = Vec::new();
    let mut rs = Vec::new();
    while a.len() > 1 {
        let half = a.len() / 2;
        let (a_lo, a_hi) = a.split_at(half);
        let (b_lo, b_hi) = b.split_at(half);
        let (g_lo, g_hi) = g.split_at(half);
        let (h_lo, h_hi) = h.split_at(half);
        let cs = party.inner_products(&[(a_lo, b_hi), (a_hi, b_lo)])?;
        let vals = |v: &[AuthShare]| v.iter().map(|s| s.value).collect::<Vec<_>>();
        let l_share = msm(g_hi, &vals(a_lo))? + msm(h_lo, &vals(b_hi))? + *u * cs[0].value;
        let r_share = msm(g_lo, &vals(a_hi))? + msm(h_hi, &vals(b_lo))? + *u * cs[1].value;
        let opened = party.open_group_batch(&[l_share, r_share])?;
        let (l, r) = (opened[0], opened[1]);
        let (x, x_inv) = round_challenge(transcript, &l, &r)?;
        ls.push(l);
        rs.push(r);

        let a2: Vec<AuthShare> = a_lo
            .iter()
            .zip(a_hi)
            .map(|(lo, hi)| *lo * x + *hi * x_inv)
            .collect();
        let b2: Vec<AuthShare> = b_lo
            .iter()
            .zip(b_hi)
            .map(|(lo, hi)| *lo * x_inv + *hi * x)
            .collect();
        let g2 = fold_generators(g_lo, g_hi, x_inv, x);
        let h2 = fold_generators(h_lo, h_hi, x, x_inv);
        a = a2;
        b = b2;
        g = g2;
        h = h2;
    }
    let finals = party.open_batch(&[a[0], b[0]])?;
    party.check_macs()?;
    Ok(IpaProof {
        l: ls,
        r: rs,
        a: finals[0],
        b: finals[1],
    })
}

/// Beaver triples consumed by [`dipa_prove`] for `n` positions: `2(n' - 1)`
/// for the padded length `n'`.
pub fn dipa_triples(n: usize) -> usize {
    2 * (n.max(1).next_power_of_two() - 1)
}
