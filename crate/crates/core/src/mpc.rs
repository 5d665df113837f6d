//! SPDZ-style online phase over the scalar field.
//!
//! Values are additively shared among `N` parties, each share carrying a MAC
//! share under a global key `alpha` that is itself additively shared. Linear
//! operations are local; multiplication consumes a Beaver triple; openings are
//! recorded and checked in batches with a commit-then-reveal MAC check.
//!
//! Preprocessing (triples, input masks, random values and random bits) comes
//! from a trusted dealer. With a single party every operation degrades to
//! plaintext arithmetic and nothing is sent.

use std::collections::VecDeque;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::algebra::{
    decode_g1, encode_g1, encode_scalar, scalar_bit, ByteReader, ByteWriter, Scalar, UniformRand,
    G1, G1_BYTES, SCALAR_BYTES,
};
use crate::error::{Error, Result};
use crate::transport::{Network, TrafficStats};

/// Statistical masking parameter for bit decomposition.
pub const BIT_DECOMPOSITION_SLACK: usize = 40;

/// One party's additive share of a value together with its MAC share.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuthShare {
    pub party_id: usize,
    pub value: Scalar,
    pub mac: Scalar,
}

impl AuthShare {
    pub fn new(party_id: usize, value: Scalar, mac: Scalar) -> Self {
        Self {
            party_id,
            value,
            mac,
        }
    }

    pub fn zero(party_id: usize) -> Self {
        Self::new(party_id, Scalar::from(0u64), Scalar::from(0u64))
    }

    pub fn checked_add(&self, other: &AuthShare) -> Result<AuthShare> {
        self.same_party(other)?;
        Ok(*self + *other)
    }

    pub fn checked_sub(&self, other: &AuthShare) -> Result<AuthShare> {
        self.same_party(other)?;
        Ok(*self - *other)
    }

    /// Adds a public constant: the value moves at party 0 only, every MAC share
    /// moves by `alpha_i * c`.
    pub fn add_public(&self, c: Scalar, key: &MacKeyShare) -> AuthShare {
        debug_assert_eq!(self.party_id, key.party_id);
        let mut out = *self;
        if self.party_id == 0 {
            out.value += c;
        }
        out.mac += key.alpha_share * c;
        out
    }

    fn same_party(&self, other: &AuthShare) -> Result<()> {
        if self.party_id != other.party_id {
            return Err(Error::PartyMismatch {
                expected: self.party_id,
                got: other.party_id,
            });
        }
        Ok(())
    }
}

impl Add for AuthShare {
    type Output = AuthShare;

    fn add(self, rhs: AuthShare) -> AuthShare {
        debug_assert_eq!(self.party_id, rhs.party_id);
        AuthShare::new(self.party_id, self.value + rhs.value, self.mac + rhs.mac)
    }
}

impl Sub for AuthShare {
    type Output = AuthShare;

    fn sub(self, rhs: AuthShare) -> AuthShare {
        debug_assert_eq!(self.party_id, rhs.party_id);
        AuthShare::new(self.party_id, self.value - rhs.value, self.mac - rhs.mac)
    }
}

impl Neg for AuthShare {
    type Output = AuthShare;

    fn neg(self) -> AuthShare {
        AuthShare::new(self.party_id, -self.value, -self.mac)
    }
}

impl Mul<Scalar> for AuthShare {
    type Output = AuthShare;

    fn mul(self, c: Scalar) -> AuthShare {
        AuthShare::new(self.party_id, self.value * c, self.mac * c)
    }
}

/// Share-wise linear combination `sum_k coeffs[k] * shares[k]`.
pub fn linear_combination(party_id: usize, shares: &[AuthShare], coeffs: &[Scalar]) -> AuthShare {
    debug_assert_eq!(shares.len(), coeffs.len());
    shares
        .iter()
        .zip(coeffs)
        .fold(AuthShare::zero(party_id), |acc, (s, c)| acc + *s * *c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MacKeyShare {
    pub party_id: usize,
    pub alpha_share: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeaverTriple {
    pub a: AuthShare,
    pub b: AuthShare,
    pub c: AuthShare,
}

/// A random shared value whose plaintext is known to `owner` only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputMask {
    pub owner: usize,
    pub share: AuthShare,
    /// `Some(r)` exactly at the owner.
    pub value: Option<Scalar>,
}

/// Multiplicative share of a group element (additive in code): the element is
/// the sum of all parties' shares. Carries no MAC.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupShare {
    pub party_id: usize,
    pub element_share: G1,
}

/// `base^{x_i}` on this party's value share.
pub fn exp_to_group_share(base: &G1, x: &AuthShare) -> GroupShare {
    GroupShare {
        party_id: x.party_id,
        element_share: *base * x.value,
    }
}

/// What the dealer hands out, per party.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DealerRequest {
    pub triples: usize,
    /// Masks per owning party.
    pub input_masks: usize,
    pub randoms: usize,
    pub random_bits: usize,
}

impl DealerRequest {
    pub fn merge(self, other: DealerRequest) -> DealerRequest {
        DealerRequest {
            triples: self.triples + other.triples,
            input_masks: self.input_masks + other.input_masks,
            randoms: self.randoms + other.randoms,
            random_bits: self.random_bits + other.random_bits,
        }
    }
}

/// One party's preprocessing material.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preprocessing {
    pub party_id: usize,
    pub n_parties: usize,
    pub mac_key: MacKeyShare,
    pub triples: VecDeque<BeaverTriple>,
    /// Indexed by owner.
    pub masks: Vec<VecDeque<InputMask>>,
    pub randoms: VecDeque<AuthShare>,
    pub random_bits: VecDeque<AuthShare>,
}

const PREP_MAGIC: &[u8; 4] = b"CPSD";
const PREP_VERSION: u16 = 1;

impl Preprocessing {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(PREP_MAGIC)
            .put_u16(PREP_VERSION)
            .put_u32(self.n_parties as u32)
            .put_u32(self.party_id as u32)
            .put_scalar(&self.mac_key.alpha_share)
            .put_len(self.triples.len());
        for t in &self.triples {
            for s in [t.a, t.b, t.c] {
                w.put_scalar(&s.value).put_scalar(&s.mac);
            }
        }
        w.put_len(self.masks.len());
        for queue in &self.masks {
            w.put_len(queue.len());
            for m in queue {
                w.put_scalar(&m.share.value).put_scalar(&m.share.mac);
                match m.value {
                    Some(r) => w.put_u8(1).put_scalar(&r),
                    None => w.put_u8(0),
                };
            }
        }
        for pool in [&self.randoms, &self.random_bits] {
            w.put_len(pool.len());
            for s in pool {
                w.put_scalar(&s.value).put_scalar(&s.mac);
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(4)? != PREP_MAGIC {
            return Err(Error::Decode("not a preprocessing file".into()));
        }
        let version = r.u16()?;
        if version != PREP_VERSION {
            return Err(Error::Decode(format!("unsupported version {version}")));
        }
        let n_parties = r.u32()? as usize;
        let party_id = r.u32()? as usize;
        if party_id >= n_parties {
            return Err(Error::Decode("party id out of range".into()));
        }
        let mac_key = MacKeyShare {
            party_id,
            alpha_share: r.scalar()?,
        };
        let share = |r: &mut ByteReader<'_>| -> Result<AuthShare> {
            Ok(AuthShare::new(party_id, r.scalar()?, r.scalar()?))
        };
        let n_triples = r.len_prefix(6 * SCALAR_BYTES)?;
        let mut triples = VecDeque::with_capacity(n_triples);
        for _ in 0..n_triples {
            triples.push_back(BeaverTriple {
                a: share(&mut r)?,
                b: share(&mut r)?,
                c: share(&mut r)?,
            });
        }
        let owners = r.len_prefix(4)?;
        if owners != n_parties {
            return Err(Error::Decode(
                "mask table does not match party count".into(),
            ));
        }
        let mut masks = Vec::with_capacity(owners);
        for owner in 0..owners {
            let count = r.len_prefix(2 * SCALAR_BYTES + 1)?;
            let mut queue = VecDeque::with_capacity(count);
            for _ in 0..count {
                let s = share(&mut r)?;
                let value = match r.u8()? {
                    0 => None,
                    1 => Some(r.scalar()?),
                    _ => return Err(Error::Decode("bad mask flag".into())),
                };
                if value.is_some() != (owner == party_id) {
                    return Err(Error::Decode("mask plaintext at non-owner".into()));
                }
                queue.push_back(InputMask {
                    owner,
                    share: s,
                    value,
                });
            }
            masks.push(queue);
        }
        let mut pools = [VecDeque::new(), VecDeque::new()];
        for pool in pools.iter_mut() {
            let count = r.len_prefix(2 * SCALAR_BYTES)?;
            for _ in 0..count {
                pool.push_back(share(&mut r)?);
            }
        }
        r.finish()?;
        let [randoms, random_bits] = pools;
        Ok(Self {
            party_id,
            n_parties,
            mac_key,
            triples,
            masks,
            randoms,
            random_bits,
        })
    }

    pub fn write_to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn read_from_file(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

/// Trusted-dealer stand-in for the offline phase. Requires `N >= 2`; see
/// [`deal`] for the single-party degenerate case.
pub fn dealer_setup<R: RngCore + CryptoRng>(
    n: usize,
    num_triples: usize,
    num_input_masks: usize,
    rng: &mut R,
) -> Result<Vec<Preprocessing>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "dealer needs at least 2 parties, got {n}"
        )));
    }
    deal(
        n,
        &DealerRequest {
            triples: num_triples,
            input_masks: num_input_masks,
            ..Default::default()
        },
        rng,
    )
}

/// Generates preprocessing for `n >= 1` parties.
pub fn deal<R: RngCore + CryptoRng>(
    n: usize,
    req: &DealerRequest,
    rng: &mut R,
) -> Result<Vec<Preprocessing>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one party".into()));
    }
    let alpha_shares: Vec<Scalar> = (0..n).map(|_| Scalar::rand(rng)).collect();
    let alpha: Scalar = alpha_shares.iter().sum();

    let mut out: Vec<Preprocessing> = (0..n)
        .map(|i| Preprocessing {
            party_id: i,
            n_parties: n,
            mac_key: MacKeyShare {
                party_id: i,
                alpha_share: alpha_shares[i],
            },
            triples: VecDeque::with_capacity(req.triples),
            masks: vec![VecDeque::with_capacity(req.input_masks); n],
            randoms: VecDeque::with_capacity(req.randoms),
            random_bits: VecDeque::with_capacity(req.random_bits),
        })
        .collect();

    for _ in 0..req.triples {
        let a = Scalar::rand(rng);
        let b = Scalar::rand(rng);
        let sa = share_plaintext(a, alpha, n, rng);
        let sb = share_plaintext(b, alpha, n, rng);
        let sc = share_plaintext(a * b, alpha, n, rng);
        for (i, p) in out.iter_mut().enumerate() {
            p.triples.push_back(BeaverTriple {
                a: sa[i],
                b: sb[i],
                c: sc[i],
            });
        }
    }
    for owner in 0..n {
        for _ in 0..req.input_masks {
            let r = Scalar::rand(rng);
            let shares = share_plaintext(r, alpha, n, rng);
            for (i, p) in out.iter_mut().enumerate() {
                p.masks[owner].push_back(InputMask {
                    owner,
                    share: shares[i],
                    value: (i == owner).then_some(r),
                });
            }
        }
    }
    for _ in 0..req.randoms {
        let r = Scalar::rand(rng);
        for (i, s) in share_plaintext(r, alpha, n, rng).into_iter().enumerate() {
            out[i].randoms.push_back(s);
        }
    }
    for _ in 0..req.random_bits {
        let bit = Scalar::from(rng.gen::<bool>() as u64);
        for (i, s) in share_plaintext(bit, alpha, n, rng).into_iter().enumerate() {
            out[i].random_bits.push_back(s);
        }
    }
    Ok(out)
}

/// Dealer-side authenticated sharing of a known value. Test and dealer use only:
/// real parties introduce values with [`Party::share_inputs`].
pub fn share_plaintext<R: RngCore>(
    x: Scalar,
    alpha: Scalar,
    n: usize,
    rng: &mut R,
) -> Vec<AuthShare> {
    let mut values: Vec<Scalar> = (0..n - 1).map(|_| Scalar::rand(rng)).collect();
    let partial: Scalar = values.iter().sum();
    values.push(x - partial);
    let mut macs: Vec<Scalar> = (0..n - 1).map(|_| Scalar::rand(rng)).collect();
    let partial: Scalar = macs.iter().sum();
    macs.push(alpha * x - partial);
    values
        .into_iter()
        .zip(macs)
        .enumerate()
        .map(|(i, (v, m))| AuthShare::new(i, v, m))
        .collect()
}

/// Counters for cost accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MpcCounters {
    /// Beaver multiplications (zero in single-party runs).
    pub multiplications: u64,
    pub openings: u64,
    pub mac_checks: u64,
    pub group_openings: u64,
}

/// One party's protocol runtime: network handle, preprocessing and RNG.
pub struct Party {
    net: Network,
    prep: Preprocessing,
    rng: ChaCha20Rng,
    pending: Vec<(Scalar, Scalar)>,
    mac_batches: u64,
    counters: MpcCounters,
}

impl std::fmt::Debug for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Party")
            .field("id", &self.id())
            .field("n", &self.n())
            .field("counters", &self.counters)
            .finish()
    }
}

impl Party {
    pub fn new(net: Network, prep: Preprocessing, seed: u64) -> Result<Self> {
        if net.party_id() != prep.party_id || net.n_parties() != prep.n_parties {
            return Err(Error::InvalidParameter(format!(
                "network is party {}/{} but preprocessing is for party {}/{}",
                net.party_id(),
                net.n_parties(),
                prep.party_id,
                prep.n_parties
            )));
        }
        let rng = ChaCha20Rng::seed_from_u64(seed ^ ((net.party_id() as u64) << 48));
        Ok(Self {
            net,
            prep,
            rng,
            pending: Vec::new(),
            mac_batches: 0,
            counters: MpcCounters::default(),
        })
    }

    pub fn id(&self) -> usize {
        self.prep.party_id
    }

    pub fn n(&self) -> usize {
        self.prep.n_parties
    }

    pub fn mac_key(&self) -> &MacKeyShare {
        &self.prep.mac_key
    }

    pub fn net(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn stats(&self) -> TrafficStats {
        self.net.stats()
    }

    pub fn counters(&self) -> MpcCounters {
        self.counters
    }

    pub fn preprocessing(&self) -> &Preprocessing {
        &self.prep
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn into_network(self) -> Network {
        self.net
    }

    /// Sharing of a public constant.
    pub fn constant(&self, c: Scalar) -> AuthShare {
        AuthShare::zero(self.id()).add_public(c, self.mac_key())
    }

    pub fn add_public(&self, x: &AuthShare, c: Scalar) -> AuthShare {
        x.add_public(c, self.mac_key())
    }

    pub fn pop_mask(&mut self, owner: usize) -> Result<InputMask> {
        self.prep
            .masks
            .get_mut(owner)
            .and_then(VecDeque::pop_front)
            .ok_or(Error::PreprocessingExhausted("input masks"))
    }

    pub fn random_shares(&mut self, k: usize) -> Result<Vec<AuthShare>> {
        if self.prep.randoms.len() < k {
            return Err(Error::PreprocessingExhausted("random values"));
        }
        Ok(self.prep.randoms.drain(..k).collect())
    }

    fn random_bit_shares(&mut self, k: usize) -> Result<Vec<AuthShare>> {
        if self.prep.random_bits.len() < k {
            return Err(Error::PreprocessingExhausted("random bits"));
        }
        Ok(self.prep.random_bits.drain(..k).collect())
    }

    /// `owner` inputs `values` (given only at the owner); everyone gets shares.
    /// Non-owners see only `value - mask`.
    pub fn share_inputs(
        &mut self,
        owner: usize,
        values: Option<&[Scalar]>,
        count: usize,
    ) -> Result<Vec<AuthShare>> {
        if owner >= self.n() {
            return Err(Error::InvalidParameter(format!("no party {owner}")));
        }
        if self.id() == owner {
            let v =
                values.ok_or_else(|| Error::InvalidParameter("owner must supply values".into()))?;
            if v.len() != count {
                return Err(Error::LengthMismatch {
                    expected: count,
                    got: v.len(),
                });
            }
        }
        let masks = (0..count)
            .map(|_| self.pop_mask(owner))
            .collect::<Result<Vec<_>>>()?;
        let eps: Vec<Scalar> = if self.n() == 1 {
            let v = values.expect("single party is the owner");
            masks
                .iter()
                .zip(v)
                .map(|(m, x)| *x - m.value.expect("owner knows its mask"))
                .collect()
        } else {
            let payload = (self.id() == owner).then(|| {
                let v = values.expect("checked above");
                let mut w = ByteWriter::new();
                for (m, x) in masks.iter().zip(v) {
                    w.put_scalar(&(*x - m.value.expect("owner knows its mask")));
                }
                w.into_bytes()
            });
            let bytes = self.net.distribute("input", owner, payload.as_deref())?;
            decode_scalar_list(&bytes, count)?
        };
        Ok(masks
            .iter()
            .zip(eps)
            .map(|(m, e)| m.share.add_public(e, &self.prep.mac_key))
            .collect())
    }

    pub fn share_input(&mut self, owner: usize, x: Option<Scalar>) -> Result<AuthShare> {
        let v = x.map(|x| vec![x]);
        Ok(self.share_inputs(owner, v.as_deref(), 1)?[0])
    }

    /// Opens a batch of shares. MACs are recorded and verified by the next
    /// [`Party::check_macs`].
    pub fn open_batch(&mut self, shares: &[AuthShare]) -> Result<Vec<Scalar>> {
        for s in shares {
            if s.party_id != self.id() {
                return Err(Error::PartyMismatch {
                    expected: self.id(),
                    got: s.party_id,
                });
            }
        }
        let opened: Vec<Scalar> = if self.n() == 1 {
            shares.iter().map(|s| s.value).collect()
        } else {
            let mut w = ByteWriter::new();
            for s in shares {
                w.put_scalar(&s.value);
            }
            let all = self.net.exchange("open", w.into_bytes())?;
            let mut sums = vec![Scalar::from(0u64); shares.len()];
            for payload in &all {
                for (acc, v) in sums
                    .iter_mut()
                    .zip(decode_scalar_list(payload, shares.len())?)
                {
                    *acc += v;
                }
            }
            sums
        };
        self.pending
            .extend(opened.iter().zip(shares).map(|(x, s)| (*x, s.mac)));
        self.counters.openings += shares.len() as u64;
        Ok(opened)
    }

    /// Opens and immediately checks MACs.
    pub fn open(&mut self, x: &AuthShare) -> Result<Scalar> {
        let v = self.open_batch(std::slice::from_ref(x))?[0];
        self.check_macs()?;
        Ok(v)
    }

    /// Batched MAC check over everything opened since the last check.
    ///
    /// Each party forms `sigma_i = sum_k r_k (mac_k - alpha_i x_k)` with public
    /// coefficients `r_k` derived from the opened values, commits to it with a
    /// hash, then reveals. The check passes iff every reveal matches its
    /// commitment and the `sigma_i` sum to zero.
    pub fn check_macs(&mut self) -> Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let pending = std::mem::take(&mut self.pending);
        self.mac_batches += 1;
        self.counters.mac_checks += 1;

        let mut seed = Sha256::new();
        seed.update(b"colcp/mac-check");
        seed.update(self.mac_batches.to_le_bytes());
        for (x, _) in &pending {
            seed.update(encode_scalar(x));
        }
        let mut coeff_rng = ChaCha20Rng::from_seed(seed.finalize().into());
        let alpha_i = self.prep.mac_key.alpha_share;
        let sigma: Scalar = pending
            .iter()
            .map(|(x, mac)| Scalar::rand(&mut coeff_rng) * (*mac - alpha_i * x))
            .sum();

        if self.n() == 1 {
            return if sigma == Scalar::from(0u64) {
                Ok(())
            } else {
                Err(Error::MacCheckFailed)
            };
        }

        let mut nonce = [0u8; 32];
        self.rng.fill_bytes(&mut nonce);
        let commitment = mac_commitment(&sigma, &nonce);
        let commitments = self.net.exchange("mac-commit", commitment.to_vec())?;
        let mut reveal = encode_scalar(&sigma).to_vec();
        reveal.extend_from_slice(&nonce);
        let reveals = self.net.exchange("mac-reveal", reveal)?;

        let mut total = Scalar::from(0u64);
        for (c, r) in commitments.iter().zip(&reveals) {
            if r.len() != SCALAR_BYTES + 32 {
                return Err(Error::MacCheckFailed);
            }
            let s = crate::algebra::decode_scalar(&r[..SCALAR_BYTES])
                .map_err(|_| Error::MacCheckFailed)?;
            if mac_commitment(&s, &r[SCALAR_BYTES..]).as_slice() != c.as_slice() {
                return Err(Error::MacCheckFailed);
            }
            total += s;
        }
        if total != Scalar::from(0u64) {
            return Err(Error::MacCheckFailed);
        }
        Ok(())
    }

    /// Element-wise products via Beaver triples, one opening round for the batch.
    pub fn mul_batch(&mut self, xs: &[AuthShare], ys: &[AuthShare]) -> Result<Vec<AuthShare>> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if self.n() == 1 {
            return Ok(xs
                .iter()
                .zip(ys)
                .map(|(x, y)| {
                    let v = x.value * y.value;
                    AuthShare::new(self.id(), v, self.prep.mac_key.alpha_share * v)
                })
                .collect());
        }
        if self.prep.triples.len() < xs.len() {
            return Err(Error::PreprocessingExhausted("Beaver triples"));
        }
        let triples: Vec<BeaverTriple> = self.prep.triples.drain(..xs.len()).collect();
        let mut masked = Vec::with_capacity(2 * xs.len());
        for ((x, y), t) in xs.iter().zip(ys).zip(&triples) {
            masked.push(x.checked_sub(&t.a)?);
            masked.push(y.checked_sub(&t.b)?);
        }
        let opened = self.open_batch(&masked)?;
        self.counters.multiplications += xs.len() as u64;
        Ok(triples
            .iter()
            .zip(opened.chunks_exact(2))
            .map(|(t, ed)| {
                let (eps, delta) = (ed[0], ed[1]);
                let z = t.c + t.b * eps + t.a * delta;
                z.add_public(eps * delta, &self.prep.mac_key)
            })
            .collect())
    }

    pub fn mul(&mut self, x: &AuthShare, y: &AuthShare) -> Result<AuthShare> {
        Ok(self.mul_batch(std::slice::from_ref(x), std::slice::from_ref(y))?[0])
    }

    /// Several shared inner products in a single multiplication round.
    pub fn inner_products(
        &mut self,
        pairs: &[(&[AuthShare], &[AuthShare])],
    ) -> Result<Vec<AuthShare>> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (a, b) in pairs {
            if a.len() != b.len() {
                return Err(Error::LengthMismatch {
                    expected: a.len(),
                    got: b.len(),
                });
            }
            xs.extend_from_slice(a);
            ys.extend_from_slice(b);
        }
        let prods = self.mul_batch(&xs, &ys)?;
        let mut out = Vec::with_capacity(pairs.len());
        let mut offset = 0;
        for (a, _) in pairs {
            let sum = prods[offset..offset + a.len()]
                .iter()
                .fold(AuthShare::zero(self.id()), |acc, p| acc + *p);
            out.push(sum);
            offset += a.len();
        }
        Ok(out)
    }

    /// Opens group shares: every party learns the sum of all shares.
    pub fn open_group_batch(&mut self, shares: &[G1]) -> Result<Vec<G1>> {
        self.counters.group_openings += shares.len() as u64;
        if self.n() == 1 {
            return Ok(shares.to_vec());
        }
        let mut w = ByteWriter::new();
        for p in shares {
            w.put_g1(p);
        }
        let all = self.net.exchange("open-group", w.into_bytes())?;
        let mut sums = vec![G1::default(); shares.len()];
        for payload in &all {
            if payload.len() != shares.len() * G1_BYTES {
                return Err(Error::Decode("group share batch has wrong size".into()));
            }
            for (acc, chunk) in sums.iter_mut().zip(payload.chunks_exact(G1_BYTES)) {
                *acc += decode_g1(chunk)?;
            }
        }
        Ok(sums)
    }

    pub fn open_group(&mut self, gs: &GroupShare) -> Result<G1> {
        Ok(self.open_group_batch(&[gs.element_share])?[0])
    }

    /// Shares of the low `width` bits of the shared value `x`.
    ///
    /// The value is masked with a dealer-supplied random `r` of
    /// `width + BIT_DECOMPOSITION_SLACK` bits, `c = x + r` is opened, and the
    /// bits of `c - r mod 2^width` are computed with a borrow chain (one
    /// multiplication per bit). The output is exact when `x < 2^width`;
    /// otherwise the bits do not recompose to `x`, which constraint checks catch.
    pub fn bit_decompose(&mut self, x: &AuthShare, width: usize) -> Result<Vec<AuthShare>> {
        let mask_bits = width + BIT_DECOMPOSITION_SLACK;
        if width == 0 || mask_bits >= 250 {
            return Err(Error::InvalidParameter(format!("bit width {width}")));
        }
        if self.n() == 1 {
            let v = x.value;
            return Ok((0..width)
                .map(|i| self.constant(Scalar::from(scalar_bit(&v, i) as u64)))
                .collect());
        }
        let r_bits = self.random_bit_shares(mask_bits)?;
        let mut r = AuthShare::zero(self.id());
        let mut pow = Scalar::from(1u64);
        for b in &r_bits {
            r = r + *b * pow;
            pow += pow;
        }
        let c = self.open_batch(&[*x + r])?[0];

        let one = Scalar::from(1u64);
        let two = Scalar::from(2u64);
        let mut borrow: Option<AuthShare> = None;
        let mut out = Vec::with_capacity(width);
        for (i, r_i) in r_bits.iter().take(width).enumerate() {
            let c_i = scalar_bit(&c, i);
            let (t, next) = match borrow {
                // borrow_0 = 0: t = r_i, next borrow = r_i if c_i = 0 else 0
                None => (
                    *r_i,
                    if c_i {
                        AuthShare::zero(self.id())
                    } else {
                        *r_i
                    },
                ),
                Some(b) => {
                    let p = self.mul(r_i, &b)?;
                    let t = *r_i + b - p * two;
                    let next = if c_i { p } else { *r_i + b - p };
                    (t, next)
                }
            };
            let diff = if c_i { self.add_public(&(-t), one) } else { t };
            out.push(diff);
            borrow = Some(next);
        }
        Ok(out)
    }
}

fn mac_commitment(sigma: &Scalar, nonce: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"colcp/mac-commit");
    h.update(encode_scalar(sigma));
    h.update(nonce);
    h.finalize().into()
}

fn decode_scalar_list(bytes: &[u8], count: usize) -> Result<Vec<Scalar>> {
    if bytes.len() != count * SCALAR_BYTES {
        return Err(Error::Decode(format!(
            "expected {count} scalars, got {} bytes",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(SCALAR_BYTES)
        .map(crate::algebra::decode_scalar)
        .collect()
}

/// In-process harness: runs `f` once per party on its own thread over an
/// in-memory network and returns the results in party order.
pub fn run_in_memory<T, F>(preps: Vec<Preprocessing>, seed: u64, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(&mut Party) -> Result<T> + Sync,
{
    let n = preps.len();
    let nets = Network::in_memory(n);
    std::thread::scope(|s| {
        let handles: Vec<_> = nets
            .into_iter()
            .zip(preps)
            .map(|(net, prep)| {
                let f = &f;
                s.spawn(move || {
                    let mut party = Party::new(net, prep, seed)?;
                    f(&mut party)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("party thread panicked"))
            .collect()
    })
}

/// Encodes a group share for transport; exposed for protocol code that batches
/// group shares with other data.
pub fn encode_group_share(gs: &GroupShare) -> [u8; G1_BYTES] {
    encode_g1(&gs.element_share)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::g1_generator;

    fn dealer(n: usize, req: DealerRequest, seed: u64) -> Vec<Preprocessing> {
        deal(n, &req, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
    }

    fn reconstruct(shares: &[AuthShare]) -> Scalar {
        shares.iter().map(|s| s.value).sum()
    }

    #[test]
    fn dealer_invariants() {
        let preps = dealer(
            3,
            DealerRequest {
                triples: 2,
                input_masks: 1,
                randoms: 1,
                random_bits: 3,
            },
            1,
        );
        let alpha: Scalar = preps.iter().map(|p| p.mac_key.alpha_share).sum();
        for t in 0..2 {
            let a = reconstruct(&preps.iter().map(|p| p.triples[t].a).collect::<Vec<_>>());
            let b = reconstruct(&preps.iter().map(|p| p.triples[t].b).collect::<Vec<_>>());
            let c = reconstruct(&preps.iter().map(|p| p.triples[t].c).collect::<Vec<_>>());
            assert_eq!(c, a * b);
            let mac: Scalar = preps.iter().map(|p| p.triples[t].c.mac).sum();
            assert_eq!(mac, alpha * c);
        }
        for owner in 0..3 {
            let r = preps[owner].masks[owner][0].value.unwrap();
            let shares: Vec<_> = preps.iter().map(|p| p.masks[owner][0].share).collect();
            assert_eq!(reconstruct(&shares), r);
            assert!(preps
                .iter()
                .filter(|p| p.party_id != owner)
                .all(|p| p.masks[owner][0].value.is_none()));
        }
        for k in 0..3 {
            let b = reconstruct(&preps.iter().map(|p| p.random_bits[k]).collect::<Vec<_>>());
            assert!(b == Scalar::from(0u64) || b == Scalar::from(1u64));
        }
    }

    #[test]
    fn dealer_rejects_single_party_and_allows_zero_triples() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(dealer_setup(1, 1, 1, &mut rng).is_err());
        let preps = dealer_setup(2, 0, 0, &mut rng).unwrap();
        assert!(preps.iter().all(|p| p.triples.is_empty()));
        let preps = dealer_setup(2, 1, 0, &mut rng).unwrap();
        let a = preps[0].triples[0].a.value + preps[1].triples[0].a.value;
        let b = preps[0].triples[0].b.value + preps[1].triples[0].b.value;
        let c = preps[0].triples[0].c.value + preps[1].triples[0].c.value;
        assert_eq!(c, a * b);
    }

    #[test]
    fn preprocessing_file_roundtrip() {
        let preps = dealer(
            2,
            DealerRequest {
                triples: 3,
                input_masks: 2,
                randoms: 2,
                random_bits: 2,
            },
            9,
        );
        let dir = tempfile::tempdir().unwrap();
        for p in &preps {
            let path = dir.path().join(format!("party{}.bin", p.party_id));
            p.write_to_file(&path).unwrap();
            assert_eq!(&Preprocessing::read_from_file(&path).unwrap(), p);
        }
        let mut bytes = preps[0].to_bytes();
        bytes[0] = b'X';
        assert!(Preprocessing::from_bytes(&bytes).is_err());
        let bytes = preps[0].to_bytes();
        assert!(Preprocessing::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn share_and_open() {
        for n in [1, 2, 3, 4] {
            let preps = dealer(
                n,
                DealerRequest {
                    input_masks: 4,
                    ..Default::default()
                },
                2,
            );
            let out = run_in_memory(preps, 5, |p| {
                let a = p.share_input(0, (p.id() == 0).then(|| Scalar::from(42u64)))?;
                let zero = p.share_input(n - 1, (p.id() == n - 1).then(|| Scalar::from(0u64)))?;
                let seven = p.share_input(0, (p.id() == 0).then(|| Scalar::from(7u64)))?;
                let again = p.share_input(0, (p.id() == 0).then(|| Scalar::from(7u64)))?;
                Ok((p.open(&a)?, p.open(&zero)?, p.open(&seven)?, seven, again))
            });
            for r in out {
                let (a, z, s, s1, s2) = r.unwrap();
                assert_eq!(a, Scalar::from(42u64));
                assert_eq!(z, Scalar::from(0u64));
                assert_eq!(s, Scalar::from(7u64));
                if n > 1 {
                    assert_ne!(s1.value, s2.value, "fresh masks give fresh shares");
                }
            }
        }
    }

    #[test]
    fn linear_ops() {
        let preps = dealer(
            3,
            DealerRequest {
                input_masks: 2,
                ..Default::default()
            },
            3,
        );
        let out = run_in_memory(preps, 1, |p| {
            let x = p.share_input(1, (p.id() == 1).then(|| Scalar::from(3u64)))?;
            let y = p.share_input(2, (p.id() == 2).then(|| Scalar::from(4u64)))?;
            let sum = x.checked_add(&y)?;
            let scaled = y * Scalar::from(5u64);
            let plus_zero = p.add_public(&x, Scalar::from(0u64));
            let konst = p.constant(Scalar::from(99u64));
            assert_eq!(plus_zero, x);
            let vals = p.open_batch(&[sum, scaled, konst])?;
            p.check_macs()?;
            Ok(vals)
        });
        for r in out {
            assert_eq!(
                r.unwrap(),
                vec![Scalar::from(7u64), Scalar::from(20u64), Scalar::from(99u64)]
            );
        }
        let a = AuthShare::zero(0);
        let b = AuthShare::zero(1);
        assert!(matches!(
            a.checked_add(&b),
            Err(Error::PartyMismatch { .. })
        ));
    }

    #[test]
    fn beaver_products() {
        let preps = dealer(
            2,
            DealerRequest {
                triples: 3,
                input_masks: 2,
                ..Default::default()
            },
            4,
        );
        let out = run_in_memory(preps, 2, |p| {
            let x = p.share_input(0, (p.id() == 0).then(|| Scalar::from(3u64)))?;
            let y = p.share_input(1, (p.id() == 1).then(|| Scalar::from(4u64)))?;
            let zero = AuthShare::zero(p.id());
            let one = p.constant(Scalar::from(1u64));
            let prods = p.mul_batch(&[x, x, x], &[y, zero, one])?;
            let vals = p.open_batch(&prods)?;
            p.check_macs()?;
            Ok((vals, p.counters().multiplications))
        });
        for r in out {
            let (vals, muls) = r.unwrap();
            assert_eq!(
                vals,
                vec![Scalar::from(12u64), Scalar::from(0u64), Scalar::from(3u64)]
            );
            assert_eq!(muls, 3);
        }
    }

    #[test]
    fn triples_run_out() {
        let preps = dealer(2, DealerRequest::default(), 4);
        let out = run_in_memory(preps, 2, |p| {
            let x = p.constant(Scalar::from(2u64));
            p.mul(&x, &x)
        });
        for r in out {
            assert!(matches!(r, Err(Error::PreprocessingExhausted(_))));
        }
    }

    #[test]
    fn tampered_open_is_caught() {
        let preps = dealer(
            2,
            DealerRequest {
                input_masks: 1,
                ..Default::default()
            },
            6,
        );
        let out = run_in_memory(preps, 3, |p| {
            let mut x = p.share_input(0, (p.id() == 0).then(|| Scalar::from(7u64)))?;
            if p.id() == 1 {
                x.value += Scalar::from(1u64);
            }
            p.open(&x)
        });
        for r in out {
            assert!(matches!(r, Err(Error::MacCheckFailed)));
        }
    }

    #[test]
    fn group_shares() {
        let preps = dealer(
            3,
            DealerRequest {
                input_masks: 2,
                ..Default::default()
            },
            7,
        );
        let g = g1_generator();
        let out = run_in_memory(preps, 3, |p| {
            let x = p.share_input(0, (p.id() == 0).then(|| Scalar::from(11u64)))?;
            let zero = p.share_input(0, (p.id() == 0).then(|| Scalar::from(0u64)))?;
            let gx = p.open_group(&exp_to_group_share(&g, &x))?;
            let g0 = p.open_group(&exp_to_group_share(&g, &zero))?;
            let x_open = p.open(&x)?;
            Ok((gx, g0, x_open))
        });
        for r in out {
            let (gx, g0, x) = r.unwrap();
            assert_eq!(gx, g * x);
            assert_eq!(g0, G1::default());
        }
    }

    #[test]
    fn bit_decomposition() {
        let width = 8;
        for n in [1, 2, 3] {
            let preps = dealer(
                n,
                DealerRequest {
                    triples: 4 * width,
                    input_masks: 4,
                    random_bits: 4 * (width + BIT_DECOMPOSITION_SLACK),
                    ..Default::default()
                },
                8,
            );
            let out = run_in_memory(preps, 4, |p| {
                let mut results = Vec::new();
                for v in [0u64, 1, 200, 255] {
                    let x = p.share_input(0, (p.id() == 0).then(|| Scalar::from(v)))?;
                    let bits = p.bit_decompose(&x, width)?;
                    let opened = p.open_batch(&bits)?;
                    results.push(opened);
                }
                p.check_macs()?;
                Ok(results)
            });
            for r in out {
                let results = r.unwrap();
                for (v, bits) in [0u64, 1, 200, 255].iter().zip(results) {
                    let expect: Vec<Scalar> =
                        (0..width).map(|i| Scalar::from((v >> i) & 1)).collect();
                    assert_eq!(bits, expect, "n={n} v={v}");
                }
            }
        }
    }
}
