//! Scalar field and bilinear group arithmetic over BLS12-381.
//!
//! Every protocol value in the crate lives here: scalars of the prime-order
//! field, points of `G1`/`G2`, and pairing outputs in `GT`. Group law is
//! written additively in code (`a + b`, `p * s`) even though the protocols are
//! usually described multiplicatively.
//!
//! Encodings are canonical: scalars are 32 bytes little-endian, points use the
//! compressed form, and decoding rejects any byte string that does not
//! re-encode to itself.

use std::sync::RwLock;

use ark_bls12_381::{g1::Config as G1Config, Bls12_381};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, Group};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use ark_bls12_381::{Fr as Scalar, G1Projective as G1, G2Projective as G2};
pub use ark_ff::{Field, One, UniformRand};

/// Target group of the pairing.
pub type Gt = PairingOutput<Bls12_381>;

pub const SCALAR_BYTES: usize = 32;
pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;

/// Identifier written into serialized artifacts: BLS12-381.
pub const CURVE_ID: u8 = 1;
/// Identifier written into serialized artifacts: SHA-256.
pub const HASH_ID: u8 = 1;

const HASH_TO_CURVE_DST: &[u8] = b"COLCP-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";

/// Multi-scalar multiplication `sum_i exps[i] * bases[i]`.
///
/// Mixing groups is ruled out by the type parameter; only the length can go wrong.
pub fn msm<G: CurveGroup>(bases: &[G], exps: &[G::ScalarField]) -> Result<G> {
    if bases.len() != exps.len() {
        return Err(Error::LengthMismatch {
            expected: bases.len(),
            got: exps.len(),
        });
    }
    if bases.is_empty() {
        return Ok(G::zero());
    }
    let affine = G::normalize_batch(bases);
    Ok(G::msm_unchecked(&affine, exps))
}

/// `prod_i e(lhs_i) == e(rhs)`.
pub fn pairing_product_check(lhs: &[(G1, G2)], rhs: (G1, G2)) -> bool {
    let mut g1s: Vec<G1> = lhs.iter().map(|(p, _)| *p).collect();
    let mut g2s: Vec<G2> = lhs.iter().map(|(_, q)| *q).collect();
    g1s.push(-rhs.0);
    g2s.push(rhs.1);
    let g1a = G1::normalize_batch(&g1s);
    let g2a = G2::normalize_batch(&g2s);
    Bls12_381::multi_pairing(g1a, g2a).is_zero()
}

pub fn pairing(p: G1, q: G2) -> Gt {
    Bls12_381::pairing(p, q)
}

pub fn g1_generator() -> G1 {
    G1::generator()
}

pub fn g2_generator() -> G2 {
    G2::generator()
}

/// Hashes arbitrary nonempty bytes to a nonzero scalar.
///
/// Two SHA-256 blocks (512 bits) are reduced modulo the group order; a zero
/// result bumps the retry counter and hashes again.
pub fn hash_to_scalar(data: &[u8]) -> Scalar {
    debug_assert!(!data.is_empty(), "hash_to_scalar on empty input");
    let mut retry: u32 = 0;
    loop {
        let mut wide = [0u8; 64];
        for (half, chunk) in wide.chunks_mut(32).enumerate() {
            let mut h = Sha256::new();
            h.update(b"colcp/h2s");
            h.update(retry.to_le_bytes());
            h.update([half as u8]);
            h.update(data);
            chunk.copy_from_slice(&h.finalize());
        }
        let s = Scalar::from_le_bytes_mod_order(&wide);
        if !s.is_zero() {
            return s;
        }
        retry += 1;
    }
}

/// Hash-to-curve (SSWU, random oracle variant) from an ASCII domain tag.
pub fn hash_to_g1(tag: &str) -> G1 {
    type Hasher = MapToCurveBasedHasher<G1, DefaultFieldHasher<Sha256, 128>, WBMap<G1Config>>;
    let hasher = Hasher::new(HASH_TO_CURVE_DST).expect("valid hash-to-curve DST");
    let p: G1 = hasher
        .hash(tag.as_bytes())
        .expect("hash to curve is total")
        .into();
    p
}

pub fn sha256(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

/// Generators for the Bulletproof side: `g, h` for value commitments and the
/// vectors `g_vec, h_vec` for the inner-product argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pub g: G1,
    pub h: G1,
    pub g_vec: Vec<G1>,
    pub h_vec: Vec<G1>,
}

static BP_VEC_CACHE: RwLock<(Vec<G1>, Vec<G1>)> = RwLock::new((Vec::new(), Vec::new()));

impl GeneratorSet {
    pub fn new(n: usize) -> Self {
        {
            let cache = BP_VEC_CACHE.read().expect("generator cache poisoned");
            if cache.0.len() >= n {
                return Self {
                    g: hash_to_g1("bp/g"),
                    h: hash_to_g1("bp/h"),
                    g_vec: cache.0[..n].to_vec(),
                    h_vec: cache.1[..n].to_vec(),
                };
            }
        }
        let mut cache = BP_VEC_CACHE.write().expect("generator cache poisoned");
        for i in cache.0.len()..n {
            cache.0.push(hash_to_g1(&format!("bp/g/{i}")));
            cache.1.push(hash_to_g1(&format!("bp/h/{i}")));
        }
        Self {
            g: hash_to_g1("bp/g"),
            h: hash_to_g1("bp/h"),
            g_vec: cache.0[..n].to_vec(),
            h_vec: cache.1[..n].to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.g_vec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_vec.is_empty()
    }
}

/// `(1, x, x^2, ..., x^{n-1})`.
pub fn powers(x: Scalar, n: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n);
    let mut acc = Scalar::one();
    for _ in 0..n {
        out.push(acc);
        acc *= x;
    }
    out
}

pub fn inner_product(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| *x * y).sum()
}

pub fn scalar_from_u64(v: u64) -> Scalar {
    Scalar::from(v)
}

pub fn scalar_from_i64(v: i64) -> Scalar {
    if v >= 0 {
        Scalar::from(v as u64)
    } else {
        -Scalar::from(v.unsigned_abs())
    }
}

/// Little-endian 256-bit representation of a scalar.
pub fn scalar_to_u64_limbs(s: &Scalar) -> [u64; 4] {
    s.into_bigint().0
}

pub fn scalar_bit(s: &Scalar, i: usize) -> bool {
    let limbs = scalar_to_u64_limbs(s);
    i < 256 && (limbs[i / 64] >> (i % 64)) & 1 == 1
}

pub fn encode_scalar(s: &Scalar) -> [u8; SCALAR_BYTES] {
    let mut out = [0u8; SCALAR_BYTES];
    s.serialize_compressed(&mut out[..])
        .expect("scalar fits in 32 bytes");
    out
}

pub fn decode_scalar(bytes: &[u8]) -> Result<Scalar> {
    if bytes.len() != SCALAR_BYTES {
        return Err(Error::Decode(format!("scalar needs {SCALAR_BYTES} bytes")));
    }
    let s =
        Scalar::deserialize_compressed(bytes).map_err(|e| Error::Decode(format!("scalar: {e}")))?;
    if encode_scalar(&s) != bytes {
        return Err(Error::Decode("non-canonical scalar".into()));
    }
    Ok(s)
}

pub fn encode_g1(p: &G1) -> [u8; G1_BYTES] {
    let mut out = [0u8; G1_BYTES];
    p.into_affine()
        .serialize_compressed(&mut out[..])
        .expect("G1 fits in 48 bytes");
    out
}

pub fn decode_g1(bytes: &[u8]) -> Result<G1> {
    if bytes.len() != G1_BYTES {
        return Err(Error::Decode(format!("G1 needs {G1_BYTES} bytes")));
    }
    let p = ark_bls12_381::G1Affine::deserialize_compressed(bytes)
        .map_err(|e| Error::Decode(format!("G1: {e}")))?;
    let p: G1 = p.into();
    if encode_g1(&p) != bytes {
        return Err(Error::Decode("non-canonical G1 encoding".into()));
    }
    Ok(p)
}

pub fn encode_g2(p: &G2) -> [u8; G2_BYTES] {
    let mut out = [0u8; G2_BYTES];
    p.into_affine()
        .serialize_compressed(&mut out[..])
        .expect("G2 fits in 96 bytes");
    out
}

pub fn decode_g2(bytes: &[u8]) -> Result<G2> {
    if bytes.len() != G2_BYTES {
        return Err(Error::Decode(format!("G2 needs {G2_BYTES} bytes")));
    }
    let p = ark_bls12_381::G2Affine::deserialize_compressed(bytes)
        .map_err(|e| Error::Decode(format!("G2: {e}")))?;
    let p: G2 = p.into();
    if encode_g2(&p) != bytes {
        return Err(Error::Decode("non-canonical G2 encoding".into()));
    }
    Ok(p)
}

/// Append-only encoder for the crate's binary formats.
#[derive(Default, Debug)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_bytes(&mut self, b: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(b);
        self
    }

    pub fn put_u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn put_u16(&mut self, v: u16) -> &mut Self {
        self.put_bytes(&v.to_le_bytes())
    }

    pub fn put_u32(&mut self, v: u32) -> &mut Self {
        self.put_bytes(&v.to_le_bytes())
    }

    pub fn put_len(&mut self, v: usize) -> &mut Self {
        self.put_u32(u32::try_from(v).expect("length fits in u32"))
    }

    pub fn put_scalar(&mut self, s: &Scalar) -> &mut Self {
        self.put_bytes(&encode_scalar(s))
    }

    pub fn put_g1(&mut self, p: &G1) -> &mut Self {
        self.put_bytes(&encode_g1(p))
    }

    pub fn put_g2(&mut self, p: &G2) -> &mut Self {
        self.put_bytes(&encode_g2(p))
    }

    /// Length-prefixed scalar list.
    pub fn put_scalars(&mut self, v: &[Scalar]) -> &mut Self {
        self.put_len(v.len());
        for s in v {
            self.put_scalar(s);
        }
        self
    }

    /// Length-prefixed G1 list.
    pub fn put_g1s(&mut self, v: &[G1]) -> &mut Self {
        self.put_len(v.len());
        for p in v {
            self.put_g1(p);
        }
        self
    }

    pub fn put_blob(&mut self, b: &[u8]) -> &mut Self {
        self.put_len(b.len());
        self.put_bytes(b)
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

/// Cursor over an encoded buffer; every read is bounds checked.
#[derive(Debug)]
pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Decode(format!(
                "truncated input: wanted {n} bytes at offset {}",
                self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// Reads a u32 length and sanity-checks it against the remaining input.
    pub fn len_prefix(&mut self, elem_size: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(elem_size.max(1)) > self.remaining() {
            return Err(Error::Decode(format!("length prefix {n} exceeds input")));
        }
        Ok(n)
    }

    pub fn scalar(&mut self) -> Result<Scalar> {
        decode_scalar(self.take(SCALAR_BYTES)?)
    }

    pub fn g1(&mut self) -> Result<G1> {
        decode_g1(self.take(G1_BYTES)?)
    }

    pub fn g2(&mut self) -> Result<G2> {
        decode_g2(self.take(G2_BYTES)?)
    }

    pub fn scalars(&mut self) -> Result<Vec<Scalar>> {
        let n = self.len_prefix(SCALAR_BYTES)?;
        (0..n).map(|_| self.scalar()).collect()
    }

    pub fn g1s(&mut self) -> Result<Vec<G1>> {
        let n = self.len_prefix(G1_BYTES)?;
        (0..n).map(|_| self.g1()).collect()
    }

    pub fn blob(&mut self) -> Result<&'a [u8]> {
        let n = self.len_prefix(1)?;
        self.take(n)
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Decode(format!(
                "{} trailing bytes",
                self.remaining()
            )));
        }
        Ok(())
    }
}
