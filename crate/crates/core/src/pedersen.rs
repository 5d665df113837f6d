//! Pedersen vector commitments and the two collaborative ways of producing one.
//!
//! * Commit-then-Share: each party commits to the slots it owns with its own
//!   opening, the partial commitments are broadcast and multiplied together.
//! * Share-then-Commit: every party commits to its additive shares of the whole
//!   vector and the partial commitments are combined the same way.

use std::fmt;

use crate::algebra::{decode_g1, encode_g1, hash_to_g1, msm, ByteWriter, Scalar, G1, G1_BYTES};
use crate::error::{Error, Result};
use crate::mpc::{AuthShare, Party};

use ark_ff::Zero;

/// `(g_0, g_1, ..., g_n)`: `g_0` carries the opening, the rest the message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentKey {
    pub generators: Vec<G1>,
}

impl CommitmentKey {
    /// Deterministic key for messages of length `n`.
    pub fn setup(n: usize) -> Result<Self> {
        Self::setup_with_tag("ped", n)
    }

    /// Like [`CommitmentKey::setup`] but under a caller-chosen domain tag, for
    /// applications that need several independent keys.
    pub fn setup_with_tag(tag: &str, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "commitment key needs n >= 1".into(),
            ));
        }
        Ok(Self {
            generators: (0..=n).map(|i| hash_to_g1(&format!("{tag}/{i}"))).collect(),
        })
    }

    pub fn from_generators(generators: Vec<G1>) -> Result<Self> {
        if generators.len() < 2 {
            return Err(Error::InvalidParameter(
                "commitment key needs n >= 1".into(),
            ));
        }
        if generators.iter().any(|g| g.is_zero()) {
            return Err(Error::InvalidParameter("identity generator".into()));
        }
        Ok(Self { generators })
    }

    /// Message length `n`.
    pub fn message_len(&self) -> usize {
        self.generators.len() - 1
    }

    pub fn opening_base(&self) -> G1 {
        self.generators[0]
    }

    pub fn message_bases(&self) -> &[G1] {
        &self.generators[1..]
    }

    /// Key over the listed message slots only, same opening base.
    pub fn restrict(&self, slots: &[usize]) -> Result<Self> {
        let mut gens = vec![self.generators[0]];
        for &s in slots {
            gens.push(
                *self
                    .message_bases()
                    .get(s)
                    .ok_or_else(|| Error::InvalidParameter(format!("slot {s} out of range")))?,
            );
        }
        Self::from_generators(gens)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Commitment(pub G1);

impl Commitment {
    pub fn to_bytes(&self) -> [u8; G1_BYTES] {
        encode_g1(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode_g1(bytes).map(Commitment)
    }

    pub fn identity() -> Self {
        Commitment(G1::zero())
    }
}

impl std::ops::Add for Commitment {
    type Output = Commitment;

    fn add(self, rhs: Commitment) -> Commitment {
        Commitment(self.0 + rhs.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Opening(pub Scalar);

pub fn setup(n: usize) -> Result<CommitmentKey> {
    CommitmentKey::setup(n)
}

/// `g_0^o * prod_i g_i^{u_i}`.
pub fn commit(ck: &CommitmentKey, u: &[Scalar], o: &Opening) -> Result<Commitment> {
    if u.len() != ck.message_len() {
        return Err(Error::LengthMismatch {
            expected: ck.message_len(),
            got: u.len(),
        });
    }
    let mut exps = Vec::with_capacity(u.len() + 1);
    exps.push(o.0);
    exps.extend_from_slice(u);
    msm(&ck.generators, &exps).map(Commitment)
}

pub fn ver_commit(ck: &CommitmentKey, c: &Commitment, u: &[Scalar], o: &Opening) -> bool {
    matches!(commit(ck, u, o), Ok(expected) if expected == *c)
}

/// Which party owns which message slots. Slots form a partition of `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnershipMap {
    n_slots: usize,
    slots: Vec<Vec<usize>>,
}

impl OwnershipMap {
    pub fn new(n_slots: usize, slots: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![None; n_slots];
        for (party, owned) in slots.iter().enumerate() {
            for &s in owned {
                let entry = owner.get_mut(s).ok_or_else(|| {
                    Error::InvalidParameter(format!("party {party} owns slot {s} of {n_slots}"))
                })?;
                if let Some(other) = *entry {
                    return Err(Error::InvalidParameter(format!(
                        "slot {s} owned by both party {other} and party {party}"
                    )));
                }
                *entry = Some(party);
            }
        }
        if let Some(s) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidParameter(format!("slot {s} has no owner")));
        }
        Ok(Self { n_slots, slots })
    }

    /// Splits `0..n_slots` into contiguous runs, earlier parties taking the remainder.
    pub fn contiguous(n_slots: usize, n_parties: usize) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::InvalidParameter("no parties".into()));
        }
        let base = n_slots / n_parties;
        let extra = n_slots % n_parties;
        let mut next = 0;
        let slots = (0..n_parties)
            .map(|p| {
                let len = base + usize::from(p < extra);
                let run: Vec<usize> = (next..next + len).collect();
                next += len;
                run
            })
            .collect();
        Self::new(n_slots, slots)
    }

    /// Parses lines of the form `<party>: 0-3, 7` (`#` starts a comment).
    pub fn parse(n_slots: usize, n_parties: usize, text: &str) -> Result<Self> {
        let mut slots = vec![Vec::new(); n_parties];
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (party, ranges) = line
                .split_once(':')
                .ok_or_else(|| Error::InvalidParameter(format!("bad ownership line `{line}`")))?;
            let party: usize = party
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad party id in `{line}`")))?;
            let entry = slots
                .get_mut(party)
                .ok_or_else(|| Error::InvalidParameter(format!("party {party} out of range")))?;
            for part in ranges.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let bad = || Error::InvalidParameter(format!("bad range `{part}`"));
                match part.split_once('-') {
                    Some((a, b)) => {
                        let a: usize = a.trim().parse().map_err(|_| bad())?;
                        let b: usize = b.trim().parse().map_err(|_| bad())?;
                        if b < a {
                            return Err(bad());
                        }
                        entry.extend(a..=b);
                    }
                    None => entry.push(part.parse().map_err(|_| bad())?),
                }
            }
        }
        Self::new(n_slots, slots)
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn n_parties(&self) -> usize {
        self.slots.len()
    }

    pub fn slots_of(&self, party: usize) -> &[usize] {
        self.slots.get(party).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn owner_of(&self, slot: usize) -> Option<usize> {
        self.slots.iter().position(|s| s.contains(&slot))
    }
}

impl fmt::Display for OwnershipMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, owned) in self.slots.iter().enumerate() {
            let list: Vec<String> = owned.iter().map(usize::to_string).collect();
            writeln!(f, "{p}: {}", list.join(", "))?;
        }
        Ok(())
    }
}

/// This party's partial commitment `g_0^{o_i} * prod_{j owned} g_j^{u_j}`.
pub fn cts_local_share(
    ck: &CommitmentKey,
    map: &OwnershipMap,
    party_id: usize,
    own_values: &[Scalar],
    o_i: &Opening,
) -> Result<G1> {
    check_map(ck, map)?;
    let slots = map.slots_of(party_id);
    if own_values.len() != slots.len() {
        return Err(Error::LengthMismatch {
            expected: slots.len(),
            got: own_values.len(),
        });
    }
    let mut bases = Vec::with_capacity(slots.len() + 1);
    let mut exps = Vec::with_capacity(slots.len() + 1);
    bases.push(ck.opening_base());
    exps.push(o_i.0);
    for (s, v) in slots.iter().zip(own_values) {
        bases.push(ck.message_bases()[*s]);
        exps.push(*v);
    }
    msm(&bases, &exps)
}

/// Commit-then-Share with a caller-chosen opening per party. The result opens
/// with `sum_i o_i`.
pub fn cts_commit(
    party: &mut Party,
    ck: &CommitmentKey,
    map: &OwnershipMap,
    own_values: &[Scalar],
    o_i: &Opening,
) -> Result<Commitment> {
    if map.n_parties() != party.n() {
        return Err(Error::InvalidParameter(format!(
            "ownership map has {} parties, run has {}",
            map.n_parties(),
            party.n()
        )));
    }
    let local = cts_local_share(ck, map, party.id(), own_values, o_i)?;
    combine_partials(party, local)
}

/// Output of [`cts_commit_shared`].
#[derive(Clone, Copy, Debug)]
pub struct CtsOutput {
    pub commitment: Commitment,
    /// This party's own opening `o_i`.
    pub own_opening: Opening,
    /// Authenticated share of the combined opening `sum_i o_i`.
    pub opening_share: AuthShare,
}

/// Commit-then-Share where each `o_i` is the plaintext of one of party `i`'s
/// input masks. The combined opening is then already secret-shared (the sum of
/// the mask shares), so later proofs can use it without another round.
pub fn cts_commit_shared(
    party: &mut Party,
    ck: &CommitmentKey,
    map: &OwnershipMap,
    own_values: &[Scalar],
) -> Result<CtsOutput> {
    let mut opening_share = AuthShare::zero(party.id());
    let mut own = None;
    for owner in 0..party.n() {
        let mask = party.pop_mask(owner)?;
        opening_share = opening_share + mask.share;
        if owner == party.id() {
            own = mask.value;
        }
    }
    let own_opening = Opening(own.expect("own mask carries its plaintext"));
    let commitment = cts_commit(party, ck, map, own_values, &own_opening)?;
    Ok(CtsOutput {
        commitment,
        own_opening,
        opening_share,
    })
}

/// This party's partial commitment over its shares of the whole vector.
pub fn stc_local_share(ck: &CommitmentKey, u: &[AuthShare], o: &AuthShare) -> Result<G1> {
    if u.len() != ck.message_len() {
        return Err(Error::LengthMismatch {
            expected: ck.message_len(),
            got: u.len(),
        });
    }
    let mut exps = Vec::with_capacity(u.len() + 1);
    exps.push(o.value);
    exps.extend(u.iter().map(|s| s.value));
    msm(&ck.generators, &exps)
}

/// Share-then-Commit.
pub fn stc_commit(
    party: &mut Party,
    ck: &CommitmentKey,
    u: &[AuthShare],
    o: &AuthShare,
) -> Result<Commitment> {
    let local = stc_local_share(ck, u, o)?;
    combine_partials(party, local)
}

fn combine_partials(party: &mut Party, local: G1) -> Result<Commitment> {
    Ok(Commitment(combine_partials_batch(party, &[local])?[0]))
}

/// Broadcasts this party's partial commitments in one message and returns the
/// element-wise sums over all parties.
pub fn combine_partials_batch(party: &mut Party, partials: &[G1]) -> Result<Vec<G1>> {
    if party.n() == 1 {
        return Ok(partials.to_vec());
    }
    let mut w = ByteWriter::new();
    for p in partials {
        w.put_g1(p);
    }
    let all = party.net().exchange("commit", w.into_bytes())?;
    let mut sums = partials.iter().map(|_| G1::zero()).collect::<Vec<_>>();
    for bytes in &all {
        if bytes.len() != partials.len() * G1_BYTES {
            return Err(Error::Decode(
                "partial commitment batch has wrong size".into(),
            ));
        }
        for (acc, chunk) in sums.iter_mut().zip(bytes.chunks_exact(G1_BYTES)) {
            *acc += decode_g1(chunk)?;
        }
    }
    Ok(sums)
}

fn check_map(ck: &CommitmentKey, map: &OwnershipMap) -> Result<()> {
    if map.n_slots() != ck.message_len() {
        return Err(Error::LengthMismatch {
            expected: ck.message_len(),
            got: map.n_slots(),
        });
    }
    Ok(())
}
