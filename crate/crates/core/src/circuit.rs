//! Constraint systems in Bulletproofs form: `n` multiplication gates
//! `a_L * a_R = a_O` and `Q` linear rows `W_L a_L + W_R a_R + W_O a_O = W_V v + c`
//! over the gate wires and `m` committed inputs.
//!
//! A [`CircuitBuilder`] records both the constraints and a wiring script that
//! says how to compute every gate from the committed inputs. The script is what
//! lets parties fill in the witness on shares ([`assign_collab`]) or in the
//! clear ([`assign_plain`]).

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

use crate::algebra::{scalar_bit, sha256, ByteWriter, One, Scalar};
use crate::error::{Error, Result};
use crate::mpc::{AuthShare, DealerRequest, Party, BIT_DECOMPOSITION_SLACK};

use ark_ff::{Field, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wire {
    Left(usize),
    Right(usize),
    Out(usize),
    Committed(usize),
    /// The constant 1.
    One,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearCombination {
    pub terms: Vec<(Wire, Scalar)>,
}

impl LinearCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Scalar) -> Self {
        Self {
            terms: vec![(Wire::One, c)],
        }
    }

    pub fn wires(&self) -> impl Iterator<Item = Wire> + '_ {
        self.terms.iter().map(|(w, _)| *w)
    }
}

impl From<Wire> for LinearCombination {
    fn from(w: Wire) -> Self {
        Self {
            terms: vec![(w, Scalar::one())],
        }
    }
}

impl From<Scalar> for LinearCombination {
    fn from(c: Scalar) -> Self {
        Self::constant(c)
    }
}

impl<T: Into<LinearCombination>> Add<T> for LinearCombination {
    type Output = LinearCombination;

    fn add(mut self, rhs: T) -> LinearCombination {
        self.terms.extend(rhs.into().terms);
        self
    }
}

impl<T: Into<LinearCombination>> Sub<T> for LinearCombination {
    type Output = LinearCombination;

    fn sub(mut self, rhs: T) -> LinearCombination {
        self.terms
            .extend(rhs.into().terms.into_iter().map(|(w, c)| (w, -c)));
        self
    }
}

impl Neg for LinearCombination {
    type Output = LinearCombination;

    fn neg(mut self) -> LinearCombination {
        for (_, c) in self.terms.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul<Scalar> for LinearCombination {
    type Output = LinearCombination;

    fn mul(mut self, k: Scalar) -> LinearCombination {
        for (_, c) in self.terms.iter_mut() {
            *c *= k;
        }
        self
    }
}

/// Sparse `(row, col, value)` entry.
pub type Entry = (usize, usize, Scalar);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    /// Gate count, a power of two.
    pub n: usize,
    pub q: usize,
    pub m: usize,
    pub w_l: Vec<Entry>,
    pub w_r: Vec<Entry>,
    pub w_o: Vec<Entry>,
    pub w_v: Vec<Entry>,
    pub c: Vec<Scalar>,
}

/// The constraint matrices collapsed by a row-weight vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedRows {
    pub l: Vec<Scalar>,
    pub r: Vec<Scalar>,
    pub o: Vec<Scalar>,
    pub v: Vec<Scalar>,
    pub c: Scalar,
}

impl ConstraintSystem {
    /// `weights * W_*` for each matrix and `<weights, c>`.
    pub fn weighted(&self, weights: &[Scalar]) -> WeightedRows {
        debug_assert_eq!(weights.len(), self.q);
        let fold = |entries: &[Entry], len: usize| {
            let mut out = vec![Scalar::zero(); len];
            for (row, col, v) in entries {
                out[*col] += weights[*row] * v;
            }
            out
        };
        WeightedRows {
            l: fold(&self.w_l, self.n),
            r: fold(&self.w_r, self.n),
            o: fold(&self.w_o, self.n),
            v: fold(&self.w_v, self.m),
            c: weights.iter().zip(&self.c).map(|(w, c)| *w * c).sum(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.put_bytes(b"CPCS")
            .put_u32(self.n as u32)
            .put_u32(self.q as u32)
            .put_u32(self.m as u32);
        for entries in [&self.w_l, &self.w_r, &self.w_o, &self.w_v] {
            let mut sorted = entries.clone();
            sorted.sort_by_key(|(r, c, _)| (*r, *c));
            w.put_len(sorted.len());
            for (r, c, v) in &sorted {
                w.put_u32(*r as u32).put_u32(*c as u32).put_scalar(v);
            }
        }
        w.put_scalars(&self.c);
        w.into_bytes()
    }

    /// Digest of the canonical encoding; binds proofs to this exact system.
    pub fn digest(&self) -> [u8; 32] {
        sha256(&self.to_bytes())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub a_l: Vec<Scalar>,
    pub a_r: Vec<Scalar>,
    pub a_o: Vec<Scalar>,
    pub v: Vec<Scalar>,
    pub gamma: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedAssignment {
    pub a_l: Vec<AuthShare>,
    pub a_r: Vec<AuthShare>,
    pub a_o: Vec<AuthShare>,
    pub v: Vec<AuthShare>,
    pub gamma: Vec<AuthShare>,
}

pub fn is_satisfied(cs: &ConstraintSystem, asg: &Assignment) -> bool {
    if asg.a_l.len() != cs.n
        || asg.a_r.len() != cs.n
        || asg.a_o.len() != cs.n
        || asg.v.len() != cs.m
    {
        return false;
    }
    if asg
        .a_l
        .iter()
        .zip(&asg.a_r)
        .zip(&asg.a_o)
        .any(|((l, r), o)| *l * r != *o)
    {
        return false;
    }
    let mut lhs = vec![Scalar::zero(); cs.q];
    for (entries, vals) in [
        (&cs.w_l, &asg.a_l),
        (&cs.w_r, &asg.a_r),
        (&cs.w_o, &asg.a_o),
    ] {
        for (row, col, w) in entries {
            lhs[*row] += *w * vals[*col];
        }
    }
    let mut rhs = cs.c.clone();
    for (row, col, w) in &cs.w_v {
        rhs[*row] += *w * asg.v[*col];
    }
    lhs == rhs
}

/// How gates get their values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Mul {
        gate: usize,
        left: LinearCombination,
        right: LinearCombination,
    },
    /// `width` consecutive gates holding the low bits of `source`.
    Bits {
        first_gate: usize,
        width: usize,
        source: LinearCombination,
    },
}

/// A finalized constraint system plus its wiring script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub cs: ConstraintSystem,
    pub script: Vec<Step>,
    /// Gates before padding.
    pub used_gates: usize,
}

impl Circuit {
    /// Beaver triples and random bits consumed by [`assign_collab`].
    pub fn assign_requirements(&self) -> DealerRequest {
        let mut req = DealerRequest::default();
        for step in &self.script {
            match step {
                Step::Mul { .. } => req.triples += 1,
                Step::Bits { width, .. } => {
                    req.triples += width - 1;
                    req.random_bits += width + BIT_DECOMPOSITION_SLACK;
                }
            }
        }
        req
    }

    /// Multiplication gates that need MPC (bit gates are filled without one).
    pub fn mul_steps(&self) -> usize {
        self.script
            .iter()
            .filter(|s| matches!(s, Step::Mul { .. }))
            .count()
    }
}

#[derive(Clone, Debug, Default)]
pub struct CircuitBuilder {
    m: usize,
    gates: usize,
    rows: Vec<(Vec<(Wire, Scalar)>, Scalar)>,
    script: Vec<Step>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc_committed(&mut self, count: usize) -> Vec<Wire> {
        let first = self.m;
        self.m += count;
        (first..self.m).map(Wire::Committed).collect()
    }

    pub fn gates(&self) -> usize {
        self.gates
    }

    pub fn constraints(&self) -> usize {
        self.rows.len()
    }

    /// Adds a gate `out = left * right` and returns its three wires.
    pub fn multiply(
        &mut self,
        left: impl Into<LinearCombination>,
        right: impl Into<LinearCombination>,
    ) -> Result<(Wire, Wire, Wire)> {
        let left = left.into();
        let right = right.into();
        self.check(&left)?;
        self.check(&right)?;
        let g = self.gates;
        self.gates += 1;
        self.constrain(LinearCombination::from(Wire::Left(g)) - left.clone())?;
        self.constrain(LinearCombination::from(Wire::Right(g)) - right.clone())?;
        self.script.push(Step::Mul {
            gate: g,
            left,
            right,
        });
        Ok((Wire::Left(g), Wire::Right(g), Wire::Out(g)))
    }

    /// Constrains `source` to `[0, 2^width)` and returns the bit wires, least
    /// significant first. Each bit `b` gets a gate `b * (b - 1) = 0`.
    pub fn bits(
        &mut self,
        source: impl Into<LinearCombination>,
        width: usize,
    ) -> Result<Vec<Wire>> {
        let source = source.into();
        if width == 0 || width + BIT_DECOMPOSITION_SLACK >= 250 {
            return Err(Error::InvalidParameter(format!("bit width {width}")));
        }
        self.check(&source)?;
        let first = self.gates;
        self.gates += width;
        let mut recomposed = LinearCombination::zero();
        let mut pow = Scalar::one();
        for g in first..first + width {
            // a_R = a_L - 1, a_O = 0
            self.add_linear_constraint(
                &[
                    (Wire::Right(g), Scalar::one()),
                    (Wire::Left(g), -Scalar::one()),
                ],
                -Scalar::one(),
            )?;
            self.add_linear_constraint(&[(Wire::Out(g), Scalar::one())], Scalar::zero())?;
            recomposed = recomposed + LinearCombination::from(Wire::Left(g)) * pow;
            pow.double_in_place();
        }
        self.constrain(recomposed - source.clone())?;
        self.script.push(Step::Bits {
            first_gate: first,
            width,
            source,
        });
        Ok((first..first + width).map(Wire::Left).collect())
    }

    /// `sum terms = constant`.
    pub fn add_linear_constraint(
        &mut self,
        terms: &[(Wire, Scalar)],
        constant: Scalar,
    ) -> Result<()> {
        let lc = LinearCombination {
            terms: terms.to_vec(),
        };
        self.check(&lc)?;
        self.rows.push((terms.to_vec(), constant));
        Ok(())
    }

    /// `lc = 0`.
    pub fn constrain(&mut self, lc: LinearCombination) -> Result<()> {
        let mut constant = Scalar::zero();
        let mut terms = Vec::with_capacity(lc.terms.len());
        for (w, c) in lc.terms {
            if w == Wire::One {
                constant -= c;
            } else {
                terms.push((w, c));
            }
        }
        self.add_linear_constraint(&terms, constant)
    }

    fn check(&self, lc: &LinearCombination) -> Result<()> {
        for w in lc.wires() {
            let ok = match w {
                Wire::Left(g) | Wire::Right(g) | Wire::Out(g) => g < self.gates,
                Wire::Committed(j) => j < self.m,
                Wire::One => true,
            };
            if !ok {
                return Err(Error::WireOutOfRange(format!("{w:?}")));
            }
        }
        Ok(())
    }

    /// Pads the gate count to a power of two (at least one) and builds the matrices.
    pub fn finalize(self) -> Circuit {
        let n = self.gates.max(1).next_power_of_two();
        let mut cs = ConstraintSystem {
            n,
            q: self.rows.len(),
            m: self.m,
            w_l: Vec::new(),
            w_r: Vec::new(),
            w_o: Vec::new(),
            w_v: Vec::new(),
            c: Vec::with_capacity(self.rows.len()),
        };
        for (row, (terms, constant)) in self.rows.into_iter().enumerate() {
            let mut merged: Vec<(Wire, Scalar)> = Vec::new();
            for (w, c) in terms {
                match merged.iter_mut().find(|(mw, _)| *mw == w) {
                    Some((_, acc)) => *acc += c,
                    None => merged.push((w, c)),
                }
            }
            let mut constant = constant;
            for (w, c) in merged {
                if c.is_zero() {
                    continue;
                }
                match w {
                    Wire::Left(g) => cs.w_l.push((row, g, c)),
                    Wire::Right(g) => cs.w_r.push((row, g, c)),
                    Wire::Out(g) => cs.w_o.push((row, g, c)),
                    Wire::Committed(j) => cs.w_v.push((row, j, -c)),
                    Wire::One => constant -= c,
                }
            }
            cs.c.push(constant);
        }
        Circuit {
            cs,
            script: self.script,
            used_gates: self.gates,
        }
    }
}

/// Per-wire view used while running the wiring script.
struct Wires<T> {
    l: Vec<Option<T>>,
    r: Vec<Option<T>>,
    o: Vec<Option<T>>,
    v: Vec<T>,
}

impl<T: Copy> Wires<T> {
    fn get(&self, w: Wire) -> Option<T> {
        match w {
            Wire::Left(g) => self.l[g],
            Wire::Right(g) => self.r[g],
            Wire::Out(g) => self.o[g],
            Wire::Committed(j) => Some(self.v[j]),
            Wire::One => None,
        }
    }
}

fn eval_plain(lc: &LinearCombination, wires: &Wires<Scalar>) -> Scalar {
    lc.terms
        .iter()
        .map(|(w, c)| match w {
            Wire::One => *c,
            _ => *c * wires.get(*w).expect("script order guarantees assignment"),
        })
        .sum()
}

/// Fills in the full witness from committed values in the clear.
pub fn assign_plain(circuit: &Circuit, v: &[Scalar], gamma: &[Scalar]) -> Result<Assignment> {
    let cs = &circuit.cs;
    if v.len() != cs.m || gamma.len() != cs.m {
        return Err(Error::LengthMismatch {
            expected: cs.m,
            got: v.len().min(gamma.len()),
        });
    }
    let n = cs.n;
    let mut wires = Wires {
        l: vec![None; n],
        r: vec![None; n],
        o: vec![None; n],
        v: v.to_vec(),
    };
    for step in &circuit.script {
        match step {
            Step::Mul { gate, left, right } => {
                let a = eval_plain(left, &wires);
                let b = eval_plain(right, &wires);
                wires.l[*gate] = Some(a);
                wires.r[*gate] = Some(b);
                wires.o[*gate] = Some(a * b);
            }
            Step::Bits {
                first_gate,
                width,
                source,
            } => {
                let x = eval_plain(source, &wires);
                for i in 0..*width {
                    let b = Scalar::from(scalar_bit(&x, i) as u64);
                    wires.l[first_gate + i] = Some(b);
                    wires.r[first_gate + i] = Some(b - Scalar::one());
                    wires.o[first_gate + i] = Some(Scalar::zero());
                }
            }
        }
    }
    let fill = |col: Vec<Option<Scalar>>| col.into_iter().map(|x| x.unwrap_or_default()).collect();
    Ok(Assignment {
        a_l: fill(wires.l),
        a_r: fill(wires.r),
        a_o: fill(wires.o),
        v: v.to_vec(),
        gamma: gamma.to_vec(),
    })
}

fn eval_shared(party: &Party, lc: &LinearCombination, wires: &Wires<AuthShare>) -> AuthShare {
    let mut acc = AuthShare::zero(party.id());
    let mut constant = Scalar::zero();
    for (w, c) in &lc.terms {
        match w {
            Wire::One => constant += c,
            _ => acc = acc + wires.get(*w).expect("script order guarantees assignment") * *c,
        }
    }
    party.add_public(&acc, constant)
}

/// Fills in the witness on shares. Independent multiplication gates are
/// batched into one Beaver round; a gate whose inputs depend on a pending
/// output forces the batch to complete first.
pub fn assign_collab(
    party: &mut Party,
    circuit: &Circuit,
    v: &[AuthShare],
    gamma: &[AuthShare],
) -> Result<SharedAssignment> {
    let cs = &circuit.cs;
    if v.len() != cs.m || gamma.len() != cs.m {
        return Err(Error::LengthMismatch {
            expected: cs.m,
            got: v.len().min(gamma.len()),
        });
    }
    let n = cs.n;
    let mut wires = Wires {
        l: vec![None; n],
        r: vec![None; n],
        o: vec![None; n],
        v: v.to_vec(),
    };
    let mut pending: BTreeSet<usize> = BTreeSet::new();

    fn flush(
        party: &mut Party,
        wires: &mut Wires<AuthShare>,
        pending: &mut BTreeSet<usize>,
    ) -> Result<()> {
        if pending.is_empty() {
            return Ok(());
        }
        let gates: Vec<usize> = std::mem::take(pending).into_iter().collect();
        let xs: Vec<AuthShare> = gates.iter().map(|g| wires.l[*g].expect("set")).collect();
        let ys: Vec<AuthShare> = gates.iter().map(|g| wires.r[*g].expect("set")).collect();
        let outs = party.mul_batch(&xs, &ys)?;
        for (g, o) in gates.into_iter().zip(outs) {
            wires.o[g] = Some(o);
        }
        Ok(())
    }

    let needs_pending = |lc: &LinearCombination, pending: &BTreeSet<usize>| {
        lc.wires()
            .any(|w| matches!(w, Wire::Out(g) if pending.contains(&g)))
    };

    for step in &circuit.script {
        match step {
            Step::Mul { gate, left, right } => {
                if needs_pending(left, &pending) || needs_pending(right, &pending) {
                    flush(party, &mut wires, &mut pending)?;
                }
                let a = eval_shared(party, left, &wires);
                let b = eval_shared(party, right, &wires);
                wires.l[*gate] = Some(a);
                wires.r[*gate] = Some(b);
                pending.insert(*gate);
            }
            Step::Bits {
                first_gate,
                width,
                source,
            } => {
                if needs_pending(source, &pending) {
                    flush(party, &mut wires, &mut pending)?;
                }
                let x = eval_shared(party, source, &wires);
                let bits = party.bit_decompose(&x, *width)?;
                for (i, b) in bits.into_iter().enumerate() {
                    wires.l[first_gate + i] = Some(b);
                    wires.r[first_gate + i] = Some(party.add_public(&b, -Scalar::one()));
                    wires.o[first_gate + i] = Some(AuthShare::zero(party.id()));
                }
            }
        }
    }
    flush(party, &mut wires, &mut pending)?;

    let id = party.id();
    let fill = |col: Vec<Option<AuthShare>>| {
        col.into_iter()
            .map(|x| x.unwrap_or(AuthShare::zero(id)))
            .collect()
    };
    Ok(SharedAssignment {
        a_l: fill(wires.l),
        a_r: fill(wires.r),
        a_o: fill(wires.o),
        v: v.to_vec(),
        gamma: gamma.to_vec(),
    })
}

/// `ceil(log2(k))`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// Constrains a committed value to `[0, 2^64)`.
pub fn range_check_64(builder: &mut CircuitBuilder, v: Wire) -> Result<Vec<Wire>> {
    builder.bits(v, 64)
}

/// Constrains `sum(vs) - t` to `[0, 2^(64 + ceil(log2 k)))`, i.e. the sum of
/// `k` values in `[0, 2^64)` reaches the threshold.
pub fn sum_threshold(builder: &mut CircuitBuilder, vs: &[Wire], t: Scalar) -> Result<Vec<Wire>> {
    let mut diff = LinearCombination::constant(-t);
    for v in vs {
        diff = diff + *v;
    }
    builder.bits(diff, sum_threshold_width(vs.len()))
}

pub fn sum_threshold_width(k: usize) -> usize {
    64 + ceil_log2(k)
}

/// Maps a signed 64-bit value into `[0, 2^64)` by adding `2^63`.
pub fn embed_signed(x: i64) -> Scalar {
    Scalar::from((x as u64) ^ (1u64 << 63))
}

/// Threshold on embedded values equivalent to `sum(x) >= t` over `k` signed values.
pub fn embed_signed_threshold(t: i64, k: usize) -> Scalar {
    crate::algebra::scalar_from_i64(t) + Scalar::from(k as u64) * Scalar::from(1u64 << 63)
}

/// Benchmark-style circuit: `gates` multiplications over `m >= 1` committed
/// inputs, gate `i` computing `(v_{i mod m} + i) * v_{(i+1) mod m}`.
pub fn sample_circuit(gates: usize, m: usize) -> Result<Circuit> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "sample circuit needs m >= 1".into(),
        ));
    }
    let mut b = CircuitBuilder::new();
    let v = b.alloc_committed(m);
    for i in 0..gates {
        let left = LinearCombination::from(v[i % m]) + Scalar::from(i as u64);
        b.multiply(left, v[(i + 1) % m])?;
    }
    Ok(b.finalize())
}

/// `v < 2^bits` for one committed value.
pub fn less_than_pow2_circuit(bits: usize) -> Result<Circuit> {
    let mut b = CircuitBuilder::new();
    let v = b.alloc_committed(1)[0];
    b.bits(v, bits)?;
    Ok(b.finalize())
}

/// `v` is odd: `(v - 1) / 2` fits in `width` bits.
pub fn odd_circuit(width: usize) -> Result<Circuit> {
    let mut b = CircuitBuilder::new();
    let v = b.alloc_committed(1)[0];
    let half = Scalar::from(2u64).inverse().expect("2 is invertible");
    b.bits((LinearCombination::from(v) - Scalar::one()) * half, width)?;
    Ok(b.finalize())
}
