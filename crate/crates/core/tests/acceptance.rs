//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance` for realistic timings;
//! the debug build also passes.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use colcp::algebra::{g1_generator, GeneratorSet, Scalar, UniformRand, G1};
use colcp::bulletproofs::{
    bp_prove_single, bp_verify, link_keygen, proof_size, replay_challenges, BulletproofProof,
    CollabOptions, CommitMode, IpaMode, LinkStatement, LinkWitness, ProveOptions, VerifyOptions,
};
use colcp::circuit::{ceil_log2, less_than_pow2_circuit, odd_circuit, sample_circuit, Circuit};
use colcp::cli::{run_audit, AuditMode, AuditScenario};
use colcp::compose::{compose_prove, verify_composed, GroupSpec, ProverGroupPlan, SharedInput};
use colcp::cplink::{CpLinkProof, SsKeys};
use colcp::error::Error;
use colcp::ipa::{dipa_prove, dipa_triples, ipa_prove, IpaProof};
use colcp::mpc::{deal, run_in_memory, DealerRequest};
use colcp::pedersen::{
    commit, cts_commit, stc_commit, Commitment, CommitmentKey, Opening, OwnershipMap,
};
use colcp::session::{PartyOutcome, Session, SessionLink};
use colcp::transcript::Transcript;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Timing samples per configuration in the ordering checks; the minimum is compared.
const TIMING_RUNS: usize = 5;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn s(v: u64) -> Scalar {
    Scalar::from(v)
}

struct Linked {
    circuit: Circuit,
    gens: GeneratorSet,
    ck_ext: CommitmentKey,
    keys: SsKeys,
}

fn linked(circuit: Circuit, seed: u64) -> Linked {
    let gens = GeneratorSet::new(circuit.cs.n);
    let ck_ext = CommitmentKey::setup_with_tag("acceptance/ext", circuit.cs.m).unwrap();
    let keys = link_keygen(&gens, &ck_ext, &mut rng(seed)).unwrap();
    Linked {
        circuit,
        gens,
        ck_ext,
        keys,
    }
}

fn values(m: usize, seed: u64) -> Vec<Scalar> {
    let mut r = rng(seed);
    (0..m).map(|_| s(r.gen::<u32>() as u64)).collect()
}

fn run_collab(l: &Linked, n_parties: usize, opts: CollabOptions, seed: u64) -> Vec<PartyOutcome> {
    Session::new(&l.circuit, n_parties, values(l.circuit.cs.m, seed), opts)
        .unwrap()
        .with_link(SessionLink::create(&l.keys, &l.ck_ext))
        .with_seed(seed)
        .run_in_memory()
        .unwrap()
}

fn verify_outcome(l: &Linked, o: &PartyOutcome) -> bool {
    let out = &o.output;
    bp_verify(
        &l.circuit.cs,
        &l.gens,
        &out.proof.v,
        &out.proof.proof,
        Some(LinkStatement {
            vk: &l.keys.vk,
            c_hat: out.c_hat.as_ref().unwrap(),
            proof: out.proof.link.as_ref().unwrap(),
        }),
        VerifyOptions::default(),
    )
    .is_ok()
}

fn opts(commit_mode: CommitMode, ipa_mode: IpaMode) -> CollabOptions {
    CollabOptions {
        commit_mode,
        ipa_mode,
        check_satisfied: true,
    }
}

fn criterion_1() -> String {
    let (mut runs, mut accepted) = (0, 0);
    for gates in [1, 4, 16, 64, 256, 1024] {
        for m in [1, 4] {
            let l = linked(sample_circuit(gates, m).unwrap(), gates as u64);
            for n_parties in 1..=3 {
                for mode in [CommitMode::Cts, CommitMode::Stc] {
                    let outs = run_collab(
                        &l,
                        n_parties,
                        opts(mode, IpaMode::Local),
                        (gates * 10 + m) as u64,
                    );
                    runs += 1;
                    if outs
                        .iter()
                        .all(|o| o.output.proof.proof == outs[0].output.proof.proof)
                        && verify_outcome(&l, &outs[0])
                    {
                        accepted += 1;
                    }
                }
            }
        }
    }
    assert_eq!(accepted, runs, "{accepted}/{runs} accepted");
    format!("{accepted}/{runs} collaborative proofs with links accepted")
}

fn criterion_2() -> String {
    let l = linked(sample_circuit(16, 2).unwrap(), 2);
    let v = values(2, 2);
    let gamma = vec![s(11), s(12)];
    let asg = colcp::circuit::assign_plain(&l.circuit, &v, &gamma).unwrap();
    let o_hat = s(99);
    let c_hat = commit(&l.ck_ext, &v, &Opening(o_hat)).unwrap();
    let single = bp_prove_single(
        &l.circuit.cs,
        &asg,
        &l.gens,
        Some(LinkWitness {
            ek: &l.keys.ek,
            o_hat,
        }),
        ProveOptions::default(),
        &mut rng(3),
    )
    .unwrap();
    bp_verify(
        &l.circuit.cs,
        &l.gens,
        &single.v,
        &single.proof,
        Some(LinkStatement {
            vk: &l.keys.vk,
            c_hat: &c_hat,
            proof: single.link.as_ref().unwrap(),
        }),
        VerifyOptions::default(),
    )
    .unwrap();
    assert_eq!(
        single.challenges,
        replay_challenges(&l.circuit.cs, &single.v, &single.proof)
    );

    let outs = run_collab(&l, 2, CollabOptions::default(), 2);
    assert!(verify_outcome(&l, &outs[0]));
    let reference = &outs[0].output.proof.challenges;
    for label in ["y", "z", "x", "x_u"] {
        let vals: Vec<_> = outs
            .iter()
            .map(|o| {
                o.output
                    .proof
                    .challenges
                    .iter()
                    .find(|(k, _)| *k == label)
                    .map(|(_, v)| colcp::algebra::encode_scalar(v))
                    .unwrap_or_else(|| panic!("no challenge {label}"))
            })
            .collect();
        assert!(
            vals.windows(2).all(|w| w[0] == w[1]),
            "challenge {label} differs"
        );
    }
    assert_eq!(
        reference,
        &replay_challenges(
            &l.circuit.cs,
            &outs[0].output.proof.v,
            &outs[0].output.proof.proof
        )
    );
    "single and N=2 proofs pass one verifier; y, z, x, x_u identical across parties and verifier"
        .into()
}

fn criterion_3() -> String {
    let mut notes = Vec::new();
    for n_parties in [2usize, 3, 4] {
        let slots = 2 * n_parties;
        let ck = CommitmentKey::setup_with_tag("acceptance/c3", slots).unwrap();
        let map = OwnershipMap::contiguous(slots, n_parties).unwrap();
        let u = values(slots, 30 + n_parties as u64);
        let parts: Vec<Scalar> = (0..n_parties as u64).map(|i| s(100 + i)).collect();
        let o: Scalar = parts.iter().sum();
        let expected = commit(&ck, &u, &Opening(o)).unwrap();
        let preps = deal(
            n_parties,
            &DealerRequest {
                input_masks: slots + 1,
                ..Default::default()
            },
            &mut rng(31),
        )
        .unwrap();
        let results = run_in_memory(preps, 31, |p| {
            let me = p.id();
            let own: Vec<Scalar> = map.slots_of(me).iter().map(|&i| u[i]).collect();
            let before = p.stats();
            let cts = cts_commit(p, &ck, &map, &own, &Opening(parts[me]))?;
            let cts_msgs = (p.stats() - before).messages_sent;
            let mut shares = Vec::new();
            for slot in 0..slots {
                let owner = map.owner_of(slot).unwrap();
                shares.push(p.share_input(owner, (owner == me).then(|| u[slot]))?);
            }
            let mut o_share = colcp::mpc::AuthShare::zero(me);
            for owner in 0..p.n() {
                o_share = o_share + p.share_input(owner, (owner == me).then(|| parts[me]))?;
            }
            let before = p.stats();
            let stc = stc_commit(p, &ck, &shares, &o_share)?;
            let stc_msgs = (p.stats() - before).messages_sent;
            Ok((cts, stc, cts_msgs, stc_msgs))
        });
        for r in results {
            let (cts, stc, cts_msgs, stc_msgs) = r.unwrap();
            assert_eq!(
                cts, expected,
                "CtS differs from the direct commitment (N={n_parties})"
            );
            assert_eq!(
                stc, expected,
                "StC differs from the direct commitment (N={n_parties})"
            );
            assert_eq!(
                cts_msgs as usize,
                n_parties - 1,
                "CtS messages (N={n_parties})"
            );
            assert_eq!(
                stc_msgs as usize,
                n_parties - 1,
                "StC messages (N={n_parties})"
            );
        }
        notes.push(format!("N={n_parties}: {} msgs", n_parties - 1));
    }
    format!(
        "CtS = StC = direct commitment; per-prover messages N-1 ({})",
        notes.join(", ")
    )
}

fn criterion_4() -> String {
    for n in [2usize, 4, 8, 16] {
        for n_parties in [2usize, 3] {
            let gens = GeneratorSet::new(n);
            let u = colcp::algebra::hash_to_g1("acceptance/u");
            let mut r = rng((n * 7 + n_parties) as u64);
            let a: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut r)).collect();
            let b: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut r)).collect();
            let preps = deal(
                n_parties,
                &DealerRequest {
                    triples: dipa_triples(n),
                    input_masks: 2 * n,
                    ..Default::default()
                },
                &mut r,
            )
            .unwrap();
            let results = run_in_memory(preps, 4, |p| {
                let owner = p.id() == 0;
                let sa = p.share_inputs(0, owner.then_some(&a[..]), n)?;
                let sb = p.share_inputs(0, owner.then_some(&b[..]), n)?;
                let mut t = Transcript::new(b"acceptance/dipa");
                let proof = dipa_prove(p, &gens.g_vec, &gens.h_vec, &u, &sa, &sb, &mut t)?;
                let opened_a = p.open_batch(&sa)?;
                let opened_b = p.open_batch(&sb)?;
                p.check_macs()?;
                Ok((proof, opened_a, opened_b))
            });
            for res in results {
                let (dproof, oa, ob) = res.unwrap();
                let mut t = Transcript::new(b"acceptance/dipa");
                let reference = ipa_prove(&gens.g_vec, &gens.h_vec, &u, &oa, &ob, &mut t).unwrap();
                assert_eq!(
                    dproof.to_bytes(),
                    reference.to_bytes(),
                    "n={n} N={n_parties}"
                );
                assert_eq!(dproof.l.len(), n.trailing_zeros() as usize);
            }
        }
    }
    "dipa_prove == ipa_prove byte for byte for n in {2,4,8,16}, N in {2,3}".into()
}

fn g1_fields(p: &mut BulletproofProof) -> Vec<&mut G1> {
    let mut v = vec![
        &mut p.a_i, &mut p.a_o, &mut p.s, &mut p.t1, &mut p.t3, &mut p.t4, &mut p.t5, &mut p.t6,
    ];
    let IpaProof { l, r, .. } = &mut p.ipa;
    v.extend(l.iter_mut());
    v.extend(r.iter_mut());
    v
}

fn scalar_fields(p: &mut BulletproofProof) -> Vec<&mut Scalar> {
    vec![
        &mut p.tau_x,
        &mut p.mu,
        &mut p.t_hat,
        &mut p.ipa.a,
        &mut p.ipa.b,
    ]
}

/// Perturbs every field of a proof statement in turn; returns (rejected, total).
fn perturbation_sweep(
    l: &Linked,
    v: &[Commitment],
    proof: &BulletproofProof,
    link: &CpLinkProof,
    c_hat: &Commitment,
) -> (usize, usize) {
    let check =
        |v: &[Commitment], proof: &BulletproofProof, link: &CpLinkProof, c_hat: &Commitment| {
            bp_verify(
                &l.circuit.cs,
                &l.gens,
                v,
                proof,
                Some(LinkStatement {
                    vk: &l.keys.vk,
                    c_hat,
                    proof: link,
                }),
                VerifyOptions::default(),
            )
            .is_ok()
        };
    assert!(check(v, proof, link, c_hat), "honest proof rejected");
    let delta = g1_generator();
    let (mut rejected, mut total) = (0, 0);
    let n_points = g1_fields(&mut proof.clone()).len();
    for i in 0..n_points {
        let mut p = proof.clone();
        *g1_fields(&mut p)[i] += delta;
        total += 1;
        rejected += usize::from(!check(v, &p, link, c_hat));
    }
    for i in 0..5 {
        let mut p = proof.clone();
        *scalar_fields(&mut p)[i] += Scalar::from(1u64);
        total += 1;
        rejected += usize::from(!check(v, &p, link, c_hat));
    }
    for j in 0..v.len() {
        let mut vv = v.to_vec();
        vv[j].0 += delta;
        total += 1;
        rejected += usize::from(!check(&vv, proof, link, c_hat));
    }
    total += 2;
    rejected += usize::from(!check(v, proof, &CpLinkProof(link.0 + delta), c_hat));
    rejected += usize::from(!check(v, proof, link, &Commitment(c_hat.0 + delta)));
    (rejected, total)
}

fn criterion_5() -> String {
    let (mut rejected, mut total) = (0, 0);
    for gates in [1usize, 4] {
        let l = linked(sample_circuit(gates, 1).unwrap(), 5);
        let v = values(1, 5);
        let asg = colcp::circuit::assign_plain(&l.circuit, &v, &[s(8)]).unwrap();
        let o_hat = s(21);
        let c_hat = commit(&l.ck_ext, &v, &Opening(o_hat)).unwrap();
        let single = bp_prove_single(
            &l.circuit.cs,
            &asg,
            &l.gens,
            Some(LinkWitness {
                ek: &l.keys.ek,
                o_hat,
            }),
            ProveOptions::default(),
            &mut rng(6),
        )
        .unwrap();
        let (r, t) = perturbation_sweep(
            &l,
            &single.v,
            &single.proof,
            single.link.as_ref().unwrap(),
            &c_hat,
        );
        rejected += r;
        total += t;

        let outs = run_collab(&l, 2, CollabOptions::default(), 5);
        let out = &outs[0].output;
        let (r, t) = perturbation_sweep(
            &l,
            &out.proof.v,
            &out.proof.proof,
            out.proof.link.as_ref().unwrap(),
            out.c_hat.as_ref().unwrap(),
        );
        rejected += r;
        total += t;
    }
    assert_eq!(rejected, total, "{rejected}/{total} perturbations rejected");
    format!("{rejected}/{total} single-field perturbations rejected")
}

fn criterion_6() -> String {
    const COUNT: usize = 100;
    let n_parties = 3;
    let mut r = rng(60);
    let xs: Vec<Scalar> = (0..COUNT).map(|_| Scalar::rand(&mut r)).collect();
    let ys: Vec<Scalar> = (0..COUNT).map(|_| Scalar::rand(&mut r)).collect();
    let (ca, cb, cc) = (
        Scalar::rand(&mut r),
        Scalar::rand(&mut r),
        Scalar::rand(&mut r),
    );
    let preps = deal(
        n_parties,
        &DealerRequest {
            triples: COUNT,
            input_masks: 2 * COUNT,
            ..Default::default()
        },
        &mut r,
    )
    .unwrap();
    let results = run_in_memory(preps, 61, |p| {
        let owner = p.id() == 0;
        let sx = p.share_inputs(0, owner.then_some(&xs[..]), COUNT)?;
        let sy = p.share_inputs(0, owner.then_some(&ys[..]), COUNT)?;
        let prods = p.mul_batch(&sx, &sy)?;
        let opened = p.open_batch(&prods)?;
        let lin: Vec<_> = sx
            .iter()
            .zip(&sy)
            .map(|(x, y)| p.add_public(&(*x * ca + *y * cb - *x), cc))
            .collect();
        let opened_lin = p.open_batch(&lin)?;
        p.check_macs()?;
        Ok((opened, opened_lin))
    });
    for res in results {
        let (prods, lin) = res.unwrap();
        for i in 0..COUNT {
            assert_eq!(prods[i], xs[i] * ys[i], "product {i}");
            assert_eq!(
                lin[i],
                xs[i] * ca + ys[i] * cb - xs[i] + cc,
                "linear combination {i}"
            );
        }
    }

    let mut caught = 0;
    for trial in 0..COUNT {
        let mut r = rng(1000 + trial as u64);
        let cheater = trial % n_parties;
        let offset = Scalar::rand(&mut r) + Scalar::from(1u64);
        let tamper_mac = trial % 2 == 1;
        let preps = deal(
            n_parties,
            &DealerRequest {
                input_masks: 1,
                ..Default::default()
            },
            &mut r,
        )
        .unwrap();
        let x = Scalar::rand(&mut r);
        let results = run_in_memory(preps, trial as u64, |p| {
            let mut share = p.share_input(0, (p.id() == 0).then_some(x))?;
            if p.id() == cheater {
                if tamper_mac {
                    share.mac += offset;
                } else {
                    share.value += offset;
                }
            }
            p.open(&share)
        });
        if results
            .iter()
            .all(|res| matches!(res, Err(Error::MacCheckFailed)))
        {
            caught += 1;
        }
    }
    assert_eq!(caught, COUNT, "{caught}/{COUNT} tampered openings caught");
    format!("{COUNT}/{COUNT} Beaver products exact; {caught}/{COUNT} tampered openings raised MacCheckFailed; linearity exact")
}

/// Independent size formula: header, round count, compressed points, scalars.
fn expected_size(n: usize) -> usize {
    let k = n.next_power_of_two().trailing_zeros() as usize;
    let header = 4 + 1 + 1 + 1 + 4 + 4 + 4 + 32;
    header + 4 + 48 * (8 + 2 * k) + 32 * 5
}

fn criterion_7() -> String {
    for n in 1..=1024usize {
        assert_eq!(proof_size(n), expected_size(n), "formula n={n}");
    }
    let mut measured = Vec::new();
    for k in 0..=10 {
        let gates = 1usize << k;
        for used in [gates, (gates / 2 + 1).max(1)] {
            let circuit = sample_circuit(used, 1).unwrap();
            let gens = GeneratorSet::new(circuit.cs.n);
            let asg = colcp::circuit::assign_plain(&circuit, &[s(3)], &[s(4)]).unwrap();
            let proof = bp_prove_single(
                &circuit.cs,
                &asg,
                &gens,
                None,
                ProveOptions::default(),
                &mut rng(7),
            )
            .unwrap()
            .proof;
            let mut p = proof.clone();
            assert_eq!(
                g1_fields(&mut p).len(),
                8 + 2 * k,
                "group elements n={used}"
            );
            assert_eq!(scalar_fields(&mut p).len(), 5);
            let bytes = proof.to_bytes(&circuit.cs);
            assert_eq!(bytes.len(), expected_size(used), "bytes n={used}");
            measured.push(bytes.len());
        }
    }
    format!(
        "8 + 2 log2 n points and 5 scalars; bytes match for n = 1..1024 ({} at n=1, {} at n=1024)",
        measured[0],
        measured[measured.len() - 2]
    )
}

fn criterion_8() -> String {
    let ck_s = CommitmentKey::setup_with_tag("acceptance/shared", 1).unwrap();
    let make_plan = |check: bool| {
        let mut r = rng(8);
        let o = CollabOptions {
            check_satisfied: check,
            ..Default::default()
        };
        ProverGroupPlan {
            groups: vec![
                GroupSpec::new(
                    vec![0, 1],
                    less_than_pow2_circuit(4).unwrap(),
                    &ck_s,
                    o,
                    &mut r,
                )
                .unwrap(),
                GroupSpec::new(vec![2, 3], odd_circuit(8).unwrap(), &ck_s, o, &mut r).unwrap(),
            ],
        }
    };
    let input = |u0: u64| {
        let o_s = s(4242 + u0);
        SharedInput {
            c_s: commit(&ck_s, &[s(u0)], &Opening(o_s)).unwrap(),
            u0: s(u0),
            o_s,
        }
    };
    let plan = make_plan(true);
    let keys = plan.verifier_keys();
    let stmt = compose_prove(&plan, &input(9), 80).unwrap();
    assert!(verify_composed(&stmt, &keys), "honest conjunction rejected");
    let other = compose_prove(&plan, &input(7), 81).unwrap();
    let mut swapped = stmt.clone();
    swapped.subs[1] = other.subs[1].clone();
    assert!(
        !verify_composed(&swapped, &keys),
        "cross-commitment substitution accepted"
    );

    let forced = make_plan(false);
    let forced_keys = forced.verifier_keys();
    let mut agree = 0;
    for u0 in 0..32u64 {
        let oracle = u0 < 16 && u0 % 2 == 1;
        let got = compose_prove(&forced, &input(u0), 100 + u0)
            .map(|st| verify_composed(&st, &forced_keys))
            .unwrap_or(false);
        assert_eq!(got, oracle, "u0={u0}");
        agree += 1;
    }
    format!("conjunction verifies; substitution rejected; oracle agrees on {agree}/32 values of u0")
}

fn criterion_9() -> String {
    let scenario = AuditScenario::generate(2, 8, None, 9).unwrap();
    let composed = run_audit(&scenario, AuditMode::Composed, 9).unwrap();
    let mono = run_audit(&scenario, AuditMode::Monolithic, 9).unwrap();
    assert!(composed.accepted && mono.accepted);
    assert!(
        composed.mpc_multiplications < mono.mpc_multiplications,
        "multiplications {} vs {}",
        composed.mpc_multiplications,
        mono.mpc_multiplications
    );
    assert!(
        composed.messages < mono.messages,
        "messages {} vs {}",
        composed.messages,
        mono.messages
    );
    let k = scenario.tx_count();
    assert_eq!(composed.collab_gates, 64 + ceil_log2(k));
    // Each bit is one gate plus two linear rows; one row recomposes the sum.
    assert_eq!(composed.collab_rows, 2 * (64 + ceil_log2(k)) + 1);
    format!(
        "composed verifies; MPC mults {} < {}; messages {} < {}; collaborative gates {} (+{} linear rows)",
        composed.mpc_multiplications,
        mono.mpc_multiplications,
        composed.messages,
        mono.messages,
        composed.collab_gates,
        composed.collab_rows
    )
}

fn phase_time(outs: &[PartyOutcome], phase: &str, reduce: fn(&[Duration]) -> Duration) -> Duration {
    let times: Vec<Duration> = outs
        .iter()
        .map(|o| {
            o.output
                .phases
                .iter()
                .find(|p| p.phase == phase)
                .unwrap()
                .elapsed
        })
        .collect();
    reduce(&times)
}

fn max_of(t: &[Duration]) -> Duration {
    t.iter().copied().max().unwrap()
}

fn mean_of(t: &[Duration]) -> Duration {
    t.iter().sum::<Duration>() / t.len() as u32
}

fn min_run(f: impl Fn(u64) -> Duration) -> Duration {
    (0..TIMING_RUNS as u64).map(f).min().unwrap()
}

fn criterion_10() -> String {
    let l = linked(sample_circuit(256, 2).unwrap(), 10);
    let local = min_run(|i| {
        phase_time(
            &run_collab(&l, 2, opts(CommitMode::Cts, IpaMode::Local), i),
            "prove",
            max_of,
        )
    });
    let dist = min_run(|i| {
        phase_time(
            &run_collab(&l, 2, opts(CommitMode::Cts, IpaMode::Distributed), i),
            "prove",
            max_of,
        )
    });
    assert!(dist > local, "distributed {dist:?} <= local {local:?}");

    let mut commit_notes = Vec::new();
    for n_parties in [4usize, 8] {
        let circuit = sample_circuit(2, n_parties).unwrap();
        let time = |mode| {
            min_run(|i| {
                let outs = Session::new(
                    &circuit,
                    n_parties,
                    values(n_parties, i),
                    opts(mode, IpaMode::Local),
                )
                .unwrap()
                .with_seed(i)
                .run_in_memory()
                .unwrap();
                phase_time(&outs, "commit", mean_of)
            })
        };
        let (cts, stc) = (time(CommitMode::Cts), time(CommitMode::Stc));
        assert!(stc > cts, "N={n_parties}: StC {stc:?} <= CtS {cts:?}");
        commit_notes.push(format!("N={n_parties} StC {stc:.2?} > CtS {cts:.2?}"));
    }
    format!(
        "n=256 N=2 prove: DIPA {dist:.2?} > local {local:.2?}; {}",
        commit_notes.join("; ")
    )
}

fn main() {
    let criteria: [(&str, fn() -> String); 10] = [
        ("end-to-end completeness", criterion_1),
        ("single/collaborative verifier equivalence", criterion_2),
        ("commitment protocol equivalence", criterion_3),
        ("DIPA oracle equivalence", criterion_4),
        ("soundness smoke suite", criterion_5),
        ("MPC suite", criterion_6),
        ("proof size", criterion_7),
        ("composition", criterion_8),
        ("audit scenario", criterion_9),
        ("ordering claims", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!(
                "PASS criterion {:>2} ({name}) [{secs:.1}s]: {detail}",
                i + 1
            ),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL criterion {:>2} ({name}) [{secs:.1}s]: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
