use colcp::algebra::{Scalar, UniformRand};
use colcp::cplink::{
    cplink_keygen, cplink_prove, cplink_prove_collab, cplink_verify, ss_keygen, ss_prove,
    ss_verify, SubspaceMatrix,
};
use colcp::mpc::{deal, run_in_memory, DealerRequest};
use colcp::pedersen::{
    commit, cts_commit_shared, stc_commit, ver_commit, CommitmentKey, Opening, OwnershipMap,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::HashSet;

fn scalars(n: usize) -> impl Strategy<Value = Vec<Scalar>> {
    any::<u64>().prop_map(move |s| {
        let mut r = ChaCha20Rng::seed_from_u64(s);
        (0..n).map(|_| Scalar::rand(&mut r)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn homomorphism(u1 in scalars(3), u2 in scalars(3), o in scalars(2)) {
        let ck = CommitmentKey::setup_with_tag("prop/hom", 3).unwrap();
        let c1 = commit(&ck, &u1, &Opening(o[0])).unwrap();
        let c2 = commit(&ck, &u2, &Opening(o[1])).unwrap();
        let sum: Vec<Scalar> = u1.iter().zip(&u2).map(|(a, b)| *a + b).collect();
        prop_assert_eq!(c1 + c2, commit(&ck, &sum, &Opening(o[0] + o[1])).unwrap());
    }

    #[test]
    fn cplink_completeness(n_exp in 0u32..=3, w in scalars(10)) {
        let n = 1usize << n_exp;
        let ck = CommitmentKey::setup_with_tag("prop/ck", n).unwrap();
        let ck2 = CommitmentKey::setup_with_tag("prop/ck2", n).unwrap();
        let keys = cplink_keygen(&ck, &ck2, &mut ChaCha20Rng::seed_from_u64(n as u64)).unwrap();
        let u = &w[..n];
        let (o, o2) = (Opening(w[8]), Opening(w[9]));
        let c = commit(&ck, u, &o).unwrap();
        let c2 = commit(&ck2, u, &o2).unwrap();
        let pi = cplink_prove(&keys.ek, &o, &o2, u).unwrap();
        prop_assert!(cplink_verify(&keys.vk, &c, &c2, &pi));
        let mut other = u.to_vec();
        other[0] += Scalar::from(1u64);
        let c_bad = commit(&ck2, &other, &o2).unwrap();
        prop_assert!(!cplink_verify(&keys.vk, &c, &c_bad, &pi));
    }

    #[test]
    fn subspace_prover_is_linear(w1 in scalars(3), w2 in scalars(3)) {
        let ck = CommitmentKey::setup_with_tag("prop/ss", 2).unwrap();
        let mut m = SubspaceMatrix::new(1, 3).unwrap();
        for (j, g) in std::iter::once(ck.opening_base()).chain(ck.message_bases().iter().copied()).enumerate() {
            m.set(0, j, g).unwrap();
        }
        let keys = ss_keygen(&m, &mut ChaCha20Rng::seed_from_u64(7));
        let p1 = ss_prove(&keys.ek, &w1).unwrap();
        let p2 = ss_prove(&keys.ek, &w2).unwrap();
        let sum: Vec<Scalar> = w1.iter().zip(&w2).map(|(a, b)| *a + b).collect();
        prop_assert_eq!(p1.0 + p2.0, ss_prove(&keys.ek, &sum).unwrap().0);
        prop_assert!(ss_verify(&keys.vk, &m.apply(&w1).unwrap(), &p1));
    }
}

#[test]
fn hiding_smoke() {
    let ck = CommitmentKey::setup_with_tag("prop/hide", 2).unwrap();
    let u = [Scalar::from(1u64), Scalar::from(2u64)];
    let mut r = ChaCha20Rng::seed_from_u64(9);
    let seen: HashSet<_> = (0..1000)
        .map(|_| {
            commit(&ck, &u, &Opening(Scalar::rand(&mut r)))
                .unwrap()
                .to_bytes()
                .to_vec()
        })
        .collect();
    assert_eq!(seen.len(), 1000);
}

#[test]
fn cts_and_stc_open_to_the_reconstructed_witness() {
    for n_parties in 2..=4 {
        let slots = 5;
        let ck = CommitmentKey::setup_with_tag("prop/modes", slots).unwrap();
        let map = OwnershipMap::contiguous(slots, n_parties).unwrap();
        let u: Vec<Scalar> = (0..slots as u64).map(|i| Scalar::from(i * i + 1)).collect();
        let preps = deal(
            n_parties,
            &DealerRequest {
                input_masks: slots + 1,
                randoms: 1,
                ..Default::default()
            },
            &mut ChaCha20Rng::seed_from_u64(n_parties as u64),
        )
        .unwrap();
        let out = run_in_memory(preps, 1, |p| {
            let me = p.id();
            let own: Vec<Scalar> = map.slots_of(me).iter().map(|&s| u[s]).collect();
            let cts = cts_commit_shared(p, &ck, &map, &own)?;
            let o_cts = p.open(&cts.opening_share)?;
            let mut shares = Vec::new();
            for s in 0..slots {
                let owner = map.owner_of(s).unwrap();
                shares.push(p.share_input(owner, (owner == me).then(|| u[s]))?);
            }
            let o = p.random_shares(1)?[0];
            let stc = stc_commit(p, &ck, &shares, &o)?;
            let o_stc = p.open(&o)?;
            Ok((cts.commitment, o_cts, stc, o_stc))
        });
        for r in out {
            let (cts, o_cts, stc, o_stc) = r.unwrap();
            assert!(ver_commit(&ck, &cts, &u, &Opening(o_cts)));
            assert!(ver_commit(&ck, &stc, &u, &Opening(o_stc)));
        }
    }
}

#[test]
fn collaborative_link_equals_single_prover_link() {
    let ck = CommitmentKey::setup_with_tag("prop/c1", 3).unwrap();
    let ck2 = CommitmentKey::setup_with_tag("prop/c2", 3).unwrap();
    let keys = cplink_keygen(&ck, &ck2, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
    let u: Vec<Scalar> = (3..6u64).map(Scalar::from).collect();
    let (o, o2) = (Scalar::from(17u64), Scalar::from(18u64));
    let single = cplink_prove(&keys.ek, &Opening(o), &Opening(o2), &u).unwrap();
    let preps = deal(
        3,
        &DealerRequest {
            input_masks: 5,
            ..Default::default()
        },
        &mut ChaCha20Rng::seed_from_u64(3),
    )
    .unwrap();
    let out = run_in_memory(preps, 3, |p| {
        let own = p.id() == 1;
        let su = p.share_inputs(1, own.then_some(&u[..]), 3)?;
        let so = p.share_input(1, own.then_some(o))?;
        let so2 = p.share_input(1, own.then_some(o2))?;
        cplink_prove_collab(p, &keys.ek, &so, &so2, &su)
    });
    for r in out {
        assert_eq!(r.unwrap().to_bytes(), single.to_bytes());
    }
}
