use colcp::algebra::{g1_generator, Scalar, UniformRand};
use colcp::error::Error;
use colcp::mpc::{deal, exp_to_group_share, run_in_memory, DealerRequest, BIT_DECOMPOSITION_SLACK};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn scalar() -> impl Strategy<Value = Scalar> {
    any::<u64>().prop_map(|s| Scalar::rand(&mut ChaCha20Rng::seed_from_u64(s)))
}

fn masks(n: usize, count: usize, seed: u64) -> Vec<colcp::mpc::Preprocessing> {
    deal(
        n,
        &DealerRequest {
            input_masks: count,
            ..Default::default()
        },
        &mut ChaCha20Rng::seed_from_u64(seed),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reconstruction(x in scalar(), n in 2usize..=4, owner_seed in any::<usize>()) {
        let owner = owner_seed % n;
        let out = run_in_memory(masks(n, 1, 1), 1, |p| {
            let s = p.share_input(owner, (p.id() == owner).then_some(x))?;
            p.open(&s)
        });
        for r in out {
            prop_assert_eq!(r.unwrap(), x);
        }
    }

    #[test]
    fn linearity(x in scalar(), y in scalar(), a in scalar(), c in scalar()) {
        let out = run_in_memory(masks(3, 2, 2), 2, |p| {
            let sx = p.share_input(0, (p.id() == 0).then_some(x))?;
            let sy = p.share_input(0, (p.id() == 0).then_some(y))?;
            let z = p.add_public(&(sx * a + sy), c);
            let w = -(sx - sy);
            Ok((p.open(&z)?, p.open(&w)?))
        });
        for r in out {
            let (z, w) = r.unwrap();
            prop_assert_eq!(z, a * x + y + c);
            prop_assert_eq!(w, y - x);
        }
    }

    #[test]
    fn beaver_products(x in scalar(), y in scalar(), n in 2usize..=3) {
        let preps = deal(
            n,
            &DealerRequest { triples: 1, input_masks: 2, ..Default::default() },
            &mut ChaCha20Rng::seed_from_u64(3),
        )
        .unwrap();
        let out = run_in_memory(preps, 3, |p| {
            let sx = p.share_input(0, (p.id() == 0).then_some(x))?;
            let sy = p.share_input(1, (p.id() == 1).then_some(y))?;
            let z = p.mul(&sx, &sy)?;
            p.open(&z)
        });
        for r in out {
            prop_assert_eq!(r.unwrap(), x * y);
        }
    }

    #[test]
    fn group_share_homomorphism(x in scalar()) {
        let g = g1_generator();
        let out = run_in_memory(masks(3, 1, 4), 4, |p| {
            let s = p.share_input(2, (p.id() == 2).then_some(x))?;
            let gs = exp_to_group_share(&g, &s);
            Ok((p.open_group(&gs)?, p.open(&s)?))
        });
        for r in out {
            let (gx, opened) = r.unwrap();
            prop_assert_eq!(gx, g * opened);
        }
    }

    #[test]
    fn bit_decomposition_matches_binary(x in any::<u32>(), width in 32usize..=40) {
        let preps = deal(
            2,
            &DealerRequest {
                triples: width,
                input_masks: 1,
                random_bits: width + BIT_DECOMPOSITION_SLACK,
                ..Default::default()
            },
            &mut ChaCha20Rng::seed_from_u64(5),
        )
        .unwrap();
        let out = run_in_memory(preps, 5, |p| {
            let s = p.share_input(0, (p.id() == 0).then(|| Scalar::from(x as u64)))?;
            let bits = p.bit_decompose(&s, width)?;
            let opened = p.open_batch(&bits)?;
            p.check_macs()?;
            Ok(opened)
        });
        for r in out {
            let bits = r.unwrap();
            for (i, b) in bits.iter().enumerate() {
                prop_assert_eq!(*b, Scalar::from(((x as u64) >> i) & 1));
            }
        }
    }
}

#[test]
fn hundred_tampered_openings_abort() {
    for trial in 0..100u64 {
        let out = run_in_memory(masks(2, 1, 100 + trial), trial, |p| {
            let mut s = p.share_input(0, (p.id() == 0).then(|| Scalar::from(trial)))?;
            if p.id() == (trial % 2) as usize {
                s.value += Scalar::from(trial + 1);
            }
            p.open(&s)
        });
        assert!(
            out.iter().all(|r| matches!(r, Err(Error::MacCheckFailed))),
            "trial {trial}"
        );
    }
}

#[test]
fn preprocessing_runs_out_cleanly() {
    let out = run_in_memory(masks(2, 0, 6), 6, |p| {
        p.share_input(0, (p.id() == 0).then(|| Scalar::from(1u64)))
    });
    assert!(out
        .iter()
        .all(|r| matches!(r, Err(Error::PreprocessingExhausted(_)))));
}
