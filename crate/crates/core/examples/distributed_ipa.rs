//! Two parties run the inner-product argument on shared vectors; the result
//! is byte-identical to the single-prover argument on the opened vectors.

use colcp::algebra::{hash_to_g1, inner_product, msm, GeneratorSet, Scalar, UniformRand};
use colcp::ipa::{dipa_prove, dipa_triples, ipa_prove, ipa_verify};
use colcp::mpc::{deal, run_in_memory, DealerRequest};
use colcp::transcript::Transcript;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> colcp::Result<()> {
    let n = 8;
    let gens = GeneratorSet::new(n);
    let u = hash_to_g1("example/u");
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let a: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut rng)).collect();
    let b: Vec<Scalar> = (0..n).map(|_| Scalar::rand(&mut rng)).collect();

    let req = DealerRequest {
        triples: dipa_triples(n),
        input_masks: 2 * n,
        ..Default::default()
    };
    let preps = deal(2, &req, &mut rng)?;
    let results = run_in_memory(preps, 1, |p| {
        let sa = p.share_inputs(0, (p.id() == 0).then_some(&a[..]), n)?;
        let sb = p.share_inputs(1, (p.id() == 1).then_some(&b[..]), n)?;
        dipa_prove(
            p,
            &gens.g_vec,
            &gens.h_vec,
            &u,
            &sa,
            &sb,
            &mut Transcript::new(b"example"),
        )
    });
    let distributed = results.into_iter().next().unwrap()?;
    let single = ipa_prove(
        &gens.g_vec,
        &gens.h_vec,
        &u,
        &a,
        &b,
        &mut Transcript::new(b"example"),
    )?;
    println!("rounds: {}", distributed.l.len());
    println!(
        "identical to single prover: {}",
        distributed.to_bytes() == single.to_bytes()
    );

    let p = msm(&gens.g_vec, &a)? + msm(&gens.h_vec, &b)? + u * inner_product(&a, &b);
    println!(
        "verifies: {}",
        ipa_verify(
            &gens.g_vec,
            &gens.h_vec,
            &u,
            &p,
            &distributed,
            &mut Transcript::new(b"example")
        )
    );
    Ok(())
}
