//! Two disjoint prover groups prove "u < 16" and "u is odd" about one shared
//! committed value; both proofs are bound to the same commitment.

use colcp::algebra::Scalar;
use colcp::bulletproofs::CollabOptions;
use colcp::circuit::{less_than_pow2_circuit, odd_circuit};
use colcp::compose::{
    compose_prove, verify_composed, ComposedStatement, GroupSpec, ProverGroupPlan, SharedInput,
};
use colcp::pedersen::{commit, CommitmentKey, Opening};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> colcp::Result<()> {
    let ck_s = CommitmentKey::setup_with_tag("example/shared", 1)?;
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let opts = CollabOptions::default();
    let plan = ProverGroupPlan {
        groups: vec![
            GroupSpec::new(
                vec![0, 1],
                less_than_pow2_circuit(4)?,
                &ck_s,
                opts,
                &mut rng,
            )?,
            GroupSpec::new(vec![2, 3], odd_circuit(8)?, &ck_s, opts, &mut rng)?,
        ],
    };
    let (u0, o_s) = (Scalar::from(11u64), Scalar::from(99u64));
    let input = SharedInput {
        c_s: commit(&ck_s, &[u0], &Opening(o_s))?,
        u0,
        o_s,
    };
    let stmt = compose_prove(&plan, &input, 3)?;
    let bytes = stmt.to_bytes();
    let decoded = ComposedStatement::from_bytes(&bytes)?;
    println!(
        "bundle: {} bytes, {} sub-proofs",
        bytes.len(),
        decoded.subs.len()
    );
    println!(
        "u0 = 11: conjunction verifies: {}",
        verify_composed(&decoded, &plan.verifier_keys())
    );

    match compose_prove(
        &plan,
        &SharedInput {
            c_s: commit(&ck_s, &[Scalar::from(12u64)], &Opening(o_s))?,
            u0: Scalar::from(12u64),
            o_s,
        },
        4,
    ) {
        Ok(_) => println!("u0 = 12: unexpectedly proved"),
        Err(e) => println!("u0 = 12: refused ({e})"),
    }
    Ok(())
}
