//! Links two commitments to the same vector under different keys with one
//! group element, then shows the link failing for a different vector.

use colcp::algebra::Scalar;
use colcp::cplink::{cplink_keygen, cplink_prove, cplink_verify};
use colcp::pedersen::{commit, CommitmentKey, Opening};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> colcp::Result<()> {
    let ck = CommitmentKey::setup_with_tag("example/ck", 3)?;
    let ck2 = CommitmentKey::setup_with_tag("example/ck-prime", 3)?;
    let keys = cplink_keygen(&ck, &ck2, &mut ChaCha20Rng::seed_from_u64(1))?;

    let u: Vec<Scalar> = [4u64, 8, 15].map(Scalar::from).to_vec();
    let (o, o2) = (Opening(Scalar::from(16u64)), Opening(Scalar::from(23u64)));
    let c = commit(&ck, &u, &o)?;
    let c2 = commit(&ck2, &u, &o2)?;
    let pi = cplink_prove(&keys.ek, &o, &o2, &u)?;
    println!("proof: {} bytes", pi.to_bytes().len());
    println!("same vector: {}", cplink_verify(&keys.vk, &c, &c2, &pi));

    let mut other = u.clone();
    other[2] = Scalar::from(42u64);
    let c_other = commit(&ck2, &other, &o2)?;
    println!(
        "different vector: {}",
        cplink_verify(&keys.vk, &c, &c_other, &pi)
    );
    Ok(())
}
