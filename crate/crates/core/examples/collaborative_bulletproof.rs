//! Three parties jointly prove a 64-gate circuit over inputs they each own and
//! link the result to an external commitment; the standard verifier accepts.

use colcp::algebra::{GeneratorSet, Scalar};
use colcp::bulletproofs::{
    bp_verify, link_keygen, CollabOptions, CommitMode, LinkStatement, VerifyOptions,
};
use colcp::circuit::sample_circuit;
use colcp::pedersen::CommitmentKey;
use colcp::session::{Session, SessionLink};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> colcp::Result<()> {
    let circuit = sample_circuit(64, 3)?;
    let gens = GeneratorSet::new(circuit.cs.n);
    let ck_ext = CommitmentKey::setup_with_tag("example/ext", 3)?;
    let keys = link_keygen(&gens, &ck_ext, &mut ChaCha20Rng::seed_from_u64(1))?;
    let values = [11u64, 22, 33].map(Scalar::from).to_vec();

    for commit_mode in [CommitMode::Cts, CommitMode::Stc] {
        let opts = CollabOptions {
            commit_mode,
            ..Default::default()
        };
        let outcomes = Session::new(&circuit, 3, values.clone(), opts)?
            .with_link(SessionLink::create(&keys, &ck_ext))
            .with_seed(7)
            .run_in_memory()?;
        let out = &outcomes[0].output;
        let verdict = bp_verify(
            &circuit.cs,
            &gens,
            &out.proof.v,
            &out.proof.proof,
            Some(LinkStatement {
                vk: &keys.vk,
                c_hat: out.c_hat.as_ref().unwrap(),
                proof: out.proof.link.as_ref().unwrap(),
            }),
            VerifyOptions::default(),
        );
        println!(
            "{}: verify = {:?}, proof = {} bytes, party 0 sent {} messages",
            commit_mode.as_str(),
            verdict,
            out.proof.proof.to_bytes(&circuit.cs).len(),
            outcomes[0].traffic.messages_sent
        );
        for phase in &out.phases {
            println!("  {:<7} {:>8.2?}", phase.phase, phase.elapsed);
        }
    }
    Ok(())
}
