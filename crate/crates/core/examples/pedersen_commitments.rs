//! Commit-then-Share and Share-then-Commit produce the same Pedersen commitment
//! as a single party committing to the whole vector.

use colcp::algebra::Scalar;
use colcp::mpc::{deal, run_in_memory, DealerRequest};
use colcp::pedersen::{
    commit, cts_commit, stc_commit, ver_commit, CommitmentKey, Opening, OwnershipMap,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> colcp::Result<()> {
    let ck = CommitmentKey::setup_with_tag("example/pedersen", 2)?;
    let map = OwnershipMap::contiguous(2, 2)?;
    let u = [Scalar::from(3u64), Scalar::from(5u64)];
    let parts = [Scalar::from(1u64), Scalar::from(2u64)];
    let direct = commit(&ck, &u, &Opening(parts[0] + parts[1]))?;

    let preps = deal(
        2,
        &DealerRequest {
            input_masks: 3,
            ..Default::default()
        },
        &mut ChaCha20Rng::seed_from_u64(1),
    )?;
    let results = run_in_memory(preps, 1, |p| {
        let me = p.id();
        let before = p.stats();
        let cts = cts_commit(p, &ck, &map, &[u[me]], &Opening(parts[me]))?;
        let cts_msgs = (p.stats() - before).messages_sent;
        let shares = [
            p.share_input(0, (me == 0).then_some(u[0]))?,
            p.share_input(1, (me == 1).then_some(u[1]))?,
        ];
        let o = p.share_input(0, (me == 0).then_some(parts[0] + parts[1]))?;
        let stc = stc_commit(p, &ck, &shares, &o)?;
        Ok((cts, stc, cts_msgs))
    });
    for (i, r) in results.into_iter().enumerate() {
        let (cts, stc, msgs) = r?;
        println!(
            "party {i}: CtS == direct: {}, StC == direct: {}, CtS messages sent: {msgs}",
            cts == direct,
            stc == direct
        );
    }
    println!(
        "opens to (3, 5) with o = 3: {}",
        ver_commit(&ck, &direct, &u, &Opening(Scalar::from(3u64)))
    );
    Ok(())
}
