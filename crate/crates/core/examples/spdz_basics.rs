//! Three parties share two inputs, multiply them with a Beaver triple and open
//! the product; a tampered share is then caught by the MAC check.

use colcp::algebra::Scalar;
use colcp::mpc::{deal, run_in_memory, DealerRequest};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> colcp::Result<()> {
    let req = DealerRequest {
        triples: 1,
        input_masks: 2,
        ..Default::default()
    };
    let preps = deal(3, &req, &mut ChaCha20Rng::seed_from_u64(1))?;
    let results = run_in_memory(preps, 1, |p| {
        let x = p.share_input(0, (p.id() == 0).then(|| Scalar::from(6u64)))?;
        let y = p.share_input(1, (p.id() == 1).then(|| Scalar::from(7u64)))?;
        let z = p.mul(&x, &y)?;
        let opened = p.open(&z)?;
        Ok((opened, p.counters(), p.stats()))
    });
    for (i, r) in results.into_iter().enumerate() {
        let (z, counters, stats) = r?;
        println!(
            "party {i}: 6 * 7 = {z}  ({} multiplication, {} messages sent)",
            counters.multiplications, stats.messages_sent
        );
    }

    let preps = deal(
        2,
        &DealerRequest {
            input_masks: 1,
            ..Default::default()
        },
        &mut ChaCha20Rng::seed_from_u64(2),
    )?;
    let results = run_in_memory(preps, 2, |p| {
        let mut x = p.share_input(0, (p.id() == 0).then(|| Scalar::from(5u64)))?;
        if p.id() == 1 {
            x.value += Scalar::from(1u64);
        }
        p.open(&x)
    });
    for (i, r) in results.into_iter().enumerate() {
        println!("tampered open, party {i}: {:?}", r.err());
    }
    Ok(())
}
