use colcp::algebra::Scalar;
use colcp::circuit::{
    assign_collab, assign_plain, is_satisfied, less_than_pow2_circuit, odd_circuit, sample_circuit,
    Assignment,
};
use colcp::mpc::{deal, run_in_memory};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn satisfied(circuit: &colcp::circuit::Circuit, v: u64) -> bool {
    match assign_plain(circuit, &[Scalar::from(v)], &[Scalar::from(1u64)]) {
        Ok(asg) => is_satisfied(&circuit.cs, &asg),
        Err(_) => false,
    }
}

#[test]
fn four_bit_range_gadget_brute_force() {
    let c = less_than_pow2_circuit(4).unwrap();
    for v in 0..64u64 {
        assert_eq!(satisfied(&c, v), v < 16, "v={v}");
    }
}

#[test]
fn odd_gadget_brute_force() {
    let c = odd_circuit(8).unwrap();
    for v in 0..600u64 {
        assert_eq!(satisfied(&c, v), v % 2 == 1 && v < 512, "v={v}");
    }
}

/// Appends zero gates to an assignment.
fn pad(asg: &Assignment, n: usize) -> Assignment {
    let mut p = asg.clone();
    for v in [&mut p.a_l, &mut p.a_r, &mut p.a_o] {
        v.resize(n, Scalar::from(0u64));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collaborative_assignment_reconstructs_to_plain(gates in 1usize..24, m in 1usize..4, seed in any::<u64>(), n in 2usize..=3) {
        let circuit = sample_circuit(gates, m).unwrap();
        let v: Vec<Scalar> = (0..m as u64).map(|i| Scalar::from(seed.wrapping_add(i) >> 8)).collect();
        let gamma: Vec<Scalar> = (0..m as u64).map(|i| Scalar::from(i + 9)).collect();
        let plain = assign_plain(&circuit, &v, &gamma).unwrap();
        let mut req = circuit.assign_requirements();
        req.input_masks += 2 * m;
        let preps = deal(n, &req, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let out = run_in_memory(preps, seed, |p| {
            let own = p.id() == 0;
            let sv = p.share_inputs(0, own.then_some(&v[..]), m)?;
            let sg = p.share_inputs(0, own.then_some(&gamma[..]), m)?;
            let shared = assign_collab(p, &circuit, &sv, &sg)?;
            let a_l = p.open_batch(&shared.a_l)?;
            let a_r = p.open_batch(&shared.a_r)?;
            let a_o = p.open_batch(&shared.a_o)?;
            p.check_macs()?;
            Ok((a_l, a_r, a_o))
        });
        for r in out {
            let (a_l, a_r, a_o) = r.unwrap();
            prop_assert_eq!(&a_l, &plain.a_l);
            prop_assert_eq!(&a_r, &plain.a_r);
            prop_assert_eq!(&a_o, &plain.a_o);
        }
    }

    #[test]
    fn zero_gate_padding_keeps_satisfiability(v in 0u64..64, extra in 0usize..8) {
        let c = less_than_pow2_circuit(5).unwrap();
        let asg = assign_plain(&c, &[Scalar::from(v)], &[Scalar::from(3u64)]).unwrap();
        let before = is_satisfied(&c.cs, &asg);
        let mut cs = c.cs.clone();
        cs.n += extra;
        prop_assert_eq!(is_satisfied(&cs, &pad(&asg, cs.n)), before);
        prop_assert_eq!(before, v < 32);
    }
}
