use ler_core::circuit::parse_circuit;
use ler_core::qepg::{FaultSet, Pauli, Qepg};
use ler_oracles::random_circuit::RandomCircuit;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};

fn compile(c: &RandomCircuit) -> Qepg {
    let circuit = parse_circuit(&c.to_text()).expect("oracle text parses");
    assert_eq!(circuit.num_fault_locations(), c.locations().len());
    assert_eq!(circuit.detectors().len(), c.detectors.len());
    Qepg::compile(&circuit)
}

#[test]
fn random_circuits_match_tableau() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut flipped, mut obs_flipped) = (0, 0);
    for _ in 0..20 {
        let c = RandomCircuit::generate(&mut rng, 10, 40);
        let g = compile(&c);
        let n = c.locations().len();
        for _ in 0..100 {
            let w = rng.gen_range(0..=n.min(6));
            let faults: Vec<(usize, u8)> = sample(&mut rng, n, w)
                .into_iter()
                .map(|l| (l, rng.gen_range(0..3u8)))
                .collect();
            let set = FaultSet::new(
                faults
                    .iter()
                    .map(|&(l, p)| (l, Pauli::from_index(p as usize)))
                    .collect(),
            )
            .unwrap();
            let got = g.evaluate(&set).unwrap();
            let (det, obs) = c.flips(&faults);
            assert_eq!(
                got.syndrome.to_bools(),
                det,
                "circuit:\n{}\nfaults {faults:?}",
                c.to_text()
            );
            assert_eq!(got.observable_flips.to_bools(), obs);
            flipped += usize::from(det.iter().any(|&b| b));
            obs_flipped += usize::from(obs.iter().any(|&b| b));
        }
    }
    // Guard against a vacuous comparison.
    assert!(flipped > 500 && obs_flipped > 100, "{flipped} {obs_flipped}");
}

#[test]
fn binary_dump_round_trips_compiled_table() {
    let mut rng = StdRng::seed_from_u64(11);
    let c = RandomCircuit::generate(&mut rng, 8, 40);
    let g = compile(&c);
    let mut buf = Vec::new();
    g.write_to(&mut buf).unwrap();
    assert_eq!(Qepg::read_from(buf.as_slice()).unwrap(), g);
    buf.push(0);
    assert!(Qepg::read_from(buf.as_slice()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Flips of a disjoint union are the XOR of the parts.
    #[test]
    fn evaluation_is_linear(seed in any::<u64>(), split in 0usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = RandomCircuit::generate(&mut rng, 6, 30);
        let g = compile(&c);
        let n = c.locations().len();
        let w = n.min(6);
        let all: Vec<(usize, Pauli)> = sample(&mut rng, n, w)
            .into_iter()
            .map(|l| (l, Pauli::from_index(rng.gen_range(0..3))))
            .collect();
        let k = split.min(w);
        let a = g.evaluate(&FaultSet::new(all[..k].to_vec()).unwrap()).unwrap();
        let b = g.evaluate(&FaultSet::new(all[k..].to_vec()).unwrap()).unwrap();
        let ab = g.evaluate(&FaultSet::new(all.clone()).unwrap()).unwrap();
        let xor = |x: &[bool], y: &[bool]| -> Vec<bool> { x.iter().zip(y).map(|(p, q)| p ^ q).collect() };
        prop_assert_eq!(ab.syndrome.to_bools(), xor(&a.syndrome.to_bools(), &b.syndrome.to_bools()));
        prop_assert_eq!(ab.observable_flips.to_bools(), xor(&a.observable_flips.to_bools(), &b.observable_flips.to_bools()));
    }

    /// Y rows are the XOR of X and Z rows.
    #[test]
    fn y_row_is_x_xor_z(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = RandomCircuit::generate(&mut rng, 6, 30);
        let g = compile(&c);
        for l in 0..g.num_locations() {
            let x = g.row(l, Pauli::X);
            let z = g.row(l, Pauli::Z);
            let y: Vec<u64> = x.iter().zip(z).map(|(a, b)| a ^ b).collect();
            prop_assert_eq!(g.row(l, Pauli::Y), y.as_slice());
        }
    }
}
