use ler_core::circuit::{
    enumerate_fault_locations, generate_code, parse_circuit, CodeFamily, CodeSpec, GenerateError, ParseError,
};
use ler_core::Qepg;
use proptest::prelude::*;

#[test]
fn reference_location_counts() {
    let rep = generate_code(CodeSpec::new(CodeFamily::Repetition, 3)).unwrap();
    assert_eq!(rep.num_fault_locations(), 11);
    assert_eq!(rep.detectors().len(), 2);
    assert_eq!(rep.observables().len(), 1);

    let s7 = generate_code(CodeSpec::new(CodeFamily::Surface, 7)).unwrap();
    assert_eq!(s7.num_qubits(), 97);
    assert_eq!(s7.num_fault_locations(), 9121);
    assert_eq!(s7.detectors().len(), 1008);
    assert_eq!(enumerate_fault_locations(&s7).len(), 9121);
}

#[test]
fn generator_rejects_bad_specs() {
    assert_eq!(
        generate_code(CodeSpec::new(CodeFamily::Surface, 4)).unwrap_err(),
        GenerateError::UnsupportedDistance(4)
    );
    assert_eq!(
        generate_code(CodeSpec::new(CodeFamily::Surface, 3).with_rounds(0)).unwrap_err(),
        GenerateError::ZeroRounds
    );
}

#[test]
fn parser_reports_line_numbers() {
    assert!(matches!(
        parse_circuit("H 0\nFOO 1\n"),
        Err(ParseError::UnknownInstruction { line: 2, .. })
    ));
    assert!(matches!(
        parse_circuit("M 0\nDETECTOR rec[-2]\n"),
        Err(ParseError::BadRecordReference { line: 2 })
    ));
    assert!(matches!(
        parse_circuit("CX 0\n"),
        Err(ParseError::ArityError { line: 1 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Serializing and re-parsing a generated circuit is lossless, and so is
    /// its compiled table.
    #[test]
    fn text_round_trip(surface in any::<bool>(), d in prop::sample::select(vec![3u32, 5]), rounds in 1u32..4) {
        let family = if surface { CodeFamily::Surface } else { CodeFamily::Repetition };
        let c = generate_code(CodeSpec::new(family, d).with_rounds(rounds)).unwrap();
        let back = parse_circuit(&c.to_text()).unwrap();
        prop_assert_eq!(Qepg::compile(&back), Qepg::compile(&c));
        prop_assert_eq!(back, c);
    }
}
