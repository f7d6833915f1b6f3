use dynabench::bench::{Family, FamilyParams, GeneratedBenchmark, IdealReference};
use dynabench::circuit::{layer_schedule, strip_final_measurements, Gate, Instruction};
use dynabench::scoring::{evaluate, DfeConfig};
use dynabench::sim::{self, Letter, NoiseModel};

fn generate(f: Family, n: usize) -> GeneratedBenchmark {
    f.spec(n, &FamilyParams::default(), 1)
        .unwrap()
        .generate()
        .unwrap()
}

fn mid_circuit_measurements(b: &GeneratedBenchmark) -> usize {
    strip_final_measurements(&b.circuit)
        .instructions()
        .iter()
        .filter(|i| matches!(i, Instruction::Measure { .. }))
        .count()
}

const SIZES: [(Family, [usize; 2]); 13] = [
    (Family::Ghz, [3, 9]),
    (Family::GhzReset, [3, 10]),
    (Family::LrCnot, [4, 13]),
    (Family::LrCnotSparse, [5, 14]),
    (Family::CnotLadder, [3, 11]),
    (Family::Fanout, [5, 13]),
    (Family::QftM, [2, 7]),
    (Family::PartialQftM, [2, 7]),
    (Family::Ipe, [2, 2]),
    (Family::Tfim, [5, 9]),
    (Family::RepCode, [5, 9]),
    (Family::FiveQubitCode, [11, 11]),
    (Family::SteaneCode, [14, 14]),
];

#[test]
fn noiseless_runs_score_one() {
    let dfe = DfeConfig { k: 12, shots: 256 };
    for (f, sizes) in SIZES {
        for n in sizes {
            let b = generate(f, n);
            let r = evaluate(&b, 1024, &dfe, &NoiseModel::noiseless(), 3).unwrap();
            // TFIM compares sampled magnetization, so shot noise shows up.
            let floor = if f == Family::Tfim { 0.98 } else { 0.999 };
            assert!(r.score >= floor, "{f} n={n}: {}", r.score);
        }
    }
}

#[test]
fn every_conditional_has_a_branch_probability() {
    for (f, sizes) in SIZES {
        for n in sizes {
            let b = generate(f, n);
            assert!(b.branch_model.covers(&b.circuit), "{f} n={n}");
            assert_eq!(b.circuit.num_qubits(), n, "{f}");
            assert!(b.spec.advisory().is_none());
        }
    }
}

#[test]
fn ghz_register_holds_only_uniform_strings() {
    let b = generate(Family::Ghz, 7);
    let IdealReference::Distribution { clbits, .. } = &b.reference else {
        panic!()
    };
    let counts = sim::run(&b.circuit, 2000, &NoiseModel::noiseless(), 5).unwrap();
    let d = counts.distribution().marginal(clbits).unwrap();
    let support: Vec<&str> = d.iter().map(|(k, _)| k).collect();
    assert_eq!(support, ["0000", "1111"]);
}

#[test]
fn base_depth_is_size_independent() {
    let cases = [
        (Family::Ghz, [5, 11, 21]),
        (Family::LrCnot, [6, 10, 20]),
        (Family::LrCnotSparse, [5, 11, 20]),
        (Family::CnotLadder, [5, 11, 21]),
        (Family::Fanout, [5, 11, 21]),
    ];
    for (f, sizes) in cases {
        let depths: Vec<usize> = sizes
            .iter()
            .map(|&n| layer_schedule(&generate(f, n).circuit, false).base_depth)
            .collect();
        assert!(depths.windows(2).all(|w| w[0] == w[1]), "{f}: {depths:?}");
    }
}

#[test]
fn measurement_counts() {
    assert_eq!(mid_circuit_measurements(&generate(Family::LrCnot, 4)), 2);
    assert!(
        mid_circuit_measurements(&generate(Family::LrCnotSparse, 8))
            < mid_circuit_measurements(&generate(Family::LrCnot, 8))
    );
    assert_eq!(mid_circuit_measurements(&generate(Family::QftM, 4)), 3);
    assert_eq!(
        mid_circuit_measurements(&generate(Family::PartialQftM, 4)),
        2
    );
    assert_eq!(mid_circuit_measurements(&generate(Family::Ghz, 7)), 3);
    assert_eq!(mid_circuit_measurements(&generate(Family::Ipe, 2)), 2);
}

#[test]
fn ipe_reads_theta() {
    let b = Family::Ipe
        .spec(
            2,
            &FamilyParams {
                theta: Some(0.8125),
                m_bits: Some(4),
                ..Default::default()
            },
            0,
        )
        .unwrap()
        .generate()
        .unwrap();
    let counts = sim::run(&b.circuit, 200, &NoiseModel::noiseless(), 0).unwrap();
    assert_eq!(counts.register.keys().collect::<Vec<_>>(), ["1101"]);
}

/// Insert each correctable error right after encoding; the noiseless run
/// must still read out the prepared logical state on every shot.
#[test]
fn injected_errors_are_corrected() {
    for (f, n) in [
        (Family::RepCode, 5),
        (Family::RepCode, 9),
        (Family::FiveQubitCode, 11),
        (Family::SteaneCode, 14),
    ] {
        let b = generate(f, n);
        let IdealReference::Qec(layout) = &b.reference else {
            panic!()
        };
        let errors = layout.tables.correctable_errors();
        let expected = match f {
            Family::RepCode => n.div_ceil(2),
            Family::FiveQubitCode => 15,
            _ => 21,
        };
        assert_eq!(errors.len(), expected, "{f}");
        for e in errors {
            let mut insts = b.circuit.instructions().to_vec();
            let gates: Vec<Instruction> = e
                .support()
                .into_iter()
                .map(|q| {
                    let g = match e.letter(q) {
                        Letter::X => Gate::X,
                        Letter::Y => Gate::Y,
                        _ => Gate::Z,
                    };
                    Instruction::gate(g, &[layout.data[q]])
                })
                .collect();
            insts.splice(layout.encode_len..layout.encode_len, gates);
            let c = b.circuit.with_instructions(insts).unwrap();
            let counts = sim::run(&c, 64, &NoiseModel::noiseless(), 9).unwrap();
            for k in counts.register.keys() {
                let bits: Vec<bool> = k.chars().map(|ch| ch == '1').collect();
                assert!(layout.shot_ok(&bits), "{f}: error {e} gives {k}");
            }
        }
    }
}
