use std::collections::BTreeMap;

use dynabench::bench::{Family, FamilyParams, GeneratedBenchmark, IdealReference};
use dynabench::scoring::{
    dfe_clifford_score, dfe_experiment, evaluate, qec_score, qft_score, DfeConfig, ScoreError,
};
use dynabench::sim::{self, NoiseModel, PauliString};

fn generate(f: Family, n: usize) -> GeneratedBenchmark {
    f.spec(n, &FamilyParams::default(), 1)
        .unwrap()
        .generate()
        .unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[test]
fn identity_pauli_reads_one_even_under_noise() {
    let b = generate(Family::Fanout, 5);
    let e = dfe_experiment(&b, &PauliString::identity(3), 200).unwrap();
    let counts = sim::run(&e.circuit, 200, &NoiseModel::new(0.2, 0.2, 0.1), 4).unwrap();
    assert_eq!(e.value(&counts).unwrap(), 1.0);
}

#[test]
fn noiseless_ladder_dfe() {
    let b = generate(Family::CnotLadder, 3);
    let r = dfe_clifford_score(
        &b,
        &DfeConfig { k: 30, shots: 1024 },
        &NoiseModel::noiseless(),
        11,
    )
    .unwrap();
    assert!(r.score >= 0.99, "{}", r.score);
    assert!(r.details.keys().all(|k| k.starts_with("pauli:")));
    let ghz = generate(Family::Ghz, 3);
    assert!(matches!(
        dfe_clifford_score(&ghz, &DfeConfig::default(), &NoiseModel::noiseless(), 0),
        Err(ScoreError::NotClifford(Family::Ghz))
    ));
}

#[test]
fn two_qubit_noise_lowers_fanout_score() {
    let b = generate(Family::Fanout, 5);
    let cfg = DfeConfig { k: 30, shots: 256 };
    let noisy = NoiseModel {
        p2: 0.05,
        ..NoiseModel::noiseless()
    };
    let clean: Vec<f64> = (0..10)
        .map(|s| {
            dfe_clifford_score(&b, &cfg, &NoiseModel::noiseless(), s)
                .unwrap()
                .score
        })
        .collect();
    let dirty: Vec<f64> = (0..10)
        .map(|s| dfe_clifford_score(&b, &cfg, &noisy, s).unwrap().score)
        .collect();
    assert!(median(dirty) < median(clean));
}

#[test]
fn qft_examples() {
    let clean = qft_score(Family::QftM, 4, 1024, &NoiseModel::noiseless(), 2).unwrap();
    assert!(clean.score >= 0.99);
    assert_eq!(clean.details.len(), 3);

    // Every recorded bit flips: the first readout is always the complement.
    let flipped = NoiseModel {
        pm: 1.0,
        ..NoiseModel::noiseless()
    };
    assert_eq!(
        qft_score(Family::QftM, 2, 512, &flipped, 2).unwrap().score,
        0.0
    );

    let zeros = Family::QftM
        .spec(
            2,
            &FamilyParams {
                s: Some("00".into()),
                ..Default::default()
            },
            0,
        )
        .unwrap()
        .generate()
        .unwrap();
    let counts = sim::run(&zeros.circuit, 256, &NoiseModel::noiseless(), 0).unwrap();
    assert_eq!(counts.register.keys().collect::<Vec<_>>(), ["00"]);
    assert!(qft_score(Family::Ghz, 3, 10, &NoiseModel::noiseless(), 0).is_err());
}

#[test]
fn qec_counting() {
    let b = generate(Family::RepCode, 5);
    let IdealReference::Qec(layout) = &b.reference else {
        panic!()
    };
    let counts = sim::run(&b.circuit, 16, &NoiseModel::noiseless(), 0).unwrap();
    let clean = counts.register.keys().next().unwrap().clone();
    assert_eq!(qec_score(&counts.register, layout).unwrap().score, 1.0);

    // Flip one data readout: the ZZ readout checks fail.
    let mut broken: Vec<char> = clean.chars().collect();
    let c = layout.data_clbits[0];
    broken[c] = if broken[c] == '1' { '0' } else { '1' };
    let broken: String = broken.into_iter().collect();
    let mixed = BTreeMap::from([(clean.clone(), 3u64), (broken, 1)]);
    let r = qec_score(&mixed, layout).unwrap();
    assert_eq!(r.score, 0.75);
    assert!(r.details.keys().any(|k| k.starts_with("syndrome:")));

    assert!(matches!(
        qec_score(&BTreeMap::from([("01".to_string(), 1)]), layout),
        Err(ScoreError::Malformed(_))
    ));
}

/// Median score over seeds must not rise with two-qubit error rate; one
/// inversion per family is tolerated for sampling noise.
#[test]
fn scores_fall_with_two_qubit_noise() {
    let rates = [0.0, 1e-3, 5e-3, 2e-2];
    let cfg = DfeConfig { k: 8, shots: 128 };
    let cases = [
        (Family::Ghz, 5),
        (Family::GhzReset, 5),
        (Family::LrCnot, 6),
        (Family::LrCnotSparse, 7),
        (Family::CnotLadder, 5),
        (Family::Fanout, 7),
        (Family::QftM, 4),
        (Family::PartialQftM, 4),
        (Family::Ipe, 2),
        (Family::Tfim, 5),
        (Family::RepCode, 5),
        (Family::FiveQubitCode, 11),
        (Family::SteaneCode, 14),
    ];
    for (f, n) in cases {
        let b = generate(f, n);
        let medians: Vec<f64> = rates
            .iter()
            .map(|&p2| {
                let nm = NoiseModel {
                    p2,
                    ..NoiseModel::noiseless()
                };
                median(
                    (0..10)
                        .map(|s| evaluate(&b, 256, &cfg, &nm, s).unwrap().score)
                        .collect(),
                )
            })
            .collect();
        let inversions = medians.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
        assert!(inversions <= 1, "{f}: {medians:?}");
        assert!(medians.iter().all(|m| (0.0..=1.0).contains(m)));
        if b.circuit
            .instructions()
            .iter()
            .any(|i| i.is_two_qubit_gate())
        {
            assert!(medians[3] < medians[0], "{f}: {medians:?}");
        }
    }
}
