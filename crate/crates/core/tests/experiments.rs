use cqec_core::bench_states::Algorithm;
use cqec_core::experiment::*;
use cqec_core::noise::NoiseSpec;
use cqec_core::recovery::CatalystSource;

fn cfg(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig::new(kind, 3)
}

#[test]
fn defaults_are_filled_in() {
    let t = cfg(ExperimentKind::Threshold).resolve().unwrap();
    assert_eq!(t.points, Some(30));
    assert_eq!(t.ansatz_depth, Some(2));
    assert_eq!(t.polish_iter, Some(DEFAULT_POLISH));
    let n = cfg(ExperimentKind::NoiseSweep).resolve().unwrap();
    assert_eq!(n.points, Some(20));
    assert_eq!(n.sweep_noise, Some(SweepNoise::Dephasing));
    assert_eq!(n.catalyst, Some(CatalystSource::Variational));
    let d = cfg(ExperimentKind::Durability).resolve().unwrap();
    assert_eq!(d.cycles, Some(100));
    assert!(matches!(d.noise, Some(NoiseSpec::DephasingDepolarizing { .. })));
    let mut big = cfg(ExperimentKind::Protocol);
    big.algorithm = Some(Algorithm::CfQpe);
    assert_eq!(big.resolve().unwrap().polish_iter, Some(0));
    // options an experiment ignores are dropped
    let mut s = cfg(ExperimentKind::Scaling);
    s.cycles = Some(4);
    s.algorithm = Some(Algorithm::Qkan);
    assert_eq!(s.resolve().unwrap(), cfg(ExperimentKind::Scaling));
}

#[test]
fn bad_configs_are_config_errors() {
    let bad = [
        ExperimentConfig { ansatz_depth: Some(4), ..cfg(ExperimentKind::Protocol) },
        ExperimentConfig { ansatz_depth: Some(0), ..cfg(ExperimentKind::Threshold) },
        ExperimentConfig { points: Some(0), ..cfg(ExperimentKind::NoiseSweep) },
        ExperimentConfig { cycles: Some(0), ..cfg(ExperimentKind::Durability) },
        ExperimentConfig { dims: Some(vec![6]), ..cfg(ExperimentKind::CatalystPrep) },
        ExperimentConfig { dims: Some(vec![]), ..cfg(ExperimentKind::CatalystPrep) },
        ExperimentConfig { max_rounds: Some(0), ..cfg(ExperimentKind::PipelineCompare) },
        ExperimentConfig { noise: Some(NoiseSpec::Depolarizing { p: 1.5 }), ..cfg(ExperimentKind::Protocol) },
    ];
    for c in bad {
        assert!(matches!(run(&c), Err(cqec_core::CqecError::Config(_))), "{c:?}");
    }
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"scaling","seed":1,"colour":2}"#).is_err());
}

#[test]
fn config_json_round_trip() {
    let c = ExperimentConfig {
        algorithm: Some(Algorithm::QDrift),
        noise: Some(NoiseSpec::Dephasing { gamma: 0.5 }),
        ..cfg(ExperimentKind::Protocol)
    };
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
}

#[test]
fn threshold_grid_endpoints() {
    let r = run(&ExperimentConfig { points: Some(4), ..cfg(ExperimentKind::Threshold) }).unwrap();
    assert_eq!(r.rows.len(), 5);
    let eps = r.column_f64("epsilon");
    assert_eq!(eps[0], Some(0.0));
    assert_eq!(eps[1], Some(1e-10));
    assert_eq!(eps[4], Some(0.25));
    assert!(eps.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn oversized_recovery_is_a_partial_failure() {
    let r = run(&ExperimentConfig { algorithm: Some(Algorithm::Regev), ..cfg(ExperimentKind::Protocol) }).unwrap();
    assert!(r.is_partial());
    assert_eq!(r.failures.len(), 1);
    assert!(r.failures[0].message.contains("64"), "{}", r.failures[0].message);
    assert_eq!(r.rows.len(), 1);
}

#[test]
fn table_experiments_have_fixed_shapes() {
    let scaling = run(&cfg(ExperimentKind::Scaling)).unwrap();
    assert_eq!(scaling.rows.len(), 4);
    let dd = run(&cfg(ExperimentKind::DdSweep)).unwrap();
    assert_eq!(dd.rows.len(), 5);
    let pc = run(&ExperimentConfig { max_rounds: Some(3), ..cfg(ExperimentKind::PipelineCompare) }).unwrap();
    assert_eq!(pc.rows.len(), 4);
    for r in [&scaling, &dd, &pc] {
        assert!(!r.is_partial());
        assert!(r.rows.iter().all(|row| row.keys().eq(r.columns.iter())));
    }
}

#[test]
fn sealed_results_serialize_canonically() {
    let mut r = run(&cfg(ExperimentKind::Scaling)).unwrap();
    r.seal().unwrap();
    let hash = r.content_hash.clone().unwrap();
    assert!(hash.starts_with("sha256:") && hash.len() == 7 + 64);
    let text = canonical_json(&serde_json::to_value(&r).unwrap()).unwrap();
    assert!(text.contains(&format!("\"schema_version\": \"{SCHEMA_VERSION}\"")));
    let back: ExperimentResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    let mut again = back.clone();
    again.seal().unwrap();
    assert_eq!(again.content_hash, Some(hash));

    let csv = to_csv(&r.columns, &r.rows).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), r.columns.join(","));
    assert_eq!(lines.count(), r.rows.len());
}

#[test]
fn floats_carry_seventeen_digits() {
    for x in [0.1, 1.0 / 3.0, 2.0631112001855074, 1e-300, -7.5e10] {
        let s = fmt_number(x);
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{s}");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}

proptest::proptest! {
    #[test]
    fn json_floats_round_trip(bits in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let v = serde_json::json!({ "x": bits });
        let text = canonical_json(&v).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        proptest::prop_assert_eq!(back["x"].as_f64().unwrap().to_bits(), bits.to_bits());
    }
}
