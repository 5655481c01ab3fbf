//! End-to-end pipeline: generate a model, round-trip it through the file
//! format, classify, solve for the endemic state and confirm it against the
//! simulated attractor.

use simplicial_sis::analysis::{beta2_bistable_threshold, classify_theory, Domain};
use simplicial_sis::equilibrium::{endemic_iterate, local_stability, DomainHint, Stability};
use simplicial_sis::generate::binary_template;
use simplicial_sis::model::StateVector;
use simplicial_sis::modelfile::{load_model, parse_model, save_model, LoadedModel};
use simplicial_sis::sim::{probe_basin, IntegratorConfig, ProbeVerdict};
use simplicial_sis::SisTemplate64;

#[test]
fn generated_model_roundtrips_and_agrees_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let tpl: SisTemplate64 = binary_template(5, 0.45, 1234, 2.0).unwrap();
    let rho = tpl.gamma_inv_a().spectral_radius(1e-12).unwrap();
    let beta1 = 0.7 / rho;
    let hat = beta2_bistable_threshold(&tpl, beta1).unwrap().unwrap();
    let m = tpl.instantiate(beta1, hat * 1.1).unwrap();
    assert_eq!(classify_theory(&m).unwrap().domain, Domain::Bistable);

    // Through the file format and back.
    let path = dir.path().join("model.json");
    save_model(&m, &path).unwrap();
    let LoadedModel::Simplicial(reloaded) = load_model::<f64>(&path).unwrap() else {
        panic!("expected simplicial model");
    };
    let x = StateVector::new(vec![0.3, 0.9, 0.1, 0.6, 0.5]).unwrap();
    assert_eq!(m.vector_field(&x), reloaded.vector_field(&x));

    // Solve for the endemic state and check it is the simulated attractor.
    let (res, _) = endemic_iterate(&reloaded, DomainHint::Bistable, 1e-12, 500_000).unwrap();
    assert!(res.converged);
    assert_eq!(
        local_stability(&reloaded, &res.xstar).unwrap(),
        Stability::ExponentiallyStable
    );
    let cfg = IntegratorConfig {
        t_end: 400.0,
        ..IntegratorConfig::default()
    };
    let probe = probe_basin(&reloaded, &StateVector::ones(5), &cfg).unwrap();
    let ProbeVerdict::Endemic(attractor) = probe.verdict else {
        panic!("persistent probe settles");
    };
    assert!(attractor.sup_distance(&res.xstar) <= 1e-7);

    // The near-origin probe dies: this really is the bistable regime.
    let low = probe_basin(&reloaded, &StateVector::new(vec![1e-3; 5]).unwrap(), &cfg).unwrap();
    assert!(matches!(low.verdict, ProbeVerdict::Extinct));
}

#[test]
fn crate_is_usable_in_single_precision() {
    let text = r#"{
        "n": 2,
        "gamma": [1.0, 1.0],
        "A": [[0, 1], [1, 0]],
        "B": [[[1, 1], [1, 1]], [[1, 1], [1, 1]]],
        "beta1": 0.5,
        "beta2": 1.0
    }"#;
    let LoadedModel::Simplicial(m) = parse_model::<f32>(text).unwrap() else {
        panic!()
    };
    let c = classify_theory(&m).unwrap();
    assert_eq!(c.domain, Domain::Bistable);
    let (res, _) = endemic_iterate(&m, DomainHint::Bistable, 1e-5, 100_000).unwrap();
    assert!(res.converged);
    let expected = (7.0 + 17.0f32.sqrt()) / 16.0;
    for &v in res.xstar.as_slice() {
        assert!((v - expected).abs() < 1e-4);
    }
}
