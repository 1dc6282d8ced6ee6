use qpath_core::oracle::{make_oracle, Coefficients, NamedCoefficients};
use qpath_core::qae::{repetition_rng, QsumConfig};
use qpath_core::{
    grid, integrate, monte_carlo, predict_resources, qsum, EigenSpectrum, Integrand, Method, PipelineConfig, QaeMode,
    SmoothnessClass, SumSource,
};

fn setup() -> (EigenSpectrum, SmoothnessClass, Integrand) {
    (
        EigenSpectrum::Wiener,
        SmoothnessClass::new(2, vec![1.0, 1.0, 1.0]).unwrap(),
        Integrand::cosine(Coefficients::Named(NamedCoefficients::WienerMean)),
    )
}

#[test]
fn estimators_share_one_grid_mean() {
    let (spec, _, f) = setup();
    let g = grid::build_grid(&spec, 2, 49).unwrap();
    let oracle = make_oracle(&g, &f, 1.0).unwrap();
    let exact = oracle.classical_mean(grid::DEFAULT_ENUMERATION_CAP).unwrap();
    assert_eq!(oracle.queries(), 2401);
    assert!((exact - oracle.exact_mean().unwrap()).abs() < 1e-13);

    oracle.reset_queries();
    let mc = monte_carlo(&oracle, 40_000, &mut repetition_rng(3, 0)).unwrap();
    assert_eq!(oracle.queries(), 40_000);
    assert!((mc - exact).abs() < 0.02);

    let q = qsum(SumSource::Oracle(&oracle), &QsumConfig::new(0.02, 5, QaeMode::AnalyticDistribution, 3)).unwrap();
    assert!((q.estimate - exact).abs() <= 0.02);
    // Simulation reads summands without touching the classical counter.
    assert_eq!(oracle.queries(), 40_000);
}

#[test]
fn pipeline_agrees_with_prediction_shape() {
    let (spec, cls, f) = setup();
    let row = predict_resources(&spec, &cls, 1.0, 0.2, 0.5).unwrap();
    let report = integrate(&PipelineConfig::new(0.2, Method::QuantumAnalytic, 0).with_splits(0.1, 0.05, 0.05), &spec, &cls, &f).unwrap();
    assert_eq!((report.d, report.m), (row.d, row.m));
    assert!(report.observed_error.unwrap() <= 0.2);
}
