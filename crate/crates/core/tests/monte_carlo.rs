use edgelaw::mc::{elliptic_law_check, run_experiment, CdfTable, McConfig, Reference};

#[test]
fn gue_edge_mean_matches_tracy_widom() {
    let mut cfg = McConfig::new(200, 1.0, 2000, 2024);
    cfg.reference = Reference::TracyWidom;
    let run = run_experiment(&cfg).unwrap();
    let reference = CdfTable::f_sigma(0.0).unwrap().mean();
    assert!((reference + 1.771_086_8).abs() < 1e-5, "{reference}");
    assert!((run.summary.mean - reference).abs() <= 0.15, "{}", run.summary.mean);
    assert!(run.summary.ks.unwrap() <= 0.08);
}

#[test]
fn elliptic_containment() {
    assert!(elliptic_law_check(200, 0.0, 20, 7).unwrap() >= 0.99);
    assert!(elliptic_law_check(200, 0.75, 20, 7).unwrap() >= 0.98);
    let f = elliptic_law_check(64, 1.0, 4, 7).unwrap();
    assert!(f <= 1.0 && f >= 0.98);
}

// Without the weak-regime centering constants the GUE edge coordinate drifts
// left by roughly sigma^2 n^{1/3} / 2 to sigma^2 n^{1/3}, so the sampled
// quartiles sit below both the sigma = 0 and sigma = 2 curves.
#[test]
fn weak_regime_uncentered_quartiles_sit_left() {
    let n = 512usize;
    let tau = 1.0 - (n as f64).powf(-1.0 / 3.0);
    let run = run_experiment(&McConfig::new(n, tau, 100, 5)).unwrap();
    let mut s = run.samples.clone();
    s.sort_by(|a, b| a.total_cmp(b));
    let f0 = CdfTable::f_sigma(0.0).unwrap();
    let f2 = CdfTable::f_sigma(2.0).unwrap();
    for p in [0.25, 0.5, 0.75] {
        let q = s[(p * s.len() as f64) as usize];
        assert!(f0.cdf(q) < p && f2.cdf(q) < p, "quantile {p}: {q}");
        assert!((-16.0..=-4.0).contains(&q), "{q}");
    }
}
