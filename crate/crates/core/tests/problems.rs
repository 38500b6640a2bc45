use std::io::Write;

use drmoo_core::problems::*;
use drmoo_core::{Error, LossKind};

const HEADER: &str = "\"fixed acidity\";\"volatile acidity\";\"citric acid\";\"residual sugar\";\"chlorides\";\"free sulfur dioxide\";\"total sulfur dioxide\";\"density\";\"pH\";\"sulphates\";\"alcohol\";\"quality\"";

fn wine_rows() -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for k in 0..10 {
        let k = k as f64;
        s.push_str(&format!(
            "{};0.27;0.36;{};0.045;45;170;1.001;3;0.45;{};{}\n",
            7.0 + 0.1 * k,
            1.0 + k,
            9.0 + 0.3 * k,
            3 + (k as i64 % 5)
        ));
    }
    s
}

#[test]
fn wine_file_round_trip() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(wine_rows().as_bytes()).unwrap();
    let p = load_wine_tasks(f.path(), WineThresholds::default()).unwrap();
    assert_eq!(p.num_objectives(), 3);
    assert_eq!(p.loss_kind(), LossKind::BinaryCrossEntropy);
    // Nine non-label columns plus a bias.
    assert_eq!(p.dim(), 10);
    assert_eq!(p.dataset_size(0), 10);
    let sugar = &p.task(1).labels;
    // 80% quantile of 1..=10 is 8.
    assert_eq!(sugar.iter().sum::<f64>(), 3.0);
    let alcohol = &p.task(2).labels;
    assert_eq!(alcohol.iter().sum::<f64>(), 10.0);
    let x = &p.task(0).features;
    let col0: Vec<f64> = (0..10).map(|r| x.row(r)[0]).collect();
    assert!(col0.iter().sum::<f64>().abs() < 1e-9);
    assert!((0..10).all(|r| x.row(r)[9] == 1.0));
}

fn parse(text: &str) -> Result<MultiTaskProblem, Error> {
    parse_wine(text.as_bytes(), "inline", WineThresholds::default())
}

#[test]
fn wine_errors_carry_line_numbers() {
    let mut bad = wine_rows();
    bad.push_str("1;2;3\n");
    match parse(&bad) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 12),
        other => panic!("expected parse error, got {other:?}"),
    }
    let bad = wine_rows().replacen("0.27", "abc", 1);
    assert!(matches!(parse(&bad), Err(Error::Parse { line: 2, .. })));
    let bad = wine_rows().replacen("\"pH\"", "\"ph level\"", 1);
    assert!(matches!(parse(&bad), Err(Error::Parse { line: 1, .. })));
    assert!(parse(HEADER).is_err());
    assert!(load_wine_tasks(std::path::Path::new("/nonexistent/wine.csv"), WineThresholds::default()).is_err());
}

#[test]
fn linear_noise_and_anchor_statistics() {
    let inst = gen_linear(&LinearSpec::standard(21)).unwrap();
    for (eps, sd) in inst.noise.iter().zip([0.2, 0.6, 0.5]) {
        let n = eps.len() as f64;
        let var = eps.iter().map(|e| e * e).sum::<f64>() / n;
        assert!((var / (sd * sd) - 1.0).abs() < 0.1, "var={var}");
    }
    assert_eq!(inst.anchors.len(), 3);
    assert!(inst.anchors.iter().all(|a| a.len() == 10));
}

#[test]
fn logistic_loss_is_convex_along_lines() {
    let p = gen_logistic(&LinearSpec {
        samples: 50,
        ..LinearSpec::standard(3)
    })
    .unwrap();
    let a: Vec<f64> = (0..10).map(|k| 0.3 * k as f64 - 1.0).collect();
    let b: Vec<f64> = (0..10).map(|k| 1.0 - 0.2 * k as f64).collect();
    for j in 0..50 {
        for s in [0.1, 0.25, 0.5, 0.8] {
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (1.0 - s) * x + s * y).collect();
            let lhs = p.sample_loss(0, j, &mid);
            let rhs = (1.0 - s) * p.sample_loss(0, j, &a) + s * p.sample_loss(0, j, &b);
            assert!(lhs <= rhs + 1e-12);
        }
    }
}

#[test]
fn logistic_is_stable_for_large_margins() {
    let p = gen_logistic(&LinearSpec {
        samples: 20,
        ..LinearSpec::standard(3)
    })
    .unwrap();
    let theta = vec![500.0; 10];
    let mut g = vec![0.0; 10];
    for j in 0..20 {
        let l = p.sample_loss_grad(1, j, &theta, &mut g);
        assert!(l.is_finite() && l >= 0.0);
        assert!(g.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn robust_toy_frontier_shifts_with_noise() {
    let grid = linspace(-1.0, 3.0, 41);
    let spec = ToySpec::nominal(0.5, grid).unwrap();
    let f = drmoo_core::metrics::robust_frontier(&spec, 100, 1.0, 0).unwrap();
    assert_ne!(f.nominal, f.robust);
    // The nominal frontier of two parabolas is the segment between the anchors.
    assert!(f.nominal.iter().all(|p| (0.0..=2.0).contains(&p.theta[0])));
}
