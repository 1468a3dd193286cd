use std::f64::consts::PI;

use super::*;
use crate::coeff::{parse_field, ScalarField};

fn c35() -> f64 {
    (3.5 * PI).powi(2)
}

#[test]
fn interval_counts() {
    let d = interval_spectrum(c35(), 1.0, &IntervalBc::Dirichlet, 10).unwrap();
    assert_eq!(d.count_below(0.0), 3);
    let n = interval_spectrum(c35(), 1.0, &IntervalBc::Neumann, 10).unwrap();
    assert_eq!(n.count_below(0.0), 4);
    assert_eq!(n.eigenvalues[0], -c35());
    let free = interval_spectrum(0.0, 1.0, &IntervalBc::Dirichlet, 10).unwrap();
    assert!(free.eigenvalues.iter().all(|&l| l > 0.0));
    assert!(interval_spectrum(0.0, 0.0, &IntervalBc::Dirichlet, 3).is_err());
}

#[test]
fn robin_roots_solve_their_equation() {
    let t = 0.8;
    for beta in [-1.5, -0.3, 0.7, 4.0] {
        let spec = interval_spectrum(0.0, t, &IntervalBc::Robin(beta), 6).unwrap();
        assert_eq!(spec.eigenvalues.len(), 6);
        for &mu in &spec.eigenvalues {
            let residual = if mu > 0.0 {
                let k = mu.sqrt();
                ((k * k - beta * beta) * (k * t).sin() - 2.0 * beta * k * (k * t).cos()) / (k * k + beta * beta)
            } else {
                let k = (-mu).sqrt();
                ((k * k + beta * beta) * (k * t).tanh() + 2.0 * beta * k) / (k * k + beta * beta)
            };
            assert!(residual.abs() < 1e-10, "beta={beta} mu={mu}: {residual}");
        }
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }
    let neg = interval_spectrum(0.0, 1.0, &IntervalBc::Robin(-1.0), 3).unwrap();
    assert!(neg.eigenvalues[0] < 0.0 && neg.eigenvalues[1] > 0.0);
    let zero = interval_spectrum(2.0, 1.0, &IntervalBc::Robin(0.0), 4).unwrap();
    let neumann = interval_spectrum(2.0, 1.0, &IntervalBc::Neumann, 4).unwrap();
    for (a, b) in zero.eigenvalues.iter().zip(&neumann.eigenvalues) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn prufer_times_for_deep_well() {
    let v = ScalarField::Constant(-c35());
    let d = prufer_conjugate_times(&v, &IntervalBc::Dirichlet, (0.1, 1.0), PRUFER_STEPS).unwrap();
    assert_eq!(d.len(), 3);
    for (k, t) in d.iter().enumerate() {
        assert!((t - 2.0 * (k + 1) as f64 / 7.0).abs() < 1e-6, "{t}");
    }
    let n = prufer_conjugate_times(&v, &IntervalBc::Neumann, (0.1, 1.0), PRUFER_STEPS).unwrap();
    assert_eq!(n.len(), 3);
    for (a, b) in d.iter().zip(&n) {
        assert!((a - b).abs() < 1e-6);
    }
    let free = prufer_conjugate_times(&ScalarField::zero(), &IntervalBc::Dirichlet, (0.1, 1.0), PRUFER_STEPS).unwrap();
    assert!(free.is_empty());
    assert!(matches!(
        prufer_conjugate_times(&v, &IntervalBc::Dirichlet, (0.1, 1.0), 8),
        Err(Error::RefineSteps(_))
    ));
}

#[test]
fn prufer_is_reproducible_and_handles_variable_potentials() {
    let v = parse_field("-200 + 50*x").unwrap();
    let first = prufer_conjugate_times(&v, &IntervalBc::Neumann, (0.0, 1.0), PRUFER_STEPS).unwrap();
    let second = prufer_conjugate_times(&v, &IntervalBc::Neumann, (0.0, 1.0), PRUFER_STEPS).unwrap();
    assert_eq!(first, second);
    let fine = prufer_conjugate_times(&v, &IntervalBc::Neumann, (0.0, 1.0), 4 * PRUFER_STEPS).unwrap();
    assert_eq!(first.len(), fine.len());
    for (a, b) in first.iter().zip(&fine) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn disk_counts() {
    let d = disk_spectrum(30.0, DiskBc::Dirichlet, 1.0, 8).unwrap();
    assert_eq!(d.count_below(30.0), 5);
    assert_eq!(d.multiplicities, vec![1, 2, 2]);
    assert_eq!(disk_spectrum(1e-3, DiskBc::Dirichlet, 1.0, 2).unwrap().count_below(1e-3), 0);
    assert_eq!(disk_spectrum(1e-3, DiskBc::Neumann, 1.0, 2).unwrap().count_below(1e-3), 1);
    for bc in [DiskBc::Dirichlet, DiskBc::Neumann] {
        let base = disk_spectrum(30.0, bc, 1.0, 10).unwrap().count_below(30.0);
        let scaled = disk_spectrum(7.5, bc, 2.0, 10).unwrap().count_below(7.5);
        assert_eq!(base, scaled);
    }
    assert!(matches!(disk_spectrum(30.0, DiskBc::Dirichlet, 1.0, 2), Err(Error::IncreaseModeCap(_))));
}

#[test]
fn disk_conjugate_times_at_level_thirty() {
    let times = disk_conjugate_times(30.0, DiskBc::Dirichlet, (0.5, 1.0)).unwrap();
    assert_eq!(times.len(), 2);
    assert_eq!(times[0].1, 2);
    assert_eq!(times[1].1, 2);
    assert!((times[0].0 - 3.831_705_970_207_512 / 30f64.sqrt()).abs() < 1e-12);
    assert!((times[1].0 - 5.135_622_301_840_683 / 30f64.sqrt()).abs() < 1e-12);
}

#[test]
fn annulus_neumann_mode() {
    let (mu, m) = annulus_first_neumann(0.99, 1.01).unwrap();
    assert_eq!(m, 1);
    assert!((mu - 1.0).abs() < 0.01, "{mu}");
    let mut previous = f64::INFINITY;
    for k in 0..=10 {
        let b = 1.0 + 0.05 * k as f64;
        let (mu, m) = annulus_first_neumann(0.5, b).unwrap();
        assert_eq!(m, 1);
        assert!(mu < previous);
        previous = mu;
    }
}
