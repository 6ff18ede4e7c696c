use proptest::prelude::*;
use robgap::attack::*;
use robgap::bounds::*;

fn records(members: &[f64], nonmembers: &[f64]) -> Vec<LossRecord> {
    members
        .iter()
        .map(|&l| (l, true))
        .chain(nonmembers.iter().map(|&l| (l, false)))
        .enumerate()
        .map(|(i, (l, m))| LossRecord::new(format!("e{i}"), l, m).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn accuracy_invariant_under_increasing_affine_maps(
        members in prop::collection::vec(-5.0f64..5.0, 1..40),
        nonmembers in prop::collection::vec(-5.0f64..5.0, 1..40),
        tau in -5.0f64..5.0,
        a in 0.5f64..4.0,
        b in -10.0f64..10.0,
    ) {
        // Dyadic values keep a·x + b exact, so ties survive the map.
        let q = |x: f64| (x * 8.0).round() / 8.0;
        let (a, b, tau) = (q(a).max(0.125), q(b), q(tau));
        let m: Vec<f64> = members.iter().map(|&x| q(x)).collect();
        let n: Vec<f64> = nonmembers.iter().map(|&x| q(x)).collect();
        let base = attack_accuracy(&records(&m, &n), tau).unwrap();
        let mt: Vec<f64> = m.iter().map(|x| a * x + b).collect();
        let nt: Vec<f64> = n.iter().map(|x| a * x + b).collect();
        let moved = attack_accuracy(&records(&mt, &nt), a * tau + b).unwrap();
        prop_assert_eq!(base.accuracy, moved.accuracy);
    }

    #[test]
    fn constant_predictions_score_half_on_balanced_traces(
        losses in prop::collection::vec(-5.0f64..5.0, 2..60),
    ) {
        let k = losses.len() / 2;
        let recs = records(&losses[..k], &losses[k..2 * k]);
        prop_assert_eq!(attack_accuracy(&recs, f64::INFINITY).unwrap().accuracy, 0.5);
        prop_assert_eq!(attack_accuracy(&recs, f64::NEG_INFINITY).unwrap().accuracy, 0.5);
    }

    #[test]
    fn leakage_antisymmetric(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        prop_assert_eq!(comparative_leakage(a, b), -comparative_leakage(b, a));
        prop_assert_eq!(comparative_leakage(a, a), 0.0);
    }

    #[test]
    fn trace_round_trip(
        losses in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 0..30),
        flags in prop::collection::vec(any::<bool>(), 30),
    ) {
        let recs: Vec<LossRecord> = losses
            .iter()
            .zip(&flags)
            .enumerate()
            .map(|(i, (&l, &m))| LossRecord::new(format!("id-{i}"), l, m).unwrap())
            .collect();
        let text = format_loss_trace(&recs);
        prop_assert_eq!(parse_loss_trace(&text).unwrap(), recs);
    }

    #[test]
    fn improved_bound_dominates_original(
        mu in prop::collection::vec(-2.0f64..3.0, 1..6),
        sigma in prop::collection::vec(0.1f64..3.0, 6),
        frac in 0.001f64..0.999,
    ) {
        let sigma = sigma[..mu.len()].to_vec();
        let min_pos = mu.iter().cloned().filter(|m| *m > 0.0).fold(f64::INFINITY, f64::min);
        prop_assume!(min_pos.is_finite());
        let spec = VectorSpec::new(mu, sigma).unwrap();
        let eps = frac * min_pos;
        let orig = bound_original(&spec, eps).unwrap();
        let imp = bound_improved(&spec, eps).unwrap();
        prop_assert!(imp >= orig);
        prop_assert_eq!(bound_label_noise(&spec, eps, 1.0).unwrap(), imp);
    }

    #[test]
    fn kappa_odd(x in -20.0f64..20.0, delta in 0.01f64..0.99) {
        prop_assert_eq!(kappa(-x, delta).unwrap(), -kappa(x, delta).unwrap());
    }
}

#[test]
fn halving_effective_mean_quadruples_scale() {
    // ζ = 0.75 and ζ = 0.625 give effective means 0.5 and 0.25. With ε scaled
    // alongside, both log terms are unchanged and only (σ/μ_eff)² moves.
    let spec = VectorSpec::new(vec![1.0], vec![1.0]).unwrap();
    let a = bound_label_noise(&spec, 0.1, 0.75).unwrap();
    let b = bound_label_noise(&spec, 0.05, 0.625).unwrap();
    assert!((b / a - 4.0).abs() < 1e-12, "{}", b / a);
}

#[test]
fn missing_class_in_trace() {
    let recs = records(&[0.1, 0.2], &[]);
    assert!(attack_accuracy(&recs, 0.5).is_err());
    assert!(balanced_subsample(&recs, 1).is_err());
}

#[test]
fn trace_file_io() {
    let dir = std::env::temp_dir().join(format!("robgap-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.csv");
    std::fs::write(&path, "example_id,loss,is_member\na,0.25,1\nb,0.75,0\n").unwrap();
    let recs = load_loss_trace(&path).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(load_loss_trace(dir.join("missing.csv")).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}
