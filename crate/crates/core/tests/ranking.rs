use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;

use tube2vec::dimensions::DimensionScores;
use tube2vec::ranking::{
    fit_plackett_luce, kendall_tau_b, label_correlation, tau_c, PlConfig, PARTISAN_LABELS,
};
use tube2vec::seed::rng_from;
use tube2vec::synthetic::{log_uniform_scores, pairwise_comparisons};

/// τc straight from the definition, visiting every unordered pair.
fn naive_tau_c(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut p, mut q) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let s = (x[i] - x[j]).signum() * (y[i] - y[j]).signum();
            if x[i] == x[j] || y[i] == y[j] {
                continue;
            }
            if s > 0.0 {
                p += 1;
            } else {
                q += 1;
            }
        }
    }
    let distinct = |v: &[f64]| {
        let mut u = v.to_vec();
        u.sort_by(f64::total_cmp);
        u.dedup();
        u.len()
    };
    let m = distinct(x).min(distinct(y));
    if m < 2 {
        return None;
    }
    let (m, nf) = (m as f64, n as f64);
    Some(2.0 * m * (p - q) as f64 / (nf * nf * (m - 1.0)))
}

#[test]
fn tau_c_matches_the_pair_counting_oracle() {
    let mut rng = rng_from(1);
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        let kx = rng.random_range(1..=8);
        let ky = rng.random_range(1..=12);
        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..kx))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..ky))).collect();
        assert_eq!(tau_c(&x, &y).ok(), naive_tau_c(&x, &y), "{x:?} {y:?}");
    }
}

proptest! {
    #[test]
    fn tau_c_oracle_on_arbitrary_ties(pairs in prop::collection::vec((0u8..5, 0u8..5), 2..60)) {
        let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        prop_assert_eq!(tau_c(&x, &y).ok(), naive_tau_c(&x, &y));
    }

    #[test]
    fn tau_c_reverses_sign_and_ignores_monotone_maps(pairs in prop::collection::vec((-50i32..50, 0u8..7), 2..80)) {
        let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        if let Ok(t) = tau_c(&x, &y) {
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert_eq!(tau_c(&x, &neg).unwrap(), -t);
            let cubed: Vec<f64> = x.iter().map(|v| v * v * v + 3.0 * v).collect();
            let exp: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            prop_assert_eq!(tau_c(&cubed, &exp).unwrap(), t);
        }
    }
}

#[test]
fn plackett_luce_recovers_known_scores() {
    let truth = log_uniform_scores(50, 2.0, 7);
    let comps = pairwise_comparisons(&truth, 5000, 8);
    let names: Vec<String> = (0..50).map(|i| format!("item{i:02}")).collect();
    let fit = fit_plackett_luce(
        comps
            .iter()
            .map(|&(w, l)| (names[w].as_str(), names[l].as_str())),
        &PlConfig::default(),
    )
    .unwrap();
    assert!(fit.converged);
    for w in fit.trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-12 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
    let recovered: Vec<f64> = names.iter().map(|n| fit.scores[n]).collect();
    let tau = kendall_tau_b(&recovered, &truth).unwrap();
    assert!(tau >= 0.9, "τ = {tau}");
}

#[test]
fn renaming_items_permutes_scores() {
    let truth = log_uniform_scores(12, 1.5, 3);
    let comps = pairwise_comparisons(&truth, 400, 4);
    let a: Vec<String> = (0..12).map(|i| format!("a{i:02}")).collect();
    // A bijective renaming that reverses the id order.
    let b: Vec<String> = (0..12).map(|i| format!("b{:02}", 11 - i)).collect();
    let cfg = PlConfig::default();
    let fa = fit_plackett_luce(
        comps.iter().map(|&(w, l)| (a[w].as_str(), a[l].as_str())),
        &cfg,
    )
    .unwrap();
    let fb = fit_plackett_luce(
        comps.iter().map(|&(w, l)| (b[w].as_str(), b[l].as_str())),
        &cfg,
    )
    .unwrap();
    for i in 0..12 {
        let (x, y) = (fa.scores[&a[i]], fb.scores[&b[i]]);
        assert!((x - y).abs() < 1e-9 * x, "{x} vs {y}");
    }
}

#[test]
fn scaling_scores_keeps_win_probabilities() {
    let truth = log_uniform_scores(8, 1.0, 5);
    let comps = pairwise_comparisons(&truth, 300, 6);
    let names: Vec<String> = (0..8).map(|i| format!("c{i}")).collect();
    let mut fit = fit_plackett_luce(
        comps
            .iter()
            .map(|&(w, l)| (names[w].as_str(), names[l].as_str())),
        &PlConfig::default(),
    )
    .unwrap();
    let before: Vec<f64> = (1..8)
        .map(|i| fit.win_probability("c0", &names[i]).unwrap())
        .collect();
    fit.scores.values_mut().for_each(|s| *s *= 17.5);
    for (i, p) in (1..8).zip(before) {
        assert!((fit.win_probability("c0", &names[i]).unwrap() - p).abs() < 1e-15);
    }
}

#[test]
fn random_scores_barely_correlate_with_labels() {
    let mut rng = rng_from(11);
    let mut small = 0;
    let trials = 1000;
    for _ in 0..trials {
        let labels: BTreeMap<String, String> = (0..113)
            .map(|i| {
                (
                    format!("c{i:03}"),
                    PARTISAN_LABELS.choose(&mut rng).unwrap().to_string(),
                )
            })
            .collect();
        let scores = DimensionScores {
            dimension: "partisan".into(),
            scores: (0..113)
                .map(|i| (format!("c{i:03}"), rng.random::<f64>()))
                .collect(),
            standardized: false,
        };
        if label_correlation(&scores, &labels).unwrap().tau_c.abs() < 0.2 {
            small += 1;
        }
    }
    assert!(small as f64 / trials as f64 >= 0.95, "{small}");
}
