use proptest::prelude::*;
use vortex_core::hypotheses::{applicability, check_hyp1, check_hyp2, HypothesisReport, Theorem, Verdict};
use vortex_core::Strengths;

fn s(v: &[f64]) -> Strengths {
    Strengths::new(v.to_vec()).unwrap()
}

/// Integer oracle: adjacent products and `(Σ_I Γ)² − Σ_I Γ²` for `|I| ≥ 3`.
fn hyp1_oracle(g: &[i64]) -> bool {
    let n = g.len();
    let adjacent = g.windows(2).all(|w| w[0] * w[1] < 0);
    let subsets = (0u32..1 << n).filter(|m| m.count_ones() >= 3).all(|m| {
        let members: Vec<i64> = (0..n).filter(|i| m & (1 << i) != 0).map(|i| g[i]).collect();
        let sum: i64 = members.iter().sum();
        sum * sum - members.iter().map(|x| x * x).sum::<i64>() < 0
    });
    adjacent && subsets
}

fn hyp2_oracle(g: &[i64]) -> bool {
    g[1].abs() < g[0].abs() + g[2].abs() && g[2].abs() < g[1].abs() + g[3].abs()
}

fn verdicts(r: &HypothesisReport) -> Vec<Verdict> {
    let mut v = Vec::new();
    if let Some(h) = &r.hyp1 {
        v.extend(h.adjacent.iter().chain(&h.subsets).map(|w| w.verdict));
    }
    if let Some((_, w)) = &r.hyp2 {
        v.extend(w.iter().map(|w| w.verdict));
    }
    v
}

fn strengths(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec((1i64..6, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m }), n)
}

#[test]
fn documented_examples() {
    assert_eq!(applicability(&s(&[1.0, -1.0, 1.0, -1.0])).unwrap().applicable, Theorem::N4);
    assert!(!check_hyp1(&s(&[2.0, -1.0, 2.0])).unwrap().holds);
    assert!(!check_hyp1(&s(&[1.0, 1.0, -1.0])).unwrap().holds);
    assert!(!check_hyp2(&s(&[1.0, -3.0, 1.0, -1.0])).unwrap());
    assert!(check_hyp2(&s(&[0.6, -1.0, 0.6, -1.0])).unwrap());
    assert_eq!(applicability(&s(&[1.0, -1.0, 1.0])).unwrap().applicable, Theorem::N3);
    assert_eq!(applicability(&s(&[2.0, -1.0, 2.0])).unwrap().applicable, Theorem::None);
}

#[test]
fn near_threshold_values_are_boundary_cases() {
    // subset pair sum within the band around zero
    let g = [2.0, -1.0 - 1e-15, 2.0];
    let r = check_hyp1(&s(&g)).unwrap();
    assert_eq!(r.subsets[0].verdict, Verdict::Boundary);
    assert!(!r.holds);
    let g = [2.0, -1.0 - 1e-6, 2.0];
    assert!(check_hyp1(&s(&g)).unwrap().holds);
}

proptest! {
    #[test]
    fn three_vortex_gate_matches_the_integer_oracle(g in strengths(3)) {
        let f: Vec<f64> = g.iter().map(|&x| x as f64).collect();
        let r = applicability(&s(&f)).unwrap();
        prop_assert_eq!(r.applicable == Theorem::N3, hyp1_oracle(&g));
        prop_assert_eq!(r.failures.is_empty(), r.applicable != Theorem::None);
    }

    #[test]
    fn four_vortex_gate_matches_the_integer_oracle(g in strengths(4)) {
        let f: Vec<f64> = g.iter().map(|&x| x as f64).collect();
        let r = applicability(&s(&f)).unwrap();
        prop_assert_eq!(r.applicable == Theorem::N4, hyp1_oracle(&g) && hyp2_oracle(&g));
        prop_assert_eq!(check_hyp2(&s(&f)).unwrap(), hyp2_oracle(&g));
    }

    #[test]
    fn scaling_preserves_the_report(g in prop::collection::vec(-4.0..4.0f64, 2..5), c in prop::sample::select(vec![2.0, -1.0, 0.5])) {
        prop_assume!(g.iter().all(|x| x.abs() > 1e-3));
        let a = applicability(&s(&g)).unwrap();
        let scaled: Vec<f64> = g.iter().map(|x| c * x).collect();
        let b = applicability(&s(&scaled)).unwrap();
        prop_assert_eq!(a.applicable, b.applicable);
        prop_assert_eq!(verdicts(&a), verdicts(&b));
    }

    #[test]
    fn reversal_preserves_applicability(g in prop::collection::vec(-4.0..4.0f64, 2..5)) {
        prop_assume!(g.iter().all(|x| x.abs() > 1e-3));
        let rev: Vec<f64> = g.iter().rev().copied().collect();
        let (a, b) = (applicability(&s(&g)).unwrap(), applicability(&s(&rev)).unwrap());
        prop_assert_eq!(a.applicable, b.applicable);
        if g.len() == 4 {
            prop_assert_eq!(check_hyp2(&s(&g)).unwrap(), check_hyp2(&s(&rev)).unwrap());
        }
    }
}
