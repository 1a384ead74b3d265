use proptest::prelude::*;

use quasifin_core::linear::qi;
use quasifin_core::pca::{
    count_indices_gf, dim_bound, enumerate_indices, enumerate_strict_all, index_bound, loop_bracket,
    poisson_ideal_identity_check, psi_surjection_check, replay_certificate, straighten, straighten_certified,
    surjection_verdict, LoopSymbol, Monomial, StraightPoly, Verdict,
};
use quasifin_core::quotient::TruncationWindow;
use quasifin_core::voa::{load_voa, VoaData};
use quasifin_core::zhu::{load_poisson, point_algebra, PoissonAlgebraData};

fn voa(name: &str) -> VoaData {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    load_voa(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn poisson(name: &str) -> PoissonAlgebraData {
    let path = format!("{}/tests/fixtures/poisson/{name}", env!("CARGO_MANIFEST_DIR"));
    load_poisson(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const VALID: [&str; 5] = ["point.json", "dual_numbers.json", "affine_line.json", "truncated_cubic.json", "heisenberg_bracket.json"];

/// Sequences in a box, filtered; shares no code with the enumerators.
fn brute_force(k: usize, d: i64, n: i64, strict: bool) -> Vec<Vec<i64>> {
    let hi = d + (k as i64) * n + 1;
    let mut out = Vec::new();
    let mut cur = vec![-n; k];
    loop {
        let ok = cur.iter().sum::<i64>() == d
            && cur.windows(2).all(|w| if strict { w[0] > w[1] } else { w[0] >= w[1] });
        if ok {
            out.push(cur.clone());
        }
        let mut i = k;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if cur[i] < hi {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = -n;
                }
                break;
            }
        }
    }
}

#[test]
fn enumerators_agree_with_brute_force() {
    for k in 0..=4usize {
        for d in -4..=5i64 {
            for n in 0..=2i64 {
                for strict in [false, true] {
                    let direct = enumerate_indices(k, d, n, strict);
                    assert_eq!(direct, brute_force(k, d, n, strict), "k={k} d={d} n={n} strict={strict}");
                    assert_eq!(direct.len() as u128, count_indices_gf(k, d, n, strict));
                }
            }
        }
    }
}

/// Strict sequences as subsets of `[-n, d + n(n+1)/2]`, counted by bitmask.
fn strict_subsets(d: i64, n: i64) -> Vec<Vec<i64>> {
    let hi = d + n * (n + 1) / 2;
    if hi < -n {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let vals: Vec<i64> = (-n..=hi).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << vals.len()) {
        let mut pick: Vec<i64> = (0..vals.len()).filter(|i| mask & (1 << i) != 0).map(|i| vals[i]).collect();
        if pick.iter().sum::<i64>() == d {
            pick.reverse();
            out.push(pick);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

#[test]
fn strict_enumeration_covers_negative_degrees() {
    for n in 0..=3i64 {
        for d in -6..=5i64 {
            let mut all = enumerate_strict_all(d, n);
            all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            assert_eq!(all, strict_subsets(d, n), "d={d} n={n}");
            let by_len: u128 = (0..=12).map(|k| count_indices_gf(k, d, n, true)).sum();
            assert_eq!(index_bound(1, n, d), by_len, "d={d} n={n}");
        }
    }
    // (-1, -2) at level 2 sums to -3
    assert!(enumerate_strict_all(-3, 2).contains(&vec![-1, -2]));
}

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_strict_all(0, 0), vec![vec![], vec![0]]);
    assert!(enumerate_strict_all(-1, 0).is_empty());
    assert_eq!(enumerate_indices(2, 0, 1, false), vec![vec![0, 0], vec![1, -1]]);
    // strict, parts >= -1, sum 1: (1), (1,0), (2,-1), (2,0,-1)
    let all = enumerate_strict_all(1, 1);
    assert_eq!(all.len(), 4);
    let brute: usize = (0..=4).map(|k| brute_force(k, 1, 1, true).len()).sum();
    assert_eq!(brute, 4);
    assert_eq!(index_bound(1, 1, 1), 4);
}

#[test]
fn bounds_for_small_algebras() {
    let point = point_algebra();
    assert_eq!(dim_bound(&point, 2, 0, None).unwrap().bound, 1);
    assert_eq!(dim_bound(&point, 2, 3, None).unwrap().bound, 0);
    let dual = poisson("dual_numbers.json");
    assert_eq!(dim_bound(&dual, 0, 0, None).unwrap().bound, 2);
    let r = dim_bound(&dual, 0, 0, Some(3)).unwrap();
    assert_eq!(r.saturated_upper, Some(2));
}

#[test]
fn saturation_never_exceeds_the_bound() {
    for f in ["dual_numbers.json", "affine_line.json", "truncated_cubic.json"] {
        let p = poisson(f);
        for n in 0..=1 {
            for d in -1..=2 {
                let r = dim_bound(&p, n, d, Some(2)).unwrap();
                let s = r.saturated_upper.unwrap();
                assert!(s <= r.bound, "{f} n={n} d={d}");
                assert!(r.rounds_used >= 1);
            }
        }
    }
}

#[test]
fn truncated_cubic_saturation_drops_below_the_spanning_count() {
    // D_{-1}(x,x) at n = 0 gives P_{-1}(x2) = 2 P_{-1}(x) P_0(x) in degree 1
    let p = poisson("truncated_cubic.json");
    let r = dim_bound(&p, 0, 1, Some(2)).unwrap();
    assert!(r.saturated_upper.unwrap() < r.bound, "{r:?}");
}

#[test]
fn loop_bracket_examples() {
    let h = poisson("heisenberg_bracket.json");
    let (x, y, z) = (1, 2, 3);
    let out = loop_bracket(&h, LoopSymbol::new(2, x), LoopSymbol::new(-1, y));
    assert_eq!(out, vec![(LoopSymbol::new(1, z), qi(1))]);
    assert!(loop_bracket(&h, LoopSymbol::new(0, 0), LoopSymbol::new(3, x)).is_empty());
    let dual = poisson("dual_numbers.json");
    assert!(loop_bracket(&dual, LoopSymbol::new(1, 1), LoopSymbol::new(-4, 1)).is_empty());
}

#[test]
fn straighten_examples() {
    let dual = poisson("dual_numbers.json");
    let e = 1;
    let strict = [LoopSymbol::new(-3, e), LoopSymbol::new(0, e), LoopSymbol::new(2, e)];
    let out = straighten(&dual, &strict, 2, 100).unwrap();
    assert_eq!(out, StraightPoly::monomial(Monomial::from_symbols(&strict)));
    let dead = [LoopSymbol::new(4, e), LoopSymbol::new(-1, e)];
    assert!(straighten(&dual, &dead, 3, 100).unwrap().is_zero());
    // P_{-2}(e)^2 at level 3: -2 Σ_{j=1..5} P_{-2-j}(e) P_{-2+j}(e)
    let out = straighten(&dual, &[LoopSymbol::new(-2, e), LoopSymbol::new(-2, e)], 3, 100).unwrap();
    let mut expect = StraightPoly::default();
    for j in 1..=5 {
        expect.add_term(Monomial::new(vec![(2 + j, e), (2 - j, e)]), qi(-2));
    }
    assert_eq!(out, expect);
    // unit factors
    assert_eq!(straighten(&dual, &[LoopSymbol::new(0, 0), LoopSymbol::new(1, e)], 1, 10).unwrap(),
        StraightPoly::monomial(Monomial::new(vec![(-1, e)])));
    assert!(straighten(&dual, &[LoopSymbol::new(1, 0)], 1, 10).unwrap().is_zero());
}

#[test]
fn step_limit_is_reported() {
    let cubic = poisson("truncated_cubic.json");
    let m = [LoopSymbol::new(0, 1), LoopSymbol::new(0, 1), LoopSymbol::new(0, 1)];
    assert!(matches!(straighten(&cubic, &m, 3, 1), Err(quasifin_core::Error::StepLimitExceeded(1))));
}

#[test]
fn ideal_identity_holds_on_valid_algebras() {
    for f in VALID {
        let rep = poisson_ideal_identity_check(&poisson(f), 3);
        assert!(rep.passed(), "{f}: {:?}", rep.failures);
        assert!(rep.identity_checked > 0);
    }
    let rep = poisson_ideal_identity_check(&poisson("heisenberg_bracket.json"), 1);
    assert!(rep.continuity_checked > 0);
}

#[test]
fn ideal_identity_detects_a_broken_bracket() {
    let rep = poisson_ideal_identity_check(&poisson("mutated_dual.json"), 1);
    assert!(!rep.passed());
    assert!(rep.failures[0].contains("x=e") || rep.failures.iter().any(|f| f.contains("x=e")));
}

#[test]
fn surjection_controls() {
    let w = TruncationWindow::new(4, 2, 2).unwrap();
    let t = psi_surjection_check(&voa("trivial.json"), 0, 0, &w).unwrap();
    assert_eq!(t.verdict, Verdict::Pass);
    assert_eq!((t.q_dim, t.bound), (1, Some(1)));
    let h = psi_surjection_check(&voa("heisenberg_w4.json"), 0, 0, &w).unwrap();
    assert_eq!(h.verdict, Verdict::Inconclusive);
    assert!(!h.c2_finite_within_window);
    // dual numbers against a two-dimensional converged slice
    let dual = poisson("dual_numbers.json");
    let (bound, dominated, verdict) = surjection_verdict(2, true, &dual, true, 0, 0);
    assert_eq!((bound, dominated, verdict), (Some(2), Some(true), Verdict::Pass));
    assert_eq!(surjection_verdict(3, true, &dual, true, 0, 0).2, Verdict::Fail);
}

#[test]
fn lee_yang_surjection_passes() {
    let w = TruncationWindow::new(6, 2, 2).unwrap();
    let r = psi_surjection_check(&voa("lee_yang_w6.json"), 0, 0, &w).unwrap();
    assert_eq!(r.q_dim, 2);
    assert_eq!(r.bound, Some(2));
    assert!(r.generator_failures.is_empty(), "{:?}", r.generator_failures);
    assert!(r.generator_checked > 0);
    assert_eq!(r.verdict, Verdict::Pass);
}

fn monomial_strategy(dim: usize) -> impl Strategy<Value = Vec<LoopSymbol>> {
    prop::collection::vec((-5i64..=3, 0..dim), 0..=4)
        .prop_map(|v| v.into_iter().map(|(i, e)| LoopSymbol::new(i, e)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn straightening_certificates_replay(
        which in 0usize..4,
        n in 0i64..=3,
        seed in monomial_strategy(4),
    ) {
        let f = ["dual_numbers.json", "affine_line.json", "truncated_cubic.json", "heisenberg_bracket.json"][which];
        let p = poisson(f);
        let m: Vec<LoopSymbol> = seed.into_iter().map(|s| LoopSymbol::new(s.index, s.elem % p.dim())).collect();
        let input = StraightPoly::monomial(Monomial::from_symbols(&m));
        let cert = straighten_certified(&p, &input, n, 100_000).unwrap();
        prop_assert!(cert.result.is_normal(&p, n));
        prop_assert_eq!(replay_certificate(&p, &cert), Ok(()));
        for s in &cert.steps {
            for om in &s.output_measures {
                prop_assert!(*om < s.measure);
            }
        }
    }

    #[test]
    fn bound_is_monotone_in_level(r in 0usize..3, d in -3i64..=4, n in 0i64..3) {
        prop_assert!(index_bound(r, n, d) <= index_bound(r, n + 1, d));
    }

    #[test]
    fn enumeration_is_sorted_and_bounded(k in 0usize..4, d in -3i64..=5, n in 0i64..3, strict in any::<bool>()) {
        let seqs = enumerate_indices(k, d, n, strict);
        prop_assert!(seqs.windows(2).all(|w| w[0] < w[1]));
        for s in &seqs {
            if let Some(first) = s.first() {
                prop_assert!(*first <= d + (k as i64 - 1) * n);
            }
        }
    }
}
