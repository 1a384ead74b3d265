use quasifin_core::linear::qi;
use quasifin_core::quotient::TruncationWindow;
use quasifin_core::voa::{load_voa, VoaData};
use quasifin_core::zhu::{c2_class, c2_quotient, c2_span, load_poisson, poisson_check, PoissonAlgebraData};
use quasifin_core::{Error, QVec};

fn voa(name: &str) -> VoaData {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    load_voa(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn poisson(name: &str) -> PoissonAlgebraData {
    let path = format!("{}/tests/fixtures/poisson/{name}", env!("CARGO_MANIFEST_DIR"));
    load_poisson(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn win(w: i64) -> TruncationWindow {
    TruncationWindow::new(w, 2, 2).unwrap()
}

#[test]
fn trivial_quotient_is_one_dimensional() {
    let p = c2_quotient(&voa("trivial.json"), &win(4)).unwrap();
    assert_eq!(p.dim(), 1);
    assert_eq!(p.profile, vec![1, 0, 0, 0, 0]);
    assert!(p.c2_finite_within_window);
    assert!(!p.complete);
    assert!(poisson_check(&p, None).passed());
}

#[test]
fn heisenberg_profile_has_one_class_per_weight() {
    let v = voa("heisenberg_w4.json");
    let p = c2_quotient(&v, &win(4)).unwrap();
    assert_eq!(p.profile, vec![1, 1, 1, 1, 1]);
    assert!(!p.c2_finite_within_window);
    // surviving classes are the powers of a
    let syms: Vec<&str> = p.basis.iter().map(|b| b.symbol.as_str()).collect();
    assert_eq!(syms[1], "a");
    assert_eq!(syms[4], "a[1,1,1,1]");
    let a = QVec::unit(1);
    assert_eq!(p.br(&a, &a), Some(QVec::new()));
    let a2 = p.mul(&a, &a).unwrap();
    assert_eq!(a2.support().collect::<Vec<_>>(), vec![2]);
    // a^3 of weight 3 is known, a^3 · a^3 is past the window
    assert!(p.mult_entry(3, 3).is_none());
    let rep = poisson_check(&p, None);
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.skipped_unknown > 0);
}

#[test]
fn heisenberg_low_weights_are_window_stable() {
    let v = voa("heisenberg_w4.json");
    let small = c2_quotient(&v, &win(2)).unwrap();
    let big = c2_quotient(&v, &win(4)).unwrap();
    assert_eq!(small.profile[..], big.profile[..3]);
    for i in 0..small.dim() {
        assert_eq!(small.basis[i], big.basis[i]);
        for j in 0..small.dim() {
            if let Some(m) = small.mult_entry(i, j) {
                assert_eq!(Some(m), big.mult_entry(i, j));
            }
        }
    }
}

#[test]
fn lee_yang_quotient_is_dual_numbers() {
    for (file, w) in [("lee_yang_w6.json", 6), ("lee_yang_w10.json", 10)] {
        let v = voa(file);
        let p = c2_quotient(&v, &win(w)).unwrap();
        let mut expect = vec![0usize; w as usize + 1];
        expect[0] = 1;
        expect[2] = 1;
        assert_eq!(p.profile, expect);
        assert!(p.c2_finite_within_window);
        let e = QVec::unit(1);
        assert_eq!(p.basis[1].symbol, "w");
        assert_eq!(p.mul(&e, &e), Some(QVec::new()));
        assert_eq!(p.br(&e, &e), Some(QVec::new()));
        // same tables as the standalone dual-number input
        let dual = poisson("dual_numbers.json");
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(p.mult_entry(i, j), dual.mult_entry(i, j));
                assert_eq!(p.bracket_entry(i, j), dual.bracket_entry(i, j));
            }
        }
    }
}

#[test]
fn c2_generators_map_to_zero() {
    let v = voa("lee_yang_w6.json");
    let p = c2_quotient(&v, &win(6)).unwrap();
    for u in 0..v.dim() {
        for x in 0..v.dim() {
            for k in -7..=-2i64 {
                let r = v.weight(u) + v.weight(x) - k - 1;
                if r > 6 {
                    continue;
                }
                let prod = match v.product(k, u, x) {
                    Ok(p) => p,
                    Err(Error::OutOfWindow(_)) => continue,
                    Err(e) => panic!("{e}"),
                };
                assert_eq!(c2_class(&v, &p, &prod, r).unwrap(), Some(QVec::new()));
            }
        }
    }
    // the conformal vector survives
    let w = v.index_of("w").unwrap();
    assert!(!c2_span(&v, 2).unwrap().contains(&QVec::unit(w)));
}

#[test]
fn window_beyond_data_is_rejected() {
    let v = voa("lee_yang_w6.json");
    assert!(matches!(c2_quotient(&v, &win(7)), Err(Error::OutOfWindow(_))));
}

#[test]
fn fixture_algebras_pass_the_axioms() {
    for f in ["point.json", "dual_numbers.json", "affine_line.json", "truncated_cubic.json", "heisenberg_bracket.json"] {
        let p = poisson(f);
        let rep = poisson_check(&p, None);
        assert!(rep.exhaustive);
        assert!(rep.passed(), "{f}: {:?}", rep.failures);
        assert_eq!(rep.skipped_unknown, 0);
    }
}

#[test]
fn mutated_bracket_is_caught_with_witness() {
    let p = poisson("mutated_dual.json");
    let rep = poisson_check(&p, None);
    let laws = rep.laws_failed();
    assert!(laws.contains(&"grading-bracket"), "{laws:?}");
    assert!(laws.contains(&"antisymmetry"), "{laws:?}");
    assert!(rep.failures.iter().any(|f| f.witness == vec!["e".to_string(), "e".to_string()]));
}

#[test]
fn leibniz_mutation_is_caught() {
    let mut p = poisson("truncated_cubic.json");
    // {x, x2} = x is antisymmetric-compatible but breaks Leibniz and grading
    p.bracket.insert((1, 2), QVec::from_pairs([(1, qi(1))]));
    p.bracket.insert((2, 1), QVec::from_pairs([(1, qi(-1))]));
    let laws = poisson_check(&p, None).laws_failed();
    assert!(laws.contains(&"leibniz") || laws.contains(&"jacobi"), "{laws:?}");
    assert!(laws.contains(&"grading-bracket"));
}

#[test]
fn poisson_file_round_trip() {
    for f in ["dual_numbers.json", "affine_line.json", "truncated_cubic.json"] {
        let p = poisson(f);
        let q = load_poisson(&p.to_json()).unwrap();
        assert_eq!(p, q);
    }
    let p = c2_quotient(&voa("heisenberg_w4.json"), &win(3)).unwrap();
    let q = load_poisson(&p.to_json()).unwrap();
    assert_eq!(p.mult, q.mult);
    assert_eq!(p.bracket, q.bracket);
    assert!(!q.complete);
}

#[test]
fn sampled_check_visits_fewer_triples() {
    let p = c2_quotient(&voa("heisenberg_w4.json"), &win(4)).unwrap();
    let full = poisson_check(&p, None);
    let sampled = poisson_check(&p, Some(10));
    assert!(!sampled.exhaustive);
    assert!(sampled.checked + sampled.skipped_unknown < full.checked + full.skipped_unknown);
}
