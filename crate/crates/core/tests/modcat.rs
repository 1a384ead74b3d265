use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasifin_core::algebra::FiniteAlgebra;
use quasifin_core::linear::{q, qi};
use quasifin_core::modcat::{
    annihilator_containment, e_n, generated_by, is_bijective, is_module_map, k_n_dims, module_round_trip,
    pairing_check, restrict_map, restricted_dual, round_trip_check, synthetic_algebras, tensor_over_an, voa_shadow,
    FinModule, GradedAlgebra,
};
use quasifin_core::quotient::{extract_finite_algebra, TruncationWindow};
use quasifin_core::voa::{load_voa, VoaData};
use quasifin_core::{Error, QMatrix, QVec, Rational};

fn voa(name: &str) -> VoaData {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    load_voa(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Random quotient of a free module on one or two diagonal tops, cut
/// down to at most `max_dim` with random homogeneous relations.
fn random_module(alg: &FiniteAlgebra, rng: &mut ChaCha8Rng, max_dim: usize) -> FinModule {
    let mut diag: Vec<Rational> = alg.labels.iter().filter(|(l, m)| l == m).map(|(l, _)| l.clone()).collect();
    diag.dedup();
    let tops: Vec<Rational> = (0..rng.gen_range(1..=2)).map(|_| diag[rng.gen_range(0..diag.len())].clone()).collect();
    let mut rels: Vec<QVec> = Vec::new();
    loop {
        let m = FinModule::quotient_of_free(alg, &tops, &rels);
        if m.dim() <= max_dim && (m.dim() > 0 || rng.gen_bool(0.1)) {
            return m;
        }
        if m.dim() == 0 {
            rels.clear();
            continue;
        }
        // free module coordinates grouped by left label
        let free = FinModule::quotient_of_free(alg, &tops, &[]);
        let lab = free.labels[rng.gen_range(0..free.dim())].clone();
        let pos = free.positions(std::slice::from_ref(&lab));
        let r = QVec::from_pairs(pos.iter().map(|&p| (p, qi(rng.gen_range(-2..=2)))));
        if !r.is_zero() {
            rels.push(r);
        }
    }
}

/// Module maps `m → t` by solving the intertwining equations directly.
fn hom_space(m: &FinModule, t: &FinModule) -> Vec<QMatrix> {
    let (r, c) = (t.dim(), m.dim());
    let var = |i: usize, j: usize| i * c + j;
    let mut eqs = Vec::new();
    for b in 0..m.algebra.dim() {
        // (φ ρ_m(b) - ρ_t(b) φ)[i][j] = 0
        for i in 0..r {
            for j in 0..c {
                let mut e = QVec::new();
                for k in 0..c {
                    e.add_term(var(i, k), m.action[b].get(k, j));
                }
                for k in 0..r {
                    e.add_term(var(k, j), -t.action[b].get(i, k));
                }
                if !e.is_zero() {
                    eqs.push(e);
                }
            }
        }
    }
    let mat = QMatrix::from_rows(r * c, eqs);
    let (_, ker) = quasifin_core::linear::rank_kernel(&mat);
    ker.into_iter()
        .map(|v| {
            let mut out = QMatrix::zeros(r, c);
            for (k, x) in v.iter() {
                out.set(k / c, k % c, x.clone());
            }
            out
        })
        .collect()
}

#[test]
fn synthetic_spectra_and_gaps() {
    let algs = synthetic_algebras();
    let omegas: Vec<Vec<Rational>> = algs.iter().map(|(_, g)| g.omega(0)).collect();
    assert_eq!(omegas, vec![vec![qi(0)], vec![qi(0), qi(1)], vec![qi(0), q(1, 2)]]);
    let gaps: Vec<i64> = algs.iter().map(|(_, g)| g.gap()).collect();
    assert_eq!(gaps, vec![0, 1, 0]);
    // Ωₙ grows with n and stays inside Γ_{n+g}
    for (_, g) in &algs {
        for n in 0..=g.cap() {
            let om = g.omega(n);
            assert!(om.iter().all(|l| g.gamma(n + g.gap()).contains(l)));
            assert!(g.omega(0).iter().all(|l| om.contains(l)));
        }
    }
}

#[test]
fn e_n_of_p_n_is_a_n() {
    for (name, g) in synthetic_algebras() {
        for n in g.gap()..=g.cap() - g.gap() {
            let (a_n, keep) = g.a_n(n).unwrap();
            let reg = FinModule::regular(&a_n);
            let t = tensor_over_an(&g, n, &reg, g.cap()).unwrap();
            let en = e_n(&t.module, &g.gamma(n), &a_n, &keep);
            assert_eq!(en.dim(), a_n.dim(), "{name} n={n}");
            assert!(t.module.check().is_empty(), "{name}");
            // Pₙ ⊗ Aₙ ≅ Pₙ
            assert_eq!(t.module.dim(), g.p_n(n).len(), "{name} n={n}");
            let r = round_trip_check(&g, &reg, n, g.cap()).unwrap();
            assert!(r.isomorphism, "{name}: {:?}", r.witness);
        }
    }
}

#[test]
fn simple_module_at_zero_spreads_over_shifts() {
    // triangular Aₙ with gap 1: simple at 0 induces the column of level 0
    let (_, g) = &synthetic_algebras()[1];
    let (a1, _) = g.a_n(1).unwrap();
    assert_eq!(a1.dim(), 3);
    let simple = FinModule::quotient_of_free(&a1, &[qi(0)], &[]);
    assert_eq!(simple.labels, vec![qi(0)]);
    let t = tensor_over_an(g, 1, &simple, 3).unwrap();
    assert_eq!(t.module.labels, vec![qi(0)]);
    // simple at 1 is the top of the projective at 1
    let proj1 = FinModule::quotient_of_free(&a1, &[qi(1)], &[]);
    assert_eq!(proj1.dim(), 2);
    let t = tensor_over_an(g, 1, &proj1, 3).unwrap();
    assert_eq!(t.module.level_dims().into_iter().collect::<Vec<_>>(), vec![(qi(0), 1), (qi(1), 1), (qi(2), 1), (qi(3), 1)]);
    assert!(t.module.labels.iter().all(|l| l.is_integer()));
}

#[test]
fn lee_yang_a0_round_trip() {
    let w = TruncationWindow::new(6, 2, 2).unwrap();
    let a0 = extract_finite_algebra(&voa("lee_yang_w6.json"), 0, 0, &w).unwrap();
    let g = GradedAlgebra::new(a0.clone());
    assert_eq!(g.omega(0), vec![q(-1, 5), qi(0)]);
    assert_eq!(g.gap(), 0);
    for tops in [vec![q(-1, 5)], vec![qi(0)], vec![q(-1, 5), qi(0)]] {
        let x = FinModule::quotient_of_free(&a0, &tops, &[]);
        let r = round_trip_check(&g, &x, 0, 0).unwrap();
        assert!(r.isomorphism, "{:?}", r.witness);
        assert_eq!(r.dim_x, tops.len());
    }
}

#[test]
fn trivial_round_trip() {
    let g = GradedAlgebra::new(FiniteAlgebra::one());
    assert_eq!(g.omega(0), vec![qi(0)]);
    let x = FinModule::quotient_of_free(&FiniteAlgebra::one(), &[qi(0), qi(0)], &[]);
    let r = round_trip_check(&g, &x, 0, 0).unwrap();
    assert!(r.isomorphism);
    assert_eq!(r.map, QMatrix::identity(2));
}

#[test]
fn cap_and_compatibility_errors() {
    let algs = synthetic_algebras();
    let (_, g) = &algs[1];
    let (a1, _) = g.a_n(1).unwrap();
    let x = FinModule::regular(&a1);
    assert!(matches!(round_trip_check(g, &x, 1, 1), Err(Error::CapTooSmall { cap: 1, need: 2 })));
    assert!(matches!(round_trip_check(g, &x, 0, 3), Err(Error::InvariantViolation(_))));
    assert!(matches!(tensor_over_an(g, 2, &x, 3), Err(Error::IncompatibleAlgebras(_))));
    assert!(matches!(round_trip_check(g, &x, 1, 9), Err(Error::OutOfWindow(_))));
}

#[test]
fn random_round_trips_on_synthetic_algebras() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, g) in synthetic_algebras() {
        let gap = g.gap();
        for n in gap..=g.cap() - gap {
            let (a_n, _) = g.a_n(n).unwrap();
            for _ in 0..10 {
                let x = random_module(&a_n, &mut rng, 4);
                assert!(x.check().is_empty(), "{name}: {:?}", x.check());
                let r = round_trip_check(&g, &x, n, g.cap()).unwrap();
                assert!(r.isomorphism, "{name} n={n}: {:?}", r.witness);
                // the canonical map is one point of the Hom space
                let t = tensor_over_an(&g, n, &x, g.cap()).unwrap();
                let (_, keep) = g.a_n(n).unwrap();
                let en = e_n(&t.module, &g.gamma(n), &a_n, &keep);
                assert!(is_module_map(&x, &en, &r.map));
                // brute-force oracle: an invertible map exists and Hom dims match End
                let homs = hom_space(&x, &en);
                assert_eq!(homs.len(), hom_space(&x, &x).len(), "{name}");
                let found = (0..20).any(|_| {
                    let mut f = QMatrix::zeros(en.dim(), x.dim());
                    for h in &homs {
                        f = f.add(&h.scaled(&qi(rng.gen_range(-3..=3))));
                    }
                    is_bijective(&f)
                });
                assert!(found || x.dim() == 0, "{name}: no invertible map found");
            }
        }
    }
}

#[test]
fn heisenberg_shadow_dual_pairs_perfectly() {
    let v = voa("heisenberg_w4.json");
    let a = v.index_of("a").unwrap();
    let s = voa_shadow(&v, &[a], 3).unwrap();
    assert_eq!(s.level_dims(), vec![1, 1, 2, 3, 5]);
    assert!(s.check().is_empty());
    assert!(!s.actions.is_empty());
    let d = restricted_dual(&s);
    assert!(d.right);
    assert!(d.check().is_empty());
    assert_eq!(pairing_check(&s, &d), Ok(()));
    assert_eq!(restricted_dual(&d), s);
}

#[test]
fn broken_dual_is_caught() {
    let v = voa("heisenberg_w4.json");
    let s = voa_shadow(&v, &[v.index_of("a").unwrap()], 2).unwrap();
    let mut d = restricted_dual(&s);
    let k = d.actions.iter().position(|a| !a.matrix.is_zero()).unwrap();
    d.actions[k].matrix = d.actions[k].matrix.scaled(&qi(2));
    assert!(pairing_check(&s, &d).is_err());
}

fn induced(g: &GradedAlgebra, n: i64, seed: u64) -> (FinModule, FinModule) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a_n, _) = g.a_n(n).unwrap();
    let x = random_module(&a_n, &mut rng, 4);
    let t = tensor_over_an(g, n, &x, g.cap()).unwrap();
    (x, t.module)
}

/// Transport of `m` along a random invertible matrix, returning the map.
fn transport(m: &FinModule, rng: &mut ChaCha8Rng) -> (FinModule, QMatrix) {
    // block-diagonal by label keeps the basis homogeneous
    let n = m.dim();
    loop {
        let mut p = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if m.labels[i] == m.labels[j] {
                    p.set(i, j, qi(rng.gen_range(-2..=2)));
                }
            }
        }
        let cols: Vec<QVec> = (0..n).map(|j| p.column(j)).collect();
        if quasifin_core::linear::rank(&cols) < n {
            continue;
        }
        let inv = invert(&p);
        let action = m.action.iter().map(|a| p.mul(a).mul(&inv)).collect();
        return (FinModule { algebra: m.algebra.clone(), action, labels: m.labels.clone() }, p);
    }
}

fn invert(p: &QMatrix) -> QMatrix {
    let n = p.rows();
    let cols: Vec<QVec> = (0..n).map(|j| p.column(j)).collect();
    let inv_cols: Vec<QVec> = (0..n)
        .map(|i| {
            let c = quasifin_core::linear::solve_combination(&cols, &QVec::unit(i)).unwrap();
            QVec::from_dense(&c)
        })
        .collect();
    QMatrix::from_columns(n, &inv_cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn annihilators_sit_between_levels(which in 0usize..3, seed in any::<u64>()) {
        let (_, g) = &synthetic_algebras()[which];
        let n = g.gap();
        let (_, m) = induced(g, n, seed);
        for k in 0..=g.cap() - g.gap() {
            let r = annihilator_containment(g, &m, k);
            prop_assert!(r.holds, "{:?}", r.failures);
            prop_assert!(r.e_n_dim <= r.k_n_dim && r.k_n_dim <= r.e_ng_dim);
        }
    }

    #[test]
    fn nonzero_modules_have_killed_vectors(which in 0usize..3, seed in any::<u64>()) {
        let (_, g) = &synthetic_algebras()[which];
        let (_, m) = induced(g, g.gap(), seed);
        let k0: usize = k_n_dims(&m, 0).values().sum();
        prop_assert_eq!(k0 == 0, m.dim() == 0);
    }

    #[test]
    fn bijective_on_gap_levels_means_bijective(which in 0usize..3, seed in any::<u64>()) {
        let (_, g) = &synthetic_algebras()[which];
        let gap = g.gap();
        let (x, m) = induced(g, gap, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let (x2, f) = transport(&x, &mut rng);
        prop_assert!(is_module_map(&x, &x2, &f));
        let m2 = tensor_over_an(g, gap, &x2, g.cap()).unwrap().module;
        // random morphisms m → m2; bijective ones on E_g must be bijective
        let homs = hom_space(&m, &m2);
        let mut phi = QMatrix::zeros(m2.dim(), m.dim());
        for h in &homs {
            phi = phi.add(&h.scaled(&qi(rng.gen_range(-3..=3))));
        }
        prop_assert!(is_module_map(&m, &m2, &phi));
        let on_gap = restrict_map(&m, &m2, &phi, &g.gamma(gap));
        if is_bijective(&on_gap) {
            prop_assert!(is_bijective(&phi));
        }
        prop_assert_eq!(m.dim(), m2.dim());
    }

    #[test]
    fn induced_modules_are_generated_by_gap_levels(which in 0usize..3, seed in any::<u64>()) {
        let (_, g) = &synthetic_algebras()[which];
        let gap = g.gap();
        let (_, m) = induced(g, gap, seed);
        prop_assert!(generated_by(&m, &g.gamma(gap)));
        prop_assert!(module_round_trip(g, &m, gap).unwrap());
    }

    #[test]
    fn dual_is_involutive(which in 0usize..3, seed in any::<u64>()) {
        let (_, g) = &synthetic_algebras()[which];
        let (_, m) = induced(g, g.gap(), seed);
        let s = m.shadow();
        let d = restricted_dual(&s);
        prop_assert_eq!(d.level_dims(), s.level_dims());
        prop_assert_eq!(pairing_check(&s, &d), Ok(()));
        prop_assert_eq!(restricted_dual(&d), s);
    }
}
