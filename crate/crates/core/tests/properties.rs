use liftcut::conic_ir::{export_model, import_model, ConicModel, Sense};
use liftcut::core_types::{safe_ratio, set_of, FractionalPoint, Partition};
use liftcut::discrete_hull::{
    dual_certificate, facet_value, facets_from_weights, greedy_primal, min_linear_over_x, verify_strong_duality,
};
use liftcut::experiments::generate_instance;
use liftcut::lifted_cuts::{base_value, find_l_positive, separate, xf_hull_value};
use liftcut::oracles::{hull_lp_value, min_linear_enumeration};
use liftcut::set_function::{check_supermodular, eval_g, AlphaVector, GValue, Region};
use proptest::prelude::*;

fn signs(n: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), n)
}

fn unit(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, n)
}

fn interior(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..=1.0f64, n)
}

fn nonneg(n: usize, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=hi, n)
}

/// (x, α) with α ≥ 0.
fn hull_input(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| (unit(n), nonneg(n, 3.0)))
}

fn sep_input(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>)> {
    (1..=max_n).prop_flat_map(|n| (interior(n), nonneg(n, 2.0), signs(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn safe_ratio_follows_convention(a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let r = safe_ratio(a, b);
        if b > 0.0 {
            prop_assert_eq!(r, a / b);
        } else if a > 0.0 {
            prop_assert_eq!(r, f64::INFINITY);
        } else {
            prop_assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn partition_swap_is_involution(s in (1..12usize).prop_flat_map(signs)) {
        let p = Partition::from_signs(&s).unwrap();
        prop_assert_eq!(p.swapped().swapped(), p.clone());
        prop_assert_eq!(p.plus().len() + p.minus().len(), s.len());
    }

    #[test]
    fn g_is_supermodular_inside_b(s in signs(4), a in prop::collection::vec(-2.0..2.0f64, 4)) {
        let p = Partition::from_signs(&s).unwrap();
        // push α into B⁺: the minus side may not offset the plus side
        let top = p.plus().iter().map(|&i| a[i].max(0.0)).fold(0.0, f64::max);
        let mut v = a.clone();
        for &j in p.minus() {
            v[j] = v[j].min(-top);
        }
        let alpha = AlphaVector::new(v, &p).unwrap();
        prop_assert_ne!(alpha.region, Region::Unbounded);
        prop_assert!(check_supermodular(&alpha, &p).unwrap());
    }

    #[test]
    fn g_is_nonpositive_and_monotone(a in nonneg(5, 3.0)) {
        let p = Partition::positive(5);
        let alpha = AlphaVector::new(a, &p).unwrap();
        for m in 0u64..32 {
            let s = set_of(m, 5);
            let GValue::Finite(g) = eval_g(&alpha, &s, &p).unwrap() else { panic!("bounded") };
            prop_assert!(g <= 0.0);
            for i in 0..5 {
                if m >> i & 1 == 0 {
                    let bigger = set_of(m | 1 << i, 5);
                    let GValue::Finite(h) = eval_g(&alpha, &bigger, &p).unwrap() else { panic!("bounded") };
                    prop_assert!(h <= g + 1e-12);
                }
            }
        }
    }

    #[test]
    fn greedy_primal_is_a_distribution((x, a) in hull_input(8)) {
        let lam = greedy_primal(&x, &a).unwrap();
        prop_assert!((lam.total() - 1.0).abs() < 1e-9);
        prop_assert!(lam.entries.values().all(|&v| v >= 0.0));
        for (c, xi) in lam.coverage(x.len()).iter().zip(&x) {
            prop_assert!((c - xi).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_duality_against_lp((x, a) in hull_input(7)) {
        let rep = verify_strong_duality(&x, &a).unwrap();
        prop_assert!(rep.ok(), "{:?}", rep);
        let lp = hull_lp_value(&x, &a).unwrap();
        prop_assert!((rep.primal_obj - lp).abs() < 1e-8);
        prop_assert!((facet_value(&x, &a) - lp).abs() < 1e-8);
    }

    #[test]
    fn certificate_is_dual_feasible((x, a) in hull_input(6)) {
        let c = dual_certificate(&x, &a).unwrap();
        let n = x.len();
        for m in 0u64..1 << n {
            let s = set_of(m, n);
            let top = s.iter().map(|&i| a[i]).fold(0.0, f64::max);
            let lhs = c.gamma + s.iter().map(|&i| c.mu[i]).sum::<f64>();
            prop_assert!(lhs <= -top * top / 4.0 + 1e-9);
        }
    }

    #[test]
    fn facets_are_tight_at_vertices(a in (1..7usize).prop_flat_map(|n| nonneg(n, 3.0))) {
        let n = a.len();
        let facets = facets_from_weights(&a);
        for m in 0u64..1 << n {
            let x: Vec<f64> = (0..n).map(|i| (m >> i & 1) as f64).collect();
            let top = (0..n).filter(|&i| m >> i & 1 == 1).map(|i| a[i]).fold(0.0, f64::max);
            let best = facets.iter().map(|f| f.eval(&x)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((best + top * top / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_minimization_matches_enumeration(
        a in (1..9usize).prop_flat_map(|n| (nonneg(n, 3.0), prop::collection::vec(-2.0..2.0f64, n)))
    ) {
        let (w, beta) = a;
        let p = Partition::positive(w.len());
        let (v, x) = min_linear_over_x(&w, &beta, &p).unwrap();
        prop_assert!((v - min_linear_enumeration(&w, &beta)).abs() < 1e-9);
        let top = (0..w.len()).filter(|&i| x[i] == 1).map(|i| w[i]).fold(0.0, f64::max);
        let at_x: f64 = (0..w.len()).filter(|&i| x[i] == 1).map(|i| beta[i]).sum::<f64>() - top * top / 4.0;
        prop_assert!((at_x - v).abs() < 1e-9);
    }

    #[test]
    fn separation_dominates_base_and_free_relaxation((x, y, s) in sep_input(8)) {
        let p = Partition::from_signs(&s).unwrap();
        let r = separate(&FractionalPoint { x: x.clone(), y: y.clone(), t: 0.0 }, &p);
        let base = base_value(&y, &p);
        prop_assert!(r.rhs_value >= base - 1e-12);
        prop_assert!(r.rhs_value >= xf_hull_value(&x, &y, &p) * (1.0 - 1e-9) - 1e-12);
        prop_assert_eq!(r.base_only, r.cut.is_none());
    }

    #[test]
    fn separation_ignores_orientation((x, y, s) in sep_input(8)) {
        let p = Partition::from_signs(&s).unwrap();
        let a = separate(&FractionalPoint { x: x.clone(), y: y.clone(), t: 0.0 }, &p).rhs_value;
        let b = separate(&FractionalPoint { x, y, t: 0.0 }, &p.swapped()).rhs_value;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn separation_ignores_index_order((x, y, s) in sep_input(7), shift in 0..7usize) {
        let n = x.len();
        let k = shift % n;
        let rot = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| v[(i + k) % n]).collect() };
        let rs: Vec<bool> = (0..n).map(|i| s[(i + k) % n]).collect();
        let a = separate(&FractionalPoint { x: x.clone(), y: y.clone(), t: 0.0 }, &Partition::from_signs(&s).unwrap());
        let b = separate(&FractionalPoint { x: rot(&x), y: rot(&y), t: 0.0 }, &Partition::from_signs(&rs).unwrap());
        prop_assert!((a.rhs_value - b.rhs_value).abs() <= 1e-9 * a.rhs_value.abs().max(1.0));
    }

    #[test]
    fn positive_l_is_a_ratio_prefix((x, y) in (1..10usize).prop_flat_map(|n| (interior(n), nonneg(n, 2.0)))) {
        let l = find_l_positive(&x, &y);
        let max_in = l.iter().map(|&i| y[i] / x[i]).fold(f64::NEG_INFINITY, f64::max);
        let min_out = (0..x.len()).filter(|i| !l.contains(i)).map(|i| y[i] / x[i]).fold(f64::INFINITY, f64::min);
        prop_assert!(max_in <= min_out + 1e-12);
    }

    #[test]
    fn generator_invariants(n in 1..15usize, r in 1..4usize, rho in -1.0..1.0f64, delta in 0.0..1.0f64, seed in any::<u64>()) {
        prop_assume!(r <= n);
        let inst = generate_instance(n, r, rho, delta, 2.0, seed).unwrap();
        prop_assert!(inst.d.iter().chain(&inst.b).chain(&inst.a).all(|&v| v >= 0.0));
        prop_assert!((inst.beta - inst.b.iter().sum::<f64>() / n as f64).abs() < 1e-12);
        if rho >= 0.0 {
            prop_assert!(inst.f.iter().all(|&v| v >= 0.0));
        }
        prop_assert_eq!(&inst, &generate_instance(n, r, rho, delta, 2.0, seed).unwrap());
    }

    #[test]
    fn model_text_round_trips(
        bounds in prop::collection::vec((-5.0..5.0f64, 0.0..5.0f64), 1..8),
        rows in prop::collection::vec((prop::collection::vec((0..8usize, -3.0..3.0f64), 1..4), 0..3u8, -2.0..2.0f64), 0..5),
        obj in prop::collection::vec((0..8usize, -1.0..1.0f64), 0..4),
        binary_mask in any::<u8>(),
    ) {
        let n = bounds.len();
        let mut m = ConicModel::new();
        for (k, &(lo, w)) in bounds.iter().enumerate() {
            m.add_var(format!("v{k}"), lo, if w > 4.5 { f64::INFINITY } else { lo + w });
        }
        for k in 0..n {
            if binary_mask >> k & 1 == 1 {
                m.binaries.push(k);
                m.lower[k] = 0.0;
                m.upper[k] = 1.0;
            }
        }
        for (coeffs, sense, rhs) in rows {
            let sense = [Sense::Le, Sense::Eq, Sense::Ge][sense as usize];
            m.add_row(coeffs.into_iter().map(|(j, c)| (j % n, c)).collect(), sense, rhs);
        }
        m.objective = obj.into_iter().map(|(j, c)| (j % n, c)).collect();
        if n >= 3 {
            for k in 0..2 {
                m.lower[k] = m.lower[k].max(0.0);
                m.upper[k] = m.upper[k].max(m.lower[k]);
            }
            m.add_rsoc(0, 1, vec![2]);
        }
        let text = export_model(&m);
        let back = import_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(export_model(&back), text);
    }
}
