use lgfrob::groebner::build_ideal;
use lgfrob::jacobi::JacobiAlgebra;
use lgfrob::laurent::{add, log_derivative, mul};
use lgfrob::newton::newton_polyhedron;
use lgfrob::rational::{fmt_q, parse_q, q, qf};
use lgfrob::series::{Series, Truncation};
use lgfrob::{parse_laurent, LaurentPoly, Poly, Ring};
use proptest::prelude::*;

fn laurent(n: usize, span: i32) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((prop::collection::vec(-span..=span, n), -6i64..=6), 0..5).prop_map(
        move |terms| {
            let mut f = LaurentPoly::zero(n, 0);
            for (e, c) in terms {
                f.add_term(e, Poly::constant(0, q(c)));
            }
            f
        },
    )
}

fn plane() -> LaurentPoly {
    parse_laurent("u1 + u2 + u1^-1*u2^-1", 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in laurent(2, 3), b in laurent(2, 3), c in laurent(2, 3)) {
        prop_assert_eq!(add(&a, &b).unwrap(), add(&b, &a).unwrap());
        prop_assert_eq!(mul(&a, &b).unwrap(), mul(&b, &a).unwrap());
        prop_assert_eq!(
            mul(&mul(&a, &b).unwrap(), &c).unwrap(),
            mul(&a, &mul(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            mul(&a, &add(&b, &c).unwrap()).unwrap(),
            add(&mul(&a, &b).unwrap(), &mul(&a, &c).unwrap()).unwrap()
        );
        let one = LaurentPoly::one(2, 0);
        prop_assert_eq!(mul(&a, &one).unwrap(), a.clone());
        prop_assert!(add(&a, &a.scale(&q(-1))).unwrap().is_zero());
    }

    #[test]
    fn print_then_parse(a in laurent(3, 4)) {
        prop_assert_eq!(parse_laurent(&a.to_text(), 3).unwrap(), a);
    }

    #[test]
    fn log_derivative_is_a_derivation(a in laurent(2, 3), b in laurent(2, 3), i in 1usize..=2) {
        let lhs = log_derivative(&mul(&a, &b).unwrap(), i).unwrap();
        let rhs = add(
            &mul(&log_derivative(&a, i).unwrap(), &b).unwrap(),
            &mul(&a, &log_derivative(&b, i).unwrap()).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn newton_degree_is_subadditive(
        a in prop::collection::vec(-5i32..=5, 2),
        b in prop::collection::vec(-5i32..=5, 2),
        k in 0i32..4,
    ) {
        for f in ["u1 + u2 + u1^-1*u2^-1", "u1 + u2 + u1^-1 + u2^-1", "u1^2 + u2 + u1^-1*u2^-2"] {
            let nu = newton_polyhedron(&parse_laurent(f, 2).unwrap()).unwrap().degree_fn().unwrap();
            let s: Vec<i32> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            prop_assert!(nu.nu(&s) <= nu.nu(&a) + nu.nu(&b));
            let ka: Vec<i32> = a.iter().map(|x| k * x).collect();
            prop_assert_eq!(nu.nu(&ka), nu.nu(&a) * q(k as i64));
            prop_assert!(nu.nu(&a) >= q(0));
            prop_assert_eq!(nu.nu(&a) == q(0), a.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn multiplication_matrices_represent_the_algebra(a in laurent(2, 2), b in laurent(2, 2)) {
        let alg = JacobiAlgebra::new(&plane()).unwrap();
        let ab = mul(&a, &b).unwrap();
        let lhs = alg.multiplication_matrix(&ab).unwrap();
        let rhs = alg.multiplication_matrix(&a).unwrap().times(&alg.multiplication_matrix(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn graded_normal_form_agrees_with_groebner(a in laurent(2, 3)) {
        let f = plane();
        let alg = JacobiAlgebra::new(&f).unwrap();
        let ideal = build_ideal(&f).unwrap();
        let nf = alg.normal_form(&a).unwrap();
        prop_assert!(ideal.is_member(&add(&a, &nf.scale(&q(-1))).unwrap()));
    }

    #[test]
    fn series_inverse(coeffs in prop::collection::vec(-4i64..=4, 6), head in 1i64..5) {
        let t = Truncation::new(vec![1, 1], 5);
        let exps = [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2], [3, 0]];
        let mut p = Poly::constant(2, q(head));
        for (e, c) in exps.iter().zip(&coeffs) {
            p.add_term(e.to_vec(), q(*c));
        }
        let s = Series::new(&p, &t);
        let inv = s.inverse().unwrap();
        prop_assert_eq!(s.times(&inv).poly().clone(), Poly::one(2));
    }

    #[test]
    fn rationals_print_and_parse(n in -1000i64..1000, d in 1i64..1000) {
        let x = qf(n, d);
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }
}
