//! Worked examples for each stage of the pipeline.

use lgfrob::groebner::{build_ideal, point_multiplication_matrices};
use lgfrob::hm::{
    compare_structures, frobenius_manifold_from_deformation, hm_extend, universal_good_deformation,
    Comparison,
};
use lgfrob::jacobi::{monomial_basis, spectrum, JacobiAlgebra};
use lgfrob::laurent::{add, log_derivative, mul};
use lgfrob::newton::{
    face_critical_point, is_convenient, is_nondegenerate, milnor_number, newton_polyhedron,
    subdiagram_monomials, NondegeneracyReport,
};
use lgfrob::oracle::{graded_dim, jacobi_dim};
use lgfrob::rational::{q, qf};
use lgfrob::structure::{
    build_good_maximal_deformation, build_structure, change_of_lattice_iso, classify_deformation,
    extended_connection, is_lattice, period_map, primitive_map, same_matrices, translate_structure,
};
use lgfrob::{parse_laurent, Error, LaurentPoly, Mat, Poly, Q};

fn lp(s: &str, n: usize) -> LaurentPoly {
    parse_laurent(s, n).unwrap()
}

fn qm(rows: &[&[i64]]) -> Mat<Q> {
    Mat::from_fn(rows.len(), rows[0].len(), |i, j| q(rows[i][j]))
}

#[test]
fn parsing() {
    let f = lp("u1 + u1^-1", 1);
    assert_eq!(f.len(), 2);
    assert_eq!(f.rational_coeff(&[1]), q(1));
    assert_eq!(f.rational_coeff(&[-1]), q(1));
    let g = lp("2/3*u1^2*u2^-1", 2);
    assert_eq!(g.len(), 1);
    assert_eq!(g.rational_coeff(&[2, -1]), qf(2, 3));
    assert!(matches!(
        parse_laurent("u1^", 1),
        Err(Error::Parse { pos: 3, .. })
    ));
}

#[test]
fn ring_operations() {
    assert!(add(&lp("u1", 1), &lp("-u1", 1)).unwrap().is_zero());
    assert_eq!(mul(&lp("u1", 1), &lp("u1^-1", 1)).unwrap(), lp("1", 1));
    assert_eq!(
        mul(&lp("u1 + u2", 2), &lp("u1 - u2", 2)).unwrap(),
        lp("u1^2 - u2^2", 2)
    );
    assert_eq!(
        log_derivative(&lp("u1 + u1^-1", 1), 1).unwrap(),
        lp("u1 - u1^-1", 1)
    );
    assert_eq!(
        log_derivative(&lp("u1*u2^-1", 2), 2).unwrap(),
        lp("-u1*u2^-1", 2)
    );
    assert!(log_derivative(&lp("5", 1), 1).unwrap().is_zero());
}

#[test]
fn newton_polyhedra() {
    let p = newton_polyhedron(&lp("u1 + u1^-1", 1)).unwrap();
    assert_eq!(p.vertices, vec![vec![-1], vec![1]]);
    let mut forms: Vec<Vec<Q>> = p.facets.iter().map(|f| f.form.clone()).collect();
    forms.sort();
    assert_eq!(forms, vec![vec![q(-1)], vec![q(1)]]);

    let p = newton_polyhedron(&lp("u1 + u2 + u1^-1*u2^-1", 2)).unwrap();
    assert_eq!(p.vertices, vec![vec![-1, -1], vec![0, 1], vec![1, 0]]);

    let p = newton_polyhedron(&lp("u1^2 + u1^-2", 1)).unwrap();
    assert_eq!(p.degree_fn().unwrap().nu(&[1]), qf(1, 2));
}

#[test]
fn convenience() {
    assert!(is_convenient(&lp("u1 + u1^-1", 1)));
    assert!(!is_convenient(&lp("u1 + u2", 2)));
    assert!(is_convenient(&lp("u1 + u2 + u1^-1*u2^-1", 2)));
}

#[test]
fn milnor_numbers_and_oracle() {
    for (f, n, mu) in [
        ("u1 + u1^-1", 1, 2),
        ("u1 + u2 + u1^-1*u2^-1", 2, 3),
        ("u1^2 + u1^-2", 1, 4),
    ] {
        let f = lp(f, n);
        assert_eq!(milnor_number(&newton_polyhedron(&f).unwrap()).unwrap(), mu);
        assert_eq!(jacobi_dim(&f).unwrap(), mu as usize);
    }
}

#[test]
fn subdiagram_monomials_examples() {
    let sub = |f: &str, n| {
        subdiagram_monomials(&newton_polyhedron(&lp(f, n)).unwrap().degree_fn().unwrap())
    };
    assert_eq!(sub("u1 + u1^-1", 1), vec![vec![0]]);
    assert_eq!(sub("u1 + u2 + u1^-1*u2^-1", 2), vec![vec![0, 0]]);
    let mut s = sub("u1^2 + u1^-2", 1);
    s.sort();
    assert_eq!(s, vec![vec![-1], vec![0], vec![1]]);
}

#[test]
fn nondegeneracy() {
    assert_eq!(
        is_nondegenerate(&lp("u1 + u1^-1", 1)).unwrap(),
        NondegeneracyReport::NondegenerateExact
    );
    assert_eq!(
        is_nondegenerate(&lp("u1 + u2 + u1^-1*u2^-1", 2)).unwrap(),
        NondegeneracyReport::NondegenerateExact
    );
    let w = face_critical_point(&lp("u1^2 + 2*u1 + 1", 1)).expect("critical point at u1 = -1");
    assert_eq!(w.point, Some(vec!["-1".to_string()]));
    assert!(
        !is_nondegenerate(&lp("u1^2 + 2*u1*u2 + u2^2 + u1^-1*u2^-1", 2))
            .unwrap()
            .is_nondegenerate()
    );
}

#[test]
fn jacobian_ideals() {
    let circle = build_ideal(&lp("u1 + u1^-1", 1)).unwrap();
    assert_eq!(circle.dim(), 2);
    assert_eq!(circle.normal_form(&lp("u1^2", 1)), lp("1", 1));
    assert!(circle.normal_form(&lp("u1 - u1^-1", 1)).is_zero());
    assert_eq!(circle.normal_form(&lp("u1 + u1^-1", 1)), lp("2*u1", 1));

    let plane = build_ideal(&lp("u1 + u2 + u1^-1*u2^-1", 2)).unwrap();
    assert!(plane.is_member(&lp("u1 - u2", 2)));
    assert!(plane.is_member(&lp("u1^3 - 1", 2)));
    // a constant direction does not change the ideal
    let big_f = lgfrob::parse_laurent_params("u1 + u1^-1 + x1", 1, 1).unwrap();
    for a in [q(-3), qf(1, 2), q(7)] {
        let shifted = build_ideal(&big_f.at_params(&[a])).unwrap();
        assert_eq!(shifted.dim(), 2);
        assert!(shifted.is_member(&lp("u1^2 - 1", 1)));
    }
}

#[test]
fn monomial_bases_and_spectra() {
    let (b, a) = monomial_basis(&lp("u1 + u1^-1", 1)).unwrap();
    assert_eq!(b, vec![vec![0], vec![1]]);
    assert_eq!(a, vec![q(0), q(1)]);
    let (_, a) = monomial_basis(&lp("u1 + u2 + u1^-1*u2^-1", 2)).unwrap();
    assert_eq!(a, vec![q(0), q(1), q(2)]);
    assert_eq!(
        spectrum(&lp("u1^2 + u1^-2", 1)).unwrap(),
        vec![q(0), qf(1, 2), qf(1, 2), q(1)]
    );
    let f = lp("u1 + u1^-1", 1);
    assert_eq!(graded_dim(&f, &q(0)).unwrap(), 1);
    assert_eq!(graded_dim(&f, &q(1)).unwrap(), 1);
    assert_eq!(graded_dim(&f, &qf(1, 2)).unwrap(), 0);
}

#[test]
fn residue_pairings() {
    let g = JacobiAlgebra::new(&lp("u1 + u1^-1", 1))
        .unwrap()
        .residue_pairing()
        .unwrap();
    assert_eq!(g, qm(&[&[0, 1], &[1, 0]]));
    let g = JacobiAlgebra::new(&lp("u1 + u2 + u1^-1*u2^-1", 2))
        .unwrap()
        .residue_pairing()
        .unwrap();
    assert_eq!(g, qm(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]));
}

#[test]
fn deformation_classes() {
    let circle = lp("u1 + u1^-1", 1);
    let d = classify_deformation(&circle, &[lp("1", 1)]).unwrap();
    assert!(d.injective && d.maximal && !d.surjective);
    let quartic = lp("u1^2 + u1^-2", 1);
    let d = classify_deformation(&quartic, &[lp("1", 1), lp("u1", 1), lp("u1^-1", 1)]).unwrap();
    assert!(d.injective && d.maximal && d.surjective);
    let d = classify_deformation(&circle, &[lp("1", 1), lp("1", 1)]).unwrap();
    assert!(!d.injective);
    assert!(is_lattice(&[lp("u1", 1)], &circle).unwrap());
    assert!(!is_lattice(&[lp("1", 1)], &circle).unwrap());
}

#[test]
fn good_maximal_deformations() {
    assert_eq!(
        build_good_maximal_deformation(&lp("u1 + u1^-1", 1))
            .unwrap()
            .gs,
        vec![lp("1", 1)]
    );
    let mut gs = build_good_maximal_deformation(&lp("u1^2 + u1^-2", 1))
        .unwrap()
        .gs;
    gs.sort_by_key(|g| g.to_text());
    let mut want = vec![lp("1", 1), lp("u1", 1), lp("u1^-1", 1)];
    want.sort_by_key(|g| g.to_text());
    assert_eq!(gs, want);
    let p2 = lp("u1 + u2 + u1^-1*u2^-1", 2);
    assert_eq!(
        build_good_maximal_deformation(&p2).unwrap().gs,
        vec![lp("1", 2)]
    );
}

fn circle_structure(g: &str) -> lgfrob::structure::FrobTypeStructure {
    let f = lp("u1 + u1^-1", 1);
    build_structure(&f, &[lp(g, 1)], None).unwrap()
}

#[test]
fn period_and_primitive_maps() {
    let origin = [q(0)];
    // u1 lies on the Newton boundary, so only the point data exist: -C e_1 at a = 0
    let (_, cs) = point_multiplication_matrices(&lp("u1 + u1^-1", 1), &[lp("u1", 1)]).unwrap();
    assert_eq!(
        cs[0].column(0).iter().map(|v| -v).collect::<Vec<_>>(),
        vec![q(0), q(1)]
    );
    assert_eq!(
        period_map(&circle_structure("1"), &origin),
        qm(&[&[1], &[0]])
    );
    let pm = primitive_map(&circle_structure("1")).unwrap();
    assert_eq!(pm.gamma, vec![Poly::var(1, 0).scale(&q(-1)), Poly::zero(1)]);
}

#[test]
fn translation_and_lattice_change() {
    let s = circle_structure("1");
    assert!(same_matrices(&translate_structure(&s, &[q(0)]), &s));
    let f = lp("u1^2 + u1^-2", 1);
    let d1 = classify_deformation(&f, &[lp("1", 1), lp("u1", 1), lp("u1^-1", 1)]).unwrap();
    let d2 =
        classify_deformation(&f, &[lp("1", 1), lp("u1 + u1^-1", 1), lp("u1 - u1^-1", 1)]).unwrap();
    assert_eq!(change_of_lattice_iso(&d1, &d1).unwrap(), Mat::identity(3));
    assert_eq!(
        change_of_lattice_iso(&d1, &d2).unwrap(),
        qm(&[&[1, 0, 0], &[0, 1, 1], &[0, 1, -1]])
    );
}

#[test]
fn extended_connection_of_the_circle() {
    let c = extended_connection(&circle_structure("1"), &[q(0)]);
    assert_eq!(c.b0, qm(&[&[0, 2], &[2, 0]]));
    assert_eq!(c.b_inf, qm(&[&[0, 0], &[0, 1]]));
    assert!(c
        .to_text()
        .starts_with("-(tau*[[0,2],[2,0]] + [[0,0],[0,1]])*dtau/tau"));
}

#[test]
fn extension_without_new_variables_is_the_identity() {
    let s = circle_structure("1");
    let h = hm_extend(&s, &[Poly::zero(1), Poly::zero(1)], 6).unwrap();
    assert_eq!(h.ell, 0);
    assert_eq!(h.b0, s.b0);
    assert_eq!(h.c, s.c);
}

#[test]
fn germ_compared_with_itself() {
    let s = circle_structure("1");
    let g =
        frobenius_manifold_from_deformation(&universal_good_deformation(&s, 6).unwrap()).unwrap();
    match compare_structures(&g, &g).unwrap() {
        Comparison::Isomorphic { perm, signs } => {
            assert_eq!(perm, vec![0, 1]);
            assert_eq!(signs, vec![1, 1]);
        }
        other => panic!("{other:?}"),
    }
}
