//! Independent oracles for the group law and the ε chart.
//!
//! The group law is recomputed as `log(exp X · exp Y)` in the truncated free
//! associative algebra on two letters, then projected to the Lie algebra with
//! `w ↦ [w_1,[w_2,…]]/|w|`. The Heisenberg chart is recomputed with 3×3
//! unipotent matrices.

use std::collections::BTreeMap;

use carnot_core::catalog;
use carnot_core::group::StructureConstants;
use carnot_core::rational::{int, rat};
use carnot_core::{dynkin_product, epsilon, Frame, NilpotentGroup, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

type Series = BTreeMap<Vec<u8>, Rational>;

fn mul(a: &Series, b: &Series, max_len: usize) -> Series {
    let mut out = Series::new();
    for (u, cu) in a {
        for (v, cv) in b {
            if u.len() + v.len() > max_len {
                continue;
            }
            let mut w = u.clone();
            w.extend(v);
            *out.entry(w).or_insert_with(Rational::zero) += cu * cv;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn add_scaled(acc: &mut Series, s: &Series, c: &Rational) {
    for (w, v) in s {
        *acc.entry(w.clone()).or_insert_with(Rational::zero) += v * c;
    }
    acc.retain(|_, c| !c.is_zero());
}

fn exp_letter(letter: u8, max_len: usize) -> Series {
    let mut out = Series::new();
    let mut fact = Rational::one();
    for k in 0..=max_len {
        if k > 0 {
            fact *= int(k as i64);
        }
        out.insert(vec![letter; k], Rational::one() / &fact);
    }
    out
}

fn bch_words(max_len: usize) -> Series {
    let mut e = mul(&exp_letter(0, max_len), &exp_letter(1, max_len), max_len);
    e.remove(&Vec::new());
    let mut z = Series::new();
    let mut power = e.clone();
    for k in 1..=max_len {
        let sign = if k % 2 == 1 { int(1) } else { int(-1) };
        add_scaled(&mut z, &power, &(sign / int(k as i64)));
        power = mul(&power, &e, max_len);
    }
    z
}

fn oracle_product(l: &StructureConstants, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    let r = *l.weights().iter().max().unwrap() as usize;
    let mut out = vec![Rational::zero(); x.len()];
    for (word, c) in bch_words(r) {
        let letter = |b: u8| if b == 0 { x.to_vec() } else { y.to_vec() };
        let mut v = letter(*word.last().unwrap());
        for &b in word.iter().rev().skip(1) {
            v = l.bracket(&letter(b), &v).unwrap();
        }
        let scale = c / int(word.len() as i64);
        for (o, vi) in out.iter_mut().zip(v) {
            *o += vi * &scale;
        }
    }
    out
}

fn small() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(small(), n)
}

fn algebra_and_pair() -> impl Strategy<Value = (String, Vec<Rational>, Vec<Rational>)> {
    prop::sample::select(catalog::ALGEBRAS.to_vec()).prop_flat_map(|name| {
        let n = catalog::lookup(name).unwrap().algebra.dim();
        (Just(name.to_string()), point(n), point(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn dynkin_product_matches_free_bch((name, x, y) in algebra_and_pair()) {
        let l = catalog::lookup(&name).unwrap().algebra;
        prop_assert_eq!(dynkin_product(&x, &y, &l).unwrap(), oracle_product(&l, &x, &y));
    }

    #[test]
    fn heisenberg_chart_matches_matrix_group(a in point(3), x in point(3)) {
        let h = catalog::lookup("heisenberg_3").unwrap().frame.at(a.clone()).unwrap();
        let eps = epsilon(&h).unwrap().apply(&x).unwrap();
        let neg: Vec<Rational> = a.iter().map(|v| -v).collect();
        prop_assert_eq!(eps, matrix_product(&neg, &x));
    }
}

/// `e_1 = E_12`, `e_2 = E_23`, `e_3 = E_13`, so `[e_1, e_2] = e_3`.
fn matrix_product(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    // exp(N) = 1 + N + N²/2 with N² = n1 n2 E_13.
    let exp = |v: &[Rational]| (v[0].clone(), v[1].clone(), &v[2] + &v[0] * &v[1] / int(2));
    let (a1, a2, a3) = exp(x);
    let (b1, b2, b3) = exp(y);
    // Product of unipotent matrices [[1,a1,a3],[0,1,a2],[0,0,1]].
    let (u1, u2, u3) = (&a1 + &b1, &a2 + &b2, &a3 + &b3 + &a1 * &b2);
    // log(U) = (U − 1) − (U − 1)²/2.
    vec![u1.clone(), u2.clone(), &u3 - &u1 * &u2 / int(2)]
}

#[test]
fn heisenberg_product_example() {
    let g = NilpotentGroup::new(catalog::lookup("heisenberg_3").unwrap().algebra).unwrap();
    let p = g.product(&[int(1), int(0), int(0)], &[int(0), int(1), int(0)]).unwrap();
    assert_eq!(p, vec![int(1), int(1), rat(1, 2)]);
    assert_eq!(p, matrix_product(&[int(1), int(0), int(0)], &[int(0), int(1), int(0)]));
}

#[test]
fn heisenberg_epsilon_example() {
    let h = catalog::lookup("heisenberg_3").unwrap().frame;
    let a = vec![int(1), int(2), int(3)];
    let eps = epsilon(&h.at(a).unwrap()).unwrap();
    let expected = matrix_product(&[int(-1), int(-2), int(-3)], &[int(4), int(6), int(10)]);
    assert_eq!(expected, vec![int(3), int(4), int(8)]);
    assert_eq!(eps.apply(&[int(4), int(6), int(10)]).unwrap(), expected);
}

#[test]
fn free_bch_low_order_terms() {
    // X + Y + [X,Y]/2 + ([X,[X,Y]] + [Y,[Y,X]])/12 as words.
    let z = bch_words(3);
    assert_eq!(z[&vec![0]], int(1));
    assert_eq!(z[&vec![0, 1]], rat(1, 2));
    assert_eq!(z[&vec![1, 0]], rat(-1, 2));
    assert_eq!(z[&vec![0, 0, 1]], rat(1, 12));
    assert_eq!(z[&vec![0, 1, 0]], rat(-1, 6));
}

#[test]
fn group_frame_at_origin_has_identity_chart() {
    for name in catalog::ALGEBRAS {
        let e = catalog::lookup(name).unwrap();
        let f: &Frame = &e.frame;
        assert!(epsilon(f).unwrap().forward().is_identity(), "{name}");
    }
}
