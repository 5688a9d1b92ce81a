mod common;

use common::{act_int, act_s3, compose, int_points, s3_perm, s3_points, sign, Perm, E};
use num_bigint::BigInt;
use orbitcalc_core::wreath::{
    semidirect_from_section, splits_as_direct_product, AbelianImage, FiniteGroup, OrderOf, WreathElement as W,
    WreathShape,
};
use orbitcalc_core::WreathError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn zwr(m: usize) -> WreathShape {
    WreathShape::wr_z(WreathShape::integers(), m)
}

fn s3wr(m: usize) -> WreathShape {
    WreathShape::wr_z(WreathShape::finite(FiniteGroup::s3()), m)
}

fn ints(xs: &[i64], k: i64) -> W {
    W::Wr { coords: xs.iter().map(|&x| W::Int(BigInt::from(x))).collect(), shift: BigInt::from(k) }
}

fn fins(xs: &[usize], k: i64) -> W {
    W::Wr { coords: xs.iter().map(|&x| W::Fin(x)).collect(), shift: BigInt::from(k) }
}

fn ints2(xs: &[i64], k: i64, l: i64) -> W {
    W::Wr2 { coords: xs.iter().map(|&x| W::Int(BigInt::from(x))).collect(), shift: [BigInt::from(k), BigInt::from(l)] }
}

const S3_S: usize = 3;
const S3_R: usize = 1;

#[test]
fn multiplication_examples() {
    let g = zwr(2);
    assert_eq!(g.mul(&ints(&[1, 2], 1), &ints(&[3, 4], 0)).unwrap(), ints(&[5, 5], 1));
    let g1 = zwr(1);
    assert_eq!(g1.mul(&ints(&[3], 2), &ints(&[4], -5)).unwrap(), ints(&[7], -3));
    let g2 = WreathShape::wr_z2(WreathShape::integers(), 2, 2);
    assert_eq!(g2.mul(&ints2(&[0, 0, 0, 0], 1, 0), &ints2(&[1, 2, 3, 4], 0, 0)).unwrap(), ints2(&[3, 4, 1, 2], 1, 0));
    assert_eq!(g.inv(&ints(&[1, 2], 1)).unwrap(), ints(&[-2, -1], -1));
    assert_eq!(g.inv(&g.identity()).unwrap(), g.identity());
    let z3 = WreathShape::finite(FiniteGroup::cyclic(3));
    assert_eq!(z3.inv(&W::Fin(2)).unwrap(), W::Fin(1));
}

#[test]
fn garside_elements() {
    assert_eq!(zwr(2).garside().unwrap(), vec![ints(&[0, 0], 2)]);
    assert_eq!(s3wr(3).garside().unwrap(), vec![fins(&[0, 0, 0], 3)]);
    assert!(WreathShape::integers().garside().is_err());
}

#[test]
fn central_examples() {
    let g = s3wr(2);
    assert!(g.is_central(&fins(&[0, 0], 2)).unwrap());
    assert!(!g.is_central(&fins(&[0, 0], 1)).unwrap());
    assert!(zwr(2).is_central(&ints(&[5, 5], 4)).unwrap());
}

#[test]
fn abelianization_examples() {
    let g = zwr(2);
    assert_eq!(
        g.abelianize(&ints(&[1, 2], 3)).unwrap(),
        AbelianImage::Wr { base: Box::new(AbelianImage::Int(BigInt::from(3))), shift: BigInt::from(3) }
    );
    let h = s3wr(2);
    // two transpositions multiply to an even permutation
    let img = h.abelianize(&fins(&[3, 4], 0)).unwrap();
    assert_eq!(img, h.ab_identity().unwrap());
    assert_eq!(h.abelianize(&h.identity()).unwrap(), h.ab_identity().unwrap());
    assert!(h.in_derived(&fins(&[S3_S, S3_S], 0)).unwrap());
    assert!(g.in_derived(&ints(&[1, -1], 0)).unwrap());
    assert!(!g.in_derived(&ints(&[0, 0], 2)).unwrap());
}

#[test]
fn powers_and_orders() {
    let g = zwr(2);
    assert_eq!(g.pow(&ints(&[0, 0], 2), &BigInt::from(3)).unwrap(), ints(&[0, 0], 6));
    assert_eq!(g.pow(&ints(&[1, -1], 0), &BigInt::from(2)).unwrap(), ints(&[2, -2], 0));
    assert_eq!(g.order_of(&ints(&[1, 2], 1), 12).unwrap(), OrderOf::ExceedsBound);
    let h = s3wr(2);
    assert_eq!(h.order_of(&fins(&[S3_R, 0], 0), 12).unwrap(), OrderOf::Finite(3));
    let x = fins(&[S3_R, S3_S], 1);
    let inv = h.pow(&x, &BigInt::from(-1)).unwrap();
    assert_eq!(h.mul(&x, &inv).unwrap(), h.identity());
}

#[test]
fn direct_product_criterion() {
    let z6 = FiniteGroup::cyclic(6);
    assert!(splits_as_direct_product(&z6, &[vec![0, 3], vec![0, 2, 4]]).unwrap());
    let s3 = FiniteGroup::s3();
    assert!(!splits_as_direct_product(&s3, &[vec![0, 1, 2], vec![0, 3]]).unwrap());
    assert!(splits_as_direct_product(&s3, &[vec![0], (0..6).collect()]).unwrap());
    assert!(matches!(splits_as_direct_product(&s3, &[vec![0, 3, 4]]), Err(WreathError::Subgroup(_))));
    // pairwise intersections are trivial but the three subgroups do not split
    let klein = FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
    let subs: Vec<Vec<usize>> = (1..4).map(|a| vec![0, a]).collect();
    assert!(!splits_as_direct_product(&klein, &subs).unwrap());
}

#[test]
fn sections_rebuild_semidirect_products() {
    let z2 = FiniteGroup::cyclic(2);
    let g = FiniteGroup::direct_product(&z2, &FiniteGroup::cyclic(3));
    // product indices are `a·3 + b` for `a ∈ Z2`, `b ∈ Z3`
    let p: Vec<usize> = (0..g.order()).map(|x| x / 3).collect();
    let s = [0, 3];
    assert!(semidirect_from_section(&g, &z2, &p, &s).unwrap().is_isomorphism());

    let s3 = FiniteGroup::s3();
    let p: Vec<usize> = (0..6).map(|a| usize::from(a >= 3)).collect();
    let report = semidirect_from_section(&s3, &z2, &p, &[0, S3_S]).unwrap();
    assert!(report.is_isomorphism());
    assert_eq!(report.kernel.len(), 3);

    let z4 = FiniteGroup::cyclic(4);
    let p: Vec<usize> = (0..4).map(|a| a % 2).collect();
    assert!(matches!(semidirect_from_section(&z4, &z2, &p, &[0, 1]), Err(WreathError::Section(_))));
}

#[test]
fn tables_round_trip_through_csv() {
    let s3 = FiniteGroup::s3();
    let back = FiniteGroup::from_csv(&s3.to_csv()).unwrap();
    assert_eq!(back.order(), 6);
    for a in 0..6 {
        for b in 0..6 {
            assert_eq!(back.name(back.mul(a, b)), s3.name(s3.mul(a, b)));
        }
    }
    assert!(matches!(FiniteGroup::from_csv("e,a\ne,a\na,a\n"), Err(WreathError::Table(_))));
}

#[test]
fn element_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for shape in [zwr(3), s3wr(2), WreathShape::wr_z2(WreathShape::integers(), 2, 2), WreathShape::wr_z(zwr(2), 2)] {
        for _ in 0..50 {
            let x = shape.random_element(&mut rng, 5);
            let text = shape.display(&x);
            assert_eq!(shape.parse_element(&text).unwrap(), x, "{text}");
        }
    }
    assert!(zwr(2).parse_element("(1,2,3; 0)").is_err());
}

// ---------------------------------------------------------------------------
// Agreement with the faithful action

fn same_int_action(x: &W, y: &W, m: usize, n: Option<usize>) -> bool {
    int_points(m, n).into_iter().all(|p| act_int(x, m, n, p) == act_int(y, m, n, p))
}

#[test]
fn products_match_the_action_on_integer_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (shape, m, n) in [(zwr(2), 2, None), (zwr(3), 3, None), (WreathShape::wr_z2(WreathShape::integers(), 2, 2), 2, Some(2))] {
        for _ in 0..500 {
            let x = shape.random_element(&mut rng, 6);
            let y = shape.random_element(&mut rng, 6);
            let xy = shape.mul(&x, &y).unwrap();
            for p in int_points(m, n) {
                assert_eq!(act_int(&xy, m, n, p), act_int(&x, m, n, act_int(&y, m, n, p)));
            }
            let xi = shape.inv(&x).unwrap();
            assert!(same_int_action(&shape.mul(&x, &xi).unwrap(), &shape.identity(), m, n));
        }
    }
}

#[test]
fn products_match_the_action_on_s3() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let shape = s3wr(2);
    for _ in 0..500 {
        let x = shape.random_element(&mut rng, 6);
        let y = shape.random_element(&mut rng, 6);
        let xy = shape.mul(&x, &y).unwrap();
        for p in s3_points(2) {
            assert_eq!(act_s3(&xy, 2, p), act_s3(&x, 2, act_s3(&y, 2, p)));
        }
    }
    // the table is the permutation product
    let s3 = FiniteGroup::s3();
    for a in 0..6 {
        for b in 0..6 {
            assert_eq!(s3_perm(s3.mul(a, b)), compose(s3_perm(a), s3_perm(b)));
        }
    }
}

fn s3_elements(shift: i64) -> impl Iterator<Item = W> {
    (-shift..=shift).flat_map(|k| (0..6).flat_map(move |a| (0..6).map(move |b| fins(&[a, b], k))))
}

#[test]
fn center_matches_commutation_exhaustively() {
    let shape = s3wr(2);
    let gens = [fins(&[S3_R, 0], 0), fins(&[S3_S, 0], 0), fins(&[0, 0], 1)];
    let mut seen = 0;
    for x in s3_elements(6) {
        let W::Wr { coords, shift } = &x else { unreachable!() };
        let oracle_commutes = gens.iter().all(|g| {
            let a = shape.mul(&x, g).unwrap();
            let b = shape.mul(g, &x).unwrap();
            s3_points(2).into_iter().all(|p| act_s3(&a, 2, p) == act_s3(&b, 2, p))
        });
        let closed = coords[0] == coords[1] && coords[0] == W::Fin(0) && common::big(shift) % 2 == 0;
        assert_eq!(shape.is_central(&x).unwrap(), oracle_commutes, "{}", shape.display(&x));
        assert_eq!(shape.is_central_closed_form(&x).unwrap(), closed, "{}", shape.display(&x));
        assert_eq!(oracle_commutes, closed);
        seen += 1;
    }
    assert_eq!(seen, 36 * 13);
}

fn ab_oracle(x: &W) -> (i8, i64) {
    let W::Wr { coords, shift } = x else { unreachable!() };
    let prod = coords.iter().fold(E, |acc: Perm, c| {
        let W::Fin(a) = c else { unreachable!() };
        compose(acc, s3_perm(*a))
    });
    (sign(prod), common::big(shift))
}

#[test]
fn derived_subgroup_is_the_abelianization_kernel() {
    let shape = s3wr(2);
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for x in s3_elements(4) {
        let (sg, k) = ab_oracle(&x);
        let in_kernel = k == 0 && sg == 1;
        assert_eq!(shape.in_derived(&x).unwrap(), in_kernel);
        assert_eq!(shape.abelianize(&x).unwrap() == shape.ab_identity().unwrap(), in_kernel);
    }
    for _ in 0..300 {
        let x = shape.random_element(&mut rng, 4);
        let y = shape.random_element(&mut rng, 4);
        let xi = shape.inv(&x).unwrap();
        let yi = shape.inv(&y).unwrap();
        let c = [&x, &y, &xi, &yi].iter().skip(1).fold(x.clone(), |acc, z| shape.mul(&acc, z).unwrap());
        assert!(shape.in_derived(&c).unwrap());
    }
}

#[test]
fn shape_has_no_torsion_in_small_box() {
    let shape = zwr(2);
    let mut checked = 0;
    for a in -3..=3 {
        for b in -3..=3 {
            for k in -3..=3 {
                if (a, b, k) == (0, 0, 0) {
                    continue;
                }
                let x = ints(&[a, b], k);
                assert_eq!(shape.order_of(&x, 12).unwrap(), OrderOf::ExceedsBound);
                let mut acc = x.clone();
                for _ in 1..=12 {
                    assert!(!same_int_action(&acc, &shape.identity(), 2, None));
                    acc = shape.mul(&acc, &x).unwrap();
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 342);
}

fn shapes() -> Vec<WreathShape> {
    vec![zwr(2), zwr(3), s3wr(2), WreathShape::wr_z2(WreathShape::integers(), 2, 2), WreathShape::wr_z(s3wr(2), 2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(seed in any::<u64>(), which in 0usize..5) {
        let shape = &shapes()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (shape.random_element(&mut rng, 9), shape.random_element(&mut rng, 9), shape.random_element(&mut rng, 9));
        let e = shape.identity();
        prop_assert_eq!(shape.mul(&shape.mul(&x, &y).unwrap(), &z).unwrap(), shape.mul(&x, &shape.mul(&y, &z).unwrap()).unwrap());
        prop_assert_eq!(shape.mul(&x, &e).unwrap(), x.clone());
        prop_assert_eq!(shape.mul(&e, &x).unwrap(), x.clone());
        let xi = shape.inv(&x).unwrap();
        prop_assert_eq!(shape.mul(&x, &xi).unwrap(), e.clone());
        prop_assert_eq!(shape.mul(&xi, &x).unwrap(), e);
    }

    #[test]
    fn garside_elements_are_central(seed in any::<u64>(), which in 0usize..5) {
        let shape = &shapes()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in shape.garside().unwrap() {
            for _ in 0..5 {
                let x = shape.random_element(&mut rng, 9);
                prop_assert_eq!(shape.mul(&g, &x).unwrap(), shape.mul(&x, &g).unwrap());
            }
            prop_assert!(shape.is_central(&g).unwrap());
        }
    }

    #[test]
    fn abelianization_and_shift_are_homomorphisms(seed in any::<u64>(), which in 0usize..5) {
        let shape = &shapes()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = shape.random_element(&mut rng, 9);
        let y = shape.random_element(&mut rng, 9);
        let xy = shape.mul(&x, &y).unwrap();
        let lhs = shape.abelianize(&xy).unwrap();
        let rhs = shape.ab_add(&shape.abelianize(&x).unwrap(), &shape.abelianize(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let sx = shape.shift_of(&x);
        let sy = shape.shift_of(&y);
        let sum: Vec<BigInt> = sx.iter().zip(&sy).map(|(a, b)| a + b).collect();
        prop_assert_eq!(shape.shift_of(&xy), sum);
    }
}
