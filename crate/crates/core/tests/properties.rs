//! Randomized invariants.

use cfstat::matchstats::{matching_stat_totals, Matching};
use cfstat::mpoly::{Indeterminate, Monomial, MultiPoly, Substitution};
use cfstat::paths::{
    check_biane_inversion, check_biane_label_lemma, check_fz_inversion, check_fz_label_lemma,
    check_height_lemma, check_inverse_symmetry, check_sp_label_lemma, decode, encode, Bijection,
    PathObject,
};
use cfstat::permstats::{perm_index_profile, perm_stat_totals, Permutation};
use cfstat::series::{
    contract_s_to_j, expand_jfraction_depth, expand_jfraction_rational, expand_sfraction_depth,
    indecomposable_series, jfraction_from_series, series_reciprocal, FractionSpec, PowerSeries,
    SFractionSpec,
};
use cfstat::setpartstats::{
    sp_index_profile, sp_reverse, sp_stat_totals, ElementClass, SetPartition,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((-4i64..=4, prop::array::uniform3(0u32..3)), 0..5).prop_map(|terms| {
        terms.into_iter().fold(MultiPoly::zero(), |acc, (c, e)| {
            let m =
                Monomial::from_factors(VARS.iter().zip(e).map(|(v, k)| (Indeterminate::var(v), k)));
            &acc + &MultiPoly::term(m, BigInt::from(c))
        })
    })
}

fn perm_strategy(max: usize) -> impl Strategy<Value = Permutation> {
    (0..=max)
        .prop_flat_map(|n| Just((1..=n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|w| Permutation::from_oneline(&w).unwrap())
}

fn setpart_strategy(max: usize) -> impl Strategy<Value = SetPartition> {
    prop::collection::vec(0usize..64, 0..=max).prop_map(|raw| {
        // fold arbitrary labels into a restricted growth word
        let mut w = Vec::with_capacity(raw.len());
        let mut top = 0;
        for r in raw {
            let b = r % (top + 1) + 1;
            top = top.max(b);
            w.push(b);
        }
        SetPartition::from_rgw(&w).unwrap()
    })
}

fn matching_strategy(max_pairs: usize) -> impl Strategy<Value = Matching> {
    (0..=max_pairs)
        .prop_flat_map(|n| Just((1..=2 * n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|w| {
            let pairs: Vec<(usize, usize)> = w
                .chunks(2)
                .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
                .collect();
            Matching::from_pairs(&pairs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn substitution_is_a_ring_homomorphism(a in poly_strategy(), b in poly_strategy(), sx in poly_strategy(), sy in poly_strategy()) {
        let s = Substitution::new().set(Indeterminate::var("x"), sx).set(Indeterminate::var("y"), sy);
        prop_assert_eq!((&a * &b).substitute(&s), &a.substitute(&s) * &b.substitute(&s));
        prop_assert_eq!((&a + &b).substitute(&s), &a.substitute(&s) + &b.substitute(&s));
    }

    #[test]
    fn print_then_parse(a in poly_strategy()) {
        prop_assert_eq!(MultiPoly::parse(&a.to_string()).unwrap(), a.clone());
        prop_assert_eq!(MultiPoly::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn contraction_consistency(cs in prop::collection::vec((0i64..4, 0i64..3), 13)) {
        let alpha = SFractionSpec::new(move |n| {
            let (c, d) = cs[(n - 1) % cs.len()];
            &MultiPoly::constant(c) + &(&MultiPoly::constant(d) * &MultiPoly::var("a"))
        });
        let order = 12;
        let s = FractionSpec::S(alpha.clone()).expand(order);
        let j = FractionSpec::J(contract_s_to_j(&alpha)).expand(order);
        prop_assert_eq!(s.coeffs(), j.coeffs());
        let fast = FractionSpec::S(alpha).expand_fast(order);
        prop_assert_eq!(fast.coeffs(), s.coeffs());
    }

    #[test]
    fn truncation_stability(cs in prop::collection::vec(-3i64..4, 20), order in 0usize..9) {
        let c2 = cs.clone();
        let alpha = SFractionSpec::new(move |n| MultiPoly::constant(cs[n % cs.len()]));
        let d = order + 1;
        let (a, b) = (expand_sfraction_depth(&alpha, order, d), expand_sfraction_depth(&alpha, order, d + 1));
        prop_assert_eq!(a.coeffs(), b.coeffs());
        let j = cfstat::series::JFractionSpec::new(
            move |n| MultiPoly::constant(c2[n % c2.len()]),
            |n| MultiPoly::constant(n as i64 + 1),
        );
        let d = order / 2 + 1;
        let (a, b) = (expand_jfraction_depth(&j, order, d), expand_jfraction_depth(&j, order, d + 1));
        prop_assert_eq!(a.coeffs(), b.coeffs());
    }

    #[test]
    fn peel_then_expand(k in 1usize..4, raw in prop::collection::vec((-5i64..=5, 1i64..=4), 8), bs in prop::collection::vec((1i64..=5, 1i64..=3), 8)) {
        let r = |(n, d): (i64, i64)| BigRational::new(BigInt::from(n), BigInt::from(d));
        let gamma: Vec<BigRational> = raw[..=k].iter().copied().map(r).collect();
        let mut beta = vec![BigRational::from_integer(BigInt::from(0))];
        beta.extend(bs[..k].iter().copied().map(r));
        let s = expand_jfraction_rational(&gamma, &beta, 2 * k + 1);
        let lv = jfraction_from_series(&s, k).unwrap();
        prop_assert_eq!(&lv.gamma[..], &gamma[..]);
        prop_assert_eq!(&lv.beta[1..], &beta[1..]);
    }

    #[test]
    fn renewal_inversion(gs in prop::collection::vec(-3i64..4, 6)) {
        let mut g = vec![MultiPoly::zero()];
        g.extend(gs.iter().map(|&c| MultiPoly::constant(c)));
        let g = PowerSeries::new(6, g);
        let f = series_reciprocal(&PowerSeries::one(6).sub(&g)).unwrap();
        let back = indecomposable_series(&f).unwrap();
        prop_assert_eq!(back.coeffs(), g.coeffs());
    }

    #[test]
    fn inverse_and_reversal_dualities(s in perm_strategy(9)) {
        let t = perm_stat_totals(&s);
        let ti = perm_stat_totals(&s.inverse());
        prop_assert_eq!((t.ucross, t.unest, t.psnest), (ti.lcross, ti.lnest, ti.psnest));
        let r = perm_stat_totals(&s.reversal_conjugate());
        prop_assert_eq!((t.cpeak, t.cval, t.cdrise, t.cdfall), (r.cval, r.cpeak, r.cdfall, r.cdrise));
        prop_assert_eq!((t.erec, t.earec, t.rar), (r.earec, r.erec, r.rar));
        prop_assert_eq!(&t.fix_by_level, &r.fix_by_level);
        prop_assert_eq!(t.inv, t.exc + t.ucross + 2 * t.unest + t.lcross + t.ljoin + 2 * t.lnest + 2 * t.psnest);
    }

    #[test]
    fn fixed_point_level_double_count(s in perm_strategy(9)) {
        let n = s.len();
        for (idx, prof) in perm_index_profile(&s).iter().enumerate() {
            let i = idx + 1;
            if let Some(lev) = prof.lev {
                let left = (1..i).filter(|&j| s.at(j) > i).count() as u32;
                let right = (i + 1..=n).filter(|&j| s.at(j) < i).count() as u32;
                prop_assert_eq!((left, right), (lev, lev));
            }
        }
    }

    #[test]
    fn permutation_paths(s in perm_strategy(9)) {
        for b in [Bijection::FZ, Bijection::Biane] {
            let obj = PathObject::Perm(s.clone());
            prop_assert_eq!(decode(&encode(&obj, b).unwrap(), b).unwrap(), obj);
        }
        for c in [check_height_lemma(&s), check_fz_label_lemma(&s), check_fz_inversion(&s),
                  check_biane_label_lemma(&s), check_biane_inversion(&s), check_inverse_symmetry(&s)] {
            prop_assert!(c.is_ok(), "{:?}", c);
        }
    }

    #[test]
    fn set_partition_lemmas(p in setpart_strategy(11)) {
        let t = sp_stat_totals(&p);
        prop_assert_eq!((t.crin + t.crop + t.ov) % 2, 0);
        prop_assert_eq!((t.crin + t.neop + t.cov) % 2, 0);
        prop_assert_eq!((t.ne + t.cov + t.ovin + t.covin) % 2, 0);
        prop_assert_eq!(t.crop + t.neop, t.ov + t.cov);
        let rt = sp_stat_totals(&sp_reverse(&p));
        prop_assert_eq!(t.rs, rt.ov + 2 * rt.cov + rt.covin + rt.pscov);
        prop_assert_eq!(t.iota_prime, t.cr + t.ov + t.cov + t.pscov);
        prop_assert_eq!(sp_reverse(&sp_reverse(&p)), p.clone());

        let prof = sp_index_profile(&p);
        let sum = |class: ElementClass, f: fn(&cfstat::setpartstats::SPIndexProfile) -> u32| -> u32 {
            prof.iter().filter(|q| q.element_class == class).map(f).sum()
        };
        prop_assert_eq!(sum(ElementClass::Opener, |q| q.ov), t.ov);
        prop_assert_eq!(sum(ElementClass::Opener, |q| q.cov), t.cov);
        for q in &prof {
            let inner = matches!(q.element_class, ElementClass::Opener | ElementClass::Insider);
            prop_assert_eq!(q.erec.is_some(), inner);
            prop_assert_eq!(q.brec.is_some(), inner);
        }
    }

    #[test]
    fn set_partition_paths(p in setpart_strategy(10)) {
        for b in [Bijection::KZ, Bijection::Flajolet, Bijection::Hybrid3, Bijection::Hybrid4] {
            let obj = PathObject::SetPart(p.clone());
            prop_assert_eq!(decode(&encode(&obj, b).unwrap(), b).unwrap(), obj);
            prop_assert!(check_sp_label_lemma(&p, b).is_ok());
        }
    }

    #[test]
    fn opener_parity(m in matching_strategy(9)) {
        // an opener j has parity opposite to cr(j) + ne(j)
        for (j, k) in m.pairs() {
            let (mut cr, mut ne) = (0, 0);
            for (i, l) in m.pairs() {
                if i < j && l > j {
                    if l < k { cr += 1 } else { ne += 1 }
                }
            }
            prop_assert_eq!((j + cr + ne) % 2, 1);
        }
        let t = matching_stat_totals(&m);
        prop_assert_eq!(t.cr, t.ecr + t.ocr);
        prop_assert_eq!(t.ne, t.ene + t.one);
    }
}
