//! Brute-force oracles written independently of the library, compared
//! against the library's enumerations and expansions.

use std::collections::HashMap;

use cfstat::matchstats::{enumerate_matching_polynomial, touchard_riordan};
use cfstat::mpoly::{Family, Indeterminate, Monomial, MultiPoly};
use cfstat::paths::{weighted_path_sum, PossibilityFunction, StepWeightFn};
use cfstat::permstats::{enumerate_perm_polynomial, PermFamily};
use cfstat::series::{
    attach_component_weight, contract_s_to_j, indecomposable_series, jfraction_from_series,
    series_reciprocal, FractionSpec, PowerSeries, RationalSeries, SFractionSpec,
};
use cfstat::setpartstats::{enumerate_sp_polynomial, SPFamily};
use cfstat::theorems::{self, enumerate_object, verify_theorem, LinkMode, Object, SeriesTransform};
use num_bigint::BigInt;
use num_rational::BigRational;

fn p(s: &str) -> MultiPoly {
    MultiPoly::parse(s).unwrap()
}

fn ints(v: &[i64]) -> Vec<MultiPoly> {
    v.iter().map(|&c| MultiPoly::constant(c)).collect()
}

fn perms(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 1..=n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n + 1], &mut out);
    out
}

/// Set partitions as block-label vectors (restricted growth).
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, m: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=m {
            cur.push(b);
            go(n, cur, m.max(b + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), 0, &mut out);
    out
}

/// Perfect matchings of [2n] as partner arrays (1-based, index 0 unused).
fn matchings(n: usize) -> Vec<Vec<usize>> {
    fn go(partner: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(i) = (1..partner.len()).find(|&i| partner[i] == 0) else {
            out.push(partner.clone());
            return;
        };
        for j in i + 1..partner.len() {
            if partner[j] == 0 {
                partner[i] = j;
                partner[j] = i;
                go(partner, out);
                partner[i] = 0;
                partner[j] = 0;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut vec![0; 2 * n + 1], &mut out);
    out
}

fn avoids_321(w: &[usize]) -> bool {
    let n = w.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if w[i] > w[j] && w[j] > w[k] {
                    return false;
                }
            }
        }
    }
    true
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn var_mono(pairs: &[(Indeterminate, u32)]) -> MultiPoly {
    MultiPoly::monomial(Monomial::from_factors(pairs.iter().cloned()))
}

#[test]
fn narayana_coefficients_match_formula() {
    // x^3 + 3x^2y + xy^2, and the Narayana numbers in general
    let p3 = enumerate_perm_polynomial(3, PermFamily::Avoid321, "arec.erec", None).unwrap();
    assert_eq!(p3, p("x^3 + 3*x^2*y + x*y^2"));
    assert_eq!(
        p3.coeff_of(&Monomial::from_factors([
            (Indeterminate::var("x"), 2),
            (Indeterminate::var("y"), 1)
        ])),
        BigInt::from(3)
    );
    for n in 1..=7usize {
        let count = perms(n).iter().filter(|w| avoids_321(w)).count() as i64;
        let pn = enumerate_perm_polynomial(n, PermFamily::Avoid321, "arec.erec", None).unwrap();
        let nn = n as i64;
        let mut total = 0;
        for k in 1..=nn {
            let want = binom(nn, k) * binom(nn, k - 1) / nn;
            let m = Monomial::from_factors([
                (Indeterminate::var("x"), (nn - k + 1) as u32),
                (Indeterminate::var("y"), (k - 1) as u32),
            ]);
            assert_eq!(pn.coeff_of(&m), BigInt::from(want), "n = {n}, k = {k}");
            total += want;
        }
        assert_eq!(total, count);
    }
}

#[test]
fn reciprocal_of_factorials() {
    let f = PowerSeries::new(4, ints(&[1, 1, 2, 6, 24]));
    let g = series_reciprocal(&f).unwrap();
    assert_eq!(g.coeffs(), &ints(&[1, -1, -1, -3, -13])[..]);
    // multiply back by hand
    for k in 0..=4 {
        let s: i64 = (0..=k)
            .map(|i| [1, 1, 2, 6, 24][i] * [1, -1, -1, -3, -13][k - i])
            .sum();
        assert_eq!(s, if k == 0 { 1 } else { 0 });
    }
}

#[test]
fn indecomposable_permutations_and_partitions() {
    let fact = FractionSpec::S(SFractionSpec::new(|n| {
        MultiPoly::constant(n.div_ceil(2) as i64)
    }))
    .expand(5);
    let g = indecomposable_series(&fact).unwrap();
    let direct: Vec<i64> = (0..=5)
        .map(|n| {
            if n == 0 {
                return 0;
            }
            perms(n)
                .iter()
                .filter(|w| (1..n).all(|k| w[..k].iter().max().copied().unwrap_or(0) != k))
                .count() as i64
        })
        .collect();
    assert_eq!(direct, vec![0, 1, 1, 3, 13, 71]);
    assert_eq!(g.coeffs(), &ints(&direct)[..]);

    let bell = FractionSpec::S(SFractionSpec::new(|n| {
        MultiPoly::constant(if n % 2 == 1 { 1 } else { (n / 2) as i64 })
    }))
    .expand(4);
    let g = indecomposable_series(&bell).unwrap();
    let direct: Vec<i64> = (0..=4)
        .map(|n| {
            if n == 0 {
                return 0;
            }
            set_partitions(n)
                .iter()
                .filter(|rg| (1..n).all(|k| rg[..k].iter().any(|b| rg[k..].contains(b))))
                .count() as i64
        })
        .collect();
    assert_eq!(direct, vec![0, 1, 1, 2, 6]);
    assert_eq!(g.coeffs(), &ints(&direct)[..]);
}

fn zeta_poly(counts: &HashMap<u32, i64>) -> MultiPoly {
    let z = Indeterminate::var("zeta");
    counts.iter().fold(MultiPoly::zero(), |acc, (&k, &c)| {
        &acc + &(&MultiPoly::constant(c) * &var_mono(&[(z, k)]))
    })
}

#[test]
fn component_weight_matches_direct_counts() {
    let zeta = MultiPoly::var("zeta");
    let fact = FractionSpec::S(SFractionSpec::new(|n| {
        MultiPoly::constant(n.div_ceil(2) as i64)
    }));
    let s = attach_component_weight(&fact, &zeta).expand(5);
    for n in 0..=5 {
        let mut counts = HashMap::new();
        for w in perms(n) {
            let cc = (1..=n).filter(|&k| w[..k].iter().max() == Some(&k)).count() as u32;
            *counts.entry(cc).or_insert(0) += 1;
        }
        assert_eq!(s.coeff(n), &zeta_poly(&counts), "perm n = {n}");
    }
    let bell = FractionSpec::S(SFractionSpec::new(|n| {
        MultiPoly::constant(if n % 2 == 1 { 1 } else { (n / 2) as i64 })
    }));
    let s = attach_component_weight(&bell, &zeta).expand(4);
    for n in 0..=4 {
        let mut counts = HashMap::new();
        for rg in set_partitions(n) {
            let cc = (1..=n)
                .filter(|&k| !rg[..k].iter().any(|b| rg[k..].contains(b)))
                .count() as u32;
            *counts.entry(cc).or_insert(0) += 1;
        }
        assert_eq!(s.coeff(n), &zeta_poly(&counts), "set partition n = {n}");
    }
}

#[test]
fn contraction_matches_peeling_for_factorials() {
    let euler = SFractionSpec::new(|n| MultiPoly::constant(n.div_ceil(2) as i64));
    let j = contract_s_to_j(&euler);
    let series = RationalSeries::from_integers(&[1, 1, 2, 6, 24, 120]);
    let lv = jfraction_from_series(&series, 2).unwrap();
    let r = |k: i64| BigRational::from_integer(BigInt::from(k));
    assert_eq!(lv.gamma, vec![r(1), r(3), r(5)]);
    assert_eq!(&lv.beta[1..], &[r(1), r(4)]);
    for k in 0..=1 {
        assert_eq!(j.gamma(k), MultiPoly::constant(lv.gamma[k].to_integer()));
        assert_eq!(
            j.beta(k + 1),
            MultiPoly::constant(lv.beta[k + 1].to_integer())
        );
    }
}

/// x1^eareccpeak x2^eareccdfall y1^ereccval y2^ereccdrise u1^nrcpeak
/// u2^nrcdfall v1^nrcval v2^nrcdrise ∏ w_lev over fixed points.
fn first_j_weight(w: &[usize]) -> MultiPoly {
    let n = w.len();
    let s = |i: usize| w[i - 1];
    let mut inv = vec![0; n + 1];
    for i in 1..=n {
        inv[s(i)] = i;
    }
    let mut f: Vec<(Indeterminate, u32)> = Vec::new();
    for i in 1..=n {
        let record = (1..i).all(|j| s(j) < s(i));
        let antirecord = (i + 1..=n).all(|j| s(j) > s(i));
        let name = if s(i) == i {
            let lev = (1..i).filter(|&j| s(j) > i).count() as u32;
            f.push((Family::new("w").at(lev), 1));
            continue;
        } else if inv[i] < i && s(i) < i {
            if antirecord {
                "x1"
            } else {
                "u1"
            }
        } else if inv[i] > i && s(i) < i {
            if antirecord {
                "x2"
            } else {
                "u2"
            }
        } else if inv[i] > i && s(i) > i {
            if record {
                "y1"
            } else {
                "v1"
            }
        } else if record {
            "y2"
        } else {
            "v2"
        };
        f.push((Indeterminate::var(name), 1));
    }
    var_mono(&f)
}

#[test]
fn first_jfraction_against_hand_written_weights() {
    let cf = theorems::find_theorem("perm.J1")
        .unwrap()
        .fraction_case()
        .unwrap()
        .cf
        .expand_fast(6);
    for n in 0..=6 {
        let direct = perms(n)
            .iter()
            .fold(MultiPoly::zero(), |acc, w| &acc + &first_j_weight(w));
        assert_eq!(&direct, cf.coeff(n), "n = {n}");
        assert_eq!(
            direct,
            enumerate_perm_polynomial(n, PermFamily::All, "qn", None).unwrap()
        );
    }
}

#[test]
fn q_stirling_by_lb_matches_recurrence() {
    // S_q(n,k) = S_q(n-1,k-1) + [k]_q S_q(n-1,k)
    let q = MultiPoly::var("q");
    let mut rows: Vec<Vec<MultiPoly>> = vec![vec![MultiPoly::one()]];
    for n in 1..=7 {
        let prev = &rows[n - 1];
        let row: Vec<MultiPoly> = (0..=n)
            .map(|k| {
                let a = if k >= 1 && k - 1 < prev.len() {
                    prev[k - 1].clone()
                } else {
                    MultiPoly::zero()
                };
                let b = if k < prev.len() {
                    &cfstat::mpoly::q_int(k as u32, &q) * &prev[k]
                } else {
                    MultiPoly::zero()
                };
                &a + &b
            })
            .collect();
        rows.push(row);
    }
    for (n, row) in rows.iter().enumerate() {
        for (k, want) in row.iter().enumerate() {
            let got = enumerate_sp_polynomial(n, SPFamily::ByBlockCount(k), "lb", None).unwrap();
            assert_eq!(&got, want, "n = {n}, k = {k}");
        }
    }
    assert_eq!(rows[4][2], p("3 + 3*q + q^2"));
    assert_eq!(
        enumerate_sp_polynomial(3, SPFamily::All, "blocks", None).unwrap(),
        p("x^3 + 3*x^2 + x")
    );
}

#[test]
fn crossings_and_components_of_matchings() {
    for n in 0..=5 {
        let mut cr_poly = MultiPoly::zero();
        let mut cc_counts = HashMap::new();
        for m in matchings(n) {
            let arcs: Vec<(usize, usize)> = (1..m.len())
                .filter(|&i| m[i] > i)
                .map(|i| (i, m[i]))
                .collect();
            let cr = arcs
                .iter()
                .flat_map(|a| arcs.iter().map(move |b| (a, b)))
                .filter(|((i, k), (j, l))| i < j && j < k && k < l)
                .count() as u32;
            cr_poly = &cr_poly + &var_mono(&[(Indeterminate::var("p"), cr)]);
            let cc = (1..=2 * n).filter(|&k| (1..=k).all(|i| m[i] <= k)).count() as u32;
            *cc_counts.entry(cc).or_insert(0) += 1;
        }
        assert_eq!(touchard_riordan(n).unwrap(), cr_poly, "n = {n}");
        assert_eq!(
            enumerate_matching_polynomial(n, "cr", None).unwrap(),
            cr_poly
        );
        assert_eq!(
            enumerate_matching_polynomial(n, "zeta", None).unwrap(),
            zeta_poly(&cc_counts)
        );
    }
    assert_eq!(touchard_riordan(2).unwrap(), p("2 + p"));
    assert_eq!(
        enumerate_matching_polynomial(3, "zeta", None).unwrap(),
        p("10*zeta + 4*zeta^2 + zeta^3")
    );
    assert_eq!(
        enumerate_matching_polynomial(4, "zeta", None).unwrap(),
        p("74*zeta + 24*zeta^2 + 6*zeta^3 + zeta^4")
    );
}

#[test]
fn motzkin_paths_by_hand() {
    // count words over {U, D, L} that stay nonnegative and end at 0
    fn count(len: usize, h: usize) -> u64 {
        if len == 0 {
            return (h == 0) as u64;
        }
        let down = if h > 0 { count(len - 1, h - 1) } else { 0 };
        count(len - 1, h + 1) + down + count(len - 1, h)
    }
    let unit: StepWeightFn = std::sync::Arc::new(|_, _, _| MultiPoly::one());
    for n in 0..=7 {
        let w = weighted_path_sum(&PossibilityFunction::motzkin(1), &unit, n);
        assert_eq!(w, MultiPoly::constant(count(n, 0) as i64), "n = {n}");
    }
    assert_eq!(count(4, 0), 9);
}

#[test]
fn two_variable_fraction_small_cases() {
    let r = verify_theorem("perm.S.2var", Some(6), None).unwrap();
    assert!(r.passed);
    // S_2 = {12, 21} weighs x^2 and xy
    assert_eq!(
        enumerate_perm_polynomial(2, PermFamily::All, "arec2var", None).unwrap(),
        p("x^2 + x*y")
    );
    assert_eq!(
        enumerate_perm_polynomial(3, PermFamily::All, "arec2var", None).unwrap(),
        p("x^3 + 3*x^2*y + x*y^2 + x*y*u")
    );
}

/// Every coefficient-mode master link must also hold between the two
/// enumerated polynomials, not only between the fractions.
#[test]
fn master_links_hold_for_polynomials() {
    let mut checked = 0;
    for case in theorems::registry() {
        let Some(fc) = case.fraction_case() else {
            continue;
        };
        let Some(link) = &fc.master else { continue };
        let m = theorems::find_theorem(link.master)
            .unwrap()
            .fraction_case()
            .unwrap();
        if link.mode != LinkMode::Coefficients
            || fc.transform != SeriesTransform::Plain
            || m.object != fc.object
        {
            continue;
        }
        let n_max = match fc.object {
            Object::Perm(PermFamily::CycleAlternating) => 3,
            Object::Perm(_) => 5,
            Object::SetPart(_) => 6,
            _ => 4,
        };
        for n in 0..=n_max {
            let own = enumerate_object(fc.object, n, fc.weight, fc.subst.as_ref()).unwrap();
            let from_master = enumerate_object(m.object, n, m.weight, m.subst.as_ref())
                .unwrap()
                .substitute(&link.subst);
            assert_eq!(
                own, from_master,
                "{} from {} at n = {n}",
                case.id, link.master
            );
        }
        checked += 1;
    }
    assert!(checked >= 40, "{checked}");
}

#[test]
fn spec_identity_examples() {
    for (id, n) in [("inv.decomp", 7), ("MP.identity", 5), ("orderedbell", 6)] {
        let r = theorems::check_identity(id, Some(n)).unwrap();
        assert!(r.passed, "{id}: {:?}", r.discrepancy);
    }
    for (id, n) in [("match.cc.table", 5), ("sp.zeng2", 7)] {
        let r = verify_theorem(id, Some(n), None).unwrap();
        assert!(r.passed, "{id}: {:?}", r.discrepancy);
    }
}
