use num_traits::Zero;
use proptest::prelude::*;
use sltensor_core::decomp::*;
use sltensor_core::field::{Cyclotomic6, Field, Rational};
use sltensor_core::lie::build_sl;
use sltensor_core::tensor::{structure_tensor, Tensor3};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn exact(name: &str) -> RankDecomposition {
    match parse_decomposition(format!("{DATA}/{name}")).unwrap() {
        Decomposition::Exact(d) => d,
        Decomposition::Curve(_) => panic!("expected an exact decomposition"),
    }
}

fn curve() -> CurveDecomposition {
    match parse_decomposition(format!("{DATA}/sl3_border18.txt")).unwrap() {
        Decomposition::Curve(c) => c,
        Decomposition::Exact(_) => panic!("expected a curve"),
    }
}

#[test]
fn corrected_rank20_is_exact() {
    let g = build_sl(3).unwrap();
    let t: Tensor3<Rational> = structure_tensor(&g);
    let d = exact("sl3_rank20.json");
    assert_eq!(d.rank(), 20);
    let r = verify_exact(&d, &t, Some(&g)).unwrap();
    assert!(r.exact, "{r:?}");
    assert_eq!((r.l0_error, r.l2_error), (0.0, 0.0));
    assert!(r.convention.contains("dual-basis coordinates"));
}

#[test]
fn printed_rank20_is_not_exact() {
    let g = build_sl(3).unwrap();
    let t: Tensor3<Rational> = structure_tensor(&g);
    let r = verify_exact(&exact("sl3_rank20_printed.json"), &t, Some(&g)).unwrap();
    assert!(!r.exact);
    assert!(r.l0_error > 0.0);
}

#[test]
fn perturbed_prefactor_is_not_exact() {
    let g = build_sl(3).unwrap();
    let t: Tensor3<Rational> = structure_tensor(&g);
    let mut d = exact("sl3_rank20.json");
    d.terms[7].prefactor = d.terms[7].prefactor.clone() + Cyclotomic6::from_i64(1);
    let r = verify_exact(&d, &t, Some(&g)).unwrap();
    assert!(!r.exact);
    assert!(r.l0_error > 0.0 && r.l2_error > 0.0);
}

#[test]
fn first_factor_recurs_once_per_slot_in_the_first_three_terms() {
    let d = exact("sl3_rank20.json");
    let m = &d.terms[0].factors[0];
    let transposed: Vec<Cyclotomic6> = (0..9).map(|i| m[(i % 3) * 3 + i / 3].clone()).collect();
    assert_eq!(&d.terms[1].factors[1], m);
    // The last slot is printed without the transpose marker.
    assert_eq!(d.terms[2].factors[2], transposed);
}

#[test]
fn appendix_listing_shape_and_errors() {
    let c = curve();
    assert_eq!(c.terms.len(), 18);
    assert_eq!(c.dims, [8, 8, 8]);
    assert!(c.terms.iter().flat_map(|t| t.factors.iter()).flatten().all(|m| m.e.abs() <= 16));
    let t: Tensor3<Rational> = structure_tensor(&build_sl(3).unwrap());
    let r = verify_curve(&c, &t, 5e-16).unwrap();
    assert!(r.l0_error <= 5e-16, "{r:?}");
    assert!(r.l2_error <= 2e-15, "{r:?}");
    assert!(r.negative_power_max <= 1e-14, "{r:?}");
}

#[test]
fn zeroing_a_coefficient_inflates_the_error() {
    let mut c = curve();
    c.terms[0].factors[2][2].c = 0.0;
    let t: Tensor3<Rational> = structure_tensor(&build_sl(3).unwrap());
    let r = verify_curve(&c, &t, 1.0).unwrap();
    assert!(r.l0_error.max(r.negative_power_max) > 1e-2, "{r:?}");
}

#[test]
fn curve_errors_ignore_term_order() {
    let c = curve();
    let mut rev = c.clone();
    rev.terms.reverse();
    let t: Tensor3<Rational> = structure_tensor(&build_sl(3).unwrap());
    let (a, b) = (verify_curve(&c, &t, 1.0).unwrap(), verify_curve(&rev, &t, 1.0).unwrap());
    assert_eq!(a, b);
}

#[test]
fn constant_curve_from_exact_decomposition_has_no_error() {
    let g = build_sl(2).unwrap();
    let t: Tensor3<Rational> = structure_tensor(&g);
    let unit = |i: usize| (0..3).map(|j| Monomial { c: (i == j) as i32 as f64, e: 0 }).collect::<Vec<_>>();
    let terms = t
        .nonzeros()
        .map(|(i, j, k, v)| {
            let mut a = unit(i);
            a[i].c = v.to_string().parse().unwrap();
            CurveTerm { factors: [a, unit(j), unit(k)] }
        })
        .collect();
    let r = verify_curve(&CurveDecomposition { dims: [3, 3, 3], terms }, &t, 0.0).unwrap();
    assert!(r.exact);
}

#[test]
fn json_round_trip() {
    for d in [Decomposition::Exact(exact("sl3_rank20.json")), Decomposition::Curve(curve())] {
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(parse_decomposition_str(&s).unwrap(), d);
    }
}

#[test]
fn bad_json_factor_length_names_the_term() {
    let mut d = exact("sl3_rank20.json");
    d.terms[3].factors[1].pop();
    let s = serde_json::to_string(&Decomposition::Exact(d)).unwrap();
    let err = parse_decomposition_str(&s).unwrap_err().to_string();
    assert!(err.contains("term 4"), "{err}");
}

fn small_cyclo() -> impl Strategy<Value = Cyclotomic6> {
    (-4i64..=4, -4i64..=4).prop_map(|(a, b)| Cyclotomic6::new(Rational::from_i64(a), Rational::from_i64(b)))
}

fn random_decomposition(dims: [usize; 3], r: usize) -> impl Strategy<Value = RankDecomposition> {
    let term = (
        small_cyclo().prop_filter("nonzero", |z| !z.is_zero()),
        prop::collection::vec(small_cyclo(), dims[0]),
        prop::collection::vec(small_cyclo(), dims[1]),
        prop::collection::vec(small_cyclo(), dims[2]),
    )
        .prop_map(|(p, a, b, c)| Term { prefactor: p, factors: [a, b, c] });
    prop::collection::vec(term, r).prop_map(move |terms| RankDecomposition { dims, layout: Layout::Coordinates, terms })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sums_of_five_rank_one_terms_have_small_flattenings(d in random_decomposition([3, 4, 5], 5)) {
        let t = assemble(&d).unwrap();
        prop_assert!(t.flattening_ranks().iter().all(|&r| r <= 5));
    }

    #[test]
    fn assemble_is_linear_in_each_factor(d in random_decomposition([2, 3, 3], 3), s in small_cyclo(), i in 0usize..3, f in 0usize..3) {
        let base = assemble(&d).unwrap();
        let mut single = d.clone();
        single.terms = vec![d.terms[i].clone()];
        let part = assemble(&single).unwrap();
        let mut scaled = d.clone();
        scaled.terms[i].factors[f] = scaled.terms[i].factors[f].iter().map(|x| x.clone() * s.clone()).collect();
        let expect = base.add(&part.scale(&(s.clone() - Cyclotomic6::from_i64(1)))).unwrap();
        prop_assert_eq!(assemble(&scaled).unwrap(), expect);
    }
}

#[test]
fn verify_exact_accepts_its_own_assembly() {
    // The Rational-valued part of a random decomposition, checked against itself.
    let d = RankDecomposition {
        dims: [2, 2, 2],
        layout: Layout::Coordinates,
        terms: (0..3)
            .map(|i| Term {
                prefactor: Cyclotomic6::from_i64(i + 1),
                factors: [
                    vec![Cyclotomic6::from_i64(1), Cyclotomic6::from_i64(i)],
                    vec![Cyclotomic6::from_i64(2 - i), Cyclotomic6::from_i64(1)],
                    vec![Cyclotomic6::from_i64(i), Cyclotomic6::from_i64(-1)],
                ],
            })
            .collect(),
    };
    let t = assemble(&d).unwrap();
    let rational = t.map(|z| z.a.clone());
    assert!(t.entries().iter().all(|z| z.b.is_zero()));
    assert!(verify_exact(&d, &rational, None).unwrap().exact);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verify_exact_of_assembly_round_trips(d in random_decomposition([3, 2, 4], 4)) {
        let t = assemble(&d).unwrap();
        prop_assert!(verify_exact(&d, &t, None).unwrap().exact);
    }
}
