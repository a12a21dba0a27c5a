//! Property tests for the algebraic kernels: polynomial ring laws, exact
//! versus approximate linear algebra, and the symplectic identities.

use std::sync::Arc;

use leglab::linalg::{bareiss, exact_rank, integer_rows, kernel_basis, rank, Matrix};
use leglab::poly::{isolate_real_roots, var_names, Binding, MultiPoly, RootValue, UniPoly};
use leglab::scalar::rat;
use leglab::symplectic::{fit_symplectic_form, induced_form, Hyperplane, SubspaceClass};
use leglab::variety::{sample, ParamVariety, SampleConfig, Variety};
use leglab::{Approx, Field, Precision, Rational, SymplecticForm};
use proptest::prelude::*;

fn xyz() -> Vec<String> {
    var_names(&["x", "y", "z"])
}

/// Sparse polynomial in x, y, z with degree ≤ 3 per variable.
fn poly_over(
    vars: Vec<String>,
    coeff: std::ops::RangeInclusive<i64>,
    terms: usize,
) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0u32..=3, 0u32..=3, 0u32..=3), coeff, 1i64..=3), 0..=terms).prop_map(move |ts| {
        MultiPoly::from_terms(
            &vars,
            ts.into_iter().map(|((a, b, c), n, d)| (vec![a, b, c], rat(n, d))),
        )
    })
}

fn poly_with(coeff: std::ops::RangeInclusive<i64>, terms: usize) -> impl Strategy<Value = MultiPoly> {
    poly_over(xyz(), coeff, terms)
}

fn poly() -> impl Strategy<Value = MultiPoly> {
    poly_with(-5..=5, 5)
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-6i64..=6, 1i64..=4), 3).prop_map(|v| v.into_iter().map(|(n, d)| rat(n, d)).collect())
}

fn int_matrix(rows: usize, cols: usize, bound: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-bound..=bound, cols), rows)
}

fn to_matrix(rows: &[Vec<i64>]) -> Matrix<Rational> {
    let cols = rows.first().map_or(0, Vec::len);
    let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect();
    Matrix::from_rows(rows, cols, &())
}

fn qvec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x, 1)).collect()
}

proptest! {
    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn differentiation_is_a_derivation(p in poly(), q in poly(), i in 0usize..3) {
        let d = |f: &MultiPoly| f.partial_index(i);
        prop_assert_eq!(d(&(&p + &q)), &d(&p) + &d(&q));
        prop_assert_eq!(d(&(&p * &q)), &(&d(&p) * &q) + &(&p * &d(&q)));
    }

    #[test]
    fn substitution_composes_with_evaluation(
        p in poly(),
        sx in poly_over(var_names(&["u", "v", "w"]), -5..=5, 4),
        b in point(),
    ) {
        // p(x := sx(u, v, w), y := v, z := 2) evaluated at b equals p at (sx(b), b_v, 2).
        let uvw = var_names(&["u", "v", "w"]);
        let y = MultiPoly::var(&uvw, 1);
        let sub = p
            .substitute(&[("x", Binding::Poly(sx.clone())), ("y", Binding::Poly(y)), ("z", Binding::Value(rat(2, 1)))])
            .unwrap();
        let direct = p.eval(&[sx.eval(&b, &()), b[1].clone(), rat(2, 1)], &());
        prop_assert_eq!(sub.eval(&b, &()), direct);
    }

    #[test]
    fn derivative_matches_central_difference(p in poly_with(-1..=1, 4), a in prop::collection::vec(-4i64..=4, 3), i in 0usize..3) {
        // Degree ≤ 3 per variable: the error is h²·f'''/6 ≤ 4h² on [-1, 1]³.
        let prec = Precision::new(128);
        let h = Approx::pow2(prec, -20);
        let at: Vec<Approx> = a.iter().map(|&x| Approx::from_rational(&prec, &rat(x, 4))).collect();
        let mut plus = at.clone();
        plus[i] = plus[i].add(&h);
        let mut minus = at.clone();
        minus[i] = minus[i].sub(&h);
        let fd = p.eval(&plus, &prec).sub(&p.eval(&minus, &prec)).div(&h.add(&h));
        let exact = p.partial_index(i).eval(&at, &prec);
        let err = fd.sub(&exact).abs_f64();
        prop_assert!(err <= 10.0 * 2f64.powi(-40), "error {err:e}");
    }

    #[test]
    fn reported_roots_are_roots(cs in prop::collection::vec(-6i64..=6, 2..=6), lead in 1i64..=3, r in -3i64..=3) {
        // Force one rational root r.
        let t = var_names(&["t"]);
        let mut c: Vec<(Vec<u32>, Rational)> = cs.iter().enumerate().map(|(k, &v)| (vec![k as u32], rat(v, 1))).collect();
        c.push((vec![cs.len() as u32], rat(lead, 1)));
        let f = MultiPoly::from_terms(&t, c);
        let lin = MultiPoly::from_terms(&t, [(vec![1], rat(1, 1)), (vec![0], rat(-r, 1))]);
        let p = &f * &lin;
        let iso = isolate_real_roots(&p).unwrap();
        prop_assert!(iso.rational_roots().contains(&rat(r, 1)));
        for root in &iso.roots {
            match &root.value {
                RootValue::Exact(q) => prop_assert!(p.eval(std::slice::from_ref(q), &()).is_zero()),
                RootValue::Interval { lo, hi, factor } => {
                    let s = |x: &Rational| factor.eval(x).cmp(&Rational::ZERO);
                    prop_assert!(s(lo) != s(hi) || factor.eval(lo).is_zero() || factor.eval(hi).is_zero());
                    let coeffs: Vec<Rational> = (0..=p.total_degree()).map(|k| p.coefficient(&[k])).collect();
                    let (_, rem) = UniPoly::new(coeffs).div_rem(factor);
                    prop_assert!(rem.is_zero());
                }
            }
        }
    }

    #[test]
    fn rank_is_transpose_invariant(m in (1usize..8, 1usize..8).prop_flat_map(|(r, c)| int_matrix(r, c, 4))) {
        let a = to_matrix(&m);
        prop_assert_eq!(exact_rank(&a), exact_rank(&a.transpose()));
        for v in kernel_basis(&a) {
            prop_assert!(a.mul_vec(&v).unwrap().iter().all(Field::is_zero));
        }
    }

    #[test]
    fn bareiss_divisions_are_exact(m in (1usize..9, 1usize..9).prop_flat_map(|(r, c)| int_matrix(r, c, 9))) {
        let a = to_matrix(&m);
        let out = bareiss(integer_rows(&a), a.cols());
        prop_assert!(out.all_divisions_exact);
        prop_assert_eq!(out.pivots.len(), exact_rank(&a.transpose()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn approx_rank_agrees_with_exact(m in int_matrix(20, 20, 10), copies in prop::collection::vec((0usize..20, 0usize..20, any::<bool>()), 0..12)) {
        // Duplicate (or negate) rows to produce rank deficiency within [-10, 10].
        let mut m = m;
        for (from, to, negate) in copies {
            let row: Vec<i64> = m[from].iter().map(|&x| if negate { -x } else { x }).collect();
            m[to] = row;
        }
        let a = to_matrix(&m);
        prop_assert_eq!(rank(&a.to_approx(Precision::new(100))), exact_rank(&a));
    }
}

/// Random symplectic form `Pᵀ J P` of half-dimension `half`.
fn random_form(half: usize, p: &[i64]) -> Option<SymplecticForm> {
    let n = 2 * half;
    let pm = to_matrix(&p.chunks(n).map(<[i64]>::to_vec).collect::<Vec<_>>());
    if exact_rank(&pm) < n {
        return None;
    }
    let j = SymplecticForm::standard(half).unwrap().matrix();
    let omega = pm.transpose().mul(&j).unwrap().mul(&pm).unwrap();
    Some(SymplecticForm::from_matrix(&omega).unwrap())
}

fn form_instance() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>, Vec<i64>, Vec<i64>)> {
    (2usize..=6).prop_flat_map(|half| {
        let n = 2 * half;
        (
            Just(half),
            prop::collection::vec(-2i64..=2, n * n),
            prop::collection::vec(-5i64..=5, n),
            prop::collection::vec(-9i64..=9, n),
            prop::collection::vec(-9i64..=9, n),
        )
    })
}

/// Move `v` into `ker a` along the first coordinate direction not in `ker a`.
fn into_hyperplane(a: &[Rational], v: &[Rational]) -> Vec<Rational> {
    let e = a.iter().position(|x| !x.is_zero()).expect("nonzero covector");
    let av = leglab::linalg::dot(a, v);
    let mut out = v.to_vec();
    out[e] = &out[e] - &(av / &a[e]);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_preserves_the_form((half, p, a, v, w) in form_instance()) {
        let Some(form) = random_form(half, &p) else { return Ok(()) };
        let a = qvec(&a);
        prop_assume!(a.iter().any(|x| !x.is_zero()));
        let chart = induced_form(&form, &Hyperplane::new(&form, &a).unwrap()).unwrap();
        let (v, w) = (into_hyperplane(&a, &qvec(&v)), into_hyperplane(&a, &qvec(&w)));
        prop_assert_eq!(
            chart.induced.eval(&chart.project(&v), &chart.project(&w)).unwrap(),
            form.eval(&v, &w).unwrap()
        );
        prop_assert!(chart.project(&chart.hyperplane.center).iter().all(Field::is_zero));
        prop_assert_eq!(chart.induced.dim(), 2 * half - 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perp_is_an_involution((half, p, rows) in (2usize..=5).prop_flat_map(|h| (
        Just(h),
        prop::collection::vec(-2i64..=2, 4 * h * h),
        prop::collection::vec(prop::collection::vec(-4i64..=4, 2 * h), 1..=2 * h),
    ))) {
        let Some(form) = random_form(half, &p) else { return Ok(()) };
        let m = to_matrix(&rows);
        // Reduce to an independent basis first.
        let basis: Vec<Vec<Rational>> = leglab::linalg::exact_rref(&m).rows;
        let perp = form.perp(&basis).unwrap();
        prop_assert_eq!(basis.len() + perp.len(), 2 * half);
        let back = form.perp(&perp).unwrap();
        prop_assert_eq!(back.len(), basis.len());
        for b in &basis {
            prop_assert!(leglab::linalg::in_span(&back, b, &()));
        }
    }

    #[test]
    fn random_coisotropic_is_coisotropic(half in 1usize..=5, k in 1usize..=5, seed in any::<u64>()) {
        prop_assume!(k <= half);
        let form = SymplecticForm::standard(half).unwrap();
        let c = form.random_coisotropic(k, seed).unwrap();
        let class = form.classify(&c.subspace).unwrap();
        let expected = if k == half { SubspaceClass::Lagrangian } else { SubspaceClass::Coisotropic };
        prop_assert_eq!(class, expected);
        prop_assert_eq!(c.subspace.len(), 2 * half - k);
    }
}

#[test]
fn fitted_forms_annihilate_every_frame_pair() {
    // A rational quintic curve: few equations, so a large solution space.
    let t = var_names(&["t"]);
    let coords = ["1", "t", "t^2", "t^3 - t", "t^4", "t^5 + 2"]
        .iter()
        .map(|c| leglab::poly::parse_poly(c, &t).unwrap())
        .collect();
    let v = Variety::Param(Arc::new(ParamVariety::new("quintic", t, &[], coords).unwrap()));
    let set = sample::<Rational>(&v, 12, 5, &SampleConfig::default(), &(), true).unwrap();
    let frames: Vec<Vec<Vec<Rational>>> = set.samples.into_iter().map(|s| s.frame.vectors).collect();
    let fit = fit_symplectic_form(&frames).unwrap();
    assert!(fit.dim >= 2);
    for omega in &fit.basis {
        for f in &frames {
            for a in f {
                for b in f {
                    let ob: Vec<Rational> = omega.iter().map(|r| leglab::linalg::dot(r, b)).collect();
                    assert!(leglab::linalg::dot(a, &ob).is_zero());
                }
            }
        }
    }
}
