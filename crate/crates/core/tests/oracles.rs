//! Expected values derived by hand or by independent computations, compared
//! against the library.

use std::sync::Arc;

use leglab::catalog::{catalog_get, fit_variety};
use leglab::conormal::{phi_chart_map, LiftSource};
use leglab::poly::{isolate_real_roots, parse_poly, var_names};
use leglab::scalar::{primitive_rational, rat};
use leglab::symplectic::{induced_form, Hyperplane};
use leglab::variety::{ParamVariety, Variety};
use leglab::{MultiPoly, Rational, SymplecticForm};

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from(x)).collect()
}

/// Upper-triangle index pairs of a 4×4 matrix.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Coefficients of `t^k` in `p(t)ᵀ Ω p'(t)` as linear forms in the
/// upper-triangle unknowns, expanded symbolically.
fn twisted_cubic_system() -> Vec<Vec<Rational>> {
    let mut names = vec!["t".to_string()];
    names.extend(PAIRS.iter().map(|(i, j)| format!("w{i}{j}")));
    let p: Vec<MultiPoly> = ["1", "t", "t^2", "t^3"]
        .iter()
        .map(|c| parse_poly(c, &names).unwrap())
        .collect();
    let dp: Vec<MultiPoly> = p.iter().map(|c| c.partial("t").unwrap()).collect();
    let mut total = MultiPoly::zero(&names);
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        let w = MultiPoly::var(&names, k + 1);
        let pair = &(&p[i] * &dp[j]) - &(&p[j] * &dp[i]);
        total = &total + &(&w * &pair);
    }
    (0..=total.degree_in(0))
        .map(|d| {
            (0..PAIRS.len())
                .map(|k| {
                    let mut e = vec![0; names.len()];
                    e[0] = d;
                    e[k + 1] = 1;
                    total.coefficient(&e)
                })
                .collect()
        })
        .collect()
}

#[test]
fn twisted_cubic_fit_matches_symbolic_system() {
    // By hand: the t^(i+j-1) coefficient of w_ij is (j - i).
    let system = twisted_cubic_system();
    let expected = vec![
        ints(&[1, 0, 0, 0, 0, 0]),
        ints(&[0, 2, 0, 0, 0, 0]),
        ints(&[0, 0, 3, 1, 0, 0]),
        ints(&[0, 0, 0, 0, 2, 0]),
        ints(&[0, 0, 0, 0, 0, 1]),
    ];
    assert_eq!(system, expected);

    let entry = catalog_get("twisted_cubic").unwrap();
    let (fit, frames) = fit_variety(&entry.variety, 0).unwrap();
    assert!(frames > 0);
    assert_eq!(fit.dim, 1);
    assert!(fit.nondegenerate);
    let g = &fit.basis[0];
    let upper: Vec<Rational> = PAIRS.iter().map(|&(i, j)| g[i][j].clone()).collect();
    for row in &system {
        let value = row.iter().zip(&upper).fold(Rational::ZERO, |acc, (a, b)| acc + a * b);
        assert_eq!(value, Rational::ZERO);
    }
    // The unique solution up to scale: w03 = 1, w12 = -3, the rest zero.
    assert_eq!(
        primitive_rational(&upper),
        primitive_rational(&ints(&[0, 0, 1, -3, 0, 0]))
    );
}

#[test]
fn twisted_cubic_jacobian_rank() {
    // Cone rows at t = 1: p = (1,1,1,1), p' = (0,1,2,3); the minor on the
    // first two columns is 1, so the rank is 2.
    let entry = catalog_get("twisted_cubic").unwrap();
    let Variety::Param(p) = &entry.variety else { panic!() };
    assert_eq!(p.jacobian_rank_at(&[rat(1, 1)], &()).unwrap(), 2);
}

#[test]
fn nodal_cubic_conormal_covector() {
    // F = z y^2 - x^3 - x^2 z, ∇F = (-3x^2 - 2xz, 2yz, y^2 - x^2).
    let (x, y, z) = (3i64, 6i64, 1i64);
    assert_eq!(z * y * y - x * x * x - x * x * z, 0);
    let by_hand = ints(&[-3 * x * x - 2 * x * z, 2 * y * z, y * y - x * x]);
    assert_eq!(by_hand, ints(&[-33, 12, 27]));
    let entry = catalog_get("nodal_cubic").unwrap();
    let Variety::Conormal(l) = &entry.variety else { panic!() };
    let LiftSource::Hypersurface(h) = l.source() else {
        panic!()
    };
    assert_eq!(h.conormal_covector(&ints(&[x, y, z]), &()).unwrap(), by_hand);
}

fn cross(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

#[test]
fn conic_lift_point_is_the_cross_product() {
    // On a plane curve the conormal line at w is spanned by w × w'.
    let t = var_names(&["t"]);
    let coords = ["1", "t", "t^2"].iter().map(|c| parse_poly(c, &t).unwrap()).collect();
    let conic = Variety::Param(Arc::new(ParamVariety::new("conic", t, &[], coords).unwrap()));
    let l = leglab::conormal::build_conormal_lift(&conic).unwrap();
    for s in [2i64, -3, 5] {
        let w = ints(&[1, s, s * s]);
        let dw = ints(&[0, 1, 2 * s]);
        let mut expected = w.clone();
        expected.extend(cross(&w, &dw));
        let p = l.lift_point(&[rat(s, 1), rat(1, 1)], &()).unwrap();
        assert_eq!(primitive_rational(&p), primitive_rational(&expected), "t = {s}");
    }
    let expected = primitive_rational(&ints(&[1, 2, 4, 4, -4, 1]));
    assert_eq!(
        primitive_rational(&l.lift_point(&[rat(2, 1), rat(1, 1)], &()).unwrap()),
        expected
    );
}

/// `[x₁..xₙ, y⁰..yⁿ⁻¹] ↦ [y¹..yⁿ⁻¹, y⁰ − xₙ, x₁..xₙ₋₁, 1]`, written out
/// directly.
fn phi_direct(n: usize, c: &[Rational]) -> Vec<Rational> {
    let (x, y) = c.split_at(n);
    let mut out: Vec<Rational> = y[1..].to_vec();
    out.push(&y[0] - &x[n - 1]);
    out.extend(x[..n - 1].iter().cloned());
    out.push(Rational::ONE);
    out
}

#[test]
fn phi_matches_direct_formula() {
    assert_eq!(phi_direct(2, &ints(&[1, 2, 3, 5])), ints(&[5, 1, 1, 1]));
    for n in 1..=4 {
        for shift in 0..5i64 {
            let c: Vec<Rational> = (0..2 * n as i64).map(|i| rat(i * i - shift * i + 1, i + 1)).collect();
            assert_eq!(phi_chart_map(n, &c).unwrap(), phi_direct(n, &c));
        }
    }
}

/// Bisection of `t^2 - 2` on `[lo, hi]` down to the given width.
fn bisect(mut lo: Rational, mut hi: Rational, width: &Rational) -> (Rational, Rational) {
    let f = |t: &Rational| t * t - Rational::from(2);
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / Rational::from(2);
        if (f(&lo) < Rational::ZERO) == (f(&mid) < Rational::ZERO) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[test]
fn square_root_of_two_intervals() {
    let t = var_names(&["t"]);
    let iso = isolate_real_roots(&parse_poly("t^2 - 2", &t).unwrap()).unwrap();
    assert_eq!(iso.roots.len(), 2);
    assert!(iso.rational_roots().is_empty());
    let width = rat(1, 1 << 20);
    let (plo, phi) = bisect(rat(1, 1), rat(2, 1), &width);
    let (nlo, nhi) = bisect(rat(-2, 1), rat(-1, 1), &width);
    let two = Rational::from(2);
    let mut found = [false, false];
    for r in &iso.roots {
        assert_eq!(r.multiplicity, 1);
        let (lo, hi) = r.bounds();
        assert!(&lo * &lo != two && &hi * &hi != two);
        // Each reported interval overlaps exactly one bisection bracket.
        if lo < phi && plo < hi {
            found[0] = true;
        } else if lo < nhi && nlo < hi {
            found[1] = true;
        } else {
            panic!("interval [{lo}, {hi}] holds no root of t^2 - 2");
        }
    }
    assert_eq!(found, [true, true]);
}

#[test]
fn induced_form_on_the_quotient() {
    // Standard form on Q^4 and H = {x0 = 0}: the center is ±e2, and H/⟨e2⟩
    // carries the restriction of ω to the chart's section vectors.
    let form = SymplecticForm::standard(2).unwrap();
    let h = Hyperplane::new(&form, &ints(&[1, 0, 0, 0])).unwrap();
    assert_eq!(primitive_rational(&h.center), primitive_rational(&ints(&[0, 0, 1, 0])));
    let chart = induced_form(&form, &h).unwrap();
    let j = |u: &[Rational], v: &[Rational]| &u[0] * &v[2] + &u[1] * &v[3] - &u[2] * &v[0] - &u[3] * &v[1];
    for (a, u) in chart.s.iter().enumerate() {
        assert_eq!(u[0], Rational::ZERO);
        for (b, v) in chart.s.iter().enumerate() {
            assert_eq!(chart.induced.entry(a, b), &j(u, v));
        }
    }
    assert_ne!(chart.induced.entry(0, 1), &Rational::ZERO);
}
