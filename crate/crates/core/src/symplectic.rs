//! Symplectic linear algebra on `V = Q^{2N}`.
//!
//! A form is stored as its Gram matrix `Ω`, with `ω(v, w) = vᵀ Ω w`. The
//! ω-perpendicular of a span `S` is the kernel of `B Ω` for a row basis `B`
//! of `S`, so it never needs `Ω⁻¹`; the center of a hyperplane `ker a` does,
//! and the inverse is computed once at construction.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kernel_basis, modular, rank_of_rows, Matrix};
use crate::rng::{self, Rng};
use crate::scalar::{primitive, primitive_rational, Field, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    omega: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
}

impl SymplecticForm {
    /// Block form `[[0, I], [-I, 0]]` of size `2·half_dim`.
    pub fn standard(half_dim: usize) -> Result<Self> {
        if half_dim == 0 {
            return Err(Error::InvalidArgument("half_dim must be at least 1".into()));
        }
        let d = 2 * half_dim;
        let mut m = vec![vec![Rational::ZERO; d]; d];
        for i in 0..half_dim {
            m[i][half_dim + i] = Rational::ONE;
            m[half_dim + i][i] = -Rational::ONE;
        }
        SymplecticForm::from_rows(m)
    }

    /// Validate an explicit Gram matrix: square, even, antisymmetric, nondegenerate.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d % 2 == 1 {
            return Err(Error::NotSymplectic(format!("size {d} is not positive and even")));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            for j in 0..d {
                if r[j] != -rows[j][i].clone() {
                    return Err(Error::NotSymplectic(format!("entry ({i},{j}) breaks antisymmetry")));
                }
            }
        }
        let m = Matrix::from_rows(rows.clone(), d, &());
        let mut aug = Vec::with_capacity(d);
        for (i, r) in rows.iter().enumerate() {
            let mut row = r.clone();
            row.extend((0..d).map(|j| if i == j { Rational::ONE } else { Rational::ZERO }));
            aug.push(row);
        }
        let ech = Rational::reduce(&Matrix::from_rows(aug, 2 * d, &()));
        if linalg::rank(&m) < d || ech.pivots[..d] != (0..d).collect::<Vec<_>>()[..] {
            return Err(Error::NotSymplectic("matrix is degenerate".into()));
        }
        let inverse = ech.rows.iter().map(|r| r[d..].to_vec()).collect();
        Ok(SymplecticForm { omega: rows, inverse })
    }

    pub fn from_matrix(m: &Matrix<Rational>) -> Result<Self> {
        SymplecticForm::from_rows(m.row_vecs())
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn half_dim(&self) -> usize {
        self.omega.len() / 2
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.omega
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.omega[i][j]
    }

    pub fn matrix(&self) -> Matrix<Rational> {
        Matrix::from_rows(self.omega.clone(), self.dim(), &())
    }

    fn check_len(&self, v: usize) -> Result<()> {
        if v != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v,
            });
        }
        Ok(())
    }

    /// `ω(v, w) = vᵀ Ω w`.
    pub fn eval(&self, v: &[Rational], w: &[Rational]) -> Result<Rational> {
        self.check_len(v.len())?;
        self.check_len(w.len())?;
        Ok(self.eval_field(v, w, &()))
    }

    /// Unchecked evaluation over any backend.
    pub fn eval_field<T: Field>(&self, v: &[T], w: &[T], ctx: &T::Ctx) -> T {
        let mut acc = T::zero(ctx);
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() && std::any::TypeId::of::<T>() == std::any::TypeId::of::<Rational>() {
                continue;
            }
            let mut row = T::zero(ctx);
            for (j, wj) in w.iter().enumerate() {
                let o = &self.omega[i][j];
                if *o != Rational::ZERO {
                    row = row.add(&T::from_rational(ctx, o).mul(wj));
                }
            }
            acc = acc.add(&vi.mul(&row));
        }
        acc
    }

    /// The covector `ω(·, v)` written as a row: `(Ω v)` up to sign conventions,
    /// i.e. the functional `u ↦ uᵀ Ω v`.
    pub fn pairing_covector(&self, v: &[Rational]) -> Vec<Rational> {
        self.omega
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .fold(Rational::ZERO, |acc, x| acc + x)
            })
            .collect()
    }

    /// `Ω⁻¹ a`.
    pub fn apply_inverse(&self, a: &[Rational]) -> Vec<Rational> {
        self.inverse
            .iter()
            .map(|row| {
                row.iter()
                    .zip(a)
                    .map(|(x, y)| x * y)
                    .fold(Rational::ZERO, |acc, x| acc + x)
            })
            .collect()
    }

    /// Basis of `{v : ω(b, v) = 0 for every row b}`.
    pub fn perp(&self, basis: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
        for b in basis {
            self.check_len(b.len())?;
        }
        if rank_of_rows(basis, &()) < basis.len() {
            return Err(Error::DependentRows);
        }
        // Row b Ω is the functional v ↦ bᵀ Ω v.
        let rows: Vec<Vec<Rational>> = basis
            .iter()
            .map(|b| {
                (0..self.dim())
                    .map(|j| {
                        b.iter()
                            .zip(&self.omega)
                            .map(|(x, r)| x * &r[j])
                            .fold(Rational::ZERO, |acc, x| acc + x)
                    })
                    .collect()
            })
            .collect();
        Ok(kernel_basis(&Matrix::from_rows(rows, self.dim(), &())))
    }

    pub fn classify(&self, basis: &[Vec<Rational>]) -> Result<SubspaceClass> {
        let perp = self.perp(basis)?;
        let contains = |big: &[Vec<Rational>], small: &[Vec<Rational>]| {
            let r = rank_of_rows(big, &());
            let mut all = big.to_vec();
            all.extend(small.iter().cloned());
            rank_of_rows(&all, &()) == r
        };
        let isotropic = contains(&perp, basis);
        let coisotropic = contains(basis, &perp);
        let mut both = basis.to_vec();
        both.extend(perp.iter().cloned());
        let trivial_meet = rank_of_rows(&both, &()) == basis.len() + perp.len();
        Ok(match (isotropic, coisotropic) {
            (true, true) => SubspaceClass::Lagrangian,
            (true, false) => SubspaceClass::Isotropic,
            (false, true) => SubspaceClass::Coisotropic,
            (false, false) if trivial_meet => SubspaceClass::Symplectic,
            _ => SubspaceClass::Generic,
        })
    }

    /// Random isotropic `K` of dimension `k` (greedy extension inside the
    /// current perpendicular) and its coisotropic perpendicular `K^⊥ω`.
    pub fn random_coisotropic(&self, k: usize, seed: u64) -> Result<Coisotropic> {
        if k == 0 || k > self.half_dim() {
            return Err(Error::InvalidArgument(format!(
                "codimension {k} outside 1..={}",
                self.half_dim()
            )));
        }
        let mut rng = rng::stream(seed, "coisotropic");
        let mut iso: Vec<Vec<Rational>> = Vec::new();
        while iso.len() < k {
            let room = if iso.is_empty() {
                kernel_basis(&Matrix::<Rational>::zeros(0, self.dim(), &()))
            } else {
                self.perp(&iso)?
            };
            let coeffs = rng::integer_vector(&mut rng, room.len(), 9);
            let v: Vec<Rational> = (0..self.dim())
                .map(|j| {
                    room.iter()
                        .zip(&coeffs)
                        .map(|(r, c)| &r[j] * c)
                        .fold(Rational::ZERO, |acc, x| acc + x)
                })
                .collect();
            let mut trial = iso.clone();
            trial.push(primitive_rational(&v));
            if rank_of_rows(&trial, &()) == trial.len() {
                iso = trial;
            }
        }
        let subspace = self.perp(&iso)?;
        Ok(Coisotropic {
            isotropic: iso,
            subspace,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceClass {
    Isotropic,
    Coisotropic,
    Lagrangian,
    Symplectic,
    Generic,
}

#[derive(Clone, Debug)]
pub struct Coisotropic {
    pub isotropic: Vec<Vec<Rational>>,
    pub subspace: Vec<Vec<Rational>>,
}

/// `H = ker a` with its center line `h = Ω⁻¹ a`, both in primitive integer form.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub covector: Vec<Rational>,
    pub center: Vec<Rational>,
}

impl Hyperplane {
    pub fn new(form: &SymplecticForm, a: &[Rational]) -> Result<Self> {
        form.check_len(a.len())?;
        if primitive(a).is_none() {
            return Err(Error::InvalidArgument("hyperplane covector is zero".into()));
        }
        let covector = primitive_rational(a);
        let center = primitive_rational(&form.apply_inverse(&covector));
        Ok(Hyperplane { covector, center })
    }

    /// Random integer covector with entries in `[-bound, bound]`.
    pub fn random(form: &SymplecticForm, rng: &mut Rng, bound: i64) -> Self {
        let a = rng::integer_vector(rng, form.dim(), bound);
        Hyperplane::new(form, &a).expect("nonzero covector")
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        linalg::dot(&self.covector, v) == Rational::ZERO
    }
}

/// Coordinates on `H/h`: `q` maps vectors of `H` to `Q^{2N-2}`, the columns
/// of `s` lift them back, and `Ω' = sᵀ Ω s` is the induced form.
#[derive(Clone, Debug)]
pub struct QuotientChart {
    pub hyperplane: Hyperplane,
    /// `2N-2` rows of length `2N`.
    pub q: Vec<Vec<Rational>>,
    /// `2N-2` section vectors in `H`, the columns of `s`.
    pub s: Vec<Vec<Rational>>,
    pub induced: SymplecticForm,
}

impl QuotientChart {
    pub fn project(&self, v: &[Rational]) -> Vec<Rational> {
        self.q.iter().map(|r| linalg::dot(r, v)).collect()
    }

    pub fn project_field<T: Field>(&self, v: &[T], ctx: &T::Ctx) -> Vec<T> {
        self.q
            .iter()
            .map(|r| {
                let mut acc = T::zero(ctx);
                for (a, x) in r.iter().zip(v) {
                    if *a != Rational::ZERO {
                        acc = acc.add(&T::from_rational(ctx, a).mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    /// Pull a covector on `H/h` back to the ambient space: `c ↦ c q`.
    pub fn pull_back(&self, c: &[Rational]) -> Vec<Rational> {
        let d = self.q.first().map_or(0, Vec::len);
        (0..d)
            .map(|j| {
                c.iter()
                    .zip(&self.q)
                    .map(|(x, r)| x * &r[j])
                    .fold(Rational::ZERO, |acc, x| acc + x)
            })
            .collect()
    }
}

/// Chart on `H/h` with a basis chosen greedily from the unit kernel basis of `a`.
pub fn induced_form(form: &SymplecticForm, hyperplane: &Hyperplane) -> Result<QuotientChart> {
    let d = form.dim();
    let a = Matrix::from_rows(vec![hyperplane.covector.clone()], d, &());
    let mut chosen: Vec<Vec<Rational>> = Vec::new();
    let mut with_h = vec![hyperplane.center.clone()];
    for v in kernel_basis(&a) {
        if chosen.len() == d - 2 {
            break;
        }
        with_h.push(v.clone());
        if rank_of_rows(&with_h, &()) == with_h.len() {
            chosen.push(v);
        } else {
            with_h.pop();
        }
    }
    induced_form_with_basis(form, hyperplane, chosen)
}

/// Chart on `H/h` with caller-supplied section vectors.
pub fn induced_form_with_basis(
    form: &SymplecticForm,
    hyperplane: &Hyperplane,
    basis: Vec<Vec<Rational>>,
) -> Result<QuotientChart> {
    let d = form.dim();
    if basis.len() != d - 2 {
        return Err(Error::ChartMismatch(format!(
            "expected {} basis vectors, found {}",
            d - 2,
            basis.len()
        )));
    }
    for b in &basis {
        form.check_len(b.len())?;
        if !hyperplane.contains(b) {
            return Err(Error::ChartMismatch("basis vector outside the hyperplane".into()));
        }
    }
    // Complement direction c with a(c) ≠ 0: the unit vector at a nonzero entry.
    let k = hyperplane
        .covector
        .iter()
        .position(|x| *x != Rational::ZERO)
        .expect("nonzero covector");
    let mut c = vec![Rational::ZERO; d];
    c[k] = Rational::ONE;
    let mut cols = basis.clone();
    cols.push(hyperplane.center.clone());
    cols.push(c);
    // Invert the matrix whose columns are [s | h | c].
    let mut aug = Vec::with_capacity(d);
    for i in 0..d {
        let mut row: Vec<Rational> = cols.iter().map(|col| col[i].clone()).collect();
        row.extend((0..d).map(|j| if i == j { Rational::ONE } else { Rational::ZERO }));
        aug.push(row);
    }
    let ech = Rational::reduce(&Matrix::from_rows(aug, 2 * d, &()));
    if ech.rank() < d || ech.pivots[d - 1] != d - 1 {
        return Err(Error::ChartMismatch(
            "basis is not independent modulo the center line".into(),
        ));
    }
    let q: Vec<Vec<Rational>> = ech.rows[..d - 2].iter().map(|r| r[d..].to_vec()).collect();
    let gram: Vec<Vec<Rational>> = basis
        .iter()
        .map(|u| basis.iter().map(|v| form.eval_field(u, v, &())).collect())
        .collect();
    let induced = SymplecticForm::from_rows(gram)?;
    Ok(QuotientChart {
        hyperplane: hyperplane.clone(),
        q,
        s: basis,
        induced,
    })
}

/// Linear space of antisymmetric forms making every frame isotropic.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub dim: usize,
    /// Basis of the solution space, each an antisymmetric matrix.
    pub basis: Vec<Vec<Vec<Rational>>>,
    /// Whether a nondegenerate element was found among the basis and one
    /// random combination.
    pub nondegenerate: bool,
    pub equations: usize,
    pub unknowns: usize,
}

impl FitResult {
    /// The unique generator as a form, when the space is a nondegenerate line.
    pub fn generator(&self) -> Option<SymplecticForm> {
        if self.dim != 1 {
            return None;
        }
        SymplecticForm::from_rows(self.basis[0].clone()).ok()
    }
}

/// Unknowns `Ω_ij (i < j)`; one linear equation `uᵀΩv = 0` per intra-frame pair.
pub fn fit_symplectic_form(frames: &[Vec<Vec<Rational>>]) -> Result<FitResult> {
    let Some(first) = frames.iter().flat_map(|f| f.first()).next() else {
        return Err(Error::InvalidArgument("no frames to fit".into()));
    };
    let d = first.len();
    let unknowns = d * (d - 1) / 2;
    let index = |i: usize, j: usize| i * d - i * (i + 1) / 2 + (j - i - 1);
    let mut rows: Vec<Vec<dashu_int::IBig>> = Vec::new();
    for frame in frames {
        let ints: Vec<Vec<dashu_int::IBig>> = frame
            .iter()
            .map(|v| {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    });
                }
                Ok(primitive(v).unwrap_or_else(|| vec![dashu_int::IBig::ZERO; d]))
            })
            .collect::<Result<_>>()?;
        for a in 0..ints.len() {
            for b in (a + 1)..ints.len() {
                let (u, v) = (&ints[a], &ints[b]);
                let mut row = vec![dashu_int::IBig::ZERO; unknowns];
                for i in 0..d {
                    for j in (i + 1)..d {
                        row[index(i, j)] = &u[i] * &v[j] - &u[j] * &v[i];
                    }
                }
                if row.iter().any(|x| *x != dashu_int::IBig::ZERO) {
                    rows.push(row);
                }
            }
        }
    }
    let equations = rows.len();
    let kernel = match modular::kernel(&rows, unknowns) {
        Some(k) => k,
        None => {
            let m = Matrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().cloned().map(Rational::from).collect())
                    .collect(),
                unknowns,
                &(),
            );
            kernel_basis(&m)
        }
    };
    let to_matrix = |x: &[Rational]| {
        let mut m = vec![vec![Rational::ZERO; d]; d];
        for i in 0..d {
            for j in (i + 1)..d {
                m[i][j] = x[index(i, j)].clone();
                m[j][i] = -x[index(i, j)].clone();
            }
        }
        m
    };
    let basis: Vec<Vec<Vec<Rational>>> = kernel.iter().map(|x| to_matrix(&primitive_rational(x))).collect();
    let full_rank = |m: &Vec<Vec<Rational>>| linalg::rank(&Matrix::from_rows(m.clone(), d, &())) == d;
    let mut nondegenerate = basis.iter().any(full_rank);
    if !nondegenerate && !basis.is_empty() {
        let mut rng = rng::stream(0, "fit-combination");
        let coeffs: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(-50..=50)).collect();
        let combo: Vec<Vec<Rational>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        basis
                            .iter()
                            .zip(&coeffs)
                            .map(|(b, &c)| &b[i][j] * Rational::from(c))
                            .fold(Rational::ZERO, |acc, x| acc + x)
                    })
                    .collect()
            })
            .collect();
        nondegenerate = full_rank(&combo);
    }
    Ok(FitResult {
        dim: basis.len(),
        basis,
        nondegenerate,
        equations,
        unknowns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn e(d: usize, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::ZERO; d];
        v[i] = Rational::ONE;
        v
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn standard_forms() {
        let f = SymplecticForm::standard(1).unwrap();
        assert_eq!(f.rows(), &[ints(&[0, 1]), ints(&[-1, 0])]);
        let g = SymplecticForm::standard(2).unwrap();
        assert_eq!(*g.entry(0, 2), rat(1, 1));
        assert_eq!(*g.entry(1, 3), rat(1, 1));
        assert!(SymplecticForm::standard(0).is_err());
    }

    #[test]
    fn evaluation() {
        let g = SymplecticForm::standard(2).unwrap();
        assert_eq!(g.eval(&e(4, 0), &e(4, 2)).unwrap(), rat(1, 1));
        assert_eq!(g.eval(&e(4, 0), &e(4, 1)).unwrap(), rat(0, 1));
        let v = ints(&[3, -1, 4, 1]);
        assert_eq!(g.eval(&v, &v).unwrap(), rat(0, 1));
        assert!(g.eval(&v, &ints(&[1, 2])).is_err());
    }

    #[test]
    fn perpendiculars() {
        let g = SymplecticForm::standard(2).unwrap();
        let h = g.perp(&[e(4, 1), e(4, 2), e(4, 3)]).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(primitive_rational(&h[0]), e(4, 2));
        let lag = vec![e(4, 0), e(4, 1)];
        let p = g.perp(&lag).unwrap();
        assert_eq!(rank_of_rows(&[lag.clone(), p.clone()].concat(), &()), 2);
        let all: Vec<_> = (0..4).map(|i| e(4, i)).collect();
        assert!(g.perp(&all).unwrap().is_empty());
        assert_eq!(g.perp(&[e(4, 0), e(4, 0)]), Err(Error::DependentRows));
    }

    #[test]
    fn classification() {
        let g = SymplecticForm::standard(2).unwrap();
        assert_eq!(g.classify(&[e(4, 0), e(4, 1)]).unwrap(), SubspaceClass::Lagrangian);
        assert_eq!(
            g.classify(&[e(4, 0), e(4, 1), e(4, 2)]).unwrap(),
            SubspaceClass::Coisotropic
        );
        assert_eq!(g.classify(&[e(4, 0), e(4, 2)]).unwrap(), SubspaceClass::Symplectic);
        assert_eq!(g.classify(&[e(4, 0)]).unwrap(), SubspaceClass::Isotropic);
    }

    #[test]
    fn induced_form_example() {
        let g = SymplecticForm::standard(2).unwrap();
        let a = Hyperplane::new(&g, &e(4, 0)).unwrap();
        assert_eq!(a.center, e(4, 2));
        let chart = induced_form(&g, &a).unwrap();
        assert_eq!(chart.s, vec![e(4, 1), e(4, 3)]);
        assert_eq!(chart.induced.rows(), &[ints(&[0, 1]), ints(&[-1, 0])]);
        assert_eq!(chart.project(&a.center), ints(&[0, 0]));
        for (k, s) in chart.s.iter().enumerate() {
            assert_eq!(chart.project(s), e(2, k));
        }
    }

    #[test]
    fn coisotropic_draws() {
        let g = SymplecticForm::standard(3).unwrap();
        for k in 1..=3 {
            let c = g.random_coisotropic(k, 11).unwrap();
            assert_eq!(c.subspace.len(), 6 - k);
            let class = g.classify(&c.subspace).unwrap();
            if k == 3 {
                assert_eq!(class, SubspaceClass::Lagrangian);
            } else {
                assert_eq!(class, SubspaceClass::Coisotropic);
            }
        }
        let a = g.random_coisotropic(1, 5).unwrap();
        let b = g.random_coisotropic(1, 5).unwrap();
        assert_eq!(a.isotropic, b.isotropic);
        assert!(g.random_coisotropic(4, 0).is_err());
    }

    #[test]
    fn fit_twisted_cubic() {
        let frames: Vec<Vec<Vec<Rational>>> = [0i64, 1, 2, 3, 5]
            .iter()
            .map(|&t| vec![ints(&[1, t, t * t, t * t * t]), ints(&[0, 1, 2 * t, 3 * t * t])])
            .collect();
        let fit = fit_symplectic_form(&frames).unwrap();
        assert_eq!(fit.dim, 1);
        assert!(fit.nondegenerate);
        let m = &fit.basis[0];
        assert_eq!(m[0][3], rat(1, 1));
        assert_eq!(m[1][2], rat(-3, 1));
        assert_eq!(m[0][1], rat(0, 1));
        assert_eq!(m[0][2], rat(0, 1));
        assert_eq!(m[1][3], rat(0, 1));
        assert_eq!(m[2][3], rat(0, 1));
    }

    #[test]
    fn fit_degenerate_cases() {
        let full: Vec<Vec<Rational>> = (0..4).map(|i| e(4, i)).collect();
        assert_eq!(fit_symplectic_form(&[full]).unwrap().dim, 0);
        assert_eq!(fit_symplectic_form(&[vec![e(4, 0)]]).unwrap().dim, 6);
        assert!(fit_symplectic_form(&[]).is_err());
    }
}
