//! Horizontally affine maps on a presented step-two Carnot group.
//!
//! For a presentation `π: F_n → G`, the h-affine maps on `G` are the sums
//! `Σ ψ_η` where `η` ranges over the subspaces `Λᵏ(π)` of forms whose
//! exterior annihilator contains `Ker π`. On the free group the building
//! block is `ψ̃_η(θ, ω) = ω^{d/2}∧η` for even degree `d` and
//! `θ∧ω^{(d-1)/2}∧η` for odd `d`, read as a multiple of the volume form.
//!
//! Throughout, "degree" means homogeneity degree under dilations and "grade"
//! means the grade of the coefficient form; they add up to `n`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::carnot::{CarnotPresentation, FreePoint, GroupPoint};
use crate::combinatorics::binomial;
use crate::exactla::{null_space, solve_particular, RatMatrix, Subspace};
use crate::exterior::{blades, top_pairing, volume_coefficient, wedge, wedge_power, wedge_truncated, Blade, KForm};
use crate::rational::{int, render, serde_vec};
use crate::sampling::{self, trial_rng};
use crate::{Error, Rational, Result};

/// `ψ̃_η` for a coefficient form `η` of grade `n - degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiTilde {
    degree: usize,
    eta: KForm,
}

impl PsiTilde {
    pub fn new(degree: usize, eta: KForm) -> Result<Self> {
        let n = eta.n();
        if degree > n || eta.grade() != n - degree {
            return Err(Error::GradeMismatch { expected: n.saturating_sub(degree), found: eta.grade() });
        }
        Ok(PsiTilde { degree, eta })
    }

    /// The map with coefficient form `eta`, whose degree is `n - grade`.
    pub fn from_eta(eta: KForm) -> Self {
        PsiTilde { degree: eta.n() - eta.grade(), eta }
    }

    pub fn n(&self) -> usize {
        self.eta.n()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eta(&self) -> &KForm {
        &self.eta
    }

    /// The degree-`d` form `ω^{d/2}` or `θ∧ω^{(d-1)/2}` that gets paired
    /// with the coefficient form.
    fn leading_form(degree: usize, p: &FreePoint) -> Result<KForm> {
        let power = wedge_power(p.omega(), degree / 2)?;
        if degree.is_multiple_of(2) {
            Ok(power)
        } else {
            wedge(p.theta(), &power)
        }
    }

    pub fn eval(&self, p: &FreePoint) -> Result<Rational> {
        if p.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: p.n() });
        }
        if self.eta.is_zero() {
            return Ok(Rational::zero());
        }
        top_pairing(&PsiTilde::leading_form(self.degree, p)?, &self.eta)
    }
}

impl fmt::Display for PsiTilde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi[{}]{{{}}}", self.degree, self.eta)
    }
}

pub fn psi_tilde_eval(pt: &PsiTilde, p: &FreePoint) -> Result<Rational> {
    pt.eval(p)
}

/// Matrix of `η ↦ a∧η` on `Λᵏ(Rⁿ)`, or `None` when the product lands above
/// grade `n` and the map is zero.
fn left_wedge_matrix(a: &KForm, k: usize) -> Option<RatMatrix> {
    let n = a.n();
    let target = a.grade() + k;
    if target > n {
        return None;
    }
    let mut m = RatMatrix::zeros(binomial(n, target), binomial(n, k));
    for (col, blade) in blades(n, k).into_iter().enumerate() {
        for (b, c) in a.terms() {
            if let Some((prod, sign)) = b.wedge(&blade) {
                let entry = &mut m[(prod.lex_index(), col)];
                if sign > 0 {
                    *entry += c;
                } else {
                    *entry -= c;
                }
            }
        }
    }
    Some(m)
}

/// Exterior annihilators of `η` in degrees one and two:
/// `{θ : θ∧η = 0}` and `{ω : ω∧η = 0}`.
pub fn anh12(eta: &KForm) -> (Subspace, Subspace) {
    let n = eta.n();
    let annihilator = |j: usize| -> Subspace {
        let cols: Vec<Vec<Rational>> = blades(n, j)
            .into_iter()
            .map(|b| {
                let prod = wedge_truncated(&KForm::from_blade(b), eta).expect("same dimension");
                prod.map(|p| p.coords()).unwrap_or_default()
            })
            .collect();
        let target = j + eta.grade();
        let rows = if target > n { 0 } else { binomial(n, target) };
        null_space(&RatMatrix::from_cols(rows, &cols).expect("columns share the target grade"))
    };
    (annihilator(1), annihilator(2))
}

/// The stacked conditions `θ_b∧η = 0`, `ω_b∧η = 0` over the kernel bases,
/// as a matrix acting on `Λᵏ` coordinates.
fn kernel_conditions(pres: &CarnotPresentation, k: usize) -> Result<RatMatrix> {
    let n = pres.n();
    let mut rows = Vec::new();
    let generators = pres
        .kernel1()
        .basis()
        .iter()
        .map(|v| KForm::from_coords(n, 1, v))
        .chain(pres.kernel2().basis().iter().map(|v| KForm::from_coords(n, 2, v)));
    for g in generators {
        if let Some(m) = left_wedge_matrix(&g?, k) {
            rows.extend(m.to_rows().into_iter().filter(|r| r.iter().any(|v| !v.is_zero())));
        }
    }
    RatMatrix::from_rows(binomial(n, k), rows)
}

/// `Λᵏ(π) = {η ∈ Λᵏ(Rⁿ) : Ker π ⊂ Anh¹²(η)}` as a coordinate subspace.
pub fn lambda_k_pi(pres: &CarnotPresentation, k: usize) -> Result<Subspace> {
    if k > pres.n() {
        return Err(Error::GradeOverflow { left: k, right: 0, n: pres.n() });
    }
    Ok(null_space(&kernel_conditions(pres, k)?))
}

/// `dim Λᵏ(π)` computed as a rank deficiency, without building a basis.
pub fn lambda_k_pi_dim(pres: &CarnotPresentation, k: usize) -> Result<usize> {
    if k > pres.n() {
        return Err(Error::GradeOverflow { left: k, right: 0, n: pres.n() });
    }
    Ok(binomial(pres.n(), k) - kernel_conditions(pres, k)?.rank())
}

/// Whether `η` lies in `Λᵏ(π)` for its own grade `k`.
pub fn in_lambda_k_pi(pres: &CarnotPresentation, eta: &KForm) -> Result<bool> {
    let n = pres.n();
    if eta.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: eta.n() });
    }
    for v in pres.kernel1().basis() {
        if let Some(p) = wedge_truncated(&KForm::from_coords(n, 1, v)?, eta)? {
            if !p.is_zero() {
                return Ok(false);
            }
        }
    }
    for v in pres.kernel2().basis() {
        if let Some(p) = wedge_truncated(&KForm::from_coords(n, 2, v)?, eta)? {
            if !p.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The grades `n - r ..= n` that carry h-affine maps, highest grade (lowest
/// degree) first.
pub fn relevant_grades(pres: &CarnotPresentation) -> impl Iterator<Item = usize> {
    let n = pres.n();
    (n - pres.rank()..=n).rev()
}

/// `(grade, dim Λ^grade(π))` for every relevant grade.
pub fn lambda_dims(pres: &CarnotPresentation) -> Result<Vec<(usize, usize)>> {
    relevant_grades(pres).map(|k| Ok((k, lambda_k_pi_dim(pres, k)?))).collect()
}

/// An h-affine map on `G`, stored as its coefficient forms. Evaluation on
/// `G` goes through the fixed section of the presentation.
#[derive(Clone, Debug)]
pub struct HAffineMap {
    pres: Arc<CarnotPresentation>,
    terms: Vec<PsiTilde>,
}

impl HAffineMap {
    /// Checks that every coefficient form passes the `Λᵏ(π)` membership test.
    pub fn new(pres: Arc<CarnotPresentation>, terms: Vec<PsiTilde>) -> Result<Self> {
        for t in &terms {
            if !in_lambda_k_pi(&pres, t.eta())? {
                return Err(Error::NotInSubspace(format!("{} is not in the grade-{} space", t.eta(), t.eta().grade())));
            }
        }
        let terms = terms.into_iter().filter(|t| !t.eta().is_zero()).collect();
        Ok(HAffineMap { pres, terms })
    }

    pub fn presentation(&self) -> &Arc<CarnotPresentation> {
        &self.pres
    }

    pub fn terms(&self) -> &[PsiTilde] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(PsiTilde::degree).max().unwrap_or(0)
    }

    /// The composition with `π`, evaluated at a point of `F_n`.
    pub fn eval_free(&self, p: &FreePoint) -> Result<Rational> {
        let n = self.pres.n();
        if p.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.n() });
        }
        // Leading forms by degree, sharing the powers of ω across terms.
        let mut leads: Vec<Option<KForm>> = vec![None; n + 1];
        let mut total = Rational::zero();
        for term in &self.terms {
            let d = term.degree();
            if leads[d].is_none() {
                leads[d] = Some(match d {
                    0 => KForm::one(n),
                    1 => p.theta().clone(),
                    _ => match &leads[d - 2] {
                        Some(prev) => wedge(prev, p.omega())?,
                        None => PsiTilde::leading_form(d, p)?,
                    },
                });
            }
            total += top_pairing(leads[d].as_ref().expect("filled above"), term.eta())?;
        }
        Ok(total)
    }

    pub fn eval(&self, q: &GroupPoint) -> Result<Rational> {
        self.eval_free(&self.pres.lift(q)?)
    }

    /// Coefficient listing with `k` the degree of each term.
    pub fn entries(&self) -> Vec<BasisEntry> {
        self.terms
            .iter()
            .map(|t| BasisEntry { k: t.degree(), eta_coeffs: t.eta().coords() })
            .collect()
    }
}

impl fmt::Display for HAffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisEntry {
    /// Homogeneity degree; the coefficient form has grade `n - k`.
    pub k: usize,
    #[serde(with = "serde_vec")]
    pub eta_coeffs: Vec<Rational>,
}

/// One map per basis vector of each `Λᵏ(π)`, constants first.
pub fn haffine_basis(pres: &Arc<CarnotPresentation>) -> Result<Vec<HAffineMap>> {
    let n = pres.n();
    let mut out = Vec::new();
    for k in relevant_grades(pres) {
        for v in lambda_k_pi(pres, k)?.basis() {
            let term = PsiTilde::from_eta(KForm::from_coords(n, k, v)?);
            out.push(HAffineMap { pres: Arc::clone(pres), terms: vec![term] });
        }
    }
    Ok(out)
}

pub fn dim_haffine(pres: &CarnotPresentation) -> Result<usize> {
    Ok(lambda_dims(pres)?.iter().map(|&(_, d)| d).sum())
}

/// Dimension of the affine maps on `V1 × V2`.
pub fn dim_affine(pres: &CarnotPresentation) -> usize {
    1 + pres.rank() + pres.dim_v2()
}

/// The same dimension read off the top three grades of `Λᵏ(π)`.
pub fn dim_affine_via_forms(pres: &CarnotPresentation) -> Result<usize> {
    let n = pres.n();
    (n.saturating_sub(2)..=n).try_fold(0, |acc, k| Ok(acc + lambda_k_pi_dim(pres, k)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Affine,
    /// A nonzero coefficient form of grade `n - 3` giving a cubic map.
    NonAffine { evidence: KForm },
}

impl Verdict {
    pub fn is_affine(&self) -> bool {
        matches!(self, Verdict::Affine)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Affine => "affine",
            Verdict::NonAffine { .. } => "non_affine",
        }
    }
}

/// Affine exactly when `Λ^{n-3}(π) = 0`. Rank-two groups are always affine.
pub fn classify(pres: &CarnotPresentation) -> Result<Verdict> {
    let n = pres.n();
    if pres.rank() <= 2 || n < 3 {
        return Ok(Verdict::Affine);
    }
    let space = lambda_k_pi(pres, n - 3)?;
    match space.basis().first() {
        None => Ok(Verdict::Affine),
        Some(v) => Ok(Verdict::NonAffine { evidence: KForm::from_coords(n, n - 3, v)? }),
    }
}

/// A bilinear map `b(x, z) = xᵀ·B·z` on `V1 × V2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearWitness {
    pub matrix: RatMatrix,
}

impl BilinearWitness {
    pub fn eval(&self, x: &[Rational], z: &[Rational]) -> Result<Rational> {
        let bz = self.matrix.mul_vec(z)?;
        Ok(crate::exactla::dot(x, &bz))
    }
}

/// The solution space of `b(e_i,[e_j,e_k]) + b(e_j,[e_i,e_k]) = 0` for all
/// `i <= j` and all `k`, in coordinates `B[i][a]` flattened row-major.
fn bilinear_solutions(pres: &CarnotPresentation) -> Result<Subspace> {
    let (r, m) = (pres.rank(), pres.dim_v2());
    let mut rows = Vec::new();
    for i in 0..r {
        for j in i..r {
            for k in 0..r {
                let mut row = vec![Rational::zero(); r * m];
                for (a, v) in pres.basis_bracket(j, k).into_iter().enumerate() {
                    row[i * m + a] += v;
                }
                for (a, v) in pres.basis_bracket(i, k).into_iter().enumerate() {
                    row[j * m + a] += v;
                }
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    Ok(null_space(&RatMatrix::from_rows(r * m, rows)?))
}

pub fn bilinear_witness_dim(pres: &CarnotPresentation) -> Result<usize> {
    Ok(bilinear_solutions(pres)?.dim())
}

/// A nonzero bilinear `b` with `b(x,[x,x']) = 0`, scaled so that the first
/// nonzero value `b(e_i,[e_j,e_k])` (`j < k`, lexicographic in `(i,j,k)`)
/// equals one. `None` exactly when h-affine maps are affine.
pub fn bilinear_witness(pres: &CarnotPresentation) -> Result<Option<BilinearWitness>> {
    let (r, m) = (pres.rank(), pres.dim_v2());
    let space = bilinear_solutions(pres)?;
    let Some(v) = space.basis().first() else {
        return Ok(None);
    };
    let rows = v.chunks(m).map(<[Rational]>::to_vec).collect();
    let mut witness = BilinearWitness { matrix: RatMatrix::from_rows(m, rows)? };
    if let Some((_, value)) = first_triple_value(pres, &witness)? {
        let scale = value.recip();
        let rows = (0..r).map(|i| witness.matrix.row(i).iter().map(|x| x * &scale).collect()).collect();
        witness.matrix = RatMatrix::from_rows(m, rows)?;
    }
    Ok(Some(witness))
}

/// Indices `(i, j, k)` of an entry `b(e_i, [e_j, e_k])`.
type Triple = (usize, usize, usize);

/// First `(i,j,k)` with `j < k` and `b(e_i,[e_j,e_k]) != 0`, optionally
/// restricted to a fixed `i`.
fn first_triple_value(
    pres: &CarnotPresentation,
    b: &BilinearWitness,
) -> Result<Option<(Triple, Rational)>> {
    let r = pres.rank();
    for i in 0..r {
        if let Some(hit) = first_pair_value(pres, b, i)? {
            return Ok(Some(((i, hit.0, hit.1), hit.2)));
        }
    }
    Ok(None)
}

fn first_pair_value(
    pres: &CarnotPresentation,
    b: &BilinearWitness,
    i: usize,
) -> Result<Option<(usize, usize, Rational)>> {
    let r = pres.rank();
    let row = b.matrix.row(i);
    for j in 0..r {
        for k in j + 1..r {
            let value = crate::exactla::dot(row, &pres.basis_bracket(j, k));
            if !value.is_zero() {
                return Ok(Some((j, k, value)));
            }
        }
    }
    Ok(None)
}

fn unit(r: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); r];
    v[i] = Rational::one();
    v
}

/// Three basis vectors of `V1` generating a copy of `F_3`, built from the
/// bilinear witness: `x1 = e_i` for the first nonzero row of `B`, then the
/// first pair `e_j, e_k` with `b(x1,[e_j,e_k]) != 0`.
pub fn find_f3_subgroup(pres: &CarnotPresentation) -> Result<Option<[Vec<Rational>; 3]>> {
    let Some(b) = bilinear_witness(pres)? else {
        return Ok(None);
    };
    let r = pres.rank();
    let Some(i) = (0..r).find(|&i| b.matrix.row(i).iter().any(|v| !v.is_zero())) else {
        return Ok(None);
    };
    let (j, k, _) = first_pair_value(pres, &b, i)?
        .ok_or_else(|| Error::InvalidStructure("bracket images do not span the second layer".into()))?;
    let triple = [unit(r, i), unit(r, j), unit(r, k)];
    let span = crate::carnot::lie_span3(pres, [&triple[0], &triple[1], &triple[2]])?;
    if !span.is_free() {
        return Err(Error::InvalidStructure(format!(
            "constructed triple spans ({}, {}) instead of a free subgroup",
            span.dim_horizontal, span.dim_brackets
        )));
    }
    Ok(Some(triple))
}

/// Given the images `η̄(dx_1), …, η̄(dx_n)` of a linear map `Λ¹ → Λᵏ` with
/// `θ∧η̄(θ) = 0`, returns the unique `η` of grade `k-1` with `η̄(θ) = θ∧η`.
pub fn cartan_divide(images: &[KForm]) -> Result<KForm> {
    let n = images.len();
    let Some(first) = images.first() else {
        return Err(Error::UnsupportedDimension(0));
    };
    let k = first.grade();
    for img in images {
        if img.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: img.n() });
        }
        if img.grade() != k {
            return Err(Error::GradeMismatch { expected: k, found: img.grade() });
        }
    }
    if k == 0 {
        return Err(Error::GradeMismatch { expected: 1, found: 0 });
    }

    let kills = |theta: &KForm, image: &KForm| -> Result<bool> {
        Ok(wedge_truncated(theta, image)?.is_none_or(|p| p.is_zero()))
    };
    for i in 0..n {
        let dxi = KForm::dx(n, i + 1);
        if !kills(&dxi, &images[i])? {
            return Err(Error::HypothesisFailed { theta: dxi });
        }
        for j in i + 1..n {
            let theta = &dxi + &KForm::dx(n, j + 1);
            if !kills(&theta, &(&images[i] + &images[j]))? {
                return Err(Error::HypothesisFailed { theta });
            }
        }
    }

    // Coefficient of dx_I read off the image of dx_i for i outside I, with
    // the sign of dx_i∧dx_I against the increasing blade.
    let read = |blade: &Blade, i: usize| -> Rational {
        let (merged, sign) = Blade::from_mask(n, 1 << i).wedge(blade).expect("i is outside the blade");
        let c = images[i].coeff(&merged);
        if sign > 0 {
            c
        } else {
            -c
        }
    };
    let mut eta = KForm::zero(n, k - 1);
    for blade in blades(n, k - 1) {
        let outside: Vec<usize> = (0..n).filter(|&i| blade.mask() & (1 << i) == 0).collect();
        let value = read(&blade, outside[0]);
        for &j in &outside[1..] {
            if read(&blade, j) != value {
                return Err(Error::Inconsistent { index: blade.to_string() });
            }
        }
        eta.add_term(blade, value);
    }
    for (i, img) in images.iter().enumerate() {
        if &wedge(&KForm::dx(n, i + 1), &eta)? != img {
            return Err(Error::Inconsistent { index: format!("dx_{}", i + 1) });
        }
    }
    Ok(eta)
}

/// The images `θ ↦ θ∧η` on the basis 1-forms, the natural input of
/// [`cartan_divide`].
pub fn wedge_images(eta: &KForm) -> Result<Vec<KForm>> {
    (1..=eta.n()).map(|i| wedge(&KForm::dx(eta.n(), i), eta)).collect()
}

fn vandermonde(n: usize) -> RatMatrix {
    let mut v = RatMatrix::zeros(n + 1, n + 1);
    for t in 1..=n + 1 {
        let mut power = Rational::one();
        for j in 0..=n {
            v[(t - 1, j)] = power.clone();
            power *= int(t as i64);
        }
    }
    v
}

/// Coefficients `(f_0(p), …, f_n(p))` of the polynomial `t ↦ f(δ_t p)`,
/// interpolated exactly at `t = 1, …, n+1`.
pub fn dilation_coefficients<F>(f: F, p: &FreePoint) -> Result<Vec<Rational>>
where
    F: Fn(&FreePoint) -> Result<Rational>,
{
    let n = p.n();
    let values = (1..=n + 1).map(|t| f(&p.dilate(&int(t as i64)))).collect::<Result<Vec<_>>>()?;
    solve_particular(&vandermonde(n), &values)
}

/// Whether the interpolated polynomial also matches `f` at `t = n + 2`.
pub fn dilation_fit_holds<F>(f: F, p: &FreePoint, coefficients: &[Rational]) -> Result<bool>
where
    F: Fn(&FreePoint) -> Result<Rational>,
{
    let t = int(p.n() as i64 + 2);
    let mut predicted = Rational::zero();
    for c in coefficients.iter().rev() {
        predicted = predicted * &t + c;
    }
    Ok(f(&p.dilate(&t))? == predicted)
}

/// One sample point per grade-`degree` blade `J`, chosen so that the
/// degree-`degree` leading form is a nonzero multiple of `dx_J`. The
/// resulting sample system is diagonal up to reordering.
pub fn spanning_samples(n: usize, degree: usize) -> Vec<FreePoint> {
    blades(n, degree)
        .into_iter()
        .map(|blade| {
            let idx = blade.indices();
            let (theta, rest) = if degree % 2 == 1 {
                (KForm::dx(n, idx[0]), &idx[1..])
            } else {
                (KForm::zero(n, 1), &idx[..])
            };
            let mut omega = KForm::zero(n, 2);
            for pair in rest.chunks(2) {
                omega.add_term(Blade::new(n, pair), Rational::one());
            }
            FreePoint::new(theta, omega).expect("grades 1 and 2")
        })
        .collect()
}

/// Solves for the coefficient form `η` (grade `n - degree`) from samples of
/// the degree-`degree` component: `value = ψ̃_η(point)`.
pub fn recover_coefficient_form(samples: &[(FreePoint, Rational)], n: usize, degree: usize) -> Result<KForm> {
    if degree > n {
        return Err(Error::GradeOverflow { left: degree, right: 0, n });
    }
    let grade = n - degree;
    let columns = blades(n, grade);
    let mut rows = Vec::with_capacity(samples.len());
    let mut rhs = Vec::with_capacity(samples.len());
    for (p, value) in samples {
        if p.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.n() });
        }
        let lead = PsiTilde::leading_form(degree, p)?;
        let row = columns
            .iter()
            .map(|b| volume_coefficient(&wedge(&lead, &KForm::from_blade(*b))?))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
        rhs.push(value.clone());
    }
    let system = RatMatrix::from_rows(columns.len(), rows)?;
    let rank = system.rank();
    if rank < columns.len() {
        return Err(Error::UnderdeterminedSamples { null_dim: columns.len() - rank });
    }
    let coords = solve_particular(&system, &rhs).map_err(|_| Error::InconsistentSamples)?;
    KForm::from_coords(n, grade, &coords)
}

/// Full inversion of `f = Σ ψ̃_{η_g}` on `F_n`: returns `η_0, …, η_n`
/// indexed by grade.
pub fn recover_decomposition<F>(f: F, n: usize) -> Result<Vec<KForm>>
where
    F: Fn(&FreePoint) -> Result<Rational>,
{
    let mut by_grade = vec![KForm::zero(n, 0); n + 1];
    for degree in 0..=n {
        let samples = spanning_samples(n, degree)
            .into_iter()
            .map(|p| {
                let coeffs = dilation_coefficients(&f, &p)?;
                Ok((p, coeffs[degree].clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        by_grade[n - degree] = recover_coefficient_form(&samples, n, degree)?;
    }
    Ok(by_grade)
}

/// A line in `G` on which a map failed a second-difference test:
/// `f(base·2s) - 2 f(base·s) + f(base) = second_difference` with `s` the step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineWitness {
    pub base: GroupPoint,
    pub step: GroupPoint,
    pub second_difference: Rational,
}

impl fmt::Display for LineWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Rational]| v.iter().map(render).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "base x=({}) z=({}), step x=({}) z=({}), second difference {}",
            show(&self.base.x),
            show(&self.base.z),
            show(&self.step.x),
            show(&self.step.z),
            render(&self.second_difference)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LineCheck {
    Pass,
    Fail(LineWitness),
}

impl LineCheck {
    pub fn passed(&self) -> bool {
        matches!(self, LineCheck::Pass)
    }
}

fn scale_point(p: &GroupPoint, t: &Rational) -> GroupPoint {
    GroupPoint::new(p.x.iter().map(|v| v * t).collect(), p.z.iter().map(|v| v * t).collect())
}

/// Second difference of `t ↦ f(base·(t·step))` at `t = 0, 1, 2`. The curve
/// is an affine line of `V1 × V2`, so an affine restriction gives zero.
pub fn group_second_difference<F>(f: &F, pres: &CarnotPresentation, base: &GroupPoint, step: &GroupPoint) -> Result<Rational>
where
    F: Fn(&GroupPoint) -> Result<Rational> + ?Sized,
{
    let one = pres.mul(base, step)?;
    let two = pres.mul(base, &scale_point(step, &int(2)))?;
    Ok(f(&two)? - int(2) * f(&one)? + f(base)?)
}

/// Kinds of lines along which h-affine maps are known to be affine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `p·(ty, 0)`.
    Horizontal,
    /// `p·(0, t[x,y])`.
    Bracket,
    /// `p·t(ax+by, c[x,y])`, a direction inside `Lie(x, y)`.
    Sigma,
    /// `(x + t e_i, z)` with `z` fixed.
    Slice,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Horizontal, Direction::Bracket, Direction::Sigma, Direction::Slice];

    pub fn name(&self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal lines",
            Direction::Bracket => "[V1,V1] directions",
            Direction::Sigma => "Lie(x,y) directions",
            Direction::Slice => "fixed-z slices",
        }
    }
}

/// Random second-difference test of `f` along lines of the given kind. A
/// failure is exact; a pass is probabilistic evidence.
pub fn check_direction<F>(
    f: &F,
    pres: &CarnotPresentation,
    direction: Direction,
    seed: u64,
    trials: u64,
) -> Result<LineCheck>
where
    F: Fn(&GroupPoint) -> Result<Rational> + ?Sized,
{
    let (r, m) = (pres.rank(), pres.dim_v2());
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let base = sampling::group_point(&mut rng, r, m);
        let step = match direction {
            Direction::Horizontal => GroupPoint::horizontal(sampling::nonzero_vector(&mut rng, r), m),
            Direction::Bracket => {
                let (x, y) = (sampling::vector(&mut rng, r), sampling::vector(&mut rng, r));
                GroupPoint::vertical(r, pres.bracket(&x, &y)?)
            }
            Direction::Sigma => {
                let (x, y) = (sampling::vector(&mut rng, r), sampling::vector(&mut rng, r));
                let (a, b, c) = (sampling::rational(&mut rng), sampling::rational(&mut rng), sampling::rational(&mut rng));
                let horizontal = x.iter().zip(&y).map(|(u, v)| &a * u + &b * v).collect();
                let vertical = pres.bracket(&x, &y)?.into_iter().map(|v| &c * v).collect();
                GroupPoint::new(horizontal, vertical)
            }
            Direction::Slice => {
                let e = unit(r, (trial % r as u64) as usize);
                let at = |t: i64| GroupPoint::new(base.x.iter().zip(&e).map(|(u, v)| u + v * int(t)).collect(), base.z.clone());
                let diff = f(&at(2))? - int(2) * f(&at(1))? + f(&base)?;
                if !diff.is_zero() {
                    return Ok(LineCheck::Fail(LineWitness {
                        base: base.clone(),
                        step: GroupPoint::horizontal(e, m),
                        second_difference: diff,
                    }));
                }
                continue;
            }
        };
        let diff = group_second_difference(f, pres, &base, &step)?;
        if !diff.is_zero() {
            return Ok(LineCheck::Fail(LineWitness { base, step, second_difference: diff }));
        }
    }
    Ok(LineCheck::Pass)
}

/// Random horizontal-line test of the defining property of h-affine maps.
pub fn verify_h_affinity<F>(f: &F, pres: &CarnotPresentation, seed: u64, trials: u64) -> Result<LineCheck>
where
    F: Fn(&GroupPoint) -> Result<Rational> + ?Sized,
{
    check_direction(f, pres, Direction::Horizontal, seed, trials)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetivierProbe {
    /// `ad_x` is not onto for this `x`.
    NotMetivier(Vec<Rational>),
    /// No deficient `x` was found; this is not a proof.
    ProbablyMetivier,
}

/// Looks for `x != 0` with `rank ad_x < dim V2` among basis vectors, their
/// pairwise sums and `trials` random vectors.
pub fn metivier_probe(pres: &CarnotPresentation, seed: u64, trials: u64) -> Result<MetivierProbe> {
    let (r, m) = (pres.rank(), pres.dim_v2());
    let mut candidates: Vec<Vec<Rational>> = (0..r).map(|i| unit(r, i)).collect();
    for i in 0..r {
        for j in i + 1..r {
            candidates.push(candidates[i].iter().zip(&candidates[j]).map(|(a, b)| a + b).collect());
        }
    }
    for x in candidates {
        if pres.ad_matrix(&x)?.rank() < m {
            return Ok(MetivierProbe::NotMetivier(x));
        }
    }
    for trial in 0..trials {
        let x = sampling::nonzero_vector(&mut trial_rng(seed, trial), r);
        if pres.ad_matrix(&x)?.rank() < m {
            return Ok(MetivierProbe::NotMetivier(x));
        }
    }
    Ok(MetivierProbe::ProbablyMetivier)
}

/// Number of sign changes in a sequence, ignoring zeros.
pub fn sign_changes(values: &[Rational]) -> usize {
    let signs: Vec<bool> = values.iter().filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The grid `-4, -7/2, …, 4`.
pub fn default_t_grid() -> Vec<Rational> {
    (-8..=8).map(|i| crate::rational::frac(i, 2)).collect()
}

/// Along random horizontal lines, `f` changes sign at most once over the
/// grid, as sublevel sets of h-affine maps are precisely monotone.
pub fn monotone_line_check(f: &HAffineMap, seed: u64, trials: u64, t_grid: &[Rational]) -> Result<LineCheck> {
    let pres = f.presentation();
    let (r, m) = (pres.rank(), pres.dim_v2());
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let base = sampling::group_point(&mut rng, r, m);
        let step = GroupPoint::horizontal(sampling::nonzero_vector(&mut rng, r), m);
        // base · (t·step) = (x + t·s, z + t·[x, s]) for horizontal s.
        let twist = pres.bracket(&base.x, &step.x)?;
        let values = t_grid
            .iter()
            .map(|t| {
                let x = base.x.iter().zip(&step.x).map(|(a, b)| a + t * b).collect();
                let z = base.z.iter().zip(&twist).map(|(a, b)| a + t * b).collect();
                f.eval(&GroupPoint { x, z })
            })
            .collect::<Result<Vec<_>>>()?;
        if sign_changes(&values) > 1 {
            return Ok(LineCheck::Fail(LineWitness { base, step, second_difference: int(sign_changes(&values) as i64) }));
        }
    }
    Ok(LineCheck::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carnot::{free_group, lift_to_free, quaternionic_structure};
    use crate::rational::frac;

    fn dx(n: usize, i: usize) -> KForm {
        KForm::dx(n, i)
    }

    fn e(n: usize, idx: &[usize]) -> KForm {
        KForm::from_blade(Blade::new(n, idx))
    }

    #[test]
    fn psi_tilde_examples() {
        let p = FreePoint::new(dx(3, 1), e(3, &[2, 3])).unwrap();
        assert_eq!(PsiTilde::new(3, KForm::one(3)).unwrap().eval(&p).unwrap(), int(1));
        assert_eq!(PsiTilde::new(0, KForm::volume(3)).unwrap().eval(&p).unwrap(), int(1));
        let q = FreePoint::new(dx(4, 2), &e(4, &[1, 2]) + &e(4, &[3, 4])).unwrap();
        assert_eq!(PsiTilde::new(4, KForm::one(4)).unwrap().eval(&q).unwrap(), int(2));
        assert!(PsiTilde::new(2, KForm::one(3)).is_err());
    }

    #[test]
    fn annihilator_examples() {
        let (a1, a2) = anh12(&dx(3, 1));
        assert_eq!(a1, Subspace::span(3, vec![dx(3, 1).coords()]).unwrap());
        assert_eq!(a2, Subspace::span(3, vec![e(3, &[1, 2]).coords(), e(3, &[1, 3]).coords()]).unwrap());

        let eta = &e(5, &[1, 2]) + &e(5, &[4, 5]);
        let (a1, a2) = anh12(&eta);
        assert!(a1.is_zero());
        let expected = vec![
            (&e(5, &[1, 2]) - &e(5, &[4, 5])).coords(),
            e(5, &[1, 4]).coords(),
            e(5, &[1, 5]).coords(),
            e(5, &[2, 4]).coords(),
            e(5, &[2, 5]).coords(),
        ];
        assert_eq!(a2, Subspace::span(10, expected).unwrap());

        let (a1, a2) = anh12(&KForm::zero(4, 2));
        assert_eq!((a1, a2), (Subspace::full(4), Subspace::full(6)));
        let (a1, a2) = anh12(&KForm::volume(3));
        assert_eq!((a1.dim(), a2.dim()), (3, 3));
    }

    #[test]
    fn free_group_dimensions() {
        for n in 2..=6 {
            let f = free_group(n).unwrap();
            assert_eq!(dim_haffine(&f).unwrap(), 1 << n);
            assert_eq!(dim_affine(&f), 1 + n + n * (n - 1) / 2);
            assert_eq!(dim_affine_via_forms(&f).unwrap(), dim_affine(&f));
        }
    }

    #[test]
    fn verdicts_on_small_groups() {
        assert_eq!(classify(&free_group(2).unwrap()).unwrap(), Verdict::Affine);
        assert_eq!(
            classify(&free_group(3).unwrap()).unwrap(),
            Verdict::NonAffine { evidence: KForm::one(3) }
        );
        let quat = lift_to_free(&quaternionic_structure()).unwrap();
        assert!(classify(&quat).unwrap().is_affine());
        assert!(bilinear_witness(&quat).unwrap().is_none());
        assert!(bilinear_witness(&free_group(2).unwrap()).unwrap().is_none());
    }

    #[test]
    fn f3_witness_and_subgroup() {
        let f3 = free_group(3).unwrap();
        let b = bilinear_witness(&f3).unwrap().unwrap();
        let (x1, x2, x3) = (unit(3, 0), unit(3, 1), unit(3, 2));
        assert_eq!(b.eval(&x1, &f3.bracket(&x2, &x3).unwrap()).unwrap(), int(1));
        assert_eq!(find_f3_subgroup(&f3).unwrap(), Some([x1, x2, x3]));
    }

    #[test]
    fn cartan_division_examples() {
        let zero: Vec<KForm> = (0..3).map(|_| KForm::zero(3, 2)).collect();
        assert_eq!(cartan_divide(&zero).unwrap(), KForm::zero(3, 1));

        let eta = &dx(3, 1) + &dx(3, 3).scale(&int(2));
        assert_eq!(cartan_divide(&wedge_images(&eta).unwrap()).unwrap(), eta);

        let bad = vec![dx(3, 2), KForm::zero(3, 1), KForm::zero(3, 1)];
        match cartan_divide(&bad) {
            Err(Error::HypothesisFailed { theta }) => assert_eq!(theta, dx(3, 1)),
            other => panic!("expected a hypothesis failure, got {other:?}"),
        }
    }

    #[test]
    fn dilation_coefficient_examples() {
        let f3 = Arc::new(free_group(3).unwrap());
        let map = HAffineMap::new(
            f3,
            vec![PsiTilde::from_eta(KForm::volume(3)), PsiTilde::from_eta(KForm::one(3))],
        )
        .unwrap();
        let p = FreePoint::new(dx(3, 1), e(3, &[2, 3])).unwrap();
        let f = |q: &FreePoint| map.eval_free(q);
        let coeffs = dilation_coefficients(f, &p).unwrap();
        assert_eq!(coeffs, vec![int(1), int(0), int(0), int(1)]);
        assert!(dilation_fit_holds(f, &p, &coeffs).unwrap());

        let constant = |_: &FreePoint| Ok(frac(5, 3));
        assert_eq!(dilation_coefficients(constant, &p).unwrap(), vec![frac(5, 3), int(0), int(0), int(0)]);

        let reciprocal = |q: &FreePoint| Ok(int(1) / (int(1) + q.theta().coeff(&Blade::new(3, &[1]))));
        let coeffs = dilation_coefficients(reciprocal, &p).unwrap();
        assert!(!dilation_fit_holds(reciprocal, &p, &coeffs).unwrap());
    }

    #[test]
    fn coefficient_recovery() {
        let n = 3;
        let samples: Vec<_> = spanning_samples(n, 3)
            .into_iter()
            .map(|p| {
                let v = PsiTilde::from_eta(KForm::one(n)).eval(&p).unwrap();
                (p, v)
            })
            .collect();
        assert_eq!(recover_coefficient_form(&samples, n, 3).unwrap(), KForm::one(n));

        let zeros: Vec<_> = spanning_samples(n, 2).into_iter().map(|p| (p, int(0))).collect();
        assert_eq!(recover_coefficient_form(&zeros, n, 2).unwrap(), KForm::zero(n, 1));

        let too_few = vec![zeros[0].clone()];
        assert_eq!(
            recover_coefficient_form(&too_few, n, 2),
            Err(Error::UnderdeterminedSamples { null_dim: 2 })
        );
    }

    #[test]
    fn line_checks_catch_nonaffine_maps() {
        let f2 = free_group(2).unwrap();
        let square = |q: &GroupPoint| Ok(&q.x[0] * &q.x[0]);
        assert!(!verify_h_affinity(&square, &f2, 1, 20).unwrap().passed());
        let linear = |q: &GroupPoint| Ok(&q.x[0] + &q.z[0]);
        assert!(verify_h_affinity(&linear, &f2, 1, 20).unwrap().passed());
    }

    #[test]
    fn sign_change_counting() {
        let v: Vec<Rational> = [1, 0, 2, -1, 0, -3].iter().map(|&x| int(x)).collect();
        assert_eq!(sign_changes(&v), 1);
        let v: Vec<Rational> = [1, -1, 1].iter().map(|&x| int(x)).collect();
        assert_eq!(sign_changes(&v), 2);
    }

    #[test]
    fn metivier_examples() {
        let f3 = free_group(3).unwrap();
        assert_eq!(metivier_probe(&f3, 0, 10).unwrap(), MetivierProbe::NotMetivier(unit(3, 0)));
        assert_eq!(metivier_probe(&free_group(2).unwrap(), 0, 10).unwrap(), MetivierProbe::ProbablyMetivier);
    }
}
