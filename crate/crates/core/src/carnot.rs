//! Step-two Carnot groups and their presentations as quotients of free groups.
//!
//! Every group is handled through a [`CarnotPresentation`]: a pair of
//! surjective linear maps `pi1: Λ¹(Rⁿ) → V1` and `pi2: Λ²(Rⁿ) → V2` that
//! intertwine `θ∧θ'` with the bracket of `G`. Coordinates on `Λ²(Rⁿ)` follow
//! the lexicographic blade order of [`crate::exterior`].

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, lex_rank};
use crate::exactla::{null_space, solve_particular, RatMatrix, Subspace};
use crate::exterior::{wedge, KForm, MAX_DIM};
use crate::rational::{int, serde_mat, serde_vec};
use crate::{Error, Rational, Result};

/// An element `(θ, ω)` of the free step-two group `F_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreePoint {
    theta: KForm,
    omega: KForm,
}

impl FreePoint {
    pub fn new(theta: KForm, omega: KForm) -> Result<Self> {
        if theta.n() != omega.n() {
            return Err(Error::DimensionMismatch { expected: theta.n(), found: omega.n() });
        }
        if theta.grade() != 1 {
            return Err(Error::GradeMismatch { expected: 1, found: theta.grade() });
        }
        if omega.grade() != 2 {
            return Err(Error::GradeMismatch { expected: 2, found: omega.grade() });
        }
        Ok(FreePoint { theta, omega })
    }

    pub fn identity(n: usize) -> Self {
        FreePoint { theta: KForm::zero(n, 1), omega: KForm::zero(n, 2) }
    }

    pub fn from_coords(n: usize, theta: &[Rational], omega: &[Rational]) -> Result<Self> {
        FreePoint::new(KForm::from_coords(n, 1, theta)?, KForm::from_coords(n, 2, omega)?)
    }

    /// The horizontal point `(θ, 0)`.
    pub fn horizontal(theta: KForm) -> Result<Self> {
        let n = theta.n();
        FreePoint::new(theta, KForm::zero(n, 2))
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }

    pub fn theta(&self) -> &KForm {
        &self.theta
    }

    pub fn omega(&self) -> &KForm {
        &self.omega
    }

    /// `(θ,ω)·(θ',ω') = (θ+θ', ω+ω'+θ∧θ')`.
    pub fn mul(&self, other: &FreePoint) -> Result<FreePoint> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        let cross = wedge(&self.theta, &other.theta)?;
        Ok(FreePoint {
            theta: &self.theta + &other.theta,
            omega: &(&self.omega + &other.omega) + &cross,
        })
    }

    pub fn inverse(&self) -> FreePoint {
        FreePoint { theta: -&self.theta, omega: -&self.omega }
    }

    pub fn dilate(&self, t: &Rational) -> FreePoint {
        FreePoint { theta: self.theta.scale(t), omega: self.omega.scale(&(t * t)) }
    }
}

pub fn group_mul(p: &FreePoint, q: &FreePoint) -> Result<FreePoint> {
    p.mul(q)
}

pub fn dilate(t: &Rational, p: &FreePoint) -> FreePoint {
    p.dilate(t)
}

/// An element `(x, z)` of `G = V1 × V2` in the coordinates of a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPoint {
    pub x: Vec<Rational>,
    pub z: Vec<Rational>,
}

impl GroupPoint {
    pub fn new(x: Vec<Rational>, z: Vec<Rational>) -> Self {
        GroupPoint { x, z }
    }

    pub fn horizontal(x: Vec<Rational>, m: usize) -> Self {
        GroupPoint { x, z: vec![Rational::zero(); m] }
    }

    pub fn vertical(r: usize, z: Vec<Rational>) -> Self {
        GroupPoint { x: vec![Rational::zero(); r], z }
    }
}

pub fn dilate_g(t: &Rational, q: &GroupPoint) -> GroupPoint {
    let t2 = t * t;
    GroupPoint {
        x: q.x.iter().map(|v| v * t).collect(),
        z: q.z.iter().map(|v| v * &t2).collect(),
    }
}

fn add_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Bracket data of a step-two algebra: `[e_i, e_j]` for `i < j` (0-based),
/// as vectors in `R^dim_v2`. Missing pairs are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureSpec {
    pub rank: usize,
    pub dim_v2: usize,
    pub brackets: BTreeMap<(usize, usize), Vec<Rational>>,
}

impl StructureSpec {
    pub fn new(rank: usize, dim_v2: usize) -> Self {
        StructureSpec { rank, dim_v2, brackets: BTreeMap::new() }
    }

    /// Sets `[e_i, e_j] = z` for 0-based `i < j`.
    pub fn set(&mut self, i: usize, j: usize, z: Vec<Rational>) {
        assert!(i < j, "brackets are stored for i < j only");
        self.brackets.insert((i, j), z);
    }

    pub fn get(&self, i: usize, j: usize) -> Vec<Rational> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.brackets.get(&(i, j)).cloned(),
            std::cmp::Ordering::Greater => self.brackets.get(&(j, i)).map(|z| z.iter().map(|v| -v).collect()),
            std::cmp::Ordering::Equal => None,
        }
        .unwrap_or_else(|| vec![Rational::zero(); self.dim_v2])
    }

    /// Shape checks plus the bracket-generating condition.
    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 || self.rank > MAX_DIM {
            return Err(Error::UnsupportedDimension(self.rank));
        }
        if self.dim_v2 == 0 {
            return Err(Error::InvalidStructure("dim_v2 must be at least 1".into()));
        }
        for (&(i, j), z) in &self.brackets {
            if !(i < j && j < self.rank) {
                return Err(Error::InvalidStructure(format!(
                    "bracket pair ({}, {}) must satisfy 1 <= i < j <= {}",
                    i + 1,
                    j + 1,
                    self.rank
                )));
            }
            if z.len() != self.dim_v2 {
                return Err(Error::InvalidStructure(format!(
                    "bracket ({}, {}) has {} entries, expected {}",
                    i + 1,
                    j + 1,
                    z.len(),
                    self.dim_v2
                )));
            }
        }
        let span = RatMatrix::from_rows(self.dim_v2, self.brackets.values().cloned().collect())?.rank();
        if span < self.dim_v2 {
            return Err(Error::HormanderViolation { span, dim_v2: self.dim_v2 });
        }
        Ok(())
    }
}

/// Structure constants of `F_n`: `[e_i, e_j]` is the unit vector of the pair.
pub fn free_structure(n: usize) -> StructureSpec {
    let m = binomial(n, 2);
    let mut s = StructureSpec::new(n, m);
    for i in 0..n {
        for j in i + 1..n {
            let mut z = vec![Rational::zero(); m];
            z[lex_rank(n, &[i, j])] = Rational::one();
            s.set(i, j, z);
        }
    }
    s
}

type Quaternion = [i64; 4];

fn quaternion_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// The quaternionic Heisenberg algebra on `H × Im H` with
/// `[q, q'] = Im(conj(q)·q')`, using the basis `1, i, j, k` of `H`.
pub fn quaternionic_structure() -> StructureSpec {
    let unit = |a: usize| -> Quaternion {
        let mut q = [0; 4];
        q[a] = 1;
        q
    };
    let mut s = StructureSpec::new(4, 3);
    for a in 0..4 {
        for b in a + 1..4 {
            let mut conj = unit(a);
            for c in conj.iter_mut().skip(1) {
                *c = -*c;
            }
            let prod = quaternion_mul(conj, unit(b));
            s.set(a, b, prod[1..].iter().map(|&v| int(v)).collect());
        }
    }
    s
}

/// Block-diagonal bracket `[x+x', y+y'] = [x,y] + [x',y']` on the product.
pub fn direct_product(a: &StructureSpec, b: &StructureSpec) -> StructureSpec {
    let m = a.dim_v2 + b.dim_v2;
    let mut out = StructureSpec::new(a.rank + b.rank, m);
    for (&(i, j), z) in &a.brackets {
        let mut padded = z.clone();
        padded.resize(m, Rational::zero());
        out.set(i, j, padded);
    }
    for (&(i, j), z) in &b.brackets {
        let mut padded = vec![Rational::zero(); a.dim_v2];
        padded.extend(z.iter().cloned());
        out.set(a.rank + i, a.rank + j, padded);
    }
    out
}

/// `G × R^d`: the new generators are central.
pub fn product_with_abelian(a: &StructureSpec, d: usize) -> StructureSpec {
    StructureSpec { rank: a.rank + d, dim_v2: a.dim_v2, brackets: a.brackets.clone() }
}

/// A surjective Carnot morphism `F_n → G` together with its kernels, a
/// fixed linear section and the bracket table of `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarnotPresentation {
    n: usize,
    pi1: RatMatrix,
    pi2: RatMatrix,
    kernel1: Subspace,
    kernel2: Subspace,
    section1: RatMatrix,
    section2: RatMatrix,
    /// `[e_i, e_j]` for `i < j`, indexed by the lexicographic rank of the pair.
    bracket_table: Vec<Vec<Rational>>,
}

impl CarnotPresentation {
    /// Validates a pair of projection matrices (`r×n` and `m×C(n,2)`).
    pub fn new(pi1: RatMatrix, pi2: RatMatrix) -> Result<Self> {
        let n = pi1.cols();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let n2 = binomial(n, 2);
        if pi2.cols() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, found: pi2.cols() });
        }
        if pi1.rank() != pi1.rows() {
            return Err(Error::InvalidStructure("pi1 is not surjective".into()));
        }
        if pi2.rank() != pi2.rows() {
            return Err(Error::InvalidStructure("pi2 is not surjective".into()));
        }
        let kernel1 = null_space(&pi1);
        let kernel2 = null_space(&pi2);
        for theta in kernel1.basis() {
            let theta = KForm::from_coords(n, 1, theta)?;
            for j in 1..=n {
                let product = wedge(&theta, &KForm::dx(n, j))?;
                if pi2.mul_vec(&product.coords())?.iter().any(|v| !v.is_zero()) {
                    return Err(Error::NotAnIdeal(format!(
                        "({theta}) ^ dx_{j} is not in the second-layer kernel"
                    )));
                }
            }
        }
        if pi2.rows() == 0 {
            return Err(Error::TrivialV2);
        }

        let section_of = |pi: &RatMatrix| -> Result<RatMatrix> {
            let cols = (0..pi.rows())
                .map(|j| {
                    let mut e = vec![Rational::zero(); pi.rows()];
                    e[j] = Rational::one();
                    solve_particular(pi, &e)
                })
                .collect::<Result<Vec<_>>>()?;
            RatMatrix::from_cols(pi.cols(), &cols)
        };
        let section1 = section_of(&pi1)?;
        let section2 = section_of(&pi2)?;

        let r = pi1.rows();
        let mut bracket_table = Vec::with_capacity(binomial(r, 2));
        for i in 0..r {
            let ei = KForm::from_coords(n, 1, &section1.column(i))?;
            for j in i + 1..r {
                let ej = KForm::from_coords(n, 1, &section1.column(j))?;
                bracket_table.push(pi2.mul_vec(&wedge(&ei, &ej)?.coords())?);
            }
        }
        Ok(CarnotPresentation { n, pi1, pi2, kernel1, kernel2, section1, section2, bracket_table })
    }

    /// The presentation `F_n → F_n / (kernel1 × kernel2)` in quotient
    /// coordinates.
    pub fn from_kernels(n: usize, kernel1: &Subspace, kernel2: &Subspace) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if kernel1.ambient() != n {
            return Err(Error::DimensionMismatch { expected: n, found: kernel1.ambient() });
        }
        if kernel2.ambient() != binomial(n, 2) {
            return Err(Error::DimensionMismatch { expected: binomial(n, 2), found: kernel2.ambient() });
        }
        CarnotPresentation::new(kernel1.quotient_map(), kernel2.quotient_map())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank of `G`, the dimension of `V1`.
    pub fn rank(&self) -> usize {
        self.pi1.rows()
    }

    pub fn dim_v2(&self) -> usize {
        self.pi2.rows()
    }

    pub fn pi1(&self) -> &RatMatrix {
        &self.pi1
    }

    pub fn pi2(&self) -> &RatMatrix {
        &self.pi2
    }

    pub fn kernel1(&self) -> &Subspace {
        &self.kernel1
    }

    pub fn kernel2(&self) -> &Subspace {
        &self.kernel2
    }

    pub fn project(&self, p: &FreePoint) -> Result<GroupPoint> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p.n() });
        }
        Ok(GroupPoint {
            x: self.pi1.mul_vec(&p.theta.coords())?,
            z: self.pi2.mul_vec(&p.omega.coords())?,
        })
    }

    /// The preimage of `q` picked by the zero-free-variable section.
    pub fn lift(&self, q: &GroupPoint) -> Result<FreePoint> {
        FreePoint::from_coords(self.n, &self.section1.mul_vec(&q.x)?, &self.section2.mul_vec(&q.z)?)
    }

    pub fn lift_horizontal(&self, x: &[Rational]) -> Result<KForm> {
        KForm::from_coords(self.n, 1, &self.section1.mul_vec(x)?)
    }

    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        let r = self.rank();
        for v in [x, y] {
            if v.len() != r {
                return Err(Error::DimensionMismatch { expected: r, found: v.len() });
            }
        }
        let mut out = vec![Rational::zero(); self.dim_v2()];
        let mut pair = 0;
        for i in 0..r {
            for j in i + 1..r {
                let c = &x[i] * &y[j] - &x[j] * &y[i];
                if !c.is_zero() {
                    for (o, b) in out.iter_mut().zip(&self.bracket_table[pair]) {
                        if !b.is_zero() {
                            *o += &c * b;
                        }
                    }
                }
                pair += 1;
            }
        }
        Ok(out)
    }

    /// `[e_i, e_j]` for 0-based basis indices.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec<Rational> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.bracket_table[lex_rank(self.rank(), &[i, j])].clone(),
            std::cmp::Ordering::Greater => {
                self.bracket_table[lex_rank(self.rank(), &[j, i])].iter().map(|v| -v).collect()
            }
            std::cmp::Ordering::Equal => vec![Rational::zero(); self.dim_v2()],
        }
    }

    /// The `m×r` matrix of `ad_x = [x, ·]`.
    pub fn ad_matrix(&self, x: &[Rational]) -> Result<RatMatrix> {
        let r = self.rank();
        let cols = (0..r)
            .map(|j| {
                let mut e = vec![Rational::zero(); r];
                e[j] = Rational::one();
                self.bracket(x, &e)
            })
            .collect::<Result<Vec<_>>>()?;
        RatMatrix::from_cols(self.dim_v2(), &cols)
    }

    /// `(x,z)·(x',z') = (x+x', z+z'+[x,x'])`.
    pub fn mul(&self, a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
        let cross = self.bracket(&a.x, &b.x)?;
        if a.z.len() != self.dim_v2() || b.z.len() != self.dim_v2() {
            return Err(Error::DimensionMismatch { expected: self.dim_v2(), found: a.z.len().min(b.z.len()) });
        }
        Ok(GroupPoint { x: add_vec(&a.x, &b.x), z: add_vec(&add_vec(&a.z, &b.z), &cross) })
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::new(vec![Rational::zero(); self.rank()], vec![Rational::zero(); self.dim_v2()])
    }

    /// Quotient by extra kernels given in the coordinates of `G`. The new
    /// projection is the old one followed by the quotient coordinates, so a
    /// quotient by zero subspaces returns an identical presentation.
    pub fn quotient(&self, extra1: &Subspace, extra2: &Subspace) -> Result<Self> {
        if extra1.ambient() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: extra1.ambient() });
        }
        if extra2.ambient() != self.dim_v2() {
            return Err(Error::DimensionMismatch { expected: self.dim_v2(), found: extra2.ambient() });
        }
        let pi1 = extra1.quotient_map().mul(&self.pi1)?;
        let pi2 = extra2.quotient_map().mul(&self.pi2)?;
        CarnotPresentation::new(pi1, pi2)
    }

    /// Bracket data of `G` in the coordinates of this presentation.
    pub fn structure(&self) -> StructureSpec {
        let r = self.rank();
        let mut s = StructureSpec::new(r, self.dim_v2());
        let mut pair = 0;
        for i in 0..r {
            for j in i + 1..r {
                let z = &self.bracket_table[pair];
                if z.iter().any(|v| !v.is_zero()) {
                    s.set(i, j, z.clone());
                }
                pair += 1;
            }
        }
        s
    }
}

pub fn free_group(n: usize) -> Result<CarnotPresentation> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    CarnotPresentation::new(RatMatrix::identity(n), RatMatrix::identity(binomial(n, 2)))
}

/// The presentation `F_r → G` with `pi1 = id` and `pi2(dx_i∧dx_j) = [e_i, e_j]`.
pub fn lift_to_free(spec: &StructureSpec) -> Result<CarnotPresentation> {
    spec.validate()?;
    let r = spec.rank;
    let mut pi2 = RatMatrix::zeros(spec.dim_v2, binomial(r, 2));
    for (&(i, j), z) in &spec.brackets {
        let col = lex_rank(r, &[i, j]);
        for (row, v) in z.iter().enumerate() {
            pi2[(row, col)] = v.clone();
        }
    }
    CarnotPresentation::new(RatMatrix::identity(r), pi2)
}

pub fn bracket(pres: &CarnotPresentation, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
    pres.bracket(x, y)
}

/// Dimensions of `span{x1,x2,x3}` and `span{[xi,xj]}`; the generated
/// subgroup is a copy of `F_3` exactly when both are 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LieSpan3 {
    pub dim_horizontal: usize,
    pub dim_brackets: usize,
}

impl LieSpan3 {
    pub fn is_free(&self) -> bool {
        self.dim_horizontal == 3 && self.dim_brackets == 3
    }
}

pub fn lie_span3(pres: &CarnotPresentation, xs: [&[Rational]; 3]) -> Result<LieSpan3> {
    let r = pres.rank();
    let horizontal = RatMatrix::from_rows(r, xs.iter().map(|x| x.to_vec()).collect())?;
    let brackets = vec![pres.bracket(xs[0], xs[1])?, pres.bracket(xs[0], xs[2])?, pres.bracket(xs[1], xs[2])?];
    let brackets = RatMatrix::from_rows(pres.dim_v2(), brackets)?;
    Ok(LieSpan3 { dim_horizontal: horizontal.rank(), dim_brackets: brackets.rank() })
}

/// One `[e_i, e_j] = z` entry of a structure-constants file (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    #[serde(with = "serde_vec")]
    pub z: Vec<Rational>,
}

/// The on-disk group description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum GroupSpec {
    StructureConstants {
        rank: usize,
        dim_v2: usize,
        brackets: Vec<BracketEntry>,
    },
    FreeQuotient {
        n: usize,
        #[serde(with = "serde_mat")]
        kernel1: Vec<Vec<Rational>>,
        #[serde(with = "serde_mat")]
        kernel2: Vec<Vec<Rational>>,
    },
}

impl GroupSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("group specs always serialize")
    }

    pub fn from_structure(spec: &StructureSpec) -> Self {
        GroupSpec::StructureConstants {
            rank: spec.rank,
            dim_v2: spec.dim_v2,
            brackets: spec
                .brackets
                .iter()
                .map(|(&(i, j), z)| BracketEntry { i: i + 1, j: j + 1, z: z.clone() })
                .collect(),
        }
    }

    /// Kernel description of a presentation, suitable for round-tripping.
    pub fn from_presentation(pres: &CarnotPresentation) -> Self {
        GroupSpec::FreeQuotient {
            n: pres.n(),
            kernel1: pres.kernel1().basis().to_vec(),
            kernel2: pres.kernel2().basis().to_vec(),
        }
    }

    pub fn presentation(&self) -> Result<CarnotPresentation> {
        match self {
            GroupSpec::StructureConstants { rank, dim_v2, brackets } => {
                let mut spec = StructureSpec::new(*rank, *dim_v2);
                for b in brackets {
                    if b.i == 0 || b.j == 0 || b.i >= b.j || b.j > *rank {
                        return Err(Error::InvalidStructure(format!(
                            "bracket pair ({}, {}) must satisfy 1 <= i < j <= {rank}",
                            b.i, b.j
                        )));
                    }
                    if spec.brackets.insert((b.i - 1, b.j - 1), b.z.clone()).is_some() {
                        return Err(Error::InvalidStructure(format!("bracket pair ({}, {}) given twice", b.i, b.j)));
                    }
                }
                lift_to_free(&spec)
            }
            GroupSpec::FreeQuotient { n, kernel1, kernel2 } => {
                if !(2..=MAX_DIM).contains(n) {
                    return Err(Error::UnsupportedDimension(*n));
                }
                let k1 = Subspace::span(*n, kernel1.clone())?;
                let k2 = Subspace::span(binomial(*n, 2), kernel2.clone())?;
                CarnotPresentation::from_kernels(*n, &k1, &k2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn free_group_sizes() {
        assert_eq!(free_group(2).unwrap().dim_v2(), 1);
        assert_eq!(free_group(3).unwrap().dim_v2(), 3);
        assert_eq!(free_group(5).unwrap().dim_v2(), 10);
        assert_eq!(free_group(1), Err(Error::UnsupportedDimension(1)));
        assert_eq!(free_group(17), Err(Error::UnsupportedDimension(17)));
    }

    #[test]
    fn free_product_examples() {
        let p = FreePoint::horizontal(KForm::dx(3, 1)).unwrap();
        let q = FreePoint::horizontal(KForm::dx(3, 2)).unwrap();
        let pq = p.mul(&q).unwrap();
        assert_eq!(pq.theta(), &(&KForm::dx(3, 1) + &KForm::dx(3, 2)));
        assert_eq!(pq.omega(), &KForm::wedge_of(3, &[1, 2]));
        assert_eq!(pq.mul(&FreePoint::identity(3)).unwrap(), pq);
        assert_eq!(pq.mul(&pq.inverse()).unwrap(), FreePoint::identity(3));
    }

    #[test]
    fn dilation_scales_layers() {
        let p = FreePoint::new(KForm::dx(2, 1), KForm::wedge_of(2, &[1, 2])).unwrap();
        let d = dilate(&int(2), &p);
        assert_eq!(d.theta(), &KForm::dx(2, 1).scale(&int(2)));
        assert_eq!(d.omega(), &KForm::wedge_of(2, &[1, 2]).scale(&int(4)));
        assert_eq!(dilate(&int(1), &p), p);
        let g = GroupPoint::new(v(&[1, -2]), vec![frac(1, 3)]);
        assert_eq!(dilate_g(&int(3), &g), GroupPoint::new(v(&[3, -6]), v(&[3])));
    }

    #[test]
    fn quaternionic_brackets() {
        let s = quaternionic_structure();
        let expected = [
            ((0, 1), [1, 0, 0]),
            ((0, 2), [0, 1, 0]),
            ((0, 3), [0, 0, 1]),
            ((1, 2), [0, 0, -1]),
            ((1, 3), [0, 1, 0]),
            ((2, 3), [-1, 0, 0]),
        ];
        for ((i, j), z) in expected {
            assert_eq!(s.get(i, j), v(&z), "[e{}, e{}]", i + 1, j + 1);
        }
        let pres = lift_to_free(&s).unwrap();
        assert_eq!(pres.pi2().rank(), 3);
        assert_eq!(pres.kernel2().dim(), 3);
    }

    #[test]
    fn lifting_structure_constants() {
        let f3 = lift_to_free(&free_structure(3)).unwrap();
        assert!(f3.kernel2().is_zero());
        let h = lift_to_free(&free_structure(2)).unwrap();
        assert_eq!((h.rank(), h.dim_v2()), (2, 1));
        assert!(h.kernel1().is_zero() && h.kernel2().is_zero());

        let mut degenerate = StructureSpec::new(3, 2);
        degenerate.set(0, 1, v(&[1, 0]));
        degenerate.set(0, 2, v(&[2, 0]));
        assert_eq!(lift_to_free(&degenerate), Err(Error::HormanderViolation { span: 1, dim_v2: 2 }));
    }

    #[test]
    fn quotient_examples() {
        let f4 = free_group(4).unwrap();
        let mut sympl = vec![int(0); 6];
        sympl[0] = int(1);
        sympl[5] = int(1);
        let ex = f4.quotient(&Subspace::zero(4), &Subspace::span(6, vec![sympl]).unwrap()).unwrap();
        assert_eq!((ex.rank(), ex.dim_v2()), (4, 5));

        let f3 = free_group(3).unwrap();
        let err = f3.quotient(&Subspace::span(3, vec![v(&[1, 0, 0])]).unwrap(), &Subspace::zero(3));
        assert!(matches!(err, Err(Error::NotAnIdeal(_))));

        assert_eq!(f3.quotient(&Subspace::zero(3), &Subspace::full(3)), Err(Error::TrivialV2));
        assert_eq!(f3.quotient(&Subspace::zero(3), &Subspace::zero(3)).unwrap(), f3);
    }

    #[test]
    fn products() {
        let f3r1 = product_with_abelian(&free_structure(3), 1);
        assert_eq!((f3r1.rank, f3r1.dim_v2), (4, 3));
        let f2f2 = direct_product(&free_structure(2), &free_structure(2));
        assert_eq!((f2f2.rank, f2f2.dim_v2), (4, 2));
        assert_eq!(f2f2.get(2, 3), v(&[0, 1]));
        let qq = direct_product(&quaternionic_structure(), &quaternionic_structure());
        assert_eq!((qq.rank, qq.dim_v2), (8, 6));
        for s in [f3r1, f2f2, qq] {
            s.validate().unwrap();
        }
    }

    #[test]
    fn brackets_and_lie_spans() {
        let f3 = free_group(3).unwrap();
        let e = |i: usize| {
            let mut x = vec![int(0); 3];
            x[i] = int(1);
            x
        };
        assert_eq!(f3.bracket(&e(0), &e(0)).unwrap(), v(&[0, 0, 0]));
        assert_eq!(f3.bracket(&e(0), &e(1)).unwrap(), v(&[1, 0, 0]));
        let span = lie_span3(&f3, [&e(0), &e(1), &e(2)]).unwrap();
        assert_eq!((span.dim_horizontal, span.dim_brackets), (3, 3));
        assert!(span.is_free());

        let f2r1 = lift_to_free(&product_with_abelian(&free_structure(2), 1)).unwrap();
        let span = lie_span3(&f2r1, [&e(0), &e(1), &e(2)]).unwrap();
        assert_eq!(span.dim_brackets, 1);
        assert!(!span.is_free());

        let quat = lift_to_free(&quaternionic_structure()).unwrap();
        let unit = |i: usize| {
            let mut x = vec![int(0); 4];
            x[i] = int(1);
            x
        };
        assert!(lie_span3(&quat, [&unit(0), &unit(1), &unit(2)]).unwrap().is_free());
    }

    #[test]
    fn group_spec_json() {
        let text = r#"{"format": "structure_constants", "rank": 2, "dim_v2": 1,
                       "brackets": [{"i": 1, "j": 2, "z": ["1"]}]}"#;
        let spec = GroupSpec::from_json(text).unwrap();
        let pres = spec.presentation().unwrap();
        assert_eq!(pres, free_group(2).unwrap());

        let quotient = r#"{"format": "free_quotient", "n": 4, "kernel1": [],
                           "kernel2": [["1", 0, 0, 0, 0, "1"]]}"#;
        let pres = GroupSpec::from_json(quotient).unwrap().presentation().unwrap();
        assert_eq!(pres.dim_v2(), 5);
        let again = GroupSpec::from_json(&GroupSpec::from_presentation(&pres).to_json()).unwrap();
        assert_eq!(again.presentation().unwrap().kernel2(), pres.kernel2());

        assert!(matches!(GroupSpec::from_json("{\"format\": \"bogus\"}"), Err(Error::Parse(_))));
        let bad_pair = r#"{"format": "structure_constants", "rank": 2, "dim_v2": 1,
                           "brackets": [{"i": 2, "j": 1, "z": ["1"]}]}"#;
        assert!(matches!(
            GroupSpec::from_json(bad_pair).unwrap().presentation(),
            Err(Error::InvalidStructure(_))
        ));
    }

    mod props {
        use super::*;
        use crate::rational::frac;
        use proptest::prelude::*;

        fn point(n: usize) -> impl Strategy<Value = FreePoint> {
            let coeff = (-4i64..=4, 1i64..=3).prop_map(|(p, q)| frac(p, q));
            (proptest::collection::vec(coeff.clone(), n), proptest::collection::vec(coeff, n * (n - 1) / 2))
                .prop_map(move |(t, w)| FreePoint::from_coords(n, &t, &w).unwrap())
        }

        fn points() -> impl Strategy<Value = (FreePoint, FreePoint, FreePoint)> {
            (2usize..=6).prop_flat_map(|n| (point(n), point(n), point(n)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn group_axioms((p, q, s) in points()) {
                let left = p.mul(&q).unwrap().mul(&s).unwrap();
                let right = p.mul(&q.mul(&s).unwrap()).unwrap();
                prop_assert_eq!(left, right);
                let e = FreePoint::identity(p.n());
                prop_assert_eq!(p.mul(&e).unwrap(), p.clone());
                prop_assert_eq!(p.mul(&p.inverse()).unwrap(), e);
            }

            #[test]
            fn dilations_are_automorphisms((p, q, _) in points(), t in (-3i64..=3, 1i64..=3)) {
                let t = frac(t.0, t.1);
                prop_assert_eq!(p.mul(&q).unwrap().dilate(&t), p.dilate(&t).mul(&q.dilate(&t)).unwrap());
            }
        }
    }
}
