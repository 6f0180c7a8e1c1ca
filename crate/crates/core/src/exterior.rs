//! Exact exterior algebra over `Rⁿ`.
//!
//! A [`Blade`] is a basis form `dx_J = dx_{j1}∧…∧dx_{jk}` with
//! `j1 < … < jk`, encoded as a bit pattern (bit `i` stands for `dx_{i+1}`).
//! A [`KForm`] is a sparse rational combination of blades of a single grade.
//! Blades are ordered lexicographically by their index lists, which is also
//! the coordinate order used by [`KForm::coords`] and by every file format.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::combinatorics::{binomial, combinations, factorial, lex_rank};
use crate::rational::{int, render};
use crate::{Error, Rational, Result};

pub const MAX_DIM: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Blade {
    n: u8,
    mask: u32,
}

impl Blade {
    /// Blade from a bit pattern over `n` generators.
    ///
    /// Panics if `n` exceeds [`MAX_DIM`] or the mask uses bits `>= n`.
    pub fn from_mask(n: usize, mask: u32) -> Self {
        assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
        assert!(mask >> n == 0, "mask {mask:#b} out of range for n = {n}");
        Blade { n: n as u8, mask }
    }

    /// Blade `dx_{j1}∧…∧dx_{jk}` from strictly increasing 1-based indices.
    pub fn new(n: usize, indices: &[usize]) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "indices must be strictly increasing"
        );
        let mask = indices.iter().fold(0u32, |m, &i| {
            assert!((1..=n).contains(&i), "index {i} out of range 1..={n}");
            m | 1 << (i - 1)
        });
        Blade::from_mask(n, mask)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn grade(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// 1-based indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|i| self.mask >> i & 1 == 1).map(|i| i + 1).collect()
    }

    /// Position among the grade-`k` blades in lexicographic order.
    pub fn lex_index(&self) -> usize {
        let zero_based: Vec<usize> = self.indices().iter().map(|i| i - 1).collect();
        lex_rank(self.n(), &zero_based)
    }

    pub fn complement(&self) -> Blade {
        let full = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        Blade { n: self.n, mask: full & !self.mask }
    }

    /// `self ∧ other = sign · dx_{J∪J'}`; `None` when the index sets overlap.
    pub fn wedge(&self, other: &Blade) -> Option<(Blade, i8)> {
        assert_eq!(self.n, other.n);
        if self.mask & other.mask != 0 {
            return None;
        }
        Some((Blade { n: self.n, mask: self.mask | other.mask }, merge_sign(self.mask, other.mask)))
    }
}

/// Parity of the shuffle that sorts the concatenation `a ++ b`: each pair
/// `(i ∈ a, j ∈ b)` with `i > j` costs one transposition.
fn merge_sign(a: u32, b: u32) -> i8 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (a >> j).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        self.grade().cmp(&other.grade()).then_with(|| {
            let diff = self.mask ^ other.mask;
            if diff == 0 {
                Ordering::Equal
            } else if self.mask >> diff.trailing_zeros() & 1 == 1 {
                // the first differing index belongs to self, so self is smaller
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(|i| format!("dx_{i}")).collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("^"))
        }
    }
}

/// An alternating k-form over `Rⁿ` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KForm {
    n: usize,
    grade: usize,
    coeffs: BTreeMap<Blade, Rational>,
}

impl KForm {
    pub fn zero(n: usize, grade: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} out of range");
        assert!(grade <= n, "grade {grade} exceeds dimension {n}");
        KForm { n, grade, coeffs: BTreeMap::new() }
    }

    /// The grade-0 form `c`.
    pub fn scalar(n: usize, c: Rational) -> Self {
        let mut out = KForm::zero(n, 0);
        out.add_term(Blade::from_mask(n, 0), c);
        out
    }

    pub fn one(n: usize) -> Self {
        KForm::scalar(n, Rational::one())
    }

    /// `dx_i` (1-based).
    pub fn dx(n: usize, i: usize) -> Self {
        KForm::from_blade(Blade::new(n, &[i]))
    }

    pub fn from_blade(blade: Blade) -> Self {
        let mut out = KForm::zero(blade.n(), blade.grade());
        out.add_term(blade, Rational::one());
        out
    }

    /// `dx_{i1}∧…∧dx_{ik}` for 1-based indices in any order.
    pub fn wedge_of(n: usize, indices: &[usize]) -> Self {
        indices
            .iter()
            .fold(KForm::one(n), |acc, &i| wedge(&acc, &KForm::dx(n, i)).expect("indices within range"))
    }

    /// The volume form `dx_1∧…∧dx_n`.
    pub fn volume(n: usize) -> Self {
        KForm::from_blade(Blade::from_mask(n, (1u32 << n) - 1))
    }

    /// Builds a form from coordinates on the lexicographic blade basis.
    pub fn from_coords(n: usize, grade: usize, coords: &[Rational]) -> Result<Self> {
        if coords.len() != binomial(n, grade) {
            return Err(Error::DimensionMismatch { expected: binomial(n, grade), found: coords.len() });
        }
        let mut out = KForm::zero(n, grade);
        for (blade, c) in blades(n, grade).into_iter().zip(coords) {
            out.add_term(blade, c.clone());
        }
        Ok(out)
    }

    /// Coordinates on the lexicographic blade basis of `Λᵏ(Rⁿ)`.
    pub fn coords(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); binomial(self.n, self.grade)];
        for (blade, c) in &self.coeffs {
            out[blade.lex_index()] = c.clone();
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, blade: &Blade) -> Rational {
        self.coeffs.get(blade).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero terms in lexicographic blade order.
    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &Rational)> {
        self.coeffs.iter()
    }

    /// Adds `c · blade`; the blade must match this form's dimension and grade.
    pub fn add_term(&mut self, blade: Blade, c: Rational) {
        assert_eq!(blade.n(), self.n, "blade dimension");
        assert_eq!(blade.grade(), self.grade, "blade grade");
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(blade).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&blade);
        }
    }

    pub fn scale(&self, c: &Rational) -> KForm {
        if c.is_zero() {
            return KForm::zero(self.n, self.grade);
        }
        KForm {
            n: self.n,
            grade: self.grade,
            coeffs: self.coeffs.iter().map(|(b, v)| (*b, v * c)).collect(),
        }
    }

    fn assert_compatible(&self, other: &KForm) {
        assert_eq!(self.n, other.n, "forms live over different dimensions");
        assert_eq!(self.grade, other.grade, "forms have different grades");
    }
}

impl Add for &KForm {
    type Output = KForm;

    fn add(self, rhs: &KForm) -> KForm {
        self.assert_compatible(rhs);
        let mut out = self.clone();
        for (b, c) in &rhs.coeffs {
            out.add_term(*b, c.clone());
        }
        out
    }
}

impl Sub for &KForm {
    type Output = KForm;

    fn sub(self, rhs: &KForm) -> KForm {
        self + &-rhs
    }
}

impl Neg for &KForm {
    type Output = KForm;

    fn neg(self) -> KForm {
        KForm {
            n: self.n,
            grade: self.grade,
            coeffs: self.coeffs.iter().map(|(b, v)| (*b, -v)).collect(),
        }
    }
}

impl fmt::Display for KForm {
    /// `c*dx_i^dx_j + ...` with terms in lexicographic order; `0` for the
    /// zero form and a bare `c` for grade zero.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (blade, c)) in self.coeffs.iter().enumerate() {
            let magnitude = if i == 0 { c.clone() } else { c.abs() };
            if i > 0 {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            }
            if blade.grade() == 0 {
                write!(f, "{}", render(&magnitude))?;
            } else {
                write!(f, "{}*{}", render(&magnitude), blade)?;
            }
        }
        Ok(())
    }
}

/// Grade-`k` blades of `Rⁿ` in lexicographic order.
pub fn blades(n: usize, k: usize) -> Vec<Blade> {
    combinations(n, k)
        .into_iter()
        .map(|c| Blade::from_mask(n, c.iter().fold(0u32, |m, &i| m | 1 << i)))
        .collect()
}

/// The basis `{dx_J}` of `Λᵏ(Rⁿ)` in lexicographic order.
pub fn basis_kforms(n: usize, k: usize) -> Vec<KForm> {
    blades(n, k).into_iter().map(KForm::from_blade).collect()
}

/// Exterior product. Errors when the dimensions differ or the resulting
/// grade would exceed `n`.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    if a.grade + b.grade > a.n {
        return Err(Error::GradeOverflow { left: a.grade, right: b.grade, n: a.n });
    }
    let mut out = KForm::zero(a.n, a.grade + b.grade);
    for (ba, ca) in &a.coeffs {
        for (bb, cb) in &b.coeffs {
            if let Some((blade, sign)) = ba.wedge(bb) {
                let c = ca * cb;
                out.add_term(blade, if sign < 0 { -c } else { c });
            }
        }
    }
    Ok(out)
}

/// Like [`wedge`], but a product landing above grade `n` is reported as
/// `None`, i.e. as the zero form of a nonexistent grade.
pub fn wedge_truncated(a: &KForm, b: &KForm) -> Result<Option<KForm>> {
    match wedge(a, b) {
        Ok(f) => Ok(Some(f)),
        Err(Error::GradeOverflow { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `ω^k = ω∧…∧ω` (k factors); `ω^0 = 1`.
pub fn wedge_power(omega: &KForm, k: usize) -> Result<KForm> {
    if omega.grade != 2 {
        return Err(Error::GradeMismatch { expected: 2, found: omega.grade });
    }
    if 2 * k > omega.n {
        return Err(Error::GradeOverflow { left: 2 * (k.saturating_sub(1)), right: 2, n: omega.n });
    }
    let mut acc = KForm::one(omega.n);
    for _ in 0..k {
        acc = wedge(omega, &acc)?;
    }
    Ok(acc)
}

/// The scalar `c` with `a = c · dx_1∧…∧dx_n`.
pub fn volume_coefficient(a: &KForm) -> Result<Rational> {
    if a.grade != a.n {
        return Err(Error::GradeMismatch { expected: a.n, found: a.grade });
    }
    Ok(a.coeff(&Blade::from_mask(a.n, (1u32 << a.n) - 1)))
}

/// Volume coefficient of `a ∧ b` for complementary grades, without
/// materializing the product.
pub fn top_pairing(a: &KForm, b: &KForm) -> Result<Rational> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { expected: a.n, found: b.n });
    }
    if a.grade + b.grade != a.n {
        return Err(Error::GradeMismatch { expected: a.n, found: a.grade + b.grade });
    }
    let mut total = Rational::zero();
    for (blade, ca) in &a.coeffs {
        let partner = blade.complement();
        if let Some(cb) = b.coeffs.get(&partner) {
            let c = ca * cb;
            if merge_sign(blade.mask, partner.mask) < 0 {
                total -= c;
            } else {
                total += c;
            }
        }
    }
    Ok(total)
}

/// `k!` as a rational.
pub fn factorial_rational(k: usize) -> Rational {
    int(factorial(k) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn dx(n: usize, i: usize) -> KForm {
        KForm::dx(n, i)
    }

    #[test]
    fn wedge_of_basis_one_forms() {
        let e12 = wedge(&dx(3, 1), &dx(3, 2)).unwrap();
        assert_eq!(e12, KForm::from_blade(Blade::new(3, &[1, 2])));
        let e21 = wedge(&dx(3, 2), &dx(3, 1)).unwrap();
        assert_eq!(e21, -&e12);
        assert!(wedge(&dx(3, 1), &dx(3, 1)).unwrap().is_zero());
    }

    #[test]
    fn symplectic_square() {
        let omega = &KForm::wedge_of(4, &[1, 2]) + &KForm::wedge_of(4, &[3, 4]);
        let sq = wedge(&omega, &omega).unwrap();
        assert_eq!(sq, KForm::volume(4).scale(&int(2)));
        assert_eq!(wedge_power(&omega, 2).unwrap(), sq);
    }

    #[test]
    fn wedge_power_edge_cases() {
        let e12 = KForm::wedge_of(4, &[1, 2]);
        assert_eq!(wedge_power(&e12, 1).unwrap(), e12);
        assert_eq!(wedge_power(&e12, 0).unwrap(), KForm::one(4));
        let sq = wedge_power(&e12, 2).unwrap();
        assert!(sq.is_zero());
        assert_eq!(sq.grade(), 4);
        assert!(matches!(wedge_power(&e12, 3), Err(Error::GradeOverflow { .. })));
        assert!(matches!(wedge_power(&dx(4, 1), 1), Err(Error::GradeMismatch { .. })));
    }

    #[test]
    fn wedge_errors() {
        assert!(matches!(wedge(&dx(3, 1), &dx(4, 1)), Err(Error::DimensionMismatch { .. })));
        let e12 = KForm::wedge_of(3, &[1, 2]);
        assert!(matches!(wedge(&e12, &e12), Err(Error::GradeOverflow { .. })));
        assert_eq!(wedge_truncated(&e12, &e12).unwrap(), None);
    }

    #[test]
    fn volume_coefficients() {
        assert_eq!(volume_coefficient(&KForm::volume(3)).unwrap(), int(1));
        assert_eq!(volume_coefficient(&KForm::zero(3, 3)).unwrap(), int(0));
        let split = wedge(&dx(3, 1), &KForm::wedge_of(3, &[2, 3])).unwrap();
        assert_eq!(volume_coefficient(&split).unwrap(), int(1));
        assert!(matches!(volume_coefficient(&dx(3, 1)), Err(Error::GradeMismatch { .. })));
    }

    #[test]
    fn basis_enumeration() {
        let b = basis_kforms(3, 2);
        let rendered: Vec<String> = b.iter().map(|f| f.to_string()).collect();
        assert_eq!(rendered, ["1*dx_1^dx_2", "1*dx_1^dx_3", "1*dx_2^dx_3"]);
        assert_eq!(basis_kforms(3, 0), vec![KForm::one(3)]);
        let b42 = basis_kforms(4, 2);
        assert_eq!(b42.len(), 6);
        assert_eq!(b42[5], KForm::wedge_of(4, &[3, 4]));
    }

    #[test]
    fn blade_order_is_lexicographic() {
        let all = blades(5, 3);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        for (i, b) in all.iter().enumerate() {
            assert_eq!(b.lex_index(), i);
        }
        assert!(Blade::new(4, &[1, 4]) < Blade::new(4, &[2, 3]));
    }

    #[test]
    fn rendering() {
        let f = &(&KForm::wedge_of(4, &[1, 2]).scale(&frac(-3, 7)) + &KForm::wedge_of(4, &[3, 4]))
            - &KForm::wedge_of(4, &[1, 3]).scale(&int(2));
        assert_eq!(f.to_string(), "-3/7*dx_1^dx_2 - 2*dx_1^dx_3 + 1*dx_3^dx_4");
        assert_eq!(KForm::zero(3, 1).to_string(), "0");
        assert_eq!(KForm::scalar(3, frac(5, 2)).to_string(), "5/2");
    }

    #[test]
    fn coordinates_roundtrip() {
        let f = &KForm::wedge_of(4, &[1, 4]).scale(&int(3)) + &KForm::wedge_of(4, &[2, 3]);
        let coords = f.coords();
        assert_eq!(coords, vec![int(0), int(0), int(3), int(1), int(0), int(0)]);
        assert_eq!(KForm::from_coords(4, 2, &coords).unwrap(), f);
        assert!(KForm::from_coords(4, 2, &coords[..5]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn form(n: usize, k: usize) -> impl Strategy<Value = KForm> {
            proptest::collection::vec((-3i64..=3, 1i64..=2), binomial(n, k))
                .prop_map(move |cs| KForm::from_coords(n, k, &cs.iter().map(|&(p, q)| frac(p, q)).collect::<Vec<_>>()).unwrap())
        }

        fn graded_pair() -> impl Strategy<Value = (KForm, KForm)> {
            (2usize..=6).prop_flat_map(|n| (0..=n).prop_flat_map(move |j| (0..=n - j).prop_flat_map(move |k| (form(n, j), form(n, k)))))
        }

        fn triple() -> impl Strategy<Value = (KForm, KForm, KForm, KForm)> {
            (2usize..=6).prop_flat_map(|n| {
                (0..=n).prop_flat_map(move |i| {
                    (0..=n - i).prop_flat_map(move |j| {
                        (0..=n - i - j).prop_flat_map(move |k| (form(n, i), form(n, j), form(n, k), form(n, j)))
                    })
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn graded_anticommutativity((a, b) in graded_pair()) {
                let ab = wedge(&a, &b).unwrap();
                let ba = wedge(&b, &a).unwrap();
                let expected = if (a.grade() * b.grade()) % 2 == 1 { -&ba } else { ba };
                prop_assert_eq!(ab, expected);
            }

            #[test]
            fn associative_and_bilinear((a, b, c, b2) in triple()) {
                let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
                let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                let sum = wedge(&a, &(&b + &b2)).unwrap();
                prop_assert_eq!(sum, &wedge(&a, &b).unwrap() + &wedge(&a, &b2).unwrap());
            }

            #[test]
            fn powers_are_iterated_wedges(
                (omega, k) in (2usize..=6).prop_flat_map(|n| (form(n, 2), 1..=n / 2))
            ) {
                let expected = wedge(&omega, &wedge_power(&omega, k - 1).unwrap()).unwrap();
                prop_assert_eq!(wedge_power(&omega, k).unwrap(), expected);
            }
        }
    }
}
