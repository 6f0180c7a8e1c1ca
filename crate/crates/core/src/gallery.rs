//! Named example groups with their expected analysis results.
//!
//! Each expectation carries a provenance tag. `Published` values are stated
//! in the literature on these groups; `Derived` values were computed by an
//! independent polynomial-space oracle (see the integration tests) and
//! frozen here; `Definition` values follow directly from the construction.

use rand::Rng;
use serde::Serialize;

use crate::carnot::{
    direct_product, free_group, free_structure, lie_span3, product_with_abelian, quaternionic_structure,
    CarnotPresentation, GroupSpec,
};
use crate::exactla::Subspace;
use crate::exterior::{Blade, KForm};
use crate::haffine::{anh12, classify, metivier_probe, MetivierProbe};
use crate::sampling::{self, trial_rng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Published,
    Derived,
    Definition,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Published => "PUBLISHED",
            Provenance::Derived => "DERIVED",
            Provenance::Definition => "DEFINITION",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Field {
    Rank(usize),
    DimV2(usize),
    DimAffine(usize),
    DimHAffine(usize),
    /// `dim Λᵏ(π)` for a given grade.
    LambdaDim { grade: usize, dim: usize },
    Verdict(&'static str),
    /// Rendered text of the classifier evidence.
    Evidence(String),
}

impl Field {
    pub fn name(&self) -> String {
        match self {
            Field::Rank(_) => "rank".into(),
            Field::DimV2(_) => "dim_v2".into(),
            Field::DimAffine(_) => "dim_affine".into(),
            Field::DimHAffine(_) => "dim_haffine".into(),
            Field::LambdaDim { grade, .. } => format!("dim_lambda[{grade}]"),
            Field::Verdict(_) => "verdict".into(),
            Field::Evidence(_) => "evidence".into(),
        }
    }

    pub fn expected(&self) -> String {
        match self {
            Field::Rank(v) | Field::DimV2(v) | Field::DimAffine(v) | Field::DimHAffine(v) => v.to_string(),
            Field::LambdaDim { dim, .. } => dim.to_string(),
            Field::Verdict(v) => v.to_string(),
            Field::Evidence(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub field: Field,
    pub provenance: Provenance,
}

/// Randomized properties checked beyond the report fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtraCheck {
    /// Sampled proper quotients all classify as affine.
    ProperQuotientsAffine { count: usize },
    /// The Métivier probe finds no deficient `ad_x`.
    ProbablyMetivier,
    /// Random linearly independent triples generate copies of `F_3`.
    RandomTriplesFree { count: usize },
}

impl ExtraCheck {
    pub fn describe(&self) -> String {
        match self {
            ExtraCheck::ProperQuotientsAffine { count } => format!("{count} sampled proper quotients are affine"),
            ExtraCheck::ProbablyMetivier => "Metivier probe finds no deficient ad_x".into(),
            ExtraCheck::RandomTriplesFree { count } => format!("{count} random independent triples generate F_3"),
        }
    }

    /// Runs the check; `Err` carries a description of the failure.
    pub fn run(&self, pres: &CarnotPresentation, seed: u64, trials: u64) -> Result<std::result::Result<(), String>> {
        match *self {
            ExtraCheck::ProperQuotientsAffine { count } => {
                let quotients = sample_proper_quotients(pres, seed, count)?;
                for (i, q) in quotients.iter().enumerate() {
                    if !classify(q)?.is_affine() {
                        return Ok(Err(format!("quotient #{i} (rank {}, dim V2 {}) is not affine", q.rank(), q.dim_v2())));
                    }
                }
                Ok(Ok(()))
            }
            ExtraCheck::ProbablyMetivier => match metivier_probe(pres, seed, trials)? {
                MetivierProbe::ProbablyMetivier => Ok(Ok(())),
                MetivierProbe::NotMetivier(x) => Ok(Err(format!("ad_x is not onto for x = {x:?}"))),
            },
            ExtraCheck::RandomTriplesFree { count } => {
                let r = pres.rank();
                let mut found = 0;
                let mut trial = 0u64;
                while found < count {
                    let mut rng = trial_rng(seed, trial);
                    trial += 1;
                    let xs: Vec<_> = (0..3).map(|_| sampling::vector(&mut rng, r)).collect();
                    let span = lie_span3(pres, [&xs[0], &xs[1], &xs[2]])?;
                    if span.dim_horizontal < 3 {
                        continue;
                    }
                    found += 1;
                    if !span.is_free() {
                        return Ok(Err(format!("triple {xs:?} spans only {} brackets", span.dim_brackets)));
                    }
                }
                Ok(Ok(()))
            }
        }
    }
}

pub struct GalleryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn() -> Result<GroupSpec>,
    pub expectations: Vec<Expectation>,
    pub extras: Vec<ExtraCheck>,
}

fn expect(field: Field, provenance: Provenance) -> Expectation {
    Expectation { field, provenance }
}

fn symplectic(n: usize, pairs: &[[usize; 2]]) -> KForm {
    let mut form = KForm::zero(n, 2);
    for pair in pairs {
        form.add_term(Blade::new(n, pair), crate::rational::one());
    }
    form
}

/// `F_4` modulo the line spanned by `dx_1∧dx_2 + dx_3∧dx_4` in the second layer.
pub fn symplectic_quotient_f4() -> Result<CarnotPresentation> {
    let kernel = Subspace::span(6, vec![symplectic(4, &[[1, 2], [3, 4]]).coords()])?;
    free_group(4)?.quotient(&Subspace::zero(4), &kernel)
}

/// `F_5` modulo the annihilator of `dx_1∧dx_2 + dx_4∧dx_5`.
pub fn annihilator_quotient_f5() -> Result<CarnotPresentation> {
    let (first, second) = anh12(&symplectic(5, &[[1, 2], [4, 5]]));
    free_group(5)?.quotient(&first, &second)
}

/// Draws `count` valid proper quotients of `pres`: either a random proper
/// subspace of `V2`, or the ideal generated by a random `x ∈ V1` enlarged by
/// a random vector of `V2`. Draws that collapse `V2` are skipped.
pub fn sample_proper_quotients(pres: &CarnotPresentation, seed: u64, count: usize) -> Result<Vec<CarnotPresentation>> {
    let (r, m) = (pres.rank(), pres.dim_v2());
    let mut out = Vec::with_capacity(count);
    let mut trial = 0u64;
    while out.len() < count {
        if trial > 100 * count as u64 + 100 {
            return Err(Error::InvalidStructure("could not sample enough proper quotients".into()));
        }
        let mut rng = trial_rng(seed, trial);
        trial += 1;
        let (extra1, extra2) = if rng.gen_bool(0.5) || m == 1 {
            let dim = rng.gen_range(1..m.max(2));
            let vs = (0..dim).map(|_| sampling::nonzero_vector(&mut rng, m)).collect();
            (Subspace::zero(r), Subspace::span(m, vs)?)
        } else {
            let x = sampling::nonzero_vector(&mut rng, r);
            let mut vs: Vec<_> = (0..r).map(|j| pres.bracket(&x, &unit(r, j))).collect::<Result<_>>()?;
            vs.push(sampling::vector(&mut rng, m));
            (Subspace::span(r, vec![x])?, Subspace::span(m, vs)?)
        };
        match pres.quotient(&extra1, &extra2) {
            Ok(q) => out.push(q),
            Err(Error::TrivialV2) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn unit(r: usize, i: usize) -> Vec<crate::Rational> {
    let mut v = vec![crate::rational::zero(); r];
    v[i] = crate::rational::one();
    v
}

fn structure_spec(s: crate::carnot::StructureSpec) -> Result<GroupSpec> {
    Ok(GroupSpec::from_structure(&s))
}

pub fn entries() -> Vec<GalleryEntry> {
    use Field::*;
    use Provenance::*;
    vec![
        GalleryEntry {
            name: "f2",
            summary: "first Heisenberg group F_2",
            build: || structure_spec(free_structure(2)),
            expectations: vec![
                expect(Rank(2), Definition),
                expect(DimV2(1), Definition),
                expect(DimAffine(4), Definition),
                expect(DimHAffine(4), Published),
                expect(Verdict("affine"), Published),
            ],
            extras: vec![ExtraCheck::ProbablyMetivier],
        },
        GalleryEntry {
            name: "f3",
            summary: "free step-two group of rank 3",
            build: || structure_spec(free_structure(3)),
            expectations: vec![
                expect(DimV2(3), Definition),
                expect(DimAffine(7), Definition),
                expect(DimHAffine(8), Published),
                expect(Verdict("non_affine"), Published),
                expect(Evidence("1".into()), Published),
            ],
            extras: vec![],
        },
        GalleryEntry {
            name: "f4",
            summary: "free step-two group of rank 4",
            build: || structure_spec(free_structure(4)),
            expectations: vec![
                expect(DimV2(6), Definition),
                expect(DimAffine(11), Definition),
                expect(DimHAffine(16), Published),
                expect(Verdict("non_affine"), Published),
            ],
            extras: vec![],
        },
        GalleryEntry {
            name: "ex61",
            summary: "F_4 / span{dx_1^dx_2 + dx_3^dx_4}: non-surjective bracket, affine",
            build: || Ok(GroupSpec::from_presentation(&symplectic_quotient_f4()?)),
            expectations: vec![
                expect(Rank(4), Published),
                expect(DimV2(5), Derived),
                expect(LambdaDim { grade: 1, dim: 0 }, Published),
                expect(DimAffine(10), Derived),
                expect(DimHAffine(10), Derived),
                expect(Verdict("affine"), Published),
            ],
            extras: vec![],
        },
        GalleryEntry {
            name: "ex62",
            summary: "F_5 / Anh(dx_1^dx_2 + dx_4^dx_5): non-affine, all proper quotients affine",
            build: || Ok(GroupSpec::from_presentation(&annihilator_quotient_f5()?)),
            expectations: vec![
                expect(Rank(5), Published),
                expect(DimV2(5), Derived),
                expect(LambdaDim { grade: 2, dim: 1 }, Published),
                expect(LambdaDim { grade: 1, dim: 0 }, Derived),
                expect(LambdaDim { grade: 0, dim: 0 }, Derived),
                expect(DimAffine(11), Derived),
                expect(DimHAffine(12), Derived),
                expect(Verdict("non_affine"), Published),
                expect(Evidence("1*dx_1^dx_2 + 1*dx_4^dx_5".into()), Published),
            ],
            extras: vec![ExtraCheck::ProperQuotientsAffine { count: 20 }],
        },
        GalleryEntry {
            name: "ex63_quaternionic",
            summary: "quaternionic Heisenberg group H x Im H",
            build: || structure_spec(quaternionic_structure()),
            expectations: vec![
                expect(Rank(4), Definition),
                expect(DimV2(3), Definition),
                expect(DimAffine(8), Definition),
                expect(DimHAffine(8), Derived),
                expect(Verdict("affine"), Published),
            ],
            extras: vec![ExtraCheck::ProbablyMetivier, ExtraCheck::RandomTriplesFree { count: 50 }],
        },
        GalleryEntry {
            name: "ex64",
            summary: "the F_4 quotient of ex61: affine yet full of F_3 subgroups",
            build: || Ok(GroupSpec::from_presentation(&symplectic_quotient_f4()?)),
            expectations: vec![expect(Verdict("affine"), Published)],
            extras: vec![ExtraCheck::RandomTriplesFree { count: 50 }],
        },
        GalleryEntry {
            name: "f3_x_r1",
            summary: "F_3 x R",
            build: || structure_spec(product_with_abelian(&free_structure(3), 1)),
            expectations: vec![
                expect(Rank(4), Definition),
                expect(DimV2(3), Definition),
                expect(DimAffine(8), Definition),
                expect(DimHAffine(9), Derived),
                expect(Verdict("non_affine"), Published),
            ],
            extras: vec![],
        },
        GalleryEntry {
            name: "f3_x_r2",
            summary: "F_3 x R^2",
            build: || structure_spec(product_with_abelian(&free_structure(3), 2)),
            expectations: vec![
                expect(Rank(5), Definition),
                expect(DimV2(3), Definition),
                expect(DimAffine(9), Definition),
                expect(DimHAffine(10), Derived),
                expect(Verdict("non_affine"), Published),
            ],
            extras: vec![],
        },
        GalleryEntry {
            name: "f2_x_f2",
            summary: "F_2 x F_2",
            build: || structure_spec(direct_product(&free_structure(2), &free_structure(2))),
            expectations: vec![
                expect(Rank(4), Definition),
                expect(DimV2(2), Definition),
                expect(DimAffine(7), Definition),
                expect(DimHAffine(7), Derived),
                expect(Verdict("affine"), Published),
            ],
            extras: vec![],
        },
        GalleryEntry {
            name: "quat_x_quat",
            summary: "product of two quaternionic Heisenberg groups",
            build: || structure_spec(direct_product(&quaternionic_structure(), &quaternionic_structure())),
            expectations: vec![
                expect(Rank(8), Definition),
                expect(DimV2(6), Definition),
                expect(DimAffine(15), Definition),
                expect(DimHAffine(15), Derived),
                expect(Verdict("affine"), Published),
            ],
            extras: vec![],
        },
    ]
}

pub fn find(name: &str) -> Option<GalleryEntry> {
    entries().into_iter().find(|e| e.name == name)
}

/// Presentations of every gallery group, in gallery order.
pub fn presentations() -> Result<Vec<(&'static str, CarnotPresentation)>> {
    entries().into_iter().map(|e| Ok((e.name, (e.build)()?.presentation()?))).collect()
}
