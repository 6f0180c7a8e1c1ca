//! Randomized invariant suites behind the `check` command.
//!
//! Every suite is deterministic given `(seed, trials)`. The wedge product is
//! injected so that tests can swap in a broken implementation and confirm
//! that the algebraic suites notice.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::carnot::{lift_to_free, free_group, product_with_abelian, direct_product, CarnotPresentation, FreePoint, GroupPoint, StructureSpec};
use crate::combinatorics::binomial;
use crate::exactla::{null_space, rref, solve_particular, RatMatrix};
use crate::exterior::{factorial_rational, wedge, wedge_power, KForm};
use crate::gallery::{self, sample_proper_quotients};
use crate::haffine::{
    cartan_divide, classify, bilinear_witness, dim_affine, dim_affine_via_forms, dim_haffine, haffine_basis,
    check_direction, default_t_grid, lambda_k_pi_dim, monotone_line_check, recover_decomposition, wedge_images,
    Direction, HAffineMap, LineCheck, PsiTilde,
};
use crate::sampling::{self, trial_rng};
use crate::{Rational, Result};

type NamedGroups<'a> = [(&'a str, CarnotPresentation)];
type NamedBases<'a> = [(&'a str, Vec<HAffineMap>)];

pub type WedgeFn = fn(&KForm, &KForm) -> Result<KForm>;

#[derive(Clone, Copy)]
pub struct CheckConfig {
    pub seed: u64,
    pub trials: u64,
    pub wedge: WedgeFn,
}

impl CheckConfig {
    pub fn new(seed: u64, trials: u64) -> Self {
        CheckConfig { seed, trials, wedge }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// Counterexample or error description when the suite fails.
    pub witness: Option<String>,
}

type Outcome = std::result::Result<(), String>;

/// Turns a library error into a suite failure.
fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("error: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random `(n, j, k)` with `2 <= n <= 6` and `j + k <= n`.
fn random_grades<R: Rng>(rng: &mut R) -> (usize, usize, usize) {
    let n = rng.gen_range(2..=6);
    let j = rng.gen_range(0..=n);
    let k = rng.gen_range(0..=n - j);
    (n, j, k)
}

fn anticommutativity(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let (n, j, k) = random_grades(&mut rng);
        let (a, b) = (sampling::kform(&mut rng, n, j), sampling::kform(&mut rng, n, k));
        let ab = lib((cfg.wedge)(&a, &b))?;
        let ba = lib((cfg.wedge)(&b, &a))?;
        let expected = if (j * k) % 2 == 0 { ba } else { -&ba };
        ensure(ab == expected, || format!("a = {a}, b = {b}: a^b = {ab}, expected {expected}"))?;
    }
    Ok(())
}

fn associativity_bilinearity(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let n = rng.gen_range(2..=6);
        let i = rng.gen_range(0..=n);
        let j = rng.gen_range(0..=n - i);
        let k = rng.gen_range(0..=n - i - j);
        let (a, b, c) = (sampling::kform(&mut rng, n, i), sampling::kform(&mut rng, n, j), sampling::kform(&mut rng, n, k));
        let w = cfg.wedge;
        let left = lib(w(&lib(w(&a, &b))?, &c))?;
        let right = lib(w(&a, &lib(w(&b, &c))?))?;
        ensure(left == right, || format!("(a^b)^c != a^(b^c) for a = {a}, b = {b}, c = {c}"))?;

        let b2 = sampling::kform(&mut rng, n, j);
        let s = sampling::rational(&mut rng);
        let lhs = lib(w(&a, &(&b + &b2.scale(&s))))?;
        let rhs = &lib(w(&a, &b))? + &lib(w(&a, &b2))?.scale(&s);
        ensure(lhs == rhs, || format!("wedge is not linear in its second slot at a = {a}"))?;
    }
    Ok(())
}

fn wedge_powers(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=n / 2);
        let omega = sampling::kform(&mut rng, n, 2);
        let direct = lib(wedge_power(&omega, k))?;
        let recursive = lib((cfg.wedge)(&omega, &lib(wedge_power(&omega, k - 1))?))?;
        ensure(direct == recursive, || format!("omega^{k} != omega ^ omega^{} for omega = {omega}", k - 1))?;

        // (Σ ξ_j∧η_j)^k = k! ξ_1∧η_1∧…∧ξ_k∧η_k
        let ones: Vec<KForm> = (0..2 * k).map(|_| sampling::kform(&mut rng, n, 1)).collect();
        let mut sum = KForm::zero(n, 2);
        let mut product = KForm::one(n);
        for pair in ones.chunks(2) {
            let term = lib((cfg.wedge)(&pair[0], &pair[1]))?;
            sum = &sum + &term;
            product = lib((cfg.wedge)(&product, &term))?;
        }
        let power = lib(wedge_power(&sum, k))?;
        ensure(power == product.scale(&factorial_rational(k)), || format!("power identity fails for k = {k}, n = {n}"))?;
    }
    Ok(())
}

fn power_spans(_: &CheckConfig) -> Outcome {
    // ω^k over all sums of at most k disjoint-or-not blade pairs spans Λ^{2k}.
    for n in 2..=6 {
        for k in 1..=n / 2 {
            let pairs = crate::exterior::blades(n, 2);
            let mut rows = Vec::new();
            let mut chosen = vec![0usize; k];
            loop {
                let mut omega = KForm::zero(n, 2);
                for &c in &chosen {
                    omega.add_term(pairs[c], Rational::one());
                }
                rows.push(lib(wedge_power(&omega, k))?.coords());
                // next non-decreasing index tuple
                let Some(pos) = (0..k).rev().find(|&p| chosen[p] + 1 < pairs.len()) else { break };
                chosen[pos] += 1;
                for q in pos + 1..k {
                    chosen[q] = chosen[pos];
                }
            }
            let rank = lib(RatMatrix::from_rows(binomial(n, 2 * k), rows))?.rank();
            ensure(rank == binomial(n, 2 * k), || format!("powers span only {rank} dimensions of grade {} for n = {n}", 2 * k))?;
        }
    }
    Ok(())
}

fn linear_algebra(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=10);
        let data: Vec<Vec<Rational>> = (0..rows)
            .map(|_| (0..cols).map(|_| if rng.gen_bool(0.4) { Rational::zero() } else { sampling::rational(&mut rng) }).collect())
            .collect();
        let m = lib(RatMatrix::from_rows(cols, data))?;
        let kernel = null_space(&m);
        for v in kernel.basis() {
            ensure(lib(m.mul_vec(v))?.iter().all(Zero::is_zero), || format!("null vector {v:?} not killed"))?;
        }
        ensure(m.rank() + kernel.dim() == cols, || "rank-nullity fails".into())?;
        let (r, _) = rref(&m);
        ensure(rref(&r).0 == r, || "rref is not idempotent".into())?;
        let b = sampling::vector(&mut rng, rows);
        if let Ok(x) = solve_particular(&m, &b) {
            ensure(lib(m.mul_vec(&x))? == b, || "particular solution is wrong".into())?;
        }
    }
    Ok(())
}

fn group_axioms(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let n = rng.gen_range(2..=6);
        let (p, q, r) = (sampling::free_point(&mut rng, n), sampling::free_point(&mut rng, n), sampling::free_point(&mut rng, n));
        let left = lib(lib(p.mul(&q))?.mul(&r))?;
        let right = lib(p.mul(&lib(q.mul(&r))?))?;
        ensure(left == right, || "free product is not associative".into())?;
        ensure(lib(p.mul(&FreePoint::identity(n)))? == p, || "identity fails".into())?;
        ensure(lib(p.mul(&p.inverse()))? == FreePoint::identity(n), || "inverse fails".into())?;
        let s = sampling::rational(&mut rng);
        let u = sampling::rational(&mut rng);
        ensure(lib(p.dilate(&s).mul(&q.dilate(&s)))? == lib(p.mul(&q))?.dilate(&s), || format!("dilation by {s} is not a homomorphism"))?;
        ensure(p.dilate(&u).dilate(&s) == p.dilate(&(&s * &u)), || "dilations do not compose".into())?;
    }
    Ok(())
}

fn morphism_laws(cfg: &CheckConfig, groups: &NamedGroups) -> Outcome {
    for (name, pres) in groups {
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, t);
            let n = pres.n();
            let (a, b) = (sampling::kform(&mut rng, n, 1), sampling::kform(&mut rng, n, 1));
            let image = lib(pres.pi2().mul_vec(&lib(wedge(&a, &b))?.coords()))?;
            let pa = lib(pres.pi1().mul_vec(&a.coords()))?;
            let pb = lib(pres.pi1().mul_vec(&b.coords()))?;
            ensure(image == lib(pres.bracket(&pa, &pb))?, || format!("{name}: pi2(a^b) != [pi1 a, pi1 b]"))?;
            let p = sampling::free_point(&mut rng, n);
            let s = sampling::rational(&mut rng);
            let lhs = lib(pres.project(&p.dilate(&s)))?;
            let rhs = crate::carnot::dilate_g(&s, &lib(pres.project(&p))?);
            ensure(lhs == rhs, || format!("{name}: projection does not commute with dilation"))?;
            let q = sampling::free_point(&mut rng, n);
            let hom = lib(pres.project(&lib(p.mul(&q))?))? == lib(pres.mul(&lib(pres.project(&p))?, &lib(pres.project(&q))?))?;
            ensure(hom, || format!("{name}: projection is not a group homomorphism"))?;
        }
        let same = lib(pres.quotient(&crate::exactla::Subspace::zero(pres.rank()), &crate::exactla::Subspace::zero(pres.dim_v2())))?;
        ensure(&same == pres, || format!("{name}: quotient by zero changed the presentation"))?;
    }
    Ok(())
}

fn dimension_laws(_: &CheckConfig) -> Outcome {
    for n in 2..=6 {
        let f = lib(free_group(n))?;
        ensure(lib(dim_haffine(&f))? == 1 << n, || format!("dim A_h(F_{n}) != 2^{n}"))?;
        ensure(dim_affine(&f) == 1 + n + n * (n - 1) / 2, || format!("dim A(F_{n}) wrong"))?;
        ensure(lib(dim_affine_via_forms(&f))? == dim_affine(&f), || format!("affine dimension cross-check fails for F_{n}"))?;
    }
    Ok(())
}

fn affine_equivalences(groups: &NamedGroups) -> Outcome {
    for (name, pres) in groups {
        let verdict = lib(classify(pres))?;
        let equal_dims = lib(dim_haffine(pres))? == dim_affine(pres);
        let no_witness = lib(bilinear_witness(pres))?.is_none();
        let n = pres.n();
        let low = if n >= 3 { lib(lambda_k_pi_dim(pres, n - 3))? == 0 } else { true };
        let forms = lib(dim_affine_via_forms(pres))? == dim_affine(pres);
        ensure(
            verdict.is_affine() == equal_dims && equal_dims == no_witness && no_witness == (low || pres.rank() <= 2) && forms,
            || format!("{name}: verdict {}, equal dims {equal_dims}, no witness {no_witness}, low grade empty {low}", verdict.label()),
        )?;
    }
    Ok(())
}

fn kernel_element<R: Rng>(rng: &mut R, pres: &CarnotPresentation) -> Result<FreePoint> {
    let n = pres.n();
    let mut theta = vec![Rational::zero(); n];
    for v in pres.kernel1().basis() {
        let c = sampling::rational(rng);
        theta.iter_mut().zip(v).for_each(|(a, b)| *a += &c * b);
    }
    let mut omega = vec![Rational::zero(); binomial(n, 2)];
    for v in pres.kernel2().basis() {
        let c = sampling::rational(rng);
        omega.iter_mut().zip(v).for_each(|(a, b)| *a += &c * b);
    }
    FreePoint::from_coords(n, &theta, &omega)
}

fn factorization_and_cosets(cfg: &CheckConfig, bases: &NamedBases) -> Outcome {
    for (name, maps) in bases {
        for (idx, f) in maps.iter().enumerate() {
            let pres = f.presentation();
            for t in 0..cfg.trials {
                let mut rng = trial_rng(cfg.seed, t);
                let p = sampling::free_point(&mut rng, pres.n());
                let direct = lib(f.eval_free(&p))?;
                let through_g = lib(f.eval(&lib(pres.project(&p))?))?;
                ensure(direct == through_g, || format!("{name} map #{idx} ({f}): value at a point differs from value at its image"))?;
                let k = lib(kernel_element(&mut rng, pres))?;
                let shifted = lib(f.eval_free(&lib(p.mul(&k))?))?;
                ensure(direct == shifted, || format!("{name} map #{idx} ({f}): not constant on a kernel coset"))?;
            }
        }
    }
    Ok(())
}

fn direction_suite(cfg: &CheckConfig, bases: &NamedBases, direction: Direction) -> Outcome {
    for (name, maps) in bases {
        for (idx, f) in maps.iter().enumerate() {
            let eval = |q: &GroupPoint| f.eval(q);
            match lib(check_direction(&eval, f.presentation(), direction, cfg.seed, cfg.trials))? {
                LineCheck::Pass => {}
                LineCheck::Fail(w) => return Err(format!("{name} map #{idx} ({f}): {w}")),
            }
        }
    }
    Ok(())
}

fn monotone_lines(cfg: &CheckConfig, bases: &NamedBases) -> Outcome {
    let grid = default_t_grid();
    for (name, maps) in bases {
        for (idx, f) in maps.iter().enumerate() {
            if let LineCheck::Fail(w) = lib(monotone_line_check(f, cfg.seed, cfg.trials, &grid))? {
                return Err(format!("{name} map #{idx} ({f}): {} sign changes on line {w}", w.second_difference));
            }
        }
    }
    Ok(())
}

fn division_roundtrip(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=n);
        let eta = sampling::kform(&mut rng, n, k - 1);
        let back = lib(cartan_divide(&lib(wedge_images(&eta))?))?;
        ensure(back == eta, || format!("division returned {back} instead of {eta}"))?;
    }
    Ok(())
}

fn coefficient_roundtrip(cfg: &CheckConfig) -> Outcome {
    let rounds = cfg.trials.clamp(1, 50);
    for t in 0..rounds {
        let mut rng = trial_rng(cfg.seed, t);
        let n = rng.gen_range(3..=5);
        let etas: Vec<KForm> = (0..=n).map(|g| sampling::kform(&mut rng, n, g)).collect();
        let terms = etas.iter().cloned().map(PsiTilde::from_eta).collect();
        let f = lib(HAffineMap::new(Arc::new(lib(free_group(n))?), terms))?;
        let back = lib(recover_decomposition(|p| f.eval_free(p), n))?;
        ensure(back == etas, || format!("coefficient roundtrip failed on F_{n}"))?;
    }
    Ok(())
}

fn homogeneity(cfg: &CheckConfig) -> Outcome {
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let n = rng.gen_range(2..=6);
        let degree = rng.gen_range(0..=n);
        let psi = PsiTilde::from_eta(sampling::kform(&mut rng, n, n - degree));
        let p = sampling::free_point(&mut rng, n);
        let s = sampling::rational(&mut rng);
        let lhs = lib(psi.eval(&p.dilate(&s)))?;
        let rhs = num_traits::pow(s.clone(), degree) * lib(psi.eval(&p))?;
        ensure(lhs == rhs, || format!("{psi} is not homogeneous of degree {degree}"))?;
    }
    Ok(())
}

fn quotient_stability(cfg: &CheckConfig, groups: &NamedGroups) -> Outcome {
    let count = (cfg.trials as usize).clamp(1, 10);
    for (name, pres) in groups {
        if !lib(classify(pres))?.is_affine() || pres.rank() > 5 || pres.dim_v2() < 2 {
            continue;
        }
        for (i, q) in lib(sample_proper_quotients(pres, cfg.seed, count))?.iter().enumerate() {
            ensure(lib(classify(q))?.is_affine(), || format!("{name}: quotient #{i} is not affine"))?;
        }
    }
    Ok(())
}

fn product_laws(_: &CheckConfig) -> Outcome {
    let affine = |s: &StructureSpec| -> std::result::Result<bool, String> { Ok(lib(classify(&lib(lift_to_free(s))?))?.is_affine()) };
    let bases = [
        crate::carnot::free_structure(2),
        crate::carnot::free_structure(3),
        crate::carnot::quaternionic_structure(),
    ];
    for g in &bases {
        let base = affine(g)?;
        for d in 1..=2 {
            ensure(affine(&product_with_abelian(g, d))? == base, || format!("product with R^{d} changed the verdict"))?;
        }
        for h in &bases {
            if g.rank + h.rank > 8 {
                continue;
            }
            let both = base && affine(h)?;
            ensure(affine(&direct_product(g, h))? == both, || "product verdict is not the conjunction".into())?;
        }
    }
    Ok(())
}

fn sigma_in_f3(cfg: &CheckConfig) -> Outcome {
    let f3 = lib(free_group(3))?;
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, t);
        let (x, y) = (sampling::vector(&mut rng, 3), sampling::vector(&mut rng, 3));
        let (a, b, c) = (sampling::rational(&mut rng), sampling::rational(&mut rng), sampling::rational(&mut rng));
        let theta: Vec<Rational> = x.iter().zip(&y).map(|(u, v)| &a * u + &b * v).collect();
        let omega: Vec<Rational> = lib(f3.bracket(&x, &y))?.into_iter().map(|v| &c * v).collect();
        let p = lib(FreePoint::from_coords(3, &theta, &omega))?;
        let product = lib(wedge(p.theta(), p.omega()))?;
        ensure(product.is_zero(), || format!("theta^omega = {product} at a point of Lie(x, y)"))?;
    }
    Ok(())
}

fn gallery_bases() -> Result<Vec<(&'static str, Vec<HAffineMap>)>> {
    gallery::presentations()?
        .into_iter()
        .map(|(name, pres)| Ok((name, haffine_basis(&Arc::new(pres))?)))
        .collect()
}

/// Names of all suites in run order.
pub const SUITES: [&str; 21] = [
    "wedge anticommutativity",
    "wedge associativity and bilinearity",
    "wedge powers",
    "powers of 2-forms span",
    "exact linear algebra",
    "free group axioms and dilations",
    "morphism laws on gallery groups",
    "dimension law on free groups",
    "affine-verdict equivalences",
    "factorization and coset constancy",
    "horizontal-line affinity",
    "[V1,V1]-affinity",
    "Lie(x,y)-affinity",
    "fixed-z slice affinity",
    "monotone lines",
    "division roundtrip",
    "coefficient roundtrip",
    "homogeneity",
    "quotient stability",
    "product laws",
    "Lie(x,y) in F_3 lies in theta^omega = 0",
];

/// Runs every suite. Gallery-wide suites share one set of bases.
pub fn run_all(cfg: &CheckConfig) -> Vec<SuiteResult> {
    run_selected(cfg, |_| true)
}

pub fn run_selected(cfg: &CheckConfig, select: impl Fn(&str) -> bool) -> Vec<SuiteResult> {
    let groups = gallery::presentations();
    let bases = gallery_bases();
    let with_groups = |f: &dyn Fn(&NamedGroups) -> Outcome| match &groups {
        Ok(g) => f(g),
        Err(e) => Err(format!("error building gallery: {e}")),
    };
    let with_bases = |f: &dyn Fn(&NamedBases) -> Outcome| match &bases {
        Ok(b) => f(b),
        Err(e) => Err(format!("error building bases: {e}")),
    };
    let mut out = Vec::new();
    for name in SUITES {
        if !select(name) {
            continue;
        }
        let outcome = match name {
            "wedge anticommutativity" => anticommutativity(cfg),
            "wedge associativity and bilinearity" => associativity_bilinearity(cfg),
            "wedge powers" => wedge_powers(cfg),
            "powers of 2-forms span" => power_spans(cfg),
            "exact linear algebra" => linear_algebra(cfg),
            "free group axioms and dilations" => group_axioms(cfg),
            "morphism laws on gallery groups" => with_groups(&|g| morphism_laws(cfg, g)),
            "dimension law on free groups" => dimension_laws(cfg),
            "affine-verdict equivalences" => with_groups(&affine_equivalences),
            "factorization and coset constancy" => with_bases(&|b| factorization_and_cosets(cfg, b)),
            "horizontal-line affinity" => with_bases(&|b| direction_suite(cfg, b, Direction::Horizontal)),
            "[V1,V1]-affinity" => with_bases(&|b| direction_suite(cfg, b, Direction::Bracket)),
            "Lie(x,y)-affinity" => with_bases(&|b| direction_suite(cfg, b, Direction::Sigma)),
            "fixed-z slice affinity" => with_bases(&|b| direction_suite(cfg, b, Direction::Slice)),
            "monotone lines" => with_bases(&|b| monotone_lines(cfg, b)),
            "division roundtrip" => division_roundtrip(cfg),
            "coefficient roundtrip" => coefficient_roundtrip(cfg),
            "homogeneity" => homogeneity(cfg),
            "quotient stability" => with_groups(&|g| quotient_stability(cfg, g)),
            "product laws" => product_laws(cfg),
            "Lie(x,y) in F_3 lies in theta^omega = 0" => sigma_in_f3(cfg),
            other => Err(format!("unknown suite {other}")),
        };
        out.push(SuiteResult { name: name.to_string(), passed: outcome.is_ok(), witness: outcome.err() });
    }
    out
}

/// A wedge that drops the transposition sign, for negative-control tests.
pub fn unsigned_wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    let mut out = KForm::zero(a.n(), a.grade() + b.grade());
    wedge(a, b)?;
    for (ba, ca) in a.terms() {
        for (bb, cb) in b.terms() {
            if let Some((blade, _)) = ba.wedge(bb) {
                out.add_term(blade, ca * cb);
            }
        }
    }
    Ok(out)
}
