//! Independent count of horizontally affine maps.
//!
//! Works directly with polynomials on `V1 × V2` (weights 1 and 2) of
//! weighted degree at most a bound, and imposes that every restriction
//! `t ↦ f(x + t·y, z + t·[x, y])` has vanishing coefficients of `t²` and up.
//! The conditions are sampled at random points over `Z/p`, so none of the
//! exterior-algebra machinery of the library is involved: only the bracket
//! table of the group is read.

#![allow(dead_code)]

use carnot_affine::carnot::CarnotPresentation;
use carnot_affine::Rational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const P: u64 = (1 << 61) - 1;

fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn add(a: u64, b: u64) -> u64 {
    (a + b) % P
}

fn sub(a: u64, b: u64) -> u64 {
    (a + P - b) % P
}

fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    acc
}

fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

pub fn reduce(q: &Rational) -> u64 {
    let modulus = num_bigint::BigInt::from(P);
    let lift = |v: &num_bigint::BigInt| {
        let r = ((v % &modulus) + &modulus) % &modulus;
        r.to_u64().expect("reduced below p")
    };
    let num = lift(q.numer());
    let den = lift(&q.denom().abs());
    let value = mul(num, inv(den));
    if q.denom().is_negative() {
        sub(0, value)
    } else {
        value
    }
}

/// Exponent vectors over `r` horizontal and `m` vertical variables with
/// weighted degree at most `bound`.
pub fn monomials(r: usize, m: usize, bound: usize) -> Vec<Vec<u32>> {
    let weights: Vec<usize> = std::iter::repeat_n(1, r).chain(std::iter::repeat_n(2, m)).collect();
    let mut out = Vec::new();
    let mut current = vec![0u32; r + m];
    fn walk(var: usize, left: usize, weights: &[usize], current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if var == weights.len() {
            out.push(current.clone());
            return;
        }
        let mut e = 0;
        loop {
            current[var] = e as u32;
            walk(var + 1, left - e * weights[var], weights, current, out);
            if (e + 1) * weights[var] > left {
                break;
            }
            e += 1;
        }
        current[var] = 0;
    }
    walk(0, bound, &weights, &mut current, &mut out);
    out
}

/// `p(t) · (a + b·t)`.
fn poly_mul(p: &[u64], a: u64, b: u64) -> Vec<u64> {
    let mut out = vec![0; p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i] = add(out[i], mul(*c, a));
        out[i + 1] = add(out[i + 1], mul(*c, b));
    }
    out
}

/// Incremental row echelon form over `Z/p`.
struct Echelon {
    rows: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    fn insert(&mut self, mut row: Vec<u64>) -> bool {
        for (pivot, basis) in &self.rows {
            let c = row[*pivot];
            if c != 0 {
                for (x, y) in row.iter_mut().zip(basis) {
                    *x = sub(*x, mul(c, *y));
                }
            }
        }
        let Some(pivot) = row.iter().position(|&v| v != 0) else {
            return false;
        };
        let scale = inv(row[pivot]);
        for v in row.iter_mut() {
            *v = mul(*v, scale);
        }
        self.rows.push((pivot, row));
        true
    }
}

/// Dimension of the space of polynomials of weighted degree `≤ bound` that
/// are affine along every horizontal line.
pub fn haffine_dim_oracle(pres: &CarnotPresentation, bound: usize, seed: u64) -> usize {
    let (r, m) = (pres.rank(), pres.dim_v2());
    let table: Vec<Vec<Vec<u64>>> = (0..r)
        .map(|i| (0..r).map(|j| pres.basis_bracket(i, j).iter().map(reduce).collect()).collect())
        .collect();
    let monos = monomials(r, m, bound);
    let mut echelon = Echelon { rows: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idle = 0;
    while idle < 8 && echelon.rows.len() < monos.len() {
        let x: Vec<u64> = (0..r).map(|_| rng.gen_range(0..P)).collect();
        let y: Vec<u64> = (0..r).map(|_| rng.gen_range(0..P)).collect();
        let z: Vec<u64> = (0..m).map(|_| rng.gen_range(0..P)).collect();
        let mut twist = vec![0u64; m];
        for i in 0..r {
            for j in 0..r {
                let c = mul(x[i], y[j]);
                for (t, b) in twist.iter_mut().zip(&table[i][j]) {
                    *t = add(*t, mul(c, *b));
                }
            }
        }
        // Each variable along the line is `start + slope·t`.
        let line: Vec<(u64, u64)> = x.iter().zip(&y).map(|(a, b)| (*a, *b)).chain(z.iter().zip(&twist).map(|(a, b)| (*a, *b))).collect();
        let expansions: Vec<Vec<u64>> = monos
            .iter()
            .map(|mono| {
                let mut p = vec![1u64];
                for (var, e) in mono.iter().enumerate() {
                    for _ in 0..*e {
                        p = poly_mul(&p, line[var].0, line[var].1);
                    }
                }
                p
            })
            .collect();
        let mut grew = false;
        for power in 2..=bound {
            let row: Vec<u64> = expansions.iter().map(|p| p.get(power).copied().unwrap_or(0)).collect();
            grew |= echelon.insert(row);
        }
        idle = if grew { 0 } else { idle + 1 };
    }
    monos.len() - echelon.rows.len()
}
