//! Strategies and independent oracles shared by the property suites.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use germkit_core::{MapGerm, Polynomial};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn names(n: usize) -> Vec<String> {
    ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
}

/// Up to `max_terms` terms of total degree in `min_deg..=max_deg`, numerators
/// in `[-num, num]`, denominators in `1..=den`.
pub fn poly(
    nvars: usize,
    min_deg: u32,
    max_deg: u32,
    max_terms: usize,
    num: i64,
    den: i64,
) -> impl Strategy<Value = Polynomial> {
    let term = (
        prop::collection::vec(0..=max_deg, nvars),
        -num..=num,
        1..=den,
    );
    prop::collection::vec(term, 0..=max_terms).prop_map(move |terms| {
        Polynomial::from_terms(
            nvars,
            terms
                .into_iter()
                .filter(|(e, _, _)| {
                    let d: u32 = e.iter().sum();
                    d >= min_deg && d <= max_deg
                })
                .map(|(e, n, d)| (e, rat(n, d))),
        )
        .expect("exponent length matches")
    })
}

/// A germ `K^n -> K^p` with small integer coefficients.
pub fn germ(max_n: usize, max_p: usize, max_deg: u32) -> impl Strategy<Value = MapGerm> {
    (1..=max_n, 1..=max_p).prop_flat_map(move |(n, p)| {
        prop::collection::vec(poly(n, 1, max_deg, 4, 5, 1), p)
            .prop_map(move |comps| MapGerm::new(n, comps).expect("no constants"))
    })
}

/// An integer matrix with nonzero determinant.
pub fn invertible(size: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, size), size)
        .prop_filter("singular", |m| det_i64(m) != 0)
}

pub fn det_i64(m: &[Vec<i64>]) -> i64 {
    permutations(m.len())
        .into_iter()
        .map(|(perm, sign)| {
            sign * perm
                .iter()
                .enumerate()
                .map(|(r, &c)| m[r][c])
                .product::<i64>()
        })
        .sum()
}

/// The linear map `x -> M x` as a germ.
pub fn linear_germ(m: &[Vec<i64>]) -> MapGerm {
    let n = m.len();
    let comps = m
        .iter()
        .map(|row| {
            Polynomial::from_terms(
                n,
                row.iter().enumerate().map(|(j, &a)| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    (e, rat(a, 1))
                }),
            )
            .unwrap()
        })
        .collect();
    MapGerm::new(n, comps).unwrap()
}

/// All permutations of `0..n` with their signs.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    if n == 0 {
        return vec![(vec![], 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            // moving n-1 from the end to `pos` takes len - pos transpositions
            let sign = if (p.len() - pos) % 2 == 0 { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

/// Leibniz expansion `sum_sigma sgn(sigma) prod_i m[i][sigma(i)]`.
pub fn permutation_det(m: &[Vec<Polynomial>], nvars: usize) -> Polynomial {
    let mut acc = Polynomial::zero(nvars);
    for (perm, sign) in permutations(m.len()) {
        let mut term = Polynomial::from_int_terms(nvars, &[(&vec![0; nvars], sign)]);
        for (r, &c) in perm.iter().enumerate() {
            term = &term * &m[r][c];
        }
        acc = &acc + &term;
    }
    acc
}

/// Rank over Q by plain Gaussian elimination.
#[allow(clippy::needless_range_loop)]
pub fn rank_oracle(rows: &[Vec<BigRational>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] / &pivot;
                for k in c..cols {
                    let v = &a[rank][k] * &f;
                    a[r][k] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Linear coefficients of each component: the Jacobian at the origin.
pub fn linear_part(f: &MapGerm) -> Vec<Vec<BigRational>> {
    let n = f.nvars();
    f.components()
        .iter()
        .map(|c| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    c.coefficient(&e)
                })
                .collect()
        })
        .collect()
}

/// Term-by-term evaluation at a rational point.
pub fn eval_oracle(p: &Polynomial, x: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (xi, &e) in x.iter().zip(m.exponents()) {
            for _ in 0..e {
                t *= xi;
            }
        }
        acc += t;
    }
    acc
}

pub fn point(nvars: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-9i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d)), nvars)
}

pub fn one() -> BigRational {
    BigRational::one()
}
