//! Polynomial matrices, their minors, and exact rank of rational matrices.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{GermError, Result};
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    /// Row-major construction; all entries must share one variable count.
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(GermError::structural(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let nvars = entries.first().map(Polynomial::nvars).unwrap_or(0);
        if entries.iter().any(|e| e.nvars() != nvars) {
            return Err(GermError::structural("matrix entries with different nvars"));
        }
        Ok(PolyMatrix {
            rows,
            cols,
            nvars,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(GermError::structural("ragged matrix rows"));
        }
        PolyMatrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn identity(size: usize, nvars: usize) -> Self {
        let entries = (0..size * size)
            .map(|k| {
                if k / size == k % size {
                    Polynomial::one(nvars)
                } else {
                    Polynomial::zero(nvars)
                }
            })
            .collect();
        PolyMatrix {
            rows: size,
            cols: size,
            nvars,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, r: usize, c: usize) -> &Polynomial {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Polynomial] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(GermError::structural(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Polynomial::zero(self.nvars);
                for k in 0..self.cols {
                    acc = acc.checked_add(&self.get(i, k).checked_mul(other.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        PolyMatrix::new(self.rows, other.cols, entries)
    }

    /// Substitutes into every entry.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<PolyMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.compose(subs))
            .collect::<Result<Vec<_>>>()?;
        PolyMatrix::new(self.rows, self.cols, entries)
    }

    /// Numeric matrix of constant terms, i.e. the matrix evaluated at 0.
    pub fn at_origin(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(Polynomial::constant_term).collect())
            .collect()
    }

    /// Every `s x s` minor, row subsets outermost, both in lexicographic order.
    pub fn minors(&self, s: usize) -> Result<Vec<Polynomial>> {
        Ok(self.minors_iter(s)?.collect())
    }

    /// Lazy form of [`PolyMatrix::minors`], same order.
    pub fn minors_iter(&self, s: usize) -> Result<impl Iterator<Item = Polynomial> + '_> {
        self.minors_where(s, |_| true)
    }

    /// The minors whose row subset passes `keep`.
    pub fn minors_where<'a>(
        &'a self,
        s: usize,
        keep: impl Fn(&[usize]) -> bool + 'a,
    ) -> Result<impl Iterator<Item = Polynomial> + 'a> {
        if s == 0 || s > self.rows.min(self.cols) {
            return Err(GermError::structural(format!(
                "minor size {s} out of range for a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let col_sets: Vec<Vec<usize>> = (0..self.cols).combinations(s).collect();
        Ok((0..self.rows)
            .combinations(s)
            .filter(move |rs| keep(rs))
            .cartesian_product(col_sets)
            .map(move |(rs, cs)| {
                let sub: Vec<Vec<Polynomial>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| self.get(r, c).clone()).collect())
                    .collect();
                determinant(sub, self.nvars)
            }))
    }
}

/// Determinant of a square polynomial matrix: cofactor expansion up to 3x3,
/// fraction-free Bareiss elimination above.
pub fn determinant(m: Vec<Vec<Polynomial>>, nvars: usize) -> Polynomial {
    match m.len() {
        0 => Polynomial::one(nvars),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        3 => {
            let cof = |a: usize, b: usize, c: usize, d: usize| {
                &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d])
            };
            let t0 = &m[0][0] * &cof(1, 2, 2, 1);
            let t1 = &m[0][1] * &cof(0, 2, 2, 0);
            let t2 = &m[0][2] * &cof(0, 1, 1, 0);
            &(&t0 - &t1) + &t2
        }
        _ => bareiss(m, nvars),
    }
}

fn bareiss(mut m: Vec<Vec<Polynomial>>, nvars: usize) -> Polynomial {
    let n = m.len();
    let mut negate = false;
    let mut prev = Polynomial::one(nvars);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Polynomial::zero(nvars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev).expect("Bareiss step divides exactly");
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// Exact rank of a rational matrix. Rows are cleared of denominators and
/// reduced by fraction-free elimination over the integers.
#[allow(clippy::needless_range_loop)]
pub fn rational_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter().map(|c| c.numer() * (&l / c.denom())).collect()
        })
        .collect();
    let ncols = m.first().map(Vec::len).unwrap_or(0);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let (a, b) = (m[rank][col].clone(), m[r][col].clone());
            for c in col..ncols {
                let v = &m[r][c] * &a - &m[rank][c] * &b;
                m[r][c] = v;
            }
            // keep entries small: divide the row by its content
            let g = m[r][col..].iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
            if !g.is_zero() && !g.is_one() {
                for v in &mut m[r][col..] {
                    *v = &*v / &g;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// The `p x n` Jacobian of a list of polynomials in `n` variables.
pub fn jacobian_of(components: &[Polynomial], nvars: usize) -> Result<PolyMatrix> {
    let mut entries = Vec::with_capacity(components.len() * nvars);
    for f in components {
        if f.nvars() != nvars {
            return Err(GermError::structural("component with wrong nvars"));
        }
        for j in 0..nvars {
            entries.push(f.derive(j)?);
        }
    }
    PolyMatrix::new(components.len(), nvars, entries)
}
