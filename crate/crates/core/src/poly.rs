//! Exact multivariate polynomials over the rationals.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose ordering is the
//! canonical display order: ascending total degree, and inside one degree
//! lexicographically descending (`x^2, x*y, y^2`). Zero coefficients are never
//! stored, so two equal polynomials always have identical term maps.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{GermError, Result};

/// Exponent vector `[e0, e1, ...]` standing for `x0^e0 * x1^e1 * ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub(crate) fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub(crate) fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub(crate) fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Default variable names: `x, y, z` up to three variables, `x1..xn` beyond.
pub fn default_var_names(nvars: usize) -> Vec<String> {
    match nvars {
        0..=3 => ["x", "y", "z"][..nvars]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        _ => (1..=nvars).map(|i| format!("x{i}")).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, BigRational::one())
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Polynomial::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    /// The coordinate function `x_idx`.
    pub fn var(nvars: usize, idx: usize) -> Self {
        assert!(
            idx < nvars,
            "variable index {idx} out of range for {nvars} variables"
        );
        let mut p = Polynomial::zero(nvars);
        p.terms
            .insert(Monomial::var(nvars, idx), BigRational::one());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut p = Polynomial::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(GermError::structural(format!(
                    "exponent vector of length {} in a polynomial of {} variables",
                    exps.len(),
                    nvars
                )));
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    /// Small-integer convenience constructor used heavily by tests and presets.
    pub fn from_int_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Self {
        Polynomial::from_terms(
            nvars,
            terms
                .iter()
                .map(|(e, c)| (e.to_vec(), BigRational::from_integer(BigInt::from(*c)))),
        )
        .expect("exponent vectors must match nvars")
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical order (ascending degree, then lex descending).
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigRational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&vec![0; self.nvars])
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Lowest total degree carrying a nonzero term; `None` for zero.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.order() == self.degree()
    }

    /// Leading term with respect to the graded order (highest degree first).
    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Scales so that the leading coefficient is 1. Zero stays zero.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => self.scale(&lc.recip()),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    fn check_same(&self, other: &Polynomial) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(GermError::structural(format!(
                "polynomials in {} and {} variables cannot be combined",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut acc: std::collections::HashMap<Monomial, BigRational> =
            std::collections::HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                acc.entry(ma.mul(mb)).and_modify(|e| *e += &c).or_insert(c);
            }
        }
        Ok(Polynomial {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn derive(&self, var: usize) -> Result<Polynomial> {
        if var >= self.nvars {
            return Err(GermError::structural(format!(
                "derivative in variable {var} of a polynomial in {} variables",
                self.nvars
            )));
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.terms.insert(
                Monomial(exps),
                c * BigRational::from_integer(BigInt::from(e)),
            );
        }
        Ok(out)
    }

    /// Exact value at a rational point.
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.nvars {
            return Err(GermError::structural(format!(
                "evaluation point of length {} for a polynomial in {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Double-precision value; the point length must equal `nvars`.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(point)
                    .fold(rational_to_f64(c), |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum()
    }

    /// Sum of the degree-`d` terms.
    pub fn homogeneous_component(&self, d: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Terms of total degree at most `d`.
    pub fn truncate(&self, d: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes must share one
    /// variable count, which becomes the variable count of the result.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial> {
        if subs.len() != self.nvars {
            return Err(GermError::structural(format!(
                "composition needs {} substitutes, got {}",
                self.nvars,
                subs.len()
            )));
        }
        let target = match subs.first() {
            Some(s) => s.nvars,
            // constant polynomial in zero variables
            None => return Ok(self.clone()),
        };
        if subs.iter().any(|s| s.nvars != target) {
            return Err(GermError::structural(
                "substitutes with different variable counts",
            ));
        }
        // powers[i][e] = subs[i]^e, filled lazily
        let mut powers: Vec<Vec<Polynomial>> =
            subs.iter().map(|_| vec![Polynomial::one(target)]).collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &subs[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Re-embeds this polynomial into `nvars` variables, placing variable `i`
    /// at position `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Result<Polynomial> {
        if map.len() != self.nvars || map.iter().any(|&j| j >= nvars) {
            return Err(GermError::structural("invalid variable embedding"));
        }
        let mut out = Polynomial::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; nvars];
            for (i, &k) in m.0.iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// `self -= c * shift * g`, in place, discarding products of degree
    /// `>= bound`.
    pub(crate) fn sub_shifted_below(
        &mut self,
        c: &BigRational,
        shift: &Monomial,
        g: &Polynomial,
        bound: u32,
    ) {
        let sd = shift.degree();
        for (m, a) in &g.terms {
            if m.degree().saturating_add(sd) >= bound {
                break;
            }
            let key = m.mul(shift);
            let d = a * c;
            match self.terms.entry(key) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(-d);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    *o.get_mut() -= d;
                    if o.get().is_zero() {
                        o.remove();
                    }
                }
            }
        }
    }

    /// Removes and returns the largest term in canonical order.
    pub(crate) fn pop_last_term(&mut self) -> Option<(Monomial, BigRational)> {
        self.terms.pop_last()
    }

    /// Removes and returns the smallest term in canonical order.
    pub(crate) fn pop_first_term(&mut self) -> Option<(Monomial, BigRational)> {
        self.terms.pop_first()
    }

    /// Smallest term in canonical order: the lowest degree part comes first.
    pub(crate) fn first_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next()
    }

    pub(crate) fn push_term(&mut self, m: Monomial, c: BigRational) {
        self.add_term(m, c);
    }

    /// Exact quotient `self / divisor` when the division leaves no remainder.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        if self.nvars != divisor.nvars {
            return None;
        }
        let (dm, dc) = divisor.leading_term()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = Polynomial::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading_term() {
            if !dm.divides(rm) {
                return None;
            }
            let qm = rm.div(&dm);
            let qc = rc / &dc;
            let mut step = Polynomial::zero(self.nvars);
            step.terms.insert(qm.clone(), qc.clone());
            rem = &rem - &(&step * divisor);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Renders with the given variable names in canonical order.
    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let abs = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (k, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[k].clone()),
                    _ => factors.push(format!("{}^{}", names[k], e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
    })
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(&default_var_names(self.nvars)))
    }
}

// Operator forms panic on mismatched variable counts; the `checked_*`
// methods report a structural error instead.
impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.checked_add(rhs).expect("mismatched nvars in add")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.checked_sub(rhs).expect("mismatched nvars in sub")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.checked_mul(rhs).expect("mismatched nvars in mul")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}
