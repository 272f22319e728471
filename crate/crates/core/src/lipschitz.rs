//! Piecewise-Lipschitz expression trees: polynomial operations plus
//! `abs`, `min` and `max`, evaluated in double precision.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{GermError, Result};
use crate::germ::MapGerm;
use crate::poly::{default_var_names, Polynomial};

#[derive(Debug, Clone, PartialEq)]
pub enum LipschitzExpr {
    Var(usize),
    Const(BigRational),
    Add(Box<LipschitzExpr>, Box<LipschitzExpr>),
    Sub(Box<LipschitzExpr>, Box<LipschitzExpr>),
    Mul(Box<LipschitzExpr>, Box<LipschitzExpr>),
    Neg(Box<LipschitzExpr>),
    Pow(Box<LipschitzExpr>, u32),
    Abs(Box<LipschitzExpr>),
    Min(Box<LipschitzExpr>, Box<LipschitzExpr>),
    Max(Box<LipschitzExpr>, Box<LipschitzExpr>),
}

impl LipschitzExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        use LipschitzExpr::*;
        match self {
            Var(i) => x[*i],
            Const(c) => c.to_f64().unwrap_or(f64::NAN),
            Add(a, b) => a.eval(x) + b.eval(x),
            Sub(a, b) => a.eval(x) - b.eval(x),
            Mul(a, b) => a.eval(x) * b.eval(x),
            Neg(a) => -a.eval(x),
            Pow(a, e) => a.eval(x).powi(*e as i32),
            Abs(a) => a.eval(x).abs(),
            Min(a, b) => a.eval(x).min(b.eval(x)),
            Max(a, b) => a.eval(x).max(b.eval(x)),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        use LipschitzExpr::*;
        match self {
            Var(i) => Some(*i),
            Const(_) => None,
            Neg(a) | Pow(a, _) | Abs(a) => a.max_var(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Min(a, b) | Max(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// The exact polynomial, when the tree uses no `abs`/`min`/`max`.
    pub fn to_polynomial(&self, nvars: usize) -> Option<Polynomial> {
        use LipschitzExpr::*;
        Some(match self {
            Var(i) if *i < nvars => Polynomial::var(nvars, *i),
            Var(_) => return None,
            Const(c) => Polynomial::constant(nvars, c.clone()),
            Add(a, b) => &a.to_polynomial(nvars)? + &b.to_polynomial(nvars)?,
            Sub(a, b) => &a.to_polynomial(nvars)? - &b.to_polynomial(nvars)?,
            Mul(a, b) => &a.to_polynomial(nvars)? * &b.to_polynomial(nvars)?,
            Neg(a) => -&a.to_polynomial(nvars)?,
            Pow(a, e) => a.to_polynomial(nvars)?.pow(*e),
            Abs(_) | Min(..) | Max(..) => return None,
        })
    }

    /// Expression tree of a polynomial (sum of monomials).
    pub fn from_polynomial(p: &Polynomial) -> LipschitzExpr {
        let mut acc: Option<LipschitzExpr> = None;
        for (m, c) in p.terms() {
            let mut t = LipschitzExpr::Const(c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                let v = match e {
                    0 => continue,
                    1 => LipschitzExpr::Var(i),
                    _ => LipschitzExpr::Pow(Box::new(LipschitzExpr::Var(i)), e),
                };
                t = if matches!(&t, LipschitzExpr::Const(k) if k.is_one()) {
                    v
                } else {
                    LipschitzExpr::Mul(Box::new(t), Box::new(v))
                };
            }
            acc = Some(match acc {
                None => t,
                Some(a) => LipschitzExpr::Add(Box::new(a), Box::new(t)),
            });
        }
        acc.unwrap_or(LipschitzExpr::Const(BigRational::from_integer(0.into())))
    }
}

/// A map `R^n -> R^p` given by one expression per component.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzMap {
    nvars: usize,
    components: Vec<LipschitzExpr>,
}

impl LipschitzMap {
    pub fn new(nvars: usize, components: Vec<LipschitzExpr>) -> Result<Self> {
        if components.is_empty() {
            return Err(GermError::structural("a map needs at least one component"));
        }
        if components
            .iter()
            .any(|c| c.max_var().is_some_and(|v| v >= nvars))
        {
            return Err(GermError::structural(
                "expression references an undeclared variable",
            ));
        }
        Ok(LipschitzMap { nvars, components })
    }

    pub fn identity(nvars: usize) -> Self {
        LipschitzMap {
            nvars,
            components: (0..nvars).map(LipschitzExpr::Var).collect(),
        }
    }

    pub fn from_germ(f: &MapGerm) -> Self {
        LipschitzMap {
            nvars: f.nvars(),
            components: f
                .components()
                .iter()
                .map(LipschitzExpr::from_polynomial)
                .collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ncomps(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[LipschitzExpr] {
        &self.components
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nvars {
            return Err(GermError::structural(format!(
                "point of length {} for a map in {} variables",
                x.len(),
                self.nvars
            )));
        }
        Ok(self.components.iter().map(|c| c.eval(x)).collect())
    }

    pub fn var_names(&self) -> Vec<String> {
        default_var_names(self.nvars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use LipschitzExpr::*;

    fn b(e: LipschitzExpr) -> Box<LipschitzExpr> {
        Box::new(e)
    }

    #[test]
    fn evaluates_piecewise_operations() {
        // (x + abs(y) * 1/2, y)
        let e = LipschitzMap::new(
            2,
            vec![
                Add(b(Var(0)), b(Mul(b(Abs(b(Var(1)))), b(Const(rat(1, 2)))))),
                Var(1),
            ],
        )
        .unwrap();
        assert_eq!(e.eval(&[1.0, -1.0]).unwrap(), vec![1.5, -1.0]);
        let m = Min(b(Var(0)), b(Var(1)));
        assert_eq!(m.eval(&[2.0, 3.0]), 2.0);
        assert!(e.eval(&[1.0]).is_err());
    }

    #[test]
    fn polynomial_round_trip() {
        let p = Polynomial::from_int_terms(2, &[(&[1, 0], 3), (&[1, 2], -2), (&[0, 3], 1)]);
        let e = LipschitzExpr::from_polynomial(&p);
        assert_eq!(e.to_polynomial(2).unwrap(), p);
        let pt = [0.25, -0.75];
        assert!((e.eval(&pt) - p.eval_f64(&pt)).abs() < 1e-15);
        assert!(Abs(b(Var(0))).to_polynomial(1).is_none());
    }
}
