//! Newton-Puiseux expansions `x = sum c_k y^(e_k)` of plane curves
//! `F(x, y) = 0` at the origin, with exact rational exponents and complex
//! double coefficients, and the Puiseux pairs read off the exponents.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{GermError, Result};
use crate::poly::{rational_to_f64, Polynomial};

pub const DEFAULT_MAX_TERMS: usize = 12;
pub const ROOT_MAX_ITER: usize = 500;
/// Relative residual at which simultaneous iteration stops.
pub const ROOT_RESIDUAL: f64 = 1e-12;
/// Relative distance under which approximate roots are merged into one
/// multiple root.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Coefficients below this fraction of the largest one are dropped after a
/// substitution.
const DROP_TOL: f64 = 1e-11;

/// Lower-left hull of the support of `F`, from the vertex on the `x`-exponent
/// axis towards the `y`-exponent axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    /// `(i, j)` for the monomial `x^i y^j`.
    pub vertices: Vec<(u32, u32)>,
    pub edges: Vec<NewtonEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonEdge {
    pub from: (u32, u32),
    pub to: (u32, u32),
    /// Support points on the edge, vertices included, by decreasing `i`.
    pub points: Vec<(u32, u32)>,
    /// `x ~ y^slope` along the edge.
    #[serde(serialize_with = "ser_ratio")]
    pub slope: Rational64,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn newton_polygon(f: &Polynomial) -> Result<NewtonPolygon> {
    let w = Working::from_polynomial(f)?;
    let hull = w.hull();
    let as_int = |(i, q): (u32, Rational64)| (i, q.to_integer() as u32);
    let mut vertices: Vec<(u32, u32)> = hull.iter().map(|e| as_int(e.from)).collect();
    if let Some(e) = hull.last() {
        vertices.push(as_int(e.to));
    } else {
        vertices.push(as_int((w.axis_degree(), Rational64::zero())));
    }
    let edges = hull
        .into_iter()
        .map(|e| NewtonEdge {
            from: as_int(e.from),
            to: as_int(e.to),
            points: e.points.iter().map(|&(i, q, _)| as_int((i, q))).collect(),
            slope: e.slope,
        })
        .collect();
    Ok(NewtonPolygon { vertices, edges })
}

/// One Puiseux root `x(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PuiseuxBranch {
    /// `(e_k, c_k)` with strictly increasing positive exponents. Empty for the
    /// root `x = 0`.
    pub terms: Vec<(Rational64, Complex64)>,
    /// Whether the expansion reached a simple root, after which no new
    /// exponent denominators can appear.
    pub complete: bool,
    /// Order in `y` of `F(x(y), y)` for the truncated expansion.
    pub residual_order: Rational64,
}

impl PuiseuxBranch {
    pub fn exponents(&self) -> Vec<Rational64> {
        self.terms.iter().map(|t| t.0).collect()
    }

    /// Lcm of the exponent denominators.
    pub fn denominator(&self) -> i64 {
        self.terms.iter().fold(1, |acc, t| acc.lcm(t.0.denom()))
    }

    /// Exponents at which the running lcm of denominators grows.
    pub fn char_exponents(&self) -> Vec<Rational64> {
        let mut lcm = 1i64;
        let mut out = Vec::new();
        for (e, _) in &self.terms {
            let next = lcm.lcm(e.denom());
            if next > lcm {
                out.push(*e);
            }
            lcm = next;
        }
        out
    }

    /// `x(t^d)` for the truncated expansion, `d` the denominator.
    pub fn eval_at(&self, t: f64) -> Complex64 {
        let d = self.denominator();
        self.terms
            .iter()
            .map(|(e, c)| c * t.powi((e * d).to_integer() as i32))
            .sum()
    }

    pub fn report(&self) -> BranchReport {
        BranchReport {
            exponents: self.exponents().iter().map(|e| e.to_string()).collect(),
            pairs: puiseux_pairs(self).ok(),
            complete: self.complete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchReport {
    pub exponents: Vec<String>,
    /// `None` for an incomplete branch.
    pub pairs: Option<Vec<(i64, i64)>>,
    pub complete: bool,
}

/// Pairs `(m_k, n_k)` with characteristic exponents `m_1 / n_1`,
/// `m_2 / (n_1 n_2)`, `m_3 / (n_1 n_2 n_3)`, ...
pub fn puiseux_pairs(b: &PuiseuxBranch) -> Result<Vec<(i64, i64)>> {
    if !b.complete {
        return Err(GermError::IncompleteBranch(format!(
            "expansion stopped after {} terms before the root separated",
            b.terms.len()
        )));
    }
    let mut prod = 1i64;
    let mut out = Vec::new();
    for e in b.char_exponents() {
        let r = e * Rational64::from_integer(prod);
        out.push((*r.numer(), *r.denom()));
        prod *= r.denom();
    }
    Ok(out)
}

pub fn topologically_equal(a: &[(i64, i64)], b: &[(i64, i64)]) -> bool {
    a == b
}

/// Outcome of evaluating `F` along a truncated branch at `y = t^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// `|F(x(t^d), t^d)|`.
    pub value: f64,
    /// `10 t^(d E)`, `E` the residual order.
    pub bound: f64,
    /// Rounding floor: a few ulps of the largest monomial in the evaluation.
    pub roundoff: f64,
}

impl Residual {
    pub fn within_bound(&self) -> bool {
        self.value <= self.bound
    }

    /// Passes once the rounding floor of double evaluation is allowed for.
    pub fn within_precision(&self) -> bool {
        self.value <= self.bound + self.roundoff
    }
}

pub fn residual_check(f: &Polynomial, b: &PuiseuxBranch, t: f64) -> Residual {
    let d = b.denominator();
    let y = Complex64::new(t.powi(d as i32), 0.0);
    let x = b.eval_at(t);
    let terms: Vec<Complex64> = f
        .terms()
        .map(|(m, c)| {
            let e = m.exponents();
            rational_to_f64(c) * x.powu(e[0]) * y.powu(e[1])
        })
        .collect();
    Residual {
        value: terms.iter().sum::<Complex64>().norm(),
        bound: 10.0 * t.powf((b.residual_order * d).to_f64().unwrap_or(f64::INFINITY)),
        roundoff: 64.0 * f64::EPSILON * terms.iter().map(|c| c.norm()).sum::<f64>(),
    }
}

/// One branch per Puiseux root `x(y)` of `F`, `F` in the variables `(x, y)`.
pub fn puiseux_expansions(f: &Polynomial, max_terms: usize) -> Result<Vec<PuiseuxBranch>> {
    if max_terms == 0 {
        return Err(GermError::structural("max_terms must be at least 1"));
    }
    let w = Working::from_polynomial(f)?;
    let mut out = Vec::new();
    expand(&w, Vec::new(), Rational64::zero(), max_terms, &mut out)?;
    Ok(out)
}

/// `G(X, y) = sum c X^i y^q` with rational `q >= 0`.
#[derive(Debug, Clone)]
struct Working {
    terms: BTreeMap<(u32, Rational64), Complex64>,
}

struct Edge {
    from: (u32, Rational64),
    to: (u32, Rational64),
    /// `(i, q, c)` by decreasing `i`.
    points: Vec<(u32, Rational64, Complex64)>,
    slope: Rational64,
}

impl Working {
    fn from_polynomial(f: &Polynomial) -> Result<Self> {
        if f.nvars() != 2 {
            return Err(GermError::structural(format!(
                "plane curves need 2 variables, got {}",
                f.nvars()
            )));
        }
        if f.is_zero() {
            return Err(GermError::structural(
                "the zero polynomial has no Newton polygon",
            ));
        }
        if !f.constant_term().is_zero() {
            return Err(GermError::NotAGerm { component: 0 });
        }
        let terms: BTreeMap<_, _> = f
            .terms()
            .map(|(m, c)| {
                let e = m.exponents();
                (
                    (e[0], Rational64::from_integer(e[1] as i64)),
                    Complex64::new(rational_to_f64(c), 0.0),
                )
            })
            .collect();
        let w = Working { terms };
        if !w.terms.keys().any(|(_, q)| q.is_zero()) {
            return Err(GermError::structural(
                "F(x, 0) vanishes identically: F has a factor free of x",
            ));
        }
        Ok(w)
    }

    /// Least `i` with `X^i` in `G(X, 0)`: the number of roots tending to 0.
    fn axis_degree(&self) -> u32 {
        self.terms
            .keys()
            .filter(|(_, q)| q.is_zero())
            .map(|(i, _)| *i)
            .min()
            .expect("G(X, 0) is nonzero")
    }

    /// Compact edges from `(axis_degree, 0)` to the point of least `i`.
    fn hull(&self) -> Vec<Edge> {
        let mut v = (self.axis_degree(), Rational64::zero());
        let mut edges = Vec::new();
        loop {
            let left: Vec<(u32, Rational64, Complex64)> = self
                .terms
                .iter()
                .filter(|((i, _), _)| *i < v.0)
                .map(|(&(i, q), &c)| (i, q, c))
                .collect();
            if left.is_empty() {
                return edges;
            }
            let slope_of = |&(i, q, _): &(u32, Rational64, Complex64)| {
                (q - v.1) / Rational64::from_integer((v.0 - i) as i64)
            };
            let slope = left.iter().map(slope_of).min().expect("nonempty");
            let mut points: Vec<_> = left.into_iter().filter(|p| slope_of(p) == slope).collect();
            points.push((v.0, v.1, self.terms[&v]));
            points.sort_by_key(|p| std::cmp::Reverse(p.0));
            let last = *points.last().expect("nonempty");
            let to = (last.0, last.1);
            edges.push(Edge {
                from: v,
                to,
                points,
                slope,
            });
            v = to;
        }
    }

    /// `y^-mu G(y^gamma (c + X), y)`, with the known zero coefficients of
    /// `X^k`, `k < r`, on the bottom row removed.
    fn substitute(&self, gamma: Rational64, mu: Rational64, c: Complex64, r: u32) -> Working {
        let mut out: BTreeMap<(u32, Rational64), Complex64> = BTreeMap::new();
        for (&(i, q), &a) in &self.terms {
            let shift = Rational64::from_integer(i as i64) * gamma + q - mu;
            let mut binom = 1f64;
            for k in 0..=i {
                let coef = a * binom * c.powu(i - k);
                *out.entry((k, shift)).or_insert(Complex64::zero()) += coef;
                binom = binom * (i - k) as f64 / (k + 1) as f64;
            }
        }
        out.retain(|&(k, q), _| !(q.is_zero() && k < r));
        let scale = out.values().map(|c| c.norm()).fold(0.0, f64::max);
        out.retain(|_, c| c.norm() > DROP_TOL * scale);
        Working { terms: out }
    }
}

fn expand(
    w: &Working,
    prefix: Vec<(Rational64, Complex64)>,
    valuation: Rational64,
    max_terms: usize,
    out: &mut Vec<PuiseuxBranch>,
) -> Result<()> {
    let hull = w.hull();
    let least_i = hull.last().map_or(w.axis_degree(), |e| e.to.0);
    // X = 0 is an exact root of multiplicity least_i.
    for _ in 0..least_i {
        out.push(exact_branch(prefix.clone(), valuation));
    }
    let base = prefix.last().map_or(Rational64::zero(), |t| t.0);
    for edge in &hull {
        let gamma = edge.slope;
        let (i0, q0) = edge.to;
        let mu = Rational64::from_integer(i0 as i64) * gamma + q0;
        for (c, r) in edge_roots(edge)? {
            let mut terms = prefix.clone();
            terms.push((base + gamma, c));
            let next = w.substitute(gamma, mu, c, r);
            let val = valuation + mu;
            if r == 1 {
                out.push(match residual_gap(&next) {
                    Some(gap) => PuiseuxBranch {
                        residual_order: val + gap,
                        terms,
                        complete: true,
                    },
                    None => exact_branch(terms, val),
                });
            } else if terms.len() >= max_terms {
                for _ in 0..r {
                    let mut b = exact_branch(terms.clone(), val);
                    if let Some(gap) = residual_gap(&next) {
                        b.residual_order = val + gap;
                    }
                    b.complete = false;
                    out.push(b);
                }
            } else {
                expand(&next, terms, val, max_terms, out)?;
            }
        }
    }
    Ok(())
}

/// Least `q` among the `X`-free terms, `None` when the root is exact.
fn residual_gap(w: &Working) -> Option<Rational64> {
    w.terms
        .keys()
        .filter(|(i, _)| *i == 0)
        .map(|(_, q)| *q)
        .min()
}

/// A terminating expansion: the residual is pure rounding, checked one
/// order of `y^(1/d)` beyond the cancelled valuation.
fn exact_branch(terms: Vec<(Rational64, Complex64)>, valuation: Rational64) -> PuiseuxBranch {
    let mut b = PuiseuxBranch {
        terms,
        complete: true,
        residual_order: valuation,
    };
    b.residual_order += Rational64::new(1, b.denominator());
    b
}

/// Distinct nonzero roots `c` of the edge polynomial `sum c_i C^(i - i_min)`
/// with their multiplicities. The exponents along an edge step by some `g`,
/// so the roots come as `g`-th roots of those of a polynomial in `C^g`.
fn edge_roots(edge: &Edge) -> Result<Vec<(Complex64, u32)>> {
    let i_min = edge.to.0;
    let g = edge
        .points
        .iter()
        .fold(0u32, |acc, p| acc.gcd(&(p.0 - i_min)));
    let deg = ((edge.from.0 - i_min) / g) as usize;
    let mut coeffs = vec![Complex64::zero(); deg + 1];
    for &(i, _, c) in &edge.points {
        coeffs[((i - i_min) / g) as usize] = c;
    }
    let mut out = Vec::new();
    for (w, r) in cluster(&durand_kerner(&coeffs)?) {
        let w = polish(&coeffs, w, r);
        let (rho, theta) = w.to_polar();
        for j in 0..g {
            let angle = (theta + 2.0 * std::f64::consts::PI * j as f64) / g as f64;
            out.push((Complex64::from_polar(rho.powf(1.0 / g as f64), angle), r));
        }
    }
    Ok(out)
}

/// All roots of `sum coeffs[k] z^k` by simultaneous iteration.
pub fn durand_kerner(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len().saturating_sub(1);
    let lead = coeffs[deg];
    if deg == 0 || lead.is_zero() {
        return Err(GermError::structural(
            "root finding needs a positive degree",
        ));
    }
    let a: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return Ok(vec![-a[0]]);
    }
    let eval = |z: Complex64| a.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c);
    let scale = |z: Complex64| a.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.norm());
    let radius = 1.0 + a[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();
    let mut converged = false;
    for _ in 0..ROOT_MAX_ITER {
        converged |= z
            .iter()
            .all(|&r| eval(r).norm() <= ROOT_RESIDUAL * scale(r));
        let mut largest = 0f64;
        for k in 0..deg {
            let denom: Complex64 = (0..deg).filter(|&j| j != k).map(|j| z[k] - z[j]).product();
            if denom.norm() > 0.0 {
                let step = eval(z[k]) / denom;
                z[k] -= step;
                largest = largest.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        // Multiple roots converge linearly; keep going until the steps stall.
        if converged && largest < 1e-15 {
            break;
        }
    }
    if converged {
        return Ok(z);
    }
    Err(GermError::NonConvergence(format!(
        "simultaneous iteration on a degree {deg} polynomial did not reach residual {ROOT_RESIDUAL} in {ROOT_MAX_ITER} steps"
    )))
}

/// Newton steps on the `(r - 1)`-th derivative, where an `r`-fold root is
/// simple.
fn polish(coeffs: &[Complex64], z: Complex64, r: u32) -> Complex64 {
    let mut d = coeffs.to_vec();
    for _ in 1..r {
        d = derivative(&d);
    }
    let d1 = derivative(&d);
    let eval = |c: &[Complex64], z: Complex64| {
        c.iter().rev().fold(Complex64::zero(), |acc, a| acc * z + a)
    };
    let mut z = z;
    for _ in 0..8 {
        let slope = eval(&d1, z);
        if slope.norm() == 0.0 {
            break;
        }
        let step = eval(&d, z) / slope;
        if !step.is_finite() || step.norm() > CLUSTER_TOL * (1.0 + z.norm()) {
            break;
        }
        z -= step;
    }
    z
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * k as f64)
        .collect()
}

/// Groups roots closer than [`CLUSTER_TOL`] (relative), returning cluster
/// means and sizes.
fn cluster(roots: &[Complex64]) -> Vec<(Complex64, u32)> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &r in roots {
        let near = groups.iter_mut().find(|g| {
            g.iter()
                .any(|&s| (s - r).norm() <= CLUSTER_TOL * (1.0 + r.norm().max(s.norm())))
        });
        match near {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            (g.iter().sum::<Complex64>() / n as f64, n as u32)
        })
        .collect()
}
