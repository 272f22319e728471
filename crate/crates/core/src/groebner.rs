//! Groebner and standard bases over Q, used for exact ideal membership.
//!
//! Two term orders share the canonical monomial ordering of [`Polynomial`]
//! (total degree, ties broken lexicographically with the last variable
//! largest). [`Order::Global`] leads with the largest term and works in the
//! polynomial ring. [`Order::Local`] leads with the smallest term and works in
//! the truncated ring `Q[x] / m^p`, where it computes standard bases of the
//! local ring at 0 modulo `m^p`.

use num_rational::BigRational;
use num_traits::One;

use crate::poly::{Monomial, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Global,
    /// Lowest degree leads; everything of degree `>= p` is zero.
    Local(u32),
}

impl Order {
    fn lead<'a>(&self, p: &'a Polynomial) -> (&'a Monomial, &'a BigRational) {
        match self {
            Order::Global => p.leading_term(),
            Order::Local(_) => p.first_term(),
        }
        .expect("basis elements are nonzero")
    }

    fn bound(&self) -> u32 {
        match self {
            Order::Global => u32::MAX,
            Order::Local(p) => *p,
        }
    }

    fn pop(&self, p: &mut Polynomial) -> Option<(Monomial, BigRational)> {
        match self {
            Order::Global => p.pop_last_term(),
            Order::Local(_) => p.pop_first_term(),
        }
    }

    fn cut(&self, p: &Polynomial) -> Polynomial {
        match self {
            Order::Global => p.clone(),
            Order::Local(b) if *b == 0 => Polynomial::zero(p.nvars()),
            Order::Local(b) => p.truncate(b - 1),
        }
    }

    fn normalize(&self, p: &Polynomial) -> Polynomial {
        let p = self.cut(p);
        if p.is_zero() {
            return p;
        }
        let lc = self.lead(&p).1.recip();
        p.scale(&lc)
    }
}

/// Size of a rational in machine words, the unit of work for budgets.
fn words(q: &BigRational) -> usize {
    1 + (q.numer().bits() + q.denom().bits()) as usize / 64
}

/// Fully reduced remainder of `p` on division by `basis`.
pub fn normal_form(p: &Polynomial, basis: &[Polynomial], order: Order) -> Polynomial {
    normal_form_within(p, basis, order, &mut { usize::MAX }).expect("unbounded budget")
}

/// [`normal_form`] charging one unit of `budget` per term operation; `None`
/// once it runs out.
pub fn normal_form_within(
    p: &Polynomial,
    basis: &[Polynomial],
    order: Order,
    budget: &mut usize,
) -> Option<Polynomial> {
    let bound = order.bound();
    let mut work = order.cut(p);
    let mut rem = Polynomial::zero(p.nvars());
    while let Some((m, c)) = order.pop(&mut work) {
        match basis.iter().find(|g| order.lead(g).0.divides(&m)) {
            Some(g) => {
                let (lm, lc) = order.lead(g);
                let q = &c / lc;
                let shift = m.div(lm);
                *budget = budget.checked_sub(g.num_terms() * words(&q))?;
                work.push_term(m, c);
                work.sub_shifted_below(&q, &shift, g, bound);
            }
            None => rem.push_term(m, c),
        }
    }
    Some(rem)
}

pub fn is_member(p: &Polynomial, basis: &[Polynomial], order: Order) -> bool {
    normal_form(p, basis, order).is_zero()
}

fn s_polynomial(a: &Polynomial, b: &Polynomial, order: Order) -> Polynomial {
    let (am, ac) = order.lead(a);
    let (bm, bc) = order.lead(b);
    let l = am.lcm(bm);
    let bound = order.bound();
    let mut s = Polynomial::zero(a.nvars());
    s.sub_shifted_below(&-ac.recip(), &l.div(am), a, bound);
    s.sub_shifted_below(&bc.recip(), &l.div(bm), b, bound);
    s
}

fn coprime(a: &Monomial, b: &Monomial) -> bool {
    a.exponents()
        .iter()
        .zip(b.exponents())
        .all(|(x, y)| *x == 0 || *y == 0)
}

/// Minimal basis with every element reduced by the others and leading
/// coefficient 1, sorted by leading monomial.
fn interreduce(mut g: Vec<Polynomial>, order: Order) -> Vec<Polynomial> {
    g.sort_by(|a, b| order.lead(a).0.cmp(order.lead(b).0));
    let mut kept: Vec<Polynomial> = Vec::new();
    for p in g {
        if !kept
            .iter()
            .any(|k| order.lead(k).0.divides(order.lead(&p).0))
        {
            kept.push(p);
        }
    }
    (0..kept.len())
        .map(|i| {
            let others: Vec<Polynomial> = kept
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| p.clone())
                .collect();
            order.normalize(&normal_form(&kept[i], &others, order))
        })
        .collect()
}

/// Reduced basis of `basis + (p)`, where `basis` is already reduced. Gives
/// `None` once more than `cap` elements accumulate or `budget` term
/// operations are spent.
pub fn extend_basis(
    basis: &[Polynomial],
    p: &Polynomial,
    order: Order,
    cap: usize,
    budget: &mut usize,
) -> Option<Vec<Polynomial>> {
    let r = normal_form_within(p, basis, order, budget)?;
    if r.is_zero() {
        return Some(basis.to_vec());
    }
    let mut g: Vec<Polynomial> = basis.to_vec();
    let mut pairs: Vec<(usize, usize)> = (0..g.len()).map(|i| (i, g.len())).collect();
    g.push(order.normalize(&r));
    while !pairs.is_empty() {
        // The pair with the smallest lcm (in the canonical order) first.
        let k = (0..pairs.len())
            .min_by(|&x, &y| {
                let lx = order
                    .lead(&g[pairs[x].0])
                    .0
                    .lcm(order.lead(&g[pairs[x].1]).0);
                let ly = order
                    .lead(&g[pairs[y].0])
                    .0
                    .lcm(order.lead(&g[pairs[y].1]).0);
                lx.cmp(&ly)
            })
            .expect("nonempty");
        let (i, j) = pairs.swap_remove(k);
        let (li, lj) = (order.lead(&g[i]).0, order.lead(&g[j]).0);
        if coprime(li, lj) || li.lcm(lj).degree() >= order.bound() {
            continue;
        }
        *budget = budget.checked_sub(g[i].num_terms() + g[j].num_terms())?;
        let h = normal_form_within(&s_polynomial(&g[i], &g[j], order), &g, order, budget)?;
        if h.is_zero() {
            continue;
        }
        if g.len() >= cap {
            return None;
        }
        let n = g.len();
        pairs.extend((0..n).map(|t| (t, n)));
        g.push(order.normalize(&h));
    }
    Some(interreduce(g, order))
}

/// Reduced basis of the ideal generated by `polys`.
pub fn basis_of(
    polys: &[Polynomial],
    order: Order,
    cap: usize,
    budget: &mut usize,
) -> Option<Vec<Polynomial>> {
    polys
        .iter()
        .try_fold(Vec::new(), |g, p| extend_basis(&g, p, order, cap, budget))
}

/// All monomials of total degree `d` in `n` variables.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(Monomial::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Whether `m^d` lies in the ideal of a local standard basis. With the
/// lowest degree term leading, divisibility of every degree-`d` monomial by a
/// leading monomial suffices: each reduction step only raises degrees.
pub fn contains_power(basis: &[Polynomial], n: usize, d: u32) -> bool {
    let order = Order::Local(u32::MAX);
    monomials_of_degree(n, d)
        .iter()
        .all(|u| basis.iter().any(|g| order.lead(g).0.divides(u)))
}

/// The degree-`d` monomials outside the leading ideal of a local basis.
/// Together with the basis they generate `(basis) + m^d` in the local ring.
pub fn power_generators(basis: &[Polynomial], n: usize, d: u32) -> Vec<Polynomial> {
    let order = Order::Local(u32::MAX);
    monomials_of_degree(n, d)
        .into_iter()
        .filter(|u| !basis.iter().any(|g| order.lead(g).0.divides(u)))
        .map(|u| {
            let mut m = Polynomial::zero(n);
            m.push_term(u, BigRational::one());
            m
        })
        .collect()
}

/// Looks for the least `c < p` with `m^c` inside `(polys) + m^p`. By
/// Nakayama's lemma `m^c` then lies in the ideal of the local ring at 0, and
/// the returned standard basis of `(polys) + m^c` presents the ideal exactly.
pub fn local_basis(
    polys: &[Polynomial],
    n: usize,
    p: u32,
    cap: usize,
    budget: &mut usize,
) -> Option<(u32, Vec<Polynomial>)> {
    let wide = basis_of(polys, Order::Local(p), cap, budget)?;
    let c = (1..p).find(|&d| contains_power(&wide, n, d))?;
    Some((c, shrink(&wide, c)))
}

/// A local basis modulo `m^c` from one modulo a higher power.
pub fn shrink(basis: &[Polynomial], c: u32) -> Vec<Polynomial> {
    let order = Order::Local(c);
    let cut: Vec<Polynomial> = basis
        .iter()
        .map(|g| order.cut(g))
        .filter(|g| !g.is_zero())
        .collect();
    interreduce(cut, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_polynomial;

    const G: Order = Order::Global;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s, &["x".to_string(), "y".to_string()]).unwrap()
    }

    fn global(polys: &[Polynomial]) -> Vec<Polynomial> {
        basis_of(polys, G, 100, &mut 1_000_000).unwrap()
    }

    #[test]
    fn principal_ideal_membership() {
        let g = global(&[p("x^2 + y^3")]);
        assert_eq!(g, vec![p("x^2 + y^3").monic()]);
        assert!(is_member(&p("x^3*y + x*y^4"), &g, G));
        assert!(!is_member(&p("x^2"), &g, G));
    }

    #[test]
    fn jacobian_ideal_of_cusp() {
        // (x^4 + y^5, 4x^3, 5y^4) = (x^3, y^4)
        let g = global(&[p("x^4 + y^5"), p("4*x^3"), p("5*y^4")]);
        assert_eq!(g.len(), 2);
        assert!(is_member(&p("x^3"), &g, G) && is_member(&p("y^4"), &g, G));
        assert!(!is_member(&p("x^2*y^3"), &g, G));
    }

    #[test]
    fn s_pair_produces_new_element() {
        // y^3 = (y - x)*(x*y + y^2) + y*x^2 comes from an S-pair.
        let g = global(&[p("x^2"), p("x*y + y^2")]);
        assert!(is_member(&p("y^3"), &g, G));
        assert!(!is_member(&p("y^2"), &g, G));
    }

    #[test]
    fn reduced_basis_is_canonical() {
        let a = global(&[p("x^2"), p("x*y + y^2")]);
        let b = global(&[p("x*y + y^2"), p("x^2 + x*y + y^2"), p("y^3")]);
        assert_eq!(a, b);
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(2, 0), vec![Monomial::one(2)]);
    }

    #[test]
    fn local_power_detection() {
        // y^4 + x*y^5 = y^4 * (1 + x*y) is a unit multiple of y^4 locally,
        // and (x^3, y^4) contains m^6 but not m^5 (x^2*y^3 is missing).
        let (c, b) =
            local_basis(&[p("x^3"), p("y^4 + x*y^5")], 2, 10, 100, &mut 1_000_000).unwrap();
        assert_eq!(c, 6);
        let o = Order::Local(c);
        assert!(is_member(&p("y^4"), &b, o));
        assert!(!is_member(&p("x^2*y^3"), &b, o));
        // Units do not matter: (x + x^2*y, y - y^3) is the maximal ideal.
        let (c, _) =
            local_basis(&[p("x + x^2*y"), p("y - y^3")], 2, 6, 100, &mut 1_000_000).unwrap();
        assert_eq!(c, 1);
        // x^2 = 0 is the y-axis: never m-primary.
        assert!(local_basis(&[p("x^2")], 2, 8, 100, &mut 1_000_000).is_none());
    }

    #[test]
    fn local_and_global_views_differ_away_from_origin() {
        // x - x^2 = x * (1 - x) is a unit multiple of x near 0 only.
        let f = [p("x - x^2"), p("y^2")];
        let g = global(&f);
        assert!(!is_member(&p("x"), &g, G));
        let (c, b) = local_basis(&f, 2, 8, 100, &mut 1_000_000).unwrap();
        assert_eq!(c, 2);
        assert!(is_member(&p("x"), &b, Order::Local(c)));
    }

    #[test]
    fn cusp_jacobian_power() {
        // (x^3, y^8) contains m^10 but not m^9.
        let gens = [p("x^4 + y^9"), p("4*x^3"), p("9*y^8")];
        assert!(local_basis(&gens, 2, 10, 500, &mut 1_000_000).is_none());
        let (c, _) = local_basis(&gens, 2, 12, 500, &mut 1_000_000).unwrap();
        assert_eq!(c, 10);
    }
}
