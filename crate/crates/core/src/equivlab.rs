//! Seeded random germs, random smooth contact moves `g = (f o phi) * U`, and
//! campaigns checking that order, rank and the Boardman symbol survive them.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)` and one stream per item, so every germ and move is a
//! pure function of `(seed, index)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boardman::{
    boardman_symbol, certified_prefix_equal, symbol_of_polys, BoardmanSymbol, SymbolOptions,
};
use crate::error::{GermError, Result};
use crate::germ::MapGerm;
use crate::matrix::{rational_rank, PolyMatrix};
use crate::poly::{default_var_names, Polynomial};

const MOVE_DOMAIN: u64 = 0x6d6f_7665_5f72_6e67;
const REDUNDANT_DOMAIN: u64 = 0x7265_6475_6e64_616e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    /// Upper bound on the number of variables (1..=3).
    pub nvars: usize,
    /// Upper bound on the number of components (1..=2).
    pub ncomps: usize,
    pub degmax: u32,
    pub coeff_bound: i64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 42,
            count: 200,
            nvars: 3,
            ncomps: 2,
            degmax: 5,
            coeff_bound: 5,
        }
    }
}

impl CorpusConfig {
    pub fn with_seed_count(seed: u64, count: usize) -> Self {
        CorpusConfig {
            seed,
            count,
            ..CorpusConfig::default()
        }
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn int(c: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(c))
}

fn nonzero_coeff(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    let c = rng.gen_range(1..=bound.max(1));
    if rng.gen_bool(0.5) {
        -c
    } else {
        c
    }
}

/// Uniform exponent vector of total degree `d` in `n` variables.
fn random_monomial(rng: &mut ChaCha8Rng, n: usize, d: u32) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for _ in 0..d {
        e[rng.gen_range(0..n)] += 1;
    }
    e
}

/// Sparse random polynomial with terms of degree in `lo..=hi`.
fn random_poly(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: u32,
    hi: u32,
    max_terms: usize,
    bound: i64,
) -> Polynomial {
    let k = rng.gen_range(1..=max_terms);
    let terms: Vec<(Vec<u32>, BigRational)> = (0..k)
        .map(|_| {
            let d = rng.gen_range(lo..=hi);
            (random_monomial(rng, n, d), int(nonzero_coeff(rng, bound)))
        })
        .collect();
    Polynomial::from_terms(n, terms).expect("exponents sized to n")
}

/// Germ number `index` of the corpus.
pub fn random_germ(cfg: &CorpusConfig, index: usize) -> MapGerm {
    let mut rng = rng_for(cfg.seed, index as u64);
    let n = rng.gen_range(1..=cfg.nvars.max(1));
    let p = rng.gen_range(1..=cfg.ncomps.max(1));
    let degmax = cfg.degmax.max(1);
    let lo = rng.gen_range(1..=degmax.min(3));
    let mut comps: Vec<Polynomial> = (0..p)
        .map(|_| random_poly(&mut rng, n, lo, degmax, 4, cfg.coeff_bound))
        .collect();
    if comps.iter().all(Polynomial::is_zero) {
        let e = random_monomial(&mut rng, n, lo);
        comps[0] = Polynomial::from_terms(n, vec![(e, int(1))]).expect("sized");
    }
    MapGerm::new(n, comps).expect("no constant terms by construction")
}

/// Smooth contact data: a polynomial diffeomorphism `phi` of the source and a
/// `p x p` matrix `U` of polynomials with `U(0)` invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactMove {
    phi: MapGerm,
    u: PolyMatrix,
}

impl ContactMove {
    pub fn new(phi: MapGerm, u: PolyMatrix) -> Result<Self> {
        let n = phi.nvars();
        if phi.ncomps() != n {
            return Err(GermError::structural("phi must map K^n to K^n"));
        }
        if u.rows() != u.cols() || (u.nvars() != n && !u.entries().is_empty()) {
            return Err(GermError::structural(
                "U must be square, in the source variables",
            ));
        }
        if phi.rank() != n {
            return Err(GermError::structural("linear part of phi is singular"));
        }
        if rational_rank(&u.at_origin()) != u.rows() {
            return Err(GermError::structural("U(0) is singular"));
        }
        Ok(ContactMove { phi, u })
    }

    pub fn identity(n: usize, p: usize) -> Self {
        ContactMove {
            phi: MapGerm::identity(n),
            u: PolyMatrix::identity(p, n),
        }
    }

    pub fn phi(&self) -> &MapGerm {
        &self.phi
    }

    pub fn u(&self) -> &PolyMatrix {
        &self.u
    }

    /// The move equivalent to applying `self` and then `next`:
    /// `(phi1 o phi2, (U1 o phi2) * U2)`.
    pub fn then(&self, next: &ContactMove) -> Result<ContactMove> {
        let phi = self.phi.compose(&next.phi)?;
        let u = self.u.compose(next.phi.components())?.mul(&next.u)?;
        ContactMove::new(phi, u)
    }
}

fn random_invertible(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<i64>> {
    loop {
        let m: Vec<Vec<i64>> = (0..size)
            .map(|_| (0..size).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        let q: Vec<Vec<BigRational>> = m
            .iter()
            .map(|r| r.iter().map(|&c| int(c)).collect())
            .collect();
        if rational_rank(&q) == size {
            return m;
        }
    }
}

/// Move number `index` for germs `K^n -> K^p`. Index 0 is the identity move.
pub fn random_move(cfg: &CorpusConfig, index: usize, n: usize, p: usize) -> ContactMove {
    if index == 0 {
        return ContactMove::identity(n, p);
    }
    let mut rng = rng_for(cfg.seed ^ MOVE_DOMAIN, index as u64);
    let l = random_invertible(&mut rng, n);
    let phi: Vec<Polynomial> = (0..n)
        .map(|i| {
            let mut c = Polynomial::zero(n);
            for (j, &a) in l[i].iter().enumerate() {
                c = &c + &Polynomial::var(n, j).scale(&int(a));
            }
            if rng.gen_bool(0.5) {
                c = &c + &random_poly(&mut rng, n, 2, 2, 2, 2);
            }
            c
        })
        .collect();
    let u0 = random_invertible(&mut rng, p);
    let entries: Vec<Polynomial> = u0
        .iter()
        .flatten()
        .map(|&a| {
            let mut e = Polynomial::from_int(n, a);
            if rng.gen_bool(0.3) {
                e = &e + &random_poly(&mut rng, n, 1, 2, 1, 2);
            }
            e
        })
        .collect();
    let phi = MapGerm::new(n, phi).expect("no constant terms");
    let u = PolyMatrix::new(p, p, entries).expect("square");
    ContactMove::new(phi, u).expect("invertible by rejection sampling")
}

/// `g_j = sum_i (f_i o phi) * U_ij`, i.e. the row vector `(f o phi) * U`.
pub fn apply_contact_move(f: &MapGerm, m: &ContactMove) -> Result<MapGerm> {
    if m.phi.ncomps() != f.nvars() || m.u.rows() != f.ncomps() {
        return Err(GermError::structural(format!(
            "move for {}x{} data applied to a germ K^{} -> K^{}",
            m.phi.ncomps(),
            m.u.rows(),
            f.nvars(),
            f.ncomps()
        )));
    }
    let moved = f.compose(&m.phi)?;
    let row = PolyMatrix::new(1, f.ncomps(), moved.into_components())?;
    let g = row.mul(&m.u)?;
    MapGerm::new(f.nvars(), g.entries().to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Invariants {
    /// `None` for the zero map.
    pub order: Option<u32>,
    pub rank: usize,
    pub symbol: Option<BoardmanSymbol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn invariants(f: &MapGerm, opts: SymbolOptions) -> Invariants {
    let (symbol, error) = match boardman_symbol(f, opts) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Invariants {
        order: f.order().ok(),
        rank: f.rank(),
        symbol,
        error,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRecord {
    pub germ_index: usize,
    pub germ: Vec<String>,
    pub move_id: usize,
    pub before: Invariants,
    pub after: Invariants,
    pub violation: bool,
    /// Symbol entries compared; below `max_steps` when a side is truncated.
    pub compared: usize,
    /// A per-case error (resource blowup); the case is not counted as a violation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct InvarianceSummary {
    pub germs: usize,
    pub cases: usize,
    pub violations: usize,
    pub errors: usize,
    pub order_violations: usize,
    pub rank_violations: usize,
    pub symbol_violations: usize,
    /// Cases whose symbols were compared on fewer than `max_steps` entries.
    pub shortened: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub corpus: CorpusConfig,
    pub moves_per_germ: usize,
    pub max_steps: usize,
    pub cases: Vec<CaseRecord>,
    pub summary: InvarianceSummary,
}

/// Runs `moves_per_germ` random moves on every corpus germ.
pub fn invariance_report(
    cfg: &CorpusConfig,
    moves_per_germ: usize,
    opts: SymbolOptions,
) -> InvarianceReport {
    let germs: Vec<(usize, MapGerm)> = (0..cfg.count).map(|i| (i, random_germ(cfg, i))).collect();
    invariance_report_for(cfg, &germs, moves_per_germ, opts)
}

/// Campaign over an explicit germ list; move ids follow the germ index.
pub fn invariance_report_for(
    cfg: &CorpusConfig,
    germs: &[(usize, MapGerm)],
    moves_per_germ: usize,
    opts: SymbolOptions,
) -> InvarianceReport {
    let per_germ: Vec<Vec<CaseRecord>> = germs
        .par_iter()
        .map(|(gi, f)| {
            let before = invariants(f, opts);
            let names = default_var_names(f.nvars());
            (0..moves_per_germ)
                .map(|j| {
                    let move_id = gi * moves_per_germ + j + 1;
                    let m = random_move(cfg, move_id, f.nvars(), f.ncomps());
                    compare_case(*gi, f, &names, move_id, &m, &before, opts)
                })
                .collect()
        })
        .collect();
    let cases: Vec<CaseRecord> = per_germ.into_iter().flatten().collect();
    let mut summary = InvarianceSummary {
        germs: germs.len(),
        cases: cases.len(),
        ..Default::default()
    };
    for c in &cases {
        if c.error.is_some() {
            summary.errors += 1;
        }
        if c.violation {
            summary.violations += 1;
            summary.order_violations += usize::from(c.before.order != c.after.order);
            summary.rank_violations += usize::from(c.before.rank != c.after.rank);
            summary.symbol_violations += usize::from(!symbols_agree(&c.before, &c.after, opts).0);
        }
        if c.error.is_none() && c.compared < opts.max_steps {
            summary.shortened += 1;
        }
    }
    InvarianceReport {
        corpus: *cfg,
        moves_per_germ,
        max_steps: opts.max_steps,
        cases,
        summary,
    }
}

fn symbols_agree(a: &Invariants, b: &Invariants, opts: SymbolOptions) -> (bool, usize) {
    match (&a.symbol, &b.symbol) {
        (Some(x), Some(y)) => certified_prefix_equal(x, y, opts.max_steps),
        _ => (true, 0),
    }
}

fn compare_case(
    gi: usize,
    f: &MapGerm,
    names: &[String],
    move_id: usize,
    m: &ContactMove,
    before: &Invariants,
    opts: SymbolOptions,
) -> CaseRecord {
    let germ = f.to_strings(names);
    let g = match apply_contact_move(f, m) {
        Ok(g) => g,
        Err(e) => {
            return CaseRecord {
                germ_index: gi,
                germ,
                move_id,
                before: before.clone(),
                after: before.clone(),
                violation: false,
                compared: 0,
                error: Some(e.to_string()),
            }
        }
    };
    let after = invariants(&g, opts);
    let error = before.error.clone().or_else(|| after.error.clone());
    let (agree, compared) = symbols_agree(before, &after, opts);
    let violation = before.order != after.order || before.rank != after.rank || !agree;
    CaseRecord {
        germ_index: gi,
        germ,
        move_id,
        before: before.clone(),
        after,
        violation,
        compared,
        error,
    }
}

/// Random ideal elements `sum_i h_i f_i` with nonconstant `h_i` of degree <= 2.
pub fn redundant_combinations(
    cfg: &CorpusConfig,
    index: usize,
    f: &MapGerm,
    count: usize,
) -> Vec<Polynomial> {
    let mut rng = rng_for(cfg.seed ^ REDUNDANT_DOMAIN, index as u64);
    let n = f.nvars();
    (0..count)
        .map(|_| {
            let mut acc = Polynomial::zero(n);
            for c in f.components() {
                let h = &random_poly(&mut rng, n, 0, 2, 3, 3);
                acc = &acc + &(h * c);
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RedundancyRecord {
    pub germ_index: usize,
    pub base: Option<BoardmanSymbol>,
    pub extended: Option<BoardmanSymbol>,
    pub violation: bool,
    pub compared: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Appends `extra` redundant generators to each corpus germ and compares symbols.
pub fn redundancy_report(
    cfg: &CorpusConfig,
    extra: usize,
    opts: SymbolOptions,
) -> Vec<RedundancyRecord> {
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let f = random_germ(cfg, i);
            let mut polys = f.components().to_vec();
            polys.extend(redundant_combinations(cfg, i, &f, extra));
            let base = boardman_symbol(&f, opts);
            let ext = symbol_of_polys(f.nvars(), &polys, opts);
            match (base, ext) {
                (Ok(a), Ok(b)) => {
                    let (agree, compared) = certified_prefix_equal(&a, &b, opts.max_steps);
                    RedundancyRecord {
                        germ_index: i,
                        violation: !agree,
                        compared,
                        base: Some(a),
                        extended: Some(b),
                        error: None,
                    }
                }
                (a, b) => RedundancyRecord {
                    germ_index: i,
                    error: a.as_ref().err().or(b.as_ref().err()).map(|e| e.to_string()),
                    base: a.ok(),
                    extended: b.ok(),
                    violation: false,
                    compared: 0,
                },
            }
        })
        .collect()
}

/// Per-germ record of the first-run properties `a_1 = n - rank` and
/// `alpha_1 = ord - 1`.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusRecord {
    pub index: usize,
    pub nvars: usize,
    pub germ: Vec<String>,
    pub order: Option<u32>,
    pub rank: usize,
    pub symbol: Option<BoardmanSymbol>,
    /// `symbol[0] == n - rank`.
    pub first_value_ok: Option<bool>,
    /// `alpha_1 == ord - 1`; asserted only for rank-0 germs.
    pub first_length_matches_order: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn corpus_records(cfg: &CorpusConfig, opts: SymbolOptions) -> Vec<CorpusRecord> {
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let f = random_germ(cfg, i);
            let inv = invariants(&f, opts);
            let n = f.nvars();
            let first_value_ok = inv
                .symbol
                .as_ref()
                .map(|s| s.expand(1).first() == Some(&(n - inv.rank)));
            let first_length_matches_order = match (&inv.symbol, inv.order) {
                (Some(s), Some(ord)) => s.first_run().map(|r| r.count == Some(ord as usize - 1)),
                _ => None,
            };
            CorpusRecord {
                index: i,
                nvars: n,
                germ: f.display_strings(),
                order: inv.order,
                rank: inv.rank,
                symbol: inv.symbol,
                first_value_ok,
                first_length_matches_order,
                error: inv.error,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_polynomial;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn germs_are_deterministic_and_valid() {
        let cfg = CorpusConfig::default();
        for i in 0..50 {
            let a = random_germ(&cfg, i);
            assert_eq!(a, random_germ(&cfg, i));
            assert!(!a.is_zero());
            assert!(a.degree() <= cfg.degmax);
            assert!(a.nvars() <= 3 && a.ncomps() <= 2);
        }
        assert_ne!(random_germ(&cfg, 0), random_germ(&cfg, 1));
    }

    #[test]
    fn moves_are_deterministic_and_invertible() {
        let cfg = CorpusConfig::default();
        for i in 1..40 {
            let m = random_move(&cfg, i, 3, 2);
            assert_eq!(m, random_move(&cfg, i, 3, 2));
            assert_eq!(m.phi().rank(), 3);
            assert_eq!(rational_rank(&m.u().at_origin()), 2);
        }
    }

    #[test]
    fn identity_move_is_identity() {
        let cfg = CorpusConfig::default();
        let f = random_germ(&cfg, 3);
        let m = random_move(&cfg, 0, f.nvars(), f.ncomps());
        assert_eq!(apply_contact_move(&f, &m).unwrap(), f);
    }

    #[test]
    fn swap_move_preserves_symbol() {
        let f = MapGerm::new(2, vec![parse_polynomial("x^4 + y^5", &xy()).unwrap()]).unwrap();
        let phi = MapGerm::new(2, vec![Polynomial::var(2, 1), Polynomial::var(2, 0)]).unwrap();
        let m = ContactMove::new(phi, PolyMatrix::identity(1, 2)).unwrap();
        let g = apply_contact_move(&f, &m).unwrap();
        assert_eq!(g.display_strings(), vec!["y^4 + x^5".to_string()]);
        let opts = SymbolOptions::default();
        assert_eq!(
            boardman_symbol(&f, opts).unwrap(),
            boardman_symbol(&g, opts).unwrap()
        );
    }

    #[test]
    fn antidiagonal_u_swaps_components() {
        let f = MapGerm::new(
            2,
            vec![
                parse_polynomial("x^2 + y^3", &xy()).unwrap(),
                parse_polynomial("x^2*y", &xy()).unwrap(),
            ],
        )
        .unwrap();
        let (z, o) = (Polynomial::zero(2), Polynomial::one(2));
        let u = PolyMatrix::new(2, 2, vec![z.clone(), o.clone(), o, z]).unwrap();
        let g =
            apply_contact_move(&f, &ContactMove::new(MapGerm::identity(2), u).unwrap()).unwrap();
        assert_eq!(g.components()[0], f.components()[1]);
        assert_eq!(g.components()[1], f.components()[0]);
        assert_eq!(g.rank(), 0);
    }

    #[test]
    fn scalar_unit_keeps_invariants() {
        let cfg = CorpusConfig::default();
        let opts = SymbolOptions::default();
        for i in 0..10 {
            let f = random_germ(&cfg, i);
            let p = f.ncomps();
            let entries = (0..p * p)
                .map(|k| {
                    if k / p == k % p {
                        Polynomial::from_int(f.nvars(), 2)
                    } else {
                        Polynomial::zero(f.nvars())
                    }
                })
                .collect();
            let m = ContactMove::new(
                MapGerm::identity(f.nvars()),
                PolyMatrix::new(p, p, entries).unwrap(),
            )
            .unwrap();
            let g = apply_contact_move(&f, &m).unwrap();
            assert_eq!(invariants(&f, opts), invariants(&g, opts));
        }
    }

    #[test]
    fn singular_moves_are_rejected() {
        let phi = MapGerm::new(2, vec![Polynomial::var(2, 0), Polynomial::var(2, 0)]).unwrap();
        assert!(ContactMove::new(phi, PolyMatrix::identity(1, 2)).is_err());
        let u = PolyMatrix::new(1, 1, vec![Polynomial::var(2, 0)]).unwrap();
        assert!(ContactMove::new(MapGerm::identity(2), u).is_err());
    }

    #[test]
    fn arity_mismatch_is_structural() {
        let f = MapGerm::identity(2);
        let m = ContactMove::identity(3, 2);
        assert!(apply_contact_move(&f, &m).is_err());
    }

    #[test]
    fn empty_corpus_gives_empty_report() {
        let cfg = CorpusConfig {
            count: 0,
            ..CorpusConfig::default()
        };
        let r = invariance_report(&cfg, 5, SymbolOptions::default());
        assert!(r.cases.is_empty());
        assert_eq!(r.summary.violations, 0);
    }
}
