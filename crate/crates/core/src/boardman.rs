//! Boardman symbols by iterated critical Jacobian extensions.
//!
//! The iteration state is a [`GeneratorSet`] presenting an ideal `I` of germs
//! at 0. In the local ring an ideal is proper iff all its generators vanish at
//! the origin, so the largest proper extension `I + (s x s minors)` is the one
//! with `s = rank J(0) + 1`, and the symbol entry is `n - rank J(0)`. All
//! rank computations are exact over Q.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{GermError, Result};
use crate::germ::MapGerm;
use crate::groebner::{self, Order};
use crate::matrix::{jacobian_of, rational_rank};
use crate::poly::Polynomial;

pub const DEFAULT_MAX_STEPS: usize = 64;
pub const DEFAULT_GEN_CAP: usize = 512;

/// Term operations allowed per basis update.
const GLOBAL_BUDGET: usize = 20_000;
const LOCAL_BUDGET: usize = 400_000;
/// Largest quotient `Q[x] / m^p` searched for a power of the maximal ideal.
const LOCAL_DIM: usize = 200;
/// Largest quotient `Q[x] / m^p` used by the truncated iteration, and its
/// work allowance per precision.
const TRUNCATED_DIM: usize = 1000;
const TRUNCATED_BUDGET: usize = 4_000_000;

/// `dim Q[x_1..x_n] / m^p = C(p - 1 + n, n)`.
fn quotient_dim(n: usize, p: u32) -> usize {
    (1..=n).fold(1usize, |acc, k| acc * (p as usize - 1 + k) / k)
}

/// Truncation degrees tried when looking for a power of the maximal ideal,
/// growing while `dim Q[x] / m^p` stays below [`LOCAL_DIM`].
fn local_probes(n: usize) -> impl Iterator<Item = u32> {
    [4u32, 6, 8, 12, 16, 24, 32]
        .into_iter()
        .take_while(move |&p| quotient_dim(n, p) <= LOCAL_DIM)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Original,
    /// Minor added by the extension performed at this step (1-based).
    Minor {
        step: usize,
    },
}

/// How insertion prunes redundant generators. Every policy preserves the ideal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pruning {
    /// Drop zeros and exact rational multiples of generators already present.
    RationalMultiples,
    /// Additionally treat `c * m * h` (m a monomial, h a generator) as
    /// redundant, and evict existing generators that are monomial multiples
    /// of a newcomer.
    MonomialMultiples,
    /// Monomial multiples, plus elimination: a generator `c * x_k + h` with
    /// `h` free of `x_k` becomes a pivot, and `x_k := -h / c` is substituted
    /// into every other generator.
    Eliminate,
    /// Exact membership: the generators are kept as the reduced Groebner
    /// basis of the ideal, so a minor is redundant iff it lies in the ideal.
    #[default]
    Ideal,
}

/// Finite generating set of an ideal in the local ring at 0.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    nvars: usize,
    gens: Vec<Polynomial>,
    provenance: Vec<Provenance>,
    /// Pivot variable of each generator, if it is one.
    pivots: Vec<Option<usize>>,
    pruning: Pruning,
    /// Basis size limit for [`Pruning::Ideal`]; exceeding it sets `overflow`.
    cap: usize,
    overflow: bool,
    state: BasisState,
    /// Every generator met so far, pruned of rational multiples only; the
    /// input for local probes while no power of `m` is known to lie in `I`.
    raw: Vec<Polynomial>,
}

/// What the generators of a [`Pruning::Ideal`] set are.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasisState {
    /// Nothing computed yet.
    Raw,
    /// The reduced Groebner basis of the ideal in the polynomial ring.
    Global,
    /// `m^c` is proven to lie in the ideal; the generators are the reduced
    /// basis of `I + m^c`.
    Local(u32),
}

impl GeneratorSet {
    pub fn new(nvars: usize) -> Self {
        GeneratorSet::with_pruning(nvars, Pruning::default())
    }

    pub fn with_pruning(nvars: usize, pruning: Pruning) -> Self {
        GeneratorSet {
            nvars,
            gens: Vec::new(),
            provenance: Vec::new(),
            pivots: Vec::new(),
            pruning,
            cap: DEFAULT_GEN_CAP,
            overflow: false,
            state: BasisState::Raw,
            raw: Vec::new(),
        }
    }

    pub fn pruning(&self) -> Pruning {
        self.pruning
    }

    /// Generators from arbitrary polynomials; each must vanish at 0.
    pub fn from_polys(nvars: usize, polys: &[Polynomial]) -> Result<Self> {
        GeneratorSet::from_polys_with(nvars, polys, Pruning::default())
    }

    pub fn from_polys_with(nvars: usize, polys: &[Polynomial], pruning: Pruning) -> Result<Self> {
        let mut g = GeneratorSet::with_pruning(nvars, pruning);
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != nvars {
                return Err(GermError::structural("generator with wrong nvars"));
            }
            if !num_traits::Zero::is_zero(&p.constant_term()) {
                return Err(GermError::NotAGerm { component: i });
            }
            if pruning != Pruning::Ideal {
                g.insert(p.clone(), Provenance::Original);
            }
        }
        if pruning == Pruning::Ideal {
            g.extend_ideal(polys.to_vec(), Provenance::Original);
        }
        Ok(g)
    }

    pub fn from_germ(f: &MapGerm) -> Self {
        GeneratorSet::from_germ_with(f, Pruning::default())
    }

    pub fn from_germ_with(f: &MapGerm, pruning: Pruning) -> Self {
        GeneratorSet::from_polys_with(f.nvars(), f.components(), pruning)
            .expect("germ components vanish at 0")
    }

    /// Inserts one polynomial. Returns whether the set changed.
    pub fn insert(&mut self, p: Polynomial, tag: Provenance) -> bool {
        if self.pruning == Pruning::Ideal {
            return self.insert_into_basis(p, tag);
        }
        let mut queue = std::collections::VecDeque::from([(p, tag)]);
        let mut changed = false;
        while let Some((q, t)) = queue.pop_front() {
            let q = self.reduce(q);
            if q.is_zero() || self.is_redundant(&q) {
                continue;
            }
            changed = true;
            if self.pruning != Pruning::RationalMultiples {
                let mut k = 0;
                while k < self.gens.len() {
                    if monomial_multiple(&self.gens[k], &q) {
                        self.remove(k);
                    } else {
                        k += 1;
                    }
                }
            }
            let pivot = if self.pruning == Pruning::Eliminate {
                pivot_variable(&q)
            } else {
                None
            };
            if let Some(v) = pivot {
                // Everything mentioning the new pivot variable is re-reduced.
                let mut k = 0;
                while k < self.gens.len() {
                    if mentions(&self.gens[k], v) {
                        let (g, gt) = self.remove(k);
                        queue.push_back((g, gt));
                    } else {
                        k += 1;
                    }
                }
            }
            self.gens.push(q);
            self.provenance.push(t);
            self.pivots.push(pivot);
        }
        changed
    }

    fn insert_into_basis(&mut self, p: Polynomial, tag: Provenance) -> bool {
        if self.overflow || p.is_zero() || self.ideal_contains(&p) {
            return false;
        }
        self.extend_ideal(vec![p], tag);
        !self.overflow
    }

    fn ideal_contains(&self, p: &Polynomial) -> bool {
        match self.state {
            BasisState::Raw => {
                let m = p.monic();
                self.gens.iter().any(|g| g.monic() == m)
            }
            BasisState::Global => groebner::is_member(p, &self.gens, Order::Global),
            BasisState::Local(c) => groebner::is_member(p, &self.gens, Order::Local(c)),
        }
    }

    /// Replaces the generators by a presentation of `I + (fresh)`. Tries first
    /// to prove that the ideal contains a power of the maximal ideal, which
    /// allows exact work in a finite dimensional quotient; otherwise attempts
    /// a global basis within a fixed budget, and overflows when that runs
    /// out.
    fn extend_ideal(&mut self, fresh: Vec<Polynomial>, tag: Provenance) {
        let n = self.nvars;
        let cap = self.cap;
        for p in &fresh {
            let m = p.monic();
            if !self.raw.contains(&m) {
                self.raw.push(m);
            }
        }
        let (state, next) = match self.state {
            BasisState::Local(c) => {
                let mut budget = LOCAL_BUDGET;
                let b = fresh.iter().try_fold(self.gens.clone(), |b, p| {
                    groebner::extend_basis(&b, p, Order::Local(c), cap, &mut budget)
                });
                match b {
                    None => (self.state, None),
                    Some(b) => match (1..c).find(|&d| groebner::contains_power(&b, n, d)) {
                        Some(d) => (BasisState::Local(d), Some(groebner::shrink(&b, d))),
                        None => (BasisState::Local(c), Some(b)),
                    },
                }
            }
            BasisState::Global | BasisState::Raw => {
                let local = if self.raw.len() >= n {
                    let mut budget = LOCAL_BUDGET;
                    local_probes(n)
                        .find_map(|p| groebner::local_basis(&self.raw, n, p, cap, &mut budget))
                } else {
                    None
                };
                match local {
                    Some((c, b)) => {
                        self.raw.clear();
                        (BasisState::Local(c), Some(b))
                    }
                    None => {
                        let mut budget = GLOBAL_BUDGET;
                        let (start, todo) = if self.state == BasisState::Global {
                            (self.gens.clone(), &fresh[..])
                        } else {
                            (Vec::new(), &self.raw[..])
                        };
                        let global = todo.iter().try_fold(start, |b, p| {
                            groebner::extend_basis(&b, p, Order::Global, cap, &mut budget)
                        });
                        match global {
                            Some(b) => (BasisState::Global, Some(b)),
                            None => (self.state, None),
                        }
                    }
                }
            }
        };
        let Some(basis) = next else {
            self.overflow = true;
            return;
        };
        let provenance = basis
            .iter()
            .map(|b| {
                self.gens
                    .iter()
                    .position(|g| g == b)
                    .map_or(tag, |k| self.provenance[k])
            })
            .collect();
        self.state = state;
        self.pivots = vec![None; basis.len()];
        self.gens = basis;
        self.provenance = provenance;
    }

    /// The exponent `c` once `m^c` is known to lie in the ideal.
    pub fn local_power(&self) -> Option<u32> {
        match self.state {
            BasisState::Local(c) => Some(c),
            _ => None,
        }
    }

    /// A generating set of the ideal in the local ring: the stored
    /// generators, plus the missing degree-`c` monomials once `m^c` is known
    /// to lie in the ideal.
    pub fn generating_polys(&self) -> Vec<Polynomial> {
        let mut out = self.gens.clone();
        if let BasisState::Local(c) = self.state {
            out.extend(groebner::power_generators(&self.gens, self.nvars, c));
        }
        out
    }

    /// Sets the basis size limit used by [`Pruning::Ideal`].
    pub fn set_cap(&mut self, cap: usize) {
        self.cap = cap;
    }

    fn remove(&mut self, k: usize) -> (Polynomial, Provenance) {
        self.pivots.remove(k);
        (self.gens.remove(k), self.provenance.remove(k))
    }

    fn is_redundant(&self, p: &Polynomial) -> bool {
        match self.pruning {
            Pruning::RationalMultiples => {
                let m = p.monic();
                self.gens
                    .iter()
                    .any(|g| g.num_terms() == p.num_terms() && g.monic() == m)
            }
            _ => self.gens.iter().any(|g| monomial_multiple(p, g)),
        }
    }

    /// Substitutes every pivot variable by its replacement.
    fn reduce(&self, p: Polynomial) -> Polynomial {
        let mut p = p;
        for (g, v) in self.gens.iter().zip(&self.pivots) {
            let Some(v) = *v else { continue };
            if !mentions(&p, v) {
                continue;
            }
            let c = g.coefficient(&unit_exponent(self.nvars, v));
            let lin = Polynomial::var(self.nvars, v).scale(&c);
            let replacement = (&lin - g).scale(&c.recip());
            let subs: Vec<Polynomial> = (0..self.nvars)
                .map(|i| {
                    if i == v {
                        replacement.clone()
                    } else {
                        Polynomial::var(self.nvars, i)
                    }
                })
                .collect();
            p = p.compose(&subs).expect("substitutes share nvars");
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    /// Whether the generated ideal is zero. A set that has proven `m^c` to
    /// lie in its ideal is never empty, even with no generators stored.
    pub fn is_empty(&self) -> bool {
        self.gens.is_empty() && !matches!(self.state, BasisState::Local(_))
    }

    pub fn gens(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    fn rank_at_origin(&self) -> usize {
        if self.state == BasisState::Local(1) {
            return self.nvars;
        }
        if self.gens.is_empty() {
            return 0;
        }
        let j = jacobian_of(&self.gens, self.nvars).expect("generators share nvars");
        rational_rank(&j.at_origin())
    }

    /// `n - rank J(0)`: the index of the critical Jacobian extension, or 0 when
    /// every extension is the whole ring.
    pub fn critical_index(&self) -> usize {
        self.nvars - self.rank_at_origin()
    }

    /// `I + (s x s minors of the Jacobian)`, pruned.
    pub fn jacobian_extension(&self, s: usize) -> Result<GeneratorSet> {
        let step = self
            .provenance
            .iter()
            .filter_map(|p| match p {
                Provenance::Minor { step } => Some(*step),
                Provenance::Original => None,
            })
            .max()
            .unwrap_or(0)
            + 1;
        let mut out = self.clone();
        out.extend_with_minors(s, step, usize::MAX)?;
        Ok(out)
    }

    fn extend_with_minors(&mut self, s: usize, step: usize, cap: usize) -> Result<usize> {
        // Once m^c lies in the ideal the stored basis is taken modulo m^c; the
        // missing degree-c monomials join the Jacobian as extra rows. A minor
        // with two of those rows already lies in m^c.
        let k = self.gens.len();
        let mut rows = self.gens.clone();
        if let BasisState::Local(c) = self.state {
            if c >= 2 {
                rows.extend(groebner::power_generators(&self.gens, self.nvars, c));
            }
        }
        if s == 0 || s > self.nvars {
            return Err(GermError::structural(format!(
                "extension size {s} out of range for {} variables",
                self.nvars
            )));
        }
        // Fewer rows than s: no s x s minors, the extension is I itself.
        if s > rows.len() {
            return Ok(0);
        }
        let j = jacobian_of(&rows, self.nvars)?;
        if self.pruning == Pruning::Ideal {
            let mut fresh: Vec<Polynomial> = Vec::new();
            let mut added = 0;
            let two_power_rows = |rs: &[usize]| rs.iter().filter(|&&r| r >= k).count() > 1;
            for m in j.minors_where(s, |rs| !two_power_rows(rs))? {
                if m.is_zero() || self.ideal_contains(&m) {
                    continue;
                }
                let m = m.monic();
                if matches!(self.state, BasisState::Local(_)) {
                    // one at a time, so dependent minors reduce to zero
                    self.extend_ideal(vec![m], Provenance::Minor { step });
                    added += 1;
                } else if !fresh.contains(&m) {
                    fresh.push(m);
                }
                if self.overflow || self.gens.len() + fresh.len() > cap {
                    return Err(GermError::Resource {
                        step,
                        count: (self.gens.len() + fresh.len()).max(cap + 1),
                        cap,
                    });
                }
            }
            added += fresh.len();
            if !fresh.is_empty() {
                self.extend_ideal(fresh, Provenance::Minor { step });
            }
            if self.overflow || self.gens.len() > cap {
                return Err(GermError::Resource {
                    step,
                    count: self.gens.len().max(cap + 1),
                    cap,
                });
            }
            return Ok(added);
        }
        let mut added = 0;
        for m in j.minors_iter(s)? {
            if self.insert(m, Provenance::Minor { step }) {
                added += 1;
            }
            if self.overflow || self.gens.len() > cap {
                return Err(GermError::Resource {
                    step,
                    count: self.gens.len().max(cap + 1),
                    cap,
                });
            }
        }
        Ok(added)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolStatus {
    /// Hit 0; zeros from then on.
    StabilizedZero,
    /// Literal fixed point: the final value repeats forever.
    SteadyTail,
    /// Stopped at the step limit.
    Truncated,
}

impl SymbolStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SymbolStatus::StabilizedZero => "stabilized_zero",
            SymbolStatus::SteadyTail => "steady_tail",
            SymbolStatus::Truncated => "truncated",
        }
    }
}

/// One run `(value, count)`; `count = None` means the value repeats forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Run {
    pub value: usize,
    pub count: Option<usize>,
}

/// Run-length encoded Boardman symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoardmanSymbol {
    runs: Vec<Run>,
    status: SymbolStatus,
}

impl BoardmanSymbol {
    /// Encodes a computed prefix. For the two stabilized statuses the final
    /// value becomes an unbounded run.
    pub fn from_sequence(seq: &[usize], status: SymbolStatus) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for &v in seq {
            match runs.last_mut() {
                Some(r) if r.value == v => {
                    *r.count.as_mut().expect("finite while building") += 1;
                }
                _ => runs.push(Run {
                    value: v,
                    count: Some(1),
                }),
            }
        }
        if status != SymbolStatus::Truncated {
            if let Some(last) = runs.last_mut() {
                last.count = None;
            }
        }
        BoardmanSymbol { runs, status }
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn status(&self) -> SymbolStatus {
        self.status
    }

    /// First `upto` entries; unbounded runs repeat. A truncated symbol may
    /// yield fewer entries.
    pub fn expand(&self, upto: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(upto);
        for r in &self.runs {
            let k = match r.count {
                Some(c) => c,
                None => usize::MAX,
            };
            for _ in 0..k {
                if out.len() == upto {
                    return out;
                }
                out.push(r.value);
            }
        }
        out
    }

    /// Number of entries actually computed before the tail convention applies.
    pub fn computed_len(&self) -> usize {
        self.runs.iter().map(|r| r.count.unwrap_or(1)).sum()
    }

    /// `(a_1, alpha_1)`: first value and its run length (`None` if unbounded).
    pub fn first_run(&self) -> Option<Run> {
        self.runs.first().copied()
    }

    /// The canonical JSON text, e.g.
    /// `{"runs": [[2,3],[1,1],[0,null]], "status": "stabilized_zero"}`.
    pub fn to_json_string(&self) -> String {
        let runs: Vec<String> = self
            .runs
            .iter()
            .map(|r| match r.count {
                Some(c) => format!("[{},{}]", r.value, c),
                None => format!("[{},null]", r.value),
            })
            .collect();
        format!(
            "{{\"runs\": [{}], \"status\": \"{}\"}}",
            runs.join(","),
            self.status.as_str()
        )
    }
}

impl Serialize for BoardmanSymbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let runs: Vec<(usize, Option<usize>)> =
            self.runs.iter().map(|r| (r.value, r.count)).collect();
        let mut st = serializer.serialize_struct("BoardmanSymbol", 2)?;
        st.serialize_field("runs", &runs)?;
        st.serialize_field("status", &self.status)?;
        st.end()
    }
}

/// Conventional notation: `(2, 2, 2, 1, 0, ...)`.
impl fmt::Display for BoardmanSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for r in &self.runs {
            let k = r.count.unwrap_or(1);
            parts.extend(std::iter::repeat_n(r.value.to_string(), k));
        }
        match self.status {
            SymbolStatus::Truncated => write!(f, "({}) [truncated]", parts.join(", ")),
            _ => write!(f, "({}, ...)", parts.join(", ")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolOptions {
    pub max_steps: usize,
    pub gen_cap: usize,
    pub pruning: Pruning,
}

impl Default for SymbolOptions {
    fn default() -> Self {
        SymbolOptions {
            max_steps: DEFAULT_MAX_STEPS,
            gen_cap: DEFAULT_GEN_CAP,
            pruning: Pruning::default(),
        }
    }
}

/// Boardman symbol of the ideal generated by the components of `f`.
pub fn boardman_symbol(f: &MapGerm, opts: SymbolOptions) -> Result<BoardmanSymbol> {
    symbol_of_polys(f.nvars(), f.components(), opts)
}

/// Boardman symbol of the ideal generated by `polys`, each vanishing at 0.
pub fn symbol_of_polys(
    nvars: usize,
    polys: &[Polynomial],
    opts: SymbolOptions,
) -> Result<BoardmanSymbol> {
    if opts.pruning != Pruning::Ideal
        || opts.max_steps == 0
        || polys.iter().all(Polynomial::is_zero)
    {
        return symbol_of_generators(
            GeneratorSet::from_polys_with(nvars, polys, opts.pruning)?,
            opts,
        );
    }
    for (i, p) in polys.iter().enumerate() {
        if p.nvars() != nvars {
            return Err(GermError::structural("generator with wrong nvars"));
        }
        if !num_traits::Zero::is_zero(&p.constant_term()) {
            return Err(GermError::NotAGerm { component: i });
        }
    }
    match truncated_symbol(polys, nvars, opts) {
        Ok(sym) => Ok(sym),
        Err(prefix) => iterate_or_prefix(
            GeneratorSet::from_polys_with(nvars, polys, opts.pruning)?,
            opts,
            prefix,
        ),
    }
}

/// Boardman symbol of the ideal presented by `g`.
pub fn symbol_of_generators(g: GeneratorSet, opts: SymbolOptions) -> Result<BoardmanSymbol> {
    if opts.max_steps == 0 {
        return Err(GermError::structural("max_steps must be at least 1"));
    }
    if g.pruning() == Pruning::Ideal && !g.is_empty() {
        return match truncated_symbol(&g.generating_polys(), g.nvars(), opts) {
            Ok(sym) => Ok(sym),
            Err(prefix) => iterate_or_prefix(g, opts, prefix),
        };
    }
    iterate(g, opts)
}

/// The full iteration, or the certified `prefix` as a truncated symbol when
/// the iteration outgrows its limits.
fn iterate_or_prefix(
    g: GeneratorSet,
    opts: SymbolOptions,
    prefix: Vec<usize>,
) -> Result<BoardmanSymbol> {
    match iterate(g, opts) {
        Err(GermError::Resource { .. }) if !prefix.is_empty() => Ok(BoardmanSymbol::from_sequence(
            &prefix,
            SymbolStatus::Truncated,
        )),
        r => r,
    }
}

fn iterate(mut g: GeneratorSet, opts: SymbolOptions) -> Result<BoardmanSymbol> {
    if opts.max_steps == 0 {
        return Err(GermError::structural("max_steps must be at least 1"));
    }
    let n = g.nvars();
    g.set_cap(opts.gen_cap);
    if g.overflow {
        return Err(GermError::Resource {
            step: 1,
            count: g.len().max(opts.gen_cap + 1),
            cap: opts.gen_cap,
        });
    }
    if g.is_empty() {
        return Ok(BoardmanSymbol::from_sequence(
            &[n],
            SymbolStatus::SteadyTail,
        ));
    }
    let mut seq: Vec<usize> = Vec::new();
    for step in 1..=opts.max_steps {
        let i = g.critical_index();
        if i == 0 {
            seq.push(0);
            return Ok(BoardmanSymbol::from_sequence(
                &seq,
                SymbolStatus::StabilizedZero,
            ));
        }
        let s = n - i + 1;
        let added = g.extend_with_minors(s, step, opts.gen_cap)?;
        if g.len() > opts.gen_cap {
            return Err(GermError::Resource {
                step,
                count: g.len(),
                cap: opts.gen_cap,
            });
        }
        let repeated = seq.last() == Some(&i);
        seq.push(i);
        if added == 0 && repeated {
            return Ok(BoardmanSymbol::from_sequence(
                &seq,
                SymbolStatus::SteadyTail,
            ));
        }
    }
    Ok(BoardmanSymbol::from_sequence(&seq, SymbolStatus::Truncated))
}

/// The iteration run on `I_k + m^q` instead of `I_k`. Jacobian extension
/// commutes with truncation one degree down,
/// `Delta(I + m^(q+1)) + m^q = Delta(I) + m^q`, since minors through a row of
/// a degree `q + 1` monomial lie in `m^q`. Starting from `I + m^p`, entry `k`
/// is therefore exact as long as the precision left is at least 2. Once
/// `m^d` with `d < q` shows up, Nakayama puts `m^d` inside `I_k` itself and
/// the precision stops dropping.
///
/// `Ok` when the symbol is settled: it reached 0, or `max_steps` exact
/// entries. Otherwise `Err` with the longest exact prefix found.
fn truncated_symbol(
    polys: &[Polynomial],
    n: usize,
    opts: SymbolOptions,
) -> std::result::Result<BoardmanSymbol, Vec<usize>> {
    let mut best = Vec::new();
    let schedule = [8u32, 16, 32, 64]
        .into_iter()
        .map(|p| p.min(opts.max_steps as u32 + 1))
        .take_while(|&p| quotient_dim(n, p) <= TRUNCATED_DIM);
    let mut last = 0;
    for p in schedule {
        if p <= last {
            break;
        }
        last = p;
        let Some((seq, zero)) = truncated_run(polys, n, p, opts) else {
            break;
        };
        if zero {
            return Ok(BoardmanSymbol::from_sequence(
                &seq,
                SymbolStatus::StabilizedZero,
            ));
        }
        if seq.len() >= opts.max_steps {
            return Ok(BoardmanSymbol::from_sequence(&seq, SymbolStatus::Truncated));
        }
        if seq.len() > best.len() {
            best = seq;
        }
    }
    Err(best)
}

/// One truncated run from precision `p`; the exact entries and whether the
/// last one is 0. `None` when the work or size limits are exceeded.
fn truncated_run(
    polys: &[Polynomial],
    n: usize,
    p: u32,
    opts: SymbolOptions,
) -> Option<(Vec<usize>, bool)> {
    let cap = opts.gen_cap;
    let mut budget = TRUNCATED_BUDGET;
    let mut q = p;
    let mut exact = false;
    let mut basis = groebner::basis_of(polys, Order::Local(q), cap, &mut budget)?;
    let mut seq = Vec::new();
    loop {
        if let Some(d) = (1..q).find(|&d| groebner::contains_power(&basis, n, d)) {
            basis = groebner::shrink(&basis, d);
            q = d;
            exact = true;
        }
        let rank = if exact && q == 1 {
            n
        } else if q >= 2 {
            let lin = jacobian_of(&basis, n).ok()?;
            if basis.is_empty() {
                0
            } else {
                rational_rank(&lin.at_origin())
            }
        } else {
            return Some((seq, false));
        };
        let i = n - rank;
        seq.push(i);
        if i == 0 {
            return Some((seq, true));
        }
        if seq.len() >= opts.max_steps {
            return Some((seq, false));
        }
        let s = n - i + 1;
        let next_q = if exact { q } else { q - 1 };
        let mut rows = basis.clone();
        if exact {
            rows.extend(groebner::power_generators(&basis, n, q));
        }
        // a minor has order at least the sum of its rows' orders
        let row_order: Vec<u32> = rows
            .iter()
            .map(|r| r.order().unwrap_or(u32::MAX).saturating_sub(1))
            .collect();
        let mut next = groebner::shrink(&basis, next_q);
        if s <= rows.len() {
            let j = jacobian_of(&rows, n).ok()?;
            let k = basis.len();
            let keep = |rs: &[usize]| {
                rs.iter().filter(|&&r| r >= k).count() <= 1
                    && rs.iter().map(|&r| row_order[r] as u64).sum::<u64>() < next_q as u64
            };
            for m in j.minors_where(s, keep).ok()? {
                next = groebner::extend_basis(&next, &m, Order::Local(next_q), cap, &mut budget)?;
            }
        }
        basis = next;
        q = next_q;
    }
}

fn unit_exponent(nvars: usize, v: usize) -> Vec<u32> {
    let mut e = vec![0; nvars];
    e[v] = 1;
    e
}

fn mentions(p: &Polynomial, v: usize) -> bool {
    p.terms().any(|(m, _)| m.exponents()[v] > 0)
}

/// A variable `x_k` such that `p = c * x_k + h` with `h` free of `x_k`.
fn pivot_variable(p: &Polynomial) -> Option<usize> {
    (0..p.nvars()).find(|&v| {
        let mut hits = p.terms().filter(|(m, _)| m.exponents()[v] > 0);
        matches!(
            (hits.next(), hits.next()),
            (Some((m, _)), None) if m.exponents()[v] == 1 && m.degree() == 1
        )
    })
}

/// Whether `p = c * m * h` for a nonzero rational `c` and a monomial `m`.
fn monomial_multiple(p: &Polynomial, h: &Polynomial) -> bool {
    if p.num_terms() != h.num_terms() || p.is_zero() {
        return false;
    }
    let mut shift: Option<Vec<i64>> = None;
    let mut ratio = None;
    // The term order is compatible with multiplication, so terms pair up in order.
    for ((pm, pc), (hm, hc)) in p.terms().zip(h.terms()) {
        let d: Vec<i64> = pm
            .exponents()
            .iter()
            .zip(hm.exponents())
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        if d.iter().any(|&e| e < 0) {
            return false;
        }
        match &shift {
            None => shift = Some(d),
            Some(s) if *s != d => return false,
            _ => {}
        }
        let r = pc / hc;
        match &ratio {
            None => ratio = Some(r),
            Some(q) if *q != r => return false,
            _ => {}
        }
    }
    true
}

/// Compares the first `upto` expanded entries of two symbols.
pub fn symbol_prefix_equal(a: &BoardmanSymbol, b: &BoardmanSymbol, upto: usize) -> bool {
    a.expand(upto) == b.expand(upto)
}

/// Compares on the entries both symbols actually determine: a truncated
/// symbol says nothing past its computed length. Returns the verdict and the
/// number of entries compared.
pub fn certified_prefix_equal(
    a: &BoardmanSymbol,
    b: &BoardmanSymbol,
    upto: usize,
) -> (bool, usize) {
    let known = |s: &BoardmanSymbol| match s.status() {
        SymbolStatus::Truncated => s.computed_len(),
        _ => usize::MAX,
    };
    let k = upto.min(known(a)).min(known(b));
    (a.expand(k) == b.expand(k), k)
}
