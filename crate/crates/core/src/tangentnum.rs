//! Numeric probes of rescalings `phi_m(x) = m * phi(x / m)`: convergence of
//! the rescaled maps, the limits of rescaled compositions behind the
//! comparison of first homogeneous parts, and norm comparability of
//! equivalent germs. Everything here is double precision.

use rand::Rng;
use serde::Serialize;

use crate::equivlab::rng_for;
use crate::error::{GermError, Result};
use crate::germ::MapGerm;
use crate::lipschitz::LipschitzMap;
use crate::poly::Polynomial;

/// Default scales `2^0, ..., 2^M_EXP`.
pub const DEFAULT_M_EXP: u32 = 20;
pub const DEFAULT_GRID_STEP: f64 = 0.1;
/// Shrink factor each of the last deviations must show.
pub const CONVERGENCE_FACTOR: f64 = 1.5;
/// How many trailing deviations the convergence rule inspects.
pub const CONVERGENCE_WINDOW: usize = 3;

/// Sample points in `[-1, 1]^n`, never the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    nvars: usize,
    points: Vec<Vec<f64>>,
}

impl SampleGrid {
    /// The lattice `{-1, -1 + h, ..., 1}^n` minus the origin. `2 / h` must be
    /// a whole number.
    pub fn lattice(nvars: usize, h: f64) -> Result<Self> {
        if nvars == 0 {
            return Err(GermError::structural("a grid needs at least one variable"));
        }
        let k = 2.0 / h;
        if !(h > 0.0 && h <= 2.0) || (k - k.round()).abs() > 1e-9 {
            return Err(GermError::structural(format!(
                "grid step {h} does not divide [-1, 1]"
            )));
        }
        let k = k.round() as usize;
        let axis: Vec<f64> = (0..=k).map(|j| -1.0 + 2.0 * j as f64 / k as f64).collect();
        let mut points = Vec::new();
        let mut idx = vec![0usize; nvars];
        loop {
            let p: Vec<f64> = idx.iter().map(|&j| axis[j]).collect();
            if p.iter().any(|&c| c.abs() > 1e-12) {
                points.push(p);
            }
            let mut d = 0;
            while d < nvars {
                idx[d] += 1;
                if idx[d] <= k {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == nvars {
                break;
            }
        }
        if points.is_empty() {
            return Err(GermError::structural(
                "grid has no points besides the origin",
            ));
        }
        Ok(SampleGrid { nvars, points })
    }

    /// `count` seeded uniform samples.
    pub fn uniform(nvars: usize, count: usize, seed: u64) -> Result<Self> {
        if nvars == 0 || count == 0 {
            return Err(GermError::structural(
                "uniform grid needs nvars > 0 and count > 0",
            ));
        }
        let mut rng = rng_for(seed, 0);
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let p: Vec<f64> = (0..nvars).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            if p.iter().any(|&c| c != 0.0) {
                points.push(p);
            }
        }
        Ok(SampleGrid { nvars, points })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check(&self, nvars: usize) -> Result<()> {
        if self.nvars != nvars {
            return Err(GermError::structural(format!(
                "grid in {} variables for a map in {nvars}",
                self.nvars
            )));
        }
        Ok(())
    }
}

/// `2^0, 2^1, ..., 2^max_exp`.
pub fn default_scales(max_exp: u32) -> Vec<f64> {
    (0..=max_exp).map(|e| 2f64.powi(e as i32)).collect()
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() || scales[0] <= 0.0 || scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GermError::structural(
            "scales must be positive and strictly increasing",
        ));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn scaled(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|c| c * s).collect()
}

pub fn eval_lipschitz(e: &LipschitzMap, x: &[f64]) -> Result<Vec<f64>> {
    e.eval(x)
}

/// `m * e(x / m)`.
pub fn rescale(e: &LipschitzMap, m: f64, x: &[f64]) -> Result<Vec<f64>> {
    if m.is_nan() || m <= 0.0 {
        return Err(GermError::structural(format!("scale {m} is not positive")));
    }
    Ok(scaled(&e.eval(&scaled(x, 1.0 / m))?, m))
}

/// Largest `|e(x) - e(y)| / |x - y|` over pairs of grid points.
pub fn empirical_lipschitz(e: &LipschitzMap, grid: &SampleGrid) -> Result<f64> {
    grid.check(e.nvars())?;
    let vals = grid
        .points()
        .iter()
        .map(|x| e.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let pts = grid.points();
    let mut best = 0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(dist(&vals[i], &vals[j]) / dist(&pts[i], &pts[j]));
        }
    }
    Ok(best)
}

/// A map `R^n -> R^n` with the scales and grid on which to rescale it.
#[derive(Debug, Clone)]
pub struct RescaleProbe {
    map: LipschitzMap,
    scales: Vec<f64>,
    grid: SampleGrid,
}

impl RescaleProbe {
    pub fn new(map: LipschitzMap, scales: Vec<f64>, grid: SampleGrid) -> Result<Self> {
        if map.ncomps() != map.nvars() {
            return Err(GermError::structural("rescaling needs a map R^n -> R^n"));
        }
        grid.check(map.nvars())?;
        check_scales(&scales)?;
        Ok(RescaleProbe { map, scales, grid })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationRow {
    pub m: f64,
    pub next_m: f64,
    /// Sup over the grid of `|phi_m(x) - phi_next_m(x)|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<DeviationRow>,
    /// `phi_m` at the largest scale, one value per grid point.
    pub limit_estimate: Vec<Vec<f64>>,
    pub converged: bool,
}

/// Whether the last [`CONVERGENCE_WINDOW`] values each shrink by at least
/// [`CONVERGENCE_FACTOR`] from their predecessor. Zeros count as shrinking.
pub fn empirically_converged(deviations: &[f64]) -> bool {
    if deviations.len() < CONVERGENCE_WINDOW + 1 {
        return false;
    }
    deviations[deviations.len() - CONVERGENCE_WINDOW - 1..]
        .windows(2)
        .all(|w| w[1] * CONVERGENCE_FACTOR <= w[0])
}

pub fn convergence_probe(p: &RescaleProbe) -> Result<ConvergenceReport> {
    let values = p
        .scales
        .iter()
        .map(|&m| {
            p.grid
                .points()
                .iter()
                .map(|x| rescale(&p.map, m, x))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<DeviationRow> = (1..p.scales.len())
        .map(|k| DeviationRow {
            m: p.scales[k - 1],
            next_m: p.scales[k],
            deviation: values[k - 1]
                .iter()
                .zip(&values[k])
                .map(|(a, b)| dist(a, b))
                .fold(0.0, f64::max),
        })
        .collect();
    let devs: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    Ok(ConvergenceReport {
        converged: empirically_converged(&devs),
        rows,
        limit_estimate: values.last().cloned().unwrap_or_default(),
    })
}

/// Whether `phi` has the shape `(x_1, x_2 + q_2(x_1), ..., x_n + q_n(x_1..x_{n-1}))`
/// with every `q_i(0) = 0`.
pub fn is_unipotent(phi: &MapGerm) -> bool {
    let n = phi.nvars();
    phi.ncomps() == n
        && phi.components().iter().enumerate().all(|(i, c)| {
            let q = c - &Polynomial::var(n, i);
            let ok = q
                .terms()
                .all(|(m, _)| !m.is_one() && m.exponents()[i..].iter().all(|&e| e == 0));
            ok
        })
}

/// Inverse of a unipotent triangular map by back-substitution, checked exactly.
pub fn unipotent_inverse(phi: &MapGerm) -> Result<MapGerm> {
    if !is_unipotent(phi) {
        return Err(GermError::structural("map is not unipotent triangular"));
    }
    let n = phi.nvars();
    let mut inv: Vec<Polynomial> = Vec::with_capacity(n);
    for (i, c) in phi.components().iter().enumerate() {
        // x_i = y_i - q_i(x_1..x_{i-1})
        let q = c - &Polynomial::var(n, i);
        let mut subs = inv.clone();
        subs.extend((i..n).map(|j| Polynomial::var(n, j)));
        inv.push(&Polynomial::var(n, i) - &q.compose(&subs)?);
    }
    let inv = MapGerm::new(n, inv)?;
    if phi.compose(&inv)? != MapGerm::identity(n) || inv.compose(phi)? != MapGerm::identity(n) {
        return Err(GermError::structural(
            "back-substitution did not invert the map",
        ));
    }
    Ok(inv)
}

/// Germs with `f o phi = psi o g` holding exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub f: MapGerm,
    pub g: MapGerm,
    pub phi: MapGerm,
    pub psi: MapGerm,
}

/// `g = core`, `f = psi o core o phi^-1`.
pub fn construct_equivalence(core: &MapGerm, phi: &MapGerm, psi: &MapGerm) -> Result<Equivalence> {
    if phi.nvars() != core.nvars() || psi.nvars() != core.ncomps() {
        return Err(GermError::structural(
            "phi must act on the source and psi on the target of the core germ",
        ));
    }
    let phi_inv = unipotent_inverse(phi)?;
    unipotent_inverse(psi)?;
    let f = psi.compose(&core.compose(&phi_inv)?)?;
    if f.compose(phi)? != psi.compose(core)? {
        return Err(GermError::structural("constructed pair does not commute"));
    }
    Ok(Equivalence {
        f,
        g: core.clone(),
        phi: phi.clone(),
        psi: psi.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentRow {
    pub m: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TangentReport {
    /// `k = order(f)`.
    pub order: u32,
    pub rows: Vec<TangentRow>,
}

impl TangentReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.r).fold(0.0, f64::max)
    }

    /// `D1(m') / D1(m)` for consecutive rows.
    pub fn d1_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].d1 / w[0].d1).collect()
    }
}

/// With `k = order(f)` and `z = x / m`, at each scale:
/// `D1 = sup |m^k f(phi(z)) - H_f(m phi(z))|`,
/// `D2 = sup |m^k psi(g(z)) - m^k psi(H_g(x) / m^k)|`,
/// `R = sup |m^k f(phi(z)) - m^k psi(g(z))|`.
pub fn tangent_probe(q: &Equivalence, grid: &SampleGrid, scales: &[f64]) -> Result<TangentReport> {
    let n = q.f.nvars();
    grid.check(n)?;
    check_scales(scales)?;
    if q.phi.nvars() != n || q.g.nvars() != n || q.psi.nvars() != q.g.ncomps() {
        return Err(GermError::structural("quadruple arities do not match"));
    }
    unipotent_inverse(&q.psi)?;
    let k = q.f.order()?;
    let hf = q.f.first_homogeneous_part()?;
    let hg = q.g.first_homogeneous_part()?;
    // H_f(m y) = m^k H_f(y), so D1 is m^k times the tail f - H_f at phi(z);
    // evaluating the tail directly avoids cancellation.
    let tail_f = sub_maps(&q.f, &hf)?;
    let tail_g = sub_maps(&q.g, &hg)?;
    let psi_rest = sub_maps(&q.psi, &MapGerm::identity(q.psi.nvars()))?;
    let rows = scales
        .iter()
        .map(|&m| {
            let mk = m.powi(k as i32);
            let mut row = TangentRow {
                m,
                d1: 0.0,
                d2: 0.0,
                r: 0.0,
            };
            for x in grid.points() {
                let z = scaled(x, 1.0 / m);
                let y = q.phi.eval_f64(&z);
                let gz = q.g.eval_f64(&z);
                let hgz = hg.eval_f64(&z);
                row.d1 = row.d1.max(mk * norm(&tail_f.eval_f64(&y)));
                // psi(g) - psi(H_g) = (g - H_g) + (psi - id)(g) - (psi - id)(H_g)
                let d2: Vec<f64> = tail_g
                    .eval_f64(&z)
                    .iter()
                    .zip(psi_rest.eval_f64(&gz))
                    .zip(psi_rest.eval_f64(&hgz))
                    .map(|((t, a), b)| t + (a - b))
                    .collect();
                row.d2 = row.d2.max(mk * norm(&d2));
                row.r = row
                    .r
                    .max(mk * dist(&q.f.eval_f64(&y), &q.psi.eval_f64(&gz)));
            }
            row
        })
        .collect();
    Ok(TangentReport { order: k, rows })
}

/// Componentwise difference, which may have zero components.
fn sub_maps(a: &MapGerm, b: &MapGerm) -> Result<MapGerm> {
    let comps = a
        .components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x - y)
        .collect();
    MapGerm::new(a.nvars(), comps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioInterval {
    pub min: f64,
    pub max: f64,
    /// `max(max, 1 / min)`, the least `c` with the interval inside `[1/c, c]`.
    pub c: f64,
    /// Grid points used; the rest have `g(phi(x)) = 0`.
    pub points: usize,
}

/// Range of `|f(x)| / |g(phi(x))|` over grid points where `g(phi(x)) != 0`.
pub fn ratio_probe(
    f: &MapGerm,
    g: &MapGerm,
    phi: &LipschitzMap,
    grid: &SampleGrid,
) -> Result<RatioInterval> {
    grid.check(f.nvars())?;
    if phi.nvars() != f.nvars() || phi.ncomps() != g.nvars() {
        return Err(GermError::structural(
            "phi must map the source of f to the source of g",
        ));
    }
    let mut out = RatioInterval {
        min: f64::INFINITY,
        max: 0.0,
        c: 0.0,
        points: 0,
    };
    for x in grid.points() {
        let den = norm(&g.eval_f64(&phi.eval(x)?));
        if den == 0.0 {
            continue;
        }
        let r = norm(&f.eval_f64(x)) / den;
        out.min = out.min.min(r);
        out.max = out.max.max(r);
        out.points += 1;
    }
    if out.points == 0 {
        return Err(GermError::Undefined(
            "g(phi(x)) vanishes at every grid point".into(),
        ));
    }
    out.c = out.max.max(1.0 / out.min);
    Ok(out)
}
