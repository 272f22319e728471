//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{names, permutation_det, rat};
use germkit_core::boardman::{boardman_symbol, GeneratorSet, Pruning, SymbolOptions, SymbolStatus};
use germkit_core::equivlab::{corpus_records, invariance_report, redundancy_report, CorpusConfig};
use germkit_core::lipschitz::LipschitzMap;
use germkit_core::matrix::PolyMatrix;
use germkit_core::parse::{parse_polynomial, print_polynomial};
use germkit_core::puiseux::{
    puiseux_expansions, puiseux_pairs, residual_check, topologically_equal,
};
use germkit_core::tangentnum::{
    construct_equivalence, default_scales, ratio_probe, tangent_probe, SampleGrid,
};
use germkit_core::{MapGerm, Polynomial};

const F0: &str = "x^4 + y^9";
const F1: &str = "x^4 + x^2*y^6 + y^9";
const F: &str = "x^4 + y^5";
const G: &str = "x^4 - 2*x^2*y^3 - 4*x*y^5 + y^6 + y^7";

fn xy_germ(comps: &[&str]) -> MapGerm {
    let polys = comps
        .iter()
        .map(|c| parse_polynomial(c, &names(2)).unwrap())
        .collect();
    MapGerm::new(2, polys).unwrap()
}

/// `(passed, detail)`.
type Verdict = (bool, String);

type Criterion = (&'static str, fn() -> Verdict);

fn golden_symbols() -> Verdict {
    let cases = [
        (
            F0,
            r#"{"runs": [[2,3],[1,5],[0,null]], "status": "stabilized_zero"}"#,
        ),
        (
            F1,
            r#"{"runs": [[2,3],[1,4],[0,null]], "status": "stabilized_zero"}"#,
        ),
        (
            F,
            r#"{"runs": [[2,3],[1,1],[0,null]], "status": "stabilized_zero"}"#,
        ),
        (
            G,
            r#"{"runs": [[2,3],[1,1],[0,null]], "status": "stabilized_zero"}"#,
        ),
    ];
    let mut ok = true;
    let mut slowest = 0f64;
    let mut shown = Vec::new();
    for (f, expected) in cases {
        let t = Instant::now();
        let s = boardman_symbol(&xy_germ(&[f]), SymbolOptions::default()).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        ok &= s.to_json_string() == expected;
        shown.push(s.to_string());
    }
    ok &= slowest < 1.0;
    (ok, format!("{}; slowest {slowest:.3} s", shown.join(" ")))
}

fn cusp_pair_invariants() -> Verdict {
    let f = xy_germ(&["x^2 + y^3", "x^2*y"]);
    let order = f.order().unwrap();
    let rank = f.rank();
    let h = f.first_homogeneous_part().unwrap().to_strings(&names(2));
    let ok = order == 2 && rank == 0 && h == ["x^2", "0"];
    (
        ok,
        format!("order {order}, rank {rank}, H_f = ({})", h.join(", ")),
    )
}

fn first_value_over_corpus() -> Verdict {
    let t = Instant::now();
    let recs = corpus_records(&CorpusConfig::default(), SymbolOptions::default());
    let secs = t.elapsed().as_secs_f64();
    let failures = recs
        .iter()
        .filter(|r| r.first_value_ok != Some(true))
        .count();
    let errors = recs.iter().filter(|r| r.error.is_some()).count();
    (
        failures == 0 && secs < 60.0,
        format!(
            "{} germs, {failures} failures ({errors} errors), {secs:.2} s",
            recs.len()
        ),
    )
}

fn first_run_over_rank_zero() -> Verdict {
    let recs = corpus_records(&CorpusConfig::default(), SymbolOptions::default());
    let rank0: Vec<_> = recs
        .iter()
        .filter(|r| r.rank == 0 && r.order.is_some())
        .collect();
    let failures = rank0
        .iter()
        .filter(|r| r.first_length_matches_order != Some(true))
        .count();
    (
        failures == 0,
        format!("{} rank-0 germs, {failures} failures", rank0.len()),
    )
}

fn invariance_campaign() -> Verdict {
    let t = Instant::now();
    let rep = invariance_report(&CorpusConfig::default(), 10, SymbolOptions::default());
    let secs = t.elapsed().as_secs_f64();
    let s = &rep.summary;
    (
        s.violations == 0 && s.errors == 0 && secs < 300.0,
        format!(
            "{} cases, {} violations, {} errors, {} compared on a certified prefix shorter than {}; {secs:.1} s",
            s.cases, s.violations, s.errors, s.shortened, rep.max_steps
        ),
    )
}

fn generator_independence() -> Verdict {
    let recs = redundancy_report(&CorpusConfig::default(), 3, SymbolOptions::default());
    let violations = recs.iter().filter(|r| r.violation).count();
    let errors = recs.iter().filter(|r| r.error.is_some()).count();
    (
        violations == 0 && errors == 0,
        format!(
            "{} germs, {violations} violations, {errors} errors",
            recs.len()
        ),
    )
}

fn unipotent_quadruple() -> germkit_core::tangentnum::Equivalence {
    let core = xy_germ(&["x^2 + y^3", "x^2*y"]);
    let shear = xy_germ(&["x", "y + x^2"]);
    construct_equivalence(&core, &shear, &shear).unwrap()
}

fn tangent_probe_check() -> Verdict {
    let scales = default_scales(20);
    let grid = SampleGrid::lattice(2, 0.1).unwrap();
    let rep = tangent_probe(&unipotent_quadruple(), &grid, &scales).unwrap();
    let residual = rep.max_residual();
    let ratios = rep.d1_ratios();
    let tail = &ratios[ratios.len() - 5..];
    let halves = tail.iter().all(|r| (r - 0.5).abs() <= 0.05);

    let f = xy_germ(&[F]);
    let id = construct_equivalence(&f, &MapGerm::identity(2), &MapGerm::identity(1)).unwrap();
    let rep_f = tangent_probe(&id, &grid, &scales).unwrap();
    let worst = rep_f
        .rows
        .iter()
        .map(|r| (r.d1 * r.m - 1.0).abs())
        .fold(0.0, f64::max);
    (
        residual <= 1e-9 && halves && worst <= 1e-12,
        format!(
            "max R {residual:.2e}; last D1 ratios {}; quartic cusp max |m D1 - 1| {worst:.1e}",
            tail.iter()
                .map(|r| format!("{r:.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    )
}

fn ratio_probe_check() -> Verdict {
    let q = unipotent_quadruple();
    let grid = SampleGrid::lattice(2, 0.05).unwrap();
    let r = ratio_probe(&q.g, &q.f, &LipschitzMap::from_germ(&q.phi), &grid).unwrap();
    let contained = r.min >= 1.0 / r.c && r.max <= r.c;
    let f = xy_germ(&[F]);
    let same = ratio_probe(&f, &f, &LipschitzMap::identity(2), &grid).unwrap();
    (
        contained && r.c < 10.0 && same.min == 1.0 && same.max == 1.0,
        format!(
            "[{:.6}, {:.6}] with c = {:.6} over {} points; f = g gives [{}, {}]",
            r.min, r.max, r.c, r.points, same.min, same.max
        ),
    )
}

fn puiseux_check() -> Verdict {
    let t = Instant::now();
    let curve = |s: &str| parse_polynomial(s, &names(2)).unwrap();
    let mut ok = true;
    let mut pairs_of = Vec::new();
    let mut residuals = 0;
    for (text, expected) in [(F, vec![(5, 4)]), (G, vec![(3, 2), (7, 2)])] {
        let c = curve(text);
        let branches = puiseux_expansions(&c, 12).unwrap();
        ok &= branches.len() == 4;
        for b in &branches {
            ok &= b.complete && puiseux_pairs(b).unwrap() == expected;
            for t in [1e-2, 1e-3] {
                ok &= residual_check(&c, b, t).within_bound();
                residuals += 1;
            }
        }
        pairs_of.push(puiseux_pairs(&branches[0]).unwrap());
    }
    let distinct = !topologically_equal(&pairs_of[0], &pairs_of[1]);
    let secs = t.elapsed().as_secs_f64();
    (
        ok && distinct && secs < 5.0,
        format!(
            "pairs {:?} and {:?}, topologically equal: {}; {residuals} residual checks; {secs:.3} s",
            pairs_of[0], pairs_of[1], !distinct
        ),
    )
}

fn random_poly(
    rng: &mut ChaCha8Rng,
    nvars: usize,
    max_deg: u32,
    max_terms: usize,
    num: i64,
    den: i64,
) -> Polynomial {
    let k = rng.gen_range(0..=max_terms);
    let terms: Vec<(Vec<u32>, _)> = (0..k)
        .filter_map(|_| {
            let e: Vec<u32> = (0..nvars).map(|_| rng.gen_range(0..=max_deg)).collect();
            let c = rat(rng.gen_range(-num..=num), rng.gen_range(1..=den));
            (e.iter().sum::<u32>() <= max_deg).then_some((e, c))
        })
        .collect();
    Polynomial::from_terms(nvars, terms).unwrap()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out.sort();
    out
}

/// Hand-executed iteration for `x^2` in two variables with generators kept
/// verbatim:
/// step 1: {x^2}, J(0) = 0, rank 0, value 2; the 1x1 minors add 2x.
/// step 2: {x^2, 2x}, J(0) = [[0, 0], [2, 0]], rank 1, value 1; the 2x2
///         minors of [[2x, 0], [2, 0]] vanish, so nothing is added.
/// step 3: same set, value 1 again: a literal fixed point, tail (2, 1, 1, ...).
fn x_squared_trace() -> bool {
    let f = xy_germ(&["x^2"]);
    let g0 = GeneratorSet::from_germ_with(&f, Pruning::RationalMultiples);
    let g1 = g0.jacobian_extension(1).unwrap();
    let g2 = g1.jacobian_extension(2).unwrap();
    let trace_ok = g0.critical_index() == 2
        && g1.len() == 2
        && g1.gens()[1] == Polynomial::from_int_terms(2, &[(&[1, 0], 2)])
        && g1.critical_index() == 1
        && g2.gens() == g1.gens()
        && g2.critical_index() == 1;
    let s = boardman_symbol(&f, SymbolOptions::default()).unwrap();
    trace_ok && s.status() == SymbolStatus::SteadyTail && s.expand(6) == vec![2, 1, 1, 1, 1, 1]
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut minor_mismatch = 0;
    for _ in 0..100 {
        let (r, c, n) = (
            rng.gen_range(1..=4),
            rng.gen_range(1..=4),
            rng.gen_range(1..=2),
        );
        let entries = (0..r * c)
            .map(|_| random_poly(&mut rng, n, 2, 3, 5, 2))
            .collect();
        let m = PolyMatrix::new(r, c, entries).unwrap();
        for s in 1..=r.min(c) {
            let mut expected = Vec::new();
            for rs in combinations(r, s) {
                for cs in combinations(c, s) {
                    let sub: Vec<Vec<Polynomial>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| m.get(i, j).clone()).collect())
                        .collect();
                    expected.push(permutation_det(&sub, n));
                }
            }
            if m.minors(s).unwrap() != expected {
                minor_mismatch += 1;
            }
        }
    }
    let mut roundtrip_fail = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=3);
        let p = random_poly(&mut rng, n, 6, 8, 99, 9);
        let vars = names(n);
        if parse_polynomial(&print_polynomial(&p, &vars), &vars).ok() != Some(p) {
            roundtrip_fail += 1;
        }
    }
    let trace = x_squared_trace();
    (
        minor_mismatch == 0 && roundtrip_fail == 0 && trace,
        format!(
            "100 matrices, {minor_mismatch} minor mismatches; 500 round trips, {roundtrip_fail} failures; x^2 trace {}",
            if trace { "matches" } else { "differs" }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden symbols", golden_symbols),
        (
            "order, rank and H_f of (x^2 + y^3, x^2*y)",
            cusp_pair_invariants,
        ),
        (
            "first symbol value over the corpus",
            first_value_over_corpus,
        ),
        (
            "first run length over rank-0 germs",
            first_run_over_rank_zero,
        ),
        ("invariance under contact moves", invariance_campaign),
        ("generator independence", generator_independence),
        ("rescaling probe", tangent_probe_check),
        ("ratio probe", ratio_probe_check),
        ("Puiseux pairs", puiseux_check),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(v) => v,
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
