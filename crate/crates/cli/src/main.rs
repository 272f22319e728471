use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use germkit_core::boardman::{Pruning, SymbolOptions, DEFAULT_GEN_CAP, DEFAULT_MAX_STEPS};
use germkit_core::equivlab::{corpus_records, invariance_report, CorpusConfig};
use germkit_core::lipschitz::LipschitzMap;
use germkit_core::parse::{parse_germ_file, parse_polynomial, GermKind};
use germkit_core::puiseux::{puiseux_expansions, BranchReport, DEFAULT_MAX_TERMS};
use germkit_core::tangentnum::{
    construct_equivalence, convergence_probe, default_scales, ratio_probe, tangent_probe,
    RescaleProbe, SampleGrid, DEFAULT_GRID_STEP, DEFAULT_M_EXP,
};
use germkit_core::{boardman_symbol, GermError, MapGerm, Polynomial};

/// Exit code when a campaign finds an invariance violation.
const EXIT_VIOLATION: u8 = 7;

#[derive(Parser, Debug)]
#[command(
    name = "germkit",
    version,
    about = "Invariants of polynomial map germs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Germ file, or `-` for standard input.
    #[arg(short, long, global = true)]
    input: Option<String>,
    /// Built-in germ instead of a file.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_GEN_CAP)]
    gen_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = PruningArg::Ideal)]
    pruning: PruningArg,
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
    /// Largest scale is 2^m-exp.
    #[arg(long, global = true, default_value_t = DEFAULT_M_EXP)]
    m_exp: u32,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_TERMS)]
    max_terms: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Order, rank and first homogeneous part.
    Invariants,
    /// Boardman symbol.
    Symbol {
        /// Also print the first N entries.
        #[arg(long)]
        expand: Option<usize>,
    },
    /// First homogeneous part.
    Hpart,
    /// Puiseux expansions and pairs of a plane curve.
    Puiseux {
        /// Solve for y as a function of x instead.
        #[arg(long)]
        transpose: bool,
    },
    /// Symbols before and after random contact moves on a seeded corpus.
    Invariance {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        moves: usize,
    },
    /// Rescaling probes for a germ pair or a Lipschitz map.
    Tangent,
    /// Symbols and first-run checks over a seeded corpus.
    Corpus {
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    /// x^4 + y^9
    PaperF0,
    /// x^4 + x^2*y^6 + y^9
    PaperF1,
    /// x^4 + y^5
    PaperF,
    /// x^4 - 2*x^2*y^3 - 4*x*y^5 + y^6 + y^7
    PaperG,
    /// (x^2 + y^3, x^2*y) with phi = psi = (x, y + x^2)
    Unipotent,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PruningArg {
    Rational,
    Monomial,
    Eliminate,
    Ideal,
}

impl From<PruningArg> for Pruning {
    fn from(p: PruningArg) -> Self {
        match p {
            PruningArg::Rational => Pruning::RationalMultiples,
            PruningArg::Monomial => Pruning::MonomialMultiples,
            PruningArg::Eliminate => Pruning::Eliminate,
            PruningArg::Ideal => Pruning::Ideal,
        }
    }
}

/// Text and JSON renderings of a command result, plus its exit code.
struct Outcome {
    text: String,
    json: serde_json::Value,
    code: u8,
}

impl Outcome {
    fn ok(text: String, json: serde_json::Value) -> Self {
        Outcome {
            text,
            json,
            code: 0,
        }
    }
}

enum Input {
    Map(MapGerm, Vec<String>),
    Lipschitz(LipschitzMap),
}

fn xy() -> Vec<String> {
    vec!["x".to_string(), "y".to_string()]
}

fn preset_germ(p: Preset) -> MapGerm {
    let comps: &[&str] = match p {
        Preset::PaperF0 => &["x^4 + y^9"],
        Preset::PaperF1 => &["x^4 + x^2*y^6 + y^9"],
        Preset::PaperF => &["x^4 + y^5"],
        Preset::PaperG => &["x^4 - 2*x^2*y^3 - 4*x*y^5 + y^6 + y^7"],
        Preset::Unipotent => &["x^2 + y^3", "x^2*y"],
    };
    germ_of(comps)
}

fn germ_of(comps: &[&str]) -> MapGerm {
    let polys = comps
        .iter()
        .map(|c| parse_polynomial(c, &xy()).expect("preset parses"))
        .collect();
    MapGerm::new(2, polys).expect("preset is a germ")
}

fn read_input(c: &Common) -> Result<Input, GermError> {
    if let Some(p) = c.preset {
        return Ok(Input::Map(preset_germ(p), xy()));
    }
    let path = c
        .input
        .as_deref()
        .ok_or_else(|| GermError::structural("need --input FILE, --input - or --preset"))?;
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| GermError::structural(format!("reading standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| GermError::structural(format!("reading {path}: {e}")))?
    };
    let file = parse_germ_file(&text)?;
    match file.kind {
        GermKind::PolynomialMap => Ok(Input::Map(file.map_germ()?, file.vars.clone())),
        GermKind::LipschitzMap => Ok(Input::Lipschitz(file.lipschitz_map()?)),
    }
}

fn read_germ(c: &Common) -> Result<(MapGerm, Vec<String>), GermError> {
    match read_input(c)? {
        Input::Map(f, vars) => Ok((f, vars)),
        Input::Lipschitz(_) => Err(GermError::structural(
            "this command needs a polynomial-map file",
        )),
    }
}

fn options(c: &Common) -> SymbolOptions {
    SymbolOptions {
        max_steps: c.max_steps,
        gen_cap: c.gen_cap,
        pruning: c.pruning.into(),
    }
}

fn tuple(parts: &[String]) -> String {
    format!("({})", parts.join(", "))
}

fn cmd_invariants(c: &Common) -> Result<Outcome, GermError> {
    let (f, vars) = read_germ(c)?;
    let order = f.order()?;
    let h = f.first_homogeneous_part()?.to_strings(&vars);
    let rank = f.rank();
    Ok(Outcome::ok(
        format!("order: {order}\nrank: {rank}\nH_f: {}", tuple(&h)),
        json!({"order": order, "rank": rank, "hpart": h}),
    ))
}

fn cmd_hpart(c: &Common) -> Result<Outcome, GermError> {
    let (f, vars) = read_germ(c)?;
    let h = f.first_homogeneous_part()?.to_strings(&vars);
    Ok(Outcome::ok(tuple(&h), json!({"hpart": h})))
}

fn cmd_symbol(c: &Common, expand: Option<usize>) -> Result<Outcome, GermError> {
    let (f, _) = read_germ(c)?;
    let s = boardman_symbol(&f, options(c))?;
    let mut text = format!("{s}\nstatus: {}", s.status().as_str());
    let mut value = serde_json::to_value(&s).expect("symbol serializes");
    if let Some(n) = expand {
        let entries = s.expand(n);
        let shown: Vec<String> = entries.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("\nfirst {n}: {}", tuple(&shown)));
        value["expanded"] = json!(entries);
    }
    Ok(Outcome::ok(text, value))
}

fn cmd_puiseux(c: &Common, transpose: bool) -> Result<Outcome, GermError> {
    let (f, _) = read_germ(c)?;
    if f.nvars() != 2 || f.ncomps() != 1 {
        return Err(GermError::structural(
            "puiseux needs one component in two variables",
        ));
    }
    let mut curve: Polynomial = f.components()[0].clone();
    if transpose {
        curve = curve.embed(2, &[1, 0])?;
    }
    let branches = puiseux_expansions(&curve, c.max_terms)?;
    let reports: Vec<BranchReport> = branches.iter().map(|b| b.report()).collect();
    let incomplete = reports.iter().filter(|r| !r.complete).count();
    let (x, y) = if transpose { ("y", "x") } else { ("x", "y") };
    let mut lines = vec![format!(
        "{} branches of {x} in powers of {y}",
        reports.len()
    )];
    for r in &reports {
        let pairs = match &r.pairs {
            Some(p) => format!("{p:?}"),
            None => "incomplete".to_string(),
        };
        lines.push(format!(
            "exponents [{}] pairs {pairs}",
            r.exponents.join(", ")
        ));
    }
    Ok(Outcome {
        text: lines.join("\n"),
        json: json!({"branches": reports}),
        code: if incomplete > 0 { 6 } else { 0 },
    })
}

fn cmd_invariance(c: &Common, count: usize, moves: usize) -> Result<Outcome, GermError> {
    let cfg = CorpusConfig::with_seed_count(c.seed, count);
    let rep = invariance_report(&cfg, moves, options(c));
    let s = &rep.summary;
    let text = format!(
        "germs {} cases {} violations {} (order {}, rank {}, symbol {}) errors {} shortened {}",
        s.germs,
        s.cases,
        s.violations,
        s.order_violations,
        s.rank_violations,
        s.symbol_violations,
        s.errors,
        s.shortened
    );
    Ok(Outcome {
        code: if s.violations > 0 { EXIT_VIOLATION } else { 0 },
        text,
        json: to_json(&rep),
    })
}

fn cmd_corpus(c: &Common, count: usize) -> Result<Outcome, GermError> {
    let cfg = CorpusConfig::with_seed_count(c.seed, count);
    let records = corpus_records(&cfg, options(c));
    let mut lines = Vec::new();
    let mut first_fail = 0;
    let mut order_fail = 0;
    for r in &records {
        let sym = r
            .symbol
            .as_ref()
            .map_or_else(|| r.error.clone().unwrap_or_default(), |s| s.to_string());
        if r.first_value_ok == Some(false) {
            first_fail += 1;
        }
        if r.rank == 0 && r.first_length_matches_order == Some(false) {
            order_fail += 1;
        }
        lines.push(format!(
            "{:>4} n={} rank={} {} {}",
            r.index,
            r.nvars,
            r.rank,
            tuple(&r.germ),
            sym
        ));
    }
    lines.push(format!(
        "first value failures {first_fail}, rank-0 first run failures {order_fail}"
    ));
    Ok(Outcome {
        code: if first_fail + order_fail > 0 {
            EXIT_VIOLATION
        } else {
            0
        },
        text: lines.join("\n"),
        json: json!({"corpus": cfg, "records": records}),
    })
}

fn cmd_tangent(c: &Common) -> Result<Outcome, GermError> {
    let scales = default_scales(c.m_exp);
    let input = match c.preset {
        Some(p) => Input::Map(preset_germ(p), xy()),
        None => read_input(c)?,
    };
    match input {
        Input::Lipschitz(map) => {
            let n = map.nvars();
            let probe = RescaleProbe::new(map, scales, SampleGrid::lattice(n, c.grid_step)?)?;
            let rep = convergence_probe(&probe)?;
            let mut lines: Vec<String> = rep
                .rows
                .iter()
                .map(|r| format!("{:>10} {:>10} {:.6e}", r.m, r.next_m, r.deviation))
                .collect();
            lines.push(format!("converged: {}", rep.converged));
            Ok(Outcome {
                code: if rep.converged { 0 } else { 6 },
                text: lines.join("\n"),
                json: to_json(&rep),
            })
        }
        Input::Map(core, _) => {
            let n = core.nvars();
            let (phi, psi) = if c.preset == Some(Preset::Unipotent) {
                let shear = germ_of(&["x", "y + x^2"]);
                (shear.clone(), shear)
            } else {
                (MapGerm::identity(n), MapGerm::identity(core.ncomps()))
            };
            let q = construct_equivalence(&core, &phi, &psi)?;
            let grid = SampleGrid::lattice(n, c.grid_step)?;
            let rep = tangent_probe(&q, &grid, &scales)?;
            let ratio = ratio_probe(&q.g, &q.f, &LipschitzMap::from_germ(&q.phi), &grid)?;
            let mut lines = vec![
                format!("order {}", rep.order),
                format!("{:>10} {:>22} {:>22} {:>12}", "m", "D1", "D2", "R"),
            ];
            for r in &rep.rows {
                lines.push(format!(
                    "{:>10} {:>22.15e} {:>22.15e} {:>12.3e}",
                    r.m, r.d1, r.d2, r.r
                ));
            }
            lines.push(format!(
                "ratio interval [{:.6}, {:.6}] c = {:.6} over {} points",
                ratio.min, ratio.max, ratio.c, ratio.points
            ));
            Ok(Outcome::ok(
                lines.join("\n"),
                json!({"order": rep.order, "rows": rep.rows, "max_residual": rep.max_residual(), "ratio": ratio}),
            ))
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match &cli.command {
        Command::Invariants => cmd_invariants(c),
        Command::Symbol { expand } => cmd_symbol(c, *expand),
        Command::Hpart => cmd_hpart(c),
        Command::Puiseux { transpose } => cmd_puiseux(c, *transpose),
        Command::Invariance { count, moves } => cmd_invariance(c, *count, *moves),
        Command::Tangent => cmd_tangent(c),
        Command::Corpus { count } => cmd_corpus(c, *count),
    };
    match result {
        Ok(out) => {
            let body = if c.json {
                serde_json::to_string(&out.json).expect("json")
            } else {
                out.text
            };
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout(), "{body}");
            ExitCode::from(out.code)
        }
        Err(e) => {
            if c.json {
                println!(
                    "{}",
                    json!({"error": e.to_string(), "exit_code": e.exit_code()})
                );
            }
            eprintln!("germkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
