//! `symflow` — command-line front end for the symflow-core toolkit.
//!
//! Exit codes: 0 = all verdicts VERIFIED (or informational command),
//! 1 = at least one DISCREPANT verdict or computation failure,
//! 2 = usage / parameter parse error.
//!
//! stdout carries the machine-readable payload only (JSON by default, CSV
//! with `--format csv`); progress and summaries go to stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::PathBuf;

use symflow_core::catalog::{
    example_multiparameter, reductions, solutions, travelling_waves_all, EntryStatus, FormKind,
    SolutionForm,
};
use symflow_core::exprcore::{parse as parse_expr, Expr, Rat};
use symflow_core::family::{classify, snap_to_rational, CaseId, PdeParams};
use symflow_core::flows::{
    closed_form_indices, exponentiate_generator, group_law_residual, group_map,
    pushforward, SolutionHandle,
};
use symflow_core::moc::solve_ivp;
use symflow_core::symmetry::{
    generators, prolongation_residual, residual_scale, verify_commutator_table,
};
use symflow_core::verify::{audit, residual_entry, SampleDomain, Verdict};

const EXIT_OK: i32 = 0;
const EXIT_DISCREPANT: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "symflow",
    version,
    about = "Symmetry toolkit for the PDE family u_t + u^k u_x + lambda u^m = 0"
)]
struct Cli {
    /// Output format for the stdout payload.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the payload to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker-pool size for verification sweeps (informational; sweeps are
    /// sequential-deterministic at current problem sizes).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ParamArgs {
    /// Damping coefficient lambda (decimal).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    lambda: f64,
    /// Convection exponent k, as "p/q" or a decimal (snapped to rational).
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Damping exponent m, as "p/q" or a decimal (snapped to rational).
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    /// Case number 1-7; lets k or m be derived from the case condition.
    #[arg(long)]
    case: Option<u8>,
}

#[derive(Args)]
struct SeedArg {
    /// RNG seed (SYMFLOW_SEED overrides the default of 0).
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("SYMFLOW_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0)
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify (k, m) into one of the seven symmetry cases.
    Classify(ParamArgs),
    /// Print the symmetry generators of a case.
    Generators(ParamArgs),
    /// Check every generator against the linearized symmetry condition.
    CheckSymmetry {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seed: SeedArg,
        /// Scaled-residual tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Random states per generator.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Verify the printed 8x8 commutator table (Cases 2 and 7).
    BracketTable {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Check the table exactly as tabulated (keeps the known typo).
        #[arg(long)]
        as_printed: bool,
    },
    /// Move a point along one one-parameter group, closed form vs numeric.
    Flow {
        #[command(flatten)]
        params: ParamArgs,
        /// Generator index (1-based).
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        u: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Transform a catalog solution by a group element and re-verify it.
    Pushforward {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seed: SeedArg,
        /// Catalog id of an explicit solution (see `catalog`).
        #[arg(long)]
        id: String,
        /// Generator index (1-based, closed-form maps only).
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// List the solution/reduction/travelling-wave catalog for a case.
    Catalog {
        #[command(flatten)]
        params: ParamArgs,
        /// Wave speed used to instantiate the travelling-wave rows.
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        speed: f64,
    },
    /// Run residual verification over every catalog entry for a case.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        speed: f64,
    },
    /// Full deterministic audit: generators, tables, flows, solutions,
    /// reductions and pushforward closure.
    Audit {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Solve the initial-value problem by the method of characteristics.
    SolveMoc {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial datum u0(x), e.g. "1.4" or "2 - 0.5*x".
        #[arg(long)]
        u0: String,
        /// Comma-separated query abscissae.
        #[arg(long, default_value = "0.5,1.0,1.5", allow_hyphen_values = true)]
        x: String,
        /// Comma-separated query times.
        #[arg(long, default_value = "0.1,0.2", allow_hyphen_values = true)]
        t: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("symflow: error: {}", e.msg);
            e.code
        }
    };
    std::process::exit(code);
}

struct CliError {
    msg: String,
    code: i32,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        msg: msg.into(),
        code: EXIT_USAGE,
    }
}

fn failed(msg: impl Into<String>) -> CliError {
    CliError {
        msg: msg.into(),
        code: EXIT_DISCREPANT,
    }
}

/// Parse "p/q" or a decimal (snapped to a nearby rational).
/// Returns the rational and whether snapping changed the value.
fn parse_rat(label: &str, s: &str) -> Result<(Rat, bool), CliError> {
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| usage(format!("{label}: bad numerator in '{s}'")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| usage(format!("{label}: bad denominator in '{s}'")))?;
        if q == 0 {
            return Err(usage(format!("{label}: zero denominator in '{s}'")));
        }
        return Ok((Rat::new(p, q), false));
    }
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| usage(format!("{label}: cannot parse '{s}' as p/q or decimal")))?;
    snap_to_rational(v).map_err(|e| usage(format!("{label}: {e}")))
}

struct Resolved {
    params: PdeParams,
    case: CaseId,
    snapped: Vec<(String, String)>,
}

/// Resolve (lambda, k, m, case) from the flags. When `--case` is given with
/// only one exponent, the other is derived from the case condition.
fn resolve(args: &ParamArgs) -> Result<Resolved, CliError> {
    let mut snapped = Vec::new();
    let mut k = match &args.k {
        Some(s) => {
            let (r, sn) = parse_rat("--k", s)?;
            if sn {
                snapped.push(("k".to_string(), r.to_string()));
            }
            Some(r)
        }
        None => None,
    };
    let mut m = match &args.m {
        Some(s) => {
            let (r, sn) = parse_rat("--m", s)?;
            if sn {
                snapped.push(("m".to_string(), r.to_string()));
            }
            Some(r)
        }
        None => None,
    };
    let requested = match args.case {
        Some(n) => Some(
            CaseId::from_number(n).ok_or_else(|| usage(format!("--case must be 1-7, got {n}")))?,
        ),
        None => None,
    };
    if let Some(case) = requested {
        let one = Rat::new(1, 1);
        match (k, m, case) {
            (Some(kv), None, c) => {
                m = Some(match c {
                    CaseId::Case7 => one,
                    CaseId::Case2 => kv + one,
                    CaseId::Case3 => one - kv,
                    CaseId::Case4 => kv * Rat::new(2, 1) + one,
                    CaseId::Case5 => one - kv * Rat::new(2, 1),
                    CaseId::Case6 => kv * Rat::new(3, 1) + one,
                    CaseId::Case1 => return Err(usage("--case 1 needs both --k and --m")),
                });
            }
            (None, Some(mv), c) => {
                k = Some(match c {
                    CaseId::Case7 => {
                        if mv != one {
                            return Err(usage("--case 7 requires m = 1"));
                        }
                        one
                    }
                    CaseId::Case2 => mv - one,
                    CaseId::Case3 => one - mv,
                    CaseId::Case4 => (mv - one) / Rat::new(2, 1),
                    CaseId::Case5 => (one - mv) / Rat::new(2, 1),
                    CaseId::Case6 => (mv - one) / Rat::new(3, 1),
                    CaseId::Case1 => return Err(usage("--case 1 needs both --k and --m")),
                });
            }
            (None, None, _) => return Err(usage("--case needs at least one of --k, --m")),
            _ => {}
        }
    }
    let k = k.ok_or_else(|| usage("--k is required (or derivable from --case and --m)"))?;
    let m = m.ok_or_else(|| usage("--m is required (or derivable from --case and --k)"))?;
    let case = classify(k, m).map_err(|e| usage(e.to_string()))?;
    if let Some(req) = requested {
        if req != case {
            return Err(usage(format!(
                "k = {k}, m = {m} classifies as case {} ({}), not case {}",
                case.number(),
                case.condition(),
                req.number()
            )));
        }
    }
    let params = PdeParams::new(args.lambda, k, m).map_err(|e| usage(e.to_string()))?;
    Ok(Resolved {
        params,
        case,
        snapped,
    })
}

struct Output {
    format: Format,
    out: Option<PathBuf>,
}

impl Output {
    fn emit_json(&self, v: &Value) -> Result<(), CliError> {
        self.emit_text(&format!("{}", serde_json::to_string(v).unwrap()))
    }
    fn emit_pretty(&self, text: &str) -> Result<(), CliError> {
        self.emit_text(text)
    }
    fn emit_text(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, format!("{text}\n"))
                .map_err(|e| failed(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut so = std::io::stdout().lock();
                writeln!(so, "{text}").map_err(|e| failed(e.to_string()))
            }
        }
    }
    /// Render rows as CSV with a header; floats use round-trip formatting.
    fn emit_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut s = String::new();
        s.push_str(&header.join(","));
        for row in rows {
            s.push('\n');
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            s.push_str(&cells.join(","));
        }
        self.emit_text(&s)
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains(',') || c.contains('"') || c.contains('\n') {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

fn fnum(v: f64) -> String {
    format!("{v}")
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Verified => "VERIFIED",
        Verdict::Discrepant => "DISCREPANT",
        Verdict::EmptyDomain => "EMPTY_DOMAIN",
    }
}

fn status_str(s: EntryStatus) -> &'static str {
    match s {
        EntryStatus::Verified => "VERIFIED",
        EntryStatus::Discrepant => "DISCREPANT",
    }
}

fn kind_str(k: FormKind) -> &'static str {
    match k {
        FormKind::Explicit => "explicit",
        FormKind::Implicit => "implicit",
    }
}

/// All solution-like entries for a case: closed forms, travelling waves and
/// (Case 7) the multi-parameter chain examples.
fn all_forms(case: CaseId, params: &PdeParams, speed: f64) -> Result<Vec<SolutionForm>, CliError> {
    let mut forms = solutions(case, params).map_err(|e| failed(e.to_string()))?;
    forms.extend(travelling_waves_all(case, params, speed).map_err(|e| failed(e.to_string()))?);
    if case == CaseId::Case7 {
        forms.extend(example_multiparameter(params).map_err(|e| failed(e.to_string()))?);
    }
    Ok(forms)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let out = Output {
        format: cli.format,
        out: cli.out.clone(),
    };
    let _ = cli.jobs; // sweeps are sequential-deterministic at current sizes

    match cli.cmd {
        Cmd::Classify(args) => {
            let r = resolve(&args)?;
            let mut obj = Map::new();
            obj.insert("case".into(), json!(r.case.number()));
            obj.insert("condition".into(), json!(r.case.condition()));
            if !r.snapped.is_empty() {
                let snaps: Map<String, Value> = r
                    .snapped
                    .iter()
                    .map(|(k, v)| (k.clone(), json!(v)))
                    .collect();
                obj.insert("snapped".into(), Value::Object(snaps));
            }
            match out.format {
                Format::Json => out.emit_json(&Value::Object(obj))?,
                Format::Csv => out.emit_csv(
                    &["case", "condition"],
                    &[vec![
                        r.case.number().to_string(),
                        r.case.condition().to_string(),
                    ]],
                )?,
            }
            eprintln!(
                "k = {}, m = {} -> case {} ({})",
                r.params.k,
                r.params.m,
                r.case.number(),
                r.case.condition()
            );
            Ok(EXIT_OK)
        }

        Cmd::Generators(args) => {
            let r = resolve(&args)?;
            let gens = generators(r.case, &r.params).map_err(|e| failed(e.to_string()))?;
            let rows: Vec<(usize, String, String, String)> = gens
                .fields
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    (
                        i + 1,
                        f.xi.to_string(),
                        f.tau.to_string(),
                        f.phi.to_string(),
                    )
                })
                .collect();
            match out.format {
                Format::Json => {
                    let items: Vec<Value> = rows
                        .iter()
                        .map(|(i, xi, tau, phi)| {
                            json!({"index": i, "xi": xi, "tau": tau, "phi": phi})
                        })
                        .collect();
                    out.emit_json(&json!({
                        "case": r.case.number(),
                        "dim": r.case.algebra_dim(),
                        "generators": items,
                    }))?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = rows
                        .into_iter()
                        .map(|(i, xi, tau, phi)| vec![i.to_string(), xi, tau, phi])
                        .collect();
                    out.emit_csv(&["index", "xi", "tau", "phi"], &rows)?;
                }
            }
            eprintln!(
                "case {}: {} generators",
                r.case.number(),
                r.case.algebra_dim()
            );
            Ok(EXIT_OK)
        }

        Cmd::CheckSymmetry {
            params,
            seed,
            tol,
            samples,
        } => {
            let r = resolve(&params)?;
            let seed = seed.resolve();
            let gens = generators(r.case, &r.params).map_err(|e| failed(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::new();
            let mut all_ok = true;
            for (i, field) in gens.fields.iter().enumerate() {
                let mut max_r = 0.0_f64;
                let mut n = 0usize;
                for _ in 0..samples {
                    let st = (
                        rng.gen_range(0.1..2.0),
                        rng.gen_range(0.1..2.0),
                        rng.gen_range(0.5..2.0),
                        rng.gen_range(-1.0..1.0),
                    );
                    if let Ok(res) = prolongation_residual(field, &r.params, st) {
                        max_r = max_r.max(res.abs() / residual_scale(&r.params, st));
                        n += 1;
                    }
                }
                let ok = n >= samples / 2 && max_r <= tol;
                all_ok &= ok;
                rows.push((format!("M{}", i + 1), n, max_r, ok));
            }
            match out.format {
                Format::Json => {
                    let items: Vec<Value> = rows
                        .iter()
                        .map(|(id, n, max_r, ok)| {
                            json!({
                                "generator": id,
                                "points": n,
                                "max_residual": max_r,
                                "verdict": if *ok { "VERIFIED" } else { "DISCREPANT" },
                            })
                        })
                        .collect();
                    out.emit_json(&json!({
                        "case": r.case.number(),
                        "seed": seed,
                        "tol": tol,
                        "generators": items,
                        "all_ok": all_ok,
                    }))?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = rows
                        .iter()
                        .map(|(id, n, max_r, ok)| {
                            vec![
                                id.clone(),
                                n.to_string(),
                                fnum(*max_r),
                                (if *ok { "VERIFIED" } else { "DISCREPANT" }).to_string(),
                            ]
                        })
                        .collect();
                    out.emit_csv(&["generator", "points", "max_residual", "verdict"], &rows)?;
                }
            }
            eprintln!(
                "case {}: {} generators checked, all_ok = {all_ok}",
                r.case.number(),
                rows.len()
            );
            Ok(if all_ok { EXIT_OK } else { EXIT_DISCREPANT })
        }

        Cmd::BracketTable {
            params,
            seed,
            tol,
            samples,
            as_printed,
        } => {
            let r = resolve(&params)?;
            if !matches!(r.case, CaseId::Case2 | CaseId::Case7) {
                return Err(usage(format!(
                    "bracket-table covers cases 2 and 7 (8-dim algebras); case {} has no printed table",
                    r.case.number()
                )));
            }
            let report =
                verify_commutator_table(r.case, &r.params, tol, samples, seed.resolve(), as_printed)
                    .map_err(|e| failed(e.to_string()))?;
            match out.format {
                Format::Json => {
                    out.emit_json(&serde_json::to_value(&report).unwrap())?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = report
                        .cells
                        .iter()
                        .map(|c| {
                            vec![
                                c.i.to_string(),
                                c.j.to_string(),
                                c.expected.clone(),
                                c.matched.to_string(),
                                fnum(c.max_dev),
                            ]
                        })
                        .collect();
                    out.emit_csv(&["i", "j", "expected", "match", "max_dev"], &rows)?;
                }
            }
            eprintln!(
                "case {} table ({}): all_match = {}",
                r.case.number(),
                if as_printed { "as printed" } else { "corrected" },
                report.all_match
            );
            Ok(if report.all_match {
                EXIT_OK
            } else {
                EXIT_DISCREPANT
            })
        }

        Cmd::Flow {
            params,
            index,
            eps,
            x,
            t,
            u,
            tol,
        } => {
            let r = resolve(&params)?;
            let p0 = (x, t, u);
            let numeric = exponentiate_generator(r.case, index, &r.params, p0, eps)
                .map_err(|e| failed(e.to_string()))?;
            let closed = if closed_form_indices(r.case).contains(&index) {
                let g = group_map(r.case, index, &r.params).map_err(|e| failed(e.to_string()))?;
                let cf = g.apply(p0, eps).map_err(|e| failed(e.to_string()))?;
                let law = group_law_residual(&g, eps / 2.0, eps / 2.0, p0)
                    .map_err(|e| failed(e.to_string()))?;
                Some((cf, law))
            } else {
                None
            };
            let (verdict, dev) = match &closed {
                Some((cf, _)) => {
                    let dev = (numeric.0 - cf.0)
                        .abs()
                        .max((numeric.1 - cf.1).abs())
                        .max((numeric.2 - cf.2).abs());
                    (if dev <= tol { "VERIFIED" } else { "DISCREPANT" }, dev)
                }
                None => ("VERIFIED", 0.0),
            };
            match out.format {
                Format::Json => {
                    let mut obj = Map::new();
                    obj.insert("case".into(), json!(r.case.number()));
                    obj.insert("index".into(), json!(index));
                    obj.insert("eps".into(), json!(eps));
                    obj.insert("start".into(), json!([p0.0, p0.1, p0.2]));
                    obj.insert("numeric".into(), json!([numeric.0, numeric.1, numeric.2]));
                    if let Some((cf, law)) = &closed {
                        obj.insert("closed_form".into(), json!([cf.0, cf.1, cf.2]));
                        obj.insert("deviation".into(), json!(dev));
                        obj.insert("group_law_residual".into(), json!(law));
                    }
                    obj.insert("verdict".into(), json!(verdict));
                    out.emit_json(&Value::Object(obj))?;
                }
                Format::Csv => {
                    let (cf, law) = match &closed {
                        Some((cf, law)) => ([fnum(cf.0), fnum(cf.1), fnum(cf.2)], fnum(*law)),
                        None => (["".into(), "".into(), "".into()], "".into()),
                    };
                    out.emit_csv(
                        &[
                            "x", "t", "u", "x_num", "t_num", "u_num", "x_cf", "t_cf", "u_cf",
                            "deviation", "group_law_residual", "verdict",
                        ],
                        &[vec![
                            fnum(p0.0),
                            fnum(p0.1),
                            fnum(p0.2),
                            fnum(numeric.0),
                            fnum(numeric.1),
                            fnum(numeric.2),
                            cf[0].clone(),
                            cf[1].clone(),
                            cf[2].clone(),
                            fnum(dev),
                            law,
                            verdict.to_string(),
                        ]],
                    )?;
                }
            }
            eprintln!(
                "G{index}({eps:+}) on ({x}, {t}, {u}): {verdict} (deviation {dev:.3e})"
            );
            Ok(if verdict == "VERIFIED" {
                EXIT_OK
            } else {
                EXIT_DISCREPANT
            })
        }

        Cmd::Pushforward {
            params,
            seed,
            id,
            index,
            eps,
            tol,
        } => {
            let r = resolve(&params)?;
            let forms = all_forms(r.case, &r.params, 2.0)?;
            let form = forms
                .iter()
                .find(|f| f.id == id)
                .ok_or_else(|| usage(format!("no catalog entry '{id}' for case {}", r.case.number())))?;
            if form.kind != FormKind::Explicit {
                return Err(usage(format!("'{id}' is implicit; pushforward needs u = E(x, t)")));
            }
            if !closed_form_indices(r.case).contains(&index) {
                return Err(usage(format!(
                    "generator {index} has no closed-form map for case {} (available: {:?})",
                    r.case.number(),
                    closed_form_indices(r.case)
                )));
            }
            let g = group_map(r.case, index, &r.params).map_err(|e| failed(e.to_string()))?;
            let handle = SolutionHandle::new(form.bound_expr(), form.bound_guards());
            let moved = pushforward(&g, eps, &handle).map_err(|e| failed(e.to_string()))?;
            // Re-verify the transformed expression as a fresh explicit form.
            let mut probe = form.clone();
            probe.id = format!("{id}*G{index}@{eps:+}");
            probe.expr = moved.expr.clone();
            probe.guards = moved.guards.clone();
            probe.constants.clear();
            probe.status = EntryStatus::Verified;
            let dom = SampleDomain::standard(seed.resolve());
            let report = residual_entry(&probe, &r.params, &dom);
            match out.format {
                Format::Json => {
                    out.emit_json(&json!({
                        "id": probe.id,
                        "expr": moved.expr.to_string(),
                        "points": report.points,
                        "max_residual": report.max_residual,
                        "verdict": verdict_str(report.verdict),
                    }))?;
                }
                Format::Csv => {
                    out.emit_csv(
                        &["id", "points", "max_residual", "verdict", "expr"],
                        &[vec![
                            probe.id.clone(),
                            report.points.to_string(),
                            fnum(report.max_residual),
                            verdict_str(report.verdict).to_string(),
                            moved.expr.to_string(),
                        ]],
                    )?;
                }
            }
            let ok = report.verdict == Verdict::Verified && report.max_residual <= tol;
            eprintln!(
                "{}: {} (max residual {:.3e} at {} points)",
                probe.id,
                verdict_str(report.verdict),
                report.max_residual,
                report.points
            );
            Ok(if ok { EXIT_OK } else { EXIT_DISCREPANT })
        }

        Cmd::Catalog { params, speed } => {
            let r = resolve(&params)?;
            let forms = all_forms(r.case, &r.params, speed)?;
            let reds = reductions(r.case, &r.params).map_err(|e| failed(e.to_string()))?;
            match out.format {
                Format::Json => {
                    let sols: Vec<Value> = forms
                        .iter()
                        .map(|f| {
                            let mut o = Map::new();
                            o.insert("id".into(), json!(f.id));
                            o.insert("kind".into(), json!(kind_str(f.kind)));
                            o.insert("label".into(), json!(f.label));
                            o.insert("expr".into(), json!(f.expr.to_string()));
                            o.insert("status".into(), json!(status_str(f.status)));
                            if let Some(c) = &f.companion {
                                o.insert("companion".into(), json!(c));
                            }
                            Value::Object(o)
                        })
                        .collect();
                    let ritems: Vec<Value> = reds
                        .iter()
                        .map(|rec| {
                            json!({
                                "id": rec.id,
                                "subalgebra": rec.subalgebra,
                                "psi": rec.psi.to_string(),
                                "u_of_f": rec.u_of_f.to_string(),
                                "ode": rec.ode.to_string(),
                                "known_f": rec.known_f.as_ref().map(|e| e.to_string()),
                            })
                        })
                        .collect();
                    out.emit_json(&json!({
                        "case": r.case.number(),
                        "condition": r.case.condition(),
                        "solutions": sols,
                        "reductions": ritems,
                    }))?;
                }
                Format::Csv => {
                    let mut rows: Vec<Vec<String>> = forms
                        .iter()
                        .map(|f| {
                            vec![
                                "solution".to_string(),
                                f.id.clone(),
                                kind_str(f.kind).to_string(),
                                status_str(f.status).to_string(),
                                f.label.clone(),
                            ]
                        })
                        .collect();
                    rows.extend(reds.iter().map(|rec| {
                        vec![
                            "reduction".to_string(),
                            rec.id.clone(),
                            rec.subalgebra.clone(),
                            status_str(rec.status).to_string(),
                            rec.ode.to_string(),
                        ]
                    }));
                    out.emit_csv(&["section", "id", "kind", "status", "detail"], &rows)?;
                }
            }
            eprintln!(
                "case {}: {} solution forms, {} reductions",
                r.case.number(),
                forms.len(),
                reds.len()
            );
            Ok(EXIT_OK)
        }

        Cmd::Verify {
            params,
            seed,
            speed,
        } => {
            let r = resolve(&params)?;
            let forms = all_forms(r.case, &r.params, speed)?;
            let dom = SampleDomain::standard(seed.resolve());
            let reports: Vec<_> = forms
                .iter()
                .map(|f| residual_entry(f, &r.params, &dom))
                .collect();
            let all_ok = reports.iter().all(|rep| rep.ok());
            match out.format {
                Format::Json => {
                    let items: Vec<Value> = reports
                        .iter()
                        .map(|rep| serde_json::to_value(rep).unwrap())
                        .collect();
                    out.emit_json(&json!({
                        "case": r.case.number(),
                        "seed": dom.seed,
                        "entries": items,
                        "all_ok": all_ok,
                    }))?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = reports
                        .iter()
                        .map(|rep| {
                            vec![
                                rep.id.clone(),
                                rep.points.to_string(),
                                fnum(rep.max_residual),
                                verdict_str(rep.verdict).to_string(),
                                verdict_str(rep.expected).to_string(),
                            ]
                        })
                        .collect();
                    out.emit_csv(
                        &["id", "points", "max_residual", "verdict", "expected"],
                        &rows,
                    )?;
                }
            }
            eprintln!(
                "case {}: {} entries verified, all_ok = {all_ok}",
                r.case.number(),
                reports.len()
            );
            Ok(if all_ok { EXIT_OK } else { EXIT_DISCREPANT })
        }

        Cmd::Audit { params, seed } => {
            let r = resolve(&params)?;
            let report = audit(r.case, &r.params, seed.resolve());
            match out.format {
                Format::Json => out.emit_pretty(&report.to_json())?,
                Format::Csv => {
                    let mut rows = Vec::new();
                    for section in &report.sections {
                        for e in &section.entries {
                            rows.push(vec![
                                section.name.clone(),
                                e.id.clone(),
                                e.points.to_string(),
                                fnum(e.max_residual),
                                verdict_str(e.verdict).to_string(),
                                verdict_str(e.expected).to_string(),
                            ]);
                        }
                    }
                    out.emit_csv(
                        &["section", "id", "points", "max_residual", "verdict", "expected"],
                        &rows,
                    )?;
                }
            }
            eprintln!(
                "audit case {} (seed {}): all_ok = {}",
                report.meta.case, report.meta.seed, report.all_ok
            );
            Ok(if report.all_ok {
                EXIT_OK
            } else {
                EXIT_DISCREPANT
            })
        }

        Cmd::SolveMoc { params, u0, x, t } => {
            let r = resolve(&params)?;
            let u0fn: Expr =
                parse_expr(&u0).map_err(|e| usage(format!("--u0: {e}")))?;
            let parse_list = |label: &str, s: &str| -> Result<Vec<f64>, CliError> {
                s.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| usage(format!("{label}: bad number '{v}'")))
                    })
                    .collect()
            };
            let xs = parse_list("--x", &x)?;
            let ts = parse_list("--t", &t)?;
            let mut queries = Vec::new();
            for &tv in &ts {
                for &xv in &xs {
                    queries.push((xv, tv));
                }
            }
            let sol = solve_ivp(&u0fn, &r.params, &queries).map_err(|e| failed(e.to_string()))?;
            match out.format {
                Format::Json => {
                    let grid: Vec<Value> = sol
                        .grid
                        .iter()
                        .map(|&(x, t, u)| json!({"x": x, "t": t, "u": u}))
                        .collect();
                    out.emit_json(&json!({
                        "case": r.case.number(),
                        "t_valid": if sol.t_valid.is_finite() {
                            json!(sol.t_valid)
                        } else {
                            Value::Null
                        },
                        "grid": grid,
                    }))?;
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = sol
                        .grid
                        .iter()
                        .map(|&(x, t, u)| vec![fnum(x), fnum(t), fnum(u)])
                        .collect();
                    out.emit_csv(&["x", "t", "u"], &rows)?;
                }
            }
            eprintln!("{}", sol.diagnostics);
            Ok(EXIT_OK)
        }
    }
}
