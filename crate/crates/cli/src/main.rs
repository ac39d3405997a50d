use berkcrucial::crucial::{self, crucial_at, ordres_direct, ordres_via_formula, t_potential};
use berkcrucial::degrees::{crucial_slope_local, crucial_slope_profile, in_crucial_range, DegreeData};
use berkcrucial::equidist::{decays_by_degree, default_setup, run_grid, CSV_HEADER, DEFAULT_CAP};
use berkcrucial::fp::fp_points;
use berkcrucial::maps::RationalMap;
use berkcrucial::parse::parse_map;
use berkcrucial::points::{parse_point, BerkPoint};
use berkcrucial::rat::{fmt_q, q};
use berkcrucial::roots::PrecisionPolicy;
use berkcrucial::{selftest, Error, TowerContext};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "berkcrucial", version, about = "Crucial measures and minimal resultant loci of p-adic rational maps")]
struct Cli {
    /// Residue characteristic.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Ramification index of the base field.
    #[arg(long, global = true, default_value_t = 1)]
    e: u32,
    /// Map, e.g. "z^2 + 1/5", "(z^2 - p)/(p z)" or "[c0,c1,c2]".
    #[arg(long, global = true)]
    map: Option<String>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// ordRes_f(S) directly and from the crucial function.
    Ordres {
        #[arg(long)]
        at: String,
    },
    /// Crucial_f(S) and its slopes in the rational directions at S.
    Crucial {
        #[arg(long)]
        at: String,
    },
    /// The minimal resultant locus and the minimum of ordRes.
    Minresloc,
    /// The crucial tree with weights.
    Crucialtree,
    /// The weights w_f.
    Weights,
    /// Potential good reduction.
    Goodred,
    /// Quantitative equidistribution records for n = 1..N.
    Equidist {
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Degree cap for iterates.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Seeded invariant suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn new(err: &Error, input: &Value) -> Self {
        let code = if matches!(err, Error::UnsupportedResidueExtension(_)) { 2 } else { 1 };
        Failure { code, body: json!({"error": kind(err), "message": err.to_string(), "input": input}) }
    }
}

fn kind(err: &Error) -> &'static str {
    match err {
        Error::DivisionByZero => "DivisionByZero",
        Error::NotIntegral(_) => "NotIntegral",
        Error::BadEmbedding(..) => "BadEmbedding",
        Error::NotInValueGroup(..) => "NotInValueGroup",
        Error::UnsupportedResidueExtension(_) => "UnsupportedResidueExtension",
        Error::Degenerate => "Degenerate",
        Error::DegreeCap(..) => "DegreeCap",
        Error::PrecisionExhausted(_) => "PrecisionExhausted",
        Error::NonSeparable(_) => "NonSeparable",
        Error::NotProbability(_) => "NotProbability",
        Error::TrivialTree => "TrivialTree",
        Error::UnsupportedPointType(_) => "UnsupportedPointType",
        Error::CertificationFailed(_) => "CertificationFailed",
        Error::Parse(_) => "Parse",
        Error::Invalid(_) => "Invalid",
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn pts(v: &[BerkPoint]) -> Value {
    Value::Array(v.iter().map(|x| x.to_json()).collect())
}

fn load_map(cli: &Cli, p: u64) -> berkcrucial::Result<RationalMap> {
    TowerContext::new(p, cli.e)?;
    let s = cli.map.as_deref().ok_or_else(|| Error::Invalid("--map is required".into()))?;
    let f = parse_map(p, s)?;
    if f.degree() < 2 {
        return Err(Error::Invalid(format!("degree {} < 2", f.degree())));
    }
    if cli.e == 1 {
        return Ok(f);
    }
    RationalMap::from_polys(&f.num().embed(cli.e), &f.den().embed(cli.e))
}

fn load_point(p: u64, at: &str) -> berkcrucial::Result<BerkPoint> {
    let s = parse_point(p, at)?;
    if !s.is_type_ii() {
        return Err(Error::UnsupportedPointType(s.to_string()));
    }
    Ok(s)
}

fn want(cli: &Cli, allowed: &[Format], default: Format) -> berkcrucial::Result<Format> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::Invalid(format!("format {f:?} is not available for this command")))
    }
}

fn execute(cli: &Cli) -> berkcrucial::Result<(Output, bool)> {
    let policy = PrecisionPolicy::default();
    if let Cmd::Selftest { seed, trials } = cli.cmd {
        want(cli, &[Format::Json], Format::Json)?;
        let checks = selftest::run_all(seed, trials);
        let ok = checks.iter().all(|c| c.passed());
        let body = json!({
            "schema": "selftest-v1",
            "seed": seed,
            "trials": trials,
            "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "passed": ok,
        });
        return Ok((Output::Json(body), ok));
    }
    let p = cli.p.ok_or_else(|| Error::Invalid("--p is required".into()))?;
    let f = load_map(cli, p)?;
    let d = f.degree();
    let out = match &cli.cmd {
        Cmd::Ordres { at } => {
            want(cli, &[Format::Json], Format::Json)?;
            let s = load_point(p, at)?;
            let a = ordres_direct(&f, &s)?;
            let b = ordres_via_formula(&f, &s)?;
            Output::Json(json!({"at": s.to_json(), "direct": fmt_q(&a), "formula": fmt_q(&b), "equal": a == b}))
        }
        Cmd::Crucial { at } => {
            want(cli, &[Format::Json], Format::Json)?;
            let s = load_point(p, at)?;
            let dd = DegreeData::compute(&f, &s)?;
            let mut slopes = Vec::new();
            for v in fp_points(p) {
                let prof = crucial_slope_profile(&f, &s, v)?;
                let local = crucial_slope_local(&dd, v)?;
                slopes.push(json!({
                    "direction": v.map_or("inf".to_string(), |a| a.to_string()),
                    "slope": fmt_q(&prof),
                    "local_formula": fmt_q(&local),
                    "agree": prof == local,
                    "in_range": in_crucial_range(&prof, d),
                }));
            }
            Output::Json(json!({
                "at": s.to_json(),
                "crucial": fmt_q(&crucial_at(&f, &s)?),
                "t_potential": fmt_q(&t_potential(&f, &s)?),
                "fixed": dd.fixed,
                "local_degree": dd.local_degree(),
                "slopes": slopes,
            }))
        }
        Cmd::Minresloc => {
            want(cli, &[Format::Json], Format::Json)?;
            let r = crucial::report(&f, &policy)?;
            let m = &r.minresloc;
            Output::Json(json!({
                "locus": pts(&m.locus),
                "barycenter": pts(&m.barycenter),
                "routes_agree": m.routes_agree(),
                "min": fmt_q(&m.min_value),
                "certified": m.certified,
                "potentially_good": m.potentially_good,
            }))
        }
        Cmd::Crucialtree => {
            let r = crucial::report(&f, &policy)?;
            match want(cli, &[Format::Json, Format::Dot], Format::Dot)? {
                Format::Dot => {
                    let tree = &r.measure.tree;
                    let d1 = q(d as i64 - 1);
                    let dot = tree.to_dot(&|i| {
                        let w = r.measure.nu.mass_at(tree.point(i)) * &d1;
                        if w == q(0) {
                            String::new()
                        } else {
                            format!("w={}", fmt_q(&w))
                        }
                    });
                    Output::Text(dot)
                }
                _ => Output::Json(r.to_json(&f)),
            }
        }
        Cmd::Weights => {
            let r = crucial::report(&f, &policy)?;
            let d1 = q(d as i64 - 1);
            let ws = r.measure.nu.sorted();
            let total = ws.iter().fold(q(0), |acc, (_, m)| acc + m * &d1);
            match want(cli, &[Format::Json, Format::Csv], Format::Json)? {
                Format::Csv => {
                    let mut s = String::from("point,w\n");
                    for (x, m) in &ws {
                        s.push_str(&format!("{},{}\n", x, fmt_q(&(m * &d1))));
                    }
                    Output::Text(s)
                }
                _ => Output::Json(json!({
                    "weights": r.weights_json(d),
                    "total": fmt_q(&total),
                    "degree_minus_one": d - 1,
                    "matches_formula": r.measure.checks_pass(),
                })),
            }
        }
        Cmd::Goodred => {
            want(cli, &[Format::Json], Format::Json)?;
            let r = crucial::report(&f, &policy)?;
            let m = &r.minresloc;
            let dd = DegreeData::compute(&f, &m.locus[0])?;
            Output::Json(json!({
                "potentially_good": m.potentially_good,
                "min": fmt_q(&m.min_value),
                "locus": pts(&m.locus),
                "reduction_degree": dd.local_degree(),
            }))
        }
        Cmd::Equidist { n, cap } => {
            let format = want(cli, &[Format::Json, Format::Csv], Format::Json)?;
            let r = crucial::report(&f, &policy)?;
            let setup = default_setup(&f, &r.minresloc.locus[0], &policy)?;
            let recs = run_grid(&f, &setup, *n, *cap, &policy)?;
            let ok = recs.iter().all(|x| x.holds());
            let out = match format {
                Format::Csv => {
                    let mut s = format!("{CSV_HEADER}\n");
                    for x in &recs {
                        s.push_str(&x.csv_row());
                        s.push('\n');
                    }
                    Output::Text(s)
                }
                _ => Output::Json(json!({
                    "schema": "equidist-v1",
                    "p": p,
                    "degree": d,
                    "base": setup.base.to_json(),
                    "gamma": setup.gamma.to_json(),
                    "records": recs.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
                    "all_hold": ok,
                    "decays_by_degree": decays_by_degree(&recs, d),
                })),
            };
            return Ok((out, ok));
        }
        Cmd::Selftest { .. } => unreachable!(),
    };
    Ok((out, true))
}

fn input_json(cli: &Cli) -> Value {
    let at = match &cli.cmd {
        Cmd::Ordres { at } | Cmd::Crucial { at } => Some(at.clone()),
        _ => None,
    };
    json!({"p": cli.p, "e": cli.e, "map": cli.map, "at": at})
}

fn emit(cli: &Cli, out: Output) -> std::io::Result<()> {
    let text = match out {
        Output::Json(v) => format!("{}\n", serde_json::to_string_pretty(&v).unwrap()),
        Output::Text(s) => s,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = execute(&cli).map_err(|e| Failure::new(&e, &input_json(&cli)));
    match result {
        Ok((out, ok)) => {
            if let Err(e) = emit(&cli, out) {
                eprintln!("{}", json!({"error": "Io", "message": e.to_string(), "input": input_json(&cli)}));
                return ExitCode::from(1);
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(fail) => {
            eprintln!("{}", serde_json::to_string_pretty(&fail.body).unwrap());
            ExitCode::from(fail.code)
        }
    }
}
