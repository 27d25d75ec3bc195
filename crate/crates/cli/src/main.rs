use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gstieltjes::catalog::{make_model, parse_custom_model, parse_model_name, EntireModel, ModelKind};
use gstieltjes::piecewise::{build_phi, build_rho, certify_nonnegative, PiecewisePolynomial};
use gstieltjes::rational::{self, format_rational, parse_rational, parse_rational_list};
use gstieltjes::representations::{verify_identity, IdentityId, RatioSpec, VerificationReport};
use gstieltjes::sequences::{is_weak_supermajorisation, power_sum_delta, pte_degree, pte_search_with, PteSearchOptions, SequencePair};
use gstieltjes::vertical::{parse_vertical_identity, verify_vertical, VerticalModel};
use gstieltjes::{Error, Rational};

#[derive(Parser)]
#[command(name = "gstieltjes", version, about = "Stieltjes representations of log-ratios of entire functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sequence-pair properties.
    Seq {
        #[command(subcommand)]
        action: SeqAction,
    },
    /// The density rho_ell of a pair.
    Rho {
        #[command(subcommand)]
        action: RhoAction,
    },
    /// The density phi_ell of a pair over a model's zeros.
    Phi {
        #[command(subcommand)]
        action: PhiAction,
    },
    /// Prouhet–Tarry–Escott solutions.
    Pte {
        #[command(subcommand)]
        action: PteAction,
    },
    /// Evaluate an identity on a grid and emit a JSON report.
    Verify(VerifyArgs),
    /// Data behind figures.
    Figure {
        #[command(subcommand)]
        action: FigureAction,
    },
}

#[derive(Subcommand)]
enum SeqAction {
    Check(PairArgs),
}

#[derive(Subcommand)]
enum RhoAction {
    /// Exact samples of rho_ell on [min - 1, max + 1].
    Emit {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1)]
        ell: u32,
        #[arg(long, default_value = "1/100")]
        step: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact sign certificate of rho_ell.
    Certify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1)]
        ell: u32,
        /// Points at which to report exact values.
        #[arg(long)]
        at: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum PhiAction {
    /// Exact samples of phi_ell on [0, t_max].
    Emit {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        ell: u32,
        #[arg(long, default_value = "20")]
        t_max: String,
        #[arg(long, default_value = "1/20")]
        step: String,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum PteAction {
    /// Canonical pairs of length n with entries in 0..=max and degree >= ell.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        allow_repeats: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum FigureAction {
    /// rho_1 and rho_2 of a pair side by side.
    RhoPair {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "1/100")]
        step: String,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct PairArgs {
    /// Comma-separated rationals, e.g. 0,3/2,3/2
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// reciprocal_gamma, reciprocal_gamma_shifted, barnes_g, barnes_g_shifted,
    /// multiple_gamma:N, finite:l1,l2,...
    #[arg(long)]
    model: Option<String>,
    /// JSON model description.
    #[arg(long, conflicts_with = "model")]
    model_file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Thm1,
    Thm2,
    Thm3,
    Barnes,
    Prop25,
    Lemma24,
    Vertical,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    identity: Identity,
    /// Pair (required except for the single-function vertical identities).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    ell: Option<u32>,
    /// N for `barnes` (model defaults to multiple_gamma:N).
    #[arg(long)]
    n: Option<u32>,
    /// prop31, cor32(a), cor33(a), prop34, cor35 for `vertical`.
    #[arg(long)]
    which: Option<String>,
    #[arg(long, default_value = "1,2.5,10", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

enum Failure {
    Parse(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parse() {
            Failure::Parse(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn qnum(q: &Rational) -> String {
    num(rational::to_f64(q))
}

fn write_out(out: &OutArgs, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn pair_of(a: &str, b: &str) -> CliResult<SequencePair> {
    Ok(SequencePair::parse(a, b)?)
}

fn load_model(args: &ModelArgs, default: Option<ModelKind>) -> CliResult<EntireModel> {
    if let Some(path) = &args.model_file {
        let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;
        return Ok(parse_custom_model(&text)?);
    }
    let kind = match (&args.model, default) {
        (Some(name), _) => parse_model_name(name)?,
        (None, Some(kind)) => kind,
        (None, None) => return Err(Failure::Parse("--model or --model-file is required".into())),
    };
    Ok(make_model(&kind)?)
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let grid: Vec<f64> = parse_rational_list(s)?.iter().map(rational::to_f64).collect();
    if grid.is_empty() {
        return Err(Failure::Parse("grid is empty".into()));
    }
    Ok(grid)
}

fn sample_range(pair: &SequencePair) -> (Rational, Rational) {
    (pair.min_entry() - rational::int(1), pair.max_entry() + rational::int(1))
}

fn sample(pp: &PiecewisePolynomial, lo: &Rational, hi: &Rational, step: &str) -> CliResult<Vec<(Rational, Rational)>> {
    let step = parse_rational(step)?;
    Ok(pp.sample(lo, hi, &step)?)
}

fn seq_check(p: &PairArgs) -> CliResult<bool> {
    let pair = pair_of(&p.a, &p.b)?;
    let pte = pte_degree(&pair);
    let deltas: Vec<String> = (1..=pair.len() as u32 + 1).map(|m| format_rational(&power_sum_delta(&pair, m))).collect();
    print!(
        "{}",
        json_text(&json!({
            "a": pair.a().iter().map(format_rational).collect::<Vec<_>>(),
            "b": pair.b().iter().map(format_rational).collect::<Vec<_>>(),
            "weak_supermajorisation": is_weak_supermajorisation(&pair),
            "pte_degree": pte,
            "power_sum_deltas": deltas,
        }))
    );
    Ok(true)
}

fn rho_emit(p: &PairArgs, ell: u32, step: &str, out: &OutArgs) -> CliResult<bool> {
    let pair = pair_of(&p.a, &p.b)?;
    let rho = build_rho(&pair, ell)?;
    let (lo, hi) = sample_range(&pair);
    let samples = sample(&rho, &lo, &hi, step)?;
    let text = if out.format == Some(Format::Json) {
        json_text(&json!(samples.iter().map(|(t, v)| json!({"t": format_rational(t), "rho": format_rational(v)})).collect::<Vec<_>>()))
    } else {
        let mut s = format!("t,rho{ell}\n");
        for (t, v) in &samples {
            let _ = writeln!(s, "{},{}", qnum(t), qnum(v));
        }
        s
    };
    write_out(out, &text)?;
    Ok(true)
}

fn rho_certify(p: &PairArgs, ell: u32, at: Option<&str>, out: &OutArgs) -> CliResult<bool> {
    let pair = pair_of(&p.a, &p.b)?;
    let rho = build_rho(&pair, ell)?;
    let cert = certify_nonnegative(&rho);
    let vanishes_from = if rho.unbounded_part().is_none() { rho.breakpoints().last().map(format_rational) } else { None };
    let values = match at {
        Some(list) => parse_rational_list(list)?
            .iter()
            .map(|t| json!({"t": format_rational(t), "value": format_rational(&rho.eval(t))}))
            .collect(),
        None => Vec::new(),
    };
    let text = json_text(&json!({
        "ell": ell,
        "a": pair.a().iter().map(format_rational).collect::<Vec<_>>(),
        "b": pair.b().iter().map(format_rational).collect::<Vec<_>>(),
        "certificate": cert,
        "vanishes_from": vanishes_from,
        "values": values,
    }));
    write_out(out, &text)?;
    Ok(true)
}

fn phi_emit(p: &PairArgs, model: &ModelArgs, ell: u32, t_max: &str, step: &str, out: &OutArgs) -> CliResult<bool> {
    let pair = pair_of(&p.a, &p.b)?;
    let model = load_model(model, None)?;
    let t_max = parse_rational(t_max)?;
    let phi = build_phi(&pair, ell, &model.zeros, &t_max)?;
    let samples = sample(&phi, &rational::int(0), &t_max, step)?;
    let text = if out.format == Some(Format::Json) {
        json_text(&json!(samples.iter().map(|(t, v)| json!({"t": format_rational(t), "phi": format_rational(v)})).collect::<Vec<_>>()))
    } else {
        let mut s = String::from("t,phi\n");
        for (t, v) in &samples {
            let _ = writeln!(s, "{},{}", qnum(t), qnum(v));
        }
        s
    };
    write_out(out, &text)?;
    Ok(true)
}

fn pte_search_cmd(n: usize, max: u32, ell: u32, allow_repeats: bool, out: &OutArgs) -> CliResult<bool> {
    let found = pte_search_with(n, max, ell, PteSearchOptions { allow_repeats })?;
    let text = if out.format == Some(Format::Csv) {
        let mut s = String::from("a,b,pte_degree\n");
        for p in &found {
            let join = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(" ");
            let _ = writeln!(s, "{},{},{}", join(p.a()), join(p.b()), pte_degree(p));
        }
        s
    } else {
        let list: Vec<_> = found
            .iter()
            .map(|p| {
                json!({
                    "a": p.a().iter().map(format_rational).collect::<Vec<_>>(),
                    "b": p.b().iter().map(format_rational).collect::<Vec<_>>(),
                    "pte_degree": pte_degree(p),
                })
            })
            .collect();
        json_text(&json!(list))
    };
    write_out(out, &text)?;
    Ok(true)
}

fn figure_rho_pair(p: &PairArgs, step: &str, out: &OutArgs) -> CliResult<bool> {
    let pair = pair_of(&p.a, &p.b)?;
    let (lo, hi) = sample_range(&pair);
    let r1 = sample(&build_rho(&pair, 1)?, &lo, &hi, step)?;
    let r2 = sample(&build_rho(&pair, 2)?, &lo, &hi, step)?;
    let mut s = String::from("t,rho1,rho2\n");
    for ((t, v1), (_, v2)) in r1.iter().zip(&r2) {
        let _ = writeln!(s, "{},{},{}", qnum(t), qnum(v1), qnum(v2));
    }
    write_out(out, &s)?;
    Ok(true)
}

fn report_text(report: &VerificationReport, format: Option<Format>) -> String {
    if format == Some(Format::Csv) {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut s = String::from("x,direct,oracle,laplace,stieltjes,expansion,max_rel_dev,pass\n");
        for r in &report.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                num(r.x),
                num(r.direct),
                opt(r.oracle),
                opt(r.laplace),
                opt(r.stieltjes),
                opt(r.expansion),
                num(r.max_rel_dev),
                r.pass
            );
        }
        s
    } else {
        let mut s = report.to_json();
        s.push('\n');
        s
    }
}

fn verify(args: &VerifyArgs) -> CliResult<bool> {
    let grid = parse_grid(&args.grid)?;
    let need_pair = || -> CliResult<SequencePair> {
        match (&args.a, &args.b) {
            (Some(a), Some(b)) => pair_of(a, b),
            _ => Err(Failure::Parse("--a and --b are required".into())),
        }
    };
    let need_ell = || args.ell.ok_or_else(|| Failure::Parse("--ell is required".into()));
    let report = match args.identity {
        Identity::Vertical => {
            let which = args.which.as_deref().ok_or_else(|| Failure::Parse("--which is required".into()))?;
            let pair = if which.trim().starts_with("prop34") || which.trim().starts_with("cor35") { Some(need_pair()?) } else { None };
            let which = parse_vertical_identity(which, pair)?;
            let model = load_model(&args.model, None)?;
            verify_vertical(&VerticalModel::new(model)?, &which, &grid, args.tol)?
        }
        Identity::Barnes => {
            let n = args.n.ok_or_else(|| Failure::Parse("--n is required".into()))?;
            let model = load_model(&args.model, Some(ModelKind::MultipleGamma(n)))?;
            verify_identity(&RatioSpec::new(model, need_pair()?), IdentityId::CorBarnes(n), &grid, args.tol)?
        }
        other => {
            let id = match other {
                Identity::Thm1 => IdentityId::Thm1,
                Identity::Thm2 => IdentityId::Thm2,
                Identity::Thm3 => IdentityId::Thm3(need_ell()?),
                Identity::Prop25 => IdentityId::Prop25(need_ell()?),
                Identity::Lemma24 => IdentityId::Lemma24(need_ell()?),
                Identity::Barnes | Identity::Vertical => unreachable!(),
            };
            let model = load_model(&args.model, None)?;
            verify_identity(&RatioSpec::new(model, need_pair()?), id, &grid, args.tol)?
        }
    };
    write_out(&args.out, &report_text(&report, args.out.format))?;
    Ok(report.pass)
}

fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Seq { action: SeqAction::Check(p) } => seq_check(p),
        Command::Rho { action: RhoAction::Emit { pair, ell, step, out } } => rho_emit(pair, *ell, step, out),
        Command::Rho { action: RhoAction::Certify { pair, ell, at, out } } => rho_certify(pair, *ell, at.as_deref(), out),
        Command::Phi { action: PhiAction::Emit { pair, model, ell, t_max, step, out } } => phi_emit(pair, model, *ell, t_max, step, out),
        Command::Pte { action: PteAction::Search { n, max, ell, allow_repeats, out } } => pte_search_cmd(*n, *max, *ell, *allow_repeats, out),
        Command::Verify(args) => verify(args),
        Command::Figure { action: FigureAction::RhoPair { pair, step, out } } => figure_rho_pair(pair, step, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
