mod config;
mod input;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use confcoh::acceptance;
use confcoh::ainfty::{build_morphism, hypothesis_check, verify, DgaJson, FiniteDga, IdealData};
use confcoh::celie::{compare_cf_ce_bounded, CeError};
use confcoh::cfcd::{
    cd_complex, cf_complex, characters, e1_page, invariants_dims, pi_k_direct, total_cohomology, CfcdError, CfcdReport, Which,
};
use confcoh::exactalg::Ring;
use confcoh::partitions::{join_closure, PartitionError, UpSetSpec};
use confcoh::posetcx::{order_complex, Poset, Variant};
use confcoh::symfunc::{kequals_series, Laurent};
use serde_json::json;

use config::Limits;
use input::{load_algebra, read_json, UpsetArg};

#[derive(Parser, Debug)]
#[command(name = "confcoh", version, about = "Exact compactly supported cohomology of generalized configuration spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// algebra or dg algebra JSON
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    k: Option<usize>,
    /// coefficient ring; defaults to the input's ring (Z for `poset`)
    #[arg(long, global = true, value_enum)]
    ring: Option<RingArg>,
    #[arg(long, global = true, value_enum, default_value = "CF")]
    mode: ModeArg,
    /// full, k-equals:K or file:PATH
    #[arg(long, global = true, default_value = "full")]
    upset: UpsetArg,
    #[arg(long, global = true)]
    characters: bool,
    #[arg(long, global = true)]
    invariants: bool,
    /// truncation arity for `series`
    #[arg(long, global = true)]
    max_arity: Option<usize>,
    /// write the JSON report here (atomically) instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// cap on worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// lift the configured scale guards
    #[arg(long, global = true)]
    allow_large: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// cohomology of CF(U, A) or CD(U, A)
    Cohomology {
        /// include the E1 page
        #[arg(long)]
        e1: bool,
    },
    /// E1 page of the chain-maximum filtration
    E1,
    /// cohomology of an order complex of the join closure of U with 0̂
    Poset {
        #[arg(long, value_enum, default_value = "hatcheck")]
        variant: VariantArg,
    },
    /// k-equals generating series in the Schur basis
    Series {
        /// Laurent polynomial in t, e.g. "t^2" or "-t + t^3"
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// compare CF(Πₙ∖{0̂}, A) with the Chevalley–Eilenberg complex
    CeCompare,
    /// build the A∞ morphism of a dga with ideal and check its relations
    AinftyCheck {
        /// built-in fixture used when --input is absent
        #[arg(long, value_enum, default_value = "three-dim")]
        fixture: FixtureArg,
    },
    /// run the ten acceptance checks
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RingArg {
    #[value(name = "Z", alias = "z")]
    Z,
    #[value(name = "Q", alias = "q")]
    Q,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    #[value(name = "CF", alias = "cf")]
    Cf,
    #[value(name = "CD", alias = "cd")]
    Cd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Plain,
    Hat,
    Check,
    Hatcheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FixtureArg {
    ThreeDim,
    FourDim,
    /// the four-dimensional fixture with the homotopy's sign flipped
    FourDimFlipped,
}

impl From<RingArg> for Ring {
    fn from(r: RingArg) -> Ring {
        match r {
            RingArg::Z => Ring::Integers,
            RingArg::Q => Ring::Rationals,
        }
    }
}

/// A request above a configured or built-in size bound.
#[derive(Debug)]
struct ScaleError(String);

impl fmt::Display for ScaleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ScaleError {}

fn guard(cli: &Cli, what: &str, value: usize, limit: usize) -> anyhow::Result<()> {
    if value > limit && !cli.allow_large {
        return Err(ScaleError(format!("{what} = {value} exceeds the configured limit {limit}; pass --allow-large to proceed")).into());
    }
    Ok(())
}

fn is_scale(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<ScaleError>()
            || matches!(e.downcast_ref::<PartitionError>(), Some(PartitionError::TooLarge { .. }))
            || matches!(e.downcast_ref::<CeError>(), Some(CeError::ScaleBound { .. }))
            || matches!(e.downcast_ref::<CfcdError>(), Some(CfcdError::Partition(PartitionError::TooLarge { .. })))
    })
}

struct Report {
    json: String,
    /// terminal lines printed when the JSON goes to a file
    summary: Vec<String>,
    /// the JSON still goes to stdout without --output
    json_to_stdout: bool,
    failure: Option<String>,
}

impl Report {
    fn new<T: serde::Serialize>(value: &T, summary: Vec<String>) -> anyhow::Result<Report> {
        Ok(Report {
            json: output::to_json(value)?,
            summary,
            json_to_stdout: true,
            failure: None,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 1),
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            return fail("internal", &e.to_string(), 1);
        }
    }
    match run(&cli) {
        Ok(report) => emit(&cli, report),
        Err(e) if is_scale(&e) => fail("scale_bound", &format!("{e:#}"), 2),
        Err(e) => fail("validation", &format!("{e:#}"), 1),
    }
}

fn emit(cli: &Cli, report: Report) -> ExitCode {
    match &cli.output {
        Some(path) => {
            if let Err(e) = output::write_atomic(path, &report.json) {
                return fail("io", &format!("{e:#}"), 1);
            }
            for line in &report.summary {
                println!("{line}");
            }
        }
        None if report.json_to_stdout => print!("{}", report.json),
        None => {
            for line in &report.summary {
                println!("{line}");
            }
        }
    }
    match report.failure {
        Some(msg) => fail("check_failed", &msg, 1),
        None => ExitCode::SUCCESS,
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let limits = Limits::load()?;
    match &cli.command {
        Command::Cohomology { e1 } => cmd_cohomology(cli, &limits, *e1),
        Command::E1 => cmd_cohomology(cli, &limits, true),
        Command::Poset { variant } => cmd_poset(cli, &limits, *variant),
        Command::Series { p } => cmd_series(cli, &limits, p),
        Command::CeCompare => cmd_ce_compare(cli, &limits),
        Command::AinftyCheck { fixture } => cmd_ainfty(cli, &limits, *fixture),
        Command::Selftest => cmd_selftest(),
    }
}

fn cmd_cohomology(cli: &Cli, limits: &Limits, with_e1: bool) -> anyhow::Result<Report> {
    let u = cli.upset.build(cli.n)?;
    let n = u.n();
    guard(cli, "n", n, limits.max_n)?;
    let path = cli.input.as_ref().context("--input is required")?;
    let ring_arg = cli.ring.map(Ring::from);
    let a = load_algebra(path, n, ring_arg)?;
    let ring = ring_arg.unwrap_or(a.ring);
    let (which, cx) = match cli.mode {
        ModeArg::Cf => (Which::CF, cf_complex(&u, a, ring)?),
        ModeArg::Cd => (Which::CD, cd_complex(&u, a, ring)?),
    };
    let h = total_cohomology(&cx);
    let chars = if cli.characters || cli.invariants {
        if ring != Ring::Rationals {
            bail!("characters and invariants are computed over Q; pass --ring Q");
        }
        Some(characters(&cx)?)
    } else {
        None
    };
    let invariants = match (&chars, cli.invariants) {
        (Some(c), true) => Some(invariants_dims(c).map_err(anyhow::Error::msg)?),
        _ => None,
    };
    let e1 = if with_e1 { Some(e1_page(&cx)?.entries) } else { None };
    let summary = h
        .degrees
        .iter()
        .filter(|d| d.free_rank > 0 || !d.torsion.is_empty())
        .map(|d| format!("H^{} free rank {} torsion {:?}", d.degree, d.free_rank, d.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()))
        .collect();
    let report = CfcdReport {
        n,
        upset: UpSetSpec::from(&u),
        mode: which,
        ring,
        cohomology: h.degrees,
        characters: if cli.characters { chars.as_ref().map(|c| c.to_json()) } else { None },
        invariants,
        e1,
    };
    Report::new(&report, summary)
}

fn cmd_poset(cli: &Cli, limits: &Limits, variant: VariantArg) -> anyhow::Result<Report> {
    let u = cli.upset.build(cli.n)?;
    let n = u.n();
    guard(cli, "n", n, limits.max_n)?;
    let ring = cli.ring.map(Ring::from).unwrap_or(Ring::Integers);
    let variant = match variant {
        VariantArg::Plain => Variant::Plain,
        VariantArg::Hat => Variant::Hat,
        VariantArg::Check => Variant::Check,
        VariantArg::Hatcheck => Variant::HatCheck,
    };
    let elements = join_closure(&u, true).elements;
    let oc = order_complex(&Poset::from_partitions(&elements), variant, ring)?;
    let h = confcoh::exactalg::cohomology(&oc.complex);
    let chars = if cli.characters {
        // the join closure of the k-equals upset (k = 2 for the full one)
        // with 0̂ is Π_{(k,1^{n-k})}; its characters come from pi_k_direct
        let k = match cli.upset {
            UpsetArg::Full => 2,
            UpsetArg::KEquals(k) => k,
            UpsetArg::File(_) => bail!("--characters needs --upset full or k-equals:K"),
        };
        if variant != Variant::HatCheck || ring != Ring::Rationals {
            bail!("--characters needs --variant hatcheck and --ring Q");
        }
        Some(pi_k_direct(k, n)?.to_json())
    } else {
        None
    };
    let summary = h
        .degrees
        .iter()
        .filter(|d| d.free_rank > 0 || !d.torsion.is_empty())
        .map(|d| {
            let mut s = format!("H̃^{} rank {}", d.degree, d.free_rank);
            if !d.torsion.is_empty() {
                s.push_str(&format!(" torsion {:?}", d.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()));
            }
            s
        })
        .collect();
    let mut value = json!({
        "n": n,
        "upset": UpSetSpec::from(&u),
        "variant": variant,
        "ring": ring,
        "elements": elements.len(),
        "cohomology": h.degrees,
    });
    if let Some(c) = chars {
        value["characters"] = serde_json::to_value(c)?;
    }
    Report::new(&value, summary)
}

fn cmd_series(cli: &Cli, limits: &Limits, p: &str) -> anyhow::Result<Report> {
    let k = cli.k.context("--k is required")?;
    let max_arity = cli.max_arity.context("--max-arity is required")?;
    guard(cli, "max-arity", max_arity, limits.max_series_arity)?;
    let p = Laurent::parse(p)?;
    let f = kequals_series(&p, k, max_arity)?;
    let mut report = Report::new(&f.to_json(), f.render_schur().lines().map(String::from).collect())?;
    report.json_to_stdout = false;
    Ok(report)
}

fn cmd_ce_compare(cli: &Cli, limits: &Limits) -> anyhow::Result<Report> {
    let n = cli.n.context("--n is required")?;
    guard(cli, "n", n, limits.max_n)?;
    let bound = if cli.allow_large { n.max(limits.ce_bound) } else { limits.ce_bound };
    let path = cli.input.as_ref().context("--input is required")?;
    let a = load_algebra(path, n, Some(Ring::Rationals))?;
    let r = compare_cf_ce_bounded(a, n, bound)?;
    let verdict = if r.passed() { "match" } else { "mismatch" };
    let mut lines = vec![format!("n={n}: {verdict}")];
    lines.extend(r.degrees.iter().map(|d| format!("degree {}: CF {} CE {}", d.degree, d.cf, d.ce)));
    let mut report = Report::new(&r, lines)?;
    if !r.passed() {
        report.failure = Some(format!("CF and CE differ at n={n}"));
    }
    Ok(report)
}

fn cmd_ainfty(cli: &Cli, limits: &Limits, fixture: FixtureArg) -> anyhow::Result<Report> {
    let max_n = cli.n.unwrap_or(6);
    guard(cli, "n", max_n, limits.ainfty_max_n)?;
    let (a, ideal, flip) = match &cli.input {
        Some(path) => {
            let j: DgaJson = serde_json::from_value(read_json(path)?).context("malformed dga input")?;
            let (a, ideal) = j.to_parts()?;
            (a, ideal, false)
        }
        None => match fixture {
            FixtureArg::ThreeDim => (FiniteDga::three_dim_example(), IdealData { basis: vec![2] }, false),
            FixtureArg::FourDim => (FiniteDga::four_dim_example(), IdealData { basis: vec![1, 2, 3] }, false),
            FixtureArg::FourDimFlipped => (FiniteDga::four_dim_example(), IdealData { basis: vec![1, 2, 3] }, true),
        },
    };
    a.validate()?;
    ideal.validate(&a)?;
    let hyp = hypothesis_check(&a, &ideal)?;
    if !hyp.passed() {
        let mut report = Report::new(&json!({ "hypothesis": hyp }), vec!["hypotheses fail".into()])?;
        report.failure = Some(format!("hypotheses fail: {}", hyp.failures.join("; ")));
        return Ok(report);
    }
    let mut m = build_morphism(&a, &ideal)?;
    if flip {
        m = m.with_flipped_g();
    }
    let v = verify(&m, max_n);
    let line = match &v.first_failure {
        None => format!("relations hold up to n={max_n} ({} tuples)", v.tuples_checked),
        Some((n, t)) => format!("relation fails at n={n}, classes {t:?}"),
    };
    let mut report = Report::new(&json!({ "hypothesis": hyp, "verify": v }), vec![line.clone()])?;
    if !v.passed() {
        report.failure = Some(line);
    }
    Ok(report)
}

fn cmd_selftest() -> anyhow::Result<Report> {
    let results = acceptance::run_all();
    let lines: Vec<String> = results.iter().map(|r| r.to_string()).collect();
    let value: Vec<_> = results
        .iter()
        .map(|r| json!({ "id": r.id, "title": r.title, "passed": r.passed, "detail": r.detail }))
        .collect();
    let mut report = Report::new(&value, lines)?;
    report.json_to_stdout = false;
    if let Some(r) = results.iter().find(|r| !r.passed) {
        report.failure = Some(format!("criterion {} failed: {}", r.id, r.detail));
    }
    Ok(report)
}
