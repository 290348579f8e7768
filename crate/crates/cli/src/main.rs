mod output;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use modtrace::cache::TraceCache;
use modtrace::cmnum::PrecisionContext;
use modtrace::etaq::{
    e4_series, eisenstein_e2n, eta_quotient_series, eta_series, hauptmodul_series, theta0_series, HauptmodulRecipe,
};
use modtrace::faber::faber;
use modtrace::identities::{
    verify_eisenstein, verify_kaneko, verify_split_identity, verify_hauptmodul_coefficients, verify_fricke_coefficients,
    verify_u_relations, VerificationReport,
};
use modtrace::quadforms::{
    classes_gamma0, evaluation_form, heegner_point, scan_gamma0_labels, valid_residues, FormClass,
};
use modtrace::series::SeriesJson;
use modtrace::traces::{admissible, trace_table, trace_unstarred, TraceTable};
use modtrace::{Error, Exponent, HauptmodulId, QExpansion, SUPPORTED_LEVELS};

use output::{render, Format, Tabular};

#[derive(Parser)]
#[command(name = "modtrace", version, about = "Hauptmoduln, Heegner-point traces and their coefficient identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Print a q-expansion with exact coefficients through q^n_max.
    Expand,
    /// Print the Faber polynomial phi_m of the selected hauptmodul.
    Faber,
    /// List Gamma_0(N)-classes of Heegner forms for every admissible d <= d_max.
    Classlist,
    /// Compute the trace table t_m(d), t_m*(d) for d <= d_max.
    Trace,
    /// Check coefficient identities; exits with status 1 if any check fails.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Hauptmodul,
    EtaQuotient,
    Eisenstein,
    Theta,
    Faber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Identity {
    /// `2n c_n` of `j_N` against starred trace sums plus divisor-sum terms.
    #[value(alias = "theorem1-part1")]
    HauptmodulCoefficients,
    /// `2n c_n` of `j_N*` against alternating starred trace sums.
    #[value(alias = "theorem1-part2")]
    FrickeCoefficients,
    Kaneko,
    Eisenstein,
    URelations,
    #[value(name = "split-identity")]
    Split,
    All,
}

#[derive(Args)]
struct Options {
    /// Level N, one of 1, 2, 3, 5, 6, 7, 10, 13.
    #[arg(long, global = true, default_value_t = 1)]
    level: u32,
    /// Use the Fricke-group hauptmodul j_N*.
    #[arg(long, global = true)]
    starred: bool,
    /// Largest coefficient index n.
    #[arg(long, global = true, allow_hyphen_values = true)]
    n_max: Option<i64>,
    /// Largest discriminant d.
    #[arg(long, global = true)]
    d_max: Option<i64>,
    /// Residue h modulo 2N; all valid residues when absent.
    #[arg(long, global = true, allow_hyphen_values = true)]
    h: Option<i64>,
    /// Faber index m.
    #[arg(long, global = true, default_value_t = 2)]
    m: u32,
    #[arg(long, global = true, default_value_t = 256)]
    precision_bits: u32,
    /// Series truncation: exponents strictly below this bound. Overrides --n-max for expand.
    #[arg(long, global = true)]
    trunc: Option<i64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Directory for cached trace tables.
    #[arg(long, global = true, env = "MODTRACE_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Cross-check every class enumeration against a bounded scan.
    #[arg(long, global = true)]
    paranoid: bool,
    /// Report timings and cache use on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[arg(long, global = true, value_enum, default_value_t = Identity::All)]
    identity: Identity,
    #[arg(long, global = true, value_enum, default_value_t = Target::Hauptmodul)]
    target: Target,
}

/// Validated run configuration.
struct Config {
    level: u32,
    starred: bool,
    n_max: Option<i64>,
    d_max: Option<i64>,
    h: Option<i64>,
    m: u32,
    ctx: PrecisionContext,
    trunc: Option<i64>,
    format: Format,
    cache: Option<TraceCache>,
    paranoid: bool,
    verbose: bool,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedLevel(_)
            | Error::InvalidArgument(_)
            | Error::BadDiscriminant(_)
            | Error::BadResidue { .. }
            | Error::PrecisionTooLow(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

impl Config {
    fn from_options(o: Options) -> Outcome<Self> {
        if !SUPPORTED_LEVELS.contains(&o.level) {
            return Err(Error::UnsupportedLevel(o.level).into());
        }
        if let Some(n) = o.n_max {
            if n < -1 {
                return Err(Failure::Usage(format!("--n-max must be at least -1, got {n}")));
            }
        }
        if let Some(d) = o.d_max {
            if d < 0 {
                return Err(Failure::Usage(format!("--d-max must be nonnegative, got {d}")));
            }
        }
        if o.m == 0 {
            return Err(Failure::Usage("--m must be positive".into()));
        }
        Ok(Config {
            level: o.level,
            starred: o.starred,
            n_max: o.n_max,
            d_max: o.d_max,
            h: o.h,
            m: o.m,
            ctx: PrecisionContext::new(o.precision_bits)?,
            trunc: o.trunc,
            format: o.format,
            cache: o.cache_dir.map(TraceCache::new),
            paranoid: o.paranoid,
            verbose: o.verbose,
        })
    }

    fn log(&self, msg: impl FnOnce() -> String) {
        if self.verbose {
            eprintln!("{}", msg());
        }
    }

    fn id(&self) -> Outcome<HauptmodulId> {
        Ok(HauptmodulId::new(self.level, self.starred)?)
    }

    fn table(&self, level: u32, d_max: i64) -> Outcome<TraceTable> {
        if self.paranoid {
            cross_check_classes(level, d_max)?;
        }
        let start = Instant::now();
        let table = match &self.cache {
            Some(cache) => {
                let (t, hit) = cache.get_or_compute(level, self.m, d_max, &self.ctx)?;
                self.log(|| format!("cache {} in {}", if hit { "hit" } else { "miss" }, cache.dir().display()));
                t
            }
            None => trace_table(level, self.m, d_max, &self.ctx)?,
        };
        self.log(|| format!("trace table N = {level}, d <= {d_max}: {:.3}s", start.elapsed().as_secs_f64()));
        Ok(table)
    }
}

/// Compares class labels from the coset enumeration with a bounded scan.
fn cross_check_classes(level: u32, d_max: i64) -> Outcome {
    for d in (1..=d_max).filter(|&d| admissible(d, level)) {
        for h in valid_residues(d, level) {
            let found: BTreeSet<_> = classes_gamma0(d, level, h)?.into_iter().map(|c| c.label).collect();
            let scanned = scan_gamma0_labels(d, level, h, 2)?;
            if found != scanned {
                return Err(Failure::Numeric(format!(
                    "class enumeration disagrees with bounded scan at N = {level}, d = {d}, h = {h}"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ExpandOutput {
    series: String,
    level: u32,
    #[serde(flatten)]
    data: SeriesJson,
}

fn cmd_expand(cfg: &Config, target: Target) -> Outcome<String> {
    let trunc = cfg.trunc.unwrap_or(cfg.n_max.unwrap_or(10) + 1);
    let id = cfg.id()?;
    let (name, series): (String, QExpansion) = match target {
        Target::Hauptmodul => (id.to_string(), hauptmodul_series(id, trunc)?),
        Target::EtaQuotient => match id.recipe() {
            HauptmodulRecipe::KleinJ => ("eta^24".into(), eta_series(Exponent::from_integer(trunc))?.pow_int(24)?),
            HauptmodulRecipe::Eta { quotient, .. } => {
                let name = quotient
                    .factors()
                    .iter()
                    .map(|(m, r)| format!("eta({m}tau)^{r}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                (name, eta_quotient_series(&quotient, Exponent::from_integer(trunc))?)
            }
        },
        Target::Eisenstein if cfg.level == 1 => ("E4".into(), e4_series(trunc)),
        Target::Eisenstein => (format!("E2^({})", cfg.level), eisenstein_e2n(cfg.level, trunc)),
        Target::Theta => ("theta".into(), theta0_series(trunc)),
        Target::Faber => (format!("phi_{}({id})", cfg.m), faber(id, cfg.m)?.expansion(trunc)?),
    };
    let mut tab = Tabular::new(vec!["exponent", "coefficient"]);
    for (e, c) in series.terms() {
        tab.push(vec![e.to_string(), c.to_string()]);
    }
    Ok(match cfg.format {
        Format::Table => format!("{name} = {series}\n"),
        f => render(
            f,
            &ExpandOutput {
                series: name,
                level: cfg.level,
                data: series.into(),
            },
            &tab,
        ),
    })
}

#[derive(Serialize)]
struct FaberOutput {
    hauptmodul: String,
    m: u32,
    coefficients: Vec<String>,
    polynomial: String,
}

fn cmd_faber(cfg: &Config) -> Outcome<String> {
    let id = cfg.id()?;
    let poly = faber(id, cfg.m)?;
    let mut tab = Tabular::new(vec!["power", "coefficient"]);
    for (k, c) in poly.coeffs.iter().enumerate() {
        tab.push(vec![k.to_string(), c.to_string()]);
    }
    Ok(match cfg.format {
        Format::Table => format!("phi_{}({id}) = {poly}\n", cfg.m),
        f => render(
            f,
            &FaberOutput {
                hauptmodul: id.to_string(),
                m: cfg.m,
                coefficients: poly.coeffs.iter().map(|c| c.to_string()).collect(),
                polynomial: poly.to_string(),
            },
            &tab,
        ),
    })
}

#[derive(Serialize)]
struct ClassRow {
    d: i64,
    #[serde(flatten)]
    class: FormClass,
    evaluation_point: String,
}

fn cmd_classlist(cfg: &Config) -> Outcome<String> {
    if cfg.paranoid {
        cross_check_classes(cfg.level, cfg.d_max.unwrap_or(20))?;
    }
    let d_max = cfg.d_max.unwrap_or(20);
    let mut rows = Vec::new();
    for d in (1..=d_max).filter(|&d| admissible(d, cfg.level)) {
        let residues = valid_residues(d, cfg.level);
        let hs: Vec<i64> = match cfg.h {
            Some(h) => {
                let h = h.rem_euclid(2 * cfg.level as i64);
                if residues.contains(&h) {
                    vec![h]
                } else {
                    continue;
                }
            }
            None => residues,
        };
        for h in hs {
            for class in classes_gamma0(d, cfg.level, h)? {
                let point = heegner_point(&evaluation_form(&class.rep, cfg.level))?;
                rows.push(ClassRow {
                    d,
                    class,
                    evaluation_point: point.to_string(),
                });
            }
        }
    }
    let mut tab = Tabular::new(vec!["d", "h", "form", "stabilizer", "label", "evaluation point"]);
    for r in &rows {
        tab.push(vec![
            r.d.to_string(),
            r.class.h.map(|h| h.to_string()).unwrap_or_default(),
            r.class.rep.to_string(),
            r.class.stabilizer_order.to_string(),
            r.class.label.to_string(),
            r.evaluation_point.clone(),
        ]);
    }
    Ok(render(cfg.format, &rows, &tab))
}

#[derive(Serialize)]
struct TraceRow {
    d: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<i64>,
    unstarred: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    starred: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

#[derive(Serialize)]
struct TraceOutput {
    level: u32,
    m: u32,
    d_max: i64,
    precision_bits: u32,
    entries: Vec<TraceRow>,
}

fn cmd_trace(cfg: &Config) -> Outcome<String> {
    let d_max = cfg.d_max.unwrap_or(20);
    let entries = match cfg.h {
        // A fixed residue: recompute the unstarred traces for that h only.
        Some(h) => {
            if cfg.paranoid {
                cross_check_classes(cfg.level, d_max)?;
            }
            let h = h.rem_euclid(2 * cfg.level as i64);
            let mut rows = Vec::new();
            for d in (1..=d_max).filter(|&d| valid_residues(d, cfg.level).contains(&h)) {
                rows.push(TraceRow {
                    d,
                    h: Some(h),
                    unstarred: trace_unstarred(cfg.level, cfg.m, d, h, &cfg.ctx)?.to_string(),
                    starred: None,
                    provenance: None,
                });
            }
            rows
        }
        None => cfg
            .table(cfg.level, d_max)?
            .entries
            .iter()
            .map(|(&d, e)| TraceRow {
                d,
                h: None,
                unstarred: e.unstarred.to_string(),
                starred: Some(e.starred.to_string()),
                provenance: Some(serde_json::to_value(e.provenance).expect("enum").as_str().unwrap_or("").to_string()),
            })
            .collect(),
    };
    let mut tab = if cfg.h.is_some() {
        Tabular::new(vec!["d", "h", "t(d)"])
    } else {
        Tabular::new(vec!["d", "t(d)", "t*(d)", "source"])
    };
    for r in &entries {
        let mut row = vec![r.d.to_string()];
        if let Some(h) = r.h {
            row.push(h.to_string());
        }
        row.push(r.unstarred.clone());
        if let (Some(s), Some(p)) = (&r.starred, &r.provenance) {
            row.push(s.clone());
            row.push(p.clone());
        }
        tab.push(row);
    }
    let out = TraceOutput {
        level: cfg.level,
        m: cfg.m,
        d_max,
        precision_bits: cfg.ctx.bits,
        entries,
    };
    Ok(render(cfg.format, &out, &tab))
}

#[derive(Serialize)]
struct VerifyOutput {
    pass: bool,
    reports: Vec<VerificationReport>,
}

fn cmd_verify(cfg: &Config, identity: Identity) -> Outcome<(String, bool)> {
    use Identity::*;
    let level = cfg.level;
    if cfg.m != 2 {
        return Err(Failure::Usage("identities are stated for m = 2".into()));
    }
    let selected: Vec<Identity> = match (identity, level) {
        (All, 1) => vec![Kaneko],
        (All, _) => vec![HauptmodulCoefficients, FrickeCoefficients, Eisenstein, URelations, Split],
        (Kaneko, 1) => vec![Kaneko],
        (Kaneko, _) => return Err(Failure::Usage("Kaneko's identity is a level-one statement; use --level 1".into())),
        (_, 1) => return Err(Failure::Usage(format!("{identity:?} needs a level N > 1"))),
        (one, _) => vec![one],
    };
    let n_for = |id: Identity| match id {
        FrickeCoefficients => cfg.n_max.unwrap_or(8),
        _ => cfg.n_max.unwrap_or(12),
    };
    let split_trunc = cfg.trunc.unwrap_or(n_for(Split) + 1).max(1);
    let needed = selected
        .iter()
        .map(|&id| match id {
            FrickeCoefficients => 4 * level as i64 * n_for(id),
            Split => 4 * split_trunc + 4,
            URelations => 0,
            _ => 4 * n_for(id),
        })
        .max()
        .unwrap_or(0)
        .max(cfg.d_max.unwrap_or(0));
    let table = if selected.iter().any(|&id| id != URelations) {
        Some(cfg.table(level, needed)?)
    } else {
        None
    };
    let mut reports = Vec::new();
    for id in selected {
        let start = Instant::now();
        let t = table.as_ref();
        let report = match id {
            HauptmodulCoefficients => verify_hauptmodul_coefficients(t.expect("table"), n_for(id))?,
            FrickeCoefficients => verify_fricke_coefficients(t.expect("table"), n_for(id))?,
            Kaneko => verify_kaneko(t.expect("table"), n_for(id))?,
            Eisenstein => verify_eisenstein(t.expect("table"), n_for(id))?,
            Split => verify_split_identity(t.expect("table"), split_trunc)?,
            URelations => verify_u_relations(level, cfg.trunc.unwrap_or(20))?,
            All => unreachable!("expanded above"),
        };
        cfg.log(|| format!("{}: {:.3}s", report.identity, start.elapsed().as_secs_f64()));
        reports.push(report.with_precision(cfg.ctx.bits));
    }
    let pass = reports.iter().all(|r| r.pass);
    let text = match cfg.format {
        Format::Json => output::json(&VerifyOutput { pass, reports }),
        Format::Csv => {
            let mut tab = Tabular::new(vec!["identity", "level", "n", "lhs", "rhs", "pass"]);
            for r in &reports {
                for c in &r.records {
                    tab.push(vec![
                        r.identity.clone(),
                        r.level.to_string(),
                        c.n.to_string(),
                        c.lhs.to_string(),
                        c.rhs.to_string(),
                        c.pass.to_string(),
                    ]);
                }
            }
            tab.csv()
        }
        Format::Table => {
            let mut out = String::new();
            for r in &reports {
                out.push_str(&format!(
                    "{} N = {} n in [{}, {}]: {}\n",
                    r.identity,
                    r.level,
                    r.n_min,
                    r.n_max,
                    if r.pass { "pass" } else { "FAIL" }
                ));
                if let Some(c) = &r.basis_coefficients {
                    let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("  basis coefficients ({})\n", cs.join(", ")));
                }
                if let Some(note) = &r.note {
                    out.push_str(&format!("  {note}\n"));
                }
                let mut tab = Tabular::new(vec!["n", "lhs", "rhs", "ok"]);
                for c in &r.records {
                    tab.push(vec![
                        c.n.to_string(),
                        c.lhs.to_string(),
                        c.rhs.to_string(),
                        if c.pass { "yes" } else { "NO" }.into(),
                    ]);
                }
                for line in tab.table().lines() {
                    out.push_str("  ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
            out.push_str(if pass { "all checks pass\n" } else { "some checks FAIL\n" });
            out
        }
    };
    Ok((text, pass))
}

fn run(cli: Cli) -> Outcome<bool> {
    let (identity, target) = (cli.opts.identity, cli.opts.target);
    let cfg = Config::from_options(cli.opts)?;
    let start = Instant::now();
    let (text, pass) = match cli.command {
        Command::Expand => (cmd_expand(&cfg, target)?, true),
        Command::Faber => (cmd_faber(&cfg)?, true),
        Command::Classlist => (cmd_classlist(&cfg)?, true),
        Command::Trace => (cmd_trace(&cfg)?, true),
        Command::Verify => cmd_verify(&cfg, identity)?,
    };
    print!("{text}");
    cfg.log(|| format!("total: {:.3}s", start.elapsed().as_secs_f64()));
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
