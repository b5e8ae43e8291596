//! Command-line front end. `parse_args` validates options against the verb, `run` dispatches and
//! returns the exit code with the rendered output.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::arith::{Embedding, ExactScalar};
use crate::canonical;
use crate::config::LineConfiguration;
use crate::error::{Error, Result};
use crate::models::{transform_case2, verify_prop53, HyperModel};
use crate::numerics::{EmbeddedConfig, Tolerances};
use crate::regulator::{
    limit_sweep, local_model_sweep, quadratic_field_regulator, regulator_matrix, sweep_csv,
    theorem_elements, LocalModelSpec, QuadraticVariant, RegulatorOptions,
};
use crate::symbols::{
    admissible_assignments, generator_list, m_for_point, relation_templates, verify_relation,
    RelationId,
};
use crate::tame::verify_k2t;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest accepted `|slope - 2 pi a b|` for `local-limit`.
pub const LOCAL_SLOPE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Validate,
    Genus,
    Elements,
    TameCheck,
    RelationsCheck,
    Hyperelliptic,
    Regulator,
    Sweep,
    LocalLimit,
    QuadraticDemo,
    Prop53,
}

impl Verb {
    fn needs_config(self) -> bool {
        matches!(
            self,
            Verb::Validate
                | Verb::Genus
                | Verb::Elements
                | Verb::TameCheck
                | Verb::RelationsCheck
                | Verb::Regulator
                | Verb::Sweep
        )
    }

    fn accepts_config(self) -> bool {
        self.needs_config() || self == Verb::Prop53
    }

    fn csv_supported(self) -> bool {
        !matches!(self, Verb::Validate | Verb::Elements | Verb::QuadraticDemo)
    }

    fn name(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "k2reg",
    about = "K2 symbols and regulators on line-configuration curves"
)]
struct RawArgs {
    verb: Verb,
    /// Configuration file (JSON).
    config: Option<PathBuf>,
    /// Parameter t for `regulator`, exact rational or decimal; overrides the config.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Comma-separated t values for `sweep` and `local-limit`.
    #[arg(long = "t-list", allow_hyphen_values = true)]
    t_list: Option<String>,
    /// Quadrature tolerance.
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
    /// Loop closure tolerance.
    #[arg(long = "closure-tol")]
    closure_tol: Option<f64>,
    /// Root and evaluation tolerance on the surface.
    #[arg(long = "surface-tol")]
    surface_tol: Option<f64>,
    /// Projection seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest group size for `hyperelliptic` (default 4).
    #[arg(long = "max-n1")]
    max_n1: Option<usize>,
    /// Exponent a for `local-limit` (default 1) or a for `quadratic-demo` (default 10000).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    /// Exponent b for `local-limit` (default 1).
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
    /// Lambda for `prop53`.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Comma-separated alphas for `prop53`.
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    /// Number of loops for `prop53` (default 2).
    #[arg(long)]
    loops: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub verb: Verb,
    pub config: Option<PathBuf>,
    /// `--t` as given, kept exact for the configuration parameter.
    pub t: Option<String>,
    /// `--t-list`, sorted by decreasing `|t|`.
    pub t_list: Option<Vec<f64>>,
    pub tol: Tolerances,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub max_n1: usize,
    pub a: Option<i64>,
    pub b: Option<i64>,
    pub lambda: Option<String>,
    pub alphas: Option<String>,
    pub loops: usize,
}

/// Rendered result of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
    pub diagnostics: Vec<String>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::invalid(msg)
}

fn parse_t_list(s: &str) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let t: f64 = part
            .parse()
            .map_err(|_| Error::parse(format!("bad value '{part}' in --t-list")))?;
        if !t.is_finite() || t == 0.0 {
            return Err(usage(format!(
                "--t-list entries must be finite and nonzero, got {part}"
            )));
        }
        v.push(t);
    }
    if v.is_empty() {
        return Err(usage("--t-list is empty"));
    }
    v.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    if v.windows(2).any(|w| w[0].abs() == w[1].abs()) {
        return Err(usage("--t-list has repeated |t|"));
    }
    Ok(v)
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(usage(format!("{name} must be positive"))),
        Some(x) => Ok(x),
        None => Ok(default),
    }
}

/// Parses `argv` without the program name.
pub fn parse_args<I, S>(argv: I) -> Result<Command>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let full =
        std::iter::once(std::ffi::OsString::from("k2reg")).chain(argv.into_iter().map(Into::into));
    let raw =
        RawArgs::try_parse_from(full).map_err(|e| usage(e.to_string().trim_end().to_string()))?;
    let verb = raw.verb;
    let name = verb.name();

    if verb.needs_config() && raw.config.is_none() {
        return Err(usage(format!("{name} needs a configuration file")));
    }
    if raw.config.is_some() && !verb.accepts_config() {
        return Err(usage(format!("{name} takes no configuration file")));
    }
    if raw.format == Format::Csv && !verb.csv_supported() {
        return Err(usage(format!("{name} has no CSV output")));
    }

    let mut given: Vec<&str> = Vec::new();
    let flags: [(&str, bool); 11] = [
        ("--t", raw.t.is_some()),
        ("--t-list", raw.t_list.is_some()),
        ("--quad-tol", raw.quad_tol.is_some()),
        ("--closure-tol", raw.closure_tol.is_some()),
        ("--surface-tol", raw.surface_tol.is_some()),
        ("--max-n1", raw.max_n1.is_some()),
        ("--a", raw.a.is_some()),
        ("--b", raw.b.is_some()),
        ("--lambda", raw.lambda.is_some()),
        ("--alphas", raw.alphas.is_some()),
        ("--loops", raw.loops.is_some()),
    ];
    for (f, present) in flags {
        if present {
            given.push(f);
        }
    }
    let tolerances = ["--quad-tol", "--closure-tol", "--surface-tol"];
    let allowed: Vec<&str> = match verb {
        Verb::Validate | Verb::Genus | Verb::Elements | Verb::TameCheck | Verb::RelationsCheck => {
            vec![]
        }
        Verb::Hyperelliptic => vec!["--max-n1"],
        Verb::Regulator => [&["--t"][..], &tolerances].concat(),
        Verb::Sweep => [&["--t-list"][..], &tolerances].concat(),
        Verb::LocalLimit => [&["--t-list", "--a", "--b"][..], &tolerances].concat(),
        Verb::QuadraticDemo => [&["--a"][..], &tolerances].concat(),
        Verb::Prop53 => [&["--lambda", "--alphas", "--loops"][..], &tolerances].concat(),
    };
    if let Some(bad) = given.iter().find(|f| !allowed.contains(f)) {
        return Err(usage(format!("{bad} does not apply to {name}")));
    }
    if verb == Verb::Prop53 {
        let explicit = raw.lambda.is_some() || raw.alphas.is_some();
        if raw.config.is_some() && explicit {
            return Err(usage(
                "prop53 takes either a configuration or --lambda/--alphas, not both",
            ));
        }
        if raw.config.is_none() && (raw.lambda.is_none() || raw.alphas.is_none()) {
            return Err(usage(
                "prop53 needs a configuration or both --lambda and --alphas",
            ));
        }
    }

    let defaults = Tolerances::default();
    let tol = Tolerances {
        quad: positive("--quad-tol", raw.quad_tol, defaults.quad)?,
        closure: positive("--closure-tol", raw.closure_tol, defaults.closure)?,
        surface: positive("--surface-tol", raw.surface_tol, defaults.surface)?,
        eval: defaults.eval,
    };
    if let Some(t) = &raw.t {
        let v = ExactScalar::from_str(t)?;
        if v.is_zero() {
            return Err(usage("--t must be nonzero"));
        }
    }
    let t_list = raw.t_list.as_deref().map(parse_t_list).transpose()?;
    if verb == Verb::LocalLimit && t_list.as_ref().is_some_and(|l| l.len() < 2) {
        return Err(usage("local-limit needs at least two values in --t-list"));
    }
    let max_n1 = raw.max_n1.unwrap_or(4);
    if max_n1 == 0 {
        return Err(usage("--max-n1 must be positive"));
    }
    let loops = raw.loops.unwrap_or(2);
    if loops == 0 {
        return Err(usage("--loops must be positive"));
    }
    Ok(Command {
        verb,
        config: raw.config,
        t: raw.t,
        t_list,
        tol,
        seed: raw.seed,
        output: raw.output,
        format: raw.format,
        max_n1,
        a: raw.a,
        b: raw.b,
        lambda: raw.lambda,
        alphas: raw.alphas,
        loops,
    })
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn load_config(cmd: &Command) -> Result<LineConfiguration> {
    let path = cmd
        .config
        .as_ref()
        .ok_or_else(|| usage("missing configuration file"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
    LineConfiguration::from_json(&text)
}

fn regulator_options(cmd: &Command) -> RegulatorOptions {
    RegulatorOptions {
        tol: cmd.tol,
        ..RegulatorOptions::default()
    }
}

#[derive(Serialize)]
struct GenusOut {
    genus: u64,
    pairwise: i64,
    binomial: i64,
    special_points: usize,
}

#[derive(Serialize)]
struct ElementsOut<'a> {
    generators: &'a [crate::symbols::NamedElement],
    m_for_point: BTreeMap<String, crate::symbols::NamedElement>,
}

#[derive(Serialize)]
struct TameOut {
    passed: bool,
    generators: Vec<(String, crate::tame::K2TReport)>,
}

#[derive(Serialize)]
struct RelationsOut {
    passed: bool,
    detector_disagreements: usize,
    reports: Vec<crate::symbols::RelationReport>,
}

#[derive(Serialize)]
struct HyperOut {
    passed: bool,
    rows: Vec<canonical::HyperellipticRow>,
}

#[derive(Serialize)]
struct LocalOut {
    passed: bool,
    slope_tolerance: f64,
    report: crate::regulator::LocalSweepReport,
}

fn ok_code(passed: bool) -> i32 {
    if passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

fn execute(cmd: &Command) -> Result<(i32, String)> {
    let csv = cmd.format == Format::Csv;
    match cmd.verb {
        Verb::Validate => {
            let rep = load_config(cmd)?.validate();
            Ok((ok_code(rep.passed()), json(&rep)))
        }
        Verb::Genus => {
            let cfg = load_config(cmd)?;
            let forms = cfg.genus_forms();
            let out = GenusOut {
                genus: cfg.genus()?,
                pairwise: forms.pairwise,
                binomial: forms.binomial,
                special_points: cfg.special_set_s()?.len(),
            };
            let passed = forms.pairwise == forms.binomial
                && out.genus as i64 == forms.pairwise
                && out.special_points as u64 == out.genus;
            let text = if csv {
                format!(
                    "genus,pairwise,binomial,special_points\n{},{},{},{}\n",
                    out.genus, out.pairwise, out.binomial, out.special_points
                )
            } else {
                json(&out)
            };
            Ok((ok_code(passed), text))
        }
        Verb::Elements => {
            let cfg = load_config(cmd)?;
            let generators = generator_list(&cfg)?;
            let mut map = BTreeMap::new();
            for s in cfg.special_set_s()? {
                map.insert(s.to_string(), m_for_point(&cfg, &s)?);
            }
            Ok((
                EXIT_OK,
                json(&ElementsOut {
                    generators: &generators,
                    m_for_point: map,
                }),
            ))
        }
        Verb::TameCheck => {
            let cfg = load_config(cmd)?;
            let mut generators = Vec::new();
            for e in generator_list(&cfg)? {
                generators.push((e.label.clone(), verify_k2t(&cfg, &e.symbol)?));
            }
            let passed = generators.iter().all(|(_, r)| r.passed);
            let text = if csv {
                let mut s = String::from("generator,place,term,ord_left,ord_right,value\n");
                for (label, r) in &generators {
                    for row in &r.rows {
                        s.push_str(&format!(
                            "\"{label}\",{},{},{},{},{}\n",
                            row.place, row.term, row.ord_left, row.ord_right, row.value
                        ));
                    }
                }
                s
            } else {
                json(&TameOut { passed, generators })
            };
            Ok((ok_code(passed), text))
        }
        Verb::RelationsCheck => {
            let cfg = load_config(cmd)?;
            let mut reports = Vec::new();
            for id in RelationId::ALL {
                for t in relation_templates(id) {
                    for asg in admissible_assignments(&cfg, &t) {
                        reports.push(verify_relation(&cfg, &t, &asg)?);
                    }
                }
            }
            let passed = reports.iter().all(|r| r.passed);
            let detector_disagreements = reports.iter().filter(|r| r.detector_disagrees()).count();
            let text = if csv {
                let mut s = String::from("relation,assignment,passed\n");
                for r in &reports {
                    s.push_str(&format!(
                        "{},\"{}\",{}\n",
                        r.relation, r.assignment, r.passed
                    ));
                }
                s
            } else {
                json(&RelationsOut {
                    passed,
                    detector_disagreements,
                    reports,
                })
            };
            Ok((ok_code(passed), text))
        }
        Verb::Hyperelliptic => {
            let rows = canonical::table(cmd.max_n1)?;
            let passed = rows.iter().all(|r| {
                r.consistent()
                    && r.hyperelliptic == canonical::classification(r.n[0], r.n[1], r.n[2])
            });
            let text = if csv {
                canonical::table_csv(&rows)
            } else {
                json(&HyperOut { passed, rows })
            };
            Ok((ok_code(passed), text))
        }
        Verb::Regulator => {
            let mut cfg = load_config(cmd)?;
            if let Some(t) = &cmd.t {
                cfg = cfg.with_t(ExactScalar::from_str(t)?)?;
            }
            let emb = EmbeddedConfig::from_config(&cfg, Embedding::Plus, cmd.seed)?;
            let rep = regulator_matrix(&emb, &theorem_elements(&cfg)?, &regulator_options(cmd))?;
            let text = if csv {
                sweep_csv(std::slice::from_ref(&rep))
            } else {
                rep.to_json() + "\n"
            };
            Ok((EXIT_OK, text))
        }
        Verb::Sweep => {
            let cfg = load_config(cmd)?;
            let schedule = cmd.t_list.clone().unwrap_or_else(|| vec![1e-4, 1e-6, 1e-8]);
            let reps = limit_sweep(&cfg, cmd.seed, &schedule, &regulator_options(cmd))?;
            let text = if csv { sweep_csv(&reps) } else { json(&reps) };
            Ok((EXIT_OK, text))
        }
        Verb::LocalLimit => {
            let spec = LocalModelSpec::monomial(cmd.a.unwrap_or(1), cmd.b.unwrap_or(1));
            if spec.a <= 0 || spec.b <= 0 {
                return Err(usage("--a and --b must be positive"));
            }
            let schedule = cmd.t_list.clone().unwrap_or_else(|| vec![1e-2, 1e-4, 1e-6]);
            let report = local_model_sweep(&spec, &schedule, &cmd.tol)?;
            let passed = (report.slope - report.expected_slope).abs() < LOCAL_SLOPE_TOL;
            let text = if csv {
                let mut s = String::from("t,value,remainder\n");
                for ((t, v), r) in report.t.iter().zip(&report.values).zip(&report.remainders) {
                    s.push_str(&format!("{t:e},{v:e},{r:e}\n"));
                }
                s.push_str(&format!(
                    "# slope {:e} expected {:e}\n",
                    report.slope, report.expected_slope
                ));
                s
            } else {
                json(&LocalOut {
                    passed,
                    slope_tolerance: LOCAL_SLOPE_TOL,
                    report,
                })
            };
            Ok((ok_code(passed), text))
        }
        Verb::QuadraticDemo => {
            let rep = quadratic_field_regulator(
                &QuadraticVariant::Part1 {
                    a: cmd.a.unwrap_or(10_000),
                },
                &cmd.tol,
            )?;
            Ok((EXIT_OK, json(&rep)))
        }
        Verb::Prop53 => {
            let h = if cmd.config.is_some() {
                HyperModel::from_transform(&transform_case2(&load_config(cmd)?)?)?
            } else {
                let lambda = ExactScalar::from_str(cmd.lambda.as_deref().unwrap_or_default())?;
                let alphas = cmd
                    .alphas
                    .as_deref()
                    .unwrap_or_default()
                    .split(',')
                    .map(|s| ExactScalar::from_str(s.trim()))
                    .collect::<Result<Vec<_>>>()?;
                HyperModel::new(lambda, alphas)?
            };
            let rep = verify_prop53(&h, cmd.loops, &cmd.tol)?;
            let text = if csv {
                rep.tame_csv()
            } else {
                rep.to_json() + "\n"
            };
            Ok((ok_code(rep.passed), text))
        }
    }
}

/// Runs a parsed command. Input and schema errors give exit code 2, computation failures 1.
pub fn run(cmd: &Command) -> Outcome {
    match execute(cmd) {
        Ok((code, output)) => Outcome {
            code,
            output,
            diagnostics: Vec::new(),
        },
        Err(e) => {
            let code = if e.is_input_error() {
                EXIT_USAGE
            } else {
                EXIT_FAILED
            };
            Outcome {
                code,
                output: String::new(),
                diagnostics: vec![e.to_string()],
            }
        }
    }
}

/// Parses, runs, writes the output to `--output` or stdout, and returns the exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let full = std::iter::once(std::ffi::OsString::from("k2reg")).chain(argv.iter().cloned());
    if let Err(e) = RawArgs::try_parse_from(full) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            print!("{e}");
            return EXIT_OK;
        }
    }
    let cmd = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let out = run(&cmd);
    for d in &out.diagnostics {
        eprintln!("error: {d}");
    }
    if !out.output.is_empty() {
        match &cmd.output {
            Some(p) => {
                if let Err(e) = std::fs::write(p, &out.output) {
                    eprintln!("error: {}: {e}", p.display());
                    return EXIT_FAILED;
                }
            }
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                if let Err(e) = stdout
                    .write_all(out.output.as_bytes())
                    .and_then(|_| stdout.flush())
                {
                    if e.kind() != std::io::ErrorKind::BrokenPipe {
                        eprintln!("error: {e}");
                        return EXIT_FAILED;
                    }
                }
            }
        }
    }
    out.code
}
