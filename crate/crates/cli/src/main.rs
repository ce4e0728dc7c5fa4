//! Command-line front end. Each subcommand is one analysis over a system
//! file (or a literal expression), printed as JSON or CSV. Output is
//! deterministic for a fixed invocation: same bytes, every run.

use clap::{Parser, Subcommand, ValueEnum};
use forestlab::dsl::{
    evaluate_gexpr_bounded, evaluate_system_bounded, parse_gexpr, parse_system, ClassExpr,
    ComptonSystem, DEFAULT_MAX_ORDER,
};
use forestlab::laws::check_main_theorem;
use forestlab::series::{fmt_coeff, TruncatedSeries};
use forestlab::structure::{classify_radius, explicit_system, growth_crosscheck, to_explicit};
use forestlab::trees::{
    classify_tree_bounded, enumerate_trees_bounded, factor_module, TreeModule, DEFAULT_MAX_SIZE,
};
use forestlab::Error;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "forestlab",
    version,
    about = "Exact generating functions, radius classification, and zero-one-law diagnostics \
             for recursively specified rooted-tree classes",
    after_help = "System files use the `.fst` extension by convention. Exact rationals print \
                  as num/den; decimal renderings are always labeled approximate."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

// Inclusive degree window "a..b".
#[derive(Clone, Copy)]
struct Window {
    lo: usize,
    hi: usize,
}

fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("`{s}` is not a window; write `a..b`"))?;
    let lo: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("`{a}` is not a degree"))?;
    let hi: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("`{b}` is not a degree"))?;
    if lo > hi {
        return Err(format!("window `{s}` is empty; the start exceeds the end"));
    }
    Ok(Window { lo, hi })
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a class's counting series by fixed-point iteration with
    /// the multiset operators E, E_m, and E_(>=m)
    Eval {
        /// System file (`.fst` by convention)
        #[arg(long)]
        system: PathBuf,
        /// Class or definition name to evaluate
        #[arg(long)]
        class: String,
        /// Truncation order of the series
        #[arg(long)]
        order: usize,
        /// Degree window `a..b` to print (defaults to `1..order`)
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Hard cap on the truncation order
        #[arg(long, env = "FORESTLAB_MAX_ORDER", default_value_t = DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// Classify every class's radius of convergence structurally, via
    /// dependency components and the unit-cycle test
    Classify {
        /// System file (`.fst` by convention)
        #[arg(long)]
        system: PathBuf,
        /// Also evaluate to this order and cross-check growth estimates
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Hard cap on the truncation order
        #[arg(long, env = "FORESTLAB_MAX_ORDER", default_value_t = DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// Emit closed forms built from x, geometric factors x/(1-x^m), sums,
    /// products, and the multiset operators, for radius-one-or-better
    /// classes
    Explicit {
        /// System file (`.fst` by convention)
        #[arg(long)]
        system: PathBuf,
        /// Single class to transform (default: every productive class)
        #[arg(long)]
        class: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check the zero-one-law criterion: the structural radius verdict
    /// for a tree class against the ratio test on its forest series
    Law {
        /// System file (`.fst` by convention)
        #[arg(long)]
        system: PathBuf,
        /// Tree-valued class or definition name
        #[arg(long)]
        class: String,
        /// Truncation order for the empirical side
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Hard cap on the truncation order
        #[arg(long, env = "FORESTLAB_MAX_ORDER", default_value_t = DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// List the canonical rooted trees of an exact size, optionally
    /// filtered to a class or a union of classes
    Enumerate {
        /// Number of nodes
        #[arg(long)]
        size: usize,
        /// System file; required when filtering by class
        #[arg(long)]
        system: Option<PathBuf>,
        /// Keep only members of this class or union-of-classes definition
        #[arg(long, requires = "system")]
        class: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Hard cap on the enumeration size
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Evaluate a closed-form generating expression, e.g.
    /// `x * Egeq(1, x/(1-x))`, to a truncation order
    Gfun {
        /// Expression over x, x/(1-x^m), +, *, E(m, _), Egeq(m, _), let
        #[arg(long)]
        expr: String,
        /// Truncation order of the series
        #[arg(long)]
        order: usize,
        /// Degree window `a..b` to print (defaults to `0..order`)
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Hard cap on the truncation order
        #[arg(long, env = "FORESTLAB_MAX_ORDER", default_value_t = DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// Factor a tree module (tree with a designated socket leaf, written
    /// `encoding@path`) into indecomposable modules
    Factor {
        /// Module literal, e.g. `(()(()))@1.0` or the identity `()@`
        module: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

// One failure carries its exit code: 1 for domain errors, 2 for usage
// errors clap cannot see.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_system(path: &Path) -> Result<ComptonSystem, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot read `{}`: {e}", path.display()),
    })?;
    Ok(parse_system(&src)?)
}

fn lookup(system: &ComptonSystem, name: &str) -> Result<ClassExpr, Failure> {
    system
        .lookup(name)
        .ok_or_else(|| Error::UnknownName { name: name.into() }.into())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("reports serialize");
    out.push('\n');
    out
}

// Quote a CSV field only when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct CoefficientRow {
    n: usize,
    coefficient: String,
}

#[derive(Serialize)]
struct SeriesOutput {
    system: Option<String>,
    class: Option<String>,
    expr: Option<String>,
    order: usize,
    window: [usize; 2],
    coefficients: Vec<CoefficientRow>,
}

fn series_output(
    series: &TruncatedSeries,
    window: Window,
    header: SeriesOutput,
    format: Format,
) -> String {
    match format {
        Format::Csv => series.to_csv_range(window.lo, window.hi),
        Format::Json => {
            let mut out = header;
            out.coefficients = (window.lo..=window.hi)
                .map(|n| CoefficientRow {
                    n,
                    coefficient: fmt_coeff(series.coeff(n).expect("within order")),
                })
                .collect();
            to_json(&out)
        }
    }
}

// The window must sit inside the evaluated order; catching it here keeps
// the mistake a usage error rather than a bounds panic.
fn check_window(window: Option<Window>, default: Window, order: usize) -> Result<Window, Failure> {
    let w = window.unwrap_or(default);
    if w.hi > order {
        return Err(usage(format!(
            "the window ends at {} but the series is only evaluated to order {order}",
            w.hi
        )));
    }
    Ok(w)
}

#[derive(Serialize)]
struct ClassifyOutput {
    radius: forestlab::structure::RadiusReport,
    growth: Option<forestlab::structure::CrosscheckReport>,
}

#[derive(Serialize)]
struct FormRow {
    class: String,
    form: String,
}

#[derive(Serialize)]
struct ExplicitOutput {
    system: String,
    forms: Vec<FormRow>,
}

#[derive(Serialize)]
struct RatioSummary {
    period: usize,
    onset: usize,
    window: [usize; 2],
    samples: usize,
    last_degree: usize,
    last_exact: String,
    /// Approximate decimal rendering of the exact ratio above.
    last_decimal_approx: String,
    verdict: String,
}

#[derive(Serialize)]
struct LawOutput {
    system: String,
    tree_class: String,
    order: usize,
    structural: String,
    ratio: Option<RatioSummary>,
    coherence: String,
}

#[derive(Serialize)]
struct EnumerateOutput {
    size: usize,
    class: Option<String>,
    count: usize,
    trees: Vec<String>,
}

#[derive(Serialize)]
struct FactorRow {
    module: String,
    size: usize,
}

#[derive(Serialize)]
struct FactorOutput {
    module: String,
    size: usize,
    factors: Vec<FactorRow>,
}

// Membership of a classified tree in a tree-valued expression. The
// enumeration filter stays within unions of classes; forest-shaped
// expressions have no single tree to list.
fn expr_selects(
    system: &ComptonSystem,
    expr: &ClassExpr,
    classes: &[usize],
) -> Result<bool, Failure> {
    match expr {
        ClassExpr::NodeClass => Ok(classes.contains(&0)),
        ClassExpr::Class(i) => Ok(classes.contains(i)),
        ClassExpr::Def(d) => expr_selects(system, &system.defs()[*d].expr, classes),
        ClassExpr::Union(parts) => {
            for p in parts {
                if expr_selects(system, p, classes)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => Err(Error::KindMismatch {
            msg: "the enumeration filter takes a class or a union of classes".into(),
        }
        .into()),
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Eval {
            system,
            class,
            order,
            window,
            format,
            max_order,
        } => {
            let sys = load_system(&system)?;
            let expr = lookup(&sys, &class)?;
            let series = evaluate_system_bounded(&sys, order, max_order)?;
            let s = series.expr(&sys, &expr)?;
            let w = check_window(window, Window { lo: 1, hi: order }, order)?;
            let header = SeriesOutput {
                system: Some(sys.name().to_string()),
                class: Some(class),
                expr: None,
                order,
                window: [w.lo, w.hi],
                coefficients: Vec::new(),
            };
            Ok(series_output(&s, w, header, format))
        }
        Command::Classify {
            system,
            order,
            format,
            max_order,
        } => {
            let sys = load_system(&system)?;
            let report = classify_radius(&sys)?;
            let growth = match order {
                Some(n) => {
                    let series = evaluate_system_bounded(&sys, n, max_order)?;
                    Some(growth_crosscheck(&sys, &report, &series))
                }
                None => None,
            };
            match format {
                Format::Json => Ok(to_json(&ClassifyOutput {
                    radius: report,
                    growth,
                })),
                Format::Csv => {
                    let mut out = String::from("class,verdict,component,rank,evidence\n");
                    for c in &report.classes {
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            csv_field(&c.name),
                            c.verdict,
                            c.component,
                            c.rank,
                            csv_field(&c.evidence)
                        ));
                    }
                    Ok(out)
                }
            }
        }
        Command::Explicit {
            system,
            class,
            format,
        } => {
            let sys = load_system(&system)?;
            let forms: Vec<FormRow> = match class {
                Some(name) => {
                    let form = to_explicit(&sys, &name)?;
                    vec![FormRow {
                        class: name,
                        form: form.to_string(),
                    }]
                }
                None => explicit_system(&sys)?
                    .into_iter()
                    .map(|(class, form)| FormRow {
                        class,
                        form: form.to_string(),
                    })
                    .collect(),
            };
            match format {
                Format::Json => Ok(to_json(&ExplicitOutput {
                    system: sys.name().to_string(),
                    forms,
                })),
                Format::Csv => {
                    let mut out = String::from("class,form\n");
                    for row in &forms {
                        out.push_str(&format!(
                            "{},{}\n",
                            csv_field(&row.class),
                            csv_field(&row.form)
                        ));
                    }
                    Ok(out)
                }
            }
        }
        Command::Law {
            system,
            class,
            order,
            format,
            max_order,
        } => {
            let sys = load_system(&system)?;
            let expr = lookup(&sys, &class)?;
            if order > max_order {
                return Err(Error::OrderLimitExceeded {
                    requested: order,
                    limit: max_order,
                }
                .into());
            }
            let report = check_main_theorem(&sys, &expr, order)?;
            let ratio = report.ratio.as_ref().map(|r| RatioSummary {
                period: r.period,
                onset: r.onset,
                window: [r.window.0, r.window.1],
                samples: r.samples.len(),
                last_degree: r.trend.last_degree,
                last_exact: r.trend.last_exact.clone(),
                last_decimal_approx: r.trend.last_decimal.clone(),
                verdict: r.verdict.to_string(),
            });
            let out = LawOutput {
                system: report.system.clone(),
                tree_class: report.tree_class.clone(),
                order: report.order,
                structural: report.structural.to_string(),
                ratio,
                coherence: report.coherence.to_string(),
            };
            match format {
                Format::Json => Ok(to_json(&out)),
                Format::Csv => {
                    let mut line = String::from(
                        "system,tree_class,order,structural,ratio_verdict,coherence\n",
                    );
                    line.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        csv_field(&out.system),
                        csv_field(&out.tree_class),
                        out.order,
                        out.structural,
                        out.ratio
                            .as_ref()
                            .map_or("NONE".into(), |r| r.verdict.clone()),
                        out.coherence
                    ));
                    Ok(line)
                }
            }
        }
        Command::Enumerate {
            size,
            system,
            class,
            format,
            max_size,
        } => {
            let trees = enumerate_trees_bounded(size, max_size)?;
            let (kept, filter_name) = match (&system, &class) {
                (Some(path), Some(name)) => {
                    let sys = load_system(path)?;
                    let expr = lookup(&sys, name)?;
                    let mut kept = Vec::new();
                    for t in &trees {
                        let classes = classify_tree_bounded(&sys, t, max_size)?;
                        if expr_selects(&sys, &expr, &classes)? {
                            kept.push(t.encoding().to_string());
                        }
                    }
                    (kept, Some(name.clone()))
                }
                _ => (
                    trees.iter().map(|t| t.encoding().to_string()).collect(),
                    None,
                ),
            };
            match format {
                Format::Json => Ok(to_json(&EnumerateOutput {
                    size,
                    class: filter_name,
                    count: kept.len(),
                    trees: kept,
                })),
                Format::Csv => {
                    let mut out = String::from("tree\n");
                    for enc in &kept {
                        out.push_str(enc);
                        out.push('\n');
                    }
                    Ok(out)
                }
            }
        }
        Command::Gfun {
            expr,
            order,
            window,
            format,
            max_order,
        } => {
            let parsed = parse_gexpr(&expr)?;
            let series = evaluate_gexpr_bounded(&parsed, order, max_order)?;
            let w = check_window(window, Window { lo: 0, hi: order }, order)?;
            let header = SeriesOutput {
                system: None,
                class: None,
                expr: Some(parsed.to_string()),
                order,
                window: [w.lo, w.hi],
                coefficients: Vec::new(),
            };
            Ok(series_output(&series, w, header, format))
        }
        Command::Factor { module, format } => {
            let m = TreeModule::parse(&module)?;
            let factors: Vec<FactorRow> = factor_module(&m)
                .into_iter()
                .map(|f| FactorRow {
                    size: f.size(),
                    module: f.to_string(),
                })
                .collect();
            let out = FactorOutput {
                module: m.to_string(),
                size: m.size(),
                factors,
            };
            match format {
                Format::Json => Ok(to_json(&out)),
                Format::Csv => {
                    let mut text = String::from("position,module,size\n");
                    for (i, f) in out.factors.iter().enumerate() {
                        text.push_str(&format!("{},{},{}\n", i, csv_field(&f.module), f.size));
                    }
                    Ok(text)
                }
            }
        }
    }
}
