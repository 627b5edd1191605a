//! Command-line front end. [`run`] is the whole program; `main` only wires it
//! to the process streams.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::classify::{detect_subclass, DEFAULT_TOL};
use crate::error::Error;
use crate::expr::parse_expression;
use crate::expr::sample::{SampleBox, DEFAULT_SEED};
use crate::groups::io::parse_group_element;
use crate::groups::{act, realize};
use crate::io::{format_gauge, format_reduced, parse_params, parse_reduced, parse_transform, EquationFile};
use crate::model::{instantiate_normal_form, ReducedEquation, Tag, TimeDependentEquation};
use crate::report::Report;
use crate::transform::{compare_equations, gauge_stationary};
use crate::verify::{audit_paper, gauge_covariance_check, residual_covariance_check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Manufactured solution used when `--manufactured` is not given.
pub const DEFAULT_MANUFACTURED: &str = "exp(-t)*sin(3*x) + x^2/10";

#[derive(Parser, Debug)]
#[command(
    name = "bkdv",
    version,
    about = "Equivalence transformations and subclass classification for reduced Burgers-KdV equations"
)]
struct Cli {
    /// Seed for sampling and random draws.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Override the x sampling interval.
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    domain: Option<Vec<f64>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Identify the subclass of a reduced equation.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Map a stationary equation with C and A[1] to the reduced form.
    Gauge {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_map: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Apply a transform file or a group element to an equation.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a transformation with the residual covariance oracle.
    Verify {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        tgt: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        manufactured: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Write the normal form of a subclass.
    NormalForm {
        #[arg(long)]
        tag: String,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the consistency audit of the transformation families.
    Audit {
        /// Restrict to these subclasses; repeatable.
        #[arg(long)]
        tag: Vec<String>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
}

/// Failure carrying its exit code.
struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let code = match &e {
            e if e.is_parse() => EXIT_PARSE,
            Error::Audit(_) => EXIT_FAILED,
            _ => EXIT_DOMAIN,
        };
        Fail(code, e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

/// Write to `path`, or to `out` when absent.
fn emit(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Res<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Fail(EXIT_PARSE, format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Fail(EXIT_PARSE, format!("stdout: {e}"))),
    }
}

fn print_report(r: &Report, json: bool, out: &mut dyn Write) -> Res<()> {
    let text = if json { r.to_json() } else { r.to_text() };
    emit(None, &text, out)
}

fn load_reduced(path: &Path, domain: Option<(f64, f64)>) -> Res<ReducedEquation> {
    Ok(parse_reduced(&read(path)?, &name(path), domain)?)
}

/// Run the program on `args` (including the program name). Returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Res<i32> {
    let domain = cli.domain.as_ref().map(|d| (d[0], d[1]));
    if let Some((lo, hi)) = domain {
        if !(lo < hi) {
            return Err(Fail(EXIT_PARSE, format!("--domain needs lo < hi, got {lo} {hi}")));
        }
    }
    let seed = cli.seed;
    match cli.command {
        Command::Classify { input, tol, json } => {
            let eq = load_reduced(&input, domain)?;
            let c = detect_subclass(&eq, tol)?;
            print_report(&c.report(), json, out)?;
            Ok(EXIT_OK)
        }
        Command::Gauge {
            input,
            out: path,
            emit_map,
            json,
        } => {
            let f = EquationFile::parse(&read(&input)?, &name(&input))?;
            let st = f.to_stationary(domain)?;
            let g = gauge_stationary(&st)?;
            emit(path.as_ref(), &format_reduced(&g.equation), out)?;
            if let Some(m) = &emit_map {
                emit(Some(m), &format_gauge(&g.map), out)?;
            }
            let u = parse_expression(DEFAULT_MANUFACTURED)?;
            let cov = gauge_covariance_check(&st, &g, &u, 200, 1e-8, seed)?;
            let mut r = cov.report();
            r.set("c1", g.map.c1).set("c3", g.map.c3);
            if path.is_some() {
                print_report(&r, json, out)?;
            } else {
                let _ = write!(err, "{}", if json { r.to_json() } else { r.to_text() });
            }
            Ok(if cov.check.passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Transform { input, map, out: path } => {
            let src = load_reduced(&input, domain)?;
            let text = read(&map)?;
            let eq = if is_group_element(&text) {
                let (g, _) = parse_group_element(&text, &name(&map))?;
                let c = detect_subclass(&src, DEFAULT_TOL)?;
                let theta = c
                    .params
                    .ok_or_else(|| Fail(EXIT_DOMAIN, format!("{} is in F0; no group acts on it", name(&input))))?;
                if theta.tag != g.tag {
                    return Err(Fail(
                        EXIT_DOMAIN,
                        format!("element is for {} but {} is {}", g.tag, name(&input), theta.tag),
                    ));
                }
                // the realized map must exist on the sampling domain
                realize(&g, &theta)?;
                instantiate_normal_form(&act(&g, &theta)?)?
            } else {
                let tr = parse_transform(&text, &name(&map))?.with_domain(src.domain.t);
                let image = tr.apply_reduced(&src);
                let inv = tr.time_inverse()?;
                let td = image.reparametrize(&inv, tr.image_domain());
                td.to_reduced(td.domain).ok_or_else(|| {
                    Fail(
                        EXIT_DOMAIN,
                        "image coefficients depend on t; not a reduced equation".to_string(),
                    )
                })?
            };
            emit(path.as_ref(), &format_reduced(&eq), out)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            src,
            map,
            tgt,
            samples,
            tol,
            manufactured,
            json,
        } => {
            let eq = load_reduced(&src, domain)?;
            let tr = parse_transform(&read(&map)?, &name(&map))?.with_domain(eq.domain.t);
            let u = parse_expression(manufactured.as_deref().unwrap_or(DEFAULT_MANUFACTURED))?;
            let cov = residual_covariance_check(&eq, &tr, &u, eq.domain, samples, tol, seed)?;
            let mut r = cov.report();
            let mut ok = cov.check.passed;
            if let Some(t) = &tgt {
                let target = load_reduced(t, None)?;
                let image = tr.apply_reduced(&eq);
                let lifted = TimeDependentEquation {
                    time_map: tr.t.clone(),
                    domain: image.domain,
                    ..target.to_time_dependent()
                };
                let cmp = compare_equations(&image, &lifted, image.domain, samples, tol, seed)?;
                r.set("target_match", cmp.equal).set("target_max_dev", cmp.max_dev);
                if let Some((coef, _)) = &cmp.worst {
                    if !cmp.equal {
                        r.set("target_worst", coef.as_str());
                    }
                }
                ok &= cmp.equal;
            }
            r.set("verified", ok);
            print_report(&r, json, out)?;
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
        Command::NormalForm {
            tag,
            params,
            order,
            out: path,
        } => {
            let tag: Tag = tag.parse()?;
            if tag == Tag::F0 {
                return Err(Fail(EXIT_DOMAIN, "F0 has no normal form".into()));
            }
            let p = parse_params(&read(&params)?, &name(&params), tag, order)?;
            let mut eq = instantiate_normal_form(&p)?;
            if let Some(d) = domain {
                let t = eq.domain.t;
                eq = eq.with_domain(SampleBox::new(t, d));
            }
            emit(path.as_ref(), &format_reduced(&eq), out)?;
            Ok(EXIT_OK)
        }
        Command::Audit { tag, trials, json } => {
            let tags = tag.iter().map(|t| t.parse::<Tag>()).collect::<Result<Vec<_>, _>>()?;
            let a = audit_paper(seed, trials, &tags);
            let text = if json { a.to_json_lines() } else { a.summary_table() };
            emit(None, &text, out)?;
            Ok(if a.passed() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn is_group_element(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .any(|l| l.split_once(':').is_some_and(|(k, _)| k.trim() == "tag"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("bkdv").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        assert_eq!(call(&["classify"]).0, EXIT_PARSE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_PARSE);
    }

    #[test]
    fn missing_file_is_a_parse_error() {
        let (code, _, err) = call(&["classify", "--input", "/nonexistent/e.eq"]);
        assert_eq!(code, EXIT_PARSE);
        assert!(err.contains("/nonexistent/e.eq"));
    }

    #[test]
    fn empty_audit_succeeds() {
        let (code, out, _) = call(&["audit", "--trials", "0", "--json"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.is_empty());
    }

    #[test]
    fn group_element_detection() {
        assert!(is_group_element("# c\ntag: II0\nc1: 1\n"));
        assert!(!is_group_element("T: t\nX1: 1\n"));
    }
}
