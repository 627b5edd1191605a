//! Line-oriented files for equations, transformations, gauge maps and
//! subclass parameters. Each line is `key: value`; `#` starts a comment.
//!
//! ```text
//! order: 2
//! A[2]: (x+1)^2
//! A0: 1
//! B: 5*(x+1)
//! domain: 0.25 2
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::sample::SampleBox;
use crate::expr::{parse_expression, Expr, Var};
use crate::model::{ReducedEquation, StationaryGeneralEquation, SubclassParams, Tag};
use crate::report::fmt_f64;
use crate::transform::{FiberTransformation, GaugeTransformation};

fn file_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::File {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Non-empty `(line, key, value)` triples.
fn entries(text: &str, file: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once(':')
            .ok_or_else(|| file_err(file, i + 1, "expected `key: value`"))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn expr_at(value: &str, file: &str, line: usize) -> Result<Expr> {
    parse_expression(value).map_err(|e| file_err(file, line, e.to_string()))
}

fn number_at(value: &str, file: &str, line: usize) -> Result<f64> {
    let e = expr_at(value, file, line)?;
    let v = e.eval(0.0, 0.0);
    if !e.is_constant() || !v.is_finite() {
        return Err(file_err(file, line, format!("`{value}` is not a finite constant")));
    }
    Ok(v)
}

/// `A[k]` → k.
fn coeff_index(key: &str) -> Option<usize> {
    key.strip_prefix("A[")?.strip_suffix(']')?.trim().parse().ok()
}

/// Contents of an equation file before it is committed to a class.
#[derive(Clone, Debug)]
pub struct EquationFile {
    pub order: usize,
    /// `A^k` for `k = 0..=order`; `A[0]` is the `A0` line.
    pub a: Vec<Expr>,
    pub b: Expr,
    pub c: Option<Expr>,
    /// Whether an `A[1]` line was given.
    pub has_a1: bool,
    pub domain: Option<(f64, f64)>,
}

impl EquationFile {
    pub fn parse(text: &str, file: &str) -> Result<EquationFile> {
        let mut order = None;
        let mut coeffs: BTreeMap<usize, (usize, Expr)> = BTreeMap::new();
        let mut b = None;
        let mut c = None;
        let mut domain = None;
        for (line, key, value) in entries(text, file)? {
            match key.as_str() {
                "order" => {
                    let r: usize = value
                        .parse()
                        .map_err(|_| file_err(file, line, format!("order `{value}` is not an integer")))?;
                    if r < 2 {
                        return Err(file_err(file, line, "order must be at least 2"));
                    }
                    order = Some((line, r));
                }
                "A0" => {
                    coeffs.insert(0, (line, expr_at(&value, file, line)?));
                }
                "B" => b = Some(expr_at(&value, file, line)?),
                "C" => c = Some(expr_at(&value, file, line)?),
                "domain" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(file_err(file, line, "domain needs `<lo> <hi>`"));
                    }
                    let lo = number_at(parts[0], file, line)?;
                    let hi = number_at(parts[1], file, line)?;
                    if !(lo < hi) {
                        return Err(file_err(file, line, "domain needs lo < hi"));
                    }
                    domain = Some((lo, hi));
                }
                k => match coeff_index(k) {
                    Some(idx) => {
                        if coeffs.insert(idx, (line, expr_at(&value, file, line)?)).is_some() {
                            return Err(file_err(file, line, format!("duplicate key `{k}`")));
                        }
                    }
                    None => return Err(file_err(file, line, format!("unknown key `{k}`"))),
                },
            }
        }
        let top = coeffs.keys().copied().max().unwrap_or(0);
        let r = match order {
            Some((line, r)) => {
                if top > r {
                    return Err(file_err(file, line, format!("A[{top}] given but order is {r}")));
                }
                r
            }
            None if top >= 2 => top,
            None => return Err(file_err(file, 0, "missing `order:` and no A[k] with k ≥ 2")),
        };
        let has_a1 = coeffs.contains_key(&1);
        let a = (0..=r)
            .map(|k| coeffs.get(&k).map(|(_, e)| e.clone()).unwrap_or_else(Expr::zero))
            .collect();
        Ok(EquationFile {
            order: r,
            a,
            b: b.unwrap_or_else(Expr::zero),
            c,
            has_a1,
            domain,
        })
    }

    fn sample_box(&self, domain: Option<(f64, f64)>) -> SampleBox {
        let mut bx = SampleBox::standard();
        if let Some(d) = domain.or(self.domain) {
            bx.x = d;
        }
        bx
    }

    /// Whether the file describes a stationary-general equation.
    pub fn is_general(&self) -> bool {
        self.c.is_some() || self.has_a1
    }

    /// The reduced equation; `C` and `A[1]` must be absent or exactly 1 and 0.
    pub fn to_reduced(&self, domain: Option<(f64, f64)>) -> Result<ReducedEquation> {
        if self.c.as_ref().is_some_and(|c| !c.is_one()) || !self.a[1].is_zero() {
            return Err(Error::domain("equation has C ≠ 1 or A[1] ≠ 0; gauge it first"));
        }
        ReducedEquation::new(
            self.a[2..].to_vec(),
            self.a[0].clone(),
            self.b.clone(),
            self.sample_box(domain),
        )
    }

    pub fn to_stationary(&self, domain: Option<(f64, f64)>) -> Result<StationaryGeneralEquation> {
        StationaryGeneralEquation::new(
            self.c.clone().unwrap_or_else(Expr::one),
            self.a.clone(),
            self.b.clone(),
            self.sample_box(domain),
        )
    }
}

pub fn parse_reduced(text: &str, file: &str, domain: Option<(f64, f64)>) -> Result<ReducedEquation> {
    EquationFile::parse(text, file)?.to_reduced(domain)
}

pub fn format_reduced(eq: &ReducedEquation) -> String {
    format_coefficients(eq.order, &eq.a, &eq.a0, &eq.b, eq.domain.x)
}

/// Equation file text from coefficient expressions.
pub fn format_coefficients(order: usize, a: &[Expr], a0: &Expr, b: &Expr, x_domain: (f64, f64)) -> String {
    let mut out = format!("order: {order}\n");
    for (i, e) in a.iter().enumerate() {
        let _ = writeln!(out, "A[{}]: {e}", i + 2);
    }
    let _ = writeln!(out, "A0: {a0}");
    let _ = writeln!(out, "B: {b}");
    let _ = writeln!(out, "domain: {} {}", fmt_f64(x_domain.0), fmt_f64(x_domain.1));
    out
}

/// Transform file: `T`, `X1`, `X0` as expressions in t; optional `Tinv`.
pub fn parse_transform(text: &str, file: &str) -> Result<FiberTransformation> {
    let mut parts: [Option<Expr>; 4] = [None, None, None, None];
    for (line, key, value) in entries(text, file)? {
        let idx = match key.as_str() {
            "T" => 0,
            "X1" => 1,
            "X0" => 2,
            "Tinv" => 3,
            k => return Err(file_err(file, line, format!("unknown key `{k}`"))),
        };
        let e = expr_at(&value, file, line)?;
        if e.depends_on(Var::X) {
            return Err(file_err(file, line, format!("{key} must depend on t only")));
        }
        parts[idx] = Some(e);
    }
    let [t, x1, x0, inv] = parts;
    let t = t.ok_or_else(|| file_err(file, 0, "missing `T:` line"))?;
    let x1 = x1.ok_or_else(|| file_err(file, 0, "missing `X1:` line"))?;
    let mut tr = FiberTransformation::new(t, x1, x0.unwrap_or_else(Expr::zero));
    if let Some(i) = inv {
        tr = tr.with_inverse(i);
    }
    Ok(tr)
}

pub fn format_transform(tr: &FiberTransformation) -> String {
    let mut out = format!("T: {}\nX1: {}\nX0: {}\n", tr.t, tr.x1, tr.x0);
    if let Some(i) = &tr.t_inverse {
        let _ = writeln!(out, "Tinv: {i}");
    }
    out
}

/// Gauge map file: `X`, `Xinv`, `U0` in x, and the constants `c1`, `c3`.
pub fn format_gauge(map: &GaugeTransformation) -> String {
    format!(
        "X: {}\nXinv: {}\nU0: {}\nc1: {}\nc3: {}\ndomain: {} {}\n",
        map.x_map,
        map.x_inv,
        map.u0,
        fmt_f64(map.c1),
        fmt_f64(map.c3),
        fmt_f64(map.x_domain.0),
        fmt_f64(map.x_domain.1)
    )
}

pub fn parse_gauge(text: &str, file: &str) -> Result<GaugeTransformation> {
    let mut map = GaugeTransformation::identity(SampleBox::standard().x);
    for (line, key, value) in entries(text, file)? {
        match key.as_str() {
            "X" => map.x_map = expr_at(&value, file, line)?,
            "Xinv" => map.x_inv = expr_at(&value, file, line)?,
            "U0" => map.u0 = expr_at(&value, file, line)?,
            "c1" => map.c1 = number_at(&value, file, line)?,
            "c3" => map.c3 = number_at(&value, file, line)?,
            "domain" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(file_err(file, line, "domain needs `<lo> <hi>`"));
                }
                map.x_domain = (number_at(parts[0], file, line)?, number_at(parts[1], file, line)?);
            }
            k => return Err(file_err(file, line, format!("unknown key `{k}`"))),
        }
    }
    Ok(map)
}

/// Subclass parameter file: `beta`, `alpha`, `a[j]` (or `a<j>`), `a01`,
/// `a00`, `b0`, `b1`, `b2`. Parameters fixed by the subclass constraints are
/// filled in when absent; given values are kept and checked by the gates.
pub fn parse_params(text: &str, file: &str, tag: Tag, order: usize) -> Result<SubclassParams> {
    if order < 2 {
        return Err(Error::domain(format!("order must be at least 2, got {order}")));
    }
    let mut p = SubclassParams::new(tag, vec![0.0; order - 1]);
    let mut given: Vec<String> = Vec::new();
    for (line, key, value) in entries(text, file)? {
        let v = number_at(&value, file, line)?;
        let j = key
            .strip_prefix("a[")
            .and_then(|s| s.strip_suffix(']'))
            .or_else(|| key.strip_prefix('a').filter(|s| !s.starts_with('0')))
            .and_then(|s| s.parse::<usize>().ok());
        match (key.as_str(), j) {
            (_, Some(j)) => {
                if !(2..=order).contains(&j) {
                    return Err(file_err(file, line, format!("a[{j}] outside 2..={order}")));
                }
                p.a[j - 2] = v;
            }
            ("beta", _) => p.beta = v,
            ("alpha", _) => p.alpha = v,
            ("a01", _) => p.a01 = v,
            ("a00", _) => p.a00 = v,
            ("b0", _) => p.b0 = v,
            ("b1", _) => p.b1 = v,
            ("b2", _) => p.b2 = v,
            (k, None) => return Err(file_err(file, line, format!("unknown key `{k}`"))),
        }
        given.push(key);
    }
    let mut done = p.clone().complete();
    for k in &given {
        match k.as_str() {
            "alpha" => done.alpha = p.alpha,
            "a01" => done.a01 = p.a01,
            "a00" => done.a00 = p.a00,
            "b0" => done.b0 = p.b0,
            "b1" => done.b1 = p.b1,
            _ => {}
        }
    }
    Ok(done)
}

pub fn format_params(p: &SubclassParams) -> String {
    let mut out = String::new();
    for (k, v) in [
        ("beta", p.beta),
        ("alpha", p.alpha),
        ("a01", p.a01),
        ("a00", p.a00),
        ("b0", p.b0),
        ("b1", p.b1),
        ("b2", p.b2),
    ] {
        let _ = writeln!(out, "{k}: {}", fmt_f64(v));
    }
    for (i, v) in p.a.iter().enumerate() {
        let _ = writeln!(out, "a[{}]: {}", i + 2, fmt_f64(*v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::sample::sample_equiv;

    #[test]
    fn equation_round_trip() {
        let text = "order: 3\nA[2]: x^2\nA[3]: sin(x) # leading\nA0: 1/(1+x)\nB: exp(x) - 2\ndomain: 0.5 1.5\n";
        let eq = parse_reduced(text, "e.eq", None).unwrap();
        assert_eq!(eq.order, 3);
        assert_eq!(eq.domain.x, (0.5, 1.5));
        let back = parse_reduced(&format_reduced(&eq), "back.eq", None).unwrap();
        for (a, b) in
            eq.a.iter()
                .chain([&eq.a0, &eq.b])
                .zip(back.a.iter().chain([&back.a0, &back.b]))
        {
            assert!(sample_equiv(a, b, eq.domain, 32, 1e-15, 1).unwrap().equal);
        }
    }

    #[test]
    fn order_is_inferred_and_gaps_are_zero() {
        let eq = parse_reduced("A[4]: 1\nB: x", "e", None).unwrap();
        assert_eq!(eq.order, 4);
        assert!(eq.a[0].is_zero() && eq.a[1].is_zero() && eq.a0.is_zero());
    }

    #[test]
    fn errors_have_line_numbers() {
        let e = EquationFile::parse("order: 2\nA[2]: 1\nfoo: 3\n", "e.eq").unwrap_err();
        assert!(matches!(e, Error::File { line: 3, .. }), "{e}");
        let e = EquationFile::parse("order: 2\nA[2]: 1 +\n", "e.eq").unwrap_err();
        assert!(matches!(e, Error::File { line: 2, .. }), "{e}");
        let e = EquationFile::parse("order: 2\nA[3]: 1\n", "e.eq").unwrap_err();
        assert!(e.is_parse());
        assert!(parse_reduced("order: 2\nA[2]: t\n", "e", None).is_err());
    }

    #[test]
    fn stationary_input_is_not_reduced() {
        let f = EquationFile::parse("C: 2\nA[1]: 1\nA[2]: 1\n", "s.eq").unwrap();
        assert!(f.is_general());
        assert!(matches!(f.to_reduced(None), Err(Error::Domain(_))));
        let st = f.to_stationary(None).unwrap();
        assert_eq!(st.order, 2);
    }

    #[test]
    fn transform_round_trip() {
        let tr = parse_transform("T: 2*t\nX1: 3\nX0: t^2\n", "m.tr").unwrap();
        let back = parse_transform(&format_transform(&tr), "m.tr").unwrap();
        assert_eq!(back.t.eval(0.3, 0.0), 0.6);
        assert_eq!(back.x0.eval(0.5, 0.0), 0.25);
        assert!(parse_transform("T: x\nX1: 1\n", "m.tr").is_err());
        assert!(parse_transform("X1: 1\n", "m.tr").is_err());
    }

    #[test]
    fn params_fill_constrained_values() {
        let p = parse_params("alpha: 1\na00: 1/2\na[3]: 1\n", "p", Tag::I01, 3).unwrap();
        assert!(p.gate_violations().is_empty());
        assert_eq!(p.b0, -2.0 * 0.25 / 9.0);
        let p = parse_params("alpha: -2\na2: 1\n", "p", Tag::I01, 2).unwrap();
        assert!(!p.gate_violations().is_empty());
        // a given value that breaks a constraint is kept, so the gate reports it
        let p = parse_params("alpha: 1\na00: 1\nb0: 5\na[2]: 1\n", "p", Tag::I01, 2).unwrap();
        assert!(p.gate_violations().iter().any(|v| v.contains("have 5")));
    }
}
