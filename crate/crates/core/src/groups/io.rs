//! Group-element files: one `key: value` pair per line, `#` starts a comment.
//!
//! ```text
//! tag: II0
//! c1: 1
//! c3: 1/2
//! epsilon: 1
//! ```

use super::{GroupElement, Variant};
use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::model::{SubclassParams, Tag};

fn file_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::File {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Constant-valued expression, e.g. `-3/2` or `exp(1)`.
pub(crate) fn parse_constant(s: &str, file: &str, line: usize) -> Result<f64> {
    let e = parse_expression(s).map_err(|e| file_err(file, line, e.to_string()))?;
    if !e.is_constant() {
        return Err(file_err(file, line, format!("`{s}` is not a constant")));
    }
    let v = e.eval(0.0, 0.0);
    if !v.is_finite() {
        return Err(file_err(file, line, format!("`{s}` is not finite")));
    }
    Ok(v)
}

/// Parse a group-element file. A `branch:` line, if present, is returned for
/// the caller to compare against the computed branch.
pub fn parse_group_element(text: &str, file: &str) -> Result<(GroupElement, Option<String>)> {
    let mut tag = None;
    let mut g = GroupElement::new(Tag::F0, [0.0; 9]);
    let mut branch = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once(':')
            .ok_or_else(|| file_err(file, line, "expected `key: value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "tag" => tag = Some(value.parse::<Tag>().map_err(|e| file_err(file, line, e.to_string()))?),
            "branch" => branch = Some(value.to_string()),
            "epsilon" | "eps" => g.eps = parse_constant(value, file, line)?,
            "s" => g.s = parse_constant(value, file, line)?,
            "P1" => g.p1 = value.parse().map_err(|e: Error| file_err(file, line, e.to_string()))?,
            "P2" => g.p2 = value.parse().map_err(|e: Error| file_err(file, line, e.to_string()))?,
            "variant" => {
                g.variant = match value {
                    "effective" => Variant::Effective,
                    "full" => Variant::Full,
                    other => return Err(file_err(file, line, format!("unknown variant `{other}`"))),
                }
            }
            k if k.len() == 2 && k.starts_with('c') && k.as_bytes()[1].is_ascii_digit() && k.as_bytes()[1] <= b'8' => {
                let idx = (k.as_bytes()[1] - b'0') as usize;
                g.c[idx] = parse_constant(value, file, line)?;
            }
            other => return Err(file_err(file, line, format!("unknown key `{other}`"))),
        }
    }
    g.tag = tag.ok_or_else(|| file_err(file, 0, "missing `tag:` line"))?;
    Ok((g, branch))
}

/// Serialize an element; the branch line is included when `θ` is known.
pub fn format_group_element(g: &GroupElement, theta: Option<&SubclassParams>) -> String {
    let mut out = format!("tag: {}\n", g.tag);
    if let Some(th) = theta {
        out += &format!("branch: {}\n", g.branch(th));
    }
    for (i, v) in g.c.iter().enumerate() {
        out += &format!("c{i}: {}\n", crate::report::fmt_f64(*v));
    }
    out += &format!("epsilon: {}\n", crate::report::fmt_f64(g.eps));
    out += &format!("P1: {}\nP2: {}\n", g.p1.name(), g.p2.name());
    out += &format!(
        "variant: {}\n",
        match g.variant {
            Variant::Effective => "effective",
            Variant::Full => "full",
        }
    );
    out += &format!("s: {}\n", crate::report::fmt_f64(g.s));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{Stage1, Stage2};

    #[test]
    fn round_trip() {
        let mut g = GroupElement::new(Tag::IV0_2, [1.0, 2.0, -0.5, 0.25, 3.0, 0.1, 1e-17, -7.0, 0.5]);
        g.eps = -1.0;
        g.p1 = Stage1::Tan;
        g.p2 = Stage2::Log;
        g.s = 0.3;
        let text = format_group_element(&g, None);
        let (back, branch) = parse_group_element(&text, "g.grp").unwrap();
        assert_eq!(back, g);
        assert!(branch.is_none());
    }

    #[test]
    fn errors_carry_line() {
        let e = parse_group_element("tag: II0\nc9: 1\n", "g.grp").unwrap_err();
        assert_eq!(
            e,
            Error::File {
                file: "g.grp".into(),
                line: 2,
                message: "unknown key `c9`".into()
            }
        );
        let e = parse_group_element("tag: II0\nc1: 1/0\n", "g.grp").unwrap_err();
        assert!(matches!(e, Error::File { line: 2, .. }));
        assert!(parse_group_element("c1: 1\n", "g.grp").is_err());
    }

    #[test]
    fn rational_values() {
        let (g, _) = parse_group_element("tag: II0 # comment\nc3: -3/2\n", "g").unwrap();
        assert_eq!(g.c[3], -1.5);
    }
}
