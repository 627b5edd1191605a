use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bkdv::expr::sample::sample_equiv;
use bkdv::io::parse_reduced;
use bkdv::model::{instantiate_normal_form, SubclassParams, Tag};
use tempfile::TempDir;

fn bkdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bkdv")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_burgers_with_linear_source() {
    let d = TempDir::new().unwrap();
    let eq = write(d.path(), "burgers_x.eq", "order: 2\nA[2]: 1\nB: x\n");
    let o = bkdv(&["classify", "--input", s(&eq)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("tag: IV0_2\n"), "{}", stdout(&o));

    let o = bkdv(&["classify", "--input", s(&eq), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tag"], "IV0_2");
    assert!((v["b1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn verify_identity_against_itself() {
    let d = TempDir::new().unwrap();
    let eq = write(
        d.path(),
        "a.eq",
        "order: 3\nA[3]: exp(x/2)\nA[2]: x\nA0: 1\nB: sin(x)\n",
    );
    let id = write(d.path(), "id.tr", "T: t\nX1: 1\nX0: 0\n");
    let o = bkdv(&["verify", "--src", s(&eq), "--map", s(&id), "--tgt", s(&eq), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["factor_min"].as_f64(), Some(1.0));
    assert_eq!(v["factor_max"].as_f64(), Some(1.0));
    assert_eq!(v["verified"], true);
}

#[test]
fn gated_normal_form_is_a_domain_error() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "p.txt", "alpha: -2\na[2]: 1\n");
    let o = bkdv(&["normal-form", "--tag", "I01", "--params", s(&p), "--order", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("(α+2)·a_r ≠ 0"), "{}", stderr(&o));
}

#[test]
fn parse_errors_name_file_and_line() {
    let d = TempDir::new().unwrap();
    let eq = write(d.path(), "bad.eq", "order: 2\nA[2]: 1\nA0: (x +\n");
    let o = bkdv(&["classify", "--input", s(&eq)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.eq:3"), "{}", stderr(&o));

    let o = bkdv(&["classify", "--input", s(&d.path().join("missing.eq"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bkdv(&["classify"]).status.code(), Some(2));
}

#[test]
fn normal_form_file_round_trips() {
    let d = TempDir::new().unwrap();
    let p = write(d.path(), "p.txt", "beta: 1/2\na00: 1\nb0: -3\na[2]: 2\na[3]: 1\n");
    let out = d.path().join("nf.eq");
    let o = bkdv(&[
        "normal-form",
        "--tag",
        "II0",
        "--params",
        s(&p),
        "--order",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got = parse_reduced(&fs::read_to_string(&out).unwrap(), "nf.eq", None).unwrap();
    let mut th = SubclassParams::new(Tag::II0, vec![2.0, 1.0]);
    th.beta = 0.5;
    th.a00 = 1.0;
    th.b0 = -3.0;
    let want = instantiate_normal_form(&th).unwrap();
    for (a, b) in got
        .a
        .iter()
        .chain([&got.a0, &got.b])
        .zip(want.a.iter().chain([&want.a0, &want.b]))
    {
        assert!(
            sample_equiv(a, b, want.domain, 64, 1e-14, 1).unwrap().equal,
            "{a} vs {b}"
        );
    }
    let o = bkdv(&["classify", "--input", s(&out)]);
    assert!(stdout(&o).starts_with("tag: II0"), "{}", stdout(&o));
}

#[test]
fn transform_then_verify() {
    let d = TempDir::new().unwrap();
    let eq = write(d.path(), "a.eq", "order: 2\nA[2]: 1 + x^2\nA0: x\nB: cos(x)\n");
    let tr = write(d.path(), "m.tr", "T: 2*t + 1\nX1: 3\nX0: -1\n");
    let img = d.path().join("img.eq");
    let o = bkdv(&["transform", "--input", s(&eq), "--map", s(&tr), "--out", s(&img)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bkdv(&["verify", "--src", s(&eq), "--map", s(&tr), "--tgt", s(&img)]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(
        stdout(&o).contains("factor_min: 7.5000000000000000e-1"),
        "{}",
        stdout(&o)
    );

    // the source is not the image of itself under this map
    let o = bkdv(&["verify", "--src", s(&eq), "--map", s(&tr), "--tgt", s(&eq)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("target_match: false"));

    // time-dependent images are refused
    let tr2 = write(d.path(), "m2.tr", "T: t\nX1: 1 + t\nX0: 0\n");
    let o = bkdv(&["transform", "--input", s(&eq), "--map", s(&tr2)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn group_element_acts_within_the_subclass() {
    let d = TempDir::new().unwrap();
    let eq = write(d.path(), "q.eq", "order: 2\nA[2]: (x+1)^2\nA0: 1\nB: 5*(x+1)\n");
    let g = write(d.path(), "g.ge", "tag: II0\nc1: 1\nc3: 2\nc4: 1\n");
    let out = d.path().join("q2.eq");
    let o = bkdv(&["transform", "--input", s(&eq), "--map", s(&g), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bkdv(&["classify", "--input", s(&out)]);
    assert!(stdout(&o).starts_with("tag: II0"), "{}", stdout(&o));

    let wrong = write(d.path(), "w.ge", "tag: III\nc1: 1\n");
    let o = bkdv(&["transform", "--input", s(&eq), "--map", s(&wrong)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gauge_writes_equation_and_map() {
    let d = TempDir::new().unwrap();
    let st = write(
        d.path(),
        "st.eq",
        "C: 2*x\nA[1]: x\nA[2]: x^2\nA0: 1\nB: x\ndomain: 0.5 2\n",
    );
    let (out, map) = (d.path().join("g.eq"), d.path().join("g.map"));
    let o = bkdv(&["gauge", "--input", s(&st), "--out", s(&out), "--emit-map", s(&map)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("passed: true"));
    let eq = parse_reduced(&fs::read_to_string(&out).unwrap(), "g.eq", None).unwrap();
    assert_eq!(eq.order, 2);
    let m = bkdv::io::parse_gauge(&fs::read_to_string(&map).unwrap(), "g.map").unwrap();
    assert!((m.x_map.eval(0.0, 1.0) - 0.0).abs() < 1e-15);

    let bad = write(d.path(), "sign.eq", "C: x - 1\nA[2]: 1\n");
    assert_eq!(bkdv(&["gauge", "--input", s(&bad)]).status.code(), Some(3));
}

#[test]
fn audit_is_byte_identical_for_equal_seeds() {
    let a = bkdv(&[
        "audit", "--seed", "3", "--trials", "2", "--tag", "I1", "--tag", "IV1", "--json",
    ]);
    let b = bkdv(&[
        "audit", "--seed", "3", "--trials", "2", "--tag", "I1", "--tag", "IV1", "--json",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = bkdv(&[
        "audit", "--seed", "4", "--trials", "2", "--tag", "I1", "--tag", "IV1", "--json",
    ]);
    assert_ne!(a.stdout, c.stdout);
    for line in stdout(&a).lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
    let o = bkdv(&["audit", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn domain_override() {
    let d = TempDir::new().unwrap();
    let eq = write(d.path(), "e.eq", "order: 2\nA[2]: 1\nA0: ln(x)\n");
    // ln is fine on the default x-range, and the override is carried through
    let o = bkdv(&["--domain", "1", "3", "classify", "--input", s(&eq), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bkdv(&["--domain", "3", "1", "classify", "--input", s(&eq)]);
    assert_eq!(o.status.code(), Some(2));
}
