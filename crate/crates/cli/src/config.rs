//! Config files: TOML sections whose keys are dotted index paths relative to
//! the section, e.g. `gamma.1.2.3 = "x1"` under `[connection]`. Indices are
//! 1-based; unspecified components are zero.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use courant_core::algebroid::AForm;
use courant_core::charclass::Hoist;
use courant_core::courant::Quintuple;
use courant_core::fiber::QuadLieAlgebra;
use courant_core::geometry::{FConnection, FForm, GConnection, GValuedForm, Patch};
use courant_core::linalg;
use courant_core::morphism::IsoData;
use courant_core::scalar::{parse_poly, Poly, Rational};
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.to_string(), message: message.into() }
}

const SECTIONS: [&str; 10] =
    ["base", "fiber", "connection", "curvature", "hform", "nabla_f", "iso", "hoist", "omega", "cform"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub patch: Patch,
    pub fiber: QuadLieAlgebra,
    pub conn: GConnection,
    pub curv: GValuedForm,
    pub hform: FForm,
    pub nabla_f: Option<FConnection>,
    pub iso: Option<IsoData>,
    pub hoist: Option<Hoist>,
    pub omega: Option<FForm>,
    pub cform: Option<AForm>,
}

impl Config {
    pub fn from_quintuple(q: &Quintuple) -> Self {
        Config {
            patch: q.patch(),
            fiber: q.fiber().clone(),
            conn: q.conn().clone(),
            curv: q.curv().clone(),
            hform: q.hform().clone(),
            nabla_f: None,
            iso: None,
            hoist: None,
            omega: None,
            cform: None,
        }
    }

    pub fn quintuple(&self) -> Result<Quintuple, ConfigError> {
        Quintuple::new(self.patch, self.fiber.clone(), self.conn.clone(), self.curv.clone(), self.hform.clone())
            .map_err(|e| ConfigError::Shape(e.to_string()))
    }

    pub fn n(&self) -> usize {
        self.patch.n
    }

    pub fn p(&self) -> usize {
        self.patch.p
    }

    pub fn m(&self) -> usize {
        self.fiber.dim()
    }
}

pub fn parse_config(path: &Path) -> Result<Config, ConfigError> {
    let text =
        fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_str(&text)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// A leaf value with its full dotted path and the key parts below the
/// section name.
struct Entry<'a> {
    path: String,
    parts: Vec<String>,
    value: &'a Value,
}

fn flatten<'a>(table: &'a Table, prefix: &str, parts: &[String], out: &mut Vec<Entry<'a>>) {
    for (k, v) in table {
        let path = format!("{prefix}.{k}");
        let mut p = parts.to_vec();
        p.push(k.clone());
        match v {
            Value::Table(t) => flatten(t, &path, &p, out),
            _ => out.push(Entry { path, parts: p, value: v }),
        }
    }
}

fn section<'a>(root: &'a Table, name: &str) -> Result<Option<Vec<Entry<'a>>>, ConfigError> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => {
            let mut out = Vec::new();
            flatten(t, name, &[], &mut out);
            Ok(Some(out))
        }
        Some(_) => Err(field_err(name, "expected a section")),
    }
}

struct Ctx {
    n: usize,
    p: usize,
    m: usize,
}

fn integer(e: &Entry) -> Result<usize, ConfigError> {
    match e.value {
        Value::Integer(v) if *v >= 0 => Ok(*v as usize),
        _ => Err(field_err(&e.path, "expected a non-negative integer")),
    }
}

fn string<'a>(e: &'a Entry) -> Result<&'a str, ConfigError> {
    e.value.as_str().ok_or_else(|| field_err(&e.path, "expected a quoted string"))
}

fn poly_value(e: &Entry, n: usize) -> Result<Poly, ConfigError> {
    parse_poly(string(e)?, n).map_err(|err| field_err(&e.path, err.to_string()))
}

fn rational_value(e: &Entry) -> Result<Rational, ConfigError> {
    string(e)?.parse().map_err(|_| field_err(&e.path, "expected a rational number such as \"-3/2\""))
}

/// Parses the indices after the key name against the given bounds.
fn indices(e: &Entry, bounds: &[usize]) -> Result<Vec<usize>, ConfigError> {
    let idx = &e.parts[1..];
    if idx.len() != bounds.len() {
        return Err(field_err(&e.path, format!("expected {} indices", bounds.len())));
    }
    idx.iter()
        .zip(bounds)
        .map(|(s, &bound)| match s.parse::<usize>() {
            Ok(i) if (1..=bound).contains(&i) => Ok(i - 1),
            _ => Err(field_err(&e.path, format!("index `{s}` outside 1..={bound}"))),
        })
        .collect()
}

fn strictly_increasing(e: &Entry, idx: &[usize]) -> Result<(), ConfigError> {
    if idx.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(field_err(&e.path, "indices must be strictly increasing"))
    }
}

/// Antisymmetric components may only be given on increasing indices; a
/// repeated index is accepted only with value zero.
fn antisymmetric(e: &Entry, idx: &[usize], value: &Poly) -> Result<bool, ConfigError> {
    let repeated = idx.windows(2).any(|w| w[0] == w[1]);
    if repeated {
        if value.is_zero() {
            return Ok(false);
        }
        return Err(field_err(&e.path, "diagonal component of an antisymmetric form must be absent or zero"));
    }
    strictly_increasing(e, idx)?;
    Ok(true)
}

fn unknown(e: &Entry) -> ConfigError {
    field_err(&e.path, "unknown key")
}

pub fn parse_str(text: &str) -> Result<Config, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Syntax { line, column, message: e.message().to_string() }
    })?;
    if let Some(bad) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(field_err(bad, "unknown section"));
    }

    let base = section(&root, "base")?.ok_or_else(|| field_err("base", "missing section"))?;
    let (mut n, mut p) = (None, None);
    for e in &base {
        match e.parts.as_slice() {
            [k] if k == "n" => n = Some(integer(e)?),
            [k] if k == "p" => p = Some(integer(e)?),
            _ => return Err(unknown(e)),
        }
    }
    let n = n.ok_or_else(|| field_err("base.n", "missing"))?;
    let p = p.ok_or_else(|| field_err("base.p", "missing"))?;
    let patch = Patch::new(n, p).map_err(|e| ConfigError::Shape(e.to_string()))?;

    let fiber_entries = section(&root, "fiber")?.ok_or_else(|| field_err("fiber", "missing section"))?;
    let dim = fiber_entries
        .iter()
        .find(|e| e.parts.len() == 1 && e.parts[0] == "dim")
        .ok_or_else(|| field_err("fiber.dim", "missing"))
        .and_then(integer)?;
    let ctx = Ctx { n, p, m: dim };
    let fiber = parse_fiber(&fiber_entries, dim)?;

    let mut conn = GConnection::flat(n, p, dim);
    for e in section(&root, "connection")?.unwrap_or_default() {
        if e.parts[0] != "gamma" {
            return Err(unknown(&e));
        }
        let idx = indices(&e, &[p, dim, dim])?;
        conn.gamma[idx[0]][idx[1]][idx[2]] = poly_value(&e, n)?;
    }

    let mut curv = GValuedForm::zero(n, p, dim, 2);
    for e in section(&root, "curvature")?.unwrap_or_default() {
        if e.parts[0] != "R" {
            return Err(unknown(&e));
        }
        let idx = indices(&e, &[p, p, dim])?;
        let v = poly_value(&e, n)?;
        if antisymmetric(&e, &idx[..2], &v)? {
            let mut vec = curv.get(&idx[..2]);
            vec[idx[2]] = v;
            curv.set(&idx[..2], vec).map_err(|err| field_err(&e.path, err.to_string()))?;
        }
    }

    let hform = parse_fform(section(&root, "hform")?.unwrap_or_default(), "H", 3, &ctx)?;

    let nabla_f = section(&root, "nabla_f")?
        .map(|entries| {
            let mut fc = FConnection::zero(n, p);
            for e in entries {
                if e.parts[0] != "gamma" {
                    return Err(unknown(&e));
                }
                let idx = indices(&e, &[p, p, p])?;
                fc.gamma[idx[0]][idx[1]][idx[2]] = poly_value(&e, n)?;
            }
            Ok(fc)
        })
        .transpose()?;

    let iso = section(&root, "iso")?.map(|entries| parse_iso(entries, &ctx)).transpose()?;

    let hoist = section(&root, "hoist")?
        .map(|entries| {
            let mut j = vec![linalg::zero_vec(n, dim); p];
            for e in entries {
                if e.parts[0] != "J" {
                    return Err(unknown(&e));
                }
                let idx = indices(&e, &[p, dim])?;
                j[idx[0]][idx[1]] = poly_value(&e, n)?;
            }
            Ok(Hoist { j })
        })
        .transpose()?;

    let omega = section(&root, "omega")?.map(|entries| parse_fform(entries, "w", 2, &ctx)).transpose()?;
    let cform = section(&root, "cform")?.map(|entries| parse_cform(entries, &ctx)).transpose()?;

    Ok(Config { patch, fiber, conn, curv, hform, nabla_f, iso, hoist, omega, cform })
}

fn parse_fiber(entries: &[Entry], dim: usize) -> Result<QuadLieAlgebra, ConfigError> {
    let mut c = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
    let mut g = vec![vec![Rational::zero(); dim]; dim];
    for e in entries {
        match e.parts[0].as_str() {
            "dim" if e.parts.len() == 1 => {}
            "bracket" => {
                let idx = indices(e, &[dim, dim, dim])?;
                c[idx[0]][idx[1]][idx[2]] = rational_value(e)?;
            }
            "metric" => {
                let idx = indices(e, &[dim, dim])?;
                g[idx[0]][idx[1]] = rational_value(e)?;
            }
            _ => return Err(unknown(e)),
        }
    }
    QuadLieAlgebra::new(dim, c, g).map_err(|e| ConfigError::Shape(e.to_string()))
}

fn parse_fform(entries: Vec<Entry>, key: &str, degree: usize, ctx: &Ctx) -> Result<FForm, ConfigError> {
    let mut w = FForm::zero(ctx.n, ctx.p, degree);
    for e in entries {
        if e.parts[0] != key {
            return Err(unknown(&e));
        }
        let idx = indices(&e, &vec![ctx.p; degree])?;
        let v = poly_value(&e, ctx.n)?;
        if antisymmetric(&e, &idx, &v)? {
            w.set(&idx, v).map_err(|err| field_err(&e.path, err.to_string()))?;
        }
    }
    Ok(w)
}

fn parse_iso(entries: Vec<Entry>, ctx: &Ctx) -> Result<IsoData, ConfigError> {
    let (n, p, m) = (ctx.n, ctx.p, ctx.m);
    let mut tau = linalg::zero_matrix(n, m, m);
    let mut phi = vec![linalg::zero_vec(n, m); p];
    let mut beta = linalg::zero_matrix(n, p, p);
    for e in entries {
        match e.parts[0].as_str() {
            "tau" => {
                let idx = indices(&e, &[m, m])?;
                tau[idx[0]][idx[1]] = poly_value(&e, n)?;
            }
            "phi" => {
                let idx = indices(&e, &[p, m])?;
                phi[idx[0]][idx[1]] = poly_value(&e, n)?;
            }
            "beta" => {
                let idx = indices(&e, &[p, p])?;
                beta[idx[0]][idx[1]] = poly_value(&e, n)?;
            }
            _ => return Err(unknown(&e)),
        }
    }
    let mut form = GValuedForm::zero(n, p, m, 1);
    for (a, v) in phi.into_iter().enumerate() {
        form.set(&[a], v).expect("in range");
    }
    Ok(IsoData { tau, phi: form, beta })
}

fn parse_cform(entries: Vec<Entry>, ctx: &Ctx) -> Result<AForm, ConfigError> {
    let (n, p, m) = (ctx.n, ctx.p, ctx.m);
    let mut c = AForm::zero(n, m, p, 3);
    for e in entries {
        let fibers = match e.parts[0].as_str() {
            "ggg" => 3,
            "ggf" => 2,
            "gff" => 1,
            "fff" => 0,
            _ => return Err(unknown(&e)),
        };
        let bounds: Vec<usize> = (0..3).map(|t| if t < fibers { m } else { p }).collect();
        let idx = indices(&e, &bounds)?;
        let (fib, leaf) = idx.split_at(fibers);
        strictly_increasing(&e, fib)?;
        strictly_increasing(&e, leaf)?;
        c.set_bigraded(fib, leaf, poly_value(&e, n)?).map_err(|err| field_err(&e.path, err.to_string()))?;
    }
    Ok(c)
}

fn key(name: &str, idx: &[usize]) -> String {
    let mut s = name.to_string();
    for i in idx {
        write!(s, ".{}", i + 1).expect("string write");
    }
    s
}

fn line(out: &mut String, name: &str, idx: &[usize], value: impl std::fmt::Display) {
    writeln!(out, "{} = \"{}\"", key(name, idx), value).expect("string write");
}

/// Canonical text: fixed section order, nonzero components only, keys in
/// increasing index order, values in canonical polynomial form.
pub fn print_config(c: &Config) -> String {
    let (p, m) = (c.p(), c.m());
    let mut out = String::new();
    writeln!(out, "[base]\nn = {}\np = {}\n", c.n(), p).expect("string write");
    writeln!(out, "[fiber]\ndim = {m}").expect("string write");
    for (i, ci) in c.fiber.structure_constants().iter().enumerate() {
        for (j, cij) in ci.iter().enumerate() {
            for (k, v) in cij.iter().enumerate() {
                if !v.is_zero() {
                    line(&mut out, "bracket", &[i, j, k], v);
                }
            }
        }
    }
    for (i, row) in c.fiber.metric().iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_zero() {
                line(&mut out, "metric", &[i, j], v);
            }
        }
    }
    out.push_str("\n[connection]\n");
    for (a, mat) in c.conn.gamma.iter().enumerate() {
        for (i, row) in mat.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    line(&mut out, "gamma", &[a, i, j], v);
                }
            }
        }
    }
    out.push_str("\n[curvature]\n");
    for (idx, vec) in c.curv.components() {
        for (k, v) in vec.iter().enumerate() {
            if !v.is_zero() {
                line(&mut out, "R", &[idx[0], idx[1], k], v);
            }
        }
    }
    out.push_str("\n[hform]\n");
    for (idx, v) in c.hform.components() {
        line(&mut out, "H", idx, v);
    }
    if let Some(fc) = &c.nabla_f {
        out.push_str("\n[nabla_f]\n");
        for (a, rows) in fc.gamma.iter().enumerate() {
            for (b, row) in rows.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        line(&mut out, "gamma", &[a, b, k], v);
                    }
                }
            }
        }
    }
    if let Some(iso) = &c.iso {
        out.push_str("\n[iso]\n");
        for (i, row) in iso.tau.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    line(&mut out, "tau", &[i, j], v);
                }
            }
        }
        for a in 0..p {
            for (k, v) in iso.phi_at(a).iter().enumerate() {
                if !v.is_zero() {
                    line(&mut out, "phi", &[a, k], v);
                }
            }
        }
        for (a, row) in iso.beta.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    line(&mut out, "beta", &[a, b], v);
                }
            }
        }
    }
    if let Some(h) = &c.hoist {
        out.push_str("\n[hoist]\n");
        for (a, v) in h.j.iter().enumerate() {
            for (k, f) in v.iter().enumerate() {
                if !f.is_zero() {
                    line(&mut out, "J", &[a, k], f);
                }
            }
        }
    }
    if let Some(w) = &c.omega {
        out.push_str("\n[omega]\n");
        for (idx, v) in w.components() {
            line(&mut out, "w", idx, v);
        }
    }
    if let Some(cf) = &c.cform {
        out.push_str("\n[cform]\n");
        for (idx, v) in cf.components() {
            let fibers = cf.fiber_count(idx);
            let name = ["fff", "gff", "ggf", "ggg"][fibers];
            let local: Vec<usize> = idx.iter().map(|&u| if u < m { u } else { u - m }).collect();
            line(&mut out, name, &local, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use courant_core::fixtures;

    const FIXTURE_D: &str = r#"
[base]
n = 2
p = 2

[fiber]
dim = 3
bracket.1.2.3 = "1"
bracket.2.1.3 = "-1"
bracket.2.3.1 = "1"
bracket.3.2.1 = "-1"
bracket.3.1.2 = "1"
bracket.1.3.2 = "-1"
metric.1.1 = "1"
metric.2.2 = "1"
metric.3.3 = "1"

[connection]
gamma.1.2.3 = "-1"
gamma.1.3.2 = "1"
gamma.2.1.3 = "1"
gamma.2.3.1 = "-1"

[curvature]
R.1.2.3 = "1"

[hform]
"#;

    #[test]
    fn reads_fixture_d() {
        let c = parse_str(FIXTURE_D).unwrap();
        assert_eq!((c.n(), c.p(), c.m()), (2, 2, 3));
        assert_eq!(c.quintuple().unwrap(), fixtures::fixture_d());
    }

    #[test]
    fn print_parse_round_trip() {
        for (name, q) in fixtures::all() {
            let c = Config::from_quintuple(&q);
            let text = print_config(&c);
            let back = parse_str(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
            assert_eq!(back, c, "{name}");
            assert_eq!(print_config(&back), text, "{name}");
        }
    }

    #[test]
    fn diagonal_curvature_rejected() {
        let text = FIXTURE_D.replace("R.1.2.3 = \"1\"", "R.1.1.3 = \"1\"");
        match parse_str(&text) {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "curvature.R.1.1.3"),
            other => panic!("{other:?}"),
        }
        let zero = FIXTURE_D.replace("R.1.2.3 = \"1\"", "R.1.1.3 = \"0\"");
        assert!(parse_str(&zero).is_ok());
    }

    #[test]
    fn out_of_range_variable_names_the_field() {
        let text = FIXTURE_D.replace("R.1.2.3 = \"1\"", "R.1.2.3 = \"x3\"");
        match parse_str(&text) {
            Err(ConfigError::Field { field, message }) => {
                assert_eq!(field, "curvature.R.1.2.3");
                assert!(message.contains("x3"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        match parse_str("[base]\nn = 2\np = = 2\n") {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(matches!(parse_str(&format!("{FIXTURE_D}\n[extra]\n")), Err(ConfigError::Field { .. })));
        let text = FIXTURE_D.replace("[hform]", "[hform]\nK.1.2.3 = \"1\"");
        assert!(matches!(parse_str(&text), Err(ConfigError::Field { .. })));
    }

    #[test]
    fn optional_sections_round_trip() {
        let text = format!(
            "{FIXTURE_D}\n[nabla_f]\ngamma.1.2.1 = \"x1\"\n\n[iso]\ntau.1.1 = \"1\"\nphi.2.3 = \"x2\"\nbeta.2.2 = \"-1*x2^2\"\n\n\
             [hoist]\nJ.1.3 = \"1\"\n\n[omega]\nw.1.2 = \"x1\"\n\n[cform]\nggg.1.2.3 = \"-1\"\nggf.1.2.1 = \"2\"\ngff.3.1.2 = \"1\"\n"
        );
        let c = parse_str(&text).unwrap();
        assert_eq!(c.iso.as_ref().unwrap().beta[1][1], courant_core::scalar::poly("-1*x2^2", 2));
        assert_eq!(c.cform.as_ref().unwrap().bigraded(&[0, 1], &[0]), Poly::from_int(2, 2));
        let printed = print_config(&c);
        assert_eq!(parse_str(&printed).unwrap(), c);
        assert_eq!(print_config(&parse_str(&printed).unwrap()), printed);
    }
}

#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use super::*;
    use courant_core::fixtures;

    fn coeff() -> impl Strategy<Value = String> {
        (-9i64..=9, 0u32..=2, 0u32..=2).prop_map(|(c, e1, e2)| format!("{c}*x1^{e1}*x2^{e2}"))
    }

    proptest! {
        #[test]
        fn print_parse_is_identity(gam in prop::collection::vec(coeff(), 18), r in prop::collection::vec(coeff(), 3), w in coeff()) {
            let mut c = Config::from_quintuple(&fixtures::fixture_d());
            let mut it = gam.iter();
            for a in 0..2 {
                for i in 0..3 {
                    for j in 0..3 {
                        c.conn.gamma[a][i][j] = parse_poly(it.next().unwrap(), 2).unwrap();
                    }
                }
            }
            let rv: Vec<Poly> = r.iter().map(|s| parse_poly(s, 2).unwrap()).collect();
            c.curv.set(&[0, 1], rv).unwrap();
            let mut omega = FForm::zero(2, 2, 2);
            omega.set(&[0, 1], parse_poly(&w, 2).unwrap()).unwrap();
            c.omega = Some(omega);
            let text = print_config(&c);
            prop_assert_eq!(parse_str(&text).unwrap(), c);
        }
    }
}
