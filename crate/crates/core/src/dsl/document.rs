use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;

use super::parser::{parse_scalar_with, Params, RESERVED};
use super::{format_scalar, ParseDiagnostic, Parsed};
use crate::coeff;
use crate::field::{Metric, VectorField, VolumeForm};
use crate::form::KForm;
use crate::grid::VERIFY_GRID;
use crate::scalar::Scalar;

const SECTIONS: [&str; 5] = ["params", "field", "metric", "volume", "form"];
const FIELD_KEYS: [&str; 3] = ["x", "y", "z"];
const FORM_KEYS: [&str; 3] = ["dx", "dy", "dz"];

/// Everything a `.field` file can hold.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub name: String,
    pub params: Params,
    pub field: Option<VectorField>,
    pub metric: Metric,
    pub volume: VolumeForm,
    pub form: Option<KForm>,
}

/// A vector field with its metric, volume form and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub name: String,
    pub field: VectorField,
    pub metric: Metric,
    pub volume: VolumeForm,
    pub params: Params,
}

impl FieldSpec {
    pub fn new(name: impl Into<String>, field: VectorField) -> Self {
        FieldSpec {
            name: name.into(),
            field,
            metric: Metric::euclidean(),
            volume: VolumeForm::standard(),
            params: Params::new(),
        }
    }
}

struct Entry {
    key: String,
    key_span: (usize, usize),
    value: String,
    value_start: usize,
}

#[derive(Default)]
struct Raw {
    name: Option<String>,
    sections: BTreeMap<&'static str, ((usize, usize), Vec<Entry>)>,
}

fn split_lines(src: &str, diags: &mut Vec<ParseDiagnostic>) -> Raw {
    let mut raw = Raw::default();
    let mut current: Option<&'static str> = None;
    let mut offset = 0;
    for line in src.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let content = match line.find('#') {
            Some(i) => &line[..i],
            None => line.trim_end_matches(['\n', '\r']),
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let t_start = start + lead;
        let t_end = t_start + trimmed.len();
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                diags.push(ParseDiagnostic::error(t_start, t_end, "unterminated section header"));
                continue;
            };
            let name = name.trim();
            match SECTIONS.iter().find(|s| **s == name) {
                Some(s) if raw.sections.contains_key(s) => {
                    diags.push(ParseDiagnostic::error(t_start, t_end, format!("duplicate section [{name}]")));
                    current = Some(s);
                }
                Some(s) => {
                    raw.sections.insert(s, ((t_start, t_end), Vec::new()));
                    current = Some(s);
                }
                None => {
                    diags.push(ParseDiagnostic::error(t_start, t_end, format!("unknown section [{name}]")));
                    current = None;
                }
            }
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            diags.push(ParseDiagnostic::error(t_start, t_end, "expected `key = value`"));
            continue;
        };
        let key_raw = &trimmed[..eq];
        let key = key_raw.trim().to_string();
        let key_start = t_start + (key_raw.len() - key_raw.trim_start().len());
        let key_span = (key_start, key_start + key.len());
        let value_raw = &trimmed[eq + 1..];
        let value = value_raw.trim().to_string();
        let value_start = t_start + eq + 1 + (value_raw.len() - value_raw.trim_start().len());
        if key.is_empty() {
            diags.push(ParseDiagnostic::error(t_start, t_end, "missing key before `=`"));
            continue;
        }
        match current {
            None if key == "name" && raw.sections.is_empty() => {
                if raw.name.is_some() {
                    diags.push(ParseDiagnostic::error(key_span.0, key_span.1, "duplicate key `name`"));
                }
                raw.name = Some(value);
            }
            None => {
                diags.push(ParseDiagnostic::error(key_span.0, key_span.1, format!("key `{key}` outside any section")))
            }
            Some(section) => {
                let entries = &mut raw.sections.get_mut(section).expect("section registered").1;
                if entries.iter().any(|e| e.key == key) {
                    diags.push(ParseDiagnostic::error(
                        key_span.0,
                        key_span.1,
                        format!("duplicate key `{key}` in [{section}]"),
                    ));
                    continue;
                }
                entries.push(Entry { key, key_span, value, value_start });
            }
        }
    }
    raw
}

/// Reads `3`, `-1/2`, `0.25` or `1e-3` as an exact rational.
fn parse_rational(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b.trim_start()),
        None => (false, s),
    };
    let r = match body.split_once('/') {
        Some((n, d)) => {
            let d = coeff::parse_decimal_rational(d.trim())?;
            if d.is_zero() {
                return None;
            }
            coeff::parse_decimal_rational(n.trim())? / d
        }
        None => coeff::parse_decimal_rational(body)?,
    };
    Some(if neg { -r } else { r })
}

fn valid_param_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

fn parse_value(e: &Entry, params: &Params, diags: &mut Vec<ParseDiagnostic>) -> Option<Scalar> {
    match parse_scalar_with(&e.value, params) {
        Ok(p) => {
            diags.extend(p.warnings.into_iter().map(|d| d.shifted(e.value_start)));
            Some(p.value)
        }
        Err(errs) => {
            diags.extend(errs.into_iter().map(|d| d.shifted(e.value_start)));
            None
        }
    }
}

/// Parses keyed components; `keys[i]` fills slot `i`.
fn components<const N: usize>(
    section: &str,
    header: (usize, usize),
    entries: &[Entry],
    keys: [&str; N],
    params: &Params,
    diags: &mut Vec<ParseDiagnostic>,
) -> Option<[Scalar; N]> {
    let mut out: [Option<Scalar>; N] = std::array::from_fn(|_| None);
    let mut ok = true;
    for e in entries {
        match keys.iter().position(|k| *k == e.key) {
            Some(i) => match parse_value(e, params, diags) {
                Some(v) => out[i] = Some(v),
                None => ok = false,
            },
            None => {
                let expected = keys.join(", ");
                diags.push(ParseDiagnostic::error(
                    e.key_span.0,
                    e.key_span.1,
                    format!("unknown key `{}` in [{section}]; expected {expected}", e.key),
                ));
                ok = false;
            }
        }
    }
    for (i, k) in keys.iter().enumerate() {
        if out[i].is_none() && !entries.iter().any(|e| e.key == *k) {
            diags.push(ParseDiagnostic::error(
                header.0,
                header.1,
                format!("component `{k}` missing from [{section}]; exactly {N} components are required"),
            ));
            ok = false;
        }
    }
    if !ok {
        return None;
    }
    Some(out.map(|v| v.expect("checked above")))
}

fn metric_key(key: &str) -> Option<(usize, usize)> {
    let b = key.as_bytes();
    if b.len() != 3 || b[0] != b'g' {
        return None;
    }
    let i = (b[1] as char).to_digit(10)?;
    let j = (b[2] as char).to_digit(10)?;
    ((1..=3).contains(&i) && (1..=3).contains(&j)).then_some((i as usize - 1, j as usize - 1))
}

fn parse_metric(
    header: (usize, usize),
    entries: &[Entry],
    params: &Params,
    diags: &mut Vec<ParseDiagnostic>,
) -> Option<Metric> {
    let mut written: [[Option<(Scalar, (usize, usize))>; 3]; 3] = Default::default();
    let mut ok = true;
    for e in entries {
        let Some((i, j)) = metric_key(&e.key) else {
            diags.push(ParseDiagnostic::error(
                e.key_span.0,
                e.key_span.1,
                format!("unknown key `{}` in [metric]; expected gij with i, j in 1..3", e.key),
            ));
            ok = false;
            continue;
        };
        match parse_value(e, params, diags) {
            Some(v) => written[i][j] = Some((v, e.key_span)),
            None => ok = false,
        }
    }
    if !ok {
        return None;
    }
    let mut m = Metric::euclidean().entries().clone();
    for i in 0..3 {
        for j in i..3 {
            match (&written[i][j], &written[j][i]) {
                (Some((a, _)), Some((b, span))) if a != b => {
                    diags.push(ParseDiagnostic::error(
                        span.0,
                        span.1,
                        format!(
                            "metric not symmetric as written: g{}{} differs from g{}{}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        ),
                    ));
                    ok = false;
                }
                (Some((a, _)), _) | (None, Some((a, _))) => {
                    m[i][j] = a.clone();
                    m[j][i] = a.clone();
                }
                (None, None) => {}
            }
        }
    }
    if !ok {
        return None;
    }
    let metric = Metric::new(m).expect("symmetrized");
    if !metric.is_euclidean() && !metric.is_positive_definite(VERIFY_GRID) {
        diags.push(ParseDiagnostic::warning(
            header.0,
            header.1,
            format!("metric is not certified positive-definite on the {VERIFY_GRID}³ grid"),
        ));
    }
    Some(metric)
}

/// Parses a `.field` document. Errors are reported all at once.
pub fn parse_document(src: &str) -> Result<Parsed<Document>, Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let raw = split_lines(src, &mut diags);

    let mut params = Params::new();
    if let Some((_, entries)) = raw.sections.get("params") {
        for e in entries {
            if !valid_param_name(&e.key) {
                diags.push(ParseDiagnostic::error(
                    e.key_span.0,
                    e.key_span.1,
                    format!("invalid parameter name `{}`", e.key),
                ));
                continue;
            }
            match parse_rational(&e.value) {
                Some(r) => {
                    params.insert(e.key.clone(), r);
                }
                None => diags.push(ParseDiagnostic::error(
                    e.value_start,
                    e.value_start + e.value.len(),
                    format!("parameter `{}` must be a rational literal", e.key),
                )),
            }
        }
    }

    let field = raw
        .sections
        .get("field")
        .and_then(|(h, entries)| components("field", *h, entries, FIELD_KEYS, &params, &mut diags))
        .map(VectorField::new);
    let form = raw
        .sections
        .get("form")
        .and_then(|(h, entries)| components("form", *h, entries, FORM_KEYS, &params, &mut diags))
        .map(KForm::one_form);
    let metric = match raw.sections.get("metric") {
        Some((h, entries)) => parse_metric(*h, entries, &params, &mut diags),
        None => Some(Metric::euclidean()),
    };
    let volume = match raw.sections.get("volume") {
        Some((h, entries)) => components("volume", *h, entries, ["mu"], &params, &mut diags).map(|[mu]| {
            let v = VolumeForm::new(mu);
            if !v.is_standard() && !v.certificate(VERIFY_GRID).passed {
                diags.push(ParseDiagnostic::warning(
                    h.0,
                    h.1,
                    format!("volume density is not certified nonvanishing on the {VERIFY_GRID}³ grid"),
                ));
            }
            v
        }),
        None => Some(VolumeForm::standard()),
    };

    if diags.iter().any(ParseDiagnostic::is_error) {
        return Err(diags);
    }
    let doc = Document {
        name: raw.name.unwrap_or_else(|| "unnamed".to_string()),
        params,
        field,
        metric: metric.expect("no errors"),
        volume: volume.expect("no errors"),
        form,
    };
    Ok(Parsed { value: doc, warnings: diags })
}

/// Parses a document that must contain a `[field]` section.
pub fn parse_field_spec(src: &str) -> Result<Parsed<FieldSpec>, Vec<ParseDiagnostic>> {
    let Parsed { value: doc, warnings } = parse_document(src)?;
    let Some(field) = doc.field else {
        return Err(vec![ParseDiagnostic::error(0, 0, "missing [field] section")]);
    };
    Ok(Parsed {
        value: FieldSpec { name: doc.name, field, metric: doc.metric, volume: doc.volume, params: doc.params },
        warnings,
    })
}

fn write_header(out: &mut String, name: &str, params: &Params) {
    writeln!(out, "name = {name}").unwrap();
    if !params.is_empty() {
        out.push_str("\n[params]\n");
        for (k, v) in params {
            writeln!(out, "{k} = {}", coeff::format_rational(v)).unwrap();
        }
    }
}

fn write_geometry(out: &mut String, metric: &Metric, volume: &VolumeForm) {
    if !metric.is_euclidean() {
        out.push_str("\n[metric]\n");
        for i in 0..3 {
            for j in i..3 {
                writeln!(out, "g{}{} = {}", i + 1, j + 1, format_scalar(metric.entry(i, j))).unwrap();
            }
        }
    }
    if !volume.is_standard() {
        out.push_str("\n[volume]\n");
        writeln!(out, "mu = {}", format_scalar(volume.density())).unwrap();
    }
}

/// Text that [`parse_field_spec`] reads back to an equal spec.
pub fn serialize_field_spec(spec: &FieldSpec) -> String {
    let mut out = String::new();
    write_header(&mut out, &spec.name, &spec.params);
    out.push_str("\n[field]\n");
    for (k, c) in FIELD_KEYS.iter().zip(spec.field.components()) {
        writeln!(out, "{k} = {}", format_scalar(c)).unwrap();
    }
    write_geometry(&mut out, &spec.metric, &spec.volume);
    out
}

/// Text that [`parse_document`] reads back to an equal document.
pub fn serialize_document(doc: &Document) -> String {
    let mut out = String::new();
    write_header(&mut out, &doc.name, &doc.params);
    if let Some(field) = &doc.field {
        out.push_str("\n[field]\n");
        for (k, c) in FIELD_KEYS.iter().zip(field.components()) {
            writeln!(out, "{k} = {}", format_scalar(c)).unwrap();
        }
    }
    if let Some(form) = &doc.form {
        out.push_str("\n[form]\n");
        for (k, c) in FORM_KEYS.iter().zip(form.components()) {
            writeln!(out, "{k} = {}", format_scalar(c)).unwrap();
        }
    }
    write_geometry(&mut out, &doc.metric, &doc.volume);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{cos_axis, sin_axis};
    use num_bigint::BigInt;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    const ABC: &str = "\
# Arnold-Beltrami-Childress flow
name = abc111

[params]
A = 1
B = 1
C = 1

[field]
x = A*sin(z) + C*cos(y)
y = B*sin(x) + A*cos(z)
z = C*sin(y) + B*cos(x)
";

    #[test]
    fn abc_document() {
        let spec = parse_field_spec(ABC).unwrap().value;
        assert_eq!(spec.name, "abc111");
        assert_eq!(spec.params["B"], rational(1, 1));
        assert_eq!(spec.field.component(0), &Scalar::from(&sin_axis(2, 1) + &cos_axis(1, 1)));
        assert!(spec.metric.is_euclidean());
        assert!(spec.volume.is_standard());
        let again = parse_field_spec(&serialize_field_spec(&spec)).unwrap().value;
        assert_eq!(again, spec);
    }

    #[test]
    fn metric_entry_with_division() {
        let src = "[field]\nx = 1\ny = 0\nz = 0\n[metric]\ng11 = 1/(2+cos(z))\n";
        let p = parse_field_spec(src).unwrap();
        assert!(p.warnings.is_empty(), "{:?}", p.warnings);
        let g = p.value.metric.clone();
        assert!(!g.entry(0, 0).is_exact());
        assert!(g.entry(0, 0).witnesses_pass());
        assert_eq!(g.entry(1, 1), &Scalar::one());
        let again = parse_field_spec(&serialize_field_spec(&p.value)).unwrap().value;
        assert_eq!(again.metric, g);
    }

    #[test]
    fn structural_errors() {
        let e = parse_field_spec("name = a\n").unwrap_err();
        assert_eq!(e[0].message, "missing [field] section");
        let e = parse_field_spec("[field]\nx = 1\ny = 1\n").unwrap_err();
        assert!(e[0].message.contains("component `z` missing"));
        let e = parse_field_spec("[field]\nx = 1\ny = 1\nz = 1\nw = 1\n").unwrap_err();
        assert!(e[0].message.contains("unknown key `w`"));
        let src = "[field]\nx = 1\ny = 1\nz = 1\n[metric]\ng12 = 1/2\ng21 = 1/3\n";
        let e = parse_field_spec(src).unwrap_err();
        assert!(e[0].message.contains("not symmetric"));
        assert_eq!(&src[e[0].start..e[0].end], "g21");
        let e = parse_field_spec("[field]\nx = sin(x*y)\ny = 1\nz = 1\n").unwrap_err();
        assert_eq!(&"[field]\nx = sin(x*y)\n"[e[0].start..e[0].end], "x*y");
    }

    #[test]
    fn one_sided_off_diagonal_is_mirrored() {
        let src = "[field]\nx = 1\ny = 0\nz = 0\n[metric]\ng12 = 1/2\n";
        let g = parse_field_spec(src).unwrap().value.metric;
        assert_eq!(g.entry(1, 0), g.entry(0, 1));
        assert_eq!(g.entry(1, 0), &Scalar::constant(coeff::ratio(1, 2)));
    }

    #[test]
    fn form_documents() {
        let doc = parse_document("name = giroux2\n[form]\ndx = sin(2*z)\ndy = cos(2*z)\ndz = 0\n").unwrap().value;
        assert!(doc.field.is_none());
        let a = doc.form.clone().unwrap();
        assert_eq!(a.components()[0], Scalar::from(sin_axis(2, 2)));
        assert_eq!(parse_document(&serialize_document(&doc)).unwrap().value, doc);
    }

    #[test]
    fn params_reject_expressions() {
        let e = parse_document("[params]\nA = sin(x)\n").unwrap_err();
        assert!(e[0].message.contains("rational literal"));
        assert_eq!(parse_rational("-3/4"), Some(rational(-3, 4)));
        assert_eq!(parse_rational("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
