//! ARFF subset: @relation, @attribute (nominal enumerations and numeric),
//! @data with comma separators, '?' missing cells, '%' comments. No sparse
//! rows, no string or date attributes.

use std::io::{BufRead, BufReader, Read, Write};

use super::{AttributeKind, AttributeSpec, Cell, Dataset, Instance};
use crate::error::{Error, Result};

/// Loads an ARFF document; the last attribute is the class.
pub fn load_arff<R: Read>(source: R) -> Result<Dataset> {
    load_arff_with_class(source, None)
}

/// Loads an ARFF document with an explicit class attribute position
/// (defaults to the last attribute).
pub fn load_arff_with_class<R: Read>(source: R, class_index: Option<usize>) -> Result<Dataset> {
    let reader = BufReader::new(source);
    let mut relation = String::from("unnamed");
    let mut attrs: Vec<AttributeSpec> = Vec::new();
    let mut rows: Vec<(usize, Vec<Option<String>>)> = Vec::new();
    let mut in_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = trimmed.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                relation = parse_relation(trimmed, line_no)?;
            } else if lower.starts_with("@attribute") {
                attrs.push(parse_attribute(trimmed, line_no)?);
            } else if lower == "@data" {
                in_data = true;
            } else {
                return Err(Error::parse(
                    line_no,
                    format!("unrecognized ARFF declaration: '{trimmed}'"),
                ));
            }
        } else {
            if trimmed.starts_with('{') {
                return Err(Error::parse(line_no, "sparse ARFF rows are not supported"));
            }
            let fields = split_quoted(trimmed, line_no)?;
            if fields.len() != attrs.len() {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "row has {} values, header declares {} attributes",
                        fields.len(),
                        attrs.len()
                    ),
                ));
            }
            let cells = fields
                .into_iter()
                .map(|f| if f == "?" { None } else { Some(f) })
                .collect();
            rows.push((line_no, cells));
        }
    }

    if !in_data {
        return Err(Error::parse(0, "missing @data section"));
    }
    if attrs.len() < 2 {
        return Err(Error::parse(
            0,
            "an ARFF document needs at least one attribute plus a class",
        ));
    }
    let class_idx = class_index.unwrap_or(attrs.len() - 1);
    if class_idx >= attrs.len() {
        return Err(Error::config(format!(
            "class attribute index {} out of bounds ({} attributes)",
            class_idx,
            attrs.len()
        )));
    }

    build_dataset(relation, attrs, class_idx, rows)
}

/// Assembles a dataset from parsed attribute specs and raw string rows,
/// shared by the ARFF and CSV loaders. `rows` carry their source line number
/// for error reporting; `None` cells are missing.
pub(super) fn build_dataset(
    relation: String,
    attrs: Vec<AttributeSpec>,
    class_idx: usize,
    rows: Vec<(usize, Vec<Option<String>>)>,
) -> Result<Dataset> {
    let class_attr = &attrs[class_idx];
    let class_domain = match &class_attr.kind {
        AttributeKind::Nominal(values) => values.clone(),
        AttributeKind::Numeric => {
            return Err(Error::data(format!(
                "class attribute '{}' must be nominal",
                class_attr.name
            )))
        }
    };
    let class_name = class_attr.name.clone();
    let schema: Vec<AttributeSpec> = attrs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != class_idx)
        .map(|(_, a)| a.clone())
        .collect();

    let mut instances = Vec::with_capacity(rows.len());
    for (line_no, fields) in rows {
        let label_field = fields[class_idx].as_ref().ok_or_else(|| {
            Error::parse(line_no, "class value is missing ('?') for this row")
        })?;
        let label = class_domain
            .iter()
            .position(|v| v == label_field)
            .ok_or_else(|| {
                Error::parse(
                    line_no,
                    format!("unknown class symbol '{label_field}'"),
                )
            })?;

        let mut values = Vec::with_capacity(schema.len());
        for (col, field) in fields
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != class_idx)
            .map(|(_, f)| f)
            .enumerate()
        {
            let cell = match field {
                None => Cell::Missing,
                Some(text) => match &schema[col].kind {
                    AttributeKind::Nominal(domain) => {
                        let v = domain.iter().position(|d| d == text).ok_or_else(|| {
                            Error::parse(
                                line_no,
                                format!(
                                    "unknown nominal symbol '{}' for attribute '{}'",
                                    text, schema[col].name
                                ),
                            )
                        })?;
                        Cell::Nominal(v)
                    }
                    AttributeKind::Numeric => {
                        let v: f64 = text.parse().map_err(|_| {
                            Error::parse(
                                line_no,
                                format!(
                                    "cannot parse '{}' as numeric for attribute '{}'",
                                    text, schema[col].name
                                ),
                            )
                        })?;
                        Cell::Numeric(v)
                    }
                },
            };
            values.push(cell);
        }
        instances.push(Instance::original(values, label));
    }

    Dataset::new(relation, schema, class_name, class_domain, instances)
}

fn parse_relation(line: &str, line_no: usize) -> Result<String> {
    let rest = line["@relation".len()..].trim();
    if rest.is_empty() {
        return Err(Error::parse(line_no, "@relation needs a name"));
    }
    Ok(unquote(rest))
}

fn parse_attribute(line: &str, line_no: usize) -> Result<AttributeSpec> {
    let rest = line["@attribute".len()..].trim();
    let (name, remainder) = take_token(rest, line_no)?;
    let remainder = remainder.trim();
    if remainder.is_empty() {
        return Err(Error::parse(
            line_no,
            format!("attribute '{name}' is missing its type"),
        ));
    }
    if let Some(body) = remainder.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| Error::parse(line_no, "unterminated nominal enumeration"))?;
        let values = split_quoted(body, line_no)?;
        if values.is_empty() {
            return Err(Error::parse(
                line_no,
                format!("nominal attribute '{name}' has an empty value domain"),
            ));
        }
        Ok(AttributeSpec::nominal(name, values))
    } else {
        match remainder.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => Ok(AttributeSpec::numeric(name)),
            other => Err(Error::parse(
                line_no,
                format!("unsupported attribute type '{other}' (expected numeric or a nominal enumeration)"),
            )),
        }
    }
}

/// Takes one (possibly quoted) token off the front of `text`.
fn take_token(text: &str, line_no: usize) -> Result<(String, &str)> {
    let text = text.trim_start();
    let mut chars = text.char_indices();
    match chars.next() {
        Some((_, quote @ ('\'' | '"'))) => {
            let mut token = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    token.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == quote {
                    return Ok((token, &text[i + c.len_utf8()..]));
                } else {
                    token.push(c);
                }
            }
            Err(Error::parse(line_no, "unterminated quoted token"))
        }
        Some(_) => {
            let end = text
                .find(|c: char| c.is_whitespace())
                .unwrap_or(text.len());
            Ok((text[..end].to_string(), &text[end..]))
        }
        None => Err(Error::parse(line_no, "expected a token")),
    }
}

/// Splits a comma-separated list, honoring single/double quotes and
/// backslash escapes inside quoted tokens.
fn split_quoted(text: &str, line_no: usize) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut was_quoted = false;
    let mut escaped = false;

    for c in text.chars() {
        match quote {
            Some(q) => {
                if escaped {
                    current.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                } else {
                    current.push(c);
                }
            }
            None => match c {
                '\'' | '"' if current.trim().is_empty() && !was_quoted => {
                    current.clear();
                    quote = Some(c);
                    was_quoted = true;
                }
                ',' => {
                    fields.push(finish_field(&mut current, &mut was_quoted));
                }
                _ => current.push(c),
            },
        }
    }
    if quote.is_some() {
        return Err(Error::parse(line_no, "unterminated quote"));
    }
    if !(current.trim().is_empty() && !was_quoted && fields.is_empty()) {
        fields.push(finish_field(&mut current, &mut was_quoted));
    }
    Ok(fields)
}

fn finish_field(current: &mut String, was_quoted: &mut bool) -> String {
    let field = if *was_quoted {
        current.clone()
    } else {
        current.trim().to_string()
    };
    current.clear();
    *was_quoted = false;
    field
}

fn unquote(text: &str) -> String {
    let t = text.trim();
    if t.len() >= 2 {
        let first = t.chars().next().unwrap();
        if (first == '\'' || first == '"') && t.ends_with(first) {
            return t[1..t.len() - 1].to_string();
        }
    }
    t.to_string()
}

fn needs_quoting(value: &str) -> bool {
    value.is_empty()
        || value
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '%' | '\'' | '"' | '?'))
}

fn quoted(value: &str) -> String {
    if needs_quoting(value) {
        let escaped = value.replace('\\', "\\\\").replace('\'', "\\'");
        format!("'{escaped}'")
    } else {
        value.to_string()
    }
}

/// Writes the dataset as ARFF with the class attribute last. Reloading the
/// output yields an identical dataset.
pub fn write_arff<W: Write>(d: &Dataset, mut out: W) -> Result<()> {
    writeln!(out, "@relation {}", quoted(&d.relation))?;
    for attr in &d.schema {
        write_attribute(&mut out, attr)?;
    }
    write_attribute(
        &mut out,
        &AttributeSpec::nominal(d.class_name.clone(), d.class_domain.clone()),
    )?;
    writeln!(out, "@data")?;
    for inst in &d.instances {
        let mut fields = Vec::with_capacity(inst.values.len() + 1);
        for (col, cell) in inst.values.iter().enumerate() {
            fields.push(match cell {
                Cell::Missing => "?".to_string(),
                Cell::Nominal(v) => match &d.schema[col].kind {
                    AttributeKind::Nominal(domain) => quoted(&domain[*v]),
                    AttributeKind::Numeric => {
                        return Err(Error::internal("nominal cell in numeric column"))
                    }
                },
                Cell::Numeric(v) => {
                    if !v.is_finite() {
                        return Err(Error::data(format!(
                            "cannot serialize non-finite numeric value {v}"
                        )));
                    }
                    format!("{v}")
                }
            });
        }
        fields.push(quoted(&d.class_domain[inst.label]));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn write_attribute<W: Write>(out: &mut W, attr: &AttributeSpec) -> Result<()> {
    match &attr.kind {
        AttributeKind::Nominal(values) => {
            let body: Vec<String> = values.iter().map(|v| quoted(v)).collect();
            writeln!(
                out,
                "@attribute {} {{{}}}",
                quoted(&attr.name),
                body.join(",")
            )?;
        }
        AttributeKind::Numeric => {
            writeln!(out, "@attribute {} numeric", quoted(&attr.name))?;
        }
    }
    Ok(())
}
