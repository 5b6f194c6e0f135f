//! Triple files: UTF-8, one `head<TAB>relation<TAB>tail` per line, `#`
//! comments and blank lines ignored. Lenient mode splits on any run of
//! whitespace instead of single tabs.
//!
//! Vocabulary files hold one label per line; the zero-based line number is
//! the id. Kind files hold `label<TAB>kind` lines.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, LabeledTriple};
use crate::ontology::{self, EntityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineFormat {
    #[default]
    Tab,
    Lenient,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

pub fn parse_triples(text: &str, format: LineFormat) -> Result<Vec<LabeledTriple>> {
    content_lines(text)
        .map(|(line, l)| {
            let fields: Vec<&str> = match format {
                LineFormat::Tab => l.split('\t').collect(),
                LineFormat::Lenient => l.split_whitespace().collect(),
            };
            match fields[..] {
                [h, r, t] if !h.is_empty() && !r.is_empty() && !t.is_empty() => Ok(LabeledTriple::new(h, r, t)),
                _ => Err(Error::Parse {
                    line,
                    message: format!("expected 3 non-empty fields, found {}", fields.len()),
                }),
            }
        })
        .collect()
}

pub fn read_triples(path: impl AsRef<Path>, format: LineFormat) -> Result<Vec<LabeledTriple>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_triples(&text, format)
}

/// Reads and builds in one step, see [`ontology::build_social`]. A file
/// with no triples yields `EmptyGraph`.
pub fn load_graph(path: impl AsRef<Path>, format: LineFormat) -> Result<KnowledgeGraph> {
    load_graph_with_kinds(path, format, &HashMap::new())
}

pub fn load_graph_with_kinds(
    path: impl AsRef<Path>,
    format: LineFormat,
    kinds: &HashMap<String, EntityKind>,
) -> Result<KnowledgeGraph> {
    let triples = read_triples(path, format)?;
    Ok(ontology::build_social(&triples, kinds)?.0)
}

fn check_label(label: &str) -> Result<()> {
    if label.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!(
            "label {label:?} contains a tab or newline"
        )));
    }
    Ok(())
}

pub fn format_triples<'a>(triples: impl IntoIterator<Item = &'a LabeledTriple>) -> Result<String> {
    let mut out = String::new();
    for t in triples {
        for l in [&t.head, &t.relation, &t.tail] {
            check_label(l)?;
        }
        out.push_str(&t.head);
        out.push('\t');
        out.push_str(&t.relation);
        out.push('\t');
        out.push_str(&t.tail);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_labeled(path: impl AsRef<Path>, triples: &[LabeledTriple]) -> Result<()> {
    let path = path.as_ref();
    let text = format_triples(triples)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_triples(graph: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<()> {
    write_labeled(path, &graph.labeled_triples())
}

pub fn write_vocabulary(labels: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for l in labels {
        check_label(l)?;
        text.push_str(l);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_vocabulary(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim_end_matches('\r').to_owned()).collect())
}

pub fn read_kinds(path: impl AsRef<Path>) -> Result<HashMap<String, EntityKind>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    content_lines(&text)
        .map(|(line, l)| {
            let (label, kind) = l.split_once('\t').ok_or_else(|| Error::Parse {
                line,
                message: "expected label<TAB>kind".into(),
            })?;
            let kind = kind.parse().map_err(|e: Error| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            Ok((label.to_owned(), kind))
        })
        .collect()
}
