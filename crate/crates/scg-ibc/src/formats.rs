//! Text formats for summary causal graphs.
//!
//! Three formats are supported:
//! - `json`: `{"vertices":["A","B"],"edges":[["A","B"]]}`. Every edge endpoint
//!   must be declared in `vertices`.
//! - `edgelist`: one `A -> B` per line; a line with a single token declares an
//!   isolated vertex; `#` starts a comment.
//! - `dot`: the subset `digraph { A; A -> B; }` with no attributes.
//!
//! Serialization is canonical (vertices sorted, edges sorted), so
//! `parse(serialize(g)) == g` in every format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scg::Scg;
use crate::series::SeriesId;

/// Input/output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    EdgeList,
    Dot,
}

impl Format {
    pub fn parse_name(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "edgelist" | "edge-list" => Ok(Format::EdgeList),
            "dot" | "dot-subset" => Ok(Format::Dot),
            other => Err(Error::Parse {
                line: 0,
                reason: format!("unknown format {other:?}"),
            }),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonScg {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

/// Parse an SCG from text in the given format.
pub fn parse_scg(text: &str, format: Format) -> Result<Scg> {
    match format {
        Format::Json => parse_json(text),
        Format::EdgeList => parse_edgelist(text),
        Format::Dot => parse_dot(text),
    }
}

/// Canonical serialization in the given format.
pub fn serialize_scg(g: &Scg, format: Format) -> String {
    match format {
        Format::Json => {
            let doc = JsonScg {
                vertices: g.vertices().iter().map(|s| s.to_string()).collect(),
                edges: g
                    .edges()
                    .iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
            };
            serde_json::to_string(&doc).expect("serializing strings cannot fail")
        }
        Format::EdgeList => {
            let mut out = String::new();
            for v in g.vertices() {
                let isolated = g.parents(v.as_str()).unwrap().is_empty()
                    && g.children(v.as_str()).unwrap().is_empty();
                if isolated {
                    out.push_str(v.as_str());
                    out.push('\n');
                }
            }
            for (a, b) in g.edges() {
                out.push_str(&format!("{a} -> {b}\n"));
            }
            out
        }
        Format::Dot => {
            let mut out = String::from("digraph {\n");
            for v in g.vertices() {
                out.push_str(&format!("  {v};\n"));
            }
            for (a, b) in g.edges() {
                out.push_str(&format!("  {a} -> {b};\n"));
            }
            out.push_str("}\n");
            out
        }
    }
}

fn parse_json(text: &str) -> Result<Scg> {
    let doc: JsonScg = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let vertices = doc
        .vertices
        .into_iter()
        .map(SeriesId::new)
        .collect::<Result<Vec<_>>>()?;
    // Edge endpoints must be declared; Scg::new reports UnknownVertex.
    let edges = doc
        .edges
        .into_iter()
        .map(|(a, b)| Ok((SeriesId::new(a)?, SeriesId::new(b)?)))
        .collect::<Result<Vec<_>>>()?;
    Scg::new(vertices, edges)
}

/// Shared statement parser for edgelist lines and dot statements:
/// either `A -> B` or a bare vertex `A`.
fn parse_statement(stmt: &str, line: usize) -> Result<Option<(SeriesId, Option<SeriesId>)>> {
    let stmt = stmt.trim();
    if stmt.is_empty() {
        return Ok(None);
    }
    if let Some((lhs, rhs)) = stmt.split_once("->") {
        let a = SeriesId::new(lhs.trim()).map_err(|e| at_line(e, line))?;
        let b = SeriesId::new(rhs.trim()).map_err(|e| at_line(e, line))?;
        Ok(Some((a, Some(b))))
    } else {
        if stmt.split_whitespace().count() != 1 {
            return Err(Error::Parse {
                line,
                reason: format!("expected `A -> B` or a single vertex name, got {stmt:?}"),
            });
        }
        let v = SeriesId::new(stmt).map_err(|e| at_line(e, line))?;
        Ok(Some((v, None)))
    }
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::InvalidSeriesName { name, reason } => Error::Parse {
            line,
            reason: format!("invalid series name {name:?}: {reason}"),
        },
        other => other,
    }
}

fn build_from_statements(
    statements: Vec<(SeriesId, Option<SeriesId>, usize)>,
) -> Result<Scg> {
    let mut vertices: Vec<SeriesId> = Vec::new();
    let mut edges: Vec<(SeriesId, SeriesId)> = Vec::new();
    let declare = |v: &SeriesId, vertices: &mut Vec<SeriesId>| {
        if !vertices.contains(v) {
            vertices.push(v.clone());
        }
    };
    for (a, b, _line) in &statements {
        declare(a, &mut vertices);
        if let Some(b) = b {
            declare(b, &mut vertices);
            edges.push((a.clone(), b.clone()));
        }
    }
    Scg::new(vertices, edges)
}

fn parse_edgelist(text: &str) -> Result<Scg> {
    let mut statements = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if let Some((a, b)) = parse_statement(content, line)? {
            statements.push((a, b, line));
        }
    }
    build_from_statements(statements)
}

fn parse_dot(text: &str) -> Result<Scg> {
    let trimmed = text.trim();
    let body = trimmed
        .strip_prefix("digraph")
        .ok_or_else(|| Error::Parse {
            line: 1,
            reason: "expected `digraph { ... }`".into(),
        })?
        .trim_start();
    // An optional graph name before the brace is accepted.
    let brace = body.find('{').ok_or_else(|| Error::Parse {
        line: 1,
        reason: "missing `{`".into(),
    })?;
    let name_part = body[..brace].trim();
    if !name_part.is_empty() && name_part.split_whitespace().count() != 1 {
        return Err(Error::Parse {
            line: 1,
            reason: format!("unexpected tokens before `{{`: {name_part:?}"),
        });
    }
    let rest = &body[brace + 1..];
    let close = rest.rfind('}').ok_or_else(|| Error::Parse {
        line: text.lines().count(),
        reason: "missing `}`".into(),
    })?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(Error::Parse {
            line: text.lines().count(),
            reason: "unexpected tokens after `}`".into(),
        });
    }
    let mut statements = Vec::new();
    for stmt in rest[..close].split(';') {
        if let Some((a, b)) = parse_statement(stmt, 1)? {
            statements.push((a, b, 1));
        }
    }
    build_from_statements(statements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgelist_basic() {
        let g = parse_scg("X -> Y\nX -> X", Format::EdgeList).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.has_edge("X", "Y"));
        assert!(g.has_edge("X", "X"));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn edgelist_comments_and_isolated() {
        let g = parse_scg("# header\nA -> B # trailing\nC\n\n", Format::EdgeList).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.contains("C"));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn fig2_text_round_trip() {
        let text = "Z -> X\nX -> Z\nX -> Y\nX -> X\nZ -> Z\n";
        let g = parse_scg(text, Format::EdgeList).unwrap();
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g, crate::corpus::fig2_scg());
    }

    #[test]
    fn json_requires_declared_vertices() {
        let e = parse_scg(r#"{"vertices":["X"],"edges":[["X","W"]]}"#, Format::Json);
        assert!(matches!(e, Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn json_rejects_duplicate_edge() {
        let e = parse_scg(
            r#"{"vertices":["X","Y"],"edges":[["X","Y"],["X","Y"]]}"#,
            Format::Json,
        );
        assert!(matches!(e, Err(Error::DuplicateEdge { .. })));
    }

    #[test]
    fn dot_subset() {
        let g = parse_scg("digraph { A; A -> B; B -> B; }", Format::Dot).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.has_edge("B", "B"));

        assert!(parse_scg("graph { A -- B }", Format::Dot).is_err());
    }

    #[test]
    fn malformed_lines_report_position() {
        let e = parse_scg("A -> B\nA -> ", Format::EdgeList);
        match e {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn canonical_round_trip_all_formats() {
        let g = crate::corpus::thermoregulation_scg();
        for f in [Format::Json, Format::EdgeList, Format::Dot] {
            let text = serialize_scg(&g, f);
            let back = parse_scg(&text, f).unwrap();
            assert_eq!(g, back, "round trip failed for {f:?}");
        }
    }
}
