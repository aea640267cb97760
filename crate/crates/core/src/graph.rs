//! Metric graphs with vertex boundary conditions.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::parse_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    #[serde(alias = "nk", alias = "kirchhoff")]
    NeumannKirchhoff,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
            Self::NeumannKirchhoff => "neumann-kirchhoff",
        })
    }
}

/// Which end of an edge touches a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEnd {
    /// Coordinate 0.
    Start,
    /// Coordinate L.
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    /// Positive, possibly `f64::INFINITY` for a half-line.
    pub length: f64,
    pub start: usize,
    /// `None` for half-lines.
    pub end: Option<usize>,
}

impl Edge {
    pub fn is_finite(&self) -> bool {
        self.length.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub boundary: BoundaryCondition,
    pub degree: usize,
}

impl Vertex {
    pub fn is_external(&self) -> bool {
        self.degree == 1
    }
}

/// Validated metric graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    edges: Vec<Edge>,
    vertices: Vec<Vertex>,
}

/// Raw edge description as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub start: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
    /// Expression such as `"1"`, `"cbrt(2)"` or `"inf"`.
    pub length: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexList {
    pub ids: Vec<String>,
}

/// Graph description with `[edges]`, `[vertices]` and `[boundary]` sections.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub edges: toml::map::Map<String, toml::Value>,
    pub vertices: VertexList,
    pub boundary: toml::map::Map<String, toml::Value>,
}

impl GraphSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: &str, bc: BoundaryCondition) -> Self {
        self.vertices.ids.push(id.to_string());
        self.boundary
            .insert(id.to_string(), toml::Value::String(bc.to_string()));
        self
    }

    pub fn edge(mut self, id: &str, start: &str, end: Option<&str>, length: &str) -> Self {
        let spec = EdgeSpec {
            start: start.to_string(),
            end: end.map(str::to_string),
            length: length.to_string(),
        };
        self.edges.insert(
            id.to_string(),
            toml::Value::try_from(spec).expect("edge spec serializes"),
        );
        self
    }
}

impl MetricGraph {
    /// Validates a graph description.
    pub fn build(spec: &GraphSpec) -> Result<Self> {
        let mut index = HashMap::new();
        let mut vertices = Vec::with_capacity(spec.vertices.ids.len());
        for id in &spec.vertices.ids {
            if index.insert(id.clone(), vertices.len()).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
            let boundary = match spec.boundary.get(id) {
                Some(v) => v.clone().try_into::<BoundaryCondition>().map_err(|e| {
                    Error::BoundaryCondition {
                        vertex: id.clone(),
                        reason: e.to_string(),
                    }
                })?,
                None => {
                    return Err(Error::BoundaryCondition {
                        vertex: id.clone(),
                        reason: "no boundary condition given".into(),
                    })
                }
            };
            vertices.push(Vertex {
                id: id.clone(),
                boundary,
                degree: 0,
            });
        }
        for key in spec.boundary.keys() {
            if !index.contains_key(key) {
                return Err(Error::BoundaryCondition {
                    vertex: key.clone(),
                    reason: "boundary condition for an undeclared vertex".into(),
                });
            }
        }

        let lookup = |edge: &str, v: &str| {
            index.get(v).copied().ok_or_else(|| Error::DanglingVertex {
                edge: edge.to_string(),
                vertex: v.to_string(),
            })
        };
        let mut edges = Vec::with_capacity(spec.edges.len());
        for (id, value) in &spec.edges {
            let raw: EdgeSpec = value.clone().try_into().map_err(|e: toml::de::Error| {
                Error::Config(format!("edge `{id}`: {}", e.message()))
            })?;
            let length = parse_real(&raw.length)?;
            if length.is_nan() || length <= 0.0 {
                return Err(Error::NonPositiveLength {
                    edge: id.clone(),
                    length,
                });
            }
            let start = lookup(id, &raw.start)?;
            let end = match (&raw.end, length.is_finite()) {
                (Some(v), true) => Some(lookup(id, v)?),
                (None, false) => None,
                (Some(_), false) => {
                    return Err(Error::Config(format!(
                        "half-line `{id}` cannot have an end vertex"
                    )))
                }
                (None, true) => {
                    return Err(Error::Config(format!(
                        "finite edge `{id}` needs an end vertex"
                    )))
                }
            };
            vertices[start].degree += 1;
            if let Some(e) = end {
                vertices[e].degree += 1;
            }
            edges.push(Edge {
                id: id.clone(),
                length,
                start,
                end,
            });
        }

        for v in &vertices {
            let reason = match (v.degree, v.boundary) {
                (0, _) => Some("isolated vertex"),
                (1, BoundaryCondition::NeumannKirchhoff) => {
                    Some("Neumann-Kirchhoff is only allowed on internal vertices")
                }
                (d, BoundaryCondition::Dirichlet | BoundaryCondition::Neumann) if d > 1 => {
                    Some("internal vertices must carry Neumann-Kirchhoff")
                }
                _ => None,
            };
            if let Some(reason) = reason {
                return Err(Error::BoundaryCondition {
                    vertex: v.id.clone(),
                    reason: reason.into(),
                });
            }
        }
        Ok(Self { edges, vertices })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn external_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.is_external())
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| !v.is_external())
    }

    /// Edge ends touching vertex `v`. A self-loop appears twice.
    pub fn incident(&self, v: usize) -> Vec<(usize, EdgeEnd)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.start == v {
                out.push((i, EdgeEnd::Start));
            }
            if e.end == Some(v) {
                out.push((i, EdgeEnd::End));
            }
        }
        out
    }
}

/// Canonical graphs used throughout the examples and scenarios.
pub mod canonical {
    use super::*;

    /// Loop of length 1 (`head`) at `v` plus a half-line (`tail`), NK at `v`.
    pub fn tadpole() -> MetricGraph {
        MetricGraph::build(
            &GraphSpec::new()
                .vertex("v", BoundaryCondition::NeumannKirchhoff)
                .edge("head", "v", Some("v"), "1")
                .edge("tail", "v", None, "inf"),
        )
        .expect("canonical tadpole is valid")
    }

    /// Star with pairs of equal-length edges `e{2l-1}`, `e{2l}` running from a
    /// Dirichlet external vertex (coordinate 0) to the NK centre (coordinate L).
    pub fn star_pairs(lengths: &[&str]) -> Result<MetricGraph> {
        let mut spec = GraphSpec::new().vertex("c", BoundaryCondition::NeumannKirchhoff);
        for (l, len) in lengths.iter().enumerate() {
            for side in 0..2 {
                let n = 2 * l + side + 1;
                let ext = format!("x{n}");
                spec = spec
                    .vertex(&ext, BoundaryCondition::Dirichlet)
                    .edge(&format!("e{n}"), &ext, Some("c"), len);
            }
        }
        MetricGraph::build(&spec)
    }

    /// The four-edge star with L1 = cbrt(2), L2 = cbrt(5).
    pub fn star_example() -> MetricGraph {
        star_pairs(&["cbrt(2)", "cbrt(5)"]).expect("canonical star is valid")
    }

    /// Single edge `e1` of the given length with the same condition at both ends.
    pub fn interval(length: &str, bc: BoundaryCondition) -> Result<MetricGraph> {
        MetricGraph::build(
            &GraphSpec::new()
                .vertex("a", bc)
                .vertex("b", bc)
                .edge("e1", "a", Some("b"), length),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tadpole_has_one_internal_vertex() {
        let g = canonical::tadpole();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.internal_vertices().count(), 1);
        assert_eq!(g.external_vertices().count(), 0);
        assert!(!g.edge(1).is_finite());
        assert_eq!(g.incident(0).len(), 3);
    }

    #[test]
    fn interval_graph() {
        let g = canonical::interval("1", BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.external_vertices().count(), 2);
    }

    #[test]
    fn zero_length_rejected() {
        let err = canonical::interval("0", BoundaryCondition::Dirichlet).unwrap_err();
        assert!(matches!(err, Error::NonPositiveLength { .. }));
        let err = canonical::interval("-1", BoundaryCondition::Dirichlet).unwrap_err();
        assert!(matches!(err, Error::NonPositiveLength { .. }));
    }

    #[test]
    fn nk_on_external_vertex_rejected() {
        let err = canonical::interval("1", BoundaryCondition::NeumannKirchhoff).unwrap_err();
        assert!(matches!(err, Error::BoundaryCondition { .. }));
    }

    #[test]
    fn dangling_reference_rejected() {
        let spec = GraphSpec::new()
            .vertex("a", BoundaryCondition::Dirichlet)
            .edge("e1", "a", Some("nowhere"), "1");
        assert!(matches!(
            MetricGraph::build(&spec).unwrap_err(),
            Error::DanglingVertex { .. }
        ));
    }

    #[test]
    fn dirichlet_on_internal_vertex_rejected() {
        let spec = GraphSpec::new()
            .vertex("a", BoundaryCondition::Dirichlet)
            .vertex("b", BoundaryCondition::Dirichlet)
            .vertex("c", BoundaryCondition::Dirichlet)
            .edge("e1", "a", Some("b"), "1")
            .edge("e2", "b", Some("c"), "1");
        assert!(MetricGraph::build(&spec).is_err());
    }

    #[test]
    fn parses_from_toml() {
        let text = r#"
            [edges]
            e1 = { start = "x1", end = "c", length = "cbrt(2)" }
            e2 = { start = "x2", end = "c", length = "cbrt(2)" }
            [vertices]
            ids = ["c", "x1", "x2"]
            [boundary]
            c = "neumann-kirchhoff"
            x1 = "dirichlet"
            x2 = "dirichlet"
        "#;
        let spec: GraphSpec = toml::from_str(text).unwrap();
        let g = MetricGraph::build(&spec).unwrap();
        assert_eq!(g.edges()[0].id, "e1");
        assert_eq!(g.edges()[0].length, 2f64.cbrt());
    }
}
