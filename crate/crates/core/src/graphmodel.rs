//! Metric graphs, vertex conditions and graph functions.
//!
//! A metric graph is a set of edges, each an interval `[0, l_e]` with its own
//! coordinate, glued at vertices. Every edge endpoint belongs to exactly one
//! vertex condition: either a weighted Kirchhoff condition (weighted
//! continuity of traces plus a weighted fractional-flux sum equal to zero) or
//! a Dirichlet condition at a boundary vertex.
//!
//! The condition assembler is generic, but only the three topology builders
//! used here are public: the N-bond star, the two-level binary tree and the
//! loop closed by two parallel edges.

use crate::fraccalc::{endpoint_trace, EndpointSide, FracOrder, Grid, GridFunction};
use crate::{Complex64, Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// Edge identifier; the builders use the index strings "1", "11", "121", ...
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub String);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_owned())
    }
}

/// Vertex identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub String);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

/// One edge of the graph: an interval `[0, length]` whose coordinate origin
/// sits at `start` and far end at `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub length: f64,
    pub start: VertexId,
    pub end: VertexId,
}

impl Edge {
    /// The vertex sitting at the given endpoint.
    pub fn vertex_at(&self, side: EndpointSide) -> &VertexId {
        match side {
            EndpointSide::AtZero => &self.start,
            EndpointSide::AtLength => &self.end,
        }
    }
}

/// How an edge endpoint participates in a vertex condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub edge: EdgeId,
    pub side: EndpointSide,
    /// Nonzero continuity weight.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// Weighted continuity of traces across all incident endpoints plus a
    /// weighted sum of fractional-flux traces equal to zero.
    WeightedKirchhoff,
    /// Trace equal to zero at a boundary vertex.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCondition {
    pub vertex: VertexId,
    pub kind: ConditionKind,
    pub incidences: Vec<Incidence>,
}

/// A metric graph with one condition per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    edges: Vec<Edge>,
    vertices: Vec<VertexId>,
    conditions: Vec<VertexCondition>,
    order: FracOrder,
}

impl MetricGraph {
    /// Generic assembler; validates the structural invariants:
    /// every endpoint of every edge appears in exactly one condition, and
    /// every vertex carries exactly one condition.
    fn assemble(
        edges: Vec<Edge>,
        conditions: Vec<VertexCondition>,
        order: FracOrder,
    ) -> Result<Self> {
        let mut vertices: Vec<VertexId> = Vec::new();
        for e in &edges {
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {} has non-positive length {}",
                    e.id, e.length
                )));
            }
            if e.start == e.end {
                return Err(Error::InvalidGraph(format!(
                    "edge {} is a self-loop; loops are modelled with two parallel edges",
                    e.id
                )));
            }
            for v in [&e.start, &e.end] {
                if !vertices.contains(v) {
                    vertices.push(v.clone());
                }
            }
        }
        let mut ids: Vec<&EdgeId> = edges.iter().map(|e| &e.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != edges.len() {
            return Err(Error::InvalidGraph("duplicate edge id".into()));
        }

        // Endpoint coverage: exactly one incidence per endpoint, attached to
        // the vertex that endpoint belongs to.
        for e in &edges {
            for side in [EndpointSide::AtZero, EndpointSide::AtLength] {
                let hits: Vec<&VertexCondition> = conditions
                    .iter()
                    .filter(|c| {
                        c.incidences
                            .iter()
                            .any(|inc| inc.edge == e.id && inc.side == side)
                    })
                    .collect();
                if hits.len() != 1 {
                    return Err(Error::InvalidGraph(format!(
                        "endpoint {side:?} of edge {} is covered by {} conditions",
                        e.id,
                        hits.len()
                    )));
                }
                if hits[0].vertex != *e.vertex_at(side) {
                    return Err(Error::InvalidGraph(format!(
                        "endpoint {side:?} of edge {} conditioned at the wrong vertex",
                        e.id
                    )));
                }
            }
        }
        for v in &vertices {
            let count = conditions.iter().filter(|c| c.vertex == *v).count();
            if count != 1 {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} carries {count} conditions, expected exactly 1"
                )));
            }
        }
        for c in &conditions {
            match c.kind {
                ConditionKind::WeightedKirchhoff if c.incidences.len() < 2 => {
                    return Err(Error::InvalidGraph(format!(
                        "Kirchhoff vertex {} needs at least 2 incidences",
                        c.vertex
                    )));
                }
                ConditionKind::Dirichlet if c.incidences.len() != 1 => {
                    return Err(Error::InvalidGraph(format!(
                        "Dirichlet vertex {} needs exactly 1 incidence",
                        c.vertex
                    )));
                }
                _ => {}
            }
            for inc in &c.incidences {
                if !(inc.weight.is_finite() && inc.weight != 0.0) {
                    return Err(Error::InvalidGraph(format!(
                        "zero or non-finite weight at vertex {}",
                        c.vertex
                    )));
                }
            }
        }
        Ok(Self {
            edges,
            vertices,
            conditions,
            order,
        })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn conditions(&self) -> &[VertexCondition] {
        &self.conditions
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    pub fn edge(&self, id: &EdgeId) -> Result<&Edge> {
        self.edges
            .iter()
            .find(|e| e.id == *id)
            .ok_or_else(|| Error::InvalidGraph(format!("unknown edge {id}")))
    }

    /// One graded grid per edge with `n_cells` cells each.
    pub fn grids(&self, n_cells: usize, grading: f64) -> Result<BTreeMap<EdgeId, Grid>> {
        self.edges
            .iter()
            .map(|e| Ok((e.id.clone(), Grid::graded(n_cells, e.length, grading)?)))
            .collect()
    }
}

/// Star with `n` bonds: one central Kirchhoff vertex holding every edge at
/// its origin, Dirichlet conditions at the far leaves.
pub fn build_star(
    n: usize,
    lengths: &[f64],
    weights: &[f64],
    order: FracOrder,
) -> Result<MetricGraph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!(
            "a star needs at least 2 bonds, got {n}"
        )));
    }
    if lengths.len() != n || weights.len() != n {
        return Err(Error::InvalidGraph(format!(
            "expected {n} lengths and weights, got {} and {}",
            lengths.len(),
            weights.len()
        )));
    }
    let center: VertexId = "center".into();
    let mut edges = Vec::with_capacity(n);
    let mut center_incidences = Vec::with_capacity(n);
    let mut conditions = Vec::with_capacity(n + 1);
    for j in 0..n {
        let id = EdgeId((j + 1).to_string());
        let leaf = VertexId(format!("leaf{}", j + 1));
        edges.push(Edge {
            id: id.clone(),
            length: lengths[j],
            start: center.clone(),
            end: leaf.clone(),
        });
        center_incidences.push(Incidence {
            edge: id.clone(),
            side: EndpointSide::AtZero,
            weight: weights[j],
        });
        conditions.push(VertexCondition {
            vertex: leaf,
            kind: ConditionKind::Dirichlet,
            incidences: vec![Incidence {
                edge: id,
                side: EndpointSide::AtLength,
                weight: 1.0,
            }],
        });
    }
    conditions.insert(
        0,
        VertexCondition {
            vertex: center,
            kind: ConditionKind::WeightedKirchhoff,
            incidences: center_incidences,
        },
    );
    MetricGraph::assemble(edges, conditions, order)
}

/// Edge lengths of the two-level binary tree, keyed by the index strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeLengths {
    pub l1: f64,
    pub l11: f64,
    pub l12: f64,
    pub l111: f64,
    pub l112: f64,
    pub l121: f64,
    pub l122: f64,
}

impl TreeLengths {
    pub fn uniform(l: f64) -> Self {
        Self {
            l1: l,
            l11: l,
            l12: l,
            l111: l,
            l112: l,
            l121: l,
            l122: l,
        }
    }

    /// Lengths from a map keyed by the edge index strings.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| {
            map.get(key)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("missing tree edge length '{key}'")))
        };
        Ok(Self {
            l1: get("1")?,
            l11: get("11")?,
            l12: get("12")?,
            l111: get("111")?,
            l112: get("112")?,
            l121: get("121")?,
            l122: get("122")?,
        })
    }
}

/// Weights of the three interior tree vertices. Each triple orders the
/// parent edge (at its far end) before the two child edges (at their
/// origins).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeWeights {
    pub at_n1: [f64; 3],
    pub at_n11: [f64; 3],
    pub at_n12: [f64; 3],
}

impl TreeWeights {
    pub fn uniform(w: f64) -> Self {
        Self {
            at_n1: [w; 3],
            at_n11: [w; 3],
            at_n12: [w; 3],
        }
    }
}

/// Two-level binary tree: root edge "1" Dirichlet at its origin, interior
/// vertices joining each parent's far end to its two children's origins, and
/// Dirichlet conditions at the four leaves.
pub fn build_tree(
    lengths: &TreeLengths,
    weights: &TreeWeights,
    order: FracOrder,
) -> Result<MetricGraph> {
    let edge = |id: &str, length: f64, start: &str, end: &str| Edge {
        id: id.into(),
        length,
        start: start.into(),
        end: end.into(),
    };
    let edges = vec![
        edge("1", lengths.l1, "root", "n1"),
        edge("11", lengths.l11, "n1", "n11"),
        edge("12", lengths.l12, "n1", "n12"),
        edge("111", lengths.l111, "n11", "leaf111"),
        edge("112", lengths.l112, "n11", "leaf112"),
        edge("121", lengths.l121, "n12", "leaf121"),
        edge("122", lengths.l122, "n12", "leaf122"),
    ];
    let junction = |vertex: &str, parent: &str, children: [&str; 2], w: &[f64; 3]| VertexCondition {
        vertex: vertex.into(),
        kind: ConditionKind::WeightedKirchhoff,
        incidences: vec![
            Incidence {
                edge: parent.into(),
                side: EndpointSide::AtLength,
                weight: w[0],
            },
            Incidence {
                edge: children[0].into(),
                side: EndpointSide::AtZero,
                weight: w[1],
            },
            Incidence {
                edge: children[1].into(),
                side: EndpointSide::AtZero,
                weight: w[2],
            },
        ],
    };
    let dirichlet = |vertex: &str, edge: &str, side: EndpointSide| VertexCondition {
        vertex: vertex.into(),
        kind: ConditionKind::Dirichlet,
        incidences: vec![Incidence {
            edge: edge.into(),
            side,
            weight: 1.0,
        }],
    };
    let conditions = vec![
        dirichlet("root", "1", EndpointSide::AtZero),
        junction("n1", "1", ["11", "12"], &weights.at_n1),
        junction("n11", "11", ["111", "112"], &weights.at_n11),
        junction("n12", "12", ["121", "122"], &weights.at_n12),
        dirichlet("leaf111", "111", EndpointSide::AtLength),
        dirichlet("leaf112", "112", EndpointSide::AtLength),
        dirichlet("leaf121", "121", EndpointSide::AtLength),
        dirichlet("leaf122", "122", EndpointSide::AtLength),
    ];
    MetricGraph::assemble(edges, conditions, order)
}

/// Weights of the two loop junctions: `at_v1` orders (edge 1 at its far end,
/// edges 2 and 3 at their origins); `at_v2` orders (edges 2 and 3 at their
/// far ends, edge 4 at its origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopWeights {
    pub at_v1: [f64; 3],
    pub at_v2: [f64; 3],
}

impl LoopWeights {
    pub fn uniform(w: f64) -> Self {
        Self {
            at_v1: [w; 3],
            at_v2: [w; 3],
        }
    }
}

/// Loop graph: lead-in edge "1", parallel arms "2" and "3" between the two
/// junctions, lead-out edge "4"; Dirichlet at the outer ends of "1" and "4".
pub fn build_loop(lengths: &[f64; 4], weights: &LoopWeights, order: FracOrder) -> Result<MetricGraph> {
    let edge = |id: &str, length: f64, start: &str, end: &str| Edge {
        id: id.into(),
        length,
        start: start.into(),
        end: end.into(),
    };
    let edges = vec![
        edge("1", lengths[0], "start", "v1"),
        edge("2", lengths[1], "v1", "v2"),
        edge("3", lengths[2], "v1", "v2"),
        edge("4", lengths[3], "v2", "end"),
    ];
    let incidence = |edge: &str, side: EndpointSide, weight: f64| Incidence {
        edge: edge.into(),
        side,
        weight,
    };
    let conditions = vec![
        VertexCondition {
            vertex: "start".into(),
            kind: ConditionKind::Dirichlet,
            incidences: vec![incidence("1", EndpointSide::AtZero, 1.0)],
        },
        VertexCondition {
            vertex: "v1".into(),
            kind: ConditionKind::WeightedKirchhoff,
            incidences: vec![
                incidence("1", EndpointSide::AtLength, weights.at_v1[0]),
                incidence("2", EndpointSide::AtZero, weights.at_v1[1]),
                incidence("3", EndpointSide::AtZero, weights.at_v1[2]),
            ],
        },
        VertexCondition {
            vertex: "v2".into(),
            kind: ConditionKind::WeightedKirchhoff,
            incidences: vec![
                incidence("2", EndpointSide::AtLength, weights.at_v2[0]),
                incidence("3", EndpointSide::AtLength, weights.at_v2[1]),
                incidence("4", EndpointSide::AtZero, weights.at_v2[2]),
            ],
        },
        VertexCondition {
            vertex: "end".into(),
            kind: ConditionKind::Dirichlet,
            incidences: vec![incidence("4", EndpointSide::AtLength, 1.0)],
        },
    ];
    MetricGraph::assemble(edges, conditions, order)
}

/// One sampled component per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    components: BTreeMap<EdgeId, GridFunction>,
}

impl GraphFunction {
    pub fn new(graph: &MetricGraph, components: BTreeMap<EdgeId, GridFunction>) -> Result<Self> {
        if components.len() != graph.edges().len() {
            return Err(Error::GraphFunctionMismatch(format!(
                "graph has {} edges, function has {} components",
                graph.edges().len(),
                components.len()
            )));
        }
        for e in graph.edges() {
            let c = components.get(&e.id).ok_or_else(|| {
                Error::GraphFunctionMismatch(format!("missing component for edge {}", e.id))
            })?;
            let len = c.grid().length();
            if (len - e.length).abs() > 1e-12 * e.length.max(1.0) {
                return Err(Error::GraphFunctionMismatch(format!(
                    "component on edge {} spans {len}, edge length is {}",
                    e.id, e.length
                )));
            }
        }
        Ok(Self { components })
    }

    pub fn component(&self, id: &EdgeId) -> Result<&GridFunction> {
        self.components
            .get(id)
            .ok_or_else(|| Error::GraphFunctionMismatch(format!("missing component for edge {id}")))
    }

    pub fn components(&self) -> &BTreeMap<EdgeId, GridFunction> {
        &self.components
    }

    /// Componentwise scaling.
    pub fn scale(&self, c: Complex64) -> GraphFunction {
        GraphFunction {
            components: self
                .components
                .iter()
                .map(|(id, f)| (id.clone(), f.scale(c)))
                .collect(),
        }
    }
}

/// Residuals of one vertex condition.
#[derive(Debug, Clone)]
pub struct VertexResidual {
    pub vertex: VertexId,
    pub kind: ConditionKind,
    /// Max pairwise deviation of weighted traces (Kirchhoff only).
    pub continuity: f64,
    /// |weighted sum of fractional-flux traces| (Kirchhoff only).
    pub flux: f64,
    /// |trace| at a Dirichlet vertex.
    pub dirichlet: f64,
    /// False when a flux trace did not converge.
    pub flux_converged: bool,
    pub satisfied: bool,
}

/// Vertex-by-vertex report of [`check_conditions`].
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub vertices: Vec<VertexResidual>,
    pub satisfied: bool,
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertex conditions (tolerance {:.3e})", self.tolerance)?;
        writeln!(
            f,
            "{:<10} {:<10} {:>14} {:>14} {:>14}  verdict",
            "vertex", "kind", "continuity", "flux", "dirichlet"
        )?;
        for v in &self.vertices {
            let kind = match v.kind {
                ConditionKind::WeightedKirchhoff => "kirchhoff",
                ConditionKind::Dirichlet => "dirichlet",
            };
            writeln!(
                f,
                "{:<10} {:<10} {:>14.6e} {:>14.6e} {:>14.6e}  {}",
                v.vertex.to_string(),
                kind,
                v.continuity,
                v.flux,
                v.dirichlet,
                if v.satisfied { "ok" } else { "violated" }
            )?;
        }
        writeln!(
            f,
            "overall: {}",
            if self.satisfied { "satisfied" } else { "violated" }
        )
    }
}

/// Check every vertex condition of `graph` against `phi`.
///
/// Traces are pointwise one-sided limits for bounded components and the
/// annotated singular coefficient where a component carries one. Fluxes are
/// the extrapolated endpoint traces of the `(1-alpha)`-order integral at the
/// incident endpoint.
pub fn check_conditions(
    graph: &MetricGraph,
    phi: &GraphFunction,
    tol: f64,
) -> Result<ConditionReport> {
    let order = graph.order();
    let trace_tol = (0.1 * tol).max(1e-8);
    let mut vertices = Vec::with_capacity(graph.conditions().len());
    let mut all_ok = true;
    for condition in graph.conditions() {
        let mut residual = VertexResidual {
            vertex: condition.vertex.clone(),
            kind: condition.kind,
            continuity: 0.0,
            flux: 0.0,
            dirichlet: 0.0,
            flux_converged: true,
            satisfied: true,
        };
        match condition.kind {
            ConditionKind::Dirichlet => {
                let inc = &condition.incidences[0];
                let component = phi.component(&inc.edge)?;
                residual.dirichlet = component.trace(inc.side).norm();
            }
            ConditionKind::WeightedKirchhoff => {
                let mut weighted_traces = Vec::with_capacity(condition.incidences.len());
                let mut flux_sum = Complex64::new(0.0, 0.0);
                for inc in &condition.incidences {
                    let component = phi.component(&inc.edge)?;
                    weighted_traces.push(component.trace(inc.side) * inc.weight);
                    match endpoint_trace(component, order, inc.side, trace_tol) {
                        Ok(limit) => flux_sum += limit.value / inc.weight,
                        Err(Error::TraceNotConvergent { .. }) => {
                            residual.flux_converged = false;
                        }
                        Err(e) => return Err(e),
                    }
                }
                for (i, a) in weighted_traces.iter().enumerate() {
                    for b in weighted_traces.iter().skip(i + 1) {
                        residual.continuity = residual.continuity.max((a - b).norm());
                    }
                }
                residual.flux = flux_sum.norm();
            }
        }
        residual.satisfied = residual.flux_converged
            && residual.continuity <= tol
            && residual.flux <= tol
            && residual.dirichlet <= tol;
        all_ok &= residual.satisfied;
        vertices.push(residual);
    }
    Ok(ConditionReport {
        tolerance: tol,
        vertices,
        satisfied: all_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraccalc::SingularTerm;

    fn order() -> FracOrder {
        FracOrder::new(0.5).unwrap()
    }

    fn count_kind(g: &MetricGraph, kind: ConditionKind) -> usize {
        g.conditions().iter().filter(|c| c.kind == kind).count()
    }

    #[test]
    fn star_structure() {
        let g = build_star(3, &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], order()).unwrap();
        assert_eq!(g.edges().len(), 3);
        assert_eq!(count_kind(&g, ConditionKind::WeightedKirchhoff), 1);
        assert_eq!(count_kind(&g, ConditionKind::Dirichlet), 3);
        let center = g
            .conditions()
            .iter()
            .find(|c| c.kind == ConditionKind::WeightedKirchhoff)
            .unwrap();
        assert_eq!(center.incidences.len(), 3);
        assert!(center
            .incidences
            .iter()
            .all(|inc| inc.side == EndpointSide::AtZero));
    }

    #[test]
    fn two_bond_star_is_an_interval_with_matching_point() {
        let g = build_star(2, &[1.0, 2.0], &[1.0, -1.0], order()).unwrap();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.vertices().len(), 3);
    }

    #[test]
    fn star_rejects_zero_weight_and_bad_lengths() {
        assert!(build_star(3, &[1.0, 1.0, 1.0], &[1.0, 0.0, 1.0], order()).is_err());
        assert!(build_star(3, &[1.0, -1.0, 1.0], &[1.0, 1.0, 1.0], order()).is_err());
        assert!(build_star(1, &[1.0], &[1.0], order()).is_err());
        assert!(build_star(3, &[1.0, 1.0], &[1.0, 1.0, 1.0], order()).is_err());
    }

    #[test]
    fn tree_structure() {
        let g = build_tree(
            &TreeLengths::uniform(1.0),
            &TreeWeights::uniform(1.0),
            order(),
        )
        .unwrap();
        assert_eq!(g.edges().len(), 7);
        assert_eq!(count_kind(&g, ConditionKind::WeightedKirchhoff), 3);
        assert_eq!(count_kind(&g, ConditionKind::Dirichlet), 5);
        for c in g.conditions() {
            if c.kind == ConditionKind::WeightedKirchhoff {
                assert_eq!(c.incidences.len(), 3);
            }
        }
    }

    #[test]
    fn tree_rejects_zero_weight_and_negative_length() {
        let mut w = TreeWeights::uniform(1.0);
        w.at_n11[1] = 0.0;
        assert!(build_tree(&TreeLengths::uniform(1.0), &w, order()).is_err());
        let mut l = TreeLengths::uniform(1.0);
        l.l121 = -2.0;
        assert!(build_tree(&l, &TreeWeights::uniform(1.0), order()).is_err());
    }

    #[test]
    fn tree_lengths_from_map() {
        let mut map = BTreeMap::new();
        for key in ["1", "11", "12", "111", "112", "121", "122"] {
            map.insert(key.to_owned(), 2.0);
        }
        let lengths = TreeLengths::from_map(&map).unwrap();
        assert_eq!(lengths.l122, 2.0);
        map.remove("121");
        assert!(TreeLengths::from_map(&map).is_err());
    }

    #[test]
    fn loop_structure() {
        let g = build_loop(&[1.0, 1.0, 1.0, 1.0], &LoopWeights::uniform(1.0), order()).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert_eq!(count_kind(&g, ConditionKind::WeightedKirchhoff), 2);
        assert_eq!(count_kind(&g, ConditionKind::Dirichlet), 2);
        // The two arms connect the same pair of junctions in parallel.
        let arm2 = g.edge(&"2".into()).unwrap();
        let arm3 = g.edge(&"3".into()).unwrap();
        assert_eq!(arm2.start, arm3.start);
        assert_eq!(arm2.end, arm3.end);
        assert_ne!(arm2.start, arm2.end);
    }

    #[test]
    fn loop_with_unequal_arms_is_valid() {
        assert!(build_loop(&[1.0, 2.0, 3.0, 1.0], &LoopWeights::uniform(1.0), order()).is_ok());
    }

    fn constant_function(g: &MetricGraph, n: usize, value: f64) -> GraphFunction {
        let components = g
            .edges()
            .iter()
            .map(|e| {
                let grid = Grid::graded(n, e.length, 2.0).unwrap();
                (e.id.clone(), GridFunction::from_fn(grid, |_| value))
            })
            .collect();
        GraphFunction::new(g, components).unwrap()
    }

    #[test]
    fn symmetric_star_with_shared_trace_passes_continuity() {
        let g = build_star(3, &[1.0; 3], &[1.0; 3], order()).unwrap();
        // f(x) = c (1 - x): equal traces at the centre, zero at the leaves.
        let components = g
            .edges()
            .iter()
            .map(|e| {
                let grid = Grid::graded(64, e.length, 2.0).unwrap();
                (e.id.clone(), GridFunction::from_fn(grid, |x| 2.5 * (1.0 - x)))
            })
            .collect();
        let phi = GraphFunction::new(&g, components).unwrap();
        let report = check_conditions(&g, &phi, 1e-3).unwrap();
        let center = &report.vertices[0];
        assert_eq!(center.continuity, 0.0);
        for v in &report.vertices[1..] {
            assert_eq!(v.dirichlet, 0.0);
        }
        assert!(report.satisfied, "{report}");
    }

    #[test]
    fn scaled_component_violates_continuity() {
        let g = build_star(3, &[1.0; 3], &[1.0; 3], order()).unwrap();
        let mut components = BTreeMap::new();
        for (j, e) in g.edges().iter().enumerate() {
            let grid = Grid::graded(64, e.length, 2.0).unwrap();
            let scale = if j == 0 { 2.0 } else { 1.0 };
            components.insert(
                e.id.clone(),
                GridFunction::from_fn(grid, move |x| scale * 3.0 * (1.0 - x)),
            );
        }
        let phi = GraphFunction::new(&g, components).unwrap();
        let report = check_conditions(&g, &phi, 1e-3).unwrap();
        // Max pairwise deviation equals the trace difference |2c - c| = 3.
        assert!((report.vertices[0].continuity - 3.0).abs() < 1e-12);
        assert!(!report.satisfied);
    }

    #[test]
    fn rescaling_function_scales_residuals_linearly() {
        let g = build_star(3, &[1.0, 2.0, 1.5], &[1.0, -2.0, 0.5], order()).unwrap();
        let mut components = BTreeMap::new();
        for (j, e) in g.edges().iter().enumerate() {
            let grid = Grid::graded(64, e.length, 2.0).unwrap();
            let slope = 1.0 + j as f64;
            let l = e.length;
            components.insert(
                e.id.clone(),
                GridFunction::from_fn(grid, move |x| slope * (1.0 - x / l) + 0.2),
            );
        }
        let phi = GraphFunction::new(&g, components).unwrap();
        let scaled = phi.scale(Complex64::new(-3.0, 4.0)); // |c| = 5
        let base = check_conditions(&g, &phi, 1e-9).unwrap();
        let big = check_conditions(&g, &scaled, 1e-9).unwrap();
        for (a, b) in base.vertices.iter().zip(&big.vertices) {
            assert!((b.continuity - 5.0 * a.continuity).abs() <= 1e-9 * (1.0 + a.continuity));
            assert!((b.dirichlet - 5.0 * a.dirichlet).abs() <= 1e-9 * (1.0 + a.dirichlet));
            assert!((b.flux - 5.0 * a.flux).abs() <= 1e-6 * (1.0 + a.flux));
        }
    }

    #[test]
    fn weight_rescaling_covariance() {
        // Scaling all weights at a vertex by c multiplies the continuity
        // residual by |c| and the flux residual by 1/|c|.
        let lengths = [1.0, 1.3, 0.7];
        let weights = [1.0, 2.0, -1.5];
        let scaled: Vec<f64> = weights.iter().map(|w| w * 4.0).collect();
        let g1 = build_star(3, &lengths, &weights, order()).unwrap();
        let g2 = build_star(3, &lengths, &scaled, order()).unwrap();
        let phi1 = constant_function(&g1, 64, 1.0);
        let phi2 = constant_function(&g2, 64, 1.0);
        let r1 = check_conditions(&g1, &phi1, 1e-9).unwrap();
        let r2 = check_conditions(&g2, &phi2, 1e-9).unwrap();
        assert!((r2.vertices[0].continuity - 4.0 * r1.vertices[0].continuity).abs() < 1e-10);
        assert!((r2.vertices[0].flux - r1.vertices[0].flux / 4.0).abs() < 1e-10);
    }

    #[test]
    fn singular_coefficient_is_the_trace_at_annotated_endpoints() {
        let g = build_star(2, &[1.0, 1.0], &[1.0, 1.0], order()).unwrap();
        let mut components = BTreeMap::new();
        for e in g.edges() {
            let grid = Grid::graded(64, e.length, 2.0).unwrap();
            let mut f = GridFunction::zeros(grid);
            f.push_singular(SingularTerm {
                side: EndpointSide::AtLength,
                exponent: -0.5,
                coefficient: Complex64::new(0.25, 0.0),
            });
            components.insert(e.id.clone(), f);
        }
        let phi = GraphFunction::new(&g, components).unwrap();
        let report = check_conditions(&g, &phi, 1e-6).unwrap();
        for v in report.vertices.iter().filter(|v| v.kind == ConditionKind::Dirichlet) {
            assert!((v.dirichlet - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn graph_function_requires_matching_grids() {
        let g = build_star(3, &[1.0, 2.0, 4.0], &[1.0; 3], order()).unwrap();
        let mut components = BTreeMap::new();
        for e in g.edges() {
            // Deliberately wrong span on every edge.
            let grid = Grid::graded(32, 1.0, 2.0).unwrap();
            components.insert(e.id.clone(), GridFunction::zeros(grid));
        }
        assert!(GraphFunction::new(&g, components).is_err());
    }
}
