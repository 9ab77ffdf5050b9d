use std::collections::HashSet;
use std::path::Path;

use hde_core::text::normalize;
use hde_core::School;
use serde::{Deserialize, Serialize};

use crate::error::{IdentityError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Belief,
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefNode {
    pub id: String,
    pub kind: NodeKind,
    pub statement: String,
    /// Certainty in `[0, 1]`.
    pub gamma: f64,
    /// Immutable core belief; implies `gamma == 1.0`.
    #[serde(default)]
    pub core: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub relation: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchMode {
    #[default]
    AnyPhrase,
    AllPhrases,
}

/// A doctrinal prohibition, e.g. "REJECT: Reducing morality to calculation".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativeConstraint {
    id: String,
    label: String,
    patterns: Vec<String>,
    #[serde(default)]
    match_mode: MatchMode,
}

impl NegativeConstraint {
    /// Patterns are normalized to lowercase single-spaced phrases; an empty
    /// list or a blank pattern is rejected.
    pub fn new<I, S>(id: impl Into<String>, label: impl Into<String>, patterns: I, match_mode: MatchMode) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let c = NegativeConstraint {
            id: id.into(),
            label: label.into(),
            patterns: patterns.into_iter().map(|p| p.as_ref().to_string()).collect(),
            match_mode,
        };
        c.validated("constraint")
    }

    fn validated(mut self, field: &str) -> Result<Self> {
        if self.patterns.is_empty() {
            return Err(IdentityError::invalid(format!("{field}.patterns"), "must not be empty"));
        }
        for (i, p) in self.patterns.iter_mut().enumerate() {
            let n = normalize(p);
            if n.is_empty() {
                return Err(IdentityError::invalid(format!("{field}.patterns[{i}]"), "blank pattern"));
            }
            *p = n;
        }
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn match_mode(&self) -> MatchMode {
        self.match_mode
    }
}

/// Node and constraint counts of an identity graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityStats {
    pub nodes: usize,
    pub core: usize,
    pub beliefs: usize,
    pub values: usize,
    pub edges: usize,
    pub constraints: usize,
}

/// An agent's doctrinal self.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityGraph {
    agent_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    display_name: Option<String>,
    school: School,
    persona_summary: String,
    #[serde(default)]
    nodes: Vec<BeliefNode>,
    #[serde(default)]
    edges: Vec<Edge>,
    #[serde(default)]
    constraints: Vec<NegativeConstraint>,
}

impl IdentityGraph {
    pub fn new(
        agent_id: impl Into<String>,
        school: School,
        persona_summary: impl Into<String>,
        nodes: Vec<BeliefNode>,
        edges: Vec<Edge>,
        constraints: Vec<NegativeConstraint>,
    ) -> Result<Self> {
        IdentityGraph {
            agent_id: agent_id.into(),
            display_name: None,
            school,
            persona_summary: persona_summary.into(),
            nodes,
            edges,
            constraints,
        }
        .validated()
    }

    /// A graph with no nodes, edges or constraints, for persona-free baselines.
    pub fn empty(agent_id: impl Into<String>, school: School) -> Self {
        IdentityGraph {
            agent_id: agent_id.into(),
            display_name: None,
            school,
            persona_summary: String::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn with_display_name(mut self, name: impl Into<String>) -> Self {
        self.display_name = Some(name.into());
        self
    }

    fn validated(mut self) -> Result<Self> {
        if self.agent_id.trim().is_empty() {
            return Err(IdentityError::invalid("agent_id", "must not be empty"));
        }
        let mut ids = HashSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !(0.0..=1.0).contains(&n.gamma) {
                return Err(IdentityError::invalid(
                    format!("nodes[{i}].gamma"),
                    format!("{} is outside [0, 1]", n.gamma),
                ));
            }
            if n.core && n.gamma != 1.0 {
                return Err(IdentityError::invalid(
                    format!("nodes[{i}].core"),
                    format!("core node `{}` must have gamma = 1.0", n.id),
                ));
            }
            if n.statement.trim().is_empty() {
                return Err(IdentityError::invalid(format!("nodes[{i}].statement"), "must not be empty"));
            }
            if !ids.insert(n.id.as_str()) {
                return Err(IdentityError::invalid(format!("nodes[{i}].id"), format!("duplicate id `{}`", n.id)));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            for end in [&e.from, &e.to] {
                if !ids.contains(end.as_str()) {
                    return Err(IdentityError::DanglingEdge {
                        edge: i,
                        missing: end.clone(),
                    });
                }
            }
        }
        if !self.nodes.is_empty() && !self.nodes.iter().any(|n| n.core) {
            return Err(IdentityError::invalid("nodes", "a non-empty graph needs at least one core node"));
        }
        self.constraints = std::mem::take(&mut self.constraints)
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.validated(&format!("constraints[{i}]")))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// Parse and validate an identity document.
    pub fn from_json(source: &str, origin: &Path) -> Result<Self> {
        let raw: IdentityGraph = serde_json::from_str(source).map_err(|e| IdentityError::Schema {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        raw.validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("identity graph serializes")
    }

    pub fn agent_id(&self) -> &str {
        &self.agent_id
    }

    /// Human-facing name; falls back to the agent id.
    pub fn display_name(&self) -> &str {
        self.display_name.as_deref().unwrap_or(&self.agent_id)
    }

    pub fn school(&self) -> School {
        self.school
    }

    pub fn persona_summary(&self) -> &str {
        &self.persona_summary
    }

    pub fn nodes(&self) -> &[BeliefNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn constraints(&self) -> &[NegativeConstraint] {
        &self.constraints
    }

    pub fn core_nodes(&self) -> impl Iterator<Item = &BeliefNode> {
        self.nodes.iter().filter(|n| n.core)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn stats(&self) -> IdentityStats {
        let count = |k| self.nodes.iter().filter(|n| n.kind == k).count();
        IdentityStats {
            nodes: self.nodes.len(),
            core: self.core_nodes().count(),
            beliefs: count(NodeKind::Belief),
            values: count(NodeKind::Value),
            edges: self.edges.len(),
            constraints: self.constraints.len(),
        }
    }
}

/// Load and validate an identity file.
pub fn load_identity(path: &Path) -> Result<IdentityGraph> {
    let source = std::fs::read_to_string(path).map_err(|source| IdentityError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    IdentityGraph::from_json(&source, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, gamma: f64, core: bool) -> BeliefNode {
        BeliefNode {
            id: id.into(),
            kind: NodeKind::Belief,
            statement: format!("statement {id}"),
            gamma,
            core,
        }
    }

    #[test]
    fn gamma_out_of_range_names_the_field() {
        let err = IdentityGraph::new("k", School::Deontology, "", vec![node("a", 1.3, false)], vec![], vec![])
            .unwrap_err();
        assert!(err.to_string().contains("nodes[0].gamma"), "{err}");
    }

    #[test]
    fn core_requires_full_certainty() {
        let err = IdentityGraph::new("k", School::Deontology, "", vec![node("a", 0.9, true)], vec![], vec![])
            .unwrap_err();
        assert!(err.to_string().contains("nodes[0].core"));
    }

    #[test]
    fn non_empty_graph_needs_core() {
        assert!(IdentityGraph::new("k", School::Deontology, "", vec![node("a", 0.5, false)], vec![], vec![]).is_err());
    }

    #[test]
    fn dangling_edge_lists_missing_id() {
        let edge = Edge {
            from: "a".into(),
            to: "ghost".into(),
            relation: "supports".into(),
        };
        let err = IdentityGraph::new("k", School::Deontology, "", vec![node("a", 1.0, true)], vec![edge], vec![])
            .unwrap_err();
        assert!(matches!(err, IdentityError::DanglingEdge { ref missing, .. } if missing == "ghost"));
    }

    #[test]
    fn empty_graph_is_valid() {
        let g = IdentityGraph::new("tutor", School::Neutral, "", vec![], vec![], vec![]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.stats().core, 0);
    }

    #[test]
    fn constraint_patterns_are_normalized_and_checked() {
        let c = NegativeConstraint::new("n1", "REJECT", ["  Calculation   of Utility "], MatchMode::AnyPhrase).unwrap();
        assert_eq!(c.patterns(), ["calculation of utility"]);
        assert!(NegativeConstraint::new("n1", "REJECT", Vec::<String>::new(), MatchMode::AnyPhrase).is_err());
        assert!(NegativeConstraint::new("n1", "REJECT", ["  "], MatchMode::AnyPhrase).is_err());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = IdentityGraph::from_json(r#"{"agent_id":"k","persona_summary":""}"#, Path::new("k.json")).unwrap_err();
        assert!(err.to_string().contains("school"), "{err}");
    }
}
