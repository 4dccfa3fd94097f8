//! Simple undirected graphs keyed by string labels.
//!
//! A [`LabeledGraph`] is a value: every operation that changes the node or
//! edge set returns a new graph and leaves the receiver untouched. Labels are
//! kept in sorted order, so the internal index of a node doubles as its rank
//! under the lexicographic tie-break used throughout the crate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prefix of the comment directive that declares an isolated node in the
/// edge-list format. Other readers treat the line as an ordinary comment.
pub const ISOLATED_DIRECTIVE: &str = "#!node";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<GraphError>,
    },
    #[error("malformed line {0:?}: expected two whitespace-separated labels")]
    Malformed(String),
    #[error("invalid node label {0:?}")]
    InvalidLabel(String),
    #[error("self-loop on {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("duplicate node label {0:?}")]
    DuplicateNode(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown role {0:?}")]
    UnknownRole(String),
    #[error("malformed roles line {0:?}: expected `label,role`")]
    MalformedRole(String),
}

impl GraphError {
    fn at_line(self, line: usize) -> Self {
        GraphError::AtLine {
            line,
            source: Box::new(self),
        }
    }
}

/// Functional roles of actors in a trafficking organisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Caretaker,
    Company,
    BodyGuard,
    Estafeta,
    Exploiter,
    PublicServant,
    Guide,
    Participant,
    Raitero,
    Recruiter,
    RecruiterVictim,
}

impl Role {
    pub const ALL: [Role; 11] = [
        Role::Caretaker,
        Role::Company,
        Role::BodyGuard,
        Role::Estafeta,
        Role::Exploiter,
        Role::PublicServant,
        Role::Guide,
        Role::Participant,
        Role::Raitero,
        Role::Recruiter,
        Role::RecruiterVictim,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Caretaker => "Caretaker",
            Role::Company => "Company",
            Role::BodyGuard => "BodyGuard",
            Role::Estafeta => "Estafeta",
            Role::Exploiter => "Exploiter",
            Role::PublicServant => "PublicServant",
            Role::Guide => "Guide",
            Role::Participant => "Participant",
            Role::Raitero => "Raitero",
            Role::Recruiter => "Recruiter",
            Role::RecruiterVictim => "RecruiterVictim",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| GraphError::UnknownRole(s.to_string()))
    }
}

/// A set of node labels, used for removals, partitions and components.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeSet(BTreeSet<String>);

impl NodeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn insert(&mut self, label: impl Into<String>) -> bool {
        self.0.insert(label.into())
    }

    /// Labels in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for NodeSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        NodeSet(iter.into_iter().map(Into::into).collect())
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = &'a String;
    type IntoIter = std::collections::btree_set::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Simple undirected graph with string labels and optional role tags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<String>,
    adj: Vec<Vec<usize>>,
    roles: BTreeMap<String, Role>,
}

fn check_label(label: &str) -> Result<(), GraphError> {
    if label.is_empty() || label.starts_with('#') || label.chars().any(char::is_whitespace) {
        return Err(GraphError::InvalidLabel(label.to_string()));
    }
    Ok(())
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from explicit nodes plus edges. Edge endpoints that are
    /// not listed in `nodes` are added. Duplicate edges and self-loops are
    /// rejected; duplicate entries in `nodes` are rejected as well.
    pub fn from_parts<N, E, A, B>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator,
        N::Item: AsRef<str>,
        E: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut builder = Builder::default();
        for n in nodes {
            builder.add_node(n.as_ref())?;
        }
        for (a, b) in edges {
            builder.add_edge(a.as_ref(), b.as_ref())?;
        }
        Ok(builder.finish())
    }

    pub fn from_edges<E, A, B>(edges: E) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        Self::from_parts(std::iter::empty::<&str>(), edges)
    }

    /// Parses the edge-list text format: one edge per line, two
    /// whitespace-separated labels, `#` comments and blank lines ignored.
    /// `#!node LABEL` declares an isolated node.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut builder = Builder::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if let Some(rest) = trimmed.strip_prefix(ISOLATED_DIRECTIVE) {
                if rest.starts_with(char::is_whitespace) {
                    for label in rest.split_whitespace() {
                        builder
                            .add_node_lenient(label)
                            .map_err(|e| e.at_line(line))?;
                    }
                    continue;
                }
            }
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let content = trimmed.split('#').next().unwrap_or_default();
            let mut fields = content.split_whitespace();
            match (fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), None) => {
                    builder.add_edge(a, b).map_err(|e| e.at_line(line))?;
                }
                _ => return Err(GraphError::Malformed(raw.to_string()).at_line(line)),
            }
        }
        Ok(builder.finish())
    }

    /// Serializes to the edge-list format. Isolated nodes are emitted as
    /// `#!node` directives so that re-parsing gives back the same graph.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "# {} nodes, {} edges\n",
            self.node_count(),
            self.edge_count()
        );
        for (i, label) in self.labels.iter().enumerate() {
            if self.adj[i].is_empty() {
                out.push_str(ISOLATED_DIRECTIVE);
                out.push(' ');
                out.push_str(label);
                out.push('\n');
            }
        }
        for (a, b) in self.edges() {
            out.push_str(a);
            out.push(' ');
            out.push_str(b);
            out.push('\n');
        }
        out
    }

    /// Attaches roles from `label,role` CSV lines. Blank lines, `#` comments
    /// and an optional `label,role` header are skipped.
    pub fn load_roles(&self, text: &str) -> Result<Self, GraphError> {
        let mut roles = self.roles.clone();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (label, role) = trimmed
                .split_once(',')
                .map(|(l, r)| (l.trim(), r.trim()))
                .ok_or_else(|| GraphError::MalformedRole(raw.to_string()).at_line(line))?;
            if i == 0 && label == "label" && role == "role" {
                continue;
            }
            let role: Role = role.parse().map_err(|e: GraphError| e.at_line(line))?;
            if self.index_of(label).is_none() {
                return Err(GraphError::UnknownNode(label.to_string()).at_line(line));
            }
            roles.insert(label.to_string(), role);
        }
        Ok(LabeledGraph {
            roles,
            ..self.clone()
        })
    }

    pub fn roles_csv(&self) -> String {
        let mut out = String::from("label,role\n");
        for (label, role) in &self.roles {
            out.push_str(label);
            out.push(',');
            out.push_str(role.as_str());
            out.push('\n');
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Node labels in lexicographic order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_set(&self) -> NodeSet {
        self.labels.iter().cloned().collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels
            .binary_search_by(|probe| probe.as_str().cmp(label))
            .ok()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.adj[i].binary_search(&j).is_ok(),
            _ => false,
        }
    }

    pub fn degree(&self, label: &str) -> Result<usize, GraphError> {
        self.index_of(label)
            .map(|i| self.adj[i].len())
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))
    }

    pub fn neighbors(&self, label: &str) -> Result<impl Iterator<Item = &str> + '_, GraphError> {
        let i = self
            .index_of(label)
            .ok_or_else(|| GraphError::UnknownNode(label.to_string()))?;
        Ok(self.adj[i].iter().map(move |&j| self.labels[j].as_str()))
    }

    /// Every edge once, as `(smaller label, larger label)`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.adj.iter().enumerate().flat_map(move |(i, nbrs)| {
            nbrs.iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (self.labels[i].as_str(), self.labels[j].as_str()))
        })
    }

    /// Degree of every node keyed by label.
    pub fn degrees(&self) -> BTreeMap<String, usize> {
        self.labels
            .iter()
            .cloned()
            .zip(self.adj.iter().map(Vec::len))
            .collect()
    }

    pub fn role(&self, label: &str) -> Option<Role> {
        self.roles.get(label).copied()
    }

    pub fn roles(&self) -> &BTreeMap<String, Role> {
        &self.roles
    }

    /// Sorted neighbor indices for every node, indexed like [`labels`](Self::labels).
    pub(crate) fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    /// Builds a graph from sorted labels and an index adjacency that is
    /// already known to be simple and symmetric.
    pub(crate) fn from_index_parts(
        labels: Vec<String>,
        mut adj: Vec<Vec<usize>>,
        roles: BTreeMap<String, Role>,
    ) -> Self {
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        LabeledGraph { labels, adj, roles }
    }

    fn check_subset(&self, set: &NodeSet) -> Result<(), GraphError> {
        match set.iter().find(|l| !self.contains(l)) {
            Some(missing) => Err(GraphError::UnknownNode(missing.to_string())),
            None => Ok(()),
        }
    }

    /// Induced subgraph on every node outside `removed`.
    pub fn remove_nodes(&self, removed: &NodeSet) -> Result<Self, GraphError> {
        self.check_subset(removed)?;
        let keep: Vec<bool> = self.labels.iter().map(|l| !removed.contains(l)).collect();
        Ok(self.restrict(&keep))
    }

    pub fn induced_subgraph(&self, nodes: &NodeSet) -> Result<Self, GraphError> {
        self.check_subset(nodes)?;
        let keep: Vec<bool> = self.labels.iter().map(|l| nodes.contains(l)).collect();
        Ok(self.restrict(&keep))
    }

    pub(crate) fn restrict(&self, keep: &[bool]) -> Self {
        let mut remap = vec![usize::MAX; self.labels.len()];
        let mut labels = Vec::new();
        for (i, label) in self.labels.iter().enumerate() {
            if keep[i] {
                remap[i] = labels.len();
                labels.push(label.clone());
            }
        }
        let adj = self
            .adj
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep[i])
            .map(|(_, nbrs)| {
                nbrs.iter()
                    .filter(|&&j| keep[j])
                    .map(|&j| remap[j])
                    .collect()
            })
            .collect();
        let roles = self
            .roles
            .iter()
            .filter(|(l, _)| self.index_of(l).is_some_and(|i| keep[i]))
            .map(|(l, r)| (l.clone(), *r))
            .collect();
        LabeledGraph { labels, adj, roles }
    }

    /// Node set of a largest connected component. Among equally large
    /// components the one holding the lexicographically smallest label wins.
    pub fn largest_connected_component(&self) -> NodeSet {
        largest_component(&self.adj)
            .into_iter()
            .map(|i| self.labels[i].clone())
            .collect()
    }

    pub fn lcc_size(&self) -> usize {
        largest_component(&self.adj).len()
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.lcc_size() == self.node_count()
    }
}

/// Components of an index adjacency, ordered by smallest member.
pub(crate) fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub(crate) fn largest_component(adj: &[Vec<usize>]) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for comp in components(adj) {
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

#[derive(Default)]
struct Builder {
    labels: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

impl Builder {
    fn add_node(&mut self, label: &str) -> Result<(), GraphError> {
        check_label(label)?;
        if !self.labels.insert(label.to_string()) {
            return Err(GraphError::DuplicateNode(label.to_string()));
        }
        Ok(())
    }

    fn add_node_lenient(&mut self, label: &str) -> Result<(), GraphError> {
        check_label(label)?;
        self.labels.insert(label.to_string());
        Ok(())
    }

    fn add_edge(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        check_label(a)?;
        check_label(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        if self.edges.contains(&key) {
            return Err(GraphError::DuplicateEdge(key.0, key.1));
        }
        self.labels.insert(key.0.clone());
        self.labels.insert(key.1.clone());
        self.edges.insert(key);
        Ok(())
    }

    fn finish(self) -> LabeledGraph {
        let labels: Vec<String> = self.labels.into_iter().collect();
        let index = |l: &str| labels.binary_search_by(|p| p.as_str().cmp(l)).unwrap();
        let mut adj = vec![Vec::new(); labels.len()];
        for (a, b) in &self.edges {
            let (i, j) = (index(a), index(b));
            adj[i].push(j);
            adj[j].push(i);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        LabeledGraph {
            labels,
            adj,
            roles: BTreeMap::new(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::test_graphs::*;
    use super::*;

    fn set(labels: &[&str]) -> NodeSet {
        labels.iter().copied().collect()
    }

    #[test]
    fn parses_small_path() {
        let g = LabeledGraph::parse_edge_list("a b\nb c").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge("b", "a"));
        assert!(!g.has_edge("a", "c"));
    }

    #[test]
    fn rejects_self_loop() {
        let err = LabeledGraph::parse_edge_list("a a").unwrap_err();
        assert!(matches!(
            err,
            GraphError::AtLine { line: 1, ref source } if matches!(**source, GraphError::SelfLoop(_))
        ));
    }

    #[test]
    fn rejects_duplicate_edge_with_line_number() {
        let err = LabeledGraph::parse_edge_list("# header\na b\n\nb a\n").unwrap_err();
        match err {
            GraphError::AtLine { line, source } => {
                assert_eq!(line, 4);
                assert_eq!(*source, GraphError::DuplicateEdge("a".into(), "b".into()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(LabeledGraph::parse_edge_list("a b c").is_err());
        assert!(LabeledGraph::parse_edge_list("a").is_err());
        assert!(LabeledGraph::parse_edge_list("a b\nlonely\n").is_err());
    }

    #[test]
    fn comments_and_trailing_comments() {
        let g = LabeledGraph::parse_edge_list("# c\n  a b   # trailing\n\n#x y\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn isolated_nodes_survive_round_trip() {
        let g = LabeledGraph::from_parts(["z", "a", "b"], [("a", "b")]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(LabeledGraph::parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn roles_attach_and_validate() {
        let g = LabeledGraph::parse_edge_list("Ex1 P1\nP1 Rv1").unwrap();
        let tagged = g.load_roles("Ex1,Exploiter").unwrap();
        assert_eq!(tagged.role("Ex1"), Some(Role::Exploiter));
        assert_eq!(tagged.role("P1"), None);
        assert_eq!(g.role("Ex1"), None);

        let err = g.load_roles("Ex1,Wizard").unwrap_err();
        assert!(err.to_string().contains("unknown role"));
        assert!(g.load_roles("Nobody,Guide").is_err());
        assert!(g.load_roles("exploiter").is_err());
        assert_eq!(g.load_roles("").unwrap(), g);
    }

    #[test]
    fn role_parsing_is_case_sensitive() {
        assert_eq!(
            "RecruiterVictim".parse::<Role>().unwrap(),
            Role::RecruiterVictim
        );
        assert!("exploiter".parse::<Role>().is_err());
        for r in Role::ALL {
            assert_eq!(r.to_string().parse::<Role>().unwrap(), r);
        }
    }

    #[test]
    fn remove_nodes_cases() {
        let k4 = complete(4);
        assert_eq!(k4.remove_nodes(&NodeSet::new()).unwrap(), k4);
        let k3 = k4.remove_nodes(&set(&["v2"])).unwrap();
        assert_eq!(k3.node_count(), 3);
        assert_eq!(k3.edge_count(), 3);
        assert_eq!(k4.node_count(), 4);
        assert!(k4.remove_nodes(&set(&["nope"])).is_err());
    }

    #[test]
    fn induced_subgraph_cases() {
        let tri = complete(3);
        assert_eq!(tri.induced_subgraph(&tri.node_set()).unwrap(), tri);
        assert_eq!(
            tri.induced_subgraph(&NodeSet::new()).unwrap().node_count(),
            0
        );
        let pair = tri.induced_subgraph(&set(&["v0", "v2"])).unwrap();
        assert_eq!(pair.edge_count(), 1);
        assert!(tri.induced_subgraph(&set(&["v9"])).is_err());
    }

    #[test]
    fn lcc_cases() {
        assert_eq!(path(3).largest_connected_component().len(), 3);
        let two = LabeledGraph::from_edges([
            ("d", "e"),
            ("e", "f"),
            ("d", "f"),
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
        ])
        .unwrap();
        assert_eq!(two.largest_connected_component(), set(&["a", "b", "c"]));
        let mut labels: Vec<String> = complete(5).labels().to_vec();
        labels.push("zz".into());
        let k5 = complete(5);
        let with_iso = LabeledGraph::from_parts(&labels, k5.edges()).unwrap();
        assert_eq!(with_iso.largest_connected_component(), k5.node_set());
        assert!(LabeledGraph::new().largest_connected_component().is_empty());
    }

    #[test]
    fn roles_follow_subgraphs() {
        let g = LabeledGraph::parse_edge_list("Ex1 P1\nP1 Rv1")
            .unwrap()
            .load_roles("Ex1,Exploiter\nP1,Participant")
            .unwrap();
        let h = g.remove_nodes(&set(&["Ex1"])).unwrap();
        assert_eq!(h.role("P1"), Some(Role::Participant));
        assert_eq!(h.roles().len(), 1);
        assert!(h.roles_csv().contains("P1,Participant"));
    }
}
