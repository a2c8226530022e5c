//! Directed capacitated network graph and topology file ingestion.
//!
//! Two on-disk formats are accepted:
//!
//! * a line-oriented format: `node <id>` lines followed by
//!   `link <src> <dst> <capacity>` lines, `#` starting a comment;
//! * the SNDlib native-format subset (`NODES ( ... )` / `LINKS ( ... )`
//!   sections), where each undirected SNDlib link expands into two directed
//!   links sharing the pre-installed capacity.
//!
//! Node order is file order, so every downstream feature-vector layout is
//! reproducible from the file bytes alone.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("failed to read topology file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate link {src} -> {dst}")]
    DuplicateLink { src: String, dst: String },
    #[error("link endpoint `{0}` is not a declared node")]
    UnknownNode(String),
    #[error("self-loop link on node `{0}`")]
    SelfLoop(String),
    #[error("non-positive capacity {capacity} on link {src} -> {dst}")]
    NonPositiveCapacity { src: String, dst: String, capacity: f64 },
}

/// One directed link. `src`/`dst` are node indices into the owning
/// [`Topology`]; `active` models the on/off sleep state.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub src: usize,
    pub dst: usize,
    pub capacity: f64,
    pub active: bool,
}

/// Immutable directed capacitated graph. Node identifiers are strings; the
/// index map is a total bijection onto `0..node_count()` in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    links: Vec<Link>,
    link_index: HashMap<(usize, usize), usize>,
}

impl Topology {
    /// Builds a topology from node names and `(src, dst, capacity)` triples,
    /// validating all graph invariants. Every link starts active.
    pub fn new(
        nodes: Vec<String>,
        links: Vec<(String, String, f64)>,
    ) -> Result<Self, TopologyError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, name) in nodes.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(TopologyError::DuplicateNode(name.clone()));
            }
        }
        let mut topo = Topology {
            nodes,
            index,
            links: Vec::with_capacity(links.len()),
            link_index: HashMap::with_capacity(links.len()),
        };
        for (src, dst, capacity) in links {
            topo.push_link(&src, &dst, capacity)?;
        }
        Ok(topo)
    }

    fn push_link(&mut self, src: &str, dst: &str, capacity: f64) -> Result<(), TopologyError> {
        if src == dst {
            return Err(TopologyError::SelfLoop(src.to_string()));
        }
        let si = *self
            .index
            .get(src)
            .ok_or_else(|| TopologyError::UnknownNode(src.to_string()))?;
        let di = *self
            .index
            .get(dst)
            .ok_or_else(|| TopologyError::UnknownNode(dst.to_string()))?;
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(TopologyError::NonPositiveCapacity {
                src: src.to_string(),
                dst: dst.to_string(),
                capacity,
            });
        }
        if self.link_index.insert((si, di), self.links.len()).is_some() {
            return Err(TopologyError::DuplicateLink {
                src: src.to_string(),
                dst: dst.to_string(),
            });
        }
        self.links.push(Link {
            src: si,
            dst: di,
            capacity,
            active: true,
        });
        Ok(())
    }

    /// Loads a topology file, auto-detecting the simple line format vs. the
    /// SNDlib native format.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopologyError> {
        let content = fs::read_to_string(path)?;
        Self::parse(&content)
    }

    pub fn parse(content: &str) -> Result<Self, TopologyError> {
        if looks_like_sndlib(content) {
            parse_sndlib(content)
        } else {
            parse_simple(content)
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_between(&self, src: usize, dst: usize) -> Option<usize> {
        self.link_index.get(&(src, dst)).copied()
    }

    /// Copy containing only the active links; the node set is unchanged.
    pub fn active_subgraph(&self) -> Topology {
        let mut links = Vec::new();
        let mut link_index = HashMap::new();
        for link in self.links.iter().filter(|l| l.active) {
            link_index.insert((link.src, link.dst), links.len());
            links.push(link.clone());
        }
        Topology {
            nodes: self.nodes.clone(),
            index: self.index.clone(),
            links,
            link_index,
        }
    }

    /// Per-node outgoing `(neighbor, link index)` lists over active links,
    /// sorted by neighbor index for deterministic traversal.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (li, link) in self.links.iter().enumerate() {
            if link.active {
                adj[link.src].push((link.dst, li));
            }
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} nodes, {} directed links",
            self.nodes.len(),
            self.links.len()
        )
    }
}

fn looks_like_sndlib(content: &str) -> bool {
    content.lines().any(|l| {
        let t = l.trim_start();
        t.starts_with("NODES") && t.contains('(')
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn parse_simple(content: &str) -> Result<Topology, TopologyError> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let kind = tok.next().unwrap();
        let rest: Vec<&str> = tok.collect();
        match kind {
            "node" => {
                if rest.len() != 1 {
                    return Err(TopologyError::Parse {
                        line: lineno + 1,
                        msg: format!("expected `node <id>`, got `{line}`"),
                    });
                }
                nodes.push(rest[0].to_string());
            }
            "link" => {
                if rest.len() != 3 {
                    return Err(TopologyError::Parse {
                        line: lineno + 1,
                        msg: format!("expected `link <src> <dst> <capacity>`, got `{line}`"),
                    });
                }
                let capacity: f64 = rest[2].parse().map_err(|_| TopologyError::Parse {
                    line: lineno + 1,
                    msg: format!("bad capacity `{}`", rest[2]),
                })?;
                links.push((rest[0].to_string(), rest[1].to_string(), capacity));
            }
            other => {
                return Err(TopologyError::Parse {
                    line: lineno + 1,
                    msg: format!("unknown directive `{other}`"),
                });
            }
        }
    }
    Topology::new(nodes, links)
}

/// Section walker shared by the SNDlib topology and demand importers. Yields
/// `(line number, entry line)` pairs for the body of the named section.
pub(crate) fn sndlib_section<'a>(
    content: &'a str,
    name: &str,
) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let mut inside = false;
    for (lineno, raw) in content.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() || line.starts_with('?') {
            continue;
        }
        if !inside {
            if line.starts_with(name)
                && line[name.len()..].trim_start().starts_with('(')
            {
                inside = true;
            }
            continue;
        }
        if line == ")" {
            break;
        }
        out.push((lineno + 1, line));
    }
    out
}

fn parse_sndlib(content: &str) -> Result<Topology, TopologyError> {
    let mut nodes = Vec::new();
    for (_, entry) in sndlib_section(content, "NODES") {
        // `<id> ( <x> <y> )` — only the identifier matters here.
        let id = entry.split_whitespace().next().unwrap().to_string();
        nodes.push(id);
    }
    let mut links = Vec::new();
    for (lineno, entry) in sndlib_section(content, "LINKS") {
        let (src, dst, capacity) = parse_sndlib_link(entry).ok_or_else(|| {
            TopologyError::Parse {
                line: lineno,
                msg: format!("bad LINKS entry `{entry}`"),
            }
        })?;
        // Undirected SNDlib edge: one directed link each way, same capacity.
        links.push((src.clone(), dst.clone(), capacity));
        links.push((dst, src, capacity));
    }
    Topology::new(nodes, links)
}

/// `<id> ( <src> <dst> ) <preCap> <preCost> <routingCost> <setupCost> ( <modCap> <modCost> ... )`
///
/// Takes the pre-installed capacity; falls back to the first positive module
/// capacity when the pre-installed field is zero.
fn parse_sndlib_link(entry: &str) -> Option<(String, String, f64)> {
    let spaced = entry.replace('(', " ( ").replace(')', " ) ");
    let tok: Vec<&str> = spaced.split_whitespace().collect();
    let open = tok.iter().position(|t| *t == "(")?;
    let close = tok.iter().position(|t| *t == ")")?;
    if close != open + 3 {
        return None;
    }
    let src = tok[open + 1].to_string();
    let dst = tok[open + 2].to_string();
    let mut numbers = tok[close + 1..]
        .iter()
        .filter(|t| **t != "(" && **t != ")")
        .map(|t| t.parse::<f64>());
    let pre_cap = match numbers.next() {
        Some(Ok(v)) => v,
        _ => return None,
    };
    if pre_cap > 0.0 {
        return Some((src, dst, pre_cap));
    }
    // Module list: capacity/cost pairs; take the first positive capacity.
    let module_cap = tok[close + 1..]
        .iter()
        .skip_while(|t| **t != "(")
        .filter(|t| **t != "(" && **t != ")")
        .step_by(2)
        .filter_map(|t| t.parse::<f64>().ok())
        .find(|v| *v > 0.0)?;
    Some((src, dst, module_cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "\
# full triangle, both directions
node A
node B
node C
link A B 10
link B A 10
link B C 10
link C B 10
link A C 10
link C A 10
";

    #[test]
    fn parses_simple_file() {
        let t = Topology::parse("node A\nnode B\nnode C\nlink A B 10\nlink B A 10\n").unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.links().len(), 2);
        assert_eq!(t.node_names(), &["A", "B", "C"]);
        assert!(t.links().iter().all(|l| l.active));
    }

    #[test]
    fn node_order_is_file_order() {
        let t = Topology::parse("node Z\nnode A\nlink Z A 1\n").unwrap();
        assert_eq!(t.node_index("Z"), Some(0));
        assert_eq!(t.node_index("A"), Some(1));
    }

    #[test]
    fn rejects_self_loop() {
        let err = Topology::parse("node X\nlink X X 5\n").unwrap_err();
        assert!(matches!(err, TopologyError::SelfLoop(_)));
    }

    #[test]
    fn rejects_duplicate_link_and_bad_capacity() {
        let err = Topology::parse("node A\nnode B\nlink A B 1\nlink A B 2\n").unwrap_err();
        assert!(matches!(err, TopologyError::DuplicateLink { .. }));
        let err = Topology::parse("node A\nnode B\nlink A B 0\n").unwrap_err();
        assert!(matches!(err, TopologyError::NonPositiveCapacity { .. }));
        let err = Topology::parse("node A\nlink A B 1\n").unwrap_err();
        assert!(matches!(err, TopologyError::UnknownNode(_)));
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = Topology::parse("node A\nfrob A\n").unwrap_err();
        match err {
            TopologyError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_is_deterministic() {
        let a = Topology::parse(TRIANGLE).unwrap();
        let b = Topology::parse(TRIANGLE).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn active_subgraph_identity_and_filtering() {
        let t = Topology::parse(TRIANGLE).unwrap();
        assert_eq!(t.active_subgraph(), t);

        let mut off = t.clone();
        off.links[0].active = false;
        let sub = off.active_subgraph();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.links().len(), 5);

        for l in &mut off.links {
            l.active = false;
        }
        let empty = off.active_subgraph();
        assert_eq!(empty.node_count(), 3);
        assert!(empty.links().is_empty());
    }

    #[test]
    fn sndlib_links_expand_to_directed_pairs() {
        let content = "\
?SNDlib native format; type: network; version: 1.0
NODES (
  N1 ( 1.0 2.0 )
  N2 ( 3.0 4.0 )
  N3 ( 5.0 6.0 )
)
LINKS (
  L1 ( N1 N2 ) 40.0 0.0 1.0 0.0 ( 40.0 20.0 )
  L2 ( N2 N3 ) 0.0 0.0 1.0 0.0 ( 80.0 35.0 )
)
";
        let t = Topology::parse(content).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.links().len(), 4);
        let l1 = &t.links()[t.link_between(0, 1).unwrap()];
        assert_eq!(l1.capacity, 40.0);
        // Zero pre-installed capacity falls back to the first module.
        let l2 = &t.links()[t.link_between(1, 2).unwrap()];
        assert_eq!(l2.capacity, 80.0);
        assert!(t.link_between(2, 1).is_some());
    }

    #[test]
    fn abilene_shaped_file_yields_30_directed_links() {
        // Twelve nodes, fifteen undirected edges.
        let mut s = String::from("NODES (\n");
        for i in 0..12 {
            s.push_str(&format!("  n{i} ( 0.0 0.0 )\n"));
        }
        s.push_str(")\nLINKS (\n");
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 8),
            (8, 9),
            (9, 10),
            (10, 11),
            (11, 0),
            (0, 6),
            (2, 8),
            (4, 10),
        ];
        for (k, (a, b)) in edges.iter().enumerate() {
            s.push_str(&format!("  e{k} ( n{a} n{b} ) 10.0 0.0 1.0 0.0 ( )\n"));
        }
        s.push_str(")\n");
        let t = Topology::parse(&s).unwrap();
        assert_eq!(t.node_count(), 12);
        assert_eq!(t.links().len(), 30);
    }
}
