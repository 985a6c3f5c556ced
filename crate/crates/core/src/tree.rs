//! Hop layering and aggregation-tree construction.
//!
//! Both builders attach every node in layer `i` to a neighbor in layer
//! `i - 1`; they differ only in which upper neighbor is chosen. The
//! sleep-delay tree picks the neighbor with the smallest minimal sleep delay
//! from the child; the shortest-path tree ignores duty cycles and picks the
//! smallest id.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{invalid, parse_err, Result};
use crate::model::{min_sleep_delay, Network, NodeId};

/// BFS hop distances from the sink, grouped into layers `L_0 .. L_R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layering {
    layer_of: Vec<usize>,
    layers: Vec<Vec<NodeId>>,
}

impl Layering {
    pub fn layer_of(&self, u: NodeId) -> usize {
        self.layer_of[u.index()]
    }

    /// Layers in order; each is sorted by id.
    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    /// Index `R` of the deepest layer.
    pub fn max_layer(&self) -> usize {
        self.layers.len() - 1
    }
}

pub fn compute_layers(net: &Network) -> Layering {
    let n = net.node_count();
    let mut layer_of = vec![usize::MAX; n];
    layer_of[0] = 0;
    let mut queue = VecDeque::from([NodeId::SINK]);
    while let Some(u) = queue.pop_front() {
        for &v in net.neighbors(u) {
            if layer_of[v.index()] == usize::MAX {
                layer_of[v.index()] = layer_of[u.index()] + 1;
                queue.push_back(v);
            }
        }
    }
    debug_assert!(layer_of.iter().all(|&l| l != usize::MAX), "network must be connected");
    let depth = layer_of.iter().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth + 1];
    for (u, &l) in layer_of.iter().enumerate() {
        layers[l].push(NodeId::from(u));
    }
    Layering { layer_of, layers }
}

/// Spanning tree rooted at the sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationTree {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl AggregationTree {
    /// Builds a tree from a parent map (`None` only for the sink). Checks
    /// that the map is a spanning tree rooted at node 0; it does not check
    /// that edges belong to any particular network.
    pub fn from_parents(parent: Vec<Option<NodeId>>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(invalid("empty tree"));
        }
        if parent[0].is_some() {
            return Err(invalid("the sink cannot have a parent"));
        }
        let mut children = vec![Vec::new(); n];
        for (u, p) in parent.iter().enumerate().skip(1) {
            let p = p.ok_or_else(|| invalid(format!("node {u} has no parent")))?;
            if p.index() >= n {
                return Err(invalid(format!("parent of {u} is out of range")));
            }
            children[p.index()].push(NodeId::from(u));
        }
        // Every node must reach the sink.
        let mut reached = vec![false; n];
        reached[0] = true;
        let mut stack = vec![NodeId::SINK];
        while let Some(u) = stack.pop() {
            for &c in &children[u.index()] {
                reached[c.index()] = true;
                stack.push(c);
            }
        }
        if let Some(u) = reached.iter().position(|r| !r) {
            return Err(invalid(format!("node {u} is on a cycle or detached from the sink")));
        }
        Ok(AggregationTree { parent, children })
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId::SINK
    }

    pub fn parent(&self, u: NodeId) -> Option<NodeId> {
        self.parent[u.index()]
    }

    /// Children of `u`, sorted by id.
    pub fn children(&self, u: NodeId) -> &[NodeId] {
        &self.children[u.index()]
    }

    /// Hops from `u` to the root.
    pub fn depth(&self, mut u: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(u) {
            u = p;
            d += 1;
        }
        d
    }

    pub fn height(&self) -> usize {
        (0..self.node_count()).map(|u| self.depth(NodeId::from(u))).max().unwrap_or(0)
    }
}

fn build_layered(net: &Network, lay: &Layering, mut pick: impl FnMut(NodeId, &[NodeId]) -> NodeId) -> AggregationTree {
    let n = net.node_count();
    let mut parent = vec![None; n];
    for (i, layer) in lay.layers().iter().enumerate().skip(1) {
        for &u in layer {
            let upper: Vec<NodeId> = net
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&v| lay.layer_of(v) == i - 1)
                .collect();
            parent[u.index()] = Some(pick(u, &upper));
        }
    }
    AggregationTree::from_parents(parent).expect("layered parent choice always spans")
}

/// Sleep-delay driven tree: layer by layer from `L_1`, each node (ascending
/// id) adopts the upper-layer neighbor with the smallest minimal sleep delay
/// from itself; ties go to the smallest id.
pub fn build_ddas_tree(net: &Network, lay: &Layering) -> AggregationTree {
    let period = net.params().period_length;
    build_layered(net, lay, |u, upper| {
        // `upper` is sorted, so min_by_key keeps the smallest id on ties.
        *upper
            .iter()
            .min_by_key(|&&v| {
                min_sleep_delay(net.duty_cycle(u), net.duty_cycle(v), period)
                    .expect("network duty cycles are valid")
            })
            .expect("every non-sink node has an upper-layer neighbor")
    })
}

/// Unit-weight shortest-path tree: each node adopts its smallest-id
/// neighbor in the layer above.
pub fn build_spt_tree(net: &Network, lay: &Layering) -> AggregationTree {
    build_layered(net, lay, |_, upper| upper[0])
}

/// Checks every structural tree invariant against a network and layering.
/// Returns human-readable problems; empty means valid.
pub fn tree_problems(net: &Network, lay: &Layering, tree: &AggregationTree) -> Vec<String> {
    let mut out = Vec::new();
    if tree.node_count() != net.node_count() {
        out.push(format!("tree has {} nodes, network {}", tree.node_count(), net.node_count()));
        return out;
    }
    let mut edges = 0;
    for u in net.nodes().skip(1) {
        let Some(p) = tree.parent(u) else {
            out.push(format!("node {u} has no parent"));
            continue;
        };
        edges += 1;
        if !net.are_adjacent(u, p) {
            out.push(format!("tree edge {u}-{p} is not a network edge"));
        }
        if lay.layer_of(p) + 1 != lay.layer_of(u) {
            out.push(format!(
                "edge {u}-{p} joins layers {} and {}",
                lay.layer_of(u),
                lay.layer_of(p)
            ));
        }
        if tree.depth(u) != lay.layer_of(u) {
            out.push(format!("node {u} has depth {} but layer {}", tree.depth(u), lay.layer_of(u)));
        }
    }
    if edges != net.node_count() - 1 {
        out.push(format!("tree has {edges} edges, expected {}", net.node_count() - 1));
    }
    out
}

/// One line per non-sink node: `u parent(u) layer(u)`.
pub fn write_tree(tree: &AggregationTree, lay: &Layering) -> String {
    let mut out = String::new();
    for u in (1..tree.node_count()).map(NodeId::from) {
        let p = tree.parent(u).expect("non-sink node has a parent");
        let _ = writeln!(out, "{u} {p} {}", lay.layer_of(u));
    }
    out
}

/// Parses a tree dump for a network of `node_count` nodes. The layer column
/// is checked against the depth implied by the parent pointers.
pub fn parse_tree(text: &str, node_count: usize) -> Result<AggregationTree> {
    let mut parent: Vec<Option<NodeId>> = vec![None; node_count];
    let mut layer_col = vec![None; node_count];
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(ln, "expected `u parent layer`"));
        }
        let nums = toks
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, format!("bad integer {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let (u, p, l) = (nums[0], nums[1], nums[2]);
        if u == 0 || u >= node_count || p >= node_count {
            return Err(parse_err(ln, format!("node ids {u} {p} out of range")));
        }
        if parent[u].replace(NodeId::from(p)).is_some() {
            return Err(parse_err(ln, format!("node {u} listed twice")));
        }
        layer_col[u] = Some(l);
    }
    let tree = AggregationTree::from_parents(parent).map_err(|e| parse_err(0, e.to_string()))?;
    for (u, l) in layer_col.iter().enumerate().skip(1) {
        let depth = tree.depth(NodeId::from(u));
        if *l != Some(depth) {
            return Err(parse_err(0, format!("node {u}: layer column {l:?} but depth {depth}")));
        }
    }
    Ok(tree)
}
