use std::fmt;

use crate::cfg::{Cfg, DomTree, LoopForest, LoopRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DagNode {
    /// A CFG block immediately contained in the loop.
    Block(usize),
    /// A directly nested loop, by index in the forest.
    Loop(usize),
    Next,
    Exit,
}

/// The acyclic view of one loop body: nested loops collapsed to hierarchical
/// nodes, back-edges redirected to `next` and exit-edges to `exit`.
///
/// Node order is blocks (CFG order), then hierarchical nodes, then `next`
/// and `exit`; predecessor lists follow the same order.
#[derive(Clone, Debug)]
pub struct Dag {
    nodes: Vec<DagNode>,
    labels: Vec<String>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
    start: usize,
    next: usize,
    exit: usize,
    /// For hierarchical nodes of this DAG, the loop they stand for.
    loop_of: Option<usize>,
}

impl Dag {
    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, n: usize) -> &str {
        &self.labels[n]
    }

    pub fn node_named(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn kind(&self, n: usize) -> DagNode {
        self.nodes[n]
    }

    pub fn succs(&self, n: usize) -> &[usize] {
        &self.succs[n]
    }

    pub fn preds(&self, n: usize) -> &[usize] {
        &self.preds[n]
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn next(&self) -> usize {
        self.next
    }

    pub fn exit(&self) -> usize {
        self.exit
    }

    /// The loop this DAG was built for (`None` for the whole program).
    pub fn loop_index(&self) -> Option<usize> {
        self.loop_of
    }

    /// Edges as label pairs, sorted.
    pub fn edge_labels(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = (0..self.len())
            .flat_map(|u| self.succs[u].iter().map(move |&v| (u, v)))
            .map(|(u, v)| (self.labels[u].clone(), self.labels[v].clone()))
            .collect();
        out.sort();
        out
    }

    pub(crate) fn dominators(&self) -> DomTree {
        DomTree::compute(self.start, &self.succs, &self.preds)
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edge_labels()
            .into_iter()
            .map(|(a, b)| format!("{a}->{b}"))
            .collect();
        write!(f, "start={} {}", self.labels[self.start], edges.join(" "))
    }
}

/// Maps block `b` to the DAG node standing for it inside loop `l`: the
/// block itself if `l` is its innermost loop, otherwise the outermost loop
/// nested in `l` that contains it.
fn representative(f: &LoopForest, l: Option<usize>, b: usize) -> Option<DagNode> {
    let mut cur = f.innermost(b);
    if cur == l {
        return Some(DagNode::Block(b));
    }
    while let Some(i) = cur {
        let parent = f.parent(i);
        if parent == l {
            return Some(DagNode::Loop(i));
        }
        cur = parent;
    }
    None
}

/// Builds the DAG of loop `l` (`LoopRef::Top` for the whole program).
///
/// # Panics
///
/// If `l` is `Bottom` or names no loop of `f`.
pub fn loop_to_dag(g: &Cfg, f: &LoopForest, l: &LoopRef) -> Dag {
    let li = match l {
        LoopRef::Top => None,
        LoopRef::Loop(h) => Some(f.index_of(h).unwrap_or_else(|| panic!("unknown loop {h}"))),
        LoopRef::Bottom => panic!("the bottom loop has no DAG"),
    };
    let in_scope = |b: usize| li.is_none_or(|i| f.loops()[i].contains(b));

    let mut nodes: Vec<DagNode> = (0..g.len())
        .filter(|&b| f.innermost(b) == li)
        .map(DagNode::Block)
        .collect();
    nodes.extend(f.children(li).into_iter().map(DagNode::Loop));
    nodes.push(DagNode::Next);
    nodes.push(DagNode::Exit);
    let pos = |k: DagNode| nodes.binary_search(&k).expect("node present");

    let header = li.map(|i| f.loops()[i].header);
    let mut edges = Vec::new();
    for &(u, v) in g.edges() {
        if !in_scope(u) {
            continue;
        }
        let ru = representative(f, li, u).expect("source in scope");
        let rv = if Some(v) == header {
            DagNode::Next
        } else if !in_scope(v) {
            DagNode::Exit
        } else {
            representative(f, li, v).expect("target in scope")
        };
        if ru != rv {
            edges.push((pos(ru), pos(rv)));
        }
    }
    if li.is_none() {
        let last = representative(f, None, g.exit()).expect("exit in scope");
        edges.push((pos(last), pos(DagNode::Exit)));
    }
    edges.sort_unstable();
    edges.dedup();

    let n = nodes.len();
    let mut succs = vec![Vec::new(); n];
    let mut preds = vec![Vec::new(); n];
    for &(u, v) in &edges {
        succs[u].push(v);
        preds[v].push(u);
    }
    for p in &mut preds {
        p.sort_unstable();
    }
    let start_block = header.unwrap_or(g.entry());
    let start = pos(representative(f, li, start_block).expect("start in scope"));
    let labels = nodes
        .iter()
        .map(|k| match *k {
            DagNode::Block(b) => g.id(b).to_string(),
            DagNode::Loop(i) => format!("L_{}", f.loops()[i].header_id),
            DagNode::Next => "next".to_string(),
            DagNode::Exit => "exit".to_string(),
        })
        .collect();
    Dag {
        start,
        next: pos(DagNode::Next),
        exit: pos(DagNode::Exit),
        nodes,
        labels,
        succs,
        preds,
        loop_of: li,
    }
}

/// Nodes every path from the start to `end` must traverse (excluding the
/// start itself), outermost first.
pub fn forced_passage(d: &Dag, end: usize) -> Vec<usize> {
    forced_between(&d.dominators(), d.start, end)
}

pub(crate) fn forced_between(dom: &DomTree, start: usize, end: usize) -> Vec<usize> {
    if !dom.dominates(start, end) {
        return Vec::new();
    }
    let mut chain = dom.chain_between(start, end);
    chain.reverse();
    chain
}
