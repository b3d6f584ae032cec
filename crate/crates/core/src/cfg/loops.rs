//! Loop detection and the loop nesting lattice.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::dom::DomTree;
use super::{is_block_id, Cfg, CfgError, Param, BOTTOM_NAME, TOP_NAME};

/// An element of the loop lattice: a real loop (named by its header block)
/// or one of the synthetic bounds.
///
/// `Top` is the fictive loop whose body is the whole program; `Bottom` the
/// fictive empty loop.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LoopRef {
    Top,
    Bottom,
    Loop(String),
}

impl LoopRef {
    pub fn header(name: impl Into<String>) -> Self {
        LoopRef::Loop(name.into())
    }
}

impl fmt::Display for LoopRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopRef::Top => f.write_str(TOP_NAME),
            LoopRef::Bottom => f.write_str(BOTTOM_NAME),
            LoopRef::Loop(h) => f.write_str(h),
        }
    }
}

impl FromStr for LoopRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            TOP_NAME => Ok(LoopRef::Top),
            BOTTOM_NAME => Ok(LoopRef::Bottom),
            h if is_block_id(h) => Ok(LoopRef::Loop(h.to_string())),
            other => Err(format!("invalid loop reference `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopInfo {
    pub header: usize,
    pub header_id: String,
    pub back_edges: Vec<(usize, usize)>,
    pub entry_edges: Vec<(usize, usize)>,
    pub exit_edges: Vec<(usize, usize)>,
    /// Sorted block indices.
    pub body: Vec<usize>,
    pub bound: Option<Param>,
}

impl LoopInfo {
    pub fn contains(&self, b: usize) -> bool {
        self.body.binary_search(&b).is_ok()
    }
}

/// The loops of a CFG together with their containment tree.
///
/// Bodies of loops in a reducible graph are either disjoint or nested, so
/// containment is a forest under `Top`; `Bottom` sits below everything.
#[derive(Clone, Debug, Default)]
pub struct LoopForest {
    loops: Vec<LoopInfo>,
    by_header: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    /// innermost loop of each CFG block (empty for synthetic forests)
    innermost: Vec<Option<usize>>,
}

/// Finds all natural loops, rejecting irreducible control flow.
pub fn build_loop_forest(g: &Cfg) -> Result<LoopForest, CfgError> {
    let n = g.len();
    let dom = DomTree::compute(g.entry(), g.successor_lists(), g.predecessor_lists());
    check_reducible(g, &dom)?;

    let mut loops: Vec<LoopInfo> = Vec::new();
    for h in 0..n {
        let (back, entry): (Vec<usize>, Vec<usize>) =
            g.preds(h).iter().partition(|&&p| dom.dominates(h, p));
        if back.is_empty() {
            continue;
        }
        let body = natural_loop(g, h, &back);
        let mut exit_edges = Vec::new();
        for &b in &body {
            for &s in g.succs(b) {
                if body.binary_search(&s).is_err() {
                    exit_edges.push((b, s));
                }
            }
        }
        loops.push(LoopInfo {
            header: h,
            header_id: g.id(h).to_string(),
            back_edges: back.iter().map(|&s| (s, h)).collect(),
            entry_edges: entry.iter().map(|&p| (p, h)).collect(),
            exit_edges,
            body,
            bound: None,
        });
    }

    let parent: Vec<Option<usize>> = (0..loops.len())
        .map(|i| {
            (0..loops.len())
                .filter(|&j| j != i && loops[j].contains(loops[i].header))
                .min_by_key(|&j| loops[j].body.len())
        })
        .collect();
    let mut innermost: Vec<Option<usize>> = vec![None; n];
    for (i, l) in loops.iter().enumerate() {
        for &b in &l.body {
            let better = match innermost[b] {
                None => true,
                Some(j) => loops[j].body.len() > l.body.len(),
            };
            if better {
                innermost[b] = Some(i);
            }
        }
    }
    Ok(LoopForest::assemble(loops, parent, innermost))
}

fn check_reducible(g: &Cfg, dom: &DomTree) -> Result<(), CfgError> {
    // The graph without back-edges must be acyclic.
    let n = g.len();
    let mut indeg = vec![0usize; n];
    for &(u, v) in g.edges() {
        if !dom.dominates(v, u) {
            indeg[v] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&b| indeg[b] == 0).collect();
    let mut done = 0;
    while let Some(u) = stack.pop() {
        done += 1;
        for &v in g.succs(u) {
            if !dom.dominates(v, u) {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
    }
    if done == n {
        return Ok(());
    }
    // Peel blocks that only lead out of the remaining forward cycle.
    let mut left: Vec<bool> = indeg.iter().map(|&d| d > 0).collect();
    let forward_out =
        |u: usize, left: &[bool]| g.succs(u).iter().any(|&v| left[v] && !dom.dominates(v, u));
    let mut changed = true;
    while changed {
        changed = false;
        for u in 0..n {
            if left[u] && !forward_out(u, &left) {
                left[u] = false;
                changed = true;
            }
        }
    }
    Err(CfgError::IrreducibleLoop(
        (0..n)
            .filter(|&b| left[b])
            .map(|b| g.id(b).to_string())
            .collect(),
    ))
}

fn natural_loop(g: &Cfg, h: usize, back_sources: &[usize]) -> Vec<usize> {
    let mut in_body = vec![false; g.len()];
    in_body[h] = true;
    let mut stack = Vec::new();
    for &s in back_sources {
        if !in_body[s] {
            in_body[s] = true;
            stack.push(s);
        }
    }
    while let Some(b) = stack.pop() {
        for &p in g.preds(b) {
            if !in_body[p] {
                in_body[p] = true;
                stack.push(p);
            }
        }
    }
    (0..g.len()).filter(|&b| in_body[b]).collect()
}

impl LoopForest {
    fn assemble(
        loops: Vec<LoopInfo>,
        parent: Vec<Option<usize>>,
        innermost: Vec<Option<usize>>,
    ) -> Self {
        let by_header = loops
            .iter()
            .enumerate()
            .map(|(i, l)| (l.header_id.clone(), i))
            .collect();
        let mut depth = vec![usize::MAX; loops.len()];
        fn depth_of(i: usize, parent: &[Option<usize>], depth: &mut [usize]) -> usize {
            if depth[i] == usize::MAX {
                depth[i] = match parent[i] {
                    None => 1,
                    Some(p) => depth_of(p, parent, depth) + 1,
                };
            }
            depth[i]
        }
        for i in 0..loops.len() {
            depth_of(i, &parent, &mut depth);
        }
        LoopForest {
            loops,
            by_header,
            parent,
            depth,
            innermost,
        }
    }

    /// A forest carrying only nesting: `(header, enclosing header)` pairs.
    ///
    /// Used where loops are referenced by name without a CFG, e.g. formulas
    /// read from text.
    pub fn from_nesting(pairs: &[(&str, Option<&str>)]) -> Self {
        let loops: Vec<LoopInfo> = pairs
            .iter()
            .map(|(h, _)| LoopInfo {
                header: usize::MAX,
                header_id: h.to_string(),
                back_edges: vec![],
                entry_edges: vec![],
                exit_edges: vec![],
                body: vec![],
                bound: None,
            })
            .collect();
        let pos: HashMap<&str, usize> = pairs
            .iter()
            .enumerate()
            .map(|(i, (h, _))| (*h, i))
            .collect();
        let parent = pairs.iter().map(|(_, p)| p.map(|p| pos[p])).collect();
        LoopForest::assemble(loops, parent, vec![])
    }

    /// Attaches iteration bounds keyed by header id. Unknown headers are
    /// reported back to the caller.
    pub fn set_bounds(&mut self, bounds: &BTreeMap<String, Param>) -> Result<(), String> {
        for (h, bound) in bounds {
            let i = *self.by_header.get(h).ok_or_else(|| h.clone())?;
            self.loops[i].bound = Some(bound.clone());
        }
        Ok(())
    }

    pub fn loops(&self) -> &[LoopInfo] {
        &self.loops
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn get(&self, header: &str) -> Option<&LoopInfo> {
        self.by_header.get(header).map(|&i| &self.loops[i])
    }

    pub fn index_of(&self, header: &str) -> Option<usize> {
        self.by_header.get(header).copied()
    }

    pub fn contains_ref(&self, l: &LoopRef) -> bool {
        match l {
            LoopRef::Loop(h) => self.by_header.contains_key(h),
            _ => true,
        }
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// The parent of a loop as a lattice element (`Top` for outermost loops).
    pub fn parent_ref(&self, l: &LoopRef) -> Option<LoopRef> {
        match l {
            LoopRef::Loop(h) => {
                let i = self.index_of(h)?;
                Some(self.parent[i].map_or(LoopRef::Top, |p| {
                    LoopRef::Loop(self.loops[p].header_id.clone())
                }))
            }
            _ => None,
        }
    }

    /// Innermost loop containing block `b`, if any.
    pub fn innermost(&self, b: usize) -> Option<usize> {
        self.innermost.get(b).copied().flatten()
    }

    /// Loops whose parent is `l` (`None` means `Top`).
    pub fn children(&self, l: Option<usize>) -> Vec<usize> {
        (0..self.loops.len())
            .filter(|&i| self.parent[i] == l)
            .collect()
    }

    fn is_ancestor_or_self(&self, outer: usize, mut inner: usize) -> bool {
        while self.depth[inner] > self.depth[outer] {
            inner = self.parent[inner].expect("depth > 1 implies a parent");
        }
        inner == outer
    }

    fn resolve(&self, l: &LoopRef) -> Option<usize> {
        match l {
            LoopRef::Loop(h) => self.by_header.get(h).copied(),
            _ => None,
        }
    }

    /// `inner ⊑ outer`. Unknown loop names compare only with themselves.
    pub fn is_nested_in(&self, inner: &LoopRef, outer: &LoopRef) -> bool {
        match (inner, outer) {
            (_, LoopRef::Top) | (LoopRef::Bottom, _) => true,
            (LoopRef::Top, _) | (_, LoopRef::Bottom) => false,
            (a, b) if a == b => true,
            (a, b) => match (self.resolve(a), self.resolve(b)) {
                (Some(i), Some(o)) => self.is_ancestor_or_self(o, i),
                _ => false,
            },
        }
    }

    /// Greatest lower bound.
    pub fn meet(&self, a: &LoopRef, b: &LoopRef) -> LoopRef {
        if self.is_nested_in(a, b) {
            a.clone()
        } else if self.is_nested_in(b, a) {
            b.clone()
        } else {
            LoopRef::Bottom
        }
    }

    /// Least upper bound.
    pub fn join(&self, a: &LoopRef, b: &LoopRef) -> LoopRef {
        if self.is_nested_in(a, b) {
            return b.clone();
        }
        if self.is_nested_in(b, a) {
            return a.clone();
        }
        let (Some(mut i), Some(j)) = (self.resolve(a), self.resolve(b)) else {
            return LoopRef::Top;
        };
        loop {
            if self.is_ancestor_or_self(i, j) {
                return LoopRef::Loop(self.loops[i].header_id.clone());
            }
            match self.parent[i] {
                Some(p) => i = p,
                None => return LoopRef::Top,
            }
        }
    }

    /// All lattice elements: `Top`, `Bottom` and every loop.
    pub fn elements(&self) -> Vec<LoopRef> {
        let mut v = vec![LoopRef::Top, LoopRef::Bottom];
        v.extend(
            self.loops
                .iter()
                .map(|l| LoopRef::Loop(l.header_id.clone())),
        );
        v
    }
}

/// `a ⊓ b` over a forest.
pub fn loop_meet(a: &LoopRef, b: &LoopRef, f: &LoopForest) -> LoopRef {
    f.meet(a, b)
}
