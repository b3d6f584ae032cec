//! Control-flow graphs, dominance and loop structure.

mod document;
mod dom;
mod loops;

pub use document::{
    parse_program, serialize_program, AnnotationDoc, AnnotationSpec, BlockDoc, DocumentError,
    Program, ProgramDoc, SplitDoc, SplitSpec, VariantAnnotationDoc, VariantDoc, VariantSpec,
};
pub use dom::{dominators, DomTree};
pub use loops::{build_loop_forest, loop_meet, LoopForest, LoopInfo, LoopRef};

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A quantity that is either known (a literal) or a named parameter.
///
/// Used for block WCETs, loop bounds and annotation maxima.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Lit(u64),
    Sym(String),
}

impl Param {
    pub fn literal(&self) -> Option<u64> {
        match self {
            Param::Lit(v) => Some(*v),
            Param::Sym(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Param::Sym(_))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Lit(v) => write!(f, "{v}"),
            Param::Sym(s) => f.write_str(s),
        }
    }
}

impl From<u64> for Param {
    fn from(v: u64) -> Self {
        Param::Lit(v)
    }
}

impl From<&str> for Param {
    fn from(s: &str) -> Self {
        Param::Sym(s.to_string())
    }
}

/// Names reserved for the synthetic loops.
pub const TOP_NAME: &str = "TOP";
pub const BOTTOM_NAME: &str = "BOT";

/// Block ids: `[A-Za-z0-9_.-]+`, not a reserved loop name. `#` is reserved
/// for the suffix given to duplicated leaves.
pub fn is_block_id(s: &str) -> bool {
    !s.is_empty()
        && s != TOP_NAME
        && s != BOTTOM_NAME
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

/// Parameter identifiers: a letter or `_` followed by `[A-Za-z0-9_.]`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    s != TOP_NAME
        && s != BOTTOM_NAME
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.'))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub id: String,
    pub wcet: Param,
}

impl Block {
    pub fn new(id: impl Into<String>, wcet: impl Into<Param>) -> Self {
        Block {
            id: id.into(),
            wcet: wcet.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfgError {
    #[error("no entry node")]
    NoEntry,
    #[error("invalid block id `{0}`")]
    InvalidBlockId(String),
    #[error("duplicate block id `{0}`")]
    DuplicateBlock(String),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("multiple entry nodes: {}", .0.join(", "))]
    MultipleEntries(Vec<String>),
    #[error("multiple exit nodes: {}", .0.join(", "))]
    MultipleExits(Vec<String>),
    #[error("block `{0}` is unreachable from the entry")]
    Unreachable(String),
    #[error("exit is unreachable from block `{0}`")]
    NoPathToExit(String),
    #[error("irreducible loop through {}", .0.join(", "))]
    IrreducibleLoop(Vec<String>),
}

/// A validated control-flow graph with a single entry and a single exit.
///
/// The entry block is the designated start of execution; it has no incoming
/// edges other than back-edges of a loop it heads. Every other block has at
/// least one predecessor, the exit is the only block without successors,
/// every block is reachable from the entry and reaches the exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    blocks: Vec<Block>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
    entry: usize,
    exit: usize,
}

impl Cfg {
    pub fn new<S: AsRef<str>>(
        blocks: Vec<Block>,
        edges: &[(S, S)],
        entry: &str,
        exit: &str,
    ) -> Result<Self, CfgError> {
        if blocks.is_empty() {
            return Err(CfgError::NoEntry);
        }
        let mut index = HashMap::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if !is_block_id(&b.id) {
                return Err(CfgError::InvalidBlockId(b.id.clone()));
            }
            if index.insert(b.id.clone(), i).is_some() {
                return Err(CfgError::DuplicateBlock(b.id.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| CfgError::UnknownBlock(s.to_string()))
        };
        let entry = lookup(entry)?;
        let exit = lookup(exit)?;

        let n = blocks.len();
        let mut succs = vec![Vec::new(); n];
        let mut preds = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        let mut edge_list = Vec::with_capacity(edges.len());
        for (from, to) in edges {
            let (u, v) = (lookup(from.as_ref())?, lookup(to.as_ref())?);
            if !seen.insert((u, v)) {
                return Err(CfgError::DuplicateEdge(
                    blocks[u].id.clone(),
                    blocks[v].id.clone(),
                ));
            }
            succs[u].push(v);
            preds[v].push(u);
            edge_list.push((u, v));
        }

        let extra_entries: Vec<String> = (0..n)
            .filter(|&b| b != entry && preds[b].is_empty())
            .map(|b| blocks[b].id.clone())
            .collect();
        if !extra_entries.is_empty() {
            let mut all = vec![blocks[entry].id.clone()];
            all.extend(extra_entries);
            return Err(CfgError::MultipleEntries(all));
        }
        let exits: Vec<String> = (0..n)
            .filter(|&b| succs[b].is_empty())
            .map(|b| blocks[b].id.clone())
            .collect();
        if exits.len() != 1 || !succs[exit].is_empty() {
            return Err(CfgError::MultipleExits(exits));
        }

        let forward = reach(n, entry, &succs);
        if let Some(b) = (0..n).find(|&b| !forward[b]) {
            return Err(CfgError::Unreachable(blocks[b].id.clone()));
        }
        let backward = reach(n, exit, &preds);
        if let Some(b) = (0..n).find(|&b| !backward[b]) {
            return Err(CfgError::NoPathToExit(blocks[b].id.clone()));
        }

        Ok(Cfg {
            blocks,
            index,
            edges: edge_list,
            succs,
            preds,
            entry,
            exit,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &Block {
        &self.blocks[b]
    }

    pub fn id(&self, b: usize) -> &str {
        &self.blocks[b].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges in document order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn succs(&self, b: usize) -> &[usize] {
        &self.succs[b]
    }

    pub fn preds(&self, b: usize) -> &[usize] {
        &self.preds[b]
    }

    pub fn successor_lists(&self) -> &[Vec<usize>] {
        &self.succs
    }

    pub fn predecessor_lists(&self) -> &[Vec<usize>] {
        &self.preds
    }

    pub fn entry(&self) -> usize {
        self.entry
    }

    pub fn exit(&self) -> usize {
        self.exit
    }
}

pub(crate) fn reach(n: usize, from: usize, adj: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Cfg {
        Cfg::new(
            vec![Block::new("a", 1), Block::new("b", 2), Block::new("c", 3)],
            &[("a", "b"), ("b", "c")],
            "a",
            "c",
        )
        .unwrap()
    }

    #[test]
    fn empty_graph_has_no_entry() {
        let err = Cfg::new(vec![], &[] as &[(&str, &str)], "a", "a").unwrap_err();
        assert_eq!(err, CfgError::NoEntry);
        assert_eq!(err.to_string(), "no entry node");
    }

    #[test]
    fn builds_chain() {
        let g = chain();
        assert_eq!(g.len(), 3);
        assert_eq!(g.succs(0), &[1]);
        assert_eq!(g.preds(2), &[1]);
        assert_eq!(g.id(g.exit()), "c");
    }

    #[test]
    fn rejects_bad_inputs() {
        let blocks = || vec![Block::new("a", 1), Block::new("b", 2), Block::new("c", 3)];
        assert_eq!(
            Cfg::new(blocks(), &[("a", "x")], "a", "c").unwrap_err(),
            CfgError::UnknownBlock("x".into())
        );
        assert_eq!(
            Cfg::new(
                vec![Block::new("a", 1), Block::new("a", 2)],
                &[("a", "a")],
                "a",
                "a"
            )
            .unwrap_err(),
            CfgError::DuplicateBlock("a".into())
        );
        assert!(matches!(
            Cfg::new(blocks(), &[("a", "c"), ("b", "c")], "a", "c").unwrap_err(),
            CfgError::MultipleEntries(_)
        ));
        assert!(matches!(
            Cfg::new(blocks(), &[("a", "b"), ("a", "c")], "a", "c").unwrap_err(),
            CfgError::MultipleExits(_)
        ));
        assert!(matches!(
            Cfg::new(blocks(), &[("a", "b"), ("a", "b"), ("b", "c")], "a", "c").unwrap_err(),
            CfgError::DuplicateEdge(..)
        ));
        assert!(matches!(
            Cfg::new(
                vec![Block::new("TOP", 1)],
                &[] as &[(&str, &str)],
                "TOP",
                "TOP"
            )
            .unwrap_err(),
            CfgError::InvalidBlockId(_)
        ));
    }

    #[test]
    fn exit_must_be_reachable() {
        // b <-> c cycle never reaches d
        let err = Cfg::new(
            vec![
                Block::new("a", 1),
                Block::new("b", 1),
                Block::new("c", 1),
                Block::new("d", 1),
            ],
            &[("a", "b"), ("b", "c"), ("c", "b"), ("a", "d")],
            "a",
            "d",
        )
        .unwrap_err();
        assert!(matches!(err, CfgError::NoPathToExit(_)));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("x_b1"));
        assert!(is_identifier("n1"));
        assert!(!is_identifier("1n"));
        assert!(!is_identifier("TOP"));
        assert!(is_block_id("b-1.x"));
        assert!(!is_block_id("b#1"));
    }
}
