use std::collections::HashMap;

use super::dag::{forced_between, loop_to_dag, Dag, DagNode};
use super::RestructureError;
use crate::cfg::{Cfg, DomTree, LoopForest, LoopRef};
use crate::cft::{Cft, Node};

struct Builder<'a> {
    g: &'a Cfg,
    f: &'a LoopForest,
}

struct DagCtx<'d> {
    dag: &'d Dag,
    dom: DomTree,
}

impl Builder<'_> {
    /// Tree of all paths from `start` to `end`. `root` marks the top-level
    /// call of a DAG, the only one that emits `start` itself.
    fn paths(
        &self,
        cx: &DagCtx<'_>,
        start: usize,
        end: usize,
        root: bool,
    ) -> Result<Cft, RestructureError> {
        let forced = forced_between(&cx.dom, start, end);
        let mut ch: Vec<Cft> = Vec::new();
        // Walk from `end` back towards `start`, prepending.
        for (k, &c) in forced.iter().enumerate().rev() {
            if let Some(leaf) = self.leaf(cx.dag, c)? {
                ch.push(leaf);
            }
            let preds = cx.dag.preds(c);
            if preds.len() >= 2 {
                let ncd = if k == 0 { start } else { forced[k - 1] };
                let branches = preds
                    .iter()
                    .map(|&p| self.paths(cx, ncd, p, false))
                    .collect::<Result<Vec<_>, _>>()?;
                ch.push(Cft::alt(branches));
            }
        }
        if root && cx.dag.preds(start).is_empty() {
            if let Some(leaf) = self.leaf(cx.dag, start)? {
                ch.push(leaf);
            }
        }
        ch.reverse();
        Ok(Cft::seq(ch))
    }

    fn leaf(&self, dag: &Dag, n: usize) -> Result<Option<Cft>, RestructureError> {
        match dag.kind(n) {
            DagNode::Block(b) => {
                let blk = self.g.block(b);
                Ok(Some(Cft::block(&blk.id, blk.wcet.clone())))
            }
            DagNode::Loop(i) => self.loop_tree(i).map(Some),
            DagNode::Next | DagNode::Exit => Ok(None),
        }
    }

    fn loop_tree(&self, i: usize) -> Result<Cft, RestructureError> {
        let info = &self.f.loops()[i];
        let bound = info
            .bound
            .clone()
            .ok_or_else(|| RestructureError::MissingBound(info.header_id.clone()))?;
        let dag = loop_to_dag(self.g, self.f, &LoopRef::Loop(info.header_id.clone()));
        let cx = DagCtx {
            dom: dag.dominators(),
            dag: &dag,
        };
        let h = dag.start();
        let body = self.paths(&cx, h, dag.next(), true)?;
        let exit = self.paths(&cx, h, dag.exit(), true)?;
        Ok(Cft::looped(info.header_id.clone(), body, bound, exit))
    }
}

/// Tree of the paths of `d` from `start` to `end`, with nested loops
/// expanded. Leaves are labelled by block id and not yet deduplicated.
pub fn dag_to_cft(
    d: &Dag,
    start: usize,
    end: usize,
    g: &Cfg,
    f: &LoopForest,
) -> Result<Cft, RestructureError> {
    let b = Builder { g, f };
    let cx = DagCtx {
        dag: d,
        dom: d.dominators(),
    };
    b.paths(&cx, start, end, true)
}

/// Gives every duplicated leaf a unique `#k` label, in pre-order: the first
/// occurrence keeps the block id.
pub fn rename_duplicates(t: &mut Cft) {
    fn go(t: &mut Cft, seen: &mut HashMap<String, usize>) {
        match &mut t.node {
            Node::Leaf(l) => {
                let k = seen.entry(l.label.clone()).or_insert(0);
                if *k > 0 {
                    l.label = format!("{}#{}", l.label, k);
                }
                *k += 1;
            }
            Node::Alt { children } | Node::Seq { children } => {
                children.iter_mut().for_each(|c| go(c, seen))
            }
            Node::Loop { body, exit, .. } => {
                go(body, seen);
                go(exit, seen);
            }
        }
    }
    go(t, &mut HashMap::new());
}

/// The control-flow tree of a whole program. Loop bounds must be attached to
/// the forest.
pub fn build_cft(g: &Cfg, f: &LoopForest) -> Result<Cft, RestructureError> {
    let top = loop_to_dag(g, f, &LoopRef::Top);
    let mut t = dag_to_cft(&top, top.start(), top.exit(), g, f)?;
    rename_duplicates(&mut t);
    Ok(t)
}
