//! Dominator trees by iterative fixpoint over reverse postorder.

use std::collections::HashMap;

use super::Cfg;

/// Immediate-dominator tree of a rooted graph given by adjacency lists.
#[derive(Clone, Debug)]
pub struct DomTree {
    root: usize,
    idom: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl DomTree {
    /// Nodes unreachable from `root` get no dominator and never dominate.
    pub fn compute(root: usize, succs: &[Vec<usize>], preds: &[Vec<usize>]) -> Self {
        let n = succs.len();
        let order = reverse_postorder(root, succs);
        let mut rpo_index = vec![usize::MAX; n];
        for (i, &b) in order.iter().enumerate() {
            rpo_index[b] = i;
        }

        let mut idom: Vec<Option<usize>> = vec![None; n];
        idom[root] = Some(root);
        let mut changed = true;
        while changed {
            changed = false;
            for &b in order.iter().skip(1) {
                let mut new_idom: Option<usize> = None;
                for &p in &preds[b] {
                    if idom[p].is_none() {
                        continue;
                    }
                    new_idom = Some(match new_idom {
                        None => p,
                        Some(cur) => intersect(&idom, &rpo_index, p, cur),
                    });
                }
                if new_idom.is_some() && idom[b] != new_idom {
                    idom[b] = new_idom;
                    changed = true;
                }
            }
        }
        idom[root] = None;

        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        for &b in order.iter().skip(1) {
            if let Some(d) = idom[b] {
                depth[b] = depth[d] + 1;
            }
        }
        DomTree { root, idom, depth }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn idom(&self, b: usize) -> Option<usize> {
        self.idom[b]
    }

    pub fn is_reachable(&self, b: usize) -> bool {
        self.depth[b] != usize::MAX
    }

    /// Reflexive dominance: `a` dominates `b`.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        if !self.is_reachable(a) || !self.is_reachable(b) {
            return false;
        }
        let mut cur = b;
        while self.depth[cur] > self.depth[a] {
            cur = match self.idom[cur] {
                Some(d) => d,
                None => return false,
            };
        }
        cur == a
    }

    /// Dominators of `b` strictly below `a`, innermost (closest to `b`) first,
    /// `b` included. Requires `a` to dominate `b`.
    pub fn chain_between(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = b;
        while cur != a {
            out.push(cur);
            cur = self.idom[cur].expect("chain_between: start does not dominate end");
        }
        out
    }
}

fn intersect(idom: &[Option<usize>], rpo: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while rpo[a] > rpo[b] {
            a = idom[a].expect("processed node has a dominator");
        }
        while rpo[b] > rpo[a] {
            b = idom[b].expect("processed node has a dominator");
        }
    }
    a
}

pub(crate) fn reverse_postorder(root: usize, succs: &[Vec<usize>]) -> Vec<usize> {
    let n = succs.len();
    let mut visited = vec![false; n];
    let mut post = Vec::with_capacity(n);
    // explicit stack of (node, next successor index)
    let mut stack = vec![(root, 0usize)];
    visited[root] = true;
    while let Some(top) = stack.last_mut() {
        let (u, i) = *top;
        if i < succs[u].len() {
            top.1 += 1;
            let v = succs[u][i];
            if !visited[v] {
                visited[v] = true;
                stack.push((v, 0));
            }
        } else {
            post.push(u);
            stack.pop();
        }
    }
    post.reverse();
    post
}

/// Immediate dominators of a CFG, keyed by block id; the entry maps to `None`.
pub fn dominators(g: &Cfg) -> HashMap<String, Option<String>> {
    let tree = DomTree::compute(g.entry(), g.successor_lists(), g.predecessor_lists());
    (0..g.len())
        .map(|b| {
            (
                g.id(b).to_string(),
                tree.idom(b).map(|d| g.id(d).to_string()),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::Block;

    #[test]
    fn chain_idoms() {
        let g = Cfg::new(
            vec![Block::new("a", 0), Block::new("b", 0), Block::new("c", 0)],
            &[("a", "b"), ("b", "c")],
            "a",
            "c",
        )
        .unwrap();
        let d = dominators(&g);
        assert_eq!(d["a"], None);
        assert_eq!(d["b"].as_deref(), Some("a"));
        assert_eq!(d["c"].as_deref(), Some("b"));
    }

    #[test]
    fn diamond() {
        // 0 -> 1, 0 -> 2, 1 -> 3, 2 -> 3
        let succs = vec![vec![1, 2], vec![3], vec![3], vec![]];
        let preds = vec![vec![], vec![0], vec![0], vec![1, 2]];
        let t = DomTree::compute(0, &succs, &preds);
        assert_eq!(t.idom(3), Some(0));
        assert!(t.dominates(0, 3));
        assert!(!t.dominates(1, 3));
        assert!(t.dominates(3, 3));
        assert_eq!(t.chain_between(0, 3), vec![3]);
    }
}
