//! Exhaustive path semantics of trees and graphs.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::{Budget, OracleError};
use crate::cfg::{Cfg, LoopForest, LoopRef, Param};
use crate::cft::{Cft, Node};

/// An execution path as a sequence of leaf labels or block ids.
pub type Path = Vec<String>;

/// A path over interned labels.
pub(crate) type Ids = Vec<u32>;

/// How many iterations a loop node admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Iterations {
    /// Exactly the bound, as in the tree semantics.
    Exact,
    /// Anything from zero up to the bound, as in a bounded CFG.
    AtMost,
}

fn literal(p: &Param) -> Result<u64, OracleError> {
    p.literal()
        .ok_or_else(|| OracleError::NotConcrete(p.to_string()))
}

/// Greedy, non-overlapping, left-to-right occurrences of `pattern` in `p`.
/// The empty pattern never occurs.
pub(crate) fn count_in(pattern: &[u32], p: &[u32]) -> usize {
    if pattern.is_empty() || pattern.len() > p.len() {
        return 0;
    }
    let (mut i, mut n) = (0, 0);
    while i + pattern.len() <= p.len() {
        if p[i..i + pattern.len()] == *pattern {
            n += 1;
            i += pattern.len();
        } else {
            i += 1;
        }
    }
    n
}

pub(crate) fn occ_ids(set: &[Ids], p: &[u32]) -> usize {
    set.iter().map(|q| count_in(q, p)).sum()
}

/// Number of occurrences of members of `set` inside `p`, each member
/// counted independently.
pub fn occ(set: &[Path], p: &[String]) -> usize {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |s: &String| {
        let n = ids.len() as u32;
        *ids.entry(s.clone()).or_insert(n)
    };
    let p: Ids = p.iter().map(&mut intern).collect();
    let set: Vec<Ids> = set
        .iter()
        .map(|q| q.iter().map(&mut intern).collect())
        .collect();
    occ_ids(&set, &p)
}

/// An annotation constraint during enumeration: at most `max` occurrences
/// of the paths of the annotated subtree.
pub(crate) struct Limit {
    /// The annotated node, when it is a leaf.
    pub leaf: Option<u32>,
    pub patterns: Rc<Vec<Ids>>,
    pub max: u64,
}

impl Limit {
    fn admits(&self, p: &[u32]) -> bool {
        occ_ids(&self.patterns, p) as u64 <= self.max
    }
}

/// Path enumeration over one tree, memoized per node.
pub struct TreePaths<'t> {
    root: &'t Cft,
    labels: Vec<&'t str>,
    blocks: Vec<&'t str>,
    wcets: Vec<u64>,
    index: HashMap<&'t str, u32>,
    mode: Iterations,
    budget: Budget,
    cache: HashMap<*const Cft, Rc<Vec<Ids>>>,
}

impl<'t> TreePaths<'t> {
    pub fn new(root: &'t Cft, mode: Iterations, budget: Budget) -> Result<Self, OracleError> {
        let mut tp = TreePaths {
            root,
            labels: Vec::new(),
            blocks: Vec::new(),
            wcets: Vec::new(),
            index: HashMap::new(),
            mode,
            budget,
            cache: HashMap::new(),
        };
        for leaf in root.leaves() {
            tp.index.insert(&leaf.label, tp.labels.len() as u32);
            tp.labels.push(&leaf.label);
            tp.blocks.push(&leaf.block);
            tp.wcets.push(literal(&leaf.wcet)?);
        }
        Ok(tp)
    }

    pub fn root(&self) -> &'t Cft {
        self.root
    }

    pub(crate) fn wcet_ids(&self, p: &[u32]) -> u128 {
        p.iter().map(|&i| u128::from(self.wcets[i as usize])).sum()
    }

    pub(crate) fn labels_of(&self, p: &[u32]) -> Path {
        p.iter()
            .map(|&i| self.labels[i as usize].to_string())
            .collect()
    }

    #[cfg(test)]
    pub(crate) fn blocks_of(&self, p: &[u32]) -> Path {
        p.iter()
            .map(|&i| self.blocks[i as usize].to_string())
            .collect()
    }

    pub(crate) fn label_id(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    /// Execution time of a path of leaf labels.
    pub fn wcet(&self, p: &[String]) -> Option<u128> {
        p.iter()
            .map(|l| {
                self.index
                    .get(l.as_str())
                    .map(|&i| u128::from(self.wcets[i as usize]))
            })
            .sum()
    }

    fn check(&self, set: &[Ids]) -> Result<(), OracleError> {
        let nodes: usize = set.iter().map(Vec::len).sum();
        if set.len() > self.budget.max_paths || nodes > self.budget.max_nodes {
            return Err(self.budget.exceeded());
        }
        Ok(())
    }

    /// `tpaths` of the subtree `t` of the root, as labels.
    pub fn tpaths(&mut self, t: &Cft) -> Result<Vec<Path>, OracleError> {
        let set = self.tpaths_ids(t)?;
        Ok(set.iter().map(|p| self.labels_of(p)).collect())
    }

    pub(crate) fn tpaths_ids(&mut self, t: &Cft) -> Result<Rc<Vec<Ids>>, OracleError> {
        let key = t as *const Cft;
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let set = match &t.node {
            Node::Leaf(l) => vec![vec![self.index[l.label.as_str()]]],
            Node::Seq { children } => {
                let mut acc: Vec<Ids> = vec![Vec::new()];
                for c in children {
                    let cs = self.tpaths_ids(c)?;
                    acc = self.product(&acc, &cs, &[])?;
                }
                acc
            }
            Node::Alt { children } => {
                let mut acc = Vec::new();
                for c in children {
                    acc.extend(self.tpaths_ids(c)?.iter().cloned());
                }
                acc.sort_unstable();
                acc.dedup();
                self.check(&acc)?;
                acc
            }
            Node::Loop {
                header,
                body,
                bound,
                exit,
            } => {
                let n = literal(bound)?;
                let limits = self.limits(body, |l| *l == LoopRef::Loop(header.clone()), 1)?;
                let bodies = self.tpaths_ids(body)?;
                let exits = self.tpaths_ids(exit)?;
                let iterated = self.repeat(&bodies, n, &limits, self.mode)?;
                self.product(&iterated, &exits, &limits)?
            }
        };
        let set = Rc::new(set);
        self.cache.insert(key, set.clone());
        Ok(set)
    }

    /// Annotations in `annSet(t)` whose loop satisfies `select`, with
    /// maxima scaled by `scale`.
    pub(crate) fn limits(
        &mut self,
        t: &Cft,
        select: impl Fn(&LoopRef) -> bool,
        scale: u64,
    ) -> Result<Vec<Limit>, OracleError> {
        let mut found: Vec<(&Cft, u64)> = Vec::new();
        let mut err = None;
        t.walk(&mut |_, s| {
            if let Some(a) = &s.ann {
                if select(&a.loop_ref) {
                    match literal(&a.max) {
                        Ok(m) => found.push((s, m)),
                        Err(e) => err = Some(e),
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        found
            .into_iter()
            .map(|(s, m)| {
                Ok(Limit {
                    leaf: match &s.node {
                        Node::Leaf(l) => self.label_id(&l.label),
                        _ => None,
                    },
                    patterns: self.tpaths_ids(s)?,
                    max: m.checked_mul(scale).ok_or(OracleError::Overflow)?,
                })
            })
            .collect()
    }

    /// Concatenations `a@b`, dropping those that break a limit.
    pub(crate) fn product(
        &self,
        xs: &[Ids],
        ys: &[Ids],
        limits: &[Limit],
    ) -> Result<Vec<Ids>, OracleError> {
        let mut out = Vec::new();
        let mut nodes = 0usize;
        for x in xs {
            for y in ys {
                let mut p = Vec::with_capacity(x.len() + y.len());
                p.extend_from_slice(x);
                p.extend_from_slice(y);
                if limits.iter().all(|l| l.admits(&p)) {
                    nodes += p.len();
                    out.push(p);
                    if out.len() > self.budget.max_paths || nodes > self.budget.max_nodes {
                        return Err(self.budget.exceeded());
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Concatenations of `n` members of `set` (or up to `n` with
    /// [`Iterations::AtMost`]). Occurrence counts only grow as a path is
    /// extended, so prefixes breaking a limit are pruned early.
    pub(crate) fn repeat(
        &self,
        set: &[Ids],
        n: u64,
        limits: &[Limit],
        mode: Iterations,
    ) -> Result<Vec<Ids>, OracleError> {
        let mut level: Vec<Ids> = vec![Vec::new()];
        let mut all = level.clone();
        for _ in 0..n {
            level = self.product(&level, set, limits)?;
            if mode == Iterations::AtMost {
                all.extend(level.iter().cloned());
                self.check(&all)?;
            }
        }
        if mode == Iterations::AtMost {
            all.sort_unstable();
            all.dedup();
            Ok(all)
        } else {
            Ok(level)
        }
    }

    /// Headers of the loop nodes inside `t`, including `t` itself.
    pub(crate) fn inner_loops(t: &Cft) -> Vec<String> {
        let mut out = Vec::new();
        t.walk(&mut |_, s| {
            if let Node::Loop { header, .. } = &s.node {
                out.push(header.clone());
            }
        });
        out
    }

    /// Limits from annotations in `annSet(t)` on loops outside `t`, each
    /// maximum multiplied by `e`.
    pub(crate) fn external_limits(&mut self, t: &Cft, e: u64) -> Result<Vec<Limit>, OracleError> {
        let inner = Self::inner_loops(t);
        self.limits(
            t,
            |l| match l {
                LoopRef::Loop(h) => !inner.contains(h),
                _ => true,
            },
            e,
        )
    }

    pub(crate) fn prep_ids(&mut self, t: &Cft, e: u64, n: u64) -> Result<Vec<Ids>, OracleError> {
        let limits = self.external_limits(t, e)?;
        let set = self.tpaths_ids(t)?;
        let mut out = self.repeat(&set, n, &limits, Iterations::Exact)?;
        out.retain(|p| limits.iter().all(|l| l.admits(p)));
        Ok(out)
    }

    /// Concatenations of `n` paths of `t` in which every annotation on a
    /// loop outside `t` holds `e` times over.
    pub fn prep(&mut self, t: &Cft, e: u64, n: u64) -> Result<Vec<Path>, OracleError> {
        let set = self.prep_ids(t, e, n)?;
        Ok(set.iter().map(|p| self.labels_of(p)).collect())
    }

    /// The most expensive member of `prep(t, e, n)` and its cost, or `None`
    /// when the set is empty.
    ///
    /// Without external annotations the members are unconstrained
    /// repetitions, so the maximum is `n` times the costliest path. When
    /// every external annotation sits on a leaf, a path matters only through
    /// its cost and its count of each annotated label, and repetitions are
    /// combined over those count vectors. Other cases enumerate `prep`.
    pub fn max_prep(
        &mut self,
        t: &Cft,
        e: u64,
        n: u64,
    ) -> Result<Option<(u128, Path)>, OracleError> {
        let limits = self.external_limits(t, e)?;
        let set = self.tpaths_ids(t)?;
        if limits.is_empty() {
            let Some(best) = set.iter().max_by_key(|p| self.wcet_ids(p)) else {
                return Ok(None);
            };
            let cost = self.wcet_ids(best) * u128::from(n);
            let mut p = Vec::new();
            for _ in 0..n {
                p.extend_from_slice(best);
            }
            return Ok(Some((cost, self.labels_of(&p))));
        }
        let leaf_labels: Option<Vec<u32>> = limits.iter().map(|l| l.leaf).collect();
        let Some(leaf_labels) = leaf_labels else {
            let all = self.prep_ids(t, e, n)?;
            return Ok(all
                .iter()
                .max_by_key(|p| self.wcet_ids(p))
                .map(|p| (self.wcet_ids(p), self.labels_of(p))));
        };
        let caps: Vec<u64> = limits.iter().map(|l| l.max).collect();
        let counts = |p: &[u32]| -> Vec<u64> {
            leaf_labels
                .iter()
                .map(|&id| p.iter().filter(|&&x| x == id).count() as u64)
                .collect()
        };
        let fits = |v: &[u64]| v.iter().zip(&caps).all(|(a, b)| a <= b);
        let mut summary: BTreeMap<Vec<u64>, (u128, &Ids)> = BTreeMap::new();
        for p in set.iter() {
            let v = counts(p);
            if !fits(&v) {
                continue;
            }
            let w = self.wcet_ids(p);
            let slot = summary.entry(v).or_insert((w, p));
            if w > slot.0 {
                *slot = (w, p);
            }
        }
        let mut states: BTreeMap<Vec<u64>, (u128, Ids)> = BTreeMap::new();
        states.insert(vec![0; caps.len()], (0, Vec::new()));
        for _ in 0..n {
            let mut next: BTreeMap<Vec<u64>, (u128, Ids)> = BTreeMap::new();
            for (v, (w, p)) in &states {
                for (u, (wu, pu)) in &summary {
                    let s: Vec<u64> = v.iter().zip(u).map(|(a, b)| a + b).collect();
                    if !fits(&s) {
                        continue;
                    }
                    let total = w + wu;
                    if next.get(&s).is_none_or(|(best, _)| total > *best) {
                        let mut q = p.clone();
                        q.extend_from_slice(pu);
                        next.insert(s, (total, q));
                    }
                }
            }
            states = next;
        }
        Ok(states
            .into_values()
            .max_by_key(|(w, _)| *w)
            .map(|(w, p)| (w, self.labels_of(&p))))
    }

    /// Every path of the root as block ids.
    #[cfg(test)]
    pub(crate) fn block_paths(&mut self) -> Result<Vec<Path>, OracleError> {
        let root = self.root;
        let set = self.tpaths_ids(root)?;
        Ok(set.iter().map(|p| self.blocks_of(p)).collect())
    }
}

/// `tpaths` of a whole tree with exact iteration counts.
pub fn tpaths(t: &Cft, budget: Budget) -> Result<Vec<Path>, OracleError> {
    TreePaths::new(t, Iterations::Exact, budget)?.tpaths(t)
}

/// `prep(t, e, n)` for a whole tree.
pub fn prep(t: &Cft, e: u64, n: u64, budget: Budget) -> Result<Vec<Path>, OracleError> {
    TreePaths::new(t, Iterations::Exact, budget)?.prep(t, e, n)
}

/// All paths from the entry of `g` to `end` in which every loop takes its
/// back-edges at most `bound` times per entry.
pub fn gpaths_bounded(
    g: &Cfg,
    f: &LoopForest,
    end: &str,
    budget: Budget,
) -> Result<Vec<Path>, OracleError> {
    let mut out = Vec::new();
    for_each_gpath(g, f, end, budget, |p| {
        out.push(p.iter().map(|&b| g.id(b).to_string()).collect())
    })?;
    Ok(out)
}

/// Streams the paths of [`gpaths_bounded`] as block indices, returning
/// their number.
pub(crate) fn for_each_gpath(
    g: &Cfg,
    f: &LoopForest,
    end: &str,
    budget: Budget,
    mut visit: impl FnMut(&[usize]),
) -> Result<usize, OracleError> {
    let end = g
        .index_of(end)
        .ok_or_else(|| OracleError::UnknownBlock(end.to_string()))?;
    let mut header_of: Vec<Option<(usize, u64)>> = vec![None; g.len()];
    for (i, l) in f.loops().iter().enumerate() {
        let bound = l
            .bound
            .as_ref()
            .ok_or_else(|| OracleError::MissingBound(l.header_id.clone()))?;
        header_of[l.header] = Some((i, literal(bound)?));
    }
    struct Dfs<'a, V> {
        g: &'a Cfg,
        f: &'a LoopForest,
        end: usize,
        header_of: Vec<Option<(usize, u64)>>,
        counters: Vec<u64>,
        path: Vec<usize>,
        visit: V,
        found: usize,
        visited: usize,
        budget: Budget,
    }
    impl<V: FnMut(&[usize])> Dfs<'_, V> {
        fn go(&mut self, u: usize) -> Result<(), OracleError> {
            self.visited += 1;
            if self.visited > self.budget.max_nodes {
                return Err(self.budget.exceeded());
            }
            self.path.push(u);
            if u == self.end {
                self.found += 1;
                if self.found > self.budget.max_paths {
                    return Err(self.budget.exceeded());
                }
                (self.visit)(&self.path);
            } else {
                for &v in self.g.succs(u) {
                    match self.header_of[v] {
                        Some((i, bound)) => {
                            let saved = self.counters[i];
                            if self.f.loops()[i].contains(u) {
                                if saved >= bound {
                                    continue;
                                }
                                self.counters[i] = saved + 1;
                            } else {
                                self.counters[i] = 0;
                            }
                            self.go(v)?;
                            self.counters[i] = saved;
                        }
                        None => self.go(v)?,
                    }
                }
            }
            self.path.pop();
            Ok(())
        }
    }
    let mut dfs = Dfs {
        g,
        f,
        end,
        counters: vec![0; f.len()],
        header_of,
        path: Vec::new(),
        visit: &mut visit,
        found: 0,
        visited: 0,
        budget,
    };
    dfs.go(g.entry())?;
    Ok(dfs.found)
}

/// Membership test for block paths of a tree, ignoring annotations and
/// letting each loop node iterate up to its bound.
///
/// Matching runs right to left, so results for a position depend only on
/// the prefix before it and survive between paths sharing that prefix.
pub(crate) struct Recognizer<'t> {
    root: &'t Cft,
    blocks: HashMap<&'t str, usize>,
    path: Vec<usize>,
    /// `memo[j]` maps a node to the starts `i` with `path[i..j]` a path of it.
    memo: Vec<HashMap<*const Cft, Rc<Vec<usize>>>>,
}

impl<'t> Recognizer<'t> {
    pub(crate) fn new(root: &'t Cft, g: &Cfg) -> Result<Self, OracleError> {
        let mut blocks = HashMap::new();
        let mut err = None;
        root.walk(&mut |_, s| match &s.node {
            Node::Leaf(l) => {
                if let Some(i) = g.index_of(&l.block) {
                    blocks.insert(l.block.as_str(), i);
                }
            }
            Node::Loop { bound, .. } => {
                if let Err(e) = literal(bound) {
                    err.get_or_insert(e);
                }
            }
            _ => {}
        });
        match err {
            Some(e) => Err(e),
            None => Ok(Recognizer {
                root,
                blocks,
                path: Vec::new(),
                memo: vec![HashMap::new()],
            }),
        }
    }

    pub(crate) fn accepts(&mut self, path: &[usize]) -> bool {
        let shared = self
            .path
            .iter()
            .zip(path)
            .take_while(|(a, b)| a == b)
            .count();
        self.memo.truncate(shared + 1);
        self.memo.resize_with(path.len() + 1, HashMap::new);
        self.path.clear();
        self.path.extend_from_slice(path);
        let root = self.root;
        self.starts(root, path.len()).first() == Some(&0)
    }

    fn step(&mut self, t: &Cft, from: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &j in from {
            out.extend(self.starts(t, j).iter().copied());
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Positions `i`, ascending, such that `path[i..j]` is a path of `t`.
    fn starts(&mut self, t: &Cft, j: usize) -> Rc<Vec<usize>> {
        let key = t as *const Cft;
        if let Some(hit) = self.memo[j].get(&key) {
            return hit.clone();
        }
        let out = match &t.node {
            Node::Leaf(l) => {
                let hit = j > 0 && self.blocks.get(l.block.as_str()) == Some(&self.path[j - 1]);
                if hit {
                    vec![j - 1]
                } else {
                    Vec::new()
                }
            }
            Node::Seq { children } => {
                let mut frontier = vec![j];
                for c in children.iter().rev() {
                    frontier = self.step(c, &frontier);
                }
                frontier
            }
            Node::Alt { children } => {
                let mut out = Vec::new();
                for c in children {
                    out.extend(self.starts(c, j).iter().copied());
                }
                out.sort_unstable();
                out.dedup();
                out
            }
            Node::Loop {
                body, bound, exit, ..
            } => {
                let n = literal(bound).expect("bounds checked on construction");
                let mut frontier = self.starts(exit, j).to_vec();
                let mut reached = frontier.clone();
                for _ in 0..n {
                    frontier = self.step(body, &frontier);
                    if frontier.is_empty() {
                        break;
                    }
                    reached.extend_from_slice(&frontier);
                }
                reached.sort_unstable();
                reached.dedup();
                reached
            }
        };
        let out = Rc::new(out);
        self.memo[j].insert(key, out.clone());
        out
    }
}
