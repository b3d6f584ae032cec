//! Seeded random instances for differential testing and benchmarks.
//!
//! Programs are generated from random structured code (sequences,
//! conditionals, loops with early `break` and `continue`), which keeps every
//! graph reducible while still producing loops with several exits and
//! back-edges.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::awcet::{AbstractWcet, WcetSeq};
use crate::cfg::{Block, Cfg, LoopForest, LoopRef, Param, Program, VariantSpec};
use crate::cft::{path_string, Cft, CftError, Node};
use crate::symbolic::{Bindings, Count, Formula, Header, Value};

#[derive(Clone, Debug)]
pub struct ProgramParams {
    /// Upper bound on the number of blocks, entry included.
    pub max_blocks: usize,
    /// Maximum loop nesting depth.
    pub max_depth: usize,
    pub max_bound: u64,
    pub max_wcet: u64,
    /// Allow early exits and extra back-edges inside loops.
    pub jumps: bool,
    /// Probability that a loop bound is a fresh parameter `n<k>`.
    pub symbolic_bounds: f64,
    /// Probability that a block WCET is a fresh parameter `w<k>`.
    pub symbolic_wcets: f64,
    /// Keep adding top-level statements until the block budget is used up.
    pub fill: bool,
}

impl Default for ProgramParams {
    fn default() -> Self {
        ProgramParams {
            max_blocks: 10,
            max_depth: 2,
            max_bound: 4,
            max_wcet: 9,
            jumps: true,
            symbolic_bounds: 0.0,
            symbolic_wcets: 0.0,
            fill: false,
        }
    }
}

#[derive(Clone, Debug)]
enum Stmt {
    Basic,
    If(Vec<Stmt>, Option<Vec<Stmt>>),
    Loop(Vec<Stmt>),
    BreakIf,
    ContinueIf,
}

fn cost(s: &Stmt) -> usize {
    match s {
        Stmt::Basic | Stmt::BreakIf | Stmt::ContinueIf => 1,
        Stmt::If(t, e) => 2 + list_cost(t) + e.as_ref().map_or(0, |e| 1 + list_cost(e)),
        Stmt::Loop(b) => 3 + list_cost(b),
    }
}

fn list_cost(ss: &[Stmt]) -> usize {
    ss.iter().map(cost).sum()
}

struct Shape<'p, R> {
    p: &'p ProgramParams,
    rng: &'p mut R,
}

impl<R: Rng> Shape<'_, R> {
    fn list(&mut self, budget: usize, depth: usize, in_loop: bool, fill: bool) -> Vec<Stmt> {
        let mut out = Vec::new();
        let mut left = budget;
        while left > 0 && (fill || out.is_empty() || self.rng.gen_bool(0.6)) {
            let s = self.stmt(left, depth, in_loop);
            left -= cost(&s);
            out.push(s);
        }
        out
    }

    fn stmt(&mut self, max: usize, depth: usize, in_loop: bool) -> Stmt {
        let mut kinds = vec![0];
        if max >= 2 {
            kinds.push(1);
        }
        if max >= 3 && depth < self.p.max_depth {
            kinds.extend([2, 2]);
        }
        if in_loop && self.p.jumps {
            kinds.extend([3, 4]);
        }
        match *kinds.choose(self.rng).unwrap() {
            0 => Stmt::Basic,
            1 => {
                let then_budget = self.rng.gen_range(0..=(max - 2).min(4));
                let then = self.list(then_budget, depth, in_loop, false);
                let left = max - 2 - list_cost(&then);
                let other = (left >= 1 && self.rng.gen_bool(0.5)).then(|| {
                    let b = self.rng.gen_range(0..=(left - 1).min(4));
                    self.list(b, depth, in_loop, false)
                });
                Stmt::If(then, other)
            }
            2 => {
                let b = self
                    .rng
                    .gen_range(0..=(max - 3).min(if self.p.fill { 40 } else { 6 }));
                Stmt::Loop(self.list(b, depth + 1, true, false))
            }
            3 => Stmt::BreakIf,
            _ => Stmt::ContinueIf,
        }
    }
}

struct LoopCtx {
    header: usize,
    breaks: Vec<usize>,
}

struct Emit<'p, R> {
    p: &'p ProgramParams,
    rng: &'p mut R,
    blocks: Vec<Block>,
    edges: Vec<(usize, usize)>,
    bounds: BTreeMap<String, Param>,
    loops: Vec<LoopCtx>,
}

impl<R: Rng> Emit<'_, R> {
    fn block(&mut self) -> usize {
        let i = self.blocks.len();
        let wcet = if self.rng.gen_bool(self.p.symbolic_wcets) {
            Param::Sym(format!("w{i}"))
        } else {
            Param::Lit(self.rng.gen_range(0..=self.p.max_wcet))
        };
        self.blocks.push(Block::new(format!("b{i}"), wcet));
        i
    }

    fn fresh(&mut self, from: usize) -> usize {
        let b = self.block();
        self.edges.push((from, b));
        b
    }

    fn list(&mut self, ss: &[Stmt], mut cur: usize) -> usize {
        for s in ss {
            cur = self.stmt(s, cur);
        }
        cur
    }

    fn stmt(&mut self, s: &Stmt, cur: usize) -> usize {
        match s {
            Stmt::Basic => self.fresh(cur),
            Stmt::If(then, other) => {
                let t = self.fresh(cur);
                let t_end = self.list(then, t);
                let e_end = match other {
                    Some(other) => {
                        let e = self.fresh(cur);
                        self.list(other, e)
                    }
                    None => cur,
                };
                let j = self.fresh(t_end);
                self.edges.push((e_end, j));
                j
            }
            Stmt::Loop(body) => {
                let h = self.fresh(cur);
                self.loops.push(LoopCtx {
                    header: h,
                    breaks: Vec::new(),
                });
                let b = self.fresh(h);
                let end = self.list(body, b);
                self.edges.push((end, h));
                let ctx = self.loops.pop().unwrap();
                let x = self.fresh(h);
                for src in ctx.breaks {
                    self.edges.push((src, x));
                }
                let bound = if self.rng.gen_bool(self.p.symbolic_bounds) {
                    Param::Sym(format!("n{h}"))
                } else {
                    Param::Lit(self.rng.gen_range(1..=self.p.max_bound))
                };
                self.bounds.insert(format!("b{h}"), bound);
                x
            }
            Stmt::BreakIf => {
                self.loops
                    .last_mut()
                    .expect("jumps only occur in loops")
                    .breaks
                    .push(cur);
                self.fresh(cur)
            }
            Stmt::ContinueIf => {
                let h = self.loops.last().expect("jumps only occur in loops").header;
                self.edges.push((cur, h));
                self.fresh(cur)
            }
        }
    }
}

/// A random reducible program with at most `p.max_blocks` blocks.
pub fn random_program<R: Rng>(p: &ProgramParams, name: &str, rng: &mut R) -> Program {
    let budget = p.max_blocks.saturating_sub(1);
    let shape = Shape { p, rng: &mut *rng }.list(budget, 0, false, p.fill);
    let mut emit = Emit {
        p,
        rng,
        blocks: Vec::new(),
        edges: Vec::new(),
        bounds: BTreeMap::new(),
        loops: Vec::new(),
    };
    let entry = emit.block();
    let exit = emit.list(&shape, entry);
    let ids: Vec<String> = emit.blocks.iter().map(|b| b.id.clone()).collect();
    let edges: Vec<(&str, &str)> = emit
        .edges
        .iter()
        .map(|&(u, v)| (ids[u].as_str(), ids[v].as_str()))
        .collect();
    let cfg = Cfg::new(emit.blocks, &edges, &ids[entry], &ids[exit])
        .expect("generated graphs are well formed");
    Program {
        name: name.to_string(),
        cfg,
        loop_bounds: emit.bounds,
        annotations: Vec::new(),
        splits: Vec::new(),
    }
}

/// Splits up to `count` random leaves into a hit variant (same WCET) and a
/// miss variant (`miss_penalty` more) that occurs at most once per entry of
/// a random enclosing loop, or once per run.
pub fn persistence_splits<R: Rng>(
    t: &Cft,
    count: usize,
    miss_penalty: u64,
    rng: &mut R,
) -> Result<Cft, CftError> {
    let mut leaves: Vec<(Vec<usize>, String, u64)> = Vec::new();
    t.walk(&mut |p, s| {
        if let Node::Leaf(l) = &s.node {
            if let Some(w) = l.wcet.literal() {
                leaves.push((p.to_vec(), l.block.clone(), w));
            }
        }
    });
    leaves.shuffle(rng);
    leaves.truncate(count);
    // Later paths first, so earlier paths stay valid after each split.
    leaves.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out = t.clone();
    for (k, (path, block, w)) in leaves.into_iter().enumerate() {
        let mut loops: Vec<LoopRef> = out
            .enclosing_loops(&path)
            .into_iter()
            .map(|h| LoopRef::Loop(h.to_string()))
            .collect();
        loops.push(LoopRef::Top);
        let l = loops.choose(rng).unwrap().clone();
        let variants = [
            VariantSpec {
                id: format!("{block}_h{k}"),
                wcet: Param::Lit(w),
                annotation: None,
            },
            VariantSpec {
                id: format!("{block}_m{k}"),
                wcet: Param::Lit(w + miss_penalty),
                annotation: Some((l, Param::Lit(1))),
            },
        ];
        out.split_leaf(&path_string(&path), &variants)?;
    }
    Ok(out)
}

/// Loop structure used by random formulas: `h2` nested in `h1`, `h3` beside.
pub fn formula_forest() -> LoopForest {
    LoopForest::from_nesting(&[("h1", None), ("h2", Some("h1")), ("h3", None)])
}

const WCET_IDS: [&str; 3] = ["x", "y", "z"];
const COUNT_IDS: [&str; 2] = ["m", "n"];
const LOOP_IDS: [&str; 2] = ["u", "v"];
const HEADERS: [&str; 3] = ["h1", "h2", "h3"];

fn random_loop<R: Rng>(rng: &mut R) -> LoopRef {
    match rng.gen_range(0..4) {
        0 => LoopRef::Top,
        i => LoopRef::Loop(HEADERS[i - 1].to_string()),
    }
}

/// A random eventually-constant sequence with small values.
pub fn random_seq<R: Rng>(rng: &mut R) -> WcetSeq<u64> {
    let tail = rng.gen_range(0..=4);
    let mut prefix: Vec<u64> = (0..rng.gen_range(0..=3))
        .map(|_| rng.gen_range(tail..=tail + 12))
        .collect();
    prefix.sort_unstable_by(|a, b| b.cmp(a));
    WcetSeq::new(prefix, tail)
}

pub fn random_awcet<R: Rng>(rng: &mut R) -> AbstractWcet<u64> {
    AbstractWcet::new(random_loop(rng), random_seq(rng))
}

fn random_count<R: Rng>(rng: &mut R, min: u64) -> Count {
    if rng.gen_bool(0.4) {
        Count::Var(COUNT_IDS.choose(rng).unwrap().to_string())
    } else {
        Count::Int(rng.gen_range(min..=3))
    }
}

fn random_header<R: Rng>(rng: &mut R, allow_top: bool) -> Header {
    match rng.gen_range(0..if allow_top { 6 } else { 5 }) {
        0 | 1 => Header::Var(LOOP_IDS.choose(rng).unwrap().to_string()),
        5 => Header::Top,
        _ => Header::Block(HEADERS.choose(rng).unwrap().to_string()),
    }
}

/// A random formula with at most `max_nodes` nodes over the identifiers
/// bound by [`random_bindings`] and the loops of [`formula_forest`].
pub fn random_formula<R: Rng>(rng: &mut R, max_nodes: usize) -> Formula<u64> {
    fn go<R: Rng>(rng: &mut R, budget: usize) -> Formula<u64> {
        if budget <= 1 || rng.gen_bool(0.25) {
            return if rng.gen_bool(0.5) {
                Formula::Const(random_awcet(rng))
            } else {
                Formula::id(*WCET_IDS.choose(rng).unwrap())
            };
        }
        let inner = budget - 1;
        match rng.gen_range(0..5) {
            0 => Formula::restrict(
                go(rng, inner),
                random_header(rng, true),
                random_count(rng, 0),
            ),
            1 => Formula::scalar(random_count(rng, 0), go(rng, inner)),
            k @ (2 | 3) if inner >= 2 => {
                let n = rng.gen_range(2..=inner.min(4));
                let ws = (0..n).map(|_| go(rng, inner / n)).collect();
                if k == 2 {
                    Formula::plus(ws)
                } else {
                    Formula::max(ws)
                }
            }
            4 if inner >= 2 => {
                let body = go(rng, inner / 2);
                let exit = if rng.gen_bool(0.3) {
                    Formula::zero()
                } else {
                    go(rng, inner / 2)
                };
                Formula::power(body, exit, random_header(rng, false), random_count(rng, 1))
            }
            _ => Formula::scalar(random_count(rng, 0), go(rng, inner)),
        }
    }
    go(rng, max_nodes)
}

/// A complete binding for every identifier [`random_formula`] may use.
pub fn random_bindings<R: Rng>(rng: &mut R) -> Bindings<u64> {
    let mut rho = Bindings::new();
    for x in WCET_IDS {
        let v = if rng.gen_bool(0.3) {
            Value::Int(rng.gen_range(0..=9))
        } else {
            Value::Wcet(random_awcet(rng))
        };
        rho.insert(x.to_string(), v);
    }
    for n in COUNT_IDS {
        rho.insert(n.to_string(), Value::Int(rng.gen_range(1..=3)));
    }
    for l in LOOP_IDS {
        rho.insert(
            l.to_string(),
            Value::Loop(HEADERS.choose(rng).unwrap().to_string()),
        );
    }
    rho
}
