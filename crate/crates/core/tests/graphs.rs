use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symwcet::cfg::{build_loop_forest, parse_program, serialize_program, Cfg, DomTree};
use symwcet::corpus::{random_program, ProgramParams};

fn params(max_blocks: usize) -> ProgramParams {
    ProgramParams {
        max_blocks,
        max_depth: 3,
        ..Default::default()
    }
}

/// Blocks on every simple entry-to-`v` path.
fn brute_dominators(g: &Cfg, v: usize) -> BTreeSet<usize> {
    fn go(
        g: &Cfg,
        u: usize,
        v: usize,
        path: &mut Vec<usize>,
        on: &mut Vec<bool>,
        acc: &mut Option<BTreeSet<usize>>,
    ) {
        path.push(u);
        on[u] = true;
        if u == v {
            let here: BTreeSet<usize> = path.iter().copied().collect();
            *acc = Some(match acc.take() {
                None => here,
                Some(a) => a.intersection(&here).copied().collect(),
            });
        } else {
            for &w in g.succs(u) {
                if !on[w] {
                    go(g, w, v, path, on, acc);
                }
            }
        }
        on[u] = false;
        path.pop();
    }
    let mut acc = None;
    go(
        g,
        g.entry(),
        v,
        &mut Vec::new(),
        &mut vec![false; g.len()],
        &mut acc,
    );
    acc.expect("every block is reachable")
}

#[test]
fn dominators_match_path_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..40 {
        let g = random_program(&params(30), &format!("d{i}"), &mut rng).cfg;
        let dom = DomTree::compute(g.entry(), g.successor_lists(), g.predecessor_lists());
        for v in 0..g.len() {
            let brute = brute_dominators(&g, v);
            for a in 0..g.len() {
                assert_eq!(
                    dom.dominates(a, v),
                    brute.contains(&a),
                    "graph {i}: does {a} dominate {v}?"
                );
            }
        }
    }
}

/// `h` and every block that reaches a back-edge source without passing `h`.
fn brute_body(g: &Cfg, h: usize, sources: &[usize]) -> BTreeSet<usize> {
    let mut seen: HashSet<usize> = HashSet::from([h]);
    let mut queue: VecDeque<usize> = sources.iter().copied().filter(|&s| s != h).collect();
    seen.extend(queue.iter().copied());
    while let Some(u) = queue.pop_front() {
        for &p in g.preds(u) {
            if seen.insert(p) {
                queue.push_back(p);
            }
        }
    }
    seen.into_iter().collect()
}

#[test]
fn loop_bodies_match_backward_reachability() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..200 {
        let g = random_program(&params(20), &format!("l{i}"), &mut rng).cfg;
        let dom = DomTree::compute(g.entry(), g.successor_lists(), g.predecessor_lists());
        let f = build_loop_forest(&g).unwrap();
        let headers: BTreeSet<usize> = g
            .edges()
            .iter()
            .filter(|&&(u, v)| dom.dominates(v, u))
            .map(|&(_, v)| v)
            .collect();
        assert_eq!(f.len(), headers.len());
        for l in f.loops() {
            let sources: Vec<usize> = g
                .preds(l.header)
                .iter()
                .copied()
                .filter(|&u| dom.dominates(l.header, u))
                .collect();
            let body: BTreeSet<usize> = l.body.iter().copied().collect();
            assert_eq!(
                body,
                brute_body(&g, l.header, &sources),
                "graph {i}, loop {}",
                l.header_id
            );
        }
    }
}

#[test]
fn documents_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = ProgramParams {
        max_blocks: 50,
        fill: true,
        symbolic_bounds: 0.3,
        symbolic_wcets: 0.2,
        ..params(50)
    };
    for i in 0..20 {
        let prog = random_program(&p, &format!("r{i}"), &mut rng);
        assert_eq!(prog.cfg.len(), 50);
        let text = serialize_program(&prog);
        let back = parse_program(&text).unwrap();
        assert_eq!(back, prog);
        assert_eq!(serialize_program(&back), text);
    }
}
