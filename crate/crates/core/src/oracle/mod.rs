//! Brute-force path semantics and differential checks of the analysis.
//!
//! Everything here enumerates paths explicitly and is meant for small,
//! concrete instances; enumeration stops with
//! [`OracleError::PathBudgetExceeded`] once a [`Budget`] is exhausted.

mod paths;

use paths::{for_each_gpath, Recognizer};
pub use paths::{gpaths_bounded, occ, prep, tpaths, Iterations, Path, TreePaths};

use serde::Serialize;
use thiserror::Error;

use crate::awcet::{gamma, AwcetError};
use crate::cfg::{Cfg, LoopForest};
use crate::cft::{path_string, Cft};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_paths: usize,
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_paths: 1_000_000,
            max_nodes: 10_000_000,
        }
    }
}

impl Budget {
    fn exceeded(&self) -> OracleError {
        OracleError::PathBudgetExceeded {
            max_paths: self.max_paths,
            max_nodes: self.max_nodes,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("path budget exceeded ({max_paths} paths, {max_nodes} nodes)")]
    PathBudgetExceeded { max_paths: usize, max_nodes: usize },
    #[error("symbolic value `{0}` present; the oracle needs a concrete instance")]
    NotConcrete(String),
    #[error("loop `{0}` has no bound")]
    MissingBound(String),
    #[error("no block `{0}`")]
    UnknownBlock(String),
    #[error("annotation maximum overflows")]
    Overflow,
    #[error(transparent)]
    Awcet(#[from] AwcetError),
}

/// Number of counterexamples kept in a report.
const MAX_WITNESSES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub cfg_paths: usize,
    /// Bounded CFG paths with no counterpart in the tree.
    pub missing: Vec<Path>,
    pub missing_count: usize,
}

impl InclusionReport {
    pub fn passed(&self) -> bool {
        self.missing_count == 0
    }
}

/// Checks that every bounded entry-to-exit path of `g` is a path of `t`
/// read as block ids.
///
/// Annotations are ignored, and loop nodes admit up to their bound of
/// iterations, matching the bounded graph semantics.
pub fn check_path_inclusion(
    g: &Cfg,
    f: &LoopForest,
    t: &Cft,
    budget: Budget,
) -> Result<InclusionReport, OracleError> {
    let mut tree = Recognizer::new(t, g)?;
    let (mut missing, mut missing_count) = (Vec::new(), 0);
    let cfg_paths = for_each_gpath(g, f, g.id(g.exit()), budget, |p| {
        if !tree.accepts(p) {
            missing_count += 1;
            if missing.len() < MAX_WITNESSES {
                missing.push(p.iter().map(|&b| g.id(b).to_string()).collect());
            }
        }
    })?;
    Ok(InclusionReport {
        cfg_paths,
        missing,
        missing_count,
    })
}

/// A subtree whose abstract WCET undercuts one of its path repetitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Node path in the tree, e.g. `/0/1`.
    pub node: String,
    pub e: u64,
    pub n: u64,
    pub bound: u128,
    pub wcet: u128,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessReport {
    /// `η[0]` of the root.
    pub computed: u128,
    /// Costliest feasible path of the whole tree.
    pub max_path: u128,
    pub witness: Path,
    /// Over-estimation relative to `max_path`, in percent.
    pub gap_percent: f64,
    /// Number of (subtree, e, n) combinations checked.
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Entry counts and repetitions checked for every subtree.
pub const REPETITIONS: [(u64, u64); 4] = [(1, 1), (1, 2), (2, 2), (2, 4)];

/// Compares the abstract WCET of every subtree against the costliest of its
/// path repetitions.
pub fn check_soundness(
    t: &Cft,
    f: &LoopForest,
    budget: Budget,
) -> Result<SoundnessReport, OracleError> {
    let mut tp = TreePaths::new(t, Iterations::Exact, budget)?;
    let mut nodes: Vec<(Vec<usize>, &Cft)> = Vec::new();
    t.walk(&mut |p, s| nodes.push((p.to_vec(), s)));

    let root = gamma::<u64>(t, f)?;
    let computed = u128::from(*root.wcet());
    let (max_path, witness) = tp.max_prep(t, 1, 1)?.unwrap_or_default();

    let mut checks = 0;
    let mut violations = Vec::new();
    for (path, s) in nodes {
        let seq = gamma::<u64>(s, f)?.seq;
        for (e, n) in REPETITIONS {
            checks += 1;
            let bound = u128::from(seq.eval(e, n)?);
            if let Some((wcet, p)) = tp.max_prep(s, e, n)? {
                if wcet > bound {
                    violations.push(Violation {
                        node: path_string(&path),
                        e,
                        n,
                        bound,
                        wcet,
                        path: p,
                    });
                }
            }
        }
    }
    let gap_percent = if max_path == 0 {
        0.0
    } else {
        (computed as f64 - max_path as f64) / max_path as f64 * 100.0
    };
    Ok(SoundnessReport {
        computed,
        max_path,
        witness,
        gap_percent,
        checks,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::cfg::{build_loop_forest, Block, LoopRef, Param};
    use crate::cft::Annotation;
    use crate::restructure::build_cft;

    fn p(s: &str) -> Path {
        s.split('.').map(str::to_string).collect()
    }

    /// Loop `b2` whose `b4` either hits (1 cycle) or misses (11 cycles) at
    /// most once per loop entry.
    fn persistence(n: u64) -> Cft {
        let miss =
            Cft::leaf("b4_m", "b4", 11).with_annotation(Annotation::new(LoopRef::header("b2"), 1));
        let body = Cft::seq(vec![
            Cft::block("b2", 1),
            Cft::alt(vec![Cft::leaf("b4_h", "b4", 1), miss]),
        ]);
        Cft::looped("b2", body, n, Cft::leaf("b2#1", "b2", 1))
    }

    #[test]
    fn occurrences() {
        assert_eq!(occ(&[p("b4_m")], &p("b2.b4_m.b2.b4_m.b2")), 2);
        assert_eq!(occ(&[], &p("a.b")), 0);
        assert_eq!(occ(&[p("a.b")], &p("a.b.a.b")), 2);
        assert_eq!(occ(&[p("a.a")], &p("a.a.a")), 1);
    }

    #[test]
    fn annotated_loop_paths() {
        let t = persistence(2);
        let paths = tpaths(&t, Budget::default()).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(!paths.contains(&p("b2.b4_m.b2.b4_m.b2#1")));
        assert!(paths.contains(&p("b2.b4_m.b2.b4_h.b2#1")));
    }

    #[test]
    fn inductive_cases() {
        let b = Budget::default();
        assert_eq!(tpaths(&Cft::block("b", 1), b).unwrap(), vec![p("b")]);
        assert_eq!(
            tpaths(&Cft::seq(vec![Cft::block("a", 1), Cft::block("b", 1)]), b).unwrap(),
            vec![p("a.b")]
        );
        assert_eq!(
            tpaths(&Cft::empty(), b).unwrap(),
            vec![Vec::<String>::new()]
        );
        assert_eq!(prep(&Cft::block("b", 1), 1, 2, b).unwrap(), vec![p("b.b")]);
    }

    #[test]
    fn repetitions_respect_scaled_annotations() {
        let t = persistence(2);
        let alt = t.get(&[0, 1]).unwrap();
        let mut tp = TreePaths::new(&t, Iterations::Exact, Budget::default()).unwrap();
        let reps = tp.prep(alt, 2, 4).unwrap();
        assert!(reps.iter().all(|q| occ(&[p("b4_m")], q) <= 2));
        assert_eq!(reps.len(), 1 + 4 + 6);
        let (w, q) = tp.max_prep(alt, 2, 4).unwrap().unwrap();
        assert_eq!(w, 24);
        assert_eq!(occ(&[p("b4_m")], &q), 2);
        let brute = reps.iter().map(|q| tp.wcet(q).unwrap()).max().unwrap();
        assert_eq!(w, brute);
    }

    #[test]
    fn whole_program_prep_is_tpaths() {
        let t = persistence(3);
        let b = Budget::default();
        let mut a = prep(&t, 1, 1, b).unwrap();
        let mut c = tpaths(&t, b).unwrap();
        a.sort();
        c.sort();
        assert_eq!(a, c);
    }

    #[test]
    fn persistence_is_sound_with_a_gap_of_zero() {
        let f = LoopForest::from_nesting(&[("b2", None)]);
        let r = check_soundness(&persistence(4), &f, Budget::default()).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.max_path, 4 + 11 + 3 + 1);
        assert_eq!(r.computed, r.max_path);
        assert_eq!(r.gap_percent, 0.0);
    }

    #[test]
    fn leaf_is_sound_with_equality() {
        let r = check_soundness(
            &Cft::block("b", 7),
            &LoopForest::default(),
            Budget::default(),
        )
        .unwrap();
        assert_eq!((r.computed, r.max_path, r.checks), (7, 7, 4));
    }

    fn nested() -> (Cfg, LoopForest) {
        let g = Cfg::new(
            ["b1", "b2", "b3", "b4", "b5", "b6"]
                .iter()
                .map(|b| Block::new(*b, 1))
                .collect(),
            &[
                ("b1", "b2"),
                ("b1", "b6"),
                ("b1", "b5"),
                ("b2", "b4"),
                ("b4", "b2"),
                ("b2", "b3"),
                ("b6", "b3"),
                ("b3", "b1"),
            ],
            "b1",
            "b5",
        )
        .unwrap();
        let mut f = build_loop_forest(&g).unwrap();
        let bounds: BTreeMap<String, Param> =
            [("b1".into(), Param::Lit(1)), ("b2".into(), Param::Lit(1))].into();
        f.set_bounds(&bounds).unwrap();
        (g, f)
    }

    #[test]
    fn bounded_graph_paths() {
        let (g, f) = nested();
        let paths = gpaths_bounded(&g, &f, "b5", Budget::default()).unwrap();
        assert!(paths.contains(&p("b1.b6.b3.b1.b5")));
        assert!(paths.contains(&p("b1.b2.b4.b2.b3.b1.b5")));
        assert!(paths.contains(&p("b1.b5")));
        assert!(!paths.contains(&p("b1.b6.b3.b1.b6.b3.b1.b5")));
        let single = Cfg::new(vec![Block::new("b", 1)], &[] as &[(&str, &str)], "b", "b").unwrap();
        let f1 = build_loop_forest(&single).unwrap();
        assert_eq!(
            gpaths_bounded(&single, &f1, "b", Budget::default()).unwrap(),
            vec![p("b")]
        );
        let diamond = Cfg::new(
            ["a", "b", "c", "d"]
                .iter()
                .map(|b| Block::new(*b, 1))
                .collect(),
            &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
            "a",
            "d",
        )
        .unwrap();
        let fd = build_loop_forest(&diamond).unwrap();
        assert_eq!(
            gpaths_bounded(&diamond, &fd, "d", Budget::default())
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn nested_paths_are_tree_paths() {
        let (g, f) = nested();
        let t = build_cft(&g, &f).unwrap();
        let r = check_path_inclusion(&g, &f, &t, Budget::default()).unwrap();
        assert!(r.passed(), "{:?}", r.missing);
        assert_eq!(r.cfg_paths, 4);
    }

    #[test]
    fn recognizer_matches_enumeration() {
        use crate::corpus::{random_program, ProgramParams};
        use rand::SeedableRng;
        use std::collections::HashSet;

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let params = ProgramParams {
            max_blocks: 9,
            max_bound: 2,
            ..Default::default()
        };
        for i in 0..60 {
            let prog = random_program(&params, &format!("r{i}"), &mut rng);
            let mut f = build_loop_forest(&prog.cfg).unwrap();
            f.set_bounds(&prog.loop_bounds).unwrap();
            let t = build_cft(&prog.cfg, &f).unwrap();
            let g = &prog.cfg;
            let listed: HashSet<Path> = TreePaths::new(&t, Iterations::AtMost, Budget::default())
                .unwrap()
                .block_paths()
                .unwrap()
                .into_iter()
                .collect();
            let mut rec = Recognizer::new(&t, g).unwrap();
            let index =
                |p: &Path| -> Vec<usize> { p.iter().map(|b| g.index_of(b).unwrap()).collect() };
            for p in &listed {
                assert!(rec.accepts(&index(p)), "{i}: {p:?}");
            }
            for p in gpaths_bounded(g, &f, g.id(g.exit()), Budget::default()).unwrap() {
                assert_eq!(rec.accepts(&index(&p)), listed.contains(&p), "{i}: {p:?}");
                let mut longer = index(&p);
                longer.push(g.entry());
                assert!(!rec.accepts(&longer));
            }
        }
    }

    #[test]
    fn recognizer_respects_bounds() {
        let (g, f) = nested();
        let t = build_cft(&g, &f).unwrap();
        let mut rec = Recognizer::new(&t, &g).unwrap();
        let ids =
            |s: &str| -> Vec<usize> { s.split('.').map(|b| g.index_of(b).unwrap()).collect() };
        assert!(rec.accepts(&ids("b1.b6.b3.b1.b5")));
        assert!(!rec.accepts(&ids("b1.b6.b3.b1.b6.b3.b1.b5")));
        assert!(!rec.accepts(&ids("b1.b6.b5")));
    }

    #[test]
    fn budget_is_enforced() {
        let t = persistence(3);
        let tiny = Budget {
            max_paths: 2,
            max_nodes: 100,
        };
        assert!(matches!(
            tpaths(&t, tiny),
            Err(OracleError::PathBudgetExceeded { .. })
        ));
    }
}
