use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symwcet::analysis::Analysis;
use symwcet::awcet::gamma;
use symwcet::cfg::{Block, Cfg, Program};
use symwcet::corpus::{persistence_splits, random_program, ProgramParams};
use symwcet::oracle::{check_path_inclusion, check_soundness, tpaths, Budget, TreePaths};

fn analyses(seed: u64, count: usize, p: &ProgramParams) -> Vec<Analysis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| Analysis::new(random_program(p, &format!("p{i}"), &mut rng)).unwrap())
        .collect()
}

#[test]
fn mid_loop_break_duplicates_leaves() {
    let g = Cfg::new(
        ["a", "h", "b", "c", "x", "e"]
            .iter()
            .map(|b| Block::new(*b, 1))
            .collect(),
        &[
            ("a", "h"),
            ("h", "b"),
            ("b", "c"),
            ("b", "e"),
            ("c", "h"),
            ("h", "x"),
            ("x", "e"),
        ],
        "a",
        "e",
    )
    .unwrap();
    let prog = Program {
        name: "brk".into(),
        cfg: g,
        loop_bounds: [("h".to_string(), 3u64.into())].into(),
        annotations: vec![],
        splits: vec![],
    };
    let a = Analysis::new(prog).unwrap();
    assert!(
        a.tree.labels().iter().any(|l| l.contains('#')),
        "{}",
        a.tree.to_sexpr_labels()
    );
    let r = check_path_inclusion(&a.program.cfg, &a.forest, &a.tree, Budget::default()).unwrap();
    assert!(r.passed(), "{:?}", r.missing);
}

#[test]
fn graph_paths_are_tree_paths() {
    for a in analyses(
        21,
        120,
        &ProgramParams {
            max_blocks: 12,
            max_bound: 3,
            ..Default::default()
        },
    ) {
        let r =
            check_path_inclusion(&a.program.cfg, &a.forest, &a.tree, Budget::default()).unwrap();
        assert!(
            r.passed(),
            "{}: {:?}\n{}",
            a.program.name,
            r.missing,
            a.tree.to_sexpr_labels()
        );
    }
}

#[test]
fn unannotated_trees_are_exact() {
    for a in analyses(22, 120, &ProgramParams::default()) {
        let g = gamma::<u64>(&a.tree, &a.forest).unwrap();
        let tp = TreePaths::new(
            &a.tree,
            symwcet::oracle::Iterations::Exact,
            Budget::default(),
        )
        .unwrap();
        let paths = tpaths(&a.tree, Budget::default()).unwrap();
        let best = paths.iter().map(|p| tp.wcet(p).unwrap()).max().unwrap();
        assert_eq!(
            u128::from(*g.wcet()),
            best,
            "{}\n{}",
            a.program.name,
            a.tree.to_sexpr_labels()
        );
    }
}

#[test]
fn annotated_trees_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p = ProgramParams {
        max_blocks: 12,
        max_bound: 3,
        ..Default::default()
    };
    let (mut checks, mut pessimistic) = (0, 0);
    for a in analyses(24, 100, &p) {
        let t = persistence_splits(&a.tree, 2, 10, &mut rng).unwrap();
        let r = check_soundness(&t, &a.forest, Budget::default()).unwrap();
        assert!(
            r.passed(),
            "{}: {:?}\n{}",
            a.program.name,
            r.violations,
            t.to_sexpr_labels()
        );
        assert!(r.computed >= r.max_path);
        checks += r.checks;
        pessimistic += usize::from(r.computed > r.max_path);
    }
    eprintln!("{checks} checks, {pessimistic} pessimistic instances");
    assert!(checks > 100 * 4 * 5);
}
