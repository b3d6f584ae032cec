//! Turning a reducible CFG into a control-flow tree.

mod dag;
mod tree;

pub use dag::{forced_passage, loop_to_dag, Dag, DagNode};
pub use tree::{build_cft, dag_to_cft, rename_duplicates};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RestructureError {
    #[error("loop `{0}` has no bound")]
    MissingBound(String),
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::cfg::{build_loop_forest, Block, Cfg, LoopRef, Param};

    fn nested() -> (Cfg, crate::cfg::LoopForest) {
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
        let bounds: BTreeMap<String, Param> = [
            ("b1".to_string(), Param::from("x_b1")),
            ("b2".to_string(), Param::from("x_b2")),
        ]
        .into();
        f.set_bounds(&bounds).unwrap();
        (g, f)
    }

    #[test]
    fn nested_loop_tree() {
        let (g, f) = nested();
        let t = build_cft(&g, &f).unwrap();
        assert_eq!(
            t.to_string(),
            "(seq (loop b1 (seq b1 (alt b6 (loop b2 (seq b2 b4) x_b2 b2)) b3) x_b1 b1) b5)"
        );
        assert_eq!(
            t.to_sexpr_labels(),
            "(seq (loop b1 (seq b1 (alt b6 (loop b2 (seq b2 b4) x_b2 b2#1)) b3) x_b1 b1#1) b5)"
        );
    }

    #[test]
    fn loop_body_tree() {
        let (g, f) = nested();
        let d = loop_to_dag(&g, &f, &LoopRef::header("b1"));
        let t = dag_to_cft(&d, d.start(), d.next(), &g, &f).unwrap();
        assert_eq!(
            t.to_string(),
            "(seq b1 (alt b6 (loop b2 (seq b2 b4) x_b2 b2)) b3)"
        );
    }

    #[test]
    fn missing_bound() {
        let (g, _) = nested();
        let f = build_loop_forest(&g).unwrap();
        assert!(matches!(
            build_cft(&g, &f),
            Err(RestructureError::MissingBound(_))
        ));
    }

    #[test]
    fn straight_line_and_single_block() {
        let g = Cfg::new(
            vec![Block::new("a", 1), Block::new("b", 2)],
            &[("a", "b")],
            "a",
            "b",
        )
        .unwrap();
        let f = build_loop_forest(&g).unwrap();
        assert_eq!(build_cft(&g, &f).unwrap().to_string(), "(seq a b)");
        let g = Cfg::new(vec![Block::new("b", 1)], &[] as &[(&str, &str)], "b", "b").unwrap();
        let f = build_loop_forest(&g).unwrap();
        let d = loop_to_dag(&g, &f, &LoopRef::Top);
        assert_eq!(d.len(), 3);
        assert_eq!(build_cft(&g, &f).unwrap().to_string(), "b");
    }

    #[test]
    fn if_without_else_gives_empty_branch() {
        let g = Cfg::new(
            vec![Block::new("a", 1), Block::new("b", 2), Block::new("c", 3)],
            &[("a", "b"), ("b", "c"), ("a", "c")],
            "a",
            "c",
        )
        .unwrap();
        let f = build_loop_forest(&g).unwrap();
        assert_eq!(
            build_cft(&g, &f).unwrap().to_string(),
            "(seq a (alt (seq) b) c)"
        );
    }
}
