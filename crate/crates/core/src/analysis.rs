//! The end-to-end pipeline from a program document to a WCET formula.

use thiserror::Error;

use crate::awcet::{gamma, AbstractWcet, AwcetError};
use crate::cfg::{build_loop_forest, CfgError, DocumentError, LoopForest, Program};
use crate::cft::{attach_annotation, Annotation, Cft, CftError};
use crate::oracle::OracleError;
use crate::restructure::{build_cft, RestructureError};
use crate::symbolic::{gamma_symbolic, simplify_with_fuel, Formula, SymbolicError};
use crate::Weight;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error("loop bound given for `{0}`, which is not a loop header")]
    NotAHeader(String),
    #[error(transparent)]
    Restructure(#[from] RestructureError),
    #[error(transparent)]
    Cft(#[from] CftError),
    #[error(transparent)]
    Awcet(#[from] AwcetError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl AnalysisError {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, AnalysisError::Cfg(CfgError::IrreducibleLoop(_)))
    }
}

/// A program together with its loop structure and trees.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub program: Program,
    pub forest: LoopForest,
    /// The restructured tree, before any split or annotation.
    pub base_tree: Cft,
    /// The tree with leaf splits and annotations applied.
    pub tree: Cft,
}

impl Analysis {
    /// Loop detection, restructuring, leaf splits, then annotations.
    pub fn new(program: Program) -> Result<Self, AnalysisError> {
        let mut forest = build_loop_forest(&program.cfg)?;
        forest
            .set_bounds(&program.loop_bounds)
            .map_err(AnalysisError::NotAHeader)?;
        let base_tree = build_cft(&program.cfg, &forest)?;
        let mut tree = base_tree.clone();
        for s in &program.splits {
            tree.split_leaf(&s.block, &s.variants)?;
        }
        for a in &program.annotations {
            tree = attach_annotation(
                tree,
                &a.target,
                Annotation::new(a.loop_ref.clone(), a.max.clone()),
            )?;
        }
        Ok(Analysis {
            program,
            forest,
            base_tree,
            tree,
        })
    }

    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        Self::new(crate::cfg::parse_program(text)?)
    }

    /// The abstract WCET of a fully concrete program.
    pub fn gamma<T: Weight>(&self) -> Result<AbstractWcet<T>, AnalysisError> {
        Ok(gamma(&self.tree, &self.forest)?)
    }

    /// The formula of the tree, with concrete subtrees folded.
    pub fn formula<T: Weight>(&self) -> Result<Formula<T>, AnalysisError> {
        Ok(gamma_symbolic(&self.tree, &self.forest, true)?)
    }

    /// The formula of the tree without any folding.
    pub fn raw_formula<T: Weight>(&self) -> Result<Formula<T>, AnalysisError> {
        Ok(gamma_symbolic(&self.tree, &self.forest, false)?)
    }

    pub fn simplified<T: Weight>(&self, fuel: usize) -> Result<Formula<T>, AnalysisError> {
        Ok(simplify_with_fuel(&self.formula()?, &self.forest, fuel)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::DEFAULT_FUEL;

    const NESTED: &str = r#"{
        "name": "nested",
        "blocks": [
            {"id": "b1", "wcet": 2}, {"id": "b2", "wcet": 3}, {"id": "b3", "wcet": 1},
            {"id": "b4", "wcet": 5}, {"id": "b5", "wcet": 1}, {"id": "b6", "wcet": 4}
        ],
        "edges": [["b1","b2"],["b1","b6"],["b1","b5"],["b2","b4"],["b4","b2"],["b2","b3"],["b6","b3"],["b3","b1"]],
        "entry": "b1",
        "exit": "b5",
        "loop_bounds": {"b1": 3, "b2": "n"}
    }"#;

    #[test]
    fn symbolic_bound_survives_simplification() {
        let a = Analysis::parse(NESTED).unwrap();
        let w: Formula<u64> = a.simplified(DEFAULT_FUEL).unwrap();
        let s = w.to_string();
        assert_eq!(s.matches("(pow").count(), 2, "{s}");
        assert!(w.identifiers().counts.contains("n"));
        assert_eq!(w.operand_count(), 7);
    }

    #[test]
    fn bound_on_a_non_header() {
        let doc = NESTED.replace(r#""b2": "n""#, r#""b5": 2"#);
        assert!(matches!(Analysis::parse(&doc), Err(AnalysisError::NotAHeader(h)) if h == "b5"));
    }

    #[test]
    fn irreducible_is_flagged() {
        let doc = r#"{"name": "tri", "blocks": [{"id": "a", "wcet": 1}, {"id": "b", "wcet": 1}, {"id": "c", "wcet": 1}, {"id": "d", "wcet": 1}],
            "edges": [["a","b"],["a","c"],["b","c"],["c","b"],["b","d"]], "entry": "a", "exit": "d"}"#;
        assert!(Analysis::parse(doc).unwrap_err().is_irreducible());
    }
}
