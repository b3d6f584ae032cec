use super::{Count, Formula, Header, SymbolicError};
use crate::awcet::{gamma, AbstractWcet};
use crate::cfg::{LoopForest, Param};
use crate::cft::{Cft, Node};
use crate::Weight;

fn count(p: &Param) -> Count {
    match p {
        Param::Lit(n) => Count::Int(*n),
        Param::Sym(v) => Count::Var(v.clone()),
    }
}

fn is_concrete(t: &Cft) -> bool {
    let own = match &t.node {
        Node::Leaf(l) => !l.wcet.is_symbolic(),
        Node::Loop { bound, .. } => !bound.is_symbolic(),
        Node::Alt { .. } | Node::Seq { .. } => true,
    };
    own && t.ann.as_ref().is_none_or(|a| !a.max.is_symbolic())
        && t.children().into_iter().all(is_concrete)
}

/// The formula of a tree. With `fold_constants`, every subtree free of
/// symbolic values is replaced by its abstract WCET.
pub fn gamma_symbolic<T: Weight>(
    t: &Cft,
    f: &LoopForest,
    fold_constants: bool,
) -> Result<Formula<T>, SymbolicError> {
    if fold_constants && is_concrete(t) {
        return Ok(Formula::Const(gamma(t, f)?));
    }
    let w = match &t.node {
        Node::Leaf(l) => match &l.wcet {
            Param::Lit(c) => Formula::Const(AbstractWcet::constant(T::from(*c))),
            Param::Sym(x) => Formula::Id(x.clone()),
        },
        Node::Alt { children } => Formula::max(
            children
                .iter()
                .map(|c| gamma_symbolic(c, f, fold_constants))
                .collect::<Result<_, _>>()?,
        ),
        Node::Seq { children } => Formula::plus(
            children
                .iter()
                .map(|c| gamma_symbolic(c, f, fold_constants))
                .collect::<Result<_, _>>()?,
        ),
        Node::Loop {
            header,
            body,
            bound,
            exit,
        } => Formula::power(
            gamma_symbolic(body, f, fold_constants)?,
            gamma_symbolic(exit, f, fold_constants)?,
            Header::Block(header.clone()),
            count(bound),
        ),
    };
    Ok(match &t.ann {
        None => w,
        Some(a) => Formula::restrict(w, Header::from(&a.loop_ref), count(&a.max)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::LoopRef;
    use crate::cft::Annotation;

    #[test]
    fn formula_of_a_split_loop() {
        let f = LoopForest::from_nesting(&[("b2", None)]);
        let miss = Cft::block("m", "wm").with_annotation(Annotation::new(LoopRef::header("b2"), 1));
        let t = Cft::looped(
            "b2",
            Cft::alt(vec![Cft::block("h", 1), miss]),
            "n",
            Cft::empty(),
        );
        let w: Formula<u64> = gamma_symbolic(&t, &f, false).unwrap();
        assert_eq!(
            w.to_string(),
            "(pow (max (l=TOP,[|1]) (ann wm b2 1)) (l=TOP,[|0]) b2 n)"
        );
        assert_eq!(w.operand_count(), 3);
    }

    #[test]
    fn concrete_subtrees_fold() {
        let f = LoopForest::default();
        let t = Cft::seq(vec![
            Cft::block("a", 2),
            Cft::block("b", 3),
            Cft::block("c", "x"),
        ]);
        let w: Formula<u64> = gamma_symbolic(&t, &f, true).unwrap();
        assert_eq!(w.to_string(), "(+ (l=TOP,[|2]) (l=TOP,[|3]) x)");
        let t = Cft::seq(vec![Cft::block("a", 2), Cft::block("b", 3)]);
        assert_eq!(
            gamma_symbolic::<u64>(&t, &f, true).unwrap().to_string(),
            "(l=TOP,[|5])"
        );
    }
}
