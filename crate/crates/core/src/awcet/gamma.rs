use super::{AbstractWcet, AwcetError, WcetSeq};
use crate::cfg::{LoopForest, LoopRef, Param};
use crate::cft::{Annotation, Cft, Node};
use crate::Weight;

fn concrete(p: &Param) -> Result<u64, AwcetError> {
    p.literal()
        .ok_or_else(|| AwcetError::SymbolicValuePresent(p.to_string()))
}

/// The abstract WCET of a tree ignoring the annotation on its root.
pub fn omega<T: Weight>(t: &Cft, f: &LoopForest) -> Result<AbstractWcet<T>, AwcetError> {
    match &t.node {
        Node::Leaf(leaf) => Ok(AbstractWcet::constant(T::from(concrete(&leaf.wcet)?))),
        Node::Alt { children } => fold(children, f, |a, b| a.max(b, f)),
        Node::Seq { children } => fold(children, f, |a, b| a.plus(b, f)),
        Node::Loop {
            header,
            body,
            bound,
            exit,
        } => {
            let x = concrete(bound)?;
            gamma::<T>(body, f)?.power(&gamma(exit, f)?, &LoopRef::Loop(header.clone()), x, f)
        }
    }
}

fn fold<T: Weight>(
    children: &[Cft],
    f: &LoopForest,
    op: impl Fn(&AbstractWcet<T>, &AbstractWcet<T>) -> Result<AbstractWcet<T>, AwcetError>,
) -> Result<AbstractWcet<T>, AwcetError> {
    let mut it = children.iter();
    let Some(first) = it.next() else {
        return Ok(AbstractWcet::new(LoopRef::Top, WcetSeq::zero()));
    };
    let mut acc = gamma(first, f)?;
    for c in it {
        acc = op(&acc, &gamma(c, f)?)?;
    }
    Ok(acc)
}

/// `γ(t)`: [`omega`] refined by the root annotation, if any.
pub fn gamma<T: Weight>(t: &Cft, f: &LoopForest) -> Result<AbstractWcet<T>, AwcetError> {
    let w = omega(t, f)?;
    match &t.ann {
        None => Ok(w),
        Some(Annotation { loop_ref, max }) => {
            if w.loop_ref == LoopRef::Bottom && *loop_ref != LoopRef::Top {
                return Err(AwcetError::IncomparableLoops(w.loop_ref, loop_ref.clone()));
            }
            w.restrict(loop_ref, Some(concrete(max)?), f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_alt_seq() {
        let f = LoopForest::default();
        let t = Cft::alt(vec![
            Cft::block("a", 3),
            Cft::seq(vec![Cft::block("b", 1), Cft::block("c", 4)]),
        ]);
        assert_eq!(gamma::<u64>(&t, &f).unwrap(), AbstractWcet::constant(5));
        assert_eq!(
            gamma::<u64>(&Cft::empty(), &f).unwrap(),
            AbstractWcet::zero()
        );
    }

    #[test]
    fn persistence() {
        // loop b2 with a hit/miss split; the miss happens once per loop entry.
        let f = LoopForest::from_nesting(&[("b2", None)]);
        let miss = Cft::block("m", 11).with_annotation(Annotation::new(LoopRef::header("b2"), 1));
        let body = Cft::alt(vec![Cft::block("h", 1), miss]);
        let inner = gamma::<u64>(&body, &f).unwrap();
        assert_eq!(inner.to_string(), "(loop=b2, [11|1])");
        assert_eq!(inner.seq.eval(1, 4).unwrap(), 14);
        let t = Cft::looped("b2", body, 4u64, Cft::empty());
        assert_eq!(gamma::<u64>(&t, &f).unwrap(), AbstractWcet::constant(14));
    }

    #[test]
    fn symbolic_values_are_rejected() {
        let f = LoopForest::default();
        assert_eq!(
            gamma::<u64>(&Cft::block("a", "w"), &f).unwrap_err(),
            AwcetError::SymbolicValuePresent("w".into())
        );
    }
}
