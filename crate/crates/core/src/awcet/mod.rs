//! Abstract WCETs: the multiset algebra and concrete evaluation of trees.

mod gamma;
mod seq;

pub use gamma::{gamma, omega};
pub use seq::WcetSeq;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::cfg::{LoopForest, LoopRef};
use crate::Weight;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AwcetError {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("{0} argument must be positive")]
    ZeroArgument(&'static str),
    #[error("execution count {n} is not a multiple of entry count {e}")]
    NotMultiple { e: u64, n: u64 },
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error("symbolic value `{0}` present; use the symbolic evaluator")]
    SymbolicValuePresent(String),
    #[error("loops {0} and {1} are incomparable")]
    IncomparableLoops(LoopRef, LoopRef),
    #[error("loop `{0}` has no bound")]
    MissingBound(String),
}

/// An abstract WCET `(l, η)`: `η[i]` bounds the `i`-th most expensive
/// execution of a subtree, counted per entry of loop `l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(bound(serialize = "T: fmt::Display"))]
pub struct AbstractWcet<T> {
    #[serde(rename = "loop")]
    pub loop_ref: LoopRef,
    pub seq: WcetSeq<T>,
}

impl<T: Weight> AbstractWcet<T> {
    pub fn new(loop_ref: LoopRef, seq: WcetSeq<T>) -> Self {
        AbstractWcet { loop_ref, seq }
    }

    /// `(⊤, c̄)`.
    pub fn constant(c: T) -> Self {
        Self::new(LoopRef::Top, WcetSeq::constant(c))
    }

    /// The neutral element `0̲ = (⊤, 0̄)`.
    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.loop_ref == LoopRef::Top && self.seq.is_zero()
    }

    /// The WCET of a single execution, `η[0]`.
    pub fn wcet(&self) -> &T {
        self.seq.greatest()
    }

    /// `⊞` on constants: rank-wise sum under the meet of the loops.
    pub fn plus(&self, other: &Self, f: &LoopForest) -> Result<Self, AwcetError> {
        Ok(Self::new(
            f.meet(&self.loop_ref, &other.loop_ref),
            self.seq.ranksum(&other.seq)?,
        ))
    }

    /// `max` on constants: multiset merge under the meet of the loops.
    pub fn max(&self, other: &Self, f: &LoopForest) -> Result<Self, AwcetError> {
        Ok(Self::new(
            f.meet(&self.loop_ref, &other.loop_ref),
            self.seq.merge(&other.seq)?,
        ))
    }

    /// `n ⊙ w`.
    pub fn scalar(&self, n: u64) -> Result<Self, AwcetError> {
        Ok(Self::new(self.loop_ref.clone(), self.seq.scalar(n)?))
    }

    /// Applies an annotation `(l, m)`; `m = None` means unbounded.
    pub fn restrict(
        &self,
        l: &LoopRef,
        m: Option<u64>,
        f: &LoopForest,
    ) -> Result<Self, AwcetError> {
        Ok(Self::new(f.meet(&self.loop_ref, l), self.seq.restrict(m)?))
    }

    /// The loop operator: `body` iterated `bound` times per entry of loop
    /// `header`, followed by `exit`.
    pub fn power(
        &self,
        exit: &Self,
        header: &LoopRef,
        bound: u64,
        f: &LoopForest,
    ) -> Result<Self, AwcetError> {
        if bound == 0 {
            return Err(AwcetError::ZeroArgument("loop bound"));
        }
        if self.loop_ref == *header {
            let total = self.seq.sum_top(bound)?;
            Ok(Self::new(
                exit.loop_ref.clone(),
                WcetSeq::constant(total).ranksum(&exit.seq)?,
            ))
        } else {
            let grouped = self.seq.group_sums(bound)?;
            Ok(Self::new(
                f.meet(&self.loop_ref, &exit.loop_ref),
                grouped.ranksum(&exit.seq)?,
            ))
        }
    }
}

impl<T: fmt::Display> fmt::Display for AbstractWcet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(loop={}, {})", self.loop_ref, self.seq)
    }
}

impl<T: Weight> FromStr for AbstractWcet<T> {
    type Err = AwcetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AwcetError::Parse(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (l, seq) = inner.split_once(',').ok_or_else(bad)?;
        let l = l.trim().strip_prefix("loop=").ok_or_else(bad)?;
        Ok(Self::new(l.parse().map_err(|_| bad())?, seq.parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type A = AbstractWcet<u64>;

    #[test]
    fn text_round_trip() {
        let a: A = "(loop=b2, [11|1])".parse().unwrap();
        assert_eq!(a.loop_ref, LoopRef::header("b2"));
        assert_eq!(a.to_string(), "(loop=b2, [11|1])");
        assert_eq!("(loop=TOP, [|0])".parse::<A>().unwrap(), A::zero());
    }

    #[test]
    fn loop_examples() {
        let f = LoopForest::from_nesting(&[("l1", None), ("h", Some("l1"))]);
        let body: A = "(loop=h, [5,4|3])".parse().unwrap();
        assert_eq!(
            body.power(&A::zero(), &LoopRef::header("h"), 2, &f)
                .unwrap(),
            A::constant(9)
        );
        let body: A = "(loop=l1, [5,4,3|2])".parse().unwrap();
        assert_eq!(
            body.power(&A::zero(), &LoopRef::header("h"), 2, &f)
                .unwrap(),
            "(loop=l1, [9,5|4])".parse().unwrap()
        );
    }
}
