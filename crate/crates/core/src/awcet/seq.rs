//! Eventually-constant non-increasing sequences (the multisets of abstract WCETs).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::AwcetError;
use crate::Weight;

/// Run-length encoded non-increasing sequence with an infinitely repeated tail.
///
/// `runs` holds `(value, count)` pairs with strictly decreasing values, all
/// strictly greater than `tail`, and counts of at least one. This canonical
/// form makes structural equality coincide with sequence equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WcetSeq<T> {
    runs: Vec<(T, u64)>,
    tail: T,
}

/// Appends a run while keeping the canonical form.
fn push_run<T: Weight>(
    runs: &mut Vec<(T, u64)>,
    tail: &T,
    value: T,
    count: u64,
) -> Result<(), AwcetError> {
    if count == 0 || value <= *tail {
        return Ok(());
    }
    if let Some(last) = runs.last_mut() {
        if last.0 == value {
            last.1 = last.1.checked_add(count).ok_or(AwcetError::Overflow)?;
            return Ok(());
        }
        debug_assert!(last.0 > value, "runs must be pushed in decreasing order");
    }
    runs.push((value, count));
    Ok(())
}

impl<T: Weight> WcetSeq<T> {
    /// The constant sequence `c̄`.
    pub fn constant(c: T) -> Self {
        WcetSeq {
            runs: Vec::new(),
            tail: c,
        }
    }

    /// `0̄`.
    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    /// Builds a sequence from an arbitrary multiset of finite elements and a
    /// tail. Elements not above the tail are absorbed by it.
    pub fn new(mut prefix: Vec<T>, tail: T) -> Self {
        prefix.sort_by(|a, b| b.cmp(a));
        let mut runs: Vec<(T, u64)> = Vec::new();
        for v in prefix {
            if v <= tail {
                break;
            }
            match runs.last_mut() {
                Some(last) if last.0 == v => last.1 += 1,
                _ => runs.push((v, 1)),
            }
        }
        WcetSeq { runs, tail }
    }

    /// Builds from `(value, count)` runs given in any order.
    pub fn from_runs(mut runs: Vec<(T, u64)>, tail: T) -> Result<Self, AwcetError> {
        runs.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out = Vec::with_capacity(runs.len());
        for (v, c) in runs {
            push_run(&mut out, &tail, v, c)?;
        }
        Ok(WcetSeq { runs: out, tail })
    }

    pub fn runs(&self) -> &[(T, u64)] {
        &self.runs
    }

    pub fn tail(&self) -> &T {
        &self.tail
    }

    pub fn is_constant(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.runs.is_empty() && self.tail.is_zero()
    }

    /// Number of elements strictly above the tail (saturating).
    pub fn prefix_len(&self) -> u64 {
        self.runs
            .iter()
            .fold(0u64, |acc, &(_, c)| acc.saturating_add(c))
    }

    /// The finite prefix, expanded. Intended for small sequences.
    pub fn prefix(&self) -> Vec<T> {
        self.runs
            .iter()
            .flat_map(|(v, c)| std::iter::repeat_n(v.clone(), *c as usize))
            .collect()
    }

    /// `η[n]`, 0-based: `η[0]` is the greatest element.
    pub fn index(&self, n: u64) -> &T {
        let mut remaining = n;
        for (v, c) in &self.runs {
            if remaining < *c {
                return v;
            }
            remaining -= c;
        }
        &self.tail
    }

    pub fn greatest(&self) -> &T {
        self.index(0)
    }

    /// `η|_n`: the `n` greatest elements followed by zeros; `None` stands for
    /// `∞` and leaves the sequence unchanged.
    pub fn restrict(&self, n: Option<u64>) -> Result<Self, AwcetError> {
        let Some(mut n) = n else {
            return Ok(self.clone());
        };
        let zero = T::zero();
        let mut runs = Vec::new();
        for (v, c) in &self.runs {
            if n == 0 {
                break;
            }
            let take = n.min(*c);
            push_run(&mut runs, &zero, v.clone(), take)?;
            n -= take;
        }
        push_run(&mut runs, &zero, self.tail.clone(), n)?;
        Ok(WcetSeq { runs, tail: zero })
    }

    /// `a ⊎ b`: the larger tail survives and finite elements above it from
    /// both operands are pooled.
    pub fn merge(&self, other: &Self) -> Result<Self, AwcetError> {
        let tail = (&self.tail).max(&other.tail).clone();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.runs, &other.runs);
        let mut runs = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            let pick_a = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0 >= y.0,
                (Some(_), None) => true,
                _ => false,
            };
            let (v, c) = if pick_a {
                i += 1;
                &a[i - 1]
            } else {
                j += 1;
                &b[j - 1]
            };
            push_run(&mut runs, &tail, v.clone(), *c)?;
        }
        Ok(WcetSeq { runs, tail })
    }

    /// `η ⊗ k`: every finite element repeated `k` times. `None` is `∞`,
    /// which yields the constant sequence of the greatest element.
    pub fn repeat(&self, k: Option<u64>) -> Result<Self, AwcetError> {
        match k {
            None => Ok(Self::constant(self.greatest().clone())),
            Some(0) => Err(AwcetError::ZeroArgument("multiplicity")),
            Some(k) => {
                let runs = self
                    .runs
                    .iter()
                    .map(|(v, c)| {
                        c.checked_mul(k)
                            .map(|c| (v.clone(), c))
                            .ok_or(AwcetError::Overflow)
                    })
                    .collect::<Result<_, _>>()?;
                Ok(WcetSeq {
                    runs,
                    tail: self.tail.clone(),
                })
            }
        }
    }

    /// `a ⊕ b`: rank-wise sum.
    pub fn ranksum(&self, other: &Self) -> Result<Self, AwcetError> {
        let add = |x: &T, y: &T| x.add_checked(y).ok_or(AwcetError::Overflow);
        let tail = add(&self.tail, &other.tail)?;
        let mut runs = Vec::with_capacity(self.runs.len() + other.runs.len());
        let mut ca = Cursor::new(self);
        let mut cb = Cursor::new(other);
        while !(ca.done() && cb.done()) {
            let step = ca.remaining().min(cb.remaining());
            push_run(&mut runs, &tail, add(ca.value(), cb.value())?, step)?;
            ca.advance(step);
            cb.advance(step);
        }
        Ok(WcetSeq { runs, tail })
    }

    /// `n ⊙ η`: every rank multiplied by `n`.
    pub fn scalar(&self, n: u64) -> Result<Self, AwcetError> {
        if n == 0 {
            return Ok(Self::zero());
        }
        let runs = self
            .runs
            .iter()
            .map(|(v, c)| v.times(n).map(|v| (v, *c)).ok_or(AwcetError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(WcetSeq {
            runs,
            tail: self.tail.times(n).ok_or(AwcetError::Overflow)?,
        })
    }

    /// Sum of the `k` greatest elements.
    pub fn sum_top(&self, k: u64) -> Result<T, AwcetError> {
        let mut left = k;
        let mut acc = T::zero();
        for (v, c) in &self.runs {
            if left == 0 {
                break;
            }
            let take = left.min(*c);
            acc = acc
                .add_checked(&v.times(take).ok_or(AwcetError::Overflow)?)
                .ok_or(AwcetError::Overflow)?;
            left -= take;
        }
        if left > 0 {
            acc = acc
                .add_checked(&self.tail.times(left).ok_or(AwcetError::Overflow)?)
                .ok_or(AwcetError::Overflow)?;
        }
        Ok(acc)
    }

    /// The sequence of consecutive `x`-sized block sums:
    /// `η'[i] = η[i·x] + … + η[i·x + x − 1]`.
    pub fn group_sums(&self, x: u64) -> Result<Self, AwcetError> {
        if x == 0 {
            return Err(AwcetError::ZeroArgument("group size"));
        }
        let tail = self.tail.times(x).ok_or(AwcetError::Overflow)?;
        let mut runs = Vec::new();
        let mut cur = Cursor::new(self);
        while !cur.done() {
            let whole = cur.remaining() / x;
            if whole > 0 {
                let v = cur.value().times(x).ok_or(AwcetError::Overflow)?;
                push_run(&mut runs, &tail, v, whole)?;
                cur.advance(whole * x);
                continue;
            }
            // One group straddling run boundaries (or the tail).
            let mut need = x;
            let mut acc = T::zero();
            while need > 0 {
                let step = need.min(cur.remaining());
                let part = cur.value().times(step).ok_or(AwcetError::Overflow)?;
                acc = acc.add_checked(&part).ok_or(AwcetError::Overflow)?;
                cur.advance(step);
                need -= step;
            }
            push_run(&mut runs, &tail, acc, 1)?;
        }
        Ok(WcetSeq { runs, tail })
    }

    /// Sum of the `n` greatest elements of `η ⊗ e`: the WCET of `n`
    /// executions spread over `e` entries of the enclosing loop.
    pub fn eval(&self, e: u64, n: u64) -> Result<T, AwcetError> {
        if e == 0 || n == 0 {
            return Err(AwcetError::ZeroArgument("eval"));
        }
        if !n.is_multiple_of(e) {
            return Err(AwcetError::NotMultiple { e, n });
        }
        self.repeat(Some(e))?.sum_top(n)
    }
}

/// Walks the ranks of a sequence run by run; the tail is an endless run.
struct Cursor<'a, T> {
    seq: &'a WcetSeq<T>,
    run: usize,
    used: u64,
}

impl<'a, T: Weight> Cursor<'a, T> {
    fn new(seq: &'a WcetSeq<T>) -> Self {
        Cursor {
            seq,
            run: 0,
            used: 0,
        }
    }

    fn done(&self) -> bool {
        self.run >= self.seq.runs.len()
    }

    fn value(&self) -> &'a T {
        self.seq.runs.get(self.run).map_or(&self.seq.tail, |r| &r.0)
    }

    fn remaining(&self) -> u64 {
        self.seq
            .runs
            .get(self.run)
            .map_or(u64::MAX, |r| r.1 - self.used)
    }

    fn advance(&mut self, k: u64) {
        if self.done() {
            return;
        }
        self.used += k;
        if self.used == self.seq.runs[self.run].1 {
            self.run += 1;
            self.used = 0;
        }
    }
}

/// Runs longer than this are printed as `v*count`.
const EXPAND_LIMIT: u64 = 8;

impl<T: fmt::Display> fmt::Display for WcetSeq<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        for (v, c) in &self.runs {
            if *c > EXPAND_LIMIT {
                if !first {
                    f.write_str(",")?;
                }
                write!(f, "{v}*{c}")?;
                first = false;
            } else {
                for _ in 0..*c {
                    if !first {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                    first = false;
                }
            }
        }
        write!(f, "|{}]", self.tail)
    }
}

impl<T: Weight> FromStr for WcetSeq<T> {
    type Err = AwcetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AwcetError::Parse(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (prefix, tail) = inner.split_once('|').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<T>().map_err(|_| bad());
        let tail = num(tail)?;
        let mut runs = Vec::new();
        if !prefix.trim().is_empty() {
            let mut prev: Option<T> = None;
            for item in prefix.split(',') {
                let (v, c) = match item.split_once('*') {
                    Some((v, c)) => (num(v)?, c.trim().parse::<u64>().map_err(|_| bad())?),
                    None => (num(item)?, 1),
                };
                if prev.as_ref().is_some_and(|p| p.cmp(&v) == Ordering::Less) {
                    return Err(bad());
                }
                prev = Some(v.clone());
                runs.push((v, c));
            }
        }
        Self::from_runs(runs, tail)
    }
}

impl<T: fmt::Display> Serialize for WcetSeq<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
