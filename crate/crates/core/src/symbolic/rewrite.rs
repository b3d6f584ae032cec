//! The rewriting system that normalizes formulas.
//!
//! Associativity and commutativity are structural (see [`Formula::plus`]),
//! so the rules below only cover neutral elements, multiplication,
//! annotations, loops, restricted distributivity and constant folding.

use std::collections::BTreeMap;

use rand::Rng;

use super::{Count, Formula, Header, SymbolicError};
use crate::awcet::{AbstractWcet, WcetSeq};
use crate::cfg::{LoopForest, LoopRef};
use crate::Weight;

/// Default number of rule applications allowed per simplification.
pub const DEFAULT_FUEL: usize = 10_000;

/// `DEFAULT_FUEL`, unless the `SYMWCET_FUEL` environment variable holds a
/// valid count.
pub fn default_fuel() -> usize {
    std::env::var("SYMWCET_FUEL")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_FUEL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    NeutralPlus,
    NeutralMax,
    LikeTerms,
    FoldPlus,
    FoldMax,
    Distribute,
    ScalarOne,
    ScalarProduct,
    ScalarIntOutward,
    ScalarVarOrder,
    ScalarZeroAbsorb,
    ScalarIntoConst,
    ScalarOfZero,
    ScalarIntoAnn,
    ScalarZero,
    FoldScalar,
    AnnZero,
    AnnMerge,
    FoldAnn,
    FoldAnnScalar,
    LoopExit,
    LoopZero,
    FoldPower,
}

impl Rule {
    pub const ALL: [Rule; 23] = [
        Rule::NeutralPlus,
        Rule::NeutralMax,
        Rule::LikeTerms,
        Rule::FoldPlus,
        Rule::FoldMax,
        Rule::Distribute,
        Rule::ScalarOne,
        Rule::ScalarProduct,
        Rule::ScalarIntOutward,
        Rule::ScalarVarOrder,
        Rule::ScalarZeroAbsorb,
        Rule::ScalarIntoConst,
        Rule::ScalarOfZero,
        Rule::ScalarIntoAnn,
        Rule::ScalarZero,
        Rule::FoldScalar,
        Rule::AnnZero,
        Rule::AnnMerge,
        Rule::FoldAnn,
        Rule::FoldAnnScalar,
        Rule::LoopExit,
        Rule::LoopZero,
        Rule::FoldPower,
    ];
}

/// The loop component of `w` under every binding, when it is fixed.
pub fn static_loop<T: Weight>(w: &Formula<T>, f: &LoopForest) -> Option<LoopRef> {
    match w {
        Formula::Const(a) => Some(a.loop_ref.clone()),
        Formula::Id(_) => None,
        Formula::Restrict {
            operand, header, ..
        } => Some(f.meet(&static_loop(operand, f)?, &header.loop_ref()?)),
        Formula::Scalar { operand, .. } => static_loop(operand, f),
        Formula::Plus(ws) | Formula::Max(ws) => {
            let mut acc = LoopRef::Top;
            for w in ws {
                acc = f.meet(&acc, &static_loop(w, f)?);
            }
            Some(acc)
        }
        Formula::Power {
            body, exit, header, ..
        } => {
            let lb = static_loop(body, f);
            let h = header.loop_ref()?;
            if lb.as_ref() == Some(&h) {
                static_loop(exit, f)
            } else {
                Some(f.meet(&lb?, &static_loop(exit, f)?))
            }
        }
    }
}

/// `w` evaluates to a zero sequence under every binding.
pub fn always_zero<T: Weight>(w: &Formula<T>) -> bool {
    match w {
        Formula::Const(a) => a.seq.is_zero(),
        Formula::Id(_) => false,
        Formula::Restrict { operand, count, .. } => *count == Count::Int(0) || always_zero(operand),
        Formula::Scalar { coeff, operand } => *coeff == Count::Int(0) || always_zero(operand),
        Formula::Plus(ws) | Formula::Max(ws) => ws.iter().all(always_zero),
        Formula::Power { body, exit, .. } => always_zero(body) && always_zero(exit),
    }
}

/// `w` evaluates to a constant sequence under every binding.
pub fn always_flat<T: Weight>(w: &Formula<T>, f: &LoopForest) -> bool {
    if always_zero(w) {
        return true;
    }
    match w {
        Formula::Const(a) => a.seq.is_constant(),
        Formula::Id(_) | Formula::Restrict { .. } => false,
        Formula::Scalar { operand, .. } => always_flat(operand, f),
        Formula::Plus(ws) | Formula::Max(ws) => ws.iter().all(|w| always_flat(w, f)),
        Formula::Power {
            body, exit, header, ..
        } => {
            always_flat(exit, f)
                && (always_flat(body, f)
                    || (header.loop_ref().is_some() && static_loop(body, f) == header.loop_ref()))
        }
    }
}

fn as_const<T>(w: &Formula<T>) -> Option<&AbstractWcet<T>> {
    match w {
        Formula::Const(a) => Some(a),
        _ => None,
    }
}

/// Splits `w` into its annotations, its integer coefficient and the rest.
fn coefficient<T: Weight>(w: &Formula<T>) -> (Vec<(&Header, &Count)>, u64, &Formula<T>) {
    let mut anns = Vec::new();
    let mut cur = w;
    while let Formula::Restrict {
        operand,
        header,
        count,
    } = cur
    {
        anns.push((header, count));
        cur = operand;
    }
    match cur {
        Formula::Scalar {
            coeff: Count::Int(c),
            operand,
        } => (anns, *c, operand),
        w => (anns, 1, w),
    }
}

fn fold_consts<T: Weight>(
    ws: &[Formula<T>],
    rebuild: fn(Vec<Formula<T>>) -> Formula<T>,
    op: impl Fn(&AbstractWcet<T>, &AbstractWcet<T>) -> Option<AbstractWcet<T>>,
) -> Option<Formula<T>> {
    let (consts, rest): (Vec<&Formula<T>>, Vec<&Formula<T>>) =
        ws.iter().partition(|w| as_const(w).is_some());
    if consts.len() < 2 {
        return None;
    }
    let mut acc = as_const(consts[0]).unwrap().clone();
    for c in &consts[1..] {
        acc = op(&acc, as_const(c).unwrap())?;
    }
    let mut out: Vec<Formula<T>> = rest.into_iter().cloned().collect();
    out.push(Formula::Const(acc));
    Some(rebuild(out))
}

fn merge_annotations<T: Weight>(ws: &[Formula<T>]) -> Option<Formula<T>> {
    let mut groups: BTreeMap<(&Header, &Count), Vec<Formula<T>>> = BTreeMap::new();
    let mut out = Vec::new();
    for w in ws {
        match w {
            Formula::Restrict {
                operand,
                header: header @ Header::Var(_),
                count,
            } => groups
                .entry((header, count))
                .or_default()
                .push((**operand).clone()),
            w => out.push(w.clone()),
        }
    }
    if groups.values().all(|g| g.len() < 2) {
        return None;
    }
    for ((h, c), operands) in groups {
        out.push(Formula::restrict(
            Formula::plus(operands),
            h.clone(),
            c.clone(),
        ));
    }
    Some(Formula::plus(out))
}

/// Applies `rule` at the root of `w`, if it matches.
pub fn apply_rule<T: Weight>(rule: Rule, w: &Formula<T>, f: &LoopForest) -> Option<Formula<T>> {
    use Formula as F;
    match (rule, w) {
        (Rule::NeutralPlus, F::Plus(ws)) if ws.iter().any(F::is_zero) => Some(F::plus(
            ws.iter().filter(|w| !w.is_zero()).cloned().collect(),
        )),
        (Rule::NeutralMax, F::Max(ws)) if ws.iter().any(F::is_zero) => Some(F::max(
            ws.iter().filter(|w| !w.is_zero()).cloned().collect(),
        )),
        (Rule::FoldPlus, F::Plus(ws)) => fold_consts(ws, F::plus, |a, b| a.plus(b, f).ok()),
        (Rule::FoldMax, F::Max(ws)) => fold_consts(ws, F::max, |a, b| a.max(b, f).ok()),
        (Rule::LikeTerms, F::Plus(ws)) => like_terms(ws),
        (Rule::AnnMerge, F::Plus(ws)) => merge_annotations(ws),
        (Rule::Distribute, F::Max(ws)) => distribute(ws, f),

        (
            Rule::ScalarOne,
            F::Scalar {
                coeff: Count::Int(1),
                operand,
            },
        ) => Some((**operand).clone()),
        (
            Rule::ScalarProduct,
            F::Scalar {
                coeff: Count::Int(a),
                operand,
            },
        ) => match &**operand {
            F::Scalar {
                coeff: Count::Int(b),
                operand: inner,
            } => Some(F::scalar(Count::Int(a.checked_mul(*b)?), (**inner).clone())),
            _ => None,
        },
        (
            Rule::ScalarIntOutward,
            F::Scalar {
                coeff: v @ Count::Var(_),
                operand,
            },
        ) => match &**operand {
            F::Scalar {
                coeff: c @ Count::Int(_),
                operand: inner,
            } => Some(F::scalar(
                c.clone(),
                F::scalar(v.clone(), (**inner).clone()),
            )),
            _ => None,
        },
        (
            Rule::ScalarVarOrder,
            F::Scalar {
                coeff: a @ Count::Var(_),
                operand,
            },
        ) => match &**operand {
            F::Scalar {
                coeff: b @ Count::Var(_),
                operand: inner,
            } if b < a => Some(F::scalar(
                b.clone(),
                F::scalar(a.clone(), (**inner).clone()),
            )),
            _ => None,
        },
        (
            Rule::ScalarZeroAbsorb,
            F::Scalar {
                coeff: Count::Int(0),
                operand,
            },
        ) => match &**operand {
            F::Scalar { operand: inner, .. } => Some(F::scalar(Count::Int(0), (**inner).clone())),
            _ => None,
        },
        (
            Rule::ScalarIntoConst,
            F::Scalar {
                coeff: Count::Int(k),
                operand,
            },
        ) => match &**operand {
            F::Scalar {
                coeff: Count::Var(_),
                ..
            } => map_chain(operand, |c| c.scalar(*k).ok()),
            _ => None,
        },
        (Rule::ScalarOfZero, F::Scalar { operand, .. }) => match &**operand {
            F::Const(a) if a.seq.is_zero() => Some((**operand).clone()),
            _ => None,
        },
        (Rule::ScalarIntoAnn, F::Scalar { coeff, operand }) => match &**operand {
            F::Restrict {
                operand: inner,
                header,
                count,
            } => Some(F::restrict(
                F::scalar(coeff.clone(), (**inner).clone()),
                header.clone(),
                count.clone(),
            )),
            _ => None,
        },
        (
            Rule::ScalarZero,
            F::Scalar {
                coeff: Count::Int(0),
                operand,
            },
        ) if as_const(operand).is_none() => {
            let l = static_loop(operand, f)?;
            Some(F::Const(AbstractWcet::new(l, WcetSeq::zero())))
        }
        (
            Rule::FoldScalar,
            F::Scalar {
                coeff: Count::Int(n),
                operand,
            },
        ) => Some(F::Const(as_const(operand)?.scalar(*n).ok()?)),

        (
            Rule::AnnZero,
            F::Restrict {
                operand, header, ..
            },
        ) => {
            let a = as_const(operand)?;
            if !a.seq.is_zero() {
                return None;
            }
            Some(F::Const(AbstractWcet::new(
                f.meet(&a.loop_ref, &header.loop_ref()?),
                WcetSeq::zero(),
            )))
        }
        (
            Rule::FoldAnn,
            F::Restrict {
                operand,
                header,
                count: Count::Int(m),
            },
        ) => Some(F::Const(
            as_const(operand)?
                .restrict(&header.loop_ref()?, Some(*m), f)
                .ok()?,
        )),
        (
            Rule::FoldAnnScalar,
            F::Restrict {
                operand,
                header,
                count: Count::Int(m),
            },
        ) => match &**operand {
            F::Scalar { .. } => {
                let h = header.loop_ref()?;
                map_chain(operand, |c| c.restrict(&h, Some(*m), f).ok())
            }
            _ => None,
        },

        (
            Rule::LoopExit,
            F::Power {
                body,
                exit,
                header,
                count,
            },
        ) if !exit.is_zero() => Some(F::plus(vec![
            F::power((**body).clone(), F::zero(), header.clone(), count.clone()),
            (**exit).clone(),
        ])),
        (
            Rule::LoopZero,
            F::Power {
                body,
                exit,
                header: h @ Header::Block(_),
                count,
            },
        ) => {
            let a = as_const(body)?;
            if !a.seq.is_zero() || !exit.is_zero() || *count == Count::Int(0) {
                return None;
            }
            let l = if Some(&a.loop_ref) == h.loop_ref().as_ref() {
                LoopRef::Top
            } else {
                a.loop_ref.clone()
            };
            Some(F::Const(AbstractWcet::new(l, WcetSeq::zero())))
        }
        (
            Rule::FoldPower,
            F::Power {
                body,
                exit,
                header,
                count: Count::Int(n),
            },
        ) => {
            let (b, e) = (as_const(body)?, as_const(exit)?);
            Some(F::Const(b.power(e, &header.loop_ref()?, *n, f).ok()?))
        }
        _ => None,
    }
}

/// Rewrites the constant at the bottom of a chain of scalar products.
fn map_chain<T: Weight>(
    w: &Formula<T>,
    op: impl FnOnce(&AbstractWcet<T>) -> Option<AbstractWcet<T>>,
) -> Option<Formula<T>> {
    match w {
        Formula::Scalar { coeff, operand } => {
            Some(Formula::scalar(coeff.clone(), map_chain(operand, op)?))
        }
        Formula::Const(c) => Some(Formula::Const(op(c)?)),
        _ => None,
    }
}

fn like_terms<T: Weight>(ws: &[Formula<T>]) -> Option<Formula<T>> {
    type Key<'a, T> = (Vec<(&'a Header, &'a Count)>, &'a Formula<T>);
    let mut groups: BTreeMap<Key<'_, T>, (u64, usize)> = BTreeMap::new();
    let mut consts = Vec::new();
    // Zero multiples are idempotent under `⊞`.
    let mut zeros = std::collections::BTreeSet::new();
    for w in ws {
        if as_const(w).is_some() {
            consts.push(w.clone());
            continue;
        }
        let (anns, c, base) = coefficient(w);
        if c == 0 {
            zeros.insert(w);
            continue;
        }
        let entry = groups.entry((anns, base)).or_insert((0, 0));
        entry.0 = entry.0.checked_add(c)?;
        entry.1 += 1;
    }
    let zero_terms = ws
        .iter()
        .filter(|w| as_const(w).is_none() && coefficient(w).1 == 0)
        .count();
    if groups.values().all(|&(_, n)| n < 2) && zeros.len() == zero_terms {
        return None;
    }
    let mut out = consts;
    out.extend(zeros.into_iter().cloned());
    for ((anns, base), (c, n)) in groups {
        if n == 1 {
            // Keep single terms exactly as written.
            out.extend(
                ws.iter()
                    .filter(|w| {
                        as_const(w).is_none() && {
                            let (a, k, b) = coefficient(w);
                            k != 0 && a == anns && b == base
                        }
                    })
                    .cloned(),
            );
            continue;
        }
        let mut w = if c == 1 {
            base.clone()
        } else {
            Formula::scalar(Count::Int(c), base.clone())
        };
        for (h, count) in anns.into_iter().rev() {
            w = Formula::restrict(w, h.clone(), count.clone());
        }
        out.push(w);
    }
    Some(Formula::plus(out))
}

/// `(c1 ⊞ r) max (c2 ⊞ r) → (c1 max c2) ⊞ r` for constants `c1`, `c2` and a
/// remainder `r` that is flat under every binding. The equation fails for
/// non-flat remainders, where rank-wise sums and multiset union do not
/// commute.
fn distribute<T: Weight>(ws: &[Formula<T>], f: &LoopForest) -> Option<Formula<T>> {
    let mut groups: BTreeMap<Formula<T>, Vec<Formula<T>>> = BTreeMap::new();
    let mut out = Vec::new();
    for w in ws {
        let split = match w {
            Formula::Plus(xs) => {
                let (consts, rest): (Vec<_>, Vec<_>) =
                    xs.iter().cloned().partition(|x| as_const(x).is_some());
                (!rest.is_empty()).then(|| (Formula::plus(consts), Formula::plus(rest)))
            }
            Formula::Const(_) => None,
            w => Some((Formula::zero(), w.clone())),
        };
        match split {
            Some((c, r)) if always_flat(&r, f) => groups.entry(r).or_default().push(c),
            _ => out.push(w.clone()),
        }
    }
    if groups.values().all(|g| g.len() < 2) {
        return None;
    }
    for (rest, consts) in groups {
        if consts.len() == 1 {
            out.push(Formula::plus(vec![
                consts.into_iter().next().unwrap(),
                rest,
            ]));
        } else {
            out.push(Formula::plus(vec![Formula::max(consts), rest]));
        }
    }
    Some(Formula::max(out))
}

/// Rules applicable at the root of `w`.
pub fn root_rules<T: Weight>(w: &Formula<T>, f: &LoopForest) -> Vec<Rule> {
    Rule::ALL
        .into_iter()
        .filter(|&r| apply_rule(r, w, f).is_some())
        .collect()
}

/// Every `(path, rule)` redex in `w`. Paths index [`Formula::children`].
pub fn redexes<T: Weight>(w: &Formula<T>, f: &LoopForest) -> Vec<(Vec<usize>, Rule)> {
    fn go<T: Weight>(
        w: &Formula<T>,
        f: &LoopForest,
        path: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Rule)>,
    ) {
        for r in root_rules(w, f) {
            out.push((path.clone(), r));
        }
        for (i, c) in w.children().into_iter().enumerate() {
            path.push(i);
            go(c, f, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(w, f, &mut Vec::new(), &mut out);
    out
}

/// Rewrites the subformula at `path` with `rule`; ancestors are rebuilt so
/// the result stays flattened and sorted.
pub fn rewrite_at<T: Weight>(
    w: &Formula<T>,
    path: &[usize],
    rule: Rule,
    f: &LoopForest,
) -> Option<Formula<T>> {
    let Some((&i, rest)) = path.split_first() else {
        return apply_rule(rule, w, f);
    };
    let mut kids: Vec<Formula<T>> = w.children().into_iter().cloned().collect();
    let new = rewrite_at(kids.get(i)?, rest, rule, f)?;
    kids[i] = new;
    Some(w.with_children(kids))
}

/// Normalizes formulas, counting rule applications against a budget.
pub struct Simplifier<'f> {
    forest: &'f LoopForest,
    fuel: usize,
    limit: usize,
}

impl<'f> Simplifier<'f> {
    pub fn new(forest: &'f LoopForest, fuel: usize) -> Self {
        Simplifier {
            forest,
            fuel,
            limit: fuel,
        }
    }

    /// Rule applications performed so far.
    pub fn steps(&self) -> usize {
        self.limit - self.fuel
    }

    fn burn(&mut self) -> Result<(), SymbolicError> {
        if self.fuel == 0 {
            return Err(SymbolicError::FuelExhausted(self.limit));
        }
        self.fuel -= 1;
        Ok(())
    }

    /// Innermost-first normalization.
    pub fn normalize<T: Weight>(&mut self, w: &Formula<T>) -> Result<Formula<T>, SymbolicError> {
        let kids = w
            .children()
            .into_iter()
            .map(|c| self.normalize(c))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cur = w.with_children(kids);
        loop {
            let next = Rule::ALL
                .into_iter()
                .find_map(|r| apply_rule(r, &cur, self.forest));
            match next {
                None => return Ok(cur),
                Some(n) => {
                    self.burn()?;
                    let kids = n
                        .children()
                        .into_iter()
                        .map(|c| self.normalize(c))
                        .collect::<Result<Vec<_>, _>>()?;
                    cur = n.with_children(kids);
                }
            }
        }
    }

    /// Applies uniformly random redexes until none is left.
    pub fn normalize_randomly<T: Weight, R: Rng>(
        &mut self,
        w: &Formula<T>,
        rng: &mut R,
    ) -> Result<Formula<T>, SymbolicError> {
        let mut cur = w.clone();
        loop {
            let rs = redexes(&cur, self.forest);
            if rs.is_empty() {
                return Ok(cur);
            }
            let (path, rule) = &rs[rng.gen_range(0..rs.len())];
            self.burn()?;
            cur = rewrite_at(&cur, path, *rule, self.forest).expect("listed redex applies");
        }
    }
}

/// The normal form of `w` with the default fuel.
pub fn simplify<T: Weight>(w: &Formula<T>, f: &LoopForest) -> Result<Formula<T>, SymbolicError> {
    Simplifier::new(f, default_fuel()).normalize(w)
}

/// The normal form of `w` within `fuel` rule applications.
pub fn simplify_with_fuel<T: Weight>(
    w: &Formula<T>,
    f: &LoopForest,
    fuel: usize,
) -> Result<Formula<T>, SymbolicError> {
    Simplifier::new(f, fuel).normalize(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = Formula<u64>;

    fn forest() -> LoopForest {
        LoopForest::from_nesting(&[("h", None), ("g", Some("h"))])
    }

    fn simp(src: &str) -> String {
        simplify(&src.parse::<F>().unwrap(), &forest())
            .unwrap()
            .to_string()
    }

    #[test]
    fn like_terms_collect() {
        assert_eq!(simp("(+ (+ x (* 2 x)) (* 3 x) y)"), "(+ y (* 6 x))");
        assert_eq!(simp("(+ x x)"), "(* 2 x)");
        assert_eq!(simp("(+ (* n x) (* n x))"), "(* 2 (* n x))");
    }

    #[test]
    fn neutral_elements() {
        assert_eq!(simp("(+ w (l=TOP,[|0]))"), "w");
        assert_eq!(simp("(max w (l=TOP,[|0]))"), "w");
        // (h, 0̄) is not neutral: it lowers the loop component.
        assert_eq!(simp("(+ w (l=h,[|0]))"), "(+ (l=h,[|0]) w)");
    }

    #[test]
    fn annotations_merge() {
        assert_eq!(simp("(+ (ann a $h n) (ann b $h n))"), "(ann (+ a b) $h n)");
        assert_eq!(
            simp("(+ (ann a $h n) (ann b $h m))"),
            "(+ (ann a $h n) (ann b $h m))"
        );
        assert_eq!(
            simp("(+ (ann a h n) (ann b h n))"),
            "(+ (ann a h n) (ann b h n))"
        );
        assert_eq!(simp("(ann (l=TOP,[|0]) h n)"), "(l=h,[|0])");
    }

    #[test]
    fn loop_exit_extraction() {
        assert_eq!(simp("(pow a b h n)"), "(+ b (pow a (l=TOP,[|0]) h n))");
        assert_eq!(simp("(pow (l=h,[|0]) (l=TOP,[|0]) h n)"), "(l=TOP,[|0])");
    }

    #[test]
    fn constants_fold() {
        assert_eq!(simp("(+ (l=h,[|2]) (l=h,[|3]))"), "(l=h,[|5])");
        assert_eq!(
            simp("(max (l=TOP,[5,4,2|1]) (l=TOP,[6|2]))"),
            "(l=TOP,[6,5,4|2])"
        );
        assert_eq!(simp("(* 3 (l=TOP,[5|2]))"), "(l=TOP,[15|6])");
        assert_eq!(simp("(pow (l=h,[5,4|3]) (l=TOP,[|0]) h 2)"), "(l=TOP,[|9])");
    }

    #[test]
    fn distributivity_needs_flat_remainder() {
        assert_eq!(
            simp("(max (+ (l=TOP,[|1]) (pow a (l=TOP,[|0]) h n)) (+ (l=TOP,[|2]) (pow a (l=TOP,[|0]) h n)))"),
            "(max (+ (l=TOP,[|1]) (pow a (l=TOP,[|0]) h n)) (+ (l=TOP,[|2]) (pow a (l=TOP,[|0]) h n)))"
        );
        assert_eq!(
            simp("(max (+ (l=TOP,[|1]) (pow (l=h,[5|1]) (l=TOP,[|0]) h n)) (+ (l=TOP,[|2]) (pow (l=h,[5|1]) (l=TOP,[|0]) h n)))"),
            "(+ (l=TOP,[|2]) (pow (l=h,[5|1]) (l=TOP,[|0]) h n))"
        );
    }

    #[test]
    fn scalars() {
        assert_eq!(simp("(* 2 (* 3 x))"), "(* 6 x)");
        assert_eq!(simp("(* n (* 2 x))"), "(* 2 (* n x))");
        assert_eq!(simp("(* n (* m x))"), "(* m (* n x))");
        assert_eq!(simp("(* 0 (* n x))"), "(* 0 x)");
        assert_eq!(simp("(* 2 (ann x h n))"), "(ann (* 2 x) h n)");
        assert_eq!(simp("(* 0 (ann (l=g,[3|1]) h n))"), "(l=g,[|0])");
    }

    #[test]
    fn fuel_runs_out() {
        let w: F = "(+ x x x)".parse().unwrap();
        assert_eq!(
            simplify_with_fuel(&w, &forest(), 0),
            Err(SymbolicError::FuelExhausted(0))
        );
    }
}
