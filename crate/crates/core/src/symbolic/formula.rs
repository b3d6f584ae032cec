use std::collections::BTreeSet;
use std::fmt;

use crate::awcet::AbstractWcet;
use crate::cfg::{LoopRef, TOP_NAME};
use crate::Weight;

/// The loop named by an annotation or a loop operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Header {
    Top,
    Block(String),
    /// A loop identifier bound later; printed with a `$` prefix.
    Var(String),
}

impl Header {
    pub fn loop_ref(&self) -> Option<LoopRef> {
        match self {
            Header::Top => Some(LoopRef::Top),
            Header::Block(b) => Some(LoopRef::Loop(b.clone())),
            Header::Var(_) => None,
        }
    }
}

impl From<&LoopRef> for Header {
    fn from(l: &LoopRef) -> Self {
        match l {
            LoopRef::Loop(h) => Header::Block(h.clone()),
            _ => Header::Top,
        }
    }
}

impl fmt::Display for Header {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Header::Top => f.write_str(TOP_NAME),
            Header::Block(b) => f.write_str(b),
            Header::Var(v) => write!(f, "${v}"),
        }
    }
}

/// An iteration count, annotation maximum or scalar coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Count {
    Int(u64),
    Var(String),
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Int(n) => write!(f, "{n}"),
            Count::Var(v) => f.write_str(v),
        }
    }
}

/// A symbolic WCET formula.
///
/// The derived order ranks constructors in declaration order and then
/// compares fields lexicographically; `Plus` and `Max` keep their operands
/// sorted under it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula<T> {
    Const(AbstractWcet<T>),
    Id(String),
    Restrict {
        operand: Box<Formula<T>>,
        header: Header,
        count: Count,
    },
    Scalar {
        coeff: Count,
        operand: Box<Formula<T>>,
    },
    Plus(Vec<Formula<T>>),
    Max(Vec<Formula<T>>),
    Power {
        body: Box<Formula<T>>,
        exit: Box<Formula<T>>,
        header: Header,
        count: Count,
    },
}

impl<T: Weight> Formula<T> {
    pub fn zero() -> Self {
        Formula::Const(AbstractWcet::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Formula::Const(c) if c.is_zero())
    }

    pub fn id(name: impl Into<String>) -> Self {
        Formula::Id(name.into())
    }

    /// Flattened, sorted sum; no operands is `0̲`, one operand is itself.
    pub fn plus(operands: Vec<Self>) -> Self {
        let mut flat = Vec::with_capacity(operands.len());
        for w in operands {
            match w {
                Formula::Plus(inner) => flat.extend(inner),
                w => flat.push(w),
            }
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => {
                flat.sort();
                Formula::Plus(flat)
            }
        }
    }

    /// Flattened, sorted maximum. An empty maximum is `0̲`.
    pub fn max(operands: Vec<Self>) -> Self {
        let mut flat = Vec::with_capacity(operands.len());
        for w in operands {
            match w {
                Formula::Max(inner) => flat.extend(inner),
                w => flat.push(w),
            }
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => {
                flat.sort();
                Formula::Max(flat)
            }
        }
    }

    pub fn scalar(coeff: Count, operand: Self) -> Self {
        Formula::Scalar {
            coeff,
            operand: Box::new(operand),
        }
    }

    pub fn restrict(operand: Self, header: Header, count: Count) -> Self {
        Formula::Restrict {
            operand: Box::new(operand),
            header,
            count,
        }
    }

    pub fn power(body: Self, exit: Self, header: Header, count: Count) -> Self {
        Formula::Power {
            body: Box::new(body),
            exit: Box::new(exit),
            header,
            count,
        }
    }

    /// Direct subformulas, in path order.
    pub fn children(&self) -> Vec<&Self> {
        match self {
            Formula::Const(_) | Formula::Id(_) => vec![],
            Formula::Restrict { operand, .. } | Formula::Scalar { operand, .. } => vec![operand],
            Formula::Plus(ws) | Formula::Max(ws) => ws.iter().collect(),
            Formula::Power { body, exit, .. } => vec![body, exit],
        }
    }

    /// Rebuilds this node over new children (same arity), re-establishing
    /// flattening and operand order.
    pub fn with_children(&self, mut kids: Vec<Self>) -> Self {
        match self {
            Formula::Const(_) | Formula::Id(_) => self.clone(),
            Formula::Restrict { header, count, .. } => {
                Self::restrict(kids.pop().unwrap(), header.clone(), count.clone())
            }
            Formula::Scalar { coeff, .. } => Self::scalar(coeff.clone(), kids.pop().unwrap()),
            Formula::Plus(_) => Self::plus(kids),
            Formula::Max(_) => Self::max(kids),
            Formula::Power { header, count, .. } => {
                let exit = kids.pop().unwrap();
                let body = kids.pop().unwrap();
                Self::power(body, exit, header.clone(), count.clone())
            }
        }
    }

    /// Number of constant and identifier leaves.
    pub fn operand_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Id(_) => 1,
            w => w.children().into_iter().map(Self::operand_count).sum(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Self::size).sum::<usize>()
    }

    /// All identifiers, by role.
    pub fn identifiers(&self) -> Identifiers {
        let mut ids = Identifiers::default();
        self.collect_ids(&mut ids);
        ids
    }

    fn collect_ids(&self, ids: &mut Identifiers) {
        let count = |c: &Count, ids: &mut Identifiers| {
            if let Count::Var(v) = c {
                ids.counts.insert(v.clone());
            }
        };
        let header = |h: &Header, ids: &mut Identifiers| {
            if let Header::Var(v) = h {
                ids.loops.insert(v.clone());
            }
        };
        match self {
            Formula::Const(_) => {}
            Formula::Id(x) => {
                ids.wcets.insert(x.clone());
            }
            Formula::Restrict {
                header: h,
                count: c,
                ..
            }
            | Formula::Power {
                header: h,
                count: c,
                ..
            } => {
                header(h, ids);
                count(c, ids);
            }
            Formula::Scalar { coeff, .. } => count(coeff, ids),
            Formula::Plus(_) | Formula::Max(_) => {}
        }
        for c in self.children() {
            c.collect_ids(ids);
        }
    }

    pub fn is_ground(&self) -> bool {
        self.identifiers().is_empty()
    }
}

/// Identifiers occurring in a formula, split by the kind of value they take.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Identifiers {
    pub wcets: BTreeSet<String>,
    pub counts: BTreeSet<String>,
    pub loops: BTreeSet<String>,
}

impl Identifiers {
    pub fn is_empty(&self) -> bool {
        self.wcets.is_empty() && self.counts.is_empty() && self.loops.is_empty()
    }

    pub fn all(&self) -> BTreeSet<String> {
        self.wcets
            .iter()
            .chain(&self.counts)
            .chain(&self.loops)
            .cloned()
            .collect()
    }
}

impl<T: fmt::Display> fmt::Display for Formula<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, ws: &[Formula<T>]| {
            write!(f, "({op}")?;
            for w in ws {
                write!(f, " {w}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::Const(a) => write!(f, "(l={},{})", a.loop_ref, a.seq),
            Formula::Id(x) => f.write_str(x),
            Formula::Restrict {
                operand,
                header,
                count,
            } => write!(f, "(ann {operand} {header} {count})"),
            Formula::Scalar { coeff, operand } => write!(f, "(* {coeff} {operand})"),
            Formula::Plus(ws) => list(f, "+", ws),
            Formula::Max(ws) => list(f, "max", ws),
            Formula::Power {
                body,
                exit,
                header,
                count,
            } => write!(f, "(pow {body} {exit} {header} {count})"),
        }
    }
}
