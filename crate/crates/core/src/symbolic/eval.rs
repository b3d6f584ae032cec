use std::collections::BTreeMap;
use std::fmt;

use super::{Count, Formula, Header, SymbolicError};
use crate::awcet::{AbstractWcet, AwcetError};
use crate::cfg::{LoopForest, LoopRef};
use crate::Weight;

/// The value bound to an identifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value<T> {
    Int(u64),
    Wcet(AbstractWcet<T>),
    /// A loop, by header block id.
    Loop(String),
}

impl<T: fmt::Display> fmt::Display for Value<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Wcet(a) => write!(f, "{a}"),
            Value::Loop(h) => f.write_str(h),
        }
    }
}

pub type Bindings<T> = BTreeMap<String, Value<T>>;

fn mismatch<T: fmt::Display>(name: &str, expected: &str, v: &Value<T>) -> SymbolicError {
    SymbolicError::TypeMismatch {
        name: name.to_string(),
        expected: expected.to_string(),
        found: v.to_string(),
    }
}

fn count<T: fmt::Display>(c: &Count, rho: &Bindings<T>) -> Result<Count, SymbolicError> {
    match c {
        Count::Var(v) => match rho.get(v) {
            None => Ok(c.clone()),
            Some(Value::Int(n)) => Ok(Count::Int(*n)),
            Some(other) => Err(mismatch(v, "an integer", other)),
        },
        Count::Int(_) => Ok(c.clone()),
    }
}

fn header<T: fmt::Display>(h: &Header, rho: &Bindings<T>) -> Result<Header, SymbolicError> {
    match h {
        Header::Var(v) => match rho.get(v) {
            None => Ok(h.clone()),
            Some(Value::Loop(b)) => Ok(Header::Block(b.clone())),
            Some(other) => Err(mismatch(v, "a loop header", other)),
        },
        _ => Ok(h.clone()),
    }
}

/// Replaces bound identifiers by their values. An integer bound to a WCET
/// identifier stands for the constant `(⊤, c̄)`.
pub fn substitute<T: Weight>(
    w: &Formula<T>,
    rho: &Bindings<T>,
) -> Result<Formula<T>, SymbolicError> {
    Ok(match w {
        Formula::Const(_) => w.clone(),
        Formula::Id(x) => match rho.get(x) {
            None => w.clone(),
            Some(Value::Wcet(a)) => Formula::Const(a.clone()),
            Some(Value::Int(c)) => Formula::Const(AbstractWcet::constant(T::from(*c))),
            Some(other) => return Err(mismatch(x, "a WCET", other)),
        },
        Formula::Restrict {
            operand,
            header: h,
            count: c,
        } => Formula::restrict(substitute(operand, rho)?, header(h, rho)?, count(c, rho)?),
        Formula::Scalar { coeff, operand } => {
            Formula::scalar(count(coeff, rho)?, substitute(operand, rho)?)
        }
        Formula::Plus(ws) => Formula::plus(
            ws.iter()
                .map(|w| substitute(w, rho))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Max(ws) => Formula::max(
            ws.iter()
                .map(|w| substitute(w, rho))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Power {
            body,
            exit,
            header: h,
            count: c,
        } => Formula::power(
            substitute(body, rho)?,
            substitute(exit, rho)?,
            header(h, rho)?,
            count(c, rho)?,
        ),
    })
}

/// Evaluates `w` under `rho` with the constant operators. Every identifier
/// must be bound.
pub fn evaluate<T: Weight>(
    w: &Formula<T>,
    rho: &Bindings<T>,
    f: &LoopForest,
) -> Result<AbstractWcet<T>, SymbolicError> {
    let missing: Vec<String> = w
        .identifiers()
        .all()
        .into_iter()
        .filter(|x| !rho.contains_key(x))
        .collect();
    if !missing.is_empty() {
        return Err(SymbolicError::UnboundIdentifier(missing));
    }
    fold(&substitute(w, rho)?, f)
}

fn ground_count(c: &Count) -> u64 {
    match c {
        Count::Int(n) => *n,
        Count::Var(v) => unreachable!("unbound count `{v}` after substitution"),
    }
}

fn ground_header(h: &Header) -> LoopRef {
    h.loop_ref().expect("loop variables are substituted")
}

fn fold<T: Weight>(w: &Formula<T>, f: &LoopForest) -> Result<AbstractWcet<T>, SymbolicError> {
    let all = |ws: &[Formula<T>],
               op: fn(
        &AbstractWcet<T>,
        &AbstractWcet<T>,
        &LoopForest,
    ) -> Result<AbstractWcet<T>, AwcetError>| {
        let mut acc: Option<AbstractWcet<T>> = None;
        for w in ws {
            let v = fold(w, f)?;
            acc = Some(match acc {
                None => v,
                Some(a) => op(&a, &v, f)?,
            });
        }
        Ok::<_, SymbolicError>(acc.unwrap_or_else(AbstractWcet::zero))
    };
    Ok(match w {
        Formula::Const(a) => a.clone(),
        Formula::Id(x) => unreachable!("unbound identifier `{x}` after substitution"),
        Formula::Restrict {
            operand,
            header,
            count,
        } => fold(operand, f)?.restrict(&ground_header(header), Some(ground_count(count)), f)?,
        Formula::Scalar { coeff, operand } => fold(operand, f)?.scalar(ground_count(coeff))?,
        Formula::Plus(ws) => all(ws, AbstractWcet::plus)?,
        Formula::Max(ws) => all(ws, AbstractWcet::max)?,
        Formula::Power {
            body,
            exit,
            header,
            count,
        } => fold(body, f)?.power(
            &fold(exit, f)?,
            &ground_header(header),
            ground_count(count),
            f,
        )?,
    })
}
