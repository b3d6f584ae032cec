//! Reading formulas back from their printed form.

use std::str::FromStr;

use super::{Count, Formula, Header, SymbolicError};
use crate::awcet::{AbstractWcet, WcetSeq};
use crate::cfg::{is_block_id, is_identifier, LoopRef, TOP_NAME};
use crate::Weight;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> SymbolicError {
        SymbolicError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), SymbolicError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn atom(&mut self) -> Result<&'a str, SymbolicError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected an atom"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn formula<T: Weight>(&mut self) -> Result<Formula<T>, SymbolicError> {
        if self.peek() != Some('(') {
            let start = self.pos;
            let a = self.atom()?;
            if !is_identifier(a) {
                self.pos = start;
                return Err(self.err(format!("`{a}` is not an identifier")));
            }
            return Ok(Formula::Id(a.to_string()));
        }
        self.pos += 1;
        self.skip_ws();
        if self.src[self.pos..].starts_with("l=") {
            return self.constant();
        }
        let op = self.atom()?;
        let w = match op {
            "+" | "max" => {
                let mut ws = Vec::new();
                while self.peek() != Some(')') {
                    if self.peek().is_none() {
                        return Err(self.err("unterminated list"));
                    }
                    ws.push(self.formula()?);
                }
                if ws.len() < 2 {
                    return Err(self.err(format!("`{op}` needs at least two operands")));
                }
                if op == "+" {
                    Formula::plus(ws)
                } else {
                    Formula::max(ws)
                }
            }
            "*" => {
                let coeff = self.count()?;
                Formula::scalar(coeff, self.formula()?)
            }
            "ann" => {
                let w = self.formula()?;
                let h = self.header()?;
                Formula::restrict(w, h, self.count()?)
            }
            "pow" => {
                let body = self.formula()?;
                let exit = self.formula()?;
                let h = self.header()?;
                Formula::power(body, exit, h, self.count()?)
            }
            other => return Err(self.err(format!("unknown operator `{other}`"))),
        };
        self.expect(')')?;
        Ok(w)
    }

    fn constant<T: Weight>(&mut self) -> Result<Formula<T>, SymbolicError> {
        let rest = &self.src[self.pos..];
        let end = rest
            .find(')')
            .ok_or_else(|| self.err("unterminated constant"))?;
        let body = &rest[2..end];
        let (l, seq) = body
            .split_once(',')
            .ok_or_else(|| self.err("constant needs `l=LOOP,[..|..]`"))?;
        let loop_ref = LoopRef::from_str(l.trim()).map_err(|e| self.err(e))?;
        let seq = WcetSeq::from_str(seq.trim()).map_err(|e| self.err(e.to_string()))?;
        self.pos += end + 1;
        Ok(Formula::Const(AbstractWcet::new(loop_ref, seq)))
    }

    fn count(&mut self) -> Result<Count, SymbolicError> {
        let a = self.atom()?;
        if a.bytes().all(|b| b.is_ascii_digit()) {
            return a
                .parse()
                .map(Count::Int)
                .map_err(|_| self.err("count out of range"));
        }
        if is_identifier(a) {
            Ok(Count::Var(a.to_string()))
        } else {
            Err(self.err(format!("`{a}` is not a count")))
        }
    }

    fn header(&mut self) -> Result<Header, SymbolicError> {
        let a = self.atom()?;
        if a == TOP_NAME {
            return Ok(Header::Top);
        }
        if let Some(v) = a.strip_prefix('$') {
            if is_identifier(v) {
                return Ok(Header::Var(v.to_string()));
            }
        } else if is_block_id(a) {
            return Ok(Header::Block(a.to_string()));
        }
        Err(self.err(format!("`{a}` is not a loop header")))
    }
}

pub fn parse_formula<T: Weight>(src: &str) -> Result<Formula<T>, SymbolicError> {
    let mut p = Parser { src, pos: 0 };
    let w = p.formula()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(w)
}

impl<T: Weight> FromStr for Formula<T> {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = Formula<u64>;

    #[test]
    fn round_trip() {
        for src in [
            "(l=TOP,[|5])",
            "x",
            "(+ a b c)",
            "(max (l=TOP,[|5]) w)",
            "(* 3 a)",
            "(* n a)",
            "(pow (l=b2,[11|1]) (l=TOP,[|0]) b2 n)",
            "(ann w $h 2)",
            "(ann (+ x y) TOP it)",
        ] {
            let w: F = src.parse().unwrap();
            assert_eq!(w.to_string(), src);
        }
    }

    #[test]
    fn operands_are_sorted_on_read() {
        let w: F = "(+ y (l=TOP,[|1]) x)".parse().unwrap();
        assert_eq!(w.to_string(), "(+ (l=TOP,[|1]) x y)");
    }

    #[test]
    fn errors() {
        assert!("(+ a)".parse::<F>().is_err());
        assert!("(foo a b)".parse::<F>().is_err());
        assert!("(+ a b".parse::<F>().is_err());
        assert!("(ann a 1 2)".parse::<F>().is_ok());
        assert!("(ann a $1 2)".parse::<F>().is_err());
        assert!("a b".parse::<F>().is_err());
    }
}
