//! Parenthesised prefix text form for expressions.
//!
//! Grammar (whitespace-separated tokens):
//!
//! ```text
//! expr    := number
//!          | "(" "complex" number number ")"
//!          | "(" "var" axis index ")"            -- index is 1-based
//!          | "(" "add" expr+ ")"
//!          | "(" "mul" expr+ ")"
//!          | "(" "div" expr expr ")"
//!          | "(" "pow" expr int ")"
//!          | "(" "bracket" axis dim ")"          -- ⟨·⟩ over first dim vars
//!          | "(" "bracketpow" axis dim number ")" -- ⟨·⟩^p
//!          | "(" "exp" expr ")"
//! axis    := "x" | "xi"
//! ```
//!
//! Printing produces the same form with shortest round-trip float formatting,
//! so `parse(print(e)) == e` holds structurally for simplified trees.

use super::{Axis, Expr};
use crate::error::{SgError, SgResult};
use num_complex::Complex64;
use std::fmt::Write as _;

pub fn parse(input: &str) -> SgResult<Expr> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(e.simplified())
}

pub fn print(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn fmt_f64(v: f64) -> String {
    // Rust's f64 Display is shortest round-trip; ensure a stable "-0" -> "0".
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Const(c) => {
            if c.im == 0.0 {
                let _ = write!(out, "{}", fmt_f64(c.re));
            } else {
                let _ = write!(out, "(complex {} {})", fmt_f64(c.re), fmt_f64(c.im));
            }
        }
        Expr::Var(axis, i) => {
            let _ = write!(out, "(var {} {})", axis.name(), i + 1);
        }
        Expr::Add(ts) => {
            out.push_str("(add");
            for t in ts {
                out.push(' ');
                write_expr(out, t);
            }
            out.push(')');
        }
        Expr::Mul(fs) => {
            out.push_str("(mul");
            for f in fs {
                out.push(' ');
                write_expr(out, f);
            }
            out.push(')');
        }
        Expr::Div(n, d) => {
            out.push_str("(div ");
            write_expr(out, n);
            out.push(' ');
            write_expr(out, d);
            out.push(')');
        }
        Expr::Pow(b, k) => {
            out.push_str("(pow ");
            write_expr(out, b);
            let _ = write!(out, " {k})");
        }
        Expr::Bracket { axis, dim, power } => {
            if *power == 1.0 {
                let _ = write!(out, "(bracket {} {})", axis.name(), dim);
            } else {
                let _ = write!(out, "(bracketpow {} {} {})", axis.name(), dim, fmt_f64(*power));
            }
        }
        Expr::Exp(b) => {
            out.push_str("(exp ");
            write_expr(out, b);
            out.push(')');
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> SgError {
        SgError::Parse {
            position: self.pos,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn token(&mut self) -> SgResult<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() || c == b'(' || c == b')' {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected token"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| self.err("invalid utf-8 token"))
    }

    fn expect(&mut self, c: u8) -> SgResult<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn number(&mut self) -> SgResult<f64> {
        let t = self.token()?;
        t.parse::<f64>()
            .map_err(|_| self.err(&format!("expected number, got '{t}'")))
    }

    fn integer(&mut self) -> SgResult<i64> {
        let t = self.token()?;
        t.parse::<i64>()
            .map_err(|_| self.err(&format!("expected integer, got '{t}'")))
    }

    fn axis(&mut self) -> SgResult<Axis> {
        match self.token()? {
            "x" => Ok(Axis::X),
            "xi" => Ok(Axis::Xi),
            other => Err(self.err(&format!("expected axis 'x' or 'xi', got '{other}'"))),
        }
    }

    fn var_index(&mut self) -> SgResult<usize> {
        let i = self.integer()?;
        if i < 1 {
            return Err(self.err("variable index must be ≥ 1"));
        }
        Ok((i - 1) as usize)
    }

    fn expr(&mut self) -> SgResult<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.expect(b'(')?;
                let head = self.token()?.to_string();
                let e = match head.as_str() {
                    "complex" => {
                        let re = self.number()?;
                        let im = self.number()?;
                        Expr::Const(Complex64::new(re, im))
                    }
                    "var" => {
                        let axis = self.axis()?;
                        let idx = self.var_index()?;
                        Expr::Var(axis, idx)
                    }
                    "add" | "mul" => {
                        let mut items = Vec::new();
                        while self.peek() != Some(b')') {
                            items.push(self.expr()?);
                        }
                        if items.is_empty() {
                            return Err(self.err("empty add/mul"));
                        }
                        if head == "add" {
                            Expr::Add(items)
                        } else {
                            Expr::Mul(items)
                        }
                    }
                    "div" => {
                        let n = self.expr()?;
                        let d = self.expr()?;
                        Expr::Div(Box::new(n), Box::new(d))
                    }
                    "pow" => {
                        let b = self.expr()?;
                        let k = self.integer()?;
                        let k = i32::try_from(k).map_err(|_| self.err("power exponent out of range"))?;
                        Expr::Pow(Box::new(b), k)
                    }
                    "bracket" => {
                        let axis = self.axis()?;
                        let dim = self.integer()?;
                        if dim < 0 {
                            return Err(self.err("bracket dimension must be ≥ 0"));
                        }
                        Expr::Bracket {
                            axis,
                            dim: dim as usize,
                            power: 1.0,
                        }
                    }
                    "bracketpow" => {
                        let axis = self.axis()?;
                        let dim = self.integer()?;
                        if dim < 0 {
                            return Err(self.err("bracket dimension must be ≥ 0"));
                        }
                        let power = self.number()?;
                        Expr::Bracket {
                            axis,
                            dim: dim as usize,
                            power,
                        }
                    }
                    "exp" => Expr::Exp(Box::new(self.expr()?)),
                    other => return Err(self.err(&format!("unknown form '{other}'"))),
                };
                self.expect(b')')?;
                Ok(e)
            }
            Some(_) => {
                let v = self.number()?;
                Ok(Expr::Const(Complex64::new(v, 0.0)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_style_example() {
        let e = parse("(add (pow (var xi 1) 2) (bracket x 2))").unwrap();
        let expect = Expr::add(vec![
            Expr::pow(Expr::var_xi(0), 2),
            Expr::bracket(Axis::X, 2, 1.0),
        ]);
        assert_eq!(e, expect);
    }

    #[test]
    fn round_trip_structural() {
        let cases = [
            "(add (pow (var xi 1) 2) (bracketpow x 1 2))",
            "(div 1 (mul (bracketpow x 1 2) (bracketpow xi 1 2)))",
            "(mul (complex 0 -1) (var x 2) (exp (mul -1 (pow (var x 1) 2))))",
            "3.25",
            "(bracketpow xi 1 -3.5)",
        ];
        for src in cases {
            let e = parse(src).unwrap();
            let printed = print(&e);
            let back = parse(&printed).unwrap();
            assert_eq!(e, back, "{src} -> {printed}");
        }
    }

    #[test]
    fn shortest_float_round_trip_exact_bits() {
        let v = 0.1 + 0.2; // 0.30000000000000004
        let e = Expr::real(v);
        let back = parse(&print(&e)).unwrap();
        match back {
            Expr::Const(c) => assert_eq!(c.re.to_bits(), v.to_bits()),
            _ => panic!(),
        }
    }

    #[test]
    fn errors_carry_position() {
        let err = parse("(add (var x 1)").unwrap_err();
        match err {
            SgError::Parse { position, .. } => assert!(position >= 14),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("(frob 1 2)").is_err());
        assert!(parse("(var xi 0)").is_err());
    }
}
