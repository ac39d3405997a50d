//! Map strings: rational expressions in `z` with rational literals, the prime `p`, coefficient lists `[c0,c1,…]`, `+ - * / ^` and parentheses.

use crate::error::{Error, Result};
use crate::maps::RationalMap;
use crate::poly::Poly;
use crate::rat::{parse_q, q, Q};
use crate::tower::TowerElem;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Z,
    P,
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(decimal(&cs[st..i].iter().collect::<String>())?));
        } else if c == 'z' {
            out.push(Tok::Z);
            i += 1;
        } else if c == 'p' {
            out.push(Tok::P);
            i += 1;
        } else if "+-*/^()[],".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected '{c}' in {s:?}")));
        }
    }
    Ok(out)
}

fn decimal(s: &str) -> Result<Q> {
    match s.split_once('.') {
        None => parse_q(s),
        Some((a, b)) => {
            if b.contains('.') {
                return Err(Error::Parse(format!("bad number {s:?}")));
            }
            let whole = if a.is_empty() { q(0) } else { parse_q(a)? };
            let frac = if b.is_empty() { q(0) } else { parse_q(b)? / Q::from_integer(num_bigint::BigInt::from(10).pow(b.len() as u32)) };
            Ok(whole + frac)
        }
    }
}

/// num/den over Q, kept unreduced until the end.
#[derive(Clone)]
struct Frac {
    num: Poly,
    den: Poly,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    p: u64,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn constant(&self, x: Q) -> Frac {
        Frac { num: Poly::from_rationals(self.p, 1, &[x]), den: Poly::from_rationals(self.p, 1, &[q(1)]) }
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let r = self.term()?;
                acc = add(&acc, &r);
            } else if self.eat('-') {
                let r = self.term()?;
                acc = add(&acc, &neg(&r));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let r = self.unary()?;
                acc = mul(&acc, &r);
            } else if self.eat('/') {
                let r = self.unary()?;
                acc = div(&acc, &r)?;
            } else if matches!(self.peek(), Some(Tok::Z) | Some(Tok::P) | Some(Tok::Num(_)) | Some(Tok::Op('(')) | Some(Tok::Op('['))) {
                let r = self.power()?;
                acc = mul(&acc, &r);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Frac> {
        if self.eat('-') {
            return Ok(neg(&self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        let k = match self.peek().cloned() {
            Some(Tok::Num(n)) if n.is_integer() => {
                self.pos += 1;
                n.to_integer().to_string().parse::<u32>().map_err(|_| Error::Parse("exponent too large".into()))?
            }
            _ => return Err(Error::Parse("exponent must be an integer literal".into())),
        };
        let r = Frac { num: base.num.pow(k), den: base.den.pow(k) };
        if negative {
            div(&self.constant(q(1)), &r)
        } else {
            Ok(r)
        }
    }

    fn primary(&mut self) -> Result<Frac> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(self.constant(n))
            }
            Some(Tok::P) => {
                self.pos += 1;
                Ok(self.constant(q(self.p as i64)))
            }
            Some(Tok::Z) => {
                self.pos += 1;
                Ok(Frac { num: Poly::z(self.p, 1), den: Poly::from_rationals(self.p, 1, &[q(1)]) })
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(Tok::Op('[')) => {
                self.pos += 1;
                let mut cs = Vec::new();
                loop {
                    let c = self.expr()?;
                    if c.den.deg() != Some(0) || c.num.deg().unwrap_or(0) != 0 {
                        return Err(Error::Parse("list entries must be constants".into()));
                    }
                    let v = c.num.coeff(0).div(&c.den.coeff(0))?;
                    cs.push(v.as_rational().cloned().ok_or_else(|| Error::Parse("non-rational entry".into()))?);
                    if self.eat(']') {
                        break;
                    }
                    if !self.eat(',') {
                        return Err(Error::Parse("expected ',' or ']'".into()));
                    }
                }
                Ok(Frac { num: Poly::from_rationals(self.p, 1, &cs), den: Poly::from_rationals(self.p, 1, &[q(1)]) })
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn add(a: &Frac, b: &Frac) -> Frac {
    Frac { num: a.num.mul(&b.den).add(&b.num.mul(&a.den)), den: a.den.mul(&b.den) }
}

fn neg(a: &Frac) -> Frac {
    Frac { num: a.num.neg(), den: a.den.clone() }
}

fn mul(a: &Frac, b: &Frac) -> Frac {
    Frac { num: a.num.mul(&b.num), den: a.den.mul(&b.den) }
}

fn div(a: &Frac, b: &Frac) -> Result<Frac> {
    if b.num.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(Frac { num: a.num.mul(&b.den), den: a.den.mul(&b.num) })
}

/// Parses a map string for the prime `p`, cancelling common factors.
pub fn parse_map(p: u64, s: &str) -> Result<RationalMap> {
    let toks = lex(s)?;
    let mut ps = Parser { toks, pos: 0, p };
    let f = ps.expr()?;
    if ps.pos != ps.toks.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    let g = f.num.gcd(&f.den);
    let (num, den) = if g.deg().unwrap_or(0) > 0 { (f.num.div_exact(&g), f.den.div_exact(&g)) } else { (f.num, f.den) };
    let lead = den.coeff(den.deg().unwrap());
    let scale = TowerElem::one(p, 1).div(&lead)?;
    RationalMap::from_polys(&num.scale(&scale), &den.scale(&scale))
}
