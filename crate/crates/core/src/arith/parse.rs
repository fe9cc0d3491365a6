//! Parser for polynomial expressions in `x` such as `(x-1)(x-2)` or `x^3 - 2`.

use super::poly::RatPolynomial;
use super::rational::Q;
use super::ArithError;

pub fn parse_poly(src: &str) -> Result<RatPolynomial, ArithError> {
    let mut p = Parser {
        chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
        src,
    };
    let out = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.error("trailing input"));
    }
    Ok(out)
}

/// Comma-separated factor list, respecting parentheses.
pub fn parse_factor_list(src: &str) -> Result<Vec<RatPolynomial>, ArithError> {
    let mut depth = 0i32;
    let mut parts = Vec::new();
    let mut cur = String::new();
    for c in src.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    parts.push(cur);
    parts.iter().map(|s| parse_poly(s)).collect()
}

/// Comma-separated integer coefficients, highest degree first (`"1,-3,2"`).
pub fn parse_coeff_list(src: &str) -> Result<RatPolynomial, ArithError> {
    let mut coeffs: Vec<Q> = src
        .split(',')
        .map(super::rational::parse_q)
        .collect::<Result<_, _>>()?;
    coeffs.reverse();
    Ok(RatPolynomial::new(coeffs))
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ArithError {
        ArithError::Parse(format!("{msg} at position {} in {:?}", self.pos, self.src))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RatPolynomial, ArithError> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatPolynomial, ArithError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(c) if c == '(' || c == 'x' || c.is_ascii_digit() => {
                    acc = &acc * &self.power()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<RatPolynomial, ArithError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.integer()?;
            let e: u32 = e.parse().map_err(|_| self.error("bad exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<String, ArithError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn atom(&mut self) -> Result<RatPolynomial, ArithError> {
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                Ok(RatPolynomial::x())
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let mut lit = self.integer()?;
                if self.peek() == Some('/') {
                    self.pos += 1;
                    lit.push('/');
                    lit.push_str(&self.integer()?);
                }
                Ok(RatPolynomial::constant(super::rational::parse_q(&lit)?))
            }
            _ => Err(self.error("unexpected character")),
        }
    }
}
