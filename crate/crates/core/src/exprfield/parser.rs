//! Tokenizer and recursive-descent parser for coefficient expressions.
//!
//! Precedence, loosest to tightest: `+ -`, then `* /`, then unary `-`, then
//! `^` (right-associative, constant exponent only). So `-x1^2` is `-(x1^2)`
//! and `-x1/2` is `(-x1)/2`. Every error carries the byte offset it was
//! raised at.

use super::{BinOp, ExprAst, Node, UnaryOp};
use crate::error::{Error, Result};

pub fn parse_expression(text: &str, dim: usize) -> Result<ExprAst> {
    parse_with_constants(text, dim, &[])
}

/// Parse with named constants bound now; the AST keeps only their values.
pub fn parse_with_constants(text: &str, dim: usize, constants: &[(&str, f64)]) -> Result<ExprAst> {
    if dim == 0 {
        return Err(Error::InvalidParameter { name: "dim", msg: "must be at least 1".into() });
    }
    for (name, _) in constants {
        if is_variable_name(name) || is_function_name(name) || *name == "pi" {
            return Err(Error::InvalidParameter {
                name: "constants",
                msg: format!("name {name:?} collides with a builtin"),
            });
        }
    }
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, dim, constants };
    let root = p.expr()?;
    match p.peek() {
        Token::End => Ok(ExprAst { root, dim }),
        t => Err(p.err_at(t.offset(), format!("unexpected {}", t.describe()))),
    }
}

fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next() == Some('x') && !s[1..].is_empty() && s[1..].chars().all(|c| c.is_ascii_digit())
}

fn is_function_name(s: &str) -> bool {
    matches!(s, "exp" | "log" | "sqrt" | "sin" | "cos" | "abs")
}

fn function_op(s: &str) -> Option<UnaryOp> {
    Some(match s {
        "exp" => UnaryOp::Exp,
        "log" => UnaryOp::Log,
        "sqrt" => UnaryOp::Sqrt,
        "sin" => UnaryOp::Sin,
        "cos" => UnaryOp::Cos,
        "abs" => UnaryOp::Abs,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64, usize),
    Ident(String, usize),
    Punct(char, usize),
    End,
}

impl Token {
    fn offset(&self) -> usize {
        match self {
            Token::Number(_, o) | Token::Ident(_, o) | Token::Punct(_, o) => *o,
            Token::End => usize::MAX,
        }
    }
    fn describe(&self) -> String {
        match self {
            Token::Number(n, _) => format!("number {n}"),
            Token::Ident(s, _) => format!("identifier {s:?}"),
            Token::Punct(c, _) => format!("{c:?}"),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| Error::Parse {
                offset: start,
                msg: format!("malformed number {lit:?}"),
            })?;
            tokens.push(Token::Number(value, start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            tokens.push(Token::Ident(text[start..i].to_string(), start));
        } else if matches!(c, '+' | '-' | '*' | '/' | '^' | '(' | ')') {
            tokens.push(Token::Punct(c, i));
            i += 1;
        } else {
            return Err(Error::Parse { offset: i, msg: format!("unexpected character {c:?}") });
        }
    }
    tokens.push(Token::End);
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
    constants: &'a [(&'a str, f64)],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Token::Punct(p, _) if *p == c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err_at(&self, offset: usize, msg: String) -> Error {
        Error::Parse { offset: offset.min(1 << 20), msg }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_punct('+') {
                let rhs = self.term()?;
                lhs = Node::Binary(BinOp::Add, Box::new(lhs), Box::new(rhs));
            } else if self.eat_punct('-') {
                let rhs = self.term()?;
                lhs = Node::Binary(BinOp::Sub, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_punct('*') {
                let rhs = self.unary()?;
                lhs = Node::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
            } else if self.eat_punct('/') {
                let rhs = self.unary()?;
                lhs = Node::Binary(BinOp::Div, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_punct('-') {
            let inner = self.unary()?;
            Ok(Node::Unary(UnaryOp::Neg, Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if !self.eat_punct('^') {
            return Ok(base);
        }
        let exp_offset = self.peek().offset();
        let exponent = self.unary()?;
        let p = self.fold_constant(&exponent, exp_offset)?;
        Ok(Node::Pow(Box::new(base), p))
    }

    fn fold_constant(&self, node: &Node, offset: usize) -> Result<f64> {
        fn has_var(n: &Node) -> bool {
            match n {
                Node::Var(_) => true,
                Node::Const(_) => false,
                Node::Unary(_, a) => has_var(a),
                Node::Binary(_, a, b) => has_var(a) || has_var(b),
                Node::Pow(a, _) => has_var(a),
            }
        }
        if has_var(node) {
            return Err(self.err_at(offset, "exponent must be a constant expression".into()));
        }
        let folded: f64 = super::eval_node(node, &[], &|_| unreachable!())
            .map_err(|e| self.err_at(offset, format!("exponent does not evaluate: {e}")))?;
        if !folded.is_finite() {
            return Err(self.err_at(offset, "exponent is not finite".into()));
        }
        Ok(folded)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.bump() {
            Token::Number(v, _) => Ok(Node::Const(v)),
            Token::Punct('(', offset) => {
                let inner = self.expr()?;
                if self.eat_punct(')') {
                    Ok(inner)
                } else {
                    Err(self.err_at(offset, "unclosed parenthesis".into()))
                }
            }
            Token::Ident(name, offset) => self.ident(name, offset),
            t => Err(self.err_at(t.offset(), format!("expected a value, found {}", t.describe()))),
        }
    }

    fn ident(&mut self, name: String, offset: usize) -> Result<Node> {
        if let Some(op) = function_op(&name) {
            if !self.eat_punct('(') {
                return Err(self.err_at(offset, format!("function {name} needs an argument list")));
            }
            let arg = self.expr()?;
            if !self.eat_punct(')') {
                return Err(self.err_at(offset, format!("unclosed argument of {name}")));
            }
            return Ok(Node::Unary(op, Box::new(arg)));
        }
        if is_variable_name(&name) {
            let index: usize = name[1..]
                .parse()
                .map_err(|_| self.err_at(offset, format!("malformed coordinate {name:?}")))?;
            if index == 0 || index > self.dim {
                return Err(self.err_at(
                    offset,
                    format!("coordinate {name} out of range: this field has x1..x{}", self.dim),
                ));
            }
            return Ok(Node::Var(index - 1));
        }
        if name == "pi" {
            return Ok(Node::Const(std::f64::consts::PI));
        }
        if let Some((_, v)) = self.constants.iter().find(|(n, _)| *n == name) {
            return Ok(Node::Const(*v));
        }
        Err(self.err_at(offset, format!("unknown identifier {name:?}")))
    }
}
