//! Scalar coefficient fields on the base manifold, written as arithmetic
//! expressions in the coordinates `x1 .. xd` and evaluated together with
//! exact first derivatives.
//!
//! Expressions are parsed once into an [`ExprAst`]; evaluation is a single
//! tree walk, generic over the scalar type. Gradients come from forward-mode
//! dual numbers, one seeded pass per coordinate — exact to rounding, no step
//! size to tune. `abs` is the one non-smooth primitive; its derivative at the
//! kink is taken to be 0 (a subgradient), which is what the growth-condition
//! sweeps want for fields like `1 + abs(x1)^2.25`.
//!
//! Grammar (see the README for the full table): `+ - * /` with the usual
//! precedence, unary minus binding tighter than `* /`, and `^` tighter still;
//! `^` requires a constant exponent. Functions: `exp log sqrt sin cos abs`.
//! Named constants are bound at parse time; there is no runtime symbol table.

mod parser;

pub use parser::{parse_expression, parse_with_constants};

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    /// 0-based coordinate index; `x1` is `Var(0)`.
    Var(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    /// Base raised to a constant exponent (folded at parse time).
    Pow(Box<Node>, f64),
}

/// A parsed scalar field together with the dimension of its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub(crate) root: Node,
    dim: usize,
}

/// Value and gradient of a field at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl ExprAst {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        ExprAst { root: Node::Const(value), dim }
    }

    /// The coordinate field `x{index+1}`.
    pub fn coordinate(index: usize, dim: usize) -> Self {
        assert!(index < dim, "coordinate index {index} out of range for dim {dim}");
        ExprAst { root: Node::Var(index), dim }
    }

    pub fn neg(self) -> Self {
        ExprAst { root: Node::Unary(UnaryOp::Neg, Box::new(self.root)), dim: self.dim }
    }

    pub fn abs(self) -> Self {
        ExprAst { root: Node::Unary(UnaryOp::Abs, Box::new(self.root)), dim: self.dim }
    }

    pub fn add(self, rhs: ExprAst) -> Self {
        self.binary(BinOp::Add, rhs)
    }

    pub fn sub(self, rhs: ExprAst) -> Self {
        self.binary(BinOp::Sub, rhs)
    }

    pub fn mul(self, rhs: ExprAst) -> Self {
        self.binary(BinOp::Mul, rhs)
    }

    pub fn scale(self, factor: f64) -> Self {
        let dim = self.dim;
        ExprAst::constant(factor, dim).mul(self)
    }

    pub fn offset(self, shift: f64) -> Self {
        let dim = self.dim;
        ExprAst::constant(shift, dim).add(self)
    }

    fn binary(self, op: BinOp, rhs: ExprAst) -> Self {
        assert_eq!(self.dim, rhs.dim, "field dimensions differ");
        ExprAst {
            root: Node::Binary(op, Box::new(self.root), Box::new(rhs.root)),
            dim: self.dim,
        }
    }

    /// True when no coordinate appears in the expression.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Const(_) => true,
                Node::Var(_) => false,
                Node::Unary(_, a) => walk(a),
                Node::Binary(_, a, b) => walk(a) && walk(b),
                Node::Pow(a, _) => walk(a),
            }
        }
        walk(&self.root)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let v: f64 = eval_node(&self.root, x, &|i| x[i])?;
        if !v.is_finite() {
            return Err(Error::NonFinite { point: x.to_vec() });
        }
        Ok(v)
    }

    /// Value and exact gradient, one dual pass per coordinate.
    pub fn eval_with_gradient(&self, x: &[f64]) -> Result<FieldSample> {
        self.check_dim(x)?;
        let mut gradient = vec![0.0; self.dim];
        let mut value = 0.0;
        for dir in 0..self.dim.max(1) {
            let d: Dual = eval_node(&self.root, x, &|i| Dual {
                v: x[i],
                d: if i == dir { 1.0 } else { 0.0 },
            })?;
            if dir == 0 {
                value = d.v;
            }
            if dir < self.dim {
                gradient[dir] = d.d;
            }
        }
        if !value.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { point: x.to_vec() });
        }
        Ok(FieldSample { value, gradient })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expect: self.dim, got: x.len() });
        }
        Ok(())
    }
}

/// Scalar type the evaluator walks the tree with: plain values or duals.
trait Scalar: Copy {
    fn val(self) -> f64;
    fn from_const(c: f64) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn exp(self) -> Self;
    fn log(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn val(self) -> f64 {
        self
    }
    fn from_const(c: f64) -> Self {
        c
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn log(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// Forward-mode dual number carrying one directional derivative.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Scalar for Dual {
    fn val(self) -> f64 {
        self.v
    }
    fn from_const(c: f64) -> Self {
        Dual { v: c, d: 0.0 }
    }
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
    fn mul(self, o: Self) -> Self {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
    fn div(self, o: Self) -> Self {
        Dual { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
    fn neg(self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual { v: e, d: self.d * e }
    }
    fn log(self) -> Self {
        Dual { v: self.v.ln(), d: self.d / self.v }
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        Dual { v: r, d: self.d * 0.5 / r }
    }
    fn sin(self) -> Self {
        Dual { v: self.v.sin(), d: self.d * self.v.cos() }
    }
    fn cos(self) -> Self {
        Dual { v: self.v.cos(), d: -self.d * self.v.sin() }
    }
    fn abs(self) -> Self {
        // Subgradient 0 at the kink.
        let s = if self.v > 0.0 {
            1.0
        } else if self.v < 0.0 {
            -1.0
        } else {
            0.0
        };
        Dual { v: self.v.abs(), d: self.d * s }
    }
    fn powf(self, p: f64) -> Self {
        let v = self.v.powf(p);
        // d/dv v^p = p v^(p-1); 0^(p-1) is 0 for p > 1 and powf(0,0) = 1 covers p = 1.
        Dual { v, d: self.d * p * self.v.powf(p - 1.0) }
    }
}

fn eval_node<S: Scalar>(node: &Node, x: &[f64], leaf: &dyn Fn(usize) -> S) -> Result<S> {
    let point = || x.to_vec();
    Ok(match node {
        Node::Const(c) => S::from_const(*c),
        Node::Var(i) => leaf(*i),
        Node::Unary(op, a) => {
            let a = eval_node(a, x, leaf)?;
            match op {
                UnaryOp::Neg => a.neg(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Log => {
                    if a.val() <= 0.0 {
                        return Err(Error::Domain { op: "log", operand: a.val(), point: point() });
                    }
                    a.log()
                }
                UnaryOp::Sqrt => {
                    if a.val() < 0.0 {
                        return Err(Error::Domain { op: "sqrt", operand: a.val(), point: point() });
                    }
                    a.sqrt()
                }
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Abs => a.abs(),
            }
        }
        Node::Binary(op, a, b) => {
            let a = eval_node(a, x, leaf)?;
            let b = eval_node(b, x, leaf)?;
            match op {
                BinOp::Add => a.add(b),
                BinOp::Sub => a.sub(b),
                BinOp::Mul => a.mul(b),
                BinOp::Div => {
                    if b.val() == 0.0 {
                        return Err(Error::Domain { op: "div", operand: 0.0, point: point() });
                    }
                    a.div(b)
                }
            }
        }
        Node::Pow(a, p) => {
            let a = eval_node(a, x, leaf)?;
            let integral = p.fract() == 0.0;
            if a.val() < 0.0 && !integral {
                return Err(Error::Domain { op: "pow", operand: a.val(), point: point() });
            }
            if a.val() == 0.0 && *p < 0.0 {
                return Err(Error::Domain { op: "pow", operand: 0.0, point: point() });
            }
            a.powf(*p)
        }
    })
}

// Precedence levels for the printer; must agree with the parser.
fn prec(node: &Node) -> u8 {
    match node {
        Node::Const(c) if *c < 0.0 => 3, // prints with a leading minus
        Node::Const(_) | Node::Var(_) => 5,
        Node::Unary(UnaryOp::Neg, _) => 3,
        Node::Unary(..) => 5, // function call syntax
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Pow(..) => 4,
    }
}

fn fmt_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = |n: &Node, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        if prec(n) < min {
            write!(f, "(")?;
            fmt_node(n, f)?;
            write!(f, ")")
        } else {
            fmt_node(n, f)
        }
    };
    match node {
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(i) => write!(f, "x{}", i + 1),
        Node::Unary(UnaryOp::Neg, a) => {
            write!(f, "-")?;
            paren(a, 3, f)
        }
        Node::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => ("+", 1, 1),
                BinOp::Sub => ("-", 1, 2), // a - (b + c) needs parens on the right
                BinOp::Mul => ("*", 2, 2),
                BinOp::Div => ("/", 2, 3),
            };
            paren(a, lp, f)?;
            write!(f, " {sym} ")?;
            paren(b, rp, f)
        }
        Node::Pow(a, p) => {
            paren(a, 5, f)?;
            if *p < 0.0 {
                write!(f, "^({p})")
            } else {
                write!(f, "^{p}")
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grad_fd(ast: &ExprAst, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (ast.eval(&xp).unwrap() - ast.eval(&xm).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn product_of_coordinates() {
        let ast = parse_expression("x1*x2", 2).unwrap();
        let s = ast.eval_with_gradient(&[3.0, 4.0]).unwrap();
        assert_eq!(s.value, 12.0);
        assert_eq!(s.gradient, vec![4.0, 3.0]);
    }

    #[test]
    fn exp_at_origin() {
        let ast = parse_expression("exp(x1)", 2).unwrap();
        let s = ast.eval_with_gradient(&[0.0, 0.0]).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.gradient, vec![1.0, 0.0]);
    }

    #[test]
    fn bound_constant_in_exponential_field() {
        // -exp(sqrt(2)*w*x1) at w = 1/sqrt(2) is -exp(x1): value -1, gradient (-1, 0).
        let w = 1.0 / 2.0_f64.sqrt();
        let ast = parse_with_constants("-exp(sqrt(2)*w*x1)", 2, &[("w", w)]).unwrap();
        let s = ast.eval_with_gradient(&[0.0, 0.0]).unwrap();
        assert!((s.value + 1.0).abs() < 1e-15);
        assert!((s.gradient[0] + 1.0).abs() < 1e-15);
        assert_eq!(s.gradient[1], 0.0);

        let fd = grad_fd(&ast, &[0.0, 0.0], 1e-6);
        for (g, gf) in s.gradient.iter().zip(&fd) {
            assert!((g - gf).abs() < 1e-9, "dual {g} vs central difference {gf}");
        }
    }

    #[test]
    fn out_of_range_coordinate_is_rejected() {
        let err = parse_expression("x1^2 + x3", 2).unwrap_err();
        match err {
            Error::Parse { msg, .. } => assert!(msg.contains("x3"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn abs_subgradient_at_kink_is_zero() {
        let ast = parse_expression("abs(x1)", 1).unwrap();
        let s = ast.eval_with_gradient(&[0.0]).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.gradient, vec![0.0]);
        assert_eq!(ast.eval_with_gradient(&[-2.0]).unwrap().gradient, vec![-1.0]);
    }

    #[test]
    fn superquadratic_abs_power() {
        let ast = parse_expression("1 + abs(x1)^2.25", 1).unwrap();
        let s = ast.eval_with_gradient(&[-2.0]).unwrap();
        assert!((s.value - (1.0 + 2.0_f64.powf(2.25))).abs() < 1e-12);
        let fd = grad_fd(&ast, &[-2.0], 1e-6);
        assert!((s.gradient[0] - fd[0]).abs() < 1e-8);
        // The kink itself: derivative of |x|^2.25 at 0 is 0.
        assert_eq!(ast.eval_with_gradient(&[0.0]).unwrap().gradient, vec![0.0]);
    }

    #[test]
    fn domain_errors_carry_the_point() {
        let ast = parse_expression("log(x1)", 1).unwrap();
        match ast.eval(&[-1.0]).unwrap_err() {
            Error::Domain { op, point, .. } => {
                assert_eq!(op, "log");
                assert_eq!(point, vec![-1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let ast = parse_expression("1/x1", 1).unwrap();
        assert!(matches!(ast.eval(&[0.0]), Err(Error::Domain { op: "div", .. })));
        let ast = parse_expression("sqrt(x1)", 1).unwrap();
        assert!(matches!(ast.eval(&[-0.5]), Err(Error::Domain { op: "sqrt", .. })));
    }

    #[test]
    fn overflow_is_reported_not_returned() {
        let ast = parse_expression("exp(x1)", 1).unwrap();
        assert!(matches!(ast.eval(&[1000.0]), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn negative_base_integer_exponent() {
        let ast = parse_expression("x1^3", 1).unwrap();
        let s = ast.eval_with_gradient(&[-2.0]).unwrap();
        assert_eq!(s.value, -8.0);
        assert_eq!(s.gradient, vec![12.0]);
        // Non-integral exponent of a negative base is a domain error, not NaN.
        let ast = parse_expression("x1^0.5", 1).unwrap();
        assert!(matches!(ast.eval(&[-1.0]), Err(Error::Domain { op: "pow", .. })));
    }

    #[test]
    fn unary_minus_precedence() {
        // -x^2 is -(x^2); -a/2 is (-a)/2.
        let ast = parse_expression("-x1^2", 1).unwrap();
        assert_eq!(ast.eval(&[3.0]).unwrap(), -9.0);
        let ast = parse_expression("-x1/2", 1).unwrap();
        assert_eq!(ast.eval(&[3.0]).unwrap(), -1.5);
        let ast = parse_expression("2^-1", 1).unwrap();
        assert_eq!(ast.eval(&[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn composition_helpers_match_parsed_forms() {
        let v = parse_expression("x1^2", 2).unwrap();
        let composed = ExprAst::constant(1.0, 2).add(v.clone());
        let parsed = parse_expression("1 + x1^2", 2).unwrap();
        for t in [-1.5, 0.0, 0.25, 2.0] {
            let x = [t, 1.0];
            assert_eq!(composed.eval(&x).unwrap(), parsed.eval(&x).unwrap());
        }
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        let cases = [
            ("x1*x2 + x2/3 - 2", 2),
            ("-exp(2*x1)/2", 2),
            ("1 + abs(x1)^2.25", 1),
            ("-(x1*x2)", 2),
            ("sin(x1)*cos(x2) - sqrt(1 + x1^2)", 2),
            ("2^-1 + x1^0", 1),
            ("-x1^2", 1),
            ("x1 - (x2 - 1)", 2),
            ("x1/(x2*x2 + 1)", 2),
        ];
        for (text, dim) in cases {
            let ast = parse_expression(text, dim).unwrap();
            let printed = ast.to_string();
            let reparsed = parse_expression(&printed, dim)
                .unwrap_or_else(|e| panic!("reprint of {text:?} -> {printed:?} failed: {e}"));
            for k in 0..25 {
                let x: Vec<f64> =
                    (0..dim).map(|i| -1.3 + 0.37 * (k as f64) + 0.11 * i as f64).collect();
                let a = ast.eval(&x);
                let b = reparsed.eval(&x);
                match (a, b) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b, "{text} vs {printed} at {x:?}"),
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("{text} vs {printed} disagree at {x:?}: {a:?} {b:?}"),
                }
            }
        }
    }
}
