//! Closed-form scalar expressions over named chart coordinates.
//!
//! Grammar (whitespace is insignificant, angles are radians):
//!
//! ```text
//! expr    := term (('+' | '-') term)*          left-associative
//! term    := unary (('*' | '/') unary)*        left-associative
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?              right-associative
//! primary := number | coord | func '(' expr ')' | '(' expr ')'
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]   (or '.' digits ...)
//! func    := sin | cos | tan | exp | log | sinh | cosh | tanh | sqrt
//! ```
//!
//! There is no implicit multiplication: `2x` is a syntax error. An exponent
//! written as an integer literal (optionally negated) is evaluated by repeated
//! multiplication; any other exponent requires a positive base.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jet::{Elementary, Jet, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("invalid coordinate name list: {0}")]
    BadCoordinates(String),
    #[error("point has {got} coordinates, expression expects {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("domain error in `{subexpr}` at point {point:?}: {source}")]
    Domain {
        subexpr: String,
        point: Vec<f64>,
        #[source]
        source: JetError,
    },
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        self.elementary().name()
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn elementary(self) -> Elementary {
        match self {
            Func::Sin => Elementary::Sin,
            Func::Cos => Elementary::Cos,
            Func::Tan => Elementary::Tan,
            Func::Exp => Elementary::Exp,
            Func::Log => Elementary::Log,
            Func::Sinh => Elementary::Sinh,
            Func::Cosh => Elementary::Cosh,
            Func::Tanh => Elementary::Tanh,
            Func::Sqrt => Elementary::Sqrt,
        }
    }
}

/// Expression tree node. Coordinates are referenced by chart index.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Coord(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn max_coord(&self) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Coord(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_coord(),
            Node::Binary(_, a, b) => match (a.max_coord(), b.max_coord()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn is_constant(&self) -> bool {
        self.max_coord().is_none()
    }

    /// Integer value of an exponent written as `n` or `-n` with `n` an
    /// integral literal.
    fn integer_literal(&self) -> Option<i64> {
        let as_int = |v: f64| (v.fract() == 0.0 && v.abs() < 1e9).then_some(v as i64);
        match self {
            Node::Num(v) => as_int(*v),
            Node::Neg(inner) => match inner.as_ref() {
                Node::Num(v) => as_int(*v).map(|n| -n),
                _ => None,
            },
            _ => None,
        }
    }

    fn remap(&self, map: &dyn Fn(usize) -> usize) -> Node {
        match self {
            Node::Num(v) => Node::Num(*v),
            Node::Coord(i) => Node::Coord(map(*i)),
            Node::Neg(a) => Node::Neg(Box::new(a.remap(map))),
            Node::Call(f, a) => Node::Call(*f, Box::new(a.remap(map))),
            Node::Binary(op, a, b) => {
                Node::Binary(*op, Box::new(a.remap(map)), Box::new(b.remap(map)))
            }
        }
    }
}

/// A parsed expression together with the coordinate names of its chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpr {
    root: Node,
    coords: Arc<[String]>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Validates a coordinate-name list: nonempty, identifiers, distinct, and not
/// shadowing a function name.
pub fn validate_coord_names<S: AsRef<str>>(names: &[S]) -> Result<(), ExprError> {
    if names.is_empty() {
        return Err(ExprError::BadCoordinates("no coordinates given".into()));
    }
    for (i, n) in names.iter().enumerate() {
        let n = n.as_ref();
        if !is_identifier(n) {
            return Err(ExprError::BadCoordinates(format!("`{n}` is not an identifier")));
        }
        if Func::from_name(n).is_some() {
            return Err(ExprError::BadCoordinates(format!("`{n}` is a function name")));
        }
        if names[..i].iter().any(|m| m.as_ref() == n) {
            return Err(ExprError::BadCoordinates(format!("`{n}` appears twice")));
        }
    }
    Ok(())
}

impl ScalarExpr {
    /// Parses `source` over the given chart coordinates.
    pub fn parse<S: AsRef<str>>(source: &str, coord_names: &[S]) -> Result<ScalarExpr, ExprError> {
        validate_coord_names(coord_names)?;
        let coords: Arc<[String]> = coord_names.iter().map(|s| s.as_ref().to_string()).collect();
        let root = Parser::new(source, &coords).parse()?;
        Ok(ScalarExpr { root, coords })
    }

    /// Wraps a node; every coordinate index must be in range.
    pub fn from_node(root: Node, coords: Arc<[String]>) -> ScalarExpr {
        if let Some(max) = root.max_coord() {
            assert!(max < coords.len(), "coordinate index {max} out of range");
        }
        ScalarExpr { root, coords }
    }

    pub fn constant(value: f64, coords: Arc<[String]>) -> ScalarExpr {
        ScalarExpr {
            root: Node::Num(value),
            coords,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coord_names(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn num_coords(&self) -> usize {
        self.coords.len()
    }

    /// True when the expression is the literal `0`.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.root, Node::Num(v) if v == 0.0)
    }

    /// True when no coordinate occurs in the tree.
    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    /// Re-expresses this expression on a larger chart; coordinate `i` of this
    /// chart becomes coordinate `offset + i` of `coords`.
    pub fn embed(&self, coords: &Arc<[String]>, offset: usize) -> ScalarExpr {
        assert!(offset + self.coords.len() <= coords.len());
        ScalarExpr::from_node(self.root.remap(&|i| i + offset), coords.clone())
    }

    fn binary(&self, op: BinOp, other: &ScalarExpr) -> ScalarExpr {
        assert!(
            self.coords == other.coords,
            "combining expressions over different charts"
        );
        ScalarExpr {
            root: Node::Binary(op, Box::new(self.root.clone()), Box::new(other.root.clone())),
            coords: self.coords.clone(),
        }
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        self.binary(BinOp::Mul, other)
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr {
            root: Node::Neg(Box::new(self.root.clone())),
            coords: self.coords.clone(),
        }
    }

    /// `self ^ n` with an integer literal exponent.
    pub fn powi(&self, n: i64) -> ScalarExpr {
        let exp = if n < 0 {
            Node::Neg(Box::new(Node::Num((-n) as f64)))
        } else {
            Node::Num(n as f64)
        };
        ScalarExpr {
            root: Node::Binary(BinOp::Pow, Box::new(self.root.clone()), Box::new(exp)),
            coords: self.coords.clone(),
        }
    }

    fn check_point(&self, point: &[f64]) -> Result<(), ExprError> {
        if point.len() != self.coords.len() {
            Err(ExprError::PointLength {
                expected: self.coords.len(),
                got: point.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        self.check_point(point)?;
        eval_f64(&self.root, point).map_err(|(node, source)| self.domain_error(node, point, source))
    }

    /// Taylor jet of the expression about `point`, truncated at `order`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, ExprError> {
        self.check_point(point)?;
        if order > crate::jet::MAX_ORDER {
            return Err(JetError::OrderTooHigh(order).into());
        }
        let dim = point.len();
        let layout = crate::jet::layout(dim, order);
        let vars: Vec<Jet> = (0..dim)
            .map(|i| Jet::variable(i, point[i], dim, order))
            .collect::<Result<_, _>>()?;
        let ctx = JetCtx {
            vars: &vars,
            layout: &layout,
        };
        ctx.eval(&self.root)
            .map_err(|(node, source)| self.domain_error(node, point, source))
    }

    fn domain_error(&self, node: &Node, point: &[f64], source: JetError) -> ExprError {
        ExprError::Domain {
            subexpr: Display(node, &self.coords).to_string(),
            point: point.to_vec(),
            source,
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.coords)
    }
}

struct Display<'a>(&'a Node, &'a [String]);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self.0, self.1)
    }
}

// Precedence used when printing: unary minus sits between * / and ^.
fn node_precedence(node: &Node) -> u8 {
    match node {
        Node::Binary(op, _, _) => op.precedence(),
        Node::Neg(_) => 3,
        Node::Num(v) if v.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, coords: &[String]) -> fmt::Result {
    let wrap = |f: &mut fmt::Formatter<'_>, n: &Node, paren: bool| -> fmt::Result {
        if paren {
            write!(f, "(")?;
            write_node(f, n, coords)?;
            write!(f, ")")
        } else {
            write_node(f, n, coords)
        }
    };
    match node {
        Node::Num(v) => write!(f, "{v:?}"),
        Node::Coord(i) => write!(f, "{}", coords[*i]),
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, coords)?;
            write!(f, ")")
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            // `-a*b` would re-parse as `(-a)*b`.
            wrap(f, a, node_precedence(a) < 3)
        }
        Node::Binary(BinOp::Pow, a, b) => {
            wrap(f, a, node_precedence(a) <= 4)?;
            write!(f, "^")?;
            wrap(f, b, node_precedence(b) < 3)
        }
        Node::Binary(op, a, b) => {
            let p = op.precedence();
            wrap(f, a, node_precedence(a) < p)?;
            write!(f, " {} ", op.symbol())?;
            wrap(f, b, node_precedence(b) <= p)
        }
    }
}

fn eval_f64<'a>(node: &'a Node, point: &[f64]) -> Result<f64, (&'a Node, JetError)> {
    Ok(match node {
        Node::Num(v) => *v,
        Node::Coord(i) => point[*i],
        Node::Neg(a) => -eval_f64(a, point)?,
        Node::Call(func, a) => {
            let x = eval_f64(a, point)?;
            func.elementary()
                .derivatives(x, 0)
                .map_err(|e| (node, e))?[0]
        }
        Node::Binary(op, a, b) => {
            let x = eval_f64(a, point)?;
            match op {
                BinOp::Add => x + eval_f64(b, point)?,
                BinOp::Sub => x - eval_f64(b, point)?,
                BinOp::Mul => x * eval_f64(b, point)?,
                BinOp::Div => {
                    let y = eval_f64(b, point)?;
                    if y == 0.0 {
                        return Err((node, JetError::DivisionByZero));
                    }
                    x / y
                }
                BinOp::Pow => {
                    if let Some(n) = b.integer_literal() {
                        if n < 0 && x == 0.0 {
                            return Err((node, JetError::DivisionByZero));
                        }
                        powi_exact(x, n)
                    } else {
                        let y = eval_f64(b, point)?;
                        if x <= 0.0 {
                            return Err((node, JetError::Domain { func: "pow", value: x }));
                        }
                        x.powf(y)
                    }
                }
            }
        }
    })
}

// Repeated squaring, matching the jet path.
fn powi_exact(x: f64, n: i64) -> f64 {
    let base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    let (mut acc, mut sq) = (1.0, base);
    while e > 0 {
        if e & 1 == 1 {
            acc *= sq;
        }
        e >>= 1;
        if e > 0 {
            sq *= sq;
        }
    }
    acc
}

struct JetCtx<'a> {
    vars: &'a [Jet],
    layout: &'a Arc<crate::jet::Layout>,
}

impl JetCtx<'_> {
    fn eval<'n>(&self, node: &'n Node) -> Result<Jet, (&'n Node, JetError)> {
        let at = |e| (node, e);
        Ok(match node {
            Node::Num(v) => Jet::constant_unchecked(*v, self.layout.clone()),
            Node::Coord(i) => self.vars[*i].clone(),
            Node::Neg(a) => self.eval(a)?.neg(),
            Node::Call(func, a) => self.eval(a)?.compose(func.elementary()).map_err(at)?,
            Node::Binary(op, a, b) => {
                let x = self.eval(a)?;
                match op {
                    BinOp::Add => x.add(&self.eval(b)?).map_err(at)?,
                    BinOp::Sub => x.sub(&self.eval(b)?).map_err(at)?,
                    BinOp::Mul => x.mul_unchecked(&self.eval(b)?),
                    BinOp::Div => x.div(&self.eval(b)?).map_err(at)?,
                    BinOp::Pow => {
                        if let Some(n) = b.integer_literal() {
                            x.powi(n).map_err(at)?
                        } else if b.is_constant() {
                            let p = eval_f64(b, &[])?;
                            x.compose(Elementary::PowConst(p)).map_err(at)?
                        } else {
                            // a^b = exp(b · log a)
                            let y = self.eval(b)?;
                            x.compose(Elementary::Log)
                                .map_err(|_| {
                                    at(JetError::Domain {
                                        func: "pow",
                                        value: x.value(),
                                    })
                                })?
                                .mul_unchecked(&y)
                                .compose(Elementary::Exp)
                                .map_err(at)?
                        }
                    }
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    coords: &'a [String],
    tok: Tok,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, coords: &'a [String]) -> Parser<'a> {
        Parser {
            src,
            pos: 0,
            coords,
            tok: Tok::End,
            tok_start: 0,
        }
    }

    fn parse(mut self) -> Result<Node, ExprError> {
        if self.src.trim().is_empty() {
            return Err(ExprError::Empty);
        }
        self.advance()?;
        let node = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.unexpected("an operator or end of input"));
        }
        Ok(node)
    }

    fn unexpected(&self, expected: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.tok_start,
            expected: expected.to_string(),
            found: self.tok.to_string(),
        }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            self.tok = Tok::Num(self.number()?);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap_or('?');
            return Err(ExprError::Syntax {
                offset: self.pos,
                expected: "a number, identifier, operator or parenthesis".into(),
                found: format!("character `{ch}`"),
            });
        }
        Ok(())
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut n = digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            n += digits(&mut self.pos);
        }
        if n == 0 {
            return Err(ExprError::Syntax {
                offset: start,
                expected: "digits".into(),
                found: "`.`".into(),
            });
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if digits(&mut p) > 0 {
                self.pos = p;
            }
        }
        Ok(self.src[start..self.pos]
            .parse::<f64>()
            .expect("validated number literal"))
    }

    fn eat(&mut self, c: char) -> Result<bool, ExprError> {
        if self.tok == Tok::Sym(c) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+')? {
                BinOp::Add
            } else if self.eat('-')? {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*')? {
                BinOp::Mul
            } else if self.eat('/')? {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-')? {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.eat('^')? {
            let exp = self.unary()?;
            Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Node::Num(v))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let inner = self.expr()?;
                if !self.eat(')')? {
                    return Err(self.unexpected("`)`"));
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                let offset = self.tok_start;
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    self.advance()?;
                    return Ok(Node::Coord(i));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ExprError::UnknownIdentifier { name, offset });
                };
                self.advance()?;
                if !self.eat('(')? {
                    return Err(self.unexpected(&format!("`(` after `{}`", func.name())));
                }
                let arg = self.expr()?;
                if !self.eat(')')? {
                    return Err(self.unexpected("`)`"));
                }
                Ok(Node::Call(func, Box::new(arg)))
            }
            _ => Err(self.unexpected("a number, coordinate, function call or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn parses_power_of_call() {
        let e = ScalarExpr::parse("sin(theta)^2", &["theta", "phi"]).unwrap();
        assert_eq!(
            e.root(),
            &Node::Binary(
                BinOp::Pow,
                Box::new(Node::Call(Func::Sin, Box::new(Node::Coord(0)))),
                Box::new(Node::Num(2.0))
            )
        );
    }

    #[test]
    fn incomplete_expression_offset() {
        match ScalarExpr::parse("x +", &["x"]) {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn arithmetic_eval() {
        let e = ScalarExpr::parse("2*x*y - 1", &["x", "y"]).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0]).unwrap(), 11.0);
    }

    #[test]
    fn error_kinds() {
        assert_eq!(ScalarExpr::parse("   ", &["x"]), Err(ExprError::Empty));
        assert!(matches!(
            ScalarExpr::parse("x + q", &["x"]),
            Err(ExprError::UnknownIdentifier { ref name, offset: 4 }) if name == "q"
        ));
        // implicit multiplication is not allowed
        assert!(matches!(
            ScalarExpr::parse("2x", &["x"]),
            Err(ExprError::Syntax { offset: 1, .. })
        ));
        assert!(matches!(
            ScalarExpr::parse("sin x", &["x"]),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            ScalarExpr::parse("(x", &["x"]),
            Err(ExprError::Syntax { offset: 2, .. })
        ));
        assert!(ScalarExpr::parse("x", &["x", "x"]).is_err());
        assert!(ScalarExpr::parse("x", &["exp"]).is_err());
        assert!(ScalarExpr::parse("x", &[] as &[&str]).is_err());
        assert!(ScalarExpr::parse("x", &["1x"]).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let p = |s| ScalarExpr::parse(s, &["x"]).unwrap().eval(&[2.0]).unwrap();
        assert_eq!(p("-x^2"), -4.0);
        assert_eq!(p("2^3^2"), 512.0);
        assert_eq!(p("8 / 2 / 2"), 2.0);
        assert_eq!(p("8 - 2 - 2"), 4.0);
        assert_eq!(p("1 + 2 * 3"), 7.0);
        assert_eq!(p("x^-1"), 0.5);
        assert_eq!(p("1.5e1 + .5"), 15.5);
        assert_eq!(p(" ( x + 1 ) * 2 "), 6.0);
    }

    #[test]
    fn jet_examples() {
        let e = ScalarExpr::parse("x^3", &["x"]).unwrap();
        let j = e.eval_jet(&[2.0], 2).unwrap();
        assert_eq!(j.value(), 8.0);
        assert_eq!(j.partial(&[1]).unwrap(), 12.0);
        assert_eq!(j.partial(&[2]).unwrap(), 12.0);

        let e = ScalarExpr::parse("exp(x)", &["x"]).unwrap();
        let j = e.eval_jet(&[0.0], 3).unwrap();
        for k in 0..=3 {
            assert!((j.partial(&[k]).unwrap() - 1.0).abs() < 1e-15);
        }

        let e = ScalarExpr::parse("sin(x)*y", &["x", "y"]).unwrap();
        let j = e.eval_jet(&[FRAC_PI_2, 3.0], 1).unwrap();
        assert!((j.value() - 3.0).abs() < 1e-15);
        assert!(j.partial(&[1, 0]).unwrap().abs() < 1e-15);
        assert!((j.partial(&[0, 1]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_subexpression_and_point() {
        let e = ScalarExpr::parse("1 + log(x - 1)", &["x"]).unwrap();
        match e.eval_jet(&[0.5], 2) {
            Err(ExprError::Domain { subexpr, point, .. }) => {
                assert_eq!(subexpr, "log(x - 1.0)");
                assert_eq!(point, vec![0.5]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = ScalarExpr::parse("1/x", &["x"]).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(ExprError::Domain { .. })));
        assert!(matches!(e.eval_jet(&[0.0], 1), Err(ExprError::Domain { .. })));
        let e = ScalarExpr::parse("sqrt(x)", &["x"]).unwrap();
        assert!(e.eval_jet(&[-1.0], 1).is_err());
        let e = ScalarExpr::parse("x^0.5", &["x"]).unwrap();
        assert!(e.eval(&[-1.0]).is_err());
        assert!(e.eval_jet(&[-1.0], 1).is_err());
        // integer exponents are fine for negative bases
        let e = ScalarExpr::parse("x^3", &["x"]).unwrap();
        assert_eq!(e.eval(&[-2.0]).unwrap(), -8.0);
        let e = ScalarExpr::parse("tan(x)", &["x"]).unwrap();
        assert!(e.eval(&[FRAC_PI_2]).is_err());
    }

    #[test]
    fn printing_round_trips_tricky_shapes() {
        for src in [
            "-(a*b)",
            "(-a)^2",
            "a^b^c",
            "(a^b)^c",
            "a - (b - c)",
            "a / (b * c)",
            "-a*b",
            "a*-b",
            "--a",
            "a^-b",
            "a^(-b*c)",
            "exp(-a)^2",
            "1e-7*a",
        ] {
            let e = ScalarExpr::parse(src, &["a", "b", "c"]).unwrap();
            let again = ScalarExpr::parse(&e.to_string(), &["a", "b", "c"]).unwrap();
            assert_eq!(e, again, "{src} printed as {e}");
        }
    }

    #[test]
    fn embedding_shifts_coordinates() {
        let e = ScalarExpr::parse("x*x", &["x"]).unwrap();
        let chart: Arc<[String]> = vec!["a".to_string(), "x".to_string()].into();
        let big = e.embed(&chart, 1);
        assert_eq!(big.eval(&[10.0, 3.0]).unwrap(), 9.0);
        assert_eq!(big.to_string(), "x * x");
    }
}
