//! A small arithmetic expression language used to declare coefficients,
//! right-hand sides and boundary functionals.
//!
//! Grammar (precedence `^` > unary minus > `*`,`/` > `+`,`-`; `^` is right
//! associative):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" factor)?
//! atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Variables are declared when parsing and compiled to slot indices, so
//! evaluation takes a plain slice of values in declaration order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::ExprError;

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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sign,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Min,
    Max,
    Atan,
    Pow,
}

impl Func {
    pub const ALL: [Func; 11] = [
        Func::Abs,
        Func::Sign,
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Min,
        Func::Max,
        Func::Atan,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Atan => "atan",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Pow => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Abstract syntax tree. Variables refer to slots of the owning
/// [`Expression`]'s variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression together with its declared variables.
#[derive(Clone)]
pub struct Expression {
    vars: Arc<[String]>,
    root: Arc<Node>,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({:?} over {:?})", self.to_string(), self.vars)
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.root == other.root
    }
}

impl Expression {
    /// Parses `src` allowing only the identifiers in `vars` (plus the
    /// constant `pi` and the built-in functions).
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let tokens = lex(src)?;
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            vars,
            end: src.len(),
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ExprError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(Self::from_node(root, vars))
    }

    pub fn from_node(root: Node, vars: &[&str]) -> Self {
        Self {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            root: Arc::new(root),
        }
    }

    /// A constant expression over the given variables.
    pub fn constant(value: f64, vars: &[&str]) -> Self {
        Self::from_node(Node::Num(value), vars)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates with `values[i]` bound to the i-th declared variable.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        if values.len() < self.vars.len() {
            return Err(ExprError::UnboundVariable(
                self.vars[values.len()].clone(),
            ));
        }
        eval_node(&self.root, values)
    }

    /// Evaluates with named bindings. Every declared variable that the
    /// expression actually uses must be bound.
    pub fn eval_with(&self, bindings: &HashMap<&str, f64>) -> Result<f64, ExprError> {
        let mut values = Vec::with_capacity(self.vars.len());
        let used = self.used_vars();
        for (i, name) in self.vars.iter().enumerate() {
            match bindings.get(name.as_str()) {
                Some(v) => values.push(*v),
                None if !used[i] => values.push(f64::NAN),
                None => return Err(ExprError::UnboundVariable(name.clone())),
            }
        }
        eval_node(&self.root, &values)
    }

    /// Flags, per declared variable, whether it occurs in the tree.
    pub fn used_vars(&self) -> Vec<bool> {
        fn walk(node: &Node, used: &mut [bool]) {
            match node {
                Node::Num(_) => {}
                Node::Var(i) => used[*i] = true,
                Node::Neg(inner) => walk(inner, used),
                Node::Bin(_, l, r) => {
                    walk(l, used);
                    walk(r, used);
                }
                Node::Call(_, args) => args.iter().for_each(|a| walk(a, used)),
            }
        }
        let mut used = vec![false; self.vars.len()];
        walk(&self.root, &mut used);
        used
    }

    /// True when the expression does not reference `var`.
    pub fn is_independent_of(&self, var: &str) -> bool {
        match self.vars.iter().position(|v| v == var) {
            Some(i) => !self.used_vars()[i],
            None => true,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.vars)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, vars: &[String]) -> fmt::Result {
    match node {
        Node::Num(v) => {
            if *v < 0.0 {
                write!(f, "(-{:?})", -v)
            } else {
                write!(f, "{v:?}")
            }
        }
        Node::Var(i) => f.write_str(&vars[*i]),
        Node::Neg(inner) => {
            f.write_str("(-")?;
            write_node(f, inner, vars)?;
            f.write_str(")")
        }
        Node::Bin(op, l, r) => {
            f.write_str("(")?;
            write_node(f, l, vars)?;
            write!(f, " {} ", op.symbol())?;
            write_node(f, r, vars)?;
            f.write_str(")")
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_node(f, a, vars)?;
            }
            f.write_str(")")
        }
    }
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, ExprError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Var(i) => Ok(values[*i]),
        Node::Neg(inner) => Ok(-eval_node(inner, values)?),
        Node::Bin(op, l, r) => {
            let a = eval_node(l, values)?;
            let b = eval_node(r, values)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(ExprError::DivisionByZero)
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Pow => power(a, b),
            }
        }
        Node::Call(func, args) => {
            let x = eval_node(&args[0], values)?;
            match func {
                Func::Abs => Ok(x.abs()),
                Func::Sign => Ok(if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }),
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Exp => Ok(x.exp()),
                Func::Atan => Ok(x.atan()),
                Func::Log => {
                    if x > 0.0 {
                        Ok(x.ln())
                    } else {
                        Err(ExprError::Domain("log".into()))
                    }
                }
                Func::Sqrt => {
                    if x >= 0.0 {
                        Ok(x.sqrt())
                    } else {
                        Err(ExprError::Domain("sqrt".into()))
                    }
                }
                Func::Min => Ok(x.min(eval_node(&args[1], values)?)),
                Func::Max => Ok(x.max(eval_node(&args[1], values)?)),
                Func::Pow => power(x, eval_node(&args[1], values)?),
            }
        }
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, ExprError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(ExprError::DivisionByZero);
    }
    let v = base.powf(exponent);
    if v.is_nan() && !base.is_nan() && !exponent.is_nan() {
        Err(ExprError::Domain("^".into()))
    } else {
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Plus => "`+`".into(),
            TokKind::Minus => "`-`".into(),
            TokKind::Star => "`*`".into(),
            TokKind::Slash => "`/`".into(),
            TokKind::Caret => "`^`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => TokKind::Plus,
            b'-' => TokKind::Minus,
            b'*' => TokKind::Star,
            b'/' => TokKind::Slash,
            b'^' => TokKind::Caret,
            b'(' => TokKind::LParen,
            b')' => TokKind::RParen,
            b',' => TokKind::Comma,
            b'0'..=b'9' | b'.' => {
                let end = scan_number(bytes, i);
                let text = &src[i..end];
                let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                i = end;
                tokens.push(Token {
                    kind: TokKind::Num(v),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = i;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Ident(src[i..end].to_string()),
                    offset: start,
                });
                i = end;
                continue;
            }
            _ => {
                // U+2212 MINUS SIGN
                if src[i..].starts_with('\u{2212}') {
                    tokens.push(Token {
                        kind: TokKind::Minus,
                        offset: start,
                    });
                    i += '\u{2212}'.len_utf8();
                    continue;
                }
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    Ok(tokens)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next_offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind) -> Result<(), ExprError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or_else(|| "end of input".to_string(), |t| t.kind.describe());
            Err(ExprError::Syntax {
                offset: self.next_offset(),
                message: format!("expected {}, found {found}", kind.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(&TokKind::Plus) {
                BinOp::Add
            } else if self.eat(&TokKind::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat(&TokKind::Star) {
                BinOp::Mul
            } else if self.eat(&TokKind::Slash) {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        if self.eat(&TokKind::Minus) {
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(&TokKind::Caret) {
            let exponent = self.factor()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.peek() else {
            return Err(ExprError::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match &tok.kind {
            TokKind::Num(v) => Ok(Node::Num(*v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokKind::RParen)?;
                Ok(inner)
            }
            TokKind::Ident(name) => {
                if self.eat(&TokKind::LParen) {
                    let func = Func::lookup(name).ok_or_else(|| ExprError::UnknownIdentifier {
                        name: name.clone(),
                        offset: tok.offset,
                    })?;
                    let mut args = vec![self.expr()?];
                    while self.eat(&TokKind::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(TokKind::RParen)?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Arity {
                            name: name.clone(),
                            expected: func.arity(),
                            found: args.len(),
                            offset: tok.offset,
                        });
                    }
                    Ok(Node::Call(func, args))
                } else if let Some(i) = self.vars.iter().position(|v| v == name) {
                    Ok(Node::Var(i))
                } else if name == "pi" {
                    Ok(Node::Num(std::f64::consts::PI))
                } else {
                    Err(ExprError::UnknownIdentifier {
                        name: name.clone(),
                        offset: tok.offset,
                    })
                }
            }
            other => Err(ExprError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn num(v: f64) -> Box<Node> {
        Box::new(Node::Num(v))
    }

    #[test]
    fn cube_root_parses_as_power_of_quotient() {
        let e = Expression::parse("t^(1/3)", &["t"]).unwrap();
        assert_eq!(
            *e.root(),
            Node::Bin(
                BinOp::Pow,
                Box::new(Node::Var(0)),
                Box::new(Node::Bin(BinOp::Div, num(1.0), num(3.0)))
            )
        );
    }

    #[test]
    fn undeclared_identifier_is_rejected() {
        let err = Expression::parse("sigma", &["t", "x", "y", "s"]).unwrap_err();
        assert_eq!(
            err,
            ExprError::UnknownIdentifier {
                name: "sigma".into(),
                offset: 0
            }
        );
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expression::parse("2*x + -y^2", &["x", "y"]).unwrap();
        let expected = Node::Bin(
            BinOp::Add,
            Box::new(Node::Bin(BinOp::Mul, num(2.0), Box::new(Node::Var(0)))),
            Box::new(Node::Neg(Box::new(Node::Bin(
                BinOp::Pow,
                Box::new(Node::Var(1)),
                num(2.0),
            )))),
        );
        assert_eq!(*e.root(), expected);
        // hand evaluation: 2*1 + -(2^2) = -2
        assert_eq!(e.eval(&[1.0, 2.0]).unwrap(), -2.0);
    }

    #[test]
    fn power_is_right_associative() {
        let e = Expression::parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 512.0);
    }

    #[test]
    fn evaluates_r_laplacian_form() {
        let e = Expression::parse("abs(y)^(r-2)*y", &["y", "r"]).unwrap();
        let v = e
            .eval_with(&HashMap::from([("y", -2.0), ("r", 3.0)]))
            .unwrap();
        assert_eq!(v, -4.0);
    }

    #[test]
    fn simple_evaluations() {
        let e = Expression::parse("x+0", &["x"]).unwrap();
        assert_eq!(e.eval(&[5.0]).unwrap(), 5.0);
        let e = Expression::parse("sin(3.14159265358979)", &[]).unwrap();
        assert!(e.eval(&[]).unwrap().abs() < 1e-9);
        let e = Expression::parse("max(t, 2) - min(-1, t) + pow(2, 3)", &["t"]).unwrap();
        assert_eq!(e.eval(&[0.5]).unwrap(), 2.0 + 1.0 + 8.0);
    }

    #[test]
    fn evaluation_errors() {
        let e = Expression::parse("1/x", &["x"]).unwrap();
        assert_eq!(e.eval(&[0.0]), Err(ExprError::DivisionByZero));
        let e = Expression::parse("log(x) + sqrt(x)", &["x"]).unwrap();
        assert_eq!(e.eval(&[-1.0]), Err(ExprError::Domain("log".into())));
        let e = Expression::parse("sqrt(x)", &["x"]).unwrap();
        assert_eq!(e.eval(&[-1.0]), Err(ExprError::Domain("sqrt".into())));
        let e = Expression::parse("x + y", &["x", "y"]).unwrap();
        assert_eq!(
            e.eval_with(&HashMap::from([("x", 1.0)])),
            Err(ExprError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = Expression::parse("1 + * 2", &[]).unwrap_err();
        assert_eq!(err.offset(), Some(4));
        let err = Expression::parse("(t + 1", &["t"]).unwrap_err();
        assert_eq!(err.offset(), Some(6));
        let err = Expression::parse("t $ 2", &["t"]).unwrap_err();
        assert_eq!(err.offset(), Some(2));
        let err = Expression::parse("min(t)", &["t"]).unwrap_err();
        assert!(matches!(err, ExprError::Arity { expected: 2, found: 1, .. }));
    }

    #[test]
    fn accepts_unicode_minus_and_exponents() {
        let e = Expression::parse("2 \u{2212} 1.5e-1", &[]).unwrap();
        assert!((e.eval(&[]).unwrap() - 1.85).abs() < 1e-15);
    }

    #[test]
    fn pi_constant_and_independence() {
        let e = Expression::parse("sin(2*pi*t)", &["t", "x", "y"]).unwrap();
        assert!(e.is_independent_of("x"));
        assert!(!e.is_independent_of("t"));
    }

    const VARS: [&str; 4] = ["t", "x", "y", "s"];

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (0.0f64..1.0e6).prop_map(Node::Num),
            (0usize..VARS.len()).prop_map(Node::Var),
        ];
        leaf.prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|n| Node::Neg(Box::new(n))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Node::Bin(op, Box::new(l), Box::new(r))),
                (0usize..Func::ALL.len(), prop::collection::vec(inner, 2)).prop_map(
                    |(k, mut args)| {
                        let func = Func::ALL[k];
                        args.truncate(func.arity());
                        Node::Call(func, args)
                    }
                ),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn print_then_parse_is_identity(node in arb_node()) {
            let e = Expression::from_node(node, &VARS);
            let printed = e.to_string();
            let reparsed = Expression::parse(&printed, &VARS).unwrap();
            prop_assert_eq!(reparsed, e);
        }
    }
}
