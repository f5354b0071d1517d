//! The arithmetic-logic expression language shared by rule conditions, rule
//! modifiers and customization predicates.
//!
//! ```text
//! or      := and ( ("|" | "||") and )*
//! and     := cmp ( ("&" | "&&") cmp )*
//! cmp     := add ( ("<" | "<=" | ">" | ">=" | "==" | "!=") add )?
//! add     := mul ( ("+" | "-") mul )*
//! mul     := unary ( ("*" | "/") unary )*
//! unary   := ("!" | "-") unary | primary
//! primary := number | "true" | "false" | "Date" "(" "\"YYYY-MM-DD\"" ")"
//!          | identifier | "(" or ")"
//! ```
//!
//! `≤`, `≥`, `≠`, `=` and the Unicode minus sign are accepted as aliases.
//! Identifiers that are missing from a [`Scope`] are *absent*: a comparison
//! over an absent operand is false, while a numeric evaluation that needs one
//! fails with [`ExprError::AbsentOperand`].

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("operand `{0}` is absent")]
    AbsentOperand(String),
    #[error("division by zero")]
    DivisionByZero,
}

fn syntax(position: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        position,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Number,
    Bool,
    Date,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Number => "number",
            Type::Bool => "boolean",
            Type::Date => "date",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Date(NaiveDate),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Number(_) => Type::Number,
            Value::Bool(_) => Type::Bool,
            Value::Date(_) => Type::Date,
        }
    }
}

/// The identifiers an expression may reference, with their types.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Signature(BTreeMap<String, Type>);

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, ty: Type) -> Self {
        self.0.insert(name.to_string(), ty);
        self
    }

    pub fn get(&self, name: &str) -> Option<Type> {
        self.0.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

/// Identifier bindings for evaluation. Unbound names are absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scope(BTreeMap<String, Value>);

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, value: Option<Value>) {
        match value {
            Some(v) => {
                self.0.insert(name.to_string(), v);
            }
            None => {
                self.0.remove(name);
            }
        }
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        self.set(name, Some(value));
        self
    }

    pub fn with_number(self, name: &str, value: f64) -> Self {
        self.with(name, Value::Number(value))
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge
            | BinaryOp::Eq
            | BinaryOp::Ne => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }

    fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

const UNARY_PRECEDENCE: u8 = 6;
const ATOM_PRECEDENCE: u8 = 7;

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Bool(bool),
    Date(NaiveDate),
    Ident(String),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

impl Expr {
    /// Parses `source` and checks every identifier against `signature`.
    pub fn parse(source: &str, signature: &Signature) -> Result<Expr, ExprError> {
        let expr = Self::parse_unchecked(source)?;
        for name in expr.free_identifiers() {
            if signature.get(&name).is_none() {
                return Err(ExprError::UnknownIdentifier(name));
            }
        }
        Ok(expr)
    }

    /// Parses without resolving identifiers.
    pub fn parse_unchecked(source: &str) -> Result<Expr, ExprError> {
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: source.len(),
        };
        let expr = parser.or()?;
        if let Some(tok) = parser.peek() {
            return Err(syntax(tok.pos, "unexpected trailing input"));
        }
        Ok(expr)
    }

    pub fn free_identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_identifiers(&mut out);
        out
    }

    fn collect_identifiers(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Ident(name) => {
                out.insert(name.clone());
            }
            Expr::Unary { operand, .. } => operand.collect_identifiers(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_identifiers(out);
                rhs.collect_identifiers(out);
            }
            Expr::Number(_) | Expr::Bool(_) | Expr::Date(_) => {}
        }
    }

    /// Static type of the expression under `signature`.
    pub fn type_check(&self, signature: &Signature) -> Result<Type, ExprError> {
        match self {
            Expr::Number(_) => Ok(Type::Number),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Date(_) => Ok(Type::Date),
            Expr::Ident(name) => signature
                .get(name)
                .ok_or_else(|| ExprError::UnknownIdentifier(name.clone())),
            Expr::Unary { op, operand } => {
                let t = operand.type_check(signature)?;
                let want = match op {
                    UnaryOp::Neg => Type::Number,
                    UnaryOp::Not => Type::Bool,
                };
                if t == want {
                    Ok(t)
                } else {
                    Err(mismatch_unary(*op, t))
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = lhs.type_check(signature)?;
                let r = rhs.type_check(signature)?;
                binary_type(*op, l, r)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { .. } => UNARY_PRECEDENCE,
            Expr::Number(n) if *n < 0.0 || (*n == 0.0 && n.is_sign_negative()) => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }

    /// Evaluates a condition. Absent operands make the enclosing comparison
    /// false; absent booleans collapse to false where `&`, `|` or the caller
    /// consume them.
    pub fn eval_bool(&self, scope: &Scope) -> Result<bool, ExprError> {
        match self.eval(scope)? {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(b),
            Some(v) => Err(ExprError::TypeMismatch(format!(
                "expected boolean, found {}",
                v.ty()
            ))),
        }
    }

    /// Evaluates a numeric modifier. Absent operands are an error.
    pub fn eval_number(&self, scope: &Scope) -> Result<f64, ExprError> {
        match self.eval(scope)? {
            Some(Value::Number(n)) => Ok(n),
            Some(v) => Err(ExprError::TypeMismatch(format!(
                "expected number, found {}",
                v.ty()
            ))),
            None => {
                let missing = self
                    .free_identifiers()
                    .into_iter()
                    .find(|name| scope.get(name).is_none())
                    .unwrap_or_default();
                Err(ExprError::AbsentOperand(missing))
            }
        }
    }

    fn eval(&self, scope: &Scope) -> Result<Option<Value>, ExprError> {
        match self {
            Expr::Number(n) => Ok(Some(Value::Number(*n))),
            Expr::Bool(b) => Ok(Some(Value::Bool(*b))),
            Expr::Date(d) => Ok(Some(Value::Date(*d))),
            Expr::Ident(name) => Ok(scope.get(name)),
            Expr::Unary { op, operand } => {
                let Some(v) = operand.eval(scope)? else {
                    return Ok(None);
                };
                match (op, v) {
                    (UnaryOp::Neg, Value::Number(n)) => Ok(Some(Value::Number(-n))),
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Some(Value::Bool(!b))),
                    (op, v) => Err(mismatch_unary(*op, v.ty())),
                }
            }
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::And | BinaryOp::Or => {
                    let l = collapse(lhs.eval(scope)?, *op)?;
                    if (*op == BinaryOp::And && !l) || (*op == BinaryOp::Or && l) {
                        return Ok(Some(Value::Bool(l)));
                    }
                    let r = collapse(rhs.eval(scope)?, *op)?;
                    Ok(Some(Value::Bool(r)))
                }
                _ => {
                    let l = lhs.eval(scope)?;
                    let r = rhs.eval(scope)?;
                    match (l, r) {
                        (Some(l), Some(r)) => apply_binary(*op, l, r).map(Some),
                        (l, r) => {
                            // Types are still checked when present.
                            if let (Some(v), _) | (_, Some(v)) = (l, r) {
                                let ty = v.ty();
                                binary_type(*op, ty, ty)?;
                            }
                            if op.is_comparison() {
                                Ok(Some(Value::Bool(false)))
                            } else {
                                Ok(None)
                            }
                        }
                    }
                }
            },
        }
    }
}

fn collapse(v: Option<Value>, op: BinaryOp) -> Result<bool, ExprError> {
    match v {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(b),
        Some(v) => Err(ExprError::TypeMismatch(format!(
            "`{}` needs boolean operands, found {}",
            op.symbol(),
            v.ty()
        ))),
    }
}

fn mismatch_unary(op: UnaryOp, t: Type) -> ExprError {
    let sym = match op {
        UnaryOp::Neg => "-",
        UnaryOp::Not => "!",
    };
    ExprError::TypeMismatch(format!("unary `{sym}` cannot apply to {t}"))
}

fn mismatch_binary(op: BinaryOp, l: Type, r: Type) -> ExprError {
    ExprError::TypeMismatch(format!("`{}` cannot apply to {l} and {r}", op.symbol()))
}

fn binary_type(op: BinaryOp, l: Type, r: Type) -> Result<Type, ExprError> {
    use BinaryOp::*;
    match op {
        Add | Sub | Mul | Div if l == Type::Number && r == Type::Number => Ok(Type::Number),
        Lt | Le | Gt | Ge if l == r && l != Type::Bool => Ok(Type::Bool),
        Eq | Ne if l == r => Ok(Type::Bool),
        And | Or if l == Type::Bool && r == Type::Bool => Ok(Type::Bool),
        _ => Err(mismatch_binary(op, l, r)),
    }
}

fn apply_binary(op: BinaryOp, l: Value, r: Value) -> Result<Value, ExprError> {
    use BinaryOp::*;
    use Value::*;
    let out = match (op, l, r) {
        (Add, Number(a), Number(b)) => Number(a + b),
        (Sub, Number(a), Number(b)) => Number(a - b),
        (Mul, Number(a), Number(b)) => Number(a * b),
        (Div, Number(_), Number(0.0)) => return Err(ExprError::DivisionByZero),
        (Div, Number(a), Number(b)) => Number(a / b),
        (Lt, Number(a), Number(b)) => Bool(a < b),
        (Le, Number(a), Number(b)) => Bool(a <= b),
        (Gt, Number(a), Number(b)) => Bool(a > b),
        (Ge, Number(a), Number(b)) => Bool(a >= b),
        (Lt, Date(a), Date(b)) => Bool(a < b),
        (Le, Date(a), Date(b)) => Bool(a <= b),
        (Gt, Date(a), Date(b)) => Bool(a > b),
        (Ge, Date(a), Date(b)) => Bool(a >= b),
        (Eq, Number(a), Number(b)) => Bool(a == b),
        (Ne, Number(a), Number(b)) => Bool(a != b),
        (Eq, Date(a), Date(b)) => Bool(a == b),
        (Ne, Date(a), Date(b)) => Bool(a != b),
        (Eq, Bool(a), Bool(b)) => Bool(a == b),
        (Ne, Bool(a), Bool(b)) => Bool(a != b),
        (op, l, r) => return Err(mismatch_binary(op, l.ty(), r.ty())),
    };
    Ok(out)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Date(d) => write!(f, "Date(\"{}\")", d.format("%Y-%m-%d")),
            Expr::Ident(name) => f.write_str(name),
            Expr::Unary { op, operand } => {
                f.write_str(match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::Not => "!",
                })?;
                write_child(f, operand, operand.precedence() < UNARY_PRECEDENCE)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let lp = lhs.precedence();
                let left_parens = lp < p || (op.is_comparison() && lp == p);
                write_child(f, lhs, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, rhs, rhs.precedence() <= p)
            }
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let source = String::deserialize(deserializer)?;
        Expr::parse_unchecked(&source).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Bang,
    Op(BinaryOp),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ExprError> {
    let mut out = Vec::new();
    let mut chars = source.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut push = |tok| out.push(Token { tok, pos });
        if c.is_ascii_digit() || c == '.' {
            let start = pos;
            let mut end = pos;
            let mut seen_dot = false;
            while let Some(&(i, d)) = chars.peek() {
                if d.is_ascii_digit() || (d == '.' && !seen_dot) {
                    seen_dot |= d == '.';
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let text = &source[start..end];
            let n: f64 = text
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
            push(Tok::Number(n));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = pos;
            let mut end = pos;
            while let Some(&(i, d)) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            push(Tok::Ident(source[start..end].to_string()));
            continue;
        }
        chars.next();
        let next_is = |chars: &mut core::iter::Peekable<core::str::CharIndices<'_>>, want: char| {
            if chars.peek().map(|&(_, d)| d) == Some(want) {
                chars.next();
                true
            } else {
                false
            }
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Op(BinaryOp::Add),
            '-' | '\u{2212}' => Tok::Op(BinaryOp::Sub),
            '*' => Tok::Op(BinaryOp::Mul),
            '/' => Tok::Op(BinaryOp::Div),
            '\u{2264}' => Tok::Op(BinaryOp::Le),
            '\u{2265}' => Tok::Op(BinaryOp::Ge),
            '\u{2260}' => Tok::Op(BinaryOp::Ne),
            '<' if next_is(&mut chars, '=') => Tok::Op(BinaryOp::Le),
            '<' => Tok::Op(BinaryOp::Lt),
            '>' if next_is(&mut chars, '=') => Tok::Op(BinaryOp::Ge),
            '>' => Tok::Op(BinaryOp::Gt),
            '=' => {
                next_is(&mut chars, '=');
                Tok::Op(BinaryOp::Eq)
            }
            '!' if next_is(&mut chars, '=') => Tok::Op(BinaryOp::Ne),
            '!' => Tok::Bang,
            '&' => {
                next_is(&mut chars, '&');
                Tok::Op(BinaryOp::And)
            }
            '|' => {
                next_is(&mut chars, '|');
                Tok::Op(BinaryOp::Or)
            }
            '"' => {
                let mut text = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, d)) => text.push(d),
                        None => return Err(syntax(pos, "unterminated string")),
                    }
                }
                Tok::Str(text)
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, pos });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<BinaryOp> {
        match self.peek() {
            Some(Token {
                tok: Tok::Op(op), ..
            }) => Some(*op),
            _ => None,
        }
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ExprError> {
        let at = self.here();
        match self.next() {
            Some(t) if t.tok == want => Ok(t),
            _ => Err(syntax(at, format!("expected {what}"))),
        }
    }

    fn binary_level(
        &mut self,
        ops: &[BinaryOp],
        next: fn(&mut Self) -> Result<Expr, ExprError>,
    ) -> Result<Expr, ExprError> {
        let mut lhs = next(self)?;
        while let Some(op) = self.peek_op().filter(|op| ops.contains(op)) {
            self.pos += 1;
            let rhs = next(self)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ExprError> {
        self.binary_level(&[BinaryOp::Or], Self::and)
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        self.binary_level(&[BinaryOp::And], Self::cmp)
    }

    fn cmp(&mut self) -> Result<Expr, ExprError> {
        let lhs = self.add()?;
        let Some(op) = self.peek_op().filter(|op| op.is_comparison()) else {
            return Ok(lhs);
        };
        self.pos += 1;
        let rhs = self.add()?;
        if self.peek_op().is_some_and(BinaryOp::is_comparison) {
            return Err(syntax(
                self.here(),
                "comparisons do not chain; add parentheses",
            ));
        }
        Ok(Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    fn add(&mut self) -> Result<Expr, ExprError> {
        self.binary_level(&[BinaryOp::Add, BinaryOp::Sub], Self::mul)
    }

    fn mul(&mut self) -> Result<Expr, ExprError> {
        self.binary_level(&[BinaryOp::Mul, BinaryOp::Div], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        let op = match self.peek().map(|t| &t.tok) {
            Some(Tok::Bang) => UnaryOp::Not,
            Some(Tok::Op(BinaryOp::Sub)) => UnaryOp::Neg,
            _ => return self.primary(),
        };
        self.pos += 1;
        let operand = self.unary()?;
        Ok(Expr::Unary {
            op,
            operand: Box::new(operand),
        })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.here();
        let Some(token) = self.next() else {
            return Err(syntax(at, "unexpected end of input"));
        };
        match token.tok {
            Tok::Number(n) => Ok(Expr::Number(n)),
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                "Date" if matches!(self.peek(), Some(Token { tok: Tok::LParen, .. })) => {
                    self.pos += 1;
                    let lit_at = self.here();
                    let date = match self.next() {
                        Some(Token {
                            tok: Tok::Str(s), ..
                        }) => parse_iso_date(&s)
                            .ok_or_else(|| syntax(lit_at, format!("invalid date `{s}`")))?,
                        _ => return Err(syntax(lit_at, "expected a quoted YYYY-MM-DD date")),
                    };
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Date(date))
                }
                _ => Ok(Expr::Ident(name)),
            },
            Tok::LParen => {
                let inner = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Str(_) => Err(syntax(token.pos, "string values are not supported")),
            Tok::RParen | Tok::Bang | Tok::Op(_) => {
                Err(syntax(token.pos, "expected an operand"))
            }
        }
    }
}

/// Parses a strict `YYYY-MM-DD` calendar date.
pub fn parse_iso_date(s: &str) -> Option<NaiveDate> {
    let bytes = s.as_bytes();
    if bytes.len() != 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    let digits = |r: core::ops::Range<usize>| -> Option<u32> {
        let part = &s[r];
        if part.bytes().all(|b| b.is_ascii_digit()) {
            part.parse().ok()
        } else {
            None
        }
    };
    let year = digits(0..4)? as i32;
    let month = digits(5..7)?;
    let day = digits(8..10)?;
    NaiveDate::from_ymd_opt(year, month, day)
}
