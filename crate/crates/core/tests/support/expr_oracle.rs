//! A tree-walking reference interpreter for the expression language, with
//! its own AST, generator and fully parenthesized printer.

use chrono::NaiveDate;
use gamify_core::expr::{Expr, ExprError, Scope, Signature, Type, Value};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum R {
    Num(f64),
    Bool(bool),
    Date(NaiveDate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
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

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Lit(R),
    Var(&'static str),
    Neg(Box<Ast>),
    Not(Box<Ast>),
    Bin(Op, Box<Ast>, Box<Ast>),
}

pub const NUM_VARS: [&str; 3] = ["a", "b", "c"];
pub const BOOL_VARS: [&str; 2] = ["p", "q"];
pub const DATE_VARS: [&str; 2] = ["d", "e"];

pub fn signature() -> Signature {
    let mut s = Signature::new();
    for v in NUM_VARS {
        s = s.with(v, Type::Number);
    }
    for v in BOOL_VARS {
        s = s.with(v, Type::Bool);
    }
    for v in DATE_VARS {
        s = s.with(v, Type::Date);
    }
    s
}

fn day(n: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1 + n).unwrap()
}

const NUM_LITERALS: [f64; 7] = [0.0, 1.0, 2.0, 3.0, 0.5, 2.5, 10.0];

pub fn gen_num(rng: &mut impl Rng, depth: u32) -> Ast {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) {
            Ast::Lit(R::Num(NUM_LITERALS[rng.gen_range(0..NUM_LITERALS.len())]))
        } else {
            Ast::Var(NUM_VARS[rng.gen_range(0..NUM_VARS.len())])
        };
    }
    match rng.gen_range(0..5) {
        0 => Ast::Neg(Box::new(gen_num(rng, depth - 1))),
        k => {
            let op = [Op::Add, Op::Sub, Op::Mul, Op::Div][k - 1];
            Ast::Bin(op, Box::new(gen_num(rng, depth - 1)), Box::new(gen_num(rng, depth - 1)))
        }
    }
}

pub fn gen_date(rng: &mut impl Rng) -> Ast {
    if rng.gen_bool(0.5) {
        Ast::Lit(R::Date(day(rng.gen_range(0..5))))
    } else {
        Ast::Var(DATE_VARS[rng.gen_range(0..DATE_VARS.len())])
    }
}

pub fn gen_bool(rng: &mut impl Rng, depth: u32) -> Ast {
    if depth == 0 || rng.gen_bool(0.15) {
        return if rng.gen_bool(0.4) {
            Ast::Lit(R::Bool(rng.gen_bool(0.5)))
        } else {
            Ast::Var(BOOL_VARS[rng.gen_range(0..BOOL_VARS.len())])
        };
    }
    let cmp = [Op::Lt, Op::Le, Op::Gt, Op::Ge, Op::Eq, Op::Ne];
    match rng.gen_range(0..7) {
        0 => Ast::Not(Box::new(gen_bool(rng, depth - 1))),
        1 | 2 => {
            let op = if rng.gen_bool(0.5) { Op::And } else { Op::Or };
            Ast::Bin(op, Box::new(gen_bool(rng, depth - 1)), Box::new(gen_bool(rng, depth - 1)))
        }
        3 | 4 => Ast::Bin(
            cmp[rng.gen_range(0..cmp.len())],
            Box::new(gen_num(rng, depth - 1)),
            Box::new(gen_num(rng, depth - 1)),
        ),
        5 => Ast::Bin(cmp[rng.gen_range(0..cmp.len())], Box::new(gen_date(rng)), Box::new(gen_date(rng))),
        _ => {
            let op = if rng.gen_bool(0.5) { Op::Eq } else { Op::Ne };
            Ast::Bin(op, Box::new(gen_bool(rng, depth - 1)), Box::new(gen_bool(rng, depth - 1)))
        }
    }
}

/// Fully parenthesized source, choosing randomly among operator spellings.
pub fn print(ast: &Ast, rng: &mut impl Rng) -> String {
    let pick = |rng: &mut dyn rand::RngCore, options: &[&'static str]| -> &'static str {
        options[(rng.next_u32() as usize) % options.len()]
    };
    match ast {
        Ast::Lit(R::Num(n)) => format!("{n}"),
        Ast::Lit(R::Bool(b)) => format!("{b}"),
        Ast::Lit(R::Date(d)) => format!("Date(\"{}\")", d.format("%Y-%m-%d")),
        Ast::Var(v) => (*v).to_string(),
        Ast::Neg(x) => format!("(-{})", print(x, rng)),
        Ast::Not(x) => format!("(!{})", print(x, rng)),
        Ast::Bin(op, l, r) => {
            let sym = match op {
                Op::Add => "+",
                Op::Sub => pick(rng, &["-", "−"]),
                Op::Mul => "*",
                Op::Div => "/",
                Op::Lt => "<",
                Op::Le => pick(rng, &["<=", "≤"]),
                Op::Gt => ">",
                Op::Ge => pick(rng, &[">=", "≥"]),
                Op::Eq => pick(rng, &["==", "="]),
                Op::Ne => pick(rng, &["!=", "≠"]),
                Op::And => pick(rng, &["&", "&&"]),
                Op::Or => pick(rng, &["|", "||"]),
            };
            format!("({} {sym} {})", print(l, rng), print(r, rng))
        }
    }
}

/// Variable bindings; `None` means absent.
#[derive(Debug, Clone)]
pub struct Env {
    pub vars: Vec<(&'static str, Option<R>)>,
}

impl Env {
    pub fn random(rng: &mut impl Rng) -> Env {
        let mut vars = Vec::new();
        let present = |rng: &mut dyn rand::RngCore| !rng.next_u32().is_multiple_of(5);
        for v in NUM_VARS {
            let vals = [0.0, 1.0, 2.0, -3.0, 2.5, 7.0];
            let val = R::Num(vals[(rng.next_u32() as usize) % vals.len()]);
            vars.push((v, present(rng).then_some(val)));
        }
        for v in BOOL_VARS {
            let val = R::Bool(rng.gen_bool(0.5));
            vars.push((v, present(rng).then_some(val)));
        }
        for v in DATE_VARS {
            let val = R::Date(day(rng.gen_range(0..5)));
            vars.push((v, present(rng).then_some(val)));
        }
        Env { vars }
    }

    fn get(&self, name: &str) -> Option<R> {
        self.vars.iter().find(|(n, _)| *n == name).and_then(|(_, v)| *v)
    }

    pub fn scope(&self) -> Scope {
        let mut s = Scope::new();
        for (name, v) in &self.vars {
            s.set(
                name,
                v.map(|v| match v {
                    R::Num(n) => Value::Number(n),
                    R::Bool(b) => Value::Bool(b),
                    R::Date(d) => Value::Date(d),
                }),
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefError {
    DivisionByZero,
}

/// Reference semantics: absence propagates through arithmetic and negation;
/// a comparison with an absent side is false; `&`/`|` evaluate left to
/// right, short-circuit, and read absent as false. Division by a present
/// zero is an error.
pub fn eval(ast: &Ast, env: &Env) -> Result<Option<R>, RefError> {
    Ok(match ast {
        Ast::Lit(v) => Some(*v),
        Ast::Var(name) => env.get(name),
        Ast::Neg(x) => eval(x, env)?.map(|v| match v {
            R::Num(n) => R::Num(-n),
            _ => unreachable!("ill-typed negation"),
        }),
        Ast::Not(x) => eval(x, env)?.map(|v| match v {
            R::Bool(b) => R::Bool(!b),
            _ => unreachable!("ill-typed not"),
        }),
        Ast::Bin(Op::And, l, r) => {
            if !truthy(eval(l, env)?) {
                Some(R::Bool(false))
            } else {
                Some(R::Bool(truthy(eval(r, env)?)))
            }
        }
        Ast::Bin(Op::Or, l, r) => {
            if truthy(eval(l, env)?) {
                Some(R::Bool(true))
            } else {
                Some(R::Bool(truthy(eval(r, env)?)))
            }
        }
        Ast::Bin(op, l, r) => {
            let l = eval(l, env)?;
            let r = eval(r, env)?;
            let is_cmp = matches!(op, Op::Lt | Op::Le | Op::Gt | Op::Ge | Op::Eq | Op::Ne);
            match (l, r) {
                (Some(l), Some(r)) => Some(binary(*op, l, r)?),
                _ if is_cmp => Some(R::Bool(false)),
                _ => None,
            }
        }
    })
}

fn truthy(v: Option<R>) -> bool {
    matches!(v, Some(R::Bool(true)))
}

fn num_of(v: R) -> f64 {
    match v {
        R::Num(n) => n,
        R::Date(d) => f64::from(d.num_days_from_ce()),
        R::Bool(b) => f64::from(u8::from(b)),
    }
}

use chrono::Datelike;

fn binary(op: Op, l: R, r: R) -> Result<R, RefError> {
    let (a, b) = (num_of(l), num_of(r));
    Ok(match op {
        Op::Add => R::Num(a + b),
        Op::Sub => R::Num(a - b),
        Op::Mul => R::Num(a * b),
        Op::Div if b == 0.0 => return Err(RefError::DivisionByZero),
        Op::Div => R::Num(a / b),
        Op::Lt => R::Bool(a < b),
        Op::Le => R::Bool(a <= b),
        Op::Gt => R::Bool(a > b),
        Op::Ge => R::Bool(a >= b),
        Op::Eq => R::Bool(a == b),
        Op::Ne => R::Bool(a != b),
        Op::And | Op::Or => unreachable!("handled by the caller"),
    })
}

/// Top-level condition result: absent reads as false.
pub fn eval_condition(ast: &Ast, env: &Env) -> Result<bool, RefError> {
    eval(ast, env).map(truthy)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct DifferentialReport {
    pub cases: usize,
    pub true_results: usize,
    pub errors: usize,
}

/// Generates `count` boolean and `count / 2` numeric expressions, evaluates
/// each through the engine and through the reference interpreter, and
/// reports the first disagreement.
pub fn run_differential(seed: u64, count: usize) -> Result<DifferentialReport, String> {
    let mut rng = super::rng(seed);
    let sig = signature();
    let mut report = DifferentialReport::default();
    for i in 0..count {
        let ast = gen_bool(&mut rng, 5);
        let src = print(&ast, &mut rng);
        let parsed = Expr::parse(&src, &sig).map_err(|e| format!("case {i}: `{src}` failed to parse: {e}"))?;
        let reprinted = parsed.to_string();
        let again = Expr::parse(&reprinted, &sig).map_err(|e| format!("case {i}: reprint `{reprinted}` failed: {e}"))?;
        if again != parsed {
            return Err(format!("case {i}: `{src}` does not round-trip through `{reprinted}`"));
        }
        for _ in 0..3 {
            let env = Env::random(&mut rng);
            let got = parsed.eval_bool(&env.scope());
            let want = eval_condition(&ast, &env);
            match (&got, &want) {
                (Ok(g), Ok(w)) if g == w => {
                    report.true_results += usize::from(*g);
                }
                (Err(ExprError::DivisionByZero), Err(RefError::DivisionByZero)) => report.errors += 1,
                _ => return Err(format!("case {i}: `{src}` under {env:?}: engine {got:?}, reference {want:?}")),
            }
            report.cases += 1;
        }
    }
    for i in 0..count / 2 {
        let ast = gen_num(&mut rng, 4);
        let src = print(&ast, &mut rng);
        let parsed = Expr::parse(&src, &sig).map_err(|e| format!("numeric case {i}: `{src}`: {e}"))?;
        let env = Env::random(&mut rng);
        let got = parsed.eval_number(&env.scope());
        let want = eval(&ast, &env);
        let agree = match (&got, &want) {
            (Ok(g), Ok(Some(R::Num(w)))) => g == w || (g.is_nan() && w.is_nan()),
            (Err(ExprError::AbsentOperand(_)), Ok(None)) => true,
            (Err(ExprError::DivisionByZero), Err(RefError::DivisionByZero)) => true,
            _ => false,
        };
        if !agree {
            return Err(format!("numeric case {i}: `{src}` under {env:?}: engine {got:?}, reference {want:?}"));
        }
        report.cases += 1;
    }
    Ok(report)
}
