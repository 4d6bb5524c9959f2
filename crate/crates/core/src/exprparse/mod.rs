//! A small arithmetic expression language for coefficient functions and
//! log-rates.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          // right associative
//! primary := number | variable | call | '(' expr ')'
//! call    := name '(' expr (',' expr)? ')'
//! ```
//!
//! The variable is a single symbol, `t` or `k`; an expression may use only
//! one of them. Implicit multiplication is not supported.

mod eval;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

pub use eval::SignedLog;
pub use parser::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Abs,
    Sgn,
    Sqrt,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Exp, Func::Log, Func::Abs, Func::Sgn, Func::Sqrt, Func::Min, Func::Max];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr<F> {
    Const(F),
    /// The free variable, with the symbol it was written as.
    Var(char),
    Neg(Box<Expr<F>>),
    Binary(BinOp, Box<Expr<F>>, Box<Expr<F>>),
    Call(Func, Vec<Expr<F>>),
}

pub const VARIABLE_SYMBOLS: [char; 2] = ['t', 'k'];

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: found {found}, expected one of {}", .expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("expression mixes variables `{first}` and `{second}` (offset {offset})")]
    MixedVariables { first: char, second: char, offset: usize },
    #[error("domain error in `{expr}` at input {input}: {reason}")]
    Domain {
        expr: String,
        input: f64,
        reason: &'static str,
    },
}

impl<F: Real> Expr<F> {
    pub fn constant(x: F) -> Self {
        Expr::Const(x)
    }

    pub fn var(symbol: char) -> Self {
        Expr::Var(symbol)
    }

    pub fn binary(op: BinOp, lhs: Expr<F>, rhs: Expr<F>) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, args: Vec<Expr<F>>) -> Self {
        debug_assert_eq!(func.arity(), args.len());
        Expr::Call(func, args)
    }

    pub fn neg(inner: Expr<F>) -> Self {
        Expr::Neg(Box::new(inner))
    }

    /// The variable symbol used, if any.
    pub fn variable(&self) -> Option<char> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(c) => Some(*c),
            Expr::Neg(e) => e.variable(),
            Expr::Binary(_, a, b) => a.variable().or_else(|| b.variable()),
            Expr::Call(_, args) => args.iter().find_map(|a| a.variable()),
        }
    }

    /// Replaces every occurrence of the variable by `with`.
    pub fn substitute(&self, with: &Expr<F>) -> Expr<F> {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(_) => with.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute(with)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(with), b.substitute(with)),
            Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| a.substitute(with)).collect()),
        }
    }

    /// Renames the variable symbol.
    pub fn with_symbol(&self, symbol: char) -> Expr<F> {
        self.substitute(&Expr::Var(symbol))
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(e) => 1 + e.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

fn write_child<F: Real>(f: &mut fmt::Formatter<'_>, child: &Expr<F>, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Minimal-parenthesis printer; its output parses back to the same tree.
impl<F: Real> fmt::Display for Expr<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < F::zero() {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(s) => write!(f, "{s}"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, 3)
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                write_child(f, a, 5)?;
                f.write_str("^")?;
                write_child(f, b, 3)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                write_child(f, a, p)?;
                write!(f, "{}", op.symbol())?;
                write_child(f, b, p + 1)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printer_keeps_structure() {
        let cases = [
            "2*abs(t)",
            "sgn(t)*t^2",
            "-t^2",
            "(-t)^2",
            "2^3^t",
            "(2^3)^t",
            "a",
            "t-(t-1)",
            "t/(t*2)",
            "min(t,-1)+max(1,2)",
            "exp(-3*k^2-3*k-1)",
            "t^-1",
            "--t",
        ];
        for src in cases {
            let Ok(e) = parse::<f64>(src) else { continue };
            let printed = e.to_string();
            let again = parse::<f64>(&printed).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn substitution_shifts_argument() {
        let e = parse::<f64>("t^2").unwrap();
        let shifted = e.substitute(&parse("t+1").unwrap());
        assert_eq!(shifted.eval(2.0).unwrap(), 9.0);
        assert_eq!(shifted.to_string(), "(t+1)^2");
    }
}
