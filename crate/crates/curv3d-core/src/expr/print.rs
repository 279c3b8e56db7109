//! Printing with minimal parentheses. The output reparses to a structurally
//! equal tree, which the round-trip property test checks.

use super::{Expr, Node};
use num_rational::BigRational;
use num_traits::Signed;
use std::fmt;

// precedence: additive 1, multiplicative 2, power 3, primary 4.
// unary minus sits at base level in the grammar, so `-x^2` reparses as
// `(-x)^2`; Neg therefore prints its operand at primary level.
fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(_, _) => 1,
        Node::Mul(_, _) | Node::Div(_, _) => 2,
        Node::Neg(_) => 2,
        Node::Const(r) if r.is_negative() => 2,
        Node::Pow(_, _) => 3,
        _ => 4,
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Const(r) => write_rational(f, r),
        Node::Sym(s) => write!(f, "{s}"),
        Node::Func { name, primes, args } => {
            write!(f, "{name}")?;
            for _ in 0..*primes {
                write!(f, "'")?;
            }
            write!(f, "(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_expr(f, a)?;
            }
            write!(f, ")")
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            write_prec(f, a, 4)
        }
        Node::Un(op, a) => {
            write!(f, "{}(", op.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Node::Add(a, b) => {
            write_prec(f, a, 1)?;
            // render added negatives as subtraction
            match b.node() {
                Node::Neg(inner) => {
                    write!(f, " - ")?;
                    write_prec(f, inner, 2)
                }
                Node::Const(r) if r.is_negative() => {
                    write!(f, " - ")?;
                    write_rational(f, &-r)
                }
                _ => {
                    write!(f, " + ")?;
                    write_prec(f, b, 2)
                }
            }
        }
        Node::Mul(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, " * ")?;
            write_prec(f, b, 3)
        }
        Node::Div(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, " / ")?;
            write_prec(f, b, 3)
        }
        Node::Pow(a, e) => {
            write_prec(f, a, 3)?;
            write!(f, "^")?;
            if e.is_negative() {
                write!(f, "-")?;
                write_rational(f, &-e)
            } else {
                write_rational(f, e)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_expr;
    use super::*;

    fn roundtrip(text: &str) {
        let e = parse_expr(text).unwrap();
        let printed = e.to_string();
        let e2 = parse_expr(&printed)
            .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
        assert!(e == e2, "`{text}` printed as `{printed}` reparsed differently");
    }

    #[test]
    fn print_reparse_fixed_cases() {
        for text in [
            "-(1) * t^2 + x",
            "a + b * c",
            "a * (b + c)",
            "a - b - c",
            "a / (b / c)",
            "a * b / c",
            "x^-3",
            "x^1/2 * y",
            "(x + y)^2",
            "sinh(r) / r",
            "H'(r) * D(r) - H(r) * D'(r)",
            "-x",
            "1 - 2 * t",
            "3/4",
            "sqrt(x + 1)",
        ] {
            roundtrip(text);
        }
    }

    #[test]
    fn negative_constant_in_sum() {
        let e = Expr::add(Expr::sym("x"), Expr::int(-3));
        assert_eq!(e.to_string(), "x - 3");
        roundtrip(&e.to_string());
    }

    #[test]
    fn neg_binds_tighter_than_mul() {
        let e = Expr::mul(Expr::neg(Expr::sym("a")), Expr::sym("b"));
        let p = e.to_string();
        assert_eq!(parse_expr(&p).unwrap(), e);
    }
}
