use std::fmt;

use super::{FixKind, Formula};

// Precedence contexts, loosest first.
const TOP: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const PREFIX: u8 = 3;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, TOP, f)
    }
}

fn write_prec(phi: &Formula, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = match phi {
        Formula::Fixpoint { .. } | Formula::Cond { .. } => ctx > TOP,
        Formula::MaxJ { .. } => ctx > OR,
        Formula::MinJ { .. } => ctx > AND,
        _ => false,
    };
    if wrap {
        f.write_str("(")?;
    }
    match phi {
        Formula::Var(x) | Formula::Const(x) => f.write_str(x)?,
        Formula::Modal { transition, body } => {
            write!(f, "{{{transition}}} ")?;
            write_prec(body, PREFIX, f)?;
        }
        Formula::Angelic { set, body } => {
            write!(f, "<{set}> ")?;
            write_prec(body, PREFIX, f)?;
        }
        Formula::Demonic { set, body } => {
            write!(f, "[{set}] ")?;
            write_prec(body, PREFIX, f)?;
        }
        Formula::MaxJ { left, right, .. } => {
            write_prec(left, OR, f)?;
            f.write_str(" \\/ ")?;
            write_prec(right, AND, f)?;
        }
        Formula::MinJ { left, right, .. } => {
            write_prec(left, AND, f)?;
            f.write_str(" /\\ ")?;
            write_prec(right, PREFIX, f)?;
        }
        Formula::Cond {
            predicate,
            then,
            otherwise,
        } => {
            write!(f, "if {predicate} then ")?;
            write_prec(then, TOP, f)?;
            f.write_str(" else ")?;
            write_prec(otherwise, TOP, f)?;
        }
        Formula::Fixpoint { kind, var, body } => {
            match kind {
                FixKind::Mu => write!(f, "mu {var} . ")?,
                FixKind::Nu => write!(f, "nu {var} . ")?,
                FixKind::Fix(x) => write!(f, "fix({x}) {var} . ")?,
            }
            write_prec(body, TOP, f)?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn prints_smallest_fixpoint() {
        assert_eq!(Formula::mu("X", Formula::var("X")).to_string(), "mu X . X");
    }

    #[test]
    fn parenthesises_by_precedence() {
        let f = Formula::min(
            Formula::max(Formula::constant("a"), Formula::constant("b")),
            Formula::modal("k", Formula::mu("X", Formula::var("X"))),
        )
        .numbered();
        assert_eq!(f.to_string(), "(a \\/ b) /\\ {k} (mu X . X)");
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn fix_parameter_round_trips() {
        let f = Formula::fix(0.1, "X", Formula::modal("k", Formula::var("X")));
        assert_eq!(f.to_string(), "fix(0.1) X . {k} X");
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }
}
