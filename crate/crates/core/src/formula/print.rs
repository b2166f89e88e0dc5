use std::fmt::{self, Write};

use crate::formula::ast::{Formula, Term};
use crate::value::Var;

fn var_list(vs: &[Var]) -> String {
    vs.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" ")
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.to_string(),
        Term::Const(c) => {
            let escaped = c.as_str().replace('\\', "\\\\").replace('\'', "\\'");
            format!("'{escaped}'")
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Top,
    AndLeft,
    AndRight,
    OrLeft,
    OrRight,
}

fn needs_parens(f: &Formula, slot: Slot) -> bool {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => slot != Slot::Top,
        Formula::And(..) => slot == Slot::AndRight,
        Formula::Or(..) => matches!(slot, Slot::AndLeft | Slot::AndRight | Slot::OrRight),
        _ => false,
    }
}

fn write_formula(out: &mut String, f: &Formula, slot: Slot) {
    if needs_parens(f, slot) {
        out.push('(');
        write_formula(out, f, Slot::Top);
        out.push(')');
        return;
    }
    match f {
        Formula::Eq(a, b) => {
            let _ = write!(out, "{} = {}", term(a), term(b));
        }
        Formula::Neq(a, b) => {
            let _ = write!(out, "{} != {}", term(a), term(b));
        }
        Formula::Dep { det, dependent } => {
            let _ = write!(out, "dep({}, {})", var_list(det), var_list(dependent));
        }
        Formula::GenDep { x1, x2, y1, y2 } => {
            let _ = write!(out, "dep(({};{}),({};{}))", var_list(x1), var_list(x2), var_list(y1), var_list(y2));
        }
        Formula::Indep { left, cond, right } => {
            out.push_str(&var_list(left));
            if !left.is_empty() {
                out.push(' ');
            }
            out.push_str("_||_");
            if !cond.is_empty() {
                let _ = write!(out, "{{{}}}", var_list(cond));
            }
            if !right.is_empty() {
                out.push(' ');
                out.push_str(&var_list(right));
            }
        }
        Formula::Incl { sub, sup } => {
            let _ = write!(out, "{} <= {}", var_list(sub), var_list(sup));
        }
        Formula::Excl { left, right } => {
            let _ = write!(out, "excl({}; {})", var_list(left), var_list(right));
        }
        Formula::Nc { xs, y } => {
            let _ = write!(out, "nc({}; {})", var_list(xs), y);
        }
        Formula::Ncc { xs } => {
            let _ = write!(out, "ncc({})", var_list(xs));
        }
        Formula::And(a, b) => {
            write_formula(out, a, Slot::AndLeft);
            out.push_str(" & ");
            write_formula(out, b, Slot::AndRight);
        }
        Formula::Or(a, b) => {
            write_formula(out, a, Slot::OrLeft);
            out.push_str(" | ");
            write_formula(out, b, Slot::OrRight);
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut xs = Vec::new();
            let mut body = f;
            loop {
                match (body, universal) {
                    (Formula::Exists(x, g), false) | (Formula::Forall(x, g), true) => {
                        xs.push(x.clone());
                        body = g;
                    }
                    _ => break,
                }
            }
            let _ = write!(out, "{} {} . ", if universal { "A" } else { "E" }, var_list(&xs));
            write_formula(out, body, Slot::Top);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self, Slot::Top);
        f.write_str(&s)
    }
}
