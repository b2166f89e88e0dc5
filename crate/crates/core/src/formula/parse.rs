//! Concrete syntax.
//!
//! ```text
//! formula := disj
//! disj    := conj ('|' conj)*
//! conj    := unit ('&' unit)*
//! unit    := ('E' | 'A') var+ '.' formula      -- the body extends as far right as possible
//!          | '(' formula ')'
//!          | atom
//! atom    := 'dep(' vars ',' vars ')'
//!          | 'dep((' vars ';' vars '),(' vars ';' vars '))'
//!          | vars '_||_' ('{' vars '}')? vars
//!          | vars '<=' vars
//!          | 'excl(' vars ';' vars ')'
//!          | 'nc(' vars ';' var ')'
//!          | 'ncc(' vars ')'
//!          | term ('=' | '!=') term
//! term    := var | '\'' symbol '\''
//! ```
//!
//! Variable lists are whitespace separated and may be empty where that makes
//! sense (`dep(, l)` is the constancy atom). `E` and `A` are reserved.

use crate::error::{Error, Result};
use crate::formula::ast::{Formula, Term};
use crate::value::{Value, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(String),
    Exists,
    Forall,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Amp,
    Bar,
    Perp,
    Subset,
    Eq,
    Neq,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Const(s) => format!("constant '{s}'"),
            Tok::Exists => "`E`".into(),
            Tok::Forall => "`A`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Perp => "`_||_`".into(),
            Tok::Subset => "`<=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| Error::Syntax { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
        let (tok, width) = if rest.starts_with("_||_") {
            (Tok::Perp, 4)
        } else if rest.starts_with("<=") {
            (Tok::Subset, 2)
        } else if rest.starts_with("!=") {
            (Tok::Neq, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                '.' => (Tok::Dot, 1),
                '&' => (Tok::Amp, 1),
                '|' => (Tok::Bar, 1),
                '=' => (Tok::Eq, 1),
                '\'' => {
                    let mut j = i + 1;
                    let mut s = String::new();
                    loop {
                        match chars.get(j) {
                            None => return Err(err(l0, c0, "unterminated constant".into())),
                            Some('\'') => break,
                            Some('\\') if matches!(chars.get(j + 1), Some('\'') | Some('\\')) => {
                                s.push(chars[j + 1]);
                                j += 2;
                            }
                            Some('\n') => return Err(err(l0, c0, "newline inside constant".into())),
                            Some(&ch) => {
                                s.push(ch);
                                j += 1;
                            }
                        }
                    }
                    (Tok::Const(s), j + 1 - i)
                }
                c if is_ident_char(c) => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        if chars[j] == '_' && chars[j..].iter().take(4).collect::<String>() == "_||_" {
                            break;
                        }
                        j += 1;
                    }
                    let word: String = chars[i..j].iter().collect();
                    let tok = match word.as_str() {
                        "E" => Tok::Exists,
                        "A" => Tok::Forall,
                        _ => Tok::Ident(word),
                    };
                    (tok, j - i)
                }
                other => return Err(err(l0, c0, format!("unexpected character {other:?}"))),
            }
        };
        out.push(Spanned { tok, line: l0, column: c0 });
        i += width;
        col += width;
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> Error {
        let s = &self.toks[self.pos];
        Error::Syntax { line: s.line, column: s.column, message }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let g = self.conj()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unit()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let g = self.unit()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unit(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Exists | Tok::Forall => {
                let universal = self.bump() == Tok::Forall;
                let xs = self.vars();
                if xs.is_empty() {
                    return Err(self.error_here("quantifier without a variable".into()));
                }
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if universal { Formula::forall_all(&xs, body) } else { Formula::exists_all(&xs, body) })
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn vars(&mut self) -> Vec<Var> {
        let mut out = Vec::new();
        while let Tok::Ident(name) = self.peek() {
            if *self.peek_at(1) == Tok::LParen {
                break;
            }
            out.push(Var::new(name));
            self.bump();
        }
        out
    }

    fn var(&mut self) -> Result<Var> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Var::new(name))
            }
            other => Err(self.error_here(format!("expected a variable, found {}", other.describe()))),
        }
    }

    fn arity<T>(&self, start: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Arity(m) => {
                let s = &self.toks[start];
                Error::Arity(format!("{m} (line {}, column {})", s.line, s.column))
            }
            other => other,
        })
    }

    fn atom(&mut self) -> Result<Formula> {
        let start = self.pos;
        if let Tok::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == Tok::LParen {
                self.bump();
                self.bump();
                return match name.as_str() {
                    "dep" => self.dep_body(start),
                    "nc" => {
                        let xs = self.vars();
                        self.expect(Tok::Semi)?;
                        let y = self.var()?;
                        self.expect(Tok::RParen)?;
                        Ok(Formula::nc(xs, y))
                    }
                    "ncc" => {
                        let xs = self.vars();
                        self.expect(Tok::RParen)?;
                        Ok(Formula::ncc(xs))
                    }
                    "excl" => {
                        let a = self.vars();
                        self.expect(Tok::Semi)?;
                        let b = self.vars();
                        self.expect(Tok::RParen)?;
                        self.arity(start, Formula::excl(a, b))
                    }
                    _ => Err(Error::Syntax {
                        line: self.toks[start].line,
                        column: self.toks[start].column,
                        message: format!("unknown atom `{name}`"),
                    }),
                };
            }
        }
        if let Tok::Const(c) = self.peek().clone() {
            self.bump();
            return self.literal(Term::Const(Value::new(c)));
        }
        let left = self.vars();
        match self.peek().clone() {
            Tok::Perp => {
                self.bump();
                let mut cond = Vec::new();
                if *self.peek() == Tok::LBrace {
                    self.bump();
                    cond = self.vars();
                    self.expect(Tok::RBrace)?;
                }
                let right = self.vars();
                Ok(Formula::indep(left, cond, right))
            }
            Tok::Subset => {
                self.bump();
                let sup = self.vars();
                self.arity(start, Formula::incl(left, sup))
            }
            Tok::Eq | Tok::Neq if left.len() == 1 => {
                let v = left.into_iter().next().expect("one variable");
                self.literal(Term::Var(v))
            }
            Tok::Eq | Tok::Neq if left.len() > 1 => {
                Err(self.error_here("equality compares single terms, not tuples".into()))
            }
            other => Err(self.error_here(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn literal(&mut self, a: Term) -> Result<Formula> {
        let eq = match self.peek().clone() {
            Tok::Eq => true,
            Tok::Neq => false,
            other => {
                return Err(self.error_here(format!("expected `=` or `!=`, found {}", other.describe())));
            }
        };
        self.bump();
        let b = match self.peek().clone() {
            Tok::Ident(v) => Term::Var(Var::new(v)),
            Tok::Const(c) => Term::Const(Value::new(c)),
            other => return Err(self.error_here(format!("expected a term, found {}", other.describe()))),
        };
        self.bump();
        Ok(if eq { Formula::Eq(a, b) } else { Formula::Neq(a, b) })
    }

    fn dep_body(&mut self, start: usize) -> Result<Formula> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let x1 = self.vars();
            self.expect(Tok::Semi)?;
            let x2 = self.vars();
            self.expect(Tok::RParen)?;
            self.expect(Tok::Comma)?;
            self.expect(Tok::LParen)?;
            let y1 = self.vars();
            self.expect(Tok::Semi)?;
            let y2 = self.vars();
            self.expect(Tok::RParen)?;
            self.expect(Tok::RParen)?;
            return self.arity(start, Formula::gen_dep(x1, x2, y1, y2));
        }
        let det = self.vars();
        self.expect(Tok::Comma)?;
        let dependent = self.vars();
        self.expect(Tok::RParen)?;
        Ok(Formula::dep(det, dependent))
    }
}

/// Parses a formula.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error_here(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Formula> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::vars;

    #[test]
    fn atoms() {
        assert_eq!(parse("dep(m1 m2, o1 o2)").unwrap(), Formula::dep(vars("m1 m2"), vars("o1 o2")));
        assert_eq!(parse("o1 _||_{m1} m2").unwrap(), Formula::indep(vars("o1"), vars("m1"), vars("m2")));
        assert_eq!(parse("x _||_ y").unwrap(), Formula::indep(vars("x"), vec![], vars("y")));
        assert_eq!(parse("dep(, l)").unwrap(), Formula::dep(vec![], vars("l")));
        assert_eq!(
            parse("dep((m1;m2),(v1;v2))").unwrap(),
            Formula::gen_dep(vars("m1"), vars("m2"), vars("v1"), vars("v2")).unwrap()
        );
        assert_eq!(parse("m1 v1 <= m1 o1").unwrap(), Formula::incl(vars("m1 v1"), vars("m1 o1")).unwrap());
        assert_eq!(parse("nc(x1 x2; y)").unwrap(), Formula::nc(vars("x1 x2"), Var::new("y")));
        assert_eq!(parse("ncc(m1 m2 m3 m4)").unwrap(), Formula::ncc(vars("m1 m2 m3 m4")));
        assert_eq!(parse("excl(z w; x y)").unwrap(), Formula::excl(vars("z w"), vars("x y")).unwrap());
        assert_eq!(parse("x != 'a b'").unwrap(), Formula::neq(Term::var("x"), Term::constant("a b")));
        assert_eq!(parse("'c' = y").unwrap(), Formula::eq(Term::constant("c"), Term::var("y")));
    }

    #[test]
    fn quantifier_scope_is_greedy() {
        let f = parse("E l . dep(m1 l, o1) & dep(m2 l, o2)").unwrap();
        let body = Formula::and(Formula::dep(vars("m1 l"), vars("o1")), Formula::dep(vars("m2 l"), vars("o2")));
        assert_eq!(f, Formula::exists(Var::new("l"), body));
        let g = parse("(E l . dep(m1 l, o1)) & dep(m2, o2)").unwrap();
        assert!(matches!(g, Formula::And(..)));
        let h = parse("A x y . x = y").unwrap();
        assert_eq!(
            h,
            Formula::forall(
                Var::new("x"),
                Formula::forall(Var::new("y"), Formula::var_eq(&Var::new("x"), &Var::new("y")))
            )
        );
    }

    #[test]
    fn precedence() {
        let f = parse("x = y | y = z & z = x").unwrap();
        assert!(matches!(f, Formula::Or(_, ref r) if matches!(**r, Formula::And(..))));
        let g = parse("x = y & y = z & z = x").unwrap();
        assert!(matches!(g, Formula::And(ref l, _) if matches!(**l, Formula::And(..))));
    }

    #[test]
    fn errors_have_positions() {
        match parse("dep(x, y") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 9)),
            other => panic!("{other:?}"),
        }
        match parse("x = y &\n  ??") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x y <= z"), Err(Error::Arity(_))));
        assert!(matches!(parse("dep((a;b c),(x;y))"), Err(Error::Arity(_))));
        assert!(parse("E . x = y").is_err());
        assert!(parse("frob(x)").is_err());
        assert!(parse("x = y)").is_err());
        assert!(parse("'open").is_err());
    }
}
