use crate::error::{Error, Result};
use crate::logic::ast::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    In,
    Eq,
    Not,
    And,
    Or,
    Imp,
    Iff,
    Exists,
    All,
    Dot,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Var(v) => format!("variable `{v}`"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            let word = &text[i..end];
            out.push((
                i,
                match word {
                    "in" => Tok::In,
                    "exists" => Tok::Exists,
                    "all" => Tok::All,
                    _ => Tok::Var(word.to_string()),
                },
            ));
            continue;
        }
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Imp, 2)
        } else {
            let t = match c {
                '=' => Tok::Eq,
                '!' | '¬' => Tok::Not,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '→' => Tok::Imp,
                '↔' => Tok::Iff,
                '∃' => Tok::Exists,
                '∀' => Tok::All,
                '∈' => Tok::In,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(Error::Parse {
                        offset: i,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (t, c.len_utf8())
        };
        out.push((i, tok));
        for _ in rest[..len].chars() {
            it.next();
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn var(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(v)
            }
            _ => self.fail("a variable"),
        }
    }

    fn level(&mut self, level: usize) -> Result<Formula> {
        const OPS: [Tok; 4] = [Tok::Iff, Tok::Imp, Tok::Or, Tok::And];
        if level == OPS.len() {
            return self.unary();
        }
        let mut acc = self.level(level + 1)?;
        while *self.peek() == OPS[level] {
            self.bump();
            let rhs = self.level(level + 1)?;
            acc = match level {
                0 => Formula::iff(acc, rhs),
                1 => Formula::implies(acc, rhs),
                2 => Formula::or(acc, rhs),
                _ => Formula::and(acc, rhs),
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Exists | Tok::All => {
                let exists = self.bump() == Tok::Exists;
                let v = self.var()?;
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                let body = self.level(0)?;
                Ok(if exists { Formula::exists(v, body) } else { Formula::forall(v, body) })
            }
            Tok::LParen => {
                self.bump();
                let f = self.level(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Var(_) => {
                let x = self.var()?;
                match self.bump() {
                    Tok::In => Ok(Formula::Member(x, self.var()?)),
                    Tok::Eq => Ok(Formula::Equal(x, self.var()?)),
                    _ => {
                        self.pos -= 1;
                        self.fail("`in` or `=`")
                    }
                }
            }
            _ => self.fail("a formula"),
        }
    }
}

/// Parses the ASCII syntax; `∈ ¬ ∧ ∨ → ↔ ∃ ∀` are accepted as aliases.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.level(0)?;
    if *p.peek() != Tok::End {
        return p.fail("end of input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(parse("x in y").unwrap(), Formula::member("x", "y"));
        let q = parse("exists b. (all z. (z in b <-> (z = b | z = p)) & !(b = p))").unwrap();
        assert_eq!(q.free_vars().into_iter().collect::<Vec<_>>(), ["p"]);
        match parse("exists x (x in y") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("a in b | c in d & e = f -> g in h <-> i in j").unwrap();
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(
                    Formula::member("a", "b"),
                    Formula::and(Formula::member("c", "d"), Formula::equal("e", "f")),
                ),
                Formula::member("g", "h"),
            ),
            Formula::member("i", "j"),
        );
        assert_eq!(f, expected);
        let chained = parse("a = a -> b = b -> c = c").unwrap();
        assert!(matches!(chained, Formula::Implies(ref l, _) if matches!(**l, Formula::Implies(..))));
        let body = parse("exists x. x in y & y in x").unwrap();
        assert!(matches!(body, Formula::Exists(_, ref b) if matches!(**b, Formula::And(..))));
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(
            parse("∀x. ∃y. ¬(x ∈ y) ∧ y = y").unwrap(),
            parse("all x. exists y. !(x in y) & y = y").unwrap()
        );
    }

    #[test]
    fn print_round_trips() {
        for text in [
            "x in y",
            "!(x = y)",
            "exists b. all z. (z in b <-> z = b | z = p) & !(b = p)",
            "(exists x. x in y) & y = y",
            "a in b & (c in d | e in f)",
            "!!(x in y) -> !all x. x = x",
            "!(all x. x = x) & y = y",
            "a = b -> c = d -> e = f",
            "a = b -> (c = d -> e = f)",
            "a = b & !exists x. x in x",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(f.to_string(), text);
            assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn keywords_are_not_variables() {
        assert!(parse("in in x").is_err());
        assert!(parse("x in").is_err());
        assert!(parse("x y").is_err());
        assert!(parse("x in y)").is_err());
    }
}
