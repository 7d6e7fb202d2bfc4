use std::collections::BTreeSet;
use std::fmt;

/// First-order formula over `{∈, =}`. Binary connectives associate to the
/// left when parsed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Member(String, String),
    Equal(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    ForAll(String, Box<Formula>),
}

impl Formula {
    pub fn member(x: impl Into<String>, y: impl Into<String>) -> Self {
        Formula::Member(x.into(), y.into())
    }

    pub fn equal(x: impl Into<String>, y: impl Into<String>) -> Self {
        Formula::Equal(x.into(), y.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(v.into(), Box::new(body))
    }

    /// `v = {c, p}` spelled out as `all z. (z in v <-> (z = c | z = p))`.
    /// `z` must differ from `v`, `c` and `p`.
    pub fn pair_abstraction(v: &str, c: &str, p: &str, z: &str) -> Self {
        Formula::forall(
            z,
            Formula::iff(
                Formula::member(z, v),
                Formula::or(Formula::equal(z, c), Formula::equal(z, p)),
            ),
        )
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut atom = |x: &'a String, bound: &Vec<&'a str>| {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        };
        match self {
            Formula::Member(x, y) | Formula::Equal(x, y) => {
                atom(x, bound);
                atom(y, bound);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::ForAll(v, body) => {
                bound.push(v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Member(..) | Formula::Equal(..) => 0,
            Formula::Not(a) => a.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, body) | Formula::ForAll(_, body) => 1 + body.quantifier_depth(),
        }
    }
}

const IFF: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn write_formula(f: &Formula, prec: u8, rightmost: bool, out: &mut String) {
    let binary = |op: &str, p: u8, a: &Formula, b: &Formula, out: &mut String| {
        let paren = p < prec;
        if paren {
            out.push('(');
        }
        write_formula(a, p, false, out);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        write_formula(b, p + 1, rightmost || paren, out);
        if paren {
            out.push(')');
        }
    };
    match f {
        Formula::Member(x, y) => {
            out.push_str(x);
            out.push_str(" in ");
            out.push_str(y);
        }
        Formula::Equal(x, y) => {
            out.push_str(x);
            out.push_str(" = ");
            out.push_str(y);
        }
        Formula::Not(a) => {
            out.push('!');
            if matches!(**a, Formula::Member(..) | Formula::Equal(..)) {
                out.push('(');
                write_formula(a, 0, true, out);
                out.push(')');
            } else {
                write_formula(a, UNARY, rightmost, out);
            }
        }
        Formula::And(a, b) => binary("&", AND, a, b, out),
        Formula::Or(a, b) => binary("|", OR, a, b, out),
        Formula::Implies(a, b) => binary("->", IMP, a, b, out),
        Formula::Iff(a, b) => binary("<->", IFF, a, b, out),
        Formula::Exists(v, body) | Formula::ForAll(v, body) => {
            let kw = if matches!(f, Formula::Exists(..)) { "exists" } else { "all" };
            if !rightmost {
                out.push('(');
            }
            out.push_str(kw);
            out.push(' ');
            out.push_str(v);
            out.push_str(". ");
            write_formula(body, 0, true, out);
            if !rightmost {
                out.push(')');
            }
        }
    }
}

/// Canonical ASCII text with the fewest parentheses that parse back to
/// the same tree; negated atoms are always parenthesized.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(self, 0, true, &mut s);
        f.write_str(&s)
    }
}
