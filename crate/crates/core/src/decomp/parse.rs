use super::{CurveDecomposition, CurveTerm, Layout, Monomial, RankDecomposition, Term};
use crate::error::{Error, Result};
use crate::field::Cyclotomic6;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub enum Decomposition {
    Exact(RankDecomposition),
    Curve(CurveDecomposition),
}

#[derive(Serialize, Deserialize)]
struct ExactTermJson {
    prefactor: Cyclotomic6,
    a: Vec<Cyclotomic6>,
    b: Vec<Cyclotomic6>,
    c: Vec<Cyclotomic6>,
}

#[derive(Serialize, Deserialize)]
struct CurveTermJson {
    a: Vec<Monomial>,
    b: Vec<Monomial>,
    c: Vec<Monomial>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DecompositionJson {
    Exact {
        dims: [usize; 3],
        #[serde(default)]
        layout: Layout,
        terms: Vec<ExactTermJson>,
    },
    Curve {
        dims: [usize; 3],
        terms: Vec<CurveTermJson>,
    },
}

impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match self {
            Decomposition::Exact(d) => DecompositionJson::Exact {
                dims: d.dims,
                layout: d.layout,
                terms: d
                    .terms
                    .iter()
                    .map(|t| {
                        let [a, b, c] = t.factors.clone();
                        ExactTermJson { prefactor: t.prefactor.clone(), a, b, c }
                    })
                    .collect(),
            },
            Decomposition::Curve(d) => DecompositionJson::Curve {
                dims: d.dims,
                terms: d
                    .terms
                    .iter()
                    .map(|t| {
                        let [a, b, c] = t.factors.clone();
                        CurveTermJson { a, b, c }
                    })
                    .collect(),
            },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match DecompositionJson::deserialize(d)? {
            DecompositionJson::Exact { dims, layout, terms } => Decomposition::Exact(RankDecomposition {
                dims,
                layout,
                terms: terms.into_iter().map(|t| Term { prefactor: t.prefactor, factors: [t.a, t.b, t.c] }).collect(),
            }),
            DecompositionJson::Curve { dims, terms } => Decomposition::Curve(CurveDecomposition {
                dims,
                terms: terms.into_iter().map(|t| CurveTerm { factors: [t.a, t.b, t.c] }).collect(),
            }),
        })
    }
}

impl Decomposition {
    fn validate(&self) -> Result<()> {
        match self {
            Decomposition::Exact(d) => d.validate().map_err(|e| Error::parse("decomposition", e.to_string())),
            Decomposition::Curve(d) => d.validate(),
        }
    }
}

/// Reads a JSON decomposition or a listing of nested `coeff*t^exp` lists.
pub fn parse_decomposition(path: impl AsRef<Path>) -> Result<Decomposition> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_decomposition_str(&text)
}

pub fn parse_decomposition_str(text: &str) -> Result<Decomposition> {
    let d = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("line {}", e.line()), e.to_string()))?
    } else {
        Decomposition::Curve(parse_appendix_listing(text)?)
    };
    d.validate()?;
    Ok(d)
}

#[derive(Debug)]
enum Node {
    List(Vec<Node>),
    Entry(String),
}

/// Parses a listing such as
///
/// ```text
/// decomp = [
/// [[0.5*t^4, 1.0*t, 0, ...], [...], [...]],
/// ...
/// ]
/// ```
///
/// Lines starting with `#` and anything before the first `[` are ignored.
/// Entries are `c`, `c*t` or `c*t^e` with `e` a possibly negative integer.
pub fn parse_appendix_listing(text: &str) -> Result<CurveDecomposition> {
    let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n");
    let start = body.find('[').ok_or_else(|| Error::parse("listing", "no opening bracket"))?;
    let mut chars = body[start..].chars().peekable();
    let root = parse_node(&mut chars)?;
    let Node::List(terms) = root else { return Err(Error::parse("listing", "expected a list")) };
    let mut out = vec![];
    let mut dims: Option<[usize; 3]> = None;
    for (ti, term) in terms.into_iter().enumerate() {
        let loc = || format!("term {}", ti + 1);
        let Node::List(factors) = term else { return Err(Error::parse(loc(), "expected a list of 3 factors")) };
        if factors.len() != 3 {
            return Err(Error::parse(loc(), format!("has {} factors, expected 3", factors.len())));
        }
        let mut parsed: Vec<Vec<Monomial>> = vec![];
        for (fi, f) in factors.into_iter().enumerate() {
            let Node::List(entries) = f else { return Err(Error::parse(loc(), format!("factor {} is not a list", fi + 1))) };
            let v = entries
                .into_iter()
                .enumerate()
                .map(|(ei, e)| match e {
                    Node::Entry(s) => parse_monomial(&s)
                        .map_err(|m| Error::parse(format!("term {} factor {} entry {}", ti + 1, fi + 1, ei + 1), m)),
                    Node::List(_) => Err(Error::parse(loc(), "nested list inside a factor")),
                })
                .collect::<Result<Vec<_>>>()?;
            parsed.push(v);
        }
        let lens = [parsed[0].len(), parsed[1].len(), parsed[2].len()];
        match dims {
            None => dims = Some(lens),
            Some(d) if d != lens => {
                return Err(Error::parse(loc(), format!("factor lengths {lens:?} differ from {d:?}")));
            }
            _ => {}
        }
        let [a, b, c]: [Vec<Monomial>; 3] = parsed.try_into().expect("three factors");
        out.push(CurveTerm { factors: [a, b, c] });
    }
    let dims = dims.ok_or_else(|| Error::parse("listing", "no terms"))?;
    Ok(CurveDecomposition { dims, terms: out })
}

fn parse_node(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Result<Node> {
    skip_ws(chars);
    if chars.peek() == Some(&'[') {
        chars.next();
        let mut items = vec![];
        loop {
            skip_ws(chars);
            match chars.peek() {
                Some(']') => {
                    chars.next();
                    return Ok(Node::List(items));
                }
                Some(',') => {
                    chars.next();
                }
                Some(_) => items.push(parse_node(chars)?),
                None => return Err(Error::parse("listing", "unterminated list")),
            }
        }
    }
    let mut s = String::new();
    while let Some(&c) = chars.peek() {
        if c == ',' || c == ']' || c == '[' {
            break;
        }
        s.push(c);
        chars.next();
    }
    Ok(Node::Entry(s.trim().to_string()))
}

fn skip_ws(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) {
    while chars.peek().is_some_and(|c| c.is_whitespace()) {
        chars.next();
    }
}

fn parse_monomial(s: &str) -> std::result::Result<Monomial, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (coef, power) = match s.split_once('*') {
        Some((c, p)) => (c, Some(p)),
        None => (s.as_str(), None),
    };
    let c: f64 = coef.parse().map_err(|_| format!("bad coefficient {coef:?}"))?;
    let e = match power {
        None => 0,
        Some("t") => 1,
        Some(p) => {
            let exp = p.strip_prefix("t^").or_else(|| p.strip_prefix("t**")).ok_or_else(|| format!("bad power {p:?}"))?;
            exp.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| format!("bad exponent {exp:?}"))?
        }
    };
    Ok(Monomial { c, e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials() {
        assert_eq!(parse_monomial("0").unwrap(), Monomial { c: 0.0, e: 0 });
        assert_eq!(parse_monomial("-1.5*t").unwrap(), Monomial { c: -1.5, e: 1 });
        assert_eq!(parse_monomial("2.0*t^-8").unwrap(), Monomial { c: 2.0, e: -8 });
        assert_eq!(parse_monomial("2.0*t**3").unwrap(), Monomial { c: 2.0, e: 3 });
        assert!(parse_monomial("x*t").is_err());
        assert!(parse_monomial("1*s^2").is_err());
    }

    #[test]
    fn small_listing() {
        let text = "## comment\nt = var('t')\nd = [\n[[1.0*t, 0], [2, 0.5*t^-1], [0, 1]],\n[[0, 0], [0, 0], [0, 0]]\n]\n";
        let c = parse_appendix_listing(text).unwrap();
        assert_eq!(c.dims, [2, 2, 2]);
        assert_eq!(c.terms.len(), 2);
        assert_eq!(c.terms[0].factors[1][1], Monomial { c: 0.5, e: -1 });
    }

    #[test]
    fn mismatched_factor_length_names_the_term() {
        let text = "[[[1, 0], [2, 0], [0, 1]], [[1, 0], [2], [0, 1]]]";
        let err = parse_appendix_listing(text).unwrap_err();
        assert!(err.to_string().contains("term 2"), "{err}");
    }
}
