//! Parser for the `.fto` ontology text format.
//!
//! ```text
//! # upper layer
//! concept SensitiveAttribute.
//! sensitive concept ProxyForLowIncome.
//! role livesInZIP.
//! data MedianIncome.
//! individual ZIP_12345.
//! axiom exists(livesInZIP, {ZIP_12345}) => ProxyForLowIncome.
//! axiom MedianIncome < 30000 and exists(livesInZIP, LowIncomeZIP) => ProxyForLowIncome.
//! ```

use std::collections::HashMap;

use super::{Axiom, Comparator, ConceptExpr, NameKind, Ontology, OntologyError};
use crate::decimal::Decimal;

const KEYWORDS: &[&str] = &["concept", "sensitive", "role", "data", "individual", "axiom", "exists", "and"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Dot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Arrow,
    Cmp(Comparator),
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn syntax(pos: Pos, message: impl Into<String>) -> OntologyError {
    OntologyError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<Token>, OntologyError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let simple = match c {
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            _ => None,
        };
        if let Some(tok) = simple {
            advance!();
            tokens.push(Token { tok, pos });
            continue;
        }
        match (c, peek) {
            ('=', Some('>')) => {
                advance!();
                advance!();
                tokens.push(Token { tok: Tok::Arrow, pos });
                continue;
            }
            ('<', Some('=')) | ('>', Some('=')) => {
                let cmp = if c == '<' { Comparator::Le } else { Comparator::Ge };
                advance!();
                advance!();
                tokens.push(Token { tok: Tok::Cmp(cmp), pos });
                continue;
            }
            ('<', _) | ('>', _) | ('=', _) => {
                let cmp = match c {
                    '<' => Comparator::Lt,
                    '>' => Comparator::Gt,
                    _ => Comparator::Eq,
                };
                advance!();
                tokens.push(Token { tok: Tok::Cmp(cmp), pos });
                continue;
            }
            _ => {}
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                advance!();
            }
            tokens.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        let signed_digit = (c == '-' || c == '+') && peek.is_some_and(|p| p.is_ascii_digit());
        if c.is_ascii_digit() || signed_digit {
            let start = i;
            advance!();
            let digits = |i: usize| i < chars.len() && chars[i].is_ascii_digit();
            while digits(i) {
                advance!();
            }
            if i < chars.len() && chars[i] == '.' && digits(i + 1) {
                advance!();
                while digits(i) {
                    advance!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let sign = chars.get(i + 1).is_some_and(|&s| s == '-' || s == '+');
                let first = if sign { i + 2 } else { i + 1 };
                if digits(first) {
                    advance!();
                    if sign {
                        advance!();
                    }
                    while digits(i) {
                        advance!();
                    }
                }
            }
            tokens.push(Token {
                tok: Tok::Number(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        return Err(syntax(pos, format!("unexpected character {c:?}")));
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column },
    });
    Ok(tokens)
}

/// A name occurrence and where it was written.
#[derive(Debug, Clone)]
struct NameRef {
    name: String,
    pos: Pos,
    expected: NameKind,
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Pos, OntologyError> {
        let t = self.next();
        if t.tok == want {
            Ok(t.pos)
        } else {
            Err(syntax(t.pos, format!("expected {what}, found {}", describe(&t.tok))))
        }
    }

    fn name(&mut self) -> Result<(String, Pos), OntologyError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok((s, t.pos)),
            Tok::Ident(s) => Err(syntax(t.pos, format!("keyword `{s}` cannot be used as a name"))),
            other => Err(syntax(t.pos, format!("expected a name, found {}", describe(&other)))),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    /// `term ('and' term)*`
    fn expr(&mut self, refs: &mut Vec<NameRef>) -> Result<ConceptExpr, OntologyError> {
        let start = self.peek().pos;
        let mut parts = vec![self.term(refs)?];
        while self.is_keyword("and") {
            self.next();
            parts.push(self.term(refs)?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().expect("one part"));
        }
        ConceptExpr::conjunction(parts).ok_or_else(|| syntax(start, "conjunction needs at least two conjuncts"))
    }

    fn term(&mut self, refs: &mut Vec<NameRef>) -> Result<ConceptExpr, OntologyError> {
        if self.is_keyword("exists") {
            self.next();
            self.expect(Tok::LParen, "`(`")?;
            let (role, role_pos) = self.name()?;
            refs.push(NameRef {
                name: role.clone(),
                pos: role_pos,
                expected: NameKind::Role,
            });
            self.expect(Tok::Comma, "`,`")?;
            let expr = if self.peek().tok == Tok::LBrace {
                self.next();
                let (individual, pos) = self.name()?;
                self.expect(Tok::RBrace, "`}`")?;
                refs.push(NameRef {
                    name: individual.clone(),
                    pos,
                    expected: NameKind::Individual,
                });
                ConceptExpr::ExistsNominal { role, individual }
            } else {
                let (concept, pos) = self.name()?;
                refs.push(NameRef {
                    name: concept.clone(),
                    pos,
                    expected: NameKind::Concept,
                });
                ConceptExpr::ExistsConcept { role, concept }
            };
            self.expect(Tok::RParen, "`)`")?;
            return Ok(expr);
        }
        let (name, pos) = self.name()?;
        if let Tok::Cmp(comparator) = self.peek().tok {
            self.next();
            let t = self.next();
            let Tok::Number(text) = t.tok else {
                return Err(syntax(t.pos, format!("expected a number, found {}", describe(&t.tok))));
            };
            let threshold: Decimal = text.parse().map_err(|_| syntax(t.pos, format!("bad number {text:?}")))?;
            refs.push(NameRef {
                name: name.clone(),
                pos,
                expected: NameKind::DataProperty,
            });
            return Ok(ConceptExpr::DataThreshold {
                property: name,
                comparator,
                threshold,
            });
        }
        refs.push(NameRef {
            name: name.clone(),
            pos,
            expected: NameKind::Concept,
        });
        Ok(ConceptExpr::Atomic(name))
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("number {s}"),
        Tok::Dot => "`.`".into(),
        Tok::Comma => "`,`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Arrow => "`=>`".into(),
        Tok::Cmp(c) => format!("`{}`", c.symbol()),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses and validates ontology source text.
///
/// Declarations may appear after the axioms that use them; every name is
/// resolved once the whole source has been read.
pub fn parse_ontology(source: &str) -> Result<Ontology, OntologyError> {
    let mut parser = Parser {
        tokens: lex(source)?,
        at: 0,
    };
    let mut ontology = Ontology::default();
    let mut declared: HashMap<String, NameKind> = HashMap::new();
    let mut refs: Vec<NameRef> = Vec::new();

    loop {
        let head = parser.next();
        let keyword = match head.tok {
            Tok::Eof => break,
            Tok::Ident(ref s) => s.clone(),
            other => return Err(syntax(head.pos, format!("expected a statement, found {}", describe(&other)))),
        };
        match keyword.as_str() {
            "concept" | "sensitive" | "role" | "data" | "individual" => {
                let (kind, sensitive) = match keyword.as_str() {
                    "sensitive" => {
                        let t = parser.next();
                        if !matches!(&t.tok, Tok::Ident(s) if s == "concept") {
                            return Err(syntax(t.pos, "expected `concept` after `sensitive`"));
                        }
                        (NameKind::Concept, true)
                    }
                    "concept" => (NameKind::Concept, false),
                    "role" => (NameKind::Role, false),
                    "data" => (NameKind::DataProperty, false),
                    _ => (NameKind::Individual, false),
                };
                let (name, pos) = parser.name()?;
                parser.expect(Tok::Dot, "`.`")?;
                if let Some(&previous) = declared.get(&name) {
                    return Err(OntologyError::DuplicateDeclaration {
                        line: pos.line,
                        column: pos.column,
                        name,
                        previous,
                    });
                }
                declared.insert(name.clone(), kind);
                let set = match kind {
                    NameKind::Concept => &mut ontology.concepts,
                    NameKind::Role => &mut ontology.roles,
                    NameKind::DataProperty => &mut ontology.data_properties,
                    NameKind::Individual => &mut ontology.individuals,
                };
                set.insert(name.clone());
                if sensitive {
                    ontology.sensitive_markers.insert(name);
                }
            }
            "axiom" => {
                let lhs = parser.expr(&mut refs)?;
                let arrow = parser.next();
                if arrow.tok != Tok::Arrow {
                    return Err(syntax(arrow.pos, format!("expected `=>`, found {}", describe(&arrow.tok))));
                }
                let rhs_pos = parser.peek().pos;
                let mut rhs_refs = Vec::new();
                let rhs = parser.expr(&mut rhs_refs)?;
                let ConceptExpr::Atomic(rhs) = rhs else {
                    return Err(OntologyError::NonAtomicRhs {
                        line: rhs_pos.line,
                        column: rhs_pos.column,
                    });
                };
                refs.extend(rhs_refs);
                parser.expect(Tok::Dot, "`.`")?;
                ontology.tbox.push(Axiom { lhs, rhs });
            }
            other => return Err(syntax(head.pos, format!("unknown statement `{other}`"))),
        }
    }

    for r in refs {
        match declared.get(&r.name) {
            None => {
                return Err(OntologyError::Undeclared {
                    line: r.pos.line,
                    column: r.pos.column,
                    name: r.name,
                })
            }
            Some(&found) if found != r.expected => {
                return Err(OntologyError::WrongKind {
                    line: r.pos.line,
                    column: r.pos.column,
                    name: r.name,
                    expected: r.expected,
                    found,
                })
            }
            Some(_) => {}
        }
    }
    Ok(ontology)
}
