//! Lexer and recursive-descent parsers for the two concrete syntaxes:
//! system files (`system`, `class`, `def` statements) and closed-form
//! expressions. Both share one token stream. Whitespace and `#` comments
//! separate tokens; statements need no terminator because each one starts
//! with a keyword.

use super::{ClassDef, ClassExpr, ComptonSystem, GExpr, ProductionVector, RESERVED};
use crate::error::{Error, Result};
use crate::polya::MultiplicityBound;

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Ident(String),
    Int(u64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Pipe,
    Plus,
    Star,
    Slash,
    Eq,
    GeEq,
    Caret,
    Minus,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                name.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            toks.push(Tok {
                kind: TokKind::Ident(name),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                digits.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let value: u64 = digits
                .parse()
                .map_err(|_| err_at(tline, tcol, "integer literal too large"))?;
            toks.push(Tok {
                kind: TokKind::Int(value),
                line: tline,
                col: tcol,
            });
            continue;
        }
        let kind = match c {
            '[' => TokKind::LBracket,
            ']' => TokKind::RBracket,
            '(' => TokKind::LParen,
            ')' => TokKind::RParen,
            ':' => TokKind::Colon,
            ',' => TokKind::Comma,
            '|' => TokKind::Pipe,
            '+' => TokKind::Plus,
            '*' => TokKind::Star,
            '/' => TokKind::Slash,
            '=' => TokKind::Eq,
            '^' => TokKind::Caret,
            '-' => TokKind::Minus,
            '>' => {
                advance(&mut i, &mut line, &mut col);
                if i < chars.len() && chars[i] == '=' {
                    advance(&mut i, &mut line, &mut col);
                    toks.push(Tok {
                        kind: TokKind::GeEq,
                        line: tline,
                        col: tcol,
                    });
                    continue;
                }
                return Err(err_at(tline, tcol, "expected `>=`"));
            }
            other => {
                return Err(err_at(
                    tline,
                    tcol,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        advance(&mut i, &mut line, &mut col);
        toks.push(Tok {
            kind,
            line: tline,
            col: tcol,
        });
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    idx: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        let (end_line, end_col) = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
        Ok(Parser {
            toks,
            idx: 0,
            end_line,
            end_col,
        })
    }

    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.idx).map(|t| &t.kind)
    }

    fn pos(&self) -> (usize, usize) {
        self.toks
            .get(self.idx)
            .map(|t| (t.line, t.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.pos();
        err_at(line, col, msg)
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek() == Some(kind) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Result<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(TokKind::Ident(name)) if name == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        let (line, col) = self.pos();
        match self.peek() {
            Some(TokKind::Ident(name)) => {
                let name = name.clone();
                self.idx += 1;
                Ok((name, line, col))
            }
            _ => Err(err_at(line, col, format!("expected {what}"))),
        }
    }

    fn fresh_ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        let (name, line, col) = self.ident(what)?;
        if RESERVED.contains(&name.as_str()) {
            return Err(err_at(line, col, format!("`{name}` is a reserved word")));
        }
        Ok((name, line, col))
    }

    fn int(&mut self, what: &str) -> Result<(u64, usize, usize)> {
        let (line, col) = self.pos();
        match self.peek() {
            Some(TokKind::Int(v)) => {
                let v = *v;
                self.idx += 1;
                Ok((v, line, col))
            }
            _ => Err(err_at(line, col, format!("expected {what}"))),
        }
    }

    fn bound(&mut self) -> Result<MultiplicityBound> {
        if self.eat(&TokKind::GeEq) {
            let (m, line, col) = self.int("a multiplicity after `>=`")?;
            let m = u32::try_from(m).map_err(|_| err_at(line, col, "multiplicity too large"))?;
            Ok(MultiplicityBound::AtLeast(m))
        } else {
            let (m, line, col) = self.int("a multiplicity")?;
            let m = u32::try_from(m).map_err(|_| err_at(line, col, "multiplicity too large"))?;
            Ok(MultiplicityBound::Exactly(m))
        }
    }

    fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }
}

// Raw statements keep names and positions so resolution can report where a
// reference went wrong.
struct RawSlot {
    class: String,
    bound: MultiplicityBound,
    line: usize,
    col: usize,
}

enum RawExpr {
    Node,
    Name(String, usize, usize),
    Union(Vec<RawExpr>),
    Sum(Vec<RawExpr>),
    Multiset(MultiplicityBound, Box<RawExpr>),
    RootAppend(Box<RawExpr>),
}

impl Parser {
    fn class_expr(&mut self) -> Result<RawExpr> {
        let mut parts = vec![self.class_sum()?];
        while self.eat(&TokKind::Pipe) {
            parts.push(self.class_sum()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RawExpr::Union(parts)
        })
    }

    fn class_sum(&mut self) -> Result<RawExpr> {
        let mut parts = vec![self.class_atom()?];
        while self.eat(&TokKind::Plus) {
            parts.push(self.class_atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RawExpr::Sum(parts)
        })
    }

    fn class_atom(&mut self) -> Result<RawExpr> {
        if self.eat_keyword("node") {
            if self.eat(&TokKind::Slash) {
                let inner = self.class_atom()?;
                return Ok(RawExpr::RootAppend(Box::new(inner)));
            }
            return Ok(RawExpr::Node);
        }
        if self.eat_keyword("mset") {
            self.expect(TokKind::LParen, "`(` after `mset`")?;
            let bound = self.bound()?;
            self.expect(TokKind::Comma, "`,` between the bound and the operand")?;
            let inner = self.class_expr()?;
            self.expect(TokKind::RParen, "`)` closing `mset(...)`")?;
            return Ok(RawExpr::Multiset(bound, Box::new(inner)));
        }
        if self.eat(&TokKind::LParen) {
            let inner = self.class_expr()?;
            self.expect(TokKind::RParen, "`)`")?;
            return Ok(inner);
        }
        let (name, line, col) = self.ident("a class or def name")?;
        if RESERVED.contains(&name.as_str()) {
            return Err(err_at(
                line,
                col,
                format!("`{name}` cannot be used as a name here"),
            ));
        }
        Ok(RawExpr::Name(name, line, col))
    }
}

fn resolve_expr(system: &ComptonSystem, raw: &RawExpr) -> Result<ClassExpr> {
    match raw {
        RawExpr::Node => Ok(ClassExpr::NodeClass),
        RawExpr::Name(name, line, col) => system
            .lookup(name)
            .ok_or_else(|| err_at(*line, *col, format!("unknown class or def `{name}`"))),
        RawExpr::Union(parts) => Ok(ClassExpr::Union(
            parts
                .iter()
                .map(|p| resolve_expr(system, p))
                .collect::<Result<_>>()?,
        )),
        RawExpr::Sum(parts) => Ok(ClassExpr::Sum(
            parts
                .iter()
                .map(|p| resolve_expr(system, p))
                .collect::<Result<_>>()?,
        )),
        RawExpr::Multiset(bound, inner) => Ok(ClassExpr::Multiset(
            *bound,
            Box::new(resolve_expr(system, inner)?),
        )),
        RawExpr::RootAppend(inner) => Ok(ClassExpr::RootAppend(Box::new(resolve_expr(
            system, inner,
        )?))),
    }
}

/// Parse a complete system file.
pub fn parse_system(src: &str) -> Result<ComptonSystem> {
    let mut p = Parser::new(src)?;
    p.expect_keyword("system")?;
    let (name, _, _) = p.fresh_ident("a system name")?;
    let rank = if p.eat_keyword("rank") {
        let (r, line, col) = p.int("a quantifier rank")?;
        let r = u32::try_from(r).map_err(|_| err_at(line, col, "rank too large"))?;
        Some(r)
    } else {
        None
    };

    struct RawClass {
        name: String,
        line: usize,
        col: usize,
        productions: Option<Vec<(Vec<RawSlot>, usize, usize)>>,
    }
    let mut raw_classes: Vec<RawClass> = Vec::new();
    let mut raw_defs: Vec<(String, usize, usize, RawExpr)> = Vec::new();

    while !p.at_end() {
        if p.eat_keyword("class") {
            let (cname, cline, ccol) = p.fresh_ident("a class name")?;
            p.expect(TokKind::Eq, "`=`")?;
            p.expect_keyword("node")?;
            let productions = if p.eat(&TokKind::Slash) {
                let mut prods = Vec::new();
                loop {
                    let (vline, vcol) = p.pos();
                    p.expect(TokKind::LBracket, "`[` starting a production")?;
                    let mut slots = Vec::new();
                    if !p.eat(&TokKind::RBracket) {
                        loop {
                            let (sname, sline, scol) = p.fresh_ident("a class name in a slot")?;
                            p.expect(TokKind::Colon, "`:` after the slot class")?;
                            let bound = p.bound()?;
                            slots.push(RawSlot {
                                class: sname,
                                bound,
                                line: sline,
                                col: scol,
                            });
                            if p.eat(&TokKind::RBracket) {
                                break;
                            }
                            p.expect(TokKind::Comma, "`,` or `]` in a production")?;
                        }
                    }
                    prods.push((slots, vline, vcol));
                    if !p.eat(&TokKind::Pipe) {
                        break;
                    }
                }
                Some(prods)
            } else {
                None
            };
            raw_classes.push(RawClass {
                name: cname,
                line: cline,
                col: ccol,
                productions,
            });
        } else if p.eat_keyword("def") {
            let (dname, dline, dcol) = p.fresh_ident("a def name")?;
            p.expect(TokKind::Eq, "`=`")?;
            let expr = p.class_expr()?;
            raw_defs.push((dname, dline, dcol, expr));
        } else {
            return Err(p.error("expected `class` or `def`"));
        }
    }

    if raw_classes.is_empty() {
        return Err(err_at(1, 1, "a system needs at least the node class"));
    }
    if raw_classes[0].productions.is_some() {
        return Err(err_at(
            raw_classes[0].line,
            raw_classes[0].col,
            "the first class is the node class and must be `node` with no productions",
        ));
    }
    for rc in &raw_classes[1..] {
        if rc.productions.is_none() {
            return Err(err_at(
                rc.line,
                rc.col,
                format!("class `{}` needs `node / [...]` productions", rc.name),
            ));
        }
    }

    let width = raw_classes.len();
    let class_index = |name: &str| raw_classes.iter().position(|c| c.name == name);
    let mut classes = Vec::with_capacity(width);
    for rc in &raw_classes {
        let mut productions = Vec::new();
        for (slots, vline, vcol) in rc.productions.as_deref().unwrap_or(&[]) {
            let mut resolved: Vec<(usize, MultiplicityBound)> = Vec::new();
            for slot in slots {
                let j = class_index(&slot.class).ok_or_else(|| {
                    err_at(
                        slot.line,
                        slot.col,
                        format!("unknown class `{}`", slot.class),
                    )
                })?;
                if resolved.iter().any(|&(k, _)| k == j) {
                    return Err(err_at(
                        slot.line,
                        slot.col,
                        format!("duplicate slot for class `{}`", slot.class),
                    ));
                }
                resolved.push((j, slot.bound));
            }
            let vector = ProductionVector::from_slots(width, &resolved)
                .map_err(|e| err_at(*vline, *vcol, e.to_string()))?;
            productions.push(vector);
        }
        classes.push(ClassDef {
            name: rc.name.clone(),
            productions,
        });
    }

    // Duplicate class names surface here with a position.
    for (i, a) in raw_classes.iter().enumerate() {
        if raw_classes[..i].iter().any(|b| b.name == a.name) {
            return Err(err_at(
                a.line,
                a.col,
                format!("duplicate name `{}`", a.name),
            ));
        }
    }

    let mut system = ComptonSystem::new(&name, classes)?;
    system.set_quantifier_rank(rank);
    for (dname, dline, dcol, raw) in &raw_defs {
        let expr = resolve_expr(&system, raw)?;
        system.add_def(dname, expr).map_err(|e| match e {
            Error::MalformedSystem { msg } => err_at(*dline, *dcol, msg),
            other => other,
        })?;
    }
    Ok(system)
}

/// Parse a standalone query expression against an existing system.
pub fn parse_class_expr(system: &ComptonSystem, src: &str) -> Result<ClassExpr> {
    let mut p = Parser::new(src)?;
    let raw = p.class_expr()?;
    if !p.at_end() {
        return Err(p.error("trailing input after the expression"));
    }
    let expr = resolve_expr(system, &raw)?;
    system.kind_of(&expr)?;
    Ok(expr)
}

impl Parser {
    fn gexpr(&mut self) -> Result<GExpr> {
        if self.eat_keyword("let") {
            let (name, _, _) = self.fresh_ident("a binding name")?;
            self.expect(TokKind::Eq, "`=`")?;
            let value = self.g_add()?;
            self.expect_keyword("in")?;
            let body = self.gexpr()?;
            return Ok(GExpr::Let {
                name,
                value: Box::new(value),
                body: Box::new(body),
            });
        }
        self.g_add()
    }

    fn g_add(&mut self) -> Result<GExpr> {
        let mut terms = vec![self.g_mul()?];
        while self.eat(&TokKind::Plus) {
            terms.push(self.g_mul()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            GExpr::Add(terms)
        })
    }

    fn g_mul(&mut self) -> Result<GExpr> {
        let mut factors = vec![self.g_primary()?];
        while self.eat(&TokKind::Star) {
            factors.push(self.g_primary()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            GExpr::Mul(factors)
        })
    }

    // After `x /` only the literal denominator (1 - x^m) may follow; the
    // grammar has no general division.
    fn g_geometric_tail(&mut self) -> Result<GExpr> {
        self.expect(TokKind::LParen, "`(` after `x/`")?;
        let (one, line, col) = self.int("`1`")?;
        if one != 1 {
            return Err(err_at(line, col, "the denominator must start with `1`"));
        }
        self.expect(TokKind::Minus, "`-`")?;
        self.expect_keyword("x")?;
        let m = if self.eat(&TokKind::Caret) {
            let (m, mline, mcol) = self.int("an exponent")?;
            let m = u32::try_from(m).map_err(|_| err_at(mline, mcol, "exponent too large"))?;
            if m == 0 {
                return Err(err_at(mline, mcol, "the modulus must be at least 1"));
            }
            m
        } else {
            1
        };
        self.expect(TokKind::RParen, "`)` closing the denominator")?;
        Ok(GExpr::Geometric(m))
    }

    fn g_operator(&mut self, name: &str) -> Result<(u32, Box<GExpr>)> {
        self.expect(TokKind::LParen, "`(`")?;
        let (m, line, col) = self.int("a multiplicity")?;
        let m = u32::try_from(m).map_err(|_| err_at(line, col, "multiplicity too large"))?;
        if m == 0 {
            return Err(err_at(line, col, format!("{name} takes m >= 1")));
        }
        self.expect(TokKind::Comma, "`,`")?;
        let inner = self.gexpr()?;
        self.expect(TokKind::RParen, "`)`")?;
        Ok((m, Box::new(inner)))
    }

    fn g_primary(&mut self) -> Result<GExpr> {
        if self.eat_keyword("x") {
            if self.eat(&TokKind::Slash) {
                return self.g_geometric_tail();
            }
            return Ok(GExpr::X);
        }
        if self.eat_keyword("E") {
            let (m, inner) = self.g_operator("E")?;
            return Ok(GExpr::ExactlyOp(m, inner));
        }
        if self.eat_keyword("Egeq") {
            let (m, inner) = self.g_operator("Egeq")?;
            return Ok(GExpr::AtLeastOp(m, inner));
        }
        if self.eat(&TokKind::LParen) {
            let inner = self.gexpr()?;
            self.expect(TokKind::RParen, "`)`")?;
            return Ok(inner);
        }
        match self.peek() {
            Some(TokKind::Ident(name)) if !RESERVED.contains(&name.as_str()) => {
                let name = name.clone();
                self.idx += 1;
                Ok(GExpr::Ref(name))
            }
            _ => Err(self.error("expected an expression")),
        }
    }
}

/// Parse a closed-form expression. The result must be closed: every name
/// must be bound by an enclosing `let`.
pub fn parse_gexpr(src: &str) -> Result<GExpr> {
    let mut p = Parser::new(src)?;
    let expr = p.gexpr()?;
    if !p.at_end() {
        return Err(p.error("trailing input after the expression"));
    }
    if let Some(name) = expr.free_names().into_iter().next() {
        return Err(Error::UnknownName { name });
    }
    Ok(expr)
}
