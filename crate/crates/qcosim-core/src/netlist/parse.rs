//! Netlist tokenizer and parser.

use super::ast::*;
use crate::error::{Error, Result};

/// Parses a number with optional engineering suffix: `400f`, `0.5g`, `1meg`,
/// `1e-3`, `100pF` (trailing unit letters after the suffix are ignored).
/// `m` is milli and `meg` is 1e6, matched longest-first.
pub fn parse_number(s: &str) -> Option<f64> {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i == digits_start || (i == digits_start + 1 && bytes[digits_start] == b'.') {
        return None;
    }
    // Exponent only when 'e'/'E' is followed by digits (else it's a suffix
    // or unit letter).
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    let mantissa: f64 = s[..i].parse().ok()?;
    let rest = s[i..].to_ascii_lowercase();
    if rest.is_empty() {
        return Some(mantissa);
    }
    if !rest.bytes().all(|b| b.is_ascii_alphabetic()) {
        return None;
    }
    let scale = if rest.starts_with("meg") {
        1e6
    } else {
        match rest.as_bytes()[0] {
            b'f' => 1e-15,
            b'p' => 1e-12,
            b'n' => 1e-9,
            b'u' => 1e-6,
            b'm' => 1e-3,
            b'k' => 1e3,
            b'g' => 1e9,
            b't' => 1e12,
            _ => 1.0, // bare unit letters, e.g. "5ohm"
        }
    };
    Some(mantissa * scale)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Eq,
    LParen,
    RParen,
    Brace(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

/// Splits a logical line into tokens with positions. Commas act as
/// whitespace; `;` starts an inline comment.
fn tokenize(text: &str, line: usize) -> Result<Vec<Spanned>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ';' => break,
            c if c.is_whitespace() || c == ',' => i += 1,
            '=' => {
                toks.push(Spanned { tok: Tok::Eq, line, col });
                i += 1;
            }
            '(' => {
                toks.push(Spanned { tok: Tok::LParen, line, col });
                i += 1;
            }
            ')' => {
                toks.push(Spanned { tok: Tok::RParen, line, col });
                i += 1;
            }
            '{' => {
                let start = i + 1;
                let mut depth = 1;
                let mut j = start;
                while j < chars.len() && depth > 0 {
                    match chars[j] {
                        '{' => depth += 1,
                        '}' => depth -= 1,
                        _ => {}
                    }
                    j += 1;
                }
                if depth != 0 {
                    return Err(syntax(line, col, "unterminated '{' expression"));
                }
                let inner: String = chars[start..j - 1].iter().collect();
                toks.push(Spanned { tok: Tok::Brace(inner), line, col });
                i = j;
            }
            '}' => return Err(syntax(line, col, "unmatched '}'")),
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !matches!(chars[i], '=' | '(' | ')' | '{' | '}' | ',' | ';')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                toks.push(Spanned { tok: Tok::Word(word), line, col });
            }
        }
    }
    Ok(toks)
}

/// Recursive-descent parser for `{...}` expressions:
/// expr := term (('+'|'-') term)*, term := factor (('*'|'/') factor)*,
/// factor := number | ident | '(' expr ')' | '-' factor.
struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
    src: &'a str,
}

impl<'a> ExprParser<'a> {
    fn new(src: &'a str, line: usize, col0: usize) -> Self {
        ExprParser { chars: src.chars().collect(), pos: 0, line, col0, src }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        syntax(self.line, self.col0 + self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Expr> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos != self.chars.len() {
            return Err(self.err(format!("trailing characters in expression '{}'", self.src)));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                '+' => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                '-' => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                '*' => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                '/' => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && !matches!(self.chars[self.pos], '+' | '-' | '*' | '/' | '(' | ')')
                    && !self.chars[self.pos].is_whitespace()
                {
                    self.pos += 1;
                }
                // Back up if a sign was actually an exponent sign.
                let word: String = self.chars[start..self.pos].iter().collect();
                if let Some(x) = parse_number(&word) {
                    Ok(Expr::Num(x))
                } else if (word.ends_with('e') || word.ends_with('E'))
                    && matches!(self.chars.get(self.pos), Some('+') | Some('-'))
                {
                    // scientific notation split across the operator scan
                    let sign_pos = self.pos;
                    self.pos += 1;
                    while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let word: String = self.chars[start..self.pos].iter().collect();
                    parse_number(&word).map(Expr::Num).ok_or_else(|| {
                        self.pos = sign_pos;
                        self.err(format!("malformed number '{word}'"))
                    })
                } else {
                    Err(self.err(format!("malformed number '{word}'")))
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                Ok(Expr::Param(name.to_ascii_lowercase()))
            }
            Some(c) => Err(self.err(format!("unexpected '{c}' in expression"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

pub(super) fn parse_expr(src: &str, line: usize, col0: usize) -> Result<Expr> {
    ExprParser::new(src, line, col0).parse()
}

struct LineParser {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn eol_col(&self) -> usize {
        self.toks.last().map(|t| t.col + 1).unwrap_or(1)
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        match self.toks.get(self.pos) {
            Some(t) => syntax(t.line, t.col, msg),
            None => syntax(self.line, self.eol_col(), msg),
        }
    }

    fn next_word(&mut self, what: &str) -> Result<String> {
        match self.toks.get(self.pos) {
            Some(Spanned { tok: Tok::Word(w), .. }) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn next_value(&mut self, what: &str) -> Result<Value> {
        match self.toks.get(self.pos) {
            Some(Spanned { tok: Tok::Word(w), line, col }) => {
                let v = parse_number(w)
                    .ok_or_else(|| syntax(*line, *col, format!("malformed number '{w}'")))?;
                self.pos += 1;
                Ok(Value::Num(v))
            }
            Some(Spanned { tok: Tok::Brace(e), line, col }) => {
                let expr = parse_expr(e, *line, *col)?;
                self.pos += 1;
                Ok(Value::Expr(expr))
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.toks.get(self.pos).map(|t| &t.tok) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err_here("unexpected trailing tokens"))
        }
    }
}

/// Parses netlist text into an AST. The first line is always the title.
pub fn parse(text: &str) -> Result<NetlistAst> {
    let mut lines = text.lines().enumerate();
    let title = lines.next().map(|(_, l)| l.trim_end().to_string()).unwrap_or_default();

    // Join continuation lines ('+' prefix) into logical cards.
    let mut logical: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        if let Some(cont) = trimmed.strip_prefix('+') {
            match logical.last_mut() {
                Some((_, prev)) => {
                    prev.push(' ');
                    prev.push_str(cont);
                }
                None => {
                    return Err(syntax(line_no, 1, "continuation line with nothing to continue"))
                }
            }
        } else {
            logical.push((line_no, raw.to_string()));
        }
    }

    let mut cards = Vec::new();
    for (line_no, text) in logical {
        let toks = tokenize(&text, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser { toks, pos: 0, line: line_no };
        let head = p.next_word("card name")?;
        let kind = if let Some(rest) = head.strip_prefix('.') {
            CardKind::Directive(parse_directive(&rest.to_ascii_lowercase(), &mut p)?)
        } else {
            CardKind::Element(parse_element(&head, &mut p)?)
        };
        if !matches!(kind, CardKind::Directive(Directive::End)) {
            p.expect_end()?;
        }
        cards.push(Card { line: line_no, kind });
    }
    Ok(NetlistAst { title, cards })
}

fn parse_element(head: &str, p: &mut LineParser) -> Result<ElementCard> {
    let name = head.to_ascii_uppercase();
    let first = name.chars().next().unwrap_or(' ');
    let node_a = p.next_word("node name")?;
    let node_b = p.next_word("node name")?;
    if node_a.is_empty() || node_b.is_empty() {
        return Err(p.err_here("empty node name"));
    }
    let nodes = [node_a, node_b];
    let kind = match first {
        'R' => ElementKind::Resistor { nodes, value: p.next_value("resistance")? },
        'C' => ElementKind::Capacitor { nodes, value: p.next_value("capacitance")? },
        'L' => ElementKind::Inductor { nodes, value: p.next_value("inductance")? },
        'V' => ElementKind::VSource { nodes, spec: parse_source(p)? },
        'I' => ElementKind::ISource { nodes, spec: parse_source(p)? },
        'Q' => {
            let params = parse_named_params(p)?;
            if name.starts_with("QSEB") {
                ElementKind::Seb { nodes, params }
            } else if name.starts_with("QDQD") {
                ElementKind::Dqd { nodes, params }
            } else {
                return Err(p.err_here(format!(
                    "unknown quantum device '{name}' (expected QSEB* or QDQD*)"
                )));
            }
        }
        _ => return Err(p.err_here(format!("unknown card type '{name}'"))),
    };
    Ok(ElementCard { name, kind })
}

fn parse_source(p: &mut LineParser) -> Result<SourceSpec> {
    if let Some(Spanned { tok: Tok::Word(w), .. }) = p.toks.get(p.pos) {
        let kw = w.to_ascii_uppercase();
        match kw.as_str() {
            "SIN" => {
                p.pos += 1;
                p.expect(Tok::LParen, "'(' after SIN")?;
                let offset = p.next_value("SIN offset")?;
                let amp = p.next_value("SIN amplitude")?;
                let freq = p.next_value("SIN frequency")?;
                let phase = if p.toks.get(p.pos).map(|t| &t.tok) == Some(&Tok::RParen) {
                    None
                } else {
                    Some(p.next_value("SIN phase")?)
                };
                p.expect(Tok::RParen, "')'")?;
                return Ok(SourceSpec::Sin { offset, amp, freq, phase });
            }
            "PULSE" => {
                p.pos += 1;
                p.expect(Tok::LParen, "'(' after PULSE")?;
                let v1 = p.next_value("PULSE v1")?;
                let v2 = p.next_value("PULSE v2")?;
                let td = p.next_value("PULSE delay")?;
                let tr = p.next_value("PULSE rise")?;
                let tf = p.next_value("PULSE fall")?;
                let pw = p.next_value("PULSE width")?;
                let per = p.next_value("PULSE period")?;
                p.expect(Tok::RParen, "')'")?;
                return Ok(SourceSpec::Pulse { v1, v2, td, tr, tf, pw, per });
            }
            "DC" => {
                p.pos += 1;
                return Ok(SourceSpec::Dc(p.next_value("DC value")?));
            }
            _ => {}
        }
    }
    Ok(SourceSpec::Dc(p.next_value("source value")?))
}

fn parse_named_params(p: &mut LineParser) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    while !p.at_end() {
        let key = p.next_word("parameter name")?.to_ascii_lowercase();
        p.expect(Tok::Eq, "'=' after parameter name")?;
        let val = p.next_value("parameter value")?;
        out.push((key, val));
    }
    Ok(out)
}

fn parse_directive(name: &str, p: &mut LineParser) -> Result<Directive> {
    match name {
        "param" => {
            let pname = p.next_word("parameter name")?.to_ascii_lowercase();
            p.expect(Tok::Eq, "'=' after parameter name")?;
            let value = match p.toks.get(p.pos).cloned() {
                Some(Spanned { tok: Tok::Word(w), line, col }) => {
                    p.pos += 1;
                    match parse_number(&w) {
                        Some(x) => Expr::Num(x),
                        None => parse_expr(&w, line, col)?,
                    }
                }
                Some(Spanned { tok: Tok::Brace(e), line, col }) => {
                    p.pos += 1;
                    parse_expr(&e, line, col)?
                }
                _ => return Err(p.err_here("expected parameter value")),
            };
            Ok(Directive::Param { name: pname, value })
        }
        "tran" => {
            let tstep = p.next_value("tstep")?;
            let tstop = p.next_value("tstop")?;
            let tstart = if p.at_end() { None } else { Some(p.next_value("tstart")?) };
            Ok(Directive::Tran { tstep, tstop, tstart })
        }
        "acq" => {
            let fstart = p.next_value("fstart")?;
            let fstop = p.next_value("fstop")?;
            let npoints = p.next_value("npoints")?;
            let scale = match p.next_word("dec|lin")?.to_ascii_lowercase().as_str() {
                "dec" => AcScale::Dec,
                "lin" => AcScale::Lin,
                other => return Err(p.err_here(format!("expected dec|lin, got '{other}'"))),
            };
            Ok(Directive::Acq { fstart, fstop, npoints, scale })
        }
        "sweep" => {
            let mut axes = Vec::new();
            while !p.at_end() {
                let target = p.next_word("sweep target")?.to_ascii_lowercase();
                let start = p.next_value("sweep start")?;
                let stop = p.next_value("sweep stop")?;
                let n = p.next_value("sweep point count")?;
                axes.push(SweepAxisSpec { target, start, stop, n });
            }
            if axes.is_empty() {
                return Err(p.err_here(".sweep needs at least one axis"));
            }
            if axes.len() > 2 {
                return Err(p.err_here(".sweep supports at most two axes"));
            }
            Ok(Directive::Sweep { axes })
        }
        "harm" => {
            let f0 = p.next_value("fundamental frequency")?;
            let nharm = p.next_value("harmonic count")?;
            let ncycles = p.next_value("measurement cycles")?;
            Ok(Directive::Harm { f0, nharm, ncycles })
        }
        "print" => {
            let mut targets = Vec::new();
            while !p.at_end() {
                let w = p.next_word("print target")?;
                let (subject, field) = w
                    .rsplit_once('.')
                    .ok_or_else(|| p.err_here(format!("print target '{w}' needs a '.field'")))?;
                if subject.is_empty() || field.is_empty() {
                    return Err(p.err_here(format!("malformed print target '{w}'")));
                }
                targets.push(PrintTarget {
                    subject: subject.to_string(),
                    field: field.to_ascii_lowercase(),
                });
            }
            if targets.is_empty() {
                return Err(p.err_here(".print needs at least one target"));
            }
            Ok(Directive::Print { targets })
        }
        "end" => Ok(Directive::End),
        other => Err(p.err_here(format!("unknown directive '.{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_suffixes() {
        assert_eq!(parse_number("50"), Some(50.0));
        assert_eq!(parse_number("400f"), Some(400e-15));
        assert_eq!(parse_number("1k"), Some(1000.0));
        assert_eq!(parse_number("1meg"), Some(1e6));
        assert_eq!(parse_number("1m"), Some(1e-3));
        assert_eq!(parse_number("0.5g"), Some(0.5e9));
        assert_eq!(parse_number("2t"), Some(2e12));
        assert_eq!(parse_number("100pF"), Some(100e-12));
        assert_eq!(parse_number("1e9"), Some(1e9));
        assert_eq!(parse_number("1E-3"), Some(1e-3));
        assert_eq!(parse_number("-3.5u"), Some(-3.5e-6));
        assert_eq!(parse_number("1MEG"), Some(1e6));
        assert_eq!(parse_number("abc"), None);
        assert_eq!(parse_number(""), None);
        assert_eq!(parse_number("1..2"), None);
    }

    #[test]
    fn basic_cards() {
        let src = "test circuit\nR1 a 0 50\nC2 in out 400f\nV1 in 0 SIN(0 1u 1g)\n.end\n";
        let ast = parse(src).unwrap();
        assert_eq!(ast.title, "test circuit");
        assert_eq!(ast.cards.len(), 4);
        match &ast.cards[0].kind {
            CardKind::Element(e) => {
                assert_eq!(e.name, "R1");
                assert_eq!(
                    e.kind,
                    ElementKind::Resistor {
                        nodes: ["a".into(), "0".into()],
                        value: Value::Num(50.0)
                    }
                );
            }
            _ => panic!("expected element"),
        }
    }

    #[test]
    fn quantum_cards() {
        let src = "t\nQSEB1 g r alphaG=0.9 alphaR=0.1 gamma=0.5g temp=0.1\n";
        let ast = parse(src).unwrap();
        match &ast.cards[0].kind {
            CardKind::Element(e) => match &e.kind {
                ElementKind::Seb { nodes, params } => {
                    assert_eq!(nodes, &["g".to_string(), "r".to_string()]);
                    assert_eq!(params[2], ("gamma".to_string(), Value::Num(0.5e9)));
                    assert_eq!(params[3], ("temp".to_string(), Value::Num(0.1)));
                }
                _ => panic!("expected SEB"),
            },
            _ => panic!("expected element"),
        }
    }

    #[test]
    fn continuation_and_comments() {
        let src = "t\n* full comment\nR1 a 0\n+ 50 ; inline\n\nR2 a 0 1k\n";
        let ast = parse(src).unwrap();
        assert_eq!(ast.cards.len(), 2);
    }

    #[test]
    fn positioned_errors() {
        let src = "t\nR1 a 0 5x0\n";
        match parse(src) {
            Err(Error::Syntax { line, col, msg }) => {
                assert_eq!(line, 2);
                assert!(col >= 8, "col = {col}");
                assert!(msg.contains("5x0"));
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        let src = "t\nX1 a 0 50\n";
        assert!(matches!(parse(src), Err(Error::Syntax { line: 2, .. })));
    }

    #[test]
    fn expressions() {
        let src = "t\n.param cr=400f\nC1 a 0 {cr/4}\n.param x={(cr+1p)*2}\n";
        let ast = parse(src).unwrap();
        match &ast.cards[1].kind {
            CardKind::Element(e) => match &e.kind {
                ElementKind::Capacitor { value: Value::Expr(expr), .. } => {
                    assert_eq!(
                        expr,
                        &Expr::Div(
                            Box::new(Expr::Param("cr".into())),
                            Box::new(Expr::Num(4.0))
                        )
                    );
                }
                other => panic!("unexpected {other:?}"),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn directives() {
        let src = "t\n.tran 1n 100n\n.acq 1g 2g 11 lin\n.sweep vdc -1m 1m 21 vac 0 1m 5\n.harm 0.5meg 8 4\n.print out.v V1.i QSEB1.p1\n";
        let ast = parse(src).unwrap();
        assert_eq!(ast.cards.len(), 5);
        match &ast.cards[2].kind {
            CardKind::Directive(Directive::Sweep { axes }) => {
                assert_eq!(axes.len(), 2);
                assert_eq!(axes[0].target, "vdc");
            }
            _ => panic!(),
        }
        match &ast.cards[4].kind {
            CardKind::Directive(Directive::Print { targets }) => {
                assert_eq!(targets[0], PrintTarget { subject: "out".into(), field: "v".into() });
                assert_eq!(targets[2].field, "p1");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn roundtrip_fixed_netlist() {
        let src = "demo\nR1 in out 50\nC1 out 0 {cr/4}\nL1 out 0 1m\nV1 in 0 SIN(0 1u 1g 90)\nV2 b 0 PULSE(0 1m 1n 0.5n 0.5n 5n 20n)\nI1 b 0 1u\nQSEB1 out b alphag=0.9 alphar=0.1 gamma=0.5g temp=0.1\nQDQD1 out b a11=0.5 a12=0 a21=0 a22=-0.5 tc=5g gcr=0.5g gphi=0 temp=0.1\n.param cr=400f\n.tran 1n 100n 10n\n.acq 1g 2g 101 dec\n.sweep vdc -1m 1m 21\n.harm 0.5meg 8 4\n.print out.v QSEB1.p1\n.end\n";
        let ast = parse(src).unwrap();
        let printed = ast.to_string();
        let ast2 = parse(&printed).unwrap();
        assert_eq!(ast, ast2, "printed form:\n{printed}");
    }

    proptest! {
        /// Parser totality: arbitrary input never panics.
        #[test]
        fn parser_never_panics(s in "\\PC*") {
            let _ = parse(&s);
        }

        #[test]
        fn parser_never_panics_structured(
            lines in proptest::collection::vec("[RCLVIQ.a-z0-9 ({=+*})-]{0,40}", 0..8)
        ) {
            let text = format!("title\n{}", lines.join("\n"));
            let _ = parse(&text);
        }

        /// Round-trip: printing any parsed AST reparses to the same AST.
        #[test]
        fn roundtrip_random_values(r in 1e-3f64..1e12, c in 1e-18f64..1.0, name in "[a-z][a-z0-9]{0,6}") {
            let src = format!("t\nR1 {name} 0 {r}\nC1 {name} 0 {c}\n");
            if let Ok(ast) = parse(&src) {
                let printed = ast.to_string();
                let ast2 = parse(&printed).unwrap();
                prop_assert_eq!(ast, ast2);
            }
        }
    }
}
