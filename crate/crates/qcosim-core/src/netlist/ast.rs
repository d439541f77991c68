//! Netlist abstract syntax tree and its canonical text form.
//!
//! `Display` prints a canonical netlist that reparses to a structurally equal
//! AST; numeric literals use Rust's shortest round-tripping float format.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct NetlistAst {
    pub title: String,
    pub cards: Vec<Card>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Card {
    /// 1-based source line of the card (0 for synthesized cards).
    pub line: usize,
    pub kind: CardKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CardKind {
    Element(ElementCard),
    Directive(Directive),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementCard {
    /// Uppercased element name, unique within the netlist.
    pub name: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor { nodes: [String; 2], value: Value },
    Capacitor { nodes: [String; 2], value: Value },
    Inductor { nodes: [String; 2], value: Value },
    VSource { nodes: [String; 2], spec: SourceSpec },
    ISource { nodes: [String; 2], spec: SourceSpec },
    /// Single-electron box: nodes (gate, reservoir).
    Seb { nodes: [String; 2], params: Vec<(String, Value)> },
    /// Double quantum dot: nodes (gate1, gate2).
    Dqd { nodes: [String; 2], params: Vec<(String, Value)> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Dc(Value),
    Sin { offset: Value, amp: Value, freq: Value, phase: Option<Value> },
    Pulse { v1: Value, v2: Value, td: Value, tr: Value, tf: Value, pw: Value, per: Value },
}

/// A literal number or a `{...}` parameter expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcScale {
    Dec,
    Lin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxisSpec {
    pub target: String,
    pub start: Value,
    pub stop: Value,
    pub n: Value,
}

/// `subject.field` pair from a `.print` card, e.g. `out.v`, `V1.i`,
/// `QSEB1.p1`, `VP.s11`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintTarget {
    pub subject: String,
    pub field: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Param { name: String, value: Expr },
    Tran { tstep: Value, tstop: Value, tstart: Option<Value> },
    Acq { fstart: Value, fstop: Value, npoints: Value, scale: AcScale },
    Sweep { axes: Vec<SweepAxisSpec> },
    Harm { f0: Value, nharm: Value, ncycles: Value },
    Print { targets: Vec<PrintTarget> },
    End,
}

impl fmt::Display for NetlistAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for card in &self.cards {
            writeln!(f, "{}", card.kind)?;
        }
        Ok(())
    }
}

impl fmt::Display for CardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CardKind::Element(e) => write!(f, "{e}"),
            CardKind::Directive(d) => write!(f, "{d}"),
        }
    }
}

impl fmt::Display for ElementCard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ElementKind::Resistor { nodes, value }
            | ElementKind::Capacitor { nodes, value }
            | ElementKind::Inductor { nodes, value } => {
                write!(f, "{} {} {} {}", self.name, nodes[0], nodes[1], value)
            }
            ElementKind::VSource { nodes, spec } | ElementKind::ISource { nodes, spec } => {
                write!(f, "{} {} {} {}", self.name, nodes[0], nodes[1], spec)
            }
            ElementKind::Seb { nodes, params } | ElementKind::Dqd { nodes, params } => {
                write!(f, "{} {} {}", self.name, nodes[0], nodes[1])?;
                for (k, v) in params {
                    write!(f, " {k}={v}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Dc(v) => write!(f, "{v}"),
            SourceSpec::Sin { offset, amp, freq, phase } => {
                write!(f, "SIN({offset} {amp} {freq}")?;
                if let Some(p) = phase {
                    write!(f, " {p}")?;
                }
                write!(f, ")")
            }
            SourceSpec::Pulse { v1, v2, td, tr, tf, pw, per } => {
                write!(f, "PULSE({v1} {v2} {td} {tr} {tf} {pw} {per})")
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Expr(e) => write!(f, "{{{e}}}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fully parenthesized so the printed form reparses to the same tree.
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::Param { name, value } => write!(f, ".param {name}={{{value}}}"),
            Directive::Tran { tstep, tstop, tstart } => {
                write!(f, ".tran {tstep} {tstop}")?;
                if let Some(t) = tstart {
                    write!(f, " {t}")?;
                }
                Ok(())
            }
            Directive::Acq { fstart, fstop, npoints, scale } => {
                let s = match scale {
                    AcScale::Dec => "dec",
                    AcScale::Lin => "lin",
                };
                write!(f, ".acq {fstart} {fstop} {npoints} {s}")
            }
            Directive::Sweep { axes } => {
                write!(f, ".sweep")?;
                for a in axes {
                    write!(f, " {} {} {} {}", a.target, a.start, a.stop, a.n)?;
                }
                Ok(())
            }
            Directive::Harm { f0, nharm, ncycles } => {
                write!(f, ".harm {f0} {nharm} {ncycles}")
            }
            Directive::Print { targets } => {
                write!(f, ".print")?;
                for t in targets {
                    write!(f, " {}.{}", t.subject, t.field)?;
                }
                Ok(())
            }
            Directive::End => write!(f, ".end"),
        }
    }
}
