//! SPICE-flavored netlist front end.
//!
//! A netlist is line-oriented: the first line is the title, `*` starts a
//! comment line, `;` starts an inline comment, and a leading `+` continues the
//! previous card. Element cards (`R`, `L`, `C`, `V`, `I`, `QSEB`, `QDQD`) and
//! dot directives (`.param`, `.tran`, `.acq`, `.sweep`, `.harm`, `.print`)
//! make up the body. Numbers accept the classic engineering suffixes
//! (f p n u m k meg g t) and `{...}` braces evaluate parameter expressions.
//!
//! [`parse`] produces a [`NetlistAst`] with positioned errors; [`elaborate`]
//! resolves parameters and node indices into a [`Circuit`] ready for the
//! engine.

mod ast;
mod elaborate;
mod parse;

pub use ast::{
    AcScale, Card, Directive, ElementCard, ElementKind, Expr, NetlistAst, PrintTarget, SourceSpec,
    SweepAxisSpec, Value,
};
pub use elaborate::{
    elaborate, Circuit, ElemKind, Element, NodeRef, QuantumInstance, QuantumKind,
    ResolvedDirective, SweepAxis, SweepTarget, Waveform,
};
pub use parse::{parse, parse_number};
