//! Netlist elaboration: parameter resolution, node indexing, validation.

use super::ast::*;
use crate::error::{Error, Result};
use crate::quantum::{DqdParams, QuantumModel, SebParams};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// A circuit node: `None` is ground ("0"), `Some(i)` indexes `node_names`.
pub type NodeRef = Option<usize>;

/// Source waveform with resolved SI values.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Dc(f64),
    /// offset + amp·sin(2πf·t + phase), phase in degrees.
    Sin { offset: f64, amp: f64, freq: f64, phase_deg: f64 },
    Pulse { v1: f64, v2: f64, td: f64, tr: f64, tf: f64, pw: f64, per: f64 },
}

impl Waveform {
    /// Instantaneous value at time t.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Waveform::Dc(v) => v,
            Waveform::Sin { offset, amp, freq, phase_deg } => {
                offset + amp * (TAU * freq * t + phase_deg.to_radians()).sin()
            }
            Waveform::Pulse { v1, v2, td, tr, tf, pw, per } => {
                if t < td {
                    return v1;
                }
                let tp = (t - td) % per;
                if tp < tr {
                    v1 + (v2 - v1) * tp / tr
                } else if tp < tr + pw {
                    v2
                } else if tp < tr + pw + tf {
                    v2 + (v1 - v2) * (tp - tr - pw) / tf
                } else {
                    v1
                }
            }
        }
    }

    /// Value used for the DC operating point (t = 0 without transients).
    pub fn dc_value(&self) -> f64 {
        match *self {
            Waveform::Dc(v) => v,
            Waveform::Sin { offset, amp, phase_deg, .. } => {
                offset + amp * phase_deg.to_radians().sin()
            }
            Waveform::Pulse { v1, .. } => v1,
        }
    }

    /// Discontinuity times (slope breaks) within [0, tstop], for exact
    /// breakpoint stepping.
    pub fn breakpoints(&self, tstop: f64) -> Vec<f64> {
        match *self {
            Waveform::Pulse { td, tr, tf, pw, per, .. } => {
                let mut out = Vec::new();
                let mut base = td;
                while base < tstop {
                    for edge in [0.0, tr, tr + pw, tr + pw + tf] {
                        let t = base + edge;
                        if t > 0.0 && t < tstop {
                            out.push(t);
                        }
                    }
                    if per <= 0.0 {
                        break;
                    }
                    base += per;
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Sinusoidal amplitude, if this is a SIN source.
    pub fn sin_amp(&self) -> Option<(f64, f64)> {
        match *self {
            Waveform::Sin { amp, freq, .. } => Some((amp, freq)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElemKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElemKind {
    Resistor { a: NodeRef, b: NodeRef, ohms: f64 },
    Capacitor { a: NodeRef, b: NodeRef, farads: f64 },
    Inductor { a: NodeRef, b: NodeRef, henries: f64 },
    VSource { a: NodeRef, b: NodeRef, wave: Waveform },
    ISource { a: NodeRef, b: NodeRef, wave: Waveform },
}

impl ElemKind {
    pub fn nodes(&self) -> (NodeRef, NodeRef) {
        match *self {
            ElemKind::Resistor { a, b, .. }
            | ElemKind::Capacitor { a, b, .. }
            | ElemKind::Inductor { a, b, .. }
            | ElemKind::VSource { a, b, .. }
            | ElemKind::ISource { a, b, .. } => (a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumKind {
    Seb(SebParams),
    Dqd(DqdParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumInstance {
    pub name: String,
    pub kind: QuantumKind,
    /// (gate, reservoir) for the SEB; (gate1, gate2) for the DQD.
    pub terminals: [NodeRef; 2],
}

impl QuantumInstance {
    pub fn model(&self) -> &dyn QuantumModel {
        match &self.kind {
            QuantumKind::Seb(p) => p,
            QuantumKind::Dqd(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepTarget {
    Param(String),
    Source(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub target: SweepTarget,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedDirective {
    Tran { tstep: f64, tstop: f64, tstart: f64 },
    Acq { freqs: Vec<f64> },
    Sweep { axes: Vec<SweepAxis> },
    Harm { f0: f64, nharm: usize, ncycles: usize },
    Print { targets: Vec<PrintTarget> },
}

/// Elaborated circuit: indexed nodes, SI element values, validated quantum
/// devices, and resolved analysis directives.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    /// Names of non-ground nodes; position is the node index.
    pub node_names: Vec<String>,
    pub elements: Vec<Element>,
    pub qdevs: Vec<QuantumInstance>,
    pub directives: Vec<ResolvedDirective>,
    pub params: BTreeMap<String, f64>,
}

impl Circuit {
    pub fn num_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeRef> {
        if name == "0" {
            return Some(None);
        }
        self.node_names.iter().position(|n| n == name).map(Some)
    }

    pub fn element_by_name(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn qdev_by_name(&self, name: &str) -> Option<(usize, &QuantumInstance)> {
        self.qdevs.iter().enumerate().find(|(_, q)| q.name.eq_ignore_ascii_case(name))
    }

    /// Overrides the DC level of a named source (DC value or SIN offset).
    pub fn set_source_level(&mut self, name: &str, value: f64) -> Result<()> {
        for e in &mut self.elements {
            if e.name.eq_ignore_ascii_case(name) {
                match &mut e.kind {
                    ElemKind::VSource { wave, .. } | ElemKind::ISource { wave, .. } => {
                        match wave {
                            Waveform::Dc(v) => *v = value,
                            Waveform::Sin { offset, .. } => *offset = value,
                            Waveform::Pulse { .. } => {
                                return Err(Error::Config(format!(
                                    "cannot sweep PULSE source '{name}'"
                                )))
                            }
                        }
                        return Ok(());
                    }
                    _ => {
                        return Err(Error::Config(format!("element '{name}' is not a source")));
                    }
                }
            }
        }
        Err(Error::Config(format!("no source named '{name}'")))
    }

    /// Overrides the SIN amplitude of a named source.
    pub fn set_source_amplitude(&mut self, name: &str, value: f64) -> Result<()> {
        for e in &mut self.elements {
            if e.name.eq_ignore_ascii_case(name) {
                if let ElemKind::VSource { wave: Waveform::Sin { amp, .. }, .. }
                | ElemKind::ISource { wave: Waveform::Sin { amp, .. }, .. } = &mut e.kind
                {
                    *amp = value;
                    return Ok(());
                }
                return Err(Error::Config(format!("'{name}' is not a SIN source")));
            }
        }
        Err(Error::Config(format!("no source named '{name}'")))
    }
}

fn eval_expr(expr: &Expr, params: &BTreeMap<String, f64>) -> Result<f64> {
    Ok(match expr {
        Expr::Num(x) => *x,
        Expr::Param(name) => *params
            .get(name)
            .ok_or_else(|| Error::Elaborate(format!("undefined parameter '{name}'")))?,
        Expr::Neg(e) => -eval_expr(e, params)?,
        Expr::Add(a, b) => eval_expr(a, params)? + eval_expr(b, params)?,
        Expr::Sub(a, b) => eval_expr(a, params)? - eval_expr(b, params)?,
        Expr::Mul(a, b) => eval_expr(a, params)? * eval_expr(b, params)?,
        Expr::Div(a, b) => {
            let d = eval_expr(b, params)?;
            if d == 0.0 {
                return Err(Error::Elaborate("division by zero in expression".into()));
            }
            eval_expr(a, params)? / d
        }
    })
}

fn eval_value(v: &Value, params: &BTreeMap<String, f64>) -> Result<f64> {
    match v {
        Value::Num(x) => Ok(*x),
        Value::Expr(e) => eval_expr(e, params),
    }
}

struct NodeTable {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl NodeTable {
    fn new() -> Self {
        NodeTable { names: Vec::new(), index: BTreeMap::new() }
    }

    fn intern(&mut self, name: &str) -> NodeRef {
        if name == "0" {
            return None;
        }
        if let Some(&i) = self.index.get(name) {
            return Some(i);
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        Some(i)
    }
}

fn named_param(
    elem: &str,
    params: &[(String, Value)],
    key: &str,
    table: &BTreeMap<String, f64>,
) -> Result<f64> {
    for (k, v) in params {
        if k == key {
            return eval_value(v, table)
                .map_err(|e| Error::Elaborate(format!("{elem}: {key}: {e}")));
        }
    }
    Err(Error::Elaborate(format!("{elem}: missing parameter '{key}='")))
}

fn named_param_or(
    elem: &str,
    params: &[(String, Value)],
    key: &str,
    default: f64,
    table: &BTreeMap<String, f64>,
) -> Result<f64> {
    for (k, v) in params {
        if k == key {
            return eval_value(v, table)
                .map_err(|e| Error::Elaborate(format!("{elem}: {key}: {e}")));
        }
    }
    Ok(default)
}

/// Elaborates an AST into a [`Circuit`], applying `overrides` on top of the
/// netlist's `.param` declarations. Override names must reference declared
/// parameters.
pub fn elaborate(ast: &NetlistAst, overrides: &BTreeMap<String, f64>) -> Result<Circuit> {
    // Pass 1: resolve parameters in declaration order.
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    let mut declared: Vec<String> = Vec::new();
    for card in &ast.cards {
        if let CardKind::Directive(Directive::Param { name, value }) = &card.kind {
            declared.push(name.clone());
            let v = if let Some(&ov) = overrides.get(name) {
                ov
            } else {
                eval_expr(value, &params)
                    .map_err(|e| Error::Elaborate(format!("line {}: {e}", card.line)))?
            };
            params.insert(name.clone(), v);
        }
    }
    for name in overrides.keys() {
        if !declared.contains(name) {
            return Err(Error::Elaborate(format!(
                "override '{name}' does not reference a declared parameter"
            )));
        }
    }

    // Pass 2: elements and devices.
    let mut nodes = NodeTable::new();
    let mut elements = Vec::new();
    let mut qdevs = Vec::new();
    let mut names_seen: Vec<String> = Vec::new();
    let mut ground_referenced = false;

    for card in &ast.cards {
        let CardKind::Element(e) = &card.kind else { continue };
        if names_seen.iter().any(|n| n == &e.name) {
            return Err(Error::Elaborate(format!(
                "line {}: duplicate element name '{}'",
                card.line, e.name
            )));
        }
        names_seen.push(e.name.clone());

        let mut intern2 = |ns: &[String; 2]| {
            ground_referenced |= ns[0] == "0" || ns[1] == "0";
            [nodes.intern(&ns[0]), nodes.intern(&ns[1])]
        };

        match &e.kind {
            ElementKind::Resistor { nodes: ns, value } => {
                let [a, b] = intern2(ns);
                let ohms = eval_value(value, &params)?;
                if ohms <= 0.0 {
                    return Err(Error::Elaborate(format!("{}: R = {ohms} must be > 0", e.name)));
                }
                elements.push(Element { name: e.name.clone(), kind: ElemKind::Resistor { a, b, ohms } });
            }
            ElementKind::Capacitor { nodes: ns, value } => {
                let [a, b] = intern2(ns);
                let farads = eval_value(value, &params)?;
                if farads <= 0.0 {
                    return Err(Error::Elaborate(format!("{}: C = {farads} must be > 0", e.name)));
                }
                elements
                    .push(Element { name: e.name.clone(), kind: ElemKind::Capacitor { a, b, farads } });
            }
            ElementKind::Inductor { nodes: ns, value } => {
                let [a, b] = intern2(ns);
                let henries = eval_value(value, &params)?;
                if henries <= 0.0 {
                    return Err(Error::Elaborate(format!(
                        "{}: L = {henries} must be > 0",
                        e.name
                    )));
                }
                elements
                    .push(Element { name: e.name.clone(), kind: ElemKind::Inductor { a, b, henries } });
            }
            ElementKind::VSource { nodes: ns, spec } => {
                let [a, b] = intern2(ns);
                let wave = resolve_source(spec, &params)?;
                elements.push(Element { name: e.name.clone(), kind: ElemKind::VSource { a, b, wave } });
            }
            ElementKind::ISource { nodes: ns, spec } => {
                let [a, b] = intern2(ns);
                let wave = resolve_source(spec, &params)?;
                elements.push(Element { name: e.name.clone(), kind: ElemKind::ISource { a, b, wave } });
            }
            ElementKind::Seb { nodes: ns, params: p } => {
                let terminals = intern2(ns);
                let seb = SebParams::new(
                    named_param(&e.name, p, "alphag", &params)?,
                    named_param(&e.name, p, "alphar", &params)?,
                    named_param(&e.name, p, "gamma", &params)?,
                    named_param(&e.name, p, "temp", &params)?,
                )
                .map_err(|err| Error::Elaborate(format!("{}: {err}", e.name)))?;
                qdevs.push(QuantumInstance {
                    name: e.name.clone(),
                    kind: QuantumKind::Seb(seb),
                    terminals,
                });
            }
            ElementKind::Dqd { nodes: ns, params: p } => {
                let terminals = intern2(ns);
                let alpha = [
                    [
                        named_param(&e.name, p, "a11", &params)?,
                        named_param(&e.name, p, "a12", &params)?,
                    ],
                    [
                        named_param(&e.name, p, "a21", &params)?,
                        named_param(&e.name, p, "a22", &params)?,
                    ],
                ];
                let dqd = DqdParams::new(
                    alpha,
                    named_param(&e.name, p, "tc", &params)?,
                    named_param_or(&e.name, p, "gcr", 0.0, &params)?,
                    named_param_or(&e.name, p, "gphi", 0.0, &params)?,
                    named_param(&e.name, p, "temp", &params)?,
                )
                .map_err(|err| Error::Elaborate(format!("{}: {err}", e.name)))?;
                qdevs.push(QuantumInstance {
                    name: e.name.clone(),
                    kind: QuantumKind::Dqd(dqd),
                    terminals,
                });
            }
        }
    }

    if elements.is_empty() && qdevs.is_empty() {
        return Err(Error::Elaborate("netlist has no elements".into()));
    }
    if !ground_referenced {
        return Err(Error::Elaborate("no element references the ground node '0'".into()));
    }

    let circuit_sketch = Circuit {
        node_names: nodes.names.clone(),
        elements,
        qdevs,
        directives: Vec::new(),
        params: params.clone(),
    };

    // Pass 3: directives, which may reference elements and nodes.
    let mut directives = Vec::new();
    let mut probe_nodes: Vec<String> = Vec::new();
    for card in &ast.cards {
        let CardKind::Directive(d) = &card.kind else { continue };
        match d {
            Directive::Param { .. } | Directive::End => {}
            Directive::Tran { tstep, tstop, tstart } => {
                let tstep = eval_value(tstep, &params)?;
                let tstop = eval_value(tstop, &params)?;
                let tstart = tstart.as_ref().map(|v| eval_value(v, &params)).transpose()?.unwrap_or(0.0);
                if tstep <= 0.0 || tstop <= tstart || tstart < 0.0 {
                    return Err(Error::Elaborate(format!(
                        "line {}: invalid .tran window (tstep {tstep}, tstop {tstop}, tstart {tstart})",
                        card.line
                    )));
                }
                directives.push(ResolvedDirective::Tran { tstep, tstop, tstart });
            }
            Directive::Acq { fstart, fstop, npoints, scale } => {
                let f0 = eval_value(fstart, &params)?;
                let f1 = eval_value(fstop, &params)?;
                let n = eval_value(npoints, &params)? as usize;
                if f0 <= 0.0 || f1 < f0 || n == 0 {
                    return Err(Error::Elaborate(format!(
                        "line {}: invalid .acq grid ({f0}..{f1}, {n} points)",
                        card.line
                    )));
                }
                let freqs: Vec<f64> = if n == 1 {
                    vec![f0]
                } else {
                    match scale {
                        AcScale::Lin => (0..n)
                            .map(|i| f0 + (f1 - f0) * i as f64 / (n - 1) as f64)
                            .collect(),
                        AcScale::Dec => {
                            let l0 = f0.log10();
                            let l1 = f1.log10();
                            (0..n)
                                .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64))
                                .collect()
                        }
                    }
                };
                directives.push(ResolvedDirective::Acq { freqs });
            }
            Directive::Sweep { axes } => {
                let mut resolved = Vec::new();
                for a in axes {
                    let start = eval_value(&a.start, &params)?;
                    let stop = eval_value(&a.stop, &params)?;
                    let n = eval_value(&a.n, &params)? as usize;
                    if n == 0 {
                        return Err(Error::Elaborate(format!(
                            "line {}: sweep axis '{}' has zero points",
                            card.line, a.target
                        )));
                    }
                    let target = if params.contains_key(&a.target) {
                        SweepTarget::Param(a.target.clone())
                    } else if circuit_sketch.element_by_name(&a.target).is_some() {
                        SweepTarget::Source(a.target.clone())
                    } else {
                        return Err(Error::Elaborate(format!(
                            "line {}: sweep target '{}' is neither a parameter nor a source",
                            card.line, a.target
                        )));
                    };
                    let values = if n == 1 {
                        vec![start]
                    } else {
                        (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()
                    };
                    resolved.push(SweepAxis { target, values });
                }
                directives.push(ResolvedDirective::Sweep { axes: resolved });
            }
            Directive::Harm { f0, nharm, ncycles } => {
                let f0 = eval_value(f0, &params)?;
                let nharm = eval_value(nharm, &params)? as usize;
                let ncycles = (eval_value(ncycles, &params)? as usize).max(1);
                if f0 <= 0.0 || nharm == 0 {
                    return Err(Error::Elaborate(format!(
                        "line {}: invalid .harm (f0 {f0}, {nharm} harmonics)",
                        card.line
                    )));
                }
                directives.push(ResolvedDirective::Harm { f0, nharm, ncycles });
            }
            Directive::Print { targets } => {
                for t in targets {
                    validate_print_target(&circuit_sketch, t, card.line)?;
                    if t.field == "v" {
                        probe_nodes.push(t.subject.clone());
                    }
                }
                directives.push(ResolvedDirective::Print { targets: targets.clone() });
            }
        }
    }

    // Pass 4: connectivity. Every node needs at least two connections, except
    // ground and nodes marked as probes by a `.print` reference.
    let mut counts = vec![0usize; nodes.names.len()];
    let mut bump = |n: NodeRef| {
        if let Some(i) = n {
            counts[i] += 1;
        }
    };
    for e in &circuit_sketch.elements {
        let (a, b) = e.kind.nodes();
        bump(a);
        bump(b);
    }
    for q in &circuit_sketch.qdevs {
        for &t in &q.terminals {
            bump(t);
        }
    }
    for (i, count) in counts.iter().enumerate() {
        if *count < 2 && !probe_nodes.iter().any(|p| p == &nodes.names[i]) {
            return Err(Error::Elaborate(format!(
                "node '{}' has {} connection(s); every non-probe node needs at least 2",
                nodes.names[i], count
            )));
        }
    }

    Ok(Circuit { directives, ..circuit_sketch })
}

fn resolve_source(spec: &SourceSpec, params: &BTreeMap<String, f64>) -> Result<Waveform> {
    Ok(match spec {
        SourceSpec::Dc(v) => Waveform::Dc(eval_value(v, params)?),
        SourceSpec::Sin { offset, amp, freq, phase } => Waveform::Sin {
            offset: eval_value(offset, params)?,
            amp: eval_value(amp, params)?,
            freq: eval_value(freq, params)?,
            phase_deg: phase.as_ref().map(|v| eval_value(v, params)).transpose()?.unwrap_or(0.0),
        },
        SourceSpec::Pulse { v1, v2, td, tr, tf, pw, per } => {
            let w = Waveform::Pulse {
                v1: eval_value(v1, params)?,
                v2: eval_value(v2, params)?,
                td: eval_value(td, params)?,
                tr: eval_value(tr, params)?.max(1e-15),
                tf: eval_value(tf, params)?.max(1e-15),
                pw: eval_value(pw, params)?,
                per: eval_value(per, params)?,
            };
            if let Waveform::Pulse { pw, per, .. } = w {
                if pw < 0.0 || per <= 0.0 {
                    return Err(Error::Elaborate("PULSE width/period must be positive".into()));
                }
            }
            w
        }
    })
}

fn validate_print_target(c: &Circuit, t: &PrintTarget, line: usize) -> Result<()> {
    let bad = |msg: String| Err(Error::Elaborate(format!("line {line}: {msg}")));
    match t.field.as_str() {
        "v" => {
            if c.node_by_name(&t.subject).is_none() {
                return bad(format!("print target '{}.v': unknown node", t.subject));
            }
        }
        "i" => {
            if c.element_by_name(&t.subject).is_none() && c.qdev_by_name(&t.subject).is_none() {
                return bad(format!("print target '{}.i': unknown element", t.subject));
            }
        }
        // "y" doubles as the Bloch y-component (transient) and the
        // small-signal gate admittance (AC); both require a quantum device.
        "p1" | "p2" | "x" | "y" | "z" | "ig" | "ig2" | "ir" | "eps" => {
            if c.qdev_by_name(&t.subject).is_none() {
                return bad(format!(
                    "print target '{}.{}': unknown quantum device",
                    t.subject, t.field
                ));
            }
        }
        "s11" => {
            let is_vsrc = matches!(
                c.element_by_name(&t.subject),
                Some(Element { kind: ElemKind::VSource { .. }, .. })
            );
            if !is_vsrc {
                return bad(format!(
                    "print target '{}.s11': subject must be a voltage-source port",
                    t.subject
                ));
            }
        }
        other => return bad(format!("unknown print field '.{other}'")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    fn elab(src: &str) -> Result<Circuit> {
        elaborate(&parse(src).unwrap(), &BTreeMap::new())
    }

    #[test]
    fn param_arithmetic() {
        let c = elab("t\n.param cr=400f\nC1 a 0 {cr/4}\nR1 a 0 1k\n").unwrap();
        match &c.elements[0].kind {
            ElemKind::Capacitor { farads, .. } => assert!((farads - 100e-15).abs() < 1e-30),
            _ => panic!(),
        }
    }

    #[test]
    fn dangling_node_rejected() {
        let err = elab("t\nR1 a b 1k\nR2 a 0 1k\n").unwrap_err();
        assert!(err.to_string().contains("'b'"), "{err}");
        // ... unless it's a probe node.
        assert!(elab("t\nR1 a b 1k\nR2 a 0 1k\n.print b.v\n").is_ok());
    }

    #[test]
    fn ground_required() {
        let err = elab("t\nR1 a b 1k\nR2 b a 1k\n").unwrap_err();
        assert!(err.to_string().contains("ground"));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = elab("t\nR1 a 0 1k\nR1 a 0 2k\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn invariants_enforced() {
        assert!(elab("t\nR1 a 0 -5\nR2 a 0 1\n").is_err());
        assert!(elab("t\nQSEB1 a 0 alphag=2 alphar=0 gamma=1g temp=0.1\nR1 a 0 1\n").is_err());
        assert!(elab("t\nQSEB1 a 0 alphag=0.5 alphar=0.5 gamma=1g temp=-1\nR1 a 0 1\n").is_err());
    }

    #[test]
    fn undefined_parameter() {
        let err = elab("t\nC1 a 0 {nope}\nR1 a 0 1\n").unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn unknown_override_rejected() {
        let ast = parse("t\n.param a=1\nR1 x 0 {a}\nR2 x 0 1\n").unwrap();
        let mut ov = BTreeMap::new();
        ov.insert("b".to_string(), 2.0);
        assert!(elaborate(&ast, &ov).is_err());
        let mut ov = BTreeMap::new();
        ov.insert("a".to_string(), 7.0);
        let c = elaborate(&ast, &ov).unwrap();
        match &c.elements[0].kind {
            ElemKind::Resistor { ohms, .. } => assert_eq!(*ohms, 7.0),
            _ => panic!(),
        }
    }

    #[test]
    fn seb_card_full_stack() {
        let c = elab("t\nV1 g 0 SIN(0 1u 1g)\nQSEB1 g 0 alphaG=0.9 alphaR=0.1 gamma=0.5g temp=0.1\n")
            .unwrap();
        match &c.qdevs[0].kind {
            QuantumKind::Seb(p) => {
                assert_eq!(p.gamma, 0.5e9);
                assert_eq!(p.temperature, 0.1);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn pulse_waveform_shape() {
        let w = Waveform::Pulse { v1: 0.0, v2: 1.0, td: 1e-9, tr: 1e-9, tf: 1e-9, pw: 3e-9, per: 10e-9 };
        assert_eq!(w.eval(0.0), 0.0);
        assert!((w.eval(1.5e-9) - 0.5).abs() < 1e-12);
        assert_eq!(w.eval(3e-9), 1.0);
        assert!((w.eval(5.5e-9) - 0.5).abs() < 1e-12);
        assert_eq!(w.eval(8e-9), 0.0);
        // Periodic repeat.
        assert!((w.eval(11.5e-9) - 0.5).abs() < 1e-9);
        let bps = w.breakpoints(20e-9);
        assert!(bps.contains(&1e-9) && bps.contains(&2e-9) && bps.contains(&5e-9));
        assert!(bps.iter().any(|&t| (t - 11e-9).abs() < 1e-18));
    }

    #[test]
    fn sweep_targets_validated() {
        let src = "t\n.param vdc=0\nV1 a 0 {vdc}\nR1 a 0 1k\n.sweep vdc -1 1 5\n";
        let c = elab(src).unwrap();
        match &c.directives[0] {
            ResolvedDirective::Sweep { axes } => {
                assert_eq!(axes[0].values.len(), 5);
                assert_eq!(axes[0].target, SweepTarget::Param("vdc".into()));
            }
            _ => panic!(),
        }
        assert!(elab("t\nR1 a 0 1k\nV1 a 0 1\n.sweep nope 0 1 3\n").is_err());
    }

    #[test]
    fn acq_grids() {
        let c = elab("t\nR1 a 0 1k\nV1 a 0 1\n.acq 1e6 1e9 4 dec\n").unwrap();
        match &c.directives[0] {
            ResolvedDirective::Acq { freqs } => {
                assert_eq!(freqs.len(), 4);
                assert!((freqs[0] - 1e6).abs() < 1.0);
                assert!((freqs[3] - 1e9).abs() < 1.0);
                assert!((freqs[1] - 1e7).abs() < 10.0);
            }
            _ => panic!(),
        }
    }
}
