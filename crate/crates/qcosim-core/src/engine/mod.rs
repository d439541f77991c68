//! Coupled classical/quantum system assembly and solution.
//!
//! The unknown vector stacks MNA node voltages, branch currents (voltage
//! sources and inductors), and three Bloch components per quantum device.
//! Every analysis solves the same residual with one shared Newton iteration,
//! so network and quantum dynamics live in a single Jacobian:
//!
//! ```text
//!   [ network/network | network/quantum ]   MNA stamps      | e·c_lᵀ·A
//!   [ quantum/network | quantum/quantum ]   (A′s+b′)·∂ε/∂V  | shift − A
//! ```
//!
//! ∂ε/∂V is constant (lever arms), so the quantum/network block is exact;
//! only ∂A/∂ε is a numerical derivative.

mod transient;

pub use transient::{TranOpts, Trajectory};

use crate::error::{Error, Result};
use crate::netlist::{Circuit, ElemKind, NodeRef, PrintTarget, QuantumInstance};
use crate::quantum::QuantumModel;
use crate::specfun::Energy;
use nalgebra::{DMatrix, DVector, Vector3};

/// Per-unknown classification, used for tolerances and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownKind {
    NodeVoltage,
    BranchCurrent,
    Bloch,
}

/// Index map of the combined unknown vector.
#[derive(Debug, Clone)]
pub struct SystemLayout {
    pub num_nodes: usize,
    /// Element indices that carry a branch-current unknown (V sources and
    /// inductors), in order of appearance.
    pub branch_elems: Vec<usize>,
    /// First Bloch index; device d occupies bloch_start + 3d ..+3.
    pub bloch_start: usize,
    pub num_qdevs: usize,
    pub dim: usize,
}

impl SystemLayout {
    pub fn from_circuit(circuit: &Circuit) -> Self {
        let num_nodes = circuit.num_nodes();
        let branch_elems: Vec<usize> = circuit
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                matches!(e.kind, ElemKind::VSource { .. } | ElemKind::Inductor { .. })
            })
            .map(|(i, _)| i)
            .collect();
        let bloch_start = num_nodes + branch_elems.len();
        let num_qdevs = circuit.qdevs.len();
        SystemLayout {
            num_nodes,
            branch_elems,
            bloch_start,
            num_qdevs,
            dim: bloch_start + 3 * num_qdevs,
        }
    }

    /// Unknown index of a node voltage (None for ground).
    #[inline]
    pub fn v(&self, node: NodeRef) -> Option<usize> {
        node
    }

    /// Unknown index of the branch current of element `elem`.
    pub fn branch(&self, elem: usize) -> Option<usize> {
        self.branch_elems.iter().position(|&e| e == elem).map(|k| self.num_nodes + k)
    }

    /// First unknown index of device d's Bloch block.
    #[inline]
    pub fn bloch(&self, dev: usize) -> usize {
        self.bloch_start + 3 * dev
    }

    pub fn kind(&self, i: usize) -> UnknownKind {
        if i < self.num_nodes {
            UnknownKind::NodeVoltage
        } else if i < self.bloch_start {
            UnknownKind::BranchCurrent
        } else {
            UnknownKind::Bloch
        }
    }

    /// Human-readable label for diagnostics.
    pub fn label(&self, circuit: &Circuit, i: usize) -> String {
        if i < self.num_nodes {
            format!("V({})", circuit.node_names[i])
        } else if i < self.bloch_start {
            let elem = self.branch_elems[i - self.num_nodes];
            format!("I({})", circuit.elements[elem].name)
        } else {
            let d = (i - self.bloch_start) / 3;
            let comp = ["x", "y", "z"][(i - self.bloch_start) % 3];
            format!("{}.{comp}", circuit.qdevs[d].name)
        }
    }
}

/// Jacobian block structure: index ranges of the four blocks plus the stamped
/// couplings of each quantum device. The pattern is fixed at elaboration and
/// reused across all timesteps.
#[derive(Debug, Clone)]
pub struct JacobianLayout {
    pub dim: usize,
    /// Network unknowns occupy 0..network_end (MNA stamps).
    pub network_end: usize,
    /// Quantum unknowns occupy network_end..dim.
    /// Per device: (bloch row/col start, terminal voltage indices). These are
    /// the only rows/columns through which the two blocks couple.
    pub device_couplings: Vec<(usize, Vec<Option<usize>>)>,
}

/// Combined unknown vector at one time point.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub t: f64,
    pub u: DVector<f64>,
}

/// Runtime view of one quantum device bound into the system vector.
pub(crate) struct QdevRuntime<'a> {
    pub model: &'a dyn QuantumModel,
    /// Unknown index per terminal (None = ground).
    pub terminals: Vec<Option<usize>>,
    /// ∂ε/∂V per terminal, Hz/V.
    pub k: Vec<f64>,
    /// Charge rows per terminal.
    pub c: Vec<Vector3<f64>>,
    pub bloch0: usize,
}

impl QdevRuntime<'_> {
    pub fn eps(&self, u: &DVector<f64>) -> f64 {
        self.terminals
            .iter()
            .zip(&self.k)
            .map(|(t, k)| k * t.map(|i| u[i]).unwrap_or(0.0))
            .sum()
    }

    pub fn s(&self, u: &DVector<f64>) -> Vector3<f64> {
        Vector3::new(u[self.bloch0], u[self.bloch0 + 1], u[self.bloch0 + 2])
    }
}

/// Integration rule for the residual assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Method {
    /// Static system: capacitors open, inductors short, quantum at A·s+b = 0.
    Dc,
    /// Derivative estimate α·(u − u_n) − β·u̇_n with (α, β) per rule.
    Dynamic { alpha: f64, beta: f64 },
}

impl Method {
    pub fn backward_euler(dt: f64) -> Self {
        Method::Dynamic { alpha: 1.0 / dt, beta: 0.0 }
    }

    pub fn trapezoidal(dt: f64) -> Self {
        Method::Dynamic { alpha: 2.0 / dt, beta: 1.0 }
    }
}

/// The assembled coupled system for one circuit.
pub struct Engine<'a> {
    pub circuit: &'a Circuit,
    pub layout: SystemLayout,
    pub(crate) qdevs: Vec<QdevRuntime<'a>>,
}

pub(crate) struct Assembled {
    pub residual: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    /// Per-row sum of |stamp| magnitudes, for scaled residual checks.
    pub scale: DVector<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(circuit: &'a Circuit) -> Result<Self> {
        let layout = SystemLayout::from_circuit(circuit);
        let qdevs = circuit
            .qdevs
            .iter()
            .enumerate()
            .map(|(d, q)| build_runtime(q, d, &layout))
            .collect();
        Ok(Engine { circuit, layout, qdevs })
    }

    /// Residual and Jacobian of the coupled system at `(t, u)`: the static
    /// (DC) system when `dt` is None, else one implicit trapezoidal step of
    /// size dt from the previous state `(u_n, udot_n)`. Exposed for
    /// verification tooling (finite-difference Jacobian checks).
    pub fn linearize(
        &self,
        t: f64,
        u: &DVector<f64>,
        prev: Option<(&DVector<f64>, &DVector<f64>)>,
        dt: Option<f64>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let method = match dt {
            None => Method::Dc,
            Some(h) => Method::trapezoidal(h),
        };
        let asm = self.assemble(t, u, prev, method);
        (asm.residual, asm.jacobian)
    }

    pub fn jacobian_layout(&self) -> JacobianLayout {
        JacobianLayout {
            dim: self.layout.dim,
            network_end: self.layout.bloch_start,
            device_couplings: self
                .qdevs
                .iter()
                .map(|q| (q.bloch0, q.terminals.clone()))
                .collect(),
        }
    }

    /// Assembles residual, Jacobian, and row scales at time `t` for iterate
    /// `u`, given the previous accepted state for dynamic methods.
    pub(crate) fn assemble(
        &self,
        t: f64,
        u: &DVector<f64>,
        prev: Option<(&DVector<f64>, &DVector<f64>)>,
        method: Method,
    ) -> Assembled {
        let n = self.layout.dim;
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        let mut scale = DVector::zeros(n);

        let vat = |u: &DVector<f64>, node: NodeRef| node.map(|i| u[i]).unwrap_or(0.0);

        // Adds `val` (with derivative stamps handled by the caller) into a KCL
        // row unless the node is ground.
        macro_rules! kcl {
            ($row:expr, $val:expr) => {
                if let Some(i) = $row {
                    r[i] += $val;
                    scale[i] += ($val as f64).abs();
                }
            };
        }
        macro_rules! jstamp {
            ($row:expr, $col:expr, $val:expr) => {
                if let (Some(ri), Some(ci)) = ($row, $col) {
                    jac[(ri, ci)] += $val;
                }
            };
        }

        for (ei, elem) in self.circuit.elements.iter().enumerate() {
            match &elem.kind {
                ElemKind::Resistor { a, b, ohms } => {
                    let g = 1.0 / ohms;
                    let i_r = g * (vat(u, *a) - vat(u, *b));
                    kcl!(*a, i_r);
                    kcl!(*b, -i_r);
                    jstamp!(*a, *a, g);
                    jstamp!(*a, *b, -g);
                    jstamp!(*b, *a, -g);
                    jstamp!(*b, *b, g);
                }
                ElemKind::Capacitor { a, b, farads } => {
                    let Method::Dynamic { alpha, beta } = method else { continue };
                    let (u_n, udot_n) = prev.expect("dynamic method needs history");
                    let vd = vat(u, *a) - vat(u, *b);
                    let vd_n = vat(u_n, *a) - vat(u_n, *b);
                    let vddot_n = vat(udot_n, *a) - vat(udot_n, *b);
                    let i_c = farads * (alpha * (vd - vd_n) - beta * vddot_n);
                    let g = farads * alpha;
                    kcl!(*a, i_c);
                    kcl!(*b, -i_c);
                    jstamp!(*a, *a, g);
                    jstamp!(*a, *b, -g);
                    jstamp!(*b, *a, -g);
                    jstamp!(*b, *b, g);
                }
                ElemKind::Inductor { a, b, henries } => {
                    let br = self.layout.branch(ei).expect("inductor branch");
                    let i_l = u[br];
                    kcl!(*a, i_l);
                    kcl!(*b, -i_l);
                    jstamp!(*a, Some(br), 1.0);
                    jstamp!(*b, Some(br), -1.0);
                    let vd = vat(u, *a) - vat(u, *b);
                    match method {
                        Method::Dc => {
                            // Short: v = 0.
                            r[br] = vd;
                            scale[br] += vd.abs().max(1.0);
                            jstamp!(Some(br), *a, 1.0);
                            jstamp!(Some(br), *b, -1.0);
                        }
                        Method::Dynamic { alpha, beta } => {
                            let (u_n, udot_n) = prev.expect("dynamic method needs history");
                            let didt = alpha * (i_l - u_n[br]) - beta * udot_n[br];
                            r[br] = vd - henries * didt;
                            scale[br] += vd.abs() + (henries * didt).abs() + 1e-12;
                            jstamp!(Some(br), *a, 1.0);
                            jstamp!(Some(br), *b, -1.0);
                            jac[(br, br)] -= henries * alpha;
                        }
                    }
                }
                ElemKind::VSource { a, b, wave } => {
                    let br = self.layout.branch(ei).expect("vsource branch");
                    let i_br = u[br];
                    kcl!(*a, i_br);
                    kcl!(*b, -i_br);
                    jstamp!(*a, Some(br), 1.0);
                    jstamp!(*b, Some(br), -1.0);
                    let e = match method {
                        Method::Dc => wave.dc_value(),
                        Method::Dynamic { .. } => wave.eval(t),
                    };
                    r[br] = vat(u, *a) - vat(u, *b) - e;
                    scale[br] += e.abs().max(1.0);
                    jstamp!(Some(br), *a, 1.0);
                    jstamp!(Some(br), *b, -1.0);
                }
                ElemKind::ISource { a, b, wave } => {
                    let j = match method {
                        Method::Dc => wave.dc_value(),
                        Method::Dynamic { .. } => wave.eval(t),
                    };
                    kcl!(*a, j);
                    kcl!(*b, -j);
                }
            }
        }

        for q in &self.qdevs {
            let eps = q.eps(u);
            let s = q.s(u);
            let gen = q.model.generator(Energy(eps));
            let f = gen.apply(&s);
            let (da, db) = q.model.generator_derivative(Energy(eps));
            let dfdeps = da * s + db;
            let b0 = q.bloch0;

            match method {
                Method::Dc => {
                    // Quantum rows: A·s + b = 0. Terminal currents vanish at
                    // the fixed point and are not stamped.
                    for i in 0..3 {
                        r[b0 + i] = f[i];
                        scale[b0 + i] +=
                            gen.b[i].abs() + (gen.a.row(i).amax() * s.amax()).abs() + 1.0;
                        for j in 0..3 {
                            jac[(b0 + i, b0 + j)] = gen.a[(i, j)];
                        }
                        for (term, k) in q.terminals.iter().zip(&q.k) {
                            jstamp!(Some(b0 + i), *term, dfdeps[i] * k);
                        }
                    }
                }
                Method::Dynamic { alpha, beta } => {
                    let (u_n, udot_n) = prev.expect("dynamic method needs history");
                    // udot_n holds f(s_n, ε_n) for Bloch rows, so the β = 1
                    // branch is exactly the Crank-Nicolson update.
                    for i in 0..3 {
                        let sdot_est = alpha * (s[i] - u_n[b0 + i]) - beta * udot_n[b0 + i];
                        r[b0 + i] = sdot_est - f[i];
                        scale[b0 + i] += f[i].abs() + alpha.abs() + 1.0;
                        for j in 0..3 {
                            jac[(b0 + i, b0 + j)] -= gen.a[(i, j)];
                        }
                        jac[(b0 + i, b0 + i)] += alpha;
                        for (term, k) in q.terminals.iter().zip(&q.k) {
                            jstamp!(Some(b0 + i), *term, -dfdeps[i] * k);
                        }
                    }
                    // KCL rows: terminal currents e·c_l·(A·s + b).
                    for (l, term) in q.terminals.iter().enumerate() {
                        let c = &q.c[l];
                        let i_l = crate::constants::E_CHARGE * c.dot(&f);
                        kcl!(*term, i_l);
                        if let Some(row) = term {
                            let dids = crate::constants::E_CHARGE * (gen.a.transpose() * c);
                            for j in 0..3 {
                                jac[(*row, b0 + j)] += dids[j];
                            }
                            let dideps = crate::constants::E_CHARGE * c.dot(&dfdeps);
                            for (tm, k) in q.terminals.iter().zip(&q.k) {
                                jstamp!(Some(*row), *tm, dideps * k);
                            }
                        }
                    }
                }
            }
        }

        Assembled { residual: r, jacobian: jac, scale }
    }

    /// DC operating point: capacitors open, inductors short, quantum devices
    /// at their fixed point self-consistently with the node voltages.
    ///
    /// The network subsystem at DC is linear (quantum terminal currents vanish
    /// at the fixed point), so it is solved directly and the quantum blocks
    /// follow in closed form; the combined residual is then verified at
    /// 1e−12·scale. A Newton polish with source stepping backs this up if the
    /// verification ever fails.
    pub fn dc_operating_point(&self) -> Result<SystemState> {
        let n = self.layout.dim;
        let mut u = DVector::zeros(n);

        self.solve_dc_network(&mut u, 1.0)?;

        // Quantum fixed points from the solved node voltages.
        for q in &self.qdevs {
            let eps = q.eps(&u);
            let s = q.model.fixed_point(Energy(eps));
            for i in 0..3 {
                u[q.bloch0 + i] = s[i];
            }
        }

        // Verify the full coupled residual.
        let asm = self.assemble(0.0, &u, None, Method::Dc);
        let ok = (0..n).all(|i| asm.residual[i].abs() <= 1e-12 * asm.scale[i].max(1.0));
        if !ok {
            self.newton_polish_dc(&mut u)?;
        }
        Ok(SystemState { t: 0.0, u })
    }

    /// Direct solve of the linear DC network (nodes + branches only), with
    /// all sources scaled by `lambda` (source stepping support).
    fn solve_dc_network(&self, u: &mut DVector<f64>, lambda: f64) -> Result<()> {
        let nn = self.layout.bloch_start;
        if nn == 0 {
            return Ok(());
        }
        let mut a = DMatrix::<f64>::zeros(nn, nn);
        let mut rhs = DVector::<f64>::zeros(nn);
        let mut stamp = |row: Option<usize>, col: Option<usize>, val: f64| {
            if let (Some(r), Some(c)) = (row, col) {
                a[(r, c)] += val;
            }
        };
        for (ei, elem) in self.circuit.elements.iter().enumerate() {
            match &elem.kind {
                ElemKind::Resistor { a: na, b: nb, ohms } => {
                    let g = 1.0 / ohms;
                    stamp(*na, *na, g);
                    stamp(*na, *nb, -g);
                    stamp(*nb, *na, -g);
                    stamp(*nb, *nb, g);
                }
                ElemKind::Capacitor { .. } => {}
                ElemKind::Inductor { a: na, b: nb, .. } => {
                    let br = self.layout.branch(ei).unwrap();
                    stamp(*na, Some(br), 1.0);
                    stamp(*nb, Some(br), -1.0);
                    stamp(Some(br), *na, 1.0);
                    stamp(Some(br), *nb, -1.0);
                }
                ElemKind::VSource { a: na, b: nb, wave } => {
                    let br = self.layout.branch(ei).unwrap();
                    stamp(*na, Some(br), 1.0);
                    stamp(*nb, Some(br), -1.0);
                    stamp(Some(br), *na, 1.0);
                    stamp(Some(br), *nb, -1.0);
                    rhs[br] += lambda * wave.dc_value();
                }
                ElemKind::ISource { a: na, b: nb, wave } => {
                    let j = lambda * wave.dc_value();
                    if let Some(i) = na {
                        rhs[*i] -= j;
                    }
                    if let Some(i) = nb {
                        rhs[*i] += j;
                    }
                }
            }
        }
        let lu = a.clone().lu();
        let x = lu.solve(&rhs).ok_or_else(|| {
            Error::Topology("singular DC system (floating node or source loop)".into())
        })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Topology(
                "singular DC system (floating node or source loop)".into(),
            ));
        }
        // Verify: LU with partial pivoting can return garbage for singular
        // systems instead of failing.
        let res = &a * &x - &rhs;
        let rscale = rhs.amax().max(x.amax()).max(1.0);
        if res.amax() > 1e-9 * rscale {
            return Err(Error::Topology(
                "singular DC system (floating node or source loop)".into(),
            ));
        }
        for i in 0..nn {
            u[i] = x[i];
        }
        Ok(())
    }

    /// Newton iteration on the full DC residual, ramping sources if the
    /// direct iteration fails.
    fn newton_polish_dc(&self, u: &mut DVector<f64>) -> Result<()> {
        if self.newton_dc_once(u).is_ok() {
            return Ok(());
        }
        // Source stepping: ramp λ from 0.1 to 1 reusing each converged point.
        let mut lambda = 0.1;
        while lambda < 1.0 + 1e-12 {
            self.solve_dc_network(u, lambda)?;
            for q in &self.qdevs {
                let eps = q.eps(u);
                let s = q.model.fixed_point(Energy(eps));
                for i in 0..3 {
                    u[q.bloch0 + i] = s[i];
                }
            }
            lambda += 0.1;
        }
        self.newton_dc_once(u)
    }

    fn newton_dc_once(&self, u: &mut DVector<f64>) -> Result<()> {
        for _ in 0..50 {
            let asm = self.assemble(0.0, u, None, Method::Dc);
            let ok = (0..self.layout.dim)
                .all(|i| asm.residual[i].abs() <= 1e-12 * asm.scale[i].max(1.0));
            if ok {
                return Ok(());
            }
            let delta = asm
                .jacobian
                .lu()
                .solve(&(-&asm.residual))
                .ok_or_else(|| Error::Topology("singular Jacobian at DC".into()))?;
            if delta.iter().any(|v| !v.is_finite()) {
                return Err(Error::Topology("non-finite Newton update at DC".into()));
            }
            *u += delta;
        }
        let asm = self.assemble(0.0, u, None, Method::Dc);
        let worst = (0..self.layout.dim)
            .max_by(|&i, &j| {
                let ri = asm.residual[i].abs() / asm.scale[i].max(1.0);
                let rj = asm.residual[j].abs() / asm.scale[j].max(1.0);
                ri.partial_cmp(&rj).unwrap()
            })
            .unwrap_or(0);
        Err(Error::Convergence {
            t: 0.0,
            msg: format!(
                "DC Newton did not converge; worst residual {:.3e} in row {}",
                asm.residual[worst],
                self.layout.label(self.circuit, worst)
            ),
        })
    }

    /// All source breakpoints (slope discontinuities) in (0, tstop).
    pub fn breakpoints(&self, tstop: f64) -> Vec<f64> {
        let mut bps: Vec<f64> = self
            .circuit
            .elements
            .iter()
            .flat_map(|e| match &e.kind {
                ElemKind::VSource { wave, .. } | ElemKind::ISource { wave, .. } => {
                    wave.breakpoints(tstop)
                }
                _ => Vec::new(),
            })
            .collect();
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
        bps
    }
}

fn build_runtime<'a>(
    q: &'a QuantumInstance,
    dev_index: usize,
    layout: &SystemLayout,
) -> QdevRuntime<'a> {
    let model = q.model();
    QdevRuntime {
        model,
        terminals: q.terminals.to_vec(),
        k: model.detuning_gradient(),
        c: model.charge_rows(),
        bloch0: layout.bloch(dev_index),
    }
}

/// A scalar quantity derived from the system trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputQuantity {
    NodeVoltage(NodeRef),
    /// Branch current of a V source or inductor (element index).
    BranchCurrent(usize),
    ResistorCurrent(usize),
    CapacitorCurrent(usize),
    /// Terminal current of quantum device (device, terminal).
    QdevCurrent(usize, usize),
    /// Bloch component (device, 0..3).
    Bloch(usize, usize),
    /// Population of basis state 1 or 2 (device, which).
    Population(usize, u8),
    /// Operating detuning ε/h in Hz.
    Detuning(usize),
}

/// Resolves a `.print` target against the circuit.
pub fn resolve_print(circuit: &Circuit, target: &PrintTarget) -> Result<OutputQuantity> {
    let unknown = || Error::Config(format!("unknown print target {}.{}", target.subject, target.field));
    match target.field.as_str() {
        "v" => {
            let node = circuit.node_by_name(&target.subject).ok_or_else(unknown)?;
            Ok(OutputQuantity::NodeVoltage(node))
        }
        "i" => {
            if let Some((d, _)) = circuit.qdev_by_name(&target.subject) {
                return Ok(OutputQuantity::QdevCurrent(d, 0));
            }
            let (ei, elem) = circuit
                .elements
                .iter()
                .enumerate()
                .find(|(_, e)| e.name.eq_ignore_ascii_case(&target.subject))
                .ok_or_else(unknown)?;
            match elem.kind {
                ElemKind::VSource { .. } | ElemKind::Inductor { .. } => {
                    Ok(OutputQuantity::BranchCurrent(ei))
                }
                ElemKind::Resistor { .. } => Ok(OutputQuantity::ResistorCurrent(ei)),
                ElemKind::Capacitor { .. } => Ok(OutputQuantity::CapacitorCurrent(ei)),
                ElemKind::ISource { .. } => {
                    Err(Error::Config(format!("current of current source '{}'", target.subject)))
                }
            }
        }
        "ig" => circuit
            .qdev_by_name(&target.subject)
            .map(|(d, _)| OutputQuantity::QdevCurrent(d, 0))
            .ok_or_else(unknown),
        "ir" | "ig2" => circuit
            .qdev_by_name(&target.subject)
            .map(|(d, _)| OutputQuantity::QdevCurrent(d, 1))
            .ok_or_else(unknown),
        "p1" => circuit
            .qdev_by_name(&target.subject)
            .map(|(d, _)| OutputQuantity::Population(d, 1))
            .ok_or_else(unknown),
        "p2" => circuit
            .qdev_by_name(&target.subject)
            .map(|(d, _)| OutputQuantity::Population(d, 2))
            .ok_or_else(unknown),
        "x" | "y" | "z" => {
            let comp = match target.field.as_str() {
                "x" => 0,
                "y" => 1,
                _ => 2,
            };
            circuit
                .qdev_by_name(&target.subject)
                .map(|(d, _)| OutputQuantity::Bloch(d, comp))
                .ok_or_else(unknown)
        }
        "eps" => circuit
            .qdev_by_name(&target.subject)
            .map(|(d, _)| OutputQuantity::Detuning(d))
            .ok_or_else(unknown),
        other => Err(Error::Config(format!("print field '.{other}' is not a transient output"))),
    }
}
