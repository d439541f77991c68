//! Adaptive transient integration.
//!
//! Trapezoidal rule with backward-Euler startup and restarts after source
//! breakpoints, local-truncation-error step control via third divided
//! differences, and one Newton solve of the coupled residual per step.
//! Breakpoints (PULSE edges) are hit exactly.

use super::{Engine, Method, OutputQuantity, SystemState};
use crate::constants::E_CHARGE;
use crate::error::{Error, Result};
use crate::specfun::Energy;
use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct TranOpts {
    /// Step ceiling and output-resolution hint.
    pub tstep: f64,
    pub tstop: f64,
    /// Recording starts here (integration always starts at 0).
    pub tstart: f64,
    pub reltol: f64,
    pub abstol_v: f64,
    pub abstol_i: f64,
    pub abstol_s: f64,
    pub max_newton: usize,
}

impl TranOpts {
    pub fn new(tstep: f64, tstop: f64) -> Self {
        TranOpts {
            tstep,
            tstop,
            tstart: 0.0,
            reltol: 1e-6,
            abstol_v: 1e-9,
            abstol_i: 1e-15,
            abstol_s: 1e-9,
            max_newton: 30,
        }
    }
}

/// Accepted solution points: value and time-derivative of every unknown at
/// every accepted step. Derivatives make the series cubic-Hermite
/// interpolable, so adaptive steps stay coarse without costing output
/// accuracy.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub derivs: Vec<DVector<f64>>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> SystemState {
        SystemState {
            t: *self.times.last().unwrap(),
            u: self.states.last().unwrap().clone(),
        }
    }
}

impl Engine<'_> {
    /// Integrates from the DC operating point to `tstop`.
    pub fn transient(&self, opts: &TranOpts) -> Result<Trajectory> {
        let dc = self.dc_operating_point()?;
        self.transient_from(dc, opts)
    }

    /// Integrates from a given initial state (its `t` field is the start
    /// time; sources are evaluated on the same clock).
    pub fn transient_from(&self, initial: SystemState, opts: &TranOpts) -> Result<Trajectory> {
        let dim = self.layout.dim;
        let dtmax = opts.tstep;
        let dtmin = opts.tstep / 1000.0;
        let t0 = initial.t;

        let mut breakpoints = self.breakpoints(opts.tstop);
        breakpoints.retain(|&b| b > t0);
        breakpoints.push(opts.tstop);
        let mut bp_idx = 0usize;

        let mut u = initial.u;
        let mut udot = DVector::zeros(dim);
        self.store_bloch_derivs(&u, &mut udot);

        let mut traj = Trajectory {
            times: vec![t0],
            states: vec![u.clone()],
            derivs: vec![udot.clone()],
            steps_accepted: 0,
            steps_rejected: 0,
        };

        let atol = self.atol_vector(opts);
        let mut t = t0;
        let mut dt = dtmin.max(dtmax / 1000.0);
        let mut since_reset = 0usize;

        while t < opts.tstop - 1e-15 * opts.tstop.max(1.0) {
            while bp_idx < breakpoints.len() && breakpoints[bp_idx] <= t + 1e-18 {
                bp_idx += 1;
            }
            let next_bp = breakpoints.get(bp_idx).copied().unwrap_or(opts.tstop);

            let mut dt_eff = dt.min(dtmax);
            let mut hits_bp = false;
            if t + dt_eff >= next_bp - 1e-15 * next_bp.max(1.0) {
                dt_eff = next_bp - t;
                hits_bp = true;
            }

            let t_new = t + dt_eff;
            let method = if since_reset == 0 {
                Method::backward_euler(dt_eff)
            } else {
                Method::trapezoidal(dt_eff)
            };

            // Linear predictor as the Newton starting point.
            let guess = &u + dt_eff * &udot;
            let solved = self.newton_dynamic(t_new, guess, (&u, &udot), method, opts, &atol);
            let u_new = match solved {
                Ok(x) => x,
                Err(_) if dt_eff > dtmin => {
                    dt = (dt_eff / 2.0).max(dtmin);
                    traj.steps_rejected += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };

            // Derivative at the new point: integrator recurrence for network
            // unknowns, the exact right-hand side for Bloch rows.
            let mut udot_new = match method {
                Method::Dynamic { alpha, beta } => alpha * (&u_new - &u) - beta * &udot,
                Method::Dc => unreachable!(),
            };
            self.store_bloch_derivs(&u_new, &mut udot_new);

            // LTE control once enough smooth history exists.
            if since_reset >= 3 {
                let n = traj.len();
                let ratio = lte_ratio(
                    &traj.times[n - 3..],
                    &traj.states[n - 3..],
                    t_new,
                    &u_new,
                    dt_eff,
                    opts.reltol,
                    &atol,
                );
                if ratio > 1.0 && dt_eff > dtmin + 1e-30 {
                    traj.steps_rejected += 1;
                    dt = (dt_eff * (0.9 * ratio.powf(-1.0 / 3.0)).clamp(0.2, 0.9)).max(dtmin);
                    continue;
                }
                dt = (dt_eff * (0.9 * ratio.powf(-1.0 / 3.0)).clamp(0.3, 2.0)).clamp(dtmin, dtmax);
            } else {
                dt = (dt_eff * 2.0).clamp(dtmin, dtmax);
            }

            t = t_new;
            u = u_new;
            udot = udot_new;
            traj.times.push(t);
            traj.states.push(u.clone());
            traj.derivs.push(udot.clone());
            traj.steps_accepted += 1;

            if hits_bp && (next_bp - opts.tstop).abs() > 1e-18 {
                since_reset = 0;
                dt = dtmin.max(dtmax / 1000.0);
            } else {
                since_reset += 1;
            }
        }
        Ok(traj)
    }

    /// Writes f(s, ε) into the Bloch rows of `udot`.
    fn store_bloch_derivs(&self, u: &DVector<f64>, udot: &mut DVector<f64>) {
        for q in &self.qdevs {
            let gen = q.model.generator(Energy(q.eps(u)));
            let f = gen.apply(&q.s(u));
            for i in 0..3 {
                udot[q.bloch0 + i] = f[i];
            }
        }
    }

    fn atol_vector(&self, opts: &TranOpts) -> DVector<f64> {
        DVector::from_iterator(
            self.layout.dim,
            (0..self.layout.dim).map(|i| match self.layout.kind(i) {
                super::UnknownKind::NodeVoltage => opts.abstol_v,
                super::UnknownKind::BranchCurrent => opts.abstol_i,
                super::UnknownKind::Bloch => opts.abstol_s,
            }),
        )
    }

    fn newton_dynamic(
        &self,
        t: f64,
        mut u: DVector<f64>,
        prev: (&DVector<f64>, &DVector<f64>),
        method: Method,
        opts: &TranOpts,
        atol: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let dim = self.layout.dim;
        let mut last_norm = f64::INFINITY;
        for _iter in 0..opts.max_newton {
            let asm = self.assemble(t, &u, Some(prev), method);
            if asm.residual.iter().any(|v| !v.is_finite()) {
                return Err(Error::Convergence { t, msg: "non-finite residual".into() });
            }
            let delta = asm
                .jacobian
                .lu()
                .solve(&(-&asm.residual))
                .ok_or(Error::Convergence { t, msg: "singular Jacobian".into() })?;
            if delta.iter().any(|v| !v.is_finite()) {
                return Err(Error::Convergence { t, msg: "non-finite Newton update".into() });
            }
            u += &delta;
            // Weighted update norm: 1e-10 relative with a small absolute
            // floor well below the LTE tolerances.
            let mut worst = 0.0f64;
            for i in 0..dim {
                let w = 1e-10 * u[i].abs() + 1e-2 * atol[i];
                worst = worst.max(delta[i].abs() / w);
            }
            if worst < 1.0 {
                return Ok(u);
            }
            if worst > 4.0 * last_norm && _iter > 3 {
                break; // diverging
            }
            last_norm = worst;
        }
        Err(Error::Convergence { t, msg: format!("Newton stalled after {} iterations", opts.max_newton) })
    }

    /// Extracts an output column (values and time-derivatives) from a
    /// trajectory.
    pub fn output_series(&self, traj: &Trajectory, q: &OutputQuantity) -> (Vec<f64>, Vec<f64>) {
        let n = traj.len();
        let vat = |u: &DVector<f64>, node: crate::netlist::NodeRef| {
            node.map(|i| u[i]).unwrap_or(0.0)
        };
        match *q {
            OutputQuantity::NodeVoltage(node) => match node {
                Some(i) => (
                    traj.states.iter().map(|u| u[i]).collect(),
                    traj.derivs.iter().map(|du| du[i]).collect(),
                ),
                None => (vec![0.0; n], vec![0.0; n]),
            },
            OutputQuantity::BranchCurrent(elem) => {
                let i = self.layout.branch(elem).expect("element has a branch current");
                (
                    traj.states.iter().map(|u| u[i]).collect(),
                    traj.derivs.iter().map(|du| du[i]).collect(),
                )
            }
            OutputQuantity::ResistorCurrent(elem) => {
                let crate::netlist::ElemKind::Resistor { a, b, ohms } =
                    self.circuit.elements[elem].kind
                else {
                    unreachable!("not a resistor")
                };
                let vals = traj.states.iter().map(|u| (vat(u, a) - vat(u, b)) / ohms).collect();
                let ders = traj.derivs.iter().map(|du| (vat(du, a) - vat(du, b)) / ohms).collect();
                (vals, ders)
            }
            OutputQuantity::CapacitorCurrent(elem) => {
                let crate::netlist::ElemKind::Capacitor { a, b, farads } =
                    self.circuit.elements[elem].kind
                else {
                    unreachable!("not a capacitor")
                };
                let vals: Vec<f64> =
                    traj.derivs.iter().map(|du| farads * (vat(du, a) - vat(du, b))).collect();
                let ders = crate::interp::numeric_derivs(&traj.times, &vals);
                (vals, ders)
            }
            OutputQuantity::QdevCurrent(dev, term) => {
                let q = &self.qdevs[dev];
                let c = q.c[term];
                let mut vals = Vec::with_capacity(n);
                let mut ders = Vec::with_capacity(n);
                for (u, du) in traj.states.iter().zip(&traj.derivs) {
                    let eps = q.eps(u);
                    let gen = q.model.generator(Energy(eps));
                    let s = q.s(u);
                    let f = gen.apply(&s);
                    vals.push(E_CHARGE * c.dot(&f));
                    // İ = e·c·(A·ṡ + (A′s+b′)·ε̇)
                    let sdot = nalgebra::Vector3::new(
                        du[q.bloch0],
                        du[q.bloch0 + 1],
                        du[q.bloch0 + 2],
                    );
                    let epsdot: f64 = q
                        .terminals
                        .iter()
                        .zip(&q.k)
                        .map(|(tm, k)| k * tm.map(|i| du[i]).unwrap_or(0.0))
                        .sum();
                    let (da, db) = q.model.generator_derivative(Energy(eps));
                    ders.push(E_CHARGE * c.dot(&(gen.a * sdot + (da * s + db) * epsdot)));
                }
                (vals, ders)
            }
            OutputQuantity::Bloch(dev, comp) => {
                let i = self.layout.bloch(dev) + comp;
                (
                    traj.states.iter().map(|u| u[i]).collect(),
                    traj.derivs.iter().map(|du| du[i]).collect(),
                )
            }
            OutputQuantity::Population(dev, which) => {
                let i = self.layout.bloch(dev) + 2;
                let sign = if which == 1 { 0.5 } else { -0.5 };
                (
                    traj.states.iter().map(|u| 0.5 + sign * u[i]).collect(),
                    traj.derivs.iter().map(|du| sign * du[i]).collect(),
                )
            }
            OutputQuantity::Detuning(dev) => {
                let q = &self.qdevs[dev];
                let vals = traj.states.iter().map(|u| q.eps(u)).collect();
                let ders = traj
                    .derivs
                    .iter()
                    .map(|du| {
                        q.terminals
                            .iter()
                            .zip(&q.k)
                            .map(|(tm, k)| k * tm.map(|i| du[i]).unwrap_or(0.0))
                            .sum()
                    })
                    .collect();
                (vals, ders)
            }
        }
    }
}

/// Max ratio of estimated local truncation error to tolerance across
/// components. Third divided difference over the last three accepted points
/// plus the candidate estimates u‴/6; trapezoidal LTE is dt³·u‴/12.
fn lte_ratio(
    hist_t: &[f64],
    hist_u: &[DVector<f64>],
    t_new: f64,
    u_new: &DVector<f64>,
    dt: f64,
    reltol: f64,
    atol: &DVector<f64>,
) -> f64 {
    debug_assert_eq!(hist_t.len(), 3);
    let (t0, t1, t2) = (hist_t[0], hist_t[1], hist_t[2]);
    let dim = u_new.len();
    let mut worst = 0.0f64;
    for i in 0..dim {
        let (u0, u1, u2, u3) = (hist_u[0][i], hist_u[1][i], hist_u[2][i], u_new[i]);
        let f01 = (u1 - u0) / (t1 - t0);
        let f12 = (u2 - u1) / (t2 - t1);
        let f23 = (u3 - u2) / (t_new - t2);
        let f012 = (f12 - f01) / (t2 - t0);
        let f123 = (f23 - f12) / (t_new - t1);
        let dd3 = (f123 - f012) / (t_new - t0);
        let lte = 0.5 * dt.powi(3) * dd3.abs();
        let tol = reltol * u3.abs() + atol[i];
        worst = worst.max(lte / tol);
    }
    worst
}

