//! Higher-level analyses on top of the engine: quantum small-signal linear
//! response, full-network AC solves and S11, large-signal admittance
//! extraction by Fourier projection, harmonic spectra, and parameter sweeps.

use crate::constants::E_CHARGE;
use crate::engine::{Engine, OutputQuantity, SystemLayout};
use crate::error::{Error, Result};
use crate::interp::Sampled;
use crate::netlist::{Circuit, ElemKind, Waveform};
use crate::parallel::{map_indexed, ExecMode};
use crate::quantum::QuantumModel;
use crate::specfun::Energy;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// One point of an extracted device admittance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmittancePoint {
    /// Drive frequency, Hz.
    pub freq: f64,
    /// Complex admittance, S (current into the measured terminal per volt of
    /// drive, cosine phase reference).
    pub y_re: f64,
    pub y_im: f64,
    /// Operating detuning ε/h, Hz.
    pub eps0: f64,
    /// False when the periodic steady state had not settled (cycle-to-cycle
    /// first-harmonic drift above 0.1%).
    pub settled: bool,
}

impl AdmittancePoint {
    pub fn y(&self) -> Complex64 {
        Complex64::new(self.y_re, self.y_im)
    }
}

/// Small-signal admittance block of a quantum device at its operating point.
///
/// `y[l][m]` is the current response at terminal l per volt applied at
/// terminal m, both referenced to ground.
#[derive(Debug, Clone)]
pub struct QuantumAcBlock {
    pub y: [[Complex64; 2]; 2],
}

/// Linear response of a device around the fixed point of A(ε₀)s + b(ε₀):
/// δs = (iωI − A)⁻¹·(A′s₀ + b′)·δε, and Y_lm = e·iω·(c_l·δs per unit δε)·∂ε/∂V_m.
pub fn quantum_ac(model: &dyn QuantumModel, eps0: Energy, f: f64) -> Result<QuantumAcBlock> {
    let omega = TAU * f;
    let gen = model.generator(eps0);
    let s0 = model.fixed_point(eps0);
    let (da, db) = model.generator_derivative(eps0);
    let dfdeps = da * s0 + db;

    let mut m = DMatrix::<Complex64>::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = Complex64::new(-gen.a[(i, j)], 0.0);
        }
        m[(i, i)] += Complex64::new(0.0, omega);
    }
    let rhs = DVector::from_iterator(3, dfdeps.iter().map(|&v| Complex64::new(v, 0.0)));
    let ds = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::ResonanceSingularity { f })?;
    if ds.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::ResonanceSingularity { f });
    }

    let k = model.detuning_gradient();
    let c = model.charge_rows();
    let jw = Complex64::new(0.0, omega);
    let mut y = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (l, cl) in c.iter().enumerate().take(2) {
        let coupling: Complex64 = (0..3).map(|i| cl[i] * ds[i]).sum();
        for (mi, km) in k.iter().enumerate().take(2) {
            y[l][mi] = jw * E_CHARGE * coupling * km;
        }
    }
    Ok(QuantumAcBlock { y })
}

/// Gate-terminal admittance (terminal 0 response to terminal 0 drive).
pub fn quantum_ac_gate(model: &dyn QuantumModel, eps0: Energy, f: f64) -> Result<Complex64> {
    Ok(quantum_ac(model, eps0, f)?.y[0][0])
}

/// Full-network small-signal solution over a frequency grid.
#[derive(Debug, Clone)]
pub struct AcSweep {
    pub freqs: Vec<f64>,
    /// Phasors of all network unknowns (node voltages then branch currents)
    /// per frequency; the drive source is at 1 V, other sources are zeroed.
    pub solutions: Vec<DVector<Complex64>>,
    pub layout: SystemLayout,
}

impl AcSweep {
    pub fn node_phasor(&self, circuit: &Circuit, name: &str, fi: usize) -> Result<Complex64> {
        let node = circuit
            .node_by_name(name)
            .ok_or_else(|| Error::Config(format!("unknown node '{name}'")))?;
        Ok(match node {
            Some(i) => self.solutions[fi][i],
            None => Complex64::new(0.0, 0.0),
        })
    }
}

/// Stamps linear elements at iω, inserts each quantum device's linearized
/// admittance block at its DC operating point, and solves per frequency.
/// The source named `drive` is set to 1 V; all other sources are zeroed.
pub fn network_ac(circuit: &Circuit, freqs: &[f64], drive: &str) -> Result<AcSweep> {
    let engine = Engine::new(circuit)?;
    let dc = engine.dc_operating_point()?;
    let dim = engine.layout.bloch_start;

    // Operating detunings and per-frequency quantum blocks.
    let qinfo: Vec<(Vec<Option<usize>>, &dyn QuantumModel, f64)> = engine
        .qdevs
        .iter()
        .map(|q| (q.terminals.clone(), q.model, q.eps(&dc.u)))
        .collect();

    let drive_idx = circuit
        .elements
        .iter()
        .position(|e| {
            e.name.eq_ignore_ascii_case(drive) && matches!(e.kind, ElemKind::VSource { .. })
        })
        .ok_or_else(|| Error::Config(format!("port not defined: no voltage source '{drive}'")))?;

    let mut solutions = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let omega = TAU * f;
        let jw = Complex64::new(0.0, omega);
        let mut a = DMatrix::<Complex64>::zeros(dim, dim);
        let mut rhs = DVector::<Complex64>::zeros(dim);
        let mut stamp = |row: Option<usize>, col: Option<usize>, val: Complex64| {
            if let (Some(r), Some(c)) = (row, col) {
                a[(r, c)] += val;
            }
        };
        for (ei, elem) in circuit.elements.iter().enumerate() {
            match &elem.kind {
                ElemKind::Resistor { a: na, b: nb, ohms } => {
                    let g = Complex64::new(1.0 / ohms, 0.0);
                    stamp(*na, *na, g);
                    stamp(*na, *nb, -g);
                    stamp(*nb, *na, -g);
                    stamp(*nb, *nb, g);
                }
                ElemKind::Capacitor { a: na, b: nb, farads } => {
                    let y = jw * *farads;
                    stamp(*na, *na, y);
                    stamp(*na, *nb, -y);
                    stamp(*nb, *na, -y);
                    stamp(*nb, *nb, y);
                }
                ElemKind::Inductor { a: na, b: nb, henries } => {
                    let br = engine.layout.branch(ei).unwrap();
                    let one = Complex64::new(1.0, 0.0);
                    stamp(*na, Some(br), one);
                    stamp(*nb, Some(br), -one);
                    stamp(Some(br), *na, one);
                    stamp(Some(br), *nb, -one);
                    stamp(Some(br), Some(br), -jw * *henries);
                }
                ElemKind::VSource { a: na, b: nb, .. } => {
                    let br = engine.layout.branch(ei).unwrap();
                    let one = Complex64::new(1.0, 0.0);
                    stamp(*na, Some(br), one);
                    stamp(*nb, Some(br), -one);
                    stamp(Some(br), *na, one);
                    stamp(Some(br), *nb, -one);
                    if ei == drive_idx {
                        rhs[br] = Complex64::new(1.0, 0.0);
                    }
                }
                ElemKind::ISource { .. } => {}
            }
        }
        for (terminals, model, eps0) in &qinfo {
            let block = quantum_ac(*model, Energy(*eps0), f)?;
            for (l, row) in terminals.iter().enumerate() {
                for (m, col) in terminals.iter().enumerate() {
                    stamp(*row, *col, block.y[l][m]);
                }
            }
        }
        let x = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numeric(format!("singular AC system at f={f:.3e} Hz")))?;
        solutions.push(x);
    }
    Ok(AcSweep { freqs: freqs.to_vec(), solutions, layout: engine.layout.clone() })
}

/// Reflection coefficient at a voltage-source port with reference impedance
/// `z0`: S11 = (Z_in − Z0)/(Z_in + Z0) with Z_in seen from the source
/// terminals.
pub fn s11(circuit: &Circuit, sweep: &AcSweep, port: &str, z0: f64) -> Result<Vec<Complex64>> {
    let port_idx = circuit
        .elements
        .iter()
        .position(|e| {
            e.name.eq_ignore_ascii_case(port) && matches!(e.kind, ElemKind::VSource { .. })
        })
        .ok_or_else(|| Error::Config(format!("port not defined: no voltage source '{port}'")))?;
    let br = sweep
        .layout
        .branch(port_idx)
        .ok_or_else(|| Error::Config(format!("'{port}' has no branch current")))?;
    Ok(sweep
        .solutions
        .iter()
        .map(|x| {
            // Driven at E = 1 V; the current delivered into the circuit is
            // −i_branch, so Z_in = −1/i_branch.
            let z_in = -Complex64::new(1.0, 0.0) / x[br];
            (z_in - z0) / (z_in + z0)
        })
        .collect())
}

/// Complex amplitudes of a periodic signal at k·f0 for k = 0..=nharm
/// (cosine-phase convention: v(t) ≈ Σ Re(c_k·e^{i·2πk·f0·t}), c_0 real mean).
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicSpectrum {
    pub f0: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// True when the requested window was not an integer multiple of the
    /// period and had to be shortened.
    pub window_adjusted: bool,
}

impl HarmonicSpectrum {
    pub fn amp(&self, k: usize) -> Complex64 {
        Complex64::new(self.re[k], self.im[k])
    }

    pub fn magnitude(&self, k: usize) -> f64 {
        self.amp(k).norm()
    }
}

/// Fourier projection of the final `ncycles/f0` of a (value, derivative)
/// series onto harmonics of f0. The series is Hermite-resampled to a uniform
/// grid (≥ 256 samples per period) before the projection integrals.
pub fn harmonic_spectrum(
    times: &[f64],
    values: &[f64],
    derivs: &[f64],
    f0: f64,
    nharm: usize,
    ncycles: usize,
) -> Result<HarmonicSpectrum> {
    if times.len() < 2 {
        return Err(Error::Config("harmonic_spectrum needs at least 2 samples".into()));
    }
    let period = 1.0 / f0;
    let t_end = *times.last().unwrap();
    let t_first = times[0];
    let available = t_end - t_first;
    let mut cycles = ncycles;
    let mut adjusted = false;
    if (cycles as f64) * period > available * (1.0 + 1e-9) {
        cycles = (available / period).floor() as usize;
        adjusted = true;
        if cycles == 0 {
            return Err(Error::Config(format!(
                "series covers {available:.3e}s, less than one period of {f0:.3e} Hz"
            )));
        }
    }
    let window = cycles as f64 * period;
    let t0 = t_end - window;

    let samples_per_cycle = 256usize;
    let n = cycles * samples_per_cycle;
    let series = Sampled { times, values, derivs };
    let dt = window / n as f64;
    // Periodic trapezoid: endpoints of the closed interval share one sample.
    let vals: Vec<f64> = (0..n).map(|k| series.eval(t0 + k as f64 * dt)).collect();

    let mut re = Vec::with_capacity(nharm + 1);
    let mut im = Vec::with_capacity(nharm + 1);
    for k in 0..=nharm {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in vals.iter().enumerate() {
            let phase = -TAU * k as f64 * f0 * (t0 + j as f64 * dt);
            acc += v * Complex64::from_polar(1.0, phase);
        }
        let norm = if k == 0 { 1.0 } else { 2.0 };
        let c = acc * norm / n as f64;
        re.push(c.re);
        im.push(c.im);
    }
    Ok(HarmonicSpectrum { f0, re, im, window_adjusted: adjusted })
}

/// Options for the transient-based admittance extraction.
#[derive(Debug, Clone)]
pub struct LargeSignalOpts {
    pub settle_cycles: usize,
    pub measure_cycles: usize,
    /// Transient step ceiling, as a fraction of the drive period.
    pub steps_per_cycle: usize,
}

impl Default for LargeSignalOpts {
    fn default() -> Self {
        LargeSignalOpts { settle_cycles: 20, measure_cycles: 8, steps_per_cycle: 128 }
    }
}

/// Runs a transient to periodic steady state and extracts the device's
/// gate-terminal admittance: the first harmonic of the gate current divided
/// by the first harmonic of the driving source voltage.
pub fn large_signal_admittance(
    circuit: &Circuit,
    device: &str,
    source: &str,
    opts: &LargeSignalOpts,
) -> Result<AdmittancePoint> {
    let (dev_idx, _) = circuit
        .qdev_by_name(device)
        .ok_or_else(|| Error::Config(format!("unknown quantum device '{device}'")))?;
    let src = circuit
        .element_by_name(source)
        .ok_or_else(|| Error::Config(format!("unknown source '{source}'")))?;
    let wave = match &src.kind {
        ElemKind::VSource { wave, .. } => wave.clone(),
        _ => return Err(Error::Config(format!("'{source}' is not a voltage source"))),
    };
    let Some((_amp, f)) = wave.sin_amp() else {
        return Err(Error::Config(format!("'{source}' is not a SIN source")));
    };

    let engine = Engine::new(circuit)?;
    let period = 1.0 / f;
    let tstop = (opts.settle_cycles + opts.measure_cycles) as f64 * period;
    let tran = crate::engine::TranOpts {
        tstep: period / opts.steps_per_cycle as f64,
        ..crate::engine::TranOpts::new(period / opts.steps_per_cycle as f64, tstop)
    };
    let dc = engine.dc_operating_point()?;
    let eps0 = engine.qdevs[dev_idx].eps(&dc.u);
    let traj = engine.transient_from(dc, &tran)?;

    let (ivals, iders) = engine.output_series(&traj, &OutputQuantity::QdevCurrent(dev_idx, 0));
    let project = |cycles_back: std::ops::Range<usize>| -> Result<(Complex64, Complex64)> {
        let t_end = tstop - cycles_back.start as f64 * period;
        let t0 = tstop - cycles_back.end as f64 * period;
        let n = (cycles_back.len()) * 512;
        let series = Sampled { times: &traj.times, values: &ivals, derivs: &iders };
        let dt = (t_end - t0) / n as f64;
        let mut acc_i = Complex64::new(0.0, 0.0);
        let mut acc_v = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let t = t0 + j as f64 * dt;
            let ph = Complex64::from_polar(1.0, -TAU * f * t);
            acc_i += series.eval(t) * ph;
            acc_v += wave.eval(t) * ph;
        }
        Ok((acc_i * 2.0 / n as f64, acc_v * 2.0 / n as f64))
    };

    let (i1, v1) = project(0..opts.measure_cycles)?;
    // Settledness: compare the first harmonic over the last cycle with the
    // one before it.
    let (ia, _) = project(0..1)?;
    let (ib, _) = project(1..2)?;
    let drift = (ia - ib).norm() / ia.norm().max(1e-300);
    let y = i1 / v1;
    Ok(AdmittancePoint {
        freq: f,
        y_re: y.re,
        y_im: y.im,
        eps0,
        settled: drift <= 1e-3,
    })
}

/// One sweep axis: a name and the values it takes.
#[derive(Debug, Clone, Serialize)]
pub struct SweepAxisDef {
    pub name: String,
    pub values: Vec<f64>,
}

/// Result grid of a 1- or 2-axis sweep. Cells are row-major with the first
/// axis outermost; a failed point is recorded as `None` and its error kept,
/// never aborting the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub axes: Vec<SweepAxisDef>,
    pub columns: Vec<String>,
    pub cells: Vec<Option<Vec<f64>>>,
    pub errors: Vec<(usize, String)>,
}

impl SweepGrid {
    pub fn num_points(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis coordinates of flat cell index i.
    pub fn coords(&self, mut i: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            let len = self.axes[k].values.len();
            idx[k] = i % len;
            i /= len;
        }
        idx.iter().zip(&self.axes).map(|(&j, a)| a.values[j]).collect()
    }

    pub fn cell(&self, coords: &[usize]) -> Option<&Vec<f64>> {
        let mut flat = 0usize;
        for (k, &c) in coords.iter().enumerate() {
            flat = flat * self.axes[k].values.len() + c;
        }
        self.cells[flat].as_ref()
    }

    /// Extracts one column along an axis with the other axis fixed.
    pub fn column_along(&self, axis: usize, fixed: usize, col: usize) -> Vec<Option<f64>> {
        let n = self.axes[axis].values.len();
        (0..n)
            .map(|i| {
                let coords = if self.axes.len() == 1 {
                    vec![i]
                } else if axis == 0 {
                    vec![i, fixed]
                } else {
                    vec![fixed, i]
                };
                self.cell(&coords).map(|v| v[col])
            })
            .collect()
    }
}

/// Runs `f` at every grid point (cartesian product of the axes), collecting
/// per-point scalar columns. Points are independent; with the `parallel`
/// feature they execute on the rayon pool. Output is index-ordered and
/// bit-identical across modes.
pub fn sweep<F>(
    axes: Vec<SweepAxisDef>,
    columns: Vec<String>,
    mode: ExecMode,
    f: F,
) -> SweepGrid
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let coords_of = |mut i: usize| -> Vec<f64> {
        let mut out = vec![0.0; axes.len()];
        for k in (0..axes.len()).rev() {
            let len = axes[k].values.len();
            out[k] = axes[k].values[i % len];
            i /= len;
        }
        out
    };
    let results = map_indexed(total, mode, |i| f(&coords_of(i)));
    let mut cells = Vec::with_capacity(total);
    let mut errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => cells.push(Some(v)),
            Err(e) => {
                errors.push((i, e.to_string()));
                cells.push(None);
            }
        }
    }
    SweepGrid { axes, columns, cells, errors }
}

/// A flat table of named columns, the common denominator of all results.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Tagged analysis output.
#[derive(Debug, Clone, Serialize)]
pub enum AnalysisResult {
    TimeSeries(Table),
    FrequencySweep(Table),
    Grid(SweepGrid),
    Harmonics(Table),
}

impl AnalysisResult {
    /// Long-format table view (sweep grids get axis columns first, missing
    /// cells become NaN rows).
    pub fn to_table(&self) -> Table {
        match self {
            AnalysisResult::TimeSeries(t)
            | AnalysisResult::FrequencySweep(t)
            | AnalysisResult::Harmonics(t) => t.clone(),
            AnalysisResult::Grid(g) => {
                let mut columns: Vec<String> = g.axes.iter().map(|a| a.name.clone()).collect();
                columns.extend(g.columns.iter().cloned());
                let ncols = g.columns.len();
                let mut rows = Vec::with_capacity(g.cells.len());
                for (i, cell) in g.cells.iter().enumerate() {
                    let mut row = g.coords(i);
                    match cell {
                        Some(v) => row.extend(v.iter().copied()),
                        None => row.extend(std::iter::repeat(f64::NAN).take(ncols)),
                    }
                    rows.push(row);
                }
                Table { columns, rows }
            }
        }
    }
}

/// Thévenin impedance of the linear network seen from a node at frequency f:
/// sources are zeroed (V sources short, I sources open), quantum devices
/// removed, and 1 A injected at the node.
pub fn thevenin_impedance(circuit: &Circuit, node: &str, f: f64) -> Result<Complex64> {
    let node_ref = circuit
        .node_by_name(node)
        .ok_or_else(|| Error::Config(format!("unknown node '{node}'")))?;
    let Some(node_idx) = node_ref else {
        return Ok(Complex64::new(0.0, 0.0)); // ground
    };
    let layout = SystemLayout::from_circuit(circuit);
    let dim = layout.bloch_start;
    let omega = TAU * f;
    let jw = Complex64::new(0.0, omega);
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    let mut rhs = DVector::<Complex64>::zeros(dim);
    let mut stamp = |row: Option<usize>, col: Option<usize>, val: Complex64| {
        if let (Some(r), Some(c)) = (row, col) {
            a[(r, c)] += val;
        }
    };
    for (ei, elem) in circuit.elements.iter().enumerate() {
        match &elem.kind {
            ElemKind::Resistor { a: na, b: nb, ohms } => {
                let g = Complex64::new(1.0 / ohms, 0.0);
                stamp(*na, *na, g);
                stamp(*na, *nb, -g);
                stamp(*nb, *na, -g);
                stamp(*nb, *nb, g);
            }
            ElemKind::Capacitor { a: na, b: nb, farads } => {
                let y = jw * *farads;
                stamp(*na, *na, y);
                stamp(*na, *nb, -y);
                stamp(*nb, *na, -y);
                stamp(*nb, *nb, y);
            }
            ElemKind::Inductor { a: na, b: nb, henries } => {
                let br = layout.branch(ei).unwrap();
                let one = Complex64::new(1.0, 0.0);
                stamp(*na, Some(br), one);
                stamp(*nb, Some(br), -one);
                stamp(Some(br), *na, one);
                stamp(Some(br), *nb, -one);
                stamp(Some(br), Some(br), -jw * *henries);
            }
            ElemKind::VSource { a: na, b: nb, .. } => {
                let br = layout.branch(ei).unwrap();
                let one = Complex64::new(1.0, 0.0);
                stamp(*na, Some(br), one);
                stamp(*nb, Some(br), -one);
                stamp(Some(br), *na, one);
                stamp(Some(br), *nb, -one);
            }
            ElemKind::ISource { .. } => {}
        }
    }
    rhs[node_idx] = Complex64::new(1.0, 0.0);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular network in impedance probe".into()))?;
    Ok(x[node_idx])
}

/// Convenience: drive waveform of a named source (for oracle extraction).
pub fn source_waveform(circuit: &Circuit, name: &str) -> Result<Waveform> {
    match circuit.element_by_name(name).map(|e| &e.kind) {
        Some(ElemKind::VSource { wave, .. }) | Some(ElemKind::ISource { wave, .. }) => {
            Ok(wave.clone())
        }
        _ => Err(Error::Config(format!("no source named '{name}'"))),
    }
}
