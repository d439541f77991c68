//! Netlist execution: resolves directives into analyses, runs them (with
//! sweep axes fanned out in parallel), and writes result files plus a
//! manifest.

use crate::output::{self, TaggedTable};
use crate::{Cli, CliError, Format};
use qcosim_core::analyses::{harmonic_spectrum, network_ac, quantum_ac_gate, s11, AcSweep, Table};
use qcosim_core::engine::{resolve_print, Engine, TranOpts};
use qcosim_core::error::Error;
use qcosim_core::netlist::{
    elaborate, parse, Circuit, ElemKind, NetlistAst, PrintTarget, ResolvedDirective, SweepAxis,
    SweepTarget,
};
use qcosim_core::parallel::{map_indexed, ExecMode};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

const Z0: f64 = 50.0;

struct Plan {
    tran: Option<(f64, f64, f64)>,
    freqs: Option<Vec<f64>>,
    harm: Option<(f64, usize, usize)>,
    sweep_axes: Vec<SweepAxis>,
    prints: Vec<Vec<PrintTarget>>,
}

fn extract_plan(circuit: &Circuit) -> Result<Plan, Error> {
    let mut plan =
        Plan { tran: None, freqs: None, harm: None, sweep_axes: Vec::new(), prints: Vec::new() };
    for d in &circuit.directives {
        match d {
            ResolvedDirective::Tran { tstep, tstop, tstart } => {
                if plan.tran.is_some() {
                    return Err(Error::Config("multiple .tran directives".into()));
                }
                plan.tran = Some((*tstep, *tstop, *tstart));
            }
            ResolvedDirective::Acq { freqs } => {
                if plan.freqs.is_some() {
                    return Err(Error::Config("multiple .acq directives".into()));
                }
                plan.freqs = Some(freqs.clone());
            }
            ResolvedDirective::Harm { f0, nharm, ncycles } => {
                plan.harm = Some((*f0, *nharm, *ncycles));
            }
            ResolvedDirective::Sweep { axes } => {
                if !plan.sweep_axes.is_empty() {
                    return Err(Error::Config("multiple .sweep directives".into()));
                }
                plan.sweep_axes = axes.clone();
            }
            ResolvedDirective::Print { targets } => plan.prints.push(targets.clone()),
        }
    }
    if plan.tran.is_some() && plan.freqs.is_some() {
        return Err(Error::Config(".tran and .acq cannot be combined in one netlist".into()));
    }
    if plan.harm.is_some() && plan.tran.is_none() {
        return Err(Error::Config(".harm requires a .tran directive".into()));
    }
    Ok(plan)
}

/// Column label for a target inside a group: bare field names when the group
/// has a single target, subject-prefixed otherwise.
fn col_label(targets: &[PrintTarget], t: &PrintTarget, part: Option<&str>) -> String {
    let field = t.field.to_ascii_lowercase();
    let base = match part {
        Some(p) => format!("{p}_{field}"),
        None => field,
    };
    if targets.len() == 1 {
        base
    } else {
        format!("{}_{base}", t.subject.to_ascii_lowercase())
    }
}

fn run_transient_group(
    engine: &Engine,
    circuit: &Circuit,
    traj: &qcosim_core::engine::Trajectory,
    targets: &[PrintTarget],
    tstep: f64,
    tstart: f64,
    harm: Option<(f64, usize, usize)>,
) -> Result<Vec<(String, Table)>, Error> {
    let mut columns = vec!["t".to_string()];
    let mut series: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for t in targets {
        let q = resolve_print(circuit, t)?;
        columns.push(col_label(targets, t, None));
        series.push(engine.output_series(traj, &q));
    }
    // Report on the uniform tstep grid (Hermite-resampled), as SPICE does;
    // the integrator's own grid is adaptive.
    let tstop = *traj.times.last().unwrap();
    let sampled: Vec<qcosim_core::interp::Sampled> = series
        .iter()
        .map(|(v, d)| qcosim_core::interp::Sampled { times: &traj.times, values: v, derivs: d })
        .collect();
    let npts = ((tstop - tstart) / tstep).round() as usize;
    let mut rows = Vec::new();
    for k in 0..=npts {
        let t = (tstart + k as f64 * tstep).min(tstop);
        let mut row = vec![t];
        for s in &sampled {
            row.push(s.eval(t));
        }
        rows.push(row);
    }
    let mut out = vec![("tran".to_string(), Table { columns, rows })];

    if let Some((f0, nharm, ncycles)) = harm {
        let mut columns = vec!["k".to_string(), "f".to_string()];
        for t in targets {
            columns.push(col_label(targets, t, Some("re")));
            columns.push(col_label(targets, t, Some("im")));
            columns.push(col_label(targets, t, Some("mag")));
        }
        let mut spectra = Vec::new();
        for (vals, ders) in &series {
            spectra.push(harmonic_spectrum(&traj.times, vals, ders, f0, nharm, ncycles)?);
        }
        let mut rows = Vec::new();
        for k in 0..=nharm {
            let mut row = vec![k as f64, k as f64 * f0];
            for h in &spectra {
                let c = h.amp(k);
                row.push(c.re);
                row.push(c.im);
                row.push(c.norm());
            }
            rows.push(row);
        }
        out.push(("harm".to_string(), Table { columns, rows }));
    }
    Ok(out)
}

fn ac_target_columns(
    circuit: &Circuit,
    sweep: &AcSweep,
    targets: &[PrintTarget],
    t: &PrintTarget,
) -> Result<(Vec<String>, Vec<Vec<f64>>), Error> {
    let nf = sweep.freqs.len();
    let mut cols = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    match t.field.as_str() {
        "v" => {
            cols.push(col_label(targets, t, Some("re")));
            cols.push(col_label(targets, t, Some("im")));
            let mut re = Vec::with_capacity(nf);
            let mut im = Vec::with_capacity(nf);
            for fi in 0..nf {
                let p = sweep.node_phasor(circuit, &t.subject, fi)?;
                re.push(p.re);
                im.push(p.im);
            }
            data.push(re);
            data.push(im);
        }
        "s11" => {
            let refl = s11(circuit, sweep, &t.subject, Z0)?;
            cols.push(col_label(targets, t, Some("re")));
            cols.push(col_label(targets, t, Some("im")));
            cols.push(col_label(targets, t, Some("mag")));
            data.push(refl.iter().map(|c| c.re).collect());
            data.push(refl.iter().map(|c| c.im).collect());
            data.push(refl.iter().map(|c| c.norm()).collect());
        }
        "y" => {
            let (d, inst) = circuit
                .qdev_by_name(&t.subject)
                .ok_or_else(|| Error::Config(format!("unknown device '{}'", t.subject)))?;
            let engine = Engine::new(circuit)?;
            let dc = engine.dc_operating_point()?;
            let model = inst.model();
            let eps0 = {
                let vs: Vec<f64> = inst
                    .terminals
                    .iter()
                    .map(|n| n.map(|i| dc.u[i]).unwrap_or(0.0))
                    .collect();
                model.detuning(&vs)
            };
            let _ = d;
            cols.push(col_label(targets, t, Some("re")));
            cols.push(col_label(targets, t, Some("im")));
            let mut re = Vec::with_capacity(nf);
            let mut im = Vec::with_capacity(nf);
            for &f in &sweep.freqs {
                let y = quantum_ac_gate(model, eps0, f)?;
                re.push(y.re);
                im.push(y.im);
            }
            data.push(re);
            data.push(im);
        }
        "i" => {
            let (ei, elem) = circuit
                .elements
                .iter()
                .enumerate()
                .find(|(_, e)| e.name.eq_ignore_ascii_case(&t.subject))
                .ok_or_else(|| Error::Config(format!("unknown element '{}'", t.subject)))?;
            cols.push(col_label(targets, t, Some("re")));
            cols.push(col_label(targets, t, Some("im")));
            let mut re = Vec::with_capacity(nf);
            let mut im = Vec::with_capacity(nf);
            for fi in 0..nf {
                let x = &sweep.solutions[fi];
                let phasor = match &elem.kind {
                    ElemKind::VSource { .. } | ElemKind::Inductor { .. } => {
                        x[sweep.layout.branch(ei).unwrap()]
                    }
                    ElemKind::Resistor { a, b, ohms } => {
                        let va = a.map(|i| x[i]).unwrap_or_default();
                        let vb = b.map(|i| x[i]).unwrap_or_default();
                        (va - vb) / *ohms
                    }
                    ElemKind::Capacitor { a, b, farads } => {
                        let va = a.map(|i| x[i]).unwrap_or_default();
                        let vb = b.map(|i| x[i]).unwrap_or_default();
                        (va - vb)
                            * num_complex::Complex64::new(
                                0.0,
                                std::f64::consts::TAU * sweep.freqs[fi] * farads,
                            )
                    }
                    ElemKind::ISource { .. } => {
                        return Err(Error::Config(format!(
                            "current print on current source '{}'",
                            t.subject
                        )))
                    }
                };
                re.push(phasor.re);
                im.push(phasor.im);
            }
            data.push(re);
            data.push(im);
        }
        other => {
            return Err(Error::Config(format!(
                "print field '.{other}' is not available under .acq"
            )))
        }
    }
    Ok((cols, data))
}

/// The AC drive source: the port of an s11 target when present, else the
/// first voltage source.
fn choose_drive(circuit: &Circuit, prints: &[Vec<PrintTarget>]) -> Result<String, Error> {
    for group in prints {
        for t in group {
            if t.field == "s11" {
                return Ok(t.subject.clone());
            }
        }
    }
    circuit
        .elements
        .iter()
        .find(|e| matches!(e.kind, ElemKind::VSource { .. }))
        .map(|e| e.name.clone())
        .ok_or_else(|| Error::Config("no voltage source to drive the AC analysis".into()))
}

fn run_ac_groups(circuit: &Circuit, plan: &Plan) -> Result<Vec<(String, Table)>, Error> {
    let freqs = plan.freqs.as_ref().unwrap();
    let drive = choose_drive(circuit, &plan.prints)?;
    let sweep = network_ac(circuit, freqs, &drive)?;
    let mut out = Vec::new();
    for targets in &plan.prints {
        let mut columns = vec!["f".to_string()];
        let mut blocks: Vec<Vec<f64>> = Vec::new();
        for t in targets {
            let (cols, data) = ac_target_columns(circuit, &sweep, targets, t)?;
            columns.extend(cols);
            blocks.extend(data);
        }
        let rows = (0..freqs.len())
            .map(|fi| {
                let mut row = vec![freqs[fi]];
                row.extend(blocks.iter().map(|b| b[fi]));
                row
            })
            .collect();
        out.push(("ac".to_string(), Table { columns, rows }));
    }
    Ok(out)
}

/// Runs all analyses of an elaborated circuit (no sweep handling here).
fn run_point(circuit: &Circuit) -> Result<Vec<(usize, String, Table)>, Error> {
    let plan = extract_plan(circuit)?;
    let mut out = Vec::new();
    if plan.freqs.is_some() {
        for (j, t) in run_ac_groups(circuit, &plan)?.into_iter().enumerate() {
            out.push((j, t.0, t.1));
        }
    } else if let Some((tstep, tstop, tstart)) = plan.tran {
        let engine = Engine::new(circuit)?;
        let traj = engine.transient(&TranOpts::new(tstep, tstop))?;
        for (j, targets) in plan.prints.iter().enumerate() {
            for (kind, table) in
                run_transient_group(&engine, circuit, &traj, targets, tstep, tstart, plan.harm)?
            {
                out.push((j, kind, table));
            }
        }
    }
    Ok(out)
}

/// Applies one sweep point: param targets re-elaborate, source targets patch
/// the circuit.
fn elaborate_point(
    ast: &NetlistAst,
    base_overrides: &BTreeMap<String, f64>,
    axes: &[SweepAxis],
    coords: &[f64],
) -> Result<Circuit, Error> {
    let mut overrides = base_overrides.clone();
    for (axis, &val) in axes.iter().zip(coords) {
        if let SweepTarget::Param(name) = &axis.target {
            overrides.insert(name.clone(), val);
        }
    }
    let mut circuit = elaborate(ast, &overrides)?;
    for (axis, &val) in axes.iter().zip(coords) {
        if let SweepTarget::Source(name) = &axis.target {
            circuit.set_source_level(name, val)?;
        }
    }
    Ok(circuit)
}

fn axis_name(axis: &SweepAxis) -> String {
    match &axis.target {
        SweepTarget::Param(n) | SweepTarget::Source(n) => n.clone(),
    }
}

/// Full netlist execution, returning tagged result tables.
pub fn execute(
    ast: &NetlistAst,
    overrides: &BTreeMap<String, f64>,
) -> Result<Vec<TaggedTable>, Error> {
    let base = elaborate(ast, overrides)?;
    let plan = extract_plan(&base)?;

    if plan.sweep_axes.is_empty() {
        let results = run_point(&base)?;
        return Ok(results
            .into_iter()
            .map(|(j, kind, table)| TaggedTable {
                tag: format!("print{}.{kind}", j + 1),
                table,
            })
            .collect());
    }

    // Sweep: run every grid point independently, then concatenate rows with
    // axis columns prepended. Per-point failures become NaN markers rather
    // than aborting the sweep.
    let axes = plan.sweep_axes.clone();
    let counts: Vec<usize> = axes.iter().map(|a| a.values.len()).collect();
    let total: usize = counts.iter().product();
    let coords_of = |mut i: usize| -> Vec<f64> {
        let mut out = vec![0.0; axes.len()];
        for k in (0..axes.len()).rev() {
            out[k] = axes[k].values[i % counts[k]];
            i /= counts[k];
        }
        out
    };

    let point_results = map_indexed(total, ExecMode::Parallel, |i| {
        let coords = coords_of(i);
        elaborate_point(ast, overrides, &axes, &coords).and_then(|c| run_point(&c))
    });

    // Group tables by (print group, kind) across points.
    let mut merged: Vec<(String, Table)> = Vec::new();
    let axis_names: Vec<String> = axes.iter().map(axis_name).collect();
    for (i, res) in point_results.into_iter().enumerate() {
        let coords = coords_of(i);
        match res {
            Ok(tables) => {
                for (j, kind, table) in tables {
                    let tag = format!("print{}.{kind}", j + 1);
                    let slot = match merged.iter_mut().find(|(t, _)| *t == tag) {
                        Some((_, t)) => t,
                        None => {
                            let mut columns = axis_names.clone();
                            columns.extend(table.columns.iter().cloned());
                            merged.push((tag.clone(), Table { columns, rows: Vec::new() }));
                            &mut merged.last_mut().unwrap().1
                        }
                    };
                    for row in table.rows {
                        let mut r = coords.clone();
                        r.extend(row);
                        slot.rows.push(r);
                    }
                }
            }
            Err(e) => {
                // Mark the failed point with a NaN row in every known table.
                eprintln!("qcosim: sweep point {coords:?} failed: {e}");
                for (_, t) in merged.iter_mut() {
                    let mut r = coords.clone();
                    r.extend(std::iter::repeat(f64::NAN).take(t.columns.len() - coords.len()));
                    t.rows.push(r);
                }
            }
        }
    }
    Ok(merged.into_iter().map(|(tag, table)| TaggedTable { tag, table }).collect())
}

pub fn run_netlist(
    cli: &Cli,
    input: &Path,
    overrides: &BTreeMap<String, f64>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::User(format!("cannot read '{}': {e}", input.display())))?;
    let ast = parse(&text).map_err(CliError::from)?;

    let tables = execute(&ast, overrides).map_err(CliError::from)?;
    if cli.seedless {
        let again = execute(&ast, overrides).map_err(CliError::from)?;
        let a = output::render_all(&tables, cli.format);
        let b = output::render_all(&again, cli.format);
        if a != b {
            return Err(CliError::Numeric(
                "determinism check failed: repeated run produced different bytes".into(),
            ));
        }
        if cli.verbose > 0 {
            eprintln!("qcosim: determinism check passed");
        }
    }

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::User(format!("cannot create '{}': {e}", cli.out.display())))?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("result").to_string();

    let mut outputs = Vec::new();
    for t in &tables {
        let ext = match cli.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let name = format!("{stem}.{}.{ext}", t.tag);
        let path = cli.out.join(&name);
        let body = output::render_table(t, cli.format);
        std::fs::write(&path, body)
            .map_err(|e| CliError::User(format!("cannot write '{}': {e}", path.display())))?;
        outputs.push(name.clone());
        if cli.plot {
            let svg_name = format!("{stem}.{}.svg", t.tag);
            let svg = crate::plot::render_auto(&t.table);
            std::fs::write(cli.out.join(&svg_name), svg)
                .map_err(|e| CliError::User(format!("cannot write plot: {e}")))?;
            outputs.push(svg_name);
        }
    }

    let manifest = output::manifest(input, &text, overrides, &outputs, started.elapsed());
    let manifest_path = cli.out.join(format!("{stem}.manifest.json"));
    std::fs::write(&manifest_path, manifest)
        .map_err(|e| CliError::User(format!("cannot write manifest: {e}")))?;

    if cli.verbose > 0 {
        eprintln!(
            "qcosim: wrote {} result file(s) to {} in {:.1?}",
            outputs.len(),
            cli.out.display(),
            started.elapsed()
        );
    }
    Ok(())
}

/// Small-signal gate admittance sweep used by tests and examples: Y(f) of a
/// named device at its current operating point.
#[allow(dead_code)]
pub fn device_admittance(
    circuit: &Circuit,
    device: &str,
    freqs: &[f64],
) -> Result<Vec<num_complex::Complex64>, Error> {
    let (_, inst) = circuit
        .qdev_by_name(device)
        .ok_or_else(|| Error::Config(format!("unknown device '{device}'")))?;
    let engine = Engine::new(circuit)?;
    let dc = engine.dc_operating_point()?;
    let vs: Vec<f64> =
        inst.terminals.iter().map(|n| n.map(|i| dc.u[i]).unwrap_or(0.0)).collect();
    let eps0 = inst.model().detuning(&vs);
    freqs.iter().map(|&f| quantum_ac_gate(inst.model(), eps0, f)).collect()
}
