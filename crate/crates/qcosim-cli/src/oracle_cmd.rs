//! Oracle integration: engine-vs-Crank-Nicolson comparison and the
//! standalone drive-CSV integrator.

use crate::{Cli, CliError};
use clap::Args;
use qcosim_core::analyses::thevenin_impedance;
use qcosim_core::engine::{Engine, OutputQuantity, TranOpts};
use qcosim_core::interp::Sampled;
use qcosim_core::netlist::{elaborate, parse, ResolvedDirective, Waveform};
use qcosim_core::oracle::{cn_evolve, DriveWaveform};
use qcosim_core::quantum::{DqdParams, QuantumModel, SebParams};
use nalgebra::Vector3;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Source impedance above this bound means circuit feedback on the quantum
/// device is not negligible and the open-loop oracle comparison is invalid.
const STIFFNESS_OHMS: f64 = 100.0;
const PASS_THRESHOLD: f64 = 1e-4;

pub fn run_oracle_compare(
    cli: &Cli,
    input: &Path,
    overrides: &BTreeMap<String, f64>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::User(format!("cannot read '{}': {e}", input.display())))?;
    let ast = parse(&text).map_err(CliError::from)?;
    let circuit = elaborate(&ast, overrides).map_err(CliError::from)?;

    if circuit.qdevs.len() != 1 {
        return Err(CliError::User(format!(
            "oracle comparison needs exactly one quantum device, found {}",
            circuit.qdevs.len()
        )));
    }
    let Some((tstep, tstop)) = circuit.directives.iter().find_map(|d| match d {
        ResolvedDirective::Tran { tstep, tstop, .. } => Some((*tstep, *tstop)),
        _ => None,
    }) else {
        return Err(CliError::User("oracle comparison needs a .tran directive".into()));
    };

    // Stiffness guard: the drive must look like an ideal voltage source from
    // every quantum terminal.
    let drive_freq = circuit
        .elements
        .iter()
        .find_map(|e| match &e.kind {
            qcosim_core::netlist::ElemKind::VSource { wave: Waveform::Sin { freq, .. }, .. } => {
                Some(*freq)
            }
            _ => None,
        })
        .unwrap_or(1.0 / tstop);
    let qdev = &circuit.qdevs[0];
    for (l, term) in qdev.terminals.iter().enumerate() {
        let name = match term {
            Some(i) => circuit.node_names[*i].clone(),
            None => continue,
        };
        let z = thevenin_impedance(&circuit, &name, drive_freq).map_err(CliError::from)?;
        if z.norm() > STIFFNESS_OHMS {
            return Err(CliError::User(format!(
                "refusing oracle comparison: terminal {l} ('{name}') sees source impedance \
                 |Z| = {:.3e} Ω at {drive_freq:.3e} Hz (limit {STIFFNESS_OHMS} Ω); \
                 circuit feedback would not be negligible",
                z.norm()
            )));
        }
    }

    // Engine run.
    let engine = Engine::new(&circuit).map_err(CliError::from)?;
    let traj = engine.transient(&TranOpts::new(tstep, tstop)).map_err(CliError::from)?;

    // Extract ε(t) and resample uniformly for the oracle.
    let (evals, eders) = engine.output_series(&traj, &OutputQuantity::Detuning(0));
    let min_step = traj
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let n = ((tstop / (0.5 * min_step)).ceil() as usize).clamp(1000, 4_000_000);
    let dt = tstop / n as f64;
    let eps_series = Sampled { times: &traj.times, values: &evals, derivs: &eders };
    let eps: Vec<f64> = (0..=n).map(|k| eps_series.eval(k as f64 * dt)).collect();
    let drive = DriveWaveform::new(eps, dt).map_err(CliError::from)?;

    let model: &dyn QuantumModel = qdev.model();
    let b0 = engine.layout.bloch(0);
    let s0 = Vector3::new(traj.states[0][b0], traj.states[0][b0 + 1], traj.states[0][b0 + 2]);
    let oracle = cn_evolve(&s0, &drive, model).map_err(CliError::from)?;

    // Compare engine (Hermite-interpolated) with the oracle samples.
    let comps: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
        .map(|c| engine.output_series(&traj, &OutputQuantity::Bloch(0, c)))
        .collect();
    let sampled: Vec<Sampled> = comps
        .iter()
        .map(|(v, d)| Sampled { times: &traj.times, values: v, derivs: d })
        .collect();
    let mut max_dev = 0.0f64;
    let mut sum_dev = 0.0f64;
    for (k, s_oracle) in oracle.iter().enumerate() {
        let t = k as f64 * dt;
        let dev = (0..3)
            .map(|c| (sampled[c].eval(t) - s_oracle[c]).powi(2))
            .sum::<f64>()
            .sqrt();
        max_dev = max_dev.max(dev);
        sum_dev += dev;
    }
    let mean_dev = sum_dev / oracle.len() as f64;
    let pass = max_dev < PASS_THRESHOLD;

    let report = format!(
        "device: {}\nsamples: {}\nmax_bloch_deviation: {max_dev:.6e}\n\
         mean_bloch_deviation: {mean_dev:.6e}\nthreshold: {PASS_THRESHOLD:.1e}\nresult: {}\n",
        qdev.name,
        oracle.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    print!("{report}");
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::User(format!("cannot create '{}': {e}", cli.out.display())))?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("result");
    std::fs::write(cli.out.join(format!("{stem}.oracle_compare.txt")), &report)
        .map_err(|e| CliError::User(format!("cannot write report: {e}")))?;

    if pass {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "engine deviates from oracle by {max_dev:.3e} (threshold {PASS_THRESHOLD:.1e})"
        )))
    }
}

#[derive(Args, Debug)]
pub struct OracleCsvArgs {
    /// CSV with columns (t, eps) on a uniform time grid
    pub drive: PathBuf,

    /// Device model
    #[arg(long, value_parser = ["seb", "dqd"])]
    pub model: String,

    /// SEB: gate/reservoir lever arms, tunnel rate (Hz), temperature (K)
    #[arg(long, default_value = "0.9")]
    pub alphag: String,
    #[arg(long, default_value = "0.1")]
    pub alphar: String,
    #[arg(long, default_value = "0.5g")]
    pub gamma: String,
    #[arg(long, default_value = "0.1")]
    pub temp: String,

    /// DQD: tunnel coupling, relaxation and dephasing rates (Hz)
    #[arg(long, default_value = "5g")]
    pub tc: String,
    #[arg(long, default_value = "0.5g")]
    pub gcr: String,
    #[arg(long, default_value = "0")]
    pub gphi: String,

    /// Output CSV path (default: alongside the drive file)
    #[arg(long)]
    pub out_file: Option<PathBuf>,
}

fn num(field: &str, s: &str) -> Result<f64, CliError> {
    qcosim_core::netlist::parse_number(s)
        .ok_or_else(|| CliError::User(format!("--{field}: malformed number '{s}'")))
}

pub fn run_oracle_csv(args: &OracleCsvArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.drive)
        .map_err(|e| CliError::User(format!("cannot read '{}': {e}", args.drive.display())))?;
    let mut times = Vec::new();
    let mut eps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
            return Err(CliError::User(format!("line {}: expected 't,eps'", i + 1)));
        };
        if i == 0 && a.trim().parse::<f64>().is_err() {
            continue; // header row
        }
        let t: f64 = a
            .trim()
            .parse()
            .map_err(|_| CliError::User(format!("line {}: bad time '{a}'", i + 1)))?;
        let e: f64 = b
            .trim()
            .parse()
            .map_err(|_| CliError::User(format!("line {}: bad eps '{b}'", i + 1)))?;
        times.push(t);
        eps.push(e);
    }
    if times.len() < 2 {
        return Err(CliError::User("drive needs at least 2 samples".into()));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-30) {
            return Err(CliError::User("drive samples must be uniformly spaced".into()));
        }
    }

    let (seb, dqd);
    let model: &dyn QuantumModel = match args.model.as_str() {
        "seb" => {
            seb = SebParams::new(
                num("alphag", &args.alphag)?,
                num("alphar", &args.alphar)?,
                num("gamma", &args.gamma)?,
                num("temp", &args.temp)?,
            )
            .map_err(CliError::from)?;
            &seb
        }
        _ => {
            dqd = DqdParams::new(
                [[0.5, 0.0], [0.0, -0.5]],
                num("tc", &args.tc)?,
                num("gcr", &args.gcr)?,
                num("gphi", &args.gphi)?,
                num("temp", &args.temp)?,
            )
            .map_err(CliError::from)?;
            &dqd
        }
    };

    let s0 = model.fixed_point(qcosim_core::specfun::Energy(eps[0]));
    let drive = DriveWaveform::new(eps, dt).map_err(CliError::from)?;
    let traj = cn_evolve(&s0, &drive, model).map_err(CliError::from)?;

    let mut out = String::from("t,x,y,z\n");
    for (k, s) in traj.iter().enumerate() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            times[0] + k as f64 * dt,
            s[0],
            s[1],
            s[2]
        ));
    }
    let out_path = args
        .out_file
        .clone()
        .unwrap_or_else(|| args.drive.with_extension("bloch.csv"));
    std::fs::write(&out_path, out)
        .map_err(|e| CliError::User(format!("cannot write '{}': {e}", out_path.display())))?;
    println!("wrote {}", out_path.display());
    Ok(())
}
