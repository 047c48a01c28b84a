//! Command-line surface: gate demos, anticoherence/symmetry audits,
//! constellation export, and topological-invariance sweeps.
//!
//! Exit codes: 0 success/PASS, 1 computed FAIL, 2 usage or parse error,
//! 3 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use spin_holonomy::grassmann::{anticoherence, is_symmetry_rotation, plane_from_kets, KPlane};
use spin_holonomy::report::{
    complex_json, constellation_json, matrix_json, multiconstellation_json, RunReport,
};
use spin_holonomy::stellar::{
    majorana_constellation, multiconstellation, symmetry_candidates, SymmetryCandidates,
};
use spin_holonomy::{catalog, compare_gate, extract_gate, invariance_sweep, GateMode};
use spin_holonomy::{Ket, SpinQuantum};

#[derive(Parser)]
#[command(name = "spin-holonomy", about = "Holonomies of rotated spin subspaces", version)]
struct Cli {
    /// Base seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a reference gate computation and compare with its expected matrix.
    Demo {
        /// Gate name: not | cnot1 | cnot2.
        name: String,
        /// Curve sample count.
        #[arg(long, default_value_t = 2001)]
        steps: usize,
        /// Tolerance on the holonomy deviation.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write the report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check anticoherence and rotational symmetries of a plane file.
    Audit {
        plane_file: PathBuf,
        /// Largest anticoherence order to test.
        #[arg(long, default_value_t = 3)]
        tmax: u32,
        /// Residual tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the Majorana (multi)constellation of a state or plane file.
    Constellation {
        input: PathBuf,
        /// Write the star file here (the report always embeds it too).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb a reference gate curve and tabulate holonomy deviations.
    Invariance {
        /// Gate name: not | cnot1 | cnot2.
        name: String,
        /// Number of random perturbation seeds.
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        /// Perturbation amplitude bound.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Number of sine modes in the perturbation.
        #[arg(long, default_value_t = 5)]
        modes: usize,
        #[arg(long, default_value_t = 4001)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Compute(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Compute(m) => m,
        }
    }
}

impl From<spin_holonomy::Error> for CliError {
    fn from(e: spin_holonomy::Error) -> Self {
        match e {
            spin_holonomy::Error::Domain(_) | spin_holonomy::Error::DegenerateInput(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Compute(e.to_string()),
        }
    }
}

/// On-disk plane: {"twice_s": int, "kets": [[[re,im],...],...], "name"?}.
#[derive(Deserialize)]
struct PlaneFile {
    twice_s: u32,
    kets: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    name: Option<String>,
}

/// On-disk state: {"twice_s": int, "ket": [[re,im],...], "name"?}.
#[derive(Deserialize)]
struct StateFile {
    twice_s: u32,
    ket: Vec<[f64; 2]>,
    #[serde(default)]
    name: Option<String>,
}

fn to_ket(raw: &[[f64; 2]]) -> Ket {
    Ket::from_iterator(raw.len(), raw.iter().map(|&[re, im]| Complex64::new(re, im)))
}

fn read_json(path: &PathBuf) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed JSON in {}: {e}", path.display())))
}

fn plane_from_file(value: &serde_json::Value) -> Result<(KPlane, Option<String>), CliError> {
    let pf: PlaneFile = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Usage(format!("not a plane file: {e}")))?;
    let s = SpinQuantum::from_twice(pf.twice_s);
    let n = s.dimension();
    for (i, k) in pf.kets.iter().enumerate() {
        if k.len() != n {
            return Err(CliError::Data(format!(
                "ket {i} has length {}, expected {n} for twice_s = {}",
                k.len(),
                pf.twice_s
            )));
        }
    }
    let kets: Vec<Ket> = pf.kets.iter().map(|k| to_ket(k)).collect();
    let plane = plane_from_kets(s, &kets)?;
    Ok((plane, pf.name))
}

/// Validated symmetry rotations of the plane, discovered from the principal
/// constellation of its multiconstellation.
fn symmetry_list(plane: &KPlane) -> Result<serde_json::Value, CliError> {
    let mc = multiconstellation(plane)?;
    let principal = mc
        .multiplets
        .iter()
        .filter(|m| m.weight.norm() > 1e-9)
        .find_map(|m| m.constellation.as_ref());
    let Some(c) = principal else {
        return Ok(json!({"rotations": []}));
    };
    match symmetry_candidates(c, 1e-6)? {
        SymmetryCandidates::ContinuousAxis(axis) => {
            Ok(json!({"continuous_axis": [axis.x, axis.y, axis.z], "rotations": []}))
        }
        SymmetryCandidates::Discrete(rots) => {
            let validated: Vec<serde_json::Value> = rots
                .iter()
                .filter(|r| is_symmetry_rotation(plane, r, 1e-8).0)
                .map(|r| {
                    let v = r.axis_angle();
                    json!({"axis_angle": [v.x, v.y, v.z], "angle": r.angle()})
                })
                .collect();
            Ok(json!({"rotations": validated}))
        }
    }
}

fn cmd_demo(name: &str, steps: usize, tol: f64) -> Result<RunReport, CliError> {
    let cat = catalog();
    let entry = cat
        .gate(name)
        .ok_or_else(|| CliError::Usage(format!("unknown demo '{name}' (expected not | cnot1 | cnot2)")))?;
    let mut report = RunReport::new(format!("demo {name}"));
    report.inputs = json!({"name": name, "steps": steps, "tol": tol});

    let hol = extract_gate(&entry.plane, &entry.curve(steps))?;
    let (_, dev) = compare_gate(&hol.u, &entry.expected, GateMode::Exact, tol);
    let anti = anticoherence(&entry.plane, 1, 1e-9)?;
    let (_, sym_dev) = is_symmetry_rotation(&entry.plane, &entry.endpoint(), 1e-8);

    report.outputs = json!({
        "holonomy": matrix_json(&hol.u),
        "expected": matrix_json(&entry.expected),
        "expected_provenance": entry.provenance,
        "anticoherence_residuals": anti.residuals,
    });
    report.diagnostics = json!({
        "max_connection_norm": hol.diagnostics.max_connection_norm,
        "max_hermitian_defect": hol.diagnostics.max_hermitian_defect,
        "min_overlap_sv": hol.diagnostics.min_overlap_sv,
        "discretization_estimate": hol.diagnostics.discretization_estimate,
        "steps": hol.diagnostics.steps,
    });
    report.check("holonomy deviation", dev, tol);
    report.check("anticoherence residual", anti.residuals[0], 1e-9);
    report.check("endpoint symmetry angle", sym_dev, 1e-8);
    Ok(report)
}

fn cmd_audit(path: &PathBuf, tmax: u32, tol: f64) -> Result<RunReport, CliError> {
    let value = read_json(path)?;
    let (plane, name) = plane_from_file(&value)?;
    let mut report = RunReport::new("audit");
    report.inputs = json!({
        "file": path.display().to_string(),
        "name": name,
        "twice_s": plane.s.twice(),
        "k": plane.k(),
        "tmax": tmax,
        "tol": tol,
    });
    let tmax = tmax.min(plane.s.twice());
    let anti = anticoherence(&plane, tmax, tol)?;
    let mc = multiconstellation(&plane)?;
    let weights: Vec<serde_json::Value> = mc
        .multiplets
        .iter()
        .map(|m| json!({"j": m.j.value(), "weight": complex_json(m.weight)}))
        .collect();
    report.outputs = json!({
        "anticoherence_order": anti.order,
        "residuals": anti.residuals,
        "multiplet_weights": weights,
        "symmetries": symmetry_list(&plane)?,
    });
    Ok(report)
}

fn cmd_constellation(path: &PathBuf, out: Option<&PathBuf>) -> Result<RunReport, CliError> {
    let value = read_json(path)?;
    let mut report = RunReport::new("constellation");
    let stars = if value.get("kets").is_some() {
        let (plane, name) = plane_from_file(&value)?;
        report.inputs = json!({
            "file": path.display().to_string(),
            "name": name,
            "kind": "plane",
            "twice_s": plane.s.twice(),
            "k": plane.k(),
        });
        multiconstellation_json(&multiconstellation(&plane)?)
    } else {
        let sf: StateFile = serde_json::from_value(value)
            .map_err(|e| CliError::Usage(format!("not a state or plane file: {e}")))?;
        let s = SpinQuantum::from_twice(sf.twice_s);
        let psi = to_ket(&sf.ket);
        if psi.len() != s.dimension() {
            return Err(CliError::Data(format!(
                "ket has length {}, expected {} for twice_s = {}",
                psi.len(),
                s.dimension(),
                sf.twice_s
            )));
        }
        report.inputs = json!({
            "file": path.display().to_string(),
            "name": sf.name,
            "kind": "state",
            "twice_s": sf.twice_s,
        });
        let c = majorana_constellation(&psi)?;
        json!({
            "multiplets": [{"j": s.value(), "weight": [1.0, 0.0], "stars": constellation_json(&c)}],
            "spectator": [],
        })
    };
    if let Some(out) = out {
        let mut text = serde_json::to_string_pretty(&stars).expect("stars serialize");
        text.push('\n');
        std::fs::write(out, text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", out.display())))?;
    }
    report.outputs = json!({"stars": stars, "written": out.map(|p| p.display().to_string())});
    Ok(report)
}

fn cmd_invariance(
    name: &str,
    seeds: u64,
    amplitude: f64,
    modes: usize,
    steps: usize,
    base_seed: u64,
) -> Result<RunReport, CliError> {
    let cat = catalog();
    let entry = cat
        .gate(name)
        .ok_or_else(|| CliError::Usage(format!("unknown curve '{name}' (expected not | cnot1 | cnot2)")))?;
    let mut report = RunReport::new(format!("invariance {name}"));
    report.inputs = json!({
        "name": name,
        "seeds": seeds,
        "amplitude": amplitude,
        "modes": modes,
        "steps": steps,
        "seed": base_seed,
    });
    let seed_list: Vec<u64> = (0..seeds).map(|i| base_seed + i).collect();
    let recs = invariance_sweep(entry, &seed_list, &[amplitude], modes, steps)?;
    let mut rows = Vec::with_capacity(recs.len());
    let mut worst: f64 = 0.0;
    for r in &recs {
        worst = worst.max(r.deviation);
        rows.push(json!({"seed": r.seed, "amplitude": r.amplitude, "deviation": r.deviation}));
    }
    report.outputs = json!({"table": rows, "worst_deviation": worst});
    report.check("max holonomy deviation", worst, 1e-7);
    Ok(report)
}

fn run(cli: Cli) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::Demo { name, steps, tol, .. } => cmd_demo(name, *steps, *tol),
        Command::Audit { plane_file, tmax, tol, .. } => cmd_audit(plane_file, *tmax, *tol),
        Command::Constellation { input, out } => cmd_constellation(input, out.as_ref()),
        Command::Invariance { name, seeds, amplitude, modes, steps, .. } => {
            cmd_invariance(name, *seeds, *amplitude, *modes, *steps, cli.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with 2 on usage errors
    let out = match &cli.command {
        Command::Demo { out, .. } | Command::Audit { out, .. } | Command::Invariance { out, .. } => {
            out.clone()
        }
        Command::Constellation { .. } => None,
    };
    match run(cli) {
        Ok(report) => {
            let text = report.to_json();
            print!("{text}");
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
