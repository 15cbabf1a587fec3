//! `ssmkit`: workspace, kinematics, identification and actuator sizing for
//! a 4-DoF serial spherical mechanism.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 infeasible
//! result (unreachable target).

mod config;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{kind_key, MechanismConfig, TransmissionConfig};
use ssmkit_core::dynamics::{inverse_dynamics, nrmsd, payload_curve};
use ssmkit_core::format::{format_sig, read_trace_csv, write_trace_csv, DEFAULT_DIGITS};
use ssmkit_core::identification::{
    detect_breakaways, extract_steady_segments, fit_friction, FitOptions, SegmentOptions,
    NOMINAL_RATE_HZ,
};
use ssmkit_core::kinematics::{forward_kinematics, inverse_kinematics};
use ssmkit_core::synth::{sweep_log, SweepConfig};
use ssmkit_core::workspace::{
    sample_workspace, sampled_polar_band, tilt_extremes, write_samples_csv,
};
use ssmkit_core::{
    Error as CoreError, FitReport, JointState, JointTrajectory, Pose, Rot3, TelemetryLog,
    TorqueTrace, Vec3,
};

const OUTPUT_DIR_ENV: &str = "SSMKIT_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "ssmkit",
    version,
    about = "Serial spherical mechanism design toolkit"
)]
struct Cli {
    /// Root for relative output paths (default: $SSMKIT_OUTPUT_DIR, then the
    /// project's output_dir, then the current directory).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Significant digits of emitted floats.
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tilt range of the tool axis for axis angles α and β (degrees).
    #[command(allow_negative_numbers = true)]
    Workspace {
        alpha_deg: f64,
        beta_deg: f64,
        /// Sample an n × n (θ1, θ2) grid.
        #[arg(long)]
        samples: Option<usize>,
        /// Write the sampled points to this CSV (needs --samples).
        #[arg(long, requires = "samples")]
        csv: Option<PathBuf>,
    },
    /// Forward kinematics. θ1..θ3 in degrees, θ4 in meters.
    Fk {
        #[command(flatten)]
        mechanism: MechanismArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Vec<f64>,
    },
    /// Inverse kinematics: every branch reaching the target pose.
    Ik {
        #[command(flatten)]
        mechanism: MechanismArgs,
        /// Tool position x,y,z in meters.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        position: Vec<f64>,
        /// Tool orientation, 9 numbers row-major (default identity).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rotation: Option<Vec<f64>>,
    },
    /// Fit friction parameters to a telemetry log.
    Identify {
        telemetry: PathBuf,
        #[command(flatten)]
        transmission: TransmissionArgs,
        /// Constant joint-side load held during the sweep.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        test_load: f64,
        /// μc to use when the log cannot identify it.
        #[arg(long)]
        mu_c_prior: Option<f64>,
        /// Plateau velocity band, motor rad/s.
        #[arg(long, default_value_t = 1.0)]
        velocity_tolerance: f64,
        /// Minimum plateau duration, s.
        #[arg(long, default_value_t = 0.5)]
        min_duration: f64,
        /// Report path (default joint<id>_fit.toml under the output root).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Motor torque for a `time_s,velocity` trajectory.
    Simulate {
        trajectory: PathBuf,
        #[command(flatten)]
        transmission: TransmissionArgs,
        /// Measured `time_s,torque` trace to score against (NRMSD).
        #[arg(long)]
        measured: Option<PathBuf>,
        /// Constant joint-side load.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        load: f64,
        /// Torque CSV path (default stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Steady-state torque-velocity demand for plotting against motor curves.
    Payload {
        #[command(flatten)]
        transmission: TransmissionArgs,
        #[arg(long, allow_negative_numbers = true)]
        load: f64,
        /// Highest motor velocity, rad/s.
        #[arg(long)]
        vmax: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// CSV path (default stdout, or payload_joint<id>.csv per project joint).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic identification log.
    SynthLog {
        #[command(flatten)]
        transmission: TransmissionArgs,
        /// Plateau velocities, motor rad/s.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        load: f64,
        /// Relative torque noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct MechanismArgs {
    /// Mechanism file (alpha_deg, beta_deg, r0). Defaults to α = 30°, β = 110°.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Project file whose mechanism is used.
    #[arg(long, conflicts_with = "config")]
    project: Option<PathBuf>,
}

#[derive(Args)]
struct TransmissionArgs {
    /// Transmission/friction file.
    #[arg(long, conflicts_with = "project")]
    transmission: Option<PathBuf>,
    /// Project file listing per-joint transmissions.
    #[arg(long)]
    project: Option<PathBuf>,
    /// Joint id, 1..=4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    joint: Option<u8>,
}

struct Output {
    output_root: Option<PathBuf>,
    digits: usize,
}

impl Output {
    fn new(cli: &Cli, project: Option<&config::Project>) -> Self {
        let output_root = cli
            .output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| project.and_then(|p| p.output_dir.clone()));
        let digits = cli
            .precision
            .or_else(|| project.and_then(|p| p.precision))
            .unwrap_or(DEFAULT_DIGITS);
        Self {
            output_root,
            digits,
        }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.output_root {
            Some(root) if path.is_relative() => root.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn create(&self, path: &Path) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.resolve(path);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok((path, BufWriter::new(file)))
    }

    fn f(&self, x: f64) -> String {
        format_sig(x, self.digits)
    }

    fn list(&self, xs: impl IntoIterator<Item = f64>) -> String {
        xs.into_iter()
            .map(|x| self.f(x))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let infeasible = err
                .chain()
                .filter_map(|e| e.downcast_ref::<CoreError>())
                .any(CoreError::is_infeasible);
            ExitCode::from(if infeasible { 3 } else { 2 })
        }
    }
}

fn load_project(path: Option<&PathBuf>) -> Result<Option<config::Project>> {
    path.map(|p| config::load_project(p)).transpose()
}

fn mechanism(args: &MechanismArgs) -> Result<MechanismConfig> {
    if let Some(path) = &args.config {
        return config::load_mechanism(path);
    }
    if let Some(project) = load_project(args.project.as_ref())? {
        return project.mechanism.context("project has no mechanism file");
    }
    Ok(MechanismConfig::prototype())
}

/// Transmission from `--transmission`, or from the project for `--joint`.
fn transmission(
    args: &TransmissionArgs,
    project: Option<&config::Project>,
) -> Result<TransmissionConfig> {
    if let Some(path) = &args.transmission {
        return config::load_transmission(path);
    }
    match (project, args.joint) {
        (Some(p), Some(id)) => Ok(p.joint(id)?.clone()),
        (Some(_), None) => bail!("--joint is required with --project"),
        (None, _) => bail!("one of --transmission or --project is required"),
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Workspace {
            alpha_deg,
            beta_deg,
            samples,
            csv,
        } => cmd_workspace(cli, *alpha_deg, *beta_deg, *samples, csv.as_deref()),
        Command::Fk {
            mechanism: m,
            theta,
        } => cmd_fk(cli, m, theta),
        Command::Ik {
            mechanism: m,
            position,
            rotation,
        } => cmd_ik(cli, m, position, rotation.as_deref()),
        Command::Identify {
            telemetry,
            transmission: t,
            test_load,
            mu_c_prior,
            velocity_tolerance,
            min_duration,
            output,
        } => {
            let opts = SegmentOptions {
                velocity_tolerance: *velocity_tolerance,
                min_duration_s: *min_duration,
                ..Default::default()
            };
            cmd_identify(
                cli,
                telemetry,
                t,
                *test_load,
                *mu_c_prior,
                &opts,
                output.as_deref(),
            )
        }
        Command::Simulate {
            trajectory,
            transmission: t,
            measured,
            load,
            output,
        } => cmd_simulate(
            cli,
            trajectory,
            t,
            measured.as_deref(),
            *load,
            output.as_deref(),
        ),
        Command::Payload {
            transmission: t,
            load,
            vmax,
            points,
            output,
        } => cmd_payload(cli, t, *load, *vmax, *points, output.as_deref()),
        Command::SynthLog {
            transmission: t,
            levels,
            load,
            noise,
            seed,
            output,
        } => cmd_synth_log(cli, t, levels.as_deref(), *load, *noise, *seed, output),
    }
}

fn cmd_workspace(
    cli: &Cli,
    alpha_deg: f64,
    beta_deg: f64,
    samples: Option<usize>,
    csv: Option<&Path>,
) -> Result<()> {
    let ctx = Output::new(cli, None);
    let (a, b) = (alpha_deg.to_radians(), beta_deg.to_radians());
    let ext = tilt_extremes(a, b)?;
    let (lo, hi) = ext.signed_range();
    let deg = |x: f64| ctx.f(x.to_degrees());
    println!(
        "extremes_deg={}",
        ctx.list(ext.phi_values.iter().map(|p| p.to_degrees()))
    );
    println!("tilt_min_deg={}", deg(ext.tilt_min));
    println!("tilt_max_deg={}", deg(ext.tilt_max));
    println!("span_deg={}", deg(ext.span));
    println!("signed_range_deg={},{}", deg(lo), deg(hi));
    if let Some(n) = samples {
        let geom = MechanismConfig {
            alpha_deg,
            beta_deg,
            r0: None,
        }
        .geometry()?;
        let (smin, smax) = sampled_polar_band(&geom, n)?;
        println!("sampled_band_deg={},{}", deg(smin), deg(smax));
        if let Some(path) = csv {
            let points = sample_workspace(&geom, n, n)?;
            let (path, mut out) = ctx.create(path)?;
            write_samples_csv(&mut out, &points, ctx.digits)?;
            out.flush()?;
            println!("samples={} csv={}", points.len(), path.display());
        }
    }
    Ok(())
}

fn cmd_fk(cli: &Cli, m: &MechanismArgs, theta: &[f64]) -> Result<()> {
    let ctx = Output::new(cli, None);
    let [t1, t2, t3, t4] = theta else {
        bail!(
            "--theta needs 4 values (deg, deg, deg, m), got {}",
            theta.len()
        );
    };
    let geom = mechanism(m)?.geometry()?;
    let g = forward_kinematics(
        &geom,
        &JointState::new(t1.to_radians(), t2.to_radians(), t3.to_radians(), *t4),
    );
    println!("position={}", ctx.list(g.position.iter().copied()));
    println!(
        "rotation={}",
        ctx.list(g.rotation.transpose().iter().copied())
    );
    Ok(())
}

/// Printed rotations carry rounding error; snap them back onto SO(3).
fn nearest_rotation(r: &Rot3) -> Result<Rot3> {
    let svd = r.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        bail!("--rotation: decomposition failed");
    };
    let q = u * v_t;
    if q.determinant() < 0.0 || (q - r).norm() > 1e-3 {
        return Err(CoreError::Domain("--rotation is not a rotation matrix".into()).into());
    }
    Ok(q)
}

fn cmd_ik(cli: &Cli, m: &MechanismArgs, position: &[f64], rotation: Option<&[f64]>) -> Result<()> {
    let ctx = Output::new(cli, None);
    if position.len() != 3 {
        bail!("--position needs 3 values, got {}", position.len());
    }
    let r = match rotation {
        None => Rot3::identity(),
        Some(r) if r.len() == 9 => nearest_rotation(&Rot3::from_row_slice(r))?,
        Some(r) => bail!("--rotation needs 9 values, got {}", r.len()),
    };
    let geom = mechanism(m)?.geometry()?;
    let target = Pose::new(r, Vec3::from_row_slice(position));
    let set = inverse_kinematics(&geom, &target)?;
    println!("branch,theta1_deg,theta2_deg,theta3_deg,theta4_m,position_error,rotation_error");
    for (i, b) in set.branches.iter().enumerate() {
        let j = b.joints.normalized();
        println!(
            "{i},{},{},{},{},{},{}",
            ctx.f(j.theta1.to_degrees()),
            ctx.f(j.theta2.to_degrees()),
            ctx.f(j.theta3.to_degrees()),
            ctx.f(j.theta4),
            ctx.f(b.position_error),
            ctx.f(b.rotation_error)
        );
    }
    println!("singular={}", set.singular);
    Ok(())
}

fn toml_float(ctx: &Output, x: f64) -> String {
    let s = ctx.f(x);
    if s.contains(['.', 'e']) {
        s
    } else {
        s + ".0"
    }
}

fn report_toml(ctx: &Output, cfg: &TransmissionConfig, r: &FitReport, test_load: f64) -> String {
    let f = |x| toml_float(ctx, x);
    let opt = |x: Option<f64>| x.map(|v| toml_float(ctx, v));
    let kind = kind_key(cfg.kind.into());
    let p = &r.params;
    let mut s = String::new();
    let _ = writeln!(s, "kind = \"{kind}\"");
    let _ = writeln!(s, "ratio = {}", f(cfg.ratio));
    let _ = writeln!(s, "lead_angle_deg = {}", f(cfg.lead_angle_deg));
    let _ = writeln!(s, "reflected_inertia = {}", f(cfg.reflected_inertia));
    let _ = writeln!(s, "mu_s = {}", f(p.mu_s));
    let _ = writeln!(s, "mu_c = {}", f(p.mu_c));
    let _ = writeln!(s, "b_c = {}", f(p.b_c));
    let _ = writeln!(s, "b_v = {}", f(p.b_v));
    let _ = writeln!(s, "\n[fit]");
    let _ = writeln!(s, "residual = {}", f(r.residual));
    if let Some(v) = opt(r.residual_positive) {
        let _ = writeln!(s, "residual_positive = {v}");
    }
    if let Some(v) = opt(r.residual_negative) {
        let _ = writeln!(s, "residual_negative = {v}");
    }
    let _ = writeln!(s, "b_c_half_width = {}", f(r.half_widths.b_c));
    let _ = writeln!(s, "b_v_half_width = {}", f(r.half_widths.b_v));
    if let Some(v) = opt(r.half_widths.mu_c) {
        let _ = writeln!(s, "mu_c_half_width = {v}");
    }
    let _ = writeln!(s, "test_load = {}", f(test_load));
    let _ = writeln!(s, "mu_c_identified = {}", r.mu_c_identified);
    let _ = writeln!(s, "mu_s_from_breakaway = {}", r.mu_s_from_breakaway);
    let _ = writeln!(s, "one_direction = {}", r.one_direction);
    let warnings: Vec<String> = r.warnings.iter().map(|w| format!("{:?}", w)).collect();
    let _ = writeln!(s, "warnings = [{}]", warnings.join(", "));
    s
}

fn cmd_identify(
    cli: &Cli,
    telemetry: &Path,
    t: &TransmissionArgs,
    test_load: f64,
    mu_c_prior: Option<f64>,
    seg: &SegmentOptions,
    output: Option<&Path>,
) -> Result<()> {
    let project = load_project(t.project.as_ref())?;
    let ctx = Output::new(cli, project.as_ref());
    let cfg = transmission(t, project.as_ref())?;
    let spec = cfg.spec()?;
    let file = File::open(telemetry).with_context(|| format!("opening {}", telemetry.display()))?;
    let log = TelemetryLog::from_csv(file, NOMINAL_RATE_HZ)?;
    let joint = match t.joint {
        Some(id) => id,
        None => match log.joint_ids().as_slice() {
            [id] => *id,
            ids => bail!("log holds joints {ids:?}; pick one with --joint"),
        },
    };
    let samples = log.joint(joint);
    if samples.is_empty() {
        return Err(
            CoreError::InsufficientData(format!("log has no samples of joint {joint}")).into(),
        );
    }
    let map = extract_steady_segments(&samples, seg)?;
    let opts = FitOptions {
        test_load,
        breakaway: detect_breakaways(&samples, seg),
        mu_c_prior,
    };
    let report = fit_friction(&map, &spec, &opts)?;

    println!(
        "joint={joint} sample_rate_hz={}",
        ctx.f(log.sample_rate_hz())
    );
    println!("velocity,torque,torque_std,count");
    for p in map.points() {
        println!(
            "{},{},{},{}",
            ctx.f(p.velocity),
            ctx.f(p.torque),
            ctx.f(p.torque_std),
            p.count
        );
    }
    let pr = &report.params;
    println!(
        "mu_c={} mu_s={} b_c={} b_v={}",
        ctx.f(pr.mu_c),
        ctx.f(pr.mu_s),
        ctx.f(pr.b_c),
        ctx.f(pr.b_v)
    );
    println!("residual={}", ctx.f(report.residual));
    if report.one_direction {
        println!("one_direction=true");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let default = PathBuf::from(format!("joint{joint}_fit.toml"));
    let (path, mut out) = ctx.create(output.unwrap_or(&default))?;
    out.write_all(report_toml(&ctx, &cfg, &report, test_load).as_bytes())?;
    out.flush()?;
    println!("report={}", path.display());
    Ok(())
}

fn write_csv_or_stdout(
    ctx: &Output,
    output: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<Option<PathBuf>> {
    match output {
        Some(p) => {
            let (path, mut out) = ctx.create(p)?;
            body(&mut out)?;
            out.flush()?;
            Ok(Some(path))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(None)
        }
    }
}

fn cmd_simulate(
    cli: &Cli,
    trajectory: &Path,
    t: &TransmissionArgs,
    measured: Option<&Path>,
    load: f64,
    output: Option<&Path>,
) -> Result<()> {
    let project = load_project(t.project.as_ref())?;
    let ctx = Output::new(cli, project.as_ref());
    let cfg = transmission(t, project.as_ref())?;
    let file =
        File::open(trajectory).with_context(|| format!("opening {}", trajectory.display()))?;
    let (time, velocity) = read_trace_csv(file)?;
    let traj = JointTrajectory::new(time, velocity)?;
    let sim = inverse_dynamics(&cfg.spec()?, &cfg.params()?, |_| load, &traj)?;
    // score exactly what is emitted
    let emitted: Vec<f64> = sim
        .torque
        .iter()
        .map(|&x| ctx.f(x).parse().expect("formatted float parses"))
        .collect();
    let score = measured
        .map(|m| -> Result<f64> {
            let file = File::open(m).with_context(|| format!("opening {}", m.display()))?;
            let (mt, mv) = read_trace_csv(file)?;
            let emitted = TorqueTrace::new(sim.time.clone(), emitted.clone())?;
            Ok(nrmsd(&emitted, &TorqueTrace::new(mt, mv)?)?)
        })
        .transpose()?;
    let path = write_csv_or_stdout(&ctx, output, |out| {
        write_trace_csv(out, "torque", &sim.time, &sim.torque, ctx.digits)
    })?;
    let label = t.joint.map(|j| format!("joint={j} ")).unwrap_or_default();
    if let Some(p) = path {
        eprintln!("{label}torque={}", p.display());
    }
    if let Some(e) = score {
        // keep stdout a clean CSV when it carries the trace
        let line = format!("{label}nrmsd={}", ctx.f(e));
        if output.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn cmd_payload(
    cli: &Cli,
    t: &TransmissionArgs,
    load: f64,
    vmax: f64,
    points: usize,
    output: Option<&Path>,
) -> Result<()> {
    if !(vmax > 0.0 && vmax.is_finite()) || points == 0 {
        return Err(CoreError::Domain("--vmax must be positive and --points ≥ 1".into()).into());
    }
    let project = load_project(t.project.as_ref())?;
    let ctx = Output::new(cli, project.as_ref());
    let grid: Vec<f64> = (1..=points)
        .map(|k| vmax * k as f64 / points as f64)
        .collect();
    let emit = |cfg: &TransmissionConfig, output: Option<&Path>| -> Result<Option<PathBuf>> {
        let curve = payload_curve(&cfg.spec()?, &cfg.params()?, load, &grid)?;
        write_csv_or_stdout(&ctx, output, |out| {
            writeln!(out, "velocity,torque")?;
            for (w, tau) in &curve {
                writeln!(out, "{},{}", ctx.f(*w), ctx.f(*tau))?;
            }
            Ok(())
        })
    };
    match (&project, t.transmission.is_some() || t.joint.is_some()) {
        (Some(p), false) => {
            if p.joints.is_empty() {
                bail!("project lists no joints");
            }
            for (id, cfg) in &p.joints {
                let name = PathBuf::from(format!("payload_joint{id}.csv"));
                if let Some(path) = emit(cfg, Some(&name))? {
                    println!("joint={id} curve={}", path.display());
                }
            }
        }
        _ => {
            let cfg = transmission(t, project.as_ref())?;
            if let Some(path) = emit(&cfg, output)? {
                eprintln!("curve={}", path.display());
            }
        }
    }
    Ok(())
}

fn cmd_synth_log(
    cli: &Cli,
    t: &TransmissionArgs,
    levels: Option<&[f64]>,
    load: f64,
    noise: f64,
    seed: u64,
    output: &Path,
) -> Result<()> {
    let project = load_project(t.project.as_ref())?;
    let ctx = Output::new(cli, project.as_ref());
    let cfg = transmission(t, project.as_ref())?;
    let mut sweep = SweepConfig {
        joint_id: t.joint.unwrap_or(1),
        load,
        torque_noise: noise,
        seed,
        ..Default::default()
    };
    if let Some(l) = levels {
        sweep.levels = l.to_vec();
    }
    let log = sweep_log(&cfg.spec()?, &cfg.params()?, &sweep)?;
    let (path, mut out) = ctx.create(output)?;
    log.write_csv(&mut out, ctx.digits)?;
    out.flush()?;
    println!("records={} log={}", log.records().len(), path.display());
    Ok(())
}
