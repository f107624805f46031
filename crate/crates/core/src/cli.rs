//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numerical failure,
//! 1 for I/O errors. Floats are written with 17 significant digits so that
//! identical runs produce byte-identical output.

use std::f64::consts::FRAC_PI_3;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coords::incoming_angle;
use crate::dynamics::{
    integrate, prepare_scattering_state, scatter_experiment_at, sweep, IntegratorControls,
    SweepConfig, SweepRow,
};
use crate::error::{Error, Result};
use crate::exact::transfer_matrix;
use crate::potentials::PotentialSpec;
use crate::spectra::{
    angular_spectrum, confined_spectrum_estimated, default_extent, isospectrality_report,
    AngularGrid, IsospectralityReport, SpectrumResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const SWEEP_HEADER: [&str; 10] = [
    "delta",
    "trial",
    "seed",
    "phi_in",
    "energy",
    "max_p_error",
    "max_a_error",
    "e_drift",
    "b2_drift",
    "status",
];
pub const TRAJECTORY_HEADER: [&str; 11] = [
    "t", "x1", "x2", "x3", "p1", "p2", "p3", "r", "phi", "E", "B2",
];

#[derive(Debug, Parser)]
#[command(
    name = "tribody",
    version,
    about = "Three-body scattering on a line for the Calogero-Wolfes interpolating potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the transfer matrix M(delta) with its entries a and b.
    Matrix {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate one scattering run and compare with the exact map.
    Scatter(RunArgs),
    /// Seeded random scattering runs over a list of deltas, one CSV row each.
    Sweep(SweepArgs),
    /// Finite-difference spectra.
    Spectrum(SpectrumArgs),
    /// Time series of one scattering run.
    Trajectory(TrajectoryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Calogero,
    Wolfes,
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumMode {
    Angular,
    Confined,
    Isospectral,
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    #[arg(long, value_enum, default_value = "A")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub g: f64,
    /// Second coupling (family B).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub f: f64,
    /// Interpolation angle in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delta_frac")]
    pub delta: Option<f64>,
    /// Interpolation angle as a fraction F of pi/3.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_frac: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub omega: f64,
    #[arg(long = "m", default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

impl PotentialArgs {
    pub fn delta(&self) -> f64 {
        match (self.delta, self.delta_frac) {
            (Some(d), _) => d,
            (None, Some(frac)) => frac * FRAC_PI_3,
            (None, None) => 0.0,
        }
    }

    pub fn spec(&self) -> PotentialSpec {
        let base = match self.family {
            FamilyArg::Calogero => PotentialSpec::calogero(self.g),
            FamilyArg::Wolfes => PotentialSpec::wolfes(self.g),
            FamilyArg::A => PotentialSpec::family_a(self.g, self.delta()),
            FamilyArg::B => PotentialSpec::family_b(self.g, self.f, self.delta()),
        };
        base.with_omega(self.omega).with_units(self.mass, self.hbar)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Longest integration span (default: 100 incoming flight times).
    #[arg(long)]
    pub max_time: Option<f64>,
}

impl IntegratorArgs {
    fn controls(&self) -> IntegratorControls {
        IntegratorControls {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_time: self.max_time,
            ..IntegratorControls::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Incoming momenta p1,p2,p3 (zero sum).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "phi_in"
    )]
    pub p: Option<Vec<f64>>,
    /// Incoming asymptotic angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_in: Option<f64>,
    /// Energy for --phi-in (default 1).
    #[arg(long, conflicts_with = "p")]
    pub energy: Option<f64>,
    /// Incoming offsets a1,a2,a3 (zero sum).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Starting hyperradius.
    #[arg(long)]
    pub r0: Option<f64>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Keep every n-th accepted step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Deltas to sweep (default: the single --delta).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, value_enum, default_value = "angular")]
    pub mode: SpectrumMode,
    /// Interior nodes (angular) or nodes per axis (confined, isospectral).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Half-width of the confined box (default: eight oscillator lengths).
    #[arg(long)]
    pub extent: Option<f64>,
    /// Deltas compared in isospectral mode.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub deltas: Option<Vec<f64>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `args` (program name first), execute, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return EXIT_VALIDATION;
        }
        Err(e) => {
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if matches!(e, Error::Io(_)) {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Matrix { potential, output } => {
            let m = transfer_matrix(potential.spec().effective_delta());
            let record = MatrixRecord {
                delta: m.delta,
                matrix: m.entries,
                a: m.a,
                b: m.b,
            };
            with_sink(output, stdout, |sink| {
                match output.format.unwrap_or(Format::Json) {
                    Format::Json => write_json(sink, &record),
                    Format::Csv => {
                        let mut header = vec!["delta".to_string(), "a".into(), "b".into()];
                        let mut row = vec![fmt(m.delta), fmt(m.a), fmt(m.b)];
                        for (i, line) in m.entries.iter().enumerate() {
                            for (j, v) in line.iter().enumerate() {
                                header.push(format!("m{}{}", i + 1, j + 1));
                                row.push(fmt(*v));
                            }
                        }
                        write_csv(sink, &header, std::iter::once(row))
                    }
                }
            })?;
            Ok(EXIT_OK)
        }
        Command::Scatter(args) => {
            let (spec, phi_in, energy, a_in) = run_inputs(args)?;
            let report = scatter_experiment_at(
                &spec,
                phi_in,
                energy,
                &a_in,
                args.r0,
                &args.integrator.controls(),
            )?;
            let flat = scatter_fields(&report);
            ensure_finite(flat.iter().filter_map(|(_, v)| v.as_number()))?;
            with_sink(&args.output, stdout, |sink| {
                match args.output.format.unwrap_or(Format::Json) {
                    Format::Json => write_json(sink, &report),
                    Format::Csv => {
                        let header: Vec<String> = flat.iter().map(|(k, _)| k.clone()).collect();
                        let row: Vec<String> = flat.iter().map(|(_, v)| v.render()).collect();
                        write_csv(sink, &header, std::iter::once(row))
                    }
                }
            })?;
            Ok(EXIT_OK)
        }
        Command::Trajectory(args) => {
            if args.stride == 0 {
                return Err(Error::InvalidParameter("stride must be at least 1".into()));
            }
            let (spec, phi_in, energy, a_in) = run_inputs(&args.run)?;
            let state = prepare_scattering_state(&spec, phi_in, energy, &a_in, args.run.r0)?;
            let controls = IntegratorControls {
                sample_stride: args.stride,
                ..args.run.integrator.controls()
            };
            let traj = integrate(&spec, &state, &controls)?;
            let rows: Vec<TrajectoryRow> = traj
                .samples
                .iter()
                .map(|s| TrajectoryRow {
                    t: s.state.time,
                    x1: s.state.positions[0],
                    x2: s.state.positions[1],
                    x3: s.state.positions[2],
                    p1: s.state.momenta[0],
                    p2: s.state.momenta[1],
                    p3: s.state.momenta[2],
                    r: s.polar.r,
                    phi: s.polar.phi,
                    energy: s.energy,
                    b2: s.b2,
                })
                .collect();
            with_sink(&args.run.output, stdout, |sink| {
                match args.run.output.format.unwrap_or(Format::Csv) {
                    Format::Json => write_json(sink, &rows),
                    Format::Csv => write_csv(
                        sink,
                        &TRAJECTORY_HEADER,
                        rows.iter().map(|r| {
                            [
                                r.t, r.x1, r.x2, r.x3, r.p1, r.p2, r.p3, r.r, r.phi, r.energy, r.b2,
                            ]
                            .map(fmt)
                            .to_vec()
                        }),
                    ),
                }
            })?;
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => {
            let spec = args.potential.spec();
            let deltas = args
                .deltas
                .clone()
                .unwrap_or_else(|| vec![spec.effective_delta()]);
            let mut cfg = SweepConfig::new(spec, deltas, args.trials, args.seed);
            cfg.controls = args.integrator.controls();
            cfg.jobs = args.jobs;
            let rows = sweep(&cfg)?;
            let failures = rows.iter().filter(|r| r.outcome.is_err()).count();
            with_sink(&args.output, stdout, |sink| {
                match args.output.format.unwrap_or(Format::Csv) {
                    Format::Json => {
                        let records: Vec<SweepRecord> =
                            rows.iter().map(SweepRecord::from).collect();
                        write_json(sink, &records)
                    }
                    Format::Csv => write_csv(sink, &SWEEP_HEADER, rows.iter().map(sweep_csv_row)),
                }
            })?;
            if failures > 0 {
                log::warn!("{failures} of {} runs failed", rows.len());
                Ok(EXIT_NUMERICAL)
            } else {
                Ok(EXIT_OK)
            }
        }
        Command::Spectrum(args) => {
            let spec = args.potential.spec();
            match args.mode {
                SpectrumMode::Angular => {
                    let grid = AngularGrid::for_spec(&spec, args.grid.unwrap_or(1024))?;
                    let result = angular_spectrum(&spec, &grid, args.k)?;
                    emit_spectrum(&args.output, stdout, &result)
                }
                SpectrumMode::Confined => {
                    let extent = args.extent.unwrap_or_else(|| default_extent(&spec));
                    let result = confined_spectrum_estimated(
                        &spec,
                        args.grid.unwrap_or(256),
                        extent,
                        args.k,
                    )?;
                    emit_spectrum(&args.output, stdout, &result)
                }
                SpectrumMode::Isospectral => {
                    let extent = args.extent.unwrap_or_else(|| default_extent(&spec));
                    let deltas = args
                        .deltas
                        .clone()
                        .unwrap_or_else(|| vec![0.0, FRAC_PI_3 / 4.0, FRAC_PI_3 / 2.0]);
                    let n = args.grid.unwrap_or(128);
                    let report =
                        isospectrality_report(&spec, &deltas, &[n, 2 * n], extent, args.k)?;
                    emit_isospectral(&args.output, stdout, &report)
                }
            }?;
            Ok(EXIT_OK)
        }
    }
}

fn run_inputs(args: &RunArgs) -> Result<(PotentialSpec, f64, f64, [f64; 3])> {
    let spec = args.potential.spec();
    let a_in = match &args.a {
        Some(v) => triple(v, "--a")?,
        None => [0.0; 3],
    };
    let (phi_in, energy) = match (&args.p, args.phi_in) {
        (Some(p), None) => {
            let p = triple(p, "--p")?;
            let energy = p.iter().map(|x| x * x).sum::<f64>() / (2.0 * spec.mass);
            (incoming_angle(&p)?, energy)
        }
        (None, Some(phi)) => (phi, args.energy.unwrap_or(1.0)),
        _ => {
            return Err(Error::InvalidParameter(
                "give exactly one of --p and --phi-in".into(),
            ))
        }
    };
    Ok((spec, phi_in, energy, a_in))
}

fn triple(v: &[f64], flag: &str) -> Result<[f64; 3]> {
    <[f64; 3]>::try_from(v)
        .map_err(|_| Error::InvalidParameter(format!("{flag} needs three comma-separated values")))
}

fn ensure_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::IntegrationFailure(
            "non-finite value in report".into(),
        ))
    }
}

/// Fixed 17-significant-digit scientific notation.
pub fn fmt(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

struct FixedPrecision;

impl serde_json::ser::Formatter for FixedPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{:.16e}", value + 0.0)
    }
}

/// JSON with floats in the fixed CLI format, followed by a newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

fn write_json<T: Serialize + ?Sized>(sink: &mut dyn Write, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *sink, FixedPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    writeln!(sink)?;
    Ok(())
}

fn write_csv<H, R>(sink: &mut dyn Write, header: &[H], rows: impl Iterator<Item = R>) -> Result<()>
where
    H: AsRef<str>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header.iter().map(|h| h.as_ref()))
        .map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn with_sink(
    output: &OutputArgs,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match &output.output {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

#[derive(Serialize)]
struct MatrixRecord {
    delta: f64,
    matrix: [[f64; 3]; 3],
    a: f64,
    b: f64,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    x1: f64,
    x2: f64,
    x3: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    r: f64,
    phi: f64,
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "B2")]
    b2: f64,
}

enum Field {
    Text(String),
    Number(f64),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Text(s) => s.clone(),
            Field::Number(v) => fmt(*v),
        }
    }

    fn as_number(&self) -> Option<f64> {
        match self {
            Field::Number(v) => Some(*v),
            Field::Text(_) => None,
        }
    }
}

fn scatter_fields(r: &crate::dynamics::ScatterReport) -> Vec<(String, Field)> {
    let mut out = vec![
        ("family".to_string(), Field::Text(r.family.label().into())),
        ("delta".into(), Field::Number(r.delta)),
        ("g".into(), Field::Number(r.g)),
        ("f".into(), Field::Number(r.f)),
    ];
    let vectors = [
        ("p_in", r.p_in),
        ("a_in", r.a_in),
        ("p_out_numeric", r.p_out_numeric),
        ("p_out_predicted", r.p_out_predicted),
        ("a_out_numeric", r.a_out_numeric),
        ("a_out_predicted", r.a_out_predicted),
    ];
    for (name, v) in vectors {
        for (i, x) in v.iter().enumerate() {
            out.push((format!("{name}_{}", i + 1), Field::Number(*x)));
        }
    }
    for (name, x) in [
        ("max_p_error", r.max_p_error),
        ("max_a_error", r.max_a_error),
        ("phi_in", r.phi_in),
        ("phi_out_numeric", r.phi_out_numeric),
        ("phi_out_predicted", r.phi_out_predicted),
        ("e_drift", r.e_drift),
        ("b2_drift", r.b2_drift),
    ] {
        out.push((name.into(), Field::Number(x)));
    }
    out
}

#[derive(Serialize)]
struct SweepRecord {
    delta: f64,
    trial: usize,
    seed: u64,
    phi_in: f64,
    energy: f64,
    max_p_error: Option<f64>,
    max_a_error: Option<f64>,
    e_drift: Option<f64>,
    b2_drift: Option<f64>,
    status: String,
}

impl From<&SweepRow> for SweepRecord {
    fn from(row: &SweepRow) -> Self {
        let i = &row.input;
        let ok = row.outcome.as_ref().ok();
        Self {
            delta: i.delta,
            trial: i.trial,
            seed: i.seed,
            phi_in: i.phi_in,
            energy: i.energy,
            max_p_error: ok.map(|r| r.max_p_error),
            max_a_error: ok.map(|r| r.max_a_error),
            e_drift: ok.map(|r| r.e_drift),
            b2_drift: ok.map(|r| r.b2_drift),
            status: match &row.outcome {
                Ok(_) => "ok".into(),
                Err(e) => e.kind().into(),
            },
        }
    }
}

fn sweep_csv_row(row: &SweepRow) -> Vec<String> {
    let r = SweepRecord::from(row);
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    vec![
        fmt(r.delta),
        r.trial.to_string(),
        r.seed.to_string(),
        fmt(r.phi_in),
        fmt(r.energy),
        opt(r.max_p_error),
        opt(r.max_a_error),
        opt(r.e_drift),
        opt(r.b2_drift),
        r.status,
    ]
}

fn emit_spectrum(output: &OutputArgs, stdout: &mut dyn Write, s: &SpectrumResult) -> Result<()> {
    ensure_finite(s.eigenvalues.iter().copied())
        .map_err(|_| Error::Eigensolver("non-finite eigenvalue".into()))?;
    with_sink(output, stdout, |sink| {
        match output.format.unwrap_or(Format::Json) {
            Format::Json => write_json(sink, s),
            Format::Csv => {
                let header = [
                    "l",
                    "eigenvalue",
                    "parity",
                    "extrapolated",
                    "error_estimate",
                    "residual",
                ];
                let rows = (0..s.eigenvalues.len()).map(|i| {
                    let pick =
                        |v: &Option<Vec<f64>>| v.as_ref().map(|v| fmt(v[i])).unwrap_or_default();
                    vec![
                        s.l[i].to_string(),
                        fmt(s.eigenvalues[i]),
                        s.parities
                            .as_ref()
                            .map(|p| p[i].to_string())
                            .unwrap_or_default(),
                        pick(&s.extrapolated),
                        pick(&s.error_estimates),
                        fmt(s.residuals[i]),
                    ]
                });
                write_csv(sink, &header, rows)
            }
        }
    })
}

fn emit_isospectral(
    output: &OutputArgs,
    stdout: &mut dyn Write,
    report: &IsospectralityReport,
) -> Result<()> {
    with_sink(output, stdout, |sink| {
        match output.format.unwrap_or(Format::Json) {
            Format::Json => write_json(sink, report),
            Format::Csv => {
                let mut header = vec!["n".to_string(), "level".into()];
                header.extend((1..=report.deltas.len()).map(|i| format!("e{i}")));
                header.extend(["max_abs_deviation".into(), "max_rel_deviation".into()]);
                let rows = report.rows.iter().map(|r| {
                    let mut row = vec![r.n.to_string(), r.level.to_string()];
                    row.extend(r.values.iter().map(|v| fmt(*v)));
                    row.extend([fmt(r.max_abs_deviation), fmt(r.max_rel_deviation)]);
                    row
                });
                write_csv(sink, &header, rows)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("tribody").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(-2.0), "-2.0000000000000000e0");
        assert_eq!(to_json_string(&[0.5]).unwrap(), "[5.0000000000000000e-1]\n");
    }

    #[test]
    fn delta_frac() {
        let (code, out, _) = run_capture(&["matrix", "--delta-frac", "0.25"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let d = v["delta"].as_f64().unwrap();
        assert!((d - std::f64::consts::PI / 12.0).abs() < 1e-16);
    }

    #[test]
    fn validation_exit_codes() {
        assert_eq!(run_capture(&["matrix", "--bogus"]).0, EXIT_VALIDATION);
        let (code, _, err) = run_capture(&["scatter", "--g", "0", "--p", "-1,0,1"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert_eq!(err.lines().count(), 1);
        assert_eq!(run_capture(&["scatter", "--p", "1,2"]).0, EXIT_VALIDATION);
        assert_eq!(
            run_capture(&["scatter", "--p", "-1,0,1", "--phi-in", "0.5"]).0,
            EXIT_VALIDATION
        );
        assert_eq!(
            run_capture(&["matrix", "--delta", "0", "--delta-frac", "0"]).0,
            EXIT_VALIDATION
        );
    }

    #[test]
    fn numerical_exit_code() {
        let (code, _, _) = run_capture(&[
            "spectrum", "--mode", "confined", "--omega", "1", "--grid", "32", "--extent", "0.8",
            "--k", "1",
        ]);
        assert_eq!(code, EXIT_NUMERICAL);
    }
}
