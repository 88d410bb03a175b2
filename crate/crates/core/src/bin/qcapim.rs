use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use qcapim::akers::{self, SynthError};
use qcapim::engine::{hold_centre_offset, InputSchedule, Simulator, TraceSet};
use qcapim::layout::{parse_layout, serialize, QcaLayout};
use qcapim::metrics::{dissipation_reports, layout_metrics, render_reports, MetricsError};
use qcapim::verification::{estimate_latency, verify_layout, Oracle, VerifyError};
use qcapim::SimParams;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;
const EXIT_IO: u8 = 4;

/// QCA bistable simulator and Akers logic-array synthesizer.
#[derive(Parser, Debug)]
#[command(name = "qcapim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a layout: `primitive`, `xor`, `wire`, `inverter`,
    /// `majority`, or a network description file.
    Synth {
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a layout over every input vector and write traces.csv.
    Simulate {
        layout: PathBuf,
        /// Samples per clock period (defaults to one period per vector).
        #[arg(long)]
        clock_period: Option<usize>,
        /// Also write plot.csv with decision samples marked.
        #[arg(long)]
        plot: bool,
        /// Keep every n-th sample in plot.csv.
        #[arg(long, default_value_t = 1)]
        plot_stride: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check a layout against a Boolean oracle (defaults to the stored one).
    Verify {
        layout: PathBuf,
        oracle: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Energy dissipation report, one column per tunneling-energy ratio.
    Power {
        layout: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Radius of effect in nm.
    #[arg(long)]
    radius: Option<f64>,
    /// Relative permittivity.
    #[arg(long)]
    epsr: Option<f64>,
    /// Temperature in kelvin.
    #[arg(long)]
    temp: Option<f64>,
    /// Minimum |P| for a decided output bit.
    #[arg(long, default_value_t = qcapim::verification::DEFAULT_MARGIN)]
    margin: f64,
    /// Tunneling energy as multiples of the adjacent-cell kink energy.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5])]
    gamma: Vec<f64>,
    /// Any parameter by name, e.g. `--set clock_high_j=9.8e-22`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    overrides: Vec<String>,
    /// Reserved; the engine is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

type Run<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Synth { target, common } => synth(&target, &common),
        Command::Simulate {
            layout,
            clock_period,
            plot,
            plot_stride,
            common,
        } => simulate(&layout, clock_period, plot.then_some(plot_stride), &common),
        Command::Verify {
            layout,
            oracle,
            common,
        } => verify(&layout, oracle.as_deref(), &common),
        Command::Power { layout, common } => power(&layout, &common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn params(common: &Common) -> Run<SimParams> {
    let mut p = SimParams::default();
    if let Some(v) = common.samples {
        p.num_samples = v;
    }
    if let Some(v) = common.tolerance {
        p.convergence_tolerance = v;
    }
    if let Some(v) = common.max_iter {
        p.max_iterations_per_sample = v;
    }
    if let Some(v) = common.radius {
        p.radius_of_effect_nm = v;
    }
    if let Some(v) = common.epsr {
        p.relative_permittivity = v;
    }
    if let Some(v) = common.temp {
        p.temperature_k = v;
    }
    for o in &common.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| fail(EXIT_USAGE, anyhow::anyhow!("--set expects NAME=VALUE, got {o:?}")))?;
        p.set(k.trim(), v).map_err(|e| fail(EXIT_USAGE, e))?;
    }
    p.validate().map_err(|e| fail(EXIT_USAGE, e))?;
    if !(common.margin >= 0.0 && common.margin <= 1.0) {
        return Err(fail(EXIT_USAGE, anyhow::anyhow!("--margin must lie in [0, 1]")));
    }
    Ok(p)
}

fn threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var("QCAPIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map_or(available, |cap| cap.clamp(1, available))
}

fn header(p: &SimParams) -> String {
    let mut s = String::from("# parameters\n");
    for line in p.describe().lines() {
        let _ = writeln!(s, "#   {line}");
    }
    s
}

fn read_layout(path: &Path) -> Run<QcaLayout> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| fail(EXIT_IO, e))?;
    parse_layout(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(|e| fail(EXIT_USAGE, e))
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Run<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(|e| fail(EXIT_IO, e))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(|e| fail(EXIT_IO, e))?;
    Ok(path)
}

fn synth(target: &str, common: &Common) -> Run<u8> {
    let p = params(common)?;
    let geometry = Default::default();
    let (name, layout) = match target {
        "primitive" => ("primitive".to_string(), akers::synthesize_primitive_layout(geometry)),
        "xor" => {
            let net = akers::build_xor_network();
            ("xor".to_string(), akers::synthesize_network_layout(&net, geometry).map_err(|e| fail(EXIT_USAGE, e))?)
        }
        "wire" => ("wire".to_string(), akers::wire_layout(geometry)),
        "inverter" => ("inverter".to_string(), akers::inverter_layout(geometry)),
        "majority" => ("majority".to_string(), akers::majority_layout(geometry)),
        file => {
            let path = Path::new(file);
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {file}"))
                .map_err(|e| fail(EXIT_IO, e))?;
            let net = akers::parse_network(&text)
                .with_context(|| format!("parsing {file}"))
                .map_err(|e| fail(EXIT_USAGE, e))?;
            let layout = akers::synthesize_network_layout(&net, geometry).map_err(|e: SynthError| fail(EXIT_USAGE, e))?;
            let stem = path.file_stem().map_or("network".into(), |s| s.to_string_lossy().into_owned());
            (stem, layout)
        }
    };
    let path = write_out(&common.out, &format!("{name}.layout"), &serialize(&layout))?;
    let m = layout_metrics(&layout, p.radius_of_effect_nm).map_err(|e| fail(EXIT_USAGE, e))?;
    println!("wrote {}", path.display());
    if let Some(o) = &layout.oracle {
        println!("oracle={o}");
    }
    print!("{m}");
    Ok(0)
}

fn simulate(path: &Path, clock_period: Option<usize>, plot: Option<usize>, common: &Common) -> Run<u8> {
    let p = params(common)?;
    let layout = read_layout(path)?;
    let labels = layout.input_labels();
    let mut schedule = InputSchedule::exhaustive(&labels, p.num_samples).map_err(|e| fail(EXIT_USAGE, e))?;
    if let Some(t) = clock_period {
        schedule = schedule.with_clock_period(t).map_err(|e| fail(EXIT_USAGE, e))?;
    }
    let traces = Simulator::new(&layout, &p)
        .and_then(|s| s.threads(threads()).run(&schedule))
        .map_err(|e| fail(EXIT_USAGE, e))?;
    print!("{}", header(&p));
    println!("# layout {} cells={} inputs={}", layout.name, layout.cells.len(), labels.join(","));
    println!("# clock_period={} window={}", schedule.clock_period(), schedule.window());
    let csv = write_out(&common.out, "traces.csv", &traces.to_csv(1))?;
    println!("wrote {}", csv.display());
    if let Some(stride) = plot {
        let latency = estimate_latency(&layout).unwrap_or(0);
        let plot = write_out(&common.out, "plot.csv", &plot_csv(&traces, &layout, &schedule, latency, stride))?;
        println!("wrote {}", plot.display());
    }
    println!("{}", traces.summary());
    Ok(0)
}

/// Labelled polarizations with the applied vector and a flag on the samples
/// where verification reads each output.
fn plot_csv(traces: &TraceSet, layout: &QcaLayout, schedule: &InputSchedule, latency: usize, stride: usize) -> String {
    let t = schedule.clock_period();
    let periods = schedule.periods_per_vector();
    let decisions: Vec<usize> = layout
        .outputs()
        .filter(|_| periods >= latency.max(1))
        .map(|o| (periods - 1) * t + hold_centre_offset(o.zone, t))
        .collect();
    let mut s = String::from("sample,vector,decision");
    for (_, l) in &traces.labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    for sample in (0..traces.samples).step_by(stride.max(1)) {
        let offset = sample % schedule.window();
        let flag = u8::from(decisions.contains(&offset));
        let _ = write!(s, "{sample},{},{flag}", schedule.vector_at(sample));
        for (id, _) in &traces.labels {
            let _ = write!(s, ",{}", qcapim::engine::format_sig(traces.polarization(*id, sample).unwrap_or(f64::NAN), 6));
        }
        s.push('\n');
    }
    s
}

fn verify_error(e: VerifyError) -> Failure {
    match e {
        VerifyError::Indeterminate { .. } => fail(EXIT_INDETERMINATE, e),
        other => fail(EXIT_USAGE, other),
    }
}

fn verify(path: &Path, oracle: Option<&str>, common: &Common) -> Run<u8> {
    let p = params(common)?;
    let layout = read_layout(path)?;
    let oracle = oracle
        .map(Oracle::parse)
        .transpose()
        .map_err(|e| fail(EXIT_USAGE, e))?;
    let check = verify_layout(&layout, &p, oracle.as_ref(), common.margin, threads()).map_err(verify_error)?;
    print!("{}", header(&p));
    let truth = check.table.render();
    let report = check.report.to_string();
    write_out(&common.out, "truth.txt", &truth)?;
    write_out(&common.out, "verify.txt", &report)?;
    print!("{truth}\n{report}");
    Ok(if check.report.pass { 0 } else { EXIT_VERIFY })
}

fn power(path: &Path, common: &Common) -> Run<u8> {
    let p = params(common)?;
    let layout = read_layout(path)?;
    let reports = match dissipation_reports(&layout, &p, &common.gamma, threads()) {
        Ok(r) => r,
        Err(MetricsError::Unverified(report)) => {
            eprint!("verification failed; power run aborted\n{report}");
            return Ok(EXIT_VERIFY);
        }
        Err(MetricsError::Verify(e)) => return Err(verify_error(e)),
        Err(e) => return Err(fail(EXIT_USAGE, e)),
    };
    let mut text = header(&p);
    text.push_str(&render_reports(&reports, layout.input_labels().len()));
    write_out(&common.out, "power.txt", &text)?;
    print!("{text}");
    Ok(0)
}
