mod args;
mod commands;
mod parse;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Format};
use report::Outcome;

/// Multiplies every default tolerance; for slower or less precise hardware.
const TOLERANCE_SCALE_VAR: &str = "HARDYLAB_TOLERANCE_SCALE";

fn tolerance_scale() -> Result<f64, String> {
    match std::env::var(TOLERANCE_SCALE_VAR) {
        Err(_) => Ok(1.0),
        Ok(text) => match text.trim().parse::<f64>() {
            Ok(k) if k.is_finite() && k > 0.0 => Ok(k),
            _ => Err(format!("{TOLERANCE_SCALE_VAR} must be a positive number, got '{text}'")),
        },
    }
}

fn config(cmd: &Command, scale: f64) -> (&'static str, Value) {
    fn v(x: &impl serde::Serialize) -> Value {
        serde_json::to_value(x).expect("arguments serialize")
    }
    let (name, mut cfg) = match cmd {
        Command::Classify(a) => ("classify", v(a)),
        Command::Eigencheck(a) => ("eigencheck", v(a)),
        Command::SpectrumSample(a) => ("spectrum-sample", v(a)),
        Command::Afscan(a) => ("afscan", v(a)),
        Command::Orbit(a) => ("orbit", v(a)),
        Command::Zeros(a) => ("zeros", v(a)),
        Command::Continue(a) => ("continue", v(a)),
        Command::Krylov(a) => ("krylov", v(a)),
        Command::Converge(a) => ("converge", v(a)),
        Command::InnerInvariance(a) => ("inner-invariance", v(a)),
        Command::NonminimalGap(a) => ("nonminimal-gap", v(a)),
        Command::PaleyWiener(a) => ("paley-wiener", v(a)),
        Command::ShiftModel(a) => ("shift-model", v(a)),
        Command::ShiftEigen(a) => ("shift-eigen", v(a)),
        Command::Caradus(a) => ("caradus", v(a)),
        Command::Counting(a) => ("counting", v(a)),
        Command::CovCheck(a) => ("cov-check", v(a)),
    };
    cfg["tolerance_scale"] = scale.into();
    (name, cfg)
}

fn dispatch(cmd: &Command, scale: f64) -> commands::Run {
    use commands as c;
    match cmd {
        Command::Classify(a) => c::classify(a),
        Command::Eigencheck(a) => c::eigencheck(a, scale),
        Command::SpectrumSample(a) => c::spectrum(a, scale),
        Command::Afscan(a) => c::afscan_cmd(a, scale),
        Command::Orbit(a) => c::orbit(a, scale),
        Command::Zeros(a) => c::zeros(a),
        Command::Continue(a) => c::continuation(a),
        Command::Krylov(a) => c::krylov(a),
        Command::Converge(a) => c::converge(a, scale),
        Command::InnerInvariance(a) => c::inner_invariance(a, scale),
        Command::NonminimalGap(a) => c::nonminimal_gap(a, scale),
        Command::PaleyWiener(a) => c::paley_wiener_cmd(a, scale),
        Command::ShiftModel(a) => c::shift_model(a),
        Command::ShiftEigen(a) => c::shift_eigen(a),
        Command::Caradus(a) => c::caradus(a),
        Command::Counting(a) => c::counting(a),
        Command::CovCheck(a) => c::cov_check(a, scale),
    }
}

fn emit(cli: &Cli, report: &Value, outcome: &Outcome) -> std::io::Result<()> {
    let mut sink: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink)?;
        }
        Format::Csv => report::write_csv(&mut sink, report, outcome.table.as_ref())?,
    }
    sink.flush()
}

fn run(cli: Cli) -> Result<i32, String> {
    let scale = tolerance_scale()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global().map_err(|e| e.to_string())?;
    }
    let (name, cfg) = config(&cli.command, scale);
    let start = Instant::now();
    let outcome = dispatch(&cli.command, scale)?;
    let report = report::report(name, cfg, &outcome, start.elapsed().as_secs_f64());
    emit(&cli, &report, &outcome).map_err(|e| format!("cannot write report: {e}"))?;
    println!("{name}: {} {}", outcome.verdict.label().to_uppercase(), outcome.summary);
    Ok(outcome.verdict.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
