//! `ftn`: simulate, detect and inspect faster-than-Nyquist links.

// `!(x > 0.0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ftn::detect::{detect_16qam, detect_psk, mlse_exhaustive, ReceivePath};
use ftn::experiments::{
    complexity_probe, run_ber_sweep, spectral_efficiency, trial_rng, verify_noise_covariance, DetectorKind,
    StreamPurpose, SweepSpec,
};
use ftn::signal::{amplitude, build_isi_model, rrc_pulse, Constellation, ReceivedBlock};
use ftn::{FtnConfig, Modulation};
use nalgebra::DVector;
use num_complex::Complex64;

mod config;
mod failure;

use failure::Failure;

#[derive(Parser)]
#[command(name = "ftn", version, about = "Faster-than-Nyquist detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat TOML file with configuration fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `key=value` applied on top of the config file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", value_parser = config::parse_override, global = true)]
    overrides: Vec<(String, String)>,
    /// Artifact path; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    modulation: Option<String>,
    #[arg(long = "M", global = true)]
    order: Option<String>,
    /// Packing factor; `sweep-se` accepts a comma-separated list.
    #[arg(long, global = true)]
    tau: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long = "N", global = true)]
    block_len: Option<String>,
    #[arg(long = "K", global = true)]
    isi_taps: Option<String>,
    #[arg(long = "L", global = true)]
    randomizations: Option<String>,
    #[arg(long, global = true)]
    sigma2: Option<String>,
    #[arg(long = "Es", global = true)]
    symbol_energy: Option<String>,
    #[arg(long = "T", global = true)]
    symbol_period: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BER/SER sweep written as CSV.
    Simulate {
        /// Comma-separated detector names.
        #[arg(long)]
        detector: Option<String>,
        #[arg(long = "snr-grid", default_value = "0:12:2")]
        snr_grid: String,
        /// Maximum trials per SNR point.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long = "max-bit-errors", default_value_t = 200)]
        max_bit_errors: u64,
    },
    /// Detect one whitened block read as `re im` lines.
    Detect {
        #[arg(long, default_value = "sdr-psk")]
        detector: String,
        /// Sample file; stdin when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Empirical check of the whitened colored-noise covariance.
    VerifyCovariance {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Spectral efficiency over a list of packing factors.
    SweepSe,
    /// Median detection time per block length and fitted exponent.
    Complexity {
        #[arg(long = "n-list", default_value = "8,16,32,64")]
        n_list: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

impl Common {
    /// File values, then `--override`, then named flags.
    fn config(&self, skip_tau: bool) -> Result<FtnConfig, Failure> {
        let mut all = self.overrides.clone();
        let named = [
            ("modulation", &self.modulation),
            ("M", &self.order),
            ("tau", if skip_tau { &None } else { &self.tau }),
            ("beta", &self.beta),
            ("N", &self.block_len),
            ("K", &self.isi_taps),
            ("L", &self.randomizations),
            ("sigma2", &self.sigma2),
            ("Es", &self.symbol_energy),
            ("T", &self.symbol_period),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                all.push((key.to_string(), v.clone()));
            }
        }
        if let Some(seed) = self.seed {
            all.push(("seed".into(), seed.to_string()));
        }
        config::load(self.config.as_deref(), &all)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Output(format!("cannot write {}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn output_error(e: impl std::fmt::Display) -> Failure {
    Failure::Output(format!("write failed: {e}"))
}

fn parse_detectors(list: Option<&str>, modulation: Modulation) -> Result<Vec<DetectorKind>, Failure> {
    let default = match modulation {
        Modulation::Psk => "sdr-psk",
        Modulation::Qam16 => "stsdrse",
    };
    list.unwrap_or(default)
        .split(',')
        .map(|name| {
            DetectorKind::from_name(name.trim())
                .ok_or_else(|| Failure::Usage(format!("unknown detector '{name}' (sdr-psk, stsdrse, mlse)")))
        })
        .collect()
}

fn read_samples(input: Option<&Path>) -> Result<Vec<Complex64>, Failure> {
    let reader: Box<dyn BufRead> = match input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?,
        )),
        None => Box::new(BufReader::new(io::stdin())),
    };
    let mut samples = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Failure::Config(format!("read failed: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Config(format!("line {}: expected 're im'", no + 1)))?;
        match fields[..] {
            [re, im] => samples.push(Complex64::new(re, im)),
            _ => return Err(Failure::Config(format!("line {}: expected 're im'", no + 1))),
        }
    }
    if samples.is_empty() {
        return Err(Failure::Config("received block is empty".into()));
    }
    Ok(samples)
}

fn simulate(
    common: &Common,
    detector: Option<&str>,
    grid: &str,
    trials: u64,
    max_bit_errors: u64,
) -> Result<(), Failure> {
    let cfg = common.config(false)?;
    let detectors = parse_detectors(detector, cfg.modulation)?;
    let grid = config::parse_grid(grid)?;
    let mut out = open_output(common.output.as_deref())?;
    let spec = SweepSpec { max_trials: trials, max_bit_errors, ..SweepSpec::new(cfg, grid, detectors) };
    let report = run_ber_sweep(&spec)?;
    report.write_csv(&mut out).map_err(output_error)?;
    out.flush().map_err(output_error)
}

fn detect(common: &Common, detector: &str, input: Option<&Path>) -> Result<(), Failure> {
    let samples = read_samples(input)?;
    let mut cfg = common.config(false)?;
    cfg.block_len = samples.len();
    let kind = parse_detectors(Some(detector), cfg.modulation)?[0];
    let mut out = open_output(common.output.as_deref())?;
    let model = build_isi_model(&rrc_pulse(cfg.beta, cfg.symbol_period)?, &cfg)?;
    let y = DVector::from_vec(samples);
    let mut rng = trial_rng(cfg.seed, 0, 0, StreamPurpose::Detection(0));
    let indices = match kind {
        DetectorKind::SdrPsk if cfg.modulation == Modulation::Psk => detect_psk(&y, &model, &cfg, &mut rng)?.a_hat.indices,
        DetectorKind::Stsdrse16Qam if cfg.modulation == Modulation::Qam16 => {
            let rx = ReceivedBlock { colored: None, whitened: Some(y), snr_db: cfg.snr_db() };
            detect_16qam(&rx, &model, &cfg, ReceivePath::Whitened, &mut rng)?.a_hat.indices
        }
        DetectorKind::MlseOracle => {
            let c = Constellation::from_config(&cfg)?;
            let h = &model.whitened * amplitude(&cfg, c.mean_energy());
            mlse_exhaustive(&y, &h, c)?.0.indices
        }
        other => {
            return Err(Failure::Usage(format!("detector {} does not support {:?}", other.name(), cfg.modulation)))
        }
    };
    let line: Vec<String> = indices.iter().map(usize::to_string).collect();
    writeln!(out, "{}", line.join(" ")).map_err(output_error)?;
    out.flush().map_err(output_error)
}

fn verify_covariance(common: &Common, trials: usize) -> Result<(), Failure> {
    let cfg = common.config(false)?;
    let model = build_isi_model(&rrc_pulse(cfg.beta, cfg.symbol_period)?, &cfg)?;
    let report = verify_noise_covariance(cfg.block_len, cfg.sigma2, trials, &model, cfg.seed)?;
    if let Some(path) = common.output.as_deref() {
        let mut out = open_output(Some(path))?;
        write!(out, "# {}\n{}", report.summary(), report.matrix_dump()).map_err(output_error)?;
        out.flush().map_err(output_error)?;
    }
    println!("{}", report.summary());
    Ok(())
}

fn sweep_se(common: &Common) -> Result<(), Failure> {
    let cfg = common.config(true)?;
    let taus: Vec<f64> = match &common.tau {
        Some(list) => config::parse_list("--tau", list)?,
        None => vec![0.75, 0.8, 0.85],
    };
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Failure::Config(format!("tau must lie in (0, 1], got {t}")));
    }
    let mut out = csv::Writer::from_writer(open_output(common.output.as_deref())?);
    out.write_record(["M", "beta", "tau", "se_bits_per_s_per_hz", "gain_vs_nyquist_pct"]).map_err(output_error)?;
    let nyquist = spectral_efficiency(cfg.order, 1.0, cfg.beta);
    for tau in taus {
        let se = spectral_efficiency(cfg.order, tau, cfg.beta);
        let gain = 100.0 * (se / nyquist - 1.0);
        out.write_record([cfg.order.to_string(), cfg.beta.to_string(), tau.to_string(), se.to_string(), gain.to_string()])
            .map_err(output_error)?;
    }
    out.flush().map_err(output_error)
}

fn complexity(common: &Common, n_list: &str, reps: usize) -> Result<(), Failure> {
    let cfg = common.config(false)?;
    let n_list: Vec<usize> = config::parse_list("--n-list", n_list)?;
    let mut out = csv::Writer::from_writer(open_output(common.output.as_deref())?);
    let report = complexity_probe(&n_list, &cfg, reps)?;
    out.write_record(["N", "median_ms"]).map_err(output_error)?;
    for (n, t) in &report.rows {
        out.write_record([n.to_string(), format!("{:.3}", t.as_secs_f64() * 1e3)]).map_err(output_error)?;
    }
    out.flush().map_err(output_error)?;
    if let Some(slope) = report.exponent {
        eprintln!("exponent={slope:.3} within_bound={}", report.within_bound().unwrap_or(false));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match &cli.command {
        Command::Simulate { detector, snr_grid, trials, max_bit_errors } => {
            simulate(common, detector.as_deref(), snr_grid, *trials, *max_bit_errors)
        }
        Command::Detect { detector, input } => detect(common, detector, input.as_deref()),
        Command::VerifyCovariance { trials } => verify_covariance(common, *trials),
        Command::SweepSe => sweep_se(common),
        Command::Complexity { n_list, reps } => complexity(common, n_list, *reps),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let failure = Failure::Usage(first.to_string());
            eprintln!("{failure}");
            std::process::exit(failure.code());
        }
    };
    if let Err(failure) = run(cli) {
        eprintln!("{failure}");
        std::process::exit(failure.code());
    }
}
