use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dsc_core::montecarlo::{run_grid, summarize, CellResult, McReport};
use dsc_core::selectors::{selector_curve, selector_filter};
use dsc_core::signal::{simulate, ImpulseEvent};
use dsc_core::{
    analyze, envsi, squared_envelope_spectrum, Analysis, FrameClass, SelectorKind, Signal,
    SimulationConfig,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{AnalysisReport, InputInfo, SelectorReport, SelectorsReport};
use crate::wav::{read_wav, write_wav, WavEncoding};

/// Ground truth written next to a simulated WAV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub samples: usize,
    pub sample_rate: f64,
    /// Factor the WAV samples were multiplied by.
    pub wav_scale: f64,
    pub config: SimulationConfig,
    /// SOI impulse onsets in seconds.
    pub soi_onsets: Vec<f64>,
    pub impulses: Vec<ImpulseEvent>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn simulate_cmd(
    config: &RunConfig,
    out: &Path,
    sidecar: Option<&Path>,
    encoding: WavEncoding,
) -> Result<()> {
    let sim = simulate(&config.simulation)?;
    let scale = write_wav(out, &sim.signal, encoding)?;
    if let Some(path) = sidecar {
        let truth = Sidecar {
            samples: sim.signal.len(),
            sample_rate: sim.signal.sample_rate(),
            wav_scale: scale,
            config: config.simulation.clone(),
            soi_onsets: sim.soi_onsets.clone(),
            impulses: sim.impulses.events.clone(),
        };
        write_json(path, &truth)?;
    }
    Ok(())
}

pub fn analyze_cmd(
    config: &RunConfig,
    input: &Path,
    report: Option<&Path>,
    plots: Option<&Path>,
) -> Result<AnalysisReport> {
    let start = Instant::now();
    let signal = read_wav(input)?;
    let analysis = analyze(&signal, &config.pipeline, config.expected_freq)?;
    let result = AnalysisReport::new(
        InputInfo::new(input, &signal),
        &analysis,
        config.expected_freq,
        config.tolerance_hz,
        start.elapsed().as_secs_f64(),
    );
    if let Some(dir) = plots {
        write_plots(dir, &analysis)?;
    }
    match report {
        Some(path) => write_json(path, &result)?,
        None => print_json(&result)?,
    }
    Ok(result)
}

/// Spectrogram, frame classes and envelope spectra as CSV tables.
fn write_plots(dir: &Path, analysis: &Analysis) -> Result<()> {
    create_dir(dir)?;
    let spec = &analysis.spectrogram;
    let freqs = spec.bin_freqs();
    let times = spec.frame_times();

    let path = dir.join("spectrogram.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["time_s".to_string()];
    header.extend(freqs.iter().map(|f| format!("{f:.3}")));
    w.write_record(&header).map_err(|e| csv_error(&path, e))?;
    for (t, time) in times.iter().enumerate() {
        let mut row = vec![time.to_string()];
        row.extend(spec.frame(t).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let path = dir.join("partition.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["frame", "time_s", "class"])
        .map_err(|e| csv_error(&path, e))?;
    for (t, class) in analysis.partition.class_of_frame.iter().enumerate() {
        w.write_record([
            t.to_string(),
            times[t].to_string(),
            class.number().to_string(),
        ])
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let mut series = vec![("ses_raw.csv".to_string(), &analysis.raw_ses)];
    for c in &analysis.classes {
        series.push((format!("ses_class{}.csv", c.class.number()), &c.ses));
    }
    for (name, ses) in series {
        let path = dir.join(name);
        let mut w = csv_writer(&path)?;
        w.write_record(["freq_hz", "amplitude"])
            .map_err(|e| csv_error(&path, e))?;
        for (f, a) in ses.freqs.iter().zip(&ses.amplitudes) {
            w.write_record([f.to_string(), a.to_string()])
                .map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

pub fn selectors_cmd(
    config: &RunConfig,
    input: &Path,
    report: Option<&Path>,
) -> Result<SelectorsReport> {
    let start = Instant::now();
    let signal = read_wav(input)?;
    let comparison = compare_selectors(&signal, config)?;
    let mut result = SelectorsReport {
        input: InputInfo::new(input, &signal),
        envsi_freq: comparison.envsi_freq,
        raw_envsi: comparison.raw_envsi,
        dsc_envsi: comparison.dsc_envsi,
        selectors: comparison.selectors,
        best: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    result.pick_best();
    match report {
        Some(path) => write_json(path, &result)?,
        None => print_json(&result)?,
    }
    Ok(result)
}

struct Comparison {
    envsi_freq: Option<f64>,
    raw_envsi: Option<f64>,
    dsc_envsi: Option<f64>,
    selectors: Vec<SelectorReport>,
}

fn compare_selectors(signal: &Signal, config: &RunConfig) -> Result<Comparison> {
    let pipeline = &config.pipeline;
    let analysis = analyze(signal, pipeline, config.expected_freq)?;
    let freq = analysis.envsi_freq;
    let spec = &analysis.spectrogram;
    let mut selectors = Vec::new();
    for kind in SelectorKind::ALL {
        let curve = match selector_curve(spec, kind) {
            Ok(c) => c,
            Err(dsc_core::DscError::InsufficientData { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let filtered = selector_filter(signal, &curve, &pipeline.stft)?;
        let ses = squared_envelope_spectrum(&filtered)?;
        let envsi_value = match freq {
            Some(f) => envsi(&ses, &pipeline.envsi_config(f)).ok(),
            None => None,
        };
        selectors.push(SelectorReport {
            kind,
            envsi: envsi_value,
            peak_freq: curve.argmax().map(|i| curve.bin_freqs[i]),
            degenerate_bins: curve.degenerate_count(),
            bins: curve.len(),
        });
    }
    Ok(Comparison {
        envsi_freq: freq,
        raw_envsi: analysis.raw_envsi,
        dsc_envsi: analysis.class_envsi(FrameClass::Cyclic),
        selectors,
    })
}

/// Sizes the worker pool from `threads`; `None` keeps rayon's default.
fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(CliError::Config("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

pub fn montecarlo_cmd(
    config: &RunConfig,
    out: &Path,
    full: bool,
    threads: Option<usize>,
) -> Result<McReport> {
    let grid = config.grid(full);
    grid.validate()?;
    create_dir(out)?;
    let results = with_threads(threads, || run_grid(&grid))??;
    let report = summarize(&grid, &results)?;
    write_json(&out.join("report.json"), &report)?;
    write_json(&out.join("grid.json"), &grid)?;
    write_runs_csv(&out.join("runs.csv"), &results)?;
    write_rates_csv(&out.join("detection_rate.csv"), &report)?;
    print_rate_matrix(&report)?;
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_runs_csv(path: &PathBuf, results: &[CellResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "sigma",
        "gamma",
        "iteration",
        "seed",
        "raw_envsi",
        "class1_envsi",
        "class2_envsi",
        "class3_envsi",
        "frequency",
        "detected",
        "failure",
    ])
    .map_err(|e| csv_error(path, e))?;
    for cell in results {
        for r in &cell.runs {
            w.write_record([
                cell.sigma.to_string(),
                cell.gamma.to_string(),
                r.iteration.to_string(),
                r.seed.to_string(),
                opt(r.raw_envsi),
                opt(r.impulsive_envsi),
                opt(r.cyclic_envsi),
                opt(r.noise_envsi),
                opt(r.frequency),
                r.detected.to_string(),
                r.failure.clone().unwrap_or_default(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_rates_csv(path: &PathBuf, report: &McReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["sigma".to_string()];
    header.extend(report.gamma_levels.iter().map(|g| format!("gamma_{g}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (sigma, row) in report.sigma_levels.iter().zip(&report.detection_rate) {
        let mut rec = vec![sigma.to_string()];
        rec.extend(row.iter().map(|r| r.to_string()));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn print_rate_matrix(report: &McReport) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let mut text = String::from("detection rate (rows sigma, columns gamma)\n  sigma");
    for g in &report.gamma_levels {
        text += &format!(" {g:>6}");
    }
    text.push('\n');
    for (s, row) in report.sigma_levels.iter().zip(&report.detection_rate) {
        text += &format!("{s:>7}");
        for r in row {
            text += &format!(" {r:>6.2}");
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}
