//! Subcommand implementations. Each takes its arguments and a sink for the
//! human-readable report so the binary and the tests share one code path.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use blockfade::distributions::{distribution_gof, fit_all_families, DEFAULT_TRIM_FRACTION, MIN_FIT_SAMPLES};
use blockfade::golden::golden_model;
use blockfade::io::{read_events, read_labels, read_trace, write_events, write_labels, write_trace};
use blockfade::markov::{RateTable, TransitionCounts};
use blockfade::segmentation::extract_events;
use blockfade::synthesis::{generate_trace, BlockageModel, DrawCoupling, DEFAULT_NOISE_SIGMA_DB};
use blockfade::{BlockageEvent, DistributionFit, SegmentationConfig, State, StateModel};

use crate::error::CliError;
use crate::model_file::{sha256_of_files, ModelFile, Provenance};

/// Reads one quantity off an event.
pub type Getter = fn(&BlockageEvent) -> f64;

/// Event quantities in table order, with how to read them off an event.
pub const QUANTITIES: [(&str, Getter); 4] = [
    ("r_decay (dB/ms)", |e| e.r_decay_db_per_ms),
    ("r_rise (dB/ms)", |e| e.r_rise_db_per_ms),
    ("SE_mean (dB)", |e| e.se_mean_db),
    ("t_D (ms)", |e| e.t_d_ms),
];

fn model_fits(model: &BlockageModel) -> [&DistributionFit; 4] {
    [&model.dist_r_decay, &model.dist_r_rise, &model.dist_se_mean, &model.dist_t_d]
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub trace: PathBuf,
    pub model: StateModel,
    pub threshold_db: f64,
    pub zero_cross_db: f64,
    pub out: PathBuf,
    /// Defaults to the events path with a `.labels.csv` suffix.
    pub labels: Option<PathBuf>,
}

pub fn default_labels_path(events: &Path) -> PathBuf {
    let stem = events.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    events.with_file_name(format!("{stem}.labels.csv"))
}

pub fn analyze(args: &AnalyzeArgs, report: &mut dyn Write) -> Result<(), CliError> {
    let trace = read_trace(&args.trace)?;
    let config = SegmentationConfig {
        threshold_db: args.threshold_db,
        zero_cross_db: args.zero_cross_db,
        ..SegmentationConfig::default()
    };
    let seg = extract_events(&trace, args.model, &config)?;
    write_events(&seg.events, &args.out)?;
    let labels = args.labels.clone().unwrap_or_else(|| default_labels_path(&args.out));
    write_labels(&seg.sequence, &labels)?;
    match (seg.mean_t_d_ms(), seg.mean_se_mean_db()) {
        (Some(t_d), Some(se)) => writeln!(
            report,
            "{} events, mean t_D {t_d:.1} ms, mean SE_mean {se:.2} dB",
            seg.events.len()
        )?,
        _ => writeln!(report, "0 events")?,
    }
    let d = seg.discarded;
    if d.total() > 0 {
        writeln!(report, "discarded: {} at trace boundary, {} too short, {} without shadowed region", d.boundary, d.short, d.no_shadow)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub events: PathBuf,
    pub labels: PathBuf,
    pub hpbw_deg: f64,
    pub out: PathBuf,
    /// Inferred from the labels when absent.
    pub model: Option<StateModel>,
    pub trim_fraction: f64,
}

pub fn fit(args: &FitArgs, report: &mut dyn Write) -> Result<ModelFile, CliError> {
    if !(args.hpbw_deg > 0.0) {
        return Err(CliError::Invalid(format!("--hpbw must be > 0, got {}", args.hpbw_deg)));
    }
    let events = read_events(&args.events)?;
    let (labels, interval) = read_labels(&args.labels)?;
    let kind = args.model.unwrap_or_else(|| {
        if labels.iter().any(|s| matches!(s, State::Decaying | State::Rising)) {
            StateModel::FourState
        } else {
            StateModel::TwoState
        }
    });
    if let Some(s) = labels.iter().find(|s| !kind.contains(**s)) {
        return Err(CliError::Invalid(format!("label `{s}` is not a {kind} state")));
    }
    if let Some(w) = labels.windows(2).find(|w| !kind.is_legal(w[0], w[1])) {
        return Err(CliError::Invalid(format!("illegal transition {} -> {} in labels", w[0], w[1])));
    }
    if events.len() < MIN_FIT_SAMPLES {
        return Err(CliError::Invalid(format!(
            "insufficient events: {} found, need at least {MIN_FIT_SAMPLES}",
            events.len()
        )));
    }

    let mut best = Vec::with_capacity(4);
    for (name, get) in QUANTITIES {
        let x: Vec<f64> = events.iter().map(get).collect();
        let fits = fit_all_families(&x, args.trim_fraction).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
        best.push(fits[0]);
    }
    let rate_table = TransitionCounts::from_labels(&labels).rates(kind, interval);
    let model = BlockageModel {
        hpbw_deg: args.hpbw_deg,
        rate_table,
        dist_r_decay: best[0],
        dist_r_rise: best[1],
        dist_se_mean: best[2],
        dist_t_d: best[3],
        attenuation_model: None,
        coupling: DrawCoupling::default(),
    };
    let source = sha256_of_files(&[&args.events, &args.labels])?;
    let file = ModelFile::from_model(&model, Provenance::new(Some(source), None));
    file.to_model()?;
    file.write(&args.out)?;

    writeln!(report, "HPBW {}°, {kind}, {} events", args.hpbw_deg, events.len())?;
    write_rate_table(report, &model.rate_table)?;
    writeln!(report)?;
    writeln!(report, "{:<18} {:<36} {:>5}", "Quantity", "Best fit", "GOF")?;
    for ((name, _), fit) in QUANTITIES.iter().zip(&best) {
        writeln!(report, "{name:<18} {:<36} {:>5.2}", fit.distribution.to_string(), fit.gof)?;
    }
    Ok(file)
}

fn write_rate_table(report: &mut dyn Write, rates: &RateTable) -> std::io::Result<()> {
    writeln!(report, "{:<26} {:>10}", "Transition", "Rate (1/s)")?;
    for t in rates.transitions() {
        writeln!(report, "{:<26} {:>10.2}", format!("{} → {}", t.from, t.to), t.rate_per_s)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub model: PathBuf,
    pub duration_s: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub truth: Option<PathBuf>,
    pub noise_db: f64,
    /// Defaults to the model's sample interval.
    pub sample_interval_s: Option<f64>,
}

pub fn simulate(args: &SimulateArgs, report: &mut dyn Write) -> Result<(), CliError> {
    if !(args.duration_s > 0.0) || !args.duration_s.is_finite() {
        return Err(CliError::Invalid(format!("--duration-s must be > 0, got {}", args.duration_s)));
    }
    let file = ModelFile::read(&args.model)?;
    let model = file.to_model()?;
    let interval = args.sample_interval_s.unwrap_or(file.sample_interval_s);
    let out = generate_trace(&model, args.duration_s, interval, args.seed, args.noise_db)?;
    write_trace(&out.trace, &args.out)?;
    if let Some(truth) = &args.truth {
        write_events(&out.ground_truth_events, truth)?;
    }
    writeln!(
        report,
        "{} samples, {} events ({} dropped at trace end, {} rejected draws), seed {}",
        out.trace.len(),
        out.ground_truth_events.len(),
        out.n_dropped,
        out.n_rejected_draws,
        args.seed
    )?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ValidateArgs {
    pub model: PathBuf,
    pub trace: PathBuf,
    pub threshold_db: f64,
    pub zero_cross_db: f64,
    pub cdf_out: Option<PathBuf>,
}

/// NMSE values below this are flagged.
pub const NMSE_FLAG: f64 = 0.90;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantityCheck {
    pub quantity: &'static str,
    pub nmse: f64,
    pub refit: DistributionFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n_events: usize,
    pub checks: Vec<QuantityCheck>,
    pub rates: RateTable,
}

pub fn validate(args: &ValidateArgs, report: &mut dyn Write) -> Result<ValidationReport, CliError> {
    let file = ModelFile::read(&args.model)?;
    let model = file.to_model()?;
    let trace = read_trace(&args.trace)?;
    let config = SegmentationConfig {
        threshold_db: args.threshold_db,
        zero_cross_db: args.zero_cross_db,
        ..SegmentationConfig::default()
    };
    let seg = extract_events(&trace, model.state_model(), &config)?;
    let events = &seg.events;
    if events.len() < MIN_FIT_SAMPLES {
        return Err(CliError::Invalid(format!(
            "insufficient events: {} found in trace, need at least {MIN_FIT_SAMPLES}",
            events.len()
        )));
    }
    let rates = TransitionCounts::from_labels(&seg.sequence.labels).rates(model.state_model(), trace.sample_interval());

    let mut cdf = match &args.cdf_out {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(f);
            writeln!(w, "quantity,x,empirical_cdf,model_cdf").map_err(|e| CliError::io(p, e))?;
            Some((p, w))
        }
        None => None,
    };

    writeln!(report, "{} events in {} s", events.len(), trace.duration())?;
    writeln!(report, "{:<18} {:<36} {:>7}  {:<36}", "Quantity", "Model", "NMSE", "Refit on trace")?;
    let mut checks = Vec::new();
    for ((name, get), fit) in QUANTITIES.iter().zip(model_fits(&model)) {
        let x: Vec<f64> = events.iter().map(get).collect();
        let nmse = distribution_gof(&x, &fit.distribution, fit.trim_fraction)?;
        let refit = fit_all_families(&x, fit.trim_fraction)?[0];
        let flag = if nmse < NMSE_FLAG { "  LOW" } else { "" };
        writeln!(
            report,
            "{name:<18} {:<36} {nmse:>7.3}  {:<36}{flag}",
            fit.distribution.to_string(),
            format!("{} ({:.2})", refit.distribution, refit.gof)
        )?;
        if let Some((p, w)) = &mut cdf {
            let mut sorted = x.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len() as f64;
            for (i, v) in sorted.iter().enumerate() {
                let key = name.split(' ').next().unwrap_or(name);
                writeln!(w, "{key},{v},{},{}", (i + 1) as f64 / n, fit.distribution.cdf(*v)).map_err(|e| CliError::io(p, e))?;
            }
        }
        checks.push(QuantityCheck {
            quantity: name,
            nmse,
            refit,
        });
    }
    if let Some((p, mut w)) = cdf {
        w.flush().map_err(|e| CliError::io(p, e))?;
    }
    writeln!(report)?;
    writeln!(report, "{:<26} {:>10} {:>10}", "Transition", "Model", "Trace")?;
    for t in model.rate_table.transitions() {
        let got = rates.rate(t.from, t.to).map_or("-".to_string(), |r| format!("{r:.2}"));
        writeln!(report, "{:<26} {:>10.2} {:>10}", format!("{} → {}", t.from, t.to), t.rate_per_s, got)?;
    }
    Ok(ValidationReport {
        n_events: events.len(),
        checks,
        rates,
    })
}

/// Writes the published reference model for one HPBW.
pub fn export_golden(hpbw_deg: f64, kind: StateModel, out: &Path) -> Result<(), CliError> {
    golden_model_file(hpbw_deg, kind)?.write(out)
}

pub fn golden_model_file(hpbw_deg: f64, kind: StateModel) -> Result<ModelFile, CliError> {
    let model = golden_model(hpbw_deg, kind)?;
    Ok(ModelFile::from_model(&model, Provenance::new(None, None)))
}

pub const DEFAULT_THRESHOLD_DB: f64 = 3.0;
pub const DEFAULT_ZERO_CROSS_DB: f64 = 0.5;
pub const DEFAULT_NOISE_DB: f64 = DEFAULT_NOISE_SIGMA_DB;
pub const DEFAULT_TRIM: f64 = DEFAULT_TRIM_FRACTION;
