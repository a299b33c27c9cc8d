use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use twinpp::baselines::{
    fit_hawkes, fit_hawkes_select_beta, fit_logistic, hawkes_predict_next, predict_logistic,
};
use twinpp::data::{
    build_samples, parse_event_log, parse_profiles, read_sample_file, split_by_entity,
    window_features, write_event_log, write_profiles, write_sample_file, Event, EventLog,
    LabeledSample, Normalization, SampleFileHeader, Taxonomy, SAMPLE_FORMAT_VERSION,
};
use twinpp::metrics::{report, MetricsReport, Scored};
use twinpp::model::{HeadMode, Sample};
use twinpp::ppsim::{make_synthetic_dataset, EventSequence, SyntheticSpec};
use twinpp::trainer::{compute_class_weights, train, write_loss_curve, Objective};

use crate::checkpoint::{Checkpoint, Predictor};
use crate::config::{Baseline, RunConfig, Variant};
use crate::output::Staged;

pub const EVENTS_FILE: &str = "events.jsonl";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const SPLIT_FILE: &str = "split.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const CONFIG_FILE: &str = "config.json";
pub const CURVE_FILE: &str = "loss_curve.csv";
pub const FIT_TRACE_FILE: &str = "fit_trace.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub fn file_name(self) -> &'static str {
        match self {
            SplitName::Train => "train.jsonl",
            SplitName::Val => "val.jsonl",
            SplitName::Test => "test.jsonl",
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn require_file(path: &Path) -> Result<()> {
    ensure!(path.is_file(), "missing input file {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, clap::Args)]
pub struct SimulateArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Generator spec (JSON). Defaults to the 7-subtype ticket/error corpus.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub entities: Option<usize>,
    /// Observation window in days.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => read_json::<SyntheticSpec>(p)?,
        None => SyntheticSpec::ticket_error_hawkes(200, 200.0),
    };
    if let Some(n) = args.entities {
        spec.entities = n;
    }
    if let Some(t) = args.horizon {
        spec.horizon = t;
    }
    spec.validate()?;
    let ds = make_synthetic_dataset(&spec, args.seed)?;
    log::info!(
        "simulated {} events for {} entities",
        ds.events.len(),
        spec.entities
    );
    let mut out = Staged::new();
    out.render(args.out.join(EVENTS_FILE), |b| {
        write_event_log(b, &ds.events)
    })?;
    out.render(args.out.join(PROFILES_FILE), |b| {
        write_profiles(b, &ds.profile_names, &ds.profiles)
    })?;
    out.json(args.out.join(MANIFEST_FILE), &ds.manifest)?;
    out.json(args.out.join(TAXONOMY_FILE), &spec.taxonomy)?;
    out.commit()
}

// ----------------------------------------------------------------- prepare

#[derive(Debug, Clone, clap::Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub profiles: PathBuf,
    /// Taxonomy (JSON). Defaults to ticket/error.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Output directory for the sample files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Entity lists of the three splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub seed: u64,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

pub fn prepare(args: &PrepareArgs) -> Result<()> {
    let mut cfg = RunConfig::load_or_default(args.config.as_deref())?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    require_file(&args.events)?;
    require_file(&args.profiles)?;
    let taxonomy = match &args.taxonomy {
        Some(p) => read_json::<Taxonomy>(p)?,
        None => Taxonomy::ticket_error(),
    };
    taxonomy.validate()?;
    let log = parse_event_log(open(&args.events)?, &taxonomy)
        .with_context(|| args.events.display().to_string())?;
    if log.duplicates_dropped > 0 {
        log::warn!("dropped {} duplicate events", log.duplicates_dropped);
    }
    let profiles = parse_profiles(open(&args.profiles)?)
        .with_context(|| args.profiles.display().to_string())?;
    let (rest, test) = split_by_entity(&log.entity_ids(), cfg.split.test_fraction, cfg.seed)?;
    let (train_ids, val) =
        split_by_entity(&rest, cfg.split.val_fraction, cfg.seed.wrapping_add(1))?;
    let norm = Normalization::fit(&profiles, &train_ids)?;

    let mut out = Staged::new();
    for (name, ids) in [
        (SplitName::Train, &train_ids),
        (SplitName::Val, &val),
        (SplitName::Test, &test),
    ] {
        let samples = build_samples(&log.restrict(ids), &profiles, &cfg.window, &taxonomy, &norm)?;
        ensure!(!samples.is_empty(), "the {name:?} split has no samples");
        log::info!(
            "{name:?}: {} entities, {} samples",
            ids.len(),
            samples.len()
        );
        let header = SampleFileHeader {
            format_version: SAMPLE_FORMAT_VERSION,
            window: cfg.window,
            taxonomy: taxonomy.clone(),
            normalization: norm.clone(),
            num_samples: samples.len(),
        };
        out.render(args.out.join(name.file_name()), |b| {
            write_sample_file(b, &header, &samples)
        })?;
    }
    out.json(
        args.out.join(SPLIT_FILE),
        &SplitRecord {
            seed: cfg.seed,
            train: train_ids,
            val,
            test,
        },
    )?;
    // canonical copies so later steps need only this directory
    out.render(args.out.join(EVENTS_FILE), |b| {
        write_event_log(b, &log.to_records(&taxonomy))
    })?;
    out.render(args.out.join(PROFILES_FILE), |b| {
        write_profiles(b, &profiles.names, &profiles.records())
    })?;
    out.json(args.out.join(TAXONOMY_FILE), &taxonomy)?;
    out.commit()
}

fn load_split(data: &Path, split: SplitName) -> Result<(SampleFileHeader, Vec<LabeledSample>)> {
    let path = data.join(split.file_name());
    read_sample_file(open(&path)?).with_context(|| path.display().to_string())
}

fn load_prepared_log(data: &Path, taxonomy: &Taxonomy) -> Result<EventLog> {
    let path = data.join(EVENTS_FILE);
    parse_event_log(open(&path)?, taxonomy).with_context(|| path.display().to_string())
}

fn sequence(events: &[Event], horizon: f64) -> Result<EventSequence> {
    Ok(EventSequence::new(
        events.iter().map(|e| e.time).collect(),
        events.iter().map(|e| e.sub).collect(),
        horizon,
    )?)
}

// ------------------------------------------------------------------- train

#[derive(Debug, Clone, clap::Args)]
pub struct TrainArgs {
    /// Directory written by `prepare`.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for the checkpoint and curves.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    #[arg(long, value_enum)]
    pub head: Option<HeadArg>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HeadArg {
    Flat,
    Hierarchical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ObjectiveArg {
    Joint,
    MainOnly,
    SubOnly,
}

impl TrainArgs {
    /// The run configuration after flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::load_or_default(self.config.as_deref())?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.variant.is_some() {
            c.variant = self.variant;
        }
        if let Some(b) = self.baseline {
            c.baseline = b;
        }
        if let Some(h) = self.head {
            c.head_mode = match h {
                HeadArg::Flat => HeadMode::Flat,
                HeadArg::Hierarchical => HeadMode::Hierarchical,
            };
        }
        if let Some(o) = self.objective {
            c.objective = match o {
                ObjectiveArg::Joint => Objective::Joint,
                ObjectiveArg::MainOnly => Objective::MainOnly,
                ObjectiveArg::SubOnly => Objective::SubOnly,
            };
        }
        if let Some(v) = self.epochs {
            c.train.max_epochs = v;
        }
        if let Some(v) = self.learning_rate {
            c.train.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            c.train.batch_size = v;
        }
        if let Some(v) = self.patience {
            c.train.patience = v;
        }
        if let Some(v) = self.hidden_dim {
            c.network.hidden_dim = v;
        }
        // one seed drives the whole run
        c.train.rng_seed = c.seed;
        c.validate()?;
        Ok(c)
    }
}

pub fn train_cmd(args: &TrainArgs) -> Result<()> {
    let cfg = args.resolve()?;
    for split in [SplitName::Train, SplitName::Val] {
        require_file(&args.data.join(split.file_name()))?;
    }
    let (header, train_set) = load_split(&args.data, SplitName::Train)?;
    let (val_header, val_set) = load_split(&args.data, SplitName::Val)?;
    ensure!(
        header.window == val_header.window
            && header.taxonomy == val_header.taxonomy
            && header.normalization == val_header.normalization,
        "train and val files were prepared differently"
    );
    ensure!(
        !train_set.is_empty() && !val_set.is_empty(),
        "train and val splits must be non-empty"
    );
    let tax = &header.taxonomy;
    let mut out = Staged::new();

    let predictor = if let Some(variant) = cfg.effective_variant() {
        let tr: Vec<Sample> = train_set.into_iter().map(|s| s.sample).collect();
        let va: Vec<Sample> = val_set.into_iter().map(|s| s.sample).collect();
        let ts_dim = tr[0].ts_window.first().map_or(0, Vec::len);
        let model = cfg.model_config(tax.k_main(), tax.k_sub(), ts_dim)?;
        let weights =
            compute_class_weights(&tr, &tax.main_names(), &tax.sub_names(), cfg.objective)?;
        log::info!(
            "training {variant:?} ({:?} head) on {} samples",
            model.head_mode,
            tr.len()
        );
        let outcome = train::<f64>(&tr, &va, &weights, &model, &cfg.train)?;
        log::info!(
            "best validation loss {:.5} at epoch {}",
            outcome.curve[outcome.best_epoch].val_loss,
            outcome.best_epoch
        );
        out.render(args.out.join(CURVE_FILE), |b| {
            write_loss_curve(b, &outcome.curve)
        })?;
        Predictor::Rnn {
            model,
            objective: cfg.objective,
            best_epoch: outcome.best_epoch,
            curve: outcome.curve,
            params: outcome.model.params().to_document(),
        }
    } else {
        match cfg.baseline {
            Baseline::Logistic => {
                let tr: Vec<Sample> = train_set.into_iter().map(|s| s.sample).collect();
                let models = fit_logistic(&tr, tax.k_main(), tax.k_sub(), cfg.logistic.l2_weight)?;
                Predictor::Logistic { models }
            }
            Baseline::Hawkes => {
                let split: SplitRecord = read_json(&args.data.join(SPLIT_FILE))?;
                let log = load_prepared_log(&args.data, tax)?;
                let horizon = log.max_time();
                let seqs = |ids: &[String]| -> Result<Vec<EventSequence>> {
                    ids.iter()
                        .filter_map(|id| log.entities.get(id))
                        .map(|ev| sequence(ev, horizon))
                        .collect()
                };
                let (tr, va) = (seqs(&split.train)?, seqs(&split.val)?);
                let h = &cfg.hawkes;
                let fit = match h.beta {
                    Some(beta) => fit_hawkes(&tr, tax.k_sub(), beta, h.l1_weight, h.max_iters)?,
                    None => {
                        fit_hawkes_select_beta(&tr, &va, tax.k_sub(), h.l1_weight, h.max_iters)?
                    }
                };
                if !fit.converged {
                    log::warn!("hawkes fit stopped before converging");
                }
                fit.params.warn_if_explosive();
                let mut trace = String::from("iteration,objective\n");
                for (k, v) in fit.trace.iter().enumerate() {
                    trace.push_str(&format!("{k},{v}\n"));
                }
                out.add(args.out.join(FIT_TRACE_FILE), trace.into_bytes());
                Predictor::Hawkes {
                    params: fit.params,
                    horizon,
                }
            }
            Baseline::None => unreachable!("a run without a baseline has a variant"),
        }
    };
    out.json(
        args.out.join(CHECKPOINT_FILE),
        &Checkpoint::new(&header, cfg.clone(), predictor),
    )?;
    out.json(args.out.join(CONFIG_FILE), &cfg)?;
    out.commit()
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone, clap::Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitName,
    /// Seeds the Hawkes rollouts; defaults to the checkpoint's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// One next-event prediction in taxonomy ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub main: usize,
    pub sub: usize,
    pub gap: f64,
}

/// Report document written by `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub kind: String,
    pub split: SplitName,
    pub f1_plus_threshold: f64,
    pub main: MetricsReport,
    pub sub: MetricsReport,
}

fn predict_samples(
    ck: &Checkpoint,
    samples: &[LabeledSample],
    log: Option<&EventLog>,
    seed: u64,
) -> Result<Vec<Prediction>> {
    let parents = ck.taxonomy.parents();
    match &ck.predictor {
        Predictor::Rnn { .. } => {
            let net = ck.network()?.expect("rnn checkpoint");
            samples
                .par_iter()
                .map(|s| {
                    let p = net.predict_next(&s.sample)?;
                    Ok(Prediction {
                        main: p.main_type,
                        sub: p.sub_type,
                        gap: p.gap_days,
                    })
                })
                .collect()
        }
        Predictor::Logistic { models } => samples
            .par_iter()
            .map(|s| {
                let (main, sub, gap) = predict_logistic(models, &s.sample)?;
                Ok(Prediction { main, sub, gap })
            })
            .collect(),
        Predictor::Hawkes { params, .. } => {
            let log = log.context("hawkes evaluation needs the prepared event log")?;
            let h = &ck.config.hawkes;
            samples
                .par_iter()
                .enumerate()
                .map(|(k, s)| {
                    let events = log.entities.get(&s.entity_id).with_context(|| {
                        format!("entity {} missing from the event log", s.entity_id)
                    })?;
                    let visible = events.partition_point(|e| e.time <= s.anchor_time);
                    let hist = sequence(&events[..visible], s.anchor_time)?;
                    let (sub, gap) = hawkes_predict_next(
                        params,
                        &hist,
                        s.anchor_time,
                        h.rollouts,
                        h.max_gap_days,
                        seed.wrapping_add(k as u64),
                    )?;
                    Ok(Prediction {
                        main: parents[sub],
                        sub,
                        gap,
                    })
                })
                .collect()
        }
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    require_file(&args.checkpoint)?;
    let ck = Checkpoint::load(&args.checkpoint)?;
    let (header, samples) = load_split(&args.data, args.split)?;
    ck.check_compatible(&header)?;
    ensure!(!samples.is_empty(), "no samples to evaluate");
    let log = match ck.predictor {
        Predictor::Hawkes { .. } => Some(load_prepared_log(&args.data, &ck.taxonomy)?),
        _ => None,
    };
    let preds = predict_samples(
        &ck,
        &samples,
        log.as_ref(),
        args.seed.unwrap_or(ck.config.seed),
    )?;
    let thr = ck.config.f1_plus_threshold;
    let true_gaps: Vec<f64> = samples.iter().map(|s| s.sample.target_gap).collect();
    let pred_gaps: Vec<f64> = preds.iter().map(|p| p.gap).collect();
    let level = |name: &str,
                 names: Vec<String>,
                 pick: fn(&Prediction) -> usize,
                 truth: fn(&Sample) -> usize| {
        let p: Vec<usize> = preds.iter().map(pick).collect();
        let t: Vec<usize> = samples.iter().map(|s| truth(&s.sample)).collect();
        let scored = Scored {
            preds: &p,
            truth: &t,
            pred_gaps: &pred_gaps,
            true_gaps: &true_gaps,
        };
        report(name, &names, &scored, thr)
    };
    let main = level(
        "main",
        ck.taxonomy.main_names(),
        |p| p.main,
        |s| s.target_main,
    )?;
    let sub = level("sub", ck.taxonomy.sub_names(), |p| p.sub, |s| s.target_sub)?;
    log::info!(
        "{}: macro F1 main {:.4}, sub {:.4}; MAE {:.4} days",
        ck.kind(),
        main.prf.macro_f1,
        sub.prf.macro_f1,
        main.mae_days.unwrap_or(f64::NAN)
    );

    let mut out = Staged::new();
    out.render(args.out.join("report_main.csv"), |b| main.write_csv(b))?;
    out.render(args.out.join("report_sub.csv"), |b| sub.write_csv(b))?;
    out.render(args.out.join("confusion_main.csv"), |b| {
        main.confusion.write_csv(b)
    })?;
    out.render(args.out.join("confusion_sub.csv"), |b| {
        sub.confusion.write_csv(b)
    })?;
    let (mains, subs) = (ck.taxonomy.main_names(), ck.taxonomy.sub_names());
    let mut rows = csv::Writer::from_writer(Vec::new());
    rows.write_record([
        "entity_id",
        "anchor_time",
        "true_main",
        "true_sub",
        "true_gap",
        "pred_main",
        "pred_sub",
        "pred_gap",
    ])?;
    for (s, p) in samples.iter().zip(&preds) {
        rows.write_record([
            s.entity_id.clone(),
            s.anchor_time.to_string(),
            mains[s.sample.target_main].clone(),
            subs[s.sample.target_sub].clone(),
            s.sample.target_gap.to_string(),
            mains[p.main].clone(),
            subs[p.sub].clone(),
            p.gap.to_string(),
        ])?;
    }
    out.add(args.out.join(PREDICTIONS_FILE), rows.into_inner()?);
    out.json(
        args.out.join(REPORT_FILE),
        &EvaluationReport {
            kind: ck.kind().to_string(),
            split: args.split,
            f1_plus_threshold: thr,
            main,
            sub,
        },
    )?;
    out.commit()
}

// ----------------------------------------------------------------- predict

#[derive(Debug, Clone, clap::Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub events: PathBuf,
    /// Needed by network and logistic checkpoints.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long)]
    pub entity: String,
    /// Predict the first event after this time (days); history up to and
    /// including it is visible.
    #[arg(long = "at")]
    pub at_time: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextEvent {
    pub entity_id: String,
    pub at_time: f64,
    /// Time of the last visible event; the gap is measured from here.
    pub anchor_time: f64,
    pub main_type: String,
    pub sub_type: String,
    pub gap_days: f64,
    pub predicted_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main_probs: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_probs: Option<BTreeMap<String, f64>>,
}

pub fn predict(args: &PredictArgs) -> Result<NextEvent> {
    ensure!(args.at_time.is_finite(), "--at must be finite");
    require_file(&args.checkpoint)?;
    let ck = Checkpoint::load(&args.checkpoint)?;
    let tax = &ck.taxonomy;
    let log = parse_event_log(open(&args.events)?, tax)
        .with_context(|| args.events.display().to_string())?;
    let events = log.entities.get(&args.entity).with_context(|| {
        format!(
            "entity {} not found in {}",
            args.entity,
            args.events.display()
        )
    })?;
    let visible = events.partition_point(|e| e.time <= args.at_time);
    if visible == 0 {
        bail!(
            "insufficient history: entity {} has no events at or before t = {}",
            args.entity,
            args.at_time
        );
    }
    let anchor = events[visible - 1].time;
    let history = &events[..visible];

    let features = || -> Result<Sample> {
        let path = args
            .profiles
            .as_ref()
            .context("--profiles is required for this checkpoint")?;
        let profiles = parse_profiles(open(path)?).with_context(|| path.display().to_string())?;
        let z = ck.normalization.apply(profiles.get(&args.entity)?)?;
        let (ts_window, event_window) =
            window_features(history, anchor, &z, &ck.window, tax.k_sub());
        // targets are placeholders; only the inputs are read
        Ok(Sample {
            ts_window,
            event_window,
            target_main: 0,
            target_sub: 0,
            target_gap: 1.0,
        })
    };
    let named = |names: Vec<String>, p: &[f64]| {
        names
            .into_iter()
            .zip(p.iter().copied())
            .collect::<BTreeMap<_, _>>()
    };

    let (pred, main_probs, sub_probs) = match &ck.predictor {
        Predictor::Rnn { .. } => {
            let net = ck.network()?.expect("rnn checkpoint");
            let s = features()?;
            let out = net.forward(&s)?;
            let p = net.predict_next(&s)?;
            (
                Prediction {
                    main: p.main_type,
                    sub: p.sub_type,
                    gap: p.gap_days,
                },
                Some(named(tax.main_names(), out.main_probs.as_slice())),
                Some(named(tax.sub_names(), out.sub_probs.as_slice())),
            )
        }
        Predictor::Logistic { models } => {
            let (main, sub, gap) = predict_logistic(models, &features()?)?;
            (Prediction { main, sub, gap }, None, None)
        }
        Predictor::Hawkes { params, .. } => {
            let h = &ck.config.hawkes;
            let hist = sequence(history, anchor)?;
            let seed = args.seed.unwrap_or(ck.config.seed);
            let (sub, gap) =
                hawkes_predict_next(params, &hist, anchor, h.rollouts, h.max_gap_days, seed)?;
            (
                Prediction {
                    main: tax.parents()[sub],
                    sub,
                    gap,
                },
                None,
                None,
            )
        }
    };
    Ok(NextEvent {
        entity_id: args.entity.clone(),
        at_time: args.at_time,
        anchor_time: anchor,
        main_type: tax.main_names()[pred.main].clone(),
        sub_type: tax.sub_names()[pred.sub].clone(),
        gap_days: pred.gap,
        predicted_time: anchor + pred.gap,
        main_probs,
        sub_probs,
    })
}
