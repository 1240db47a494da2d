//! Run orchestration: loads the inputs named by an [`ExperimentConfig`],
//! trains one or more replicas and writes their output files.
//!
//! A run directory holds `report.jsonl` (one line per iteration),
//! `final.fasta` (last batch), `metrics.json` and `checkpoint.json`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::AppError;
use crate::metrics::{compute_metrics, MetricsReport, MotifContext};
use crate::motif::{parse_jaspar, reference_frequency, FrequencyVector, MotifSet, ReferenceSelection};
use crate::policy::Policy;
use crate::reward::{Oracle, OracleDef, RewardSpec, TfbsReward};
use crate::seq::{parse_fasta, parse_fitness_tsv_infer, parse_sequence, render_fasta, FitnessTable, Sequence};
use crate::trainer::{replica_rng, StepOutput, Trainer, TrainerCheckpoint};

pub const REPORT_FILE: &str = "report.jsonl";
pub const FASTA_FILE: &str = "final.fasta";
pub const METRICS_FILE: &str = "metrics.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

fn open(path: &Path) -> Result<BufReader<File>, AppError> {
    File::open(path).map(BufReader::new).map_err(|e| AppError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, AppError> {
    serde_json::from_reader(open(path)?).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Data(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn load_motifs(path: &Path, scoring: &crate::motif::ScoringParams) -> Result<MotifSet, AppError> {
    let ppms = parse_jaspar(open(path)?)?;
    Ok(MotifSet::from_ppms(&ppms, scoring)?)
}

/// Sequences of a FASTA file (any lengths).
pub fn load_fasta(path: &Path) -> Result<Vec<(String, Sequence)>, AppError> {
    parse_fasta(open(path)?)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?
        .into_iter()
        .map(|(name, s)| {
            let len = s.len();
            parse_sequence(&s, len)
                .map(|seq| (name.clone(), seq))
                .map_err(|e| AppError::Data(format!("{}: record {name}: {e}", path.display())))
        })
        .collect()
}

pub fn load_fitness(path: &Path) -> Result<FitnessTable, AppError> {
    parse_fitness_tsv_infer(open(path)?).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

/// Everything a run needs, loaded once and shared by replicas.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: RewardSpec,
    pub reference: Policy,
    pub motifs: Option<Arc<MotifSet>>,
    pub q_real: Option<FrequencyVector>,
}

impl Experiment {
    pub fn load(config: ExperimentConfig) -> Result<Self, AppError> {
        let motifs = match &config.motifs {
            Some(p) => Some(Arc::new(load_motifs(p, &config.scoring)?)),
            None => None,
        };
        let oracles = config
            .oracles
            .iter()
            .map(|p| {
                let def: OracleDef = read_json(p)?;
                Oracle::from_def(&def, motifs.as_ref()).map_err(AppError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labels: Vec<String> = oracles.iter().map(|o| o.label().to_string()).collect();

        let q_real = match (&config.q_real, &config.fitness, &motifs) {
            (Some(p), _, _) => Some(read_json::<FrequencyVector>(p)?),
            (None, Some(f), Some(m)) => {
                let table = load_fitness(f)?;
                let selection = ReferenceSelection {
                    target: labels[0].clone(),
                    off_targets: labels[1..].to_vec(),
                    percentile: config.metrics.reference_percentile,
                };
                Some(reference_frequency(
                    &table.records,
                    &selection,
                    m,
                    config.metrics.p_threshold,
                    config.metrics.frequency_mode,
                )?)
            }
            _ => None,
        };
        if let (Some(q), Some(m)) = (&q_real, &motifs) {
            if q.motif_names != m.names() {
                return Err(AppError::Data("q_real motif names do not match the motif file".into()));
            }
        }

        let tfbs = if config.reward.tfbs {
            let m = motifs.clone().expect("validated");
            let q = q_real.clone().ok_or_else(|| AppError::Config("TFBS reward needs q_real".into()))?;
            Some(TfbsReward::new(m, q, config.reward.tfbs_p_threshold)?)
        } else {
            None
        };
        let spec = RewardSpec::new(oracles, config.deltas.clone(), tfbs)?;

        let order = config.trainer.order;
        let mut reference = match (&config.reference_policy, &config.reference_fasta) {
            (Some(p), _) => {
                let r: Policy = read_json(p)?;
                r.frozen_copy()
            }
            (None, Some(f)) => {
                let corpus: Vec<Sequence> = load_fasta(f)?.into_iter().map(|(_, s)| s).collect();
                Policy::fit_reference_mle(&corpus, order, config.reference_pseudocount)?
            }
            (None, None) => Policy::uniform(order)?,
        };
        if reference.order() != order {
            return Err(AppError::Config(format!(
                "reference policy has order {} but trainer.order is {order}",
                reference.order()
            )));
        }
        if config.trainer.position_offsets && reference.offsets().is_none() {
            reference.enable_position_offsets(config.trainer.length);
        }
        Ok(Experiment {
            config,
            spec,
            reference,
            motifs,
            q_real,
        })
    }

    pub fn labels(&self) -> Vec<String> {
        self.spec.labels()
    }

    /// Fresh trainer for replica `replica` (replica 0 is the plain run).
    pub fn trainer(&self, replica: u64) -> Result<Trainer, AppError> {
        let cfg = self.config.trainer.clone();
        let rng = replica_rng(cfg.seed, replica);
        Ok(Trainer::new(cfg, &self.spec, self.reference.clone(), self.reference.clone(), rng)?)
    }

    /// Metrics of a batch with its reward rows.
    pub fn metrics(&self, batch: &[Sequence], rewards: &[Vec<f64>]) -> Result<MetricsReport, AppError> {
        let labels = self.labels();
        let motif = match (&self.motifs, &self.q_real) {
            (Some(m), Some(q)) => Some(MotifContext {
                motifs: m,
                q_real: q,
                p_threshold: self.config.metrics.p_threshold,
                mode: self.config.metrics.frequency_mode,
            }),
            _ => None,
        };
        Ok(compute_metrics(&labels, batch, rewards, motif)?)
    }
}

/// Refuses to reuse a non-empty directory unless `force` is set.
pub fn prepare_dir(dir: &Path, force: bool) -> Result<(), AppError> {
    if dir.exists() {
        let non_empty = std::fs::read_dir(dir)
            .map_err(|e| AppError::io(dir, e))?
            .next()
            .is_some();
        if non_empty && !force {
            return Err(AppError::Config(format!(
                "output directory {} already exists (use --force to overwrite)",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

/// Steps `trainer` until it has completed `epochs` iterations, streaming
/// reports to `report`. Returns the last iteration's output.
pub fn drive<W: Write>(
    trainer: &mut Trainer,
    spec: &RewardSpec,
    epochs: usize,
    report: &mut W,
    mut on_step: impl FnMut(&Trainer) -> Result<(), AppError>,
) -> Result<Option<StepOutput>, AppError> {
    let mut last = None;
    while (trainer.step as usize) < epochs {
        let out = trainer.step(spec)?;
        let line = serde_json::to_string(&out.report).map_err(|e| AppError::Data(e.to_string()))?;
        writeln!(report, "{line}").map_err(|e| AppError::io(REPORT_FILE, e))?;
        on_step(trainer)?;
        last = Some(out);
    }
    Ok(last)
}

/// Trains `trainer` to completion inside `dir` and writes every output file.
pub fn run_in_dir(exp: &Experiment, mut trainer: Trainer, dir: &Path) -> Result<MetricsReport, AppError> {
    let report_path = dir.join(REPORT_FILE);
    let file = File::create(&report_path).map_err(|e| AppError::io(&report_path, e))?;
    let mut writer = BufWriter::new(file);
    let every = exp.config.checkpoint_every;
    let last = drive(&mut trainer, &exp.spec, exp.config.trainer.epochs, &mut writer, |t| {
        if let Some(n) = every {
            if t.step % n as u64 == 0 {
                write_json(&dir.join(format!("checkpoint_step{}.json", t.step)), &t.checkpoint())?;
            }
        }
        Ok(())
    })?;
    writer.flush().map_err(|e| AppError::io(&report_path, e))?;
    let last = last.ok_or_else(|| AppError::Config("nothing to run: epochs already completed".into()))?;

    let names: Vec<String> = (0..last.sequences.len()).map(|j| format!("seq_{j}")).collect();
    let fasta = render_fasta(names.iter().map(String::as_str).zip(&last.sequences));
    let fasta_path = dir.join(FASTA_FILE);
    std::fs::write(&fasta_path, fasta).map_err(|e| AppError::io(&fasta_path, e))?;

    let m = exp.spec.m();
    let fitness: Vec<Vec<f64>> = last.rewards.iter().map(|r| r[..=m].to_vec()).collect();
    let metrics = exp.metrics(&last.sequences, &fitness)?;
    write_json(&dir.join(METRICS_FILE), &metrics)?;
    write_json(&dir.join(CHECKPOINT_FILE), &trainer.checkpoint())?;
    Ok(metrics)
}

/// Mean and sample standard deviation of each scalar metric over replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub replicas: usize,
    pub seed: u64,
    pub mean: BTreeMap<String, f64>,
    pub sd: BTreeMap<String, f64>,
    pub per_replica: Vec<MetricsReport>,
}

/// Scalar view of a report, keyed by metric name.
pub fn flatten_metrics(r: &MetricsReport) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (l, v) in r.labels.iter().zip(&r.median_reward) {
        out.insert(format!("median_reward.{l}"), *v);
    }
    for (l, v) in r.labels.iter().zip(&r.mean_reward) {
        out.insert(format!("mean_reward.{l}"), *v);
    }
    if let Some(d) = r.delta_r {
        out.insert("delta_r".into(), d);
    }
    if let Some(c) = r.motif_correlation {
        out.insert("motif_correlation".into(), c);
    }
    out.insert("diversity_bits".into(), r.diversity_bits);
    out
}

pub fn summarize(seed: u64, reports: Vec<MetricsReport>) -> SeedSummary {
    let flat: Vec<BTreeMap<String, f64>> = reports.iter().map(flatten_metrics).collect();
    let n = flat.len() as f64;
    let mut mean = BTreeMap::new();
    let mut sd = BTreeMap::new();
    if let Some(first) = flat.first() {
        for key in first.keys() {
            let vals: Vec<f64> = flat.iter().filter_map(|f| f.get(key).copied()).collect();
            let m = vals.iter().sum::<f64>() / n;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            mean.insert(key.clone(), m);
            sd.insert(key.clone(), var.sqrt());
        }
    }
    SeedSummary {
        replicas: reports.len(),
        seed,
        mean,
        sd,
        per_replica: reports,
    }
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Single(MetricsReport),
    Seeds(SeedSummary),
}

pub fn replica_dir(root: &Path, replica: usize) -> PathBuf {
    root.join(format!("replica_{replica}"))
}

/// Runs the configured experiment once, or `seeds` replicas in parallel
/// with per-replica directories and a mean/sd summary at the top level.
pub fn run_experiment(exp: &Experiment, seeds: Option<usize>, force: bool) -> Result<RunOutcome, AppError> {
    let root = &exp.config.output_dir;
    prepare_dir(root, force)?;
    match seeds {
        None => {
            let trainer = exp.trainer(0)?;
            Ok(RunOutcome::Single(run_in_dir(exp, trainer, root)?))
        }
        Some(0) => Err(AppError::Config("--seeds must be at least 1".into())),
        Some(n) => {
            let reports = (0..n)
                .into_par_iter()
                .map(|i| {
                    let dir = replica_dir(root, i);
                    prepare_dir(&dir, force)?;
                    run_in_dir(exp, exp.trainer(i as u64)?, &dir)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let summary = summarize(exp.config.trainer.seed, reports);
            write_json(&root.join(METRICS_FILE), &summary)?;
            Ok(RunOutcome::Seeds(summary))
        }
    }
}

/// Continues a run from a checkpoint, writing the remaining iterations'
/// outputs into the configured output directory.
pub fn resume_experiment(exp: &Experiment, checkpoint: &Path, force: bool) -> Result<MetricsReport, AppError> {
    let c: TrainerCheckpoint = read_json(checkpoint)?;
    let trainer = Trainer::from_checkpoint(c)?;
    if trainer.lag.m() != exp.spec.m() {
        return Err(AppError::Config("checkpoint does not match the configured constraints".into()));
    }
    prepare_dir(&exp.config.output_dir, force)?;
    run_in_dir(exp, trainer, &exp.config.output_dir)
}
