use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctrlseq::config::ExperimentConfig;
use ctrlseq::error::AppError;
use ctrlseq::experiment::{
    load_fasta, load_fitness, load_motifs, resume_experiment, run_experiment, write_json, Experiment, RunOutcome,
};
use ctrlseq::motif::{
    bh_qvalues, reference_frequency, render_jaspar, scan_all_windows, FrequencyMode, ReferenceSelection,
    ScoringParams, DEFAULT_P_THRESHOLD,
};
use ctrlseq::policy::Policy;
use ctrlseq::reward::{evaluate_rewards, fit_kmer_oracle, Oracle};
use ctrlseq::synthetic::{benchmark_trainer_config, Landscape, LandscapeParams};
use ctrlseq::trainer::Variant;

#[derive(Parser)]
#[command(name = "ctrlseq", version, about = "Constrained policy optimization for regulatory DNA design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy from an experiment config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Run this many replicas and summarize mean and sd.
        #[arg(long)]
        seeds: Option<usize>,
        /// Overwrite an existing output directory.
        #[arg(long)]
        force: bool,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Scan FASTA sequences for motif hits (TSV on stdout).
    Scan {
        #[arg(long)]
        motifs: PathBuf,
        #[arg(long)]
        fasta: PathBuf,
        #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
        p_threshold: f64,
        /// Add Benjamini-Hochberg q-values computed over all scanned windows.
        #[arg(long)]
        qvalues: bool,
    },
    /// Motif frequency vector of high-target, low-off-target sequences.
    RefFreq {
        #[arg(long)]
        motifs: PathBuf,
        #[arg(long)]
        fitness: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long = "off", num_args = 0..)]
        off: Vec<String>,
        #[arg(long, default_value_t = 90.0)]
        percentile: f64,
        #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
        p_threshold: f64,
        #[arg(long)]
        presence: bool,
    },
    /// Fit a k-mer ridge-regression oracle to one fitness column.
    FitOracle {
        #[arg(long)]
        fitness: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        ridge: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Metrics of a FASTA batch under the oracles of a config.
    Eval {
        #[arg(long)]
        sequences: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a reference policy to a FASTA corpus.
    PretrainRef {
        #[arg(long)]
        fasta: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        pseudocount: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the synthetic two-cell landscape (motifs, oracles, config) to a directory.
    DemoLandscape {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

fn emit_json<T: serde::Serialize>(value: &T, output: Option<&Path>) -> Result<(), AppError> {
    match output {
        Some(p) => write_json(p, value),
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| AppError::Data(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_scan(motifs: &Path, fasta: &Path, p_threshold: f64, qvalues: bool) -> Result<(), AppError> {
    if !(p_threshold > 0.0 && p_threshold <= 1.0) {
        return Err(AppError::Config(format!("--p-threshold must lie in (0, 1], got {p_threshold}")));
    }
    let set = load_motifs(motifs, &ScoringParams::default())?;
    let records = load_fasta(fasta)?;
    let mut windows = Vec::new();
    for (name, seq) in &records {
        for m in set.motifs() {
            if seq.len() < m.width() {
                eprintln!("skipping {name}: shorter than motif {}", m.name());
                continue;
            }
            for h in scan_all_windows(seq, &m.pwm, &m.table)? {
                windows.push((name.as_str(), h));
            }
        }
    }
    let q = if qvalues && !windows.is_empty() {
        Some(bh_qvalues(&windows.iter().map(|(_, h)| h.p_value).collect::<Vec<_>>())?)
    } else {
        None
    };
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let io = |e: std::io::Error| AppError::io("stdout", e);
    writeln!(out, "sequence\tmotif\tposition\tstrand\tscore\tp_value\tq_value").map_err(io)?;
    for (i, (name, h)) in windows.iter().enumerate() {
        if h.p_value >= p_threshold {
            continue;
        }
        let qv = q.as_ref().map_or("NA".to_string(), |q| format!("{:.6e}", q[i]));
        writeln!(
            out,
            "{name}\t{}\t{}\t{}\t{:.6}\t{:.6e}\t{qv}",
            h.motif_name, h.position, h.strand, h.score, h.p_value
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

fn cmd_demo(out: &Path, force: bool) -> Result<(), AppError> {
    ctrlseq::experiment::prepare_dir(out, force)?;
    let landscape = Landscape::build(LandscapeParams::default())?;
    let motif_path = out.join("motifs.jaspar");
    std::fs::write(&motif_path, render_jaspar(&landscape.ppms)).map_err(|e| AppError::io(&motif_path, e))?;
    write_json(&out.join("target.json"), &Oracle::Motif(landscape.target.clone()).to_def())?;
    write_json(&out.join("off_target.json"), &Oracle::Motif(landscape.off_target.clone()).to_def())?;
    let config = ExperimentConfig {
        motifs: Some("motifs.jaspar".into()),
        scoring: ScoringParams::default(),
        reference_fasta: None,
        reference_policy: None,
        reference_pseudocount: 1.0,
        fitness: None,
        oracles: vec!["target.json".into(), "off_target.json".into()],
        deltas: vec![landscape.params.delta],
        q_real: None,
        output_dir: "run".into(),
        reward: Default::default(),
        trainer: benchmark_trainer_config(Variant::CtrlDna, 0),
        metrics: Default::default(),
        checkpoint_every: None,
    };
    write_json(&out.join("config.json"), &config)
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Train {
            config,
            seeds,
            force,
            resume,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = Experiment::load(cfg)?;
            if let Some(ckpt) = resume {
                if seeds.is_some() {
                    return Err(AppError::Config("--resume cannot be combined with --seeds".into()));
                }
                let m = resume_experiment(&exp, &ckpt, force)?;
                return emit_json(&m, None);
            }
            match run_experiment(&exp, seeds, force)? {
                RunOutcome::Single(m) => emit_json(&m, None),
                RunOutcome::Seeds(s) => emit_json(&s.mean, None),
            }
        }
        Command::Scan {
            motifs,
            fasta,
            p_threshold,
            qvalues,
        } => cmd_scan(&motifs, &fasta, p_threshold, qvalues),
        Command::RefFreq {
            motifs,
            fitness,
            target,
            off,
            percentile,
            p_threshold,
            presence,
        } => {
            let set = load_motifs(&motifs, &ScoringParams::default())?;
            let table = load_fitness(&fitness)?;
            let selection = ReferenceSelection {
                target,
                off_targets: off,
                percentile,
            };
            let mode = if presence { FrequencyMode::Presence } else { FrequencyMode::Counts };
            let fv = reference_frequency(&table.records, &selection, &set, p_threshold, mode)?;
            emit_json(&fv, None)
        }
        Command::FitOracle {
            fitness,
            label,
            k,
            ridge,
            output,
        } => {
            let table = load_fitness(&fitness)?;
            let oracle = fit_kmer_oracle(&table.records, &label, k, ridge)?;
            emit_json(&Oracle::Kmer(oracle).to_def(), output.as_deref())
        }
        Command::Eval { sequences, config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = Experiment::load(cfg)?;
            let batch: Vec<_> = load_fasta(&sequences)?.into_iter().map(|(_, s)| s).collect();
            let rewards = evaluate_rewards(&exp.spec, &batch)?;
            let m = exp.spec.m();
            let fitness: Vec<Vec<f64>> = rewards.iter().map(|r| r[..=m].to_vec()).collect();
            emit_json(&exp.metrics(&batch, &fitness)?, None)
        }
        Command::PretrainRef {
            fasta,
            k,
            pseudocount,
            output,
        } => {
            let corpus: Vec<_> = load_fasta(&fasta)?.into_iter().map(|(_, s)| s).collect();
            let policy = Policy::fit_reference_mle(&corpus, k, pseudocount)?;
            emit_json(&policy, output.as_deref())
        }
        Command::DemoLandscape { out, force } => cmd_demo(&out, force),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
