//! Top-level error type and its process exit codes.

use crate::metrics::MetricError;
use crate::motif::MotifError;
use crate::policy::PolicyError;
use crate::reward::RewardError;
use crate::seq::SeqError;
use crate::trainer::TrainerError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl AppError {
    /// 2 config, 3 data, 4 numeric, 5 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) => 3,
            AppError::Numeric(_) => 4,
            AppError::Io { .. } => 5,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> Self {
        AppError::Io {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<SeqError> for AppError {
    fn from(e: SeqError) -> Self {
        match e {
            SeqError::Io(m) => AppError::Io {
                path: String::new(),
                message: m,
            },
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<MotifError> for AppError {
    fn from(e: MotifError) -> Self {
        match e {
            MotifError::Io(m) => AppError::Io {
                path: String::new(),
                message: m,
            },
            MotifError::InvalidThreshold(_) | MotifError::TooFewBins(_) | MotifError::InvalidBackground => {
                AppError::Config(e.to_string())
            }
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<PolicyError> for AppError {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::NonFiniteGradient => AppError::Numeric(e.to_string()),
            PolicyError::OrderTooLarge { .. } | PolicyError::InvalidPseudocount(_) => AppError::Config(e.to_string()),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<RewardError> for AppError {
    fn from(e: RewardError) -> Self {
        match e {
            RewardError::SingularSystem => AppError::Numeric(e.to_string()),
            RewardError::Motif(m) => m.into(),
            RewardError::InvalidSpec(_) | RewardError::InvalidRidge(_) | RewardError::InvalidK { .. } => {
                AppError::Config(e.to_string())
            }
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<TrainerError> for AppError {
    fn from(e: TrainerError) -> Self {
        match e {
            TrainerError::NonFiniteState(_) => AppError::Numeric(e.to_string()),
            TrainerError::InvalidConfig(_) => AppError::Config(e.to_string()),
            TrainerError::Policy(p) => p.into(),
            TrainerError::Reward(r) => r.into(),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<MetricError> for AppError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Motif(m) => m.into(),
            other => AppError::Data(other.to_string()),
        }
    }
}
