//! Errors mapped onto the process exit codes.

use std::fmt;

use cyclab::bergman::BergmanError;
use cyclab::corona::CoronaError;
use cyclab::growth::GrowthError;
use cyclab::pipeline::PipelineError;
use cyclab::series::SeriesError;
use cyclab::weights::WeightError;

#[derive(Debug)]
pub enum CliError {
    /// bad spec or failed validation (exit 1)
    Spec(String),
    /// numerical or horizon failure (exit 2)
    Numeric(String),
    /// a verification margin came out negative (exit 3)
    Margin(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Margin(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Spec(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Margin(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numeric(format!("json: {e}"))
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::BeyondHorizon { .. } | WeightError::NotEnoughRungs { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Spec(e.to_string()),
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Spec(e.to_string()),
        }
    }
}

impl From<BergmanError> for CliError {
    fn from(e: BergmanError) -> Self {
        match e {
            BergmanError::Weight(w) => w.into(),
            BergmanError::DegreesNotAscending
            | BergmanError::DegreeTooLarge { .. }
            | BergmanError::TailNeedsRoom { .. }
            | BergmanError::ShortGenerator { .. } => CliError::Spec(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<CoronaError> for CliError {
    fn from(e: CoronaError) -> Self {
        match e {
            CoronaError::Series(s) => s.into(),
            CoronaError::Bergman(b) => b.into(),
            CoronaError::MatchTooSmall { .. } | CoronaError::EmptyGrid => {
                CliError::Spec(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<GrowthError> for CliError {
    fn from(e: GrowthError) -> Self {
        match e {
            GrowthError::Weight(w) => w.into(),
            GrowthError::Quad(_) | GrowthError::Divergent { .. } | GrowthError::EmptyRegion { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Spec(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Weight(w) => w.into(),
            PipelineError::Growth(g) => g.into(),
            PipelineError::Corona(c) => c.into(),
            PipelineError::Bergman(b) => b.into(),
            ref p if p.is_numeric() => CliError::Numeric(e.to_string()),
            _ => CliError::Spec(e.to_string()),
        }
    }
}
