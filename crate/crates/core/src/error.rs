use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("stage {stage}: cut count {r} is below 2")]
    CutTooSmall { stage: usize, r: i64 },

    #[error("stage {stage}: spacer count s[{index}] = {value} is negative")]
    NegativeSpacer {
        stage: usize,
        index: usize,
        value: i64,
    },

    #[error("stage {stage}: spacer vector has length {len}, expected r = {r}")]
    LengthMismatch { stage: usize, r: i64, len: usize },

    #[error("h0 must be positive, got {0}")]
    InvalidBaseHeight(i64),

    #[error("stage {0} cannot be produced by the extension rule")]
    StageUnavailable(usize),

    #[error("evaluation stage {requested} is below the level's stage {level_stage}")]
    StageTooLow {
        requested: usize,
        level_stage: usize,
    },

    #[error("height {height} is outside column C_{stage} (h = {column_height})")]
    LevelOutOfRange {
        stage: usize,
        height: i64,
        column_height: i64,
    },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("no witness within horizon: {0}")]
    HorizonExceeded(String),

    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("no partner stages between {from} and {to}")]
    NoPartnerStages { from: usize, to: usize },

    #[error("enumeration of {required} items exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("witness failed re-verification: {0}")]
    InvalidWitness(String),
}
