use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("stage shape: {cuts} cuts but {spacers} spacer entries")]
    ScheduleShape { cuts: usize, spacers: usize },

    #[error("invalid stage: {cuts} cuts, at least 2 are required")]
    InvalidStage { cuts: usize },

    #[error("invalid stage range {from}..={to} (towers are numbered 1..={last})")]
    InvalidRange { from: usize, to: usize, last: usize },

    #[error("level {level} does not exist in tower {stage} (height {height})")]
    LevelOutOfRange { stage: usize, level: u64, height: u64 },

    #[error("height or offset overflowed 64 bits at stage {stage}")]
    Overflow { stage: usize },

    #[error("{required} occurrence offsets required, budget is {budget}")]
    Resource { required: u128, budget: u64 },

    #[error("shift {shift} leaves the truncation window of height {height}{}", factor_note(*factor))]
    OutOfWindow {
        shift: i128,
        height: u64,
        factor: Option<usize>,
    },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("degenerate pair family: dependent basis columns {columns:?}")]
    DegenerateFamily { columns: Vec<usize> },

    #[error("tower height {height} exceeds oracle limit {limit}")]
    OracleScale { height: u64, limit: u64 },
}

fn factor_note(factor: Option<usize>) -> String {
    match factor {
        Some(i) => alloc::format!(" (tensor factor {i})"),
        None => String::new(),
    }
}
