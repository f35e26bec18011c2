use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {what} = {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("degenerate normalization bounds: F_min = F_max")]
    DegenerateBounds,

    #[error("post-selection impossible: control |0> has zero probability")]
    PostSelectionImpossible,

    #[error("retry budget of {budget} exhausted (success probability per attempt {p_success:e})")]
    RetriesExhausted { budget: u32, p_success: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
