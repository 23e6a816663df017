use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("targets must be distinct and in range: {0:?}")]
    Targets(Vec<usize>),
    #[error("too many qubits: {0} (cap is {cap})", cap = crate::quantum::MAX_QUBITS)]
    TooManyQubits(usize),
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("negative probability {0:e}")]
    NegativeProbability(f64),
    #[error("empty keep set")]
    EmptyKeep,
    #[error("unknown coherence set {0:?}")]
    UnknownCoherenceSet(String),
    #[error("no n_sc meets the floor")]
    NoNscMeetsFloor,
    #[error("empty grid")]
    EmptyGrid,
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("protocol syntax: {0}")]
    ProtocolSyntax(String),
    #[error("cut-off shorter than one attempt (t_cut={t_cut}, attempt={attempt})")]
    CutoffTooShort { t_cut: f64, attempt: f64 },
    #[error("normalization failure: total {0}")]
    Normalization(f64),
    #[error("table schema: {0}")]
    Schema(String),
    #[error("layout: {0}")]
    Layout(String),
    #[error("odd number of defects ({0})")]
    OddDefects(usize),
    #[error("too many defects for brute force: {count} > {max}")]
    TooManyDefects { count: usize, max: usize },
    #[error("no crossing")]
    NoCrossing,
    #[error("degenerate jacobian")]
    DegenerateJacobian,
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_prob(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Parameter { name, reason: format!("{p} not in [0,1]") })
    }
}
