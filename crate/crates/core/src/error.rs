use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimacs line {line}: {msg}")]
    Dimacs { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} budget exceeded: needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("{what} failed after {attempts} attempts")]
    RetriesExhausted { what: &'static str, attempts: usize },

    #[error("element {0} is not covered by any subset")]
    UncoverableElement(usize),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("strategy for prover {prover} has no answer for query {query}")]
    MissingAnswer { prover: usize, query: usize },

    #[error("artifact: {0}")]
    Artifact(String),

    #[error("stage `{stage}` failed (artifact {path}): {source}")]
    Stage {
        stage: &'static str,
        path: String,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Fails with [`Error::BudgetExceeded`] when `needed > limit`.
pub(crate) fn check_budget(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::BudgetExceeded {
            what,
            needed,
            limit,
        })
    } else {
        Ok(())
    }
}

/// Saturating `base^exp` in u128, used for budget arithmetic.
pub(crate) fn sat_pow(base: u128, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}
