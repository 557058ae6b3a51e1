use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("working-space budget exceeded at {label}: {charged} bits charged, {budget} bits allowed")]
    BudgetExceeded {
        label: String,
        charged: u64,
        budget: u64,
    },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("corrupt grammar: {0}")]
    CorruptGrammar(String),

    #[error("bigram occurs fewer than two times")]
    NotRepeated,

    #[error("text too short: need at least two symbols")]
    TooShort,
}
