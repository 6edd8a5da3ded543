use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("empty-set: point sets must be nonempty")]
    EmptySet,

    #[error("negative-base: power node applied to negative coordinate {value}")]
    NegativeBase { value: f64 },

    #[error("numeric: {0}")]
    Numeric(String),

    #[error("params: {0}")]
    Params(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("map: {0}")]
    Map(String),

    #[error("not a self-map: map {map} sends {input:?} to {image:?}, outside the domain")]
    NotSelfMap {
        map: usize,
        input: Vec<f64>,
        image: Vec<f64>,
    },

    #[error("no-pairs: sample contains no pair with positive distance")]
    NoPairs,

    #[error("parse: {0}")]
    Parse(String),

    #[error("word: index {index} out of range for a family of {family_size} maps")]
    Word { index: usize, family_size: usize },
}
