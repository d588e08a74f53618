use thiserror::Error;

use crate::ItemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented bound.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The item did not exist when the model was trained.
    #[error("item {item} is not scorable by a model trained on {horizon} items")]
    Unscorable { item: ItemId, horizon: usize },

    /// A quantity is undefined for the given input (zero variance, zero mass, ...).
    #[error("undefined: {0}")]
    Undefined(String),

    /// The simulation reached a state its invariants rule out.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("config error at key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
