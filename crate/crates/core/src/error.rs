use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("total mass {total} deviates from 1 beyond tolerance")]
    Normalization { total: f64 },

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("axis error: {0}")]
    Axis(String),

    /// A Markov chain required by a bound does not hold; `cmi` is the
    /// offending conditional mutual information in nats.
    #[error("Markov chain {chain} violated: CMI = {cmi:e} nats")]
    Markov { chain: String, cmi: f64 },

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("size guard: {0}")]
    Size(String),

    #[error("support error: {0}")]
    Support(String),
}

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}
