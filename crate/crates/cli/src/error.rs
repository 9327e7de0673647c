use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("{0}; rerun with --mode montecarlo")]
    Infeasible(nmcode::Error),

    #[error(transparent)]
    Core(nmcode::Error),
}

impl From<nmcode::Error> for CliError {
    fn from(e: nmcode::Error) -> Self {
        match e {
            nmcode::Error::Infeasible(_) => CliError::Infeasible(e),
            e => CliError::Core(e),
        }
    }
}
