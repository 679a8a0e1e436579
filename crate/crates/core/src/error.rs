use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight matrix: {0}")]
    Matrix(String),

    #[error("invalid graph configuration: {0}")]
    Graph(String),

    /// A common positive left eigenvector cannot be certified for the sequence.
    /// A positive weight below the declared `eta`.
    #[error("Assumption 3 violated: {0}")]
    NonDegeneracy(String),

    #[error("Assumption 2 cannot be certified: {0}")]
    LeftEigenvector(String),

    #[error("invalid objective: {0}")]
    Objective(String),

    #[error("invalid constraint set: {0}")]
    Constraint(String),

    #[error("Dykstra projection did not converge after {sweeps} sweeps (last change {change:e})")]
    ProjectionDiverged { sweeps: usize, change: f64 },

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("invalid step schedule: {0}")]
    Schedule(String),

    #[error("invalid run configuration: {0}")]
    Run(String),

    #[error("non-finite state for agent {agent} at round {round}")]
    NonFinite { agent: usize, round: usize },

    #[error("oracle failure: {0}")]
    Oracle(String),

    /// One entry per failed check, already phrased for the user.
    #[error("validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
