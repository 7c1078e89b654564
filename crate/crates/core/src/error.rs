use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate pair: the two points coincide within tolerance")]
    DegeneratePair,
    #[error("no sign change of the bisector field found in {attempts} chord attempts")]
    EmptyIntersection { attempts: usize },
    #[error("only {found} of {requested} requested bisector samples found")]
    InsufficientSamples { found: usize, requested: usize },
    #[error("zero vector has no causal character")]
    ZeroVector,
    #[error("point is not in the Siegel domain interior (2Re(z1)+|z2|^2 = {0})")]
    NotInterior(f64),
    #[error("matrix does not preserve the Hermitian form (max deviation {0:e})")]
    FormViolation(f64),
    #[error("image is not a null vector (defect {0:e})")]
    LiftInconsistency(f64),
    #[error("vertices coincide")]
    CoincidentVertices,
    #[error("characteristic point: horizontal gradient norm {0:e} is below tolerance")]
    CharacteristicPoint(f64),
    #[error("fit did not converge: best rms residual {rms:e} after {evaluations} evaluations")]
    NoConvergence { rms: f64, evaluations: usize },
    #[error("no cell of the grid has a sign change")]
    EmptySurface,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
