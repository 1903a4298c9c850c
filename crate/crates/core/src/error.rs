use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("omega is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("more fields than modes (m = {m}, n = {n})")]
    TooManyFields { m: usize, n: usize },
    #[error("s = {s} lies on the spectrum of the drift matrix")]
    SingularResolvent { s: num_complex::Complex64 },
    #[error("time grid needs at least two samples")]
    EmptyGrid,
    #[error("time grid is not strictly increasing at index {0}")]
    NonMonotoneGrid(usize),
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("system is not minimal")]
    NotMinimal,
    #[error("operation requires a single-input single-output transfer function")]
    NotSiso,
    #[error("denominator is not monic")]
    NonMonic,
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },
    #[error("linear solver failed: {0}")]
    SolverSingular(String),
    #[error("transfer function is not realizable by a passive system (residual {residual:e})")]
    NotPassiveTf { residual: f64 },
    #[error("poles {0} and {1} are not separated")]
    DegenerateSpectrum(num_complex::Complex64, num_complex::Complex64),
    #[error("residue {0} is not a nonnegative real number")]
    NegativeResidue(num_complex::Complex64),
    #[error("coupling gram is singular")]
    RankDeficientCoupling,
    #[error("system is not stable (spectral abscissa {abscissa:e})")]
    NotStable { abscissa: f64 },
    #[error("insufficient data: {have} samples, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("least-squares problem is ill-conditioned (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name, used in CLI error objects.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::TooManyFields { .. } => "TooManyFields",
            Error::SingularResolvent { .. } => "SingularResolvent",
            Error::EmptyGrid => "EmptyGrid",
            Error::NonMonotoneGrid(_) => "NonMonotoneGrid",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::NotMinimal => "NotMinimal",
            Error::NotSiso => "NotSISO",
            Error::NonMonic => "NonMonic",
            Error::NotHurwitz { .. } => "NotHurwitz",
            Error::SolverSingular(_) => "SolverSingular",
            Error::NotPassiveTf { .. } => "NotPassiveTF",
            Error::DegenerateSpectrum(..) => "DegenerateSpectrum",
            Error::NegativeResidue(_) => "NegativeResidue",
            Error::RankDeficientCoupling => "RankDeficientCoupling",
            Error::NotStable { .. } => "NotStable",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::InvalidNetwork(_) => "InvalidNetwork",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
