use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("operation requires a square-mode space (p = q)")]
    NotSquareAmbient,
    #[error("not a ternary ring of operators: {0}")]
    NotTro(String),
    #[error("subspace is not contained in the ambient space")]
    NotSubspace,
    #[error("subspace is not a ternary ideal")]
    NotTernaryIdeal,
    #[error("subspace is not an inner ideal")]
    NotInnerIdeal,
    #[error("ideal does not match Zq for its support projection (residual {residual:.3e})")]
    SupportMismatch { residual: f64 },
    #[error("map is not a ternary morphism (residual {residual:.3e})")]
    NotTernary { residual: f64 },
    #[error("element is not in the space (distance {distance:.3e})")]
    NotInSpace { distance: f64 },
    #[error("element is not a tripotent: {0}")]
    NotTripotent(String),
    #[error("tripotents live in different spaces")]
    SpaceMismatch,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("projection is not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },
    #[error("tripotents do not commute")]
    NotCommuting,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("the supremum does not exist (pair is not jointly dominated)")]
    SupDoesNotExist,
    #[error("formula result is not a tripotent (residual {residual:.3e})")]
    NotTripotentResult { residual: f64 },
    #[error("spectral norm {norm} exceeds one")]
    NormExceedsOne { norm: f64 },
    #[error("Peirce algebra axiom failed: {0}")]
    AlgebraAxiomFailure(String),
    #[error("range tripotent escapes the space (distance {distance:.3e})")]
    RangeEscape { distance: f64 },
    #[error("no support tripotent found after {attempts} attempts")]
    NoUnitaryFound { attempts: usize },
    #[error("element is not a contraction (norm {norm})")]
    NotContraction { norm: f64 },
    #[error("space is not a square-mode *-TRO")]
    NotStarTro,
    #[error("element is not central")]
    NotCentral,
    #[error("element is not selfadjoint")]
    NotSelfadjoint,
    #[error("tripotent is not maximal among central selfadjoint tripotents")]
    NotMaximal,
    #[error("cone generators do not span the space")]
    NotDenselySpanning,
    #[error("matrix is not in the restricted linking algebra: {0}")]
    NotInRestrictedLinking(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn is_internal_inconsistency(&self) -> bool {
        matches!(self, Error::InternalInconsistency(_))
    }

    /// Variant name, e.g. `"NotInSpace"`.
    pub fn kind(&self) -> String {
        format!("{self:?}")
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect()
    }
}
