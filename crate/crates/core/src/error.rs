use thiserror::Error;

/// Errors produced by the symmetry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid tolerance {name} = {value} (must lie in (0, 1))")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },

    /// The sum of the constraint matrices failed the positive-definiteness check.
    #[error("sum of constraint matrices not positive definite (smallest pivot {min_pivot:e})")]
    AssumptionViolated { min_pivot: f64 },

    #[error("singular matrix (zero diagonal entry at index {index})")]
    SingularMatrix { index: usize },

    #[error("matrix is not orthogonal (defect {defect:e})")]
    NotOrthogonal { defect: f64 },

    #[error("orthogonal matrix has negative determinant")]
    WrongComponent,

    #[error("{count} admissible constraint permutations exceed the budget of {cap}")]
    SearchBudgetExceeded { count: usize, cap: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid search option {name} = {value}")]
    InvalidSearchOption { name: &'static str, value: String },
}

pub type Result<T> = std::result::Result<T, Error>;
