use thiserror::Error;

/// Errors produced by state construction and the geometric operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("amplitude vector has length {len}, expected 2^{num_qubits}")]
    BadDimension { len: usize, num_qubits: usize },

    #[error("state norm {norm} deviates from 1 by more than 1e-6")]
    NotNormalized { norm: f64 },

    #[error("qubit index {index} out of range 1..={num_qubits}")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("operation requires {expected} qubits, state has {actual}")]
    WrongQubitCount { expected: usize, actual: usize },

    #[error("local operator on slot {slot} is singular or too ill-conditioned")]
    SingularOperator { slot: usize },

    #[error("local operator on slot {slot} is not unitary and renormalization was not requested")]
    NonUnitaryOperator { slot: usize },

    #[error("lambda vector {lambdas:?} outside the admissible range [0, 1/2] at tolerance {tol}")]
    LambdaOutOfRange { lambdas: Vec<f64>, tol: f64 },

    #[error("point lies outside the Kirwan polytope (worst slack {worst_slack})")]
    OutsidePolytope { worst_slack: f64 },

    #[error("inconsistent marginal ranks {ranks:?}: impossible for an exact pure state")]
    InconsistentRanks { ranks: [usize; 3] },

    #[error("gradient flow became non-monotone at step {step} (increase {increase})")]
    NonMonotoneFlow { step: usize, increase: f64 },

    #[error("input vectors are not orthonormal (max deviation {deviation})")]
    NotOrthonormal { deviation: f64 },

    #[error("fiber dimension estimate requires at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("target does not lie on a single polygonal face with non-degenerate spectra: {reason}")]
    NotOnNondegenerateFace { reason: String },

    #[error("no maximally mixed marginal within tolerance {tol} (min lambda {min_lambda})")]
    NoDegenerateMarginal { tol: f64, min_lambda: f64 },

    #[error("two-qubit marginal is not half a rank-2 projector (eigenvalues {eigenvalues:?})")]
    NotHalfProjector { eigenvalues: Vec<f64> },

    #[error("no nonnegative solution of the canonical-form system (slacks {residual})")]
    NoCanonicalSolution { residual: f64 },

    #[error("malformed state file: {0}")]
    MalformedStateFile(String),
}
