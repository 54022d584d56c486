//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The lattice sphere has no points, so its average is undefined.
    #[error("the sphere |x|^2 = {radius_sq} in dimension {dim} has no lattice points")]
    EmptySphere { dim: usize, radius_sq: u64 },

    /// Enumeration was refused because the sphere is larger than the cap.
    #[error("sphere has {count} points, above the enumeration cap {cap}")]
    CapExceeded { count: String, cap: u64 },

    /// Adaptive quadrature ran out of its evaluation budget.
    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    /// A survey was requested outside the regime its bound is stated for.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("index {index} is outside the admissible range {lo}..={hi}")]
    Range { index: i64, lo: i64, hi: i64 },

    /// Estimated cost exceeds the configured budget.
    #[error("infeasible scale: estimated cost {cost:e} exceeds budget {budget:e}")]
    InfeasibleScale { cost: f64, budget: f64 },

    #[error("torus side {0} is odd; the half-period frequency shift is not a lattice frequency")]
    OddSide(usize),

    #[error("torus side {side} is not divisible by q = {q}")]
    IndivisibleSide { side: usize, q: u64 },

    #[error("field shape mismatch: {0}")]
    Shape(String),

    #[error("torus with {sites} sites exceeds the site budget {budget}")]
    MemoryBudget { sites: u128, budget: usize },

    #[error("input is not Hermitian (deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    /// The majorant solver hit its iteration budget. The best feasible
    /// point found so far is attached.
    #[error("order-interval solver stalled with duality gap {gap:e}")]
    SolverStall {
        gap: f64,
        best: Box<crate::ncmax::MajorantSolution>,
    },

    #[error("{0} and {1} are not coprime")]
    NotCoprime(i64, u64),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
