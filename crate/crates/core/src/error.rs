use thiserror::Error;

/// Errors produced by the sparsification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("precondition N > 8k violated: update budget N = {budget}, 8k = {} (k = {k})", 8 * .k)]
    BudgetTooSmall { k: usize, budget: usize },

    #[error("k = {k} must be smaller than the working dimension {rank}")]
    InvalidK { k: usize, rank: usize },

    #[error("graph is disconnected ({components} connected components)")]
    Disconnected { components: usize },

    #[error("matrices do not share the same image: {0}")]
    IncompatibleKernels(String),

    #[error("rank-one update is singular: 1 + A^+ . vv^T = {denominator:e}")]
    SingularUpdate { denominator: f64 },

    #[error("{barrier} barrier violated: eigenvalue {eigenvalue:e} vs barrier {position:e}")]
    BarrierViolation {
        barrier: &'static str,
        eigenvalue: f64,
        position: f64,
    },

    #[error("potential difference {difference:e} too small to form the barrier gradient")]
    DegenerateGradient { difference: f64 },

    #[error(
        "no feasible update at step {step}: sum U_A.Y = {upper_sum:e}, \
         sum L_B.ZYZ = {lower_sum:e}, cost term = {cost_term:e}"
    )]
    InfeasibleStep {
        step: usize,
        upper_sum: f64,
        lower_sum: f64,
        cost_term: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("instance too large for exhaustive search: {subsets} subsets (limit {limit})")]
    TooLarge { subsets: u128, limit: u128 },
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularUpdate { .. }
                | Error::BarrierViolation { .. }
                | Error::DegenerateGradient { .. }
                | Error::InfeasibleStep { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
