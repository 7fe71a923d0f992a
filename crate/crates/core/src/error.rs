use core::fmt;

/// Errors surfaced by the toolkit.
///
/// Numeric failures carry enough context to diagnose the offending call;
/// validation failures describe the rejected input.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An integral against a Lévy measure does not converge (e.g. a first
    /// moment against a small-jump piece of index `alpha >= 1`).
    DivergentIntegral { what: &'static str },
    /// The adaptive quadrature exhausted its subdivision budget before
    /// reaching the requested tolerance.
    QuadratureBudget { what: &'static str, estimate: f64 },
    /// A requested quantity cannot be expressed in the finitely
    /// parametrised measure family.
    NotRepresentable { what: &'static str },
    /// Triplets of different flavors (free vs classical) were combined.
    FlavorMismatch,
    /// Combinatorial order beyond the supported bound.
    OrderTooLarge { order: usize, max: usize },
    /// A transform was evaluated outside its half-plane domain.
    DomainError { what: &'static str },
    /// Fixed-point / eigenvalue iteration failed to converge within budget.
    NoConvergence { what: &'static str, residual: f64 },
    /// A set expression leaves the carrier of a seed field.
    OutOfCarrier,
    /// A factorizable basis was requested for the zero law.
    ZeroLaw,
    /// The supplied map is not strictly monotone on the carrier.
    NotInvertible,
    /// The integrand fails the integrability criterion.
    NotIntegrable,
    /// An atom law lacks the moments required by the operation.
    MissingMoments { what: &'static str },
    /// Positive-mode decomposition received a law with negative support.
    NegativeLawInPositiveMode { what: &'static str },
    /// A model marked diffuse carries control-measure atoms of positive mass.
    ModelNotDiffuse,
    /// The matrix handed to the eigensolver is not Hermitian.
    NotHermitian { deviation: f64 },
    /// Eigenvalue samples of different sizes were combined.
    SizeMismatch { left: usize, right: usize },
    /// Generic invalid input.
    Invalid { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DivergentIntegral { what } => write!(f, "divergent integral: {what}"),
            Error::QuadratureBudget { what, estimate } => {
                write!(f, "quadrature budget exhausted for {what} (estimate {estimate})")
            }
            Error::NotRepresentable { what } => write!(f, "not representable: {what}"),
            Error::FlavorMismatch => write!(f, "triplet flavors do not match"),
            Error::OrderTooLarge { order, max } => {
                write!(f, "order {order} exceeds supported bound {max}")
            }
            Error::DomainError { what } => write!(f, "outside transform domain: {what}"),
            Error::NoConvergence { what, residual } => {
                write!(f, "no convergence in {what} (residual {residual:e})")
            }
            Error::OutOfCarrier => write!(f, "set expression leaves the field carrier"),
            Error::ZeroLaw => write!(f, "the zero law admits no factorizable basis"),
            Error::NotInvertible => write!(f, "map is not strictly monotone on the carrier"),
            Error::NotIntegrable => write!(f, "integrand fails the integrability criterion"),
            Error::MissingMoments { what } => write!(f, "missing moments: {what}"),
            Error::NegativeLawInPositiveMode { what } => {
                write!(f, "law with negative support in positive mode: {what}")
            }
            Error::ModelNotDiffuse => {
                write!(f, "diffuse part carries control-measure atoms of positive mass")
            }
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (deviation {deviation:e})")
            }
            Error::SizeMismatch { left, right } => {
                write!(f, "sample sizes differ: {left} vs {right}")
            }
            Error::Invalid { what } => write!(f, "invalid input: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
