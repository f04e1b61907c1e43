use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity mismatch: operation takes {expected} inputs, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("insertion position {position} out of range for arity {arity}")]
    PositionOutOfRange { position: usize, arity: usize },
    #[error("degree mismatch in {entry}: expected output degree {expected}, found {found}")]
    DegreeMismatch { entry: String, expected: i64, found: i64 },
    #[error("operation {op} has intrinsic degree {found}, expected {expected}")]
    IntrinsicDegree { op: String, expected: i64, found: i64 },
    #[error("filtration violated in {0}")]
    FiltrationViolation(String),
    #[error("operation arity {arity} exceeds support bound {kmax}")]
    BeyondSupport { arity: usize, kmax: usize },
    #[error("structure has no unit")]
    MissingUnit,
    #[error("element is not nilpotent")]
    NotNilpotent,
    #[error("element must be homogeneous of degree {expected}")]
    WrongDegree { expected: i64 },
    #[error("algebra is not strictly unital")]
    NotUnital,
    #[error("input is not a dg algebra (higher operations or curvature present)")]
    NotDg,
    #[error("filtrations are not strictly compatible: {0}")]
    NotStrictlyCompatible(String),
    #[error("x -> n1(x; u) is not an isomorphism (determinant {det})")]
    NotIsomorphism { det: BigInt },
    #[error("x -> n1(x; u) is not filtration preserving: {0}")]
    NotFiltrationPreserving(String),
    #[error("n0(u) does not strictly increase filtration: {0}")]
    N0DoesNotIncrease(String),
    #[error("no bounding cochain: {0}")]
    NoSolution(String),
    #[error("nilpotency sweep did not terminate within the filtration bound")]
    Divergence,
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("colour mismatch at connection {0}")]
    ColorMismatch(usize),
    #[error("bad connection: {0}")]
    BadConnection(String),
    #[error("not a complex: d∘d != 0 at degree {0}")]
    NotAComplex(i64),
    #[error("not a chain map at degree {0}")]
    NotChainMap(i64),
    #[error("directed system does not commute: {0}")]
    SystemNotCommuting(String),
    #[error("cohomology has torsion; a free model is required here")]
    TorsionInCohomology,
    #[error("matrix dimensions do not match: {0}")]
    Shape(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}
