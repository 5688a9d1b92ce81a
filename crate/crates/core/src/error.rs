//! Error types. Every variant maps to a stable code string via `code()`.

use thiserror::Error;

use crate::reebmodel::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("wreath and cyclic parameters must be positive")]
    ZeroParameter,
    #[error("{0} has torsion; the invariant is defined only for torsion-free words")]
    Torsion(String),
    #[error("unknown group family {0:?}")]
    UnknownFamily(String),
}

impl GroupError {
    pub fn code(&self) -> &'static str {
        match self {
            GroupError::Parse { .. } | GroupError::ZeroParameter => "E_GROUP_PARSE",
            GroupError::Torsion(_) => "E_FAMILY",
            GroupError::UnknownFamily(_) => "E_UNKNOWN_FAMILY",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WreathError {
    #[error("element does not conform to shape: {0}")]
    Shape(String),
    #[error("not a subgroup: {0}")]
    Subgroup(String),
    #[error("section law fails: {0}")]
    Section(String),
    #[error("invalid multiplication table: {0}")]
    Table(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("element text: {0}")]
    Parse(String),
}

impl WreathError {
    pub fn code(&self) -> &'static str {
        match self {
            WreathError::Shape(_) => "E_SHAPE",
            WreathError::Subgroup(_) => "E_SUBGROUP",
            WreathError::Section(_) => "E_SECTION",
            WreathError::Table(_) => "E_TABLE",
            WreathError::Action(_) => "E_ACTION",
            WreathError::Parse(_) => "E_ELEMENT_PARSE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("wrong build: {0}")]
    Build(String),
    #[error("sequence script error: {0}")]
    Script(String),
}

impl SeqError {
    pub fn code(&self) -> &'static str {
        match self {
            SeqError::Build(_) => "E_BUILD",
            SeqError::Script(_) => "E_SEQ_PARSE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomial has a multiple factor; its zero set contains a line of critical points")]
    SquareFree,
    #[error("polynomial is identically zero")]
    Zero,
    #[error("degree 1 polynomial has no critical point at the origin")]
    NoCriticalPoint,
    #[error("polynomial is not homogeneous: found degrees {0} and {1}")]
    NotHomogeneous(u32, u32),
    #[error("polynomial parse error: {0}")]
    Parse(String),
}

impl PolyError {
    pub fn code(&self) -> &'static str {
        match self {
            PolyError::SquareFree => "E_SQUARE_FREE",
            PolyError::Zero => "E_ZERO_POLY",
            PolyError::NoCriticalPoint => "E_NO_CRITICAL_POINT",
            PolyError::NotHomogeneous(..) => "E_NOT_HOMOGENEOUS",
            PolyError::Parse(_) => "E_POLY_PARSE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model JSON: {0}")]
    Json(String),
    #[error("model failed validation with {} diagnostic(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("symmetry at leaf {leaf} cannot be inferred; annotate it or add ribbon data")]
    AmbiguousSymmetry { leaf: String },
    #[error("symmetry annotation at leaf {leaf} is inconsistent: {msg}")]
    BadAnnotation { leaf: String, msg: String },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::Json(_) => "E_MODEL_JSON",
            ModelError::Invalid(_) => "E_INVALID_MODEL",
            ModelError::AmbiguousSymmetry { .. } => "E_AMBIGUOUS_SYMMETRY",
            ModelError::BadAnnotation { .. } => "E_BAD_ANNOTATION",
            ModelError::UnknownVertex(_) => "E_UNKNOWN_VERTEX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unsupported surface: {0}")]
    UnsupportedSurface(String),
    #[error("X must contain a boundary circle on a disk or cylinder")]
    EmptyXOnDisk,
    #[error("X may only contain boundary circles for this computation; {0} is a point")]
    PointInX(String),
    #[error("torus symmetry parameters cannot be inferred: {0}")]
    UnannotatedTorusSymmetry(String),
    #[error("model is not one of the exceptional saddle-free cases")]
    NotExceptional,
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

impl OrbitError {
    pub fn code(&self) -> &'static str {
        match self {
            OrbitError::Model(e) => e.code(),
            OrbitError::UnsupportedSurface(_) => "E_UNSUPPORTED_SURFACE",
            OrbitError::EmptyXOnDisk => "E_EMPTY_X_ON_DISK",
            OrbitError::PointInX(_) => "E_POINT_IN_X",
            OrbitError::UnannotatedTorusSymmetry(_) => "E_UNANNOTATED_TORUS_SYMMETRY",
            OrbitError::NotExceptional => "E_NOT_EXCEPTIONAL",
            OrbitError::InternalInvariant(_) => "E_INTERNAL_INVARIANT",
            OrbitError::Seq(e) => e.code(),
        }
    }
}
