//! Symbolic calculus for deformation invariants of smooth functions on
//! surfaces: groups built from wreath products, short exact sequences of such
//! groups, critical points of homogeneous polynomials, decorated Reeb graph
//! models and the recursion computing orbit fundamental groups.

pub mod error;
pub mod gen;
pub mod groupexpr;
pub mod orbitcalc;
pub mod polysym;
pub mod reebmodel;
pub mod seqcalc;
pub mod wreath;

pub use error::{GroupError, ModelError, OrbitError, PolyError, SeqError, WreathError};
pub use groupexpr::{GroupExpr, GroupFamily};
pub use orbitcalc::{compute, HomotopyDescriptor, OrbitResult};
pub use polysym::{classify, symmetry_index, CritType, HomogPoly, LinStab, Rotation};
pub use reebmodel::{Diagnostic, ReebModel, SurfaceKind, SurfaceSpec, Target, VertexKind};
pub use seqcalc::{SeqExpr, SeqFamily};
pub use wreath::{FiniteGroup, WreathElement, WreathShape};
