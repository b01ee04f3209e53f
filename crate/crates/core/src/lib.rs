//! Integration of differential forms over singular simplices that are only
//! `C¹` on open faces: expressions, chains, forms, adaptive cubature, Stokes
//! checks, simplicial homology, period matrices and triangulation gluing.

pub mod chains;
pub mod expr;
pub mod forms;
pub mod glue;
pub mod homology;
pub mod periods;
pub mod quad;
pub mod stokes;

pub use chains::{Chain, ChainError, Embedding, MapError, Prism, SingularSimplex};
pub use expr::{parse, Expr, ParseError};
pub use forms::{Form, FormError};
pub use glue::{GlueError, GlueInput, GluedMap, Triangulation};
pub use homology::{homology, HomologyResult, IntegerCycle, SimplicialComplex};
pub use periods::{GeometricCycle, NamedForm, PeriodError, PeriodMatrix};
pub use quad::{QuadConfig, QuadError, QuadResult, Verdict, VolumeReport};
pub use stokes::{StokesError, StokesReport, StokesVerdict, Tolerance};
