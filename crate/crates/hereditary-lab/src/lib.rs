//! Templates, subpattern counts, extremal search, distances and container
//! hypergraphs for hereditary properties of finite relational structures.

pub mod budget;
pub mod combin;
pub mod containers;
pub mod distance;
pub mod error;
pub mod extremal;
pub mod instances;
pub mod json;
pub mod property;
pub mod signature;
pub mod template;
pub mod types;
pub mod verify;

pub use budget::Budget;
pub use error::{LabError, Result};
pub use property::{ForbiddenEntry, HereditaryProperty, Mode};
pub use signature::{Signature, Structure};
pub use template::{Template, TypePool};
pub use types::{FactLayout, LocatedType, QfType, SyntacticDiagram};
