//! Temporal knowledge representation and reasoning for procedural texts.
//!
//! Recipes are parsed from a small line-oriented format (or from TimeML-style
//! markup), compiled into qualitative (Allen, INDU), metric (simple temporal
//! problem) and hybrid constraint networks, checked for consistency, adapted
//! by revision when domain knowledge is injected, and exported as workflow
//! graphs.

pub mod adaptation;
pub mod allen;
pub mod annotation;
pub mod indu;
pub mod metric;
pub mod network;
pub mod recipe;
pub mod workflow;

pub use allen::{BaseRelation, Qcn, Relation};
pub use network::{Closure, Network, NetworkError, RelationAlgebra};
