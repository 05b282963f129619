//! Front-end readers: the recipe DSL and a TimeML subset.

mod dsl;
mod timeml;

use thiserror::Error;

use crate::recipe::RecipeError;

pub use dsl::{knowledge_to_dsl, parse_knowledge, parse_recipe_dsl, recipe_to_dsl, slug, KnowledgeDoc};
pub use timeml::{
    doc_to_hybrid, doc_to_qcn, parse_iso_duration, parse_timeml, AnnotatedDoc, Event, Instance, LinkEnd,
    Recurrence, RelTypeMap, Signal, Timex, TimexKind, Tlink,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("byte {offset}: {message}")]
    Markup { offset: usize, message: String },
    #[error("{source}")]
    Recipe { line: usize, source: RecipeError },
}
