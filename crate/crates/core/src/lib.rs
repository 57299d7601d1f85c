//! Multimodal simulator of the elderly participant in the Find task.
//!
//! The crate covers the shared taxonomies and belief heuristic ([`domain`]),
//! the 76-column feature encoding ([`features`]), a rule-based ELD policy
//! ([`oracle`]), corpus handling and augmentation ([`corpus`]), the
//! three-head classifier ([`model`]), evaluation ([`eval`]) and the episode
//! environment ([`env`]).

pub mod domain;
pub mod env;
pub mod eval;
pub mod features;
pub mod model;
pub mod oracle;
pub mod corpus;
pub mod world;
