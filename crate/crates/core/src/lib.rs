//! Blocksworld planning benchmark harness.
//!
//! Generates Blocksworld instances, renders them in the Classic, Mystery
//! and Random vocabularies as plain-text or TMK-structured prompts,
//! extracts plans from model responses and validates them step by step.

pub mod bench;
pub mod cli;
pub mod domain;
pub mod extract;
pub mod gateway;
pub mod oracle;
pub mod prompts;
pub mod tmk;
pub mod vocabulary;

pub use domain::{
    apply_action, execute_plan, operator_schema, satisfies, Action, ActionKind, BlockId, Fact, GoalSpec, Instance,
    OperatorSchema, PlanFailure, Predicate, Rule, SchemaLiteral, StepError, Support, Trace, WorldState,
};
pub use vocabulary::{Variant, Vocabulary};
