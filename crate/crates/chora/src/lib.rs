//! Tangle diagrams for emergent algebras: exact symbolic rewriting,
//! numerical evaluation in concrete models, and finite approximations of
//! zoom sequences between metric spaces.

pub mod scale;
pub mod models;
pub mod terms;
pub mod diagram;
pub mod evaluate;
pub mod rewrite;
pub mod sketch;
pub mod catalog;
pub mod atlas;
