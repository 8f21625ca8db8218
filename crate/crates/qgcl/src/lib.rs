//! A workbench for QGCL, a quantum guarded-command language with quantum
//! alternation (`qif ... fiq`) and quantum choice.
//!
//! Programs are parsed from text, checked against the well-formedness
//! conditions of the language, and given two semantics: a semi-classical one
//! (an operator-valued function over classical measurement records) and a
//! purely quantum one (a channel in Kraus form). On top of that sit weakest
//! preconditions, equivalence checks, the algebraic laws, and a catalog of
//! coined quantum walks.

pub mod linalg;
pub mod registry;
pub mod state;
pub mod ovf;
pub mod syntax;
pub mod semantics;
pub mod wp;
pub mod laws;
pub mod walks;
pub mod random;
