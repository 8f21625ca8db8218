//! Classical states: the records of measurement outcomes that index a
//! program's semi-classical semantics.

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("classical variable '{0}' assigned twice")]
    DomainClash(String),
    #[error("superposition of zero states")]
    EmptySuperposition,
}

/// Built only through the smart constructors, which keep concatenation
/// right-associated and free of empty states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassicalState {
    Empty,
    Assign { var: String, label: String },
    Concat(Box<ClassicalState>, Box<ClassicalState>),
    Superpose(Vec<ClassicalState>),
}

impl ClassicalState {
    pub fn assign(var: &str, label: &str) -> Self {
        ClassicalState::Assign { var: var.into(), label: label.into() }
    }

    pub fn concat(a: &ClassicalState, b: &ClassicalState) -> Result<Self, StateError> {
        if let Some(x) = a.dom().intersection(&b.dom()).next() {
            return Err(StateError::DomainClash(x.clone()));
        }
        Ok(Self::concat_unchecked(a, b))
    }

    fn concat_unchecked(a: &ClassicalState, b: &ClassicalState) -> Self {
        match (a, b) {
            (ClassicalState::Empty, _) => b.clone(),
            (_, ClassicalState::Empty) => a.clone(),
            (ClassicalState::Concat(l, r), _) => {
                ClassicalState::Concat(l.clone(), Box::new(Self::concat_unchecked(r, b)))
            }
            _ => ClassicalState::Concat(Box::new(a.clone()), Box::new(b.clone())),
        }
    }

    pub fn superpose(states: Vec<ClassicalState>) -> Result<Self, StateError> {
        if states.is_empty() {
            return Err(StateError::EmptySuperposition);
        }
        Ok(ClassicalState::Superpose(states))
    }

    pub fn dom(&self) -> BTreeSet<String> {
        match self {
            ClassicalState::Empty => BTreeSet::new(),
            ClassicalState::Assign { var, .. } => BTreeSet::from([var.clone()]),
            ClassicalState::Concat(a, b) => a.dom().union(&b.dom()).cloned().collect(),
            ClassicalState::Superpose(v) => v.iter().flat_map(|s| s.dom()).collect(),
        }
    }

    /// Value of `x`, or `None` when undefined. Lookups do not descend into
    /// superpositions.
    pub fn eval_at(&self, x: &str) -> Option<&str> {
        match self {
            ClassicalState::Assign { var, label } if var == x => Some(label),
            ClassicalState::Concat(a, b) => a.eval_at(x).or_else(|| b.eval_at(x)),
            _ => None,
        }
    }

    /// Deterministic serialization used as a table key and in output.
    pub fn label(&self) -> String {
        match self {
            ClassicalState::Empty => "eps".into(),
            ClassicalState::Assign { var, label } => format!("{var}<-{label}"),
            ClassicalState::Concat(a, b) => format!("({}.{})", a.label(), b.label()),
            ClassicalState::Superpose(v) => {
                format!("({})", v.iter().map(|s| s.label()).collect::<Vec<_>>().join("(+)"))
            }
        }
    }
}

impl fmt::Display for ClassicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
