//! Contextual preferences, catalogues, and binding against a model/schema.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::context::{CombinedAssertion, ContextSchema, ALL};
use crate::ident::{NodeId, PreferenceId};
use crate::model::{GoalModel, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verb {
    /// Satisfy a hardgoal or softgoal.
    Satisfy,
    /// Perform a task.
    Perform,
}

impl Verb {
    pub fn keyword(self) -> &'static str {
        match self {
            Verb::Satisfy => "satisfy",
            Verb::Perform => "perform",
        }
    }

    pub fn accepts(self, kind: NodeKind) -> bool {
        match self {
            Verb::Perform => kind == NodeKind::Task,
            Verb::Satisfy => kind != NodeKind::Task,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub verb: Verb,
    pub target: NodeId,
}

impl Action {
    pub fn perform(target: NodeId) -> Self {
        Self {
            verb: Verb::Perform,
            target,
        }
    }

    pub fn satisfy(target: NodeId) -> Self {
        Self {
            verb: Verb::Satisfy,
            target,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.verb.keyword(), self.target)
    }
}

/// Preference score, an integer in `0..=10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(u8);

impl Score {
    pub const MAX: u8 = 10;

    pub fn new(v: i64) -> Option<Self> {
        (0..=Self::MAX as i64).contains(&v).then_some(Self(v as u8))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextualPreference {
    pub id: PreferenceId,
    pub actions: Vec<Action>,
    pub con: CombinedAssertion,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogueError {
    #[error("preference id `{0}` is used more than once")]
    DuplicateId(PreferenceId),
    #[error("preference `{0}` has no actions")]
    NoActions(PreferenceId),
}

/// A set of contextual preferences with unique ids, kept in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreferenceCatalogue {
    preferences: Vec<ContextualPreference>,
}

impl PreferenceCatalogue {
    pub fn new(preferences: Vec<ContextualPreference>) -> Result<Self, CatalogueError> {
        let mut ids = BTreeSet::new();
        for p in &preferences {
            if p.actions.is_empty() {
                return Err(CatalogueError::NoActions(p.id.clone()));
            }
            if !ids.insert(&p.id) {
                return Err(CatalogueError::DuplicateId(p.id.clone()));
            }
        }
        Ok(Self { preferences })
    }

    pub fn preferences(&self) -> &[ContextualPreference] {
        &self.preferences
    }

    pub fn get(&self, id: &str) -> Option<&ContextualPreference> {
        self.preferences.iter().find(|p| p.id == id)
    }

    pub fn len(&self) -> usize {
        self.preferences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preferences.is_empty()
    }

    /// Number of single-action preferences after splitting combined actions.
    pub fn action_count(&self) -> usize {
        self.preferences.iter().map(|p| p.actions.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BindError {
    #[error("preference `{preference}` asserts unknown context element `{element}`")]
    UnknownContextElement {
        preference: PreferenceId,
        element: String,
    },
    #[error(
        "preference `{preference}` asserts `{value}`, which is not in the domain of `{element}`"
    )]
    UnknownContextValue {
        preference: PreferenceId,
        element: String,
        value: String,
    },
    #[error("preference `{preference}`: `{verb}` cannot target {kind} `{target}`")]
    VerbKindMismatch {
        preference: PreferenceId,
        verb: &'static str,
        target: NodeId,
        kind: NodeKind,
    },
}

/// A binding failure, tagged with the position of the offending action or
/// assertion inside its preference so callers can attach source spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindDiagnostic {
    pub error: BindError,
    pub preference_index: usize,
}

impl fmt::Display for BindDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.error, f)
    }
}

/// A preference action whose target is not in the model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BindWarning {
    pub preference: PreferenceId,
    pub target: NodeId,
}

impl fmt::Display for BindWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} targets unknown node {}",
            self.preference, self.target
        )
    }
}

/// A catalogue checked against one model and schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCatalogue {
    catalogue: PreferenceCatalogue,
    warnings: Vec<BindWarning>,
}

impl BoundCatalogue {
    pub fn catalogue(&self) -> &PreferenceCatalogue {
        &self.catalogue
    }

    pub fn preferences(&self) -> &[ContextualPreference] {
        self.catalogue.preferences()
    }

    pub fn warnings(&self) -> &[BindWarning] {
        &self.warnings
    }
}

/// Checks a catalogue against a goal model and a context schema.
///
/// Context elements and values must exist in the schema. Action targets
/// that exist in the model must have a kind compatible with the verb;
/// targets missing from the model only produce warnings, so one catalogue
/// can be applied to fragments of the model it was written for.
pub fn bind(
    catalogue: &PreferenceCatalogue,
    model: &GoalModel,
    schema: &ContextSchema,
) -> Result<BoundCatalogue, Vec<BindDiagnostic>> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    for (idx, p) in catalogue.preferences().iter().enumerate() {
        let mut push = |error| {
            errors.push(BindDiagnostic {
                error,
                preference_index: idx,
            })
        };
        for (element, values) in p.con.iter() {
            match schema.element(element) {
                None => push(BindError::UnknownContextElement {
                    preference: p.id.clone(),
                    element: element.clone(),
                }),
                Some(el) => {
                    for v in values {
                        if v == ALL || !el.has_value(v) {
                            push(BindError::UnknownContextValue {
                                preference: p.id.clone(),
                                element: element.clone(),
                                value: v.clone(),
                            });
                        }
                    }
                }
            }
        }
        for a in &p.actions {
            match model.kind(a.target.as_str()) {
                None => warnings.push(BindWarning {
                    preference: p.id.clone(),
                    target: a.target.clone(),
                }),
                Some(kind) if !a.verb.accepts(kind) => push(BindError::VerbKindMismatch {
                    preference: p.id.clone(),
                    verb: a.verb.keyword(),
                    target: a.target.clone(),
                    kind,
                }),
                Some(_) => {}
            }
        }
    }
    if errors.is_empty() {
        Ok(BoundCatalogue {
            catalogue: catalogue.clone(),
            warnings,
        })
    } else {
        Err(errors)
    }
}

impl BoundCatalogue {
    /// Describes each warning as text.
    pub fn warning_messages(&self) -> Vec<String> {
        self.warnings.iter().map(|w| format!("{w}")).collect()
    }
}
