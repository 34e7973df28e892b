//! Context schemas, instances, assertions, and relevance filtering.
//!
//! The wildcard [`ALL`] stays symbolic: an assertion that leaves an element
//! unconstrained expands to a single instance slot `All`, not to every
//! domain value.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::GoalModel;
use crate::preference::{BoundCatalogue, ContextualPreference};

/// Reserved wildcard token.
pub const ALL: &str = "All";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContextError {
    #[error("context element `{0}` is declared more than once")]
    DuplicateElement(String),
    #[error("value `{value}` appears more than once in the domain of `{element}`")]
    DuplicateValue { element: String, value: String },
    #[error("context element `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("`All` is reserved and cannot be a value of `{0}`")]
    ReservedToken(String),
    #[error("`{0}` is not a valid context identifier")]
    InvalidIdentifier(String),
    #[error("unknown context element `{0}`")]
    UnknownElement(String),
    #[error("`{value}` is not in the domain of `{element}`")]
    UnknownValue { element: String, value: String },
    #[error("situation has no value for `{0}`")]
    MissingElement(String),
    #[error("`{0}` is given more than once")]
    RepeatedElement(String),
    #[error("a situation cannot use the wildcard `All` (element `{0}`)")]
    WildcardForbidden(String),
    #[error("instance arity {found} does not match schema arity {expected}")]
    ArityMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextElement {
    pub name: String,
    pub domain: Vec<String>,
}

impl ContextElement {
    pub fn has_value(&self, v: &str) -> bool {
        self.domain.iter().any(|d| d == v)
    }
}

/// An ordered list of context elements with finite domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextSchema {
    elements: Vec<ContextElement>,
}

impl ContextSchema {
    pub fn new(elements: Vec<ContextElement>) -> Result<Self, ContextError> {
        let mut names = BTreeSet::new();
        for el in &elements {
            if !crate::is_identifier(&el.name) {
                return Err(ContextError::InvalidIdentifier(el.name.clone()));
            }
            if !names.insert(el.name.as_str()) {
                return Err(ContextError::DuplicateElement(el.name.clone()));
            }
            if el.domain.is_empty() {
                return Err(ContextError::EmptyDomain(el.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for v in &el.domain {
                if v == ALL {
                    return Err(ContextError::ReservedToken(el.name.clone()));
                }
                if !crate::is_identifier(v) {
                    return Err(ContextError::InvalidIdentifier(v.clone()));
                }
                if !seen.insert(v.as_str()) {
                    return Err(ContextError::DuplicateValue {
                        element: el.name.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ContextElement] {
        &self.elements
    }

    pub fn arity(&self) -> usize {
        self.elements.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.name == name)
    }

    pub fn element(&self, name: &str) -> Option<&ContextElement> {
        self.elements.iter().find(|e| e.name == name)
    }

    /// Number of concrete situations, saturating.
    pub fn world_size(&self) -> u128 {
        self.elements
            .iter()
            .fold(1u128, |acc, e| acc.saturating_mul(e.domain.len() as u128))
    }
}

/// One slot of a context instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextValue {
    All,
    Is(String),
}

impl ContextValue {
    pub fn as_str(&self) -> &str {
        match self {
            ContextValue::All => ALL,
            ContextValue::Is(v) => v,
        }
    }
}

impl fmt::Display for ContextValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A tuple of values, one per schema element, possibly containing `All`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextInstance(pub Vec<ContextValue>);

impl ContextInstance {
    pub fn new(schema: &ContextSchema, values: Vec<ContextValue>) -> Result<Self, ContextError> {
        if values.len() != schema.arity() {
            return Err(ContextError::ArityMismatch {
                expected: schema.arity(),
                found: values.len(),
            });
        }
        for (el, v) in schema.elements.iter().zip(&values) {
            if let ContextValue::Is(v) = v {
                if !el.has_value(v) {
                    return Err(ContextError::UnknownValue {
                        element: el.name.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        Ok(Self(values))
    }

    /// Parses slots given as plain strings, `"All"` being the wildcard.
    pub fn from_strs(schema: &ContextSchema, values: &[&str]) -> Result<Self, ContextError> {
        Self::new(
            schema,
            values
                .iter()
                .map(|v| {
                    if *v == ALL {
                        ContextValue::All
                    } else {
                        ContextValue::Is((*v).to_string())
                    }
                })
                .collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for ContextInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// A fully concrete context instance, with element names attached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Situation {
    entries: Vec<(String, String)>,
}

impl Situation {
    /// Builds a situation from values listed in schema order.
    pub fn new(schema: &ContextSchema, values: &[&str]) -> Result<Self, ContextError> {
        if values.len() != schema.arity() {
            return Err(ContextError::ArityMismatch {
                expected: schema.arity(),
                found: values.len(),
            });
        }
        let pairs: Vec<(&str, &str)> = schema
            .elements
            .iter()
            .map(|e| e.name.as_str())
            .zip(values.iter().copied())
            .collect();
        Self::from_pairs(schema, &pairs)
    }

    /// Builds a situation from `(element, value)` pairs in any order. Every
    /// element must appear exactly once.
    pub fn from_pairs(
        schema: &ContextSchema,
        pairs: &[(&str, &str)],
    ) -> Result<Self, ContextError> {
        let mut given: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, value) in pairs {
            let el = schema
                .element(name)
                .ok_or_else(|| ContextError::UnknownElement(name.to_string()))?;
            if *value == ALL {
                return Err(ContextError::WildcardForbidden(el.name.clone()));
            }
            if !el.has_value(value) {
                return Err(ContextError::UnknownValue {
                    element: el.name.clone(),
                    value: value.to_string(),
                });
            }
            if given.insert(name, value).is_some() {
                return Err(ContextError::RepeatedElement(name.to_string()));
            }
        }
        let mut entries = Vec::with_capacity(schema.arity());
        for el in &schema.elements {
            match given.get(el.name.as_str()) {
                Some(v) => entries.push((el.name.clone(), v.to_string())),
                None => return Err(ContextError::MissingElement(el.name.clone())),
            }
        }
        Ok(Self { entries })
    }

    /// `(element, value)` pairs in schema order.
    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn value(&self, element: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(n, _)| n == element)
            .map(|(_, v)| v.as_str())
    }

    /// Returns a copy with one element changed. The value is not checked
    /// against the schema.
    pub fn with(&self, element: &str, value: &str) -> Self {
        let mut s = self.clone();
        for (n, v) in &mut s.entries {
            if n == element {
                *v = value.to_string();
            }
        }
        s
    }

    pub fn instance(&self) -> ContextInstance {
        ContextInstance(
            self.entries
                .iter()
                .map(|(_, v)| ContextValue::Is(v.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.instance(), f)
    }
}

/// Conjunction of per-element assertions `element ∈ {values}`.
///
/// Elements absent from the map are unconstrained (`∈ {All}`); an explicit
/// `{All}` assertion is normalised away on insertion, so both spellings
/// compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CombinedAssertion {
    assertions: BTreeMap<String, BTreeSet<String>>,
}

impl CombinedAssertion {
    /// The all-`All` assertion.
    pub fn always() -> Self {
        Self::default()
    }

    /// Adds `element ∈ values`. A set containing only `All` leaves the
    /// element unconstrained. Returns false if the element was already
    /// asserted.
    pub fn assert<I, S>(&mut self, element: &str, values: I) -> bool
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if self.assertions.contains_key(element) {
            return false;
        }
        let set: BTreeSet<String> = values.into_iter().map(Into::into).collect();
        if !(set.len() == 1 && set.contains(ALL)) {
            self.assertions.insert(element.to_string(), set);
        }
        true
    }

    pub fn with<I, S>(mut self, element: &str, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.assert(element, values);
        self
    }

    pub fn is_always(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn get(&self, element: &str) -> Option<&BTreeSet<String>> {
        self.assertions.get(element)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> + '_ {
        self.assertions.iter()
    }

    /// True if some instance of this assertion implies the situation.
    ///
    /// Decided per element: every asserted set must contain the situation's
    /// value. Elements that are not part of the situation never match.
    pub fn matches(&self, situation: &Situation) -> bool {
        self.assertions
            .iter()
            .all(|(el, set)| situation.value(el).is_some_and(|v| set.contains(v)))
    }
}

/// Expands an assertion into its (wildcard-compressed) context instances.
///
/// The result has `Π |asserted set|` members. Unasserted elements hold
/// `All`.
pub fn expand_assertion(
    con: &CombinedAssertion,
    schema: &ContextSchema,
) -> BTreeSet<ContextInstance> {
    let mut partial: Vec<Vec<ContextValue>> = alloc::vec![Vec::with_capacity(schema.arity())];
    for el in &schema.elements {
        match con.get(&el.name) {
            None => {
                for p in &mut partial {
                    p.push(ContextValue::All);
                }
            }
            Some(set) => {
                let mut next = Vec::with_capacity(partial.len() * set.len());
                for p in &partial {
                    for v in set {
                        let mut q = p.clone();
                        q.push(ContextValue::Is(v.clone()));
                        next.push(q);
                    }
                }
                partial = next;
            }
        }
    }
    partial.into_iter().map(ContextInstance).collect()
}

/// `general` implies `specific` when every slot of `general` equals the
/// corresponding slot of `specific` or is `All`.
pub fn implies(
    general: &ContextInstance,
    specific: &ContextInstance,
) -> Result<bool, ContextError> {
    if general.arity() != specific.arity() {
        return Err(ContextError::ArityMismatch {
            expected: specific.arity(),
            found: general.arity(),
        });
    }
    Ok(general
        .0
        .iter()
        .zip(&specific.0)
        .all(|(g, s)| g == &ContextValue::All || g == s))
}

/// A preference selected for a situation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevantPreference<'a> {
    pub preference: &'a ContextualPreference,
    /// False when every in-model target of this preference gets a strictly
    /// higher score from another relevant preference, so it has no effect.
    pub effective: bool,
}

/// Selects the preferences of `catalogue` that apply to `situation` and to
/// `model`, in catalogue order.
///
/// A preference applies when one of its context instances implies the
/// situation and at least one of its action targets is a node of the model.
/// Actions on absent nodes are ignored (the binding step reports them).
pub fn relevant<'a>(
    catalogue: &'a BoundCatalogue,
    situation: &Situation,
    model: &GoalModel,
) -> Vec<RelevantPreference<'a>> {
    let selected: Vec<&ContextualPreference> = catalogue
        .preferences()
        .iter()
        .filter(|p| p.con.matches(situation))
        .filter(|p| p.actions.iter().any(|a| model.contains(a.target.as_str())))
        .collect();

    let mut best: BTreeMap<&str, u8> = BTreeMap::new();
    for p in &selected {
        for a in &p.actions {
            let e = best.entry(a.target.as_str()).or_insert(0);
            *e = (*e).max(p.score.get());
        }
    }
    selected
        .into_iter()
        .map(|p| {
            let effective = p.actions.iter().any(|a| {
                model.contains(a.target.as_str()) && best[a.target.as_str()] == p.score.get()
            });
            RelevantPreference {
                preference: p,
                effective,
            }
        })
        .collect()
}
