//! Belief values, belief sets and the condition language checked against them.

use std::cmp::Ordering;
use std::collections::btree_map;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single belief value.
///
/// This is a closed union: anything an agent believes must be expressible
/// with these variants, which keeps every belief set encodable. Pair and set
/// shapes are deliberately absent; [`Conditions`] uses them for ranges and
/// alternatives instead.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BeliefValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    List(Vec<BeliefValue>),
    Map(BeliefSet),
}

impl BeliefValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            BeliefValue::Int(i) => Some(*i as f64),
            BeliefValue::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            BeliefValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            BeliefValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            BeliefValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[BeliefValue]> {
        match self {
            BeliefValue::List(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&BeliefSet> {
        match self {
            BeliefValue::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, BeliefValue::Int(_) | BeliefValue::Real(_))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            BeliefValue::Bool(_) => "bool",
            BeliefValue::Int(_) => "int",
            BeliefValue::Real(_) => "real",
            BeliefValue::Text(_) => "text",
            BeliefValue::List(_) => "list",
            BeliefValue::Map(_) => "map",
        }
    }
}

// Int and Real compare by numeric value, so `Int(3) == Real(3.0)`.
impl PartialEq for BeliefValue {
    fn eq(&self, other: &Self) -> bool {
        use BeliefValue::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Int(a), Real(b)) | (Real(b), Int(a)) => (*a as f64) == *b,
            (Real(a), Real(b)) => a == b,
            (Text(a), Text(b)) => a == b,
            (List(a), List(b)) => a == b,
            (Map(a), Map(b)) => a == b,
            _ => false,
        }
    }
}

impl PartialOrd for BeliefValue {
    /// Ordering is only defined between numeric values (and, trivially,
    /// between two texts or two booleans).
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use BeliefValue::*;
        match (self, other) {
            (Int(a), Int(b)) => Some(a.cmp(b)),
            (Bool(a), Bool(b)) => Some(a.cmp(b)),
            (Text(a), Text(b)) => Some(a.cmp(b)),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) => a.partial_cmp(&b),
                _ => None,
            },
        }
    }
}

impl fmt::Display for BeliefValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeliefValue::Bool(b) => write!(f, "{b}"),
            BeliefValue::Int(i) => write!(f, "{i}"),
            BeliefValue::Real(r) => write!(f, "{r:?}"),
            BeliefValue::Text(s) => write!(f, "{s:?}"),
            BeliefValue::List(l) => {
                f.write_str("[")?;
                for (i, v) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            BeliefValue::Map(m) => write!(f, "{m}"),
        }
    }
}

impl From<bool> for BeliefValue {
    fn from(v: bool) -> Self {
        BeliefValue::Bool(v)
    }
}

impl From<i64> for BeliefValue {
    fn from(v: i64) -> Self {
        BeliefValue::Int(v)
    }
}

impl From<i32> for BeliefValue {
    fn from(v: i32) -> Self {
        BeliefValue::Int(v as i64)
    }
}

impl From<u32> for BeliefValue {
    fn from(v: u32) -> Self {
        BeliefValue::Int(v as i64)
    }
}

impl From<usize> for BeliefValue {
    fn from(v: usize) -> Self {
        BeliefValue::Int(v as i64)
    }
}

impl From<f64> for BeliefValue {
    fn from(v: f64) -> Self {
        BeliefValue::Real(v)
    }
}

impl From<&str> for BeliefValue {
    fn from(v: &str) -> Self {
        BeliefValue::Text(v.to_owned())
    }
}

impl From<String> for BeliefValue {
    fn from(v: String) -> Self {
        BeliefValue::Text(v)
    }
}

impl<T: Into<BeliefValue>> From<Vec<T>> for BeliefValue {
    fn from(v: Vec<T>) -> Self {
        BeliefValue::List(v.into_iter().map(Into::into).collect())
    }
}

impl From<BeliefSet> for BeliefValue {
    fn from(v: BeliefSet) -> Self {
        BeliefValue::Map(v)
    }
}

/// Error raised when a belief or condition is constructed with invalid data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("belief keys must be non-empty")]
    EmptyKey,
    #[error("range lower bound {lo} exceeds upper bound {hi}")]
    InvertedRange { lo: f64, hi: f64 },
    #[error("range bounds must not be NaN")]
    NanBound,
    #[error("one_of condition needs at least one alternative")]
    EmptyAlternatives,
}

/// String-keyed map of beliefs. Behaves like an ordinary associative map;
/// iteration order is the key order, which keeps encodings canonical.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<String, BeliefValue>",
    into = "BTreeMap<String, BeliefValue>"
)]
pub struct BeliefSet {
    entries: BTreeMap<String, BeliefValue>,
}

impl TryFrom<BTreeMap<String, BeliefValue>> for BeliefSet {
    type Error = BeliefError;

    fn try_from(entries: BTreeMap<String, BeliefValue>) -> Result<Self, Self::Error> {
        if entries.keys().any(|k| k.is_empty()) {
            return Err(BeliefError::EmptyKey);
        }
        Ok(BeliefSet { entries })
    }
}

impl From<BeliefSet> for BTreeMap<String, BeliefValue> {
    fn from(b: BeliefSet) -> Self {
        b.entries
    }
}

impl BeliefSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insert.
    ///
    /// Panics on an empty key; use [`BeliefSet::try_set`] for untrusted keys.
    pub fn with(mut self, key: impl Into<String>, value: impl Into<BeliefValue>) -> Self {
        self.set(key, value);
        self
    }

    /// Inserts or overwrites `key`. Panics on an empty key.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<BeliefValue>) {
        self.try_set(key, value).expect("belief keys must be non-empty");
    }

    pub fn try_set(
        &mut self,
        key: impl Into<String>,
        value: impl Into<BeliefValue>,
    ) -> Result<Option<BeliefValue>, BeliefError> {
        let key = key.into();
        if key.is_empty() {
            return Err(BeliefError::EmptyKey);
        }
        Ok(self.entries.insert(key, value.into()))
    }

    pub fn get(&self, key: &str) -> Option<&BeliefValue> {
        self.entries.get(key)
    }

    pub fn get_mut(&mut self, key: &str) -> Option<&mut BeliefValue> {
        self.entries.get_mut(key)
    }

    pub fn remove(&mut self, key: &str) -> Option<BeliefValue> {
        self.entries.remove(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, String, BeliefValue> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(BeliefValue::as_f64)
    }

    pub fn get_i64(&self, key: &str) -> Option<i64> {
        self.get(key).and_then(BeliefValue::as_i64)
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        self.get(key).and_then(BeliefValue::as_bool)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.get(key).and_then(BeliefValue::as_str)
    }

    pub fn get_list(&self, key: &str) -> Option<&[BeliefValue]> {
        self.get(key).and_then(BeliefValue::as_list)
    }
}

impl<'a> IntoIterator for &'a BeliefSet {
    type Item = (&'a String, &'a BeliefValue);
    type IntoIter = btree_map::Iter<'a, String, BeliefValue>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

impl fmt::Display for BeliefSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}

/// Inclusive numeric interval. Constructed only through [`Range::new`], so
/// `lo <= hi` always holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self, BeliefError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(BeliefError::NanBound);
        }
        if lo > hi {
            return Err(BeliefError::InvertedRange { lo, hi });
        }
        Ok(Range { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl TryFrom<(f64, f64)> for Range {
    type Error = BeliefError;

    fn try_from((lo, hi): (f64, f64)) -> Result<Self, Self::Error> {
        Range::new(lo, hi)
    }
}

impl From<Range> for (f64, f64) {
    fn from(r: Range) -> Self {
        (r.lo, r.hi)
    }
}

/// Non-empty list of acceptable values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BeliefValue>", into = "Vec<BeliefValue>")]
pub struct Alternatives(Vec<BeliefValue>);

impl Alternatives {
    pub fn new(values: Vec<BeliefValue>) -> Result<Self, BeliefError> {
        if values.is_empty() {
            return Err(BeliefError::EmptyAlternatives);
        }
        Ok(Alternatives(values))
    }

    pub fn values(&self) -> &[BeliefValue] {
        &self.0
    }
}

impl TryFrom<Vec<BeliefValue>> for Alternatives {
    type Error = BeliefError;

    fn try_from(v: Vec<BeliefValue>) -> Result<Self, Self::Error> {
        Alternatives::new(v)
    }
}

impl From<Alternatives> for Vec<BeliefValue> {
    fn from(a: Alternatives) -> Self {
        a.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConditionSpec {
    Exact(BeliefValue),
    Range(Range),
    OneOf(Alternatives),
}

impl ConditionSpec {
    pub fn exact(v: impl Into<BeliefValue>) -> Self {
        ConditionSpec::Exact(v.into())
    }

    pub fn range(lo: f64, hi: f64) -> Result<Self, BeliefError> {
        Range::new(lo, hi).map(ConditionSpec::Range)
    }

    /// `lo <= value`, unbounded above.
    pub fn at_least(lo: f64) -> Self {
        ConditionSpec::Range(Range::new(lo, f64::INFINITY).expect("bound must not be NaN"))
    }

    /// `value <= hi`, unbounded below.
    pub fn at_most(hi: f64) -> Self {
        ConditionSpec::Range(Range::new(f64::NEG_INFINITY, hi).expect("bound must not be NaN"))
    }

    pub fn one_of<T: Into<BeliefValue>>(values: Vec<T>) -> Result<Self, BeliefError> {
        Alternatives::new(values.into_iter().map(Into::into).collect()).map(ConditionSpec::OneOf)
    }

    /// Whether `value` (the belief, if present) satisfies this spec.
    pub fn is_satisfied_by(&self, value: Option<&BeliefValue>) -> bool {
        let Some(value) = value else {
            return false;
        };
        match self {
            ConditionSpec::Exact(expected) => value == expected,
            // Non-numeric beliefs simply fail a range.
            ConditionSpec::Range(r) => value.as_f64().is_some_and(|v| r.contains(v)),
            ConditionSpec::OneOf(alts) => alts.values().iter().any(|a| a == value),
        }
    }
}

/// A conjunction of per-belief conditions. The empty set is always satisfied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    entries: BTreeMap<String, ConditionSpec>,
}

impl Conditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, spec: ConditionSpec) -> Self {
        self.insert(key, spec);
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, spec: ConditionSpec) -> Option<ConditionSpec> {
        self.entries.insert(key.into(), spec)
    }

    pub fn remove(&mut self, key: &str) -> Option<ConditionSpec> {
        self.entries.remove(key)
    }

    pub fn get(&self, key: &str) -> Option<&ConditionSpec> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, String, ConditionSpec> {
        self.entries.iter()
    }

    /// True iff every entry is satisfied by `beliefs`. Absent beliefs fail.
    pub fn check(&self, beliefs: &BeliefSet) -> bool {
        self.entries
            .iter()
            .all(|(key, spec)| spec.is_satisfied_by(beliefs.get(key)))
    }

    /// Keys whose condition `beliefs` does not satisfy, for traces.
    pub fn failing<'a>(&'a self, beliefs: &'a BeliefSet) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(|(k, spec)| !spec.is_satisfied_by(beliefs.get(k)))
            .map(|(k, _)| k.as_str())
    }
}

/// Free-function form of [`Conditions::check`].
pub fn conditions_check(conditions: &Conditions, beliefs: &BeliefSet) -> bool {
    conditions.check(beliefs)
}
