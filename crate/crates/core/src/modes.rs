//! Mode bookkeeping: named optical modes with a fixed basis order, and
//! per-mode photon occupation vectors.
//!
//! A [`ModeRegistry`] pins the order in which mode labels appear in every
//! occupation vector, so two states can only be combined when they agree on
//! the registry. Occupations are plain photon counts; the dual-rail encoding
//! used throughout the protocol stores one logical particle as `(1,0)` vs
//! `(0,1)` on a pair of rails.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered collection of unique mode names. The index of a name is stable for
/// the registry's lifetime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl ModeRegistry {
    /// Creates a registry from an ordered list of distinct, non-empty names.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Config(
                "mode registry must contain at least one mode".into(),
            ));
        }
        Self::from_names(names)
    }

    /// Shared-pointer convenience for the common construction pattern.
    pub fn shared<I, S>(names: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(names).map(Arc::new)
    }

    /// Builds a registry without the non-empty restriction. Measuring every
    /// mode of a state leaves a conditional on zero modes, which is
    /// represented as a registry of size 0 holding a single scalar term.
    pub(crate) fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Config("mode name must not be empty".into()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate mode name `{name}`")));
            }
        }
        Ok(Self { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Index lookup that reports unknown names as configuration errors.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::Config(format!("unknown mode name `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Registry with the same order but the listed positions removed.
    pub(crate) fn without(&self, removed: &[usize]) -> Result<Self> {
        let keep: Vec<String> = self
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, n)| n.clone())
            .collect();
        Self::from_names(keep)
    }

    /// Registry with names replaced according to `rename` (position order is
    /// preserved). Names not listed are kept as-is.
    pub fn renamed(&self, rename: &std::collections::BTreeMap<String, String>) -> Result<Self> {
        for old in rename.keys() {
            if !self.contains(old) {
                return Err(Error::Config(format!(
                    "unknown mode name `{old}` in rename map"
                )));
            }
        }
        let names: Vec<String> = self
            .names
            .iter()
            .map(|n| rename.get(n).cloned().unwrap_or_else(|| n.clone()))
            .collect();
        Self::from_names(names)
    }
}

/// Photon counts, one per registry mode, in registry order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(Vec<u32>);

impl Occupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    /// All-vacuum occupation of the given width.
    pub fn vacuum(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, index: usize) -> u32 {
        self.0[index]
    }

    /// Total photon number carried by this occupation.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub(crate) fn set(&mut self, index: usize, value: u32) {
        self.0[index] = value;
    }

    /// Occupation restricted to the listed positions, in the listed order.
    pub(crate) fn select(&self, positions: &[usize]) -> Occupation {
        Occupation(positions.iter().map(|&i| self.0[i]).collect())
    }

    /// Occupation with the listed positions dropped.
    pub(crate) fn without(&self, removed: &[usize]) -> Occupation {
        Occupation(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !removed.contains(i))
                .map(|(_, &c)| c)
                .collect(),
        )
    }
}

impl From<Vec<u32>> for Occupation {
    fn from(counts: Vec<u32>) -> Self {
        Self(counts)
    }
}

impl From<&[u32]> for Occupation {
    fn from(counts: &[u32]) -> Self {
        Self(counts.to_vec())
    }
}

impl<const N: usize> From<[u32; N]> for Occupation {
    fn from(counts: [u32; N]) -> Self {
        Self(counts.to_vec())
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "⟩")
    }
}
