//! Capability types, typed beliefs and the operators that keep a family of
//! beliefs a capability type structure.
//!
//! A capability is a small integer label (a search depth in every shipped
//! environment) drawn from a totally ordered [`CapabilitySet`]. Beliefs are
//! real vectors indexed by that set. In [`BeliefMode::Exact`] they hold
//! unnormalized likelihoods; in [`BeliefMode::Tempered`] they hold
//! accumulated losses.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A capability label. Larger is stronger.
pub type Capability = u32;

/// Absolute tolerance used when comparing beliefs for structure equality.
pub const STRUCTURE_TOLERANCE: f64 = 1e-9;

/// The totally ordered set of known capability types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Capability>", into = "Vec<Capability>")]
pub struct CapabilitySet {
    labels: Vec<Capability>,
}

impl CapabilitySet {
    pub fn new(labels: Vec<Capability>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyCapabilitySet);
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedCapabilities);
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Capability] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Capability {
        self.labels[index]
    }

    pub fn min(&self) -> Capability {
        self.labels[0]
    }

    pub fn max(&self) -> Capability {
        self.labels[self.labels.len() - 1]
    }

    pub fn contains(&self, c: Capability) -> bool {
        self.labels.binary_search(&c).is_ok()
    }

    pub fn index_of(&self, c: Capability) -> Result<usize> {
        self.labels.binary_search(&c).map_err(|_| Error::UnknownCapability(c))
    }

    /// The predecessor set `p(c) = {c' | c' <= c}` as a label slice.
    pub fn predecessors(&self, c: Capability) -> Result<&[Capability]> {
        let idx = self.index_of(c)?;
        Ok(&self.labels[..=idx])
    }

    /// Largest label not exceeding `level`, if any.
    pub fn floor(&self, level: u32) -> Option<Capability> {
        self.labels.iter().rev().copied().find(|&c| c <= level)
    }
}

impl TryFrom<Vec<Capability>> for CapabilitySet {
    type Error = Error;

    fn try_from(labels: Vec<Capability>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<CapabilitySet> for Vec<Capability> {
    fn from(set: CapabilitySet) -> Self {
        set.labels
    }
}

/// How the entries of a [`Belief`] are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeliefMode {
    /// Unnormalized likelihoods, updated multiplicatively.
    Exact,
    /// Accumulated losses, turned into likelihoods by a tempered softmax.
    Tempered,
}

impl BeliefMode {
    fn name(self) -> &'static str {
        match self {
            BeliefMode::Exact => "exact",
            BeliefMode::Tempered => "tempered",
        }
    }
}

/// A real vector indexed by a [`CapabilitySet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    mode: BeliefMode,
    #[serde(with = "belief_values")]
    values: Vec<f64>,
}

impl Belief {
    pub fn new(values: Vec<f64>, mode: BeliefMode) -> Result<Self> {
        for &v in &values {
            let ok = match mode {
                BeliefMode::Exact => v.is_finite() && v >= 0.0,
                BeliefMode::Tempered => v >= 0.0 && !v.is_nan() && v != f64::NEG_INFINITY,
            };
            if !ok {
                return Err(Error::InvalidParameter(alloc::format!(
                    "belief entry {v} is not valid in {} mode",
                    mode.name()
                )));
            }
        }
        Ok(Self { mode, values })
    }

    /// Initial belief held by a player of type `owner`: ones on `p(owner)`
    /// in exact mode, all zeros in tempered mode.
    pub fn initial(set: &CapabilitySet, owner: Capability, mode: BeliefMode) -> Result<Self> {
        let top = set.index_of(owner)?;
        let values = match mode {
            BeliefMode::Exact => (0..set.len()).map(|i| if i <= top { 1.0 } else { 0.0 }).collect(),
            BeliefMode::Tempered => vec![0.0; set.len()],
        };
        Ok(Self { mode, values })
    }

    /// The delta-at-`c` representation for `mode`: a likelihood delta in
    /// exact mode, `0` at `c` and `+inf` elsewhere in tempered mode.
    pub fn delta(set: &CapabilitySet, c: Capability, mode: BeliefMode) -> Result<Self> {
        let at = set.index_of(c)?;
        let (hit, miss) = match mode {
            BeliefMode::Exact => (1.0, 0.0),
            BeliefMode::Tempered => (0.0, f64::INFINITY),
        };
        let values = (0..set.len()).map(|i| if i == at { hit } else { miss }).collect();
        Ok(Self { mode, values })
    }

    pub fn mode(&self) -> BeliefMode {
        self.mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Zeroes every entry above capability `c`.
pub fn reduce(set: &CapabilitySet, belief: &Belief, c: Capability) -> Result<Belief> {
    let top = set.index_of(c)?;
    let mut out = belief.clone();
    for v in out.values.iter_mut().skip(top + 1) {
        *v = 0.0;
    }
    Ok(out)
}

/// Whether `a` and `b` agree entrywise within `tol`; equal infinities match.
pub(crate) fn beliefs_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            if x.is_infinite() || y.is_infinite() {
                x == y
            } else {
                libm::fabs(x - y) <= tol
            }
        })
}

/// Checks the capability-type-structure criterion over beliefs about one
/// player held by owners of the listed types.
///
/// For every pair, equal owner types require equal beliefs; otherwise the
/// higher owner's belief reduced to the lower type must equal the lower one.
pub fn is_type_structure(set: &CapabilitySet, beliefs: &[(Capability, &Belief)], tol: f64) -> Result<bool> {
    if beliefs.is_empty() {
        return Err(Error::Empty);
    }
    for &(c, _) in beliefs {
        set.index_of(c)?;
    }
    for (i, &(ci, bi)) in beliefs.iter().enumerate() {
        for &(ck, bk) in &beliefs[i + 1..] {
            let ok = if ci == ck {
                beliefs_match(bi.values(), bk.values(), tol)
            } else {
                let (hi, lo, lo_type) = if ci > ck { (bi, bk, ck) } else { (bk, bi, ci) };
                let reduced = reduce(set, hi, lo_type)?;
                beliefs_match(reduced.values(), lo.values(), tol)
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All joint assignments a type-`c` player can simulate: `p(c)^n`, in
/// lexicographic order of predecessor indices.
pub fn feasible_assignments(set: &CapabilitySet, c: Capability, n: usize) -> Result<Vec<Vec<Capability>>> {
    let preds = set.predecessors(c)?;
    let k = preds.len();
    let total = k.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        out.push(digits.iter().map(|&d| preds[d]).collect());
        for pos in (0..n).rev() {
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(out)
}

/// One player's beliefs about every player (itself included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefBank {
    set: CapabilitySet,
    owner: Capability,
    beliefs: Vec<Belief>,
}

impl BeliefBank {
    /// Freshly initialized bank for an owner of type `owner`.
    pub fn new(set: CapabilitySet, owner: Capability, n_players: usize, mode: BeliefMode) -> Result<Self> {
        if n_players == 0 {
            return Err(Error::Empty);
        }
        let b = Belief::initial(&set, owner, mode)?;
        Ok(Self {
            beliefs: vec![b; n_players],
            set,
            owner,
        })
    }

    pub fn from_parts(set: CapabilitySet, owner: Capability, beliefs: Vec<Belief>) -> Result<Self> {
        set.index_of(owner)?;
        let Some(first) = beliefs.first() else {
            return Err(Error::Empty);
        };
        let mode = first.mode();
        if beliefs.iter().any(|b| b.mode() != mode || b.len() != set.len()) {
            return Err(Error::InvalidParameter(
                "bank beliefs must share one mode and the capability set length".into(),
            ));
        }
        Ok(Self { set, owner, beliefs })
    }

    pub fn set(&self) -> &CapabilitySet {
        &self.set
    }

    pub fn owner(&self) -> Capability {
        self.owner
    }

    pub fn mode(&self) -> BeliefMode {
        self.beliefs[0].mode()
    }

    pub fn n_players(&self) -> usize {
        self.beliefs.len()
    }

    pub fn beliefs(&self) -> &[Belief] {
        &self.beliefs
    }

    pub fn belief(&self, j: usize) -> Result<&Belief> {
        self.beliefs.get(j).ok_or(Error::PlayerOutOfRange {
            index: j,
            players: self.beliefs.len(),
        })
    }

    pub(crate) fn belief_mut(&mut self, j: usize) -> Result<&mut Belief> {
        let players = self.beliefs.len();
        self.beliefs
            .get_mut(j)
            .ok_or(Error::PlayerOutOfRange { index: j, players })
    }

    /// Every member belief reduced to `c`; the owner type drops to
    /// `min(owner, c)`.
    pub fn reduced(&self, c: Capability) -> Result<Self> {
        let beliefs = self
            .beliefs
            .iter()
            .map(|b| reduce(&self.set, b, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            set: self.set.clone(),
            owner: self.owner.min(c),
            beliefs,
        })
    }
}

/// Replaces the belief about player `j` with the delta at `c` for the bank's
/// mode (conditioning on `j` being exactly of type `c`).
pub fn intervene(bank: &BeliefBank, j: usize, c: Capability) -> Result<BeliefBank> {
    let delta = Belief::delta(&bank.set, c, bank.mode())?;
    let mut out = bank.clone();
    *out.belief_mut(j)? = delta;
    Ok(out)
}

/// The hidden capability assignment of a match. Only the verification oracle
/// and the harness look at it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerRoster {
    types: Vec<Capability>,
}

impl PlayerRoster {
    pub fn new(set: &CapabilitySet, types: Vec<Capability>) -> Result<Self> {
        if types.len() < 2 {
            return Err(Error::InvalidParameter("a roster needs at least two players".into()));
        }
        for &c in &types {
            set.index_of(c)?;
        }
        Ok(Self { types })
    }

    pub fn n_players(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[Capability] {
        &self.types
    }

    pub fn type_of(&self, player: usize) -> Capability {
        self.types[player]
    }
}

// `+inf` travels as the string "inf" so JSON stays valid.
mod belief_values {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> core::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for &v in values {
            if v == f64::INFINITY {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(&v)?;
            }
        }
        seq.end()
    }

    struct Entry(f64);

    impl<'de> Deserialize<'de> for Entry {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            struct EntryVisitor;
            impl Visitor<'_> for EntryVisitor {
                type Value = Entry;
                fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                    f.write_str("a number or \"inf\"")
                }
                fn visit_f64<E: de::Error>(self, v: f64) -> core::result::Result<Entry, E> {
                    Ok(Entry(v))
                }
                fn visit_u64<E: de::Error>(self, v: u64) -> core::result::Result<Entry, E> {
                    Ok(Entry(v as f64))
                }
                fn visit_i64<E: de::Error>(self, v: i64) -> core::result::Result<Entry, E> {
                    Ok(Entry(v as f64))
                }
                fn visit_str<E: de::Error>(self, v: &str) -> core::result::Result<Entry, E> {
                    if v == "inf" {
                        Ok(Entry(f64::INFINITY))
                    } else {
                        Err(E::invalid_value(de::Unexpected::Str(v), &self))
                    }
                }
            }
            d.deserialize_any(EntryVisitor)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<Vec<f64>, D::Error> {
        struct SeqVisitor;
        impl<'de> Visitor<'de> for SeqVisitor {
            type Value = Vec<f64>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of belief entries")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> core::result::Result<Vec<f64>, A::Error> {
                let mut out = Vec::new();
                while let Some(Entry(v)) = seq.next_element()? {
                    out.push(v);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(SeqVisitor)
    }
}
