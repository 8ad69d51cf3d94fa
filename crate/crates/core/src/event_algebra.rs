//! Finite set-event universes.
//!
//! An [`EventFamily`] is an ordered list of named events. Label `i` owns bit
//! `i` (least significant first), so every subset of the family is a `u32`
//! mask below `2^n`. A mask doubles as the index of a terrace event: the mask
//! `F` names the atom where exactly the events in `F` occur and all others do
//! not. A [`DerivedEvent`] is any union of terraces.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered family of uniquely named events, `1 <= n <= 16`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EventFamily {
    labels: Arc<[String]>,
}

impl EventFamily {
    pub const MAX_EVENTS: usize = 16;

    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidFamily("family must contain at least one event".into()));
        }
        if labels.len() > Self::MAX_EVENTS {
            return Err(Error::InvalidFamily(format!(
                "family has {} events, at most {} are supported",
                labels.len(),
                Self::MAX_EVENTS
            )));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidFamily(format!("label {i} is empty")));
            }
            if labels[..i].contains(label) {
                return Err(Error::InvalidFamily(format!("duplicate label `{label}`")));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Number of subsets (equivalently terraces): `2^n`.
    pub fn subset_count(&self) -> usize {
        1usize << self.size()
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.size()) - 1) as u32
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn check_mask(&self, bits: u32) -> Result<()> {
        if bits & !self.full_mask() != 0 {
            return Err(Error::MaskOutOfRange {
                mask: bits,
                size: self.size(),
            });
        }
        Ok(())
    }

    pub fn set(&self, bits: u32) -> Result<EventSet> {
        self.check_mask(bits)?;
        Ok(EventSet {
            family: self.clone(),
            bits,
        })
    }

    pub fn empty_set(&self) -> EventSet {
        EventSet {
            family: self.clone(),
            bits: 0,
        }
    }

    pub fn set_from_labels<I, S>(&self, labels: I) -> Result<EventSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u32;
        for label in labels {
            let label = label.as_ref();
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            bits |= 1 << i;
        }
        Ok(EventSet {
            family: self.clone(),
            bits,
        })
    }

    /// Labels of the events present in `bits`, in family order.
    pub fn labels_of(&self, bits: u32) -> Vec<&str> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, l)| l.as_str())
            .collect()
    }

    pub(crate) fn ensure_same(&self, other: &EventFamily) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FamilyMismatch {
                left: self.labels.to_vec(),
                right: other.labels.to_vec(),
            })
        }
    }
}

impl fmt::Debug for EventFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// A subset of an [`EventFamily`], stored as a bitmask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EventSet {
    family: EventFamily,
    bits: u32,
}

impl EventSet {
    pub fn family(&self) -> &EventFamily {
        &self.family
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits & (1 << index) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// `family - self`.
    pub fn complement(&self) -> EventSet {
        EventSet {
            family: self.family.clone(),
            bits: !self.bits & self.family.full_mask(),
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.family.labels_of(self.bits)
    }

    /// The terrace event `ter(self)` as a one-terrace [`DerivedEvent`].
    pub fn terrace(&self) -> DerivedEvent {
        let mut terraces = TerraceBits::new(self.family.subset_count());
        terraces.insert(self.bits);
        DerivedEvent {
            family: self.family.clone(),
            terraces,
        }
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().join(","))
    }
}

/// Dense bitset over the `2^n` terrace indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct TerraceBits {
    words: Vec<u64>,
    len: usize,
}

impl TerraceBits {
    fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn full(len: usize) -> Self {
        let mut bits = Self::new(len);
        for t in 0..len {
            bits.insert(t as u32);
        }
        bits
    }

    fn insert(&mut self, t: u32) {
        let t = t as usize;
        self.words[t / 64] |= 1 << (t % 64);
    }

    fn contains(&self, t: u32) -> bool {
        let t = t as usize;
        t < self.len && self.words[t / 64] & (1 << (t % 64)) != 0
    }

    fn is_subset(&self, other: &TerraceBits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len as u32).filter(|&t| self.contains(t))
    }
}

/// An event expressed as a union of terraces of its family.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DerivedEvent {
    family: EventFamily,
    terraces: TerraceBits,
}

impl DerivedEvent {
    /// The impossible event.
    pub fn empty(family: &EventFamily) -> Self {
        Self {
            family: family.clone(),
            terraces: TerraceBits::new(family.subset_count()),
        }
    }

    /// The certain event Ω.
    pub fn omega(family: &EventFamily) -> Self {
        Self {
            family: family.clone(),
            terraces: TerraceBits::full(family.subset_count()),
        }
    }

    /// The `index`-th event of the family itself: every terrace whose mask has bit `index`.
    pub fn occurrence(family: &EventFamily, index: usize) -> Result<Self> {
        if index >= family.size() {
            return Err(Error::MaskOutOfRange {
                mask: 1u32.checked_shl(index as u32).unwrap_or(u32::MAX),
                size: family.size(),
            });
        }
        Ok(Self::from_predicate(family, |f| f & (1 << index) != 0))
    }

    pub fn from_predicate(family: &EventFamily, mut selected: impl FnMut(u32) -> bool) -> Self {
        let mut terraces = TerraceBits::new(family.subset_count());
        for t in 0..family.subset_count() as u32 {
            if selected(t) {
                terraces.insert(t);
            }
        }
        Self {
            family: family.clone(),
            terraces,
        }
    }

    pub fn family(&self) -> &EventFamily {
        &self.family
    }

    pub fn contains_terrace(&self, mask: u32) -> bool {
        self.terraces.contains(mask)
    }

    /// Terrace indices in ascending order.
    pub fn terraces(&self) -> impl Iterator<Item = u32> + '_ {
        self.terraces.iter()
    }

    pub fn terrace_count(&self) -> usize {
        self.terraces.count()
    }
}

/// Anything that can be read as a set of terraces over a family.
pub trait TerraceSet {
    fn universe(&self) -> &EventFamily;
    fn has_terrace(&self, mask: u32) -> bool;
    fn terrace_iter(&self) -> Box<dyn Iterator<Item = u32> + '_>;
    fn subset_of(&self, other: &DerivedEvent) -> bool {
        self.terrace_iter().all(|t| other.has_terrace(t))
    }
}

impl TerraceSet for DerivedEvent {
    fn universe(&self) -> &EventFamily {
        &self.family
    }

    fn has_terrace(&self, mask: u32) -> bool {
        self.contains_terrace(mask)
    }

    fn terrace_iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        Box::new(self.terraces())
    }

    fn subset_of(&self, other: &DerivedEvent) -> bool {
        self.terraces.is_subset(&other.terraces)
    }
}

impl TerraceSet for EventSet {
    fn universe(&self) -> &EventFamily {
        &self.family
    }

    fn has_terrace(&self, mask: u32) -> bool {
        mask == self.bits
    }

    fn terrace_iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        Box::new(std::iter::once(self.bits))
    }
}

/// All `2^n` terrace indices of `family` in ascending order.
pub fn enumerate_terraces(family: &EventFamily) -> Vec<EventSet> {
    (0..family.subset_count() as u32)
        .map(|bits| EventSet {
            family: family.clone(),
            bits,
        })
        .collect()
}

/// Zeta (inclusion) indicator: 1 iff every terrace of `sub` is a terrace of `sup`.
///
/// A bare [`EventSet`] stands for its single terrace.
pub fn zeta<A, B>(sub: &A, sup: &B) -> Result<u8>
where
    A: TerraceSet + ?Sized,
    B: TerraceSet + ?Sized,
{
    sub.universe().ensure_same(sup.universe())?;
    Ok(sub.terrace_iter().all(|t| sup.has_terrace(t)) as u8)
}

/// `1_d(F)`: whether the terrace `ter(F)` lies inside `d`.
pub fn indicator_event(event: &DerivedEvent, circumstances: &EventSet) -> Result<u8> {
    event.family.ensure_same(&circumstances.family)?;
    Ok(event.contains_terrace(circumstances.bits) as u8)
}

/// Builds the union of the selected terraces.
pub fn event_from_terraces(family: &EventFamily, selected: &[u32]) -> Result<DerivedEvent> {
    let mut terraces = TerraceBits::new(family.subset_count());
    for &t in selected {
        family.check_mask(t)?;
        terraces.insert(t);
    }
    Ok(DerivedEvent {
        family: family.clone(),
        terraces,
    })
}

/// A deterministic decision rule: one decision set for every circumstance set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyMap {
    circumstances: EventFamily,
    decisions: EventFamily,
    map: Vec<u32>,
}

impl PolicyMap {
    pub fn new(circumstances: EventFamily, decisions: EventFamily, map: Vec<u32>) -> Result<Self> {
        if map.len() != circumstances.subset_count() {
            return Err(Error::LengthMismatch {
                left: map.len(),
                right: circumstances.subset_count(),
            });
        }
        for &d in &map {
            decisions.check_mask(d)?;
        }
        Ok(Self {
            circumstances,
            decisions,
            map,
        })
    }

    pub fn from_fn(
        circumstances: &EventFamily,
        decisions: &EventFamily,
        rule: impl FnMut(u32) -> u32,
    ) -> Result<Self> {
        let map = (0..circumstances.subset_count() as u32).map(rule).collect();
        Self::new(circumstances.clone(), decisions.clone(), map)
    }

    pub fn circumstance_family(&self) -> &EventFamily {
        &self.circumstances
    }

    pub fn decision_family(&self) -> &EventFamily {
        &self.decisions
    }

    /// Decision mask chosen at circumstance mask `f`. Panics if `f` is out of range.
    pub fn decision_for(&self, f: u32) -> u32 {
        self.map[f as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.map
    }

    /// The decision event `d` as the union of terraces `ter(F)` where the policy creates `d`.
    pub fn decision_event(&self, decision_index: usize) -> Result<DerivedEvent> {
        if decision_index >= self.decisions.size() {
            return Err(Error::MaskOutOfRange {
                mask: 1u32.checked_shl(decision_index as u32).unwrap_or(u32::MAX),
                size: self.decisions.size(),
            });
        }
        Ok(DerivedEvent::from_predicate(&self.circumstances, |f| {
            self.map[f as usize] & (1 << decision_index) != 0
        }))
    }
}

/// `1_D(ter(F))` under a policy: 1 iff the policy picks exactly `D` at `F`.
pub fn indicator_policy(policy: &PolicyMap, decisions: &EventSet, circumstances: &EventSet) -> Result<u8> {
    policy.decisions.ensure_same(&decisions.family)?;
    policy.circumstances.ensure_same(&circumstances.family)?;
    Ok((policy.decision_for(circumstances.bits) == decisions.bits) as u8)
}

/// Bit layout of the joint family `X = D + F`: decision bits low, circumstance bits high.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointLayout {
    decisions: EventFamily,
    circumstances: EventFamily,
    joint: EventFamily,
}

impl JointLayout {
    pub fn new(decisions: &EventFamily, circumstances: &EventFamily) -> Result<Self> {
        let joint = EventFamily::new(
            decisions
                .labels()
                .iter()
                .chain(circumstances.labels())
                .cloned(),
        )?;
        Ok(Self {
            decisions: decisions.clone(),
            circumstances: circumstances.clone(),
            joint,
        })
    }

    pub fn decisions(&self) -> &EventFamily {
        &self.decisions
    }

    pub fn circumstances(&self) -> &EventFamily {
        &self.circumstances
    }

    pub fn joint(&self) -> &EventFamily {
        &self.joint
    }

    pub fn combine(&self, d: u32, f: u32) -> u32 {
        d | (f << self.decisions.size())
    }

    pub fn split(&self, x: u32) -> (u32, u32) {
        (x & self.decisions.full_mask(), x >> self.decisions.size())
    }
}
