use std::fmt;

use serde::{Deserialize, Serialize};

use super::taxonomy::{Category, CategorySet, Dimension, CATEGORY_COUNT};

/// A label-set violation. The `Display` form is the rejection reason written
/// to parse reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyDimension(Dimension),
    AbsenceCoOccurrence(Dimension),
    WrongDimension {
        category: Category,
        expected: Dimension,
    },
    MultipleFrames,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyDimension(d) => write!(f, "empty dimension: {d}"),
            Violation::AbsenceCoOccurrence(d) => write!(f, "absence marker co-occurrence: {d}"),
            Violation::WrongDimension { category, expected } => {
                write!(
                    f,
                    "category {category} does not belong to dimension {expected}"
                )
            }
            Violation::MultipleFrames => f.write_str("multiple frames: Frame is single-choice"),
        }
    }
}

/// Checks one dimension's label set against the exclusivity rules.
pub fn check_dimension(dim: Dimension, set: CategorySet) -> Result<(), Violation> {
    if let Some(category) = set.iter().find(|c| c.dimension() != dim) {
        return Err(Violation::WrongDimension {
            category,
            expected: dim,
        });
    }
    if set.is_empty() {
        return Err(Violation::EmptyDimension(dim));
    }
    if set.contains(dim.absence_marker()) && set.len() > 1 {
        return Err(Violation::AbsenceCoOccurrence(dim));
    }
    if dim == Dimension::Frame && set.len() > 1 {
        return Err(Violation::MultipleFrames);
    }
    Ok(())
}

/// One coded post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub id: String,
    pub account_id: String,
    pub followers: u64,
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
    pub source: CategorySet,
    pub appeal: CategorySet,
    pub frame: Category,
    pub evidence: CategorySet,
}

impl MessageRecord {
    pub fn labels(&self) -> CategorySet {
        self.source
            .union(self.appeal)
            .union(self.evidence)
            .with(self.frame)
    }

    pub fn validate(&self) -> Result<(), Violation> {
        check_dimension(Dimension::Source, self.source)?;
        check_dimension(Dimension::Appeal, self.appeal)?;
        check_dimension(Dimension::Frame, CategorySet::EMPTY.with(self.frame))?;
        check_dimension(Dimension::Evidence, self.evidence)
    }

    pub fn features(&self) -> FeatureVector {
        encode_features(self)
    }

    pub fn engagement(&self) -> EngagementTriple {
        log_engagement(self)
    }

    pub fn count(&self, indicator: Indicator) -> u64 {
        match indicator {
            Indicator::Likes => self.likes,
            Indicator::Comments => self.comments,
            Indicator::Shares => self.shares,
        }
    }
}

/// Binary encoding of a record's labels: bit `i` is set iff category slot `i`
/// is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FeatureVector(u32);

impl FeatureVector {
    pub const DIM: usize = CATEGORY_COUNT;

    /// Wraps raw bits, accepting only encodings of valid label sets.
    pub fn from_bits(bits: u32) -> Result<FeatureVector, Violation> {
        let set = CategorySet::from_bits(bits);
        for dim in Dimension::ALL {
            check_dimension(dim, set.restrict(dim))?;
        }
        Ok(FeatureVector(set.bits()))
    }

    pub fn from_set(set: CategorySet) -> Result<FeatureVector, Violation> {
        FeatureVector::from_bits(set.bits())
    }

    /// Nearest valid vector to arbitrary 20-bit input: an absence marker
    /// that co-occurs with its dimension's categories is cleared, an empty
    /// dimension gets its absence marker, and of several frames the
    /// `preferred` one (or else the lowest slot) is kept.
    pub fn repair(bits: u32, preferred_frame: Option<Category>) -> FeatureVector {
        let mut set = CategorySet::from_bits(bits & CategorySet::FULL.bits());
        for dim in Dimension::ALL {
            let marker = dim.absence_marker();
            let present = set
                .restrict(dim)
                .difference(CategorySet::EMPTY.with(marker));
            if !present.is_empty() {
                set.remove(marker);
            } else {
                set.insert(marker);
            }
        }
        let frames = set.restrict(Dimension::Frame);
        if frames.len() > 1 {
            let keep = preferred_frame
                .filter(|f| frames.contains(*f))
                .unwrap_or_else(|| frames.iter().next().expect("non-empty"));
            set = set.difference(frames).with(keep);
        }
        FeatureVector(set.bits())
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn set(self) -> CategorySet {
        CategorySet::from_bits(self.0)
    }

    pub fn contains(self, c: Category) -> bool {
        self.0 & c.bit() != 0
    }

    /// Number of differing slots; the squared Euclidean distance.
    pub const fn hamming(self, other: FeatureVector) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    pub fn to_dense(self) -> [f64; CATEGORY_COUNT] {
        std::array::from_fn(|i| f64::from((self.0 >> i) & 1))
    }

    /// Slot string, slot 0 first, e.g. `"10000010000010000100"`.
    pub fn to_slot_string(self) -> String {
        (0..CATEGORY_COUNT)
            .map(|i| if (self.0 >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl From<FeatureVector> for String {
    fn from(v: FeatureVector) -> String {
        v.to_slot_string()
    }
}

impl TryFrom<String> for FeatureVector {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s.len() != CATEGORY_COUNT {
            return Err(format!(
                "feature vector must have {CATEGORY_COUNT} slots, got {}",
                s.len()
            ));
        }
        let mut bits = 0u32;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1 << i,
                '0' => {}
                other => return Err(format!("invalid slot character {other:?}")),
            }
        }
        FeatureVector::from_bits(bits).map_err(|v| v.to_string())
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.set().join_codes("+"))
    }
}

/// Decoded per-dimension label sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelSets {
    pub source: CategorySet,
    pub appeal: CategorySet,
    pub frame: Category,
    pub evidence: CategorySet,
}

pub fn encode_features(record: &MessageRecord) -> FeatureVector {
    debug_assert!(record.validate().is_ok());
    FeatureVector(record.labels().bits())
}

pub fn decode_features(v: FeatureVector) -> LabelSets {
    let set = v.set();
    let frame = set
        .restrict(Dimension::Frame)
        .iter()
        .next()
        .expect("valid vector has one frame");
    LabelSets {
        source: set.restrict(Dimension::Source),
        appeal: set.restrict(Dimension::Appeal),
        frame,
        evidence: set.restrict(Dimension::Evidence),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Likes,
    Comments,
    Shares,
}

impl Indicator {
    pub const ALL: [Indicator; 3] = [Indicator::Likes, Indicator::Comments, Indicator::Shares];

    pub const fn name(self) -> &'static str {
        match self {
            Indicator::Likes => "likes",
            Indicator::Comments => "comments",
            Indicator::Shares => "shares",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Indicator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "likes" => Ok(Indicator::Likes),
            "comments" => Ok(Indicator::Comments),
            "shares" => Ok(Indicator::Shares),
            other => Err(crate::Error::InvalidInput(format!(
                "unknown indicator {other:?}"
            ))),
        }
    }
}

/// Engagement counts on the natural-log `ln(x + 1)` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngagementTriple {
    pub likes_log: f64,
    pub comments_log: f64,
    pub shares_log: f64,
}

impl EngagementTriple {
    pub fn get(&self, indicator: Indicator) -> f64 {
        match indicator {
            Indicator::Likes => self.likes_log,
            Indicator::Comments => self.comments_log,
            Indicator::Shares => self.shares_log,
        }
    }
}

pub fn log1p_count(count: u64) -> f64 {
    (count as f64).ln_1p()
}

pub fn log_engagement(record: &MessageRecord) -> EngagementTriple {
    EngagementTriple {
        likes_log: log1p_count(record.likes),
        comments_log: log1p_count(record.comments),
        shares_log: log1p_count(record.shares),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::taxonomy::parse_code_list;
    use proptest::prelude::*;
    use Category::*;

    pub(crate) fn record(codes: &str) -> MessageRecord {
        let set = parse_code_list(codes).unwrap();
        let labels = decode_features(FeatureVector::from_set(set).unwrap());
        MessageRecord {
            id: "r".into(),
            account_id: "a".into(),
            followers: 0,
            likes: 0,
            comments: 0,
            shares: 0,
            source: labels.source,
            appeal: labels.appeal,
            frame: labels.frame,
            evidence: labels.evidence,
        }
    }

    #[test]
    fn absence_baseline_sets_one_bit_per_block() {
        let v = record("NoSrc+NoApp+NoFrm+NoEv").features();
        assert_eq!(v.bits().count_ones(), 4);
        for dim in Dimension::ALL {
            assert_eq!((v.bits() & dim.mask()).count_ones(), 1);
        }
    }

    #[test]
    fn expert_value_prototype_bits() {
        let v = record("Exp+Valu+Gain+ExpEv").features();
        let expected: CategorySet = [Expert, Value, Gain, ExpertEvidence].into_iter().collect();
        assert_eq!(v.set(), expected);
    }

    #[test]
    fn authority_convergence_prototype_has_both_sources() {
        let v = record("OffM+Exp+Valu+Gain+Stat").features();
        assert_eq!(v.bits().count_ones(), 5);
        assert!(v.contains(Expert) && v.contains(OfficialMedia));
    }

    #[test]
    fn violations() {
        let both = CategorySet::EMPTY.with(Expert).with(NoSource);
        assert_eq!(
            check_dimension(Dimension::Source, both),
            Err(Violation::AbsenceCoOccurrence(Dimension::Source))
        );
        assert_eq!(
            Violation::AbsenceCoOccurrence(Dimension::Source).to_string(),
            "absence marker co-occurrence: Source"
        );
        let frames = CategorySet::EMPTY.with(Gain).with(Loss);
        assert_eq!(
            check_dimension(Dimension::Frame, frames),
            Err(Violation::MultipleFrames)
        );
        assert!(matches!(
            check_dimension(Dimension::Appeal, CategorySet::EMPTY),
            Err(Violation::EmptyDimension(Dimension::Appeal))
        ));
        assert!(FeatureVector::from_bits(0).is_err());
    }

    #[test]
    fn log_engagement_examples() {
        let mut r = record("NoSrc+NoApp+NoFrm+NoEv");
        assert_eq!(
            r.engagement(),
            EngagementTriple {
                likes_log: 0.0,
                comments_log: 0.0,
                shares_log: 0.0
            }
        );
        r.likes = 1;
        r.comments = 3;
        let e = r.engagement();
        assert!((e.likes_log - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((e.comments_log - 1.386_294_361_119_890_6).abs() < 1e-15);
        assert_eq!(e.shares_log, 0.0);
        assert!(log1p_count(2) < log1p_count(5));
    }

    #[test]
    fn repair_rules() {
        let fix = |codes: &str, pref: Option<Category>| {
            let bits = parse_code_list(codes).unwrap().bits();
            FeatureVector::repair(bits, pref).to_string()
        };
        assert_eq!(fix("Exp+NoSrc+Valu+Gain+NoEv", None), "Exp+Valu+Gain+NoEv");
        assert_eq!(fix("NoSrc+Gain+NoEv", None), "NoSrc+NoApp+Gain+NoEv");
        assert_eq!(
            fix("NoSrc+NoApp+Gain+Loss+NoEv", Some(Category::Loss)),
            "NoSrc+NoApp+Loss+NoEv"
        );
        assert_eq!(
            fix("NoSrc+NoApp+Gain+Loss+NoEv", None),
            "NoSrc+NoApp+Gain+NoEv"
        );
        assert_eq!(
            fix("NoSrc+NoApp+Gain+Loss+NoEv", Some(Category::NoFrame)),
            "NoSrc+NoApp+Gain+NoEv"
        );
        assert_eq!(
            FeatureVector::repair(0, None).to_string(),
            "NoSrc+NoApp+NoFrm+NoEv"
        );
    }

    #[test]
    fn slot_string_round_trip() {
        let v = record("OffM+Exp+Valu+Gain+Stat").features();
        let s = v.to_slot_string();
        assert_eq!(FeatureVector::try_from(s).unwrap(), v);
        assert!(FeatureVector::try_from("1".repeat(20)).is_err());
    }

    /// Valid label sets, drawn per dimension.
    pub(crate) fn valid_set() -> impl Strategy<Value = CategorySet> {
        let dim = |d: Dimension, multi: bool| {
            let cats: Vec<Category> = d.categories().filter(|c| !c.is_absence_marker()).collect();
            let n = cats.len();
            (any::<u32>(), any::<bool>()).prop_map(move |(bits, absent)| {
                let mut set: CategorySet = if multi {
                    cats.iter()
                        .enumerate()
                        .filter(|(i, _)| bits >> i & 1 == 1)
                        .map(|(_, c)| *c)
                        .collect()
                } else {
                    let pick = bits as usize % (n + 1);
                    cats.get(pick).copied().into_iter().collect()
                };
                if absent || set.is_empty() {
                    set = CategorySet::EMPTY.with(d.absence_marker());
                }
                set
            })
        };
        (
            dim(Dimension::Source, true),
            dim(Dimension::Appeal, true),
            dim(Dimension::Frame, false),
            dim(Dimension::Evidence, true),
        )
            .prop_map(|(s, a, f, e)| s.union(a).union(f).union(e))
    }

    proptest! {
        #[test]
        fn repair_is_valid_and_fixes_valid_input(bits in 0u32..(1 << 20), set in valid_set()) {
            let v = FeatureVector::repair(bits, None);
            prop_assert!(FeatureVector::from_bits(v.bits()).is_ok());
            prop_assert_eq!(FeatureVector::repair(set.bits(), None).set(), set);
        }

        #[test]
        fn encoding_is_a_bijection(set in valid_set()) {
            let v = FeatureVector::from_set(set).unwrap();
            let labels = decode_features(v);
            let rebuilt = MessageRecord {
                source: labels.source,
                appeal: labels.appeal,
                frame: labels.frame,
                evidence: labels.evidence,
                ..record("NoSrc+NoApp+NoFrm+NoEv")
            };
            prop_assert!(rebuilt.validate().is_ok());
            prop_assert_eq!(rebuilt.features(), v);
            prop_assert_eq!(rebuilt.labels(), set);
        }

        #[test]
        fn log1p_strictly_monotone(a in 0u64..1_000_000, b in 0u64..1_000_000) {
            prop_assume!(a < b);
            prop_assert!(log1p_count(a) < log1p_count(b));
        }
    }
}
