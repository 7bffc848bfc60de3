//! The SAFE taxonomy: four dimensions (Source, Appeal, Frame, Evidence) and
//! their 20 categories, in canonical slot order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    Source,
    Appeal,
    Frame,
    Evidence,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Source,
        Dimension::Appeal,
        Dimension::Frame,
        Dimension::Evidence,
    ];

    /// Bit mask of this dimension's slots in a feature vector.
    pub const fn mask(self) -> u32 {
        match self {
            Dimension::Source => 0b111,
            Dimension::Appeal => 0b1_1111_1111 << 3,
            Dimension::Frame => 0b111 << 12,
            Dimension::Evidence => 0b1_1111 << 15,
        }
    }

    pub const fn absence_marker(self) -> Category {
        match self {
            Dimension::Source => Category::NoSource,
            Dimension::Appeal => Category::NoAppeal,
            Dimension::Frame => Category::NoFrame,
            Dimension::Evidence => Category::NoEvidence,
        }
    }

    pub fn categories(self) -> impl Iterator<Item = Category> {
        Category::ALL
            .into_iter()
            .filter(move |c| c.dimension() == self)
    }

    pub const fn name(self) -> &'static str {
        match self {
            Dimension::Source => "Source",
            Dimension::Appeal => "Appeal",
            Dimension::Frame => "Frame",
            Dimension::Evidence => "Evidence",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One SAFE category. The discriminant is the feature-vector slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Category {
    Expert = 0,
    OfficialMedia,
    NoSource,
    Sex,
    Fear,
    Humor,
    Value,
    Utilitarian,
    Dual,
    Comparative,
    Metaphor,
    NoAppeal,
    Gain,
    Loss,
    NoFrame,
    Narrative,
    Statistical,
    ExpertEvidence,
    Causal,
    NoEvidence,
}

pub const CATEGORY_COUNT: usize = 20;

const CODES: [&str; CATEGORY_COUNT] = [
    "Exp", "OffM", "NoSrc", "Sex", "Fear", "Hum", "Valu", "Util", "Dual", "Comp", "Met", "NoApp",
    "Gain", "Loss", "NoFrm", "Narr", "Stat", "ExpEv", "Caus", "NoEv",
];

// Accepted spellings besides the canonical code, compared case-insensitively
// after removing spaces, underscores and hyphens.
const ALIASES: [&[&str]; CATEGORY_COUNT] = [
    &["expert", "expertsource"],
    &["officialmedia", "official"],
    &["nosource"],
    &["sexappeal"],
    &["fearappeal"],
    &["humor", "humour", "humorappeal"],
    &["value", "valueappeal"],
    &["utilitarian", "utilitarianappeal"],
    &["dualappeal"],
    &["comparative", "comparativeappeal"],
    &["metaphor", "metaphorappeal"],
    &["noappeal"],
    &["gainframe"],
    &["lossframe"],
    &["noframe"],
    &["narrev", "narrative", "narrativeevidence"],
    &["statev", "statistical", "statisticalevidence"],
    &["expertevidence"],
    &["causev", "causal", "causalevidence"],
    &["noevidence"],
];

impl Category {
    pub const ALL: [Category; CATEGORY_COUNT] = [
        Category::Expert,
        Category::OfficialMedia,
        Category::NoSource,
        Category::Sex,
        Category::Fear,
        Category::Humor,
        Category::Value,
        Category::Utilitarian,
        Category::Dual,
        Category::Comparative,
        Category::Metaphor,
        Category::NoAppeal,
        Category::Gain,
        Category::Loss,
        Category::NoFrame,
        Category::Narrative,
        Category::Statistical,
        Category::ExpertEvidence,
        Category::Causal,
        Category::NoEvidence,
    ];

    pub const fn slot(self) -> usize {
        self as usize
    }

    pub const fn bit(self) -> u32 {
        1 << (self as u32)
    }

    pub fn from_slot(slot: usize) -> Option<Category> {
        Category::ALL.get(slot).copied()
    }

    pub const fn dimension(self) -> Dimension {
        match self as u8 {
            0..=2 => Dimension::Source,
            3..=11 => Dimension::Appeal,
            12..=14 => Dimension::Frame,
            _ => Dimension::Evidence,
        }
    }

    pub const fn is_absence_marker(self) -> bool {
        matches!(
            self,
            Category::NoSource | Category::NoAppeal | Category::NoFrame | Category::NoEvidence
        )
    }

    /// Short code used in every input and report.
    pub const fn code(self) -> &'static str {
        CODES[self as usize]
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if let Some(i) = CODES.iter().position(|c| *c == trimmed) {
            return Ok(Category::ALL[i]);
        }
        let folded: String = trimmed
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        for (i, code) in CODES.iter().enumerate() {
            if code.to_ascii_lowercase() == folded || ALIASES[i].contains(&folded.as_str()) {
                return Ok(Category::ALL[i]);
            }
        }
        Err(Error::InvalidInput(format!(
            "unknown category code {trimmed:?}"
        )))
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of categories, stored as a 20-bit mask in slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CategorySet(u32);

impl CategorySet {
    pub const EMPTY: CategorySet = CategorySet(0);
    pub const FULL: CategorySet = CategorySet((1 << CATEGORY_COUNT) - 1);

    pub const fn from_bits(bits: u32) -> CategorySet {
        CategorySet(bits & Self::FULL.0)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, c: Category) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_superset(self, other: CategorySet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn intersects(self, other: CategorySet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn insert(&mut self, c: Category) {
        self.0 |= c.bit();
    }

    pub fn remove(&mut self, c: Category) {
        self.0 &= !c.bit();
    }

    pub fn with(mut self, c: Category) -> CategorySet {
        self.insert(c);
        self
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn union(self, other: CategorySet) -> CategorySet {
        CategorySet(self.0 | other.0)
    }

    pub const fn intersection(self, other: CategorySet) -> CategorySet {
        CategorySet(self.0 & other.0)
    }

    pub const fn difference(self, other: CategorySet) -> CategorySet {
        CategorySet(self.0 & !other.0)
    }

    pub const fn restrict(self, dim: Dimension) -> CategorySet {
        CategorySet(self.0 & dim.mask())
    }

    /// Categories in canonical slot order.
    pub fn iter(self) -> impl Iterator<Item = Category> {
        Category::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    /// Codes joined with `sep`, canonical order.
    pub fn join_codes(self, sep: &str) -> String {
        self.iter()
            .map(Category::code)
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl FromIterator<Category> for CategorySet {
    fn from_iter<I: IntoIterator<Item = Category>>(iter: I) -> Self {
        let mut set = CategorySet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Display for CategorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join_codes("+"))
    }
}

impl Serialize for CategorySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for CategorySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let codes = Vec::<Category>::deserialize(deserializer)?;
        Ok(codes.into_iter().collect())
    }
}

/// Parses a `+`- or `|`-separated code list such as `Met+Util+Narr`.
pub fn parse_code_list(s: &str) -> Result<CategorySet, Error> {
    s.split(['+', '|', ','])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse::<Category>)
        .collect()
}
