use std::fmt;

use super::RuleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prefix {
    B,
    I,
    E,
    S,
}

impl Prefix {
    const ALL: [Prefix; 4] = [Prefix::B, Prefix::I, Prefix::E, Prefix::S];

    fn letter(self) -> char {
        match self {
            Prefix::B => 'B',
            Prefix::I => 'I',
            Prefix::E => 'E',
            Prefix::S => 'S',
        }
    }
}

/// A decoded BIOES tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    O,
    Entity { prefix: Prefix, category: usize },
}

impl Tag {
    /// B-Y or I-Y: an entity is open and must be continued.
    pub fn opens(self) -> bool {
        matches!(
            self,
            Tag::Entity {
                prefix: Prefix::B | Prefix::I,
                ..
            }
        )
    }

    /// I-Y or E-Y: must continue an open entity of the same category.
    pub fn continues(self) -> bool {
        matches!(
            self,
            Tag::Entity {
                prefix: Prefix::I | Prefix::E,
                ..
            }
        )
    }

    pub fn category(self) -> Option<usize> {
        match self {
            Tag::O => None,
            Tag::Entity { category, .. } => Some(category),
        }
    }
}

/// The BIOES tag set over a list of entity categories.
///
/// Index layout: `0` is `O`; category `c` occupies `1 + 4c .. 1 + 4c + 4` in
/// the order B, I, E, S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    categories: Vec<String>,
}

impl TagSet {
    pub fn new<S: AsRef<str>>(categories: &[S]) -> Result<Self, RuleError> {
        let categories: Vec<String> = categories.iter().map(|c| c.as_ref().to_string()).collect();
        for (i, c) in categories.iter().enumerate() {
            if c.is_empty() || c.contains(char::is_whitespace) || categories[..i].contains(c) {
                return Err(RuleError::BadTagSet(c.clone()));
            }
        }
        Ok(Self { categories })
    }

    /// PER, LOC, ORG, MISC.
    pub fn conll() -> Self {
        Self::new(&["PER", "LOC", "ORG", "MISC"]).expect("static tag set")
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn len(&self) -> usize {
        1 + 4 * self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == name)
    }

    pub fn index(&self, tag: Tag) -> usize {
        match tag {
            Tag::O => 0,
            Tag::Entity { prefix, category } => {
                1 + 4 * category
                    + match prefix {
                        Prefix::B => 0,
                        Prefix::I => 1,
                        Prefix::E => 2,
                        Prefix::S => 3,
                    }
            }
        }
    }

    pub fn tag(&self, index: usize) -> Tag {
        assert!(index < self.len(), "tag index {index} out of range");
        if index == 0 {
            return Tag::O;
        }
        let k = index - 1;
        Tag::Entity {
            prefix: Prefix::ALL[k % 4],
            category: k / 4,
        }
    }

    pub fn parse(&self, s: &str) -> Result<usize, RuleError> {
        if s == "O" {
            return Ok(0);
        }
        let bad = || RuleError::BadTag(s.to_string());
        let (p, cat) = s.split_once('-').ok_or_else(bad)?;
        let prefix = match p {
            "B" => Prefix::B,
            "I" => Prefix::I,
            "E" => Prefix::E,
            "S" => Prefix::S,
            _ => return Err(bad()),
        };
        let category = self.category_index(cat).ok_or_else(bad)?;
        Ok(self.index(Tag::Entity { prefix, category }))
    }

    pub fn name(&self, index: usize) -> String {
        match self.tag(index) {
            Tag::O => "O".to_string(),
            Tag::Entity { prefix, category } => {
                format!("{}-{}", prefix.letter(), self.categories[category])
            }
        }
    }

    /// Whether `cur` may follow `prev`; `None` marks a sequence boundary.
    pub fn allowed(&self, prev: Option<usize>, cur: Option<usize>) -> bool {
        let prev = prev.map(|i| self.tag(i));
        let cur = cur.map(|i| self.tag(i));
        match (prev, cur) {
            (None, None) => true,
            (Some(p), None) => !p.opens(),
            (None, Some(c)) => !c.continues(),
            (Some(p), Some(c)) => {
                if p.opens() {
                    c.continues() && c.category() == p.category()
                } else {
                    !c.continues()
                }
            }
        }
    }

    /// Whether a whole tag sequence satisfies every bigram constraint.
    pub fn is_valid_sequence(&self, tags: &[usize]) -> bool {
        let mut prev = None;
        for &t in tags {
            if !self.allowed(prev, Some(t)) {
                return false;
            }
            prev = Some(t);
        }
        self.allowed(prev, None)
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.categories.join(","))
    }
}
