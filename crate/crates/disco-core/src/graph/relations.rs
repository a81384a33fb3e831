use core::fmt;

/// Number of RST relation types in the shipped vocabulary.
pub const RST_RELATION_COUNT: usize = 43;

/// Name of the reserved slot for relation strings outside the vocabulary.
pub const UNKNOWN_RELATION: &str = "unknown";

// Version 1 of the relation vocabulary. Mirrored verbatim in
// data/rst_relations_v1.txt (one name per line, same order); a unit test
// keeps the two in sync. Edge labels are matched exactly (lowercase);
// anything unseen maps to the reserved "unknown" slot.
static NAMES_V1: [&str; RST_RELATION_COUNT] = [
    "root",
    "elaboration",
    "attribution",
    "joint",
    "same-unit",
    "contrast",
    "explanation",
    "background",
    "cause",
    "result",
    "comparison",
    "condition",
    "enablement",
    "evaluation",
    "temporal",
    "manner",
    "means",
    "purpose",
    "summary",
    "list",
    "sequence",
    "topic-comment",
    "topic-change",
    "textual-organization",
    "antithesis",
    "concession",
    "circumstance",
    "consequence",
    "definition",
    "disjunction",
    "example",
    "hypothetical",
    "interpretation",
    "justify",
    "motivation",
    "otherwise",
    "preference",
    "problem-solution",
    "question-answer",
    "restatement",
    "rhetorical-question",
    "analogy",
    "unknown",
];

/// Ordered, versioned list of the RST relation names. Relation ids are
/// indices into this list and stable across runs and releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationVocab {
    names: &'static [&'static str; RST_RELATION_COUNT],
    version: &'static str,
}

impl RelationVocab {
    pub fn v1() -> Self {
        RelationVocab {
            names: &NAMES_V1,
            version: "v1",
        }
    }

    pub fn version(&self) -> &'static str {
        self.version
    }

    pub fn names(&self) -> &'static [&'static str] {
        self.names
    }

    pub fn len(&self) -> usize {
        RST_RELATION_COUNT
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    pub fn name(&self, id: usize) -> Option<&'static str> {
        self.names.get(id).copied()
    }

    pub fn unknown_id(&self) -> usize {
        RST_RELATION_COUNT - 1
    }

    /// Resolve a relation name; the boolean is false when the name fell
    /// through to the reserved unknown slot.
    pub fn id_or_unknown(&self, name: &str) -> (usize, bool) {
        match self.id(name) {
            Some(id) => (id, true),
            None => (self.unknown_id(), false),
        }
    }
}

impl Default for RelationVocab {
    fn default() -> Self {
        RelationVocab::v1()
    }
}

impl fmt::Display for RelationVocab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rst-relations-{}", self.version)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn vocabulary_matches_the_shipped_data_file() {
        let file = include_str!("../../data/rst_relations_v1.txt");
        let from_file: Vec<&str> = file.lines().filter(|l| !l.trim().is_empty()).collect();
        assert_eq!(from_file.len(), RST_RELATION_COUNT);
        assert_eq!(from_file.as_slice(), RelationVocab::v1().names());
    }

    #[test]
    fn ids_are_stable_and_cover_the_cited_names() {
        let v = RelationVocab::v1();
        assert_eq!(v.id("root"), Some(0));
        assert_eq!(v.id("elaboration"), Some(1));
        assert!(v.id("comparison").is_some());
        assert!(v.id("result").is_some());
        assert_eq!(v.name(0), Some("root"));
    }

    #[test]
    fn unseen_names_fall_through_to_the_unknown_slot() {
        let v = RelationVocab::v1();
        assert_eq!(v.id_or_unknown("elaboration"), (1, true));
        let (id, known) = v.id_or_unknown("spacetime");
        assert_eq!(id, v.unknown_id());
        assert!(!known);
        assert_eq!(v.name(id), Some(UNKNOWN_RELATION));
    }

    #[test]
    fn names_are_unique() {
        let v = RelationVocab::v1();
        for (i, a) in v.names().iter().enumerate() {
            for b in v.names().iter().skip(i + 1) {
                assert_ne!(a, b);
            }
        }
    }
}
