//! Hand-written fixture tables.

#![allow(dead_code)]

use lqca_core::merge::{GlobalCluster, GlobalMention, MentionId};

/// Cluster members as `(surface, start, is_pronoun)`, listed in the order
/// the cluster enumerates them, with the expected representative `(surface,
/// start)`.
pub struct RepresentativeCase {
    pub name: &'static str,
    pub members: &'static [(&'static str, usize, bool)],
    pub expected: Option<(&'static str, usize)>,
}

pub const REPRESENTATIVE_CASES: &[RepresentativeCase] = &[
    RepresentativeCase {
        name: "pronouns excluded, tie goes to the earlier surface",
        members: &[
            ("he", 0, true),
            ("Dr. Smith", 10, false),
            ("he", 20, true),
            ("the doctor", 40, false),
            ("he", 50, true),
            ("Dr. Smith", 60, false),
            ("he", 70, true),
            ("the doctor", 80, false),
            ("he", 90, true),
        ],
        expected: Some(("Dr. Smith", 10)),
    },
    RepresentativeCase {
        name: "all pronouns",
        members: &[("it", 0, true), ("they", 9, true)],
        expected: None,
    },
    RepresentativeCase {
        name: "singleton",
        members: &[("Rome", 4, false)],
        expected: Some(("Rome", 4)),
    },
    RepresentativeCase {
        name: "count tie broken by first occurrence",
        members: &[
            ("Robert", 5, false),
            ("Robert", 9, false),
            ("Bob", 0, false),
            ("Bob", 20, false),
        ],
        expected: Some(("Bob", 0)),
    },
    RepresentativeCase {
        name: "frequency beats position",
        members: &[
            ("Alice", 0, false),
            ("Ms. Hart", 5, false),
            ("Ms. Hart", 15, false),
            ("Ms. Hart", 25, false),
        ],
        expected: Some(("Ms. Hart", 5)),
    },
    RepresentativeCase {
        name: "surfaces group after case folding and space collapsing",
        members: &[
            ("Dr. Smith", 0, false),
            ("The  Doctor", 10, false),
            ("the doctor", 30, false),
        ],
        expected: Some(("The  Doctor", 10)),
    },
    RepresentativeCase {
        name: "a mention containing a pronoun is a pronoun mention",
        members: &[
            ("her book", 0, true),
            ("her book", 10, true),
            ("the book", 20, false),
        ],
        expected: Some(("the book", 20)),
    },
    RepresentativeCase {
        name: "enumeration order is irrelevant",
        members: &[
            ("Carol", 50, false),
            ("she", 40, true),
            ("Carol", 30, false),
            ("Mrs. Dean", 10, false),
        ],
        expected: Some(("Carol", 30)),
    },
    RepresentativeCase {
        name: "single pronoun",
        members: &[("she", 3, true)],
        expected: None,
    },
    RepresentativeCase {
        name: "three singletons, earliest wins",
        members: &[
            ("Paris", 30, false),
            ("the city", 12, false),
            ("the capital", 50, false),
        ],
        expected: Some(("the city", 12)),
    },
];

impl RepresentativeCase {
    /// Mentions, pronoun flags and the cluster over all of them.
    pub fn build(&self) -> (Vec<GlobalMention>, Vec<bool>, GlobalCluster) {
        let mentions = self
            .members
            .iter()
            .enumerate()
            .map(|(i, &(surface, start, _))| GlobalMention {
                id: MentionId(i),
                start,
                end: start + surface.chars().count(),
                surface: surface.to_string(),
                occurrences: vec![0],
            })
            .collect();
        let pronoun = self.members.iter().map(|m| m.2).collect();
        let cluster = GlobalCluster {
            members: (0..self.members.len()).map(MentionId).collect(),
            representative: None,
        };
        (mentions, pronoun, cluster)
    }
}

/// `(response, gold, choice count, expected score, expected unparsed)`.
pub const CHOICE_CASES: &[(&str, &str, usize, f64, bool)] = &[
    ("The answer is B.", "B", 4, 1.0, false),
    ("b)", "B", 4, 1.0, false),
    ("I don't know.", "A", 4, 0.0, true),
    ("(C) Paris", "C", 4, 1.0, false),
    ("A", "A", 4, 1.0, false),
    ("A dog is the answer, so D.", "D", 4, 1.0, false),
    ("Answer: D", "B", 4, 0.0, false),
    ("e.g. B", "B", 5, 1.0, false),
    ("E", "E", 4, 0.0, true),
    ("B and C", "B", 4, 1.0, false),
    ("", "A", 4, 0.0, true),
    ("ABCD", "A", 4, 0.0, true),
];
