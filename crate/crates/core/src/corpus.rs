//! Example programs shipped with the library.

pub const VERSION: &str = "corpus-1";

pub const QUEUE: &str = include_str!("../corpus/queue.nst");
pub const DYCK: &str = include_str!("../corpus/dyck.nst");
pub const DYCK_NAMES: &str = include_str!("../corpus/dyck_names.nst");
pub const EXP: &str = include_str!("../corpus/exp.nst");
pub const TREE: &str = include_str!("../corpus/tree.nst");
pub const TRIE: &str = include_str!("../corpus/trie.nst");
pub const L3: &str = include_str!("../corpus/l3.nst");
pub const LISTS: &str = include_str!("../corpus/lists.nst");
pub const ANBN: &str = include_str!("../corpus/anbn.cfst");

/// All `.nst` programs, by file name.
pub const PROGRAMS: &[(&str, &str)] = &[
    ("queue.nst", QUEUE),
    ("dyck.nst", DYCK),
    ("dyck_names.nst", DYCK_NAMES),
    ("exp.nst", EXP),
    ("tree.nst", TREE),
    ("trie.nst", TRIE),
    ("l3.nst", L3),
    ("lists.nst", LISTS),
];
