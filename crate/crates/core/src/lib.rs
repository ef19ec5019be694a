//! Exact top-k sequential pattern mining under leverage.
//!
//! A pattern's leverage is its support minus its expected support, where the
//! expected support is the best explanation of the pattern by any pair of
//! sub-patterns it splits into: the mean support over every order-preserving
//! interleaving of the pair. [`search::mine_topk`] finds the k patterns with
//! the highest leverage (or support) by depth-first branch-and-bound, and
//! [`synthgen`] generates benchmark corpora with planted patterns.
//!
//! ```
//! use seqlev::{mine_topk, SearchConfig, SequenceDatabase};
//!
//! let db = SequenceDatabase::parse_str("a b\na b\na b\na b\nb a\n");
//! let top = mine_topk(&db, &SearchConfig { k: 1, ..Default::default() }).unwrap();
//! assert_eq!(db.item_table().render(&top[0].pattern), "a b");
//! assert!((top[0].score_f64() - 0.3).abs() < 1e-12);
//! ```

pub mod combinator;
pub mod corpus;
pub mod error;
pub mod expectation;
pub mod fraction;
pub mod search;
pub mod synthgen;

pub use corpus::{is_subsequence, CoverState, ItemId, ItemTable, Pattern, Sequence, SequenceDatabase};
pub use error::{Error, Result};
pub use expectation::{Aggregation, MeasureConfig, MeasureKind, ScoredPattern, Scorer};
pub use fraction::Fraction;
pub use search::{mine_topk, SearchConfig, SearchOutcome, SearchStats, TopKQueue};
