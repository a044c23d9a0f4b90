//! Exact counting and classification of transversals, plexes, and
//! multiplexes in iterated quasigroups.
//!
//! Starting from a binary quasigroup `G` of order `n` (a latin square), the
//! `d`-iterated quasigroup applies `G` left-to-right `d` times. Its graph is
//! a `(d+1)`-dimensional code whose support carries transversals (one index
//! per hyperplane), `k`-plexes (`k` distinct indices per hyperplane), and
//! `k`-multiplexes (multiset variant). This crate computes their counts two
//! independent ways and derives the constants governing their growth:
//!
//! - [`oracle`] — exhaustive backtracking over the code support: reference
//!   counts, plex/multiplex classification, structural bounds.
//! - [`chain`] — an exact Markov-style recurrence over symbol-count
//!   signatures whose step matrix has constant row sum `λ`; counts for all
//!   depths follow from one matrix.
//! - [`spectral`] — exact rational eigen-analysis of the step matrix:
//!   dominant eigenvectors, limit constants `c(G, k)`, convergence reports.
//! - [`algebra`] — Cayley tables, divisions, folds, isotopies, builtins.
//! - [`reference`] — closed-form transversal counts for the four smallest
//!   groups, an independent yardstick for both routes.
//! - [`cli`] — the `iterplex` command-line front end over all of the above.
//!
//! Every computation is exact: counts are big integers, eigenvectors and
//! constants are big rationals. Decimal output is display-only.
//!
//! The `examples/` directory demonstrates each capability end to end:
//!
//! ```text
//! cargo run --example validate_table        # parse and probe a table file
//! cargo run --example transversal_counts    # oracle vs recurrence, exact
//! cargo run --example summary_table         # closed forms for orders 2..4
//! cargo run --example limit_constants       # c(G, k) via eigenvectors
//! cargo run --example lumping_verification  # block-aggregated matrices
//! cargo run --example classify_multiplexes  # plex taxonomy + bounds
//! cargo run --example partial_multiplexes   # partial variants end to end
//! ```

pub mod algebra;
pub mod chain;
pub mod cli;
pub mod exact;
pub mod oracle;
pub mod reference;
pub mod spectral;

pub use algebra::{CayleyTable, Symbol, SymbolVector};
