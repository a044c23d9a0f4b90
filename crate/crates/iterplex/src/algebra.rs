//! Finite binary quasigroups presented as Cayley tables.
//!
//! A quasigroup of order `n` is stored as an `n × n` latin square over the
//! symbols `1..=n`. Rows index the left operand, columns the right operand.
//! Both division operations are precomputed at construction, so `product`,
//! `left_divide` and `right_divide` are all O(1) lookups.
//!
//! The symbol `1` plays a distinguished role throughout the crate: a vector
//! `β = (β_1, …, β_D)` belongs to the support of the D-dimensional code of
//! the iterated quasigroup exactly when the left-to-right fold
//! `(((β_1 ∗ β_2) ∗ β_3) … ) ∗ β_D` equals `1` (see [`CayleyTable::mds_member`]).

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest supported quasigroup order.
pub const MAX_ORDER: usize = 64;

/// A quasigroup symbol. Externally 1-based, as in table files.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(u16);

impl Symbol {
    /// Builds a symbol from its 1-based value. Panics on zero.
    pub fn from_one_based(value: u16) -> Symbol {
        assert!(value > 0, "symbols are 1-based");
        Symbol(value)
    }

    /// Builds a symbol from a 0-based index.
    pub fn from_index(index: usize) -> Symbol {
        Symbol(index as u16 + 1)
    }

    /// The 1-based value, as written in table files.
    pub fn one_based(self) -> u16 {
        self.0
    }

    /// The 0-based index used for array lookups.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A row vector of symbols, e.g. one index of a code or one table column.
pub type SymbolVector = Vec<Symbol>;

/// Errors raised while building or combining Cayley tables.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("table is empty")]
    Empty,
    #[error("table is not square: {rows} rows but line {line} has {found} entries")]
    NonSquare {
        rows: usize,
        line: usize,
        found: usize,
    },
    #[error("line {line}: {token:?} is not a symbol")]
    InvalidSymbol { line: usize, token: String },
    #[error("line {line}: symbol {value} out of range 1..={order}")]
    SymbolOutOfRange {
        line: usize,
        value: u64,
        order: usize,
    },
    #[error("row {row} is not a permutation: symbol {symbol} repeats")]
    RowNotPermutation { row: u16, symbol: u16 },
    #[error("column {column} is not a permutation: symbol {symbol} repeats")]
    ColumnNotPermutation { column: u16, symbol: u16 },
    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("vectors have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("not a permutation of 1..={expected}")]
    BadPermutation { expected: usize },
    #[error("permutation acts on {found} symbols, table has {expected}")]
    PermutationOrderMismatch { expected: usize, found: usize },
    #[error("unknown builtin table {0:?}")]
    UnknownBuiltin(String),
}

/// A finite binary quasigroup: a latin square with O(1) product and divisions.
#[derive(Clone, PartialEq, Eq)]
pub struct CayleyTable {
    order: usize,
    /// Row-major products, 0-based: `cells[a * order + b] = a ∗ b`.
    cells: Vec<u16>,
    /// `left_div[a * order + c] = b` with `a ∗ b = c`.
    left_div: Vec<u16>,
    /// `right_div[b * order + c] = a` with `a ∗ b = c`.
    right_div: Vec<u16>,
}

impl CayleyTable {
    /// Validates a 0-based cell matrix and precomputes the division tables.
    fn from_cells(order: usize, cells: Vec<u16>) -> Result<CayleyTable, TableError> {
        if order == 0 {
            return Err(TableError::Empty);
        }
        if order > MAX_ORDER {
            return Err(TableError::OrderTooLarge {
                order,
                max: MAX_ORDER,
            });
        }
        debug_assert_eq!(cells.len(), order * order);

        let mut left_div = vec![u16::MAX; order * order];
        let mut right_div = vec![u16::MAX; order * order];
        for a in 0..order {
            for b in 0..order {
                let c = cells[a * order + b] as usize;
                if left_div[a * order + c] != u16::MAX {
                    return Err(TableError::RowNotPermutation {
                        row: a as u16 + 1,
                        symbol: c as u16 + 1,
                    });
                }
                left_div[a * order + c] = b as u16;
                if right_div[b * order + c] != u16::MAX {
                    return Err(TableError::ColumnNotPermutation {
                        column: b as u16 + 1,
                        symbol: c as u16 + 1,
                    });
                }
                right_div[b * order + c] = a as u16;
            }
        }
        Ok(CayleyTable {
            order,
            cells,
            left_div,
            right_div,
        })
    }

    /// Parses the table file format: one row per line, `n` integers in
    /// `1..=n` separated by whitespace. Lines starting with `#` and blank
    /// lines are ignored.
    pub fn parse(text: &str) -> Result<CayleyTable, TableError> {
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut line_numbers: Vec<usize> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for token in line.split_whitespace() {
                let value: u64 = token.parse().map_err(|_| TableError::InvalidSymbol {
                    line: i + 1,
                    token: token.to_string(),
                })?;
                row.push(value);
            }
            rows.push(row);
            line_numbers.push(i + 1);
        }
        if rows.is_empty() {
            return Err(TableError::Empty);
        }
        let order = rows.len();
        for (row, &line) in rows.iter().zip(&line_numbers) {
            if row.len() != order {
                return Err(TableError::NonSquare {
                    rows: order,
                    line,
                    found: row.len(),
                });
            }
        }
        let mut cells = Vec::with_capacity(order * order);
        for (row, &line) in rows.iter().zip(&line_numbers) {
            for &value in row {
                if value < 1 || value > order as u64 {
                    return Err(TableError::SymbolOutOfRange { line, value, order });
                }
                cells.push(value as u16 - 1);
            }
        }
        CayleyTable::from_cells(order, cells)
    }

    /// The cyclic group of order `n`: `a ∗ b = a + b - 1 (mod n)` on 1-based
    /// symbols, so row `a` reads `a, a+1, …` cyclically.
    pub fn cyclic(n: usize) -> Result<CayleyTable, TableError> {
        if n == 0 {
            return Err(TableError::Empty);
        }
        if n > MAX_ORDER {
            return Err(TableError::OrderTooLarge { order: n, max: MAX_ORDER });
        }
        let mut cells = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                cells.push(((a + b) % n) as u16);
            }
        }
        CayleyTable::from_cells(n, cells)
    }

    /// The Klein four-group, i.e. the direct product of two copies of the
    /// cyclic group of order 2.
    pub fn klein() -> CayleyTable {
        let c2 = CayleyTable::cyclic(2).expect("order 2");
        CayleyTable::direct_product(&c2, &c2).expect("order 4")
    }

    /// Direct product; the pair `(i, j)` (1-based in each factor) becomes
    /// the symbol `(i - 1) · n₂ + j`.
    pub fn direct_product(
        left: &CayleyTable,
        right: &CayleyTable,
    ) -> Result<CayleyTable, TableError> {
        let (n1, n2) = (left.order, right.order);
        let order = n1 * n2;
        if order > MAX_ORDER {
            return Err(TableError::OrderTooLarge { order, max: MAX_ORDER });
        }
        let mut cells = Vec::with_capacity(order * order);
        for a in 0..order {
            let (ai, aj) = (a / n2, a % n2);
            for b in 0..order {
                let (bi, bj) = (b / n2, b % n2);
                let ci = left.cells[ai * n1 + bi] as usize;
                let cj = right.cells[aj * n2 + bj] as usize;
                cells.push((ci * n2 + cj) as u16);
            }
        }
        CayleyTable::from_cells(order, cells)
    }

    /// The number of symbols.
    pub fn order(&self) -> usize {
        self.order
    }

    /// All symbols `1..=n` in ascending order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.order).map(Symbol::from_index)
    }

    /// `a ∗ b`.
    pub fn product(&self, a: Symbol, b: Symbol) -> Symbol {
        Symbol(self.cells[a.index() * self.order + b.index()] + 1)
    }

    /// The unique `b` with `a ∗ b = c`.
    pub fn left_divide(&self, a: Symbol, c: Symbol) -> Symbol {
        Symbol(self.left_div[a.index() * self.order + c.index()] + 1)
    }

    /// The unique `a` with `a ∗ b = c`.
    pub fn right_divide(&self, c: Symbol, b: Symbol) -> Symbol {
        Symbol(self.right_div[b.index() * self.order + c.index()] + 1)
    }

    pub(crate) fn product0(&self, a: usize, b: usize) -> usize {
        self.cells[a * self.order + b] as usize
    }

    pub(crate) fn left_div0(&self, a: usize, c: usize) -> usize {
        self.left_div[a * self.order + c] as usize
    }

    pub(crate) fn right_div0(&self, c: usize, b: usize) -> usize {
        self.right_div[b * self.order + c] as usize
    }

    /// Left-to-right fold `((x_1 ∗ x_2) ∗ x_3) … ∗ x_m`. Panics on an empty
    /// slice.
    pub fn left_fold(&self, xs: &[Symbol]) -> Symbol {
        assert!(!xs.is_empty(), "fold of an empty vector");
        let mut acc = xs[0].index();
        for x in &xs[1..] {
            acc = self.product0(acc, x.index());
        }
        Symbol::from_index(acc)
    }

    /// Whether `beta` lies in the support of the code of dimension
    /// `beta.len()`: the left fold must equal the distinguished symbol `1`.
    pub fn mds_member(&self, beta: &[Symbol]) -> bool {
        self.left_fold(beta).index() == 0
    }

    /// Componentwise product of two equal-length vectors.
    pub fn componentwise_product(
        &self,
        u: &[Symbol],
        v: &[Symbol],
    ) -> Result<SymbolVector, TableError> {
        if u.len() != v.len() {
            return Err(TableError::LengthMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        Ok(u.iter()
            .zip(v)
            .map(|(&a, &b)| self.product(a, b))
            .collect())
    }

    /// The isotopic table `new(a, b) = σ₀⁻¹(old(σ₁(a), σ₂(b)))`.
    pub fn apply_isotopy(&self, isotopy: &Isotopy) -> Result<CayleyTable, TableError> {
        for p in [&isotopy.output, &isotopy.left, &isotopy.right] {
            if p.order() != self.order {
                return Err(TableError::PermutationOrderMismatch {
                    expected: self.order,
                    found: p.order(),
                });
            }
        }
        let inv_out = isotopy.output.inverse();
        let n = self.order;
        let mut cells = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let old = self.product0(isotopy.left.apply0(a), isotopy.right.apply0(b));
                cells.push(inv_out.apply0(old) as u16);
            }
        }
        CayleyTable::from_cells(n, cells)
    }

    /// A short stable identifier: the order plus an FNV-1a hash of the cells.
    /// Used to key cached artifacts and to label reports.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &c in &self.cells {
            h ^= u64::from(c);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("n{}-{:016x}", self.order, h)
    }

    /// Renders the table in the file format accepted by [`CayleyTable::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in 0..self.order {
            for b in 0..self.order {
                if b > 0 {
                    out.push(' ');
                }
                out.push_str(&(self.cells[a * self.order + b] + 1).to_string());
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for CayleyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CayleyTable({})", self.fingerprint())
    }
}

/// A permutation of the symbols `1..=n`, stored as 0-based images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<u16>);

impl Permutation {
    /// The identity on `n` symbols.
    pub fn identity(n: usize) -> Permutation {
        Permutation((0..n as u16).collect())
    }

    /// Builds from 1-based images: `images[i]` is the image of symbol `i + 1`.
    pub fn from_one_based(images: &[u16]) -> Result<Permutation, TableError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in images {
            if v == 0 || v as usize > n || seen[v as usize - 1] {
                return Err(TableError::BadPermutation { expected: n });
            }
            seen[v as usize - 1] = true;
        }
        Ok(Permutation(images.iter().map(|&v| v - 1).collect()))
    }

    /// The number of symbols acted on.
    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// The image of a symbol.
    pub fn apply(&self, s: Symbol) -> Symbol {
        Symbol(self.0[s.index()] + 1)
    }

    fn apply0(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// The inverse permutation.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u16; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v as usize] = i as u16;
        }
        Permutation(inv)
    }
}

/// A quasigroup isotopy `(σ₀, σ₁, σ₂)`: `σ₀` relabels products, `σ₁` left
/// operands, `σ₂` right operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isotopy {
    pub output: Permutation,
    pub left: Permutation,
    pub right: Permutation,
}

impl Isotopy {
    /// The identity isotopy on `n` symbols.
    pub fn identity(n: usize) -> Isotopy {
        Isotopy {
            output: Permutation::identity(n),
            left: Permutation::identity(n),
            right: Permutation::identity(n),
        }
    }
}

/// A named table constructor, written `cyclic:<n>`, `klein`, or
/// `product:<spec>x<spec>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinSpec {
    Cyclic(usize),
    Klein,
    Product(Box<BuiltinSpec>, Box<BuiltinSpec>),
}

impl BuiltinSpec {
    /// Parses the part after a `builtin:` prefix, e.g. `cyclic:5` or
    /// `product:cyclic:2xcyclic:3`. Product factors may nest; the split
    /// point is the first `x` where both sides parse.
    pub fn parse(spec: &str) -> Result<BuiltinSpec, TableError> {
        if spec == "klein" {
            return Ok(BuiltinSpec::Klein);
        }
        if let Some(n) = spec.strip_prefix("cyclic:") {
            let n: usize = n
                .parse()
                .map_err(|_| TableError::UnknownBuiltin(spec.to_string()))?;
            if n == 0 || n > MAX_ORDER {
                return Err(TableError::UnknownBuiltin(spec.to_string()));
            }
            return Ok(BuiltinSpec::Cyclic(n));
        }
        if let Some(body) = spec.strip_prefix("product:") {
            for (i, _) in body.match_indices('x') {
                let (a, b) = (&body[..i], &body[i + 1..]);
                if let (Ok(left), Ok(right)) = (BuiltinSpec::parse(a), BuiltinSpec::parse(b)) {
                    return Ok(BuiltinSpec::Product(Box::new(left), Box::new(right)));
                }
            }
        }
        Err(TableError::UnknownBuiltin(spec.to_string()))
    }

    /// Constructs the table.
    pub fn build(&self) -> Result<CayleyTable, TableError> {
        match self {
            BuiltinSpec::Cyclic(n) => CayleyTable::cyclic(*n),
            BuiltinSpec::Klein => Ok(CayleyTable::klein()),
            BuiltinSpec::Product(a, b) => {
                CayleyTable::direct_product(&a.build()?, &b.build()?)
            }
        }
    }
}

/// Parses a builtin URI of the form `builtin:<spec>` and constructs it.
pub fn builtin_table(uri: &str) -> Result<CayleyTable, TableError> {
    let spec = uri
        .strip_prefix("builtin:")
        .ok_or_else(|| TableError::UnknownBuiltin(uri.to_string()))?;
    BuiltinSpec::parse(spec)?.build()
}
