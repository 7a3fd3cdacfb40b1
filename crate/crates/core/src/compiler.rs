// SPDX-License-Identifier: Apache-2.0

//! Range rules to ternary and multi-bit CAM tables, and CAM tables to
//! conductance programs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::{matching_rows, ArraySpec};
use crate::cell::{achievable_window, conductance_from_bounds, CellConfig, LevelFamily, VoltageInterval};
use crate::device::DeviceParams;
use crate::error::{AcamError, Result};
use crate::tree::FeatureEncoding;

/// Widest integer key a rule may use.
pub const MAX_KEY_BITS: u32 = 64;

/// Inclusive integer range `[lo, hi]` over `width_bits`-bit keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeRule {
    pub lo: u64,
    pub hi: u64,
    pub width_bits: u32,
    #[serde(default)]
    pub label: String,
}

impl RangeRule {
    pub fn new(lo: u64, hi: u64, width_bits: u32, label: impl Into<String>) -> Result<Self> {
        let r = RangeRule {
            lo,
            hi,
            width_bits,
            label: label.into(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_KEY_BITS).contains(&self.width_bits) {
            return Err(AcamError::domain(format!(
                "width_bits {} outside 1..={MAX_KEY_BITS}",
                self.width_bits
            )));
        }
        if self.lo > self.hi || u128::from(self.hi) > key_max(self.width_bits) {
            return Err(AcamError::domain(format!(
                "range [{}, {}] invalid for {} bits",
                self.lo, self.hi, self.width_bits
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: u64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn key_max(width_bits: u32) -> u128 {
    (1u128 << width_bits) - 1
}

/// Parse rules from JSON lines. Blank lines are skipped; errors carry the
/// line number.
pub fn parse_rules(text: &str) -> Result<Vec<RangeRule>> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rule: RangeRule = serde_json::from_str(line).map_err(|e| AcamError::Parse {
            line: Some(i + 1),
            msg: e.to_string(),
        })?;
        rule.validate()
            .map_err(|e| AcamError::Domain(format!("line {}: {e}", i + 1)))?;
        rules.push(rule);
    }
    Ok(rules)
}

/// One ternary symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trit {
    Zero,
    One,
    X,
}

/// Ternary word, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct TernaryWord {
    pub symbols: Vec<Trit>,
}

impl TernaryWord {
    /// Word whose top `width - free` bits are the prefix of `value` and
    /// whose low `free` bits are wildcards.
    pub fn prefix(value: u128, width: u32, free: u32) -> Self {
        let symbols = (0..width)
            .map(|i| {
                let bit = width - 1 - i;
                if bit < free {
                    Trit::X
                } else if (value >> bit) & 1 == 1 {
                    Trit::One
                } else {
                    Trit::Zero
                }
            })
            .collect();
        TernaryWord { symbols }
    }

    pub fn width(&self) -> usize {
        self.symbols.len()
    }

    pub fn matches(&self, key: u64) -> bool {
        let w = self.symbols.len();
        self.symbols.iter().enumerate().all(|(i, s)| {
            let bit = (u128::from(key) >> (w - 1 - i)) & 1;
            match s {
                Trit::X => true,
                Trit::One => bit == 1,
                Trit::Zero => bit == 0,
            }
        })
    }

    /// Number of keys the word stands for.
    pub fn cardinality(&self) -> u128 {
        1u128 << self.symbols.iter().filter(|s| **s == Trit::X).count()
    }
}

impl fmt::Display for TernaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            f.write_str(match s {
                Trit::Zero => "0",
                Trit::One => "1",
                Trit::X => "X",
            })?;
        }
        Ok(())
    }
}

impl From<TernaryWord> for String {
    fn from(w: TernaryWord) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for TernaryWord {
    type Error = AcamError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for TernaryWord {
    type Err = AcamError;
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Trit::Zero),
                '1' => Ok(Trit::One),
                'X' | 'x' => Ok(Trit::X),
                other => Err(AcamError::domain(format!("invalid ternary symbol {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(TernaryWord { symbols })
    }
}

/// Minimal prefix cover of `r`, ascending. Splits the binary trie from the
/// root and emits every node that lies wholly inside the range.
pub fn range_to_ternary(r: &RangeRule) -> Vec<TernaryWord> {
    fn walk(base: u128, bits: u32, r: &RangeRule, out: &mut Vec<TernaryWord>) {
        let end = base + (1u128 << bits) - 1;
        let (lo, hi) = (u128::from(r.lo), u128::from(r.hi));
        if end < lo || base > hi {
            return;
        }
        if lo <= base && end <= hi {
            out.push(TernaryWord::prefix(base, r.width_bits, bits));
            return;
        }
        let half = 1u128 << (bits - 1);
        walk(base, bits - 1, r, out);
        walk(base + half, bits - 1, r, out);
    }
    let mut out = Vec::new();
    walk(0, r.width_bits, r, &mut out);
    out
}

/// One multi-bit cell of a digit word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DigitSpec {
    Exact(u64),
    Wildcard,
    /// Inclusive digit range `n..=m`.
    Subrange(u64, u64),
}

impl DigitSpec {
    /// Canonical form: single-value ranges become exact, full ranges become
    /// wildcards.
    pub fn normalized(lo: u64, hi: u64, digit_max: u64) -> Self {
        if lo == 0 && hi == digit_max {
            DigitSpec::Wildcard
        } else if lo == hi {
            DigitSpec::Exact(lo)
        } else {
            DigitSpec::Subrange(lo, hi)
        }
    }

    /// Inclusive digit bounds for a cell with `digit_max + 1` values.
    pub fn bounds(&self, digit_max: u64) -> (u64, u64) {
        match *self {
            DigitSpec::Exact(n) => (n, n),
            DigitSpec::Wildcard => (0, digit_max),
            DigitSpec::Subrange(n, m) => (n, m),
        }
    }

    pub fn contains(&self, digit: u64) -> bool {
        match *self {
            DigitSpec::Exact(n) => digit == n,
            DigitSpec::Wildcard => true,
            DigitSpec::Subrange(n, m) => n <= digit && digit <= m,
        }
    }
}

impl fmt::Display for DigitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSpec::Exact(n) => write!(f, "{n}"),
            DigitSpec::Wildcard => f.write_str("X"),
            DigitSpec::Subrange(n, m) => write!(f, "{{{n}-{m}}}"),
        }
    }
}

impl From<DigitSpec> for String {
    fn from(d: DigitSpec) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DigitSpec {
    type Error = AcamError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for DigitSpec {
    type Err = AcamError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || AcamError::domain(format!("invalid digit cell {s:?}"));
        let s = s.trim();
        if s == "X" || s == "x" {
            return Ok(DigitSpec::Wildcard);
        }
        if let Some(inner) = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            let (a, b) = inner.split_once('-').ok_or_else(bad)?;
            let n: u64 = a.trim().parse().map_err(|_| bad())?;
            let m: u64 = b.trim().parse().map_err(|_| bad())?;
            if n > m {
                return Err(bad());
            }
            return Ok(DigitSpec::Subrange(n, m));
        }
        s.parse().map(DigitSpec::Exact).map_err(|_| bad())
    }
}

/// Multi-bit word, most significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DigitWord {
    pub digits: Vec<DigitSpec>,
}

impl DigitWord {
    pub fn matches(&self, key: u64, bits_per_cell: u32) -> bool {
        let d = key_digits(key, bits_per_cell, self.digits.len());
        self.digits.iter().zip(d).all(|(spec, v)| spec.contains(v))
    }

    /// Number of keys the word stands for.
    pub fn cardinality(&self, bits_per_cell: u32) -> u128 {
        let max = digit_max(bits_per_cell);
        self.digits
            .iter()
            .map(|s| {
                let (a, b) = s.bounds(max);
                u128::from(b - a) + 1
            })
            .product()
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.digits.iter().map(ToString::to_string).collect();
        f.write_str(&cells.join(" "))
    }
}

fn digit_max(bits_per_cell: u32) -> u64 {
    key_max(bits_per_cell) as u64
}

/// Number of cells needed for a `width_bits` key; high digits are
/// zero-padded.
pub fn digit_count(width_bits: u32, bits_per_cell: u32) -> usize {
    width_bits.div_ceil(bits_per_cell) as usize
}

/// Base-`2^bits_per_cell` digits of `key`, most significant first.
pub fn key_digits(key: u64, bits_per_cell: u32, n_digits: usize) -> Vec<u64> {
    let mask = key_max(bits_per_cell);
    (0..n_digits)
        .map(|i| {
            let shift = bits_per_cell as usize * (n_digits - 1 - i);
            if shift >= 128 {
                0
            } else {
                ((u128::from(key) >> shift) & mask) as u64
            }
        })
        .collect()
}

/// Disjoint digit words covering exactly `[r.lo, r.hi]`. Equal leading
/// digits become exact cells; where they differ the range splits into a
/// low tail, a middle block of one subrange cell over wildcards, and a high
/// tail, each tail handled the same way one digit further down.
pub fn range_to_digits(r: &RangeRule, bits_per_cell: u32) -> Result<Vec<DigitWord>> {
    r.validate()?;
    if !(1..=r.width_bits).contains(&bits_per_cell) {
        return Err(AcamError::domain(format!(
            "bits_per_cell {bits_per_cell} outside 1..={}",
            r.width_bits
        )));
    }
    let n = digit_count(r.width_bits, bits_per_cell);
    let max = digit_max(bits_per_cell);
    let lo = key_digits(r.lo, bits_per_cell, n);
    let hi = key_digits(r.hi, bits_per_cell, n);

    fn split(lo: &[u64], hi: &[u64], max: u64, prefix: &mut Vec<DigitSpec>, out: &mut Vec<DigitWord>) {
        let Some((&l, lo_rest)) = lo.split_first() else {
            out.push(DigitWord { digits: prefix.clone() });
            return;
        };
        let (&h, hi_rest) = hi.split_first().expect("equal lengths");
        if l == h {
            prefix.push(DigitSpec::Exact(l));
            split(lo_rest, hi_rest, max, prefix, out);
            prefix.pop();
            return;
        }
        let lo_aligned = lo_rest.iter().all(|&d| d == 0);
        let hi_aligned = hi_rest.iter().all(|&d| d == max);
        if !lo_aligned {
            prefix.push(DigitSpec::Exact(l));
            split(lo_rest, &vec![max; lo_rest.len()], max, prefix, out);
            prefix.pop();
        }
        let mid_lo = if lo_aligned { l } else { l + 1 };
        let mid_hi = if hi_aligned { h } else { h - 1 };
        if mid_lo <= mid_hi {
            let mut digits = prefix.clone();
            digits.push(DigitSpec::normalized(mid_lo, mid_hi, max));
            digits.extend(std::iter::repeat_n(DigitSpec::Wildcard, lo_rest.len()));
            out.push(DigitWord { digits });
        }
        if !hi_aligned {
            prefix.push(DigitSpec::Exact(h));
            split(&vec![0; hi_rest.len()], hi_rest, max, prefix, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    split(&lo, &hi, max, &mut Vec::with_capacity(n), &mut out);
    Ok(out)
}

/// How the keys of a table are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    /// One binary/X cell per key bit.
    Ternary,
    /// One multi-level cell per `bits_per_cell` key bits.
    Digit,
    /// One continuous-interval cell per real-valued feature.
    Analog,
}

/// Stored content of one CAM row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CamRow {
    Ternary(TernaryWord),
    Digit(DigitWord),
    Analog(Vec<VoltageInterval>),
}

impl CamRow {
    pub fn width(&self) -> usize {
        match self {
            CamRow::Ternary(w) => w.width(),
            CamRow::Digit(w) => w.digits.len(),
            CamRow::Analog(v) => v.len(),
        }
    }
}

/// A compiled table plus the side table of labels keyed by row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamTable {
    pub kind: TableKind,
    /// Key width for ternary and digit tables.
    pub key_bits: Option<u32>,
    /// Bits per cell: 1 for ternary, `k` for digit tables, none for analog.
    pub bits_per_cell: Option<u32>,
    /// Levels used when lowering and encoding digit or ternary keys.
    pub level_family: Option<LevelFamily>,
    /// Per-feature input encodings for analog tables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub encodings: Vec<FeatureEncoding>,
    pub rows: Vec<CamRow>,
    pub labels: BTreeMap<usize, String>,
    /// Rules the table was compiled from.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<RangeRule>,
}

impl CamTable {
    /// Ternary table for a set of rules sharing one key width.
    pub fn ternary(rules: &[RangeRule]) -> Result<Self> {
        let width = common_width(rules)?;
        let mut t = CamTable {
            kind: TableKind::Ternary,
            key_bits: Some(width),
            bits_per_cell: Some(1),
            level_family: Some(LevelFamily::with_levels(2)),
            encodings: Vec::new(),
            rows: Vec::new(),
            labels: BTreeMap::new(),
            rules: rules.to_vec(),
        };
        for rule in rules {
            for w in range_to_ternary(rule) {
                t.push(CamRow::Ternary(w), &rule.label);
            }
        }
        Ok(t)
    }

    /// Multi-bit table for a set of rules sharing one key width.
    pub fn digits(rules: &[RangeRule], bits_per_cell: u32) -> Result<Self> {
        let width = common_width(rules)?;
        let level_family = (bits_per_cell < usize::BITS)
            .then(|| 1usize << bits_per_cell)
            .filter(|&n| n <= MAX_FAMILY_LEVELS)
            .map(LevelFamily::with_levels);
        let mut t = CamTable {
            kind: TableKind::Digit,
            key_bits: Some(width),
            bits_per_cell: Some(bits_per_cell),
            level_family,
            encodings: Vec::new(),
            rows: Vec::new(),
            labels: BTreeMap::new(),
            rules: rules.to_vec(),
        };
        for rule in rules {
            for w in range_to_digits(rule, bits_per_cell)? {
                t.push(CamRow::Digit(w), &rule.label);
            }
        }
        Ok(t)
    }

    pub fn push(&mut self, row: CamRow, label: &str) {
        self.labels.insert(self.rows.len(), label.to_string());
        self.rows.push(row);
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Cells per row.
    pub fn width(&self) -> usize {
        match self.kind {
            TableKind::Analog => self.encodings.len(),
            _ => {
                let bits = self.key_bits.unwrap_or(0);
                digit_count(bits, self.bits_per_cell.unwrap_or(1))
            }
        }
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows() * self.width()
    }

    pub fn label(&self, row: usize) -> Option<&str> {
        self.labels.get(&row).map(String::as_str)
    }

    /// Rows whose stored words contain integer `key`, by digit/bit
    /// comparison rather than circuit simulation.
    pub fn logical_matches(&self, key: u64) -> Vec<usize> {
        let k = self.bits_per_cell.unwrap_or(1);
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, row)| match row {
                CamRow::Ternary(w) => w.matches(key),
                CamRow::Digit(w) => w.matches(key, k),
                CamRow::Analog(_) => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// DL voltages for one search. Ternary and digit tables take a single
    /// integer key; analog tables take one real value per feature.
    pub fn encode_input(&self, input: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            TableKind::Analog => {
                if input.len() != self.encodings.len() {
                    return Err(AcamError::DimensionMismatch {
                        expected: self.encodings.len(),
                        got: input.len(),
                    });
                }
                self.encodings
                    .iter()
                    .zip(input)
                    .enumerate()
                    .map(|(f, (e, &x))| {
                        if x.is_finite() && e.min <= x && x <= e.max {
                            Ok(e.encode(x))
                        } else {
                            Err(AcamError::domain(format!(
                                "feature {f} value {x} outside [{}, {}]",
                                e.min, e.max
                            )))
                        }
                    })
                    .collect()
            }
            TableKind::Ternary | TableKind::Digit => {
                let [x] = input else {
                    return Err(AcamError::DimensionMismatch {
                        expected: 1,
                        got: input.len(),
                    });
                };
                let bits = self.key_bits.unwrap_or(0);
                let key_ok = *x >= 0.0 && x.fract() == 0.0 && (*x as u128) <= key_max(bits);
                if !key_ok {
                    return Err(AcamError::domain(format!("key {x} is not a {bits}-bit integer")));
                }
                self.encode_key(*x as u64)
            }
        }
    }

    /// DL voltages for integer `key`: every digit drives the centre of its
    /// level.
    pub fn encode_key(&self, key: u64) -> Result<Vec<f64>> {
        let family = self.family()?;
        let k = self.bits_per_cell.unwrap_or(1);
        Ok(key_digits(key, k, self.width())
            .into_iter()
            .map(|d| family.encode(d as usize))
            .collect())
    }

    fn family(&self) -> Result<&LevelFamily> {
        self.level_family.as_ref().ok_or_else(|| {
            AcamError::InfeasiblePacking(format!(
                "{}-bit cells need more than {MAX_FAMILY_LEVELS} levels",
                self.bits_per_cell.unwrap_or(0)
            ))
        })
    }

    /// Text grid: one line per row, cells aligned, label last.
    pub fn to_grid(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| match row {
                CamRow::Ternary(w) => w.to_string().chars().map(String::from).collect(),
                CamRow::Digit(w) => w.digits.iter().map(ToString::to_string).collect(),
                CamRow::Analog(v) => v
                    .iter()
                    .map(|iv| format!("[{:.4},{:.4}]", iv.lo, iv.hi))
                    .collect(),
            })
            .collect();
        let width = self.rows.iter().map(CamRow::width).max().unwrap_or(0);
        let col_w: Vec<usize> = (0..width)
            .map(|c| cells.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(1))
            .collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let body: Vec<String> = row
                .iter()
                .zip(&col_w)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            out.push_str(&format!(
                "{i:>4} | {} | {}\n",
                body.join(" "),
                self.label(i).unwrap_or("")
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(AcamError::from)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Largest level family a digit table will attach.
pub const MAX_FAMILY_LEVELS: usize = 1 << 16;

fn common_width(rules: &[RangeRule]) -> Result<u32> {
    let first = rules
        .first()
        .ok_or_else(|| AcamError::domain("no rules to compile"))?;
    for r in rules {
        r.validate()?;
        if r.width_bits != first.width_bits {
            return Err(AcamError::DimensionMismatch {
                expected: first.width_bits as usize,
                got: r.width_bits as usize,
            });
        }
    }
    Ok(first.width_bits)
}

/// Voltage interval each cell of `t` must store.
pub fn table_intervals(t: &CamTable) -> Result<Vec<Vec<VoltageInterval>>> {
    t.rows
        .iter()
        .enumerate()
        .map(|(r, row)| match row {
            CamRow::Analog(v) => Ok(v.clone()),
            CamRow::Ternary(w) => {
                let family = t.family()?;
                Ok(w.symbols
                    .iter()
                    .map(|s| match s {
                        Trit::Zero => family.interval(0),
                        Trit::One => family.interval(1),
                        Trit::X => family.window,
                    })
                    .collect())
            }
            CamRow::Digit(w) => {
                let k = t.bits_per_cell.unwrap_or(1);
                let family = t.family()?;
                w.digits
                    .iter()
                    .enumerate()
                    .map(|(c, spec)| {
                        let (a, b) = spec.bounds(digit_max(k));
                        if b as u128 >= family.n_levels as u128 {
                            return Err(AcamError::LevelOverflow {
                                row: r,
                                col: c,
                                digit: spec.to_string(),
                            });
                        }
                        Ok(match spec {
                            DigitSpec::Wildcard => family.window,
                            _ => family.span(a as usize, b as usize),
                        })
                    })
                    .collect()
            }
        })
        .collect()
}

/// Memristor conductances that realise every cell of `t`.
pub fn lower_to_conductances(t: &CamTable, p: &DeviceParams) -> Result<Vec<Vec<CellConfig>>> {
    let intervals = lowering_intervals(t, p)?;
    intervals
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, iv)| {
                    conductance_from_bounds(*iv, p).map_err(|e| match (&t.rows[r], e) {
                        (CamRow::Digit(w), AcamError::OutOfWindow { .. }) => AcamError::LevelOverflow {
                            row: r,
                            col: c,
                            digit: w.digits[c].to_string(),
                        },
                        (_, e) => e,
                    })
                })
                .collect()
        })
        .collect()
}

/// Stored intervals with level-family edges on the family window pushed
/// out to the achievable window: no input lies beyond the outer levels, and
/// the devices then sit at their reset/set extremes.
fn lowering_intervals(t: &CamTable, p: &DeviceParams) -> Result<Vec<Vec<VoltageInterval>>> {
    let mut intervals = table_intervals(t)?;
    if t.kind == TableKind::Analog {
        return Ok(intervals);
    }
    let family = t.family()?.window;
    let full = achievable_window(p);
    for iv in intervals.iter_mut().flatten() {
        if iv.lo <= family.lo {
            iv.lo = full.lo.min(iv.lo);
        }
        if iv.hi >= family.hi {
            iv.hi = full.hi.max(iv.hi);
        }
    }
    Ok(intervals)
}

/// Array programmed with `t` using default sensing. Each cell is
/// compensated so the interval it matches under this array's sense
/// threshold is the stored one.
pub fn build_array(t: &CamTable, p: &DeviceParams) -> Result<ArraySpec> {
    let cells = lower_to_conductances(t, p)?;
    if cells.is_empty() {
        return Err(AcamError::domain("table has no rows"));
    }
    let mut a = ArraySpec::new(cells)?;
    let intervals = lowering_intervals(t, p)?;
    for (r, row) in intervals.iter().enumerate() {
        for (c, iv) in row.iter().enumerate() {
            a.cells[r][c] = a.compensated_cell(*iv, p)?;
        }
    }
    Ok(a)
}

/// Rows of `a` (programmed from `t`) that match `input`.
pub fn search_table(t: &CamTable, a: &ArraySpec, input: &[f64], p: &DeviceParams) -> Result<Vec<usize>> {
    if a.rows != t.n_rows() {
        return Err(AcamError::DimensionMismatch {
            expected: t.n_rows(),
            got: a.rows,
        });
    }
    let stimulus = t.encode_input(input)?;
    matching_rows(a, &stimulus, p)
}

/// Label of the single row of `a` matching `input`.
pub fn classify(t: &CamTable, a: &ArraySpec, input: &[f64], p: &DeviceParams) -> Result<String> {
    let rows = search_table(t, a, input, p)?;
    match rows.as_slice() {
        [row] => Ok(t.label(*row).unwrap_or_default().to_string()),
        _ => Err(AcamError::Ambiguous { matches: rows.len() }),
    }
}
