//! Problem instances: exact fixed-point weights, strict partial orders,
//! weight-class validation, and the `mfas` text format.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};
use std::fmt;
use thiserror::Error;

/// Fixed-point scale: one stored unit is 10⁻⁹ of a natural weight unit.
pub const WEIGHT_SCALE: i64 = 1_000_000_000;

/// Maximum vertex count accepted by the text format.
pub const MAX_VERTICES: usize = 4096;

const FRAC_DIGITS: u32 = 9;

/// Non-negative arc weight in exact fixed-point arithmetic (scale 10⁻⁹).
///
/// All arithmetic on weights is exact; costs are accumulated in [`Cost`]
/// (128-bit units), so no floating-point rounding enters any comparison.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight {
    units: i64,
}

impl Weight {
    pub const ZERO: Weight = Weight { units: 0 };

    /// Builds a weight from raw 10⁻⁹ units; `None` if `units` is negative.
    pub fn from_units(units: i64) -> Option<Weight> {
        (units >= 0).then_some(Weight { units })
    }

    /// Builds a weight from a whole number of natural units.
    pub fn from_int(value: u32) -> Weight {
        Weight {
            units: i64::from(value) * WEIGHT_SCALE,
        }
    }

    pub fn units(self) -> i64 {
        self.units
    }

    pub fn is_zero(self) -> bool {
        self.units == 0
    }

    /// Parses a decimal literal (`12`, `0.5`, `1.000000001`) with at most
    /// nine fractional digits.
    pub fn parse_decimal(text: &str) -> Result<Weight, String> {
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (text, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("malformed decimal number {text:?}"));
        }
        let int_val: i64 = int_part
            .parse()
            .map_err(|_| format!("integer part of {text:?} out of range"))?;
        let mut units = int_val
            .checked_mul(WEIGHT_SCALE)
            .ok_or_else(|| format!("weight {text:?} out of range"))?;
        if let Some(frac) = frac_part {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("malformed decimal number {text:?}"));
            }
            if frac.len() > FRAC_DIGITS as usize {
                return Err(format!(
                    "{text:?} has more than {FRAC_DIGITS} fractional digits"
                ));
            }
            let frac_val: i64 = frac.parse().expect("digits");
            let scale = 10_i64.pow(FRAC_DIGITS - frac.len() as u32);
            units = units
                .checked_add(frac_val * scale)
                .ok_or_else(|| format!("weight {text:?} out of range"))?;
        }
        Ok(Weight { units })
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_units(i128::from(self.units)))
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({self})")
    }
}

/// Exact sum of weights, in 10⁻⁹ units held as `i128`.
///
/// With at most 4096 vertices and weights bounded by `i64`, no sum over arc
/// subsets can overflow this type.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost {
    units: i128,
}

impl Cost {
    pub const ZERO: Cost = Cost { units: 0 };

    pub fn from_units(units: i128) -> Cost {
        Cost { units }
    }

    pub fn units(self) -> i128 {
        self.units
    }
}

impl From<Weight> for Cost {
    fn from(w: Weight) -> Cost {
        Cost {
            units: i128::from(w.units),
        }
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost {
            units: self.units + rhs.units,
        }
    }
}

impl std::ops::AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.units += rhs.units;
    }
}

impl std::ops::Sub for Cost {
    type Output = Cost;
    fn sub(self, rhs: Cost) -> Cost {
        Cost {
            units: self.units - rhs.units,
        }
    }
}

impl std::iter::Sum<Weight> for Cost {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Cost {
        let mut acc = Cost::ZERO;
        for w in iter {
            acc += Cost::from(w);
        }
        acc
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_units(self.units))
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cost({self})")
    }
}

/// Renders fixed-point units as a decimal string with minimal digits.
pub(crate) fn format_units(units: i128) -> String {
    let sign = if units < 0 { "-" } else { "" };
    let abs = units.unsigned_abs();
    let scale = WEIGHT_SCALE as u128;
    let int = abs / scale;
    let frac = abs % scale;
    if frac == 0 {
        format!("{sign}{int}")
    } else {
        let digits = format!("{frac:09}");
        format!("{sign}{int}.{}", digits.trim_end_matches('0'))
    }
}

/// Errors from building a strict partial order.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("poset pair ({a},{b}) out of range for {n} vertices")]
    OutOfRange { a: u32, b: u32, n: usize },
    #[error("poset pair ({v},{v}) is reflexive")]
    Reflexive { v: u32 },
    #[error("stated pairs put {a} and {b} on a cycle (antisymmetry violated)")]
    Cycle { a: u32, b: u32 },
}

/// A strict partial order on `n` vertices, stored as the strict transitive
/// closure in a bit matrix.
///
/// The reflexive pairs required by witness checks are handled by
/// [`Poset::contains_refl`], which treats `(v,v)` as a member; storage stays
/// strict and canonical.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Poset {
    /// The empty order on `n` vertices.
    pub fn new(n: usize) -> Poset {
        let words = n.div_ceil(64);
        Poset {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    /// Builds the strict transitive closure of the stated pairs, rejecting
    /// reflexive pairs and any cycle the closure would create.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Result<Poset, PosetError> {
        let mut p = Poset::new(n);
        for &(a, b) in pairs {
            if a as usize >= n || b as usize >= n {
                return Err(PosetError::OutOfRange { a, b, n });
            }
            if a == b {
                return Err(PosetError::Reflexive { v: a });
            }
            p.set(a as usize, b as usize);
        }
        p.close();
        // A cycle shows up after closure as a symmetric pair (or a diagonal
        // bit for self-reachability).
        for i in 0..n {
            if p.get(i, i) {
                return Err(PosetError::Cycle {
                    a: i as u32,
                    b: i as u32,
                });
            }
            for j in (i + 1)..n {
                if p.get(i, j) && p.get(j, i) {
                    return Err(PosetError::Cycle {
                        a: i as u32,
                        b: j as u32,
                    });
                }
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Strict membership: does `a` precede `b`?
    pub fn contains(&self, a: u32, b: u32) -> bool {
        self.get(a as usize, b as usize)
    }

    /// Reflexive membership: `a == b` or `a` precedes `b`.
    pub fn contains_refl(&self, a: u32, b: u32) -> bool {
        a == b || self.get(a as usize, b as usize)
    }

    fn close(&mut self) {
        let w = self.words;
        let mut row_k = vec![0u64; w];
        for k in 0..self.n {
            row_k.copy_from_slice(&self.bits[k * w..(k + 1) * w]);
            for i in 0..self.n {
                if self.get(i, k) {
                    let ri = &mut self.bits[i * w..(i + 1) * w];
                    for t in 0..w {
                        ri[t] |= row_k[t];
                    }
                }
            }
        }
    }

    fn row_ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.bits[i * self.words..(i + 1) * self.words];
        row.iter().enumerate().flat_map(|(t, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(t * 64 + b)
                }
            })
        })
    }

    /// All strict pairs in lexicographic order.
    pub fn strict_pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in self.row_ones(i) {
                out.push((i as u32, j as u32));
            }
        }
        out
    }

    pub fn strict_pair_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The transitive reduction: pairs (a,b) with no intermediate k such
    /// that a precedes k and k precedes b. In lexicographic order.
    pub fn transitive_reduction(&self) -> Vec<(u32, u32)> {
        let w = self.words;
        let mut out = Vec::new();
        let mut via = vec![0u64; w];
        for a in 0..self.n {
            via.iter_mut().for_each(|x| *x = 0);
            for k in self.row_ones(a) {
                let rk = &self.bits[k * w..(k + 1) * w];
                for t in 0..w {
                    via[t] |= rk[t];
                }
            }
            for b in self.row_ones(a) {
                if via[b / 64] >> (b % 64) & 1 == 0 {
                    out.push((a as u32, b as u32));
                }
            }
        }
        out
    }

    /// Returns inc(P): all ordered pairs (x,y), x≠y, with neither (x,y) nor
    /// (y,x) in the order. Both orientations are present; lexicographic order.
    pub fn incomparable_pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && !self.get(i, j) && !self.get(j, i) {
                    out.push((i as u32, j as u32));
                }
            }
        }
        out
    }
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poset(n={}, pairs={:?})", self.n, self.strict_pairs())
    }
}

/// Errors from programmatic instance construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("weight matrix has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("weight w({i},{j}) is negative")]
    Negative { i: u32, j: u32 },
    #[error("diagonal entry w({i},{i}) must be zero")]
    NonzeroDiagonal { i: u32 },
    #[error("poset is on {poset_n} vertices, instance has {n}")]
    PosetMismatch { n: usize, poset_n: usize },
}

/// A problem instance: vertex count, exact weights on every ordered pair,
/// and a strict partial order the output must extend.
///
/// Immutable after construction; safe to share across threads.
#[derive(Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    w: Vec<i64>,
    poset: Poset,
}

impl Instance {
    /// Builds an instance from a row-major matrix of fixed-point units.
    pub fn new(n: usize, w: Vec<i64>, poset: Poset) -> Result<Instance, InstanceError> {
        if w.len() != n * n {
            return Err(InstanceError::BadShape {
                expected: n * n,
                got: w.len(),
            });
        }
        if poset.n() != n {
            return Err(InstanceError::PosetMismatch {
                n,
                poset_n: poset.n(),
            });
        }
        for i in 0..n {
            if w[i * n + i] != 0 {
                return Err(InstanceError::NonzeroDiagonal { i: i as u32 });
            }
            for j in 0..n {
                if w[i * n + j] < 0 {
                    return Err(InstanceError::Negative {
                        i: i as u32,
                        j: j as u32,
                    });
                }
            }
        }
        Ok(Instance { n, w, poset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn weight(&self, i: u32, j: u32) -> Weight {
        Weight {
            units: self.w[i as usize * self.n + j as usize],
        }
    }

    pub(crate) fn w_units(&self, i: u32, j: u32) -> i64 {
        self.w[i as usize * self.n + j as usize]
    }

    /// Total weight of the strict poset pairs — the part of the objective
    /// every linear extension pays regardless of the chosen order.
    pub fn fixed_cost(&self) -> Cost {
        let mut acc = Cost::ZERO;
        for (i, j) in self.poset.strict_pairs() {
            acc += Cost::from(self.weight(i, j));
        }
        acc
    }

    /// SHA-256 of the canonical serialization, hex-encoded.
    pub fn digest(&self) -> String {
        let bytes = Sha256::digest(serialize_instance(self).as_bytes());
        let mut out = String::with_capacity(64);
        for b in bytes {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Instance(n={}, poset_pairs={})",
            self.n,
            self.poset.strict_pair_count()
        )
    }
}

/// Errors from parsing the text format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("{0}")]
    Poset(#[from] PosetError),
    #[error("line {line}: {msg}")]
    Weight { line: usize, msg: String },
}

struct LineReader<'a> {
    lines: std::str::Split<'a, char>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.split('\n'),
            line_no: 0,
        }
    }

    fn next(&mut self) -> Result<&'a str, ParseError> {
        self.line_no += 1;
        self.lines.next().ok_or(ParseError::Format {
            line: self.line_no,
            msg: "unexpected end of input".into(),
        })
    }
}

fn parse_vertex(tok: &str, n: usize, line: usize) -> Result<u32, ParseError> {
    let v: u32 = tok.parse().map_err(|_| ParseError::Format {
        line,
        msg: format!("expected a vertex index, found {tok:?}"),
    })?;
    if v as usize >= n {
        return Err(ParseError::Format {
            line,
            msg: format!("vertex {v} out of range for n={n}"),
        });
    }
    Ok(v)
}

/// Parses the `mfas` text format, version 1.
///
/// ```text
/// mfas 1
/// n <N>
/// prec <a> <b>     (zero or more; strict relations, closure is computed)
/// weights
/// <N rows of N decimal numbers, diagonal zero>
/// end
/// ```
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut r = LineReader::new(text);

    let header = r.next()?;
    if header.split_whitespace().collect::<Vec<_>>() != ["mfas", "1"] {
        return Err(ParseError::Format {
            line: r.line_no,
            msg: format!("expected header \"mfas 1\", found {header:?}"),
        });
    }

    let nline = r.next()?;
    let toks: Vec<&str> = nline.split_whitespace().collect();
    let n: usize = match toks.as_slice() {
        ["n", v] => v.parse().map_err(|_| ParseError::Format {
            line: r.line_no,
            msg: format!("bad vertex count {v:?}"),
        })?,
        _ => {
            return Err(ParseError::Format {
                line: r.line_no,
                msg: format!("expected \"n <N>\", found {nline:?}"),
            })
        }
    };
    if !(1..=MAX_VERTICES).contains(&n) {
        return Err(ParseError::Format {
            line: r.line_no,
            msg: format!("vertex count {n} outside 1..={MAX_VERTICES}"),
        });
    }

    let mut prec = Vec::new();
    loop {
        let line = r.next()?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["weights"] => break,
            ["prec", a, b] => {
                let a = parse_vertex(a, n, r.line_no)?;
                let b = parse_vertex(b, n, r.line_no)?;
                prec.push((a, b));
            }
            _ => {
                return Err(ParseError::Format {
                    line: r.line_no,
                    msg: format!("expected \"prec <a> <b>\" or \"weights\", found {line:?}"),
                })
            }
        }
    }

    let mut w = vec![0i64; n * n];
    for i in 0..n {
        let line = r.next()?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n {
            return Err(ParseError::Format {
                line: r.line_no,
                msg: format!("weight row {i} has {} entries, expected {n}", toks.len()),
            });
        }
        for (j, tok) in toks.iter().enumerate() {
            let weight = Weight::parse_decimal(tok).map_err(|msg| ParseError::Weight {
                line: r.line_no,
                msg,
            })?;
            if i == j && !weight.is_zero() {
                return Err(ParseError::Weight {
                    line: r.line_no,
                    msg: format!("diagonal entry w({i},{i}) must be zero"),
                });
            }
            w[i * n + j] = weight.units();
        }
    }

    let endline = r.next()?;
    if endline.split_whitespace().collect::<Vec<_>>() != ["end"] {
        return Err(ParseError::Format {
            line: r.line_no,
            msg: format!("expected \"end\", found {endline:?}"),
        });
    }
    for rest in r.lines.by_ref() {
        r.line_no += 1;
        if !rest.trim().is_empty() {
            return Err(ParseError::Format {
                line: r.line_no,
                msg: format!("unexpected content after \"end\": {rest:?}"),
            });
        }
    }

    let poset = Poset::from_pairs(n, &prec)?;
    Instance::new(n, w, poset).map_err(|e| ParseError::Format {
        line: 0,
        msg: e.to_string(),
    })
}

/// Serializes to the text format: transitive-reduction `prec` lines in
/// lexicographic order, weights with minimal decimal digits.
///
/// `parse_instance(serialize_instance(x)) == x` for every valid instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let n = inst.n();
    let mut out = String::new();
    out.push_str("mfas 1\n");
    out.push_str(&format!("n {n}\n"));
    for (a, b) in inst.poset().transitive_reduction() {
        out.push_str(&format!("prec {a} {b}\n"));
    }
    out.push_str("weights\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| inst.weight(i as u32, j as u32).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

/// Outcome of a weight-class validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// True iff no violation was found (for the triangle inequality when
    /// `checked_k` is `None`, for the k-gonal inequality otherwise).
    pub is_hemimetric: bool,
    /// Violating vertex sequences: triples `(i,j,k)` with
    /// w(i,k) > w(i,j)+w(j,k) for the triangle check, length-k sequences for
    /// the k-gonal check.
    pub violations: Vec<Vec<u32>>,
    /// The k used for a k-gonal check, if any.
    pub checked_k: Option<u32>,
    /// True when the k-gonal check was sampled rather than exhaustive.
    pub sampled: bool,
    /// Seed used for sampling, when `sampled`.
    pub seed: Option<u64>,
}

/// Checks the triangle inequality w(i,k) ≤ w(i,j) + w(j,k) over all ordered
/// triples of distinct vertices. Exact comparison; order-independent.
pub fn validate_hemimetric(inst: &Instance) -> ValidationReport {
    let n = inst.n() as u32;
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let direct = i128::from(inst.w_units(i, k));
                let via = i128::from(inst.w_units(i, j)) + i128::from(inst.w_units(j, k));
                if direct > via {
                    violations.push(vec![i, j, k]);
                }
            }
        }
    }
    ValidationReport {
        is_hemimetric: violations.is_empty(),
        violations,
        checked_k: None,
        sampled: false,
        seed: None,
    }
}

/// How a k-gonal check decides between exhaustive and sampled evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgonalMode {
    /// Exhaustive within the cap, sampled beyond it.
    Auto,
    /// Exhaustive only; errors beyond the cap.
    Exhaustive,
    /// Always sampled.
    Sampled,
}

/// Options for [`validate_kgonal_with`].
#[derive(Debug, Clone)]
pub struct KgonalOptions {
    pub mode: KgonalMode,
    /// Overrides the default exhaustive cap on n (k=3: unbounded like the
    /// triangle check, k=4: 64, k≥5: 12).
    pub cap: Option<usize>,
    pub seed: u64,
    pub samples: u64,
}

impl Default for KgonalOptions {
    fn default() -> Self {
        KgonalOptions {
            mode: KgonalMode::Auto,
            cap: None,
            seed: 1,
            samples: 100_000,
        }
    }
}

/// Errors from the k-gonal validator.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidateError {
    #[error("exhaustive {k}-gonal check requested for n={n}, cap is {cap}")]
    CapExceeded { k: u32, n: usize, cap: usize },
    #[error("k-gonal check requires k >= 3, got {k}")]
    BadK { k: u32 },
}

fn default_kgonal_cap(k: u32) -> usize {
    match k {
        3 => usize::MAX,
        4 => 64,
        _ => 12,
    }
}

/// Checks w(a₁,a_k) ≤ w(a₁,a₂)+…+w(a_{k−1},a_k) over sequences of k distinct
/// vertices with the default options (exhaustive within the size cap, seeded
/// sampling beyond it).
pub fn validate_kgonal(inst: &Instance, k: u32) -> Result<ValidationReport, ValidateError> {
    validate_kgonal_with(inst, k, &KgonalOptions::default())
}

/// [`validate_kgonal`] with explicit mode, cap, seed, and sample count.
pub fn validate_kgonal_with(
    inst: &Instance,
    k: u32,
    opts: &KgonalOptions,
) -> Result<ValidationReport, ValidateError> {
    if k < 3 {
        return Err(ValidateError::BadK { k });
    }
    let n = inst.n();
    let cap = opts.cap.unwrap_or_else(|| default_kgonal_cap(k));
    let exhaustive = match opts.mode {
        KgonalMode::Exhaustive => {
            if n > cap {
                return Err(ValidateError::CapExceeded { k, n, cap });
            }
            true
        }
        KgonalMode::Auto => n <= cap,
        KgonalMode::Sampled => false,
    };
    // Fewer than k vertices: no sequences, vacuously valid.
    if n < k as usize {
        return Ok(ValidationReport {
            is_hemimetric: true,
            violations: Vec::new(),
            checked_k: Some(k),
            sampled: !exhaustive,
            seed: (!exhaustive).then_some(opts.seed),
        });
    }

    let mut violations = Vec::new();
    if exhaustive {
        let mut seq = Vec::with_capacity(k as usize);
        let mut used = vec![false; n];
        enumerate_kgonal(inst, k as usize, &mut seq, &mut used, &mut violations);
        Ok(ValidationReport {
            is_hemimetric: violations.is_empty(),
            violations,
            checked_k: Some(k),
            sampled: false,
            seed: None,
        })
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.samples {
            let idx = rand::seq::index::sample(&mut rng, n, k as usize);
            let seq: Vec<u32> = idx.iter().map(|v| v as u32).collect();
            if kgonal_violated(inst, &seq) {
                violations.push(seq);
            }
        }
        Ok(ValidationReport {
            is_hemimetric: violations.is_empty(),
            violations,
            checked_k: Some(k),
            sampled: true,
            seed: Some(opts.seed),
        })
    }
}

fn kgonal_violated(inst: &Instance, seq: &[u32]) -> bool {
    let direct = i128::from(inst.w_units(seq[0], seq[seq.len() - 1]));
    let mut chain = 0i128;
    for t in 0..seq.len() - 1 {
        chain += i128::from(inst.w_units(seq[t], seq[t + 1]));
    }
    direct > chain
}

fn enumerate_kgonal(
    inst: &Instance,
    k: usize,
    seq: &mut Vec<u32>,
    used: &mut [bool],
    violations: &mut Vec<Vec<u32>>,
) {
    if seq.len() == k {
        if kgonal_violated(inst, seq) {
            violations.push(seq.clone());
        }
        return;
    }
    for v in 0..inst.n() {
        if !used[v] {
            used[v] = true;
            seq.push(v as u32);
            enumerate_kgonal(inst, k, seq, used, violations);
            seq.pop();
            used[v] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::k3;
    use proptest::prelude::*;

    #[test]
    fn weight_parse_and_display() {
        assert_eq!(Weight::parse_decimal("2").unwrap(), Weight::from_int(2));
        assert_eq!(
            Weight::parse_decimal("0.5").unwrap().units(),
            WEIGHT_SCALE / 2
        );
        assert_eq!(Weight::parse_decimal("1.000000001").unwrap().units(), WEIGHT_SCALE + 1);
        assert!(Weight::parse_decimal("1.0000000001").is_err()); // 10 digits
        assert!(Weight::parse_decimal("-1").is_err());
        assert!(Weight::parse_decimal(".5").is_err());
        assert!(Weight::parse_decimal("1.").is_err());
        assert!(Weight::parse_decimal("1e3").is_err());
        assert_eq!(Weight::from_int(2).to_string(), "2");
        assert_eq!(Weight::from_units(WEIGHT_SCALE / 2).unwrap().to_string(), "0.5");
        assert_eq!(Weight::from_units(1).unwrap().to_string(), "0.000000001");
    }

    #[test]
    fn parse_basic_instance() {
        let text = "mfas 1\nn 3\nweights\n0 1 2\n2 0 1\n1 2 0\nend\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.weight(0, 1), Weight::from_int(1));
        assert_eq!(inst.poset().strict_pair_count(), 0);
    }

    #[test]
    fn parse_closes_prec_pairs() {
        let text = "mfas 1\nn 3\nprec 0 1\nprec 1 2\nweights\n0 0 0\n0 0 0\n0 0 0\nend\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(
            inst.poset().strict_pairs(),
            vec![(0, 1), (0, 2), (1, 2)],
            "transitivity forces (0,2)"
        );
    }

    #[test]
    fn parse_rejects_antisymmetry_violation() {
        let text = "mfas 1\nn 2\nprec 0 1\nprec 1 0\nweights\n0 0\n0 0\nend\n";
        assert!(matches!(
            parse_instance(text),
            Err(ParseError::Poset(PosetError::Cycle { .. }))
        ));
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_instance("").is_err());
        assert!(parse_instance("mfas 2\nn 1\nweights\n0\nend\n").is_err());
        assert!(parse_instance("mfas 1\nn 0\nweights\nend\n").is_err());
        assert!(parse_instance("mfas 1\nn 2\nweights\n0 1\n1 0\n").is_err()); // no end
        assert!(parse_instance("mfas 1\nn 2\nweights\n0 1\n1 0 3\nend\n").is_err()); // row arity
        assert!(parse_instance("mfas 1\nn 2\nweights\n0 1\n1 0\nend\njunk\n").is_err());
        assert!(parse_instance("mfas 1\nn 2\nweights\n0 1\n2 0\nend").is_ok()); // no final newline
        // nonzero diagonal
        assert!(matches!(
            parse_instance("mfas 1\nn 2\nweights\n1 1\n1 0\nend\n"),
            Err(ParseError::Weight { .. })
        ));
    }

    #[test]
    fn serialize_emits_transitive_reduction() {
        let poset = Poset::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let inst = Instance::new(3, vec![0; 9], poset).unwrap();
        let text = serialize_instance(&inst);
        assert!(text.contains("prec 0 1\nprec 1 2\n"));
        assert!(!text.contains("prec 0 2"));
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn hemimetric_examples() {
        assert!(validate_hemimetric(&k3()).is_hemimetric);

        let zero = Instance::new(3, vec![0; 9], Poset::new(3)).unwrap();
        assert!(validate_hemimetric(&zero).is_hemimetric);

        let s = WEIGHT_SCALE;
        // w(0,2)=5 against w(0,1)=1, w(1,2)=1: triangle violated at (0,1,2).
        let bad = Instance::new(
            3,
            vec![0, s, 5 * s, s, 0, s, s, s, 0],
            Poset::new(3),
        )
        .unwrap();
        let report = validate_hemimetric(&bad);
        assert!(!report.is_hemimetric);
        assert!(report.violations.contains(&vec![0, 1, 2]));
    }

    #[test]
    fn kgonal_examples() {
        // Hemimetric weights satisfy every k-gonal inequality by chaining.
        for k in 3..=5 {
            let r = validate_kgonal(&k3(), k).unwrap();
            assert!(r.is_hemimetric, "k={k}");
            assert_eq!(r.checked_k, Some(k));
            assert!(!r.sampled);
        }

        // All weights equal to 2 lie in [1, k-1] for k=3 and satisfy it.
        let s = WEIGHT_SCALE;
        let two = Instance::new(
            3,
            vec![0, 2 * s, 2 * s, 2 * s, 0, 2 * s, 2 * s, 2 * s, 0],
            Poset::new(3),
        )
        .unwrap();
        assert!(validate_kgonal(&two, 3).unwrap().is_hemimetric);

        // Constant 1 with one entry forced to 3 violates the 3-gonal bound.
        let mut w = vec![s; 16];
        for i in 0..4 {
            w[i * 4 + i] = 0;
        }
        w[2] = 3 * s; // w(0,2) = 3 > 1 + 1
        let bad = Instance::new(4, w, Poset::new(4)).unwrap();
        let r = validate_kgonal(&bad, 3).unwrap();
        assert!(!r.is_hemimetric);
        assert!(r.violations.iter().any(|v| v == &vec![0, 1, 2] || v == &vec![0, 3, 2]));
    }

    #[test]
    fn kgonal_cap_and_sampling() {
        let inst = Instance::new(14, vec![0; 14 * 14], Poset::new(14)).unwrap();
        // k=5 cap is 12: exhaustive mode errors, auto mode samples.
        let opts = KgonalOptions {
            mode: KgonalMode::Exhaustive,
            ..KgonalOptions::default()
        };
        assert!(matches!(
            validate_kgonal_with(&inst, 5, &opts),
            Err(ValidateError::CapExceeded { .. })
        ));
        let r = validate_kgonal(&inst, 5).unwrap();
        assert!(r.sampled);
        assert_eq!(r.seed, Some(1));
        assert!(r.is_hemimetric);
    }

    #[test]
    fn incomparable_pairs_examples() {
        let empty = Poset::new(3);
        assert_eq!(empty.incomparable_pairs().len(), 6);

        let total = Poset::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(total.incomparable_pairs().is_empty());

        let partial = Poset::from_pairs(3, &[(0, 1)]).unwrap();
        assert_eq!(
            partial.incomparable_pairs(),
            vec![(0, 2), (1, 2), (2, 0), (2, 1)]
        );
    }

    #[test]
    fn pair_classes_form_disjoint_cover() {
        let poset = Poset::from_pairs(4, &[(0, 1), (2, 3)]).unwrap();
        let inc = poset.incomparable_pairs();
        let strict = poset.strict_pairs();
        let mut all: Vec<(u32, u32)> = inc;
        for &(a, b) in &strict {
            all.push((a, b));
            all.push((b, a));
        }
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 12, "inc ∪ P ∪ reversed-P covers all ordered pairs");
    }

    #[test]
    fn transitive_reduction_of_chain() {
        let poset = Poset::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (0, 2), (0, 3), (1, 3)]).unwrap();
        assert_eq!(poset.transitive_reduction(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(n in 1usize..8, seed in 0u64..500) {
            use rand::Rng;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            // Random order-consistent poset: orient pairs along a shuffled
            // order so the closure always exists.
            let mut label: Vec<u32> = (0..n as u32).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                label.swap(i, j);
            }
            let mut pairs = Vec::new();
            for p in 0..n {
                for q in (p + 1)..n {
                    if rng.gen_bool(0.3) {
                        pairs.push((label[p], label[q]));
                    }
                }
            }
            let poset = Poset::from_pairs(n, &pairs).unwrap();
            let mut w = vec![0i64; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        w[i * n + j] = rng.gen_range(0..5_000_000_000i64);
                    }
                }
            }
            let inst = Instance::new(n, w, poset).unwrap();
            let text = serialize_instance(&inst);
            let reparsed = parse_instance(&text).unwrap();
            prop_assert_eq!(&reparsed, &inst);
            prop_assert_eq!(serialize_instance(&reparsed), text);
        }
    }
}
