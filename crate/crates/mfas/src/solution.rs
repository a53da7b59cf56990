//! Arc-variable solutions, permutations, objective evaluation, and
//! feasibility checkers.
//!
//! A [`Solution`] assigns a value in [0,1] to arcs between incomparable
//! vertices. Pairs related by the poset are implicitly fixed — 1 along the
//! order, 0 against it — and the *effective* value of an arc folds those
//! fixed pairs in. Three checkers operate on solutions:
//!
//! - [`check_fas_feasible`]: does an integral solution encode a linear
//!   extension? (pair equalities plus triangle sums)
//! - [`check_cover_feasible`]: does a (possibly fractional) solution satisfy
//!   every size-≤3 covering constraint?
//! - [`check_alternating_cycles`]: the covering constraints generalized to
//!   witness cycles of bounded length; at `max_c = 3` it coincides with
//!   [`check_cover_feasible`].

use crate::covering::{self, CoverError};
use crate::instance::{format_units, Cost, Instance, Poset, Weight, WEIGHT_SCALE};
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Longest witness cycle [`check_alternating_cycles`] will enumerate.
pub const MAX_CYCLE_LEN: usize = 6;

/// A vertex order: each vertex exactly once, earlier means ranked higher.
pub type Permutation = Vec<u32>;

/// Errors from solution construction, evaluation, and conversion.
#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("solution is on {got} vertices, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arc ({i},{j}) joins comparable vertices and cannot carry a variable")]
    ComparableArc { i: u32, j: u32 },
    #[error("value for arc ({i},{j}) is outside [0,1]")]
    ValueOutOfRange { i: u32, j: u32 },
    #[error("operation requires an integral (0/1) solution")]
    NotIntegral,
    #[error("solution violates {} ordering constraint(s)", violations.len())]
    NotFeasible { violations: Vec<Violation> },
    #[error("not a permutation of the vertices: {msg}")]
    BadPermutation { msg: String },
    #[error("permutation places {b} before {a}, but {a} must precede {b}")]
    PosetViolated { a: u32, b: u32 },
    #[error("value for arc ({i},{j}) has no exact decimal representation")]
    NotRepresentable { i: u32, j: u32 },
    #[error("cycle length {max_c} outside supported range 2..={cap}")]
    CycleCap { max_c: usize, cap: usize },
    #[error(transparent)]
    Cover(#[from] CoverError),
}

// =============================================================================
// Solution values
// =============================================================================

/// An assignment of arc variables δ(i,j) over the incomparable pairs of an
/// instance. Values are exact rationals in [0,1]; only nonzero values are
/// stored. `integral` is true iff every stored value is exactly 1.
#[derive(Clone, PartialEq, Eq)]
pub struct Solution {
    n: usize,
    values: BTreeMap<(u32, u32), BigRational>,
    integral: bool,
}

impl Solution {
    /// The all-zero solution on `n` vertices.
    pub fn empty(n: usize) -> Solution {
        Solution {
            n,
            values: BTreeMap::new(),
            integral: true,
        }
    }

    /// Integral solution with the given arcs set to 1. Arcs must join
    /// incomparable vertices; duplicates collapse.
    pub fn from_arcs(
        inst: &Instance,
        arcs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Solution, SolutionError> {
        let mut values = BTreeMap::new();
        for (i, j) in arcs {
            check_arc(inst, i, j)?;
            values.insert((i, j), BigRational::one());
        }
        Ok(Solution {
            n: inst.n(),
            values,
            integral: true,
        })
    }

    /// Solution with explicit rational values. Zeros are dropped; values
    /// must lie in [0,1]; arcs must join incomparable vertices.
    pub fn from_values(
        inst: &Instance,
        values: impl IntoIterator<Item = ((u32, u32), BigRational)>,
    ) -> Result<Solution, SolutionError> {
        let mut map = BTreeMap::new();
        let mut integral = true;
        for ((i, j), v) in values {
            check_arc(inst, i, j)?;
            if v.is_negative() || v > BigRational::one() {
                return Err(SolutionError::ValueOutOfRange { i, j });
            }
            if v.is_zero() {
                continue;
            }
            if !v.is_one() {
                integral = false;
            }
            map.insert((i, j), v);
        }
        Ok(Solution {
            n: inst.n(),
            values: map,
            integral,
        })
    }

    /// Integral solution from arcs already known to lie in inc(P).
    pub(crate) fn from_arcs_unchecked(n: usize, arcs: impl IntoIterator<Item = (u32, u32)>) -> Solution {
        Solution {
            n,
            values: arcs.into_iter().map(|a| (a, BigRational::one())).collect(),
            integral: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True iff every stored value is exactly 1.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// The supported arcs (value > 0) in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.values.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// The stored value of an arc; zero when absent.
    pub fn value(&self, i: u32, j: u32) -> BigRational {
        self.values
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// True iff the stored value of (i,j) is exactly 1.
    pub fn has_one(&self, i: u32, j: u32) -> bool {
        self.values.get(&(i, j)).is_some_and(|v| v.is_one())
    }

    pub(crate) fn values(&self) -> &BTreeMap<(u32, u32), BigRational> {
        &self.values
    }

    /// The effective value δ̂(i,j): 1 along a poset relation, 0 against one,
    /// the stored value on incomparable pairs.
    pub fn effective_value(&self, poset: &Poset, i: u32, j: u32) -> BigRational {
        if poset.contains(i, j) {
            BigRational::one()
        } else if poset.contains(j, i) {
            BigRational::zero()
        } else {
            self.value(i, j)
        }
    }

    /// Dense 0/1 matrix of effective values; requires an integral solution.
    pub(crate) fn effective_matrix(&self, poset: &Poset) -> Vec<u8> {
        debug_assert!(self.integral);
        let n = self.n;
        let mut d = vec![0u8; n * n];
        for &(i, j) in self.values.keys() {
            d[i as usize * n + j as usize] = 1;
        }
        for (i, j) in poset.strict_pairs() {
            d[i as usize * n + j as usize] = 1;
        }
        d
    }
}

impl fmt::Debug for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.integral {
            write!(f, "Solution(n={}, arcs={:?})", self.n, self.values.keys())
        } else {
            write!(f, "Solution(n={}, fractional, support={})", self.n, self.values.len())
        }
    }
}

fn check_arc(inst: &Instance, i: u32, j: u32) -> Result<(), SolutionError> {
    let n = inst.n();
    if i as usize >= n || j as usize >= n {
        return Err(SolutionError::DimensionMismatch {
            expected: n,
            got: i.max(j) as usize + 1,
        });
    }
    if i == j || inst.poset().contains(i, j) || inst.poset().contains(j, i) {
        return Err(SolutionError::ComparableArc { i, j });
    }
    Ok(())
}

fn check_dim(delta: &Solution, inst: &Instance) -> Result<(), SolutionError> {
    if delta.n() != inst.n() {
        return Err(SolutionError::DimensionMismatch {
            expected: inst.n(),
            got: delta.n(),
        });
    }
    Ok(())
}

// =============================================================================
// Costs
// =============================================================================

/// An exact objective value: a fixed-point number when the value is an
/// integer count of 10⁻⁹ units, otherwise an exact rational (natural units).
#[derive(Clone)]
pub enum CostValue {
    Fixed(Cost),
    Rational(BigRational),
}

impl CostValue {
    /// Canonicalizes a value given in 10⁻⁹ units: integral unit counts
    /// become `Fixed`.
    pub fn from_units_rational(units: BigRational) -> CostValue {
        if units.is_integer() {
            if let Ok(u) = i128::try_from(units.to_integer()) {
                return CostValue::Fixed(Cost::from_units(u));
            }
        }
        CostValue::Rational(units / BigRational::from_integer(BigInt::from(WEIGHT_SCALE)))
    }

    /// The value as an exact rational count of 10⁻⁹ units.
    pub fn units_rational(&self) -> BigRational {
        match self {
            CostValue::Fixed(c) => BigRational::from_integer(BigInt::from(c.units())),
            CostValue::Rational(r) => r * BigRational::from_integer(BigInt::from(WEIGHT_SCALE)),
        }
    }

    /// The value in natural units as an exact rational.
    pub fn natural_rational(&self) -> BigRational {
        match self {
            CostValue::Fixed(c) => {
                BigRational::new(BigInt::from(c.units()), BigInt::from(WEIGHT_SCALE))
            }
            CostValue::Rational(r) => r.clone(),
        }
    }

    pub fn as_fixed(&self) -> Option<Cost> {
        match self {
            CostValue::Fixed(c) => Some(*c),
            CostValue::Rational(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CostValue::Fixed(c) => c.units() == 0,
            CostValue::Rational(r) => r.is_zero(),
        }
    }

    /// Decimal string with `digits` fractional digits, rounded toward −∞,
    /// trailing zeros trimmed. Exact for `Fixed` values when `digits ≥ 9`.
    pub fn decimal_floor(&self, digits: u32) -> String {
        self.rounded_decimal(digits, false)
    }

    /// Decimal string with `digits` fractional digits, rounded toward +∞.
    pub fn decimal_ceil(&self, digits: u32) -> String {
        self.rounded_decimal(digits, true)
    }

    fn rounded_decimal(&self, digits: u32, ceil: bool) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = self.natural_rational() * BigRational::from_integer(scale.clone());
        let int = if ceil {
            scaled.numer().div_ceil(scaled.denom())
        } else {
            scaled.numer().div_floor(scaled.denom())
        };
        let sign = if int.is_negative() { "-" } else { "" };
        let abs = int.abs();
        let (ipart, frac) = abs.div_rem(&scale);
        if frac.is_zero() {
            format!("{sign}{ipart}")
        } else {
            let digits_str = format!("{frac:0width$}", width = digits as usize);
            format!("{sign}{ipart}.{}", digits_str.trim_end_matches('0'))
        }
    }
}

impl PartialEq for CostValue {
    fn eq(&self, other: &Self) -> bool {
        self.units_rational() == other.units_rational()
    }
}

impl Eq for CostValue {}

impl PartialOrd for CostValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CostValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.units_rational().cmp(&other.units_rational())
    }
}

impl From<Cost> for CostValue {
    fn from(c: Cost) -> CostValue {
        CostValue::Fixed(c)
    }
}

impl std::ops::Add<Cost> for CostValue {
    type Output = CostValue;
    fn add(self, rhs: Cost) -> CostValue {
        match self {
            CostValue::Fixed(c) => CostValue::Fixed(c + rhs),
            CostValue::Rational(_) => CostValue::from_units_rational(
                self.units_rational() + BigRational::from_integer(BigInt::from(rhs.units())),
            ),
        }
    }
}

impl fmt::Display for CostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostValue::Fixed(c) => write!(f, "{c}"),
            CostValue::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for CostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CostValue({self})")
    }
}

/// Exact objective decomposition of a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostBreakdown {
    /// Σ δ(i,j)·w(i,j) over incomparable pairs.
    pub variable_cost: CostValue,
    /// Σ w(i,j) over strict poset pairs — paid by every linear extension.
    pub fixed_cost: Cost,
    /// variable_cost + fixed_cost, exactly.
    pub total_cost: CostValue,
}

/// Evaluates the objective exactly.
///
/// # Errors
/// `DimensionMismatch` if the solution and instance disagree on `n`.
pub fn cost(delta: &Solution, inst: &Instance) -> Result<CostBreakdown, SolutionError> {
    check_dim(delta, inst)?;
    let fixed = inst.fixed_cost();
    let variable = if delta.is_integral() {
        let mut acc = Cost::ZERO;
        for (i, j) in delta.support() {
            acc += Cost::from(inst.weight(i, j));
        }
        CostValue::Fixed(acc)
    } else {
        let mut acc = BigRational::zero();
        for ((i, j), v) in delta.values() {
            acc += v * BigRational::from_integer(BigInt::from(inst.w_units(*i, *j)));
        }
        CostValue::from_units_rational(acc)
    };
    let total = variable.clone() + fixed;
    Ok(CostBreakdown {
        variable_cost: variable,
        fixed_cost: fixed,
        total_cost: total,
    })
}

// =============================================================================
// Violations
// =============================================================================

/// Which constraint family a violation belongs to.
///
/// `Pair`/`Triple` carry only reflexive witnesses (the empty-poset
/// constraints); `PosetPair`/`PosetTriple` have at least one strict poset
/// witness; `AlternatingCycle` is any witness cycle of length ≥ 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Pair,
    Triple,
    PosetPair,
    PosetTriple,
    AlternatingCycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Pair => "pair",
            ViolationKind::Triple => "triple",
            ViolationKind::PosetPair => "poset_pair",
            ViolationKind::PosetTriple => "poset_triple",
            ViolationKind::AlternatingCycle => "alternating_cycle",
        };
        f.write_str(s)
    }
}

/// A violated constraint: its arcs (x₁,y₁),…,(x_c,y_c) and the poset
/// witnesses ((x₂,y₁),(x₃,y₂),…,(x₁,y_c)) certifying it, where a witness
/// (a,a) denotes the reflexive membership a ⪯ a.
///
/// Covering violations have all arcs in inc(P). Violations from
/// [`check_fas_feasible`] relax that: their triple constraints range over
/// effective values, so an arc may join comparable vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    pub arcs: Vec<(u32, u32)>,
    pub witnesses: Vec<(u32, u32)>,
}

impl Violation {
    pub(crate) fn sort_key(&self) -> (usize, Vec<(u32, u32)>) {
        (self.arcs.len(), self.arcs.clone())
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for (i, j) in &self.arcs {
            write!(f, " {i} {j}")?;
        }
        write!(f, " |")?;
        for (a, b) in &self.witnesses {
            write!(f, " {a} {b}")?;
        }
        Ok(())
    }
}

/// Classifies a constraint by its witnesses: all-reflexive is the plain
/// empty-poset family, otherwise the poset-witness family.
pub(crate) fn classify(arcs_len: usize, witnesses: &[(u32, u32)]) -> ViolationKind {
    if arcs_len >= 4 {
        return ViolationKind::AlternatingCycle;
    }
    let pure = witnesses.iter().all(|(a, b)| a == b);
    match (arcs_len, pure) {
        (2, true) => ViolationKind::Pair,
        (2, false) => ViolationKind::PosetPair,
        (_, true) => ViolationKind::Triple,
        (_, false) => ViolationKind::PosetTriple,
    }
}

// =============================================================================
// Feasibility checkers
// =============================================================================

/// Checks whether an integral solution encodes a linear extension: effective
/// values must satisfy δ̂(i,j)+δ̂(j,i) = 1 on every pair and
/// δ̂(i,j)+δ̂(j,k)+δ̂(k,i) ≥ 1 on every directed triangle.
///
/// Returns the violated constraints, sorted by (size, arcs); empty means
/// the solution is an order.
///
/// # Errors
/// `NotIntegral` for fractional solutions; `DimensionMismatch`.
pub fn check_fas_feasible(delta: &Solution, inst: &Instance) -> Result<Vec<Violation>, SolutionError> {
    check_dim(delta, inst)?;
    if !delta.is_integral() {
        return Err(SolutionError::NotIntegral);
    }
    let n = delta.n();
    let d = delta.effective_matrix(inst.poset());
    let at = |i: u32, j: u32| d[i as usize * n + j as usize];
    let mut out = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            if at(i, j) + at(j, i) != 1 {
                out.push(Violation {
                    kind: ViolationKind::Pair,
                    arcs: vec![(i, j), (j, i)],
                    witnesses: vec![(j, j), (i, i)],
                });
            }
        }
    }
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            for k in (j + 1)..n as u32 {
                if at(i, j) + at(j, k) + at(k, i) == 0 {
                    out.push(Violation {
                        kind: ViolationKind::Triple,
                        arcs: vec![(i, j), (j, k), (k, i)],
                        witnesses: vec![(j, j), (k, k), (i, i)],
                    });
                }
                if at(i, k) + at(k, j) + at(j, i) == 0 {
                    out.push(Violation {
                        kind: ViolationKind::Triple,
                        arcs: vec![(i, k), (k, j), (j, i)],
                        witnesses: vec![(k, k), (j, j), (i, i)],
                    });
                }
            }
        }
    }
    out.sort_by_key(Violation::sort_key);
    Ok(out)
}

/// Checks a solution (fractional allowed) against every size-≤3 covering
/// constraint: Σ_{arcs} δ ≥ 1. Returns the violated constraints in
/// enumeration order (size, then arcs).
///
/// # Errors
/// `DimensionMismatch`; `Cover` when constraint enumeration exceeds its cap.
pub fn check_cover_feasible(delta: &Solution, inst: &Instance) -> Result<Vec<Violation>, SolutionError> {
    check_dim(delta, inst)?;
    let one = BigRational::one();
    let mut out = Vec::new();
    for c in covering::enumerate_constraints(inst)? {
        let violated = if delta.is_integral() {
            !c.arcs.iter().any(|&(i, j)| delta.has_one(i, j))
        } else {
            let sum: BigRational = c.arcs.iter().map(|&(i, j)| delta.value(i, j)).sum();
            sum < one
        };
        if violated {
            out.push(Violation {
                kind: c.kind(),
                arcs: c.arcs,
                witnesses: c.witnesses,
            });
        }
    }
    Ok(out)
}

/// Checks the covering constraints generalized to witness cycles of length
/// 2..=`max_c`: sequences of distinct incomparable arcs (x₁,y₁),…,(x_c,y_c)
/// where consecutive pairs are certified by poset memberships
/// (x_{i+1},y_i) ⪯-pairs, read cyclically. A cycle is violated when its arc
/// values sum below 1.
///
/// At `max_c = 3` this coincides with [`check_cover_feasible`]; longer
/// cycles capture constraints the size-≤3 family misses.
///
/// # Errors
/// `CycleCap` when `max_c` is outside 2..=[`MAX_CYCLE_LEN`]; `DimensionMismatch`.
pub fn check_alternating_cycles(
    delta: &Solution,
    inst: &Instance,
    max_c: usize,
) -> Result<Vec<Violation>, SolutionError> {
    check_dim(delta, inst)?;
    if !(2..=MAX_CYCLE_LEN).contains(&max_c) {
        return Err(SolutionError::CycleCap {
            max_c,
            cap: MAX_CYCLE_LEN,
        });
    }
    let poset = inst.poset();
    let arcs = poset.incomparable_pairs();
    let n = inst.n();

    // arcs_by_tail[v] = indices into `arcs` of the arcs with tail v,
    // ascending (hence lexicographic within a tail).
    let mut arcs_by_tail: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (idx, &(x, _)) in arcs.iter().enumerate() {
        arcs_by_tail[x as usize].push(idx as u32);
    }
    // preds_refl[v] = vertices u with u ⪯ v (reflexive included), ascending.
    let mut preds_refl: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 0..n as u32 {
        for u in 0..n as u32 {
            if poset.contains_refl(u, v) {
                preds_refl[v as usize].push(u);
            }
        }
    }

    let one = BigRational::one();
    let mut out = Vec::new();
    let mut path: Vec<u32> = Vec::with_capacity(max_c);
    for start in 0..arcs.len() as u32 {
        path.push(start);
        extend_cycles(
            &arcs,
            &arcs_by_tail,
            &preds_refl,
            poset,
            delta,
            max_c,
            &mut path,
            &mut |path: &[u32]| {
                let seq: Vec<(u32, u32)> = path.iter().map(|&i| arcs[i as usize]).collect();
                let sum: BigRational = seq.iter().map(|&(i, j)| delta.value(i, j)).sum();
                if sum < one {
                    let c = seq.len();
                    let witnesses: Vec<(u32, u32)> =
                        (0..c).map(|t| (seq[(t + 1) % c].0, seq[t].1)).collect();
                    out.push(Violation {
                        kind: classify(c, &witnesses),
                        arcs: seq,
                        witnesses,
                    });
                }
            },
        );
        path.pop();
    }
    out.sort_by_key(Violation::sort_key);
    Ok(out)
}

/// Depth-first extension of a witness-cycle path. `path` holds arc indices;
/// the first one is the smallest index in the cycle (canonical rotation), so
/// each cycle is produced exactly once.
#[allow(clippy::too_many_arguments)]
fn extend_cycles(
    arcs: &[(u32, u32)],
    arcs_by_tail: &[Vec<u32>],
    preds_refl: &[Vec<u32>],
    poset: &Poset,
    _delta: &Solution,
    max_c: usize,
    path: &mut Vec<u32>,
    emit: &mut impl FnMut(&[u32]),
) {
    let start = path[0];
    let (sx, _sy) = arcs[start as usize];
    let (_, last_y) = arcs[*path.last().unwrap() as usize];
    // Close the cycle: the wrap witness is (x_start, y_last).
    if path.len() >= 2 && poset.contains_refl(sx, last_y) {
        emit(path);
    }
    if path.len() == max_c {
        return;
    }
    // Extend: the next arc's tail must be a (reflexive) predecessor of the
    // current head; only indices above the start keep rotations canonical.
    for &u in &preds_refl[last_y as usize] {
        for &cand in &arcs_by_tail[u as usize] {
            if cand <= start || path.contains(&cand) {
                continue;
            }
            path.push(cand);
            extend_cycles(arcs, arcs_by_tail, preds_refl, poset, _delta, max_c, path, emit);
            path.pop();
        }
    }
}

// =============================================================================
// Permutations
// =============================================================================

/// Extracts the vertex order encoded by a FAS-feasible integral solution:
/// vertices sorted by descending effective out-count.
///
/// # Errors
/// `NotFeasible` (carrying the violations) when the solution is not an
/// order; `NotIntegral`; `DimensionMismatch`.
pub fn permutation_from_delta(delta: &Solution, inst: &Instance) -> Result<Permutation, SolutionError> {
    let violations = check_fas_feasible(delta, inst)?;
    if !violations.is_empty() {
        return Err(SolutionError::NotFeasible { violations });
    }
    let n = delta.n();
    let d = delta.effective_matrix(inst.poset());
    let mut order: Vec<u32> = (0..n as u32).collect();
    let outs: Vec<usize> = (0..n)
        .map(|i| d[i * n..(i + 1) * n].iter().map(|&b| b as usize).sum())
        .collect();
    order.sort_by_key(|&v| std::cmp::Reverse(outs[v as usize]));
    debug_assert!(
        (0..n - 1).all(|t| outs[order[t] as usize] > outs[order[t + 1] as usize]),
        "a linear extension has pairwise distinct out-counts"
    );
    Ok(order)
}

/// Encodes a poset-respecting permutation as the integral solution with
/// δ(i,j)=1 exactly when i precedes j, restricted to incomparable pairs.
///
/// # Errors
/// `BadPermutation` for non-permutations; `PosetViolated` (first strict pair
/// in lexicographic order that the permutation reverses).
pub fn delta_from_permutation(perm: &[u32], inst: &Instance) -> Result<Solution, SolutionError> {
    let n = inst.n();
    if perm.len() != n {
        return Err(SolutionError::BadPermutation {
            msg: format!("length {} for {n} vertices", perm.len()),
        });
    }
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in perm.iter().enumerate() {
        if v as usize >= n {
            return Err(SolutionError::BadPermutation {
                msg: format!("vertex {v} out of range"),
            });
        }
        if pos[v as usize] != usize::MAX {
            return Err(SolutionError::BadPermutation {
                msg: format!("vertex {v} appears twice"),
            });
        }
        pos[v as usize] = p;
    }
    for (a, b) in inst.poset().strict_pairs() {
        if pos[a as usize] > pos[b as usize] {
            return Err(SolutionError::PosetViolated { a, b });
        }
    }
    let arcs = inst
        .poset()
        .incomparable_pairs()
        .into_iter()
        .filter(|&(i, j)| pos[i as usize] < pos[j as usize]);
    Ok(Solution::from_arcs_unchecked(n, arcs))
}

// =============================================================================
// Text format
// =============================================================================

/// Errors from parsing the solution file format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolutionParseError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

fn sol_err(line: usize, msg: impl Into<String>) -> SolutionParseError {
    SolutionParseError::Format {
        line,
        msg: msg.into(),
    }
}

/// Parses the solution file format, version 1, against an instance.
///
/// ```text
/// delta 1
/// <i> <j>            (arc with value 1)
/// <i> <j> <decimal>  (fractional arc, value in (0,1])
/// end
/// ```
///
/// Arcs must join incomparable vertices and appear at most once; values
/// use at most nine fractional digits.
pub fn parse_solution(text: &str, inst: &Instance) -> Result<Solution, SolutionParseError> {
    let n = inst.n();
    let mut lines = text.split('\n');
    let mut line_no = 0usize;
    let mut next = |line_no: &mut usize| -> Result<&str, SolutionParseError> {
        *line_no += 1;
        lines
            .next()
            .ok_or_else(|| sol_err(*line_no, "unexpected end of input"))
    };

    let header = next(&mut line_no)?;
    if header.split_whitespace().collect::<Vec<_>>() != ["delta", "1"] {
        return Err(sol_err(
            line_no,
            format!("expected header \"delta 1\", found {header:?}"),
        ));
    }

    let mut values: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
    let mut integral = true;
    loop {
        let line = next(&mut line_no)?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.as_slice() == ["end"] {
            break;
        }
        if toks.len() != 2 && toks.len() != 3 {
            return Err(sol_err(
                line_no,
                format!("expected \"<i> <j> [value]\" or \"end\", found {line:?}"),
            ));
        }
        let vert = |tok: &str| -> Result<u32, SolutionParseError> {
            let v: u32 = tok
                .parse()
                .map_err(|_| sol_err(line_no, format!("expected a vertex index, found {tok:?}")))?;
            if v as usize >= n {
                return Err(sol_err(line_no, format!("vertex {v} out of range for n={n}")));
            }
            Ok(v)
        };
        let i = vert(toks[0])?;
        let j = vert(toks[1])?;
        if i == j || inst.poset().contains(i, j) || inst.poset().contains(j, i) {
            return Err(sol_err(
                line_no,
                format!("arc ({i},{j}) joins comparable vertices"),
            ));
        }
        let value = if let Some(tok) = toks.get(2) {
            let w = Weight::parse_decimal(tok).map_err(|msg| sol_err(line_no, msg))?;
            if w.units() > WEIGHT_SCALE {
                return Err(sol_err(line_no, format!("value {tok} exceeds 1")));
            }
            if w.is_zero() {
                return Err(sol_err(
                    line_no,
                    format!("arc ({i},{j}) has value 0 and is not part of the support"),
                ));
            }
            BigRational::new(BigInt::from(w.units()), BigInt::from(WEIGHT_SCALE))
        } else {
            BigRational::one()
        };
        if !value.is_one() {
            integral = false;
        }
        if values.insert((i, j), value).is_some() {
            return Err(sol_err(line_no, format!("duplicate arc ({i},{j})")));
        }
    }
    for rest in lines {
        line_no += 1;
        if !rest.trim().is_empty() {
            return Err(sol_err(
                line_no,
                format!("unexpected content after \"end\": {rest:?}"),
            ));
        }
    }
    Ok(Solution {
        n,
        values,
        integral,
    })
}

/// Serializes to the solution file format: supported arcs in lexicographic
/// order, value-1 arcs bare, fractional values as minimal decimals.
///
/// # Errors
/// `NotRepresentable` when a value is not a multiple of 10⁻⁹ (such values
/// arise from LP solving; they round-trip through reports, not files).
pub fn serialize_solution(sol: &Solution) -> Result<String, SolutionError> {
    let mut out = String::from("delta 1\n");
    let scale = BigInt::from(WEIGHT_SCALE);
    for ((i, j), v) in sol.values() {
        if v.is_one() {
            out.push_str(&format!("{i} {j}\n"));
        } else {
            let units = v * BigRational::from_integer(scale.clone());
            if !units.is_integer() {
                return Err(SolutionError::NotRepresentable { i: *i, j: *j });
            }
            let u = i128::try_from(units.to_integer())
                .map_err(|_| SolutionError::NotRepresentable { i: *i, j: *j })?;
            out.push_str(&format!("{i} {j} {}\n", format_units(u)));
        }
    }
    out.push_str("end\n");
    Ok(out)
}
