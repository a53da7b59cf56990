//! The vertex-cover side of the solver: enumerate the size-≤3 covering
//! constraints, produce integral covers (a deterministic primal-dual
//! 3-approximation), minimalize covers, and certify fractional lower bounds
//! with a multiplicative-weights solver.
//!
//! Every constraint is a sequence of 2 or 3 incomparable arcs
//! (x₁,y₁),…,(x_c,y_c) whose consecutive links are certified by poset
//! witnesses (x_{t+1}, y_t) — reflexive pairs allowed — read cyclically.
//! A 0/1 solution is cover-feasible when each constraint supports at least
//! one arc; the covering LP relaxes that to fractional sums ≥ 1.

use crate::instance::{Cost, Instance};
use crate::solution::{classify, CostValue, Solution, Violation, ViolationKind};
use num::{BigInt, BigRational, FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::collections::BinaryHeap;
use thiserror::Error;

/// Largest vertex count for which constraint enumeration runs.
pub const ENUMERATION_CAP: usize = 64;

/// Errors from the covering operations.
#[derive(Debug, Error)]
pub enum CoverError {
    #[error("constraint enumeration needs n ≤ {cap}, instance has {n} vertices")]
    CapExceeded { n: usize, cap: usize },
    #[error("operation requires an integral (0/1) solution")]
    NotIntegral,
    #[error("input violates {} covering constraint(s)", violations.len())]
    NotFeasibleInput { violations: Vec<Violation> },
    #[error("accuracy must satisfy 0 < eps < 1")]
    BadEps,
    #[error("fractional solver failed to certify within {iterations} iterations (eps={eps})")]
    BudgetExhausted { iterations: u64, eps: String },
}

// =============================================================================
// Constraint enumeration
// =============================================================================

/// One covering constraint: 2 or 3 arcs between incomparable vertices, with
/// the poset witnesses ((x₂,y₁),(x₃,y₂),(x₁,y₃)) certifying the cyclic
/// links. Stored in canonical rotation: the lexicographically smallest arc
/// first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverConstraint {
    pub arcs: Vec<(u32, u32)>,
    pub witnesses: Vec<(u32, u32)>,
}

impl CoverConstraint {
    /// Pair/Triple when every witness is reflexive, PosetPair/PosetTriple
    /// otherwise.
    pub fn kind(&self) -> ViolationKind {
        classify(self.arcs.len(), &self.witnesses)
    }
}

/// Enumerates every size-2 and size-3 covering constraint of an instance,
/// in deterministic order: all pairs, then all triples, each block sorted by
/// arc sequence. With an empty poset this yields exactly the n(n−1)/2
/// mutual-pair constraints and the 2·C(n,3) directed triangles.
///
/// # Errors
/// `CapExceeded` when `n` exceeds [`ENUMERATION_CAP`].
pub fn enumerate_constraints(inst: &Instance) -> Result<Vec<CoverConstraint>, CoverError> {
    let n = inst.n();
    if n > ENUMERATION_CAP {
        return Err(CoverError::CapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let poset = inst.poset();
    let arcs = poset.incomparable_pairs();
    let m = arcs.len();
    let mut out = Vec::new();

    // Pairs: (x₁,y₁),(x₂,y₂) with x₂ ⪯̂ y₁ and x₁ ⪯̂ y₂.
    for s in 0..m {
        let (x1, y1) = arcs[s];
        for p in (s + 1)..m {
            let (x2, y2) = arcs[p];
            if poset.contains_refl(x2, y1) && poset.contains_refl(x1, y2) {
                out.push(CoverConstraint {
                    arcs: vec![arcs[s], arcs[p]],
                    witnesses: vec![(x2, y1), (x1, y2)],
                });
            }
        }
    }

    // Triples, witness-driven: the next arc's tail must be a reflexive
    // predecessor of the previous head. Indices stay above the start arc so
    // each cyclic sequence appears exactly once, in canonical rotation.
    let mut arcs_by_tail: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (idx, &(x, _)) in arcs.iter().enumerate() {
        arcs_by_tail[x as usize].push(idx as u32);
    }
    let mut preds_refl: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 0..n as u32 {
        for u in 0..n as u32 {
            if poset.contains_refl(u, v) {
                preds_refl[v as usize].push(u);
            }
        }
    }
    let mut found: Vec<(u32, u32)> = Vec::new();
    for s in 0..m {
        let (x1, y1) = arcs[s];
        found.clear();
        for &u in &preds_refl[y1 as usize] {
            for &p in &arcs_by_tail[u as usize] {
                if p as usize <= s {
                    continue;
                }
                let (_, y2) = arcs[p as usize];
                for &u2 in &preds_refl[y2 as usize] {
                    for &q in &arcs_by_tail[u2 as usize] {
                        if q as usize <= s || q == p {
                            continue;
                        }
                        let (_, y3) = arcs[q as usize];
                        if poset.contains_refl(x1, y3) {
                            found.push((p, q));
                        }
                    }
                }
            }
        }
        found.sort_unstable();
        for &(p, q) in &found {
            let (x2, y2) = arcs[p as usize];
            let (x3, y3) = arcs[q as usize];
            out.push(CoverConstraint {
                arcs: vec![arcs[s], arcs[p as usize], arcs[q as usize]],
                witnesses: vec![(x2, y1), (x3, y2), (x1, y3)],
            });
        }
    }
    Ok(out)
}

// =============================================================================
// Dense system: the shared fast path
// =============================================================================

/// Bit set over arc indices.
#[derive(Clone, PartialEq, Eq)]
pub(crate) struct ArcBits {
    words: Vec<u64>,
}

impl ArcBits {
    pub fn new(m: usize) -> ArcBits {
        ArcBits {
            words: vec![0; m.div_ceil(64)],
        }
    }

    pub fn get(&self, i: u32) -> bool {
        self.words[i as usize / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: u32) {
        self.words[i as usize / 64] |= 1 << (i % 64);
    }

    pub fn unset(&mut self, i: u32) {
        self.words[i as usize / 64] &= !(1 << (i % 64));
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(t, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros();
                    rest &= rest - 1;
                    Some(t as u32 * 64 + b)
                }
            })
        })
    }
}

impl std::fmt::Debug for ArcBits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ArcBits({:?})", self.ones().collect::<Vec<_>>())
    }
}

/// Dense view of an instance's covering structure: arcs indexed
/// lexicographically, constraints as arc-index triples, and the
/// arc-to-constraint adjacency. Built once per solve and shared by the
/// primal-dual pass, minimalization, and the repair loop.
pub(crate) struct System {
    pub n: usize,
    pub arcs: Vec<(u32, u32)>,
    arc_id: Vec<u32>,
    pub cons: Vec<CoverConstraint>,
    cons_arcs: Vec<[u32; 3]>,
    cons_len: Vec<u8>,
    pub arc_cons: Vec<Vec<u32>>,
    pub weights: Vec<i64>,
}

impl System {
    pub fn build(inst: &Instance) -> Result<System, CoverError> {
        let n = inst.n();
        let cons = enumerate_constraints(inst)?;
        let arcs = inst.poset().incomparable_pairs();
        let mut arc_id = vec![u32::MAX; n * n];
        for (idx, &(i, j)) in arcs.iter().enumerate() {
            arc_id[i as usize * n + j as usize] = idx as u32;
        }
        let mut cons_arcs = Vec::with_capacity(cons.len());
        let mut cons_len = Vec::with_capacity(cons.len());
        let mut arc_cons: Vec<Vec<u32>> = vec![Vec::new(); arcs.len()];
        for (cid, c) in cons.iter().enumerate() {
            let mut ids = [u32::MAX; 3];
            for (t, &(i, j)) in c.arcs.iter().enumerate() {
                let id = arc_id[i as usize * n + j as usize];
                debug_assert_ne!(id, u32::MAX);
                ids[t] = id;
                arc_cons[id as usize].push(cid as u32);
            }
            cons_arcs.push(ids);
            cons_len.push(c.arcs.len() as u8);
        }
        let weights = arcs.iter().map(|&(i, j)| inst.w_units(i, j)).collect();
        Ok(System {
            n,
            arcs,
            arc_id,
            cons,
            cons_arcs,
            cons_len,
            arc_cons,
            weights,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc_id(&self, i: u32, j: u32) -> u32 {
        self.arc_id[i as usize * self.n + j as usize]
    }

    pub fn cons_arc_ids(&self, c: u32) -> &[u32] {
        &self.cons_arcs[c as usize][..self.cons_len[c as usize] as usize]
    }

    pub fn cost_units(&self, bits: &ArcBits) -> i128 {
        bits.ones().map(|a| i128::from(self.weights[a as usize])).sum()
    }

    /// Per-constraint count of supported arcs.
    pub fn sat_counts(&self, bits: &ArcBits) -> Vec<u32> {
        (0..self.cons.len() as u32)
            .map(|c| self.cons_arc_ids(c).iter().filter(|&&a| bits.get(a)).count() as u32)
            .collect()
    }

    /// The violated constraints of a 0/1 assignment, as reportable records.
    pub fn violations(&self, bits: &ArcBits) -> Vec<Violation> {
        (0..self.cons.len() as u32)
            .filter(|&c| !self.cons_arc_ids(c).iter().any(|&a| bits.get(a)))
            .map(|c| {
                let con = &self.cons[c as usize];
                Violation {
                    kind: con.kind(),
                    arcs: con.arcs.clone(),
                    witnesses: con.witnesses.clone(),
                }
            })
            .collect()
    }

    /// Projects an integral solution onto arc bits.
    pub fn bits_from(&self, sol: &Solution) -> ArcBits {
        let mut bits = ArcBits::new(self.arc_count());
        for (i, j) in sol.support() {
            let id = self.arc_id(i, j);
            debug_assert_ne!(id, u32::MAX);
            bits.set(id);
        }
        bits
    }

    pub fn solution(&self, bits: &ArcBits) -> Solution {
        Solution::from_arcs_unchecked(self.n, bits.ones().map(|a| self.arcs[a as usize]))
    }

    /// In-place greedy minimalization: drop supported arcs in order of
    /// descending weight (arc index — lexicographic — on ties) whenever
    /// every constraint containing the arc keeps at least one other
    /// supported arc. One pass reaches a minimal solution because removals
    /// only shrink other arcs' slack, never create it.
    ///
    /// The input must be cover-feasible.
    pub fn minimalize_bits(&self, bits: &mut ArcBits) {
        let mut counts = self.sat_counts(bits);
        debug_assert!(counts.iter().all(|&c| c > 0), "input must be feasible");
        let mut order: Vec<u32> = bits.ones().collect();
        order.sort_by_key(|&a| (std::cmp::Reverse(self.weights[a as usize]), a));
        for a in order {
            if self.arc_cons[a as usize].iter().all(|&c| counts[c as usize] >= 2) {
                bits.unset(a);
                for &c in &self.arc_cons[a as usize] {
                    counts[c as usize] -= 1;
                }
            }
        }
    }
}

// =============================================================================
// Primal-dual cover
// =============================================================================

/// Computes an integral cover-feasible solution by one deterministic
/// local-ratio pass: constraints are visited in enumeration order; a
/// constraint with no zero-residual arc has the minimum residual of its
/// arcs subtracted from all of them; the chosen arcs are exactly those whose
/// residual reaches zero.
///
/// The subtracted amounts form a feasible dual, so the output cost is at
/// most 3 × the covering-LP optimum (constraints have ≤ 3 arcs), hence at
/// most 3 × the optimal variable cost.
///
/// # Errors
/// `CapExceeded` from constraint enumeration.
pub fn primal_dual_cover(inst: &Instance) -> Result<Solution, CoverError> {
    let sys = System::build(inst)?;
    let mut residual = sys.weights.clone();
    for c in 0..sys.cons.len() as u32 {
        let ids = sys.cons_arc_ids(c);
        let eps = ids.iter().map(|&a| residual[a as usize]).min().unwrap();
        if eps == 0 {
            continue;
        }
        for &a in ids {
            residual[a as usize] -= eps;
        }
    }
    let mut bits = ArcBits::new(sys.arc_count());
    for (a, &r) in residual.iter().enumerate() {
        if r == 0 {
            bits.set(a as u32);
        }
    }
    Ok(sys.solution(&bits))
}

/// Shrinks an integral cover-feasible solution to a minimal one: removal of
/// any remaining supported arc would violate some constraint. Deterministic
/// removal order: descending weight, lexicographic on ties. The output's
/// cost never exceeds the input's.
///
/// # Errors
/// `NotIntegral`; `NotFeasibleInput` (with the violated constraints);
/// `CapExceeded` from constraint enumeration.
pub fn minimalize(delta: &Solution, inst: &Instance) -> Result<Solution, CoverError> {
    if !delta.is_integral() {
        return Err(CoverError::NotIntegral);
    }
    let sys = System::build(inst)?;
    let mut bits = sys.bits_from(delta);
    let violations = sys.violations(&bits);
    if !violations.is_empty() {
        return Err(CoverError::NotFeasibleInput { violations });
    }
    sys.minimalize_bits(&mut bits);
    Ok(sys.solution(&bits))
}

// =============================================================================
// Fractional lower bound
// =============================================================================

/// A certified fractional bound on the covering LP: a feasible fractional
/// solution `x`, its exact cost, and an exact dual lower bound with
/// `primal_value ≤ (1+eps)·lower_bound`. Since the LP relaxes the integral
/// covering problem, `lower_bound` also bounds the optimal variable cost of
/// any linear extension from below.
#[derive(Debug, Clone)]
pub struct FractionalBound {
    pub x: Solution,
    pub primal_value: CostValue,
    pub lower_bound: CostValue,
    pub eps: BigRational,
    pub iterations: u64,
}

struct HeapEntry {
    len: f64,
    id: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.len.total_cmp(&other.len) == std::cmp::Ordering::Equal && self.id == other.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Reversed: BinaryHeap is a max-heap, we want the smallest length (ties
    // to the smallest id) on top.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .len
            .total_cmp(&self.len)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Solves the covering LP approximately with a multiplicative-weights
/// update, maintaining float lengths internally but certifying the result
/// exactly: the returned primal solution, its value, and the dual lower
/// bound are exact rationals satisfying the [`FractionalBound`] invariants.
///
/// Zero-weight arcs are fixed to 1 up front and the constraints they
/// satisfy are dropped; variable upper bounds are omitted from the LP (that
/// only lowers its value, keeping `lower_bound` valid), and the returned
/// `x` is capped at 1 — a capped arc still satisfies its constraints.
/// Deterministic for a given (instance, eps).
///
/// # Errors
/// `BadEps` unless 0 < eps < 1; `CapExceeded` from enumeration;
/// `BudgetExhausted` if certification fails within the iteration budget.
pub fn mwu_fractional_cover(inst: &Instance, eps: &BigRational) -> Result<FractionalBound, CoverError> {
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(CoverError::BadEps);
    }
    let sys = System::build(inst)?;
    let m_arcs = sys.arc_count();

    // Fix zero-weight arcs and drop the constraints they satisfy.
    let zero_arcs: Vec<u32> = (0..m_arcs as u32)
        .filter(|&a| sys.weights[a as usize] == 0)
        .collect();
    let mut fixed = ArcBits::new(m_arcs);
    for &a in &zero_arcs {
        fixed.set(a);
    }
    let active_cons: Vec<u32> = (0..sys.cons.len() as u32)
        .filter(|&c| !sys.cons_arc_ids(c).iter().any(|&a| fixed.get(a)))
        .collect();

    let build_x = |values: Vec<((u32, u32), BigRational)>| -> Solution {
        Solution::from_values(inst, values).expect("constructed values are valid")
    };

    if active_cons.is_empty() {
        let x = build_x(
            zero_arcs
                .iter()
                .map(|&a| (sys.arcs[a as usize], BigRational::one()))
                .collect(),
        );
        return Ok(FractionalBound {
            x,
            primal_value: CostValue::Fixed(Cost::ZERO),
            lower_bound: CostValue::Fixed(Cost::ZERO),
            eps: eps.clone(),
            iterations: 0,
        });
    }

    // Arcs that still matter: members of at least one active constraint.
    let mut active_arc = vec![false; m_arcs];
    for &c in &active_cons {
        for &a in sys.cons_arc_ids(c) {
            active_arc[a as usize] = true;
        }
    }

    let eps_f = eps.to_f64().expect("eps fits f64");
    let mut step = (eps_f / 4.0).clamp(1e-4, 0.2);
    let m = active_cons.len();
    let budget: u64 = ((64.0 * m as f64 * ((m + 2) as f64).ln() / (eps_f * eps_f)).ceil() as u64)
        .clamp(100_000, 5_000_000);
    let cert_every: u64 = (m as u64 / 4).max(200);

    const LEN_INIT_NUM: f64 = 1e-9;
    let mut len: Vec<f64> = (0..m_arcs)
        .map(|a| {
            if active_arc[a] {
                LEN_INIT_NUM / sys.weights[a] as f64
            } else {
                0.0
            }
        })
        .collect();
    // con_len mirrors Σ len over each active constraint's arcs.
    let mut con_len: Vec<f64> = vec![0.0; sys.cons.len()];
    let mut heap = BinaryHeap::with_capacity(m);
    for &c in &active_cons {
        let l: f64 = sys.cons_arc_ids(c).iter().map(|&a| len[a as usize]).sum();
        con_len[c as usize] = l;
        heap.push(HeapEntry { len: l, id: c });
    }
    let min_w: Vec<i64> = (0..sys.cons.len() as u32)
        .map(|c| {
            sys.cons_arc_ids(c)
                .iter()
                .map(|&a| sys.weights[a as usize])
                .min()
                .unwrap_or(0)
        })
        .collect();

    let mut flow: Vec<i128> = vec![0; sys.cons.len()]; // exact dual, in units
    let mut d_total: f64 = (0..m_arcs)
        .map(|a| sys.weights[a] as f64 * len[a])
        .sum();
    let mut crossed = false;
    let mut fails_past_cross = 0u32;

    let certify = |len: &[f64], flow: &[i128]| -> (BigRational, BigRational, Vec<BigRational>) {
        // Exact primal: x = len / min constraint sum, capped at 1.
        let exact: Vec<BigRational> = len
            .iter()
            .map(|&l| BigRational::from_f64(l).expect("finite length"))
            .collect();
        let s = active_cons
            .iter()
            .map(|&c| {
                sys.cons_arc_ids(c)
                    .iter()
                    .map(|&a| exact[a as usize].clone())
                    .sum::<BigRational>()
            })
            .min()
            .expect("active constraints nonempty");
        let one = BigRational::one();
        let xs: Vec<BigRational> = (0..m_arcs)
            .map(|a| {
                if active_arc[a] {
                    (&exact[a] / &s).min(one.clone())
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        let primal_units: BigRational = (0..m_arcs)
            .map(|a| &xs[a] * BigRational::from_integer(BigInt::from(sys.weights[a])))
            .sum();
        // Exact dual: scale the accumulated flow to feasibility.
        let mut total_flow = BigRational::zero();
        for &c in &active_cons {
            total_flow += BigRational::from_integer(BigInt::from(flow[c as usize]));
        }
        let mut overload = BigRational::one();
        for (a, _) in active_arc.iter().enumerate().filter(|(_, act)| **act) {
            let mut load = BigInt::from(0);
            for &c in &sys.arc_cons[a] {
                load += BigInt::from(flow[c as usize]);
            }
            let ratio = BigRational::new(load, BigInt::from(sys.weights[a]));
            if ratio > overload {
                overload = ratio;
            }
        }
        let lower_units = total_flow / overload;
        (primal_units, lower_units, xs)
    };

    let one_plus_eps = BigRational::one() + eps;
    let mut iterations = 0u64;
    loop {
        let need_cert = iterations > 0 && iterations.is_multiple_of(cert_every);
        let just_crossed = d_total >= 1.0 && !crossed;
        if need_cert || just_crossed {
            if just_crossed {
                crossed = true;
            }
            let (primal_units, lower_units, xs) = certify(&len, &flow);
            if primal_units <= &one_plus_eps * &lower_units {
                let mut values: Vec<((u32, u32), BigRational)> = zero_arcs
                    .iter()
                    .map(|&a| (sys.arcs[a as usize], BigRational::one()))
                    .collect();
                for (a, x) in xs.iter().enumerate() {
                    if !x.is_zero() {
                        values.push((sys.arcs[a], x.clone()));
                    }
                }
                return Ok(FractionalBound {
                    x: build_x(values),
                    primal_value: CostValue::from_units_rational(primal_units),
                    lower_bound: CostValue::from_units_rational(lower_units),
                    eps: eps.clone(),
                    iterations,
                });
            }
            if crossed {
                fails_past_cross += 1;
                if fails_past_cross.is_multiple_of(4) {
                    step = (step / 2.0).max(1e-4);
                }
            }
        }
        if iterations >= budget {
            return Err(CoverError::BudgetExhausted {
                iterations,
                eps: eps.to_string(),
            });
        }
        iterations += 1;

        // Pop the shortest constraint, refreshing stale entries.
        let c = loop {
            let entry = heap.pop().expect("heap holds every active constraint");
            let current = con_len[entry.id as usize];
            if entry.len == current {
                break entry.id;
            }
            heap.push(HeapEntry {
                len: current,
                id: entry.id,
            });
        };
        let u = min_w[c as usize];
        flow[c as usize] += i128::from(u);
        for &a in sys.cons_arc_ids(c) {
            let w = sys.weights[a as usize] as f64;
            let old = len[a as usize];
            let new = old * (1.0 + step * (u as f64 / w));
            len[a as usize] = new;
            d_total += w * (new - old);
            for &cc in &sys.arc_cons[a as usize] {
                con_len[cc as usize] += new - old;
            }
        }
        heap.push(HeapEntry {
            len: con_len[c as usize],
            id: c,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::WEIGHT_SCALE;
    use crate::solution::check_cover_feasible;
    use crate::testutil::{from_int_matrix, k3};
    use proptest::prelude::*;

    #[test]
    fn enumerate_k3_empty_poset() {
        let cons = enumerate_constraints(&k3()).unwrap();
        assert_eq!(cons.len(), 5, "3 pairs + 2 directed triangles");
        let pairs: Vec<_> = cons.iter().filter(|c| c.arcs.len() == 2).collect();
        let triples: Vec<_> = cons.iter().filter(|c| c.arcs.len() == 3).collect();
        assert_eq!(pairs.len(), 3);
        assert_eq!(triples.len(), 2);
        assert_eq!(pairs[0].arcs, vec![(0, 1), (1, 0)]);
        assert_eq!(pairs[0].witnesses, vec![(1, 1), (0, 0)]);
        assert_eq!(triples[0].arcs, vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(triples[0].witnesses, vec![(1, 1), (2, 2), (0, 0)]);
        assert_eq!(triples[1].arcs, vec![(0, 2), (2, 1), (1, 0)]);
        assert!(cons.iter().all(|c| matches!(
            c.kind(),
            ViolationKind::Pair | ViolationKind::Triple
        )));
    }

    #[test]
    fn enumerate_total_order_is_empty() {
        let inst = from_int_matrix(3, &[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]], &[(0, 1), (1, 2)]);
        assert!(enumerate_constraints(&inst).unwrap().is_empty());
    }

    #[test]
    fn enumerate_single_pair() {
        let inst = from_int_matrix(2, &[&[0, 1], &[1, 0]], &[]);
        let cons = enumerate_constraints(&inst).unwrap();
        assert_eq!(cons.len(), 1);
        assert_eq!(cons[0].arcs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn enumerate_poset_witness_constraints() {
        // Two chains 0<1 and 2<3: the strict witnesses (2,3) and (0,1)
        // certify the pair constraint on arcs (0,3),(2,1).
        let inst = from_int_matrix(
            4,
            &[&[0, 1, 1, 1], &[1, 0, 1, 1], &[1, 1, 0, 1], &[1, 1, 1, 0]],
            &[(0, 1), (2, 3)],
        );
        let cons = enumerate_constraints(&inst).unwrap();
        let plain: Vec<_> = cons
            .iter()
            .filter(|c| c.kind() == ViolationKind::Pair)
            .collect();
        assert_eq!(plain.len(), 4, "four mutually incomparable pairs");
        let poset_pairs: Vec<_> = cons
            .iter()
            .filter(|c| c.kind() == ViolationKind::PosetPair)
            .collect();
        assert_eq!(poset_pairs.len(), 5);
        let cross = poset_pairs
            .iter()
            .find(|c| c.arcs == vec![(0, 3), (2, 1)])
            .expect("the chain-crossing pair constraint");
        assert_eq!(cross.witnesses, vec![(2, 3), (0, 1)]);
    }

    /// The enumeration agrees with a brute-force scan of the defining
    /// conditions over all arc pairs and ordered arc triples.
    #[test]
    fn enumerate_matches_brute_force() {
        for (n, prec) in [
            (4usize, vec![]),
            (4, vec![(0u32, 1u32)]),
            (4, vec![(0, 1), (2, 3)]),
            (5, vec![(0, 1), (1, 2)]),
        ] {
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0 } else { 1 }).collect())
                .collect();
            let row_refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let inst = from_int_matrix(n, &row_refs, &prec);
            let poset = inst.poset();
            let arcs = poset.incomparable_pairs();
            let mut expected = Vec::new();
            for s in 0..arcs.len() {
                for p in (s + 1)..arcs.len() {
                    let (x1, y1) = arcs[s];
                    let (x2, y2) = arcs[p];
                    if poset.contains_refl(x2, y1) && poset.contains_refl(x1, y2) {
                        expected.push(vec![arcs[s], arcs[p]]);
                    }
                }
            }
            for s in 0..arcs.len() {
                for p in (s + 1)..arcs.len() {
                    for q in (s + 1)..arcs.len() {
                        if q == p {
                            continue;
                        }
                        let (x1, y1) = arcs[s];
                        let (x2, y2) = arcs[p];
                        let (x3, y3) = arcs[q];
                        if poset.contains_refl(x2, y1)
                            && poset.contains_refl(x3, y2)
                            && poset.contains_refl(x1, y3)
                        {
                            expected.push(vec![arcs[s], arcs[p], arcs[q]]);
                        }
                    }
                }
            }
            expected.sort_by_key(|a| (a.len(), a.clone()));
            let got: Vec<Vec<(u32, u32)>> = enumerate_constraints(&inst)
                .unwrap()
                .into_iter()
                .map(|c| c.arcs)
                .collect();
            assert_eq!(got, expected, "n={n}, prec={prec:?}");
        }
    }

    #[test]
    fn enumeration_cap() {
        let n = ENUMERATION_CAP + 1;
        let inst = crate::instance::Instance::new(
            n,
            vec![0; n * n],
            crate::instance::Poset::new(n),
        )
        .unwrap();
        assert!(matches!(
            enumerate_constraints(&inst),
            Err(CoverError::CapExceeded { .. })
        ));
    }

    #[test]
    fn primal_dual_k3_takes_everything() {
        let inst = k3();
        let sol = primal_dual_cover(&inst).unwrap();
        assert_eq!(sol.support_len(), 6, "every arc reaches zero residual");
        let b = crate::solution::cost(&sol, &inst).unwrap();
        assert_eq!(b.variable_cost.decimal_floor(9), "9");
        assert!(check_cover_feasible(&sol, &inst).unwrap().is_empty());
    }

    #[test]
    fn primal_dual_total_order_is_empty() {
        let inst = from_int_matrix(3, &[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]], &[(0, 1), (1, 2)]);
        let sol = primal_dual_cover(&inst).unwrap();
        assert_eq!(sol.support_len(), 0);
    }

    /// With a zero-weight arc available, the local-ratio step subtracts
    /// nothing and selects only the free arc — the returned cover is free
    /// even though the naive both-arcs cover would cost 5.
    #[test]
    fn primal_dual_prefers_zero_weight_arcs() {
        let inst = from_int_matrix(2, &[&[0, 0], &[5, 0]], &[]);
        let sol = primal_dual_cover(&inst).unwrap();
        assert_eq!(sol.support().collect::<Vec<_>>(), vec![(0, 1)]);
        let b = crate::solution::cost(&sol, &inst).unwrap();
        assert!(b.variable_cost.is_zero());
    }

    #[test]
    fn minimalize_all_ones_k3() {
        let inst = k3();
        let all = Solution::from_arcs(
            &inst,
            [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)],
        )
        .unwrap();
        let min = minimalize(&all, &inst).unwrap();
        assert_eq!(
            min.support().collect::<Vec<_>>(),
            vec![(0, 1), (2, 0), (2, 1)],
            "the order (2,0,1)"
        );
        let b = crate::solution::cost(&min, &inst).unwrap();
        assert_eq!(b.variable_cost.decimal_floor(9), "4");
    }

    #[test]
    fn minimalize_drops_contradicting_arc() {
        let inst = k3();
        let sol = Solution::from_arcs(&inst, [(0, 1), (1, 2), (0, 2), (2, 0)]).unwrap();
        let min = minimalize(&sol, &inst).unwrap();
        assert_eq!(
            min.support().collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (1, 2)],
            "only (2,0) is droppable"
        );
    }

    #[test]
    fn minimalize_fixed_point_and_errors() {
        let inst = k3();
        let min = minimalize(
            &Solution::from_arcs(&inst, [(0, 1), (0, 2), (1, 2)]).unwrap(),
            &inst,
        )
        .unwrap();
        assert_eq!(min.support().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);

        assert!(matches!(
            minimalize(&Solution::empty(3), &inst),
            Err(CoverError::NotFeasibleInput { .. })
        ));
    }

    #[test]
    fn mwu_two_vertices() {
        let inst = from_int_matrix(2, &[&[0, 1], &[3, 0]], &[]);
        let eps = BigRational::new(BigInt::from(1), BigInt::from(100));
        let b = mwu_fractional_cover(&inst, &eps).unwrap();
        let primal = b.primal_value.natural_rational();
        let lower = b.lower_bound.natural_rational();
        let one = BigRational::one();
        assert!(lower <= one, "LP optimum is 1");
        assert!(primal >= one, "any feasible x costs at least the optimum");
        assert!(primal <= (BigRational::one() + &eps) * &lower);
        assert!(check_cover_feasible(&b.x, &inst).unwrap().is_empty());
    }

    #[test]
    fn mwu_total_order_trivial() {
        let inst = from_int_matrix(3, &[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]], &[(0, 1), (1, 2)]);
        let eps = BigRational::new(BigInt::from(1), BigInt::from(20));
        let b = mwu_fractional_cover(&inst, &eps).unwrap();
        assert!(b.primal_value.is_zero());
        assert!(b.lower_bound.is_zero());
        assert_eq!(b.iterations, 0);
    }

    #[test]
    fn mwu_k3_bounds_below_optimum() {
        let inst = k3();
        let eps = BigRational::new(BigInt::from(1), BigInt::from(20));
        let b = mwu_fractional_cover(&inst, &eps).unwrap();
        let four = BigRational::from_integer(BigInt::from(4));
        assert!(b.lower_bound.natural_rational() <= four);
        assert!(
            b.primal_value.natural_rational()
                <= (BigRational::one() + &eps) * b.lower_bound.natural_rational()
        );
        assert!(check_cover_feasible(&b.x, &inst).unwrap().is_empty());
    }

    #[test]
    fn mwu_zero_weight_arcs_are_free() {
        // A zero-weight arc satisfies its pair constraint for free, so both
        // bounds collapse to the remaining structure.
        let inst = from_int_matrix(2, &[&[0, 0], &[5, 0]], &[]);
        let eps = BigRational::new(BigInt::from(1), BigInt::from(20));
        let b = mwu_fractional_cover(&inst, &eps).unwrap();
        assert!(b.primal_value.is_zero());
        assert!(b.lower_bound.is_zero());
        assert!(b.x.has_one(0, 1));
    }

    #[test]
    fn mwu_deterministic() {
        let inst = k3();
        let eps = BigRational::new(BigInt::from(1), BigInt::from(20));
        let a = mwu_fractional_cover(&inst, &eps).unwrap();
        let b = mwu_fractional_cover(&inst, &eps).unwrap();
        assert_eq!(a.primal_value, b.primal_value);
        assert_eq!(a.lower_bound, b.lower_bound);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn mwu_rejects_bad_eps() {
        let inst = k3();
        assert!(matches!(
            mwu_fractional_cover(&inst, &BigRational::zero()),
            Err(CoverError::BadEps)
        ));
        assert!(matches!(
            mwu_fractional_cover(&inst, &BigRational::one()),
            Err(CoverError::BadEps)
        ));
    }

    proptest! {
        /// Primal-dual output is always cover-feasible, and minimalization
        /// leaves a solution where every supported arc is load-bearing.
        #[test]
        fn pd_then_minimalize_is_minimal(seed in 0u64..60) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..7);
            let mut base: Vec<u32> = (0..n as u32).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                base.swap(i, j);
            }
            let mut pairs = Vec::new();
            for p in 0..n {
                for q in (p + 1)..n {
                    if rng.gen_bool(0.25) {
                        pairs.push((base[p], base[q]));
                    }
                }
            }
            let poset = crate::instance::Poset::from_pairs(n, &pairs).unwrap();
            let mut w = vec![0i64; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        w[i * n + j] = rng.gen_range(0..=4) * WEIGHT_SCALE;
                    }
                }
            }
            let inst = crate::instance::Instance::new(n, w, poset).unwrap();

            let pd = primal_dual_cover(&inst).unwrap();
            prop_assert!(check_cover_feasible(&pd, &inst).unwrap().is_empty());

            let min = minimalize(&pd, &inst).unwrap();
            prop_assert!(check_cover_feasible(&min, &inst).unwrap().is_empty());
            let min_cost = crate::solution::cost(&min, &inst).unwrap().variable_cost;
            let pd_cost = crate::solution::cost(&pd, &inst).unwrap().variable_cost;
            prop_assert!(min_cost <= pd_cost);

            // Minimality: dropping any supported arc breaks feasibility.
            let support: Vec<(u32, u32)> = min.support().collect();
            for &drop in &support {
                let rest = Solution::from_arcs(
                    &inst,
                    support.iter().copied().filter(|&a| a != drop),
                ).unwrap();
                prop_assert!(!check_cover_feasible(&rest, &inst).unwrap().is_empty());
            }
        }
    }
}
