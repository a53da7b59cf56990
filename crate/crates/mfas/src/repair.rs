//! Cost-preserving repair: turns a minimal cover-feasible integral solution
//! on a hemimetric instance into a linear extension without increasing the
//! objective.
//!
//! A pair {i,j} with both orientations set is *contradicting*; a solution
//! with no contradicting pair that is minimal and cover-feasible is already
//! an order. Each round locates the *basic triples* (a,c,b) — patterns
//! δ(a,c)=δ(c,b)=δ(a,b)=δ(b,a)=1, δ(c,a)=δ(b,c)=0 — groups them around a
//! pivot vertex v into the sets S_v, M_v, E_v, and builds candidate
//! solutions that drop the M_v arcs and reverse the arcs of S_v or E_v in a
//! synchronized way. On hemimetric weights some candidate is never more
//! expensive, and re-minimalizing it strictly reduces the number of
//! contradicting pairs, so the loop ends after at most O(n²) rounds.

use crate::covering::{mwu_fractional_cover, primal_dual_cover, ArcBits, CoverError, System};
use crate::instance::{validate_hemimetric, Cost, Instance};
use crate::solution::{
    check_cover_feasible, check_fas_feasible, cost, permutation_from_delta, CostValue,
    Permutation, Solution, Violation,
};
use num::BigRational;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("operation requires an integral (0/1) solution")]
    NotIntegral,
    #[error("solution is over {got} vertices, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("instance violates {} triangle inequalit{}", violations.len(), if violations.len() == 1 { "y" } else { "ies" })]
    NotHemimetric { violations: Vec<Vec<u32>> },
    #[error("repair invariant broken: {context}")]
    LemmaViolated { context: String, dump: String },
    #[error("repair failed to terminate within {iterations} rounds")]
    NonTermination { iterations: u64, dump: String },
    #[error(transparent)]
    Cover(#[from] CoverError),
}

// =============================================================================
// Contradicting pairs and basic triples
// =============================================================================

/// The unordered pairs with both orientations set, as (min, max), sorted.
///
/// # Errors
/// `NotIntegral`.
pub fn contradicting_pairs(delta: &Solution) -> Result<Vec<(u32, u32)>, RepairError> {
    if !delta.is_integral() {
        return Err(RepairError::NotIntegral);
    }
    let mut out = Vec::new();
    for (i, j) in delta.support() {
        if i < j && delta.has_one(j, i) {
            out.push((i, j));
        }
    }
    Ok(out)
}

/// An ordered vertex triple (a,c,b) with δ(a,c)=δ(c,b)=δ(a,b)=δ(b,a)=1 and
/// δ(c,a)=δ(b,c)=0 — the local pattern that certifies the contradicting
/// pair {a,b} in a minimal solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicTriple {
    pub a: u32,
    pub c: u32,
    pub b: u32,
}

/// All basic triples of an integral solution, by direct enumeration of
/// ordered vertex triples, sorted by (a, c, b).
///
/// # Errors
/// `NotIntegral`.
pub fn basic_triples(delta: &Solution) -> Result<Vec<BasicTriple>, RepairError> {
    if !delta.is_integral() {
        return Err(RepairError::NotIntegral);
    }
    let n = delta.n();
    let mut mat = vec![0u8; n * n];
    for (i, j) in delta.support() {
        mat[i as usize * n + j as usize] = 1;
    }
    Ok(triples_from_mat(n, &mat)
        .into_iter()
        .map(|(a, c, b)| BasicTriple { a, c, b })
        .collect())
}

fn triples_from_mat(n: usize, mat: &[u8]) -> Vec<(u32, u32, u32)> {
    let at = |i: usize, j: usize| mat[i * n + j] == 1;
    let mut out = Vec::new();
    for a in 0..n {
        for c in 0..n {
            if c == a || !at(a, c) || at(c, a) {
                continue;
            }
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                if at(c, b) && !at(b, c) && at(a, b) && at(b, a) {
                    out.push((a as u32, c as u32, b as u32));
                }
            }
        }
    }
    out
}

// =============================================================================
// Pivot sets and candidates
// =============================================================================

/// The three arc sets a pivot vertex v induces on the basic triples T:
/// S = {(i,j) : (v,i,j) ∈ T}, M = {(i,j) : (j,v,i) ∈ T},
/// E = {(i,j) : (i,j,v) ∈ T}. Pairwise disjoint for every integral
/// solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SMESets {
    pub v: u32,
    pub s: Vec<(u32, u32)>,
    pub m: Vec<(u32, u32)>,
    pub e: Vec<(u32, u32)>,
}

/// Which arc set a candidate reverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum XSet {
    S,
    E,
}

impl fmt::Display for XSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            XSet::S => "S",
            XSet::E => "E",
        })
    }
}

/// Computes [`SMESets`] for one pivot from the solution's basic triples.
///
/// # Errors
/// `NotIntegral`.
pub fn sme_sets(delta: &Solution, v: u32) -> Result<SMESets, RepairError> {
    let triples = basic_triples(delta)?;
    let mut sets = SMESets {
        v,
        s: Vec::new(),
        m: Vec::new(),
        e: Vec::new(),
    };
    for t in triples {
        if t.a == v {
            sets.s.push((t.c, t.b));
        }
        if t.c == v {
            sets.m.push((t.b, t.a));
        }
        if t.b == v {
            sets.e.push((t.a, t.c));
        }
    }
    sets.s.sort_unstable();
    sets.m.sort_unstable();
    sets.e.sort_unstable();
    debug_assert!(disjoint(&sets.s, &sets.m) && disjoint(&sets.s, &sets.e) && disjoint(&sets.m, &sets.e));
    Ok(sets)
}

fn disjoint(x: &[(u32, u32)], y: &[(u32, u32)]) -> bool {
    x.iter().all(|a| !y.contains(a))
}

/// Builds the candidate δ^X for pivot v: arcs of M_v are dropped, arcs of
/// the chosen X ∈ {S_v, E_v} are reversed, everything else is copied. For a
/// minimal cover-feasible input the result is again cover-feasible; that is
/// asserted here and a failure is an internal error, never a tolerated
/// outcome.
///
/// # Errors
/// `NotIntegral`; `DimensionMismatch`; `LemmaViolated` if the candidate
/// fails the cover check (with a diagnostic dump); `CapExceeded` from
/// enumeration.
pub fn build_candidate(
    delta: &Solution,
    inst: &Instance,
    v: u32,
    x: XSet,
) -> Result<Solution, RepairError> {
    if delta.n() != inst.n() {
        return Err(RepairError::DimensionMismatch {
            expected: inst.n(),
            got: delta.n(),
        });
    }
    let sets = sme_sets(delta, v)?;
    let reversed = match x {
        XSet::S => &sets.s,
        XSet::E => &sets.e,
    };
    let mut arcs: std::collections::BTreeSet<(u32, u32)> = delta.support().collect();
    for arc in &sets.m {
        arcs.remove(arc);
    }
    for &(i, j) in reversed {
        arcs.remove(&(i, j));
        arcs.insert((j, i));
    }
    let cand = Solution::from_arcs_unchecked(delta.n(), arcs);
    let violations =
        check_cover_feasible(&cand, inst).map_err(|e| RepairError::LemmaViolated {
            context: format!("cover check failed on candidate: {e}"),
            dump: String::new(),
        })?;
    if !violations.is_empty() {
        return Err(lemma_violated_candidate(&cand, v, x, &violations));
    }
    Ok(cand)
}

fn lemma_violated_candidate(cand: &Solution, v: u32, x: XSet, violations: &[Violation]) -> RepairError {
    let mut dump = format!("candidate for pivot v={v}, X={x} is cover-infeasible\nsupport:\n");
    for (i, j) in cand.support() {
        dump.push_str(&format!("  {i} {j}\n"));
    }
    dump.push_str("violated constraints:\n");
    for viol in violations {
        dump.push_str(&format!("  {viol}\n"));
    }
    RepairError::LemmaViolated {
        context: "candidate solution violates a covering constraint".into(),
        dump,
    }
}

// =============================================================================
// Structural probe
// =============================================================================

/// Scans for counterexamples to the ordering-transfer property of minimal
/// cover-feasible solutions: for all i,j,k,ℓ with j≠k, i≠ℓ, i ⪯̂ j and
/// k ⪯̂ ℓ, if the effective values give δ̂(j,k)=1 and δ̂(k,j)=0 then
/// δ̂(i,ℓ)=1 and δ̂(ℓ,i)=0 must hold. Returns the offending quadruples
/// (i,j,k,ℓ); on minimal cover-feasible integral input the list is expected
/// to be empty. Intended as a property-test oracle.
pub fn check_lemma1(delta: &Solution, inst: &Instance) -> Vec<(u32, u32, u32, u32)> {
    assert_eq!(delta.n(), inst.n(), "solution and instance sizes differ");
    let n = inst.n();
    let poset = inst.poset();
    let mat = delta.effective_matrix(poset);
    let at = |i: u32, j: u32| mat[i as usize * n + j as usize] == 1;
    let mut out = Vec::new();
    for j in 0..n as u32 {
        for k in 0..n as u32 {
            if j == k || !at(j, k) || at(k, j) {
                continue;
            }
            for i in 0..n as u32 {
                if !poset.contains_refl(i, j) {
                    continue;
                }
                for l in 0..n as u32 {
                    if i == l || !poset.contains_refl(k, l) {
                        continue;
                    }
                    if !at(i, l) || at(l, i) {
                        out.push((i, j, k, l));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

// =============================================================================
// The repair loop
// =============================================================================

/// One accepted round of the repair loop. The first record may describe the
/// initial minimalization (no pivot: `chosen_v`/`chosen_x` are `None`, and
/// `t_size` counts the basic triples of the minimalized state); every other
/// record describes a candidate application, with `t_size` the number of
/// basic triples that drove it. Costs are variable costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cost_before: Cost,
    pub cost_after: Cost,
    pub contradicting_before: usize,
    pub contradicting_after: usize,
    pub chosen_v: Option<u32>,
    pub chosen_x: Option<XSet>,
    pub t_size: usize,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} ",
            self.cost_before, self.cost_after, self.contradicting_before, self.contradicting_after
        )?;
        match self.chosen_v {
            Some(v) => write!(f, "{v} ")?,
            None => write!(f, "- ")?,
        }
        match self.chosen_x {
            Some(x) => write!(f, "{x} ")?,
            None => write!(f, "- ")?,
        }
        write!(f, "{}", self.t_size)
    }
}

/// The accepted iterations of one repair run, plus a counter of raw (not
/// yet re-minimalized) candidates that failed to reduce the contradicting
/// count — kept for empirical study of the strictness claim.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepairTrace {
    pub iterations: Vec<TraceRecord>,
    pub raw_no_progress: u64,
}

impl RepairTrace {
    /// Line-oriented rendering: per record,
    /// `cost_before cost_after contradicting_before contradicting_after v X |T|`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for rec in &self.iterations {
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }
}

struct LoopState<'a> {
    sys: &'a System,
    n: usize,
}

impl LoopState<'_> {
    fn mat(&self, bits: &ArcBits) -> Vec<u8> {
        let mut mat = vec![0u8; self.n * self.n];
        for a in bits.ones() {
            let (i, j) = self.sys.arcs[a as usize];
            mat[i as usize * self.n + j as usize] = 1;
        }
        mat
    }

    fn contra_count(&self, bits: &ArcBits) -> usize {
        let mut count = 0;
        for a in bits.ones() {
            let (i, j) = self.sys.arcs[a as usize];
            if i < j {
                let rev = self.sys.arc_id(j, i);
                if rev != u32::MAX && bits.get(rev) {
                    count += 1;
                }
            }
        }
        count
    }

    fn dump(&self, bits: &ArcBits, note: &str) -> String {
        let mut dump = format!("{note}\nsupport ({} arcs):\n", bits.count());
        for a in bits.ones() {
            let (i, j) = self.sys.arcs[a as usize];
            dump.push_str(&format!("  {i} {j}\n"));
        }
        dump.push_str(&format!(
            "variable cost: {}\ncontradicting pairs: {}\n",
            Cost::from_units(self.sys.cost_units(bits)),
            self.contra_count(bits),
        ));
        dump
    }
}

/// Repairs an integral cover-feasible solution into a linear extension of
/// cost no greater than its minimalization. Per round: minimalize; stop if
/// no pair is contradicting; compute the basic triples (nonempty by the
/// structure of minimal solutions); build the candidates δ^X for every
/// pivot with S∪M∪E ≠ ∅ and X ∈ {S, E}; keep those not costlier than the
/// current solution, minimalize them, and adopt the best by (fewest
/// contradicting pairs, lowest cost, smallest pivot, S before E), which
/// must strictly reduce the contradicting count. Rounds are capped at 2n².
///
/// # Errors
/// `NotIntegral`; `DimensionMismatch`; `NotHemimetric` (the cost guarantee
/// needs triangle inequalities); `NotFeasibleInput` via `Cover` when the
/// input violates a constraint; `LemmaViolated` when an invariant the
/// procedure relies on fails (diagnostic dump attached); `NonTermination`
/// on cap breach.
pub fn repair(delta: &Solution, inst: &Instance) -> Result<(Solution, RepairTrace), RepairError> {
    if !delta.is_integral() {
        return Err(RepairError::NotIntegral);
    }
    if delta.n() != inst.n() {
        return Err(RepairError::DimensionMismatch {
            expected: inst.n(),
            got: delta.n(),
        });
    }
    let report = validate_hemimetric(inst);
    if !report.is_hemimetric {
        return Err(RepairError::NotHemimetric {
            violations: report.violations,
        });
    }
    let sys = System::build(inst)?;
    let state = LoopState {
        sys: &sys,
        n: inst.n(),
    };
    let mut bits = sys.bits_from(delta);
    let violations = sys.violations(&bits);
    if !violations.is_empty() {
        return Err(CoverError::NotFeasibleInput { violations }.into());
    }

    let mut trace = RepairTrace::default();
    let cost_raw = sys.cost_units(&bits);
    let contra_raw = state.contra_count(&bits);
    sys.minimalize_bits(&mut bits);
    let mut cur_cost = sys.cost_units(&bits);
    let mut cur_contra = state.contra_count(&bits);
    if cur_contra < contra_raw {
        trace.iterations.push(TraceRecord {
            cost_before: Cost::from_units(cost_raw),
            cost_after: Cost::from_units(cur_cost),
            contradicting_before: contra_raw,
            contradicting_after: cur_contra,
            chosen_v: None,
            chosen_x: None,
            t_size: triples_from_mat(state.n, &state.mat(&bits)).len(),
        });
    }

    let cap = 2 * (inst.n() as u64) * (inst.n() as u64);
    let mut rounds: u64 = 0;
    while cur_contra > 0 {
        rounds += 1;
        if rounds > cap {
            return Err(RepairError::NonTermination {
                iterations: rounds - 1,
                dump: state.dump(&bits, "state at the round cap"),
            });
        }
        let triples = triples_from_mat(state.n, &state.mat(&bits));
        if triples.is_empty() {
            return Err(RepairError::LemmaViolated {
                context: "contradicting pairs present but no basic triple exists".into(),
                dump: state.dump(&bits, "minimal solution without basic triples"),
            });
        }
        // Group the triples by pivot role.
        let n = state.n;
        let mut s_of: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut m_of: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        let mut e_of: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for &(a, c, b) in &triples {
            s_of[a as usize].push((c, b));
            m_of[c as usize].push((b, a));
            e_of[b as usize].push((a, c));
        }

        struct Best {
            contra: usize,
            cost: i128,
            bits: ArcBits,
            v: u32,
            x: XSet,
        }
        let mut best: Option<Best> = None;
        for v in 0..n {
            if s_of[v].is_empty() && m_of[v].is_empty() && e_of[v].is_empty() {
                continue;
            }
            for x in [XSet::S, XSet::E] {
                let reversed = match x {
                    XSet::S => &s_of[v],
                    XSet::E => &e_of[v],
                };
                let mut cand = bits.clone();
                for &(i, j) in &m_of[v] {
                    cand.unset(sys.arc_id(i, j));
                }
                for &(i, j) in reversed {
                    cand.unset(sys.arc_id(i, j));
                    cand.set(sys.arc_id(j, i));
                }
                let cand_violations = sys.violations(&cand);
                if !cand_violations.is_empty() {
                    return Err(lemma_violated_candidate(
                        &sys.solution(&cand),
                        v as u32,
                        x,
                        &cand_violations,
                    ));
                }
                if state.contra_count(&cand) >= cur_contra {
                    trace.raw_no_progress += 1;
                }
                if sys.cost_units(&cand) > cur_cost {
                    continue;
                }
                sys.minimalize_bits(&mut cand);
                let contra = state.contra_count(&cand);
                let cost = sys.cost_units(&cand);
                let better = match &best {
                    None => true,
                    Some(b) => (contra, cost) < (b.contra, b.cost),
                };
                if better {
                    best = Some(Best {
                        contra,
                        cost,
                        bits: cand,
                        v: v as u32,
                        x,
                    });
                }
            }
        }
        let Some(best) = best else {
            return Err(RepairError::LemmaViolated {
                context: "no candidate is at most as expensive as the current solution".into(),
                dump: state.dump(&bits, "state with no admissible candidate"),
            });
        };
        if best.contra >= cur_contra {
            return Err(RepairError::LemmaViolated {
                context: "no candidate strictly reduces the contradicting-pair count".into(),
                dump: state.dump(&bits, "state where progress stalled"),
            });
        }
        trace.iterations.push(TraceRecord {
            cost_before: Cost::from_units(cur_cost),
            cost_after: Cost::from_units(best.cost),
            contradicting_before: cur_contra,
            contradicting_after: best.contra,
            chosen_v: Some(best.v),
            chosen_x: Some(best.x),
            t_size: triples.len(),
        });
        bits = best.bits;
        cur_cost = best.cost;
        cur_contra = best.contra;
    }

    let out = sys.solution(&bits);
    let order_violations = check_fas_feasible(&out, inst).expect("integral by construction");
    if !order_violations.is_empty() {
        return Err(RepairError::LemmaViolated {
            context: "solution without contradicting pairs is not an order".into(),
            dump: state.dump(&bits, "final state failing the order check"),
        });
    }
    Ok((out, trace))
}

// =============================================================================
// End-to-end pipeline
// =============================================================================

/// Everything one pipeline run produces besides the order itself. Exact
/// invariants: `total_cost = variable_cost + fixed_cost`, and when
/// `lower_bound` is positive, `ratio_vs_bound = variable / lower ≥ 1`.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Content hash of the instance's canonical serialization.
    pub instance_digest: String,
    pub total_cost: CostValue,
    pub variable_cost: CostValue,
    pub fixed_cost: Cost,
    /// Certified fractional lower bound on the variable cost, present when
    /// an accuracy `eps` was requested.
    pub lower_bound: Option<CostValue>,
    /// `variable_cost / lower_bound`, exact; absent without a bound or when
    /// the bound is zero.
    pub ratio_vs_bound: Option<BigRational>,
    /// Accepted repair iterations.
    pub iterations: u64,
    /// Contradicting pairs in the unrepaired covering.
    pub contradicting_initial: usize,
    /// The pipeline's approximation factor against the covering optimum.
    pub alpha_guarantee: u32,
    pub trace: RepairTrace,
}

/// Covering, repair, and extraction in one call: runs [`primal_dual_cover`],
/// repairs the result into an order, and reports exact costs and trace
/// statistics. When `eps` is given, also certifies a fractional lower bound
/// at that accuracy, so the report carries an instance-specific quality
/// ratio next to the a-priori factor of 3.
///
/// # Errors
/// Propagated from the components; the instance must be hemimetric for the
/// repair guarantee to hold, and [`repair`] enforces that.
pub fn solve_pipeline(
    inst: &Instance,
    eps: Option<&BigRational>,
) -> Result<(Permutation, SolveReport), RepairError> {
    let covering = primal_dual_cover(inst)?;
    let contradicting_initial = contradicting_pairs(&covering)?.len();
    let (order, trace) = repair(&covering, inst)?;
    let perm = permutation_from_delta(&order, inst)
        .expect("repair output passes the order check");
    let breakdown = cost(&order, inst).expect("repair output matches the instance");

    let mut lower_bound = None;
    let mut ratio_vs_bound = None;
    if let Some(eps) = eps {
        let bound = mwu_fractional_cover(inst, eps)?;
        if !bound.lower_bound.is_zero() {
            ratio_vs_bound = Some(
                breakdown.variable_cost.units_rational() / bound.lower_bound.units_rational(),
            );
        }
        lower_bound = Some(bound.lower_bound);
    }

    let report = SolveReport {
        instance_digest: inst.digest(),
        total_cost: breakdown.total_cost,
        variable_cost: breakdown.variable_cost,
        fixed_cost: breakdown.fixed_cost,
        lower_bound,
        ratio_vs_bound,
        iterations: trace.iterations.len() as u64,
        contradicting_initial,
        alpha_guarantee: 3,
        trace,
    };
    Ok((perm, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{minimalize, primal_dual_cover};
    use crate::oracle::{exact_min_cover, exact_min_extension};
    use crate::solution::{cost, delta_from_permutation, permutation_from_delta};
    use crate::testutil::{from_int_matrix, k3, random_instance};
    use proptest::prelude::*;

    fn sol(inst: &Instance, arcs: &[(u32, u32)]) -> Solution {
        Solution::from_arcs(inst, arcs.iter().copied()).unwrap()
    }

    #[test]
    fn contradicting_pair_examples() {
        let inst = k3();
        let all = sol(&inst, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
        assert_eq!(contradicting_pairs(&all).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
        let order = sol(&inst, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(contradicting_pairs(&order).unwrap(), vec![]);
        let one = sol(&inst, &[(0, 1), (1, 2), (0, 2), (2, 0)]);
        assert_eq!(contradicting_pairs(&one).unwrap(), vec![(0, 2)]);
    }

    #[test]
    fn basic_triple_examples() {
        let inst = k3();
        let d = sol(&inst, &[(0, 1), (1, 2), (0, 2), (2, 0)]);
        assert_eq!(basic_triples(&d).unwrap(), vec![BasicTriple { a: 0, c: 1, b: 2 }]);
        let order = sol(&inst, &[(0, 1), (0, 2), (1, 2)]);
        assert!(basic_triples(&order).unwrap().is_empty());
        let all = sol(&inst, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
        assert!(basic_triples(&all).unwrap().is_empty(), "zero conditions all fail");
    }

    #[test]
    fn sme_set_examples() {
        let inst = k3();
        let d = sol(&inst, &[(0, 1), (1, 2), (0, 2), (2, 0)]);
        let s0 = sme_sets(&d, 0).unwrap();
        assert_eq!((s0.s.as_slice(), s0.m.as_slice(), s0.e.as_slice()), ([(1, 2)].as_slice(), [].as_slice(), [].as_slice()));
        let s1 = sme_sets(&d, 1).unwrap();
        assert_eq!((s1.s.as_slice(), s1.m.as_slice(), s1.e.as_slice()), ([].as_slice(), [(2, 0)].as_slice(), [].as_slice()));
        let s2 = sme_sets(&d, 2).unwrap();
        assert_eq!((s2.s.as_slice(), s2.m.as_slice(), s2.e.as_slice()), ([].as_slice(), [].as_slice(), [(0, 1)].as_slice()));
    }

    #[test]
    fn build_candidate_examples() {
        let inst = k3();
        let d = sol(&inst, &[(0, 1), (1, 2), (0, 2), (2, 0)]);

        let c0 = build_candidate(&d, &inst, 0, XSet::S).unwrap();
        assert_eq!(c0.support().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (2, 0), (2, 1)]);
        assert_eq!(cost(&c0, &inst).unwrap().variable_cost.decimal_floor(9), "6");

        let c2 = build_candidate(&d, &inst, 2, XSet::E).unwrap();
        assert_eq!(c2.support().collect::<Vec<_>>(), vec![(0, 2), (1, 0), (1, 2), (2, 0)]);
        assert_eq!(cost(&c2, &inst).unwrap().variable_cost.decimal_floor(9), "6");

        // Dropping M_1 = {(2,0)} resolves the contradiction directly.
        let c1 = build_candidate(&d, &inst, 1, XSet::S).unwrap();
        assert_eq!(c1.support().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);

        // A pivot with empty sets is the identity.
        let order = sol(&inst, &[(0, 1), (0, 2), (1, 2)]);
        let same = build_candidate(&order, &inst, 0, XSet::S).unwrap();
        assert_eq!(same, order);
    }

    #[test]
    fn lemma1_holds_on_minimalized_covers() {
        for seed in 0..30u64 {
            let inst = random_instance(seed, 5, true);
            let pd = primal_dual_cover(&inst).unwrap();
            let min = minimalize(&pd, &inst).unwrap();
            assert_eq!(check_lemma1(&min, &inst), vec![], "seed {seed}");
        }
    }

    #[test]
    fn repair_resolves_by_minimalization_on_k3() {
        let inst = k3();
        let d = sol(&inst, &[(0, 1), (1, 2), (0, 2), (2, 0)]);
        let (out, trace) = repair(&d, &inst).unwrap();
        assert_eq!(permutation_from_delta(&out, &inst).unwrap(), vec![0, 1, 2]);
        assert_eq!(cost(&out, &inst).unwrap().variable_cost.decimal_floor(9), "4");
        assert_eq!(trace.iterations.len(), 1);
        let rec = &trace.iterations[0];
        assert_eq!(rec.chosen_v, None);
        assert_eq!((rec.contradicting_before, rec.contradicting_after), (1, 0));
    }

    #[test]
    fn repair_all_ones_k3() {
        let inst = k3();
        let all = sol(&inst, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
        let (out, trace) = repair(&all, &inst).unwrap();
        assert_eq!(permutation_from_delta(&out, &inst).unwrap(), vec![2, 0, 1]);
        assert_eq!(cost(&out, &inst).unwrap().variable_cost.decimal_floor(9), "4");
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.iterations[0].contradicting_before, 3);
        assert_eq!(trace.iterations[0].contradicting_after, 0);
    }

    #[test]
    fn repair_keeps_orders_unchanged() {
        let inst = k3();
        let order = sol(&inst, &[(0, 1), (0, 2), (1, 2)]);
        let (out, trace) = repair(&order, &inst).unwrap();
        assert_eq!(out, order);
        assert!(trace.iterations.is_empty());
    }

    #[test]
    fn repair_rejects_non_hemimetric() {
        let inst = from_int_matrix(3, &[&[0, 1, 5], &[1, 0, 1], &[1, 1, 0]], &[]);
        let d = sol(&inst, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]);
        assert!(matches!(
            repair(&d, &inst),
            Err(RepairError::NotHemimetric { .. })
        ));
    }

    #[test]
    fn repair_rejects_infeasible_input() {
        let inst = k3();
        assert!(matches!(
            repair(&Solution::empty(3), &inst),
            Err(RepairError::Cover(CoverError::NotFeasibleInput { .. }))
        ));
    }

    fn assert_trace_invariants(trace: &RepairTrace) {
        for rec in &trace.iterations {
            assert!(rec.cost_after <= rec.cost_before);
            assert!(rec.contradicting_after < rec.contradicting_before);
        }
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].cost_before <= pair[0].cost_after);
            assert!(pair[1].contradicting_before <= pair[0].contradicting_after);
        }
    }

    /// A minimal cover-feasible solution whose two contradicting pairs
    /// cannot be removed by minimalization: every arc is the sole support
    /// of some constraint. Repair must go through a pivot round.
    ///
    /// On uniform weights over n=4: support
    /// {(0,1),(1,0),(0,2),(2,1),(3,0),(1,3),(2,3),(3,2)}, contradicting
    /// pairs {0,1} and {2,3}, basic triples
    /// (0,2,1),(1,3,0),(2,1,3),(3,0,2). The first admissible candidate
    /// (pivot 0, X=S drops (2,3), reverses (2,1)) costs 7 and minimalizes
    /// to an order of cost 6.
    #[test]
    fn repair_pivot_round_on_locked_solution() {
        let inst = from_int_matrix(
            4,
            &[&[0, 1, 1, 1], &[1, 0, 1, 1], &[1, 1, 0, 1], &[1, 1, 1, 0]],
            &[],
        );
        let d = sol(
            &inst,
            &[(0, 1), (1, 0), (0, 2), (2, 1), (3, 0), (1, 3), (2, 3), (3, 2)],
        );
        // The construction really is minimal and really is stuck.
        assert_eq!(minimalize(&d, &inst).unwrap(), d);
        assert_eq!(contradicting_pairs(&d).unwrap(), vec![(0, 1), (2, 3)]);
        let triples = basic_triples(&d).unwrap();
        assert_eq!(
            triples,
            vec![
                BasicTriple { a: 0, c: 2, b: 1 },
                BasicTriple { a: 1, c: 3, b: 0 },
                BasicTriple { a: 2, c: 1, b: 3 },
                BasicTriple { a: 3, c: 0, b: 2 },
            ]
        );

        let (out, trace) = repair(&d, &inst).unwrap();
        assert!(check_fas_feasible(&out, &inst).unwrap().is_empty());
        assert_eq!(cost(&out, &inst).unwrap().variable_cost.decimal_floor(9), "6");
        assert_eq!(trace.iterations.len(), 1);
        let rec = &trace.iterations[0];
        assert_eq!(rec.chosen_v, Some(0));
        assert_eq!(rec.chosen_x, Some(XSet::S));
        assert_eq!((rec.contradicting_before, rec.contradicting_after), (2, 0));
        assert_eq!(rec.cost_before, Cost::from_units(8 * 1_000_000_000));
        assert_eq!(rec.cost_after, Cost::from_units(6 * 1_000_000_000));
        assert_eq!(rec.t_size, 4);
        assert_trace_invariants(&trace);
    }

    /// Across many random hemimetric instances, repair of the all-ones
    /// solution and of the primal-dual cover must produce orders without
    /// cost increase over the minimalized input.
    #[test]
    fn repair_randoms_terminate_and_preserve_cost() {
        for seed in 0..120u64 {
            let n = 4 + (seed % 3) as usize;
            let inst = random_instance(seed, n, true);
            let arcs = inst.poset().incomparable_pairs();
            let all = Solution::from_arcs(&inst, arcs).unwrap();
            let min_cost = cost(&minimalize(&all, &inst).unwrap(), &inst)
                .unwrap()
                .variable_cost;
            let (out, trace) = repair(&all, &inst).unwrap();
            assert!(check_fas_feasible(&out, &inst).unwrap().is_empty(), "seed {seed}");
            let out_cost = cost(&out, &inst).unwrap().variable_cost;
            assert!(out_cost <= min_cost, "seed {seed}");
            assert_trace_invariants(&trace);

            let pd = primal_dual_cover(&inst).unwrap();
            let (out2, trace2) = repair(&pd, &inst).unwrap();
            assert!(check_fas_feasible(&out2, &inst).unwrap().is_empty(), "seed {seed}");
            assert_trace_invariants(&trace2);
        }
    }

    proptest! {
        /// Repairing an exactly optimal cover yields an exactly optimal
        /// linear extension: cost can neither rise (repair guarantee) nor
        /// fall (the extension optimum is no cheaper than the cover
        /// optimum on hemimetric weights).
        #[test]
        fn repair_preserves_exact_optimum(seed in 100u64..140) {
            let inst = random_instance(seed, 4, true);
            let (opt_cover, cover_cost) = exact_min_cover(&inst).unwrap();
            let (out, trace) = repair(&opt_cover, &inst).unwrap();
            prop_assert!(check_fas_feasible(&out, &inst).unwrap().is_empty());
            let out_cost = cost(&out, &inst).unwrap();
            prop_assert_eq!(out_cost.variable_cost, cover_cost.into());
            assert_trace_invariants(&trace);

            let ext = exact_min_extension(&inst).unwrap();
            let total = out_cost.total_cost.as_fixed().unwrap();
            prop_assert_eq!(total, ext.best_total_cost);
        }
    }

    #[test]
    fn pipeline_solves_the_doc_example() {
        let inst = k3();
        let (perm, report) = solve_pipeline(&inst, None).unwrap();
        assert_eq!(perm.len(), 3);
        assert_eq!(
            report.total_cost,
            CostValue::from(Cost::from_units(4_000_000_000))
        );
        assert_eq!(report.variable_cost, report.total_cost);
        assert_eq!(report.fixed_cost, Cost::ZERO);
        assert_eq!(report.instance_digest, inst.digest());
        assert_eq!(report.alpha_guarantee, 3);
        // The unrepaired covering takes all six arcs: three contradicting
        // pairs, resolved by the initial minimalization in one record.
        assert_eq!(report.contradicting_initial, 3);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.iterations, report.trace.iterations.len() as u64);
        assert!(report.lower_bound.is_none());
        assert!(report.ratio_vs_bound.is_none());
        // The reported order really is an order of the reported cost.
        let delta = delta_from_permutation(&perm, &inst).unwrap();
        assert_eq!(cost(&delta, &inst).unwrap().total_cost, report.total_cost);
    }

    #[test]
    fn pipeline_on_total_order_is_the_unique_extension() {
        let inst =
            from_int_matrix(3, &[&[0, 1, 2], &[2, 0, 1], &[1, 2, 0]], &[(0, 1), (1, 2)]);
        let (perm, report) = solve_pipeline(&inst, None).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert!(report.variable_cost.is_zero());
        assert_eq!(report.total_cost, CostValue::from(report.fixed_cost));
        assert_eq!(report.iterations, 0);
        assert_eq!(report.contradicting_initial, 0);
    }

    #[test]
    fn pipeline_bound_certifies_the_ratio() {
        let inst = k3();
        let eps = BigRational::new(1.into(), 20.into());
        let (_, report) = solve_pipeline(&inst, Some(&eps)).unwrap();
        let lower = report.lower_bound.expect("bound requested");
        assert!(!lower.is_zero());
        let ratio = report.ratio_vs_bound.expect("positive bound");
        assert!(ratio >= BigRational::from_integer(1.into()));
        // variable ≤ 3·(1+eps)·lower holds with room on this instance.
        let guard = BigRational::from_integer(3.into())
            * (BigRational::from_integer(1.into()) + &eps)
            * lower.units_rational();
        assert!(report.variable_cost.units_rational() <= guard);
    }

    #[test]
    fn pipeline_rejects_non_hemimetric_instances() {
        let inst = crate::gen::bundled_instance("appendix_a").unwrap();
        assert!(matches!(
            solve_pipeline(&inst, None),
            Err(RepairError::NotHemimetric { .. })
        ));
    }
}
