//! Seeded, reproducible instance generation: hemimetric weights via min-plus
//! closure, interval weights that satisfy k-gonal inequalities, complementary
//! pair weights, random posets, two bundled demonstration instances, and a
//! randomized search for solutions that separate the pairwise-only constraint
//! system from the full witnessed one.

use crate::instance::{Instance, Poset, Weight, MAX_VERTICES, WEIGHT_SCALE};
use crate::oracle::{exact_min_extension, min_cover_dfs};
use crate::solution::{check_cover_feasible, check_fas_feasible, cost, CostValue, Solution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// Largest vertex count accepted by [`search_cycle_witness`]; each attempt
/// solves an exact covering problem, which is only practical on tiny
/// instances.
pub const WITNESS_GUARD: usize = 6;

/// Incomparable-arc cap per witness-search attempt; denser posets are
/// skipped rather than fed to the exhaustive cover search.
const WITNESS_ARC_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("vertex count {n} out of range 1..={max}")]
    BadCount { n: usize, max: usize },
    #[error("poset density {num}/{den} is not a rational in [0, 1]")]
    BadDensity { num: u32, den: u32 },
    #[error("weight range is empty: lo exceeds hi")]
    BadRange,
    #[error("interval generation needs k >= 3, got {k}")]
    BadK { k: u32 },
    #[error("unknown bundled name {name:?}")]
    UnknownName { name: String },
    #[error("witness search supports at most {cap} vertices, got {n}")]
    GuardExceeded { n: usize, cap: usize },
}

/// Which weight family a spec generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// Uniform weights pushed through a min-plus closure; always passes
    /// the triangle-inequality check.
    HemimetricClosure,
    /// Uniform weights in [1, k−1] natural units; always k-gonal.
    IntervalKgonal,
    /// Complementary pair weights: w(i,j) + w(j,i) = 1 in natural units.
    ProbabilityLike,
}

/// Parameters for the seeded generators. Constructed via [`GenSpec::new`],
/// which checks that the density is a rational in [0, 1] and that the
/// weight range is nonempty. Every generator is a pure function of a spec,
/// so equal specs produce bit-identical instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    n: usize,
    seed: u64,
    poset_density: (u32, u32),
    weight_range: (Weight, Weight),
    mode: GenMode,
}

impl GenSpec {
    pub fn new(
        n: usize,
        seed: u64,
        poset_density: (u32, u32),
        weight_range: (Weight, Weight),
        mode: GenMode,
    ) -> Result<GenSpec, GenError> {
        if n == 0 || n > MAX_VERTICES {
            return Err(GenError::BadCount {
                n,
                max: MAX_VERTICES,
            });
        }
        let (num, den) = poset_density;
        if den == 0 || num > den {
            return Err(GenError::BadDensity { num, den });
        }
        if weight_range.0 > weight_range.1 {
            return Err(GenError::BadRange);
        }
        Ok(GenSpec {
            n,
            seed,
            poset_density,
            weight_range,
            mode,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn poset_density(&self) -> (u32, u32) {
        self.poset_density
    }

    pub fn weight_range(&self) -> (Weight, Weight) {
        self.weight_range
    }

    pub fn mode(&self) -> GenMode {
        self.mode
    }
}

/// Draws a strict poset: vertices are shuffled into a hidden topological
/// order, then each forward pair is kept with probability `density`; the
/// result is transitively closed. Density 0 gives the empty poset, density
/// 1 a total order.
fn poset_from_rng(rng: &mut ChaCha12Rng, n: usize, density: (u32, u32)) -> Poset {
    let mut labels: Vec<u32> = (0..n as u32).collect();
    labels.shuffle(rng);
    let mut pairs = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            if rng.gen_ratio(density.0, density.1) {
                pairs.push((labels[p], labels[q]));
            }
        }
    }
    Poset::from_pairs(n, &pairs).expect("pairs respect a fixed topological order")
}

fn uniform_weights(rng: &mut ChaCha12Rng, n: usize, lo: i64, hi: i64) -> Vec<i64> {
    let mut w = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = rng.gen_range(lo..=hi);
            }
        }
    }
    w
}

/// All-pairs min-plus closure over the complete digraph: afterwards
/// w(i,j) ≤ w(i,k) + w(k,j) for all distinct triples. Entries only
/// decrease, so the result stays within i64.
fn min_plus_closure(n: usize, w: &mut [i64]) {
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let wik = i128::from(w[i * n + k]);
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let through = wik + i128::from(w[k * n + j]);
                if through < i128::from(w[i * n + j]) {
                    w[i * n + j] = through as i64;
                }
            }
        }
    }
}

/// Random poset per the spec's density; pure function of the spec.
pub fn gen_poset(spec: &GenSpec) -> Poset {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    poset_from_rng(&mut rng, spec.n, spec.poset_density)
}

/// Random instance whose weights always satisfy the triangle inequality:
/// independent uniform draws from the spec's range, then min-plus closure.
/// The poset matches [`gen_poset`] of the same spec.
pub fn gen_hemimetric(spec: &GenSpec) -> Instance {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let poset = poset_from_rng(&mut rng, spec.n, spec.poset_density);
    let (lo, hi) = spec.weight_range;
    let mut w = uniform_weights(&mut rng, spec.n, lo.units(), hi.units());
    min_plus_closure(spec.n, &mut w);
    Instance::new(spec.n, w, poset).expect("closure keeps weights nonnegative")
}

/// Random instance with weights uniform in [1, k−1] natural units. Any such
/// matrix satisfies every k-gonal inequality: a direct weight is at most
/// k−1 while a (k−1)-step path costs at least k−1.
pub fn gen_interval_kgonal(spec: &GenSpec, k: u32) -> Result<Instance, GenError> {
    if k < 3 {
        return Err(GenError::BadK { k });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let poset = poset_from_rng(&mut rng, spec.n, spec.poset_density);
    let lo = WEIGHT_SCALE;
    let hi = i64::from(k - 1) * WEIGHT_SCALE;
    let w = uniform_weights(&mut rng, spec.n, lo, hi);
    Ok(Instance::new(spec.n, w, poset).expect("interval weights are nonnegative"))
}

/// Random instance with complementary pair weights: for each unordered pair,
/// w(i,j) is uniform in [0, 1] natural units and w(j,i) = 1 − w(i,j).
pub fn gen_probability_like(spec: &GenSpec) -> Instance {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let poset = poset_from_rng(&mut rng, spec.n, spec.poset_density);
    let n = spec.n;
    let mut w = vec![0i64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let u = rng.gen_range(0..=WEIGHT_SCALE);
            w[i * n + j] = u;
            w[j * n + i] = WEIGHT_SCALE - u;
        }
    }
    Instance::new(n, w, poset).expect("complementary weights are nonnegative")
}

/// Zero-weight arcs of the bundled 8-vertex demo; the reverse of each costs
/// 1 natural unit. Together with [`DEMO_ONE_ARCS`] and [`DEMO_HALF_PAIRS`]
/// this covers all 28 vertex pairs exactly once.
const DEMO_ZERO_ARCS: [(u32, u32); 21] = [
    (0, 1),
    (0, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 6),
    (3, 7),
    (4, 6),
    (4, 7),
    (5, 6),
    (5, 7),
    (6, 0),
    (7, 0),
    (1, 2),
    (3, 4),
    (3, 5),
    (4, 5),
    (6, 7),
];

/// Weight-1 arcs of the demo; the reverse of each costs 0.
const DEMO_ONE_ARCS: [(u32, u32); 4] = [(1, 6), (1, 7), (2, 6), (2, 7)];

/// Pairs weighing 0.5 in both directions.
const DEMO_HALF_PAIRS: [(u32, u32); 3] = [(0, 3), (0, 4), (0, 5)];

fn appendix_a() -> Instance {
    let n = 8;
    let one = WEIGHT_SCALE;
    let half = WEIGHT_SCALE / 2;
    let mut w = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = one;
            }
        }
    }
    for &(i, j) in &DEMO_ZERO_ARCS {
        w[i as usize * n + j as usize] = 0;
    }
    for &(i, j) in &DEMO_ONE_ARCS {
        w[j as usize * n + i as usize] = 0;
    }
    for &(i, j) in &DEMO_HALF_PAIRS {
        w[i as usize * n + j as usize] = half;
        w[j as usize * n + i as usize] = half;
    }
    Instance::new(n, w, Poset::new(n)).expect("demo weights are nonnegative")
}

fn k3_demo() -> Instance {
    let s = WEIGHT_SCALE;
    let w = vec![0, s, 2 * s, 2 * s, 0, s, s, 2 * s, 0];
    Instance::new(3, w, Poset::new(3)).expect("demo weights are nonnegative")
}

/// Embedded instances: `appendix_a` is an 8-vertex, empty-poset instance
/// whose weights satisfy w(i,j) + w(j,i) = 1 on every pair; its cheapest
/// order costs 7.5 while [`bundled_solution`]'s `fig5_cover` certifies a
/// feasible covering of value 7. `k3_demo` is the 3-vertex example used
/// across this crate's docs, with optimum 4.
pub fn bundled_instance(name: &str) -> Result<Instance, GenError> {
    match name {
        "appendix_a" => Ok(appendix_a()),
        "k3_demo" => Ok(k3_demo()),
        _ => Err(GenError::UnknownName {
            name: name.to_string(),
        }),
    }
}

/// Embedded solutions, paired with the instance they belong to:
/// `fig5_cover` is a 35-arc integral cover of `appendix_a` — every
/// zero-weight arc plus both orientations of the remaining seven special
/// pairs — with variable cost exactly 7.
pub fn bundled_solution(name: &str) -> Result<(Instance, Solution), GenError> {
    match name {
        "fig5_cover" => {
            let inst = appendix_a();
            let mut arcs: Vec<(u32, u32)> = DEMO_ZERO_ARCS.to_vec();
            for &(i, j) in DEMO_ONE_ARCS.iter().chain(&DEMO_HALF_PAIRS) {
                arcs.push((i, j));
                arcs.push((j, i));
            }
            let delta =
                Solution::from_arcs(&inst, arcs).expect("the poset is empty, every arc is free");
            Ok((inst, delta))
        }
        _ => Err(GenError::UnknownName {
            name: name.to_string(),
        }),
    }
}

/// The pairwise-plus-triangle constraints that ignore the fixed pairs
/// entirely: one constraint per incomparable pair and two per vertex triple
/// whose three pairs are all incomparable. Arc ids index into `inc`.
fn restricted_constraints(n: usize, inc: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let mut arc_id = vec![u32::MAX; n * n];
    for (a, &(i, j)) in inc.iter().enumerate() {
        arc_id[i as usize * n + j as usize] = a as u32;
    }
    let id = |i: u32, j: u32| arc_id[i as usize * n + j as usize];
    let mut cons = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if id(i, j) != u32::MAX {
                cons.push(vec![id(i, j), id(j, i)]);
            }
        }
    }
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if id(a, b) == u32::MAX {
                continue;
            }
            for c in b + 1..n as u32 {
                if id(b, c) == u32::MAX || id(a, c) == u32::MAX {
                    continue;
                }
                cons.push(vec![id(a, b), id(b, c), id(c, a)]);
                cons.push(vec![id(a, c), id(c, b), id(b, a)]);
            }
        }
    }
    cons
}

/// Hard checks on a found witness: it is not an order, it beats the best
/// order, and the full constraint system rejects it (so the separation is
/// due to the witnessed constraints the restricted system lacks).
fn confirm_witness(inst: &Instance, delta: &Solution, opt_total: crate::instance::Cost) {
    let cyclic = !check_fas_feasible(delta, inst)
        .expect("witness candidates are integral")
        .is_empty();
    assert!(cyclic, "witness must not be an order");
    let breakdown = cost(delta, inst).expect("witness dimensions match");
    assert!(
        breakdown.total_cost < CostValue::from(opt_total),
        "witness must cost strictly less than the best order"
    );
    let rejected = !check_cover_feasible(delta, inst)
        .expect("witness dimensions match")
        .is_empty();
    assert!(rejected, "witness must violate a witnessed constraint");
}

/// Looks for an integral solution that satisfies every restricted constraint
/// yet costs strictly less than the best order. On template attempts the
/// doubled-diagonal shape is tried before the exhaustive search so that
/// found witnesses keep the canonical form when possible.
fn witness_on(inst: &Instance, inc: &[(u32, u32)], template: bool) -> Option<Solution> {
    let n = inst.n();
    let opt = exact_min_extension(inst).expect("witness search stays under the oracle guard");
    let opt_var = opt.best_total_cost.units() - inst.fixed_cost().units();
    let cons = restricted_constraints(n, inc);
    if cons.is_empty() {
        return None;
    }

    let finish = |arcs: Vec<(u32, u32)>| {
        let delta = Solution::from_arcs(inst, arcs).expect("witness arcs are incomparable");
        confirm_witness(inst, &delta, opt.best_total_cost);
        Some(delta)
    };

    if template {
        // Fixed-arc four-cycle closed by (1,2) and (3,0), with both
        // diagonals set in both directions.
        let shape = [(1, 2), (3, 0), (0, 2), (2, 0), (1, 3), (3, 1)];
        let var: i128 = shape.iter().map(|&(i, j)| i128::from(inst.w_units(i, j))).sum();
        let covered = cons.iter().all(|con| {
            con.iter()
                .any(|&a| shape.contains(&(inc[a as usize].0, inc[a as usize].1)))
        });
        if covered && var < opt_var {
            return finish(shape.to_vec());
        }
    }

    let mut arc_cons: Vec<Vec<u32>> = vec![Vec::new(); inc.len()];
    for (ci, con) in cons.iter().enumerate() {
        for &a in con {
            arc_cons[a as usize].push(ci as u32);
        }
    }
    let cons_len: Vec<u32> = cons.iter().map(|c| c.len() as u32).collect();
    let weights: Vec<i64> = inc.iter().map(|&(i, j)| inst.w_units(i, j)).collect();
    let (chosen, best) = min_cover_dfs(&weights, &arc_cons, &cons_len);
    if best >= opt_var {
        return None;
    }
    for con in &cons {
        debug_assert!(con.iter().any(|&a| chosen[a as usize]));
    }
    let arcs: Vec<(u32, u32)> = inc
        .iter()
        .zip(&chosen)
        .filter(|&(_, &c)| c)
        .map(|(&a, _)| a)
        .collect();
    finish(arcs)
}

/// Randomized search for an instance with a nonempty poset together with an
/// integral solution that satisfies every pairwise and all-incomparable
/// triangle constraint yet costs strictly less than the cheapest linear
/// extension — direct evidence that those constraints alone are not enough
/// once fixed pairs exist, and that the witnessed constraints are load-
/// bearing. Even attempts use the two-chain poset {0<1, 2<3} and try the
/// doubled-diagonal shape first; odd attempts draw a random poset at the
/// spec's density. Weights are hemimetric draws from the spec's range.
/// Returns the first witness found within `budget` attempts, if any; the
/// result is a pure function of (spec, budget).
pub fn search_cycle_witness(
    spec: &GenSpec,
    budget: u64,
) -> Result<Option<(Instance, Solution)>, GenError> {
    let n = spec.n;
    if n > WITNESS_GUARD {
        return Err(GenError::GuardExceeded {
            n,
            cap: WITNESS_GUARD,
        });
    }
    let (lo, hi) = (spec.weight_range.0.units(), spec.weight_range.1.units());
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    for attempt in 0..budget {
        let template = attempt % 2 == 0 && n >= 4;
        let poset = if template {
            Poset::from_pairs(n, &[(0, 1), (2, 3)]).expect("two disjoint chains")
        } else {
            poset_from_rng(&mut rng, n, spec.poset_density)
        };
        if poset.strict_pair_count() == 0 {
            // Without fixed pairs the restricted system is the full system,
            // whose integral optimum is never below the best order here.
            continue;
        }
        let inc = poset.incomparable_pairs();
        if inc.is_empty() || inc.len() > WITNESS_ARC_CAP {
            continue;
        }
        let mut w = uniform_weights(&mut rng, n, lo, hi);
        min_plus_closure(n, &mut w);
        let inst = Instance::new(n, w, poset).expect("closure keeps weights nonnegative");
        if let Some(delta) = witness_on(&inst, &inc, template) {
            return Ok(Some((inst, delta)));
        }
    }
    Ok(None)
}
