//! Shared helpers for the unit and integration tests.

use crate::instance::{Instance, Poset, WEIGHT_SCALE};

/// Builds an instance from whole-unit weights given as rows.
pub(crate) fn from_int_matrix(n: usize, rows: &[&[i64]], prec: &[(u32, u32)]) -> Instance {
    assert_eq!(rows.len(), n);
    let mut w = vec![0i64; n * n];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n);
        for (j, &v) in row.iter().enumerate() {
            w[i * n + j] = v * WEIGHT_SCALE;
        }
    }
    Instance::new(n, w, Poset::from_pairs(n, prec).unwrap()).unwrap()
}

/// The three-vertex demonstration instance used across the test suite:
/// w(0,1)=1, w(1,0)=2, w(1,2)=1, w(2,1)=2, w(0,2)=2, w(2,0)=1.
/// Its optimal total order costs 4.
pub(crate) fn k3() -> Instance {
    from_int_matrix(3, &[&[0, 1, 2], &[2, 0, 1], &[1, 2, 0]], &[])
}

/// Seeded random instance: a poset sampled over a shuffled label order and
/// whole-unit weights in 0..=5; with `hemimetric` the weight matrix is
/// closed under min-plus so every triangle inequality holds.
pub(crate) fn random_instance(seed: u64, n: usize, hemimetric: bool) -> Instance {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut base: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        base.swap(i, j);
    }
    let mut pairs = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            if rng.gen_bool(0.3) {
                pairs.push((base[p], base[q]));
            }
        }
    }
    let poset = Poset::from_pairs(n, &pairs).unwrap();
    let mut w = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = rng.gen_range(0..=5) * WEIGHT_SCALE;
            }
        }
    }
    if hemimetric {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if i != j && i != k && j != k {
                        w[i * n + j] = w[i * n + j].min(w[i * n + k] + w[k * n + j]);
                    }
                }
            }
        }
    }
    Instance::new(n, w, poset).unwrap()
}
