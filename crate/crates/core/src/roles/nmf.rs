//! Nonnegative matrix factorization `V ≈ G·F` by Lee–Seung multiplicative
//! updates on the squared Frobenius objective.

use ndarray::{Array2, ArrayView1, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Floor for update denominators.
const DENOM_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct NmfResult {
    /// `n × r`, one row per node.
    pub basis: Array2<f64>,
    /// `r × f`.
    pub coefficients: Array2<f64>,
    /// Objective before the first update, then after each iteration.
    pub objective_trace: Vec<f64>,
}

impl NmfResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial objective")
    }
}

pub fn frobenius_objective(v: &Array2<f64>, g: &Array2<f64>, f: &Array2<f64>) -> f64 {
    let approx = g.dot(f);
    Zip::from(v)
        .and(&approx)
        .fold(0.0, |acc, &a, &b| acc + (a - b) * (a - b))
}

/// Stable 64-bit FNV-1a over the row's bit patterns.
fn row_key(row: ArrayView1<f64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in row {
        for byte in x.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Factorizes `v` (nonnegative, `n × f`) at rank `rank`.
///
/// Initial entries are uniform on (0, scale] with `scale = sqrt(mean(V)/r)`.
/// Each row of `G` is drawn from a generator keyed by the seed and the row's
/// contents, so identical rows of `V` start, and therefore stay, identical.
/// Stops after `max_iters` iterations or once the relative objective change
/// drops below `tol`.
pub fn nmf(v: &Array2<f64>, rank: usize, max_iters: usize, tol: f64, seed: u64) -> Result<NmfResult> {
    let (n, f) = v.dim();
    if rank == 0 || rank > n.min(f) {
        return Err(Error::input(format!(
            "rank {rank} outside [1, {}] for a {n}x{f} matrix",
            n.min(f)
        )));
    }
    if v.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::input("nmf input must be finite and nonnegative"));
    }

    let mean = v.sum() / (n * f) as f64;
    let scale = if mean > 0.0 { (mean / rank as f64).sqrt() } else { 1.0 };
    let draw = |rng: &mut ChaCha8Rng| scale * (1.0 - rng.random::<f64>());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = Array2::from_shape_simple_fn((rank, f), || draw(&mut rng));
    let mut basis = Array2::zeros((n, rank));
    for (i, mut row) in basis.rows_mut().into_iter().enumerate() {
        let mut row_rng = ChaCha8Rng::seed_from_u64(seed ^ row_key(v.row(i)));
        row.mapv_inplace(|_| draw(&mut row_rng));
    }

    let mut trace = vec![frobenius_objective(v, &basis, &coef)];
    for _ in 0..max_iters {
        // F ← F ⊙ (GᵀV) / (GᵀG F)
        let num = basis.t().dot(v);
        let den = basis.t().dot(&basis).dot(&coef);
        Zip::from(&mut coef).and(&num).and(&den).for_each(|c, &a, &b| {
            *c *= a / b.max(DENOM_FLOOR);
        });
        // G ← G ⊙ (V Fᵀ) / (G F Fᵀ)
        let num = v.dot(&coef.t());
        let den = basis.dot(&coef.dot(&coef.t()));
        Zip::from(&mut basis).and(&num).and(&den).for_each(|g, &a, &b| {
            *g *= a / b.max(DENOM_FLOOR);
        });

        let prev = *trace.last().unwrap();
        let obj = frobenius_objective(v, &basis, &coef);
        trace.push(obj);
        if obj == 0.0 || (prev - obj).abs() / prev.max(f64::MIN_POSITIVE) < tol {
            break;
        }
    }

    Ok(NmfResult {
        basis,
        coefficients: coef,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn assert_monotone(trace: &[f64]) {
        for (i, w) in trace.windows(2).enumerate() {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9),
                "objective rose at iteration {i}: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn rank_one_exact() {
        let v = array![[1.0, 2.0], [2.0, 4.0]];
        let res = nmf(&v, 1, 5000, 0.0, 0).unwrap();
        assert!(res.objective() < 1e-6, "objective {}", res.objective());
        assert_monotone(&res.objective_trace);
    }

    #[test]
    fn identity_rank_three() {
        let v = Array2::eye(3);
        let res = nmf(&v, 3, 20_000, 0.0, 4).unwrap();
        assert!(res.objective() < 1e-4, "objective {}", res.objective());
    }

    #[test]
    fn random_problems_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..5 {
            let v = Array2::from_shape_simple_fn((12, 7), || rng.random::<f64>());
            let res = nmf(&v, 3, 300, 0.0, seed).unwrap();
            assert_monotone(&res.objective_trace);
            assert!(res.basis.iter().chain(res.coefficients.iter()).all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn rank_bounds() {
        let v = Array2::<f64>::ones((4, 2));
        assert!(nmf(&v, 0, 10, 1e-6, 0).is_err());
        assert!(nmf(&v, 3, 10, 1e-6, 0).is_err());
        assert!(nmf(&v, 2, 10, 1e-6, 0).is_ok());
        let neg = array![[1.0, -1.0], [0.0, 1.0]];
        assert!(nmf(&neg, 1, 10, 1e-6, 0).is_err());
    }

    #[test]
    fn tolerance_stops_early() {
        let v = array![[1.0, 2.0], [2.0, 4.0], [3.0, 1.0]];
        let res = nmf(&v, 1, 10_000, 1e-3, 1).unwrap();
        assert!(res.objective_trace.len() < 10_001);
    }

    #[test]
    fn identical_rows_identical_factors() {
        let v = array![[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.3, 0.5]];
        let res = nmf(&v, 2, 200, 0.0, 17).unwrap();
        assert_eq!(res.basis.row(1), res.basis.row(2));
    }
}
