#![allow(dead_code)]

use bolasso::lasso::LassoProblem;
use bolasso::numerics::Matrix;
use bolasso::rng::rng_from_seed;
use rand::Rng;
use rand_distr::StandardNormal;

/// Random regression problem with correlated columns: rows are `z·M` for a
/// random mixing matrix `M`, the response is a sparse linear signal plus noise.
pub fn random_instance(seed: u64) -> LassoProblem {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(20..=200);
    let p = rng.gen_range(2..=20.min(n));
    correlated_problem(&mut rng, n, p)
}

pub fn correlated_problem(rng: &mut impl Rng, n: usize, p: usize) -> LassoProblem {
    let mixing_strength: f64 = rng.gen_range(0.0..1.0);
    let mix = Matrix::from_fn(p, p, |i, j| {
        let g: f64 = rng.sample(StandardNormal);
        if i == j { 1.0 + g.abs() } else { mixing_strength * g }
    })
    .unwrap();
    let z = Matrix::from_fn(n, p, |_, _| rng.sample(StandardNormal)).unwrap();
    let x = z.matmul(&mix).unwrap();
    let w: Vec<f64> = (0..p)
        .map(|_| if rng.gen_bool(0.4) { rng.gen_range(-2.0..2.0) } else { 0.0 })
        .collect();
    let noise: f64 = rng.gen_range(0.05..1.0);
    let y = x
        .matvec(&w)
        .into_iter()
        .map(|v| v + noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    LassoProblem::new(x, y).unwrap()
}

/// 20 log-spaced values from `μ_max` down to `μ_max·1e-3`.
pub fn mu_grid(problem: &LassoProblem) -> Vec<f64> {
    bolasso::bolasso::log_grid(problem.mu_max(), 20, 1e-3).unwrap()
}

/// Design with `XᵀX/n = I`, by Gram-Schmidt on Gaussian columns.
pub fn orthonormal_problem(rng: &mut impl Rng, n: usize, p: usize) -> LassoProblem {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < p {
        let mut c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for q in &cols {
            let d: f64 = q.iter().zip(&c).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(q).for_each(|(ci, qi)| *ci -= d * qi);
        }
        let nc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        cols.push(c.iter().map(|v| v / nc).collect());
    }
    let s = (n as f64).sqrt();
    let x = Matrix::from_fn(n, p, |i, j| cols[j][i] * s).unwrap();
    let y = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    LassoProblem::new(x, y).unwrap()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn naive_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                m[r].iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `max_{j∉J} |Q_{jJ} Q_{JJ}⁻¹ sign(w_J)|` through an explicit inverse.
pub fn kappa_oracle(q: &Matrix, w: &[f64]) -> f64 {
    let j: Vec<usize> = (0..w.len()).filter(|&i| w[i] != 0.0).collect();
    let qjj: Vec<Vec<f64>> = j.iter().map(|&a| j.iter().map(|&b| q[(a, b)]).collect()).collect();
    let inv = naive_inverse(&qjj);
    let t: Vec<f64> = inv.iter().map(|row| row.iter().zip(&j).map(|(v, &b)| v * w[b].signum()).sum()).collect();
    (0..w.len())
        .filter(|i| !j.contains(i))
        .map(|i| j.iter().zip(&t).map(|(&a, ti)| q[(i, a)] * ti).sum::<f64>().abs())
        .fold(0.0, f64::max)
}
