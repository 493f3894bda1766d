//! Restarted GMRES with right preconditioning.

use crate::geometry::pairwise_sum;

#[derive(Clone, Copy, Debug)]
pub struct KrylovConfig {
    /// Stop once `‖b - A x‖ ≤ max(tolerance · ‖b‖, absolute_tolerance)`.
    pub tolerance: f64,
    pub absolute_tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            absolute_tolerance: 0.0,
            restart: 60,
            max_iterations: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖b - A x‖ / ‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_sum(&prods)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solves `A x = b` starting from `x0` (zero when `None`).
///
/// `apply` computes `A v`, `precondition` applies an approximate inverse `M^{-1} v`;
/// the iteration works on `A M^{-1} y = b` and returns `x = M^{-1} y`.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precondition: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    config: KrylovConfig,
) -> KrylovOutcome {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 {
        return KrylovOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let m = config.restart.max(1);
    // relative target, never tighter than the absolute floor
    let target = config.tolerance.max(config.absolute_tolerance / bnorm);
    let mut iterations = 0;
    let mut rel;

    loop {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= target || iterations >= config.max_iterations {
            break;
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            let z = precondition(&basis[k]);
            let mut w = apply(&z);
            // modified Gram-Schmidt, applied twice for stability
            for _ in 0..2 {
                for (j, vj) in basis.iter().enumerate() {
                    let h = dot(&w, vj);
                    hess[j][k] += h;
                    axpy(-h, vj, &mut w);
                }
            }
            let hnext = norm(&w);
            hess[k + 1][k] = hnext;
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = hess[k][k] / denom;
                sn[k] = hess[k + 1][k] / denom;
            }
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= target || iterations >= config.max_iterations || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = if hess[i][i] != 0.0 { s / hess[i][i] } else { 0.0 };
        }
        let mut update = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        let dx = precondition(&update);
        axpy(1.0, &dx, &mut x);
    }

    KrylovOutcome {
        converged: rel <= target,
        solution: x,
        iterations,
        relative_residual: rel,
    }
}
