use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::rng;

/// Window over which the eigenvalue estimate must be stable for a
/// non-converged run to be reported as a degenerate eigengap.
const STABILITY_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    pub tol: f64,
    /// `None` means `max(1000, ceil(10 n ln n))`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { tol: 1e-8, max_iter: None, seed: 0x5eed }
    }
}

impl SpectralOptions {
    pub fn with_tol(tol: f64) -> Self {
        SpectralOptions { tol, ..Default::default() }
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iter
            .unwrap_or_else(|| ((10.0 * n as f64 * (n as f64).ln()).ceil() as usize).max(1000))
    }
}

/// Second largest absolute eigenvalue of `A/d` and the Cheeger bracket it
/// implies for the conductance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    /// `(1 - lambda) / 2`
    pub phi_lower: f64,
    /// `sqrt(2 (1 - lambda))`. An upper bound on the conductance only when
    /// `lambda` is the second eigenvalue itself; on bipartite graphs
    /// (`lambda = 1` from the eigenvalue `-1`) it collapses to 0.
    pub phi_upper: f64,
    /// The estimate stabilized but the residual stayed above tolerance,
    /// which happens when the top two eigenvalues of `M^2` nearly coincide.
    pub degenerate: bool,
}

impl SpectralProfile {
    fn from_lambda(lambda: f64, residual: f64, iterations: usize, degenerate: bool) -> Self {
        let lambda = lambda.clamp(0.0, 1.0);
        SpectralProfile {
            lambda,
            residual,
            iterations,
            phi_lower: (1.0 - lambda) / 2.0,
            phi_upper: (2.0 * (1.0 - lambda)).sqrt(),
            degenerate,
        }
    }
}

/// `y = (A/d) x`
fn apply_scaled_adjacency(g: &Graph, x: &[f64], y: &mut [f64]) {
    let inv_d = 1.0 / g.d() as f64;
    for (u, out) in y.iter_mut().enumerate() {
        *out = g.neighbors(u).iter().map(|&v| x[v as usize]).sum::<f64>() * inv_d;
    }
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Computes `lambda_n = max(|lambda_2|, |lambda_min|)` of `M = A/d`.
///
/// Runs power iteration on `M^2` restricted to the complement of the
/// all-ones vector (re-projected every step), so a negative extreme
/// eigenvalue is found as readily as a positive one. The returned value is
/// the square root of the dominant deflated eigenvalue of `M^2`.
pub fn second_eigenvalue(g: &Graph, opts: &SpectralOptions) -> Result<SpectralProfile> {
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    g.require_connected()?;
    let n = g.n();
    let cap = opts.iteration_cap(n);

    let mut rng = rng::stream(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    remove_mean(&mut v);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::Internal("degenerate start vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut mid = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut history = Vec::with_capacity(cap.min(1 << 20));
    let mut residual = f64::INFINITY;
    let mut mu = 0.0;
    for iter in 1..=cap {
        apply_scaled_adjacency(g, &v, &mut mid);
        apply_scaled_adjacency(g, &mid, &mut w);
        remove_mean(&mut w);
        mu = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        residual = v.iter().zip(&w).map(|(a, b)| (b - mu * a).powi(2)).sum::<f64>().sqrt();
        history.push(mu);
        if residual <= opts.tol {
            return Ok(SpectralProfile::from_lambda(mu.max(0.0).sqrt(), residual, iter, false));
        }
        let nw = norm(&w);
        if nw == 0.0 {
            // M^2 vanishes on the deflated space
            return Ok(SpectralProfile::from_lambda(0.0, 0.0, iter, false));
        }
        v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / nw);
    }

    let stable = history.len() > STABILITY_WINDOW
        && (mu - history[history.len() - 1 - STABILITY_WINDOW]).abs() <= opts.tol;
    if stable {
        Ok(SpectralProfile::from_lambda(mu.max(0.0).sqrt(), residual, cap, true))
    } else {
        Err(Error::Spectral { estimate: mu.max(0.0).sqrt(), residual, iterations: cap })
    }
}

/// Like [`second_eigenvalue`] but accepts a non-converged run's best
/// estimate, marking it degenerate. Used where a prediction needs some
/// `lambda` rather than a certified one.
pub(crate) fn second_eigenvalue_lenient(g: &Graph, opts: &SpectralOptions) -> Result<SpectralProfile> {
    match second_eigenvalue(g, opts) {
        Err(Error::Spectral { estimate, residual, iterations }) => {
            Ok(SpectralProfile::from_lambda(estimate, residual, iterations, true))
        }
        other => other,
    }
}
