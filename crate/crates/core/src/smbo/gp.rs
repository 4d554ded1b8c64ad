//! Gaussian-process surrogate with an isotropic Matérn-5/2 kernel, fitted
//! to standardised losses, and the expected-improvement acquisition.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const LENGTHSCALE_GRID: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];
pub const NOISE_GRID: [f64; 4] = [1e-6, 1e-4, 1e-2, 1e-1];
pub const BASE_JITTER: f64 = 1e-10;
const MAX_JITTER: f64 = 1e-4;

pub fn matern52(r: f64, lengthscale: f64) -> f64 {
    let s = 5f64.sqrt() * r / lengthscale;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone)]
pub struct GpSurrogate {
    points: Vec<Vec<f64>>,
    pub lengthscale: f64,
    pub noise_var: f64,
    /// Diagonal jitter that made the factorisation succeed.
    pub jitter: f64,
    pub y_mean: f64,
    pub y_std: f64,
    pub log_marginal_likelihood: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

impl GpSurrogate {
    /// Fits on `(point, loss)` pairs, picking lengthscale and noise by
    /// exact log marginal likelihood over [`LENGTHSCALE_GRID`] x
    /// [`NOISE_GRID`]. Grid ties keep the earlier candidate.
    pub fn fit(points: &[Vec<f64>], losses: &[f64]) -> Result<Self> {
        let mut best: Option<Self> = None;
        for &l in &LENGTHSCALE_GRID {
            for &noise in &NOISE_GRID {
                let gp = Self::fit_with(points, losses, l, noise)?;
                if best
                    .as_ref()
                    .is_none_or(|b| gp.log_marginal_likelihood > b.log_marginal_likelihood)
                {
                    best = Some(gp);
                }
            }
        }
        Ok(best.expect("non-empty grid"))
    }

    /// Fits with fixed kernel hyperparameters.
    pub fn fit_with(points: &[Vec<f64>], losses: &[f64], lengthscale: f64, noise_var: f64) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::argument("GP fit needs at least two observations"));
        }
        if losses.len() != n {
            return Err(Error::argument("one loss per point required"));
        }
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::numeric("GP fit on non-finite loss"));
        }
        let y_mean = losses.iter().sum::<f64>() / n as f64;
        let var = losses.iter().map(|l| (l - y_mean) * (l - y_mean)).sum::<f64>() / n as f64;
        let y_std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let y = DVector::from_iterator(n, losses.iter().map(|l| (l - y_mean) / y_std));

        let kernel = DMatrix::from_fn(n, n, |i, j| matern52(sq_dist(&points[i], &points[j]).sqrt(), lengthscale));
        let mut jitter = BASE_JITTER;
        let chol = loop {
            let mut k = kernel.clone();
            for i in 0..n {
                k[(i, i)] += noise_var + jitter;
            }
            if let Some(c) = Cholesky::new(k) {
                break c;
            }
            jitter *= 10.0;
            if jitter > MAX_JITTER * (1.0 + 1e-9) {
                return Err(Error::numeric("kernel matrix is not positive definite after jitter"));
            }
        };
        let alpha = chol.solve(&y);
        let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let log_marginal_likelihood =
            -0.5 * y.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        Ok(Self {
            points: points.to_vec(),
            lengthscale,
            noise_var,
            jitter,
            y_mean,
            y_std,
            log_marginal_likelihood,
            chol,
            alpha,
        })
    }

    /// Posterior mean and variance of the latent function in standardised
    /// units; prior variance is 1.
    pub fn predict_standardized(&self, point: &[f64]) -> (f64, f64) {
        let n = self.points.len();
        let k_star = DVector::from_iterator(
            n,
            self.points
                .iter()
                .map(|p| matern52(sq_dist(p, point).sqrt(), self.lengthscale)),
        );
        let mean = k_star.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k_star)
            .expect("factor has a positive diagonal");
        let var = (1.0 - v.dot(&v)).max(0.0);
        (mean, var)
    }

    /// Posterior mean and variance on the loss scale.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        let (m, v) = self.predict_standardized(point);
        (self.y_mean + self.y_std * m, v * self.y_std * self.y_std)
    }

    pub fn expected_improvement(&self, point: &[f64], best_loss: f64) -> f64 {
        let (mean, var) = self.predict(point);
        expected_improvement(mean, var.sqrt(), best_loss)
    }
}

pub fn gp_fit(points: &[Vec<f64>], losses: &[f64]) -> Result<GpSurrogate> {
    GpSurrogate::fit(points, losses)
}

pub fn gp_predict(gp: &GpSurrogate, point: &[f64]) -> (f64, f64) {
    gp.predict(point)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected improvement below `best` of a normal with `mean`, `std`.
pub fn expected_improvement(mean: f64, std: f64, best: f64) -> f64 {
    let diff = best - mean;
    if !(std > 0.0) {
        return diff.max(0.0);
    }
    let z = diff / std;
    (diff * std_normal_cdf(z) + std * std_normal_pdf(z)).max(0.0)
}
