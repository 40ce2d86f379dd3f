//! Gaussian mixture with one full covariance matrix shared by all
//! components, fitted by expectation-maximization.

use std::f64::consts::PI;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel<const D: usize> {
    pub n_components: usize,
    pub mixture_coeffs: Vec<f64>,
    pub means: Vec<[f64; D]>,
    pub covariance: [[f64; D]; D],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit<const D: usize> {
    pub model: GmmModel<D>,
    pub labels: Vec<usize>,
    /// Log-likelihood before each M-step, plus the final evaluation.
    pub log_likelihood_trace: Vec<f64>,
    pub converged: bool,
}

impl<const D: usize> GmmFit<D> {
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood_trace.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Lower-triangular Cholesky factor; `None` if not positive definite.
pub(crate) fn cholesky<const D: usize>(a: &[[f64; D]; D]) -> Option<[[f64; D]; D]> {
    let mut l = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = x` by forward substitution, so that
/// `x^T (L L^T)^{-1} x = |y|^2`.
fn whiten<const D: usize>(l: &[[f64; D]; D], x: &[f64; D]) -> [f64; D] {
    let mut y = [0.0; D];
    for i in 0..D {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (x[i] - s) / l[i][i];
    }
    y
}

// exp() of anything below this is exactly zero in f64.
const EXP_UNDERFLOW: f64 = -746.0;

struct EStep {
    resp: Vec<f64>,
    log_likelihood: f64,
}

impl<const D: usize> GmmModel<D> {
    fn e_step(&self, points: &[[f64; D]]) -> Result<EStep> {
        let k = self.n_components;
        let l = cholesky(&self.covariance)
            .ok_or_else(|| Error::Internal("covariance lost positive definiteness".into()))?;
        let log_det: f64 = 2.0 * (0..D).map(|i| l[i][i].ln()).sum::<f64>();
        let log_norm = -0.5 * (D as f64 * (2.0 * PI).ln() + log_det);
        let log_pi: Vec<f64> = self.mixture_coeffs.iter().map(|p| p.ln()).collect();

        // Whitening is linear, so differences of whitened vectors are
        // whitened differences.
        let means: Vec<[f64; D]> = self.means.iter().map(|m| whiten(&l, m)).collect();
        let mut resp = vec![0.0; points.len() * k];
        let mut ll = 0.0;
        for (i, x) in points.iter().enumerate() {
            let y = whiten(&l, x);
            let row = &mut resp[i * k..(i + 1) * k];
            let mut max = f64::NEG_INFINITY;
            for c in 0..k {
                row[c] = log_pi[c] + log_norm - 0.5 * super::sq_dist(&y, &means[c]);
                max = max.max(row[c]);
            }
            let mut sum = 0.0;
            for r in row.iter_mut() {
                let shifted = *r - max;
                *r = if shifted < EXP_UNDERFLOW { 0.0 } else { shifted.exp() };
                sum += *r;
            }
            for r in row.iter_mut() {
                *r /= sum;
            }
            ll += max + sum.ln();
        }
        Ok(EStep {
            resp,
            log_likelihood: ll,
        })
    }

    fn m_step(&mut self, points: &[[f64; D]], resp: &[f64], reg: f64) {
        let k = self.n_components;
        let n = points.len() as f64;
        for c in 0..k {
            let nk: f64 = (0..points.len()).map(|i| resp[i * k + c]).sum();
            self.mixture_coeffs[c] = nk / n;
            if nk > 0.0 {
                let mut mean = [0.0; D];
                for (i, x) in points.iter().enumerate() {
                    let r = resp[i * k + c];
                    for d in 0..D {
                        mean[d] += r * x[d];
                    }
                }
                self.means[c] = mean.map(|m| m / nk);
            }
        }
        let total: f64 = self.mixture_coeffs.iter().sum();
        for p in &mut self.mixture_coeffs {
            *p /= total;
        }

        let mut cov = [[0.0; D]; D];
        for (i, x) in points.iter().enumerate() {
            for c in 0..k {
                let r = resp[i * k + c];
                if r == 0.0 {
                    continue;
                }
                let diff: [f64; D] = std::array::from_fn(|d| x[d] - self.means[c][d]);
                for a in 0..D {
                    for b in 0..=a {
                        cov[a][b] += r * diff[a] * diff[b];
                    }
                }
            }
        }
        for a in 0..D {
            for b in 0..=a {
                cov[a][b] /= n;
                cov[b][a] = cov[a][b];
            }
            cov[a][a] += reg;
        }
        self.covariance = cov;
    }

    /// Density of `x` under the mixture.
    pub fn log_density(&self, x: &[f64; D]) -> Result<f64> {
        Ok(self.e_step(std::slice::from_ref(x))?.log_likelihood)
    }
}

/// Fits `n_components` by EM. Means start at distinct random points, the
/// covariance at the sample covariance. Iterates until the log-likelihood
/// gains less than `tol` or `max_iter` M-steps have run; `reg` is added to
/// the covariance diagonal after every M-step.
pub fn gmm_fit<const D: usize>(
    points: &[[f64; D]],
    n_components: usize,
    max_iter: usize,
    tol: f64,
    reg: f64,
    rng: &mut RngStream,
) -> Result<GmmFit<D>> {
    let n = points.len();
    if n_components == 0 || n_components > n {
        return Err(Error::config(format!(
            "GMM needs 1 <= components <= {n} points, got {n_components}"
        )));
    }
    let k = n_components;
    let mut model = GmmModel {
        n_components: k,
        mixture_coeffs: vec![1.0 / k as f64; k],
        means: sample(rng, n, k).iter().map(|i| points[i]).collect(),
        covariance: sample_covariance(points, reg),
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iter = 0;
    let estep = loop {
        let e = model.e_step(points)?;
        if let Some(&prev) = trace.last() {
            if e.log_likelihood - prev < tol {
                converged = true;
            }
        }
        trace.push(e.log_likelihood);
        if converged || iter == max_iter {
            break e;
        }
        model.m_step(points, &e.resp, reg);
        iter += 1;
    };

    let labels = (0..n)
        .map(|i| {
            let row = &estep.resp[i * k..(i + 1) * k];
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect();

    Ok(GmmFit {
        model,
        labels,
        log_likelihood_trace: trace,
        converged,
    })
}

fn sample_covariance<const D: usize>(points: &[[f64; D]], reg: f64) -> [[f64; D]; D] {
    let n = points.len() as f64;
    let mean: [f64; D] = std::array::from_fn(|d| points.iter().map(|p| p[d]).sum::<f64>() / n);
    let mut cov = [[0.0; D]; D];
    for p in points {
        for a in 0..D {
            for b in 0..D {
                cov[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]);
            }
        }
    }
    for a in 0..D {
        for b in 0..D {
            cov[a][b] /= n;
        }
        cov[a][a] += reg;
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn single_component_is_sample_statistics() {
        let pts = [[1.0, 0.0, 2.0], [3.0, 1.0, 0.0], [2.0, 5.0, 1.0], [0.0, 2.0, 3.0]];
        let fit = gmm_fit(&pts, 1, 200, 1e-6, 1e-6, &mut RngStream::new(0)).unwrap();
        assert_eq!(fit.model.mixture_coeffs, vec![1.0]);
        assert_relative_eq!(fit.model.means[0][0], 1.5, max_relative = 1e-12);
        assert_relative_eq!(fit.model.means[0][1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(fit.model.means[0][2], 1.5, max_relative = 1e-12);
        assert_eq!(fit.labels, vec![0; 4]);
        assert!(fit.converged);
    }

    #[test]
    fn separated_blobs_recovered() {
        let mut rng = RngStream::new(17);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for blob in 0..2 {
            let center = if blob == 0 { -8.0 } else { 8.0 };
            for _ in 0..20 {
                pts.push(std::array::from_fn::<f64, 3, _>(|_| center + noise.sample(&mut rng)));
                truth.push(blob);
            }
        }
        let fit = gmm_fit(&pts, 2, 200, 1e-6, 1e-6, &mut RngStream::new(2)).unwrap();
        let agree = fit.labels.iter().zip(&truth).filter(|(a, b)| a == b).count();
        let matched = agree.max(40 - agree);
        assert!(matched >= 38, "{matched}/40");
    }

    #[test]
    fn coefficients_normalized_and_covariance_spd() {
        let mut rng = RngStream::new(5);
        let pts: Vec<[f64; 3]> = (0..80)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        for k in 1..6 {
            let fit = gmm_fit(&pts, k, 200, 1e-6, 1e-6, &mut RngStream::new(k as u64)).unwrap();
            let sum: f64 = fit.model.mixture_coeffs.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9);
            assert!(fit.model.mixture_coeffs.iter().all(|p| (0.0..=1.0).contains(p)));
            let c = fit.model.covariance;
            for a in 0..3 {
                for b in 0..3 {
                    assert_eq!(c[a][b], c[b][a]);
                }
            }
            assert!(cholesky(&c).is_some());
        }
    }

    #[test]
    fn degenerate_points_survive_via_regularization() {
        let pts = [[0.0, 0.0, 0.0]; 10];
        let fit = gmm_fit(&pts, 3, 50, 1e-6, 1e-6, &mut RngStream::new(1)).unwrap();
        assert!(fit.log_likelihood().is_finite());
        assert!(fit.model.covariance[0][0] >= 1e-6);
    }

    #[test]
    fn too_many_components_is_config_error() {
        let pts = [[0.0, 1.0, 2.0]];
        assert!(matches!(
            gmm_fit(&pts, 2, 10, 1e-6, 1e-6, &mut RngStream::new(0)),
            Err(Error::Config(_))
        ));
    }
}
