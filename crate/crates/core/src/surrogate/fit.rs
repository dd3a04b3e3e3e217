//! Hyperparameter estimation by maximizing the log marginal likelihood.
//!
//! The expensive part of every likelihood evaluation is rebuilding the
//! structural Gram matrix, which for the sampled kernels means re-evaluating
//! base-kernel blocks between every pair of cached batches. Fitting is
//! therefore split into two levels: an outer sweep over a small set of
//! lengthscale candidates (each paying for one structural Gram, optionally on
//! row-subsampled batches), and an inner Nelder-Mead search over the cheap
//! amplitude and noise parameters, which only re-applies an entrywise map and
//! refactorizes. An optional refinement pass perturbs one lengthscale
//! component at a time around the best candidate.

use nalgebra::DVector;

use super::{AmpMap, SurrogateKind, SurrogateModel};
use crate::error::{Error, Result};
use crate::linalg::cholesky_with_jitter;
use crate::mmd::EstimatorConfig;

/// Knobs for `SurrogateModel::fit`. The freeze flags pin individual
/// parameter groups at their current values, which calibration tests use to
/// profile the likelihood over a single parameter.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Multipliers applied to the median-heuristic lengthscale to form the
    /// outer candidate set.
    pub lengthscale_multipliers: Vec<f64>,
    /// Passes of one-component lengthscale refinement around the best
    /// candidate.
    pub refine_rounds: usize,
    /// Likelihood evaluation budget for each inner search.
    pub inner_evals: usize,
    /// Row cap applied to cached batches while fitting the sampled kernels;
    /// zero keeps full batches. The final factorization always uses full
    /// batches.
    pub fit_subsample: usize,
    pub fit_lengthscales: bool,
    pub fit_amplitude: bool,
    pub fit_noise: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lengthscale_multipliers: vec![1.0, 0.5, 2.0, 0.25, 4.0],
            refine_rounds: 1,
            inner_evals: 60,
            fit_subsample: 32,
            fit_lengthscales: true,
            fit_amplitude: true,
            fit_noise: true,
        }
    }
}

/// Outcome of a fit, echoing the selected hyperparameters.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub log_marginal: f64,
    pub lengthscales: Vec<f64>,
    pub amplitude: f64,
    pub noise_var: f64,
    /// Number of likelihood evaluations spent, including rejected ones.
    pub evaluations: usize,
}

struct FitBounds {
    ls: (f64, f64),
    amp: (f64, f64),
    noise: (f64, f64),
}

struct Candidate {
    lml: f64,
    lengthscales: Vec<f64>,
    amp: f64,
    noise: f64,
}

impl SurrogateModel {
    /// Maximizes the log marginal likelihood over lengthscales, the
    /// amplitude parameter (`alpha` for divergence kernels, the output scale
    /// for expectation kernels) and the noise variance, subject to the
    /// freezes in `opts`. Ends with a full-batch factorization at the chosen
    /// values.
    pub fn fit(&mut self, opts: &FitOptions) -> Result<FitReport> {
        if self.n_train() == 0 {
            return Err(Error::EmptyObservations);
        }
        let bounds = self.fit_bounds();
        let sub = if self.subsampling_applies() {
            opts.fit_subsample
        } else {
            0
        };
        let y_var = variance(self.targets());
        let mut evaluations = 0usize;

        let init_ls: Vec<f64> = if opts.fit_lengthscales {
            let med = self.median_heuristic(sub).max(1e-12);
            let v = med.clamp(bounds.ls.0, bounds.ls.1);
            vec![v; self.base().lengthscales().len()]
        } else {
            self.base().lengthscales().to_vec()
        };
        let multipliers: Vec<f64> = if opts.fit_lengthscales {
            let mut ms = opts.lengthscale_multipliers.clone();
            if ms.is_empty() {
                ms.push(1.0);
            }
            ms
        } else {
            vec![1.0]
        };

        let mut tried: Vec<Vec<f64>> = Vec::new();
        let mut best: Option<Candidate> = None;
        for c in multipliers {
            let ls: Vec<f64> = init_ls
                .iter()
                .map(|v| (v * c).clamp(bounds.ls.0, bounds.ls.1))
                .collect();
            if tried.iter().any(|t| t == &ls) {
                continue;
            }
            tried.push(ls.clone());
            let cand = self.eval_candidate(&ls, sub, opts, &bounds, y_var, opts.inner_evals, &mut evaluations)?;
            if best.as_ref().map_or(true, |b| cand.lml > b.lml) {
                best = Some(cand);
            }
        }
        let mut best = best.expect("at least one candidate evaluated");

        if opts.fit_lengthscales {
            let refine_budget = (opts.inner_evals / 2).max(10);
            for _ in 0..opts.refine_rounds {
                let mut improved = false;
                for comp in 0..best.lengthscales.len() {
                    for factor in [0.5, 2.0] {
                        let mut ls = best.lengthscales.clone();
                        ls[comp] = (ls[comp] * factor).clamp(bounds.ls.0, bounds.ls.1);
                        if ls == best.lengthscales || tried.iter().any(|t| t == &ls) {
                            continue;
                        }
                        tried.push(ls.clone());
                        let cand = self.eval_candidate(
                            &ls,
                            sub,
                            opts,
                            &bounds,
                            y_var,
                            refine_budget,
                            &mut evaluations,
                        )?;
                        if cand.lml > best.lml + 1e-9 {
                            best = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }

        self.set_lengthscale_values(&best.lengthscales)?;
        self.set_amp_value(best.amp);
        self.set_noise_value(best.noise);

        // The final factorization uses full batches, whose Gram can differ
        // from the subsampled one used during the search; if it fails to
        // factorize, absorb the discrepancy into the noise term.
        let mut log_marginal = self.refresh();
        let mut escalations = 0;
        while log_marginal.is_err() && escalations < 3 {
            let bumped = (self.noise_var() * 10.0).min(bounds.noise.1);
            if bumped <= self.noise_var() {
                break;
            }
            log::warn!(
                "full-batch Gram failed to factorize; raising noise variance to {bumped:.3e}"
            );
            self.set_noise_value(bumped);
            log_marginal = self.refresh();
            escalations += 1;
        }
        let log_marginal = log_marginal?;

        Ok(FitReport {
            log_marginal,
            lengthscales: best.lengthscales,
            amplitude: best.amp,
            noise_var: self.noise_var(),
            evaluations,
        })
    }

    fn subsampling_applies(&self) -> bool {
        match self.kind() {
            SurrogateKind::Ugp { .. } => true,
            SurrogateKind::MmdGp => {
                matches!(self.estimator(), EstimatorConfig::Empirical { .. })
            }
            _ => false,
        }
    }

    fn fit_bounds(&self) -> FitBounds {
        let d = self.domain_diameter();
        FitBounds {
            ls: (1e-3 * d, 1e1 * d),
            amp: match self.amp_map() {
                AmpMap::ExpNegAlpha => (1e-2, 1e3),
                AmpMap::Scale => (1e-3, 1e3),
            },
            noise: (1e-6, 1.0),
        }
    }

    /// One outer candidate: build the structural Gram at `ls`, then search
    /// the unfrozen cheap parameters.
    #[allow(clippy::too_many_arguments)]
    fn eval_candidate(
        &self,
        ls: &[f64],
        sub: usize,
        opts: &FitOptions,
        bounds: &FitBounds,
        y_var: f64,
        budget: usize,
        evaluations: &mut usize,
    ) -> Result<Candidate> {
        let (pre, _) = self.pregram_at(ls, sub)?;
        let n = pre.mat.nrows();
        let yv = DVector::from_column_slice(self.targets());
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();

        let mut local_evals = 0usize;
        let mut neg_lml = |amp: f64, noise: f64| -> f64 {
            local_evals += 1;
            let mut k = pre.apply(amp);
            for i in 0..n {
                k[(i, i)] += noise;
            }
            match cholesky_with_jitter(&k) {
                Ok((chol, _)) => {
                    let w = chol.solve(&yv);
                    let half_logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
                    let lml = -0.5 * yv.dot(&w) - half_logdet - 0.5 * n as f64 * ln_2pi;
                    if lml.is_finite() {
                        -lml
                    } else {
                        f64::INFINITY
                    }
                }
                Err(_) => f64::INFINITY,
            }
        };

        let amp0 = self.initial_amp(&pre, y_var, bounds);
        let noise0 = (0.05 * y_var).clamp(bounds.noise.0, bounds.noise.1);
        let cur_amp = self.amp_value().clamp(bounds.amp.0, bounds.amp.1);
        let cur_noise = self.noise_var().clamp(bounds.noise.0, bounds.noise.1);

        let (amp, noise, neg) = match (opts.fit_amplitude, opts.fit_noise) {
            (true, true) => {
                let lo = [bounds.amp.0.ln(), bounds.noise.0.ln()];
                let hi = [bounds.amp.1.ln(), bounds.noise.1.ln()];
                let starts = [
                    vec![amp0.ln(), noise0.ln()],
                    vec![cur_amp.ln(), cur_noise.ln()],
                ];
                let per_start = (budget / starts.len()).max(10);
                let mut best: Option<(Vec<f64>, f64)> = None;
                for s in &starts {
                    let (x, f) = nelder_mead(
                        |z| neg_lml(z[0].exp(), z[1].exp()),
                        s,
                        0.7,
                        &lo,
                        &hi,
                        per_start,
                    );
                    if best.as_ref().map_or(true, |b| f < b.1) {
                        best = Some((x, f));
                    }
                }
                let (x, f) = best.expect("at least one start");
                (x[0].exp(), x[1].exp(), f)
            }
            (true, false) => {
                let lo = [bounds.amp.0.ln()];
                let hi = [bounds.amp.1.ln()];
                let starts = [vec![amp0.ln()], vec![cur_amp.ln()]];
                let per_start = (budget / starts.len()).max(10);
                let mut best: Option<(Vec<f64>, f64)> = None;
                for s in &starts {
                    let (x, f) = nelder_mead(
                        |z| neg_lml(z[0].exp(), self.noise_var()),
                        s,
                        0.7,
                        &lo,
                        &hi,
                        per_start,
                    );
                    if best.as_ref().map_or(true, |b| f < b.1) {
                        best = Some((x, f));
                    }
                }
                let (x, f) = best.expect("at least one start");
                (x[0].exp(), self.noise_var(), f)
            }
            (false, true) => {
                let lo = [bounds.noise.0.ln()];
                let hi = [bounds.noise.1.ln()];
                let starts = [vec![noise0.ln()], vec![cur_noise.ln()]];
                let per_start = (budget / starts.len()).max(10);
                let mut best: Option<(Vec<f64>, f64)> = None;
                for s in &starts {
                    let (x, f) = nelder_mead(
                        |z| neg_lml(self.amp_value(), z[0].exp()),
                        s,
                        0.7,
                        &lo,
                        &hi,
                        per_start,
                    );
                    if best.as_ref().map_or(true, |b| f < b.1) {
                        best = Some((x, f));
                    }
                }
                let (x, f) = best.expect("at least one start");
                (self.amp_value(), x[0].exp(), f)
            }
            (false, false) => {
                let f = neg_lml(self.amp_value(), self.noise_var());
                (self.amp_value(), self.noise_var(), f)
            }
        };

        *evaluations += local_evals;
        Ok(Candidate {
            lml: -neg,
            lengthscales: ls.to_vec(),
            amp,
            noise,
        })
    }

    /// Scale-aware starting point for the cheap parameter: for divergence
    /// kernels, the alpha that maps the mean off-diagonal divergence to a
    /// kernel value of one half; for expectation kernels, the sample
    /// variance of the targets.
    fn initial_amp(&self, pre: &super::PreGram, y_var: f64, bounds: &FitBounds) -> f64 {
        let v = match self.amp_map() {
            AmpMap::ExpNegAlpha => {
                let n = pre.mat.nrows();
                let mut acc = 0.0;
                let mut cnt = 0usize;
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = pre.mat[(i, j)];
                        if d > 1e-12 {
                            acc += d;
                            cnt += 1;
                        }
                    }
                }
                if cnt == 0 {
                    1.0
                } else {
                    std::f64::consts::LN_2 / (acc / cnt as f64)
                }
            }
            AmpMap::Scale => y_var.max(1e-3),
        };
        v.clamp(bounds.amp.0, bounds.amp.1)
    }
}

fn variance(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (y.len() - 1) as f64
}

/// Deterministic Nelder-Mead minimization with box constraints enforced by
/// coordinate clamping. Returns the best point found and its value.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    lo: &[f64],
    hi: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let clamp = |x: &mut [f64]| {
        for i in 0..x.len() {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut evals = 0usize;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize| -> f64 {
        clamp(x);
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut first = x0.to_vec();
    let f0 = eval(&mut first, &mut evals);
    simplex.push((first, f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        // If clamping would collapse the vertex onto the start, step the
        // other way to keep the simplex non-degenerate.
        if x[i] + step <= hi[i] {
            x[i] += step;
        } else {
            x[i] -= step;
        }
        let fx = eval(&mut x, &mut evals);
        simplex.push((x, fx));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        let size: f64 = (0..n)
            .map(|i| {
                simplex
                    .iter()
                    .map(|(x, _)| (x[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < 1e-10 && size < 1e-8 {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += x[i] / n as f64;
            }
        }
        let worst = simplex[n].clone();

        let mut xr: Vec<f64> = (0..n).map(|i| centroid[i] + (centroid[i] - worst.0[i])).collect();
        let fr = eval(&mut xr, &mut evals);

        if fr < simplex[0].1 {
            let mut xe: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let fe = eval(&mut xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let mut xc: Vec<f64> = (0..n)
                .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                .collect();
            let fc = eval(&mut xc, &mut evals);
            if fc < worst.1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = (0..n)
                        .map(|i| best[i] + 0.5 * (v.0[i] - best[i]))
                        .collect();
                    let fx = eval(&mut x, &mut evals);
                    *v = (x, fx);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0).into()
}
