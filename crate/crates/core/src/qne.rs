//! The hybrid estimator: empirical variational objectives on sampled
//! measurement outcomes, inner optimization over eigenvalue models,
//! outer maximization over a parameter grid, copy accounting, and
//! Monte Carlo risk curves against the exact solvers.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuits::{
    build_unitary, measurement_dist, sample_outcomes, CircuitAnsatz, OutcomeSample,
    OutcomeSource, ParamGrid, ParamPoint,
};
use crate::eigmodels::{DeepReluModel, EigenvalueModel, PolyModel, ShallowModel};
use crate::oracle::{measured_renyi, RenyiOrder, SolveOptions};
use crate::states::{DensityMatrix, QuantumChannel, StatePair};
use crate::stream::mix_all;
use crate::{Error, Result};

const TAG_SAMPLE_RHO: u64 = 0x5a01;
const TAG_SAMPLE_SIGMA: u64 = 0x5a02;
const TAG_INNER: u64 = 0x5a03;

/// Eigenvalue-model family used by the inner optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Shallow,
    Deep { layers: usize, width: usize },
    Poly { degree: usize },
}

/// Inner optimization mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InnerSolver {
    /// Exact per-index optimum; shallow models only.
    ClosedForm,
    /// Projected Adam ascent on the empirical objective.
    Gradient { steps: usize, lr: f64 },
}

/// Whether each grid point consumes fresh copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleReuse {
    /// Fresh samples per grid point; copies scale with the grid size.
    FreshPerTheta,
    /// One shared sample stream across grid points (off-model; for
    /// variance-reduction studies).
    Shared,
}

/// Full configuration of one estimator run.
#[derive(Debug, Clone)]
pub struct QneConfig {
    pub alpha: RenyiOrder,
    pub n_per_eval: usize,
    pub ansatz: CircuitAnsatz,
    pub grid: ParamGrid,
    pub model_kind: ModelKind,
    pub logb: f64,
    pub sample_reuse: SampleReuse,
    pub inner: InnerSolver,
    pub seed: u64,
}

impl QneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_eval < 1 {
            return Err(Error::BadParams("n_per_eval must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::BadParams("parameter grid is empty".into()));
        }
        if matches!(self.inner, InnerSolver::ClosedForm) && self.model_kind != ModelKind::Shallow {
            return Err(Error::BadParams(
                "closed-form inner optimization needs a shallow model".into(),
            ));
        }
        if self.logb <= 0.0 || !self.logb.is_finite() {
            return Err(Error::BadParams("logb must be positive".into()));
        }
        Ok(())
    }
}

/// One estimator run with copy accounting.
#[derive(Debug, Clone)]
pub struct QneEstimate {
    /// The estimate: the largest per-grid-point inner value.
    pub value: f64,
    pub best_theta: ParamPoint,
    pub best_model: EigenvalueModel,
    /// Copies of each state consumed by the run.
    pub copies_consumed: usize,
    pub per_theta_values: Vec<f64>,
}

fn histogram(sample: &OutcomeSample, d: usize) -> Vec<f64> {
    let mut h = vec![0.0f64; d];
    for &i in &sample.outcomes {
        h[i as usize] += 1.0;
    }
    let n = sample.outcomes.len() as f64;
    for x in h.iter_mut() {
        *x /= n;
    }
    h
}

fn model_values(model: &EigenvalueModel, d: usize) -> Result<Vec<f64>> {
    (0..d).map(|i| model.eval(i, d)).collect()
}

/// Plug-in objective `mean f(i) - mean e^{f(j)} + 1` over the two
/// samples, evaluated through outcome histograms.
pub fn empirical_kl_objective(
    model: &EigenvalueModel,
    sample_rho: &OutcomeSample,
    sample_sigma: &OutcomeSample,
    d: usize,
) -> Result<f64> {
    let p = histogram(sample_rho, d);
    let q = histogram(sample_sigma, d);
    let f = model_values(model, d)?;
    Ok(kl_objective_weighted(&f, &p, &q))
}

fn kl_objective_weighted(f: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 1.0;
    for i in 0..f.len() {
        acc += p[i] * f[i] - q[i] * f[i].exp();
    }
    acc
}

/// Plug-in Renyi objective
/// `(a/(a-1)) log mean e^{(a-1) f(i)} - log mean e^{a f(j)}`,
/// stabilized by max-shifted log-sum-exp.
pub fn empirical_renyi_objective(
    alpha: f64,
    model: &EigenvalueModel,
    sample_rho: &OutcomeSample,
    sample_sigma: &OutcomeSample,
    d: usize,
) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() || (alpha - 1.0).abs() < 1e-12 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let p = histogram(sample_rho, d);
    let q = histogram(sample_sigma, d);
    let f = model_values(model, d)?;
    Ok(renyi_objective_weighted(alpha, &f, &p, &q))
}

fn log_mean_exp(weights: &[f64], exps: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for (&w, &e) in weights.iter().zip(exps) {
        if w > 0.0 && e > m {
            m = e;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = weights
        .iter()
        .zip(exps)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &e)| w * (e - m).exp())
        .sum();
    m + s.ln()
}

fn renyi_objective_weighted(alpha: f64, f: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let ep: Vec<f64> = f.iter().map(|&x| (alpha - 1.0) * x).collect();
    let eq: Vec<f64> = f.iter().map(|&x| alpha * x).collect();
    alpha / (alpha - 1.0) * log_mean_exp(p, &ep) - log_mean_exp(q, &eq)
}

fn objective_weighted(order: &RenyiOrder, f: &[f64], p: &[f64], q: &[f64]) -> f64 {
    if order.is_kl() {
        kl_objective_weighted(f, p, q)
    } else {
        renyi_objective_weighted(order.alpha(), f, p, q)
    }
}

/// Per-index closed form for bounded tables: the log ratio of the two
/// weights clamped to the bound; empty cells push to the boundary the
/// objective prefers.
fn closed_form_table(p: &[f64], q: &[f64], logb: f64) -> Vec<f64> {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi > 0.0 && qi > 0.0 {
                (pi / qi).ln().clamp(-logb, logb)
            } else if pi > 0.0 {
                logb
            } else if qi > 0.0 {
                -logb
            } else {
                0.0
            }
        })
        .collect()
}

/// Gradient of the objective with respect to the per-index model values.
fn objective_value_grad(order: &RenyiOrder, f: &[f64], p: &[f64], q: &[f64]) -> Vec<f64> {
    if order.is_kl() {
        f.iter()
            .zip(p.iter().zip(q))
            .map(|(&fi, (&pi, &qi))| pi - qi * fi.exp())
            .collect()
    } else {
        let alpha = order.alpha();
        let ep: Vec<f64> = f.iter().map(|&x| (alpha - 1.0) * x).collect();
        let eq: Vec<f64> = f.iter().map(|&x| alpha * x).collect();
        let la = log_mean_exp(p, &ep);
        let lb = log_mean_exp(q, &eq);
        f.iter()
            .enumerate()
            .map(|(i, &fi)| {
                let ta = if p[i] > 0.0 {
                    p[i] * ((alpha - 1.0) * fi - la).exp()
                } else {
                    0.0
                };
                let tb = if q[i] > 0.0 {
                    q[i] * (alpha * fi - lb).exp()
                } else {
                    0.0
                };
                alpha * (ta - tb)
            })
            .collect()
    }
}

fn init_model(kind: ModelKind, d: usize, logb: f64, seed: u64) -> EigenvalueModel {
    match kind {
        ModelKind::Shallow => EigenvalueModel::Shallow(ShallowModel::zeros(d, logb)),
        ModelKind::Deep { layers, width } => {
            EigenvalueModel::Deep(DeepReluModel::random(layers, width, 1.0, logb, seed))
        }
        ModelKind::Poly { degree } => {
            let mut m = PolyModel::from_coeffs(vec![0.0; degree + 1], 2.0 * logb * (degree + 1) as f64);
            m.clamp = Some(logb);
            EigenvalueModel::Poly(m)
        }
    }
}

/// Inner optimization over the model class for fixed outcome weights:
/// exact per-index closed form for shallow tables, projected Adam
/// ascent otherwise. Returns the model and its achieved objective; the
/// zero model is always a fallback, so the value is never below the
/// zero-model objective.
fn inner_optimize_weighted(
    order: &RenyiOrder,
    kind: ModelKind,
    p: &[f64],
    q: &[f64],
    logb: f64,
    inner: InnerSolver,
    seed: u64,
) -> Result<(EigenvalueModel, f64)> {
    let d = p.len();
    match inner {
        InnerSolver::ClosedForm => {
            if kind != ModelKind::Shallow {
                return Err(Error::BadParams(
                    "closed-form inner optimization needs a shallow model".into(),
                ));
            }
            let beta = closed_form_table(p, q, logb);
            let value = objective_weighted(order, &beta, p, q);
            Ok((
                EigenvalueModel::Shallow(ShallowModel {
                    dim: d,
                    beta,
                    bound_logb: logb,
                }),
                value,
            ))
        }
        InnerSolver::Gradient { steps, lr } => {
            let mut model = init_model(kind, d, logb, seed);
            let zero = init_model(ModelKind::Shallow, d, logb, 0);
            let zero_values = model_values(&zero, d)?;
            let zero_obj = objective_weighted(order, &zero_values, p, q);

            match &mut model {
                EigenvalueModel::Shallow(m) => {
                    let mut mom = vec![0.0; d];
                    let mut vel = vec![0.0; d];
                    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
                    for it in 0..steps {
                        let g = objective_value_grad(order, &m.beta, p, q);
                        for i in 0..d {
                            mom[i] = b1 * mom[i] + (1.0 - b1) * g[i];
                            vel[i] = b2 * vel[i] + (1.0 - b2) * g[i] * g[i];
                            let mh = mom[i] / (1.0 - b1.powi(it as i32 + 1));
                            let vh = vel[i] / (1.0 - b2.powi(it as i32 + 1));
                            m.beta[i] =
                                (m.beta[i] + lr * mh / (vh.sqrt() + eps)).clamp(-logb, logb);
                        }
                    }
                }
                EigenvalueModel::Deep(m) => {
                    let xs: Vec<f64> = (0..d).map(|i| (i + 1) as f64 / d as f64).collect();
                    let nparams = m.grad_params(xs[0]).len();
                    let mut mom = vec![0.0; nparams];
                    let mut vel = vec![0.0; nparams];
                    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
                    for it in 0..steps {
                        let f: Vec<f64> = xs.iter().map(|&x| m.forward(x)).collect();
                        let gv = objective_value_grad(order, &f, p, q);
                        let mut g = vec![0.0; nparams];
                        for (i, &x) in xs.iter().enumerate() {
                            if gv[i] == 0.0 {
                                continue;
                            }
                            for (gp, gi) in g.iter_mut().zip(m.grad_params(x)) {
                                *gp += gv[i] * gi;
                            }
                        }
                        let mut update = vec![0.0; nparams];
                        for i in 0..nparams {
                            mom[i] = b1 * mom[i] + (1.0 - b1) * g[i];
                            vel[i] = b2 * vel[i] + (1.0 - b2) * g[i] * g[i];
                            let mh = mom[i] / (1.0 - b1.powi(it as i32 + 1));
                            let vh = vel[i] / (1.0 - b2.powi(it as i32 + 1));
                            update[i] = mh / (vh.sqrt() + eps);
                        }
                        m.apply_update(&update, lr);
                    }
                }
                EigenvalueModel::Poly(m) => {
                    let xs: Vec<f64> = (0..d).map(|i| (i + 1) as f64 / d as f64).collect();
                    let k = m.degree;
                    let mut coeffs = m.monomial_coeffs().unwrap_or(&vec![0.0; k + 1]).to_vec();
                    let bound = m.coeff_bound;
                    let mut mom = vec![0.0; k + 1];
                    let mut vel = vec![0.0; k + 1];
                    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
                    for it in 0..steps {
                        let f: Vec<f64> = xs
                            .iter()
                            .map(|&x| {
                                let mut acc = 0.0;
                                for &a in coeffs.iter().rev() {
                                    acc = acc * x + a;
                                }
                                acc.clamp(-logb, logb)
                            })
                            .collect();
                        let gv = objective_value_grad(order, &f, p, q);
                        let mut g = vec![0.0; k + 1];
                        for (i, &x) in xs.iter().enumerate() {
                            // Saturation mask.
                            if f[i].abs() >= logb {
                                continue;
                            }
                            let mut xp = 1.0;
                            for gl in g.iter_mut() {
                                *gl += gv[i] * xp;
                                xp *= x;
                            }
                        }
                        for i in 0..=k {
                            mom[i] = b1 * mom[i] + (1.0 - b1) * g[i];
                            vel[i] = b2 * vel[i] + (1.0 - b2) * g[i] * g[i];
                            let mh = mom[i] / (1.0 - b1.powi(it as i32 + 1));
                            let vh = vel[i] / (1.0 - b2.powi(it as i32 + 1));
                            coeffs[i] = (coeffs[i] + lr * mh / (vh.sqrt() + eps))
                                .clamp(-bound, bound);
                        }
                    }
                    let mut trained = PolyModel::from_coeffs(coeffs, bound);
                    trained.clamp = Some(logb);
                    *m = trained;
                }
            }

            let f = model_values(&model, d)?;
            let obj = objective_weighted(order, &f, p, q);
            // Keep the zero model when training failed to beat it.
            if obj >= zero_obj {
                Ok((model, obj))
            } else {
                Ok((zero, zero_obj))
            }
        }
    }
}

/// Inner optimization on sampled outcomes (histogram weights).
pub fn inner_optimize(
    order: &RenyiOrder,
    kind: ModelKind,
    sample_rho: &OutcomeSample,
    sample_sigma: &OutcomeSample,
    d: usize,
    logb: f64,
    inner: InnerSolver,
    seed: u64,
) -> Result<(EigenvalueModel, f64)> {
    let p = histogram(sample_rho, d);
    let q = histogram(sample_sigma, d);
    inner_optimize_weighted(order, kind, &p, &q, logb, inner, seed)
}

fn prepare_states(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: Option<&QuantumChannel>,
) -> Result<(DensityMatrix, DensityMatrix)> {
    match channel {
        Some(n) => Ok((n.apply(rho)?, n.apply(sigma)?)),
        None => Ok((rho.clone(), sigma.clone())),
    }
}

/// Run the full estimator: for every grid point, build the circuit,
/// form the outcome distributions, draw samples, optimize the inner
/// model, and return the largest value with exact copy accounting.
/// Deterministic for a fixed config seed.
pub fn estimate(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    config: &QneConfig,
    channel: Option<&QuantumChannel>,
) -> Result<QneEstimate> {
    config.validate()?;
    let (r, s) = prepare_states(rho, sigma, channel)?;
    let d = r.dim();
    let n = config.n_per_eval;

    let mut per_theta_values = Vec::with_capacity(config.grid.len());
    let mut best: Option<(f64, usize, EigenvalueModel)> = None;
    for (k, theta) in config.grid.points.iter().enumerate() {
        let u = build_unitary(&config.ansatz, theta)?;
        let p_dist = measurement_dist(&u, &r)?;
        let q_dist = measurement_dist(&u, &s)?;
        let stream_tag = match config.sample_reuse {
            SampleReuse::FreshPerTheta => k as u64,
            SampleReuse::Shared => 0,
        };
        let sr = sample_outcomes(
            &p_dist,
            n,
            OutcomeSource::Rho,
            theta,
            mix_all(config.seed, &[TAG_SAMPLE_RHO, stream_tag]),
        );
        let ss = sample_outcomes(
            &q_dist,
            n,
            OutcomeSource::Sigma,
            theta,
            mix_all(config.seed, &[TAG_SAMPLE_SIGMA, stream_tag]),
        );
        let (model, value) = inner_optimize(
            &config.alpha,
            config.model_kind,
            &sr,
            &ss,
            d,
            config.logb,
            config.inner,
            mix_all(config.seed, &[TAG_INNER, k as u64]),
        )?;
        per_theta_values.push(value);
        if best.as_ref().is_none_or(|(bv, _, _)| value > *bv) {
            best = Some((value, k, model));
        }
    }
    let (value, best_idx, best_model) = best.expect("grid is nonempty");
    let copies_consumed = match config.sample_reuse {
        SampleReuse::FreshPerTheta => config.grid.len() * n,
        SampleReuse::Shared => n,
    };
    Ok(QneEstimate {
        value,
        best_theta: config.grid.points[best_idx].clone(),
        best_model,
        copies_consumed,
        per_theta_values,
    })
}

/// Infinite-sample proxy: the same outer/inner optimization evaluated
/// on the exact measurement distributions instead of samples. Isolates
/// the approximation error of the model class and grid.
pub fn population_estimate(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    config: &QneConfig,
    channel: Option<&QuantumChannel>,
) -> Result<QneEstimate> {
    config.validate()?;
    let (r, s) = prepare_states(rho, sigma, channel)?;
    let mut per_theta_values = Vec::with_capacity(config.grid.len());
    let mut best: Option<(f64, usize, EigenvalueModel)> = None;
    for (k, theta) in config.grid.points.iter().enumerate() {
        let u = build_unitary(&config.ansatz, theta)?;
        let p_dist = measurement_dist(&u, &r)?;
        let q_dist = measurement_dist(&u, &s)?;
        let (model, value) = inner_optimize_weighted(
            &config.alpha,
            config.model_kind,
            p_dist.probs(),
            q_dist.probs(),
            config.logb,
            config.inner,
            mix_all(config.seed, &[TAG_INNER, k as u64]),
        )?;
        per_theta_values.push(value);
        if best.as_ref().is_none_or(|(bv, _, _)| value > *bv) {
            best = Some((value, k, model));
        }
    }
    let (value, best_idx, best_model) = best.expect("grid is nonempty");
    Ok(QneEstimate {
        value,
        best_theta: config.grid.points[best_idx].clone(),
        best_model,
        copies_consumed: 0,
        per_theta_values,
    })
}

/// One row of a risk table.
#[derive(Debug, Clone, Serialize)]
pub struct RiskRow {
    pub n: usize,
    /// Largest per-pair mean absolute error at this sample size.
    pub mean_abs_error: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

/// Monte Carlo risk summary over a family of pairs.
#[derive(Debug, Clone, Serialize)]
pub struct RiskTable {
    pub rows: Vec<RiskRow>,
    /// Least-squares slope of log mean error against log n; absent for
    /// a single sample size.
    pub slope: Option<f64>,
    pub truths: Vec<f64>,
    /// Raw estimates indexed as [n][pair][trial].
    pub estimates: Vec<Vec<Vec<f64>>>,
}

impl RiskTable {
    /// Absolute error of estimate [n][pair][trial].
    pub fn abs_error(&self, ni: usize, pi: usize, t: usize) -> f64 {
        (self.estimates[ni][pi][t] - self.truths[pi]).abs()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

/// Least-squares slope of y against x.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Run `trials` independent estimates per pair and sample size and
/// compare against the exact solver. The per-n risk is the largest
/// per-pair mean absolute error; quantiles pool all errors at that n.
pub fn risk_curve(
    family: &[StatePair],
    config: &QneConfig,
    n_list: &[usize],
    trials: usize,
    channel: Option<&QuantumChannel>,
) -> Result<RiskTable> {
    assert!(trials >= 30, "need at least 30 trials per sample size");
    if family.is_empty() || n_list.is_empty() {
        return Err(Error::BadParams("empty pair family or n list".into()));
    }
    let opts = SolveOptions::default();
    let mut truths = Vec::with_capacity(family.len());
    for pair in family {
        let (r, s) = prepare_states(&pair.rho, &pair.sigma, channel)?;
        let sol = measured_renyi(config.alpha, &r, &s, &opts)?;
        truths.push(sol.value);
    }

    let mut estimates: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let per_pair: Vec<Vec<f64>> = family
            .par_iter()
            .enumerate()
            .map(|(pi, pair)| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut cfg = config.clone();
                        cfg.n_per_eval = n;
                        cfg.seed = risk_trial_seed(config.seed, ni, pi, t);
                        let est = estimate(&pair.rho, &pair.sigma, &cfg, channel)
                            .expect("estimator inputs validated above");
                        est.value
                    })
                    .collect()
            })
            .collect();
        estimates.push(per_pair);
    }

    let mut rows = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let risk = estimates[ni]
            .iter()
            .enumerate()
            .map(|(pi, ests)| {
                ests.iter().map(|e| (e - truths[pi]).abs()).sum::<f64>() / ests.len() as f64
            })
            .fold(0.0f64, f64::max);
        let mut pooled: Vec<f64> = estimates[ni]
            .iter()
            .enumerate()
            .flat_map(|(pi, ests)| {
                let truth = truths[pi];
                ests.iter().map(move |e| (e - truth).abs())
            })
            .collect();
        pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.push(RiskRow {
            n,
            mean_abs_error: risk,
            q25: quantile(&pooled, 0.25),
            q50: quantile(&pooled, 0.50),
            q75: quantile(&pooled, 0.75),
            q90: quantile(&pooled, 0.90),
        });
    }

    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.mean_abs_error > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean_abs_error.ln()).collect();
        Some(linear_slope(&xs, &ys))
    } else {
        None
    };

    Ok(RiskTable {
        rows,
        slope,
        truths,
        estimates,
    })
}

/// Seed of one (sample size, pair, trial) cell of a risk curve; exposed
/// so reports can record replayable per-row provenance.
pub fn risk_trial_seed(master: u64, ni: usize, pi: usize, t: usize) -> u64 {
    mix_all(master, &[0x91c, ni as u64, pi as u64, t as u64])
}
