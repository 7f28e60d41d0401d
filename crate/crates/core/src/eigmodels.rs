//! Eigenvalue models: bounded lookup tables (shallow nets over the
//! one-hot embedding), truncated deep ReLU networks, and polynomials
//! over the uniform embedding of indices into [0, 1], plus Bernstein
//! polynomial approximation.
//!
//! Indices are 0-based throughout; index `j` of a d-dimensional model
//! embeds as `x = (j + 1) / d`, so the embedded points are
//! `{1/d, ..., 1}`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A per-index table `j -> beta_j`; equivalent to a one-hidden-layer
/// ReLU net over one-hot inputs with output weights `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowModel {
    pub dim: usize,
    pub beta: Vec<f64>,
    pub bound_logb: f64,
}

impl ShallowModel {
    pub fn zeros(dim: usize, bound_logb: f64) -> Self {
        Self {
            dim,
            beta: vec![0.0; dim],
            bound_logb,
        }
    }

    pub fn is_within_bound(&self) -> bool {
        self.beta.iter().all(|&b| b.abs() <= self.bound_logb + 1e-12)
    }
}

/// A fully-connected ReLU network on scalar inputs with bounded width
/// and bounded parameter magnitudes, output saturated at the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepReluModel {
    /// Affine layers as (weight rows, bias); layer l maps a vector of
    /// len `weights[0].len()` to one of len `weights.len()`.
    pub layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
    /// Width cap K of the architecture class.
    pub width_cap: usize,
    /// Parameter magnitude cap M.
    pub param_cap: f64,
    /// Saturation bound on the output.
    pub bound_logb: f64,
}

impl DeepReluModel {
    /// Random network with `num_layers` affine maps (at least 2), all
    /// hidden widths equal to `width`, entries uniform in [-M, M].
    pub fn random(
        num_layers: usize,
        width: usize,
        param_cap: f64,
        bound_logb: f64,
        seed: u64,
    ) -> Self {
        use rand::Rng;
        let mut rng = crate::stream::rng_from(seed, &[0xdee9]);
        let num_layers = num_layers.max(2);
        let mut layers = Vec::with_capacity(num_layers);
        for l in 0..num_layers {
            let fan_in = if l == 0 { 1 } else { width };
            let fan_out = if l == num_layers - 1 { 1 } else { width };
            let w: Vec<Vec<f64>> = (0..fan_out)
                .map(|_| {
                    (0..fan_in)
                        .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * param_cap)
                        .collect()
                })
                .collect();
            let b: Vec<f64> = (0..fan_out)
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * param_cap)
                .collect();
            layers.push((w, b));
        }
        Self {
            layers,
            width_cap: width,
            param_cap,
            bound_logb,
        }
    }

    /// Architecture caps hold: widths within K, parameters within M.
    pub fn is_within_caps(&self) -> bool {
        self.layers.iter().all(|(w, b)| {
            w.len() <= self.width_cap.max(1)
                && w.iter()
                    .all(|row| row.iter().all(|&x| x.abs() <= self.param_cap + 1e-12))
                && b.iter().all(|&x| x.abs() <= self.param_cap + 1e-12)
        })
    }

    /// Forward pass before saturation.
    pub fn raw_forward(&self, x: f64) -> f64 {
        let mut act = vec![x];
        let last = self.layers.len() - 1;
        for (l, (w, b)) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(w.len());
            for (row, &bias) in w.iter().zip(b) {
                let mut s = bias;
                for (&wi, &ai) in row.iter().zip(&act) {
                    s += wi * ai;
                }
                if l < last {
                    s = s.max(0.0);
                }
                next.push(s);
            }
            act = next;
        }
        act[0]
    }

    /// Saturated forward pass.
    pub fn forward(&self, x: f64) -> f64 {
        self.raw_forward(x).clamp(-self.bound_logb, self.bound_logb)
    }

    /// Gradient of the saturated output with respect to every weight
    /// and bias, flattened layer by layer (weights row-major, then
    /// biases). The saturation zeroes the gradient outside the band.
    pub fn grad_params(&self, x: f64) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = vec![vec![x]];
        let mut masks: Vec<Vec<f64>> = Vec::new();
        for (l, (w, b)) in self.layers.iter().enumerate() {
            let prev = acts.last().unwrap().clone();
            let mut pre = Vec::with_capacity(w.len());
            for (row, &bias) in w.iter().zip(b) {
                let mut s = bias;
                for (&wi, &ai) in row.iter().zip(&prev) {
                    s += wi * ai;
                }
                pre.push(s);
            }
            if l < last {
                masks.push(pre.iter().map(|&s| if s > 0.0 { 1.0 } else { 0.0 }).collect());
                acts.push(pre.iter().map(|&s| s.max(0.0)).collect());
            } else {
                acts.push(pre);
            }
        }
        let out = acts.last().unwrap()[0];
        let sat = if out.abs() > self.bound_logb { 0.0 } else { 1.0 };

        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut delta = vec![sat];
        for l in (0..self.layers.len()).rev() {
            let (w, _) = &self.layers[l];
            let input = &acts[l];
            let mut layer_grad = Vec::with_capacity(w.len() * input.len() + w.len());
            for (j, row) in w.iter().enumerate() {
                for &ai in input.iter().take(row.len()) {
                    layer_grad.push(delta[j] * ai);
                }
            }
            layer_grad.extend(delta.iter());
            grads.push(layer_grad);
            if l > 0 {
                let mut prev_delta = vec![0.0; input.len()];
                for (j, row) in w.iter().enumerate() {
                    for (i, &wi) in row.iter().enumerate() {
                        prev_delta[i] += delta[j] * wi;
                    }
                }
                for (pd, m) in prev_delta.iter_mut().zip(&masks[l - 1]) {
                    *pd *= m;
                }
                delta = prev_delta;
            }
        }
        grads.reverse();
        grads.concat()
    }

    /// Apply a flattened parameter update in the layout of
    /// [`Self::grad_params`], then clamp every entry to the cap.
    pub fn apply_update(&mut self, update: &[f64], scale: f64) {
        let mut idx = 0;
        for (w, b) in self.layers.iter_mut() {
            for row in w.iter_mut() {
                for wi in row.iter_mut() {
                    *wi = (*wi + scale * update[idx]).clamp(-self.param_cap, self.param_cap);
                    idx += 1;
                }
            }
            for bi in b.iter_mut() {
                *bi = (*bi + scale * update[idx]).clamp(-self.param_cap, self.param_cap);
                idx += 1;
            }
        }
        debug_assert_eq!(idx, update.len());
    }
}

/// Representation of a polynomial model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolyRepr {
    /// Monomial coefficients `a_0 + a_1 x + ...`, Horner evaluation.
    Monomial { coeffs: Vec<f64> },
    /// Values at the Bernstein nodes m/k; evaluation stays in the
    /// Bernstein basis, which is stable at high degree.
    Bernstein { nodes: Vec<f64> },
}

/// A univariate polynomial of bounded degree and coefficient size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel {
    pub degree: usize,
    pub repr: PolyRepr,
    pub coeff_bound: f64,
    /// Optional output clamp installed by [`project_to_bound`].
    pub clamp: Option<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

impl PolyModel {
    pub fn from_coeffs(coeffs: Vec<f64>, coeff_bound: f64) -> Self {
        let degree = coeffs.len().saturating_sub(1);
        Self {
            degree,
            repr: PolyRepr::Monomial { coeffs },
            coeff_bound,
            clamp: None,
        }
    }

    pub fn monomial_coeffs(&self) -> Option<&[f64]> {
        match &self.repr {
            PolyRepr::Monomial { coeffs } => Some(coeffs),
            PolyRepr::Bernstein { .. } => None,
        }
    }

    pub fn is_within_bound(&self) -> bool {
        match &self.repr {
            PolyRepr::Monomial { coeffs } => {
                coeffs.iter().all(|&a| a.abs() <= self.coeff_bound + 1e-9)
            }
            PolyRepr::Bernstein { .. } => true,
        }
    }

    pub fn at(&self, x: f64) -> f64 {
        let raw = match &self.repr {
            PolyRepr::Monomial { coeffs } => {
                let mut acc = 0.0;
                for &a in coeffs.iter().rev() {
                    acc = acc * x + a;
                }
                acc
            }
            PolyRepr::Bernstein { nodes } => {
                let k = nodes.len() - 1;
                let mut acc = 0.0;
                for (m, &f) in nodes.iter().enumerate() {
                    let w = binomial(k, m) * x.powi(m as i32) * (1.0 - x).powi((k - m) as i32);
                    acc += w * f;
                }
                acc
            }
        };
        match self.clamp {
            Some(b) => raw.clamp(-b, b),
            None => raw,
        }
    }
}

/// The eigenvalue-model variants accepted by the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EigenvalueModel {
    Shallow(ShallowModel),
    Deep(DeepReluModel),
    Poly(PolyModel),
}

impl EigenvalueModel {
    /// Model value at the 0-based index `j` of a d-outcome register:
    /// the table entry for shallow models, or the function value at the
    /// embedded point `(j + 1) / d` for deep and polynomial models.
    pub fn eval(&self, index: usize, d: usize) -> Result<f64> {
        if index >= d {
            return Err(Error::IndexOutOfRange { index, dim: d });
        }
        match self {
            EigenvalueModel::Shallow(m) => {
                if index >= m.dim {
                    return Err(Error::IndexOutOfRange { index, dim: m.dim });
                }
                Ok(m.beta[index])
            }
            EigenvalueModel::Deep(m) => Ok(m.forward((index + 1) as f64 / d as f64)),
            EigenvalueModel::Poly(m) => Ok(m.at((index + 1) as f64 / d as f64)),
        }
    }
}

/// Clamp or saturate a model so its values lie within `[-logb, logb]`.
pub fn project_to_bound(model: &EigenvalueModel, logb: f64) -> EigenvalueModel {
    match model {
        EigenvalueModel::Shallow(m) => {
            let beta = m.beta.iter().map(|&b| b.clamp(-logb, logb)).collect();
            EigenvalueModel::Shallow(ShallowModel {
                dim: m.dim,
                beta,
                bound_logb: logb,
            })
        }
        EigenvalueModel::Deep(m) => {
            let mut m = m.clone();
            m.bound_logb = logb;
            EigenvalueModel::Deep(m)
        }
        EigenvalueModel::Poly(m) => {
            let mut m = m.clone();
            m.clamp = Some(logb);
            EigenvalueModel::Poly(m)
        }
    }
}

/// Degree-k Bernstein approximant of `f` on [0, 1], sampled at the
/// nodes m/k. The monomial expansion `a_l = C(k,l) * Delta^l f(0)` is
/// attached for degrees up to 30; beyond that, coefficients outgrow
/// any useful double range and evaluation stays in the Bernstein basis.
pub fn bernstein_fit<F: Fn(f64) -> f64>(f: F, k: usize) -> PolyModel {
    assert!(k >= 1, "degree must be at least 1");
    let nodes: Vec<f64> = (0..=k).map(|m| f(m as f64 / k as f64)).collect();
    let sup = nodes.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let coeff_bound = (2.0f64).powi(k as i32)
        * (1..=k).map(|i| i as f64).product::<f64>().max(1.0)
        * sup.max(1e-300);
    if k <= 30 {
        // Forward differences with step 1/k.
        let mut diff = nodes.clone();
        let mut coeffs = Vec::with_capacity(k + 1);
        coeffs.push(diff[0]);
        for l in 1..=k {
            for i in 0..(diff.len() - 1) {
                diff[i] = diff[i + 1] - diff[i];
            }
            diff.pop();
            coeffs.push(binomial(k, l) * diff[0]);
        }
        PolyModel {
            degree: k,
            repr: PolyRepr::Monomial { coeffs },
            coeff_bound,
            clamp: None,
        }
    } else {
        PolyModel {
            degree: k,
            repr: PolyRepr::Bernstein { nodes },
            coeff_bound,
            clamp: None,
        }
    }
}

/// Evaluate the degree-k Bernstein approximant of `f` at `x` without
/// building a model; numerically stable at any degree.
pub fn bernstein_value<F: Fn(f64) -> f64>(f: &F, k: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for m in 0..=k {
        let w = binomial(k, m) * x.powi(m as i32) * (1.0 - x).powi((k - m) as i32);
        acc += w * f(m as f64 / k as f64);
    }
    acc
}

/// Continuous piecewise-linear function on [0, 1] interpolating a value
/// table at the knots i/d, with value 0 pinned at x = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    /// Knot values including the pinned leading zero; length d + 1.
    knots: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn d(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn at(&self, x: f64) -> f64 {
        let d = self.d() as f64;
        let x = x.clamp(0.0, 1.0);
        let seg = ((x * d).floor() as usize).min(self.d() - 1);
        let x0 = seg as f64 / d;
        let t = (x - x0) * d;
        self.knots[seg] * (1.0 - t) + self.knots[seg + 1] * t
    }

    /// Exact Lipschitz constant: the largest knot-to-knot slope.
    pub fn lipschitz(&self) -> f64 {
        let d = self.d() as f64;
        self.knots
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() * d)
            .fold(0.0, f64::max)
    }

    /// Exact sup norm (attained at a knot).
    pub fn sup_norm(&self) -> f64 {
        self.knots.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }
}

/// Piecewise-linear interpolant through `(i/d, values[i-1])` for
/// i = 1..d, pinned to 0 at x = 0. Its Lipschitz constant is at most
/// `2 d max|values|`.
pub fn piecewise_linear_interpolant(values: &[f64]) -> PiecewiseLinear {
    assert!(!values.is_empty(), "need at least one value");
    let mut knots = Vec::with_capacity(values.len() + 1);
    knots.push(0.0);
    knots.extend_from_slice(values);
    PiecewiseLinear { knots }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shallow_eval_reproduces_table() {
        let table = vec![0.3, -0.7, 0.1, 0.5];
        let m = EigenvalueModel::Shallow(ShallowModel {
            dim: 4,
            beta: table.clone(),
            bound_logb: 1.0,
        });
        for (i, &v) in table.iter().enumerate() {
            assert_eq!(m.eval(i, 4).unwrap(), v);
        }
        assert!(matches!(m.eval(4, 4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn deep_model_saturates() {
        // A 2-layer net realizing f(x) = 10 x.
        let m = DeepReluModel {
            layers: vec![(vec![vec![10.0]], vec![0.0]), (vec![vec![1.0]], vec![0.0])],
            width_cap: 9,
            param_cap: 10.0,
            bound_logb: 1.0,
        };
        let model = EigenvalueModel::Deep(m);
        // At x = 1 the raw output is 10, far beyond the bound 1.
        assert_eq!(model.eval(3, 4).unwrap(), 1.0);
    }

    #[test]
    fn poly_square_at_last_index_is_one() {
        let m = EigenvalueModel::Poly(PolyModel::from_coeffs(vec![0.0, 0.0, 1.0], 10.0));
        assert!((m.eval(7, 8).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let feasible = EigenvalueModel::Shallow(ShallowModel {
            dim: 2,
            beta: vec![0.5, -0.5],
            bound_logb: 1.0,
        });
        let p = project_to_bound(&feasible, 1.0);
        if let EigenvalueModel::Shallow(s) = &p {
            assert_eq!(s.beta, vec![0.5, -0.5]);
        } else {
            panic!("kind changed");
        }

        let hot = EigenvalueModel::Shallow(ShallowModel {
            dim: 2,
            beta: vec![10.0, -3.0],
            bound_logb: 1.0,
        });
        let p = project_to_bound(&hot, 1.0);
        if let EigenvalueModel::Shallow(s) = &p {
            assert_eq!(s.beta, vec![1.0, -1.0]);
        } else {
            panic!("kind changed");
        }
    }

    #[test]
    fn projection_bounds_all_kinds_everywhere() {
        let logb = 0.8;
        let d = 16;
        let models = [
            EigenvalueModel::Shallow(ShallowModel {
                dim: d,
                beta: (0..d).map(|i| (i as f64 - 6.0) * 0.9).collect(),
                bound_logb: 5.0,
            }),
            EigenvalueModel::Deep(DeepReluModel::random(4, 6, 1.0, 5.0, 3)),
            EigenvalueModel::Poly(PolyModel::from_coeffs(vec![0.0, 4.0, -7.0], 10.0)),
        ];
        for m in &models {
            let p = project_to_bound(m, logb);
            for i in 0..d {
                let v = p.eval(i, d).unwrap();
                assert!(v.abs() <= logb + 1e-12, "value {v} exceeds bound");
            }
        }
    }

    #[test]
    fn bernstein_reproduces_affine() {
        for k in [1, 3, 10] {
            let p = bernstein_fit(|x| x, k);
            let c = p.monomial_coeffs().unwrap();
            assert!((c[0]).abs() < 1e-12);
            assert!((c[1] - 1.0).abs() < 1e-12);
            for &a in &c[2..] {
                assert!(a.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bernstein_square_degree_two() {
        let p = bernstein_fit(|x| x * x, 2);
        let c = p.monomial_coeffs().unwrap();
        assert!((c[0]).abs() < 1e-15);
        assert!((c[1] - 0.5).abs() < 1e-15);
        assert!((c[2] - 0.5).abs() < 1e-15);
        assert!((p.at(0.5) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn bernstein_interpolates_endpoints() {
        let f = |x: f64| (x - 0.4).abs();
        for k in [2, 7, 40] {
            let p = bernstein_fit(f, k);
            assert!((p.at(0.0) - f(0.0)).abs() < 1e-12);
            assert!((p.at(1.0) - f(1.0)).abs() < 1e-12);
        }
    }

    /// Sup-norm error bound `(Lip + 0.5 sup) k^(-1/3)` on a dense grid.
    #[test]
    fn bernstein_error_bound_for_kink() {
        let f = |x: f64| (x - 0.4).abs();
        let (lip, sup) = (1.0, 0.6);
        for k in [2usize, 4, 8, 16, 32, 64] {
            let p = bernstein_fit(f, k);
            let mut worst = 0.0f64;
            for g in 0..=10_000 {
                let x = g as f64 / 10_000.0;
                worst = worst.max((p.at(x) - f(x)).abs());
            }
            let bound = (lip + 0.5 * sup) * (k as f64).powf(-1.0 / 3.0);
            assert!(worst <= bound, "k={k}: error {worst} > bound {bound}");
        }
    }

    #[test]
    fn bernstein_coefficient_bound() {
        let f = |x: f64| (x - 0.4).abs();
        let sup = 0.6;
        for k in 1..=12usize {
            let p = bernstein_fit(f, k);
            let cap =
                (2.0f64).powi(k as i32) * (1..=k).map(|i| i as f64).product::<f64>() * sup;
            for &a in p.monomial_coeffs().unwrap() {
                assert!(a.abs() <= cap + 1e-9, "k={k}: coeff {a} > cap {cap}");
            }
        }
    }

    #[test]
    fn high_degree_fit_stays_in_bernstein_basis() {
        let p = bernstein_fit(|x| x.sin(), 40);
        assert!(p.monomial_coeffs().is_none());
        assert!((p.at(0.3) - bernstein_value(&|x: f64| x.sin(), 40, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn piecewise_linear_examples() {
        let c = piecewise_linear_interpolant(&[0.7, 0.7, 0.7]);
        // Constant away from the pinned origin segment.
        assert!((c.at(0.5) - 0.7).abs() < 1e-15);
        assert!((c.at(1.0) - 0.7).abs() < 1e-15);
        assert!((c.at(0.0)).abs() < 1e-15);

        let f = piecewise_linear_interpolant(&[0.0, 1.0]);
        assert!((f.at(0.5) - 0.0).abs() < 1e-15);
        assert!((f.at(0.75) - 0.5).abs() < 1e-15);
        assert!((f.at(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_linear_hits_knots_and_lipschitz_cap() {
        use rand::Rng;
        let mut rng = crate::stream::rng_from(31, &[0]);
        let logb = 4.0f64.ln();
        let d = 8;
        let values: Vec<f64> = (0..d)
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * logb)
            .collect();
        let f = piecewise_linear_interpolant(&values);
        for (i, &v) in values.iter().enumerate() {
            assert!((f.at((i + 1) as f64 / d as f64) - v).abs() < 1e-12);
        }
        assert!(f.lipschitz() <= 2.0 * d as f64 * logb + 1e-9);
        assert!(f.sup_norm() <= logb);
    }

    /// Composite bound: Bernstein fits of eigenvalue interpolants stay
    /// within `(2d + 0.5) k^(-1/3) logb` of the table at the knots.
    #[test]
    fn bernstein_approximates_eigen_tables_at_knots() {
        use rand::Rng;
        let mut rng = crate::stream::rng_from(37, &[1]);
        let logb = 4.0f64.ln();
        let d = 8;
        for _ in 0..5 {
            let values: Vec<f64> = (0..d)
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * logb)
                .collect();
            let f = piecewise_linear_interpolant(&values);
            for k in [4usize, 16, 64] {
                let p = bernstein_fit(|x| f.at(x), k);
                let bound = (2.0 * d as f64 + 0.5) * (k as f64).powf(-1.0 / 3.0) * logb;
                for (i, &v) in values.iter().enumerate() {
                    let x = (i + 1) as f64 / d as f64;
                    let err = (p.at(x) - v).abs();
                    assert!(err <= bound, "k={k}, knot {i}: {err} > {bound}");
                }
            }
        }
    }

    #[test]
    fn deep_grad_matches_finite_differences() {
        let m = DeepReluModel::random(3, 4, 1.0, 10.0, 11);
        let x = 0.625;
        let grad = m.grad_params(x);
        let n_params: usize = m
            .layers
            .iter()
            .map(|(w, b)| w.iter().map(|r| r.len()).sum::<usize>() + b.len())
            .sum();
        assert_eq!(grad.len(), n_params);
        let h = 1e-6;
        for idx in 0..n_params {
            let mut up = m.clone();
            let mut delta = vec![0.0; n_params];
            delta[idx] = 1.0;
            up.apply_update(&delta, h);
            let mut dn = m.clone();
            dn.apply_update(&delta, -h);
            let fd = (up.forward(x) - dn.forward(x)) / (2.0 * h);
            assert!(
                (fd - grad[idx]).abs() < 1e-5,
                "param {idx}: fd {fd} vs grad {}",
                grad[idx]
            );
        }
    }

    #[test]
    fn models_serialize_with_kind_tags() {
        let m = EigenvalueModel::Shallow(ShallowModel::zeros(3, 1.0));
        let js = serde_json::to_string(&m).unwrap();
        assert!(js.contains("\"kind\":\"Shallow\""));
        let back: EigenvalueModel = serde_json::from_str(&js).unwrap();
        assert_eq!(m, back);

        let p = EigenvalueModel::Poly(bernstein_fit(|x| x * x, 2));
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("\"kind\":\"Poly\""));
    }
}
