//! Density operators, the Thompson-metric class of state pairs, and
//! seeded generators of benchmark pairs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::opmat::{
    self, diag_real, herm_eig, hermitian_part, identity, matrix_fn, operator_norm, CMatrix,
    HermitianEig, MatrixFn, C64,
};
use crate::stream::rng_from;
use crate::{Error, Result};

/// States with smallest eigenvalue at or above this floor count as
/// strictly positive; the variational solvers require it.
pub const POS_FLOOR: f64 = 1e-9;
/// PSD slack and trace tolerance for admitting a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// A d x d positive-semidefinite trace-one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    min_eig: f64,
}

impl DensityMatrix {
    /// Validate and wrap a Hermitian PSD trace-one matrix. The input is
    /// symmetrized before validation.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let mat = hermitian_part(&mat);
        let eig = herm_eig(&mat)?;
        let min_eig = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::DomainError(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        let tr = opmat::trace(&mat).re;
        if (tr - 1.0).abs() > PSD_TOL {
            return Err(Error::DomainError(format!("trace {tr} is not 1")));
        }
        Ok(Self { mat, min_eig })
    }

    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        Self::new(diag_real(probs))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: identity(d).scale(1.0 / d as f64),
            min_eig: 1.0 / d as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    /// True iff the smallest eigenvalue clears the positivity floor.
    pub fn strictly_positive(&self) -> bool {
        self.min_eig >= POS_FLOOR
    }

    pub fn eig(&self) -> Result<HermitianEig> {
        herm_eig(&self.mat)
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        if self.strictly_positive() {
            Ok(())
        } else {
            Err(Error::SingularState {
                min_eig: self.min_eig,
            })
        }
    }
}

/// A discrete probability distribution on `{1, ..., d}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassicalDist {
    probs: Vec<f64>,
}

impl ClassicalDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::BadParams("negative or non-finite probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadParams(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// A (rho, sigma) pair with its Thompson metric and optional class
/// bound `b` certifying membership in the b-bounded pair class.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub thompson: f64,
    pub class_bound_b: Option<f64>,
    pub seed: Option<u64>,
}

impl StatePair {
    pub fn new(
        rho: DensityMatrix,
        sigma: DensityMatrix,
        class_bound_b: Option<f64>,
    ) -> Result<Self> {
        let thompson = thompson_metric(&rho, &sigma)?;
        if let Some(b) = class_bound_b {
            if thompson > b.ln() + 1e-9 {
                return Err(Error::BadParams(format!(
                    "pair has Thompson metric {thompson:.6} exceeding log b = {:.6}",
                    b.ln()
                )));
            }
        }
        Ok(Self {
            rho,
            sigma,
            thompson,
            class_bound_b,
            seed: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// Max-relative entropy `log || sigma^{-1/2} rho sigma^{-1/2} ||`.
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::ShapeMismatch(format!(
            "rho dim {} vs sigma dim {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    sigma.require_positive()?;
    let s_inv_half = matrix_fn(sigma.matrix(), MatrixFn::Pow(-0.5))?;
    let conj = &s_inv_half * rho.matrix() * &s_inv_half;
    Ok(operator_norm(&hermitian_part(&conj)).ln())
}

/// Thompson metric: the larger of the two directional max-relative
/// entropies. Zero iff the states coincide; contracts under channels.
pub fn thompson_metric(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.require_positive()?;
    sigma.require_positive()?;
    let a = max_relative_entropy(rho, sigma)?;
    let b = max_relative_entropy(sigma, rho)?;
    Ok(a.max(b).max(0.0))
}

/// Spectrum from a symmetric Dirichlet(1,...,1) draw, floored away from
/// zero so downstream solvers stay well conditioned.
fn random_spectrum(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..d)
        .map(|_| -(rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln())
        .collect();
    let sum: f64 = w.iter().sum();
    let floor = 1e-4 / d as f64;
    for x in w.iter_mut() {
        *x = (*x / sum).max(floor);
    }
    let sum: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= sum;
    }
    w
}

/// Haar-distributed random unitary via QR of a Ginibre matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        // Box-Muller pair for a complex standard normal.
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        C64::new(
            r * (2.0 * std::f64::consts::PI * u2).cos(),
            r * (2.0 * std::f64::consts::PI * u2).sin(),
        )
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix column phases so the distribution is Haar.
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random full-rank state: Haar basis with Dirichlet spectrum.
pub fn random_state(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let u = random_unitary(d, rng);
    let spec = random_spectrum(d, rng);
    let lam = diag_real(&spec);
    let mat = &u * lam * u.adjoint();
    DensityMatrix::new(mat).expect("construction is valid by design")
}

/// Sample a strictly positive pair with Thompson metric at most
/// `log b`.
///
/// Two independent full-rank states are drawn, then sigma is mixed
/// toward rho along `(1-t) sigma + t rho` with a binary search on `t`.
/// Mixing toward rho is a channel that fixes rho, so the metric is
/// non-increasing in `t` and the search always terminates in the class.
pub fn sample_pair_in_class(d: usize, b: f64, rng: &mut ChaCha8Rng) -> StatePair {
    assert!(b >= 1.0, "class bound b must be >= 1");
    let log_b = b.ln();
    let rho = random_state(d, rng);
    let sigma0 = random_state(d, rng);

    let mix = |t: f64| -> DensityMatrix {
        let m = sigma0.matrix().scale(1.0 - t) + rho.matrix().scale(t);
        DensityMatrix::new(m).expect("mixture of states is a state")
    };
    let metric = |s: &DensityMatrix| thompson_metric(&rho, s).expect("full-rank by construction");

    if metric(&sigma0) <= log_b {
        return StatePair::new(rho, sigma0, Some(b)).expect("within class by check");
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if metric(&mix(mid)) <= log_b {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let sigma = mix(hi);
    StatePair::new(rho, sigma, Some(b)).expect("upper endpoint satisfies the bound")
}

/// Seeded wrapper around [`sample_pair_in_class`] that records the seed.
pub fn sample_pair_in_class_seeded(d: usize, b: f64, seed: u64) -> StatePair {
    let mut rng = rng_from(seed, &[0x57a7e]);
    let mut pair = sample_pair_in_class(d, b, &mut rng);
    pair.seed = Some(seed);
    pair
}

/// Which of the two perturbed distributions to pair with the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LecamArm {
    Q1,
    Q2,
}

/// Commuting hard-instance pair: the reference distribution puts mass
/// 1/2 on the last outcome and spreads the rest uniformly; the
/// alternative scales the bulk by `(1 -/+ eps)/b`.
pub fn lecam_pair(d: usize, b: f64, eps: f64, which: LecamArm) -> Result<StatePair> {
    if d < 2 {
        return Err(Error::BadParams("need d >= 2".into()));
    }
    if b < 2.0 {
        return Err(Error::BadParams("need b >= 2".into()));
    }
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::BadParams("need eps in (0, 0.5)".into()));
    }
    let s = match which {
        LecamArm::Q1 => 1.0 - eps,
        LecamArm::Q2 => 1.0 + eps,
    };
    let bulk = s / (b * (d - 1) as f64);
    let head = 1.0 - s / b;
    if bulk <= 0.0 || head <= 0.0 {
        return Err(Error::BadParams(format!(
            "parameters give non-positive entries (bulk {bulk}, head {head})"
        )));
    }
    let mut p = vec![1.0 / (2.0 * (d - 1) as f64); d];
    p[d - 1] = 0.5;
    let mut q = vec![bulk; d];
    q[d - 1] = head;
    let rho = DensityMatrix::from_probs(&p)?;
    let sigma = DensityMatrix::from_probs(&q)?;
    StatePair::new(rho, sigma, Some(b))
}

/// A CPTP map in Kraus form; `sum_k K_k^dag K_k = I` on the input space.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    in_dim: usize,
    out_dim: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::BadParams(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let out_dim = kraus[0].nrows();
        let in_dim = kraus[0].ncols();
        if kraus
            .iter()
            .any(|k| k.nrows() != out_dim || k.ncols() != in_dim)
        {
            return Err(Error::ShapeMismatch(
                "inconsistent Kraus operator shapes".into(),
            ));
        }
        let mut acc = CMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            acc += k.adjoint() * k;
        }
        let dev = operator_norm(&(acc - identity(in_dim)));
        if dev > 1e-8 {
            return Err(Error::BadParams(format!(
                "Kraus operators are not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(Self {
            kraus,
            in_dim,
            out_dim,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.in_dim {
            return Err(Error::ShapeMismatch(format!(
                "channel input dim {} vs state dim {}",
                self.in_dim,
                rho.dim()
            )));
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityMatrix::new(out)
    }

    /// Choi matrix `sum_ij |i><j| (x) N(|i><j|)`.
    pub fn choi(&self) -> CMatrix {
        let d = self.in_dim;
        let dd = d * self.out_dim;
        let mut j = CMatrix::zeros(dd, dd);
        for k in &self.kraus {
            let mut v = nalgebra::DVector::<C64>::zeros(dd);
            for i in 0..d {
                for o in 0..self.out_dim {
                    v[i * self.out_dim + o] = k[(o, i)];
                }
            }
            for r in 0..dd {
                for c in 0..dd {
                    j[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
        j
    }

    /// Random channel from a Haar isometry into `d * env` followed by
    /// tracing out the environment.
    pub fn random(d: usize, env: usize, rng: &mut impl Rng) -> Self {
        let big = random_unitary(d * env, rng);
        // Kraus operators are the environment slices of the isometry
        // formed by the first d columns.
        let mut kraus = Vec::with_capacity(env);
        for e in 0..env {
            let mut k = CMatrix::zeros(d, d);
            for out_row in 0..d {
                for in_col in 0..d {
                    k[(out_row, in_col)] = big[(out_row * env + e, in_col)];
                }
            }
            kraus.push(k);
        }
        Self::new(kraus).expect("isometry slices form a channel")
    }
}

/// Wire form for a state pair: flat row-major `[re, im]` entries.
#[derive(Debug, Serialize, Deserialize)]
struct PairWire {
    dim: usize,
    b: Option<f64>,
    rho: Vec<[f64; 2]>,
    sigma: Vec<[f64; 2]>,
    seed: Option<u64>,
}

fn mat_to_wire(m: &CMatrix) -> Vec<[f64; 2]> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn mat_from_wire(d: usize, w: &[[f64; 2]]) -> Result<CMatrix> {
    if w.len() != d * d {
        return Err(Error::ShapeMismatch(format!(
            "expected {} entries, got {}",
            d * d,
            w.len()
        )));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        C64::new(w[i * d + j][0], w[i * d + j][1])
    }))
}

impl StatePair {
    pub fn to_json(&self) -> String {
        let wire = PairWire {
            dim: self.dim(),
            b: self.class_bound_b,
            rho: mat_to_wire(self.rho.matrix()),
            sigma: mat_to_wire(self.sigma.matrix()),
            seed: self.seed,
        };
        serde_json::to_string(&wire).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: PairWire =
            serde_json::from_str(s).map_err(|e| Error::BadParams(format!("bad pair JSON: {e}")))?;
        let rho = DensityMatrix::new(mat_from_wire(wire.dim, &wire.rho)?)?;
        let sigma = DensityMatrix::new(mat_from_wire(wire.dim, &wire.sigma)?)?;
        let mut pair = StatePair::new(rho, sigma, wire.b)?;
        pair.seed = wire.seed;
        Ok(pair)
    }
}
