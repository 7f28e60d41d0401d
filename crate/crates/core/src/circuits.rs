//! Parametrized unitaries, induced measurement distributions, outcome
//! sampling, and finite parameter grids for the outer optimization.
//!
//! Two ansaetze are provided. `GivensChain` composes d(d-1)/2 complex
//! plane rotations (one angle and one phase each) with d-1 relative
//! output phases, which parametrizes the full unitary group up to a
//! global phase and admits an exact analytic fit of any target unitary.
//! `QubitLayers` is a hardware-style circuit on 2^n dimensions: per
//! layer, Ry/Rz rotations on every qubit conjugated by a cyclically
//! shifted CNOT ladder, so the circuit is the identity at zero angles
//! while still entangling at generic parameters.

use serde::{Deserialize, Serialize};

use crate::opmat::{identity, kron, operator_norm, CMatrix, C64};
use crate::states::{ClassicalDist, DensityMatrix};
use crate::stream::rng_from;
use crate::{Error, Result};

use rand::Rng;

/// Unitarity tolerance for built circuits.
pub const TOL_UNITARY_BUILD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnsatzKind {
    /// Full parametrization of U(d) up to global phase.
    GivensChain,
    /// Layered qubit circuit on `2^num_qubits` dimensions.
    QubitLayers { num_qubits: usize, depth: usize },
}

/// A parametrized family of unitaries on a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitAnsatz {
    pub dim: usize,
    pub kind: AnsatzKind,
}

impl CircuitAnsatz {
    pub fn givens_chain(dim: usize) -> Self {
        Self {
            dim,
            kind: AnsatzKind::GivensChain,
        }
    }

    pub fn qubit_layers(num_qubits: usize, depth: usize) -> Self {
        Self {
            dim: 1 << num_qubits,
            kind: AnsatzKind::QubitLayers { num_qubits, depth },
        }
    }

    /// Number of real parameters.
    pub fn param_count(&self) -> usize {
        match self.kind {
            // (theta, phi) per plane rotation plus d-1 relative phases.
            AnsatzKind::GivensChain => self.dim * self.dim - 1,
            AnsatzKind::QubitLayers { num_qubits, depth } => 2 * num_qubits * depth,
        }
    }

    /// Elimination-ordered plane list for the Givens chain.
    fn planes(d: usize) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(d * (d - 1) / 2);
        for c in 0..d {
            for r in (c + 1)..d {
                v.push((c, r));
            }
        }
        v
    }
}

/// One parameter vector; angles in radians within [-pi, pi].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub theta: Vec<f64>,
}

/// Wrap an angle into [-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = (x + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if y < -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

impl ParamPoint {
    pub fn new(ansatz: &CircuitAnsatz, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != ansatz.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "ansatz needs {} parameters, got {}",
                ansatz.param_count(),
                theta.len()
            )));
        }
        if theta
            .iter()
            .any(|&t| !t.is_finite() || t.abs() > std::f64::consts::PI + 1e-12)
        {
            return Err(Error::BadParams("angles must lie in [-pi, pi]".into()));
        }
        Ok(Self { theta })
    }

    pub fn zeros(ansatz: &CircuitAnsatz) -> Self {
        Self {
            theta: vec![0.0; ansatz.param_count()],
        }
    }
}

/// Right-multiply `u` by the complex plane rotation on `(p, q)`:
/// G = [[cos t, -e^{-i phi} sin t], [e^{i phi} sin t, cos t]].
fn apply_givens_right(u: &mut CMatrix, p: usize, q: usize, t: f64, phi: f64) {
    let (c, s) = (t.cos(), t.sin());
    let eip = C64::new(phi.cos(), phi.sin());
    let d = u.nrows();
    for r in 0..d {
        let a = u[(r, p)];
        let b = u[(r, q)];
        u[(r, p)] = a * C64::new(c, 0.0) + b * eip * C64::new(s, 0.0);
        u[(r, q)] = -a * eip.conj() * C64::new(s, 0.0) + b * C64::new(c, 0.0);
    }
}

fn single_qubit_gate_ry(t: f64) -> CMatrix {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        ],
    )
}

fn single_qubit_gate_rz(t: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from_polar(1.0, -t / 2.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(1.0, t / 2.0),
        ],
    )
}

/// Gate on qubit `q` of an `n`-qubit register (qubit 0 is the leftmost
/// tensor factor).
fn lift_single(n: usize, q: usize, g: &CMatrix) -> CMatrix {
    let left = identity(1 << q);
    let right = identity(1 << (n - q - 1));
    kron(&kron(&left, g), &right)
}

fn cnot_matrix(n: usize, control: usize, target: usize) -> CMatrix {
    let d = 1 << n;
    let mut m = CMatrix::zeros(d, d);
    for basis in 0..d {
        let cbit = (basis >> (n - 1 - control)) & 1;
        let out = if cbit == 1 {
            basis ^ (1 << (n - 1 - target))
        } else {
            basis
        };
        m[(out, basis)] = C64::new(1.0, 0.0);
    }
    m
}

fn qubit_layer_entangler(n: usize, offset: usize) -> CMatrix {
    let mut e = identity(1 << n);
    if n >= 2 {
        for k in 0..(n - 1) {
            let c = (offset + k) % n;
            let t = (offset + k + 1) % n;
            e = cnot_matrix(n, c, t) * e;
        }
    }
    e
}

/// Build the unitary for the given parameters; zero parameters yield
/// the identity for both ansatz kinds.
pub fn build_unitary(ansatz: &CircuitAnsatz, point: &ParamPoint) -> Result<CMatrix> {
    if point.theta.len() != ansatz.param_count() {
        return Err(Error::ShapeMismatch(format!(
            "ansatz needs {} parameters, got {}",
            ansatz.param_count(),
            point.theta.len()
        )));
    }
    match ansatz.kind {
        AnsatzKind::GivensChain => {
            let d = ansatz.dim;
            let planes = CircuitAnsatz::planes(d);
            let mut u = identity(d);
            for (k, &(p, q)) in planes.iter().enumerate() {
                let t = point.theta[2 * k];
                let phi = point.theta[2 * k + 1];
                apply_givens_right(&mut u, p, q, t, phi);
            }
            // Relative output phases on columns 1..d.
            let base = 2 * planes.len();
            for j in 1..d {
                let phase = C64::from_polar(1.0, point.theta[base + j - 1]);
                for r in 0..d {
                    u[(r, j)] *= phase;
                }
            }
            Ok(u)
        }
        AnsatzKind::QubitLayers { num_qubits, depth } => {
            let mut u = identity(1 << num_qubits);
            for layer in 0..depth {
                let mut rot = identity(1 << num_qubits);
                for q in 0..num_qubits {
                    let a = point.theta[2 * (layer * num_qubits + q)];
                    let b = point.theta[2 * (layer * num_qubits + q) + 1];
                    let g = single_qubit_gate_rz(b) * single_qubit_gate_ry(a);
                    rot = lift_single(num_qubits, q, &g) * rot;
                }
                let e = qubit_layer_entangler(num_qubits, layer);
                u = &e * rot * e.adjoint() * u;
            }
            Ok(u)
        }
    }
}

/// Outcome probabilities of measuring `state` in the basis given by the
/// columns of `u`: the diagonal of `U^dag rho U`, clipped at zero and
/// renormalized.
pub fn measurement_dist(u: &CMatrix, state: &DensityMatrix) -> Result<ClassicalDist> {
    if u.nrows() != state.dim() || u.ncols() != state.dim() {
        return Err(Error::ShapeMismatch(format!(
            "unitary is {}x{}, state dim {}",
            u.nrows(),
            u.ncols(),
            state.dim()
        )));
    }
    let d = state.dim();
    let mut probs = Vec::with_capacity(d);
    for i in 0..d {
        let col = u.column(i);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for c in 0..d {
                row += state.matrix()[(r, c)] * col[c];
            }
            acc += col[r].conj() * row;
        }
        probs.push(acc.re.max(0.0));
    }
    let sum: f64 = probs.iter().sum();
    debug_assert!(
        (sum - 1.0).abs() < 1e-9,
        "clip moved probability mass by {:.3e}",
        (sum - 1.0).abs()
    );
    for p in probs.iter_mut() {
        *p /= sum;
    }
    ClassicalDist::new(probs)
}

/// Which state a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeSource {
    Rho,
    Sigma,
}

/// A batch of i.i.d. measurement outcomes with replay provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeSample {
    /// 0-based outcome indices into the distribution.
    pub outcomes: Vec<u32>,
    pub source: OutcomeSource,
    pub theta: ParamPoint,
    pub seed: u64,
}

/// Draw `n` i.i.d. outcomes by inverse-CDF on a counter-based stream;
/// identical (dist, n, seed) yield identical samples.
pub fn sample_outcomes(
    dist: &ClassicalDist,
    n: usize,
    source: OutcomeSource,
    theta: &ParamPoint,
    seed: u64,
) -> OutcomeSample {
    assert!(n >= 1, "need at least one draw");
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist.probs() {
        acc += p;
        cdf.push(acc);
    }
    let last = dist.len() as u32 - 1;
    let mut rng = rng_from(seed, &[0x07c0]);
    let mut outcomes = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let mut idx = last;
        for (i, &c) in cdf.iter().enumerate() {
            if u < c {
                idx = i as u32;
                break;
            }
        }
        outcomes.push(idx);
    }
    OutcomeSample {
        outcomes,
        source,
        theta: theta.clone(),
        seed,
    }
}

/// How a grid was constructed; recorded for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridProvenance {
    Uniform {
        resolution: usize,
    },
    SeededRandom {
        count: usize,
        seed: u64,
    },
    Singleton,
    Augmented {
        base: Box<GridProvenance>,
        extra: usize,
    },
}

/// A finite, duplicate-free set of parameter points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub points: Vec<ParamPoint>,
    pub provenance: GridProvenance,
}

impl ParamGrid {
    pub fn singleton(point: ParamPoint) -> Self {
        Self {
            points: vec![point],
            provenance: GridProvenance::Singleton,
        }
    }

    pub fn seeded_random(ansatz: &CircuitAnsatz, count: usize, seed: u64) -> Self {
        assert!(count >= 1, "grid must be nonempty");
        let mut rng = rng_from(seed, &[0x9a1d]);
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let theta: Vec<f64> = (0..ansatz.param_count())
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * std::f64::consts::PI)
                .collect();
            let p = ParamPoint { theta };
            if !points.contains(&p) {
                points.push(p);
            }
        }
        Self {
            points,
            provenance: GridProvenance::SeededRandom { count, seed },
        }
    }

    /// Axis-uniform grid with the given per-axis resolution. Intended
    /// for very small parameter counts; the total size is capped.
    pub fn uniform(ansatz: &CircuitAnsatz, resolution: usize) -> Result<Self> {
        let k = ansatz.param_count();
        let total = (resolution as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
        if resolution < 1 || total > 100_000 {
            return Err(Error::BadParams(format!(
                "uniform grid of resolution {resolution} over {k} axes is too large"
            )));
        }
        let mut points = Vec::with_capacity(total as usize);
        let mut digits = vec![0usize; k];
        loop {
            let theta: Vec<f64> = digits
                .iter()
                .map(|&g| {
                    if resolution == 1 {
                        0.0
                    } else {
                        -std::f64::consts::PI
                            + 2.0 * std::f64::consts::PI * g as f64 / resolution as f64
                    }
                })
                .collect();
            let p = ParamPoint { theta };
            if !points.contains(&p) {
                points.push(p);
            }
            let mut carry = k;
            for i in (0..k).rev() {
                digits[i] += 1;
                if digits[i] < resolution {
                    carry = i;
                    break;
                }
                digits[i] = 0;
            }
            if carry == k {
                break;
            }
        }
        Ok(Self {
            points,
            provenance: GridProvenance::Uniform { resolution },
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Phase-aligned operator-norm distance `min_phi ||a - e^{i phi} b||`.
pub fn unitary_distance_phase_aligned(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = crate::opmat::trace(&(b.adjoint() * a));
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    operator_norm(&(a - b.scale(1.0) * phase))
}

/// Exact Givens-chain fit: eliminate the lower triangle of the target
/// with plane rotations, collect the residual diagonal phases, and read
/// the chain parameters off the inverse factors.
fn fit_givens_exact(ansatz: &CircuitAnsatz, u_star: &CMatrix) -> ParamPoint {
    let d = ansatz.dim;
    let planes = CircuitAnsatz::planes(d);
    let mut a = u_star.clone();
    let mut rot_params = Vec::with_capacity(planes.len());
    for &(p, q) in &planes {
        let top = a[(p, p)];
        let bot = a[(q, p)];
        let (t, phi) = if bot.norm() < 1e-300 {
            (0.0, 0.0)
        } else if top.norm() < 1e-300 {
            (std::f64::consts::FRAC_PI_2, 0.0)
        } else {
            // Zero the (q, p) entry: e^{i phi} tan t = -bot/top.
            let ratio = -bot / top;
            (ratio.norm().atan(), ratio.arg())
        };
        // Left-multiply by G(t, phi) acting on rows (p, q).
        let (c, s) = (t.cos(), t.sin());
        let eip = C64::from_polar(1.0, phi);
        for col in 0..d {
            let x = a[(p, col)];
            let y = a[(q, col)];
            a[(p, col)] = x * C64::new(c, 0.0) - y * eip.conj() * C64::new(s, 0.0);
            a[(q, col)] = x * eip * C64::new(s, 0.0) + y * C64::new(c, 0.0);
        }
        rot_params.push((t, phi));
    }
    // Now `a` is diagonal with unit-modulus entries; the chain matches
    // u_star up to the global phase of the first diagonal entry.
    let delta0 = a[(0, 0)].arg();
    let mut theta = Vec::with_capacity(ansatz.param_count());
    for &(t, phi) in &rot_params {
        // The ansatz applies the inverse rotation G(t, phi)^dag = G(-t, phi).
        theta.push(wrap_angle(-t));
        theta.push(wrap_angle(phi));
    }
    for j in 1..d {
        theta.push(wrap_angle(a[(j, j)].arg() - delta0));
    }
    ParamPoint { theta }
}

/// Numerical fit by multistart Adam on the squared trace overlap, with
/// central-difference gradients. Works for any ansatz kind.
fn fit_numeric(
    ansatz: &CircuitAnsatz,
    u_star: &CMatrix,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> ParamPoint {
    let k = ansatz.param_count();
    let overlap = |theta: &[f64]| -> f64 {
        let p = ParamPoint {
            theta: theta.to_vec(),
        };
        let u = build_unitary(ansatz, &p).expect("valid parameter length");
        crate::opmat::trace(&(u.adjoint() * u_star)).norm_sqr()
    };
    let mut rng = rng_from(seed, &[0x0f17]);
    let mut best_theta = vec![0.0; k];
    let mut best_val = overlap(&best_theta);
    for _ in 0..restarts {
        let mut theta: Vec<f64> = (0..k)
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * std::f64::consts::PI)
            .collect();
        let (mut m, mut v) = (vec![0.0; k], vec![0.0; k]);
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let h = 1e-5;
        for it in 0..iters {
            let lr = 0.1 / (1.0 + it as f64 / 200.0);
            for i in 0..k {
                let save = theta[i];
                theta[i] = save + h;
                let up = overlap(&theta);
                theta[i] = save - h;
                let dn = overlap(&theta);
                theta[i] = save;
                let g = (up - dn) / (2.0 * h);
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let mh = m[i] / (1.0 - b1.powi(it as i32 + 1));
                let vh = v[i] / (1.0 - b2.powi(it as i32 + 1));
                theta[i] += lr * mh / (vh.sqrt() + eps);
            }
        }
        for t in theta.iter_mut() {
            *t = wrap_angle(*t);
        }
        let val = overlap(&theta);
        if val > best_val {
            best_val = val;
            best_theta = theta;
        }
    }
    ParamPoint { theta: best_theta }
}

/// Fit a parameter point to the target unitary; returns the point and
/// the achieved phase-aligned operator-norm distance.
pub fn fit_unitary(
    ansatz: &CircuitAnsatz,
    u_star: &CMatrix,
    seed: u64,
) -> Result<(ParamPoint, f64)> {
    if u_star.nrows() != ansatz.dim || u_star.ncols() != ansatz.dim {
        return Err(Error::ShapeMismatch(format!(
            "target is {}x{}, ansatz dim {}",
            u_star.nrows(),
            u_star.ncols(),
            ansatz.dim
        )));
    }
    let point = match ansatz.kind {
        AnsatzKind::GivensChain => fit_givens_exact(ansatz, u_star),
        AnsatzKind::QubitLayers { .. } => fit_numeric(ansatz, u_star, 40, 600, seed),
    };
    let u = build_unitary(ansatz, &point)?;
    let delta = unitary_distance_phase_aligned(u_star, &u);
    Ok((point, delta))
}

/// Augment a grid with a point fitted to `u_star`; errors if the
/// achieved covering distance exceeds `delta_cap`.
pub fn grid_with_oracle(
    base: &ParamGrid,
    ansatz: &CircuitAnsatz,
    u_star: &CMatrix,
    delta_cap: Option<f64>,
    seed: u64,
) -> Result<(ParamGrid, f64)> {
    let (point, delta) = fit_unitary(ansatz, u_star, seed)?;
    if let Some(cap) = delta_cap {
        if delta > cap {
            return Err(Error::FitFailed {
                achieved: delta,
                cap,
            });
        }
    }
    let mut points = base.points.clone();
    if !points.contains(&point) {
        points.push(point);
    }
    Ok((
        ParamGrid {
            points,
            provenance: GridProvenance::Augmented {
                base: Box::new(base.provenance.clone()),
                extra: 1,
            },
        },
        delta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_state, random_unitary};
    use crate::stream::rng_from;

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    #[test]
    fn zero_params_give_identity() {
        for ansatz in [
            CircuitAnsatz::givens_chain(2),
            CircuitAnsatz::givens_chain(5),
            CircuitAnsatz::qubit_layers(1, 2),
            CircuitAnsatz::qubit_layers(3, 2),
        ] {
            let u = build_unitary(&ansatz, &ParamPoint::zeros(&ansatz)).unwrap();
            assert!(max_abs_diff(&u, &identity(ansatz.dim)) < 1e-14);
        }
    }

    #[test]
    fn built_circuits_are_unitary() {
        let mut rng = rng_from(3, &[0]);
        for ansatz in [
            CircuitAnsatz::givens_chain(4),
            CircuitAnsatz::qubit_layers(2, 3),
        ] {
            for _ in 0..10 {
                let theta: Vec<f64> = (0..ansatz.param_count())
                    .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * std::f64::consts::PI)
                    .collect();
                let u = build_unitary(&ansatz, &ParamPoint { theta }).unwrap();
                let dev = operator_norm(&(u.adjoint() * &u - identity(ansatz.dim)));
                assert!(dev <= TOL_UNITARY_BUILD, "unitarity deviation {dev:.3e}");
            }
        }
    }

    #[test]
    fn givens_single_rotation_is_real() {
        let ansatz = CircuitAnsatz::givens_chain(2);
        let point = ParamPoint::new(&ansatz, vec![std::f64::consts::FRAC_PI_2, 0.0, 0.0]).unwrap();
        let u = build_unitary(&ansatz, &point).unwrap();
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!(max_abs_diff(&u, &expect) < 1e-12);
        let g = u.adjoint() * &u;
        assert!(max_abs_diff(&g, &identity(2)) < 1e-12);
    }

    #[test]
    fn single_qubit_ry_pi_flips_ket_zero() {
        let ansatz = CircuitAnsatz::qubit_layers(1, 1);
        let point = ParamPoint::new(&ansatz, vec![std::f64::consts::PI, 0.0]).unwrap();
        let u = build_unitary(&ansatz, &point).unwrap();
        assert!((u[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(u[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn measurement_dist_examples() {
        let rho = DensityMatrix::from_probs(&[0.3, 0.7]).unwrap();
        let dist = measurement_dist(&identity(2), &rho).unwrap();
        assert!((dist.probs()[0] - 0.3).abs() < 1e-14);
        assert!((dist.probs()[1] - 0.7).abs() < 1e-14);

        // Hadamard on |0><0| gives the uniform distribution.
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ],
        );
        let pure0 = DensityMatrix::from_probs(&[1.0, 0.0]).unwrap();
        let dist = measurement_dist(&h, &pure0).unwrap();
        assert!((dist.probs()[0] - 0.5).abs() < 1e-12);
        assert!((dist.probs()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_dist_sums_to_one() {
        let mut rng = rng_from(5, &[1]);
        for _ in 0..10 {
            let u = random_unitary(4, &mut rng);
            let rho = random_state(4, &mut rng);
            let dist = measurement_dist(&u, &rho).unwrap();
            let s: f64 = dist.probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let ansatz = CircuitAnsatz::givens_chain(4);
        let theta = ParamPoint::zeros(&ansatz);
        let dist = ClassicalDist::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let s = sample_outcomes(&dist, 100, OutcomeSource::Rho, &theta, 7);
        assert!(s.outcomes.iter().all(|&i| i == 2));

        let d2 = ClassicalDist::new(vec![0.5, 0.5]).unwrap();
        let a = sample_outcomes(&d2, 50, OutcomeSource::Sigma, &theta, 11);
        let b = sample_outcomes(&d2, 50, OutcomeSource::Sigma, &theta, 11);
        assert_eq!(a.outcomes, b.outcomes);
        let c = sample_outcomes(&d2, 50, OutcomeSource::Sigma, &theta, 12);
        assert_ne!(a.outcomes, c.outcomes);
    }

    #[test]
    fn sampling_frequencies_match_law_of_large_numbers() {
        let ansatz = CircuitAnsatz::givens_chain(2);
        let theta = ParamPoint::zeros(&ansatz);
        let dist = ClassicalDist::new(vec![0.5, 0.5]).unwrap();
        let s = sample_outcomes(&dist, 100_000, OutcomeSource::Rho, &theta, 42);
        let ones = s.outcomes.iter().filter(|&&i| i == 1).count() as f64;
        let freq = ones / 100_000.0;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn oracle_fit_identity_gives_zero_point() {
        let ansatz = CircuitAnsatz::givens_chain(3);
        let base = ParamGrid::seeded_random(&ansatz, 2, 5);
        let (grid, delta) = grid_with_oracle(&base, &ansatz, &identity(3), Some(1e-9), 1).unwrap();
        assert_eq!(grid.len(), 3);
        assert!(delta <= 1e-12, "delta {delta:.3e}");
        let fitted = &grid.points[2];
        assert!(fitted.theta.iter().all(|&t| t.abs() < 1e-12));
    }

    #[test]
    fn givens_fit_roundtrip() {
        let mut rng = rng_from(9, &[2]);
        let ansatz = CircuitAnsatz::givens_chain(4);
        let theta: Vec<f64> = (0..ansatz.param_count())
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * std::f64::consts::PI)
            .collect();
        let target = build_unitary(&ansatz, &ParamPoint { theta }).unwrap();
        let (_, delta) = fit_unitary(&ansatz, &target, 3).unwrap();
        assert!(delta <= 1e-6, "roundtrip delta {delta:.3e}");
    }

    #[test]
    fn givens_fit_covers_haar_targets() {
        let mut rng = rng_from(11, &[3]);
        for d in [2, 3, 5] {
            let ansatz = CircuitAnsatz::givens_chain(d);
            let target = random_unitary(d, &mut rng);
            let (point, delta) = fit_unitary(&ansatz, &target, 5).unwrap();
            assert!(delta <= 1e-6, "d={d}: delta {delta:.3e}");
            assert!(point
                .theta
                .iter()
                .all(|&t| t.abs() <= std::f64::consts::PI + 1e-12));
        }
    }

    #[test]
    fn qubit_layers_fit_roundtrip() {
        let mut rng = rng_from(13, &[4]);
        let ansatz = CircuitAnsatz::qubit_layers(2, 1);
        let theta: Vec<f64> = (0..ansatz.param_count())
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * 1.5)
            .collect();
        let target = build_unitary(&ansatz, &ParamPoint { theta }).unwrap();
        let (_, delta) = fit_unitary(&ansatz, &target, 7).unwrap();
        assert!(delta <= 1e-6, "roundtrip delta {delta:.3e}");
    }

    #[test]
    fn fit_failure_surfaces() {
        let mut rng = rng_from(17, &[5]);
        // One layer on two qubits cannot reach a generic Haar unitary.
        let ansatz = CircuitAnsatz::qubit_layers(2, 1);
        let target = random_unitary(4, &mut rng);
        let base = ParamGrid::seeded_random(&ansatz, 1, 3);
        let res = grid_with_oracle(&base, &ansatz, &target, Some(1e-8), 9);
        assert!(matches!(res, Err(Error::FitFailed { .. })));
    }

    #[test]
    fn grids_have_no_duplicates_and_serialize() {
        let ansatz = CircuitAnsatz::givens_chain(2);
        let g = ParamGrid::seeded_random(&ansatz, 8, 21);
        for (i, p) in g.points.iter().enumerate() {
            for q in &g.points[i + 1..] {
                assert_ne!(p, q);
            }
        }
        let js = serde_json::to_string(&g).unwrap();
        let back: ParamGrid = serde_json::from_str(&js).unwrap();
        assert_eq!(g, back);

        let u = ParamGrid::uniform(&CircuitAnsatz::qubit_layers(1, 1), 4).unwrap();
        assert!(u.len() <= 16 && !u.is_empty());
    }
}
