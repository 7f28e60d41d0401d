//! Total-spin sector decomposition of qubit registers and the
//! compression/embedding channels for permutation-invariant states.
//!
//! The register `(C^2)^{(x) N}` splits into blocks labelled by total
//! spin j, each a tensor product of a (2j+1)-dimensional spin space and
//! a multiplicity space spanned by the coupling histories that reach j.
//! The decomposition is built one qubit at a time with Clebsch-Gordan
//! coefficients, with multiplicity paths kept in coupling-history
//! order so bases are reproducible. Compressing keeps only the spin
//! factors; embedding pads each block with the maximally mixed state on
//! its multiplicity space. Both maps are CPTP, and on permutation-
//! invariant states they are mutually inverse.

use crate::opmat::{CMatrix, C64};
use crate::qne::{estimate, QneConfig, QneEstimate};
use crate::states::{DensityMatrix, QuantumChannel, StatePair};
use crate::stream::rng_from;
use crate::{Error, Result};

/// One total-spin sector.
#[derive(Debug, Clone)]
pub struct Sector {
    /// Twice the total spin, so half-integers stay integral.
    pub two_j: u32,
    /// Spin-space dimension 2j + 1.
    pub dim_w: usize,
    /// Multiplicity (number of coupling paths).
    pub dim_v: usize,
    /// Isometry from the sector block into the register; shape
    /// `2^N x (dim_w * dim_v)`, column index `w * dim_v + v`.
    pub isometry: CMatrix,
}

/// Full sector decomposition of an N-qubit register.
#[derive(Debug, Clone)]
pub struct SchurDecomposition {
    pub num_qubits: usize,
    /// Sectors in descending total spin.
    pub sectors: Vec<Sector>,
}

impl SchurDecomposition {
    /// Dimension of the compressed space: the sum of spin dimensions.
    pub fn compressed_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.dim_w).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Offset of each sector's block in the compressed space.
    pub fn sector_offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.sectors.len());
        let mut acc = 0;
        for s in &self.sectors {
            offs.push(acc);
            acc += s.dim_w;
        }
        offs
    }

    /// Rows (two_j, dim_w, dim_v) for reporting.
    pub fn sector_table(&self) -> Vec<(u32, usize, usize)> {
        self.sectors
            .iter()
            .map(|s| (s.two_j, s.dim_w, s.dim_v))
            .collect()
    }
}

/// Basis columns of one coupling path: matrix of shape
/// `2^k x (two_j + 1)` with column index running m = +j down to -j.
type PathBasis = CMatrix;

/// Couple one more spin-1/2 onto a path basis, producing the child with
/// total spin raised (`up = true`) or lowered.
fn couple(parent: &PathBasis, two_j: u32, up: bool) -> Option<PathBasis> {
    let tj = two_j as i64;
    if !up && tj == 0 {
        return None;
    }
    let dim_old = parent.nrows();
    let two_j_new = if up { tj + 1 } else { tj - 1 };
    let dw_new = (two_j_new + 1) as usize;
    let denom = 2.0 * (tj as f64 + 1.0);
    let mut child = CMatrix::zeros(dim_old * 2, dw_new);
    for k in 0..dw_new {
        let two_m = two_j_new - 2 * k as i64;
        // Parent column indices for m -/+ 1/2, if inside the parent band.
        let k_lo = (tj - (two_m - 1)) / 2; // parent m = m' - 1/2
        let k_hi = (tj - (two_m + 1)) / 2; // parent m = m' + 1/2
        let c_plus = (((tj + two_m + 1) as f64) / denom).sqrt();
        let c_minus = (((tj - two_m + 1) as f64) / denom).sqrt();
        let (coef_lo, coef_hi) = if up {
            (c_plus, c_minus)
        } else {
            (-c_minus, c_plus)
        };
        if (two_m - 1).abs() <= tj {
            let col = parent.column(k_lo as usize);
            for r in 0..dim_old {
                // Append |0> on the new (rightmost) qubit.
                child[(2 * r, k)] += col[r] * C64::new(coef_lo, 0.0);
            }
        }
        if (two_m + 1).abs() <= tj {
            let col = parent.column(k_hi as usize);
            for r in 0..dim_old {
                // Append |1> on the new qubit.
                child[(2 * r + 1, k)] += col[r] * C64::new(coef_hi, 0.0);
            }
        }
    }
    Some(child)
}

/// Build the sector decomposition of an N-qubit register by iterated
/// Clebsch-Gordan coupling, N between 1 and 8.
pub fn build_schur(num_qubits: usize) -> SchurDecomposition {
    assert!(
        (1..=8).contains(&num_qubits),
        "decomposition supported for 1..=8 qubits"
    );
    // sectors[two_j] = list of path bases in coupling-history order.
    let mut sectors: Vec<(u32, Vec<PathBasis>)> =
        vec![(1, vec![crate::opmat::identity(2)])];
    for _ in 1..num_qubits {
        let mut next: Vec<(u32, Vec<PathBasis>)> = Vec::new();
        let push = |two_j: u32, basis: PathBasis, acc: &mut Vec<(u32, Vec<PathBasis>)>| {
            if let Some(entry) = acc.iter_mut().find(|(t, _)| *t == two_j) {
                entry.1.push(basis);
            } else {
                acc.push((two_j, vec![basis]));
            }
        };
        // Raising couplings first, then lowering, parents in order:
        // the per-sector path order is the coupling history order.
        for (two_j, paths) in &sectors {
            for p in paths {
                if let Some(c) = couple(p, *two_j, true) {
                    push(two_j + 1, c, &mut next);
                }
            }
        }
        for (two_j, paths) in &sectors {
            for p in paths {
                if let Some(c) = couple(p, *two_j, false) {
                    push(two_j - 1, c, &mut next);
                }
            }
        }
        next.sort_by_key(|s| std::cmp::Reverse(s.0));
        sectors = next;
    }

    let dim = 1 << num_qubits;
    let built: Vec<Sector> = sectors
        .into_iter()
        .map(|(two_j, paths)| {
            let dim_w = two_j as usize + 1;
            let dim_v = paths.len();
            let mut isometry = CMatrix::zeros(dim, dim_w * dim_v);
            for (v, path) in paths.iter().enumerate() {
                for w in 0..dim_w {
                    for r in 0..dim {
                        isometry[(r, w * dim_v + v)] = path[(r, w)];
                    }
                }
            }
            Sector {
                two_j,
                dim_w,
                dim_v,
                isometry,
            }
        })
        .collect();
    let total: usize = built.iter().map(|s| s.dim_w * s.dim_v).sum();
    debug_assert_eq!(total, dim, "sector dimensions must cover the register");
    SchurDecomposition {
        num_qubits,
        sectors: built,
    }
}

/// Apply the compression channel: keep only the spin factor of every
/// sector, tracing out the multiplicity spaces.
pub fn compress(decomp: &SchurDecomposition, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != decomp.ambient_dim() {
        return Err(Error::ShapeMismatch(format!(
            "state dim {} vs register dim {}",
            rho.dim(),
            decomp.ambient_dim()
        )));
    }
    let k_dim = decomp.compressed_dim();
    let offsets = decomp.sector_offsets();
    let mut out = CMatrix::zeros(k_dim, k_dim);
    for (sector, &off) in decomp.sectors.iter().zip(&offsets) {
        let block = sector.isometry.adjoint() * rho.matrix() * &sector.isometry;
        for w in 0..sector.dim_w {
            for w2 in 0..sector.dim_w {
                let mut acc = C64::new(0.0, 0.0);
                for v in 0..sector.dim_v {
                    acc += block[(w * sector.dim_v + v, w2 * sector.dim_v + v)];
                }
                out[(off + w, off + w2)] = acc;
            }
        }
    }
    DensityMatrix::new(out)
}

/// Apply the embedding channel: project the compressed state onto the
/// sector blocks and pad each with the maximally mixed multiplicity
/// state. The output is permutation invariant.
pub fn embed(decomp: &SchurDecomposition, rho_bar: &DensityMatrix) -> Result<DensityMatrix> {
    if rho_bar.dim() != decomp.compressed_dim() {
        return Err(Error::ShapeMismatch(format!(
            "compressed state dim {} vs expected {}",
            rho_bar.dim(),
            decomp.compressed_dim()
        )));
    }
    let dim = decomp.ambient_dim();
    let offsets = decomp.sector_offsets();
    let mut out = CMatrix::zeros(dim, dim);
    for (sector, &off) in decomp.sectors.iter().zip(&offsets) {
        let inv_v = 1.0 / sector.dim_v as f64;
        // iso (R (x) I/dv) iso^dag accumulated column-by-column.
        for w in 0..sector.dim_w {
            for w2 in 0..sector.dim_w {
                let r_entry = rho_bar.matrix()[(off + w, off + w2)] * C64::new(inv_v, 0.0);
                if r_entry.norm() == 0.0 {
                    continue;
                }
                for v in 0..sector.dim_v {
                    let ca = sector.isometry.column(w * sector.dim_v + v);
                    let cb = sector.isometry.column(w2 * sector.dim_v + v);
                    for i in 0..dim {
                        for j2 in 0..dim {
                            out[(i, j2)] += ca[i] * cb[j2].conj() * r_entry;
                        }
                    }
                }
            }
        }
    }
    DensityMatrix::new(out)
}

/// The compression map as an explicit Kraus channel.
pub fn compress_channel(decomp: &SchurDecomposition) -> QuantumChannel {
    let k_dim = decomp.compressed_dim();
    let dim = decomp.ambient_dim();
    let offsets = decomp.sector_offsets();
    let mut kraus = Vec::new();
    for (sector, &off) in decomp.sectors.iter().zip(&offsets) {
        for v in 0..sector.dim_v {
            let mut k = CMatrix::zeros(k_dim, dim);
            for w in 0..sector.dim_w {
                let col = sector.isometry.column(w * sector.dim_v + v);
                for c in 0..dim {
                    k[(off + w, c)] = col[c].conj();
                }
            }
            kraus.push(k);
        }
    }
    QuantumChannel::new(kraus).expect("sector isometries are jointly unitary")
}

/// The embedding map as an explicit Kraus channel.
pub fn embed_channel(decomp: &SchurDecomposition) -> QuantumChannel {
    let k_dim = decomp.compressed_dim();
    let dim = decomp.ambient_dim();
    let offsets = decomp.sector_offsets();
    let mut kraus = Vec::new();
    for (sector, &off) in decomp.sectors.iter().zip(&offsets) {
        let scale = (sector.dim_v as f64).sqrt().recip();
        for v in 0..sector.dim_v {
            let mut k = CMatrix::zeros(dim, k_dim);
            for w in 0..sector.dim_w {
                let col = sector.isometry.column(w * sector.dim_v + v);
                for r in 0..dim {
                    k[(r, off + w)] = col[r] * C64::new(scale, 0.0);
                }
            }
            kraus.push(k);
        }
    }
    QuantumChannel::new(kraus).expect("embedding operators are trace preserving")
}

/// Permutation operator on the register basis:
/// `V(pi) |i_1 .. i_N> = |i_{pi^{-1}(1)} .. i_{pi^{-1}(N)}>`.
pub fn permutation_matrix(num_qubits: usize, perm: &[usize]) -> CMatrix {
    assert_eq!(perm.len(), num_qubits);
    let dim = 1 << num_qubits;
    let mut inv = vec![0usize; num_qubits];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let mut m = CMatrix::zeros(dim, dim);
    for basis in 0..dim {
        let mut out = 0usize;
        for k in 0..num_qubits {
            let bit = (basis >> (num_qubits - 1 - inv[k])) & 1;
            out |= bit << (num_qubits - 1 - k);
        }
        m[(out, basis)] = C64::new(1.0, 0.0);
    }
    m
}

/// Largest deviation `||V rho V^dag - rho||` over the adjacent
/// transpositions, which generate the full permutation group.
pub fn permutation_invariance_defect(rho: &DensityMatrix, num_qubits: usize) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..num_qubits.saturating_sub(1) {
        let mut perm: Vec<usize> = (0..num_qubits).collect();
        perm.swap(k, k + 1);
        let v = permutation_matrix(num_qubits, &perm);
        let conj = &v * rho.matrix() * v.adjoint();
        worst = worst.max(crate::opmat::operator_norm(&(conj - rho.matrix())));
    }
    worst
}

/// Sample a permutation-invariant pair on the register with Thompson
/// metric within `log b`: a compressed-space pair is drawn in the
/// b-bounded class and both members are embedded.
pub fn perm_invariant_sampler(num_qubits: usize, b: f64, seed: u64) -> Result<StatePair> {
    let decomp = build_schur(num_qubits);
    let mut rng = rng_from(seed, &[0x5c08]);
    let compressed = crate::states::sample_pair_in_class(decomp.compressed_dim(), b, &mut rng);
    let rho = embed(&decomp, &compressed.rho)?;
    let sigma = embed(&decomp, &compressed.sigma)?;
    let mut pair = StatePair::new(rho, sigma, Some(b))?;
    pair.seed = Some(seed);
    Ok(pair)
}

/// Tolerance on the permutation-invariance defect of inputs.
pub const PERM_INV_TOL: f64 = 1e-8;

/// Run the estimator on the compressed images of a permutation-
/// invariant pair. The grid and ansatz in `config` act on the
/// compressed space.
pub fn compressed_qne(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    decomp: &SchurDecomposition,
    config: &QneConfig,
) -> Result<QneEstimate> {
    for state in [rho, sigma] {
        let defect = permutation_invariance_defect(state, decomp.num_qubits);
        if defect > PERM_INV_TOL {
            return Err(Error::NotPermutationInvariant(defect));
        }
    }
    let r = compress(decomp, rho)?;
    let s = compress(decomp, sigma)?;
    estimate(&r, &s, config, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{CircuitAnsatz, ParamGrid};
    use crate::opmat::{herm_eig, identity, operator_norm, trace};
    use crate::oracle::{measured_rel_entropy, RenyiOrder, SolveOptions};
    use crate::qne::{InnerSolver, ModelKind, SampleReuse};
    use crate::states::random_state;

    /// Independent bookkeeping oracle: spin multiplicities from the
    /// Pascal-style recursion on (two_j -> path count).
    fn multiplicities(n: usize) -> Vec<(u32, usize)> {
        let mut counts: Vec<(i64, usize)> = vec![(1, 1)];
        for _ in 1..n {
            let mut next: std::collections::BTreeMap<i64, usize> = Default::default();
            for &(tj, c) in &counts {
                *next.entry(tj + 1).or_default() += c;
                if tj > 0 {
                    *next.entry(tj - 1).or_default() += c;
                }
            }
            counts = next.into_iter().collect();
        }
        counts
            .into_iter()
            .rev()
            .map(|(tj, c)| (tj as u32, c))
            .collect()
    }

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in all_permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.to_vec();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn group_average(rho: &DensityMatrix, n: usize) -> DensityMatrix {
        let perms = all_permutations(n);
        let mut acc = CMatrix::zeros(rho.dim(), rho.dim());
        for p in &perms {
            let v = permutation_matrix(n, p);
            acc += &v * rho.matrix() * v.adjoint();
        }
        DensityMatrix::new(acc.scale(1.0 / perms.len() as f64)).unwrap()
    }

    #[test]
    fn sector_shapes_small_registers() {
        let d2 = build_schur(2);
        let table: Vec<_> = d2.sector_table();
        assert_eq!(table, vec![(2, 3, 1), (0, 1, 1)]);
        assert_eq!(d2.compressed_dim(), 4);

        let d3 = build_schur(3);
        let table: Vec<_> = d3.sector_table();
        assert_eq!(table, vec![(3, 4, 1), (1, 2, 2)]);
        assert_eq!(d3.compressed_dim(), 6);
    }

    #[test]
    fn sector_dimensions_match_recursion_and_cap() {
        let expected_dims = [4usize, 6, 9, 12, 16, 20, 25];
        for n in 2..=8usize {
            let decomp = build_schur(n);
            let mult = multiplicities(n);
            assert_eq!(
                decomp
                    .sectors
                    .iter()
                    .map(|s| (s.two_j, s.dim_v))
                    .collect::<Vec<_>>(),
                mult,
                "multiplicities disagree at n={n}"
            );
            let total: usize = decomp.sectors.iter().map(|s| s.dim_w * s.dim_v).sum();
            assert_eq!(total, 1 << n);
            assert_eq!(decomp.compressed_dim(), expected_dims[n - 2]);
            assert!(decomp.compressed_dim() <= (n + 1) * n);
            if n >= 3 {
                assert!(decomp.compressed_dim() < 1 << n);
            }
        }
    }

    #[test]
    fn isometries_jointly_unitary() {
        for n in 1..=5usize {
            let decomp = build_schur(n);
            let dim = 1 << n;
            let mut joint = CMatrix::zeros(dim, dim);
            let mut col = 0;
            for s in &decomp.sectors {
                for c in 0..(s.dim_w * s.dim_v) {
                    for r in 0..dim {
                        joint[(r, col)] = s.isometry[(r, c)];
                    }
                    col += 1;
                }
            }
            assert_eq!(col, dim);
            let dev = operator_norm(&(joint.adjoint() * &joint - identity(dim)));
            assert!(dev <= 1e-10, "n={n}: unitarity deviation {dev:.3e}");
        }
    }

    #[test]
    fn compress_maximally_mixed() {
        for n in 2..=4usize {
            let decomp = build_schur(n);
            let mixed = DensityMatrix::maximally_mixed(1 << n);
            let c = compress(&decomp, &mixed).unwrap();
            let offsets = decomp.sector_offsets();
            for (s, &off) in decomp.sectors.iter().zip(&offsets) {
                let want = s.dim_v as f64 / (1 << n) as f64;
                for w in 0..s.dim_w {
                    for w2 in 0..s.dim_w {
                        let got = c.matrix()[(off + w, off + w2)];
                        let expect = if w == w2 { want } else { 0.0 };
                        assert!(
                            (got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12,
                            "n={n}: block entry {got} vs {expect}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn compress_preserves_trace() {
        let mut rng = rng_from(3, &[0]);
        let decomp = build_schur(3);
        for _ in 0..5 {
            let rho = random_state(8, &mut rng);
            let c = compress(&decomp, &rho).unwrap();
            assert!((trace(c.matrix()).re - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn embed_then_compress_identity_on_invariant_states() {
        let mut rng = rng_from(5, &[1]);
        for n in 2..=4usize {
            let decomp = build_schur(n);
            let rho = group_average(&random_state(1 << n, &mut rng), n);
            let back = embed(&decomp, &compress(&decomp, &rho).unwrap()).unwrap();
            let dev = operator_norm(&(back.matrix() - rho.matrix()));
            assert!(dev <= 1e-9, "n={n}: roundtrip deviation {dev:.3e}");
        }
    }

    #[test]
    fn embedded_states_are_permutation_invariant() {
        let mut rng = rng_from(7, &[2]);
        for n in 2..=4usize {
            let decomp = build_schur(n);
            let bar = random_state(decomp.compressed_dim(), &mut rng);
            let rho = embed(&decomp, &bar).unwrap();
            assert!((trace(rho.matrix()).re - 1.0).abs() < 1e-12);
            for p in all_permutations(n) {
                let v = permutation_matrix(n, &p);
                let conj = &v * rho.matrix() * v.adjoint();
                let dev = operator_norm(&(conj - rho.matrix()));
                assert!(dev <= 1e-10, "n={n}: defect {dev:.3e} for {p:?}");
            }
        }
    }

    #[test]
    fn singlet_block_embeds_to_singlet_projector() {
        let decomp = build_schur(2);
        // The spin-0 block is the last compressed coordinate.
        let mut bar = CMatrix::zeros(4, 4);
        bar[(3, 3)] = C64::new(1.0, 0.0);
        let rho = embed(&decomp, &DensityMatrix::new(bar).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = nalgebra::DVector::<C64>::zeros(4);
        psi[1] = C64::new(s, 0.0);
        psi[2] = C64::new(-s, 0.0);
        let proj = CMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj());
        let dev = operator_norm(&(rho.matrix() - &proj));
        assert!(dev <= 1e-12, "deviation {dev:.3e}");
    }

    #[test]
    fn channels_are_cptp() {
        for n in 2..=4usize {
            let decomp = build_schur(n);
            for ch in [compress_channel(&decomp), embed_channel(&decomp)] {
                let eig = herm_eig(&ch.choi()).unwrap();
                assert!(eig.values.iter().all(|&v| v >= -1e-10));
            }
        }
    }

    #[test]
    fn sampler_invariance_and_determinism() {
        for n in 2..=4usize {
            let pair = perm_invariant_sampler(n, 4.0, 11).unwrap();
            assert!(pair.thompson <= 4.0f64.ln() + 1e-9);
            assert!(permutation_invariance_defect(&pair.rho, n) <= 1e-10);
            assert!(permutation_invariance_defect(&pair.sigma, n) <= 1e-10);
        }
        let a = perm_invariant_sampler(3, 4.0, 13).unwrap();
        let b = perm_invariant_sampler(3, 4.0, 13).unwrap();
        assert_eq!(a.rho.matrix(), b.rho.matrix());
    }

    #[test]
    fn divergence_preserved_under_compression() {
        let opts = SolveOptions::default();
        for seed in [1u64, 2, 3] {
            let pair = perm_invariant_sampler(3, 4.0, seed).unwrap();
            let decomp = build_schur(3);
            let ambient = measured_rel_entropy(&pair.rho, &pair.sigma, &opts).unwrap();
            let cr = compress(&decomp, &pair.rho).unwrap();
            let cs = compress(&decomp, &pair.sigma).unwrap();
            let compressed = measured_rel_entropy(&cr, &cs, &opts).unwrap();
            assert!(
                (ambient.value - compressed.value).abs() <= 1e-5,
                "seed {seed}: ambient {} vs compressed {}",
                ambient.value,
                compressed.value
            );
        }
    }

    #[test]
    fn compressed_estimator_runs_and_rejects_bad_input() {
        let decomp = build_schur(3);
        let pair = perm_invariant_sampler(3, 4.0, 21).unwrap();
        let k = decomp.compressed_dim();
        let ansatz = CircuitAnsatz::givens_chain(k);
        let config = QneConfig {
            alpha: RenyiOrder::kl(),
            n_per_eval: 2000,
            ansatz: ansatz.clone(),
            grid: ParamGrid::seeded_random(&ansatz, 3, 5),
            model_kind: ModelKind::Shallow,
            logb: 4.0f64.ln(),
            sample_reuse: SampleReuse::FreshPerTheta,
            inner: InnerSolver::ClosedForm,
            seed: 23,
        };
        let est = compressed_qne(&pair.rho, &pair.sigma, &decomp, &config).unwrap();
        assert!(est.value.is_finite());
        assert_eq!(est.copies_consumed, 3 * 2000);

        // Identical inputs estimate near zero.
        let est0 = compressed_qne(&pair.rho, &pair.rho, &decomp, &config).unwrap();
        assert!(est0.value >= 0.0 && est0.value < 0.05, "value {}", est0.value);

        // A generic state is not permutation invariant.
        let mut rng = rng_from(31, &[3]);
        let generic = random_state(8, &mut rng);
        assert!(matches!(
            compressed_qne(&generic, &pair.sigma, &decomp, &config),
            Err(Error::NotPermutationInvariant(_))
        ));
    }

    #[test]
    fn compressed_state_is_normalized() {
        let decomp = build_schur(2);
        let pair = perm_invariant_sampler(2, 3.0, 41).unwrap();
        let c = compress(&decomp, &pair.rho).unwrap();
        assert!((trace(c.matrix()).re - 1.0).abs() < 1e-10);
        assert_eq!(c.dim(), 4);
    }
}
