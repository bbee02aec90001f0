//! Ising problem instances and the annealing Hamiltonian.
//!
//! A basis state is an index `i` in `0..2^n`. Bit `k` of `i` encodes spin
//! `k`: a 0 bit is spin up (+1), a 1 bit is spin down (-1). Index 0 is the
//! all-up state. The diagonal (QUBO) Hamiltonian is
//! `H_c = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i`, the driver is the
//! uniform transverse field `H_q = -sum_i X_i`, and the annealing
//! Hamiltonian is `H(s) = s H_c + (1-s) H_q`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest spin count accepted by the checked constructors. State vectors
/// have `2^n` entries, so this keeps everything desk-scale.
pub const DEFAULT_SIZE_CAP: usize = 16;

/// Relative tolerance used to treat two classical energies as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IsingError {
    #[error("spin count {n} exceeds the size cap {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("spin count must be at least {min}, got {n}")]
    TooFewSpins { n: usize, min: usize },
    #[error("coupling matrix for {n} spins needs {expected} entries, got {got}")]
    BadCouplingShape { n: usize, expected: usize, got: usize },
    #[error("couplings must be symmetric: J[{i}][{j}] = {upper} but J[{j}][{i}] = {lower}")]
    AsymmetricCoupling { i: usize, j: usize, upper: f64, lower: f64 },
    #[error("coupling diagonal must be zero: J[{i}][{i}] = {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("field vector must have length {n}, got {got}")]
    BadFieldLength { n: usize, got: usize },
    #[error("coupling entry ({i}, {j}) out of range for {n} spins")]
    CouplingOutOfRange { i: usize, j: usize, n: usize },
    #[error("duplicate coupling entry for pair ({i}, {j})")]
    DuplicateCoupling { i: usize, j: usize },
    #[error("non-finite value in instance data")]
    NonFinite,
    #[error("state vector must have length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("instance JSON: {0}")]
    Json(String),
}

/// Couplings and local fields defining one diagonal Ising Hamiltonian.
///
/// Immutable after construction; safe to share read-only across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    n: usize,
    /// Row-major `n x n` symmetric matrix with zero diagonal.
    couplings: Vec<f64>,
    fields: Vec<f64>,
    label: String,
}

impl IsingInstance {
    /// Build an instance from a full `n x n` coupling matrix (row-major) and
    /// a field vector, validating symmetry, zero diagonal, and the size cap.
    pub fn new(
        n: usize,
        couplings: Vec<f64>,
        fields: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self, IsingError> {
        if n < 1 {
            return Err(IsingError::TooFewSpins { n, min: 1 });
        }
        if n > DEFAULT_SIZE_CAP {
            return Err(IsingError::SizeCap {
                n,
                cap: DEFAULT_SIZE_CAP,
            });
        }
        if couplings.len() != n * n {
            return Err(IsingError::BadCouplingShape {
                n,
                expected: n * n,
                got: couplings.len(),
            });
        }
        if fields.len() != n {
            return Err(IsingError::BadFieldLength {
                n,
                got: fields.len(),
            });
        }
        if couplings.iter().chain(fields.iter()).any(|v| !v.is_finite()) {
            return Err(IsingError::NonFinite);
        }
        for i in 0..n {
            let d = couplings[i * n + i];
            if d != 0.0 {
                return Err(IsingError::NonzeroDiagonal { i, value: d });
            }
            for j in (i + 1)..n {
                let upper = couplings[i * n + j];
                let lower = couplings[j * n + i];
                if upper != lower {
                    return Err(IsingError::AsymmetricCoupling { i, j, upper, lower });
                }
            }
        }
        Ok(Self {
            n,
            couplings,
            fields,
            label: label.into(),
        })
    }

    /// Build an instance from upper-triangle `(i, j, J_ij)` entries; the
    /// mirrored entries are filled in automatically.
    pub fn from_pairs(
        n: usize,
        pairs: &[(usize, usize, f64)],
        fields: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self, IsingError> {
        if n < 1 {
            return Err(IsingError::TooFewSpins { n, min: 1 });
        }
        if n > DEFAULT_SIZE_CAP {
            return Err(IsingError::SizeCap {
                n,
                cap: DEFAULT_SIZE_CAP,
            });
        }
        let mut couplings = vec![0.0; n * n];
        let mut seen = vec![false; n * n];
        for &(i, j, v) in pairs {
            if i >= n || j >= n || i == j {
                return Err(IsingError::CouplingOutOfRange { i, j, n });
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if seen[a * n + b] {
                return Err(IsingError::DuplicateCoupling { i: a, j: b });
            }
            seen[a * n + b] = true;
            couplings[a * n + b] = v;
            couplings[b * n + a] = v;
        }
        Self::new(n, couplings, fields, label)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Nonzero upper-triangle couplings as `(i, j, J_ij)` with `i < j`.
    pub fn pair_couplings(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.coupling(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Spin value (+1 or -1) of spin `k` in basis state `state`.
    #[inline]
    pub fn spin(state: usize, k: usize) -> f64 {
        if state >> k & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Classical energy of one basis state.
    pub fn energy_of_state(&self, state: usize) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            let si = Self::spin(state, i);
            e -= self.fields[i] * si;
            for j in (i + 1)..self.n {
                let jij = self.couplings[i * self.n + j];
                if jij != 0.0 {
                    e -= jij * si * Self::spin(state, j);
                }
            }
        }
        e
    }

    pub fn to_json_string(&self) -> String {
        let repr = InstanceJson {
            n: self.n,
            couplings: self.pair_couplings(),
            fields: self.fields.clone(),
            label: self.label.clone(),
        };
        serde_json::to_string_pretty(&repr).expect("instance serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Self, IsingError> {
        let repr: InstanceJson =
            serde_json::from_str(text).map_err(|e| IsingError::Json(e.to_string()))?;
        Self::from_pairs(repr.n, &repr.couplings, repr.fields, repr.label)
    }
}

/// On-disk instance schema: `{"n", "couplings": [[i, j, value]...], "fields", "label"}`.
#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
    label: String,
}

/// Infinite-range ferromagnet: every pair coupled with `J = 1/4`, no fields.
pub fn husimi_temperley(n: usize) -> Result<IsingInstance, IsingError> {
    if n < 2 {
        return Err(IsingError::TooFewSpins { n, min: 2 });
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, 0.25));
        }
    }
    IsingInstance::from_pairs(n, &pairs, vec![0.0; n], format!("husimi-temperley(n={n})"))
}

/// Eight-spin frustrated model with a 17-fold degenerate ground manifold:
/// a ferromagnetic four-spin core ring (spins 0-3, bonds 0-1-2-3-0), one
/// outer spin hung off each core spin (4-7), all bonds `J = 1`, fields +1
/// on the core and -1 on the outer spins. The ground states split into a
/// 16-state cluster (core all up) and the isolated all-down state.
pub fn quantum_signature() -> IsingInstance {
    let mut pairs = Vec::new();
    for k in 0..4 {
        pairs.push((k, (k + 1) % 4, 1.0));
        pairs.push((k, k + 4, 1.0));
    }
    let mut fields = vec![1.0; 4];
    fields.extend_from_slice(&[-1.0; 4]);
    IsingInstance::from_pairs(8, &pairs, fields, "quantum-signature")
        .expect("fixed 8-spin model is valid")
}

/// Infinite-range spin glass: couplings drawn i.i.d. from `N(0, 1/n)` for
/// `i < j`, zero fields. The same seed always reproduces the same instance.
pub fn sk_random(n: usize, seed: u64) -> Result<IsingInstance, IsingError> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    if n < 2 {
        return Err(IsingError::TooFewSpins { n, min: 2 });
    }
    if n > DEFAULT_SIZE_CAP {
        return Err(IsingError::SizeCap {
            n,
            cap: DEFAULT_SIZE_CAP,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / n as f64).sqrt()).expect("valid std dev");
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, normal.sample(&mut rng)));
        }
    }
    IsingInstance::from_pairs(n, &pairs, vec![0.0; n], format!("sk(n={n},seed={seed})"))
}

/// All `2^n` classical energies plus the identified ground set.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    energies: Vec<f64>,
    ground_energy: f64,
    ground_indices: Vec<usize>,
    tie_tolerance: f64,
}

impl SpectrumTable {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, state: usize) -> f64 {
        self.energies[state]
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn ground_indices(&self) -> &[usize] {
        &self.ground_indices
    }

    /// Absolute tolerance below which two energies count as tied.
    pub fn tie_tolerance(&self) -> f64 {
        self.tie_tolerance
    }

    /// Distinct energy levels in ascending order, each with its basis states.
    pub fn levels(&self) -> Vec<EnergyLevel> {
        let mut order: Vec<usize> = (0..self.energies.len()).collect();
        order.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]));
        let mut levels: Vec<EnergyLevel> = Vec::new();
        for idx in order {
            let e = self.energies[idx];
            match levels.last_mut() {
                Some(level) if (e - level.energy).abs() <= self.tie_tolerance => {
                    level.indices.push(idx);
                }
                _ => levels.push(EnergyLevel {
                    energy: e,
                    indices: vec![idx],
                }),
            }
        }
        levels
    }
}

/// One degenerate classical level.
#[derive(Debug, Clone)]
pub struct EnergyLevel {
    pub energy: f64,
    pub indices: Vec<usize>,
}

/// Enumerate the classical energy of every basis state exactly and identify
/// the ground set within the relative degeneracy tolerance.
pub fn classical_energies(inst: &IsingInstance) -> SpectrumTable {
    let dim = inst.dim();
    let mut energies = Vec::with_capacity(dim);
    let mut max_abs: f64 = 0.0;
    for state in 0..dim {
        let e = inst.energy_of_state(state);
        max_abs = max_abs.max(e.abs());
        energies.push(e);
    }
    let ground_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let tie_tolerance = DEGENERACY_REL_TOL * max_abs.max(1.0);
    let ground_indices = (0..dim)
        .filter(|&i| (energies[i] - ground_energy).abs() <= tie_tolerance)
        .collect();
    SpectrumTable {
        energies,
        ground_energy,
        ground_indices,
        tie_tolerance,
    }
}

/// Matrix-free application of `w_c H_c + w_q H_q` against a state vector,
/// with the diagonal energies precomputed once.
pub struct HamiltonianOp<'a> {
    n: usize,
    energies: &'a [f64],
}

impl<'a> HamiltonianOp<'a> {
    pub fn new(inst: &IsingInstance, spectrum: &'a SpectrumTable) -> Result<Self, IsingError> {
        if spectrum.dim() != inst.dim() {
            return Err(IsingError::DimensionMismatch {
                expected: inst.dim(),
                got: spectrum.dim(),
            });
        }
        Ok(Self {
            n: inst.n(),
            energies: spectrum.energies(),
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `out = (w_c H_c + w_q H_q) v`. The diagonal scales by `w_c E_i`; the
    /// transverse part subtracts `w_q` times the amplitude at each
    /// single-bit-flipped index.
    pub fn apply_weighted_into(&self, w_c: f64, w_q: f64, v: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        for i in 0..v.len() {
            let mut acc = v[i] * (w_c * self.energies[i]);
            for k in 0..self.n {
                acc -= v[i ^ (1 << k)] * w_q;
            }
            out[i] = acc;
        }
    }

    /// `out = H(s) v` with `H(s) = s H_c + (1-s) H_q`.
    pub fn apply_into(&self, s: f64, v: &[Complex64], out: &mut [Complex64]) {
        self.apply_weighted_into(s, 1.0 - s, v, out);
    }
}

/// Apply the annealing Hamiltonian `H(s) = s H_c + (1-s) H_q` to `v`.
///
/// Convenience wrapper that enumerates the spectrum on each call; hot loops
/// should hold a [`HamiltonianOp`] instead.
pub fn apply_total_hamiltonian(
    inst: &IsingInstance,
    s: f64,
    v: &[Complex64],
) -> Result<Vec<Complex64>, IsingError> {
    if v.len() != inst.dim() {
        return Err(IsingError::DimensionMismatch {
            expected: inst.dim(),
            got: v.len(),
        });
    }
    let spectrum = classical_energies(inst);
    let op = HamiltonianOp::new(inst, &spectrum)?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    op.apply_weighted_into(s, 1.0 - s, v, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {a} and {b} to agree within {tol}"
        );
    }

    #[test]
    fn single_spin_field_spectrum() {
        let inst = IsingInstance::new(1, vec![0.0], vec![1.0], "one-spin").unwrap();
        let table = classical_energies(&inst);
        assert_eq!(table.energies(), &[-1.0, 1.0]);
        assert_eq!(table.ground_indices(), &[0]);
        assert_eq!(table.ground_energy(), -1.0);
    }

    #[test]
    fn husimi_temperley_structure() {
        let inst = husimi_temperley(4).unwrap();
        let pairs = inst.pair_couplings();
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|&(_, _, v)| v == 0.25));
        assert!(inst.fields().iter().all(|&h| h == 0.0));

        let two = husimi_temperley(2).unwrap();
        assert_eq!(two.pair_couplings(), vec![(0, 1, 0.25)]);

        assert!(husimi_temperley(1).is_err());
    }

    #[test]
    fn husimi_temperley_levels() {
        // 16 states collapse onto three degenerate levels; the ground level
        // is the pair of fully aligned states.
        let table = classical_energies(&husimi_temperley(4).unwrap());
        let levels = table.levels();
        assert_eq!(levels.len(), 3);
        let degeneracies: Vec<usize> = levels.iter().map(|l| l.indices.len()).collect();
        assert_eq!(degeneracies, vec![2, 8, 6]);
        assert_close(levels[0].energy, -1.5, 1e-12);
        assert_close(levels[1].energy, 0.0, 1e-12);
        assert_close(levels[2].energy, 0.5, 1e-12);
        assert_eq!(table.ground_indices(), &[0, 15]);
    }

    #[test]
    fn quantum_signature_structure() {
        let inst = quantum_signature();
        let pairs = inst.pair_couplings();
        assert_eq!(pairs.len(), 8);
        assert!(pairs.iter().all(|&(_, _, v)| v == 1.0));
        let plus = inst.fields().iter().filter(|&&h| h == 1.0).count();
        let minus = inst.fields().iter().filter(|&&h| h == -1.0).count();
        assert_eq!((plus, minus), (4, 4));
    }

    #[test]
    fn quantum_signature_ground_manifold() {
        let table = classical_energies(&quantum_signature());
        assert_eq!(table.ground_indices().len(), 17);
        assert_close(table.ground_energy(), -8.0, 1e-12);
        // Cluster: the 16 states with all four core spins up (low nibble 0),
        // plus the isolated all-down state.
        let mut expected: Vec<usize> = (0..16).map(|m| m << 4).collect();
        expected.push(255);
        expected.sort_unstable();
        assert_eq!(table.ground_indices(), expected.as_slice());
    }

    #[test]
    fn sk_is_deterministic_and_fieldless() {
        let a = sk_random(6, 42).unwrap();
        let b = sk_random(6, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.fields().iter().all(|&h| h == 0.0));
        let c = sk_random(6, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sk_coupling_variance_matches_target() {
        // Pooled over 200 seeds the empirical variance of the off-diagonal
        // couplings estimates 1/n; the standard error of a variance estimate
        // over 5600 samples is about 2%, so 10% is a safe band.
        let n = 8;
        let mut samples = Vec::new();
        for seed in 0..200 {
            let inst = sk_random(n, seed).unwrap();
            for (_, _, v) in inst.pair_couplings() {
                samples.push(v);
            }
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (samples.len() - 1) as f64;
        let target = 1.0 / n as f64;
        assert!(
            (var - target).abs() < 0.1 * target,
            "pooled variance {var} vs target {target}"
        );
    }

    #[test]
    fn diagonal_action_on_basis_states() {
        let inst = husimi_temperley(4).unwrap();
        let table = classical_energies(&inst);
        let dim = inst.dim();
        for state in 0..dim {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[state] = Complex64::new(1.0, 0.0);
            let hv = apply_total_hamiltonian(&inst, 1.0, &v).unwrap();
            for i in 0..dim {
                let expected = if i == state {
                    table.energy(state)
                } else {
                    0.0
                };
                assert_close(hv[i].re, expected, 1e-12);
                assert_close(hv[i].im, 0.0, 1e-12);
            }
        }
    }

    #[test]
    fn uniform_superposition_is_transverse_ground_state() {
        let inst = husimi_temperley(4).unwrap();
        let dim = inst.dim();
        let amp = 1.0 / (dim as f64).sqrt();
        let v = vec![Complex64::new(amp, 0.0); dim];
        let hv = apply_total_hamiltonian(&inst, 0.0, &v).unwrap();
        for i in 0..dim {
            assert_close(hv[i].re, -(inst.n() as f64) * amp, 1e-12);
            assert_close(hv[i].im, 0.0, 1e-12);
        }
    }

    // Dense oracle: explicit Pauli tensor products with spin 0 on the fast
    // index, fully independent of the matrix-free code path.
    fn dense_total_hamiltonian(inst: &IsingInstance, s: f64) -> Vec<Vec<Complex64>> {
        fn kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
            let (ra, rb) = (a.len(), b.len());
            let mut out = vec![vec![0.0; ra * rb]; ra * rb];
            for i in 0..ra {
                for j in 0..ra {
                    for k in 0..rb {
                        for l in 0..rb {
                            out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                        }
                    }
                }
            }
            out
        }
        let eye = |d: usize| {
            let mut m = vec![vec![0.0; d]; d];
            for i in 0..d {
                m[i][i] = 1.0;
            }
            m
        };
        let sz = vec![vec![1.0, 0.0], vec![0.0, -1.0]];
        let sx = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let n = inst.n();
        let dim = inst.dim();
        // op on spin k = I_{2^(n-1-k)} kron op kron I_{2^k}
        let on_spin = |op: &Vec<Vec<f64>>, k: usize| {
            kron(&kron(&eye(1 << (n - 1 - k)), op), &eye(1 << k))
        };
        let mut h = vec![vec![0.0; dim]; dim];
        for k in 0..n {
            let zk = on_spin(&sz, k);
            let xk = on_spin(&sx, k);
            for i in 0..dim {
                for j in 0..dim {
                    h[i][j] += -s * inst.field(k) * zk[i][j] - (1.0 - s) * xk[i][j];
                }
            }
            for l in (k + 1)..n {
                let j_kl = inst.coupling(k, l);
                if j_kl == 0.0 {
                    continue;
                }
                let zl = on_spin(&sz, l);
                for i in 0..dim {
                    for j in 0..dim {
                        let mut zz = 0.0;
                        for m in 0..dim {
                            zz += zk[i][m] * zl[m][j];
                        }
                        h[i][j] += -s * j_kl * zz;
                    }
                }
            }
        }
        h.into_iter()
            .map(|row| row.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            .collect()
    }

    #[test]
    fn matches_dense_pauli_construction() {
        let inst =
            IsingInstance::from_pairs(2, &[(0, 1, 0.7)], vec![0.3, -0.5], "dense-check").unwrap();
        let s = 0.5;
        let dense = dense_total_hamiltonian(&inst, s);
        let dim = inst.dim();
        // Fixed pseudo-random complex vector.
        let v: Vec<Complex64> = (0..dim)
            .map(|i| {
                let x = ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5;
                let y = ((i * 40503 + 7) % 1000) as f64 / 1000.0 - 0.5;
                Complex64::new(x, y)
            })
            .collect();
        let fast = apply_total_hamiltonian(&inst, s, &v).unwrap();
        for i in 0..dim {
            let mut want = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                want += dense[i][j] * v[j];
            }
            assert!((fast[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn classical_energies_agree_with_diagonal_hamiltonian() {
        let inst = quantum_signature();
        let table = classical_energies(&inst);
        let dim = inst.dim();
        for state in (0..dim).step_by(17) {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[state] = Complex64::new(1.0, 0.0);
            let hv = apply_total_hamiltonian(&inst, 1.0, &v).unwrap();
            assert_close(hv[state].re, table.energy(state), 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = sk_random(5, 7).unwrap();
        let text = inst.to_json_string();
        let back = IsingInstance::from_json_str(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(matches!(
            IsingInstance::new(17, vec![0.0; 17 * 17], vec![0.0; 17], "big"),
            Err(IsingError::SizeCap { .. })
        ));
        let asym = IsingInstance::new(2, vec![0.0, 1.0, 2.0, 0.0], vec![0.0; 2], "asym");
        assert!(matches!(asym, Err(IsingError::AsymmetricCoupling { .. })));
        let diag = IsingInstance::new(2, vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 2], "diag");
        assert!(matches!(diag, Err(IsingError::NonzeroDiagonal { .. })));
        let dup = IsingInstance::from_pairs(3, &[(0, 1, 1.0), (1, 0, 2.0)], vec![0.0; 3], "dup");
        assert!(matches!(dup, Err(IsingError::DuplicateCoupling { .. })));
    }
}
