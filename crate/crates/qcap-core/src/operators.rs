//! Complex-matrix foundation: Schatten norms, spectral decompositions,
//! purification, partial traces, the flip operator and entropies.
//!
//! Everything here is a pure function on immutable values; all tolerances are
//! fixed at construction time and inputs outside tolerance are rejected rather
//! than silently projected.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Hermiticity / trace / unit-norm tolerance on construction.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIG_CLAMP, 0)` are clamped to zero before entropy,
/// purification and Kraus extraction.
pub const EIG_CLAMP: f64 = 1e-10;
/// Trace-preservation tolerance for channels.
pub const TP_TOL: f64 = 1e-9;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn creal(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// d×d identity.
pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Sum of singular values, tr √(A*A).
pub fn trace_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().sum()
}

/// Hilbert-Schmidt (Frobenius) norm, √tr(A*A).
pub fn hs_norm(a: &CMat) -> f64 {
    a.norm()
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Base-2 logarithm, the unit convention used throughout the crate.
pub fn ld(x: f64) -> f64 {
    x.log2()
}

/// Binary entropy −p ld p − (1−p) ld(1−p), with the endpoints mapped to 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "binary entropy argument {p} outside [0,1]"
        )));
    }
    let term = |q: f64| if q > 0.0 { -q * ld(q) } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrized first so that ~1e-13 asymmetry from accumulated
/// arithmetic does not leak into the decomposition.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, Vec<CVec>) {
    let d = m.nrows();
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).clone_owned())
        .collect();
    (vals, vecs)
}

/// Moore-Penrose pseudo-inverse of a Hermitian PSD matrix with an eigenvalue
/// cutoff.
pub fn hermitian_pinv(m: &CMat, cutoff: f64) -> CMat {
    let d = m.nrows();
    let (vals, vecs) = hermitian_eigen(m);
    let mut out = CMat::zeros(d, d);
    for (lambda, v) in vals.iter().zip(vecs.iter()) {
        if *lambda > cutoff {
            out += (v * v.adjoint()).scale(1.0 / lambda);
        }
    }
    out
}

/// Kronecker product A⊗B.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Flip (swap) operator F on C^d ⊗ C^d: F(φ⊗ψ) = ψ⊗φ.
pub fn flip_operator(d: usize) -> CMat {
    let mut f = CMat::zeros(d * d, d * d);
    for n in 0..d {
        for m in 0..d {
            f[(n * d + m, m * d + n)] = cone();
        }
    }
    f
}

/// Partial trace over the second tensor factor of a matrix on C^{da}⊗C^{db}.
pub fn partial_trace_second(m: &CMat, da: usize, db: usize) -> Result<CMat> {
    if m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::Dimension(format!(
            "partial trace expects a {0}×{0} matrix, got {1}×{2}",
            da * db,
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = CMat::zeros(da, da);
    for a in 0..da {
        for a2 in 0..da {
            let mut s = czero();
            for b in 0..db {
                s += m[(a * db + b, a2 * db + b)];
            }
            out[(a, a2)] = s;
        }
    }
    Ok(out)
}

/// Partial trace over the first tensor factor of a matrix on C^{da}⊗C^{db}.
pub fn partial_trace_first(m: &CMat, da: usize, db: usize) -> Result<CMat> {
    if m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::Dimension(format!(
            "partial trace expects a {0}×{0} matrix, got {1}×{2}",
            da * db,
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = CMat::zeros(db, db);
    for b in 0..db {
        for b2 in 0..db {
            let mut s = czero();
            for a in 0..da {
                s += m[(a * db + b, a * db + b2)];
            }
            out[(b, b2)] = s;
        }
    }
    Ok(out)
}

/// Reorders the tensor factors of a square matrix living on ⊗_i C^{dims[i]}.
/// `perm[k]` names the old factor that ends up in slot `k`.
pub fn permute_factors(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::Dimension(format!(
            "factor permutation expects a {total}×{total} matrix"
        )));
    }
    if perm.len() != dims.len() {
        return Err(Error::Dimension(
            "permutation length must match factor count".into(),
        ));
    }
    let n = dims.len();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    // Index map: new multi-index (i_0..i_{n-1}) reads old factor perm[k] at slot k.
    let to_old = |new_flat: usize| -> usize {
        let mut rem = new_flat;
        let mut new_idx = vec![0usize; n];
        for k in (0..n).rev() {
            new_idx[k] = rem % new_dims[k];
            rem /= new_dims[k];
        }
        let mut old_idx = vec![0usize; n];
        for k in 0..n {
            old_idx[perm[k]] = new_idx[k];
        }
        let mut flat = 0usize;
        for k in 0..n {
            flat = flat * dims[k] + old_idx[k];
        }
        flat
    };
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        let ro = to_old(r);
        for c in 0..total {
            out[(r, c)] = m[(ro, to_old(c))];
        }
    }
    Ok(out)
}

/// Rotates the global phase so the largest-magnitude amplitude is real ≥ 0.
pub fn canonical_phase(v: &CVec) -> CVec {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return v.clone();
    }
    let phase = v[best] / best_mag;
    v.map(|z| z / phase)
}

/// Total lexicographic order on amplitude vectors, comparing (re, im) pairs.
/// Used to break ties between equally good optimizer witnesses.
pub fn lex_cmp(a: &CVec, b: &CVec) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

/// A unit vector in C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    amplitudes: CVec,
}

impl UnitVector {
    pub fn new(amplitudes: CVec) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("unit vector must have dimension ≥ 1".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant("unit vector has non-finite amplitudes".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Invariant(format!(
                "vector norm {norm} deviates from 1 beyond {STATE_TOL}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: CVec) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Invariant("cannot normalize a zero vector".into()));
        }
        Self::new(v.unscale(n))
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = CVec::zeros(dim);
        v[index] = cone();
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Rank-one projector |ψ⟩⟨ψ|.
    pub fn projector(&self) -> CMat {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn tensor(&self, other: &UnitVector) -> UnitVector {
        UnitVector {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

/// A positive unit-trace operator; rejects inputs outside tolerance instead of
/// projecting them.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    matrix: CMat,
}

impl DensityOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "density operator must be square and nonempty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant("density operator has non-finite entries".into()));
        }
        let herm_defect = (&matrix - matrix.adjoint()).norm();
        if herm_defect > STATE_TOL {
            return Err(Error::Invariant(format!(
                "Hermiticity defect {herm_defect:.3e} beyond {STATE_TOL}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Invariant(format!(
                "trace {tr} deviates from 1 beyond {STATE_TOL}"
            )));
        }
        let (vals, _) = hermitian_eigen(&matrix);
        if let Some(min) = vals.first() {
            if *min < -STATE_TOL {
                return Err(Error::Invariant(format!(
                    "negative eigenvalue {min:.3e} beyond -{STATE_TOL}"
                )));
            }
        }
        Ok(Self { dim, matrix })
    }

    pub fn pure(psi: &UnitVector) -> Self {
        Self {
            dim: psi.dim(),
            matrix: psi.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            matrix: identity(dim).scale(1.0 / dim as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Eigenvalues ascending, with values in [-EIG_CLAMP, 0) clamped to 0.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (vals, _) = hermitian_eigen(&self.matrix);
        vals.into_iter()
            .map(|l| if l < 0.0 { 0.0 } else { l })
            .collect()
    }

    /// Largest eigenvalue ‖ϱ‖.
    pub fn sup_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > cutoff).count()
    }

    /// Orthonormal basis of the support as columns of a d×r isometry.
    pub fn support_basis(&self, cutoff: f64) -> CMat {
        let (vals, vecs) = hermitian_eigen(&self.matrix);
        let cols: Vec<&CVec> = vals
            .iter()
            .zip(vecs.iter())
            .filter(|(l, _)| **l > cutoff)
            .map(|(_, v)| v)
            .collect();
        let mut b = CMat::zeros(self.dim, cols.len());
        for (j, v) in cols.iter().enumerate() {
            b.set_column(j, v);
        }
        b
    }
}

/// Purification ψ = Σ_i √λ_i |v_i⟩⊗|e_i⟩ on C^{d²}; the ancilla basis is the
/// computational basis of a second copy of the same space.
pub fn purify(rho: &DensityOperator) -> UnitVector {
    let d = rho.dim();
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let mut psi = CVec::zeros(d * d);
    for (slot, (lambda, v)) in vals.iter().zip(vecs.iter()).enumerate() {
        let l = lambda.max(0.0);
        if l == 0.0 {
            continue;
        }
        let s = l.sqrt();
        for a in 0..d {
            psi[a * d + slot] += creal(s) * v[a];
        }
    }
    UnitVector::normalized(psi).expect("purification of a unit-trace state is normalizable")
}

/// Schmidt decomposition of ψ ∈ C^{d1·d2}: nonincreasing coefficients plus the
/// two orthonormal families, ψ = Σ_k λ_k u_k ⊗ w_k.
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<CVec>,
    pub right: Vec<CVec>,
}

pub fn schmidt(psi: &UnitVector, d1: usize, d2: usize) -> Result<SchmidtDecomposition> {
    if d1 * d2 != psi.dim() {
        return Err(Error::Dimension(format!(
            "vector of dimension {} does not factor as {d1}×{d2}",
            psi.dim()
        )));
    }
    let mut amp = CMat::zeros(d1, d2);
    for i in 0..d1 {
        for j in 0..d2 {
            amp[(i, j)] = psi.amplitudes()[i * d2 + j];
        }
    }
    let svd = amp.svd(true, true);
    let u = svd.u.expect("svd with u requested");
    let v_t = svd.v_t.expect("svd with v_t requested");
    let r = svd.singular_values.len();
    let mut coefficients = Vec::with_capacity(r);
    let mut left = Vec::with_capacity(r);
    let mut right = Vec::with_capacity(r);
    for k in 0..r {
        coefficients.push(svd.singular_values[k]);
        left.push(u.column(k).clone_owned());
        // ψ_{ij} = Σ_k σ_k U_{ik} (V*)_{kj}, so the right family is the
        // conjugate of V's columns, i.e. the rows of V^T* = conj(V).
        right.push(v_t.row(k).transpose().clone_owned());
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left,
        right,
    })
}

/// Von Neumann entropy in bits, −Σ λ ld λ with 0·ld 0 := 0.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * ld(l))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unit_vector, random_density, task_rng};

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn trace_norm_zero_matrix() {
        assert_eq!(trace_norm(&CMat::zeros(3, 3)), 0.0);
    }

    #[test]
    fn trace_norm_orthogonal_pure_difference() {
        let psi = UnitVector::basis_state(4, 0).unwrap();
        let phi = UnitVector::basis_state(4, 2).unwrap();
        let diff = psi.projector() - phi.projector();
        assert!(approx(trace_norm(&diff), 2.0, 1e-12));
    }

    #[test]
    fn hs_norm_identity_and_zero() {
        for d in [2usize, 3, 5] {
            assert!(approx(hs_norm(&identity(d)), (d as f64).sqrt(), 1e-12));
        }
        assert_eq!(hs_norm(&CMat::zeros(4, 4)), 0.0);
    }

    #[test]
    fn op_norm_examples() {
        let u = flip_operator(2); // a permutation, hence unitary
        assert!(approx(op_norm(&u), 1.0, 1e-12));
        let mut diag = CMat::zeros(2, 2);
        diag[(0, 0)] = creal(3.0);
        diag[(1, 1)] = creal(-1.0);
        assert!(approx(op_norm(&diag), 3.0, 1e-12));
    }

    #[test]
    fn norm_chain_on_random_matrices() {
        let mut rng = task_rng(7, 0);
        for _ in 0..25 {
            let a = crate::random::random_gaussian_matrix(&mut rng, 4, 4);
            let tn = trace_norm(&a);
            let hs = hs_norm(&a);
            let op = op_norm(&a);
            assert!(op <= hs + 1e-9);
            assert!(hs <= tn + 1e-9);
            assert!(tn <= 4.0 * op + 1e-9);
        }
    }

    #[test]
    fn purify_pure_state() {
        let psi = UnitVector::basis_state(2, 0).unwrap();
        let rho = DensityOperator::pure(&psi);
        let p = purify(&rho);
        // |0⟩⊗|anc⟩ up to phase: reduced state recovers ϱ exactly.
        let red = partial_trace_second(&p.projector(), 2, 2).unwrap();
        assert!((red - rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn purify_maximally_mixed_qubit_is_maximally_entangled() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let p = purify(&rho);
        let dec = schmidt(&p, 2, 2).unwrap();
        assert_eq!(dec.coefficients.len(), 2);
        for c in dec.coefficients {
            assert!(approx(c, std::f64::consts::FRAC_1_SQRT_2, 1e-10));
        }
    }

    #[test]
    fn purify_random_rank2_round_trip() {
        let mut rng = task_rng(11, 0);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 3, Some(2));
            let p = purify(&rho);
            let red = partial_trace_second(&p.projector(), 3, 3).unwrap();
            assert!((red - rho.matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn schmidt_product_vector() {
        let a = UnitVector::basis_state(3, 1).unwrap();
        let b = UnitVector::basis_state(2, 0).unwrap();
        let dec = schmidt(&a.tensor(&b), 3, 2).unwrap();
        assert!(approx(dec.coefficients[0], 1.0, 1e-12));
        for c in &dec.coefficients[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_maximally_entangled_qubit_pair() {
        let mut v = CVec::zeros(4);
        v[0] = creal(std::f64::consts::FRAC_1_SQRT_2);
        v[3] = creal(std::f64::consts::FRAC_1_SQRT_2);
        let omega = UnitVector::new(v).unwrap();
        let dec = schmidt(&omega, 2, 2).unwrap();
        for c in dec.coefficients {
            assert!(approx(c, std::f64::consts::FRAC_1_SQRT_2, 1e-12));
        }
    }

    #[test]
    fn schmidt_matches_svd_oracle_and_reconstructs() {
        let mut rng = task_rng(13, 0);
        for _ in 0..10 {
            let psi = haar_unit_vector(&mut rng, 9);
            let dec = schmidt(&psi, 3, 3).unwrap();
            let sum_sq: f64 = dec.coefficients.iter().map(|c| c * c).sum();
            assert!(approx(sum_sq, 1.0, 1e-10));
            // reconstruction ψ = Σ λ_k u_k ⊗ w_k
            let mut rec = CVec::zeros(9);
            for ((c, u), w) in dec
                .coefficients
                .iter()
                .zip(dec.left.iter())
                .zip(dec.right.iter())
            {
                rec += u.kronecker(w).scale(*c);
            }
            assert!((rec - psi.amplitudes()).norm() < 1e-10);
            // oracle: singular values of the amplitude matrix
            let mut amp = CMat::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    amp[(i, j)] = psi.amplitudes()[i * 3 + j];
                }
            }
            let sv = amp.svd(false, false).singular_values;
            for (c, s) in dec.coefficients.iter().zip(sv.iter()) {
                assert!(approx(*c, *s, 1e-10));
            }
        }
    }

    #[test]
    fn flip_scalar_and_qubit() {
        assert_eq!(flip_operator(1)[(0, 0)], cone());
        let f = flip_operator(2);
        // swaps |01⟩ ↔ |10⟩, fixes |00⟩ and |11⟩
        assert_eq!(f[(0, 0)], cone());
        assert_eq!(f[(3, 3)], cone());
        assert_eq!(f[(1, 2)], cone());
        assert_eq!(f[(2, 1)], cone());
        assert_eq!(f[(1, 1)], czero());
    }

    #[test]
    fn flip_trace_identity() {
        for d in [2usize, 3, 4] {
            let f = flip_operator(d);
            let mut rng = task_rng(17, d as u64);
            for _ in 0..100 {
                let a = crate::random::random_gaussian_matrix(&mut rng, d, d);
                let b = crate::random::random_gaussian_matrix(&mut rng, d, d);
                let lhs = (&f * kron(&a, &b)).trace();
                let rhs = (&a * &b).trace();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn entropy_endpoints() {
        let pure = DensityOperator::pure(&UnitVector::basis_state(4, 2).unwrap());
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        for d in [2usize, 3, 8] {
            let mixed = DensityOperator::maximally_mixed(d).unwrap();
            assert!(approx(von_neumann_entropy(&mixed), ld(d as f64), 1e-10));
        }
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = creal(0.9);
        m[(1, 1)] = creal(0.1);
        let rho = DensityOperator::new(m).unwrap();
        assert!(approx(
            von_neumann_entropy(&rho),
            binary_entropy(0.9).unwrap(),
            1e-12
        ));
        assert!(approx(binary_entropy(0.9).unwrap(), 0.4689955935892812, 1e-12));
    }

    #[test]
    fn binary_entropy_values() {
        assert!(approx(binary_entropy(0.5).unwrap(), 1.0, 1e-15));
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // frozen from direct evaluation; reused by the hashing feasibility case
        assert!(approx(binary_entropy(0.02).unwrap(), 0.14144054254182067, 1e-12));
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn entropy_bounds_on_random_states() {
        let mut rng = task_rng(23, 0);
        for d in [2usize, 3, 4] {
            for _ in 0..20 {
                let rho = random_density(&mut rng, d, None);
                let s = von_neumann_entropy(&rho);
                assert!(s >= -1e-10 && s <= ld(d as f64) + 1e-10);
            }
        }
    }

    #[test]
    fn density_operator_rejects_bad_inputs() {
        // non-unit trace
        let m = identity(2);
        assert!(DensityOperator::new(m).is_err());
        // non-Hermitian
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = creal(0.5);
        m[(1, 1)] = creal(0.5);
        m[(0, 1)] = Complex64::new(0.0, 0.4);
        m[(1, 0)] = Complex64::new(0.0, 0.4);
        assert!(DensityOperator::new(m).is_err());
        // negative eigenvalue
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = creal(1.2);
        m[(1, 1)] = creal(-0.2);
        assert!(DensityOperator::new(m).is_err());
    }

    #[test]
    fn unit_vector_rejects_non_normalized() {
        let v = CVec::from_element(2, creal(1.0));
        assert!(UnitVector::new(v).is_err());
    }

    #[test]
    fn permute_factors_swaps_kron_order() {
        let mut rng = task_rng(29, 0);
        let a = crate::random::random_gaussian_matrix(&mut rng, 2, 2);
        let b = crate::random::random_gaussian_matrix(&mut rng, 3, 3);
        let ab = kron(&a, &b);
        let ba = kron(&b, &a);
        let swapped = permute_factors(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!((swapped - ba).norm() < 1e-12);
    }
}
