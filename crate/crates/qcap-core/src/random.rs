//! Deterministic random generators: Haar-distributed vectors, unitaries and
//! isometries, plus the random channel and state fixtures used by the
//! verification suites.
//!
//! Haar vectors are normalized vectors of independent standard complex
//! Gaussians; Haar unitaries come from the QR decomposition of a complex
//! Gaussian matrix with the phases of the R diagonal absorbed into Q.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::Channel;
use crate::operators::{creal, CMat, CVec, DensityOperator, UnitVector};

/// Independent deterministic stream derived from a user seed and task index.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; avoids an extra crate for a two-line transform.
    loop {
        let u: f64 = rng.gen::<f64>();
        if u > f64::MIN_POSITIVE {
            let v: f64 = rng.gen::<f64>();
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

fn std_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(std_normal(rng), std_normal(rng))
}

/// Matrix of independent standard complex Gaussians.
pub fn random_gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| std_complex(rng))
}

/// Haar-distributed unit vector in C^d.
pub fn haar_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> UnitVector {
    loop {
        let v = CVec::from_fn(dim, |_, _| std_complex(rng));
        if let Ok(u) = UnitVector::normalized(v) {
            return u;
        }
    }
}

/// Haar-distributed unitary on C^d.
pub fn haar_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    haar_isometry(rng, dim, dim)
}

/// Haar-distributed isometry C^cols → C^rows (columns orthonormal), rows ≥ cols.
pub fn haar_isometry(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    assert!(rows >= cols, "isometry needs rows ≥ cols");
    let g = random_gaussian_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the phase convention so the distribution is exactly Haar.
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { creal(1.0) };
        for i in 0..rows {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

/// Random density operator from the Hilbert-Schmidt ensemble (GG*/tr GG*),
/// optionally rank-restricted.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: Option<usize>) -> DensityOperator {
    let r = rank.unwrap_or(dim).min(dim).max(1);
    let g = random_gaussian_matrix(rng, dim, r);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m.unscale(tr)).expect("Gram matrix normalizes to a valid state")
}

/// Random channel from a Haar isometry into a dilation space of dimension
/// dim_out·kraus_rank followed by a partial trace; exactly trace-preserving
/// by construction.
pub fn random_channel(
    rng: &mut ChaCha8Rng,
    dim_in: usize,
    dim_out: usize,
    kraus_rank: usize,
) -> Channel {
    let k = kraus_rank.max(1);
    let v = haar_isometry(rng, dim_out * k, dim_in);
    let mut kraus = Vec::with_capacity(k);
    for j in 0..k {
        let mut t = CMat::zeros(dim_out, dim_in);
        for r in 0..dim_out {
            for c in 0..dim_in {
                t[(r, c)] = v[(r * k + j, c)];
            }
        }
        kraus.push(t);
    }
    Channel::new(kraus).expect("Stinespring construction is exactly trace-preserving")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::identity;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = task_rng(3, 0);
        for d in [2usize, 3, 5] {
            let u = haar_unitary(&mut rng, d);
            assert!((u.adjoint() * &u - identity(d)).norm() < 1e-10);
        }
    }

    #[test]
    fn random_channel_is_trace_preserving() {
        let mut rng = task_rng(5, 0);
        for _ in 0..20 {
            let t = random_channel(&mut rng, 3, 2, 4);
            let mut sum = CMat::zeros(3, 3);
            for k in t.kraus() {
                sum += k.adjoint() * k;
            }
            assert!((sum - identity(3)).norm() < 1e-10);
        }
    }

    #[test]
    fn streams_are_deterministic() {
        let a = haar_unit_vector(&mut task_rng(9, 4), 4);
        let b = haar_unit_vector(&mut task_rng(9, 4), 4);
        assert_eq!(a.amplitudes(), b.amplitudes());
        let c = haar_unit_vector(&mut task_rng(9, 5), 4);
        assert!((a.amplitudes() - c.amplitudes()).norm() > 1e-6);
    }
}
