//! The five fidelity measures for square channels: entanglement fidelity in
//! both its Kraus-sum and purification forms, channel fidelity, average
//! fidelity (closed form and Monte-Carlo), minimum fidelity with a certified
//! witness, and the infimum of entanglement fidelity over input states.
//!
//! Optimized quantities return the objective evaluated exactly at the
//! returned witness, so every value is a certified one-sided bound.

use crate::channels::{Channel, CpMap};
use crate::error::{Error, Result};
use crate::operators::{
    kron, partial_trace_second, purify, CMat, CVec, DensityOperator, UnitVector,
};
use crate::optim::{minimize_quartic_on_sphere, quartic_value};
use crate::random::{haar_unit_vector, haar_unitary, task_rng};

fn require_square(t: &Channel, what: &str) -> Result<()> {
    if !t.is_square() {
        return Err(Error::Dimension(format!(
            "{what} needs a square channel, got {}→{}",
            t.dim_in(),
            t.dim_out()
        )));
    }
    Ok(())
}

/// Entanglement fidelity Σ_i |tr ϱ t_i|² of a state with respect to a
/// completely positive map; representation independent.
pub fn entanglement_fidelity_cp(rho: &DensityOperator, map: &CpMap) -> Result<f64> {
    if map.dim_in() != rho.dim() || map.dim_out() != rho.dim() {
        return Err(Error::Dimension(format!(
            "entanglement fidelity needs a square map on dim {}, got {}→{}",
            rho.dim(),
            map.dim_in(),
            map.dim_out()
        )));
    }
    Ok(map
        .kraus()
        .iter()
        .map(|t| (rho.matrix() * t).trace().norm_sqr())
        .sum())
}

/// Entanglement fidelity of ϱ with respect to a channel.
pub fn entanglement_fidelity(rho: &DensityOperator, t: &Channel) -> Result<f64> {
    require_square(t, "entanglement fidelity")?;
    entanglement_fidelity_cp(rho, t.as_cp())
}

/// The purification route ⟨ψ|(T⊗id)(|ψ⟩⟨ψ|)|ψ⟩; agrees with the Kraus sum
/// for every valid input and is kept as the independent second evaluation.
pub fn entanglement_fidelity_via_purification(rho: &DensityOperator, t: &Channel) -> Result<f64> {
    require_square(t, "entanglement fidelity")?;
    if t.dim_in() != rho.dim() {
        return Err(Error::Dimension("state and channel dimensions differ".into()));
    }
    let d = rho.dim();
    let psi = purify(rho);
    let lifted: Vec<CMat> = t
        .kraus()
        .iter()
        .map(|k| kron(k, &crate::operators::identity(d)))
        .collect();
    Ok(quartic_value(&lifted, psi.amplitudes()))
}

/// Maximally entangled unit vector Ω = d^{-1/2} Σ |i,i⟩ on C^{d²}.
pub fn maximally_entangled(d: usize) -> Result<UnitVector> {
    if d == 0 {
        return Err(Error::Dimension("dimension must be positive".into()));
    }
    let mut v = CVec::zeros(d * d);
    let a = crate::operators::creal(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[i * d + i] = a;
    }
    UnitVector::new(v)
}

/// Channel fidelity F_e(1/d, T), the entanglement fidelity of the maximally
/// mixed state; linear in the channel.
pub fn channel_fidelity(t: &Channel) -> Result<f64> {
    require_square(t, "channel fidelity")?;
    let d = t.dim_in() as f64;
    Ok(t.kraus()
        .iter()
        .map(|k| k.trace().norm_sqr())
        .sum::<f64>()
        / (d * d))
}

/// The maximally-entangled-state route ⟨Ω|(T⊗id)(|Ω⟩⟨Ω|)|Ω⟩; the second of
/// the two evaluation routes for channel fidelity.
pub fn channel_fidelity_via_omega(t: &Channel) -> Result<f64> {
    require_square(t, "channel fidelity")?;
    let d = t.dim_in();
    let omega = maximally_entangled(d)?;
    entgen_fidelity(&omega, t)
}

/// Overlap of (T⊗id)(|Γ⟩⟨Γ|) with the maximally entangled state; the figure
/// of merit of entanglement generation.
pub fn entgen_fidelity(gamma: &UnitVector, t: &Channel) -> Result<f64> {
    require_square(t, "entanglement generation fidelity")?;
    let d = t.dim_in();
    if gamma.dim() != d * d {
        return Err(Error::Dimension(format!(
            "input vector must live on dim {}, got {}",
            d * d,
            gamma.dim()
        )));
    }
    let omega = maximally_entangled(d)?;
    let id = crate::operators::identity(d);
    let mut value = 0.0;
    for k in t.kraus() {
        let lifted = kron(k, &id);
        let amp = omega.amplitudes().dotc(&(lifted * gamma.amplitudes()));
        value += amp.norm_sqr();
    }
    Ok(value)
}

/// Minimum pure-state fidelity with the witness achieving the reported value.
/// The value is a certified upper bound on the true minimum; the search is a
/// multi-start projected descent on the unit sphere.
pub fn min_fidelity(t: &Channel, restarts: u32, seed: u64) -> Result<(f64, UnitVector)> {
    require_square(t, "minimum fidelity")?;
    if restarts == 0 {
        return Err(Error::Domain("minimum fidelity needs restarts ≥ 1".into()));
    }
    let opt = minimize_quartic_on_sphere(t.kraus(), t.dim_in(), restarts, seed, &[], 400, 1e-13);
    Ok((opt.value, UnitVector::normalized(opt.witness)?))
}

/// Closed-form average fidelity (d·F_c + 1)/(d + 1).
pub fn average_fidelity_closed(t: &Channel) -> Result<f64> {
    let d = t.dim_in() as f64;
    Ok((d * channel_fidelity(t)? + 1.0) / (d + 1.0))
}

/// Monte-Carlo average fidelity over Haar-random pure inputs; returns the
/// sample mean and its standard error.
pub fn average_fidelity_mc(t: &Channel, samples: u64, seed: u64) -> Result<(f64, f64)> {
    require_square(t, "average fidelity")?;
    if samples == 0 {
        return Err(Error::Domain("Monte-Carlo average needs samples ≥ 1".into()));
    }
    let d = t.dim_in();
    let mut rng = task_rng(seed, 0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let psi = haar_unit_vector(&mut rng, d);
        let f = quartic_value(t.kraus(), psi.amplitudes());
        sum += f;
        sum_sq += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let se = if samples > 1 {
        (var / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}

/// Infimum of F_e(ϱ, T) over input states, realized as the minimum pure-state
/// fidelity of T⊗id over the doubled space (a purification of any ϱ on H
/// lives in H⊗H). Returns the certified value and the reduced witness state.
///
/// The product vector built from the plain minimum-fidelity witness is always
/// among the starts, so the result never exceeds `min_fidelity`.
pub fn inf_entanglement_fidelity(
    t: &Channel,
    restarts: u32,
    seed: u64,
) -> Result<(f64, DensityOperator)> {
    require_square(t, "entanglement fidelity infimum")?;
    if restarts == 0 {
        return Err(Error::Domain("infimum search needs restarts ≥ 1".into()));
    }
    let d = t.dim_in();
    let id = crate::operators::identity(d);
    let lifted: Vec<CMat> = t.kraus().iter().map(|k| kron(k, &id)).collect();
    let (_, product_witness) = min_fidelity(t, restarts, seed ^ 0x5bd1)?;
    let anchor = product_witness
        .tensor(&UnitVector::basis_state(d, 0)?)
        .amplitudes()
        .clone();
    let opt = minimize_quartic_on_sphere(&lifted, d * d, restarts, seed, &[anchor], 400, 1e-13);
    let witness_matrix = {
        let proj = {
            let w = &opt.witness;
            w * w.adjoint()
        };
        partial_trace_second(&proj, d, d)?
    };
    let witness = DensityOperator::new(witness_matrix)?;
    Ok((opt.value, witness))
}

/// Monte-Carlo twirl statistics: entrywise mean of (U⊗U)(ϱ⊗ϱ)(U⊗U)* over
/// Haar unitaries, plus the entrywise standard error (complex magnitude).
pub struct TwirlStats {
    pub mean: CMat,
    pub std_err: nalgebra::DMatrix<f64>,
    pub samples: u64,
}

pub fn twirl_stats(rho: &DensityOperator, samples: u64, seed: u64) -> Result<TwirlStats> {
    if samples == 0 {
        return Err(Error::Domain("twirl needs samples ≥ 1".into()));
    }
    let d = rho.dim();
    let dd = d * d;
    let mut rng = task_rng(seed, 0);
    let mut sum = CMat::zeros(dd, dd);
    let mut sum_sq = nalgebra::DMatrix::<f64>::zeros(dd, dd);
    for _ in 0..samples {
        let u = haar_unitary(&mut rng, d);
        let uu = kron(&u, &u);
        let term = &uu * kron(rho.matrix(), rho.matrix()) * uu.adjoint();
        for r in 0..dd {
            for c in 0..dd {
                sum[(r, c)] += term[(r, c)];
                sum_sq[(r, c)] += term[(r, c)].norm_sqr();
            }
        }
    }
    let n = samples as f64;
    let mean = sum.unscale(n);
    let mut std_err = nalgebra::DMatrix::<f64>::zeros(dd, dd);
    if samples > 1 {
        for r in 0..dd {
            for c in 0..dd {
                let var = (sum_sq[(r, c)] / n - mean[(r, c)].norm_sqr()).max(0.0);
                std_err[(r, c)] = (var / (n - 1.0)).sqrt();
            }
        }
    }
    Ok(TwirlStats {
        mean,
        std_err,
        samples,
    })
}

/// Monte-Carlo average of (U⊗U)(ϱ⊗ϱ)(U⊗U)*; converges to the Werner state
/// (1+F)/(d(d+1)) for pure ϱ.
pub fn twirl(rho: &DensityOperator, samples: u64, seed: u64) -> Result<CMat> {
    Ok(twirl_stats(rho, samples, seed)?.mean)
}
