//! Capacity bounds and the constructive coding-side results: ideal-channel
//! capacity, the partial-transposition upper bound, coherent information and
//! its single-letter maximization, the isometric-encoder extraction, the
//! instrument collapse that removes classical forward communication, the
//! Haar-averaging bridge between average and assisted worst-case fidelity,
//! and the hashing-code rate formulas.

use serde::Serialize;

use crate::channels::{Channel, CpMap, Instrument};
use crate::error::{Error, Result};
use crate::fidelity::entanglement_fidelity_cp;
use crate::operators::{
    binary_entropy, cone, creal, hermitian_eigen, identity, kron, ld, purify, CMat,
    DensityOperator, UnitVector,
};
use crate::optim::{nelder_mead, quartic_value};
use crate::random::{haar_unit_vector, haar_unitary, task_rng};
use crate::supnorms::{cb_norm, NormEstimate};

/// Capacity of one ideal channel relative to another, ld n / ld m.
pub fn ideal_capacity(n_dim: usize, m_dim: usize) -> Result<f64> {
    if n_dim == 0 || m_dim < 2 {
        return Err(Error::Domain(
            "ideal capacity needs n ≥ 1 and a reference dimension m ≥ 2".into(),
        ));
    }
    Ok(ld(n_dim as f64) / ld(m_dim as f64))
}

/// Verifies that switching the reference dimension only rescales the
/// capacity: Q(id_t, id_n)·ld n = Q(id_t, id_m)·ld m.
#[derive(Debug, Clone, Serialize)]
pub struct UnitConversionCheck {
    pub t_dim: usize,
    pub n_dim: usize,
    pub m_dim: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn unit_conversion_check(t_dim: usize, n_dim: usize, m_dim: usize) -> Result<UnitConversionCheck> {
    let lhs = ideal_capacity(t_dim, n_dim)? * ld(n_dim as f64);
    let rhs = ideal_capacity(t_dim, m_dim)? * ld(m_dim as f64);
    Ok(UnitConversionCheck {
        t_dim,
        n_dim,
        m_dim,
        lhs,
        rhs,
        holds: (lhs - rhs).abs() <= 1e-12,
    })
}

/// The partial-transposition capacity bound ld ‖T∘Θ‖_cb with the estimator
/// metadata needed to reproduce it.
#[derive(Debug, Clone)]
pub struct TranspositionBound {
    /// ld of the cb-norm estimate; 0 for channels whose composition with
    /// transposition stays completely positive.
    pub value: f64,
    pub cb_estimate: NormEstimate,
}

pub fn partial_transposition_bound(
    t: &Channel,
    restarts: u32,
    seed: u64,
) -> Result<TranspositionBound> {
    let theta = crate::channels::transposition_map(t.dim_in());
    let composed = t.to_superoperator().compose(&theta)?;
    let est = cb_norm(&composed, None, restarts, seed)?;
    Ok(TranspositionBound {
        value: ld(est.value),
        cb_estimate: est,
    })
}

/// Coherent information S(T(ϱ)) − S((T⊗id)(|ψ⟩⟨ψ|)) with ψ a purification
/// of ϱ; the choice of purification does not affect the value.
pub fn coherent_information(rho: &DensityOperator, t: &Channel) -> Result<f64> {
    if t.dim_in() != rho.dim() {
        return Err(Error::Dimension(format!(
            "channel input {} does not match state dim {}",
            t.dim_in(),
            rho.dim()
        )));
    }
    let d = rho.dim();
    let out = t.apply(rho)?;
    let psi = purify(rho);
    let id = identity(d);
    let mut joint = CMat::zeros(t.dim_out() * d, t.dim_out() * d);
    let proj = psi.projector();
    for k in t.kraus() {
        let lifted = kron(k, &id);
        joint += &lifted * &proj * lifted.adjoint();
    }
    let joint_state = DensityOperator::new(joint)?;
    Ok(crate::operators::von_neumann_entropy(&out)
        - crate::operators::von_neumann_entropy(&joint_state))
}

fn density_from_params(x: &[f64], d: usize) -> Option<DensityOperator> {
    let mut g = CMat::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let k = 2 * (r * d + c);
            g[(r, c)] = num_complex::Complex64::new(x[k], x[k + 1]);
        }
    }
    let m = g.adjoint() * &g;
    let tr = m.trace().re;
    if !(tr.is_finite()) || tr < 1e-12 {
        return None;
    }
    DensityOperator::new(m.unscale(tr)).ok()
}

/// Certified lower bound on the single-letter maximum of coherent
/// information, via multi-start Nelder-Mead over square-root factors
/// ϱ = G*G/tr(G*G). Returns the value and the state achieving it.
pub fn max_coherent_information_state(
    t: &Channel,
    restarts: u32,
    seed: u64,
) -> Result<(f64, DensityOperator)> {
    if restarts == 0 {
        return Err(Error::Domain("maximization needs restarts ≥ 1".into()));
    }
    let d = t.dim_in();
    let objective = |x: &[f64]| -> f64 {
        match density_from_params(x, d) {
            Some(rho) => match coherent_information(&rho, t) {
                Ok(v) => -v,
                Err(_) => f64::INFINITY,
            },
            None => f64::INFINITY,
        }
    };
    let dim_params = 2 * d * d;
    let mut best_val = f64::INFINITY;
    let mut best_x: Option<Vec<f64>> = None;
    // deterministic anchor at the maximally mixed state (G = 1)
    let mut anchor = vec![0.0; dim_params];
    for i in 0..d {
        anchor[2 * (i * d + i)] = 1.0;
    }
    let starts: Vec<Vec<f64>> = std::iter::once(anchor)
        .chain((0..restarts).map(|r| {
            let mut rng = task_rng(seed, r as u64);
            (0..dim_params)
                .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                .collect()
        }))
        .collect();
    use rayon::prelude::*;
    let results: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|s| nelder_mead(&objective, s, 0.25, 1200))
        .collect();
    for (v, x) in results {
        if v < best_val {
            best_val = v;
            best_x = Some(x);
        }
    }
    let x = best_x.ok_or_else(|| Error::Domain("no feasible start".into()))?;
    let rho = density_from_params(&x, d)
        .ok_or_else(|| Error::Invariant("optimizer returned an infeasible point".into()))?;
    let value = coherent_information(&rho, t)?;
    Ok((value, rho))
}

/// Certified lower bound on max_ϱ I_c(ϱ, T); single-letter only.
pub fn max_coherent_information(t: &Channel, restarts: u32, seed: u64) -> Result<f64> {
    Ok(max_coherent_information_state(t, restarts, seed)?.0)
}

/// Block-regularized evaluation (1/n)·max_ϱ I_c(ϱ, T^{⊗n}) for n ∈ {1, 2};
/// larger blocks are out of contract.
pub fn max_coherent_information_blocks(
    t: &Channel,
    blocks: u32,
    restarts: u32,
    seed: u64,
) -> Result<f64> {
    if !(1..=2).contains(&blocks) {
        return Err(Error::Domain(
            "regularized coherent information is evaluated at n ∈ {1, 2} only".into(),
        ));
    }
    let tn = t.tensor_power(blocks as usize)?;
    Ok(max_coherent_information(&tn, restarts, seed)? / blocks as f64)
}

/// Isometry factor of the polar decomposition m = V·|m| (for rows ≥ cols),
/// via the thin SVD V = U·Vᵗ; well defined also for rank-deficient input.
fn polar_isometry(m: &CMat) -> Result<CMat> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if rows < cols {
        return Err(Error::Dimension("polar isometry needs rows ≥ cols".into()));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    let v = &u * &v_t;
    let defect = (v.adjoint() * &v - identity(cols)).norm();
    if defect > 1e-8 {
        return Err(Error::Invariant(format!(
            "polar factor deviates from an isometry by {defect:.3e}"
        )));
    }
    Ok(v)
}

/// Canonical embedding isometry C^cols → C^rows.
fn embedding_isometry(rows: usize, cols: usize) -> CMat {
    let mut j = CMat::zeros(rows, cols);
    for i in 0..cols {
        j[(i, i)] = cone();
    }
    j
}

/// Replaces a completely positive encoder that is trace-preserving on ϱ by a
/// channel of isometric (or isometric-plus-completion) form losing at most a
/// squaring of the entanglement fidelity: F_e(ϱ, T∘Ẽ) ≥ F_e(ϱ, T∘E)².
///
/// Construction: align the Kraus sets of T and E so the overlap matrix
/// X_ij = tr(t_i e_j ϱ) is diagonal (one singular value decomposition),
/// select the index maximizing (tr t e ϱ)²/λ with λ = tr(e ϱ e*), and take
/// the polar isometry of the selected channel Kraus operator.
pub fn isometric_upgrade(rho: &DensityOperator, e: &CpMap, t: &Channel) -> Result<Channel> {
    let eta = rho.dim();
    let kappa = t.dim_in();
    if e.dim_in() != eta {
        return Err(Error::Dimension(format!(
            "encoder input {} must match the state dimension {eta}",
            e.dim_in()
        )));
    }
    if e.dim_out() != kappa {
        return Err(Error::Dimension(format!(
            "encoder output {} must feed the channel input {kappa}",
            e.dim_out()
        )));
    }
    if t.dim_out() != eta {
        return Err(Error::Dimension(format!(
            "channel output {} must return to the state space {eta}",
            t.dim_out()
        )));
    }
    let norm = e.apply_matrix(rho.matrix())?.trace().re;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Invariant(format!(
            "encoder is not trace-preserving on the given state: tr E(ϱ) = {norm}"
        )));
    }

    let tau = t.kraus().len();
    let eps_count = e.kraus().len();
    let m = tau.max(eps_count);
    let zero_t = CMat::zeros(eta, kappa);
    let zero_e = CMat::zeros(kappa, eta);
    let t_ops: Vec<&CMat> = (0..m)
        .map(|i| t.kraus().get(i).unwrap_or(&zero_t))
        .collect();
    let e_ops: Vec<&CMat> = (0..m)
        .map(|j| e.kraus().get(j).unwrap_or(&zero_e))
        .collect();

    // overlap matrix and its diagonalizing Kraus rotations
    let x = CMat::from_fn(m, m, |i, j| (t_ops[i] * e_ops[j] * rho.matrix()).trace());
    let svd = x.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    // t'_k = Σ_i conj(U_ik) t_i ; e'_k = Σ_j (V)_jk e_j = Σ_j conj(v_t_kj*)...
    let rotated_t: Vec<CMat> = (0..m)
        .map(|k| {
            let mut acc = CMat::zeros(eta, kappa);
            for i in 0..m {
                acc += t_ops[i].map(|z| z * u[(i, k)].conj());
            }
            acc
        })
        .collect();
    let rotated_e: Vec<CMat> = (0..m)
        .map(|k| {
            let mut acc = CMat::zeros(kappa, eta);
            for j in 0..m {
                // Q = Vᵀ, so e'_k = Σ_j V_jk e_j and V = (v_t)†
                acc += e_ops[j].map(|z| z * v_t[(k, j)].conj());
            }
            acc
        })
        .collect();

    // select the index with the best fidelity-per-weight ratio
    let mut best: Option<(usize, f64)> = None;
    for k in 0..m {
        let lambda = (&rotated_e[k] * rho.matrix() * rotated_e[k].adjoint())
            .trace()
            .re;
        if lambda <= 1e-12 {
            continue;
        }
        let overlap = (&rotated_t[k] * &rotated_e[k] * rho.matrix()).trace().re;
        let score = overlap * overlap / lambda;
        if best.map(|(_, s)| score > s).unwrap_or(true) {
            best = Some((k, score));
        }
    }
    let selected = best
        .ok_or_else(|| Error::Invariant("all aligned encoder branches have zero weight".into()))?
        .0;
    let t_sel = &rotated_t[selected];

    if eta <= kappa {
        // Ẽ(σ) = VσV* with V the polar isometry of t*
        let v = if t_sel.norm() > 1e-12 {
            polar_isometry(&t_sel.adjoint())?
        } else {
            embedding_isometry(kappa, eta)
        };
        Channel::new(vec![v])
    } else {
        // Ẽ(σ) = W*σW + tr((1−WW*)σ)/κ · 1 with W the polar isometry of t
        let w = if t_sel.norm() > 1e-12 {
            polar_isometry(t_sel)?
        } else {
            embedding_isometry(eta, kappa)
        };
        let mut kraus = vec![w.adjoint()];
        let p = identity(eta) - &w * w.adjoint();
        let (pvals, pvecs) = hermitian_eigen(&p);
        let scale = creal(1.0 / (kappa as f64).sqrt());
        for (lv, pv) in pvals.iter().zip(pvecs.iter()) {
            if *lv <= 0.5 {
                continue;
            }
            for a in 0..kappa {
                let mut kop = CMat::zeros(kappa, eta);
                for c in 0..eta {
                    kop[(a, c)] = pv[c].conj() * scale;
                }
                kraus.push(kop);
            }
        }
        Channel::new(kraus)
    }
}

/// Outcome of collapsing a classically assisted coding scheme onto its best
/// branch and upgrading that branch's encoder to isometric form.
#[derive(Debug, Clone)]
pub struct BranchSelection {
    pub index: usize,
    /// e_λ = tr E_λ(ϱ) for every branch.
    pub weights: Vec<f64>,
    /// F_e(ϱ, D_λ∘T∘E_λ) per branch; sums to the assisted fidelity.
    pub branch_fidelities: Vec<f64>,
    /// Renormalized per-branch fidelities F_λ/e_λ (zero-weight branches
    /// carry −∞ and are never selected).
    pub normalized_fidelities: Vec<f64>,
    pub assisted_fidelity: f64,
    pub upgraded_encoder: Channel,
    pub decoder_index: usize,
    /// F_e(ϱ, D_μ∘T∘Ẽ) of the unassisted scheme.
    pub achieved_fidelity: f64,
}

/// Picks the branch maximizing the renormalized fidelity and removes the
/// classical side information: if the assisted scheme reaches total fidelity
/// 1−ε, the returned unassisted scheme reaches at least (1−ε)².
pub fn best_branch(
    encoders: &Instrument,
    decoders: &[Channel],
    t: &Channel,
    rho: &DensityOperator,
) -> Result<BranchSelection> {
    if decoders.len() != encoders.len() {
        return Err(Error::Dimension(format!(
            "{} decoders for {} encoder branches",
            decoders.len(),
            encoders.len()
        )));
    }
    let mut weights = Vec::with_capacity(encoders.len());
    let mut branch_fidelities = Vec::with_capacity(encoders.len());
    let mut normalized = Vec::with_capacity(encoders.len());
    for (branch, decoder) in encoders.branches().iter().zip(decoders.iter()) {
        let weight = branch.apply_matrix(rho.matrix())?.trace().re;
        // D∘T∘E as one completely positive map
        let mut kraus = Vec::new();
        for dk in decoder.kraus() {
            for tk in t.kraus() {
                for ek in branch.kraus() {
                    kraus.push(dk * tk * ek);
                }
            }
        }
        let composite = CpMap::new(kraus)?;
        let fid = entanglement_fidelity_cp(rho, &composite)?;
        weights.push(weight);
        branch_fidelities.push(fid);
        normalized.push(if weight > 1e-12 {
            fid / weight
        } else {
            f64::NEG_INFINITY
        });
    }
    let index = normalized
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Invariant("every branch has zero weight on this state".into()))?;

    let normalized_encoder = encoders.branches()[index].scale(1.0 / weights[index]);
    let effective = decoders[index].compose(t)?;
    let upgraded = isometric_upgrade(rho, &normalized_encoder, &effective)?;
    let achieved = {
        let mut kraus = Vec::new();
        for ek in effective.kraus() {
            for uk in upgraded.kraus() {
                kraus.push(ek * uk);
            }
        }
        entanglement_fidelity_cp(rho, &CpMap::new(kraus)?)?
    };
    Ok(BranchSelection {
        index,
        weights,
        branch_fidelities: branch_fidelities.clone(),
        normalized_fidelities: normalized,
        assisted_fidelity: branch_fidelities.iter().sum(),
        upgraded_encoder: upgraded,
        decoder_index: index,
        achieved_fidelity: achieved,
    })
}

/// Monte-Carlo demonstration that conjugating a coding scheme by a shared
/// Haar-random unitary turns average fidelity into the pure-state fidelity of
/// a classically assisted channel: both estimates agree within sampling
/// error.
#[derive(Debug, Clone, Serialize)]
pub struct HaarBridgeResult {
    /// Mean of ⟨ψ|U*·DTE(U|ψ⟩⟨ψ|U*)·U|ψ⟩ over Haar U at the fixed reference ψ.
    pub assisted_mean: f64,
    pub assisted_std_err: f64,
    /// Plain Monte-Carlo average fidelity of DTE.
    pub average_mean: f64,
    pub average_std_err: f64,
    pub samples: u64,
}

pub fn haar_assist_bridge(
    t: &Channel,
    encoder: &Channel,
    decoder: &Channel,
    reference: Option<&UnitVector>,
    samples: u64,
    seed: u64,
) -> Result<HaarBridgeResult> {
    if samples == 0 {
        return Err(Error::Domain("bridge sampling needs samples ≥ 1".into()));
    }
    let scheme = decoder.compose(t)?.compose(encoder)?;
    if !scheme.is_square() {
        return Err(Error::Dimension(
            "corrected scheme must be square for fidelity sampling".into(),
        ));
    }
    let d = scheme.dim_in();
    let psi = match reference {
        Some(r) => {
            if r.dim() != d {
                return Err(Error::Dimension(format!(
                    "reference vector dim {} vs code dim {d}",
                    r.dim()
                )));
            }
            r.clone()
        }
        None => UnitVector::basis_state(d, 0)?,
    };
    let stat = |values: Box<dyn Iterator<Item = f64>>| -> (f64, f64) {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0u64;
        for v in values {
            sum += v;
            sum_sq += v * v;
            count += 1;
        }
        let n = count as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let se = if count > 1 { (var / (n - 1.0)).sqrt() } else { 0.0 };
        (mean, se)
    };
    let mut rng_u = task_rng(seed, 0);
    let kraus = scheme.kraus().to_vec();
    let psi_amp = psi.amplitudes().clone();
    let assisted: Vec<f64> = (0..samples)
        .map(|_| {
            let u = haar_unitary(&mut rng_u, d);
            let rotated = &u * &psi_amp;
            quartic_value(&kraus, &rotated)
        })
        .collect();
    let mut rng_v = task_rng(seed, 1);
    let average: Vec<f64> = (0..samples)
        .map(|_| {
            let phi = haar_unit_vector(&mut rng_v, d);
            quartic_value(&kraus, phi.amplitudes())
        })
        .collect();
    let (assisted_mean, assisted_std_err) = stat(Box::new(assisted.into_iter()));
    let (average_mean, average_std_err) = stat(Box::new(average.into_iter()));
    Ok(HaarBridgeResult {
        assisted_mean,
        assisted_std_err,
        average_mean,
        average_std_err,
        samples,
    })
}

/// Deterministic trial-division primality check; desk-scale inputs.
pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3usize;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

/// Feasibility margin of a random-graph code correcting f of n errors on
/// d-level systems with m encoded systems: (m/n + 4f/n − 1)·ld d + H₂(2f/n).
/// The code family exists when the margin is strictly negative.
pub fn hashing_feasible(d: usize, n: u64, f: u64, m: u64) -> Result<(bool, f64)> {
    if !is_prime(d) {
        return Err(Error::Domain(format!("local dimension {d} must be prime")));
    }
    if n == 0 || m > n {
        return Err(Error::Domain("need n ≥ 1 and m ≤ n".into()));
    }
    if 2 * f > n {
        return Err(Error::Domain(
            "error weight f must satisfy 2f ≤ n for the entropy term".into(),
        ));
    }
    let nf = n as f64;
    let margin = (m as f64 / nf + 4.0 * f as f64 / nf - 1.0) * ld(d as f64)
        + binary_entropy(2.0 * f as f64 / nf)?;
    Ok((margin < 0.0, margin))
}

/// Converts correction of rare errors into a bound on arbitrary small errors:
/// (2^{H₂((f+1)/n)} · δ_cb^{(f+1)/n})^n for a code correcting f of n errors.
pub fn rare_to_small_bound(cb_error: f64, n: u64, f: u64) -> Result<f64> {
    if cb_error < 0.0 || !cb_error.is_finite() {
        return Err(Error::Domain("cb error must be a nonnegative real".into()));
    }
    if n == 0 || f + 1 > n {
        return Err(Error::Domain("need n ≥ 1 and f + 1 ≤ n".into()));
    }
    let ratio = (f + 1) as f64 / n as f64;
    let base = 2f64.powf(binary_entropy(ratio)?) * cb_error.powf(ratio);
    Ok(base.powi(n as i32))
}

/// Capacity lower bound from one successful coding scheme with cb-error Δ on
/// N parallel uses: (ld d/N)(1 − 4eΔ) − H₂(2eΔ)/N, defined for Δ < 1/(2e).
/// The raw affine value is returned; it is a valid lower bound only when
/// positive, and clamping is left to presentation layers.
pub fn hashing_capacity_bound(d: usize, n_uses: u64, delta: f64) -> Result<f64> {
    if !is_prime(d) {
        return Err(Error::Domain(format!("local dimension {d} must be prime")));
    }
    if n_uses == 0 {
        return Err(Error::Domain("need at least one channel use".into()));
    }
    let e = std::f64::consts::E;
    if !(0.0..1.0 / (2.0 * e)).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta = {delta} outside [0, 1/(2e))"
        )));
    }
    let n = n_uses as f64;
    Ok((ld(d as f64) / n) * (1.0 - 4.0 * e * delta) - binary_entropy(2.0 * e * delta)? / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing_channel, pinch_channel};
    use crate::operators::partial_trace_first;
    use crate::random::{haar_isometry, random_channel, random_density};

    #[test]
    fn ideal_capacity_values() {
        assert!((ideal_capacity(4, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!((ideal_capacity(3, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((ideal_capacity(2, 8).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(ideal_capacity(2, 1).is_err());
    }

    #[test]
    fn unit_conversion_identities() {
        let check = unit_conversion_check(8, 2, 4).unwrap();
        assert!(check.holds);
        assert!((ideal_capacity(8, 2).unwrap() - 2.0 * ideal_capacity(8, 4).unwrap()).abs() < 1e-12);
        assert!(unit_conversion_check(5, 3, 3).unwrap().holds);
        let check = unit_conversion_check(7, 3, 9).unwrap();
        assert!(check.holds);
        assert!(
            (ideal_capacity(7, 3).unwrap() - 2.0 * ideal_capacity(7, 9).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn transposition_bound_on_ideal_and_depolarizing() {
        let id2 = Channel::identity(2).unwrap();
        let b = partial_transposition_bound(&id2, 64, 0).unwrap();
        assert!((b.value - 1.0).abs() < 2e-3, "Q_Θ(id_2) = {}", b.value);

        let depol = depolarizing_channel(2, 1.0).unwrap();
        let b = partial_transposition_bound(&depol, 64, 0).unwrap();
        assert!(b.value.abs() < 2e-3, "Q_Θ(depol) = {}", b.value);
    }

    #[test]
    fn coherent_information_examples() {
        let mut rng = task_rng(1, 0);
        let rho = random_density(&mut rng, 3, None);
        let id = Channel::identity(3).unwrap();
        let ic = coherent_information(&rho, &id).unwrap();
        assert!((ic - crate::operators::von_neumann_entropy(&rho)).abs() < 1e-9);

        let depol = depolarizing_channel(2, 1.0).unwrap();
        let chaos = DensityOperator::maximally_mixed(2).unwrap();
        let ic = coherent_information(&chaos, &depol).unwrap();
        assert!((ic + 1.0).abs() < 1e-9, "I_c = {ic}");
    }

    #[test]
    fn coherent_information_purification_invariance() {
        // rotate the ancilla basis of the purification: the joint output
        // entropy cannot change
        let mut rng = task_rng(2, 0);
        let rho = random_density(&mut rng, 2, None);
        let t = random_channel(&mut rng, 2, 2, 2);
        let base = coherent_information(&rho, &t).unwrap();

        let d = 2usize;
        let psi = purify(&rho);
        let u = haar_unitary(&mut rng, d);
        let rotated = kron(&identity(d), &u) * psi.amplitudes();
        let rotated_proj = &rotated * rotated.adjoint();
        let mut joint = CMat::zeros(d * d, d * d);
        for k in t.kraus() {
            let lifted = kron(k, &identity(d));
            joint += &lifted * &rotated_proj * lifted.adjoint();
        }
        let alt = crate::operators::von_neumann_entropy(&t.apply(&rho).unwrap())
            - crate::operators::von_neumann_entropy(&DensityOperator::new(joint).unwrap());
        assert!((base - alt).abs() < 1e-10);
        let _ = partial_trace_first(&identity(4), 2, 2).unwrap();
    }

    #[test]
    fn max_coherent_information_of_identity() {
        let id = Channel::identity(2).unwrap();
        let v = max_coherent_information(&id, 24, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "max I_c(id_2) = {v}");
    }

    #[test]
    fn max_coherent_information_depolarizing_nonpositive() {
        let depol = depolarizing_channel(2, 1.0).unwrap();
        let v = max_coherent_information(&depol, 16, 0).unwrap();
        assert!(v <= 1e-6, "max I_c = {v}");
    }

    #[test]
    fn max_coherent_information_unitary_channel() {
        let mut rng = task_rng(3, 0);
        let u = haar_unitary(&mut rng, 3);
        let t = Channel::unitary(&u).unwrap();
        let v = max_coherent_information(&t, 24, 1).unwrap();
        assert!((v - ld(3.0)).abs() < 1e-5, "max I_c = {v}");
    }

    #[test]
    fn two_block_regularization_of_identity() {
        let id = Channel::identity(2).unwrap();
        let v = max_coherent_information_blocks(&id, 2, 12, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "I_c rate = {v}");
        assert!(max_coherent_information_blocks(&id, 3, 4, 0).is_err());
    }

    #[test]
    fn isometric_upgrade_trivial_case() {
        // E already isometric, T = id: nothing to gain, fidelity stays 1
        let mut rng = task_rng(4, 0);
        let v = haar_isometry(&mut rng, 3, 3);
        let e = CpMap::new(vec![v]).unwrap();
        let t = Channel::identity(3).unwrap();
        let rho = random_density(&mut rng, 3, None);
        let upgraded = isometric_upgrade(&rho, &e, &t).unwrap();
        let before = {
            let mut kraus = Vec::new();
            for tk in t.kraus() {
                for ek in e.kraus() {
                    kraus.push(tk * ek);
                }
            }
            entanglement_fidelity_cp(&rho, &CpMap::new(kraus).unwrap()).unwrap()
        };
        let after = {
            let mut kraus = Vec::new();
            for tk in t.kraus() {
                for uk in upgraded.kraus() {
                    kraus.push(tk * uk);
                }
            }
            entanglement_fidelity_cp(&rho, &CpMap::new(kraus).unwrap()).unwrap()
        };
        assert!(after >= before * before - 1e-9);
        assert!((after - 1.0).abs() < 1e-9);
    }

    #[test]
    fn isometric_upgrade_random_instances_both_branches() {
        let mut rng = task_rng(5, 0);
        // (η, κ) pairs on both sides of the isometry direction
        let shapes = [(2usize, 3usize), (3, 2), (2, 2), (4, 2), (2, 4), (3, 4)];
        for (round, &(eta, kappa)) in shapes.iter().cycle().take(30).enumerate() {
            let rho = random_density(&mut rng, eta, None);
            let t = random_channel(&mut rng, kappa, eta, 2);
            // random CP encoder normalized on ϱ
            let raw = CpMap::new(
                (0..2)
                    .map(|_| crate::random::random_gaussian_matrix(&mut rng, kappa, eta))
                    .collect(),
            )
            .unwrap();
            let w = raw.apply_matrix(rho.matrix()).unwrap().trace().re;
            let e = raw.scale(1.0 / w);
            let upgraded = isometric_upgrade(&rho, &e, &t).unwrap();
            assert!(
                upgraded.as_cp().trace_preservation_defect() < 1e-9,
                "round {round}: Ẽ not trace-preserving"
            );
            let fid = |enc: &[CMat]| {
                let mut kraus = Vec::new();
                for tk in t.kraus() {
                    for ek in enc {
                        kraus.push(tk * ek);
                    }
                }
                entanglement_fidelity_cp(&rho, &CpMap::new(kraus).unwrap()).unwrap()
            };
            let before = fid(e.kraus());
            let after = fid(upgraded.kraus());
            assert!(
                after >= before * before - 1e-9,
                "round {round} ({eta},{kappa}): {after} < {before}²"
            );
        }
    }

    #[test]
    fn isometric_upgrade_rejects_unnormalized_encoder() {
        let mut rng = task_rng(6, 0);
        let rho = random_density(&mut rng, 2, None);
        let t = random_channel(&mut rng, 2, 2, 2);
        let raw = CpMap::new(vec![crate::random::random_gaussian_matrix(&mut rng, 2, 2)]).unwrap();
        assert!(isometric_upgrade(&rho, &raw, &t).is_err());
    }

    #[test]
    fn best_branch_selects_the_good_branch() {
        // branch 0: perfect identity encoding; branch 1: depolarizing mess
        let d = 2usize;
        let perfect = CpMap::new(vec![identity(d).scale(0.5f64.sqrt())]).unwrap();
        let noisy = depolarizing_channel(d, 1.0).unwrap().as_cp().scale(0.5);
        let instrument = Instrument::new(vec![perfect, noisy]).unwrap();
        let decoders = vec![Channel::identity(d).unwrap(), Channel::identity(d).unwrap()];
        let t = Channel::identity(d).unwrap();
        let rho = DensityOperator::maximally_mixed(d).unwrap();
        let sel = best_branch(&instrument, &decoders, &t, &rho).unwrap();
        assert_eq!(sel.index, 0);
        assert!((sel.weights[0] - 0.5).abs() < 1e-10);
        assert!(sel.achieved_fidelity >= sel.normalized_fidelities[0].powi(2) - 1e-9);
        assert!((sel.achieved_fidelity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn best_branch_single_branch_is_identity_choice() {
        let mut rng = task_rng(7, 0);
        let t = random_channel(&mut rng, 2, 2, 2);
        let enc = Channel::identity(2).unwrap().as_cp().clone();
        let instrument = Instrument::new(vec![enc]).unwrap();
        let decoders = vec![Channel::identity(2).unwrap()];
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let sel = best_branch(&instrument, &decoders, &t, &rho).unwrap();
        assert_eq!(sel.index, 0);
    }

    #[test]
    fn best_branch_end_to_end_quadratic_loss() {
        // random instruments: the unassisted scheme loses at most a squaring
        let mut rng = task_rng(8, 0);
        for _ in 0..10 {
            let big = random_channel(&mut rng, 2, 2, 6);
            let ks = big.kraus();
            let instrument = Instrument::new(vec![
                CpMap::new(ks[0..2].to_vec()).unwrap(),
                CpMap::new(ks[2..4].to_vec()).unwrap(),
                CpMap::new(ks[4..6].to_vec()).unwrap(),
            ])
            .unwrap();
            let decoders: Vec<Channel> = (0..3)
                .map(|_| random_channel(&mut rng, 2, 2, 2))
                .collect();
            let t = random_channel(&mut rng, 2, 2, 2);
            let rho = DensityOperator::maximally_mixed(2).unwrap();
            let sel = best_branch(&instrument, &decoders, &t, &rho).unwrap();
            let eps = 1.0 - sel.assisted_fidelity;
            assert!(
                sel.achieved_fidelity >= (1.0 - eps).powi(2) - 1e-9,
                "achieved {} vs ({})²",
                sel.achieved_fidelity,
                1.0 - eps
            );
        }
    }

    #[test]
    fn haar_bridge_identity_scheme() {
        let id = Channel::identity(2).unwrap();
        let res = haar_assist_bridge(&id, &id, &id, None, 200, 0).unwrap();
        assert!((res.assisted_mean - 1.0).abs() < 1e-12);
        assert!((res.average_mean - 1.0).abs() < 1e-12);
        assert!(res.assisted_std_err < 1e-12 && res.average_std_err < 1e-12);
    }

    #[test]
    fn haar_bridge_pinch_matches_average_fidelity() {
        let pinch = pinch_channel(&UnitVector::basis_state(2, 0).unwrap()).unwrap();
        let id = Channel::identity(2).unwrap();
        let res = haar_assist_bridge(&pinch, &id, &id, None, 100_000, 1).unwrap();
        let se = res.assisted_std_err.hypot(res.average_std_err);
        assert!(
            (res.assisted_mean - res.average_mean).abs() <= 3.0 * se,
            "assisted {} vs average {}",
            res.assisted_mean,
            res.average_mean
        );
        assert!((res.assisted_mean - 2.0 / 3.0).abs() <= 3.0 * res.assisted_std_err);
    }

    #[test]
    fn haar_bridge_reference_independence() {
        let pinch = pinch_channel(&UnitVector::basis_state(2, 0).unwrap()).unwrap();
        let id = Channel::identity(2).unwrap();
        let mut rng = task_rng(9, 0);
        let mut means = Vec::new();
        let mut ses = Vec::new();
        for _ in 0..5 {
            let reference = haar_unit_vector(&mut rng, 2);
            let res =
                haar_assist_bridge(&pinch, &id, &id, Some(&reference), 20_000, 2).unwrap();
            means.push(res.assisted_mean);
            ses.push(res.assisted_std_err);
        }
        for i in 1..means.len() {
            let se = ses[0].hypot(ses[i]);
            assert!((means[i] - means[0]).abs() <= 3.0 * se);
        }
    }

    #[test]
    fn hashing_feasibility_flip() {
        let (ok, margin) = hashing_feasible(2, 100, 1, 80).unwrap();
        assert!(ok);
        assert!((margin - (-0.018559457458179246)).abs() < 1e-12);
        let (ok, margin) = hashing_feasible(2, 100, 1, 90).unwrap();
        assert!(!ok);
        assert!((margin - 0.08144054254182073).abs() < 1e-12);
        // boundary: f = 0, m = n gives margin 0, infeasible by strictness
        let (ok, margin) = hashing_feasible(2, 50, 0, 50).unwrap();
        assert!(!ok);
        assert_eq!(margin, 0.0);
        assert!(hashing_feasible(4, 10, 1, 5).is_err(), "4 is not prime");
    }

    #[test]
    fn rare_to_small_values() {
        assert_eq!(rare_to_small_bound(0.0, 7, 2).unwrap(), 0.0);
        let v = rare_to_small_bound(0.1, 2, 0).unwrap();
        assert!((v - 0.4).abs() < 1e-12);
        // at fixed ratio (f+1)/n with parenthesis < 1 the bound decays in n
        let base = 2f64.powf(binary_entropy(0.5).unwrap()) * 0.1f64.powf(0.5);
        assert!(base < 1.0);
        let v4 = rare_to_small_bound(0.1, 4, 1).unwrap();
        let v8 = rare_to_small_bound(0.1, 8, 3).unwrap();
        assert!(v4 < v && v8 < v4);
        assert!((v4 - base.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn hashing_capacity_values() {
        assert!((hashing_capacity_bound(2, 1, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // frozen from the defining expression 1·(1 − 4e·0.01) − H₂(2e·0.01)
        let v = hashing_capacity_bound(2, 1, 0.01).unwrap();
        assert!((v - 0.5866086455205105).abs() < 1e-12, "got {v}");
        assert!(hashing_capacity_bound(2, 1, 0.2).is_err());
        assert!(hashing_capacity_bound(6, 1, 0.0).is_err());
        // ε-capacity sandwich factor reproduces symbolically:
        // bound(Δ)·(1−4eΔ) never exceeds bound(0) and approaches it as Δ→0
        let e = std::f64::consts::E;
        for delta in [0.0, 1e-4, 1e-3, 0.01] {
            let q = hashing_capacity_bound(2, 1, delta).unwrap();
            assert!(q * (1.0 - 4.0 * e * delta) <= 1.0 + 1e-12);
        }
        let near = hashing_capacity_bound(2, 1, 1e-9).unwrap();
        assert!((near - 1.0).abs() < 1e-6);
    }

    #[test]
    fn primality_check() {
        assert!(is_prime(2) && is_prime(3) && is_prime(13) && is_prime(97));
        assert!(!is_prime(1) && !is_prime(9) && !is_prime(91));
    }
}
