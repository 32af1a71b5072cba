//! The equivalence machinery between error measures: the pure-state distance
//! bound, the dimension-independent chain linking entanglement fidelity,
//! minimum fidelity, operator norm and cb-norm, the pinching counterexample
//! that rules such a chain out for channel fidelity, the compressed-channel
//! construction with both tail-weight bounds, finite-n typical-subspace
//! masses, and the entropy-boost source.

use serde::Serialize;

use crate::channels::{pinch_channel, Channel, Superoperator};
use crate::error::{Error, Result};
use crate::fidelity::{entanglement_fidelity, inf_entanglement_fidelity, min_fidelity};
use crate::operators::{
    binary_entropy, creal, hermitian_eigen, hermitian_pinv, identity, ld, trace_norm,
    von_neumann_entropy, CMat, CVec, DensityOperator, UnitVector,
};
use crate::optim::minimize_quartic_on_sphere;
use crate::supnorms::{cb_norm_with_starts, embed_witness, superop_norm_with_starts};

/// Support-rank cutoff for the peeling recursion.
const SUPPORT_CUTOFF: f64 = 1e-12;

/// Trace-norm distance of a state from a pure state next to its fidelity
/// bound: returns (‖ϱ − |ψ⟩⟨ψ|‖₁, 2√(1 − ⟨ψ|ϱ|ψ⟩)). The first never exceeds
/// the second; they agree exactly when ϱ is pure or ψ ⊥ supp ϱ.
pub fn pure_distance_bound(rho: &DensityOperator, psi: &UnitVector) -> Result<(f64, f64)> {
    if rho.dim() != psi.dim() {
        return Err(Error::Dimension(format!(
            "state dim {} vs vector dim {}",
            rho.dim(),
            psi.dim()
        )));
    }
    let lhs = trace_norm(&(rho.matrix() - psi.projector()));
    let overlap = psi
        .amplitudes()
        .dotc(&(rho.matrix() * psi.amplitudes()))
        .re;
    let rhs = 2.0 * (1.0 - overlap).max(0.0).sqrt();
    Ok((lhs, rhs))
}

/// One link of the equivalence chain.
#[derive(Debug, Clone, Serialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Estimator bookkeeping attached to every chain report.
#[derive(Debug, Clone, Serialize)]
pub struct ChainEstimatorMeta {
    pub restarts: u32,
    pub seed: u64,
    pub slack: f64,
    pub cb_ancilla: usize,
    /// Which side of each inequality carries estimator slack: the fidelity
    /// searches certify upper bounds on minima, the norm searches certify
    /// lower bounds on suprema.
    pub bound_directions: String,
}

/// All five chain quantities with per-link verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub dim: usize,
    pub inf_entanglement_fidelity: f64,
    pub min_fidelity: f64,
    pub opnorm_lower: f64,
    pub cbnorm_lower: f64,
    pub one_minus_inf_fe: f64,
    pub four_sqrt_one_minus_min_f: f64,
    pub four_sqrt_opnorm: f64,
    pub four_sqrt_cbnorm: f64,
    pub eight_fourth_root: f64,
    pub links: Vec<ChainLink>,
    pub all_pass: bool,
    pub estimator: ChainEstimatorMeta,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    pub restarts: u32,
    pub seed: u64,
    pub slack: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            slack: 1e-6,
        }
    }
}

/// Maximum dimension accepted by the chain evaluation.
pub const CHAIN_MAX_DIM: usize = 8;

/// Evaluates the whole equivalence chain
/// 1 − inf F_e ≤ 4√(1−F) ≤ 4√‖T−id‖ ≤ 4√‖T−id‖_cb ≤ 8(1 − inf F_e)^{1/4}
/// with certified bound directions: the operator-norm search is seeded with
/// the minimum-fidelity witness and the cb search with the embedded
/// operator-norm witness, so the middle links can never fail through
/// estimator slack alone.
pub fn equivalence_chain(t: &Channel, cfg: &ChainConfig) -> Result<ChainReport> {
    if !t.is_square() {
        return Err(Error::Dimension("chain needs a square channel".into()));
    }
    let d = t.dim_in();
    if d > CHAIN_MAX_DIM {
        return Err(Error::Dimension(format!(
            "chain evaluation supports dim ≤ {CHAIN_MAX_DIM}, got {d}"
        )));
    }
    let (min_f, min_w) = min_fidelity(t, cfg.restarts, cfg.seed)?;
    let (inf_fe, _) = inf_entanglement_fidelity(t, cfg.restarts, cfg.seed.wrapping_add(1))?;
    let diff = t
        .to_superoperator()
        .difference(&Superoperator::identity_map(d))?;
    let w = min_w.amplitudes().clone();
    // The norm legs only need certified lower bounds whose link directions
    // are already secured by the witness seeds, so they run with a reduced
    // restart budget.
    let norm_restarts = (cfg.restarts / 4).max(8);
    let op_est = superop_norm_with_starts(
        &diff,
        norm_restarts,
        cfg.seed.wrapping_add(2),
        &[(w.clone(), w.clone())],
    )?;
    let cb_starts = vec![(
        embed_witness(op_est.left.amplitudes(), d, 1, d),
        embed_witness(op_est.right.amplitudes(), d, 1, d),
    )];
    let cb_est = cb_norm_with_starts(
        &diff,
        None,
        norm_restarts,
        cfg.seed.wrapping_add(3),
        &cb_starts,
    )?;

    let one_minus_inf_fe = 1.0 - inf_fe;
    let four_sqrt_one_minus_min_f = 4.0 * (1.0 - min_f).max(0.0).sqrt();
    let four_sqrt_opnorm = 4.0 * op_est.value.max(0.0).sqrt();
    let four_sqrt_cbnorm = 4.0 * cb_est.value.max(0.0).sqrt();
    let eight_fourth_root = 8.0 * one_minus_inf_fe.max(0.0).powf(0.25);

    let mk = |name: &str, lhs: f64, rhs: f64| ChainLink {
        name: name.to_string(),
        lhs,
        rhs,
        pass: lhs <= rhs + cfg.slack,
    };
    let links = vec![
        mk(
            "one_minus_inf_fe <= four_sqrt_one_minus_min_f",
            one_minus_inf_fe,
            four_sqrt_one_minus_min_f,
        ),
        mk(
            "four_sqrt_one_minus_min_f <= four_sqrt_opnorm",
            four_sqrt_one_minus_min_f,
            four_sqrt_opnorm,
        ),
        mk(
            "four_sqrt_opnorm <= four_sqrt_cbnorm",
            four_sqrt_opnorm,
            four_sqrt_cbnorm,
        ),
        mk(
            "four_sqrt_cbnorm <= eight_fourth_root",
            four_sqrt_cbnorm,
            eight_fourth_root,
        ),
    ];
    let all_pass = links.iter().all(|l| l.pass);
    Ok(ChainReport {
        dim: d,
        inf_entanglement_fidelity: inf_fe,
        min_fidelity: min_f,
        opnorm_lower: op_est.value,
        cbnorm_lower: cb_est.value,
        one_minus_inf_fe,
        four_sqrt_one_minus_min_f,
        four_sqrt_opnorm,
        four_sqrt_cbnorm,
        eight_fourth_root,
        links,
        all_pass,
        estimator: ChainEstimatorMeta {
            restarts: cfg.restarts,
            seed: cfg.seed,
            slack: cfg.slack,
            cb_ancilla: cb_est.ancilla_dim,
            bound_directions: "fidelity values are certified upper bounds on minima; \
                               norm values are certified lower bounds on suprema"
                .to_string(),
        },
    })
}

/// Channel fidelity of the pinching channel next to its closed form, plus the
/// dimension-independent lower-bound witness for ‖T − id‖.
#[derive(Debug, Clone, Serialize)]
pub struct PinchAnalysis {
    pub dim: usize,
    pub channel_fidelity: f64,
    pub closed_form: f64,
    pub opnorm_lower: f64,
}

pub fn pinch_analysis(d: usize) -> Result<PinchAnalysis> {
    if d < 2 {
        return Err(Error::Dimension("pinch analysis needs dim ≥ 2".into()));
    }
    let t = pinch_channel(&UnitVector::basis_state(d, 0)?)?;
    let fc = crate::fidelity::channel_fidelity(&t)?;
    let closed = ((d * d) as f64 - 2.0 * d as f64 + 2.0) / (d * d) as f64;
    // witness ϱ̃ = ½|ψ₁+ψ₂⟩⟨ψ₁+ψ₂|: the pinching removes its off-diagonal
    // half, which costs trace norm 1 at every dimension
    let mut v = CVec::zeros(d);
    v[0] = creal(std::f64::consts::FRAC_1_SQRT_2);
    v[1] = creal(std::f64::consts::FRAC_1_SQRT_2);
    let rho = DensityOperator::pure(&UnitVector::new(v)?);
    let moved = t.apply(&rho)?;
    let opnorm_lower = trace_norm(&(moved.matrix() - rho.matrix()));
    Ok(PinchAnalysis {
        dim: d,
        channel_fidelity: fc,
        closed_form: closed,
        opnorm_lower,
    })
}

/// Outcome of the recursive low-fidelity peeling plus the compressed channel.
#[derive(Debug, Clone)]
pub struct CompressedChannelResult {
    /// Rank k of the retained projector.
    pub retained_rank: usize,
    /// Orthonormal basis of the retained subspace (columns of a d×k isometry).
    pub retained_basis: CMat,
    /// The compressed channel on the retained space.
    pub compressed: Channel,
    /// F_e(ϱ, T) of the input pair.
    pub entanglement_fidelity: f64,
    /// Tail weight q* = k·‖ϱ‖.
    pub q_star_norm: f64,
    /// Entropic tail weight (1 + ld d − S(ϱ))/(ld d − ld k); +∞ when k = d.
    pub q_star_entropy: f64,
    /// Actual tail weight Σ of the last k peel weights.
    pub tail_weight: f64,
    /// 1 − (1 − F_e)/(1 − q*) using the norm bound; −∞ when vacuous (q* ≥ 1).
    pub bound_from_norm: f64,
    /// Same with the entropic bound.
    pub bound_from_entropy: f64,
    /// Peel weights q_i in removal order; they sum to 1.
    pub peel_weights: Vec<f64>,
    /// Peeled fidelities f(φ_i); nondecreasing by construction.
    pub peel_fidelities: Vec<f64>,
    /// Certified minimum-fidelity value of the compressed channel.
    pub min_fidelity_estimate: f64,
    /// Witness (on C^k) realizing the estimate.
    pub min_fidelity_witness: UnitVector,
}

fn bound_value(f_e: f64, q_star: f64) -> f64 {
    if q_star < 1.0 {
        1.0 - (1.0 - f_e) / (1.0 - q_star)
    } else {
        f64::NEG_INFINITY
    }
}

/// Recursively removes the lowest-fidelity direction from the support of ϱ
/// and keeps the span of the last k peeled vectors; builds the compressed
/// channel σ ↦ P T(σ) P + tr((1−P)T(σ))/k · P on that span and reports both
/// tail-weight bounds together with the certified minimum fidelity of the
/// compressed channel.
pub fn compress_channel(
    t: &Channel,
    rho: &DensityOperator,
    k: usize,
    restarts: u32,
    seed: u64,
) -> Result<CompressedChannelResult> {
    if !t.is_square() || t.dim_in() != rho.dim() {
        return Err(Error::Dimension(
            "compression needs a square channel matching the state".into(),
        ));
    }
    let d = rho.dim();
    let rank = rho.rank(SUPPORT_CUTOFF);
    if k == 0 || k > rank {
        return Err(Error::Domain(format!(
            "retained rank k={k} must satisfy 1 ≤ k ≤ rank(ϱ)={rank}"
        )));
    }

    let f_e = entanglement_fidelity(rho, t)?;
    let mut current = rho.matrix().clone();
    let mut peeled: Vec<CVec> = Vec::with_capacity(rank);
    let mut weights: Vec<f64> = Vec::with_capacity(rank);
    let mut fidelities: Vec<f64> = Vec::with_capacity(rank);

    for step in 0..rank {
        let basis = support_basis_of(&current, SUPPORT_CUTOFF);
        let r = basis.ncols();
        if r == 0 {
            break;
        }
        // minimize f over the current support: compress the Kraus quadratic
        // forms onto the support basis
        let mats: Vec<CMat> = t
            .kraus()
            .iter()
            .map(|kop| basis.adjoint() * kop * &basis)
            .collect();
        let opt = minimize_quartic_on_sphere(
            &mats,
            r,
            restarts,
            seed.wrapping_add(step as u64),
            &[],
            400,
            1e-13,
        );
        let phi = &basis * &opt.witness;
        // largest weight keeping ϱ − q|φ⟩⟨φ| positive: 1/⟨φ|ϱ⁺|φ⟩ on the support
        let pinv = hermitian_pinv(&current, SUPPORT_CUTOFF);
        let denom = phi.dotc(&(&pinv * &phi)).re;
        if denom <= 0.0 {
            return Err(Error::Invariant(
                "peeling direction left the support numerically".into(),
            ));
        }
        let q = 1.0 / denom;
        current -= (&phi * phi.adjoint()).scale(q);
        peeled.push(phi);
        weights.push(q);
        fidelities.push(opt.value);
    }

    // retained span: the last k peeled vectors, orthonormalized
    let mut span = CMat::zeros(d, k);
    for (j, phi) in peeled[peeled.len() - k..].iter().enumerate() {
        span.set_column(j, phi);
    }
    let qr = span.qr();
    let basis = qr.q();
    let r_mat = qr.r();
    for j in 0..k {
        if r_mat[(j, j)].norm() < 1e-8 {
            return Err(Error::Invariant(
                "retained peel vectors are numerically dependent".into(),
            ));
        }
    }

    // compressed channel on C^k: P T(σ) P part plus the trace completion
    let mut kraus: Vec<CMat> = t
        .kraus()
        .iter()
        .map(|kop| basis.adjoint() * kop * &basis)
        .collect();
    let p = &basis * basis.adjoint();
    let leak = identity(d) - &p;
    let mut m = CMat::zeros(k, k);
    for kop in t.kraus() {
        let lifted = kop * &basis;
        m += lifted.adjoint() * &leak * lifted;
    }
    let (mvals, mvecs) = hermitian_eigen(&m);
    let scale = creal(1.0 / (k as f64).sqrt());
    for (lambda, v) in mvals.iter().zip(mvecs.iter()) {
        if *lambda <= SUPPORT_CUTOFF {
            continue;
        }
        let row = v.scale(lambda.sqrt()).adjoint();
        for a in 0..k {
            let mut kop = CMat::zeros(k, k);
            for c in 0..k {
                kop[(a, c)] = row[(0, c)] * scale;
            }
            kraus.push(kop);
        }
    }
    let compressed = Channel::new(kraus)?;

    let tail_weight: f64 = weights[weights.len() - k..].iter().sum();
    let q_star_norm = k as f64 * rho.sup_eigenvalue();
    let q_star_entropy = if k == d {
        f64::INFINITY
    } else {
        (1.0 + ld(d as f64) - von_neumann_entropy(rho)) / (ld(d as f64) - ld(k as f64))
    };
    let (min_est, min_w) = min_fidelity(&compressed, restarts, seed.wrapping_add(0xC0))?;

    Ok(CompressedChannelResult {
        retained_rank: k,
        retained_basis: basis,
        compressed,
        entanglement_fidelity: f_e,
        q_star_norm,
        q_star_entropy,
        tail_weight,
        bound_from_norm: bound_value(f_e, q_star_norm),
        bound_from_entropy: bound_value(f_e, q_star_entropy),
        peel_weights: weights,
        peel_fidelities: fidelities,
        min_fidelity_estimate: min_est,
        min_fidelity_witness: min_w,
    })
}

fn support_basis_of(m: &CMat, cutoff: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let cols: Vec<&CVec> = vals
        .iter()
        .zip(vecs.iter())
        .filter(|(l, _)| **l > cutoff)
        .map(|(_, v)| v)
        .collect();
    let mut b = CMat::zeros(m.nrows(), cols.len());
    for (j, v) in cols.iter().enumerate() {
        b.set_column(j, v);
    }
    b
}

/// Total probability mass of eigenvalues λ of ϱ^{⊗n} (ϱ with spectrum `p`)
/// lying in the window 2^{−n(R+ε)} ≤ λ ≤ 2^{−n(R−ε)}, computed by exact
/// multiplicity counting over type classes — no 2^n enumeration.
pub fn qaep_typical_mass(p: &[f64], n: u32, rate: f64, epsilon: f64) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Domain("spectrum must be nonempty".into()));
    }
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x) || !x.is_finite()) {
        return Err(Error::Domain("spectrum entries must lie in [0,1]".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "spectrum sums to {total}, expected 1"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("block length n must be ≥ 1".into()));
    }
    if epsilon < 0.0 {
        return Err(Error::Domain("epsilon must be nonnegative".into()));
    }
    let nonzero: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    let dcount = nonzero.len();
    // the walk enumerates C(n + D − 1, D − 1) type classes; refuse inputs
    // where that count leaves desk scale
    let mut classes = 1.0f64;
    for i in 1..dcount {
        classes *= (n as f64 + i as f64) / i as f64;
        if classes > 5e6 {
            return Err(Error::Domain(format!(
                "type-class count for spectrum size {dcount} at n = {n} exceeds the supported range"
            )));
        }
    }
    // ln k! table
    let nn = n as usize;
    let mut lnfact = vec![0.0f64; nn + 1];
    for i in 1..=nn {
        lnfact[i] = lnfact[i - 1] + (i as f64).ln();
    }
    let lo = n as f64 * (rate - epsilon);
    let hi = n as f64 * (rate + epsilon);
    let mut mass = 0.0f64;
    // iterate compositions of n into dcount parts
    let mut counts = vec![0usize; dcount];
    fn walk(
        slot: usize,
        remaining: usize,
        counts: &mut [usize],
        nonzero: &[f64],
        lnfact: &[f64],
        n: usize,
        lo: f64,
        hi: f64,
        mass: &mut f64,
    ) {
        if slot + 1 == counts.len() {
            counts[slot] = remaining;
            let mut neg_ld = 0.0f64;
            let mut ln_prob = lnfact[n];
            for (c, q) in counts.iter().zip(nonzero.iter()) {
                neg_ld -= *c as f64 * q.log2();
                ln_prob += *c as f64 * q.ln() - lnfact[*c];
            }
            if lo <= neg_ld && neg_ld <= hi {
                *mass += ln_prob.exp();
            }
            return;
        }
        for c in 0..=remaining {
            counts[slot] = c;
            walk(slot + 1, remaining - c, counts, nonzero, lnfact, n, lo, hi, mass);
        }
    }
    walk(0, nn, &mut counts, &nonzero, &lnfact, nn, lo, hi, &mut mass);
    Ok(mass.min(1.0))
}

/// Per-block-length entropy accounting for the two-block mixture
/// ϱ_n = (1−ε)·1/dim H ⊕ ε·1/dim K, evaluated symbolically in the
/// dimensions (only their base-2 logarithms enter), so boost dimensions like
/// 2^{n³} never materialize.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyBoostRow {
    pub n: u32,
    pub epsilon: f64,
    pub ld_dim_base: f64,
    pub ld_dim_boost: f64,
    /// S(ϱ_n) = H₂(ε) + (1−ε)·ld dim H + ε·ld dim K, in bits.
    pub entropy: f64,
    /// The guaranteed lower bound ε(−ld ε + ld dim K).
    pub lower_bound: f64,
    pub entropy_rate: f64,
    pub gap: f64,
}

pub fn entropy_boost_source(
    ns: &[u32],
    ld_dim_base: &[f64],
    epsilons: &[f64],
    boost_exponent: u32,
) -> Result<Vec<EntropyBoostRow>> {
    if ld_dim_base.len() != epsilons.len() || ns.len() != epsilons.len() {
        return Err(Error::Dimension(
            "block, base-dimension and epsilon sequences must have equal length".into(),
        ));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for (i, (&ldh, &eps)) in ld_dim_base.iter().zip(epsilons.iter()).enumerate() {
        let n = ns[i];
        if n == 0 {
            return Err(Error::Domain("block lengths must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::Domain(format!(
                "epsilon_{n} = {eps} outside [0, 1)"
            )));
        }
        if ldh < 0.0 {
            return Err(Error::Domain("base dimension log must be nonnegative".into()));
        }
        let ldk = (n as f64).powi(boost_exponent as i32);
        let entropy = binary_entropy(eps)? + (1.0 - eps) * ldh + eps * ldk;
        let lower_bound = if eps > 0.0 { eps * (-ld(eps) + ldk) } else { 0.0 };
        rows.push(EntropyBoostRow {
            n,
            epsilon: eps,
            ld_dim_base: ldh,
            ld_dim_boost: ldk,
            entropy,
            lower_bound,
            entropy_rate: entropy / n as f64,
            gap: entropy - lower_bound,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::partial_trace_second;
    use crate::random::{haar_unit_vector, random_channel, random_density, task_rng};

    #[test]
    fn pure_distance_bound_cases() {
        let psi = UnitVector::basis_state(3, 0).unwrap();
        let rho = DensityOperator::pure(&psi);
        let (lhs, rhs) = pure_distance_bound(&rho, &psi).unwrap();
        assert!(lhs < 1e-12 && rhs < 1e-8);

        // pure ϱ with overlap c: equality 2√(1−c)
        let mut rng = task_rng(1, 0);
        for _ in 0..20 {
            let a = haar_unit_vector(&mut rng, 3);
            let b = haar_unit_vector(&mut rng, 3);
            let c = a.amplitudes().dotc(b.amplitudes()).norm_sqr();
            let (lhs, rhs) = pure_distance_bound(&DensityOperator::pure(&a), &b).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
            assert!((rhs - 2.0 * (1.0 - c).sqrt()).abs() < 1e-9);
        }

        // mixed chaos vs any qubit vector: 1 < √2
        let chaos = DensityOperator::maximally_mixed(2).unwrap();
        let (lhs, rhs) = pure_distance_bound(&chaos, &UnitVector::basis_state(2, 0).unwrap()).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!((rhs - std::f64::consts::SQRT_2).abs() < 1e-12);

        // ψ orthogonal to the support: equality at 2
        let mut m = CMat::zeros(3, 3);
        m[(0, 0)] = creal(0.6);
        m[(1, 1)] = creal(0.4);
        let rho = DensityOperator::new(m).unwrap();
        let (lhs, rhs) = pure_distance_bound(&rho, &UnitVector::basis_state(3, 2).unwrap()).unwrap();
        assert!((lhs - 2.0).abs() < 1e-12);
        assert!((rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distance_lemma_on_random_pairs() {
        let mut rng = task_rng(2, 0);
        for d in [2usize, 3, 4, 8] {
            for _ in 0..50 {
                let rho = random_density(&mut rng, d, None);
                let psi = haar_unit_vector(&mut rng, d);
                let (lhs, rhs) = pure_distance_bound(&rho, &psi).unwrap();
                assert!(lhs <= rhs + 1e-10);
            }
        }
    }

    #[test]
    fn chain_on_identity() {
        let t = Channel::identity(2).unwrap();
        let report = equivalence_chain(&t, &ChainConfig::default()).unwrap();
        assert!(report.all_pass);
        assert!(report.one_minus_inf_fe.abs() < 1e-8);
        assert!(report.four_sqrt_opnorm.abs() < 1e-5);
    }

    #[test]
    fn chain_on_pinch() {
        let t = pinch_channel(&UnitVector::basis_state(2, 0).unwrap()).unwrap();
        let report = equivalence_chain(&t, &ChainConfig::default()).unwrap();
        assert!(report.all_pass, "links: {:?}", report.links);
        assert!((report.one_minus_inf_fe - 0.5).abs() < 1e-6);
        assert!((report.four_sqrt_one_minus_min_f - 4.0 * 0.5f64.sqrt()).abs() < 1e-6);
        // derived quantities reproduce from the primitives
        assert!(
            (report.four_sqrt_cbnorm - 4.0 * report.cbnorm_lower.sqrt()).abs() < 1e-12
        );
    }

    #[test]
    fn chain_rejects_large_dimensions() {
        let t = Channel::identity(9).unwrap();
        assert!(equivalence_chain(&t, &ChainConfig::default()).is_err());
    }

    #[test]
    fn chain_on_random_qubit_channels() {
        let mut rng = task_rng(3, 0);
        let cfg = ChainConfig {
            restarts: 24,
            seed: 7,
            slack: 1e-6,
        };
        for _ in 0..10 {
            let t = random_channel(&mut rng, 2, 2, 3);
            let report = equivalence_chain(&t, &cfg).unwrap();
            assert!(report.all_pass, "links: {:?}", report.links);
        }
    }

    #[test]
    fn pinch_analysis_values() {
        let a = pinch_analysis(2).unwrap();
        assert!((a.channel_fidelity - 0.5).abs() < 1e-12);
        assert!((a.opnorm_lower - 1.0).abs() < 1e-9);
        let a16 = pinch_analysis(16).unwrap();
        assert!((a16.channel_fidelity - 226.0 / 256.0).abs() < 1e-12);
        assert!((a16.opnorm_lower - 1.0).abs() < 1e-9);
        // F_c increases toward 1 with dimension
        let mut last = 0.0;
        for d in [2usize, 4, 8, 16, 32] {
            let v = pinch_analysis(d).unwrap().channel_fidelity;
            assert!(v > last);
            last = v;
        }
        assert!(1.0 - last < 0.07);
    }

    #[test]
    fn compress_identity_channel_is_perfect() {
        let t = Channel::identity(4).unwrap();
        let mut rng = task_rng(4, 0);
        let rho = random_density(&mut rng, 4, None);
        let res = compress_channel(&t, &rho, 2, 16, 0).unwrap();
        assert!((res.min_fidelity_estimate - 1.0).abs() < 1e-9);
        assert!((res.entanglement_fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn compress_chaotic_state_halving() {
        let mut rng = task_rng(5, 0);
        let t = random_channel(&mut rng, 4, 4, 3);
        let rho = DensityOperator::maximally_mixed(4).unwrap();
        let res = compress_channel(&t, &rho, 2, 24, 0).unwrap();
        assert!((res.q_star_norm - 0.5).abs() < 1e-9);
        // weights sum to one, fidelities nondecreasing, bound certified
        let total: f64 = res.peel_weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        for w in res.peel_fidelities.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        assert!(res.tail_weight <= res.q_star_norm.min(res.q_star_entropy) + 1e-9);
        assert!(res.min_fidelity_estimate >= res.bound_from_norm - 1e-9);
        assert!(res.min_fidelity_estimate >= res.bound_from_entropy - 1e-9);
        // expected bound value 1 − 2(1 − F_e)
        let expect = 1.0 - 2.0 * (1.0 - res.entanglement_fidelity);
        assert!((res.bound_from_norm - expect).abs() < 1e-9);
    }

    #[test]
    fn compress_rejects_bad_rank() {
        let t = Channel::identity(3).unwrap();
        let rho = DensityOperator::maximally_mixed(3).unwrap();
        assert!(compress_channel(&t, &rho, 0, 4, 0).is_err());
        assert!(compress_channel(&t, &rho, 4, 4, 0).is_err());
    }

    #[test]
    fn compressed_channel_is_trace_preserving() {
        let mut rng = task_rng(6, 0);
        for _ in 0..5 {
            let t = random_channel(&mut rng, 4, 4, 2);
            let rho = random_density(&mut rng, 4, None);
            let k = rho.rank(1e-12).min(2);
            let res = compress_channel(&t, &rho, k, 16, 1).unwrap();
            assert!(res.compressed.as_cp().trace_preservation_defect() < 1e-9);
            // retained basis is an isometry
            let b = &res.retained_basis;
            assert!((b.adjoint() * b - identity(k)).norm() < 1e-10);
            let _ = partial_trace_second(&identity(4), 2, 2).unwrap();
        }
    }

    #[test]
    fn qaep_uniform_spectrum_has_full_mass() {
        for n in [1u32, 10, 100] {
            let mass = qaep_typical_mass(&[0.5, 0.5], n, 1.0, 0.05).unwrap();
            assert!((mass - 1.0).abs() < 1e-12);
            let mass0 = qaep_typical_mass(&[0.5, 0.5], n, 1.0, 0.0).unwrap();
            assert!((mass0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qaep_binomial_masses_match_frozen_oracle() {
        let r = binary_entropy(0.9).unwrap();
        let m50 = qaep_typical_mass(&[0.9, 0.1], 50, r, 0.1).unwrap();
        let m100 = qaep_typical_mass(&[0.9, 0.1], 100, r, 0.1).unwrap();
        let m200 = qaep_typical_mass(&[0.9, 0.1], 200, r, 0.1).unwrap();
        assert!((m50 - 0.5199329358503246).abs() < 1e-9);
        assert!((m100 - 0.7589675919647643).abs() < 1e-9);
        assert!((m200 - 0.8762132727894401).abs() < 1e-9);
        assert!(m50 < m100 && m100 < m200);
    }

    #[test]
    fn qaep_point_window_misses_nondegenerate_spectrum() {
        let r = binary_entropy(0.9).unwrap();
        let mass = qaep_typical_mass(&[0.9, 0.1], 100, r, 0.0).unwrap();
        assert!(mass < 1e-6);
    }

    #[test]
    fn qaep_large_n_multiplicity_counting() {
        let r = binary_entropy(0.9).unwrap();
        let mass = qaep_typical_mass(&[0.9, 0.1], 1000, r, 0.1).unwrap();
        assert!(mass > 0.999 && mass <= 1.0);
    }

    #[test]
    fn entropy_boost_rows() {
        // ε = 0: pure first block
        let rows = entropy_boost_source(&[5], &[3.0], &[0.0], 3).unwrap();
        assert!((rows[0].entropy - 3.0).abs() < 1e-12);
        assert!(rows[0].gap >= 0.0);

        // ε_n = 1/n, ld dim K = n³: entropy rate diverges like n²
        let ns: Vec<u32> = (2..=100).collect();
        let ldh: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let eps: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let rows = entropy_boost_source(&ns, &ldh, &eps, 3).unwrap();
        for row in &rows {
            assert!(row.gap >= 0.0, "bound violated at n={}", row.n);
            let n = row.n as f64;
            assert!(row.entropy_rate >= n - 2.0);
        }
        // rejects ε outside [0,1)
        assert!(entropy_boost_source(&[1], &[1.0], &[1.0], 3).is_err());
    }
}
