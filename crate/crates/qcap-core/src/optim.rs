//! Multi-start local optimizers shared by the fidelity and norm estimators.
//!
//! Every search is deterministic: restart r of a run with seed s draws from
//! an independent stream derived from (s, r), restarts run in parallel and
//! the reduction breaks exact ties by the canonical-phase lexicographic order
//! of the witness, so results do not depend on scheduling.

use rayon::prelude::*;

use crate::operators::{canonical_phase, lex_cmp, CMat, CVec};
use crate::random::{haar_unit_vector, task_rng};

/// Result of a sphere search: the objective value at `witness`, exactly.
#[derive(Debug, Clone)]
pub struct SphereOpt {
    pub value: f64,
    pub witness: CVec,
}

/// f(ψ) = Σ_k |⟨ψ|A_k|ψ⟩|², the pure-state fidelity form of a Kraus list.
pub fn quartic_value(mats: &[CMat], psi: &CVec) -> f64 {
    mats.iter()
        .map(|a| {
            let q = psi.dotc(&(a * psi));
            q.norm_sqr()
        })
        .sum()
}

fn scale_complex(v: &CVec, z: num_complex::Complex64) -> CVec {
    v.map(|w| w * z)
}

fn quartic_gradient(mats: &[CMat], psi: &CVec) -> CVec {
    let mut g = CVec::zeros(psi.len());
    for a in mats {
        let apsi = a * psi;
        let q = psi.dotc(&apsi);
        g += scale_complex(&apsi, q.conj()) + scale_complex(&(a.adjoint() * psi), q);
    }
    g
}

fn project_tangent(psi: &CVec, g: &CVec) -> CVec {
    let overlap = psi.dotc(g);
    g - scale_complex(psi, overlap)
}

/// Minimizes f along the great circle ψcosθ + u·sinθ by coarse sampling plus
/// golden-section refinement; u must be a unit tangent at ψ.
///
/// Along the geodesic each quadratic form is a degree-2 trigonometric
/// polynomial q(θ) = α cos²θ + (β+γ) cosθ sinθ + δ sin²θ, so the whole
/// objective reduces to a handful of scalars per Kraus operator — evaluating
/// an angle costs O(#mats), not a matrix product.
fn geodesic_line_search(mats: &[CMat], psi: &CVec, u: &CVec, f_at_zero: f64) -> (f64, f64) {
    let coeffs: Vec<(num_complex::Complex64, num_complex::Complex64, num_complex::Complex64)> =
        mats.iter()
            .map(|a| {
                let apsi = a * psi;
                let au = a * u;
                let alpha = psi.dotc(&apsi);
                let mixed = psi.dotc(&au) + u.dotc(&apsi);
                let delta = u.dotc(&au);
                (alpha, mixed, delta)
            })
            .collect();
    let eval = |theta: f64| -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        let (cc, cs, ss) = (c * c, c * s, s * s);
        coeffs
            .iter()
            .map(|(alpha, mixed, delta)| (alpha * cc + mixed * cs + delta * ss).norm_sqr())
            .sum()
    };
    // coarse bracket over half the circle (the objective has period π in
    // θ up to phase, so this covers every geodesic point)
    let samples = 24;
    let mut best_theta = 0.0;
    let mut best_val = f_at_zero;
    for i in 1..=samples {
        let theta = std::f64::consts::PI * (i as f64) / (samples as f64);
        let v = eval(theta);
        if v < best_val {
            best_val = v;
            best_theta = theta;
        }
    }
    let width = std::f64::consts::PI / samples as f64;
    let (mut lo, mut hi) = (best_theta - width, best_theta + width);
    let phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    let theta = 0.5 * (lo + hi);
    let v = eval(theta);
    if v < best_val {
        (theta, v)
    } else {
        (best_theta, best_val)
    }
}

fn descend_quartic(mats: &[CMat], start: &CVec, max_iters: u32, tol: f64) -> SphereOpt {
    let mut psi = start.unscale(start.norm());
    let mut value = quartic_value(mats, &psi);
    let mut stall = 0u32;
    for _ in 0..max_iters {
        let grad = project_tangent(&psi, &quartic_gradient(mats, &psi));
        let gnorm = grad.norm();
        if gnorm < 1e-14 {
            break;
        }
        // normalize, then project once more: dividing by a tiny gradient
        // norm amplifies the residual radial component, and a direction that
        // leaves the sphere makes the line search report phantom values
        let mut direction = project_tangent(&psi, &grad.unscale(-gnorm));
        let dn = direction.norm();
        if dn < 0.5 {
            break;
        }
        direction = direction.unscale(dn);
        let (theta, new_value) = geodesic_line_search(mats, &psi, &direction, value);
        if new_value >= value {
            break;
        }
        let raw = psi.scale(theta.cos()) + direction.scale(theta.sin());
        psi = raw.unscale(raw.norm());
        let gain = value - new_value;
        value = new_value;
        if gain < tol {
            stall += 1;
            if stall >= 3 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    SphereOpt { value, witness: psi }
}

fn better_min(a: SphereOpt, b: SphereOpt) -> SphereOpt {
    if (a.value - b.value).abs() <= 1e-12 {
        let ca = canonical_phase(&a.witness);
        let cb = canonical_phase(&b.witness);
        if lex_cmp(&ca, &cb) == std::cmp::Ordering::Greater {
            SphereOpt {
                value: b.value,
                witness: cb,
            }
        } else {
            SphereOpt {
                value: a.value,
                witness: ca,
            }
        }
    } else if b.value < a.value {
        b
    } else {
        a
    }
}

/// Multi-start minimization of Σ_k |⟨ψ|A_k|ψ⟩|² over the unit sphere in C^dim.
/// `extra_starts` are deterministic seeds tried in addition to the random
/// restarts; the returned value is the objective at the returned witness.
pub fn minimize_quartic_on_sphere(
    mats: &[CMat],
    dim: usize,
    restarts: u32,
    seed: u64,
    extra_starts: &[CVec],
    max_iters: u32,
    tol: f64,
) -> SphereOpt {
    let from_extra = extra_starts
        .par_iter()
        .map(|s| descend_quartic(mats, s, max_iters, tol));
    let from_random = (0..restarts).into_par_iter().map(|r| {
        let mut rng = task_rng(seed, r as u64);
        let start = haar_unit_vector(&mut rng, dim);
        descend_quartic(mats, start.amplitudes(), max_iters, tol)
    });
    // collect in parallel, reduce sequentially: the near-tie tie-break is not
    // associative, and the result must not depend on the scheduler's tree
    let results: Vec<SphereOpt> = from_extra.chain(from_random).collect();
    results
        .into_iter()
        .reduce(better_min)
        .map(|best| SphereOpt {
            value: best.value,
            witness: canonical_phase(&best.witness),
        })
        .expect("at least one start")
}

/// Result of the rank-one trace-norm ascent.
#[derive(Debug, Clone)]
pub struct RankOneOpt {
    pub value: f64,
    pub left: CVec,
    pub right: CVec,
}

fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |r, c| v[r * cols + c])
}

fn flatten_mat(m: &CMat) -> CVec {
    CVec::from_fn(m.nrows() * m.ncols(), |k, _| m[(k / m.ncols(), k % m.ncols())])
}

/// Trace norm of X together with a dual witness W satisfying ‖W‖ ≤ 1 and
/// Re tr(W*X) = ‖X‖₁, from one Hermitian eigendecomposition of X*X.
fn trace_norm_and_dual(x: &CMat) -> (f64, CMat) {
    let h = x.adjoint() * x;
    let (vals, vecs) = crate::operators::hermitian_eigen(&h);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    // eigenvalues at the machine-noise floor would inflate the sum by √noise
    // per zero singular value; dropping them keeps the value a lower bound
    let cutoff = top * 1e-13;
    let mut value = 0.0;
    let mut w = CMat::zeros(x.nrows(), x.ncols());
    for (lambda, v) in vals.iter().zip(vecs.iter()) {
        if *lambda <= cutoff {
            continue;
        }
        let s = lambda.sqrt();
        value += s;
        w += (x * v).map(|z| z / s) * v.adjoint();
    }
    (value, w)
}

/// ‖L(|φ⟩⟨ψ|)‖₁ for the map given by its transfer matrix.
pub fn rank_one_trace_norm(transfer: &CMat, dim_out: usize, phi: &CVec, psi: &CVec) -> f64 {
    let input = phi.kronecker(&psi.map(|z| z.conj()));
    let out = transfer * input;
    let x = unvec(&out, dim_out, dim_out);
    trace_norm_and_dual(&x).0
}

fn ascend_rank_one(
    transfer: &CMat,
    adjoint_transfer: &CMat,
    dim_out: usize,
    phi0: &CVec,
    psi0: &CVec,
    max_iters: u32,
    tol: f64,
) -> RankOneOpt {
    let mut phi = phi0.unscale(phi0.norm());
    let mut psi = psi0.unscale(psi0.norm());
    let mut value = rank_one_trace_norm(transfer, dim_out, &phi, &psi);
    for _ in 0..max_iters {
        // dual witness of the current output
        let out = transfer * phi.kronecker(&psi.map(|z| z.conj()));
        let x = unvec(&out, dim_out, dim_out);
        let (_, w) = trace_norm_and_dual(&x);
        // lift back to the input side: G = L†(W), h = Re⟨Gψ, φ⟩
        let g = unvec(&(adjoint_transfer * flatten_mat(&w)), phi.len(), psi.len());
        let new_phi = {
            let cand = &g * &psi;
            let n = cand.norm();
            if n < 1e-15 {
                break;
            }
            cand.unscale(n)
        };
        let new_psi = {
            let cand = g.adjoint() * &new_phi;
            let n = cand.norm();
            if n < 1e-15 {
                break;
            }
            cand.unscale(n)
        };
        let new_value = rank_one_trace_norm(transfer, dim_out, &new_phi, &new_psi);
        if new_value <= value + tol {
            if new_value > value {
                phi = new_phi;
                psi = new_psi;
                value = new_value;
            }
            break;
        }
        phi = new_phi;
        psi = new_psi;
        value = new_value;
    }
    RankOneOpt {
        value,
        left: phi,
        right: psi,
    }
}

fn better_max(a: RankOneOpt, b: RankOneOpt) -> RankOneOpt {
    if (a.value - b.value).abs() <= 1e-12 {
        let cmp = lex_cmp(&canonical_phase(&a.left), &canonical_phase(&b.left));
        if cmp == std::cmp::Ordering::Greater {
            b
        } else {
            a
        }
    } else if b.value > a.value {
        b
    } else {
        a
    }
}

/// Multi-start maximization of ‖L(|φ⟩⟨ψ|)‖₁ over pairs of unit vectors — the
/// rank-one reduction of the 1→1 norm (rank-one operators are the extreme
/// points of the trace-norm unit ball, so nothing is lost). Half of the
/// random restarts pair φ = ψ, where positive maps attain their norm.
pub fn maximize_rank_one_trace_norm(
    transfer: &CMat,
    dim_in: usize,
    dim_out: usize,
    restarts: u32,
    seed: u64,
    extra_starts: &[(CVec, CVec)],
    max_iters: u32,
    tol: f64,
) -> RankOneOpt {
    let adjoint = transfer.adjoint();
    let from_extra = extra_starts
        .par_iter()
        .map(|(p, q)| ascend_rank_one(transfer, &adjoint, dim_out, p, q, max_iters, tol));
    let from_random = (0..restarts).into_par_iter().map(|r| {
        let mut rng = task_rng(seed, r as u64);
        let phi = haar_unit_vector(&mut rng, dim_in);
        let psi = if r % 2 == 0 {
            phi.clone()
        } else {
            haar_unit_vector(&mut rng, dim_in)
        };
        ascend_rank_one(
            transfer,
            &adjoint,
            dim_out,
            phi.amplitudes(),
            psi.amplitudes(),
            max_iters,
            tol,
        )
    });
    let results: Vec<RankOneOpt> = from_extra.chain(from_random).collect();
    results
        .into_iter()
        .reduce(better_max)
        .map(|best| RankOneOpt {
            value: best.value,
            left: canonical_phase(&best.left),
            right: canonical_phase(&best.right),
        })
        .expect("at least one start")
}

/// Plain Nelder-Mead minimizer on R^n; used where analytic gradients are
/// unpleasant (entropy surfaces). Returns (best value, best point).
pub fn nelder_mead(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    start: &[f64],
    scale: f64,
    max_iters: u32,
) -> (f64, Vec<f64>) {
    let n = start.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += scale;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if (values[worst] - values[best]).abs() < 1e-14 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for k in 0..n {
                centroid[k] += simplex[i][k] / n as f64;
            }
        }
        let reflect: Vec<f64> = (0..n)
            .map(|k| centroid[k] + alpha * (centroid[k] - simplex[worst][k]))
            .collect();
        let f_r = f(&reflect);
        if f_r < values[best] {
            let expand: Vec<f64> = (0..n)
                .map(|k| centroid[k] + gamma * (reflect[k] - centroid[k]))
                .collect();
            let f_e = f(&expand);
            if f_e < f_r {
                simplex[worst] = expand;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_r;
            }
        } else if f_r < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = f_r;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|k| centroid[k] + rho * (simplex[worst][k] - centroid[k]))
                .collect();
            let f_c = f(&contract);
            if f_c < values[worst] {
                simplex[worst] = contract;
                values[worst] = f_c;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for k in 0..n {
                        simplex[i][k] = best_point[k] + sigma * (simplex[i][k] - best_point[k]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (values[best], simplex[best].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pinch_channel, Channel};
    use crate::operators::UnitVector;

    #[test]
    fn quartic_min_finds_pinch_minimum() {
        let axis = UnitVector::basis_state(2, 0).unwrap();
        let t = pinch_channel(&axis).unwrap();
        let opt = minimize_quartic_on_sphere(t.kraus(), 2, 16, 0, &[], 300, 1e-12);
        assert!((opt.value - 0.5).abs() < 1e-9);
        let w0 = opt.witness[0].norm_sqr();
        assert!((w0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn quartic_min_identity_is_one() {
        let t = Channel::identity(3).unwrap();
        let opt = minimize_quartic_on_sphere(t.kraus(), 3, 8, 0, &[], 200, 1e-12);
        assert!((opt.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_ascent_reaches_channel_norm() {
        let t = Channel::identity(2).unwrap().to_superoperator();
        let k = t.transfer_matrix();
        let opt = maximize_rank_one_trace_norm(&k, 2, 2, 8, 0, &[], 200, 1e-10);
        assert!((opt.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let (v, p) = nelder_mead(&f, &[0.0, 0.0], 0.5, 500);
        assert!(v < 1e-8);
        assert!((p[0] - 1.0).abs() < 1e-4 && (p[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn reported_value_reproduces_at_witness() {
        // guards the certified-witness contract against direction drift off
        // the sphere near tiny gradients
        let axis = UnitVector::basis_state(2, 0).unwrap();
        let t = pinch_channel(&axis).unwrap();
        for seed in 0..8u64 {
            let opt = minimize_quartic_on_sphere(t.kraus(), 2, 64, seed, &[], 400, 1e-13);
            let re = quartic_value(t.kraus(), &opt.witness);
            assert!((re - opt.value).abs() < 1e-12, "gap {}", re - opt.value);
            assert!(opt.value >= 0.5 - 1e-12, "below the true minimum");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let axis = UnitVector::basis_state(2, 0).unwrap();
        let t = pinch_channel(&axis).unwrap();
        let a = minimize_quartic_on_sphere(t.kraus(), 2, 8, 42, &[], 200, 1e-12);
        let b = minimize_quartic_on_sphere(t.kraus(), 2, 8, 42, &[], 200, 1e-12);
        assert_eq!(a.value, b.value);
        assert_eq!(a.witness, b.witness);
    }
}
