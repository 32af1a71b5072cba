//! Channel and superoperator representations: Kraus form for completely
//! positive maps, Choi form for arbitrary linear maps, composition and
//! tensoring, the special channels used by the verification suites, and the
//! constructive encoders/decoders.
//!
//! Conventions, fixed once for the whole crate:
//! * matrices vectorize row-major, vec(X)_{i·cols+j} = X_{ij};
//! * Choi(L) = Σ_ij L(|i⟩⟨j|) ⊗ |i⟩⟨j| on C^{out}⊗C^{in} (unnormalized
//!   maximally entangled projector, output factor first);
//! * the transfer matrix K with vec(L(X)) = K·vec(X) is the reshuffle
//!   K_{(a,b),(i,j)} = Choi_{(a,i),(b,j)}.


use crate::error::{Error, Result};
use crate::operators::{
    cone, creal, flip_operator, hermitian_eigen, identity, kron, permute_factors, CMat, CVec,
    DensityOperator, UnitVector, EIG_CLAMP, TP_TOL,
};

/// Row-major flattening of an out×in matrix into C^{out·in}.
pub fn flatten(t: &CMat) -> CVec {
    let (rows, cols) = (t.nrows(), t.ncols());
    CVec::from_fn(rows * cols, |k, _| t[(k / cols, k % cols)])
}

fn unflatten(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |r, c| v[r * cols + c])
}

/// A completely positive map given by a Kraus operator list; possibly
/// trace-decreasing (instrument branches, encoder pieces).
#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

impl CpMap {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Invariant("Kraus list must be nonempty".into()))?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Dimension("Kraus operators must be nonempty".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::Dimension(format!(
                    "Kraus operator shape {}×{} differs from {}×{}",
                    k.nrows(),
                    k.ncols(),
                    dim_out,
                    dim_in
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Invariant("Kraus operator has non-finite entries".into()));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Applies the map to an arbitrary matrix (no state validation).
    pub fn apply_matrix(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.dim_in || x.ncols() != self.dim_in {
            return Err(Error::Dimension(format!(
                "input is {}×{}, map expects {}×{}",
                x.nrows(),
                x.ncols(),
                self.dim_in,
                self.dim_in
            )));
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    /// Σ k*k, the identity for trace-preserving maps.
    pub fn normalization(&self) -> CMat {
        let mut sum = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        sum
    }

    /// Distance of Σ k*k from the identity.
    pub fn trace_preservation_defect(&self) -> f64 {
        (self.normalization() - identity(self.dim_in)).norm()
    }

    pub fn scale(&self, factor: f64) -> CpMap {
        let s = creal(factor.sqrt());
        CpMap {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.iter().map(|k| k.map(|z| z * s)).collect(),
        }
    }

    pub fn choi(&self) -> CMat {
        let mut c = CMat::zeros(self.dim_out * self.dim_in, self.dim_out * self.dim_in);
        for k in &self.kraus {
            let w = flatten(k);
            c += &w * w.adjoint();
        }
        c
    }
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    map: CpMap,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        Self::with_tolerance(kraus, TP_TOL)
    }

    /// Construction with an explicit trace-preservation tolerance; the JSON
    /// boundary accepts up to 1e-6 while programmatic constructions stay at
    /// the 1e-9 default.
    pub fn with_tolerance(kraus: Vec<CMat>, tol: f64) -> Result<Self> {
        let map = CpMap::new(kraus)?;
        let defect = map.trace_preservation_defect();
        if defect > tol {
            return Err(Error::Invariant(format!(
                "trace preservation residual {defect:.3e} exceeds tolerance {tol:.1e}"
            )));
        }
        Ok(Self { map })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        Channel::new(vec![identity(dim)])
    }

    /// Conjugation by a unitary.
    pub fn unitary(u: &CMat) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::Dimension("unitary must be square".into()));
        }
        let defect = (u.adjoint() * u - identity(u.ncols())).norm();
        if defect > TP_TOL {
            return Err(Error::Invariant(format!(
                "unitarity defect {defect:.3e}"
            )));
        }
        Channel::new(vec![u.clone()])
    }

    pub fn dim_in(&self) -> usize {
        self.map.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.map.dim_out
    }

    pub fn is_square(&self) -> bool {
        self.map.dim_in == self.map.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.map.kraus
    }

    pub fn as_cp(&self) -> &CpMap {
        &self.map
    }

    pub fn into_cp(self) -> CpMap {
        self.map
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.map.apply_matrix(rho.matrix())?;
        DensityOperator::new(out)
    }

    pub fn apply_matrix(&self, x: &CMat) -> Result<CMat> {
        self.map.apply_matrix(x)
    }

    /// self ∘ inner: run `inner` first, then this channel.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        if inner.dim_out() != self.dim_in() {
            return Err(Error::Dimension(format!(
                "composition mismatch: inner output {} vs outer input {}",
                inner.dim_out(),
                self.dim_in()
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus().len() * inner.kraus().len());
        for a in self.kraus() {
            for b in inner.kraus() {
                kraus.push(a * b);
            }
        }
        Channel::new(kraus)
    }

    /// Parallel composition self ⊗ other.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus().len() * other.kraus().len());
        for a in self.kraus() {
            for b in other.kraus() {
                kraus.push(kron(a, b));
            }
        }
        Channel::new(kraus).expect("tensor of channels is trace-preserving")
    }

    pub fn tensor_power(&self, n: usize) -> Result<Channel> {
        if n == 0 {
            return Err(Error::Domain("tensor power requires n ≥ 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    pub fn choi(&self) -> CMat {
        self.map.choi()
    }

    pub fn to_superoperator(&self) -> Superoperator {
        Superoperator {
            dim_in: self.dim_in(),
            dim_out: self.dim_out(),
            choi: self.choi(),
        }
    }

    /// Re-extracts a minimal Kraus set from the Choi matrix.
    pub fn reduced(&self) -> Result<Channel> {
        let kraus = kraus_from_choi(&self.choi(), self.dim_in(), self.dim_out(), 1e-9)?;
        Channel::new(kraus)
    }
}

/// Kraus operators from a (nearly) positive semidefinite Choi matrix;
/// eigenvalues within the clamp window are dropped, eigenvalues below
/// -`tol` reject the input as not completely positive.
pub fn kraus_from_choi(choi: &CMat, dim_in: usize, dim_out: usize, tol: f64) -> Result<Vec<CMat>> {
    if choi.nrows() != dim_in * dim_out || choi.ncols() != dim_in * dim_out {
        return Err(Error::Dimension(format!(
            "Choi matrix must be {0}×{0}",
            dim_in * dim_out
        )));
    }
    let (vals, vecs) = hermitian_eigen(choi);
    let mut kraus = Vec::new();
    for (lambda, v) in vals.iter().zip(vecs.iter()) {
        if *lambda < -tol {
            return Err(Error::Invariant(format!(
                "Choi eigenvalue {lambda:.3e} below -{tol:.1e}: map is not completely positive"
            )));
        }
        if *lambda <= EIG_CLAMP {
            continue;
        }
        kraus.push(unflatten(&v.scale(lambda.sqrt()), dim_out, dim_in));
    }
    if kraus.is_empty() {
        kraus.push(CMat::zeros(dim_out, dim_in));
    }
    Ok(kraus)
}

/// An arbitrary linear map on operators in Choi representation; no positivity
/// is required, so differences of channels and transposition compositions
/// live here.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim_in: usize,
    dim_out: usize,
    choi: CMat,
}

impl Superoperator {
    pub fn new(dim_in: usize, dim_out: usize, choi: CMat) -> Result<Self> {
        if choi.nrows() != dim_in * dim_out || choi.ncols() != dim_in * dim_out {
            return Err(Error::Dimension(format!(
                "Choi matrix must be {0}×{0}, got {1}×{2}",
                dim_in * dim_out,
                choi.nrows(),
                choi.ncols()
            )));
        }
        if choi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant("Choi matrix has non-finite entries".into()));
        }
        Ok(Self {
            dim_in,
            dim_out,
            choi,
        })
    }

    pub fn identity_map(dim: usize) -> Self {
        Channel::identity(dim)
            .expect("positive dimension")
            .to_superoperator()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    /// Transfer matrix K with vec(L(X)) = K·vec(X).
    pub fn transfer_matrix(&self) -> CMat {
        let (o, i) = (self.dim_out, self.dim_in);
        let mut k = CMat::zeros(o * o, i * i);
        for a in 0..o {
            for b in 0..o {
                for x in 0..i {
                    for y in 0..i {
                        k[(a * o + b, x * i + y)] = self.choi[(a * i + x, b * i + y)];
                    }
                }
            }
        }
        k
    }

    fn from_transfer(dim_in: usize, dim_out: usize, k: &CMat) -> Self {
        let (o, i) = (dim_out, dim_in);
        let mut choi = CMat::zeros(o * i, o * i);
        for a in 0..o {
            for b in 0..o {
                for x in 0..i {
                    for y in 0..i {
                        choi[(a * i + x, b * i + y)] = k[(a * o + b, x * i + y)];
                    }
                }
            }
        }
        Self {
            dim_in,
            dim_out,
            choi,
        }
    }

    pub fn apply_matrix(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.dim_in || x.ncols() != self.dim_in {
            return Err(Error::Dimension(format!(
                "input is {}×{}, superoperator expects {0}×{0}",
                x.nrows(),
                self.dim_in
            )));
        }
        let k = self.transfer_matrix();
        let v = k * flatten(x);
        Ok(unflatten(&v, self.dim_out, self.dim_out))
    }

    /// Entrywise Choi difference.
    pub fn difference(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::Dimension(
                "superoperator difference requires equal dimensions".into(),
            ));
        }
        Ok(Superoperator {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            choi: &self.choi - &other.choi,
        })
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &Superoperator) -> Result<Superoperator> {
        if inner.dim_out != self.dim_in {
            return Err(Error::Dimension(format!(
                "composition mismatch: inner output {} vs outer input {}",
                inner.dim_out, self.dim_in
            )));
        }
        let k = self.transfer_matrix() * inner.transfer_matrix();
        Ok(Self::from_transfer(inner.dim_in, self.dim_out, &k))
    }

    /// self ⊗ other.
    pub fn tensor(&self, other: &Superoperator) -> Superoperator {
        let raw = kron(&self.choi, &other.choi);
        // (O1⊗I1)⊗(O2⊗I2) → (O1⊗O2)⊗(I1⊗I2)
        let dims = [self.dim_out, self.dim_in, other.dim_out, other.dim_in];
        let choi = permute_factors(&raw, &dims, &[0, 2, 1, 3])
            .expect("factor permutation of a well-formed Choi tensor");
        Superoperator {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            choi,
        }
    }

    /// self ⊗ id_d.
    pub fn tensor_identity(&self, d: usize) -> Superoperator {
        self.tensor(&Superoperator::identity_map(d))
    }
}

/// Matrix transposition with respect to the computational basis; positive and
/// trace-preserving but not completely positive, its Choi matrix is the flip.
pub fn transposition_map(d: usize) -> Superoperator {
    Superoperator {
        dim_in: d,
        dim_out: d,
        choi: flip_operator(d),
    }
}

/// Encoder embedding C^m into the first m coordinates of C^n.
pub fn ideal_embed_encoder(m: usize, n: usize) -> Result<Channel> {
    if m == 0 || m > n {
        return Err(Error::Dimension(format!(
            "embedding requires 1 ≤ m ≤ n, got m={m}, n={n}"
        )));
    }
    let mut j = CMat::zeros(n, m);
    for i in 0..m {
        j[(i, i)] = cone();
    }
    Channel::new(vec![j])
}

/// Decoder ϱ ↦ PϱP + tr((1−P)ϱ)/m · P onto the m-dimensional code subspace;
/// the second term makes the map trace-preserving.
pub fn ideal_restrict_decoder(n: usize, m: usize) -> Result<Channel> {
    if m == 0 || m > n {
        return Err(Error::Dimension(format!(
            "restriction requires 1 ≤ m ≤ n, got n={n}, m={m}"
        )));
    }
    let mut kraus = Vec::with_capacity(1 + (n - m) * m);
    let mut j_adj = CMat::zeros(m, n);
    for i in 0..m {
        j_adj[(i, i)] = cone();
    }
    kraus.push(j_adj);
    let scale = creal(1.0 / (m as f64).sqrt());
    for l in m..n {
        for a in 0..m {
            let mut k = CMat::zeros(m, n);
            k[(a, l)] = scale;
            kraus.push(k);
        }
    }
    Channel::new(kraus)
}

/// Two-projector pinching channel ϱ ↦ P₊ϱP₊ + P₋ϱP₋ with P₊ = |ψ₁⟩⟨ψ₁|.
pub fn pinch_channel(axis: &UnitVector) -> Result<Channel> {
    let d = axis.dim();
    if d < 2 {
        return Err(Error::Dimension("pinch channel needs dimension ≥ 2".into()));
    }
    let p_plus = axis.projector();
    let p_minus = identity(d) - &p_plus;
    Channel::new(vec![p_plus, p_minus])
}

/// ϱ ↦ (1−p)ϱ + p·tr(ϱ)·1/d in Kraus form.
pub fn depolarizing_channel(d: usize, p: f64) -> Result<Channel> {
    if d == 0 {
        return Err(Error::Dimension("dimension must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("depolarizing probability {p} outside [0,1]")));
    }
    let mut kraus = Vec::new();
    if p < 1.0 {
        kraus.push(identity(d).scale((1.0 - p).sqrt()));
    }
    if p > 0.0 {
        let s = creal((p / d as f64).sqrt());
        for i in 0..d {
            for j in 0..d {
                let mut k = CMat::zeros(d, d);
                k[(i, j)] = s;
                kraus.push(k);
            }
        }
    }
    Channel::new(kraus)
}

/// Encoder ϱ ↦ VϱV* for an isometry V.
pub fn isometric_encoder(v: &CMat) -> Result<Channel> {
    let defect = (v.adjoint() * v - identity(v.ncols())).norm();
    if defect > TP_TOL {
        return Err(Error::Invariant(format!(
            "isometry defect {defect:.3e} exceeds {TP_TOL:.1e}"
        )));
    }
    Channel::new(vec![v.clone()])
}

/// Schrödinger form of the homomorphic decoder whose Heisenberg action is
/// X ↦ V(X⊗1)V* + tr(ϱ₀X)(1−VV*): the channel
/// ϱ ↦ Tr_aux(V*ϱV) + tr((1−VV*)ϱ)·ϱ₀.
///
/// `v` maps C^{k·s} into the decoded system's input space, where k is the
/// dimension of `rho0` and s the syndrome multiplicity.
pub fn homomorphic_decoder(v: &CMat, rho0: &DensityOperator) -> Result<Channel> {
    let dim_h = v.nrows();
    let dom = v.ncols();
    let k = rho0.dim();
    if dom % k != 0 {
        return Err(Error::Dimension(format!(
            "isometry domain {dom} is not a multiple of the code dimension {k}"
        )));
    }
    let s = dom / k;
    let defect = (v.adjoint() * v - identity(dom)).norm();
    if defect > TP_TOL {
        return Err(Error::Invariant(format!(
            "isometry defect {defect:.3e} exceeds {TP_TOL:.1e}"
        )));
    }
    let mut kraus = Vec::new();
    // Tr_aux(V*ϱV): Kraus (1_k ⊗ ⟨j|) V*
    let v_adj = v.adjoint();
    for j in 0..s {
        let mut kj = CMat::zeros(k, dim_h);
        for c in 0..k {
            for h in 0..dim_h {
                kj[(c, h)] = v_adj[(c * s + j, h)];
            }
        }
        kraus.push(kj);
    }
    // tr(Pϱ)·ϱ₀ with P = 1 − VV*: Kraus √ν_l g_l p_m*
    let p = identity(dim_h) - v * &v_adj;
    let (pvals, pvecs) = hermitian_eigen(&p);
    let (rvals, rvecs) = hermitian_eigen(rho0.matrix());
    for (pl, pv) in pvals.iter().zip(pvecs.iter()) {
        if *pl <= 0.5 {
            continue; // projector spectrum is {0, 1}
        }
        for (rl, rv) in rvals.iter().zip(rvecs.iter()) {
            if *rl <= EIG_CLAMP {
                continue;
            }
            kraus.push(rv.scale(rl.sqrt()) * pv.adjoint());
        }
    }
    Channel::new(kraus)
}

/// A channel with classical output: completely positive branches summing to a
/// trace-preserving map.
#[derive(Debug, Clone)]
pub struct Instrument {
    branches: Vec<CpMap>,
}

impl Instrument {
    pub fn new(branches: Vec<CpMap>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::Invariant("instrument needs at least one branch".into()))?;
        let (di, do_) = (first.dim_in(), first.dim_out());
        let mut sum = CMat::zeros(di, di);
        for b in &branches {
            if b.dim_in() != di || b.dim_out() != do_ {
                return Err(Error::Dimension(
                    "instrument branches must share dimensions".into(),
                ));
            }
            sum += b.normalization();
        }
        let defect = (sum - identity(di)).norm();
        if defect > TP_TOL {
            return Err(Error::Invariant(format!(
                "instrument branches sum to a non-channel: residual {defect:.3e}"
            )));
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[CpMap] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

/// Forgets the classical output: the sum of all branches as one channel.
pub fn instrument_sum(instrument: &Instrument) -> Channel {
    let kraus: Vec<CMat> = instrument
        .branches
        .iter()
        .flat_map(|b| b.kraus().iter().cloned())
        .collect();
    Channel::new(kraus).expect("instrument invariant guarantees trace preservation")
}

/// Probability of observing branch λ on input ϱ.
pub fn branch_weight(instrument: &Instrument, branch: usize, rho: &DensityOperator) -> Result<f64> {
    let b = instrument
        .branches
        .get(branch)
        .ok_or_else(|| Error::Domain(format!("branch index {branch} out of range")))?;
    Ok(b.apply_matrix(rho.matrix())?.trace().re)
}

/// Encoder/decoder pair around the n-th tensor power of a channel.
#[derive(Debug, Clone)]
pub struct CodingScheme {
    pub encoder: Channel,
    pub decoder: Channel,
    pub block_uses: usize,
    pub code_dim: usize,
}

impl CodingScheme {
    pub fn new(encoder: Channel, decoder: Channel, block_uses: usize, code_dim: usize) -> Result<Self> {
        if block_uses == 0 {
            return Err(Error::Domain("block_uses must be ≥ 1".into()));
        }
        if encoder.dim_in() != code_dim {
            return Err(Error::Dimension(format!(
                "encoder input {} must equal code dimension {code_dim}",
                encoder.dim_in()
            )));
        }
        if decoder.dim_out() != code_dim {
            return Err(Error::Dimension(format!(
                "decoder output {} must equal code dimension {code_dim}",
                decoder.dim_out()
            )));
        }
        Ok(Self {
            encoder,
            decoder,
            block_uses,
            code_dim,
        })
    }

    /// D ∘ T^{⊗n} ∘ E for the stored block size.
    pub fn corrected_channel(&self, t: &Channel) -> Result<Channel> {
        let tn = t.tensor_power(self.block_uses)?;
        if self.encoder.dim_out() != tn.dim_in() {
            return Err(Error::Dimension(format!(
                "encoder output {} does not feed T^⊗{} input {}",
                self.encoder.dim_out(),
                self.block_uses,
                tn.dim_in()
            )));
        }
        if tn.dim_out() != self.decoder.dim_in() {
            return Err(Error::Dimension(format!(
                "T^⊗{} output {} does not feed decoder input {}",
                self.block_uses,
                tn.dim_out(),
                self.decoder.dim_in()
            )));
        }
        self.decoder.compose(&tn)?.compose(&self.encoder)
    }
}
