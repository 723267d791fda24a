//! Chain and star environments, their exact diagonalization, and the
//! symplectic propagator of the coupled system+bath model.
//!
//! An environment of N oscillators (unit masses) with nearest-neighbor spring
//! couplings c_1..c_{N-1} has
//!
//! ```text
//! H_E = Σ_i (p_i² + Ω_i² q_i²)/2 − Σ_i c_i q_i q_{i+1},
//! Ω_i² = ω0² + c_{i−1} + c_i        (missing bonds contribute 0)
//! ```
//!
//! Diagonalizing the potential A = diag(Ω_i²/2) − G/2 through an orthogonal K
//! gives independent modes of frequency ν_i = √(2λ_i), each coupled to the
//! system with strength g̃_i = k·K_{1i} (a star configuration). Attaching the
//! system oscillator ω_S with H_I = −k q_S q_1 and diagonalizing once more
//! yields joint modes f_i whose free rotation is the exact dynamics.
//!
//! The system coordinate is the LAST one (index N+1) in every full-model
//! matrix, matching the (q_1..q_N, q_S) vector layout.

use nalgebra::DMatrix;

use crate::linalg::{sorted_symmetric_eigen, symplectic_form};
use crate::{Error, Result};

/// Real-space chain environment attached to the system by its first site.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    /// Number of bath oscillators N.
    pub n_modes: usize,
    /// Bare on-site frequency ω0.
    pub omega0: f64,
    /// Nearest-neighbor couplings c_1..c_{N−1}.
    pub couplings: Vec<f64>,
    /// Effective on-site frequencies Ω_i (derived, see module docs).
    pub onsite_freqs: Vec<f64>,
    /// System–bath coupling constant k in H_I = −k q_S q_1.
    pub k: f64,
}

impl ChainSpec {
    /// Potential matrix A with A_ii = Ω_i²/2 and A_{i,i±1} = −c/2, so that
    /// H_E = pᵀp/2 + qᵀAq.
    pub fn potential_matrix(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 0.5 * self.onsite_freqs[i] * self.onsite_freqs[i];
        }
        for (i, &c) in self.couplings.iter().enumerate() {
            a[(i, i + 1)] = -0.5 * c;
            a[(i + 1, i)] = -0.5 * c;
        }
        a
    }
}

/// Star-form environment: independent modes ν_i, each coupled to the system.
#[derive(Debug, Clone)]
pub struct StarModel {
    /// Bath eigenfrequencies, sorted ascending, strictly positive.
    pub nu: Vec<f64>,
    /// System–mode couplings g̃_i (signs follow the eigenvector sign fix;
    /// only g̃_i² enters observables).
    pub gtilde: Vec<f64>,
    /// Orthogonal chain→star transformation, when the star came from a chain.
    /// Synthesized or filtered stars carry no transformation.
    pub transform: Option<DMatrix<f64>>,
}

impl StarModel {
    /// Builds a star model directly from frequencies and couplings,
    /// validating positivity and ordering.
    pub fn new(nu: Vec<f64>, gtilde: Vec<f64>) -> Result<Self> {
        if nu.len() != gtilde.len() {
            return Err(Error::InvalidModel(format!(
                "star model needs matching lengths, got {} frequencies and {} couplings",
                nu.len(),
                gtilde.len()
            )));
        }
        if nu.is_empty() {
            return Err(Error::InvalidModel("star model needs at least one mode".into()));
        }
        if nu.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::InvalidModel("star frequencies must be positive".into()));
        }
        if nu.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidModel("star frequencies must be sorted ascending".into()));
        }
        Ok(StarModel { nu, gtilde, transform: None })
    }

    pub fn n_modes(&self) -> usize {
        self.nu.len()
    }
}

/// Fully diagonalized system+bath model.
#[derive(Debug, Clone)]
pub struct FullModel {
    /// System frequency ω_S.
    pub omega_s: f64,
    /// The star environment this model extends.
    pub star: StarModel,
    /// Joint eigenfrequencies f_i, sorted ascending.
    pub f: Vec<f64>,
    /// Orthogonal eigenvector matrix O of the joint potential B
    /// (columns match `f`).
    pub o: DMatrix<f64>,
}

impl FullModel {
    /// Total mode count N+1 (bath plus system).
    pub fn n_total(&self) -> usize {
        self.star.n_modes() + 1
    }

    /// Zero-based index of the system coordinate (the last one).
    pub fn system_index(&self) -> usize {
        self.star.n_modes()
    }

    /// Per-coordinate frequencies (ν_1..ν_N, ω_S) defining each mode's
    /// natural quadrature frame.
    pub fn mode_freqs(&self) -> Vec<f64> {
        let mut v = self.star.nu.clone();
        v.push(self.omega_s);
        v
    }

    /// Joint potential matrix B with B_ii = ν_i²/2, B_{N+1,N+1} = ω_S²/2 and
    /// B_{i,N+1} = −g̃_i/2, so that H = pᵀp/2 + qᵀBq.
    pub fn potential_matrix(&self) -> DMatrix<f64> {
        potential_matrix_b(&self.star, self.omega_s)
    }
}

fn potential_matrix_b(star: &StarModel, omega_s: f64) -> DMatrix<f64> {
    let n = star.n_modes();
    let mut b = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        b[(i, i)] = 0.5 * star.nu[i] * star.nu[i];
        b[(i, n)] = -0.5 * star.gtilde[i];
        b[(n, i)] = -0.5 * star.gtilde[i];
    }
    b[(n, n)] = 0.5 * omega_s * omega_s;
    b
}

/// The four (N+1)×(N+1) blocks of the exact phase-space propagator at time t,
/// plus the per-coordinate frequencies needed to move states between their
/// natural quadrature frames and the mass-weighted frame the blocks act on.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub t: f64,
    pub qq: DMatrix<f64>,
    pub qp: DMatrix<f64>,
    pub pq: DMatrix<f64>,
    pub pp: DMatrix<f64>,
    /// (ν_1..ν_N, ω_S); coordinate i evolves in the frame of mode_freqs[i].
    pub mode_freqs: Vec<f64>,
}

impl Propagator {
    /// Coordinate count N+1.
    pub fn dim(&self) -> usize {
        self.qq.nrows()
    }

    /// Assembles the 2(N+1)×2(N+1) symplectic matrix
    /// S = [[qq, qp], [pq, pp]] in (q…,p…) ordering.
    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&self.qq);
        s.view_mut((0, n), (n, n)).copy_from(&self.qp);
        s.view_mut((n, 0), (n, n)).copy_from(&self.pq);
        s.view_mut((n, n), (n, n)).copy_from(&self.pp);
        s
    }

    /// Max-norm of S·Ω·Sᵀ − Ω; a correctness diagnostic used by tests.
    pub fn symplectic_defect(&self) -> f64 {
        let s = self.assemble();
        let omega = symplectic_form(self.dim());
        let d = &s * &omega * s.transpose() - &omega;
        d.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
    }
}

/// Relative positive-definiteness floor: matrices whose smallest eigenvalue
/// falls below 1e−12 of the largest are rejected as unstable.
const PD_REL_TOL: f64 = 1e-12;

fn check_positive_definite(values: &[f64], what: &str, extra: &str) -> Result<()> {
    let lam_min = values.first().copied().unwrap_or(0.0);
    let lam_max = values.last().copied().unwrap_or(0.0);
    if lam_min <= PD_REL_TOL * lam_max.max(0.0) {
        return Err(Error::InvalidModel(format!(
            "{what} is not positive definite: smallest eigenvalue {lam_min:.6e} \
             (largest {lam_max:.6e}){extra}"
        )));
    }
    Ok(())
}

fn onsite_freqs(omega0: f64, couplings: &[f64]) -> Vec<f64> {
    let n = couplings.len() + 1;
    (0..n)
        .map(|i| {
            let left = if i > 0 { couplings[i - 1] } else { 0.0 };
            let right = if i < n - 1 { couplings[i] } else { 0.0 };
            (omega0 * omega0 + left + right).sqrt()
        })
        .collect()
}

fn validate_chain(chain: &ChainSpec) -> Result<()> {
    if chain.omega0 <= 0.0 {
        return Err(Error::InvalidModel("omega0 must be positive".into()));
    }
    if chain.k < 0.0 {
        return Err(Error::InvalidModel("system coupling k must be nonnegative".into()));
    }
    if chain.couplings.iter().any(|&c| c < 0.0) {
        return Err(Error::InvalidModel("chain couplings must be nonnegative".into()));
    }
    let eig = sorted_symmetric_eigen(&chain.potential_matrix())?;
    check_positive_definite(&eig.values, "chain potential matrix", "")
}

/// Builds the alternating-coupling (dimer) chain: couplings g, h, g, h, …
/// starting with g between sites 1–2. `h > g` is accepted with a warning
/// (the conventional ordering is h ≤ g).
pub fn build_dimer_chain(n: usize, omega0: f64, g: f64, h: f64, k: f64) -> Result<ChainSpec> {
    if n < 2 {
        return Err(Error::InvalidModel(format!("dimer chain needs N ≥ 2, got {n}")));
    }
    if h > g {
        log::warn!("dimer chain built with h = {h} > g = {g}; bands swap roles");
    }
    let couplings: Vec<f64> = (0..n - 1).map(|i| if i % 2 == 0 { g } else { h }).collect();
    let chain = ChainSpec {
        n_modes: n,
        omega0,
        onsite_freqs: onsite_freqs(omega0, &couplings),
        couplings,
        k,
    };
    validate_chain(&chain)?;
    Ok(chain)
}

/// Builds a chain with arbitrary per-bond couplings; N = couplings.len() + 1.
pub fn build_custom_chain(omega0: f64, couplings: &[f64], k: f64) -> Result<ChainSpec> {
    if couplings.is_empty() {
        return Err(Error::InvalidModel("custom chain needs at least one bond (N ≥ 2)".into()));
    }
    let chain = ChainSpec {
        n_modes: couplings.len() + 1,
        omega0,
        onsite_freqs: onsite_freqs(omega0, couplings),
        couplings: couplings.to_vec(),
        k,
    };
    validate_chain(&chain)?;
    Ok(chain)
}

/// Diagonalizes the chain potential into the star form: ν_i = √(2λ_i) sorted
/// ascending, g̃_i = k·K_{1i} with K the orthonormal eigenvector matrix.
pub fn diagonalize_environment(chain: &ChainSpec) -> Result<StarModel> {
    let eig = sorted_symmetric_eigen(&chain.potential_matrix())?;
    check_positive_definite(&eig.values, "chain potential matrix", "")?;
    let nu: Vec<f64> = eig.values.iter().map(|&l| (2.0 * l).sqrt()).collect();
    let gtilde: Vec<f64> = (0..chain.n_modes).map(|i| chain.k * eig.vectors[(0, i)]).collect();
    Ok(StarModel { nu, gtilde, transform: Some(eig.vectors) })
}

/// Attaches the system oscillator to a star environment and diagonalizes the
/// joint potential B. Fails when the coupling destabilizes the model: B stays
/// positive definite exactly while ω_S² > Σ g̃_i²/ν_i².
pub fn assemble_full_system(star: StarModel, omega_s: f64) -> Result<FullModel> {
    if omega_s <= 0.0 {
        return Err(Error::InvalidModel("omega_s must be positive".into()));
    }
    let b = potential_matrix_b(&star, omega_s);
    let eig = sorted_symmetric_eigen(&b)?;
    let effective: f64 = star
        .nu
        .iter()
        .zip(&star.gtilde)
        .map(|(&nu, &gt)| gt * gt / (nu * nu))
        .sum();
    check_positive_definite(
        &eig.values,
        "joint potential matrix",
        &format!(
            "; system–bath coupling exceeds stability threshold \
             (requires Σ g̃²/ν² = {effective:.6e} < ω_S² = {:.6e})",
            omega_s * omega_s
        ),
    )?;
    let f: Vec<f64> = eig.values.iter().map(|&l| (2.0 * l).sqrt()).collect();
    Ok(FullModel { omega_s, star, f, o: eig.vectors })
}

/// Exact propagator at time t:
///
/// ```text
/// B^QQ = B^PP = O·diag(cos f_i t)·Oᵀ
/// B^QP = O·diag(sin(f_i t)/f_i)·Oᵀ
/// B^PQ = −O·diag(f_i sin(f_i t))·Oᵀ
/// ```
pub fn propagator(model: &FullModel, t: f64) -> Propagator {
    let n = model.n_total();
    let mut cos_d = DMatrix::zeros(n, n);
    let mut sin_over_f = DMatrix::zeros(n, n);
    let mut f_sin = DMatrix::zeros(n, n);
    for (i, &f) in model.f.iter().enumerate() {
        let (s, c) = (f * t).sin_cos();
        cos_d[(i, i)] = c;
        sin_over_f[(i, i)] = s / f;
        f_sin[(i, i)] = -f * s;
    }
    let ot = model.o.transpose();
    let qq = &model.o * cos_d * &ot;
    let qp = &model.o * sin_over_f * &ot;
    let pq = &model.o * f_sin * &ot;
    let pp = qq.clone();
    Propagator { t, qq, qp, pq, pp, mode_freqs: model.mode_freqs() }
}
