//! Truncated Fock-space oracle for Gaussian-state cross-checks.
//!
//! Everything here works on explicit density matrices in the number basis,
//! so it shares no code path with the covariance-matrix implementation it
//! verifies: states are built by exponentiating ladder-operator generators,
//! and fidelity is the literal Tr √(√ρ₁ ρ₂ √ρ₁).

use nalgebra::{Complex, DMatrix, SymmetricEigen};

type C = Complex<f64>;
type CMat = DMatrix<C>;

fn annihilation(dim: usize) -> CMat {
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn hermitize(m: CMat) -> CMat {
    (&m + m.adjoint()) * C::new(0.5, 0.0)
}

/// exp(M) for anti-Hermitian M, via the eigendecomposition of the Hermitian
/// matrix iM.
fn exp_anti_hermitian(m: &CMat) -> CMat {
    let h = hermitize(m.map(|z| z * C::new(0.0, 1.0)));
    let eig = SymmetricEigen::new(h);
    let u = &eig.eigenvectors;
    let mut diag = CMat::zeros(m.nrows(), m.ncols());
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        diag[(j, j)] = C::new(0.0, -lam).exp();
    }
    u * diag * u.adjoint()
}

fn sqrt_psd_hermitian(m: &CMat) -> CMat {
    let eig = SymmetricEigen::new(hermitize(m.clone()));
    let u = &eig.eigenvectors;
    let mut diag = CMat::zeros(m.nrows(), m.ncols());
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        diag[(j, j)] = C::new(lam.max(0.0).sqrt(), 0.0);
    }
    u * diag * u.adjoint()
}

pub struct FockOracle {
    pub dim: usize,
    a: CMat,
    q: CMat,
    p: CMat,
}

impl FockOracle {
    pub fn new(dim: usize) -> Self {
        let a = annihilation(dim);
        let ad = a.adjoint();
        let inv_sqrt2 = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let q = (&a + &ad) * inv_sqrt2;
        let p = (&ad - &a) * C::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        FockOracle { dim, a, q, p }
    }

    /// Thermal state with mean occupation nbar, truncated without
    /// renormalizing; the missing trace is the truncation tail.
    pub fn thermal(&self, nbar: f64) -> CMat {
        let mut rho = CMat::zeros(self.dim, self.dim);
        if nbar <= 0.0 {
            rho[(0, 0)] = C::new(1.0, 0.0);
            return rho;
        }
        let x = nbar / (nbar + 1.0);
        for n in 0..self.dim {
            rho[(n, n)] = C::new((1.0 - x) * x.powi(n as i32), 0.0);
        }
        rho
    }

    /// Squeeze unitary whose covariance action is
    /// σ → R(θ) diag(e^{−2r}, e^{2r}) R(θ)ᵀ σ-style, i.e. ξ = r e^{2iθ} in
    /// S = exp(½(ξ̄ a² − ξ a†²)).
    pub fn squeeze(&self, r: f64, theta: f64) -> CMat {
        let xi = C::new(0.0, 2.0 * theta).exp() * C::new(r, 0.0);
        let a2 = &self.a * &self.a;
        let ad2 = a2.adjoint();
        let half = C::new(0.5, 0.0);
        let gen = (a2.map(|z| z * xi.conj()) - ad2.map(|z| z * xi)).map(|z| z * half);
        exp_anti_hermitian(&gen)
    }

    pub fn squeezed_thermal(&self, r: f64, theta: f64, nbar: f64) -> CMat {
        let s = self.squeeze(r, theta);
        &s * self.thermal(nbar) * s.adjoint()
    }

    /// Trace deficit plus the population of the top five levels: both must be
    /// negligible for the truncation to be trustworthy.
    pub fn tail_mass(&self, rho: &CMat) -> f64 {
        let mut mass = 1.0 - rho.trace().re;
        for n in self.dim.saturating_sub(5)..self.dim {
            mass += rho[(n, n)].re.abs();
        }
        mass
    }

    /// Second moments (⟨q²⟩, ⟨qp⟩_sym, ⟨p²⟩) of a zero-mean state.
    pub fn covariance(&self, rho: &CMat) -> [f64; 3] {
        let ev = |op: &CMat| (rho * op).trace().re;
        let qp = (&self.q * &self.p + &self.p * &self.q) * C::new(0.5, 0.0);
        [ev(&(&self.q * &self.q)), ev(&qp), ev(&(&self.p * &self.p))]
    }

    /// Uhlmann fidelity Tr √(√ρ₁ ρ₂ √ρ₁), computed as the nuclear norm of
    /// √ρ₂·√ρ₁ (same singular values). Summing singular values directly keeps
    /// eigenvalue roundoff linear; taking √ of near-zero eigenvalues of the
    /// sandwiched product would amplify ~1e−16 noise to ~1e−8 per mode.
    pub fn fidelity(&self, rho1: &CMat, rho2: &CMat) -> f64 {
        let m = sqrt_psd_hermitian(rho2) * sqrt_psd_hermitian(rho1);
        m.singular_values().iter().sum()
    }

    /// ‖S†S − I‖_max, a direct check that a built operator is unitary.
    pub fn unitarity_defect(&self, s: &CMat) -> f64 {
        let mut m = s.adjoint() * s;
        for i in 0..self.dim {
            m[(i, i)] -= C::new(1.0, 0.0);
        }
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
