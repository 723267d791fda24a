//! Gaussian states and the operations the rest of the crate needs: symplectic
//! evolution, partial trace, Uhlmann fidelity, logarithmic negativity and
//! excitation number.
//!
//! A state over M modes is (labels, mean, cov) with the global ordering
//! (q₁…q_M, p₁…p_M) and σ_ij = ½⟨{x_i,x_j}⟩ − ⟨x_i⟩⟨x_j⟩. Every constructor
//! works in each mode's *natural* quadratures, where the vacuum covariance is
//! exactly I/2 regardless of the mode frequency. The propagator blocks of
//! [`crate::chain`] act on mass-weighted coordinates instead (q_real =
//! q_nat/√ω, p_real = p_nat·√ω); [`evolve`] applies that per-mode scaling on
//! the way in and undoes it on the way out, using the frequencies the
//! propagator carries. Fidelity and negativity are invariant under the
//! scaling, so trajectories of either can be read in whichever frame is
//! convenient; excitation numbers are always quoted in the matched natural
//! frame (vacuum → 1/2).

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};

use crate::chain::{FullModel, Propagator, StarModel};
use crate::linalg::symplectic_eigenvalues;
use crate::{Error, Result};

/// Mean vector + covariance matrix over labeled modes.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub labels: Vec<String>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Slack allowed below the uncertainty bound ν ≥ 1/2 before a covariance is
/// rejected as unphysical.
const PHYSICALITY_TOL: f64 = 1e-9;

impl GaussianState {
    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    /// Index of a labeled mode.
    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidState(format!("unknown mode label '{label}'")))
    }

    /// Tensor product of states, concatenating mode labels in order.
    pub fn product(parts: &[&GaussianState]) -> Result<GaussianState> {
        let m: usize = parts.iter().map(|p| p.n_modes()).sum();
        let mut labels = Vec::with_capacity(m);
        let mut mean = DVector::zeros(2 * m);
        let mut cov = DMatrix::zeros(2 * m, 2 * m);
        let mut off = 0;
        for part in parts {
            let pm = part.n_modes();
            for (j, lab) in part.labels.iter().enumerate() {
                if labels.contains(lab) {
                    return Err(Error::InvalidState(format!(
                        "duplicate mode label '{lab}' in product"
                    )));
                }
                labels.push(lab.clone());
                mean[off + j] = part.mean[j];
                mean[m + off + j] = part.mean[pm + j];
            }
            for r in 0..pm {
                for c in 0..pm {
                    cov[(off + r, off + c)] = part.cov[(r, c)];
                    cov[(off + r, m + off + c)] = part.cov[(r, pm + c)];
                    cov[(m + off + r, off + c)] = part.cov[(pm + r, c)];
                    cov[(m + off + r, m + off + c)] = part.cov[(pm + r, pm + c)];
                }
            }
            off += pm;
        }
        Ok(GaussianState { labels, mean, cov })
    }

    /// Replaces the mode labels (length must match).
    pub fn with_labels<S: Into<String>>(mut self, labels: Vec<S>) -> Result<GaussianState> {
        if labels.len() != self.n_modes() {
            return Err(Error::InvalidState(format!(
                "label count {} does not match mode count {}",
                labels.len(),
                self.n_modes()
            )));
        }
        self.labels = labels.into_iter().map(Into::into).collect();
        Ok(self)
    }

    /// Smallest symplectic eigenvalue; ≥ 1/2 for physical states.
    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        let nus = symplectic_eigenvalues(&self.cov)?;
        Ok(nus.into_iter().fold(f64::INFINITY, f64::min))
    }

    fn check_physical(&self) -> Result<()> {
        let asym = (&self.cov - self.cov.transpose())
            .iter()
            .fold(0.0_f64, |a, &x| a.max(x.abs()));
        if asym > 1e-12 {
            return Err(Error::InvalidState(format!(
                "covariance not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let nu_min = self.min_symplectic_eigenvalue()?;
        if nu_min < 0.5 - PHYSICALITY_TOL {
            return Err(Error::InvalidState(format!(
                "covariance violates the uncertainty principle (min symplectic eigenvalue {nu_min})"
            )));
        }
        Ok(())
    }
}

/// Single-mode squeezed vacuum: cov = ½·R(θ)·diag(e^{−2r}, e^{2r})·R(θ)ᵀ.
pub fn squeezed_vacuum(r: f64, theta: f64) -> GaussianState {
    let (s, c) = theta.sin_cos();
    let a = 0.5 * (-2.0 * r).exp();
    let b = 0.5 * (2.0 * r).exp();
    let cov = DMatrix::from_row_slice(
        2,
        2,
        &[
            c * c * a + s * s * b,
            c * s * (a - b),
            c * s * (a - b),
            s * s * a + c * c * b,
        ],
    );
    GaussianState { labels: vec!["S".into()], mean: DVector::zeros(2), cov }
}

/// Two-mode squeezed vacuum over modes (S, A): diagonal blocks ½cosh(2r)·I,
/// off-diagonal block ½sinh(2r)·diag(1, −1).
pub fn two_mode_squeezed_vacuum(r: f64) -> GaussianState {
    let ch = 0.5 * (2.0 * r).cosh();
    let sh = 0.5 * (2.0 * r).sinh();
    // Ordering (q_S, q_A, p_S, p_A).
    let mut cov = DMatrix::zeros(4, 4);
    cov[(0, 0)] = ch;
    cov[(1, 1)] = ch;
    cov[(2, 2)] = ch;
    cov[(3, 3)] = ch;
    cov[(0, 1)] = sh;
    cov[(1, 0)] = sh;
    cov[(2, 3)] = -sh;
    cov[(3, 2)] = -sh;
    GaussianState { labels: vec!["S".into(), "A".into()], mean: DVector::zeros(4), cov }
}

/// Bose occupation n̄(ν, T) with k_B = 1; exactly 0 at T = 0.
pub fn mean_occupation(nu: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = nu / temperature;
    1.0 / x.exp_m1()
}

/// Single-mode thermal state: cov = (n̄ + ½)·I in the mode's natural frame.
pub fn thermal_state(nu: f64, temperature: f64) -> GaussianState {
    let d = mean_occupation(nu, temperature) + 0.5;
    GaussianState {
        labels: vec!["E".into()],
        mean: DVector::zeros(2),
        cov: DMatrix::identity(2, 2) * d,
    }
}

/// Product thermal state of every star mode, labeled E1..EN in ν order.
pub fn bath_thermal(star: &StarModel, temperature: f64) -> GaussianState {
    let n = star.n_modes();
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    let mut labels = Vec::with_capacity(n);
    for (i, &nu) in star.nu.iter().enumerate() {
        let d = mean_occupation(nu, temperature) + 0.5;
        cov[(i, i)] = d;
        cov[(n + i, n + i)] = d;
        labels.push(format!("E{}", i + 1));
    }
    GaussianState { labels, mean: DVector::zeros(2 * n), cov }
}

/// Applies the propagator to a state whose first `prop.dim()` modes are the
/// model coordinates (bath E1..EN, then S); any further modes are ancillas
/// and evolve under the identity. Means map as m′ = T·m and covariances as
/// σ′ = T·σ·Tᵀ, where T is the propagator conjugated by the per-mode
/// natural-frame scaling (see module docs).
pub fn evolve(initial: &GaussianState, prop: &Propagator) -> Result<GaussianState> {
    let m = initial.n_modes();
    let d = prop.dim();
    if m < d {
        return Err(Error::InvalidState(format!(
            "state has {m} modes but the propagator acts on {d}"
        )));
    }
    // Diagonal natural→real scaling over propagated modes, identity on ancillas.
    let mut scale = DVector::from_element(2 * m, 1.0);
    for (i, &w) in prop.mode_freqs.iter().enumerate() {
        scale[i] = 1.0 / w.sqrt();
        scale[m + i] = w.sqrt();
    }
    let mut t = DMatrix::identity(2 * m, 2 * m);
    t.view_mut((0, 0), (d, d)).copy_from(&prop.qq);
    t.view_mut((0, m), (d, d)).copy_from(&prop.qp);
    t.view_mut((m, 0), (d, d)).copy_from(&prop.pq);
    t.view_mut((m, m), (d, d)).copy_from(&prop.pp);
    for r in 0..2 * m {
        for c in 0..2 * m {
            t[(r, c)] *= scale[c] / scale[r];
        }
    }
    let mean = &t * &initial.mean;
    let mut cov = &t * &initial.cov * t.transpose();
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianState { labels: initial.labels.clone(), mean, cov })
}

/// Partial trace: keeps the listed modes (in the order given).
pub fn reduce(state: &GaussianState, keep: &[&str]) -> Result<GaussianState> {
    if keep.is_empty() {
        return Err(Error::InvalidState("partial trace must keep at least one mode".into()));
    }
    let m = state.n_modes();
    let idx: Vec<usize> =
        keep.iter().map(|l| state.mode_index(l)).collect::<Result<_>>()?;
    let k = idx.len();
    let mut mean = DVector::zeros(2 * k);
    let mut cov = DMatrix::zeros(2 * k, 2 * k);
    let row = |j: usize, is_p: bool| if is_p { m + idx[j] } else { idx[j] };
    for a in 0..2 * k {
        let ra = row(a % k, a >= k);
        mean[a] = state.mean[ra];
        for b in 0..2 * k {
            cov[(a, b)] = state.cov[(ra, row(b % k, b >= k))];
        }
    }
    Ok(GaussianState { labels: keep.iter().map(|s| s.to_string()).collect(), mean, cov })
}

/// Uhlmann fidelity F(ρ₁,ρ₂) = Tr√(√ρ₁ρ₂√ρ₁) for single-mode Gaussian
/// states, via the covariance invariants
///
/// ```text
/// Δ = 4·det(σ₁+σ₂),   δ = (4·det σ₁ − 1)(4·det σ₂ − 1)
/// F² = 2·(√(Δ+δ) + √δ)/Δ · exp(−½·δuᵀ(σ₁+σ₂)⁻¹δu)
/// ```
///
/// (the denominator is written in its cancellation-free form). Roundoff for
/// near-pure states is absorbed by clamping δ at 0 and F into [0, 1].
pub fn fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    for s in [a, b] {
        if s.n_modes() != 1 {
            return Err(Error::InvalidState(format!(
                "fidelity is defined here for single-mode states, got {} modes",
                s.n_modes()
            )));
        }
        s.check_physical()?;
    }
    let sum = &a.cov + &b.cov;
    let det_sum = sum[(0, 0)] * sum[(1, 1)] - sum[(0, 1)] * sum[(1, 0)];
    let det_a = a.cov[(0, 0)] * a.cov[(1, 1)] - a.cov[(0, 1)] * a.cov[(1, 0)];
    let det_b = b.cov[(0, 0)] * b.cov[(1, 1)] - b.cov[(0, 1)] * b.cov[(1, 0)];
    let big_delta = 4.0 * det_sum;
    let small_delta = ((4.0 * det_a - 1.0) * (4.0 * det_b - 1.0)).max(0.0);
    let du = &a.mean - &b.mean;
    let inv = sum
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular covariance sum in fidelity".into()))?;
    let quad = (du.transpose() * inv * du)[(0, 0)];
    let f2 = 2.0 * ((big_delta + small_delta).sqrt() + small_delta.sqrt()) / big_delta
        * (-0.5 * quad).exp();
    Ok(f2.max(0.0).sqrt().min(1.0))
}

/// Allocation-free fidelity between two zero-mean single-mode covariances.
/// Same formula as [`fidelity`] without the physicality checks; trajectory
/// loops that already guarantee physical inputs use this path.
pub fn fidelity_cov(sigma1: &Matrix2<f64>, sigma2: &Matrix2<f64>) -> f64 {
    let sum = sigma1 + sigma2;
    let big_delta = 4.0 * sum.determinant();
    let small_delta =
        ((4.0 * sigma1.determinant() - 1.0) * (4.0 * sigma2.determinant() - 1.0)).max(0.0);
    let f2 = 2.0 * ((big_delta + small_delta).sqrt() + small_delta.sqrt()) / big_delta;
    f2.max(0.0).sqrt().min(1.0)
}

/// Allocation-free logarithmic negativity of a two-mode covariance in
/// (q₁, q₂, p₁, p₂) ordering, via the partial-transpose invariant
/// Δ̃ = det A + det B − 2 det C and ν̃₋² = (Δ̃ − √(Δ̃² − 4 det σ))/2.
pub fn log_negativity_cov(cov: &Matrix4<f64>) -> f64 {
    let a = cov[(0, 0)] * cov[(2, 2)] - cov[(0, 2)] * cov[(2, 0)];
    let b = cov[(1, 1)] * cov[(3, 3)] - cov[(1, 3)] * cov[(3, 1)];
    let c = cov[(0, 1)] * cov[(2, 3)] - cov[(0, 3)] * cov[(2, 1)];
    let delta = a + b - 2.0 * c;
    let det = cov.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0);
    let nu2 = 0.5 * (delta - disc.sqrt());
    if nu2 <= 0.0 {
        return 0.0;
    }
    (-(2.0 * nu2.sqrt()).ln()).max(0.0)
}

/// Logarithmic negativity of a two-mode state: E_N = max(0, −ln 2ν̃₋) with
/// ν̃₋ the smallest symplectic eigenvalue of the partial transpose (momentum
/// sign flip on the second mode). Natural logarithm.
pub fn log_negativity(state: &GaussianState) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(Error::InvalidState(format!(
            "log-negativity needs a two-mode state, got {} modes",
            state.n_modes()
        )));
    }
    state.check_physical()?;
    // Ordering (q1, q2, p1, p2): flip index 3.
    let mut pt = state.cov.clone();
    for j in 0..4 {
        pt[(3, j)] = -pt[(3, j)];
        pt[(j, 3)] = -pt[(j, 3)];
    }
    let nus = symplectic_eigenvalues(&pt)?;
    let nu_min = nus.into_iter().fold(f64::INFINITY, f64::min);
    Ok((-(2.0 * nu_min).ln()).max(0.0))
}

/// Mean excitation ⟨H_mode⟩/ω = [(σ_pp+⟨p⟩²) + ω²(σ_qq+⟨q⟩²)]/(2ω), evaluated
/// in the mass-weighted frame of a mode whose natural quadratures the state
/// uses. Includes the ½ zero-point term: the ω-vacuum gives exactly 0.5.
pub fn excitation_number(state: &GaussianState, omega: f64) -> Result<f64> {
    if state.n_modes() != 1 {
        return Err(Error::InvalidState(format!(
            "excitation number needs a single-mode state, got {} modes",
            state.n_modes()
        )));
    }
    if omega <= 0.0 {
        return Err(Error::InvalidState("mode frequency must be positive".into()));
    }
    // Natural → real: q_r = q/√ω, p_r = p·√ω.
    let qq = state.cov[(0, 0)] / omega + state.mean[0] * state.mean[0] / omega;
    let pp = state.cov[(1, 1)] * omega + state.mean[1] * state.mean[1] * omega;
    Ok((pp + omega * omega * qq) / (2.0 * omega))
}

/// Total mean energy ⟨H⟩ = ½(tr σ_pp + |⟨p⟩|²) + tr(B·σ_qq) + ⟨q⟩ᵀB⟨q⟩ of a
/// state over exactly the model's N+1 modes, evaluated in mass-weighted
/// coordinates. Conserved by [`evolve`].
pub fn total_energy(model: &FullModel, state: &GaussianState) -> Result<f64> {
    let m = state.n_modes();
    if m != model.n_total() {
        return Err(Error::InvalidState(format!(
            "energy needs a state over all {} model modes, got {m}",
            model.n_total()
        )));
    }
    let freqs = model.mode_freqs();
    let b = model.potential_matrix();
    let mut e = 0.0;
    // Kinetic term: p_real = p_nat·√ω.
    for i in 0..m {
        let p2 = state.cov[(m + i, m + i)] + state.mean[m + i] * state.mean[m + i];
        e += 0.5 * p2 * freqs[i];
    }
    // Potential term: q_real(i)·q_real(j) = q_i q_j / √(ω_i ω_j).
    for i in 0..m {
        for j in 0..m {
            if b[(i, j)] != 0.0 {
                let qq = state.cov[(i, j)] + state.mean[i] * state.mean[j];
                e += b[(i, j)] * qq / (freqs[i] * freqs[j]).sqrt();
            }
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{assemble_full_system, build_dimer_chain, diagonalize_environment, propagator};

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
    }

    #[test]
    fn squeezed_vacuum_covariances() {
        let vac = squeezed_vacuum(0.0, 0.3);
        assert!(max_abs(&(vac.cov.clone() - DMatrix::identity(2, 2) * 0.5)) < 1e-15);

        let sq = squeezed_vacuum(1.0, 0.0);
        assert!((sq.cov[(0, 0)] - 0.5 * (-2.0_f64).exp()).abs() < 1e-15);
        assert!((sq.cov[(1, 1)] - 0.5 * 2.0_f64.exp()).abs() < 1e-15);
        assert!(sq.cov[(0, 1)].abs() < 1e-15);

        let rot = squeezed_vacuum(0.5, std::f64::consts::FRAC_PI_4);
        let det = rot.cov[(0, 0)] * rot.cov[(1, 1)] - rot.cov[(0, 1)] * rot.cov[(1, 0)];
        assert!((det - 0.25).abs() < 1e-15);
        let eig = crate::linalg::sorted_symmetric_eigen(&rot.cov).unwrap();
        assert!((eig.values[0] - 0.5 * (-1.0_f64).exp()).abs() < 1e-15);
        assert!((eig.values[1] - 0.5 * 1.0_f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn tmsv_reduces_to_thermal_like() {
        let r = 0.8;
        let st = two_mode_squeezed_vacuum(r);
        assert!(st.min_symplectic_eigenvalue().unwrap() >= 0.5 - 1e-12);
        let one = reduce(&st, &["A"]).unwrap();
        let expect = 0.5 * (2.0 * r).cosh();
        assert!((one.cov[(0, 0)] - expect).abs() < 1e-14);
        assert!((one.cov[(1, 1)] - expect).abs() < 1e-14);
        assert!(one.cov[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn thermal_occupations() {
        let vac = thermal_state(1.0, 0.0);
        assert!(max_abs(&(vac.cov.clone() - DMatrix::identity(2, 2) * 0.5)) < 1e-15);

        let warm = thermal_state(0.3, 10.0);
        let nbar = 1.0 / (0.03_f64.exp() - 1.0);
        assert!((warm.cov[(0, 0)] - (nbar + 0.5)).abs() < 1e-9);
        assert!((nbar - 32.8358).abs() < 1e-3);

        // Equipartition: (n̄+½)·ν/T → 1 for T ≫ ν.
        let t = 1e4;
        let hot = mean_occupation(1.0, t) + 0.5;
        assert!((hot / t - 1.0).abs() < 1e-3);
    }

    #[test]
    fn evolve_identity_at_t0() {
        let chain = build_dimer_chain(6, 0.5, 0.2, 0.1, 0.01).unwrap();
        let star = diagonalize_environment(&chain).unwrap();
        let model = assemble_full_system(star, 0.8).unwrap();
        let init = GaussianState::product(&[
            &bath_thermal(&model.star, 0.7),
            &squeezed_vacuum(1.0, 0.0),
        ])
        .unwrap();
        let out = evolve(&init, &propagator(&model, 0.0)).unwrap();
        assert!(max_abs(&(out.cov - init.cov)) < 1e-12);
    }

    #[test]
    fn thermal_bath_is_stationary_when_decoupled() {
        // k = 0: every bath mode keeps its (n̄+½)·I covariance for all t.
        let chain = build_dimer_chain(6, 0.5, 0.2, 0.1, 0.0).unwrap();
        let star = diagonalize_environment(&chain).unwrap();
        let model = assemble_full_system(star, 0.8).unwrap();
        let init =
            GaussianState::product(&[&bath_thermal(&model.star, 1.3), &squeezed_vacuum(0.7, 0.2)])
                .unwrap();
        let out = evolve(&init, &propagator(&model, 17.9)).unwrap();
        for i in 0..6 {
            for j in 0..14 {
                let want = init.cov[(i, j)];
                assert!((out.cov[(i, j)] - want).abs() < 1e-11, "bath row {i} moved");
            }
        }
    }

    #[test]
    fn decoupled_system_rotates_in_natural_frame() {
        let chain = build_dimer_chain(4, 0.5, 0.2, 0.1, 0.0).unwrap();
        let star = diagonalize_environment(&chain).unwrap();
        let omega_s = 0.73;
        let model = assemble_full_system(star, omega_s).unwrap();
        let sys = squeezed_vacuum(1.0, 0.0);
        let init = GaussianState::product(&[&bath_thermal(&model.star, 0.0), &sys]).unwrap();
        let t = 2.6;
        let out = evolve(&init, &propagator(&model, t)).unwrap();
        let red = reduce(&out, &["S"]).unwrap();
        // Natural-frame free evolution is a plain rotation by −ω_S t of the
        // (q,p) plane: q(t) = q cos + p sin, p(t) = −q sin + p cos.
        let (s, c) = (omega_s * t).sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        let expect = &rot * &sys.cov * rot.transpose();
        assert!(max_abs(&(red.cov - expect)) < 1e-11);
    }

    #[test]
    fn evolution_preserves_purity_and_physicality() {
        let chain = build_dimer_chain(5, 0.4, 0.15, 0.1, 0.03).unwrap();
        let star = diagonalize_environment(&chain).unwrap();
        let model = assemble_full_system(star, 0.6).unwrap();
        let init =
            GaussianState::product(&[&bath_thermal(&model.star, 0.0), &squeezed_vacuum(1.0, 0.0)])
                .unwrap();
        let det0 = init.cov.clone().determinant();
        for &t in &[3.0, 41.0, 177.0] {
            let out = evolve(&init, &propagator(&model, t)).unwrap();
            let det = out.cov.clone().determinant();
            assert!((det / det0 - 1.0).abs() < 1e-8, "purity drift at t={t}");
            assert!(out.min_symplectic_eigenvalue().unwrap() > 0.5 - 1e-9);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let chain = build_dimer_chain(5, 0.4, 0.15, 0.1, 0.03).unwrap();
        let star = diagonalize_environment(&chain).unwrap();
        let model = assemble_full_system(star, 0.6).unwrap();
        for temp in [0.0, 1.0] {
            let init = GaussianState::product(&[
                &bath_thermal(&model.star, temp),
                &squeezed_vacuum(1.0, 0.0),
            ])
            .unwrap();
            let e0 = total_energy(&model, &init).unwrap();
            for &t in &[7.0, 100.0, 400.0] {
                let out = evolve(&init, &propagator(&model, t)).unwrap();
                let e = total_energy(&model, &out).unwrap();
                assert!(
                    ((e - e0) / e0).abs() < 1e-8,
                    "energy drift {} at t={t}, T={temp}",
                    (e - e0) / e0
                );
            }
        }
    }

    #[test]
    fn reduce_keeps_product_factors() {
        let a = squeezed_vacuum(0.6, 0.1).with_labels(vec!["X"]).unwrap();
        let b = thermal_state(0.5, 2.0).with_labels(vec!["Y"]).unwrap();
        let joint = GaussianState::product(&[&a, &b]).unwrap();
        let back = reduce(&joint, &["X"]).unwrap();
        assert!(max_abs(&(back.cov - a.cov)) < 1e-15);
        let everything = reduce(&joint, &["X", "Y"]).unwrap();
        assert!(max_abs(&(everything.cov - joint.cov.clone())) < 1e-15);
        assert!(reduce(&joint, &["Z"]).is_err());
    }

    #[test]
    fn fidelity_known_values() {
        let vac = squeezed_vacuum(0.0, 0.0);
        assert!((fidelity(&vac, &vac).unwrap() - 1.0).abs() < 1e-12);

        let th = thermal_state(1.0, 1.0);
        let nbar = mean_occupation(1.0, 1.0);
        let expect = (1.0 / (nbar + 1.0)).sqrt();
        let f = fidelity(&vac, &th).unwrap();
        assert!((f - expect).abs() < 1e-12);
        let f_swapped = fidelity(&th, &vac).unwrap();
        assert!((f - f_swapped).abs() < 1e-14);

        // Opposite squeezings: F = 1/√cosh(2r).
        let r = 0.9;
        let plus = squeezed_vacuum(r, 0.0);
        let minus = squeezed_vacuum(-r, 0.0);
        let f = fidelity(&plus, &minus).unwrap();
        assert!((f - 1.0 / (2.0 * r).cosh().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_of_displaced_vacua() {
        let a = squeezed_vacuum(0.0, 0.0);
        let mut b = squeezed_vacuum(0.0, 0.0);
        let d = 1.7;
        b.mean[0] = d;
        let f = fidelity(&a, &b).unwrap();
        assert!((f - (-d * d / 4.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn log_negativity_known_values() {
        let vac2 = GaussianState::product(&[
            &squeezed_vacuum(0.0, 0.0).with_labels(vec!["S"]).unwrap(),
            &squeezed_vacuum(0.3, 0.0).with_labels(vec!["A"]).unwrap(),
        ])
        .unwrap();
        assert!(log_negativity(&vac2).unwrap() < 1e-12);

        for r in [0.5, 1.0, 1.5] {
            let e = log_negativity(&two_mode_squeezed_vacuum(r)).unwrap();
            assert!((e - 2.0 * r).abs() < 1e-8, "r={r}: E_N={e}");
        }
    }

    #[test]
    fn log_negativity_local_rotation_invariance() {
        let st = two_mode_squeezed_vacuum(1.0);
        let e0 = log_negativity(&st).unwrap();
        // Rotate the ancilla quadratures by a few angles; (q1,q2,p1,p2) basis.
        for phi in [0.3_f64, 1.1, 2.7] {
            let (s, c) = phi.sin_cos();
            let mut rot = DMatrix::identity(4, 4);
            rot[(1, 1)] = c;
            rot[(1, 3)] = s;
            rot[(3, 1)] = -s;
            rot[(3, 3)] = c;
            let cov = &rot * &st.cov * rot.transpose();
            let rotated = GaussianState { labels: st.labels.clone(), mean: st.mean.clone(), cov };
            let e = log_negativity(&rotated).unwrap();
            assert!((e - e0).abs() < 1e-10);
        }
    }

    #[test]
    fn excitation_number_examples() {
        for omega in [0.3, 1.0, 2.5] {
            let n = excitation_number(&squeezed_vacuum(0.0, 0.0), omega).unwrap();
            assert!((n - 0.5).abs() < 1e-12, "vacuum at ω={omega}");
        }
        let r = 0.8;
        let n = excitation_number(&squeezed_vacuum(r, 0.0), 1.0).unwrap();
        assert!((n - 0.5 * (2.0 * r).cosh()).abs() < 1e-12);

        let th = thermal_state(0.4, 2.0);
        let n = excitation_number(&th, 0.4).unwrap();
        assert!((n - (mean_occupation(0.4, 2.0) + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn fast_paths_agree_with_checked_versions() {
        // fidelity_cov vs fidelity on assorted squeezed/thermal covariances.
        let states = [
            squeezed_vacuum(0.7, 0.3),
            squeezed_vacuum(1.0, 1.2),
            thermal_state(0.5, 1.5),
            thermal_state(1.0, 0.2),
        ];
        for a in &states {
            for b in &states {
                let slow = fidelity(a, b).unwrap();
                let fast = fidelity_cov(
                    &Matrix2::from_iterator(a.cov.iter().cloned()),
                    &Matrix2::from_iterator(b.cov.iter().cloned()),
                );
                assert!((slow - fast).abs() < 1e-13);
            }
        }
        // log_negativity_cov vs log_negativity on TMSV and a rotated variant.
        for r in [0.2, 1.0, 1.4] {
            let st = two_mode_squeezed_vacuum(r);
            let slow = log_negativity(&st).unwrap();
            let fast = log_negativity_cov(&Matrix4::from_iterator(st.cov.iter().cloned()));
            assert!((slow - fast).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn unphysical_covariance_is_rejected() {
        let mut bad = squeezed_vacuum(0.0, 0.0);
        bad.cov[(0, 0)] = 0.1;
        bad.cov[(1, 1)] = 0.1;
        assert!(fidelity(&bad, &squeezed_vacuum(0.0, 0.0)).is_err());
    }
}
