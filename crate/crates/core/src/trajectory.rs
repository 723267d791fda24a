//! Reduced dynamics of the system (and an optional uncoupled ancilla) without
//! ever materializing the full (2N+2)² covariance.
//!
//! Because the initial bath state is a zero-mean product of thermal modes,
//! the reduced system covariance at time t splits exactly into a transfer
//! part and an additive noise part:
//!
//! ```text
//! σ_S(t) = A(t)·σ_S(0)·A(t)ᵀ + M(t)
//! ```
//!
//! where A(t) is the 2×2 system block of the propagator and M(t) collects the
//! thermal bath's contribution. Both need only the *system rows* of the
//! propagator blocks, which cost three O(N²) matrix-vector products per time
//! instead of the O(N³) full blocks. With an ancilla the same A(t) acts on
//! the system half of the 4×4 covariance while the ancilla half is inert.
//!
//! Everything here is expressed in natural per-mode quadratures (the frame
//! of [`crate::gaussian`] states); the mass-weighted scaling is folded into
//! A and M once per time step.

use nalgebra::{Matrix2, Matrix4, Vector2};

use crate::chain::FullModel;
use crate::gaussian::mean_occupation;

/// One time point of the reduced dynamics: σ′ = A σ Aᵀ + M on the system,
/// identity on any ancilla.
#[derive(Debug, Clone)]
pub struct ReducedPropagator {
    pub t: f64,
    /// Natural-frame system transfer matrix.
    pub a: Matrix2<f64>,
    /// Natural-frame additive noise from the thermal bath.
    pub noise: Matrix2<f64>,
}

impl ReducedPropagator {
    /// Evolves a single-mode system covariance.
    pub fn apply_system(&self, cov: &Matrix2<f64>) -> Matrix2<f64> {
        self.a * cov * self.a.transpose() + self.noise
    }

    /// Evolves a system mean vector (the thermal bath adds no mean).
    pub fn apply_mean(&self, mean: &Vector2<f64>) -> Vector2<f64> {
        self.a * mean
    }

    /// Evolves a system+ancilla covariance in (q_S, q_A, p_S, p_A) ordering;
    /// the ancilla is untouched by the dynamics.
    pub fn apply_system_ancilla(&self, cov: &Matrix4<f64>) -> Matrix4<f64> {
        let mut big_a = Matrix4::identity();
        big_a[(0, 0)] = self.a[(0, 0)];
        big_a[(0, 2)] = self.a[(0, 1)];
        big_a[(2, 0)] = self.a[(1, 0)];
        big_a[(2, 2)] = self.a[(1, 1)];
        let mut out = big_a * cov * big_a.transpose();
        out[(0, 0)] += self.noise[(0, 0)];
        out[(0, 2)] += self.noise[(0, 1)];
        out[(2, 0)] += self.noise[(1, 0)];
        out[(2, 2)] += self.noise[(1, 1)];
        out
    }
}

/// Uniform sampling grid 0, dt, 2dt, … with floor(t_final/dt)+1 points
/// (a small guard absorbs the floating-point division error).
pub fn time_grid(t_final: f64, dt: f64) -> Vec<f64> {
    assert!(dt > 0.0 && t_final >= 0.0, "time grid needs dt > 0 and t_final ≥ 0");
    let steps = (t_final / dt + 1e-9).floor() as usize;
    (0..=steps).map(|j| j as f64 * dt).collect()
}

/// Computes the reduced propagators of a model at the given times for a bath
/// thermalized at `temperature`.
pub fn reduced_propagators(
    model: &FullModel,
    temperature: f64,
    times: &[f64],
) -> Vec<ReducedPropagator> {
    let n_total = model.n_total();
    let n_bath = n_total - 1;
    let s = model.system_index();
    let omega_s = model.omega_s;

    // System row of O, and the thermal weight n̄+½ of every bath mode.
    let o_sys: Vec<f64> = (0..n_total).map(|m| model.o[(s, m)]).collect();
    let weights: Vec<f64> = model
        .star
        .nu
        .iter()
        .map(|&nu| mean_occupation(nu, temperature) + 0.5)
        .collect();

    let mut w_cos = vec![0.0; n_total];
    let mut w_sin = vec![0.0; n_total];
    let mut w_fsin = vec![0.0; n_total];
    let mut r_qq = vec![0.0; n_total];
    let mut r_qp = vec![0.0; n_total];
    let mut r_pq = vec![0.0; n_total];

    times
        .iter()
        .map(|&t| {
            for m in 0..n_total {
                let f = model.f[m];
                let (sn, cs) = (f * t).sin_cos();
                w_cos[m] = o_sys[m] * cs;
                w_sin[m] = o_sys[m] * sn / f;
                w_fsin[m] = -o_sys[m] * f * sn;
            }
            // System rows of the three distinct propagator blocks:
            // r_qq[j] = Σ_m O_jm cos(f_m t) O_sm, etc.
            for j in 0..n_total {
                let (mut acc_c, mut acc_s, mut acc_fs) = (0.0, 0.0, 0.0);
                for m in 0..n_total {
                    let o_jm = model.o[(j, m)];
                    acc_c += o_jm * w_cos[m];
                    acc_s += o_jm * w_sin[m];
                    acc_fs += o_jm * w_fsin[m];
                }
                r_qq[j] = acc_c;
                r_qp[j] = acc_s;
                r_pq[j] = acc_fs;
            }
            // Mass-weighted system transfer block, then fold in the
            // natural-frame scaling of the system mode.
            let a = Matrix2::new(
                r_qq[s],
                r_qp[s] * omega_s,
                r_pq[s] / omega_s,
                r_qq[s],
            );
            // Bath noise Σ_j (n̄_j+½)[(1/ν_j)·u uᵀ + ν_j·v vᵀ] with
            // u = (qq_j, pq_j), v = (qp_j, qq_j); converted to the system's
            // natural frame: qq·ω_S, pp/ω_S, qp unchanged.
            let (mut m_qq, mut m_qp, mut m_pp) = (0.0, 0.0, 0.0);
            for j in 0..n_bath {
                let nu = model.star.nu[j];
                let w = weights[j];
                let (uq, up) = (r_qq[j], r_pq[j]);
                let (vq, vp) = (r_qp[j], r_qq[j]);
                m_qq += w * (uq * uq / nu + nu * vq * vq);
                m_qp += w * (uq * up / nu + nu * vq * vp);
                m_pp += w * (up * up / nu + nu * vp * vp);
            }
            let noise =
                Matrix2::new(m_qq * omega_s, m_qp, m_qp, m_pp / omega_s);
            ReducedPropagator { t, a, noise }
        })
        .collect()
}
