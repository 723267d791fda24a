//! Non-Markovianity measures computed from exact Gaussian trajectories.
//!
//! Two quantifiers are implemented:
//!
//! * An information back-flow measure: pairs of single-mode squeezed probes
//!   evolve under the same bath, and every episode in which their Uhlmann
//!   fidelity *decreases* (distinguishability returns) is accumulated; the
//!   grid maximum is reported. Zero coupling gives exactly zero.
//! * A divisibility witness: a system+ancilla two-mode squeezed probe is
//!   tracked through its logarithmic negativity E(t); any growth of E is
//!   impossible under divisible dynamics, so the accumulated increase
//!   (Σ|ΔE| + E(t_f) − E(0), i.e. twice the total rise) is reported. A zero
//!   value is flagged inconclusive: divisible and weakly non-divisible maps
//!   both produce it.
//!
//! Values are convention-dependent (natural-log negativity, grid choice);
//! meaningful statements are contrasts and argmax locations, which is how
//! the scenario layer uses them.

use nalgebra::{Matrix2, Matrix4, Vector2};

use crate::chain::FullModel;
use crate::gaussian::{fidelity_cov, log_negativity_cov, squeezed_vacuum, two_mode_squeezed_vacuum, GaussianState};
use crate::spectral::recurrence_time_estimate;
use crate::trajectory::{reduced_propagators, time_grid};
use crate::{Error, Result};
use rayon::prelude::*;

/// Slope threshold separating genuine fidelity/negativity changes from
/// floating-point chatter.
const SLOPE_EPS: f64 = 1e-12;

/// A pair of single-mode squeezed probe states (r₁, θ₁) vs (r₂, θ₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedPair {
    pub r1: f64,
    pub theta1: f64,
    pub r2: f64,
    pub theta2: f64,
}

/// Probe-state grid for the back-flow measure.
#[derive(Debug, Clone)]
pub struct BlpGrid {
    /// Reference squeezings r₁ (θ₁ fixed).
    pub r1_list: Vec<f64>,
    pub theta1: f64,
    /// (lo, hi, step) for the second probe's squeezing.
    pub r2_range: (f64, f64, f64),
    /// (lo, hi, step) for the second probe's angle.
    pub theta2_range: (f64, f64, f64),
}

fn expand_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

impl BlpGrid {
    /// Coarse default scan: r₁ = 1, θ₁ = 0, r₂ ∈ [0.5, 1] (step 0.5),
    /// θ₂ ∈ [0, π/2] (step π/4).
    pub fn default_grid() -> Self {
        BlpGrid {
            r1_list: vec![1.0],
            theta1: 0.0,
            r2_range: (0.5, 1.0, 0.5),
            theta2_range: (0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4),
        }
    }

    /// Denser squeezing scan: r₂ ∈ [0.25, 1] in steps of 0.25.
    pub fn dense() -> Self {
        BlpGrid { r2_range: (0.25, 1.0, 0.25), ..Self::default_grid() }
    }

    /// Thorough scan for temperature studies, where the optimal pair moves
    /// with T: r₁ ∈ {1/3, 1}, r₂ ∈ [0, 2] (step 0.1), θ₂ ∈ [0, π] (step π/10).
    pub fn thorough() -> Self {
        BlpGrid {
            r1_list: vec![1.0 / 3.0, 1.0],
            theta1: 0.0,
            r2_range: (0.0, 2.0, 0.1),
            theta2_range: (0.0, std::f64::consts::PI, std::f64::consts::PI / 10.0),
        }
    }

    /// Thorough scan with the r₂ resolution relaxed to 0.25, for long maps.
    pub fn thorough_reduced() -> Self {
        BlpGrid { r2_range: (0.0, 2.0, 0.25), ..Self::thorough() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r1_list.is_empty() {
            return Err(Error::InvalidConfig("probe grid needs at least one r1".into()));
        }
        for (lo, hi, step) in [self.r2_range, self.theta2_range] {
            if !(step > 0.0 && hi >= lo) {
                return Err(Error::InvalidConfig(format!(
                    "probe grid range ({lo}, {hi}, {step}) must have step > 0 and hi ≥ lo"
                )));
            }
        }
        Ok(())
    }

    /// All probe pairs in deterministic order.
    pub fn pairs(&self) -> Vec<SqueezedPair> {
        let r2s = expand_range(self.r2_range.0, self.r2_range.1, self.r2_range.2);
        let th2s = expand_range(self.theta2_range.0, self.theta2_range.1, self.theta2_range.2);
        let mut out = Vec::with_capacity(self.r1_list.len() * r2s.len() * th2s.len());
        for &r1 in &self.r1_list {
            for &r2 in &r2s {
                for &th2 in &th2s {
                    out.push(SqueezedPair { r1, theta1: self.theta1, r2, theta2: th2 });
                }
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        format!(
            "r1={:?} theta1={} r2=({}, {}, {}) theta2=({}, {}, {})",
            self.r1_list,
            self.theta1,
            self.r2_range.0,
            self.r2_range.1,
            self.r2_range.2,
            self.theta2_range.0,
            self.theta2_range.1,
            self.theta2_range.2
        )
    }
}

/// What a zero measure value means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusiveness {
    /// Strictly positive value: non-Markovianity witnessed.
    Positive,
    /// Zero: the map may be divisible or its non-divisibility invisible to
    /// this witness.
    ZeroInconclusive,
    /// The measure was not evaluated.
    NotComputed,
}

/// The optimizing argument of a measure.
#[derive(Debug, Clone)]
pub enum ArgMax {
    Pair(SqueezedPair),
    Probe { r: f64 },
}

#[derive(Debug, Clone)]
pub struct NmMeta {
    pub t_final: f64,
    pub dt: f64,
    pub grid: String,
    pub model_fingerprint: String,
    /// Set by the divisibility witness; back-flow zeros are conclusive.
    pub conclusiveness: Option<Conclusiveness>,
}

/// A measure value with its optimizer and the optimizing trajectory.
#[derive(Debug, Clone)]
pub struct NmResult {
    pub value: f64,
    pub argmax: ArgMax,
    /// F(t) or E(t) on the uniform grid, at the optimum.
    pub trajectory: Vec<f64>,
    pub meta: NmMeta,
}

/// FNV-1a hash of the model's defining arrays, for traceability of results.
pub fn model_fingerprint(model: &FullModel) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut eat = |x: f64| {
        for b in x.to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    eat(model.star.n_modes() as f64);
    eat(model.omega_s);
    for &v in &model.star.nu {
        eat(v);
    }
    for &g in &model.star.gtilde {
        eat(g);
    }
    format!("{hash:016x}")
}

fn warn_if_past_horizon(model: &FullModel, t_final: f64) {
    if model.star.n_modes() >= 3 {
        if let Ok(est) = recurrence_time_estimate(&model.star) {
            if t_final > est.safe_horizon() {
                log::warn!(
                    "t_final = {t_final} exceeds the safe recurrence horizon {:.1}; \
                     finite-bath revivals will contaminate the measures",
                    est.safe_horizon()
                );
            }
        }
    }
}

fn cov2(state: &GaussianState) -> Matrix2<f64> {
    Matrix2::from_iterator(state.cov.iter().cloned())
}

/// Fidelity F(ρ₁(t), ρ₂(t)) of two single-mode probes evolved under the same
/// thermal bath, on the uniform grid 0..t_final.
pub fn fidelity_trajectory(
    model: &FullModel,
    pair: (&GaussianState, &GaussianState),
    temperature: f64,
    t_final: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if pair.0.n_modes() != 1 || pair.1.n_modes() != 1 {
        return Err(Error::InvalidState("probe states must be single-mode".into()));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    warn_if_past_horizon(model, t_final);
    let times = time_grid(t_final, dt);
    let rps = reduced_propagators(model, temperature, &times);
    let s1 = cov2(pair.0);
    let s2 = cov2(pair.1);
    let m1 = Vector2::new(pair.0.mean[0], pair.0.mean[1]);
    let m2 = Vector2::new(pair.1.mean[0], pair.1.mean[1]);
    let zero_mean = (m1 - m2).norm() == 0.0;
    Ok(rps
        .iter()
        .map(|rp| {
            let c1 = rp.apply_system(&s1);
            let c2 = rp.apply_system(&s2);
            let f = fidelity_cov(&c1, &c2);
            if zero_mean {
                f
            } else {
                let du = rp.apply_mean(&m1) - rp.apply_mean(&m2);
                let sum = c1 + c2;
                let quad = (du.transpose() * sum.try_inverse().unwrap_or_else(Matrix2::zeros) * du)
                    [(0, 0)];
                (f * f * (-0.5 * quad).exp()).sqrt().min(1.0)
            }
        })
        .collect())
}

/// Sum of all fidelity decreases along a sampled trajectory (the magnitude of
/// the negative-slope episodes), chatter-thresholded.
fn accumulated_decrease(f: &[f64]) -> f64 {
    let mut acc = 0.0;
    for w in f.windows(2) {
        let d = w[0] - w[1];
        if d > SLOPE_EPS {
            acc += d;
        }
    }
    acc
}

/// Back-flow measure: max over the probe grid of the accumulated fidelity
/// decrease. Probe pairs share the identical bath and propagators, so the
/// expensive reduced propagators are computed once per call.
pub fn blp_measure(
    model: &FullModel,
    grid: &BlpGrid,
    temperature: f64,
    t_final: f64,
    dt: f64,
) -> Result<NmResult> {
    grid.validate()?;
    if dt <= 0.0 {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    warn_if_past_horizon(model, t_final);
    let pairs = grid.pairs();
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("probe grid is empty".into()));
    }
    let times = time_grid(t_final, dt);
    let rps = reduced_propagators(model, temperature, &times);

    let scores: Vec<(f64, Vec<f64>)> = pairs
        .par_iter()
        .map(|p| {
            let s1 = cov2(&squeezed_vacuum(p.r1, p.theta1));
            let s2 = cov2(&squeezed_vacuum(p.r2, p.theta2));
            let f: Vec<f64> = rps
                .iter()
                .map(|rp| fidelity_cov(&rp.apply_system(&s1), &rp.apply_system(&s2)))
                .collect();
            (accumulated_decrease(&f), f)
        })
        .collect();

    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate() {
        if s.0 > scores[best].0 {
            best = i;
        }
    }
    let (value, trajectory) = scores.into_iter().nth(best).expect("non-empty grid");
    Ok(NmResult {
        value,
        argmax: ArgMax::Pair(pairs[best]),
        trajectory,
        meta: NmMeta {
            t_final,
            dt,
            grid: grid.describe(),
            model_fingerprint: model_fingerprint(model),
            conclusiveness: None,
        },
    })
}

/// Divisibility witness: accumulated growth of the system–ancilla
/// logarithmic negativity, Σ_j (|ΔE_j| + ΔE_j), for a two-mode squeezed
/// probe of squeezing `r_probe` against a thermal bath.
pub fn rhp_measure(
    model: &FullModel,
    r_probe: f64,
    temperature: f64,
    t_final: f64,
    dt: f64,
) -> Result<NmResult> {
    if r_probe <= 0.0 {
        return Err(Error::InvalidConfig("probe squeezing must be positive".into()));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    warn_if_past_horizon(model, t_final);
    let times = time_grid(t_final, dt);
    let rps = reduced_propagators(model, temperature, &times);
    let probe = two_mode_squeezed_vacuum(r_probe);
    let sigma0 = Matrix4::from_iterator(probe.cov.iter().cloned());
    let e: Vec<f64> = rps
        .par_iter()
        .map(|rp| log_negativity_cov(&rp.apply_system_ancilla(&sigma0)))
        .collect();
    let mut rise = 0.0;
    for w in e.windows(2) {
        let d = w[1] - w[0];
        if d > SLOPE_EPS {
            rise += d;
        }
    }
    let value = 2.0 * rise;
    let conclusiveness =
        if value > 0.0 { Conclusiveness::Positive } else { Conclusiveness::ZeroInconclusive };
    Ok(NmResult {
        value,
        argmax: ArgMax::Probe { r: r_probe },
        trajectory: e,
        meta: NmMeta {
            t_final,
            dt,
            grid: format!("two-mode squeezed probe r={r_probe}"),
            model_fingerprint: model_fingerprint(model),
            conclusiveness: Some(conclusiveness),
        },
    })
}
