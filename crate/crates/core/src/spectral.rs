//! Damping kernels, spectral densities, star-model synthesis, and recurrence
//! estimates for finite oscillator environments.
//!
//! A star model fixes the damping kernel exactly:
//! γ(t) = Σ_i (g̃_i²/ν_i²)·cos(ν_i t). The smooth spectral density the bath
//! mimics at times below its recurrence horizon is recovered by the windowed
//! cosine transform J(ω) = ω·∫₀^T γ(t)cos(ωt)·w(t)dt with a Hann taper
//! w(t) = ½(1 + cos(πt/T)), which suppresses the ringing of the sharply
//! truncated finite sum. Because γ is a finite sum of cosines, the transform
//! evaluates in closed form through sinc integrals; no quadrature error.
//!
//! The inverse direction plants modes on a uniform midpoint grid and sizes
//! their couplings from a target J via the local discretization identity
//! J(ν_i) ≈ (π/2)·g̃_i²/(ν_i·Δν_i).

use std::path::Path;

use crate::chain::StarModel;
use crate::{Error, Result};

/// Damping kernel γ(t) = Σ_i (g̃_i²/ν_i²)·cos(ν_i t).
pub fn damping_kernel(star: &StarModel, t: f64) -> f64 {
    star.nu
        .iter()
        .zip(&star.gtilde)
        .map(|(&nu, &gt)| (gt * gt) / (nu * nu) * (nu * t).cos())
        .sum()
}

fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// ∫₀^T cos(at)·cos(bt)·w(t) dt with the Hann taper w(t) = ½(1+cos(πt/T)),
/// expanded into closed-form sinc terms.
fn hann_cos_cos_integral(a: f64, b: f64, t_window: f64) -> f64 {
    let s = |x: f64| t_window * sinc(x * t_window);
    let p = std::f64::consts::PI / t_window;
    0.25 * (s(a - b) + s(a + b))
        + 0.125 * (s(a - b - p) + s(a - b + p) + s(a + b - p) + s(a + b + p))
}

/// Windowed cosine transform J(ω) = ω·∫₀^T γ(t)cos(ωt)·w(t)dt, evaluated
/// exactly term by term. Warns when the window reaches past the model's
/// recurrence horizon, where the discrete sum stops mimicking a smooth bath.
pub fn spectral_density_transform(star: &StarModel, omega: f64, t_window: f64) -> f64 {
    if star.n_modes() >= 3 {
        if let Ok(est) = recurrence_time_estimate(star) {
            if t_window >= est.safe_horizon() {
                log::warn!(
                    "transform window {t_window} reaches past the recurrence horizon {:.1}",
                    est.safe_horizon()
                );
            }
        }
    }
    let sum: f64 = star
        .nu
        .iter()
        .zip(&star.gtilde)
        .map(|(&nu, &gt)| (gt * gt) / (nu * nu) * hann_cos_cos_integral(nu, omega, t_window))
        .sum();
    omega * sum
}

/// Local spectral density at mode `i` (0-based) from the discretization
/// identity J(ν_i) ≈ (π/2)·g̃_i²/(ν_i·Δν_i), with Δν from centered
/// differences (one-sided at the ends).
pub fn spectral_density_local(star: &StarModel, i: usize) -> Result<f64> {
    let n = star.n_modes();
    if n < 2 {
        return Err(Error::InvalidModel("local density needs at least two modes".into()));
    }
    if i >= n {
        return Err(Error::InvalidModel(format!("mode index {i} out of range (N = {n})")));
    }
    let spacing = local_spacing(&star.nu, i);
    let gt = star.gtilde[i];
    Ok(0.5 * std::f64::consts::PI * gt * gt / (star.nu[i] * spacing))
}

fn local_spacing(nu: &[f64], i: usize) -> f64 {
    let n = nu.len();
    if i == 0 {
        nu[1] - nu[0]
    } else if i == n - 1 {
        nu[n - 1] - nu[n - 2]
    } else {
        0.5 * (nu[i + 1] - nu[i - 1])
    }
}

/// Target spectral densities for star synthesis.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    /// J = k·(ω/pivot)^s: pivots around the reference frequency, J(pivot) = k
    /// for every exponent.
    PivotPower { s: f64, pivot: f64 },
    /// J = k·(ω−ω0)^s.
    OffsetPower { s: f64, omega0: f64 },
    /// J = k·[(ω−ω0)/(ω_R−ω0)]^s: pinned to k at ω_R for every exponent.
    NormalizedPower { s: f64, omega0: f64, omega_r: f64 },
    /// J = k·ω·√(ω_R²−ω²)/ω_R.
    OhmicSemicircle { omega_r: f64 },
    /// Linear interpolation of a sorted (ω, J) table; zero outside it.
    Tabulated { points: Vec<(f64, f64)> },
}

/// A nonnegative target density with sharp support edges [omega_lo, omega_hi].
#[derive(Debug, Clone)]
pub struct SpectralDensityTarget {
    pub kind: TargetKind,
    /// Overall coupling scale (multiplies tabulated values too).
    pub k: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

/// Exponent range supported by the power-law kinds.
const S_RANGE: (f64, f64) = (-2.0, 4.0);

impl SpectralDensityTarget {
    pub fn new(kind: TargetKind, k: f64, omega_lo: f64, omega_hi: f64) -> Result<Self> {
        if !(0.0 <= omega_lo && omega_lo < omega_hi) {
            return Err(Error::InvalidModel(format!(
                "support must satisfy 0 ≤ omega_lo < omega_hi, got [{omega_lo}, {omega_hi}]"
            )));
        }
        if k < 0.0 {
            return Err(Error::InvalidModel("coupling scale k must be nonnegative".into()));
        }
        match &kind {
            TargetKind::PivotPower { s, pivot } => {
                check_exponent(*s)?;
                if *pivot <= 0.0 {
                    return Err(Error::InvalidModel("pivot frequency must be positive".into()));
                }
            }
            TargetKind::OffsetPower { s, omega0 } => {
                check_exponent(*s)?;
                if omega_lo < *omega0 {
                    return Err(Error::InvalidModel(
                        "offset power law needs omega_lo ≥ omega0".into(),
                    ));
                }
                if *s < 0.0 && omega_lo <= *omega0 {
                    return Err(Error::InvalidModel(
                        "offset power law with s < 0 diverges at omega0; \
                         the support must start strictly above it"
                            .into(),
                    ));
                }
            }
            TargetKind::NormalizedPower { s, omega0, omega_r } => {
                check_exponent(*s)?;
                if *omega_r <= *omega0 {
                    return Err(Error::InvalidModel("normalized power law needs omega_r > omega0".into()));
                }
                if omega_lo < *omega0 || (*s < 0.0 && omega_lo <= *omega0) {
                    return Err(Error::InvalidModel(
                        "normalized power law support must start at or above omega0 \
                         (strictly above for s < 0)"
                            .into(),
                    ));
                }
            }
            TargetKind::OhmicSemicircle { omega_r } => {
                if *omega_r < omega_hi {
                    return Err(Error::InvalidModel(
                        "semicircle support cannot extend past omega_r".into(),
                    ));
                }
            }
            TargetKind::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidModel("tabulated density needs at least two points".into()));
                }
                if points.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::InvalidModel(
                        "tabulated frequencies must be strictly increasing".into(),
                    ));
                }
                if points.iter().any(|p| p.1 < 0.0 || !p.1.is_finite()) {
                    return Err(Error::InvalidModel("tabulated densities must be nonnegative".into()));
                }
            }
        }
        Ok(SpectralDensityTarget { kind, k, omega_lo, omega_hi })
    }

    /// J(ω); zero outside [omega_lo, omega_hi].
    pub fn evaluate(&self, omega: f64) -> f64 {
        if omega < self.omega_lo || omega > self.omega_hi {
            return 0.0;
        }
        match &self.kind {
            TargetKind::PivotPower { s, pivot } => self.k * (omega / pivot).powf(*s),
            TargetKind::OffsetPower { s, omega0 } => {
                let x = omega - omega0;
                if x <= 0.0 && *s <= 0.0 {
                    0.0
                } else {
                    self.k * x.powf(*s)
                }
            }
            TargetKind::NormalizedPower { s, omega0, omega_r } => {
                let x = (omega - omega0) / (omega_r - omega0);
                if x <= 0.0 && *s <= 0.0 {
                    0.0
                } else {
                    self.k * x.powf(*s)
                }
            }
            TargetKind::OhmicSemicircle { omega_r } => {
                self.k * omega * (omega_r * omega_r - omega * omega).max(0.0).sqrt() / omega_r
            }
            TargetKind::Tabulated { points } => {
                let first = points.first().unwrap();
                let last = points.last().unwrap();
                if omega < first.0 || omega > last.0 {
                    return 0.0;
                }
                let j = points.partition_point(|p| p.0 <= omega).min(points.len() - 1);
                let (x0, y0) = points[j - 1];
                let (x1, y1) = points[j];
                self.k * (y0 + (y1 - y0) * (omega - x0) / (x1 - x0))
            }
        }
    }
}

fn check_exponent(s: f64) -> Result<()> {
    if !(S_RANGE.0..=S_RANGE.1).contains(&s) {
        return Err(Error::InvalidModel(format!(
            "exponent s = {s} outside the supported range [{}, {}]",
            S_RANGE.0, S_RANGE.1
        )));
    }
    Ok(())
}

/// Loads a two-column (ω, J) table: one pair per line, whitespace or comma
/// separated, `#` comments and blank lines ignored.
pub fn load_density_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "{}:{}: expected two columns (omega, J), got {}",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let omega: f64 = fields[0].parse().map_err(|_| {
            Error::InvalidConfig(format!("{}:{}: bad number '{}'", path.display(), lineno + 1, fields[0]))
        })?;
        let j: f64 = fields[1].parse().map_err(|_| {
            Error::InvalidConfig(format!("{}:{}: bad number '{}'", path.display(), lineno + 1, fields[1]))
        })?;
        points.push((omega, j));
    }
    Ok(points)
}

/// Builds a star model whose N modes sit on the uniform midpoint grid
/// ν_i = omega_lo + (i−½)·Δν, Δν = (omega_hi−omega_lo)/N, with couplings
/// g̃_i = √((2/π)·J(ν_i)·ν_i·Δν) reproducing the target density.
pub fn synthesize_star_from_density(
    target: &SpectralDensityTarget,
    n: usize,
) -> Result<StarModel> {
    if n < 2 {
        return Err(Error::InvalidModel("star synthesis needs N ≥ 2".into()));
    }
    let spacing = (target.omega_hi - target.omega_lo) / n as f64;
    let mut nu = Vec::with_capacity(n);
    let mut gtilde = Vec::with_capacity(n);
    for i in 0..n {
        let v = target.omega_lo + (i as f64 + 0.5) * spacing;
        let j = target.evaluate(v);
        if !j.is_finite() || j < 0.0 {
            return Err(Error::InvalidModel(format!(
                "target density is {j} at ω = {v}; synthesis needs finite nonnegative J"
            )));
        }
        nu.push(v);
        gtilde.push((2.0 / std::f64::consts::PI * j * v * spacing).sqrt());
    }
    StarModel::new(nu, gtilde)
}

/// The two finite-bath timescale estimates: a spacing (rephasing) bound
/// τ = 2π/Δν_min and a signal-reflection bound τ = 2N/v_max from the
/// largest discrete group velocity over q_n = πn/(N+1).
#[derive(Debug, Clone, Copy)]
pub struct RecurrenceEstimate {
    pub tau_spacing: f64,
    pub tau_signal: f64,
}

impl RecurrenceEstimate {
    /// The conservative horizon: simulations shorter than this see the finite
    /// bath as if it were continuous.
    pub fn safe_horizon(&self) -> f64 {
        self.tau_spacing.min(self.tau_signal)
    }
}

/// Estimates both recurrence timescales of a star environment.
pub fn recurrence_time_estimate(star: &StarModel) -> Result<RecurrenceEstimate> {
    let n = star.n_modes();
    if n < 3 {
        return Err(Error::InvalidModel("recurrence estimate needs at least 3 modes".into()));
    }
    let mut min_gap = f64::INFINITY;
    let mut v_max: f64 = 0.0;
    let dq = std::f64::consts::PI / (n + 1) as f64;
    // Spacings are compared within bands only: the jump across a band gap is
    // not a group velocity, and using it would collapse the signal estimate
    // for gapped chains.
    for &(a, b) in &band_segments(&star.nu, 3.0) {
        for i in a..b {
            let gap = star.nu[i + 1] - star.nu[i];
            if gap > 0.0 {
                min_gap = min_gap.min(gap);
            }
            v_max = v_max.max(gap / dq);
        }
    }
    let tau_spacing =
        if min_gap.is_finite() { 2.0 * std::f64::consts::PI / min_gap } else { f64::INFINITY };
    let tau_signal = if v_max > 0.0 { 2.0 * n as f64 / v_max } else { f64::INFINITY };
    Ok(RecurrenceEstimate { tau_spacing, tau_signal })
}

/// Splits a sorted frequency list into contiguous bands, cutting wherever an
/// adjacent spacing exceeds `factor` × the median spacing. Returns inclusive
/// index ranges.
pub fn band_segments(nu: &[f64], factor: f64) -> Vec<(usize, usize)> {
    if nu.len() < 2 {
        return vec![(0, nu.len().saturating_sub(1))];
    }
    let mut spacings: Vec<f64> = nu.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = spacings.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threshold = factor * median;
    let mut segments = Vec::new();
    let mut start = 0;
    for (i, gap) in spacings.drain(..).enumerate() {
        if gap > threshold {
            segments.push((start, i));
            start = i + 1;
        }
    }
    segments.push((start, nu.len() - 1));
    segments
}
