//! Scenario driver: declarative parameter sweeps over the exact dynamics,
//! with CSV/JSON output, plus the bath-surgery operations (resonance
//! filtering, equal-spacing rebinning) used by those sweeps.
//!
//! A scenario is described by a TOML file:
//!
//! ```toml
//! scenario = "nm_vs_omega_s"
//!
//! [model]
//! type = "dimer_chain"
//! n = 40
//! omega0 = 0.5
//! g = 0.2
//! h = 0.05
//! k = 0.05
//!
//! [[sweep.axis]]
//! param = "omega_s"
//! lo = 0.45
//! hi = 0.95
//! step = 0.02
//!
//! [nm]
//! measures = ["blp", "rhp"]
//! blp_grid = "default"
//! r_probe = 1.0
//!
//! [run]
//! temperature = 0.0
//! t_final = 400.0
//! dt = 0.1
//! ```
//!
//! Unknown keys anywhere in the file are errors. Axes may give either
//! `lo`/`hi`/`step` or an explicit `values` list. Runs are deterministic:
//! cells are computed in parallel but written in sweep order, so two runs of
//! the same config produce byte-identical tables. A cell that fails (for
//! example an unstable coupling) produces a NaN row and an entry in the
//! metadata, never a crash of the whole sweep.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{
    assemble_full_system, build_custom_chain, build_dimer_chain, diagonalize_environment,
    ChainSpec, FullModel, StarModel,
};
use crate::gaussian::{fidelity_cov, squeezed_vacuum, GaussianState};
use crate::nonmarkov::{blp_measure, rhp_measure, BlpGrid, Conclusiveness};
use crate::spectral::{
    band_segments, load_density_table, recurrence_time_estimate, spectral_density_transform,
    synthesize_star_from_density, SpectralDensityTarget, TargetKind,
};
use crate::trajectory::{reduced_propagators, time_grid};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Bath surgery
// ---------------------------------------------------------------------------

/// Keep only bath modes with |ν − ω_S| ≤ delta, preserving their couplings.
///
/// The mode-mixing matrix of the input is dropped: a subset of rows is no
/// longer orthogonal, and nothing downstream needs it. If the window is so
/// narrow that no mode survives, the nearest mode is kept with its coupling
/// zeroed, which is dynamically a free system.
pub fn filter_bath(star: &StarModel, omega_s: f64, delta: f64) -> StarModel {
    let mut nu = Vec::new();
    let mut gtilde = Vec::new();
    for (i, &v) in star.nu.iter().enumerate() {
        if (v - omega_s).abs() <= delta {
            nu.push(v);
            gtilde.push(star.gtilde[i]);
        }
    }
    if nu.is_empty() {
        let nearest = star
            .nu
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - omega_s).abs().total_cmp(&(b.1 - omega_s).abs()))
            .map(|(i, _)| i)
            .expect("star models have at least one mode");
        nu.push(star.nu[nearest]);
        gtilde.push(0.0);
    }
    StarModel::new(nu, gtilde).expect("a subset of a valid star is a valid star")
}

/// Time-averaged fidelity between the reduced system states produced by two
/// models from the same initial probe, ⟨F⟩ = (1/T)∫₀ᵀ F(ρ₁(t), ρ₂(t)) dt,
/// by the trapezoid rule on the uniform grid.
///
/// Baths start thermal at `temperature`; the probe must be single-mode and
/// both models must share the system frequency.
pub fn averaged_fidelity(
    full: &FullModel,
    other: &FullModel,
    temperature: f64,
    t_final: f64,
    dt: f64,
    probe: &GaussianState,
) -> Result<f64> {
    if probe.n_modes() != 1 {
        return Err(Error::InvalidState("probe must be single-mode".into()));
    }
    if (full.omega_s - other.omega_s).abs() > 1e-12 {
        return Err(Error::InvalidModel(
            "averaged fidelity compares models with the same system frequency".into(),
        ));
    }
    if dt <= 0.0 || t_final <= 0.0 {
        return Err(Error::InvalidConfig("t_final and dt must be positive".into()));
    }
    let times = time_grid(t_final, dt);
    let rp_a = reduced_propagators(full, temperature, &times);
    let rp_b = reduced_propagators(other, temperature, &times);
    let sigma0 = Matrix2::from_iterator(probe.cov.iter().cloned());
    let mut sum = 0.0;
    let n = times.len();
    for i in 0..n {
        let f = fidelity_cov(&rp_a[i].apply_system(&sigma0), &rp_b[i].apply_system(&sigma0));
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        sum += w * f;
    }
    let span = times[n - 1] - times[0];
    if span <= 0.0 {
        return Err(Error::InvalidConfig("averaging window is empty".into()));
    }
    Ok(sum * dt / span)
}

/// Rebin a chain's environment onto equally spaced mode frequencies, band by
/// band, choosing couplings that preserve the local spectral density. See
/// [`rebin_star_equal_spacing`], which does the work on the diagonal form.
pub fn constant_mode_density_variant(chain: &ChainSpec) -> Result<StarModel> {
    rebin_star_equal_spacing(&diagonalize_environment(chain)?)
}

/// Re-place a star's mode frequencies equally spaced across each band,
/// rescaling couplings so that the local spectral density is preserved.
///
/// Mode positions within each band become uniform between the original band
/// edges; the coupling at each new position is read off a linear
/// interpolation of the original local density, J(ν_i) = (π/2) g̃_i²/(ν_i Δν_i),
/// with spacings measured inside the band. Applied to a star that is already
/// equally spaced on one band (e.g. synthesized from a density), this is the
/// identity up to round-off.
pub fn rebin_star_equal_spacing(star: &StarModel) -> Result<StarModel> {
    let n = star.n_modes();
    if n < 3 {
        return Err(Error::InvalidModel(
            "equal-spacing rebinning needs at least three modes".into(),
        ));
    }
    let segments = band_segments(&star.nu, 3.0);
    let mut nu_new = Vec::with_capacity(n);
    let mut gtilde_new = Vec::with_capacity(n);
    for &(a, b) in &segments {
        let m = b - a + 1;
        if m == 1 || star.nu[b] - star.nu[a] <= 0.0 {
            return Err(Error::InvalidModel(
                "degenerate band: cannot rebin a band without a frequency extent".into(),
            ));
        }
        let nus = &star.nu[a..=b];
        // Local density at the original modes, spacings confined to the band.
        let j: Vec<f64> = (0..m)
            .map(|i| {
                let dnu = if i == 0 {
                    nus[1] - nus[0]
                } else if i == m - 1 {
                    nus[m - 1] - nus[m - 2]
                } else {
                    0.5 * (nus[i + 1] - nus[i - 1])
                };
                let g = star.gtilde[a + i];
                std::f64::consts::FRAC_PI_2 * g * g / (nus[i] * dnu)
            })
            .collect();
        let step = (nus[m - 1] - nus[0]) / (m - 1) as f64;
        for i in 0..m {
            let v = nus[0] + i as f64 * step;
            // Linear interpolation of J at v; v stays within [nus[0], nus[m-1]].
            let hi = nus.partition_point(|&x| x < v).clamp(1, m - 1);
            let (x0, x1) = (nus[hi - 1], nus[hi]);
            let t = if x1 > x0 { ((v - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { 0.0 };
            let jv = j[hi - 1] + t * (j[hi] - j[hi - 1]);
            nu_new.push(v);
            gtilde_new.push((2.0 / std::f64::consts::PI * jv.max(0.0) * v * step).sqrt());
        }
    }
    StarModel::new(nu_new, gtilde_new)
}

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SpectralDensityGallery,
    ResonanceFilterMap,
    ExcitationSweep,
    NmVsOmegaS,
    NmTemperatureMap,
    NmTemperatureCut,
    NmCouplingSweep,
    NmCutoffSweep,
    NmExponentSweep,
    SmParametrizationSweep,
}

impl Scenario {
    pub fn id(&self) -> &'static str {
        match self {
            Scenario::SpectralDensityGallery => "spectral_density_gallery",
            Scenario::ResonanceFilterMap => "resonance_filter_map",
            Scenario::ExcitationSweep => "excitation_sweep",
            Scenario::NmVsOmegaS => "nm_vs_omega_s",
            Scenario::NmTemperatureMap => "nm_temperature_map",
            Scenario::NmTemperatureCut => "nm_temperature_cut",
            Scenario::NmCouplingSweep => "nm_coupling_sweep",
            Scenario::NmCutoffSweep => "nm_cutoff_sweep",
            Scenario::NmExponentSweep => "nm_exponent_sweep",
            Scenario::SmParametrizationSweep => "sm_parametrization_sweep",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Scenario::SpectralDensityGallery => {
                "effective spectral density J(omega) of the configured bath"
            }
            Scenario::ResonanceFilterMap => {
                "time-averaged fidelity between full and resonance-filtered baths over (k, delta)"
            }
            Scenario::ExcitationSweep => {
                "system excitation retained at t_final over omega_s (optionally k)"
            }
            Scenario::NmVsOmegaS => "back-flow and divisibility measures vs system frequency",
            Scenario::NmTemperatureMap => "back-flow measure over (temperature, omega_s)",
            Scenario::NmTemperatureCut => "back-flow measure vs temperature at fixed omega_s",
            Scenario::NmCouplingSweep => "both measures vs system-bath coupling k",
            Scenario::NmCutoffSweep => "back-flow measure vs the cutoff of a semicircle density",
            Scenario::NmExponentSweep => "back-flow measure vs spectral exponent s",
            Scenario::SmParametrizationSweep => {
                "back-flow measure vs s for a pinned-normalization power density"
            }
        }
    }

    pub fn all() -> &'static [Scenario] {
        &[
            Scenario::SpectralDensityGallery,
            Scenario::ResonanceFilterMap,
            Scenario::ExcitationSweep,
            Scenario::NmVsOmegaS,
            Scenario::NmTemperatureMap,
            Scenario::NmTemperatureCut,
            Scenario::NmCouplingSweep,
            Scenario::NmCutoffSweep,
            Scenario::NmExponentSweep,
            Scenario::SmParametrizationSweep,
        ]
    }

    fn observable_columns(&self) -> &'static [&'static str] {
        match self {
            Scenario::SpectralDensityGallery => &["j"],
            Scenario::ResonanceFilterMap => &["avg_fidelity"],
            Scenario::ExcitationSweep => &["n_initial", "n_final"],
            Scenario::NmVsOmegaS => &["m_blp", "m_rhp", "j_at_omega_s"],
            Scenario::NmTemperatureMap | Scenario::NmTemperatureCut => &["m_blp", "log10_m_blp"],
            Scenario::NmCouplingSweep => &["m_blp", "m_rhp"],
            Scenario::NmCutoffSweep
            | Scenario::NmExponentSweep
            | Scenario::SmParametrizationSweep => &["m_blp"],
        }
    }

    /// (required axis params, optional axis params)
    fn axis_rules(&self) -> (&'static [SweepParam], &'static [SweepParam]) {
        use SweepParam::*;
        match self {
            Scenario::SpectralDensityGallery => (&[Omega], &[]),
            Scenario::ResonanceFilterMap => (&[K, Delta], &[]),
            Scenario::ExcitationSweep => (&[OmegaS], &[K]),
            Scenario::NmVsOmegaS => (&[OmegaS], &[]),
            Scenario::NmTemperatureMap => (&[Temperature, OmegaS], &[]),
            Scenario::NmTemperatureCut => (&[Temperature], &[OmegaS]),
            Scenario::NmCouplingSweep => (&[K], &[]),
            Scenario::NmCutoffSweep => (&[OmegaR], &[]),
            Scenario::NmExponentSweep => (&[S], &[Temperature]),
            Scenario::SmParametrizationSweep => (&[S], &[OmegaS]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Evaluation frequency of a spectral-density curve.
    Omega,
    OmegaS,
    K,
    /// Half-width of the resonance filter window.
    Delta,
    Temperature,
    /// Spectral exponent of a power-law density target.
    S,
    /// Cutoff frequency of a density target.
    OmegaR,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepParam::Omega => "omega",
            SweepParam::OmegaS => "omega_s",
            SweepParam::K => "k",
            SweepParam::Delta => "delta",
            SweepParam::Temperature => "temperature",
            SweepParam::S => "s",
            SweepParam::OmegaR => "omega_r",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: SweepParam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl AxisConfig {
    pub fn expand(&self) -> Result<Vec<f64>> {
        match (&self.values, self.lo, self.hi, self.step) {
            (Some(v), None, None, None) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "axis {}: values must be a non-empty list of finite numbers",
                        self.param
                    )));
                }
                Ok(v.clone())
            }
            (None, Some(lo), Some(hi), Some(step)) => {
                if !(step > 0.0) || hi < lo {
                    return Err(Error::InvalidConfig(format!(
                        "axis {}: need step > 0 and hi >= lo",
                        self.param
                    )));
                }
                let n = ((hi - lo) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| lo + i as f64 * step).collect())
            }
            _ => Err(Error::InvalidConfig(format!(
                "axis {}: give either values = [...] or all of lo/hi/step",
                self.param
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Vec<AxisConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    DimerChain,
    CustomChain,
    StarTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKindName {
    PivotPower,
    OffsetPower,
    NormalizedPower,
    OhmicSemicircle,
    Tabulated,
}

/// The `[model]` table. Which fields apply depends on `type`; supplying a
/// field the chosen type does not use is rejected at validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub model_type: ModelType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TargetKindName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Blp,
    Rhp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridName {
    Default,
    Dense,
    Thorough,
    ThoroughReduced,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmConfig {
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    #[serde(default = "default_grid_name")]
    pub blp_grid: GridName,
    #[serde(default = "default_r_probe")]
    pub r_probe: f64,
}

fn default_measures() -> Vec<Measure> {
    vec![Measure::Blp]
}
fn default_grid_name() -> GridName {
    GridName::Default
}
fn default_r_probe() -> f64 {
    1.0
}

impl Default for NmConfig {
    fn default() -> Self {
        NmConfig {
            measures: default_measures(),
            blp_grid: default_grid_name(),
            r_probe: default_r_probe(),
        }
    }
}

impl NmConfig {
    pub fn grid(&self) -> BlpGrid {
        match self.blp_grid {
            GridName::Default => BlpGrid::default_grid(),
            GridName::Dense => BlpGrid::dense(),
            GridName::Thorough => BlpGrid::thorough(),
            GridName::ThoroughReduced => BlpGrid::thorough_reduced(),
        }
    }

    fn wants(&self, m: Measure) -> bool {
        self.measures.contains(&m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Window length for spectral-density transforms; defaults to 80% of the
    /// safe recurrence horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for the sweep; 0 or absent means one per CPU.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Squeezing of the single-mode probe used by the filtering and
    /// excitation scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_theta: Option<f64>,
}

impl RunConfig {
    fn temperature(&self) -> f64 {
        self.temperature.unwrap_or(0.0)
    }
    fn dt(&self) -> f64 {
        self.dt.unwrap_or(0.1)
    }
    fn t_final(&self) -> Result<f64> {
        self.t_final
            .ok_or_else(|| Error::InvalidConfig("run.t_final is required for this scenario".into()))
    }
    fn probe(&self) -> GaussianState {
        squeezed_vacuum(self.probe_r.unwrap_or(1.0), self.probe_theta.unwrap_or(0.0))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub model: ModelConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub nm: NmConfig,
    pub run: RunConfig,
    /// Directory of the config file, for resolving relative table paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::TomlParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_axes()?;
        self.validate_model()?;
        if self.nm.r_probe <= 0.0 {
            return Err(Error::InvalidConfig("nm.r_probe must be positive".into()));
        }
        if self.nm.measures.is_empty() {
            return Err(Error::InvalidConfig("nm.measures must not be empty".into()));
        }
        if !(self.run.dt() > 0.0) {
            return Err(Error::InvalidConfig("run.dt must be positive".into()));
        }
        if self.scenario != Scenario::SpectralDensityGallery {
            let t = self.run.t_final()?;
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("run.t_final must be positive".into()));
            }
        }
        if self.run.temperature() < 0.0 {
            return Err(Error::InvalidConfig("run.temperature must be >= 0".into()));
        }
        Ok(())
    }

    fn validate_axes(&self) -> Result<()> {
        let axes = &self.sweep.axis;
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidConfig("sweeps take one or two axes".into()));
        }
        for a in axes {
            a.expand()?;
        }
        let (required, optional) = self.scenario.axis_rules();
        for req in required {
            if !axes.iter().any(|a| a.param == *req) {
                return Err(Error::InvalidConfig(format!(
                    "scenario {} requires an axis over {}",
                    self.scenario.id(),
                    req
                )));
            }
        }
        for a in axes {
            if !required.contains(&a.param) && !optional.contains(&a.param) {
                return Err(Error::InvalidConfig(format!(
                    "scenario {} does not accept an axis over {}",
                    self.scenario.id(),
                    a.param
                )));
            }
        }
        if axes.len() == 2 && axes[0].param == axes[1].param {
            return Err(Error::InvalidConfig("sweep axes must differ".into()));
        }
        Ok(())
    }

    fn validate_model(&self) -> Result<()> {
        let m = &self.model;
        let forbid = |present: bool, field: &str, ty: &str| -> Result<()> {
            if present {
                Err(Error::InvalidConfig(format!("model field {field} does not apply to {ty}")))
            } else {
                Ok(())
            }
        };
        let need = |absent: bool, field: &str| -> Result<()> {
            if absent {
                Err(Error::InvalidConfig(format!("model field {field} is required")))
            } else {
                Ok(())
            }
        };
        let swept = |p: SweepParam| self.sweep.axis.iter().any(|a| a.param == p);
        match m.model_type {
            ModelType::DimerChain => {
                need(m.n.is_none(), "n")?;
                need(m.omega0.is_none(), "omega0")?;
                need(m.g.is_none(), "g")?;
                need(m.h.is_none(), "h")?;
                need(m.k.is_none() && !swept(SweepParam::K), "k")?;
                for (p, f) in [
                    (m.couplings.is_some(), "couplings"),
                    (m.kind.is_some(), "kind"),
                    (m.s.is_some(), "s"),
                    (m.support.is_some(), "support"),
                    (m.pivot.is_some(), "pivot"),
                    (m.omega_r.is_some(), "omega_r"),
                    (m.table.is_some(), "table"),
                ] {
                    forbid(p, f, "dimer_chain")?;
                }
            }
            ModelType::CustomChain => {
                need(m.omega0.is_none(), "omega0")?;
                need(m.couplings.is_none(), "couplings")?;
                need(m.k.is_none() && !swept(SweepParam::K), "k")?;
                for (p, f) in [
                    (m.n.is_some(), "n"),
                    (m.g.is_some(), "g"),
                    (m.h.is_some(), "h"),
                    (m.kind.is_some(), "kind"),
                    (m.s.is_some(), "s"),
                    (m.support.is_some(), "support"),
                    (m.pivot.is_some(), "pivot"),
                    (m.omega_r.is_some(), "omega_r"),
                    (m.table.is_some(), "table"),
                ] {
                    forbid(p, f, "custom_chain")?;
                }
            }
            ModelType::StarTarget => {
                need(m.n.is_none(), "n")?;
                need(m.kind.is_none(), "kind")?;
                need(m.k.is_none() && !swept(SweepParam::K), "k")?;
                for (p, f) in
                    [(m.g.is_some(), "g"), (m.h.is_some(), "h"), (m.couplings.is_some(), "couplings")]
                {
                    forbid(p, f, "star_target")?;
                }
                let kind = m.kind.unwrap();
                let has_s = m.s.is_some() || swept(SweepParam::S);
                let has_omega_r = m.omega_r.is_some() || swept(SweepParam::OmegaR);
                match kind {
                    TargetKindName::PivotPower => {
                        need(!has_s, "s")?;
                        need(m.pivot.is_none(), "pivot")?;
                        need(m.support.is_none(), "support")?;
                    }
                    TargetKindName::OffsetPower => {
                        need(!has_s, "s")?;
                        need(m.omega0.is_none(), "omega0")?;
                        need(m.support.is_none(), "support")?;
                    }
                    TargetKindName::NormalizedPower => {
                        need(!has_s, "s")?;
                        need(m.omega0.is_none(), "omega0")?;
                        need(!has_omega_r, "omega_r")?;
                        need(m.support.is_none(), "support")?;
                    }
                    TargetKindName::OhmicSemicircle => {
                        need(!has_omega_r, "omega_r")?;
                        forbid(m.s.is_some(), "s", "ohmic_semicircle")?;
                        forbid(m.pivot.is_some(), "pivot", "ohmic_semicircle")?;
                        forbid(m.omega0.is_some(), "omega0", "ohmic_semicircle")?;
                    }
                    TargetKindName::Tabulated => {
                        need(m.table.is_none(), "table")?;
                        forbid(m.s.is_some(), "s", "tabulated")?;
                        forbid(m.pivot.is_some(), "pivot", "tabulated")?;
                        forbid(m.omega0.is_some(), "omega0", "tabulated")?;
                        forbid(m.omega_r.is_some(), "omega_r", "tabulated")?;
                    }
                }
            }
        }
        // Scenario/model compatibility.
        match self.scenario {
            Scenario::NmCutoffSweep => {
                if m.model_type != ModelType::StarTarget
                    || m.kind != Some(TargetKindName::OhmicSemicircle)
                {
                    return Err(Error::InvalidConfig(
                        "nm_cutoff_sweep requires a star_target model with kind = \
                         \"ohmic_semicircle\""
                            .into(),
                    ));
                }
            }
            Scenario::NmExponentSweep => {
                if m.model_type != ModelType::StarTarget
                    || !matches!(
                        m.kind,
                        Some(
                            TargetKindName::PivotPower
                                | TargetKindName::OffsetPower
                                | TargetKindName::NormalizedPower
                        )
                    )
                {
                    return Err(Error::InvalidConfig(
                        "nm_exponent_sweep requires a star_target model with a power-law kind"
                            .into(),
                    ));
                }
            }
            Scenario::SmParametrizationSweep => {
                if m.model_type != ModelType::StarTarget
                    || m.kind != Some(TargetKindName::NormalizedPower)
                {
                    return Err(Error::InvalidConfig(
                        "sm_parametrization_sweep requires a star_target model with kind = \
                         \"normalized_power\""
                            .into(),
                    ));
                }
            }
            _ => {}
        }
        // Everything except the bare density curve needs a system frequency.
        if self.scenario != Scenario::SpectralDensityGallery
            && m.omega_s.is_none()
            && !swept(SweepParam::OmegaS)
        {
            return Err(Error::InvalidConfig(
                "model.omega_s is required (or sweep over omega_s)".into(),
            ));
        }
        Ok(())
    }

    fn prepare_model(&self) -> Result<PreparedModel> {
        let m = &self.model;
        Ok(match m.model_type {
            ModelType::DimerChain => PreparedModel::Dimer {
                n: m.n.unwrap(),
                omega0: m.omega0.unwrap(),
                g: m.g.unwrap(),
                h: m.h.unwrap(),
                k: m.k,
            },
            ModelType::CustomChain => PreparedModel::Custom {
                omega0: m.omega0.unwrap(),
                couplings: m.couplings.clone().unwrap(),
                k: m.k,
            },
            ModelType::StarTarget => {
                let points = match m.table.as_ref() {
                    Some(rel) => {
                        let path = match (&self.base_dir, rel.is_relative()) {
                            (Some(dir), true) => dir.join(rel),
                            _ => rel.clone(),
                        };
                        Some(load_density_table(&path)?)
                    }
                    None => None,
                };
                PreparedModel::Star {
                    n: m.n.unwrap(),
                    kind: m.kind.unwrap(),
                    k: m.k,
                    s: m.s,
                    pivot: m.pivot,
                    omega0: m.omega0,
                    omega_r: m.omega_r,
                    support: m.support,
                    points,
                }
            }
        })
    }
}

/// Model description after validation and table loading, ready to build a
/// star per sweep cell.
enum PreparedModel {
    Dimer { n: usize, omega0: f64, g: f64, h: f64, k: Option<f64> },
    Custom { omega0: f64, couplings: Vec<f64>, k: Option<f64> },
    Star {
        n: usize,
        kind: TargetKindName,
        k: Option<f64>,
        s: Option<f64>,
        pivot: Option<f64>,
        omega0: Option<f64>,
        omega_r: Option<f64>,
        support: Option<[f64; 2]>,
        points: Option<Vec<(f64, f64)>>,
    },
}

/// Per-cell parameter overrides coming from the sweep coordinates.
#[derive(Clone, Copy)]
struct CellCoords<'a>(&'a [(SweepParam, f64)]);

impl CellCoords<'_> {
    fn get(&self, p: SweepParam) -> Option<f64> {
        self.0.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

impl PreparedModel {
    fn star(&self, ov: CellCoords) -> Result<StarModel> {
        match self {
            PreparedModel::Dimer { n, omega0, g, h, k } => {
                let k = ov.get(SweepParam::K).or(*k).expect("validated");
                let chain = build_dimer_chain(*n, *omega0, *g, *h, k)?;
                diagonalize_environment(&chain)
            }
            PreparedModel::Custom { omega0, couplings, k } => {
                let k = ov.get(SweepParam::K).or(*k).expect("validated");
                let chain = build_custom_chain(*omega0, couplings, k)?;
                diagonalize_environment(&chain)
            }
            PreparedModel::Star { n, kind, k, s, pivot, omega0, omega_r, support, points } => {
                let k = ov.get(SweepParam::K).or(*k).expect("validated");
                let s = ov.get(SweepParam::S).or(*s);
                let omega_r = ov.get(SweepParam::OmegaR).or(*omega_r);
                let (kind, lo, hi) = match kind {
                    TargetKindName::PivotPower => {
                        let sup = support.expect("validated");
                        (
                            TargetKind::PivotPower {
                                s: s.expect("validated"),
                                pivot: pivot.expect("validated"),
                            },
                            sup[0],
                            sup[1],
                        )
                    }
                    TargetKindName::OffsetPower => {
                        let sup = support.expect("validated");
                        (
                            TargetKind::OffsetPower {
                                s: s.expect("validated"),
                                omega0: omega0.expect("validated"),
                            },
                            sup[0],
                            sup[1],
                        )
                    }
                    TargetKindName::NormalizedPower => {
                        let sup = support.expect("validated");
                        (
                            TargetKind::NormalizedPower {
                                s: s.expect("validated"),
                                omega0: omega0.expect("validated"),
                                omega_r: omega_r.expect("validated"),
                            },
                            sup[0],
                            sup[1],
                        )
                    }
                    TargetKindName::OhmicSemicircle => {
                        let wr = omega_r.expect("validated");
                        let lo = support.map(|s| s[0]).unwrap_or(0.0);
                        let hi = support.map(|s| s[1].min(wr)).unwrap_or(wr);
                        (TargetKind::OhmicSemicircle { omega_r: wr }, lo, hi)
                    }
                    TargetKindName::Tabulated => {
                        let pts = points.clone().expect("validated");
                        let lo = support.map(|s| s[0]).unwrap_or_else(|| pts[0].0);
                        let hi = support.map(|s| s[1]).unwrap_or_else(|| pts[pts.len() - 1].0);
                        (TargetKind::Tabulated { points: pts }, lo, hi)
                    }
                };
                let target = SpectralDensityTarget::new(kind, k, lo, hi)?;
                synthesize_star_from_density(&target, *n)
            }
        }
    }

    fn full(&self, ov: CellCoords, cfg: &ScenarioConfig) -> Result<FullModel> {
        let omega_s = ov
            .get(SweepParam::OmegaS)
            .or(cfg.model.omega_s)
            .ok_or_else(|| Error::InvalidConfig("omega_s unresolved".into()))?;
        assemble_full_system(self.star(ov)?, omega_s)
    }
}

// ---------------------------------------------------------------------------
// Running scenarios
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceMeta {
    pub tau_spacing: f64,
    pub tau_signal: f64,
    pub safe_horizon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedCell {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisMeta {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioMeta {
    pub scenario: String,
    pub code_version: String,
    pub config: serde_json::Value,
    pub axes: Vec<AxisMeta>,
    /// Mode-spacing and signal-travel recurrence estimates at the first
    /// sweep cell; absent for baths of fewer than three modes.
    pub recurrence: Option<RecurrenceMeta>,
    pub temperature: f64,
    pub t_final: Option<f64>,
    pub dt: f64,
    pub failed_cells: Vec<FailedCell>,
    /// Rows where the divisibility witness came out exactly zero, which does
    /// not certify Markovianity.
    pub rhp_inconclusive_rows: Vec<usize>,
    pub elapsed_seconds: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: ScenarioMeta,
}

fn cartesian(axes: &[Vec<f64>], params: &[SweepParam]) -> Vec<Vec<(SweepParam, f64)>> {
    match axes.len() {
        1 => axes[0].iter().map(|&v| vec![(params[0], v)]).collect(),
        2 => {
            let mut out = Vec::with_capacity(axes[0].len() * axes[1].len());
            for &a in &axes[0] {
                for &b in &axes[1] {
                    out.push(vec![(params[0], a), (params[1], b)]);
                }
            }
            out
        }
        _ => unreachable!("axis count validated"),
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn excitation_of(sigma: &Matrix2<f64>) -> f64 {
    0.5 * (sigma[(0, 0)] + sigma[(1, 1)]) - 0.5
}

/// One sweep cell's observable values, in the scenario's column order, plus
/// the divisibility verdict when that measure ran.
fn compute_cell(
    cfg: &ScenarioConfig,
    model: &PreparedModel,
    coords: CellCoords,
) -> Result<(Vec<f64>, Option<Conclusiveness>)> {
    let temperature = coords.get(SweepParam::Temperature).unwrap_or_else(|| cfg.run.temperature());
    let dt = cfg.run.dt();
    match cfg.scenario {
        Scenario::SpectralDensityGallery => {
            let star = model.star(coords)?;
            let omega = coords.get(SweepParam::Omega).expect("validated");
            let window = resolve_window(cfg, &star)?;
            let j = spectral_density_transform(&star, omega, window);
            Ok((vec![j], None))
        }
        Scenario::ResonanceFilterMap => {
            let t_final = cfg.run.t_final()?;
            let star = model.star(coords)?;
            let omega_s = cfg.model.omega_s.expect("validated");
            let delta = coords.get(SweepParam::Delta).expect("validated");
            let filtered = filter_bath(&star, omega_s, delta);
            let full = assemble_full_system(star, omega_s)?;
            let trimmed = assemble_full_system(filtered, omega_s)?;
            let avg =
                averaged_fidelity(&full, &trimmed, temperature, t_final, dt, &cfg.run.probe())?;
            Ok((vec![avg], None))
        }
        Scenario::ExcitationSweep => {
            let t_final = cfg.run.t_final()?;
            let full = model.full(coords, cfg)?;
            let probe = cfg.run.probe();
            let sigma0 = Matrix2::from_iterator(probe.cov.iter().cloned());
            let rp = reduced_propagators(&full, temperature, &[t_final]);
            let sigma_t = rp[0].apply_system(&sigma0);
            Ok((vec![excitation_of(&sigma0), excitation_of(&sigma_t)], None))
        }
        Scenario::NmVsOmegaS => {
            let t_final = cfg.run.t_final()?;
            let full = model.full(coords, cfg)?;
            let blp = blp_measure(&full, &cfg.nm.grid(), temperature, t_final, dt)?;
            let (rhp, verdict) = if cfg.nm.wants(Measure::Rhp) {
                let r = rhp_measure(&full, cfg.nm.r_probe, temperature, t_final, dt)?;
                (r.value, r.meta.conclusiveness)
            } else {
                (f64::NAN, Some(Conclusiveness::NotComputed))
            };
            let j = match resolve_window(cfg, &full.star) {
                Ok(window) => spectral_density_transform(&full.star, full.omega_s, window),
                Err(_) => f64::NAN,
            };
            Ok((vec![blp.value, rhp, j], verdict))
        }
        Scenario::NmTemperatureMap | Scenario::NmTemperatureCut => {
            let t_final = cfg.run.t_final()?;
            let full = model.full(coords, cfg)?;
            let blp = blp_measure(&full, &cfg.nm.grid(), temperature, t_final, dt)?;
            let log10 = if blp.value > 0.0 { blp.value.log10() } else { f64::NAN };
            Ok((vec![blp.value, log10], None))
        }
        Scenario::NmCouplingSweep => {
            let t_final = cfg.run.t_final()?;
            let full = model.full(coords, cfg)?;
            let blp = blp_measure(&full, &cfg.nm.grid(), temperature, t_final, dt)?;
            let (rhp, verdict) = if cfg.nm.wants(Measure::Rhp) {
                let r = rhp_measure(&full, cfg.nm.r_probe, temperature, t_final, dt)?;
                (r.value, r.meta.conclusiveness)
            } else {
                (f64::NAN, Some(Conclusiveness::NotComputed))
            };
            Ok((vec![blp.value, rhp], verdict))
        }
        Scenario::NmCutoffSweep
        | Scenario::NmExponentSweep
        | Scenario::SmParametrizationSweep => {
            let t_final = cfg.run.t_final()?;
            let full = model.full(coords, cfg)?;
            let blp = blp_measure(&full, &cfg.nm.grid(), temperature, t_final, dt)?;
            Ok((vec![blp.value], None))
        }
    }
}

fn resolve_window(cfg: &ScenarioConfig, star: &StarModel) -> Result<f64> {
    if let Some(w) = cfg.run.t_window {
        if !(w > 0.0) {
            return Err(Error::InvalidConfig("run.t_window must be positive".into()));
        }
        return Ok(w);
    }
    let est = recurrence_time_estimate(star)?;
    Ok(0.8 * est.safe_horizon())
}

/// Run every cell of the sweep. Cell failures become NaN rows plus
/// `failed_cells` entries; only configuration-level problems abort.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let started = Instant::now();
    let model = cfg.prepare_model()?;
    let params: Vec<SweepParam> = cfg.sweep.axis.iter().map(|a| a.param).collect();
    let axes: Vec<Vec<f64>> =
        cfg.sweep.axis.iter().map(|a| a.expand()).collect::<Result<_>>()?;
    let cells = cartesian(&axes, &params);

    let outputs: Vec<Result<(Vec<f64>, Option<Conclusiveness>)>> =
        with_pool(cfg.run.workers.unwrap_or(0), || {
            cells
                .par_iter()
                .map(|c| compute_cell(cfg, &model, CellCoords(c)))
                .collect()
        })?;

    let obs_cols = cfg.scenario.observable_columns();
    let mut columns: Vec<String> = params.iter().map(|p| p.to_string()).collect();
    columns.extend(obs_cols.iter().map(|s| s.to_string()));

    let mut rows = Vec::with_capacity(cells.len());
    let mut failed_cells = Vec::new();
    let mut rhp_inconclusive_rows = Vec::new();
    for (i, (coords, out)) in cells.iter().zip(outputs).enumerate() {
        let mut row: Vec<f64> = coords.iter().map(|(_, v)| *v).collect();
        match out {
            Ok((vals, verdict)) => {
                debug_assert_eq!(vals.len(), obs_cols.len());
                row.extend(vals);
                if verdict == Some(Conclusiveness::ZeroInconclusive) {
                    rhp_inconclusive_rows.push(i);
                }
            }
            Err(e) => {
                row.extend(std::iter::repeat(f64::NAN).take(obs_cols.len()));
                failed_cells.push(FailedCell { row: i, message: e.to_string() });
            }
        }
        rows.push(row);
    }

    let recurrence = cells
        .first()
        .and_then(|c| model.star(CellCoords(c)).ok())
        .and_then(|star| recurrence_time_estimate(&star).ok())
        .map(|est| RecurrenceMeta {
            tau_spacing: est.tau_spacing,
            tau_signal: est.tau_signal,
            safe_horizon: est.safe_horizon(),
        });

    let mut notes = vec![
        "back-flow and divisibility measures use natural-log negativity and are \
         grid-dependent; compare contrasts, not raw magnitudes"
            .to_string(),
        "NaN rows correspond to failed_cells entries".to_string(),
    ];
    if cfg.scenario.observable_columns().contains(&"log10_m_blp") {
        notes.push("log10_m_blp is NaN where m_blp = 0".to_string());
    }

    let meta = ScenarioMeta {
        scenario: cfg.scenario.id().to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(cfg)?,
        axes: params
            .iter()
            .zip(&axes)
            .map(|(p, v)| AxisMeta { param: p.to_string(), values: v.clone() })
            .collect(),
        recurrence,
        temperature: cfg.run.temperature(),
        t_final: cfg.run.t_final,
        dt: cfg.run.dt(),
        failed_cells,
        rhp_inconclusive_rows,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        notes,
    };

    Ok(ScenarioResult { columns, rows, meta })
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct WrittenOutputs {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub plot: Option<PathBuf>,
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Write `<scenario>.csv`, `<scenario>.meta.json`, and optionally
/// `<scenario>.plot.py` under `out_dir`.
pub fn write_outputs(
    result: &ScenarioResult,
    out_dir: &Path,
    emit_plots: bool,
) -> Result<WrittenOutputs> {
    std::fs::create_dir_all(out_dir)?;
    let base = &result.meta.scenario;

    let csv_path = out_dir.join(format!("{base}.csv"));
    let mut wtr = csv::Writer::from_path(&csv_path)?;
    wtr.write_record(&result.columns)?;
    for row in &result.rows {
        wtr.write_record(row.iter().map(|v| format_cell(*v)))?;
    }
    wtr.flush()?;

    let meta_path = out_dir.join(format!("{base}.meta.json"));
    let file = std::fs::File::create(&meta_path)?;
    serde_json::to_writer_pretty(file, &result.meta)?;

    let plot = if emit_plots {
        let plot_path = out_dir.join(format!("{base}.plot.py"));
        std::fs::write(&plot_path, plot_script(result))?;
        Some(plot_path)
    } else {
        None
    };

    Ok(WrittenOutputs { csv: csv_path, meta: meta_path, plot })
}

fn plot_script(result: &ScenarioResult) -> String {
    let base = &result.meta.scenario;
    let n_axes = result.meta.axes.len();
    let coord_cols: Vec<&str> =
        result.meta.axes.iter().map(|a| a.param.as_str()).collect();
    let obs_cols: Vec<&String> = result.columns.iter().skip(n_axes).collect();
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str(&format!("\"\"\"Quick-look plot for {base}.csv (auto-generated).\"\"\"\n"));
    s.push_str("import os\nimport numpy as np\nimport matplotlib\nmatplotlib.use(\"Agg\")\n");
    s.push_str("import matplotlib.pyplot as plt\n\n");
    s.push_str("here = os.path.dirname(os.path.abspath(__file__))\n");
    s.push_str(&format!(
        "data = np.genfromtxt(os.path.join(here, \"{base}.csv\"), delimiter=\",\", names=True)\n\n"
    ));
    if n_axes == 1 {
        let x = coord_cols[0];
        s.push_str(&format!(
            "fig, axes = plt.subplots({}, 1, figsize=(7, {}), sharex=True, squeeze=False)\n",
            obs_cols.len(),
            3 * obs_cols.len()
        ));
        for (i, col) in obs_cols.iter().enumerate() {
            s.push_str(&format!("ax = axes[{i}][0]\n"));
            s.push_str(&format!("ax.plot(data[\"{x}\"], data[\"{col}\"], marker=\".\", lw=1)\n"));
            s.push_str(&format!("ax.set_ylabel(\"{col}\")\nax.grid(alpha=0.3)\n"));
        }
        s.push_str(&format!("axes[-1][0].set_xlabel(\"{x}\")\n"));
    } else {
        let (x, y) = (coord_cols[1], coord_cols[0]);
        let col = obs_cols.last().map(|c| c.as_str()).unwrap_or("value");
        s.push_str(&format!("xs = np.unique(data[\"{x}\"])\n"));
        s.push_str(&format!("ys = np.unique(data[\"{y}\"])\n"));
        s.push_str(&format!(
            "grid = data[\"{col}\"].reshape(len(ys), len(xs))\n"
        ));
        s.push_str("fig, ax = plt.subplots(figsize=(7, 5))\n");
        s.push_str("pc = ax.pcolormesh(xs, ys, grid, shading=\"nearest\")\n");
        s.push_str(&format!("fig.colorbar(pc, ax=ax, label=\"{col}\")\n"));
        s.push_str(&format!("ax.set_xlabel(\"{x}\")\nax.set_ylabel(\"{y}\")\n"));
    }
    s.push_str(&format!(
        "fig.suptitle(\"{base}\")\nfig.tight_layout()\n\
         fig.savefig(os.path.join(here, \"{base}.png\"), dpi=150)\n\
         print(\"wrote\", os.path.join(here, \"{base}.png\"))\n"
    ));
    s
}

// ---------------------------------------------------------------------------
// Cost estimation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub scenario: String,
    pub cells: usize,
    pub time_steps: usize,
    pub blp_pairs_per_cell: usize,
    pub bath_modes: usize,
    pub recurrence: Option<RecurrenceMeta>,
    pub t_final: Option<f64>,
    pub warnings: Vec<String>,
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario:        {}", self.scenario)?;
        writeln!(f, "sweep cells:     {}", self.cells)?;
        writeln!(f, "time steps:      {}", self.time_steps)?;
        writeln!(f, "probe pairs:     {}", self.blp_pairs_per_cell)?;
        writeln!(f, "bath modes:      {}", self.bath_modes)?;
        if let Some(r) = &self.recurrence {
            writeln!(
                f,
                "recurrence:      tau_spacing = {:.1}, tau_signal = {:.1}, safe horizon = {:.1}",
                r.tau_spacing, r.tau_signal, r.safe_horizon
            )?;
        }
        if let Some(t) = self.t_final {
            writeln!(f, "t_final:         {t}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning:         {w}")?;
        }
        Ok(())
    }
}

/// Size up a configured sweep without running it.
pub fn estimate(cfg: &ScenarioConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let model = cfg.prepare_model()?;
    let axes: Vec<Vec<f64>> =
        cfg.sweep.axis.iter().map(|a| a.expand()).collect::<Result<_>>()?;
    let params: Vec<SweepParam> = cfg.sweep.axis.iter().map(|a| a.param).collect();
    let cells = cartesian(&axes, &params);
    let star = model.star(CellCoords(&cells[0]))?;
    let recurrence = recurrence_time_estimate(&star).ok().map(|est| RecurrenceMeta {
        tau_spacing: est.tau_spacing,
        tau_signal: est.tau_signal,
        safe_horizon: est.safe_horizon(),
    });
    let time_steps = match cfg.run.t_final {
        Some(t) => time_grid(t, cfg.run.dt()).len(),
        None => 0,
    };
    let uses_blp = !matches!(
        cfg.scenario,
        Scenario::SpectralDensityGallery | Scenario::ResonanceFilterMap | Scenario::ExcitationSweep
    );
    let mut warnings = Vec::new();
    if let (Some(r), Some(t)) = (&recurrence, cfg.run.t_final) {
        if t > r.safe_horizon {
            warnings.push(format!(
                "t_final = {t} exceeds the safe recurrence horizon {:.1}; finite-bath \
                 revivals will contaminate the results",
                r.safe_horizon
            ));
        }
    }
    let f_max = star.nu.last().copied().unwrap_or(0.0).max(cfg.model.omega_s.unwrap_or(0.0));
    if cfg.run.t_final.is_some() && f_max * cfg.run.dt() > 0.5 {
        warnings.push(format!(
            "dt = {} advances the fastest mode by more than 0.5 rad per sample; \
             decrease intervals may be missed",
            cfg.run.dt()
        ));
    }
    Ok(EstimateReport {
        scenario: cfg.scenario.id().to_string(),
        cells: cells.len(),
        time_steps,
        blp_pairs_per_cell: if uses_blp { cfg.nm.grid().pairs().len() } else { 0 },
        bath_modes: star.n_modes(),
        recurrence,
        t_final: cfg.run.t_final,
        warnings,
    })
}
