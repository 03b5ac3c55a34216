//! Experiment configuration.
//!
//! Files are TOML restricted to `[section]` headers and `key = value` lines
//! (see `docs/config.md`). Parsing yields the raw config; [`ExperimentConfig::resolve`]
//! expands every default so the echoed file in an output tree is complete.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::BandwidthPolicy;
use crate::grid::{Grid1D, Grid2D};
use crate::infoflow::ReferenceMode;
use crate::models::ks::{BumpSpec, KsConfig};
use crate::models::sw::{BlobSpec, JetSpec, SwConfig};

/// Climatological KS variance measured from a 10^5-step run after 10^4 steps
/// of spin-up (dx = 2 pi sqrt 2 / 50, dt = 0.05, n = 1024).
pub const KS_CLIMATE_VARIANCE: f64 = 1.718;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    KsDemo,
    SwChannel,
    SwBlob,
    OracleSuite,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::KsDemo => "ks_demo",
            Experiment::SwChannel => "sw_channel",
            Experiment::SwBlob => "sw_blob",
            Experiment::OracleSuite => "oracle_suite",
        }
    }

    fn is_sw(self) -> bool {
        matches!(self, Experiment::SwChannel | Experiment::SwBlob)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub members: Option<usize>,
    /// Solver steps after the ensemble is formed.
    pub steps: Option<usize>,
    /// Steps between diagnostic dumps.
    pub cadence: Option<usize>,
    pub out: Option<PathBuf>,
    pub ks: Option<KsSection>,
    pub sw: Option<SwSection>,
    pub jet: Option<JetSection>,
    pub blob: Option<BlobSection>,
    pub bandwidth: Option<BandwidthSection>,
    pub reference: Option<ReferenceSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KsSection {
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub dealias: bool,
    pub bump_center: usize,
    pub bump_half_width: usize,
    pub bump_period: f64,
    pub amp_mean: f64,
    pub amp_variance: f64,
}

impl Default for KsSection {
    fn default() -> Self {
        let c = KsConfig::default();
        let b = BumpSpec::default();
        Self {
            n: c.grid.n,
            dx: c.grid.dx,
            dt: c.dt,
            dealias: c.dealias,
            bump_center: b.center,
            bump_half_width: b.half_width,
            bump_period: b.period,
            amp_mean: b.amp_mean,
            amp_variance: b.amp_variance,
        }
    }
}

impl KsSection {
    pub fn model(&self) -> KsConfig {
        KsConfig {
            grid: Grid1D {
                n: self.n,
                dx: self.dx,
            },
            dt: self.dt,
            dealias: self.dealias,
        }
    }

    pub fn bump(&self) -> BumpSpec {
        BumpSpec {
            center: self.bump_center,
            half_width: self.bump_half_width,
            period: self.bump_period,
            amp_mean: self.amp_mean,
            amp_variance: self.amp_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwSection {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub f0: f64,
    pub beta: f64,
    pub g: f64,
    pub h_mean: f64,
    /// Steps between consecutive long-run states drawn as sw_channel members.
    pub member_spacing: usize,
    /// Steps each sw_channel member is advanced before diagnostics start.
    pub lead_steps: usize,
}

impl Default for SwSection {
    fn default() -> Self {
        let c = SwConfig::default();
        Self {
            nx: c.grid.nx,
            ny: c.grid.ny,
            dx: c.grid.dx,
            dy: c.grid.dy,
            dt: c.dt,
            f0: c.f0,
            beta: c.beta,
            g: c.g,
            h_mean: c.h_mean,
            member_spacing: 10,
            lead_steps: 1440,
        }
    }
}

impl SwSection {
    pub fn model(&self) -> SwConfig {
        SwConfig {
            grid: Grid2D {
                nx: self.nx,
                ny: self.ny,
                dx: self.dx,
                dy: self.dy,
                x_periodic: true,
                walls_y: true,
            },
            dt: self.dt,
            f0: self.f0,
            beta: self.beta,
            g: self.g,
            h_mean: self.h_mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JetSection {
    pub h0: f64,
    pub dh: f64,
    pub width: f64,
    pub ripple_amp: f64,
    pub ripple_modes: Vec<u32>,
    /// Seed of the ripple phases; fixed so the base state does not vary with the run seed.
    pub ripple_seed: u64,
}

impl Default for JetSection {
    fn default() -> Self {
        let j = JetSpec::default();
        Self {
            h0: j.h0,
            dh: j.dh,
            width: j.width,
            ripple_amp: j.ripple_amp,
            ripple_modes: j.ripple_modes,
            ripple_seed: j.seed,
        }
    }
}

impl JetSection {
    pub fn spec(&self) -> JetSpec {
        JetSpec {
            h0: self.h0,
            dh: self.dh,
            width: self.width,
            ripple_amp: self.ripple_amp,
            ripple_modes: self.ripple_modes.clone(),
            seed: self.ripple_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobSection {
    pub ic: usize,
    pub jc: usize,
    pub radius: f64,
    pub amplitude: f64,
    pub noise_amp: f64,
    pub noise_len: f64,
    /// Drop below the far-field information (nats) that marks the height front.
    pub front_threshold: f64,
}

impl Default for BlobSection {
    fn default() -> Self {
        let b = BlobSpec::default();
        Self {
            ic: b.ic,
            jc: b.jc,
            radius: b.radius,
            amplitude: b.amplitude,
            noise_amp: b.noise_amp,
            noise_len: b.noise_len,
            front_threshold: 1.0,
        }
    }
}

impl BlobSection {
    pub fn spec(&self) -> BlobSpec {
        BlobSpec {
            ic: self.ic,
            jc: self.jc,
            radius: self.radius,
            amplitude: self.amplitude,
            noise_amp: self.noise_amp,
            noise_len: self.noise_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthSection {
    pub base_factor: f64,
    pub min_points: usize,
    pub growth_factor: f64,
}

impl Default for BandwidthSection {
    fn default() -> Self {
        let b = BandwidthPolicy::default();
        Self {
            base_factor: b.base_factor,
            min_points: b.min_points,
            growth_factor: b.growth_factor,
        }
    }
}

impl BandwidthSection {
    pub fn policy(&self) -> BandwidthPolicy {
        BandwidthPolicy {
            base_factor: self.base_factor,
            min_points: self.min_points,
            growth_factor: self.growth_factor,
        }
    }
}

/// How the climatological reference is obtained.
///
/// With `mean` and `variance` both set the reference is pinned; otherwise it
/// is fitted from a single long run: `spinup_steps` discarded, then
/// `snapshots` states taken every `sample_every` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub mode: String,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub spinup_steps: Option<usize>,
    pub snapshots: Option<usize>,
    pub sample_every: Option<usize>,
}

impl ReferenceSection {
    pub fn mode(&self) -> Result<ReferenceMode> {
        self.mode.parse()
    }

    pub fn pinned(&self) -> Option<(f64, f64)> {
        Some((self.mean?, self.variance?))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("bad config: {}", e.message())))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fill every default, reject sections that do not apply, then validate.
    pub fn resolve(&self) -> Result<Self> {
        let e = self.experiment;
        let mut r = self.clone();
        let reject = |present: bool, name: &str| -> Result<()> {
            if present {
                return Err(Error::config(format!(
                    "section [{name}] is not used by {}",
                    e.as_str()
                )));
            }
            Ok(())
        };
        match e {
            Experiment::KsDemo => {
                reject(self.sw.is_some(), "sw")?;
                reject(self.jet.is_some(), "jet")?;
                reject(self.blob.is_some(), "blob")?;
                r.ks.get_or_insert_with(KsSection::default);
            }
            Experiment::SwChannel | Experiment::SwBlob => {
                reject(self.ks.is_some(), "ks")?;
                if e == Experiment::SwChannel {
                    reject(self.blob.is_some(), "blob")?;
                } else {
                    r.blob.get_or_insert_with(BlobSection::default);
                }
                let sw = r.sw.get_or_insert_with(SwSection::default);
                if e == Experiment::SwBlob && self.sw.is_none() {
                    sw.lead_steps = 0;
                }
                r.jet.get_or_insert_with(JetSection::default);
            }
            Experiment::OracleSuite => {
                for (present, name) in [
                    (self.ks.is_some(), "ks"),
                    (self.sw.is_some(), "sw"),
                    (self.jet.is_some(), "jet"),
                    (self.blob.is_some(), "blob"),
                    (self.reference.is_some(), "reference"),
                ] {
                    reject(present, name)?;
                }
            }
        }
        r.members.get_or_insert(200);
        r.steps.get_or_insert(match e {
            Experiment::KsDemo => 500,
            Experiment::SwChannel => 1440,
            Experiment::SwBlob => 6000,
            Experiment::OracleSuite => 0,
        });
        r.cadence.get_or_insert(if e.is_sw() { 100 } else { 5 });
        r.out
            .get_or_insert_with(|| PathBuf::from("out").join(e.as_str()));
        r.bandwidth.get_or_insert_with(BandwidthSection::default);
        if e != Experiment::OracleSuite {
            let reference = r.reference.get_or_insert_with(|| ReferenceSection {
                mode: if e.is_sw() {
                    "meridional_profile"
                } else {
                    "global"
                }
                .into(),
                mean: None,
                variance: None,
                spinup_steps: None,
                snapshots: None,
                sample_every: None,
            });
            if e == Experiment::KsDemo && self.reference.is_none() {
                reference.mean = Some(0.0);
                reference.variance = Some(KS_CLIMATE_VARIANCE);
            }
            if reference.pinned().is_none() {
                reference
                    .spinup_steps
                    .get_or_insert(if e.is_sw() { 0 } else { 10_000 });
                reference
                    .snapshots
                    .get_or_insert(if e.is_sw() { 200 } else { 10_000 });
                reference.sample_every.get_or_insert(10);
            }
        }
        r.validate()?;
        Ok(r)
    }

    /// Static checks on a resolved config, including model stability.
    pub fn validate(&self) -> Result<()> {
        let missing = || Error::config("config is not resolved");
        let members = self.members.ok_or_else(missing)?;
        if members < crate::infoflow::MIN_MEMBERS {
            return Err(Error::config(format!(
                "members = {members} is below the minimum of {}",
                crate::infoflow::MIN_MEMBERS
            )));
        }
        if self.cadence.ok_or_else(missing)? == 0 {
            return Err(Error::config("cadence must be at least 1"));
        }
        self.bandwidth
            .as_ref()
            .ok_or_else(missing)?
            .policy()
            .validate()?;
        if let Some(ks) = &self.ks {
            ks.model().validate()?;
            ks.bump().shape(ks.n)?;
            if !(ks.amp_variance >= 0.0) {
                return Err(Error::config("amp_variance must be >= 0"));
            }
        }
        if let (Some(sw), Some(jet)) = (&self.sw, &self.jet) {
            let cfg = sw.model();
            let h_max =
                jet.h0 + jet.dh.abs() + jet.ripple_amp.abs() * jet.ripple_modes.len() as f64;
            let blob_max = self
                .blob
                .as_ref()
                .map_or(0.0, |b| 4.0 * b.amplitude.abs() + 4.0 * b.noise_amp);
            cfg.validate(h_max + blob_max)?;
            if let Some(b) = &self.blob {
                b.spec().validate(&cfg.grid)?;
                if !(b.front_threshold > 0.0) {
                    return Err(Error::config("front_threshold must be > 0"));
                }
            }
            if sw.member_spacing == 0 {
                return Err(Error::config("member_spacing must be at least 1"));
            }
        }
        if let Some(reference) = &self.reference {
            let mode = reference.mode()?;
            match reference.pinned() {
                Some((_, v)) => {
                    if self.experiment != Experiment::KsDemo {
                        return Err(Error::config(
                            "pinned reference moments apply to ks_demo only",
                        ));
                    }
                    if mode != ReferenceMode::Global {
                        return Err(Error::config(
                            "pinned reference moments need mode = \"global\"",
                        ));
                    }
                    if !(v > 0.0) {
                        return Err(Error::config("pinned reference variance must be > 0"));
                    }
                }
                None => {
                    if reference.mean.is_some() || reference.variance.is_some() {
                        return Err(Error::config(
                            "pin both reference mean and variance, or neither",
                        ));
                    }
                    if reference.snapshots.ok_or_else(missing)? == 0
                        || reference.sample_every.ok_or_else(missing)? == 0
                    {
                        return Err(Error::config(
                            "reference snapshots and sample_every must be positive",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// The resolved config as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The text echoed into an output tree. The output location is left out
    /// so that identical runs written to different places stay bit-identical.
    pub fn echo(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.to_toml()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn members(&self) -> usize {
        self.members.unwrap_or(200)
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(0)
    }

    pub fn cadence(&self) -> usize {
        self.cadence.unwrap_or(1)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(self.experiment.as_str()))
    }

    pub fn policy(&self) -> BandwidthPolicy {
        self.bandwidth.clone().unwrap_or_default().policy()
    }
}
