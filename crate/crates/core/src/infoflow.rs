//! Information diagnostics of an ensemble against a Gaussian reference.
//!
//! Every gridpoint is treated independently: the member values there form a
//! [`SampleSet`], and information, budget and flow estimates are averages over
//! those particles. Points whose samples are degenerate are masked as NaN, and
//! NaN propagates through every derived product.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    log_density_at_samples, relative_entropy, BandwidthPolicy, GaussianRef, SampleSet,
    ScoreEstimator,
};
use crate::grid::{Grid, Order};

pub use crate::models::sw::kinetic_energy_field;

/// Smallest ensemble accepted for diagnostics.
pub const MIN_MEMBERS: usize = 20;
/// Samples required for each fitted reference Gaussian.
pub const MIN_REFERENCE_SAMPLES: u64 = 1000;
/// Information below which the information velocity is masked (nats).
pub const VELOCITY_FLOOR: f64 = 0.01;

/// Member fields of one variable at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleField {
    members: Vec<Vec<f64>>,
    grid: Grid,
    variable: String,
    step: usize,
}

impl EnsembleField {
    pub fn new(
        members: Vec<Vec<f64>>,
        grid: Grid,
        variable: impl Into<String>,
        step: usize,
    ) -> Result<Self> {
        if members.len() < MIN_MEMBERS {
            return Err(Error::config(format!(
                "ensemble needs at least {MIN_MEMBERS} members, got {}",
                members.len()
            )));
        }
        for (e, m) in members.iter().enumerate() {
            if m.len() != grid.len() {
                return Err(Error::config(format!(
                    "member {e} has {} values, grid has {}",
                    m.len(),
                    grid.len()
                )));
            }
            if let Some(k) = m.iter().position(|v| !v.is_finite()) {
                return Err(Error::config(format!(
                    "member {e} is non-finite at gridpoint {k}"
                )));
            }
        }
        Ok(Self {
            members,
            grid,
            variable: variable.into(),
            step,
        })
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn member(&self, e: usize) -> &[f64] {
        &self.members[e]
    }

    /// Member values at gridpoint `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.members.iter().map(|m| m[k]).collect()
    }

    pub fn mean_field(&self) -> Vec<f64> {
        let n = self.members.len() as f64;
        (0..self.grid.len())
            .map(|k| self.members.iter().map(|m| m[k]).sum::<f64>() / n)
            .collect()
    }

    /// Apply `f` to every member field.
    pub fn map_members(
        &self,
        variable: &str,
        f: impl Fn(&[f64]) -> Vec<f64> + Sync,
    ) -> Result<Self> {
        let members = self.members.par_iter().map(|m| f(m)).collect();
        Self::new(members, self.grid, variable, self.step)
    }

    fn check_aligned(&self, other: &EnsembleField) -> Result<()> {
        if self.grid != other.grid || self.members.len() != other.members.len() {
            return Err(Error::config(format!(
                "ensembles '{}' and '{}' are not aligned",
                self.variable, other.variable
            )));
        }
        Ok(())
    }
}

/// How reference moments are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    /// One Gaussian for the whole domain.
    Global,
    /// One Gaussian per grid row (constant along x).
    MeridionalProfile,
    PerGridpoint,
}

impl ReferenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceMode::Global => "global",
            ReferenceMode::MeridionalProfile => "meridional_profile",
            ReferenceMode::PerGridpoint => "per_gridpoint",
        }
    }
}

impl std::str::FromStr for ReferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(ReferenceMode::Global),
            "meridional_profile" => Ok(ReferenceMode::MeridionalProfile),
            "per_gridpoint" => Ok(ReferenceMode::PerGridpoint),
            other => Err(Error::config(format!("unknown reference mode '{other}'"))),
        }
    }
}

/// Gaussian reference density, one `(mean, variance)` per gridpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDensity {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub mode: ReferenceMode,
}

impl ReferenceDensity {
    /// The same Gaussian everywhere.
    pub fn uniform(grid: &Grid, mean: f64, variance: f64) -> Result<Self> {
        GaussianRef::new(mean, variance)?;
        Ok(Self {
            mean: vec![mean; grid.len()],
            variance: vec![variance; grid.len()],
            mode: ReferenceMode::Global,
        })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn at(&self, k: usize) -> GaussianRef {
        GaussianRef::new(self.mean[k], self.variance[k])
            .expect("reference variance checked at construction")
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.mean.len() != grid.len() || self.variance.len() != grid.len() {
            return Err(Error::config("reference density does not match the grid"));
        }
        if let Some(k) = self.variance.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Domain(format!(
                "reference variance not positive at gridpoint {k}"
            )));
        }
        Ok(())
    }
}

/// Streaming moment fit for [`ReferenceDensity`] (Welford updates in a fixed order).
#[derive(Debug, Clone)]
pub struct ReferenceAccumulator {
    grid: Grid,
    mode: ReferenceMode,
    count: Vec<u64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl ReferenceAccumulator {
    pub fn new(grid: Grid, mode: ReferenceMode) -> Result<Self> {
        let groups = match (mode, &grid) {
            (ReferenceMode::Global, _) => 1,
            (ReferenceMode::MeridionalProfile, Grid::Plane(g)) => g.ny,
            (ReferenceMode::MeridionalProfile, Grid::Line(_)) => {
                return Err(Error::config(
                    "meridional_profile reference needs a 2D grid",
                ))
            }
            (ReferenceMode::PerGridpoint, g) => g.len(),
        };
        Ok(Self {
            grid,
            mode,
            count: vec![0; groups],
            mean: vec![0.0; groups],
            m2: vec![0.0; groups],
        })
    }

    fn group(&self, k: usize) -> usize {
        match (self.mode, &self.grid) {
            (ReferenceMode::Global, _) => 0,
            (ReferenceMode::MeridionalProfile, Grid::Plane(g)) => k / g.nx,
            _ => k,
        }
    }

    /// Add one field snapshot (one member at one time).
    pub fn add(&mut self, field: &[f64]) {
        assert_eq!(field.len(), self.grid.len(), "field does not match grid");
        for (k, &x) in field.iter().enumerate() {
            let g = self.group(k);
            self.count[g] += 1;
            let d = x - self.mean[g];
            self.mean[g] += d / self.count[g] as f64;
            self.m2[g] += d * (x - self.mean[g]);
        }
    }

    pub fn samples_per_fit(&self) -> u64 {
        self.count.iter().copied().min().unwrap_or(0)
    }

    pub fn finish(&self) -> Result<ReferenceDensity> {
        let fewest = self.samples_per_fit();
        if fewest < MIN_REFERENCE_SAMPLES {
            return Err(Error::config(format!(
                "reference fit needs at least {MIN_REFERENCE_SAMPLES} samples per Gaussian, got {fewest}"
            )));
        }
        let var: Vec<f64> = self
            .m2
            .iter()
            .zip(&self.count)
            .map(|(m2, n)| m2 / (*n as f64 - 1.0))
            .collect();
        if let Some(g) = var.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::degenerate(format!(
                "reference group {g} has zero variance"
            )));
        }
        let n = self.grid.len();
        Ok(ReferenceDensity {
            mean: (0..n).map(|k| self.mean[self.group(k)]).collect(),
            variance: (0..n).map(|k| var[self.group(k)]).collect(),
            mode: self.mode,
        })
    }
}

/// Fit the reference Gaussian(s) to a time/ensemble/space collection.
pub fn reference_from_run(
    samples: &[EnsembleField],
    mode: ReferenceMode,
) -> Result<ReferenceDensity> {
    let first = samples
        .first()
        .ok_or_else(|| Error::config("reference fit needs at least one snapshot"))?;
    let mut acc = ReferenceAccumulator::new(*first.grid(), mode)?;
    for snap in samples {
        if snap.grid() != first.grid() {
            return Err(Error::config("reference snapshots on different grids"));
        }
        for m in snap.members() {
            acc.add(m);
        }
    }
    acc.finish()
}

/// Relative entropy per gridpoint, NaN where masked.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationField {
    pub values: Vec<f64>,
    pub step: usize,
    pub variable: String,
}

impl InformationField {
    pub fn domain_mean(&self) -> f64 {
        masked_mean(&self.values)
    }

    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }
}

/// Mean over unmasked entries; NaN when every entry is masked.
pub fn masked_mean(values: &[f64]) -> f64 {
    let (sum, n) = values
        .iter()
        .filter(|v| !v.is_nan())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn sample_set(e: &EnsembleField, k: usize) -> Option<SampleSet> {
    SampleSet::new(e.column(k)).ok()
}

pub fn information_field(e: &EnsembleField, q: &ReferenceDensity) -> Result<InformationField> {
    q.check(e.grid())?;
    let values = (0..e.grid().len())
        .into_par_iter()
        .map(|k| {
            sample_set(e, k)
                .and_then(|s| relative_entropy(&s, &q.at(k)).ok())
                .unwrap_or(f64::NAN)
        })
        .collect();
    Ok(InformationField {
        values,
        step: e.step(),
        variable: e.variable().to_string(),
    })
}

/// Information tendency split by right-hand-side term (nats per time unit).
#[derive(Debug, Clone, PartialEq)]
pub struct TermBudget {
    pub names: Vec<String>,
    pub fields: Vec<Vec<f64>>,
    pub step: usize,
}

impl TermBudget {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.fields[i].as_slice())
    }

    /// Pointwise sum of all terms.
    pub fn total(&self) -> Vec<f64> {
        let n = self.fields.first().map_or(0, Vec::len);
        (0..n)
            .map(|k| self.fields.iter().map(|f| f[k]).sum())
            .collect()
    }
}

/// `(1/N) sum_i F(psi_i) * d/dpsi log(p/q)(psi_i)` per term and gridpoint.
pub fn term_budget(
    psi: &EnsembleField,
    terms: &[(String, EnsembleField)],
    q: &ReferenceDensity,
    policy: BandwidthPolicy,
) -> Result<TermBudget> {
    q.check(psi.grid())?;
    policy.validate()?;
    for (_, t) in terms {
        psi.check_aligned(t)?;
    }
    let per_point: Vec<Vec<f64>> = (0..psi.grid().len())
        .into_par_iter()
        .map(|k| {
            let ratio = sample_set(psi, k).and_then(|s| {
                let est = ScoreEstimator::new(&s, policy).ok()?;
                let qk = q.at(k);
                Some(
                    s.values()
                        .iter()
                        .map(|&x| est.score(x) - qk.score(x))
                        .collect::<Vec<_>>(),
                )
            });
            terms
                .iter()
                .map(|(_, f)| match &ratio {
                    Some(r) => {
                        f.members()
                            .iter()
                            .zip(r)
                            .map(|(m, r)| m[k] * r)
                            .sum::<f64>()
                            / r.len() as f64
                    }
                    None => f64::NAN,
                })
                .collect()
        })
        .collect();
    Ok(TermBudget {
        names: terms.iter().map(|(n, _)| n.clone()).collect(),
        fields: transpose(&per_point, terms.len()),
        step: psi.step(),
    })
}

fn transpose(per_point: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    (0..width)
        .map(|c| per_point.iter().map(|row| row[c]).collect())
        .collect()
}

/// Advective information flow and the derived information velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    /// One flow field per direction (nats times velocity units).
    pub components: Vec<Vec<f64>>,
    /// `flow / I`, masked where `I < VELOCITY_FLOOR`.
    pub velocity: Vec<Vec<f64>>,
    /// Information estimated from the same local densities as the flow.
    pub information: Vec<f64>,
}

/// `(1/N) sum_i vel_i [log p(psi_i) - log q(psi_i)]` per direction, with `p` the
/// m-spacing local density.
pub fn advective_flow(
    psi: &EnsembleField,
    vel: &[EnsembleField],
    q: &ReferenceDensity,
) -> Result<FlowField> {
    q.check(psi.grid())?;
    if vel.is_empty() {
        return Err(Error::config(
            "advective flow needs at least one velocity component",
        ));
    }
    for v in vel {
        psi.check_aligned(v)?;
    }
    let per_point: Vec<Vec<f64>> = (0..psi.grid().len())
        .into_par_iter()
        .map(|k| {
            let Some(logr) = log_ratio(psi, q, k) else {
                return vec![f64::NAN; vel.len() + 1];
            };
            let n = logr.len() as f64;
            let mut row: Vec<f64> = vel
                .iter()
                .map(|v| {
                    v.members()
                        .iter()
                        .zip(&logr)
                        .map(|(m, l)| m[k] * l)
                        .sum::<f64>()
                        / n
                })
                .collect();
            row.push(logr.iter().sum::<f64>() / n);
            row
        })
        .collect();
    let mut cols = transpose(&per_point, vel.len() + 1);
    let information = cols.pop().expect("information column");
    let velocity = cols
        .iter()
        .map(|c| {
            c.iter()
                .zip(&information)
                .map(|(f, i)| {
                    if *i >= VELOCITY_FLOOR {
                        f / i
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();
    Ok(FlowField {
        components: cols,
        velocity,
        information,
    })
}

/// `log p - log q` at every member of column `k`, `None` if degenerate.
fn log_ratio(psi: &EnsembleField, q: &ReferenceDensity, k: usize) -> Option<Vec<f64>> {
    let s = sample_set(psi, k)?;
    let logp = log_density_at_samples(&s).ok()?;
    let qk = q.at(k);
    Some(
        s.values()
            .iter()
            .zip(logp)
            .map(|(&x, lp)| lp - qk.log_pdf(x))
            .collect(),
    )
}

/// `flow - mean(vel) * I` per direction.
pub fn flow_minus_mean_advection(
    flow: &FlowField,
    vel_mean: &[Vec<f64>],
    info: &InformationField,
) -> Result<Vec<Vec<f64>>> {
    if vel_mean.len() != flow.components.len() {
        return Err(Error::config(
            "mean velocity and flow have different directions",
        ));
    }
    Ok(flow
        .components
        .iter()
        .zip(vel_mean)
        .map(|(f, u)| {
            f.iter()
                .zip(u)
                .zip(&info.values)
                .map(|((f, u), i)| f - u * i)
                .collect()
        })
        .collect())
}

/// Split of the explicit-diffusion contribution to the information tendency.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSplit {
    /// `D lap(I)`.
    pub transport: Vec<f64>,
    /// `-D E[|grad psi|^2 d2/dpsi2 log(p/q)]`.
    pub local_sink: Vec<f64>,
}

pub fn diffusion_decomposition(
    psi: &EnsembleField,
    diffusivity: f64,
    q: &ReferenceDensity,
    policy: BandwidthPolicy,
) -> Result<DiffusionSplit> {
    if !(diffusivity >= 0.0) {
        return Err(Error::Domain(format!(
            "diffusivity must be non-negative, got {diffusivity}"
        )));
    }
    q.check(psi.grid())?;
    policy.validate()?;
    let grid = *psi.grid();
    let info = information_field(psi, q)?;
    let transport = if diffusivity == 0.0 {
        info.values
            .iter()
            .map(|i| if i.is_nan() { f64::NAN } else { 0.0 })
            .collect()
    } else {
        grid.laplacian(&info.values)
            .iter()
            .map(|l| diffusivity * l)
            .collect()
    };
    // |grad psi|^2 per member
    let grad2 = psi.map_members("grad2", |m| {
        let mut g2 = vec![0.0; m.len()];
        for &axis in grid.axes() {
            for (acc, d) in g2.iter_mut().zip(grid.diff(m, axis, Order::First)) {
                *acc += d * d;
            }
        }
        g2
    })?;
    let local_sink = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let Some(s) = sample_set(psi, k) else {
                return f64::NAN;
            };
            let Ok(est) = ScoreEstimator::new(&s, policy) else {
                return f64::NAN;
            };
            if diffusivity == 0.0 {
                return 0.0;
            }
            let qk = q.at(k);
            let delta = 0.5 * est.base_bandwidth();
            let ratio = |x: f64| est.score(x) - qk.score(x);
            let acc: f64 = s
                .values()
                .iter()
                .zip(grad2.members())
                .map(|(&x, g2)| g2[k] * (ratio(x + delta) - ratio(x - delta)) / (2.0 * delta))
                .sum();
            -diffusivity * acc / s.len() as f64
        })
        .collect();
    Ok(DiffusionSplit {
        transport,
        local_sink,
    })
}

/// `E[(L_x u + L_y v) log(p/q)]`, the flow-convergence part of the local budget.
pub fn local_terms_advdiff(
    psi: &EnsembleField,
    vel: &[EnsembleField],
    q: &ReferenceDensity,
) -> Result<Vec<f64>> {
    q.check(psi.grid())?;
    let grid = *psi.grid();
    let axes = grid.axes();
    if vel.len() != axes.len() {
        return Err(Error::config(format!(
            "need {} velocity components, got {}",
            axes.len(),
            vel.len()
        )));
    }
    for v in vel {
        psi.check_aligned(v)?;
    }
    let members = psi.n_members();
    let div: Vec<Vec<f64>> = (0..members)
        .into_par_iter()
        .map(|e| {
            let mut d = vec![0.0; grid.len()];
            for (v, &axis) in vel.iter().zip(axes) {
                for (acc, x) in d.iter_mut().zip(grid.diff(v.member(e), axis, Order::First)) {
                    *acc += x;
                }
            }
            d
        })
        .collect();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|k| match log_ratio(psi, q, k) {
            Some(l) => div.iter().zip(&l).map(|(d, l)| d[k] * l).sum::<f64>() / members as f64,
            None => f64::NAN,
        })
        .collect())
}

/// Agreement between the finite-difference information tendency and the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureReport {
    /// `||r|| / ||dI/dt||` over all unmasked points and steps.
    pub relative_l2: f64,
    /// Pearson correlation between `dI/dt` and the summed budget.
    pub correlation: f64,
    /// Root-mean-square residual in nats per time unit.
    pub residual_rms: f64,
    pub points: usize,
}

/// Compare `(I[t+1] - I[t]) / dt` with `budgets[t].total()` for every `t`.
pub fn budget_closure(
    series: &[InformationField],
    budgets: &[TermBudget],
    dt: f64,
) -> Result<ClosureReport> {
    if series.len() != budgets.len() + 1 || budgets.is_empty() {
        return Err(Error::config(
            "closure needs one more information field than budgets",
        ));
    }
    let (mut fd_all, mut b_all) = (Vec::new(), Vec::new());
    for (t, b) in budgets.iter().enumerate() {
        let total = b.total();
        for k in 0..total.len() {
            let fd = (series[t + 1].values[k] - series[t].values[k]) / dt;
            if fd.is_finite() && total[k].is_finite() {
                fd_all.push(fd);
                b_all.push(total[k]);
            }
        }
    }
    let n = fd_all.len();
    let norm_fd = fd_all.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_r = fd_all
        .iter()
        .zip(&b_all)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(ClosureReport {
        relative_l2: norm_r / norm_fd,
        correlation: correlation(&fd_all, &b_all),
        residual_rms: norm_r / (n as f64).sqrt(),
        points: n,
    })
}

/// Pearson correlation; NaN for empty or constant inputs.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Ensemble-mean kinetic energy `1/2 h (u^2 + v^2)`.
pub fn ensemble_kinetic_energy(states: &[crate::models::sw::SwState]) -> Vec<f64> {
    let fields: Vec<Vec<f64>> = states.par_iter().map(kinetic_energy_field).collect();
    let n = fields.first().map_or(0, Vec::len);
    (0..n)
        .map(|k| fields.iter().map(|f| f[k]).sum::<f64>() / fields.len() as f64)
        .collect()
}
