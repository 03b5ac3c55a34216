//! The experiment protocols.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::BandwidthPolicy;
use crate::grid::{Grid, Grid1D, Grid2D};
use crate::harness::config::{Experiment, ExperimentConfig, ReferenceSection};
use crate::harness::fieldfile::{FieldFile, FieldHeader};
use crate::harness::fronts::{FrontRow, FrontTracker};
use crate::harness::output::OutputWriter;
use crate::infoflow::{
    advective_flow, flow_minus_mean_advection, information_field, masked_mean, term_budget,
    EnsembleField, InformationField, ReferenceAccumulator, ReferenceDensity,
};
use crate::models::ks::{ks_initial_ensemble, ks_term_fields, KsSolver, KsTerms};
use crate::models::sw::{
    blob_perturbation, geostrophic_init, kinetic_energy_field, relative_vorticity, sw_step,
    synthetic_jet_height, zeta_term_fields, SwConfig, SwState, ZetaTerms,
};
use crate::rng::{Purpose, StreamKey};

/// Writes fields of one experiment with a shared header template.
struct Dumper<'a> {
    w: &'a mut OutputWriter,
    experiment: &'static str,
    seed: u64,
    dims: Vec<usize>,
    spacing: Vec<f64>,
    /// Model time per solver step.
    dt: f64,
}

impl<'a> Dumper<'a> {
    fn new(w: &'a mut OutputWriter, cfg: &ExperimentConfig, grid: &Grid, dt: f64) -> Self {
        let (dims, spacing) = match grid {
            Grid::Line(g) => (vec![g.n], vec![g.dx]),
            Grid::Plane(g) => (vec![g.ny, g.nx], vec![g.dy, g.dx]),
        };
        Self {
            w,
            experiment: cfg.experiment.as_str(),
            seed: cfg.seed,
            dims,
            spacing,
            dt,
        }
    }

    fn put(
        &mut self,
        dir: &str,
        name: &str,
        units: &str,
        step: usize,
        data: Vec<f64>,
    ) -> Result<()> {
        let file = FieldFile {
            header: FieldHeader {
                variable: name.into(),
                units: units.into(),
                t_index: step as u64,
                dims: self.dims.clone(),
                spacing: self.spacing.clone(),
                time: step as f64 * self.dt,
                experiment: self.experiment.into(),
                seed: self.seed,
            },
            data,
        };
        self.w
            .field(format!("{dir}/{name}/{name}_{step:06}.ifld"), &file)
    }

    fn field(&mut self, name: &str, units: &str, step: usize, data: Vec<f64>) -> Result<()> {
        self.put("fields", name, units, step, data)
    }

    fn snapshot(&mut self, name: &str, units: &str, step: usize, data: Vec<f64>) -> Result<()> {
        self.put("snapshot", name, units, step, data)
    }
}

fn with_step(e: Error, step: usize) -> Error {
    match e {
        Error::Blowup { reason, .. } => Error::Blowup { step, reason },
        other => other,
    }
}

fn mean_over(members: &[Vec<f64>]) -> Vec<f64> {
    let n = members.len() as f64;
    (0..members[0].len())
        .map(|k| members.iter().map(|m| m[k]).sum::<f64>() / n)
        .collect()
}

fn transpose_terms<const K: usize>(
    per_member: Vec<[(&'static str, Vec<f64>); K]>,
) -> Vec<(String, Vec<Vec<f64>>)> {
    let mut out: Vec<(String, Vec<Vec<f64>>)> = Vec::with_capacity(K);
    for member in per_member {
        for (i, (name, field)) in member.into_iter().enumerate() {
            if out.len() <= i {
                out.push((name.to_string(), Vec::new()));
            }
            out[i].1.push(field);
        }
    }
    out
}

fn budget_fields(
    psi: &EnsembleField,
    terms: Vec<(String, Vec<Vec<f64>>)>,
    q: &ReferenceDensity,
    policy: BandwidthPolicy,
) -> Result<crate::infoflow::TermBudget> {
    let ens: Vec<(String, EnsembleField)> = terms
        .into_iter()
        .map(|(name, m)| {
            Ok((
                name.clone(),
                EnsembleField::new(m, *psi.grid(), name, psi.step())?,
            ))
        })
        .collect::<Result<_>>()?;
    term_budget(psi, &ens, q, policy)
}

/// Information, flow and residual of one variable carried by `vel`.
fn dump_flow(
    d: &mut Dumper,
    psi: &EnsembleField,
    vel: &[EnsembleField],
    q: &ReferenceDensity,
    suffixes: &[&str],
    units: (&str, &str),
) -> Result<InformationField> {
    let name = psi.variable().to_string();
    let step = psi.step();
    let info = information_field(psi, q)?;
    let flow = advective_flow(psi, vel, q)?;
    let means: Vec<Vec<f64>> = vel.iter().map(EnsembleField::mean_field).collect();
    let resid = flow_minus_mean_advection(&flow, &means, &info)?;
    d.field(
        &format!("information_{name}"),
        "nat",
        step,
        info.values.clone(),
    )?;
    for (((sfx, f), v), r) in suffixes
        .iter()
        .zip(flow.components)
        .zip(flow.velocity)
        .zip(resid)
    {
        d.field(&format!("flow_{name}{sfx}"), units.0, step, f)?;
        d.field(&format!("infovel_{name}{sfx}"), units.1, step, v)?;
        d.field(&format!("residual_{name}{sfx}"), units.0, step, r)?;
    }
    Ok(info)
}

fn csv_f(v: f64) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------- KS ----

/// Fit the KS climatology from one long run started from small noise.
pub fn ks_reference(cfg: &ExperimentConfig, r: &ReferenceSection) -> Result<ReferenceDensity> {
    let ks = cfg.ks.clone().unwrap_or_default().model();
    let grid = Grid::Line(ks.grid);
    if let Some((m, v)) = r.pinned() {
        return ReferenceDensity::uniform(&grid, m, v);
    }
    let mut rng = StreamKey::new(cfg.seed, 0, Purpose::KsNoise).rng();
    let noise = Normal::new(0.0, 0.01).expect("valid normal");
    let mut u: Vec<f64> = (0..ks.grid.n).map(|_| noise.sample(&mut rng)).collect();
    let mut solver = KsSolver::new(ks)?;
    let spinup = r.spinup_steps.unwrap_or(0);
    let every = r.sample_every.unwrap_or(1);
    let mut acc = ReferenceAccumulator::new(grid, r.mode()?)?;
    for step in 0..spinup + r.snapshots.unwrap_or(0) * every {
        solver.step(&mut u).map_err(|e| with_step(e, step))?;
        if step + 1 > spinup && (step + 1 - spinup).is_multiple_of(every) {
            acc.add(&u);
        }
    }
    acc.finish()
}

/// The two members whose initial states are closest in L2.
pub fn closest_pair(members: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 1, f64::INFINITY);
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let d = l2_distance(&members[a], &members[b]);
            if d < best.2 {
                best = (a, b, d);
            }
        }
    }
    (best.0, best.1)
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn ks_demo(cfg: &ExperimentConfig, w: &mut OutputWriter) -> Result<()> {
    let section = cfg.ks.clone().unwrap_or_default();
    let model = section.model();
    let g1: Grid1D = model.grid;
    let grid = Grid::Line(g1);
    let q = ks_reference(cfg, cfg.reference.as_ref().expect("resolved reference"))?;
    let policy = cfg.policy();
    let mut members = ks_initial_ensemble(cfg.members(), cfg.seed, &g1, &section.bump())?;
    let pair = closest_pair(&members);
    let mut solvers: Vec<KsSolver> = (0..members.len())
        .map(|_| KsSolver::new(model))
        .collect::<Result<_>>()?;
    let mut d = Dumper::new(w, cfg, &grid, model.dt);
    let mut summary = format!(
        "# closest initial pair: members {} and {}\nstep,time,information_mean,masked_points,information_mean_initial_support,pair_distance\n",
        pair.0, pair.1
    );
    let mut support: Option<Vec<bool>> = None;
    let mut last_good = members.clone();
    let mut result = Ok(());
    for step in 0..=cfg.steps() {
        if step % cfg.cadence() == 0 {
            let psi = EnsembleField::new(members.clone(), grid, "u", step)?;
            d.field("mean_u", "1", step, psi.mean_field())?;
            let terms = transpose_terms(
                members
                    .par_iter()
                    .map(|m| ks_term_fields(m, &g1).into_named())
                    .collect::<Vec<[(&'static str, Vec<f64>); 3]>>(),
            );
            debug_assert_eq!(terms.len(), KsTerms::NAMES.len());
            let budget = budget_fields(&psi, terms, &q, policy)?;
            for (name, f) in budget.names.iter().zip(&budget.fields) {
                d.field(&format!("budget_{name}"), "nat/time", step, f.clone())?;
            }
            d.field("budget_total", "nat/time", step, budget.total())?;
            let info = dump_flow(
                &mut d,
                &psi,
                std::slice::from_ref(&psi),
                &q,
                &[""],
                ("nat", "1"),
            )?;
            let mask: Vec<bool> = info.values.iter().map(|v| v.is_finite()).collect();
            let support = support.get_or_insert(mask);
            let common: Vec<f64> = info
                .values
                .iter()
                .zip(support.iter())
                .map(|(v, s)| if *s { *v } else { f64::NAN })
                .collect();
            summary += &format!(
                "{step},{},{},{},{},{}\n",
                csv_f(step as f64 * model.dt),
                csv_f(info.domain_mean()),
                info.masked_count(),
                csv_f(masked_mean(&common)),
                csv_f(l2_distance(&members[pair.0], &members[pair.1]))
            );
        }
        if step == cfg.steps() {
            break;
        }
        last_good.clone_from(&members);
        if let Err(e) = members
            .par_iter_mut()
            .zip(solvers.par_iter_mut())
            .try_for_each(|(m, s)| s.step(m))
        {
            d.snapshot("mean_u", "1", step, mean_over(&last_good))?;
            result = Err(with_step(e, step));
            break;
        }
    }
    d.w.text("summary.csv", "summary", summary)?;
    result
}

// ---------------------------------------------------------------- SW ----

struct SwSetup {
    model: SwConfig,
    base: SwState,
}

fn sw_setup(cfg: &ExperimentConfig) -> Result<SwSetup> {
    let model = cfg.sw.clone().unwrap_or_default().model();
    let jet = cfg.jet.clone().unwrap_or_default().spec();
    let h = synthetic_jet_height(&model, &jet)?;
    let (u, v) = geostrophic_init(&h, &model)?;
    let base = SwState::from_velocities(&model.grid, h, &u, &v);
    model.validate(base.max_depth())?;
    Ok(SwSetup { model, base })
}

/// Diagnosed SW variables of every member.
struct SwFields {
    h: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    zeta: Vec<Vec<f64>>,
    ke: Vec<Vec<f64>>,
}

fn sw_fields(states: &[SwState], grid: &Grid2D) -> SwFields {
    let per: Vec<[Vec<f64>; 4]> = states
        .par_iter()
        .map(|s| {
            let (u, v) = (s.u(), s.v());
            let zeta = relative_vorticity(&u, &v, grid);
            [u, v, zeta, kinetic_energy_field(s)]
        })
        .collect();
    let mut f = SwFields {
        h: states.iter().map(|s| s.h.clone()).collect(),
        u: Vec::new(),
        v: Vec::new(),
        zeta: Vec::new(),
        ke: Vec::new(),
    };
    for [u, v, z, k] in per {
        f.u.push(u);
        f.v.push(v);
        f.zeta.push(z);
        f.ke.push(k);
    }
    f
}

struct SwReference {
    h: ReferenceDensity,
    zeta: ReferenceDensity,
    ke: ReferenceDensity,
}

/// One long run from the base state: fits the climatology and, when
/// `members > 0`, returns states spaced `spacing` steps apart as an ensemble.
fn sw_long_run(
    setup: &SwSetup,
    r: &ReferenceSection,
    members: usize,
    spacing: usize,
) -> Result<(SwReference, Vec<SwState>)> {
    let grid = Grid::Plane(setup.model.grid);
    let mode = r.mode()?;
    let mut ah = ReferenceAccumulator::new(grid, mode)?;
    let mut az = ah.clone();
    let mut ak = ah.clone();
    let spinup = r.spinup_steps.unwrap_or(0);
    let every = r.sample_every.unwrap_or(1);
    let snapshots = r.snapshots.unwrap_or(0);
    let total = spinup + (snapshots * every).max(members * spacing);
    let mut s = setup.base.clone();
    let mut ensemble = Vec::with_capacity(members);
    for step in 1..=total {
        s = sw_step(&s, &setup.model).map_err(|e| with_step(e, step))?;
        if step <= spinup {
            continue;
        }
        let k = step - spinup;
        if k.is_multiple_of(every) && k / every <= snapshots {
            let (u, v) = (s.u(), s.v());
            ah.add(&s.h);
            az.add(&relative_vorticity(&u, &v, &setup.model.grid));
            ak.add(&kinetic_energy_field(&s));
        }
        if k.is_multiple_of(spacing) && ensemble.len() < members {
            ensemble.push(s.clone());
        }
    }
    Ok((
        SwReference {
            h: ah.finish()?,
            zeta: az.finish()?,
            ke: ak.finish()?,
        },
        ensemble,
    ))
}

fn sw_run(cfg: &ExperimentConfig, w: &mut OutputWriter) -> Result<()> {
    let setup = sw_setup(cfg)?;
    let model = setup.model;
    let grid = Grid::Plane(model.grid);
    let policy = cfg.policy();
    let reference = cfg.reference.as_ref().expect("resolved reference");
    let n = cfg.members();
    let section = cfg.sw.clone().unwrap_or_default();
    let blob = cfg.blob.clone();
    let (q, mut states) = match cfg.experiment {
        Experiment::SwChannel => sw_long_run(&setup, reference, n, section.member_spacing)?,
        _ => {
            let (q, _) = sw_long_run(&setup, reference, 0, 1)?;
            let spec = blob.as_ref().expect("resolved blob").spec();
            let (u, v) = (setup.base.u(), setup.base.v());
            let states = (0..n as u64)
                .into_par_iter()
                .map(|e| {
                    let dh = blob_perturbation(&spec, &model.grid, cfg.seed, e)?;
                    let h: Vec<f64> = setup.base.h.iter().zip(&dh).map(|(a, b)| a + b).collect();
                    Ok(SwState::from_velocities(&model.grid, h, &u, &v))
                })
                .collect::<Result<Vec<_>>>()?;
            (q, states)
        }
    };
    let lead = section.lead_steps;
    let mut tracker = blob
        .as_ref()
        .map(|b| FrontTracker::new(model.grid, b.ic, b.jc, b.front_threshold, model.dt));
    let mut d = Dumper::new(w, cfg, &grid, model.dt);
    let mut summary =
        String::from("step,time,information_h_mean,information_zeta_mean,information_ke_mean,masked_h,masked_zeta\n");
    let mut fronts = format!("{}\n", FrontRow::CSV_HEADER);
    let mut result = Ok(());
    for step in 0..=lead + cfg.steps() {
        if step >= lead && (step - lead).is_multiple_of(cfg.cadence()) {
            let f = sw_fields(&states, &model.grid);
            let ens = |m: Vec<Vec<f64>>, name: &str| EnsembleField::new(m, grid, name, step);
            let (h, u, v) = (ens(f.h, "h")?, ens(f.u, "u")?, ens(f.v, "v")?);
            let (zeta, ke) = (ens(f.zeta, "zeta")?, ens(f.ke, "ke")?);
            d.field("mean_h", "m", step, h.mean_field())?;
            d.field("mean_u", "m/s", step, u.mean_field())?;
            d.field("mean_v", "m/s", step, v.mean_field())?;
            d.field("mean_zeta", "1/s", step, zeta.mean_field())?;
            d.field("mean_ke", "m3/s2", step, ke.mean_field())?;
            let vel = [u, v];
            let xy = ["_x", "_y"];
            let ih = dump_flow(&mut d, &h, &vel, &q.h, &xy, ("nat m/s", "m/s"))?;
            let iz = dump_flow(&mut d, &zeta, &vel, &q.zeta, &xy, ("nat m/s", "m/s"))?;
            let ik = information_field(&ke, &q.ke)?;
            d.field("information_ke", "nat", step, ik.values.clone())?;
            let terms = transpose_terms(
                states
                    .par_iter()
                    .map(|s| zeta_term_fields(s, &model).into_named())
                    .collect::<Vec<[(&'static str, Vec<f64>); 4]>>(),
            );
            debug_assert_eq!(terms.len(), ZetaTerms::NAMES.len());
            let budget = budget_fields(&zeta, terms, &q.zeta, policy)?;
            for (name, f) in budget.names.iter().zip(&budget.fields) {
                d.field(&format!("budget_zeta_{name}"), "nat/s", step, f.clone())?;
            }
            d.field("budget_zeta_total", "nat/s", step, budget.total())?;
            summary += &format!(
                "{step},{},{},{},{},{},{}\n",
                csv_f(step as f64 * model.dt),
                csv_f(ih.domain_mean()),
                csv_f(iz.domain_mean()),
                csv_f(ik.domain_mean()),
                ih.masked_count(),
                iz.masked_count()
            );
            if let Some(row) = tracker
                .as_mut()
                .and_then(|t| t.update(step, &ih.values, &iz.values))
            {
                fronts += &row.csv();
                fronts.push('\n');
            }
        }
        if step == lead + cfg.steps() {
            break;
        }
        match states
            .par_iter()
            .map(|s| sw_step(s, &model))
            .collect::<Result<Vec<_>>>()
        {
            Ok(next) => states = next,
            Err(e) => {
                let f = sw_fields(&states, &model.grid);
                d.snapshot("mean_h", "m", step, mean_over(&f.h))?;
                d.snapshot("mean_u", "m/s", step, mean_over(&f.u))?;
                d.snapshot("mean_v", "m/s", step, mean_over(&f.v))?;
                result = Err(with_step(e, step));
                break;
            }
        }
    }
    d.w.text("summary.csv", "summary", summary)?;
    if tracker.is_some() {
        d.w.text("fronts.csv", "fronts", fronts)?;
    }
    result
}

// ------------------------------------------------------------ oracle ----

fn oracle_run(cfg: &ExperimentConfig, w: &mut OutputWriter) -> Result<()> {
    let checks = crate::harness::oracle::run_oracle_suite(cfg.seed)?;
    let mut csv = String::from("check,value,target,pass\n");
    for c in &checks {
        csv += &format!("{},{},{},{}\n", c.name, csv_f(c.value), c.target, c.pass);
    }
    w.text("oracle.csv", "oracle", csv)
}

pub(crate) fn dispatch(cfg: &ExperimentConfig, w: &mut OutputWriter) -> Result<()> {
    match cfg.experiment {
        Experiment::KsDemo => ks_demo(cfg, w),
        Experiment::SwChannel | Experiment::SwBlob => sw_run(cfg, w),
        Experiment::OracleSuite => oracle_run(cfg, w),
    }
}
