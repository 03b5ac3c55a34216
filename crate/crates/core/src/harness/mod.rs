//! Configuration, experiment orchestration and output.

pub mod config;
pub mod experiments;
pub mod fieldfile;
pub mod fronts;
pub mod oracle;
pub mod output;

use std::path::PathBuf;

pub use config::{Experiment, ExperimentConfig};
pub use fieldfile::{read_field, write_field, FieldFile, FieldHeader};
pub use output::{Manifest, ManifestEntry, OutputWriter};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out: PathBuf,
    pub manifest: Manifest,
    pub config: ExperimentConfig,
}

/// Resolve `cfg`, run it and write the output tree.
///
/// The resolved config is echoed to `config.toml` first. On failure the
/// manifest still lists everything written before the error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let cfg = cfg.resolve()?;
    let out = cfg.out_dir();
    let mut w = OutputWriter::create(&out)?;
    w.text("config.toml", "config", cfg.echo())?;
    let outcome = experiments::dispatch(&cfg, &mut w);
    let manifest = w.finish()?;
    outcome?;
    Ok(RunReport {
        out,
        manifest,
        config: cfg,
    })
}

/// [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<RunReport> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?
        .install(|| run_experiment(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str, out: &std::path::Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::parse(text).unwrap();
        c.out = Some(out.to_path_buf());
        c
    }

    #[test]
    fn ks_runs_are_identical_at_any_worker_count() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = \"ks_demo\"\nseed = 3\nsteps = 30\nmembers = 24\ncadence = 10\n";
        let a = run_with_workers(&cfg(text, &dir.path().join("a")), 1).unwrap();
        let b = run_with_workers(&cfg(text, &dir.path().join("b")), 4).unwrap();
        assert_eq!(a.manifest, b.manifest);
        a.manifest.verify(&a.out).unwrap();
        // 4 dumps x (mean, 3 terms, total, information, flow, velocity, residual) + config + summary
        assert_eq!(a.manifest.entries.len(), 4 * 9 + 2);
        let f = read_field(&a.out.join("fields/information_u/information_u_000030.ifld")).unwrap();
        assert_eq!((f.header.t_index, f.header.time), (30, 1.5));
        assert_eq!(f.header.experiment, "ks_demo");
    }

    #[test]
    fn echoed_config_reproduces_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = \"ks_demo\"\nseed = 5\nsteps = 10\nmembers = 20\ncadence = 5\n";
        let a = run_experiment(&cfg(text, &dir.path().join("a"))).unwrap();
        let echoed = std::fs::read_to_string(a.out.join("config.toml")).unwrap();
        let b = run_experiment(&cfg(&echoed, &dir.path().join("b"))).unwrap();
        assert_eq!(a.manifest, b.manifest);
    }

    #[test]
    fn blowup_leaves_a_snapshot_and_valid_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = \"ks_demo\"\nseed = 1\nsteps = 400\nmembers = 20\ncadence = 50\n[ks]\namp_mean = 1.0e4\n";
        let out = dir.path().join("x");
        let err = run_experiment(&cfg(text, &out)).unwrap_err();
        assert!(matches!(err, Error::Blowup { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
        let m = Manifest::load(&out).unwrap();
        m.verify(&out).unwrap();
        assert!(m.entries.iter().any(|e| e.path.starts_with("snapshot/")));
        assert!(m.entries.iter().any(|e| e.path == "summary.csv"));
    }

    #[test]
    fn small_blob_run_writes_sw_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let text = "experiment = \"sw_blob\"\nseed = 2\nsteps = 2\nmembers = 20\ncadence = 1\n\
                    [reference]\nmode = \"meridional_profile\"\nsnapshots = 4\nsample_every = 1\n";
        let r = run_experiment(&cfg(text, &dir.path().join("b"))).unwrap();
        r.manifest.verify(&r.out).unwrap();
        for name in [
            "information_h",
            "information_zeta",
            "mean_ke",
            "budget_zeta_stretching",
            "flow_zeta_y",
            "residual_h_x",
        ] {
            assert_eq!(r.manifest.variable(name).len(), 3, "{name}");
        }
        let h = read_field(&r.out.join("fields/mean_h/mean_h_000002.ifld")).unwrap();
        assert_eq!(h.header.dims, vec![50, 254]);
        assert_eq!(h.header.units, "m");
        let fronts = std::fs::read_to_string(r.out.join("fronts.csv")).unwrap();
        assert_eq!(fronts.lines().count(), 3);
    }

    #[test]
    fn oracle_suite_writes_its_table() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_experiment(&cfg(
            "experiment = \"oracle_suite\"\nseed = 42\n",
            &dir.path().join("o"),
        ))
        .unwrap();
        let table = std::fs::read_to_string(r.out.join("oracle.csv")).unwrap();
        assert!(
            table.lines().skip(1).all(|l| l.ends_with(",true")),
            "{table}"
        );
    }
}
