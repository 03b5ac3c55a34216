//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::time::Instant;

use infodyn::harness::oracle::{
    closure_checks, control_checks, estimator_checks, ks_dispersion_checks, Check,
};
use infodyn::harness::{run_experiment, run_with_workers, ExperimentConfig, Manifest};
use infodyn::models::ks::KsConfig;
use infodyn::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_checks(checks: Vec<Check>) -> Outcome {
    Outcome {
        pass: checks.iter().all(|c| c.pass),
        detail: checks
            .iter()
            .map(|c| format!("{} = {:.4} ({})", c.name, c.value, c.target))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::parse(text).expect("acceptance config parses");
    c.out = Some(out.to_path_buf());
    c
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|v| v.parse().expect("numeric csv"))
                .collect()
        })
        .collect()
}

fn ks_qualitative(dir: &Path) -> Result<Outcome> {
    let r = run_experiment(&config(
        "experiment = \"ks_demo\"\nseed = 42\nmembers = 200\nsteps = 500\n",
        dir,
    ))?;
    let rows = csv_rows(&std::fs::read_to_string(r.out.join("summary.csv"))?);
    let at = |step: f64| {
        rows.iter()
            .find(|row| row[0] == step)
            .expect("step in summary")
    };
    let (i0, i500) = (at(0.0)[4], at(500.0)[4]);
    let drop = 1.0 - i500 / i0;
    let d100 = at(100.0)[5];
    let crossing = rows
        .iter()
        .find(|row| row[0] > 100.0 && row[5] > 10.0 * d100)
        .map(|row| row[0]);
    let diverges = crossing.is_some_and(|s| (200.0..=500.0).contains(&s));
    Ok(Outcome {
        pass: drop >= 0.5 && diverges,
        detail: format!(
            "information {i0:.3} -> {i500:.3} (drop {:.0}%, need >= 50%); pair distance > 10x step-100 value first at step {} (need 200..500); all-point mean at 500 = {:.3}",
            100.0 * drop,
            crossing.map_or("never".into(), |s| format!("{s}")),
            at(500.0)[2]
        ),
    })
}

fn gravity_front(dir: &Path) -> Result<Outcome> {
    let r = run_experiment(&config(
        "experiment = \"sw_blob\"\nseed = 42\nmembers = 200\nsteps = 300\ncadence = 100\n",
        dir,
    ))?;
    let text = std::fs::read_to_string(r.out.join("fronts.csv"))?;
    let threshold = r.config.blob.as_ref().map_or(1.0, |b| b.front_threshold);
    let rows: Vec<Vec<f64>> = csv_rows(&text)
        .into_iter()
        .filter(|row| row[0] >= 100.0)
        .collect();
    let mut pass = !rows.is_empty();
    let mut parts = Vec::new();
    for row in &rows {
        let (speed, h_peak, zeta_peak) = (row[4], row[5], row[6]);
        let ok = (260.0..=430.0).contains(&speed) && zeta_peak < 0.5 * threshold;
        pass &= ok;
        parts.push(format!(
            "{}->{}: speed {speed:.0} m/s (need 260..430), h peak {h_peak:.2}, zeta peak {zeta_peak:.2} (need < {})",
            row[0],
            row[1],
            0.5 * threshold
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn determinism(dir: &Path) -> Result<Outcome> {
    let cases = [
        (
            "ks_demo",
            "experiment = \"ks_demo\"\nseed = 7\nmembers = 40\nsteps = 60\ncadence = 20\n",
        ),
        (
            "sw_blob",
            "experiment = \"sw_blob\"\nseed = 7\nmembers = 20\nsteps = 4\ncadence = 2\n\
             [reference]\nmode = \"meridional_profile\"\nsnapshots = 4\nsample_every = 1\n",
        ),
        ("oracle_suite", "experiment = \"oracle_suite\"\nseed = 7\n"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, text) in cases {
        let runs: Vec<Manifest> = [1usize, 2, 3]
            .iter()
            .map(|&w| {
                let r = run_with_workers(&config(text, &dir.join(format!("{name}_{w}"))), w)?;
                r.manifest.verify(&r.out)?;
                Ok(r.manifest)
            })
            .collect::<Result<_>>()?;
        let same = runs.windows(2).all(|p| p[0].render() == p[1].render());
        pass &= same;
        parts.push(format!(
            "{name}: {} files, {}",
            runs[0].entries.len(),
            if same {
                "identical at 1/2/3 workers"
            } else {
                "manifests differ"
            }
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored.
    let tmp = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome>>)> = vec![
        (
            "estimator oracle suite",
            Box::new(|| estimator_checks(42).map(from_checks)),
        ),
        (
            "KS linear dispersion",
            Box::new(|| ks_dispersion_checks(&KsConfig::default()).map(from_checks)),
        ),
        (
            "KS qualitative reproduction",
            Box::new(|| ks_qualitative(&tmp.path().join("ks"))),
        ),
        (
            "gravity-wave information speed",
            Box::new(|| gravity_front(&tmp.path().join("blob"))),
        ),
        (
            "budget closure on advdiff",
            Box::new(|| closure_checks(42).map(from_checks)),
        ),
        (
            "control noise floor",
            Box::new(|| control_checks(42).map(from_checks)),
        ),
        (
            "determinism",
            Box::new(|| determinism(&tmp.path().join("det"))),
        ),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        failed += usize::from(!outcome.pass);
        println!(
            "{} {name} [{:.1}s]: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
