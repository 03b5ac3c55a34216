//! Expanding information fronts in the blob experiment.
//!
//! Along the row through the blob centre, the drop of information between two
//! dumps `D(r) = I_prev - I_now` is compared with its median in the far field
//! (the outer quarter of each ray), which removes domain-wide trends such as
//! the slow spread growth of the background noise. The front is the outermost
//! radius where the excess drop reaches the threshold.

use crate::grid::Grid2D;

/// Outer part of each ray used as the far field.
const FAR_FRACTION: f64 = 0.75;

/// `[east, west]` excess drop profiles, indexed by radius in gridpoints.
pub fn excess_drop(
    prev: &[f64],
    now: &[f64],
    grid: &Grid2D,
    ic: usize,
    jc: usize,
) -> [Vec<f64>; 2] {
    let reach = grid.nx / 2 - 1;
    let nx = grid.nx as isize;
    let ray = |sign: isize| -> Vec<f64> {
        (0..=reach as isize)
            .map(|r| {
                let i = (ic as isize + sign * r).rem_euclid(nx) as usize;
                let k = grid.idx(i, jc);
                prev[k] - now[k]
            })
            .collect()
    };
    let (east, west) = (ray(1), ray(-1));
    let far_lo = far_start(reach + 1);
    let mut far: Vec<f64> = east[far_lo..]
        .iter()
        .chain(&west[far_lo..])
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let base = median(&mut far);
    [east, west].map(|d| d.into_iter().map(|v| v - base).collect())
}

fn far_start(len: usize) -> usize {
    (FAR_FRACTION * len as f64) as usize
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Outermost radius inside the near field where `e >= threshold`, linearly
/// interpolated to the crossing; NaN when the threshold is never reached.
pub fn front_radius(e: &[f64], threshold: f64) -> f64 {
    let far_lo = far_start(e.len());
    for r in (0..far_lo).rev() {
        if e[r].is_finite() && e[r] >= threshold {
            let next = e[r + 1];
            if next.is_finite() && next < threshold {
                return r as f64 + (e[r] - threshold) / (e[r] - next);
            }
            return r as f64;
        }
    }
    f64::NAN
}

/// Largest finite value of `e` over radii in `[lo, hi]`.
pub fn peak_between(e: &[f64], lo: f64, hi: f64) -> f64 {
    if !(lo.is_finite() && hi.is_finite()) {
        return f64::NAN;
    }
    let (a, b) = (
        lo.min(hi).ceil().max(0.0) as usize,
        (hi.max(lo).floor() as usize).min(e.len() - 1),
    );
    (a..=b)
        .map(|r| e[r])
        .filter(|v| v.is_finite())
        .fold(f64::NAN, f64::max)
}

/// Front measurements between two consecutive dumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontRow {
    pub from_step: usize,
    pub to_step: usize,
    /// Height front radius on the east and west rays (gridpoints).
    pub radius: [f64; 2],
    /// Mean outward speed of the two rays since the previous row (m/s).
    pub speed: f64,
    /// Peak excess drop over the swept annulus, height and vorticity (nats).
    pub h_peak: f64,
    pub zeta_peak: f64,
}

impl FrontRow {
    pub const CSV_HEADER: &'static str =
        "from_step,to_step,radius_east,radius_west,speed_m_per_s,h_peak,zeta_peak";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.from_step,
            self.to_step,
            self.radius[0],
            self.radius[1],
            self.speed,
            self.h_peak,
            self.zeta_peak
        )
    }
}

/// Consumes information fields dump by dump.
#[derive(Debug, Clone)]
pub struct FrontTracker {
    grid: Grid2D,
    ic: usize,
    jc: usize,
    threshold: f64,
    /// Seconds per solver step.
    dt: f64,
    prev: Option<(usize, Vec<f64>, Vec<f64>)>,
    prev_radius: Option<[f64; 2]>,
}

impl FrontTracker {
    pub fn new(grid: Grid2D, ic: usize, jc: usize, threshold: f64, dt: f64) -> Self {
        Self {
            grid,
            ic,
            jc,
            threshold,
            dt,
            prev: None,
            prev_radius: None,
        }
    }

    pub fn update(&mut self, step: usize, info_h: &[f64], info_zeta: &[f64]) -> Option<FrontRow> {
        let Some((from, ph, pz)) = self
            .prev
            .replace((step, info_h.to_vec(), info_zeta.to_vec()))
        else {
            return None;
        };
        let eh = excess_drop(&ph, info_h, &self.grid, self.ic, self.jc);
        let ez = excess_drop(&pz, info_zeta, &self.grid, self.ic, self.jc);
        let radius = [
            front_radius(&eh[0], self.threshold),
            front_radius(&eh[1], self.threshold),
        ];
        let inner = self.prev_radius.unwrap_or([0.0; 2]);
        let seconds = (step - from) as f64 * self.dt;
        let speed = match self.prev_radius {
            Some(p) => 0.5 * ((radius[0] - p[0]) + (radius[1] - p[1])) * self.grid.dx / seconds,
            None => f64::NAN,
        };
        let peak = |e: &[Vec<f64>; 2]| {
            peak_between(&e[0], inner[0], radius[0]).max(peak_between(&e[1], inner[1], radius[1]))
        };
        self.prev_radius = Some(radius);
        Some(FrontRow {
            from_step: from,
            to_step: step,
            radius,
            speed,
            h_peak: peak(&eh),
            zeta_peak: peak(&ez),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(grid: &Grid2D, ic: usize, jc: usize, radius: f64, depth: f64) -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let (i, j) = ((k % grid.nx) as f64, (k / grid.nx) as f64);
                let mut dx = (i - ic as f64).abs();
                dx = dx.min(grid.nx as f64 - dx);
                let r = (dx * dx + (j - jc as f64).powi(2)).sqrt();
                5.0 - if r <= radius { depth } else { 0.0 }
            })
            .collect()
    }

    #[test]
    fn radius_interpolates_the_crossing() {
        let mut e = vec![0.0; 100];
        e[..30].fill(2.0);
        e[30] = 0.4;
        let r = front_radius(&e, 1.0);
        assert!((r - (29.0 + 1.0 / 1.6)).abs() < 1e-12);
        assert!(front_radius(&[0.0; 100], 1.0).is_nan());
    }

    #[test]
    fn tracker_recovers_a_ring_speed() {
        let grid = Grid2D::channel(254, 50, 1.0e5, 1.0e5).unwrap();
        let (ic, jc, dt) = (120, 30, 60.0);
        let mut t = FrontTracker::new(grid, ic, jc, 1.0, dt);
        // a uniform 0.3-nat decline everywhere must not move the front
        let field = |r: f64, step: usize| -> Vec<f64> {
            ring(&grid, ic, jc, r, 3.0)
                .iter()
                .map(|v| v - 0.003 * step as f64)
                .collect()
        };
        let zeta = vec![1.0; grid.len()];
        assert!(t.update(0, &field(0.0, 0), &zeta).is_none());
        let a = t.update(100, &field(20.0, 100), &zeta).unwrap();
        assert!((a.radius[0] - 20.0).abs() <= 1.0 && (a.radius[1] - 20.0).abs() <= 1.0);
        assert!(a.speed.is_nan());
        let b = t.update(200, &field(40.0, 200), &zeta).unwrap();
        let expected = 20.0 * grid.dx / (100.0 * dt);
        assert!((b.speed - expected).abs() <= 0.05 * expected, "{}", b.speed);
        assert!(b.h_peak >= 1.0);
        assert_eq!(b.zeta_peak, 0.0);
    }

    #[test]
    fn peak_ignores_masked_points() {
        let e = [f64::NAN, 1.0, 3.0, f64::NAN, 2.0];
        assert_eq!(peak_between(&e, 0.0, 4.0), 3.0);
        assert!(peak_between(&e, 3.0, 3.0).is_nan());
        assert!(peak_between(&e, f64::NAN, 3.0).is_nan());
    }
}
