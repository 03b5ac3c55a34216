//! Constant-coefficient advection–diffusion, `rho_t = -u rho_x - v rho_y + D lap(rho)`.
//!
//! Advection uses the unsplit Lax–Wendroff update (including the `u v rho_xy`
//! cross term), diffusion a forward-Euler central Laplacian. Periodic axes wrap;
//! along walled axes the boundary rows keep their values.

use crate::error::{Error, Result};
use crate::grid::{Grid, Grid2D};

/// Advection speed and diffusivity in grid units per time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvDiffParams {
    pub u: f64,
    pub v: f64,
    pub diffusivity: f64,
    pub dt: f64,
}

impl AdvDiffParams {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt > 0.0)
            || !(self.diffusivity >= 0.0)
            || !self.u.is_finite()
            || !self.v.is_finite()
        {
            return Err(Error::config(
                "advection-diffusion needs dt > 0, D >= 0 and finite velocities",
            ));
        }
        let (dx, dy) = match grid {
            Grid::Line(g) => (g.dx, f64::INFINITY),
            Grid::Plane(g) => (g.dx, g.dy),
        };
        if matches!(grid, Grid::Line(_)) && self.v != 0.0 {
            return Err(Error::config("1D advection-diffusion has no v component"));
        }
        let courant = self.u.abs() * self.dt / dx + self.v.abs() * self.dt / dy;
        if courant > 1.0 {
            return Err(Error::config(format!(
                "advective Courant sum {courant:.3} > 1"
            )));
        }
        let inv2 = 1.0 / (dx * dx) + if dy.is_finite() { 1.0 / (dy * dy) } else { 0.0 };
        let number = 2.0 * self.diffusivity * self.dt * inv2;
        if number > 1.0 {
            return Err(Error::config(format!(
                "diffusion number 2 D dt (1/dx^2 + 1/dy^2) = {number:.3} > 1"
            )));
        }
        Ok(())
    }
}

/// One step on a 1D periodic line or a 2D grid.
pub fn advdiff_step(field: &[f64], p: &AdvDiffParams, grid: &Grid) -> Result<Vec<f64>> {
    p.validate(grid)?;
    assert_eq!(field.len(), grid.len(), "field does not match grid");
    let plane = match grid {
        Grid::Line(g) => Grid2D {
            nx: g.n,
            ny: 1,
            dx: g.dx,
            dy: 1.0,
            x_periodic: true,
            walls_y: false,
        },
        Grid::Plane(g) => *g,
    };
    Ok(step_plane(field, p, &plane))
}

fn step_plane(f: &[f64], p: &AdvDiffParams, g: &Grid2D) -> Vec<f64> {
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let cx = p.u * p.dt / g.dx;
    let cy = p.v * p.dt / g.dy;
    let dxn = p.diffusivity * p.dt / (g.dx * g.dx);
    let dyn_ = if ny > 1 {
        p.diffusivity * p.dt / (g.dy * g.dy)
    } else {
        0.0
    };
    let wrap = |i: isize, n: isize| i.rem_euclid(n);
    let mut out = f.to_vec();
    for j in 0..ny {
        let walled_row = ny > 1 && g.walls_y && (j == 0 || j == ny - 1);
        if walled_row {
            continue;
        }
        let (jm, jp) = if ny > 1 {
            (wrap(j - 1, ny), wrap(j + 1, ny))
        } else {
            (j, j)
        };
        for i in 0..nx {
            if !g.x_periodic && (i == 0 || i == nx - 1) {
                continue;
            }
            let (im, ip) = (wrap(i - 1, nx), wrap(i + 1, nx));
            let at = |i: isize, j: isize| f[(j * nx + i) as usize];
            let c = at(i, j);
            let (e, w) = (at(ip, j), at(im, j));
            let (n, s) = (at(i, jp), at(i, jm));
            let mut next = c - 0.5 * cx * (e - w)
                + 0.5 * cx * cx * (e - 2.0 * c + w)
                + dxn * (e - 2.0 * c + w);
            if ny > 1 {
                let cross = at(ip, jp) - at(ip, jm) - at(im, jp) + at(im, jm);
                next += -0.5 * cy * (n - s)
                    + 0.5 * cy * cy * (n - 2.0 * c + s)
                    + 0.25 * cx * cy * cross
                    + dyn_ * (n - 2.0 * c + s);
            }
            out[(j * nx + i) as usize] = next;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn moments(f: &[f64], dx: f64) -> (f64, f64, f64) {
        let m0: f64 = f.iter().sum::<f64>() * dx;
        let m1: f64 = f
            .iter()
            .enumerate()
            .map(|(i, v)| i as f64 * dx * v)
            .sum::<f64>()
            * dx
            / m0;
        let m2: f64 = f
            .iter()
            .enumerate()
            .map(|(i, v)| (i as f64 * dx - m1).powi(2) * v)
            .sum::<f64>()
            * dx
            / m0;
        (m0, m1, m2)
    }

    fn pulse(n: usize, center: f64, sd: f64) -> Vec<f64> {
        (0..n)
            .map(|i| (-(i as f64 - center).powi(2) / (2.0 * sd * sd)).exp())
            .collect()
    }

    #[test]
    fn constant_field_is_unchanged() {
        let grid = Grid::Plane(Grid2D::new(16, 12, 1.0, 2.0, true, false).unwrap());
        let p = AdvDiffParams {
            u: 0.3,
            v: -0.2,
            diffusivity: 0.1,
            dt: 0.5,
        };
        let f = vec![4.25; grid.len()];
        assert_eq!(advdiff_step(&f, &p, &grid).unwrap(), f);
    }

    #[test]
    fn pulse_translates_at_advection_speed() {
        let g = Grid1D::new(400, 1.0).unwrap();
        let grid = Grid::Line(g);
        let p = AdvDiffParams {
            u: 0.5,
            v: 0.0,
            diffusivity: 0.0,
            dt: 1.0,
        };
        let mut f = pulse(400, 150.0, 20.0);
        let peak0 = f.iter().copied().fold(0.0, f64::max);
        let (_, c0, _) = moments(&f, 1.0);
        let steps = 40;
        for _ in 0..steps {
            let next = advdiff_step(&f, &p, &grid).unwrap();
            let decay = 1.0
                - next.iter().copied().fold(0.0, f64::max) / f.iter().copied().fold(0.0, f64::max);
            assert!(decay <= 1e-3, "peak decay {decay}");
            f = next;
        }
        let (_, c1, _) = moments(&f, 1.0);
        assert!((c1 - c0 - p.u * p.dt * steps as f64).abs() < 1e-6);
        assert!(f.iter().copied().fold(0.0, f64::max) <= peak0);
    }

    #[test]
    fn diffusion_spreads_variance_by_2d_dt() {
        let g = Grid1D::new(400, 1.0).unwrap();
        let grid = Grid::Line(g);
        let p = AdvDiffParams {
            u: 0.0,
            v: 0.0,
            diffusivity: 0.2,
            dt: 1.0,
        };
        let mut f = pulse(400, 200.0, 10.0);
        for _ in 0..20 {
            let (m0, _, v0) = moments(&f, 1.0);
            let next = advdiff_step(&f, &p, &grid).unwrap();
            let (m1, _, v1) = moments(&next, 1.0);
            assert!((m1 - m0).abs() < 1e-10 * m0);
            let growth = v1 - v0;
            assert!(
                (growth - 2.0 * p.diffusivity * p.dt).abs() <= 0.01 * 2.0 * p.diffusivity * p.dt
            );
            f = next;
        }
    }

    #[test]
    fn diagonal_advection_in_two_dimensions() {
        let g = Grid2D::new(128, 128, 1.0, 1.0, true, false).unwrap();
        let grid = Grid::Plane(g);
        let p = AdvDiffParams {
            u: 0.3,
            v: 0.2,
            diffusivity: 0.0,
            dt: 1.0,
        };
        let bump = |cx: f64, cy: f64| -> Vec<f64> {
            (0..g.len())
                .map(|k| {
                    let (i, j) = ((k % 128) as f64, (k / 128) as f64);
                    (-((i - cx).powi(2) + (j - cy).powi(2)) / (2.0 * 64.0)).exp()
                })
                .collect()
        };
        let mut f = bump(50.0, 50.0);
        for _ in 0..30 {
            f = advdiff_step(&f, &p, &grid).unwrap();
        }
        let exact = bump(59.0, 56.0);
        let err = f
            .iter()
            .zip(&exact)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 0.01, "max error {err}");
    }

    #[test]
    fn stability_violations_are_config_errors() {
        let grid = Grid::Plane(Grid2D::new(16, 16, 1.0, 1.0, true, false).unwrap());
        let f = vec![0.0; grid.len()];
        let fast = AdvDiffParams {
            u: 0.7,
            v: 0.7,
            diffusivity: 0.0,
            dt: 1.0,
        };
        assert!(matches!(
            advdiff_step(&f, &fast, &grid),
            Err(Error::Config(_))
        ));
        let stiff = AdvDiffParams {
            u: 0.0,
            v: 0.0,
            diffusivity: 0.3,
            dt: 1.0,
        };
        assert!(matches!(
            advdiff_step(&f, &stiff, &grid),
            Err(Error::Config(_))
        ));
    }
}
