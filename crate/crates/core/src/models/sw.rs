//! Shallow-water equations in flux form on a beta-plane channel.
//!
//! ```text
//! h_t  = -(hu)_x - (hv)_y
//! hu_t = -(u^2 h + g h^2 / 2)_x - (huv)_y + f hv
//! hv_t = -(huv)_x - (v^2 h + g h^2 / 2)_y - f hu
//! f    = f0 + beta (y - y0),  y0 in the middle of the channel
//! ```
//!
//! Integrated with the two-stage Lax–Wendroff scheme: half-step states at the
//! x- and y-midpoints (including the transverse flux divergence, which keeps the
//! scheme second order in time), then a full step from the midpoint fluxes. The Coriolis
//! term enters both stages as a centred source evaluated at the half-step states.
//! Periodic in x; at the north and south walls `v = 0`, `h` keeps its initial
//! values and `u` is free-slip (copied from the adjacent interior row).

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{Axis, Grid, Grid2D, Order};
use crate::rng::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwConfig {
    pub grid: Grid2D,
    pub dt: f64,
    pub f0: f64,
    pub beta: f64,
    pub g: f64,
    pub h_mean: f64,
}

impl Default for SwConfig {
    fn default() -> Self {
        Self {
            grid: Grid2D {
                nx: 254,
                ny: 50,
                dx: 1.0e5,
                dy: 1.0e5,
                x_periodic: true,
                walls_y: true,
            },
            dt: 60.0,
            f0: 1.0e-4,
            beta: 1.6e-11,
            g: 9.81,
            h_mean: 1.1e4,
        }
    }
}

impl SwConfig {
    /// Coriolis parameter on row `j` (may be fractional for midpoints).
    pub fn coriolis(&self, j: f64) -> f64 {
        let y0 = 0.5 * (self.grid.ny as f64 - 1.0);
        self.f0 + self.beta * (j - y0) * self.grid.dy
    }

    /// Gravity-wave Courant number `dt sqrt(g h_max) / min(dx, dy)`.
    pub fn courant(&self, h_max: f64) -> f64 {
        self.dt * (self.g * h_max).sqrt() / self.grid.dx.min(self.grid.dy)
    }

    /// Static checks, with `h_max` the largest expected depth.
    pub fn validate(&self, h_max: f64) -> Result<()> {
        let g = self.grid;
        Grid2D::new(g.nx, g.ny, g.dx, g.dy, g.x_periodic, g.walls_y)?;
        if !g.x_periodic || !g.walls_y {
            return Err(Error::config(
                "shallow-water channel must be x-periodic with y walls",
            ));
        }
        if !(self.dt > 0.0) || !(self.g > 0.0) || !(self.h_mean > 0.0) {
            return Err(Error::config("dt, g and h_mean must be positive"));
        }
        let c = self.courant(h_max);
        if c >= std::f64::consts::FRAC_1_SQRT_2 {
            return Err(Error::config(format!(
                "CFL violated: dt*sqrt(g*h_max)/min(dx,dy) = {c:.3} >= 1/sqrt(2)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwState {
    pub h: Vec<f64>,
    pub hu: Vec<f64>,
    pub hv: Vec<f64>,
}

impl SwState {
    pub fn at_rest(grid: &Grid2D, depth: f64) -> Self {
        Self {
            h: vec![depth; grid.len()],
            hu: vec![0.0; grid.len()],
            hv: vec![0.0; grid.len()],
        }
    }

    /// Depth plus velocities, with `v` forced to zero on the walls.
    pub fn from_velocities(grid: &Grid2D, h: Vec<f64>, u: &[f64], v: &[f64]) -> Self {
        let hu = h.iter().zip(u).map(|(h, u)| h * u).collect();
        let mut hv: Vec<f64> = h.iter().zip(v).map(|(h, v)| h * v).collect();
        for i in 0..grid.nx {
            hv[grid.idx(i, 0)] = 0.0;
            hv[grid.idx(i, grid.ny - 1)] = 0.0;
        }
        Self { h, hu, hv }
    }

    pub fn u(&self) -> Vec<f64> {
        self.hu.iter().zip(&self.h).map(|(m, h)| m / h).collect()
    }

    pub fn v(&self) -> Vec<f64> {
        self.hv.iter().zip(&self.h).map(|(m, h)| m / h).collect()
    }

    pub fn max_depth(&self) -> f64 {
        self.h.iter().copied().fold(f64::MIN, f64::max)
    }
}

#[derive(Clone, Copy)]
struct Cons {
    h: f64,
    hu: f64,
    hv: f64,
}

impl Cons {
    #[inline]
    fn flux_x(&self, g: f64) -> Cons {
        let u = self.hu / self.h;
        Cons {
            h: self.hu,
            hu: self.hu * u + 0.5 * g * self.h * self.h,
            hv: self.hv * u,
        }
    }

    #[inline]
    fn flux_y(&self, g: f64) -> Cons {
        let v = self.hv / self.h;
        Cons {
            h: self.hv,
            hu: self.hu * v,
            hv: self.hv * v + 0.5 * g * self.h * self.h,
        }
    }
}

/// One Lax–Wendroff step.
pub fn sw_step(s: &SwState, cfg: &SwConfig) -> Result<SwState> {
    let grid = cfg.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let n = grid.len();
    assert!(
        s.h.len() == n && s.hu.len() == n && s.hv.len() == n,
        "state does not match grid"
    );
    let g = cfg.g;
    let dt = cfg.dt;
    let (ax, ay) = (dt / grid.dx, dt / grid.dy);
    let at = |k: usize| Cons {
        h: s.h[k],
        hu: s.hu[k],
        hv: s.hv[k],
    };

    let cell_fx: Vec<Cons> = (0..n).map(|k| at(k).flux_x(g)).collect();
    let cell_fy: Vec<Cons> = (0..n).map(|k| at(k).flux_y(g)).collect();
    // Central transverse divergence at a cell, zero on the wall rows.
    let dgy = |i: usize, j: usize| -> Cons {
        if j == 0 || j == ny - 1 {
            return Cons {
                h: 0.0,
                hu: 0.0,
                hv: 0.0,
            };
        }
        let (a, b) = (cell_fy[grid.idx(i, j + 1)], cell_fy[grid.idx(i, j - 1)]);
        let s = 0.5 / grid.dy;
        Cons {
            h: (a.h - b.h) * s,
            hu: (a.hu - b.hu) * s,
            hv: (a.hv - b.hv) * s,
        }
    };
    let dfx = |i: usize, j: usize| -> Cons {
        let (a, b) = (
            cell_fx[grid.idx((i + 1) % nx, j)],
            cell_fx[grid.idx((i + nx - 1) % nx, j)],
        );
        let s = 0.5 / grid.dx;
        Cons {
            h: (a.h - b.h) * s,
            hu: (a.hu - b.hu) * s,
            hv: (a.hv - b.hv) * s,
        }
    };

    // Half-step states at x-midpoints (i+1/2, j): own-direction flux difference
    // plus the transverse divergence averaged onto the midpoint.
    let mut mx = Vec::with_capacity(n);
    for j in 0..ny {
        let f = cfg.coriolis(j as f64);
        for i in 0..nx {
            let ip = (i + 1) % nx;
            let a = at(grid.idx(i, j));
            let b = at(grid.idx(ip, j));
            let (fa, fb) = (cell_fx[grid.idx(i, j)], cell_fx[grid.idx(ip, j)]);
            let (ta, tb) = (dgy(i, j), dgy(ip, j));
            let hu = 0.5 * (a.hu + b.hu);
            let hv = 0.5 * (a.hv + b.hv);
            mx.push(Cons {
                h: 0.5 * (a.h + b.h) - 0.5 * ax * (fb.h - fa.h) - 0.25 * dt * (ta.h + tb.h),
                hu: hu - 0.5 * ax * (fb.hu - fa.hu) - 0.25 * dt * (ta.hu + tb.hu)
                    + 0.5 * dt * f * hv,
                hv: hv
                    - 0.5 * ax * (fb.hv - fa.hv)
                    - 0.25 * dt * (ta.hv + tb.hv)
                    - 0.5 * dt * f * hu,
            });
        }
    }
    // Half-step states at y-midpoints (i, j+1/2), j = 0..ny-2.
    let mut my = Vec::with_capacity(nx * (ny - 1));
    for j in 0..ny - 1 {
        let f = cfg.coriolis(j as f64 + 0.5);
        for i in 0..nx {
            let a = at(grid.idx(i, j));
            let b = at(grid.idx(i, j + 1));
            let (fa, fb) = (cell_fy[grid.idx(i, j)], cell_fy[grid.idx(i, j + 1)]);
            let (ta, tb) = (dfx(i, j), dfx(i, j + 1));
            let hu = 0.5 * (a.hu + b.hu);
            let hv = 0.5 * (a.hv + b.hv);
            my.push(Cons {
                h: 0.5 * (a.h + b.h) - 0.5 * ay * (fb.h - fa.h) - 0.25 * dt * (ta.h + tb.h),
                hu: hu - 0.5 * ay * (fb.hu - fa.hu) - 0.25 * dt * (ta.hu + tb.hu)
                    + 0.5 * dt * f * hv,
                hv: hv
                    - 0.5 * ay * (fb.hv - fa.hv)
                    - 0.25 * dt * (ta.hv + tb.hv)
                    - 0.5 * dt * f * hu,
            });
        }
    }
    let fx: Vec<Cons> = mx.iter().map(|c| c.flux_x(g)).collect();
    let fy: Vec<Cons> = my.iter().map(|c| c.flux_y(g)).collect();

    let mut out = s.clone();
    for j in 1..ny - 1 {
        let f = cfg.coriolis(j as f64);
        for i in 0..nx {
            let k = grid.idx(i, j);
            let e = j * nx + i; // midpoint (i+1/2, j)
            let w = j * nx + (i + nx - 1) % nx; // (i-1/2, j)
            let nn = j * nx + i; // (i, j+1/2)
            let ss = (j - 1) * nx + i; // (i, j-1/2)
                                       // Centred source from the four surrounding half-step states.
            let hu_half = 0.25 * (mx[e].hu + mx[w].hu + my[nn].hu + my[ss].hu);
            let hv_half = 0.25 * (mx[e].hv + mx[w].hv + my[nn].hv + my[ss].hv);
            out.h[k] = s.h[k] - ax * (fx[e].h - fx[w].h) - ay * (fy[nn].h - fy[ss].h);
            out.hu[k] = s.hu[k] - ax * (fx[e].hu - fx[w].hu) - ay * (fy[nn].hu - fy[ss].hu)
                + dt * f * hv_half;
            out.hv[k] = s.hv[k]
                - ax * (fx[e].hv - fx[w].hv)
                - ay * (fy[nn].hv - fy[ss].hv)
                - dt * f * hu_half;
        }
    }
    for (wall, inner) in [(0, 1), (ny - 1, ny - 2)] {
        for i in 0..nx {
            let kw = grid.idx(i, wall);
            let ki = grid.idx(i, inner);
            out.hv[kw] = 0.0;
            out.hu[kw] = out.h[kw] * out.hu[ki] / out.h[ki];
        }
    }
    if let Some(k) = out.h.iter().position(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::Blowup {
            step: 0,
            reason: format!("depth {} at gridpoint ({}, {})", out.h[k], k % nx, k / nx),
        });
    }
    if let Some(k) = out.hu.iter().chain(&out.hv).position(|m| !m.is_finite()) {
        return Err(Error::Blowup {
            step: 0,
            reason: format!("non-finite momentum at flat index {}", k % n),
        });
    }
    Ok(out)
}

/// Velocities in geostrophic balance with `h`: `f u = -g h_y`, `f v = g h_x`.
pub fn geostrophic_init(h: &[f64], cfg: &SwConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = cfg.grid;
    let plane = Grid::Plane(grid);
    for j in 0..grid.ny {
        if cfg.coriolis(j as f64) == 0.0 {
            return Err(Error::Domain(format!(
                "Coriolis parameter vanishes on row {j}"
            )));
        }
    }
    let hx = plane.diff(h, Axis::X, Order::First);
    let hy = plane.diff(h, Axis::Y, Order::First);
    let mut u = vec![0.0; grid.len()];
    let mut v = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        let gf = cfg.g / cfg.coriolis(j as f64);
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            u[k] = -gf * hy[k];
            v[k] = if j == 0 || j == grid.ny - 1 {
                0.0
            } else {
                gf * hx[k]
            };
        }
    }
    Ok((u, v))
}

/// Parameters of the synthetic zonal jet used in place of reanalysis data.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSpec {
    pub h0: f64,
    pub dh: f64,
    /// e-folding half-width of the jet, in gridpoints.
    pub width: f64,
    pub ripple_amp: f64,
    pub ripple_modes: Vec<u32>,
    pub seed: u64,
}

impl Default for JetSpec {
    fn default() -> Self {
        Self {
            h0: 1.1e4,
            dh: 600.0,
            width: 5.0,
            ripple_amp: 20.0,
            ripple_modes: vec![4, 5, 6, 7],
            seed: 0,
        }
    }
}

/// `h0 - dh tanh((y - y0)/(width dy))` plus random-phase zonal ripples under a
/// meridional Gaussian envelope of the same width.
pub fn synthetic_jet_height(cfg: &SwConfig, jet: &JetSpec) -> Result<Vec<f64>> {
    if !(jet.h0 - jet.dh.abs() - jet.ripple_amp.abs() * jet.ripple_modes.len() as f64 > 0.0) {
        return Err(Error::config("jet parameters allow non-positive depth"));
    }
    let grid = cfg.grid;
    let y0 = 0.5 * (grid.ny as f64 - 1.0);
    let mut rng = StreamKey::new(jet.seed, 0, Purpose::JetRipple).rng();
    let phases: Vec<f64> = jet
        .ripple_modes
        .iter()
        .map(|_| rand::Rng::random::<f64>(&mut rng) * std::f64::consts::TAU)
        .collect();
    let mut h = vec![0.0; grid.len()];
    for j in 0..grid.ny {
        let s = (j as f64 - y0) / jet.width;
        let envelope = (-0.5 * s * s).exp();
        for i in 0..grid.nx {
            let x = i as f64 / grid.nx as f64;
            let ripple: f64 = jet
                .ripple_modes
                .iter()
                .zip(&phases)
                .map(|(&m, &p)| (std::f64::consts::TAU * m as f64 * x + p).cos())
                .sum();
            h[grid.idx(i, j)] = jet.h0 - jet.dh * s.tanh() + jet.ripple_amp * envelope * ripple;
        }
    }
    Ok(h)
}

/// `zeta = L_x(v) - L_y(u)`.
pub fn relative_vorticity(u: &[f64], v: &[f64], grid: &Grid2D) -> Vec<f64> {
    let plane = Grid::Plane(*grid);
    let vx = plane.diff(v, Axis::X, Order::First);
    let uy = plane.diff(u, Axis::Y, Order::First);
    vx.iter().zip(&uy).map(|(a, b)| a - b).collect()
}

/// Right-hand-side pieces of the vorticity equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaTerms {
    /// `-u L_x(zeta)`
    pub zonal_advection: Vec<f64>,
    /// `-v L_y(zeta)`
    pub meridional_advection: Vec<f64>,
    /// `-beta v`
    pub beta: Vec<f64>,
    /// `-(zeta + f)(L_x(u) + L_y(v))`
    pub stretching: Vec<f64>,
}

impl ZetaTerms {
    pub const NAMES: [&'static str; 4] = [
        "zonal_advection",
        "meridional_advection",
        "beta",
        "stretching",
    ];

    pub fn total(&self) -> Vec<f64> {
        (0..self.beta.len())
            .map(|k| {
                self.zonal_advection[k]
                    + self.meridional_advection[k]
                    + self.beta[k]
                    + self.stretching[k]
            })
            .collect()
    }

    pub fn into_named(self) -> [(&'static str, Vec<f64>); 4] {
        [
            (Self::NAMES[0], self.zonal_advection),
            (Self::NAMES[1], self.meridional_advection),
            (Self::NAMES[2], self.beta),
            (Self::NAMES[3], self.stretching),
        ]
    }
}

pub fn zeta_term_fields(s: &SwState, cfg: &SwConfig) -> ZetaTerms {
    let grid = cfg.grid;
    let plane = Grid::Plane(grid);
    let u = s.u();
    let v = s.v();
    let zeta = relative_vorticity(&u, &v, &grid);
    let zx = plane.diff(&zeta, Axis::X, Order::First);
    let zy = plane.diff(&zeta, Axis::Y, Order::First);
    let ux = plane.diff(&u, Axis::X, Order::First);
    let vy = plane.diff(&v, Axis::Y, Order::First);
    let n = grid.len();
    let mut t = ZetaTerms {
        zonal_advection: vec![0.0; n],
        meridional_advection: vec![0.0; n],
        beta: vec![0.0; n],
        stretching: vec![0.0; n],
    };
    for k in 0..n {
        let f = cfg.coriolis((k / grid.nx) as f64);
        t.zonal_advection[k] = -u[k] * zx[k];
        t.meridional_advection[k] = -v[k] * zy[k];
        t.beta[k] = -cfg.beta * v[k];
        t.stretching[k] = -(zeta[k] + f) * (ux[k] + vy[k]);
    }
    t
}

/// `1/2 h (u^2 + v^2)` in m^3/s^2 (energy per unit area divided by density).
pub fn kinetic_energy_field(s: &SwState) -> Vec<f64> {
    (0..s.h.len())
        .map(|k| 0.5 * (s.hu[k] * s.hu[k] + s.hv[k] * s.hv[k]) / s.h[k])
        .collect()
}

/// Localized random height perturbation added to every ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub ic: usize,
    pub jc: usize,
    /// Bump e-folding radius in gridpoints.
    pub radius: f64,
    /// Bump amplitude (m), multiplied by a standard normal per member.
    pub amplitude: f64,
    /// Pointwise standard deviation (m) of the correlated background noise.
    pub noise_amp: f64,
    /// Correlation length (gridpoints) of the background noise.
    pub noise_len: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            ic: 120,
            jc: 30,
            radius: 4.0,
            amplitude: 100.0,
            noise_amp: 1.0,
            noise_len: 5.0,
        }
    }
}

impl BlobSpec {
    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        if self.ic >= grid.nx || self.jc >= grid.ny {
            return Err(Error::config(format!(
                "blob centre ({}, {}) outside the {}x{} grid",
                self.ic, self.jc, grid.nx, grid.ny
            )));
        }
        if !(self.radius > 0.0) || self.noise_amp < 0.0 || !(self.noise_len > 0.0) {
            return Err(Error::config(
                "blob radius and noise length must be positive",
            ));
        }
        Ok(())
    }

    /// `exp(-((i - ic)^2 + (j - jc)^2) / (2 L^2))`, with the x distance taken periodically.
    pub fn bump(&self, grid: &Grid2D) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let di = periodic_distance(i, self.ic, grid.nx) as f64;
                let dj = j as f64 - self.jc as f64;
                out[grid.idx(i, j)] =
                    (-(di * di + dj * dj) / (2.0 * self.radius * self.radius)).exp();
            }
        }
        out
    }
}

fn periodic_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// White noise smoothed by a Gaussian kernel (periodic in x, truncated at the
/// walls) and rescaled to pointwise standard deviation `amp`.
pub fn correlated_noise(grid: &Grid2D, len: f64, amp: f64, key: StreamKey) -> Vec<f64> {
    let mut rng = key.rng();
    let white: Vec<f64> = (0..grid.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let reach = (4.0 * len).ceil() as isize;
    let weights: Vec<f64> = (-reach..=reach)
        .map(|d| (-(d * d) as f64 / (2.0 * len * len)).exp())
        .collect();
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let mut sx = vec![0.0; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for (w, d) in weights.iter().zip(-reach..=reach) {
                acc += w * white[(j * nx + (i + d).rem_euclid(nx)) as usize];
            }
            sx[(j * nx + i) as usize] = acc;
        }
    }
    // Variance of a sum of independent unit normals is the sum of squared weights.
    let xvar: f64 = if reach < nx {
        weights.iter().map(|w| w * w).sum()
    } else {
        let mut folded = vec![0.0; grid.nx];
        for (w, d) in weights.iter().zip(-reach..=reach) {
            folded[d.rem_euclid(nx) as usize] += w;
        }
        folded.iter().map(|w| w * w).sum()
    };
    let mut out = vec![0.0; grid.len()];
    for j in 0..ny {
        let mut yvar = 0.0;
        for (w, d) in weights.iter().zip(-reach..=reach) {
            if (0..ny).contains(&(j + d)) {
                yvar += w * w;
            }
        }
        let norm = amp / (xvar * yvar).sqrt();
        for i in 0..nx {
            let mut acc = 0.0;
            for (w, d) in weights.iter().zip(-reach..=reach) {
                let jj = j + d;
                if (0..ny).contains(&jj) {
                    acc += w * sx[(jj * nx + i) as usize];
                }
            }
            out[(j * nx + i) as usize] = acc * norm;
        }
    }
    out
}

/// `dh = eta1 + A eta2 exp(-r^2 / 2L^2)` for one ensemble member.
pub fn blob_perturbation(
    spec: &BlobSpec,
    grid: &Grid2D,
    seed: u64,
    member: u64,
) -> Result<Vec<f64>> {
    spec.validate(grid)?;
    let eta2: f64 =
        StandardNormal.sample(&mut StreamKey::new(seed, member, Purpose::BlobAmplitude).rng());
    let bump = spec.bump(grid);
    let mut dh: Vec<f64> = bump.iter().map(|b| spec.amplitude * eta2 * b).collect();
    if spec.noise_amp > 0.0 {
        let eta1 = correlated_noise(
            grid,
            spec.noise_len,
            spec.noise_amp,
            StreamKey::new(seed, member, Purpose::BlobNoise),
        );
        for (d, e) in dh.iter_mut().zip(eta1) {
            *d += e;
        }
    }
    Ok(dh)
}
