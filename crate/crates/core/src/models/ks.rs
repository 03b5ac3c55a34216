//! Kuramoto–Sivashinsky equation `u_t = -u u_x - u_xx - u_xxxx` on a periodic line.
//!
//! Time stepping is pseudo-spectral ETDRK4 (Cox–Matthews, with the contour-
//! integral coefficients of Kassam & Trefethen) and 2/3-rule dealiasing of the
//! quadratic term. The information budget uses the radius-2 finite-difference
//! term fields from [`ks_term_fields`], evaluated on the spectral solution.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{stencil_dx, Grid1D, Order};
use crate::rng::{Purpose, StreamKey};

/// Grid spacing that puts the fastest-growing wavelength `2 pi sqrt(2)` on ~50 points.
pub const DEFAULT_DX: f64 = 2.0 * PI * SQRT_2 / 50.0;
pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_N: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub dealias: bool,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self {
            grid: Grid1D {
                n: DEFAULT_N,
                dx: DEFAULT_DX,
            },
            dt: DEFAULT_DT,
            dealias: true,
        }
    }
}

impl KsConfig {
    pub fn validate(&self) -> Result<()> {
        Grid1D::new(self.grid.n, self.grid.dx)?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("KS time step must be positive"));
        }
        // ETDRK4 treats the stiff linear part exactly; the explicit nonlinear
        // part needs the advective Courant number well below one for |u| ~ 3.
        if 3.0 * self.dt / self.grid.dx > 1.0 {
            return Err(Error::config(format!(
                "KS dt = {} too large for dx = {}",
                self.dt, self.grid.dx
            )));
        }
        Ok(())
    }
}

/// Precomputed ETDRK4 stepper for one configuration.
pub struct KsSolver {
    cfg: KsConfig,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    /// `-i k / 2` with the dealiasing mask applied (imaginary part only).
    g: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for KsSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KsSolver").field("cfg", &self.cfg).finish()
    }
}

impl Clone for KsSolver {
    fn clone(&self) -> Self {
        Self {
            cfg: self.cfg,
            fwd: Arc::clone(&self.fwd),
            inv: Arc::clone(&self.inv),
            e: self.e.clone(),
            e2: self.e2.clone(),
            q: self.q.clone(),
            f1: self.f1.clone(),
            f2: self.f2.clone(),
            f3: self.f3.clone(),
            g: self.g.clone(),
            buf: self.buf.clone(),
            scratch: self.scratch.clone(),
        }
    }
}

/// Angular wavenumber of FFT bin `j`.
pub fn wavenumber(j: usize, grid: &Grid1D) -> f64 {
    let n = grid.n;
    let signed = if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    };
    2.0 * PI * signed / grid.length()
}

impl KsSolver {
    pub fn new(cfg: KsConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.grid.n;
        let h = cfg.dt;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());

        const M: usize = 32;
        let roots: Vec<Complex64> = (1..=M)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 - 0.5) / M as f64))
            .collect();

        let (mut e, mut e2, mut q, mut f1, mut f2, mut f3, mut g) = (
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        );
        let cutoff = n / 3;
        for j in 0..n {
            let k = wavenumber(j, &cfg.grid);
            let lin = k * k - k.powi(4);
            e[j] = (h * lin).exp();
            e2[j] = (h * lin / 2.0).exp();
            let mut acc = [0.0f64; 4];
            for r in &roots {
                let lr = Complex64::new(h * lin, 0.0) + r;
                let ex = lr.exp();
                let lr3 = lr * lr * lr;
                acc[0] += (((lr / 2.0).exp() - 1.0) / lr).re;
                acc[1] += ((-4.0 - lr + ex * (4.0 - 3.0 * lr + lr * lr)) / lr3).re;
                acc[2] += ((2.0 + lr + ex * (-2.0 + lr)) / lr3).re;
                acc[3] += ((-4.0 - 3.0 * lr - lr * lr + ex * (4.0 - lr)) / lr3).re;
            }
            q[j] = h * acc[0] / M as f64;
            f1[j] = h * acc[1] / M as f64;
            f2[j] = h * acc[2] / M as f64;
            f3[j] = h * acc[3] / M as f64;
            let signed = if j <= n / 2 { j } else { n - j };
            let keep = !cfg.dealias || signed <= cutoff;
            // Nyquist derivative is set to zero.
            g[j] = if keep && !(n.is_multiple_of(2) && j == n / 2) {
                -0.5 * k
            } else {
                0.0
            };
        }
        Ok(Self {
            cfg,
            fwd,
            inv,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            g,
            buf: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn config(&self) -> &KsConfig {
        &self.cfg
    }

    fn to_spectral(&mut self, u: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process_with_scratch(&mut v, &mut self.scratch);
        v
    }

    /// Nonlinear term `-1/2 d/dx (u^2)` in spectral space.
    fn nonlinear(&mut self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let inv_n = 1.0 / n as f64;
        self.buf.copy_from_slice(v);
        self.inv
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for c in self.buf.iter_mut() {
            let re = c.re * inv_n;
            *c = Complex64::new(re * re, 0.0);
        }
        self.fwd
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        self.buf
            .iter()
            .zip(&self.g)
            .map(|(c, &g)| Complex64::new(0.0, g) * c)
            .collect()
    }

    /// Advance `u` in place by one time step.
    pub fn step(&mut self, u: &mut [f64]) -> Result<()> {
        assert_eq!(u.len(), self.cfg.grid.n);
        let v = self.to_spectral(u);
        let nv = self.nonlinear(&v);
        let a: Vec<Complex64> = (0..v.len())
            .map(|j| v[j] * self.e2[j] + nv[j] * self.q[j])
            .collect();
        let na = self.nonlinear(&a);
        let b: Vec<Complex64> = (0..v.len())
            .map(|j| v[j] * self.e2[j] + na[j] * self.q[j])
            .collect();
        let nb = self.nonlinear(&b);
        let c: Vec<Complex64> = (0..v.len())
            .map(|j| a[j] * self.e2[j] + (nb[j] * 2.0 - nv[j]) * self.q[j])
            .collect();
        let nc = self.nonlinear(&c);
        let mut next: Vec<Complex64> = (0..v.len())
            .map(|j| {
                v[j] * self.e[j]
                    + nv[j] * self.f1[j]
                    + (na[j] + nb[j]) * (2.0 * self.f2[j])
                    + nc[j] * self.f3[j]
            })
            .collect();
        self.inv.process_with_scratch(&mut next, &mut self.scratch);
        let inv_n = 1.0 / u.len() as f64;
        for (dst, c) in u.iter_mut().zip(&next) {
            *dst = c.re * inv_n;
        }
        if let Some(pos) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::Blowup {
                step: 0,
                reason: format!("non-finite KS value at gridpoint {pos}"),
            });
        }
        Ok(())
    }
}

/// One ETDRK4 step. Builds the coefficient tables on every call; use
/// [`KsSolver`] for trajectories.
pub fn ks_step(u: &[f64], cfg: &KsConfig) -> Result<Vec<f64>> {
    let mut solver = KsSolver::new(*cfg)?;
    let mut out = u.to_vec();
    solver.step(&mut out)?;
    Ok(out)
}

/// Finite-difference pieces of the KS tendency.
#[derive(Debug, Clone, PartialEq)]
pub struct KsTerms {
    /// `-u L_x(u)`
    pub advection: Vec<f64>,
    /// `-L_xx(u)`
    pub antidiffusion: Vec<f64>,
    /// `-L_xxxx(u)`
    pub hyperdiffusion: Vec<f64>,
}

impl KsTerms {
    pub const NAMES: [&'static str; 3] = ["advection", "antidiffusion", "hyperdiffusion"];

    pub fn total(&self) -> Vec<f64> {
        (0..self.advection.len())
            .map(|i| self.advection[i] + self.antidiffusion[i] + self.hyperdiffusion[i])
            .collect()
    }

    pub fn into_named(self) -> [(&'static str, Vec<f64>); 3] {
        [
            (Self::NAMES[0], self.advection),
            (Self::NAMES[1], self.antidiffusion),
            (Self::NAMES[2], self.hyperdiffusion),
        ]
    }
}

pub fn ks_term_fields(u: &[f64], grid: &Grid1D) -> KsTerms {
    let ux = stencil_dx(u, grid, Order::First);
    let uxx = stencil_dx(u, grid, Order::Second);
    let uxxxx = stencil_dx(u, grid, Order::Fourth);
    KsTerms {
        advection: u.iter().zip(&ux).map(|(a, b)| -a * b).collect(),
        antidiffusion: uxx.iter().map(|v| -v).collect(),
        hyperdiffusion: uxxxx.iter().map(|v| -v).collect(),
    }
}

/// The cos^2 bump initial ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub center: usize,
    pub half_width: usize,
    /// Period (in gridpoints) of the cos^2 argument `2 pi (i - center) / period`.
    pub period: f64,
    pub amp_mean: f64,
    pub amp_variance: f64,
}

impl Default for BumpSpec {
    fn default() -> Self {
        Self {
            center: 525,
            half_width: 25,
            period: 100.0,
            amp_mean: 1.0,
            amp_variance: 0.1,
        }
    }
}

impl BumpSpec {
    pub fn shape(&self, n: usize) -> Result<Vec<f64>> {
        let hi = self.center + self.half_width;
        if hi >= n || self.half_width > self.center {
            return Err(Error::config(format!(
                "bump [{}, {hi}] does not fit a grid of {n} points",
                self.center - self.half_width.min(self.center)
            )));
        }
        Ok((0..n)
            .map(|i| {
                if i + self.half_width >= self.center && i <= hi {
                    let arg = 2.0 * PI * (i as f64 - self.center as f64) / self.period;
                    arg.cos().powi(2)
                } else {
                    0.0
                }
            })
            .collect())
    }

    /// Amplitude of member `member`, drawn from its own stream.
    pub fn amplitude(&self, seed: u64, member: u64) -> f64 {
        let mut rng = StreamKey::new(seed, member, Purpose::KsAmplitude).rng();
        Normal::new(self.amp_mean, self.amp_variance.sqrt())
            .expect("valid normal")
            .sample(&mut rng)
    }
}

/// Member `k` is `A_k cos^2(2 pi (i - 525)/100)` on `[500, 550]`, zero elsewhere.
pub fn ks_initial_ensemble(
    n_members: usize,
    seed: u64,
    grid: &Grid1D,
    bump: &BumpSpec,
) -> Result<Vec<Vec<f64>>> {
    let shape = bump.shape(grid.n)?;
    Ok((0..n_members as u64)
        .map(|k| {
            let a = bump.amplitude(seed, k);
            shape.iter().map(|s| a * s).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(grid: &Grid1D, j: usize, eps: f64) -> Vec<f64> {
        let k = wavenumber(j, grid);
        (0..grid.n)
            .map(|i| eps * (k * i as f64 * grid.dx).sin())
            .collect()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let cfg = KsConfig::default();
        let u = ks_step(&vec![0.0; cfg.grid.n], &cfg).unwrap();
        assert!(u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_mode_linear_growth() {
        let cfg = KsConfig::default();
        for j in [10, 29, 60] {
            let k = wavenumber(j, &cfg.grid);
            let u0 = mode(&cfg.grid, j, 1e-8);
            let u1 = ks_step(&u0, &cfg).unwrap();
            let ratio = u1.iter().zip(&u0).map(|(a, b)| a * b).sum::<f64>()
                / u0.iter().map(|b| b * b).sum::<f64>();
            let exact = ((k * k - k.powi(4)) * cfg.dt).exp();
            assert!(
                ((ratio - exact) / exact).abs() < 1e-3,
                "j={j} {ratio} vs {exact}"
            );
        }
    }

    #[test]
    fn mean_is_conserved() {
        let cfg = KsConfig::default();
        let mut solver = KsSolver::new(cfg).unwrap();
        let mut u: Vec<f64> = (0..cfg.grid.n)
            .map(|i| 0.3 + (i as f64 * 0.05).sin() + 0.5 * (i as f64 * 0.013).cos())
            .collect();
        let mean = |u: &[f64]| u.iter().sum::<f64>() / u.len() as f64;
        let mut prev = mean(&u);
        for _ in 0..200 {
            solver.step(&mut u).unwrap();
            let m = mean(&u);
            assert!((m - prev).abs() <= 1e-10);
            prev = m;
        }
    }

    #[test]
    fn term_fields_vanish_on_constants() {
        let g = Grid1D::new(64, 0.2).unwrap();
        let t = ks_term_fields(&vec![2.5; 64], &g);
        assert!(t.total().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linearized_term_sum_matches_growth_rate() {
        let n = 256;
        let j = 8usize;
        let dx = 2.0 * PI * j as f64 / (n as f64 * 0.5);
        let g = Grid1D::new(n, dx).unwrap();
        let k = wavenumber(j, &g);
        assert!((k - 0.5).abs() < 1e-12);
        let eps = 1e-6;
        let u = mode(&g, j, eps);
        let total = ks_term_fields(&u, &g).total();
        for i in 0..n {
            let exact = (k * k - k.powi(4)) * u[i];
            let scale = eps * (k * k - k.powi(4)).abs();
            assert!((total[i] - exact).abs() <= 0.01 * scale, "i={i}");
        }
    }

    #[test]
    fn advection_term_is_half_sine_of_double_angle() {
        let n = 256;
        let j = 8usize;
        let dx = 0.3 / (2.0 * PI * j as f64 / n as f64);
        let g = Grid1D::new(n, dx).unwrap();
        let k = wavenumber(j, &g);
        let u = mode(&g, j, 1.0);
        let adv = ks_term_fields(&u, &g).advection;
        // central difference of sin(kx) is sin(k dx)/dx cos(kx)
        let disc = (k * dx).sin() / (k * dx);
        for i in 0..n {
            let x = i as f64 * dx;
            let exact = -(k / 2.0) * (2.0 * k * x).sin();
            assert!((adv[i] - exact * disc).abs() < 1e-12);
            assert!((adv[i] - exact).abs() <= 0.02 * k / 2.0);
        }
    }

    #[test]
    fn initial_ensemble_shape() {
        let cfg = KsConfig::default();
        let bump = BumpSpec::default();
        let ens = ks_initial_ensemble(200, 42, &cfg.grid, &bump).unwrap();
        for (k, m) in ens.iter().enumerate() {
            let a = bump.amplitude(42, k as u64);
            assert_eq!(m[525], a);
            assert!(m[500].abs() < 1e-30 && m[550].abs() < 1e-30);
            assert_eq!(m[499], 0.0);
            assert_eq!(m[551], 0.0);
        }
        let mean = ens.iter().map(|m| m[525]).sum::<f64>() / 200.0;
        assert!(
            (mean - 1.0).abs() <= 3.0 * (0.1f64 / 200.0).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn small_grids_reject_the_default_bump() {
        let g = Grid1D::new(512, DEFAULT_DX).unwrap();
        assert!(ks_initial_ensemble(4, 1, &g, &BumpSpec::default()).is_err());
    }

    #[test]
    fn long_run_stays_bounded() {
        let cfg = KsConfig::default();
        let mut solver = KsSolver::new(cfg).unwrap();
        let mut rng = StreamKey::new(3, 0, Purpose::Test).rng();
        let noise = Normal::new(0.0, 1e-2).unwrap();
        let mut u: Vec<f64> = (0..cfg.grid.n).map(|_| noise.sample(&mut rng)).collect();
        let mut sup = 0.0f64;
        for _ in 0..100_000 {
            solver.step(&mut u).unwrap();
            sup = sup.max(u.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        assert!(sup < 10.0, "sup {sup}");
        assert!(
            sup > 0.5,
            "solution should have left the noise floor, sup {sup}"
        );
    }
}
