//! Regular grids and the finite-difference operators `L_x`, `L_xx`, `L_xxxx`.
//!
//! Fields are flat row-major vectors: index `j * nx + i` for 2D grids, `i` for 1D.
//! Central stencils wrap around periodic axes; at solid walls they switch to
//! one-sided second-order stencils.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Derivative order supported by [`Grid::diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
    Fourth,
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            4 => Ok(Order::Fourth),
            other => Err(Error::Domain(format!(
                "unsupported derivative order {other}"
            ))),
        }
    }
}

/// Periodic 1D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(n: usize, dx: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::config(format!("1D grid needs n >= 8, got {n}")));
        }
        if !(dx > 0.0) {
            return Err(Error::config("1D grid spacing must be positive"));
        }
        Ok(Self { n, dx })
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.dx
    }
}

/// 2D grid, optionally periodic in x and walled in y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x_periodic: bool,
    pub walls_y: bool,
}

impl Grid2D {
    pub fn new(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        x_periodic: bool,
        walls_y: bool,
    ) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::config(format!(
                "2D grid needs nx, ny >= 8, got {nx} x {ny}"
            )));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::config("2D grid spacings must be positive"));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            x_periodic,
            walls_y,
        })
    }

    /// Zonally periodic channel with solid north and south walls.
    pub fn channel(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::new(nx, ny, dx, dy, true, true)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Either grid kind; diagnostics are written against this.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Line(Grid1D),
    Plane(Grid2D),
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::Line(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::Plane(g)
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Line(g) => g.n,
            Grid::Plane(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial axes carried by the grid.
    pub fn axes(&self) -> &'static [Axis] {
        match self {
            Grid::Line(_) => &[Axis::X],
            Grid::Plane(_) => &[Axis::X, Axis::Y],
        }
    }

    /// Dimensions, slowest-varying first (`[n]` or `[ny, nx]`).
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Grid::Line(g) => vec![g.n],
            Grid::Plane(g) => vec![g.ny, g.nx],
        }
    }

    pub fn spacing(&self) -> Vec<f64> {
        match self {
            Grid::Line(g) => vec![g.dx],
            Grid::Plane(g) => vec![g.dy, g.dx],
        }
    }

    /// Finite-difference derivative of `field` along `axis`.
    pub fn diff(&self, field: &[f64], axis: Axis, order: Order) -> Vec<f64> {
        assert_eq!(field.len(), self.len(), "field does not match grid");
        match (self, axis) {
            (Grid::Line(g), Axis::X) => {
                let mut out = vec![0.0; g.n];
                diff_line(field, &mut out, g.dx, order, true);
                out
            }
            (Grid::Line(_), Axis::Y) => panic!("1D grid has no y axis"),
            (Grid::Plane(g), Axis::X) => {
                let mut out = vec![0.0; g.len()];
                for j in 0..g.ny {
                    let row = j * g.nx..(j + 1) * g.nx;
                    diff_line(
                        &field[row.clone()],
                        &mut out[row],
                        g.dx,
                        order,
                        g.x_periodic,
                    );
                }
                out
            }
            (Grid::Plane(g), Axis::Y) => {
                let mut out = vec![0.0; g.len()];
                let mut col = vec![0.0; g.ny];
                let mut res = vec![0.0; g.ny];
                for i in 0..g.nx {
                    for j in 0..g.ny {
                        col[j] = field[j * g.nx + i];
                    }
                    diff_line(&col, &mut res, g.dy, order, !g.walls_y);
                    for j in 0..g.ny {
                        out[j * g.nx + i] = res[j];
                    }
                }
                out
            }
        }
    }

    /// Sum of second derivatives over all axes.
    pub fn laplacian(&self, field: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for &axis in self.axes() {
            for (o, d) in out.iter_mut().zip(self.diff(field, axis, Order::Second)) {
                *o += d;
            }
        }
        out
    }
}

/// Derivative of a 1D periodic field: `stencil_dx` in the narrow sense.
pub fn stencil_dx(field: &[f64], grid: &Grid1D, order: Order) -> Vec<f64> {
    Grid::Line(*grid).diff(field, Axis::X, order)
}

/// Central interior stencil, one-sided second-order stencils at ends.
fn diff_line(f: &[f64], out: &mut [f64], h: f64, order: Order, periodic: bool) {
    let n = f.len();
    let at = |i: isize| -> f64 { f[i.rem_euclid(n as isize) as usize] };
    match order {
        Order::First => {
            let s = 1.0 / (2.0 * h);
            for i in 0..n {
                let ii = i as isize;
                out[i] = if periodic || (i > 0 && i < n - 1) {
                    (at(ii + 1) - at(ii - 1)) * s
                } else if i == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) * s
                } else {
                    (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * s
                };
            }
        }
        Order::Second => {
            let s = 1.0 / (h * h);
            for i in 0..n {
                let ii = i as isize;
                out[i] = if periodic || (i > 0 && i < n - 1) {
                    (at(ii + 1) - 2.0 * at(ii) + at(ii - 1)) * s
                } else if i == 0 {
                    (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * s
                } else {
                    (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * s
                };
            }
        }
        Order::Fourth => {
            let s = 1.0 / (h * h * h * h);
            const EDGE: [f64; 6] = [3.0, -14.0, 26.0, -24.0, 11.0, -2.0];
            const NEXT: [f64; 6] = [2.0, -9.0, 16.0, -14.0, 6.0, -1.0];
            let one_sided = |w: &[f64; 6], from_start: bool| -> f64 {
                w.iter()
                    .enumerate()
                    .map(|(k, c)| c * if from_start { f[k] } else { f[n - 1 - k] })
                    .sum::<f64>()
            };
            for i in 0..n {
                let ii = i as isize;
                out[i] = if periodic || (i > 1 && i < n - 2) {
                    {
                        // difference form keeps constants at exactly zero
                        let (d2, d1) = (at(ii + 2) - at(ii + 1), at(ii + 1) - at(ii));
                        let (d0, dm) = (at(ii) - at(ii - 1), at(ii - 1) - at(ii - 2));
                        (d2 - 3.0 * d1 + 3.0 * d0 - dm) * s
                    }
                } else if i == 0 {
                    one_sided(&EDGE, true) * s
                } else if i == 1 {
                    one_sided(&NEXT, true) * s
                } else if i == n - 1 {
                    one_sided(&EDGE, false) * s
                } else {
                    one_sided(&NEXT, false) * s
                };
            }
        }
    }
}
