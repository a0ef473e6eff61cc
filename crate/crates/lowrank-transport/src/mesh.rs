//! Periodic staggered 2D grid, finite-difference stencils, and the discrete
//! spatial inner product.
//!
//! Unknown placement follows the staggered layout that makes the diffusion
//! limit land on a compact 5-point stencil:
//!
//! - `rho` lives at cell vertices `(x_k, y_l)` and cell centers
//!   `(x_{k+1/2}, y_{l+1/2})`,
//! - `g` (and the spatial low-rank factors) lives at the face centers
//!   `(x_{k+1/2}, y_l)` and `(x_k, y_{l+1/2})`.
//!
//! All four point families carry `Nx * Ny` points under periodic
//! identification; fields store each family as a contiguous row-major block
//! (`l` outer, `k` inner). Periodic wrap is index arithmetic modulo
//! `Nx`/`Ny`; no ghost layers.

use crate::error::{Error, Result};
use crate::util::Accumulator;

/// Geometry of the periodic staggered grid on `[a,b] x [c,d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredGrid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

/// The two point families carrying `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoFamily {
    Vertex,
    Center,
}

/// The two point families carrying `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GFamily {
    XFace,
    YFace,
}

/// Spatial direction of a derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

/// Upwind side: `Plus` biases the stencil backward (for positive advection
/// speed), `Minus` forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl StaggeredGrid {
    /// The second-order one-sided stencils need two neighbors per side, so
    /// fewer than 4 cells per direction would self-overlap under periodicity.
    pub fn new(a: f64, b: f64, c: f64, d: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(b > a && d > c) {
            return Err(Error::InvalidConfig {
                field: "domain".into(),
                detail: format!("need b > a and d > c, got [{a},{b}]x[{c},{d}]"),
            });
        }
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidConfig {
                field: "nx/ny".into(),
                detail: format!("need nx >= 4 and ny >= 4, got {nx}x{ny}"),
            });
        }
        let dx = (b - a) / nx as f64;
        let dy = (d - c) / ny as f64;
        Ok(Self {
            a,
            b,
            c,
            d,
            nx,
            ny,
            dx,
            dy,
        })
    }

    /// Unit square helper used throughout the tests.
    pub fn unit(nx: usize, ny: usize) -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0, nx, ny).expect("valid unit grid")
    }

    /// Points per family.
    #[inline]
    pub fn family_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Total points over both families of a field (macro or face).
    #[inline]
    pub fn field_len(&self) -> usize {
        2 * self.family_len()
    }

    #[inline]
    pub fn idx(&self, k: usize, l: usize) -> usize {
        debug_assert!(k < self.nx && l < self.ny);
        l * self.nx + k
    }

    /// Quadrature weight of a single grid point in the midpoint-rule spatial
    /// inner product (uniform over both families).
    #[inline]
    pub fn point_weight(&self) -> f64 {
        0.5 * self.dx * self.dy
    }

    pub fn rho_coord(&self, family: RhoFamily, k: usize, l: usize) -> (f64, f64) {
        match family {
            RhoFamily::Vertex => (self.a + k as f64 * self.dx, self.c + l as f64 * self.dy),
            RhoFamily::Center => (
                self.a + (k as f64 + 0.5) * self.dx,
                self.c + (l as f64 + 0.5) * self.dy,
            ),
        }
    }

    pub fn g_coord(&self, family: GFamily, k: usize, l: usize) -> (f64, f64) {
        match family {
            GFamily::XFace => (
                self.a + (k as f64 + 0.5) * self.dx,
                self.c + l as f64 * self.dy,
            ),
            GFamily::YFace => (
                self.a + k as f64 * self.dx,
                self.c + (l as f64 + 0.5) * self.dy,
            ),
        }
    }
}

#[inline]
fn wrap_dec(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

#[inline]
fn wrap_inc(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

/// Scalar field on the two `rho` families (vertices then centers).
#[derive(Debug, Clone, PartialEq)]
pub struct MacroField {
    pub grid: StaggeredGrid,
    data: Vec<f64>,
}

/// Scalar field on the two `g` families (x-faces then y-faces).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub grid: StaggeredGrid,
    data: Vec<f64>,
}

macro_rules! field_common {
    ($t:ident) => {
        impl $t {
            pub fn zeros(grid: StaggeredGrid) -> Self {
                Self {
                    grid,
                    data: vec![0.0; grid.field_len()],
                }
            }

            pub fn from_data(grid: StaggeredGrid, data: Vec<f64>) -> Result<Self> {
                if data.len() != grid.field_len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} field needs {} values, got {}",
                        stringify!($t),
                        grid.field_len(),
                        data.len()
                    )));
                }
                Ok(Self { grid, data })
            }

            #[inline]
            pub fn data(&self) -> &[f64] {
                &self.data
            }

            #[inline]
            pub fn data_mut(&mut self) -> &mut [f64] {
                &mut self.data
            }

            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|v| v.is_finite())
            }

            /// In-place `self += alpha * other`.
            pub fn axpy(&mut self, alpha: f64, other: &Self) {
                assert_eq!(self.data.len(), other.data.len());
                for (s, o) in self.data.iter_mut().zip(&other.data) {
                    *s += alpha * *o;
                }
            }

            pub fn scale(&mut self, alpha: f64) {
                for s in self.data.iter_mut() {
                    *s *= alpha;
                }
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        }
    };
}

field_common!(MacroField);
field_common!(FaceField);

impl MacroField {
    /// Sample a function of physical coordinates on both families.
    pub fn from_fn(grid: StaggeredGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for family in [RhoFamily::Vertex, RhoFamily::Center] {
            for l in 0..grid.ny {
                for k in 0..grid.nx {
                    let (x, y) = grid.rho_coord(family, k, l);
                    *field.at_mut(family, k, l) = f(x, y);
                }
            }
        }
        field
    }

    #[inline]
    fn offset(family: RhoFamily, grid: &StaggeredGrid) -> usize {
        match family {
            RhoFamily::Vertex => 0,
            RhoFamily::Center => grid.family_len(),
        }
    }

    #[inline]
    pub fn at(&self, family: RhoFamily, k: usize, l: usize) -> f64 {
        self.data[Self::offset(family, &self.grid) + self.grid.idx(k, l)]
    }

    #[inline]
    pub fn at_mut(&mut self, family: RhoFamily, k: usize, l: usize) -> &mut f64 {
        let i = Self::offset(family, &self.grid) + self.grid.idx(k, l);
        &mut self.data[i]
    }

    pub fn family(&self, family: RhoFamily) -> &[f64] {
        let o = Self::offset(family, &self.grid);
        &self.data[o..o + self.grid.family_len()]
    }

    /// Plain sum of values over one family (compensated).
    pub fn family_sum(&self, family: RhoFamily) -> f64 {
        let mut acc = Accumulator::new();
        for &v in self.family(family) {
            acc.add(v);
        }
        acc.value()
    }

    /// Central difference of `rho` evaluated on the face families.
    ///
    /// In direction `x` the x-face value couples the two adjacent vertices
    /// and the y-face value couples the two adjacent centers (and mirrored
    /// for direction `y`): the faces sit exactly halfway between them, so
    /// the quotient over a single spacing is the second-order centered
    /// derivative on this staggered layout.
    pub fn d_central(&self, dir: Dir) -> FaceField {
        let mut out = FaceField::zeros(self.grid);
        self.d_central_into(dir, out.data_mut());
        out
    }

    pub(crate) fn d_central_into(&self, dir: Dir, out: &mut [f64]) {
        let g = self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let m = g.family_len();
        let vert = self.family(RhoFamily::Vertex);
        let cent = self.family(RhoFamily::Center);
        let (xf, yf) = out.split_at_mut(m);
        match dir {
            Dir::X => {
                let inv = 1.0 / g.dx;
                for l in 0..ny {
                    let row = l * nx;
                    for k in 0..nx {
                        let kp = wrap_inc(k, nx);
                        let km = wrap_dec(k, nx);
                        xf[row + k] = (vert[row + kp] - vert[row + k]) * inv;
                        yf[row + k] = (cent[row + k] - cent[row + km]) * inv;
                    }
                }
            }
            Dir::Y => {
                let inv = 1.0 / g.dy;
                for l in 0..ny {
                    let row = l * nx;
                    let rp = wrap_inc(l, ny) * nx;
                    let rm = wrap_dec(l, ny) * nx;
                    for k in 0..nx {
                        xf[row + k] = (cent[row + k] - cent[rm + k]) * inv;
                        yf[row + k] = (vert[rp + k] - vert[row + k]) * inv;
                    }
                }
            }
        }
    }
}

impl FaceField {
    pub fn from_fn(grid: StaggeredGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for family in [GFamily::XFace, GFamily::YFace] {
            for l in 0..grid.ny {
                for k in 0..grid.nx {
                    let (x, y) = grid.g_coord(family, k, l);
                    *field.at_mut(family, k, l) = f(x, y);
                }
            }
        }
        field
    }

    #[inline]
    fn offset(family: GFamily, grid: &StaggeredGrid) -> usize {
        match family {
            GFamily::XFace => 0,
            GFamily::YFace => grid.family_len(),
        }
    }

    #[inline]
    pub fn at(&self, family: GFamily, k: usize, l: usize) -> f64 {
        self.data[Self::offset(family, &self.grid) + self.grid.idx(k, l)]
    }

    #[inline]
    pub fn at_mut(&mut self, family: GFamily, k: usize, l: usize) -> &mut f64 {
        let i = Self::offset(family, &self.grid) + self.grid.idx(k, l);
        &mut self.data[i]
    }

    pub fn family(&self, family: GFamily) -> &[f64] {
        let o = Self::offset(family, &self.grid);
        &self.data[o..o + self.grid.family_len()]
    }

    /// Second-order one-sided (upwind) derivative within each face family.
    pub fn d_upwind(&self, dir: Dir, side: Side) -> FaceField {
        let mut out = FaceField::zeros(self.grid);
        d_upwind_into(&self.grid, &self.data, dir, side, out.data_mut());
        out
    }

    /// Same-family central difference over a double spacing.
    pub fn d_central(&self, dir: Dir) -> FaceField {
        let mut out = FaceField::zeros(self.grid);
        d_central_face_into(&self.grid, &self.data, dir, out.data_mut());
        out
    }
}

/// Raw-slice kernel behind [`FaceField::d_upwind`]; operates on a full
/// two-family data block so matrix columns can be differentiated in place.
pub(crate) fn d_upwind_into(grid: &StaggeredGrid, src: &[f64], dir: Dir, side: Side, out: &mut [f64]) {
    debug_assert_eq!(src.len(), grid.field_len());
    debug_assert_eq!(out.len(), grid.field_len());
    let (nx, ny) = (grid.nx, grid.ny);
    let m = grid.family_len();
    match dir {
        Dir::X => {
            let inv = 0.5 / grid.dx;
            for block in 0..2 {
                let s = &src[block * m..(block + 1) * m];
                let o = &mut out[block * m..(block + 1) * m];
                for l in 0..ny {
                    let row = l * nx;
                    for k in 0..nx {
                        o[row + k] = match side {
                            Side::Plus => {
                                let k1 = wrap_dec(k, nx);
                                let k2 = wrap_dec(k1, nx);
                                (3.0 * s[row + k] - 4.0 * s[row + k1] + s[row + k2]) * inv
                            }
                            Side::Minus => {
                                let k1 = wrap_inc(k, nx);
                                let k2 = wrap_inc(k1, nx);
                                (-3.0 * s[row + k] + 4.0 * s[row + k1] - s[row + k2]) * inv
                            }
                        };
                    }
                }
            }
        }
        Dir::Y => {
            let inv = 0.5 / grid.dy;
            for block in 0..2 {
                let s = &src[block * m..(block + 1) * m];
                let o = &mut out[block * m..(block + 1) * m];
                for l in 0..ny {
                    let row = l * nx;
                    let (r1, r2) = match side {
                        Side::Plus => {
                            let l1 = wrap_dec(l, ny);
                            (l1 * nx, wrap_dec(l1, ny) * nx)
                        }
                        Side::Minus => {
                            let l1 = wrap_inc(l, ny);
                            (l1 * nx, wrap_inc(l1, ny) * nx)
                        }
                    };
                    let sgn = match side {
                        Side::Plus => 1.0,
                        Side::Minus => -1.0,
                    };
                    for k in 0..nx {
                        o[row + k] =
                            sgn * (3.0 * s[row + k] - 4.0 * s[r1 + k] + s[r2 + k]) * inv;
                    }
                }
            }
        }
    }
}

/// Raw-slice kernel behind [`FaceField::d_central`] (spacing `2*dx`/`2*dy`).
pub(crate) fn d_central_face_into(grid: &StaggeredGrid, src: &[f64], dir: Dir, out: &mut [f64]) {
    debug_assert_eq!(src.len(), grid.field_len());
    let (nx, ny) = (grid.nx, grid.ny);
    let m = grid.family_len();
    match dir {
        Dir::X => {
            let inv = 0.5 / grid.dx;
            for block in 0..2 {
                let s = &src[block * m..(block + 1) * m];
                let o = &mut out[block * m..(block + 1) * m];
                for l in 0..ny {
                    let row = l * nx;
                    for k in 0..nx {
                        let kp = wrap_inc(k, nx);
                        let km = wrap_dec(k, nx);
                        o[row + k] = (s[row + kp] - s[row + km]) * inv;
                    }
                }
            }
        }
        Dir::Y => {
            let inv = 0.5 / grid.dy;
            for block in 0..2 {
                let s = &src[block * m..(block + 1) * m];
                let o = &mut out[block * m..(block + 1) * m];
                for l in 0..ny {
                    let row = l * nx;
                    let rp = wrap_inc(l, ny) * nx;
                    let rm = wrap_dec(l, ny) * nx;
                    for k in 0..nx {
                        o[row + k] = (s[rp + k] - s[rm + k]) * inv;
                    }
                }
            }
        }
    }
}

/// Flux-form divergence of a face vector field `(Fx, Fy)`, evaluated on both
/// `rho` families.
///
/// At vertices the x-part reads the two adjacent x-faces and the y-part the
/// two adjacent y-faces; at centers the roles of the face families swap,
/// because there the x-neighbors along the cell midline are y-face points.
pub fn div_faces(fx: &FaceField, fy: &FaceField) -> MacroField {
    assert_eq!(fx.grid, fy.grid, "div_faces: grids differ");
    let g = fx.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (ivx, ivy) = (1.0 / g.dx, 1.0 / g.dy);
    let fx_xf = fx.family(GFamily::XFace);
    let fx_yf = fx.family(GFamily::YFace);
    let fy_xf = fy.family(GFamily::XFace);
    let fy_yf = fy.family(GFamily::YFace);
    let mut out = MacroField::zeros(g);
    let m = g.family_len();
    let (vert, cent) = out.data.split_at_mut(m);
    for l in 0..ny {
        let row = l * nx;
        let rm = wrap_dec(l, ny) * nx;
        let rp = wrap_inc(l, ny) * nx;
        for k in 0..nx {
            let km = wrap_dec(k, nx);
            let kp = wrap_inc(k, nx);
            vert[row + k] = (fx_xf[row + k] - fx_xf[row + km]) * ivx
                + (fy_yf[row + k] - fy_yf[rm + k]) * ivy;
            cent[row + k] = (fx_yf[row + kp] - fx_yf[row + k]) * ivx
                + (fy_xf[rp + k] - fy_xf[row + k]) * ivy;
        }
    }
    out
}

/// Midpoint-rule spatial inner product of two face fields:
/// `(1/2) dx dy * sum over both families of F * G`, compensated.
pub fn inner_x(f: &FaceField, g: &FaceField) -> f64 {
    assert_eq!(f.grid, g.grid, "inner_x: grids differ");
    inner_x_slices(&f.grid, &f.data, &g.data)
}

pub(crate) fn inner_x_slices(grid: &StaggeredGrid, f: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), grid.field_len());
    debug_assert_eq!(g.len(), grid.field_len());
    let mut acc = Accumulator::new();
    for (a, b) in f.iter().zip(g) {
        acc.add(a * b);
    }
    grid.point_weight() * acc.value()
}
