//! Smooth window and the windowed contrast extension `m_e = m~ * eta`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::grid::{ComplexField, GridSpec, Point};

/// Radii of the flat region and of the support of the 1D window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub r_in: f64,
    pub r_out: f64,
}

impl WindowParams {
    pub fn new(r_in: f64, r_out: f64) -> Result<Self> {
        let p = WindowParams { r_in, r_out };
        if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
            return Err(Error::InvalidWindow(format!(
                "need 0 < r_in < r_out, got r_in = {r_in}, r_out = {r_out}"
            )));
        }
        Ok(p)
    }

    /// Checks `r_out <= a` and that `shape` sits inside the flat square.
    pub fn validate(&self, shape: &Shape, a: f64) -> Result<()> {
        WindowParams::new(self.r_in, self.r_out)?;
        if self.r_out > a {
            return Err(Error::InvalidWindow(format!(
                "r_out = {} exceeds a = {a}",
                self.r_out
            )));
        }
        let [lo, hi] = shape.bounding_box();
        let extent = lo.iter().chain(hi.iter()).map(|v| v.abs()).fold(0.0, f64::max);
        if extent > self.r_in {
            return Err(Error::WindowTooTight {
                extent,
                r_in: self.r_in,
            });
        }
        Ok(())
    }
}

/// One-dimensional window: 1 on `|x| <= r_in`, 0 on `|x| >= r_out`,
/// `exp(2 e^{-1/r} / (r - 1))` in between, `r = (|x| - r_in)/(r_out - r_in)`.
pub fn zeta(x: f64, p: &WindowParams) -> f64 {
    let ax = x.abs();
    if ax <= p.r_in {
        return 1.0;
    }
    if ax >= p.r_out {
        return 0.0;
    }
    let r = (ax - p.r_in) / (p.r_out - p.r_in);
    // e^{-1/r} underflows to 0 for r below ~1/745, giving the limit 1
    (2.0 * (-1.0 / r).exp() / (r - 1.0)).exp()
}

/// Tensor-product window `eta(x) = zeta(x1) zeta(x2)`.
pub fn eta(x: Point, p: &WindowParams) -> f64 {
    zeta(x[0], p) * zeta(x[1], p)
}

/// Smooth extension `m~` of the contrast to the whole cell.
#[derive(Clone)]
pub enum ContrastExtension {
    Constant(f64),
    /// `(x1^2 + x2^2) exp(-x1^2 - x2^2)`.
    RadialGaussianMoment,
    Custom {
        label: String,
        func: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ContrastExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContrastExtension::Constant(v) => write!(f, "Constant({v})"),
            ContrastExtension::RadialGaussianMoment => write!(f, "RadialGaussianMoment"),
            ContrastExtension::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl ContrastExtension {
    pub fn eval(&self, x: Point) -> f64 {
        match self {
            ContrastExtension::Constant(v) => *v,
            ContrastExtension::RadialGaussianMoment => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                r2 * (-r2).exp()
            }
            ContrastExtension::Custom { func, .. } => func(x),
        }
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(self, ContrastExtension::Constant(v) if *v == 0.0)
    }
}

/// Contrast `m = 1 - mu^2` on `D`, given by its smooth extension.
#[derive(Clone, Debug)]
pub struct ContrastSpec {
    pub extension: ContrastExtension,
    pub shape: Shape,
}

impl ContrastSpec {
    pub fn new(extension: ContrastExtension, shape: Shape) -> Self {
        ContrastSpec { extension, shape }
    }

    /// Physical contrast: `m~` on `D`, zero outside.
    pub fn contrast(&self, x: Point) -> f64 {
        if self.shape.contains(x) {
            self.extension.eval(x)
        } else {
            0.0
        }
    }
}

/// Samples `m_e = m~ * eta` at every grid node.
pub fn sample_contrast(c: &ContrastSpec, p: &WindowParams, g: &GridSpec) -> Result<ComplexField> {
    p.validate(&c.shape, g.a())?;
    Ok(ComplexField::from_fn(*g, |x| {
        let w = eta(x, p);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(c.extension.eval(x) * w, 0.0)
        }
    }))
}
