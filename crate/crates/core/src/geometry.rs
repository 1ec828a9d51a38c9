//! Scatterer geometry and the Fourier coefficients of its indicator.
//!
//! The indicator `chi_D` is expanded on the period cell `[-a, a]^2` as
//! `chi_D(x) ~ sum_{j,k} c_jk exp(i pi (j x1 + k x2) / a)`, so
//! `c_jk = (1/4a^2) int_D exp(-i kvec . x) dx` with `kvec = (pi j/a, pi k/a)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Point;
use crate::numint::GaussLegendre;
use crate::specfun;

/// One oriented piece of a closed boundary loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryElement {
    Segment {
        from: Point,
        to: Point,
    },
    /// Circular arc `center + radius (cos t, sin t)` for `t` from
    /// `start_angle` to `start_angle + sweep`; negative sweep runs clockwise.
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl BoundaryElement {
    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(1.0)
    }

    /// Point at parameter `t` in `[0, 1]`.
    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            BoundaryElement::Segment { from, to } => {
                [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])]
            }
            BoundaryElement::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let phi = start_angle + t * sweep;
                [center[0] + radius * phi.cos(), center[1] + radius * phi.sin()]
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            BoundaryElement::Segment { from, to } => (to[0] - from[0]).hypot(to[1] - from[1]),
            BoundaryElement::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// `(1/2) int (x dy - y dx)` along the element.
    fn area_contribution(&self) -> f64 {
        match *self {
            BoundaryElement::Segment { from, to } => 0.5 * (from[0] * to[1] - to[0] * from[1]),
            BoundaryElement::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let (p0, p1) = (start_angle, start_angle + sweep);
                0.5 * (radius * center[0] * (p1.sin() - p0.sin())
                    - radius * center[1] * (p1.cos() - p0.cos())
                    + radius * radius * sweep)
            }
        }
    }

    fn distance(&self, x: Point) -> f64 {
        match *self {
            BoundaryElement::Segment { from, to } => {
                let d = [to[0] - from[0], to[1] - from[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let t = if len2 > 0.0 {
                    (((x[0] - from[0]) * d[0] + (x[1] - from[1]) * d[1]) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let p = self.point_at(t);
                (x[0] - p[0]).hypot(x[1] - p[1])
            }
            BoundaryElement::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let rel = [x[0] - center[0], x[1] - center[1]];
                let ang = rel[1].atan2(rel[0]);
                // parameter of the angular projection, if it falls on the arc
                let mut t = (ang - start_angle) / sweep;
                let turn = 2.0 * PI / sweep.abs();
                t = t.rem_euclid(turn);
                let end_dist = {
                    let a = self.start();
                    let b = self.end();
                    (x[0] - a[0]).hypot(x[1] - a[1]).min((x[0] - b[0]).hypot(x[1] - b[1]))
                };
                if t <= 1.0 {
                    ((rel[0].hypot(rel[1])) - radius).abs().min(end_dist)
                } else {
                    end_dist
                }
            }
        }
    }

    /// Extremes of the element, for bounding boxes.
    fn extent(&self) -> [Point; 2] {
        let a = self.start();
        let b = self.end();
        let mut lo = [a[0].min(b[0]), a[1].min(b[1])];
        let mut hi = [a[0].max(b[0]), a[1].max(b[1])];
        if let BoundaryElement::Arc {
            center,
            radius,
            start_angle,
            sweep,
        } = *self
        {
            let (p0, p1) = if sweep >= 0.0 {
                (start_angle, start_angle + sweep)
            } else {
                (start_angle + sweep, start_angle)
            };
            let first = (p0 / (0.5 * PI)).ceil() as i64;
            let last = (p1 / (0.5 * PI)).floor() as i64;
            for q in first..=last {
                let phi = q as f64 * 0.5 * PI;
                let p = [center[0] + radius * phi.cos(), center[1] + radius * phi.sin()];
                lo = [lo[0].min(p[0]), lo[1].min(p[1])];
                hi = [hi[0].max(p[0]), hi[1].max(p[1])];
            }
        }
        [lo, hi]
    }

    /// Angle swept around `x` while traversing the element (`x` off the curve).
    fn winding_angle(&self, x: Point) -> f64 {
        match *self {
            BoundaryElement::Segment { from, to } => chord_angle(x, from, to),
            BoundaryElement::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let parts = (sweep.abs() / (0.5 * PI)).ceil().max(1.0) as usize;
                let step = sweep / parts as f64;
                let mut total = 0.0;
                for i in 0..parts {
                    let sub = BoundaryElement::Arc {
                        center,
                        radius,
                        start_angle: start_angle + i as f64 * step,
                        sweep: step,
                    };
                    let (a, b) = (sub.start(), sub.end());
                    total += chord_angle(x, a, b);
                    // the circular segment between the chord and the sub-arc
                    let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                    if r < radius {
                        let side_x = cross([b[0] - a[0], b[1] - a[1]], [x[0] - a[0], x[1] - a[1]]);
                        let side_c =
                            cross([b[0] - a[0], b[1] - a[1]], [center[0] - a[0], center[1] - a[1]]);
                        if side_x * side_c < 0.0 {
                            total += 2.0 * PI * step.signum();
                        }
                    }
                }
                total
            }
        }
    }
}

fn cross(u: Point, v: Point) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

fn chord_angle(x: Point, a: Point, b: Point) -> f64 {
    let u = [a[0] - x[0], a[1] - x[1]];
    let v = [b[0] - x[0], b[1] - x[1]];
    cross(u, v).atan2(u[0] * v[0] + u[1] * v[1])
}

/// A closed loop enclosing its region on the left, counted with `sign`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub sign: i8,
    pub boundary: Vec<BoundaryElement>,
}

impl Piece {
    pub fn area(&self) -> f64 {
        self.boundary.iter().map(BoundaryElement::area_contribution).sum()
    }

    fn boundary_distance(&self, x: Point) -> f64 {
        self.boundary
            .iter()
            .map(|e| e.distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership with the boundary counted as `on_boundary`.
    fn contains(&self, x: Point, on_boundary: bool, eps: f64) -> bool {
        if self.boundary_distance(x) <= eps {
            return on_boundary;
        }
        let total: f64 = self.boundary.iter().map(|e| e.winding_angle(x)).sum();
        (total / (2.0 * PI)).round() != 0.0
    }

    fn extent(&self) -> [Point; 2] {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for e in &self.boundary {
            let [l, h] = e.extent();
            lo = [lo[0].min(l[0]), lo[1].min(l[1])];
            hi = [hi[0].max(h[0]), hi[1].max(h[1])];
        }
        [lo, hi]
    }
}

/// Membership predicate for [`Shape::Generic`].
#[derive(Clone)]
pub struct GenericShape {
    /// Identifies the predicate in cache keys.
    pub label: String,
    /// Box known to contain the set.
    pub bbox: [Point; 2],
    pub predicate: Arc<dyn Fn(Point) -> bool + Send + Sync>,
}

impl fmt::Debug for GenericShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericShape")
            .field("label", &self.label)
            .field("bbox", &self.bbox)
            .finish_non_exhaustive()
    }
}

/// The scatterer `D`.
#[derive(Clone, Debug)]
pub enum Shape {
    Disc { center: Point, radius: f64 },
    Rect { center: Point, half_widths: [f64; 2] },
    /// Signed union of closed loops of arcs and segments.
    Composite(Vec<Piece>),
    Generic(GenericShape),
}

const BOUNDARY_EPS: f64 = 1e-12;

impl Shape {
    pub fn disc(center: Point, radius: f64) -> Self {
        Shape::Disc { center, radius }
    }

    pub fn rect(center: Point, half_widths: [f64; 2]) -> Self {
        Shape::Rect {
            center,
            half_widths,
        }
    }

    /// Closed polygon (counter-clockwise vertices) as a one-piece composite.
    pub fn polygon(vertices: &[Point]) -> Self {
        let n = vertices.len();
        let boundary = (0..n)
            .map(|i| BoundaryElement::Segment {
                from: vertices[i],
                to: vertices[(i + 1) % n],
            })
            .collect();
        Shape::Composite(vec![Piece { sign: 1, boundary }])
    }

    /// Full circle written as four quarter arcs.
    pub fn circle_arcs(center: Point, radius: f64) -> Self {
        let boundary = (0..4)
            .map(|q| BoundaryElement::Arc {
                center,
                radius,
                start_angle: q as f64 * 0.5 * PI,
                sweep: 0.5 * PI,
            })
            .collect();
        Shape::Composite(vec![Piece { sign: 1, boundary }])
    }

    /// The cusped star `[-1,1]^2` minus the four unit discs centred at
    /// `(±1, ±1)`; cusps at `(±1, 0)` and `(0, ±1)`.
    pub fn cusp_star() -> Self {
        // counter-clockwise around D, each arc clockwise around its disc
        let centers = [[1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0]];
        let starts = [PI, 1.5 * PI, 0.0, 0.5 * PI];
        let boundary = centers
            .iter()
            .zip(starts)
            .map(|(&center, start)| BoundaryElement::Arc {
                center,
                radius: 1.0,
                start_angle: start,
                sweep: -0.5 * PI,
            })
            .collect();
        Shape::Composite(vec![Piece { sign: 1, boundary }])
    }

    pub fn generic(
        label: impl Into<String>,
        bbox: [Point; 2],
        predicate: impl Fn(Point) -> bool + Send + Sync + 'static,
    ) -> Self {
        Shape::Generic(GenericShape {
            label: label.into(),
            bbox,
            predicate: Arc::new(predicate),
        })
    }

    /// Closed-set membership: boundary points count as inside.
    pub fn contains(&self, x: Point) -> bool {
        match self {
            Shape::Disc { center, radius } => {
                (x[0] - center[0]).hypot(x[1] - center[1]) <= *radius
            }
            Shape::Rect {
                center,
                half_widths,
            } => (x[0] - center[0]).abs() <= half_widths[0] && (x[1] - center[1]).abs() <= half_widths[1],
            Shape::Composite(pieces) => {
                let eps = BOUNDARY_EPS * (1.0 + self.diameter());
                let count: i32 = pieces
                    .iter()
                    .map(|p| {
                        // the sign convention keeps boundaries of removed
                        // pieces inside D
                        let inside = p.contains(x, p.sign > 0, eps);
                        if inside {
                            p.sign as i32
                        } else {
                            0
                        }
                    })
                    .sum();
                count > 0
            }
            Shape::Generic(g) => (g.predicate)(x),
        }
    }

    /// Axis-aligned bounding box `[lo, hi]`.
    pub fn bounding_box(&self) -> [Point; 2] {
        match self {
            Shape::Disc { center, radius } => [
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ],
            Shape::Rect {
                center,
                half_widths,
            } => [
                [center[0] - half_widths[0], center[1] - half_widths[1]],
                [center[0] + half_widths[0], center[1] + half_widths[1]],
            ],
            Shape::Composite(pieces) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for p in pieces.iter().filter(|p| p.sign > 0) {
                    let [l, h] = p.extent();
                    lo = [lo[0].min(l[0]), lo[1].min(l[1])];
                    hi = [hi[0].max(h[0]), hi[1].max(h[1])];
                }
                [lo, hi]
            }
            Shape::Generic(g) => g.bbox,
        }
    }

    /// Diameter: exact for discs and rectangles, bounding-box diagonal otherwise.
    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Disc { radius, .. } => 2.0 * radius,
            Shape::Rect { half_widths, .. } => 2.0 * half_widths[0].hypot(half_widths[1]),
            _ => {
                let [lo, hi] = self.bounding_box();
                (hi[0] - lo[0]).hypot(hi[1] - lo[1])
            }
        }
    }

    /// Area of `D`, when it is known in closed form.
    pub fn area(&self) -> Option<f64> {
        match self {
            Shape::Disc { radius, .. } => Some(PI * radius * radius),
            Shape::Rect { half_widths, .. } => Some(4.0 * half_widths[0] * half_widths[1]),
            Shape::Composite(pieces) => Some(pieces.iter().map(|p| p.sign as f64 * p.area()).sum()),
            Shape::Generic(_) => None,
        }
    }

    /// Checks the descriptor and that `D` lies strictly inside `(-a, a)^2`.
    pub fn validate(&self, a: f64) -> Result<()> {
        match self {
            Shape::Disc { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::InvalidGeometry(format!("disc radius {radius}")));
            }
            Shape::Rect { half_widths, .. } if !(half_widths[0] > 0.0 && half_widths[1] > 0.0) => {
                return Err(Error::InvalidGeometry(format!("half widths {half_widths:?}")));
            }
            Shape::Composite(pieces) => validate_pieces(pieces)?,
            _ => {}
        }
        let [lo, hi] = self.bounding_box();
        let inside = lo.iter().chain(hi.iter()).all(|v| v.abs() < a);
        if !inside {
            return Err(Error::GeometryOutsideDomain { a });
        }
        Ok(())
    }

    /// Bytes identifying the shape for cache keys.
    fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let push = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());
        match self {
            Shape::Disc { center, radius } => {
                out.extend_from_slice(b"disc");
                push(&mut out, center[0]);
                push(&mut out, center[1]);
                push(&mut out, *radius);
            }
            Shape::Rect {
                center,
                half_widths,
            } => {
                out.extend_from_slice(b"rect");
                for v in [center[0], center[1], half_widths[0], half_widths[1]] {
                    push(&mut out, v);
                }
            }
            Shape::Composite(pieces) => {
                out.extend_from_slice(b"composite");
                out.extend_from_slice(serde_json::to_string(pieces).unwrap_or_default().as_bytes());
            }
            Shape::Generic(g) => {
                out.extend_from_slice(b"generic");
                out.extend_from_slice(g.label.as_bytes());
                for v in [g.bbox[0][0], g.bbox[0][1], g.bbox[1][0], g.bbox[1][1]] {
                    push(&mut out, v);
                }
            }
        }
        out
    }

    /// SHA-256 of the canonical description.
    pub fn hash(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.canonical_bytes());
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

fn validate_pieces(pieces: &[Piece]) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::InvalidGeometry("composite without pieces".into()));
    }
    for (pi, piece) in pieces.iter().enumerate() {
        if piece.sign != 1 && piece.sign != -1 {
            return Err(Error::InvalidGeometry(format!("piece {pi}: sign {}", piece.sign)));
        }
        let b = &piece.boundary;
        if b.is_empty() {
            return Err(Error::InvalidGeometry(format!("piece {pi}: empty boundary")));
        }
        let scale = 1.0 + piece.extent()[1][0].abs().max(piece.extent()[0][0].abs());
        for (i, e) in b.iter().enumerate() {
            match *e {
                BoundaryElement::Arc { radius, sweep, .. } => {
                    if !(radius > 0.0) || sweep == 0.0 || sweep.abs() > 2.0 * PI {
                        return Err(Error::InvalidGeometry(format!("piece {pi}: bad arc {i}")));
                    }
                }
                BoundaryElement::Segment { .. } => {
                    if e.length() == 0.0 {
                        return Err(Error::InvalidGeometry(format!(
                            "piece {pi}: zero-length segment {i}"
                        )));
                    }
                }
            }
            let next = &b[(i + 1) % b.len()];
            let (p, q) = (e.end(), next.start());
            if (p[0] - q[0]).hypot(p[1] - q[1]) > 1e-12 * scale {
                return Err(Error::InvalidGeometry(format!(
                    "piece {pi}: element {i} does not connect to the next"
                )));
            }
        }
        if piece.area() <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "piece {pi}: loop is not counter-clockwise"
            )));
        }
        check_simple(pi, b)?;
    }
    Ok(())
}

/// Rejects loops whose non-adjacent elements cross (polyline test).
fn check_simple(pi: usize, b: &[BoundaryElement]) -> Result<()> {
    const SUB: usize = 32;
    let m = b.len();
    if m < 3 {
        return Ok(());
    }
    let chords: Vec<Vec<(Point, Point)>> = b
        .iter()
        .map(|e| {
            let sub = if matches!(e, BoundaryElement::Segment { .. }) { 1 } else { SUB };
            (0..sub)
                .map(|s| {
                    (
                        e.point_at(s as f64 / sub as f64),
                        e.point_at((s + 1) as f64 / sub as f64),
                    )
                })
                .collect()
        })
        .collect();
    for i in 0..m {
        for j in (i + 1)..m {
            let adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if adjacent {
                continue;
            }
            for &(p1, p2) in &chords[i] {
                for &(q1, q2) in &chords[j] {
                    if segments_cross(p1, p2, q1, q2) {
                        return Err(Error::InvalidGeometry(format!(
                            "piece {pi}: elements {i} and {j} intersect"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d = |a: Point, b: Point, c: Point| cross([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
    let d1 = d(q1, q2, p1);
    let d2 = d(q1, q2, p2);
    let d3 = d(p1, p2, q1);
    let d4 = d(p1, p2, q2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Truncated Fourier coefficients `c_jk`, `-F <= j, k <= F`, of an indicator
/// on the period cell `[-a, a]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorCoeffs {
    f: usize,
    a: f64,
    coeffs: Vec<Complex64>,
}

impl IndicatorCoeffs {
    pub fn new(f: usize, a: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        let side = 2 * f + 1;
        if coeffs.len() != side * side {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients for F = {f}, got {}",
                side * side,
                coeffs.len()
            )));
        }
        Ok(IndicatorCoeffs { f, a, coeffs })
    }

    pub fn zeros(f: usize, a: f64) -> Self {
        let side = 2 * f + 1;
        IndicatorCoeffs {
            f,
            a,
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Row-major values, `j` outer, both indices from `-F` to `F`.
    pub fn values(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    fn index(&self, j: i64, k: i64) -> usize {
        let f = self.f as i64;
        ((j + f) * (2 * f + 1) + (k + f)) as usize
    }

    pub fn get(&self, j: i64, k: i64) -> Complex64 {
        self.coeffs[self.index(j, k)]
    }

    fn set(&mut self, j: i64, k: i64, v: Complex64) {
        let i = self.index(j, k);
        self.coeffs[i] = v;
    }

    /// Evaluates the truncated series at `x` by direct summation.
    pub fn eval_direct(&self, x: Point) -> Complex64 {
        let f = self.f as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -f..=f {
            for k in -f..=f {
                let phase = PI * (j as f64 * x[0] + k as f64 * x[1]) / self.a;
                acc += self.get(j, k) * Complex64::from_polar(1.0, phase);
            }
        }
        acc
    }
}

fn wavevector(j: i64, k: i64, a: f64) -> [f64; 2] {
    [PI * j as f64 / a, PI * k as f64 / a]
}

/// Closed-form coefficients of a disc.
pub fn indicator_coeffs_disc(center: Point, radius: f64, f: usize, a: f64) -> Result<IndicatorCoeffs> {
    Shape::disc(center, radius).validate(a)?;
    check_f(f)?;
    let fi = f as i64;
    let norm = 1.0 / (4.0 * a * a);
    let mut out = IndicatorCoeffs::zeros(f, a);
    for j in -fi..=fi {
        for k in -fi..=fi {
            let kv = wavevector(j, k, a);
            let kn = kv[0].hypot(kv[1]);
            let v = if j == 0 && k == 0 {
                PI * radius * radius * norm
            } else {
                let (_, _, j1, _) = specfun::bessel_all(kn * radius);
                2.0 * PI * radius * norm * j1 / kn
            };
            let shift = Complex64::from_polar(1.0, -(kv[0] * center[0] + kv[1] * center[1]));
            out.set(j, k, shift * v);
        }
    }
    Ok(out)
}

/// `(1/2a) int_{c-s}^{c+s} exp(-i pi j x / a) dx`.
fn rect_factor(j: i64, c: f64, s: f64, a: f64) -> Complex64 {
    if j == 0 {
        return Complex64::new(s / a, 0.0);
    }
    let jf = j as f64;
    Complex64::from_polar(1.0, -PI * jf * c / a) * ((PI * jf * s / a).sin() / (PI * jf))
}

/// Closed-form coefficients of an axis-aligned rectangle.
pub fn indicator_coeffs_rect(
    center: Point,
    half_widths: [f64; 2],
    f: usize,
    a: f64,
) -> Result<IndicatorCoeffs> {
    Shape::rect(center, half_widths).validate(a)?;
    check_f(f)?;
    let fi = f as i64;
    let fx: Vec<Complex64> = (-fi..=fi).map(|j| rect_factor(j, center[0], half_widths[0], a)).collect();
    let fy: Vec<Complex64> = (-fi..=fi).map(|k| rect_factor(k, center[1], half_widths[1], a)).collect();
    // each 1D factor carries 1/(2a); the product carries 1/(4a^2)
    let coeffs = fx.iter().flat_map(|x| fy.iter().map(move |y| x * y)).collect();
    IndicatorCoeffs::new(f, a, coeffs)
}

fn check_f(f: usize) -> Result<()> {
    if f < 1 {
        return Err(Error::InvalidParameter("F must be >= 1".into()));
    }
    Ok(())
}

/// Default per-coefficient target for the boundary-integral provider.
pub const DEFAULT_COEFF_TOL: f64 = 1e-10;

const PANEL_NODES: usize = 16;
const MAX_DOUBLINGS: usize = 6;

/// Quadrature nodes on the arcs of a composite: positions and the vector
/// weights `sign * w * n ds` (outward normal times signed arc length).
struct ArcNodes {
    x: Vec<f64>,
    y: Vec<f64>,
    nu_x: Vec<f64>,
    nu_y: Vec<f64>,
}

fn arc_nodes(pieces: &[Piece], kmax: f64, level: usize, rule: &GaussLegendre) -> ArcNodes {
    let mut out = ArcNodes {
        x: Vec::new(),
        y: Vec::new(),
        nu_x: Vec::new(),
        nu_y: Vec::new(),
    };
    for piece in pieces {
        let sign = piece.sign as f64;
        for e in &piece.boundary {
            let BoundaryElement::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } = *e
            else {
                continue;
            };
            // >= 6 nodes per wavelength 2 pi / |k| of arc length, plus 8
            let needed = 8.0 + (6.0 * e.length() * kmax / (2.0 * PI)).ceil();
            let panels = ((needed / PANEL_NODES as f64).ceil() as usize).max(1) << level;
            let dt = 1.0 / panels as f64;
            for p in 0..panels {
                let t0 = p as f64 * dt;
                for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = t0 + 0.5 * dt * (1.0 + z);
                    let phi = start_angle + t * sweep;
                    let (s, c) = phi.sin_cos();
                    let wt = sign * 0.5 * dt * w * radius * sweep;
                    out.x.push(center[0] + radius * c);
                    out.y.push(center[1] + radius * s);
                    out.nu_x.push(wt * c);
                    out.nu_y.push(wt * s);
                }
            }
        }
    }
    out
}

/// `sum_n (kvec . nu_n) exp(-i kvec . x_n)` for one mode, by direct summation.
fn arc_sum_single(nodes: &ArcNodes, kv: [f64; 2]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..nodes.x.len() {
        let kn = kv[0] * nodes.nu_x[i] + kv[1] * nodes.nu_y[i];
        let (s, c) = (-(kv[0] * nodes.x[i] + kv[1] * nodes.y[i])).sin_cos();
        acc += Complex64::new(kn * c, kn * s);
    }
    acc
}

/// Segment contribution `int (kvec . n) exp(-i kvec . x) ds` in closed form.
fn segment_sum(pieces: &[Piece], kv: [f64; 2]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for piece in pieces {
        for e in &piece.boundary {
            if let BoundaryElement::Segment { from, to } = *e {
                let d = [to[0] - from[0], to[1] - from[1]];
                let kn = kv[0] * d[1] - kv[1] * d[0];
                let theta = kv[0] * d[0] + kv[1] * d[1];
                let phi = if theta.abs() < 1e-4 {
                    let t2 = theta * theta;
                    Complex64::new(1.0 - t2 / 6.0 + t2 * t2 / 120.0, -theta / 2.0 + theta * t2 / 24.0)
                } else {
                    (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -theta))
                        / Complex64::new(0.0, theta)
                };
                let base = Complex64::from_polar(1.0, -(kv[0] * from[0] + kv[1] * from[1]));
                acc += base * phi * (piece.sign as f64 * kn);
            }
        }
    }
    acc
}

/// Coefficients of a signed composite of arc/segment loops via
/// `int_D e^{-ik.x} dA = (i/|k|^2) oint (k.n) e^{-ik.x} ds`.
///
/// Segments are integrated exactly. Arcs use composite 16-point
/// Gauss-Legendre panels resolved for the largest wavenumber; the node set
/// is doubled until the outermost ring of modes changes by less than `tol`.
pub fn indicator_coeffs_composite(shape: &Shape, f: usize, a: f64, tol: f64) -> Result<IndicatorCoeffs> {
    let Shape::Composite(pieces) = shape else {
        return Err(Error::InvalidGeometry("expected a composite shape".into()));
    };
    shape.validate(a)?;
    check_f(f)?;
    let fi = f as i64;
    let norm = 1.0 / (4.0 * a * a);
    let side = 2 * f + 1;
    let kmax = PI * (2.0_f64).sqrt() * f as f64 / a;
    let rule = GaussLegendre::new(PANEL_NODES);

    // ring modes with j >= 0 used to verify the arc resolution
    let stride = (f / 64).max(1) as i64;
    let mut probe: Vec<(i64, i64)> = Vec::new();
    for k in (-fi..=fi).step_by(stride as usize) {
        probe.push((fi, k));
    }
    for j in (0..fi).step_by(stride as usize) {
        probe.push((j, fi));
        probe.push((j, -fi));
    }
    probe.push((fi, fi));
    probe.push((fi, -fi));

    let has_arcs = pieces
        .iter()
        .any(|p| p.boundary.iter().any(|e| matches!(e, BoundaryElement::Arc { .. })));
    let mut nodes = arc_nodes(pieces, kmax, 0, &rule);
    if has_arcs {
        let eval = |nodes: &ArcNodes| -> Vec<Complex64> {
            probe
                .iter()
                .map(|&(j, k)| {
                    let kv = wavevector(j, k, a);
                    arc_sum_single(nodes, kv) * (norm / (kv[0] * kv[0] + kv[1] * kv[1]))
                })
                .collect()
        };
        let mut prev = eval(&nodes);
        let mut level = 0;
        loop {
            level += 1;
            let finer = arc_nodes(pieces, kmax, level, &rule);
            let next = eval(&finer);
            let change = prev
                .iter()
                .zip(&next)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            nodes = finer;
            if change <= tol {
                break;
            }
            if level >= MAX_DOUBLINGS {
                return Err(Error::ToleranceNotMet {
                    tol,
                    achieved: change,
                });
            }
            prev = next;
        }
    }

    // rows j = 0..=F; negative rows follow from Hermitian symmetry
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); side]; f + 1];
    if has_arcs {
        accumulate_arc_rows(&nodes, f, a, &mut rows);
    }
    let area: f64 = pieces.iter().map(|p| p.sign as f64 * p.area()).sum();
    let mut out = IndicatorCoeffs::zeros(f, a);
    for (j, row) in rows.iter().enumerate() {
        let j = j as i64;
        for k in -fi..=fi {
            let v = if j == 0 && k == 0 {
                Complex64::new(area * norm, 0.0)
            } else {
                let kv = wavevector(j, k, a);
                let k2 = kv[0] * kv[0] + kv[1] * kv[1];
                let total = row[(k + fi) as usize] + segment_sum(pieces, kv);
                Complex64::new(0.0, norm / k2) * total
            };
            out.set(j, k, v);
            if j > 0 {
                out.set(-j, -k, v.conj());
            }
        }
    }
    // the j = 0 row is Hermitian within itself; enforce it exactly
    for k in 1..=fi {
        let v = out.get(0, k);
        out.set(0, -k, v.conj());
    }
    Ok(out)
}

/// `rows[j][k + F] = sum_n (k1 nu_x + k2 nu_y) e^{-i (k1 x_n + k2 y_n)}` for
/// `j = 0..=F`, blocked over nodes so the per-node phase tables stay in cache.
fn accumulate_arc_rows(nodes: &ArcNodes, f: usize, a: f64, rows: &mut [Vec<Complex64>]) {
    const BLOCK: usize = 64;
    let fi = f as i64;
    let side = 2 * f + 1;
    let m = nodes.x.len();
    let step = PI / a;
    // split accumulators: S1 (weights nu_x), S2 (weights nu_y), re/im planes
    let mut acc: Vec<[Vec<f64>; 4]> = (0..=f)
        .map(|_| [vec![0.0; side], vec![0.0; side], vec![0.0; side], vec![0.0; side]])
        .collect();
    let mut e2_re = vec![0.0; BLOCK * side];
    let mut e2_im = vec![0.0; BLOCK * side];
    let mut start = 0;
    while start < m {
        let end = (start + BLOCK).min(m);
        let nb = end - start;
        for (b, n) in (start..end).enumerate() {
            for (ki, k) in (-fi..=fi).enumerate() {
                let (s, c) = (-(step * k as f64 * nodes.y[n])).sin_cos();
                e2_re[b * side + ki] = c;
                e2_im[b * side + ki] = s;
            }
        }
        let e2_re = &e2_re;
        let e2_im = &e2_im;
        acc.par_iter_mut().enumerate().for_each(|(j, planes)| {
            let [s1r, s1i, s2r, s2i] = planes;
            for b in 0..nb {
                let n = start + b;
                let (s, c) = (-(step * j as f64 * nodes.x[n])).sin_cos();
                let (a1r, a1i) = (nodes.nu_x[n] * c, nodes.nu_x[n] * s);
                let (a2r, a2i) = (nodes.nu_y[n] * c, nodes.nu_y[n] * s);
                let br = &e2_re[b * side..(b + 1) * side];
                let bi = &e2_im[b * side..(b + 1) * side];
                for k in 0..side {
                    let (xr, xi) = (br[k], bi[k]);
                    s1r[k] += a1r * xr - a1i * xi;
                    s1i[k] += a1r * xi + a1i * xr;
                    s2r[k] += a2r * xr - a2i * xi;
                    s2i[k] += a2r * xi + a2i * xr;
                }
            }
        });
        start = end;
    }
    for (j, (row, planes)) in rows.iter_mut().zip(&acc).enumerate() {
        let k1 = step * j as f64;
        for (ki, k) in (-fi..=fi).enumerate() {
            let k2 = step * k as f64;
            row[ki] = Complex64::new(
                k1 * planes[0][ki] + k2 * planes[2][ki],
                k1 * planes[1][ki] + k2 * planes[3][ki],
            );
        }
    }
}

/// Largest `F` accepted by the predicate-based provider.
pub const GENERIC_MAX_F: usize = 64;

const GENERIC_MIN_DEPTH: usize = 5;
const GENERIC_MAX_DEPTH: usize = 15;

/// Coefficients of a set known only through its membership predicate.
///
/// A quadtree over the bounding box separates uniform cells, integrated
/// exactly as rectangles, from boundary cells refined to `2a / 2^15`. In a
/// boundary leaf the interface is located on the cell edges by bisection and
/// replaced by a straight cut; the clipped polygon contributes
/// `area * exp(-ik . centroid)`.
pub fn indicator_coeffs_generic(shape: &Shape, f: usize, a: f64) -> Result<IndicatorCoeffs> {
    let Shape::Generic(g) = shape else {
        return Err(Error::InvalidGeometry("expected a generic shape".into()));
    };
    check_f(f)?;
    if f > GENERIC_MAX_F {
        return Err(Error::CostGuard {
            f,
            max: GENERIC_MAX_F,
        });
    }
    shape.validate(a)?;
    let pred = &*g.predicate;
    let mut rects: Vec<[f64; 4]> = Vec::new();
    let mut cells: Vec<(f64, Point)> = Vec::new();
    let min_cell = 2.0 * a / (1u64 << GENERIC_MAX_DEPTH) as f64;
    // cover the bbox by a square so leaves share one size
    let [lo, hi] = g.bbox;
    let size = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(min_cell);
    let mut stack = vec![(lo[0], lo[1], size, 0usize)];
    while let Some((x0, y0, s, depth)) = stack.pop() {
        let samples: Vec<bool> = (0..3)
            .flat_map(|i| (0..3).map(move |k| (i, k)))
            .map(|(i, k)| pred([x0 + 0.5 * s * i as f64, y0 + 0.5 * s * k as f64]))
            .collect();
        let uniform = samples.iter().all(|&v| v == samples[0]);
        if uniform && depth >= GENERIC_MIN_DEPTH {
            if samples[0] {
                rects.push([x0, x0 + s, y0, y0 + s]);
            }
            continue;
        }
        if s <= min_cell * 1.000001 {
            if let Some(cell) = clip_leaf(pred, x0, y0, s) {
                cells.push(cell);
            }
            continue;
        }
        let h = 0.5 * s;
        stack.push((x0, y0, h, depth + 1));
        stack.push((x0 + h, y0, h, depth + 1));
        stack.push((x0, y0 + h, h, depth + 1));
        stack.push((x0 + h, y0 + h, h, depth + 1));
    }

    let fi = f as i64;
    let side = 2 * f + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); side * side];
    let mut fx = vec![Complex64::new(0.0, 0.0); side];
    let mut fy = vec![Complex64::new(0.0, 0.0); side];
    for r in &rects {
        let (cx, sx) = (0.5 * (r[0] + r[1]), 0.5 * (r[1] - r[0]));
        let (cy, sy) = (0.5 * (r[2] + r[3]), 0.5 * (r[3] - r[2]));
        for (i, j) in (-fi..=fi).enumerate() {
            fx[i] = rect_factor(j, cx, sx, a);
            fy[i] = rect_factor(j, cy, sy, a);
        }
        rank_one(&mut out, &fx, &fy, 1.0);
    }
    let norm = 1.0 / (4.0 * a * a);
    for &(area, c) in &cells {
        for (i, j) in (-fi..=fi).enumerate() {
            fx[i] = Complex64::from_polar(1.0, -PI * j as f64 * c[0] / a);
            fy[i] = Complex64::from_polar(1.0, -PI * j as f64 * c[1] / a);
        }
        rank_one(&mut out, &fx, &fy, area * norm);
    }
    IndicatorCoeffs::new(f, a, out)
}

fn rank_one(out: &mut [Complex64], u: &[Complex64], v: &[Complex64], scale: f64) {
    let side = v.len();
    for (i, ui) in u.iter().enumerate() {
        let ui = ui * scale;
        for (o, vk) in out[i * side..(i + 1) * side].iter_mut().zip(v) {
            *o += ui * vk;
        }
    }
}

/// Inside part of a boundary leaf: `(area, centroid)`.
fn clip_leaf(pred: &dyn Fn(Point) -> bool, x0: f64, y0: f64, s: f64) -> Option<(f64, Point)> {
    let corners = [[x0, y0], [x0 + s, y0], [x0 + s, y0 + s], [x0, y0 + s]];
    let inside: Vec<bool> = corners.iter().map(|&c| pred(c)).collect();
    let mut poly: Vec<Point> = Vec::with_capacity(6);
    for i in 0..4 {
        let (p, q) = (corners[i], corners[(i + 1) % 4]);
        let (ip, iq) = (inside[i], inside[(i + 1) % 4]);
        if ip {
            poly.push(p);
        }
        if ip != iq {
            // bisection for the crossing on edge p -> q
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..48 {
                let mid = 0.5 * (lo + hi);
                let m = [p[0] + mid * (q[0] - p[0]), p[1] + mid * (q[1] - p[1])];
                if pred(m) == ip {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            poly.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    if poly.len() < 3 {
        return None;
    }
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let c = p[0] * q[1] - q[0] * p[1];
        area2 += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    if area2.abs() < 1e-300 {
        return None;
    }
    Some((0.5 * area2, [cx / (3.0 * area2), cy / (3.0 * area2)]))
}

/// Dispatches to the provider matching the shape variant.
pub fn indicator_coeffs(shape: &Shape, f: usize, a: f64, tol: f64) -> Result<IndicatorCoeffs> {
    match shape {
        Shape::Disc { center, radius } => indicator_coeffs_disc(*center, *radius, f, a),
        Shape::Rect {
            center,
            half_widths,
        } => indicator_coeffs_rect(*center, *half_widths, f, a),
        Shape::Composite(_) => indicator_coeffs_composite(shape, f, a, tol),
        Shape::Generic(_) => indicator_coeffs_generic(shape, f, a),
    }
}
