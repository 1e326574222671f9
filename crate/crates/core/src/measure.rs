//! Discretized trap measures: area measures on convex regions and arclength
//! measures on curves, both kept off the strip `R x [0, d]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

pub type Point = [f64; 2];

/// Gauss points per curve panel.
pub const CURVE_PANEL_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Disk { center: Point, radius: f64 },
    Rectangle { min: Point, max: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveShape {
    Segment { from: Point, to: Point },
    Circle { center: Point, radius: f64 },
    Arc { center: Point, radius: f64, start_angle: f64, end_angle: f64 },
    Polyline { points: Vec<Point> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Area(Region),
    Curve(CurveShape),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Area,
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KatoMeasure {
    pub kind: MeasureKind,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Arclength of each node along the curve; empty for area measures.
    pub arclength: Vec<f64>,
    pub total_mass: f64,
    pub support_box: BoundingBox,
    pub descriptor: Geometry,
    pub order: usize,
    /// Set when nodes come in rings of equally spaced angles about a common
    /// centre, ring-major; the Birman-Schwinger matrix is then block-circulant.
    pub rings: Option<RingLayout>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingLayout {
    pub rings: usize,
    pub per_ring: usize,
}

impl KatoMeasure {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rigid translation of nodes and geometry.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut m = self.clone();
        for p in &mut m.nodes {
            p[0] += dx;
            p[1] += dy;
        }
        m.support_box.min = shift(m.support_box.min, dx, dy);
        m.support_box.max = shift(m.support_box.max, dx, dy);
        m.descriptor = m.descriptor.translated(dx, dy);
        m
    }

    /// Integral of `f` against the measure.
    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}

fn shift(p: Point, dx: f64, dy: f64) -> Point {
    [p[0] + dx, p[1] + dy]
}

impl Geometry {
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        match self {
            Geometry::Area(Region::Disk { center, radius }) => Geometry::Area(Region::Disk {
                center: shift(*center, dx, dy),
                radius: *radius,
            }),
            Geometry::Area(Region::Rectangle { min, max }) => Geometry::Area(Region::Rectangle {
                min: shift(*min, dx, dy),
                max: shift(*max, dx, dy),
            }),
            Geometry::Curve(c) => Geometry::Curve(c.translated(dx, dy)),
        }
    }

    /// Vertical extent `(min x2, max x2)` of the support.
    pub fn vertical_extent(&self) -> (f64, f64) {
        match self {
            Geometry::Area(r) => r.vertical_extent(),
            Geometry::Curve(c) => c.vertical_extent(),
        }
    }
}

impl Region {
    fn validate(&self) -> Result<()> {
        match self {
            Region::Disk { radius, .. } if !(*radius > 0.0) => {
                Err(Error::Geometry("disk radius must be positive".into()))
            }
            Region::Rectangle { min, max } if !(max[0] > min[0] && max[1] > min[1]) => {
                Err(Error::Geometry("rectangle corners must be ordered".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn vertical_extent(&self) -> (f64, f64) {
        match self {
            Region::Disk { center, radius } => (center[1] - radius, center[1] + radius),
            Region::Rectangle { min, max } => (min[1], max[1]),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Disk { radius, .. } => PI * radius * radius,
            Region::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
        }
    }

    /// Distance from the interior point `x` to the boundary along direction `theta`.
    pub fn ray_length(&self, x: Point, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        match self {
            Region::Disk { center, radius } => {
                let px = x[0] - center[0];
                let py = x[1] - center[1];
                let b = px * c + py * s;
                let q = radius * radius - px * px - py * py;
                let disc = (b * b + q).max(0.0).sqrt();
                if b > 0.0 {
                    q / (b + disc)
                } else {
                    disc - b
                }
            }
            Region::Rectangle { min, max } => {
                let tx = if c > 0.0 {
                    (max[0] - x[0]) / c
                } else if c < 0.0 {
                    (min[0] - x[0]) / c
                } else {
                    f64::INFINITY
                };
                let ty = if s > 0.0 {
                    (max[1] - x[1]) / s
                } else if s < 0.0 {
                    (min[1] - x[1]) / s
                } else {
                    f64::INFINITY
                };
                tx.min(ty)
            }
        }
    }

    /// Angles in `[0, 2 pi)` at which `ray_length` is not smooth.
    pub fn angular_breaks(&self, x: Point) -> Vec<f64> {
        match self {
            Region::Disk { .. } => Vec::new(),
            Region::Rectangle { min, max } => {
                let mut v: Vec<f64> = [[min[0], min[1]], [max[0], min[1]], [max[0], max[1]], [min[0], max[1]]]
                    .iter()
                    .map(|p| (p[1] - x[1]).atan2(p[0] - x[0]).rem_euclid(2.0 * PI))
                    .collect();
                v.sort_by(f64::total_cmp);
                v
            }
        }
    }
}

impl CurveShape {
    fn translated(&self, dx: f64, dy: f64) -> Self {
        match self {
            CurveShape::Segment { from, to } => CurveShape::Segment {
                from: shift(*from, dx, dy),
                to: shift(*to, dx, dy),
            },
            CurveShape::Circle { center, radius } => CurveShape::Circle {
                center: shift(*center, dx, dy),
                radius: *radius,
            },
            CurveShape::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => CurveShape::Arc {
                center: shift(*center, dx, dy),
                radius: *radius,
                start_angle: *start_angle,
                end_angle: *end_angle,
            },
            CurveShape::Polyline { points } => CurveShape::Polyline {
                points: points.iter().map(|p| shift(*p, dx, dy)).collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            CurveShape::Segment { from, to } => dist(*from, *to) > 0.0,
            CurveShape::Circle { radius, .. } => *radius > 0.0,
            CurveShape::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => *radius > 0.0 && end_angle > start_angle && end_angle - start_angle < 2.0 * PI,
            CurveShape::Polyline { points } => {
                points.len() >= 2 && points.windows(2).all(|w| dist(w[0], w[1]) > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("degenerate curve {self:?}")))
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            CurveShape::Segment { from, to } => dist(*from, *to),
            CurveShape::Circle { radius, .. } => 2.0 * PI * radius,
            CurveShape::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle),
            CurveShape::Polyline { points } => points.windows(2).map(|w| dist(w[0], w[1])).sum(),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, CurveShape::Circle { .. })
    }

    /// Point at arclength `s`.
    pub fn point_at(&self, s: f64) -> Point {
        match self {
            CurveShape::Segment { from, to } => {
                let l = dist(*from, *to);
                let t = s / l;
                [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])]
            }
            CurveShape::Circle { center, radius } => {
                let a = s / radius;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            CurveShape::Arc {
                center,
                radius,
                start_angle,
                ..
            } => {
                let a = start_angle + s / radius;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            CurveShape::Polyline { points } => {
                let mut rest = s;
                for w in points.windows(2) {
                    let l = dist(w[0], w[1]);
                    if rest <= l {
                        let t = rest / l;
                        return [w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])];
                    }
                    rest -= l;
                }
                *points.last().unwrap()
            }
        }
    }

    /// Arclengths of corners, including both ends of an open curve.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CurveShape::Polyline { points } => {
                let mut acc = 0.0;
                let mut v = vec![0.0];
                for w in points.windows(2) {
                    acc += dist(w[0], w[1]);
                    v.push(acc);
                }
                v
            }
            CurveShape::Circle { .. } => vec![0.0, self.length()],
            _ => vec![0.0, self.length()],
        }
    }

    pub fn vertical_extent(&self) -> (f64, f64) {
        match self {
            CurveShape::Segment { from, to } => (from[1].min(to[1]), from[1].max(to[1])),
            CurveShape::Circle { center, radius } => (center[1] - radius, center[1] + radius),
            CurveShape::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let ys = |a: f64| center[1] + radius * a.sin();
                let mut lo = ys(*start_angle).min(ys(*end_angle));
                let mut hi = ys(*start_angle).max(ys(*end_angle));
                let contains = |a: f64| {
                    let k = ((start_angle - a) / (2.0 * PI)).ceil();
                    a + 2.0 * PI * k <= *end_angle
                };
                if contains(PI / 2.0) {
                    hi = center[1] + radius;
                }
                if contains(-PI / 2.0) {
                    lo = center[1] - radius;
                }
                (lo, hi)
            }
            CurveShape::Polyline { points } => points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p[1]), b.max(p[1]))
            }),
        }
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn check_clear_of_strip(extent: (f64, f64), strip_width: f64) -> Result<()> {
    let (lo, hi) = extent;
    if lo > strip_width || hi < 0.0 {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "support spans x2 in [{lo}, {hi}] and meets the strip [0, {strip_width}]"
        )))
    }
}

fn bounding_box(nodes: &[Point], geometry: &Geometry) -> BoundingBox {
    let (lo, hi) = geometry.vertical_extent();
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in nodes {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
    }
    match geometry {
        Geometry::Area(Region::Disk { center, radius }) | Geometry::Curve(CurveShape::Circle { center, radius }) => {
            xmin = center[0] - radius;
            xmax = center[0] + radius;
        }
        Geometry::Area(Region::Rectangle { min, max }) => {
            xmin = min[0];
            xmax = max[0];
        }
        _ => {}
    }
    BoundingBox {
        min: [xmin, lo],
        max: [xmax, hi],
    }
}

/// Area measure on a convex region. A disk uses `order` Gauss radii times
/// `2 order` equispaced angles; a rectangle a tensor Gauss grid of
/// `order x order` points scaled to its aspect ratio.
pub fn area_measure(region: &Region, order: usize, strip_width: f64) -> Result<KatoMeasure> {
    region.validate()?;
    if order == 0 {
        return Err(Error::Config("quadrature order must be positive".into()));
    }
    check_clear_of_strip(region.vertical_extent(), strip_width)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match region {
        Region::Disk { center, radius } => {
            let (x, w) = gauss_legendre::<f64>(order);
            let n_theta = 2 * order;
            let dtheta = 2.0 * PI / n_theta as f64;
            for (t, wt) in x.iter().zip(&w) {
                let r = 0.5 * radius * (1.0 + t);
                let wr = 0.5 * radius * wt * r;
                for j in 0..n_theta {
                    let a = (j as f64 + 0.5) * dtheta;
                    nodes.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
                    weights.push(wr * dtheta);
                }
            }
        }
        Region::Rectangle { min, max } => {
            let (w0, h0) = (max[0] - min[0], max[1] - min[1]);
            let aspect = w0 / h0;
            let (nx, ny) = if aspect >= 1.0 {
                (((order as f64) * aspect.sqrt()).round() as usize, ((order as f64) / aspect.sqrt()).round().max(1.0) as usize)
            } else {
                (((order as f64) * aspect.sqrt()).round().max(1.0) as usize, ((order as f64) / aspect.sqrt()).round() as usize)
            };
            let (xs, wxs) = gauss_legendre::<f64>(nx.max(1));
            let (ys, wys) = gauss_legendre::<f64>(ny.max(1));
            for (tx, wx) in xs.iter().zip(&wxs) {
                for (ty, wy) in ys.iter().zip(&wys) {
                    nodes.push([min[0] + 0.5 * w0 * (1.0 + tx), min[1] + 0.5 * h0 * (1.0 + ty)]);
                    weights.push(0.25 * w0 * h0 * wx * wy);
                }
            }
        }
    }
    let descriptor = Geometry::Area(region.clone());
    let support_box = bounding_box(&nodes, &descriptor);
    Ok(KatoMeasure {
        kind: MeasureKind::Area,
        total_mass: weights.iter().sum(),
        nodes,
        weights,
        arclength: Vec::new(),
        support_box,
        rings: match region {
            Region::Disk { .. } => Some(RingLayout {
                rings: order,
                per_ring: 2 * order,
            }),
            Region::Rectangle { .. } => None,
        },
        descriptor,
        order,
    })
}

/// Arclength measure on a curve: `order` composite Gauss panels of
/// [`CURVE_PANEL_POINTS`] nodes, aligned with the corners of a polyline.
pub fn curve_measure(shape: &CurveShape, order: usize, strip_width: f64) -> Result<KatoMeasure> {
    shape.validate()?;
    if order == 0 {
        return Err(Error::Config("quadrature order must be positive".into()));
    }
    check_clear_of_strip(shape.vertical_extent(), strip_width)?;
    let total = shape.length();
    let breaks = shape.breakpoints();
    let (gx, gw) = gauss_legendre::<f64>(CURVE_PANEL_POINTS);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut arclength = Vec::new();
    for piece in breaks.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let panels = ((order as f64) * (b - a) / total).round().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + k as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                let s = lo + 0.5 * h * (1.0 + x);
                nodes.push(shape.point_at(s));
                weights.push(0.5 * h * w);
                arclength.push(s);
            }
        }
    }
    let descriptor = Geometry::Curve(shape.clone());
    let support_box = bounding_box(&nodes, &descriptor);
    Ok(KatoMeasure {
        kind: MeasureKind::Curve,
        total_mass: weights.iter().sum(),
        nodes,
        weights,
        arclength,
        support_box,
        rings: None,
        descriptor,
        order,
    })
}

/// Which side of the strip the support lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

/// Distance `rho` between the support and the strip `R x [0, d]`.
pub fn distance_to_strip(measure: &KatoMeasure, strip_width: f64) -> Result<f64> {
    let (lo, hi) = measure.descriptor.vertical_extent();
    let rho = if lo > strip_width {
        lo - strip_width
    } else if hi < 0.0 {
        -hi
    } else {
        0.0
    };
    if rho > 0.0 {
        Ok(rho)
    } else {
        Err(Error::Geometry("trap support touches the strip".into()))
    }
}

pub fn side_of_strip(measure: &KatoMeasure, strip_width: f64) -> Result<Side> {
    let (lo, _) = measure.descriptor.vertical_extent();
    distance_to_strip(measure, strip_width)?;
    Ok(if lo > strip_width { Side::Above } else { Side::Below })
}
