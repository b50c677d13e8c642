//! Geometry of the unit sphere: points, rotations, geodesic distance and
//! spherical caps.
//!
//! Points are stored with arbitrary ambient dimension `d + 1`, but everything
//! that parametrizes circles assumes `S^2`. The hot loops elsewhere in the
//! crate work on plain `[f64; 3]` arrays; the helpers at the bottom of this
//! module operate on those.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Norm tolerance for [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;

/// A point on `S^d` stored by its `d + 1` Cartesian coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Wraps coordinates that already have unit norm (within [`UNIT_TOL`]).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { coords })
    }

    /// Normalizes arbitrary non-zero coordinates onto the sphere.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if coords.len() < 2 || !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotUnit { norm });
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { coords })
    }

    pub fn from_xyz(p: [f64; 3]) -> Result<Self> {
        Self::new(p.to_vec())
    }

    /// The `i`-th standard basis vector of `R^{dim}`.
    pub fn axis(dim: usize, i: usize) -> Self {
        assert!(i < dim && dim >= 2);
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Self { coords }
    }

    /// Sphere dimension `d` (ambient dimension minus one).
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Coordinates as a 3-array; fails unless the point lies on `S^2`.
    pub fn xyz(&self) -> Result<[f64; 3]> {
        match self.coords.as_slice() {
            &[x, y, z] => Ok([x, y, z]),
            _ => Err(Error::UnsupportedDimension {
                expected: 2,
                found: self.sphere_dim(),
            }),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        same_dim(self, other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }
}

fn same_dim(a: &UnitVector, b: &UnitVector) -> Result<()> {
    if a.coords.len() != b.coords.len() {
        return Err(Error::DimensionMismatch {
            left: a.sphere_dim(),
            right: b.sphere_dim(),
        });
    }
    Ok(())
}

/// Length of the shortest great-circle arc between `x` and `y`, in `[0, pi]`.
///
/// Evaluated as `2 atan2(|x - y|, |x + y|)`, which equals `arccos <x, y>`
/// without its loss of precision near 0 and pi.
pub fn geodesic_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    same_dim(x, y)?;
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.coords.iter().zip(&y.coords) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// An orthogonal matrix with determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(ambient_dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Accepts a matrix after checking `M^T M = I` (1e-12) and `det M = 1`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Domain("rotation matrix must be square".into()));
        }
        let n = matrix.nrows();
        let gram = matrix.transpose() * &matrix;
        let off = (gram - DMatrix::<f64>::identity(n, n)).abs().max();
        if off > 1e-12 {
            return Err(Error::Domain(format!("matrix not orthogonal ({off:e})")));
        }
        if (matrix.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::Domain("matrix determinant is not +1".into()));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &UnitVector) -> Result<UnitVector> {
        if x.coords.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                left: self.ambient_dim() - 1,
                right: x.sphere_dim(),
            });
        }
        let mut out = vec![0.0; x.coords.len()];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..x.coords.len())
                .map(|j| self.matrix[(i, j)] * x.coords[j])
                .sum();
        }
        Ok(UnitVector { coords: out })
    }

    pub fn compose(&self, first: &Rotation) -> Rotation {
        Rotation {
            matrix: &self.matrix * &first.matrix,
        }
    }
}

/// Smallest-index coordinate axis that is far from parallel to `x`,
/// orthogonalized against `x`.
pub(crate) fn orthogonal_axis(x: &[f64]) -> Vec<f64> {
    let i = x.iter().position(|c| c.abs() < 0.9).unwrap_or(0);
    let mut w: Vec<f64> = x.iter().map(|c| -x[i] * c).collect();
    w[i] += 1.0;
    let n = w.iter().map(|c| c * c).sum::<f64>().sqrt();
    w.iter_mut().for_each(|c| *c /= n);
    w
}

/// A rotation `R` with `R u = v`.
///
/// For `<u, v> >= -1/2` this is the plane rotation
/// `I - (u + v)(u + v)^T / (1 + c) + 2 v u^T`; otherwise `u` is first turned
/// by 180 degrees in the plane of `u` and a fixed orthogonal axis, then the
/// remaining small rotation is applied.
pub fn rotation_taking(u: &UnitVector, v: &UnitVector) -> Result<Rotation> {
    same_dim(u, v)?;
    let c = u.dot(v)?;
    if c >= -0.5 {
        return Ok(plane_rotation(u.coords(), v.coords(), c));
    }
    let w = orthogonal_axis(u.coords());
    let n = u.coords.len();
    let mut flip = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            flip[(i, j)] -= 2.0 * (u.coords[i] * u.coords[j] + w[i] * w[j]);
        }
    }
    let flipped = u.neg();
    let rest = plane_rotation(flipped.coords(), v.coords(), -c);
    Ok(rest.compose(&Rotation { matrix: flip }))
}

fn plane_rotation(u: &[f64], v: &[f64], c: f64) -> Rotation {
    let n = u.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            let s_i = u[i] + v[i];
            let s_j = u[j] + v[j];
            m[(i, j)] += -s_i * s_j / (1.0 + c) + 2.0 * v[i] * u[j];
        }
    }
    Rotation { matrix: m }
}

/// Closed geodesic ball `B_r(x)` with `0 < r < pi/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCap {
    center: UnitVector,
    radius: f64,
}

impl SphericalCap {
    pub fn new(center: UnitVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < FRAC_PI_2) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &UnitVector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Center offset and in-plane frame of a cap boundary circle on `S^2`.
///
/// The circle is `theta -> offset + sin r (u cos theta + v sin theta)` with
/// `u x v = x`, so increasing `theta` runs counterclockwise seen from outside
/// the sphere above the cap center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFrame {
    pub center: [f64; 3],
    pub offset: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub cos_r: f64,
    pub sin_r: f64,
}

impl CircleFrame {
    pub fn point(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        std::array::from_fn(|i| self.offset[i] + self.sin_r * (c * self.u[i] + s * self.v[i]))
    }

    /// Derivative of [`CircleFrame::point`] with respect to `theta`.
    pub fn tangent(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        std::array::from_fn(|i| self.sin_r * (-s * self.u[i] + c * self.v[i]))
    }

    /// Angle of a point on the circle, in `[0, 2 pi)`.
    pub fn angle_of(&self, p: &[f64; 3]) -> f64 {
        let a = dot3(p, &self.v).atan2(dot3(p, &self.u));
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}

pub fn cap_boundary_frame(cap: &SphericalCap) -> Result<CircleFrame> {
    let x = cap.center.xyz()?;
    let u_vec = orthogonal_axis(&x);
    let u = [u_vec[0], u_vec[1], u_vec[2]];
    let v = cross3(&x, &u);
    let (sin_r, cos_r) = cap.radius.sin_cos();
    Ok(CircleFrame {
        center: x,
        offset: scale3(&x, cos_r),
        u,
        v,
        cos_r,
        sin_r,
    })
}

/// Fibonacci lattice: `n` deterministic, quasi-uniform points on `S^2`.
pub fn fibonacci_mesh(n: usize) -> Vec<UnitVector> {
    fibonacci_points(n)
        .into_iter()
        .map(|p| UnitVector { coords: p.to_vec() })
        .collect()
}

pub(crate) fn fibonacci_points(n: usize) -> Vec<[f64; 3]> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let (s, c) = (i as f64 * golden_angle).sin_cos();
            let p = [rho * c, rho * s, z];
            let n = norm3(&p);
            [p[0] / n, p[1] / n, p[2] / n]
        })
        .collect()
}

/// Upper bound on the covering radius of the `n`-point Fibonacci lattice.
///
/// The measured covering radius is `2.728 / sqrt(n)` for `n >= 100`
/// (attained near the poles).
pub fn fibonacci_resolution(n: usize) -> f64 {
    2.8 / (n.max(1) as f64).sqrt()
}

/// A sup-inf distance estimate together with its error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringEstimate {
    pub radius: f64,
    /// Bound on `|radius - true covering radius|` from the probe mesh and the
    /// sampling of the covered set.
    pub resolution: f64,
}

/// Nearest-point queries on `S^2` over a fixed point cloud, pruned by the
/// `z` coordinate.
pub(crate) struct NearestIndex {
    points: Vec<[f64; 3]>,
}

impl NearestIndex {
    pub(crate) fn new(mut points: Vec<[f64; 3]>) -> Self {
        points.sort_by(|a, b| a[2].total_cmp(&b[2]));
        Self { points }
    }

    /// Geodesic distance from `p` to the nearest indexed point.
    pub(crate) fn min_distance(&self, p: &[f64; 3]) -> f64 {
        let n = self.points.len();
        if n == 0 {
            return PI;
        }
        let start = self.points.partition_point(|q| q[2] < p[2]);
        let mut best2 = f64::INFINITY;
        let chord2 = |q: &[f64; 3]| {
            let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
            dot3(&d, &d)
        };
        let mut hi = start;
        while hi < n {
            let dz = self.points[hi][2] - p[2];
            if dz * dz > best2 {
                break;
            }
            best2 = best2.min(chord2(&self.points[hi]));
            hi += 1;
        }
        let mut lo = start;
        while lo > 0 {
            lo -= 1;
            let dz = p[2] - self.points[lo][2];
            if dz * dz > best2 {
                break;
            }
            best2 = best2.min(chord2(&self.points[lo]));
        }
        2.0 * (0.5 * best2.sqrt()).min(1.0).asin()
    }

    /// Largest nearest-point distance over a Fibonacci probe mesh.
    pub(crate) fn farthest_over_mesh(&self, mesh_size: usize) -> f64 {
        use rayon::prelude::*;
        fibonacci_points(mesh_size)
            .par_iter()
            .map(|p| self.min_distance(p))
            .reduce(|| 0.0, f64::max)
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn scale3(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn normalize3(a: &[f64; 3]) -> [f64; 3] {
    scale3(a, 1.0 / norm3(a))
}

/// Geodesic distance between points of `S^2`.
pub(crate) fn distance3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    2.0 * norm3(&d).atan2(norm3(&s))
}
