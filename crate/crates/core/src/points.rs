//! Spherical design point sets: built-in Platonic sets, the plain-text
//! point format, residual certification and covering radius.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;

use crate::curve::QuadratureReport;
use crate::error::{Error, Result};
use crate::geometry::{
    cross3, distance3, dot3, fibonacci_resolution, normalize3, orthogonal_axis, CoveringEstimate,
    NearestIndex, UnitVector,
};
use crate::polynomial::{monomial_basis, PowerTable};

/// Residual below which a point set counts as a certified design.
pub const CERTIFY_THRESHOLD: f64 = 1e-9;

/// Maximum deviation from unit norm accepted (and corrected) on input.
pub const INPUT_NORM_TOL: f64 = 1e-6;

/// Minimum chordal separation between distinct points.
pub const MIN_SEPARATION: f64 = 1e-9;

/// Probe mesh used when no size is given.
pub const DEFAULT_MESH: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinDesign {
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
}

impl BuiltinDesign {
    pub const ALL: [BuiltinDesign; 4] = [
        BuiltinDesign::Tetrahedron,
        BuiltinDesign::Octahedron,
        BuiltinDesign::Cube,
        BuiltinDesign::Icosahedron,
    ];

    /// Declared design strength.
    pub fn degree(self) -> usize {
        match self {
            BuiltinDesign::Tetrahedron => 2,
            BuiltinDesign::Octahedron | BuiltinDesign::Cube => 3,
            BuiltinDesign::Icosahedron => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinDesign::Tetrahedron => "tetrahedron",
            BuiltinDesign::Octahedron => "octahedron",
            BuiltinDesign::Cube => "cube",
            BuiltinDesign::Icosahedron => "icosahedron",
        }
    }

    pub fn vertices(self) -> Vec<[f64; 3]> {
        let s3 = 1.0 / 3f64.sqrt();
        match self {
            BuiltinDesign::Tetrahedron => {
                vec![[s3, s3, s3], [s3, -s3, -s3], [-s3, s3, -s3], [-s3, -s3, s3]]
            }
            BuiltinDesign::Octahedron => vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ],
            BuiltinDesign::Cube => {
                let mut v = Vec::with_capacity(8);
                for sx in [1.0, -1.0] {
                    for sy in [1.0, -1.0] {
                        for sz in [1.0, -1.0] {
                            v.push([sx * s3, sy * s3, sz * s3]);
                        }
                    }
                }
                v
            }
            BuiltinDesign::Icosahedron => {
                let phi = 0.5 * (1.0 + 5f64.sqrt());
                let n = (1.0 + phi * phi).sqrt();
                let (a, b) = (1.0 / n, phi / n);
                let mut v = Vec::with_capacity(12);
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        v.push([0.0, s1 * a, s2 * b]);
                        v.push([s1 * a, s2 * b, 0.0]);
                        v.push([s2 * b, 0.0, s1 * a]);
                    }
                }
                v
            }
        }
    }
}

impl FromStr for BuiltinDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinDesign::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownDesign(s.to_string()))
    }
}

impl fmt::Display for BuiltinDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointSource {
    Builtin(BuiltinDesign),
    File(PathBuf),
    Custom,
}

impl fmt::Display for PointSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSource::Builtin(d) => write!(f, "{d}"),
            PointSource::File(p) => write!(f, "{}", p.display()),
            PointSource::Custom => f.write_str("custom"),
        }
    }
}

/// An immutable point set with its claimed degree and certification result.
#[derive(Debug)]
pub struct DesignPointSet {
    points: Vec<[f64; 3]>,
    degree: usize,
    source: PointSource,
    residual: f64,
    certified: bool,
    mesh_covering: Mutex<Vec<(usize, CoveringEstimate)>>,
    exact_covering: OnceLock<f64>,
}

impl Clone for DesignPointSet {
    fn clone(&self) -> Self {
        Self {
            points: self.points.clone(),
            degree: self.degree,
            source: self.source.clone(),
            residual: self.residual,
            certified: self.certified,
            mesh_covering: Mutex::new(self.mesh_covering.lock().unwrap().clone()),
            exact_covering: self.exact_covering.clone(),
        }
    }
}

impl DesignPointSet {
    /// Validates unit norm (within [`crate::geometry::UNIT_TOL`]) and
    /// distinctness, then certifies at `degree`.
    pub fn new(points: Vec<[f64; 3]>, degree: usize, source: PointSource) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NoPoints);
        }
        for p in &points {
            UnitVector::from_xyz(*p)?;
        }
        check_distinct(&points)?;
        let residual = residual_report(&points, degree).max_residual;
        Ok(Self {
            points,
            degree,
            source,
            residual,
            certified: residual <= CERTIFY_THRESHOLD,
            mesh_covering: Mutex::new(Vec::new()),
            exact_covering: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xyz(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn points(&self) -> Vec<UnitVector> {
        self.points
            .iter()
            .map(|p| UnitVector::from_xyz(*p).expect("validated on construction"))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn source(&self) -> &PointSource {
        &self.source
    }

    /// Residual at the claimed degree.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Mesh-based covering radius; results are cached per mesh size.
    pub fn covering_radius(&self, mesh_size: usize) -> Result<CoveringEstimate> {
        if let Some((_, est)) = self
            .mesh_covering
            .lock()
            .unwrap()
            .iter()
            .find(|(m, _)| *m == mesh_size)
        {
            return Ok(*est);
        }
        if mesh_size < 100 {
            return Err(Error::InvalidArgument(
                "mesh size must be at least 100".into(),
            ));
        }
        let index = NearestIndex::new(self.points.clone());
        let est = CoveringEstimate {
            radius: index.farthest_over_mesh(mesh_size),
            resolution: fibonacci_resolution(mesh_size),
        };
        self.mesh_covering.lock().unwrap().push((mesh_size, est));
        Ok(est)
    }

    /// Covering radius to rounding accuracy, from the vertices of the
    /// spherical Voronoi diagram.
    pub fn exact_covering_radius(&self) -> Result<f64> {
        if let Some(r) = self.exact_covering.get() {
            return Ok(*r);
        }
        let mesh = DEFAULT_MESH.max(50 * self.points.len());
        let est = self.covering_radius(mesh)?;
        let r = voronoi_covering_radius(&self.points, est);
        Ok(*self.exact_covering.get_or_init(|| r))
    }
}

fn check_distinct(points: &[[f64; 3]]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][2].total_cmp(&points[b][2]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if points[j][2] - points[i][2] > MIN_SEPARATION {
                break;
            }
            if distance3(&points[i], &points[j]) <= MIN_SEPARATION {
                return Err(Error::DuplicatePoint(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

/// Largest nearest-point distance over the candidate farthest points: the
/// antipodes, the far midpoints of pairs and both circumcenters of triples.
/// Pairs and triples are limited to those that can bound an empty cap of
/// radius at least the mesh lower bound.
fn voronoi_covering_radius(points: &[[f64; 3]], est: CoveringEstimate) -> f64 {
    let index = NearestIndex::new(points.to_vec());
    let lower = est.radius;
    // two points of a Voronoi triple are at most 2 rho apart
    let upper = (est.radius + 2.0 * est.resolution).min(std::f64::consts::PI);
    let max_pair = (2.0 * upper).min(std::f64::consts::PI);
    let n = points.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .filter(|&j| distance3(&points[i], &points[j]) <= max_pair + 1e-12)
                .collect()
        })
        .collect();

    let mut best = points
        .iter()
        .map(|p| index.min_distance(&[-p[0], -p[1], -p[2]]))
        .fold(0.0, f64::max);
    let consider = |c: [f64; 3]| -> f64 {
        let r = index.min_distance(&c);
        let neg = [-c[0], -c[1], -c[2]];
        r.max(index.min_distance(&neg))
    };
    for i in 0..n {
        for &j in &neighbors[i] {
            let (x, y) = (points[i], points[j]);
            let s = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
            let mid = if dot3(&s, &s) > 1e-24 {
                normalize3(&s)
            } else {
                let w = orthogonal_axis(&x);
                [w[0], w[1], w[2]]
            };
            best = best.max(consider(mid));
        }
    }
    let triple_best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut local: f64 = 0.0;
            let ni = &neighbors[i];
            for (pos, &j) in ni.iter().enumerate() {
                for &k in &ni[pos + 1..] {
                    let (lo, hi) = if j < k { (j, k) } else { (k, j) };
                    if neighbors[lo].binary_search(&hi).is_err() {
                        continue;
                    }
                    let (a, b, c) = (points[i], points[j], points[k]);
                    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                    let ac = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                    let nrm = cross3(&ab, &ac);
                    if dot3(&nrm, &nrm) < 1e-30 {
                        continue;
                    }
                    let center = normalize3(&nrm);
                    for c in [center, [-center[0], -center[1], -center[2]]] {
                        // the cap through a, b, c around this center is too small to matter
                        if distance3(&c, &a) + 1e-9 < lower {
                            continue;
                        }
                        local = local.max(index.min_distance(&c));
                    }
                }
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    best.max(triple_best)
}

/// The built-in set, certified at its declared degree by the residual check.
pub fn builtin_design(design: BuiltinDesign) -> Result<DesignPointSet> {
    DesignPointSet::new(
        design.vertices(),
        design.degree(),
        PointSource::Builtin(design),
    )
}

/// Parses the whitespace `x y z` format: one point per line, `#` comments,
/// blank lines ignored. Points within [`INPUT_NORM_TOL`] of the sphere are
/// renormalized.
pub fn parse_points(text: &str, path: &Path) -> Result<Vec<[f64; 3]>> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 coordinates, found {}",
                tokens.len()
            )));
        }
        let mut p = [0.0; 3];
        for (slot, tok) in p.iter_mut().zip(&tokens) {
            *slot = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("invalid number '{tok}'")))?;
        }
        let norm = dot3(&p, &p).sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NormViolation {
                path: path.to_path_buf(),
                line: i + 1,
                norm,
            });
        }
        points.push(normalize3(&p));
    }
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    Ok(points)
}

/// Reads a point file and certifies it at `claimed_t`. A failed
/// certification is recorded on the set, not returned as an error.
pub fn load_points(path: &Path, claimed_t: usize) -> Result<DesignPointSet> {
    let text = std::fs::read_to_string(path)?;
    let points = parse_points(&text, path)?;
    DesignPointSet::new(points, claimed_t, PointSource::File(path.to_path_buf()))
}

/// Builtin name or file path.
pub fn resolve_points(spec: &str, claimed_t: Option<usize>) -> Result<DesignPointSet> {
    match spec.parse::<BuiltinDesign>() {
        Ok(d) => match claimed_t {
            Some(t) => DesignPointSet::new(d.vertices(), t, PointSource::Builtin(d)),
            None => builtin_design(d),
        },
        Err(_) => {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(Error::UnknownDesign(spec.to_string()));
            }
            let t = claimed_t.ok_or_else(|| {
                Error::InvalidArgument("a degree is required for point files".into())
            })?;
            load_points(path, t)
        }
    }
}

fn residual_report(points: &[[f64; 3]], t: usize) -> QuadratureReport {
    let basis = monomial_basis(t);
    let sums = points
        .par_iter()
        .fold(
            || vec![0.0; basis.len()],
            |mut acc, p| {
                let table = PowerTable::new(p, t);
                for (a, m) in acc.iter_mut().zip(&basis) {
                    *a += table.eval(m);
                }
                acc
            },
        )
        .reduce(
            || vec![0.0; basis.len()],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let n = points.len() as f64;
    let averages: Vec<f64> = sums.iter().map(|s| s / n).collect();
    QuadratureReport::from_averages(t, basis, &averages, None)
}

/// `|mean over X of m - int_S2 m|` for every monomial of degree `<= t`.
pub fn point_design_residual(x: &DesignPointSet, t: usize) -> QuadratureReport {
    residual_report(&x.points, t)
}

pub fn covering_radius_points(x: &DesignPointSet, mesh_size: usize) -> Result<CoveringEstimate> {
    x.covering_radius(mesh_size)
}
