//! Points on the unit sphere, test configurations and points files.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs whose norm is within this band of 1 are renormalized; anything
/// further out is rejected.
pub const RENORMALIZE_BAND: f64 = 1e-6;

/// Two points closer than this are treated as coincident.
pub const DISTINCT_EPS: f64 = 1e-12;

/// A unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    x: f64,
    y: f64,
    z: f64,
}

impl SpherePoint {
    /// Builds a point, renormalizing inputs that are off the sphere by at
    /// most [`RENORMALIZE_BAND`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_BAND {
            return Err(Error::NotUnit { x, y, z, norm });
        }
        Ok(Self::normalized(x, y, z))
    }

    /// Projects any nonzero vector onto the sphere.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotUnit {
                x: v[0],
                y: v[1],
                z: v[2],
                norm,
            });
        }
        Ok(Self::normalized(v[0], v[1], v[2]))
    }

    fn normalized(x: f64, y: f64, z: f64) -> Self {
        // Already unit to rounding: keep the bits so files round-trip.
        if (x * x + y * y + z * z - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Self { x, y, z };
        }
        let norm = (x * x + y * y + z * z).sqrt();
        let (x, y, z) = (x / norm, y / norm, z / norm);
        let norm = (x * x + y * y + z * z).sqrt();
        Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Cosine of the angle to `other`, clamped to [−1, 1].
    pub fn cosine(&self, other: &SpherePoint) -> f64 {
        self.dot(other).clamp(-1.0, 1.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Euclidean chord length ‖p − q‖ ∈ [0, 2].
pub fn pair_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    squared_distance(p, q).sqrt()
}

/// ‖p − q‖², computed from coordinate differences (accurate for close pairs).
pub fn squared_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    dx * dx + dy * dy + dz * dz
}

/// An ordered, nonempty list of points on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<SpherePoint>,
}

impl Configuration {
    pub fn new(points: Vec<SpherePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("n", "a configuration needs at least one point"));
        }
        Ok(Self { points })
    }

    pub fn from_coords(coords: &[[f64; 3]]) -> Result<Self> {
        let points = coords
            .iter()
            .map(|c| SpherePoint::new(c[0], c[1], c[2]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn coords(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(SpherePoint::coords).collect()
    }

    /// First pair (in index order) closer than [`DISTINCT_EPS`], if any.
    pub fn find_coincident(&self) -> Option<(usize, usize, f64)> {
        for (i, p) in self.points.iter().enumerate() {
            for (j, q) in self.points.iter().enumerate().skip(i + 1) {
                let d = pair_distance(p, q);
                if d <= DISTINCT_EPS {
                    return Some((i, j, d));
                }
            }
        }
        None
    }

    /// Fails if any two points coincide; energy operations call this first.
    pub fn ensure_distinct(&self) -> Result<()> {
        match self.find_coincident() {
            Some((first, second, distance)) => Err(Error::CoincidentPoints {
                first,
                second,
                distance,
            }),
            None => Ok(()),
        }
    }

    /// Rotation about `axis` (normalized internally) by `angle` radians.
    pub fn rotated(&self, axis: [f64; 3], angle: f64) -> Result<Self> {
        let k = SpherePoint::from_vector(axis)?.coords();
        let (s, c) = angle.sin_cos();
        let points = self
            .points
            .iter()
            .map(|p| {
                let v = p.coords();
                let kxv = cross(k, v);
                let kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
                SpherePoint::from_vector([
                    v[0] * c + kxv[0] * s + k[0] * kv * (1.0 - c),
                    v[1] * c + kxv[1] * s + k[1] * kv * (1.0 - c),
                    v[2] * c + kxv[2] * s + k[2] * kv * (1.0 - c),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Built-in configuration generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    RandomUniform,
    Fibonacci,
    Tetrahedron,
    Antipodal,
}

impl std::str::FromStr for ConfigKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_uniform" | "random-uniform" => Ok(Self::RandomUniform),
            "fibonacci" => Ok(Self::Fibonacci),
            "tetrahedron" => Ok(Self::Tetrahedron),
            "antipodal" => Ok(Self::Antipodal),
            other => Err(Error::invalid("kind", format!("unknown configuration kind `{other}`"))),
        }
    }
}

/// Generates `n` points of the given kind. `seed` only affects
/// [`ConfigKind::RandomUniform`].
pub fn generate_configuration(kind: ConfigKind, n: usize, seed: u64) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    match kind {
        ConfigKind::RandomUniform => random_uniform(n, seed),
        ConfigKind::Fibonacci => fibonacci(n),
        ConfigKind::Tetrahedron => {
            if n != 4 {
                return Err(Error::invalid("n", format!("tetrahedron needs n = 4, got {n}")));
            }
            tetrahedron()
        }
        ConfigKind::Antipodal => {
            if n != 2 {
                return Err(Error::invalid("n", format!("antipodal pair needs n = 2, got {n}")));
            }
            Configuration::from_coords(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        }
    }
}

/// Normalized 3D standard normals; one ChaCha stream per configuration.
fn random_uniform(n: usize, seed: u64) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let v: [f64; 3] = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        let norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if norm2 < 1e-20 {
            continue;
        }
        points.push(SpherePoint::from_vector(v)?);
    }
    Configuration::new(points)
}

/// Golden-angle spiral with `z = 1 − (2i + 1)/n`.
fn fibonacci(n: usize) -> Result<Configuration> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let nf = n as f64;
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / nf;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            SpherePoint::from_vector([r * phi.cos(), r * phi.sin(), z])
        })
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(points)
}

fn tetrahedron() -> Result<Configuration> {
    let r = (8.0f64 / 9.0).sqrt();
    let mut coords = vec![[0.0, 0.0, 1.0]];
    for k in 0..3 {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        coords.push([r * phi.cos(), r * phi.sin(), -1.0 / 3.0]);
    }
    let points = coords
        .into_iter()
        .map(SpherePoint::from_vector)
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(points)
}

#[derive(Debug, Serialize, Deserialize)]
struct PointsJson {
    n: usize,
    points: Vec<[f64; 3]>,
}

/// Points file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointsFormat {
    Csv,
    Json,
}

impl PointsFormat {
    /// `.json` selects JSON; everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => PointsFormat::Json,
            _ => PointsFormat::Csv,
        }
    }
}

pub fn read_configuration(path: &Path) -> Result<Configuration> {
    let text = fs::read_to_string(path)?;
    parse_configuration(&text, PointsFormat::from_path(path))
}

pub fn write_configuration(cfg: &Configuration, path: &Path) -> Result<()> {
    fs::write(path, format_configuration(cfg, PointsFormat::from_path(path))?)?;
    Ok(())
}

/// Parses a points document. Duplicate points are logged, not rejected.
pub fn parse_configuration(text: &str, format: PointsFormat) -> Result<Configuration> {
    let cfg = match format {
        PointsFormat::Json => {
            let doc: PointsJson = serde_json::from_str(text)?;
            if doc.n != doc.points.len() {
                return Err(Error::Parse {
                    line: 0,
                    reason: format!("n = {} but {} points listed", doc.n, doc.points.len()),
                });
            }
            Configuration::from_coords(&doc.points)?
        }
        PointsFormat::Csv => parse_csv(text)?,
    };
    if let Some((i, j, _)) = cfg.find_coincident() {
        log::warn!("points {i} and {j} coincide; energy operations will reject this configuration");
    }
    Ok(cfg)
}

fn parse_csv(text: &str) -> Result<Configuration> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if points.is_empty() && line.replace(' ', "").eq_ignore_ascii_case("x,y,z") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: idx + 1,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let mut v = [0.0; 3];
        for (slot, field) in v.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                reason: format!("`{field}` is not a number"),
            })?;
        }
        points.push(SpherePoint::new(v[0], v[1], v[2])?);
    }
    Configuration::new(points)
}

pub fn format_configuration(cfg: &Configuration, format: PointsFormat) -> Result<String> {
    match format {
        PointsFormat::Json => {
            let doc = PointsJson {
                n: cfg.n(),
                points: cfg.coords(),
            };
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        PointsFormat::Csv => {
            let mut out = String::from("x,y,z\n");
            for p in cfg.points() {
                // `{:?}` prints the shortest round-tripping representation.
                out.push_str(&format!("{:?},{:?},{:?}\n", p.x, p.y, p.z));
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antipodal_pair() {
        let cfg = generate_configuration(ConfigKind::Antipodal, 2, 0).unwrap();
        assert_eq!(cfg.coords(), vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]);
        assert_eq!(pair_distance(&cfg.points()[0], &cfg.points()[1]), 2.0);
    }

    #[test]
    fn tetrahedron_has_equal_dot_products() {
        let cfg = generate_configuration(ConfigKind::Tetrahedron, 4, 0).unwrap();
        assert_eq!(cfg.points()[0].coords(), [0.0, 0.0, 1.0]);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = cfg.points()[i].dot(&cfg.points()[j]);
                assert!((d + 1.0 / 3.0).abs() < 1e-15, "{d}");
            }
        }
    }

    #[test]
    fn kind_and_count_must_agree() {
        assert!(generate_configuration(ConfigKind::Tetrahedron, 5, 0).is_err());
        assert!(generate_configuration(ConfigKind::Antipodal, 3, 0).is_err());
        assert!(generate_configuration(ConfigKind::Fibonacci, 0, 0).is_err());
        assert!(generate_configuration(ConfigKind::RandomUniform, 0, 0).is_err());
    }

    #[test]
    fn random_points_are_unit_and_reproducible() {
        let a = generate_configuration(ConfigKind::RandomUniform, 50, 7).unwrap();
        let b = generate_configuration(ConfigKind::RandomUniform, 50, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 50);
        for p in a.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        assert!(a.find_coincident().is_none());
    }

    #[test]
    fn fibonacci_points_are_distinct_units() {
        let cfg = generate_configuration(ConfigKind::Fibonacci, 200, 0).unwrap();
        assert!(cfg.find_coincident().is_none());
        assert!(cfg.points().iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn distances() {
        let e1 = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
        let e2 = SpherePoint::new(0.0, 1.0, 0.0).unwrap();
        assert!((pair_distance(&e1, &e2) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(pair_distance(&e1, &e1), 0.0);
    }

    #[test]
    fn renormalization_band() {
        let p = SpherePoint::new(0.0, 0.0, 1.000_000_2).unwrap();
        assert_eq!(p.z(), 1.0);
        assert!(SpherePoint::new(0.0, 0.0, 2.0).is_err());
        assert!(SpherePoint::new(0.0, 0.0, 1.01).is_err());
    }

    #[test]
    fn csv_rows() {
        let cfg = parse_configuration("x,y,z\n0,0,1.0000002\n1,0,0\n", PointsFormat::Csv).unwrap();
        assert_eq!(cfg.n(), 2);
        assert!((cfg.points()[0].norm() - 1.0).abs() < 1e-15);

        assert!(matches!(
            parse_configuration("0,0,2\n", PointsFormat::Csv),
            Err(Error::NotUnit { .. })
        ));
        assert!(matches!(
            parse_configuration("0,0\n", PointsFormat::Csv),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_configuration("0,zero,1\n", PointsFormat::Csv),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn duplicates_load_but_fail_distinctness() {
        let cfg = parse_configuration("0,0,1\n0,0,1\n", PointsFormat::Csv).unwrap();
        assert!(matches!(
            cfg.ensure_distinct(),
            Err(Error::CoincidentPoints { first: 0, second: 1, .. })
        ));
    }

    #[test]
    fn json_count_mismatch_is_rejected() {
        let doc = r#"{"n": 3, "points": [[0,0,1],[0,0,-1]]}"#;
        assert!(parse_configuration(doc, PointsFormat::Json).is_err());
    }

    #[test]
    fn rotation_preserves_distances() {
        let cfg = generate_configuration(ConfigKind::RandomUniform, 10, 3).unwrap();
        let rot = cfg.rotated([1.0, 2.0, -0.5], 0.7).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let a = pair_distance(&cfg.points()[i], &cfg.points()[j]);
                let b = pair_distance(&rot.points()[i], &rot.points()[j]);
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
