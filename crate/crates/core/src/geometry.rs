//! Arc parametrizations on `[-1, 1]`, the elastic medium, and scenes.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

/// Samples per arc used by the speed and distance checks.
pub const CHECK_SAMPLES: usize = 257;

/// Current scene file format version.
pub const SCENE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticMedium {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

impl Default for ElasticMedium {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            mu: 1.0,
            rho: 1.0,
            omega: 50.0,
        }
    }
}

impl ElasticMedium {
    pub fn new(lambda: f64, mu: f64, rho: f64, omega: f64) -> Result<Self> {
        let m = Self {
            lambda,
            mu,
            rho,
            omega,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.lambda, self.mu, self.rho, self.omega].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Medium("parameters must be finite".into()));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Medium(format!("mu = {} must be positive", self.mu)));
        }
        if !(self.lambda + self.mu > 0.0) {
            return Err(Error::Medium(format!(
                "lambda + mu = {} must be positive",
                self.lambda + self.mu
            )));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Medium(format!("rho = {} must be positive", self.rho)));
        }
        if !(self.omega > 0.0) {
            return Err(Error::Medium(format!("omega = {} must be positive", self.omega)));
        }
        Ok(())
    }

    /// Shear wavenumber `ω √(ρ/μ)`.
    pub fn kappa_s(&self) -> f64 {
        self.omega * (self.rho / self.mu).sqrt()
    }

    /// Compressional wavenumber `ω √(ρ/(λ+2μ))`.
    pub fn kappa_p(&self) -> f64 {
        self.omega * (self.rho / (self.lambda + 2.0 * self.mu)).sqrt()
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }
}

/// An analytic open arc `r(t)`, `t ∈ [-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcGeometry {
    /// Segment from `a` (at `t = -1`) to `b` (at `t = 1`).
    Line { a: Vec2, b: Vec2 },
    /// `center + radius (cos θ, sin θ)` with `θ` running linearly from
    /// `angle_start` to `angle_end`.
    CircularArc {
        center: Vec2,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
    },
    /// `scale · e^t (cos(rate t), sin(rate t))`.
    Spiral { scale: f64, rate: f64 },
    /// `(a t + b, c sin(β t + γ) + d)`.
    Sine {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        beta: f64,
        gamma: f64,
    },
}

/// Point data returned by [`arc_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPoint {
    pub point: Vec2,
    pub velocity: Vec2,
    pub normal: Vec2,
    pub jacobian: f64,
}

/// `sin(x)/x`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() / x
    }
}

/// `sinh(u)/u` for complex `u`.
fn sinhc(u: Complex64) -> Complex64 {
    if u.norm() < 0.1 {
        let u2 = u * u;
        1.0 + u2 / 6.0 * (1.0 + u2 / 20.0 * (1.0 + u2 / 42.0 * (1.0 + u2 / 72.0)))
    } else {
        u.sinh() / u
    }
}

impl ArcGeometry {
    /// The unit segment `(-1, 0) → (1, 0)`.
    pub fn unit_segment() -> Self {
        ArcGeometry::Line {
            a: [-1.0, 0.0],
            b: [1.0, 0.0],
        }
    }

    /// Upper unit semicircle traversed counter-clockwise from `(1, 0)`.
    pub fn semicircle() -> Self {
        ArcGeometry::CircularArc {
            center: [0.0, 0.0],
            radius: 1.0,
            angle_start: 0.0,
            angle_end: PI,
        }
    }

    /// `e^t (cos 5t, sin 5t)`.
    pub fn spiral() -> Self {
        ArcGeometry::Spiral {
            scale: 1.0,
            rate: 5.0,
        }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        match *self {
            ArcGeometry::Line { a, b } => [
                0.5 * (a[0] + b[0]) + 0.5 * t * (b[0] - a[0]),
                0.5 * (a[1] + b[1]) + 0.5 * t * (b[1] - a[1]),
            ],
            ArcGeometry::CircularArc {
                center,
                radius,
                angle_start,
                angle_end,
            } => {
                let th = angle_start + 0.5 * (angle_end - angle_start) * (t + 1.0);
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
            ArcGeometry::Spiral { scale, rate } => {
                let e = scale * t.exp();
                [e * (rate * t).cos(), e * (rate * t).sin()]
            }
            ArcGeometry::Sine {
                a,
                b,
                c,
                d,
                beta,
                gamma,
            } => [a * t + b, c * (beta * t + gamma).sin() + d],
        }
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        match *self {
            ArcGeometry::Line { a, b } => [0.5 * (b[0] - a[0]), 0.5 * (b[1] - a[1])],
            ArcGeometry::CircularArc {
                radius,
                angle_start,
                angle_end,
                ..
            } => {
                let k = 0.5 * (angle_end - angle_start);
                let th = angle_start + k * (t + 1.0);
                [-radius * k * th.sin(), radius * k * th.cos()]
            }
            ArcGeometry::Spiral { scale, rate } => {
                let e = scale * t.exp();
                let (s, c) = (rate * t).sin_cos();
                [e * (c - rate * s), e * (s + rate * c)]
            }
            ArcGeometry::Sine { a, c, beta, gamma, .. } => [a, c * beta * (beta * t + gamma).cos()],
        }
    }

    /// Divided difference `(r(s) - r(t)) / (s - t)`, continuous across
    /// `s = t` where it equals `r'(s)`. Computed in closed form so it keeps
    /// full relative accuracy for nearby parameters.
    pub fn chord_quotient(&self, s: f64, t: f64) -> Vec2 {
        let m = 0.5 * (s + t);
        let h = 0.5 * (s - t);
        match *self {
            ArcGeometry::Line { .. } => self.velocity(0.0),
            ArcGeometry::CircularArc {
                radius,
                angle_start,
                angle_end,
                ..
            } => {
                let k = 0.5 * (angle_end - angle_start);
                let th = angle_start + k * (m + 1.0);
                let f = radius * k * sinc(k * h);
                [-f * th.sin(), f * th.cos()]
            }
            ArcGeometry::Spiral { scale, rate } => {
                let z = Complex64::new(1.0, rate);
                let v = scale * (z * m).exp() * z * sinhc(z * h);
                [v.re, v.im]
            }
            ArcGeometry::Sine { a, c, beta, gamma, .. } => {
                [a, c * beta * (beta * m + gamma).cos() * sinc(beta * h)]
            }
        }
    }

    pub fn jacobian(&self, t: f64) -> f64 {
        norm(self.velocity(t))
    }

    /// Unit normal `(r_2', -r_1') / |r'|`.
    pub fn normal(&self, t: f64) -> Vec2 {
        let v = self.velocity(t);
        let j = norm(v);
        [v[1] / j, -v[0] / j]
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            ArcGeometry::Line { a, b } => {
                if !finite(&[a[0], a[1], b[0], b[1]]) {
                    return Err(Error::Geometry("line endpoints must be finite".into()));
                }
            }
            ArcGeometry::CircularArc {
                center,
                radius,
                angle_start,
                angle_end,
            } => {
                if !finite(&[center[0], center[1], radius, angle_start, angle_end]) {
                    return Err(Error::Geometry("circular arc parameters must be finite".into()));
                }
                if !(radius > 0.0) {
                    return Err(Error::Geometry(format!("radius {radius} must be positive")));
                }
                if (angle_end - angle_start).abs() >= 2.0 * PI {
                    return Err(Error::Geometry("circular arc must not close on itself".into()));
                }
            }
            ArcGeometry::Spiral { scale, rate } => {
                if !finite(&[scale, rate]) || !(scale > 0.0) {
                    return Err(Error::Geometry("spiral needs finite rate and positive scale".into()));
                }
            }
            ArcGeometry::Sine {
                a,
                b,
                c,
                d,
                beta,
                gamma,
            } => {
                if !finite(&[a, b, c, d, beta, gamma]) {
                    return Err(Error::Geometry("sine arc parameters must be finite".into()));
                }
            }
        }
        for k in 0..CHECK_SAMPLES {
            let t = sample_param(k);
            let j = self.jacobian(t);
            if !(j > 0.0) || !j.is_finite() {
                return Err(Error::Geometry(format!("arc speed vanishes at t = {t}")));
            }
        }
        Ok(())
    }

    fn samples(&self) -> Vec<Vec2> {
        (0..CHECK_SAMPLES).map(|k| self.point(sample_param(k))).collect()
    }
}

fn sample_param(k: usize) -> f64 {
    -1.0 + 2.0 * k as f64 / (CHECK_SAMPLES - 1) as f64
}

pub fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

/// Point, velocity, unit normal and speed of `arc` at `t`.
pub fn arc_eval(arc: &ArcGeometry, t: f64) -> Result<ArcPoint> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain {
            value: t,
            domain: "[-1, 1]",
        });
    }
    let velocity = arc.velocity(t);
    let jacobian = norm(velocity);
    Ok(ArcPoint {
        point: arc.point(t),
        velocity,
        normal: [velocity[1] / jacobian, -velocity[0] / jacobian],
        jacobian,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub medium: ElasticMedium,
    pub arcs: Vec<ArcGeometry>,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    version: u32,
    medium: ElasticMedium,
    arcs: Vec<ArcGeometry>,
}

/// Summary produced by [`Scene::check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneReport {
    pub arc_count: usize,
    pub kappa_s: f64,
    pub kappa_p: f64,
    pub wavelength_s: f64,
    pub wavelength_p: f64,
    /// `null` in JSON when the scene has a single arc.
    pub min_distance: Option<f64>,
    pub diameter: f64,
    pub warnings: Vec<String>,
}

impl Scene {
    pub fn new(medium: ElasticMedium, arcs: Vec<ArcGeometry>) -> Result<Self> {
        let scene = Self { medium, arcs };
        scene.validate()?;
        Ok(scene)
    }

    pub fn single(medium: ElasticMedium, arc: ArcGeometry) -> Result<Self> {
        Self::new(medium, vec![arc])
    }

    /// Medium and per-arc checks; disjointness is reported by [`Scene::check`].
    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        if self.arcs.is_empty() {
            return Err(Error::Geometry("scene has no arcs".into()));
        }
        for (i, arc) in self.arcs.iter().enumerate() {
            arc.validate()
                .map_err(|e| Error::Geometry(format!("arc {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<SceneReport> {
        self.validate()?;
        let min_distance = scene_min_distance(self);
        let mut warnings = Vec::new();
        let spacing = self.max_sample_spacing();
        if min_distance <= spacing {
            warnings.push(format!(
                "arcs may touch: sampled minimum distance {min_distance:.3e} is within the sample spacing {spacing:.3e}"
            ));
        }
        let (ks, kp) = (self.medium.kappa_s(), self.medium.kappa_p());
        Ok(SceneReport {
            arc_count: self.arcs.len(),
            kappa_s: ks,
            kappa_p: kp,
            wavelength_s: 2.0 * PI / ks,
            wavelength_p: 2.0 * PI / kp,
            min_distance: min_distance.is_finite().then_some(min_distance),
            diameter: self.diameter(),
            warnings,
        })
    }

    /// Largest distance between consecutive check samples over all arcs.
    pub fn max_sample_spacing(&self) -> f64 {
        self.arcs
            .iter()
            .map(|a| {
                let p = a.samples();
                p.windows(2).map(|w| dist(w[0], w[1])).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Diagonal of the bounding box of the sampled arcs.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for arc in &self.arcs {
            for p in arc.samples() {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }

    /// First `count` arcs with the same medium.
    pub fn prefix(&self, count: usize) -> Result<Scene> {
        if count == 0 || count > self.arcs.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot take {count} arcs from a scene of {}",
                self.arcs.len()
            )));
        }
        Ok(Scene {
            medium: self.medium,
            arcs: self.arcs[..count].to_vec(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = SceneFile {
            version: SCENE_VERSION,
            medium: self.medium,
            arcs: self.arcs.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Scene> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version") {
            Some(v) if v.as_u64() == Some(SCENE_VERSION as u64) => {}
            Some(v) => {
                return Err(Error::Geometry(format!(
                    "unsupported scene version {v}, expected {SCENE_VERSION}"
                )))
            }
            None => return Err(Error::Geometry("scene file is missing the version field".into())),
        }
        let file: SceneFile = serde_json::from_str(text).map_err(|e| {
            // name the offending entry; serde reports only the position
            let entry = value
                .get("arcs")
                .and_then(|a| a.as_array())
                .and_then(|arcs| {
                    arcs.iter()
                        .position(|a| serde_json::from_value::<ArcGeometry>(a.clone()).is_err())
                })
                .map_or_else(
                    || {
                        let medium = value.get("medium").cloned().unwrap_or_default();
                        if serde_json::from_value::<ElasticMedium>(medium).is_err() {
                            "medium: ".to_string()
                        } else {
                            String::new()
                        }
                    },
                    |i| format!("arcs[{i}]: "),
                );
            Error::Geometry(format!("{entry}{e}"))
        })?;
        Scene::new(file.medium, file.arcs)
    }

    pub fn load(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Scene::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn dist(p: Vec2, q: Vec2) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn sampled_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for &p in a {
        for &q in b {
            best = best.min(dist(p, q));
        }
    }
    best
}

/// Sampled minimum distance between distinct arcs; `+∞` for a single arc.
///
/// Uses [`CHECK_SAMPLES`] equispaced parameters per arc, so it is a coarse
/// check rather than a certified bound.
pub fn scene_min_distance(scene: &Scene) -> f64 {
    let samples: Vec<Vec<Vec2>> = scene.arcs.iter().map(|a| a.samples()).collect();
    let mut best = f64::INFINITY;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            best = best.min(sampled_distance(&samples[i], &samples[j]));
        }
    }
    best
}

/// Parameter ranges and layout for random sine-arc scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineSceneRanges {
    pub a: (f64, f64),
    pub c: (f64, f64),
    pub beta: (f64, f64),
    pub gamma: (f64, f64),
    /// Horizontal spacing of the layout grid; odd rows shift by half of it.
    pub dx: f64,
    /// Vertical spacing of the layout grid.
    pub dy: f64,
    /// Arcs per layout row.
    pub columns: usize,
    /// Required sampled clearance to previously placed arcs.
    pub min_gap: f64,
    pub max_retries: usize,
}

impl Default for SineSceneRanges {
    fn default() -> Self {
        Self {
            a: (0.3, 0.8),
            c: (0.1, 0.4),
            beta: (1.0, 6.0),
            gamma: (0.0, 2.0 * PI),
            dx: 2.0,
            dy: 1.0,
            columns: 7,
            min_gap: 0.05,
            max_retries: 100,
        }
    }
}

impl SineSceneRanges {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("a", self.a), ("c", self.c), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!("empty range for {name}: [{lo}, {hi}]")));
            }
        }
        if self.columns == 0 || !(self.dx > 0.0) || !(self.dy > 0.0) {
            return Err(Error::InvalidArgument("layout needs positive spacing and columns".into()));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Random sine-arc scene on a staggered grid, ordered bottom to top and
/// left to right.
///
/// Arc `k` sits in row `k / columns`, column `k % columns`, and its
/// parameters are drawn in sequence from one seeded stream, so a scene of
/// `n` arcs is the prefix of any larger scene with the same seed and ranges.
pub fn generate_sine_scene(
    count: usize,
    seed: u64,
    ranges: &SineSceneRanges,
    medium: ElasticMedium,
) -> Result<Scene> {
    if count == 0 {
        return Err(Error::InvalidArgument("arc count must be positive".into()));
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs: Vec<ArcGeometry> = Vec::with_capacity(count);
    let mut placed: Vec<Vec<Vec2>> = Vec::with_capacity(count);
    for k in 0..count {
        let row = k / ranges.columns;
        let col = k % ranges.columns;
        let shift = if row % 2 == 1 { 0.5 * ranges.dx } else { 0.0 };
        let b = col as f64 * ranges.dx + shift;
        let d = row as f64 * ranges.dy;
        let mut accepted = None;
        let mut last = None;
        for _ in 0..=ranges.max_retries {
            let arc = ArcGeometry::Sine {
                a: draw(&mut rng, ranges.a),
                b,
                c: draw(&mut rng, ranges.c),
                d,
                beta: draw(&mut rng, ranges.beta),
                gamma: draw(&mut rng, ranges.gamma),
            };
            let pts = arc.samples();
            let clear = placed
                .iter()
                .all(|other| sampled_distance(&pts, other) > ranges.min_gap);
            if clear && arc.validate().is_ok() {
                accepted = Some((arc, pts));
                break;
            }
            last = Some(arc);
        }
        match accepted {
            Some((arc, pts)) => {
                arcs.push(arc);
                placed.push(pts);
            }
            None => {
                return Err(Error::Generation(format!(
                    "arc {k} still overlaps after {} retries (last draw {:?})",
                    ranges.max_retries, last
                )))
            }
        }
    }
    Scene::new(medium, arcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close2(a: Vec2, b: Vec2, tol: f64) -> bool {
        dist(a, b) <= tol
    }

    #[test]
    fn segment_point() {
        let p = arc_eval(&ArcGeometry::unit_segment(), 0.3).unwrap();
        assert!(close2(p.point, [0.3, 0.0], 1e-15));
        assert!(close2(p.velocity, [1.0, 0.0], 1e-15));
        assert!(close2(p.normal, [0.0, -1.0], 1e-15));
        assert_eq!(p.jacobian, 1.0);
        assert!(arc_eval(&ArcGeometry::unit_segment(), 1.1).is_err());
    }

    #[test]
    fn semicircle_top() {
        let p = arc_eval(&ArcGeometry::semicircle(), 0.0).unwrap();
        assert!(close2(p.point, [0.0, 1.0], 1e-15));
        assert!((p.jacobian - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn spiral_origin() {
        let p = arc_eval(&ArcGeometry::spiral(), 0.0).unwrap();
        assert!(close2(p.point, [1.0, 0.0], 1e-15));
        assert!(close2(p.velocity, [1.0, 5.0], 1e-15));
        assert!((p.jacobian - 26f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn wavenumbers() {
        let m = ElasticMedium::default();
        assert_eq!(m.kappa_s(), 50.0);
        assert_eq!(m.kappa_p(), 25.0);
        assert!(ElasticMedium::new(2.0, 0.0, 1.0, 50.0).is_err());
        assert!(ElasticMedium::new(-1.5, 1.0, 1.0, 50.0).is_err());
    }

    #[test]
    fn min_distance_cases() {
        let m = ElasticMedium::default();
        let par = Scene::new(
            m,
            vec![
                ArcGeometry::unit_segment(),
                ArcGeometry::Line {
                    a: [-1.0, 1.0],
                    b: [1.0, 1.0],
                },
            ],
        )
        .unwrap();
        assert!((scene_min_distance(&par) - 1.0).abs() < 1e-12);
        assert!(par.check().unwrap().warnings.is_empty());

        let touching = Scene::new(
            m,
            vec![
                ArcGeometry::unit_segment(),
                ArcGeometry::Line {
                    a: [1.0, 0.0],
                    b: [2.0, 1.0],
                },
            ],
        )
        .unwrap();
        let d = scene_min_distance(&touching);
        assert!(d <= touching.max_sample_spacing());
        assert_eq!(touching.check().unwrap().warnings.len(), 1);

        let single = Scene::single(m, ArcGeometry::unit_segment()).unwrap();
        assert_eq!(scene_min_distance(&single), f64::INFINITY);
    }

    #[test]
    fn generated_scenes() {
        let r = SineSceneRanges::default();
        let m = ElasticMedium::default();
        let one = generate_sine_scene(1, 3, &r, m).unwrap();
        match one.arcs[0] {
            ArcGeometry::Sine { a, c, beta, gamma, .. } => {
                assert!((r.a.0..r.a.1).contains(&a));
                assert!((r.c.0..r.c.1).contains(&c));
                assert!((r.beta.0..r.beta.1).contains(&beta));
                assert!((r.gamma.0..r.gamma.1).contains(&gamma));
            }
            _ => panic!("expected a sine arc"),
        }
        let s1 = generate_sine_scene(10, 42, &r, m).unwrap();
        let s2 = generate_sine_scene(10, 42, &r, m).unwrap();
        assert_eq!(s1, s2);
        let big = generate_sine_scene(28, 42, &r, m).unwrap();
        assert_eq!(big.prefix(10).unwrap(), s1);
        assert!(scene_min_distance(&big) > r.min_gap);
    }

    #[test]
    fn exhausted_retries_fail() {
        let r = SineSceneRanges {
            dx: 0.1,
            dy: 0.1,
            min_gap: 0.5,
            max_retries: 3,
            ..SineSceneRanges::default()
        };
        let err = generate_sine_scene(3, 1, &r, ElasticMedium::default()).unwrap_err();
        assert!(matches!(err, Error::Generation(_)));
    }

    #[test]
    fn json_round_trip_and_version() {
        let s = Scene::new(
            ElasticMedium::default(),
            vec![ArcGeometry::unit_segment(), ArcGeometry::spiral()],
        )
        .unwrap();
        let text = s.to_json().unwrap();
        assert!(text.contains("\"kind\": \"line\""));
        assert_eq!(Scene::from_json(&text).unwrap(), s);
        let no_version = r#"{"medium":{"lambda":2,"mu":1,"rho":1,"omega":50},"arcs":[{"kind":"spiral","scale":1,"rate":5}]}"#;
        assert!(Scene::from_json(no_version).is_err());
        let bad_mu = r#"{"version":1,"medium":{"lambda":2,"mu":0,"rho":1,"omega":50},"arcs":[{"kind":"spiral","scale":1,"rate":5}]}"#;
        assert!(matches!(Scene::from_json(bad_mu), Err(Error::Medium(_))));
    }

    fn arc_kinds() -> Vec<ArcGeometry> {
        vec![
            ArcGeometry::Line {
                a: [0.2, -1.0],
                b: [1.5, 0.7],
            },
            ArcGeometry::CircularArc {
                center: [0.3, 0.1],
                radius: 1.7,
                angle_start: 0.4,
                angle_end: 2.9,
            },
            ArcGeometry::spiral(),
            ArcGeometry::Sine {
                a: 0.6,
                b: 1.0,
                c: 0.3,
                d: -0.5,
                beta: 4.5,
                gamma: 1.2,
            },
        ]
    }

    proptest! {
        #[test]
        fn derivatives_match_differences(t in -0.999f64..0.999, k in 0usize..4) {
            let arc = &arc_kinds()[k];
            let h = 1e-6;
            let p = arc.point(t + h);
            let m = arc.point(t - h);
            let fd = [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)];
            let v = arc.velocity(t);
            prop_assert!(dist(fd, v) <= 1e-8 * norm(v));
        }

        #[test]
        fn normals_are_unit_and_orthogonal(t in -1.0f64..=1.0, k in 0usize..4) {
            let p = arc_eval(&arc_kinds()[k], t).unwrap();
            prop_assert!((norm(p.normal) - 1.0).abs() < 1e-14);
            let dot = p.normal[0] * p.velocity[0] + p.normal[1] * p.velocity[1];
            prop_assert!(dot.abs() < 1e-14 * p.jacobian);
        }

        #[test]
        fn chord_quotient_matches_difference(s in -1.0f64..=1.0, t in -1.0f64..=1.0, k in 0usize..4) {
            let arc = &arc_kinds()[k];
            let d = arc.chord_quotient(s, t);
            if (s - t).abs() > 1e-3 {
                let (p, q) = (arc.point(s), arc.point(t));
                let direct = [(p[0] - q[0]) / (s - t), (p[1] - q[1]) / (s - t)];
                prop_assert!(dist(d, direct) <= 1e-11 * norm(direct));
            }
            let diag = arc.chord_quotient(s, s);
            prop_assert!(dist(diag, arc.velocity(s)) <= 1e-14 * norm(diag));
        }
    }
}
