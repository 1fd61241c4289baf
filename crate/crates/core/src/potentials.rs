//! Scattered and total displacement fields from solved densities.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{IncidentWave, Problem};
use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, Scene, Vec2};
use crate::kernels::{elastic_fundamental, plane_wave, traction_of_fundamental};
use crate::solver::DensitySolution;

pub type CVec2 = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    /// Relative agreement of successive quadrature orders (unit floor).
    pub tol: f64,
    pub max_order: usize,
    /// Points closer than `cutoff_factor × scene diameter` to an arc are masked.
    pub cutoff_factor: f64,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_order: 4096,
            cutoff_factor: 1e-3,
        }
    }
}

/// Quadrature nodes of one arc at one order, with the density and the
/// quadrature weight folded together.
struct Level {
    points: Vec<Vec2>,
    normals: Vec<Vec2>,
    weighted: Vec<CVec2>,
}

struct ArcData<'a> {
    arc: &'a ArcGeometry,
    coeffs: &'a [Complex64],
    samples: Vec<(f64, Vec2)>,
    levels: Vec<OnceLock<Level>>,
}

const DISTANCE_SAMPLES: usize = 1024;

impl ArcData<'_> {
    fn distance(&self, x: Vec2) -> f64 {
        let d = |t: f64| {
            let p = self.arc.point(t);
            (p[0] - x[0]).hypot(p[1] - x[1])
        };
        let (k, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, (_, p))| (k, (p[0] - x[0]).hypot(p[1] - x[1])))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let last = self.samples.len() - 1;
        let (mut lo, mut hi) = (self.samples[k.saturating_sub(1)].0, self.samples[(k + 1).min(last)].0);
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if d(m1) < d(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        d(0.5 * (lo + hi)).min(d(self.samples[k].0))
    }

    fn level(&self, problem: Problem, k: usize, order: usize) -> &Level {
        self.levels[k].get_or_init(|| build_level(problem, self.arc, self.coeffs, order))
    }
}

fn build_level(problem: Problem, arc: &ArcGeometry, coeffs: &[Complex64], n: usize) -> Level {
    let modes = coeffs.len() / 2;
    let mut level = Level {
        points: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        weighted: Vec::with_capacity(n),
    };
    for k in 0..n {
        // first kind: θ = (k+½)π/n, weight π/n; second kind: θ = (k+1)π/(n+1)
        let theta = match problem {
            Problem::Dirichlet => (k as f64 + 0.5) * PI / n as f64,
            Problem::Neumann => (k as f64 + 1.0) * PI / (n as f64 + 1.0),
        };
        let t = theta.cos();
        let mut dens = [Complex64::default(); 2];
        for l in 0..modes {
            let basis = match problem {
                Problem::Dirichlet => (l as f64 * theta).cos(),
                Problem::Neumann => ((l + 1) as f64 * theta).sin(),
            };
            for p in 0..2 {
                dens[p] += coeffs[2 * l + p] * basis;
            }
        }
        // U_l = sin((l+1)θ)/sinθ, second-kind weight π/(n+1)·sin²θ, times |r'|
        let w = match problem {
            Problem::Dirichlet => PI / n as f64,
            Problem::Neumann => PI / (n as f64 + 1.0) * theta.sin() * arc.jacobian(t),
        };
        level.points.push(arc.point(t));
        level.normals.push(arc.normal(t));
        level.weighted.push([dens[0] * w, dens[1] * w]);
    }
    level
}

/// Reusable evaluator of the scattered field of one solution.
pub struct FieldEvaluator<'a> {
    problem: Problem,
    scene: &'a Scene,
    opts: FieldOptions,
    cutoff: f64,
    base_order: usize,
    arcs: Vec<ArcData<'a>>,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(solution: &'a DensitySolution, scene: &'a Scene, opts: FieldOptions) -> Result<Self> {
        if solution.arcs() != scene.arcs.len() {
            return Err(Error::InvalidArgument(format!(
                "solution has {} arcs, scene has {}",
                solution.arcs(),
                scene.arcs.len()
            )));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArgument("field tolerance must be positive".into()));
        }
        let base_order = (2 * (solution.degree + 1)).max(32).next_power_of_two();
        let mut nlevels = 0;
        let mut order = base_order;
        while order <= opts.max_order {
            nlevels += 1;
            order *= 2;
        }
        let arcs = scene
            .arcs
            .iter()
            .zip(&solution.coeffs)
            .map(|(arc, coeffs)| ArcData {
                arc,
                coeffs,
                samples: (0..=DISTANCE_SAMPLES)
                    .map(|k| {
                        let t = -1.0 + 2.0 * k as f64 / DISTANCE_SAMPLES as f64;
                        (t, arc.point(t))
                    })
                    .collect(),
                levels: (0..nlevels).map(|_| OnceLock::new()).collect(),
            })
            .collect();
        Ok(Self {
            problem: solution.problem,
            scene,
            opts,
            cutoff: opts.cutoff_factor * scene.diameter(),
            base_order,
            arcs,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Distance from `x` to the closest arc.
    pub fn distance(&self, x: Vec2) -> f64 {
        self.arcs.iter().map(|a| a.distance(x)).fold(f64::INFINITY, f64::min)
    }

    fn at_level(&self, k: usize, x: Vec2) -> Result<CVec2> {
        let order = self.base_order << k;
        let medium = &self.scene.medium;
        let mut u = [Complex64::default(); 2];
        for arc in &self.arcs {
            let level = arc.level(self.problem, k, order);
            for ((y, nu), d) in level.points.iter().zip(&level.normals).zip(&level.weighted) {
                match self.problem {
                    Problem::Dirichlet => {
                        let e = elastic_fundamental(medium, x, *y)?;
                        for q in 0..2 {
                            u[q] += e[q][0] * d[0] + e[q][1] * d[1];
                        }
                    }
                    Problem::Neumann => {
                        let m = traction_of_fundamental(medium, x, *y, *nu)?;
                        for q in 0..2 {
                            u[q] += m[0][q] * d[0] + m[1][q] * d[1];
                        }
                    }
                }
            }
        }
        Ok(u)
    }

    /// Scattered field at `x`; quadrature order doubles until two successive
    /// values agree.
    pub fn scattered(&self, x: Vec2) -> Result<CVec2> {
        if self.distance(x) <= self.cutoff {
            return Err(Error::MaskedPoint { x: x[0], y: x[1] });
        }
        let nlevels = self.arcs.first().map_or(0, |a| a.levels.len());
        if nlevels == 0 {
            return Err(Error::Quadrature {
                x: x[0],
                y: x[1],
                order: self.base_order,
            });
        }
        let mut prev = self.at_level(0, x)?;
        for k in 1..nlevels {
            let next = self.at_level(k, x)?;
            let diff = cnorm(&[next[0] - prev[0], next[1] - prev[1]]);
            if diff <= self.opts.tol * cnorm(&next).max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature {
            x: x[0],
            y: x[1],
            order: self.base_order << (nlevels - 1),
        })
    }

    /// Scattered field plus the incident plane wave.
    pub fn total(&self, wave: &IncidentWave, x: Vec2) -> Result<CVec2> {
        let u = self.scattered(x)?;
        let p = plane_wave(&self.scene.medium, wave.alpha, x);
        Ok([u[0] + p[0], u[1] + p[1]])
    }
}

pub fn cnorm(v: &CVec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Single-layer (Dirichlet) or double-layer (Neumann) potential at `x`.
pub fn eval_scattered_field(solution: &DensitySolution, scene: &Scene, x: Vec2) -> Result<CVec2> {
    FieldEvaluator::new(solution, scene, FieldOptions::default())?.scattered(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax].iter().all(|v| v.is_finite());
        if !finite || self.xmin > self.xmax || self.ymin > self.ymax || self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidArgument(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    fn coord(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Point of index `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        [
            Self::coord(self.xmin, self.xmax, self.nx, ix),
            Self::coord(self.ymin, self.ymax, self.ny, iy),
        ]
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// `"xmin,xmax,ymin,ymax,nx,ny"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidArgument(format!("grid '{s}' is not xmin,xmax,ymin,ymax,nx,ny"));
        if parts.len() != 6 {
            return Err(bad());
        }
        let f = |k: usize| parts[k].parse::<f64>().map_err(|_| bad());
        let n = |k: usize| parts[k].parse::<usize>().map_err(|_| bad());
        let spec = GridSpec {
            xmin: f(0)?,
            xmax: f(1)?,
            ymin: f(2)?,
            ymax: f(3)?,
            nx: n(4)?,
            ny: n(5)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Total field on a grid; index `iy * nx + ix`. Masked points hold NaN.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<CVec2>,
    pub mask: Vec<bool>,
    /// Points masked because the quadrature cap was reached.
    pub quadrature_failures: usize,
}

const MASKED: CVec2 = [Complex64::new(f64::NAN, f64::NAN); 2];

pub fn eval_total_field_grid(
    solution: &DensitySolution,
    scene: &Scene,
    wave: &IncidentWave,
    spec: &GridSpec,
    opts: FieldOptions,
) -> Result<FieldGrid> {
    spec.validate()?;
    let eval = FieldEvaluator::new(solution, scene, opts)?;
    let results: Vec<std::result::Result<CVec2, bool>> = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|k| {
            let x = spec.point(k % spec.nx, k / spec.nx);
            match eval.total(wave, x) {
                Ok(u) => Ok(u),
                Err(Error::MaskedPoint { .. }) => Err(false),
                Err(Error::Quadrature { .. }) => Err(true),
                Err(_) => Err(false),
            }
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut mask = Vec::with_capacity(results.len());
    let mut quadrature_failures = 0;
    for r in results {
        match r {
            Ok(u) => {
                values.push(u);
                mask.push(false);
            }
            Err(quad) => {
                quadrature_failures += quad as usize;
                values.push(MASKED);
                mask.push(true);
            }
        }
    }
    Ok(FieldGrid {
        spec: *spec,
        values,
        mask,
        quadrature_failures,
    })
}

impl FieldGrid {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Writes `x,y,re_u1,im_u1,re_u2,im_u2,abs_u` rows, x fastest.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x,y,re_u1,im_u1,re_u2,im_u2,abs_u")?;
        for iy in 0..self.spec.ny {
            for ix in 0..self.spec.nx {
                let [x, y] = self.spec.point(ix, iy);
                let u = self.values[iy * self.spec.nx + ix];
                writeln!(
                    f,
                    "{x},{y},{},{},{},{},{}",
                    u[0].re,
                    u[0].im,
                    u[1].re,
                    u[1].im,
                    cnorm(&u)
                )?;
            }
        }
        f.flush()?;
        Ok(())
    }

    pub fn header(&self, solution: &DensitySolution, scene: &Scene, wave: &IncidentWave, opts: &FieldOptions) -> serde_json::Value {
        serde_json::json!({
            "grid": self.spec,
            "problem": solution.problem,
            "degree": solution.degree,
            "alpha": wave.alpha,
            "omega": scene.medium.omega,
            "arcs": scene.arcs.len(),
            "cutoff": opts.cutoff_factor * scene.diameter(),
            "quadrature_tol": opts.tol,
            "max_order": opts.max_order,
            "masked": self.masked_count(),
            "quadrature_failures": self.quadrature_failures,
            "columns": ["x", "y", "re_u1", "im_u1", "re_u2", "im_u2", "abs_u"],
            "order": "x fastest",
            "masked_value": "NaN",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ElasticMedium;

    fn segment_scene() -> Scene {
        Scene::single(ElasticMedium::default(), ArcGeometry::unit_segment()).unwrap()
    }

    #[test]
    fn grid_spec_parsing() {
        let g: GridSpec = "-2,2,-1,1,5,3".parse().unwrap();
        assert_eq!(g.point(4, 2), [2.0, 1.0]);
        assert_eq!(g.point(0, 1), [-2.0, 0.0]);
        assert!("1,2,3".parse::<GridSpec>().is_err());
        assert!("2,1,0,1,3,3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn zero_density_gives_incident_field() {
        let scene = segment_scene();
        let wave = IncidentWave::new(0.4);
        for problem in [Problem::Dirichlet, Problem::Neumann] {
            let sol = DensitySolution::zero(problem, 6, 1);
            let spec: GridSpec = "-1.5,1.5,-1,1,4,3".parse().unwrap();
            let grid = eval_total_field_grid(&sol, &scene, &wave, &spec, FieldOptions::default()).unwrap();
            for (u, m) in grid.values.iter().zip(&grid.mask) {
                if !m {
                    assert!((cnorm(u) - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn points_on_the_arc_are_masked() {
        let scene = segment_scene();
        let sol = DensitySolution::zero(Problem::Dirichlet, 4, 1);
        assert!(matches!(
            eval_scattered_field(&sol, &scene, [0.3, 1e-4]),
            Err(Error::MaskedPoint { .. })
        ));
        let eval = FieldEvaluator::new(&sol, &scene, FieldOptions::default()).unwrap();
        assert!((eval.distance([0.3, 0.5]) - 0.5).abs() < 1e-12);
        assert!((eval.distance([2.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linearity() {
        let scene = Scene::single(ElasticMedium::default().with_omega(10.0), ArcGeometry::semicircle()).unwrap();
        for problem in [Problem::Dirichlet, Problem::Neumann] {
            let mut a = DensitySolution::zero(problem, 5, 1);
            let mut b = DensitySolution::zero(problem, 5, 1);
            for k in 0..12 {
                a.coeffs[0][k] = Complex64::new(1.0 / (k + 1) as f64, 0.3);
                b.coeffs[0][k] = Complex64::new(-0.2, k as f64 * 0.1);
            }
            let sum = a.add(&b).unwrap();
            let x = [0.4, 1.7];
            let (ua, ub, us) = (
                eval_scattered_field(&a, &scene, x).unwrap(),
                eval_scattered_field(&b, &scene, x).unwrap(),
                eval_scattered_field(&sum, &scene, x).unwrap(),
            );
            for q in 0..2 {
                assert!((ua[q] + ub[q] - us[q]).norm() < 1e-13 * cnorm(&us).max(1.0));
            }
        }
    }
}
