//! Dense direct solves, Sobolev norms and convergence studies.

use std::time::Instant;

use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeInto, ReciprocalConditionNum, Solve};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_system, AssemblyOptions, GalerkinSystem, IncidentWave, Problem};
use crate::error::{Error, Result};
use crate::geometry::Scene;

/// Coefficients of the discrete densities.
///
/// Dirichlet: `φ_i∘r_i · |r_i'| = Σ_l Σ_p a_{l,p} w⁻¹T_l e_p`.
/// Neumann: `ψ_i∘r_i = Σ_l Σ_p b_{l,p} wU_l e_p`.
/// Each arc vector uses the assembly layout, entry `2l + p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySolution {
    pub problem: Problem,
    pub degree: usize,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl DensitySolution {
    pub fn zero(problem: Problem, degree: usize, arcs: usize) -> Self {
        Self {
            problem,
            degree,
            coeffs: vec![vec![Complex64::default(); 2 * (degree + 1)]; arcs],
        }
    }

    pub fn from_flat(problem: Problem, degree: usize, arcs: usize, x: &Array1<Complex64>) -> Self {
        let dim = 2 * (degree + 1);
        assert_eq!(x.len(), arcs * dim, "coefficient vector length");
        let coeffs = (0..arcs)
            .map(|i| x.iter().skip(i * dim).take(dim).copied().collect())
            .collect();
        Self { problem, degree, coeffs }
    }

    pub fn arcs(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of mode `l`, component `p` on arc `i` (zero above the degree).
    pub fn coeff(&self, i: usize, l: usize, p: usize) -> Complex64 {
        self.coeffs[i].get(2 * l + p).copied().unwrap_or_default()
    }

    /// Zero-padded copy at a higher degree.
    pub fn padded(&self, degree: usize) -> Self {
        let dim = 2 * (degree.max(self.degree) + 1);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut v = c.clone();
                v.resize(dim, Complex64::default());
                v
            })
            .collect();
        Self {
            problem: self.problem,
            degree: degree.max(self.degree),
            coeffs,
        }
    }

    /// `self - other` after padding both to the larger degree.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.problem != other.problem {
            return Err(Error::InvalidArgument("cannot compare Dirichlet and Neumann densities".into()));
        }
        if self.arcs() != other.arcs() {
            return Err(Error::InvalidArgument(format!(
                "arc counts differ: {} vs {}",
                self.arcs(),
                other.arcs()
            )));
        }
        let degree = self.degree.max(other.degree);
        let (a, b) = (self.padded(degree), other.padded(degree));
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect())
            .collect();
        Ok(Self {
            problem: self.problem,
            degree,
            coeffs,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let neg = Self {
            coeffs: other.coeffs.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
            ..other.clone()
        };
        self.difference(&neg)
    }

    /// Plain 2-norm of all coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `(Σ (1+l²)^{∓1/2} |c_l|²)^{1/2}` over arcs and components: exponent
/// `-1/2` for Dirichlet coefficients, `+1/2` for Neumann.
pub fn sobolev_norm(sol: &DensitySolution) -> f64 {
    let exponent = match sol.problem {
        Problem::Dirichlet => -0.5,
        Problem::Neumann => 0.5,
    };
    let mut sum = 0.0;
    for c in &sol.coeffs {
        for (k, v) in c.iter().enumerate() {
            let l = (k / 2) as f64;
            sum += (1.0 + l * l).powf(exponent) * v.norm_sqr();
        }
    }
    sum.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `‖Ax - b‖ / ‖b‖`.
    pub residual: f64,
    /// Estimated reciprocal 1-norm condition number of the LU factors.
    pub rcond: f64,
}

fn norm(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// LU solve with partial pivoting; returns the solution and diagnostics.
pub fn solve_dense(a: Array2<Complex64>, b: &Array1<Complex64>) -> Result<(Array1<Complex64>, SolveReport)> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "system shape {:?} does not match rhs length {}",
            a.shape(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty system".into()));
    }
    let a_copy = a.clone();
    let lu = a
        .factorize_into()
        .map_err(|e| Error::Singular(format!("LU factorization failed: {e}")))?;
    let rcond = lu.rcond().unwrap_or(0.0);
    let x = lu
        .solve(b)
        .map_err(|e| Error::Singular(format!("triangular solve failed: {e} (rcond {rcond:.3e})")))?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular(format!("non-finite solution (rcond {rcond:.3e})")));
    }
    let r = a_copy.dot(&x) - b;
    let bn = norm(b);
    let residual = if bn > 0.0 { norm(&r) / bn } else { norm(&r) };
    Ok((x, SolveReport { residual, rcond }))
}

/// Solves the full assembled system.
pub fn solve(system: &GalerkinSystem) -> Result<(DensitySolution, SolveReport)> {
    solve_at_degree(system, system.degree)
}

/// Solves the sub-system of modes `l ≤ degree` of a higher-degree system.
pub fn solve_at_degree(system: &GalerkinSystem, degree: usize) -> Result<(DensitySolution, SolveReport)> {
    if degree > system.degree {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} exceeds assembled degree {}",
            system.degree
        )));
    }
    let (x, report) = solve_dense(system.matrix_for_degree(degree), &system.rhs_for_degree(degree))?;
    Ok((DensitySolution::from_flat(system.problem, degree, system.arcs, &x), report))
}

// ---------------------------------------------------------------------------
// convergence studies

/// Errors above this are preasymptotic and excluded from the rate fit.
pub const PREASYMPTOTIC_ERROR: f64 = 1e-2;
/// Errors below this are treated as round-off and excluded from the rate fit.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Errors within this factor of the smallest observed error are treated as
/// part of the round-off plateau.
pub const PLATEAU_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    pub degree: usize,
    pub error: Option<f64>,
    pub residual: Option<f64>,
    pub failure: Option<String>,
}

/// Least-squares line `log10(error) ≈ intercept + slope·N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of `(N, log10 error)`.
    pub correlation: f64,
    /// Estimated `ϱ` with `error ~ ϱ^{-N}`.
    pub rate: f64,
    pub first_degree: usize,
    pub last_degree: usize,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyTimings {
    pub assembly_seconds: f64,
    pub solve_seconds: Vec<f64>,
    pub reference_solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: Problem,
    pub alpha: f64,
    pub arcs: usize,
    pub reference_degree: usize,
    pub reference_residual: f64,
    pub tol: f64,
    pub nnz_fraction: f64,
    pub entries: Vec<StudyEntry>,
    pub fit: Option<RateFit>,
    /// Wall times; not part of the reproducible content.
    pub timings: StudyTimings,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Error at a given degree, if that solve succeeded.
    pub fn error_at(&self, degree: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.degree == degree).and_then(|e| e.error)
    }
}

/// Fits the semilog line from the first degree with error below
/// `PREASYMPTOTIC_ERROR` up to the round-off plateau, whose level is
/// `max(NOISE_FLOOR, PLATEAU_FACTOR × smallest error)`.
pub fn fit_rate(points: &[(usize, f64)]) -> Option<RateFit> {
    let start = points.iter().position(|&(_, e)| e < PREASYMPTOTIC_ERROR)?;
    let smallest = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let floor = NOISE_FLOOR.max(PLATEAU_FACTOR * smallest);
    let used: Vec<(f64, f64)> = points[start..]
        .iter()
        .take_while(|&&(_, e)| e >= floor)
        .map(|&(n, e)| (n as f64, e.log10()))
        .collect();
    if used.len() < 2 {
        return None;
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let correlation = if syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 };
    Some(RateFit {
        slope,
        intercept: my - slope * mx,
        correlation,
        rate: 10f64.powf(-slope),
        first_degree: points[start].0,
        last_degree: points[start + used.len() - 1].0,
        points: used.len(),
    })
}

/// Solves at every degree in `degrees` and at `max(degrees) + margin`, and
/// measures the Sobolev-norm error of each coarse solution against the
/// reference. The system is assembled once at the reference degree; bases
/// are nested, so coarse systems are its leading modes.
pub fn convergence_study(
    problem: Problem,
    scene: &Scene,
    wave: &IncidentWave,
    degrees: &[usize],
    margin: usize,
    opts: &AssemblyOptions,
) -> Result<ConvergenceReport> {
    if degrees.is_empty() {
        return Err(Error::InvalidArgument("empty degree list".into()));
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("degree list must be strictly ascending".into()));
    }
    let reference_degree = degrees[degrees.len() - 1] + margin;
    let t = Instant::now();
    let system = assemble_system(problem, scene, wave, reference_degree, opts)?;
    let mut timings = StudyTimings {
        assembly_seconds: t.elapsed().as_secs_f64(),
        ..Default::default()
    };
    let t = Instant::now();
    let (reference, ref_report) = solve(&system)?;
    timings.reference_solve_seconds = t.elapsed().as_secs_f64();

    let mut entries = Vec::with_capacity(degrees.len());
    for &n in degrees {
        let t = Instant::now();
        let entry = match solve_at_degree(&system, n) {
            Ok((sol, rep)) => {
                let err = sol.difference(&reference).map(|d| sobolev_norm(&d));
                match err {
                    Ok(e) => StudyEntry {
                        degree: n,
                        error: Some(e),
                        residual: Some(rep.residual),
                        failure: None,
                    },
                    Err(e) => StudyEntry {
                        degree: n,
                        error: None,
                        residual: Some(rep.residual),
                        failure: Some(e.to_string()),
                    },
                }
            }
            Err(e) => StudyEntry {
                degree: n,
                error: None,
                residual: None,
                failure: Some(e.to_string()),
            },
        };
        timings.solve_seconds.push(t.elapsed().as_secs_f64());
        entries.push(entry);
    }
    let points: Vec<(usize, f64)> = entries
        .iter()
        .filter_map(|e| e.error.map(|err| (e.degree, err)))
        .collect();
    Ok(ConvergenceReport {
        problem,
        alpha: wave.alpha,
        arcs: scene.arcs.len(),
        reference_degree,
        reference_residual: ref_report.residual,
        tol: opts.tol,
        nnz_fraction: system.nnz_fraction,
        fit: fit_rate(&points),
        entries,
        timings,
    })
}
