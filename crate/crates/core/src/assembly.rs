//! Galerkin matrices and right-hand sides.
//!
//! Index layout inside a block is mode-major, component-minor: row
//! `2l + q` is test mode `l`, component `q`; column `2m + p` is trial mode
//! `m`, component `p`. Globally, arc `i` owns rows `i·2(N+1) .. (i+1)·2(N+1)`.
//!
//! Weak blocks hold `∫∫ E_{qp}(r_i(s), r_j(t)) w⁻¹T_l(s) w⁻¹T_m(t) ds dt`
//! (the densities are normalized so arc Jacobians cancel). Hyper blocks hold
//! the Maue bilinear form with the `d/ds_x` derivatives moved onto the test
//! function; both trial and test functions are `w U_l`.

use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::chebyshev::{
    adaptive_expand_2d_multi, adaptive_expand_multi, cheb_weight, ChebSeries2D, ExpandOptions,
    LogKernelCoeffs, SliceRule,
};
use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, ElasticMedium, Scene};
use crate::kernels::{plane_wave, plane_wave_traction, ArcPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Problem::Dirichlet),
            "neumann" => Ok(Problem::Neumann),
            other => Err(Error::InvalidArgument(format!("unknown problem '{other}'"))),
        }
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Problem::Dirichlet => "dirichlet",
            Problem::Neumann => "neumann",
        })
    }
}

/// Plane compressional wave `d e^{iκ_p x·d}` with `d = (cos α, sin α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub alpha: f64,
}

impl IncidentWave {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    pub fn direction(&self) -> [f64; 2] {
        [self.alpha.cos(), self.alpha.sin()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Entries of cross-arc blocks below this magnitude are dropped.
    pub tol: f64,
    /// Relative tolerance of the kernel expansions.
    pub kernel_tol: f64,
    /// Relative tolerance of the right-hand-side expansions.
    pub rhs_tol: f64,
    pub slices: SliceRule,
    /// Turn off to keep cross blocks dense.
    pub compress: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            kernel_tol: 1e-13,
            rhs_tol: 1e-12,
            slices: SliceRule::Both,
            compress: true,
        }
    }
}

impl AssemblyOptions {
    fn kernel_expand(&self) -> ExpandOptions {
        ExpandOptions {
            slices: self.slices,
            ..ExpandOptions::relative(self.kernel_tol)
        }
    }
}

// ---------------------------------------------------------------------------
// Galerkin integrals of split kernels

fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// DCT-I workspace on the grid `θ_i = iπ/P`, `i = 0..=P`.
struct Dct1 {
    p: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl Dct1 {
    fn new(p: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * p);
        Self {
            p,
            fft,
            buf: vec![Complex64::default(); 2 * p],
        }
    }

    fn load(&mut self, x: &[Complex64]) {
        let p = self.p;
        self.buf.iter_mut().for_each(|v| *v = Complex64::default());
        for (k, &v) in x.iter().enumerate().take(p + 1) {
            self.buf[k] = v;
            if k > 0 && k < p {
                self.buf[2 * p - k] = v;
            }
        }
        self.fft.process(&mut self.buf);
    }

    /// `y_i = Σ_{k} x_k cos(π k i / P)` for `i = 0..=P`.
    fn synthesize(&mut self, x: &[Complex64], out: &mut [Complex64]) {
        let p = self.p;
        let x0 = x.first().copied().unwrap_or_default();
        let xp = x.get(p).copied().unwrap_or_default();
        self.load(x);
        for (i, o) in out.iter_mut().enumerate().take(p + 1) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            *o = 0.5 * (self.buf[i] + x0 + sign * xp);
        }
    }

    /// `Σ''_i f_i cos(π l i / P)` (end terms halved) for `l < out.len()`.
    fn analyze(&mut self, f: &[Complex64], out: &mut [Complex64]) {
        self.load(f);
        for (l, o) in out.iter_mut().enumerate() {
            *o = 0.5 * self.buf[l];
        }
    }
}

/// Computes `∫∫ log|s-t| J(s,t) w⁻¹T_l(s) w⁻¹T_m(t)` for `l, m < size`.
///
/// The product `log|s-t|·J` is formed on a cosine grid with the log series
/// truncated after `K + size` terms (exact for the requested modes, `K` the
/// extent of `J`), then transformed back.
struct LogProduct {
    size: usize,
    p: usize,
    lgrid: Vec<f64>,
}

impl LogProduct {
    fn new(k: usize, size: usize) -> Self {
        let terms = k + size;
        let p = next_smooth(terms.max(2));
        let mut dct = Dct1::new(p);
        let c: Vec<Complex64> = (0..terms).map(|n| Complex64::new(LogKernelCoeffs::expansion_c(n), 0.0)).collect();
        let mut g = vec![Complex64::default(); p + 1];
        dct.synthesize(&c, &mut g);
        let gk = |k: usize| if k <= p { g[k].re } else { g[2 * p - k].re };
        let mut lgrid = vec![0.0; (p + 1) * (p + 1)];
        for i in 0..=p {
            for j in 0..=p {
                lgrid[i * (p + 1) + j] = 0.5 * (gk(i.abs_diff(j)) + gk(i + j));
            }
        }
        Self { size, p, lgrid }
    }

    fn integrals(&self, j: &ChebSeries2D) -> Vec<Complex64> {
        let (p, size) = (self.p, self.size);
        let n1 = p + 1;
        let mut dct = Dct1::new(p);
        let (ks, kt) = (j.rows().min(n1), j.cols().min(n1));

        // synthesize along t for every s-mode, stored transposed as [t-node][s-mode]
        let mut tmp = vec![Complex64::default(); n1 * ks];
        let mut row = vec![Complex64::default(); kt];
        let mut out = vec![Complex64::default(); n1];
        for a in 0..ks {
            for (b, v) in row.iter_mut().enumerate() {
                *v = j.get(a, b);
            }
            dct.synthesize(&row, &mut out);
            for jj in 0..n1 {
                tmp[jj * ks + a] = out[jj];
            }
        }
        // synthesize along s; grid stored as [t-node][s-node]
        let mut grid = vec![Complex64::default(); n1 * n1];
        for jj in 0..n1 {
            dct.synthesize(&tmp[jj * ks..(jj + 1) * ks], &mut grid[jj * n1..(jj + 1) * n1]);
        }
        drop(tmp);
        for (v, l) in grid.iter_mut().zip(&self.lgrid) {
            *v *= *l;
        }
        // analyze along s, then along t
        let mut coef_s = vec![Complex64::default(); size * n1];
        let mut acc = vec![Complex64::default(); size];
        for jj in 0..n1 {
            dct.analyze(&grid[jj * n1..(jj + 1) * n1], &mut acc);
            for l in 0..size {
                coef_s[l * n1 + jj] = acc[l];
            }
        }
        drop(grid);
        let mut res = vec![Complex64::default(); size * size];
        for l in 0..size {
            dct.analyze(&coef_s[l * n1..(l + 1) * n1], &mut acc);
            for m in 0..size {
                res[l * size + m] = acc[m];
            }
        }
        // Σ'' sums to cosine coefficients, then to weighted integrals
        let scale = |l: usize| (if l == 0 { 1.0 } else { 2.0 } / p as f64) * cheb_weight(l);
        for l in 0..size {
            for m in 0..size {
                res[l * size + m] *= scale(l) * scale(m);
            }
        }
        res
    }
}

/// `∫∫ (log|s-t|·J + R) w⁻¹T_l(s) w⁻¹T_m(t)` for `l, m < size`, row-major.
pub fn split_galerkin(j: Option<&ChebSeries2D>, r: &ChebSeries2D, size: usize) -> Vec<Complex64> {
    split_galerkin_many(&[(j, r)], size).remove(0)
}

fn split_galerkin_many(parts: &[(Option<&ChebSeries2D>, &ChebSeries2D)], size: usize) -> Vec<Vec<Complex64>> {
    let k = parts
        .iter()
        .filter_map(|(j, _)| j.map(|j| j.rows().max(j.cols())))
        .max();
    let lp = k.map(|k| LogProduct::new(k, size));
    parts
        .iter()
        .map(|(j, r)| {
            let mut out = match (j, &lp) {
                (Some(j), Some(lp)) if j.nnz() > 0 => lp.integrals(j),
                _ => vec![Complex64::default(); size * size],
            };
            for l in 0..size.min(r.rows()) {
                for m in 0..size.min(r.cols()) {
                    out[l * size + m] += r.get(l, m) * (cheb_weight(l) * cheb_weight(m));
                }
            }
            out
        })
        .collect()
}

// ---------------------------------------------------------------------------
// blocks

/// Expanded kernel data of one block, kept for diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BlockStats {
    /// Largest expansion extent over all kernel components.
    pub expansion_size: usize,
}

fn expand_pair(
    pair: &ArcPair<'_>,
    hyper: bool,
    opts: &AssemblyOptions,
) -> Result<(Vec<ChebSeries2D>, BlockStats)> {
    let kernels = if hyper { 4 } else { 1 };
    let with_j = pair.same_arc;
    let per_kernel = if with_j { 8 } else { 4 };
    let ncomp = kernels * per_kernel;
    // layout: kernel k, then R (4 entries) and, on the same arc, J (4 entries)
    let groups: Vec<usize> = (0..ncomp).map(|c| c / 4).collect();
    let f = |s: f64, t: f64, out: &mut [Complex64]| {
        let v = pair.eval(s, t, hyper);
        for k in 0..kernels {
            let [j, r] = if hyper { v.hyper[k] } else { v.weak };
            let base = k * per_kernel;
            for q in 0..2 {
                for p in 0..2 {
                    out[base + 2 * q + p] = r[q][p];
                    if with_j {
                        out[base + 4 + 2 * q + p] = j[q][p];
                    }
                }
            }
        }
    };
    let series = adaptive_expand_2d_multi(&f, &groups, &opts.kernel_expand())?;
    let size = series.iter().map(|s| s.rows().max(s.cols())).max().unwrap_or(0);
    Ok((series, BlockStats { expansion_size: size }))
}

/// Galerkin integrals of each kernel entry, `[kernel][q][p] -> size×size`.
fn kernel_integrals(series: &[ChebSeries2D], kernels: usize, same_arc: bool, size: usize) -> Vec<[[Vec<Complex64>; 2]; 2]> {
    let per_kernel = if same_arc { 8 } else { 4 };
    let mut parts = Vec::with_capacity(kernels * 4);
    for k in 0..kernels {
        for e in 0..4 {
            let r = &series[k * per_kernel + e];
            let j = same_arc.then(|| &series[k * per_kernel + 4 + e]);
            parts.push((j, r));
        }
    }
    let mut ints = split_galerkin_many(&parts, size).into_iter();
    (0..kernels)
        .map(|_| {
            let mut next = || ints.next().expect("one integral per kernel entry");
            [[next(), next()], [next(), next()]]
        })
        .collect()
}

fn check_block_args(n: usize, opts: &AssemblyOptions) -> Result<()> {
    if !(opts.tol > 0.0) || !(opts.kernel_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if n > 1 << 14 {
        return Err(Error::InvalidArgument(format!("degree {n} too large")));
    }
    Ok(())
}

fn compress(block: &mut Array2<Complex64>, tol: f64) {
    block.iter_mut().for_each(|v| {
        if v.norm() < tol {
            *v = Complex64::default();
        }
    });
}

/// Weak-singular block `⟨V_ij[w⁻¹T_m e_p], w⁻¹T_l e_q⟩`, `l, m ≤ n`.
/// Cross blocks (`same_arc == false`) are compressed with `opts.tol`.
pub fn assemble_weak_block(
    medium: &ElasticMedium,
    arc_i: &ArcGeometry,
    arc_j: &ArcGeometry,
    same_arc: bool,
    n: usize,
    opts: &AssemblyOptions,
) -> Result<Array2<Complex64>> {
    Ok(weak_block(medium, arc_i, arc_j, same_arc, n, opts)?.0)
}

fn weak_block(
    medium: &ElasticMedium,
    arc_i: &ArcGeometry,
    arc_j: &ArcGeometry,
    same_arc: bool,
    n: usize,
    opts: &AssemblyOptions,
) -> Result<(Array2<Complex64>, BlockStats)> {
    check_block_args(n, opts)?;
    let pair = ArcPair::new(medium, arc_i, arc_j, same_arc);
    let (series, stats) = expand_pair(&pair, false, opts)?;
    let size = n + 1;
    let ints = kernel_integrals(&series, 1, same_arc, size);
    let mut block = Array2::zeros((2 * size, 2 * size));
    for l in 0..size {
        for m in 0..size {
            for q in 0..2 {
                for p in 0..2 {
                    block[[2 * l + q, 2 * m + p]] = ints[0][q][p][l * size + m];
                }
            }
        }
    }
    if !same_arc && opts.compress {
        compress(&mut block, opts.tol);
    }
    Ok((block, stats))
}

/// Hyper-singular block `⟨W_ij[wU_m e_p], wU_l e_q⟩`, `l, m ≤ n`.
pub fn assemble_hyper_block(
    medium: &ElasticMedium,
    arc_i: &ArcGeometry,
    arc_j: &ArcGeometry,
    same_arc: bool,
    n: usize,
    opts: &AssemblyOptions,
) -> Result<Array2<Complex64>> {
    Ok(hyper_block(medium, arc_i, arc_j, same_arc, n, opts)?.0)
}

fn hyper_block(
    medium: &ElasticMedium,
    arc_i: &ArcGeometry,
    arc_j: &ArcGeometry,
    same_arc: bool,
    n: usize,
    opts: &AssemblyOptions,
) -> Result<(Array2<Complex64>, BlockStats)> {
    check_block_args(n, opts)?;
    let pair = ArcPair::new(medium, arc_i, arc_j, same_arc);
    let (series, stats) = expand_pair(&pair, true, opts)?;
    // w⁻¹T integrals up to degree n + 2
    let size = n + 3;
    let ints = kernel_integrals(&series, 4, same_arc, size);
    let b = |k: usize, q: usize, p: usize, a: usize, c: usize| ints[k][q][p][a * size + c];
    let dim = n + 1;
    let mut block = Array2::zeros((2 * dim, 2 * dim));
    for l in 0..dim {
        let lf = (l + 1) as f64;
        for m in 0..dim {
            let mf = (m + 1) as f64;
            for q in 0..2 {
                for p in 0..2 {
                    let t1 = -lf * mf * b(0, q, p, l + 1, m + 1);
                    let t2 = 0.5 * lf * (b(1, q, p, l + 1, m) - b(1, q, p, l + 1, m + 2));
                    let t3 = -0.5 * mf * (b(2, q, p, l, m + 1) - b(2, q, p, l + 2, m + 1));
                    let t4 = 0.25
                        * (b(3, q, p, l, m) - b(3, q, p, l, m + 2) - b(3, q, p, l + 2, m)
                            + b(3, q, p, l + 2, m + 2));
                    block[[2 * l + q, 2 * m + p]] = t1 + t2 + t3 + t4;
                }
            }
        }
    }
    if !same_arc && opts.compress {
        compress(&mut block, opts.tol);
    }
    Ok((block, stats))
}

// ---------------------------------------------------------------------------
// right-hand side

/// Load vector `⟨f, w⁻¹T_l e_q⟩` (Dirichlet, `f = -P`) or
/// `⟨g, wU_l e_q⟩` (Neumann, `g = -traction of P`) for every arc.
pub fn assemble_rhs(problem: Problem, scene: &Scene, wave: &IncidentWave, n: usize, rhs_tol: f64) -> Result<Array1<Complex64>> {
    let dim = 2 * (n + 1);
    let mut out = Array1::zeros(scene.arcs.len() * dim);
    for (i, arc) in scene.arcs.iter().enumerate() {
        let local = arc_rhs(problem, &scene.medium, arc, wave, n, rhs_tol)
            .map_err(|e| Error::Block {
                row: i,
                col: i,
                source: Box::new(e),
            })?;
        out.slice_mut(ndarray::s![i * dim..(i + 1) * dim]).assign(&local);
    }
    Ok(out)
}

fn arc_rhs(
    problem: Problem,
    medium: &ElasticMedium,
    arc: &ArcGeometry,
    wave: &IncidentWave,
    n: usize,
    rhs_tol: f64,
) -> Result<Array1<Complex64>> {
    let alpha = wave.alpha;
    let data = |t: f64, out: &mut [Complex64]| {
        let x = arc.point(t);
        match problem {
            Problem::Dirichlet => {
                let p = plane_wave(medium, alpha, x);
                out[0] = -p[0];
                out[1] = -p[1];
            }
            Problem::Neumann => {
                let g = plane_wave_traction(medium, alpha, x, arc.normal(t));
                let j = arc.jacobian(t);
                out[0] = -g[0] * j;
                out[1] = -g[1] * j;
            }
        }
    };
    let series = adaptive_expand_multi(&data, 2, &ExpandOptions::relative(rhs_tol))?;
    let mut out = Array1::zeros(2 * (n + 1));
    for l in 0..=n {
        for q in 0..2 {
            let s = &series[q];
            out[2 * l + q] = match problem {
                Problem::Dirichlet => cheb_weight(l) * s.coeff(l),
                Problem::Neumann => 0.5 * (cheb_weight(l) * s.coeff(l) - cheb_weight(l + 2) * s.coeff(l + 2)),
            };
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// full system

/// Storage of one block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockData {
    Dense(Array2<Complex64>),
    /// Nonzero entries `(row, col, value)` of a square block of side `dim`.
    Sparse {
        dim: usize,
        entries: Vec<(u32, u32, Complex64)>,
    },
}

impl BlockData {
    fn sparse_from(block: &Array2<Complex64>) -> Self {
        let dim = block.nrows();
        let entries = block
            .indexed_iter()
            .filter(|(_, v)| **v != Complex64::default())
            .map(|((r, c), v)| (r as u32, c as u32, *v))
            .collect();
        BlockData::Sparse { dim, entries }
    }

    pub fn stored(&self) -> usize {
        match self {
            BlockData::Dense(a) => a.len(),
            BlockData::Sparse { entries, .. } => entries.len(),
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        match self {
            BlockData::Dense(a) => a.clone(),
            BlockData::Sparse { dim, entries } => {
                let mut a = Array2::zeros((*dim, *dim));
                for &(r, c, v) in entries {
                    a[[r as usize, c as usize]] = v;
                }
                a
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub problem: Problem,
    /// Polynomial degree per arc.
    pub degree: usize,
    pub arcs: usize,
    /// Row-major `arcs × arcs`.
    pub blocks: Vec<BlockData>,
    pub block_stats: Vec<BlockStats>,
    pub rhs: Array1<Complex64>,
    pub tol: f64,
    pub nnz_fraction: f64,
}

impl GalerkinSystem {
    pub fn block_dim(&self) -> usize {
        2 * (self.degree + 1)
    }

    pub fn dim(&self) -> usize {
        self.arcs * self.block_dim()
    }

    pub fn block(&self, i: usize, j: usize) -> &BlockData {
        &self.blocks[i * self.arcs + j]
    }

    /// Global dense matrix.
    pub fn matrix(&self) -> Array2<Complex64> {
        self.matrix_for_degree(self.degree)
    }

    /// Global matrix restricted to modes `l ≤ degree` on every arc; equals
    /// the matrix assembled directly at that degree.
    pub fn matrix_for_degree(&self, degree: usize) -> Array2<Complex64> {
        let sub = 2 * (degree.min(self.degree) + 1);
        let dim = self.arcs * sub;
        let mut a = Array2::zeros((dim, dim));
        for i in 0..self.arcs {
            for j in 0..self.arcs {
                match self.block(i, j) {
                    BlockData::Dense(b) => {
                        a.slice_mut(ndarray::s![i * sub..(i + 1) * sub, j * sub..(j + 1) * sub])
                            .assign(&b.slice(ndarray::s![..sub, ..sub]));
                    }
                    BlockData::Sparse { entries, .. } => {
                        for &(r, c, v) in entries {
                            let (r, c) = (r as usize, c as usize);
                            if r < sub && c < sub {
                                a[[i * sub + r, j * sub + c]] = v;
                            }
                        }
                    }
                }
            }
        }
        a
    }

    pub fn rhs_for_degree(&self, degree: usize) -> Array1<Complex64> {
        let full = self.block_dim();
        let sub = 2 * (degree.min(self.degree) + 1);
        let mut b = Array1::zeros(self.arcs * sub);
        for i in 0..self.arcs {
            b.slice_mut(ndarray::s![i * sub..(i + 1) * sub])
                .assign(&self.rhs.slice(ndarray::s![i * full..i * full + sub]));
        }
        b
    }

    /// Writes `manifest.json` and `entries.csv` (`block_row,block_col,row,col,re,im`).
    pub fn dump(&self, dir: &Path) -> Result<()> {
        use std::io::Write;
        std::fs::create_dir_all(dir)?;
        let manifest = serde_json::json!({
            "problem": self.problem,
            "degree": self.degree,
            "arcs": self.arcs,
            "block_dim": self.block_dim(),
            "layout": "row = 2*mode + component within each block",
            "tol": self.tol,
            "nnz_fraction": self.nnz_fraction,
        });
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("entries.csv"))?);
        writeln!(f, "block_row,block_col,row,col,re,im")?;
        for i in 0..self.arcs {
            for j in 0..self.arcs {
                for ((r, c), v) in self.block(i, j).to_dense().indexed_iter() {
                    if *v != Complex64::default() {
                        writeln!(f, "{i},{j},{r},{c},{:e},{:e}", v.re, v.im)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assembles every block (in parallel) and the right-hand side.
pub fn assemble_system(
    problem: Problem,
    scene: &Scene,
    wave: &IncidentWave,
    n: usize,
    opts: &AssemblyOptions,
) -> Result<GalerkinSystem> {
    scene.validate()?;
    let m = scene.arcs.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let results: Vec<Result<(BlockData, BlockStats)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (ai, aj) = (&scene.arcs[i], &scene.arcs[j]);
            let built = match problem {
                Problem::Dirichlet => weak_block(&scene.medium, ai, aj, i == j, n, opts),
                Problem::Neumann => hyper_block(&scene.medium, ai, aj, i == j, n, opts),
            };
            let (block, stats) = built.map_err(|e| Error::Block {
                row: i,
                col: j,
                source: Box::new(e),
            })?;
            let data = if i != j && opts.compress {
                BlockData::sparse_from(&block)
            } else {
                BlockData::Dense(block)
            };
            Ok((data, stats))
        })
        .collect();
    let mut blocks = Vec::with_capacity(m * m);
    let mut block_stats = Vec::with_capacity(m * m);
    for r in results {
        let (b, s) = r?;
        blocks.push(b);
        block_stats.push(s);
    }
    let rhs = assemble_rhs(problem, scene, wave, n, opts.rhs_tol)?;
    let dim = 2 * (n + 1);
    let stored: usize = blocks.iter().map(|b| b.stored()).sum();
    let nnz_fraction = stored as f64 / (m * m * dim * dim) as f64;
    Ok(GalerkinSystem {
        problem,
        degree: n,
        arcs: m,
        blocks,
        block_stats,
        rhs,
        tol: opts.tol,
        nnz_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::{adaptive_expand_2d, log_galerkin_diagonal};
    use std::f64::consts::PI;

    fn one(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn pure_log_kernel_gives_diagonal() {
        let j = adaptive_expand_2d(|_, _| one(1.0), 1e-14).unwrap();
        let r = ChebSeries2D::zero();
        let size = 30;
        let g = split_galerkin(Some(&j), &r, size);
        for l in 0..size {
            for m in 0..size {
                let want = if l == m { log_galerkin_diagonal(l) } else { 0.0 };
                assert!((g[l * size + m] - one(want)).norm() < 1e-12, "({l},{m}) {}", g[l * size + m]);
            }
        }
    }

    #[test]
    fn log_product_matches_triple_sum() {
        // I_{lm} = Σ_n c_n Σ_{a,b} J_ab τ(n,a,l) τ(n,b,m)
        use crate::chebyshev::triple_product_weight as tau;
        let j = adaptive_expand_2d(|s, t| Complex64::new((s + 2.0 * t).cos(), s * t * t), 1e-14).unwrap();
        let size = 12;
        let g = split_galerkin(Some(&j), &ChebSeries2D::zero(), size);
        let k = j.rows().max(j.cols());
        for l in 0..size {
            for m in 0..size {
                let mut acc = Complex64::default();
                for n in 0..k + size {
                    let cn = LogKernelCoeffs::expansion_c(n);
                    let mut cand_a = vec![n + l, n.abs_diff(l)];
                    cand_a.dedup();
                    let mut cand_b = vec![n + m, n.abs_diff(m)];
                    cand_b.dedup();
                    for &a in &cand_a {
                        for &b in &cand_b {
                            acc += cn * tau(n, a, l) * tau(n, b, m) * j.get(a, b);
                        }
                    }
                }
                assert!((g[l * size + m] - acc).norm() < 1e-12, "({l},{m})");
            }
        }
    }

    #[test]
    fn regular_part_uses_orthogonality_weights() {
        let r = adaptive_expand_2d(|s, t| one(s * t + 2.0), 1e-14).unwrap();
        let g = split_galerkin(None, &r, 3);
        assert!((g[0] - one(2.0 * PI * PI)).norm() < 1e-12);
        assert!((g[3 + 1] - one(PI * PI / 4.0)).norm() < 1e-12);
        assert!(g[1].norm() < 1e-12);
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(7), 8);
        assert_eq!(next_smooth(31), 32);
        assert_eq!(next_smooth(1001), 1024);
        assert_eq!(next_smooth(121), 125);
    }

    #[test]
    fn neumann_broadside_data_is_constant() {
        // α = π/2 on the flat segment: ν·d = -1 and e^{iκ_p r·d} = 1
        let scene = Scene::single(ElasticMedium::default(), ArcGeometry::unit_segment()).unwrap();
        let rhs = assemble_rhs(Problem::Neumann, &scene, &IncidentWave::new(PI / 2.0), 6, 1e-12).unwrap();
        for l in 0..=6 {
            let normal = rhs[2 * l + 1];
            let expected = if l == 0 { normal.norm() } else { 0.0 };
            assert!((normal.norm() - expected).abs() < 1e-12, "l={l}");
            assert!(rhs[2 * l].norm() < 1e-12);
        }
        // normal component of -g is iκ_p(2μ + λ); the l = 0 entry carries ½c_0
        let m = ElasticMedium::default();
        let g2 = Complex64::new(0.0, m.kappa_p()) * (2.0 * m.mu * 1.0 + m.lambda * 1.0);
        assert!((rhs[1] - 0.5 * PI * g2).norm() < 1e-10, "{}", rhs[1]);
    }
}
