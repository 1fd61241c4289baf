//! Elastic kernels and their logarithmic splitting in parameter space.
//!
//! Every kernel here is a combination of a handful of radial scalar
//! functions of `r = |x - y|` with smooth matrix factors. Each scalar `f` is
//! carried as a pair `(reg, log)` with `f(r) = reg + log(r)·log`, where both
//! parts are entire in `r`. On a single arc, `r = |s - t|·q(s, t)`, so
//!
//! ```text
//! f = log|s - t|·log + (reg + log(q)·log),
//! ```
//!
//! which gives the `J` (coefficient of `log|s-t|`) and `R` parts directly.
//! Off the diagonal the same pairs evaluate the plain kernels; this avoids
//! the cancellation between the `1/r²` poles of the two Hankel terms.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ArcGeometry, ElasticMedium, Vec2};
use crate::special::{bessel_set, hankel1};

pub type Mat2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO2: Mat2 = [[Complex64::new(0.0, 0.0); 2]; 2];

/// Scalar split `reg + log(r)·log`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Split {
    reg: Complex64,
    log: Complex64,
}

impl Split {
    #[inline]
    fn at(self, l: f64) -> Complex64 {
        self.reg + l * self.log
    }

    #[inline]
    fn log_only(self) -> Complex64 {
        self.log
    }
}

/// Radial building blocks, all split with respect to `log r`.
///
/// `a` and `b` are the coefficients of `E = a·I + b·ê êᵀ`; `gs`, `gp` the
/// Helmholtz fundamental solutions; `c1` is
/// `[κ_s H_1(κ_s r) - κ_p H_1(κ_p r)] / r`.
#[derive(Debug, Clone, Copy)]
struct Radial {
    a: Split,
    b: Split,
    gs: Split,
    gp: Split,
    c1: Split,
}

#[derive(Debug, Clone, Copy)]
struct Consts {
    mu: f64,
    rho_omega2: f64,
    ks: f64,
    kp: f64,
    ln_ks: f64,
    ln_kp: f64,
}

impl Consts {
    fn new(m: &ElasticMedium) -> Self {
        let (ks, kp) = (m.kappa_s(), m.kappa_p());
        Self {
            mu: m.mu,
            rho_omega2: m.rho * m.omega * m.omega,
            ks,
            kp,
            ln_ks: ks.ln(),
            ln_kp: kp.ln(),
        }
    }
}

const TWO_OVER_PI: f64 = 2.0 / PI;

fn radial(c: &Consts, r: f64) -> Radial {
    let bs = bessel_set(c.ks * r);
    let bp = bessel_set(c.kp * r);

    // (i/4) H_0(κ r)
    let helm = |b: &crate::special::BesselSet, lnk: f64| Split {
        reg: 0.25 * I * Complex64::new(b.j[0], b.s[0] + TWO_OVER_PI * lnk * b.j[0]),
        log: Complex64::new(-b.j[0] / (2.0 * PI), 0.0),
    };
    let gs = helm(&bs, c.ln_ks);
    let gp = helm(&bp, c.ln_kp);

    // κ² H_1(κr)/(κr) without the pole, and κ² H_2(κr) without the poles
    let h1z = |b: &crate::special::BesselSet, k: f64, lnk: f64| Split {
        reg: k * k * Complex64::new(b.j1_over_z, b.s1_over_z + TWO_OVER_PI * lnk * b.j1_over_z),
        log: k * k * Complex64::new(0.0, TWO_OVER_PI * b.j1_over_z),
    };
    let h2 = |b: &crate::special::BesselSet, k: f64, lnk: f64| Split {
        reg: k * k * Complex64::new(b.j[2], b.s[2] - 1.0 / PI + TWO_OVER_PI * lnk * b.j[2]),
        log: k * k * Complex64::new(0.0, TWO_OVER_PI * b.j[2]),
    };
    let sub = |x: Split, y: Split| Split {
        reg: x.reg - y.reg,
        log: x.log - y.log,
    };
    let c1 = sub(h1z(&bs, c.ks, c.ln_ks), h1z(&bp, c.kp, c.ln_kp));
    let c2 = sub(h2(&bs, c.ks, c.ln_ks), h2(&bp, c.kp, c.ln_kp));

    let f = I / (4.0 * c.rho_omega2);
    Radial {
        a: Split {
            reg: gs.reg / c.mu - f * c1.reg,
            log: gs.log / c.mu - f * c1.log,
        },
        b: Split {
            reg: f * c2.reg,
            log: f * c2.log,
        },
        gs,
        gp,
        c1,
    }
}

/// Scalars of one evaluation, either the `R`-side values or the `J`-side
/// log coefficients.
#[derive(Debug, Clone, Copy)]
struct Scalars {
    a: Complex64,
    b: Complex64,
    gs: Complex64,
    gp: Complex64,
    c1: Complex64,
}

impl Scalars {
    fn at(r: &Radial, l: f64) -> Self {
        Self {
            a: r.a.at(l),
            b: r.b.at(l),
            gs: r.gs.at(l),
            gp: r.gp.at(l),
            c1: r.c1.at(l),
        }
    }

    fn log_only(r: &Radial) -> Self {
        Self {
            a: r.a.log_only(),
            b: r.b.log_only(),
            gs: r.gs.log_only(),
            gp: r.gp.log_only(),
            c1: r.c1.log_only(),
        }
    }
}

/// Smooth geometric factors at a parameter pair.
#[derive(Debug, Clone, Copy)]
struct PairGeo {
    /// `x - y`
    diff: Vec2,
    /// unit direction of `x - y` (or of the chord quotient on the diagonal)
    e: Vec2,
    nx: Vec2,
    ny: Vec2,
    jx: f64,
    jy: f64,
}

#[cfg(test)]
fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn weak_from(sc: &Scalars, g: &PairGeo) -> Mat2 {
    let e = g.e;
    let mut m = ZERO2;
    for q in 0..2 {
        for p in 0..2 {
            let id = if p == q { sc.a } else { Complex64::default() };
            m[q][p] = id + sc.b * (e[q] * e[p]);
        }
    }
    m
}

/// The four Maue kernels with Jacobians folded in:
/// `G1 = 4μ²(𝔸E𝔸 + γ_s/μ)`, `G2 = -2μ 𝔸 ∇_yΔγ ν_yᵀ J_y`,
/// `G3 = -2μ ν_x ∇_xᵀΔγ 𝔸 J_x`,
/// `G4 = -ρω²[γ_s(2ν_xν_yᵀ - ν_yν_xᵀ - ν_x·ν_y 𝕀) - γ_p ν_xν_yᵀ] J_x J_y`.
fn hyper_from(sc: &Scalars, g: &PairGeo, k: &Consts) -> [Mat2; 4] {
    let e = weak_from(sc, g);
    let mu = k.mu;
    // 𝔸 M 𝔸 for 𝔸 = [[0,-1],[1,0]]: [[-m11, m10], [m01, -m00]]
    let aea = [[-e[1][1], e[1][0]], [e[0][1], -e[0][0]]];
    let mut g1 = ZERO2;
    for q in 0..2 {
        for p in 0..2 {
            let id = if p == q { sc.gs / mu } else { Complex64::default() };
            g1[q][p] = 4.0 * mu * mu * (aea[q][p] + id);
        }
    }

    // ∇_x Δγ = -(i/4) c1 (x - y)
    let grad_x = [-0.25 * I * sc.c1 * g.diff[0], -0.25 * I * sc.c1 * g.diff[1]];
    // G2: 𝔸 ∇_y = -𝔸 ∇_x; 𝔸 v = (-v_2, v_1)
    let a_grad_y = [grad_x[1], -grad_x[0]];
    let mut g2 = ZERO2;
    for q in 0..2 {
        for p in 0..2 {
            g2[q][p] = -2.0 * mu * g.jy * a_grad_y[q] * g.ny[p];
        }
    }
    // G3: ∇_xᵀ 𝔸 = (v_2, -v_1)
    let grad_a = [grad_x[1], -grad_x[0]];
    let mut g3 = ZERO2;
    for q in 0..2 {
        for p in 0..2 {
            g3[q][p] = -2.0 * mu * g.jx * g.nx[q] * grad_a[p];
        }
    }

    let nn = g.nx[0] * g.ny[0] + g.nx[1] * g.ny[1];
    let mut g4 = ZERO2;
    let w = -k.rho_omega2 * g.jx * g.jy;
    for q in 0..2 {
        for p in 0..2 {
            let id = if p == q { nn } else { 0.0 };
            let ms = 2.0 * g.nx[q] * g.ny[p] - g.ny[q] * g.nx[p] - id;
            g4[q][p] = w * (sc.gs * ms - sc.gp * (g.nx[q] * g.ny[p]));
        }
    }
    [g1, g2, g3, g4]
}

/// Which kernel a [`KernelSplit`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelId {
    Weak,
    G1,
    G2,
    G3,
    G4,
}

/// Split values at one parameter pair: `J` and `R` for the weak kernel and
/// the four Maue kernels.
#[derive(Debug, Clone, Copy)]
pub struct SplitValues {
    pub weak: [Mat2; 2],
    pub hyper: [[Mat2; 2]; 4],
}

/// Kernels between two arcs, pulled back to `[-1, 1]²`.
#[derive(Debug, Clone)]
pub struct ArcPair<'a> {
    consts: Consts,
    pub arc_i: &'a ArcGeometry,
    pub arc_j: &'a ArcGeometry,
    pub same_arc: bool,
}

impl<'a> ArcPair<'a> {
    pub fn new(medium: &ElasticMedium, arc_i: &'a ArcGeometry, arc_j: &'a ArcGeometry, same_arc: bool) -> Self {
        Self {
            consts: Consts::new(medium),
            arc_i,
            arc_j,
            same_arc,
        }
    }

    fn geometry(&self, s: f64, t: f64) -> (PairGeo, f64, f64) {
        let vx = self.arc_i.velocity(s);
        let vy = self.arc_j.velocity(t);
        let jx = vx[0].hypot(vx[1]);
        let jy = vy[0].hypot(vy[1]);
        let nx = [vx[1] / jx, -vx[0] / jx];
        let ny = [vy[1] / jy, -vy[0] / jy];
        if self.same_arc {
            let d = self.arc_i.chord_quotient(s, t);
            let q = d[0].hypot(d[1]);
            let delta = s - t;
            let geo = PairGeo {
                diff: [delta * d[0], delta * d[1]],
                e: [d[0] / q, d[1] / q],
                nx,
                ny,
                jx,
                jy,
            };
            (geo, delta.abs() * q, q.ln())
        } else {
            let x = self.arc_i.point(s);
            let y = self.arc_j.point(t);
            let diff = [x[0] - y[0], x[1] - y[1]];
            let r = diff[0].hypot(diff[1]);
            let geo = PairGeo {
                diff,
                e: [diff[0] / r, diff[1] / r],
                nx,
                ny,
                jx,
                jy,
            };
            (geo, r, r.ln())
        }
    }

    /// `J` and `R` of every kernel at `(s, t)`. On the same arc `R` is the
    /// regular remainder (finite at `s = t`); across arcs `J = 0` and `R` is
    /// the kernel itself.
    pub fn eval(&self, s: f64, t: f64, with_hyper: bool) -> SplitValues {
        let (geo, r, l) = self.geometry(s, t);
        let rad = radial(&self.consts, r);
        let rs = Scalars::at(&rad, l);
        let mut out = SplitValues {
            weak: [ZERO2, weak_from(&rs, &geo)],
            hyper: [[ZERO2; 2]; 4],
        };
        if with_hyper {
            let h = hyper_from(&rs, &geo, &self.consts);
            for k in 0..4 {
                out.hyper[k][1] = h[k];
            }
        }
        if self.same_arc {
            let js = Scalars::log_only(&rad);
            out.weak[0] = weak_from(&js, &geo);
            if with_hyper {
                let h = hyper_from(&js, &geo, &self.consts);
                for k in 0..4 {
                    out.hyper[k][0] = h[k];
                }
            }
        }
        out
    }

    pub fn split(&self, id: KernelId) -> KernelSplit<'_, 'a> {
        KernelSplit { pair: self, id }
    }
}

/// One kernel of an [`ArcPair`] as a `(J, R)` split.
#[derive(Debug, Clone, Copy)]
pub struct KernelSplit<'p, 'a> {
    pair: &'p ArcPair<'a>,
    pub id: KernelId,
}

impl KernelSplit<'_, '_> {
    pub fn same_arc(&self) -> bool {
        self.pair.same_arc
    }

    /// `(J(s,t), R(s,t))`.
    pub fn eval(&self, s: f64, t: f64) -> (Mat2, Mat2) {
        let v = self.pair.eval(s, t, self.id != KernelId::Weak);
        let [j, r] = match self.id {
            KernelId::Weak => v.weak,
            KernelId::G1 => v.hyper[0],
            KernelId::G2 => v.hyper[1],
            KernelId::G3 => v.hyper[2],
            KernelId::G4 => v.hyper[3],
        };
        (j, r)
    }

    pub fn j(&self, s: f64, t: f64) -> Mat2 {
        self.eval(s, t).0
    }

    pub fn r(&self, s: f64, t: f64) -> Mat2 {
        self.eval(s, t).1
    }

    /// `log|s - t|·J + R`, the kernel itself; undefined on the diagonal of
    /// a single arc.
    pub fn value(&self, s: f64, t: f64) -> Result<Mat2> {
        let (j, r) = self.eval(s, t);
        if !self.pair.same_arc {
            return Ok(r);
        }
        if s == t {
            return Err(Error::SingularEvaluation);
        }
        let l = (s - t).abs().ln();
        let mut out = r;
        for q in 0..2 {
            for p in 0..2 {
                out[q][p] += l * j[q][p];
            }
        }
        Ok(out)
    }
}

/// Split of the weak kernel `E(r_i(s), r_j(t))`.
pub fn weak_kernel_split<'a>(
    medium: &ElasticMedium,
    arc_i: &'a ArcGeometry,
    arc_j: &'a ArcGeometry,
    same_arc: bool,
) -> ArcPair<'a> {
    ArcPair::new(medium, arc_i, arc_j, same_arc)
}

/// The four Maue kernels between two arcs; use [`ArcPair::split`] with
/// `KernelId::G1..G4` or [`ArcPair::eval`] to read them.
pub fn hyper_kernel_set<'a>(
    medium: &ElasticMedium,
    arc_i: &'a ArcGeometry,
    arc_j: &'a ArcGeometry,
    same_arc: bool,
) -> ArcPair<'a> {
    ArcPair::new(medium, arc_i, arc_j, same_arc)
}

fn separation(x: Vec2, y: Vec2) -> Result<(Vec2, f64)> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    if !(r > 0.0) {
        return Err(Error::SingularEvaluation);
    }
    Ok((d, r))
}

/// `γ_κ(x, y) = (i/4) H_0^{(1)}(κ|x - y|)`.
pub fn helmholtz_fs(kappa: f64, x: Vec2, y: Vec2) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    Ok(0.25 * I * hankel1(0, kappa * r)?)
}

/// Displacement fundamental tensor of the Navier equation.
pub fn elastic_fundamental(medium: &ElasticMedium, x: Vec2, y: Vec2) -> Result<Mat2> {
    let (d, r) = separation(x, y)?;
    let k = Consts::new(medium);
    let rad = radial(&k, r);
    let sc = Scalars::at(&rad, r.ln());
    let geo = PairGeo {
        diff: d,
        e: [d[0] / r, d[1] / r],
        nx: [0.0; 2],
        ny: [0.0; 2],
        jx: 1.0,
        jy: 1.0,
    };
    Ok(weak_from(&sc, &geo))
}

/// Column `k` is the traction, taken in `y` with normal `normal_y`, of the
/// `k`-th column of `E(x, y)`.
pub fn traction_of_fundamental(medium: &ElasticMedium, x: Vec2, y: Vec2, normal_y: Vec2) -> Result<Mat2> {
    let (d, r) = separation(x, y)?;
    let k = Consts::new(medium);
    let rad = radial(&k, r);
    let sc = Scalars::at(&rad, r.ln());
    let e = [d[0] / r, d[1] / r];

    let hs1 = hankel1(1, k.ks * r)?;
    let hs2 = hankel1(2, k.ks * r)?;
    let hp1 = hankel1(1, k.kp * r)?;
    let hp2 = hankel1(2, k.kp * r)?;
    let (zs, zp) = (k.ks * r, k.kp * r);
    let b = sc.b;
    let da = -I / (4.0 * k.mu) * k.ks * hs1 + b / r;
    let db = I / (4.0 * k.rho_omega2)
        * (k.ks.powi(3) * (hs1 - 2.0 * hs2 / zs) - k.kp.powi(3) * (hp1 - 2.0 * hp2 / zp));

    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut out = ZERO2;
    for col in 0..2 {
        // grad[i][j] = ∂_{y_j} E_{i,col}
        let mut grad = ZERO2;
        for i in 0..2 {
            for j in 0..2 {
                grad[i][j] = -da * (e[j] * delta(i, col))
                    - db * (e[j] * e[i] * e[col])
                    - b / r * ((delta(i, j) - e[i] * e[j]) * e[col] + e[i] * (delta(col, j) - e[col] * e[j]));
            }
        }
        let div = grad[0][0] + grad[1][1];
        for i in 0..2 {
            let mut t = medium.lambda * div * normal_y[i];
            for j in 0..2 {
                t += medium.mu * (grad[i][j] + grad[j][i]) * normal_y[j];
            }
            out[i][col] = t;
        }
    }
    Ok(out)
}

/// Plane compressional wave `P(x) = d e^{iκ_p x·d}`.
pub fn plane_wave(medium: &ElasticMedium, alpha: f64, x: Vec2) -> [Complex64; 2] {
    let d = [alpha.cos(), alpha.sin()];
    let ph = Complex64::from_polar(1.0, medium.kappa_p() * (x[0] * d[0] + x[1] * d[1]));
    [d[0] * ph, d[1] * ph]
}

/// Traction of the plane wave on a surface with normal `nu`:
/// `iκ_p e^{iκ_p x·d} [2μ (ν·d) d + λ ν]`.
pub fn plane_wave_traction(medium: &ElasticMedium, alpha: f64, x: Vec2, nu: Vec2) -> [Complex64; 2] {
    let d = [alpha.cos(), alpha.sin()];
    let kp = medium.kappa_p();
    let ph = I * kp * Complex64::from_polar(1.0, kp * (x[0] * d[0] + x[1] * d[1]));
    let nd = nu[0] * d[0] + nu[1] * d[1];
    [
        ph * (2.0 * medium.mu * nd * d[0] + medium.lambda * nu[0]),
        ph * (2.0 * medium.mu * nd * d[1] + medium.lambda * nu[1]),
    ]
}
