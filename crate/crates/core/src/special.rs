//! Bessel and Hankel functions of orders 0, 1, 2 for real arguments.
//!
//! Small arguments use the ascending series summed in double-double
//! arithmetic (the series cancels heavily once `z` passes a few units);
//! large arguments use Hankel's asymptotic expansion. Besides the plain
//! functions this module exposes the "regular part" of `Y_n`,
//!
//! ```text
//! Ŝ_n(z) = Y_n(z) - P_n(z) - (2/π) log(z) J_n(z),
//! ```
//!
//! where `P_n` collects the negative powers (`P_0 = 0`, `P_1 = -2/(πz)`,
//! `P_2 = -4/(πz²) - 1/π`). `Ŝ_n` is an entire function of `z`, which is
//! what the kernel splitting is built on.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the ascending series is used.
const SERIES_LIMIT: f64 = 20.0;
/// Below this argument plain `f64` is accurate enough for the series.
const PLAIN_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 80;

// ---------------------------------------------------------------------------
// double-double arithmetic

#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    const fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = ((self.hi - p) - e + self.lo) / d;
        let (hi, lo) = two_sum(q1, r);
        Dd { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Ascending-series coefficient tables for order `n`:
/// `J_n = (z/2)^n Σ a_k y^k` and `Σ (H_k + H_{n+k}) a_k y^k`, `y = z²/4`,
/// with `a_k = (-1)^k / (k! (n+k)!)`.
struct SeriesTables {
    j: [Vec<Dd>; 3],
    h: [Vec<Dd>; 3],
}

fn tables() -> &'static SeriesTables {
    static T: OnceLock<SeriesTables> = OnceLock::new();
    T.get_or_init(|| {
        let mut harmonic = vec![Dd::from(0.0)];
        for k in 1..=MAX_TERMS + 2 {
            let prev = harmonic[k - 1];
            harmonic.push(prev.add(Dd::from(1.0).div_f64(k as f64)));
        }
        let build = |n: usize| {
            // a_0 = 1/n!
            let mut a = Dd::from(1.0);
            for m in 1..=n {
                a = a.div_f64(m as f64);
            }
            let mut j = Vec::with_capacity(MAX_TERMS);
            let mut h = Vec::with_capacity(MAX_TERMS);
            for k in 0..MAX_TERMS {
                if k > 0 {
                    a = a.div_f64(-((k * (n + k)) as f64));
                }
                j.push(a);
                h.push(a.mul(harmonic[k].add(harmonic[n + k])));
            }
            (j, h)
        };
        let (j0, h0) = build(0);
        let (j1, h1) = build(1);
        let (j2, h2) = build(2);
        SeriesTables {
            j: [j0, j1, j2],
            h: [h0, h1, h2],
        }
    })
}

fn terms_for(z: f64) -> usize {
    ((10.0 + 3.0 * z) as usize).min(MAX_TERMS)
}

fn horner_dd(c: &[Dd], y: Dd) -> f64 {
    let mut acc = Dd::default();
    for &ck in c.iter().rev() {
        acc = acc.mul(y).add(ck);
    }
    acc.to_f64()
}

fn horner_f64(c: &[Dd], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * y + ck.hi)
}

/// `J_n(z)` and the regular part `Ŝ_n(z)` for `n = 0, 1, 2`, together with
/// the scaled values `J_1(z)/z` and `Ŝ_1(z)/z` that stay finite at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSet {
    pub j: [f64; 3],
    pub s: [f64; 3],
    pub j1_over_z: f64,
    pub s1_over_z: f64,
}

impl BesselSet {
    /// `Y_n(z)` for `z > 0`, rebuilt from the regular part.
    pub fn y(&self, n: usize, z: f64) -> f64 {
        self.s[n] + pole_part(n, z) + 2.0 / PI * z.ln() * self.j[n]
    }
}

/// The negative-power part `P_n(z)` of `Y_n(z)`.
pub fn pole_part(n: usize, z: f64) -> f64 {
    match n {
        0 => 0.0,
        1 => -2.0 / (PI * z),
        _ => -4.0 / (PI * z * z) - 1.0 / PI,
    }
}

/// Evaluates the full [`BesselSet`] at `z ≥ 0`.
pub fn bessel_set(z: f64) -> BesselSet {
    debug_assert!(z >= 0.0);
    if z < SERIES_LIMIT {
        series_set(z)
    } else {
        asymptotic_set(z)
    }
}

fn series_set(z: f64) -> BesselSet {
    let t = tables();
    let k = terms_for(z);
    let half = 0.5 * z;
    let (sj, sh): ([f64; 3], [f64; 3]) = if z < PLAIN_LIMIT {
        let y = half * half;
        (
            [0, 1, 2].map(|n| horner_f64(&t.j[n][..k], y)),
            [0, 1, 2].map(|n| horner_f64(&t.h[n][..k], y)),
        )
    } else {
        let (hi, lo) = two_prod(half, half);
        let y = Dd { hi, lo };
        (
            [0, 1, 2].map(|n| horner_dd(&t.j[n][..k], y)),
            [0, 1, 2].map(|n| horner_dd(&t.h[n][..k], y)),
        )
    };
    let c = 2.0 / PI * (EULER_GAMMA - LN_2);
    let pow = [1.0, half, half * half];
    let j = [0, 1, 2].map(|n| pow[n] * sj[n]);
    let s = [0, 1, 2].map(|n| c * j[n] - pow[n] * sh[n] / PI);
    BesselSet {
        j,
        s,
        j1_over_z: 0.5 * sj[1],
        s1_over_z: 0.5 * (c * sj[1] - sh[1] / PI),
    }
}

/// Hankel asymptotic `P_ν`, `Q_ν` series for `ν = 0, 1`.
fn hankel_pq(nu: usize, z: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let inv8z = 1.0 / (8.0 * z);
    let mut p = 0.0f64;
    let mut q = 0.0f64;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) * inv8z / k as f64;
        }
        let mag = term.abs();
        if mag > prev || mag < 1e-18 * (p.abs() + q.abs()).max(1e-300) {
            break;
        }
        prev = mag;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term == 0.0 {
            break;
        }
    }
    (p, q)
}

fn asymptotic_set(z: f64) -> BesselSet {
    let (sz, cz) = z.sin_cos();
    let amp = (2.0 / (PI * z)).sqrt();
    // χ_0 = z - π/4, χ_1 = z - 3π/4
    let (c0, s0) = ((cz + sz) * FRAC_1_SQRT_2, (sz - cz) * FRAC_1_SQRT_2);
    let (c1, s1) = ((sz - cz) * FRAC_1_SQRT_2, -(sz + cz) * FRAC_1_SQRT_2);
    let (p0, q0) = hankel_pq(0, z);
    let (p1, q1) = hankel_pq(1, z);
    let j0 = amp * (p0 * c0 - q0 * s0);
    let y0 = amp * (p0 * s0 + q0 * c0);
    let j1 = amp * (p1 * c1 - q1 * s1);
    let y1 = amp * (p1 * s1 + q1 * c1);
    let j2 = 2.0 / z * j1 - j0;
    let y2 = 2.0 / z * y1 - y0;
    let lz = 2.0 / PI * z.ln();
    let j = [j0, j1, j2];
    let y = [y0, y1, y2];
    let s = [0, 1, 2].map(|n| y[n] - pole_part(n, z) - lz * j[n]);
    BesselSet {
        j,
        s,
        j1_over_z: j1 / z,
        s1_over_z: s[1] / z,
    }
}

fn check_order(order: u32) -> Result<usize> {
    if order > 2 {
        return Err(Error::InvalidArgument(format!("Bessel order {order} not supported (0..=2)")));
    }
    Ok(order as usize)
}

/// `J_n(x)` for `x ≥ 0`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    let n = check_order(order)?;
    if !(x >= 0.0) {
        return Err(Error::OutOfDomain {
            value: x,
            domain: "x >= 0",
        });
    }
    Ok(bessel_set(x).j[n])
}

/// `Y_n(x)` for `x > 0`.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    let n = check_order(order)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfDomain {
            value: x,
            domain: "x > 0",
        });
    }
    Ok(bessel_set(x).y(n, x))
}

/// `H^{(1)}_n(x) = J_n(x) + i Y_n(x)` for `x > 0`.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    let n = check_order(order)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfDomain {
            value: x,
            domain: "x > 0",
        });
    }
    let b = bessel_set(x);
    Ok(Complex64::new(b.j[n], b.y(n, x)))
}

/// Separation `H^{(1)}_n(x) = analytic + (2i/π) log(x) · log_coeff`.
///
/// `log_coeff` is `J_n(x)`; `analytic` is `J_n + i (P_n + Ŝ_n)` and still
/// carries the pole `P_n` for orders 1 and 2, which is why those orders fail
/// at `x = 0`.
pub fn hankel1_log_split(order: u32, x: f64) -> Result<(Complex64, f64)> {
    let n = check_order(order)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::OutOfDomain {
            value: x,
            domain: "x >= 0",
        });
    }
    if x == 0.0 && n > 0 {
        return Err(Error::Pole { order });
    }
    let b = bessel_set(x);
    let pole = if n == 0 { 0.0 } else { pole_part(n, x) };
    Ok((Complex64::new(b.j[n], pole + b.s[n]), b.j[n]))
}

/// Per-order view of [`hankel1_log_split`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HankelLogSplit {
    pub order: u32,
}

impl HankelLogSplit {
    pub fn new(order: u32) -> Result<Self> {
        check_order(order)?;
        Ok(Self { order })
    }

    pub fn analytic_part(&self, x: f64) -> Result<Complex64> {
        Ok(hankel1_log_split(self.order, x)?.0)
    }

    pub fn log_coeff_part(&self, x: f64) -> Result<f64> {
        Ok(hankel1_log_split(self.order, x)?.1)
    }
}
