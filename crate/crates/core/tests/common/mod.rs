//! Brute-force quadrature used as an independent reference.
#![allow(dead_code)]

use std::f64::consts::PI;

use elastic_arcs::geometry::{ArcGeometry, ElasticMedium};
use elastic_arcs::kernels::{elastic_fundamental, ArcPair, KernelId, Mat2};
use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, dp) = if n == 1 { (z, 1.0) } else { (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0)) };
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite rule: nodes and weights on `[a, b]` with panels no longer than `h`.
pub struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        Self { x, w }
    }

    fn panel(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in self.x.iter().zip(&self.w) {
            out.push((m + r * x, r * w));
        }
    }

    pub fn uniform(&self, a: f64, b: f64, h: f64, out: &mut Vec<(f64, f64)>) {
        if b <= a {
            return;
        }
        let n = ((b - a) / h).ceil().max(1.0) as usize;
        for k in 0..n {
            let lo = a + (b - a) * k as f64 / n as f64;
            let hi = a + (b - a) * (k + 1) as f64 / n as f64;
            self.panel(lo, hi, out);
        }
    }

    /// Nodes on `[a, b]` graded geometrically toward the endpoint `c`
    /// (`c == a` or `c == b`).
    pub fn graded(&self, a: f64, b: f64, c: f64, h: f64, out: &mut Vec<(f64, f64)>) {
        let len = b - a;
        if len <= 0.0 {
            return;
        }
        let sigma: f64 = 0.15;
        // breakpoints measured from c, down to where the remainder is negligible
        let mut cuts = vec![len];
        let mut d = len.min(h);
        cuts.push(d);
        while d > 1e-13 {
            d *= sigma;
            cuts.push(d);
        }
        cuts.push(0.0);
        for k in 0..cuts.len() - 1 {
            let (far, near) = (cuts[k], cuts[k + 1]);
            if far <= near {
                continue;
            }
            let (lo, hi) = if c == a { (a + near, a + far) } else { (b - far, b - near) };
            if k == 0 {
                self.uniform(lo, hi, h, out);
            } else {
                self.panel(lo, hi, out);
            }
        }
    }
}

/// Angle nodes for an inner integral over `[0, π]` with a logarithmic
/// singularity at `theta`.
pub fn inner_nodes(rule: &Rule, theta: f64, h: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    rule.graded(0.0, theta, theta, h, &mut out);
    rule.graded(theta, PI, theta, h, &mut out);
    out
}

pub fn outer_nodes(rule: &Rule, h: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    rule.uniform(0.0, PI, h, &mut out);
    out
}

/// Reference integrals with the panel sizes used across the tests.
pub struct Oracle {
    pub rule: Rule,
    pub outer_h: f64,
    pub inner_h: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            rule: Rule::new(16),
            outer_h: 0.04,
            inner_h: 0.04,
        }
    }
}

/// `[l][m]` of 2×2 matrices.
pub type Table = Vec<Vec<Mat2>>;

fn zero_table(n: usize) -> Table {
    vec![vec![[[Complex64::default(); 2]; 2]; n + 1]; n + 1]
}

impl Oracle {
    /// `∫_0^π ∫_0^π log|cos θ - cos φ| cos lθ cos mφ dφ dθ`.
    pub fn log_entry(&self, l: usize, m: usize) -> f64 {
        let mut acc = 0.0;
        for (th, wt) in outer_nodes(&self.rule, self.outer_h) {
            let mut inner = 0.0;
            for (ph, wp) in inner_nodes(&self.rule, th, self.inner_h) {
                if ph.cos() == th.cos() {
                    continue;
                }
                inner += wp * (th.cos() - ph.cos()).abs().ln() * (m as f64 * ph).cos();
            }
            acc += wt * inner * (l as f64 * th).cos();
        }
        acc
    }

    /// Weak block entries `∫∫ E(r_i(s), r_j(t)) w⁻¹T_l(s) w⁻¹T_m(t)` for
    /// `l, m ≤ n`, evaluating the fundamental tensor directly.
    pub fn weak_block(&self, medium: &ElasticMedium, arc_i: &ArcGeometry, arc_j: &ArcGeometry, same: bool, n: usize) -> Table {
        let mut out = zero_table(n);
        let outer = outer_nodes(&self.rule, self.outer_h);
        for (th, wt) in outer {
            let x = arc_i.point(th.cos());
            let inner = if same {
                inner_nodes(&self.rule, th, self.inner_h)
            } else {
                outer_nodes(&self.rule, self.inner_h)
            };
            let mut row = vec![[[Complex64::default(); 2]; 2]; n + 1];
            for (ph, wp) in inner {
                let y = arc_j.point(ph.cos());
                if same && y == x {
                    continue;
                }
                let e = elastic_fundamental(medium, x, y).expect("distinct points");
                for (m, r) in row.iter_mut().enumerate() {
                    let f = wp * (m as f64 * ph).cos();
                    add_scaled(r, &e, f);
                }
            }
            for (l, out_l) in out.iter_mut().enumerate() {
                let f = wt * (l as f64 * th).cos();
                for (o, r) in out_l.iter_mut().zip(&row) {
                    add_scaled(o, r, f);
                }
            }
        }
        out
    }

    /// Hyper block entries from the four-term form with trial and test
    /// functions `wU_m`, `wU_l`, written in angles:
    /// `(wU_m)(t) dt = sin((m+1)φ) sin φ dφ`, `(wU_m)'(t) dt = -(m+1) cos((m+1)φ) dφ`.
    /// The two kernels acted on by `d/ds_x` pick up a minus sign when that
    /// derivative is moved onto the test function.
    pub fn hyper_block(&self, medium: &ElasticMedium, arc_i: &ArcGeometry, arc_j: &ArcGeometry, same: bool, n: usize) -> Table {
        let pair = ArcPair::new(medium, arc_i, arc_j, same);
        let kernels = [KernelId::G1, KernelId::G2, KernelId::G3, KernelId::G4];
        let mut out = zero_table(n);
        let value = |u: f64, ph: f64| -> f64 {
            // (wU_m)(cos φ)·sin φ
            ph.sin() * (u * ph).sin()
        };
        let deriv = |u: f64, ph: f64| -> f64 { -u * (u * ph).cos() };
        for (th, wt) in outer_nodes(&self.rule, self.outer_h) {
            let s = th.cos();
            let inner = if same {
                inner_nodes(&self.rule, th, self.inner_h)
            } else {
                outer_nodes(&self.rule, self.inner_h)
            };
            // rows[k][m]: inner integral of kernel k against the trial factor
            let mut rows = vec![vec![[[Complex64::default(); 2]; 2]; n + 1]; 4];
            for (ph, wp) in inner {
                let t = ph.cos();
                // nodes within rounding of the singular point carry negligible weight
                if same && t == s {
                    continue;
                }
                for (k, id) in kernels.iter().enumerate() {
                    let g = pair.split(*id).value(s, t).expect("off-diagonal");
                    for m in 0..=n {
                        let u = (m + 1) as f64;
                        let trial = match k {
                            0 | 2 => deriv(u, ph),
                            _ => value(u, ph),
                        };
                        add_scaled(&mut rows[k][m], &g, wp * trial);
                    }
                }
            }
            for l in 0..=n {
                let u = (l + 1) as f64;
                for k in 0..4 {
                    let test = match k {
                        0 | 1 => -deriv(u, th),
                        _ => value(u, th),
                    };
                    for m in 0..=n {
                        add_scaled(&mut out[l][m], &rows[k][m], wt * test);
                    }
                }
            }
        }
        out
    }
}

fn add_scaled(acc: &mut Mat2, m: &Mat2, f: f64) {
    for q in 0..2 {
        for p in 0..2 {
            acc[q][p] += m[q][p] * f;
        }
    }
}

/// Largest relative deviation, measured against the largest oracle entry.
pub fn max_relative_deviation(block: &ndarray::Array2<Complex64>, table: &Table) -> f64 {
    let scale = table
        .iter()
        .flatten()
        .flat_map(|m| m.iter().flatten())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (l, row) in table.iter().enumerate() {
        for (m, e) in row.iter().enumerate() {
            for q in 0..2 {
                for p in 0..2 {
                    let d = (block[[2 * l + q, 2 * m + p]] - e[q][p]).norm();
                    worst = worst.max(d / scale);
                }
            }
        }
    }
    worst
}
