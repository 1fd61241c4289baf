//! The building blocks underneath the solver: Hankel functions, the elastic
//! fundamental solution, adaptive Chebyshev expansions of kernels and the
//! closed-form logarithmic integrals.
//!
//! ```text
//! cargo run --release --example expansions
//! ```

use elastic_arcs::chebyshev::{adaptive_expand, adaptive_expand_2d, log_galerkin_diagonal};
use elastic_arcs::geometry::{ArcGeometry, ElasticMedium};
use elastic_arcs::kernels::{elastic_fundamental, weak_kernel_split, KernelId};
use elastic_arcs::special::hankel1;
use num_complex::Complex64;

fn main() -> elastic_arcs::Result<()> {
    for x in [0.5, 5.0, 50.0] {
        println!("H0(1)({x}) = {:.15}", hankel1(0, x)?);
    }

    let medium = ElasticMedium::default();
    let e = elastic_fundamental(&medium, [0.0, 0.0], [0.3, 0.4])?;
    println!("E(0, (0.3, 0.4)) = [[{:.6}, {:.6}], [{:.6}, {:.6}]]", e[0][0], e[0][1], e[1][0], e[1][1]);

    let wave = adaptive_expand(|t| Complex64::from_polar(1.0, 25.0 * t), 1e-14)?;
    println!("exp(25 i t): {} Chebyshev coefficients to 1e-14", wave.len());

    // smooth remainder of the weakly singular kernel on a spiral, after the
    // logarithm is split off
    let arc = ArcGeometry::spiral();
    let pair = weak_kernel_split(&medium, &arc, &arc, true);
    let split = pair.split(KernelId::Weak);
    let r = adaptive_expand_2d(|s, t| split.r(s, t)[0][0], 1e-12)?;
    println!("spiral R_11(s, t): {} x {} coefficients, {} above 1e-12", r.rows(), r.cols(), r.nnz());

    for l in [0, 1, 5, 12] {
        println!("log-kernel Galerkin diagonal, mode {l}: {:.12}", log_galerkin_diagonal(l));
    }
    Ok(())
}
