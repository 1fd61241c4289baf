//! Neumann (traction-free) scattering by a semicircle lit from below.
//! Prints the jump density at a few points of the arc and the far-field
//! amplitude of the scattered wave.
//!
//! ```text
//! cargo run --release --example neumann_semicircle -- [degree]
//! ```

use std::f64::consts::PI;

use elastic_arcs::assembly::{assemble_system, AssemblyOptions, IncidentWave, Problem};
use elastic_arcs::geometry::{ArcGeometry, ElasticMedium, Scene};
use elastic_arcs::potentials::{cnorm, eval_scattered_field};
use elastic_arcs::solver::{solve, sobolev_norm};
use num_complex::Complex64;

fn main() -> elastic_arcs::Result<()> {
    let degree: usize = std::env::args().nth(1).map_or(120, |s| s.parse().expect("degree"));
    let scene = Scene::single(ElasticMedium::default(), ArcGeometry::semicircle())?;
    let wave = IncidentWave::new(PI / 2.0);
    let system = assemble_system(Problem::Neumann, &scene, &wave, degree, &AssemblyOptions::default())?;
    let (solution, report) = solve(&system)?;
    println!(
        "N={degree}: residual {:.2e}, coefficient norm {:.4e}",
        report.residual,
        sobolev_norm(&solution)
    );

    // density = sqrt(1 - t^2) sum_l b_l U_l(t); at t = cos(theta), U_l = sin((l+1) theta) / sin(theta)
    println!("     t    |jump|");
    for t in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let th = f64::acos(t);
        let mut jump = [Complex64::default(); 2];
        for l in 0..=degree {
            let u = ((l + 1) as f64 * th).sin();
            for (p, j) in jump.iter_mut().enumerate() {
                *j += solution.coeff(0, l, p) * u;
            }
        }
        println!("{t:>6.2}    {:.4e}", cnorm(&jump));
    }

    // sqrt(r)|U| approaches a constant along each direction
    println!("angle  sqrt(r)|U| at r = 100, 400");
    for angle in [0.0, PI / 4.0, PI / 2.0, PI] {
        let at = |r: f64| -> elastic_arcs::Result<f64> {
            let u = eval_scattered_field(&solution, &scene, [r * angle.cos(), r * angle.sin()])?;
            Ok(r.sqrt() * cnorm(&u))
        };
        println!("{angle:>5.2}  {:.4}  {:.4}", at(100.0)?, at(400.0)?);
    }
    Ok(())
}
