//! Dirichlet scattering by the unit segment: solve at one degree, look at
//! the coefficient decay and check that the total field vanishes next to
//! the arc.
//!
//! ```text
//! cargo run --release --example dirichlet_segment -- [degree] [omega]
//! ```

use elastic_arcs::assembly::{assemble_system, AssemblyOptions, IncidentWave, Problem};
use elastic_arcs::geometry::{ArcGeometry, ElasticMedium, Scene};
use elastic_arcs::potentials::{cnorm, FieldEvaluator, FieldOptions};
use elastic_arcs::solver::solve;

fn main() -> elastic_arcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let degree: usize = args.next().map_or(100, |s| s.parse().expect("degree"));
    let omega: f64 = args.next().map_or(50.0, |s| s.parse().expect("omega"));

    let arc = ArcGeometry::unit_segment();
    let scene = Scene::single(ElasticMedium::default().with_omega(omega), arc.clone())?;
    let wave = IncidentWave::new(0.0);
    let system = assemble_system(Problem::Dirichlet, &scene, &wave, degree, &AssemblyOptions::default())?;
    let (solution, report) = solve(&system)?;
    println!("N={degree} omega={omega}: residual {:.2e}, rcond {:.2e}", report.residual, report.rcond);

    println!("mode  |coefficient|");
    for l in (0..=degree).step_by((degree / 10).max(1)) {
        let size = solution.coeff(0, l, 0).norm().hypot(solution.coeff(0, l, 1).norm());
        println!("{l:>4}  {size:.3e}");
    }

    // the total displacement tends to zero on both faces of the crack
    let eval = FieldEvaluator::new(&solution, &scene, FieldOptions { cutoff_factor: 1e-6, max_order: 1 << 16, ..Default::default() })?;
    println!("offset     |U_tot| above   |U_tot| below");
    for d in [1e-1, 1e-2, 1e-3] {
        let x = arc.point(0.3);
        let up = cnorm(&eval.total(&wave, [x[0], d])?);
        let down = cnorm(&eval.total(&wave, [x[0], -d])?);
        println!("{d:<9.0e}  {up:<14.3e}  {down:.3e}");
    }
    Ok(())
}
