//! Convergence study on one of the single-arc benchmark geometries: errors
//! against an overkill solution and the fitted exponential rate.
//!
//! ```text
//! cargo run --release --example convergence -- [segment|semicircle|spiral] [dirichlet|neumann]
//! ```

use std::f64::consts::PI;

use elastic_arcs::assembly::{AssemblyOptions, IncidentWave, Problem};
use elastic_arcs::geometry::{ArcGeometry, ElasticMedium, Scene};
use elastic_arcs::solver::convergence_study;

fn main() -> elastic_arcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let shape = args.next().unwrap_or_else(|| "segment".into());
    let problem: Problem = args.next().unwrap_or_else(|| "dirichlet".into()).parse()?;
    let (arc, alpha, degrees): (_, _, Vec<usize>) = match shape.as_str() {
        "segment" => (ArcGeometry::unit_segment(), 0.0, (4..=160).step_by(4).collect()),
        "semicircle" => (ArcGeometry::semicircle(), PI / 2.0, (4..=200).step_by(4).collect()),
        "spiral" => (ArcGeometry::spiral(), PI / 4.0, (20..=560).step_by(20).collect()),
        other => panic!("unknown geometry {other}"),
    };
    let scene = Scene::single(ElasticMedium::default(), arc)?;
    let report = convergence_study(problem, &scene, &IncidentWave::new(alpha), &degrees, 60, &AssemblyOptions::default())?;

    println!("{shape}, {problem}, reference N = {}", report.reference_degree);
    println!("   N  error");
    for e in &report.entries {
        match e.error {
            Some(err) => println!("{:>4}  {err:.3e}", e.degree),
            None => println!("{:>4}  failed: {}", e.degree, e.failure.as_deref().unwrap_or("")),
        }
    }
    if let Some(fit) = &report.fit {
        println!(
            "fit over N = {}..{}: error ~ {:.3}^(-N), correlation {:.4}",
            fit.first_degree, fit.last_degree, fit.rate, fit.correlation
        );
    }
    Ok(())
}
