//! The two benchmark sweeps on random sine-arc scenes: a frequency sweep on
//! ten arcs and an arc-count sweep at fixed degree. Each row reports the
//! error against an overkill solution, the share of stored matrix entries
//! and the wall time.
//!
//! ```text
//! cargo run --release --example sweeps -- [frequency|arcs] [seed]
//! ```

use std::time::Instant;

use elastic_arcs::assembly::{AssemblyOptions, IncidentWave, Problem};
use elastic_arcs::geometry::{generate_sine_scene, ElasticMedium, SineSceneRanges};
use elastic_arcs::solver::convergence_study;

fn main() -> elastic_arcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let mode = args.next().unwrap_or_else(|| "frequency".into());
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    // (omega, arcs, N, reference N)
    let rows: Vec<(f64, usize, usize, usize)> = match mode.as_str() {
        "frequency" => vec![(10.0, 10, 170, 230), (50.0, 10, 240, 300)],
        "arcs" => vec![(50.0, 5, 200, 260), (50.0, 10, 200, 260)],
        other => panic!("unknown sweep {other}"),
    };
    println!("omega  arcs    N  error      nnz%   time(s)");
    for (omega, arcs, n, reference) in rows {
        let medium = ElasticMedium::default().with_omega(omega);
        let scene = generate_sine_scene(arcs, seed, &SineSceneRanges::default(), medium)?;
        let t = Instant::now();
        let report = convergence_study(
            Problem::Dirichlet,
            &scene,
            &IncidentWave::new(0.0),
            &[n],
            reference - n,
            &AssemblyOptions::default(),
        )?;
        let error = report.error_at(n).map_or("failed".into(), |e| format!("{e:.2e}"));
        println!(
            "{omega:>5}  {arcs:>4}  {n:>3}  {error:<9}  {:>4.1}  {:>7.1}",
            100.0 * report.nnz_fraction,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
