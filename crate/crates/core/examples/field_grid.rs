//! Total displacement field around a scene, written as a CSV grid with a
//! JSON header (the data behind the field plots).
//!
//! ```text
//! cargo run --release --example field_grid -- [scene.json] [dirichlet|neumann] [degree] [out_dir]
//! ```

use std::path::PathBuf;

use elastic_arcs::assembly::{assemble_system, AssemblyOptions, IncidentWave, Problem};
use elastic_arcs::geometry::{ArcGeometry, ElasticMedium, Scene};
use elastic_arcs::potentials::{eval_total_field_grid, FieldOptions, GridSpec};
use elastic_arcs::solver::solve;

fn main() -> elastic_arcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let scene = match args.next() {
        Some(path) if path != "-" => Scene::load(path.as_ref())?,
        _ => Scene::single(ElasticMedium::default(), ArcGeometry::semicircle())?,
    };
    let problem: Problem = args.next().unwrap_or_else(|| "dirichlet".into()).parse()?;
    let degree: usize = args.next().map_or(120, |s| s.parse().expect("degree"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "field".into()));

    let wave = IncidentWave::new(std::f64::consts::FRAC_PI_2);
    let system = assemble_system(problem, &scene, &wave, degree, &AssemblyOptions::default())?;
    let (solution, _) = solve(&system)?;

    // square window around the scene with a margin of a quarter diameter
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for arc in &scene.arcs {
        for k in 0..=64 {
            let p = arc.point(-1.0 + k as f64 / 32.0);
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
    }
    let pad = 0.25 * scene.diameter();
    let spec = GridSpec {
        xmin: lo[0] - pad,
        xmax: hi[0] + pad,
        ymin: lo[1] - pad,
        ymax: hi[1] + pad,
        nx: 121,
        ny: 121,
    };
    let opts = FieldOptions::default();
    let grid = eval_total_field_grid(&solution, &scene, &wave, &spec, opts)?;
    std::fs::create_dir_all(&out)?;
    grid.write_csv(&out.join("field.csv"))?;
    let header = grid.header(&solution, &scene, &wave, &opts);
    std::fs::write(out.join("field.json"), serde_json::to_string_pretty(&header)?)?;
    println!(
        "{} points ({} masked) -> {}",
        spec.nx * spec.ny,
        grid.masked_count(),
        out.join("field.csv").display()
    );
    Ok(())
}
