//! Builds the reference scenes, checks them, and writes them as JSON.
//!
//! ```text
//! cargo run --release --example scenes -- [out_dir] [arc_count] [seed]
//! ```

use std::path::PathBuf;

use elastic_arcs::geometry::{generate_sine_scene, ArcGeometry, ElasticMedium, Scene, SineSceneRanges};

fn main() -> elastic_arcs::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "scenes".into()));
    let count: usize = args.next().map_or(28, |s| s.parse().expect("arc count"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    std::fs::create_dir_all(&dir)?;

    let medium = ElasticMedium::default();
    let scenes = [
        ("segment", Scene::single(medium, ArcGeometry::unit_segment())?),
        ("semicircle", Scene::single(medium, ArcGeometry::semicircle())?),
        ("spiral", Scene::single(medium, ArcGeometry::spiral())?),
        ("sine", generate_sine_scene(count, seed, &SineSceneRanges::default(), medium)?),
    ];
    for (name, scene) in &scenes {
        let report = scene.check()?;
        let path = dir.join(format!("{name}.json"));
        scene.save(&path)?;
        let gap = report.min_distance.map_or("-".to_string(), |d| format!("{d:.3}"));
        println!(
            "{name:<11} arcs={:<3} min_distance={gap:<6} diameter={:.3} -> {}",
            report.arc_count,
            report.diameter,
            path.display()
        );
    }
    Ok(())
}
