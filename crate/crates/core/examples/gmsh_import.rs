//! Reads a gmsh file, reports its tags and solves a sag under gravity with the
//! `clamp` facets fixed.
//!
//! ```text
//! cargo run --release --example gmsh_import -- path/to/mesh.msh
//! ```

use hyperfem::fem::{BodyForce, BoundaryConditions, FeModel, FeOptions, NewtonConfig};
use hyperfem::materials::MaterialConfig;
use hyperfem::mesh::read_mesh_file;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/liver.msh").into());
    let mesh = read_mesh_file(path.as_ref()).unwrap_or_else(|e| panic!("{path}: {e}"));
    let info = mesh.info().unwrap();
    println!("{path}: {} {} cells, {} DOFs, volume {:.4e}", info.cells, info.family, info.dofs, info.volume);
    for (tag, n) in &info.tags {
        println!("  tag {tag}: {n} facets");
    }

    let material: MaterialConfig =
        serde_json::from_str(r#"{"builtin": "neo-hookean", "params": {"E": 30000, "nu": 0.45}}"#).unwrap();
    let kernel = material.build().unwrap().kernel().unwrap();
    // tissue density 1060 kg/m^3
    let bc = BoundaryConditions::new()
        .clamp(&mesh, "clamp")
        .expect("mesh has a 'clamp' tag")
        .body(BodyForce::Uniform([0.0, 0.0, -1060.0 * 9.81]));
    let fe = FeModel::new(mesh, kernel, bc, FeOptions::default()).unwrap();
    let (u, report) = fe.solve(&NewtonConfig::default()).expect("sag converges");
    let sag = u.chunks(3).map(|c| -c[2]).fold(0.0, f64::max);
    println!("max sag {:.3} mm after {} iterations", sag * 1e3, report.iterations);
}
