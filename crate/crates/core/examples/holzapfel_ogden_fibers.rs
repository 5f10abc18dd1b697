//! Anisotropy of the Holzapfel-Ogden model: the same pull on a block is
//! applied along the fiber direction and across it.

use hyperfem::elements::CellFamily;
use hyperfem::fem::{BoundaryConditions, FeModel, FeOptions, NewtonConfig};
use hyperfem::materials::{holzapfel_ogden_defaults, make_holzapfel_ogden, Fibers};
use hyperfem::mesh::generate_box;

fn stretch(fibers: Fibers) -> f64 {
    let kernel = make_holzapfel_ogden(holzapfel_ogden_defaults(), fibers).unwrap().kernel().unwrap();
    let mesh = generate_box(CellFamily::Q1Hex, [4, 2, 2], [0.01, 0.005, 0.005]);
    let bc = BoundaryConditions::new()
        .clamp(&mesh, "clamp")
        .unwrap()
        .traction("load", [2000.0, 0.0, 0.0]);
    let tip = mesh.tagged_nodes("load");
    let fe = FeModel::new(mesh, kernel, bc, FeOptions::default()).unwrap();
    let cfg = NewtonConfig {
        load_steps: 5,
        ..Default::default()
    };
    let (u, _) = fe.solve(&cfg).expect("pull converges");
    tip.iter().map(|&n| u[3 * n]).sum::<f64>() / tip.len() as f64
}

fn main() {
    let along = stretch(Fibers::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap());
    let across = stretch(Fibers::new([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap());
    println!("end displacement under 2 kPa: along fibers {:.3} mm, across {:.3} mm", along * 1e3, across * 1e3);
}
