//! Authoring a material from a strain-energy string: a Yeoh solid with a
//! logarithmic volumetric penalty, checked against finite differences and
//! then used to compress a cube.

use hyperfem::elements::CellFamily;
use hyperfem::fem::{BoundaryConditions, FeModel, FeOptions, NewtonConfig};
use hyperfem::materials::MaterialConfig;
use hyperfem::mesh::generate_box;
use hyperfem::verify::{fd_check_kernel, random_deformation};
use rand::SeedableRng;

fn main() {
    let cfg: MaterialConfig = serde_json::from_str(
        r#"{
            "name": "yeoh",
            "expression": "c1*(J^(-2/3)*tr(C) - 3) + c2*(J^(-2/3)*tr(C) - 3)^2 + kappa/2*ln(J)^2",
            "params": {"c1": 500, "c2": 50, "kappa": 5000}
        }"#,
    )
    .unwrap();
    let model = cfg.build().map_err(|(path, msg)| format!("{path}: {msg}")).unwrap();
    let kernel = model.kernel().unwrap();

    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let f = random_deformation(&mut rng, 0.3, (0.7, 1.5));
        let r = fd_check_kernel(&kernel, &f, 1e-6).unwrap();
        worst = (worst.0.max(r.stress), worst.1.max(r.tangent));
    }
    println!("finite-difference check: P {:.1e}, A {:.1e}", worst.0, worst.1);

    // squeeze a unit cube by 20% along x, free to bulge sideways
    let mesh = generate_box(CellFamily::Q2Hex, [2, 2, 2], [1.0, 1.0, 1.0]);
    let left = mesh.tagged_nodes("clamp");
    let right = mesh.tagged_nodes("load");
    let bc = BoundaryConditions::new()
        .prescribe(&mesh, &left, |_| [0.0; 3])
        .prescribe(&mesh, &right, |_| [-0.2, 0.0, 0.0]);
    let fe = FeModel::new(mesh, kernel, bc, FeOptions::default()).unwrap();
    let cfg = NewtonConfig {
        load_steps: 4,
        ..Default::default()
    };
    let (u, report) = fe.solve(&cfg).expect("compression converges");
    let bulge = u.chunks(3).map(|c| c[1].abs().max(c[2].abs())).fold(0.0, f64::max);
    println!("{} Newton iterations over {} steps; max lateral bulge {bulge:.4}", report.iterations, report.steps.len());
}
