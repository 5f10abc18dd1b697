//! Manufactured-solution convergence study on the unit cube.
//!
//! ```text
//! cargo run --release --example mms_convergence -- p2
//! ```

use std::sync::Arc;

use hyperfem::elements::CellFamily;
use hyperfem::fem::NewtonConfig;
use hyperfem::materials::MaterialConfig;
use hyperfem::verify::{run_mms_convergence, MmsCase};

fn main() {
    let family = std::env::args()
        .nth(1)
        .map(|s| CellFamily::from_name(&s).expect("p1, p2, q1 or q2"))
        .unwrap_or(CellFamily::P1Tet);
    let sizes: &[usize] = if family.is_quadratic() { &[2, 3, 4, 6] } else { &[4, 8, 12] };
    let model = MaterialConfig::builtin("neo-hookean").build().unwrap();
    let case = Arc::new(MmsCase::standard(&model).unwrap());
    let table = run_mms_convergence(&case, family, sizes, &NewtonConfig::default()).map_err(|(e, _)| e).unwrap();
    println!("{:>4} {:>8} {:>12} {:>7}", "n", "DOFs", "rel. L2", "order");
    for r in &table.rows {
        let order = r.order.map_or("-".into(), |p| format!("{p:.2}"));
        println!("{:>4} {:>8} {:>12.3e} {:>7}", r.n, r.dofs, r.error, order);
    }
}
