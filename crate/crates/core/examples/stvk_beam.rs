//! Cantilever benchmark with Saint Venant-Kirchhoff on all four element
//! families, cross-checked against the closed-form kernel.
//!
//! ```text
//! cargo run --release --example stvk_beam
//! ```

use hyperfem::elements::CellFamily;
use hyperfem::verify::{run_beam_benchmark, BeamMaterial, BeamOptions};

fn main() {
    let opts = BeamOptions {
        repeats: 3,
        ..Default::default()
    };
    println!("{:<4} {:>6} {:>6} {:>10} {:>12} {:>12}", "elem", "DOFs", "iters", "NR [ms]", "cross-check", "tip u_y [m]");
    for family in CellFamily::VOLUME {
        let r = run_beam_benchmark(BeamMaterial::Stvk, family, &opts).expect("beam converges");
        println!(
            "{:<4} {:>6} {:>6} {:>10.3} {:>12.2e} {:>12.4}",
            family.name(),
            r.dofs,
            r.report.iterations,
            r.median_iteration_ms,
            r.cross_check.unwrap_or(f64::NAN),
            r.tip_deflection
        );
    }
}
