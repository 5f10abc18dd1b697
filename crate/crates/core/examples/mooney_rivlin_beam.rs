//! Mooney-Rivlin cantilever with the two volumetric terms. `K/2 (ln J)^2`
//! converges; `K/2 ln J` is stressed in every configuration and the beam has
//! no equilibrium, so the solver reports the failure.

use hyperfem::elements::CellFamily;
use hyperfem::verify::{run_beam_benchmark, BeamMaterial, BeamOptions};

fn main() {
    let opts = BeamOptions::default();
    for material in [BeamMaterial::MooneyRivlin, BeamMaterial::MooneyRivlinLnJ] {
        for family in [CellFamily::Q1Hex, CellFamily::Q2Hex] {
            match run_beam_benchmark(material, family, &opts) {
                Ok(r) => println!("{:<20} {:<3} tip u_y = {:.4} m in {} iterations", material.name(), family.name(), r.tip_deflection, r.report.iterations),
                Err(e) => println!("{:<20} {:<3} failed: {e}", material.name(), family.name()),
            }
        }
    }
}
