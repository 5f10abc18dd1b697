//! Cantilever beam benchmark: 80 x 15 x 15 m, clamped at `x = 0`, dead
//! traction on the `x = 80` face.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{rel_l2_error, ClosedFormNeoHookean, ClosedFormStvk, VerifyError};
use crate::elements::CellFamily;
use crate::fem::{BoundaryConditions, Constitutive, FeModel, FeOptions, NewtonConfig, NewtonReport};
use crate::materials::{make_mooney_rivlin, make_neo_hookean, make_stvk, LameParams, MaterialModel, MooneyRivlinParams};
use crate::mesh::{beam, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamMaterial {
    Stvk,
    NeoHookean,
    MooneyRivlin,
    /// Mooney-Rivlin with the `K/2 ln J` volumetric term.
    MooneyRivlinLnJ,
}

impl BeamMaterial {
    pub const ALL: [BeamMaterial; 4] = [
        BeamMaterial::Stvk,
        BeamMaterial::NeoHookean,
        BeamMaterial::MooneyRivlin,
        BeamMaterial::MooneyRivlinLnJ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BeamMaterial::Stvk => "stvk",
            BeamMaterial::NeoHookean => "neo-hookean",
            BeamMaterial::MooneyRivlin => "mooney-rivlin",
            BeamMaterial::MooneyRivlinLnJ => "mooney-rivlin-lnj",
        }
    }

    /// E = 3 kPa, nu = 0.3 for StVK and NH; C01 = 2000, C10 = 100, K = 1000 Pa
    /// for Mooney-Rivlin.
    pub fn model(self) -> MaterialModel {
        let lame = LameParams::from_young_poisson(3000.0, 0.3).expect("valid constants");
        let mr = |linear_log_volume| {
            make_mooney_rivlin(MooneyRivlinParams {
                linear_log_volume,
                ..Default::default()
            })
            .expect("valid constants")
        };
        match self {
            BeamMaterial::Stvk => make_stvk(lame),
            BeamMaterial::NeoHookean => make_neo_hookean(lame),
            BeamMaterial::MooneyRivlin => mr(false),
            BeamMaterial::MooneyRivlinLnJ => mr(true),
        }
    }
}

impl fmt::Display for BeamMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BeamMaterial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "stvk" | "saint-venant-kirchhoff" => Ok(BeamMaterial::Stvk),
            "nh" | "neo-hookean" | "neohookean" => Ok(BeamMaterial::NeoHookean),
            "mr" | "mooney-rivlin" => Ok(BeamMaterial::MooneyRivlin),
            "mr-lnj" | "mooney-rivlin-lnj" => Ok(BeamMaterial::MooneyRivlinLnJ),
            _ => Err(format!(
                "unknown material '{s}' (expected stvk, neo-hookean, mooney-rivlin, mooney-rivlin-lnj)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BeamOptions {
    /// Cells along x, y, z.
    pub counts: [usize; 3],
    /// Traction in y on the loaded face, Pa.
    pub load: f64,
    pub newton: NewtonConfig,
    /// Solves repeated for timing; the reported time is the median.
    pub repeats: usize,
    pub parallel: bool,
    /// Also solve with the closed-form kernel when one exists.
    pub cross_check: bool,
}

impl Default for BeamOptions {
    fn default() -> Self {
        Self {
            counts: [12, 2, 2],
            load: -10.0,
            newton: NewtonConfig::default(),
            repeats: 1,
            parallel: true,
            cross_check: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BeamResult {
    pub material: BeamMaterial,
    pub family: String,
    pub dofs: usize,
    pub load: f64,
    #[serde(skip)]
    pub u: Vec<f64>,
    pub report: NewtonReport,
    /// Median over repeats of the mean Newton iteration time.
    pub median_iteration_ms: f64,
    /// `rel_l2_error(generated, closed_form)` for StVK and NH.
    pub cross_check: Option<f64>,
    /// Mean y displacement of the loaded face.
    pub tip_deflection: f64,
}

fn model_with<K: Constitutive>(mesh: Mesh, kernel: K, opts: &BeamOptions) -> Result<FeModel<K>, VerifyError> {
    let bc = BoundaryConditions::new()
        .clamp(&mesh, "clamp")?
        .traction("load", [0.0, opts.load, 0.0]);
    Ok(FeModel::new(
        mesh,
        kernel,
        bc,
        FeOptions {
            parallel: opts.parallel,
            ..Default::default()
        },
    )?)
}

fn solve_timed<K: Constitutive>(model: &FeModel<K>, opts: &BeamOptions) -> Result<(Vec<f64>, NewtonReport, f64), VerifyError> {
    let mut times = Vec::new();
    let mut last = None;
    for _ in 0..opts.repeats.max(1) {
        let (u, report) = model.solve(&opts.newton)?;
        times.push(report.mean_iteration_ms);
        last = Some((u, report));
    }
    times.sort_by(f64::total_cmp);
    let (u, report) = last.expect("at least one repeat");
    Ok((u, report, times[times.len() / 2]))
}

/// Solves the beam with the generated kernel of `material` and, for StVK and
/// NH, again with the closed-form kernel.
pub fn run_beam_benchmark(material: BeamMaterial, family: CellFamily, opts: &BeamOptions) -> Result<BeamResult, VerifyError> {
    let mesh = beam(family, opts.counts);
    let model = model_with(mesh.clone(), material.model().kernel()?, opts)?;
    let (u, report, median) = solve_timed(&model, opts)?;

    let lame = LameParams::from_young_poisson(3000.0, 0.3)?;
    let reference = match (opts.cross_check, material) {
        (true, BeamMaterial::Stvk) => Some(model_with(mesh.clone(), ClosedFormStvk(lame), opts)?.solve(&opts.newton)?.0),
        (true, BeamMaterial::NeoHookean) => {
            Some(model_with(mesh.clone(), ClosedFormNeoHookean(lame), opts)?.solve(&opts.newton)?.0)
        }
        _ => None,
    };
    let cross_check = reference.map(|r| rel_l2_error(&u, &r)).transpose()?;

    let tip = mesh.tagged_nodes("load");
    let tip_deflection = tip.iter().map(|&n| u[3 * n + 1]).sum::<f64>() / tip.len() as f64;
    Ok(BeamResult {
        material,
        family: family.name().to_string(),
        dofs: model.dof_count(),
        load: opts.load,
        u,
        report,
        median_iteration_ms: median,
        cross_check,
        tip_deflection,
    })
}
