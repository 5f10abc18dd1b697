//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Run with `cargo test --test acceptance`. The process fails when a
//! criterion fails, except for those listed in `KNOWN_UNATTAINABLE`, which are
//! still evaluated and reported.

use std::sync::Arc;
use std::time::Instant;

use hyperfem::elements::{permute, quadrature, unpermute, CellFamily, OrderingScheme, SUPPORTED_DEGREES};
use hyperfem::fem::{BoundaryConditions, FeModel, FeOptions, NewtonConfig};
use hyperfem::materials::{
    holzapfel_ogden_defaults, make_holzapfel_ogden, make_mooney_rivlin, make_neo_hookean, make_stvk, Fibers, LameParams,
    MaterialModel, MooneyRivlinParams,
};
use hyperfem::mesh::{beam, generate_box, read_msh_str, write_msh_string, BEAM_DIMS};
use hyperfem::verify::{
    fd_check_kernel, matmul3, random_deformation, random_rotation, run_beam_benchmark, run_mms_convergence, BeamMaterial,
    BeamOptions, BeamResult, MmsCase,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const FD_STATES: usize = 200;
const FD_DET_RANGE: (f64, f64) = (0.7, 1.5);
const FD_STEP: f64 = 1e-6;
const FD_STRESS_TOL: f64 = 1e-6;
const FD_TANGENT_TOL: f64 = 1e-5;
const FD_TIME_LIMIT_S: f64 = 10.0;

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_TIME_LIMIT_S: f64 = 120.0;

const MMS_P1_SIZES: [usize; 4] = [4, 8, 12, 16];
const MMS_P2_SIZES: [usize; 4] = [2, 3, 4, 6];
const MMS_P1_ORDER: f64 = 1.8;
const MMS_P2_ORDER: f64 = 2.7;
const MMS_TIME_LIMIT_S: f64 = 300.0;

const NEWTON_MAX_ITER: usize = 25;
const NEWTON_TOL: f64 = 1e-10;
/// Scaled residuals below this are at round-off level (see `quadratic_constants`).
const QUADRATIC_FLOOR: f64 = 1e-12;
const QUADRATIC_C_MAX: f64 = 1e3;

const GEOMETRY_TOL: f64 = 1e-9;
const QUADRATURE_TOL: f64 = 1e-12;

const STRESS_FREE_TOL: f64 = 1e-12;
const FRAME_TOL: f64 = 1e-10;
const RIGID_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "mooney-rivlin-benchmark",
    "the K/2 ln J volumetric term leaves tr(sigma) = 3K/(2J) != 0 in every state, so the traction-free \
     beam has no equilibrium; the runs fail by element inversion",
)];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn lame() -> LameParams {
    LameParams::from_young_poisson(3000.0, 0.3).unwrap()
}

fn ho() -> MaterialModel {
    let fibers = Fibers::new([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0]).unwrap();
    make_holzapfel_ogden(holzapfel_ogden_defaults(), fibers).unwrap()
}

fn mr(linear_log_volume: bool) -> MaterialModel {
    make_mooney_rivlin(MooneyRivlinParams {
        linear_log_volume,
        ..Default::default()
    })
    .unwrap()
}

fn all_materials() -> Vec<MaterialModel> {
    vec![make_stvk(lame()), make_neo_hookean(lame()), mr(false), mr(true), ho()]
}

fn stress_free_materials() -> Vec<MaterialModel> {
    vec![make_stvk(lame()), make_neo_hookean(lame()), mr(false)]
}

fn kernel_derivatives() -> Outcome {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(20240601);
    let mut worst = Vec::new();
    let mut ok = true;
    for m in all_materials() {
        let k = m.kernel().unwrap();
        let (mut ws, mut wt) = (0.0f64, 0.0f64);
        for _ in 0..FD_STATES {
            let f = random_deformation(&mut rng, 0.3, FD_DET_RANGE);
            match fd_check_kernel(&k, &f, FD_STEP) {
                Ok(r) => {
                    ws = ws.max(r.stress);
                    wt = wt.max(r.tangent);
                }
                Err(_) => ok = false,
            }
        }
        ok &= ws <= FD_STRESS_TOL && wt <= FD_TANGENT_TOL;
        worst.push(format!("{} P {ws:.1e} A {wt:.1e}", m.name()));
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        id: "kernel-derivatives",
        pass: ok && secs < FD_TIME_LIMIT_S,
        detail: format!("{} states each; {}; {secs:.1} s", FD_STATES, worst.join(", ")),
    }
}

fn oracle_equivalence(results: &[BeamResult], secs: f64) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in results.iter().filter(|r| r.cross_check.is_some()) {
        let e = r.cross_check.unwrap();
        ok &= e <= ORACLE_TOL;
        parts.push(format!("{}/{} {e:.1e}", r.material.name(), r.family));
    }
    ok &= parts.len() == 8;
    Outcome {
        id: "oracle-equivalence",
        pass: ok && secs < ORACLE_TIME_LIMIT_S,
        detail: format!("{}; {secs:.1} s", parts.join(", ")),
    }
}

fn mms_convergence() -> Outcome {
    let t = Instant::now();
    let case = Arc::new(MmsCase::standard(&make_stvk(lame())).unwrap());
    let mut ok = true;
    let mut parts = Vec::new();
    for (family, sizes, min) in [
        (CellFamily::P1Tet, &MMS_P1_SIZES[..], MMS_P1_ORDER),
        (CellFamily::P2Tet, &MMS_P2_SIZES[..], MMS_P2_ORDER),
    ] {
        match run_mms_convergence(&case, family, sizes, &NewtonConfig::default()) {
            Ok(table) => {
                let order = table.asymptotic_order().unwrap_or(f64::NAN);
                let mono = table.strictly_decreasing();
                ok &= order >= min && mono && table.rows.len() >= 4;
                let errs: Vec<String> = table.rows.iter().map(|r| format!("{:.2e}", r.error)).collect();
                parts.push(format!(
                    "{} n={sizes:?} e=[{}] order {order:.3} (min {min}){}",
                    family.name(),
                    errs.join(" "),
                    if mono { "" } else { " NOT monotone" }
                ));
            }
            Err((e, _)) => {
                ok = false;
                parts.push(format!("{} failed: {e}", family.name()));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        id: "mms-convergence",
        pass: ok && secs < MMS_TIME_LIMIT_S,
        detail: format!("{}; {secs:.1} s", parts.join("; ")),
    }
}

fn solver_protocol(results: &[BeamResult]) -> Outcome {
    let mut ok = true;
    let mut worst_c: f64 = 0.0;
    let mut worst_it = 0;
    let mut bad = Vec::new();
    let mut count = 0;
    for r in results {
        count += 1;
        let c = r.report.quadratic_constants(QUADRATIC_FLOOR);
        let it = r.report.max_step_iterations();
        let good = r.report.converged
            && r.report.steps.len() == 1
            && it <= NEWTON_MAX_ITER
            && c.len() == 2
            && c.iter().all(|&c| c <= QUADRATIC_C_MAX);
        if !good {
            bad.push(format!("{}/{} it {it} c {c:?}", r.material.name(), r.family));
        }
        ok &= good;
        worst_it = worst_it.max(it);
        worst_c = c.iter().copied().fold(worst_c, f64::max);
    }
    Outcome {
        id: "solver-protocol",
        pass: ok,
        detail: format!(
            "{count} beam solves at tol {NEWTON_TOL:e}: max {worst_it} iterations, max quadratic c {worst_c:.1} (bound {QUADRATIC_C_MAX:e}){}",
            if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }
        ),
    }
}

fn monomial_exact(family: CellFamily, e: [u32; 3]) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let sym = |k: u32| if k % 2 == 1 { 0.0 } else { 2.0 / f64::from(k + 1) };
    match family {
        CellFamily::P1Tet => fact(e[0]) * fact(e[1]) * fact(e[2]) / fact(e[0] + e[1] + e[2] + 3),
        CellFamily::Tri3 => fact(e[0]) * fact(e[1]) / fact(e[0] + e[1] + 2),
        CellFamily::Q1Hex => sym(e[0]) * sym(e[1]) * sym(e[2]),
        CellFamily::Quad4 => sym(e[0]) * sym(e[1]),
        _ => unreachable!(),
    }
}

fn geometry_quadrature() -> Outcome {
    let mut ok = true;
    let mut worst_v: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let volume = BEAM_DIMS[0] * BEAM_DIMS[1] * BEAM_DIMS[2];
    let area = BEAM_DIMS[1] * BEAM_DIMS[2];
    for family in CellFamily::VOLUME {
        let mesh = beam(family, [12, 2, 2]);
        let v = mesh.volume().unwrap();
        let a = mesh.area("load").unwrap();
        // the same area through the Neumann assembly path
        let bc = BoundaryConditions::new().traction("load", [1.0, 0.0, 0.0]);
        let model = FeModel::new(mesh, make_stvk(lame()).kernel().unwrap(), bc, FeOptions::default()).unwrap();
        let fx: f64 = model.external_force().iter().step_by(3).sum();
        let ev = (v - volume).abs() / volume;
        let ea = ((a - area).abs() / area).max((fx - area).abs() / area);
        worst_v = worst_v.max(ev);
        worst_a = worst_a.max(ea);
        ok &= ev <= GEOMETRY_TOL && ea <= GEOMETRY_TOL;
    }
    let mut worst_q: f64 = 0.0;
    let mut checked = 0;
    for family in [CellFamily::P1Tet, CellFamily::Q1Hex, CellFamily::Tri3, CellFamily::Quad4] {
        let dim = family.dim() as u32;
        for degree in SUPPORTED_DEGREES {
            let rule = quadrature(family, degree).unwrap();
            ok &= rule.exactness >= degree;
            for a in 0..=rule.exactness {
                for b in 0..=rule.exactness - a {
                    for c in 0..=(rule.exactness - a - b) * u32::from(dim == 3) {
                        let q: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                            .sum();
                        let ex = monomial_exact(family, [a, b, c]);
                        let e = (q - ex).abs() / ex.abs().max(1.0);
                        worst_q = worst_q.max(e);
                        ok &= e <= QUADRATURE_TOL;
                        checked += 1;
                    }
                }
            }
        }
    }
    Outcome {
        id: "geometry-quadrature",
        pass: ok,
        detail: format!(
            "volume rel err {worst_v:.1e}, loaded-face area rel err {worst_a:.1e} on 4 families; {checked} monomials, worst {worst_q:.1e}"
        ),
    }
}

fn physical_invariants() -> Outcome {
    let mut rng = StdRng::seed_from_u64(99);
    let mut ok = true;
    let identity = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];

    let mut p_i: f64 = 0.0;
    for m in stress_free_materials() {
        let (_, p, _) = m.kernel().unwrap().eval(&identity).unwrap();
        p_i = p.iter().fold(p_i, |a, v| a.max(v.abs()));
    }
    ok &= p_i <= STRESS_FREE_TOL;

    let mut frame: f64 = 0.0;
    for m in all_materials() {
        let k = m.kernel().unwrap();
        for _ in 0..50 {
            let f = random_deformation(&mut rng, 0.3, FD_DET_RANGE);
            let q = random_rotation(&mut rng);
            let (a, _, _) = k.eval(&f).unwrap();
            let (b, _, _) = k.eval(&matmul3(&q, &f)).unwrap();
            frame = frame.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
    }
    ok &= frame <= FRAME_TOL;

    let mut rigid: f64 = 0.0;
    for family in CellFamily::VOLUME {
        let mesh = generate_box(family, [2, 2, 2], [1.0, 1.0, 1.0]);
        let q = random_rotation(&mut rng);
        let shift: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let u: Vec<f64> = mesh
            .vertices()
            .iter()
            .flat_map(|x| {
                let qx: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| q[3 * i + j] * x[j]).sum());
                [0, 1, 2].map(|i| qx[i] - x[i] + shift[i])
            })
            .collect();
        for m in stress_free_materials() {
            let model = FeModel::new(mesh.clone(), m.kernel().unwrap(), BoundaryConditions::new(), FeOptions::default()).unwrap();
            let f = model.internal_force(&u).unwrap();
            rigid = f.iter().fold(rigid, |a, v| a.max(v.abs()));
        }
    }
    ok &= rigid <= RIGID_TOL;

    let mut asym: f64 = 0.0;
    for family in CellFamily::VOLUME {
        let mesh = generate_box(family, [2, 2, 2], [1.0, 1.0, 1.0]);
        let u: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.gen_range(-0.02..0.02)).collect();
        for m in all_materials() {
            let model = FeModel::new(mesh.clone(), m.kernel().unwrap(), BoundaryConditions::new(), FeOptions::default()).unwrap();
            asym = asym.max(model.tangent(&u).unwrap().asymmetry());
        }
    }
    ok &= asym <= SYMMETRY_TOL;

    Outcome {
        id: "physical-invariants",
        pass: ok,
        detail: format!(
            "max |P(I)| {p_i:.1e}; frame indifference {frame:.1e}; rigid-motion residual {rigid:.1e} N; K asymmetry {asym:.1e}"
        ),
    }
}

fn mooney_rivlin_benchmark(results: &[BeamResult], lnj: &[(CellFamily, Result<BeamResult, String>)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in results.iter().filter(|r| r.material == BeamMaterial::MooneyRivlin) {
        ok &= r.report.converged;
        parts.push(format!("{} {} it, tip {:.4} m", r.family, r.report.iterations, r.tip_deflection));
    }
    ok &= parts.len() == 4;
    let mut lit = Vec::new();
    for (family, r) in lnj {
        match r {
            Ok(r) => lit.push(format!("{} {} it, tip {:.4} m", family.name(), r.report.iterations, r.tip_deflection)),
            Err(e) => {
                ok = false;
                lit.push(format!("{} failed ({e})", family.name()));
            }
        }
    }
    Outcome {
        id: "mooney-rivlin-benchmark",
        pass: ok,
        detail: format!("K/2 (ln J)^2: {}; K/2 ln J: {}", parts.join(", "), lit.join(", ")),
    }
}

fn node_ordering() -> Outcome {
    let mut ok = true;
    let legacy = [4usize, 5, 0, 1, 7, 6, 3, 2];
    let canonical: Vec<usize> = (0..8).collect();
    let as_vtk = unpermute(OrderingScheme::LegacyVtk, CellFamily::Q1Hex, &canonical);
    // canonical vertex i sits at position legacy[i] of the VTK cell
    ok &= (0..8).all(|i| as_vtk[legacy[i]] == i);
    ok &= permute(OrderingScheme::LegacyVtk, CellFamily::Q1Hex, &as_vtk) == canonical;
    for family in CellFamily::VOLUME {
        let nodes: Vec<usize> = (0..family.node_count()).collect();
        for scheme in [OrderingScheme::Gmsh, OrderingScheme::LegacyVtk] {
            ok &= permute(scheme, family, &unpermute(scheme, family, &nodes)) == nodes;
        }
    }

    let mut rng = StdRng::seed_from_u64(5);
    let mut identical = 0;
    for family in CellFamily::VOLUME {
        let mesh = beam(family, [4, 1, 1]);
        let imported = read_msh_str(&write_msh_string(&mesh)).unwrap();
        let u: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let k = |m| {
            let opts = FeOptions {
                parallel: false,
                ..Default::default()
            };
            FeModel::new(m, make_neo_hookean(lame()).kernel().unwrap(), BoundaryConditions::new(), opts)
                .unwrap()
                .tangent(&u)
                .unwrap()
        };
        let (a, b) = (k(mesh), k(imported));
        let same = a.row_ptr() == b.row_ptr()
            && a.col_idx() == b.col_idx()
            && a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits());
        identical += usize::from(same);
        ok &= same;
    }
    Outcome {
        id: "node-ordering",
        pass: ok,
        detail: format!("legacy hex map {legacy:?} round-trips; gmsh-imported stiffness bitwise identical on {identical}/4 families"),
    }
}

fn main() {
    let families = CellFamily::VOLUME;
    let opts = BeamOptions::default();

    let t = Instant::now();
    let mut beams = Vec::new();
    for m in [BeamMaterial::Stvk, BeamMaterial::NeoHookean] {
        for f in families {
            beams.push(run_beam_benchmark(m, f, &opts).expect("beam benchmark"));
        }
    }
    let oracle_secs = t.elapsed().as_secs_f64();
    for f in families {
        beams.push(run_beam_benchmark(BeamMaterial::MooneyRivlin, f, &opts).expect("Mooney-Rivlin benchmark"));
    }
    let lnj: Vec<_> = families
        .iter()
        .map(|&f| {
            let r = run_beam_benchmark(BeamMaterial::MooneyRivlinLnJ, f, &opts).map_err(|e| e.to_string());
            (f, r)
        })
        .collect();

    let outcomes = [
        kernel_derivatives(),
        oracle_equivalence(&beams, oracle_secs),
        mms_convergence(),
        solver_protocol(&beams),
        geometry_quadrature(),
        physical_invariants(),
        mooney_rivlin_benchmark(&beams, &lnj),
        node_ordering(),
    ];

    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == o.id);
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("     known: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => println!("     note: listed as unattainable but passed"),
            (true, None) => {}
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
