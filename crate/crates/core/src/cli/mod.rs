//! Command-line front end of the `hyperfem` binary.
//!
//! Exit codes: 0 on success, 1 when a solve fails, 2 for usage and
//! configuration errors.

mod config;

pub use config::{BoundaryConfig, ConfigError, PointForce, SolveConfig, TaggedVector};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::elements::CellFamily;
use crate::fem::NewtonConfig;
use crate::live::{Server, DEFAULT_DOF_CAP};
use crate::materials::MaterialConfig;
use crate::mesh::{read_mesh_file, write_vtu};
use crate::verify::{run_beam_benchmark, run_mms_convergence, BeamMaterial, BeamOptions, ConvergenceTable, MmsCase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Refinement ladders used by `mms --levels`.
pub const P1_LADDER: [usize; 6] = [4, 8, 12, 16, 20, 24];
pub const P2_LADDER: [usize; 6] = [2, 3, 4, 6, 8, 10];

#[derive(Debug, Parser)]
#[command(name = "hyperfem", version, about = "Hyperelastic finite elements from symbolic strain energies")]
pub struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manufactured-solution convergence study on the unit cube.
    Mms {
        #[arg(long, default_value = "p1", value_parser = parse_family)]
        element: CellFamily,
        /// Number of refinements taken from the default ladder.
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Explicit cells per side, overriding --levels (e.g. 4,8,12).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Built-in material name.
        #[arg(long, default_value = "stvk")]
        material: String,
    },
    /// Cantilever beam benchmark, 80 x 15 x 15 m.
    Beam {
        #[arg(long, default_value = "stvk")]
        material: BeamMaterial,
        #[arg(long, default_value = "p1", value_parser = parse_family)]
        element: CellFamily,
        /// Traction in y on the free end, Pa.
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        load: f64,
        /// Cells along x, y, z.
        #[arg(long, value_delimiter = ',', default_value = "12,2,2")]
        counts: Vec<usize>,
        /// Timed repetitions; the median iteration time is reported.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Write the displacement field to this .vtu file.
        #[arg(long)]
        vtu: Option<PathBuf>,
    },
    /// Solve a problem described by a JSON config file.
    Solve { config: PathBuf },
    /// Summarize a .msh or .vtu mesh.
    MeshInfo { file: PathBuf },
    /// Serve interactive sessions over WebSocket.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Largest scene accepted, in DOFs.
        #[arg(long, default_value_t = DEFAULT_DOF_CAP)]
        dof_cap: usize,
    },
}

fn parse_family(s: &str) -> Result<CellFamily, String> {
    CellFamily::from_name(s)
        .filter(|f| f.is_volume())
        .ok_or_else(|| format!("unknown element '{s}' (expected p1, p2, q1 or q2)"))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let json = cli.json;
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure { code, message, detail }) => {
            if json {
                let mut v = json!({ "error": message, "exit_code": code });
                if let Some(d) = detail {
                    v["report"] = d;
                }
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"));
            }
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
    detail: Option<serde_json::Value>,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
        detail: None,
    }
}

fn solver(message: impl ToString, detail: Option<serde_json::Value>) -> Failure {
    Failure {
        code: EXIT_SOLVER,
        message: message.to_string(),
        detail,
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, json: bool, value: &T, table: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) {
    let _ = if json {
        writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json"))
    } else {
        table(out)
    };
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let json = cli.json;
    match cli.command {
        Command::Mms {
            element,
            levels,
            sizes,
            material,
        } => {
            let ladder = if element.is_quadratic() { P2_LADDER } else { P1_LADDER };
            let sizes = match sizes {
                Some(s) => s,
                None if levels <= ladder.len() => ladder[..levels].to_vec(),
                None => return Err(usage(format!("--levels {levels} exceeds the ladder of {}; use --sizes", ladder.len()))),
            };
            if sizes.len() < 3 {
                return Err(usage("a convergence study needs at least 3 refinements"));
            }
            if sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] == 0 {
                return Err(usage("--sizes must be positive and strictly increasing"));
            }
            let model = MaterialConfig::builtin(&material)
                .build()
                .map_err(|(_, m)| usage(format!("--material: {m}")))?;
            let case = Arc::new(MmsCase::standard(&model).map_err(usage)?);
            let table = run_mms_convergence(&case, element, &sizes, &NewtonConfig::default()).map_err(|(e, partial)| {
                solver(e, Some(serde_json::to_value(&partial).expect("json")))
            })?;
            emit(out, json, &table, |o| write_table(o, &table));
            Ok(EXIT_OK)
        }
        Command::Beam {
            material,
            element,
            load,
            counts,
            repeats,
            vtu,
        } => {
            let counts: [usize; 3] = counts
                .try_into()
                .map_err(|_| usage("--counts takes three values, e.g. 12,2,2"))?;
            if counts.contains(&0) {
                return Err(usage("--counts must be positive"));
            }
            let opts = BeamOptions {
                counts,
                load,
                repeats: repeats.max(1),
                ..Default::default()
            };
            let r = run_beam_benchmark(material, element, &opts).map_err(|e| solver(e, None))?;
            if let Some(path) = vtu {
                let mesh = crate::mesh::beam(element, counts);
                write_vtu(&path, &mesh, &[("displacement", &r.u)]).map_err(|e| usage(e))?;
            }
            emit(out, json, &r, |o| {
                writeln!(o, "{:<22} {:<4} {:>6} {:>6} {:>14} {:>12} {:>12}", "material", "elem", "DOFs", "iters", "mean NR [ms]", "cross-check", "tip u_y [m]")?;
                let cc = r.cross_check.map_or("-".to_string(), |c| format!("{c:.3e}"));
                writeln!(
                    o,
                    "{:<22} {:<4} {:>6} {:>6} {:>14.3} {:>12} {:>12.5}",
                    r.material.name(),
                    element.name().to_uppercase(),
                    r.dofs,
                    r.report.iterations,
                    r.median_iteration_ms,
                    cc,
                    r.tip_deflection
                )
            });
            Ok(EXIT_OK)
        }
        Command::Solve { config } => solve(&config, json, out),
        Command::MeshInfo { file } => {
            let mesh = read_mesh_file(&file).map_err(usage)?;
            let info = mesh.info().map_err(usage)?;
            emit(out, json, &info, |o| {
                writeln!(o, "family    {}", info.family.to_uppercase())?;
                writeln!(o, "vertices  {}", info.vertices)?;
                writeln!(o, "cells     {}", info.cells)?;
                writeln!(o, "DOFs      {}", info.dofs)?;
                writeln!(o, "boundary  {} facets", info.boundary_facets)?;
                writeln!(o, "volume    {}", info.volume)?;
                writeln!(o, "bbox      {:?} .. {:?}", info.bbox_min, info.bbox_max)?;
                for (tag, n) in &info.tags {
                    writeln!(o, "tag       {tag}: {n} facets")?;
                }
                Ok(())
            });
            Ok(EXIT_OK)
        }
        Command::Serve { port, host, dof_cap } => {
            let server = Server::bind((host.as_str(), port), dof_cap).map_err(|e| usage(format!("{host}:{port}: {e}")))?;
            let addr = server.local_addr().map_err(usage)?;
            let _ = writeln!(out, "listening on ws://{addr} (protocol v1, DOF cap {dof_cap})");
            let _ = out.flush();
            server.run().map_err(|e| solver(e, None))?;
            Ok(EXIT_OK)
        }
    }
}

fn write_table(o: &mut dyn Write, t: &ConvergenceTable) -> std::io::Result<()> {
    writeln!(o, "{} / {}", t.family.to_uppercase(), t.material)?;
    writeln!(o, "{:>4} {:>10} {:>8} {:>12} {:>7} {:>6}", "n", "h", "DOFs", "rel. L2", "order", "iters")?;
    for r in &t.rows {
        let order = r.order.map_or("-".to_string(), |p| format!("{p:.3}"));
        writeln!(o, "{:>4} {:>10.5} {:>8} {:>12.4e} {:>7} {:>6}", r.n, r.h, r.dofs, r.error, order, r.iterations)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary {
    dofs: usize,
    converged: bool,
    iterations: usize,
    bisections: u32,
    mean_iteration_ms: f64,
    residual_norms: Vec<f64>,
    max_displacement: f64,
    output: Option<PathBuf>,
}

fn solve(path: &Path, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = SolveConfig::from_file(path).map_err(usage)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let model = cfg.build(base).map_err(usage)?;
    let (u, report) = model
        .solve(&cfg.solver)
        .map_err(|f| solver(&f, Some(serde_json::to_value(&f.report).expect("json"))))?;
    let output = cfg.output.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base.join(p) });
    if let Some(p) = &output {
        write_vtu(p, model.mesh(), &[("displacement", &u)]).map_err(|e| usage(format!("output: {e}")))?;
    }
    let max_displacement = u
        .chunks(3)
        .map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt())
        .fold(0.0, f64::max);
    let s = SolveSummary {
        dofs: model.dof_count(),
        converged: report.converged,
        iterations: report.iterations,
        bisections: report.bisections,
        mean_iteration_ms: report.mean_iteration_ms,
        residual_norms: report.residual_norms.clone(),
        max_displacement,
        output,
    };
    emit(out, json, &s, |o| {
        writeln!(o, "DOFs {}  iterations {}  bisections {}  mean NR {:.3} ms", s.dofs, s.iterations, s.bisections, s.mean_iteration_ms)?;
        writeln!(o, "max |u| = {:.6e} m", s.max_displacement)?;
        if let Some(p) = &s.output {
            writeln!(o, "wrote {}", p.display())?;
        }
        Ok(())
    });
    Ok(EXIT_OK)
}
