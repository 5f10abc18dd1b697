//! Interactive quasi-static sessions: a clamped body, one nodal probe force
//! set by a client, and a warm-started Newton solve per step.
//!
//! [`Connection`] speaks protocol v1 (JSON text frames, see [`protocol`]);
//! [`serve`] runs it over WebSocket with one worker thread per connection.

pub mod protocol;
mod server;

pub use protocol::{ClientMessage, ServerMessage, PROTOCOL_VERSION};
pub use server::{serve, Server};

use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::fem::{BoundaryConditions, FeModel, FeOptions, NewtonConfig};
use crate::materials::MaterialConfig;
use crate::mesh::MeshSource;

/// Scenes above this many DOFs are refused by default.
pub const DEFAULT_DOF_CAP: usize = 1500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiveError {
    #[error("scene has {dofs} DOFs, above the interactive limit of {cap}")]
    TooLarge { dofs: usize, cap: usize },
    #[error("{field}: {message}")]
    Scene { field: String, message: String },
    #[error("vertex {vertex} does not exist (scene has {count})")]
    NoSuchVertex { vertex: usize, count: usize },
    #[error("vertex {0} is clamped")]
    Clamped(usize),
    #[error("no scene loaded")]
    NoScene,
    #[error("{0}")]
    Protocol(String),
}

/// Scene request: mesh, material and the facet tags to clamp.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub mesh: MeshSource,
    pub material: MaterialConfig,
    pub clamp: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub vertex: usize,
    /// Newtons.
    pub force: [f64; 3],
}

/// Result of one [`Session::step`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Deformed positions of the surface vertices, flat.
    pub positions: Vec<f64>,
    /// `-f_int` at the probe vertex, zero without a probe.
    pub reaction: [f64; 3],
    pub iterations: usize,
    pub ms: f64,
    pub converged: bool,
}

pub struct Session {
    model: FeModel,
    u: Vec<f64>,
    probe: Option<Probe>,
    /// Probe load `u` is in equilibrium with.
    applied: Option<Probe>,
    clamped: Vec<bool>,
    surface: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    diverged: bool,
    newton: NewtonConfig,
}

impl Session {
    /// Builds the scene; `base` resolves relative mesh paths.
    pub fn load(spec: &SceneSpec, cap: usize, base: &Path) -> Result<Self, LiveError> {
        let scene = |field: &str, message: String| LiveError::Scene {
            field: field.to_string(),
            message,
        };
        let mesh = spec.mesh.load(base).map_err(|(p, m)| scene(&format!("mesh.{p}"), m))?;
        if mesh.dof_count() > cap {
            return Err(LiveError::TooLarge {
                dofs: mesh.dof_count(),
                cap,
            });
        }
        let model = spec.material.build().map_err(|(p, m)| scene(&format!("material.{p}"), m))?;
        let kernel = model.kernel().map_err(|e| scene("material", e.to_string()))?;
        let mut bc = BoundaryConditions::new();
        for (i, tag) in spec.clamp.iter().enumerate() {
            bc = bc.clamp(&mesh, tag).map_err(|e| scene(&format!("clamp[{i}]"), e.to_string()))?;
        }
        let fe = FeModel::new(mesh, kernel, bc, FeOptions::default()).map_err(|e| scene("clamp", e.to_string()))?;
        let mut clamped = vec![false; fe.mesh().vertex_count()];
        for &(d, _) in fe.constrained() {
            clamped[d / 3] = true;
        }
        let tris = fe.mesh().surface_triangles();
        let mut surface: Vec<usize> = tris.iter().flatten().copied().collect();
        surface.sort_unstable();
        surface.dedup();
        let local = |v: usize| surface.binary_search(&v).expect("surface vertex");
        let triangles = tris.iter().map(|t| t.map(local)).collect();
        Ok(Self {
            u: vec![0.0; fe.dof_count()],
            model: fe,
            probe: None,
            applied: None,
            clamped,
            surface,
            triangles,
            diverged: false,
            newton: NewtonConfig::default(),
        })
    }

    pub fn model(&self) -> &FeModel {
        &self.model
    }

    pub fn displacement(&self) -> &[f64] {
        &self.u
    }

    pub fn probe(&self) -> Option<Probe> {
        self.probe
    }

    /// Set when the last step failed; `u` is then the last converged state.
    pub fn diverged(&self) -> bool {
        self.diverged
    }

    /// Mesh vertex ids of the rendered surface, in the order of positions.
    pub fn surface_vertices(&self) -> &[usize] {
        &self.surface
    }

    /// Surface triangles indexing into [`Self::surface_vertices`].
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_clamped(&self, vertex: usize) -> bool {
        self.clamped.get(vertex).copied().unwrap_or(false)
    }

    pub fn set_newton(&mut self, cfg: NewtonConfig) {
        self.newton = cfg;
    }

    /// Surface vertex closest to `x` in the reference configuration.
    pub fn nearest_surface_vertex(&self, x: [f64; 3]) -> usize {
        let v = self.model.mesh().vertices();
        let d2 = |n: usize| (0..3).map(|k| (v[n][k] - x[k]).powi(2)).sum::<f64>();
        *self
            .surface
            .iter()
            .min_by(|&&a, &&b| d2(a).total_cmp(&d2(b)))
            .expect("non-empty surface")
    }

    pub fn set_probe(&mut self, vertex: usize, force: [f64; 3]) -> Result<(), LiveError> {
        let count = self.model.mesh().vertex_count();
        if vertex >= count {
            return Err(LiveError::NoSuchVertex { vertex, count });
        }
        if self.clamped[vertex] {
            return Err(LiveError::Clamped(vertex));
        }
        self.probe = Some(Probe { vertex, force });
        Ok(())
    }

    pub fn clear_probe(&mut self) {
        self.probe = None;
    }

    /// Back to the rest state without a probe.
    pub fn reset(&mut self) {
        self.u.iter_mut().for_each(|v| *v = 0.0);
        self.probe = None;
        self.applied = None;
        self.diverged = false;
    }

    fn nodal(p: Option<Probe>, n: usize) -> Vec<f64> {
        let mut f = vec![0.0; n];
        if let Some(p) = p {
            f[3 * p.vertex..3 * p.vertex + 3].copy_from_slice(&p.force);
        }
        f
    }

    /// Solves for the current probe force starting from the last converged
    /// state. The previous probe load is held as a preload while the
    /// difference is ramped in, so `u` is an equilibrium at load factor 0.
    pub fn step(&mut self) -> StepOutcome {
        let t = Instant::now();
        let n = self.model.dof_count();
        let old = Self::nodal(self.applied, n);
        let new = Self::nodal(self.probe, n);
        let delta: Vec<(usize, [f64; 3])> = (0..n / 3)
            .filter_map(|v| {
                let d = [0, 1, 2].map(|k| new[3 * v + k] - old[3 * v + k]);
                (d != [0.0; 3]).then_some((v, d))
            })
            .collect();
        self.model.set_preload(old).expect("preload length");
        self.model.set_point_forces(&delta).expect("probe vertex checked");
        let (iterations, converged) = match self.model.solve_path(self.u.clone(), 0.0, 1.0, &self.newton) {
            Ok((u, report)) => {
                self.u = u;
                self.applied = self.probe;
                self.diverged = false;
                (report.iterations, true)
            }
            Err(fail) => {
                self.diverged = true;
                (fail.report.iterations, false)
            }
        };
        let reaction = match self.applied {
            Some(p) => match self.model.internal_force(&self.u) {
                Ok(f) => [0, 1, 2].map(|k| -f[3 * p.vertex + k]),
                Err(_) => [f64::NAN; 3],
            },
            None => [0.0; 3],
        };
        StepOutcome {
            positions: self.positions(),
            reaction,
            iterations,
            ms: t.elapsed().as_secs_f64() * 1e3,
            converged,
        }
    }

    /// Current surface positions, flat.
    pub fn positions(&self) -> Vec<f64> {
        let v = self.model.mesh().vertices();
        self.surface
            .iter()
            .flat_map(|&s| [0, 1, 2].map(|k| v[s][k] + self.u[3 * s + k]))
            .collect()
    }

    pub fn rest_positions(&self) -> Vec<f64> {
        let v = self.model.mesh().vertices();
        self.surface.iter().flat_map(|&s| v[s]).collect()
    }
}

/// One client's protocol state: at most one session, messages handled in
/// arrival order.
pub struct Connection {
    session: Option<Session>,
    cap: usize,
    base: std::path::PathBuf,
}

impl Connection {
    pub fn new(cap: usize) -> Self {
        Self {
            session: None,
            cap,
            base: std::path::PathBuf::from("."),
        }
    }

    /// Directory that relative mesh paths resolve against.
    pub fn with_base(mut self, base: impl Into<std::path::PathBuf>) -> Self {
        self.base = base.into();
        self
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    /// Handles one text frame and returns the reply frame.
    pub fn handle_text(&mut self, text: &str) -> String {
        let reply = match protocol::decode(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => ServerMessage::error(e.to_string()),
        };
        protocol::encode(&reply)
    }

    pub fn handle(&mut self, msg: ClientMessage) -> ServerMessage {
        match self.dispatch(msg) {
            Ok(m) => m,
            Err(e) => ServerMessage::error(e.to_string()),
        }
    }

    fn dispatch(&mut self, msg: ClientMessage) -> Result<ServerMessage, LiveError> {
        match msg {
            ClientMessage::LoadScene { mesh, material, clamp } => {
                let spec = SceneSpec {
                    mesh,
                    material: material.unwrap_or_else(|| MaterialConfig::builtin("neo-hookean")),
                    clamp: clamp.into_vec(),
                };
                // a refused scene leaves the previous one in place
                let s = Session::load(&spec, self.cap, &self.base)?;
                let reply = ServerMessage::scene(&s, &spec);
                self.session = Some(s);
                Ok(reply)
            }
            ClientMessage::SetProbe { vertex, point, force } => {
                let s = self.session.as_mut().ok_or(LiveError::NoScene)?;
                let v = match (vertex, point) {
                    (Some(v), None) => v,
                    (None, Some(x)) => s.nearest_surface_vertex(x),
                    _ => return Err(LiveError::Protocol("set_probe needs exactly one of 'vertex' or 'point'".into())),
                };
                s.set_probe(v, force)?;
                Ok(ServerMessage::Probe { vertex: v, force })
            }
            ClientMessage::Step => {
                let s = self.session.as_mut().ok_or(LiveError::NoScene)?;
                Ok(ServerMessage::state(s.step()))
            }
            ClientMessage::Reset => {
                let s = self.session.as_mut().ok_or(LiveError::NoScene)?;
                s.reset();
                Ok(ServerMessage::state(StepOutcome {
                    positions: s.positions(),
                    reaction: [0.0; 3],
                    iterations: 0,
                    ms: 0.0,
                    converged: true,
                }))
            }
        }
    }
}
