//! Protocol v1: JSON text frames carrying `"v": 1` and a `"type"` tag.
//!
//! Client to server:
//!
//! ```json
//! {"v":1, "type":"load_scene", "mesh":"liver", "material":{"builtin":"ho"}, "clamp":"clamp"}
//! {"v":1, "type":"set_probe", "vertex":12, "force":[0,-0.1,0]}
//! {"v":1, "type":"set_probe", "point":[0.1,0.02,0.05], "force":[0,0,0.05]}
//! {"v":1, "type":"step"}
//! {"v":1, "type":"reset"}
//! ```
//!
//! Server to client: `scene`, `probe` (acknowledgement with the picked
//! vertex), `state` and `error`. Positions are flat `[x0,y0,z0,x1,...]` arrays
//! over the surface vertices, in metres.

use serde::{Deserialize, Serialize};

use super::{Session, SceneSpec, StepOutcome};
use crate::materials::MaterialConfig;
use crate::mesh::MeshSource;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tags {
    One(String),
    Many(Vec<String>),
}

impl Default for Tags {
    fn default() -> Self {
        Tags::One("clamp".into())
    }
}

impl Tags {
    pub fn into_vec(self) -> Vec<String> {
        match self {
            Tags::One(t) => vec![t],
            Tags::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    LoadScene {
        mesh: MeshSource,
        /// Neo-Hookean with E = 3 kPa, nu = 0.3 when absent.
        #[serde(default)]
        material: Option<MaterialConfig>,
        #[serde(default)]
        clamp: Tags,
    },
    SetProbe {
        #[serde(default)]
        vertex: Option<usize>,
        #[serde(default)]
        point: Option<[f64; 3]>,
        force: [f64; 3],
    },
    Step,
    Reset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Scene {
        material: String,
        vertices: usize,
        cells: usize,
        dofs: usize,
        /// Mesh vertex id of each surface vertex.
        surface_vertices: Vec<usize>,
        /// Rest positions of the surface vertices, flat.
        positions: Vec<f64>,
        /// Flat triangle corners indexing the surface vertices.
        triangles: Vec<usize>,
        /// Surface vertex indices that are clamped.
        clamped: Vec<usize>,
    },
    Probe {
        vertex: usize,
        force: [f64; 3],
    },
    State {
        positions: Vec<f64>,
        reaction: [f64; 3],
        iters: usize,
        ms: f64,
        converged: bool,
    },
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error {
            message: message.into(),
        }
    }

    pub(crate) fn scene(s: &Session, spec: &SceneSpec) -> Self {
        let m = s.model().mesh();
        ServerMessage::Scene {
            material: spec
                .material
                .name
                .clone()
                .or_else(|| spec.material.builtin.clone())
                .unwrap_or_else(|| "expression".into()),
            vertices: m.vertex_count(),
            cells: m.cell_count(),
            dofs: m.dof_count(),
            surface_vertices: s.surface_vertices().to_vec(),
            positions: s.rest_positions(),
            triangles: s.triangles().iter().flatten().copied().collect(),
            clamped: s
                .surface_vertices()
                .iter()
                .enumerate()
                .filter(|&(_, &v)| s.is_clamped(v))
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub(crate) fn state(o: StepOutcome) -> Self {
        ServerMessage::State {
            positions: o.positions,
            reaction: o.reaction,
            iters: o.iterations,
            ms: o.ms,
            converged: o.converged,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    v: u32,
    #[serde(flatten)]
    msg: T,
}

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("malformed message: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported protocol version {0} (expected {PROTOCOL_VERSION})")]
    Version(u64),
    #[error("missing protocol version field 'v'")]
    MissingVersion,
}

pub fn decode(text: &str) -> Result<ClientMessage, DecodeError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("v").map(|v| v.as_u64()) {
        None => return Err(DecodeError::MissingVersion),
        Some(Some(v)) if v == PROTOCOL_VERSION as u64 => {}
        Some(v) => return Err(DecodeError::Version(v.unwrap_or(0))),
    }
    let env: Envelope<ClientMessage> = serde_json::from_value(value)?;
    Ok(env.msg)
}

pub fn encode(msg: &ServerMessage) -> String {
    serde_json::to_string(&Envelope {
        v: PROTOCOL_VERSION,
        msg,
    })
    .expect("server messages serialize")
}

/// Client-side encoding, used by tests and examples.
pub fn encode_client(msg: &ClientMessage) -> String {
    serde_json::to_string(&Envelope {
        v: PROTOCOL_VERSION,
        msg,
    })
    .expect("client messages serialize")
}

/// Client-side decoding of a server frame.
pub fn decode_server(text: &str) -> Result<ServerMessage, DecodeError> {
    let env: Envelope<ServerMessage> = serde_json::from_str(text)?;
    if env.v != PROTOCOL_VERSION {
        return Err(DecodeError::Version(env.v as u64));
    }
    Ok(env.msg)
}
