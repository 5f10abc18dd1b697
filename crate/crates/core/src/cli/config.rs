//! `solve` configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fem::{BodyForce, BoundaryConditions, FeModel, FeOptions, NewtonConfig};
use crate::materials::MaterialConfig;
use crate::mesh::{Mesh, MeshSource};

/// ```json
/// {
///   "mesh": {"beam": {"family": "q1", "counts": [12, 2, 2]}},
///   "material": {"builtin": "neo-hookean", "params": {"E": 3000, "nu": 0.3}},
///   "boundary": {
///     "clamp": ["clamp"],
///     "traction": [{"tag": "load", "value": [0, -10, 0]}]
///   },
///   "solver": {"max_iter": 25, "rtol": 1e-10, "load_steps": 1},
///   "output": "beam.vtu"
/// }
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub mesh: MeshSource,
    pub material: MaterialConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub solver: NewtonConfig,
    /// Family default when absent.
    #[serde(default)]
    pub quadrature_degree: Option<u32>,
    #[serde(default = "yes")]
    pub parallel: bool,
    /// `.vtu` file for the displacement field; relative to the config file.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    /// Facet tags whose nodes are fixed.
    #[serde(default)]
    pub clamp: Vec<String>,
    /// Prescribed displacement (m) of every node on a tag.
    #[serde(default)]
    pub displacement: Vec<TaggedVector>,
    /// Dead traction (Pa, per reference area) on a tag.
    #[serde(default)]
    pub traction: Vec<TaggedVector>,
    /// Uniform body force, N/m^3.
    #[serde(default)]
    pub body_force: Option<[f64; 3]>,
    #[serde(default)]
    pub point_forces: Vec<PointForce>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggedVector {
    pub tag: String,
    pub value: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointForce {
    pub node: usize,
    /// Newtons.
    pub force: [f64; 3],
}

/// An invalid field, located by its JSON path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl SolveConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner().to_string())
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check_solver(&self) -> Result<(), ConfigError> {
        let s = &self.solver;
        if s.max_iter == 0 {
            return Err(ConfigError::new("solver.max_iter", "must be at least 1"));
        }
        if s.load_steps == 0 {
            return Err(ConfigError::new("solver.load_steps", "must be at least 1"));
        }
        for (name, v) in [("rtol", s.rtol), ("atol", s.atol), ("dtol", s.dtol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::new(format!("solver.{name}"), "must be a finite non-negative number"));
            }
        }
        if let Some(d) = self.quadrature_degree {
            if !(1..=4).contains(&d) {
                return Err(ConfigError::new("quadrature_degree", format!("{d} is not supported (1 to 4)")));
            }
        }
        Ok(())
    }

    fn boundary(&self, mesh: &Mesh) -> Result<BoundaryConditions, ConfigError> {
        let b = &self.boundary;
        let known = |tag: &str, path: String| {
            if mesh.tag_id(tag).is_some() {
                Ok(())
            } else {
                let names: Vec<&str> = mesh.tags().keys().map(String::as_str).collect();
                Err(ConfigError::new(path, format!("unknown tag '{tag}' (mesh has: {})", names.join(", "))))
            }
        };
        let mut bc = BoundaryConditions::new();
        for (i, tag) in b.clamp.iter().enumerate() {
            known(tag, format!("boundary.clamp[{i}]"))?;
            bc = bc.prescribe(mesh, &mesh.tagged_nodes(tag), |_| [0.0; 3]);
        }
        for (i, d) in b.displacement.iter().enumerate() {
            known(&d.tag, format!("boundary.displacement[{i}].tag"))?;
            let value = d.value;
            bc = bc.prescribe(mesh, &mesh.tagged_nodes(&d.tag), move |_| value);
        }
        for (i, t) in b.traction.iter().enumerate() {
            known(&t.tag, format!("boundary.traction[{i}].tag"))?;
            bc = bc.traction(&t.tag, t.value);
        }
        if let Some(f) = b.body_force {
            bc = bc.body(BodyForce::Uniform(f));
        }
        for (i, p) in b.point_forces.iter().enumerate() {
            if p.node >= mesh.vertex_count() {
                return Err(ConfigError::new(
                    format!("boundary.point_forces[{i}].node"),
                    format!("node {} does not exist (mesh has {})", p.node, mesh.vertex_count()),
                ));
            }
            bc = bc.point_force(p.node, p.force);
        }
        // overlapping tags would fix a node twice
        if let Err(e) = bc.constrained_dofs(mesh) {
            return Err(ConfigError::new("boundary", e.to_string()));
        }
        Ok(bc)
    }

    /// Builds the model; `base` resolves relative paths.
    pub fn build(&self, base: &Path) -> Result<FeModel, ConfigError> {
        self.check_solver()?;
        let mesh = self
            .mesh
            .load(base)
            .map_err(|(p, m)| ConfigError::new(format!("mesh.{p}"), m))?;
        let model = self
            .material
            .build()
            .map_err(|(p, m)| ConfigError::new(format!("material.{p}"), m))?;
        let kernel = model.kernel().map_err(|e| ConfigError::new("material", e.to_string()))?;
        let bc = self.boundary(&mesh)?;
        let opts = FeOptions {
            degree: self.quadrature_degree,
            parallel: self.parallel,
        };
        FeModel::new(mesh, kernel, bc, opts).map_err(|e| ConfigError::new("", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "mesh": {"beam": {"family": "q1", "counts": [6, 1, 1]}},
        "material": {"builtin": "stvk"},
        "boundary": {"clamp": ["clamp"], "traction": [{"tag": "load", "value": [0, -10, 0]}]}
    }"#;

    fn err(json: &str) -> ConfigError {
        SolveConfig::from_json(json)
            .and_then(|c| c.build(Path::new(".")).map(|_| ()))
            .unwrap_err()
    }

    #[test]
    fn good_config_builds() {
        let m = SolveConfig::from_json(GOOD).unwrap().build(Path::new(".")).unwrap();
        assert_eq!(m.dof_count(), 3 * 7 * 2 * 2);
        assert_eq!(m.constrained().len(), 12);
    }

    #[test]
    fn errors_carry_json_paths() {
        let e = err(&GOOD.replace("[0, -10, 0]", "[0, -10]"));
        assert_eq!(e.path, "boundary.traction[0].value");
        let e = err(&GOOD.replace(r#""load""#, r#""lod""#));
        assert_eq!(e.path, "boundary.traction[0].tag");
        assert!(e.message.contains("lod"));
        let e = err(&GOOD.replace(r#"{"builtin": "stvk"}"#, r#"{"builtin": "stvk", "params": {"E": 1, "nu": 0.7}}"#));
        assert_eq!(e.path, "material.params.nu");
        let e = err(&GOOD.replace(r#""family": "q1""#, r#""family": "hex27""#));
        assert_eq!(e.path, "mesh.beam.family");
        let e = err(&GOOD.replace(r#""boundary""#, r#""solver": {"max_iters": 3}, "boundary""#));
        assert_eq!(e.path, "solver.max_iters");
        let e = err(&GOOD.replace(r#""boundary""#, r#""quadrature_degree": 7, "boundary""#));
        assert_eq!(e.path, "quadrature_degree");
        let e = err(&GOOD.replace(r#"["clamp"]"#, r#"["clamp", "clamp"]"#));
        assert_eq!(e.path, "boundary");
    }
}
