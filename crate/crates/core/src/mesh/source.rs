use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{beam, generate_box, liver_placeholder, read_msh, read_vtu, Mesh, MeshError};
use crate::elements::CellFamily;

/// Where a mesh comes from, as written in JSON configs:
///
/// ```json
/// {"beam": {"family": "q2", "counts": [12, 2, 2]}}
/// {"box": {"family": "p1", "counts": [4, 4, 4], "dims": [1, 1, 1]}}
/// "liver"
/// {"file": "meshes/part.msh"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshSource {
    Beam {
        family: CellFamily,
        #[serde(default = "beam_counts")]
        counts: [usize; 3],
    },
    Box {
        family: CellFamily,
        counts: [usize; 3],
        dims: [f64; 3],
    },
    Liver,
    /// gmsh `.msh` (v2.2 or v4.1 ASCII) or `.vtu`; relative paths resolve
    /// against the config file's directory.
    File(PathBuf),
}

fn beam_counts() -> [usize; 3] {
    [12, 2, 2]
}

impl MeshSource {
    /// Builds or reads the mesh. Errors come with the offending field.
    pub fn load(&self, base: &Path) -> Result<Mesh, (String, String)> {
        let volume = |f: CellFamily| {
            if f.is_volume() {
                Ok(())
            } else {
                Err(("family".to_string(), format!("{f} is not a volume family (use p1, p2, q1 or q2)")))
            }
        };
        let positive = |c: &[usize; 3]| {
            if c.iter().all(|&n| n > 0) {
                Ok(())
            } else {
                Err(("counts".to_string(), "cell counts must be positive".to_string()))
            }
        };
        match self {
            MeshSource::Beam { family, counts } => {
                volume(*family).and(positive(counts)).map_err(|(p, m)| (format!("beam.{p}"), m))?;
                Ok(beam(*family, *counts))
            }
            MeshSource::Box { family, counts, dims } => {
                volume(*family).and(positive(counts)).map_err(|(p, m)| (format!("box.{p}"), m))?;
                if !dims.iter().all(|&d| d > 0.0 && d.is_finite()) {
                    return Err(("box.dims".into(), "dimensions must be positive".into()));
                }
                Ok(generate_box(*family, *counts, *dims))
            }
            MeshSource::Liver => Ok(liver_placeholder()),
            MeshSource::File(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                read_mesh_file(&path).map_err(|e| ("file".to_string(), e.to_string()))
            }
        }
    }
}

/// Reads `.msh` or `.vtu` by extension.
pub fn read_mesh_file(path: &Path) -> Result<Mesh, MeshError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("vtu") => read_vtu(path),
        _ => read_msh(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        let s: MeshSource = serde_json::from_str(r#"{"beam": {"family": "p2"}}"#).unwrap();
        assert_eq!(s.load(Path::new(".")).unwrap().dof_count(), 1875);
        let s: MeshSource = serde_json::from_str(r#""liver""#).unwrap();
        assert_eq!(s.load(Path::new(".")).unwrap().dof_count(), 543);
        let s: MeshSource = serde_json::from_str(r#"{"box": {"family": "tri3", "counts": [1,1,1], "dims": [1,1,1]}}"#).unwrap();
        assert_eq!(s.load(Path::new(".")).unwrap_err().0, "box.family");
        let s: MeshSource = serde_json::from_str(r#"{"file": "nope.msh"}"#).unwrap();
        assert_eq!(s.load(Path::new("/tmp")).unwrap_err().0, "file");
    }
}
