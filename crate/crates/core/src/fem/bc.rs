use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::FemError;
use crate::mesh::Mesh;

/// Body force per unit reference volume (N/m^3).
#[derive(Clone, Default)]
pub enum BodyForce {
    #[default]
    None,
    Uniform([f64; 3]),
    /// Evaluated at reference quadrature points.
    Field(Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>),
}

impl fmt::Debug for BodyForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyForce::None => write!(f, "None"),
            BodyForce::Uniform(b) => write!(f, "Uniform({b:?})"),
            BodyForce::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Prescribed displacement of one DOF, in m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dirichlet {
    pub node: usize,
    pub component: usize,
    pub value: f64,
}

/// Dirichlet data, dead tractions per facet tag (Pa, per unit reference
/// area), body force and nodal point forces (N). Loads and prescribed values
/// are scaled together by the load factor during a Newton solve.
#[derive(Clone, Debug, Default)]
pub struct BoundaryConditions {
    pub dirichlet: Vec<Dirichlet>,
    pub neumann: Vec<(String, [f64; 3])>,
    pub body_force: BodyForce,
    pub nodal: Vec<(usize, [f64; 3])>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fixes all three components of every node on facets tagged `tag`.
    pub fn clamp(mut self, mesh: &Mesh, tag: &str) -> Result<Self, FemError> {
        let nodes = tagged(mesh, tag)?;
        for n in nodes {
            for component in 0..3 {
                self.dirichlet.push(Dirichlet { node: n, component, value: 0.0 });
            }
        }
        Ok(self)
    }

    /// Prescribes `g(X)` at each listed node.
    pub fn prescribe(mut self, mesh: &Mesh, nodes: &[usize], g: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        for &n in nodes {
            // out-of-range nodes are kept so that `check` reports them
            let v = mesh.vertices().get(n).map_or([0.0; 3], |&x| g(x));
            for (component, value) in v.into_iter().enumerate() {
                self.dirichlet.push(Dirichlet { node: n, component, value });
            }
        }
        self
    }

    pub fn traction(mut self, tag: &str, t: [f64; 3]) -> Self {
        self.neumann.push((tag.to_string(), t));
        self
    }

    pub fn body(mut self, b: BodyForce) -> Self {
        self.body_force = b;
        self
    }

    pub fn point_force(mut self, node: usize, f: [f64; 3]) -> Self {
        self.nodal.push((node, f));
        self
    }

    /// Sorted `(dof, value)` pairs after range and duplicate checks.
    pub fn constrained_dofs(&self, mesh: &Mesh) -> Result<Vec<(usize, f64)>, FemError> {
        let mut seen = BTreeMap::new();
        for d in &self.dirichlet {
            if d.node >= mesh.vertex_count() || d.component > 2 {
                return Err(FemError::NoSuchDof {
                    node: d.node,
                    component: d.component,
                    nodes: mesh.vertex_count(),
                });
            }
            if seen.insert(3 * d.node + d.component, d.value).is_some() {
                return Err(FemError::DuplicateDirichlet {
                    node: d.node,
                    component: d.component,
                });
            }
        }
        Ok(seen.into_iter().collect())
    }

    pub(crate) fn check(&self, mesh: &Mesh) -> Result<(), FemError> {
        self.constrained_dofs(mesh)?;
        for (tag, _) in &self.neumann {
            tagged(mesh, tag)?;
        }
        for &(n, _) in &self.nodal {
            if n >= mesh.vertex_count() {
                return Err(FemError::NoSuchDof {
                    node: n,
                    component: 0,
                    nodes: mesh.vertex_count(),
                });
            }
        }
        Ok(())
    }
}

fn tagged(mesh: &Mesh, tag: &str) -> Result<Vec<usize>, FemError> {
    if mesh.tag_id(tag).is_none() {
        return Err(FemError::UnknownTag {
            tag: tag.to_string(),
            known: mesh.tags().keys().cloned().collect(),
        });
    }
    Ok(mesh.tagged_nodes(tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_hex;

    #[test]
    fn clamp_and_duplicates() {
        let m = generate_box_hex([2, 1, 1], [2.0, 1.0, 1.0]);
        let bc = BoundaryConditions::new().clamp(&m, "clamp").unwrap();
        let dofs = bc.constrained_dofs(&m).unwrap();
        assert_eq!(dofs.len(), 12);
        assert!(dofs.iter().all(|&(d, v)| m.vertices()[d / 3][0] == 0.0 && v == 0.0));
        let twice = bc.clamp(&m, "clamp").unwrap();
        assert!(matches!(twice.constrained_dofs(&m), Err(FemError::DuplicateDirichlet { .. })));
    }

    #[test]
    fn bad_references_are_errors() {
        let m = generate_box_hex([1, 1, 1], [1.0, 1.0, 1.0]);
        let err = BoundaryConditions::new().clamp(&m, "top").unwrap_err();
        assert!(err.to_string().contains("top"));
        let bc = BoundaryConditions::new().prescribe(&m, &[99], |_| [0.0; 3]);
        assert!(matches!(bc.check(&m), Err(FemError::NoSuchDof { node: 99, .. })));
    }
}
