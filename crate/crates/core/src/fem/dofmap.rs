use crate::mesh::Mesh;

/// Node-major DOF numbering: node `n`, component `k` is DOF `3n + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    nodes_per_cell: usize,
    cells: Vec<usize>,
    gather: Vec<usize>,
    dofs: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let cells: Vec<usize> = mesh.cells().flatten().copied().collect();
        let gather = cells.iter().flat_map(|&n| [3 * n, 3 * n + 1, 3 * n + 2]).collect();
        Self {
            nodes_per_cell: mesh.family().node_count(),
            cells,
            gather,
            dofs: mesh.dof_count(),
        }
    }

    pub fn dof(node: usize, component: usize) -> usize {
        3 * node + component
    }

    pub fn dof_count(&self) -> usize {
        self.dofs
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.nodes_per_cell
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.nodes_per_cell
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.cells[c * self.nodes_per_cell..(c + 1) * self.nodes_per_cell]
    }

    /// Global DOFs of cell `c` in local order `3a + k`.
    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        let n = 3 * self.nodes_per_cell;
        &self.gather[c * n..(c + 1) * n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::CellFamily;
    use crate::mesh::beam;

    #[test]
    fn gather_lists_follow_cells() {
        let m = beam(CellFamily::P2Tet, [2, 1, 1]);
        let d = DofMap::new(&m);
        assert_eq!(d.dof_count(), 3 * m.vertex_count());
        for c in 0..m.cell_count() {
            for (a, &n) in m.cell(c).iter().enumerate() {
                assert_eq!(&d.cell_dofs(c)[3 * a..3 * a + 3], &[3 * n, 3 * n + 1, 3 * n + 2]);
            }
        }
    }
}
