use std::collections::HashMap;

use rayon::prelude::*;

use super::{BodyForce, BoundaryConditions, Constitutive, DofMap, FemError, Pattern, SparseMatrixCSR};
use crate::elements::{default_degree, geometric_map, quadrature, surface_map, ReferenceElement};
use crate::materials::{MaterialKernel, FULL_LEN, STRESS_LEN};
use crate::mesh::Mesh;

/// Cells per assembly block; each block is evaluated (possibly in parallel)
/// and then scattered serially in cell order, so results do not depend on
/// the thread count.
const BLOCK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeOptions {
    /// Volume quadrature degree; `None` picks the family default.
    pub degree: Option<u32>,
    pub parallel: bool,
}

impl Default for FeOptions {
    fn default() -> Self {
        Self {
            degree: None,
            parallel: true,
        }
    }
}

/// A discretized boundary-value problem: mesh, constitutive kernel, loads and
/// the reference geometry cached at every quadrature point.
pub struct FeModel<K: Constitutive = MaterialKernel> {
    mesh: Mesh,
    dofs: DofMap,
    kernel: K,
    bc: BoundaryConditions,
    constrained: Vec<(usize, f64)>,
    pattern: Pattern,
    degree: u32,
    nq: usize,
    /// Reference gradients `dN_a/dX`, indexed `(cell * nq + q) * nn + a`.
    grads: Vec<[f64; 3]>,
    /// Quadrature weight times `det J`, indexed `cell * nq + q`.
    wdet: Vec<f64>,
    dead: Vec<f64>,
    nodal: Vec<f64>,
    preload: Vec<f64>,
    parallel: bool,
}

impl<K: Constitutive> FeModel<K> {
    pub fn new(mesh: Mesh, kernel: K, bc: BoundaryConditions, opts: FeOptions) -> Result<Self, FemError> {
        bc.check(&mesh)?;
        let constrained = bc.constrained_dofs(&mesh)?;
        let family = mesh.family();
        let degree = opts.degree.unwrap_or_else(|| default_degree(family));
        let rule = quadrature(family, degree)?;
        let el = ReferenceElement::new(family);
        let tab = el.tabulate(&rule);
        let nq = rule.len();
        let nn = family.node_count();
        let dofs = DofMap::new(&mesh);
        let n = dofs.dof_count();

        let ff = family.facet_family().expect("volume family");
        let frule = quadrature(ff, degree)?;
        let fel = ReferenceElement::new(ff);
        let ftab = fel.tabulate(&frule);
        let tractions: HashMap<u32, [f64; 3]> = bc.neumann.iter().fold(HashMap::new(), |mut m, (tag, t)| {
            let e = m.entry(mesh.tag_id(tag).expect("checked")).or_insert([0.0; 3]);
            for d in 0..3 {
                e[d] += t[d];
            }
            m
        });
        let mut facets_of: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, f) in mesh.facets().iter().enumerate() {
            if tractions.contains_key(&f.tag) {
                facets_of.entry(f.cell).or_default().push(i);
            }
        }

        let mut grads = Vec::with_capacity(mesh.cell_count() * nq * nn);
        let mut wdet = Vec::with_capacity(mesh.cell_count() * nq);
        let mut dead = vec![0.0; n];
        for c in 0..mesh.cell_count() {
            let x = mesh.cell_coords(c);
            let g = dofs.cell_dofs(c);
            for q in 0..nq {
                let m = geometric_map(&x, &tab.gradients[q]).map_err(|e| e.for_element(c))?;
                let wd = rule.weights[q] * m.det;
                grads.extend_from_slice(&m.grad_x);
                wdet.push(wd);
                let b = match &bc.body_force {
                    BodyForce::None => continue,
                    BodyForce::Uniform(b) => *b,
                    BodyForce::Field(f) => {
                        let mut p = [0.0; 3];
                        for (na, xa) in tab.values[q].iter().zip(&x) {
                            for d in 0..3 {
                                p[d] += na * xa[d];
                            }
                        }
                        f(p)
                    }
                };
                for (a, na) in tab.values[q].iter().enumerate() {
                    for d in 0..3 {
                        dead[g[3 * a + d]] += na * b[d] * wd;
                    }
                }
            }
            for &fi in facets_of.get(&c).map(Vec::as_slice).unwrap_or(&[]) {
                let facet = &mesh.facets()[fi];
                let t = tractions[&facet.tag];
                let xf: Vec<[f64; 3]> = facet.nodes.iter().map(|&v| mesh.vertices()[v]).collect();
                let local = family.facet_nodes(facet.local);
                for q in 0..frule.len() {
                    let (scale, _) = surface_map(&xf, &ftab.gradients[q]);
                    let wa = frule.weights[q] * scale;
                    for (k, nk) in ftab.values[q].iter().enumerate() {
                        let a = local[k];
                        for d in 0..3 {
                            dead[g[3 * a + d]] += nk * t[d] * wa;
                        }
                    }
                }
            }
        }
        let mut nodal = vec![0.0; n];
        for &(v, f) in &bc.nodal {
            for d in 0..3 {
                nodal[3 * v + d] += f[d];
            }
        }
        let pattern = Pattern::new(&dofs);
        Ok(Self {
            mesh,
            dofs,
            kernel,
            bc,
            constrained,
            pattern,
            degree,
            nq,
            grads,
            wdet,
            dead,
            nodal,
            preload: vec![0.0; n],
            parallel: opts.parallel,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    pub fn bc(&self) -> &BoundaryConditions {
        &self.bc
    }

    pub fn dof_count(&self) -> usize {
        self.dofs.dof_count()
    }

    pub fn quadrature_degree(&self) -> u32 {
        self.degree
    }

    pub fn set_parallel(&mut self, on: bool) {
        self.parallel = on;
    }

    /// Sorted `(dof, value)` Dirichlet data at full load.
    pub fn constrained(&self) -> &[(usize, f64)] {
        &self.constrained
    }

    /// Dirichlet data scaled by the load factor.
    pub fn dirichlet_at(&self, lambda: f64) -> Vec<(usize, f64)> {
        self.constrained.iter().map(|&(d, v)| (d, lambda * v)).collect()
    }

    /// External force at full load: body force, tractions and point forces.
    pub fn external_force(&self) -> Vec<f64> {
        self.dead.iter().zip(&self.nodal).map(|(a, b)| a + b).collect()
    }

    /// Replaces the point forces (N) without rebuilding the model.
    pub fn set_point_forces(&mut self, forces: &[(usize, [f64; 3])]) -> Result<(), FemError> {
        let mut nodal = vec![0.0; self.dof_count()];
        for &(v, f) in forces {
            if v >= self.mesh.vertex_count() {
                return Err(FemError::NoSuchDof {
                    node: v,
                    component: 0,
                    nodes: self.mesh.vertex_count(),
                });
            }
            for d in 0..3 {
                nodal[3 * v + d] += f[d];
            }
        }
        self.nodal = nodal;
        self.bc.nodal = forces.to_vec();
        Ok(())
    }

    /// A load that is applied in full regardless of the load factor.
    pub fn set_preload(&mut self, preload: Vec<f64>) -> Result<(), FemError> {
        self.check_len(&preload)?;
        self.preload = preload;
        Ok(())
    }

    pub fn preload(&self) -> &[f64] {
        &self.preload
    }

    /// External force at load factor `lambda`.
    pub fn external_at(&self, lambda: f64) -> Vec<f64> {
        (0..self.dof_count())
            .map(|i| self.preload[i] + lambda * (self.dead[i] + self.nodal[i]))
            .collect()
    }

    fn check_len(&self, u: &[f64]) -> Result<(), FemError> {
        if u.len() != self.dof_count() {
            return Err(FemError::Length {
                expected: self.dof_count(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Runs `f` on every cell with a `len`-sized output buffer, then hands the
    /// buffers to `scatter` in cell order.
    fn for_cells<F, S>(&self, len: usize, f: F, mut scatter: S) -> Result<(), FemError>
    where
        F: Fn(usize, &mut K::Scratch, &mut [f64]) -> Result<(), FemError> + Sync,
        S: FnMut(usize, &[f64]),
    {
        let nc = self.mesh.cell_count();
        let mut buf = vec![0.0; BLOCK.min(nc) * len];
        let mut scratch = if self.parallel { None } else { Some(self.kernel.scratch()) };
        for start in (0..nc).step_by(BLOCK) {
            let end = (start + BLOCK).min(nc);
            let chunk = &mut buf[..(end - start) * len];
            chunk.fill(0.0);
            let status: Vec<Result<(), FemError>> = match scratch.as_mut() {
                Some(s) => chunk.chunks_mut(len).enumerate().map(|(k, out)| f(start + k, s, out)).collect(),
                None => chunk
                    .par_chunks_mut(len)
                    .enumerate()
                    .map_init(|| self.kernel.scratch(), |s, (k, out)| f(start + k, s, out))
                    .collect(),
            };
            status.into_iter().collect::<Result<(), FemError>>()?;
            for (k, out) in chunk.chunks(len).enumerate() {
                scatter(start + k, out);
            }
        }
        Ok(())
    }

    /// Deformation gradient `F = I + sum_a u_a (x) dN_a/dX` at one point.
    fn deformation(&self, u: &[f64], c: usize, q: usize) -> Result<([f64; 9], &[[f64; 3]]), FemError> {
        let nn = self.dofs.nodes_per_cell();
        let g = &self.grads[(c * self.nq + q) * nn..(c * self.nq + q + 1) * nn];
        let mut f = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        for (a, &node) in self.dofs.cell_nodes(c).iter().enumerate() {
            let ua = &u[3 * node..3 * node + 3];
            for i in 0..3 {
                for j in 0..3 {
                    f[3 * i + j] += ua[i] * g[a][j];
                }
            }
        }
        let det = f[0] * (f[4] * f[8] - f[5] * f[7]) - f[1] * (f[3] * f[8] - f[5] * f[6])
            + f[2] * (f[3] * f[7] - f[4] * f[6]);
        if !(det > 0.0) {
            return Err(FemError::Inverted { element: c, det });
        }
        Ok((f, g))
    }

    /// Element internal force `r_ai = int P_iJ dN_a/dX_J dV` into `out`.
    fn cell_force(&self, u: &[f64], c: usize, s: &mut K::Scratch, out: &mut [f64]) -> Result<(), FemError> {
        let mut ps = [0.0; STRESS_LEN];
        for q in 0..self.nq {
            let (f, g) = self.deformation(u, c, q)?;
            self.kernel
                .stress(&f, s, &mut ps)
                .map_err(|source| FemError::Kernel { element: c, source })?;
            let wd = self.wdet[c * self.nq + q];
            let p = &ps[1..];
            for (a, ga) in g.iter().enumerate() {
                for i in 0..3 {
                    out[3 * a + i] += wd * (p[3 * i] * ga[0] + p[3 * i + 1] * ga[1] + p[3 * i + 2] * ga[2]);
                }
            }
        }
        Ok(())
    }

    /// Element force and stiffness: `out = [r (nd) | k (nd x nd)]`.
    fn cell_tangent(&self, u: &[f64], c: usize, s: &mut K::Scratch, out: &mut [f64]) -> Result<(), FemError> {
        let nd = 3 * self.dofs.nodes_per_cell();
        let mut full = [0.0; FULL_LEN];
        let (r, k) = out.split_at_mut(nd);
        for q in 0..self.nq {
            let (f, g) = self.deformation(u, c, q)?;
            self.kernel
                .tangent(&f, s, &mut full)
                .map_err(|source| FemError::Kernel { element: c, source })?;
            let wd = self.wdet[c * self.nq + q];
            let p = &full[1..10];
            let a4 = &full[10..];
            for (a, ga) in g.iter().enumerate() {
                for i in 0..3 {
                    r[3 * a + i] += wd * (p[3 * i] * ga[0] + p[3 * i + 1] * ga[1] + p[3 * i + 2] * ga[2]);
                }
                // t[i][k][l] = wd * sum_J ga_J A[(3i+J),(3k+l)]
                let mut t = [0.0; 27];
                for i in 0..3 {
                    for kk in 0..3 {
                        for l in 0..3 {
                            let col = 3 * kk + l;
                            t[9 * i + col] = wd
                                * (ga[0] * a4[(3 * i) * 9 + col]
                                    + ga[1] * a4[(3 * i + 1) * 9 + col]
                                    + ga[2] * a4[(3 * i + 2) * 9 + col]);
                        }
                    }
                }
                for (b, gb) in g.iter().enumerate() {
                    for i in 0..3 {
                        let row = (3 * a + i) * nd + 3 * b;
                        for kk in 0..3 {
                            let tk = &t[9 * i + 3 * kk..9 * i + 3 * kk + 3];
                            k[row + kk] += tk[0] * gb[0] + tk[1] * gb[1] + tk[2] * gb[2];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Internal nodal forces `int P : grad N dV`.
    pub fn internal_force(&self, u: &[f64]) -> Result<Vec<f64>, FemError> {
        self.check_len(u)?;
        let nd = 3 * self.dofs.nodes_per_cell();
        let mut r = vec![0.0; self.dof_count()];
        self.for_cells(
            nd,
            |c, s, out| self.cell_force(u, c, s, out),
            |c, out| {
                for (&g, v) in self.dofs.cell_dofs(c).iter().zip(out) {
                    r[g] += v;
                }
            },
        )?;
        Ok(r)
    }

    /// `R(u) = f_int(u) - f_ext(lambda)` over all DOFs, constrained ones included.
    pub fn residual(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>, FemError> {
        let mut r = self.internal_force(u)?;
        for (ri, fi) in r.iter_mut().zip(self.external_at(lambda)) {
            *ri -= fi;
        }
        Ok(r)
    }

    /// Tangent stiffness `dR/du`.
    pub fn tangent(&self, u: &[f64]) -> Result<SparseMatrixCSR, FemError> {
        Ok(self.residual_and_tangent(u, 0.0)?.1)
    }

    /// Residual and tangent from a single pass over the cells.
    pub fn residual_and_tangent(&self, u: &[f64], lambda: f64) -> Result<(Vec<f64>, SparseMatrixCSR), FemError> {
        self.check_len(u)?;
        let nd = 3 * self.dofs.nodes_per_cell();
        let mut r = vec![0.0; self.dof_count()];
        let mut k = self.pattern.matrix().clone();
        let vals = k.values_mut();
        self.for_cells(
            nd + nd * nd,
            |c, s, out| self.cell_tangent(u, c, s, out),
            |c, out| {
                for (&g, v) in self.dofs.cell_dofs(c).iter().zip(&out[..nd]) {
                    r[g] += v;
                }
                for (&p, v) in self.pattern.positions(c).iter().zip(&out[nd..]) {
                    vals[p] += v;
                }
            },
        )?;
        for (ri, fi) in r.iter_mut().zip(self.external_at(lambda)) {
            *ri -= fi;
        }
        Ok((r, k))
    }

    /// Stored strain energy `int psi dV`.
    pub fn strain_energy(&self, u: &[f64]) -> Result<f64, FemError> {
        self.check_len(u)?;
        let mut e = 0.0;
        self.for_cells(
            1,
            |c, s, out| {
                let mut ps = [0.0; STRESS_LEN];
                for q in 0..self.nq {
                    let (f, _) = self.deformation(u, c, q)?;
                    self.kernel
                        .stress(&f, s, &mut ps)
                        .map_err(|source| FemError::Kernel { element: c, source })?;
                    out[0] += ps[0] * self.wdet[c * self.nq + q];
                }
                Ok(())
            },
            |_, out| e += out[0],
        )?;
        Ok(e)
    }

    /// Total potential energy `Pi = int psi dV - f_ext(lambda) . u` (dead loads).
    pub fn energy(&self, u: &[f64], lambda: f64) -> Result<f64, FemError> {
        let w = self.strain_energy(u)?;
        Ok(w - self.external_at(lambda).iter().zip(u).map(|(f, x)| f * x).sum::<f64>())
    }
}
