//! Finite point groups acting on frameworks.
//!
//! A group is an explicit list of (signature-)orthogonal matrices. A
//! [`TypeMap`] pairs every element with a vertex permutation; a
//! [`SymFramework`] is a framework validated against that action, i.e.
//! `x(p_i) = p_{x(i)}` for every element `x` and vertex `i`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework, MIN_SEPARATION};
use crate::graph::Graph;
use crate::linalg::{canonical_basis, kernel_abs, NumericPolicy, Subspace};
use crate::metric::{ConeKind, Signature};

/// A finite group of `dim x dim` matrices preserving `diag(signature)`.
#[derive(Clone, Debug)]
pub struct PointGroup {
    sig: Signature,
    elements: Vec<DMatrix<f64>>,
    identity_index: usize,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    (a - b).abs().max() <= tol
}

/// Snaps entries within 1e-14 of -1, 0 or 1.
fn tidy(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for x in m.iter_mut() {
        for t in [-1.0, 0.0, 1.0] {
            if (*x - t).abs() < 1e-14 {
                *x = t;
            }
        }
    }
    m
}

impl PointGroup {
    /// Validates closure, identity, inverses and `M^T J M = J`.
    pub fn new(sig: Signature, elements: Vec<DMatrix<f64>>, tol: f64) -> Result<Self> {
        let d = sig.dim();
        if elements.is_empty() {
            return Err(Error::InvalidGroup("a group needs at least one element".into()));
        }
        let j = sig.gram();
        for (k, m) in elements.iter().enumerate() {
            if m.shape() != (d, d) {
                return Err(Error::InvalidGroup(format!(
                    "element {} is {}x{}, expected {d}x{d}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !close(&(m.transpose() * &j * m), &j, tol) {
                return Err(Error::InvalidGroup(format!(
                    "element {} does not preserve the signature {sig} form",
                    k + 1
                )));
            }
        }
        let find = |m: &DMatrix<f64>| elements.iter().position(|e| close(e, m, tol));
        let identity_index = find(&DMatrix::identity(d, d))
            .ok_or_else(|| Error::InvalidGroup("identity is missing".into()))?;
        let mut table = vec![vec![0; elements.len()]; elements.len()];
        for a in 0..elements.len() {
            for b in 0..elements.len() {
                table[a][b] = find(&(&elements[a] * &elements[b])).ok_or_else(|| {
                    Error::InvalidGroup(format!(
                        "product of elements {} and {} is not in the set",
                        a + 1,
                        b + 1
                    ))
                })?;
            }
        }
        let inverse = (0..elements.len())
            .map(|a| {
                (0..elements.len())
                    .find(|&b| table[a][b] == identity_index)
                    .ok_or_else(|| {
                        Error::InvalidGroup(format!("element {} has no inverse", a + 1))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sig,
            elements,
            identity_index,
            table,
            inverse,
        })
    }

    /// Closure of a set of generators.
    pub fn generated_by(sig: Signature, generators: &[DMatrix<f64>], tol: f64) -> Result<Self> {
        let d = sig.dim();
        let mut elements = vec![DMatrix::identity(d, d)];
        let mut frontier = 0;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            for g in generators {
                let next = tidy(g * &current);
                if !elements.iter().any(|e| close(e, &next, tol)) {
                    if elements.len() > 1000 {
                        return Err(Error::InvalidGroup(
                            "generators do not close into a finite group".into(),
                        ));
                    }
                    elements.push(next);
                }
            }
            frontier += 1;
        }
        Self::new(sig, elements, tol)
    }

    pub fn trivial(sig: Signature) -> Self {
        let d = sig.dim();
        Self::new(sig, vec![DMatrix::identity(d, d)], 1e-12).expect("trivial group")
    }

    /// `C_m`: rotations by multiples of `2 pi / m` about the origin (`d = 2`)
    /// or about the last axis (`d = 3`).
    pub fn cyclic(dim: usize, m: usize) -> Result<Self> {
        Self::generated_by(Signature::euclidean(dim), &[rotation(dim, 2.0 * PI / m as f64)?], 1e-9)
    }

    /// `C_s`: the mirror `x_1 -> -x_1`.
    pub fn mirror(dim: usize) -> Result<Self> {
        Self::generated_by(Signature::euclidean(dim), &[first_axis_mirror(dim)?], 1e-9)
    }

    /// `C_mv`: `C_m` together with the mirror `x_1 -> -x_1`.
    pub fn dihedral(dim: usize, m: usize) -> Result<Self> {
        Self::generated_by(
            Signature::euclidean(dim),
            &[rotation(dim, 2.0 * PI / m as f64)?, first_axis_mirror(dim)?],
            1e-9,
        )
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, k: usize) -> &DMatrix<f64> {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn identity_index(&self) -> usize {
        self.identity_index
    }

    pub fn inverse(&self, k: usize) -> usize {
        self.inverse[k]
    }

    /// Index of `elements[a] * elements[b]`.
    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Checks `M^T J M = J` for another signature of the same dimension.
    pub fn preserves(&self, sig: Signature, tol: f64) -> bool {
        sig.dim() == self.dim() && {
            let j = sig.gram();
            self.elements
                .iter()
                .all(|m| close(&(m.transpose() * &j * m), &j, tol))
        }
    }
}

/// Rotation by `theta` in the plane of the first two axes.
pub fn rotation(dim: usize, theta: f64) -> Result<DMatrix<f64>> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "rotation builder supports d = 2, 3 (got {dim})"
        )));
    }
    let mut m = DMatrix::identity(dim, dim);
    let (s, c) = theta.sin_cos();
    m[(0, 0)] = c;
    m[(0, 1)] = -s;
    m[(1, 0)] = s;
    m[(1, 1)] = c;
    Ok(tidy(m))
}

/// Mirror in the hyperplane `x_1 = 0`.
pub fn first_axis_mirror(dim: usize) -> Result<DMatrix<f64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("mirror needs d >= 1".into()));
    }
    let mut m = DMatrix::identity(dim, dim);
    m[(0, 0)] = -1.0;
    Ok(m)
}

/// Cone extension `x* = diag(M_x, 1)` of every element.
pub fn extend_group(g: &PointGroup, kind: ConeKind) -> Result<PointGroup> {
    let sig = kind.extend(g.signature())?;
    let d = g.dim();
    let elements = g
        .elements()
        .iter()
        .map(|m| {
            let mut e = DMatrix::identity(d + 1, d + 1);
            e.view_mut((0, 0), (d, d)).copy_from(m);
            e
        })
        .collect();
    // element order, identity and tables carry over unchanged
    Ok(PointGroup {
        sig,
        elements,
        identity_index: g.identity_index,
        table: g.table.clone(),
        inverse: g.inverse.clone(),
    })
}

/// The action `Phi` of a group on the vertex set: one permutation per element.
#[derive(Clone, Debug)]
pub struct TypeMap {
    group: PointGroup,
    perms: Vec<Vec<usize>>,
}

impl TypeMap {
    pub fn new(group: PointGroup, perms: Vec<Vec<usize>>) -> Result<Self> {
        if perms.len() != group.order() {
            return Err(Error::Homomorphism(format!(
                "{} permutations for a group of order {}",
                perms.len(),
                group.order()
            )));
        }
        let n = perms.first().map_or(0, |p| p.len());
        for (k, p) in perms.iter().enumerate() {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
                return Err(Error::Homomorphism(format!(
                    "permutation of element {} is not a bijection of 1..={n}",
                    k + 1
                )));
            }
        }
        if perms[group.identity_index()].iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::Homomorphism("identity does not act trivially".into()));
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let ab = group.product(a, b);
                if (0..n).any(|i| perms[ab][i] != perms[a][perms[b][i]]) {
                    return Err(Error::Homomorphism(format!(
                        "perm(x{} x{}) differs from perm(x{}) o perm(x{})",
                        a + 1,
                        b + 1,
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(Self { group, perms })
    }

    pub fn identity(sig: Signature, n: usize) -> Self {
        Self {
            group: PointGroup::trivial(sig),
            perms: vec![(0..n).collect()],
        }
    }

    /// Closure of generator pairs `(matrix, permutation)`.
    pub fn generate(sig: Signature, generators: &[(DMatrix<f64>, Vec<usize>)], tol: f64) -> Result<Self> {
        let d = sig.dim();
        let n = generators.first().map_or(0, |g| g.1.len());
        let mut elements = vec![DMatrix::identity(d, d)];
        let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
        let mut frontier = 0;
        while frontier < elements.len() {
            let (m, p) = (elements[frontier].clone(), perms[frontier].clone());
            for (gm, gp) in generators {
                if gp.len() != n {
                    return Err(Error::Homomorphism("generator permutations differ in length".into()));
                }
                let nm = tidy(gm * &m);
                let np: Vec<usize> = p.iter().map(|&i| gp[i]).collect();
                match elements.iter().position(|e| close(e, &nm, tol)) {
                    Some(k) if perms[k] != np => {
                        return Err(Error::Homomorphism(
                            "the same matrix arises with two different permutations".into(),
                        ))
                    }
                    Some(_) => {}
                    None => {
                        if elements.len() > 1000 {
                            return Err(Error::InvalidGroup("generators do not close".into()));
                        }
                        elements.push(nm);
                        perms.push(np);
                    }
                }
            }
            frontier += 1;
        }
        Self::new(PointGroup::new(sig, elements, tol)?, perms)
    }

    /// Reads the permutations off a symmetric configuration.
    pub fn infer(group: PointGroup, config: &Configuration, tol: f64) -> Result<Self> {
        let mut perms = Vec::with_capacity(group.order());
        for (k, m) in group.elements().iter().enumerate() {
            let mut p = Vec::with_capacity(config.len());
            for i in 0..config.len() {
                let image = m * config.point(i);
                let j = (0..config.len())
                    .find(|&j| (&image - config.point(j)).norm() <= tol * config.point(i).norm().max(1.0))
                    .ok_or(Error::SymmetryViolation {
                        element: k + 1,
                        vertex: i + 1,
                        residual: f64::NAN,
                    })?;
                p.push(j);
            }
            perms.push(p);
        }
        Self::new(group, perms)
    }

    pub fn group(&self) -> &PointGroup {
        &self.group
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn perm(&self, k: usize) -> &[usize] {
        &self.perms[k]
    }

    /// `Phi(x_k)(i)`.
    pub fn apply(&self, k: usize, i: usize) -> usize {
        self.perms[k][i]
    }

    pub fn n_vertices(&self) -> usize {
        self.perms.first().map_or(0, |p| p.len())
    }

    /// Elements fixing vertex `i`.
    pub fn stabilizer(&self, i: usize) -> Vec<usize> {
        (0..self.group.order()).filter(|&k| self.perms[k][i] == i).collect()
    }

    /// Same permutations, group replaced by its cone extension `S*`.
    pub fn extended(&self, kind: ConeKind) -> Result<Self> {
        Ok(Self {
            group: extend_group(&self.group, kind)?,
            perms: self.perms.clone(),
        })
    }

    /// Appends a vertex fixed by every element (the cone joint).
    pub fn with_fixed_vertex(&self) -> Self {
        let n = self.n_vertices();
        Self {
            group: self.group.clone(),
            perms: self
                .perms
                .iter()
                .map(|p| p.iter().copied().chain(std::iter::once(n)).collect())
                .collect(),
        }
    }
}

/// A framework validated as being of type `Phi`.
#[derive(Clone, Debug)]
pub struct SymFramework {
    framework: Framework,
    type_map: TypeMap,
}

impl SymFramework {
    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn type_map(&self) -> &TypeMap {
        &self.type_map
    }

    pub fn group(&self) -> &PointGroup {
        self.type_map.group()
    }

    /// Wraps a framework with the trivial group.
    pub fn trivial(framework: Framework) -> Self {
        let type_map = TypeMap::identity(framework.signature(), framework.n_vertices());
        Self {
            framework,
            type_map,
        }
    }
}

/// Checks that every permutation preserves the edge set and that
/// `x(p_i) = p_{x(i)}` holds to `group_tol` (scaled by `max(1, |p_i|)`).
/// Reports the first violating `(element, vertex)` pair.
pub fn validate_symmetric(fw: &Framework, tm: &TypeMap, policy: &NumericPolicy) -> Result<SymFramework> {
    let g = tm.group();
    if g.signature() != fw.signature() {
        return Err(Error::InvalidGroup(format!(
            "group signature {} differs from framework signature {}",
            g.signature(),
            fw.signature()
        )));
    }
    if tm.n_vertices() != fw.n_vertices() {
        return Err(Error::Homomorphism(format!(
            "permutations act on {} vertices, framework has {}",
            tm.n_vertices(),
            fw.n_vertices()
        )));
    }
    let graph = fw.graph();
    for k in 0..g.order() {
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            if !graph.has_edge(tm.apply(k, u), tm.apply(k, v)) {
                return Err(Error::Homomorphism(format!(
                    "element {} maps edge {} = {{{}, {}}} to a non-edge",
                    k + 1,
                    e + 1,
                    u + 1,
                    v + 1
                )));
            }
        }
    }
    for k in 0..g.order() {
        for i in 0..fw.n_vertices() {
            let p = fw.point(i);
            let residual = (g.element(k) * p - fw.point(tm.apply(k, i))).norm();
            if residual > policy.group_tol * p.norm().max(1.0) {
                return Err(Error::SymmetryViolation {
                    element: k + 1,
                    vertex: i + 1,
                    residual,
                });
            }
        }
    }
    Ok(SymFramework {
        framework: fw.clone(),
        type_map: tm.clone(),
    })
}

/// How an edge-orbit representative is written in the orbit matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeOrbitForm {
    /// Endpoints in different vertex orbits: the edge `{i, x(j)}` for orbit
    /// representatives `i != j`.
    Distinct { i: usize, x: usize, j: usize },
    /// Endpoints in the same vertex orbit: the edge `{i, y(i)}`.
    Same { i: usize, y: usize },
}

impl EdgeOrbitForm {
    pub fn is_same_orbit(&self) -> bool {
        matches!(self, EdgeOrbitForm::Same { .. })
    }
}

/// Vertex and edge orbits with minimum-index representatives.
#[derive(Clone, Debug)]
pub struct OrbitData {
    pub vertex_orbits: Vec<Vec<usize>>,
    pub reps: Vec<usize>,
    pub orbit_of_vertex: Vec<usize>,
    pub edge_orbits: Vec<Vec<usize>>,
    pub edge_reps: Vec<usize>,
    pub orbit_of_edge: Vec<usize>,
    pub forms: Vec<EdgeOrbitForm>,
}

impl OrbitData {
    pub fn n_vertex_orbits(&self) -> usize {
        self.reps.len()
    }

    pub fn n_edge_orbits(&self) -> usize {
        self.edge_reps.len()
    }
}

/// Orbits of the permutation action on a graph.
pub fn orbits_of(graph: &Graph, tm: &TypeMap) -> OrbitData {
    let n = graph.n_vertices();
    let order = tm.group().order();
    let mut orbit_of_vertex = vec![usize::MAX; n];
    let mut vertex_orbits = Vec::new();
    let mut reps = Vec::new();
    for v in 0..n {
        if orbit_of_vertex[v] != usize::MAX {
            continue;
        }
        let idx = vertex_orbits.len();
        let mut members: Vec<usize> = (0..order).map(|k| tm.apply(k, v)).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            orbit_of_vertex[m] = idx;
        }
        reps.push(v);
        vertex_orbits.push(members);
    }

    let m = graph.n_edges();
    let mut orbit_of_edge = vec![usize::MAX; m];
    let mut edge_orbits = Vec::new();
    let mut edge_reps = Vec::new();
    let mut forms = Vec::new();
    for e in 0..m {
        if orbit_of_edge[e] != usize::MAX {
            continue;
        }
        let idx = edge_orbits.len();
        let (u, v) = graph.edge(e);
        let mut members: Vec<usize> = (0..order)
            .map(|k| {
                graph
                    .edge_index(tm.apply(k, u), tm.apply(k, v))
                    .expect("type map preserves edges")
            })
            .collect();
        members.sort_unstable();
        members.dedup();
        for &f in &members {
            orbit_of_edge[f] = idx;
        }
        // witness: move u onto its representative, then name the other end
        let i = reps[orbit_of_vertex[u]];
        let g = (0..order).find(|&k| tm.apply(k, u) == i).expect("u lies in the orbit of i");
        let w = tm.apply(g, v);
        let j = reps[orbit_of_vertex[v]];
        let x = (0..order).find(|&k| tm.apply(k, j) == w).expect("w lies in the orbit of j");
        forms.push(if i == j {
            EdgeOrbitForm::Same { i, y: x }
        } else {
            EdgeOrbitForm::Distinct { i, x, j }
        });
        edge_reps.push(e);
        edge_orbits.push(members);
    }

    OrbitData {
        vertex_orbits,
        reps,
        orbit_of_vertex,
        edge_orbits,
        edge_reps,
        orbit_of_edge,
        forms,
    }
}

pub fn compute_orbits(sf: &SymFramework) -> OrbitData {
    orbits_of(sf.framework().graph(), sf.type_map())
}

/// Orthonormal basis of the space fixed by every listed element.
pub fn fixed_subspace_of(group: &PointGroup, elements: &[usize], tol: f64) -> Result<Subspace> {
    let d = group.dim();
    let nontrivial: Vec<usize> = elements
        .iter()
        .copied()
        .filter(|&k| k != group.identity_index())
        .collect();
    if nontrivial.is_empty() {
        return Ok(Subspace::full(d));
    }
    let mut stacked = DMatrix::zeros(d * nontrivial.len(), d);
    for (r, &k) in nontrivial.iter().enumerate() {
        stacked
            .view_mut((r * d, 0), (d, d))
            .copy_from(&(group.element(k) - DMatrix::identity(d, d)));
    }
    let raw = kernel_abs(&stacked, tol)?;
    Ok(Subspace::new(d, canonical_basis(&raw, tol)))
}

/// `U(p_i)`: the subspace fixed by the stabilizer of vertex `i`, in the
/// canonical basis used as `M_i`.
pub fn fixed_subspace(sf: &SymFramework, i: usize, policy: &NumericPolicy) -> Result<Subspace> {
    fixed_subspace_of(sf.group(), &sf.type_map().stabilizer(i), policy.group_tol)
}

/// Draws a random `S`-symmetric configuration: coefficients uniform in
/// `[-1, 1]` inside each `U(p_i)`, propagated by `p_{x(i)} = M_x p_i`.
pub fn sample_symmetric_config<R: Rng + ?Sized>(
    sf: &SymFramework,
    policy: &NumericPolicy,
    rng: &mut R,
) -> Result<Configuration> {
    let orbits = compute_orbits(sf);
    let bases = orbits
        .reps
        .iter()
        .map(|&i| fixed_subspace(sf, i, policy))
        .collect::<Result<Vec<_>>>()?;
    sample_with(sf.type_map(), &orbits, &bases, rng)
}

pub(crate) fn sample_with<R: Rng + ?Sized>(
    tm: &TypeMap,
    orbits: &OrbitData,
    bases: &[Subspace],
    rng: &mut R,
) -> Result<Configuration> {
    let g = tm.group();
    let d = g.dim();
    let n = tm.n_vertices();
    for _ in 0..100 {
        let mut points = vec![DVector::zeros(d); n];
        for (o, &i) in orbits.reps.iter().enumerate() {
            let c = DVector::from_fn(bases[o].dim(), |_, _| rng.random_range(-1.0..=1.0));
            let p = bases[o].basis() * c;
            for k in 0..g.order() {
                points[tm.apply(k, i)] = g.element(k) * &p;
            }
        }
        if let Ok(c) = Configuration::new(d, points) {
            return Ok(c);
        }
    }
    Err(Error::Sampling(format!(
        "no collision-free symmetric configuration (separation {MIN_SEPARATION:e}) after 100 draws"
    )))
}

/// Builds a symmetric framework from orbit representatives and seed edges.
///
/// Each representative generates its orbit of joints (representative first,
/// then new images in element order). A seed `(a, x, b)` generates the edge
/// orbit of `{rep a, x(rep b)}`.
pub fn symmetric_framework(
    group: PointGroup,
    reps: &[DVector<f64>],
    seeds: &[(usize, usize, usize)],
    policy: &NumericPolicy,
) -> Result<SymFramework> {
    let tol = policy.group_tol;
    let mut points: Vec<DVector<f64>> = Vec::new();
    let mut rep_vertex = Vec::with_capacity(reps.len());
    for r in reps {
        rep_vertex.push(points.len());
        for m in group.elements() {
            let q = m * r;
            if !points.iter().any(|p| (p - &q).norm() <= tol * q.norm().max(1.0)) {
                points.push(q);
            }
        }
    }
    let config = Configuration::new(group.dim(), points)?;
    let type_map = TypeMap::infer(group.clone(), &config, tol)?;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &(a, x, b) in seeds {
        if a >= reps.len() || b >= reps.len() || x >= group.order() {
            return Err(Error::InvalidArgument(format!("seed ({a}, {x}, {b}) out of range")));
        }
        let u0 = rep_vertex[a];
        let v0 = type_map.apply(x, rep_vertex[b]);
        if u0 == v0 {
            return Err(Error::InvalidGraph(format!("seed ({a}, {x}, {b}) is a loop")));
        }
        for k in 0..group.order() {
            let (u, v) = (type_map.apply(k, u0), type_map.apply(k, v0));
            let e = if u < v { (u, v) } else { (v, u) };
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    let graph = Graph::new(config.len(), edges)?;
    let fw = Framework::new(graph, config, group.signature())?;
    validate_symmetric(&fw, &type_map, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k22(p4: [f64; 2]) -> Framework {
        let g = Graph::from_one_based(4, &[(1, 2), (1, 4), (3, 4), (2, 3)]).unwrap();
        let c = Configuration::from_rows(&[&[0.0, 2.0], &[1.0, 1.0], &[0.0, -2.0], &p4]).unwrap();
        Framework::euclidean(g, c).unwrap()
    }

    fn c2_type_map() -> TypeMap {
        let minus = -DMatrix::<f64>::identity(2, 2);
        TypeMap::generate(Signature::euclidean(2), &[(minus, vec![2, 3, 0, 1])], 1e-12).unwrap()
    }

    #[test]
    fn k22_with_half_turn_is_valid() {
        let p = NumericPolicy::default();
        let sf = validate_symmetric(&k22([-1.0, -1.0]), &c2_type_map(), &p).unwrap();
        let o = compute_orbits(&sf);
        assert_eq!(o.vertex_orbits, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(o.edge_orbits, vec![vec![0, 2], vec![1, 3]]);
        assert!(o.forms.iter().all(|f| !f.is_same_orbit()));
        assert_eq!(o.forms[1], EdgeOrbitForm::Distinct { i: 0, x: 1, j: 1 });
    }

    #[test]
    fn perturbed_joint_reports_residual() {
        let p = NumericPolicy::default();
        let err = validate_symmetric(&k22([-0.9, -1.0]), &c2_type_map(), &p).unwrap_err();
        match err {
            Error::SymmetryViolation { element, vertex, residual } => {
                assert_eq!((element, vertex), (2, 2));
                assert!((residual - 0.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_group_gives_singleton_orbits() {
        let fw = k22([-1.0, -1.0]);
        let sf = SymFramework::trivial(fw);
        let o = compute_orbits(&sf);
        assert_eq!(o.reps, vec![0, 1, 2, 3]);
        assert_eq!(o.n_edge_orbits(), 4);
        for (e, f) in o.forms.iter().enumerate() {
            let (u, v) = sf.framework().graph().edge(e);
            assert_eq!(*f, EdgeOrbitForm::Distinct { i: u, x: 0, j: v });
        }
    }

    #[test]
    fn homomorphism_failures_are_caught() {
        let g = PointGroup::cyclic(2, 2).unwrap();
        // the half-turn must square to the identity permutation
        let bad = TypeMap::new(g, vec![vec![0, 1, 2], vec![1, 2, 0]]);
        assert!(matches!(bad, Err(Error::Homomorphism(_))));
    }

    #[test]
    fn edge_preservation_is_checked() {
        let fw = k22([-1.0, -1.0]);
        let minus = -DMatrix::<f64>::identity(2, 2);
        let tm = TypeMap::generate(Signature::euclidean(2), &[(minus, vec![1, 0, 2, 3])], 1e-12).unwrap();
        assert!(matches!(
            validate_symmetric(&fw, &tm, &NumericPolicy::default()),
            Err(Error::Homomorphism(_))
        ));
    }

    #[test]
    fn fixed_subspace_examples() {
        let p = NumericPolicy::default();
        let sf = validate_symmetric(&k22([-1.0, -1.0]), &c2_type_map(), &p).unwrap();
        assert_eq!(fixed_subspace(&sf, 0, &p).unwrap().basis(), &DMatrix::identity(2, 2));

        let cs = PointGroup::mirror(2).unwrap();
        let s = fixed_subspace_of(&cs, &[0, 1], 1e-9).unwrap();
        assert_eq!(s.basis(), &DMatrix::from_column_slice(2, 1, &[0.0, 1.0]));

        let c2 = PointGroup::cyclic(2, 2).unwrap();
        assert_eq!(fixed_subspace_of(&c2, &[0, 1], 1e-9).unwrap().dim(), 0);
    }

    #[test]
    fn builders_have_expected_orders() {
        assert_eq!(PointGroup::cyclic(2, 3).unwrap().order(), 3);
        assert_eq!(PointGroup::cyclic(3, 4).unwrap().order(), 4);
        assert_eq!(PointGroup::mirror(3).unwrap().order(), 2);
        assert_eq!(PointGroup::dihedral(2, 3).unwrap().order(), 6);
        assert_eq!(PointGroup::dihedral(3, 2).unwrap().order(), 4);
        assert!(PointGroup::new(Signature::euclidean(2), vec![DMatrix::from_element(2, 2, 1.0)], 1e-9).is_err());
    }

    #[test]
    fn extend_group_borders_with_one() {
        let cs = PointGroup::mirror(2).unwrap();
        let e = extend_group(&cs, ConeKind::Euclidean).unwrap();
        assert_eq!(e.order(), 2);
        assert_eq!(e.signature(), Signature::euclidean(3));
        let m = e.elements().iter().find(|m| m[(0, 0)] < 0.0).unwrap();
        assert_eq!(m, &DMatrix::from_diagonal(&DVector::from_column_slice(&[-1.0, 1.0, 1.0])));

        let c3v = PointGroup::dihedral(2, 3).unwrap();
        let mk = extend_group(&c3v, ConeKind::Minkowski).unwrap();
        assert_eq!(mk.signature(), Signature::new(2, 1).unwrap());
        // re-validating checks closure and M^T J M = J
        assert!(PointGroup::new(mk.signature(), mk.elements().to_vec(), 1e-9).is_ok());
        assert_eq!(mk.order(), c3v.order());
    }

    #[test]
    fn sampled_half_turn_configuration_is_antipodal() {
        let p = NumericPolicy::default();
        let sf = validate_symmetric(&k22([-1.0, -1.0]), &c2_type_map(), &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_symmetric_config(&sf, &p, &mut rng).unwrap();
        assert_eq!(c.point(2), &(-c.point(0)));
        assert_eq!(c.point(3), &(-c.point(1)));
    }

    #[test]
    fn symmetric_framework_builder_makes_c3v_example() {
        let p = NumericPolicy::default();
        let g = PointGroup::dihedral(2, 3).unwrap();
        let reps = [DVector::from_column_slice(&[0.0, 2.0]), DVector::from_column_slice(&[0.0, 1.0])];
        let rot = (0..g.order())
            .find(|&k| (g.element(k)[(0, 0)] + 0.5).abs() < 1e-9 && g.element(k)[(1, 0)] > 0.0)
            .unwrap();
        let sf = symmetric_framework(g, &reps, &[(0, 0, 1), (0, rot, 0), (1, rot, 1)], &p).unwrap();
        assert_eq!(sf.framework().n_vertices(), 6);
        assert_eq!(sf.framework().graph().n_edges(), 9);
        let o = compute_orbits(&sf);
        assert_eq!(o.vertex_orbits.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3]);
        assert_eq!(o.n_edge_orbits(), 3);
        assert_eq!(o.forms.iter().filter(|f| f.is_same_orbit()).count(), 2);
    }

    proptest! {
        #[test]
        fn samples_validate_and_orbits_divide_order(seed in 0u64..100, which in 0usize..4) {
            let p = NumericPolicy::default();
            let g = match which {
                0 => PointGroup::cyclic(2, 2).unwrap(),
                1 => PointGroup::mirror(2).unwrap(),
                2 => PointGroup::cyclic(2, 3).unwrap(),
                _ => PointGroup::dihedral(2, 3).unwrap(),
            };
            let order = g.order();
            let reps = [
                DVector::from_column_slice(&[0.3, 0.7]),
                DVector::from_column_slice(&[0.0, -0.4]),
            ];
            let sf = symmetric_framework(g, &reps, &[(0, 0, 1), (0, 1 % order, 0)], &p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = sample_symmetric_config(&sf, &p, &mut rng).unwrap();
            let fw = sf.framework().with_config(c).unwrap();
            prop_assert!(validate_symmetric(&fw, sf.type_map(), &p).is_ok());
            let o = compute_orbits(&sf);
            for orb in &o.vertex_orbits { prop_assert_eq!(order % orb.len(), 0); }
            for orb in &o.edge_orbits { prop_assert_eq!(order % orb.len(), 0); }
            // homomorphism over all pairs
            let tm = sf.type_map();
            for a in 0..order { for b in 0..order {
                let ab = tm.group().product(a, b);
                for i in 0..tm.n_vertices() {
                    prop_assert_eq!(tm.apply(ab, i), tm.apply(a, tm.apply(b, i)));
                }
            }}
            // fixed subspaces are invariant under their stabilizers
            for &i in &o.reps {
                let u = fixed_subspace(&sf, i, &p).unwrap();
                for k in tm.stabilizer(i) {
                    for c in 0..u.dim() {
                        let v = u.vector(c);
                        prop_assert!((tm.group().element(k) * &v - &v).norm() < 1e-9);
                    }
                }
            }
        }
    }
}
