//! Geodesic grids on compact two-dimensional models with semi-Lagrangian
//! stencils: for each node and each stencil direction `±d`, the foot point
//! `exp_x(±h d)` is located on the mesh and expressed as a convex
//! combination of at most three node values.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::linalg;
use crate::manifold::{ManifoldModel, Point};
use crate::scalar::Real;

/// Convex interpolation weights for one foot point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interp<T> {
    pub nodes: [usize; 3],
    pub weights: [T; 3],
}

impl<T: Real> Interp<T> {
    fn exact(i: usize) -> Self {
        Self { nodes: [i, i, i], weights: [T::one(), T::zero(), T::zero()] }
    }

    #[inline]
    pub fn apply(&self, values: &[T]) -> T {
        self.weights[0] * values[self.nodes[0]]
            + self.weights[1] * values[self.nodes[1]]
            + self.weights[2] * values[self.nodes[2]]
    }
}

/// Stencil geometry in node-frame coordinates, shared by all nodes.
///
/// Directions are `e₁`, `e₂` and the two diagonals; the stencil of a node
/// lists foot points in the order `+e₁, −e₁, +e₂, −e₂, +d₊, −d₊, +d₋, −d₋`
/// where `d± = (a, ±b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilShape<T> {
    /// Step lengths along `e₁` and `e₂`.
    pub steps: [T; 2],
    /// Frame components `(a, b)` of the diagonal displacement.
    pub diagonal: [T; 2],
}

impl<T: Real> StencilShape<T> {
    /// Displacements (frame coefficients) in stencil order.
    pub fn displacements(&self) -> Vec<[T; 2]> {
        let [h1, h2] = self.steps;
        let [a, b] = self.diagonal;
        let z = T::zero();
        vec![[h1, z], [-h1, z], [z, h2], [z, -h2], [a, b], [-a, -b], [a, -b], [-a, b]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridKind {
    Icosphere { resolution: usize, triangles: Vec<[usize; 3]> },
    Lattice { resolution: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub model: ManifoldModel<T>,
    pub nodes: Vec<Point<T>>,
    /// Canonical frame (two ambient vectors) at every node.
    pub frames: Vec<[Vec<T>; 2]>,
    pub shape: StencilShape<T>,
    /// Foot points per node, in [`StencilShape`] order.
    pub stencils: Vec<Vec<Interp<T>>>,
    /// Mean distance between mesh neighbours.
    pub mesh_size: T,
    /// Largest distance between mesh neighbours.
    pub max_edge: T,
    pub kind: GridKind,
}

/// Number of stencil foot points per node.
pub const STENCIL_POINTS: usize = 8;

/// Default ratio `h / sqrt(r · mean_edge)` on the sphere. Balances the
/// `O(h²)` truncation error against the `O(edge²/h²)` interpolation error.
pub const SPHERE_STEP_FACTOR: f64 = 0.9;

/// Builds a grid: an icosphere with `10·4^resolution + 2` nodes on
/// `Sphere(2, r)`, or a `resolution × resolution` lattice on `FlatTorus(2)`.
pub fn build_grid<T: Real>(m: &ManifoldModel<T>, resolution: usize) -> Result<Grid<T>> {
    match m {
        ManifoldModel::Sphere { dim: 2, radius } => icosphere(m, *radius, resolution, T::lit(SPHERE_STEP_FACTOR)),
        ManifoldModel::FlatTorus { periods } if periods.len() == 2 => lattice(m, periods, resolution),
        _ => Err(Error::Unsupported(format!(
            "grids exist for Sphere(2, r) and two-dimensional flat tori, not {}",
            m.name()
        ))),
    }
}

/// Like [`build_grid`] with an explicit sphere step factor.
pub fn build_sphere_grid<T: Real>(m: &ManifoldModel<T>, resolution: usize, step_factor: T) -> Result<Grid<T>> {
    match m {
        ManifoldModel::Sphere { dim: 2, radius } => icosphere(m, *radius, resolution, step_factor),
        _ => Err(arg("build_sphere_grid needs Sphere(2, r)")),
    }
}

fn lattice<T: Real>(m: &ManifoldModel<T>, periods: &[T], res: usize) -> Result<Grid<T>> {
    if res < 3 {
        return Err(arg("torus lattice needs resolution ≥ 3"));
    }
    let d1 = periods[0] / T::from_usize_lossy(res);
    let d2 = periods[1] / T::from_usize_lossy(res);
    if d1.max(d2) >= periods[0].min(periods[1]) / T::lit(8.0) {
        return Err(arg("torus lattice too coarse: the step must stay below a quarter of the injectivity radius"));
    }
    let idx = |i: usize, j: usize| (i % res) * res + (j % res);
    let mut nodes = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            nodes.push(Point::new(vec![d1 * T::from_usize_lossy(i), d2 * T::from_usize_lossy(j)]));
        }
    }
    let frames = vec![[vec![T::one(), T::zero()], vec![T::zero(), T::one()]]; res * res];
    let mut stencils = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            let (ip, im, jp, jm) = (i + 1, i + res - 1, j + 1, j + res - 1);
            stencils.push(
                [
                    idx(ip, j),
                    idx(im, j),
                    idx(i, jp),
                    idx(i, jm),
                    idx(ip, jp),
                    idx(im, jm),
                    idx(ip, jm),
                    idx(im, jp),
                ]
                .into_iter()
                .map(Interp::exact)
                .collect(),
            );
        }
    }
    let shape = StencilShape { steps: [d1, d2], diagonal: [d1, d2] };
    Ok(Grid {
        model: m.clone(),
        nodes,
        frames,
        shape,
        stencils,
        mesh_size: (d1 + d2) / T::lit(2.0),
        max_edge: d1.max(d2),
        kind: GridKind::Lattice { resolution: res },
    })
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let v = vec![
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let v = v
        .into_iter()
        .map(|a: [f64; 3]| {
            let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            [a[0] / n, a[1] / n, a[2] / n]
        })
        .collect();
    (v, f)
}

fn subdivide(verts: &mut Vec<[f64; 3]>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&i) = cache.get(&key) {
            return i;
        }
        let (p, q) = (verts[a], verts[b]);
        let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
        let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
        verts.push([m[0] / n, m[1] / n, m[2] / n]);
        cache.insert(key, verts.len() - 1);
        verts.len() - 1
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = mid(a, b, verts);
        let bc = mid(b, c, verts);
        let ca = mid(c, a, verts);
        out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Triangle mesh on the unit sphere with adjacency for point location.
struct SphereMesh {
    verts: Vec<[f64; 3]>,
    tris: Vec<[usize; 3]>,
    /// `neighbors[t][k]` is the triangle across the edge opposite vertex `k`.
    neighbors: Vec<[usize; 3]>,
    /// One incident triangle per vertex.
    vertex_tri: Vec<usize>,
    /// Inverse of the matrix with the triangle's vertices as columns.
    inverses: Vec<[[f64; 3]; 3]>,
}

impl SphereMesh {
    fn new(verts: Vec<[f64; 3]>, tris: Vec<[usize; 3]>) -> Self {
        let mut edge: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                edge.entry((a.min(b), a.max(b))).or_default().push((t, k));
            }
        }
        let mut neighbors = vec![[usize::MAX; 3]; tris.len()];
        for list in edge.values() {
            if let [(t0, k0), (t1, k1)] = list[..] {
                neighbors[t0][k0] = t1;
                neighbors[t1][k1] = t0;
            }
        }
        let mut vertex_tri = vec![usize::MAX; verts.len()];
        for (t, tri) in tris.iter().enumerate() {
            for &v in tri {
                if vertex_tri[v] == usize::MAX {
                    vertex_tri[v] = t;
                }
            }
        }
        let inverses = tris
            .iter()
            .map(|tri| {
                let (a, b, c) = (verts[tri[0]], verts[tri[1]], verts[tri[2]]);
                // rows of the inverse are (b×c, c×a, a×b) / det
                let bc = cross(&b, &c);
                let det = dot3(&a, &bc);
                let r0 = bc;
                let r1 = cross(&c, &a);
                let r2 = cross(&a, &b);
                let s = 1.0 / det;
                [
                    [r0[0] * s, r0[1] * s, r0[2] * s],
                    [r1[0] * s, r1[1] * s, r1[2] * s],
                    [r2[0] * s, r2[1] * s, r2[2] * s],
                ]
            })
            .collect();
        Self { verts, tris, neighbors, vertex_tri, inverses }
    }

    fn coords(&self, t: usize, p: &[f64; 3]) -> [f64; 3] {
        let m = &self.inverses[t];
        [dot3(&m[0], p), dot3(&m[1], p), dot3(&m[2], p)]
    }

    /// Gnomonic barycentric coordinates of `p` (unit vector) in its triangle.
    fn locate(&self, start: usize, p: &[f64; 3]) -> (usize, [f64; 3]) {
        let mut t = start;
        for _ in 0..4 * self.tris.len().min(4096) {
            let c = self.coords(t, p);
            let (k, worst) = c
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
            if worst >= -1e-12 {
                return (t, c);
            }
            let next = self.neighbors[t][k];
            if next == usize::MAX {
                break;
            }
            t = next;
        }
        // fallback: exhaustive search for the triangle with the best coordinates
        let mut best = (0, [f64::NEG_INFINITY; 3], f64::NEG_INFINITY);
        for t in 0..self.tris.len() {
            let c = self.coords(t, p);
            let sum: f64 = c.iter().sum();
            let worst = c.iter().cloned().fold(f64::INFINITY, f64::min);
            if sum > 0.0 && worst > best.2 {
                best = (t, c, worst);
            }
        }
        (best.0, best.1)
    }
}

fn icosphere<T: Real>(m: &ManifoldModel<T>, radius: T, res: usize, factor: T) -> Result<Grid<T>> {
    if res > 7 {
        return Err(arg("icosphere resolution above 7 is not supported"));
    }
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..res {
        faces = subdivide(&mut verts, &faces);
    }
    let r = radius.to_f64_lossy();
    let mut edge_sum = 0.0;
    let mut edge_max: f64 = 0.0;
    let mut edge_count = 0usize;
    for f in &faces {
        for k in 0..3 {
            let (a, b) = (verts[f[k]], verts[f[(k + 1) % 3]]);
            let d = r * dot3(&a, &b).clamp(-1.0, 1.0).acos();
            edge_sum += d;
            edge_max = edge_max.max(d);
            edge_count += 1;
        }
    }
    let mean_edge = edge_sum / edge_count as f64;
    let inj = std::f64::consts::PI * r;
    let h = (factor.to_f64_lossy() * (mean_edge * r).sqrt()).min(0.999 * inj / 4.0);
    let mesh = SphereMesh::new(verts, faces);
    let model = m.clone();
    let nodes: Vec<Point<T>> =
        mesh.verts.iter().map(|v| Point::new(v.iter().map(|&c| T::lit(c * r)).collect())).collect();
    let frames: Vec<[Vec<T>; 2]> = nodes
        .iter()
        .map(|p| {
            let f = model.frame_raw(&p.coords);
            [f[0].clone(), f[1].clone()]
        })
        .collect();
    let s = T::lit(h / 2f64.sqrt());
    let shape = StencilShape { steps: [T::lit(h), T::lit(h)], diagonal: [s, s] };
    let disp = shape.displacements();
    let stencils: Vec<Vec<Interp<T>>> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let x = &nodes[i].coords;
            let [e1, e2] = &frames[i];
            disp.iter()
                .map(|d| {
                    let v: Vec<T> = e1.iter().zip(e2).map(|(&a, &b)| d[0] * a + d[1] * b).collect();
                    let y = model.exp_raw(x, &v);
                    let yn = linalg::norm(&y);
                    let p = [
                        (y[0] / yn).to_f64_lossy(),
                        (y[1] / yn).to_f64_lossy(),
                        (y[2] / yn).to_f64_lossy(),
                    ];
                    let (t, c) = mesh.locate(mesh.vertex_tri[i], &p);
                    let c = [c[0].max(0.0), c[1].max(0.0), c[2].max(0.0)];
                    let sum = c[0] + c[1] + c[2];
                    Interp {
                        nodes: mesh.tris[t],
                        weights: [T::lit(c[0] / sum), T::lit(c[1] / sum), T::lit(c[2] / sum)],
                    }
                })
                .collect()
        })
        .collect();
    Ok(Grid {
        model,
        nodes,
        frames,
        shape,
        stencils,
        mesh_size: T::lit(mean_edge),
        max_edge: T::lit(edge_max),
        kind: GridKind::Icosphere { resolution: res, triangles: mesh.tris },
    })
}

impl<T: Real> Grid<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The stencil step `h` (largest axis step).
    pub fn spacing(&self) -> T {
        self.shape.steps[0].max(self.shape.steps[1])
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(&Point<T>) -> T + Sync) -> GridFunction<T> {
        GridFunction { values: self.nodes.par_iter().map(&f).collect() }
    }

    pub fn constant(&self, c: T) -> GridFunction<T> {
        GridFunction { values: vec![c; self.len()] }
    }

    /// Mask of nodes strictly inside the geodesic ball `B(center, radius)`.
    pub fn ball_mask(&self, center: &Point<T>, radius: T) -> Vec<bool> {
        self.nodes.iter().map(|p| self.model.dist_raw(&center.coords, &p.coords) < radius).collect()
    }

    /// Distinct mesh-neighbour pairs `(i, j)`, `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = match &self.kind {
            GridKind::Icosphere { triangles, .. } => triangles
                .iter()
                .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
                .collect(),
            GridKind::Lattice { .. } => self
                .stencils
                .iter()
                .enumerate()
                .flat_map(|(i, s)| s[..4].iter().map(move |p| (i.min(p.nodes[0]), i.max(p.nodes[0]))))
                .collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Values of a scalar function at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction<T> {
    pub values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max(&self) -> T {
        self.values.iter().cloned().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().cloned().fold(T::infinity(), T::min)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { values: linalg::sub(&self.values, &other.values) }
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// Table of pairwise geodesic distances between grid nodes.
pub struct PairDistances<T> {
    n: usize,
    table: Vec<T>,
}

impl<T: Real> PairDistances<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let n = grid.len();
        let table: Vec<T> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let xi = &grid.nodes[i].coords;
                (0..n).map(move |j| grid.model.dist_raw(xi, &grid.nodes[j].coords))
            })
            .collect();
        Self { n, table }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.table[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.table[i * self.n..(i + 1) * self.n]
    }

    /// `sup |f(i) − f(j)|` over node pairs with `d(i, j) ≤ h`.
    pub fn modulus(&self, f: &GridFunction<T>, h: T) -> T {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                let row = self.row(i);
                let fi = f.values[i];
                row.iter()
                    .zip(&f.values)
                    .filter(|(&d, _)| d <= h)
                    .fold(T::zero(), |m, (_, &fj)| m.max((fi - fj).abs()))
            })
            .reduce(T::zero, T::max)
    }
}
