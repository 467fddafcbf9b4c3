//! Structured triangulations of the unit square with tagged boundary.
//!
//! The mesh family is deliberately narrow: uniform n-by-n subdivisions of
//! Ω = (0,1)², every cell split along the bottom-left to top-right diagonal,
//! refined by factor-2 midpoint subdivision so that meshes at consecutive
//! levels are exactly nested. The contact boundary is the bottom side y = 0,
//! which keeps the contact trace a straight, uniformly spaced segment.
//!
//! Node coordinates of the generated family are i/n with n a power of two in
//! all study configurations, so nesting holds bit-exactly and inter-mesh
//! transfer needs no geometric tolerance beyond roundoff.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Classification of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Displacement prescribed (clamped or given data).
    Dirichlet,
    /// Traction prescribed (possibly zero).
    Neumann,
    /// Candidate contact zone against the rigid foundation.
    Contact,
}

impl BoundaryTag {
    fn name(self) -> &'static str {
        match self {
            BoundaryTag::Dirichlet => "Dirichlet",
            BoundaryTag::Neumann => "Neumann",
            BoundaryTag::Contact => "Contact",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "Dirichlet" => Ok(BoundaryTag::Dirichlet),
            "Neumann" => Ok(BoundaryTag::Neumann),
            "Contact" => Ok(BoundaryTag::Contact),
            other => Err(Error::Parse(format!("unknown boundary tag `{other}`"))),
        }
    }
}

/// Tag assignment for one side of the square.
///
/// `Split` divides the side at a coordinate along its running direction
/// (x for bottom/top, y for left/right); edges are classified by midpoint.
#[derive(Debug, Clone, Copy)]
pub enum SideTag {
    Uniform(BoundaryTag),
    Split {
        at: f64,
        below: BoundaryTag,
        above: BoundaryTag,
    },
}

impl SideTag {
    fn tag_at(&self, coord: f64) -> BoundaryTag {
        match *self {
            SideTag::Uniform(t) => t,
            SideTag::Split { at, below, above } => {
                if coord < at {
                    below
                } else {
                    above
                }
            }
        }
    }

    fn mentions_contact(&self) -> bool {
        match *self {
            SideTag::Uniform(t) => t == BoundaryTag::Contact,
            SideTag::Split { below, above, .. } => {
                below == BoundaryTag::Contact || above == BoundaryTag::Contact
            }
        }
    }
}

/// Tags for the four sides of the unit square.
#[derive(Debug, Clone, Copy)]
pub struct SideTagging {
    pub bottom: SideTag,
    pub right: SideTag,
    pub top: SideTag,
    pub left: SideTag,
}

impl SideTagging {
    /// Bottom contact, given tags elsewhere.
    pub fn contact_bottom(left: BoundaryTag, top: BoundaryTag, right: BoundaryTag) -> Self {
        SideTagging {
            bottom: SideTag::Uniform(BoundaryTag::Contact),
            right: SideTag::Uniform(right),
            top: SideTag::Uniform(top),
            left: SideTag::Uniform(left),
        }
    }

    /// All four sides share one tag.
    pub fn all(tag: BoundaryTag) -> Self {
        SideTagging {
            bottom: SideTag::Uniform(tag),
            right: SideTag::Uniform(tag),
            top: SideTag::Uniform(tag),
            left: SideTag::Uniform(tag),
        }
    }
}

/// A tagged boundary edge. Node order follows the counterclockwise
/// traversal of ∂Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation of the unit square.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    /// Refinement depth: 0 for a generated mesh, parent depth + 1 after
    /// uniform refinement.
    level: u32,
    /// Subdivisions per side of the underlying structured grid.
    n: usize,
    /// Measured maximum triangle diameter (√2/n for this family).
    h: f64,
}

impl Mesh {
    /// Builds the structured n-by-n triangulation of the unit square.
    ///
    /// Produces (n+1)² nodes and 2n² triangles; every cell is split along
    /// its bottom-left to top-right diagonal. Contact tags are only
    /// accepted on the bottom side, where the trace is a straight segment.
    pub fn generate_structured_square(n: usize, tagging: SideTagging) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "subdivision count n must be at least 1".into(),
            ));
        }
        if tagging.left.mentions_contact()
            || tagging.right.mentions_contact()
            || tagging.top.mentions_contact()
        {
            return Err(Error::InvalidArgument(
                "contact edges must lie on the bottom side y = 0".into(),
            ));
        }

        let np = n + 1;
        let mut nodes = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                nodes.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let idx = |i: usize, j: usize| j * np + i;

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let a = idx(i, j);
                let b = idx(i + 1, j);
                let c = idx(i + 1, j + 1);
                let d = idx(i, j + 1);
                // Diagonal a-c, both triangles counterclockwise.
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }

        let mut boundary_edges = Vec::with_capacity(4 * n);
        let mid = |i: usize| (i as f64 + 0.5) / n as f64;
        for i in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [idx(i, 0), idx(i + 1, 0)],
                tag: tagging.bottom.tag_at(mid(i)),
            });
        }
        for j in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [idx(n, j), idx(n, j + 1)],
                tag: tagging.right.tag_at(mid(j)),
            });
        }
        for i in (0..n).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [idx(i + 1, n), idx(i, n)],
                tag: tagging.top.tag_at(mid(i)),
            });
        }
        for j in (0..n).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [idx(0, j + 1), idx(0, j)],
                tag: tagging.left.tag_at(mid(j)),
            });
        }

        let mut mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            level: 0,
            n,
            h: 0.0,
        };
        mesh.h = mesh.measure_h();
        Ok(mesh)
    }

    /// Splits every triangle into four by edge midpoints.
    ///
    /// Because every diagonal runs the same way, the midpoint refinement of
    /// the structured grid is another structured grid; the child is built
    /// in canonical grid order so that cell-arithmetic point location keeps
    /// working at every level. Grid coordinates i/(2n) round to the same
    /// floats as the parent's i/n, so parent node coordinates reappear in
    /// the child exactly. Boundary tags are inherited by the half-edges.
    pub fn refine_uniform(&self) -> Mesh {
        let n2 = self.n * 2;
        let np = n2 + 1;
        let mut nodes = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                nodes.push([i as f64 / n2 as f64, j as f64 / n2 as f64]);
            }
        }
        let idx = |i: usize, j: usize| j * np + i;
        let mut triangles = Vec::with_capacity(2 * n2 * n2);
        for j in 0..n2 {
            for i in 0..n2 {
                let a = idx(i, j);
                let b = idx(i + 1, j);
                let c = idx(i + 1, j + 1);
                let d = idx(i, j + 1);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        // Child index of a grid-aligned parent coordinate.
        let grid = |p: [f64; 2]| -> usize {
            let i = (p[0] * n2 as f64).round() as usize;
            let j = (p[1] * n2 as f64).round() as usize;
            idx(i, j)
        };
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let pa = self.nodes[e.nodes[0]];
            let pb = self.nodes[e.nodes[1]];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            boundary_edges.push(BoundaryEdge {
                nodes: [grid(pa), grid(mid)],
                tag: e.tag,
            });
            boundary_edges.push(BoundaryEdge {
                nodes: [grid(mid), grid(pb)],
                tag: e.tag,
            });
        }
        let mut child = Mesh {
            nodes,
            triangles,
            boundary_edges,
            level: self.level + 1,
            n: n2,
            h: 0.0,
        };
        child.h = child.measure_h();
        child
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Subdivisions per side of the structured grid.
    pub fn subdivisions(&self) -> usize {
        self.n
    }

    /// Maximum triangle diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    fn measure_h(&self) -> f64 {
        let mut h: f64 = 0.0;
        for &[a, b, c] in &self.triangles {
            let pts = [self.nodes[a], self.nodes[b], self.nodes[c]];
            for k in 0..3 {
                let p = pts[k];
                let q = pts[(k + 1) % 3];
                h = h.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        h
    }

    /// Twice the signed area of triangle `t`.
    pub fn double_signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        let pc = self.nodes[c];
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])
    }

    /// Locates the triangle containing `p` by cell arithmetic and returns
    /// its index with the barycentric coordinates of `p` in it.
    pub fn locate_point(&self, p: [f64; 2]) -> Result<(usize, [f64; 3])> {
        const TOL: f64 = 1e-12;
        let [x, y] = p;
        if !(-TOL..=1.0 + TOL).contains(&x) || !(-TOL..=1.0 + TOL).contains(&y) {
            return Err(Error::OutOfDomain(x, y));
        }
        let n = self.n as f64;
        let clampi = |v: f64| -> usize { (v.floor() as isize).clamp(0, self.n as isize - 1) as usize };
        let i = clampi(x * n);
        let j = clampi(y * n);
        // Local cell coordinates in [0,1]; the diagonal runs (0,0)-(1,1).
        let lx = x * n - i as f64;
        let ly = y * n - j as f64;
        let cell = 2 * (j * self.n + i);
        let t = if lx >= ly { cell } else { cell + 1 };
        let bary = self.barycentric(t, p);
        debug_assert!(bary.iter().all(|&l| l >= -1e-9));
        Ok((t, bary))
    }

    /// Barycentric coordinates of `p` in triangle `t`.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        let pa = self.nodes[a];
        let pb = self.nodes[b];
        let pc = self.nodes[c];
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let l1 = ((pb[0] - p[0]) * (pc[1] - p[1]) - (pc[0] - p[0]) * (pb[1] - p[1])) / det;
        let l2 = ((pc[0] - p[0]) * (pa[1] - p[1]) - (pa[0] - p[0]) * (pc[1] - p[1])) / det;
        [l1, l2, 1.0 - l1 - l2]
    }

    /// Node indices lying on contact edges, sorted by x coordinate.
    pub fn contact_node_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = Vec::new();
        for e in &self.boundary_edges {
            if e.tag == BoundaryTag::Contact {
                for &v in &e.nodes {
                    if !ids.contains(&v) {
                        ids.push(v);
                    }
                }
            }
        }
        ids.sort_by(|&a, &b| self.nodes[a][0].total_cmp(&self.nodes[b][0]));
        ids
    }

    /// Node indices carrying Dirichlet constraints.
    ///
    /// A node on a Dirichlet edge is constrained unless it also touches a
    /// contact edge: the end points of the contact segment belong to the
    /// Neumann part, so nodes on the contact line are never clamped.
    pub fn dirichlet_node_ids(&self) -> Vec<usize> {
        let contact: Vec<usize> = self.contact_node_ids();
        let mut ids: Vec<usize> = Vec::new();
        for e in &self.boundary_edges {
            if e.tag == BoundaryTag::Dirichlet {
                for &v in &e.nodes {
                    if !contact.contains(&v) && !ids.contains(&v) {
                        ids.push(v);
                    }
                }
            }
        }
        ids.sort_unstable();
        ids
    }

    /// Extracts the 1D mesh of the contact trace Γ_C.
    pub fn contact_trace_mesh(&self) -> Result<TraceMesh> {
        let ids = self.contact_node_ids();
        if ids.is_empty() {
            return Err(Error::InvalidArgument(
                "mesh has no contact edges".into(),
            ));
        }
        let xs: Vec<f64> = ids.iter().map(|&i| self.nodes[i][0]).collect();
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(
                    "contact trace nodes are not strictly ordered".into(),
                ));
            }
        }
        Ok(TraceMesh { node_ids: ids, xs })
    }

    /// True when `self` arises from `coarse` by repeated uniform refinement
    /// of the structured family (coarse nodes coincide with fine nodes).
    pub fn is_refinement_of(&self, coarse: &Mesh) -> bool {
        if coarse.n == 0 || !self.n.is_multiple_of(coarse.n) {
            return false;
        }
        let ratio = self.n / coarse.n;
        if !ratio.is_power_of_two() || ratio < 1 {
            return false;
        }
        // Coarse node (i,j) must sit at fine node (ratio*i, ratio*j).
        let np_c = coarse.n + 1;
        let np_f = self.n + 1;
        for j in 0..np_c {
            for i in 0..np_c {
                let pc = coarse.nodes[j * np_c + i];
                let pf = self.nodes[(j * ratio) * np_f + i * ratio];
                if (pc[0] - pf[0]).abs() > 1e-14 || (pc[1] - pf[1]).abs() > 1e-14 {
                    return false;
                }
            }
        }
        true
    }

    /// Writes the plain-text mesh format:
    /// a header `nodes N triangles T edges E`, then one row per node
    /// (17-significant-digit coordinates), per triangle and per tagged edge.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Renders the plain-text format into a string.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "nodes {} triangles {} edges {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for p in &self.nodes {
            let _ = writeln!(out, "{:.16e} {:.16e}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(out, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.name());
        }
        out
    }

    /// Reads the plain-text format written by [`Mesh::write_text`].
    pub fn read_text(path: &Path) -> Result<Mesh> {
        let content = std::fs::read_to_string(path)?;
        Mesh::from_text(&content)
    }

    /// Parses the plain-text format.
    pub fn from_text(content: &str) -> Result<Mesh> {
        let mut lines = content.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mesh file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "nodes" || parts[2] != "triangles" || parts[4] != "edges"
        {
            return Err(Error::Parse(format!("bad mesh header `{header}`")));
        }
        let parse_count = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad count `{s}` in mesh header")))
        };
        let nn = parse_count(parts[1])?;
        let nt = parse_count(parts[3])?;
        let ne = parse_count(parts[5])?;

        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing node row".into()))?;
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad node row `{line}`")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad node row `{line}`")))?;
            nodes.push([x, y]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing triangle row".into()))?;
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad triangle row `{line}`"))))
                .collect::<Result<_>>()?;
            if ids.len() != 3 {
                return Err(Error::Parse(format!("bad triangle row `{line}`")));
            }
            triangles.push([ids[0], ids[1], ids[2]]);
        }
        let mut boundary_edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing edge row".into()))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("bad edge row `{line}`")));
            }
            let a: usize = parts[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad edge row `{line}`")))?;
            let b: usize = parts[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad edge row `{line}`")))?;
            boundary_edges.push(BoundaryEdge {
                nodes: [a, b],
                tag: BoundaryTag::parse(parts[2])?,
            });
        }

        let n_float = (nt as f64 / 2.0).sqrt();
        let n = n_float.round() as usize;
        if n * n * 2 != nt {
            return Err(Error::Parse(format!(
                "triangle count {nt} does not match a structured n-by-n grid"
            )));
        }
        let mut mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            level: 0,
            n,
            h: 0.0,
        };
        mesh.h = mesh.measure_h();
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks the structural invariants: positive triangle areas, conforming
    /// edges, a fully tagged boundary and contact edges on y = 0 with
    /// uniform spacing.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            for &v in &self.triangles[t] {
                if v >= self.nodes.len() {
                    return Err(Error::Parse(format!("triangle {t} references node {v}")));
                }
            }
            if self.double_signed_area(t) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} is degenerate or clockwise"
                )));
            }
        }
        // Each interior edge must be shared by exactly two triangles; each
        // boundary edge by one, and it must carry exactly one tag.
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if edge_count.values().any(|&c| c > 2) {
            return Err(Error::InvalidArgument(
                "non-conforming mesh: an edge is shared by more than two triangles".into(),
            ));
        }
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary_edges {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            *tagged.entry(key).or_insert(0) += 1;
        }
        if tagged.values().any(|&c| c > 1) {
            return Err(Error::InvalidArgument(
                "a boundary edge carries more than one tag".into(),
            ));
        }
        for (key, count) in &edge_count {
            let on_boundary = *count == 1;
            if on_boundary != tagged.contains_key(key) {
                return Err(Error::InvalidArgument(
                    "boundary tags do not partition the mesh boundary".into(),
                ));
            }
        }
        // Contact edges lie on y = 0 and are uniformly spaced.
        let mut lens: Vec<f64> = Vec::new();
        for e in &self.boundary_edges {
            if e.tag == BoundaryTag::Contact {
                let pa = self.nodes[e.nodes[0]];
                let pb = self.nodes[e.nodes[1]];
                if pa[1].abs() > 1e-14 || pb[1].abs() > 1e-14 {
                    return Err(Error::InvalidArgument(
                        "contact edges must lie on the segment y = 0".into(),
                    ));
                }
                lens.push((pb[0] - pa[0]).abs());
            }
        }
        if !lens.is_empty() {
            let min = lens.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = lens.iter().cloned().fold(0.0, f64::max);
            if max - min > 1e-12 {
                return Err(Error::InvalidArgument(
                    "contact trace mesh is not uniform".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One-dimensional mesh of the contact trace Γ_C: the contact nodes sorted
/// by x, referencing their parent mesh node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMesh {
    /// Parent mesh node indices in left-to-right order.
    pub node_ids: Vec<usize>,
    /// x coordinates of the trace nodes.
    pub xs: Vec<f64>,
}

impl TraceMesh {
    pub fn num_nodes(&self) -> usize {
        self.xs.len()
    }

    pub fn num_elements(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn element_length(&self, e: usize) -> f64 {
        self.xs[e + 1] - self.xs[e]
    }

    /// Total length of Γ_C.
    pub fn total_length(&self) -> f64 {
        self.xs[self.xs.len() - 1] - self.xs[0]
    }

    /// True when both meshes have identical node coordinates.
    pub fn same_as(&self, other: &TraceMesh) -> bool {
        self.xs.len() == other.xs.len()
            && self
                .xs
                .iter()
                .zip(&other.xs)
                .all(|(a, b)| (a - b).abs() < 1e-14)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_tagging() -> SideTagging {
        SideTagging::contact_bottom(
            BoundaryTag::Dirichlet,
            BoundaryTag::Neumann,
            BoundaryTag::Dirichlet,
        )
    }

    fn unit_mesh(n: usize) -> Mesh {
        Mesh::generate_structured_square(n, default_tagging()).unwrap()
    }

    /// Brute-force containment scan used as the locate_point oracle.
    fn locate_by_scan(mesh: &Mesh, p: [f64; 2]) -> Option<usize> {
        for t in 0..mesh.num_triangles() {
            let bary = mesh.barycentric(t, p);
            if bary.iter().all(|&l| l >= -1e-12) {
                return Some(t);
            }
        }
        None
    }

    #[test]
    fn counts_n1() {
        let m = unit_mesh(1);
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(
            m.boundary_edges()
                .iter()
                .filter(|e| e.tag == BoundaryTag::Contact)
                .count(),
            1
        );
    }

    #[test]
    fn counts_n2() {
        let m = unit_mesh(2);
        assert_eq!(m.num_nodes(), 9);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(
            m.boundary_edges()
                .iter()
                .filter(|e| e.tag == BoundaryTag::Contact)
                .count(),
            2
        );
    }

    #[test]
    fn counts_and_h_n4() {
        let m = unit_mesh(4);
        assert_eq!(m.num_nodes(), 25);
        assert_eq!(m.num_triangles(), 32);
        assert!((m.h() - 2.0_f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(
            Mesh::generate_structured_square(0, default_tagging()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn contact_on_side_rejected() {
        let tagging = SideTagging {
            bottom: SideTag::Uniform(BoundaryTag::Neumann),
            right: SideTag::Uniform(BoundaryTag::Contact),
            top: SideTag::Uniform(BoundaryTag::Neumann),
            left: SideTag::Uniform(BoundaryTag::Dirichlet),
        };
        assert!(Mesh::generate_structured_square(4, tagging).is_err());
    }

    #[test]
    fn refine_splits_four_to_one() {
        let m = unit_mesh(1);
        let r = m.refine_uniform();
        assert_eq!(r.num_triangles(), 8);
        assert_eq!(r.level(), 1);
        assert!((r.h() - m.h() / 2.0).abs() < 1e-15);
        r.validate().unwrap();
    }

    #[test]
    fn refinement_nesting_is_exact() {
        let m = unit_mesh(4);
        let r = m.refine_uniform();
        for p in m.nodes() {
            assert!(
                r.nodes().iter().any(|q| q[0] == p[0] && q[1] == p[1]),
                "parent node {p:?} missing from child"
            );
        }
        assert!(r.is_refinement_of(&m));
        let other = unit_mesh(3);
        assert!(!other.is_refinement_of(&m));
    }

    #[test]
    fn generated_powers_of_two_are_nested() {
        let coarse = unit_mesh(4);
        let fine = unit_mesh(16);
        assert!(fine.is_refinement_of(&coarse));
        assert!(!coarse.is_refinement_of(&fine));
    }

    #[test]
    fn area_sums_to_one_across_levels() {
        let mut m = unit_mesh(2);
        for _ in 0..3 {
            let total: f64 = (0..m.num_triangles())
                .map(|t| 0.5 * m.double_signed_area(t))
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
            m = m.refine_uniform();
        }
    }

    #[test]
    fn validate_accepts_generated_meshes() {
        for n in [1, 2, 5, 8] {
            unit_mesh(n).validate().unwrap();
        }
    }

    #[test]
    fn locate_vertex_gives_one_hot_barycentric() {
        let m = unit_mesh(2);
        let (t, bary) = m.locate_point([0.5, 0.5]).unwrap();
        let ids = m.triangles()[t];
        let one_hot = bary.iter().filter(|&&l| (l - 1.0).abs() < 1e-12).count();
        assert_eq!(one_hot, 1);
        assert!(ids.iter().any(|&v| {
            let p = m.nodes()[v];
            p[0] == 0.5 && p[1] == 0.5
        }));
    }

    #[test]
    fn locate_matches_brute_force_scan() {
        let m = unit_mesh(2);
        let p = [0.3, 0.3];
        let (t, _) = m.locate_point(p).unwrap();
        let bary = m.barycentric(t, p);
        assert!(bary.iter().all(|&l| l >= -1e-12));
        // The scan may return a different triangle only when the point sits
        // on a shared edge; (0.3, 0.3) is interior to exactly one triangle.
        assert_eq!(locate_by_scan(&m, p).unwrap(), t);
    }

    #[test]
    fn locate_rejects_outside_points() {
        let m = unit_mesh(2);
        assert!(matches!(
            m.locate_point([2.0, 2.0]),
            Err(Error::OutOfDomain(_, _))
        ));
    }

    #[test]
    fn locate_reconstructs_random_points() {
        let m = unit_mesh(8);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let p = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let (t, bary) = m.locate_point(p).unwrap();
            assert!((bary[0] + bary[1] + bary[2] - 1.0).abs() < 1e-12);
            assert!(bary.iter().all(|&l| (-1e-12..=1.0 + 1e-12).contains(&l)));
            let [a, b, c] = m.triangles()[t];
            let rx = bary[0] * m.nodes()[a][0] + bary[1] * m.nodes()[b][0] + bary[2] * m.nodes()[c][0];
            let ry = bary[0] * m.nodes()[a][1] + bary[1] * m.nodes()[b][1] + bary[2] * m.nodes()[c][1];
            assert!((rx - p[0]).abs() < 1e-12 && (ry - p[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn contact_trace_n4() {
        let m = unit_mesh(4);
        let trace = m.contact_trace_mesh().unwrap();
        assert_eq!(trace.num_nodes(), 5);
        assert_eq!(trace.num_elements(), 4);
        for e in 0..4 {
            assert!((trace.element_length(e) - 0.25).abs() < 1e-15);
        }
        assert!((trace.total_length() - 1.0).abs() < 1e-15);
        // Trace nodes are exactly the mesh nodes with y = 0.
        let expected: Vec<usize> = (0..m.num_nodes())
            .filter(|&i| m.nodes()[i][1] == 0.0)
            .collect();
        let mut got = trace.node_ids.clone();
        got.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn contact_trace_uniform_spacing_ratio_is_one() {
        for n in [1, 3, 8] {
            let m = unit_mesh(n);
            let trace = m.contact_trace_mesh().unwrap();
            let lens: Vec<f64> = (0..trace.num_elements())
                .map(|e| trace.element_length(e))
                .collect();
            let min = lens.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = lens.iter().cloned().fold(0.0, f64::max);
            assert!((max / min - 1.0).abs() < 1e-12);
            let total: f64 = lens.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_requires_contact_edges() {
        let m = Mesh::generate_structured_square(2, SideTagging::all(BoundaryTag::Dirichlet))
            .unwrap();
        assert!(m.contact_trace_mesh().is_err());
    }

    #[test]
    fn dirichlet_excludes_contact_line_nodes() {
        let m = unit_mesh(4);
        let dirichlet = m.dirichlet_node_ids();
        // Bottom corners touch contact edges, so the Dirichlet sides lose them.
        for &i in &dirichlet {
            assert!(m.nodes()[i][1] > 0.0);
        }
        // Left and right columns above y = 0: 2 * 4 nodes.
        assert_eq!(dirichlet.len(), 8);
        let contact = m.contact_node_ids();
        assert_eq!(contact.len(), 5);
    }

    #[test]
    fn split_side_tagging() {
        let tagging = SideTagging {
            bottom: SideTag::Uniform(BoundaryTag::Contact),
            right: SideTag::Split {
                at: 0.5,
                below: BoundaryTag::Neumann,
                above: BoundaryTag::Dirichlet,
            },
            top: SideTag::Uniform(BoundaryTag::Neumann),
            left: SideTag::Split {
                at: 0.5,
                below: BoundaryTag::Neumann,
                above: BoundaryTag::Dirichlet,
            },
        };
        let m = Mesh::generate_structured_square(4, tagging).unwrap();
        let dir = m.dirichlet_node_ids();
        // Upper halves of both sides: y in {0.5, 0.75, 1.0} on two sides.
        assert_eq!(dir.len(), 6);
        for &i in &dir {
            assert!(m.nodes()[i][1] >= 0.5);
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let m = unit_mesh(3);
        let text = m.to_text();
        let back = Mesh::from_text(&text).unwrap();
        assert_eq!(m.nodes(), back.nodes());
        assert_eq!(m.triangles(), back.triangles());
        assert_eq!(m.boundary_edges(), back.boundary_edges());
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(Mesh::from_text("not a mesh").is_err());
        assert!(Mesh::from_text("nodes 1 triangles 1 edges 0\n0 0\n").is_err());
    }
}
