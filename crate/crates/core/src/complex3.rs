//! Closed simplicial 3-complexes and their admissible edge colorings.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Serialize, Deserialize)]
struct TriangulationFile {
    tetrahedra: Vec<Vec<i64>>,
}

/// Closed simplicial 3-complex with derived incidence.
///
/// Per tetrahedron with sorted vertices a<b<c<d the edges are stored in the order
/// (i,j,k,l,m,n) = (ab, ac, bc, cd, bd, ad), so that i/l, j/m, k/n are opposite, and
/// the faces in the order abc, abd, acd, bcd (edge triples (i,j,k), (i,m,n), (j,l,n), (k,l,m)).
#[derive(Clone, Debug)]
pub struct Triangulation {
    vertex_count: usize,
    tetrahedra: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    face_edges: Vec<[usize; 3]>,
    tet_edges: Vec<[usize; 6]>,
    tet_faces: Vec<[usize; 4]>,
    edge_index: HashMap<[usize; 2], usize>,
}

pub const TET_FACE_SLOTS: [[usize; 3]; 4] = [[0, 1, 2], [0, 4, 5], [1, 3, 5], [2, 3, 4]];

impl Triangulation {
    pub fn from_tetrahedra(tets: &[[usize; 4]]) -> Result<Triangulation, Error> {
        if tets.is_empty() {
            return Err(Error::Triangulation("no tetrahedra".into()));
        }
        let mut tetrahedra = Vec::with_capacity(tets.len());
        let mut seen = BTreeSet::new();
        for (ti, t) in tets.iter().enumerate() {
            let mut s = *t;
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Triangulation(format!("tetrahedron {ti} {t:?} is degenerate")));
            }
            if !seen.insert(s) {
                return Err(Error::Triangulation(format!("tetrahedron {ti} {t:?} is a duplicate")));
            }
            tetrahedra.push(s);
        }
        let vertex_count = tetrahedra.iter().map(|t| t[3]).max().unwrap() + 1;
        let mut used = vec![false; vertex_count];
        tetrahedra.iter().flatten().for_each(|&v| used[v] = true);
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Triangulation(format!("vertex indices not consecutive: {v} unused")));
        }

        let edge_set: BTreeSet<[usize; 2]> = tetrahedra
            .iter()
            .flat_map(|&[a, b, c, d]| [[a, b], [a, c], [a, d], [b, c], [b, d], [c, d]])
            .collect();
        let edges: Vec<[usize; 2]> = edge_set.into_iter().collect();
        let edge_index: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

        let mut face_count: HashMap<[usize; 3], usize> = HashMap::new();
        for &[a, b, c, d] in &tetrahedra {
            for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
                *face_count.entry(f).or_default() += 1;
            }
        }
        let mut faces: Vec<[usize; 3]> = face_count.keys().copied().collect();
        faces.sort_unstable();
        if let Some(f) = faces.iter().find(|f| face_count[*f] != 2) {
            return Err(Error::Triangulation(format!(
                "face {f:?} belongs to {} tetrahedra (a closed complex needs 2)",
                face_count[f]
            )));
        }
        let face_index: HashMap<[usize; 3], usize> =
            faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let face_edges = faces
            .iter()
            .map(|&[a, b, c]| [edge_index[&[a, b]], edge_index[&[a, c]], edge_index[&[b, c]]])
            .collect();
        let tet_edges = tetrahedra
            .iter()
            .map(|&[a, b, c, d]| {
                [[a, b], [a, c], [b, c], [c, d], [b, d], [a, d]].map(|e| edge_index[&e])
            })
            .collect();
        let tet_faces = tetrahedra
            .iter()
            .map(|&[a, b, c, d]| [[a, b, c], [a, b, d], [a, c, d], [b, c, d]].map(|f| face_index[&f]))
            .collect();

        Ok(Triangulation {
            vertex_count,
            tetrahedra,
            edges,
            faces,
            face_edges,
            tet_edges,
            tet_faces,
            edge_index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn tetrahedra(&self) -> &[[usize; 4]] {
        &self.tetrahedra
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    /// Edge indices (i,j,k,l,m,n) of tetrahedron t.
    pub fn tet_edges(&self, t: usize) -> [usize; 6] {
        self.tet_edges[t]
    }

    pub fn tet_faces(&self, t: usize) -> [usize; 4] {
        self.tet_faces[t]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&[u.min(v), u.max(v)]).copied()
    }

    /// Connected components, as sorted lists of tetrahedron indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in &self.tetrahedra {
            for &v in &t[1..] {
                let (a, b) = (find(&mut parent, t[0]), find(&mut parent, v));
                parent[a] = b;
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for (ti, t) in self.tetrahedra.iter().enumerate() {
            let root = find(&mut parent, t[0]);
            groups.entry(root).or_default().push(ti);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Every vertex link is a 2-sphere and every edge link is one circle.
    pub fn is_manifold(&self) -> bool {
        let mut vlink: Vec<Vec<[usize; 3]>> = vec![Vec::new(); self.vertex_count];
        let mut elink: Vec<Vec<[usize; 2]>> = vec![Vec::new(); self.edges.len()];
        for (ti, t) in self.tetrahedra.iter().enumerate() {
            for (p, &v) in t.iter().enumerate() {
                let mut tri = [0; 3];
                let mut q = 0;
                for (k, &w) in t.iter().enumerate() {
                    if k != p {
                        tri[q] = w;
                        q += 1;
                    }
                }
                vlink[v].push(tri);
            }
            let te = self.tet_edges[ti];
            for slot in 0..6 {
                let opp = te[(slot + 3) % 6];
                elink[te[slot]].push(self.edges[opp]);
            }
        }
        vlink.iter().all(|tris| link_is_sphere(tris)) && elink.iter().all(|segs| link_is_circle(segs))
    }

    pub fn disjoint_union(&self, other: &Triangulation) -> Triangulation {
        let shift = self.vertex_count;
        let mut tets = self.tetrahedra.clone();
        tets.extend(other.tetrahedra.iter().map(|t| t.map(|v| v + shift)));
        Triangulation::from_tetrahedra(&tets).expect("union of closed complexes is closed")
    }

    pub fn to_json(&self) -> String {
        let file = TriangulationFile {
            tetrahedra: self.tetrahedra.iter().map(|t| t.iter().map(|&v| v as i64).collect()).collect(),
        };
        serde_json::to_string(&file).unwrap()
    }
}

fn link_is_sphere(tris: &[[usize; 3]]) -> bool {
    let mut verts = BTreeSet::new();
    let mut edges: HashMap<[usize; 2], usize> = HashMap::new();
    for &[a, b, c] in tris {
        verts.extend([a, b, c]);
        for e in [[a, b], [a, c], [b, c]] {
            *edges.entry(e).or_default() += 1;
        }
    }
    if edges.values().any(|&n| n != 2) {
        return false;
    }
    let chi = verts.len() as i64 - edges.len() as i64 + tris.len() as i64;
    chi == 2 && connected(tris.iter().map(|t| t.to_vec()))
}

fn link_is_circle(segs: &[[usize; 2]]) -> bool {
    let mut deg: HashMap<usize, usize> = HashMap::new();
    for &[a, b] in segs {
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    deg.values().all(|&d| d == 2) && connected(segs.iter().map(|s| s.to_vec()))
}

fn connected(cells: impl Iterator<Item = Vec<usize>>) -> bool {
    let cells: Vec<Vec<usize>> = cells.collect();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for c in &cells {
        for &v in c {
            adj.entry(v).or_default().extend(c.iter().copied().filter(|&w| w != v));
        }
    }
    let Some(&start) = adj.keys().next() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[&v] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == adj.len()
}

/// Parse a JSON triangulation `{"tetrahedra": [[0,1,2,3], ...]}`.
pub fn load_triangulation(mut source: impl Read) -> Result<Triangulation, Error> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let file: TriangulationFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut tets = Vec::with_capacity(file.tetrahedra.len());
    for (ti, t) in file.tetrahedra.iter().enumerate() {
        if t.len() != 4 || t.iter().any(|&v| v < 0) {
            return Err(Error::Parse(format!(
                "tetrahedron {ti} must list 4 non-negative vertex indices"
            )));
        }
        tets.push([t[0] as usize, t[1] as usize, t[2] as usize, t[3] as usize]);
    }
    Triangulation::from_tetrahedra(&tets)
}

/// Parity, triangle and level conditions on a face triple at level r.
#[inline]
pub fn admissible(i: u8, j: u8, k: u8, r: u32) -> bool {
    let (i, j, k) = (i as u32, j as u32, k as u32);
    (i + j + k) % 2 == 0 && i + j >= k && j + k >= i && k + i >= j && i + j + k <= 2 * (r - 2)
}

/// Edge coloring with values in {0, ..., r-2}, indexed like `Triangulation::edges`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    pub level_r: u32,
    pub colors: Vec<u8>,
}

impl Coloring {
    pub fn is_admissible(&self, t: &Triangulation) -> bool {
        self.colors.len() == t.edges().len()
            && self.colors.iter().all(|&c| (c as u32) + 2 <= self.level_r)
            && t.face_edges()
                .iter()
                .all(|f| admissible(self.colors[f[0]], self.colors[f[1]], self.colors[f[2]], self.level_r))
    }

    /// Colors (i,j,k,l,m,n) of tetrahedron t.
    pub fn tet_colors(&self, t: &Triangulation, ti: usize) -> [u8; 6] {
        t.tet_edges(ti).map(|e| self.colors[e])
    }
}

/// Backtracking order: each next edge completes as many faces as possible.
pub fn greedy_edge_order(t: &Triangulation) -> Vec<usize> {
    let ne = t.edges().len();
    let mut edge_faces: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for (fi, f) in t.face_edges().iter().enumerate() {
        for &e in f {
            edge_faces[e].push(fi);
        }
    }
    let mut placed = vec![false; ne];
    let mut face_done = vec![0u8; t.faces().len()];
    let mut order = Vec::with_capacity(ne);
    for _ in 0..ne {
        let score = |e: usize| -> (usize, usize) {
            let complete = edge_faces[e].iter().filter(|&&f| face_done[f] == 2).count();
            let touch = edge_faces[e].iter().filter(|&&f| face_done[f] > 0).count();
            (complete, touch)
        };
        let best = (0..ne)
            .filter(|&e| !placed[e])
            .max_by(|&a, &b| score(a).cmp(&score(b)).then(b.cmp(&a)))
            .unwrap();
        placed[best] = true;
        for &f in &edge_faces[best] {
            face_done[f] += 1;
        }
        order.push(best);
    }
    order
}

/// Stream of admissible colorings; see `enumerate_admissible`.
pub struct ColoringIter<'a> {
    t: &'a Triangulation,
    r: u32,
    order: Vec<usize>,
    checks: Vec<Vec<usize>>,
    values: Vec<u8>,
    first_values: Vec<u8>,
    next_val: Vec<usize>,
    colors: Vec<u8>,
    pos: usize,
    done: bool,
}

impl ColoringIter<'_> {
    fn candidates(&self, p: usize) -> &[u8] {
        if p == 0 {
            &self.first_values
        } else {
            &self.values
        }
    }

    fn passes(&self, p: usize) -> bool {
        self.checks[p].iter().all(|&f| {
            let [a, b, c] = self.t.face_edges()[f];
            admissible(self.colors[a], self.colors[b], self.colors[c], self.r)
        })
    }
}

impl Iterator for ColoringIter<'_> {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        let n = self.order.len();
        while !self.done {
            if self.pos == n {
                let out = Coloring { level_r: self.r, colors: self.colors.clone() };
                self.pos = n - 1;
                return Some(out);
            }
            let p = self.pos;
            let mut placed = false;
            while self.next_val[p] < self.candidates(p).len() {
                let v = self.candidates(p)[self.next_val[p]];
                self.next_val[p] += 1;
                self.colors[self.order[p]] = v;
                if self.passes(p) {
                    placed = true;
                    break;
                }
            }
            if placed {
                self.pos += 1;
                if self.pos < n {
                    self.next_val[self.pos] = 0;
                }
            } else if p == 0 {
                self.done = true;
            } else {
                self.pos -= 1;
            }
        }
        None
    }
}

/// Admissible colorings at level r (A_r), or the even-valued ones (A'_r) when `even_only`.
pub fn enumerate_admissible(t: &Triangulation, r: u32, even_only: bool) -> Result<ColoringIter<'_>, Error> {
    enumerate_partition(t, r, even_only, None)
}

/// Colorings whose first edge (in backtracking order) has the given color.
pub fn enumerate_partition(
    t: &Triangulation,
    r: u32,
    even_only: bool,
    first_color: Option<u8>,
) -> Result<ColoringIter<'_>, Error> {
    if r < 3 {
        return Err(Error::LevelTooSmall(r as i64));
    }
    if even_only && r % 2 == 0 {
        return Err(Error::Hypothesis(format!("even-only colorings need odd r, got {r}")));
    }
    let order = greedy_edge_order(t);
    let mut rank = vec![0; order.len()];
    for (p, &e) in order.iter().enumerate() {
        rank[e] = p;
    }
    let mut checks = vec![Vec::new(); order.len()];
    for (fi, f) in t.face_edges().iter().enumerate() {
        let last = f.iter().map(|&e| rank[e]).max().unwrap();
        checks[last].push(fi);
    }
    let step = if even_only { 2 } else { 1 };
    let values: Vec<u8> = (0..=(r - 2) as u8).step_by(step).collect();
    let first_values = match first_color {
        Some(c) => values.iter().copied().filter(|&v| v == c).collect(),
        None => values.clone(),
    };
    Ok(ColoringIter {
        t,
        r,
        checks,
        next_val: vec![0; order.len()],
        colors: vec![0; order.len()],
        order,
        values,
        first_values,
        pos: 0,
        done: false,
    })
}

/// |A_r| (or |A'_r|), counted in parallel over the first edge's color.
pub fn count_admissible(t: &Triangulation, r: u32, even_only: bool) -> Result<u64, Error> {
    use rayon::prelude::*;
    enumerate_admissible(t, r, even_only)?;
    let step = if even_only { 2 } else { 1 };
    let firsts: Vec<u8> = (0..=(r - 2) as u8).step_by(step).collect();
    Ok(firsts
        .par_iter()
        .map(|&c| enumerate_partition(t, r, even_only, Some(c)).unwrap().count() as u64)
        .sum())
}

/// A_r -> A_3 x A'_r for odd r: odd colors c go to (1, r-2-c), even ones to (0, c).
pub fn split_coloring(c: &Coloring) -> Result<(Coloring, Coloring), Error> {
    let r = c.level_r;
    if r % 2 == 0 {
        return Err(Error::Hypothesis(format!("splitting needs odd r, got {r}")));
    }
    let mut c3 = Vec::with_capacity(c.colors.len());
    let mut cp = Vec::with_capacity(c.colors.len());
    for &x in &c.colors {
        if x % 2 == 0 {
            c3.push(0);
            cp.push(x);
        } else {
            c3.push(1);
            cp.push((r - 2) as u8 - x);
        }
    }
    Ok((Coloring { level_r: 3, colors: c3 }, Coloring { level_r: r, colors: cp }))
}

/// Inverse of `split_coloring`.
pub fn merge_coloring(c3: &Coloring, cp: &Coloring) -> Result<Coloring, Error> {
    let r = cp.level_r;
    if r % 2 == 0 || c3.level_r != 3 || c3.colors.len() != cp.colors.len() {
        return Err(Error::Hypothesis("merge needs a level-3 and an odd-level coloring of equal size".into()));
    }
    let colors = c3
        .colors
        .iter()
        .zip(&cp.colors)
        .map(|(&a, &b)| if a == 1 { (r - 2) as u8 - b } else { b })
        .collect();
    Ok(Coloring { level_r: r, colors })
}

/// Euler characteristic mod 2 of the normal surface dual to a level-1 coloring:
/// (#edges colored 1 + #faces colored (1,1,0) + #quadrilateral tetrahedra) mod 2.
pub fn normal_surface_euler_parity(t: &Triangulation, c3: &Coloring) -> Result<u8, Error> {
    if c3.level_r != 3 || !c3.is_admissible(t) {
        return Err(Error::Inadmissible("expected an admissible level-3 coloring".into()));
    }
    let nu0 = c3.colors.iter().filter(|&&c| c == 1).count();
    let nu1 = t
        .face_edges()
        .iter()
        .filter(|f| f.iter().any(|&e| c3.colors[e] == 1))
        .count();
    let quads = (0..t.tetrahedra().len())
        .filter(|&ti| c3.tet_colors(t, ti).iter().filter(|&&c| c == 1).count() == 4)
        .count();
    Ok(((nu0 + nu1 + quads) % 2) as u8)
}
