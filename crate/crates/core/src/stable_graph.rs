//! The weighted stable graph of a square-tiled surface: critical components
//! of the horizontal line structure as vertices, cylinders as edges.
//!
//! The construction uses the unit-band model: every `{G,B}`-cycle is a band
//! of height 1 with two red boundary circles (its alternation classes), and
//! every `{G,B}`-path is a band of height 1/2 whose single boundary circle
//! carries all its red prongs and whose fold midline is always critical.
//! Horizontal lines at integer heights are traced along red edges, passing
//! straight through regular faces; bands merge into cylinders across closed
//! regular lines.

use crate::moves::{components, cycle_sides, Component, ComponentKind};
use crate::surface::{Color, Error, Profile, Result, Surface};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexDecoration {
    /// Reduced part multiset: degrees/3 of the singular faces on the
    /// component, parts equal to 2 omitted by construction.
    pub mu: Vec<usize>,
    /// Fold midpoints on the component.
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StableEdge {
    /// Endpoint vertex indices; loops allowed.
    pub ends: (usize, usize),
    /// Cylinder width: red prong count of either boundary circle.
    pub width: usize,
    /// Cylinder height in half-units (a height of 3/2 is stored as 3).
    pub height_half: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightedStableGraph {
    pub vertices: Vec<VertexDecoration>,
    pub edges: Vec<StableEdge>,
    /// Set when the surface has no singular points at all (a torus): a single
    /// cylinder with no critical graph, so the stable graph is undefined.
    pub torus: bool,
}

impl WeightedStableGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.ends.0 == v) as usize + (e.ends.1 == v) as usize)
            .sum()
    }

    pub fn is_tree(&self) -> bool {
        !self.torus && self.edges.len() + 1 == self.vertices.len() && self.is_connected()
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.ends.0, e.ends.1), (e.ends.1, e.ends.0)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Leaves of the underlying multigraph.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.degree(v) == 1)
            .collect()
    }

    /// Per-vertex genus from the decoration and degree.
    pub fn vertex_genus(&self, v: usize) -> Option<usize> {
        let lhs: i64 = self.vertices[v].mu.iter().map(|&i| i as i64 - 2).sum::<i64>()
            - self.vertices[v].k as i64
            - 2 * self.degree(v) as i64
            + 4;
        if lhs >= 0 && lhs % 4 == 0 {
            Some((lhs / 4) as usize)
        } else {
            None
        }
    }

    /// Canonical invariant for isomorphism testing of decorated multigraphs:
    /// brute-force minimisation over vertex orderings at desk scale.
    pub fn canonical_key(&self) -> Vec<u8> {
        let n = self.vertices.len();
        assert!(n <= 10, "stable-graph canonical key is desk-scale only");
        let mut order: Vec<usize> = (0..n).collect();
        let mut best: Option<Vec<u8>> = None;
        permute(&mut order, 0, &mut |perm| {
            let mut key = Vec::new();
            for &v in perm.iter() {
                key.push(0xFE);
                key.extend(self.vertices[v].mu.iter().map(|&p| p as u8));
                key.push(0xFD);
                key.push(self.vertices[v].k as u8);
            }
            let mut pos = vec![0usize; n];
            for (i, &v) in perm.iter().enumerate() {
                pos[v] = i;
            }
            let mut edges: Vec<(usize, usize, usize, usize)> = self
                .edges
                .iter()
                .map(|e| {
                    let (a, b) = (pos[e.ends.0], pos[e.ends.1]);
                    (a.min(b), a.max(b), e.width, e.height_half)
                })
                .collect();
            edges.sort_unstable();
            for (a, b, w, h) in edges {
                key.push(0xFF);
                key.extend([a as u8, b as u8, w as u8, h as u8]);
            }
            match &best {
                Some(bk) if *bk <= key => {}
                _ => best = Some(key),
            }
        });
        fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
            if k == items.len() {
                f(items);
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                permute(items, k + 1, f);
                items.swap(k, i);
            }
        }
        best.unwrap()
    }

    pub fn is_isomorphic(&self, other: &WeightedStableGraph) -> bool {
        self.torus == other.torus
            && self.vertices.len() == other.vertices.len()
            && self.edges.len() == other.edges.len()
            && (self.torus || self.canonical_key() == other.canonical_key())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph stable {\n");
        if self.torus {
            out.push_str("  // torus: single cylinder, no critical graph\n");
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let mu = Profile::new(v.mu.clone(), v.k);
            out.push_str(&format!("  v{i} [label=\"{mu}\"];\n"));
        }
        let mut edges: Vec<&StableEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| (e.ends, e.width, e.height_half));
        for e in edges {
            let h = if e.height_half % 2 == 0 {
                format!("{}", e.height_half / 2)
            } else {
                format!("{}/2", e.height_half)
            };
            out.push_str(&format!(
                "  v{} -- v{} [label=\"w={} h={}\"];\n",
                e.ends.0, e.ends.1, e.width, h
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stable graph serialises")
    }
}

/// Internal band data: one `{G,B}`-component with its boundary circles.
struct Band {
    /// Height in half-units: 2 for a cycle, 1 for a path.
    height_half: usize,
    /// Boundary circles as vertex sets (red prongs); one for a path band,
    /// two (the alternation classes) for a cycle band.
    circles: Vec<Vec<u32>>,
    /// Set for path bands: the two `G`/`B` fold midpoints live on its midline.
    has_midline: bool,
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Computes the weighted stable graph; checks all its structural identities
/// and fails with an internal error if any is violated.
pub fn stable_graph(s: &Surface) -> Result<WeightedStableGraph> {
    let n = s.triangle_count();
    let (faces, face_of) = s.face_of_dart();
    let singular: Vec<bool> = faces.iter().map(|f| f.len() != 6).collect();
    let any_singular = singular.iter().any(|&b| b) || s.half_edge_count() > 0;
    if !any_singular {
        // All faces hexagons and no folds: flat torus.
        return Ok(WeightedStableGraph { vertices: vec![], edges: vec![], torus: true });
    }

    // Bands.
    let gb: Vec<Component> = components(s, Color::G, Color::B);
    let mut bands = Vec::new();
    for comp in &gb {
        match comp.kind {
            ComponentKind::Cycle => {
                let (c1, c2) = cycle_sides(comp, comp.order[0]).expect("cycle sides");
                bands.push(Band { height_half: 2, circles: vec![c1, c2], has_midline: false });
            }
            ComponentKind::Path => {
                bands.push(Band {
                    height_half: 1,
                    circles: vec![comp.vertices.clone()],
                    has_midline: true,
                });
            }
        }
    }

    // Horizontal lines: orbits of red prongs under travel (tau_R) and
    // pass-through at regular faces (the other red dart of a hexagon).
    let tau_r = s.tau(Color::R);
    let mut lines = UnionFind::new(n);
    for v in 0..n as u32 {
        lines.union(v, tau_r.apply(v));
    }
    for (fid, f) in faces.iter().enumerate() {
        if singular[fid] {
            continue;
        }
        let reds: Vec<u32> = f.iter().filter(|d| d.1 == Color::R).map(|d| d.0).collect();
        debug_assert_eq!(reds.len(), 2);
        lines.union(reds[0], reds[1]);
    }
    // Criticality per line root: contains a red fold or touches a singular face.
    let mut critical = vec![false; n];
    for v in 0..n as u32 {
        let root = lines.find(v) as usize;
        if tau_r.apply(v) == v || singular[face_of[v as usize * 3 + Color::R.index()] as usize] {
            critical[root] = true;
        }
    }

    // Circles -> lines; merge bands across regular lines.
    let mut band_uf = UnionFind::new(bands.len());
    // line root -> (band, circle) incidences
    let mut incidences: std::collections::BTreeMap<u32, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for (bid, band) in bands.iter().enumerate() {
        for (cid, circle) in band.circles.iter().enumerate() {
            // A circle on a regular closed line lies entirely in one orbit;
            // on a critical boundary its prongs may spread over several
            // saddle connections, all glued into one critical component.
            let root = lines.find(circle[0]);
            if !critical[root as usize] {
                for &v in circle {
                    if lines.find(v) != root {
                        return Err(Error::Internal(
                            "boundary circle leaks out of a regular line".into(),
                        ));
                    }
                }
            }
            incidences.entry(root).or_default().push((bid, cid));
        }
    }
    for (&root, incident) in &incidences {
        if critical[root as usize] {
            continue;
        }
        if incident.len() != 2 {
            return Err(Error::Internal(format!(
                "regular line with {} incident circles",
                incident.len()
            )));
        }
        let (b1, b2) = (incident[0].0, incident[1].0);
        if b1 == b2 {
            return Err(Error::Internal(
                "regular line glues a band to itself outside the torus case".into(),
            ));
        }
        band_uf.union(b1 as u32, b2 as u32);
    }

    // Cylinders.
    #[derive(Default)]
    struct Cylinder {
        height_half: usize,
        width: Option<usize>,
        /// Terminal attachments: `Ok(line root)` for a critical boundary
        /// line, `Err(band id)` for a path-band midline.
        terminals: Vec<std::result::Result<u32, usize>>,
    }
    let mut cylinders: std::collections::BTreeMap<u32, Cylinder> =
        std::collections::BTreeMap::new();
    for (bid, band) in bands.iter().enumerate() {
        let root = band_uf.find(bid as u32);
        let cyl = cylinders.entry(root).or_default();
        cyl.height_half += band.height_half;
        for circle in &band.circles {
            match cyl.width {
                None => cyl.width = Some(circle.len()),
                Some(w) => {
                    if w != circle.len() {
                        return Err(Error::Internal(
                            "boundary circles of one cylinder have unequal widths".into(),
                        ));
                    }
                }
            }
            let line_root = lines.find(circle[0]);
            if critical[line_root as usize] {
                cyl.terminals.push(Ok(line_root));
            }
        }
        if band.has_midline {
            cyl.terminals.push(Err(bid));
        }
    }
    for cyl in cylinders.values() {
        if cyl.terminals.len() != 2 {
            return Err(Error::Internal(format!(
                "cylinder with {} terminal lines",
                cyl.terminals.len()
            )));
        }
    }

    // Stable-graph vertices: critical lines glued at shared singular faces,
    // plus one vertex per path-band midline.
    let mut vert_uf = UnionFind::new(n);
    {
        // face id -> first critical line root seen
        let mut face_line: std::collections::BTreeMap<u32, u32> = std::collections::BTreeMap::new();
        for v in 0..n as u32 {
            let root = lines.find(v);
            if !critical[root as usize] {
                continue;
            }
            let fid = face_of[v as usize * 3 + Color::R.index()];
            if singular[fid as usize] {
                match face_line.entry(fid) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(root);
                    }
                    std::collections::btree_map::Entry::Occupied(e) => {
                        vert_uf.union(*e.get(), root);
                    }
                }
            }
        }
    }
    // Deterministic vertex ids: critical classes by minimal member vertex,
    // then midlines by band id.
    let mut class_of_line: std::collections::BTreeMap<u32, usize> =
        std::collections::BTreeMap::new();
    let mut vertices: Vec<VertexDecoration> = Vec::new();
    let mut class_faces: Vec<std::collections::BTreeSet<u32>> = Vec::new();
    for v in 0..n as u32 {
        let lroot = lines.find(v);
        if !critical[lroot as usize] {
            continue;
        }
        let vroot = vert_uf.find(lroot);
        if let std::collections::btree_map::Entry::Vacant(e) = class_of_line.entry(vroot) {
            e.insert(vertices.len());
            vertices.push(VertexDecoration { mu: vec![], k: 0 });
            class_faces.push(std::collections::BTreeSet::new());
        }
    }
    // Decorations for critical classes.
    for v in 0..n as u32 {
        let lroot = lines.find(v);
        if !critical[lroot as usize] {
            continue;
        }
        let class = class_of_line[&vert_uf.find(lroot)];
        if tau_r.apply(v) == v {
            vertices[class].k += 1;
        }
        let fid = face_of[v as usize * 3 + Color::R.index()];
        if singular[fid as usize] {
            class_faces[class].insert(fid);
        }
    }
    for (class, fids) in class_faces.iter().enumerate() {
        for &fid in fids {
            let part = faces[fid as usize].len() / 3;
            if part != 2 {
                vertices[class].mu.push(part);
            }
        }
        vertices[class].mu.sort_unstable();
    }
    // Midline vertices.
    let mut midline_vertex: std::collections::BTreeMap<usize, usize> =
        std::collections::BTreeMap::new();
    for (bid, band) in bands.iter().enumerate() {
        if band.has_midline {
            midline_vertex.insert(bid, vertices.len());
            vertices.push(VertexDecoration { mu: vec![], k: 2 });
        }
    }

    // Edges.
    let mut edges = Vec::new();
    for cyl in cylinders.values() {
        let mut resolve = |t: &std::result::Result<u32, usize>| -> usize {
            match t {
                Ok(lroot) => class_of_line[&vert_uf.find(*lroot)],
                Err(bid) => midline_vertex[bid],
            }
        };
        let mut a = resolve(&cyl.terminals[0]);
        let mut b = resolve(&cyl.terminals[1]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        edges.push(StableEdge {
            ends: (a, b),
            width: cyl.width.unwrap(),
            height_half: cyl.height_half,
        });
    }
    edges.sort_by_key(|e| (e.ends, e.width, e.height_half));

    let graph = WeightedStableGraph { vertices, edges, torus: false };
    check_identities(s, &graph)?;
    Ok(graph)
}

fn check_identities(s: &Surface, graph: &WeightedStableGraph) -> Result<()> {
    let n = s.triangle_count();
    // sum w_e h_e = n/2, i.e. sum w_e * height_half = n.
    let area: usize = graph.edges.iter().map(|e| e.width * e.height_half).sum();
    if area != n {
        return Err(Error::Internal(format!(
            "cylinder area {area}/2 does not match n/2 = {n}/2"
        )));
    }
    // Decoration union = reduced profile.
    let mut mu: Vec<usize> = graph.vertices.iter().flat_map(|v| v.mu.iter().copied()).collect();
    mu.sort_unstable();
    let k: usize = graph.vertices.iter().map(|v| v.k).sum();
    let reduced = s.profile().reduced();
    if mu != reduced.mu || k != reduced.k {
        return Err(Error::Internal(format!(
            "decoration union {mu:?} k={k} differs from reduced profile {reduced}"
        )));
    }
    // Per-vertex genus integral and summing to the surface genus.
    let mut total = 0usize;
    for v in 0..graph.vertices.len() {
        match graph.vertex_genus(v) {
            Some(g) => total += g,
            None => {
                return Err(Error::Internal(format!("vertex {v} has no integral genus")))
            }
        }
    }
    let genus = total + graph.edges.len() + 1 - graph.vertices.len();
    if genus != s.genus() {
        return Err(Error::Internal(format!(
            "stable graph genus {genus} differs from surface genus {}",
            s.genus()
        )));
    }
    if s.genus() == 0 && !graph.is_tree() {
        return Err(Error::Internal(
            "spherical surface with non-tree stable graph".into(),
        ));
    }
    Ok(())
}

/// True iff the surface has exactly one `{G,B}`-component and it is a path.
pub fn is_path_like(s: &Surface) -> bool {
    let comps = components(s, Color::G, Color::B);
    comps.len() == 1 && comps[0].kind == ComponentKind::Path
}

/// The stable-graph characterisation of path-likeness, used as a cross-check:
/// two vertices, one of them decorated `([], 2)`, and a single edge of
/// height 1/2.
pub fn is_path_like_via_stable_graph(s: &Surface) -> Result<bool> {
    let graph = stable_graph(s)?;
    if graph.torus {
        return Ok(false);
    }
    Ok(graph.vertices.len() == 2
        && graph.edges.len() == 1
        && graph.edges[0].height_half == 1
        && graph.vertices.iter().any(|v| v.mu.is_empty() && v.k == 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Perm;

    fn torus() -> Surface {
        let t = Perm::from_transpositions(2, &[(0, 1)]);
        Surface::new(t.clone(), t.clone(), t).unwrap()
    }

    fn two_triangle_path() -> Surface {
        Surface::new(
            Perm::identity(2),
            Perm::from_transpositions(2, &[(0, 1)]),
            Perm::identity(2),
        )
        .unwrap()
    }

    fn one_triangle() -> Surface {
        Surface::new(Perm::identity(1), Perm::identity(1), Perm::identity(1)).unwrap()
    }

    #[test]
    fn torus_is_flagged() {
        let g = stable_graph(&torus()).unwrap();
        assert!(g.torus);
        assert!(!is_path_like(&torus()));
        assert!(!is_path_like_via_stable_graph(&torus()).unwrap());
    }

    #[test]
    fn path_band_hand_trace() {
        // Profile ([2], 4): two vertices decorated ([], 2), one edge (2, 1/2).
        let s = two_triangle_path();
        let g = stable_graph(&s).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert!(g.vertices.iter().all(|v| v.mu.is_empty() && v.k == 2));
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].width, 2);
        assert_eq!(g.edges[0].height_half, 1);
        assert!(is_path_like(&s));
        assert!(is_path_like_via_stable_graph(&s).unwrap());
    }

    #[test]
    fn one_triangle_stable_graph() {
        let s = one_triangle();
        let g = stable_graph(&s).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].width, 1);
        assert_eq!(g.edges[0].height_half, 1);
        let mut decs: Vec<(Vec<usize>, usize)> =
            g.vertices.iter().map(|v| (v.mu.clone(), v.k)).collect();
        decs.sort();
        assert_eq!(decs, vec![(vec![], 2), (vec![1], 1)]);
        assert!(is_path_like(&s));
    }

    #[test]
    fn two_one_faces_cycle_surface() {
        // Single GB-cycle with two 1-faces above and two red folds below.
        let s = Surface::new(
            Perm::from_transpositions(4, &[(0, 2)]),
            Perm::from_transpositions(4, &[(0, 1), (2, 3)]),
            Perm::from_transpositions(4, &[(0, 3), (1, 2)]),
        )
        .unwrap();
        let g = stable_graph(&s).unwrap();
        assert!(!g.torus);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].width, 2);
        assert_eq!(g.edges[0].height_half, 2);
        let mut decs: Vec<(Vec<usize>, usize)> =
            g.vertices.iter().map(|v| (v.mu.clone(), v.k)).collect();
        decs.sort();
        assert_eq!(decs, vec![(vec![], 2), (vec![1, 1], 0)]);
        assert!(!is_path_like(&s));
    }

    #[test]
    fn dot_and_json_exports_are_stable() {
        let g = stable_graph(&two_triangle_path()).unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("v0 -- v1"));
        assert!(dot.contains("w=2 h=1/2"));
        let json = g.to_json();
        assert!(json.contains("\"width\": 2"));
    }
}
