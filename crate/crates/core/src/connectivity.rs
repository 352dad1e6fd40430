//! The constructive connectivity pipelines: fusion-path reduction to
//! path-like form, surface realisation of tree moves, spherical connection,
//! and the hyperelliptic quotient/lift pipeline.

use crate::moves::{
    apply_move, component_of, components, cycle_sides, half_shear, half_shear_admissible,
    shear_unchecked, Component, ComponentKind, HalfShearFlavor, Move, MoveCertificate,
    Orientation,
};
use crate::perm::Perm;
use crate::plane_tree::{
    apply_tree_move, canonical_caterpillar, is_nice, make_nice_plan, next_caterpillar_move,
    sort_spine, spine, tree_of_path_like, DecoratedPlaneTree, Origin, TreeMove,
};
use crate::stable_graph::{is_path_like, stable_graph};
use crate::surface::{Color, Error, Profile, Result, Surface};

/// Upper bound for deterministic first-match orbit walks.
const WALK_CAP: usize = 100_000;

/// Accumulates a surface state together with the replayable certificate that
/// produced it.
#[derive(Debug, Clone)]
pub struct Driver {
    pub start: Surface,
    pub cur: Surface,
    pub cert: MoveCertificate,
}

impl Driver {
    pub fn new(start: Surface) -> Self {
        Driver { cur: start.clone(), cert: MoveCertificate::new(), start }
    }

    pub fn into_parts(self) -> (Surface, MoveCertificate) {
        (self.cur, self.cert)
    }

    fn push_move(&mut self, mv: Move) -> Result<()> {
        self.cur = apply_move(&self.cur, &mv)?;
        self.cert.push(mv);
        Ok(())
    }

    /// One `(i,j)`-shear on the component containing `anchor`.
    pub fn shear(&mut self, ordered: (Color, Color), anchor: u32) -> Result<()> {
        let c = component_of(&self.cur, ordered.0, ordered.1, anchor);
        self.push_move(Move::Shear { colors: ordered, anchor: c.anchor(), power: 1 })
    }

    /// Power of the `(i,j)`-shear: applies single shears until `pred` holds,
    /// then records the count as one power move.  The component is identified
    /// by its (stable) vertex set.
    pub fn power_until(
        &mut self,
        ordered: (Color, Color),
        anchor: u32,
        pred: impl Fn(&Surface) -> bool,
    ) -> Result<()> {
        let c = component_of(&self.cur, ordered.0, ordered.1, anchor);
        let mut scratch = self.cur.clone();
        let mut count: i64 = 0;
        while !pred(&scratch) {
            scratch = shear_unchecked(&scratch, &c.vertices, ordered);
            count += 1;
            if count as usize > WALK_CAP {
                return Err(Error::Internal(
                    "predicate not reachable along the shear orbit".into(),
                ));
            }
        }
        if count > 0 {
            self.cert.push(Move::Shear { colors: ordered, anchor: c.anchor(), power: count });
            self.cur = scratch;
        }
        Ok(())
    }

    pub fn half_shear(
        &mut self,
        orientation: Orientation,
        anchor: u32,
        side: u32,
        inverse: bool,
    ) -> Result<()> {
        let (a, b) = orientation.cycle_colors();
        let c = component_of(&self.cur, a, b, anchor);
        let (c1, _) = cycle_sides(&c, side)?;
        self.push_move(Move::HalfShear {
            orientation,
            anchor: c.anchor(),
            side: c1[0],
            inverse,
        })
    }
}

// ---------------------------------------------------------------------------
// Fusion paths
// ---------------------------------------------------------------------------

/// A seed for growing a fusion path: a red half-edge, or a red edge whose
/// endpoints lie in distinct `{G,B}`-components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    Fold(u32),
    Edge(u32, u32),
}

/// Checks the fusion predicate: `c` is a vertical path meeting every
/// horizontal cycle in at most one green edge and every horizontal path in at
/// most one green half-edge.
pub fn is_fusion_path(s: &Surface, c: &Component) -> bool {
    if c.colors != (Color::R, Color::G) || c.kind != ComponentKind::Path {
        return false;
    }
    for gb in components(s, Color::G, Color::B) {
        let inter: Vec<u32> = gb.vertices.iter().copied().filter(|&v| c.contains(v)).collect();
        match gb.kind {
            ComponentKind::Cycle => {
                let ok = inter.is_empty()
                    || (inter.len() == 2 && s.tau(Color::G).apply(inter[0]) == inter[1]);
                if !ok {
                    return false;
                }
            }
            ComponentKind::Path => {
                let ok = inter.is_empty()
                    || (inter.len() == 1 && s.tau(Color::G).apply(inter[0]) == inter[0]);
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

/// Grows the fusion path away from `entry`, whose red edge or half-edge
/// already belongs to it: powers of horizontal shears align one green
/// connection per crossed band until a half-edge ends the walk.
fn extend_fusion(driver: &mut Driver, mut entry: u32) -> Result<()> {
    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps > driver.cur.triangle_count() + 2 {
            return Err(Error::Internal("fusion extension did not terminate".into()));
        }
        let comp = component_of(&driver.cur, Color::G, Color::B, entry);
        if comp.kind == ComponentKind::Path {
            // End on a green half-edge at the entry triangle.
            driver.power_until((Color::G, Color::B), comp.anchor(), |s| {
                s.tau(Color::G).apply(entry) == entry
            })?;
            return Ok(());
        }
        let (c_in, c_out) = cycle_sides(&comp, entry)?;
        let _ = c_in;
        let tau_r = driver.cur.tau(Color::R);
        // Prefer ending on a red half-edge of the far side.
        if let Some(&j) = c_out.iter().find(|&&x| tau_r.apply(x) == x) {
            driver.power_until((Color::G, Color::B), comp.anchor(), |s| {
                s.tau(Color::G).apply(entry) == j
            })?;
            return Ok(());
        }
        // Otherwise cross into the next band through a red edge leaving the
        // component.
        let crossing = c_out
            .iter()
            .copied()
            .find_map(|x| {
                let z = tau_r.apply(x);
                if !comp.contains(z) {
                    Some((x, z))
                } else {
                    None
                }
            })
            .ok_or_else(|| {
                Error::Precondition(
                    "hypothesis failure: a stable-graph leaf with no half-edge blocks the fusion path"
                        .into(),
                )
            })?;
        driver.power_until((Color::G, Color::B), comp.anchor(), |s| {
            s.tau(Color::G).apply(entry) == crossing.0
        })?;
        entry = crossing.1;
    }
}

/// Aligns horizontal cylinders so the vertical component through `seed`
/// becomes a fusion path; returns the reached surface, the certificate, and
/// the fusion path.
pub fn find_fusion_path(s: &Surface, seed: Seed) -> Result<(Surface, MoveCertificate, Component)> {
    if s.genus() != 0 {
        return Err(Error::Precondition("fusion paths need a spherical surface".into()));
    }
    let graph = stable_graph(s)?;
    for leaf in graph.leaves() {
        if graph.vertices[leaf].k == 0 {
            return Err(Error::Precondition(format!(
                "hypothesis failure: stable-graph leaf {leaf} has no half-edge"
            )));
        }
    }
    let mut driver = Driver::new(s.clone());
    let probe = match seed {
        Seed::Fold(i) => {
            if s.tau(Color::R).apply(i) != i {
                return Err(Error::Precondition("seed is not a red half-edge".into()));
            }
            extend_fusion(&mut driver, i)?;
            i
        }
        Seed::Edge(i, j) => {
            if s.tau(Color::R).apply(i) != j || i == j {
                return Err(Error::Precondition("seed is not a red edge".into()));
            }
            let ci = component_of(s, Color::G, Color::B, i);
            if ci.contains(j) {
                return Err(Error::Precondition(
                    "seed edge does not span distinct horizontal components".into(),
                ));
            }
            extend_fusion(&mut driver, i)?;
            extend_fusion(&mut driver, j)?;
            i
        }
    };
    let c = component_of(&driver.cur, Color::R, Color::G, probe);
    if !is_fusion_path(&driver.cur, &c) {
        return Err(Error::Internal("constructed component fails the fusion predicate".into()));
    }
    let (cur, cert) = driver.into_parts();
    Ok((cur, cert, c))
}

/// One vertical shear along a fusion path; the horizontal components it
/// meets merge into a single path.
pub fn fuse(driver: &mut Driver, c: &Component) -> Result<()> {
    if !is_fusion_path(&driver.cur, c) {
        return Err(Error::Precondition("not a fusion path".into()));
    }
    let met: Vec<u32> = components(&driver.cur, Color::G, Color::B)
        .into_iter()
        .filter(|gb| gb.vertices.iter().any(|&v| c.contains(v)))
        .flat_map(|gb| gb.vertices)
        .collect();
    driver.shear((Color::R, Color::G), c.anchor())?;
    let merged = component_of(&driver.cur, Color::G, Color::B, met[0]);
    let mut met_sorted = met;
    met_sorted.sort_unstable();
    if merged.kind != ComponentKind::Path || merged.vertices != met_sorted {
        return Err(Error::Internal(
            "fusion shear did not merge the crossed components into one path".into(),
        ));
    }
    Ok(())
}

/// Reduces a spherical surface with `mu_1 <= 1` to a path-like configuration
/// by repeated fusion.
pub fn to_path_like(s: &Surface) -> Result<(Surface, MoveCertificate)> {
    let profile = s.profile();
    if !profile.is_spherical() {
        return Err(Error::Precondition("to_path_like needs a spherical surface".into()));
    }
    if profile.mu_count(1) > 1 {
        return Err(Error::Precondition("to_path_like needs mu_1 <= 1".into()));
    }
    let mut driver = Driver::new(s.clone());
    let mut rounds = 0usize;
    loop {
        if is_path_like(&driver.cur) {
            return Ok(driver.into_parts());
        }
        rounds += 1;
        if rounds > s.triangle_count() + 2 {
            return Err(Error::Internal("fusion loop did not terminate".into()));
        }
        let seed = pick_seed(&driver.cur)?;
        let (aligned, cert, c) = find_fusion_path(&driver.cur, seed)?;
        driver.cur = aligned;
        driver.cert.extend(&cert);
        fuse(&mut driver, &c)?;
    }
}

/// Deterministic seed: the minimal red edge spanning distinct horizontal
/// components, else the minimal red half-edge.
fn pick_seed(s: &Surface) -> Result<Seed> {
    let tau_r = s.tau(Color::R);
    let gb = components(s, Color::G, Color::B);
    let comp_id = |v: u32| gb.iter().position(|c| c.contains(v)).unwrap();
    for i in 0..s.triangle_count() as u32 {
        let j = tau_r.apply(i);
        if j > i && comp_id(i) != comp_id(j) {
            return Ok(Seed::Edge(i, j));
        }
    }
    if let Some(i) = tau_r.fixed_points().next() {
        return Ok(Seed::Fold(i));
    }
    Err(Error::Internal("no fusion seed on a non-path-like surface".into()))
}

// ---------------------------------------------------------------------------
// Surface realisation of tree moves
// ---------------------------------------------------------------------------

/// A path-like surface together with its origin-annotated decorated plane
/// tree.  The tree's vertex ids are the stable handles the pipeline uses.
#[derive(Debug, Clone)]
pub struct TrackedPathLike {
    pub tree: DecoratedPlaneTree,
}

pub fn track(s: &Surface) -> Result<TrackedPathLike> {
    Ok(TrackedPathLike { tree: tree_of_path_like(s)? })
}

fn fold_of(tree: &DecoratedPlaneTree, v: usize) -> Result<u32> {
    match tree.origin[v] {
        Origin::Fold(p) => Ok(p),
        _ => Err(Error::Internal(format!("tree vertex {v} has no fold origin"))),
    }
}

fn face_min_of(tree: &DecoratedPlaneTree, v: usize) -> Result<u32> {
    match tree.origin[v] {
        Origin::Face(f) => Ok(f),
        _ => Err(Error::Internal(format!("tree vertex {v} has no face origin"))),
    }
}

/// The red edge realising the tree edge `(u, v)`: the unique non-fold red
/// edge whose two dart faces are the faces of `u` and `v`.
fn red_edge_of_tree_edge(
    s: &Surface,
    tree: &DecoratedPlaneTree,
    u: usize,
    v: usize,
) -> Result<(u32, u32)> {
    let fu = face_min_of(tree, u)?;
    let fv = face_min_of(tree, v)?;
    let (faces, of) = s.face_of_dart();
    let face_with_min = |m: u32| -> Result<u32> {
        for (fid, f) in faces.iter().enumerate() {
            let min = f.iter().filter(|d| d.1 == Color::R).map(|d| d.0).min().unwrap();
            if min == m {
                return Ok(fid as u32);
            }
        }
        Err(Error::Internal(format!("no face with minimal triangle {m}")))
    };
    let fid_u = face_with_min(fu)?;
    let fid_v = face_with_min(fv)?;
    let tau_r = s.tau(Color::R);
    for x in 0..s.triangle_count() as u32 {
        let y = tau_r.apply(x);
        if y == x {
            continue;
        }
        if of[x as usize * 3 + Color::R.index()] == fid_u
            && of[y as usize * 3 + Color::R.index()] == fid_v
        {
            return Ok((x, y));
        }
    }
    Err(Error::Internal(format!("no red edge between tree vertices {u} and {v}")))
}

/// Splits the red edge `{x, y}` after parking its endpoints at green-folded
/// path ends, merging the two horizontal paths back into one.
fn split_red_edge(driver: &mut Driver, x: u32, y: u32) -> Result<()> {
    let px = component_of(&driver.cur, Color::G, Color::B, x);
    let py = component_of(&driver.cur, Color::G, Color::B, y);
    if px.vertices == py.vertices {
        return Err(Error::Internal("cut edge does not span the two split paths".into()));
    }
    driver.power_until((Color::G, Color::B), px.anchor(), |s| {
        s.tau(Color::G).apply(x) == x
    })?;
    driver.power_until((Color::G, Color::B), py.anchor(), |s| {
        s.tau(Color::G).apply(y) == y
    })?;
    let rg = component_of(&driver.cur, Color::R, Color::G, x);
    let mut expect = vec![x, y];
    expect.sort_unstable();
    if rg.vertices != expect {
        return Err(Error::Internal("merge component is not the bare red edge".into()));
    }
    driver.shear((Color::R, Color::G), rg.anchor())
}

/// Realises one tree move on a path-like surface.  Returns the updated
/// tracked tree whose vertex ids match `apply_tree_move` on the input tree.
pub fn realize_tree_move(
    driver: &mut Driver,
    tracked: &TrackedPathLike,
    mv: &TreeMove,
) -> Result<TrackedPathLike> {
    let tree = &tracked.tree;
    let mut expected = apply_tree_move(tree, mv)?;
    match *mv {
        TreeMove::GlueCut { a, b, cut, parallel } => {
            let p = fold_of(tree, a)?;
            let q = fold_of(tree, b)?;
            // The red edge to cut must be resolved before any shear: either
            // the freshly glued pair (the folds p, q) or a pre-existing edge.
            let pa = tree.adj[a][0];
            let pb = tree.adj[b][0];
            let cut_is_new = !parallel
                && ((cut.0 == pa && cut.1 == pb) || (cut.0 == pb && cut.1 == pa));
            let old_edge = if cut_is_new {
                None
            } else {
                Some(red_edge_of_tree_edge(&driver.cur, tree, cut.0, cut.1)?)
            };
            // Bring the two half-edges next to a common green edge, then the
            // vertical shear joins them into a red edge.
            let gb = component_of(&driver.cur, Color::G, Color::B, p);
            driver.power_until((Color::G, Color::B), gb.anchor(), |s| {
                s.tau(Color::G).apply(p) == q
            })?;
            let rg = component_of(&driver.cur, Color::R, Color::G, p);
            let mut expect = vec![p, q];
            expect.sort_unstable();
            if rg.vertices != expect {
                return Err(Error::Internal("glue component is not the bare green edge".into()));
            }
            driver.shear((Color::R, Color::G), rg.anchor())?;
            // Split the cut edge; for a cut of the freshly created edge this
            // is the pair {p, q} itself.
            let (x, y) = old_edge.unwrap_or((p, q));
            // Orient so the new fold x sits on the side of cut.0.
            let (x, y) = if cut_is_new {
                (p, q)
            } else {
                // x must belong to the face of cut.0.
                (x, y)
            };
            split_red_edge(driver, x, y)?;
            // New leaves: id `a` carries the fold on the cut.0 side, id `b`
            // the other one.
            expected.origin[a] = Origin::Fold(x);
            expected.origin[b] = Origin::Fold(y);
            if cut_is_new {
                expected.origin[a] = Origin::Fold(p);
                expected.origin[b] = Origin::Fold(q);
            }
        }
        TreeMove::Exchange { lbar, v, w } => {
            let f = face_min_of(tree, lbar)?;
            let pv = fold_of(tree, v)?;
            let pw = fold_of(tree, w)?;
            // The 1-face's red edge.
            let e0 = f;
            let e1 = driver.cur.tau(Color::R).apply(f);
            if e1 == f {
                return Err(Error::Internal("1-face with a folded red edge".into()));
            }
            // Align: the vertical component through w's fold must become the
            // path [p_w, x, y, p_v] through the 1-face's red edge.
            let gb = component_of(&driver.cur, Color::G, Color::B, pw);
            let mut expect = vec![pw, pv, e0, e1];
            expect.sort_unstable();
            driver.power_until((Color::G, Color::B), gb.anchor(), |s| {
                let g = s.tau(Color::G);
                let end_w = g.apply(pw) == e0 || g.apply(pw) == e1;
                let end_v = g.apply(pv) == e0 || g.apply(pv) == e1;
                end_w && end_v && g.apply(pw) != g.apply(pv)
            })?;
            let rg = component_of(&driver.cur, Color::R, Color::G, pw);
            if rg.vertices != expect || rg.kind != ComponentKind::Path {
                return Err(Error::Internal(
                    "exchange component is not the four-vertex vertical path".into(),
                ));
            }
            driver.shear((Color::R, Color::G), rg.anchor())?;
            // The shear created the red edges {f, p_w} (feeding the moved
            // 1-face) and {e1, p_v}; splitting the latter restores a single
            // horizontal path and grows the two fresh half-edges.
            split_red_edge(driver, e1, pv)?;
            // Origin bookkeeping: the 1-face now sits at v's position; fresh
            // folds appear at the lbar and w positions, told apart by their
            // parent faces.
            expected.origin[v] = Origin::Face(min_of_product_cycle(&driver.cur, f));
            let parent_lbar = expected.adj[lbar][0];
            let parent_w = expected.adj[w][0];
            let face_of_fold = |s: &Surface, fold: u32| -> u32 {
                let (faces, of) = s.face_of_dart();
                let fid = of[fold as usize * 3 + Color::R.index()] as usize;
                faces[fid].iter().filter(|d| d.1 == Color::R).map(|d| d.0).min().unwrap()
            };
            let face_e1 = face_of_fold(&driver.cur, e1);
            let face_pv = face_of_fold(&driver.cur, pv);
            let want_lbar = face_min_of(&expected, parent_lbar)?;
            let want_w = face_min_of(&expected, parent_w)?;
            if face_e1 == want_lbar && (face_pv == want_w || parent_lbar != parent_w) {
                expected.origin[lbar] = Origin::Fold(e1);
                expected.origin[w] = Origin::Fold(pv);
            } else if face_pv == want_lbar {
                expected.origin[lbar] = Origin::Fold(pv);
                expected.origin[w] = Origin::Fold(e1);
            } else {
                expected.origin[lbar] = Origin::Fold(e1.min(pv));
                expected.origin[w] = Origin::Fold(e1.max(pv));
            }
        }
    }
    // The reached surface must extract to the expected tree.
    let extracted = tree_of_path_like(&driver.cur)?;
    if extracted.canonical_code() != expected.canonical_code() {
        return Err(Error::Internal(format!(
            "realised tree {} differs from the planned move's {}",
            String::from_utf8_lossy(&extracted.canonical_code()),
            String::from_utf8_lossy(&expected.canonical_code())
        )));
    }
    Ok(TrackedPathLike { tree: expected })
}

fn min_of_product_cycle(s: &Surface, v: u32) -> u32 {
    let product = s.vertex_product();
    let mut min = v;
    let mut cur = product.apply(v);
    while cur != v {
        min = min.min(cur);
        cur = product.apply(cur);
    }
    min
}

// ---------------------------------------------------------------------------
// Nice surfaces, including the special stratum ([1, 2^m, 3], 4)
// ---------------------------------------------------------------------------

fn is_special_profile(p: &Profile) -> bool {
    p.k == 4
        && p.mu_count(1) == 1
        && p.mu_count(3) == 1
        && p.mu.iter().all(|&x| x <= 3 && x != 0)
        && p.mu.iter().filter(|&&x| x == 3).count() == 1
        && p.mu.len() == 2 + p.mu_count(2)
}

/// Reaches a path-like surface whose tree is nice.
pub fn make_nice_surface(s: &Surface) -> Result<(Surface, MoveCertificate)> {
    if !is_path_like(s) {
        return Err(Error::Precondition("make_nice_surface needs a path-like input".into()));
    }
    let profile = s.profile();
    if profile.mu_count(1) > 1 {
        return Err(Error::Precondition("make_nice_surface needs mu_1 <= 1".into()));
    }
    let mut driver = Driver::new(s.clone());
    let mut tracked = track(s)?;
    if is_nice(&tracked.tree) {
        return Ok(driver.into_parts());
    }
    if is_special_profile(&profile) {
        special_stratum_nice(&mut driver)?;
        return Ok(driver.into_parts());
    }
    let plan = make_nice_plan(&tracked.tree)?;
    for mv in &plan {
        tracked = realize_tree_move(&mut driver, &tracked, mv)?;
    }
    if !is_nice(&tracked.tree) {
        return Err(Error::Internal("nice plan realisation is not nice".into()));
    }
    Ok(driver.into_parts())
}

/// The `([1, 2^m, 3], 4)` routine: one glue-and-cut brings an L-leaf next to
/// the degree-3 vertex, then an m-fold vertical shear power on the explicit
/// zig-zag path makes the tree nice.
fn special_stratum_nice(driver: &mut Driver) -> Result<()> {
    let mut tracked = track(&driver.cur)?;
    // One glue-and-cut joins the two L-leaves and cuts an edge at the
    // degree-3 vertex on the created cycle, unless an L-leaf already sits
    // there.
    let needs_glue = {
        let t = &tracked.tree;
        let u = (0..t.vertex_count())
            .find(|&v| t.degree(v) == 3)
            .ok_or_else(|| Error::Internal("special stratum without a degree-3 vertex".into()))?;
        !t.adj[u].iter().any(|&x| t.is_l_leaf(x))
    };
    if needs_glue {
        let t = &tracked.tree;
        let ls = t.l_leaves();
        if ls.len() != 2 {
            return Err(Error::Internal("special stratum with |L| != 2".into()));
        }
        let (a, b) = (ls[0], ls[1]);
        let u = (0..t.vertex_count()).find(|&v| t.degree(v) == 3).unwrap();
        // The created cycle is the a-b path; cut its edge at u toward a.
        let path = {
            // vertex path a -> b
            let mut parent = vec![usize::MAX; t.vertex_count()];
            let mut queue = std::collections::VecDeque::from([a]);
            parent[a] = a;
            while let Some(x) = queue.pop_front() {
                for &y in &t.adj[x] {
                    if parent[y] == usize::MAX {
                        parent[y] = x;
                        queue.push_back(y);
                    }
                }
            }
            let mut path = vec![b];
            let mut cur = b;
            while cur != a {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            path
        };
        let upos = path
            .iter()
            .position(|&x| x == u)
            .ok_or_else(|| Error::Internal("degree-3 vertex off the glue cycle".into()))?;
        let cut = (path[upos], path[upos - 1]);
        let mv = TreeMove::GlueCut { a, b, cut, parallel: false };
        tracked = realize_tree_move(driver, &tracked, &mv)?;
    }
    if is_nice(&tracked.tree) {
        return Ok(());
    }
    // m = number of degree-2 vertices between the degree-3 vertex and the
    // non-L leaf.
    let t = &tracked.tree;
    let u = (0..t.vertex_count()).find(|&v| t.degree(v) == 3).unwrap();
    let lbar = t.lbar_leaves()[0];
    let m = {
        let mut parent = vec![usize::MAX; t.vertex_count()];
        let mut queue = std::collections::VecDeque::from([u]);
        parent[u] = u;
        while let Some(x) = queue.pop_front() {
            for &y in &t.adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut dist = 0;
        let mut cur = lbar;
        while cur != u {
            cur = parent[cur];
            dist += 1;
        }
        dist - 1
    };
    if m == 0 {
        return Err(Error::Internal("tree not nice although m = 0".into()));
    }
    // Align: the surface's path sequence read from a green-folded end must
    // have the 1-face at position 0 with tau_R(seq[0]) = seq[2].
    let seq_candidates = |s: &Surface| -> Vec<Vec<u32>> {
        let comp = component_of(s, Color::G, Color::B, 0);
        let fwd = comp.order.clone();
        let mut bwd = fwd.clone();
        bwd.reverse();
        [fwd, bwd]
            .into_iter()
            .filter(|seq| s.tau(Color::G).apply(seq[0]) == seq[0])
            .collect()
    };
    let good_seq = |s: &Surface| -> Option<Vec<u32>> {
        seq_candidates(s)
            .into_iter()
            .find(|seq| s.tau(Color::R).apply(seq[0]) == seq[2])
    };
    let gb = component_of(&driver.cur, Color::G, Color::B, 0);
    driver.power_until((Color::G, Color::B), gb.anchor(), |s| good_seq(s).is_some())?;
    let seq = good_seq(&driver.cur).unwrap();
    // P = (1, 3, 2, 5, 4, ..., 2i+3, 2i+2, ..., 2m+3, 2m+2) in path positions.
    let mut expected: Vec<u32> = vec![seq[0]];
    for i in 0..=m {
        expected.push(seq[2 * i + 2]);
        expected.push(seq[2 * i + 1]);
    }
    expected.pop();
    let mut want: Vec<u32> = expected.clone();
    want.push(seq[2 * m + 1]);
    want.sort_unstable();
    let rg = component_of(&driver.cur, Color::R, Color::G, seq[0]);
    if rg.vertices != want || rg.kind != ComponentKind::Path {
        return Err(Error::Internal("special-stratum vertical path has the wrong shape".into()));
    }
    driver.cert.push(Move::Shear {
        colors: (Color::G, Color::R),
        anchor: rg.anchor(),
        power: m as i64,
    });
    for _ in 0..m {
        driver.cur = shear_unchecked(&driver.cur, &rg.vertices, (Color::G, Color::R));
    }
    if !is_path_like(&driver.cur) {
        return Err(Error::Internal("special-stratum shears left path-likeness".into()));
    }
    let t2 = tree_of_path_like(&driver.cur)?;
    if !is_nice(&t2) {
        return Err(Error::Internal("special-stratum routine did not reach a nice tree".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Spherical connection
// ---------------------------------------------------------------------------

/// Drives a spherical surface with `mu_1 <= 1` to the fiber of the canonical
/// caterpillar of its profile.
pub fn normalize_spherical(s: &Surface) -> Result<(Surface, MoveCertificate)> {
    let (p1, c1) = to_path_like(s)?;
    let mut driver = Driver::new(s.clone());
    driver.cur = p1;
    driver.cert = c1;
    let (p2, c2) = make_nice_surface(&driver.cur)?;
    driver.cur = p2;
    driver.cert.extend(&c2);
    let mut tracked = track(&driver.cur)?;
    // Caterpillar extension, one glue-and-cut at a time.
    let mut guard = 0;
    while let Some(mv) = next_caterpillar_move(&tracked.tree)? {
        tracked = realize_tree_move(&mut driver, &tracked, &mv)?;
        guard += 1;
        if guard > 2 * s.profile().k + 8 {
            return Err(Error::Internal("caterpillar realisation exceeded its budget".into()));
        }
    }
    // Spine sort: plan on the tracked tree, realise move by move.
    let (_, plan) = sort_spine(&tracked.tree)?;
    for mv in &plan {
        tracked = realize_tree_move(&mut driver, &tracked, mv)?;
    }
    let target = canonical_caterpillar(&s.profile())?;
    if tracked.tree.canonical_code() != target.canonical_code() {
        return Err(Error::Internal("normalisation missed the canonical caterpillar".into()));
    }
    Ok(driver.into_parts())
}

/// Certificate connecting two spherical surfaces of one stratum with
/// `mu_1 <= 1`: normalise both, align the fiber, splice the inverse.
pub fn connect_spherical(a: &Surface, b: &Surface) -> Result<MoveCertificate> {
    if a.profile() != b.profile() {
        return Err(Error::Precondition("profiles differ".into()));
    }
    if a.profile().genus() != Some(0) {
        return Err(Error::Precondition("connect_spherical needs spherical surfaces".into()));
    }
    if a.profile().mu_count(1) > 1 {
        return Err(Error::Precondition("connect_spherical needs mu_1 <= 1".into()));
    }
    let (a_end, mut cert) = normalize_spherical(a)?;
    let (b_end, cert_b) = normalize_spherical(b)?;
    // Fiber alignment: walk a's horizontal orbit to an exact-isomorphism
    // match of b's endpoint.
    let b_key = b_end.canonical_key();
    let mut driver = Driver::new(a_end.clone());
    let gb = component_of(&driver.cur, Color::G, Color::B, 0);
    driver.power_until((Color::G, Color::B), gb.anchor(), |s| s.canonical_key() == b_key)?;
    cert.extend(&driver.cert);
    // Relabel the inverse of b's certificate through the label isomorphism.
    let sigma = Perm::compose(&driver.cur.canonical_label().inverse(), &b_end.canonical_label());
    // sigma conjugates b_end to driver.cur.
    debug_assert_eq!(b_end.relabel(&sigma), driver.cur);
    cert.extend(&cert_b.inverted().relabel(&sigma));
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::{census, StratumOutcome};
    use crate::moves::replay;

    fn all_of(profile: &Profile) -> Vec<Surface> {
        match crate::explore::enumerate_stratum(profile, 12).unwrap() {
            StratumOutcome::Classes(v) => v,
            StratumOutcome::EmptyBecause(url) => panic!("stratum empty: {url}"),
        }
    }

    #[test]
    fn fusion_on_single_cycle_surface() {
        // Single GB-cycle of length 4 with red folds on both boundary lines.
        let s = Surface::new(
            Perm::identity(4),
            Perm::from_transpositions(4, &[(0, 1), (2, 3)]),
            Perm::from_transpositions(4, &[(0, 3), (1, 2)]),
        )
        .unwrap();
        assert_eq!(s.profile(), Profile::new(vec![2, 2], 4));
        let (reached, cert) = to_path_like(&s).unwrap();
        assert!(is_path_like(&reached));
        assert_eq!(replay(&s, &cert).unwrap(), reached);
    }

    #[test]
    fn to_path_like_small_strata() {
        for profile in [
            Profile::new(vec![2], 4),
            Profile::new(vec![3], 5),
            Profile::new(vec![1, 3], 4),
            Profile::new(vec![2, 2], 4),
        ] {
            for s in all_of(&profile) {
                let (reached, cert) = to_path_like(&s).unwrap();
                assert!(is_path_like(&reached), "{profile} member failed");
                assert_eq!(replay(&s, &cert).unwrap(), reached);
                assert_eq!(reached.profile(), profile);
            }
        }
    }

    #[test]
    fn normalize_small_strata() {
        for profile in [
            Profile::new(vec![2], 4),
            Profile::new(vec![3], 5),
            Profile::new(vec![2, 2], 4),
            Profile::new(vec![1, 3], 4),
        ] {
            let target = canonical_caterpillar(&profile).unwrap();
            for s in all_of(&profile) {
                let (end, cert) = normalize_spherical(&s).unwrap();
                assert_eq!(replay(&s, &cert).unwrap(), end);
                let t = tree_of_path_like(&end).unwrap();
                assert_eq!(t.canonical_code(), target.canonical_code());
            }
        }
    }

    #[test]
    fn connect_pairs_in_st24() {
        let stratum = all_of(&Profile::new(vec![2], 4));
        for x in &stratum {
            for y in &stratum {
                let cert = connect_spherical(x, y).unwrap();
                let end = replay(x, &cert).unwrap();
                assert!(end.is_isomorphic(y));
            }
        }
    }

    #[test]
    fn special_stratum_is_handled() {
        // ([1, 2, 3], 4): n = 6.
        let profile = Profile::new(vec![1, 2, 3], 4);
        assert!(profile.is_spherical());
        let members = all_of(&profile);
        assert!(!members.is_empty());
        for s in &members {
            let (p, cert) = to_path_like(s).unwrap();
            let (nice, cert2) = make_nice_surface(&p).unwrap();
            assert!(is_nice(&tree_of_path_like(&nice).unwrap()));
            let mut full = cert.clone();
            full.extend(&cert2);
            assert_eq!(replay(s, &full).unwrap(), nice);
        }
    }

    #[test]
    fn connect_special_stratum_pairs() {
        let members = all_of(&Profile::new(vec![1, 2, 3], 4));
        let a = &members[0];
        for b in &members {
            let cert = connect_spherical(a, b).unwrap();
            assert!(replay(a, &cert).unwrap().is_isomorphic(b));
        }
    }
}
