//! Bichromatic components, cylinder shears, half cylinder shears, and
//! replayable move certificates.

use crate::perm::Perm;
use crate::surface::{Color, Error, Result, Surface};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Path,
    Cycle,
}

/// One orbit of `<tau_i, tau_j>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Unordered colour pair, stored with the lower colour first.
    pub colors: (Color, Color),
    /// Sorted vertex set.
    pub vertices: Vec<u32>,
    pub kind: ComponentKind,
    /// Traversal: endpoint-to-endpoint for a path (starting at the smaller
    /// endpoint), or the rotation starting at the minimal vertex and stepping
    /// toward the smaller neighbour for a cycle.
    pub order: Vec<u32>,
}

impl Component {
    pub fn anchor(&self) -> u32 {
        self.vertices[0]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

fn sorted_pair(a: Color, b: Color) -> (Color, Color) {
    if a.index() <= b.index() {
        (a, b)
    } else {
        (b, a)
    }
}

/// The `{i,j}`-component containing `v`.
pub fn component_of(s: &Surface, a: Color, b: Color, v: u32) -> Component {
    let (a, b) = sorted_pair(a, b);
    let (ta, tb) = (s.tau(a), s.tau(b));
    // Collect the orbit.
    let mut stack = vec![v];
    let mut in_orbit = std::collections::BTreeSet::new();
    in_orbit.insert(v);
    while let Some(x) = stack.pop() {
        for y in [ta.apply(x), tb.apply(x)] {
            if in_orbit.insert(y) {
                stack.push(y);
            }
        }
    }
    let vertices: Vec<u32> = in_orbit.into_iter().collect();
    let is_end = |x: u32| ta.apply(x) == x || tb.apply(x) == x;
    let ends: Vec<u32> = vertices.iter().copied().filter(|&x| is_end(x)).collect();
    let kind = if ends.is_empty() {
        ComponentKind::Cycle
    } else {
        ComponentKind::Path
    };
    let order = match kind {
        ComponentKind::Path => {
            let start = ends[0];
            let mut order = vec![start];
            // Leave through the colour that moves, alternating afterwards.
            let mut prev = start;
            let mut via = if ta.apply(start) != start { a } else { b };
            if s.tau(via).apply(start) == start {
                // Isolated vertex: both colours fixed.
                return Component { colors: (a, b), vertices, kind, order };
            }
            loop {
                let next = s.tau(via).apply(prev);
                order.push(next);
                via = if via == a { b } else { a };
                if s.tau(via).apply(next) == next {
                    break;
                }
                prev = next;
            }
            order
        }
        ComponentKind::Cycle => {
            let start = vertices[0];
            let (na, nb) = (ta.apply(start), tb.apply(start));
            let mut via = if na <= nb { a } else { b };
            let mut order = vec![start];
            let mut cur = start;
            loop {
                let next = s.tau(via).apply(cur);
                if next == start {
                    break;
                }
                order.push(next);
                via = if via == a { b } else { a };
                cur = next;
            }
            order
        }
    };
    Component { colors: (a, b), vertices, kind, order }
}

/// All `{i,j}`-components, listed by minimal vertex.
pub fn components(s: &Surface, a: Color, b: Color) -> Vec<Component> {
    let mut seen = vec![false; s.triangle_count()];
    let mut out = Vec::new();
    for v in 0..s.triangle_count() as u32 {
        if seen[v as usize] {
            continue;
        }
        let comp = component_of(s, a, b, v);
        for &x in &comp.vertices {
            seen[x as usize] = true;
        }
        out.push(comp);
    }
    out
}

/// Checks that `c` is a live component of `s` (same orbit, same vertex set).
fn check_live(s: &Surface, c: &Component) -> Result<()> {
    let fresh = component_of(s, c.colors.0, c.colors.1, c.anchor());
    if fresh.vertices == c.vertices {
        Ok(())
    } else {
        Err(Error::StaleComponent(c.anchor()))
    }
}

fn restriction(tau: &Perm, vertices: &[u32]) -> Perm {
    let mut images: Vec<u32> = (0..tau.len() as u32).collect();
    for &v in vertices {
        images[v as usize] = tau.apply(v);
    }
    Perm::from_images(images)
}

/// The `(i,j)`-shear along `c`: multiplies `tau_i` and `tau_j` on the right
/// by `c_i . c_j` and leaves the third involution unchanged.
pub fn shear(s: &Surface, c: &Component, ordered: (Color, Color)) -> Result<Surface> {
    let (i, j) = ordered;
    if sorted_pair(i, j) != c.colors {
        return Err(Error::Precondition(format!(
            "component has colours {}{}, shear asked for {}{}",
            c.colors.0, c.colors.1, i, j
        )));
    }
    check_live(s, c)?;
    Ok(shear_unchecked(s, &c.vertices, ordered))
}

pub(crate) fn shear_unchecked(s: &Surface, vertices: &[u32], ordered: (Color, Color)) -> Surface {
    let (i, j) = ordered;
    let ci = restriction(s.tau(i), vertices);
    let cj = restriction(s.tau(j), vertices);
    let multiplier = Perm::compose(&ci, &cj);
    let mut tau = [s.tau(Color::R).clone(), s.tau(Color::G).clone(), s.tau(Color::B).clone()];
    tau[i.index()] = Perm::compose(s.tau(i), &multiplier);
    tau[j.index()] = Perm::compose(s.tau(j), &multiplier);
    let [r, g, b] = tau;
    Surface::new_unchecked(r, g, b)
}

/// Simultaneous shear in every `{i,j}`-component (the SL2 move generators).
pub fn shear_all(s: &Surface, ordered: (Color, Color)) -> Surface {
    let all: Vec<u32> = (0..s.triangle_count() as u32).collect();
    shear_unchecked(s, &all, ordered)
}

/// `p`-fold iterate of the `(i,j)`-shear; negative powers use `(j,i)`.
/// Powers are reduced modulo the (finite) orbit length, computed on the fly.
pub fn shear_power(s: &Surface, c: &Component, ordered: (Color, Color), p: i64) -> Result<Surface> {
    if sorted_pair(ordered.0, ordered.1) != c.colors {
        return Err(Error::Precondition("colour pair mismatch".into()));
    }
    check_live(s, c)?;
    if p == 0 {
        return Ok(s.clone());
    }
    let mut orbit = vec![s.clone()];
    loop {
        let next = shear_unchecked(orbit.last().unwrap(), &c.vertices, ordered);
        if next == orbit[0] {
            break;
        }
        orbit.push(next);
    }
    let idx = p.rem_euclid(orbit.len() as i64) as usize;
    Ok(orbit.swap_remove(idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// The cycle is a `{G,B}`-component; the half shear modifies `tau_R`.
    Horizontal,
    /// The cycle is a `{R,G}`-component; the half shear modifies `tau_B`.
    Vertical,
}

impl Orientation {
    pub fn cycle_colors(self) -> (Color, Color) {
        match self {
            Orientation::Horizontal => (Color::G, Color::B),
            Orientation::Vertical => (Color::R, Color::G),
        }
    }

    pub fn changed_color(self) -> Color {
        match self {
            Orientation::Horizontal => Color::R,
            Orientation::Vertical => Color::B,
        }
    }
}

/// Splits a `{i,j}`-cycle into its two double-step orbits (the alternation
/// classes); returns the class containing `side` first.
pub fn cycle_sides(c: &Component, side: u32) -> Result<(Vec<u32>, Vec<u32>)> {
    if c.kind != ComponentKind::Cycle {
        return Err(Error::HalfShear("component is not a cycle".into()));
    }
    if !c.contains(side) {
        return Err(Error::HalfShear(format!(
            "side vertex {} not in the cycle anchored at {}",
            side + 1,
            c.anchor() + 1
        )));
    }
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    for (idx, &v) in c.order.iter().enumerate() {
        if idx % 2 == 0 {
            s1.push(v);
        } else {
            s2.push(v);
        }
    }
    s1.sort_unstable();
    s2.sort_unstable();
    if s1.binary_search(&side).is_ok() {
        Ok((s1, s2))
    } else {
        Ok((s2, s1))
    }
}

/// What an admissible half shear would trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfShearFlavor {
    /// The bounded side carries exactly two 1-faces (and hexagons).
    OneFaces,
    /// The bounded side carries exactly two half-edges of the changed colour.
    HalfEdges,
}

/// Admissibility of the half shear on cycle `c` with sub-orbit `c1`:
/// `c1` stable under the changed colour, and the faces bounded on the `c1`
/// side are hexagons plus either exactly two 1-faces or exactly two
/// half-edges of the changed colour.
pub fn half_shear_admissible(
    s: &Surface,
    orientation: Orientation,
    c: &Component,
    side: u32,
) -> Result<HalfShearFlavor> {
    if c.colors != orientation.cycle_colors() {
        return Err(Error::HalfShear(format!(
            "expected a {}{}-cycle",
            orientation.cycle_colors().0,
            orientation.cycle_colors().1
        )));
    }
    check_live(s, c).map_err(|_| Error::HalfShear("stale component".into()))?;
    let (c1, _) = cycle_sides(c, side)?;
    let changed = orientation.changed_color();
    let tc = s.tau(changed);
    for &v in &c1 {
        if c1.binary_search(&tc.apply(v)).is_err() {
            return Err(Error::HalfShear(format!(
                "sub-orbit not stable under tau{changed}"
            )));
        }
    }
    let folds = c1.iter().filter(|&&v| tc.apply(v) == v).count();
    let (faces, of) = s.face_of_dart();
    let mut region: Vec<u32> = c1
        .iter()
        .map(|&v| of[v as usize * 3 + changed.index()])
        .collect();
    region.sort_unstable();
    region.dedup();
    let mut ones = 0usize;
    for &f in &region {
        match faces[f as usize].len() {
            3 => ones += 1,
            6 => {}
            _ => {
                return Err(Error::HalfShear(
                    "bounded side not admissible: face of degree > 6".into(),
                ))
            }
        }
        // Region closure sanity: changed-colour darts of region faces stay in c1.
        for &(v, col) in &faces[f as usize] {
            if col == changed && c1.binary_search(&v).is_err() {
                return Err(Error::HalfShear(
                    "bounded side not admissible: region leaks outside the sub-orbit".into(),
                ));
            }
        }
    }
    match (folds, ones) {
        (0, 2) => Ok(HalfShearFlavor::OneFaces),
        (2, 0) => Ok(HalfShearFlavor::HalfEdges),
        _ => Err(Error::HalfShear(format!(
            "bounded side not admissible: {folds} half-edges and {ones} 1-faces"
        ))),
    }
}

/// The half cylinder shear along `c` with sub-orbit `c1`.  Forward composes
/// the changed involution with the double step one way; inverse is the exact
/// undoing map.
pub fn half_shear(
    s: &Surface,
    orientation: Orientation,
    c: &Component,
    side: u32,
    inverse: bool,
) -> Result<Surface> {
    half_shear_admissible(s, orientation, c, side)?;
    let (c1, _) = cycle_sides(c, side)?;
    let changed = orientation.changed_color();
    // Horizontal forward: tau'_R = tau_G . tau_B . tau_R on c1.
    // Vertical forward:   tau'_B = tau_G . tau_R . tau_B on c1.
    let (outer, mid) = match (orientation, inverse) {
        (Orientation::Horizontal, false) => (Color::G, Color::B),
        (Orientation::Horizontal, true) => (Color::B, Color::G),
        (Orientation::Vertical, false) => (Color::G, Color::R),
        (Orientation::Vertical, true) => (Color::R, Color::G),
    };
    let mut images: Vec<u32> = (0..s.triangle_count() as u32)
        .map(|v| s.tau(changed).apply(v))
        .collect();
    for &v in &c1 {
        images[v as usize] = s
            .tau(outer)
            .apply(s.tau(mid).apply(s.tau(changed).apply(v)));
    }
    let new_tc = Perm::from_images(images);
    if !new_tc.is_involution() {
        return Err(Error::HalfShear(
            "result of half shear is not an involution".into(),
        ));
    }
    let mut tau = [s.tau(Color::R).clone(), s.tau(Color::G).clone(), s.tau(Color::B).clone()];
    tau[changed.index()] = new_tc;
    let [r, g, b] = tau;
    let out = Surface::new(r, g, b).map_err(|e| Error::HalfShear(e.to_string()))?;
    Ok(out)
}

/// Enumerates every admissible `(orientation, cycle, side, flavor)`.
pub fn admissible_half_shears(
    s: &Surface,
) -> Vec<(Orientation, Component, u32, HalfShearFlavor)> {
    let mut out = Vec::new();
    for orientation in [Orientation::Horizontal, Orientation::Vertical] {
        let (a, b) = orientation.cycle_colors();
        for c in components(s, a, b) {
            if c.kind != ComponentKind::Cycle {
                continue;
            }
            let mut sides = vec![c.order[0]];
            if c.order.len() > 1 {
                sides.push(c.order[1]);
            }
            for side_rep in sides {
                let (c1, _) = cycle_sides(&c, side_rep).unwrap();
                let side = c1[0];
                if let Ok(flavor) = half_shear_admissible(s, orientation, &c, side) {
                    out.push((orientation, c.clone(), side, flavor));
                }
            }
        }
    }
    out
}

/// A single replayable move.  Anchors name any vertex of the component at
/// application time (the minimal vertex when emitted by this crate).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Move {
    Shear {
        colors: (Color, Color),
        anchor: u32,
        power: i64,
    },
    HalfShear {
        orientation: Orientation,
        anchor: u32,
        side: u32,
        inverse: bool,
    },
}

impl Move {
    pub fn inverted(&self) -> Move {
        match self {
            Move::Shear { colors, anchor, power } => Move::Shear {
                colors: *colors,
                anchor: *anchor,
                power: -power,
            },
            Move::HalfShear { orientation, anchor, side, inverse } => Move::HalfShear {
                orientation: *orientation,
                anchor: *anchor,
                side: *side,
                inverse: !inverse,
            },
        }
    }

    pub fn relabel(&self, sigma: &Perm) -> Move {
        match self {
            Move::Shear { colors, anchor, power } => Move::Shear {
                colors: *colors,
                anchor: sigma.apply(*anchor),
                power: *power,
            },
            Move::HalfShear { orientation, anchor, side, inverse } => Move::HalfShear {
                orientation: *orientation,
                anchor: sigma.apply(*anchor),
                side: sigma.apply(*side),
                inverse: *inverse,
            },
        }
    }
}

/// An ordered, invertible list of anchored moves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MoveCertificate {
    moves: Vec<Move>,
}

impl MoveCertificate {
    pub fn new() -> Self {
        MoveCertificate { moves: Vec::new() }
    }

    pub fn from_moves(moves: Vec<Move>) -> Self {
        MoveCertificate { moves }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, mv: Move) {
        self.moves.push(mv);
    }

    pub fn extend(&mut self, other: &MoveCertificate) {
        self.moves.extend(other.moves.iter().cloned());
    }

    /// Reverses the order and flips every move.
    pub fn inverted(&self) -> MoveCertificate {
        MoveCertificate {
            moves: self.moves.iter().rev().map(Move::inverted).collect(),
        }
    }

    pub fn relabel(&self, sigma: &Perm) -> MoveCertificate {
        MoveCertificate {
            moves: self.moves.iter().map(|m| m.relabel(sigma)).collect(),
        }
    }
}

/// Applies one move to a surface.
pub fn apply_move(s: &Surface, mv: &Move) -> Result<Surface> {
    match mv {
        Move::Shear { colors: (i, j), anchor, power } => {
            if *anchor as usize >= s.triangle_count() {
                return Err(Error::Precondition(format!(
                    "anchor {} out of range",
                    anchor + 1
                )));
            }
            let c = component_of(s, *i, *j, *anchor);
            shear_power(s, &c, (*i, *j), *power)
        }
        Move::HalfShear { orientation, anchor, side, inverse } => {
            if *anchor as usize >= s.triangle_count() {
                return Err(Error::Precondition(format!(
                    "anchor {} out of range",
                    anchor + 1
                )));
            }
            let (a, b) = orientation.cycle_colors();
            let c = component_of(s, a, b, *anchor);
            half_shear(s, *orientation, &c, *side, *inverse)
        }
    }
}

/// Deterministic replay; reports the index of the first failing move.
pub fn replay(start: &Surface, cert: &MoveCertificate) -> Result<Surface> {
    let mut cur = start.clone();
    for (index, mv) in cert.moves.iter().enumerate() {
        cur = apply_move(&cur, mv).map_err(|e| Error::Certificate {
            index,
            reason: e.to_string(),
        })?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    /// Spherical surface with two 1-faces on one side of its single GB-cycle.
    fn two_one_faces() -> Surface {
        Surface::new(
            Perm::from_transpositions(4, &[(0, 2)]),
            Perm::from_transpositions(4, &[(0, 1), (2, 3)]),
            Perm::from_transpositions(4, &[(0, 3), (1, 2)]),
        )
        .unwrap()
    }

    #[test]
    fn torus_components() {
        let s = torus();
        let comps = components(&s, Color::G, Color::B);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind, ComponentKind::Cycle);
        assert_eq!(comps[0].order, vec![0, 1]);
    }

    #[test]
    fn path_components_both_pairs() {
        let s = two_triangle_path();
        let gb = components(&s, Color::G, Color::B);
        assert_eq!(gb.len(), 1);
        assert_eq!(gb[0].kind, ComponentKind::Path);
        assert_eq!(gb[0].order, vec![0, 1]);
        let rg = components(&s, Color::R, Color::G);
        assert_eq!(rg.len(), 1);
        assert_eq!(rg[0].kind, ComponentKind::Path);
    }

    #[test]
    fn torus_shear_is_identity() {
        let s = torus();
        let c = component_of(&s, Color::G, Color::B, 0);
        let sheared = shear(&s, &c, (Color::G, Color::B)).unwrap();
        assert_eq!(sheared, s);
    }

    #[test]
    fn horizontal_shear_swaps_roles_on_the_path() {
        let s = two_triangle_path();
        let c = component_of(&s, Color::G, Color::B, 0);
        let sheared = shear(&s, &c, (Color::B, Color::G)).unwrap();
        let expected = Surface::new(
            Perm::identity(2),
            Perm::identity(2),
            Perm::from_transpositions(2, &[(0, 1)]),
        )
        .unwrap();
        assert!(sheared.is_isomorphic(&expected));
    }

    #[test]
    fn shear_inverse_pair_is_identity() {
        for s in [torus(), two_triangle_path(), two_one_faces()] {
            for (a, b) in [(Color::G, Color::B), (Color::R, Color::G)] {
                for c in components(&s, a, b) {
                    let forward = shear(&s, &c, (a, b)).unwrap();
                    let back = shear(&forward, &c, (b, a)).unwrap();
                    assert_eq!(back, s);
                    let p = shear_power(&s, &c, (a, b), 3).unwrap();
                    let q = shear_power(&p, &c, (a, b), -3).unwrap();
                    assert_eq!(q, s);
                }
            }
        }
    }

    #[test]
    fn shear_power_reduces_modulo_orbit() {
        let s = two_triangle_path();
        let c = component_of(&s, Color::G, Color::B, 0);
        // Find the orbit length by iterating.
        let mut len = 0;
        let mut cur = s.clone();
        loop {
            cur = shear(&cur, &c, (Color::G, Color::B)).unwrap();
            len += 1;
            if cur == s {
                break;
            }
        }
        let a = shear_power(&s, &c, (Color::G, Color::B), 2).unwrap();
        let b = shear_power(&s, &c, (Color::G, Color::B), 2 + len).unwrap();
        assert_eq!(a, b);
        assert_eq!(shear_power(&s, &c, (Color::G, Color::B), 0).unwrap(), s);
    }

    #[test]
    fn half_shear_trades_one_faces_for_half_edges() {
        let s = two_one_faces();
        assert_eq!(s.profile(), crate::surface::Profile::new(vec![1, 1, 2], 2));
        let c = component_of(&s, Color::G, Color::B, 0);
        assert_eq!(c.kind, ComponentKind::Cycle);
        // Side {1,3} carries the two 1-faces.
        let flavor = half_shear_admissible(&s, Orientation::Horizontal, &c, 0).unwrap();
        assert_eq!(flavor, HalfShearFlavor::OneFaces);
        let sheared = half_shear(&s, Orientation::Horizontal, &c, 0, false).unwrap();
        assert_eq!(
            sheared.profile(),
            crate::surface::Profile::new(vec![2, 2], 4)
        );
        assert_eq!(sheared.genus(), 0);
        // The inverse undoes it bit-exactly.
        let c2 = component_of(&sheared, Color::G, Color::B, 0);
        let back = half_shear(&sheared, Orientation::Horizontal, &c2, 0, true).unwrap();
        assert_eq!(back, s);
        // The other side carries two red half-edges plus a hexagon.
        let flavor2 = half_shear_admissible(&s, Orientation::Horizontal, &c, 1).unwrap();
        assert_eq!(flavor2, HalfShearFlavor::HalfEdges);
        let pillow = half_shear(&s, Orientation::Horizontal, &c, 1, false).unwrap();
        assert_eq!(
            pillow.profile(),
            crate::surface::Profile::new(vec![1, 1, 1, 1], 0)
        );
        assert_eq!(pillow.genus(), 0);
    }

    #[test]
    fn two_half_shears_compose_to_a_full_shear_up_to_iso() {
        let s = two_one_faces();
        let c = component_of(&s, Color::G, Color::B, 0);
        let first = half_shear(&s, Orientation::Horizontal, &c, 0, false).unwrap();
        let c1 = component_of(&first, Color::G, Color::B, 0);
        let second = half_shear(&first, Orientation::Horizontal, &c1, 1, false).unwrap();
        let full = shear(&s, &c, (Color::B, Color::G)).unwrap();
        assert!(second.is_isomorphic(&full));
    }

    #[test]
    fn certificates_replay_and_invert() {
        let s = two_one_faces();
        let mut cert = MoveCertificate::new();
        cert.push(Move::Shear { colors: (Color::G, Color::B), anchor: 0, power: 1 });
        cert.push(Move::HalfShear {
            orientation: Orientation::Horizontal,
            anchor: 0,
            side: 0,
            inverse: false,
        });
        let end = replay(&s, &cert).unwrap();
        let mut round = cert.clone();
        round.extend(&cert.inverted());
        assert_eq!(replay(&s, &round).unwrap(), s);
        assert_ne!(end, s);
        // Empty certificate is the identity.
        assert_eq!(replay(&s, &MoveCertificate::new()).unwrap(), s);
    }

    #[test]
    fn stale_components_are_rejected() {
        let s = two_one_faces();
        let c = component_of(&s, Color::R, Color::G, 0);
        // Shear the surface so the RG-orbits change, then replay the old component.
        let gb = component_of(&s, Color::G, Color::B, 0);
        let moved = shear(&s, &gb, (Color::G, Color::B)).unwrap();
        let fresh = component_of(&moved, Color::R, Color::G, c.anchor());
        if fresh.vertices != c.vertices {
            assert!(matches!(
                shear(&moved, &c, (Color::R, Color::G)),
                Err(Error::StaleComponent(_))
            ));
        }
    }
}
