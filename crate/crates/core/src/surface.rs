//! The square-tiled surface type and its structural invariants.

use crate::perm::Perm;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tau{} is not an involution (witness triangle {})", color, witness + 1)]
    NotInvolution { color: Color, witness: u32 },
    #[error("not transitive: triangles {} and {} lie in different orbits", a + 1, b + 1)]
    NotTransitive { a: u32, b: u32 },
    #[error("{0} is not an automorphism (witness triangle {})", .1 + 1)]
    NotAutomorphism(Color, u32),
    #[error("stale component: anchor {} does not span the given vertices", .0 + 1)]
    StaleComponent(u32),
    #[error("certificate does not apply at move {index}: {reason}")]
    Certificate { index: usize, reason: String },
    #[error("half shear rejected: {0}")]
    HalfShear(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Color {
    R = 0,
    G = 1,
    B = 2,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::R, Color::G, Color::B];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Cyclic successor in the face orientation R -> G -> B -> R.
    pub fn next(self) -> Color {
        match self {
            Color::R => Color::G,
            Color::G => Color::B,
            Color::B => Color::R,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::R => 'R',
            Color::G => 'G',
            Color::B => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Color> {
        match c {
            'R' | 'r' => Some(Color::R),
            'G' | 'g' => Some(Color::G),
            'B' | 'b' => Some(Color::B),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A dart is a (triangle, colour) pair; there are exactly `3n` of them.
pub type Dart = (u32, Color);

/// Face degrees divided by three, as a multiset, plus the half-edge count.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Profile {
    /// Sorted ascending, one entry per face: a face of degree `3i` contributes `i`.
    pub mu: Vec<usize>,
    /// Total number of fixed points over the three involutions.
    pub k: usize,
}

impl Profile {
    pub fn new(mut mu: Vec<usize>, k: usize) -> Self {
        mu.sort_unstable();
        Profile { mu, k }
    }

    /// Number of triangles, `n = sum_i mu_i * i`.
    pub fn triangle_count(&self) -> usize {
        self.mu.iter().sum()
    }

    /// Multiplicity of the part `i`.
    pub fn mu_count(&self, i: usize) -> usize {
        self.mu.iter().filter(|&&p| p == i).count()
    }

    /// `4g - 4 = sum_i mu_i (i - 2) - k`, if it has an integer solution `g >= 0`.
    pub fn genus(&self) -> Option<usize> {
        let lhs: i64 = self.mu.iter().map(|&i| i as i64 - 2).sum::<i64>() - self.k as i64 + 4;
        if lhs >= 0 && lhs % 4 == 0 {
            Some((lhs / 4) as usize)
        } else {
            None
        }
    }

    pub fn is_spherical(&self) -> bool {
        self.genus() == Some(0)
    }

    /// `3n - k = 2 sum_i mu_{2i} (mod 4)`.
    pub fn satisfies_parity(&self) -> bool {
        let n = self.triangle_count();
        let even_parts = self.mu.iter().filter(|&&p| p % 2 == 0).count();
        (3 * n as i64 - self.k as i64).rem_euclid(4) == (2 * even_parts as i64).rem_euclid(4)
    }

    /// Profile with the parts equal to 2 (regular points) removed.
    pub fn reduced(&self) -> Profile {
        Profile {
            mu: self.mu.iter().copied().filter(|&p| p != 2).collect(),
            k: self.k,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        let mut first = true;
        let mut i = 0;
        while i < self.mu.len() {
            let part = self.mu[i];
            let mut mult = 1;
            while i + mult < self.mu.len() && self.mu[i + mult] == part {
                mult += 1;
            }
            if !first {
                write!(f, ",")?;
            }
            first = false;
            if mult == 1 {
                write!(f, "{part}")?;
            } else {
                write!(f, "{part}^{mult}")?;
            }
            i += mult;
        }
        write!(f, "] k={}", self.k)
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A square-tiled surface: three involutions acting transitively on `{0..n-1}`.
///
/// Construction goes through [`Surface::new`], which checks the involution
/// conditions and transitivity, so a held `Surface` is always valid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Surface {
    n: usize,
    tau: [Perm; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HyperellipticStatus {
    NotApplicable,
    Member,
    NonMember,
}

impl Surface {
    pub fn new(tau_r: Perm, tau_g: Perm, tau_b: Perm) -> Result<Surface> {
        let s = Surface {
            n: tau_r.len(),
            tau: [tau_r, tau_g, tau_b],
        };
        s.validate()?;
        Ok(s)
    }

    /// Builds without re-validating.  For internal use on moves already known
    /// to preserve validity; debug builds still assert.
    pub(crate) fn new_unchecked(tau_r: Perm, tau_g: Perm, tau_b: Perm) -> Surface {
        let s = Surface {
            n: tau_r.len(),
            tau: [tau_r, tau_g, tau_b],
        };
        debug_assert!(s.validate().is_ok());
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Precondition("empty surface".into()));
        }
        for c in Color::ALL {
            if self.tau[c.index()].len() != self.n {
                return Err(Error::Precondition(format!(
                    "tau{} acts on {} points, expected {}",
                    c,
                    self.tau[c.index()].len(),
                    self.n
                )));
            }
            if let Some(w) = self.tau[c.index()].involution_witness() {
                return Err(Error::NotInvolution { color: c, witness: w });
            }
        }
        // Transitivity via union-find over the three edge sets.
        let mut parent: Vec<u32> = (0..self.n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for c in Color::ALL {
            for x in 0..self.n as u32 {
                let y = self.tau[c.index()].apply(x);
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx as usize] = ry;
                }
            }
        }
        let root = find(&mut parent, 0);
        for x in 1..self.n as u32 {
            if find(&mut parent, x) != root {
                return Err(Error::NotTransitive { a: 0, b: x });
            }
        }
        Ok(())
    }

    pub fn triangle_count(&self) -> usize {
        self.n
    }

    pub fn tau(&self, c: Color) -> &Perm {
        &self.tau[c.index()]
    }

    /// Total number of half-edges (fixed points over the three involutions).
    pub fn half_edge_count(&self) -> usize {
        Color::ALL
            .iter()
            .map(|&c| self.tau[c.index()].count_fixed_points())
            .sum()
    }

    pub fn half_edges(&self, c: Color) -> Vec<u32> {
        self.tau[c.index()].fixed_points().collect()
    }

    /// The vertex-level face product `tau_B . tau_G . tau_R` (tau_R first).
    /// Its cycles are in bijection with the faces; it is invariant under all
    /// six cylinder shears.
    pub fn vertex_product(&self) -> Perm {
        Perm::compose(
            &self.tau[Color::B.index()],
            &Perm::compose(&self.tau[Color::G.index()], &self.tau[Color::R.index()]),
        )
    }

    /// Image of a dart under the face permutation: rotate colour forward
    /// after the edge involution (half-edge darts are fixed by the latter).
    pub fn face_next(&self, d: Dart) -> Dart {
        (self.tau[d.1.index()].apply(d.0), d.1.next())
    }

    /// Orbits of the face permutation, each an ordered dart cycle.  Orbits are
    /// listed by their minimal dart, starting at it.
    pub fn faces(&self) -> Vec<Vec<Dart>> {
        let mut seen = vec![false; 3 * self.n];
        let mut out = Vec::new();
        for v in 0..self.n as u32 {
            for c in Color::ALL {
                let id = v as usize * 3 + c.index();
                if seen[id] {
                    continue;
                }
                let start = (v, c);
                let mut orbit = Vec::new();
                let mut d = start;
                loop {
                    seen[d.0 as usize * 3 + d.1.index()] = true;
                    orbit.push(d);
                    d = self.face_next(d);
                    if d == start {
                        break;
                    }
                }
                out.push(orbit);
            }
        }
        out
    }

    /// Map from dart to the index of its face in `faces()`.
    pub fn face_of_dart(&self) -> (Vec<Vec<Dart>>, Vec<u32>) {
        let faces = self.faces();
        let mut of = vec![0u32; 3 * self.n];
        for (i, f) in faces.iter().enumerate() {
            for &(v, c) in f {
                of[v as usize * 3 + c.index()] = i as u32;
            }
        }
        (faces, of)
    }

    pub fn profile(&self) -> Profile {
        let product = self.vertex_product();
        let mu = product.cycle_type();
        let profile = Profile::new(mu, self.half_edge_count());
        // The dart-level faces must agree with the vertex-level product.
        debug_assert!({
            let mut dart_mu: Vec<usize> = self
                .faces()
                .iter()
                .map(|f| {
                    assert!(f.len() % 3 == 0);
                    f.len() / 3
                })
                .collect();
            dart_mu.sort_unstable();
            dart_mu == profile.mu
        });
        profile
    }

    pub fn genus(&self) -> usize {
        match self.profile().genus() {
            Some(g) => g,
            None => unreachable!("Euler formula has no solution for a valid surface"),
        }
    }

    /// Asserts the parity law `3n - k = 2 sum mu_{2i} (mod 4)`.
    pub fn check_parity(&self) -> Result<()> {
        if self.profile().satisfies_parity() {
            Ok(())
        } else {
            Err(Error::Internal("parity law violated".into()))
        }
    }

    /// `Some(classes)` iff the surface is Abelian: no half-edges and the
    /// transposition graph bipartite.  `classes[v]` is true on the side of
    /// triangle 0.
    pub fn abelian_bipartition(&self) -> Option<Vec<bool>> {
        if self.half_edge_count() != 0 {
            return None;
        }
        let mut side = vec![None::<bool>; self.n];
        let mut queue = std::collections::VecDeque::new();
        side[0] = Some(true);
        queue.push_back(0u32);
        while let Some(x) = queue.pop_front() {
            let sx = side[x as usize].unwrap();
            for c in Color::ALL {
                let y = self.tau[c.index()].apply(x);
                match side[y as usize] {
                    None => {
                        side[y as usize] = Some(!sx);
                        queue.push_back(y);
                    }
                    Some(sy) => {
                        if sy == sx {
                            return None;
                        }
                    }
                }
            }
        }
        Some(side.into_iter().map(|s| s.unwrap()).collect())
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian_bipartition().is_some()
    }

    /// Compact byte encoding of the triple, usable as a dedup key.
    /// One byte per image; the crate is desk-scale, so `n <= 255`.
    pub fn key(&self) -> Vec<u8> {
        assert!(self.n <= u8::MAX as usize, "keys support n <= 255");
        let mut out = Vec::with_capacity(3 * self.n);
        for c in Color::ALL {
            out.extend(self.tau[c.index()].images().iter().map(|&v| v as u8));
        }
        out
    }

    /// Rebuilds a surface from its `key()` bytes.
    pub fn from_key(key: &[u8]) -> Result<Surface> {
        if key.len() % 3 != 0 || key.is_empty() {
            return Err(Error::Precondition("malformed surface key".into()));
        }
        let n = key.len() / 3;
        let perm = |row: &[u8]| Perm::from_images(row.iter().map(|&b| b as u32).collect());
        Surface::new(perm(&key[..n]), perm(&key[n..2 * n]), perm(&key[2 * n..]))
    }

    /// Breadth-first relabelling from `start`, scanning colours in the fixed
    /// order R, G, B.  Fills `label` (old -> new) and `order` (new -> old).
    fn bfs_labels(&self, start: u32, label: &mut [u32], order: &mut [u32]) {
        label.fill(u32::MAX);
        label[start as usize] = 0;
        order[0] = start;
        let mut next = 1usize;
        let mut head = 0usize;
        while head < next {
            let x = order[head];
            head += 1;
            for c in Color::ALL {
                let y = self.tau[c.index()].apply(x);
                if label[y as usize] == u32::MAX {
                    label[y as usize] = next as u32;
                    order[next] = y;
                    next += 1;
                }
            }
        }
        debug_assert_eq!(next, self.n);
    }

    /// Canonical dedup key: the `key()` of the canonical form, computed
    /// without building intermediate surfaces.
    pub fn canonical_key(&self) -> Vec<u8> {
        assert!(self.n <= u8::MAX as usize, "keys support n <= 255");
        let n = self.n;
        let mut label = vec![u32::MAX; n];
        let mut order = vec![0u32; n];
        let mut key = vec![0u8; 3 * n];
        let mut best: Option<Vec<u8>> = None;
        for start in 0..n as u32 {
            self.bfs_labels(start, &mut label, &mut order);
            let mut idx = 0;
            for c in Color::ALL {
                let tau = &self.tau[c.index()];
                for &old in order.iter() {
                    key[idx] = label[tau.apply(old) as usize] as u8;
                    idx += 1;
                }
            }
            match &mut best {
                Some(bk) if *bk <= key => {}
                Some(bk) => bk.copy_from_slice(&key),
                None => best = Some(key.clone()),
            }
        }
        best.unwrap()
    }

    /// Relabelling `sigma` such that the conjugated triple is the canonical
    /// form: lexicographically least over all breadth-first starts.
    pub fn canonical_label(&self) -> Perm {
        let n = self.n;
        let mut label = vec![u32::MAX; n];
        let mut order = vec![0u32; n];
        let mut key = vec![0u8; 3 * n];
        let mut best: Option<(Vec<u8>, Vec<u32>)> = None;
        for start in 0..n as u32 {
            self.bfs_labels(start, &mut label, &mut order);
            let mut idx = 0;
            for c in Color::ALL {
                let tau = &self.tau[c.index()];
                for &old in order.iter() {
                    key[idx] = label[tau.apply(old) as usize] as u8;
                    idx += 1;
                }
            }
            let better = match &best {
                Some((bk, _)) => key < *bk,
                None => true,
            };
            if better {
                best = Some((key.clone(), label.clone()));
            }
        }
        Perm::from_images(best.unwrap().1)
    }

    pub fn relabel(&self, sigma: &Perm) -> Surface {
        Surface {
            n: self.n,
            tau: [
                self.tau[0].conjugate(sigma),
                self.tau[1].conjugate(sigma),
                self.tau[2].conjugate(sigma),
            ],
        }
    }

    pub fn canonical_form(&self) -> Surface {
        self.relabel(&self.canonical_label())
    }

    pub fn is_isomorphic(&self, other: &Surface) -> bool {
        self.n == other.n && self.canonical_form() == other.canonical_form()
    }

    /// All permutations normalising the three involutions simultaneously.
    /// Propagates each candidate image of triangle 0 through the colour walk;
    /// connected tricoloured cubic graphs are rigid given one image, so the
    /// group order is at most `n`.
    pub fn automorphisms(&self) -> Vec<Perm> {
        let mut out = Vec::new();
        'candidates: for w in 0..self.n as u32 {
            let mut sigma = vec![u32::MAX; self.n];
            sigma[0] = w;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(0u32);
            while let Some(x) = queue.pop_front() {
                for c in Color::ALL {
                    let y = self.tau[c.index()].apply(x);
                    let img = self.tau[c.index()].apply(sigma[x as usize]);
                    if sigma[y as usize] == u32::MAX {
                        sigma[y as usize] = img;
                        queue.push_back(y);
                    } else if sigma[y as usize] != img {
                        continue 'candidates;
                    }
                }
            }
            let mut seen = vec![false; self.n];
            let mut bijective = true;
            for &v in &sigma {
                if v == u32::MAX || seen[v as usize] {
                    bijective = false;
                    break;
                }
                seen[v as usize] = true;
            }
            if bijective {
                out.push(Perm::from_images(sigma));
            }
        }
        out
    }

    pub fn is_automorphism(&self, sigma: &Perm) -> std::result::Result<(), (Color, u32)> {
        for c in Color::ALL {
            for x in 0..self.n as u32 {
                if sigma.apply(self.tau[c.index()].apply(x))
                    != self.tau[c.index()].apply(sigma.apply(x))
                {
                    return Err((c, x));
                }
            }
        }
        Ok(())
    }

    /// Quotient by the subgroup generated by `generators`.  Orbits are
    /// labelled `0..n'-1` by increasing minimal element; returns the quotient
    /// and the induced vertex map.
    pub fn quotient(&self, generators: &[Perm]) -> Result<(Surface, Vec<u32>)> {
        for g in generators {
            if let Err((c, x)) = self.is_automorphism(g) {
                return Err(Error::NotAutomorphism(c, x));
            }
        }
        // Orbits of the generated group via closure.
        let mut parent: Vec<u32> = (0..self.n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for g in generators {
            for x in 0..self.n as u32 {
                let y = g.apply(x);
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx as usize] = ry;
                }
            }
        }
        let mut order: Vec<u32> = Vec::new();
        let mut index_of = vec![u32::MAX; self.n];
        for x in 0..self.n as u32 {
            let r = find(&mut parent, x);
            if index_of[r as usize] == u32::MAX {
                index_of[r as usize] = order.len() as u32;
                order.push(r);
            }
        }
        let n2 = order.len();
        let vmap: Vec<u32> = (0..self.n as u32)
            .map(|x| index_of[find(&mut parent, x) as usize])
            .collect();
        let mut taus = Vec::new();
        for c in Color::ALL {
            let mut images = vec![u32::MAX; n2];
            for x in 0..self.n as u32 {
                let img = vmap[self.tau[c.index()].apply(x) as usize];
                let src = vmap[x as usize];
                if images[src as usize] == u32::MAX {
                    images[src as usize] = img;
                } else if images[src as usize] != img {
                    return Err(Error::Internal("quotient map not well defined".into()));
                }
            }
            taus.push(Perm::from_images(images));
        }
        let q = Surface::new(taus[0].clone(), taus[1].clone(), taus[2].clone())?;
        Ok((q, vmap))
    }

    /// The unique hyperelliptic involution, when one exists: an order-2
    /// automorphism with genus-0 quotient.
    pub fn hyperelliptic_involution(&self) -> Option<Perm> {
        for alpha in self.automorphisms() {
            if alpha.is_identity() || !alpha.is_involution() {
                continue;
            }
            if let Ok((q, _)) = self.quotient(std::slice::from_ref(&alpha)) {
                if q.genus() == 0 {
                    return Some(alpha);
                }
            }
        }
        None
    }

    /// Membership in the hyperelliptic Abelian locus, defined only for
    /// Abelian surfaces of profile `[2^m, 4g-2]` or `[2^m, (2g)^2]` with
    /// `g >= 2`.  In the second case the involution must exchange the two
    /// singular faces of degree `6g`.
    pub fn hyperelliptic_membership(&self) -> HyperellipticStatus {
        let profile = self.profile();
        if !self.is_abelian() {
            return HyperellipticStatus::NotApplicable;
        }
        let special: Vec<usize> = profile.mu.iter().copied().filter(|&p| p != 2).collect();
        let swap_case = match special.as_slice() {
            [d] if d % 4 == 2 && *d >= 6 => false,
            [d1, d2] if d1 == d2 && d1 % 2 == 0 && *d1 >= 4 => true,
            _ => return HyperellipticStatus::NotApplicable,
        };
        for alpha in self.automorphisms() {
            if alpha.is_identity() || !alpha.is_involution() {
                continue;
            }
            let Ok((q, _)) = self.quotient(std::slice::from_ref(&alpha)) else {
                continue;
            };
            if q.genus() != 0 {
                continue;
            }
            if swap_case {
                // The two faces of degree 6g must be exchanged.
                let d = special[0];
                let cycles: Vec<Vec<u32>> = self
                    .vertex_product()
                    .cycles()
                    .into_iter()
                    .filter(|cyc| cyc.len() == d)
                    .collect();
                debug_assert_eq!(cycles.len(), 2);
                let image_of_first: std::collections::BTreeSet<u32> =
                    cycles[0].iter().map(|&v| alpha.apply(v)).collect();
                let second: std::collections::BTreeSet<u32> = cycles[1].iter().copied().collect();
                if image_of_first == second {
                    return HyperellipticStatus::Member;
                }
            } else {
                return HyperellipticStatus::Member;
            }
        }
        HyperellipticStatus::NonMember
    }
}

impl fmt::Debug for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Surface(n={}, R={:?}, G={:?}, B={:?})",
            self.n, self.tau[0], self.tau[1], self.tau[2]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn torus() -> Surface {
        // One square: tau_R = tau_G = tau_B = (1,2).
        let t = Perm::from_transpositions(2, &[(0, 1)]);
        Surface::new(t.clone(), t.clone(), t).unwrap()
    }

    fn fig6_like() -> Surface {
        // tau_R = (1,2), tau_G = (3,4), tau_B = (1,5)(2,3) in 1-based labels.
        Surface::new(
            Perm::from_transpositions(5, &[(0, 1)]),
            Perm::from_transpositions(5, &[(2, 3)]),
            Perm::from_transpositions(5, &[(0, 4), (1, 2)]),
        )
        .unwrap()
    }

    fn two_triangle_path() -> Surface {
        // tau_G = (1,2), tau_R = tau_B = id.
        Surface::new(
            Perm::identity(2),
            Perm::from_transpositions(2, &[(0, 1)]),
            Perm::identity(2),
        )
        .unwrap()
    }

    #[test]
    fn validate_diagnostics() {
        let id = Perm::identity(2);
        let err = Surface::new(id.clone(), id.clone(), id).unwrap_err();
        assert!(matches!(err, Error::NotTransitive { .. }));

        let three_cycle = Perm::from_images(vec![1, 2, 0]);
        let err = Surface::new(three_cycle, Perm::identity(3), Perm::identity(3)).unwrap_err();
        assert!(matches!(
            err,
            Error::NotInvolution { color: Color::R, .. }
        ));
    }

    #[test]
    fn torus_face_is_one_hexagon() {
        let s = torus();
        let faces = s.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].len(), 6);
        // Hand dart trace: (1,R)(2,G)(1,B)(2,R)(1,G)(2,B) in 1-based labels.
        assert_eq!(
            faces[0],
            vec![
                (0, Color::R),
                (1, Color::G),
                (0, Color::B),
                (1, Color::R),
                (0, Color::G),
                (1, Color::B),
            ]
        );
        assert_eq!(s.profile(), Profile::new(vec![2], 0));
        assert_eq!(s.genus(), 1);
    }

    #[test]
    fn fig6_profile_follows_the_dart_oracle() {
        let s = fig6_like();
        // Product tau_B . tau_G . tau_R is the 5-cycle (1 3 4 2 5).
        assert_eq!(s.vertex_product().cycle_type(), vec![5]);
        let faces = s.faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].len(), 15);
        assert_eq!(s.profile(), Profile::new(vec![5], 7));
        assert_eq!(s.genus(), 0);
    }

    #[test]
    fn two_triangle_path_profile() {
        let s = two_triangle_path();
        assert_eq!(s.profile(), Profile::new(vec![2], 4));
        assert_eq!(s.genus(), 0);
        s.check_parity().unwrap();
    }

    #[test]
    fn parity_examples() {
        // ([4^2], 0) with n = 8: 24 = 4 (mod 4).
        assert!(Profile::new(vec![4, 4], 0).satisfies_parity());
        assert!(Profile::new(vec![2], 0).satisfies_parity());
        assert!(Profile::new(vec![2], 4).satisfies_parity());
        // 3n - k = 3 and the even-part sum is 0: 3 != 0 (mod 4).
        assert!(!Profile::new(vec![1], 0).satisfies_parity());
    }

    #[test]
    fn abelian_detection() {
        let s = torus();
        let classes = s.abelian_bipartition().unwrap();
        assert_eq!(classes, vec![true, false]);
        assert!(!two_triangle_path().is_abelian());
        assert!(!fig6_like().is_abelian());
    }

    #[test]
    fn canonical_form_is_idempotent_and_conjugation_invariant() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for s in [torus(), fig6_like(), two_triangle_path()] {
            let canon = s.canonical_form();
            assert_eq!(canon.canonical_form(), canon);
            for _ in 0..100 {
                let mut images: Vec<u32> = (0..s.triangle_count() as u32).collect();
                images.shuffle(&mut rng);
                let sigma = Perm::from_images(images);
                let conj = s.relabel(&sigma);
                assert!(conj.is_isomorphic(&s));
                assert_eq!(conj.canonical_form(), canon);
            }
        }
    }

    #[test]
    fn torus_automorphisms() {
        let s = torus();
        let auts = s.automorphisms();
        assert_eq!(auts.len(), 2);
        assert!(auts.iter().any(|a| a.is_identity()));
        assert!(auts
            .iter()
            .any(|a| *a == Perm::from_transpositions(2, &[(0, 1)])));
    }

    #[test]
    fn fig6_is_rigid() {
        // Propagation oracle: brute force over all 120 permutations.
        let s = fig6_like();
        let auts = s.automorphisms();
        assert_eq!(auts.len(), 1);
        let mut brute = 0;
        let perms = all_perms(5);
        for sigma in &perms {
            if s.is_automorphism(sigma).is_ok() {
                brute += 1;
            }
        }
        assert_eq!(brute, 1);
    }

    fn all_perms(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut items: Vec<u32> = (0..n as u32).collect();
        permute(&mut items, 0, &mut out);
        fn permute(items: &mut Vec<u32>, k: usize, out: &mut Vec<Perm>) {
            if k == items.len() {
                out.push(Perm::from_images(items.clone()));
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                permute(items, k + 1, out);
                items.swap(k, i);
            }
        }
        out
    }

    #[test]
    fn quotient_examples() {
        let s = torus();
        // Trivial subgroup: quotient isomorphic to s.
        let (q, _) = s.quotient(&[]).unwrap();
        assert!(q.is_isomorphic(&s));
        // Full flip: one triangle fixed by all three maps, profile ([1], 3).
        let flip = Perm::from_transpositions(2, &[(0, 1)]);
        let (q, vmap) = s.quotient(&[flip]).unwrap();
        assert_eq!(q.triangle_count(), 1);
        assert_eq!(vmap, vec![0, 0]);
        assert_eq!(q.profile(), Profile::new(vec![1], 3));
        assert_eq!(q.genus(), 0);
        // Non-automorphism generators are rejected.
        let s2 = fig6_like();
        let bad = Perm::from_transpositions(5, &[(0, 1)]);
        assert!(matches!(
            s2.quotient(&[bad]),
            Err(Error::NotAutomorphism(..))
        ));
    }

    #[test]
    fn hyperelliptic_not_applicable_cases() {
        assert_eq!(
            two_triangle_path().hyperelliptic_membership(),
            HyperellipticStatus::NotApplicable
        );
        // Genus-1 torus: all parts 2, treated as not applicable.
        assert_eq!(
            torus().hyperelliptic_membership(),
            HyperellipticStatus::NotApplicable
        );
    }
}
