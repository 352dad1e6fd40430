//! Stratum enumeration, reconfiguration-graph analysis, conjecture audit,
//! and random-walk sampling.

use crate::moves::{
    admissible_half_shears, components, half_shear, shear_all, shear_unchecked, Component,
    ComponentKind,
};
use crate::perm::{involutions, Perm};
use crate::surface::{Color, Error, HyperellipticStatus, Profile, Result, Surface};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// Internal GB-structure shapes used by the structured generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Shape {
    /// Path on `m` vertices whose first edge is green (the only flavour for
    /// odd `m` up to relabelling).
    PathG(usize),
    /// Path on even `m` whose first edge is blue; not isomorphic to the
    /// green-first flavour because the fold colours at the ends differ.
    PathB(usize),
    /// Alternating cycle on `2q` vertices.
    Cycle(usize),
}

impl Shape {
    fn size(self) -> usize {
        match self {
            Shape::PathG(m) | Shape::PathB(m) | Shape::Cycle(m) => m,
        }
    }
}

fn shapes_of_size(m: usize) -> Vec<Shape> {
    let mut out = vec![Shape::PathG(m)];
    if m % 2 == 0 {
        out.push(Shape::PathB(m));
        out.push(Shape::Cycle(m));
    }
    out
}

/// All multisets of shapes with total size `n`, nondecreasing in an arbitrary
/// fixed shape order.
fn shape_multisets(n: usize) -> Vec<Vec<Shape>> {
    let mut alphabet: Vec<Shape> = (1..=n).flat_map(shapes_of_size).collect();
    alphabet.sort();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        alphabet: &[Shape],
        start: usize,
        remaining: usize,
        current: &mut Vec<Shape>,
        out: &mut Vec<Vec<Shape>>,
    ) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for i in start..alphabet.len() {
            let size = alphabet[i].size();
            if size <= remaining {
                current.push(alphabet[i]);
                rec(alphabet, i, remaining - size, current, out);
                current.pop();
            }
        }
    }
    rec(&alphabet, 0, n, &mut current, &mut out);
    out
}

/// Lays out a shape multiset on consecutive labels; returns `(tau_G, tau_B,
/// component id per vertex)`.
fn lay_out(n: usize, shapes: &[Shape]) -> (Perm, Perm, Vec<u32>) {
    let mut g: Vec<u32> = (0..n as u32).collect();
    let mut b: Vec<u32> = (0..n as u32).collect();
    let mut comp = vec![0u32; n];
    let mut base = 0u32;
    for (cid, &shape) in shapes.iter().enumerate() {
        let m = shape.size() as u32;
        for off in 0..m {
            comp[(base + off) as usize] = cid as u32;
        }
        let mut link = |i: u32, green: bool| {
            let (x, y) = (base + i, base + i + 1);
            if green {
                g[x as usize] = y;
                g[y as usize] = x;
            } else {
                b[x as usize] = y;
                b[y as usize] = x;
            }
        };
        match shape {
            Shape::PathG(_) => {
                for i in 0..m.saturating_sub(1) {
                    link(i, i % 2 == 0);
                }
            }
            Shape::PathB(_) => {
                for i in 0..m.saturating_sub(1) {
                    link(i, i % 2 == 1);
                }
            }
            Shape::Cycle(_) => {
                for i in 0..m - 1 {
                    link(i, i % 2 == 0);
                }
                // Closing blue edge (m is even).
                let (x, y) = (base + m - 1, base);
                b[x as usize] = y;
                b[y as usize] = x;
            }
        }
        base += m;
    }
    (Perm::from_images(g), Perm::from_images(b), comp)
}

/// Enumeration of all isomorphism classes with `n` triangles, bucketed by
/// profile.  Canonical representatives, sorted by canonical key.
pub type Census = BTreeMap<Profile, Vec<Surface>>;

/// Structured generator: canonical `{G,B}` skeleton per component multiset,
/// free sweep of `tau_R`, canonical deduplication.
pub fn census(n: usize) -> Census {
    let taus_r = involutions(n);
    let mut merged: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    for shapes in shape_multisets(n) {
        let (tau_g, tau_b, comp) = lay_out(n, &shapes);
        let ncomp = shapes.len();
        let hits = taus_r
            .par_iter()
            .fold(
                std::collections::HashSet::new,
                |mut acc: std::collections::HashSet<Vec<u8>>, tau_r| {
                    // Transitivity over component ids via tau_R edges.
                    let mut parent: Vec<u32> = (0..ncomp as u32).collect();
                    fn find(parent: &mut [u32], mut x: u32) -> u32 {
                        while parent[x as usize] != x {
                            parent[x as usize] = parent[parent[x as usize] as usize];
                            x = parent[x as usize];
                        }
                        x
                    }
                    let mut classes = ncomp as u32;
                    for x in 0..n as u32 {
                        let y = tau_r.apply(x);
                        let (rx, ry) = (
                            find(&mut parent, comp[x as usize]),
                            find(&mut parent, comp[y as usize]),
                        );
                        if rx != ry {
                            parent[rx as usize] = ry;
                            classes -= 1;
                        }
                    }
                    if classes == 1 {
                        let s =
                            Surface::new_unchecked(tau_r.clone(), tau_g.clone(), tau_b.clone());
                        acc.insert(s.canonical_key());
                    }
                    acc
                },
            )
            .reduce(std::collections::HashSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        merged.extend(hits);
    }
    bucket(merged)
}

/// Independent generator for cross-validation: normalises `tau_G` to the
/// canonical involution of each cycle type and sweeps `tau_R`, `tau_B` over
/// all involutions.
pub fn census_naive(n: usize) -> Census {
    let invs = involutions(n);
    let mut merged: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    for transpositions in 0..=n / 2 {
        let pairs: Vec<(u32, u32)> = (0..transpositions)
            .map(|t| (2 * t as u32, 2 * t as u32 + 1))
            .collect();
        let tau_g = Perm::from_transpositions(n, &pairs);
        let hits = invs
            .par_iter()
            .fold(
                std::collections::HashSet::new,
                |mut acc: std::collections::HashSet<Vec<u8>>, tau_r| {
                    for tau_b in &invs {
                        let mut parent: Vec<u32> = (0..n as u32).collect();
                        fn find(parent: &mut [u32], mut x: u32) -> u32 {
                            while parent[x as usize] != x {
                                parent[x as usize] = parent[parent[x as usize] as usize];
                                x = parent[x as usize];
                            }
                            x
                        }
                        let mut classes = n as u32;
                        for tau in [tau_r, &tau_g, tau_b] {
                            for x in 0..n as u32 {
                                let (rx, ry) =
                                    (find(&mut parent, x), find(&mut parent, tau.apply(x)));
                                if rx != ry {
                                    parent[rx as usize] = ry;
                                    classes -= 1;
                                }
                            }
                        }
                        if classes == 1 {
                            let s =
                                Surface::new_unchecked(tau_r.clone(), tau_g.clone(), tau_b.clone());
                            acc.insert(s.canonical_key());
                        }
                    }
                    acc
                },
            )
            .reduce(std::collections::HashSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        merged.extend(hits);
    }
    bucket(merged)
}

fn bucket(merged: std::collections::HashSet<Vec<u8>>) -> Census {
    let mut out: Census = BTreeMap::new();
    let mut entries: Vec<Vec<u8>> = merged.into_iter().collect();
    entries.sort();
    for key in entries {
        let s = Surface::from_key(&key).expect("canonical keys decode");
        out.entry(s.profile()).or_default().push(s);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StratumOutcome {
    /// One canonical representative per isomorphism class.
    Classes(#[serde(skip)] Vec<Surface>),
    /// Provably empty before enumeration.
    EmptyBecause(String),
}

/// Enumerates `ST(mu, k)`, with a hard cap on `n` to keep runs desk-scale.
pub fn enumerate_stratum(profile: &Profile, max_n: usize) -> Result<StratumOutcome> {
    if profile.genus().is_none() {
        return Ok(StratumOutcome::EmptyBecause(
            "no non-negative integer genus solves the Euler formula".into(),
        ));
    }
    if !profile.satisfies_parity() {
        return Ok(StratumOutcome::EmptyBecause("parity".into()));
    }
    let n = profile.triangle_count();
    if n == 0 {
        return Ok(StratumOutcome::EmptyBecause("empty partition".into()));
    }
    if n > max_n {
        return Err(Error::Cap(format!(
            "stratum needs n = {n} triangles, cap is {max_n}"
        )));
    }
    let census = census(n);
    Ok(StratumOutcome::Classes(
        census.get(profile).cloned().unwrap_or_default(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoveSet {
    /// Horizontal and vertical cylinder shears.
    Shears,
    /// Shears plus admissible half cylinder shears.
    ShearsAndHalf,
    /// The two SL2(Z) generators: simultaneous shears in all horizontal
    /// (resp. vertical) cylinders, and their inverses.
    Sl2,
}

const SHEAR_PAIRS: [(Color, Color); 2] = [(Color::G, Color::B), (Color::R, Color::G)];

/// Unit-step neighbours under the chosen move set, as canonical keys.
pub fn neighbors(s: &Surface, moveset: MoveSet) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    match moveset {
        MoveSet::Shears | MoveSet::ShearsAndHalf => {
            for (a, b) in SHEAR_PAIRS {
                for comp in components(s, a, b) {
                    for ordered in [(a, b), (b, a)] {
                        out.push(shear_unchecked(s, &comp.vertices, ordered).canonical_key());
                    }
                }
            }
            if moveset == MoveSet::ShearsAndHalf {
                for (orientation, comp, side, _) in admissible_half_shears(s) {
                    for inverse in [false, true] {
                        let moved = half_shear(s, orientation, &comp, side, inverse)
                            .expect("admissible half shear applies");
                        out.push(moved.canonical_key());
                    }
                }
            }
        }
        MoveSet::Sl2 => {
            for ordered in [
                (Color::G, Color::B),
                (Color::B, Color::G),
                (Color::R, Color::G),
                (Color::G, Color::R),
            ] {
                out.push(shear_all(s, ordered).canonical_key());
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Neighbours in the powers metric: every distinct surface in the full shear
/// orbit of one component counts as one step away.  Half shears stay unit.
pub fn neighbors_powers(s: &Surface, moveset: MoveSet) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    match moveset {
        MoveSet::Shears | MoveSet::ShearsAndHalf => {
            for (a, b) in SHEAR_PAIRS {
                for comp in components(s, a, b) {
                    let mut cur = s.clone();
                    loop {
                        cur = shear_unchecked(&cur, &comp.vertices, (a, b));
                        if cur == *s {
                            break;
                        }
                        out.push(cur.canonical_key());
                    }
                }
            }
            if moveset == MoveSet::ShearsAndHalf {
                for (orientation, comp, side, _) in admissible_half_shears(s) {
                    for inverse in [false, true] {
                        let moved = half_shear(s, orientation, &comp, side, inverse)
                            .expect("admissible half shear applies");
                        out.push(moved.canonical_key());
                    }
                }
            }
        }
        MoveSet::Sl2 => {
            for ordered in [
                (Color::G, Color::B),
                (Color::B, Color::G),
                (Color::R, Color::G),
                (Color::G, Color::R),
            ] {
                let mut cur = s.clone();
                loop {
                    cur = shear_all(&cur, ordered);
                    if cur == *s {
                        break;
                    }
                    out.push(cur.canonical_key());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitComponent {
    /// Indices into the stratum list, sorted.
    pub members: Vec<usize>,
    pub diameter_unit: Option<usize>,
    pub diameter_powers: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub moveset: MoveSet,
    pub components: Vec<OrbitComponent>,
}

/// Partitions a stratum into reconfiguration components and measures
/// per-component diameters in the unit and powers metrics.
///
/// The stratum must be closed under the move set (it is, for full strata).
/// Output is deterministic regardless of worker count: components are sorted
/// by minimal member, members ascending.
pub fn reconfiguration_components(
    stratum: &[Surface],
    moveset: MoveSet,
    with_diameters: bool,
) -> Result<OrbitReport> {
    let index: HashMap<Vec<u8>, usize> = stratum
        .iter()
        .enumerate()
        .map(|(i, s)| (s.canonical_key(), i))
        .collect();
    let lookup = |key: &Vec<u8>| -> Result<usize> {
        index.get(key).copied().ok_or_else(|| {
            Error::Internal("move left the stratum list; enumeration incomplete".into())
        })
    };
    // Adjacency in both metrics.
    let adj_unit: Vec<Vec<usize>> = stratum
        .par_iter()
        .map(|s| {
            neighbors(s, moveset)
                .iter()
                .map(lookup)
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let adj_powers: Vec<Vec<usize>> = if with_diameters {
        stratum
            .par_iter()
            .map(|s| {
                neighbors_powers(s, moveset)
                    .iter()
                    .map(lookup)
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    // Connected components.
    let mut comp_id = vec![usize::MAX; stratum.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..stratum.len() {
        if comp_id[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![start];
        comp_id[start] = id;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj_unit[x] {
                if comp_id[y] == usize::MAX {
                    comp_id[y] = id;
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }

    let diameter = |members: &[usize], adj: &[Vec<usize>]| -> usize {
        members
            .par_iter()
            .map(|&src| {
                let mut dist: HashMap<usize, usize> = HashMap::new();
                dist.insert(src, 0);
                let mut queue = std::collections::VecDeque::from([src]);
                let mut ecc = 0;
                while let Some(x) = queue.pop_front() {
                    let dx = dist[&x];
                    for &y in &adj[x] {
                        if !dist.contains_key(&y) {
                            dist.insert(y, dx + 1);
                            ecc = ecc.max(dx + 1);
                            queue.push_back(y);
                        }
                    }
                }
                ecc
            })
            .max()
            .unwrap_or(0)
    };

    let components = comps
        .into_iter()
        .map(|members| {
            let (du, dp) = if with_diameters {
                (
                    Some(diameter(&members, &adj_unit)),
                    Some(diameter(&members, &adj_powers)),
                )
            } else {
                (None, None)
            };
            OrbitComponent {
                members,
                diameter_unit: du,
                diameter_powers: dp,
            }
        })
        .collect();
    Ok(OrbitReport { moveset, components })
}

/// Distance between two members of a stratum in the powers metric.
pub fn powers_distance(stratum: &[Surface], a: usize, b: usize) -> Option<usize> {
    let index: HashMap<Vec<u8>, usize> = stratum
        .iter()
        .enumerate()
        .map(|(i, s)| (s.canonical_key(), i))
        .collect();
    let mut dist: HashMap<usize, usize> = HashMap::new();
    dist.insert(a, 0);
    let mut queue = std::collections::VecDeque::from([a]);
    while let Some(x) = queue.pop_front() {
        if x == b {
            return Some(dist[&x]);
        }
        let dx = dist[&x];
        for nb in neighbors_powers(&stratum[x], MoveSet::Shears) {
            if let Some(&y) = index.get(&nb) {
                dist.entry(y).or_insert_with(|| {
                    queue.push_back(y);
                    dx + 1
                });
            }
        }
    }
    None
}

/// The invariants conjectured to cut out the shear components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct InvariantClass {
    pub abelian: bool,
    /// Hyperelliptic membership for the Abelian profiles where it is defined.
    pub hyperelliptic: HyperellipticStatusOrd,
    /// Quadratic surfaces of genus >= 1 whose hyperelliptic quotient has
    /// exactly two singular parts (>= 3).
    pub quad_hyperelliptic: bool,
}

/// Ordered wrapper so classes sort deterministically in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum HyperellipticStatusOrd {
    NotApplicable,
    Member,
    NonMember,
}

impl From<HyperellipticStatus> for HyperellipticStatusOrd {
    fn from(st: HyperellipticStatus) -> Self {
        match st {
            HyperellipticStatus::NotApplicable => HyperellipticStatusOrd::NotApplicable,
            HyperellipticStatus::Member => HyperellipticStatusOrd::Member,
            HyperellipticStatus::NonMember => HyperellipticStatusOrd::NonMember,
        }
    }
}

pub fn invariant_class(s: &Surface) -> InvariantClass {
    let abelian = s.is_abelian();
    let hyperelliptic = s.hyperelliptic_membership().into();
    let quad_hyperelliptic = !abelian && s.genus() >= 1 && {
        s.hyperelliptic_involution()
            .map(|alpha| {
                let (q, _) = s.quotient(std::slice::from_ref(&alpha)).expect("automorphism");
                q.profile().reduced().mu.iter().filter(|&&p| p >= 3).count() == 2
            })
            .unwrap_or(false)
    };
    InvariantClass { abelian, hyperelliptic, quad_hyperelliptic }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub invariant: InvariantClass,
    pub class_size: usize,
    pub shear_components: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Every invariant class is a single shear component.
    Consistent,
    /// Classes are unions of components, but some class splits further.
    ClassesSplit,
    /// A shear changed the invariant class: a genuine counterexample.
    RefinementViolation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub class_count: usize,
    pub component_count: usize,
    pub classes: Vec<ClassReport>,
    pub verdict: Verdict,
    /// Bound from the moduli classification: at most 5 components per stratum.
    pub within_component_bound: bool,
    /// Indices of a violating pair (surface, neighbour), if any.
    pub counterexample: Option<(usize, usize)>,
}

/// Audits the conjecture on one enumerated stratum.
pub fn verify_conjecture(stratum: &[Surface]) -> Result<ConjectureReport> {
    let report = reconfiguration_components(stratum, MoveSet::Shears, false)?;
    let invariants: Vec<InvariantClass> = stratum.par_iter().map(invariant_class).collect();
    // Refinement: every unit shear preserves the invariant class.
    let index: HashMap<Vec<u8>, usize> = stratum
        .iter()
        .enumerate()
        .map(|(i, s)| (s.canonical_key(), i))
        .collect();
    let mut counterexample = None;
    'outer: for (i, s) in stratum.iter().enumerate() {
        for nb in neighbors(s, MoveSet::Shears) {
            let j = index[&nb];
            if invariants[j] != invariants[i] {
                counterexample = Some((i, j));
                break 'outer;
            }
        }
    }
    let mut by_class: BTreeMap<InvariantClass, (usize, std::collections::BTreeSet<usize>)> =
        BTreeMap::new();
    for (comp_idx, comp) in report.components.iter().enumerate() {
        for &m in &comp.members {
            let entry = by_class.entry(invariants[m]).or_default();
            entry.0 += 1;
            entry.1.insert(comp_idx);
        }
    }
    let classes: Vec<ClassReport> = by_class
        .iter()
        .map(|(inv, (size, comps))| ClassReport {
            invariant: *inv,
            class_size: *size,
            shear_components: comps.len(),
        })
        .collect();
    let verdict = if counterexample.is_some() {
        Verdict::RefinementViolation
    } else if classes.iter().all(|c| c.shear_components == 1) {
        Verdict::Consistent
    } else {
        Verdict::ClassesSplit
    };
    Ok(ConjectureReport {
        class_count: classes.len(),
        component_count: report.components.len(),
        classes,
        verdict,
        within_component_bound: report.components.len() <= 5,
        counterexample,
    })
}

/// Lazy random walk: hold with probability 1/2, otherwise shear a uniformly
/// random (ordered colour pair, component).  Deterministic under (seed, steps).
pub fn random_walk(start: &Surface, steps: usize, seed: u64) -> Vec<Surface> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut trace = vec![start.clone()];
    let mut cur = start.clone();
    for _ in 0..steps {
        if rng.gen_bool(0.5) {
            trace.push(cur.clone());
            continue;
        }
        let mut choices: Vec<((Color, Color), Component)> = Vec::new();
        for (a, b) in SHEAR_PAIRS {
            for comp in components(&cur, a, b) {
                choices.push(((a, b), comp.clone()));
                choices.push(((b, a), comp));
            }
        }
        let pick = rng.gen_range(0..choices.len());
        let (ordered, comp) = &choices[pick];
        cur = shear_unchecked(&cur, &comp.vertices, *ordered);
        trace.push(cur.clone());
    }
    trace
}

/// Summary statistics for a walk trace.
#[derive(Debug, Clone, Serialize)]
pub struct WalkStats {
    pub steps: usize,
    pub distinct_classes: usize,
    pub horizontal_cylinders: Vec<usize>,
    pub red_half_edges: Vec<usize>,
}

pub fn walk_stats(trace: &[Surface]) -> WalkStats {
    let mut seen = std::collections::BTreeSet::new();
    let mut cyls = Vec::new();
    let mut reds = Vec::new();
    for s in trace {
        seen.insert(s.canonical_key());
        cyls.push(components(s, Color::G, Color::B).len());
        reds.push(s.tau(Color::R).count_fixed_points());
    }
    WalkStats {
        steps: trace.len() - 1,
        distinct_classes: seen.len(),
        horizontal_cylinders: cyls,
        red_half_edges: reds,
    }
}

/// Path-like members of a stratum (used by existence checks and witnesses).
pub fn path_like_members(stratum: &[Surface]) -> Vec<usize> {
    stratum
        .iter()
        .enumerate()
        .filter(|(_, s)| crate::stable_graph::is_path_like(s))
        .map(|(i, _)| i)
        .collect()
}

/// Members with a single vertical cylinder which is a path (the mirrored
/// witness for the lower-bound argument).
pub fn vertical_path_like_members(stratum: &[Surface]) -> Vec<usize> {
    stratum
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let comps = components(s, Color::R, Color::G);
            comps.len() == 1 && comps[0].kind == ComponentKind::Path
        })
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_square_torus_stratum() {
        let c = census(2);
        let torus_profile = Profile::new(vec![2], 0);
        assert_eq!(c.get(&torus_profile).map(|v| v.len()), Some(1));
        // ST([2], 4) is the three one-edge classes.
        let p = Profile::new(vec![2], 4);
        assert_eq!(c.get(&p).map(|v| v.len()), Some(3));
    }

    #[test]
    fn generators_agree_small() {
        for n in 1..=5 {
            let a = census(n);
            let b = census_naive(n);
            assert_eq!(a, b, "census mismatch at n = {n}");
        }
    }

    #[test]
    fn parity_violating_profile_is_empty() {
        let p = Profile::new(vec![1], 0);
        match enumerate_stratum(&p, 12).unwrap() {
            StratumOutcome::EmptyBecause(_) => {}
            StratumOutcome::Classes(v) => panic!("expected empty, found {}", v.len()),
        }
    }

    #[test]
    fn st24_is_one_component_and_walk_stays_inside() {
        let p = Profile::new(vec![2], 4);
        let StratumOutcome::Classes(stratum) = enumerate_stratum(&p, 12).unwrap() else {
            panic!("stratum should enumerate")
        };
        assert_eq!(stratum.len(), 3);
        let report = reconfiguration_components(&stratum, MoveSet::Shears, true).unwrap();
        assert_eq!(report.components.len(), 1);
        let walk = random_walk(&stratum[0], 200, 42);
        for s in &walk {
            assert_eq!(s.profile(), p);
        }
        let stats = walk_stats(&walk);
        assert_eq!(stats.distinct_classes, 3);
        // Determinism under the seed.
        let again = random_walk(&stratum[0], 200, 42);
        assert_eq!(walk.len(), again.len());
        assert!(walk.iter().zip(&again).all(|(x, y)| x == y));
    }

    #[test]
    fn sl2_refines_shears() {
        let p = Profile::new(vec![2], 4);
        let StratumOutcome::Classes(stratum) = enumerate_stratum(&p, 12).unwrap() else {
            panic!()
        };
        let shears = reconfiguration_components(&stratum, MoveSet::Shears, false).unwrap();
        let sl2 = reconfiguration_components(&stratum, MoveSet::Sl2, false).unwrap();
        // Every sl2 component is inside one shear component.
        for comp in &sl2.components {
            let owner: std::collections::BTreeSet<usize> = shears
                .components
                .iter()
                .enumerate()
                .filter(|(_, c)| comp.members.iter().any(|m| c.members.contains(m)))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(owner.len(), 1);
        }
    }
}

#[cfg(test)]
mod scale_probe {
    use super::*;

    #[test]
    #[ignore]
    fn census_sizes() {
        for n in [6, 8, 10, 11, 12] {
            let t0 = std::time::Instant::now();
            let c = census(n);
            let classes: usize = c.values().map(|v| v.len()).sum();
            println!(
                "n={n}: {} strata, {} classes, {:?}",
                c.len(),
                classes,
                t0.elapsed()
            );
        }
    }
}
