//! Permutations of `{0..n-1}` stored as image tables.
//!
//! Products follow the convention that the right factor acts first:
//! `compose(p, q)` maps `x` to `p(q(x))`.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n as u32).collect(),
        }
    }

    /// Builds a permutation from an image table; panics if it is not a bijection.
    pub fn from_images(images: Vec<u32>) -> Self {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            assert!((v as usize) < n && !seen[v as usize], "not a bijection");
            seen[v as usize] = true;
        }
        Perm { images }
    }

    /// Product of disjoint transpositions on `{0..n-1}`, e.g. `(0 1)(4 5)`.
    pub fn from_transpositions(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut images: Vec<u32> = (0..n as u32).collect();
        for &(a, b) in pairs {
            assert!(images[a as usize] == a && images[b as usize] == b && a != b);
            images[a as usize] = b;
            images[b as usize] = a;
        }
        Perm { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.images[x as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn is_involution(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &v)| self.images[v as usize] == i as u32)
    }

    /// First index moved by a non-involutive step, if any.  Used for diagnostics.
    pub fn involution_witness(&self) -> Option<u32> {
        self.images
            .iter()
            .enumerate()
            .find(|&(i, &v)| self.images[v as usize] != i as u32)
            .map(|(i, _)| i as u32)
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Perm { images: inv }
    }

    /// `compose(p, q)` applies `q` first: the result maps `x` to `p(q(x))`.
    pub fn compose(p: &Perm, q: &Perm) -> Perm {
        assert_eq!(p.len(), q.len());
        Perm {
            images: q.images.iter().map(|&x| p.images[x as usize]).collect(),
        }
    }

    /// Conjugate `sigma self sigma^{-1}`.
    pub fn conjugate(&self, sigma: &Perm) -> Perm {
        let mut images = vec![0u32; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[sigma.images[i] as usize] = sigma.images[v as usize];
        }
        Perm { images }
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = u32> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i as u32 == v)
            .map(|(i, _)| i as u32)
    }

    pub fn count_fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i as u32 == v)
            .count()
    }

    /// Cycle decomposition; each cycle starts at its minimal element and
    /// cycles are sorted by that element.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n as u32 {
            if seen[start as usize] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start as usize] = true;
            let mut x = self.images[start as usize];
            while x != start {
                seen[x as usize] = true;
                cycle.push(x);
                x = self.images[x as usize];
            }
            out.push(cycle);
        }
        out
    }

    /// Multiset of cycle lengths, sorted ascending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        lens.sort_unstable();
        lens
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for cycle in self.cycles() {
            if cycle.len() > 1 {
                wrote = true;
                write!(f, "(")?;
                for (k, v) in cycle.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", v + 1)?;
                }
                write!(f, ")")?;
            }
        }
        if !wrote {
            write!(f, "id")?;
        }
        Ok(())
    }
}

/// All involutions on `{0..n-1}`, produced by pairing the smallest unpaired
/// element with each candidate in increasing order.
pub fn involutions(n: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut images: Vec<u32> = vec![u32::MAX; n];
    fn rec(images: &mut Vec<u32>, out: &mut Vec<Perm>) {
        let n = images.len();
        let first = match images.iter().position(|&v| v == u32::MAX) {
            None => {
                out.push(Perm::from_images(images.clone()));
                return;
            }
            Some(i) => i,
        };
        images[first] = first as u32;
        rec(images, out);
        images[first] = u32::MAX;
        for other in first + 1..n {
            if images[other] == u32::MAX {
                images[first] = other as u32;
                images[other] = first as u32;
                rec(images, out);
                images[first] = u32::MAX;
                images[other] = u32::MAX;
            }
        }
    }
    rec(&mut images, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_factor_first() {
        // p = (0 1), q = (1 2); p(q(1)) = p(2) = 2, q(p(1)) = q(0) = 0.
        let p = Perm::from_transpositions(3, &[(0, 1)]);
        let q = Perm::from_transpositions(3, &[(1, 2)]);
        let pq = Perm::compose(&p, &q);
        assert_eq!(pq.apply(1), 2);
        let qp = Perm::compose(&q, &p);
        assert_eq!(qp.apply(1), 0);
    }

    #[test]
    fn involution_counts() {
        // I(n) for n = 0..6: 1, 1, 2, 4, 10, 26, 76.
        let counts: Vec<usize> = (0..7).map(|n| involutions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 10, 26, 76]);
        assert!(involutions(5).iter().all(|p| p.is_involution()));
    }

    #[test]
    fn conjugation_and_cycles() {
        let p = Perm::from_images(vec![1, 2, 0, 4, 3]); // (0 1 2)(3 4)
        assert_eq!(p.cycle_type(), vec![2, 3]);
        let sigma = Perm::from_images(vec![4, 3, 2, 1, 0]);
        let q = p.conjugate(&sigma);
        assert_eq!(q.cycle_type(), vec![2, 3]);
        for x in 0..5u32 {
            assert_eq!(q.apply(sigma.apply(x)), sigma.apply(p.apply(x)));
        }
    }
}
