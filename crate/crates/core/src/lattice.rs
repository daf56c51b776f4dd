//! ±1-step lattice paths, the cycle map onto excursions, the cut bijection,
//! and the path width functional.

use crate::error::{Error, Result};
use rand::Rng;
use std::fmt;

/// Walk `w_0 = start`, `w_{t+1} = w_t + steps[t]` with steps in {+1, -1}.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePath {
    start: i64,
    steps: Vec<i8>,
}

impl LatticePath {
    /// Path from explicit steps; panics on a step other than ±1.
    pub fn from_steps(start: i64, steps: Vec<i8>) -> LatticePath {
        assert!(steps.iter().all(|&s| s == 1 || s == -1), "steps must be +1 or -1");
        LatticePath { start, steps }
    }

    pub fn try_from_steps(start: i64, steps: Vec<i8>) -> Result<LatticePath> {
        if let Some(s) = steps.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidPath(format!("step {s} is not ±1")));
        }
        Ok(LatticePath { start, steps })
    }

    #[inline]
    pub fn start(&self) -> i64 {
        self.start
    }

    #[inline]
    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Number of steps `k`.
    #[inline]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.steps.iter().map(|&s| s as i64).sum::<i64>()
    }

    /// `w_0, ..., w_k`.
    pub fn values(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.steps.len() + 1);
        let mut w = self.start;
        v.push(w);
        for &s in &self.steps {
            w += s as i64;
            v.push(w);
        }
        v
    }

    pub fn max_value(&self) -> i64 {
        self.values().into_iter().max().unwrap()
    }

    /// Starts at 0, ends at -1, and is nonnegative before the last step.
    pub fn is_excursion(&self) -> bool {
        if self.start != 0 || self.steps.is_empty() || self.steps.len() % 2 == 0 {
            return false;
        }
        let mut w = 0i64;
        let k = self.steps.len();
        for (t, &s) in self.steps.iter().enumerate() {
            w += s as i64;
            if w < 0 && t + 1 < k {
                return false;
            }
        }
        w == -1
    }

    /// Concatenation; `other` is translated to start where `self` ends.
    pub fn concat(&self, other: &LatticePath) -> LatticePath {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        LatticePath {
            start: self.start,
            steps,
        }
    }

    /// Text form `<start>:<U|D...>`, e.g. `0:UDD`.
    pub fn to_ud(&self) -> String {
        let mut s = format!("{}:", self.start);
        s.extend(self.steps.iter().map(|&x| if x > 0 { 'U' } else { 'D' }));
        s
    }

    /// Parses `<start>:<steps>` or bare `<steps>` (start 0).
    pub fn from_ud(s: &str) -> Result<LatticePath> {
        let s = s.trim();
        let (start, body) = match s.split_once(':') {
            Some((a, b)) => (
                a.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::InvalidPath(format!("bad start value {a:?}: {e}")))?,
                b,
            ),
            None => (0, s),
        };
        let mut steps = Vec::with_capacity(body.len());
        for (i, c) in body.chars().enumerate() {
            match c {
                'U' | 'u' => steps.push(1),
                'D' | 'd' => steps.push(-1),
                _ => return Err(Error::InvalidPath(format!("unexpected {c:?} at offset {i}"))),
            }
        }
        Ok(LatticePath { start, steps })
    }
}

impl fmt::Debug for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatticePath({})", self.to_ud())
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ud())
    }
}

/// Cyclic shift of a 0 → -1 bridge of odd length so that it starts right
/// after its first minimum. The result is an excursion, and every excursion
/// has exactly `len` preimages.
pub fn cycle_map(b: &LatticePath) -> Result<LatticePath> {
    let k = b.len();
    if b.start() != 0 || k % 2 == 0 || b.end() != -1 {
        return Err(Error::InvalidPath(
            "cycle_map needs a bridge from 0 to -1 of odd length".into(),
        ));
    }
    let mut w = 0i64;
    let mut min = 0i64;
    let mut tau = 0usize;
    for (t, &s) in b.steps().iter().enumerate() {
        w += s as i64;
        if w < min {
            min = w;
            tau = t + 1;
        }
    }
    let mut steps = Vec::with_capacity(k);
    steps.extend_from_slice(&b.steps()[tau..]);
    steps.extend_from_slice(&b.steps()[..tau]);
    Ok(LatticePath::from_steps(0, steps))
}

/// Reflection after the last visit to `floor(x/2)`.
///
/// For a bridge from 0 to `x` the image is a bridge from 0 to
/// `2 floor(x/2) - x` (that is, `-[len odd]`) that visits `floor(x/2)`; the
/// map is an involution on walks from 0 that visit that level.
pub fn cut_bijection(w: &LatticePath, x: i64) -> Result<LatticePath> {
    let n = w.len();
    if (n as i64 - x).rem_euclid(2) != 0 {
        return Err(Error::Parity { length: n, endpoint: x });
    }
    if w.start() != 0 {
        return Err(Error::InvalidPath("cut_bijection needs a walk starting at 0".into()));
    }
    let level = x.div_euclid(2);
    let tau = last_visit(w, level).ok_or_else(|| Error::InvalidPath(format!("walk never visits level {level}")))?;
    let mut steps = w.steps().to_vec();
    for s in &mut steps[tau..] {
        *s = -*s;
    }
    Ok(LatticePath::from_steps(0, steps))
}

/// Last time `t` with `w_t = level`.
pub fn last_visit(w: &LatticePath, level: i64) -> Option<usize> {
    w.values().iter().rposition(|&v| v == level)
}

/// Half the maximal number of steps crossing a half-integer level.
///
/// For the contour of a tree with at least two nodes this equals the width.
/// Paths with fewer than two steps have width 0 by convention.
pub fn path_width(c: &LatticePath) -> f64 {
    if c.len() < 2 {
        return 0.0;
    }
    let vals = c.values();
    let lo = *vals.iter().min().unwrap();
    let hi = *vals.iter().max().unwrap();
    // crossings[l] counts steps between lo + l and lo + l + 1
    let mut crossings = vec![0u64; (hi - lo) as usize];
    for t in 0..c.len() {
        let a = vals[t].min(vals[t + 1]);
        crossings[(a - lo) as usize] += 1;
    }
    crossings.into_iter().max().unwrap_or(0) as f64 / 2.0
}

/// Uniform bridge with `length` steps from 0 to `endpoint`.
pub fn uniform_bridge<R: Rng + ?Sized>(length: usize, endpoint: i64, rng: &mut R) -> Result<LatticePath> {
    let l = length as i64;
    if endpoint.abs() > l || (l + endpoint) % 2 != 0 {
        return Err(Error::Parity { length, endpoint });
    }
    let ups = ((l + endpoint) / 2) as usize;
    let mut steps = vec![-1i8; length];
    for s in steps.iter_mut().take(ups) {
        *s = 1;
    }
    // Fisher-Yates: every arrangement of the up steps is equally likely.
    for i in (1..length).rev() {
        let j = rng.random_range(0..=i);
        steps.swap(i, j);
    }
    Ok(LatticePath::from_steps(0, steps))
}

/// Uniform excursion of length `2n - 1`: uniform bridge then [`cycle_map`].
pub fn uniform_excursion<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LatticePath> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let b = uniform_bridge(2 * n - 1, -1, rng)?;
    cycle_map(&b)
}

/// All ±1 step sequences of the given length from 0, in lexicographic order
/// of the step string (U before D).
pub fn all_walks(length: usize) -> impl Iterator<Item = LatticePath> {
    assert!(length < 40, "too many walks");
    (0u64..(1u64 << length)).map(move |mask| {
        let steps = (0..length)
            .map(|i| if mask >> (length - 1 - i) & 1 == 0 { 1 } else { -1 })
            .collect();
        LatticePath::from_steps(0, steps)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::PlaneTree;
    use rand::SeedableRng;

    #[test]
    fn ud_roundtrip() {
        let p = LatticePath::from_ud("3:UUDD").unwrap();
        assert_eq!(p.start(), 3);
        assert_eq!(p.values(), vec![3, 4, 5, 4, 3]);
        assert_eq!(LatticePath::from_ud(&p.to_ud()).unwrap(), p);
        assert_eq!(LatticePath::from_ud("UDD").unwrap().end(), -1);
        assert!(LatticePath::from_ud("UXD").is_err());
    }

    #[test]
    fn cycle_map_n2_and_fixed_points() {
        let target = LatticePath::from_steps(0, vec![1, -1, -1]);
        let bridges: Vec<_> = all_walks(3).filter(|w| w.end() == -1).collect();
        assert_eq!(bridges.len(), 3);
        for b in &bridges {
            assert_eq!(cycle_map(b).unwrap(), target);
        }
        let e = PlaneTree::star(3).to_contour();
        assert_eq!(cycle_map(&e).unwrap(), e);
        assert!(cycle_map(&LatticePath::from_steps(0, vec![1, -1])).is_err());
    }

    #[test]
    fn cut_bijection_identity_for_x0() {
        let w = LatticePath::from_ud("UDDU").unwrap();
        assert_eq!(cut_bijection(&w, 0).unwrap(), w);
        assert!(matches!(cut_bijection(&w, 1), Err(Error::Parity { .. })));
    }

    #[test]
    fn width_examples() {
        assert_eq!(path_width(&PlaneTree::star(3).to_contour()), 3.0);
        assert_eq!(path_width(&PlaneTree::path(4).to_contour()), 1.0);
        assert_eq!(path_width(&PlaneTree::single().to_contour()), 0.0);
    }

    #[test]
    fn bridge_parity_guard() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(uniform_bridge(3, 0, &mut rng).is_err());
        assert!(uniform_bridge(2, 4, &mut rng).is_err());
        let b = uniform_bridge(7, -1, &mut rng).unwrap();
        assert_eq!(b.end(), -1);
    }
}
