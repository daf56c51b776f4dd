//! Rooted plane trees stored in depth-first preorder.
//!
//! A plane tree is determined by the depths of its nodes listed in preorder,
//! so that sequence is the canonical key for equality, ordering and hashing.
//! Child lists are kept in compressed form next to it.

use crate::error::{Error, Result};
use crate::lattice::LatticePath;
use std::fmt;

/// Default cap on `n` for [`enumerate_trees`].
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Rooted ordered tree; node 0 is the root and nodes are in preorder.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneTree {
    depth: Vec<u32>,
    parent: Vec<u32>,
    child_start: Vec<u32>,
    children: Vec<u32>,
}

/// Summary statistics of a tree.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TreeStats {
    pub size: usize,
    pub height: usize,
    pub width: usize,
    pub root_degree: usize,
    pub generation_sizes: Vec<usize>,
}

impl PlaneTree {
    /// The one-node tree.
    pub fn single() -> PlaneTree {
        PlaneTree::from_depths_unchecked(vec![0])
    }

    /// Root with `k` leaf children.
    pub fn star(k: usize) -> PlaneTree {
        let mut d = vec![1; k + 1];
        d[0] = 0;
        PlaneTree::from_depths_unchecked(d)
    }

    /// Path with `n` nodes (height `n - 1`).
    pub fn path(n: usize) -> PlaneTree {
        assert!(n >= 1);
        PlaneTree::from_depths_unchecked((0..n as u32).collect())
    }

    /// Build from preorder depths: `d[0] = 0`, `1 <= d[i] <= d[i-1] + 1`.
    pub fn from_preorder_depths(depths: Vec<u32>) -> Result<PlaneTree> {
        if depths.is_empty() {
            return Err(Error::InvalidTree("empty depth sequence".into()));
        }
        if depths[0] != 0 {
            return Err(Error::InvalidTree("root depth must be 0".into()));
        }
        for i in 1..depths.len() {
            if depths[i] == 0 || depths[i] > depths[i - 1] + 1 {
                return Err(Error::InvalidTree(format!(
                    "depth {} at position {i} after depth {}",
                    depths[i],
                    depths[i - 1]
                )));
            }
        }
        Ok(PlaneTree::from_depths_unchecked(depths))
    }

    pub(crate) fn from_depths_unchecked(depth: Vec<u32>) -> PlaneTree {
        let n = depth.len();
        let mut parent = vec![0u32; n];
        let mut last_at: Vec<u32> = Vec::new();
        let mut degree = vec![0u32; n];
        for (i, &d) in depth.iter().enumerate() {
            let d = d as usize;
            if d > 0 {
                let p = last_at[d - 1];
                parent[i] = p;
                degree[p as usize] += 1;
            }
            if last_at.len() <= d {
                last_at.push(i as u32);
            } else {
                last_at[d] = i as u32;
            }
        }
        let mut child_start = vec![0u32; n + 1];
        for i in 0..n {
            child_start[i + 1] = child_start[i] + degree[i];
        }
        let mut fill = child_start.clone();
        let mut children = vec![0u32; n.saturating_sub(1)];
        for (i, &p) in parent.iter().enumerate().skip(1) {
            children[fill[p as usize] as usize] = i as u32;
            fill[p as usize] += 1;
        }
        PlaneTree {
            depth,
            parent,
            child_start,
            children,
        }
    }

    /// Build from explicit child lists; node 0 is the root. The lists are
    /// re-indexed into preorder.
    pub fn from_child_lists(lists: &[Vec<usize>]) -> Result<PlaneTree> {
        let n = lists.len();
        if n == 0 {
            return Err(Error::InvalidTree("no nodes".into()));
        }
        let mut seen = vec![false; n];
        let mut depths = Vec::with_capacity(n);
        let mut stack = vec![(0usize, 0u32)];
        while let Some((v, d)) = stack.pop() {
            if v >= n || seen[v] {
                return Err(Error::InvalidTree(format!("node {v} repeated or out of range")));
            }
            seen[v] = true;
            depths.push(d);
            for &c in lists[v].iter().rev() {
                stack.push((c, d + 1));
            }
        }
        if depths.len() != n {
            return Err(Error::InvalidTree("nodes unreachable from root".into()));
        }
        Ok(PlaneTree::from_depths_unchecked(depths))
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.depth.len()
    }

    /// Preorder depth sequence (the canonical key).
    #[inline]
    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    /// Ordered children of node `v`.
    #[inline]
    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }

    /// Parent of a non-root node.
    #[inline]
    pub fn parent(&self, v: usize) -> Option<usize> {
        if v == 0 {
            None
        } else {
            Some(self.parent[v] as usize)
        }
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn root_degree(&self) -> usize {
        self.degree(0)
    }

    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut g = vec![0usize; self.height() + 1];
        for &d in &self.depth {
            g[d as usize] += 1;
        }
        g
    }

    pub fn width(&self) -> usize {
        self.generation_sizes().into_iter().max().unwrap_or(1)
    }

    pub fn stats(&self) -> TreeStats {
        let generation_sizes = self.generation_sizes();
        TreeStats {
            size: self.size(),
            height: generation_sizes.len() - 1,
            width: generation_sizes.iter().copied().max().unwrap_or(1),
            root_degree: self.root_degree(),
            generation_sizes,
        }
    }

    /// Subtree spanned by the nodes at depth at most `r`.
    pub fn ball(&self, r: usize) -> PlaneTree {
        let d: Vec<u32> = self.depth.iter().copied().filter(|&d| d as usize <= r).collect();
        PlaneTree::from_depths_unchecked(d)
    }

    /// Contour walk: an excursion of length `2n - 1` from 0 to -1.
    pub fn to_contour(&self) -> LatticePath {
        let mut steps = Vec::with_capacity(2 * self.size() - 1);
        for i in 1..self.size() {
            let downs = self.depth[i - 1] + 1 - self.depth[i];
            steps.extend(std::iter::repeat_n(-1i8, downs as usize));
            steps.push(1);
        }
        let last = *self.depth.last().unwrap();
        steps.extend(std::iter::repeat_n(-1i8, last as usize + 1));
        LatticePath::from_steps(0, steps)
    }

    /// Inverse of [`PlaneTree::to_contour`]; rejects non-excursions.
    pub fn from_contour(c: &LatticePath) -> Result<PlaneTree> {
        if !c.is_excursion() {
            return Err(Error::InvalidPath(
                "contour must start at 0, stay >= 0 and end at -1 on its last step".into(),
            ));
        }
        Ok(PlaneTree::from_dyck_steps(&c.steps()[..c.len() - 1]))
    }

    /// Tree from a Dyck path (steps from 0 back to 0, never negative).
    /// The caller guarantees validity.
    pub(crate) fn from_dyck_steps(steps: &[i8]) -> PlaneTree {
        let mut depths = Vec::with_capacity(steps.len() / 2 + 1);
        depths.push(0u32);
        let mut d = 0u32;
        for &s in steps {
            if s > 0 {
                d += 1;
                depths.push(d);
            } else {
                d -= 1;
            }
        }
        PlaneTree::from_depths_unchecked(depths)
    }

    /// Balanced-parenthesis serialization, e.g. `(()())` for the cherry.
    pub fn to_parens(&self) -> String {
        let mut s = String::with_capacity(2 * self.size());
        let mut open: u32 = 0;
        for &d in &self.depth {
            while open > d {
                s.push(')');
                open -= 1;
            }
            s.push('(');
            open += 1;
        }
        for _ in 0..open {
            s.push(')');
        }
        s
    }

    pub fn from_parens(s: &str) -> Result<PlaneTree> {
        let s = s.trim();
        let mut depths = Vec::with_capacity(s.len() / 2);
        let mut open: i64 = 0;
        let mut closed_root = false;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '(' => {
                    if closed_root {
                        return Err(Error::InvalidTree(format!("second root at offset {i}")));
                    }
                    depths.push(open as u32);
                    open += 1;
                }
                ')' => {
                    open -= 1;
                    if open < 0 {
                        return Err(Error::InvalidTree(format!("unbalanced ')' at offset {i}")));
                    }
                    if open == 0 {
                        closed_root = true;
                    }
                }
                c => return Err(Error::InvalidTree(format!("unexpected character {c:?} at offset {i}"))),
            }
        }
        if depths.is_empty() || open != 0 {
            return Err(Error::InvalidTree("unbalanced parentheses".into()));
        }
        Ok(PlaneTree::from_depths_unchecked(depths))
    }
}

impl fmt::Debug for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlaneTree({})", self.to_parens())
    }
}

impl fmt::Display for PlaneTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_parens())
    }
}

/// All plane trees with `n` nodes in a fixed order (lexicographic in the
/// preorder depth sequence, deepest first).
pub fn enumerate_trees(n: usize) -> Result<Vec<PlaneTree>> {
    enumerate_trees_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_trees_capped(n: usize, cap: usize) -> Result<Vec<PlaneTree>> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut out = Vec::new();
    let mut depths = vec![0u32; n];
    fn rec(i: usize, depths: &mut Vec<u32>, out: &mut Vec<PlaneTree>) {
        if i == depths.len() {
            out.push(PlaneTree::from_depths_unchecked(depths.clone()));
            return;
        }
        let max = depths[i - 1] + 1;
        for d in (1..=max).rev() {
            depths[i] = d;
            rec(i + 1, depths, out);
        }
    }
    if n == 1 {
        out.push(PlaneTree::single());
    } else {
        rec(1, &mut depths, &mut out);
    }
    Ok(out)
}
