//! Reduced Khovanov homology over F2 of plat closures, computed directly
//! from the cube of resolutions.
//!
//! Strands are numbered `1..=n` left to right and the braid word is read
//! top to bottom.  Both plats pair strands `(1,2), (3,4), …`.  The marked
//! point lies on the top cap of strand 1.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::homalg::ChainComplex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("a plat closure needs an even number of at least 4 strands, got {0}")]
    BadStrandCount(usize),
    #[error("generator s{index} is out of range for {strands} strands")]
    OutOfRange { index: usize, strands: usize },
    #[error(
        "generator s{index} is forbidden on {strands} strands: the last strand of a plat \
         presentation must not be involved in any crossing"
    )]
    LastStrand { index: usize, strands: usize },
}

/// A braid generator `s_index^{±1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Generator {
    pub index: usize,
    pub positive: bool,
}

/// A braid word on an even number of strands, closed by plats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlatDiagram {
    pub strands: usize,
    pub word: Vec<Generator>,
}

impl PlatDiagram {
    pub fn new(strands: usize, word: Vec<Generator>) -> Result<Self, DiagramError> {
        if strands < 4 || strands % 2 == 1 {
            return Err(DiagramError::BadStrandCount(strands));
        }
        for g in &word {
            if g.index == strands - 1 {
                return Err(DiagramError::LastStrand {
                    index: g.index,
                    strands,
                });
            }
            if g.index == 0 || g.index >= strands {
                return Err(DiagramError::OutOfRange {
                    index: g.index,
                    strands,
                });
            }
        }
        Ok(PlatDiagram { strands, word })
    }

    pub fn crossings(&self) -> usize {
        self.word.len()
    }
}

/// Whether the `k`-th crossing is resolved anti-braid-like at vertex
/// coordinate `bit`.  For a positive generator the 0-resolution is the
/// anti-braid-like one; for a negative generator it is the 1-resolution.
fn anti_braid(g: &Generator, bit: bool) -> bool {
    g.positive != bit
}

/// One resolution: its circles, given by the circle through each point
/// `(level, strand)` where strands meet the levels between crossings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub circles: usize,
    pub marked: usize,
    point_circle: Vec<usize>,
    strands: usize,
}

impl Resolution {
    fn circle_at(&self, level: usize, strand: usize) -> usize {
        self.point_circle[level * self.strands + strand - 1]
    }

    /// A point on each circle.
    fn representatives(&self) -> Vec<usize> {
        let mut rep = vec![usize::MAX; self.circles];
        for (p, &c) in self.point_circle.iter().enumerate().rev() {
            rep[c] = p;
        }
        rep
    }
}

/// An edge of the cube: a merge of two circles or a split of one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Merge,
    Split,
}

/// Circles at every vertex of the cube.
#[derive(Clone, Debug)]
pub struct ResolutionCube {
    pub crossings: usize,
    pub vertices: Vec<Resolution>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

fn resolve(d: &PlatDiagram, v: u64) -> Resolution {
    let n = d.strands;
    let m = d.crossings();
    // Point (level, strand) with level 0 the top and m the bottom.
    let pt = |level: usize, s: usize| level * n + (s - 1);
    let mut uf = UnionFind((0..(m + 1) * n).collect());
    for s in (1..n).step_by(2) {
        uf.union(pt(0, s), pt(0, s + 1));
        uf.union(pt(m, s), pt(m, s + 1));
    }
    for (k, g) in d.word.iter().enumerate() {
        let i = g.index;
        for s in 1..=n {
            if s != i && s != i + 1 {
                uf.union(pt(k, s), pt(k + 1, s));
            }
        }
        if anti_braid(g, v >> k & 1 == 1) {
            uf.union(pt(k, i), pt(k, i + 1));
            uf.union(pt(k + 1, i), pt(k + 1, i + 1));
        } else {
            uf.union(pt(k, i), pt(k + 1, i));
            uf.union(pt(k, i + 1), pt(k + 1, i + 1));
        }
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let point_circle: Vec<usize> = (0..(m + 1) * n)
        .map(|p| {
            let r = uf.find(p);
            let len = ids.len();
            *ids.entry(r).or_insert(len)
        })
        .collect();
    Resolution {
        circles: ids.len(),
        marked: point_circle[pt(0, 1)],
        point_circle,
        strands: n,
    }
}

/// Resolve every vertex of the cube.
pub fn resolution_cube(d: &PlatDiagram) -> ResolutionCube {
    let m = d.crossings();
    let vertices = (0..1u64 << m).into_par_iter().map(|v| resolve(d, v)).collect();
    ResolutionCube { crossings: m, vertices }
}

impl ResolutionCube {
    pub fn edge(&self, v: u64, k: usize) -> EdgeKind {
        let w = v | 1 << k;
        if self.vertices[w as usize].circles < self.vertices[v as usize].circles {
            EdgeKind::Merge
        } else {
            EdgeKind::Split
        }
    }
}

/// Reduced Khovanov ranks by cube weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KhRanks {
    pub by_weight: BTreeMap<usize, usize>,
    pub total: usize,
}

impl KhRanks {
    fn from_counts(by_weight: BTreeMap<usize, usize>) -> Self {
        let total = by_weight.values().sum();
        KhRanks { by_weight, total }
    }

    /// The same ranks with the weight grading reversed (`w ↦ c - w`), as
    /// for the mirror diagram.
    pub fn reversed(&self, crossings: usize) -> KhRanks {
        KhRanks::from_counts(self.by_weight.iter().map(|(w, r)| (crossings - w, *r)).collect())
    }
}

/// The Khovanov complex of a diagram.  A state is a vertex and a subset of
/// its circles labelled `x` (the rest are labelled `1`); the reduced
/// complex keeps the states whose marked circle is labelled `x`.
pub fn khovanov_complex(d: &PlatDiagram, reduced: bool) -> ChainComplex {
    let cube = resolution_cube(d);
    let m = cube.crossings;
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut names = Vec::new();
    let mut labels = Vec::new();
    for v in 0..1u64 << m {
        let res = &cube.vertices[v as usize];
        for s in 0..1u64 << res.circles {
            if reduced && s >> res.marked & 1 == 0 {
                continue;
            }
            index.insert((v, s), names.len());
            names.push(format!("{v:b}:{s:b}"));
            labels.push(v);
        }
    }
    let mut dm = vec![Vec::new(); names.len()];
    for (&(v, s), &id) in &index {
        for k in 0..m {
            if v >> k & 1 == 1 {
                continue;
            }
            let w = v | 1 << k;
            let (rv, rw) = (&cube.vertices[v as usize], &cube.vertices[w as usize]);
            for t in edge_map(d, rv, rw, k, s) {
                if let Some(&j) = index.get(&(w, t)) {
                    dm[id].push(j);
                }
            }
        }
    }
    ChainComplex::new(names, labels, m, dm)
}

/// The merge/split map of the `k`-th crossing on one state.  Circles of
/// the two resolutions are matched through the points they pass through;
/// only the circles at the crossing change.
fn edge_map(d: &PlatDiagram, rv: &Resolution, rw: &Resolution, k: usize, s: u64) -> Vec<u64> {
    let i = d.word[k].index;
    let corners = |r: &Resolution| {
        let mut c = vec![
            r.circle_at(k, i),
            r.circle_at(k, i + 1),
            r.circle_at(k + 1, i),
            r.circle_at(k + 1, i + 1),
        ];
        c.sort_unstable();
        c.dedup();
        c
    };
    let (cv, cw) = (corners(rv), corners(rw));
    let x_of = |c: usize| s >> c & 1 == 1;
    let rep = rv.representatives();
    let mut t = 0u64;
    for (c, &point) in rep.iter().enumerate().take(rv.circles) {
        if !cv.contains(&c) && x_of(c) {
            t |= 1 << rw.point_circle[point];
        }
    }
    match (cv.as_slice(), cw.as_slice()) {
        // Merge: m(1⊗1) = 1, m(1⊗x) = m(x⊗1) = x, m(x⊗x) = 0.
        (&[a, b], &[m]) => match (x_of(a), x_of(b)) {
            (false, false) => vec![t],
            (true, true) => vec![],
            _ => vec![t | 1 << m],
        },
        // Split: Δ(1) = 1⊗x + x⊗1, Δ(x) = x⊗x.
        (&[c], &[p, q]) => {
            if x_of(c) {
                vec![t | 1 << p | 1 << q]
            } else {
                vec![t | 1 << p, t | 1 << q]
            }
        }
        _ => unreachable!("adjacent resolutions differ by one merge or split"),
    }
}

/// Reduced Khovanov homology ranks by cube weight.
pub fn reduced_kh(d: &PlatDiagram) -> KhRanks {
    kh_ranks(&khovanov_complex(d, true))
}

/// Unreduced ranks (a consistency check: twice the reduced ranks over F2).
pub fn unreduced_kh(d: &PlatDiagram) -> KhRanks {
    kh_ranks(&khovanov_complex(d, false))
}

fn kh_ranks(c: &ChainComplex) -> KhRanks {
    let mut by_weight: BTreeMap<usize, usize> = (0..=c.label_dim).map(|w| (w, 0)).collect();
    // The differential raises the weight by exactly one, so homology splits
    // by weight.
    let weights: Vec<usize> = c.labels.iter().map(|l| l.count_ones() as usize).collect();
    let red = c.reduce(false);
    for l in &red.labels {
        *by_weight.entry(l.count_ones() as usize).or_default() += 1;
    }
    debug_assert_eq!(weights.len(), c.len());
    KhRanks::from_counts(by_weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagram(strands: usize, word: &[i32]) -> PlatDiagram {
        let w = word
            .iter()
            .map(|&i| Generator {
                index: i.unsigned_abs() as usize,
                positive: i > 0,
            })
            .collect();
        PlatDiagram::new(strands, w).unwrap()
    }

    #[test]
    fn hopf_cube() {
        let cube = resolution_cube(&diagram(4, &[2, 2]));
        let counts: Vec<usize> = cube.vertices.iter().map(|r| r.circles).collect();
        assert_eq!(counts, [2, 1, 1, 2]);
        assert_eq!(resolution_cube(&diagram(4, &[])).vertices[0].circles, 2);
    }

    #[test]
    fn small_links() {
        assert_eq!(reduced_kh(&diagram(4, &[2])).total, 1);
        assert_eq!(reduced_kh(&diagram(4, &[-2])).total, 1);
        let hopf = reduced_kh(&diagram(4, &[2, 2]));
        assert_eq!(hopf.total, 2);
        assert_eq!(hopf.by_weight.values().filter(|&&r| r == 1).count(), 2);
        assert_eq!(reduced_kh(&diagram(4, &[2, 2, 2])).total, 3);
        assert_eq!(reduced_kh(&diagram(4, &[])).total, 2);
        // An unused strand pair closes up into a split unknot.
        assert_eq!(reduced_kh(&diagram(6, &[2, 2])).total, 4);
        // Joining it by one crossing is a Reidemeister I move.
        assert_eq!(reduced_kh(&diagram(6, &[2, 2, 4])).total, 2);
        assert_eq!(reduced_kh(&diagram(6, &[2, 2, -4])).total, 2);
    }

    #[test]
    fn unreduced_is_twice_reduced() {
        for w in [&[2, 2][..], &[2, -1, 2], &[1, 2, 1, 2], &[2, 2, 2]] {
            let d = diagram(4, w);
            assert_eq!(unreduced_kh(&d).total, 2 * reduced_kh(&d).total, "{w:?}");
        }
    }

    #[test]
    fn validation() {
        assert!(matches!(
            PlatDiagram::new(4, vec![Generator { index: 3, positive: true }]),
            Err(DiagramError::LastStrand { .. })
        ));
        assert!(matches!(PlatDiagram::new(5, vec![]), Err(DiagramError::BadStrandCount(5))));
    }
}
