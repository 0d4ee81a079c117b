//! Cube-filtered chain complexes and the pages of their spectral
//! sequences.
//!
//! A complex filtered by `{0,1}ⁿ` is collapsed to the filtration by weight
//! (the number of ones in the vertex label).  Pages are computed by one
//! filtration-respecting elimination: after cancelling every
//! weight-preserving arrow, the remaining differential is reduced column by
//! column in the persistence order, and each cancelled pair with weight
//! jump `r` contributes to the rank of `d_r`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::homalg::{label_string, ChainComplex};

/// A `{0,1}ⁿ`-filtered complex: a [`ChainComplex`] whose labels are cube
/// vertices and whose arrows weakly increase them.
pub type CubeFilteredComplex = ChainComplex;

#[derive(Debug, Error)]
pub enum SsError {
    #[error("d² ≠ 0: {0}")]
    NotAComplex(String),
    #[error("the differential decreases the filtration at {0}")]
    NotFiltered(String),
}

/// A complex filtered by an integer degree that the differential never
/// decreases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredComplex {
    pub degrees: Vec<usize>,
    pub d: Vec<Vec<usize>>,
    /// Largest possible degree (the number of cube coordinates).
    pub top: usize,
}

/// Replace each cube label by its weight.
pub fn weight_filtration(c: &CubeFilteredComplex) -> FilteredComplex {
    FilteredComplex {
        degrees: c.labels.iter().map(|l| l.count_ones() as usize).collect(),
        d: c.d.clone(),
        top: c.label_dim,
    }
}

/// One page `E_r`: ranks by degree and the ranks of `d_r` leaving each
/// degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralSequencePage {
    pub r: usize,
    pub ranks: BTreeMap<usize, usize>,
    pub d_ranks: BTreeMap<usize, usize>,
}

impl SpectralSequencePage {
    pub fn total(&self) -> usize {
        self.ranks.values().sum()
    }
}

/// All pages up to collapse (and at least up to `E₂`), plus `E_∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralSequence {
    pub pages: Vec<SpectralSequencePage>,
    /// First page from which every differential vanishes.
    pub collapse_page: usize,
    pub e_infty: BTreeMap<usize, usize>,
    pub e_infty_total: usize,
}

impl SpectralSequence {
    pub fn page(&self, r: usize) -> &SpectralSequencePage {
        &self.pages[r.min(self.pages.len() - 1)]
    }
}

/// Symmetric difference of two sorted lists.
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Cancelled pairs as `(source degree, jump)` and survivor degrees.
type Persistence = (Vec<(usize, usize)>, Vec<usize>);

/// Weight jumps of the cancelled pairs, as `(source degree, jump)`, and the
/// degrees of the survivors.
fn persistence(f: &FilteredComplex) -> Result<Persistence, SsError> {
    let n = f.degrees.len();
    for x in 0..n {
        if let Some(&y) = f.d[x].iter().find(|&&y| f.degrees[y] < f.degrees[x]) {
            return Err(SsError::NotFiltered(format!("{x} → {y}")));
        }
    }
    check_d_squared(&f.d)?;
    // Jump-0 arrows first: cancel within each degree.
    let c = ChainComplex::new(
        (0..n).map(|i| i.to_string()).collect(),
        f.degrees.iter().map(|&p| p as u64).collect(),
        0,
        f.d.clone(),
    );
    let red = c.reduce(true);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut before: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in &f.degrees {
        *before.entry(p).or_default() += 1;
    }
    let mut after: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in &red.labels {
        *after.entry(l as usize).or_default() += 1;
    }
    for (p, b) in &before {
        let a = after.get(p).copied().unwrap_or(0);
        for _ in 0..(b - a) / 2 {
            pairs.push((*p, 0));
        }
    }
    // Persistence order: higher degree first; every remaining arrow goes
    // to a strictly higher degree, so boundaries precede their sources.
    let m = red.len();
    let deg = |x: usize| red.labels[x] as usize;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&x| (std::cmp::Reverse(deg(x)), x));
    let mut time = vec![0; m];
    for (t, &x) in order.iter().enumerate() {
        time[x] = t;
    }
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut owner: Vec<Option<usize>> = vec![None; m];
    let mut paired = vec![false; m];
    for &x in &order {
        let mut col: Vec<usize> = red.d[x].iter().map(|&y| time[y]).collect();
        col.sort_unstable();
        while let Some(&piv) = col.last() {
            match owner[piv] {
                Some(j) => col = xor_sorted(&col, &cols[j]),
                None => break,
            }
        }
        if let Some(&piv) = col.last() {
            let y = order[piv];
            owner[piv] = Some(x);
            paired[x] = true;
            paired[y] = true;
            pairs.push((deg(x), deg(y) - deg(x)));
        }
        cols[x] = col;
    }
    let survivors = (0..m).filter(|&x| !paired[x]).map(deg).collect();
    Ok((pairs, survivors))
}

fn check_d_squared(d: &[Vec<usize>]) -> Result<(), SsError> {
    for (x, ts) in d.iter().enumerate() {
        let mut acc: Vec<usize> = Vec::new();
        for &y in ts {
            let mut t = d[y].clone();
            t.sort_unstable();
            acc = xor_sorted(&acc, &t);
        }
        if !acc.is_empty() {
            return Err(SsError::NotAComplex(format!("at generator {x}")));
        }
    }
    Ok(())
}

/// The pages of the spectral sequence of a filtered complex.
pub fn pages(f: &FilteredComplex) -> Result<SpectralSequence, SsError> {
    let (pairs, survivors) = persistence(f)?;
    let collapse_page = pairs.iter().map(|&(_, r)| r + 1).max().unwrap_or(0);
    let last = collapse_page.max(2);
    let mut ranks: BTreeMap<usize, usize> = (0..=f.top).map(|p| (p, 0)).collect();
    for &p in &f.degrees {
        *ranks.entry(p).or_default() += 1;
    }
    let mut out = Vec::new();
    for r in 0..=last {
        let mut d_ranks: BTreeMap<usize, usize> = (0..=f.top).map(|p| (p, 0)).collect();
        for &(p, jump) in &pairs {
            if jump == r {
                *d_ranks.entry(p).or_default() += 1;
            }
        }
        out.push(SpectralSequencePage {
            r,
            ranks: ranks.clone(),
            d_ranks: d_ranks.clone(),
        });
        for (&p, &k) in &d_ranks {
            if k > 0 {
                *ranks.get_mut(&p).expect("degree in range") -= k;
                *ranks.entry(p + r).or_default() -= k;
            }
        }
    }
    let mut e_infty: BTreeMap<usize, usize> = (0..=f.top).map(|p| (p, 0)).collect();
    for p in survivors {
        *e_infty.entry(p).or_default() += 1;
    }
    debug_assert_eq!(&e_infty, &out.last().expect("at least one page").ranks);
    let e_infty_total = e_infty.values().sum();
    Ok(SpectralSequence {
        pages: out,
        collapse_page,
        e_infty,
        e_infty_total,
    })
}

/// Homology rank over F2.
pub fn homology_rank(c: &ChainComplex) -> usize {
    c.homology_rank()
}

/// Generator counts (`E₀`) and homology ranks (`E₁`) per cube vertex,
/// keyed by the vertex as a 0/1 string.
pub fn vertex_ranks(c: &CubeFilteredComplex) -> (BTreeMap<String, usize>, BTreeMap<String, usize>) {
    let vertices: Vec<u64> = (0..1u64 << c.label_dim).collect();
    let res: Vec<(String, usize, usize)> = vertices
        .par_iter()
        .map(|&v| {
            let piece = c.label_piece(v);
            (label_string(v, c.label_dim), piece.len(), piece.homology_rank())
        })
        .collect();
    let e0 = res.iter().map(|(k, n, _)| (k.clone(), *n)).collect();
    let e1 = res.into_iter().map(|(k, _, h)| (k, h)).collect();
    (e0, e1)
}

/// Text grid of per-vertex ranks for up to three coordinates, rows by the
/// first coordinate.
pub fn render_grid(ranks: &BTreeMap<String, usize>, dim: usize) -> String {
    if dim == 0 {
        return format!("{}\n", ranks.get("").copied().unwrap_or(0));
    }
    let cols = 1usize << (dim - 1);
    let mut out = String::new();
    for first in ['1', '0'] {
        let row: Vec<String> = (0..cols)
            .map(|rest| {
                let key: String = std::iter::once(first)
                    .chain((0..dim - 1).map(|i| if rest >> i & 1 == 1 { '1' } else { '0' }))
                    .collect();
                ranks.get(&key).copied().unwrap_or(0).to_string()
            })
            .collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex(labels: &[u64], dim: usize, d: Vec<Vec<usize>>) -> ChainComplex {
        ChainComplex::new(
            (0..labels.len()).map(|i| format!("g{i}")).collect(),
            labels.to_vec(),
            dim,
            d,
        )
    }

    /// The final Hopf complex as displayed: mXJa⁰¹, rYKb¹¹, sYKb¹¹,
    /// mZ₂Ia⁰⁰, mZ₁Ia⁰⁰, mYIb¹⁰ (first coordinate is the low bit).
    fn hopf() -> ChainComplex {
        complex(
            &[0b10, 0b11, 0b11, 0b00, 0b00, 0b01],
            2,
            vec![vec![2], vec![], vec![], vec![], vec![0, 5], vec![2]],
        )
    }

    #[test]
    fn hopf_pages() {
        let c = hopf();
        let w = weight_filtration(&c);
        let mut by_w = BTreeMap::new();
        for &p in &w.degrees {
            *by_w.entry(p).or_insert(0) += 1;
        }
        assert_eq!(by_w, BTreeMap::from([(0, 2), (1, 2), (2, 2)]));
        let ss = pages(&w).unwrap();
        assert_eq!(ss.page(2).ranks, BTreeMap::from([(0, 1), (1, 0), (2, 1)]));
        assert_eq!(ss.collapse_page, 2);
        assert_eq!(ss.e_infty_total, 2);
        assert_eq!(homology_rank(&c), 2);
        let (e0, e1) = vertex_ranks(&c);
        assert_eq!(e0, BTreeMap::from([("00".into(), 2), ("01".into(), 1), ("10".into(), 1), ("11".into(), 2)]));
        assert_eq!(e1, e0);
    }

    #[test]
    fn zero_differential_collapses_immediately() {
        let c = complex(&[0, 1, 1], 1, vec![vec![], vec![], vec![]]);
        let ss = pages(&weight_filtration(&c)).unwrap();
        assert_eq!(ss.collapse_page, 0);
        assert_eq!(ss.page(0).ranks, ss.e_infty);
    }

    #[test]
    fn single_arrow_dies_on_e2() {
        let c = complex(&[0, 1], 1, vec![vec![1], vec![]]);
        let ss = pages(&weight_filtration(&c)).unwrap();
        assert_eq!(ss.page(1).ranks, BTreeMap::from([(0, 1), (1, 1)]));
        assert_eq!(ss.page(1).d_ranks, BTreeMap::from([(0, 1), (1, 0)]));
        assert_eq!(ss.page(2).total(), 0);
    }

    #[test]
    fn rejects_non_complexes() {
        let f = FilteredComplex {
            degrees: vec![0, 1, 2],
            d: vec![vec![1], vec![2], vec![]],
            top: 2,
        };
        assert!(matches!(pages(&f), Err(SsError::NotAComplex(_))));
    }

    #[test]
    fn grid_layout() {
        let (e0, _) = vertex_ranks(&hopf());
        assert_eq!(render_grid(&e0, 2), "1\t2\n2\t1\n");
    }
}
