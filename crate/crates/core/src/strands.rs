//! The truncated strands algebra of a pointed matched circle, and the
//! outer product algebra over which type DD structures live.
//!
//! A basic generator is a symmetrized strand diagram: a set of horizontal
//! matched pairs plus moving chords with pairwise disjoint interiors.  Since
//! the interiors are disjoint, the moving chords are determined by the masks
//! of their start and end positions (pair the sorted starts with the sorted
//! ends), which keeps a generator `Copy` and three words wide.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::pmc::{interval_cover, Chord, Pmc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrandsError {
    #[error("chords {0} and {1} overlap")]
    Overlap(Chord, Chord),
    #[error("elements live over different pointed matched circles")]
    MixedPmc,
    #[error("weight {weight} exceeds the number of pairs {pairs}")]
    Weight { weight: usize, pairs: usize },
}

/// A set of matched pairs, as a bit mask of pair indices.
pub type Idempotent = u64;

/// A basic generator of the strands algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Strands {
    /// Horizontal matched pairs (mask of pair indices).
    pub horiz: u64,
    /// Start positions of the moving chords (mask of positions).
    pub starts: u64,
    /// End positions of the moving chords (mask of positions).
    pub ends: u64,
}

fn bits(mut m: u64) -> impl Iterator<Item = u8> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as u8;
            m &= m - 1;
            Some(b)
        }
    })
}

impl Strands {
    pub fn idempotent(pairs: Idempotent) -> Self {
        Strands {
            horiz: pairs,
            starts: 0,
            ends: 0,
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.starts == 0
    }

    /// Moving chords in increasing order.
    pub fn chords(&self) -> Vec<Chord> {
        bits(self.starts)
            .zip(bits(self.ends))
            .map(|(start, end)| Chord { start, end })
            .collect()
    }

    /// Unit intervals covered by moving chords (local multiplicity one).
    pub fn cover(&self) -> u64 {
        bits(self.starts)
            .zip(bits(self.ends))
            .fold(0, |acc, (s, e)| acc | interval_cover(s, e))
    }

    pub fn num_moving(&self) -> usize {
        self.starts.count_ones() as usize
    }

    pub fn weight(&self) -> usize {
        (self.horiz.count_ones() + self.starts.count_ones()) as usize
    }

    pub fn left_idem(&self, pmc: &Pmc) -> Idempotent {
        self.horiz | pmc.pairs_of_positions(self.starts)
    }

    pub fn right_idem(&self, pmc: &Pmc) -> Idempotent {
        self.horiz | pmc.pairs_of_positions(self.ends)
    }

    /// Build from chords and horizontals; `None` if the data is not a
    /// valid generator.
    pub fn from_parts(pmc: &Pmc, horiz: u64, chords: &[Chord]) -> Option<Self> {
        let mut starts = 0u64;
        let mut ends = 0u64;
        for c in chords {
            if starts & (1 << c.start) != 0 || ends & (1 << c.end) != 0 {
                return None;
            }
            starts |= 1 << c.start;
            ends |= 1 << c.end;
        }
        let s = Strands {
            horiz,
            starts,
            ends,
        };
        // Reconstructed chords must agree with the requested ones.
        let mut want: Vec<Chord> = chords.to_vec();
        want.sort_unstable();
        if s.chords() != want {
            return None;
        }
        s.is_valid(pmc).then_some(s)
    }

    pub fn is_valid(&self, pmc: &Pmc) -> bool {
        let n = pmc.num_points() as u8;
        if self.starts.count_ones() != self.ends.count_ones() {
            return false;
        }
        let mut prev_end = 0u8;
        for (s, e) in bits(self.starts).zip(bits(self.ends)) {
            if s == 0 || e > n || s >= e || s < prev_end {
                return false;
            }
            prev_end = e;
        }
        let sp = pmc.pairs_of_positions(self.starts);
        let ep = pmc.pairs_of_positions(self.ends);
        sp.count_ones() == self.starts.count_ones()
            && ep.count_ones() == self.ends.count_ones()
            && sp & self.horiz == 0
            && ep & self.horiz == 0
            && self.horiz >> pmc.num_pairs() == 0
    }

    /// Debug notation `H{pairs}|M{[i,j],...}`.
    pub fn notation(&self, pmc: &Pmc) -> String {
        let h: Vec<String> = bits(self.horiz)
            .map(|i| {
                let (a, b) = pmc.pair(i as usize);
                format!("{a}-{b}")
            })
            .collect();
        let m: Vec<String> = self.chords().iter().map(|c| c.to_string()).collect();
        format!("H{{{}}}|M{{{}}}", h.join(","), m.join(","))
    }
}

/// Torus names of the eight basic generators (`iota0`, `rho12`, ...).
pub fn torus_name(s: &Strands, letter: &str) -> String {
    if s.is_idempotent() {
        // iota0 = pair {1,3} (pair index 0), iota1 = pair {2,4}.
        return match s.horiz {
            1 => "ι0".to_string(),
            2 => "ι1".to_string(),
            _ => format!("{s:?}"),
        };
    }
    let cs = s.chords();
    let parts: Vec<String> = cs
        .iter()
        .map(|c| {
            let digits: String = (c.start..c.end).map(|p| p.to_string()).collect();
            format!("{letter}{digits}")
        })
        .collect();
    parts.join("·")
}

/// The strands algebra `A(Z)` (all weights) of a pointed matched circle.
#[derive(Clone)]
pub struct StrandsAlgebra {
    pmc: Arc<Pmc>,
    index: Arc<OnceLock<BasisIndex>>,
}

impl StrandsAlgebra {
    pub fn new(pmc: Arc<Pmc>) -> Self {
        StrandsAlgebra {
            pmc,
            index: Arc::new(OnceLock::new()),
        }
    }

    /// The middle-weight basis with idempotent lookups, built on first use.
    pub fn index(&self) -> &BasisIndex {
        self.index.get_or_init(|| BasisIndex::new(&self.pmc, self.pmc.genus()))
    }

    pub fn pmc(&self) -> &Pmc {
        &self.pmc
    }

    pub fn pmc_arc(&self) -> &Arc<Pmc> {
        &self.pmc
    }

    /// Product of basic generators; `None` means zero.
    pub fn mul(&self, a: &Strands, b: &Strands) -> Option<Strands> {
        mul_strands(&self.pmc, a, b)
    }

    /// Differential of a basic generator.
    pub fn d(&self, a: &Strands) -> Vec<Strands> {
        d_strands(&self.pmc, a)
    }

    /// All idempotents of the given weight.
    pub fn idempotents(&self, weight: usize) -> Vec<Idempotent> {
        idempotents(&self.pmc, weight)
    }

    /// All middle-weight `y` with `n·y = x` (`left = true`) or `y·n = x`.
    /// Covers add under multiplication and multiplicities are at most one,
    /// so only elements covering `cover(x) - cover(n)` are candidates.
    pub fn quotients(&self, n: &Strands, x: &Strands, left: bool) -> Vec<Strands> {
        let pmc = self.pmc();
        let (nc, xc) = (n.cover(), x.cover());
        if nc & !xc != 0 {
            return Vec::new();
        }
        let want = xc & !nc;
        let (l, r) = if left {
            (n.right_idem(pmc), x.right_idem(pmc))
        } else {
            (x.left_idem(pmc), n.left_idem(pmc))
        };
        let idx = self.index();
        idx.bucket(l, r)
            .iter()
            .map(|&i| idx.elements[i])
            .filter(|y| y.cover() == want)
            .filter(|y| {
                let p = if left { self.mul(n, y) } else { self.mul(y, n) };
                p == Some(*x)
            })
            .collect()
    }

    /// All basic generators of the given weight.
    pub fn basis(&self, weight: usize) -> Vec<Strands> {
        basis(&self.pmc, weight)
    }
}

/// All idempotents (sets of pairs) of the given weight, in increasing mask
/// order.
pub fn idempotents(pmc: &Pmc, weight: usize) -> Vec<Idempotent> {
    let n = pmc.num_pairs();
    (0u64..(1u64 << n))
        .filter(|m| m.count_ones() as usize == weight)
        .collect()
}

/// Product of two basic generators (`None` for zero).
pub fn mul_strands(pmc: &Pmc, a: &Strands, b: &Strands) -> Option<Strands> {
    if a.right_idem(pmc) != b.left_idem(pmc) {
        return None;
    }
    if a.cover() & b.cover() != 0 {
        return None;
    }
    // Pairs where a strand of `a` ends and a strand of `b` starts must meet
    // at the same point.
    let common = pmc.pairs_of_positions(a.ends) & pmc.pairs_of_positions(b.starts);
    let pos = pmc.positions_of_pairs(common);
    if a.ends & pos != b.starts & pos {
        return None;
    }
    let joined = a.ends & b.starts;
    Some(Strands {
        horiz: a.horiz & b.horiz,
        starts: a.starts | (b.starts & !joined),
        ends: (a.ends & !joined) | b.ends,
    })
}

/// Differential: resolve each crossing between a moving chord and a
/// horizontal strand whose endpoint lies strictly inside the chord.
pub fn d_strands(pmc: &Pmc, a: &Strands) -> Vec<Strands> {
    let mut out = Vec::new();
    if a.starts == 0 || a.horiz == 0 {
        return out;
    }
    for c in a.chords() {
        for i in bits(a.horiz) {
            let (p, q) = pmc.pair(i as usize);
            for x in [p, q] {
                if c.contains_interior(x) {
                    out.push(Strands {
                        horiz: a.horiz & !(1 << i),
                        starts: a.starts | (1 << x),
                        ends: a.ends | (1 << x),
                    });
                }
            }
        }
    }
    out
}

/// Enumerate all sets of moving chords with disjoint interiors and distinct
/// start pairs / end pairs, calling `f(starts, ends)` for each.
fn for_each_moving_set(pmc: &Pmc, max_chords: usize, f: &mut dyn FnMut(u64, u64)) {
    let n = pmc.num_points() as u8;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        pmc: &Pmc,
        n: u8,
        from: u8,
        left: usize,
        starts: u64,
        ends: u64,
        sp: u64,
        ep: u64,
        f: &mut dyn FnMut(u64, u64),
    ) {
        f(starts, ends);
        if left == 0 {
            return;
        }
        for s in from..n {
            let ps = 1u64 << pmc.pair_of(s);
            if sp & ps != 0 {
                continue;
            }
            for e in (s + 1)..=n {
                let pe = 1u64 << pmc.pair_of(e);
                if ep & pe != 0 {
                    continue;
                }
                rec(
                    pmc,
                    n,
                    e,
                    left - 1,
                    starts | (1 << s),
                    ends | (1 << e),
                    sp | ps,
                    ep | pe,
                    f,
                );
            }
        }
    }
    rec(pmc, n, 1, max_chords, 0, 0, 0, 0, f);
}

/// All basic generators of a given weight (deterministic order).
pub fn basis(pmc: &Pmc, weight: usize) -> Vec<Strands> {
    let mut out = Vec::new();
    let npairs = pmc.num_pairs();
    for_each_moving_set(pmc, weight, &mut |starts, ends| {
        let used = pmc.pairs_of_positions(starts) | pmc.pairs_of_positions(ends);
        let m = starts.count_ones() as usize;
        if m > weight {
            return;
        }
        let need = weight - m;
        let free: Vec<u8> = (0..npairs as u8).filter(|i| used & (1 << i) == 0).collect();
        for_each_subset(&free, need, &mut |h| {
            out.push(Strands {
                horiz: h,
                starts,
                ends,
            })
        });
    });
    out.sort_unstable();
    out
}

fn for_each_subset(items: &[u8], k: usize, f: &mut dyn FnMut(u64)) {
    fn rec(items: &[u8], k: usize, acc: u64, f: &mut dyn FnMut(u64)) {
        if k == 0 {
            f(acc);
            return;
        }
        if items.len() < k {
            return;
        }
        rec(&items[1..], k - 1, acc | (1 << items[0]), f);
        rec(&items[1..], k, acc, f);
    }
    rec(items, k, 0, f);
}

// ---------------------------------------------------------------------------
// Algebra elements
// ---------------------------------------------------------------------------

/// An F2-linear combination of basic generators.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct AlgebraElement {
    pub terms: BTreeSet<Strands>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_basic(s: Strands) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(s);
        AlgebraElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn toggle(&mut self, s: Strands) {
        if !self.terms.remove(&s) {
            self.terms.insert(s);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.toggle(*t);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn notation(&self, pmc: &Pmc) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.notation(pmc)).collect();
        parts.join(" + ")
    }
}

/// F2-bilinear product.
pub fn multiply(pmc: &Pmc, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for x in &a.terms {
        for y in &b.terms {
            if let Some(z) = mul_strands(pmc, x, y) {
                out.toggle(z);
            }
        }
    }
    out
}

/// Differential, extended linearly.
pub fn differential(pmc: &Pmc, a: &AlgebraElement) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for x in &a.terms {
        for y in d_strands(pmc, x) {
            out.toggle(y);
        }
    }
    out
}

/// `a(S)`: the sum over all horizontal completions of the moving chords `S`
/// to diagrams of the requested weight.
pub fn set_element(pmc: &Pmc, chords: &[Chord], weight: usize) -> Result<AlgebraElement, StrandsError> {
    for (i, a) in chords.iter().enumerate() {
        for b in &chords[i + 1..] {
            if a.cover() & b.cover() != 0 {
                return Err(StrandsError::Overlap(*a, *b));
            }
        }
    }
    if weight > pmc.num_pairs() {
        return Err(StrandsError::Weight {
            weight,
            pairs: pmc.num_pairs(),
        });
    }
    let mut out = AlgebraElement::zero();
    let probe = match Strands::from_parts(pmc, 0, chords) {
        Some(s) => s,
        None => return Ok(out),
    };
    if probe.num_moving() > weight {
        return Ok(out);
    }
    let used = pmc.pairs_of_positions(probe.starts) | pmc.pairs_of_positions(probe.ends);
    let free: Vec<u8> = (0..pmc.num_pairs() as u8)
        .filter(|i| used & (1 << i) == 0)
        .collect();
    for_each_subset(&free, weight - probe.num_moving(), &mut |h| {
        out.toggle(Strands { horiz: h, ..probe });
    });
    Ok(out)
}

/// `a(xi)` for a single chord.
pub fn chord_element(pmc: &Pmc, chord: Chord, weight: usize) -> Result<AlgebraElement, StrandsError> {
    set_element(pmc, &[chord], weight)
}

// ---------------------------------------------------------------------------
// Basis index: generators bucketed by (left, right) idempotent
// ---------------------------------------------------------------------------

/// The middle-weight (or any fixed weight) basis with lookups by idempotents.
pub struct BasisIndex {
    pub elements: Vec<Strands>,
    pub index: HashMap<Strands, usize>,
    pub by_idems: HashMap<(Idempotent, Idempotent), Vec<usize>>,
    pub by_left: HashMap<Idempotent, Vec<usize>>,
    pub by_right: HashMap<Idempotent, Vec<usize>>,
}

impl BasisIndex {
    pub fn new(pmc: &Pmc, weight: usize) -> Self {
        let elements = basis(pmc, weight);
        let mut index = HashMap::with_capacity(elements.len());
        let mut by_idems: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
        let mut by_left: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut by_right: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            index.insert(*e, i);
            let (l, r) = (e.left_idem(pmc), e.right_idem(pmc));
            by_idems.entry((l, r)).or_default().push(i);
            by_left.entry(l).or_default().push(i);
            by_right.entry(r).or_default().push(i);
        }
        BasisIndex {
            elements,
            index,
            by_idems,
            by_left,
            by_right,
        }
    }

    pub fn bucket(&self, left: Idempotent, right: Idempotent) -> &[usize] {
        self.by_idems
            .get(&(left, right))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn with_left(&self, left: Idempotent) -> &[usize] {
        self.by_left.get(&left).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn with_right(&self, right: Idempotent) -> &[usize] {
        self.by_right.get(&right).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

// ---------------------------------------------------------------------------
// Generic dg algebra interface used by the homological algebra layer
// ---------------------------------------------------------------------------

/// A dg algebra over F2 presented by a basis closed under products (a
/// product of basic elements is basic or zero) with idempotent bookkeeping.
pub trait DgAlgebra: Clone + Send + Sync {
    type Basis: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync;
    type Idem: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn mul(&self, a: &Self::Basis, b: &Self::Basis) -> Option<Self::Basis>;
    fn d(&self, a: &Self::Basis) -> Vec<Self::Basis>;
    fn left_idem(&self, a: &Self::Basis) -> Self::Idem;
    fn right_idem(&self, a: &Self::Basis) -> Self::Idem;
    fn unit(&self, i: Self::Idem) -> Self::Basis;
    fn is_unit(&self, a: &Self::Basis) -> bool;
    fn fmt_basis(&self, a: &Self::Basis) -> String;
    fn fmt_idem(&self, i: &Self::Idem) -> String;
}

impl DgAlgebra for StrandsAlgebra {
    type Basis = Strands;
    type Idem = Idempotent;

    fn mul(&self, a: &Strands, b: &Strands) -> Option<Strands> {
        mul_strands(&self.pmc, a, b)
    }
    fn d(&self, a: &Strands) -> Vec<Strands> {
        d_strands(&self.pmc, a)
    }
    fn left_idem(&self, a: &Strands) -> u64 {
        a.left_idem(&self.pmc)
    }
    fn right_idem(&self, a: &Strands) -> u64 {
        a.right_idem(&self.pmc)
    }
    fn unit(&self, i: u64) -> Strands {
        Strands::idempotent(i)
    }
    fn is_unit(&self, a: &Strands) -> bool {
        a.is_idempotent()
    }
    fn fmt_basis(&self, a: &Strands) -> String {
        a.notation(&self.pmc)
    }
    fn fmt_idem(&self, i: &u64) -> String {
        Strands::idempotent(*i).notation(&self.pmc)
    }
}

/// Basic element of the outer algebra: `a ⊗ a'` with `a` over `Z` and `a'`
/// over the orientation-reversed circle `Z'` (in `Z'`'s own coordinates).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OuterBasis {
    pub left: Strands,
    pub right: Strands,
}

/// Idempotent of the outer algebra: (pairs of `Z`, pairs of `Z'`).
pub type OuterIdem = (Idempotent, Idempotent);

/// The outer product algebra `A(Z) ⊗ A(Z')`.
///
/// The second factor is written in the coordinates of `Z' = -Z`, where
/// position `p` of `Z` corresponds to `4k+1-p`.  In those coordinates the
/// product is componentwise in the usual order; pulled back to `Z`'s own
/// coordinates this is exactly the opposite algebra of `A(Z)` in the second
/// factor, since the mirror reverses the order of concatenation.
#[derive(Clone)]
pub struct OuterAlgebra {
    pub z: Arc<Pmc>,
    pub zp: Arc<Pmc>,
}

impl OuterAlgebra {
    pub fn new(z: Arc<Pmc>) -> Self {
        let zp = Arc::new(z.mirror());
        OuterAlgebra { z, zp }
    }

    /// The same algebra with the two factors exchanged (the outer algebra
    /// of `Z'`).
    pub fn swapped(&self) -> Self {
        OuterAlgebra {
            z: self.zp.clone(),
            zp: self.z.clone(),
        }
    }

    pub fn left_alg(&self) -> StrandsAlgebra {
        StrandsAlgebra::new(self.z.clone())
    }

    pub fn right_alg(&self) -> StrandsAlgebra {
        StrandsAlgebra::new(self.zp.clone())
    }

    pub fn elem(left: Strands, right: Strands) -> OuterBasis {
        OuterBasis { left, right }
    }
}

impl DgAlgebra for OuterAlgebra {
    type Basis = OuterBasis;
    type Idem = OuterIdem;

    fn mul(&self, a: &OuterBasis, b: &OuterBasis) -> Option<OuterBasis> {
        Some(OuterBasis {
            left: mul_strands(&self.z, &a.left, &b.left)?,
            right: mul_strands(&self.zp, &a.right, &b.right)?,
        })
    }
    fn d(&self, a: &OuterBasis) -> Vec<OuterBasis> {
        let mut out: Vec<OuterBasis> = d_strands(&self.z, &a.left)
            .into_iter()
            .map(|l| OuterBasis { left: l, right: a.right })
            .collect();
        out.extend(
            d_strands(&self.zp, &a.right)
                .into_iter()
                .map(|r| OuterBasis { left: a.left, right: r }),
        );
        out
    }
    fn left_idem(&self, a: &OuterBasis) -> OuterIdem {
        (a.left.left_idem(&self.z), a.right.left_idem(&self.zp))
    }
    fn right_idem(&self, a: &OuterBasis) -> OuterIdem {
        (a.left.right_idem(&self.z), a.right.right_idem(&self.zp))
    }
    fn unit(&self, i: OuterIdem) -> OuterBasis {
        OuterBasis {
            left: Strands::idempotent(i.0),
            right: Strands::idempotent(i.1),
        }
    }
    fn is_unit(&self, a: &OuterBasis) -> bool {
        a.left.is_idempotent() && a.right.is_idempotent()
    }
    fn fmt_basis(&self, a: &OuterBasis) -> String {
        if self.z.genus() == 1 {
            let l = if a.left.is_idempotent() { "1".into() } else { torus_name(&a.left, "σ") };
            let r = if a.right.is_idempotent() { "1".into() } else { torus_name(&a.right, "ρ") };
            format!("{l}⊗{r}")
        } else {
            format!("{}⊗{}", a.left.notation(&self.z), a.right.notation(&self.zp))
        }
    }
    fn fmt_idem(&self, i: &OuterIdem) -> String {
        format!(
            "{}⊗{}",
            Strands::idempotent(i.0).notation(&self.z),
            Strands::idempotent(i.1).notation(&self.zp)
        )
    }
}

/// The multiplication table of the middle-weight algebra: every basic
/// element with its idempotents, every nonzero product of two
/// non-idempotent basic elements, and every nonzero differential.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct MultiplicationTable {
    pub genus: usize,
    pub elements: Vec<TableElement>,
    pub products: Vec<(String, String, String)>,
    pub differentials: Vec<(String, Vec<String>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TableElement {
    pub name: String,
    pub left_idempotent: String,
    pub right_idempotent: String,
}

/// Build the multiplication table.  At genus 1 elements are named `ι0, ι1,
/// ρ1, …, ρ123`; otherwise by their strand notation.
pub fn multiplication_table(alg: &StrandsAlgebra) -> MultiplicationTable {
    let pmc = alg.pmc();
    let name = |s: &Strands| {
        if pmc.genus() == 1 {
            torus_name(s, "ρ")
        } else {
            s.notation(pmc)
        }
    };
    let mut elems = alg.index().elements.clone();
    elems.sort_by_key(|e| (!e.is_idempotent(), e.num_moving(), e.weight(), name(e)));
    let elements = elems
        .iter()
        .map(|e| TableElement {
            name: name(e),
            left_idempotent: name(&Strands::idempotent(e.left_idem(pmc))),
            right_idempotent: name(&Strands::idempotent(e.right_idem(pmc))),
        })
        .collect();
    let mut products = Vec::new();
    for a in elems.iter().filter(|e| !e.is_idempotent()) {
        for b in elems.iter().filter(|e| !e.is_idempotent()) {
            if let Some(c) = alg.mul(a, b) {
                products.push((name(a), name(b), name(&c)));
            }
        }
    }
    let differentials = elems
        .iter()
        .filter_map(|e| {
            let d = alg.d(e);
            (!d.is_empty()).then(|| (name(e), d.iter().map(name).collect()))
        })
        .collect();
    MultiplicationTable {
        genus: pmc.genus(),
        elements,
        products,
        differentials,
    }
}

impl MultiplicationTable {
    pub fn to_text(&self) -> String {
        let mut out = format!("basic elements ({}):\n", self.elements.len());
        for e in &self.elements {
            out.push_str(&format!("  {} = {}·{}·{}\n", e.name, e.left_idempotent, e.name, e.right_idempotent));
        }
        out.push_str(&format!("nonzero products ({}):\n", self.products.len()));
        for (a, b, c) in &self.products {
            out.push_str(&format!("  {a}·{b} = {c}\n"));
        }
        if self.differentials.is_empty() {
            out.push_str("all differentials vanish\n");
        } else {
            out.push_str(&format!("nonzero differentials ({}):\n", self.differentials.len()));
            for (a, d) in &self.differentials {
                out.push_str(&format!("  d({a}) = {}\n", d.join(" + ")));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::linear_pmc;

    fn torus() -> Pmc {
        linear_pmc(1).unwrap()
    }

    fn ch(a: u8, b: u8) -> Chord {
        Chord::new(a, b).unwrap()
    }

    fn rho(pmc: &Pmc, a: u8, b: u8) -> Strands {
        *chord_element(pmc, ch(a, b), 1).unwrap().terms.iter().next().unwrap()
    }

    #[test]
    fn torus_multiplication_table() {
        let table = multiplication_table(&StrandsAlgebra::new(Arc::new(torus())));
        assert_eq!(table.elements.len(), 8);
        let mut products: Vec<String> = table
            .products
            .iter()
            .map(|(a, b, c)| format!("{a}*{b}={c}"))
            .collect();
        products.sort();
        assert_eq!(products, ["ρ1*ρ23=ρ123", "ρ1*ρ2=ρ12", "ρ12*ρ3=ρ123", "ρ2*ρ3=ρ23"]);
        assert!(table.differentials.is_empty());
    }

    #[test]
    fn torus_basis_has_eight_elements() {
        let z = torus();
        assert_eq!(basis(&z, 1).len(), 8);
        assert_eq!(basis(&z, 0).len(), 1);
        assert_eq!(basis(&z, 2).len(), 5);
    }

    #[test]
    fn torus_products() {
        let z = torus();
        let (r1, r2, r3) = (rho(&z, 1, 2), rho(&z, 2, 3), rho(&z, 3, 4));
        let (r12, r23, r123) = (rho(&z, 1, 3), rho(&z, 2, 4), rho(&z, 1, 4));
        assert_eq!(mul_strands(&z, &r1, &r2), Some(r12));
        assert_eq!(mul_strands(&z, &r2, &r3), Some(r23));
        assert_eq!(mul_strands(&z, &r1, &r23), Some(r123));
        assert_eq!(mul_strands(&z, &r12, &r3), Some(r123));
        assert_eq!(mul_strands(&z, &r2, &r1), None);
        assert_eq!(mul_strands(&z, &r23, &r23), None);
        assert_eq!(mul_strands(&z, &r1, &r3), None);
    }

    #[test]
    fn genus_two_differential_example() {
        let z = linear_pmc(2).unwrap();
        // moving [2,5], horizontal {4,7} (pair index 2)
        let a = Strands::from_parts(&z, 1 << z.pair_of(4), &[ch(2, 5)]).unwrap();
        let da = d_strands(&z, &a);
        let want = Strands::from_parts(&z, 0, &[ch(2, 4), ch(4, 5)]).unwrap();
        assert_eq!(da, vec![want]);
        assert!(d_strands(&z, &want).is_empty());
    }

    #[test]
    fn middle_weight_basis_sizes() {
        assert_eq!(basis(&linear_pmc(2).unwrap(), 2).len(), 151);
    }

    #[test]
    fn set_element_rejects_overlap() {
        let z = linear_pmc(2).unwrap();
        assert!(set_element(&z, &[ch(1, 4), ch(3, 5)], 2).is_err());
        assert_eq!(set_element(&z, &[], 2).unwrap().len(), 6);
    }
}
