//! Pointed matched circles, chords, and the distinguished curves of the
//! linear family.
//!
//! Positions are 1-based along the circle cut open at the basepoint, so a
//! chord is simply an interval `[start, end]` with `start < end`.  Matched
//! pairs are numbered `0..2k` in order of their smaller endpoint; sets of
//! pairs are stored as `u64` bit masks throughout the crate.

use std::fmt;

use thiserror::Error;

/// Largest supported number of points (positions must fit in a `u64` mask).
pub const MAX_POINTS: usize = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PmcError {
    #[error("genus must be at least 1")]
    ZeroGenus,
    #[error("genus {0} is too large (at most {max} points supported)", max = MAX_POINTS)]
    TooLarge(usize),
    #[error("matching is not a fixed-point-free involution on 1..={0}")]
    BadMatching(usize),
    #[error("surgery on the matching does not give a connected curve")]
    Disconnected,
    #[error("curve index {index} out of range 1..={max}")]
    CurveIndex { index: usize, max: usize },
    #[error("curve classification is only defined for the linear pointed matched circle")]
    NotLinear,
    #[error("invalid chord [{0},{1}]")]
    BadChord(u8, u8),
}

/// A pointed matched circle: `4k` points on a cut circle with a perfect
/// matching whose surgery is connected.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pmc {
    genus: usize,
    /// `partner[p]` for `p` in `1..=4k`; index 0 unused.
    partner: Vec<u8>,
    /// `pair_of[p]` is the pair index of position `p`.
    pair_of: Vec<u8>,
    /// Pairs as `(low, high)`, sorted by `low`.
    pairs: Vec<(u8, u8)>,
    /// Pair index in the mirror of the image of each pair.
    mirror_pair: Vec<u8>,
    linear: bool,
}

impl Pmc {
    /// Build a pointed matched circle from an explicit list of pairs.
    pub fn new(genus: usize, pairs: &[(u8, u8)]) -> Result<Self, PmcError> {
        if genus == 0 {
            return Err(PmcError::ZeroGenus);
        }
        let n = 4 * genus;
        if n > MAX_POINTS {
            return Err(PmcError::TooLarge(genus));
        }
        if pairs.len() != 2 * genus {
            return Err(PmcError::BadMatching(n));
        }
        let mut partner = vec![0u8; n + 1];
        for &(a, b) in pairs {
            let (a, b) = (a as usize, b as usize);
            if a == b || a == 0 || b == 0 || a > n || b > n || partner[a] != 0 || partner[b] != 0 {
                return Err(PmcError::BadMatching(n));
            }
            partner[a] = b as u8;
            partner[b] = a as u8;
        }
        let mut sorted: Vec<(u8, u8)> = pairs
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        sorted.sort_unstable();
        let mut pair_of = vec![u8::MAX; n + 1];
        for (i, &(a, b)) in sorted.iter().enumerate() {
            pair_of[a as usize] = i as u8;
            pair_of[b as usize] = i as u8;
        }
        let top = (n + 1) as u8;
        let mut mirror_lows: Vec<u8> = sorted.iter().map(|&(_, b)| top - b).collect();
        mirror_lows.sort_unstable();
        let mirror_pair = sorted
            .iter()
            .map(|&(_, b)| mirror_lows.iter().position(|&l| l == top - b).unwrap() as u8)
            .collect();
        let pmc = Pmc {
            genus,
            partner,
            pair_of,
            pairs: sorted,
            mirror_pair,
            linear: false,
        };
        if !pmc.surgery_connected() {
            return Err(PmcError::Disconnected);
        }
        let linear = pmc.pairs == linear_pairs(genus);
        Ok(Pmc { linear, ..pmc })
    }

    /// The genus-`k` linear pointed matched circle.
    pub fn linear(genus: usize) -> Result<Self, PmcError> {
        if genus == 0 {
            return Err(PmcError::ZeroGenus);
        }
        if 4 * genus > MAX_POINTS {
            return Err(PmcError::TooLarge(genus));
        }
        Pmc::new(genus, &linear_pairs(genus))
    }

    /// Boundary of a disk with one band per pair is a single circle iff the
    /// permutation "arc i arrives at point i+1, jumps to its partner" is a
    /// single cycle.
    fn surgery_connected(&self) -> bool {
        let n = self.num_points();
        let next = |arc: usize| -> usize {
            let arrive = if arc == n { 1 } else { arc + 1 };
            self.partner[arrive] as usize
        };
        let mut arc = 1;
        for step in 1..=n {
            arc = next(arc);
            if arc == 1 {
                return step == n;
            }
        }
        false
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn num_points(&self) -> usize {
        4 * self.genus
    }

    pub fn num_pairs(&self) -> usize {
        2 * self.genus
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn partner(&self, p: u8) -> u8 {
        self.partner[p as usize]
    }

    /// Pair index of a position.
    pub fn pair_of(&self, p: u8) -> usize {
        self.pair_of[p as usize] as usize
    }

    pub fn pair(&self, i: usize) -> (u8, u8) {
        self.pairs[i]
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    /// Bit mask of pairs touched by a mask of positions.
    pub fn pairs_of_positions(&self, positions: u64) -> u64 {
        let mut out = 0u64;
        let mut m = positions;
        while m != 0 {
            let p = m.trailing_zeros();
            m &= m - 1;
            out |= 1 << self.pair_of[p as usize];
        }
        out
    }

    /// Bit mask of positions belonging to a mask of pairs.
    pub fn positions_of_pairs(&self, pairs: u64) -> u64 {
        let mut out = 0u64;
        let mut m = pairs;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            let (a, b) = self.pairs[i];
            out |= (1 << a) | (1 << b);
        }
        out
    }

    /// Orientation reversal of the circle: position `p` goes to `4k+1-p`.
    pub fn mirror_pos(&self, p: u8) -> u8 {
        (self.num_points() + 1) as u8 - p
    }

    /// The pointed matched circle of the reversed orientation.
    pub fn mirror(&self) -> Pmc {
        let pairs: Vec<(u8, u8)> = self
            .pairs
            .iter()
            .map(|&(a, b)| (self.mirror_pos(b), self.mirror_pos(a)))
            .collect();
        Pmc::new(self.genus, &pairs).expect("mirror of a valid pmc is valid")
    }

    /// Pair index in `self.mirror()` of the image of pair `i`.
    pub fn mirror_pair(&self, i: usize) -> usize {
        self.mirror_pair[i] as usize
    }

    /// Image of a pair mask under the mirror.
    pub fn mirror_pair_mask(&self, mask: u64) -> u64 {
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            out |= 1 << self.mirror_pair[i];
        }
        out
    }

    /// All chords `[i, j]`, `1 <= i < j <= 4k`, in lexicographic order.
    pub fn all_chords(&self) -> Vec<Chord> {
        let n = self.num_points() as u8;
        let mut out = Vec::with_capacity((n as usize) * (n as usize - 1) / 2);
        for i in 1..=n {
            for j in (i + 1)..=n {
                out.push(Chord { start: i, end: j });
            }
        }
        out
    }

    /// Classify the distinguished curve `gamma_n` (linear family only).
    pub fn curve(&self, n: usize) -> Result<Curve, PmcError> {
        if !self.linear {
            return Err(PmcError::NotLinear);
        }
        let max = 2 * self.genus;
        if n == 0 || n > max {
            return Err(PmcError::CurveIndex { index: n, max });
        }
        let (c1, c2) = curve_feet(self.genus, n);
        let kind = if n == 1 {
            CurveKind::DegenerateLow { p: c1 + 1 }
        } else if n == max {
            CurveKind::DegenerateHigh { p: c1 + 1 }
        } else {
            CurveKind::Generic { d: c1 + 1, u: c1 + 2 }
        };
        Ok(Curve {
            index: n,
            c1,
            c2,
            kind,
        })
    }
}

/// Pairs of the genus-`k` linear pointed matched circle.
fn linear_pairs(genus: usize) -> Vec<(u8, u8)> {
    let mut pairs = vec![(1u8, 3u8)];
    for n in 1..=(2 * genus).saturating_sub(2) {
        pairs.push(((2 * n) as u8, (2 * n + 3) as u8));
    }
    let top = (4 * genus) as u8;
    pairs.push((top - 2, top));
    pairs.sort_unstable();
    pairs
}

/// Feet of `gamma_n` on the linear circle: `gamma_1` runs over the pair
/// {1,3}, `gamma_{2k}` over {4k-2,4k}, and `gamma_n` otherwise over
/// {2n-2, 2n+1}.
fn curve_feet(genus: usize, n: usize) -> (u8, u8) {
    if n == 1 {
        (1, 3)
    } else if n == 2 * genus {
        let top = (4 * genus) as u8;
        (top - 2, top)
    } else {
        ((2 * n - 2) as u8, (2 * n + 1) as u8)
    }
}

impl fmt::Display for Pmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Debug for Pmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pmc({self})")
    }
}

/// Convenience constructor for the linear family.
pub fn linear_pmc(genus: usize) -> Result<Pmc, PmcError> {
    Pmc::linear(genus)
}

/// An interval on the cut circle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Chord {
    pub start: u8,
    pub end: u8,
}

impl Chord {
    pub fn new(start: u8, end: u8) -> Result<Self, PmcError> {
        if start == 0 || start >= end || end as usize > MAX_POINTS {
            return Err(PmcError::BadChord(start, end));
        }
        Ok(Chord { start, end })
    }

    /// Unit intervals `[p, p+1]` covered, as a mask indexed by `p`.
    pub fn cover(&self) -> u64 {
        interval_cover(self.start, self.end)
    }

    pub fn contains_interior(&self, q: u8) -> bool {
        self.start < q && q < self.end
    }
}

impl fmt::Display for Chord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// Mask of unit intervals `[p, p+1]` with `start <= p < end`.
pub fn interval_cover(start: u8, end: u8) -> u64 {
    if end <= start {
        return 0;
    }
    let hi = if end >= 64 { u64::MAX } else { (1u64 << end) - 1 };
    let lo = (1u64 << start) - 1;
    hi & !lo
}

/// Shape of a distinguished curve.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CurveKind {
    /// Feet three apart with two points `d < u` strictly between.
    Generic { d: u8, u: u8 },
    /// Feet `(1, 3)` separated by the single point `p = 2`.
    DegenerateLow { p: u8 },
    /// Feet `(4k-2, 4k)` separated by the single point `p = 4k-1`.
    DegenerateHigh { p: u8 },
}

/// A distinguished curve `gamma_n` on the linear circle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Curve {
    pub index: usize,
    pub c1: u8,
    pub c2: u8,
    pub kind: CurveKind,
}

impl Curve {
    pub fn is_generic(&self) -> bool {
        matches!(self.kind, CurveKind::Generic { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_pairs_small_genus() {
        assert_eq!(linear_pmc(1).unwrap().pairs(), &[(1, 3), (2, 4)]);
        assert_eq!(
            linear_pmc(2).unwrap().pairs(),
            &[(1, 3), (2, 5), (4, 7), (6, 8)]
        );
        assert_eq!(
            linear_pmc(3).unwrap().pairs(),
            &[(1, 3), (2, 5), (4, 7), (6, 9), (8, 11), (10, 12)]
        );
        assert_eq!(linear_pmc(0), Err(PmcError::ZeroGenus));
    }

    #[test]
    fn display_matches_pair_list() {
        assert_eq!(linear_pmc(2).unwrap().to_string(), "1-3 2-5 4-7 6-8");
    }

    #[test]
    fn disconnected_matching_rejected() {
        assert_eq!(Pmc::new(1, &[(1, 2), (3, 4)]), Err(PmcError::Disconnected));
        assert_eq!(Pmc::new(1, &[(1, 4), (2, 3)]), Err(PmcError::Disconnected));
        assert!(Pmc::new(1, &[(1, 3), (2, 4)]).is_ok());
        assert!(matches!(
            Pmc::new(1, &[(1, 3), (3, 4)]),
            Err(PmcError::BadMatching(_))
        ));
    }

    #[test]
    fn curves_classified() {
        let t = linear_pmc(1).unwrap();
        let c = t.curve(2).unwrap();
        assert_eq!((c.c1, c.c2), (2, 4));
        assert_eq!(c.kind, CurveKind::DegenerateHigh { p: 3 });
        assert_eq!(t.curve(1).unwrap().kind, CurveKind::DegenerateLow { p: 2 });
        let g2 = linear_pmc(2).unwrap();
        let c = g2.curve(3).unwrap();
        assert_eq!((c.c1, c.c2), (4, 7));
        assert_eq!(c.kind, CurveKind::Generic { d: 5, u: 6 });
        assert!(g2.curve(5).is_err());
        // Each curve's feet are a matched pair.
        for g in 1..=4 {
            let z = linear_pmc(g).unwrap();
            for n in 1..=2 * g {
                let c = z.curve(n).unwrap();
                assert_eq!(z.partner(c.c1), c.c2);
            }
        }
    }

    #[test]
    fn nonlinear_curve_rejected() {
        // A connected genus-1 matching that is not the linear one does not
        // exist, so use genus 2 with a different connected matching.
        let z = Pmc::new(2, &[(1, 5), (2, 7), (3, 6), (4, 8)]);
        if let Ok(z) = z {
            assert!(!z.is_linear());
            assert_eq!(z.curve(1), Err(PmcError::NotLinear));
        }
    }

    #[test]
    fn chord_counts() {
        assert_eq!(linear_pmc(1).unwrap().all_chords().len(), 6);
        assert_eq!(linear_pmc(2).unwrap().all_chords().len(), 28);
        assert_eq!(linear_pmc(3).unwrap().all_chords().len(), 66);
    }

    #[test]
    fn mirror_of_linear_is_linear() {
        for g in 1..=4 {
            let z = linear_pmc(g).unwrap();
            assert_eq!(z.mirror(), z);
            for i in 0..z.num_pairs() {
                let (a, b) = z.pair(i);
                let j = z.mirror_pair(i);
                let (c, d) = z.pair(j);
                let mut img = [z.mirror_pos(a), z.mirror_pos(b)];
                img.sort_unstable();
                assert_eq!(img, [c, d]);
                assert_eq!(z.mirror_pair_mask(1 << i), 1 << j);
            }
        }
    }
}
