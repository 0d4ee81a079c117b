//! The type AA identity bimodule as a morphism complex.
//!
//! `CFAA(Id)` is the complex of left `A(Z)`-module maps from the bimodule
//! `A(Z) ⊗ X ⊗ A(Z')` induced by `CFDD(Id)` into `A(Z)`.  A basic map sends
//! `1 ⊗ x ⊗ b'` to a basic `a` and everything else to zero; it is written
//! `(b', x, a)`.  `A(Z)` acts on the right by post-multiplication and
//! `A(Z')` by pre-composition with its action on the source.

use std::collections::HashMap;
use std::sync::Arc;

use crate::homalg::retract::Vec2;
use crate::homalg::{AABimodule, AABoxD, ChainComplex, DStructure, DgAA, HomalgError, TransferredAA};
use crate::pmc::Pmc;
use crate::strands::{DgAlgebra, OuterAlgebra, Strands, StrandsAlgebra};

use super::modules::cfdd_identity;
#[cfg(doc)]
use super::modules::cfd_plat;

/// A basic element `(b', x, a)` of the morphism complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorGen {
    pub b: Strands,
    pub x: usize,
    pub a: Strands,
}

/// The dg bimodule `Mor_{A(Z)}(CFDD(Id), A(Z))` with right actions by
/// `A(Z)` (the `a` side) and `A(Z')` (the `b` side).
pub struct MorBimodule {
    pub za: StrandsAlgebra,
    pub zpa: StrandsAlgebra,
    pub dd: Arc<DStructure<OuterAlgebra>>,
    pub gens: Vec<MorGen>,
    index: HashMap<MorGen, usize>,
    /// `b''` with `b' ∈ d(b'')`, keyed by `b'`.
    d_preimages: HashMap<Strands, Vec<Strands>>,
    /// Incoming DD arrows: for `y`, the pairs `(x, c ⊗ c')` with
    /// `c ⊗ c' ⊗ y ∈ δ¹(x)`.
    incoming: Vec<Vec<(usize, Strands, Strands)>>,
    /// Generators by `(idem_a, idem_b)`.
    by_idems: HashMap<(u64, u64), Vec<usize>>,
}

impl MorBimodule {
    pub fn new(dd: Arc<DStructure<OuterAlgebra>>) -> Self {
        let za = dd.alg.left_alg();
        let zpa = dd.alg.right_alg();
        let (iz, izp) = (za.index(), zpa.index());
        let mut gens = Vec::new();
        for (x, g) in dd.gens.iter().enumerate() {
            for &bi in izp.with_right(g.idem.1) {
                for &ai in iz.with_left(g.idem.0) {
                    gens.push(MorGen {
                        b: izp.elements[bi],
                        x,
                        a: iz.elements[ai],
                    });
                }
            }
        }
        gens.sort();
        let index = gens.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let mut d_preimages: HashMap<Strands, Vec<Strands>> = HashMap::new();
        for b in &izp.elements {
            for t in zpa.d(b) {
                d_preimages.entry(t).or_default().push(*b);
            }
        }
        let mut incoming = vec![Vec::new(); dd.len()];
        for (x, ts) in dd.delta.iter().enumerate() {
            for (c, y) in ts {
                incoming[*y].push((x, c.left, c.right));
            }
        }
        let mut by_idems: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
        for (i, g) in gens.iter().enumerate() {
            by_idems
                .entry((g.a.right_idem(za.pmc()), g.b.left_idem(zpa.pmc())))
                .or_default()
                .push(i);
        }
        MorBimodule {
            za,
            zpa,
            dd,
            gens,
            index,
            d_preimages,
            incoming,
            by_idems,
        }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn idem_a(&self, i: usize) -> u64 {
        self.gens[i].a.right_idem(self.za.pmc())
    }

    pub fn idem_b(&self, i: usize) -> u64 {
        self.gens[i].b.left_idem(self.zpa.pmc())
    }

    pub fn name(&self, i: usize) -> String {
        let g = &self.gens[i];
        format!(
            "[{}|{}|{}]",
            self.zpa.fmt_basis(&g.b),
            self.dd.gens[g.x].name,
            self.za.fmt_basis(&g.a)
        )
    }

    fn id(&self, b: Strands, x: usize, a: Strands) -> Option<usize> {
        self.index.get(&MorGen { b, x, a }).copied()
    }

    /// The differential `(df)(m) = d(f(m)) + f(∂m)`.
    pub fn d(&self, i: usize) -> Vec<usize> {
        let MorGen { b, x: y, a } = self.gens[i];
        let mut out = Vec::new();
        for da in self.za.d(&a) {
            out.extend(self.id(b, y, da));
        }
        for b2 in self.d_preimages.get(&b).into_iter().flatten() {
            out.extend(self.id(*b2, y, a));
        }
        for &(x, c, cp) in &self.incoming[y] {
            let Some(ca) = self.za.mul(&c, &a) else { continue };
            for b2 in self.zpa.quotients(&cp, &b, false) {
                out.extend(self.id(b2, x, ca));
            }
        }
        dedup_mod2(out)
    }

    /// Right action of a basic element of `A(Z)`.
    pub fn act_a(&self, i: usize, c: &Strands) -> Option<usize> {
        let g = self.gens[i];
        self.id(g.b, g.x, self.za.mul(&g.a, c)?)
    }

    /// Right action of a basic element of `A(Z')`.
    pub fn act_b(&self, i: usize, c: &Strands) -> Vec<usize> {
        let g = self.gens[i];
        self.zpa
            .quotients(c, &g.b, true)
            .into_iter()
            .filter_map(|b2| self.id(b2, g.x, g.a))
            .collect()
    }

    /// Generators with the given `a`- and `b`-side idempotents.
    pub fn with_idems(&self, a: u64, b: u64) -> &[usize] {
        self.by_idems.get(&(a, b)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// `a`-action by a basic element that may be an idempotent.
    fn act_a_unital(&self, i: usize, c: &Strands) -> Option<usize> {
        if c.is_idempotent() {
            (c.horiz == self.idem_a(i)).then_some(i)
        } else {
            self.act_a(i, c)
        }
    }

    /// `b`-action by a basic element that may be an idempotent.
    fn act_b_unital(&self, i: usize, c: &Strands) -> Vec<usize> {
        if c.is_idempotent() {
            if c.horiz == self.idem_b(i) {
                vec![i]
            } else {
                Vec::new()
            }
        } else {
            self.act_b(i, c)
        }
    }

    /// `(Mor ⊠ Q) ⊠ P`: the DA bimodule obtained by pairing the `a` side
    /// with the `A(Z)` factor of a DD structure `Q`, tensored with a type D
    /// structure `P` over `A(Z')`.  Since the morphism complex is a dg
    /// bimodule only single algebra inputs occur, so no boundedness is
    /// needed.  The labels of `Q` are shifted up by `shift` bits and
    /// combined with those of `P` in a `label_dim`-bit space.
    pub fn box_dd_d(
        &self,
        q: &DStructure<OuterAlgebra>,
        p: &DStructure<StrandsAlgebra>,
        shift: usize,
        label_dim: usize,
    ) -> DStructure<StrandsAlgebra> {
        let mut out = DStructure::new(self.zpa.clone(), label_dim);
        let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (y, gy) in q.gens.iter().enumerate() {
            for (z, gz) in p.gens.iter().enumerate() {
                for &f in self.with_idems(gy.idem.0, gz.idem) {
                    let id = out.add_gen(
                        format!("{}{}{}", self.short_name(f), gy.name, gz.name),
                        gy.idem.1,
                        gy.label << shift | gz.label,
                    );
                    index.insert((f, y, z), id);
                }
            }
        }
        let mut keys: Vec<_> = index.iter().map(|(k, v)| (*k, *v)).collect();
        keys.sort();
        for ((f, y, z), id) in keys {
            let unit = Strands::idempotent(q.gens[y].idem.1);
            for f2 in self.d(f) {
                if let Some(&t) = index.get(&(f2, y, z)) {
                    out.toggle(id, unit, t);
                }
            }
            for (c, y2) in &q.delta[y] {
                if let Some(f2) = self.act_a_unital(f, &c.left) {
                    if let Some(&t) = index.get(&(f2, *y2, z)) {
                        out.toggle(id, c.right, t);
                    }
                }
            }
            for (b, z2) in &p.delta[z] {
                for f2 in self.act_b_unital(f, b) {
                    if let Some(&t) = index.get(&(f2, y, *z2)) {
                        out.toggle(id, unit, t);
                    }
                }
            }
        }
        out
    }

    /// `R ⊠ Mor ⊠ P` for type D structures `R` over `A(Z)` and `P` over
    /// `A(Z')`: a chain complex labelled by `P`.
    pub fn box_d_d(&self, r: &DStructure<StrandsAlgebra>, p: &DStructure<StrandsAlgebra>) -> ChainComplex {
        let mut names = Vec::new();
        let mut labels = Vec::new();
        let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (y, gy) in r.gens.iter().enumerate() {
            for (z, gz) in p.gens.iter().enumerate() {
                for &f in self.with_idems(gy.idem, gz.idem) {
                    index.insert((f, y, z), names.len());
                    names.push(format!("{}{}{}", self.short_name(f), gy.name, gz.name));
                    labels.push(gz.label);
                }
            }
        }
        let mut d = vec![Vec::new(); names.len()];
        for (&(f, y, z), &id) in &index {
            let mut push = |k: (usize, usize, usize)| {
                if let Some(&t) = index.get(&k) {
                    d[id].push(t);
                }
            };
            for f2 in self.d(f) {
                push((f2, y, z));
            }
            for (c, y2) in &r.delta[y] {
                if let Some(f2) = self.act_a_unital(f, c) {
                    push((f2, *y2, z));
                }
            }
            for (b, z2) in &p.delta[z] {
                for f2 in self.act_b_unital(f, b) {
                    push((f2, y, *z2));
                }
            }
        }
        for v in &mut d {
            *v = dedup_mod2(std::mem::take(v));
        }
        ChainComplex::new(names, labels, p.label_dim, d)
    }

    fn short_name(&self, f: usize) -> String {
        if self.za.pmc().genus() == 1 {
            self.name(f)
        } else {
            format!("m{f}")
        }
    }

    /// Tabulate the dg bimodule.
    pub fn to_dg(&self) -> DgAA {
        let nonunit = |alg: &StrandsAlgebra| -> Vec<Strands> {
            alg.index().elements.iter().copied().filter(|e| !e.is_idempotent()).collect()
        };
        let (na, nb) = (nonunit(&self.za), nonunit(&self.zpa));
        let mut act_a = HashMap::new();
        let mut act_b = HashMap::new();
        for i in 0..self.len() {
            for c in &na {
                if let Some(j) = self.act_a(i, c) {
                    act_a.insert((i, *c), vec![j]);
                }
            }
            for c in &nb {
                let v = self.act_b(i, c);
                if !v.is_empty() {
                    act_b.insert((i, *c), v);
                }
            }
        }
        DgAA {
            alg_a: self.za.clone(),
            alg_b: self.zpa.clone(),
            names: (0..self.len()).map(|i| self.name(i)).collect(),
            idem_a: (0..self.len()).map(|i| self.idem_a(i)).collect(),
            idem_b: (0..self.len()).map(|i| self.idem_b(i)).collect(),
            d: (0..self.len()).map(|i| self.d(i)).collect(),
            act_a,
            act_b,
        }
    }
}

impl AABimodule for MorBimodule {
    fn alg_a(&self) -> &StrandsAlgebra {
        &self.za
    }
    fn alg_b(&self) -> &StrandsAlgebra {
        &self.zpa
    }
    fn len(&self) -> usize {
        self.gens.len()
    }
    fn name(&self, x: usize) -> String {
        MorBimodule::name(self, x)
    }
    fn idem_a(&self, x: usize) -> u64 {
        MorBimodule::idem_a(self, x)
    }
    fn idem_b(&self, x: usize) -> u64 {
        MorBimodule::idem_b(self, x)
    }
    fn action(&self, x: usize, alpha: &[Strands], beta: &[Strands]) -> Vec2 {
        let v = match (alpha, beta) {
            ([], []) => self.d(x),
            ([a], []) => self.act_a(x, a).into_iter().collect(),
            ([], [b]) => self.act_b(x, b),
            _ => Vec::new(),
        };
        v.into_iter().collect()
    }
}

fn dedup_mod2(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(v.len());
    for x in v {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// `Mor_{A(Z)}(CFDD(Id), A(Z))` as an AA bimodule, before reduction.
pub fn mor_dd_to_alg(dd: Arc<DStructure<OuterAlgebra>>) -> MorBimodule {
    MorBimodule::new(dd)
}

/// The type AA identity bimodule: the morphism complex transferred to its
/// homology, with the higher actions this produces.
pub fn cfaa_identity(pmc: Arc<Pmc>) -> TransferredAA {
    TransferredAA::new(mor_dd_to_alg(Arc::new(cfdd_identity(pmc))).to_dg())
}

/// The type A module of the plat handlebody over `A(Z')`: an identity AA
/// bimodule tensored on its `A(Z)` side with the plat type D structure
/// `plat` (see [`cfd_plat`]).
///
/// With the dg morphism complex as `aa` the result is a dg module, hence
/// bounded, so it pairs with any type D structure.  A transferred model is
/// smaller but generally unbounded.
pub fn cfa_plat<'a, M: AABimodule>(
    aa: &'a M,
    plat: &'a DStructure<StrandsAlgebra>,
    depth_cap: usize,
) -> Result<AABoxD<'a, M>, HomalgError> {
    let m = AABoxD::new(aa, plat, depth_cap);
    m.check_bounded()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homalg::{box_aa_dd, box_ad};
    use super::super::modules::{cfd_plat, cfd_plat_mirrored};
    use crate::pmc::linear_pmc;

    #[test]
    fn torus_mor_is_a_dg_bimodule_with_two_dimensional_homology() {
        let pmc = Arc::new(linear_pmc(1).unwrap());
        let mor = mor_dd_to_alg(Arc::new(cfdd_identity(pmc)));
        let dg = mor.to_dg();
        assert_eq!(dg.len(), 30);
        assert!(dg.structure_check().ok(), "{:?}", dg.structure_check());
        assert_eq!(dg.homology_rank(), 2);
    }

    #[test]
    fn torus_cfaa_pairs_to_identity() {
        let pmc = Arc::new(linear_pmc(1).unwrap());
        let aa = cfaa_identity(pmc.clone());
        assert_eq!(aa.len(), 2);
        let dd = cfdd_identity(pmc);
        let da = box_aa_dd(&aa, &dd, 8).unwrap();
        let red = da.reduce(false, 8).unwrap();
        assert!(red.is_identity_like(), "{}", red.to_json());
    }

    #[test]
    fn plat_pairing_has_rank_two_to_the_genus() {
        for g in 1..=2 {
            let pmc = Arc::new(linear_pmc(g).unwrap());
            let mor = mor_dd_to_alg(Arc::new(cfdd_identity(pmc.clone())));
            let plat = cfd_plat(pmc.clone());
            let m = cfa_plat(&mor, &plat, 4).unwrap();
            let c = box_ad(&m, &cfd_plat_mirrored(pmc), 4).unwrap();
            assert_eq!(c.homology_rank(), 1 << g, "genus {g}");
        }
    }
}
