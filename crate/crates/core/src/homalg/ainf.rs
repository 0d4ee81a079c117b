//! A∞ modules and AA bimodules over strands algebras, and their box tensor
//! products with type D and DD structures.
//!
//! A∞ objects are accessed through traits so that a structure obtained by
//! homotopy transfer can be evaluated lazily: only the input sequences that
//! actually arise from paths in the type D side are ever computed.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use serde_json::json;

use super::complex::ChainComplex;
use super::da::DABimodule;
use super::dstructure::DStructure;
use super::retract::{transferred_action, Retraction, Vec2};
use super::{combine_labels, HomalgError};
use crate::strands::{DgAlgebra, OuterAlgebra, Strands, StrandsAlgebra};

/// A right A∞ module with generators carrying idempotents and filtration
/// labels.  `action(x, [])` is `m₁`.
pub trait AInfModule {
    fn alg(&self) -> &StrandsAlgebra;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn name(&self, x: usize) -> String;
    fn idem(&self, x: usize) -> u64;
    fn label(&self, _x: usize) -> u64 {
        0
    }
    fn label_dim(&self) -> usize {
        0
    }
    /// `m(x; inputs)` for non-idempotent basic inputs.
    fn action(&self, x: usize, inputs: &[Strands]) -> Vec2;
}

/// An A∞ bimodule with two commuting right actions, by `A(Z)` (the "a"
/// side) and by `A(Z')` (the "b" side).  `action(x, [], [])` is `m₁`.
pub trait AABimodule {
    fn alg_a(&self) -> &StrandsAlgebra;
    fn alg_b(&self) -> &StrandsAlgebra;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn name(&self, x: usize) -> String;
    fn idem_a(&self, x: usize) -> u64;
    fn idem_b(&self, x: usize) -> u64;
    /// `m(x; α⃗; β⃗)` for non-idempotent basic inputs.
    fn action(&self, x: usize, alpha: &[Strands], beta: &[Strands]) -> Vec2;
}

/// Cache key of a bimodule action: generator and the two input sequences.
type ActionKey = (usize, Vec<Strands>, Vec<Strands>);

/// A dg bimodule with two commuting right actions, stored as tables.
/// Actions by non-idempotent basic elements are listed explicitly; the
/// idempotents act by the generator idempotents.
#[derive(Clone)]
pub struct DgAA {
    pub alg_a: StrandsAlgebra,
    pub alg_b: StrandsAlgebra,
    pub names: Vec<String>,
    pub idem_a: Vec<u64>,
    pub idem_b: Vec<u64>,
    pub d: Vec<Vec<usize>>,
    pub act_a: HashMap<(usize, Strands), Vec<usize>>,
    pub act_b: HashMap<(usize, Strands), Vec<usize>>,
}

impl DgAA {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn act_a_on(&self, x: usize, a: &Strands) -> Vec<usize> {
        self.act_a.get(&(x, *a)).cloned().unwrap_or_default()
    }

    fn act_b_on(&self, x: usize, b: &Strands) -> Vec<usize> {
        self.act_b.get(&(x, *b)).cloned().unwrap_or_default()
    }

    /// Check `d² = 0`, the Leibniz rule for both actions, associativity of
    /// each action and commutation of the two, on every generator and every
    /// pair of non-idempotent basic inputs.
    pub fn structure_check(&self) -> super::CheckReport {
        let mut rep = super::CheckReport::default();
        let apply = |v: &Vec2, f: &dyn Fn(usize) -> Vec<usize>| {
            let mut out = Vec2::new();
            for &x in v {
                for y in f(x) {
                    super::retract::toggle(&mut out, y);
                }
            }
            out
        };
        let one = |x: usize| -> Vec2 { [x].into_iter().collect() };
        let dd = |v: &Vec2| apply(v, &|x| self.d[x].clone());
        let ia = self.alg_a.index();
        let ib = self.alg_b.index();
        let nonunit_a: Vec<Strands> = ia.elements.iter().copied().filter(|e| !e.is_idempotent()).collect();
        let nonunit_b: Vec<Strands> = ib.elements.iter().copied().filter(|e| !e.is_idempotent()).collect();
        for x in 0..self.len() {
            if !dd(&dd(&one(x))).is_empty() {
                rep.push(format!("d² ≠ 0 at {}", self.names[x]));
            }
            for (side, elems) in [(0, &nonunit_a), (1, &nonunit_b)] {
                let alg = if side == 0 { &self.alg_a } else { &self.alg_b };
                let act = |v: &Vec2, e: &Strands| {
                    apply(v, &|y| if side == 0 { self.act_a_on(y, e) } else { self.act_b_on(y, e) })
                };
                for e in elems {
                    // d(x·e) = d(x)·e + x·d(e)
                    let mut lhs = dd(&act(&one(x), e));
                    super::retract::add_into(&mut lhs, &act(&dd(&one(x)), e));
                    for de in alg.d(e) {
                        super::retract::add_into(&mut lhs, &act(&one(x), &de));
                    }
                    if !lhs.is_empty() {
                        rep.push(format!("Leibniz fails at {} · {}", self.names[x], alg.fmt_basis(e)));
                    }
                    let xe = act(&one(x), e);
                    if xe.is_empty() {
                        continue;
                    }
                    for f in elems {
                        let mut lhs = act(&xe, f);
                        if let Some(ef) = alg.mul(e, f) {
                            super::retract::add_into(&mut lhs, &act(&one(x), &ef));
                        }
                        if !lhs.is_empty() {
                            rep.push(format!("associativity fails at {}", self.names[x]));
                        }
                    }
                }
            }
            for a in &nonunit_a {
                for b in &nonunit_b {
                    let ab = apply(&apply(&one(x), &|y| self.act_a_on(y, a)), &|y| self.act_b_on(y, b));
                    let ba = apply(&apply(&one(x), &|y| self.act_b_on(y, b)), &|y| self.act_a_on(y, a));
                    if ab != ba {
                        rep.push(format!("actions do not commute at {}", self.names[x]));
                    }
                }
            }
        }
        rep
    }

    /// Homology rank of `m₁`.
    pub fn homology_rank(&self) -> usize {
        ChainComplex::unlabeled(self.d.clone()).homology_rank()
    }
}

impl AABimodule for DgAA {
    fn alg_a(&self) -> &StrandsAlgebra {
        &self.alg_a
    }
    fn alg_b(&self) -> &StrandsAlgebra {
        &self.alg_b
    }
    fn len(&self) -> usize {
        self.names.len()
    }
    fn name(&self, x: usize) -> String {
        self.names[x].clone()
    }
    fn idem_a(&self, x: usize) -> u64 {
        self.idem_a[x]
    }
    fn idem_b(&self, x: usize) -> u64 {
        self.idem_b[x]
    }
    fn action(&self, x: usize, alpha: &[Strands], beta: &[Strands]) -> Vec2 {
        match (alpha, beta) {
            ([], []) => self.d[x].iter().copied().collect(),
            ([a], []) => self.act_a_on(x, a).into_iter().collect(),
            ([], [b]) => self.act_b_on(x, b).into_iter().collect(),
            _ => Vec2::new(),
        }
    }
}

/// The A∞ bimodule obtained from a dg bimodule by homotopy transfer to its
/// homology along a cancellation retraction.  Actions are computed on
/// demand and cached.
pub struct TransferredAA {
    pub base: DgAA,
    pub retraction: Retraction,
    cache: Mutex<HashMap<ActionKey, Vec2>>,
}

impl TransferredAA {
    pub fn new(base: DgAA) -> Self {
        let retraction = Retraction::new(&base.d, |_, _| true);
        TransferredAA {
            base,
            retraction,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn orig(&self, x: usize) -> usize {
        self.retraction.survivors()[x]
    }

    /// Enumerate every nonzero action with at most `max_inputs` inputs in
    /// total (the first `a`-inputs then the `b`-inputs), as display data.
    pub fn nonzero_actions(&self, max_inputs: usize) -> Vec<(usize, Vec<Strands>, Vec<Strands>, Vec2)> {
        let mut out = Vec::new();
        let seqs = |alg: &StrandsAlgebra, start: u64, max: usize| -> Vec<Vec<Strands>> {
            let index = alg.index();
            let mut all = vec![Vec::new()];
            let mut frontier: Vec<(Vec<Strands>, u64)> = vec![(Vec::new(), start)];
            for _ in 0..max {
                let mut next = Vec::new();
                for (s, cur) in &frontier {
                    for &i in index.with_left(*cur) {
                        let e = index.elements[i];
                        if e.is_idempotent() {
                            continue;
                        }
                        let mut s2 = s.clone();
                        s2.push(e);
                        all.push(s2.clone());
                        next.push((s2, e.right_idem(alg.pmc())));
                    }
                }
                frontier = next;
            }
            all
        };
        for x in 0..self.len() {
            let sa = seqs(self.alg_a(), self.idem_a(x), max_inputs);
            let sb = seqs(self.alg_b(), self.idem_b(x), max_inputs);
            for a in &sa {
                for b in &sb {
                    if a.len() + b.len() > max_inputs {
                        continue;
                    }
                    let v = self.action(x, a, b);
                    if !v.is_empty() {
                        out.push((x, a.clone(), b.clone(), v));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self, max_inputs: usize) -> serde_json::Value {
        let gens: Vec<_> = (0..self.len())
            .map(|x| {
                json!({"id": x, "name": self.name(x),
                       "a_idempotent": self.alg_a().fmt_idem(&self.idem_a(x)),
                       "b_idempotent": self.alg_b().fmt_idem(&self.idem_b(x))})
            })
            .collect();
        let terms: Vec<_> = self
            .nonzero_actions(max_inputs)
            .into_iter()
            .map(|(x, a, b, v)| {
                json!({"source": x,
                       "a_inputs": a.iter().map(|e| self.alg_a().fmt_basis(e)).collect::<Vec<_>>(),
                       "b_inputs": b.iter().map(|e| self.alg_b().fmt_basis(e)).collect::<Vec<_>>(),
                       "targets": v.into_iter().collect::<Vec<_>>()})
            })
            .collect();
        json!({"kind": "type_aa", "generators": gens, "terms": terms})
    }
}

impl AABimodule for TransferredAA {
    fn alg_a(&self) -> &StrandsAlgebra {
        &self.base.alg_a
    }
    fn alg_b(&self) -> &StrandsAlgebra {
        &self.base.alg_b
    }
    fn len(&self) -> usize {
        self.retraction.survivors().len()
    }
    fn name(&self, x: usize) -> String {
        self.base.names[self.orig(x)].clone()
    }
    fn idem_a(&self, x: usize) -> u64 {
        self.base.idem_a[self.orig(x)]
    }
    fn idem_b(&self, x: usize) -> u64 {
        self.base.idem_b[self.orig(x)]
    }
    fn action(&self, x: usize, alpha: &[Strands], beta: &[Strands]) -> Vec2 {
        let key = (x, alpha.to_vec(), beta.to_vec());
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return v.clone();
        }
        let v = transferred_action(
            &self.retraction,
            x,
            alpha,
            beta,
            |y, a| self.base.act_a_on(y, a),
            |y, b| self.base.act_b_on(y, b),
        );
        self.cache.lock().expect("cache poisoned").insert(key, v.clone());
        v
    }
}

/// Paths in a type D structure over a strands algebra from one generator,
/// as (non-idempotent coefficient sequence, endpoint), up to `cap` steps.
/// Arrows with idempotent coefficients are returned separately.
struct DPaths {
    paths: Vec<Vec<(Vec<Strands>, usize)>>,
    units: Vec<Vec<usize>>,
}

fn d_paths(p: &DStructure<StrandsAlgebra>, cap: usize) -> DPaths {
    let n = p.len();
    let mut paths = vec![Vec::new(); n];
    let mut units = vec![Vec::new(); n];
    for q in 0..n {
        for (b, q2) in &p.delta[q] {
            if b.is_idempotent() {
                units[q].push(*q2);
            }
        }
        let mut frontier: Vec<(Vec<Strands>, usize)> = vec![(Vec::new(), q)];
        paths[q].push((Vec::new(), q));
        for _ in 0..cap {
            let mut next = Vec::new();
            for (s, cur) in &frontier {
                for (b, q2) in &p.delta[*cur] {
                    if b.is_idempotent() {
                        continue;
                    }
                    let mut s2 = s.clone();
                    s2.push(*b);
                    next.push((s2, *q2));
                }
            }
            paths[q].extend(next.iter().cloned());
            frontier = next;
        }
    }
    DPaths { paths, units }
}

/// `M ⊠ P` for an A∞ module and a type D structure over the same algebra.
///
/// Paths in `P` are followed up to `depth_cap` steps; a nonzero action on a
/// path of maximal length is reported as unboundedness.
pub fn box_ad(m: &impl AInfModule, p: &DStructure<StrandsAlgebra>, depth_cap: usize) -> Result<ChainComplex, HomalgError> {
    let dp = d_paths(p, depth_cap);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut names = Vec::new();
    let mut labels = Vec::new();
    for x in 0..m.len() {
        for q in 0..p.len() {
            if m.idem(x) == p.gens[q].idem {
                index.insert((x, q), names.len());
                names.push(format!("{}{}", m.name(x), p.gens[q].name));
                labels.push(combine_labels(m.label(x), m.label_dim(), p.gens[q].label));
            }
        }
    }
    let mut d = vec![Vec::new(); names.len()];
    let mut keys: Vec<(&(usize, usize), &usize)> = index.iter().collect();
    keys.sort();
    for (&(x, q), &id) in keys {
        for (seq, q2) in &dp.paths[q] {
            let v = m.action(x, seq);
            if v.is_empty() {
                continue;
            }
            if seq.len() == depth_cap {
                return Err(HomalgError::Unbounded(depth_cap));
            }
            for y in v {
                if let Some(&t) = index.get(&(y, *q2)) {
                    d[id].push(t);
                }
            }
        }
        for q2 in &dp.units[q] {
            if let Some(&t) = index.get(&(x, *q2)) {
                d[id].push(t);
            }
        }
    }
    Ok(ChainComplex::new(names, labels, m.label_dim() + p.label_dim, d))
}

/// The A∞ module `M ⊠ P` obtained by tensoring the `a`-side of an AA
/// bimodule with a type D structure; it is a module over the `b`-side.
pub struct AABoxD<'a, M: AABimodule> {
    pub m: &'a M,
    pub p: &'a DStructure<StrandsAlgebra>,
    pub gens: Vec<(usize, usize)>,
    pos: HashMap<(usize, usize), usize>,
    paths: DPaths,
    depth_cap: usize,
}

impl<'a, M: AABimodule> AABoxD<'a, M> {
    pub fn new(m: &'a M, p: &'a DStructure<StrandsAlgebra>, depth_cap: usize) -> Self {
        let mut gens = Vec::new();
        for x in 0..m.len() {
            for q in 0..p.len() {
                if m.idem_a(x) == p.gens[q].idem {
                    gens.push((x, q));
                }
            }
        }
        let pos = gens.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        AABoxD {
            m,
            p,
            gens,
            pos,
            paths: d_paths(p, depth_cap),
            depth_cap,
        }
    }

    /// Fails if `m₁` is nonzero on a path of maximal length (the module
    /// would need more depth than allowed).
    pub fn check_bounded(&self) -> Result<(), HomalgError> {
        for &(x, q) in &self.gens {
            for (seq, _) in &self.paths.paths[q] {
                if seq.len() == self.depth_cap && !self.m.action(x, seq, &[]).is_empty() {
                    return Err(HomalgError::Unbounded(self.depth_cap));
                }
            }
        }
        Ok(())
    }
}

impl<M: AABimodule> AInfModule for AABoxD<'_, M> {
    fn alg(&self) -> &StrandsAlgebra {
        self.m.alg_b()
    }
    fn len(&self) -> usize {
        self.gens.len()
    }
    fn name(&self, x: usize) -> String {
        let (a, q) = self.gens[x];
        format!("{}{}", self.m.name(a), self.p.gens[q].name)
    }
    fn idem(&self, x: usize) -> u64 {
        self.m.idem_b(self.gens[x].0)
    }
    fn label(&self, x: usize) -> u64 {
        self.p.gens[self.gens[x].1].label
    }
    fn label_dim(&self) -> usize {
        self.p.label_dim
    }
    fn action(&self, x: usize, inputs: &[Strands]) -> Vec2 {
        let (a, q) = self.gens[x];
        let pos = &self.pos;
        let mut out = Vec2::new();
        for (seq, q2) in &self.paths.paths[q] {
            for y in self.m.action(a, seq, inputs) {
                if let Some(&t) = pos.get(&(y, *q2)) {
                    super::retract::toggle(&mut out, t);
                }
            }
        }
        if inputs.is_empty() {
            for q2 in &self.paths.units[q] {
                if let Some(&t) = pos.get(&(a, *q2)) {
                    super::retract::toggle(&mut out, t);
                }
            }
        }
        out
    }
}

/// `M ⊠ P` for an AA bimodule and a DD structure over `A(Z) ⊗ A(Z')`,
/// pairing the `a`-side of `M` with the `A(Z)` factor.  The result is a DA
/// bimodule with type D side `A(Z')` (from `P`) and A∞ side the `b`-side of
/// `M`.  Input sequences of length up to `depth_cap - 1` are enumerated.
pub fn box_aa_dd(m: &impl AABimodule, p: &DStructure<OuterAlgebra>, depth_cap: usize) -> Result<DABimodule, HomalgError> {
    let zp_alg = p.alg.right_alg();
    let mut out = DABimodule::new(zp_alg.clone(), m.alg_b().clone(), p.label_dim);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for x in 0..m.len() {
        for y in 0..p.len() {
            if m.idem_a(x) == p.gens[y].idem.0 {
                let id = out.add_gen(
                    format!("{}{}", m.name(x), p.gens[y].name),
                    p.gens[y].idem.1,
                    m.idem_b(x),
                    p.gens[y].label,
                );
                index.insert((x, y), id);
            }
        }
    }
    // DD paths: (Z-coefficient sequence, product of Z'-coefficients, end);
    // the product is pruned as soon as it vanishes.
    let mut paths: Vec<Vec<(Vec<Strands>, Strands, usize)>> = vec![Vec::new(); p.len()];
    let mut unit_steps: Vec<Vec<(Strands, usize)>> = vec![Vec::new(); p.len()];
    for y in 0..p.len() {
        paths[y].push((Vec::new(), Strands::idempotent(p.gens[y].idem.1), y));
        let mut frontier = vec![(Vec::new(), Strands::idempotent(p.gens[y].idem.1), y)];
        for _ in 0..depth_cap {
            let mut next = Vec::new();
            for (s, prod, cur) in &frontier {
                for (c, y2) in &p.delta[*cur] {
                    if c.left.is_idempotent() {
                        if s.is_empty() {
                            unit_steps[y].push((c.right, *y2));
                        }
                        continue;
                    }
                    let Some(prod2) = zp_alg.mul(prod, &c.right) else { continue };
                    let mut s2 = s.clone();
                    s2.push(c.left);
                    next.push((s2, prod2, *y2));
                }
            }
            paths[y].extend(next.iter().cloned());
            frontier = next;
        }
        // One more step must be impossible, or the structure is unbounded.
        for (_, prod, cur) in &frontier {
            for (c, _) in &p.delta[*cur] {
                if !c.left.is_idempotent() && zp_alg.mul(prod, &c.right).is_some() {
                    return Err(HomalgError::Unbounded(depth_cap));
                }
            }
        }
        unit_steps[y].sort();
        unit_steps[y].dedup();
    }
    // All chained input sequences on the b-side, by starting idempotent.
    let b_index = m.alg_b().index();
    let mut seqs_by_start: HashMap<u64, Vec<Vec<Strands>>> = HashMap::new();
    let starts: BTreeSet<u64> = (0..m.len()).map(|x| m.idem_b(x)).collect();
    for s in starts {
        let mut all = vec![Vec::new()];
        let mut frontier: Vec<(Vec<Strands>, u64)> = vec![(Vec::new(), s)];
        for _ in 0..depth_cap.saturating_sub(1) {
            let mut next = Vec::new();
            for (seq, cur) in &frontier {
                for &i in b_index.with_left(*cur) {
                    let e = b_index.elements[i];
                    if e.is_idempotent() {
                        continue;
                    }
                    let mut s2 = seq.clone();
                    s2.push(e);
                    all.push(s2.clone());
                    next.push((s2, e.right_idem(m.alg_b().pmc())));
                }
            }
            frontier = next;
        }
        seqs_by_start.insert(s, all);
    }
    let mut keys: Vec<((usize, usize), usize)> = index.iter().map(|(k, v)| (*k, *v)).collect();
    keys.sort();
    for ((x, y), id) in keys {
        for beta in &seqs_by_start[&m.idem_b(x)] {
            for (alpha, prod, y2) in &paths[y] {
                for x2 in m.action(x, alpha, beta) {
                    if let Some(&t) = index.get(&(x2, *y2)) {
                        out.toggle(id, beta.clone(), *prod, t);
                    }
                }
            }
            if beta.is_empty() {
                for (c, y2) in &unit_steps[y] {
                    if let Some(&t) = index.get(&(x, *y2)) {
                        out.toggle(id, Vec::new(), *c, t);
                    }
                }
            }
        }
    }
    Ok(out)
}
