//! Type D structures over a dg algebra, their morphisms, and mapping cones.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde_json::json;

use super::complex::label_string;
use super::{label_le, CheckReport, HomalgError};
use crate::strands::DgAlgebra;

/// A generator of a type D structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DGen<I> {
    pub name: String,
    pub idem: I,
    pub label: u64,
}

/// Terms `a ⊗ y` of a structure map, as an F2 set.
pub type Terms<B> = BTreeSet<(B, usize)>;

pub(crate) fn toggle_term<B: Ord>(t: &mut BTreeSet<(B, usize)>, a: B, y: usize) {
    let key = (a, y);
    if !t.remove(&key) {
        t.insert(key);
    }
}

/// A (possibly filtered) type D structure: generators with idempotents and
/// `δ¹(x) = Σ a ⊗ y`.
#[derive(Clone)]
pub struct DStructure<A: DgAlgebra> {
    pub alg: A,
    pub gens: Vec<DGen<A::Idem>>,
    pub delta: Vec<Terms<A::Basis>>,
    pub label_dim: usize,
}

impl<A: DgAlgebra> DStructure<A> {
    pub fn new(alg: A, label_dim: usize) -> Self {
        DStructure {
            alg,
            gens: Vec::new(),
            delta: Vec::new(),
            label_dim,
        }
    }

    pub fn add_gen(&mut self, name: impl Into<String>, idem: A::Idem, label: u64) -> usize {
        self.gens.push(DGen {
            name: name.into(),
            idem,
            label,
        });
        self.delta.push(BTreeSet::new());
        self.gens.len() - 1
    }

    /// Add (mod 2) the term `a ⊗ y` to `δ¹(x)`.
    pub fn toggle(&mut self, x: usize, a: A::Basis, y: usize) {
        toggle_term(&mut self.delta[x], a, y);
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.delta.iter().map(|t| t.len()).sum()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Idempotent compatibility, label monotonicity, and
    /// `(d⊗1)δ¹ + (μ⊗1)(1⊗δ¹)δ¹ = 0`.
    pub fn structure_check(&self) -> CheckReport {
        let mut rep = CheckReport::default();
        for (x, terms) in self.delta.iter().enumerate() {
            for (a, y) in terms {
                if self.alg.left_idem(a) != self.gens[x].idem || self.alg.right_idem(a) != self.gens[*y].idem {
                    rep.push(format!(
                        "idempotent mismatch in δ({}) ∋ {} ⊗ {}",
                        self.gens[x].name,
                        self.alg.fmt_basis(a),
                        self.gens[*y].name
                    ));
                }
                if !label_le(self.gens[x].label, self.gens[*y].label) {
                    rep.push(format!(
                        "label decreases along {} → {}",
                        self.gens[x].name, self.gens[*y].name
                    ));
                }
            }
        }
        if !rep.ok() {
            return rep;
        }
        for x in 0..self.len() {
            let e = self.delta_squared(x);
            for (a, z) in e {
                rep.push(format!(
                    "δ²({}) has uncancelled term {} ⊗ {}",
                    self.gens[x].name,
                    self.alg.fmt_basis(&a),
                    self.gens[z].name
                ));
            }
        }
        rep
    }

    /// `(d⊗1)δ¹(x) + (μ⊗1)(1⊗δ¹)δ¹(x)`.
    pub fn delta_squared(&self, x: usize) -> Terms<A::Basis> {
        let mut acc = BTreeSet::new();
        for (a, y) in &self.delta[x] {
            for da in self.alg.d(a) {
                toggle_term(&mut acc, da, *y);
            }
            for (b, z) in &self.delta[*y] {
                if let Some(ab) = self.alg.mul(a, b) {
                    toggle_term(&mut acc, ab, *z);
                }
            }
        }
        acc
    }

    /// Cancel arrows whose coefficient is exactly the idempotent (and, when
    /// `filtered`, whose endpoints carry the same label), smallest source
    /// first.  Uses `δ'(z) = δ(z) + Σ a·b ⊗ w` for `a ⊗ y ∈ δ(z)` and
    /// `b ⊗ w ∈ δ(x) - 1⊗y`.
    pub fn reduce(&self, filtered: bool) -> DStructure<A> {
        let n = self.len();
        let mut out: Vec<BTreeMap<usize, BTreeSet<A::Basis>>> = vec![BTreeMap::new(); n];
        let mut inc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (x, terms) in self.delta.iter().enumerate() {
            for (a, y) in terms {
                out[x].entry(*y).or_default().insert(*a);
                inc[*y].insert(x);
            }
        }
        let mut alive = vec![true; n];
        let alg = &self.alg;
        let cancellable = |out: &Vec<BTreeMap<usize, BTreeSet<A::Basis>>>, x: usize| -> Option<usize> {
            out[x].iter().find_map(|(&y, coeffs)| {
                let ok = y != x
                    && coeffs.len() == 1
                    && alg.is_unit(coeffs.iter().next().unwrap())
                    && (!filtered || self.gens[x].label == self.gens[y].label);
                ok.then_some(y)
            })
        };
        let mut queue: BTreeSet<usize> = (0..n).collect();
        while let Some(x) = queue.pop_first() {
            if !alive[x] {
                continue;
            }
            let Some(y) = cancellable(&out, x) else { continue };
            let rest: Vec<(usize, A::Basis)> = out[x]
                .iter()
                .filter(|(&w, _)| w != y)
                .flat_map(|(&w, cs)| cs.iter().map(move |c| (w, *c)))
                .collect();
            let sources: Vec<usize> = inc[y].iter().copied().filter(|&z| z != x).collect();
            for &z in &sources {
                let coeffs: Vec<A::Basis> = out[z].get(&y).map(|s| s.iter().copied().collect()).unwrap_or_default();
                for a in coeffs {
                    for (w, b) in &rest {
                        if let Some(ab) = alg.mul(&a, b) {
                            let e = out[z].entry(*w).or_default();
                            if !e.remove(&ab) {
                                e.insert(ab);
                            }
                            if e.is_empty() {
                                out[z].remove(w);
                                inc[*w].remove(&z);
                            } else {
                                inc[*w].insert(z);
                            }
                        }
                    }
                }
                out[z].remove(&y);
                inc[y].remove(&z);
                queue.insert(z);
            }
            for v in [x, y] {
                let targets: Vec<usize> = out[v].keys().copied().collect();
                for w in targets {
                    inc[w].remove(&v);
                }
                out[v].clear();
                let srcs: Vec<usize> = inc[v].iter().copied().collect();
                for z in srcs {
                    out[z].remove(&v);
                }
                inc[v].clear();
                alive[v] = false;
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&x| alive[x]).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut res = DStructure::new(self.alg.clone(), self.label_dim);
        for &x in &keep {
            let g = &self.gens[x];
            res.add_gen(g.name.clone(), g.idem, g.label);
        }
        for (i, &x) in keep.iter().enumerate() {
            for (y, cs) in &out[x] {
                for c in cs {
                    res.toggle(i, *c, pos[y]);
                }
            }
        }
        res
    }

    /// Same structure with all labels forgotten.
    pub fn unfiltered(&self) -> DStructure<A> {
        let mut s = self.clone();
        s.label_dim = 0;
        for g in &mut s.gens {
            g.label = 0;
        }
        s
    }

    /// Restriction to generators with a given label (the associated graded
    /// piece of a filtered structure).
    pub fn label_piece(&self, label: u64) -> DStructure<A> {
        let keep: Vec<usize> = (0..self.len()).filter(|&x| self.gens[x].label == label).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut res = DStructure::new(self.alg.clone(), self.label_dim);
        for &x in &keep {
            let g = &self.gens[x];
            res.add_gen(g.name.clone(), g.idem, g.label);
        }
        for (i, &x) in keep.iter().enumerate() {
            for (a, y) in &self.delta[x] {
                if let Some(&j) = pos.get(y) {
                    res.toggle(i, *a, j);
                }
            }
        }
        res
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: Vec<_> = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                json!({"id": i, "name": g.name, "idempotent": self.alg.fmt_idem(&g.idem),
                       "label": label_string(g.label, self.label_dim)})
            })
            .collect();
        let mut terms = Vec::new();
        for (x, ts) in self.delta.iter().enumerate() {
            for (a, y) in ts {
                terms.push(json!({"source": x, "coefficient": self.alg.fmt_basis(a), "target": y}));
            }
        }
        json!({"kind": "type_d", "generators": gens, "terms": terms})
    }

    /// Human-readable listing `x → a ⊗ y`.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (x, ts) in self.delta.iter().enumerate() {
            for (a, y) in ts {
                s.push_str(&format!(
                    "{} → {} {}\n",
                    self.gens[x].name,
                    self.alg.fmt_basis(a),
                    self.gens[*y].name
                ));
            }
        }
        s
    }
}

/// A morphism of type D structures `f¹: P → A ⊗ Q`.
#[derive(Clone)]
pub struct DMorphism<A: DgAlgebra> {
    pub source: Arc<DStructure<A>>,
    pub target: Arc<DStructure<A>>,
    pub comp: Vec<Terms<A::Basis>>,
}

impl<A: DgAlgebra> DMorphism<A> {
    pub fn zero(source: Arc<DStructure<A>>, target: Arc<DStructure<A>>) -> Self {
        let n = source.len();
        DMorphism {
            source,
            target,
            comp: vec![BTreeSet::new(); n],
        }
    }

    pub fn identity(p: Arc<DStructure<A>>) -> Self {
        let mut f = DMorphism::zero(p.clone(), p.clone());
        for (x, g) in p.gens.iter().enumerate() {
            f.comp[x].insert((p.alg.unit(g.idem), x));
        }
        f
    }

    pub fn toggle(&mut self, x: usize, a: A::Basis, y: usize) {
        toggle_term(&mut self.comp[x], a, y);
    }

    pub fn is_zero(&self) -> bool {
        self.comp.iter().all(|t| t.is_empty())
    }

    pub fn num_terms(&self) -> usize {
        self.comp.iter().map(|t| t.len()).sum()
    }

    /// The morphism-complex differential
    /// `df = (d⊗1)f + (μ⊗1)(1⊗f)δ_P + (μ⊗1)(1⊗δ_Q)f`.
    pub fn differential(&self) -> DMorphism<A> {
        let alg = &self.source.alg;
        let mut res = DMorphism::zero(self.source.clone(), self.target.clone());
        for x in 0..self.source.len() {
            let acc = &mut res.comp[x];
            for (a, y) in &self.comp[x] {
                for da in alg.d(a) {
                    toggle_term(acc, da, *y);
                }
                for (b, z) in &self.target.delta[*y] {
                    if let Some(ab) = alg.mul(a, b) {
                        toggle_term(acc, ab, *z);
                    }
                }
            }
            for (a, xp) in &self.source.delta[x] {
                for (b, y) in &self.comp[*xp] {
                    if let Some(ab) = alg.mul(a, b) {
                        toggle_term(acc, ab, *y);
                    }
                }
            }
        }
        res
    }

    /// Idempotent compatibility of every component.
    pub fn check_idempotents(&self) -> CheckReport {
        let alg = &self.source.alg;
        let mut rep = CheckReport::default();
        for (x, ts) in self.comp.iter().enumerate() {
            for (a, y) in ts {
                if alg.left_idem(a) != self.source.gens[x].idem || alg.right_idem(a) != self.target.gens[*y].idem {
                    rep.push(format!(
                        "idempotent mismatch in f({}) ∋ {} ⊗ {}",
                        self.source.gens[x].name,
                        alg.fmt_basis(a),
                        self.target.gens[*y].name
                    ));
                }
            }
        }
        rep
    }

    pub fn is_cycle(&self) -> bool {
        self.differential().is_zero()
    }

    pub fn add(&self, other: &DMorphism<A>) -> DMorphism<A> {
        let mut res = self.clone();
        for (x, ts) in other.comp.iter().enumerate() {
            for (a, y) in ts {
                toggle_term(&mut res.comp[x], *a, *y);
            }
        }
        res
    }
}

/// `(f ∘ g)¹ = (μ⊗1)(1⊗f¹)g¹` for `g: P → Q` and `f: Q → R`.
pub fn compose<A: DgAlgebra>(f: &DMorphism<A>, g: &DMorphism<A>) -> Result<DMorphism<A>, HomalgError> {
    if !Arc::ptr_eq(&g.target, &f.source) && g.target.len() != f.source.len() {
        return Err(HomalgError::Mismatch("composition of non-composable morphisms".into()));
    }
    let alg = &g.source.alg;
    let mut res = DMorphism::zero(g.source.clone(), f.target.clone());
    for x in 0..g.source.len() {
        for (a, y) in &g.comp[x] {
            for (b, z) in &f.comp[*y] {
                if let Some(ab) = alg.mul(a, b) {
                    toggle_term(&mut res.comp[x], ab, *z);
                }
            }
        }
    }
    Ok(res)
}

/// Mapping cone of a homomorphism: source at the new coordinate value 0,
/// target at 1, with differential `(δ_P 0; f δ_Q)`.
pub fn mapping_cone<A: DgAlgebra>(f: &DMorphism<A>) -> Result<DStructure<A>, HomalgError> {
    if !f.check_idempotents().ok() {
        return Err(HomalgError::Mismatch("morphism violates idempotents".into()));
    }
    if !f.is_cycle() {
        return Err(HomalgError::NotACycle(format!(
            "{} uncancelled terms in df",
            f.differential().num_terms()
        )));
    }
    let (p, q) = (&f.source, &f.target);
    if p.label_dim != q.label_dim {
        return Err(HomalgError::Mismatch("cone of structures with different label dimensions".into()));
    }
    let dim = p.label_dim;
    let mut cone = DStructure::new(p.alg.clone(), dim + 1);
    for g in &p.gens {
        cone.add_gen(g.name.clone(), g.idem, g.label);
    }
    for g in &q.gens {
        cone.add_gen(g.name.clone(), g.idem, g.label | (1 << dim));
    }
    let off = p.len();
    for (x, ts) in p.delta.iter().enumerate() {
        for (a, y) in ts {
            cone.toggle(x, *a, *y);
        }
    }
    for (x, ts) in q.delta.iter().enumerate() {
        for (a, y) in ts {
            cone.toggle(off + x, *a, off + *y);
        }
    }
    for (x, ts) in f.comp.iter().enumerate() {
        for (a, y) in ts {
            cone.toggle(x, *a, off + *y);
        }
    }
    Ok(cone)
}
