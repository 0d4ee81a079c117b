//! Type DA bimodules over strands algebras, stored explicitly as finitely
//! many nonzero `δ¹_{1+j}` terms.
//!
//! Inputs are always non-idempotent basic elements; the strictly unital
//! term `δ¹_2(x, ι) = ι ⊗ x` is implicit.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde_json::json;

use super::complex::label_string;
use super::dstructure::{toggle_term, DStructure, Terms};
use super::{combine_labels, label_le, CheckReport, HomalgError};
use crate::strands::{DgAlgebra, Strands, StrandsAlgebra};

/// A generator of a DA bimodule: left idempotent over the type D side,
/// right idempotent over the A∞ side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DAGen {
    pub name: String,
    pub d_idem: u64,
    pub a_idem: u64,
    pub label: u64,
}

/// Key of a structure-map term: generator and input sequence.
pub type DAKey = (usize, Vec<Strands>);

#[derive(Clone)]
pub struct DABimodule {
    pub d_alg: StrandsAlgebra,
    pub a_alg: StrandsAlgebra,
    pub gens: Vec<DAGen>,
    pub delta: BTreeMap<DAKey, Terms<Strands>>,
    pub label_dim: usize,
}

impl DABimodule {
    pub fn new(d_alg: StrandsAlgebra, a_alg: StrandsAlgebra, label_dim: usize) -> Self {
        DABimodule {
            d_alg,
            a_alg,
            gens: Vec::new(),
            delta: BTreeMap::new(),
            label_dim,
        }
    }

    pub fn add_gen(&mut self, name: impl Into<String>, d_idem: u64, a_idem: u64, label: u64) -> usize {
        self.gens.push(DAGen {
            name: name.into(),
            d_idem,
            a_idem,
            label,
        });
        self.gens.len() - 1
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.delta.values().map(|t| t.len()).sum()
    }

    /// Toggle the term `a ⊗ y` in `δ¹(x; inputs)`.
    pub fn toggle(&mut self, x: usize, inputs: Vec<Strands>, a: Strands, y: usize) {
        let e = self.delta.entry((x, inputs)).or_default();
        toggle_term(e, a, y);
        // Keep the map free of empty entries.
        let empty = e.is_empty();
        if empty {
            self.delta.retain(|_, v| !v.is_empty());
        }
    }

    fn toggle_fast(delta: &mut BTreeMap<DAKey, Terms<Strands>>, key: DAKey, a: Strands, y: usize) {
        let e = delta.entry(key.clone()).or_default();
        toggle_term(e, a, y);
        if e.is_empty() {
            delta.remove(&key);
        }
    }

    /// Maximum input length among stored terms.
    pub fn max_inputs(&self) -> usize {
        self.delta.keys().map(|(_, v)| v.len()).max().unwrap_or(0)
    }

    /// Value of `δ¹(x; inputs)` including the implicit unital term.
    pub fn value(&self, x: usize, inputs: &[Strands]) -> Terms<Strands> {
        let mut t = self
            .delta
            .get(&(x, inputs.to_vec()))
            .cloned()
            .unwrap_or_default();
        if inputs.len() == 1 && self.a_alg.is_unit(&inputs[0]) && inputs[0].horiz == self.gens[x].a_idem {
            toggle_term(&mut t, Strands::idempotent(self.gens[x].d_idem), x);
        }
        t
    }

    fn idempotent_report(&self) -> CheckReport {
        let mut rep = CheckReport::default();
        for ((x, inputs), terms) in &self.delta {
            let g = &self.gens[*x];
            let mut cur = g.a_idem;
            for b in inputs {
                if self.a_alg.is_unit(b) || self.a_alg.left_idem(b) != cur {
                    rep.push(format!("bad input sequence at {}", g.name));
                }
                cur = self.a_alg.right_idem(b);
            }
            for (a, y) in terms {
                let h = &self.gens[*y];
                if self.d_alg.left_idem(a) != g.d_idem || self.d_alg.right_idem(a) != h.d_idem || h.a_idem != cur {
                    rep.push(format!(
                        "idempotent mismatch in δ({}; {} inputs) ∋ {} ⊗ {}",
                        g.name,
                        inputs.len(),
                        self.d_alg.fmt_basis(a),
                        h.name
                    ));
                }
                if !label_le(g.label, h.label) {
                    rep.push(format!("label decreases along {} → {}", g.name, h.name));
                }
            }
        }
        rep
    }

    /// The DA structure relation evaluated at `(x, inputs)`.
    fn relation(&self, x: usize, inputs: &[Strands]) -> Terms<Strands> {
        let mut acc = BTreeSet::new();
        let j = inputs.len();
        for i in 0..=j {
            for (a, y) in self.value(x, &inputs[..i]) {
                for (c, z) in self.value(y, &inputs[i..]) {
                    if let Some(ac) = self.d_alg.mul(&a, &c) {
                        toggle_term(&mut acc, ac, z);
                    }
                }
            }
        }
        for (a, y) in self.value(x, inputs) {
            for da in self.d_alg.d(&a) {
                toggle_term(&mut acc, da, y);
            }
        }
        let mut buf = inputs.to_vec();
        for t in 0..j {
            for u in self.a_alg.d(&inputs[t]) {
                buf[t] = u;
                for (a, y) in self.value(x, &buf) {
                    toggle_term(&mut acc, a, y);
                }
            }
            buf[t] = inputs[t];
        }
        for t in 0..j.saturating_sub(1) {
            if let Some(p) = self.a_alg.mul(&inputs[t], &inputs[t + 1]) {
                let mut merged = inputs[..t].to_vec();
                merged.push(p);
                merged.extend_from_slice(&inputs[t + 2..]);
                for (a, y) in self.value(x, &merged) {
                    toggle_term(&mut acc, a, y);
                }
            }
        }
        acc
    }

    /// Idempotents, label monotonicity, and the DA structure relation on
    /// every input tuple that could contribute.
    pub fn structure_check(&self) -> CheckReport {
        let mut rep = self.idempotent_report();
        if !rep.ok() {
            return rep;
        }
        let index = self.a_alg.index();
        let mut candidates: BTreeSet<DAKey> = self.delta.keys().cloned().collect();
        for ((x, b1), terms) in &self.delta {
            for (_, y) in terms {
                for ((y2, b2), _) in self.delta.range((*y, Vec::new())..) {
                    if y2 != y {
                        break;
                    }
                    let mut v = b1.clone();
                    v.extend_from_slice(b2);
                    candidates.insert((*x, v));
                }
            }
            for t in 0..b1.len() {
                let c = b1[t];
                let (l, r) = (self.a_alg.left_idem(&c), self.a_alg.right_idem(&c));
                for &ui in index.bucket(l, r) {
                    let u = index.elements[ui];
                    if self.a_alg.d(&u).contains(&c) {
                        let mut v = b1.clone();
                        v[t] = u;
                        candidates.insert((*x, v));
                    }
                }
                for &ui in index.with_left(l) {
                    let u = index.elements[ui];
                    if u.is_idempotent() {
                        continue;
                    }
                    for &vi in index.bucket(u.right_idem(self.a_alg.pmc()), r) {
                        let w = index.elements[vi];
                        if !w.is_idempotent() && self.a_alg.mul(&u, &w) == Some(c) {
                            let mut v = b1[..t].to_vec();
                            v.push(u);
                            v.push(w);
                            v.extend_from_slice(&b1[t + 1..]);
                            candidates.insert((*x, v));
                        }
                    }
                }
            }
        }
        for (x, inputs) in candidates {
            let r = self.relation(x, &inputs);
            for (a, z) in r {
                rep.push(format!(
                    "relation at ({}; {} inputs) leaves {} ⊗ {}",
                    self.gens[x].name,
                    inputs.len(),
                    self.d_alg.fmt_basis(&a),
                    self.gens[z].name
                ));
            }
        }
        rep
    }

    /// Cancel `δ¹_1` arrows with unit coefficient (label-preserving ones only
    /// when `filtered`), pushing zigzags through the cancelled pair into
    /// higher structure maps.
    pub fn reduce(&self, filtered: bool, depth_cap: usize) -> Result<DABimodule, HomalgError> {
        let mut delta = self.delta.clone();
        let mut alive = vec![true; self.len()];
        let mut queue: BTreeSet<usize> = (0..self.len()).collect();
        while let Some(x) = queue.pop_first() {
            if !alive[x] {
                continue;
            }
            let Some(terms) = delta.get(&(x, Vec::new())) else { continue };
            let mut per_target: BTreeMap<usize, Vec<Strands>> = BTreeMap::new();
            for (a, y) in terms {
                per_target.entry(*y).or_default().push(*a);
            }
            let Some(y) = per_target.iter().find_map(|(&y, cs)| {
                let ok = y != x
                    && alive[y]
                    && cs.len() == 1
                    && cs[0].is_idempotent()
                    && (!filtered || self.gens[x].label == self.gens[y].label);
                ok.then_some(y)
            }) else {
                continue;
            };
            // Closure X*: terms (inputs, a, w) reachable from x avoiding y,
            // passing through y -> x any number of times.
            let mut from_x: Vec<(Vec<Strands>, Strands, usize)> = Vec::new();
            for ((xx, inputs), ts) in delta.range((x, Vec::new())..) {
                if *xx != x {
                    break;
                }
                for (a, w) in ts {
                    if !(inputs.is_empty() && *w == y && a.is_idempotent()) {
                        from_x.push((inputs.clone(), *a, *w));
                    }
                }
            }
            let mut closure: BTreeMap<(Vec<Strands>, usize), BTreeSet<Strands>> = BTreeMap::new();
            let mut frontier: Vec<(Vec<Strands>, Strands, usize)> = vec![(Vec::new(), Strands::idempotent(self.gens[x].d_idem), y)];
            let mut rounds = 0;
            while !frontier.is_empty() {
                rounds += 1;
                if rounds > depth_cap {
                    return Err(HomalgError::Unbounded(depth_cap));
                }
                let mut next: BTreeMap<(Vec<Strands>, usize), BTreeSet<Strands>> = BTreeMap::new();
                for (pre, a0, _) in &frontier {
                    for (inputs, a, w) in &from_x {
                        let Some(prod) = self.d_alg.mul(a0, a) else { continue };
                        let mut v = pre.clone();
                        v.extend_from_slice(inputs);
                        let target = if *w == y { &mut next } else { &mut closure };
                        let e = target.entry((v, *w)).or_default();
                        if !e.remove(&prod) {
                            e.insert(prod);
                        }
                    }
                }
                frontier = next
                    .into_iter()
                    .flat_map(|((v, w), cs)| cs.into_iter().map(move |c| (v.clone(), c, w)))
                    .collect();
            }
            // Every term a0 ⊗ y in δ(z; pre) is replaced by a0 · X*.
            let mut updates: Vec<(DAKey, Strands, usize)> = Vec::new();
            let mut removals: Vec<(DAKey, Strands)> = Vec::new();
            for ((z, pre), ts) in &delta {
                if *z == x || *z == y || !alive[*z] {
                    continue;
                }
                for (a0, w0) in ts {
                    if *w0 != y {
                        continue;
                    }
                    removals.push(((*z, pre.clone()), *a0));
                    for ((inputs, w), cs) in &closure {
                        for c in cs {
                            if let Some(prod) = self.d_alg.mul(a0, c) {
                                let mut v = pre.clone();
                                v.extend_from_slice(inputs);
                                if v.len() > depth_cap {
                                    return Err(HomalgError::Unbounded(depth_cap));
                                }
                                updates.push(((*z, v), prod, *w));
                            }
                        }
                    }
                }
            }
            for (key, a0) in removals {
                queue.insert(key.0);
                Self::toggle_fast(&mut delta, key, a0, y);
            }
            for (key, a, w) in updates {
                queue.insert(key.0);
                Self::toggle_fast(&mut delta, key, a, w);
            }
            alive[x] = false;
            alive[y] = false;
            delta.retain(|(z, _), ts| {
                if *z == x || *z == y {
                    return false;
                }
                ts.retain(|(_, w)| *w != x && *w != y);
                !ts.is_empty()
            });
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&x| alive[x]).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut res = DABimodule::new(self.d_alg.clone(), self.a_alg.clone(), self.label_dim);
        for &x in &keep {
            let g = &self.gens[x];
            res.add_gen(g.name.clone(), g.d_idem, g.a_idem, g.label);
        }
        for ((x, inputs), ts) in delta {
            for (a, y) in ts {
                Self::toggle_fast(&mut res.delta, (pos[&x], inputs.clone()), a, pos[&y]);
            }
        }
        Ok(res)
    }

    /// Whether this is the identity bimodule: one generator per idempotent,
    /// `δ¹_1 = 0`, `δ¹_2(x, a) = a ⊗ y` for every basic `a`, nothing else.
    pub fn is_identity_like(&self) -> bool {
        let index = self.a_alg.index();
        let idems: BTreeSet<u64> = index.elements.iter().filter(|e| e.is_idempotent()).map(|e| e.horiz).collect();
        if self.gens.len() != idems.len() {
            return false;
        }
        let by_idem: HashMap<u64, usize> = self.gens.iter().enumerate().map(|(i, g)| (g.a_idem, i)).collect();
        if by_idem.len() != idems.len() || self.gens.iter().any(|g| g.d_idem != g.a_idem || !idems.contains(&g.a_idem)) {
            return false;
        }
        let mut expected: BTreeMap<DAKey, Terms<Strands>> = BTreeMap::new();
        for b in &index.elements {
            if b.is_idempotent() {
                continue;
            }
            let l = b.left_idem(self.a_alg.pmc());
            let r = b.right_idem(self.a_alg.pmc());
            let mut t = BTreeSet::new();
            t.insert((*b, by_idem[&r]));
            expected.insert((by_idem[&l], vec![*b]), t);
        }
        expected == self.delta
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: Vec<_> = self
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                json!({"id": i, "name": g.name, "d_idempotent": self.d_alg.fmt_idem(&g.d_idem),
                       "a_idempotent": self.a_alg.fmt_idem(&g.a_idem),
                       "label": label_string(g.label, self.label_dim)})
            })
            .collect();
        let mut terms = Vec::new();
        for ((x, inputs), ts) in &self.delta {
            let ins: Vec<String> = inputs.iter().map(|b| self.a_alg.fmt_basis(b)).collect();
            for (a, y) in ts {
                terms.push(json!({"source": x, "inputs": ins, "coefficient": self.d_alg.fmt_basis(a), "target": y}));
            }
        }
        json!({"kind": "type_da", "generators": gens, "terms": terms})
    }
}

/// The identity DA bimodule over a strands algebra (middle weight).
pub fn identity_da(alg: &StrandsAlgebra) -> DABimodule {
    let mut m = DABimodule::new(alg.clone(), alg.clone(), 0);
    let index = alg.index();
    let mut by_idem = HashMap::new();
    for e in index.elements.iter().filter(|e| e.is_idempotent()) {
        let i = m.add_gen(alg.fmt_idem(&e.horiz), e.horiz, e.horiz, 0);
        by_idem.insert(e.horiz, i);
    }
    for b in index.elements.iter().filter(|e| !e.is_idempotent()) {
        let l = by_idem[&b.left_idem(alg.pmc())];
        let r = by_idem[&b.right_idem(alg.pmc())];
        DABimodule::toggle_fast(&mut m.delta, (l, vec![*b]), *b, r);
    }
    m
}

/// Set of all prefixes of the input sequences stored for each generator.
fn input_prefixes(m: &DABimodule) -> HashSet<DAKey> {
    let mut out = HashSet::new();
    for (x, inputs) in m.delta.keys() {
        for l in 0..=inputs.len() {
            out.insert((*x, inputs[..l].to_vec()));
        }
    }
    out
}

/// `N ⊠ P` for a DA bimodule and a type D structure over its A∞ side.
pub fn box_da_d(n: &DABimodule, p: &DStructure<StrandsAlgebra>, depth_cap: usize) -> Result<DStructure<StrandsAlgebra>, HomalgError> {
    let prefixes = input_prefixes(n);
    let mut out = DStructure::new(n.d_alg.clone(), n.label_dim + p.label_dim);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for (xi, x) in n.gens.iter().enumerate() {
        for (pi, pg) in p.gens.iter().enumerate() {
            if x.a_idem == pg.idem {
                let id = out.add_gen(
                    format!("{}{}", x.name, pg.name),
                    x.d_idem,
                    combine_labels(x.label, n.label_dim, pg.label),
                );
                index.insert((xi, pi), id);
            }
        }
    }
    let pairs: Vec<((usize, usize), usize)> = index.iter().map(|(k, v)| (*k, *v)).collect();
    for ((xi, pi), id) in pairs {
        // Depth-first over paths in P, pruned by the stored input prefixes.
        let mut stack: Vec<(Vec<Strands>, usize)> = vec![(Vec::new(), pi)];
        while let Some((seq, q)) = stack.pop() {
            if seq.len() > depth_cap {
                return Err(HomalgError::Unbounded(depth_cap));
            }
            if let Some(ts) = n.delta.get(&(xi, seq.clone())) {
                for (a, y) in ts {
                    if let Some(&t) = index.get(&(*y, q)) {
                        out.toggle(id, *a, t);
                    }
                }
            }
            for (b, q2) in &p.delta[q] {
                if b.is_idempotent() {
                    if seq.is_empty() {
                        if let Some(&t) = index.get(&(xi, *q2)) {
                            out.toggle(id, Strands::idempotent(n.gens[xi].d_idem), t);
                        }
                    }
                    continue;
                }
                let mut s2 = seq.clone();
                s2.push(*b);
                if prefixes.contains(&(xi, s2.clone())) {
                    stack.push((s2, *q2));
                }
            }
        }
    }
    Ok(out)
}

/// `N1 ⊠ N2` for DA bimodules (A∞ side of `N1` = type D side of `N2`).
pub fn box_da_da(n1: &DABimodule, n2: &DABimodule, depth_cap: usize) -> Result<DABimodule, HomalgError> {
    let prefixes = input_prefixes(n1);
    let mut out = DABimodule::new(n1.d_alg.clone(), n2.a_alg.clone(), n1.label_dim + n2.label_dim);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for (i1, g1) in n1.gens.iter().enumerate() {
        for (i2, g2) in n2.gens.iter().enumerate() {
            if g1.a_idem == g2.d_idem {
                let id = out.add_gen(
                    format!("{}{}", g1.name, g2.name),
                    g1.d_idem,
                    g2.a_idem,
                    combine_labels(g1.label, n1.label_dim, g2.label),
                );
                index.insert((i1, i2), id);
            }
        }
    }
    // Outgoing terms of N2 grouped by source generator.
    type Outgoing<'a> = Vec<(&'a Vec<Strands>, Strands, usize)>;
    let mut n2_out: HashMap<usize, Outgoing> = HashMap::new();
    for ((y, inputs), ts) in &n2.delta {
        for (a, z) in ts {
            n2_out.entry(*y).or_default().push((inputs, *a, *z));
        }
    }
    let pairs: Vec<((usize, usize), usize)> = index.iter().map(|(k, v)| (*k, *v)).collect();
    for ((x1, x2), id) in pairs {
        // state: (N2 generator, accumulated N1 inputs, accumulated outer inputs)
        let mut stack: Vec<(usize, Vec<Strands>, Vec<Strands>)> = vec![(x2, Vec::new(), Vec::new())];
        while let Some((y, avec, cvec)) = stack.pop() {
            if avec.len() > depth_cap {
                return Err(HomalgError::Unbounded(depth_cap));
            }
            if let Some(ts) = n1.delta.get(&(x1, avec.clone())) {
                for (e, z1) in ts {
                    if let Some(&t) = index.get(&(*z1, y)) {
                        DABimodule::toggle_fast(&mut out.delta, (id, cvec.clone()), *e, t);
                    }
                }
            }
            let Some(steps) = n2_out.get(&y) else { continue };
            for (inputs, a, z) in steps {
                let mut c2 = cvec.clone();
                c2.extend_from_slice(inputs);
                if a.is_idempotent() {
                    // Only the strictly unital action of N1 accepts a unit.
                    if avec.is_empty() {
                        if let Some(&t) = index.get(&(x1, *z)) {
                            if !c2.is_empty() {
                                DABimodule::toggle_fast(&mut out.delta, (id, c2), Strands::idempotent(n1.gens[x1].d_idem), t);
                            }
                        }
                    }
                    continue;
                }
                let mut a2 = avec.clone();
                a2.push(*a);
                if prefixes.contains(&(x1, a2.clone())) {
                    stack.push((*z, a2, c2));
                }
            }
        }
    }
    Ok(out)
}
