//! Type DD bimodules of the identity and of zero surgery, the surgery
//! morphisms between them, their mapping cones, the plat handlebody, and
//! a checker for the structure-constant equations.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::nearchord::{CurveAlgebra, NearChord, Sign, Subalgebra};
use crate::homalg::{mapping_cone, DMorphism, DStructure, HomalgError};
use crate::pmc::{Chord, Pmc};
use crate::strands::{DgAlgebra, Idempotent, OuterAlgebra, OuterBasis, OuterIdem, Strands, StrandsAlgebra};

/// Generator name from the `Z`-side idempotent; the torus uses the
/// customary letters.
fn gen_name(pmc: &Pmc, prefix: &str, idem: OuterIdem, torus: &[(&str, Idempotent)]) -> String {
    if pmc.genus() == 1 {
        if let Some((n, _)) = torus.iter().find(|(_, i)| *i == idem.0) {
            return n.to_string();
        }
    }
    let pairs: Vec<String> = (0..pmc.num_pairs())
        .filter(|i| idem.0 >> i & 1 == 1)
        .map(|i| {
            let (a, b) = pmc.pair(i);
            format!("{a}-{b}")
        })
        .collect();
    format!("{prefix}{{{}}}", pairs.join(","))
}

fn structure_from(alg: OuterAlgebra, gens: &[(String, OuterIdem)], arrows: &[NearChord]) -> DStructure<OuterAlgebra> {
    let mut p = DStructure::new(alg.clone(), 0);
    let mut by_idem: HashMap<OuterIdem, usize> = HashMap::new();
    for (name, idem) in gens {
        let id = p.add_gen(name.clone(), *idem, 0);
        by_idem.insert(*idem, id);
    }
    for nc in arrows {
        let (Some(&x), Some(&y)) = (
            by_idem.get(&alg.left_idem(&nc.elem)),
            by_idem.get(&alg.right_idem(&nc.elem)),
        ) else {
            continue;
        };
        p.toggle(x, nc.elem, y);
    }
    p
}

/// The type DD bimodule of the identity cobordism: one generator per
/// complementary idempotent, `δ¹` the sum of the diagonal near-chords.
pub fn cfdd_identity(pmc: Arc<Pmc>) -> DStructure<OuterAlgebra> {
    let ca_alg = OuterAlgebra::new(pmc.clone());
    let gens: Vec<(String, OuterIdem)> = super::nearchord::diagonal_idempotents(&pmc)
        .into_iter()
        .map(|i| (gen_name(&pmc, "X", i, &[("J", 1), ("K", 2)]), i))
        .collect();
    structure_from(ca_alg, &gens, &super::nearchord::identity_near_chords(&pmc))
}

/// The type DD bimodule of zero surgery along the curve: one generator
/// per anti-braid idempotent, `δ¹` the sum of the anti-braid near-chords.
pub fn cfdd_zero_surgery(ca: &CurveAlgebra) -> DStructure<OuterAlgebra> {
    let gens: Vec<(String, OuterIdem)> = ca
        .antibraid_idempotents()
        .into_iter()
        .map(|(i, _)| (gen_name(&ca.pmc, "Y", i, &[("I", 1), ("I", 2)]), i))
        .collect();
    structure_from(ca.alg.clone(), &gens, &ca.near_chords(Subalgebra::AntiBraid))
}

/// The surgery morphism: `Minus` is `F⁻: CFDD(Id) → CFDD(Y₀)` and `Plus`
/// is `F⁺: CFDD(Y₀) → CFDD(Id)`, each the sum of its near-chords.
pub fn skein_morphism(
    ca: &CurveAlgebra,
    sign: Sign,
    id: Arc<DStructure<OuterAlgebra>>,
    y0: Arc<DStructure<OuterAlgebra>>,
) -> DMorphism<OuterAlgebra> {
    let (source, target) = match sign {
        Sign::Minus => (id, y0),
        Sign::Plus => (y0, id),
    };
    let src: HashMap<OuterIdem, usize> = source.gens.iter().enumerate().map(|(i, g)| (g.idem, i)).collect();
    let tgt: HashMap<OuterIdem, usize> = target.gens.iter().enumerate().map(|(i, g)| (g.idem, i)).collect();
    let mut f = DMorphism::zero(source, target);
    for nc in ca.near_chords(Subalgebra::Morphism(sign)) {
        let x = src[&ca.alg.left_idem(&nc.elem)];
        let y = tgt[&ca.alg.right_idem(&nc.elem)];
        f.toggle(x, nc.elem, y);
    }
    f
}

/// The Dehn twist bimodule as a `{0,1}`-filtered DD structure:
/// `Cone(F⁺)` (zero surgery at 0, identity at 1) for `Plus`, `Cone(F⁻)`
/// (identity at 0, zero surgery at 1) for `Minus`.
pub fn cfdd_dehn_twist(ca: &CurveAlgebra, sign: Sign) -> Result<DStructure<OuterAlgebra>, HomalgError> {
    let id = Arc::new(cfdd_identity(ca.pmc.clone()));
    let y0 = Arc::new(cfdd_zero_surgery(ca));
    mapping_cone(&skein_morphism(ca, sign, id, y0))
}

/// Moving chords of the plat handlebody: `[1,3]` and `[4n-4, 4n-1]` for
/// `n = 2..k`, all with horizontals the odd-arc idempotent.
fn plat_data(pmc: &Pmc) -> (Idempotent, Vec<Chord>) {
    let k = pmc.genus();
    let mut chords = vec![Chord { start: 1, end: 3 }];
    for n in 2..=k {
        chords.push(Chord {
            start: (4 * n - 4) as u8,
            end: (4 * n - 1) as u8,
        });
    }
    let idem = chords.iter().fold(0u64, |m, c| m | 1 << pmc.pair_of(c.start));
    (idem, chords)
}

fn plat_structure(alg: StrandsAlgebra, idem: Idempotent, chords: &[Chord], name: &str) -> DStructure<StrandsAlgebra> {
    let pmc = alg.pmc_arc().clone();
    let mut p = DStructure::new(alg, 0);
    let x = p.add_gen(name, idem, 0);
    for c in chords {
        let sp = 1u64 << pmc.pair_of(c.start);
        let s = Strands::from_parts(&pmc, idem & !sp, &[*c]).expect("plat chord is a valid strand diagram");
        p.toggle(x, s, x);
    }
    p
}

/// The type D structure of the plat handlebody over `A(Z)`: a single
/// generator `x` with `δ¹(x) = Σₙ ξₙ ⊗ x`.
pub fn cfd_plat(pmc: Arc<Pmc>) -> DStructure<StrandsAlgebra> {
    let (idem, chords) = plat_data(&pmc);
    plat_structure(StrandsAlgebra::new(pmc), idem, &chords, "x")
}

/// The plat handlebody glued from the other side: the same data in the
/// coordinates of the orientation-reversed circle, as a type D structure
/// over `A(Z')`.
pub fn cfd_plat_mirrored(pmc: Arc<Pmc>) -> DStructure<StrandsAlgebra> {
    let (idem, chords) = plat_data(&pmc);
    let zp = Arc::new(pmc.mirror());
    let idem_m = pmc.mirror_pair_mask(idem);
    let chords_m: Vec<Chord> = chords
        .iter()
        .map(|c| Chord {
            start: pmc.mirror_pos(c.end),
            end: pmc.mirror_pos(c.start),
        })
        .collect();
    plat_structure(StrandsAlgebra::new(zp), idem_m, &chords_m, "p")
}

/// One structure-constant equation and its uncancelled terms.
#[derive(Clone, Debug, Serialize)]
pub struct EquationCheck {
    pub name: String,
    /// Uncancelled terms, each with the contributions that produced it.
    pub uncancelled: Vec<String>,
}

/// Result of [`verify_structure_constants`].
#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub equations: Vec<EquationCheck>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.equations.iter().all(|e| e.uncancelled.is_empty())
    }
}

/// `d(X) + L·X + X·R` for sums of basic elements, with per-term
/// diagnostics for whatever fails to cancel.
fn residual(alg: &OuterAlgebra, x: &[NearChord], left: &[NearChord], right: &[NearChord]) -> Vec<String> {
    let by_left = group(alg, x, true);
    let by_right = group(alg, x, false);
    let mut contributions: BTreeMap<OuterBasis, Vec<String>> = BTreeMap::new();
    let mut add = |t: OuterBasis, why: String| contributions.entry(t).or_default().push(why);
    for n in x {
        for t in alg.d(&n.elem) {
            add(t, format!("d({} {})", n.kind, alg.fmt_basis(&n.elem)));
        }
    }
    for l in left {
        for n in by_left.get(&alg.right_idem(&l.elem)).into_iter().flatten() {
            if let Some(t) = alg.mul(&l.elem, &n.elem) {
                add(t, format!("{} {} · {} {}", l.kind, alg.fmt_basis(&l.elem), n.kind, alg.fmt_basis(&n.elem)));
            }
        }
    }
    for r in right {
        for n in by_right.get(&alg.left_idem(&r.elem)).into_iter().flatten() {
            if let Some(t) = alg.mul(&n.elem, &r.elem) {
                add(t, format!("{} {} · {} {}", n.kind, alg.fmt_basis(&n.elem), r.kind, alg.fmt_basis(&r.elem)));
            }
        }
    }
    contributions
        .into_iter()
        .filter(|(_, why)| why.len() % 2 == 1)
        .map(|(t, why)| format!("{} from {}", alg.fmt_basis(&t), why.join(" + ")))
        .collect()
}

fn group<'a>(alg: &OuterAlgebra, xs: &'a [NearChord], by_left: bool) -> HashMap<OuterIdem, Vec<&'a NearChord>> {
    let mut m: HashMap<OuterIdem, Vec<&NearChord>> = HashMap::new();
    for x in xs {
        let k = if by_left { alg.left_idem(&x.elem) } else { alg.right_idem(&x.elem) };
        m.entry(k).or_default().push(x);
    }
    m
}

/// Near-chord sums used by the structure equations; exposed so tests can
/// mutate them.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    pub a_id: Vec<NearChord>,
    pub a_0: Vec<NearChord>,
    pub f_minus: Vec<NearChord>,
    pub f_plus: Vec<NearChord>,
}

impl StructureConstants {
    pub fn of(ca: &CurveAlgebra) -> Self {
        StructureConstants {
            a_id: ca.near_chords(Subalgebra::Diagonal),
            a_0: ca.near_chords(Subalgebra::AntiBraid),
            f_minus: ca.near_chords(Subalgebra::Morphism(Sign::Minus)),
            f_plus: ca.near_chords(Subalgebra::Morphism(Sign::Plus)),
        }
    }

    /// Check `dA_Id + A_Id² = 0`, `dA₀ + A₀² = 0`,
    /// `dF⁻ + A_Id·F⁻ + F⁻·A₀ = 0` and `dF⁺ + A₀·F⁺ + F⁺·A_Id = 0`.
    pub fn verify(&self, alg: &OuterAlgebra) -> StructureReport {
        let eq = |name: &str, x: &[NearChord], l: &[NearChord], r: &[NearChord]| EquationCheck {
            name: name.to_string(),
            uncancelled: residual(alg, x, l, r),
        };
        StructureReport {
            equations: vec![
                eq("dA_Id + A_Id·A_Id", &self.a_id, &self.a_id, &[]),
                eq("dA_0 + A_0·A_0", &self.a_0, &self.a_0, &[]),
                eq("dF- + A_Id·F- + F-·A_0", &self.f_minus, &self.a_id, &self.a_0),
                eq("dF+ + A_0·F+ + F+·A_Id", &self.f_plus, &self.a_0, &self.a_id),
            ],
        }
    }
}

/// Verify the four structure-constant equations for a curve.
pub fn verify_structure_constants(ca: &CurveAlgebra) -> StructureReport {
    StructureConstants::of(ca).verify(&ca.alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmc::linear_pmc;

    fn setup(genus: usize, n: usize) -> CurveAlgebra {
        let pmc = Arc::new(linear_pmc(genus).unwrap());
        let curve = pmc.curve(n).unwrap();
        CurveAlgebra::new(pmc, curve)
    }

    fn arrows(p: &DStructure<OuterAlgebra>, x: &str) -> Vec<String> {
        let i = p.find(x).unwrap();
        let mut v: Vec<String> = p.delta[i]
            .iter()
            .map(|(a, y)| format!("{} {}", p.alg.fmt_basis(a), p.gens[*y].name))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn torus_identity_bimodule() {
        let p = cfdd_identity(Arc::new(linear_pmc(1).unwrap()));
        assert_eq!(p.len(), 2);
        assert_eq!(arrows(&p, "J"), ["σ123⊗ρ123 K", "σ1⊗ρ3 K", "σ3⊗ρ1 K"]);
        assert_eq!(arrows(&p, "K"), ["σ2⊗ρ2 J"]);
        assert!(p.structure_check().ok());
    }

    #[test]
    fn torus_zero_surgery_and_morphism() {
        let ca = setup(1, 2);
        let y0 = Arc::new(cfdd_zero_surgery(&ca));
        assert_eq!(arrows(&y0, "I"), ["1⊗ρ12 I", "σ23⊗1 I"]);
        let id = Arc::new(cfdd_identity(ca.pmc.clone()));
        let f = skein_morphism(&ca, Sign::Plus, id, y0.clone());
        let mut v: Vec<String> = f.comp[0]
            .iter()
            .map(|(a, y)| format!("{} {}", f.target.alg.fmt_basis(a), f.target.gens[*y].name))
            .collect();
        v.sort();
        assert_eq!(v, ["1⊗ρ1 K", "σ2⊗1 J"]);
        assert!(f.is_cycle());
        let cone = cfdd_dehn_twist(&ca, Sign::Plus).unwrap();
        assert_eq!(cone.len(), 3);
        assert!(cone.structure_check().ok());
        assert_eq!(cone.gens[cone.find("I").unwrap()].label, 0);
        assert_eq!(cone.gens[cone.find("J").unwrap()].label, 1);
    }

    #[test]
    fn plat_modules() {
        let p = cfd_plat_mirrored(Arc::new(linear_pmc(1).unwrap()));
        let (a, _) = p.delta[0].iter().next().unwrap();
        assert_eq!(crate::strands::torus_name(a, "τ"), "τ23");
        for g in 1..=3 {
            let pmc = Arc::new(linear_pmc(g).unwrap());
            assert!(cfd_plat(pmc.clone()).structure_check().ok());
            assert!(cfd_plat_mirrored(pmc.clone()).structure_check().ok());
            assert_eq!(cfd_plat(pmc).delta[0].len(), g);
        }
    }

    #[test]
    fn structures_and_cones_genus_two() {
        for n in 1..=4 {
            let ca = setup(2, n);
            assert!(cfdd_zero_surgery(&ca).structure_check().ok());
            for sign in [Sign::Minus, Sign::Plus] {
                let cone = cfdd_dehn_twist(&ca, sign).unwrap();
                assert!(cone.structure_check().ok(), "curve {n} {sign:?}");
            }
        }
        assert_eq!(cfdd_zero_surgery(&setup(2, 3)).len(), 4);
        assert_eq!(cfdd_identity(Arc::new(linear_pmc(2).unwrap())).len(), 6);
    }

    #[test]
    fn structure_constants_hold_genus_one_to_three() {
        for g in 1..=3 {
            for n in 1..=2 * g {
                let ca = setup(g, n);
                let rep = verify_structure_constants(&ca);
                assert!(rep.ok(), "genus {g} curve {n}: {:?}", rep);
            }
        }
    }

    #[test]
    fn removing_any_near_chord_breaks_an_equation() {
        for n in 1..=4 {
            let ca = setup(2, n);
            let sc = StructureConstants::of(&ca);
            for which in 0..3 {
                let len = [sc.a_0.len(), sc.f_minus.len(), sc.f_plus.len()][which];
                for i in 0..len {
                    let mut m = sc.clone();
                    let v = [&mut m.a_0, &mut m.f_minus, &mut m.f_plus];
                    let removed = v.into_iter().nth(which).unwrap().remove(i);
                    assert!(!m.verify(&ca.alg).ok(), "curve {n}: removing {removed:?} went unnoticed");
                }
            }
        }
    }
}
