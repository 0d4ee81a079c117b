//! Property-based checks of algebraic invariants.

use std::sync::Arc;

use proptest::prelude::*;

use bordered_cube::cli::{oracle_ranks, run_pipeline, PipelineOptions};
use bordered_cube::homalg::ChainComplex;
use bordered_cube::khovanov::{khovanov_complex, reduced_kh, unreduced_kh, Generator, PlatDiagram};
use bordered_cube::pmc::Pmc;
use bordered_cube::sscube::{pages, weight_filtration};
use bordered_cube::strands::{basis, StrandsAlgebra, Strands};

fn diagram(strands: usize, max_len: usize) -> impl Strategy<Value = PlatDiagram> {
    prop::collection::vec((1..strands - 1, any::<bool>()), 0..=max_len).prop_map(move |w| {
        let word = w.into_iter().map(|(index, positive)| Generator { index, positive }).collect();
        PlatDiagram::new(strands, word).unwrap()
    })
}

fn permuted(c: &ChainComplex, perm: &[usize]) -> ChainComplex {
    let n = c.len();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    ChainComplex::new(
        perm.iter().map(|&o| c.names[o].clone()).collect(),
        perm.iter().map(|&o| c.labels[o]).collect(),
        c.label_dim,
        perm.iter().map(|&o| c.d[o].iter().map(|&t| inv[t]).collect()).collect(),
    )
}

fn sum_mod2(mut v: Vec<Strands>) -> Vec<Strands> {
    v.sort();
    let mut out: Vec<Strands> = Vec::new();
    for s in v {
        if out.last() == Some(&s) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

fn genus_two() -> (StrandsAlgebra, Vec<Strands>) {
    let pmc = Pmc::linear(2).unwrap();
    let b = basis(&pmc, 2);
    (StrandsAlgebra::new(Arc::new(pmc)), b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strands_product_is_associative(i in 0usize..10_000, j in 0usize..10_000, k in 0usize..10_000) {
        let (alg, b) = genus_two();
        let (x, y, z) = (b[i % b.len()], b[j % b.len()], b[k % b.len()]);
        let left = alg.mul(&x, &y).and_then(|xy| alg.mul(&xy, &z));
        let right = alg.mul(&y, &z).and_then(|yz| alg.mul(&x, &yz));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn strands_differential_squares_to_zero_and_is_a_derivation(i in 0usize..10_000, j in 0usize..10_000) {
        let (alg, b) = genus_two();
        let (x, y) = (b[i % b.len()], b[j % b.len()]);
        let dd = sum_mod2(alg.d(&x).iter().flat_map(|t| alg.d(t)).collect());
        prop_assert!(dd.is_empty());
        let lhs = sum_mod2(alg.mul(&x, &y).map(|xy| alg.d(&xy)).unwrap_or_default());
        let mut rhs: Vec<Strands> = alg.d(&x).iter().filter_map(|dx| alg.mul(dx, &y)).collect();
        rhs.extend(alg.d(&y).iter().filter_map(|dy| alg.mul(&x, dy)));
        prop_assert_eq!(lhs, sum_mod2(rhs));
    }

    #[test]
    fn unreduced_khovanov_is_twice_reduced(d in diagram(6, 4)) {
        prop_assert_eq!(unreduced_kh(&d).total, 2 * reduced_kh(&d).total);
    }

    #[test]
    fn inserting_a_cancelling_pair_preserves_khovanov(d in diagram(6, 3), at in 0usize..4, index in 1usize..5) {
        let mut word = d.word.clone();
        let at = at.min(word.len());
        word.insert(at, Generator { index, positive: false });
        word.insert(at, Generator { index, positive: true });
        let longer = PlatDiagram::new(6, word).unwrap();
        prop_assert_eq!(reduced_kh(&longer).total, reduced_kh(&d).total);
    }

    #[test]
    fn spectral_sequence_abuts_to_homology_and_ignores_basis_order(
        d in diagram(6, 4),
        seed in any::<u64>(),
    ) {
        let c = khovanov_complex(&d, true);
        let ss = pages(&weight_filtration(&c)).unwrap();
        prop_assert_eq!(ss.e_infty_total, c.homology_rank());
        for r in 1..ss.pages.len() {
            prop_assert!(ss.pages[r].total() <= ss.pages[r - 1].total());
        }
        let mut perm: Vec<usize> = (0..c.len()).collect();
        let mut state = seed | 1;
        for i in (1..perm.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let again = pages(&weight_filtration(&permuted(&c, &perm))).unwrap();
        prop_assert_eq!(again, ss);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn second_page_matches_khovanov(d in diagram(6, 4)) {
        let report = run_pipeline(&d, &PipelineOptions::default()).unwrap();
        let e2: Vec<(usize, usize)> =
            report.spectral_sequence.page(2).ranks.iter().filter(|r| *r.1 > 0).map(|(w, r)| (*w, *r)).collect();
        let kh: Vec<(usize, usize)> =
            oracle_ranks(&d).by_weight.iter().filter(|r| *r.1 > 0).map(|(w, r)| (*w, *r)).collect();
        prop_assert_eq!(e2, kh);
        prop_assert_eq!(report.spectral_sequence.e_infty_total, report.homology_rank);
    }

    #[test]
    fn floer_rank_is_invariant_under_cancelling_pairs(d in diagram(4, 2), at in 0usize..3, index in 1usize..3) {
        let mut word = d.word.clone();
        let at = at.min(word.len());
        word.insert(at, Generator { index, positive: false });
        word.insert(at, Generator { index, positive: true });
        let longer = PlatDiagram::new(4, word).unwrap();
        let a = run_pipeline(&d, &PipelineOptions::default()).unwrap();
        let b = run_pipeline(&longer, &PipelineOptions::default()).unwrap();
        prop_assert_eq!(a.spectral_sequence.e_infty_total, b.spectral_sequence.e_infty_total);
    }
}
