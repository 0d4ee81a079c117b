//! Braid parsing, the end-to-end computation for a plat closure, and its
//! report.
//!
//! The pipeline works right to left.  Starting from the plat type D
//! structure over `A(Z')`, each crossing's Dehn twist cone is turned into a
//! DA bimodule by tensoring with the identity AA bimodule and immediately
//! tensored onto the running type D structure, which is then reduced.  The
//! plat type A module closes everything up into a cube-filtered chain
//! complex, whose spectral sequence is reported.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::bordered::{cfd_plat, cfd_plat_mirrored, cfdd_dehn_twist, cfdd_identity, mor_dd_to_alg, CurveAlgebra, Sign};
use crate::homalg::{ChainComplex, HomalgError};
use crate::khovanov::{reduced_kh, DiagramError, Generator, KhRanks, PlatDiagram};
use crate::pmc::{Pmc, PmcError};
use crate::sscube::{pages, vertex_ranks, weight_filtration, SpectralSequence, SsError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("malformed braid token {0:?}; expected s<i> or s<i>^-1")]
    BadToken(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Pmc(#[from] PmcError),
    #[error(transparent)]
    Homalg(#[from] HomalgError),
    #[error(transparent)]
    SpectralSequence(#[from] SsError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("cannot write stage dump: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Whether the error is caused by bad input (as opposed to a broken
    /// internal invariant).
    pub fn is_validation(&self) -> bool {
        matches!(self, PipelineError::BadToken(_) | PipelineError::Diagram(_))
    }
}

/// Parse a braid word such as `"s2 s2^-1 s1"` on `strands` strands.
pub fn parse_braid(text: &str, strands: usize) -> Result<PlatDiagram, PipelineError> {
    let mut word = Vec::new();
    for tok in text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        let bad = || PipelineError::BadToken(tok.to_string());
        let body = tok.strip_prefix('s').or_else(|| tok.strip_prefix('σ')).ok_or_else(bad)?;
        let (num, positive) = match body.split_once('^') {
            Some((n, "-1")) => (n, false),
            Some((n, "1")) => (n, true),
            Some(_) => return Err(bad()),
            None => (body, true),
        };
        let index: usize = num.parse().map_err(|_| bad())?;
        word.push(Generator { index, positive });
    }
    Ok(PlatDiagram::new(strands, word)?)
}

/// Which weight grading of reduced Khovanov homology the second page is
/// compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MirrorConvention {
    /// Weight `w` of the cube of resolutions.
    Direct,
    /// Weight `c - w` (the mirror diagram).
    Reversed,
}

/// The convention fixed once for the whole corpus: the bordered cube and the
/// Khovanov cube use the same resolution at the same vertex, so the weights
/// agree directly.
pub const MIRROR_CONVENTION: MirrorConvention = MirrorConvention::Direct;

/// Khovanov ranks in the frozen convention.
pub fn oracle_ranks(d: &PlatDiagram) -> KhRanks {
    let kh = reduced_kh(d);
    match MIRROR_CONVENTION {
        MirrorConvention::Direct => kh,
        MirrorConvention::Reversed => kh.reversed(d.crossings()),
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub reduce: bool,
    pub oracle: bool,
    pub dump_stage: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            reduce: true,
            oracle: false,
            dump_stage: None,
        }
    }
}

/// Size and timing of one pipeline stage.
#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub generators: usize,
    pub terms: usize,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub convention: MirrorConvention,
    pub reduced_kh: BTreeMap<usize, usize>,
    pub e2: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub strands: usize,
    pub braid: String,
    pub genus: usize,
    pub crossings: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub input: InputEcho,
    pub stages: Vec<StageReport>,
    pub e0_by_vertex: BTreeMap<String, usize>,
    pub e1_by_vertex: BTreeMap<String, usize>,
    pub spectral_sequence: SpectralSequence,
    pub homology_rank: usize,
    pub verdict: Verdict,
    pub oracle: Option<OracleReport>,
    #[serde(skip)]
    pub complex: ChainComplex,
}

fn word_text(d: &PlatDiagram) -> String {
    d.word
        .iter()
        .map(|g| if g.positive { format!("s{}", g.index) } else { format!("s{}^-1", g.index) })
        .collect::<Vec<_>>()
        .join(" ")
}

struct Stages {
    list: Vec<StageReport>,
    clock: Instant,
    dump: Option<PathBuf>,
}

impl Stages {
    fn record(&mut self, stage: String, generators: usize, terms: usize, json: impl FnOnce() -> serde_json::Value) -> Result<(), PipelineError> {
        if let Some(dir) = &self.dump {
            std::fs::create_dir_all(dir)?;
            let name = format!("{:02}-{}.json", self.list.len(), stage.replace([' ', '/'], "_"));
            std::fs::write(dir.join(name), serde_json::to_string_pretty(&json()).expect("serializable"))?;
        }
        self.list.push(StageReport {
            stage,
            generators,
            terms,
            seconds: self.clock.elapsed().as_secs_f64(),
        });
        self.clock = Instant::now();
        Ok(())
    }
}

/// Run the whole computation for a plat closure.
pub fn run_pipeline(d: &PlatDiagram, options: &PipelineOptions) -> Result<PipelineReport, PipelineError> {
    let genus = d.strands / 2 - 1;
    let m = d.crossings();
    let pmc = Arc::new(Pmc::linear(genus)?);
    let mut stages = Stages {
        list: Vec::new(),
        clock: Instant::now(),
        dump: options.dump_stage.clone(),
    };
    stages.record("slice".into(), m, 0, || serde_json::json!({"braid": word_text(d)}))?;

    // Dehn twist cones, one per crossing.
    let mut cones = Vec::with_capacity(m);
    for (k, g) in d.word.iter().enumerate() {
        let ca = CurveAlgebra::new(pmc.clone(), pmc.curve(g.index)?);
        let sign = if g.positive { Sign::Plus } else { Sign::Minus };
        let cone = cfdd_dehn_twist(&ca, sign)?;
        cone.structure_check()
            .into_result()
            .map_err(|e| PipelineError::Invariant(format!("cone {}: {e}", k + 1)))?;
        stages.record(format!("cone {}", k + 1), cone.len(), cone.num_terms(), || cone.to_json())?;
        cones.push(cone);
    }

    let mor = mor_dd_to_alg(Arc::new(cfdd_identity(pmc.clone())));
    stages.record("identity AA".into(), mor.len(), 0, || serde_json::json!({"generators": mor.len()}))?;

    let plat_bottom = {
        let mut p = cfd_plat_mirrored(pmc.clone());
        p.label_dim = m;
        p
    };
    let plat_top = cfd_plat(pmc.clone());
    stages.record("plats".into(), 2, plat_top.num_terms() + plat_bottom.num_terms(), || {
        serde_json::json!({"top": plat_top.to_json(), "bottom": plat_bottom.to_json()})
    })?;

    let mut p = plat_bottom;
    for k in (0..m).rev() {
        let mut next = mor.box_dd_d(&cones[k], &p, k, m);
        if options.reduce {
            next = next.reduce(true);
        }
        if !next.structure_check().ok() {
            return Err(PipelineError::Invariant(format!("tensor stage {} is not a type D structure", k + 1)));
        }
        stages.record(format!("tensor {}", k + 1), next.len(), next.num_terms(), || next.to_json())?;
        p = next;
    }

    let mut complex = mor.box_d_d(&plat_top, &p);
    if options.reduce {
        complex = complex.reduce(true);
    }
    complex.check_d_squared()?;
    if !complex.is_filtered() {
        return Err(PipelineError::Invariant("final complex is not cube filtered".into()));
    }
    stages.record("final".into(), complex.len(), complex.num_arrows(), || complex.to_json())?;

    let ss = pages(&weight_filtration(&complex))?;
    let homology_rank = complex.homology_rank();
    if homology_rank != ss.e_infty_total {
        return Err(PipelineError::Invariant(format!(
            "E_∞ total {} differs from homology rank {homology_rank}",
            ss.e_infty_total
        )));
    }
    let (e0, e1) = vertex_ranks(&complex);
    stages.record("pages".into(), ss.pages.len(), 0, || serde_json::to_value(&ss).expect("serializable"))?;

    let (verdict, oracle) = if options.oracle {
        let kh = oracle_ranks(d);
        let e2 = ss.page(2).ranks.clone();
        let verdict = if kh.by_weight == e2 { Verdict::Pass } else { Verdict::Fail };
        (
            verdict,
            Some(OracleReport {
                convention: MIRROR_CONVENTION,
                reduced_kh: kh.by_weight,
                e2,
            }),
        )
    } else {
        (Verdict::Skipped, None)
    };

    Ok(PipelineReport {
        schema_version: SCHEMA_VERSION,
        input: InputEcho {
            strands: d.strands,
            braid: word_text(d),
            genus,
            crossings: m,
        },
        stages: stages.list,
        e0_by_vertex: e0,
        e1_by_vertex: e1,
        spectral_sequence: ss,
        homology_rank,
        verdict,
        oracle,
        complex,
    })
}

impl PipelineReport {
    /// Human-readable summary with page grids for up to three crossings.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "braid: {} on {} strands (genus {})\n",
            if self.input.braid.is_empty() { "(empty)" } else { &self.input.braid },
            self.input.strands,
            self.input.genus
        );
        for s in &self.stages {
            out.push_str(&format!(
                "  {:<14} {:>8} generators {:>8} terms {:>9.3}s\n",
                s.stage, s.generators, s.terms, s.seconds
            ));
        }
        let n = self.input.crossings;
        if n <= 3 {
            out.push_str("E0 by vertex:\n");
            out.push_str(&crate::sscube::render_grid(&self.e0_by_vertex, n));
            out.push_str("E1 by vertex:\n");
            out.push_str(&crate::sscube::render_grid(&self.e1_by_vertex, n));
        }
        for page in &self.spectral_sequence.pages {
            out.push_str(&format!("E{} by weight: {:?}\n", page.r, page.ranks));
        }
        out.push_str(&format!(
            "collapse page: {}\nE∞ total: {}\n",
            self.spectral_sequence.collapse_page, self.spectral_sequence.e_infty_total
        ));
        if let Some(o) = &self.oracle {
            out.push_str(&format!("reduced Kh by weight: {:?}\noracle: {:?}\n", o.reduced_kh, self.verdict));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        let d = parse_braid("s2 s2", 4).unwrap();
        assert_eq!(d.word.len(), 2);
        assert!(parse_braid("", 4).unwrap().word.is_empty());
        assert!(matches!(
            parse_braid("s3", 4),
            Err(PipelineError::Diagram(DiagramError::LastStrand { .. }))
        ));
        assert_eq!(parse_braid("s1^-1", 4).unwrap().word[0], Generator { index: 1, positive: false });
        assert!(matches!(parse_braid("t1", 4), Err(PipelineError::BadToken(_))));
        assert!(parse_braid("s2", 5).is_err());
    }

    #[test]
    fn hopf_end_to_end() {
        let d = parse_braid("s2 s2", 4).unwrap();
        let r = run_pipeline(&d, &PipelineOptions::default()).unwrap();
        println!("{}", r.to_text());
        assert_eq!(r.spectral_sequence.e_infty_total, 2);
        assert_eq!(
            r.e1_by_vertex,
            BTreeMap::from([("00".into(), 2), ("01".into(), 1), ("10".into(), 1), ("11".into(), 2)])
        );
        assert_eq!(r.spectral_sequence.page(2).ranks, BTreeMap::from([(0, 1), (1, 0), (2, 1)]));
        assert_eq!(r.spectral_sequence.collapse_page, 2);
    }

    #[test]
    fn unknot_and_unlink() {
        for (word, total) in [("s2", 1), ("s2^-1", 1), ("", 2), ("s1", 2), ("s1 s2", 1)] {
            let r = run_pipeline(&parse_braid(word, 4).unwrap(), &PipelineOptions::default()).unwrap();
            assert_eq!(r.spectral_sequence.e_infty_total, total, "{word:?}");
        }
    }
}
