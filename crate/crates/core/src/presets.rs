//! The 21 built-in instances.

use crate::extraction::{SeConfig, SeMethod};
use crate::filtering::{PfConfig, PfMethod};
use crate::pipeline::InstanceConfig;
use crate::refinement::{PrMethod, RefineConfig};
use crate::scoring::{ScorerConfig, ScorerKind, STUB_ENDPOINT};

pub const PRESET_COUNT: u32 = 21;

pub const EMBEDDING_MODEL: &str = "all-MiniLM-L6-v2";
pub const RERANK_MODEL: &str = "bge-reranker-v2-m3";
pub const LLM_MODEL: &str = "Meta-Llama-3-8B-Instruct";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    Bm25,
    St,
    Reranker,
    StFt,
    Llm,
    LlmFt,
}

impl Model {
    fn short(self) -> &'static str {
        match self {
            Self::Bm25 => "BM25",
            Self::St => "ST",
            Self::Reranker => "Reranker",
            Self::StFt => "ST_FT",
            Self::Llm => "LLM",
            Self::LlmFt => "LLM_FT",
        }
    }

    fn long(self) -> &'static str {
        match self {
            Self::Bm25 => "BM25",
            Self::St => "Sentence-Transformers",
            Self::Reranker => "Rerank model",
            Self::StFt => "Fine-tuned Sentence-Transformers",
            Self::Llm => "Vanilla LLMs",
            Self::LlmFt => "Fine-tuned LLMs",
        }
    }

    fn scorer(self) -> ScorerConfig {
        let ft = |m: &str| format!("{m}-finetuned");
        match self {
            Self::Bm25 => ScorerConfig::bm25(),
            Self::St => ScorerConfig::remote(ScorerKind::Embedding, STUB_ENDPOINT, EMBEDDING_MODEL),
            Self::StFt => ScorerConfig::remote(ScorerKind::Embedding, STUB_ENDPOINT, &ft(EMBEDDING_MODEL)),
            Self::Reranker => ScorerConfig::remote(ScorerKind::Rerank, STUB_ENDPOINT, RERANK_MODEL),
            Self::Llm => ScorerConfig::remote(ScorerKind::Llm, STUB_ENDPOINT, LLM_MODEL),
            Self::LlmFt => ScorerConfig::remote(ScorerKind::Llm, STUB_ENDPOINT, &ft(LLM_MODEL)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Se {
    Ppr,
    Rwr,
    Scored(Model),
}

#[derive(Debug, Clone, Copy)]
enum Pf {
    Spf,
    Cpf,
    Beam(Model),
}

#[derive(Debug, Clone, Copy)]
enum Pr {
    Random,
    Scored(Model),
}

use Model::*;

const GRID: [(Se, Pf, Pr); PRESET_COUNT as usize] = [
    (Se::Ppr, Pf::Spf, Pr::Random),
    (Se::Rwr, Pf::Spf, Pr::Random),
    (Se::Scored(Bm25), Pf::Spf, Pr::Random),
    (Se::Scored(St), Pf::Spf, Pr::Random),
    (Se::Scored(Reranker), Pf::Spf, Pr::Random),
    (Se::Scored(StFt), Pf::Spf, Pr::Random),
    (Se::Scored(Llm), Pf::Spf, Pr::Random),
    (Se::Scored(LlmFt), Pf::Spf, Pr::Random),
    (Se::Ppr, Pf::Cpf, Pr::Random),
    (Se::Ppr, Pf::Beam(Bm25), Pr::Random),
    (Se::Ppr, Pf::Beam(St), Pr::Random),
    (Se::Ppr, Pf::Beam(Reranker), Pr::Random),
    (Se::Ppr, Pf::Beam(StFt), Pr::Random),
    (Se::Ppr, Pf::Beam(Llm), Pr::Random),
    (Se::Ppr, Pf::Beam(LlmFt), Pr::Random),
    (Se::Ppr, Pf::Spf, Pr::Scored(Bm25)),
    (Se::Ppr, Pf::Spf, Pr::Scored(St)),
    (Se::Ppr, Pf::Spf, Pr::Scored(Reranker)),
    (Se::Ppr, Pf::Spf, Pr::Scored(StFt)),
    (Se::Ppr, Pf::Spf, Pr::Scored(Llm)),
    (Se::Ppr, Pf::Spf, Pr::Scored(LlmFt)),
];

fn short_name(se: Se, pf: Pf, pr: Pr) -> String {
    let se = match se {
        Se::Ppr => "PPR".to_owned(),
        Se::Rwr => "RWR".to_owned(),
        Se::Scored(m) => format!("PPR&{}", m.short()),
    };
    let pf = match pf {
        Pf::Spf => "SPF".to_owned(),
        Pf::Cpf => "CPF".to_owned(),
        Pf::Beam(m) => format!("{}&BS", m.short()),
    };
    let pr = match pr {
        Pr::Random => "Random",
        Pr::Scored(m) => m.short(),
    };
    format!("{se} -> {pf} -> {pr}")
}

/// Column texts: subgraph extraction, path filtering, path refinement.
pub fn preset_description(id: u32) -> Option<[String; 3]> {
    let &(se, pf, pr) = GRID.get(id as usize)?;
    let se = match se {
        Se::Ppr => "Personalized PageRank".to_owned(),
        Se::Rwr => "RWR".to_owned(),
        Se::Scored(m) => format!("Personalized PageRank&{}", m.long()),
    };
    let pf = match pf {
        Pf::Spf => "Shortest Path-Filtering".to_owned(),
        Pf::Cpf => "Complete Path-Filtering".to_owned(),
        Pf::Beam(m) => format!("{}&Iterative Path-Filtering", m.long()),
    };
    let pr = match pr {
        Pr::Random => "Random".to_owned(),
        Pr::Scored(m) => m.long().to_owned(),
    };
    Some([se, pf, pr])
}

pub fn preset(id: u32) -> Option<InstanceConfig> {
    let &(se, pf, pr) = GRID.get(id as usize)?;
    let se_cfg = match se {
        Se::Ppr => SeConfig::new(SeMethod::Ppr),
        Se::Rwr => SeConfig::new(SeMethod::Rwr),
        Se::Scored(m) => SeConfig {
            scorer: Some(m.scorer()),
            ..SeConfig::new(SeMethod::PprScored)
        },
    };
    let pf_cfg = match pf {
        Pf::Spf => PfConfig::new(PfMethod::Spf),
        Pf::Cpf => PfConfig::new(PfMethod::Cpf),
        Pf::Beam(m) => PfConfig {
            scorer: Some(m.scorer()),
            ..PfConfig::new(PfMethod::Beam)
        },
    };
    let pr_cfg = match pr {
        Pr::Random => RefineConfig::new(PrMethod::Random),
        Pr::Scored(m) => RefineConfig {
            scorer: Some(m.scorer()),
            ..RefineConfig::new(PrMethod::Scored)
        },
    };
    Some(InstanceConfig {
        id,
        name: short_name(se, pf, pr),
        seed: 0,
        se: se_cfg,
        pf: pf_cfg,
        pr: pr_cfg,
    })
}

pub fn presets() -> Vec<InstanceConfig> {
    (0..PRESET_COUNT).filter_map(preset).collect()
}
