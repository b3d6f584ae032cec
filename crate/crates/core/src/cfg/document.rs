//! The JSON program document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{is_identifier, Block, Cfg, CfgError, LoopRef, Param, TOP_NAME};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramDoc {
    pub name: String,
    pub blocks: Vec<BlockDoc>,
    pub edges: Vec<(String, String)>,
    pub entry: String,
    pub exit: String,
    #[serde(default)]
    pub loop_bounds: BTreeMap<String, Param>,
    #[serde(default)]
    pub annotations: Vec<AnnotationDoc>,
    #[serde(default)]
    pub splits: Vec<SplitDoc>,
}

impl ProgramDoc {
    /// Replaces every symbolic parameter named in `values` by its integer.
    pub fn bind(&mut self, values: &BTreeMap<String, u64>) {
        let bind = |p: &mut Param| {
            if let Param::Sym(name) = p {
                if let Some(&v) = values.get(name.as_str()) {
                    *p = Param::Lit(v);
                }
            }
        };
        self.blocks.iter_mut().for_each(|b| bind(&mut b.wcet));
        self.loop_bounds.values_mut().for_each(bind);
        self.annotations.iter_mut().for_each(|a| bind(&mut a.max));
        for v in self.splits.iter_mut().flat_map(|s| s.variants.iter_mut()) {
            bind(&mut v.wcet);
            if let Some(a) = v.annotation.as_mut() {
                bind(&mut a.max);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub id: String,
    pub wcet: Param,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationDoc {
    pub target: String,
    #[serde(rename = "loop")]
    pub loop_: String,
    pub max: Param,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitDoc {
    pub block: String,
    pub variants: Vec<VariantDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantDoc {
    pub id: String,
    pub wcet: Param,
    pub annotation: Option<VariantAnnotationDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantAnnotationDoc {
    #[serde(rename = "loop")]
    pub loop_: String,
    pub max: Param,
}

/// Context annotation requested by a document. `target` is either a leaf
/// label (`b4`, `b4#1`, a split variant id) or a child-index path such as
/// `/0/1/1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationSpec {
    pub target: String,
    pub loop_ref: LoopRef,
    pub max: Param,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantSpec {
    pub id: String,
    pub wcet: Param,
    pub annotation: Option<(LoopRef, Param)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub block: String,
    pub variants: Vec<VariantSpec>,
}

/// A parsed and validated program document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub cfg: Cfg,
    pub loop_bounds: BTreeMap<String, Param>,
    pub annotations: Vec<AnnotationSpec>,
    pub splits: Vec<SplitSpec>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Cfg(#[from] CfgError),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("loop bound for `{0}` must be at least 1")]
    ZeroBound(String),
    #[error("invalid loop reference `{0}`")]
    InvalidLoop(String),
    #[error("split of `{0}` has no variants")]
    EmptySplit(String),
}

fn check_param(p: &Param) -> Result<(), DocumentError> {
    match p {
        Param::Sym(s) if !is_identifier(s) => Err(DocumentError::InvalidIdentifier(s.clone())),
        _ => Ok(()),
    }
}

fn loop_ref(s: &str) -> Result<LoopRef, DocumentError> {
    if s == TOP_NAME {
        return Ok(LoopRef::Top);
    }
    match s.parse::<LoopRef>() {
        Ok(l @ LoopRef::Loop(_)) => Ok(l),
        _ => Err(DocumentError::InvalidLoop(s.to_string())),
    }
}

fn loop_name(l: &LoopRef) -> String {
    l.to_string()
}

impl Program {
    pub fn from_doc(doc: ProgramDoc) -> Result<Self, DocumentError> {
        let blocks = doc
            .blocks
            .into_iter()
            .map(|b| {
                check_param(&b.wcet).map(|()| Block {
                    id: b.id,
                    wcet: b.wcet,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if blocks.is_empty() {
            return Err(CfgError::NoEntry.into());
        }
        let cfg = Cfg::new(blocks, &doc.edges, &doc.entry, &doc.exit)?;

        for (h, bound) in &doc.loop_bounds {
            if cfg.index_of(h).is_none() {
                return Err(CfgError::UnknownBlock(h.clone()).into());
            }
            check_param(bound)?;
            if bound.literal() == Some(0) {
                return Err(DocumentError::ZeroBound(h.clone()));
            }
        }
        let annotations = doc
            .annotations
            .into_iter()
            .map(|a| {
                check_param(&a.max)?;
                Ok(AnnotationSpec {
                    target: a.target,
                    loop_ref: loop_ref(&a.loop_)?,
                    max: a.max,
                })
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        let splits = doc
            .splits
            .into_iter()
            .map(|s| {
                if cfg.index_of(&s.block).is_none() {
                    return Err(CfgError::UnknownBlock(s.block.clone()).into());
                }
                if s.variants.is_empty() {
                    return Err(DocumentError::EmptySplit(s.block));
                }
                let variants = s
                    .variants
                    .into_iter()
                    .map(|v| {
                        check_param(&v.wcet)?;
                        let annotation = match v.annotation {
                            None => None,
                            Some(a) => {
                                check_param(&a.max)?;
                                Some((loop_ref(&a.loop_)?, a.max))
                            }
                        };
                        Ok(VariantSpec {
                            id: v.id,
                            wcet: v.wcet,
                            annotation,
                        })
                    })
                    .collect::<Result<Vec<_>, DocumentError>>()?;
                Ok(SplitSpec {
                    block: s.block,
                    variants,
                })
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;

        Ok(Program {
            name: doc.name,
            cfg,
            loop_bounds: doc.loop_bounds,
            annotations,
            splits,
        })
    }

    pub fn to_doc(&self) -> ProgramDoc {
        let g = &self.cfg;
        ProgramDoc {
            name: self.name.clone(),
            blocks: g
                .blocks()
                .iter()
                .map(|b| BlockDoc {
                    id: b.id.clone(),
                    wcet: b.wcet.clone(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|&(u, v)| (g.id(u).to_string(), g.id(v).to_string()))
                .collect(),
            entry: g.id(g.entry()).to_string(),
            exit: g.id(g.exit()).to_string(),
            loop_bounds: self.loop_bounds.clone(),
            annotations: self
                .annotations
                .iter()
                .map(|a| AnnotationDoc {
                    target: a.target.clone(),
                    loop_: loop_name(&a.loop_ref),
                    max: a.max.clone(),
                })
                .collect(),
            splits: self
                .splits
                .iter()
                .map(|s| SplitDoc {
                    block: s.block.clone(),
                    variants: s
                        .variants
                        .iter()
                        .map(|v| VariantDoc {
                            id: v.id.clone(),
                            wcet: v.wcet.clone(),
                            annotation: v.annotation.as_ref().map(|(l, m)| VariantAnnotationDoc {
                                loop_: loop_name(l),
                                max: m.clone(),
                            }),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, DocumentError> {
    let doc: ProgramDoc = serde_json::from_str(text)?;
    Program::from_doc(doc)
}

pub fn serialize_program(p: &Program) -> String {
    serde_json::to_string_pretty(&p.to_doc()).expect("program documents always serialize")
}
