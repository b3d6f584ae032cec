//! Control-flow trees and context annotations.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cfg::{is_block_id, LoopRef, Param, VariantSpec};

/// A context annotation `(l, m)`: the annotated subtree executes at most
/// `m` times per entry of loop `l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Annotation {
    #[serde(rename = "loop")]
    pub loop_ref: LoopRef,
    pub max: Param,
}

impl Annotation {
    pub fn new(loop_ref: LoopRef, max: impl Into<Param>) -> Self {
        Annotation {
            loop_ref,
            max: max.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Leaf {
    /// Unique within a tree. Duplicated blocks carry a `#k` suffix.
    pub label: String,
    /// The CFG block this leaf stands for.
    pub block: String,
    pub wcet: Param,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf(Leaf),
    Alt {
        children: Vec<Cft>,
    },
    Seq {
        children: Vec<Cft>,
    },
    Loop {
        header: String,
        body: Box<Cft>,
        bound: Param,
        exit: Box<Cft>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cft {
    #[serde(flatten)]
    pub node: Node,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ann: Option<Annotation>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CftError {
    #[error("no node matches target `{0}`")]
    UnknownTarget(String),
    #[error("no leaf for block `{0}`")]
    UnknownBlock(String),
    #[error("target `{target}` is ambiguous: {}", candidates.join(", "))]
    AmbiguousTarget {
        target: String,
        candidates: Vec<String>,
    },
    #[error("loop {loop_ref} does not enclose target `{target}`")]
    NonAncestorLoop { target: String, loop_ref: LoopRef },
    #[error("variant id `{0}` is already in use")]
    DuplicateVariantId(String),
    #[error("invalid leaf label `{0}`")]
    InvalidLabel(String),
    #[error("malformed node path `{0}`")]
    BadPath(String),
}

/// Strips the `#k` suffix given to duplicated leaves.
pub fn base_label(label: &str) -> &str {
    label.split_once('#').map_or(label, |(b, _)| b)
}

impl Cft {
    fn plain(node: Node) -> Self {
        Cft { node, ann: None }
    }

    pub fn leaf(
        label: impl Into<String>,
        block: impl Into<String>,
        wcet: impl Into<Param>,
    ) -> Self {
        Self::plain(Node::Leaf(Leaf {
            label: label.into(),
            block: block.into(),
            wcet: wcet.into(),
        }))
    }

    /// A leaf whose label is its block id.
    pub fn block(id: &str, wcet: impl Into<Param>) -> Self {
        Self::leaf(id, id, wcet)
    }

    /// Alternative; a single child is returned as is.
    pub fn alt(mut children: Vec<Cft>) -> Self {
        if children.len() == 1 {
            return children.pop().unwrap();
        }
        Self::plain(Node::Alt { children })
    }

    /// Sequence; a single child is returned as is and no children is the
    /// empty path.
    pub fn seq(mut children: Vec<Cft>) -> Self {
        if children.len() == 1 {
            return children.pop().unwrap();
        }
        Self::plain(Node::Seq { children })
    }

    pub fn empty() -> Self {
        Self::plain(Node::Seq {
            children: Vec::new(),
        })
    }

    pub fn is_empty_path(&self) -> bool {
        matches!(&self.node, Node::Seq { children } if children.is_empty())
    }

    pub fn looped(
        header: impl Into<String>,
        body: Cft,
        bound: impl Into<Param>,
        exit: Cft,
    ) -> Self {
        Self::plain(Node::Loop {
            header: header.into(),
            body: Box::new(body),
            bound: bound.into(),
            exit: Box::new(exit),
        })
    }

    pub fn with_annotation(mut self, ann: Annotation) -> Self {
        self.ann = Some(ann);
        self
    }

    /// Children in path order; a loop's body is child 0 and its exit child 1.
    pub fn children(&self) -> Vec<&Cft> {
        match &self.node {
            Node::Leaf(_) => vec![],
            Node::Alt { children } | Node::Seq { children } => children.iter().collect(),
            Node::Loop { body, exit, .. } => vec![body, exit],
        }
    }

    fn child_mut(&mut self, i: usize) -> Option<&mut Cft> {
        match &mut self.node {
            Node::Leaf(_) => None,
            Node::Alt { children } | Node::Seq { children } => children.get_mut(i),
            Node::Loop { body, exit, .. } => match i {
                0 => Some(body),
                1 => Some(exit),
                _ => None,
            },
        }
    }

    pub fn get(&self, path: &[usize]) -> Option<&Cft> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn get_mut(&mut self, path: &[usize]) -> Option<&mut Cft> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i)?;
        }
        Some(cur)
    }

    /// Pre-order traversal with node paths.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&[usize], &'a Cft)) {
        fn go<'a>(t: &'a Cft, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize], &'a Cft)) {
            f(path, t);
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.walk(&mut |_, t| {
            if let Node::Leaf(l) = &t.node {
                out.push(l);
            }
        });
        out
    }

    pub fn labels(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .map(|l| l.label.as_str())
            .collect()
    }

    /// Leaf label → CFG block.
    pub fn rename_map(&self) -> BTreeMap<String, String> {
        self.leaves()
            .into_iter()
            .map(|l| (l.label.clone(), l.block.clone()))
            .collect()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_, _| n += 1);
        n
    }

    /// All annotations in the subtree (including its own), with their paths.
    pub fn annotations(&self) -> Vec<(Vec<usize>, &Annotation)> {
        let mut out = Vec::new();
        self.walk(&mut |p, t| {
            if let Some(a) = &t.ann {
                out.push((p.to_vec(), a));
            }
        });
        out
    }

    /// Headers of loop nodes that enclose `path` through their body.
    pub fn enclosing_loops(&self, path: &[usize]) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self;
        for &i in path {
            if let Node::Loop { header, .. } = &cur.node {
                if i == 0 {
                    out.push(header.as_str());
                }
            }
            match cur.children().get(i) {
                Some(c) => cur = c,
                None => break,
            }
        }
        out
    }

    /// Resolves a target: a `/i/j` path, a leaf label, or a block id that
    /// names exactly one leaf.
    pub fn resolve(&self, target: &str) -> Result<Vec<usize>, CftError> {
        if let Some(rest) = target.strip_prefix('/') {
            let path = if rest.is_empty() {
                Vec::new()
            } else {
                rest.split('/')
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| CftError::BadPath(target.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            return match self.get(&path) {
                Some(_) => Ok(path),
                None => Err(CftError::UnknownTarget(target.to_string())),
            };
        }
        let mut by_label = None;
        let mut by_block = Vec::new();
        self.walk(&mut |p, t| {
            if let Node::Leaf(l) = &t.node {
                if l.label == target {
                    by_label = Some(p.to_vec());
                } else if l.block == target {
                    by_block.push((p.to_vec(), l.label.clone()));
                }
            }
        });
        if let Some(p) = by_label {
            let has_copies = by_block
                .iter()
                .any(|(_, label)| base_label(label) == target);
            if !has_copies || base_label(target) != target {
                return Ok(p);
            }
            let mut candidates = vec![target.to_string()];
            candidates.extend(by_block.into_iter().map(|(_, l)| l));
            return Err(CftError::AmbiguousTarget {
                target: target.to_string(),
                candidates,
            });
        }
        match by_block.len() {
            0 => Err(CftError::UnknownTarget(target.to_string())),
            1 => Ok(by_block.pop().unwrap().0),
            _ => Err(CftError::AmbiguousTarget {
                target: target.to_string(),
                candidates: by_block.into_iter().map(|(_, l)| l).collect(),
            }),
        }
    }

    /// Sets the annotation of the node at `path`, replacing any prior one.
    pub fn annotate_path(&mut self, path: &[usize], ann: Annotation) -> Result<(), CftError> {
        let shown = path_string(path);
        match &ann.loop_ref {
            LoopRef::Top => {}
            LoopRef::Loop(h) if self.enclosing_loops(path).contains(&h.as_str()) => {}
            l => {
                return Err(CftError::NonAncestorLoop {
                    target: shown,
                    loop_ref: l.clone(),
                })
            }
        }
        let node = self.get_mut(path).ok_or(CftError::UnknownTarget(shown))?;
        node.ann = Some(ann);
        Ok(())
    }

    /// Replaces the leaf at `target` by an alternative over its variants.
    ///
    /// Every variant keeps the original block; labels are the variant ids.
    pub fn split_leaf(&mut self, target: &str, variants: &[VariantSpec]) -> Result<(), CftError> {
        let path = match self.resolve(target) {
            Ok(p) => p,
            Err(CftError::UnknownTarget(t)) => return Err(CftError::UnknownBlock(t)),
            Err(e) => return Err(e),
        };
        let Some(Cft {
            node: Node::Leaf(leaf),
            ann,
        }) = self.get(&path).cloned()
        else {
            return Err(CftError::UnknownBlock(target.to_string()));
        };
        let mut taken: HashSet<String> = self
            .labels()
            .into_iter()
            .filter(|l| *l != leaf.label)
            .map(str::to_string)
            .collect();
        for v in variants {
            if !is_block_id(&v.id) {
                return Err(CftError::InvalidLabel(v.id.clone()));
            }
            if !taken.insert(v.id.clone()) {
                return Err(CftError::DuplicateVariantId(v.id.clone()));
            }
        }
        if variants.is_empty() {
            return Ok(());
        }
        let variant_ann =
            |v: &VariantSpec| v.annotation.clone().map(|(l, m)| Annotation::new(l, m));
        let leaf_of = |v: &VariantSpec| Cft::leaf(v.id.clone(), leaf.block.clone(), v.wcet.clone());
        if let [v] = variants {
            *self.get_mut(&path).unwrap() = leaf_of(v);
            if let Some(a) = variant_ann(v).or(ann) {
                self.annotate_path(&path, a)?;
            }
            return Ok(());
        }
        let mut replacement = Cft::alt(variants.iter().map(leaf_of).collect());
        replacement.ann = ann;
        *self.get_mut(&path).unwrap() = replacement;
        for (i, v) in variants.iter().enumerate() {
            if let Some(a) = variant_ann(v) {
                let mut p = path.clone();
                p.push(i);
                self.annotate_path(&p, a)?;
            }
        }
        Ok(())
    }

    /// Writes the tree as an S-expression; leaf labels lose their `#k`
    /// suffix and annotations appear as `(@ node loop max)`.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s, false);
        s
    }

    /// Like [`Cft::to_sexpr`] but keeps full leaf labels.
    pub fn to_sexpr_labels(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s, true);
        s
    }

    fn write_sexpr(&self, out: &mut String, full: bool) {
        use std::fmt::Write;
        if self.ann.is_some() {
            out.push_str("(@ ");
        }
        match &self.node {
            Node::Leaf(l) => out.push_str(if full { &l.label } else { base_label(&l.label) }),
            Node::Alt { children } | Node::Seq { children } => {
                out.push_str(if matches!(self.node, Node::Alt { .. }) {
                    "(alt"
                } else {
                    "(seq"
                });
                for c in children {
                    out.push(' ');
                    c.write_sexpr(out, full);
                }
                out.push(')');
            }
            Node::Loop {
                header,
                body,
                bound,
                exit,
            } => {
                write!(out, "(loop {header} ").unwrap();
                body.write_sexpr(out, full);
                write!(out, " {bound} ").unwrap();
                exit.write_sexpr(out, full);
                out.push(')');
            }
        }
        if let Some(a) = &self.ann {
            write!(out, " {} {})", a.loop_ref, a.max).unwrap();
        }
    }
}

impl fmt::Display for Cft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

pub fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        return "/".to_string();
    }
    path.iter().map(|i| format!("/{i}")).collect()
}

/// Attaches `ann` to the node named by `target` (see [`Cft::resolve`]).
pub fn attach_annotation(mut t: Cft, target: &str, ann: Annotation) -> Result<Cft, CftError> {
    let path = t.resolve(target)?;
    t.annotate_path(&path, ann).map_err(|e| match e {
        CftError::NonAncestorLoop { loop_ref, .. } => CftError::NonAncestorLoop {
            target: target.to_string(),
            loop_ref,
        },
        e => e,
    })?;
    Ok(t)
}

/// Replaces a leaf by an alternative over `variants`.
pub fn split_leaf(mut t: Cft, block: &str, variants: &[VariantSpec]) -> Result<Cft, CftError> {
    t.split_leaf(block, variants)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inner_loop() -> Cft {
        Cft::looped(
            "b2",
            Cft::seq(vec![Cft::block("b2", 1), Cft::block("b4", 1)]),
            "x",
            Cft::leaf("b2#1", "b2", 1),
        )
    }

    fn variant(id: &str, w: u64, ann: Option<(LoopRef, u64)>) -> VariantSpec {
        VariantSpec {
            id: id.into(),
            wcet: w.into(),
            annotation: ann.map(|(l, m)| (l, m.into())),
        }
    }

    #[test]
    fn sexpr() {
        assert_eq!(inner_loop().to_string(), "(loop b2 (seq b2 b4) x b2)");
        assert_eq!(
            inner_loop().to_sexpr_labels(),
            "(loop b2 (seq b2 b4) x b2#1)"
        );
    }

    #[test]
    fn resolution() {
        let t = inner_loop();
        assert_eq!(t.resolve("b4").unwrap(), vec![0, 1]);
        assert_eq!(t.resolve("b2#1").unwrap(), vec![1]);
        assert!(matches!(
            t.resolve("b2"),
            Err(CftError::AmbiguousTarget { .. })
        ));
        assert_eq!(t.resolve("/0/0").unwrap(), vec![0, 0]);
        assert!(matches!(t.resolve("/5"), Err(CftError::UnknownTarget(_))));
    }

    #[test]
    fn annotation_must_name_an_enclosing_loop() {
        let ok = attach_annotation(
            inner_loop(),
            "b4",
            Annotation::new(LoopRef::header("b2"), 1),
        )
        .unwrap();
        assert_eq!(ok.to_string(), "(loop b2 (seq b2 (@ b4 b2 1)) x b2)");
        let err = attach_annotation(
            inner_loop(),
            "b2#1",
            Annotation::new(LoopRef::header("b2"), 1),
        )
        .unwrap_err();
        assert!(matches!(err, CftError::NonAncestorLoop { .. }));
        assert!(attach_annotation(inner_loop(), "b2#1", Annotation::new(LoopRef::Top, 1)).is_ok());
    }

    #[test]
    fn split_into_hit_and_miss() {
        let t = split_leaf(
            inner_loop(),
            "b4",
            &[
                variant("b4_h", 1, None),
                variant("b4_m", 11, Some((LoopRef::header("b2"), 1))),
            ],
        )
        .unwrap();
        assert_eq!(
            t.to_string(),
            "(loop b2 (seq b2 (alt b4_h (@ b4_m b2 1))) x b2)"
        );
        assert_eq!(t.rename_map()["b4_m"], "b4");

        let single = split_leaf(inner_loop(), "b4", &[variant("b4x", 1, None)]).unwrap();
        assert_eq!(single.to_string(), "(loop b2 (seq b2 b4x) x b2)");

        assert!(matches!(
            split_leaf(inner_loop(), "b4", &[variant("b2", 1, None)]),
            Err(CftError::DuplicateVariantId(_))
        ));
        assert!(matches!(
            split_leaf(inner_loop(), "zz", &[variant("q", 1, None)]),
            Err(CftError::UnknownBlock(_))
        ));
    }
}
