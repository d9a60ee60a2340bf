//! Block structure of the memory Hilbert space: stable blocks (pattern
//! supports or decoherence-free blocks) followed by decaying blocks, each
//! decaying block tied to the basin it drains into.

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Role {
    Stable,
    Decaying,
}

/// Block description as given by the caller.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub name: String,
    pub role: Role,
    pub dim: usize,
}

impl BlockSpec {
    pub fn stable(name: impl Into<String>, dim: usize) -> Self {
        BlockSpec { name: name.into(), role: Role::Stable, dim }
    }

    pub fn decaying(name: impl Into<String>, dim: usize) -> Self {
        BlockSpec { name: name.into(), role: Role::Decaying, dim }
    }
}

#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    pub role: Role,
    pub dim: usize,
    pub offset: usize,
}

impl Block {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.dim
    }
}

/// Ordered direct-sum decomposition of the total space. All stable blocks
/// come first (in declaration order), then all decaying blocks; offsets are
/// assigned accordingly, so the stable subspace is always the leading
/// `stable_dim()` coordinates.
#[derive(Debug, Clone)]
pub struct SpaceLayout {
    blocks: Vec<Block>,
    index: HashMap<String, usize>,
    dim: usize,
    stable_dim: usize,
}

pub fn build_layout(specs: Vec<BlockSpec>) -> Result<SpaceLayout> {
    if specs.is_empty() {
        return Err(Error::EmptyLayout);
    }
    let mut blocks = Vec::with_capacity(specs.len());
    let mut offset = 0usize;
    for role in [Role::Stable, Role::Decaying] {
        for spec in specs.iter().filter(|s| s.role == role) {
            if spec.dim == 0 {
                return Err(Error::ZeroDimBlock(spec.name.clone()));
            }
            blocks.push(Block {
                name: spec.name.clone(),
                role: spec.role,
                dim: spec.dim,
                offset,
            });
            offset += spec.dim;
        }
    }
    let mut index = HashMap::new();
    for (i, b) in blocks.iter().enumerate() {
        if index.insert(b.name.clone(), i).is_some() {
            return Err(Error::DuplicateBlock(b.name.clone()));
        }
    }
    let stable_dim = blocks
        .iter()
        .filter(|b| b.role == Role::Stable)
        .map(|b| b.dim)
        .sum();
    Ok(SpaceLayout { blocks, index, dim: offset, stable_dim })
}

impl SpaceLayout {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stable_dim(&self) -> usize {
        self.stable_dim
    }

    pub fn decaying_dim(&self) -> usize {
        self.dim - self.stable_dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Result<&Block> {
        self.index
            .get(name)
            .map(|&i| &self.blocks[i])
            .ok_or_else(|| Error::UnknownBlock(name.to_string()))
    }

    /// Single stable block covering the whole space; the layout used for
    /// channels with no decaying part.
    pub fn trivial(dim: usize) -> Self {
        build_layout(vec![BlockSpec::stable("all", dim)]).expect("dim > 0")
    }

    /// Embed a block-local operator into the full space (zero elsewhere).
    pub fn embed_op(&self, name: &str, local: &CMat) -> Result<CMat> {
        let b = self.block(name)?;
        if local.nrows() != b.dim || local.ncols() != b.dim {
            return Err(Error::DimensionMismatch {
                expected: b.dim,
                got: local.nrows(),
                context: format!("embed into '{name}'"),
            });
        }
        let mut out = CMat::from_elem((self.dim, self.dim), ZERO);
        for i in 0..b.dim {
            for j in 0..b.dim {
                out[(b.offset + i, b.offset + j)] = local[(i, j)];
            }
        }
        Ok(out)
    }

    /// Embed a block-local vector into the full space.
    pub fn embed_vec(&self, name: &str, local: &CVec) -> Result<CVec> {
        let b = self.block(name)?;
        if local.len() != b.dim {
            return Err(Error::DimensionMismatch {
                expected: b.dim,
                got: local.len(),
                context: format!("embed into '{name}'"),
            });
        }
        let mut out = CVec::from_elem(self.dim, ZERO);
        for i in 0..b.dim {
            out[b.offset + i] = local[i];
        }
        Ok(out)
    }

    /// Restriction of a global operator to one block.
    pub fn extract_op(&self, name: &str, global: &CMat) -> Result<CMat> {
        let b = self.block(name)?;
        if global.nrows() != self.dim || global.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: global.nrows(),
                context: format!("extract '{name}'"),
            });
        }
        Ok(CMat::from_shape_fn((b.dim, b.dim), |(i, j)| {
            global[(b.offset + i, b.offset + j)]
        }))
    }

    /// Orthogonal projector onto the direct sum of the named blocks.
    pub fn projector_onto(&self, names: &[&str]) -> Result<CMat> {
        let mut out = CMat::from_elem((self.dim, self.dim), ZERO);
        for name in names {
            let b = self.block(name)?;
            for i in b.range() {
                out[(i, i)] = ONE;
            }
        }
        Ok(out)
    }

    pub fn stable_projector(&self) -> CMat {
        let mut out = CMat::from_elem((self.dim, self.dim), ZERO);
        for b in self.blocks.iter().filter(|b| b.role == Role::Stable) {
            for i in b.range() {
                out[(i, i)] = ONE;
            }
        }
        out
    }

    pub fn decaying_projector(&self) -> CMat {
        let mut out = CMat::from_elem((self.dim, self.dim), ZERO);
        for b in self.blocks.iter().filter(|b| b.role == Role::Decaying) {
            for i in b.range() {
                out[(i, i)] = ONE;
            }
        }
        out
    }

    pub fn basis_state(&self, i: usize) -> CVec {
        let mut v = CVec::from_elem(self.dim, ZERO);
        v[i] = ONE;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_blocks_lead() {
        let layout = build_layout(vec![
            BlockSpec::stable("s1", 2),
            BlockSpec::decaying("d1", 3),
            BlockSpec::stable("s2", 1),
            BlockSpec::decaying("d2", 2),
        ])
        .unwrap();
        assert_eq!(layout.dim(), 8);
        assert_eq!(layout.stable_dim(), 3);
        assert_eq!(layout.block("s1").unwrap().offset, 0);
        assert_eq!(layout.block("s2").unwrap().offset, 2);
        assert_eq!(layout.block("d1").unwrap().offset, 3);
        assert_eq!(layout.block("d2").unwrap().offset, 6);
    }

    #[test]
    fn projector_trace_counts_dims() {
        let layout = build_layout(vec![
            BlockSpec::stable("s", 2),
            BlockSpec::decaying("d", 3),
        ])
        .unwrap();
        let p = layout.projector_onto(&["d"]).unwrap();
        let tr: f64 = p.diag().iter().map(|z| z.re).sum();
        assert_eq!(tr, 3.0);
        let ps = layout.stable_projector();
        let pd = layout.decaying_projector();
        let sum = &ps + &pd;
        for i in 0..5 {
            assert_eq!(sum[(i, i)], ONE);
        }
    }

    #[test]
    fn embed_extract_roundtrip() {
        let layout = build_layout(vec![
            BlockSpec::stable("s", 2),
            BlockSpec::decaying("d", 2),
        ])
        .unwrap();
        let local = ndarray::array![
            [crate::linalg::C64::new(1.0, 2.0), ZERO],
            [ZERO, crate::linalg::C64::new(3.0, -1.0)]
        ];
        let g = layout.embed_op("d", &local).unwrap();
        assert_eq!(g[(2, 2)], crate::linalg::C64::new(1.0, 2.0));
        let back = layout.extract_op("d", &g).unwrap();
        assert_eq!(back, local);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(build_layout(vec![]), Err(Error::EmptyLayout)));
        assert!(matches!(
            build_layout(vec![BlockSpec::stable("a", 0)]),
            Err(Error::ZeroDimBlock(_))
        ));
        assert!(matches!(
            build_layout(vec![BlockSpec::stable("a", 1), BlockSpec::decaying("a", 1)]),
            Err(Error::DuplicateBlock(_))
        ));
    }
}
