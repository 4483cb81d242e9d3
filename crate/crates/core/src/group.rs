//! Finite groups of axis flips and point reflections.
//!
//! Every element is a diagonal matrix with entries in {-1, +1}, stored as a
//! [`SignVector`]. Composition is the elementwise product, every element is
//! its own inverse, and the group is always abelian, so a group generated by
//! `k` independent flips has exactly `2^k` elements.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Diagonal of a sign-flip transform.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidInput("sign vector must be non-empty".into()));
        }
        if signs.len() > 64 {
            return Err(Error::InvalidInput(format!(
                "sign vectors are limited to 64 dimensions, got {}",
                signs.len()
            )));
        }
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidInput(format!(
                "sign entries must be -1 or +1, got {bad}"
            )));
        }
        Ok(Self(signs))
    }

    pub fn identity(dim: usize) -> Self {
        Self(vec![1; dim])
    }

    /// Flips every axis: the point reflection through the origin.
    pub fn point_reflection(dim: usize) -> Self {
        Self(vec![-1; dim])
    }

    /// Flips only axis `axis`.
    pub fn axis_flip(dim: usize, axis: usize) -> Self {
        let mut signs = vec![1; dim];
        signs[axis] = -1;
        Self(signs)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|s| *s == 1)
    }

    /// Bit `q` is set when axis `q` is flipped.
    fn mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == -1)
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    fn from_mask(mask: u64, dim: usize) -> Self {
        Self(
            (0..dim)
                .map(|q| if mask & (1 << q) != 0 { -1 } else { 1 })
                .collect(),
        )
    }

    /// `signs ⊙ x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.0
            .iter()
            .zip(x)
            .map(|(s, v)| f64::from(*s) * v)
            .collect()
    }

    /// Elementwise product. For diagonal sign matrices this is both `A B` and
    /// `Aᵀ B`.
    pub fn compose(&self, other: &SignVector) -> Result<SignVector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect(),
        ))
    }
}

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;

    fn try_from(signs: Vec<i8>) -> Result<Self> {
        Self::new(signs)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(v: SignVector) -> Self {
        v.0
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for s in &self.0 {
            f.write_str(if *s == 1 { "+" } else { "-" })?;
        }
        f.write_str(")")
    }
}

/// A finite group of sign flips acting on `R^dim`.
///
/// Elements are kept in canonical order: sorted by flip mask, where axis `q`
/// contributes bit `q`. The identity is therefore always element 0, and every
/// `(i, j)`-indexed sum downstream visits terms in the same order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignFlipGroup {
    dim: usize,
    elements: Vec<SignVector>,
    masks: Vec<u64>,
}

impl SignFlipGroup {
    /// The trivial group `{I}`; an invariant kernel over it is the base kernel.
    pub fn identity(dim: usize) -> Self {
        Self::from_generators(&[], dim).expect("identity group is always valid")
    }

    /// `{I, -I}`.
    pub fn point_symmetry(dim: usize) -> Self {
        Self::from_generators(&[SignVector::point_reflection(dim)], dim)
            .expect("point reflection has the right dimension")
    }

    /// All `2^dim` sign flips.
    pub fn all_flips(dim: usize) -> Self {
        let gens: Vec<_> = (0..dim).map(|q| SignVector::axis_flip(dim, q)).collect();
        Self::from_generators(&gens, dim).expect("axis flips have the right dimension")
    }

    /// Closure of `{I} ∪ generators` under composition.
    pub fn from_generators(generators: &[SignVector], dim: usize) -> Result<Self> {
        if dim == 0 || dim > 64 {
            return Err(Error::InvalidInput(format!(
                "group dimension must be in 1..=64, got {dim}"
            )));
        }
        for g in generators {
            check_dim(dim, g.dim())?;
        }
        let mut closure: BTreeSet<u64> = BTreeSet::from([0]);
        for g in generators {
            let m = g.mask();
            let products: Vec<u64> = closure.iter().map(|e| e ^ m).collect();
            closure.extend(products);
        }
        let masks: Vec<u64> = closure.into_iter().collect();
        let elements = masks
            .iter()
            .map(|m| SignVector::from_mask(*m, dim))
            .collect();
        Ok(Self {
            dim,
            elements,
            masks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Group order `J`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false; a group contains at least the identity.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SignVector] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> Result<&SignVector> {
        self.elements.get(index).ok_or(Error::IndexOutOfRange {
            index,
            size: self.len(),
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.len() == 1
    }

    /// Index of `compose(element_i, element_j)` within this group.
    pub fn compose_index(&self, i: usize, j: usize) -> Result<usize> {
        let mi = *self.masks.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            size: self.len(),
        })?;
        let mj = *self.masks.get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            size: self.len(),
        })?;
        Ok(self
            .masks
            .binary_search(&(mi ^ mj))
            .expect("group is closed under composition"))
    }

    pub fn contains(&self, g: &SignVector) -> bool {
        g.dim() == self.dim && self.masks.binary_search(&g.mask()).is_ok()
    }

    /// The images of `x` under every element, in canonical order. Points fixed
    /// by several elements appear once per element, so the result always has
    /// exactly `J` entries.
    pub fn orbit(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim, x.len())?;
        Ok(self.orbit_unchecked(x))
    }

    pub(crate) fn orbit_unchecked(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.elements.iter().map(|g| g.apply_unchecked(x)).collect()
    }

    /// Generators that reproduce this group: the non-identity elements.
    pub fn generators(&self) -> Vec<SignVector> {
        self.elements[1..].to_vec()
    }
}
