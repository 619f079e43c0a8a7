//! Dense tensors of expressions with per-slot variance.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{equivalent_many, Expr, ProbeConfig, Symbol, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn name(self) -> &'static str {
        match self {
            Variance::Up => "up",
            Variance::Down => "down",
        }
    }
}

pub type Valence = Vec<Variance>;

/// Shorthand valences.
pub mod valence {
    use super::Variance::{self, Down, Up};

    pub const SCALAR: [Variance; 0] = [];
    pub const U: [Variance; 1] = [Up];
    pub const D: [Variance; 1] = [Down];
    pub const UU: [Variance; 2] = [Up, Up];
    pub const UD: [Variance; 2] = [Up, Down];
    pub const DD: [Variance; 2] = [Down, Down];
    pub const UDD: [Variance; 3] = [Up, Down, Down];
    pub const DDD: [Variance; 3] = [Down, Down, Down];
    pub const UDDD: [Variance; 4] = [Up, Down, Down, Down];
}

/// A dense `dim^rank` array of expressions stored row-major over index tuples.
#[derive(Clone, PartialEq, Eq)]
pub struct Tensor {
    dim: usize,
    valence: Valence,
    components: Vec<Expr>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Tensor(dim={}, valence={:?})", self.dim, self.valence)?;
        for (flat, c) in self.components.iter().enumerate() {
            if !c.is_zero() {
                writeln!(f, "  {:?} = {}", self.multi_index(flat), c)?;
            }
        }
        Ok(())
    }
}

impl Tensor {
    pub fn new(dim: usize, valence: &[Variance], components: Vec<Expr>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        let expected = dim.pow(valence.len() as u32);
        if components.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} components, got {}",
                components.len()
            )));
        }
        Ok(Self {
            dim,
            valence: valence.to_vec(),
            components,
        })
    }

    /// Builds a tensor component by component; `f` receives each index tuple.
    /// Components are computed in parallel and are not simplified.
    pub fn from_fn<F>(dim: usize, valence: &[Variance], f: F) -> Self
    where
        F: Fn(&[usize]) -> Expr + Sync,
    {
        let rank = valence.len();
        let n = dim.pow(rank as u32);
        let components = (0..n)
            .into_par_iter()
            .map(|flat| f(&unflatten(flat, dim, rank)))
            .collect();
        Self {
            dim,
            valence: valence.to_vec(),
            components,
        }
    }

    pub fn scalar(e: Expr) -> Self {
        Self {
            dim: 1,
            valence: Vec::new(),
            components: vec![e],
        }
    }

    pub fn zeros(dim: usize, valence: &[Variance]) -> Self {
        Self::from_fn(dim, valence, |_| Expr::zero())
    }

    /// Kronecker delta `δ^i_j`.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, &valence::UD, |ix| {
            if ix[0] == ix[1] {
                Expr::one()
            } else {
                Expr::zero()
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[Variance] {
        &self.valence
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Expr> {
        self.components
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.rank(), "index length must equal rank");
        index.iter().fold(0, |acc, &i| {
            assert!(i < self.dim, "index {i} out of range for dim {}", self.dim);
            acc * self.dim + i
        })
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        unflatten(flat, self.dim, self.rank())
    }

    pub fn get(&self, index: &[usize]) -> &Expr {
        &self.components[self.flat_index(index)]
    }

    /// The single component of a rank-0 tensor.
    pub fn as_scalar(&self) -> Option<&Expr> {
        (self.rank() == 0).then(|| &self.components[0])
    }

    /// True when every component is the literal zero.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    /// Index tuples and values of the non-zero components, in row-major order.
    pub fn nonzero(&self) -> Vec<(Vec<usize>, &Expr)> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.multi_index(i), c))
            .collect()
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(&Expr) -> Expr + Sync + Send,
    {
        Self {
            dim: self.dim,
            valence: self.valence.clone(),
            components: self.components.par_iter().map(f).collect(),
        }
    }

    pub fn simplified(&self) -> Self {
        self.map(Expr::simplify)
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.rank() {
            Err(Error::SlotOutOfRange {
                slot,
                rank: self.rank(),
            })
        } else {
            Ok(())
        }
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        if self.valence != other.valence {
            return Err(Error::VarianceMismatch(format!(
                "{:?} vs {:?}",
                self.valence, other.valence
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| (a.clone() + b.clone()).simplify()))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| (a.clone() - b.clone()).simplify()))
    }

    fn zip_with<F>(&self, other: &Tensor, f: F) -> Tensor
    where
        F: Fn(&Expr, &Expr) -> Expr + Sync,
    {
        Tensor {
            dim: self.dim,
            valence: self.valence.clone(),
            components: self
                .components
                .par_iter()
                .zip(other.components.par_iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// Multiplies every component by `factor`, simplified.
    pub fn scale(&self, factor: &Expr) -> Tensor {
        self.map(|c| (factor.clone() * c.clone()).simplify())
    }

    /// Sum over the diagonal of an Up slot and a Down slot.
    pub fn contract(&self, up_slot: usize, down_slot: usize) -> Result<Tensor> {
        self.check_slot(up_slot)?;
        self.check_slot(down_slot)?;
        if up_slot == down_slot {
            return Err(Error::VarianceMismatch(format!(
                "cannot contract slot {up_slot} with itself"
            )));
        }
        if self.valence[up_slot] != Variance::Up || self.valence[down_slot] != Variance::Down {
            return Err(Error::VarianceMismatch(format!(
                "contraction needs an up slot and a down slot, got {:?} at {up_slot} and {:?} at {down_slot}",
                self.valence[up_slot], self.valence[down_slot]
            )));
        }
        Ok(self.trace_slots(up_slot, down_slot))
    }

    /// Diagonal sum over two slots without a variance check.
    fn trace_slots(&self, s1: usize, s2: usize) -> Tensor {
        let kept: Vec<usize> = (0..self.rank()).filter(|&s| s != s1 && s != s2).collect();
        let valence: Valence = kept.iter().map(|&s| self.valence[s]).collect();
        Tensor::from_fn(self.dim, &valence, |ix| {
            let mut full = vec![0; self.rank()];
            for (k, &s) in kept.iter().enumerate() {
                full[s] = ix[k];
            }
            let terms = (0..self.dim)
                .map(|a| {
                    full[s1] = a;
                    full[s2] = a;
                    self.get(&full).clone()
                })
                .collect();
            Expr::sum(terms).simplify()
        })
    }

    /// Outer product; valence is the concatenation.
    pub fn product(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() > 0 && other.rank() > 0 && self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        let dim = if self.rank() == 0 {
            other.dim
        } else {
            self.dim
        };
        let mut valence = self.valence.clone();
        valence.extend_from_slice(&other.valence);
        let split = self.rank();
        Ok(Tensor::from_fn(dim, &valence, |ix| {
            let a = self.get(&ix[..split]);
            let b = other.get(&ix[split..]);
            (a.clone() * b.clone()).simplify()
        }))
    }

    /// Raises a Down slot with the inverse symmetric metric `ginv` (Up, Up).
    pub fn raise(&self, slot: usize, ginv: &Tensor) -> Result<Tensor> {
        self.move_index(slot, ginv, Variance::Down, Variance::Up)
    }

    /// Lowers an Up slot with the symmetric metric `gsym` (Down, Down).
    pub fn lower(&self, slot: usize, gsym: &Tensor) -> Result<Tensor> {
        self.move_index(slot, gsym, Variance::Up, Variance::Down)
    }

    fn move_index(
        &self,
        slot: usize,
        metric: &Tensor,
        from: Variance,
        to: Variance,
    ) -> Result<Tensor> {
        self.check_slot(slot)?;
        if metric.dim != self.dim {
            return Err(Error::DimMismatch(self.dim, metric.dim));
        }
        if metric.valence != [to, to] {
            return Err(Error::VarianceMismatch(format!(
                "metric factor must be {to:?}{to:?}, got {:?}",
                metric.valence
            )));
        }
        if self.valence[slot] != from {
            return Err(Error::VarianceMismatch(format!(
                "slot {slot} is {:?}, expected {from:?}",
                self.valence[slot]
            )));
        }
        let mut valence = self.valence.clone();
        valence[slot] = to;
        Ok(Tensor::from_fn(self.dim, &valence, |ix| {
            let mut src = ix.to_vec();
            let terms = (0..self.dim)
                .map(|a| {
                    src[slot] = a;
                    metric.get(&[ix[slot], a]).clone() * self.get(&src).clone()
                })
                .collect();
            Expr::sum(terms).simplify()
        }))
    }

    /// Componentwise partial derivative; the valence is unchanged.
    pub fn partial(&self, coord: &Symbol) -> Tensor {
        self.map(|c| c.differentiate(coord).simplify())
    }

    /// Reorders slots: output slot `k` is input slot `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        let mut seen = vec![false; self.rank()];
        if perm.len() != self.rank() {
            return Err(Error::Shape(format!(
                "permutation {perm:?} has wrong length"
            )));
        }
        for &p in perm {
            self.check_slot(p)?;
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Shape(format!("{perm:?} is not a permutation")));
            }
        }
        let valence: Valence = perm.iter().map(|&p| self.valence[p]).collect();
        Ok(Tensor::from_fn(self.dim, &valence, |ix| {
            let mut src = vec![0; self.rank()];
            for (k, &p) in perm.iter().enumerate() {
                src[p] = ix[k];
            }
            self.get(&src).clone()
        }))
    }

    /// Exchanges two slots of equal variance.
    pub fn swap_slots(&self, s1: usize, s2: usize) -> Result<Tensor> {
        self.check_slot(s1)?;
        self.check_slot(s2)?;
        if self.valence[s1] != self.valence[s2] {
            return Err(Error::VarianceMismatch(format!(
                "slots {s1} and {s2} have different variance"
            )));
        }
        let mut perm: Vec<usize> = (0..self.rank()).collect();
        perm.swap(s1, s2);
        self.permute(&perm)
    }

    /// `(T + T with s1, s2 swapped) / 2`.
    pub fn symmetrize(&self, s1: usize, s2: usize) -> Result<Tensor> {
        let swapped = self.swap_slots(s1, s2)?;
        let half = Expr::ratio(1, 2);
        Ok(self.zip_with(&swapped, |a, b| {
            (half.clone() * (a.clone() + b.clone())).simplify()
        }))
    }

    /// `(T - T with s1, s2 swapped) / 2`.
    pub fn antisymmetrize(&self, s1: usize, s2: usize) -> Result<Tensor> {
        let swapped = self.swap_slots(s1, s2)?;
        let half = Expr::ratio(1, 2);
        Ok(self.zip_with(&swapped, |a, b| {
            (half.clone() * (a.clone() - b.clone())).simplify()
        }))
    }

    /// Probe-equality of all components under shared bindings.
    pub fn probe_equal(&self, other: &Tensor, cfg: &ProbeConfig) -> Result<Verdict> {
        self.check_same_shape(other)?;
        Ok(equivalent_many(&self.components, &other.components, cfg))
    }
}

fn unflatten(mut flat: usize, dim: usize, rank: usize) -> Vec<usize> {
    let mut ix = vec![0; rank];
    for slot in (0..rank).rev() {
        ix[slot] = flat % dim;
        flat /= dim;
    }
    ix
}
