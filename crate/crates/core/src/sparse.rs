//! Sparse feature vectors, dense weights and capped eligibility traces.
//!
//! Every learner update in this crate reduces to a handful of kernels over
//! these three types: a dot product of dense weights with sparse features,
//! a scaled sparse add into dense weights, and a decay-then-accumulate step
//! on a trace. All iteration happens in ascending index order so that
//! floating-point results are reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, contract, Result};

/// Default number of entries an [`EligibilityTrace`] may hold.
pub const DEFAULT_TRACE_CAPACITY: usize = 2000;
/// Default magnitude below which trace entries are dropped.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-8;

/// Read access to a sparse feature vector.
///
/// Implementors yield `(index, value)` pairs in strictly ascending index
/// order, every index below [`Features::dimension`].
pub trait Features {
    fn dimension(&self) -> usize;
    fn nnz(&self) -> usize;
    fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_;
}

/// Set of active indices in a binary feature space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseBinaryVector {
    dimension: usize,
    active: Vec<usize>,
}

impl SparseBinaryVector {
    /// Builds a vector from arbitrary indices. Duplicates collapse, so the
    /// result may hold fewer indices than were supplied.
    pub fn from_indices(dimension: usize, mut indices: Vec<usize>) -> Result<Self> {
        if dimension == 0 {
            return Err(contract("feature dimension must be positive"));
        }
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= dimension {
                return Err(contract(format!(
                    "feature index {last} out of range for dimension {dimension}"
                )));
            }
        }
        Ok(Self { dimension, active: indices })
    }

    pub fn empty(dimension: usize) -> Result<Self> {
        Self::from_indices(dimension, Vec::new())
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn contains(&self, index: usize) -> bool {
        self.active.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

impl Features for SparseBinaryVector {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn nnz(&self) -> usize {
        self.active.len()
    }

    fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.active.iter().map(|&i| (i, 1.0))
    }
}

/// Real-valued sparse vector, sorted by index with no duplicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dimension: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs; repeated indices are summed.
    pub fn from_pairs(dimension: usize, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        if dimension == 0 {
            return Err(contract("feature dimension must be positive"));
        }
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if i >= dimension {
                return Err(contract(format!(
                    "feature index {i} out of range for dimension {dimension}"
                )));
            }
            if !v.is_finite() {
                return Err(contract(format!("non-finite feature value at index {i}")));
            }
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => entries.push((i, v)),
            }
        }
        Ok(Self { dimension, entries })
    }

    /// Dense slice to sparse, skipping exact zeros.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        let pairs = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self::from_pairs(values.len(), pairs)
    }

    pub fn zeros(dimension: usize) -> Result<Self> {
        Self::from_pairs(dimension, Vec::new())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(k) => self.entries[k].1,
            Err(_) => 0.0,
        }
    }

    pub fn as_pairs(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// True when every stored value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v == 0.0)
    }
}

impl From<&SparseBinaryVector> for SparseVector {
    fn from(phi: &SparseBinaryVector) -> Self {
        Self {
            dimension: phi.dimension,
            entries: phi.entries().collect(),
        }
    }
}

impl Features for SparseVector {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn nnz(&self) -> usize {
        self.entries.len()
    }

    fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }
}

/// Dense real weight vector (θ, w, v, u).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseWeightVector {
    values: Vec<f64>,
}

impl DenseWeightVector {
    pub fn zeros(dimension: usize) -> Self {
        Self { values: vec![0.0; dimension] }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(contract("weight dimension must be positive"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(contract(format!("non-finite weight at index {i}")));
        }
        Ok(Self { values })
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Sets one entry. Rejects non-finite values.
    pub fn set(&mut self, index: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(contract("non-finite weight value"));
        }
        check_index(index, self.values.len())?;
        self.values[index] = value;
        Ok(())
    }

    /// `wᵀφ`, summed in ascending index order.
    pub fn dot<F: Features>(&self, phi: &F) -> Result<f64> {
        check_dim(self.dimension(), phi.dimension())?;
        Ok(phi.entries().map(|(i, v)| self.values[i] * v).sum())
    }

    /// `w += scale · φ`.
    pub fn axpy_sparse<F: Features>(&mut self, scale: f64, phi: &F) -> Result<()> {
        check_dim(self.dimension(), phi.dimension())?;
        if !scale.is_finite() {
            return Err(contract(format!("non-finite scale {scale}")));
        }
        if scale == 0.0 {
            return Ok(());
        }
        for (i, v) in phi.entries() {
            self.values[i] += scale * v;
        }
        self.ensure_finite(phi.entries().map(|(i, _)| i))
    }

    /// `w += scale · e`.
    pub fn axpy_trace(&mut self, scale: f64, trace: &EligibilityTrace) -> Result<()> {
        check_dim(self.dimension(), trace.dimension())?;
        if !scale.is_finite() {
            return Err(contract(format!("non-finite scale {scale}")));
        }
        if scale == 0.0 {
            return Ok(());
        }
        for &(i, e) in &trace.entries {
            self.values[i] += scale * e;
        }
        self.ensure_finite(trace.entries.iter().map(|&(i, _)| i))
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Number of entries that are not exactly zero.
    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    fn ensure_finite(&self, touched: impl Iterator<Item = usize>) -> Result<()> {
        for i in touched {
            if !self.values[i].is_finite() {
                return Err(contract(format!("weight at index {i} became non-finite")));
            }
        }
        Ok(())
    }
}

fn check_index(index: usize, dimension: usize) -> Result<()> {
    if index < dimension {
        Ok(())
    } else {
        Err(contract(format!(
            "index {index} out of range for dimension {dimension}"
        )))
    }
}

/// Accumulating eligibility trace with bounded storage.
///
/// Entries live in a vector sorted by index. After every update, entries
/// with magnitude below `prune_threshold` (and exact zeros) are dropped; if
/// more than `capacity` remain, the smallest magnitudes are evicted, lower
/// index first on ties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EligibilityTrace {
    dimension: usize,
    entries: Vec<(usize, f64)>,
    capacity: usize,
    prune_threshold: f64,
}

impl EligibilityTrace {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            entries: Vec::new(),
            capacity: DEFAULT_TRACE_CAPACITY,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }

    pub fn with_limits(dimension: usize, capacity: usize, prune_threshold: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(contract("trace capacity must be positive"));
        }
        if !(prune_threshold >= 0.0 && prune_threshold.is_finite()) {
            return Err(contract("prune threshold must be finite and nonnegative"));
        }
        Ok(Self {
            dimension,
            entries: Vec::new(),
            capacity,
            prune_threshold,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(k) => self.entries[k].1,
            Err(_) => 0.0,
        }
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// `e ← decay · e + scale · φ` with `decay` restricted to `[0, 1]`.
    pub fn trace_decay_add<F: Features>(&mut self, decay: f64, scale: f64, phi: &F) -> Result<()> {
        if !(0.0..=1.0).contains(&decay) {
            return Err(contract(format!("trace decay {decay} outside [0, 1]")));
        }
        self.accumulate(decay, scale, phi)
    }

    /// `e ← decay · e + scale · φ` for any finite nonnegative `decay`.
    ///
    /// Importance-weighted recurrences multiply the decay by ρ, which is not
    /// bounded by one, so the learners go through this entry point.
    pub fn accumulate<F: Features>(&mut self, decay: f64, scale: f64, phi: &F) -> Result<()> {
        check_dim(self.dimension, phi.dimension())?;
        if !(decay >= 0.0 && decay.is_finite()) {
            return Err(contract(format!("trace decay {decay} must be finite and nonnegative")));
        }
        if !scale.is_finite() {
            return Err(contract(format!("non-finite trace scale {scale}")));
        }

        let old = std::mem::take(&mut self.entries);
        let mut merged = Vec::with_capacity(old.len() + phi.nnz());
        let mut lhs = old.into_iter().peekable();
        let mut rhs = phi.entries().peekable();
        loop {
            let next = match (lhs.peek(), rhs.peek()) {
                (Some(&(i, e)), Some(&(j, v))) => {
                    if i < j {
                        lhs.next();
                        (i, decay * e)
                    } else if j < i {
                        rhs.next();
                        (j, scale * v)
                    } else {
                        lhs.next();
                        rhs.next();
                        (i, decay * e + scale * v)
                    }
                }
                (Some(&(i, e)), None) => {
                    lhs.next();
                    (i, decay * e)
                }
                (None, Some(&(j, v))) => {
                    rhs.next();
                    (j, scale * v)
                }
                (None, None) => break,
            };
            if !next.1.is_finite() {
                return Err(contract(format!("trace entry {} became non-finite", next.0)));
            }
            merged.push(next);
        }
        self.entries = merged;
        self.prune();
        Ok(())
    }

    /// Multiplies every entry by `factor` and prunes.
    pub fn scale(&mut self, factor: f64) -> Result<()> {
        if !factor.is_finite() {
            return Err(contract("non-finite trace scale"));
        }
        for (_, e) in &mut self.entries {
            *e *= factor;
        }
        self.prune();
        Ok(())
    }

    /// `eᵀw`, summed in ascending index order.
    pub fn dot(&self, w: &DenseWeightVector) -> Result<f64> {
        check_dim(self.dimension, w.dimension())?;
        Ok(self.entries.iter().map(|&(i, e)| e * w.values[i]).sum())
    }

    fn prune(&mut self) {
        let threshold = self.prune_threshold;
        self.entries.retain(|&(_, e)| e != 0.0 && e.abs() >= threshold);
        let excess = self.entries.len().saturating_sub(self.capacity);
        if excess == 0 {
            return;
        }
        // Rank by (magnitude, index) and drop the `excess` smallest.
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        let key = |k: usize| (self.entries[k].1.abs(), self.entries[k].0);
        order.select_nth_unstable_by(excess - 1, |&a, &b| {
            let (ma, ia) = key(a);
            let (mb, ib) = key(b);
            ma.total_cmp(&mb).then(ia.cmp(&ib))
        });
        let mut evict = vec![false; self.entries.len()];
        for &k in &order[..excess] {
            evict[k] = true;
        }
        let mut k = 0;
        self.entries.retain(|_| {
            let keep = !evict[k];
            k += 1;
            keep
        });
    }
}

/// Trace entries as a sparse vector, for callers that want `Features`.
impl Features for EligibilityTrace {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn nnz(&self) -> usize {
        self.entries.len()
    }

    fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }
}
