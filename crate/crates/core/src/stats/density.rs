use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resolution used for return densities throughout.
pub const RETURN_BINS_PER_DECADE: usize = 20;

/// Log-spaced binning over |x|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub per_decade: usize,
    /// Lattice spacing of the data, if it only takes values k·quantum.
    /// Edges are then placed at half-integer multiples so that every bin
    /// holds at least one admissible value.
    pub quantum: Option<f64>,
}

impl Default for Binning {
    fn default() -> Self {
        Binning { per_decade: 40, quantum: None }
    }
}

impl Binning {
    pub fn per_decade(per_decade: usize) -> Self {
        Binning { per_decade, quantum: None }
    }

    /// [`RETURN_BINS_PER_DECADE`] bins, aligned to `quantum` if given.
    pub fn returns(quantum: Option<f64>) -> Self {
        Binning { per_decade: RETURN_BINS_PER_DECADE, quantum }
    }

    pub fn with_quantum(mut self, quantum: f64) -> Self {
        self.quantum = Some(quantum);
        self
    }

    /// Edges covering [lo, hi] (both > 0).
    pub fn edges(&self, lo: f64, hi: f64) -> Vec<f64> {
        let per_decade = self.per_decade.max(1) as f64;
        match self.quantum {
            Some(q) => {
                let k_lo = (lo / q).round().max(1.0);
                let k_hi = (hi / q).round().max(k_lo);
                let decades = (k_hi + 1.0).log10() - k_lo.log10();
                let count = (decades * per_decade).ceil().max(1.0) as usize;
                let mut ks: Vec<f64> = (0..=count)
                    .map(|i| (k_lo * 10f64.powf(i as f64 / per_decade)).round())
                    .filter(|&k| k <= k_hi)
                    .collect();
                ks.push(k_hi + 1.0);
                ks.dedup();
                ks.into_iter().map(|k| (k - 0.5) * q).collect()
            }
            None => {
                let lo = lo * (1.0 - 1e-9);
                let hi = hi * (1.0 + 1e-9);
                let decades = (hi / lo).log10();
                let count = (decades * per_decade).ceil().max(1.0) as usize;
                (0..=count)
                    .map(|i| lo * (hi / lo).powf(i as f64 / count as f64))
                    .collect()
            }
        }
    }
}

/// Normalized histogram of |x| on log-spaced bins. Zeros are excluded from
/// the density and reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub counts: Vec<u64>,
    /// Number of nonzero samples.
    pub total: u64,
    pub zero_count: u64,
}

/// Histogram of |x| over the nonzero samples.
pub fn density(values: &[f64], binning: &Binning) -> Result<DensityEstimate> {
    let abs: Vec<f64> = values.iter().map(|x| x.abs()).filter(|x| x.is_finite()).collect();
    let nonzero: Vec<f64> = abs.iter().copied().filter(|&x| x > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::InsufficientData("no nonzero values to histogram".into()));
    }
    let lo = nonzero.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nonzero.iter().copied().fold(0.0, f64::max);
    let edges = binning.edges(lo, hi);
    Ok(DensityEstimate::from_edges(&nonzero, edges, (abs.len() - nonzero.len()) as u64))
}

impl DensityEstimate {
    /// Histogram of positive `values` on caller-supplied ascending edges;
    /// values outside the edges are dropped.
    pub fn from_edges(values: &[f64], edges: Vec<f64>, zero_count: u64) -> Self {
        let mut counts = vec![0u64; edges.len().saturating_sub(1)];
        for &x in values {
            if x < edges[0] || x >= *edges.last().unwrap() {
                continue;
            }
            let bin = edges.partition_point(|&e| e <= x) - 1;
            counts[bin] += 1;
        }
        Self::from_counts(edges, counts, zero_count)
    }

    pub fn from_counts(edges: Vec<f64>, counts: Vec<u64>, zero_count: u64) -> Self {
        let total: u64 = counts.iter().sum();
        let density = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| if total == 0 { 0.0 } else { c as f64 / (total as f64 * (w[1] - w[0])) })
            .collect();
        DensityEstimate { edges, density, counts, total, zero_count }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Geometric bin centers.
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Σ density·width; 1 for any nonempty estimate.
    pub fn integral(&self) -> f64 {
        self.density.iter().zip(self.widths()).map(|(d, w)| d * w).sum()
    }

    /// Fraction of all samples (including zeros) that were exactly zero.
    pub fn zero_fraction(&self) -> f64 {
        self.zero_count as f64 / (self.zero_count + self.total).max(1) as f64
    }

    /// Merges each run of bins holding fewer than `min_count` samples into
    /// the following bins; a sparse remainder at the top joins the last
    /// full bin.
    pub fn merge_sparse(&self, min_count: u64) -> DensityEstimate {
        let mut edges = vec![self.edges[0]];
        let mut counts = Vec::new();
        let mut acc = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            acc += c;
            if acc >= min_count {
                counts.push(acc);
                edges.push(self.edges[i + 1]);
                acc = 0;
            }
        }
        let last_edge = *self.edges.last().unwrap();
        if acc > 0 || *edges.last().unwrap() < last_edge {
            if let Some(c) = counts.last_mut() {
                *c += acc;
                *edges.last_mut().unwrap() = last_edge;
            } else {
                counts.push(acc);
                edges.push(last_edge);
            }
        }
        DensityEstimate::from_counts(edges, counts, self.zero_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn normalizes_to_one() {
        let mut r = rng::stream(4, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut r)).collect();
        let est = density(&xs, &Binning::default()).unwrap();
        assert!((est.integral() - 1.0).abs() < 1e-12);
        assert_eq!(est.total, 10_000);
        assert!(est.density.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn half_normal_input_matches_half_normal_density() {
        let mut r = rng::stream(5, 0);
        let n = 400_000;
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let est = density(&xs, &Binning::per_decade(10)).unwrap();
        for ((&c, &d), w) in est.counts.iter().zip(&est.density).zip(est.edges.windows(2)) {
            if c < 400 {
                continue;
            }
            // Bin average of the half-normal density 2φ(x).
            let mass = libm::erf(w[1] / 2f64.sqrt()) - libm::erf(w[0] / 2f64.sqrt());
            let expected = mass / (w[1] - w[0]);
            let rel_se = 1.0 / (c as f64).sqrt();
            assert!(((d - expected) / expected).abs() < 5.0 * rel_se, "bin {w:?}: {d} vs {expected}");
        }
    }

    #[test]
    fn zeros_are_excluded_and_counted() {
        let est = density(&[0.0, 0.0, 1.0, -2.0, 3.0], &Binning::default()).unwrap();
        assert_eq!(est.total, 3);
        assert_eq!(est.zero_count, 2);
        assert!((est.zero_fraction() - 0.4).abs() < 1e-15);
        assert!(density(&[0.0, 0.0], &Binning::default()).is_err());
    }

    #[test]
    fn lattice_edges_sit_between_admissible_values() {
        let q = 2.0 / 16384.0;
        let values: Vec<f64> = (1..=300).map(|k| k as f64 * q).collect();
        let est = density(&values, &Binning::per_decade(20).with_quantum(q)).unwrap();
        assert!(est.counts.iter().all(|&c| c > 0));
        for &e in &est.edges {
            let k = e / q;
            assert!((k - k.floor() - 0.5).abs() < 1e-9);
        }
        assert!((est.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_sparse_keeps_normalization() {
        let values: Vec<f64> = (0..200).map(|i| 1.0 + (i as f64).powi(3) / 1000.0).collect();
        let est = density(&values, &Binning::per_decade(40)).unwrap();
        let merged = est.merge_sparse(5);
        assert!(merged.counts.iter().all(|&c| c >= 5));
        assert_eq!(merged.total, est.total);
        assert_eq!(merged.edges.first(), est.edges.first());
        assert_eq!(merged.edges.last(), est.edges.last());
        assert!((merged.integral() - 1.0).abs() < 1e-12);
    }
}
