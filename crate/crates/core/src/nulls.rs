//! Randomised counterparts of a bipartite matrix that keep progressively more
//! of its degree structure.
//!
//! | level                      | preserved                              |
//! |----------------------------|----------------------------------------|
//! | `DensityOnly`              | number of edges                        |
//! | `PreserveCountryDegrees`   | every country's diversification        |
//! | `PreserveProductDegrees`   | every product's ubiquity               |
//! | `PreserveBoth`             | both degree sequences (edge swaps)     |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{diversification, ubiquity, BipartiteMatrix};
use crate::reflections::reflect;
use crate::rng;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullLevel {
    DensityOnly,
    PreserveCountryDegrees,
    PreserveProductDegrees,
    PreserveBoth,
}

impl NullLevel {
    pub const ALL: [NullLevel; 4] = [
        NullLevel::DensityOnly,
        NullLevel::PreserveCountryDegrees,
        NullLevel::PreserveProductDegrees,
        NullLevel::PreserveBoth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NullLevel::DensityOnly => "density_only",
            NullLevel::PreserveCountryDegrees => "preserve_country_degrees",
            NullLevel::PreserveProductDegrees => "preserve_product_degrees",
            NullLevel::PreserveBoth => "preserve_both",
        }
    }
}

impl fmt::Display for NullLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NullLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        NullLevel::ALL
            .into_iter()
            .find(|l| l.as_str() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown null model level {s:?}")))
    }
}

/// Default number of attempted swaps per edge for `PreserveBoth`.
pub const DEFAULT_SWAPS_PER_EDGE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullModelSpec {
    pub level: NullLevel,
    pub n_samples: usize,
    pub seed: u64,
    pub swaps_per_edge: usize,
}

impl NullModelSpec {
    pub fn new(level: NullLevel, n_samples: usize, seed: u64) -> Self {
        Self {
            level,
            n_samples,
            seed,
            swaps_per_edge: DEFAULT_SWAPS_PER_EDGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSamples {
    pub samples: Vec<BipartiteMatrix>,
    /// Set for `PreserveBoth` when the matrix admits no degree-preserving
    /// swap; the samples are then copies of the input.
    pub no_rewiring_possible: bool,
}

/// Draws `spec.n_samples` randomised matrices. Sample `i` uses stream `i` of
/// `spec.seed`.
pub fn randomize(m: &BipartiteMatrix, spec: &NullModelSpec) -> Result<NullSamples> {
    if spec.n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    if m.n_edges() == 0 {
        return Err(Error::NoData);
    }
    if spec.level == NullLevel::PreserveBoth && !admits_swap(m) {
        return Ok(NullSamples {
            samples: vec![m.clone(); spec.n_samples],
            no_rewiring_possible: true,
        });
    }
    let samples = (0..spec.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(spec.seed, i as u64);
            match spec.level {
                NullLevel::DensityOnly => density_only(m, &mut rng),
                NullLevel::PreserveCountryDegrees => preserve_country(m, &mut rng),
                NullLevel::PreserveProductDegrees => preserve_product(m, &mut rng),
                NullLevel::PreserveBoth => swap_rewire(m, spec.swaps_per_edge, &mut rng),
            }
        })
        .collect();
    Ok(NullSamples {
        samples,
        no_rewiring_possible: false,
    })
}

fn rebuild(m: &BipartiteMatrix, edges: BTreeSet<(usize, usize)>) -> BipartiteMatrix {
    BipartiteMatrix::from_parts_unchecked(m.countries().to_vec(), m.products().to_vec(), edges)
}

fn density_only<R: Rng>(m: &BipartiteMatrix, rng: &mut R) -> BipartiteMatrix {
    let np = m.n_products();
    let edges = index::sample(rng, m.n_countries() * np, m.n_edges())
        .into_iter()
        .map(|cell| (cell / np, cell % np))
        .collect();
    rebuild(m, edges)
}

fn preserve_country<R: Rng>(m: &BipartiteMatrix, rng: &mut R) -> BipartiteMatrix {
    let mut edges = BTreeSet::new();
    for (c, &k) in diversification(m).iter().enumerate() {
        for p in index::sample(rng, m.n_products(), k) {
            edges.insert((c, p));
        }
    }
    rebuild(m, edges)
}

fn preserve_product<R: Rng>(m: &BipartiteMatrix, rng: &mut R) -> BipartiteMatrix {
    let mut edges = BTreeSet::new();
    for (p, &k) in ubiquity(m).iter().enumerate() {
        for c in index::sample(rng, m.n_countries(), k) {
            edges.insert((c, p));
        }
    }
    rebuild(m, edges)
}

/// `swaps_per_edge * |E|` attempted double-edge swaps
/// `(c1,p1),(c2,p2) -> (c1,p2),(c2,p1)`, each rejected if it would create a
/// duplicate edge.
fn swap_rewire<R: Rng>(m: &BipartiteMatrix, swaps_per_edge: usize, rng: &mut R) -> BipartiteMatrix {
    let np = m.n_products();
    let mut edges: Vec<(usize, usize)> = m.edges().collect();
    let mut present = vec![false; m.n_countries() * np];
    for &(c, p) in &edges {
        present[c * np + p] = true;
    }
    let n = edges.len();
    for _ in 0..swaps_per_edge * n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let (c1, p1) = edges[i];
        let (c2, p2) = edges[j];
        if c1 == c2 || p1 == p2 || present[c1 * np + p2] || present[c2 * np + p1] {
            continue;
        }
        present[c1 * np + p1] = false;
        present[c2 * np + p2] = false;
        present[c1 * np + p2] = true;
        present[c2 * np + p1] = true;
        edges[i] = (c1, p2);
        edges[j] = (c2, p1);
    }
    rebuild(m, edges.into_iter().collect())
}

/// A swap exists iff two countries have incomparable product sets.
fn admits_swap(m: &BipartiteMatrix) -> bool {
    let rows: Vec<BTreeSet<usize>> = m
        .country_neighbors()
        .into_iter()
        .map(|v| v.into_iter().collect())
        .collect();
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            if !rows[a].is_subset(&rows[b]) && !rows[b].is_subset(&rows[a]) {
                return true;
            }
        }
    }
    false
}

/// Pearson correlation between diversification and mean product ubiquity
/// (`k_c0`, `k_c1`) over countries with at least one product.
pub fn kc0_kc1_correlation(m: &BipartiteMatrix) -> Option<f64> {
    let t = reflect(m, 1).ok()?;
    stats::pearson(t.country_level(0).ok()?, t.country_level(1).ok()?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullComparison {
    pub level: NullLevel,
    pub observed: f64,
    /// Statistic for each sample, in sample order. Samples where the
    /// statistic is undefined are `None`.
    pub null_statistics: Vec<Option<f64>>,
    pub null_mean: Option<f64>,
    pub null_stdev: Option<f64>,
    /// Fraction of defined null statistics `<= observed`.
    pub p_value: Option<f64>,
    pub degenerate_samples: usize,
    pub no_rewiring_possible: bool,
}

/// Compares the observed `corr(k_c0, k_c1)` with its distribution over null
/// samples. The p-value is one-sided towards more negative correlation.
pub fn null_comparison(m: &BipartiteMatrix, spec: &NullModelSpec) -> Result<NullComparison> {
    let observed = kc0_kc1_correlation(m).ok_or_else(|| {
        Error::Degenerate("corr(k_c0, k_c1) is undefined on the observed matrix".into())
    })?;
    let nulls = randomize(m, spec)?;
    let null_statistics: Vec<Option<f64>> =
        nulls.samples.par_iter().map(kc0_kc1_correlation).collect();
    let defined: Vec<f64> = null_statistics.iter().flatten().copied().collect();
    let (null_mean, null_stdev, p_value) = if defined.is_empty() {
        (None, None, None)
    } else {
        let below = defined.iter().filter(|&&s| s <= observed).count();
        (
            Some(stats::mean(&defined)),
            Some(stats::population_stdev(&defined)),
            Some(below as f64 / defined.len() as f64),
        )
    };
    Ok(NullComparison {
        level: spec.level,
        observed,
        degenerate_samples: null_statistics.len() - defined.len(),
        null_statistics,
        null_mean,
        null_stdev,
        p_value,
        no_rewiring_possible: nulls.no_rewiring_possible,
    })
}
