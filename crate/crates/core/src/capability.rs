//! The tripartite capability model.
//!
//! Countries hold capabilities (`C_ca`), products require capabilities
//! (`Π_pa`), and a country makes a product exactly when it holds every
//! capability the product requires. Entries are i.i.d. Bernoulli with
//! probability `r` for countries and `q` for products.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::BipartiteMatrix;
use crate::reflections::reflect;
use crate::rng;
use crate::stats;

/// Dense binary matrix with rows packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        self.bits[r * self.words_per_row + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let word = &mut self.bits[r * self.words_per_row + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn row_count(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Whether the set bits of row `r` are a subset of those of `other`'s
    /// row `s`.
    pub fn row_subset_of(&self, r: usize, other: &BitMatrix, s: usize) -> bool {
        self.row(r)
            .iter()
            .zip(other.row(s))
            .all(|(a, b)| a & !b == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_countries: usize,
    pub n_products: usize,
    pub n_capabilities: usize,
    /// Probability that a country holds a given capability.
    pub r: f64,
    /// Probability that a product requires a given capability.
    pub q: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_countries: 150,
            n_products: 1000,
            n_capabilities: 60,
            r: 0.7,
            q: 0.05,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("r", self.r), ("q", self.q)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.n_countries == 0 || self.n_products == 0 || self.n_capabilities == 0 {
            return Err(Error::InvalidArgument(
                "model dimensions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Probability that a country holding a fraction `r` of capabilities can
    /// make a random product: `(1 - q + q r)^A`.
    pub fn expected_density(&self) -> f64 {
        (1.0 - self.q + self.q * self.r).powi(self.n_capabilities as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityWorld {
    pub params: ModelParams,
    pub seed: u64,
    /// `C_ca`, countries x capabilities.
    pub country_capabilities: BitMatrix,
    /// `Π_pa`, products x capabilities.
    pub product_requirements: BitMatrix,
}

/// Samples a world from stream 0 of `seed`.
pub fn sample_world(params: ModelParams, seed: u64) -> Result<CapabilityWorld> {
    sample_world_stream(params, seed, 0)
}

/// Samples a world from stream `stream` of `seed`. Country rows are drawn
/// first, then product rows, each row-major.
pub fn sample_world_stream(params: ModelParams, seed: u64, stream: u64) -> Result<CapabilityWorld> {
    params.validate()?;
    let mut rng = rng::stream(seed, stream);
    let mut draw = |rows: usize, p: f64| {
        let mut m = BitMatrix::zeros(rows, params.n_capabilities);
        for i in 0..rows {
            for a in 0..params.n_capabilities {
                if rng.random_bool(p) {
                    m.set(i, a, true);
                }
            }
        }
        m
    };
    let country_capabilities = draw(params.n_countries, params.r);
    let product_requirements = draw(params.n_products, params.q);
    Ok(CapabilityWorld {
        params,
        seed,
        country_capabilities,
        product_requirements,
    })
}

pub fn country_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("C{i:0width$}")).collect()
}

pub fn product_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("P{i:0width$}")).collect()
}

/// `M_cp = 1` iff every capability product `p` requires is held by country `c`.
pub fn derive_matrix(world: &CapabilityWorld) -> BipartiteMatrix {
    let c = &world.country_capabilities;
    let p = &world.product_requirements;
    let mut edges = std::collections::BTreeSet::new();
    for ci in 0..c.rows() {
        for pi in 0..p.rows() {
            if p.row_subset_of(pi, c, ci) {
                edges.insert((ci, pi));
            }
        }
    }
    BipartiteMatrix::from_parts_unchecked(country_ids(c.rows()), product_ids(p.rows()), edges)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub replicate: usize,
    pub country: String,
    pub capability_count: usize,
    pub k_c0: f64,
    pub k_c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateSummary {
    pub replicate: usize,
    pub n_edges: usize,
    /// Countries dropped because they make nothing.
    pub excluded_countries: usize,
    /// Set when the replicate's matrix has no edges.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledCorrelations {
    pub n_points: usize,
    pub pearson_kc0_kc1: Option<f64>,
    pub spearman_capabilities_kc0: Option<f64>,
    pub spearman_capabilities_kc1: Option<f64>,
}

impl PooledCorrelations {
    /// True when any statistic is undefined because of zero variance.
    pub fn degenerate(&self) -> bool {
        self.pearson_kc0_kc1.is_none()
            || self.spearman_capabilities_kc0.is_none()
            || self.spearman_capabilities_kc1.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub params: ModelParams,
    pub seed: u64,
    pub rows: Vec<EnsembleRow>,
    pub replicates: Vec<ReplicateSummary>,
    pub pooled: PooledCorrelations,
}

/// Runs `n_replicates` independent worlds (replicate `i` uses stream `i` of
/// `seed`) and pools `(capability count, k_c0, k_c1)` over all producing
/// countries.
pub fn ensemble_statistics(
    params: ModelParams,
    n_replicates: usize,
    seed: u64,
) -> Result<EnsembleReport> {
    params.validate()?;
    if n_replicates == 0 {
        return Err(Error::InvalidArgument(
            "n_replicates must be at least 1".into(),
        ));
    }
    let results: Vec<(Vec<EnsembleRow>, ReplicateSummary)> = (0..n_replicates)
        .into_par_iter()
        .map(|i| run_replicate(params, seed, i))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut replicates = Vec::with_capacity(n_replicates);
    for (r, s) in results {
        rows.extend(r);
        replicates.push(s);
    }
    let caps: Vec<f64> = rows.iter().map(|r| r.capability_count as f64).collect();
    let k0: Vec<f64> = rows.iter().map(|r| r.k_c0).collect();
    let k1: Vec<f64> = rows.iter().map(|r| r.k_c1).collect();
    let pooled = PooledCorrelations {
        n_points: rows.len(),
        pearson_kc0_kc1: stats::pearson(&k0, &k1),
        spearman_capabilities_kc0: stats::spearman(&caps, &k0),
        spearman_capabilities_kc1: stats::spearman(&caps, &k1),
    };
    Ok(EnsembleReport {
        params,
        seed,
        rows,
        replicates,
        pooled,
    })
}

fn run_replicate(
    params: ModelParams,
    seed: u64,
    replicate: usize,
) -> Result<(Vec<EnsembleRow>, ReplicateSummary)> {
    let world = sample_world_stream(params, seed, replicate as u64)?;
    let m = derive_matrix(&world);
    if m.n_edges() == 0 {
        return Ok((
            Vec::new(),
            ReplicateSummary {
                replicate,
                n_edges: 0,
                excluded_countries: params.n_countries,
                degenerate: true,
            },
        ));
    }
    let t = reflect(&m, 1)?;
    let k0 = t.country_level(0)?;
    let k1 = t.country_level(1)?;
    let rows = t
        .countries()
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let ci = m
                .country_index(id)
                .expect("trajectory ids come from the matrix");
            EnsembleRow {
                replicate,
                country: id.clone(),
                capability_count: world.country_capabilities.row_count(ci),
                k_c0: k0[i],
                k_c1: k1[i],
            }
        })
        .collect();
    Ok((
        rows,
        ReplicateSummary {
            replicate,
            n_edges: m.n_edges(),
            excluded_countries: t.excluded_countries().len(),
            degenerate: false,
        },
    ))
}

/// A grid of model parameters. Every combination of the listed values is one
/// sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub replicates: usize,
    pub n_countries: Vec<usize>,
    pub n_products: Vec<usize>,
    pub n_capabilities: Vec<usize>,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

impl Default for SweepConfig {
    /// 3 x 3 grid of (r, q) around r = 0.7, q = 0.05 with 150 countries,
    /// 1000 products and 60 capabilities. Expected densities span roughly
    /// 0.18 to 0.55.
    fn default() -> Self {
        Self {
            seed: 20090630,
            replicates: 20,
            n_countries: vec![150],
            n_products: vec![1000],
            n_capabilities: vec![60],
            r: vec![0.6, 0.7, 0.8],
            q: vec![0.05, 0.06, 0.07],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub index: usize,
    pub params: ModelParams,
    pub seed: u64,
}

impl SweepConfig {
    /// Checks every parameter combination before anything is sampled.
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let lists = [
            ("n_countries", self.n_countries.len()),
            ("n_products", self.n_products.len()),
            ("n_capabilities", self.n_capabilities.len()),
            ("r", self.r.len()),
            ("q", self.q.len()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, n)| *n == 0) {
            return Err(Error::Config(format!(
                "{name} must list at least one value"
            )));
        }
        for cell in self.cells() {
            cell.params
                .validate()
                .map_err(|e| Error::Config(format!("cell {}: {e}", cell.index)))?;
        }
        Ok(())
    }

    /// Cells in row-major order over (n_countries, n_products,
    /// n_capabilities, r, q). Cell seeds derive from the master seed and the
    /// cell index.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells = Vec::new();
        for &n_countries in &self.n_countries {
            for &n_products in &self.n_products {
                for &n_capabilities in &self.n_capabilities {
                    for &r in &self.r {
                        for &q in &self.q {
                            let index = cells.len();
                            cells.push(SweepCell {
                                index,
                                params: ModelParams {
                                    n_countries,
                                    n_products,
                                    n_capabilities,
                                    r,
                                    q,
                                },
                                seed: rng::derive_seed(self.seed, index as u64),
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Runs every cell of a sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<(SweepCell, EnsembleReport)>> {
    config.validate()?;
    config
        .cells()
        .into_iter()
        .map(|cell| {
            Ok((
                cell,
                ensemble_statistics(cell.params, config.replicates, cell.seed)?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(r: f64, q: f64) -> ModelParams {
        ModelParams {
            n_countries: 12,
            n_products: 30,
            n_capabilities: 8,
            r,
            q,
        }
    }

    #[test]
    fn degenerate_probabilities() {
        let w = sample_world(small(1.0, 0.0), 3).unwrap();
        for c in 0..12 {
            assert_eq!(w.country_capabilities.row_count(c), 8);
        }
        for p in 0..30 {
            assert_eq!(w.product_requirements.row_count(p), 0);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(sample_world(small(1.1, 0.1), 0).is_err());
        assert!(sample_world(small(0.5, -0.1), 0).is_err());
        let mut p = small(0.5, 0.5);
        p.n_capabilities = 0;
        assert!(sample_world(p, 0).is_err());
    }

    #[test]
    fn same_seed_same_world() {
        let a = sample_world(small(0.5, 0.3), 99).unwrap();
        let b = sample_world(small(0.5, 0.3), 99).unwrap();
        assert_eq!(a, b);
        let c = sample_world(small(0.5, 0.3), 100).unwrap();
        assert_ne!(a, c);
    }

    fn world_from(c: &[&[usize]], p: &[&[usize]], n_caps: usize) -> CapabilityWorld {
        let fill = |sets: &[&[usize]]| {
            let mut m = BitMatrix::zeros(sets.len(), n_caps);
            for (i, s) in sets.iter().enumerate() {
                for &a in *s {
                    m.set(i, a, true);
                }
            }
            m
        };
        CapabilityWorld {
            params: ModelParams {
                n_countries: c.len(),
                n_products: p.len(),
                n_capabilities: n_caps,
                r: 0.5,
                q: 0.5,
            },
            seed: 0,
            country_capabilities: fill(c),
            product_requirements: fill(p),
        }
    }

    #[test]
    fn subset_rule() {
        // C_A = {a1}, C_B = {a1, a2}, product requires {a2}
        let w = world_from(&[&[0], &[0, 1]], &[&[1]], 2);
        let m = derive_matrix(&w);
        assert!(!m.has_edge(0, 0));
        assert!(m.has_edge(1, 0));
    }

    #[test]
    fn empty_requirement_is_universal_and_full_country_makes_all() {
        let w = world_from(&[&[], &[0, 1, 2]], &[&[], &[0, 2], &[1]], 3);
        let m = derive_matrix(&w);
        assert!(m.has_edge(0, 0));
        assert!(!m.has_edge(0, 1));
        assert!((0..3).all(|p| m.has_edge(1, p)));
    }

    #[test]
    fn adding_capability_never_removes_edges() {
        let mut w = sample_world(small(0.4, 0.3), 5).unwrap();
        for c in 0..12 {
            for a in 0..8 {
                if w.country_capabilities.get(c, a) {
                    continue;
                }
                let before = derive_matrix(&w);
                w.country_capabilities.set(c, a, true);
                let after = derive_matrix(&w);
                assert!(before.edges().all(|(x, y)| after.has_edge(x, y)));
                w.country_capabilities.set(c, a, false);
            }
        }
    }

    #[test]
    fn removing_requirement_never_removes_edges() {
        let mut w = sample_world(small(0.4, 0.3), 6).unwrap();
        for p in 0..30 {
            for a in 0..8 {
                if !w.product_requirements.get(p, a) {
                    continue;
                }
                let before = derive_matrix(&w);
                w.product_requirements.set(p, a, false);
                let after = derive_matrix(&w);
                assert!(before.edges().all(|(x, y)| after.has_edge(x, y)));
                w.product_requirements.set(p, a, true);
            }
        }
    }

    #[test]
    fn q_zero_is_flagged_degenerate() {
        let rep = ensemble_statistics(small(0.5, 0.0), 3, 1).unwrap();
        assert!(rep.pooled.pearson_kc0_kc1.is_none());
        assert!(rep.pooled.degenerate());
    }

    #[test]
    fn r_one_is_flagged_degenerate() {
        let rep = ensemble_statistics(small(1.0, 0.3), 3, 1).unwrap();
        assert!(rep.pooled.degenerate());
    }

    #[test]
    fn empty_replicate_is_flagged() {
        // nobody holds anything and every product needs everything
        let rep = ensemble_statistics(small(0.0, 1.0), 2, 1).unwrap();
        assert!(rep.replicates.iter().all(|r| r.degenerate));
        assert!(rep.rows.is_empty());
    }

    #[test]
    fn ensemble_is_order_independent() {
        let a = ensemble_statistics(small(0.6, 0.2), 6, 11).unwrap();
        let b = ensemble_statistics(small(0.6, 0.2), 6, 11).unwrap();
        assert_eq!(a, b);
        // replicate 4 on its own matches replicate 4 in the ensemble
        let (rows, _) = run_replicate(small(0.6, 0.2), 11, 4).unwrap();
        let from_ensemble: Vec<_> = a.rows.into_iter().filter(|r| r.replicate == 4).collect();
        assert_eq!(rows, from_ensemble);
    }

    #[test]
    fn sweep_validation_rejects_before_sampling() {
        let cfg = SweepConfig {
            r: vec![0.5, 1.5],
            ..SweepConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(run_sweep(&cfg).is_err());
        assert_eq!(SweepConfig::default().cells().len(), 9);
    }
}
