//! The method of reflections.
//!
//! Starting from the degrees, each level replaces a node's value with the
//! mean of its neighbours' values at the previous level:
//!
//! ```text
//! k_{c,N} = (1 / k_{c,0}) * sum_p M_cp k_{p,N-1}
//! k_{p,N} = (1 / k_{p,0}) * sum_c M_cp k_{c,N-1}
//! ```
//!
//! Even country levels are generalised measures of diversification, odd
//! levels generalised measures of the ubiquity of the country's products.
//! Zero-degree nodes are removed once, before iterating, and reported in
//! the trajectory.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{diversification, ubiquity, BipartiteMatrix};
use crate::stats;

/// Default iteration depth; the deepest pair used for growth prediction is
/// levels 18 and 19.
pub const DEFAULT_DEPTH: usize = 19;

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionTrajectory {
    countries: Vec<String>,
    products: Vec<String>,
    country_levels: Vec<Vec<f64>>,
    product_levels: Vec<Vec<f64>>,
    excluded_countries: Vec<String>,
    excluded_products: Vec<String>,
}

impl ReflectionTrajectory {
    /// Assembles a trajectory from precomputed levels. Every level must have
    /// one finite value per id and both sides the same number of levels.
    pub fn from_levels(
        countries: Vec<String>,
        products: Vec<String>,
        country_levels: Vec<Vec<f64>>,
        product_levels: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if country_levels.is_empty() || country_levels.len() != product_levels.len() {
            return Err(Error::InvalidArgument(
                "country and product levels must be nonempty and of equal depth".into(),
            ));
        }
        let ok = |levels: &[Vec<f64>], n: usize| {
            levels
                .iter()
                .all(|l| l.len() == n && l.iter().all(|v| v.is_finite()))
        };
        if !ok(&country_levels, countries.len()) || !ok(&product_levels, products.len()) {
            return Err(Error::InvalidArgument(
                "level vectors must be finite and match the id lists".into(),
            ));
        }
        Ok(Self {
            countries,
            products,
            country_levels,
            product_levels,
            excluded_countries: Vec::new(),
            excluded_products: Vec::new(),
        })
    }

    pub fn depth(&self) -> usize {
        self.country_levels.len() - 1
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    /// Country ids dropped before iterating because they had no products.
    pub fn excluded_countries(&self) -> &[String] {
        &self.excluded_countries
    }

    pub fn excluded_products(&self) -> &[String] {
        &self.excluded_products
    }

    pub fn country_level(&self, level: usize) -> Result<&[f64]> {
        self.country_levels
            .get(level)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level,
                depth: self.depth(),
            })
    }

    pub fn product_level(&self, level: usize) -> Result<&[f64]> {
        self.product_levels
            .get(level)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level,
                depth: self.depth(),
            })
    }

    pub fn country_levels(&self) -> &[Vec<f64>] {
        &self.country_levels
    }

    pub fn product_levels(&self) -> &[Vec<f64>] {
        &self.product_levels
    }

    /// `country id -> value` at a level.
    pub fn country_map(&self, level: usize) -> Result<BTreeMap<&str, f64>> {
        let values = self.country_level(level)?;
        Ok(self
            .countries
            .iter()
            .map(String::as_str)
            .zip(values.iter().copied())
            .collect())
    }

    pub fn product_map(&self, level: usize) -> Result<BTreeMap<&str, f64>> {
        let values = self.product_level(level)?;
        Ok(self
            .products
            .iter()
            .map(String::as_str)
            .zip(values.iter().copied())
            .collect())
    }
}

/// Runs the reflections to `depth` (level 0 is the degree vectors).
pub fn reflect(m: &BipartiteMatrix, depth: usize) -> Result<ReflectionTrajectory> {
    if m.n_edges() == 0 {
        return Err(Error::NothingToIterate);
    }
    let (core, excluded_countries, excluded_products) = m.without_isolates();
    let country_adj = core.country_neighbors();
    let product_adj = core.product_neighbors();

    let mut country_levels = Vec::with_capacity(depth + 1);
    let mut product_levels = Vec::with_capacity(depth + 1);
    country_levels.push(
        diversification(&core)
            .into_iter()
            .map(|k| k as f64)
            .collect(),
    );
    product_levels.push(ubiquity(&core).into_iter().map(|k| k as f64).collect());

    for n in 1..=depth {
        let prev_c: &Vec<f64> = &country_levels[n - 1];
        let prev_p: &Vec<f64> = &product_levels[n - 1];
        let next_c = neighbour_means(&country_adj, prev_p);
        let next_p = neighbour_means(&product_adj, prev_c);
        country_levels.push(next_c);
        product_levels.push(next_p);
    }

    Ok(ReflectionTrajectory {
        countries: core.countries().to_vec(),
        products: core.products().to_vec(),
        country_levels,
        product_levels,
        excluded_countries,
        excluded_products,
    })
}

fn neighbour_means(adj: &[Vec<usize>], values: &[f64]) -> Vec<f64> {
    adj.iter()
        .map(|nbrs| nbrs.iter().map(|&j| values[j]).sum::<f64>() / nbrs.len() as f64)
        .collect()
}

/// Z-scores of one country level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedScores {
    pub countries: Vec<String>,
    pub values: Vec<f64>,
    pub level: usize,
    pub mean_used: f64,
    pub stdev_used: f64,
}

/// Subtracts the mean and divides by the population standard deviation of
/// country level `level`.
pub fn normalize(trajectory: &ReflectionTrajectory, level: usize) -> Result<NormalizedScores> {
    let raw = trajectory.country_level(level)?;
    zscore(raw).map(|(values, mean, sd)| NormalizedScores {
        countries: trajectory.countries.clone(),
        values,
        level,
        mean_used: mean,
        stdev_used: sd,
    })
}

pub(crate) fn zscore(raw: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    if raw.len() < 2 || stats::is_constant(raw) {
        return Err(Error::Degenerate(
            "all values identical, standard deviation is zero".into(),
        ));
    }
    let mean = stats::mean(raw);
    let sd = stats::population_stdev(raw);
    Ok((raw.iter().map(|v| (v - mean) / sd).collect(), mean, sd))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub country: String,
    pub rank_a: f64,
    pub rank_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankShift {
    pub level_a: usize,
    pub level_b: usize,
    /// Spearman correlation between the two rankings.
    pub correlation: f64,
    pub rows: Vec<RankRow>,
}

/// Compares country rankings at two levels of the same parity. Rank 1 is the
/// largest value; ties get average ranks.
pub fn rank_shift(
    trajectory: &ReflectionTrajectory,
    level_a: usize,
    level_b: usize,
) -> Result<RankShift> {
    let a = trajectory.country_level(level_a)?;
    let b = trajectory.country_level(level_b)?;
    if level_a % 2 != level_b % 2 {
        return Err(Error::InvalidArgument(format!(
            "levels {level_a} and {level_b} differ in parity"
        )));
    }
    let correlation = stats::spearman(a, b).ok_or_else(|| {
        Error::Degenerate(format!(
            "ranking at level {level_a} or {level_b} is constant"
        ))
    })?;
    let ra = stats::average_ranks_descending(a);
    let rb = stats::average_ranks_descending(b);
    let rows = trajectory
        .countries
        .iter()
        .zip(ra.into_iter().zip(rb))
        .map(|(c, (rank_a, rank_b))| RankRow {
            country: c.clone(),
            rank_a,
            rank_b,
        })
        .collect();
    Ok(RankShift {
        level_a,
        level_b,
        correlation,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCorrelation {
    pub level: usize,
    /// `None` when either side has zero variance.
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalCorrelation {
    pub intersection: Vec<String>,
    /// Trajectory countries with no value in the series.
    pub missing_from_series: Vec<String>,
    pub log_transform: bool,
    pub levels: Vec<LevelCorrelation>,
}

impl ExternalCorrelation {
    pub fn n(&self) -> usize {
        self.intersection.len()
    }
}

/// Pearson correlation between an external per-country series (GDP,
/// population, ...) and each requested country level, on the countries
/// present in both.
pub fn correlate_external(
    trajectory: &ReflectionTrajectory,
    series: &BTreeMap<String, f64>,
    levels: &[usize],
    log_transform: bool,
) -> Result<ExternalCorrelation> {
    for &l in levels {
        trajectory.country_level(l)?;
    }
    let mut positions = Vec::new();
    let mut intersection = Vec::new();
    let mut missing = Vec::new();
    let mut ys = Vec::new();
    for (i, c) in trajectory.countries.iter().enumerate() {
        match series.get(c) {
            Some(&v) => {
                positions.push(i);
                intersection.push(c.clone());
                ys.push(v);
            }
            None => missing.push(c.clone()),
        }
    }
    if intersection.len() < 3 {
        return Err(Error::InsufficientOverlap {
            found: intersection.len(),
            needed: 3,
        });
    }
    if log_transform {
        if let Some((c, v)) = intersection.iter().zip(&ys).find(|(_, &v)| v <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "series value for {c} is {v}, cannot take log"
            )));
        }
        ys.iter_mut().for_each(|v| *v = v.ln());
    }
    let levels = levels
        .iter()
        .map(|&level| {
            let k = &trajectory.country_levels[level];
            let xs: Vec<f64> = positions.iter().map(|&i| k[i]).collect();
            LevelCorrelation {
                level,
                pearson: stats::pearson(&xs, &ys),
            }
        })
        .collect();
    Ok(ExternalCorrelation {
        intersection,
        missing_from_series: missing,
        log_transform,
        levels,
    })
}

/// Rebuilds level `level` from the random-walk operators and returns the
/// largest absolute difference from the trajectory, over countries and
/// products.
///
/// With `S_cp = M_cp / k_{c,0}` and `S_pc = M_cp / k_{p,0}` (both
/// row-stochastic), `W = S_cp S_pc` is the two-step country-to-country
/// transition matrix and
///
/// ```text
/// k_{c,2n}   = W^n k_{c,0}          k_{c,2n+1} = W^n S_cp k_{p,0}
/// k_{p,2n+1} = S_pc W^n k_{c,0}     k_{p,2n+2} = S_pc W^n S_cp k_{p,0}
/// ```
///
/// The operator powers are composed explicitly as dense matrices.
pub fn random_walk_check(
    m: &BipartiteMatrix,
    trajectory: &ReflectionTrajectory,
    level: usize,
) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidArgument(
            "random-walk check needs level >= 1".into(),
        ));
    }
    let target_c = trajectory.country_level(level)?;
    let target_p = trajectory.product_level(level)?;
    if m.n_edges() == 0 {
        return Err(Error::NothingToIterate);
    }
    let (core, _, _) = m.without_isolates();
    if core.countries() != trajectory.countries() || core.products() != trajectory.products() {
        return Err(Error::InvalidArgument(
            "trajectory was not computed from this matrix".into(),
        ));
    }
    let nc = core.n_countries();
    let np = core.n_products();
    let kc = diversification(&core);
    let kp = ubiquity(&core);

    let mut s_cp = Dense::zeros(nc, np);
    let mut s_pc = Dense::zeros(np, nc);
    for (c, p) in core.edges() {
        s_cp[(c, p)] = 1.0 / kc[c] as f64;
        s_pc[(p, c)] = 1.0 / kp[p] as f64;
    }
    let w = s_cp.matmul(&s_pc);
    let kc0: Vec<f64> = kc.iter().map(|&k| k as f64).collect();
    let kp0: Vec<f64> = kp.iter().map(|&k| k as f64).collect();

    let half = level / 2;
    let w_half = w.pow(half);
    let (country_op_vec, product_from) = if level.is_multiple_of(2) {
        // k_{c,2n} = W^n k_{c,0}; k_{p,2n} = S_pc W^{n-1} S_cp k_{p,0}
        let c = w_half.matvec(&kc0);
        let p = s_pc.matmul(&w.pow(half - 1)).matmul(&s_cp).matvec(&kp0);
        (c, p)
    } else {
        // k_{c,2n+1} = W^n S_cp k_{p,0}; k_{p,2n+1} = S_pc W^n k_{c,0}
        let c = w_half.matmul(&s_cp).matvec(&kp0);
        let p = s_pc.matmul(&w_half).matvec(&kc0);
        (c, p)
    };

    let diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    Ok(diff(&country_op_vec, target_c).max(diff(&product_from, target_p)))
}

/// Row-major dense matrix used only by the random-walk check.
#[derive(Debug, Clone)]
struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    fn pow(&self, n: usize) -> Dense {
        (0..n).fold(Dense::identity(self.rows), |acc, _| acc.matmul(self))
    }

    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for Dense {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Dense {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}
