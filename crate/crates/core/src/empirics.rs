//! Empirical analyses on top of the trade matrix: labour-input diversity of
//! export baskets, income correlations and growth regressions, concentration
//! baselines, and the structure of newly acquired exports.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{compute_rca, threshold_to_binary, BipartiteMatrix, ExportVolumeTable};
use crate::ols;
use crate::reflections::{reflect, ReflectionTrajectory};
use crate::stats;

/// A per-country quantity such as GDP per capita or population.
#[derive(Debug, Clone, PartialEq)]
pub struct CountrySeries {
    pub label: String,
    pub year: Option<i32>,
    pub values: BTreeMap<String, f64>,
}

impl CountrySeries {
    pub fn new(
        label: impl Into<String>,
        year: Option<i32>,
        values: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if let Some((c, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {v} for {c}"
            )));
        }
        Ok(Self {
            label: label.into(),
            year,
            values,
        })
    }

    fn require_positive(&self) -> Result<()> {
        match self.values.iter().find(|(_, &v)| v <= 0.0) {
            Some((c, v)) => Err(Error::InvalidArgument(format!(
                "{}: value for {c} is {v}, must be positive",
                self.label
            ))),
            None => Ok(()),
        }
    }
}

/// Attribute sets per product (for example, the employment categories a
/// product uses).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProductAttributeMap {
    attributes: BTreeMap<String, BTreeSet<String>>,
}

impl ProductAttributeMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, product: impl Into<String>, attribute: impl Into<String>) {
        self.attributes
            .entry(product.into())
            .or_default()
            .insert(attribute.into());
    }

    pub fn get(&self, product: &str) -> Option<&BTreeSet<String>> {
        self.attributes.get(product)
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

impl<P: Into<String>, A: Into<String>> FromIterator<(P, A)> for ProductAttributeMap {
    fn from_iter<I: IntoIterator<Item = (P, A)>>(iter: I) -> Self {
        let mut m = Self::new();
        for (p, a) in iter {
            m.insert(p, a);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryLaborDiversity {
    pub country: String,
    pub mean_attributes: f64,
    pub mapped_products: usize,
    pub exported_products: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaborDiversity {
    pub countries: Vec<CountryLaborDiversity>,
    /// Countries exporting no product with attributes.
    pub excluded: Vec<String>,
    /// Exported products with no attribute entry.
    pub unmapped_products: Vec<String>,
    /// Share of matrix edges whose product has attributes.
    pub coverage: f64,
    /// Pearson correlation of the mean attribute count with each country
    /// level of the trajectory; `None` where undefined.
    pub correlations: Vec<(usize, Option<f64>)>,
}

/// Mean number of attributes over each country's exported products that have
/// attribute data, correlated against every level of `trajectory`.
pub fn labor_diversity(
    m: &BipartiteMatrix,
    attrs: &ProductAttributeMap,
    trajectory: &ReflectionTrajectory,
) -> Result<LaborDiversity> {
    if m.n_edges() == 0 {
        return Err(Error::NoData);
    }
    let adj = m.country_neighbors();
    let mut countries = Vec::new();
    let mut excluded = Vec::new();
    let mut unmapped = BTreeSet::new();
    let mut mapped_edges = 0usize;
    for (c, products) in adj.iter().enumerate() {
        let sizes: Vec<usize> = products
            .iter()
            .filter_map(|&p| {
                let id = &m.products()[p];
                match attrs.get(id) {
                    Some(set) if !set.is_empty() => Some(set.len()),
                    _ => {
                        unmapped.insert(id.clone());
                        None
                    }
                }
            })
            .collect();
        mapped_edges += sizes.len();
        if sizes.is_empty() {
            excluded.push(m.countries()[c].clone());
            continue;
        }
        countries.push(CountryLaborDiversity {
            country: m.countries()[c].clone(),
            mean_attributes: sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
            mapped_products: sizes.len(),
            exported_products: products.len(),
        });
    }

    let by_country: BTreeMap<&str, f64> = countries
        .iter()
        .map(|c| (c.country.as_str(), c.mean_attributes))
        .collect();
    let correlations = (0..=trajectory.depth())
        .map(|level| {
            let k = trajectory.country_level(level)?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = trajectory
                .countries()
                .iter()
                .zip(k)
                .filter_map(|(c, &v)| by_country.get(c.as_str()).map(|&a| (v, a)))
                .unzip();
            Ok((level, stats::pearson(&xs, &ys)))
        })
        .collect::<Result<_>>()?;

    Ok(LaborDiversity {
        countries,
        excluded,
        unmapped_products: unmapped.into_iter().collect(),
        coverage: mapped_edges as f64 / m.n_edges() as f64,
        correlations,
    })
}

/// Options for [`growth_regression`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RegressionOptions {
    /// Use `ln GDP(t)` as the income regressor instead of the level.
    pub log_gdp: bool,
    /// Add one dummy per country (except the first) when pooling periods.
    pub country_dummies: bool,
}

/// Minimum number of countries shared by the GDP series and the trajectory.
pub const MIN_REGRESSION_OVERLAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub country: String,
    pub period: usize,
    pub observed: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub level: usize,
    pub column_names: Vec<String>,
    /// `[a, b1, b2, b3, dummies...]`.
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub r_squared: f64,
    pub n_observations: usize,
    pub predictions: Vec<Prediction>,
    /// Countries present in some input but not in all of them, per period.
    pub dropped: Vec<Vec<String>>,
    pub options: RegressionOptions,
}

impl RegressionResult {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    /// `(b1, b2, b3)`: income, `k_{c,N}`, `k_{c,N+1}`.
    pub fn slopes(&self) -> (f64, f64, f64) {
        (
            self.coefficients[1],
            self.coefficients[2],
            self.coefficients[3],
        )
    }
}

/// One growth window: income at the start and end, and the trajectory
/// measured at the start.
#[derive(Debug, Clone, Copy)]
pub struct GrowthPeriod<'a> {
    pub gdp_start: &'a CountrySeries,
    pub gdp_end: &'a CountrySeries,
    pub trajectory: &'a ReflectionTrajectory,
}

/// `ln(GDP(t+Δt) / GDP(t)) = a + b1 GDP(t) + b2 k_{c,N}(t) + b3 k_{c,N+1}(t)`
/// on the countries common to both GDP series and the trajectory.
pub fn growth_regression(
    gdp_t: &CountrySeries,
    gdp_t_plus: &CountrySeries,
    trajectory: &ReflectionTrajectory,
    level: usize,
    options: RegressionOptions,
) -> Result<RegressionResult> {
    pooled_growth_regression(
        &[GrowthPeriod {
            gdp_start: gdp_t,
            gdp_end: gdp_t_plus,
            trajectory,
        }],
        level,
        RegressionOptions {
            country_dummies: false,
            ..options
        },
    )
}

/// Stacks several growth windows into one regression, optionally with
/// country dummies. Standard errors are the plain OLS ones.
pub fn pooled_growth_regression(
    periods: &[GrowthPeriod<'_>],
    level: usize,
    options: RegressionOptions,
) -> Result<RegressionResult> {
    if periods.is_empty() {
        return Err(Error::NoData);
    }
    struct Obs {
        country: String,
        period: usize,
        growth: f64,
        income: f64,
        k_n: f64,
        k_n1: f64,
    }
    let mut obs = Vec::new();
    let mut dropped = Vec::new();
    for (pi, period) in periods.iter().enumerate() {
        period.gdp_start.require_positive()?;
        period.gdp_end.require_positive()?;
        let t = period.trajectory;
        if level + 1 > t.depth() {
            return Err(Error::LevelOutOfRange {
                level: level + 1,
                depth: t.depth(),
            });
        }
        let k_n = t.country_map(level)?;
        let k_n1 = t.country_map(level + 1)?;
        let start = &period.gdp_start.values;
        let end = &period.gdp_end.values;

        let all: BTreeSet<&str> = k_n
            .keys()
            .copied()
            .chain(start.keys().map(String::as_str))
            .chain(end.keys().map(String::as_str))
            .collect();
        let mut period_dropped = Vec::new();
        let mut kept = 0;
        for c in all {
            match (start.get(c), end.get(c), k_n.get(c)) {
                (Some(&g0), Some(&g1), Some(&kn)) => {
                    kept += 1;
                    obs.push(Obs {
                        country: c.to_owned(),
                        period: pi,
                        growth: (g1 / g0).ln(),
                        income: if options.log_gdp { g0.ln() } else { g0 },
                        k_n: kn,
                        k_n1: k_n1[c],
                    });
                }
                _ => period_dropped.push(c.to_owned()),
            }
        }
        if kept < MIN_REGRESSION_OVERLAP {
            return Err(Error::InsufficientOverlap {
                found: kept,
                needed: MIN_REGRESSION_OVERLAP,
            });
        }
        dropped.push(period_dropped);
    }

    let income_name = if options.log_gdp {
        "log_gdp_t"
    } else {
        "gdp_t"
    };
    let mut names = vec![
        "intercept".to_owned(),
        income_name.to_owned(),
        format!("k_c{level}"),
        format!("k_c{}", level + 1),
    ];
    let mut columns = vec![
        vec![1.0; obs.len()],
        obs.iter().map(|o| o.income).collect(),
        obs.iter().map(|o| o.k_n).collect(),
        obs.iter().map(|o| o.k_n1).collect(),
    ];
    if options.country_dummies {
        let countries: BTreeSet<&str> = obs.iter().map(|o| o.country.as_str()).collect();
        for c in countries.into_iter().skip(1) {
            names.push(format!("dummy_{c}"));
            columns.push(
                obs.iter()
                    .map(|o| if o.country == c { 1.0 } else { 0.0 })
                    .collect(),
            );
        }
    }
    let y: Vec<f64> = obs.iter().map(|o| o.growth).collect();
    let fit = ols::fit(&columns, &names, &y)?;

    let predictions = obs
        .iter()
        .zip(&fit.fitted)
        .map(|(o, &p)| Prediction {
            country: o.country.clone(),
            period: o.period,
            observed: o.growth,
            predicted: p,
        })
        .collect();
    Ok(RegressionResult {
        level,
        column_names: names,
        coefficients: fit.coefficients,
        standard_errors: fit.standard_errors,
        r_squared: fit.r_squared,
        n_observations: y.len(),
        predictions,
        dropped,
        options,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryConcentration {
    pub country: String,
    pub hhi: f64,
    pub entropy: f64,
    /// Products with nonzero exports.
    pub n_products: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineIndices {
    pub countries: Vec<CountryConcentration>,
    /// Countries with zero total exports.
    pub excluded: Vec<String>,
}

/// Herfindahl index `Σ s²` and Shannon entropy `-Σ s ln s` of each country's
/// export shares.
pub fn baseline_indices(table: &ExportVolumeTable) -> Result<BaselineIndices> {
    if table.is_empty() {
        return Err(Error::NoData);
    }
    let mut values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (c, _, v) in table.iter() {
        values.entry(c).or_default().push(v);
    }
    let mut countries = Vec::new();
    let mut excluded = Vec::new();
    for (c, xs) in values {
        let total: f64 = xs.iter().sum();
        if total <= 0.0 {
            excluded.push(c.to_owned());
            continue;
        }
        let mut hhi = 0.0;
        let mut entropy = 0.0;
        let mut n = 0;
        for x in xs.into_iter().filter(|&x| x > 0.0) {
            let s = x / total;
            hhi += s * s;
            entropy -= s * s.ln();
            n += 1;
        }
        countries.push(CountryConcentration {
            country: c.to_owned(),
            hhi,
            entropy: entropy.max(0.0),
            n_products: n,
        });
    }
    Ok(BaselineIndices {
        countries,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewExportOptions {
    /// A product is new for a country if its RCA was below this at t0 ...
    pub low_threshold: f64,
    /// ... and at least this at t1.
    pub high_threshold: f64,
    /// RCA threshold for the t0 matrix used to measure `k_p` and `k_c`.
    pub matrix_threshold: f64,
    /// Measure `k_{p,1}` without the focal country's own contribution.
    pub leave_one_out: bool,
}

impl Default for NewExportOptions {
    fn default() -> Self {
        Self {
            low_threshold: 0.1,
            high_threshold: 1.0,
            matrix_threshold: 1.0,
            leave_one_out: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryNewExports {
    pub country: String,
    pub k_c0: f64,
    pub k_c1: f64,
    pub new_products: Vec<String>,
    /// Mean `k_{p,0}` at t0 over the new products; products not exported by
    /// anyone at t0 contribute 0.
    pub mean_kp0: f64,
    /// Mean `k_{p,1}` at t0 over the new products that were exported by
    /// someone at t0. `None` when there are none.
    pub mean_kp1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewExportsReport {
    pub countries: Vec<CountryNewExports>,
    /// Countries in the t0 matrix with no new exports.
    pub no_new_exports: Vec<String>,
    /// Countries with new exports but no position in the t0 matrix.
    pub unmeasured: Vec<String>,
    pub options: NewExportOptions,
}

/// `(country, product)` pairs with RCA below `low` at t0 (absent counts as
/// 0) and at least `high` at t1.
pub fn new_export_pairs(
    rca_t0: &crate::matrix::RcaTable,
    rca_t1: &crate::matrix::RcaTable,
    low: f64,
    high: f64,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (c, p, v1) in rca_t1.iter() {
        let v0 = rca_t0.get(c, p).unwrap_or(0.0);
        if v0 < low && v1 >= high {
            out.entry(c.to_owned()).or_default().insert(p.to_owned());
        }
    }
    out
}

/// New exports between two snapshots and the t0 network position of each
/// country and of its new products.
pub fn new_exports(
    table_t0: &ExportVolumeTable,
    table_t1: &ExportVolumeTable,
    options: NewExportOptions,
) -> Result<NewExportsReport> {
    if options.low_threshold.partial_cmp(&options.high_threshold) != Some(std::cmp::Ordering::Less)
    {
        return Err(Error::InvalidArgument(format!(
            "low threshold {} must be below high threshold {}",
            options.low_threshold, options.high_threshold
        )));
    }
    let rca0 = compute_rca(table_t0)?;
    let rca1 = compute_rca(table_t1)?;
    let m0 = threshold_to_binary(&rca0, options.matrix_threshold)?;
    let t = reflect(&m0, 1)?;
    let kc0 = t.country_map(0)?;
    let kc1 = t.country_map(1)?;
    let kp0 = t.product_map(0)?;
    let kp1 = t.product_map(1)?;

    let pairs = new_export_pairs(&rca0, &rca1, options.low_threshold, options.high_threshold);

    let mut countries = Vec::new();
    let mut no_new = Vec::new();
    let mut unmeasured = Vec::new();
    let all_countries: BTreeSet<&str> = kc0
        .keys()
        .copied()
        .chain(pairs.keys().map(String::as_str))
        .collect();
    for c in all_countries {
        let new = pairs.get(c);
        let (Some(&k0), Some(&k1)) = (kc0.get(c), kc1.get(c)) else {
            if new.is_some() {
                unmeasured.push(c.to_owned());
            }
            continue;
        };
        let Some(new) = new else {
            no_new.push(c.to_owned());
            continue;
        };
        let ci = m0.country_index(c);
        let mut kp0_sum = 0.0;
        let mut kp1_vals = Vec::new();
        for p in new {
            let Some(&u) = kp0.get(p.as_str()) else {
                continue;
            };
            kp0_sum += u;
            let mut v = kp1[p.as_str()];
            let focal_exports = match (ci, m0.product_index(p)) {
                (Some(ci), Some(pi)) => m0.has_edge(ci, pi),
                _ => false,
            };
            if options.leave_one_out && focal_exports {
                // drop the focal country's k_c0 from the neighbour mean
                v = if u > 1.0 {
                    (v * u - k0) / (u - 1.0)
                } else {
                    f64::NAN
                };
            }
            if v.is_finite() {
                kp1_vals.push(v);
            }
        }
        countries.push(CountryNewExports {
            country: c.to_owned(),
            k_c0: k0,
            k_c1: k1,
            new_products: new.iter().cloned().collect(),
            mean_kp0: kp0_sum / new.len() as f64,
            mean_kp1: (!kp1_vals.is_empty()).then(|| stats::mean(&kp1_vals)),
        });
    }
    Ok(NewExportsReport {
        countries,
        no_new_exports: no_new,
        unmeasured,
        options,
    })
}
