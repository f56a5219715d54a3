//! Trade tables, revealed comparative advantage, and the binary
//! country-product matrix built from them.
//!
//! Country and product codes are opaque strings. Every index list is kept in
//! lexicographic order so that a table always produces the same matrix layout.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Export values `x_cp` for a single year.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportVolumeTable {
    year: i32,
    entries: BTreeMap<(String, String), f64>,
}

impl ExportVolumeTable {
    pub fn new(year: i32) -> Self {
        Self {
            year,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a table from `(country, product, value)` triples.
    pub fn from_entries<I, C, P>(year: i32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, P, f64)>,
        C: Into<String>,
        P: Into<String>,
    {
        let mut table = Self::new(year);
        for (c, p, v) in entries {
            table.insert(c, p, v)?;
        }
        Ok(table)
    }

    /// Adds one cell. Values must be finite and non-negative and each
    /// `(country, product)` pair may appear once.
    pub fn insert(
        &mut self,
        country: impl Into<String>,
        product: impl Into<String>,
        value: f64,
    ) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "export value must be finite and non-negative, got {value}"
            )));
        }
        let key = (country.into(), product.into());
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateEntry {
                country: key.0,
                product: key.1,
                year: self.year,
            });
        }
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, country: &str, product: &str) -> Option<f64> {
        self.entries
            .get(&(country.to_owned(), product.to_owned()))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries
            .iter()
            .map(|((c, p), v)| (c.as_str(), p.as_str(), *v))
    }

    pub fn countries(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.entries.keys().map(|(c, _)| c).collect();
        set.into_iter().cloned().collect()
    }

    pub fn products(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.entries.keys().map(|(_, p)| p).collect();
        set.into_iter().cloned().collect()
    }

    /// Total exports per country.
    pub fn country_totals(&self) -> BTreeMap<String, f64> {
        let mut totals = BTreeMap::new();
        for ((c, _), v) in &self.entries {
            *totals.entry(c.clone()).or_insert(0.0) += v;
        }
        totals
    }

    /// Total world exports per product.
    pub fn product_totals(&self) -> BTreeMap<String, f64> {
        let mut totals = BTreeMap::new();
        for ((_, p), v) in &self.entries {
            *totals.entry(p.clone()).or_insert(0.0) += v;
        }
        totals
    }

    pub fn world_total(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Revealed comparative advantage for every cell of an [`ExportVolumeTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct RcaTable {
    year: i32,
    countries: Vec<String>,
    products: Vec<String>,
    values: BTreeMap<(String, String), f64>,
}

impl RcaTable {
    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    /// RCA of a cell. Cells absent from the source table have no entry.
    pub fn get(&self, country: &str, product: &str) -> Option<f64> {
        self.values
            .get(&(country.to_owned(), product.to_owned()))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.values
            .iter()
            .map(|((c, p), v)| (c.as_str(), p.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `RCA_cp = (x_cp / X_c) / (X_p / X)`.
///
/// Cells with `x_cp = 0`, and every cell of a country with zero total
/// exports, get RCA 0.
pub fn compute_rca(table: &ExportVolumeTable) -> Result<RcaTable> {
    if table.is_empty() {
        return Err(Error::NoData);
    }
    let world = table.world_total();
    if world <= 0.0 {
        return Err(Error::ZeroWorldTotal);
    }
    let country_totals = table.country_totals();
    let product_totals = table.product_totals();

    let values = table
        .entries
        .iter()
        .map(|((c, p), &x)| {
            let xc = country_totals[c];
            let xp = product_totals[p];
            let rca = if x == 0.0 || xc == 0.0 {
                0.0
            } else {
                (x / xc) / (xp / world)
            };
            ((c.clone(), p.clone()), rca)
        })
        .collect();

    Ok(RcaTable {
        year: table.year,
        countries: table.countries(),
        products: table.products(),
        values,
    })
}

/// Binary country-product adjacency `M_cp`.
///
/// Countries or products with no edges stay in the index; see
/// [`BipartiteMatrix::isolated_countries`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMatrix {
    countries: Vec<String>,
    products: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl BipartiteMatrix {
    /// Validates ids and edge indices. Duplicate ids, out-of-bounds indices
    /// and repeated edges are rejected.
    pub fn new<I>(countries: Vec<String>, products: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        check_unique(&countries, "country")?;
        check_unique(&products, "product")?;
        let mut set = BTreeSet::new();
        for (c, p) in edges {
            if c >= countries.len() || p >= products.len() {
                return Err(Error::InvalidMatrix(format!(
                    "edge ({c}, {p}) outside {}x{}",
                    countries.len(),
                    products.len()
                )));
            }
            if !set.insert((c, p)) {
                return Err(Error::InvalidMatrix(format!("duplicate edge ({c}, {p})")));
            }
        }
        Ok(Self {
            countries,
            products,
            edges: set,
        })
    }

    /// Builds a matrix from a dense row-major boolean grid with generated ids
    /// `c0..` and `p0..`.
    pub fn from_dense(rows: &[Vec<bool>]) -> Result<Self> {
        let n_products = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_products) {
            return Err(Error::InvalidMatrix("ragged dense matrix".into()));
        }
        let countries = (0..rows.len()).map(|i| format!("c{i}")).collect();
        let products = (0..n_products).map(|j| format!("p{j}")).collect();
        let edges = rows.iter().enumerate().flat_map(|(c, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(move |(p, _)| (c, p))
        });
        Self::new(countries, products, edges)
    }

    pub(crate) fn from_parts_unchecked(
        countries: Vec<String>,
        products: Vec<String>,
        edges: BTreeSet<(usize, usize)>,
    ) -> Self {
        Self {
            countries,
            products,
            edges,
        }
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }

    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }

    pub fn n_products(&self) -> usize {
        self.products.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, country: usize, product: usize) -> bool {
        self.edges.contains(&(country, product))
    }

    pub fn country_index(&self, id: &str) -> Option<usize> {
        self.countries.iter().position(|c| c == id)
    }

    pub fn product_index(&self, id: &str) -> Option<usize> {
        self.products.iter().position(|p| p == id)
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let mut rows = vec![vec![false; self.n_products()]; self.n_countries()];
        for &(c, p) in &self.edges {
            rows[c][p] = true;
        }
        rows
    }

    /// Product indices per country, ascending.
    pub fn country_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_countries()];
        for &(c, p) in &self.edges {
            adj[c].push(p);
        }
        adj
    }

    /// Country indices per product, ascending.
    pub fn product_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_products()];
        for &(c, p) in &self.edges {
            adj[p].push(c);
        }
        adj
    }

    /// Indices of countries with no edges.
    pub fn isolated_countries(&self) -> Vec<usize> {
        zero_positions(&diversification(self))
    }

    /// Indices of products with no edges.
    pub fn isolated_products(&self) -> Vec<usize> {
        zero_positions(&ubiquity(self))
    }

    /// Drops zero-degree countries and products. Returns the reduced matrix
    /// with the excluded country and product ids.
    pub fn without_isolates(&self) -> (BipartiteMatrix, Vec<String>, Vec<String>) {
        let kc = diversification(self);
        let kp = ubiquity(self);
        let (country_map, countries, dropped_c) = compact(&self.countries, &kc);
        let (product_map, products, dropped_p) = compact(&self.products, &kp);
        let edges = self
            .edges
            .iter()
            .map(|&(c, p)| (country_map[c].unwrap(), product_map[p].unwrap()))
            .collect();
        (
            BipartiteMatrix::from_parts_unchecked(countries, products, edges),
            dropped_c,
            dropped_p,
        )
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::InvalidMatrix(format!("duplicate {what} id {id:?}")));
        }
    }
    Ok(())
}

fn zero_positions(degrees: &[usize]) -> Vec<usize> {
    degrees
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| i)
        .collect()
}

fn compact(ids: &[String], degrees: &[usize]) -> (Vec<Option<usize>>, Vec<String>, Vec<String>) {
    let mut map = Vec::with_capacity(ids.len());
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (id, &d) in ids.iter().zip(degrees) {
        if d > 0 {
            map.push(Some(kept.len()));
            kept.push(id.clone());
        } else {
            map.push(None);
            dropped.push(id.clone());
        }
    }
    (map, kept, dropped)
}

/// Binary matrix from an RCA table: an edge wherever `RCA >= threshold`.
pub fn threshold_to_binary(rca: &RcaTable, threshold: f64) -> Result<BipartiteMatrix> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let country_pos: BTreeMap<&str, usize> = rca
        .countries
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let product_pos: BTreeMap<&str, usize> = rca
        .products
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let edges = rca
        .values
        .iter()
        .filter(|(_, &v)| v >= threshold)
        .map(|((c, p), _)| (country_pos[c.as_str()], product_pos[p.as_str()]))
        .collect();
    Ok(BipartiteMatrix::from_parts_unchecked(
        rca.countries.clone(),
        rca.products.clone(),
        edges,
    ))
}

/// `k_{c,0}`: number of products each country exports.
pub fn diversification(m: &BipartiteMatrix) -> Vec<usize> {
    let mut k = vec![0; m.n_countries()];
    for (c, _) in m.edges() {
        k[c] += 1;
    }
    k
}

/// `k_{p,0}`: number of countries exporting each product.
pub fn ubiquity(m: &BipartiteMatrix) -> Vec<usize> {
    let mut k = vec![0; m.n_products()];
    for (_, p) in m.edges() {
        k[p] += 1;
    }
    k
}

/// Dimensions and isolates of a matrix, as recorded in artifact sidecars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub n_countries: usize,
    pub n_products: usize,
    pub n_edges: usize,
    pub isolated_countries: Vec<String>,
    pub isolated_products: Vec<String>,
}

impl From<&BipartiteMatrix> for MatrixSummary {
    fn from(m: &BipartiteMatrix) -> Self {
        Self {
            n_countries: m.n_countries(),
            n_products: m.n_products(),
            n_edges: m.n_edges(),
            isolated_countries: m
                .isolated_countries()
                .into_iter()
                .map(|i| m.countries[i].clone())
                .collect(),
            isolated_products: m
                .isolated_products()
                .into_iter()
                .map(|i| m.products[i].clone())
                .collect(),
        }
    }
}
