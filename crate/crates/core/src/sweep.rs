//! Sweeps over levels and (m, n) pairs, and report emission.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::berezin::{delta_estimate_detailed, DeltaOptions};
use crate::bridge::{gamma_estimates, GammaOptions};
use crate::distance::{
    hausdorff_estimate, prox_upper_bound, HausdorffEstimate, HausdorffOptions, LevelConstants,
    PairContext, ProxReport,
};
use crate::error::{ProxError, Result};
use crate::exec;
use crate::group_rep::{make_irrep, sphere_grid, Irrep, QuadratureGrid};

/// Desk-scale cap on levels.
pub const MAX_LEVEL: usize = 16;

/// Slack allowed between the empirical estimate and the certified bound.
pub const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Explicit pairs; `None` means every m ≤ n in the range.
    pub pairs: Option<Vec<(usize, usize)>>,
    /// Added to the largest degree a quadrature must integrate.
    pub quadrature_margin: usize,
    pub family_size: usize,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Random starts of the δ̂ ascent beyond the isotypic ones.
    pub delta_trials: usize,
    /// Wall-clock budget; pairs not started in time are dropped.
    pub time_limit_secs: Option<f64>,
    pub output_path: Option<String>,
    pub format: Format,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 8,
            pairs: Some(vec![(2, 2), (4, 4), (8, 8)]),
            quadrature_margin: 2,
            family_size: 64,
            samples: 32,
            seed: 0,
            epsilon: 0.05,
            delta_trials: 4,
            time_limit_secs: None,
            output_path: None,
            format: Format::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ProxError::InvalidParameter(msg));
        if !(1 <= self.n_min && self.n_min <= self.n_max && self.n_max <= MAX_LEVEL) {
            return bad(format!(
                "need 1 ≤ n_min ≤ n_max ≤ {MAX_LEVEL}, got {}..{}",
                self.n_min, self.n_max
            ));
        }
        if let Some(pairs) = &self.pairs {
            if pairs.is_empty() {
                return bad("pair list is empty".into());
            }
            for &(m, n) in pairs {
                if !(self.n_min..=self.n_max).contains(&m)
                    || !(self.n_min..=self.n_max).contains(&n)
                {
                    return bad(format!("pair ({m}, {n}) lies outside the level range"));
                }
            }
        }
        if self.family_size == 0 || self.samples == 0 || self.delta_trials == 0 {
            return bad("family size, samples and trials must be positive".into());
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        Ok(())
    }

    /// Pairs in lexicographic order without duplicates.
    pub fn pair_list(&self) -> Vec<(usize, usize)> {
        let mut pairs = match &self.pairs {
            Some(p) => p.clone(),
            None => (self.n_min..=self.n_max)
                .flat_map(|m| (m..=self.n_max).map(move |n| (m, n)))
                .collect(),
        };
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub fn constants_options(&self) -> ConstantsOptions {
        ConstantsOptions {
            quadrature_margin: self.quadrature_margin,
            family_size: self.family_size,
            delta_trials: self.delta_trials,
            seed: self.seed,
        }
    }
}

/// Settings for the per-level constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsOptions {
    pub quadrature_margin: usize,
    pub family_size: usize,
    pub delta_trials: usize,
    pub seed: u64,
}

impl Default for ConstantsOptions {
    fn default() -> Self {
        SweepConfig::default().constants_options()
    }
}

/// δ̂_n, γ̂^A_n and γ̂^B_n on quadratures exact to degree 2n + margin.
pub fn level_constants(n: usize, opts: &ConstantsOptions) -> Result<LevelConstants> {
    let delta = delta_estimate_detailed(
        n,
        DeltaOptions {
            trials: opts.delta_trials,
            seed: opts.seed,
            quadrature_margin: opts.quadrature_margin,
            ..Default::default()
        },
    )?;
    let grid = Arc::new(sphere_grid(2 * n + opts.quadrature_margin)?);
    let gamma = gamma_estimates(
        n,
        &grid,
        &GammaOptions {
            family_size: opts.family_size,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    Ok(LevelConstants {
        n,
        delta: delta.value,
        gamma_a: gamma.gamma_a,
        gamma_b: gamma.gamma_b,
    })
}

/// Distances of one pair, split by the side the sampled state starts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck {
    pub m: usize,
    pub n: usize,
    pub estimate: (f64, f64),
    /// δ̂ of the starting level plus γ̂_m + γ̂_n.
    pub limit: (f64, f64),
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.estimate.0 <= self.limit.0 + CONSISTENCY_TOL
            && self.estimate.1 <= self.limit.1 + CONSISTENCY_TOL
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub reports: Vec<ProxReport>,
    pub constants: BTreeMap<usize, LevelConstants>,
    pub chain: Vec<ChainCheck>,
    /// Some pairs were dropped by the time limit.
    pub truncated: bool,
    /// How many level constants were computed.
    pub constant_evaluations: usize,
}

impl SweepOutput {
    /// Pairs whose empirical estimate exceeds the certified bound.
    pub fn violations(&self) -> Vec<(usize, usize)> {
        self.reports
            .iter()
            .filter(|r| r.empirical_hausdorff > r.certified_bound + CONSISTENCY_TOL)
            .map(|r| (r.m, r.n))
            .chain(self.chain.iter().filter(|c| !c.holds()).map(|c| (c.m, c.n)))
            .collect()
    }
}

#[derive(Default)]
struct Caches {
    irreps: Mutex<BTreeMap<usize, Arc<Irrep>>>,
    grids: Mutex<BTreeMap<usize, Arc<QuadratureGrid>>>,
}

impl Caches {
    fn irrep(&self, n: usize) -> Result<Arc<Irrep>> {
        if let Some(r) = self.irreps.lock().expect("cache lock").get(&n) {
            return Ok(r.clone());
        }
        let r = Arc::new(make_irrep(n)?);
        Ok(self
            .irreps
            .lock()
            .expect("cache lock")
            .entry(n)
            .or_insert(r)
            .clone())
    }

    fn grid(&self, degree: usize) -> Result<Arc<QuadratureGrid>> {
        if let Some(g) = self.grids.lock().expect("cache lock").get(&degree) {
            return Ok(g.clone());
        }
        let g = Arc::new(sphere_grid(degree)?);
        Ok(self
            .grids
            .lock()
            .expect("cache lock")
            .entry(degree)
            .or_insert(g)
            .clone())
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let start = Instant::now();
    let budget = config.time_limit_secs.map(Duration::from_secs_f64);
    let counter = AtomicUsize::new(0);
    let levels: Vec<usize> = (config.n_min..=config.n_max).collect();
    let opts = config.constants_options();
    let computed = exec::map_slice(&levels, |&n| {
        counter.fetch_add(1, Ordering::Relaxed);
        level_constants(n, &opts)
    });
    let mut constants = BTreeMap::new();
    for c in computed {
        let c = c?;
        constants.insert(c.n, c);
    }

    let caches = Caches::default();
    let pairs = config.pair_list();
    let results = exec::map_slice(
        &pairs,
        |&(m, n)| -> Result<Option<(ProxReport, ChainCheck)>> {
            if budget.is_some_and(|b| start.elapsed() > b) {
                return Ok(None);
            }
            let mut report = prox_upper_bound(m, n, &constants)?;
            let degree = m + n + config.quadrature_margin;
            let ctx =
                PairContext::with_irreps(caches.irrep(m)?, caches.irrep(n)?, caches.grid(degree)?)?;
            let l = ctx.seminorm(report.gamma_used)?;
            let HausdorffEstimate {
                value,
                from_m,
                from_n,
            } = hausdorff_estimate(
                &ctx,
                &l,
                &HausdorffOptions {
                    samples: config.samples,
                    seed: config.seed,
                    ..Default::default()
                },
            )?;
            report.empirical_hausdorff = value;
            report.seed = config.seed;
            report.exact_degree = degree;
            let chain = ChainCheck {
                m,
                n,
                estimate: (from_m, from_n),
                limit: (
                    report.delta_m + report.gamma_used,
                    report.delta_n + report.gamma_used,
                ),
            };
            Ok(Some((report, chain)))
        },
    );
    let mut reports = Vec::new();
    let mut chain = Vec::new();
    let mut truncated = false;
    for r in results {
        match r? {
            Some((rep, c)) => {
                reports.push(rep);
                chain.push(c);
            }
            None => truncated = true,
        }
    }
    Ok(SweepOutput {
        reports,
        constants,
        chain,
        truncated,
        constant_evaluations: counter.into_inner(),
    })
}

/// One CSV row; the column order is part of the output format.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct CsvRow {
    m: usize,
    n: usize,
    d_m: usize,
    d_n: usize,
    delta_m: f64,
    delta_n: f64,
    #[serde(rename = "gammaA_m")]
    gamma_a_m: f64,
    #[serde(rename = "gammaB_m")]
    gamma_b_m: f64,
    #[serde(rename = "gammaA_n")]
    gamma_a_n: f64,
    #[serde(rename = "gammaB_n")]
    gamma_b_n: f64,
    gamma_used: f64,
    certified_bound: f64,
    empirical_hausdorff: f64,
    seed: u64,
}

impl From<&ProxReport> for CsvRow {
    fn from(r: &ProxReport) -> Self {
        Self {
            m: r.m,
            n: r.n,
            d_m: r.d_m,
            d_n: r.d_n,
            delta_m: r.delta_m,
            delta_n: r.delta_n,
            gamma_a_m: r.gamma_a_m,
            gamma_b_m: r.gamma_b_m,
            gamma_a_n: r.gamma_a_n,
            gamma_b_n: r.gamma_b_n,
            gamma_used: r.gamma_used,
            certified_bound: r.certified_bound,
            empirical_hausdorff: r.empirical_hausdorff,
            seed: r.seed,
        }
    }
}

pub const CSV_HEADER: &str = "m,n,d_m,d_n,delta_m,delta_n,gammaA_m,gammaB_m,gammaA_n,gammaB_n,gamma_used,certified_bound,empirical_hausdorff,seed";

/// The JSON document: the reports plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub version: String,
    pub config: SweepConfig,
    pub truncated: bool,
    pub reports: Vec<ProxReport>,
}

impl SweepDocument {
    pub fn new(config: &SweepConfig, output: &SweepOutput) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            truncated: output.truncated,
            reports: output.reports.clone(),
        }
    }
}

pub fn write_csv<W: Write>(reports: &[ProxReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(doc: &SweepDocument, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `doc.reports` to `path` as CSV or as the full JSON document.
pub fn emit_report(doc: &SweepDocument, format: Format, path: &Path) -> Result<()> {
    if doc.reports.is_empty() {
        return Err(ProxError::InvalidParameter("no reports to write".into()));
    }
    let file = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(&doc.reports, file),
        Format::Json => write_json(doc, file),
    }
}

/// Reads back a CSV written by [`write_csv`]; grid metadata is not stored
/// there and comes back as 0.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ProxReport>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(ProxReport {
                m: row.m,
                n: row.n,
                d_m: row.d_m,
                d_n: row.d_n,
                delta_m: row.delta_m,
                delta_n: row.delta_n,
                gamma_a_m: row.gamma_a_m,
                gamma_b_m: row.gamma_b_m,
                gamma_a_n: row.gamma_a_n,
                gamma_b_n: row.gamma_b_n,
                gamma_used: row.gamma_used,
                certified_bound: row.certified_bound,
                empirical_hausdorff: row.empirical_hausdorff,
                seed: row.seed,
                exact_degree: 0,
            })
        })
        .collect()
}
