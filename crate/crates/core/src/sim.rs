//! Seeded Monte-Carlo risk engine: estimator risks, percentage risk
//! improvement (PRI) tables, confidence-interval coverage and the data
//! series behind the comparison figures.
//!
//! Reproducibility contract: replication r of a run seeded with `seed`
//! always draws from the substream `mix(seed, r)`, and per-replication
//! losses are reduced block-by-block (fixed block size, pairwise sums)
//! in index order. Results are therefore byte-identical across runs and
//! across thread counts, while cells and blocks still execute in
//! parallel.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{baee_risk_closed_form, EstimatorKind, Method};
use crate::model::{sample, summarize, theta, EntropicConfig, PopulationParams, SummaryStats};
use crate::rng::mix;

/// Replications per reduction block; fixed so that the floating-point
/// summation tree does not depend on the thread count.
const BLOCK: usize = 4096;

/// Deterministic pairwise summation.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Monte-Carlo risk of one estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub kind: EstimatorKind,
    /// Mean of the per-replication quadratic losses (δ/Θ − 1)².
    pub risk_mean: f64,
    /// Sample standard deviation of the losses divided by √M.
    pub std_error: f64,
    pub replications: usize,
    pub seed: u64,
}

/// One cell of a PRI table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriCell {
    pub u: Vec<f64>,
    pub q: f64,
    pub n: usize,
    pub pri_stein: f64,
    pub pri_bz: f64,
    pub baseline_risk: f64,
}

/// Cartesian experiment grid over (u, q, n) at fixed k and σ.
#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    k: usize,
    u_values: Vec<Vec<f64>>,
    q_values: Vec<f64>,
    n_values: Vec<usize>,
    sigma: f64,
    replications: usize,
    base_seed: u64,
}

impl ExperimentGrid {
    pub fn new(
        k: usize,
        u_values: Vec<Vec<f64>>,
        q_values: Vec<f64>,
        n_values: Vec<usize>,
        sigma: f64,
        replications: usize,
        base_seed: u64,
    ) -> Result<Self> {
        if replications < 1000 {
            return Err(Error::Domain(format!(
                "replications must satisfy M >= 1000, got {replications}"
            )));
        }
        if u_values.is_empty() || q_values.is_empty() || n_values.is_empty() {
            return Err(Error::Domain("grid axes must be non-empty".into()));
        }
        for u in &u_values {
            if u.len() != k {
                return Err(Error::Domain(format!(
                    "location vector {u:?} has length {}, expected k = {k}",
                    u.len()
                )));
            }
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "sigma must satisfy sigma > 0, got {sigma}"
            )));
        }
        // Reject invalid (n, q) pairs at construction.
        for &n in &n_values {
            for &q in &q_values {
                EntropicConfig::new(k, n, q)?;
            }
        }
        Ok(Self {
            k,
            u_values,
            q_values,
            n_values,
            sigma,
            replications,
            base_seed,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.u_values.len() * self.q_values.len() * self.n_values.len()
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }
}

/// Runs `evals` on common random samples: replication r uses substream
/// `mix(seed, r)`, and every evaluator sees the same statistics. Returns
/// (mean, standard error) per evaluator.
fn mc_engine<E>(
    cfg: &EntropicConfig,
    params: &PopulationParams,
    m: usize,
    seed: u64,
    evals: &[E],
) -> Result<Vec<(f64, f64)>>
where
    E: Fn(&SummaryStats) -> Result<f64> + Sync,
{
    let true_theta = theta(cfg, params.sigma())?;
    let n_blocks = m.div_ceil(BLOCK);
    let blocks: Result<Vec<Vec<(f64, f64)>>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = ((b + 1) * BLOCK).min(m);
            let mut losses: Vec<Vec<f64>> = vec![Vec::with_capacity(end - start); evals.len()];
            for rep in start..end {
                let data = sample(cfg, params, mix(seed, rep as u64))?;
                let stats = summarize(&data).map_err(|e| match e {
                    Error::DegenerateSample(msg) => {
                        Error::DegenerateSample(format!("replication {rep}: {msg}"))
                    }
                    other => other,
                })?;
                for (slot, eval) in losses.iter_mut().zip(evals) {
                    let rel = eval(&stats)? / true_theta - 1.0;
                    slot.push(rel * rel);
                }
            }
            Ok(losses
                .iter()
                .map(|l| {
                    let squares: Vec<f64> = l.iter().map(|x| x * x).collect();
                    (pairwise_sum(l), pairwise_sum(&squares))
                })
                .collect())
        })
        .collect();
    let blocks = blocks?;

    let mf = m as f64;
    Ok((0..evals.len())
        .map(|ei| {
            let sums: Vec<f64> = blocks.iter().map(|b| b[ei].0).collect();
            let sums_sq: Vec<f64> = blocks.iter().map(|b| b[ei].1).collect();
            let total = pairwise_sum(&sums);
            let total_sq = pairwise_sum(&sums_sq);
            let mean = total / mf;
            let var = ((total_sq - mf * mean * mean) / (mf - 1.0)).max(0.0);
            (mean, (var / mf).sqrt())
        })
        .collect())
}

fn check_replications(m: usize) -> Result<()> {
    if m < 1000 {
        return Err(Error::Domain(format!(
            "replications must satisfy M >= 1000, got {m}"
        )));
    }
    Ok(())
}

/// Monte-Carlo risk of a single estimator under quadratic loss.
pub fn mc_risk(
    cfg: &EntropicConfig,
    params: &PopulationParams,
    method: &Method,
    m: usize,
    seed: u64,
) -> Result<RiskReport> {
    check_replications(m)?;
    let eval = |stats: &SummaryStats| method.estimate(stats, cfg).map(|e| e.value);
    let acc = mc_engine(cfg, params, m, seed, &[eval])?;
    Ok(RiskReport {
        kind: method.kind(),
        risk_mean: acc[0].0,
        std_error: acc[0].1,
        replications: m,
        seed,
    })
}

/// Risks of several estimators on identical sample streams (common
/// random numbers), which is how dominance is made testable at finite M.
pub fn mc_risk_set(
    cfg: &EntropicConfig,
    params: &PopulationParams,
    methods: &[Method],
    m: usize,
    seed: u64,
) -> Result<Vec<RiskReport>> {
    check_replications(m)?;
    let evals: Vec<_> = methods
        .iter()
        .map(|method| move |stats: &SummaryStats| method.estimate(stats, cfg).map(|e| e.value))
        .collect();
    let acc = mc_engine(cfg, params, m, seed, &evals)?;
    Ok(methods
        .iter()
        .zip(acc)
        .map(|(method, (mean, se))| RiskReport {
            kind: method.kind(),
            risk_mean: mean,
            std_error: se,
            replications: m,
            seed,
        })
        .collect())
}

/// Risk of the raw constant-multiplier estimator c·T^{k(1−q)}; used to
/// check that c₀ really is the risk-minimizing constant.
pub fn mc_risk_of_multiplier(
    cfg: &EntropicConfig,
    params: &PopulationParams,
    c: f64,
    m: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_replications(m)?;
    let eval = |stats: &SummaryStats| Ok(c * stats.t().powf(cfg.exponent()));
    Ok(mc_engine(cfg, params, m, seed, &[eval])?[0])
}

/// Percentage risk improvement of `improved` over `baseline`:
/// (R₁ − R₂)/R₁ × 100.
pub fn pri(baseline: &RiskReport, improved: &RiskReport) -> Result<f64> {
    if baseline.risk_mean <= 0.0 {
        return Err(Error::Domain(format!(
            "baseline risk must be positive, got {}",
            baseline.risk_mean
        )));
    }
    Ok((baseline.risk_mean - improved.risk_mean) / baseline.risk_mean * 100.0)
}

/// Runs the full grid: one [`PriCell`] per (u, q, n) in deterministic
/// row order (u outermost, then q, then n), cell seeds derived as
/// `mix(base_seed, cell_index)`.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<PriCell>> {
    let mut cells = Vec::with_capacity(grid.cell_count());
    for u in &grid.u_values {
        for &q in &grid.q_values {
            for &n in &grid.n_values {
                cells.push((u.clone(), q, n));
            }
        }
    }
    cells
        .into_par_iter()
        .enumerate()
        .map(|(idx, (u, q, n))| {
            let cfg = EntropicConfig::new(grid.k, n, q)?;
            let params = PopulationParams::new(u.clone(), grid.sigma)?;
            let seed = mix(grid.base_seed, idx as u64);
            let reports = mc_risk_set(
                &cfg,
                &params,
                &[Method::Baee, Method::Stein, Method::BzSmooth],
                grid.replications,
                seed,
            )?;
            Ok(PriCell {
                u,
                q,
                n,
                pri_stein: pri(&reports[0], &reports[1])?,
                pri_bz: pri(&reports[0], &reports[2])?,
                baseline_risk: reports[0].risk_mean,
            })
        })
        .collect()
}

/// Fraction of M replications whose confidence interval covers the true
/// Θ(σ) = σ^{k(1−q)}.
pub fn ci_coverage(
    cfg: &EntropicConfig,
    params: &PopulationParams,
    alpha_level: f64,
    m: usize,
    seed: u64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("M must be positive".into()));
    }
    if !alpha_level.is_finite() || alpha_level <= 0.0 || alpha_level >= 1.0 {
        return Err(Error::Domain(format!(
            "confidence level alpha must lie in (0,1), got {alpha_level}"
        )));
    }
    // The quantiles depend only on the configuration; hoist them out of
    // the replication loop. The interval arithmetic matches
    // `estimators::confidence_interval`.
    let dof = 2.0 * (cfg.k() * (cfg.n() - 1)) as f64;
    let q_lo = crate::special::chi_square_quantile(dof, alpha_level / 2.0)?;
    let q_hi = crate::special::chi_square_quantile(dof, 1.0 - alpha_level / 2.0)?;
    let e = cfg.exponent();
    let truth = theta(cfg, params.sigma())?;

    let n_blocks = m.div_ceil(BLOCK);
    let counts: Result<Vec<u64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = ((b + 1) * BLOCK).min(m);
            let mut hits = 0u64;
            for rep in start..end {
                let data = sample(cfg, params, mix(seed, rep as u64))?;
                let stats = summarize(&data).map_err(|err| match err {
                    Error::DegenerateSample(msg) => {
                        Error::DegenerateSample(format!("replication {rep}: {msg}"))
                    }
                    other => other,
                })?;
                let pivot_stat = (2.0 * stats.t()).powf(e);
                let a = pivot_stat / q_hi.powf(e);
                let b = pivot_stat / q_lo.powf(e);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                if lo <= truth && truth <= hi {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    Ok(counts?.iter().sum::<u64>() as f64 / m as f64)
}

/// Output encoding for PRI tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Writes PRI cells with six-decimal numeric columns (CSV) or as a JSON
/// document `{"cells": [...]}`. Byte-deterministic for fixed input.
pub fn export_table<W: Write>(cells: &[PriCell], format: TableFormat, mut out: W) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::Domain("refusing to export an empty table".into()));
    }
    match format {
        TableFormat::Csv => {
            writeln!(out, "u,q,n,pri_stein,pri_bz,baseline_risk")?;
            for c in cells {
                let u =
                    c.u.iter()
                        .map(|v| format!("{v:.6}"))
                        .collect::<Vec<_>>()
                        .join(";");
                writeln!(
                    out,
                    "{u},{:.6},{},{:.6},{:.6},{:.6}",
                    c.q, c.n, c.pri_stein, c.pri_bz, c.baseline_risk
                )?;
            }
        }
        TableFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                cells: &'a [PriCell],
            }
            serde_json::to_writer_pretty(&mut out, &Doc { cells })
                .map_err(|e| Error::Domain(format!("JSON encoding failed: {e}")))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// The PRI experiment grid at n ∈ {4, 6, 8} (108 cells), k = 1, σ = 1.
pub fn small_sample_grid(replications: usize, base_seed: u64) -> Result<ExperimentGrid> {
    ExperimentGrid::new(
        1,
        vec![
            vec![0.1],
            vec![0.2],
            vec![0.3],
            vec![0.4],
            vec![0.5],
            vec![0.6],
        ],
        vec![0.2, 0.4, 0.6, 0.8, 1.2, 1.4],
        vec![4, 6, 8],
        1.0,
        replications,
        base_seed,
    )
}

/// The same grid at large samples n ∈ {10, 15, 20, 30} (144 cells).
pub fn large_sample_grid(replications: usize, base_seed: u64) -> Result<ExperimentGrid> {
    ExperimentGrid::new(
        1,
        vec![
            vec![0.1],
            vec![0.2],
            vec![0.3],
            vec![0.4],
            vec![0.5],
            vec![0.6],
        ],
        vec![0.2, 0.4, 0.6, 0.8, 1.2, 1.4],
        vec![10, 15, 20, 30],
        1.0,
        replications,
        base_seed,
    )
}

/// A figure data request. The `*_preset` constructors reproduce the
/// standard single-population comparison setups.
#[derive(Debug, Clone, PartialEq)]
pub enum FigureKind {
    /// PRI of the smooth Brewster–Zidek estimator over a q grid, one
    /// series per location value, with the closed-form BAEE risk as the
    /// baseline. Common random numbers across q within each series.
    PriVsQ {
        n: usize,
        sigma: f64,
        u_values: Vec<f64>,
    },
    /// Per-sample quadratic losses of BAEE, Stein and Brewster–Zidek on
    /// independently seeded samples, plus the constant closed-form BAEE
    /// risk column.
    RiskPerSample {
        n: usize,
        sigma: f64,
        u: f64,
        q: f64,
        samples: usize,
    },
    /// PRI of Stein and Brewster–Zidek as the sample size grows.
    PriVsN {
        sigma: f64,
        u: f64,
        q: f64,
        n_max: usize,
    },
}

impl FigureKind {
    /// PRI-versus-q series at n = 4, σ = 1, u ∈ {0, 0.1, …, 0.5}.
    pub fn pri_vs_q_preset() -> Self {
        FigureKind::PriVsQ {
            n: 4,
            sigma: 1.0,
            u_values: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }

    /// Per-sample risks of the three estimators, 50 samples, σ = 1,
    /// u = 0.1, q = 0.1.
    pub fn risk_per_sample_preset(n: usize) -> Self {
        FigureKind::RiskPerSample {
            n,
            sigma: 1.0,
            u: 0.1,
            q: 0.1,
            samples: 50,
        }
    }

    /// PRI of both improved estimators for n from 2 to 50 at σ = 1,
    /// u = 0.1, q = 0.1.
    pub fn pri_vs_n_preset() -> Self {
        FigureKind::PriVsN {
            sigma: 1.0,
            u: 0.1,
            q: 0.1,
            n_max: 50,
        }
    }
}

/// A column-labelled numeric table, the common shape of all figure data.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line = row
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Computes the x/y series behind the comparison figures.
pub fn figure_data(kind: &FigureKind, m: usize, seed: u64) -> Result<FigureTable> {
    match kind {
        FigureKind::PriVsQ { n, sigma, u_values } => {
            check_replications(m)?;
            let q_grid: Vec<f64> = (1..30)
                .map(|i| 0.05 * i as f64)
                .filter(|q| (q - 1.0).abs() > 1e-9)
                .collect();
            let mut rows = Vec::new();
            for (ui, &u) in u_values.iter().enumerate() {
                let series_seed = mix(seed, ui as u64);
                let params = PopulationParams::new(vec![u], *sigma)?;
                for &q in &q_grid {
                    let cfg = EntropicConfig::new(1, *n, q)?;
                    let baseline = baee_risk_closed_form(&cfg)?;
                    let eval = |stats: &SummaryStats| {
                        Method::BzSmooth.estimate(stats, &cfg).map(|e| e.value)
                    };
                    let (bz_risk, _) = mc_engine(&cfg, &params, m, series_seed, &[eval])?[0];
                    rows.push(vec![u, q, (baseline - bz_risk) / baseline * 100.0]);
                }
            }
            Ok(FigureTable {
                columns: vec!["u", "q", "pri_bz"],
                rows,
            })
        }
        FigureKind::RiskPerSample {
            n,
            sigma,
            u,
            q,
            samples,
        } => {
            let cfg = EntropicConfig::new(1, *n, *q)?;
            let params = PopulationParams::new(vec![*u], *sigma)?;
            let truth = theta(&cfg, *sigma)?;
            let constant_risk = baee_risk_closed_form(&cfg)?;
            let mut rows = Vec::new();
            for idx in 0..*samples {
                let data = sample(&cfg, &params, mix(seed, idx as u64))?;
                let stats = summarize(&data)?;
                let loss = |method: &Method| -> Result<f64> {
                    let rel = method.estimate(&stats, &cfg)?.value / truth - 1.0;
                    Ok(rel * rel)
                };
                rows.push(vec![
                    idx as f64,
                    loss(&Method::Baee)?,
                    loss(&Method::Stein)?,
                    loss(&Method::BzSmooth)?,
                    constant_risk,
                ]);
            }
            Ok(FigureTable {
                columns: vec!["sample", "loss_baee", "loss_stein", "loss_bz", "baee_risk"],
                rows,
            })
        }
        FigureKind::PriVsN { sigma, u, q, n_max } => {
            check_replications(m)?;
            let params = PopulationParams::new(vec![*u], *sigma)?;
            let mut rows = Vec::new();
            for n in 2..=*n_max {
                let cfg = EntropicConfig::new(1, n, *q)?;
                let reports = mc_risk_set(
                    &cfg,
                    &params,
                    &[Method::Baee, Method::Stein, Method::BzSmooth],
                    m,
                    mix(seed, n as u64),
                )?;
                rows.push(vec![
                    n as f64,
                    pri(&reports[0], &reports[1])?,
                    pri(&reports[0], &reports[2])?,
                ]);
            }
            Ok(FigureTable {
                columns: vec!["n", "pri_stein", "pri_bz"],
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::IgPrior;

    fn cfg(k: usize, n: usize, q: f64) -> EntropicConfig {
        EntropicConfig::new(k, n, q).unwrap()
    }

    fn params(u: Vec<f64>, sigma: f64) -> PopulationParams {
        PopulationParams::new(u, sigma).unwrap()
    }

    #[test]
    fn pri_formula() {
        let report = |risk: f64| RiskReport {
            kind: EstimatorKind::Baee,
            risk_mean: risk,
            std_error: 0.0,
            replications: 1000,
            seed: 0,
        };
        assert_eq!(pri(&report(0.2), &report(0.1)).unwrap(), 50.0);
        assert_eq!(pri(&report(0.37), &report(0.37)).unwrap(), 0.0);
        let b = 0.214602;
        let improved = 0.2146018 * (1.0 - 0.0346923);
        let got = pri(&report(b), &report(improved)).unwrap();
        assert!((got - 3.4693200).abs() < 1e-5, "pri = {got}");
        assert!(pri(&report(0.0), &report(0.1)).is_err());
    }

    #[test]
    fn mc_risk_matches_closed_form_baee() {
        let c = cfg(1, 2, 0.5);
        let p = params(vec![0.0], 1.0);
        let want = baee_risk_closed_form(&c).unwrap();
        let report = mc_risk(&c, &p, &Method::Baee, 200_000, 99).unwrap();
        assert!(
            (report.risk_mean - want).abs() <= 3.0 * report.std_error,
            "MC {} +/- {} vs closed {want}",
            report.risk_mean,
            report.std_error
        );
    }

    #[test]
    fn improved_estimator_risks_match_exact_quadrature() {
        // Exact risks of the Stein and smooth Brewster–Zidek rules,
        // frozen from an independent two-dimensional quadrature over the
        // (X⁽¹⁾, T) law (X⁽¹⁾ ~ u + Exp(σ/n) independent of
        // T ~ Gamma(n−1, σ), multiplier kinks split analytically).
        let anchors: [(usize, f64, f64, f64, f64, f64); 3] = [
            // (n, q, u, R_baee, R_stein, R_bz)
            (
                4,
                0.5,
                0.1,
                0.07961152726861526,
                0.07276714591129272,
                0.07559847363818396,
            ),
            (
                4,
                1.2,
                0.3,
                0.01700717715018577,
                0.01602016975883823,
                0.01473896581639884,
            ),
            (
                8,
                0.8,
                0.2,
                0.005942302781162018,
                0.005922942123508081,
                0.005548275823990057,
            ),
        ];
        let m = 400_000;
        for (i, (n, q, u, want_baee, want_stein, want_bz)) in anchors.into_iter().enumerate() {
            let c = cfg(1, n, q);
            let p = params(vec![u], 1.0);
            let reports = mc_risk_set(
                &c,
                &p,
                &[Method::Baee, Method::Stein, Method::BzSmooth],
                m,
                crate::rng::mix(987654, i as u64),
            )
            .unwrap();
            for (report, want) in reports.iter().zip([want_baee, want_stein, want_bz]) {
                assert!(
                    (report.risk_mean - want).abs() <= 3.0 * report.std_error,
                    "{:?} at n={n}, q={q}, u={u}: MC {} +/- {} vs exact {want}",
                    report.kind,
                    report.risk_mean,
                    report.std_error
                );
            }
        }
    }

    #[test]
    fn mc_risk_is_scale_invariant_for_equivariant_estimators() {
        // Risk depends on u/σ only: scale u with σ and compare.
        let m = 40_000;
        let fixed_box = Method::BzFinite(crate::estimators::BoxBound::new(vec![0.5]).unwrap());
        for method in [
            Method::Mle,
            Method::Baee,
            Method::Stein,
            Method::BzSmooth,
            fixed_box,
        ] {
            let mut reports = Vec::new();
            for &sigma in &[0.5, 1.0, 2.0] {
                let c = cfg(1, 4, 0.5);
                let p = params(vec![0.1 * sigma], sigma);
                reports.push(mc_risk(&c, &p, &method, m, 1234).unwrap());
            }
            for pair in reports.windows(2) {
                let pooled = (pair[0].std_error.powi(2) + pair[1].std_error.powi(2)).sqrt();
                assert!(
                    (pair[0].risk_mean - pair[1].risk_mean).abs() <= 3.0 * pooled,
                    "{method:?}: {} vs {}",
                    pair[0].risk_mean,
                    pair[1].risk_mean
                );
            }
        }
    }

    #[test]
    fn improved_estimators_dominate_baee_on_shared_streams() {
        let c = cfg(1, 4, 0.5);
        let p = params(vec![0.1], 1.0);
        let reports = mc_risk_set(
            &c,
            &p,
            &[Method::Baee, Method::Stein, Method::BzSmooth],
            50_000,
            2024,
        )
        .unwrap();
        let slack = 3.0 * (reports[0].std_error.powi(2) + reports[2].std_error.powi(2)).sqrt();
        assert!(reports[1].risk_mean <= reports[0].risk_mean + slack);
        assert!(reports[2].risk_mean <= reports[0].risk_mean + slack);
    }

    #[test]
    fn constant_c0_minimizes_risk_among_constants() {
        let c = cfg(1, 4, 0.8);
        let p = params(vec![0.0], 1.0);
        let c0 = crate::estimators::c0(&c).unwrap();
        let closed = baee_risk_closed_form(&c).unwrap();
        for &factor in &[0.5, 2.0] {
            let (risk, se) = mc_risk_of_multiplier(&c, &p, factor * c0, 50_000, 7).unwrap();
            assert!(
                closed <= risk + 3.0 * se,
                "risk at {factor}·c0 = {risk} should exceed {closed}"
            );
        }
    }

    #[test]
    fn bayes_risk_is_finite_and_small_for_matching_prior() {
        let c = cfg(1, 4, 0.5);
        let p = params(vec![0.1], 1.0);
        let prior = IgPrior::new(1.0, 1.0).unwrap();
        let report = mc_risk(&c, &p, &Method::Bayes(prior), 5000, 3).unwrap();
        assert!(report.risk_mean.is_finite() && report.risk_mean > 0.0);
    }

    #[test]
    fn rejects_insufficient_replications() {
        let c = cfg(1, 4, 0.5);
        let p = params(vec![0.1], 1.0);
        assert!(mc_risk(&c, &p, &Method::Baee, 999, 1).is_err());
        assert!(ExperimentGrid::new(1, vec![vec![0.1]], vec![0.5], vec![4], 1.0, 999, 1).is_err());
    }

    #[test]
    fn grid_rejects_invalid_pairs() {
        // q = 1.6 is invalid for n = 2 ((n+1)/2 = 1.5).
        assert!(
            ExperimentGrid::new(1, vec![vec![0.1]], vec![0.5, 1.6], vec![2, 4], 1.0, 1000, 1)
                .is_err()
        );
    }

    #[test]
    fn grid_shape_and_determinism_across_thread_counts() {
        let grid = ExperimentGrid::new(
            1,
            vec![vec![0.1], vec![0.4]],
            vec![0.5, 1.2],
            vec![4],
            1.0,
            2000,
            42,
        )
        .unwrap();
        assert_eq!(grid.cell_count(), 4);

        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_grid(&grid))
            .unwrap();
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(7)
            .build()
            .unwrap()
            .install(|| run_grid(&grid))
            .unwrap();

        let mut a = Vec::new();
        export_table(&single, TableFormat::Csv, &mut a).unwrap();
        let mut b = Vec::new();
        export_table(&multi, TableFormat::Csv, &mut b).unwrap();
        assert_eq!(a, b, "CSV bytes differ across thread counts");

        let mut ja = Vec::new();
        export_table(&single, TableFormat::Json, &mut ja).unwrap();
        let mut jb = Vec::new();
        export_table(&multi, TableFormat::Json, &mut jb).unwrap();
        assert_eq!(ja, jb, "JSON bytes differ across thread counts");
    }

    #[test]
    fn export_csv_round_trips_at_six_decimals() {
        let cells = vec![
            PriCell {
                u: vec![0.1],
                q: 0.2,
                n: 4,
                pri_stein: 1.234567891,
                pri_bz: 3.469226,
                baseline_risk: 0.214601836,
            },
            PriCell {
                u: vec![0.6],
                q: 1.4,
                n: 8,
                pri_stein: 0.0,
                pri_bz: 9.071442,
                baseline_risk: 0.5,
            },
        ];
        let mut buf = Vec::new();
        export_table(&cells, TableFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "u,q,n,pri_stein,pri_bz,baseline_risk"
        );
        for (line, cell) in lines.zip(&cells) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 6);
            assert!((fields[0].parse::<f64>().unwrap() - cell.u[0]).abs() < 1e-6);
            assert!((fields[1].parse::<f64>().unwrap() - cell.q).abs() < 1e-6);
            assert_eq!(fields[2].parse::<usize>().unwrap(), cell.n);
            assert!((fields[3].parse::<f64>().unwrap() - cell.pri_stein).abs() < 1e-6);
            assert!((fields[4].parse::<f64>().unwrap() - cell.pri_bz).abs() < 1e-6);
            assert!((fields[5].parse::<f64>().unwrap() - cell.baseline_risk).abs() < 1e-6);
        }

        // Header + one row per cell.
        assert_eq!(text.lines().count(), cells.len() + 1);
    }

    #[test]
    fn export_json_matches_documented_schema() {
        let cells = vec![PriCell {
            u: vec![0.1, 0.2],
            q: 0.5,
            n: 4,
            pri_stein: 1.0,
            pri_bz: 2.0,
            baseline_risk: 0.3,
        }];
        let mut buf = Vec::new();
        export_table(&cells, TableFormat::Json, &mut buf).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let arr = doc["cells"].as_array().unwrap();
        assert_eq!(arr.len(), 1);
        let cell = &arr[0];
        assert_eq!(cell["u"].as_array().unwrap().len(), 2);
        assert_eq!(cell["n"].as_u64().unwrap(), 4);
        for key in ["q", "pri_stein", "pri_bz", "baseline_risk"] {
            assert!(cell[key].is_number(), "missing key {key}");
        }
        assert!(export_table(&[], TableFormat::Csv, Vec::new()).is_err());
    }

    #[test]
    fn ci_coverage_tracks_nominal_level() {
        let c = cfg(1, 4, 0.5);
        let p = params(vec![0.3], 1.0);
        let cov = ci_coverage(&c, &p, 0.05, 20_000, 11).unwrap();
        assert!((cov - 0.95).abs() < 0.01, "coverage = {cov}");
        let cov_half = ci_coverage(&c, &p, 0.5, 20_000, 11).unwrap();
        assert!((cov_half - 0.5).abs() < 0.02, "coverage = {cov_half}");
    }

    #[test]
    fn ci_coverage_invariant_to_sigma() {
        let c = cfg(1, 4, 0.5);
        let a = ci_coverage(&c, &params(vec![0.15], 0.5), 0.05, 20_000, 5).unwrap();
        let b = ci_coverage(&c, &params(vec![0.6], 2.0), 0.05, 20_000, 5).unwrap();
        assert!((a - 0.95).abs() < 0.01 && (b - 0.95).abs() < 0.01);
    }

    #[test]
    fn figure_pri_vs_q_omits_unit_q_and_stays_finite() {
        let kind = FigureKind::PriVsQ {
            n: 4,
            sigma: 1.0,
            u_values: vec![0.1],
        };
        let table = figure_data(&kind, 2000, 77).unwrap();
        assert_eq!(table.columns, vec!["u", "q", "pri_bz"]);
        for row in &table.rows {
            assert!((row[1] - 1.0).abs() > 1e-9, "q = 1 must be omitted");
            assert!(row[2].is_finite());
        }
    }

    #[test]
    fn figure_risk_per_sample_mean_loss_decreases_with_n() {
        let t4 = figure_data(&FigureKind::risk_per_sample_preset(4), 1, 5150).unwrap();
        let t8 = figure_data(&FigureKind::risk_per_sample_preset(8), 1, 5150).unwrap();
        assert_eq!(t4.rows.len(), 50);
        // Column 3 is the Brewster–Zidek loss; compare means.
        for col in 1..=3 {
            let mean4: f64 = t4.rows.iter().map(|r| r[col]).sum::<f64>() / 50.0;
            let mean8: f64 = t8.rows.iter().map(|r| r[col]).sum::<f64>() / 50.0;
            assert!(
                mean8 < mean4,
                "column {col}: mean loss rose from {mean4} to {mean8}"
            );
        }
        // The constant column equals the closed-form BAEE risk.
        let c4 = baee_risk_closed_form(&cfg(1, 4, 0.1)).unwrap();
        assert!(t4.rows.iter().all(|r| (r[4] - c4).abs() < 1e-14));
    }

    #[test]
    fn figure_pri_vs_n_series_decay() {
        let kind = FigureKind::PriVsN {
            sigma: 1.0,
            u: 0.1,
            q: 0.1,
            n_max: 30,
        };
        let table = figure_data(&kind, 20_000, 8).unwrap();
        assert_eq!(table.rows.first().unwrap()[0], 2.0);
        assert_eq!(table.rows.last().unwrap()[0], 30.0);
        // The Brewster–Zidek improvement peaks around n = 8 and decays
        // toward zero afterwards (true value ~1.45 at n = 30).
        let peak_bz = table
            .rows
            .iter()
            .map(|r| r[2])
            .fold(f64::NEG_INFINITY, f64::max);
        let last_bz = table.rows.last().unwrap()[2];
        assert!(
            last_bz < 0.5 * peak_bz,
            "PRI did not decay: peak {peak_bz} -> {last_bz}"
        );
        assert!(last_bz.abs() < 2.0, "PRI at n = 30 is {last_bz}");
        // The Stein clip is inactive at large n, so its PRI hits zero.
        let last_stein = table.rows.last().unwrap()[1];
        assert!(
            last_stein.abs() < 0.5,
            "Stein PRI at n = 30 is {last_stein}"
        );
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }
}
