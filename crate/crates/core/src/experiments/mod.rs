//! Seeded, replayable Monte Carlo experiments.
//!
//! Each replication derives its seed from `(master seed, experiment id, n,
//! replication)`, replications run in parallel and results are collected in
//! index order, so outputs are byte-identical for any worker count.

mod config;
mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{demagnify, m_measure, magnify, CylinderSet, DriftSpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate_1d, estimate_2d, sort_sample, EstimateResult, SearchConfig};
use crate::geometry::{hausdorff_distance, sym_diff_volume, ConvexBody};
use crate::limit::{
    draw_z_ball2d, draw_z_interval, draw_z_interval_constrained, z_distribution, ZDistribution,
};
use crate::models::{DensityModel, Sample};
use crate::rng::{derive_seed, label_hash};
use crate::stats::{ks_two_sample, quantile};

pub use config::{epsilon, EstimatorChoice, ExperimentConfig, LimitConfig};
pub use output::{
    content_hash, records_csv, write_limit_csv, write_outputs, Manifest, CSV_HEADER,
    CSV_SCHEMA_VERSION,
};

/// Minimum sample size on either side of a limit comparison.
pub const MIN_COMPARISON_DRAWS: usize = 100;
/// Configured pass threshold for limit-law KS distances.
pub const KS_THRESHOLD: f64 = 0.1;

/// One estimator run in one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub experiment_id: String,
    pub n: usize,
    pub rep: usize,
    pub estimator: String,
    /// `mu(L_n △ L)`.
    pub mu_symdiff: f64,
    /// `P(L_n △ L)`.
    pub p_symdiff: f64,
    pub hausdorff: f64,
    /// `M` of the magnified symmetric difference at scale `n^(-1/3)`.
    pub m_magnified: f64,
    /// `mu(L_min_volume △ L_max_prob)` in the same replication, if both ran.
    pub pair_mu: Option<f64>,
    /// Sample points inside the estimate.
    pub empirical_count: usize,
    pub set: ConvexBody,
}

/// Seed of replication `rep` at sample size `n`.
pub fn replication_seed(cfg: &ExperimentConfig, n: usize, rep: usize) -> u64 {
    derive_seed(
        cfg.seed,
        &[label_hash(&cfg.experiment_id), n as u64, rep as u64],
    )
}

fn run_estimators(
    cfg: &ExperimentConfig,
    model: &DensityModel,
    n: usize,
    rep: usize,
) -> Result<Vec<EstimateResult>> {
    let seed = replication_seed(cfg, n, rep);
    let sample = model.sample(n, seed);
    match sample {
        Sample::Line(mut xs) => {
            sort_sample(&mut xs)?;
            cfg.estimators
                .iter()
                .map(|c| estimate_1d(&xs, &c.kind(model)))
                .collect()
        }
        Sample::Plane(pts) => {
            let search = SearchConfig {
                seed: derive_seed(seed, &[label_hash("search")]),
                ..cfg.search
            };
            cfg.estimators
                .iter()
                .map(|c| estimate_2d(&pts, &c.kind(model), cfg.class, &search))
                .collect()
        }
    }
}

fn replication(
    cfg: &ExperimentConfig,
    model: &DensityModel,
    n: usize,
    rep: usize,
) -> Result<Vec<RateRecord>> {
    let results = run_estimators(cfg, model, n, rep)?;
    let l = &model.oracle.body;
    let eps = epsilon(n);
    let find = |c: EstimatorChoice| {
        cfg.estimators
            .iter()
            .position(|x| *x == c)
            .map(|i| &results[i].set)
    };
    let pair_mu = match (
        find(EstimatorChoice::MinVolume),
        find(EstimatorChoice::MaxProb),
    ) {
        (Some(a), Some(b)) => Some(sym_diff_volume(a, b)?),
        _ => None,
    };
    cfg.estimators
        .iter()
        .zip(&results)
        .map(|(choice, r)| {
            Ok(RateRecord {
                experiment_id: cfg.experiment_id.clone(),
                n,
                rep,
                estimator: choice.name().into(),
                mu_symdiff: sym_diff_volume(&r.set, l)?,
                p_symdiff: model.p_sym_diff(&r.set)?,
                hausdorff: hausdorff_distance(&r.set, l)?,
                m_magnified: m_measure(&magnify(l, &r.set, eps)?),
                pair_mu,
                empirical_count: r.diagnostics.empirical_count,
                set: r.set.clone(),
            })
        })
        .collect()
}

/// All records of `cfg`, ordered by `(n, rep, estimator)`.
pub fn simulate_records(cfg: &ExperimentConfig) -> Result<Vec<RateRecord>> {
    let model = cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |r| (n, r)))
        .collect();
    let per_job: Vec<Vec<RateRecord>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            replication(cfg, &model, n, rep).map_err(|e| Error::Replication {
                n,
                rep,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Summary of one functional at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: usize,
    pub median_mu: f64,
    pub q90_mu: f64,
    /// Median of `n^(1/3) mu(L_n △ L)`.
    pub median_normalized: f64,
    pub median_m_magnified: f64,
    pub median_p_symdiff: f64,
    pub median_hausdorff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub levels: Vec<LevelSummary>,
    /// Ratio of consecutive raw medians, `median(n_k) / median(n_{k+1})`.
    pub shrink_factors: Vec<f64>,
    /// Largest over smallest normalized median.
    pub normalized_spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceLevel {
    pub n: usize,
    /// Median of `n^(1/3) mu(L_min_volume △ L_max_prob)`.
    pub median: f64,
    pub q90: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSummary {
    pub levels: Vec<EquivalenceLevel>,
    pub monotone: bool,
    /// First median over last median.
    pub overall_drop: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatesSummary {
    pub experiment_id: String,
    pub estimators: Vec<EstimatorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceSummary>,
    pub checks: Vec<Check>,
}

fn median_of(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

fn records_for<'a>(records: &'a [RateRecord], est: &str, n: usize) -> Vec<&'a RateRecord> {
    records
        .iter()
        .filter(|r| r.estimator == est && r.n == n)
        .collect()
}

/// Median and 0.9 quantile of `n^(1/3) mu(L_min_volume △ L_max_prob)` per n.
pub fn equivalence_summary(records: &[RateRecord], n_grid: &[usize]) -> Option<EquivalenceSummary> {
    let mut levels = Vec::new();
    for &n in n_grid {
        let vals: Vec<f64> = records_for(records, EstimatorChoice::MinVolume.name(), n)
            .iter()
            .filter_map(|r| r.pair_mu)
            .map(|v| v / epsilon(n))
            .collect();
        if vals.is_empty() {
            return None;
        }
        levels.push(EquivalenceLevel {
            n,
            median: median_of(&vals),
            q90: quantile(&vals, 0.9),
        });
    }
    let monotone = levels.windows(2).all(|w| w[1].median < w[0].median);
    let overall_drop = levels[0].median / levels[levels.len() - 1].median;
    Some(EquivalenceSummary {
        pass: monotone && overall_drop >= 1.5,
        monotone,
        overall_drop,
        levels,
    })
}

/// Per-estimator medians, shrink factors and consistency checks.
pub fn summarize(cfg: &ExperimentConfig, records: &[RateRecord]) -> RatesSummary {
    let mut estimators = Vec::new();
    let mut checks = Vec::new();
    for choice in &cfg.estimators {
        let name = choice.name();
        let levels: Vec<LevelSummary> = cfg
            .n_grid
            .iter()
            .map(|&n| {
                let rs = records_for(records, name, n);
                let col = |f: fn(&RateRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
                let mu = col(|r| r.mu_symdiff);
                let eps = epsilon(n);
                LevelSummary {
                    n,
                    median_mu: median_of(&mu),
                    q90_mu: quantile(&mu, 0.9),
                    median_normalized: median_of(&mu) / eps,
                    median_m_magnified: median_of(&col(|r| r.m_magnified)),
                    median_p_symdiff: median_of(&col(|r| r.p_symdiff)),
                    median_hausdorff: median_of(&col(|r| r.hausdorff)),
                }
            })
            .collect();
        let shrink_factors: Vec<f64> = levels
            .windows(2)
            .map(|w| w[0].median_mu / w[1].median_mu)
            .collect();
        let norm: Vec<f64> = levels.iter().map(|l| l.median_normalized).collect();
        let normalized_spread = norm.iter().cloned().fold(f64::MIN, f64::max)
            / norm.iter().cloned().fold(f64::MAX, f64::min);

        if *choice == EstimatorChoice::ExcessMass && levels.len() > 1 {
            // A cube-root rate shrinks the median by (n ratio)^(1/3).
            let ok = levels.windows(2).zip(&shrink_factors).all(|(w, f)| {
                let expected = (w[1].n as f64 / w[0].n as f64).powf(1.0 / 3.0);
                *f >= 0.8 * expected && *f <= 1.3 * expected
            });
            checks.push(Check {
                name: "cube_root_rate".into(),
                pass: ok,
                detail: format!("shrink factors {shrink_factors:?}"),
            });
            checks.push(Check {
                name: "normalized_band".into(),
                pass: normalized_spread <= 1.5,
                detail: format!("max/min normalized median {normalized_spread}"),
            });
        }
        estimators.push(EstimatorSummary {
            estimator: name.into(),
            levels,
            shrink_factors,
            normalized_spread,
        });
    }

    let k = required_mass_violations(cfg, records);
    checks.push(Check {
        name: "constraint_identities".into(),
        pass: k == 0,
        detail: format!("{k} violations"),
    });
    let equivalence = equivalence_summary(records, &cfg.n_grid);
    if let Some(eq) = &equivalence {
        checks.push(Check {
            name: "equivalence".into(),
            pass: eq.pass,
            detail: format!("overall drop {}", eq.overall_drop),
        });
    }
    RatesSummary {
        experiment_id: cfg.experiment_id.clone(),
        estimators,
        equivalence,
        checks,
    }
}

/// Records violating `n P_n(L_min_volume) = ceil(n p)` or
/// `mu(L_max_prob) <= v`.
pub fn required_mass_violations(cfg: &ExperimentConfig, records: &[RateRecord]) -> usize {
    let Ok(model) = crate::models::builtin_model(&cfg.model, cfg.lambda) else {
        return records.len();
    };
    records
        .iter()
        .filter(|r| {
            if r.estimator == EstimatorChoice::MinVolume.name() {
                r.empirical_count != crate::estimators::required_count(r.n, model.oracle.p_lambda)
            } else if r.estimator == EstimatorChoice::MaxProb.name() {
                r.set.volume() > model.oracle.v_lambda
            } else {
                false
            }
        })
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatesOutput {
    pub records: Vec<RateRecord>,
    pub summary: RatesSummary,
}

/// Runs the rate experiment and persists it when an output directory is set.
pub fn run_rates(cfg: &ExperimentConfig) -> Result<RatesOutput> {
    if let Some(dir) = &cfg.output_dir {
        output::check_writable(dir, cfg.force)?;
    }
    let records = simulate_records(cfg)?;
    let summary = summarize(cfg, &records);
    if let Some(dir) = &cfg.output_dir {
        write_outputs(dir, cfg, &records, &summary, cfg.force)?;
    }
    Ok(RatesOutput { records, summary })
}

/// Runs min-volume and max-prob only and summarizes their discrepancy.
pub fn run_equivalence(cfg: &ExperimentConfig) -> Result<EquivalenceSummary> {
    let cfg = ExperimentConfig {
        estimators: vec![EstimatorChoice::MinVolume, EstimatorChoice::MaxProb],
        ..cfg.clone()
    };
    let out = run_rates(&cfg)?;
    out.summary
        .equivalence
        .ok_or_else(|| Error::InvalidConfig("equivalence needs both estimators".into()))
}

/// One finite-n versus limit comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub estimator: String,
    pub constrained_limit: bool,
    pub ks_statistic: f64,
    /// Sorted `M(tau(L_n △ L))` at the largest n.
    pub finite: Vec<f64>,
    /// Sorted `M(Z)`.
    pub limit: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitComparison {
    pub n: usize,
    pub comparisons: Vec<Comparison>,
}

impl LimitComparison {
    pub fn get(&self, estimator: &str, constrained: bool) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.estimator == estimator && c.constrained_limit == constrained)
    }
}

/// Limit draws for the model's drift: `Z(B)` or `Z(B*)`.
pub fn limit_distribution(
    cfg: &ExperimentConfig,
    model: &DensityModel,
    constrained: bool,
) -> Result<ZDistribution> {
    let drift = DriftSpec::from_model(model);
    let lambda = model.lambda();
    let seed = derive_seed(
        cfg.seed,
        &[
            label_hash(&cfg.experiment_id),
            label_hash("limit"),
            constrained as u64,
        ],
    );
    match &model.oracle.body {
        ConvexBody::Interval { .. } => {
            let grid = cfg.limit.grid;
            if constrained {
                z_distribution(
                    |s| draw_z_interval_constrained(&drift, lambda, &grid, s),
                    cfg.limit.draws,
                    seed,
                )
            } else {
                z_distribution(
                    |s| draw_z_interval(&drift, lambda, &grid, s),
                    cfg.limit.draws,
                    seed,
                )
            }
        }
        ConvexBody::Ball { radius, .. } => {
            let grid = crate::limit::BallGrid {
                radius: *radius,
                ..cfg.limit.ball
            };
            z_distribution(
                |s| draw_z_ball2d(&drift, lambda, &grid, s, constrained),
                cfg.limit.draws,
                seed,
            )
        }
        ConvexBody::Ellipsoid(_) => Err(Error::UnsupportedBody("ellipse level set".into())),
    }
}

/// KS distances between the finite-n law of `M(tau(L_n △ L))` at the largest
/// n and the limit laws: excess mass against `Z(B)`, min-volume and max-prob
/// against both `Z(B*)` and `Z(B)`.
pub fn run_limit_comparison(cfg: &ExperimentConfig) -> Result<LimitComparison> {
    let model = cfg.validate()?;
    if model.dimension() != 1 {
        return Err(Error::InvalidConfig(
            "limit comparison is implemented for 1D models".into(),
        ));
    }
    if cfg.replications < MIN_COMPARISON_DRAWS {
        return Err(Error::InsufficientDraws {
            got: cfg.replications,
            needed: MIN_COMPARISON_DRAWS,
        });
    }
    if cfg.limit.draws < MIN_COMPARISON_DRAWS {
        return Err(Error::InsufficientDraws {
            got: cfg.limit.draws,
            needed: MIN_COMPARISON_DRAWS,
        });
    }
    let n = *cfg.n_grid.last().expect("validated non-empty");
    let finite_cfg = ExperimentConfig {
        n_grid: vec![n],
        output_dir: None,
        ..cfg.clone()
    };
    let records = simulate_records(&finite_cfg)?;
    let unconstrained = limit_distribution(cfg, &model, false)?;
    let constrained = limit_distribution(cfg, &model, true)?;

    let mut comparisons = Vec::new();
    for choice in &cfg.estimators {
        let mut finite: Vec<f64> = records
            .iter()
            .filter(|r| r.estimator == choice.name())
            .map(|r| r.m_magnified)
            .collect();
        finite.sort_by(f64::total_cmp);
        let limits: &[bool] = match choice {
            EstimatorChoice::ExcessMass => &[false],
            _ => &[true, false],
        };
        for &c in limits {
            let z = if c { &constrained } else { &unconstrained };
            comparisons.push(Comparison {
                estimator: choice.name().into(),
                constrained_limit: c,
                ks_statistic: ks_two_sample(&finite, &z.m_total)?,
                finite: finite.clone(),
                limit: z.m_total.clone(),
            });
        }
    }
    Ok(LimitComparison { n, comparisons })
}

/// Local empirical process `w_n(B) = Lambda_n(C+) - Lambda_n(C-)` with
/// `Lambda_n(C) = n^(2/3) (P_n(C) - P(C))` and `C = A △ L` for the set `A`
/// whose magnification at scale `eps` is `B`.
pub fn boundary_process(
    sample: &Sample,
    model: &DensityModel,
    b: &CylinderSet,
    eps: f64,
) -> Result<f64> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let l = &model.oracle.body;
    let a = demagnify(l, b, eps)?.body;
    let parts = model.split_sym_diff(&a)?;
    let (mut out_count, mut in_count) = (0usize, 0usize);
    let mut tally = |inside_a: bool, inside_l: bool| match (inside_a, inside_l) {
        (true, false) => out_count += 1,
        (false, true) => in_count += 1,
        _ => {}
    };
    match sample {
        Sample::Line(xs) => xs
            .iter()
            .for_each(|x| tally(a.contains(&[*x]), l.contains(&[*x]))),
        Sample::Plane(ps) => ps
            .iter()
            .for_each(|p| tally(a.contains2(*p), l.contains2(*p))),
    }
    let nf = n as f64;
    let scale = nf.powf(2.0 / 3.0);
    let lambda_plus = scale * (out_count as f64 / nf - parts.p_outside);
    let lambda_minus = scale * (in_count as f64 / nf - parts.p_inside);
    Ok(lambda_plus - lambda_minus)
}
