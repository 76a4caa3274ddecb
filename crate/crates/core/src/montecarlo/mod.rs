//! Deterministic, parallelizable simulation harness.
//!
//! A *cell* is one `(design, rule, sigma_a^2)` combination; running a cell
//! simulates `replicates` datasets, applies the Bayes factor rule to each,
//! and reports the relative frequency of choosing the true model (`M0` iff
//! `sigma_a^2 = 0`).
//!
//! Reproducibility contract: every replicate draws from its own RNG stream
//! keyed by `(seed, cell_id, replicate)`, and aggregation is a count, so the
//! result is a pure function of the configuration — independent of worker
//! count and scheduling. The cell id is an FNV-1a hash of the canonical key
//! `table=<t|->;p=<p>;r=<r>;rule=<label>;sa2=<s>`, so extending a grid never
//! perturbs existing cells.

pub mod reference;
pub mod rng;

use crate::bayes_factor::{
    closed_form_log_bf, quadrature_log_bf, BayesFactorResult, Decision, ModelParams, PearsonTypeVI,
};
use crate::core_math::QuadratureSpec;
use crate::data_model::{sufficient_stats, BalancedDesign, DataMatrix};
use crate::text::format_sig;
use crate::{Error, Result};
use rng::SplitMix64;

/// How the scale parameter of the prior is tied to the design.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum KappaSpec {
    Value(f64),
    /// `kappa = 1/n` (the hyper-g/n choice).
    ReciprocalTotal,
    /// `kappa = r` (uniform on `r tau / (1 + r tau)` when `alpha = beta =
    /// 0`; the closed-form prior scale).
    GroupSize,
}

impl KappaSpec {
    pub fn resolve(&self, design: BalancedDesign) -> f64 {
        match self {
            KappaSpec::Value(v) => *v,
            KappaSpec::ReciprocalTotal => 1.0 / design.n() as f64,
            KappaSpec::GroupSize => design.r() as f64,
        }
    }

    fn label(&self) -> String {
        match self {
            KappaSpec::Value(v) => format!("{v}"),
            KappaSpec::ReciprocalTotal => "1/n".to_string(),
            KappaSpec::GroupSize => "r".to_string(),
        }
    }
}

/// The model-choice rule applied to each simulated dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum BfRule {
    /// Closed-form Bayes factor (prior `kappa = r`, `beta = (n-p)/2 - alpha
    /// - 2`).
    ClosedForm { alpha: f64 },
    /// Quadrature Bayes factor under an explicit Pearson type VI prior.
    Quadrature {
        alpha: f64,
        beta: f64,
        kappa: KappaSpec,
        spec: QuadratureSpec,
    },
}

impl BfRule {
    /// Compact label used in CSV output and in the cell-id key, e.g.
    /// `cf:a=-0.5` or `pt:a=-0.5;b=0;k=1/n`.
    pub fn label(&self) -> String {
        match self {
            BfRule::ClosedForm { alpha } => format!("cf:a={alpha}"),
            BfRule::Quadrature {
                alpha, beta, kappa, ..
            } => {
                format!("pt:a={alpha};b={beta};k={}", kappa.label())
            }
        }
    }

    /// Checks the hyperparameters against a design without running anything.
    pub fn validate(&self, design: BalancedDesign) -> Result<()> {
        match self {
            BfRule::ClosedForm { alpha } => {
                PearsonTypeVI::closed_form_prior(design, *alpha)?;
            }
            BfRule::Quadrature {
                alpha, beta, kappa, ..
            } => {
                PearsonTypeVI::new(*alpha, *beta, kappa.resolve(design))?;
            }
        }
        Ok(())
    }

    fn evaluate(
        &self,
        stats: &crate::data_model::SufficientStats,
    ) -> Result<BayesFactorResult> {
        match self {
            BfRule::ClosedForm { alpha } => closed_form_log_bf(stats, *alpha),
            BfRule::Quadrature {
                alpha,
                beta,
                kappa,
                spec,
            } => {
                let prior = PearsonTypeVI::new(*alpha, *beta, kappa.resolve(stats.design))?;
                quadrature_log_bf(stats, &prior, spec)
            }
        }
    }
}

/// Draws one dataset `y_ij = mu + a_i + eps_ij`.
///
/// Fixed draw order: the `p` unit effects first, then the `n` errors in
/// row-major order. This order is part of the reproducibility contract.
pub fn simulate_dataset(
    design: BalancedDesign,
    params: &ModelParams,
    stream: &mut SplitMix64,
) -> DataMatrix {
    let (p, r) = (design.p(), design.r());
    let sd_a = params.sigma_a2.sqrt();
    let sd_e = params.sigma2.sqrt();

    let effects: Vec<f64> = (0..p)
        .map(|_| {
            if params.sigma_a2 > 0.0 {
                sd_a * stream.next_standard_normal()
            } else {
                // M0: no draw is consumed, matching the p = 0-effects model.
                0.0
            }
        })
        .collect();

    let mut values = Vec::with_capacity(design.n());
    for ai in &effects {
        for _ in 0..r {
            values.push(params.mu + ai + sd_e * stream.next_standard_normal());
        }
    }
    DataMatrix::new(design, values).expect("simulated values are always finite")
}

/// One row of a frequency table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FrequencyRow {
    pub p: usize,
    pub r: usize,
    pub rule_params: String,
    pub sigma_a2: f64,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Valid {
        /// Share of replicates in which the rule chose the true model.
        frequency: f64,
        /// Binomial standard error `sqrt(f (1-f) / replicates_used)`.
        standard_error: f64,
        replicates_used: u32,
        /// Replicates with `W_T = 0`, excluded from the denominator.
        degenerate_count: u32,
    },
    Invalid {
        reason: String,
    },
}

/// Long-format table of relative frequencies over a simulation grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyTable {
    /// CSV with the fixed column order
    /// `p,r,rule_params,sigma_a2,frequency,se,replicates,degenerate`.
    /// Invalid cells carry the marker `invalid` in the frequency column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,r,rule_params,sigma_a2,frequency,se,replicates,degenerate\n");
        for row in &self.rows {
            match &row.outcome {
                CellOutcome::Valid {
                    frequency,
                    standard_error,
                    replicates_used,
                    degenerate_count,
                } => {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        row.p,
                        row.r,
                        row.rule_params,
                        format_sig(row.sigma_a2, 12),
                        format_sig(*frequency, 12),
                        format_sig(*standard_error, 12),
                        replicates_used,
                        degenerate_count
                    ));
                }
                CellOutcome::Invalid { .. } => {
                    out.push_str(&format!(
                        "{},{},{},{},invalid,,0,0\n",
                        row.p,
                        row.r,
                        row.rule_params,
                        format_sig(row.sigma_a2, 12),
                    ));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("frequency tables always serialize")
    }
}

/// Canonical cell key; its FNV-1a hash keys the replicate streams.
fn cell_key(table: Option<u8>, design: BalancedDesign, rule: &BfRule, sigma_a2: f64) -> String {
    let t = table.map_or("-".to_string(), |t| t.to_string());
    format!(
        "table={t};p={};r={};rule={};sa2={sigma_a2}",
        design.p(),
        design.r(),
        rule.label()
    )
}

/// Runs one cell: simulate, decide, tabulate.
///
/// `params.sigma_a2` doubles as the truth indicator (`0` means `M0` is
/// true). `workers = 0` uses the available parallelism; any worker count
/// produces bit-identical output.
pub fn run_cell(
    design: BalancedDesign,
    params: &ModelParams,
    rule: &BfRule,
    replicates: u32,
    seed: u64,
    workers: usize,
) -> Result<FrequencyRow> {
    run_cell_in_table(None, design, params, rule, replicates, seed, workers)
}

fn run_cell_in_table(
    table: Option<u8>,
    design: BalancedDesign,
    params: &ModelParams,
    rule: &BfRule,
    replicates: u32,
    seed: u64,
    workers: usize,
) -> Result<FrequencyRow> {
    if replicates == 0 {
        return Err(Error::Domain("replicates must be >= 1".to_string()));
    }
    rule.validate(design)?;

    let cid = rng::cell_id_from_key(&cell_key(table, design, rule, params.sigma_a2));
    let truth = if params.sigma_a2 == 0.0 {
        Decision::M0
    } else {
        Decision::M1
    };

    let workers = effective_workers(workers, replicates);
    let chunk = (replicates as usize).div_ceil(workers);

    let run_range = |lo: u32, hi: u32| -> Result<(u32, u32)> {
        let mut correct = 0u32;
        let mut degenerate = 0u32;
        for k in lo..hi {
            let mut stream = SplitMix64::substream(seed, cid, u64::from(k));
            let data = simulate_dataset(design, params, &mut stream);
            let stats = sufficient_stats(&data);
            match rule.evaluate(&stats) {
                Ok(res) => {
                    if res.decision == truth {
                        correct += 1;
                    }
                }
                Err(Error::DegenerateData(_)) => degenerate += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((correct, degenerate))
    };

    let (correct, degenerate) = if workers == 1 {
        run_range(0, replicates)?
    } else {
        let chunks: Vec<(u32, u32)> = (0..workers)
            .map(|w| {
                let lo = (w * chunk) as u32;
                let hi = ((w + 1) * chunk).min(replicates as usize) as u32;
                (lo, hi)
            })
            .collect();
        let partials: Vec<Result<(u32, u32)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&(lo, hi)| scope.spawn(move || run_range(lo, hi)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        let mut correct = 0u32;
        let mut degenerate = 0u32;
        for partial in partials {
            let (c, d) = partial?;
            correct += c;
            degenerate += d;
        }
        (correct, degenerate)
    };

    let used = replicates - degenerate;
    let frequency = if used == 0 {
        0.0
    } else {
        f64::from(correct) / f64::from(used)
    };
    let standard_error = if used == 0 {
        0.0
    } else {
        (frequency * (1.0 - frequency) / f64::from(used)).sqrt()
    };

    Ok(FrequencyRow {
        p: design.p(),
        r: design.r(),
        rule_params: rule.label(),
        sigma_a2: params.sigma_a2,
        outcome: CellOutcome::Valid {
            frequency,
            standard_error,
            replicates_used: used,
            degenerate_count: degenerate,
        },
    })
}

fn effective_workers(workers: usize, replicates: u32) -> usize {
    let w = if workers == 0 {
        std::thread::available_parallelism().map_or(1, std::num::NonZeroUsize::get)
    } else {
        workers
    };
    w.clamp(1, (replicates as usize).max(1))
}

/// A full simulation grid with a single rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub design_grid: Vec<(usize, usize)>,
    /// `sigma_a^2` values; 0 encodes `M0`.
    pub truth_grid: Vec<f64>,
    pub mu: f64,
    pub sigma2: f64,
    pub rule: BfRule,
    pub replicates: u32,
    pub seed: u64,
    pub prior_prob_m1: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.design_grid.is_empty() || self.truth_grid.is_empty() {
            return Err(Error::Domain("empty design or truth grid".to_string()));
        }
        for &(p, r) in &self.design_grid {
            BalancedDesign::new(p, r)?;
        }
        for &s in &self.truth_grid {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("sigma_a2 must be >= 0, got {s}")));
            }
        }
        if self.replicates == 0 {
            return Err(Error::Domain("replicates must be >= 1".to_string()));
        }
        if !(self.prior_prob_m1 > 0.0 && self.prior_prob_m1 < 1.0) {
            return Err(Error::Domain(format!(
                "prior_prob_m1 must lie in (0, 1), got {}",
                self.prior_prob_m1
            )));
        }
        ModelParams::new(self.mu, self.sigma2, 0.0)?;
        Ok(())
    }

    /// Runs the whole grid. Cells whose hyperparameters are invalid for
    /// their design are emitted with an invalid marker, never skipped.
    pub fn run(&self, workers: usize) -> Result<FrequencyTable> {
        self.validate()?;
        let mut rows = Vec::new();
        for &(p, r) in &self.design_grid {
            let design = BalancedDesign::new(p, r)?;
            for &sigma_a2 in &self.truth_grid {
                rows.push(grid_cell(
                    None,
                    design,
                    &ModelParams::new(self.mu, self.sigma2, sigma_a2)?,
                    &self.rule,
                    self.replicates,
                    self.seed,
                    workers,
                )?);
            }
        }
        Ok(FrequencyTable { rows })
    }
}

fn grid_cell(
    table: Option<u8>,
    design: BalancedDesign,
    params: &ModelParams,
    rule: &BfRule,
    replicates: u32,
    seed: u64,
    workers: usize,
) -> Result<FrequencyRow> {
    match rule.validate(design) {
        Ok(()) => run_cell_in_table(table, design, params, rule, replicates, seed, workers),
        Err(Error::HyperparameterOutOfRange(reason)) => Ok(FrequencyRow {
            p: design.p(),
            r: design.r(),
            rule_params: rule.label(),
            sigma_a2: params.sigma_a2,
            outcome: CellOutcome::Invalid { reason },
        }),
        Err(e) => Err(e),
    }
}

/// The `sigma_a^2` columns shared by all published grids.
pub const TRUTH_GRID: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0];

/// The four `alpha` values of the closed-form grids (tables 1-3).
pub const CLOSED_FORM_ALPHAS: [f64; 4] = [-0.5, -0.25, -0.2, -0.1];

fn table_designs(table_id: u8) -> Result<Vec<(usize, usize)>> {
    Ok(match table_id {
        1 | 4 => vec![(2, 5), (2, 10), (2, 50), (2, 100), (2, 500)],
        2 | 5 => vec![(5, 2), (10, 2), (50, 2), (100, 2), (500, 2)],
        3 => vec![(2, 2), (10, 5), (5, 10), (10, 10), (50, 25), (25, 50)],
        6 => vec![(2, 2), (10, 5), (5, 10), (10, 10), (25, 50), (50, 25)],
        other => {
            return Err(Error::Domain(format!(
                "table id must be 1..=6, got {other}"
            )))
        }
    })
}

fn table_rules(table_id: u8) -> Result<Vec<BfRule>> {
    Ok(match table_id {
        1..=3 => CLOSED_FORM_ALPHAS
            .iter()
            .map(|&alpha| BfRule::ClosedForm { alpha })
            .collect(),
        // The four Pearson type VI priors behind the published quadrature
        // rows, in row order: the hyper-g (WG) prior, the hyper-g/n prior,
        // the fat-tailed beta-prime with alpha = -1/2, and the prior uniform
        // in r*tau/(1+r*tau).
        4..=6 => {
            let spec = QuadratureSpec::default();
            vec![
                BfRule::Quadrature {
                    alpha: 0.0,
                    beta: 0.0,
                    kappa: KappaSpec::Value(1.0),
                    spec,
                },
                BfRule::Quadrature {
                    alpha: -0.5,
                    beta: 0.0,
                    kappa: KappaSpec::ReciprocalTotal,
                    spec,
                },
                BfRule::Quadrature {
                    alpha: -0.5,
                    beta: 0.0,
                    kappa: KappaSpec::Value(1.0),
                    spec,
                },
                BfRule::Quadrature {
                    alpha: 0.0,
                    beta: 0.0,
                    kappa: KappaSpec::GroupSize,
                    spec,
                },
            ]
        }
        other => {
            return Err(Error::Domain(format!(
                "table id must be 1..=6, got {other}"
            )))
        }
    })
}

/// Reruns the full grid of one published table.
///
/// Row order matches the publication: designs outermost, then the four rule
/// rows, then the six `sigma_a^2` columns.
pub fn reproduce_table(
    table_id: u8,
    replicates: u32,
    seed: u64,
    workers: usize,
) -> Result<FrequencyTable> {
    let designs = table_designs(table_id)?;
    let rules = table_rules(table_id)?;
    let mut rows = Vec::new();
    for &(p, r) in &designs {
        let design = BalancedDesign::new(p, r)?;
        for rule in &rules {
            for &sigma_a2 in &TRUTH_GRID {
                rows.push(grid_cell(
                    Some(table_id),
                    design,
                    &ModelParams::new(0.0, 1.0, sigma_a2)?,
                    rule,
                    replicates,
                    seed,
                    workers,
                )?);
            }
        }
    }
    Ok(FrequencyTable { rows })
}
