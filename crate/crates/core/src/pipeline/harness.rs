//! Parameter sweeps and validation against the brute-force oracle.

use alloc::vec::Vec;

use rand::Rng;

use super::{run_pipeline, BetaMode, NormalizationStrategy, PipelineConfig, PipelineRun, Rounds};
use crate::phase::Mode;
use crate::rng::seeded;
use crate::sched::{brute_force_optimum, pad_instance, AlphaMode, Instance, Rational, Task};

/// Give up after this many draws per requested instance.
const MAX_DRAWS_PER_INSTANCE: u64 = 1000;
use crate::{Error, Result};

/// Draws an instance with integer `t ∈ [1, 9]`, `w ∈ [1, 9]` and
/// `d ∈ [0, Σt]`.
pub fn random_instance<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Instance> {
    if m == 0 {
        return Err(Error::invalid("instance needs at least one task"));
    }
    let lengths: Vec<i64> = (0..m).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = lengths.iter().sum();
    let tasks = lengths
        .into_iter()
        .map(|t| {
            let d = rng.random_range(0..=total);
            let w = rng.random_range(1..=9);
            Task::from_ints(t, d, w)
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(tasks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rounds,
    Beta,
    Alpha,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub rounds: u64,
    pub p0: f64,
    /// Conditional probability summed over all optimal schedules.
    pub p_optimum_conditional: f64,
    pub p_optimum_joint: f64,
    /// 1-based position of the best-placed optimal schedule in the
    /// distribution ordering.
    pub optimum_rank: usize,
    pub feasible_mass: f64,
    pub argmax: u64,
    pub argmax_optimal: bool,
}

pub(crate) struct OptimumStats {
    pub p_conditional: f64,
    pub p_joint: f64,
    pub rank: usize,
}

pub(crate) fn optimum_stats(run: &PipelineRun) -> Result<OptimumStats> {
    let oracle = run
        .report
        .oracle
        .as_ref()
        .ok_or_else(|| Error::invalid("instance too large for the brute-force oracle"))?;
    let p_joint: f64 = oracle
        .optimal_basis
        .iter()
        .map(|&b| run.branch0[b as usize].norm_sqr())
        .sum();
    // rank = 1 + number of states strictly ahead of the best optimal state
    let (best_p, best_b) = oracle
        .optimal_basis
        .iter()
        .map(|&b| (run.branch0[b as usize].norm_sqr(), b))
        .fold((f64::NEG_INFINITY, u64::MAX), |acc, x| {
            if x.0 > acc.0 || (x.0 == acc.0 && x.1 < acc.1) {
                x
            } else {
                acc
            }
        });
    let ahead = run
        .branch0
        .iter()
        .enumerate()
        .filter(|(i, a)| {
            let p = a.norm_sqr();
            p > best_p || (p == best_p && (*i as u64) < best_b)
        })
        .count();
    Ok(OptimumStats {
        p_conditional: p_joint / run.report.p0,
        p_joint,
        rank: ahead + 1,
    })
}

fn sweep_config(base: &PipelineConfig, param: SweepParam, value: f64) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig {
        mode: Mode::Exact,
        ..*base
    };
    let (alpha, beta) = match base.normalization {
        NormalizationStrategy::Sigmoid { alpha, beta } => (alpha, beta),
        _ => (AlphaMode::MidpointRandom, BetaMode::Auto),
    };
    match param {
        SweepParam::Rounds => {
            if !(value >= 0.0 && libm::trunc(value) == value) {
                return Err(Error::invalid(alloc::format!(
                    "round count {value} is not a whole number"
                )));
            }
            cfg.rounds = Rounds::Fixed(value as u64);
        }
        SweepParam::Beta => {
            cfg.normalization = NormalizationStrategy::Sigmoid {
                alpha,
                beta: BetaMode::Fixed(value),
            };
        }
        SweepParam::Alpha => {
            cfg.normalization = NormalizationStrategy::Sigmoid {
                alpha: AlphaMode::Fixed(value),
                beta,
            };
        }
    }
    Ok(cfg)
}

/// Runs the exact pipeline once per grid value. Every point shares the base
/// seed and stream, so only the swept parameter changes between rows.
pub fn sweep(
    inst: &Instance,
    cfg: &PipelineConfig,
    param: SweepParam,
    grid: &[f64],
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    grid.iter()
        .map(|&value| {
            let run = run_pipeline(inst, &sweep_config(cfg, param, value)?)?;
            let stats = optimum_stats(&run)?;
            let r = &run.report;
            Ok(SweepRow {
                value,
                rounds: r.rounds,
                p0: r.p0,
                p_optimum_conditional: stats.p_conditional,
                p_optimum_joint: stats.p_joint,
                optimum_rank: stats.rank,
                feasible_mass: r.feasible_mass,
                argmax: r.argmax,
                argmax_optimal: r.oracle_optimal().unwrap_or(false),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub index: u64,
    /// Stream the instance was drawn from; the run uses `stream + 1`.
    pub stream: u64,
    pub instance: Instance,
    pub optimal_cost: Rational,
    pub unique_optimum: bool,
    /// Conditional argmax has optimal cost.
    pub success: bool,
    /// Joint-probability argmax has optimal cost.
    pub joint_success: bool,
    pub p0: f64,
    pub p_optimum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub outcomes: Vec<InstanceOutcome>,
}

impl ValidationSummary {
    fn mean(&self, f: impl Fn(&InstanceOutcome) -> f64) -> f64 {
        self.outcomes.iter().map(f).sum::<f64>() / self.outcomes.len() as f64
    }

    pub fn successes(&self) -> usize {
        self.outcomes.iter().filter(|o| o.success).count()
    }

    pub fn agreement_rate(&self) -> f64 {
        self.mean(|o| o.success as u8 as f64)
    }

    pub fn joint_agreement_rate(&self) -> f64 {
        self.mean(|o| o.joint_success as u8 as f64)
    }

    pub fn mean_p0(&self) -> f64 {
        self.mean(|o| o.p0)
    }

    pub fn mean_p_optimum(&self) -> f64 {
        self.mean(|o| o.p_optimum)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InstanceOutcome> {
        self.outcomes.iter().filter(|o| !o.success)
    }
}

/// Draws `count` random instances with `m` tasks (padded when needed) and
/// checks the exact pipeline's argmax against the brute-force optimum.
///
/// Instance `k` is drawn from stream `2k` of `cfg.seed` and run on stream
/// `2k + 1`. With `unique_only`, instances with tied optima are skipped and
/// further indices are drawn until `count` instances are collected; for padded
/// instances uniqueness refers to the order of the real tasks.
pub fn validate(
    m: usize,
    count: usize,
    cfg: &PipelineConfig,
    unique_only: bool,
) -> Result<ValidationSummary> {
    if count == 0 {
        return Err(Error::invalid("validation needs at least one instance"));
    }
    let mut outcomes = Vec::with_capacity(count);
    let mut index = 0u64;
    while outcomes.len() < count {
        let stream = 2 * index;
        if index >= MAX_DRAWS_PER_INSTANCE * count as u64 {
            return Err(Error::invalid(alloc::format!(
                "only {} of {count} drawn instances qualified",
                outcomes.len()
            )));
        }
        let raw = random_instance(m, &mut seeded(cfg.seed, stream))?;
        let inst = pad_instance(&raw);
        let run_cfg = PipelineConfig {
            mode: Mode::Exact,
            stream: stream + 1,
            ..*cfg
        };
        let run = run_pipeline(&inst, &run_cfg)?;
        let oracle = run
            .report
            .oracle
            .as_ref()
            .ok_or_else(|| Error::invalid("instance too large for the brute-force oracle"))?;
        // dummies can sit anywhere at no cost, so judge uniqueness on real tasks
        let unique = if inst.is_padded() {
            brute_force_optimum(&raw, cfg.lateness, cfg.enumeration_limit)?.is_unique()
        } else {
            oracle.optimum.is_unique()
        };
        if unique_only && !unique {
            index += 1;
            continue;
        }
        let optimal_cost = oracle.optimum.cost;
        let joint_argmax = super::argmax(run.branch0.iter().map(|a| a.norm_sqr())) as u64;
        let conditional_argmax = super::argmax(run.conditional()) as u64;
        let is_optimal = |b: u64| {
            let enc = run.encoding();
            enc.is_feasible(b) && oracle.optimal_basis.binary_search(&b).is_ok()
        };
        let stats = super::harness::optimum_stats(&run)?;
        outcomes.push(InstanceOutcome {
            index,
            stream,
            optimal_cost,
            unique_optimum: unique,
            success: is_optimal(conditional_argmax),
            joint_success: is_optimal(joint_argmax),
            p0: run.report.p0,
            p_optimum: stats.p_conditional,
            instance: inst,
        });
        index += 1;
    }
    Ok(ValidationSummary { outcomes })
}
