//! End-to-end optimizer: feasibility amplification followed by one
//! cost-phase round, post-selected on the control qubit.

mod harness;

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::FRAC_PI_2;
use core::fmt;

use rand::Rng;

use crate::amplify::{run_grover, GroverPlan};
use crate::phase::{
    sample_with_restarts, simulate_control_register, Mode, SampledRun, DEFAULT_RETRY_BUDGET,
};
use crate::rng::{seeded, ChaCha8Rng};
use crate::sched::{
    brute_force_optimum, choose_alpha, cost_bounds, sample_cost_pair, AlphaMode, BoundsMode,
    CostEvaluator, Encoding, Instance, Lateness, Normalization, Optimum, Rational, Schedule,
    DEFAULT_ENUMERATION_LIMIT,
};
use crate::state::{norm_sqr, Complex, Sampler, StateVector, DEFAULT_MAX_QUBITS};
use crate::{Error, Result};

pub use harness::{
    random_instance, sweep, validate, InstanceOutcome, SweepParam, SweepRow, ValidationSummary,
};

/// Largest angle the saturation guard lets through.
pub const SATURATION_EPSILON: f64 = 1e-12;

/// Target of `β·|F(s₁) − F(s₂)|` for the automatic sigmoid slope.
pub const AUTO_BETA_SPREAD: f64 = 10.0;
/// Cap on `β·(F_max − F_min)` over conservative bounds, so `e^{βx}` stays finite.
pub const MAX_BETA_SPAN: f64 = 700.0;

/// Registers up to this size cache the feasibility predicate as a bitmask.
const FEASIBILITY_CACHE_QUBITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounds {
    #[default]
    Auto,
    Fixed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BetaMode {
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizationStrategy {
    MinMax {
        bounds: BoundsMode,
    },
    Sigmoid {
        alpha: AlphaMode,
        beta: BetaMode,
    },
    /// Use the given normalization unchanged.
    Explicit(Normalization),
}

impl Default for NormalizationStrategy {
    fn default() -> Self {
        NormalizationStrategy::MinMax {
            bounds: BoundsMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub rounds: Rounds,
    pub normalization: NormalizationStrategy,
    pub lateness: Lateness,
    pub mode: Mode,
    pub seed: u64,
    /// ChaCha stream; see [`crate::rng`].
    pub stream: u64,
    pub retry_budget: u32,
    pub max_qubits: u32,
    /// Width of the cost-phase control register. One is the standard path;
    /// wider registers are experimental.
    pub control_qubits: u32,
    /// Pull `Δ` back to `π/2 − ε` when every branch would otherwise vanish.
    pub saturation_guard: bool,
    /// Largest task count checked against the brute-force oracle.
    pub enumeration_limit: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rounds: Rounds::Auto,
            normalization: NormalizationStrategy::default(),
            lateness: Lateness::Literal,
            mode: Mode::Exact,
            seed: 0,
            stream: 0,
            retry_budget: DEFAULT_RETRY_BUDGET,
            max_qubits: DEFAULT_MAX_QUBITS,
            control_qubits: 1,
            saturation_guard: true,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if let Mode::Sampled { shots: 0 } = self.mode {
            return Err(Error::invalid("sampled mode needs at least one shot"));
        }
        if self.retry_budget == 0 {
            return Err(Error::invalid("retry budget must be >= 1"));
        }
        if !(1..=crate::phase::MAX_CONTROL_QUBITS).contains(&self.control_qubits) {
            return Err(Error::invalid("control register width outside [1, 8]"));
        }
        match self.normalization {
            NormalizationStrategy::Sigmoid {
                beta: BetaMode::Fixed(b),
                ..
            } if !(b.is_finite() && b > 0.0) => Err(Error::invalid("sigmoid beta must be > 0")),
            NormalizationStrategy::Explicit(n) => n.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    RoundsRaisedFromZero,
    /// All costs coincide; every normalized cost is taken as zero.
    DegenerateBounds,
    /// The control `|0⟩` branch vanished and `Δ` was capped at `π/2 − ε`.
    SaturationGuard,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Warning::RoundsRaisedFromZero => "round formula gave 0; running 1 Grover round",
            Warning::DegenerateBounds => {
                "cost bounds are degenerate (all costs equal); using normalized cost 0 everywhere"
            }
            Warning::SaturationGuard => {
                "every control-|0> amplitude vanished; phase angles capped at pi/2 - 1e-12"
            }
        })
    }
}

/// Brute-force verdict on the reported argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub optimum: Optimum,
    /// Basis indices of all optimal schedules, ascending.
    pub optimal_basis: Vec<u64>,
    pub argmax_is_optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub qubits: u32,
    pub rounds: u64,
    pub normalization: Option<Normalization>,
    /// Most probable outcome (exact mode) or most frequent sample.
    pub argmax: u64,
    pub argmax_schedule: Option<Schedule>,
    pub argmax_cost: Rational,
    pub p0: f64,
    pub p_argmax_conditional: f64,
    pub p_argmax_joint: f64,
    /// Feasible probability mass right after the Grover rounds.
    pub feasible_mass: f64,
    /// Control measurements that came out `|1⟩` in sampled mode.
    pub retries: u64,
    pub oracle: Option<OracleCheck>,
    pub warnings: Vec<Warning>,
}

impl RunReport {
    pub fn oracle_optimal(&self) -> Option<bool> {
        self.oracle.as_ref().map(|o| o.argmax_is_optimal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub basis: u64,
    /// Decoded slot task indices, 0-based; may repeat for infeasible rows.
    pub slots: Vec<usize>,
    pub feasible: bool,
    pub cost: Rational,
    /// Unnormalized control-`|0⟩` amplitude.
    pub amplitude: Complex,
    pub p_joint: f64,
    pub p_conditional: f64,
}

impl DistributionRow {
    pub fn schedule(&self) -> Option<Schedule> {
        self.feasible
            .then(|| Schedule::new(self.slots.clone()).expect("feasible row"))
    }
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub report: RunReport,
    /// Control-`|0⟩` branch before renormalization.
    pub branch0: Vec<Complex>,
    pub samples: Option<SampledRun>,
    encoding: Encoding,
    evaluator: CostEvaluator,
}

impl PipelineRun {
    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn conditional(&self) -> Vec<f64> {
        self.branch0
            .iter()
            .map(|a| a.norm_sqr() / self.report.p0)
            .collect()
    }

    /// One row per basis state, by conditional probability descending, then
    /// basis index ascending.
    pub fn distribution(&self) -> Vec<DistributionRow> {
        let mut rows: Vec<DistributionRow> = self
            .branch0
            .iter()
            .enumerate()
            .map(|(i, &amplitude)| {
                let basis = i as u64;
                let slots = self.encoding.decode(basis);
                let p_joint = amplitude.norm_sqr();
                DistributionRow {
                    basis,
                    feasible: self.encoding.is_feasible(basis),
                    cost: self.evaluator.cost(&slots),
                    slots,
                    amplitude,
                    p_joint,
                    p_conditional: p_joint / self.report.p0,
                }
            })
            .collect();
        rows.sort_by(|a, b| {
            b.p_conditional
                .partial_cmp(&a.p_conditional)
                .unwrap_or(Ordering::Equal)
                .then(a.basis.cmp(&b.basis))
        });
        rows
    }
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Maps scaled costs to normalized costs exactly where possible.
enum Normalizer {
    Zero,
    /// `Fₙ = (s·q − p·D)·v / (D·q·u)` for `min = p/q`, `max − min = u/v`.
    MinMax {
        q: i128,
        pd: i128,
        v: i128,
        den: i128,
    },
    Sigmoid {
        alpha: f64,
        beta: f64,
        denominator: f64,
    },
}

impl Normalizer {
    fn new(norm: Option<Normalization>, eval: &CostEvaluator) -> Self {
        let d = eval.denominator();
        match norm {
            None => Normalizer::Zero,
            Some(Normalization::MinMax { min, max }) => {
                let range = max - min;
                Normalizer::MinMax {
                    q: *min.denom(),
                    pd: min.numer() * d,
                    v: *range.denom(),
                    den: d * min.denom() * range.numer(),
                }
            }
            Some(Normalization::Sigmoid { alpha, beta }) => Normalizer::Sigmoid {
                alpha,
                beta,
                denominator: d as f64,
            },
        }
    }

    fn apply(&self, scaled: i128) -> Result<f64> {
        match *self {
            Normalizer::Zero => Ok(0.0),
            Normalizer::MinMax { q, pd, v, den } => {
                let num = (scaled * q - pd) * v;
                if num < 0 || num > den {
                    return Err(Error::invalid(
                        "a basis-state cost falls outside the min-max bounds",
                    ));
                }
                Ok(num as f64 / den as f64)
            }
            Normalizer::Sigmoid {
                alpha,
                beta,
                denominator,
            } => {
                let x = beta * (scaled as f64 / denominator - alpha);
                Ok(1.0 / (1.0 + libm::exp(-x)))
            }
        }
    }
}

/// Resolves the configured strategy for this instance. `None` means every
/// normalized cost is zero (degenerate bounds).
pub fn resolve_normalization<R: Rng + ?Sized>(
    inst: &Instance,
    cfg: &PipelineConfig,
    rng: &mut R,
    warnings: &mut Vec<Warning>,
) -> Result<Option<Normalization>> {
    match cfg.normalization {
        NormalizationStrategy::Explicit(n) => {
            n.validate()?;
            Ok(Some(n))
        }
        NormalizationStrategy::MinMax { bounds } => {
            let (min, max) = cost_bounds(inst, cfg.lateness, bounds)?;
            if min == max {
                warnings.push(Warning::DegenerateBounds);
                return Ok(None);
            }
            Ok(Some(Normalization::MinMax { min, max }))
        }
        NormalizationStrategy::Sigmoid { alpha, beta } => {
            let needs_pair = alpha == AlphaMode::MidpointRandom || beta == BetaMode::Auto;
            let pair = if needs_pair {
                Some(sample_cost_pair(inst, cfg.lateness, rng)?)
            } else {
                None
            };
            let alpha = match (alpha, pair) {
                (AlphaMode::MidpointRandom, Some((a, b))) => {
                    crate::sched::rational_to_f64(&((a + b) / 2))
                }
                (mode, _) => choose_alpha(inst, cfg.lateness, mode, rng)?,
            };
            let beta = match beta {
                BetaMode::Fixed(b) => b,
                BetaMode::Auto => {
                    let (a, b) = pair.expect("pair drawn for auto beta");
                    auto_beta(inst, cfg.lateness, a, b)?
                }
            };
            let n = Normalization::Sigmoid { alpha, beta };
            n.validate()?;
            Ok(Some(n))
        }
    }
}

/// `β` with `β·|F(s₁) − F(s₂)| = 10`, capped so that `β` times the
/// conservative cost span stays below 700.
pub fn auto_beta(inst: &Instance, lateness: Lateness, a: Rational, b: Rational) -> Result<f64> {
    let (lo, hi) = cost_bounds(inst, lateness, BoundsMode::Conservative)?;
    let span = crate::sched::rational_to_f64(&(hi - lo));
    let spread = crate::sched::rational_to_f64(&(a - b)).abs();
    let beta = if spread > 0.0 {
        AUTO_BETA_SPREAD / spread
    } else if span > 0.0 {
        AUTO_BETA_SPREAD / span
    } else {
        1.0
    };
    Ok(if span > 0.0 {
        beta.min(MAX_BETA_SPAN / span)
    } else {
        beta
    })
}

/// Runs the optimizer on a power-of-two instance.
pub fn run_pipeline(inst: &Instance, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    if !inst.is_power_of_two() {
        return Err(Error::invalid(alloc::format!(
            "instance has {} tasks; pad it to a power of two first",
            inst.len()
        )));
    }
    let encoding = Encoding::for_instance(inst)?;
    let qubits = encoding.qubits();
    let mut state = StateVector::uniform(qubits, cfg.max_qubits)?;
    let mut rng = seeded(cfg.seed, cfg.stream);
    let mut warnings = Vec::new();

    let normalization = resolve_normalization(inst, cfg, &mut rng, &mut warnings)?;

    let marked = encoding.feasible_count();
    let plan = match cfg.rounds {
        Rounds::Auto => GroverPlan::auto(qubits, marked)?,
        Rounds::Fixed(r) => GroverPlan::fixed(qubits, marked, r)?,
    };
    if plan.raised_from_zero {
        warnings.push(Warning::RoundsRaisedFromZero);
    }
    if qubits <= FEASIBILITY_CACHE_QUBITS {
        let mask: Vec<bool> = (0..encoding.states())
            .map(|v| encoding.is_feasible(v))
            .collect();
        run_grover(&mut state, |i| mask[i as usize], plan.rounds);
    } else {
        run_grover(&mut state, |i| encoding.is_feasible(i), plan.rounds);
    }
    let feasible_mass = crate::state::stable_sum(
        state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| encoding.is_feasible(*i as u64))
            .map(|(_, a)| a.norm_sqr()),
    );

    let evaluator = CostEvaluator::new(inst, cfg.lateness);
    let normalizer = Normalizer::new(normalization, &evaluator);
    let mut slots = alloc::vec![0; encoding.tasks()];
    let mut normalized = Vec::with_capacity(state.len());
    for v in 0..encoding.states() {
        encoding.decode_into(v, &mut slots);
        normalized.push(normalizer.apply(evaluator.scaled(&slots))?);
    }

    let (branch0, p0) = match phase_branch(&state, &normalized, cfg.control_qubits) {
        Err(Error::PostSelectionImpossible) if cfg.saturation_guard => {
            warnings.push(Warning::SaturationGuard);
            let cap = (FRAC_PI_2 - SATURATION_EPSILON) / FRAC_PI_2;
            normalized.iter_mut().for_each(|f| *f = f.min(cap));
            phase_branch(&state, &normalized, cfg.control_qubits)?
        }
        other => other?,
    };
    drop(normalized);
    drop(state);

    let (argmax_index, retries, samples) = match cfg.mode {
        Mode::Exact => (argmax(branch0.iter().map(|a| a.norm_sqr())) as u64, 0, None),
        Mode::Sampled { shots } => {
            let sampler = Sampler::new(&branch0.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())?;
            let run = sample_with_restarts(
                shots,
                cfg.retry_budget,
                p0,
                &mut rng,
                |rng: &mut ChaCha8Rng| (rng.random::<f64>() < p0).then(|| sampler.draw(rng)),
            )?;
            let best = run.most_frequent().expect("at least one shot");
            (best, run.restarts, Some(run))
        }
    };

    let p_argmax_joint = branch0[argmax_index as usize].norm_sqr();
    let argmax_schedule = encoding.schedule(argmax_index);
    let argmax_cost = evaluator.cost(&encoding.decode(argmax_index));
    let oracle = if inst.len() <= cfg.enumeration_limit {
        let optimum = brute_force_optimum(inst, cfg.lateness, cfg.enumeration_limit)?;
        let mut optimal_basis = optimum
            .schedules
            .iter()
            .map(|s| encoding.encode(s))
            .collect::<Result<Vec<_>>>()?;
        optimal_basis.sort_unstable();
        let argmax_is_optimal = argmax_schedule.is_some() && argmax_cost == optimum.cost;
        Some(OracleCheck {
            optimum,
            optimal_basis,
            argmax_is_optimal,
        })
    } else {
        None
    };

    Ok(PipelineRun {
        report: RunReport {
            qubits,
            rounds: plan.rounds,
            normalization,
            argmax: argmax_index,
            argmax_schedule,
            argmax_cost,
            p0,
            p_argmax_conditional: p_argmax_joint / p0,
            p_argmax_joint,
            feasible_mass,
            retries,
            oracle,
            warnings,
        },
        branch0,
        samples,
        encoding,
        evaluator,
    })
}

/// Control-`|0⟩` (all-zeros) branch and its probability.
fn phase_branch(
    state: &StateVector,
    normalized: &[f64],
    control_qubits: u32,
) -> Result<(Vec<Complex>, f64)> {
    if control_qubits == 1 {
        let split = state.split_by_control(&crate::phase::phase_angles(normalized)?)?;
        Ok((split.branch0, split.p0))
    } else {
        let joint = simulate_control_register(state, normalized, control_qubits)?;
        let branch = joint.branch(0);
        let p0 = norm_sqr(&branch);
        if p0 == 0.0 {
            return Err(Error::PostSelectionImpossible);
        }
        Ok((branch, p0))
    }
}

/// Runs the pipeline in exact mode and tabulates the final distribution.
pub fn exact_distribution(inst: &Instance, cfg: &PipelineConfig) -> Result<Vec<DistributionRow>> {
    let cfg = PipelineConfig {
        mode: Mode::Exact,
        ..*cfg
    };
    Ok(run_pipeline(inst, &cfg)?.distribution())
}
