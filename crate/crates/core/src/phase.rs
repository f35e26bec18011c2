//! Cost-phase optimization with a `c`-qubit control register.
//!
//! Each control qubit goes through H, a diagonal phase `e^{±j(π/2)Fₙ(xᵢ)}`
//! whose sign follows the control bit, and H again. Reading the control
//! register as all zeros weights basis state `i` by `cos^c Δᵢ`, which favours
//! low normalized cost; all ones weights it by `sin^c Δᵢ` and favours high
//! cost.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use rand::Rng;

use crate::sched::{Normalization, Rational};
use crate::state::{norm_sqr, Complex, Sampler, StateVector};
use crate::{Error, Result};

pub const DEFAULT_RETRY_BUDGET: u32 = 1000;
pub const MAX_CONTROL_QUBITS: u32 = 8;
pub const MAX_VARIABLE_QUBITS: u32 = 20;
/// Cap on `n + c` for explicit joint registers.
pub const MAX_JOINT_QUBITS: u32 = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Post-select the control register on all zeros.
    #[default]
    Minimize,
    /// Post-select the control register on all ones.
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Post-select analytically and report the full distribution.
    #[default]
    Exact,
    /// Measure `shots` times, restarting whenever the control register
    /// comes out wrong.
    Sampled { shots: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseConfig {
    pub control_qubits: u32,
    pub retry_budget: u32,
    pub mode: Mode,
    pub objective: Objective,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            control_qubits: 1,
            retry_budget: DEFAULT_RETRY_BUDGET,
            mode: Mode::Exact,
            objective: Objective::Minimize,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_CONTROL_QUBITS).contains(&self.control_qubits) {
            return Err(Error::invalid(alloc::format!(
                "control register width {} outside [1, {MAX_CONTROL_QUBITS}]",
                self.control_qubits
            )));
        }
        if self.retry_budget == 0 {
            return Err(Error::invalid("retry budget must be >= 1"));
        }
        if let Mode::Sampled { shots: 0 } = self.mode {
            return Err(Error::invalid("sampled mode needs at least one shot"));
        }
        Ok(())
    }
}

/// `Δᵢ = (π/2)·Fₙ(xᵢ)`; every normalized cost must lie in `[0, 1]`.
pub fn phase_angles(normalized: &[f64]) -> Result<Vec<f64>> {
    normalized
        .iter()
        .map(|&f| {
            if (0.0..=1.0).contains(&f) {
                Ok(FRAC_PI_2 * f)
            } else {
                Err(Error::invalid(alloc::format!(
                    "normalized cost {f} outside [0, 1]"
                )))
            }
        })
        .collect()
}

fn cos_sin(delta: f64) -> (f64, f64) {
    (libm::sin(FRAC_PI_2 - delta), libm::sin(delta))
}

/// One cost-phase round with a single control qubit, post-selected on `|0⟩`.
///
/// Returns the renormalized variable register and the probability `p0` of
/// reading the control as `|0⟩`.
pub fn run_phase_round(state: &StateVector, normalized: &[f64]) -> Result<(StateVector, f64)> {
    let split = state.split_by_control(&phase_angles(normalized)?)?;
    Ok((split.postselected()?, split.p0))
}

/// Amplitudes of a variable register joined with a `c`-qubit control
/// register. Index layout is `y·2^n + x`; control qubit `k` (0-based) is bit
/// `k` of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    variable_qubits: u32,
    control_qubits: u32,
    amps: Vec<Complex>,
}

impl JointState {
    pub fn variable_qubits(&self) -> u32 {
        self.variable_qubits
    }

    pub fn control_qubits(&self) -> u32 {
        self.control_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn amplitude(&self, x: u64, y: u64) -> Complex {
        self.amps[((y << self.variable_qubits) | x) as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    fn slice(&self, y: u64) -> &[Complex] {
        let n = 1usize << self.variable_qubits;
        &self.amps[y as usize * n..(y as usize + 1) * n]
    }

    /// Probability of reading the control register as `y`.
    pub fn control_probability(&self, y: u64) -> f64 {
        norm_sqr(self.slice(y))
    }

    /// Unnormalized control-`y` branch of the variable register.
    pub fn branch(&self, y: u64) -> Vec<Complex> {
        self.slice(y).to_vec()
    }

    /// Variable distribution conditioned on control outcome `y`.
    pub fn conditional(&self, y: u64) -> Result<Vec<f64>> {
        let p = self.control_probability(y);
        if p == 0.0 {
            return Err(Error::PostSelectionImpossible);
        }
        Ok(self.slice(y).iter().map(|a| a.norm_sqr() / p).collect())
    }

    pub fn target_outcome(&self, objective: Objective) -> u64 {
        match objective {
            Objective::Minimize => 0,
            Objective::Maximize => (1u64 << self.control_qubits) - 1,
        }
    }
}

fn check_joint(variable_qubits: u32, control_qubits: u32) -> Result<()> {
    if control_qubits == 0 || control_qubits > MAX_CONTROL_QUBITS {
        return Err(Error::invalid("control register width outside [1, 8]"));
    }
    if variable_qubits + control_qubits > MAX_JOINT_QUBITS {
        return Err(Error::Capacity {
            what: "joint register qubits",
            requested: (variable_qubits + control_qubits).into(),
            limit: MAX_JOINT_QUBITS.into(),
        });
    }
    Ok(())
}

/// Closed form of the joint state for a uniform variable register:
/// `(1/√2^n)·j^{|y|}·cos^{c−|y|}(Δᵢ)·sin^{|y|}(Δᵢ)` at `(xᵢ, y)`.
pub fn joint_state_closed_form(normalized: &[f64], control_qubits: u32) -> Result<JointState> {
    let len = normalized.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::invalid(
            "cost table length must be a power of two >= 2",
        ));
    }
    let n = len.trailing_zeros();
    check_joint(n, control_qubits)?;
    let deltas = phase_angles(normalized)?;
    let scale = 1.0 / libm::sqrt(len as f64);
    let j_powers = [
        Complex::new(1.0, 0.0),
        Complex::new(0.0, 1.0),
        Complex::new(-1.0, 0.0),
        Complex::new(0.0, -1.0),
    ];
    let mut amps = Vec::with_capacity(len << control_qubits);
    for y in 0..1u64 << control_qubits {
        let ones = y.count_ones();
        for &d in &deltas {
            let (cos, sin) = cos_sin(d);
            let magnitude = libm::pow(cos, (control_qubits - ones) as f64)
                * libm::pow(sin, ones as f64)
                * scale;
            amps.push(j_powers[(ones % 4) as usize] * magnitude);
        }
    }
    Ok(JointState {
        variable_qubits: n,
        control_qubits,
        amps,
    })
}

fn hadamard_on(amps: &mut [Complex], bit: u32) {
    let stride = 1usize << bit;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (a, b) = (amps[i], amps[i + stride]);
            amps[i] = (a + b) * FRAC_1_SQRT_2;
            amps[i + stride] = (a - b) * FRAC_1_SQRT_2;
        }
    }
}

/// Gate-by-gate simulation of the control rounds on an explicit
/// `variable ⊗ control` register.
///
/// For `k = 0..c`: H on control qubit `k`; `e^{+jΔᵢ}` where that qubit is
/// `|0⟩` and `e^{−jΔᵢ}` where it is `|1⟩`; H on control qubit `k` again.
pub fn simulate_control_register(
    variable: &StateVector,
    normalized: &[f64],
    control_qubits: u32,
) -> Result<JointState> {
    let n = variable.qubits();
    check_joint(n, control_qubits)?;
    if normalized.len() != variable.len() {
        return Err(Error::invalid(
            "cost table length does not match the register",
        ));
    }
    let phases: Vec<Complex> = phase_angles(normalized)?
        .into_iter()
        .map(|d| {
            let (cos, sin) = cos_sin(d);
            Complex::new(cos, sin)
        })
        .collect();
    let mask = variable.len() - 1;
    let mut amps = vec![Complex::new(0.0, 0.0); variable.len() << control_qubits];
    amps[..variable.len()].copy_from_slice(variable.amplitudes());
    for k in 0..control_qubits {
        let bit = n + k;
        hadamard_on(&mut amps, bit);
        for (idx, a) in amps.iter_mut().enumerate() {
            let phase = phases[idx & mask];
            *a *= if (idx >> bit) & 1 == 0 {
                phase
            } else {
                phase.conj()
            };
        }
        hadamard_on(&mut amps, bit);
    }
    Ok(JointState {
        variable_qubits: n,
        control_qubits,
        amps,
    })
}

/// Result of a measurement loop with restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRun {
    pub counts: BTreeMap<u64, u64>,
    /// Control-register measurements performed, successful or not.
    pub attempts: u64,
    pub restarts: u64,
}

impl SampledRun {
    pub fn most_frequent(&self) -> Option<u64> {
        // max_by_key keeps the last maximum; iterate in reverse so the lowest
        // basis index wins ties
        self.counts
            .iter()
            .rev()
            .max_by_key(|(_, &c)| c)
            .map(|(&x, _)| x)
    }

    pub fn restart_rate(&self) -> f64 {
        self.restarts as f64 / self.attempts as f64
    }
}

/// Repeats `attempt` until it yields an outcome, at most `budget` times per
/// shot. `p_success` is only reported back in the error.
pub fn sample_with_restarts<R: Rng + ?Sized>(
    shots: u64,
    budget: u32,
    p_success: f64,
    rng: &mut R,
    mut attempt: impl FnMut(&mut R) -> Option<u64>,
) -> Result<SampledRun> {
    let mut run = SampledRun {
        counts: BTreeMap::new(),
        attempts: 0,
        restarts: 0,
    };
    for _ in 0..shots {
        let mut outcome = None;
        for _ in 0..budget {
            run.attempts += 1;
            outcome = attempt(rng);
            if outcome.is_some() {
                break;
            }
            run.restarts += 1;
        }
        match outcome {
            Some(x) => *run.counts.entry(x).or_insert(0) += 1,
            None => return Err(Error::RetriesExhausted { budget, p_success }),
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrugenbergerOutcome {
    /// Exact mode: variable distribution given the target control outcome.
    Distribution {
        probabilities: Vec<f64>,
        p_select: f64,
    },
    Sampled {
        run: SampledRun,
        p_select: f64,
    },
}

impl TrugenbergerOutcome {
    pub fn p_select(&self) -> f64 {
        match self {
            TrugenbergerOutcome::Distribution { p_select, .. }
            | TrugenbergerOutcome::Sampled { p_select, .. } => *p_select,
        }
    }
}

/// The generic optimizer over an `n`-qubit variable: uniform register, `c`
/// control rounds, control measurement with restarts, variable measurement.
pub fn run_trugenberger<R: Rng + ?Sized>(
    costs: &[Rational],
    config: &PhaseConfig,
    normalization: &Normalization,
    rng: &mut R,
) -> Result<TrugenbergerOutcome> {
    config.validate()?;
    normalization.validate()?;
    if costs.len() < 2 || !costs.len().is_power_of_two() {
        return Err(Error::invalid(
            "cost table length must be a power of two >= 2",
        ));
    }
    let n = costs.len().trailing_zeros();
    if n > MAX_VARIABLE_QUBITS {
        return Err(Error::Capacity {
            what: "variable qubits",
            requested: n.into(),
            limit: MAX_VARIABLE_QUBITS.into(),
        });
    }
    let normalized = costs
        .iter()
        .map(|&c| normalization.apply(c))
        .collect::<Result<Vec<_>>>()?;
    let variable = StateVector::uniform(n, MAX_VARIABLE_QUBITS)?;
    let joint = simulate_control_register(&variable, &normalized, config.control_qubits)?;
    let target = joint.target_outcome(config.objective);
    let p_select = joint.control_probability(target);
    match config.mode {
        Mode::Exact => Ok(TrugenbergerOutcome::Distribution {
            probabilities: joint.conditional(target)?,
            p_select,
        }),
        Mode::Sampled { shots } => {
            let weights: Vec<f64> = joint.amplitudes().iter().map(|a| a.norm_sqr()).collect();
            let sampler = Sampler::new(&weights)?;
            let mask = (1u64 << n) - 1;
            let run = sample_with_restarts(shots, config.retry_budget, p_select, rng, |rng| {
                let idx = sampler.draw(rng);
                (idx >> n == target).then_some(idx & mask)
            })?;
            Ok(TrugenbergerOutcome::Sampled { run, p_select })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::state::uniform_state;

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn phase_round_examples() {
        let s = uniform_state(2).unwrap();
        let (post, p0) = run_phase_round(&s, &[0.0; 4]).unwrap();
        assert_eq!(p0, 1.0);
        assert_eq!(post, s);
        assert_eq!(
            run_phase_round(&s, &[1.0; 4]),
            Err(Error::PostSelectionImpossible)
        );

        let g = StateVector::from_amplitudes(
            [-0.5, 0.5, 0.5, -0.5]
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .collect(),
        )
        .unwrap();
        let (post, p0) = run_phase_round(&g, &[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((p0 - 0.5).abs() < 1e-15);
        let probs = post.probabilities();
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[2] - 0.5).abs() < 1e-15);
        assert_eq!(probs[1] + probs[3], 0.0);
        assert!(run_phase_round(&g, &[0.0, 1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let zero = joint_state_closed_form(&[0.0; 4], 1).unwrap();
        for x in 0..4 {
            assert_eq!(zero.amplitude(x, 0), Complex::new(0.5, 0.0));
            assert_eq!(zero.amplitude(x, 1), Complex::new(0.0, 0.0));
        }

        let fns = [0.0, 0.25, 0.5, 1.0];
        let c1 = joint_state_closed_form(&fns, 1).unwrap();
        let split = uniform_state(2)
            .unwrap()
            .split_by_control(&phase_angles(&fns).unwrap())
            .unwrap();
        for x in 0..4 {
            assert!((c1.amplitude(x, 0) - split.branch0[x as usize]).norm() < 1e-15);
            assert!((c1.amplitude(x, 1) - split.branch1[x as usize]).norm() < 1e-15);
        }

        let c2 = joint_state_closed_form(&[0.0, 1.0], 2).unwrap();
        let h = FRAC_1_SQRT_2;
        for (x, y, want) in [(0, 0, Complex::new(h, 0.0)), (1, 3, Complex::new(-h, 0.0))] {
            assert!((c2.amplitude(x, y) - want).norm() < 1e-15);
        }
        let nonzero = c2.amplitudes().iter().filter(|a| a.norm() > 1e-15).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn explicit_register_matches_closed_form() {
        let mut rng = seeded(99, 0);
        for n in 1..=3u32 {
            for c in 1..=3u32 {
                for _ in 0..5 {
                    let fns: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>()).collect();
                    let sim =
                        simulate_control_register(&uniform_state(n).unwrap(), &fns, c).unwrap();
                    let cf = joint_state_closed_form(&fns, c).unwrap();
                    for (a, b) in sim.amplitudes().iter().zip(cf.amplitudes()) {
                        assert!((a - b).norm() < 1e-12, "n={n} c={c}");
                    }
                    assert!((sim.norm_sqr() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trugenberger_examples() {
        let mut rng = seeded(1, 0);
        let cfg = PhaseConfig {
            control_qubits: 2,
            ..PhaseConfig::default()
        };
        let norm01 = Normalization::MinMax {
            min: r(0),
            max: r(1),
        };
        match run_trugenberger(&[r(0), r(1)], &cfg, &norm01, &mut rng).unwrap() {
            TrugenbergerOutcome::Distribution {
                probabilities,
                p_select,
            } => {
                assert!((p_select - 0.5).abs() < 1e-15);
                assert!((probabilities[0] - 1.0).abs() < 1e-15 && probabilities[1] < 1e-30);
            }
            other => panic!("{other:?}"),
        }

        // constant normalized cost κ = 1/3 keeps the register uniform
        let c1 = PhaseConfig::default();
        let norm = Normalization::MinMax {
            min: r(0),
            max: r(3),
        };
        let out = run_trugenberger(&[r(1); 4], &c1, &norm, &mut rng).unwrap();
        let expected = libm::cos(core::f64::consts::PI / 6.0).powi(2);
        assert!((out.p_select() - expected).abs() < 1e-15);
        if let TrugenbergerOutcome::Distribution { probabilities, .. } = out {
            assert!(probabilities.iter().all(|p| (p - 0.25).abs() < 1e-15));
        }

        let out = run_trugenberger(&[r(0), r(1), r(2), r(3)], &c1, &norm, &mut rng).unwrap();
        if let TrugenbergerOutcome::Distribution { probabilities, .. } = out {
            for (p, want) in probabilities.iter().zip([0.5, 0.375, 0.125, 0.0]) {
                assert!((p - want).abs() < 1e-15, "{p} vs {want}");
            }
        }
    }

    #[test]
    fn maximize_selects_sine_weighted_branch() {
        let cfg = PhaseConfig {
            objective: Objective::Maximize,
            ..PhaseConfig::default()
        };
        let norm = Normalization::MinMax {
            min: r(0),
            max: r(3),
        };
        let out =
            run_trugenberger(&[r(0), r(1), r(2), r(3)], &cfg, &norm, &mut seeded(1, 0)).unwrap();
        if let TrugenbergerOutcome::Distribution { probabilities, .. } = out {
            for (p, want) in probabilities.iter().zip([0.0, 0.125, 0.375, 0.5]) {
                assert!((p - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn more_control_qubits_sharpen_selection() {
        let costs: Vec<Rational> = [0, 5, 3, 9, 2, 7, 4, 8].iter().map(|&c| r(c)).collect();
        let norm = Normalization::MinMax {
            min: r(0),
            max: r(9),
        };
        let mut prev = 0.0;
        for c in 1..=4 {
            let cfg = PhaseConfig {
                control_qubits: c,
                ..PhaseConfig::default()
            };
            let out = run_trugenberger(&costs, &cfg, &norm, &mut seeded(0, 0)).unwrap();
            let TrugenbergerOutcome::Distribution { probabilities, .. } = out else {
                unreachable!()
            };
            assert!(probabilities[0] >= prev);
            prev = probabilities[0];
        }
    }

    #[test]
    fn sampled_restart_rate_matches_failure_probability() {
        let costs: Vec<Rational> = (0..8).map(r).collect();
        let norm = Normalization::MinMax {
            min: r(0),
            max: r(7),
        };
        let cfg = PhaseConfig {
            control_qubits: 2,
            mode: Mode::Sampled { shots: 4000 },
            ..PhaseConfig::default()
        };
        let out = run_trugenberger(&costs, &cfg, &norm, &mut seeded(4, 0)).unwrap();
        let TrugenbergerOutcome::Sampled { run, p_select } = out else {
            unreachable!()
        };
        let q = 1.0 - p_select;
        let sigma = (q * (1.0 - q) / run.attempts as f64).sqrt();
        assert!((run.restart_rate() - q).abs() < 3.0 * sigma);
        assert_eq!(run.counts.values().sum::<u64>(), 4000);
        assert_eq!(run.counts.get(&7), None);
    }

    #[test]
    fn exhausted_budget_reports_probability() {
        let norm = Normalization::MinMax {
            min: r(0),
            max: r(1),
        };
        let cfg = PhaseConfig {
            retry_budget: 3,
            mode: Mode::Sampled { shots: 10 },
            ..PhaseConfig::default()
        };
        let err = run_trugenberger(&[r(1); 4], &cfg, &norm, &mut seeded(0, 0)).unwrap_err();
        assert!(
            matches!(err, Error::RetriesExhausted { budget: 3, p_success } if p_success == 0.0)
        );
    }

    #[test]
    fn config_validation() {
        let bad = [
            PhaseConfig {
                control_qubits: 0,
                ..PhaseConfig::default()
            },
            PhaseConfig {
                control_qubits: 9,
                ..PhaseConfig::default()
            },
            PhaseConfig {
                retry_budget: 0,
                ..PhaseConfig::default()
            },
            PhaseConfig {
                mode: Mode::Sampled { shots: 0 },
                ..PhaseConfig::default()
            },
        ];
        assert!(bad.iter().all(|c| c.validate().is_err()));
    }
}
