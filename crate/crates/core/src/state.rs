//! Dense state vectors and the transforms the optimizer is built from.
//!
//! Only the operations the algorithm needs are provided: uniform preparation,
//! predicate phase flips, inversion about the mean, the analytic single
//! control-qubit phase round, and measurement. Everything is `O(2^N)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Default register cap, 2²⁴ amplitudes (256 MiB).
pub const DEFAULT_MAX_QUBITS: u32 = 24;

/// Allowed drift of `Σ|aᵢ|²` from one.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Compensated (Neumaier) sum, evaluated in index order.
pub(crate) fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn norm_sqr(amps: &[Complex]) -> f64 {
    stable_sum(amps.iter().map(|a| a.norm_sqr()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex>,
    qubits: u32,
}

impl StateVector {
    /// Every basis state with amplitude `1/√(2^N)`.
    pub fn uniform(qubits: u32, max_qubits: u32) -> Result<Self> {
        check_qubits(qubits, max_qubits)?;
        let len = 1usize << qubits;
        let a = 1.0 / libm::sqrt(len as f64);
        Ok(StateVector {
            amps: vec![Complex::new(a, 0.0); len],
            qubits,
        })
    }

    pub fn basis(qubits: u32, index: u64) -> Result<Self> {
        check_qubits(qubits, 63)?;
        if index >> qubits != 0 {
            return Err(Error::invalid("basis index out of range"));
        }
        let mut amps = vec![Complex::new(0.0, 0.0); 1 << qubits];
        amps[index as usize] = Complex::new(1.0, 0.0);
        Ok(StateVector { amps, qubits })
    }

    /// Wraps raw amplitudes; the length must be `2^N` with `N ≥ 1` and the
    /// norm must be one within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amps: Vec<Complex>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::invalid(alloc::format!(
                "state length {} is not a power of two >= 2",
                amps.len()
            )));
        }
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(alloc::format!("state norm {norm} is not 1")));
        }
        let qubits = amps.len().trailing_zeros();
        Ok(StateVector { amps, qubits })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<Complex>) -> Result<Self> {
        let norm = libm::sqrt(norm_sqr(&amps));
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps)
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Negates the amplitude of every basis index the predicate accepts.
    ///
    /// This is the net effect of the `|x, b⟩ → |x, b ⊕ h(x)⟩` oracle with its
    /// ancilla prepared in `(|0⟩ − |1⟩)/√2`, so the ancilla is never stored.
    pub fn phase_flip_where(&mut self, mut predicate: impl FnMut(u64) -> bool) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if predicate(i as u64) {
                *a = -*a;
            }
        }
        self.debug_check_norm();
    }

    /// `aᵢ → 2·mean(a) − aᵢ`, the Grover diffusion step.
    pub fn invert_about_mean(&mut self) {
        let n = self.amps.len() as f64;
        let re = stable_sum(self.amps.iter().map(|a| a.re)) / n;
        let im = stable_sum(self.amps.iter().map(|a| a.im)) / n;
        let twice_mean = Complex::new(2.0 * re, 2.0 * im);
        for a in &mut self.amps {
            *a = twice_mean - *a;
        }
        self.debug_check_norm();
    }

    /// Runs one cost-phase round against a fresh control qubit.
    ///
    /// H on the control, `e^{±jΔᵢ}` on basis `i` (sign chosen by the control
    /// bit), H again. The joint state is `Σ cosΔᵢ aᵢ|i,0⟩ + j sinΔᵢ aᵢ|i,1⟩`,
    /// returned as its two branches. Each `Δᵢ` must lie in `[0, π/2]`.
    pub fn split_by_control(&self, deltas: &[f64]) -> Result<ControlSplit> {
        if deltas.len() != self.amps.len() {
            return Err(Error::invalid(alloc::format!(
                "{} phase angles for {} amplitudes",
                deltas.len(),
                self.amps.len()
            )));
        }
        if let Some(d) = deltas.iter().find(|d| !(0.0..=FRAC_PI_2).contains(*d)) {
            return Err(Error::invalid(alloc::format!(
                "phase angle {d} outside [0, pi/2]"
            )));
        }
        let mut branch0 = Vec::with_capacity(self.amps.len());
        let mut branch1 = Vec::with_capacity(self.amps.len());
        for (a, &d) in self.amps.iter().zip(deltas) {
            // sin(π/2 − Δ) is exactly 0 at Δ = π/2, unlike cos(Δ)
            let cos = libm::sin(FRAC_PI_2 - d);
            let sin = libm::sin(d);
            branch0.push(a * cos);
            branch1.push(a * Complex::new(0.0, sin));
        }
        let p0 = norm_sqr(&branch0);
        if p0 == 0.0 {
            return Err(Error::PostSelectionImpossible);
        }
        Ok(ControlSplit {
            branch0,
            branch1,
            p0,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws `shots` independent measurements; returns counts per basis index.
    pub fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<BTreeMap<u64, u64>> {
        Sampler::new(&self.probabilities())?.sample(shots, rng)
    }

    fn debug_check_norm(&self) {
        debug_assert!(
            (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE,
            "state norm drifted to {}",
            self.norm_sqr()
        );
    }
}

pub fn uniform_state(qubits: u32) -> Result<StateVector> {
    StateVector::uniform(qubits, DEFAULT_MAX_QUBITS)
}

fn check_qubits(qubits: u32, max_qubits: u32) -> Result<()> {
    if qubits == 0 {
        return Err(Error::invalid("register needs at least one qubit"));
    }
    if qubits > max_qubits {
        return Err(Error::Capacity {
            what: "qubits",
            requested: qubits.into(),
            limit: max_qubits.into(),
        });
    }
    Ok(())
}

/// The two control branches after a phase round; see
/// [`StateVector::split_by_control`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSplit {
    /// Unnormalized amplitudes `cosΔᵢ·aᵢ` (control `|0⟩`).
    pub branch0: Vec<Complex>,
    /// Unnormalized amplitudes `j·sinΔᵢ·aᵢ` (control `|1⟩`).
    pub branch1: Vec<Complex>,
    /// Probability of reading the control as `|0⟩`.
    pub p0: f64,
}

impl ControlSplit {
    /// The variable register conditioned on control `|0⟩`.
    pub fn postselected(&self) -> Result<StateVector> {
        if self.p0 == 0.0 {
            return Err(Error::PostSelectionImpossible);
        }
        let scale = 1.0 / libm::sqrt(self.p0);
        StateVector::from_amplitudes(self.branch0.iter().map(|a| a * scale).collect())
    }

    pub fn p1(&self) -> f64 {
        norm_sqr(&self.branch1)
    }
}

/// Inverse-CDF sampler over a fixed discrete distribution.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    /// `weights` need not be normalized but must be nonnegative with a
    /// positive total.
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(weights.len());
        for &w in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid("sampling weights must be finite and >= 0"));
            }
            acc += w;
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::invalid("sampling weights sum to zero"));
        }
        Ok(Sampler { cumulative })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("non-empty");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        // u < total always holds, but guard the float edge anyway
        i.min(self.cumulative.len() - 1) as u64
    }

    pub fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<BTreeMap<u64, u64>> {
        if shots == 0 {
            return Err(Error::invalid("shots must be >= 1"));
        }
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(self.draw(rng)).or_insert(0) += 1;
        }
        Ok(counts)
    }
}
