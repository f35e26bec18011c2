//! Compact register encoding: one `log₂M`-bit task field per slot.

use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::One;

use super::{is_permutation, Instance, Lateness, Rational, Schedule};
use crate::{Error, Result};

/// Maps schedules to basis indices of an `N = M·log₂M` qubit register.
///
/// Slot `m` (0-based) occupies bits `[m·log₂M, (m+1)·log₂M)`, least
/// significant field first. Every index decodes to some slot assignment;
/// exactly `M!` of them are permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoding {
    tasks: usize,
    bits: u32,
}

impl Encoding {
    pub fn new(tasks: usize) -> Result<Self> {
        if tasks == 0 || !tasks.is_power_of_two() {
            return Err(Error::invalid(alloc::format!(
                "register encoding needs a power-of-two task count, got {tasks}"
            )));
        }
        let bits = tasks.trailing_zeros();
        let qubits = tasks as u64 * bits as u64;
        if qubits > 63 {
            return Err(Error::Capacity {
                what: "qubits",
                requested: qubits,
                limit: 63,
            });
        }
        Ok(Encoding { tasks, bits })
    }

    pub fn for_instance(inst: &Instance) -> Result<Self> {
        Encoding::new(inst.len())
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    pub fn bits_per_slot(&self) -> u32 {
        self.bits
    }

    pub fn qubits(&self) -> u32 {
        self.tasks as u32 * self.bits
    }

    /// `2^N`, the number of basis states.
    pub fn states(&self) -> u64 {
        1u64 << self.qubits()
    }

    /// `M!`, the number of feasible basis states.
    pub fn feasible_count(&self) -> u64 {
        (1..=self.tasks as u64).product()
    }

    pub fn decode_into(&self, value: u64, slots: &mut [usize]) {
        debug_assert_eq!(slots.len(), self.tasks);
        let mask = (1u64 << self.bits) - 1;
        for (m, slot) in slots.iter_mut().enumerate() {
            *slot = ((value >> (m as u32 * self.bits)) & mask) as usize;
        }
    }

    /// Slot task indices, repeats allowed.
    pub fn decode(&self, value: u64) -> Vec<usize> {
        let mut slots = vec![0; self.tasks];
        self.decode_into(value, &mut slots);
        slots
    }

    pub fn encode(&self, s: &Schedule) -> Result<u64> {
        self.encode_slots(s.slots())
    }

    pub(crate) fn encode_slots(&self, slots: &[usize]) -> Result<u64> {
        if slots.len() != self.tasks || !is_permutation(slots) {
            return Err(Error::invalid(alloc::format!(
                "{slots:?} is not a permutation of {} tasks",
                self.tasks
            )));
        }
        Ok(slots.iter().enumerate().fold(0u64, |acc, (m, &task)| {
            acc | (task as u64) << (m as u32 * self.bits)
        }))
    }

    pub fn is_feasible(&self, value: u64) -> bool {
        let mask = (1u64 << self.bits) - 1;
        let mut seen = 0u64;
        for m in 0..self.tasks as u32 {
            let task = (value >> (m * self.bits)) & mask;
            if seen & (1 << task) != 0 {
                return false;
            }
            seen |= 1 << task;
        }
        true
    }

    /// Decodes to a schedule when the index is a permutation.
    pub fn schedule(&self, value: u64) -> Option<Schedule> {
        self.is_feasible(value).then(|| {
            Schedule::new(self.decode(value)).expect("feasible index decodes to a permutation")
        })
    }
}

/// Concatenation of `M` one-hot blocks; block `m` marks the task in slot `m`.
pub fn to_onehot_vector(s: &Schedule) -> Vec<u8> {
    let m = s.len();
    let mut x = vec![0u8; m * m];
    for (slot, &task) in s.slots().iter().enumerate() {
        x[slot * m + task] = 1;
    }
    x
}

/// Evaluates slot-wise costs over integer-scaled data.
///
/// Lengths and deadlines are scaled by a common time denominator and weights
/// by their own, so each evaluation is a handful of `i128` operations and the
/// exact cost is `scaled / denominator`. Decoded slots may repeat tasks.
#[derive(Debug, Clone)]
pub struct CostEvaluator {
    lengths: Vec<i128>,
    deadlines: Vec<i128>,
    weights: Vec<i128>,
    denominator: i128,
    lateness: Lateness,
}

impl CostEvaluator {
    pub fn new(inst: &Instance, lateness: Lateness) -> Self {
        let lcm_of =
            |it: &mut dyn Iterator<Item = &Rational>| it.fold(1i128, |acc, r| acc.lcm(r.denom()));
        let tasks = inst.tasks();
        let time_den = lcm_of(&mut tasks.iter().flat_map(|t| [&t.length, &t.deadline]));
        let weight_den = lcm_of(&mut tasks.iter().map(|t| &t.weight));
        let scale = |r: &Rational, den: i128| (r * den).to_integer();
        CostEvaluator {
            lengths: tasks.iter().map(|t| scale(&t.length, time_den)).collect(),
            deadlines: tasks.iter().map(|t| scale(&t.deadline, time_den)).collect(),
            weights: tasks.iter().map(|t| scale(&t.weight, weight_den)).collect(),
            denominator: time_den * weight_den,
            lateness,
        }
    }

    pub fn denominator(&self) -> i128 {
        self.denominator
    }

    /// Cost numerator over [`denominator`](Self::denominator).
    pub fn scaled(&self, slots: &[usize]) -> i128 {
        let mut completion = 0i128;
        let mut total = 0i128;
        for &task in slots {
            completion += self.lengths[task];
            let mut late = completion - self.deadlines[task];
            if self.lateness == Lateness::Clamped && late.is_negative() {
                late = 0;
            }
            total += self.weights[task] * late;
        }
        total
    }

    pub fn cost(&self, slots: &[usize]) -> Rational {
        Rational::new(self.scaled(slots), self.denominator)
    }

    pub fn to_rational(&self, scaled: i128) -> Rational {
        Rational::new(scaled, self.denominator)
    }

    pub fn to_f64(&self, scaled: i128) -> f64 {
        if self.denominator.is_one() {
            scaled as f64
        } else {
            scaled as f64 / self.denominator as f64
        }
    }
}

/// Slot-wise cost of any basis state, feasible or not.
pub fn cost_of_basis(value: u64, inst: &Instance, lateness: Lateness) -> Result<Rational> {
    let enc = Encoding::for_instance(inst)?;
    if value >= enc.states() {
        return Err(Error::invalid(alloc::format!(
            "basis index {value} out of range for {} qubits",
            enc.qubits()
        )));
    }
    Ok(CostEvaluator::new(inst, lateness).cost(&enc.decode(value)))
}
