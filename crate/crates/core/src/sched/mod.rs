//! Classical problem model: tasks, schedules, costs and the brute-force oracle.

mod encoding;
mod normalize;
mod oracle;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::{Error, Result};

pub use encoding::{cost_of_basis, to_onehot_vector, CostEvaluator, Encoding};
pub use normalize::{
    choose_alpha, cost_bounds, normalize_minmax, normalize_sigmoid, sample_cost_pair, AlphaMode,
    BoundsMode, Normalization,
};
pub use oracle::{brute_force_optimum, for_each_permutation, Optimum, DEFAULT_ENUMERATION_LIMIT};

/// Exact cost arithmetic.
///
/// Inputs are decimals, so every value is a ratio with a small denominator;
/// `i128` leaves plenty of headroom for the instance sizes the register can
/// hold.
pub type Rational = Ratio<i128>;

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub length: Rational,
    pub deadline: Rational,
    pub weight: Rational,
    pub is_dummy: bool,
}

impl Task {
    pub fn new(length: Rational, deadline: Rational, weight: Rational) -> Result<Self> {
        for (name, v) in [
            ("length", &length),
            ("deadline", &deadline),
            ("weight", &weight),
        ] {
            if v.is_negative() {
                return Err(Error::invalid(alloc::format!(
                    "task {name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(Task {
            length,
            deadline,
            weight,
            is_dummy: false,
        })
    }

    /// Convenience constructor for integer data.
    pub fn from_ints(length: i64, deadline: i64, weight: i64) -> Result<Self> {
        Task::new(
            Rational::from_integer(length.into()),
            Rational::from_integer(deadline.into()),
            Rational::from_integer(weight.into()),
        )
    }

    /// Padding task. Zero weight makes its contribution vanish for any
    /// completion time, which stands in for an unbounded deadline.
    pub fn dummy() -> Self {
        Task {
            length: Rational::zero(),
            deadline: Rational::zero(),
            weight: Rational::zero(),
            is_dummy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    tasks: Vec<Task>,
    original_count: usize,
}

impl Instance {
    pub fn new(tasks: Vec<Task>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::invalid("instance needs at least one task"));
        }
        if tasks.iter().any(|t| t.is_dummy) {
            return Err(Error::invalid("dummy tasks are only added by padding"));
        }
        let original_count = tasks.len();
        Ok(Instance {
            tasks,
            original_count,
        })
    }

    /// Number of tasks, dummies included.
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn original_count(&self) -> usize {
        self.original_count
    }

    pub fn is_padded(&self) -> bool {
        self.original_count < self.tasks.len()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.tasks.len().is_power_of_two()
    }
}

/// Appends dummy tasks until the task count is a power of two.
pub fn pad_instance(inst: &Instance) -> Instance {
    let target = inst.len().next_power_of_two();
    let mut tasks = inst.tasks.clone();
    tasks.resize(target, Task::dummy());
    Instance {
        tasks,
        original_count: inst.original_count,
    }
}

/// A permutation of task indices; `slots[m]` is the task run in slot `m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Schedule {
    slots: Vec<usize>,
}

impl Schedule {
    pub fn new(slots: Vec<usize>) -> Result<Self> {
        if !is_permutation(&slots) {
            return Err(Error::invalid(alloc::format!(
                "{slots:?} is not a permutation"
            )));
        }
        Ok(Schedule { slots })
    }

    /// Builds a schedule from 1-based task numbers.
    pub fn from_one_based(slots: &[usize]) -> Result<Self> {
        if slots.contains(&0) {
            return Err(Error::invalid("task numbers are 1-based"));
        }
        Schedule::new(slots.iter().map(|s| s - 1).collect())
    }

    pub fn identity(m: usize) -> Self {
        Schedule {
            slots: (0..m).collect(),
        }
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s + 1).collect()
    }
}

/// Formats with 1-based task numbers, e.g. `[2, 3, 1]`.
impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", s + 1)?;
        }
        f.write_str("]")
    }
}

pub(crate) fn is_permutation(slots: &[usize]) -> bool {
    let mut seen = vec![false; slots.len()];
    for &s in slots {
        if s >= slots.len() || seen[s] {
            return false;
        }
        seen[s] = true;
    }
    true
}

/// How a slot's lateness `C − d` enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lateness {
    /// `C − d` as is; early completion earns a negative term.
    #[default]
    Literal,
    /// `max(0, C − d)`, the classical tardiness.
    Clamped,
}

impl Lateness {
    pub fn from_clamp(clamp: bool) -> Self {
        if clamp {
            Lateness::Clamped
        } else {
            Lateness::Literal
        }
    }

    pub(crate) fn apply(self, late: Rational) -> Rational {
        match self {
            Lateness::Literal => late,
            Lateness::Clamped if late.is_negative() => Rational::zero(),
            Lateness::Clamped => late,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    pub lateness: Lateness,
    pub normalization: Normalization,
}

impl CostSpec {
    pub fn new(lateness: Lateness, normalization: Normalization) -> Result<Self> {
        normalization.validate()?;
        Ok(CostSpec {
            lateness,
            normalization,
        })
    }
}

fn check_matches(s: &Schedule, inst: &Instance) -> Result<()> {
    if s.len() != inst.len() {
        return Err(Error::invalid(alloc::format!(
            "schedule has {} slots, instance has {} tasks",
            s.len(),
            inst.len()
        )));
    }
    Ok(())
}

/// Completion time of each slot: running sum of the assigned task lengths.
pub fn completion_times(s: &Schedule, inst: &Instance) -> Result<Vec<Rational>> {
    check_matches(s, inst)?;
    let mut acc = Rational::zero();
    Ok(s.slots
        .iter()
        .map(|&task| {
            acc += inst.tasks[task].length;
            acc
        })
        .collect())
}

/// Total weighted lateness (or tardiness) of a schedule.
///
/// Weight and deadline follow the task placed in each slot.
pub fn twt_cost(s: &Schedule, inst: &Instance, lateness: Lateness) -> Result<Rational> {
    let completions = completion_times(s, inst)?;
    Ok(s.slots
        .iter()
        .zip(&completions)
        .map(|(&task, c)| {
            let t = &inst.tasks[task];
            t.weight * lateness.apply(c - t.deadline)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    pub(crate) fn inst(t: &[i64], d: &[i64], w: &[i64]) -> Instance {
        Instance::new(
            t.iter()
                .zip(d)
                .zip(w)
                .map(|((&t, &d), &w)| Task::from_ints(t, d, w).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    fn sched(one_based: &[usize]) -> Schedule {
        Schedule::from_one_based(one_based).unwrap()
    }

    #[test]
    fn completion_times_are_prefix_sums() {
        let i2 = inst(&[1, 2], &[0, 0], &[1, 1]);
        assert_eq!(
            completion_times(&sched(&[1, 2]), &i2).unwrap(),
            [r(1), r(3)]
        );
        assert_eq!(
            completion_times(&sched(&[2, 1]), &i2).unwrap(),
            [r(2), r(3)]
        );
        let i3 = inst(&[2, 1, 3], &[0, 0, 0], &[1, 1, 1]);
        assert_eq!(
            completion_times(&sched(&[2, 3, 1]), &i3).unwrap(),
            [r(1), r(4), r(6)]
        );
    }

    #[test]
    fn completion_times_rejects_mismatched_lengths() {
        let i2 = inst(&[1, 2], &[0, 0], &[1, 1]);
        assert!(matches!(
            completion_times(&Schedule::identity(3), &i2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn twt_cost_examples() {
        let i2 = inst(&[1, 2], &[1, 2], &[1, 1]);
        assert_eq!(
            twt_cost(&sched(&[1, 2]), &i2, Lateness::Literal).unwrap(),
            r(1)
        );
        assert_eq!(
            twt_cost(&sched(&[2, 1]), &i2, Lateness::Literal).unwrap(),
            r(2)
        );

        let sym = inst(&[1, 1], &[0, 0], &[1, 1]);
        assert_eq!(
            twt_cost(&sched(&[1, 2]), &sym, Lateness::Literal).unwrap(),
            r(3)
        );
        assert_eq!(
            twt_cost(&sched(&[2, 1]), &sym, Lateness::Literal).unwrap(),
            r(3)
        );

        let i3 = inst(&[2, 1, 3], &[2, 3, 4], &[1, 2, 3]);
        assert_eq!(
            twt_cost(&sched(&[2, 3, 1]), &i3, Lateness::Literal).unwrap(),
            r(0)
        );
    }

    #[test]
    fn clamped_lateness_drops_early_credit() {
        let i3 = inst(&[2, 1, 3], &[2, 3, 4], &[1, 2, 3]);
        // slot terms: 2·(1−3) = −4, 3·(4−4) = 0, 1·(6−2) = 4
        assert_eq!(
            twt_cost(&sched(&[2, 3, 1]), &i3, Lateness::Clamped).unwrap(),
            r(4)
        );
    }

    #[test]
    fn padding_rounds_up_to_power_of_two() {
        let i3 = inst(&[2, 1, 3], &[2, 3, 4], &[1, 2, 3]);
        let p = pad_instance(&i3);
        assert_eq!(p.len(), 4);
        assert_eq!(p.original_count(), 3);
        assert_eq!(p.tasks()[3], Task::dummy());

        let i4 = inst(&[1; 4], &[1; 4], &[1; 4]);
        assert_eq!(pad_instance(&i4), i4);

        let i5 = inst(&[1; 5], &[1; 5], &[1; 5]);
        let p5 = pad_instance(&i5);
        assert_eq!(p5.len(), 8);
        assert!(p5.tasks()[5..].iter().all(|t| t.is_dummy));
    }

    #[test]
    fn padded_cost_matches_restriction_to_real_tasks() {
        let i3 = inst(&[2, 1, 3], &[2, 3, 4], &[1, 2, 3]);
        let p = pad_instance(&i3);
        for_each_permutation(4, |slots| {
            let padded = Schedule::new(slots.to_vec()).unwrap();
            let real: Vec<usize> = slots.iter().copied().filter(|&s| s < 3).collect();
            let real = Schedule::new(real).unwrap();
            for lateness in [Lateness::Literal, Lateness::Clamped] {
                assert_eq!(
                    twt_cost(&padded, &p, lateness).unwrap(),
                    twt_cost(&real, &i3, lateness).unwrap()
                );
            }
        });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Instance::new(Vec::new()).is_err());
        assert!(Task::from_ints(-1, 0, 0).is_err());
        assert!(Task::from_ints(0, 0, -2).is_err());
        assert!(Schedule::new(vec![0, 0]).is_err());
        assert!(Schedule::new(vec![0, 2]).is_err());
        assert_eq!(sched(&[2, 3, 1]).to_string(), "[2, 3, 1]");
    }
}
