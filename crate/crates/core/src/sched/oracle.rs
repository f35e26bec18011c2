//! Exhaustive search over all `M!` schedules.

use alloc::vec::Vec;

use super::{twt_cost, Instance, Lateness, Rational, Schedule};
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_LIMIT: usize = 8;

/// All minimizers (sorted) and the minimum cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub schedules: Vec<Schedule>,
    pub cost: Rational,
}

impl Optimum {
    pub fn is_unique(&self) -> bool {
        self.schedules.len() == 1
    }
}

/// Calls `f` once per permutation of `0..m` (Heap's algorithm).
pub fn for_each_permutation(m: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut counters = alloc::vec![0usize; m];
    f(&perm);
    let mut i = 1;
    while i < m {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            perm.swap(j, i);
            f(&perm);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force_optimum(inst: &Instance, lateness: Lateness, limit: usize) -> Result<Optimum> {
    if inst.len() > limit {
        return Err(Error::Capacity {
            what: "tasks for enumeration",
            requested: inst.len() as u64,
            limit: limit as u64,
        });
    }
    let mut best: Option<Rational> = None;
    let mut schedules = Vec::new();
    let mut failed = None;
    for_each_permutation(inst.len(), |slots| {
        let s = Schedule::new(slots.to_vec()).expect("heap permutation");
        let cost = match twt_cost(&s, inst, lateness) {
            Ok(c) => c,
            Err(e) => {
                failed = Some(e);
                return;
            }
        };
        match best {
            Some(b) if cost > b => {}
            Some(b) if cost == b => schedules.push(s),
            _ => {
                best = Some(cost);
                schedules.clear();
                schedules.push(s);
            }
        }
    });
    if let Some(e) = failed {
        return Err(e);
    }
    schedules.sort();
    Ok(Optimum {
        schedules,
        cost: best.expect("at least one permutation"),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::inst;
    use super::*;
    use rand::seq::SliceRandom;
    use std::collections::BTreeSet;

    #[test]
    fn heap_visits_every_permutation_once() {
        for m in 1..=6 {
            let mut seen = BTreeSet::new();
            for_each_permutation(m, |p| {
                assert!(seen.insert(p.to_vec()));
            });
            assert_eq!(seen.len(), (1..=m).product::<usize>());
        }
    }

    #[test]
    fn optimum_examples() {
        let r = |n| Rational::from_integer(n);
        let i2 = inst(&[1, 2], &[1, 2], &[1, 1]);
        let o = brute_force_optimum(&i2, Lateness::Literal, 8).unwrap();
        assert_eq!(o.schedules, [Schedule::new(alloc::vec![0, 1]).unwrap()]);
        assert_eq!(o.cost, r(1));

        let i3 = inst(&[2, 1, 3], &[2, 3, 4], &[1, 2, 3]);
        let o = brute_force_optimum(&i3, Lateness::Literal, 8).unwrap();
        assert_eq!(o.schedules, [Schedule::new(alloc::vec![1, 2, 0]).unwrap()]);
        assert_eq!(o.cost, r(0));

        let sym = inst(&[1, 1], &[0, 0], &[1, 1]);
        let o = brute_force_optimum(&sym, Lateness::Literal, 8).unwrap();
        assert_eq!(o.schedules.len(), 2);
        assert_eq!(o.cost, r(3));
    }

    #[test]
    fn enumeration_limit() {
        let big = inst(&[1; 9], &[1; 9], &[1; 9]);
        assert!(matches!(
            brute_force_optimum(&big, Lateness::Literal, DEFAULT_ENUMERATION_LIMIT),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn optimum_bounds_random_permutations() {
        let i6 = inst(
            &[4, 2, 7, 1, 3, 5],
            &[3, 9, 10, 2, 8, 20],
            &[2, 5, 1, 4, 3, 2],
        );
        let mut rng = crate::rng::seeded(5, 0);
        for lateness in [Lateness::Literal, Lateness::Clamped] {
            let best = brute_force_optimum(&i6, lateness, 8).unwrap().cost;
            for _ in 0..1000 {
                let mut slots: Vec<usize> = (0..6).collect();
                slots.shuffle(&mut rng);
                assert!(best <= twt_cost(&Schedule::new(slots).unwrap(), &i6, lateness).unwrap());
            }
        }
    }
}
