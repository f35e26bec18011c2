//! Cost normalization into `[0, 1]` and the quantities it needs.

use alloc::vec::Vec;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    brute_force_optimum, for_each_permutation, rational_to_f64, twt_cost, CostEvaluator, Encoding,
    Instance, Lateness, Rational, Schedule, DEFAULT_ENUMERATION_LIMIT,
};
use crate::{Error, Result};

/// Largest register for which [`BoundsMode::Exact`] enumerates every basis state.
pub const EXACT_BOUNDS_MAX_QUBITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// `(F − min) / (max − min)`; `min`/`max` must bound every cost evaluated.
    MinMax { min: Rational, max: Rational },
    /// `1 / (1 + e^{−β(F − α)})`.
    Sigmoid { alpha: f64, beta: f64 },
}

impl Normalization {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Normalization::MinMax { min, max } if min == max => Err(Error::DegenerateBounds),
            Normalization::MinMax { min, max } if min > max => Err(Error::invalid(alloc::format!(
                "min-max bounds out of order: {min} > {max}"
            ))),
            Normalization::MinMax { .. } => Ok(()),
            Normalization::Sigmoid { alpha, beta } => {
                if !alpha.is_finite() {
                    return Err(Error::invalid("sigmoid alpha must be finite"));
                }
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(Error::invalid("sigmoid beta must be a positive number"));
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, cost: Rational) -> Result<f64> {
        match *self {
            Normalization::MinMax { min, max } => normalize_minmax(cost, min, max),
            Normalization::Sigmoid { alpha, beta } => Ok(normalize_sigmoid(cost, alpha, beta)),
        }
    }
}

pub fn normalize_minmax(cost: Rational, min: Rational, max: Rational) -> Result<f64> {
    if min == max {
        return Err(Error::DegenerateBounds);
    }
    if cost < min || cost > max {
        return Err(Error::invalid(alloc::format!(
            "cost {cost} outside normalization bounds [{min}, {max}]"
        )));
    }
    Ok(rational_to_f64(&((cost - min) / (max - min))))
}

pub fn normalize_sigmoid(cost: Rational, alpha: f64, beta: f64) -> f64 {
    let x = beta * (rational_to_f64(&cost) - alpha);
    1.0 / (1.0 + libm::exp(-x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundsMode {
    /// Minimum and maximum over every basis state of the register, feasible
    /// or not.
    #[default]
    Exact,
    /// `[−M·w_max·d_max, M²·w_max·t_max]`, valid for any slot assignment.
    Conservative,
}

pub fn cost_bounds(
    inst: &Instance,
    lateness: Lateness,
    mode: BoundsMode,
) -> Result<(Rational, Rational)> {
    match mode {
        BoundsMode::Exact => {
            let enc = Encoding::for_instance(inst)?;
            if enc.qubits() > EXACT_BOUNDS_MAX_QUBITS {
                return Err(Error::Capacity {
                    what: "qubits for exact bounds",
                    requested: enc.qubits().into(),
                    limit: EXACT_BOUNDS_MAX_QUBITS.into(),
                });
            }
            let eval = CostEvaluator::new(inst, lateness);
            let mut slots = alloc::vec![0; enc.tasks()];
            let (mut lo, mut hi) = (i128::MAX, i128::MIN);
            for v in 0..enc.states() {
                enc.decode_into(v, &mut slots);
                let c = eval.scaled(&slots);
                lo = lo.min(c);
                hi = hi.max(c);
            }
            Ok((eval.to_rational(lo), eval.to_rational(hi)))
        }
        BoundsMode::Conservative => {
            let max_of = |f: fn(&super::Task) -> Rational| {
                inst.tasks()
                    .iter()
                    .map(f)
                    .fold(Rational::zero(), |a, b| a.max(b))
            };
            let m = Rational::from_integer(inst.len() as i128);
            let w_max = max_of(|t| t.weight);
            let d_max = max_of(|t| t.deadline);
            let t_max = max_of(|t| t.length);
            Ok((-(m * w_max * d_max), m * m * w_max * t_max))
        }
    }
}

fn random_schedule<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Schedule {
    let mut slots: Vec<usize> = (0..m).collect();
    slots.shuffle(rng);
    Schedule::new(slots).expect("shuffled identity is a permutation")
}

/// Costs of two distinct feasible schedules drawn uniformly at random.
pub fn sample_cost_pair<R: Rng + ?Sized>(
    inst: &Instance,
    lateness: Lateness,
    rng: &mut R,
) -> Result<(Rational, Rational)> {
    if inst.len() < 2 {
        return Err(Error::invalid(
            "need at least two tasks for two distinct schedules",
        ));
    }
    let first = random_schedule(inst.len(), rng);
    let second = loop {
        let s = random_schedule(inst.len(), rng);
        if s != first {
            break s;
        }
    };
    Ok((
        twt_cost(&first, inst, lateness)?,
        twt_cost(&second, inst, lateness)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaMode {
    /// Midpoint of the costs of two random feasible schedules.
    #[default]
    MidpointRandom,
    /// Midpoint of the best and second-best distinct costs. Needs the
    /// brute-force oracle, so it is meant for experiments only.
    MidpointBestSecond,
    Fixed(f64),
}

pub fn choose_alpha<R: Rng + ?Sized>(
    inst: &Instance,
    lateness: Lateness,
    mode: AlphaMode,
    rng: &mut R,
) -> Result<f64> {
    match mode {
        AlphaMode::Fixed(v) if v.is_finite() => Ok(v),
        AlphaMode::Fixed(_) => Err(Error::invalid("alpha must be finite")),
        AlphaMode::MidpointRandom => {
            let (a, b) = sample_cost_pair(inst, lateness, rng)?;
            Ok(rational_to_f64(&((a + b) / 2)))
        }
        AlphaMode::MidpointBestSecond => {
            if inst.len() < 2 {
                return Err(Error::invalid(
                    "need at least two tasks for two distinct schedules",
                ));
            }
            let best = brute_force_optimum(inst, lateness, DEFAULT_ENUMERATION_LIMIT)?.cost;
            let mut second: Option<Rational> = None;
            let mut failed = None;
            for_each_permutation(inst.len(), |slots| {
                match twt_cost(&Schedule::new(slots.to_vec()).unwrap(), inst, lateness) {
                    Ok(c) if c > best && second.is_none_or(|s| c < s) => second = Some(c),
                    Ok(_) => {}
                    Err(e) => failed = Some(e),
                }
            });
            if let Some(e) = failed {
                return Err(e);
            }
            let second = second.unwrap_or(best);
            Ok(rational_to_f64(&((best + second) / 2)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::inst;
    use super::*;
    use crate::rng::seeded;

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn minmax_examples() {
        assert_eq!(normalize_minmax(r(1), r(1), r(2)).unwrap(), 0.0);
        assert_eq!(normalize_minmax(r(2), r(1), r(2)).unwrap(), 1.0);
        assert_eq!(normalize_minmax(r(3), r(1), r(5)).unwrap(), 0.5);
        assert_eq!(
            normalize_minmax(r(1), r(1), r(1)),
            Err(Error::DegenerateBounds)
        );
        assert!(matches!(
            normalize_minmax(r(3), r(1), r(2)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(normalize_sigmoid(r(3), 3.0, 7.0), 0.5);
        let v = normalize_sigmoid(r(2), 1.0, 2.0);
        assert!((v - 0.880_797_077_977_882_4).abs() < 1e-15, "{v}");
        let mut prev = 0.0;
        for c in -10..10 {
            let y = normalize_sigmoid(r(c), 0.5, 0.3);
            assert!(y > prev && y < 1.0);
            prev = y;
        }
    }

    #[test]
    fn normalization_validation() {
        assert!(Normalization::Sigmoid {
            alpha: 0.0,
            beta: 0.0
        }
        .validate()
        .is_err());
        assert!(Normalization::Sigmoid {
            alpha: f64::NAN,
            beta: 1.0
        }
        .validate()
        .is_err());
        assert!(Normalization::MinMax {
            min: r(2),
            max: r(1)
        }
        .validate()
        .is_err());
        assert_eq!(
            Normalization::MinMax {
                min: r(2),
                max: r(2)
            }
            .validate(),
            Err(Error::DegenerateBounds)
        );
    }

    #[test]
    fn bounds_examples() {
        let i2 = inst(&[1, 2], &[1, 2], &[1, 1]);
        assert_eq!(
            cost_bounds(&i2, Lateness::Literal, BoundsMode::Exact).unwrap(),
            (r(1), r(2))
        );
        assert_eq!(
            cost_bounds(&i2, Lateness::Literal, BoundsMode::Conservative).unwrap(),
            (r(-4), r(8))
        );
        let zero = inst(&[0, 0], &[0, 0], &[0, 0]);
        let (lo, hi) = cost_bounds(&zero, Lateness::Literal, BoundsMode::Exact).unwrap();
        assert_eq!((lo, hi), (r(0), r(0)));
        assert_eq!(normalize_minmax(r(0), lo, hi), Err(Error::DegenerateBounds));
    }

    #[test]
    fn conservative_bounds_contain_exact_bounds() {
        let i4 = inst(&[3, 1, 4, 1], &[5, 9, 2, 6], &[5, 3, 5, 8]);
        for lateness in [Lateness::Literal, Lateness::Clamped] {
            let (lo, hi) = cost_bounds(&i4, lateness, BoundsMode::Exact).unwrap();
            let (clo, chi) = cost_bounds(&i4, lateness, BoundsMode::Conservative).unwrap();
            assert!(clo <= lo && hi <= chi);
        }
    }

    #[test]
    fn alpha_modes() {
        let i2 = inst(&[1, 2], &[1, 2], &[1, 1]);
        let mut rng = seeded(3, 0);
        // only two schedules exist, with costs 1 and 2
        assert_eq!(
            choose_alpha(&i2, Lateness::Literal, AlphaMode::MidpointRandom, &mut rng).unwrap(),
            1.5
        );
        assert_eq!(
            choose_alpha(
                &i2,
                Lateness::Literal,
                AlphaMode::MidpointBestSecond,
                &mut rng
            )
            .unwrap(),
            1.5
        );
        assert_eq!(
            choose_alpha(&i2, Lateness::Literal, AlphaMode::Fixed(4.25), &mut rng).unwrap(),
            4.25
        );

        let one = inst(&[1], &[1], &[1]);
        assert!(
            choose_alpha(&one, Lateness::Literal, AlphaMode::MidpointRandom, &mut rng).is_err()
        );
    }

    #[test]
    fn random_pair_is_distinct_and_reproducible() {
        let i4 = inst(&[3, 1, 4, 1], &[5, 9, 2, 6], &[5, 3, 5, 8]);
        let a = sample_cost_pair(&i4, Lateness::Literal, &mut seeded(11, 0)).unwrap();
        let b = sample_cost_pair(&i4, Lateness::Literal, &mut seeded(11, 0)).unwrap();
        assert_eq!(a, b);
    }
}
