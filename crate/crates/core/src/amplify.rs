//! Grover amplitude amplification over a known number of marked states.

use core::f64::consts::FRAC_PI_4;

use crate::state::StateVector;
use crate::{Error, Result};

/// Round plan for `marked` solutions among `2^qubits` basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroverPlan {
    pub qubits: u32,
    pub marked: u64,
    pub rounds: u64,
    /// The floor formula gave zero and the plan was raised to one round.
    pub raised_from_zero: bool,
}

impl GroverPlan {
    /// `⌊(π/4)·√(2^N/K)⌋` rounds, but at least one while unmarked states
    /// remain.
    pub fn auto(qubits: u32, marked: u64) -> Result<Self> {
        let rounds = grover_rounds_auto(qubits, marked)?;
        let raise = rounds == 0 && marked < states(qubits);
        Ok(GroverPlan {
            qubits,
            marked,
            rounds: if raise { 1 } else { rounds },
            raised_from_zero: raise,
        })
    }

    pub fn fixed(qubits: u32, marked: u64, rounds: u64) -> Result<Self> {
        check_marked(qubits, marked)?;
        Ok(GroverPlan {
            qubits,
            marked,
            rounds,
            raised_from_zero: false,
        })
    }

    pub fn unmarked(&self) -> u64 {
        states(self.qubits) - self.marked
    }
}

fn states(qubits: u32) -> u64 {
    1u64 << qubits
}

fn check_marked(qubits: u32, marked: u64) -> Result<()> {
    if qubits > 63 {
        return Err(Error::invalid("at most 63 qubits"));
    }
    if marked == 0 || marked > states(qubits) {
        return Err(Error::invalid(alloc::format!(
            "marked count {marked} outside [1, 2^{qubits}]"
        )));
    }
    Ok(())
}

pub fn grover_rounds_auto(qubits: u32, marked: u64) -> Result<u64> {
    check_marked(qubits, marked)?;
    let ratio = libm::exp2(qubits as f64) / marked as f64;
    Ok(libm::floor(FRAC_PI_4 * libm::sqrt(ratio)) as u64)
}

/// Applies `rounds` iterations of (phase flip on marked; inversion about the
/// mean). The predicate is evaluated on the fly for each basis index.
pub fn run_grover(state: &mut StateVector, mut predicate: impl FnMut(u64) -> bool, rounds: u64) {
    for _ in 0..rounds {
        state.phase_flip_where(&mut predicate);
        state.invert_about_mean();
    }
}

/// The two amplitude levels after the first round from a uniform start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOneAmplitudes {
    pub unmarked: f64,
    pub marked: f64,
}

/// `1/√2^N − 2K/√2^{3N−2}` on unmarked states and `3/√2^N − 2K/√2^{3N−2}`
/// on marked states.
pub fn closed_form_round1(qubits: u32, marked: u64) -> Result<RoundOneAmplitudes> {
    check_marked(qubits, marked)?;
    let n = qubits as f64;
    let base = 1.0 / libm::sqrt(libm::exp2(n));
    let shift = 2.0 * marked as f64 / libm::sqrt(libm::exp2(3.0 * n - 2.0));
    Ok(RoundOneAmplitudes {
        unmarked: base - shift,
        marked: 3.0 * base - shift,
    })
}

/// Marked-state probability after `rounds` rounds: `sin²((2r+1)θ)` with
/// `sin θ = √(K/2^N)`.
pub fn closed_form_success(qubits: u32, marked: u64, rounds: u64) -> Result<f64> {
    check_marked(qubits, marked)?;
    let theta = libm::asin(libm::sqrt(marked as f64 / libm::exp2(qubits as f64)));
    let s = libm::sin((2 * rounds + 1) as f64 * theta);
    Ok(s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sched::Encoding;
    use crate::state::uniform_state;

    #[test]
    fn auto_rounds_examples() {
        assert_eq!(grover_rounds_auto(2, 2).unwrap(), 1);
        assert_eq!(grover_rounds_auto(8, 24).unwrap(), 2);
        assert_eq!(grover_rounds_auto(24, 40320).unwrap(), 16);
        assert_eq!(grover_rounds_auto(10, 1).unwrap(), 25);
        assert!(grover_rounds_auto(2, 0).is_err());
        assert!(grover_rounds_auto(2, 5).is_err());
    }

    #[test]
    fn plan_raises_zero_rounds() {
        // ⌊π/4·√(4/3)⌋ = 0
        let p = GroverPlan::auto(2, 3).unwrap();
        assert_eq!(p.rounds, 1);
        assert!(p.raised_from_zero);
        let full = GroverPlan::auto(2, 4).unwrap();
        assert_eq!(full.rounds, 0);
        assert!(!full.raised_from_zero);
        assert_eq!(GroverPlan::auto(8, 24).unwrap().unmarked(), 232);
    }

    #[test]
    fn round_one_closed_form_examples() {
        let a = closed_form_round1(2, 2).unwrap();
        assert_eq!((a.unmarked, a.marked), (-0.5, 0.5));
        let b = closed_form_round1(8, 24).unwrap();
        assert_eq!((b.unmarked, b.marked), (0.0390625, 0.1640625));
        let c = closed_form_round1(2, 1).unwrap();
        assert_eq!((c.unmarked, c.marked), (0.0, 1.0));
        for (n, k) in [(2u32, 1u64), (2, 2), (8, 24), (4, 3)] {
            let a = closed_form_round1(n, k).unwrap();
            let total =
                ((1u64 << n) - k) as f64 * a.unmarked * a.unmarked + k as f64 * a.marked * a.marked;
            assert!((total - 1.0).abs() < 1e-12);
            assert!(a.marked > a.unmarked);
        }
    }

    #[test]
    fn success_closed_form_examples() {
        assert!((closed_form_success(8, 24, 0).unwrap() - 24.0 / 256.0).abs() < 1e-15);
        assert!((closed_form_success(2, 2, 1).unwrap() - 0.5).abs() < 1e-15);
        // sin²(5θ) with sin²θ = 24/256, evaluated independently
        assert!((closed_form_success(8, 24, 2).unwrap() - 0.999_778_747_558_593_8).abs() < 1e-12);
    }

    #[test]
    fn simulated_round_one_matches_closed_form() {
        for (n, k) in [(2u32, 1u64), (2, 2), (8, 24), (4, 3)] {
            let mut s = uniform_state(n).unwrap();
            run_grover(&mut s, |i| i < k, 1);
            let cf = closed_form_round1(n, k).unwrap();
            for (i, a) in s.amplitudes().iter().enumerate() {
                let want = if (i as u64) < k {
                    cf.marked
                } else {
                    cf.unmarked
                };
                assert!((a.re - want).abs() < 1e-12 && a.im == 0.0);
            }
        }
    }

    #[test]
    fn zero_rounds_is_identity() {
        let mut s = uniform_state(4).unwrap();
        let before = s.clone();
        run_grover(&mut s, |i| i == 3, 0);
        assert_eq!(s, before);
    }

    #[test]
    fn m4_marked_mass_tracks_angle_recursion() {
        let enc = Encoding::new(4).unwrap();
        let auto = grover_rounds_auto(8, 24).unwrap();
        for r in 0..=3 * auto {
            let mut s = uniform_state(8).unwrap();
            run_grover(&mut s, |i| enc.is_feasible(i), r);
            let mass: f64 = s
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(i, _)| enc.is_feasible(*i as u64))
                .map(|(_, a)| a.norm_sqr())
                .sum();
            assert!(
                (mass - closed_form_success(8, 24, r).unwrap()).abs() < 1e-9,
                "r={r}"
            );
        }
    }

    #[test]
    fn marked_dominate_at_planned_rounds() {
        for (n, k) in [(8u32, 24u64), (6, 5), (10, 1), (4, 4)] {
            let plan = GroverPlan::auto(n, k).unwrap();
            let mut s = uniform_state(n).unwrap();
            run_grover(&mut s, |i| i < k, plan.rounds);
            let marked = s.amplitudes()[0].re;
            let unmarked = s.amplitudes()[(1 << n) - 1].re;
            assert!(marked > unmarked.abs(), "n={n} k={k}");
        }
    }
}
