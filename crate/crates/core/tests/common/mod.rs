#![allow(dead_code)]

use marketlab::bridge::LinearSystem;
use marketlab::circuit::{NorCircuit, Operand};
use marketlab::market::{Action, Strategy};
use marketlab::Rational;
use num_bigint::BigInt;
use rand::Rng;

/// Gates draw operands uniformly from the inputs and all earlier gates.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, m: usize) -> NorCircuit {
    let gates = (0..m)
        .map(|k| {
            let mut pick = || {
                let i = rng.random_range(0..n + k);
                if i < n {
                    Operand::Input(i)
                } else {
                    Operand::Gate(i - n)
                }
            };
            [pick(), pick()]
        })
        .collect();
    NorCircuit::new(n, gates).expect("well-formed by construction")
}

pub fn bits(v: u64, len: usize) -> Vec<bool> {
    (0..len).map(|j| v >> j & 1 == 1).collect()
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Row as (positive mask, negative mask) over at most 64 columns.
pub fn masks(row: &[i8]) -> (u64, u64) {
    row.iter()
        .enumerate()
        .fold((0, 0), |(p, n), (j, &a)| match a {
            1 => (p | 1 << j, n),
            -1 => (p, n | 1 << j),
            0 => (p, n),
            other => panic!("coefficient {other}"),
        })
}

pub fn eval_mask((p, n): (u64, u64), x: u64) -> i64 {
    (x & p).count_ones() as i64 - (x & n).count_ones() as i64
}

/// Bitmasks of every 0-1 solution of `sys`, by brute force (`h <= 20`).
pub fn solution_set(sys: &LinearSystem) -> Vec<u64> {
    assert!(sys.columns <= 20);
    let strict: Vec<_> = sys.strict.iter().map(|r| masks(r)).collect();
    let eqs: Vec<_> = sys
        .equalities
        .iter()
        .zip(&sys.rhs)
        .map(|(r, &b)| (masks(r), b))
        .collect();
    (0..1u64 << sys.columns)
        .filter(|&x| {
            strict.iter().all(|&m| eval_mask(m, x) > 0)
                && eqs.iter().all(|&(m, b)| eval_mask(m, x) == b)
        })
        .collect()
}

pub fn random_row<R: Rng>(rng: &mut R, h: usize) -> Vec<i8> {
    (0..h).map(|_| rng.random_range(-1i8..=1)).collect()
}

pub fn random_action<R: Rng>(rng: &mut R) -> Action {
    Action::try_from(rng.random_range(-1i64..=1)).unwrap()
}

/// Passive strategies mostly, with some history-dependent ones mixed in.
pub fn random_strategy<R: Rng>(rng: &mut R, days: usize) -> Strategy {
    match rng.random_range(0..10) {
        0 => Strategy::Momentum {
            k: rng.random_range(1..=2),
        },
        1 => Strategy::Contrarian {
            k: rng.random_range(1..=2),
        },
        2 => Strategy::Hold,
        _ => Strategy::Passive((0..days).map(|_| random_action(rng)).collect()),
    }
}

/// Probability vector with small integer weights.
pub fn random_probabilities<R: Rng>(rng: &mut R, h: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..h).map(|_| rng.random_range(1..=5)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| ratio(x, total)).collect()
}
