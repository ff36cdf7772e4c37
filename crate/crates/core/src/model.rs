//! Probability semantics of the symmetric game.
//!
//! `x[k-1]` is the probability that a player's effect occurs when exactly `k`
//! players, the player itself included, chose the same cause state. Causes are
//! independent fair coins.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::quadratic;

pub type Rational = BigRational;

/// Largest `n` the enumeration oracles accept unless told otherwise.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Hard ceiling: masks are `u64` and 2^n iterations must stay tractable.
const ABSOLUTE_ENUMERATION_CAP: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("player count must be at least 3, got {0}")]
    InvalidN(usize),
    #[error("enumeration over n = {n} exceeds cap {cap}")]
    EnumerationCapExceeded { n: usize, cap: usize },
    #[error("indices {0:?} must be distinct and below n")]
    InvalidIndices((usize, usize, usize)),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

/// An effect-probability vector for the symmetric game.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GamePoint {
    x: Vec<Rational>,
}

impl GamePoint {
    pub fn new(x: Vec<Rational>) -> Result<Self, ModelError> {
        if x.len() < 3 {
            return Err(ModelError::InvalidN(x.len()));
        }
        Ok(Self { x })
    }

    pub fn from_integers(x: &[i64]) -> Result<Self, ModelError> {
        Self::new(x.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    /// Builds a point from `(numerator, denominator)` pairs.
    pub fn from_ratios(x: &[(i64, i64)]) -> Result<Self, ModelError> {
        Self::new(
            x.iter()
                .map(|&(p, q)| Rational::new(p.into(), q.into()))
                .collect(),
        )
    }

    /// Exact conversion of floating coordinates (every finite `f64` is a dyadic rational).
    pub fn from_f64(x: &[f64]) -> Result<Self, ModelError> {
        let coords = x
            .iter()
            .map(|&v| Rational::from_float(v).ok_or_else(|| ModelError::Parse(v.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.x
    }

    /// True when every coordinate lies in `[0, 1]`.
    pub fn is_probabilistic(&self) -> bool {
        let one = Rational::one();
        self.x.iter().all(|v| !v.is_negative() && *v <= one)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Display for GamePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.x.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for GamePoint {
    type Err = ModelError;

    /// Parses a comma-separated list such as `1/2,0,0.25,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coords = s
            .split(',')
            .map(|tok| parse_rational(tok.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coords)
    }
}

/// Parses `p/q`, an integer, or a finite decimal literal exactly.
pub fn parse_rational(tok: &str) -> Result<Rational, ModelError> {
    let err = || ModelError::Parse(tok.to_string());
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let numer: BigInt = digits.parse().map_err(|_| err())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

/// Exact conditional-independence diagnostics for one point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    pub n: usize,
    #[serde(serialize_with = "serialize_point")]
    pub x: GamePoint,
    #[serde(serialize_with = "serialize_rational")]
    pub marginal: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub joint: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub residual: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub psi: Rational,
    /// `residual == -psi`, checked exactly.
    pub relation_ok: bool,
}

pub fn serialize_rational<S: serde::Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn serialize_point<S: serde::Serializer>(p: &GamePoint, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.n()))?;
    for v in p.coords() {
        seq.serialize_element(&v.to_string())?;
    }
    seq.end()
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `max_s |x_s - x_{n-s+1}|`; zero exactly on the palindromic (no-influence) subspace.
pub fn influence_margin(x: &GamePoint) -> Rational {
    let c = x.coords();
    let n = c.len();
    (0..n / 2)
        .map(|s| (&c[s] - &c[n - 1 - s]).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

pub fn influence_margin_f64(x: &[f64]) -> f64 {
    let n = x.len();
    (0..n / 2)
        .map(|s| (x[s] - x[n - 1 - s]).abs())
        .fold(0.0, f64::max)
}

/// `P(E_i)`: the agreement count of a player is `1 + Binomial(n-1, 1/2)`.
pub fn marginal_effect_prob(x: &GamePoint) -> Rational {
    let n = x.n();
    let total: Rational = x
        .coords()
        .iter()
        .enumerate()
        .map(|(k, v)| v * Rational::from_integer(binomial(n - 1, k)))
        .sum();
    total / Rational::from_integer(BigInt::one() << (n - 1))
}

fn check_cap(n: usize, cap: usize) -> Result<(), ModelError> {
    if n < 3 {
        return Err(ModelError::InvalidN(n));
    }
    if n > cap || n > ABSOLUTE_ENUMERATION_CAP {
        return Err(ModelError::EnumerationCapExceeded { n, cap });
    }
    Ok(())
}

/// Agreement count of `player` under the cause vector `mask` (bit p = cause of player p).
fn agreement(mask: u64, player: usize, n: usize) -> usize {
    let ones = mask.count_ones() as usize;
    if mask >> player & 1 == 1 {
        ones
    } else {
        n - ones
    }
}

/// [`independence_residual_with_indices`] for players `(0, 1, 2)`.
pub fn independence_residual(x: &GamePoint, cap: usize) -> Result<ResidualReport, ModelError> {
    independence_residual_with_indices(x, (0, 1, 2), cap)
}

/// Computes `P(E_i ∧ E_j | C_k) - P(E_i | C_k) P(E_j | C_k)` by enumerating every
/// cause vector with `c_k = 1`. Effects are independent given all causes, so each
/// cause vector contributes `x_{a_i} x_{a_j}` to the joint probability.
pub fn independence_residual_with_indices(
    x: &GamePoint,
    (i, j, k): (usize, usize, usize),
    cap: usize,
) -> Result<ResidualReport, ModelError> {
    let n = x.n();
    check_cap(n, cap)?;
    if i == j || j == k || i == k || i >= n || j >= n || k >= n {
        return Err(ModelError::InvalidIndices((i, j, k)));
    }
    // Tally agreement-count pairs first; one exact sum at the end keeps the
    // reduction order fixed.
    let mut pair_counts = vec![0u64; n * n];
    let mut single_counts = vec![0u64; n];
    for mask in 0u64..(1u64 << n) {
        if mask >> k & 1 == 0 {
            continue;
        }
        let ai = agreement(mask, i, n);
        let aj = agreement(mask, j, n);
        pair_counts[(ai - 1) * n + (aj - 1)] += 1;
        single_counts[ai - 1] += 1;
    }
    let c = x.coords();
    let weight = Rational::new(BigInt::one(), BigInt::one() << (n - 1));
    let mut joint = Rational::zero();
    for a in 0..n {
        for b in 0..n {
            let count = pair_counts[a * n + b];
            if count > 0 {
                joint += &c[a] * &c[b] * Rational::from_integer(count.into());
            }
        }
    }
    joint *= &weight;
    let mut conditional_marginal = Rational::zero();
    for (a, &count) in single_counts.iter().enumerate() {
        conditional_marginal += &c[a] * Rational::from_integer(count.into());
    }
    conditional_marginal *= &weight;

    let marginal = marginal_effect_prob(x);
    debug_assert_eq!(marginal, conditional_marginal);
    let residual = &joint - &marginal * &marginal;
    let psi = quadratic::psi_direct(c);
    let relation_ok = residual == -psi.clone();
    Ok(ResidualReport {
        n,
        x: x.clone(),
        marginal,
        joint,
        residual,
        psi,
        relation_ok,
    })
}

/// True iff every cause influences every effect: for each pair `(i, j)` some
/// assignment of the other causes exists where flipping `c_i` changes `P(E_j)`.
pub fn influence_bruteforce(x: &GamePoint, cap: usize) -> Result<bool, ModelError> {
    let n = x.n();
    check_cap(n, cap)?;
    let c = x.coords();
    for i in 0..n {
        for j in 0..n {
            let mut influenced = false;
            for mask in 0u64..(1u64 << n) {
                if mask >> i & 1 == 1 {
                    continue;
                }
                let flipped = mask | (1u64 << i);
                if c[agreement(mask, j, n) - 1] != c[agreement(flipped, j, n) - 1] {
                    influenced = true;
                    break;
                }
            }
            if !influenced {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn margin_examples() {
        let p = GamePoint::from_integers(&[1, 0, 0, 1]).unwrap();
        assert!(influence_margin(&p).is_zero());
        let p = GamePoint::from_integers(&[1, 0, 0, 0]).unwrap();
        assert_eq!(influence_margin(&p), r(1, 1));
        let p = GamePoint::from_ratios(&[(1, 2); 5]).unwrap();
        assert!(influence_margin(&p).is_zero());
    }

    #[test]
    fn marginal_examples() {
        let c = GamePoint::from_ratios(&[(3, 7); 6]).unwrap();
        assert_eq!(marginal_effect_prob(&c), r(3, 7));
        let p = GamePoint::from_integers(&[1, 0, 0]).unwrap();
        assert_eq!(marginal_effect_prob(&p), r(1, 4));
        let p = GamePoint::from_integers(&[0, 1, 1, 0]).unwrap();
        assert_eq!(marginal_effect_prob(&p), r(3, 4));
    }

    #[test]
    fn residual_three_players_alone() {
        // two players can never both be alone, so the joint probability is 0
        let p = GamePoint::from_integers(&[1, 0, 0]).unwrap();
        let rep = independence_residual(&p, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(rep.joint, r(0, 1));
        assert_eq!(rep.marginal, r(1, 4));
        assert_eq!(rep.residual, r(-1, 16));
        assert_eq!(rep.psi, r(1, 16));
        assert!(rep.relation_ok);
    }

    #[test]
    fn residual_constant_is_zero() {
        for n in 3..=9 {
            let p = GamePoint::from_ratios(&vec![(2, 9); n]).unwrap();
            let rep = independence_residual(&p, DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(rep.residual.is_zero());
            assert!(influence_margin(&p).is_zero());
        }
    }

    #[test]
    fn residual_independent_of_index_choice() {
        let p = GamePoint::from_ratios(&[(1, 3), (4, 5), (0, 1), (2, 7), (1, 1), (5, 11)]).unwrap();
        let base = independence_residual(&p, 16).unwrap();
        for idx in [(3, 5, 0), (5, 2, 4), (1, 0, 3), (4, 3, 2)] {
            let rep = independence_residual_with_indices(&p, idx, 16).unwrap();
            assert_eq!(rep.residual, base.residual, "indices {idx:?}");
            assert_eq!(rep.joint, base.joint);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let p = GamePoint::from_ratios(&vec![(1, 2); 17]).unwrap();
        assert_eq!(
            independence_residual(&p, DEFAULT_ENUMERATION_CAP),
            Err(ModelError::EnumerationCapExceeded { n: 17, cap: 16 })
        );
        assert!(matches!(
            influence_bruteforce(&p, DEFAULT_ENUMERATION_CAP),
            Err(ModelError::EnumerationCapExceeded { .. })
        ));
        let p = GamePoint::from_ratios(&[(1, 2); 6]).unwrap();
        assert!(independence_residual(&p, 5).is_err());
    }

    #[test]
    fn bad_indices_rejected() {
        let p = GamePoint::from_integers(&[1, 0, 0, 1]).unwrap();
        assert!(independence_residual_with_indices(&p, (0, 0, 1), 16).is_err());
        assert!(independence_residual_with_indices(&p, (0, 1, 4), 16).is_err());
    }

    #[test]
    fn influence_bruteforce_examples() {
        let p = GamePoint::from_integers(&[1, 0, 0, 1]).unwrap();
        assert!(!influence_bruteforce(&p, 16).unwrap());
        let p = GamePoint::from_integers(&[1, 0, 0, 0]).unwrap();
        assert!(influence_bruteforce(&p, 16).unwrap());
        assert!(influence_margin(&p) > Rational::zero());
    }

    #[test]
    fn too_few_players() {
        assert_eq!(
            GamePoint::from_integers(&[1, 0]).unwrap_err(),
            ModelError::InvalidN(2)
        );
    }

    #[test]
    fn parses_rationals() {
        let p: GamePoint = "1/2, 0, 0.25,-1.5,3".parse().unwrap();
        assert_eq!(p.coords()[0], r(1, 2));
        assert_eq!(p.coords()[2], r(1, 4));
        assert_eq!(p.coords()[3], r(-3, 2));
        assert!(!p.is_probabilistic());
        assert!("1/0,1,1".parse::<GamePoint>().is_err());
        assert!("a,1,1".parse::<GamePoint>().is_err());
        assert_eq!(p.to_string(), "(1/2, 0, 1/4, -3/2, 3)");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(4, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
    }
}
