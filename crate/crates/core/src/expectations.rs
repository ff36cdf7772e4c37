//! Versioned reference table (`data/expectations.toml`).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::model::{parse_rational, Rational};
use crate::quadratic::{perfect_square_check, ExactInertia, ExactMatrix, RestrictedForm};

const RAW: &str = include_str!("../data/expectations.toml");

#[derive(Debug, Clone, Deserialize)]
struct RawTable {
    version: u32,
    b2_tolerance: f64,
    components: BTreeMap<String, usize>,
    inertia: BTreeMap<String, [usize; 3]>,
    restricted: BTreeMap<String, RawRestricted>,
    b2: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawRestricted {
    scale: String,
    terms: Vec<(usize, usize, String)>,
    perfect_square: Option<RawSquare>,
    kernel_span: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawSquare {
    coefficient: String,
    pair: (usize, usize),
}

/// A restricted polynomial as published: `scale * Psi(lift(v))`.
#[derive(Debug, Clone)]
pub struct RestrictedExpectation {
    pub scale: Rational,
    /// `(i, j, coefficient)` with 1-based `i <= j`.
    pub terms: Vec<(usize, usize, Rational)>,
    pub perfect_square: Option<(Rational, (usize, usize))>,
    pub kernel_span: Vec<Vec<i64>>,
}

/// Per-field outcome of [`RestrictedExpectation::compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RestrictedMatch {
    pub scale: bool,
    /// `scale · R` equals the published polynomial as an exact matrix.
    pub polynomial: bool,
    pub perfect_square: bool,
    /// Lifted kernel basis equals the published basis up to order.
    pub kernel: bool,
}

impl RestrictedMatch {
    pub fn all(&self) -> bool {
        self.scale && self.polynomial && self.perfect_square && self.kernel
    }
}

impl RestrictedExpectation {
    /// Symmetric matrix of the published polynomial.
    pub fn matrix(&self, m: usize) -> ExactMatrix {
        let half = Rational::new(1.into(), 2.into());
        let mut out = ExactMatrix::zeros(m, m);
        for (i, j, c) in &self.terms {
            let (i, j) = (i - 1, j - 1);
            if i == j {
                out[(i, i)] += c;
            } else {
                let h = c * &half;
                out[(i, j)] += &h;
                out[(j, i)] += &h;
            }
        }
        out
    }

    pub fn compare(&self, r: &RestrictedForm) -> RestrictedMatch {
        let square = perfect_square_check(r).map(|s| (s.coefficient, s.pair));
        let mut computed: Vec<Vec<Rational>> = r.lifted_kernel();
        let mut expected: Vec<Vec<Rational>> = self
            .kernel_span
            .iter()
            .map(|v| v.iter().map(|&c| Rational::from_integer(c.into())).collect())
            .collect();
        computed.sort();
        expected.sort();
        RestrictedMatch {
            scale: r.scale() == &self.scale,
            polynomial: r.scaled_matrix() == self.matrix(r.m()),
            perfect_square: square == self.perfect_square,
            kernel: computed == expected,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expectations {
    pub version: u32,
    pub b2_tolerance: f64,
    pub components: BTreeMap<usize, usize>,
    pub inertia: BTreeMap<usize, ExactInertia>,
    pub restricted: BTreeMap<usize, RestrictedExpectation>,
    pub b2: BTreeMap<usize, Vec<f64>>,
}

fn key(k: &str) -> usize {
    k.parse().expect("expectation keys are player counts")
}

fn rat(s: &str) -> Rational {
    parse_rational(s).expect("expectation coefficients are rationals")
}

impl Expectations {
    fn parse(raw: &str) -> Self {
        let t: RawTable = toml::from_str(raw).expect("embedded expectations table is valid TOML");
        Self {
            version: t.version,
            b2_tolerance: t.b2_tolerance,
            components: t.components.iter().map(|(k, v)| (key(k), *v)).collect(),
            inertia: t
                .inertia
                .iter()
                .map(|(k, [p, z, q])| (key(k), ExactInertia::new(*p, *z, *q)))
                .collect(),
            restricted: t
                .restricted
                .iter()
                .map(|(k, r)| {
                    let exp = RestrictedExpectation {
                        scale: rat(&r.scale),
                        terms: r.terms.iter().map(|(i, j, c)| (*i, *j, rat(c))).collect(),
                        perfect_square: r
                            .perfect_square
                            .as_ref()
                            .map(|s| (rat(&s.coefficient), s.pair)),
                        kernel_span: r.kernel_span.clone(),
                    };
                    (key(k), exp)
                })
                .collect(),
            b2: t.b2.iter().map(|(k, v)| (key(k), v.clone())).collect(),
        }
    }
}

pub fn expectations() -> &'static Expectations {
    static TABLE: OnceLock<Expectations> = OnceLock::new();
    TABLE.get_or_init(|| Expectations::parse(RAW))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_loads() {
        let e = expectations();
        assert_eq!(e.version, 1);
        assert_eq!(e.components.len(), 8);
        assert_eq!(e.components[&4], 2);
        assert_eq!(e.inertia[&7].as_tuple(), (3, 1, 3));
        assert_eq!(e.restricted[&6].terms.len(), 6);
        assert_eq!(e.b2[&7].len(), 7);
        assert!(e.restricted[&6].perfect_square.is_none());
    }

    #[test]
    fn computed_forms_match_table() {
        for (n, exp) in &expectations().restricted {
            let r = crate::quadratic::restrict_to_symmetric(&crate::build_form(*n).unwrap());
            let m = exp.compare(&r);
            assert!(m.all(), "n={n}: {m:?}");
        }
    }

    #[test]
    fn altered_polynomial_is_rejected() {
        let mut exp = expectations().restricted[&5].clone();
        exp.terms[0].2 = Rational::from_integer((-2).into());
        let r = crate::quadratic::restrict_to_symmetric(&crate::build_form(5).unwrap());
        let m = exp.compare(&r);
        assert!(!m.polynomial && m.kernel);
    }
}
