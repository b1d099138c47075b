//! Result record shared by the exact, brute-force and sampling counters.

use core::fmt;

use num_bigint::BigUint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Exact,
    Oracle,
    Estimate,
}

impl CountMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMethod::Exact => "exact",
            CountMethod::Oracle => "oracle",
            CountMethod::Estimate => "estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountValue {
    Integer(BigUint),
    Estimate(f64),
}

impl CountValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            CountValue::Integer(n) => num_traits::ToPrimitive::to_f64(n).unwrap_or(f64::INFINITY),
            CountValue::Estimate(x) => *x,
        }
    }
}

/// Plain decimal, never scientific notation.
impl fmt::Display for CountValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountValue::Integer(n) => write!(f, "{n}"),
            CountValue::Estimate(x) => write!(f, "{x:.6}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub value: CountValue,
    pub method: CountMethod,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
}

impl CountResult {
    pub fn exact(n: BigUint) -> Self {
        CountResult {
            value: CountValue::Integer(n),
            method: CountMethod::Exact,
            epsilon: None,
            delta: None,
            seed: None,
        }
    }

    pub fn oracle(n: BigUint) -> Self {
        CountResult {
            method: CountMethod::Oracle,
            ..Self::exact(n)
        }
    }

    pub fn estimate(x: f64, epsilon: f64, delta: f64, seed: u64) -> Self {
        CountResult {
            value: CountValue::Estimate(x),
            method: CountMethod::Estimate,
            epsilon: Some(epsilon),
            delta: Some(delta),
            seed: Some(seed),
        }
    }

    pub fn integer(&self) -> Option<&BigUint> {
        match &self.value {
            CountValue::Integer(n) => Some(n),
            CountValue::Estimate(_) => None,
        }
    }
}
