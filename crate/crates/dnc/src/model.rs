//! Core domain types: instances, divisions, solve reports, and the small
//! algebra connecting them.
//!
//! A division is stored as the pile-1 fraction vector `p`; the auxiliary
//! vector `q = 2p - 1` is always derived, never stored, so the two views
//! cannot drift apart. Everything here is immutable and pure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priors::Prior;

/// A divide-and-choose problem: the divider's private values plus a prior
/// over the chooser's values.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    divider_values: Vec<f64>,
    prior: Prior,
}

impl Instance {
    /// Validates dimensions, finiteness, and the "not all zero" input
    /// contract the solvers require.
    pub fn new(divider_values: Vec<f64>, prior: Prior) -> Result<Self> {
        if divider_values.is_empty() {
            return Err(Error::input("instance needs at least one good"));
        }
        if divider_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("divider values must be finite"));
        }
        if divider_values.iter().all(|&v| v == 0.0) {
            return Err(Error::input(
                "divider values must be not all zero (solver input contract)",
            ));
        }
        if prior.n() != divider_values.len() {
            return Err(Error::input(format!(
                "prior describes {} goods but divider has {} values",
                prior.n(),
                divider_values.len()
            )));
        }
        Ok(Instance {
            divider_values,
            prior,
        })
    }

    pub fn n(&self) -> usize {
        self.divider_values.len()
    }

    pub fn divider_values(&self) -> &[f64] {
        &self.divider_values
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    /// Half the divider's total value.
    pub fn baseline(&self) -> f64 {
        baseline_divider(&self.divider_values)
    }
}

/// A division of the goods: `p[i]` is the fraction of good `i` in pile 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Division {
    p: Vec<f64>,
}

impl Division {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::input("division must cover at least one good"));
        }
        for (i, &v) in p.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::input(format!(
                    "division component p[{i}] = {v} outside [0, 1]"
                )));
            }
        }
        Ok(Division { p })
    }

    /// The even split `p = (1/2, ..., 1/2)`.
    pub fn even(n: usize) -> Self {
        Division { p: vec![0.5; n] }
    }

    /// Builds a division from the auxiliary variables `q`, `p_i = q_i/2 + 1/2`.
    pub fn from_q(q: &[f64]) -> Result<Self> {
        for (i, &v) in q.iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::input(format!(
                    "auxiliary component q[{i}] = {v} outside [-1, 1]"
                )));
            }
        }
        Division::new(q.iter().map(|&v| v / 2.0 + 0.5).collect())
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// The auxiliary view `q_i = 2 p_i - 1` in [-1, 1]^n.
    pub fn q(&self) -> Vec<f64> {
        q_of_p(self)
    }
}

/// `q_i = 2 p_i - 1`.
pub fn q_of_p(division: &Division) -> Vec<f64> {
    division.p.iter().map(|&p| 2.0 * p - 1.0).collect()
}

/// Inverse correspondence `p_i = q_i/2 + 1/2`; errors on out-of-range input.
pub fn p_of_q(q: &[f64]) -> Result<Division> {
    Division::from_q(q)
}

/// The divider's guaranteed floor: half his total value.
pub fn baseline_divider(divider_values: &[f64]) -> f64 {
    0.5 * divider_values.iter().sum::<f64>()
}

/// Expected divider utility given the probability `p1` that the chooser
/// picks pile 1:
///
/// `sum_i g_i/2 + (1/2 - P) * sum_i q_i g_i`,
///
/// which equals the two-branch form `P * (pile 2 value) + (1-P) * (pile 1 value)`.
pub fn expected_divider_utility(divider_values: &[f64], q: &[f64], p1: f64) -> Result<f64> {
    if divider_values.len() != q.len() {
        return Err(Error::input(format!(
            "length mismatch: {} divider values vs {} division components",
            divider_values.len(),
            q.len()
        )));
    }
    let base = baseline_divider(divider_values);
    let swing: f64 = q.iter().zip(divider_values).map(|(&qi, &g)| qi * g).sum();
    Ok(base + (0.5 - p1) * swing)
}

/// Reflects the division (`p_i -> 1 - p_i`) when the divider strictly prefers
/// pile 2, so that afterwards `sum_i q_i g_i >= 0`. Idempotent.
pub fn canonicalize(division: &Division, divider_values: &[f64]) -> Division {
    let swing: f64 = division
        .q()
        .iter()
        .zip(divider_values)
        .map(|(&qi, &g)| qi * g)
        .sum();
    if swing < 0.0 {
        Division {
            p: division.p.iter().map(|&p| 1.0 - p).collect(),
        }
    } else {
        division.clone()
    }
}

/// Scales `q` by `1 / max_i |q_i|` so the largest component sits on the box
/// boundary (one good entirely in a pile). Errors on the zero vector.
pub fn scale_to_extreme(q: &[f64]) -> Result<Vec<f64>> {
    let scale = q.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::input(
            "cannot scale the zero division to an extreme point",
        ));
    }
    Ok(q.iter().map(|&v| v / scale).collect())
}

/// Which algorithm produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    NormalFptas,
    DiscreteExact,
    GridOracle,
    RiskGrid,
}

/// Outcome of evaluating or optimizing a division.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub division: Division,
    /// Probability the chooser picks pile 1 (ties go to pile 2).
    pub pile1_probability: f64,
    /// Exact expected divider utility of `division`.
    pub divider_utility: f64,
    /// Exact (or Monte-Carlo) expected chooser utility, when computable.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chooser_utility: Option<f64>,
    pub baseline_divider: f64,
    /// None for plain evaluations (not an optimizer output).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<SolveMethod>,
    /// Additive optimality bound; None for plain evaluations.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap_bound: Option<f64>,
}
