//! Prior families over the chooser's values and the probability machinery
//! built on them.
//!
//! The central quantity is `P(q) = Pr[sum_i q_i g^C_i > 0]`: the probability
//! that the chooser strictly prefers pile 1. Ties (`sum = 0`) go to pile 2
//! everywhere in this crate — the chooser breaks indifference in the
//! divider's favor, and after canonicalization the divider prefers pile 1.
//!
//! Exact evaluation paths:
//! - normal marginals: `P = Phi(mu.q / sqrt(sum sigma_i^2 q_i^2))`,
//! - finite discrete (per-good or joint): enumeration over types,
//! - iid uniform on [0,1]: closed-form areas for n <= 2.
//!
//! Everything else is seeded Monte-Carlo with a reported standard error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{substream, Estimate, McConfig};
use crate::model::Division;
use crate::phi;

pub use crate::phi::{erf, erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};

use rand::Rng;

/// Hard cap on direct product enumeration over per-good supports.
const ENUM_CAP: u64 = 1 << 20;

/// Default cap for [`flatten_to_joint`].
pub const DEFAULT_FLATTEN_CAP: usize = 4096;

/// Per-good normal marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalMarginal {
    pub mean: f64,
    pub stdev: f64,
}

/// One support point of a per-good discrete marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// One chooser type of a joint discrete prior: a full value vector with its
/// probability. Admits correlation across goods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChooserType {
    pub values: Vec<f64>,
    pub prob: f64,
}

/// A finite-type prior over chooser value vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiscretePrior {
    types: Vec<ChooserType>,
}

impl JointDiscretePrior {
    pub fn new(types: Vec<ChooserType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::input("joint discrete prior needs at least one type"));
        }
        let n = types[0].values.len();
        if n == 0 {
            return Err(Error::input("chooser types must cover at least one good"));
        }
        let mut total = 0.0;
        for (j, t) in types.iter().enumerate() {
            if t.values.len() != n {
                return Err(Error::input(format!(
                    "type {j} has {} values, expected {n}",
                    t.values.len()
                )));
            }
            if t.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("type {j} has non-finite values")));
            }
            if !(t.prob > 0.0) || !t.prob.is_finite() {
                return Err(Error::input(format!(
                    "type {j} probability {} must be positive",
                    t.prob
                )));
            }
            total += t.prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "type probabilities sum to {total}, expected 1"
            )));
        }
        for j in 1..types.len() {
            for k in 0..j {
                if types[j].values == types[k].values {
                    return Err(Error::input(format!(
                        "types {k} and {j} have identical value vectors"
                    )));
                }
            }
        }
        Ok(JointDiscretePrior { types })
    }

    pub fn n(&self) -> usize {
        self.types[0].values.len()
    }

    /// Number of types, usually written `l`.
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn types(&self) -> &[ChooserType] {
        &self.types
    }
}

/// A prior over the chooser's value vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// Independent normal marginals.
    Normal(Vec<NormalMarginal>),
    /// Independent finite marginals, one support list per good.
    DiscretePerGood(Vec<Vec<Atom>>),
    /// All goods iid uniform on [0, 1].
    Uniform01 { n: usize },
    /// Explicit finite list of (value vector, probability) types.
    JointDiscrete(JointDiscretePrior),
}

impl Prior {
    pub fn normal(goods: Vec<NormalMarginal>) -> Result<Self> {
        if goods.is_empty() {
            return Err(Error::input("normal prior needs at least one good"));
        }
        for (i, g) in goods.iter().enumerate() {
            if !g.mean.is_finite() || !g.stdev.is_finite() {
                return Err(Error::input(format!("good {i}: non-finite parameters")));
            }
            if !(g.stdev > 0.0) {
                return Err(Error::input(format!(
                    "good {i}: stdev {} must be positive",
                    g.stdev
                )));
            }
        }
        Ok(Prior::Normal(goods))
    }

    /// Convenience: iid normal marginals.
    pub fn normal_iid(n: usize, mean: f64, stdev: f64) -> Result<Self> {
        Prior::normal(vec![NormalMarginal { mean, stdev }; n])
    }

    pub fn discrete_per_good(goods: Vec<Vec<Atom>>) -> Result<Self> {
        if goods.is_empty() {
            return Err(Error::input("discrete prior needs at least one good"));
        }
        for (i, atoms) in goods.iter().enumerate() {
            if atoms.is_empty() {
                return Err(Error::input(format!("good {i}: empty support")));
            }
            let mut total = 0.0;
            for a in atoms {
                if !a.value.is_finite() {
                    return Err(Error::input(format!("good {i}: non-finite value")));
                }
                if !(a.prob > 0.0) || !a.prob.is_finite() {
                    return Err(Error::input(format!(
                        "good {i}: probability {} must be positive",
                        a.prob
                    )));
                }
                total += a.prob;
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::input(format!(
                    "good {i}: probabilities sum to {total}, expected 1"
                )));
            }
            for j in 1..atoms.len() {
                for k in 0..j {
                    if atoms[j].value == atoms[k].value {
                        return Err(Error::input(format!(
                            "good {i}: duplicate support value {}",
                            atoms[j].value
                        )));
                    }
                }
            }
        }
        Ok(Prior::DiscretePerGood(goods))
    }

    /// Convenience: the same two-point marginal for every good.
    pub fn two_point_iid(n: usize, lo: f64, p_lo: f64, hi: f64) -> Result<Self> {
        let atoms = vec![
            Atom {
                value: lo,
                prob: p_lo,
            },
            Atom {
                value: hi,
                prob: 1.0 - p_lo,
            },
        ];
        Prior::discrete_per_good(vec![atoms; n])
    }

    pub fn uniform01(n: usize) -> Self {
        Prior::Uniform01 { n }
    }

    pub fn joint(joint: JointDiscretePrior) -> Self {
        Prior::JointDiscrete(joint)
    }

    /// Number of goods the prior describes.
    pub fn n(&self) -> usize {
        match self {
            Prior::Normal(g) => g.len(),
            Prior::DiscretePerGood(g) => g.len(),
            Prior::Uniform01 { n } => *n,
            Prior::JointDiscrete(j) => j.n(),
        }
    }

    /// Per-good means, where defined for every family.
    pub fn means(&self) -> Vec<f64> {
        match self {
            Prior::Normal(g) => g.iter().map(|m| m.mean).collect(),
            Prior::DiscretePerGood(g) => g
                .iter()
                .map(|atoms| atoms.iter().map(|a| a.value * a.prob).sum())
                .collect(),
            Prior::Uniform01 { n } => vec![0.5; *n],
            Prior::JointDiscrete(j) => {
                let mut m = vec![0.0; j.n()];
                for t in j.types() {
                    for (mi, &v) in m.iter_mut().zip(&t.values) {
                        *mi += t.prob * v;
                    }
                }
                m
            }
        }
    }
}

fn check_dim(prior_n: usize, got: usize) -> Result<()> {
    if prior_n != got {
        return Err(Error::input(format!(
            "dimension mismatch: prior has {prior_n} goods, division has {got}"
        )));
    }
    Ok(())
}

/// Walks the product of per-good supports, calling `f(dot, prob)` per type.
fn for_each_product_type(
    goods: &[Vec<Atom>],
    q: &[f64],
    f: &mut impl FnMut(&[f64], f64),
) -> Result<()> {
    let count: u64 = goods
        .iter()
        .try_fold(1u64, |acc, g| acc.checked_mul(g.len() as u64))
        .unwrap_or(u64::MAX);
    if count > ENUM_CAP {
        return Err(Error::capacity(format!(
            "product support has {count} types, enumeration cap is {ENUM_CAP}"
        )));
    }
    let n = goods.len();
    let mut idx = vec![0usize; n];
    let mut values = vec![0.0f64; n];
    loop {
        let mut prob = 1.0;
        for i in 0..n {
            let a = goods[i][idx[i]];
            values[i] = a.value;
            prob *= a.prob;
        }
        let _ = q;
        f(&values, prob);
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            idx[i] += 1;
            if idx[i] < goods[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Probability that the chooser strictly prefers pile 1 under `q`, with ties
/// (zero dot product) counted as pile 2.
pub fn pile1_probability(prior: &Prior, q: &[f64]) -> Result<Estimate> {
    pile1_probability_with(prior, q, &McConfig::default())
}

pub fn pile1_probability_with(prior: &Prior, q: &[f64], mc: &McConfig) -> Result<Estimate> {
    check_dim(prior.n(), q.len())?;
    match prior {
        Prior::Normal(goods) => {
            let mean: f64 = goods.iter().zip(q).map(|(g, &qi)| g.mean * qi).sum();
            let var: f64 = goods
                .iter()
                .zip(q)
                .map(|(g, &qi)| (g.stdev * qi).powi(2))
                .sum();
            if var <= 0.0 {
                // q = 0: the pile sums tie almost surely, tie goes to pile 2.
                return Ok(Estimate::exact(0.0));
            }
            Ok(Estimate::exact(phi::std_normal_cdf(mean / var.sqrt())))
        }
        Prior::DiscretePerGood(goods) => {
            let mut p1 = 0.0;
            for_each_product_type(goods, q, &mut |values, prob| {
                let dot: f64 = values.iter().zip(q).map(|(&v, &qi)| v * qi).sum();
                if dot > 0.0 {
                    p1 += prob;
                }
            })?;
            Ok(Estimate::exact(p1))
        }
        Prior::JointDiscrete(joint) => {
            let mut p1 = 0.0;
            for t in joint.types() {
                let dot: f64 = t.values.iter().zip(q).map(|(&v, &qi)| v * qi).sum();
                if dot > 0.0 {
                    p1 += t.prob;
                }
            }
            Ok(Estimate::exact(p1))
        }
        Prior::Uniform01 { n } => match *n {
            1 => Ok(Estimate::exact(if q[0] > 0.0 { 1.0 } else { 0.0 })),
            2 => Ok(Estimate::exact(uniform2_pile1(q[0], q[1]))),
            _ => {
                let mut rng = substream(mc.seed, 0);
                let mut hits = 0u64;
                for _ in 0..mc.samples {
                    let dot: f64 = q.iter().map(|&qi| qi * rng.random::<f64>()).sum();
                    if dot > 0.0 {
                        hits += 1;
                    }
                }
                let p = hits as f64 / f64::from(mc.samples);
                let se = (p * (1.0 - p) / f64::from(mc.samples)).sqrt();
                Ok(Estimate {
                    value: p,
                    std_error: se,
                })
            }
        },
    }
}

/// Exact `Pr[a u1 + b u2 > 0]` for u iid U[0,1].
fn uniform2_pile1(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        return if a == 0.0 && b == 0.0 { 0.0 } else { 1.0 };
    }
    if a <= 0.0 && b <= 0.0 {
        return 0.0;
    }
    // mixed signs: event u_pos > (neg/pos) * u_neg
    let (pos, neg) = if a > 0.0 { (a, -b) } else { (b, -a) };
    let c = neg / pos;
    if c <= 1.0 {
        1.0 - c / 2.0
    } else {
        1.0 / (2.0 * c)
    }
}

/// Exact `E[(a u1 + b u2)^+]` for u iid U[0,1].
fn uniform2_pos_part(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        return (a + b) / 2.0;
    }
    if a <= 0.0 && b <= 0.0 {
        return 0.0;
    }
    let (pos, neg) = if a > 0.0 { (a, -b) } else { (b, -a) };
    if neg <= pos {
        pos / 2.0 - neg / 2.0 + neg * neg / (6.0 * pos)
    } else {
        pos * pos / (6.0 * neg)
    }
}

/// Expected utility of a chooser who picks her better pile (ties to pile 2,
/// where both piles are worth the same anyway).
pub fn chooser_expected_utility(prior: &Prior, division: &Division) -> Result<Estimate> {
    chooser_expected_utility_with(prior, division, &McConfig::default())
}

pub fn chooser_expected_utility_with(
    prior: &Prior,
    division: &Division,
    mc: &McConfig,
) -> Result<Estimate> {
    check_dim(prior.n(), division.n())?;
    let p = division.p();
    let q = division.q();
    match prior {
        Prior::Normal(goods) => {
            // E[max(pile1, pile2)] = E[pile2] + E[(q.gC)^+] with q.gC normal.
            let pile2_mean: f64 = goods.iter().zip(p).map(|(g, &pi)| (1.0 - pi) * g.mean).sum();
            let m: f64 = goods.iter().zip(&q).map(|(g, &qi)| g.mean * qi).sum();
            let s2: f64 = goods
                .iter()
                .zip(&q)
                .map(|(g, &qi)| (g.stdev * qi).powi(2))
                .sum();
            if s2 <= 0.0 {
                return Ok(Estimate::exact(pile2_mean + m.max(0.0)));
            }
            let s = s2.sqrt();
            let z = m / s;
            Ok(Estimate::exact(
                pile2_mean + m * phi::std_normal_cdf(z) + s * phi::std_normal_pdf(z),
            ))
        }
        Prior::DiscretePerGood(goods) => {
            let mut total = 0.0;
            for_each_product_type(goods, &q, &mut |values, prob| {
                total += prob * best_pile_value(values, p);
            })?;
            Ok(Estimate::exact(total))
        }
        Prior::JointDiscrete(joint) => {
            let mut total = 0.0;
            for t in joint.types() {
                total += t.prob * best_pile_value(&t.values, p);
            }
            Ok(Estimate::exact(total))
        }
        Prior::Uniform01 { n } => match *n {
            1 => {
                let pile2 = (1.0 - p[0]) * 0.5;
                Ok(Estimate::exact(pile2 + uniform2_pos_part(q[0], 0.0)))
            }
            2 => {
                let pile2: f64 = p.iter().map(|&pi| (1.0 - pi) * 0.5).sum();
                Ok(Estimate::exact(pile2 + uniform2_pos_part(q[0], q[1])))
            }
            _ => {
                let mut rng = substream(mc.seed, 1);
                let mut vals = Vec::with_capacity(mc.samples as usize);
                let mut u = vec![0.0f64; *n];
                for _ in 0..mc.samples {
                    for ui in u.iter_mut() {
                        *ui = rng.random::<f64>();
                    }
                    vals.push(best_pile_value(&u, p));
                }
                let (mean, se) = crate::mc::mean_and_se(&vals);
                Ok(Estimate {
                    value: mean,
                    std_error: se,
                })
            }
        },
    }
}

/// Value of the chooser's better pile for a known value vector.
pub(crate) fn best_pile_value(values: &[f64], p: &[f64]) -> f64 {
    let pile1: f64 = values.iter().zip(p).map(|(&v, &pi)| v * pi).sum();
    let pile2: f64 = values.iter().zip(p).map(|(&v, &pi)| v * (1.0 - pi)).sum();
    pile1.max(pile2)
}

/// Expands independent per-good discrete marginals into the explicit joint
/// type list Algorithm 2 consumes. Errors if the product support exceeds `cap`.
pub fn flatten_to_joint(goods: &[Vec<Atom>], cap: usize) -> Result<JointDiscretePrior> {
    let count: u64 = goods
        .iter()
        .try_fold(1u64, |acc, g| acc.checked_mul(g.len() as u64))
        .unwrap_or(u64::MAX);
    if goods.is_empty() {
        return Err(Error::input("cannot flatten an empty prior"));
    }
    if count > cap as u64 {
        return Err(Error::capacity(format!(
            "flattening would produce {count} types, cap is {cap}"
        )));
    }
    let mut types = Vec::with_capacity(count as usize);
    let q = vec![0.0; goods.len()];
    for_each_product_type(goods, &q, &mut |values, prob| {
        types.push(ChooserType {
            values: values.to_vec(),
            prob,
        });
    })?;
    JointDiscretePrior::new(types)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::McConfig;

    fn two_point_5() -> Prior {
        Prior::two_point_iid(5, 0.01, 0.6, 1.0).unwrap()
    }

    #[test]
    fn pile1_zero_division_is_tie() {
        for prior in [
            Prior::normal_iid(3, 1.0, 0.5).unwrap(),
            Prior::uniform01(3),
            Prior::two_point_iid(3, 0.0, 0.5, 1.0).unwrap(),
        ] {
            let p = pile1_probability(&prior, &[0.0, 0.0, 0.0]).unwrap();
            assert_eq!(p.value, 0.0);
        }
    }

    #[test]
    fn pile1_normal_matches_cdf() {
        let prior = Prior::normal_iid(1, 1.0, 1.0).unwrap();
        let p = pile1_probability(&prior, &[1.0]).unwrap();
        assert!((p.value - 0.8413447461).abs() < 1e-9);
    }

    #[test]
    fn pile1_symmetry_breaking_instance() {
        // Two-point prior {0.01 w.p. 0.6, 1 w.p. 0.4} on five goods with
        // q = (1, -0.2, -0.2, -0.2, -0.2). The chooser takes pile 2 exactly
        // when good 1 is low and at least one of the other four is high:
        // 0.6 * (1 - 0.6^4) = 0.52224. (The often-quoted 0.553344 evaluates
        // 0.6 * (1 - 0.6^5), which counts one good too many.)
        let q = Division::new(vec![1.0, 0.4, 0.4, 0.4, 0.4]).unwrap().q();
        let p1 = pile1_probability(&two_point_5(), &q).unwrap().value;
        assert!((p1 - 0.47776).abs() < 1e-12, "P = {p1}");
        assert!(((1.0 - p1) - 0.52224).abs() < 1e-12);
        assert!(1.0 - p1 > 0.5);
    }

    #[test]
    fn chooser_utility_examples() {
        // Even split: both piles identical, expectation is half the total mean.
        let prior = Prior::normal(vec![
            NormalMarginal {
                mean: 2.0,
                stdev: 0.5,
            },
            NormalMarginal {
                mean: 3.0,
                stdev: 1.0,
            },
        ])
        .unwrap();
        let even = Division::even(2);
        let u = chooser_expected_utility(&prior, &even).unwrap();
        assert!((u.value - 2.5).abs() < 1e-12);

        // Known two-good two-point instance from the multiple-offers game.
        let prior = Prior::two_point_iid(2, 1.0, 0.5, 2.0).unwrap();
        let d = Division::new(vec![1.0, 0.0]).unwrap();
        let u = chooser_expected_utility(&prior, &d).unwrap();
        assert!((u.value - 1.75).abs() < 1e-12);
    }

    #[test]
    fn chooser_normal_closed_form_matches_mc() {
        let prior = Prior::normal(vec![
            NormalMarginal {
                mean: 1.0,
                stdev: 0.2,
            },
            NormalMarginal {
                mean: 1.0,
                stdev: 0.2,
            },
        ])
        .unwrap();
        let d = Division::new(vec![1.0, 0.0]).unwrap();
        let exact = chooser_expected_utility(&prior, &d).unwrap().value;
        // Independent MC oracle.
        let mut rng = substream(99, 0);
        let mut sum = 0.0;
        let trials = 2_000_000u32;
        let dist = rand_distr::Normal::new(1.0, 0.2).unwrap();
        for _ in 0..trials {
            let g1: f64 = rand::Rng::sample(&mut rng, dist);
            let g2: f64 = rand::Rng::sample(&mut rng, dist);
            sum += g1.max(g2);
        }
        let mc = sum / f64::from(trials);
        assert!(
            (exact - mc).abs() < 3.0 * 0.2 / (f64::from(trials)).sqrt() * 2.0,
            "closed form {exact} vs mc {mc}"
        );
    }

    #[test]
    fn uniform_exact_small_n() {
        // q = (1, -0.5): area above u2 = 2 u1 ... P = 1/(2*2) complement side.
        let prior = Prior::uniform01(2);
        let p = pile1_probability(&prior, &[1.0, -0.5]).unwrap();
        assert!((p.value - 0.75).abs() < 1e-15);
        let p = pile1_probability(&prior, &[0.3, -0.9]).unwrap();
        assert!((p.value - (0.3 / 0.9) / 2.0).abs() < 1e-15);

        let d = Division::new(vec![1.0, 0.25]).unwrap(); // q = (1, -0.5)
        let u = chooser_expected_utility(&prior, &d).unwrap();
        // pile2 mean = 0.375; E[(u1 - 0.5 u2)^+] = 1/2 - 1/4 + (1/4)/6
        let want = 0.375 + (0.5 - 0.25 + 0.25 / 6.0);
        assert!((u.value - want).abs() < 1e-15);
    }

    #[test]
    fn uniform_mc_agrees_with_exact_n2_lift() {
        // Same q embedded in n=3 with a zero third component: the MC path
        // must agree with the exact 2-D value within a few standard errors.
        let prior3 = Prior::uniform01(3);
        let mc = McConfig {
            seed: 5,
            samples: 400_000,
        };
        let est = pile1_probability_with(&prior3, &[1.0, -0.5, 0.0], &mc).unwrap();
        assert!((est.value - 0.75).abs() < 4.0 * est.std_error.max(1e-4));
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn scaling_invariance_of_pile1() {
        let prior = Prior::normal_iid(3, 2.0, 0.7).unwrap();
        let q = [0.8, -0.3, 0.1];
        let base = pile1_probability(&prior, &q).unwrap().value;
        for c in [0.25, 0.5, 0.9] {
            let scaled: Vec<f64> = q.iter().map(|&v| v * c).collect();
            let p = pile1_probability(&prior, &scaled).unwrap().value;
            assert!((p - base).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_for_normal() {
        let prior = Prior::normal_iid(2, 1.0, 0.4).unwrap();
        let q = [0.6, -0.9];
        let p = pile1_probability(&prior, &q).unwrap().value;
        let r = pile1_probability(&prior, &[-0.6, 0.9]).unwrap().value;
        assert!((p + r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flatten_examples() {
        let goods = vec![
            vec![
                Atom {
                    value: 1.0,
                    prob: 0.5,
                },
                Atom {
                    value: 2.0,
                    prob: 0.5,
                },
            ];
            2
        ];
        let joint = flatten_to_joint(&goods, DEFAULT_FLATTEN_CAP).unwrap();
        assert_eq!(joint.len(), 4);
        for t in joint.types() {
            assert!((t.prob - 0.25).abs() < 1e-15);
        }

        // Five two-point goods: 32 types with binomial probability classes.
        let goods = vec![
            vec![
                Atom {
                    value: 0.01,
                    prob: 0.6,
                },
                Atom {
                    value: 1.0,
                    prob: 0.4,
                },
            ];
            5
        ];
        let joint = flatten_to_joint(&goods, DEFAULT_FLATTEN_CAP).unwrap();
        assert_eq!(joint.len(), 32);
        let total: f64 = joint.types().iter().map(|t| t.prob).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // Count types by number of high values: must match C(5, k).
        let mut counts = [0usize; 6];
        for t in joint.types() {
            let k = t.values.iter().filter(|&&v| v == 1.0).count();
            counts[k] += 1;
            let want = 0.6f64.powi(5 - k as i32) * 0.4f64.powi(k as i32);
            assert!((t.prob - want).abs() < 1e-15);
        }
        assert_eq!(counts, [1, 5, 10, 10, 5, 1]);

        // Cap errors name the cap.
        let err = flatten_to_joint(&goods, 16).unwrap_err();
        assert!(err.to_string().contains("16"));
    }

    #[test]
    fn flatten_preserves_probability_and_utility() {
        let mut rng = substream(31, 0);
        for _ in 0..50 {
            let n = 1 + (rng.random::<u64>() % 3) as usize;
            let goods: Vec<Vec<Atom>> = (0..n)
                .map(|_| {
                    let k = 2 + (rng.random::<u64>() % 2) as usize;
                    let mut probs: Vec<f64> =
                        (0..k).map(|_| 0.1 + rng.random::<f64>()).collect();
                    let total: f64 = probs.iter().sum();
                    for p in probs.iter_mut() {
                        *p /= total;
                    }
                    // Make the probabilities sum to exactly 1.0.
                    let head: f64 = probs[..k - 1].iter().sum();
                    probs[k - 1] = 1.0 - head;
                    (0..k)
                        .map(|j| Atom {
                            value: (j as f64) + rng.random::<f64>(),
                            prob: probs[j],
                        })
                        .collect()
                })
                .collect();
            let per_good = Prior::discrete_per_good(goods.clone()).unwrap();
            let joint = Prior::joint(flatten_to_joint(&goods, DEFAULT_FLATTEN_CAP).unwrap());
            let q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let d = Division::from_q(&q).unwrap();
            let p_a = pile1_probability(&per_good, &q).unwrap().value;
            let p_b = pile1_probability(&joint, &q).unwrap().value;
            assert!((p_a - p_b).abs() < 1e-12);
            let u_a = chooser_expected_utility(&per_good, &d).unwrap().value;
            let u_b = chooser_expected_utility(&joint, &d).unwrap().value;
            assert!((u_a - u_b).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_complement_sums_to_one_discrete() {
        let prior = two_point_5();
        let q = Division::new(vec![1.0, 0.4, 0.4, 0.4, 0.4]).unwrap().q();
        let p1 = pile1_probability(&prior, &q).unwrap().value;
        // weakly-prefers-pile-2 mass computed independently
        let goods = match &prior {
            Prior::DiscretePerGood(g) => g.clone(),
            _ => unreachable!(),
        };
        let mut p2 = 0.0;
        super::for_each_product_type(&goods, &q, &mut |values, prob| {
            let dot: f64 = values.iter().zip(&q).map(|(&v, &qi)| v * qi).sum();
            if dot <= 0.0 {
                p2 += prob;
            }
        })
        .unwrap();
        assert!((p1 + p2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let prior = Prior::uniform01(2);
        assert!(pile1_probability(&prior, &[1.0]).is_err());
        let d = Division::even(3);
        assert!(chooser_expected_utility(&prior, &d).is_err());
    }

    #[test]
    fn joint_prior_validation() {
        let t = |v: &[f64], p: f64| ChooserType {
            values: v.to_vec(),
            prob: p,
        };
        assert!(JointDiscretePrior::new(vec![t(&[1.0], 0.5), t(&[1.0], 0.5)]).is_err());
        assert!(JointDiscretePrior::new(vec![t(&[1.0], 0.4), t(&[2.0], 0.4)]).is_err());
        assert!(JointDiscretePrior::new(vec![t(&[1.0], 0.5), t(&[2.0], 0.5)]).is_ok());
    }
}
