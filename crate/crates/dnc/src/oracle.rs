//! Brute-force ground truth: exact evaluation of arbitrary divisions and a
//! grid search over the division cube.
//!
//! The grid search is not a practical solver; it exists to independently
//! verify both real solvers. Its reported `gap_bound` is the grid granularity
//! bound `n * (res/2) * max|g|` (objective movement within one cell) plus a
//! pile-probability perturbation allowance `res * sum|g|`, exact for
//! unit-Lipschitz `P(q)` and an engineering allowance for steeper priors.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mc::McConfig;
use crate::model::{
    baseline_divider, expected_divider_utility, Division, Instance, SolveMethod, SolveReport,
};
use crate::priors::{self, Prior};

/// Exact evaluation of a fixed division: exact pile-1 probability, exact
/// divider utility, exact (or Monte-Carlo) chooser utility.
pub fn exact_eval(instance: &Instance, division: &Division) -> Result<SolveReport> {
    exact_eval_with(instance, division, &McConfig::default())
}

pub fn exact_eval_with(
    instance: &Instance,
    division: &Division,
    mc: &McConfig,
) -> Result<SolveReport> {
    if division.n() != instance.n() {
        return Err(Error::input(format!(
            "division covers {} goods, instance has {}",
            division.n(),
            instance.n()
        )));
    }
    let q = division.q();
    let p1 = priors::pile1_probability_with(instance.prior(), &q, mc)?.value;
    let divider_utility = expected_divider_utility(instance.divider_values(), &q, p1)?;
    let chooser = priors::chooser_expected_utility_with(instance.prior(), division, mc)?;
    Ok(SolveReport {
        division: division.clone(),
        pile1_probability: p1,
        divider_utility,
        chooser_utility: Some(chooser.value),
        baseline_divider: instance.baseline(),
        method: None,
        gap_bound: None,
    })
}

/// Granularity bound reported by [`grid_best_response`].
pub fn grid_gap_bound(divider_values: &[f64], resolution: f64) -> f64 {
    let n = divider_values.len() as f64;
    let max_g = divider_values.iter().fold(0.0f64, |m, &g| m.max(g.abs()));
    let sum_g: f64 = divider_values.iter().map(|g| g.abs()).sum();
    n * (resolution / 2.0) * max_g + resolution * sum_g
}

/// Evaluation kernel with the per-family probability specialization pulled
/// out of the inner loop.
enum P1Kernel {
    Normal { means: Vec<f64>, stdevs: Vec<f64> },
    Joint { types: Vec<(Vec<f64>, f64)> },
    Uniform2,
    Uniform1,
    UniformMc { n: usize, mc: McConfig },
}

impl P1Kernel {
    fn new(prior: &Prior, mc: &McConfig) -> Result<Self> {
        Ok(match prior {
            Prior::Normal(goods) => P1Kernel::Normal {
                means: goods.iter().map(|g| g.mean).collect(),
                stdevs: goods.iter().map(|g| g.stdev).collect(),
            },
            Prior::DiscretePerGood(goods) => {
                let joint = priors::flatten_to_joint(goods, priors::DEFAULT_FLATTEN_CAP)?;
                P1Kernel::Joint {
                    types: joint
                        .types()
                        .iter()
                        .map(|t| (t.values.clone(), t.prob))
                        .collect(),
                }
            }
            Prior::JointDiscrete(joint) => P1Kernel::Joint {
                types: joint
                    .types()
                    .iter()
                    .map(|t| (t.values.clone(), t.prob))
                    .collect(),
            },
            Prior::Uniform01 { n: 1 } => P1Kernel::Uniform1,
            Prior::Uniform01 { n: 2 } => P1Kernel::Uniform2,
            Prior::Uniform01 { n } => P1Kernel::UniformMc { n: *n, mc: *mc },
        })
    }

    fn p1(&self, q: &[f64]) -> f64 {
        match self {
            P1Kernel::Normal { means, stdevs } => {
                let m: f64 = means.iter().zip(q).map(|(&mi, &qi)| mi * qi).sum();
                let v: f64 = stdevs.iter().zip(q).map(|(&s, &qi)| (s * qi).powi(2)).sum();
                if v <= 0.0 {
                    0.0
                } else {
                    crate::priors::std_normal_cdf(m / v.sqrt())
                }
            }
            P1Kernel::Joint { types } => {
                let mut p = 0.0;
                for (x, r) in types {
                    let dot: f64 = x.iter().zip(q).map(|(&v, &qi)| v * qi).sum();
                    if dot > 0.0 {
                        p += r;
                    }
                }
                p
            }
            P1Kernel::Uniform1 => {
                if q[0] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            P1Kernel::Uniform2 | P1Kernel::UniformMc { .. } => {
                // Falls back to the priors module (exact n=2 area / seeded MC).
                let prior = match self {
                    P1Kernel::Uniform2 => Prior::uniform01(2),
                    P1Kernel::UniformMc { n, .. } => Prior::uniform01(*n),
                    _ => unreachable!(),
                };
                let mc = match self {
                    P1Kernel::UniformMc { mc, .. } => *mc,
                    _ => McConfig::default(),
                };
                priors::pile1_probability_with(&prior, q, &mc)
                    .map(|e| e.value)
                    .unwrap_or(f64::NAN)
            }
        }
    }
}

#[derive(Clone)]
struct Best {
    utility: f64,
    p1: f64,
    q: Vec<f64>,
}

/// Deterministic candidate order: higher utility, then smaller pile-1
/// probability, then lexicographically smaller q.
pub(crate) fn better(u_a: f64, p_a: f64, q_a: &[f64], u_b: f64, p_b: f64, q_b: &[f64]) -> bool {
    if u_a != u_b {
        return u_a > u_b;
    }
    if p_a != p_b {
        return p_a < p_b;
    }
    for (&a, &b) in q_a.iter().zip(q_b) {
        if a != b {
            return a < b;
        }
    }
    false
}

/// Exhaustive search over the uniform q-grid of the given spacing on
/// [-1, 1]^n. Capped at n <= 4 and 1e8 grid points.
pub fn grid_best_response(instance: &Instance, resolution: f64) -> Result<SolveReport> {
    grid_best_response_with(instance, resolution, &McConfig::default())
}

pub fn grid_best_response_with(
    instance: &Instance,
    resolution: f64,
    mc: &McConfig,
) -> Result<SolveReport> {
    let n = instance.n();
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::input("grid resolution must be positive"));
    }
    if n > 4 {
        return Err(Error::capacity(format!(
            "grid search supports n <= 4, instance has {n}"
        )));
    }
    let per_axis = (2.0 / resolution).round() as u64 + 1;
    let total = per_axis.checked_pow(n as u32).unwrap_or(u64::MAX);
    if total > 100_000_000 {
        return Err(Error::capacity(format!(
            "grid would have {total} points, cap is 1e8"
        )));
    }
    // Uniform priors beyond two goods price every cell by Monte-Carlo; cap
    // the total sample volume rather than letting the scan run for hours.
    if matches!(instance.prior(), Prior::Uniform01 { n } if *n >= 3) {
        let volume = total.saturating_mul(u64::from(mc.samples));
        if volume > 2_000_000_000 {
            return Err(Error::capacity(format!(
                "uniform grid needs {volume} Monte-Carlo draws; coarsen the \
                 resolution or lower the sample count"
            )));
        }
    }
    let kernel = P1Kernel::new(instance.prior(), mc)?;
    let g = instance.divider_values().to_vec();
    let base = baseline_divider(&g);
    let coord = |idx: u64| -> f64 { -1.0 + 2.0 * idx as f64 / (per_axis - 1) as f64 };

    // Outermost axis is parallel; reduction is by axis order, so results are
    // independent of scheduling.
    let bests: Vec<Best> = (0..per_axis)
        .into_par_iter()
        .map(|i0| {
            let mut best = Best {
                utility: f64::NEG_INFINITY,
                p1: f64::INFINITY,
                q: vec![],
            };
            let mut q = vec![0.0f64; n];
            q[0] = coord(i0);
            let inner = per_axis.pow((n - 1) as u32);
            let mut idx = vec![0u64; n.saturating_sub(1)];
            for _ in 0..inner {
                for (k, &ix) in idx.iter().enumerate() {
                    q[k + 1] = coord(ix);
                }
                let p1 = kernel.p1(&q);
                let swing: f64 = q.iter().zip(&g).map(|(&qi, &gi)| qi * gi).sum();
                let u = base + (0.5 - p1) * swing;
                if best.q.is_empty() || better(u, p1, &q, best.utility, best.p1, &best.q) {
                    best = Best {
                        utility: u,
                        p1,
                        q: q.clone(),
                    };
                }
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < per_axis {
                        break;
                    }
                    *slot = 0;
                }
            }
            best
        })
        .collect();

    let mut winner: Option<Best> = None;
    for b in bests {
        if b.q.is_empty() {
            continue;
        }
        match &winner {
            None => winner = Some(b),
            Some(w) => {
                if better(b.utility, b.p1, &b.q, w.utility, w.p1, &w.q) {
                    winner = Some(b);
                }
            }
        }
    }
    let winner = winner.ok_or_else(|| Error::solver("empty grid"))?;
    let division = Division::from_q(&winner.q)?;
    let mut report = exact_eval_with(instance, &division, mc)?;
    report.method = Some(SolveMethod::GridOracle);
    report.gap_bound = Some(grid_gap_bound(&g, resolution));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scale_to_extreme;
    use rand::Rng;

    #[test]
    fn symmetry_breaking_division_beats_baseline() {
        // Five identical goods, two-point prior. The division (1, .4, .4, .4, .4)
        // sends the chooser to pile 2 with probability 0.52224 and the divider
        // strictly above his baseline 2.5. (0.553344, the often-printed value,
        // is 0.6*(1-0.6^5); the event has only four "other" goods.)
        let instance = Instance::new(
            vec![1.0; 5],
            Prior::two_point_iid(5, 0.01, 0.6, 1.0).unwrap(),
        )
        .unwrap();
        let division = Division::new(vec![1.0, 0.4, 0.4, 0.4, 0.4]).unwrap();
        let report = exact_eval(&instance, &division).unwrap();
        assert!((1.0 - report.pile1_probability - 0.52224).abs() < 1e-12);
        assert!(1.0 - report.pile1_probability > 0.5);
        assert!(report.divider_utility > report.baseline_divider);
        assert!((report.divider_utility - 2.504448).abs() < 1e-12);
    }

    #[test]
    fn even_split_is_baseline() {
        let instance =
            Instance::new(vec![2.0, 1.0, 4.0], Prior::normal_iid(3, 1.0, 0.3).unwrap()).unwrap();
        let report = exact_eval(&instance, &Division::even(3)).unwrap();
        assert!((report.divider_utility - report.baseline_divider).abs() < 1e-12);
    }

    #[test]
    fn four_type_instance_values() {
        let instance = Instance::new(
            vec![2.0, 1.0],
            Prior::two_point_iid(2, 1.0, 0.5, 2.0).unwrap(),
        )
        .unwrap();
        let report = exact_eval(&instance, &Division::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert!((report.pile1_probability - 0.25).abs() < 1e-15);
        assert!((report.divider_utility - 1.75).abs() < 1e-15);
        assert!((report.chooser_utility.unwrap() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn two_branch_consistency() {
        let mut rng = crate::mc::substream(8, 0);
        for _ in 0..200 {
            let n = 1 + (rng.random::<u64>() % 4) as usize;
            let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 1.0).collect();
            if g.iter().all(|&x| x == 0.0) {
                continue;
            }
            let prior = Prior::normal_iid(n, 1.0, 0.5).unwrap();
            let instance = Instance::new(g.clone(), prior).unwrap();
            let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let division = Division::new(p).unwrap();
            let report = exact_eval(&instance, &division).unwrap();
            let pile1: f64 = division.p().iter().zip(&g).map(|(&p, &gi)| p * gi).sum();
            let pile2: f64 = division
                .p()
                .iter()
                .zip(&g)
                .map(|(&p, &gi)| (1.0 - p) * gi)
                .sum();
            let two_branch =
                report.pile1_probability * pile2 + (1.0 - report.pile1_probability) * pile1;
            let scale = 1.0f64.max(two_branch.abs());
            assert!((report.divider_utility - two_branch).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn grid_finds_multiple_offers_value() {
        let goods = vec![
            vec![
                crate::priors::Atom {
                    value: 1.0,
                    prob: 0.5,
                },
                crate::priors::Atom {
                    value: 2.0,
                    prob: 0.5,
                },
            ];
            2
        ];
        let joint = crate::priors::flatten_to_joint(&goods, 64).unwrap();
        let instance = Instance::new(vec![2.0, 1.0], Prior::joint(joint)).unwrap();
        let report = grid_best_response(&instance, 0.01).unwrap();
        assert!((report.divider_utility - 1.75).abs() < 1e-9);
        assert!((report.division.p()[0] - 1.0).abs() < 1e-9);
        assert!(report.division.p()[1].abs() < 1e-9);
        assert_eq!(report.method, Some(SolveMethod::GridOracle));
    }

    #[test]
    fn grid_uniform_two_goods_beats_baseline() {
        let instance = Instance::new(vec![1.0, 0.3], Prior::uniform01(2)).unwrap();
        let report = grid_best_response(&instance, 0.01).unwrap();
        assert!(report.divider_utility >= 0.65);
        // Divider best response for uniform n=2: divide the favorite good at
        // x* = (g1+g2)/(2 g1), dump the other.
        let x_star = (1.0 + 0.3) / 2.0;
        let q = report.division.q();
        assert!((q[0] - x_star).abs() < 0.02, "q = {q:?}");
        assert!((q[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_capacity_errors() {
        let instance = Instance::new(vec![1.0; 5], Prior::uniform01(5)).unwrap();
        assert!(matches!(
            grid_best_response(&instance, 0.5),
            Err(Error::Capacity(_))
        ));
        let instance = Instance::new(vec![1.0; 4], Prior::uniform01(4)).unwrap();
        assert!(matches!(
            grid_best_response(&instance, 0.0001),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn scaling_winner_does_not_lose_utility() {
        // One good always lands whole: whenever the grid winner beats baseline
        // by more than the grid bound, rescaling q to the box boundary keeps
        // utility at least as large.
        let mut rng = crate::mc::substream(12, 0);
        let mut checked = 0;
        for _ in 0..30 {
            let n = 2 + (rng.random::<u64>() % 2) as usize;
            let g: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
            let means: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
            let sds: Vec<f64> = (0..n).map(|_| 0.1 + 0.5 * rng.random::<f64>()).collect();
            let prior = Prior::normal(
                means
                    .iter()
                    .zip(&sds)
                    .map(|(&mean, &stdev)| crate::priors::NormalMarginal { mean, stdev })
                    .collect(),
            )
            .unwrap();
            let instance = Instance::new(g.clone(), prior).unwrap();
            let report = grid_best_response(&instance, 0.05).unwrap();
            let bound = report.gap_bound.unwrap();
            if report.divider_utility <= report.baseline_divider + bound {
                continue;
            }
            checked += 1;
            let q = report.division.q();
            let scaled = scale_to_extreme(&q).unwrap();
            let scaled_div = Division::from_q(&scaled).unwrap();
            let scaled_report = exact_eval(&instance, &scaled_div).unwrap();
            assert!(
                scaled_report.divider_utility >= report.divider_utility - 1e-9,
                "scaling lost utility: {} -> {}",
                report.divider_utility,
                scaled_report.divider_utility
            );
        }
        assert!(checked >= 5, "too few above-baseline winners: {checked}");
    }
}
