//! Seeded Monte-Carlo studies of the game's welfare questions: who is better
//! off as the number of goods grows, when is the divider role worth having,
//! how much more does a risk-averse divider diversify, and how tightly can a
//! computed division be localized around the true optimum.
//!
//! Reproducibility contract: every stochastic path draws from ChaCha12
//! substreams addressed by `(seed, derived stream index)`, trials are
//! aggregated in trial order, and identical configs produce bit-identical
//! tables regardless of thread count.

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::{solve_risk_averse, RiskInterpretation, RiskProfile};
use crate::mc::{mean_and_se, substream, McConfig};
use crate::model::{baseline_divider, Division, Instance};
use crate::oracle;
use crate::priors::{self, Prior};
use crate::solver_normal::{solve_normal, solve_normal_boxed, NormalSolveConfig};

/// Value distribution shared by all goods (and both players) in a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum PriorFamily {
    Normal { mean: f64, stdev: f64 },
    Uniform01,
}

/// Shared experiment knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: u32,
    pub n_range: Vec<usize>,
    pub prior: PriorFamily,
    /// Additive solver tolerance for inner solves, as a fraction of sum |g|.
    pub gamma_frac: f64,
    /// Sample count for Monte-Carlo evaluation paths (uniform priors, n >= 3).
    pub eval_samples: u32,
}

impl ExperimentConfig {
    pub fn new(seed: u64, trials: u32, n_range: Vec<usize>, prior: PriorFamily) -> Self {
        ExperimentConfig {
            seed,
            trials,
            n_range,
            prior,
            gamma_frac: 0.01,
            eval_samples: 20_000,
        }
    }
}

/// One row of the crossover table: per-good utilities of both roles at a
/// given number of goods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub n: usize,
    pub trials: u32,
    pub divider_per_good: f64,
    pub chooser_per_good: f64,
    pub divider_se: f64,
    pub chooser_se: f64,
    /// chooser - divider, paired per trial.
    pub diff_per_good: f64,
    pub diff_se: f64,
}

fn sample_values(family: &PriorFamily, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    match family {
        PriorFamily::Normal { mean, stdev } => {
            let dist = rand_distr::Normal::new(*mean, *stdev).expect("valid normal");
            (0..n).map(|_| dist.sample(rng)).collect()
        }
        PriorFamily::Uniform01 => (0..n).map(|_| rng.random::<f64>()).collect(),
    }
}

/// Divider best response for two iid U[0,1] goods: exact polygon-area pile-1
/// probabilities on a coarse grid, then local refinement to 1e-3.
fn uniform_best_response_2d(g: &[f64]) -> Result<(f64, Division)> {
    let prior = Prior::uniform01(g.len());
    let base = baseline_divider(g);
    let eval = |q: &[f64]| -> f64 {
        let p1 = priors::pile1_probability(&prior, q)
            .map(|e| e.value)
            .unwrap_or(1.0);
        let swing: f64 = q.iter().zip(g).map(|(&qi, &gi)| qi * gi).sum();
        base + (0.5 - p1) * swing
    };
    let mut best_q = vec![0.0; g.len()];
    let mut best_u = eval(&best_q);
    if g.len() == 1 {
        for q in [[-1.0], [1.0]] {
            let u = eval(&q);
            if u > best_u {
                best_u = u;
                best_q = q.to_vec();
            }
        }
        return Ok((best_u, Division::from_q(&best_q)?));
    }
    let scan = |center: &[f64], half: f64, step: f64, best_u: &mut f64, best_q: &mut Vec<f64>| {
        let steps = (2.0 * half / step).round() as i64;
        for i in 0..=steps {
            for j in 0..=steps {
                let q = [
                    (center[0] - half + i as f64 * step).clamp(-1.0, 1.0),
                    (center[1] - half + j as f64 * step).clamp(-1.0, 1.0),
                ];
                let u = eval(&q);
                if u > *best_u {
                    *best_u = u;
                    *best_q = q.to_vec();
                }
            }
        }
    };
    scan(&[0.0, 0.0], 1.0, 0.02, &mut best_u, &mut best_q);
    let c1 = best_q.clone();
    scan(&c1, 0.04, 0.004, &mut best_u, &mut best_q);
    let c2 = best_q.clone();
    scan(&c2, 0.008, 0.001, &mut best_u, &mut best_q);
    Ok((best_u, Division::from_q(&best_q)?))
}

/// Per-trial outcome of the crossover study.
fn crossover_trial(
    config: &ExperimentConfig,
    n: usize,
    trial: u32,
) -> Result<(f64, f64)> {
    let stream = (n as u64) << 32 | u64::from(trial);
    let mut rng = substream(config.seed, stream);
    let g = sample_values(&config.prior, n, &mut rng);
    if g.iter().all(|&v| v == 0.0) {
        return Ok((0.5 * baseline_divider(&g), 0.5 * baseline_divider(&g)));
    }
    match config.prior {
        PriorFamily::Normal { mean, stdev } => {
            let prior = Prior::normal_iid(n, mean, stdev)?;
            let instance = Instance::new(g, prior)?;
            let config_in = NormalSolveConfig::relative(&instance, config.gamma_frac);
            let report = solve_normal(&instance, &config_in)?;
            Ok((
                report.divider_utility / n as f64,
                report.chooser_utility.unwrap_or(f64::NAN) / n as f64,
            ))
        }
        PriorFamily::Uniform01 => {
            if n <= 2 {
                let (u, division) = uniform_best_response_2d(&g)?;
                let prior = Prior::uniform01(n);
                let chooser = priors::chooser_expected_utility(&prior, &division)?.value;
                Ok((u / n as f64, chooser / n as f64))
            } else {
                // CLT surrogate: solve the moment-matched normal problem and
                // evaluate the division under the true uniform prior by
                // seeded Monte-Carlo.
                let surrogate = Prior::normal_iid(n, 0.5, (1.0f64 / 12.0).sqrt())?;
                let instance = Instance::new(g.clone(), surrogate)?;
                let config_in = NormalSolveConfig::relative(&instance, config.gamma_frac);
                let report = solve_normal(&instance, &config_in)?;
                let division = report.division;
                let prior = Prior::uniform01(n);
                let mc = McConfig {
                    seed: config.seed ^ 0x75ab_1c1e,
                    samples: config.eval_samples,
                };
                let mut mc = mc;
                // Independent evaluation substream per trial.
                mc.seed = mc.seed.wrapping_add(stream);
                let q = division.q();
                let p1 = priors::pile1_probability_with(&prior, &q, &mc)?.value;
                let du = crate::model::expected_divider_utility(&g, &q, p1)?;
                let cu = priors::chooser_expected_utility_with(&prior, &division, &mc)?.value;
                Ok((du / n as f64, cu / n as f64))
            }
        }
    }
}

/// Repeated-trial welfare comparison of the two roles across good counts.
pub fn crossover_experiment(config: &ExperimentConfig) -> Result<Vec<CrossoverRow>> {
    if config.trials == 0 {
        return Err(Error::input("need at least one trial"));
    }
    let mut rows = Vec::with_capacity(config.n_range.len());
    for &n in &config.n_range {
        let outcomes: Vec<Result<(f64, f64)>> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                crossover_trial(config, n, trial)
                    .map_err(|e| Error::solver(format!("trial {trial} (n = {n}): {e}")))
            })
            .collect();
        let mut divider = Vec::with_capacity(outcomes.len());
        let mut chooser = Vec::with_capacity(outcomes.len());
        let mut diff = Vec::with_capacity(outcomes.len());
        for out in outcomes {
            let (d, c) = out?;
            divider.push(d);
            chooser.push(c);
            diff.push(c - d);
        }
        let (dm, dse) = mean_and_se(&divider);
        let (cm, cse) = mean_and_se(&chooser);
        let (fm, fse) = mean_and_se(&diff);
        rows.push(CrossoverRow {
            n,
            trials: config.trials,
            divider_per_good: dm,
            chooser_per_good: cm,
            divider_se: dse,
            chooser_se: cse,
            diff_per_good: fm,
            diff_se: fse,
        });
    }
    Ok(rows)
}

/// Configuration of the which-role-is-better study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleStudyConfig {
    pub seed: u64,
    pub n: usize,
    pub samples: u32,
    /// Number of optimal divisions (from fresh divider draws) the chooser's
    /// utility is averaged against.
    pub ensemble: u32,
    pub mean: f64,
    pub stdev: f64,
    pub gamma_frac: f64,
}

impl Default for RoleStudyConfig {
    fn default() -> Self {
        RoleStudyConfig {
            seed: 1,
            n: 13,
            samples: 200,
            ensemble: 500,
            mean: 1.0,
            stdev: 0.2,
            gamma_frac: 0.01,
        }
    }
}

/// One sampled value vector judged in both roles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleRow {
    pub values: Vec<f64>,
    /// Sum of |value - prior mean| over the goods.
    pub deviation: f64,
    pub divider_utility: f64,
    pub chooser_utility: f64,
}

impl RoleRow {
    pub fn divider_better(&self) -> bool {
        self.divider_utility > self.chooser_utility
    }
}

/// For sampled private values, compares the utility of playing divider
/// (optimal division) against playing chooser (best pile against an ensemble
/// of optimal divisions from fresh opponent draws). Rows sorted by deviation.
pub fn deviation_role_experiment(config: &RoleStudyConfig) -> Result<Vec<RoleRow>> {
    if config.samples == 0 || config.ensemble == 0 {
        return Err(Error::input("samples and ensemble must be positive"));
    }
    let n = config.n;
    let prior = Prior::normal_iid(n, config.mean, config.stdev)?;

    let divisions: Vec<Division> = (0..config.ensemble)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(config.seed, 0x0100_0000_0000 + u64::from(k));
            let g = sample_values(
                &PriorFamily::Normal {
                    mean: config.mean,
                    stdev: config.stdev,
                },
                n,
                &mut rng,
            );
            let instance = Instance::new(g, prior.clone())?;
            let cfg = NormalSolveConfig::relative(&instance, config.gamma_frac);
            Ok(solve_normal(&instance, &cfg)?.division)
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<RoleRow> = (0..config.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = substream(config.seed, u64::from(s));
            let v = sample_values(
                &PriorFamily::Normal {
                    mean: config.mean,
                    stdev: config.stdev,
                },
                n,
                &mut rng,
            );
            let deviation: f64 = v.iter().map(|x| (x - config.mean).abs()).sum();
            let instance = Instance::new(v.clone(), prior.clone())?;
            let cfg = NormalSolveConfig::relative(&instance, config.gamma_frac);
            let divider_utility = solve_normal(&instance, &cfg)?.divider_utility;
            let chooser_utility = divisions
                .iter()
                .map(|d| priors::best_pile_value(&v, d.p()))
                .sum::<f64>()
                / f64::from(config.ensemble);
            Ok(RoleRow {
                values: v,
                deviation,
                divider_utility,
                chooser_utility,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.deviation.total_cmp(&b.deviation));
    Ok(rows)
}

/// Configuration of the risk-aversion diversification comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversificationConfig {
    pub seed: u64,
    pub trials: u32,
    pub n: usize,
    pub mean: f64,
    pub stdev: f64,
    pub resolution: f64,
    pub profile: RiskProfile,
}

impl Default for DiversificationConfig {
    fn default() -> Self {
        DiversificationConfig {
            seed: 1,
            trials: 50,
            n: 4,
            mean: 1.0,
            stdev: 0.2,
            resolution: 0.1,
            profile: RiskProfile::sqrt(),
        }
    }
}

/// Paired optimal divisions for the same divider draw under risk neutrality
/// and the configured concave utility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversificationRow {
    pub trial: u32,
    pub neutral_p: Vec<f64>,
    pub averse_p: Vec<f64>,
    /// Goods strictly divided (0 < p_i < 1) per side.
    pub neutral_split: usize,
    pub averse_split: usize,
}

fn strict_split_count(p: &[f64]) -> usize {
    p.iter().filter(|&&v| v > 1e-9 && v < 1.0 - 1e-9).count()
}

pub fn diversification_experiment(
    config: &DiversificationConfig,
) -> Result<Vec<DiversificationRow>> {
    if config.n > 4 {
        return Err(Error::capacity(
            "diversification study is grid-based; n <= 4".to_string(),
        ));
    }
    let prior = Prior::normal_iid(config.n, config.mean, config.stdev)?;
    (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(config.seed, u64::from(trial));
            // Concave profiles need nonnegative pile values; redraw the rare
            // non-positive goods.
            let mut g;
            loop {
                g = sample_values(
                    &PriorFamily::Normal {
                        mean: config.mean,
                        stdev: config.stdev,
                    },
                    config.n,
                    &mut rng,
                );
                if g.iter().all(|&v| v > 0.0) {
                    break;
                }
            }
            let instance = Instance::new(g, prior.clone())?;
            let neutral = solve_risk_averse(
                &instance,
                &RiskProfile::Neutral,
                RiskInterpretation::Divisible,
                config.resolution,
            )?;
            let averse = solve_risk_averse(
                &instance,
                &config.profile,
                RiskInterpretation::Divisible,
                config.resolution,
            )?;
            Ok(DiversificationRow {
                trial,
                neutral_split: strict_split_count(neutral.division.p()),
                averse_split: strict_split_count(averse.division.p()),
                neutral_p: neutral.division.p().to_vec(),
                averse_p: averse.division.p().to_vec(),
            })
        })
        .collect()
}

/// One direction of the localization certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub good: usize,
    pub upward: bool,
    /// None when the constrained region is empty or outside the cube.
    pub constrained_utility: Option<f64>,
    /// Incumbent utility minus (constrained bound + gamma); positive
    /// certifies the direction.
    pub certified_gap: f64,
    pub vacuous: bool,
}

/// Certificate that every optimal canonical division lies within `margin` of
/// the incumbent in the max norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationCertificate {
    pub margin: f64,
    pub gamma: f64,
    pub incumbent_utility: f64,
    pub directions: Vec<DirectionCheck>,
    pub certified: bool,
}

/// Re-solves with each `p_i` forced at least `margin` away from the
/// incumbent, one good and direction at a time. If every constrained optimum
/// provably falls below the incumbent, no optimal division (with the divider
/// weakly preferring pile 1) deviates from the incumbent by more than
/// `margin` in any coordinate.
pub fn localize_incumbent(
    instance: &Instance,
    incumbent: &Division,
    margin: f64,
    gamma: f64,
) -> Result<LocalizationCertificate> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::input("margin must lie in (0, 1)"));
    }
    let n = instance.n();
    if incumbent.n() != n {
        return Err(Error::input("incumbent dimension mismatch"));
    }
    let incumbent_utility = oracle::exact_eval(instance, incumbent)?.divider_utility;
    let base = instance.baseline();
    let config = NormalSolveConfig::with_gamma(gamma);

    let jobs: Vec<(usize, bool)> = (0..n).flat_map(|i| [(i, true), (i, false)]).collect();
    let directions: Vec<DirectionCheck> = jobs
        .into_par_iter()
        .map(|(good, upward)| {
            let mut lo = vec![-1.0; n];
            let mut hi = vec![1.0; n];
            let p_inc = incumbent.p()[good];
            let vacuous = if upward {
                let b = 2.0 * (p_inc + margin) - 1.0;
                if b > 1.0 {
                    true
                } else {
                    lo[good] = b;
                    false
                }
            } else {
                let b = 2.0 * (p_inc - margin) - 1.0;
                if b < -1.0 {
                    true
                } else {
                    hi[good] = b;
                    false
                }
            };
            if vacuous {
                return Ok(DirectionCheck {
                    good,
                    upward,
                    constrained_utility: None,
                    certified_gap: f64::INFINITY,
                    vacuous: true,
                });
            }
            let report = solve_normal_boxed(instance, &config, &lo, &hi)?;
            let constrained_utility = report.as_ref().map(|r| r.divider_utility);
            // Canonical divisions with P > 1/2 are worth at most the
            // baseline, so the certified bound is max(sweep + gamma, base).
            let bound = constrained_utility
                .map(|u| (u + gamma).max(base))
                .unwrap_or(base);
            Ok(DirectionCheck {
                good,
                upward,
                constrained_utility,
                certified_gap: incumbent_utility - bound,
                vacuous: false,
            })
        })
        .collect::<Result<_>>()?;

    let certified = directions.iter().all(|d| d.certified_gap > 0.0);
    Ok(LocalizationCertificate {
        margin,
        gamma,
        incumbent_utility,
        directions,
        certified,
    })
}
