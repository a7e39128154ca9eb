//! End-to-end verification suite behind `dnc verify` and the `acceptance`
//! integration test target: one function per criterion, each with pinned
//! instances, tolerances, and a wall-clock budget, printing a single
//! pass/fail line.
//!
//! Every expected value was either derived independently (enumeration, grid
//! oracles, closed forms) or cross-checked before being frozen here. Three
//! pinned reference values are knowingly irreproducible; their criteria keep
//! the pins as stated and report computed-vs-pinned numbers instead of being
//! loosened:
//!
//! - criterion 1: the quoted pile-2 probability 0.553344 evaluates
//!   0.6*(1-0.6^5), but the instance's event ("good 1 low and at least one
//!   of the other FOUR goods high") is 0.6*(1-0.6^4) = 0.52224, which exact
//!   enumeration returns (utility 2.504448, not 2.5106688);
//! - criterion 2: the quoted two-good uniform chooser value 0.381 exceeds
//!   what any best response to the equilibrium divider family allows; the
//!   exact equilibrium value is 95/288 = 0.32986 (the divider's 19/72
//!   reproduces exactly, confirming the family);
//! - criterion 3: 0.375/0.25 per good are the infinite-goods limits, and
//!   convergence is O(1/sqrt(n)) — a mass-balanced split has P = 1/2, so at
//!   n = 50 the divider must give away about 6 units of mass, landing near
//!   0.33/0.28 per good. No strategy reaches 0.365 at n = 50.

use std::time::Instant;

use rand::Rng;
use rand_distr::Distribution;

use crate::experiments::{
    crossover_experiment, localize_incumbent, ExperimentConfig, PriorFamily,
};
use crate::extensions::{
    risk_utility_lottery, solve_risk_averse, RiskInterpretation, RiskProfile,
};
use crate::mc::substream;
use crate::model::{Division, Instance};
use crate::oracle;
use crate::priors::{self, Atom, ChooserType, JointDiscretePrior, Prior};
use crate::solver_discrete::solve_discrete;
use crate::solver_normal::{solve_normal, sweep_p, NormalSolveConfig};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:2}: {} ({:.1}s / {:.0}s budget){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget_seconds,
            if self.details.is_empty() {
                String::new()
            } else {
                format!(" — {}", self.details)
            }
        )
    }
}

pub const CRITERIA: [(usize, &str); 13] = [
    (1, "symmetry-breaking regression"),
    (2, "table 1, two uniform goods"),
    (3, "table 1, large-n uniform proxy"),
    (4, "six-good diversification instance"),
    (5, "critical-ratio monotonicity violation"),
    (6, "two-peak probability landscape"),
    (7, "equal critical ratios stay at baseline"),
    (8, "sweep solver vs grid oracle"),
    (9, "discrete solver exactness"),
    (10, "multiple offers"),
    (11, "risk aversion"),
    (12, "welfare crossover in the number of goods"),
    (13, "randomized invariant suites"),
];

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: vec![],
            notes: vec![],
        }
    }

    fn require(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.failures.push(msg.into());
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    fn finish(
        self,
        id: usize,
        name: &'static str,
        started: Instant,
        budget_seconds: f64,
    ) -> CriterionResult {
        let seconds = started.elapsed().as_secs_f64();
        let mut failures = self.failures;
        if seconds >= budget_seconds {
            failures.push(format!("runtime {seconds:.1}s over budget"));
        }
        let passed = failures.is_empty();
        let mut details = failures.join("; ");
        if details.is_empty() {
            details = self.notes.join("; ");
        }
        CriterionResult {
            id,
            name,
            passed,
            details,
            seconds,
            budget_seconds,
        }
    }
}

fn two_point_instance() -> Instance {
    Instance::new(
        vec![1.0; 5],
        Prior::two_point_iid(5, 0.01, 0.6, 1.0).unwrap(),
    )
    .unwrap()
}

fn normal_instance(g: &[f64], means: &[f64], sds: &[f64]) -> Instance {
    let prior = Prior::normal(
        means
            .iter()
            .zip(sds)
            .map(|(&mean, &stdev)| priors::NormalMarginal { mean, stdev })
            .collect(),
    )
    .unwrap();
    Instance::new(g.to_vec(), prior).unwrap()
}

fn criterion_1() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let instance = two_point_instance();
    let division = Division::new(vec![1.0, 0.4, 0.4, 0.4, 0.4]).unwrap();
    let report = oracle::exact_eval(&instance, &division).unwrap();
    let pile2 = 1.0 - report.pile1_probability;
    c.require(
        (pile2 - 0.553344).abs() <= 1e-12,
        format!("pile-2 probability {pile2} vs pinned 0.553344 (exact event value: 0.52224)"),
    );
    c.require(
        (report.divider_utility - 2.5106688).abs() <= 1e-9,
        format!(
            "divider utility {} vs pinned 2.5106688 (exact value: 2.504448)",
            report.divider_utility
        ),
    );
    c.finish(1, CRITERIA[0].1, started, 1.0)
}

fn criterion_2() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let config = ExperimentConfig::new(20, 20_000, vec![2], PriorFamily::Uniform01);
    let row = &crossover_experiment(&config).unwrap()[0];
    c.require(
        (row.divider_per_good - 19.0 / 72.0).abs() <= 0.01,
        format!(
            "divider per good {} vs pinned 19/72 = {}",
            row.divider_per_good,
            19.0 / 72.0
        ),
    );
    c.require(
        (row.chooser_per_good - 0.3810).abs() <= 0.01,
        format!(
            "chooser per good {} vs pinned 0.3810 (exact equilibrium value: 95/288 = {})",
            row.chooser_per_good,
            95.0 / 288.0
        ),
    );
    c.note(format!(
        "divider {:.4}, chooser {:.4}",
        row.divider_per_good, row.chooser_per_good
    ));
    c.finish(2, CRITERIA[1].1, started, 300.0)
}

fn criterion_3() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let config = ExperimentConfig::new(30, 500, vec![50], PriorFamily::Uniform01);
    let row = &crossover_experiment(&config).unwrap()[0];
    c.require(
        (row.divider_per_good - 0.375).abs() <= 0.01,
        format!("divider per good {} vs 0.375 +- 0.01", row.divider_per_good),
    );
    c.require(
        (row.chooser_per_good - 0.25).abs() <= 0.01,
        format!("chooser per good {} vs 0.25 +- 0.01", row.chooser_per_good),
    );
    c.note(format!(
        "divider {:.4}, chooser {:.4}",
        row.divider_per_good, row.chooser_per_good
    ));
    c.finish(3, CRITERIA[2].1, started, 600.0)
}

fn criterion_4() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let instance = normal_instance(
        &[101.0, 102.0, 103.0, 104.0, 105.0, 200.0],
        &[10.0; 6],
        &[1.0; 6],
    );
    let config = NormalSolveConfig::relative(&instance, 0.005);
    let report = solve_normal(&instance, &config).unwrap();
    c.require(
        (0.024..=0.044).contains(&report.pile1_probability),
        format!("P {} outside [0.024, 0.044]", report.pile1_probability),
    );
    let p = report.division.p();
    c.require(p[5] >= 0.99, format!("p6 = {} below 0.99", p[5]));
    let split = p.iter().filter(|&&v| v > 0.01 && v < 0.99).count();
    c.require(split >= 4, format!("{split} goods strictly divided, need 4"));
    let sum_abs: f64 = instance.divider_values().iter().map(|v| v.abs()).sum();
    let cert = localize_incumbent(&instance, &report.division, 0.1, 1e-4 * sum_abs).unwrap();
    c.require(cert.certified, "localization at margin 0.1 not certified");
    c.note(format!(
        "P = {:.4}, {split} split, localization min gap {:.3}",
        report.pile1_probability,
        cert.directions
            .iter()
            .map(|d| d.certified_gap)
            .fold(f64::INFINITY, f64::min)
    ));
    c.finish(4, CRITERIA[3].1, started, 60.0)
}

fn criterion_5() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let instance = normal_instance(&[1.0, 2.0, 3.0], &[100.0, 198.0, 100.0], &[5.0; 3]);
    let config = NormalSolveConfig::relative(&instance, 0.002);
    let report = solve_normal(&instance, &config).unwrap();
    let p = report.division.p();
    c.require(p[1] < p[0], format!("p2 = {} not below p1 = {}", p[1], p[0]));
    c.require(
        (0.001..=0.01).contains(&report.pile1_probability),
        format!("P {} outside [0.001, 0.01]", report.pile1_probability),
    );
    c.note(format!("P = {:.4}, p = {p:?}", report.pile1_probability));
    c.finish(5, CRITERIA[4].1, started, 60.0)
}

fn criterion_6() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let instance = normal_instance(&[11.0, 9.0, 1.0], &[100.0; 3], &[1.0, 1.0, 65.0]);
    let curve = sweep_p(&instance, 500).unwrap();
    let window_max = |lo: f64, hi: f64| {
        curve
            .iter()
            .filter(|(p, _)| *p >= lo && *p <= hi)
            .map(|&(p, u)| (u, p))
            .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let (low_u, low_p) = window_max(0.002, 0.08);
    let (high_u, high_p) = window_max(0.12, 0.33);
    let dip = curve
        .iter()
        .filter(|(p, _)| *p > 0.08 && *p < 0.12)
        .map(|&(_, u)| u)
        .fold(f64::INFINITY, f64::min);
    c.require(
        (10.5..=11.5).contains(&low_u),
        format!("low peak {low_u} outside [10.5, 11.5]"),
    );
    c.require(
        (11.5..=12.5).contains(&high_u),
        format!("high peak {high_u} outside [11.5, 12.5]"),
    );
    c.require(
        dip < low_u && dip < high_u,
        format!("no dip between peaks ({dip})"),
    );
    let global = curve.iter().fold((f64::NEG_INFINITY, 0.0), |a, &(p, u)| {
        if u > a.0 {
            (u, p)
        } else {
            a
        }
    });
    c.require(
        (global.1 - high_p).abs() < 1e-12,
        format!("global max at P = {} rather than the high peak", global.1),
    );
    c.note(format!(
        "peaks (P = {low_p:.3}, u = {low_u:.3}) and (P = {high_p:.3}, u = {high_u:.3})"
    ));
    c.finish(6, CRITERIA[5].1, started, 120.0)
}

fn criterion_7() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let mut rng = substream(70, 0);
    for trial in 0..50 {
        let n = 1 + (rng.random::<u64>() % 5) as usize;
        let ratio = 0.5 + 1.5 * rng.random::<f64>();
        let means: Vec<f64> = (0..n).map(|_| 0.5 + 2.0 * rng.random::<f64>()).collect();
        let sds: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        let g: Vec<f64> = means.iter().map(|&m| ratio * m).collect();
        let instance = normal_instance(&g, &means, &sds);
        let total: f64 = g.iter().sum();
        let gamma = 1e-3 * total;
        let config = NormalSolveConfig::with_gamma(gamma);
        let report = solve_normal(&instance, &config).unwrap();
        let base = instance.baseline();
        if (report.divider_utility - base).abs() > gamma {
            c.require(
                false,
                format!(
                    "trial {trial}: utility {} vs baseline {base} beyond gamma {gamma}",
                    report.divider_utility
                ),
            );
            break;
        }
    }
    c.finish(7, CRITERIA[6].1, started, 120.0)
}

fn criterion_8() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let mut rng = substream(80, 0);
    let mut worst: f64 = f64::INFINITY;
    for trial in 0..200 {
        let n = 1 + (rng.random::<u64>() % 3) as usize;
        let g: Vec<f64> = (0..n).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
        let means: Vec<f64> = (0..n).map(|_| 0.3 + 2.0 * rng.random::<f64>()).collect();
        let sds: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
        let instance = normal_instance(&g, &means, &sds);
        let config = NormalSolveConfig::relative(&instance, 0.01);
        let report = solve_normal(&instance, &config).unwrap();
        let grid = oracle::grid_best_response(&instance, 0.01).unwrap();
        let slack = config.gamma + grid.gap_bound.unwrap();
        let margin = report.divider_utility - (grid.divider_utility - slack);
        worst = worst.min(margin);
        if margin < 0.0 {
            c.require(
                false,
                format!(
                    "trial {trial}: solver {} below grid {} - slack {slack}",
                    report.divider_utility, grid.divider_utility
                ),
            );
            break;
        }
    }
    c.note(format!("worst margin over slack: {worst:.4}"));
    c.finish(8, CRITERIA[7].1, started, 600.0)
}

/// Shared by criteria 9 and 10: deterministic random joint-discrete
/// instances with n <= 3 and l <= 6.
fn random_joint_instances(count: usize) -> Vec<(Vec<f64>, JointDiscretePrior)> {
    let mut rng = substream(90, 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = 1 + (rng.random::<u64>() % 3) as usize;
        let l = 2 + (rng.random::<u64>() % 5) as usize;
        let g: Vec<f64> = (0..n).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
        let mut probs: Vec<f64> = (0..l).map(|_| 0.05 + rng.random::<f64>()).collect();
        let total: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= total;
        }
        let head: f64 = probs[..l - 1].iter().sum();
        probs[l - 1] = 1.0 - head;
        let types: Vec<ChooserType> = (0..l)
            .map(|j| ChooserType {
                values: (0..n).map(|_| 0.1 + 2.0 * rng.random::<f64>()).collect(),
                prob: probs[j],
            })
            .collect();
        if let Ok(prior) = JointDiscretePrior::new(types) {
            out.push((g, prior));
        }
    }
    out
}

fn criterion_9() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    // Pinned instance first.
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
    let four_type = priors::flatten_to_joint(&goods, 64).unwrap();
    let report = solve_discrete(&[2.0, 1.0], &four_type).unwrap();
    c.require(
        (report.divider_utility - 1.75).abs() <= 1e-9,
        format!("four-type utility {} vs 1.75", report.divider_utility),
    );
    let p = report.division.p();
    c.require(
        (p[0] - 1.0).abs() <= 1e-9 && p[1].abs() <= 1e-9,
        format!("four-type division {p:?} vs (1, 0)"),
    );

    for (idx, (g, prior)) in random_joint_instances(100).into_iter().enumerate() {
        let exact = solve_discrete(&g, &prior).unwrap();
        let instance = Instance::new(g, Prior::JointDiscrete(prior)).unwrap();
        let grid = oracle::grid_best_response(&instance, 0.01).unwrap();
        let bound = grid.gap_bound.unwrap();
        if exact.divider_utility < grid.divider_utility - 1e-9 {
            c.require(
                false,
                format!(
                    "instance {idx}: exact {} fell below grid {}",
                    exact.divider_utility, grid.divider_utility
                ),
            );
            break;
        }
        if exact.divider_utility > grid.divider_utility + bound {
            c.require(
                false,
                format!(
                    "instance {idx}: exact {} not within grid bound {bound} of {}",
                    exact.divider_utility, grid.divider_utility
                ),
            );
            break;
        }
    }
    c.finish(9, CRITERIA[8].1, started, 300.0)
}

fn criterion_10() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
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
    let prior = priors::flatten_to_joint(&goods, 64).unwrap();
    let (_, report) = crate::extensions::solve_multiple_offers(&[2.0, 1.0], &prior).unwrap();
    c.require(
        (report.divider_utility - 1.875).abs() <= 1e-9,
        format!("different-values divider {} vs 1.875", report.divider_utility),
    );
    c.require(
        (report.chooser_utility.unwrap() - 1.625).abs() <= 1e-9,
        format!(
            "different-values chooser {:?} vs 1.625",
            report.chooser_utility
        ),
    );
    let (_, r1) = crate::extensions::solve_multiple_offers(&[1.0, 1.0], &prior).unwrap();
    let (_, r2) = crate::extensions::solve_multiple_offers(&[2.0, 2.0], &prior).unwrap();
    let du = (r1.divider_utility + r2.divider_utility) / 2.0;
    let cu = (r1.chooser_utility.unwrap() + r2.chooser_utility.unwrap()) / 2.0;
    c.require(
        (du - 1.6875).abs() <= 1e-9,
        format!("equal-values ex-ante divider {du} vs 1.6875"),
    );
    c.require(
        (cu - 1.5).abs() <= 1e-9,
        format!("equal-values ex-ante chooser {cu} vs 1.5"),
    );

    for (idx, (g, prior)) in random_joint_instances(100).into_iter().enumerate() {
        let single = solve_discrete(&g, &prior).unwrap();
        let (_, offers) = crate::extensions::solve_multiple_offers(&g, &prior).unwrap();
        if offers.divider_utility < single.divider_utility - 1e-9 {
            c.require(
                false,
                format!(
                    "instance {idx}: menu {} below single-division {}",
                    offers.divider_utility, single.divider_utility
                ),
            );
            break;
        }
    }
    c.finish(10, CRITERIA[9].1, started, 300.0)
}

fn criterion_11() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    // Pinned lottery values.
    let g = [4.0, 16.0];
    let prior = Prior::discrete_per_good(vec![
        vec![Atom {
            value: 4.0,
            prob: 1.0,
        }],
        vec![
            Atom {
                value: 1.0,
                prob: 0.5,
            },
            Atom {
                value: 12.0,
                prob: 0.5,
            },
        ],
    ])
    .unwrap();
    let f = RiskProfile::sqrt();
    let u_frac = risk_utility_lottery(
        &g,
        &Division::new(vec![0.0, 2.0 / 3.0]).unwrap(),
        &prior,
        &f,
    )
    .unwrap();
    c.require(
        (u_frac - 8.0 / 3.0).abs() <= 1e-12,
        format!("lottery value {u_frac} vs 8/3"),
    );
    let u_sep =
        risk_utility_lottery(&g, &Division::new(vec![0.0, 1.0]).unwrap(), &prior, &f).unwrap();
    c.require((u_sep - 3.0).abs() <= 1e-12, format!("lottery value {u_sep} vs 3"));

    // Pile-1 probability never rises under risk aversion (divisible goods).
    let mut rng = substream(110, 0);
    for trial in 0..100 {
        let n = 1 + (rng.random::<u64>() % 3) as usize;
        let g: Vec<f64> = (0..n).map(|_| 0.3 + 2.0 * rng.random::<f64>()).collect();
        let prior = if trial % 2 == 0 {
            let means: Vec<f64> = (0..n).map(|_| 0.5 + 2.0 * rng.random::<f64>()).collect();
            let sds: Vec<f64> = (0..n).map(|_| 0.1 + 0.6 * rng.random::<f64>()).collect();
            Prior::normal(
                means
                    .iter()
                    .zip(&sds)
                    .map(|(&mean, &stdev)| priors::NormalMarginal { mean, stdev })
                    .collect(),
            )
            .unwrap()
        } else {
            let lo = 0.2 + rng.random::<f64>();
            let hi = lo + 0.5 + rng.random::<f64>();
            Prior::two_point_iid(n, lo, 0.4 + 0.2 * rng.random::<f64>(), hi).unwrap()
        };
        let instance = Instance::new(g, prior).unwrap();
        let neutral = solve_risk_averse(
            &instance,
            &RiskProfile::Neutral,
            RiskInterpretation::Divisible,
            0.02,
        )
        .unwrap();
        let averse = solve_risk_averse(
            &instance,
            &RiskProfile::sqrt(),
            RiskInterpretation::Divisible,
            0.02,
        )
        .unwrap();
        if averse.pile1_probability > neutral.pile1_probability + 1e-9 {
            c.require(
                false,
                format!(
                    "trial {trial}: risk-averse P {} above risk-neutral P {}",
                    averse.pile1_probability, neutral.pile1_probability
                ),
            );
            break;
        }
    }
    c.finish(11, CRITERIA[10].1, started, 600.0)
}

fn criterion_12() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let family = PriorFamily::Normal {
        mean: 1.0,
        stdev: 0.2,
    };
    let config = ExperimentConfig::new(120, 300, vec![2, 8, 25, 30], family);
    let rows = crossover_experiment(&config).unwrap();
    let by_n = |n: usize| rows.iter().find(|r| r.n == n).unwrap();
    let r2 = by_n(2);
    c.require(
        r2.diff_per_good >= 3.0 * r2.diff_se,
        format!(
            "n=2 chooser lead {} below 3 se ({})",
            r2.diff_per_good, r2.diff_se
        ),
    );
    let r30 = by_n(30);
    c.require(
        -r30.diff_per_good >= 3.0 * r30.diff_se,
        format!(
            "n=30 divider lead {} below 3 se ({})",
            -r30.diff_per_good, r30.diff_se
        ),
    );
    let r8 = by_n(8);
    let r25 = by_n(25);
    c.require(
        r8.diff_per_good > 0.0 && r25.diff_per_good < 0.0,
        format!(
            "no sign change in [8, 25]: diff(8) = {}, diff(25) = {}",
            r8.diff_per_good, r25.diff_per_good
        ),
    );
    c.note(format!(
        "diff/good: n=2 {:+.4}, n=8 {:+.4}, n=25 {:+.4}, n=30 {:+.4}",
        r2.diff_per_good, r8.diff_per_good, r25.diff_per_good, r30.diff_per_good
    ));
    c.finish(12, CRITERIA[11].1, started, 1800.0)
}

fn criterion_13() -> CriterionResult {
    let started = Instant::now();
    let mut c = Check::new();
    let mut rng = substream(130, 0);

    // Round trips, bit-level where representable.
    for _ in 0..1000 {
        let n = 1 + (rng.random::<u64>() % 8) as usize;
        let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let d = Division::new(p.clone()).unwrap();
        let back = crate::model::p_of_q(&d.q()).unwrap();
        for (a, b) in back.p().iter().zip(&p) {
            if (a - b).abs() > f64::EPSILON {
                c.require(false, format!("round trip drifted: {a} vs {b}"));
            }
        }
    }

    // Scaling and reflection invariance of the pile-1 probability.
    for _ in 0..200 {
        let n = 1 + (rng.random::<u64>() % 5) as usize;
        let prior = Prior::normal_iid(n, 0.5 + rng.random::<f64>(), 0.2 + rng.random::<f64>())
            .unwrap();
        let q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let p = priors::pile1_probability(&prior, &q).unwrap().value;
        let cs = 0.1 + 0.9 * rng.random::<f64>();
        let scaled: Vec<f64> = q.iter().map(|&v| v * cs).collect();
        let ps = priors::pile1_probability(&prior, &scaled).unwrap().value;
        c.require(
            (p - ps).abs() < 1e-12,
            format!("scaling changed P: {p} vs {ps}"),
        );
        let refl: Vec<f64> = q.iter().map(|&v| -v).collect();
        let pr = priors::pile1_probability(&prior, &refl).unwrap().value;
        let s2: f64 = q.iter().map(|&v| v * v).sum();
        if s2 > 0.0 {
            c.require(
                (p + pr - 1.0).abs() < 1e-12,
                format!("reflection broke: {p} + {pr} != 1"),
            );
        }
    }

    // Canonicalization idempotence.
    for _ in 0..500 {
        let n = 1 + (rng.random::<u64>() % 6) as usize;
        let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        if g.iter().all(|&v| v == 0.0) {
            continue;
        }
        let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let d = Division::new(p).unwrap();
        let canon = crate::model::canonicalize(&d, &g);
        let swing: f64 = canon.q().iter().zip(&g).map(|(&q, &gv)| q * gv).sum();
        c.require(swing >= -1e-12, format!("canonical swing negative: {swing}"));
        c.require(
            crate::model::canonicalize(&canon, &g) == canon,
            "canonicalize not idempotent",
        );
    }

    // Proportionality floors on discrete spot checks: every chooser type
    // gets at least half her total; the divider at least his baseline.
    for (g, prior) in random_joint_instances(25) {
        let report = solve_discrete(&g, &prior).unwrap();
        c.require(
            report.divider_utility >= report.baseline_divider - 1e-9,
            "divider fell below baseline",
        );
        for t in prior.types() {
            let got = priors::best_pile_value(&t.values, report.division.p());
            let half: f64 = 0.5 * t.values.iter().sum::<f64>();
            c.require(
                got >= half - 1e-9,
                format!("chooser type below half-total: {got} < {half}"),
            );
        }
    }

    // One-good-undivided scaling check on grid winners.
    let mut checked = 0;
    for _ in 0..30 {
        let n = 2 + (rng.random::<u64>() % 2) as usize;
        let g: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        let means: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
        let sds: Vec<f64> = (0..n).map(|_| 0.1 + 0.5 * rng.random::<f64>()).collect();
        let instance = normal_instance(&g, &means, &sds);
        let report = oracle::grid_best_response(&instance, 0.05).unwrap();
        if report.divider_utility <= report.baseline_divider + report.gap_bound.unwrap() {
            continue;
        }
        checked += 1;
        let scaled = crate::model::scale_to_extreme(&report.division.q()).unwrap();
        let sd = Division::from_q(&scaled).unwrap();
        let su = oracle::exact_eval(&instance, &sd).unwrap().divider_utility;
        c.require(
            su >= report.divider_utility - 1e-9,
            format!("scaling lost utility: {} -> {su}", report.divider_utility),
        );
    }
    c.require(checked >= 5, "too few above-baseline grid winners");

    // Closed-form chooser utility matches Monte-Carlo within 3 se.
    for trial in 0..100 {
        let n = 1 + (rng.random::<u64>() % 6) as usize;
        let means: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
        let sds: Vec<f64> = (0..n).map(|_| 0.1 + 0.5 * rng.random::<f64>()).collect();
        let prior = Prior::normal(
            means
                .iter()
                .zip(&sds)
                .map(|(&mean, &stdev)| priors::NormalMarginal { mean, stdev })
                .collect(),
        )
        .unwrap();
        let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let division = Division::new(p.clone()).unwrap();
        let exact = priors::chooser_expected_utility(&prior, &division)
            .unwrap()
            .value;
        let mut mc_rng = substream(131, trial);
        let samples = 40_000u32;
        let mut vals = Vec::with_capacity(samples as usize);
        let dists: Vec<rand_distr::Normal<f64>> = means
            .iter()
            .zip(&sds)
            .map(|(&m, &s)| rand_distr::Normal::new(m, s).unwrap())
            .collect();
        let mut x = vec![0.0; n];
        for _ in 0..samples {
            for (xi, dist) in x.iter_mut().zip(&dists) {
                *xi = dist.sample(&mut mc_rng);
            }
            vals.push(priors::best_pile_value(&x, &p));
        }
        let (mean, se) = crate::mc::mean_and_se(&vals);
        c.require(
            (exact - mean).abs() <= 3.0 * se.max(1e-9),
            format!("trial {trial}: closed form {exact} vs mc {mean} (se {se})"),
        );
    }

    c.finish(13, CRITERIA[12].1, started, 300.0)
}

/// Runs one criterion by id (1-based).
pub fn run(id: usize) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(),
        13 => criterion_13(),
        _ => return None,
    })
}

/// Runs the whole suite in order.
pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(|id| run(id).unwrap()).collect()
}
