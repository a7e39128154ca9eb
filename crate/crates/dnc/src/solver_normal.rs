//! Sweep solver for independent normal priors with an additive optimality
//! guarantee.
//!
//! The divider's problem is `max (1/2 - P(q)) * g.q` over the division cube.
//! Fixing a cap `P` on the pile-1 probability turns the problem convex: the
//! chance constraint `P(q) <= P` becomes the second-order cone
//! `mu.q <= Phi^{-1}(P) * ||sigma q||_2`, leaving a linear objective over a
//! box-cone intersection ([`crate::socp`] solves it). Sweeping `P` from 1/2
//! downward in steps `delta = gamma / sum|g|` and keeping the best candidate
//! is within an additive `gamma` of optimal: the true optimum's probability
//! lands in some step's interval, where its division is feasible and the cap
//! misprices its utility by at most `delta * sum|g|`.
//!
//! Candidates are re-evaluated at their exact pile-1 probability before
//! ranking, so the reported utility is the true expected utility of the
//! returned division, never the subproblem's conservative proxy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    baseline_divider, expected_divider_utility, Division, Instance, SolveMethod, SolveReport,
};
use crate::phi;
use crate::priors::{self, Prior};
use crate::socp::{self, ConeProgram};

/// Tuning for [`solve_normal`].
#[derive(Debug, Clone)]
pub struct NormalSolveConfig {
    /// Additive error bound on the divider's utility. Must be positive.
    pub gamma: f64,
    /// Objective tolerance for each cone subproblem; defaults to
    /// `1e-8 * sum|g|` when `None`.
    pub subproblem_tolerance: Option<f64>,
    /// Safety cap on the number of sweep steps.
    pub max_sweep_steps: u64,
}

impl NormalSolveConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        NormalSolveConfig {
            gamma,
            subproblem_tolerance: None,
            max_sweep_steps: 10_000_000,
        }
    }

    /// `gamma = frac * sum|g|`, the usual relative parameterization.
    pub fn relative(instance: &Instance, frac: f64) -> Self {
        let sum: f64 = instance.divider_values().iter().map(|g| g.abs()).sum();
        NormalSolveConfig::with_gamma(frac * sum)
    }
}

/// Number of sweep iterations for a given gamma: `ceil((1/2) / delta)` with
/// `delta = gamma / sum|g|`.
pub fn sweep_step_count(gamma: f64, sum_abs_g: f64) -> u64 {
    let delta = gamma / sum_abs_g;
    (0.5 / delta - 1e-9).ceil().max(1.0) as u64
}

/// Solution of one cone subproblem.
#[derive(Debug, Clone)]
pub struct CpSolution {
    /// Optimal subproblem objective `sum g_i/2 * (P(1-q_i) + (1-P)(1+q_i))`.
    pub u_p: f64,
    pub q: Vec<f64>,
}

fn normal_params(prior: &Prior) -> Result<(Vec<f64>, Vec<f64>)> {
    match prior {
        Prior::Normal(goods) => Ok((
            goods.iter().map(|g| g.mean).collect(),
            goods.iter().map(|g| g.stdev).collect(),
        )),
        _ => Err(Error::input("this solver requires a normal prior")),
    }
}

/// Raw cone-subproblem solve over an arbitrary box. Returns the maximizer of
/// `g.q` over {box ∩ cone(P)} or `None` when that set is empty or contains no
/// point with `g.q >= 0` (no candidate in the canonical branch).
struct CpRaw {
    q: Vec<f64>,
    converged: bool,
}

fn ok_raw(q: Vec<f64>) -> Result<Option<CpRaw>> {
    Ok(Some(CpRaw { q, converged: true }))
}

fn solve_cp_boxed(
    g: &[f64],
    means: &[f64],
    stdevs: &[f64],
    p_cap: f64,
    lo: &[f64],
    hi: &[f64],
    tol_cq: f64,
) -> Result<Option<CpRaw>> {
    let n = g.len();
    let zero_in_box = (0..n).any(|_| true) && lo.iter().all(|&l| l <= 0.0) && hi.iter().all(|&h| h >= 0.0);
    let zeros = vec![0.0; n];

    // P = 1/2: the cone degenerates to the halfspace mu.q <= 0 and the
    // sweep objective is constant; any feasible point will do.
    if p_cap >= 0.5 {
        if zero_in_box {
            return ok_raw(zeros);
        }
        let prog = ConeProgram {
            objective: g.to_vec(),
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            axis: means.iter().map(|&m| -m).collect(),
            weights: vec![0.0; n],
        };
        return match socp::find_interior(&prog)? {
            Some(q) => ok_raw(q),
            None => Ok(None),
        };
    }

    let t = -phi::std_normal_quantile(p_cap)?;
    let m_norm: f64 = means
        .iter()
        .zip(stdevs)
        .map(|(&m, &s)| (m / s).powi(2))
        .sum::<f64>()
        .sqrt();

    // Degenerate cone: only the apex (and possibly one ray) is feasible.
    if t >= m_norm * (1.0 - 1e-9) {
        if !zero_in_box {
            return Ok(None);
        }
        let mut best = zeros.clone();
        let mut best_cq = 0.0;
        if (t - m_norm).abs() <= 1e-9 * m_norm.max(1.0) && m_norm > 0.0 {
            // Feasible ray along -Sigma^{-2} mu, scaled to the box.
            let d: Vec<f64> = means
                .iter()
                .zip(stdevs)
                .map(|(&m, &s)| -m / (s * s))
                .collect();
            let mut smax = f64::INFINITY;
            for i in 0..n {
                if d[i] > 0.0 {
                    smax = smax.min(hi[i] / d[i]);
                } else if d[i] < 0.0 {
                    smax = smax.min(lo[i] / d[i]);
                }
            }
            if smax.is_finite() && smax > 0.0 {
                let ray: Vec<f64> = d.iter().map(|&di| di * smax).collect();
                let prog = ConeProgram {
                    objective: g.to_vec(),
                    lo: lo.to_vec(),
                    hi: hi.to_vec(),
                    axis: means.iter().map(|&m| -m).collect(),
                    weights: stdevs.iter().map(|&s| t * s).collect(),
                };
                let cq: f64 = ray.iter().zip(g).map(|(&qi, &gi)| qi * gi).sum();
                if socp::cone_violation(&prog, &ray) <= 1e-9 && cq > best_cq {
                    best_cq = cq;
                    best = ray;
                }
            }
        }
        let _ = best_cq;
        return ok_raw(best);
    }

    let prog = ConeProgram {
        objective: g.to_vec(),
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        axis: means.iter().map(|&m| -m).collect(),
        weights: stdevs.iter().map(|&s| t * s).collect(),
    };

    // Strictly feasible start: scale the interior direction -Sigma^{-2} mu
    // into the box when the box contains the apex; otherwise phase 1.
    let start = if zero_in_box && lo.iter().all(|&l| l < -1e-12) && hi.iter().all(|&h| h > 1e-12) {
        let d: Vec<f64> = means
            .iter()
            .zip(stdevs)
            .map(|(&m, &s)| -m / (s * s))
            .collect();
        let dmax = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let mut eps = f64::INFINITY;
        for i in 0..n {
            let di = d[i] / dmax;
            if di > 0.0 {
                eps = eps.min(hi[i] / di);
            } else if di < 0.0 {
                eps = eps.min(lo[i] / di);
            }
        }
        let eps = 0.45 * eps.min(2.0);
        let q0: Vec<f64> = d.iter().map(|&v| 0.999 * eps * v / dmax).collect();
        if socp::cone_violation(&prog, &q0) < 0.0 {
            Some(q0)
        } else {
            socp::find_interior(&prog)?
        }
    } else {
        socp::find_interior(&prog)?
    };
    let Some(start) = start else {
        return Ok(if zero_in_box {
            Some(CpRaw {
                q: zeros,
                converged: true,
            })
        } else {
            None
        });
    };

    let sol = socp::maximize_from(&prog, &start, tol_cq)?;
    let mut q = sol.q;
    // Clamp barrier round-off onto the box.
    for i in 0..n {
        q[i] = q[i].clamp(lo[i], hi[i]);
    }
    let cq: f64 = q.iter().zip(g).map(|(&qi, &gi)| qi * gi).sum();
    if cq < 0.0 {
        // The canonical branch (g.q >= 0) is empty or the apex dominates.
        return Ok(if zero_in_box {
            Some(CpRaw {
                q: zeros,
                converged: sol.converged,
            })
        } else {
            None
        });
    }
    Ok(Some(CpRaw {
        q,
        converged: sol.converged && sol.gap.is_finite(),
    }))
}

/// Solves the cone subproblem at pile-1 probability cap `p` over the standard
/// box `[-1, 1]^n`. `p` must lie in (0, 1/2].
pub fn solve_cp(
    divider_values: &[f64],
    means: &[f64],
    stdevs: &[f64],
    p: f64,
) -> Result<CpSolution> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::input(format!("probability cap {p} outside (0, 1/2]")));
    }
    if divider_values.len() != means.len() || means.len() != stdevs.len() {
        return Err(Error::input("divider values and prior dimensions differ"));
    }
    if stdevs.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::input("standard deviations must be positive"));
    }
    if divider_values.iter().all(|&g| g == 0.0) {
        return Err(Error::input("divider values must be not all zero"));
    }
    let n = divider_values.len();
    let sum_abs: f64 = divider_values.iter().map(|g| g.abs()).sum();
    let tol = 1e-8 * sum_abs;
    let lo = vec![-1.0; n];
    let hi = vec![1.0; n];
    let raw = solve_cp_boxed(divider_values, means, stdevs, p, &lo, &hi, tol / (0.5 - p).max(1e-9))?
        .ok_or_else(|| Error::solver("cone subproblem produced no feasible point"))?;
    let cq: f64 = raw
        .q
        .iter()
        .zip(divider_values)
        .map(|(&qi, &gi)| qi * gi)
        .sum();
    let u_p = baseline_divider(divider_values) + (0.5 - p) * cq;
    if !raw.converged {
        return Err(Error::solver(format!(
            "cone subproblem hit its iteration budget; best feasible objective {u_p}"
        )));
    }
    Ok(CpSolution { u_p, q: raw.q })
}

#[derive(Clone)]
struct Candidate {
    q: Vec<f64>,
    p1: f64,
    utility: f64,
}

fn evaluate_candidate(g: &[f64], prior: &Prior, q: Vec<f64>) -> Candidate {
    let p1 = priors::pile1_probability(prior, &q)
        .map(|e| e.value)
        .unwrap_or(1.0);
    let utility = expected_divider_utility(g, &q, p1).unwrap_or(f64::NEG_INFINITY);
    Candidate { q, p1, utility }
}

fn run_sweep(
    instance: &Instance,
    config: &NormalSolveConfig,
    lo: &[f64],
    hi: &[f64],
) -> Result<Option<Candidate>> {
    let g = instance.divider_values();
    let (means, stdevs) = normal_params(instance.prior())?;
    if !(config.gamma > 0.0) {
        return Err(Error::input("gamma must be positive"));
    }
    let sum_abs: f64 = g.iter().map(|v| v.abs()).sum();
    let steps = sweep_step_count(config.gamma, sum_abs);
    if steps > config.max_sweep_steps {
        return Err(Error::capacity(format!(
            "sweep would take {steps} steps, cap is {}",
            config.max_sweep_steps
        )));
    }
    let delta = config.gamma / sum_abs;
    let tol = config.subproblem_tolerance.unwrap_or(1e-8 * sum_abs);

    let mut candidates: Vec<Option<Candidate>> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let p_cap = (0.5 - k as f64 * delta).clamp(1e-12, 0.5);
            let tol_cq = tol / (0.5 - p_cap).max(delta * 0.5);
            solve_cp_boxed(g, &means, &stdevs, p_cap, lo, hi, tol_cq)
                .ok()
                .flatten()
                .map(|raw| evaluate_candidate(g, instance.prior(), raw.q))
        })
        .collect();

    // The P -> 0 corner: the all-even division is always worth checking when
    // the box admits it.
    if lo.iter().all(|&l| l <= 0.0) && hi.iter().all(|&h| h >= 0.0) {
        candidates.push(Some(evaluate_candidate(
            g,
            instance.prior(),
            vec![0.0; g.len()],
        )));
    }

    let mut best: Option<Candidate> = None;
    for cand in candidates.into_iter().flatten() {
        match &best {
            None => best = Some(cand),
            Some(b) => {
                if crate::oracle::better(cand.utility, cand.p1, &cand.q, b.utility, b.p1, &b.q) {
                    best = Some(cand);
                }
            }
        }
    }
    Ok(best)
}

fn report_from(instance: &Instance, cand: Candidate, gap: f64) -> Result<SolveReport> {
    let division = Division::from_q(&cand.q)?;
    let chooser = priors::chooser_expected_utility(instance.prior(), &division)?;
    Ok(SolveReport {
        division,
        pile1_probability: cand.p1,
        divider_utility: cand.utility,
        chooser_utility: Some(chooser.value),
        baseline_divider: instance.baseline(),
        method: Some(SolveMethod::NormalFptas),
        gap_bound: Some(gap),
    })
}

/// Sweep solver: utility within `gamma + subproblem_tolerance` of the optimal
/// divider utility for a normal prior.
pub fn solve_normal(instance: &Instance, config: &NormalSolveConfig) -> Result<SolveReport> {
    let n = instance.n();
    let lo = vec![-1.0; n];
    let hi = vec![1.0; n];
    let cand = run_sweep(instance, config, &lo, &hi)?
        .ok_or_else(|| Error::solver("sweep produced no candidates"))?;
    let sum_abs: f64 = instance.divider_values().iter().map(|v| v.abs()).sum();
    let tol = config.subproblem_tolerance.unwrap_or(1e-8 * sum_abs);
    report_from(instance, cand, config.gamma + tol)
}

/// Sweep solver restricted to a sub-box of the division cube, used by the
/// localization diagnostic. Searches canonical divisions (`g.q >= 0`) only;
/// returns `None` when the box contains none.
pub fn solve_normal_boxed(
    instance: &Instance,
    config: &NormalSolveConfig,
    lo: &[f64],
    hi: &[f64],
) -> Result<Option<SolveReport>> {
    if lo.len() != instance.n() || hi.len() != instance.n() {
        return Err(Error::input("box bounds must match the instance size"));
    }
    for i in 0..lo.len() {
        if !(lo[i] >= -1.0 - 1e-12 && hi[i] <= 1.0 + 1e-12 && lo[i] < hi[i]) {
            return Err(Error::input(format!(
                "invalid box on good {i}: [{}, {}]",
                lo[i], hi[i]
            )));
        }
    }
    let sum_abs: f64 = instance.divider_values().iter().map(|v| v.abs()).sum();
    let tol = config.subproblem_tolerance.unwrap_or(1e-8 * sum_abs);
    match run_sweep(instance, config, lo, hi)? {
        None => Ok(None),
        Some(cand) => Ok(Some(report_from(instance, cand, config.gamma + tol)?)),
    }
}

/// The sweep objective (best cone-subproblem value) on an ascending uniform
/// probability grid over (0, 1/2], for landscape plots.
pub fn sweep_p(instance: &Instance, steps: u64) -> Result<Vec<(f64, f64)>> {
    if steps == 0 {
        return Err(Error::input("sweep needs at least one step"));
    }
    let g = instance.divider_values();
    let (means, stdevs) = normal_params(instance.prior())?;
    let sum_abs: f64 = g.iter().map(|v| v.abs()).sum();
    let base = baseline_divider(g);
    let tol = 1e-8 * sum_abs;
    let lo = vec![-1.0; g.len()];
    let hi = vec![1.0; g.len()];
    let curve: Vec<(f64, f64)> = (1..=steps)
        .into_par_iter()
        .map(|k| {
            let p_cap = 0.5 * k as f64 / steps as f64;
            let u = match solve_cp_boxed(
                g,
                &means,
                &stdevs,
                p_cap,
                &lo,
                &hi,
                tol / (0.5 - p_cap).max(1e-4 / steps as f64),
            ) {
                Ok(Some(raw)) => {
                    let cq: f64 = raw.q.iter().zip(g).map(|(&qi, &gi)| qi * gi).sum();
                    base + (0.5 - p_cap) * cq.max(0.0)
                }
                _ => base,
            };
            (p_cap, u)
        })
        .collect();
    Ok(curve)
}

/// Multiplicative wrapper: with nonnegative divider values, running the sweep
/// at `gamma = (epsilon/2) * sum g` returns at least `(1 - epsilon)` of the
/// optimal utility.
pub fn solve_normal_fptas(instance: &Instance, epsilon: f64) -> Result<SolveReport> {
    if !(epsilon > 0.0) {
        return Err(Error::input("epsilon must be positive"));
    }
    if instance.divider_values().iter().any(|&v| v < 0.0) {
        return Err(Error::input(
            "the multiplicative guarantee requires nonnegative divider values",
        ));
    }
    let total: f64 = instance.divider_values().iter().sum();
    let config = NormalSolveConfig::with_gamma(epsilon / 2.0 * total);
    solve_normal(instance, &config)
}
