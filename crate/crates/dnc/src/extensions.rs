//! Two game extensions: a risk-averse divider (concave utility over his
//! realized value, with divisible goods or post-choice lotteries over
//! indivisible ones) and the multiple-offers game (the divider publishes an
//! even base division plus a set of alternative allocations and lets the
//! chooser pick any option).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{baseline_divider, Division, Instance, SolveMethod, SolveReport};
use crate::priors::{self, JointDiscretePrior, Prior};
use crate::solver_discrete::{repair_binding_rows, solve_lp, LinearProgram};

/// Increasing concave utility over the divider's realized value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RiskProfile {
    Neutral,
    /// `f(v) = sqrt(v - shift)`, defined for `v >= shift`.
    SqrtShifted { shift: f64 },
    /// `f(v) = v^exponent` with exponent in (0, 1], defined for `v >= 0`.
    Power { exponent: f64 },
}

impl RiskProfile {
    pub fn sqrt() -> Self {
        RiskProfile::SqrtShifted { shift: 0.0 }
    }

    fn domain_min(&self) -> f64 {
        match self {
            RiskProfile::Neutral => f64::NEG_INFINITY,
            RiskProfile::SqrtShifted { shift } => *shift,
            RiskProfile::Power { .. } => 0.0,
        }
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        if v < self.domain_min() - 1e-12 {
            return Err(Error::input(format!(
                "value {v} below the utility function's domain ({})",
                self.domain_min()
            )));
        }
        Ok(match self {
            RiskProfile::Neutral => v,
            RiskProfile::SqrtShifted { shift } => (v - shift).max(0.0).sqrt(),
            RiskProfile::Power { exponent } => v.max(0.0).powf(*exponent),
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            RiskProfile::Power { exponent } if !(*exponent > 0.0 && *exponent <= 1.0) => Err(
                Error::input(format!("power exponent {exponent} outside (0, 1]")),
            ),
            RiskProfile::SqrtShifted { shift } if !shift.is_finite() => {
                Err(Error::input("shift must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Randomized midpoint-concavity check on `[lo, hi]`, run before any
    /// risk-averse solve.
    pub fn check_concave_on(&self, lo: f64, hi: f64, seed: u64) -> Result<()> {
        self.validate()?;
        if lo < self.domain_min() - 1e-12 {
            return Err(Error::input(format!(
                "pile values reach {lo}, below the utility domain ({})",
                self.domain_min()
            )));
        }
        use rand::Rng;
        let mut rng = crate::mc::substream(seed, 0);
        for _ in 0..64 {
            let a = lo + (hi - lo) * rng.random::<f64>();
            let b = lo + (hi - lo) * rng.random::<f64>();
            let mid = self.eval(0.5 * (a + b))?;
            let chord = 0.5 * (self.eval(a)? + self.eval(b)?);
            if mid < chord - 1e-12 {
                return Err(Error::input(format!(
                    "utility function fails midpoint concavity at ({a}, {b})"
                )));
            }
        }
        Ok(())
    }
}

/// Range of divider values any pile can realize.
fn pile_value_range(g: &[f64]) -> (f64, f64) {
    let lo: f64 = g.iter().map(|&v| v.min(0.0)).sum();
    let hi: f64 = g.iter().map(|&v| v.max(0.0)).sum();
    (lo, hi)
}

/// Expected risk utility when goods are physically divisible: the divider
/// holds pile 1 with probability `1 - P` and pile 2 with probability `P`.
pub fn risk_utility_divisible(
    divider_values: &[f64],
    division: &Division,
    prior: &Prior,
    f: &RiskProfile,
) -> Result<f64> {
    f.validate()?;
    let q = division.q();
    let p1 = priors::pile1_probability(prior, &q)?.value;
    let v1: f64 = division
        .p()
        .iter()
        .zip(divider_values)
        .map(|(&p, &g)| p * g)
        .sum();
    let v2: f64 = divider_values.iter().sum::<f64>() - v1;
    Ok((1.0 - p1) * f.eval(v1)? + p1 * f.eval(v2)?)
}

/// Expected risk utility when fractions are lotteries resolved after the
/// chooser picks: good `i` lands on the divider's side with probability
/// `1 - p_i` if she took pile 1 and `p_i` if she took pile 2.
pub fn risk_utility_lottery(
    divider_values: &[f64],
    division: &Division,
    prior: &Prior,
    f: &RiskProfile,
) -> Result<f64> {
    f.validate()?;
    let n = divider_values.len();
    if n > 20 {
        return Err(Error::capacity(format!(
            "lottery evaluation enumerates 2^n outcomes; n = {n} exceeds 20"
        )));
    }
    let q = division.q();
    let p1 = priors::pile1_probability(prior, &q)?.value;
    let mut total = 0.0;
    for (branch_prob, side) in [(p1, false), (1.0 - p1, true)] {
        if branch_prob == 0.0 {
            continue;
        }
        // side = true: chooser took pile 2, divider-side probability is p_i.
        let keep: Vec<f64> = division
            .p()
            .iter()
            .map(|&p| if side { p } else { 1.0 - p })
            .collect();
        let mut branch_value = 0.0;
        for mask in 0u32..(1u32 << n) {
            let mut prob = 1.0;
            let mut value = 0.0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    prob *= keep[i];
                    value += divider_values[i];
                } else {
                    prob *= 1.0 - keep[i];
                }
            }
            if prob > 0.0 {
                branch_value += prob * f.eval(value)?;
            }
        }
        total += branch_prob * branch_value;
    }
    Ok(total)
}

/// Which reading of fractional divisions a risk solve uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskInterpretation {
    Divisible,
    Lottery,
}

/// Grid search over divisions maximizing the chosen risk utility (n <= 4).
/// The report's `divider_utility` field carries the risk utility of the
/// winner; `pile1_probability` is its exact pile-1 probability.
///
/// Only canonical divisions (`g.q >= 0`) are scanned: a reflection names the
/// same two piles, and the canonical twin is weakly better under the
/// ties-to-pile-2 convention, so scanning both sides would only let float
/// round-off pick the relabeled twin with `P` reported as `1 - P`.
pub fn solve_risk_averse(
    instance: &Instance,
    f: &RiskProfile,
    interpretation: RiskInterpretation,
    resolution: f64,
) -> Result<SolveReport> {
    let n = instance.n();
    if n > 4 {
        return Err(Error::capacity(format!(
            "risk-averse grid search supports n <= 4, instance has {n}"
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::input("grid resolution must be positive"));
    }
    let g = instance.divider_values();
    let (vlo, vhi) = pile_value_range(g);
    f.check_concave_on(vlo, vhi, 7)?;

    let per_axis = (2.0 / resolution).round() as u64 + 1;
    let total = per_axis.checked_pow(n as u32).unwrap_or(u64::MAX);
    if total > 100_000_000 {
        return Err(Error::capacity(format!(
            "grid would have {total} points, cap is 1e8"
        )));
    }
    if matches!(instance.prior(), Prior::Uniform01 { n } if *n >= 3) && total > 40_000 {
        return Err(Error::capacity(
            "uniform priors beyond two goods price each cell by Monte-Carlo; \
             coarsen the resolution"
                .to_string(),
        ));
    }
    let coord = |idx: u64| -> f64 { -1.0 + 2.0 * idx as f64 / (per_axis - 1) as f64 };
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut idx = vec![0u64; n];
    let mut q = vec![0.0f64; n];
    loop {
        for (k, &ix) in idx.iter().enumerate() {
            q[k] = coord(ix);
        }
        let swing: f64 = q.iter().zip(g).map(|(&qi, &gi)| qi * gi).sum();
        if swing >= 0.0 {
            let division = Division::from_q(&q)?;
            let u = match interpretation {
                RiskInterpretation::Divisible => {
                    risk_utility_divisible(g, &division, instance.prior(), f)?
                }
                RiskInterpretation::Lottery => {
                    risk_utility_lottery(g, &division, instance.prior(), f)?
                }
            };
            let p1 = priors::pile1_probability(instance.prior(), &q)?.value;
            let replace = match &best {
                None => true,
                Some((bu, bp, bq)) => crate::oracle::better(u, p1, &q, *bu, *bp, bq),
            };
            if replace {
                best = Some((u, p1, q.clone()));
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                // The canonical half always contains q = 0, so a winner exists.
                let (u, p1, q) = best.unwrap();
                let division = Division::from_q(&q)?;
                let chooser = priors::chooser_expected_utility(instance.prior(), &division)?;
                return Ok(SolveReport {
                    division,
                    pile1_probability: p1,
                    divider_utility: u,
                    chooser_utility: Some(chooser.value),
                    baseline_divider: instance.baseline(),
                    method: Some(SolveMethod::RiskGrid),
                    gap_bound: None,
                });
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// An even-or-alternative offer menu: the base division plus divider-side
/// fraction vectors the chooser may take instead of a pile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferMenu {
    pub base: Division,
    /// Divider-side fractions: picking alternative `a` gives the chooser
    /// `1 - a_i` of each good.
    pub alternatives: Vec<Vec<f64>>,
}

impl OfferMenu {
    pub fn new(base: Division, alternatives: Vec<Vec<f64>>) -> Result<Self> {
        for (k, a) in alternatives.iter().enumerate() {
            if a.len() != base.n() {
                return Err(Error::input(format!(
                    "alternative {k} covers {} goods, base has {}",
                    a.len(),
                    base.n()
                )));
            }
            if a.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::input(format!(
                    "alternative {k} has fractions outside [0, 1]"
                )));
            }
        }
        Ok(OfferMenu { base, alternatives })
    }
}

/// One entry of a menu, as the chooser sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuOption {
    Pile1,
    Pile2,
    Alt(usize),
}

fn approx_ge(a: f64, b: f64) -> bool {
    a >= b - 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// The option a chooser with the given values picks: her highest-valued
/// option, ties resolved toward the divider's highest value, then by the
/// fixed order pile 2 < alternatives (ascending) < pile 1.
pub fn chooser_best_option(
    menu: &OfferMenu,
    divider_values: &[f64],
    chooser_values: &[f64],
) -> MenuOption {
    let p = menu.base.p();
    // (option, chooser value, divider value, fixed-order rank)
    let mut options: Vec<(MenuOption, f64, f64, usize)> = Vec::with_capacity(
        menu.alternatives.len() + 2,
    );
    let pile2_c: f64 = chooser_values
        .iter()
        .zip(p)
        .map(|(&x, &pi)| x * (1.0 - pi))
        .sum();
    let pile1_d: f64 = divider_values.iter().zip(p).map(|(&g, &pi)| g * pi).sum();
    let pile1_c: f64 = chooser_values.iter().zip(p).map(|(&x, &pi)| x * pi).sum();
    let pile2_d: f64 = divider_values.iter().sum::<f64>() - pile1_d;
    options.push((MenuOption::Pile2, pile2_c, pile1_d, 0));
    for (k, a) in menu.alternatives.iter().enumerate() {
        let c: f64 = chooser_values
            .iter()
            .zip(a)
            .map(|(&x, &ai)| x * (1.0 - ai))
            .sum();
        let d: f64 = divider_values.iter().zip(a).map(|(&g, &ai)| g * ai).sum();
        options.push((MenuOption::Alt(k), c, d, 1 + k));
    }
    options.push((MenuOption::Pile1, pile1_c, pile2_d, menu.alternatives.len() + 1));

    let best_c = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    let mut winner: Option<&(MenuOption, f64, f64, usize)> = None;
    for o in options.iter().filter(|o| approx_ge(o.1, best_c)) {
        winner = Some(match winner {
            None => o,
            Some(w) => {
                if o.2 > w.2 + 1e-9 * o.2.abs().max(w.2.abs()).max(1.0) {
                    o
                } else if w.2 > o.2 + 1e-9 * o.2.abs().max(w.2.abs()).max(1.0) {
                    w
                } else if o.3 < w.3 {
                    o
                } else {
                    w
                }
            }
        });
    }
    winner.map(|o| o.0).unwrap_or(MenuOption::Pile2)
}

/// Exact expected (divider, chooser) utilities of a menu against a
/// finite-type prior.
pub fn eval_menu(
    menu: &OfferMenu,
    divider_values: &[f64],
    prior: &JointDiscretePrior,
) -> Result<(f64, f64)> {
    if prior.n() != menu.base.n() || divider_values.len() != menu.base.n() {
        return Err(Error::input("menu, divider, and prior dimensions differ"));
    }
    let p = menu.base.p();
    let total_d: f64 = divider_values.iter().sum();
    let mut du = 0.0;
    let mut cu = 0.0;
    for t in prior.types() {
        let (d, c) = match chooser_best_option(menu, divider_values, &t.values) {
            MenuOption::Pile1 => {
                let pile1_c: f64 = t.values.iter().zip(p).map(|(&x, &pi)| x * pi).sum();
                let pile1_d: f64 = divider_values.iter().zip(p).map(|(&g, &pi)| g * pi).sum();
                (total_d - pile1_d, pile1_c)
            }
            MenuOption::Pile2 => {
                let pile1_d: f64 = divider_values.iter().zip(p).map(|(&g, &pi)| g * pi).sum();
                let pile2_c: f64 = t
                    .values
                    .iter()
                    .zip(p)
                    .map(|(&x, &pi)| x * (1.0 - pi))
                    .sum();
                (pile1_d, pile2_c)
            }
            MenuOption::Alt(k) => {
                let a = &menu.alternatives[k];
                let d: f64 = divider_values.iter().zip(a).map(|(&g, &ai)| g * ai).sum();
                let c: f64 = t
                    .values
                    .iter()
                    .zip(a)
                    .map(|(&x, &ai)| x * (1.0 - ai))
                    .sum();
                (d, c)
            }
        };
        du += t.prob * d;
        cu += t.prob * c;
    }
    Ok((du, cu))
}

/// Enumerates assignments of chooser types to {even split} + groups (each
/// group shares one alternative), solving an incentive-constrained LP per
/// assignment and ranking menus by exact [`eval_menu`] value. The even base
/// is optimal in this game, so only the alternatives are searched.
pub fn solve_multiple_offers(
    divider_values: &[f64],
    prior: &JointDiscretePrior,
) -> Result<(OfferMenu, SolveReport)> {
    let n = divider_values.len();
    let l = prior.len();
    if n != prior.n() {
        return Err(Error::input("divider and prior dimensions differ"));
    }
    if l > 8 {
        return Err(Error::capacity(format!(
            "offer search enumerates type partitions; l = {l} exceeds 8"
        )));
    }
    if n > 6 {
        return Err(Error::capacity(format!(
            "offer search supports n <= 6, instance has {n}"
        )));
    }
    let types = prior.types();

    // slot[j] = usize::MAX for "stays at the even split", else group id in
    // restricted-growth form (group g appears before g+1).
    let mut assignments: Vec<Vec<usize>> = Vec::new();
    let mut slots = vec![usize::MAX; l];
    fn rec(j: usize, used: usize, slots: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if j == slots.len() {
            out.push(slots.clone());
            return;
        }
        slots[j] = usize::MAX;
        rec(j + 1, used, slots, out);
        for g in 0..=used {
            slots[j] = g;
            rec(j + 1, used.max(g + 1), slots, out);
        }
        slots[j] = usize::MAX;
    }
    rec(0, 0, &mut slots, &mut assignments);

    let even = Division::even(n);
    let mut best: Option<(f64, f64, OfferMenu)> = None;
    for slots in &assignments {
        let groups = slots
            .iter()
            .filter(|&&s| s != usize::MAX)
            .fold(0usize, |m, &s| m.max(s + 1));
        let menu = if groups == 0 {
            OfferMenu::new(even.clone(), vec![])?
        } else {
            // Variables: a_{g,i}, g = 0..groups.
            let nv = groups * n;
            let var = |g: usize, i: usize| g * n + i;
            let mut objective = vec![0.0; nv];
            for (j, &s) in slots.iter().enumerate() {
                if s != usize::MAX {
                    for i in 0..n {
                        objective[var(s, i)] += types[j].prob * divider_values[i];
                    }
                }
            }
            let mut constraints: Vec<(Vec<f64>, f64)> = Vec::new();
            for (j, &s) in slots.iter().enumerate() {
                let x = &types[j].values;
                let half: f64 = 0.5 * x.iter().sum::<f64>();
                if s == usize::MAX {
                    // Type j must weakly prefer the even split to every group.
                    for h in 0..groups {
                        let mut row = vec![0.0; nv];
                        for i in 0..n {
                            row[var(h, i)] = -x[i];
                        }
                        constraints.push((row, -half));
                    }
                } else {
                    // Assigned option beats the even split...
                    let mut row = vec![0.0; nv];
                    for i in 0..n {
                        row[var(s, i)] = x[i];
                    }
                    constraints.push((row, half));
                    // ...and every other group's option.
                    for h in 0..groups {
                        if h == s {
                            continue;
                        }
                        let mut row = vec![0.0; nv];
                        for i in 0..n {
                            row[var(s, i)] += x[i];
                            row[var(h, i)] -= x[i];
                        }
                        constraints.push((row, 0.0));
                    }
                }
            }
            let lp = LinearProgram {
                objective,
                lower: vec![0.0; nv],
                upper: vec![1.0; nv],
                constraints,
            };
            let Ok((_, mut a)) = solve_lp(&lp) else {
                continue; // infeasible assignment
            };
            repair_binding_rows(&mut a, &lp.constraints);
            for v in a.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
            let alternatives: Vec<Vec<f64>> =
                (0..groups).map(|g| a[g * n..(g + 1) * n].to_vec()).collect();
            OfferMenu::new(even.clone(), alternatives)?
        };
        let (du, cu) = eval_menu(&menu, divider_values, prior)?;
        let replace = match &best {
            None => true,
            // Divider-optimal; among equal menus favor the chooser (the
            // divider's indifference breaks toward the other player).
            Some((bd, bc, _)) => du > bd + 1e-12 || (du > bd - 1e-12 && cu > bc + 1e-12),
        };
        if replace {
            best = Some((du, cu, menu));
        }
    }

    let (du, cu, menu) = best.ok_or_else(|| Error::solver("no feasible menu assignment"))?;
    let p1 = types
        .iter()
        .filter(|t| {
            matches!(
                chooser_best_option(&menu, divider_values, &t.values),
                MenuOption::Pile1
            )
        })
        .map(|t| t.prob)
        .sum();
    let report = SolveReport {
        division: menu.base.clone(),
        pile1_probability: p1,
        divider_utility: du,
        chooser_utility: Some(cu),
        baseline_divider: baseline_divider(divider_values),
        method: None,
        gap_bound: Some(0.0),
    };
    Ok((menu, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::priors::{flatten_to_joint, Atom, ChooserType};
    use crate::solver_discrete::solve_discrete;

    /// Chooser prior of the indivisible-goods counterexample: good 1 worth 4
    /// surely, good 2 worth 1 or 12 with equal probability.
    fn counterexample_prior() -> Prior {
        Prior::discrete_per_good(vec![
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
        .unwrap()
    }

    fn uniform_12_squared() -> JointDiscretePrior {
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
        flatten_to_joint(&goods, 64).unwrap()
    }

    #[test]
    fn neutral_profile_reduces_to_exact_eval() {
        let g = [3.0, 1.0, 2.0];
        let prior = Prior::normal_iid(3, 1.0, 0.4).unwrap();
        let instance = Instance::new(g.to_vec(), prior.clone()).unwrap();
        let division = Division::new(vec![0.9, 0.2, 0.5]).unwrap();
        let u = risk_utility_divisible(&g, &division, &prior, &RiskProfile::Neutral).unwrap();
        let report = oracle::exact_eval(&instance, &division).unwrap();
        assert!((u - report.divider_utility).abs() < 1e-12);
    }

    #[test]
    fn lottery_counterexample_values() {
        let g = [4.0, 16.0];
        let prior = counterexample_prior();
        let f = RiskProfile::sqrt();

        let two_thirds = Division::new(vec![0.0, 2.0 / 3.0]).unwrap();
        let u = risk_utility_lottery(&g, &two_thirds, &prior, &f).unwrap();
        assert!((u - 8.0 / 3.0).abs() < 1e-12, "u = {u}");

        let separate = Division::new(vec![0.0, 1.0]).unwrap();
        let u_sep = risk_utility_lottery(&g, &separate, &prior, &f).unwrap();
        assert!((u_sep - 3.0).abs() < 1e-12, "u = {u_sep}");
        assert!(u_sep > u);

        // Divisible reading disagrees: the fractional division wins there.
        let d = risk_utility_divisible(&g, &two_thirds, &prior, &f).unwrap();
        assert!((d - (32.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let d_sep = risk_utility_divisible(&g, &separate, &prior, &f).unwrap();
        assert!(d > d_sep, "divisible: {d} vs {d_sep}");
    }

    #[test]
    fn deterministic_division_lottery_equals_divisible() {
        let g = [2.0, 5.0, 1.0];
        let prior = Prior::normal_iid(3, 2.0, 0.5).unwrap();
        let f = RiskProfile::sqrt();
        let division = Division::new(vec![1.0, 0.0, 1.0]).unwrap();
        let a = risk_utility_lottery(&g, &division, &prior, &f).unwrap();
        let b = risk_utility_divisible(&g, &division, &prior, &f).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn risk_neutral_grid_matches_oracle() {
        let instance = Instance::new(
            vec![2.0, 1.0],
            Prior::two_point_iid(2, 1.0, 0.5, 2.0).unwrap(),
        )
        .unwrap();
        let risk = solve_risk_averse(
            &instance,
            &RiskProfile::Neutral,
            RiskInterpretation::Divisible,
            0.05,
        )
        .unwrap();
        let grid = oracle::grid_best_response(&instance, 0.05).unwrap();
        // The oracle scans both labelings; the risk grid scans the canonical
        // half. Divisions agree up to pile renaming, utilities exactly.
        let mirrored: Vec<f64> = grid.division.p().iter().map(|&p| 1.0 - p).collect();
        assert!(
            risk.division == grid.division || risk.division.p() == mirrored.as_slice(),
            "{:?} vs {:?}",
            risk.division,
            grid.division
        );
        assert!((risk.divider_utility - grid.divider_utility).abs() < 1e-12);
    }

    #[test]
    fn risk_aversion_lowers_pile1_probability() {
        let prior = Prior::normal(vec![
            crate::priors::NormalMarginal {
                mean: 1.0,
                stdev: 0.2,
            },
            crate::priors::NormalMarginal {
                mean: 2.0,
                stdev: 0.2,
            },
        ])
        .unwrap();
        let instance = Instance::new(vec![3.0, 1.0], prior).unwrap();
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
        assert!(
            averse.pile1_probability <= neutral.pile1_probability + 1e-9,
            "RA {} vs RN {}",
            averse.pile1_probability,
            neutral.pile1_probability
        );
    }

    #[test]
    fn lottery_grid_respects_counterexample() {
        // No P = 0 division beats 8/3 by more than the grid bound, while the
        // separate-piles division reaches 3.
        let g = [4.0, 16.0];
        let instance = Instance::new(g.to_vec(), counterexample_prior()).unwrap();
        let report = solve_risk_averse(
            &instance,
            &RiskProfile::sqrt(),
            RiskInterpretation::Lottery,
            0.01,
        )
        .unwrap();
        assert!(report.divider_utility >= 3.0 - 1e-12, "{}", report.divider_utility);

        // Scan P = 0 cells directly.
        let mut best_p0 = f64::NEG_INFINITY;
        let per_axis = 201;
        for i in 0..per_axis {
            for j in 0..per_axis {
                let q = [
                    -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64,
                    -1.0 + 2.0 * j as f64 / (per_axis - 1) as f64,
                ];
                let p1 = priors::pile1_probability(instance.prior(), &q)
                    .unwrap()
                    .value;
                if p1 == 0.0 {
                    let division = Division::from_q(&q).unwrap();
                    let u = risk_utility_lottery(
                        &g,
                        &division,
                        instance.prior(),
                        &RiskProfile::sqrt(),
                    )
                    .unwrap();
                    best_p0 = best_p0.max(u);
                }
            }
        }
        let bound = oracle::grid_gap_bound(&g, 0.01);
        assert!(
            best_p0 <= 8.0 / 3.0 + bound,
            "P=0 max {best_p0} vs 8/3 + {bound}"
        );
    }

    #[test]
    fn concavity_guard_rejects_convex_profiles() {
        // exponent > 1 is convex; the validator refuses it outright.
        let f = RiskProfile::Power { exponent: 1.5 };
        assert!(f.check_concave_on(0.0, 10.0, 3).is_err());
        assert!(RiskProfile::sqrt().check_concave_on(0.0, 10.0, 3).is_ok());
        // Domain violation: sqrt(v - 5) with piles reaching below 5.
        let f = RiskProfile::SqrtShifted { shift: 5.0 };
        assert!(f.check_concave_on(0.0, 10.0, 3).is_err());
    }

    #[test]
    fn chooser_best_option_tie_goes_to_divider_best() {
        let menu = OfferMenu::new(Division::even(2), vec![vec![0.25, 1.0]]).unwrap();
        // Chooser (2,1): alt gives 0.75*2 = 1.5 = even split value; divider
        // (1,1) prefers the alt (1.25 > 1).
        let pick = chooser_best_option(&menu, &[1.0, 1.0], &[2.0, 1.0]);
        assert_eq!(pick, MenuOption::Alt(0));

        // Empty menu reduces to the base game's pile choice.
        let menu = OfferMenu::new(Division::new(vec![1.0, 0.0]).unwrap(), vec![]).unwrap();
        assert_eq!(
            chooser_best_option(&menu, &[2.0, 1.0], &[1.0, 2.0]),
            MenuOption::Pile2
        );
        assert_eq!(
            chooser_best_option(&menu, &[2.0, 1.0], &[2.0, 1.0]),
            MenuOption::Pile1
        );
        // Exact tie between identical piles resolves to the canonical order.
        let menu = OfferMenu::new(Division::even(2), vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(
            chooser_best_option(&menu, &[1.0, 1.0], &[1.0, 1.0]),
            MenuOption::Pile2
        );
    }

    #[test]
    fn eval_menu_empty_equals_exact_eval() {
        let prior = uniform_12_squared();
        let division = Division::new(vec![1.0, 0.0]).unwrap();
        let menu = OfferMenu::new(division.clone(), vec![]).unwrap();
        let (du, cu) = eval_menu(&menu, &[2.0, 1.0], &prior).unwrap();
        let instance =
            Instance::new(vec![2.0, 1.0], Prior::JointDiscrete(prior)).unwrap();
        let report = oracle::exact_eval(&instance, &division).unwrap();
        assert!((du - report.divider_utility).abs() < 1e-12);
        assert!((cu - report.chooser_utility.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn paper_menu_values() {
        // Different divider values: even base + {(1,0)} gives 1.875 / 1.625.
        let prior = uniform_12_squared();
        let menu = OfferMenu::new(Division::even(2), vec![vec![1.0, 0.0]]).unwrap();
        let (du, cu) = eval_menu(&menu, &[2.0, 1.0], &prior).unwrap();
        assert!((du - 1.875).abs() < 1e-12);
        assert!((cu - 1.625).abs() < 1e-12);

        // Equal divider values: even base + 0.75-of-either-good offers.
        let menu = OfferMenu::new(
            Division::even(2),
            vec![vec![0.25, 1.0], vec![1.0, 0.25]],
        )
        .unwrap();
        let (du, cu) = eval_menu(&menu, &[1.0, 1.0], &prior).unwrap();
        assert!((du - 1.125).abs() < 1e-12, "du = {du}");
        assert!((cu - 1.5).abs() < 1e-12, "cu = {cu}");
        let (du2, _) = eval_menu(&menu2x(), &[2.0, 2.0], &prior).unwrap();
        assert!((du2 - 2.25).abs() < 1e-12);
        // Ex-ante over the two equal-value draws: 1.6875.
        assert!(((du + du2) / 2.0 - 1.6875).abs() < 1e-12);

        fn menu2x() -> OfferMenu {
            OfferMenu::new(
                Division::even(2),
                vec![vec![0.25, 1.0], vec![1.0, 0.25]],
            )
            .unwrap()
        }
    }

    #[test]
    fn offer_search_reproduces_paper_values() {
        let prior = uniform_12_squared();
        let (_, report) = solve_multiple_offers(&[2.0, 1.0], &prior).unwrap();
        assert!(
            (report.divider_utility - 1.875).abs() < 1e-9,
            "du = {}",
            report.divider_utility
        );
        assert!(
            (report.chooser_utility.unwrap() - 1.625).abs() < 1e-9,
            "cu = {:?}",
            report.chooser_utility
        );

        let (_, r1) = solve_multiple_offers(&[1.0, 1.0], &prior).unwrap();
        let (_, r2) = solve_multiple_offers(&[2.0, 2.0], &prior).unwrap();
        let du = (r1.divider_utility + r2.divider_utility) / 2.0;
        let cu = (r1.chooser_utility.unwrap() + r2.chooser_utility.unwrap()) / 2.0;
        assert!((du - 1.6875).abs() < 1e-9, "ex-ante divider {du}");
        assert!((cu - 1.5).abs() < 1e-9, "ex-ante chooser {cu}");
    }

    #[test]
    fn offers_dominate_single_division_game() {
        // Known type: the menu cannot beat (or trail) the one-shot optimum.
        let prior = JointDiscretePrior::new(vec![ChooserType {
            values: vec![1.0, 2.0],
            prob: 1.0,
        }])
        .unwrap();
        let (_, offers) = solve_multiple_offers(&[2.0, 1.0], &prior).unwrap();
        let single = solve_discrete(&[2.0, 1.0], &prior).unwrap();
        assert!((offers.divider_utility - single.divider_utility).abs() < 1e-9);

        // And on the four-type instance the menu weakly improves.
        let prior = uniform_12_squared();
        let (_, offers) = solve_multiple_offers(&[2.0, 1.0], &prior).unwrap();
        let single = solve_discrete(&[2.0, 1.0], &prior).unwrap();
        assert!(offers.divider_utility >= single.divider_utility - 1e-9);
    }
}
