//! Exact solver for finite-type priors, plus the dense LP it runs on.
//!
//! For a prior supported on types `x_1..x_l` with probabilities `r_j`, guess
//! the set `S` of types that will pick pile 1 (so `P = sum_{j in S} r_j`,
//! kept `<= 1/2`), and maximize the divider's proxy objective subject to all
//! other types preferring pile 2 (`x_j . q <= 0`). That is one LP per subset;
//! with `l` types there are `2^l` of them, so the cap on `l` matters.
//!
//! The proxy assumes types in `S` actually take pile 1, which can only
//! understate a division's worth; every LP solution is therefore re-scored at
//! its exact utility under true chooser behavior before ranking. The winner
//! over all subsets is exactly optimal (the true optimum's pick-pile-1 set is
//! some subset, and on that iteration its division is feasible).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    baseline_divider, expected_divider_utility, Division, SolveMethod, SolveReport,
};
use crate::priors::{self, JointDiscretePrior, Prior};

/// Default cap on the number of chooser types (2^22 subsets).
pub const DEFAULT_TYPE_CAP: usize = 22;

/// A small dense linear program: maximize `objective . x` subject to
/// `lower <= x <= upper` and `row . x <= rhs` per constraint.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<(Vec<f64>, f64)>,
}

const LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

/// Two-phase dense simplex with Bland's rule (deterministic, cycle-free).
/// The box bounds guarantee a bounded feasible region; infeasibility is an
/// error.
pub fn solve_lp(lp: &LinearProgram) -> Result<(f64, Vec<f64>)> {
    let n = lp.objective.len();
    if lp.lower.len() != n || lp.upper.len() != n {
        return Err(Error::input("LP bound dimensions differ from objective"));
    }
    for i in 0..n {
        if !(lp.lower[i].is_finite() && lp.upper[i].is_finite() && lp.lower[i] <= lp.upper[i]) {
            return Err(Error::input(format!(
                "LP box on variable {i} is invalid: [{}, {}]",
                lp.lower[i], lp.upper[i]
            )));
        }
    }
    for (row, _) in &lp.constraints {
        if row.len() != n {
            return Err(Error::input("LP constraint row has wrong arity"));
        }
    }

    // Shift to y = x - lower >= 0; upper bounds become explicit rows.
    let k = lp.constraints.len();
    let m = k + n;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for (row, b) in &lp.constraints {
        let shift: f64 = row.iter().zip(&lp.lower).map(|(&a, &l)| a * l).sum();
        rows.push(row.clone());
        rhs.push(b - shift);
    }
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        rows.push(row);
        rhs.push(lp.upper[i] - lp.lower[i]);
    }

    // Tableau columns: y (n) | slacks (m) | artificials (as needed) | rhs.
    let mut art_cols: Vec<usize> = Vec::new();
    let mut need_art = vec![false; m];
    for (j, r) in rhs.iter().enumerate() {
        if *r < 0.0 {
            need_art[j] = true;
        }
    }
    let n_art = need_art.iter().filter(|&&b| b).count();
    let width = n + m + n_art + 1;
    let mut t = vec![vec![0.0f64; width]; m];
    let mut basis = vec![0usize; m];
    {
        let mut next_art = n + m;
        for j in 0..m {
            let sign = if need_art[j] { -1.0 } else { 1.0 };
            for i in 0..n {
                t[j][i] = sign * rows[j][i];
            }
            t[j][n + j] = sign;
            t[j][width - 1] = sign * rhs[j];
            if need_art[j] {
                t[j][next_art] = 1.0;
                basis[j] = next_art;
                art_cols.push(next_art);
                next_art += 1;
            } else {
                basis[j] = n + j;
            }
        }
    }

    // One simplex phase: maximize obj over the current tableau.
    let run = |t: &mut Vec<Vec<f64>>,
               basis: &mut Vec<usize>,
               obj: &mut Vec<f64>,
               obj_val: &mut f64,
               ncols: usize|
     -> Result<()> {
        for _ in 0..200_000 {
            // Bland: entering = lowest-index column with positive reduced cost.
            let mut enter = None;
            for (idx, &c) in obj.iter().enumerate().take(ncols) {
                if c > LP_TOL {
                    enter = Some(idx);
                    break;
                }
            }
            let Some(e) = enter else { return Ok(()) };
            // Ratio test; ties to the lowest basis index (Bland).
            let mut leave: Option<(usize, f64)> = None;
            for (j, row) in t.iter().enumerate() {
                if row[e] > PIVOT_TOL {
                    let ratio = row[width - 1] / row[e];
                    match leave {
                        None => leave = Some((j, ratio)),
                        Some((jb, rb)) => {
                            if ratio < rb - PIVOT_TOL
                                || (ratio < rb + PIVOT_TOL && basis[j] < basis[jb])
                            {
                                leave = Some((j, ratio));
                            }
                        }
                    }
                }
            }
            let Some((l, _)) = leave else {
                return Err(Error::solver("LP unbounded despite box bounds"));
            };
            // Pivot.
            let piv = t[l][e];
            for v in t[l].iter_mut() {
                *v /= piv;
            }
            for j in 0..t.len() {
                if j != l && t[j][e].abs() > 0.0 {
                    let f = t[j][e];
                    for i in 0..width {
                        t[j][i] -= f * t[l][i];
                    }
                }
            }
            let f = obj[e];
            if f.abs() > 0.0 {
                for i in 0..ncols {
                    obj[i] -= f * t[l][i];
                }
                *obj_val += f * t[l][width - 1];
            }
            basis[l] = e;
        }
        Err(Error::solver("LP iteration budget exhausted"))
    };

    if n_art > 0 {
        // Phase 1: maximize -sum(artificials).
        let mut obj = vec![0.0f64; width - 1];
        let mut obj_val = 0.0f64;
        for &c in &art_cols {
            obj[c] = -1.0;
        }
        // Price out basic artificials (cost -1 each).
        for (j, &b) in basis.iter().enumerate() {
            if art_cols.contains(&b) {
                for i in 0..width - 1 {
                    obj[i] += t[j][i];
                }
                obj_val -= t[j][width - 1];
            }
        }
        run(&mut t, &mut basis, &mut obj, &mut obj_val, width - 1)?;
        if obj_val < -1e-7 {
            return Err(Error::input("LP infeasible"));
        }
        // Kick any artificial still sitting in the basis (at zero level).
        for j in 0..m {
            if art_cols.contains(&basis[j]) {
                let mut swapped = false;
                for i in 0..n + m {
                    if t[j][i].abs() > PIVOT_TOL {
                        let piv = t[j][i];
                        for v in t[j].iter_mut() {
                            *v /= piv;
                        }
                        for jj in 0..m {
                            if jj != j && t[jj][i].abs() > 0.0 {
                                let f = t[jj][i];
                                for ii in 0..width {
                                    t[jj][ii] -= f * t[j][ii];
                                }
                            }
                        }
                        basis[j] = i;
                        swapped = true;
                        break;
                    }
                }
                if !swapped {
                    // Redundant row; zero it out.
                    for v in t[j].iter_mut() {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    // Phase 2 on the structural objective (in shifted variables). Artificial
    // columns are out of the basis by now; a large negative cost keeps them out.
    let mut obj = vec![0.0f64; width - 1];
    let mut obj_val: f64 = lp
        .objective
        .iter()
        .zip(&lp.lower)
        .map(|(&c, &l)| c * l)
        .sum();
    for i in 0..n {
        obj[i] = lp.objective[i];
    }
    for &c in &art_cols {
        obj[c] = -1e30;
    }
    // Price out the basis.
    for (j, &b) in basis.iter().enumerate() {
        if b < n && obj[b].abs() > 0.0 {
            let f = obj[b];
            for i in 0..width - 1 {
                obj[i] -= f * t[j][i];
            }
            obj[b] = 0.0;
            obj_val += f * t[j][width - 1];
        }
    }
    run(&mut t, &mut basis, &mut obj, &mut obj_val, n + m)?;

    // Read out the solution.
    let mut y = vec![0.0f64; n];
    for (j, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[j][width - 1];
        }
    }
    let x: Vec<f64> = (0..n)
        .map(|i| (lp.lower[i] + y[i]).clamp(lp.lower[i], lp.upper[i]))
        .collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(&c, &xi)| c * xi).sum();
    Ok((value, x))
}

/// Pushes constraints the simplex left at `+epsilon` back onto the feasible
/// side. The exact re-scorer uses strict inequalities, so a binding
/// `x_j . q <= 0` row that rounds to 1e-16 would otherwise flip type `j`
/// from pile 2 to pile 1 and tank the candidate.
pub(crate) fn repair_binding_rows(q: &mut [f64], rows: &[(Vec<f64>, f64)]) {
    for _ in 0..12 {
        let mut dirty = false;
        for (x, b) in rows {
            let dot: f64 = x.iter().zip(q.iter()).map(|(&xi, &qi)| xi * qi).sum();
            let scale: f64 = x.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
            let excess = dot - b;
            if excess > 0.0 && excess <= 1e-7 * scale {
                let nrm2: f64 = x.iter().map(|v| v * v).sum();
                let step = (excess + 1e-13 * scale) / nrm2;
                for (qi, &xi) in q.iter_mut().zip(x) {
                    *qi -= step * xi;
                }
                dirty = true;
            }
        }
        for qi in q.iter_mut() {
            *qi = qi.clamp(-1.0, 1.0);
        }
        if !dirty {
            break;
        }
    }
}

/// Exactly optimal division against a finite-type prior, by subset
/// enumeration with one LP per guessed pick-pile-1 set.
pub fn solve_discrete(divider_values: &[f64], prior: &JointDiscretePrior) -> Result<SolveReport> {
    solve_discrete_capped(divider_values, prior, DEFAULT_TYPE_CAP)
}

pub fn solve_discrete_capped(
    divider_values: &[f64],
    prior: &JointDiscretePrior,
    type_cap: usize,
) -> Result<SolveReport> {
    let n = divider_values.len();
    if n != prior.n() {
        return Err(Error::input(format!(
            "divider has {n} values, prior describes {} goods",
            prior.n()
        )));
    }
    if divider_values.iter().all(|&g| g == 0.0) {
        return Err(Error::input("divider values must be not all zero"));
    }
    let l = prior.len();
    if l > type_cap {
        return Err(Error::capacity(format!(
            "prior has {l} types, cap is {type_cap} (2^{type_cap} subsets); \
             consider the grid oracle instead"
        )));
    }
    let g = divider_values;
    let base = baseline_divider(g);
    let types = prior.types();

    let candidates: Vec<Option<(f64, f64, Vec<f64>)>> = (0u64..(1u64 << l))
        .into_par_iter()
        .map(|mask| {
            let p_cap: f64 = (0..l)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| types[j].prob)
                .sum();
            if p_cap > 0.5 + 1e-12 {
                return None;
            }
            let constraints: Vec<(Vec<f64>, f64)> = (0..l)
                .filter(|j| mask >> j & 1 == 0)
                .map(|j| (types[j].values.clone(), 0.0))
                .collect();
            let lp = LinearProgram {
                objective: g.to_vec(),
                lower: vec![-1.0; n],
                upper: vec![1.0; n],
                constraints,
            };
            let (_, mut q) = solve_lp(&lp).ok()?;
            repair_binding_rows(&mut q, &lp.constraints);
            // Exact utility under true chooser behavior (ties to pile 2).
            let mut p1 = 0.0;
            for t in types {
                let dot: f64 = t.values.iter().zip(&q).map(|(&v, &qi)| v * qi).sum();
                if dot > 0.0 {
                    p1 += t.prob;
                }
            }
            let u = expected_divider_utility(g, &q, p1).ok()?;
            Some((u, p1, q))
        })
        .collect();

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for cand in candidates.into_iter().flatten() {
        match &best {
            None => best = Some(cand),
            Some(b) => {
                if crate::oracle::better(cand.0, cand.1, &cand.2, b.0, b.1, &b.2) {
                    best = Some(cand);
                }
            }
        }
    }
    let (utility, p1, q) = best.ok_or_else(|| Error::solver("no subset produced a candidate"))?;
    let division = Division::from_q(&q)?;
    let chooser =
        priors::chooser_expected_utility(&Prior::JointDiscrete(prior.clone()), &division)?;
    let _ = base;
    Ok(SolveReport {
        division,
        pile1_probability: p1,
        divider_utility: utility,
        chooser_utility: Some(chooser.value),
        baseline_divider: base,
        method: Some(SolveMethod::DiscreteExact),
        gap_bound: Some(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonicalize;
    use crate::oracle;
    use crate::priors::{flatten_to_joint, Atom, ChooserType};
    use rand::Rng;

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
    fn lp_examples() {
        let lp = LinearProgram {
            objective: vec![1.0],
            lower: vec![-1.0],
            upper: vec![1.0],
            constraints: vec![],
        };
        let (v, x) = solve_lp(&lp).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9);

        let lp = LinearProgram {
            objective: vec![2.0, 1.0],
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
            constraints: vec![(vec![1.0, 2.0], 0.0)],
        };
        let (v, x) = solve_lp(&lp).unwrap();
        assert!((v - 1.5).abs() < 1e-9, "v = {v}");
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] + 0.5).abs() < 1e-9, "x = {x:?}");

        // Degenerate objective: any vertex, value 0.
        let lp = LinearProgram {
            objective: vec![0.0, 0.0],
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
            constraints: vec![],
        };
        let (v, x) = solve_lp(&lp).unwrap();
        assert_eq!(v, 0.0);
        assert!(x.iter().all(|&xi| (-1.0..=1.0).contains(&xi)));
    }

    #[test]
    fn lp_phase_one_negative_rhs() {
        // x >= 0.5 written as -x <= -0.5; maximize -x.
        let lp = LinearProgram {
            objective: vec![-1.0],
            lower: vec![-1.0],
            upper: vec![1.0],
            constraints: vec![(vec![-1.0], -0.5)],
        };
        let (v, x) = solve_lp(&lp).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!((v + 0.5).abs() < 1e-9);

        // Infeasible: x <= -0.5 and x >= 0.5.
        let lp = LinearProgram {
            objective: vec![1.0],
            lower: vec![-1.0],
            upper: vec![1.0],
            constraints: vec![(vec![-1.0], -0.5), (vec![1.0], -0.5)],
        };
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn lp_random_vertex_enumeration_oracle() {
        // 2-variable LPs against exhaustive vertex enumeration.
        let mut rng = crate::mc::substream(33, 0);
        for trial in 0..200 {
            let c = [
                rng.random::<f64>() * 4.0 - 2.0,
                rng.random::<f64>() * 4.0 - 2.0,
            ];
            let k = (rng.random::<u64>() % 3) as usize;
            let rows: Vec<(Vec<f64>, f64)> = (0..k)
                .map(|_| {
                    (
                        vec![
                            rng.random::<f64>() * 4.0 - 2.0,
                            rng.random::<f64>() * 4.0 - 2.0,
                        ],
                        rng.random::<f64>() * 2.0,
                    )
                })
                .collect();
            let lp = LinearProgram {
                objective: c.to_vec(),
                lower: vec![-1.0, -1.0],
                upper: vec![1.0, 1.0],
                constraints: rows.clone(),
            };
            let (v, x) = solve_lp(&lp).unwrap();
            for (row, b) in &rows {
                assert!(row[0] * x[0] + row[1] * x[1] <= b + 1e-7, "trial {trial}");
            }
            // Vertex oracle: intersect all pairs of active lines (including box).
            let mut lines: Vec<(f64, f64, f64)> = vec![
                (1.0, 0.0, 1.0),
                (-1.0, 0.0, 1.0),
                (0.0, 1.0, 1.0),
                (0.0, -1.0, 1.0),
            ];
            for (row, b) in &rows {
                lines.push((row[0], row[1], *b));
            }
            let mut best = f64::NEG_INFINITY;
            for i in 0..lines.len() {
                for j in (i + 1)..lines.len() {
                    let (a1, b1, c1) = lines[i];
                    let (a2, b2, c2) = lines[j];
                    let det = a1 * b2 - a2 * b1;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x0 = (c1 * b2 - c2 * b1) / det;
                    let y0 = (a1 * c2 - a2 * c1) / det;
                    let feasible = x0 >= -1.0 - 1e-9
                        && x0 <= 1.0 + 1e-9
                        && y0 >= -1.0 - 1e-9
                        && y0 <= 1.0 + 1e-9
                        && rows
                            .iter()
                            .all(|(r, b)| r[0] * x0 + r[1] * y0 <= b + 1e-9);
                    if feasible {
                        best = best.max(c[0] * x0 + c[1] * y0);
                    }
                }
            }
            if best.is_finite() {
                assert!(
                    (v - best).abs() < 1e-7,
                    "trial {trial}: simplex {v} vs vertices {best}"
                );
            }
        }
    }

    #[test]
    fn four_type_instance_is_exact() {
        let report = solve_discrete(&[2.0, 1.0], &uniform_12_squared()).unwrap();
        assert!((report.divider_utility - 1.75).abs() < 1e-9);
        assert!((report.pile1_probability - 0.25).abs() < 1e-9);
        let p = report.division.p();
        assert!((p[0] - 1.0).abs() < 1e-9 && p[1].abs() < 1e-9, "p = {p:?}");
        assert_eq!(report.gap_bound, Some(0.0));
    }

    #[test]
    fn known_preferences_single_type() {
        let prior = JointDiscretePrior::new(vec![ChooserType {
            values: vec![1.0, 2.0],
            prob: 1.0,
        }])
        .unwrap();
        let report = solve_discrete(&[2.0, 1.0], &prior).unwrap();
        assert!((report.divider_utility - 2.25).abs() < 1e-9);
        assert!(report.pile1_probability.abs() < 1e-12);
        let q = report.division.q();
        assert!((q[0] - 1.0).abs() < 1e-9 && (q[1] + 0.5).abs() < 1e-9, "q = {q:?}");

        let prior = JointDiscretePrior::new(vec![ChooserType {
            values: vec![1.0, 1.0],
            prob: 1.0,
        }])
        .unwrap();
        let report = solve_discrete(&[1.0, 1.0], &prior).unwrap();
        assert!((report.divider_utility - 1.0).abs() < 1e-9);
    }

    #[test]
    fn known_preferences_matches_greedy_ratio_rule() {
        // With one type and positive values, the optimum is the classic
        // construction: fill pile 1 by descending g_i / x_i until the chooser
        // is indifferent, splitting at most one good.
        let mut rng = crate::mc::substream(55, 0);
        for _ in 0..50 {
            let n = 2 + (rng.random::<u64>() % 3) as usize;
            let g: Vec<f64> = (0..n).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
            let x: Vec<f64> = (0..n).map(|_| 0.2 + 2.0 * rng.random::<f64>()).collect();
            let prior = JointDiscretePrior::new(vec![ChooserType {
                values: x.clone(),
                prob: 1.0,
            }])
            .unwrap();
            let report = solve_discrete(&g, &prior).unwrap();

            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| (g[b] / x[b]).partial_cmp(&(g[a] / x[a])).unwrap());
            let mut q = vec![-1.0; n];
            let mut slack: f64 = x.iter().sum();
            for &i in &order {
                let take = (slack / x[i]).min(2.0);
                q[i] += take;
                slack -= take * x[i];
                if slack <= 1e-12 {
                    break;
                }
            }
            let greedy_u: f64 =
                baseline_divider(&g) + 0.5 * q.iter().zip(&g).map(|(&qi, &gi)| qi * gi).sum::<f64>();
            assert!(
                (report.divider_utility - greedy_u).abs() < 1e-7,
                "solver {} vs greedy {greedy_u}",
                report.divider_utility
            );
        }
    }

    #[test]
    fn matches_grid_oracle_small() {
        let mut rng = crate::mc::substream(71, 0);
        for trial in 0..25 {
            let n = 1 + (rng.random::<u64>() % 2) as usize;
            let l = 2 + (rng.random::<u64>() % 3) as usize;
            let g: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
            let mut probs: Vec<f64> = (0..l).map(|_| 0.05 + rng.random::<f64>()).collect();
            let total: f64 = probs.iter().sum();
            for p in probs.iter_mut() {
                *p /= total;
            }
            let head: f64 = probs[..l - 1].iter().sum();
            probs[l - 1] = 1.0 - head;
            let types: Vec<ChooserType> = (0..l)
                .map(|j| ChooserType {
                    values: (0..n)
                        .map(|i| 0.1 + rng.random::<f64>() + (i + j) as f64 * 0.01)
                        .collect(),
                    prob: probs[j],
                })
                .collect();
            let Ok(prior) = JointDiscretePrior::new(types) else {
                continue;
            };
            let report = solve_discrete(&g, &prior).unwrap();
            let instance =
                crate::model::Instance::new(g.clone(), Prior::JointDiscrete(prior)).unwrap();
            let grid = oracle::grid_best_response(&instance, 0.01).unwrap();
            let bound = grid.gap_bound.unwrap();
            assert!(
                report.divider_utility >= grid.divider_utility - 1e-9,
                "trial {trial}: exact below grid"
            );
            assert!(
                report.divider_utility <= grid.divider_utility + bound,
                "trial {trial}: exact {} vs grid {} + {bound}",
                report.divider_utility,
                grid.divider_utility
            );
            // Proportionality floor and canonical probability.
            assert!(report.divider_utility >= report.baseline_divider - 1e-9);
            let canon = canonicalize(&report.division, &g);
            let p1 = priors::pile1_probability(
                instance.prior(),
                &canon.q(),
            )
            .unwrap()
            .value;
            assert!(p1 <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn type_cap_is_enforced() {
        let types: Vec<ChooserType> = (0..24)
            .map(|j| ChooserType {
                values: vec![j as f64 + 1.0],
                prob: 1.0 / 24.0,
            })
            .collect();
        // Fix rounding so probabilities sum to exactly one.
        let mut types = types;
        let head: f64 = types[..23].iter().map(|t| t.prob).sum();
        types[23].prob = 1.0 - head;
        let prior = JointDiscretePrior::new(types).unwrap();
        assert!(matches!(
            solve_discrete(&[1.0], &prior),
            Err(Error::Capacity(_))
        ));
    }
}
