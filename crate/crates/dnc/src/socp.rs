//! Feasible-start barrier solver for the cone subproblems of the normal-prior
//! sweep:
//!
//! maximize c.q  subject to  lo <= q <= hi  and  axis.q >= ||W q||_2,
//!
//! with W a nonnegative diagonal. The cone constraint is handled through the
//! standard self-concordant barrier -ln((axis.q)^2 - ||Wq||^2) restricted to
//! the half where axis.q > 0; the box contributes the usual log barriers.
//! Newton centering with an exact feasible-step line search drives the
//! duality gap below the requested tolerance (gap <= nu/theta with
//! nu = 2n + 2), so the returned objective carries a certificate.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ConeProgram {
    /// Objective coefficients (maximized).
    pub objective: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Cone axis: constraint is axis.q >= ||W q||.
    pub axis: Vec<f64>,
    /// Diagonal of W, entrywise >= 0 (zero entries drop a coordinate from the norm).
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConeSolution {
    pub q: Vec<f64>,
    pub objective: f64,
    /// Certified bound on (true optimum - objective) when converged.
    pub gap: f64,
    pub converged: bool,
}

/// psi(q) = (axis.q)^2 - ||Wq||^2, the cone barrier argument; also axis.q.
fn psi(prog: &ConeProgram, q: &[f64]) -> (f64, f64) {
    let vq: f64 = prog.axis.iter().zip(q).map(|(&v, &qi)| v * qi).sum();
    let wq2: f64 = prog
        .weights
        .iter()
        .zip(q)
        .map(|(&w, &qi)| (w * qi).powi(2))
        .sum();
    (vq * vq - wq2, vq)
}

/// Residual of the cone constraint, positive when violated.
pub fn cone_violation(prog: &ConeProgram, q: &[f64]) -> f64 {
    let vq: f64 = prog.axis.iter().zip(q).map(|(&v, &qi)| v * qi).sum();
    let wq: f64 = prog
        .weights
        .iter()
        .zip(q)
        .map(|(&w, &qi)| (w * qi).powi(2))
        .sum::<f64>()
        .sqrt();
    wq - vq
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Dense Cholesky solve of H x = b; H is overwritten. None if H is not
/// (numerically) positive definite.
fn cholesky_solve(h: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let mut d = h[j][j];
        for k in 0..j {
            d -= h[j][k] * h[j][k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        h[j][j] = d;
        for i in (j + 1)..n {
            let mut s = h[i][j];
            for k in 0..j {
                s -= h[i][k] * h[j][k];
            }
            h[i][j] = s / d;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] = x[i] - h[i][k] * x[k];
        }
        x[i] /= h[i][i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] = x[i] - h[k][i] * x[k];
        }
        x[i] /= h[i][i];
    }
    Some(x)
}

struct BarrierState<'a> {
    prog: &'a ConeProgram,
    theta: f64,
}

impl BarrierState<'_> {
    fn value(&self, q: &[f64]) -> f64 {
        let p = self.prog;
        let (ps, vq) = psi(p, q);
        if ps <= 0.0 || vq <= 0.0 {
            return f64::INFINITY;
        }
        let mut f = -self.theta * dot(&p.objective, q) - ps.ln();
        for i in 0..q.len() {
            let a = p.hi[i] - q[i];
            let b = q[i] - p.lo[i];
            if a <= 0.0 || b <= 0.0 {
                return f64::INFINITY;
            }
            f -= a.ln() + b.ln();
        }
        f
    }

    fn grad_hess(&self, q: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let p = self.prog;
        let n = q.len();
        let (ps, vq) = psi(p, q);
        // grad psi = 2 vq * axis - 2 W^2 q
        let gpsi: Vec<f64> = (0..n)
            .map(|i| 2.0 * vq * p.axis[i] - 2.0 * p.weights[i] * p.weights[i] * q[i])
            .collect();
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            let a = p.hi[i] - q[i];
            let b = q[i] - p.lo[i];
            g[i] = -self.theta * p.objective[i] - gpsi[i] / ps + 1.0 / a - 1.0 / b;
            h[i][i] += 1.0 / (a * a) + 1.0 / (b * b);
            h[i][i] += 2.0 * p.weights[i] * p.weights[i] / ps;
        }
        for i in 0..n {
            for j in 0..n {
                h[i][j] += gpsi[i] * gpsi[j] / (ps * ps) - 2.0 * p.axis[i] * p.axis[j] / ps;
            }
        }
        (g, h)
    }

    /// Largest step alpha keeping q + alpha d strictly inside the domain.
    fn max_step(&self, q: &[f64], d: &[f64]) -> f64 {
        let p = self.prog;
        let mut alpha = f64::INFINITY;
        for i in 0..q.len() {
            if d[i] > 0.0 {
                alpha = alpha.min((p.hi[i] - q[i]) / d[i]);
            } else if d[i] < 0.0 {
                alpha = alpha.min((p.lo[i] - q[i]) / d[i]);
            }
        }
        let (ps, vq) = psi(p, q);
        let vd = dot(&p.axis, d);
        if vd < 0.0 {
            alpha = alpha.min(-vq / vd);
        }
        // psi along the ray is the quadratic ps + gd*a + dad*a^2.
        let gd: f64 = (0..q.len())
            .map(|i| (2.0 * vq * p.axis[i] - 2.0 * p.weights[i] * p.weights[i] * q[i]) * d[i])
            .sum();
        let dad = vd * vd
            - p.weights
                .iter()
                .zip(d)
                .map(|(&w, &di)| (w * di).powi(2))
                .sum::<f64>();
        let mut root = f64::INFINITY;
        if dad.abs() > 1e-300 {
            let disc = gd * gd - 4.0 * dad * ps;
            if disc >= 0.0 {
                let s = disc.sqrt();
                for r in [(-gd - s) / (2.0 * dad), (-gd + s) / (2.0 * dad)] {
                    if r > 0.0 {
                        root = root.min(r);
                    }
                }
            }
        } else if gd < 0.0 {
            root = -ps / gd;
        }
        alpha.min(root)
    }
}

/// Maximizes the program from a strictly feasible starting point. `tol` is an
/// absolute tolerance on the objective value.
pub fn maximize_from(prog: &ConeProgram, start: &[f64], tol: f64) -> Result<ConeSolution> {
    let n = prog.objective.len();
    debug_assert_eq!(start.len(), n);
    let nu = 2.0 * n as f64 + 2.0;
    let span: f64 = (0..n)
        .map(|i| prog.objective[i].abs() * (prog.hi[i] - prog.lo[i]))
        .sum();
    let range = span.max(1e-12);
    let tol = tol.max(1e-14 * range);

    let mut q = start.to_vec();
    {
        let st = BarrierState { prog, theta: 0.0 };
        if !st.value(&q).is_finite() {
            return Err(Error::solver("cone solver start point not interior"));
        }
    }

    let mut theta = (nu / range).max(1e-12);
    let theta_final = nu / tol;
    let mut newton_budget = 4000usize;
    let mut converged = true;

    loop {
        let st = BarrierState { prog, theta };
        for _ in 0..60 {
            if newton_budget == 0 {
                converged = false;
                break;
            }
            newton_budget -= 1;
            let (g, h) = st.grad_hess(&q);
            let mut step = None;
            let mut ridge = 0.0;
            for _ in 0..4 {
                let mut hh = h.clone();
                if ridge > 0.0 {
                    for (i, row) in hh.iter_mut().enumerate() {
                        row[i] += ridge;
                    }
                }
                if let Some(s) = cholesky_solve(&mut hh, &g) {
                    step = Some(s);
                    break;
                }
                let tr: f64 = (0..n).map(|i| h[i][i].abs()).sum::<f64>() / n as f64;
                ridge = if ridge == 0.0 { tr * 1e-12 + 1e-300 } else { ridge * 1e4 };
            }
            let Some(mut d) = step else {
                converged = false;
                break;
            };
            for di in d.iter_mut() {
                *di = -*di;
            }
            let lambda2 = -dot(&g, &d);
            if lambda2 <= 1e-11 {
                break;
            }
            let alpha_max = st.max_step(&q, &d);
            let mut alpha = (0.99 * alpha_max).min(1.0);
            let f0 = st.value(&q);
            let slope = dot(&g, &d);
            let mut stepped = false;
            for _ in 0..60 {
                let trial: Vec<f64> = q.iter().zip(&d).map(|(&x, &dx)| x + alpha * dx).collect();
                let f1 = st.value(&trial);
                if f1.is_finite() && f1 <= f0 + 0.25 * alpha * slope {
                    q = trial;
                    stepped = true;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-18 {
                    break;
                }
            }
            if !stepped || lambda2 / 2.0 <= 1e-9 {
                break;
            }
        }
        if theta >= theta_final || newton_budget == 0 {
            break;
        }
        theta = (theta * 10.0).min(theta_final);
    }

    let objective = dot(&prog.objective, &q);
    Ok(ConeSolution {
        q,
        objective,
        gap: if converged { nu / theta_final } else { f64::INFINITY },
        converged,
    })
}

/// Finds a strictly feasible point of `prog`'s constraint set, or reports that
/// the set has (numerically) empty interior. Phase-1 barrier on the lifted
/// program maximize -s s.t. axis.q + s >= ||Wq||, box.
pub fn find_interior(prog: &ConeProgram) -> Result<Option<Vec<f64>>> {
    let n = prog.objective.len();
    let center: Vec<f64> = (0..n).map(|i| 0.5 * (prog.lo[i] + prog.hi[i])).collect();
    if cone_violation(prog, &center) < 0.0 {
        return Ok(Some(center));
    }
    let scale: f64 = prog
        .axis
        .iter()
        .zip(&prog.weights)
        .map(|(&a, &w)| a.abs() + w)
        .sum::<f64>()
        .max(1.0);
    let h0 = cone_violation(prog, &center);
    let s0 = h0 + 0.5 * scale.max(h0.abs());
    let mut lifted = ConeProgram {
        objective: vec![0.0; n + 1],
        lo: prog.lo.clone(),
        hi: prog.hi.clone(),
        axis: prog.axis.clone(),
        weights: prog.weights.clone(),
    };
    lifted.objective[n] = -1.0;
    lifted.lo.push(-4.0 * scale - 4.0 * h0.abs());
    lifted.hi.push(2.0 * s0.abs() + scale);
    lifted.axis.push(1.0);
    lifted.weights.push(0.0);
    let mut start = center;
    start.push(s0);
    let sol = maximize_from(&lifted, &start, 1e-10 * scale)?;
    let s_star = -sol.objective;
    if s_star < -1e-11 * scale {
        let q = sol.q[..n].to_vec();
        if cone_violation(prog, &q) < 0.0 {
            return Ok(Some(q));
        }
    }
    Ok(None)
}
