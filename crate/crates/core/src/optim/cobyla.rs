//! Unconstrained COBYLA (Powell's constrained optimisation by linear
//! approximation, with no constraint functions).
//!
//! The method keeps a simplex of `n + 1` evaluated points, fits the linear
//! interpolant of the objective, and steps to the minimiser of that model
//! inside a ball of radius `rho`. When steps stop paying off the radius is
//! halved, down to `rho_end`. Geometry steps keep the simplex well shaped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CobylaConfig {
    pub max_evals: usize,
    pub rho_begin: f64,
    pub rho_end: f64,
}

impl Default for CobylaConfig {
    fn default() -> Self {
        Self {
            max_evals: 60,
            rho_begin: 0.5,
            rho_end: 1e-4,
        }
    }
}

impl CobylaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_begin > self.rho_end && self.rho_end > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "COBYLA needs rho_begin > rho_end > 0, got {} and {}",
                self.rho_begin, self.rho_end
            )));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidSpec("COBYLA needs max_evals >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CobylaStatus {
    /// Trust radius shrank to `rho_end`.
    Converged,
    MaxEvalsReached,
    /// The objective returned NaN or infinity; the result holds the best
    /// finite point seen before that.
    NonFiniteObjective,
    /// The simplex became numerically singular.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CobylaResult<T> {
    pub x_best: Vec<T>,
    pub f_best: T,
    /// Objective value of every evaluation, in order.
    pub trace: Vec<T>,
    pub status: CobylaStatus,
}

impl<T: Scalar> CobylaResult<T> {
    /// Running minimum of the trace.
    pub fn best_so_far(&self) -> Vec<T> {
        let mut best = T::infinity();
        self.trace
            .iter()
            .map(|&f| {
                best = best.min(f);
                best
            })
            .collect()
    }
}

enum Stop {
    Budget,
    NonFinite,
}

struct Evaluator<'a, T, F> {
    objective: &'a mut F,
    max_evals: usize,
    trace: Vec<T>,
    x_best: Vec<T>,
    f_best: T,
}

impl<T: Scalar, F: FnMut(&[T]) -> T> Evaluator<'_, T, F> {
    fn eval(&mut self, x: &[T]) -> std::result::Result<T, Stop> {
        if self.trace.len() >= self.max_evals {
            return Err(Stop::Budget);
        }
        let f = (self.objective)(x);
        if !f.is_finite() {
            log::warn!(
                "objective returned {f} after {} evaluations",
                self.trace.len()
            );
            return Err(Stop::NonFinite);
        }
        self.trace.push(f);
        if f < self.f_best {
            self.f_best = f;
            self.x_best = x.to_vec();
        }
        Ok(f)
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Inverse of the matrix whose columns are `cols` (Gauss-Jordan, partial
/// pivoting). Row `j` of the result is dual to column `j`.
fn invert_columns<T: Scalar>(cols: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = cols.len();
    // a[i][j] = cols[j][i]
    let mut a: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| {
            a[r][col]
                .abs()
                .partial_cmp(&a[s][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                if factor != T::zero() {
                    for j in 0..n {
                        let (ac, ic) = (a[col][j], inv[col][j]);
                        a[r][j] -= factor * ac;
                        inv[r][j] -= factor * ic;
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Minimises `objective` from `x0`. Always returns the best evaluated point,
/// so `f_best <= objective(x0)`.
pub fn cobyla_minimize<T, F>(
    mut objective: F,
    x0: &[T],
    config: &CobylaConfig,
) -> Result<CobylaResult<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    config.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("COBYLA starting point".into()));
    }
    let mut ev = Evaluator {
        objective: &mut objective,
        max_evals: config.max_evals,
        trace: Vec::new(),
        x_best: x0.to_vec(),
        f_best: T::infinity(),
    };
    let status = match run(&mut ev, x0, config) {
        Ok(status) => status,
        Err(Stop::Budget) => CobylaStatus::MaxEvalsReached,
        Err(Stop::NonFinite) => CobylaStatus::NonFiniteObjective,
    };
    if ev.trace.is_empty() {
        return Err(Error::NonFinite("objective at the starting point".into()));
    }
    Ok(CobylaResult {
        x_best: ev.x_best,
        f_best: ev.f_best,
        trace: ev.trace,
        status,
    })
}

fn run<T, F>(
    ev: &mut Evaluator<'_, T, F>,
    x0: &[T],
    config: &CobylaConfig,
) -> std::result::Result<CobylaStatus, Stop>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let n = x0.len();
    let half = T::of(0.5);
    let alpha = T::of(0.25);
    let beta = T::of(2.1);
    let gamma = half;
    let delta = T::of(1.1);
    let rho_end = T::of(config.rho_end);
    let mut rho = T::of(config.rho_begin);

    let mut base = x0.to_vec();
    let mut f_base = ev.eval(&base)?;
    if n == 0 {
        return Ok(CobylaStatus::Converged);
    }

    // initial simplex: base + rho e_j, moving the base whenever a vertex improves
    let mut sim: Vec<Vec<T>> = vec![vec![T::zero(); n]; n];
    let mut fvals = vec![T::zero(); n];
    for j in 0..n {
        let mut x = base.clone();
        x[j] += rho;
        let f = ev.eval(&x)?;
        if f < f_base {
            fvals[j] = f_base;
            f_base = f;
            base = x;
            for col in sim.iter_mut().take(j) {
                col[j] -= rho;
            }
            sim[j][j] = -rho;
        } else {
            fvals[j] = f;
            sim[j][j] = rho;
        }
    }
    let Some(mut simi) = invert_columns(&sim) else {
        return Ok(CobylaStatus::Degenerate);
    };

    let mut skip_geometry = true;
    loop {
        // pivot the best vertex into the base
        let mut nbest = None;
        let mut phimin = f_base;
        for (j, &f) in fvals.iter().enumerate() {
            if f < phimin {
                nbest = Some(j);
                phimin = f;
            }
        }
        if let Some(nb) = nbest {
            std::mem::swap(&mut f_base, &mut fvals[nb]);
            let d = sim[nb].clone();
            for (b, &di) in base.iter_mut().zip(&d) {
                *b += di;
            }
            for (k, col) in sim.iter_mut().enumerate() {
                if k == nb {
                    col.iter_mut().zip(&d).for_each(|(c, &di)| *c = -di);
                } else {
                    col.iter_mut().zip(&d).for_each(|(c, &di)| *c -= di);
                }
            }
            let total: Vec<T> = (0..n)
                .map(|i| simi.iter().fold(T::zero(), |acc, row| acc + row[i]))
                .collect();
            simi[nb] = total.into_iter().map(|v| -v).collect();
        }

        // refresh the inverse if updates have drifted
        let drift = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| {
                let target = if j == k { T::one() } else { T::zero() };
                (dot(&simi[j], &sim[k]) - target).abs()
            })
            .fold(T::zero(), T::max);
        if drift > T::of(1e-8) {
            match invert_columns(&sim) {
                Some(inv) => simi = inv,
                None => return Ok(CobylaStatus::Degenerate),
            }
        }

        let grad: Vec<T> = (0..n)
            .map(|i| (0..n).fold(T::zero(), |acc, j| acc + (fvals[j] - f_base) * simi[j][i]))
            .collect();
        let vsig: Vec<T> = simi.iter().map(|r| T::one() / norm(r)).collect();
        let veta: Vec<T> = sim.iter().map(|c| norm(c)).collect();
        let parsig = alpha * rho;
        let pareta = beta * rho;
        let acceptable = vsig.iter().all(|&s| s >= parsig) && veta.iter().all(|&e| e <= pareta);

        if !skip_geometry && !acceptable {
            skip_geometry = true;
            let mut jdrop = None;
            let mut worst = pareta;
            for (j, &e) in veta.iter().enumerate() {
                if e > worst {
                    jdrop = Some(j);
                    worst = e;
                }
            }
            if jdrop.is_none() {
                let mut smallest = pareta;
                for (j, &s) in vsig.iter().enumerate() {
                    if s < smallest {
                        jdrop = Some(j);
                        smallest = s;
                    }
                }
            }
            let jd = jdrop.expect("unacceptable simplex has a vertex to drop");
            let scale = gamma * rho * vsig[jd];
            let mut dx: Vec<T> = simi[jd].iter().map(|&v| scale * v).collect();
            if dot(&grad, &dx) > T::zero() {
                dx.iter_mut().for_each(|v| *v = -*v);
            }
            if !replace_vertex(&mut sim, &mut simi, jd, &dx) {
                return Ok(CobylaStatus::Degenerate);
            }
            let x: Vec<T> = base.iter().zip(&dx).map(|(&b, &d)| b + d).collect();
            fvals[jd] = ev.eval(&x)?;
            continue;
        }

        skip_geometry = true;

        // trust-region step on the linear model
        let gnorm = norm(&grad);
        let mut improved = false;
        if gnorm > T::zero() {
            let dx: Vec<T> = grad.iter().map(|&g| -rho * g / gnorm).collect();
            let predicted = rho * gnorm;
            let x: Vec<T> = base.iter().zip(&dx).map(|(&b, &d)| b + d).collect();
            let f_new = ev.eval(&x)?;
            let actual = f_base - f_new;

            let mut ratio = if actual <= T::zero() {
                T::one()
            } else {
                T::zero()
            };
            let mut jdrop = None;
            let mut sigbar = vec![T::zero(); n];
            for j in 0..n {
                let t = dot(&simi[j], &dx).abs();
                if t > ratio {
                    jdrop = Some(j);
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edgmax = delta * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= parsig || sigbar[j] >= vsig[j] {
                    let mut t = veta[j];
                    if actual > T::zero() {
                        let diff: Vec<T> = dx.iter().zip(&sim[j]).map(|(&a, &b)| a - b).collect();
                        t = norm(&diff);
                    }
                    if t > edgmax {
                        far = Some(j);
                        edgmax = t;
                    }
                }
            }
            if far.is_some() {
                jdrop = far;
            }
            if let Some(jd) = jdrop {
                if replace_vertex(&mut sim, &mut simi, jd, &dx) {
                    fvals[jd] = f_new;
                    improved = actual > T::zero() && actual >= T::of(0.1) * predicted;
                }
            }
        }
        if improved {
            continue;
        }

        if !acceptable {
            skip_geometry = false;
            continue;
        }
        if rho > rho_end {
            rho *= half;
            if rho <= T::of(1.5) * rho_end {
                rho = rho_end;
            }
            continue;
        }
        return Ok(CobylaStatus::Converged);
    }
}

/// Sets simplex column `jd` to `dx` and applies the matching rank-one update
/// to the inverse. Returns false if the new simplex would be singular.
fn replace_vertex<T: Scalar>(sim: &mut [Vec<T>], simi: &mut [Vec<T>], jd: usize, dx: &[T]) -> bool {
    let pivot = dot(&simi[jd], dx);
    if pivot.abs() <= T::epsilon() {
        return false;
    }
    sim[jd] = dx.to_vec();
    simi[jd].iter_mut().for_each(|v| *v /= pivot);
    let pivot_row = simi[jd].clone();
    for (j, row) in simi.iter_mut().enumerate() {
        if j != jd {
            let t = dot(row, dx);
            row.iter_mut()
                .zip(&pivot_row)
                .for_each(|(r, &p)| *r -= t * p);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(max_evals: usize) -> CobylaConfig {
        CobylaConfig {
            max_evals,
            rho_begin: 0.5,
            rho_end: 1e-6,
        }
    }

    #[test]
    fn shifted_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let r = cobyla_minimize(f, &[0.0, 0.0], &cfg(200)).unwrap();
        assert!((r.x_best[0] - 1.0).abs() < 1e-3, "{:?}", r.x_best);
        assert!((r.x_best[1] + 2.0).abs() < 1e-3, "{:?}", r.x_best);
        assert!(r.trace.len() <= 200);
    }

    #[test]
    fn constant_objective_keeps_start() {
        let r = cobyla_minimize(|_: &[f64]| 3.0, &[0.2, -0.4, 1.0], &cfg(100)).unwrap();
        assert_eq!(r.x_best, vec![0.2, -0.4, 1.0]);
        assert_eq!(r.f_best, 3.0);
    }

    #[test]
    fn best_so_far_is_monotone_and_bounded_by_start() {
        let f = |x: &[f64]| (3.0 * x[0]).sin() + x[1] * x[1] + 0.1 * x[2].cos();
        let r = cobyla_minimize(f, &[1.0, 1.0, 1.0], &cfg(60)).unwrap();
        let b = r.best_so_far();
        assert!(b.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.f_best <= r.trace[0]);
        assert_eq!(*b.last().unwrap(), r.f_best);
    }

    #[test]
    fn eval_budget_is_respected() {
        let mut calls = 0;
        let r = cobyla_minimize(
            |x: &[f64]| {
                calls += 1;
                x.iter().map(|v| v * v).sum()
            },
            &[1.0; 4],
            &cfg(7),
        )
        .unwrap();
        assert_eq!(calls, 7);
        assert_eq!(r.status, CobylaStatus::MaxEvalsReached);
    }

    #[test]
    fn non_finite_aborts_with_best_so_far() {
        let mut calls = 0;
        let r = cobyla_minimize(
            |x: &[f64]| {
                calls += 1;
                if calls > 3 {
                    f64::NAN
                } else {
                    x[0] * x[0]
                }
            },
            &[1.0, 0.0],
            &cfg(50),
        )
        .unwrap();
        assert_eq!(r.status, CobylaStatus::NonFiniteObjective);
        assert_eq!(r.trace.len(), 3);
        assert!(r.f_best.is_finite());
    }

    #[test]
    fn invalid_configs() {
        let bad = CobylaConfig {
            max_evals: 10,
            rho_begin: 0.1,
            rho_end: 0.5,
        };
        assert!(cobyla_minimize(|x: &[f64]| x[0], &[0.0], &bad).is_err());
        assert!(cobyla_minimize(|x: &[f64]| x[0], &[f64::NAN], &cfg(5)).is_err());
    }

    #[test]
    fn works_in_f32() {
        let f = |x: &[f32]| (x[0] - 0.5).powi(2) + (x[1] - 0.25).powi(2);
        let c = CobylaConfig {
            max_evals: 200,
            rho_begin: 0.5,
            rho_end: 1e-3,
        };
        let r = cobyla_minimize(f, &[0.0f32, 0.0], &c).unwrap();
        assert!((r.x_best[0] - 0.5).abs() < 1e-2);
    }
}
