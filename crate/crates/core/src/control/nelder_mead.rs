//! Derivative-free simplex minimization.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once the spread of simplex values falls below this.
    pub value_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evaluations: 200,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            value_tolerance: 1e-5,
        }
    }
}

impl NelderMeadOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations == 0 {
            return Err(Error::invalid("max_evaluations", "must be positive"));
        }
        if !(self.reflection > 0.0)
            || !(self.expansion > 1.0)
            || !(self.contraction > 0.0 && self.contraction < 1.0)
            || !(self.shrink > 0.0 && self.shrink < 1.0)
        {
            return Err(Error::invalid("nelder_mead", "coefficients out of range"));
        }
        if !(self.value_tolerance > 0.0) {
            return Err(Error::invalid("value_tolerance", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an initial simplex of axis steps `step`.
///
/// Evaluation errors abort the search and are returned unchanged.
pub fn minimize<F>(mut f: F, x0: &[f64], step: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    opts.validate()?;
    let n = x0.len();
    if step.len() != n {
        return Err(Error::Shape {
            context: "simplex steps",
            expected: n,
            found: step.len(),
        });
    }
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals)?;
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if evals >= opts.max_evaluations {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = eval(&x, &mut evals)?;
        simplex.push((x, v));
    }
    if simplex.len() < n + 1 {
        return Ok(best_of(simplex, evals, false));
    }

    let mut converged = false;
    while evals < opts.max_evaluations {
        // Stable sort keeps earlier vertices first among ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= opts.value_tolerance {
            converged = true;
            break;
        }

        let mut centroid = alloc::vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = along(opts.reflection);
        let fr = eval(&xr, &mut evals)?;
        if fr < simplex[0].1 {
            if evals >= opts.max_evaluations {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut evals)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        if evals >= opts.max_evaluations {
            break;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if evals >= opts.max_evaluations {
                break;
            }
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + opts.shrink * (v - b))
                .collect();
            let v = eval(&x, &mut evals)?;
            *vertex = (x, v);
        }
    }
    Ok(best_of(simplex, evals, converged))
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>, evaluations: usize, converged: bool) -> Minimum {
    let (x, value) = simplex
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("simplex has at least one vertex");
    Minimum {
        x,
        value,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let opts = NelderMeadOptions {
            max_evaluations: 2000,
            value_tolerance: 1e-14,
            ..Default::default()
        };
        let m = minimize(
            |x| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)),
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &opts,
        )
        .unwrap();
        assert!(
            (m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn error_propagates() {
        let r = minimize(
            |_| Err(Error::invalid("x", "boom")),
            &[0.0],
            &[1.0],
            &NelderMeadOptions::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn budget_is_respected() {
        let mut count = 0;
        let opts = NelderMeadOptions {
            max_evaluations: 17,
            value_tolerance: 1e-300,
            ..Default::default()
        };
        let m = minimize(
            |x| {
                count += 1;
                Ok(x.iter().map(|v| v * v).sum())
            },
            &[1.0, 2.0, 3.0],
            &[0.1, 0.1, 0.1],
            &opts,
        )
        .unwrap();
        assert!(m.evaluations <= 17);
        assert_eq!(count, m.evaluations);
    }
}
