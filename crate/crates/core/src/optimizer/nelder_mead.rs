//! Downhill simplex minimization.

use crate::error::Result;

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Whether the spread of values over the simplex fell below the
    /// tolerance before the evaluation budget ran out.
    pub converged: bool,
}

struct Vertex {
    x: Vec<f64>,
    value: f64,
    /// Insertion counter; earlier vertices win ties.
    born: usize,
}

/// Minimizes `f` starting from the simplex `x0, x0 + step e_1, ...`.
///
/// Stops when `max - min` of the vertex values is at most `ftol` or after
/// `max_evals` evaluations, returning the best point seen.
pub fn minimize<F>(mut f: F, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> Result<NelderMeadOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut evals = 0;
    let mut born = 0;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if evals >= max_evals.max(1) && !simplex.is_empty() {
            break;
        }
        let mut x = x0.to_vec();
        if i > 0 {
            x[i - 1] += step;
        }
        let value = eval(&x, &mut evals)?;
        simplex.push(Vertex { x, value, born });
        born += 1;
    }
    let order = |s: &mut Vec<Vertex>| {
        s.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.born.cmp(&b.born)));
    };
    order(&mut simplex);
    if simplex.len() < n + 1 {
        let best = &simplex[0];
        return Ok(NelderMeadOutcome { x: best.x.clone(), value: best.value, evals, converged: false });
    }

    let mut converged = false;
    while evals < max_evals {
        let (best, worst) = (simplex[0].value, simplex[n].value);
        if worst - best <= ftol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.x) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].x).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(REFLECTION);
        let fr = eval(&xr, &mut evals)?;
        let second_worst = simplex[n - 1].value;
        let replacement = if evals >= max_evals {
            (fr < worst).then_some((xr, fr))
        } else if fr < best {
            let xe = along(EXPANSION);
            let fe = eval(&xe, &mut evals)?;
            if fe < fr {
                Some((xe, fe))
            } else {
                Some((xr, fr))
            }
        } else if fr < second_worst {
            Some((xr, fr))
        } else if fr < worst {
            let xc = along(REFLECTION * CONTRACTION);
            let fc = eval(&xc, &mut evals)?;
            (fc <= fr).then_some((xc, fc))
        } else {
            let xc = along(-CONTRACTION);
            let fc = eval(&xc, &mut evals)?;
            (fc < worst).then_some((xc, fc))
        };

        match replacement {
            Some((x, value)) => {
                simplex[n] = Vertex { x, value, born };
                born += 1;
            }
            None => {
                let anchor = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        break;
                    }
                    for (x, a) in v.x.iter_mut().zip(&anchor) {
                        *x = a + SHRINK * (*x - a);
                    }
                    v.value = eval(&v.x, &mut evals)?;
                    v.born = born;
                    born += 1;
                }
            }
        }
        order(&mut simplex);
    }
    let best = &simplex[0];
    Ok(NelderMeadOutcome { x: best.x.clone(), value: best.value, evals, converged })
}
