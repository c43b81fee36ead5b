//! Derivative-free local minimization (Nelder-Mead simplex) with a hard cap
//! on objective evaluations.

#[derive(Clone, Debug)]
pub struct NelderMead {
    /// Maximum number of objective evaluations, including the initial simplex.
    pub max_evals: usize,
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 300,
            initial_step: 0.5,
            f_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    /// Minimizes `f` from `x0`. With `max_evals == 0` the start point is
    /// returned with `fx = f(x0)` and `evals = 0`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let dim = x0.len();
        if self.max_evals == 0 || dim == 0 {
            return Minimum {
                x: x0.to_vec(),
                fx: f(x0),
                evals: 0,
                converged: dim == 0,
            };
        }

        let mut evals = 0usize;
        let mut best_seen = (x0.to_vec(), f64::INFINITY);
        let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
            *evals += 1;
            let v = f(x);
            if v < best_seen.1 {
                best_seen = (x.to_vec(), v);
            }
            v
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let f0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), f0));
        for k in 0..dim {
            if evals >= self.max_evals {
                break;
            }
            let mut x = x0.to_vec();
            x[k] += self.initial_step;
            let fx = eval(&x, &mut evals);
            simplex.push((x, fx));
        }

        let mut converged = false;
        if simplex.len() == dim + 1 {
            let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
            while evals < self.max_evals {
                simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
                if (simplex[dim].1 - simplex[0].1).abs() <= self.f_tol {
                    converged = true;
                    break;
                }
                let centroid: Vec<f64> = (0..dim)
                    .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
                    .collect();
                let worst = simplex[dim].clone();
                let along = |t: f64| -> Vec<f64> {
                    centroid
                        .iter()
                        .zip(&worst.0)
                        .map(|(c, w)| c + t * (c - w))
                        .collect()
                };

                let xr = along(alpha);
                let fr = eval(&xr, &mut evals);
                if fr < simplex[0].1 {
                    if evals >= self.max_evals {
                        simplex[dim] = (xr, fr);
                        break;
                    }
                    let xe = along(gamma);
                    let fe = eval(&xe, &mut evals);
                    simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                    continue;
                }
                if fr < simplex[dim - 1].1 {
                    simplex[dim] = (xr, fr);
                    continue;
                }
                if evals >= self.max_evals {
                    break;
                }
                // contraction, outside if the reflection beat the worst point
                let (xc, fc) = if fr < worst.1 {
                    let xc = along(rho);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = along(-rho);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < worst.1.min(fr) {
                    simplex[dim] = (xc, fc);
                    continue;
                }
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    if evals >= self.max_evals {
                        break;
                    }
                    let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let fx = eval(&x, &mut evals);
                    *v = (x, fx);
                }
            }
        }

        let (x, fx) = best_seen;
        Minimum {
            x,
            fx,
            evals,
            converged,
        }
    }
}
