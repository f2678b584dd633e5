//! Sequential minimal optimization for the box- and equality-constrained
//! quadratic programs behind C-SVC and epsilon-SVR.
//!
//! Solves
//!
//! ```text
//! min  1/2 a'Qa + p'a   s.t.  y'a = 0,  0 <= a_i <= C
//! ```
//!
//! with `Q_ij = y_i y_j K(x_{k(i)}, x_{k(j)})`, picking the working pair by
//! maximal violation for `i` and second-order gain for `j`. Iteration stops
//! once the maximal KKT violation `m(a) - M(a)` drops to the tolerance.

const TAU: f64 = 1e-12;

pub(crate) struct Problem<'a> {
    /// Gram matrix over the distinct training points, row-major `n x n`.
    pub gram: &'a [f64],
    pub n_points: usize,
    /// Point index of each variable.
    pub point: Vec<usize>,
    /// Label (+1/-1) of each variable.
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    /// `m(a) - M(a)` at exit.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Problem<'_> {
    #[inline]
    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[self.point[i] * self.n_points + self.point[j]]
    }

    #[inline]
    fn q(&self, i: usize, j: usize) -> f64 {
        self.y[i] * self.y[j] * self.k(i, j)
    }

    pub fn solve(&self, tolerance: f64, max_iter: usize) -> Solution {
        let l = self.y.len();
        let c = self.cost;
        let qd: Vec<f64> = (0..l).map(|i| self.k(i, i)).collect();
        let mut alpha = vec![0.0; l];
        let mut grad = self.p.clone();
        let upper = |a: f64| a >= c;
        let lower = |a: f64| a <= 0.0;

        let mut iterations = 0;
        let mut gap;
        let mut converged = false;
        let mut qi = vec![0.0; l];
        let mut qj = vec![0.0; l];
        loop {
            // i: maximal violator in I_up
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..l {
                let v = -self.y[t] * grad[t];
                let in_up = if self.y[t] > 0.0 {
                    !upper(alpha[t])
                } else {
                    !lower(alpha[t])
                };
                if in_up && v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
            // j: best second-order gain in I_low
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut best = f64::INFINITY;
            if let Some(i) = i_sel {
                for (t, q) in qi.iter_mut().enumerate() {
                    *q = self.q(i, t);
                }
                for t in 0..l {
                    let in_low = if self.y[t] > 0.0 {
                        !lower(alpha[t])
                    } else {
                        !upper(alpha[t])
                    };
                    if !in_low {
                        continue;
                    }
                    let v = self.y[t] * grad[t];
                    if v >= gmax2 {
                        gmax2 = v;
                    }
                    let diff = gmax + v;
                    if diff > 0.0 {
                        // K_ii + K_tt - 2 K_it, with qi holding Q_it = y_i y_t K_it
                        let quad = qd[i] + qd[t] - 2.0 * self.y[i] * self.y[t] * qi[t];
                        let quad = if quad > 0.0 { quad } else { TAU };
                        let obj = -(diff * diff) / quad;
                        if obj <= best {
                            best = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            }
            gap = (gmax + gmax2).max(0.0);
            let (Some(i), Some(j)) = (i_sel, j_sel) else {
                // no violating pair left: gmax + gmax2 <= 0
                converged = true;
                break;
            };
            if gap < tolerance {
                converged = true;
                break;
            }
            if iterations >= max_iter {
                break;
            }
            iterations += 1;

            for (t, q) in qj.iter_mut().enumerate() {
                *q = self.q(j, t);
            }
            let (old_i, old_j) = (alpha[i], alpha[j]);
            if self.y[i] != self.y[j] {
                let mut quad = qd[i] + qd[j] + 2.0 * qi[j];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let mut quad = qd[i] + qd[j] - 2.0 * qi[j];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..l {
                grad[t] += qi[t] * di + qj[t] * dj;
            }
        }

        let rho = self.rho(&alpha, &grad);
        Solution {
            alpha,
            rho,
            gap,
            iterations,
            converged,
        }
    }

    fn rho(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let c = self.cost;
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..alpha.len() {
            let yg = self.y[t] * grad[t];
            if alpha[t] >= c {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        if free > 0 {
            sum_free / free as f64
        } else {
            let (ub, lb) = (
                if ub.is_finite() { ub } else { lb },
                if lb.is_finite() { lb } else { ub },
            );
            if ub.is_finite() {
                (ub + lb) / 2.0
            } else {
                0.0
            }
        }
    }
}
