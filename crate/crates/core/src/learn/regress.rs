//! Epsilon-insensitive support-vector regression and a closed-form ridge
//! regressor behind one model type.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelKind, Scaler};
use super::smo::Problem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: KernelKind,
    pub cost: f64,
    /// Half-width of the insensitive tube (regression only).
    pub svr_epsilon: f64,
    /// RBF width; `None` means `1 / dimension`.
    pub gamma: Option<f64>,
    /// Stop once the maximal KKT violation is below this.
    pub tolerance: f64,
    /// Iteration cap, in units of the number of dual variables.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: KernelKind::Rbf,
            cost: 1.0,
            svr_epsilon: 0.1,
            gamma: None,
            tolerance: 1e-3,
            max_passes: 10_000,
        }
    }
}

impl SvmConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.cost > 0.0) {
            return Err(Error::arg(format!("cost must be positive, got {}", self.cost)));
        }
        if !(self.svr_epsilon >= 0.0) {
            return Err(Error::arg(format!(
                "svr epsilon must be >= 0, got {}",
                self.svr_epsilon
            )));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::arg(format!("gamma must be positive, got {g}")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::arg("KKT tolerance must be positive"));
        }
        Ok(())
    }
}

/// Which regressor backs the per-stratum and baseline models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegressorKind {
    #[default]
    Svr,
    Ridge {
        lambda: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub scaler: Scaler,
    /// Standardized support vectors.
    pub support: Vec<Vec<f64>>,
    /// Dual coefficient per support vector (`a+ - a-`).
    pub coef: Vec<f64>,
    pub rho: f64,
    /// Maximal KKT violation when the solver stopped.
    pub kkt_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvrModel {
    fn decision(&self, z: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, z))
            .sum::<f64>()
            - self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub lambda: f64,
    pub intercept: f64,
    /// Coefficients in the original feature units.
    pub coef: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegressorModel {
    Svr(SvrModel),
    Ridge(RidgeModel),
    /// Fallback when the features carry no information: predicts the mean.
    Constant {
        value: f64,
        dim: usize,
    },
}

impl RegressorModel {
    pub fn dim(&self) -> usize {
        match self {
            RegressorModel::Svr(m) => m.scaler.dim(),
            RegressorModel::Ridge(m) => m.coef.len(),
            RegressorModel::Constant { dim, .. } => *dim,
        }
    }

    /// True for the constant fallback.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, RegressorModel::Constant { .. })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::arg(format!(
                "feature dimension {} does not match model dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(match self {
            RegressorModel::Svr(m) => m.decision(&m.scaler.transform(x)),
            RegressorModel::Ridge(m) => m.intercept + m.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>(),
            RegressorModel::Constant { value, .. } => *value,
        })
    }
}

fn check_rows(xs: &[&[f64]], ys: &[f64]) -> Result<usize> {
    if xs.len() != ys.len() {
        return Err(Error::arg(format!(
            "{} feature rows but {} targets",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::arg("need at least two training rows"));
    }
    let dim = xs[0].len();
    if xs.iter().any(|r| r.len() != dim) {
        return Err(Error::arg("training rows differ in dimension"));
    }
    if xs.iter().flat_map(|r| r.iter()).chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::arg("non-finite training value"));
    }
    Ok(dim)
}

fn mean(ys: &[f64]) -> f64 {
    ys.iter().sum::<f64>() / ys.len() as f64
}

pub fn fit_regressor(xs: &[&[f64]], ys: &[f64], kind: RegressorKind, config: &SvmConfig) -> Result<RegressorModel> {
    match kind {
        RegressorKind::Svr => fit_svr(xs, ys, config),
        RegressorKind::Ridge { lambda } => fit_ridge(xs, ys, lambda),
    }
}

/// Epsilon-SVR on z-scored features.
pub fn fit_svr(xs: &[&[f64]], ys: &[f64], config: &SvmConfig) -> Result<RegressorModel> {
    let dim = check_rows(xs, ys)?;
    config.validate()?;
    if Scaler::is_degenerate(xs) {
        return Ok(RegressorModel::Constant { value: mean(ys), dim });
    }
    let scaler = Scaler::fit(xs);
    let points: Vec<Vec<f64>> = xs.iter().map(|x| scaler.transform(x)).collect();
    let kernel = Kernel::resolve(config.kernel, config.gamma, dim);
    let gram = kernel.gram(&points);
    let n = points.len();

    // variables 0..n are a+, n..2n are a-
    let eps = config.svr_epsilon;
    let problem = Problem {
        gram: &gram,
        n_points: n,
        point: (0..2 * n).map(|i| i % n).collect(),
        y: (0..2 * n).map(|i| if i < n { 1.0 } else { -1.0 }).collect(),
        p: ys.iter().map(|y| eps - y).chain(ys.iter().map(|y| eps + y)).collect(),
        cost: config.cost,
    };
    let sol = problem.solve(config.tolerance, config.max_passes.saturating_mul(2 * n));

    let mut support = Vec::new();
    let mut coef = Vec::new();
    for (i, point) in points.into_iter().enumerate() {
        let c = sol.alpha[i] - sol.alpha[i + n];
        if c != 0.0 {
            support.push(point);
            coef.push(c);
        }
    }
    Ok(RegressorModel::Svr(SvrModel {
        kernel,
        scaler,
        support,
        coef,
        rho: sol.rho,
        kkt_gap: sol.gap,
        iterations: sol.iterations,
        converged: sol.converged,
    }))
}

/// Ridge regression with an unpenalized intercept.
///
/// Solved on standardized features and mapped back to original units.
pub fn fit_ridge(xs: &[&[f64]], ys: &[f64], lambda: f64) -> Result<RegressorModel> {
    let dim = check_rows(xs, ys)?;
    if !(lambda >= 0.0) {
        return Err(Error::arg(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    if Scaler::is_degenerate(xs) {
        return Ok(RegressorModel::Constant { value: mean(ys), dim });
    }
    let scaler = Scaler::fit(xs);
    let n = xs.len();
    let y_mean = mean(ys);
    let z = DMatrix::from_fn(n, dim, |r, c| (xs[r][c] - scaler.mean[c]) / scaler.std[c]);
    let yc = DVector::from_iterator(n, ys.iter().map(|y| y - y_mean));
    let mut gram = z.transpose() * &z;
    for d in 0..dim {
        gram[(d, d)] += lambda;
    }
    let rhs = z.transpose() * yc;
    let beta = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::arg("ridge system is singular; use a positive lambda"))?,
    };
    let coef: Vec<f64> = beta.iter().zip(&scaler.std).map(|(b, s)| b / s).collect();
    let intercept = y_mean - coef.iter().zip(&scaler.mean).map(|(c, m)| c * m).sum::<f64>();
    Ok(RegressorModel::Ridge(RidgeModel {
        lambda,
        intercept,
        coef,
    }))
}
