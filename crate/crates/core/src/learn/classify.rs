//! One-vs-rest soft-margin kernel machine over trajectory classes.

use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, Scaler};
use super::regress::SvmConfig;
use super::smo::Problem;
use crate::error::{Error, Result};
use crate::trajectory::TrajectoryClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub class: TrajectoryClass,
    /// Signed dual coefficient (`y_i a_i`) per stored point.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub kkt_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifierModel {
    /// Only one class was seen in training.
    Constant { class: TrajectoryClass, dim: usize },
    OneVsRest {
        kernel: Kernel,
        scaler: Scaler,
        /// Standardized points that are support vectors of some machine.
        points: Vec<Vec<f64>>,
        machines: Vec<BinaryMachine>,
    },
}

/// Class with the largest margin; ties go to the earlier class in
/// [`TrajectoryClass`] order.
pub fn argmax_class(margins: &[(TrajectoryClass, f64)]) -> Option<TrajectoryClass> {
    let mut best: Option<(TrajectoryClass, f64)> = None;
    for &(class, m) in margins {
        best = match best {
            Some((bc, bm)) if bm > m || (bm == m && bc < class) => Some((bc, bm)),
            _ => Some((class, m)),
        };
    }
    best.map(|(c, _)| c)
}

impl ClassifierModel {
    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::Constant { dim, .. } => *dim,
            ClassifierModel::OneVsRest { scaler, .. } => scaler.dim(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, ClassifierModel::Constant { .. })
    }

    /// Decision value of every one-vs-rest machine, in class order.
    pub fn margins(&self, x: &[f64]) -> Result<Vec<(TrajectoryClass, f64)>> {
        if x.len() != self.dim() {
            return Err(Error::arg(format!(
                "feature dimension {} does not match classifier dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(match self {
            ClassifierModel::Constant { class, .. } => vec![(*class, 0.0)],
            ClassifierModel::OneVsRest {
                kernel,
                scaler,
                points,
                machines,
            } => {
                let z = scaler.transform(x);
                let k: Vec<f64> = points.iter().map(|p| kernel.eval(p, &z)).collect();
                machines
                    .iter()
                    .map(|m| {
                        let s: f64 = m.coef.iter().zip(&k).map(|(c, kv)| c * kv).sum();
                        (m.class, s - m.rho)
                    })
                    .collect()
            }
        })
    }

    pub fn predict_class(&self, x: &[f64]) -> Result<TrajectoryClass> {
        let margins = self.margins(x)?;
        Ok(argmax_class(&margins).expect("classifier has at least one class"))
    }
}

pub fn fit_classifier(xs: &[&[f64]], labels: &[TrajectoryClass], config: &SvmConfig) -> Result<ClassifierModel> {
    if xs.len() != labels.len() {
        return Err(Error::arg(format!(
            "{} feature rows but {} labels",
            xs.len(),
            labels.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::arg("cannot fit a classifier on zero rows"));
    }
    let dim = xs[0].len();
    if xs.iter().any(|r| r.len() != dim) {
        return Err(Error::arg("training rows differ in dimension"));
    }
    config.validate()?;
    let mut classes: Vec<TrajectoryClass> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() == 1 {
        return Ok(ClassifierModel::Constant { class: classes[0], dim });
    }

    let scaler = Scaler::fit(xs);
    let points: Vec<Vec<f64>> = xs.iter().map(|x| scaler.transform(x)).collect();
    let kernel = Kernel::resolve(config.kernel, config.gamma, dim);
    let gram = kernel.gram(&points);
    let n = points.len();

    let mut machines = Vec::with_capacity(classes.len());
    for &class in &classes {
        let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let problem = Problem {
            gram: &gram,
            n_points: n,
            point: (0..n).collect(),
            y: y.clone(),
            p: vec![-1.0; n],
            cost: config.cost,
        };
        let sol = problem.solve(config.tolerance, config.max_passes.saturating_mul(n));
        machines.push(BinaryMachine {
            class,
            coef: sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).collect(),
            rho: sol.rho,
            kkt_gap: sol.gap,
            converged: sol.converged,
        });
    }

    // keep only points some machine uses
    let used: Vec<usize> = (0..n).filter(|&i| machines.iter().any(|m| m.coef[i] != 0.0)).collect();
    for m in &mut machines {
        m.coef = used.iter().map(|&i| m.coef[i]).collect();
    }
    let points = used.iter().map(|&i| points[i].clone()).collect();
    Ok(ClassifierModel::OneVsRest {
        kernel,
        scaler,
        points,
        machines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::kernel::KernelKind;
    use TrajectoryClass::*;

    fn rows(xs: &[Vec<f64>]) -> Vec<&[f64]> {
        xs.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn separable_clusters_fit_perfectly() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..10 {
            xs.push(vec![0.0, 0.0]);
            ys.push(SR);
            xs.push(vec![1.0, 0.0]);
            ys.push(ER);
        }
        for kernel in [KernelKind::Rbf, KernelKind::Linear] {
            let cfg = SvmConfig {
                kernel,
                ..Default::default()
            };
            let m = fit_classifier(&rows(&xs), &ys, &cfg).unwrap();
            for (x, y) in xs.iter().zip(&ys) {
                assert_eq!(m.predict_class(x).unwrap(), *y);
            }
        }
    }

    #[test]
    fn three_classes() {
        let centers = [(LR, [0.0, 0.0]), (SD, [3.0, 0.0]), (OT, [0.0, 3.0])];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (class, c) in centers {
            for k in 0..8 {
                let d = k as f64 * 0.05;
                xs.push(vec![c[0] + d, c[1] - d]);
                ys.push(class);
            }
        }
        let m = fit_classifier(&rows(&xs), &ys, &SvmConfig::default()).unwrap();
        let hits = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| m.predict_class(x).unwrap() == **y)
            .count();
        assert_eq!(hits, xs.len());
        if let ClassifierModel::OneVsRest { machines, .. } = &m {
            assert_eq!(machines.len(), 3);
            assert!(machines.iter().all(|mm| mm.converged && mm.kkt_gap <= 1e-3));
        }
    }

    #[test]
    fn single_class_is_constant() {
        let xs = vec![vec![1.0], vec![2.0], vec![5.0]];
        let m = fit_classifier(&rows(&xs), &[FR, FR, FR], &SvmConfig::default()).unwrap();
        assert!(m.is_degenerate());
        assert_eq!(m.predict_class(&[-40.0]).unwrap(), FR);
    }

    #[test]
    fn conflicting_labels_still_train() {
        let xs = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.0, 2.0], vec![0.0, 2.0]];
        let ys = [SR, OT, SR, OT];
        let m = fit_classifier(&rows(&xs), &ys, &SvmConfig::default()).unwrap();
        let hits = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| m.predict_class(x).unwrap() == **y)
            .count();
        assert!(hits < xs.len());
    }

    #[test]
    fn argmax_ties_follow_class_order() {
        assert_eq!(argmax_class(&[(SR, 1.0), (ER, 1.0)]), Some(ER));
        assert_eq!(argmax_class(&[(OT, 2.0), (ER, 1.0)]), Some(OT));
        assert_eq!(argmax_class(&[]), None);
    }

    #[test]
    fn dimension_mismatch() {
        let xs = vec![vec![1.0], vec![2.0]];
        let m = fit_classifier(&rows(&xs), &[SR, OT], &SvmConfig::default()).unwrap();
        assert!(m.predict_class(&[1.0, 2.0]).is_err());
    }
}
