//! Finite-difference verification of tape gradients.

use super::{DiffError, Tape, Var};
use crate::linalg::Matrix;

/// Result for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub checked: usize,
    /// Entries skipped because the loss is not differentiable there.
    pub excluded: usize,
    pub max_abs_grad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.params.iter().all(|p| p.max_rel_error <= self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.params.iter().map(|p| p.max_rel_error).fold(0.0, f64::max)
    }
}

/// Relative threshold for deciding that one-sided slopes disagree because of
/// a kink rather than curvature.
const KINK_TOLERANCE: f64 = 1e-2;

/// Compares analytic gradients with central differences.
///
/// `build` records the loss on a fresh tape given one leaf per parameter.
/// The error of an entry is `|a - n| / max(|a|, |n|, 1e-3 * g)`, where `g`
/// is the largest numeric gradient magnitude of that tensor.
pub fn grad_check<F>(
    build: F,
    params: &[(String, Matrix<f64>)],
    eps: f64,
    tolerance: f64,
) -> Result<GradCheckReport, DiffError>
where
    F: Fn(&mut Tape<f64>, &[Var]) -> Result<Var, DiffError>,
{
    let evaluate = |values: &[Matrix<f64>]| -> Result<f64, DiffError> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|m| tape.constant(m.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        Ok(tape.scalar(loss))
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|(_, m)| tape.param(m.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    let f0 = tape.scalar(loss);
    tape.backward(loss)?;
    let analytic: Vec<Matrix<f64>> = vars.iter().map(|&v| tape.grad_or_zeros(v)).collect();

    let mut values: Vec<Matrix<f64>> = params.iter().map(|(_, m)| m.clone()).collect();
    let mut report = Vec::with_capacity(params.len());
    for (p, (name, original)) in params.iter().enumerate() {
        let mut numeric = Vec::with_capacity(original.len());
        let mut kinks = Vec::with_capacity(original.len());
        for k in 0..original.len() {
            let base = original.as_slice()[k];
            values[p].as_mut_slice()[k] = base + eps;
            let plus = evaluate(&values)?;
            values[p].as_mut_slice()[k] = base - eps;
            let minus = evaluate(&values)?;
            values[p].as_mut_slice()[k] = base;
            let (right, left) = ((plus - f0) / eps, (f0 - minus) / eps);
            kinks.push((right - left).abs() > KINK_TOLERANCE * 1f64.max(right.abs()).max(left.abs()));
            numeric.push((plus - minus) / (2.0 * eps));
        }
        let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = (1e-3 * scale).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        let mut excluded = 0;
        for (k, (&n, &kink)) in numeric.iter().zip(&kinks).enumerate() {
            if kink {
                excluded += 1;
                continue;
            }
            let a = analytic[p].as_slice()[k];
            let err = (a - n).abs() / a.abs().max(n.abs()).max(floor);
            worst = worst.max(err);
        }
        report.push(ParamCheck {
            name: name.clone(),
            max_rel_error: worst,
            checked: original.len() - excluded,
            excluded,
            max_abs_grad: analytic[p].max_abs(),
        });
    }
    Ok(GradCheckReport { params: report, tolerance })
}
