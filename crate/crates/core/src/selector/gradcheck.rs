use alloc::string::String;
use alloc::vec::Vec;

use super::network::{loss, loss_and_grad, CandidateInput};
use super::params::SelectorParams;
use crate::error::Result;

/// Agreement between analytic and central-difference gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    /// Largest `|a - n| / max(|a|, |n|, floor)` over every parameter.
    pub max_relative_error: f64,
    /// Tensor and flat index where the maximum occurred.
    pub worst: (String, usize),
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// Compares the backward pass against central differences of the loss,
/// perturbing each parameter by `±eps` in turn.
///
/// `floor` bounds the denominator from below so that parameters whose true
/// gradient is zero up to roundoff do not dominate.
pub fn check_gradients(
    inputs: &[CandidateInput],
    labels: &[bool],
    params: &SelectorParams,
    n_heads: usize,
    eps: f64,
    floor: f64,
) -> Result<GradCheck> {
    let (_, grad) = loss_and_grad(inputs, labels, params, n_heads)?;
    let analytic: Vec<(String, Vec<f64>)> = grad
        .tensors()
        .into_iter()
        .map(|(name, m)| (name, m.as_slice().to_vec()))
        .collect();
    let mut probe = params.clone();
    let mut report = GradCheck {
        max_relative_error: 0.0,
        worst: (String::new(), 0),
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    for (t, (name, a_values)) in analytic.iter().enumerate() {
        for (i, &a) in a_values.iter().enumerate() {
            let original = probe.tensors_mut()[t].as_slice()[i];
            probe.tensors_mut()[t].as_mut_slice()[i] = original + eps;
            let up = loss(inputs, labels, &probe, n_heads)?;
            probe.tensors_mut()[t].as_mut_slice()[i] = original - eps;
            let down = loss(inputs, labels, &probe, n_heads)?;
            probe.tensors_mut()[t].as_mut_slice()[i] = original;
            let n = (up - down) / (2.0 * eps);
            let err = (a - n).abs() / a.abs().max(n.abs()).max(floor);
            report.checked += 1;
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst = (name.clone(), i);
                report.analytic = a;
                report.numeric = n;
            }
        }
    }
    Ok(report)
}
