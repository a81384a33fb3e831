//! Central finite-difference verification of reverse-mode gradients.

use alloc::vec::Vec;

use super::scalar::Scalar;
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use super::NnError;

/// Outcome of a gradient check.
///
/// The relative error of one element is
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-4)`; the floor
/// keeps finite-difference noise on near-zero gradients from dominating
/// the report.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    /// Total scalar entries compared.
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < self.tolerance
    }
}

const REL_FLOOR: f64 = 1e-4;

/// Compare reverse-mode gradients of a scalar-valued closure against
/// central finite differences over every element of every input.
///
/// `op` must build the same computation for every call; it receives the
/// inputs as leaf variables in order. `epsilon` is the half-step of the
/// central difference.
pub fn grad_check<F>(
    op: &F,
    inputs: &[Tensor<f64>],
    epsilon: f64,
    tolerance: f64,
) -> Result<GradCheckReport, NnError>
where
    F: Fn(&mut Tape<f64>, &[Var]) -> Result<Var, NnError>,
{
    assert!(
        epsilon > 0.0 && epsilon <= 1e-2,
        "epsilon must be in (0, 1e-2]"
    );

    let analytic: Vec<Vec<f64>> = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t)).collect();
        let out = op(&mut tape, &vars)?;
        let [r, c] = tape.shape(out);
        if r != 1 || c != 1 {
            return Err(NnError::ShapeMismatch {
                context: "grad_check",
                detail: alloc::format!("closure must be scalar-valued, got {r}x{c}"),
            });
        }
        if !tape.value(out)[0].is_finite() {
            return Err(NnError::NonFiniteGradient);
        }
        tape.backward(out)?;
        let grads: Vec<Vec<f64>> = vars.iter().map(|&v| tape.grad(v).to_vec()).collect();
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(NnError::NonFiniteGradient);
        }
        grads
    };

    let eval = |probe: &[Tensor<f64>]| -> Result<f64, NnError> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = probe.iter().map(|t| tape.leaf(t)).collect();
        let out = op(&mut tape, &vars)?;
        let y = tape.value(out)[0];
        if !y.is_finite() {
            return Err(NnError::NonFiniteGradient);
        }
        Ok(y)
    };

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        checked: 0,
        tolerance,
    };
    let mut probe: Vec<Tensor<f64>> = inputs.to_vec();
    for (i, input) in inputs.iter().enumerate() {
        for (j, &a) in analytic[i].iter().enumerate() {
            let base = input.data()[j];
            probe[i].data_mut()[j] = base + epsilon;
            let plus = eval(&probe)?;
            probe[i].data_mut()[j] = base - epsilon;
            let minus = eval(&probe)?;
            probe[i].data_mut()[j] = base;

            let numeric = (plus - minus) / (2.0 * epsilon);
            if !numeric.is_finite() {
                return Err(NnError::NonFiniteGradient);
            }
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(REL_FLOOR);
            report.max_abs_err = report.max_abs_err.max(abs);
            report.max_rel_err = report.max_rel_err.max(rel);
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Probe a closure's activation-kink margin: the smallest |x| entering a
/// ReLU/LeakyReLU/ELU in one forward pass. Configurations whose margin
/// is below roughly `10 * epsilon` should be re-drawn rather than
/// checked; the central difference straddles the kink there.
pub fn kink_margin<S: Scalar, F>(op: &F, inputs: &[Tensor<S>]) -> Result<f64, NnError>
where
    F: Fn(&mut Tape<S>, &[Var]) -> Result<Var, NnError>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t)).collect();
    op(&mut tape, &vars)?;
    Ok(tape.kink_margin())
}
