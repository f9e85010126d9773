use super::target::TargetSpec;
use crate::automaton::{Configuration, Topology};
use crate::binary::{binary_grad_run, binary_run, BinaryConfig};
use crate::error::{ensure_len, DcaError, Result};
use crate::grad::grad_run;
use crate::model::DcaRule;

/// Probabilities below this are clamped before taking logs or dividing.
pub const LOG_FLOOR: f64 = 1e-12;

#[inline]
fn floored(p: f64) -> f64 {
    p.max(LOG_FLOOR)
}

/// `−Σ_g Σ_a t(g)(a) ln x(g)(a)`, skipping zero-target terms.
pub fn cross_entropy(target: &Configuration, actual: &Configuration) -> Result<f64> {
    ensure_len("cross-entropy ring size", target.ring_size(), actual.ring_size())?;
    ensure_len("cross-entropy alphabet size", target.k(), actual.k())?;
    Ok(-target
        .probs()
        .iter()
        .zip(actual.probs())
        .filter(|(&t, _)| t != 0.0)
        .map(|(&t, &p)| t * floored(p).ln())
        .sum::<f64>())
}

/// `−Σ_g (φ ln τ + (1 − φ) ln(1 − τ))` over `P(■)` vectors.
pub fn binary_cross_entropy(target_black: &[f64], actual_black: &[f64]) -> Result<f64> {
    ensure_len("cross-entropy ring size", target_black.len(), actual_black.len())?;
    let mut e = 0.0;
    for (&phi, &tau) in target_black.iter().zip(actual_black) {
        if phi != 0.0 {
            e -= phi * floored(tau).ln();
        }
        if phi != 1.0 {
            e -= (1.0 - phi) * floored(1.0 - tau).ln();
        }
    }
    Ok(e)
}

fn require_steps(steps: usize) -> Result<()> {
    if steps == 0 {
        Err(DcaError::invalid("loss needs at least one step"))
    } else {
        Ok(())
    }
}

/// Loss of one initial configuration, from a forward run only.
pub fn loss_value(
    rule: &DcaRule,
    initial: &Configuration,
    topology: &Topology,
    steps: usize,
    target: &TargetSpec,
) -> Result<f64> {
    require_steps(steps)?;
    let goal = target.resolve(initial, topology, steps)?;
    match rule {
        DcaRule::Softmax(_) => {
            let run = rule.run(initial, topology, steps)?;
            cross_entropy(&goal, &run[steps])
        }
        DcaRule::Sigmoid(r) => {
            let run = binary_run(r, &BinaryConfig::from_configuration(initial)?, topology, steps)?;
            binary_cross_entropy(&goal.symbol_probs(1), run[steps].p_black())
        }
    }
}

/// Loss and its gradient with respect to the rule weights, via forward
/// propagation of the configuration gradient.
pub fn loss_gradient(
    rule: &DcaRule,
    initial: &Configuration,
    topology: &Topology,
    steps: usize,
    target: &TargetSpec,
) -> Result<(f64, Vec<f64>)> {
    require_steps(steps)?;
    let goal = target.resolve(initial, topology, steps)?;
    match rule {
        DcaRule::Softmax(r) => {
            let (run, grad) = grad_run(r, initial, topology, steps)?;
            let last = &run[steps];
            let e = cross_entropy(&goal, last)?;
            let mut out = vec![0.0; grad.weight_count()];
            for g in 0..last.ring_size() {
                for a in 0..last.k() {
                    let t = goal.prob(g, a);
                    if t == 0.0 {
                        continue;
                    }
                    let coef = -t / floored(last.prob(g, a));
                    for (o, &d) in out.iter_mut().zip(grad.block(g, a)) {
                        *o += coef * d;
                    }
                }
            }
            Ok((e, out))
        }
        DcaRule::Sigmoid(r) => {
            let (run, grad) = binary_grad_run(r, &BinaryConfig::from_configuration(initial)?, topology, steps)?;
            let tau = run[steps].p_black();
            let phi = goal.symbol_probs(1);
            let e = binary_cross_entropy(&phi, tau)?;
            let mut out = vec![0.0; grad.patterns()];
            for (g, (&phi, &tau)) in phi.iter().zip(tau).enumerate() {
                let mut coef = 0.0;
                if phi != 0.0 {
                    coef -= phi / floored(tau);
                }
                if phi != 1.0 {
                    coef += (1.0 - phi) / floored(1.0 - tau);
                }
                for (o, &d) in out.iter_mut().zip(grad.row(g)) {
                    *o += coef * d;
                }
            }
            Ok((e, out))
        }
    }
}

/// Sum of [`loss_gradient`] over a batch, accumulated in batch order.
pub fn batch_loss_gradient(
    rule: &DcaRule,
    batch: &[Configuration],
    topology: &Topology,
    steps: usize,
    target: &TargetSpec,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(DcaError::invalid("batch is empty"));
    }
    let mut total = 0.0;
    let mut acc: Vec<f64> = Vec::new();
    for x in batch {
        let (e, g) = loss_gradient(rule, x, topology, steps, target)?;
        total += e;
        if acc.is_empty() {
            acc = g;
        } else {
            acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
    }
    Ok((total, acc))
}
