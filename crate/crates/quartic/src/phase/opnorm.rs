use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::operator::LinearOp;
use crate::spectral::{ComplexField, Rep};
use crate::{Error, Result};

pub const POWER_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
    pub relative_change: f64,
    pub converged: bool,
}

/// Largest singular value of `op` by power iteration on `A*A`.
///
/// Starts from a ChaCha8 random field seeded with [`POWER_SEED`]. Stops when
/// the relative change of the estimate drops to `tol` or after `iters` rounds.
pub fn op_norm_estimate(op: &dyn LinearOp, iters: usize, tol: f64) -> Result<NormEstimate> {
    op_norm_estimate_seeded(op, iters, tol, POWER_SEED)
}

pub fn op_norm_estimate_seeded(
    op: &dyn LinearOp,
    iters: usize,
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    if iters == 0 {
        return Err(Error::param("power iteration needs at least one round"));
    }
    let grid = *op.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = ComplexField::from_position_fn(grid, |_| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let n0 = v.norm();
    v = v.scale(Complex64::new(1.0 / n0, 0.0));

    let mut estimate = 0.0;
    let mut change = f64::INFINITY;
    for it in 1..=iters {
        let av = op.apply(&v)?;
        let next = av.norm();
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("power iteration round {it}")));
        }
        let w = op.apply_adjoint(&av)?.into_rep(Rep::Position);
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(NormEstimate { norm: next, iterations: it, relative_change: 0.0, converged: true });
        }
        change = if estimate > 0.0 { (next - estimate).abs() / next } else { f64::INFINITY };
        estimate = next;
        if change <= tol {
            return Ok(NormEstimate { norm: estimate, iterations: it, relative_change: change, converged: true });
        }
        v = w.scale(Complex64::new(1.0 / wn, 0.0));
    }
    Ok(NormEstimate { norm: estimate, iterations: iters, relative_change: change, converged: false })
}
