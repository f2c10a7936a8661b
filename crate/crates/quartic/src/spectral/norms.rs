use super::field::{ComplexField, Rep};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    Sup,
    /// `‖⟨x⟩^σ f‖₂`
    WeightSigma(f64),
    /// `Σ |x| |f|² dx`
    AbsXMoment,
}

pub fn norms_and_moments(f: &ComplexField, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::L2 => Ok(f.norm()),
        NormKind::Sup => {
            f.expect_rep(Rep::Position)?;
            Ok(f.samples().iter().map(|z| z.norm()).fold(0.0, f64::max))
        }
        NormKind::WeightSigma(sigma) => {
            if !(sigma >= 0.0) {
                return Err(Error::param(format!("weight exponent {sigma} must be >= 0")));
            }
            f.expect_rep(Rep::Position)?;
            let w = f.grid().map_positions(|x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (1.0 + r2).powf(sigma)
            });
            let s: f64 = f.samples().iter().zip(&w).map(|(z, w)| w * z.norm_sqr()).sum();
            Ok((s * f.grid().cell_volume()).sqrt())
        }
        NormKind::AbsXMoment => {
            f.expect_rep(Rep::Position)?;
            let r = f.grid().map_positions(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt());
            let s: f64 = f.samples().iter().zip(&r).map(|(z, r)| r * z.norm_sqr()).sum();
            Ok(s * f.grid().cell_volume())
        }
    }
}
