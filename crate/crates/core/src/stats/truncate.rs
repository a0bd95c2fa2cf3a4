use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::fields::{Driver, FieldSpec, Truncation};

/// The truncated field `f_C = g - E_x g - E_y g + E_xy g`, `g = f 1{|f| <= C}`.
pub fn truncate_fc(spec: &FieldSpec, c: f64) -> Result<FieldSpec, StatsError> {
    let out = FieldSpec::Truncated {
        base: Box::new(spec.clone()),
        c,
    };
    out.validate()?;
    Ok(out)
}

/// Numerical diagnostics for one truncation level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationCheck {
    pub c: f64,
    /// Largest `|E_x f_C|` or `|E_y f_C|` over the probe points.
    pub martingale_residual: f64,
    /// `||f - f_C||_2`.
    pub gap_norm: f64,
    /// `||f 1{|f| > C}||_2`.
    pub tail_norm: f64,
    /// Largest `|f_C|` over the probe points, to compare with `4C`.
    pub sup_probe: f64,
    /// Change under a hundredfold tighter quadrature tolerance.
    pub convergence_gap: f64,
}

impl TruncationCheck {
    pub fn bound_holds(&self) -> bool {
        self.gap_norm <= 4.0 * self.tail_norm + 1e-12
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.martingale_residual <= tol && self.bound_holds() && self.sup_probe <= 4.0 * self.c + 1e-12
    }
}

const PROBES: [f64; 9] = [-3.7, -2.2, -1.1, -0.4, 0.0, 0.35, 1.3, 2.05, 4.1];

pub fn truncation_check(spec: &FieldSpec, c: f64) -> Result<TruncationCheck, StatsError> {
    truncate_fc(spec, c)?;
    let t = Truncation::from_spec(spec, c)?;
    let probes: Vec<f64> = match t.cell().driver() {
        Driver::Gaussian => PROBES.to_vec(),
        Driver::Rademacher => vec![-1.0, 1.0],
    };
    let signs: &[f64] = if t.cell().uses_sign() { &[1.0, -1.0] } else { &[1.0] };
    let mut residual: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for &s in signs {
        for &p in &probes {
            residual = residual
                .max(t.residual_given_y(p, s).abs())
                .max(t.residual_given_x(p, s).abs());
            for &q in &probes {
                sup = sup.max(t.value(p, q, s).abs());
            }
        }
    }
    Ok(TruncationCheck {
        c,
        martingale_residual: residual,
        gap_norm: t.gap_norm(),
        tail_norm: t.tail_norm(),
        sup_probe: sup,
        convergence_gap: t.convergence_gap(),
    })
}

/// `||E[f | F_(inf, -l) v I_1]||_2` for the built-in fields where the
/// conditioning algebra is known.
///
/// The i.i.d. field is independent of every strict past, so the norm is 0
/// for `l >= 1` and `||f||` at `l = 0`. For the product, chaos and sign-flip
/// fields the invariant algebra of the first shift contains every
/// second-axis driver (and the coin), while the first-axis drivers are all
/// in `F_(inf, -l)`; the join is everything and the norm is `||f||`.
pub fn queue_condition_norm(spec: &FieldSpec, ell: u64) -> Result<f64, StatsError> {
    spec.validate()?;
    match spec {
        FieldSpec::Iid { .. } => Ok(if ell == 0 { spec.cell_variance().sqrt() } else { 0.0 }),
        FieldSpec::Zero => Ok(0.0),
        FieldSpec::ProductIid { .. } | FieldSpec::Chaos { .. } | FieldSpec::SignFlip { .. } => {
            Ok(spec.cell_variance().sqrt())
        }
        FieldSpec::Composite { .. } | FieldSpec::Truncated { .. } => Err(StatsError::Unsupported(
            "conditioning algebra not identified for composite or truncated fields".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{CoeffTensor, FieldError};

    #[test]
    fn signflip_unchanged() {
        let chk = truncation_check(&FieldSpec::sign_flip(), 1.0).unwrap();
        assert!(chk.gap_norm < 1e-12);
        assert!(chk.martingale_residual < 1e-12);
        assert!(chk.passes(1e-8));
    }

    #[test]
    fn product_levels() {
        let checks: Vec<_> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&c| truncation_check(&FieldSpec::product_iid(), c).unwrap())
            .collect();
        for chk in &checks {
            assert!(chk.passes(1e-8), "{chk:?}");
            assert!(chk.convergence_gap < 1e-9);
        }
        assert!(checks.windows(2).all(|w| w[1].gap_norm < w[0].gap_norm));
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            truncate_fc(&FieldSpec::product_iid(), 0.0),
            Err(StatsError::Field(FieldError::BadTruncation(_)))
        ));
        let t3 = CoeffTensor::new(3, vec![(vec![1, 1, 1], 1.0)]).unwrap();
        assert!(truncate_fc(&FieldSpec::chaos(t3), 1.0).is_err());
        assert!(truncate_fc(&FieldSpec::product_iid(), 3.0).is_ok());
    }

    #[test]
    fn queue_norms() {
        let iid = FieldSpec::iid(Driver::Gaussian);
        assert_eq!(queue_condition_norm(&iid, 1).unwrap(), 0.0);
        assert_eq!(queue_condition_norm(&iid, 0).unwrap(), 1.0);
        assert_eq!(queue_condition_norm(&FieldSpec::sign_flip(), 3).unwrap(), 1.0);
        assert_eq!(queue_condition_norm(&FieldSpec::product_iid(), 5).unwrap(), 1.0);
        let comp = FieldSpec::composite(FieldSpec::product_iid(), iid.on_stream(1));
        assert!(queue_condition_norm(&comp, 1).is_err());
    }
}
