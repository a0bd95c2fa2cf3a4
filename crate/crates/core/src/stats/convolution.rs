use serde::{Deserialize, Serialize};

use super::empirical::{ecf, EmpiricalDist};
use super::sums::{replicate_stats, StatisticKind};
use super::StatsError;
use crate::fields::{FieldSpec, Window};
use crate::limitlaw::{cf_product_normals, CfGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionReport {
    pub composite: CfGrid,
    pub g: CfGrid,
    pub h: CfGrid,
    /// `max_t |phi_(g+h) - phi_g phi_h|` on the empirical cfs.
    pub product_gap: f64,
    /// Closed-form limit cf of the composite, when both parts have one.
    pub closed_form: Option<CfGrid>,
    /// `max_t |phi_(g+h) - closed form|`.
    pub closed_form_gap: Option<f64>,
}

/// Limit cf of the partial sums of a built-in field, where known in closed form.
pub fn limit_cf(spec: &FieldSpec, d: usize, t: f64) -> Option<f64> {
    match spec {
        FieldSpec::Zero => Some(1.0),
        FieldSpec::Iid { .. } => Some((-0.5 * t * t).exp()),
        FieldSpec::ProductIid { .. } => cf_product_normals(t, d).ok(),
        FieldSpec::SignFlip { .. } => cf_product_normals(t, 2).ok(),
        FieldSpec::Chaos { tensor, .. } if tensor.entries.len() == 1 => {
            cf_product_normals(tensor.entries[0].lambda * t, d).ok()
        }
        _ => None,
    }
}

/// Compares the cf of `g + h` sums with the product of the separate cfs.
pub fn convolution_check(
    g: &FieldSpec,
    h: &FieldSpec,
    window: &Window,
    replicates: usize,
    seed: u64,
    t_grid: &[f64],
) -> Result<ConvolutionReport, StatsError> {
    let composite = FieldSpec::composite(g.clone(), h.clone());
    composite.validate()?;
    let c = replicate_stats(&composite, window, StatisticKind::PartialSum, replicates, seed)?;
    convolution_from_composite(g, h, window, &c.dist, seed, t_grid)
}

/// As [`convolution_check`], reusing already computed composite sums.
pub fn convolution_from_composite(
    g: &FieldSpec,
    h: &FieldSpec,
    window: &Window,
    composite: &EmpiricalDist,
    seed: u64,
    t_grid: &[f64],
) -> Result<ConvolutionReport, StatsError> {
    FieldSpec::composite(g.clone(), h.clone()).validate()?;
    let replicates = composite.count();
    let run = |spec: &FieldSpec| -> Result<CfGrid, StatsError> {
        let rep = replicate_stats(spec, window, StatisticKind::PartialSum, replicates, seed)?;
        Ok(ecf(&rep.dist, t_grid))
    };
    let c = ecf(composite, t_grid);
    let eg = run(g)?;
    let eh = run(h)?;
    let product_gap = c.max_gap(&eg.product(&eh));
    let d = window.dim();
    let closed: Option<Vec<f64>> = t_grid
        .iter()
        .map(|&t| Some(limit_cf(g, d, t)? * limit_cf(h, d, t)?))
        .collect();
    let closed_form = closed.map(|v| CfGrid::new(t_grid.to_vec(), v));
    let closed_form_gap = closed_form.as_ref().map(|cf| c.max_gap(cf));
    Ok(ConvolutionReport {
        composite: c,
        g: eg,
        h: eh,
        product_gap,
        closed_form,
        closed_form_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Driver, FieldError};

    #[test]
    fn zero_parts() {
        let t = CfGrid::linspace(0.0, 3.0, 7);
        let w = Window::square(32);
        let g = FieldSpec::product_iid();
        let rep = convolution_check(&g, &FieldSpec::Zero, &w, 200, 1, &t).unwrap();
        assert_eq!(rep.composite.cf_values, rep.g.cf_values);
        assert_eq!(rep.product_gap, 0.0);
        let iid = FieldSpec::iid(Driver::Gaussian);
        let rep = convolution_check(&FieldSpec::Zero, &iid, &w, 2000, 2, &t).unwrap();
        assert!(rep.closed_form_gap.unwrap() < 0.08);
    }

    #[test]
    fn shared_streams_rejected() {
        let t = [1.0];
        let w = Window::square(4);
        let err = convolution_check(
            &FieldSpec::product_iid(),
            &FieldSpec::iid(Driver::Gaussian),
            &w,
            10,
            0,
            &t,
        )
        .unwrap_err();
        assert_eq!(err, StatsError::Field(FieldError::SharedStreams(0)));
    }
}
