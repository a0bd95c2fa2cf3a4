use super::FieldError;

/// Degree-`a` probabilists' Hermite polynomial scaled to unit norm under the
/// standard normal law.
pub fn hermite_orthonormal(a: u32, x: f64) -> Result<f64, FieldError> {
    if a == 0 {
        return Err(FieldError::HermiteOrderZero);
    }
    let mut table = vec![0.0; a as usize + 1];
    hermite_table(x, &mut table);
    Ok(table[a as usize])
}

/// Fills `out[k] = h_k(x)` for `k = 0..out.len()`, with `h_0 = 1`.
///
/// Uses `h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k + 1)`.
pub fn hermite_table(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + 1.0).sqrt();
    }
}
