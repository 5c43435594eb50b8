use super::EstimatorError;

/// Maximum marking: refine `{η_K > tol_r·η_max}`, coarsen `{η_K < tol_c·η_max}`.
pub fn mark(
    eta: &[f64],
    eta_max: f64,
    tol_r: f64,
    tol_c: f64,
) -> Result<(Vec<usize>, Vec<usize>), EstimatorError> {
    if !(0.0 < tol_c && tol_c < tol_r && tol_r < 1.0) {
        return Err(EstimatorError::MarkingFractions { tol_r, tol_c });
    }
    if !(eta_max > 0.0) {
        return Ok((Vec::new(), Vec::new()));
    }
    let hi = tol_r * eta_max;
    let lo = tol_c * eta_max;
    let refine = (0..eta.len()).filter(|&k| eta[k] > hi).collect();
    let coarsen = (0..eta.len()).filter(|&k| eta[k] < lo).collect();
    Ok((refine, coarsen))
}
