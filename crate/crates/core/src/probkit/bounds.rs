use super::ProbError;

fn check(name: &'static str, value: f64) -> Result<(), ProbError> {
    if value.is_nan() || value < 0.0 || value.is_infinite() {
        return Err(ProbError::NegativeInput { name, value });
    }
    Ok(())
}

/// Upper-tail Chernoff bound for a sum of independent Bernoulli variables
/// with mean `mu`: P[X ≥ μ + t] ≤ exp(−t² / (2μ + 2t/3)).
pub fn chernoff_upper(mu: f64, t: f64) -> Result<f64, ProbError> {
    check("mu", mu)?;
    check("t", t)?;
    if mu == 0.0 && t == 0.0 {
        return Ok(1.0);
    }
    Ok((-t * t / (2.0 * mu + 2.0 * t / 3.0)).exp())
}

/// Lower-tail Chernoff bound: P[X ≤ μ − t] ≤ exp(−t² / (2μ)).
pub fn chernoff_lower(mu: f64, t: f64) -> Result<f64, ProbError> {
    check("mu", mu)?;
    check("t", t)?;
    if mu == 0.0 {
        return Ok(if t == 0.0 { 1.0 } else { 0.0 });
    }
    Ok((-t * t / (2.0 * mu)).exp())
}
