use crate::error::{Error, Result};

/// Point-to-point Euclidean distance. Both series must have the same length.
pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySeries);
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let x = [0.1, 7.0, 3.3];
        assert_eq!(euclidean(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn three_four_five() {
        assert_eq!(euclidean(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
    }

    #[test]
    fn length_mismatch() {
        let err = euclidean(&[1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(err.to_string().contains("length mismatch"));
    }
}
