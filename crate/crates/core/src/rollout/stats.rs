//! Welch's unequal-variance t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
}

impl WelchResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Stat(format!(
            "each group needs at least 2 values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Stat("non-finite value".into()));
    }
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    if var_a == 0.0 && var_b == 0.0 {
        return Err(Error::Stat("both groups have zero variance".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (var_a / na, var_b / nb);
    let se2 = sa + sb;
    let t = (mean_a - mean_b) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Stat(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchResult {
        t,
        df,
        p,
        n_a: a.len(),
        n_b: b.len(),
        mean_a,
        mean_b,
        var_a,
        var_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups() {
        let r = welch_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn shifted_groups_reference_values() {
        let r = welch_t(&[1.0, 2.0, 3.0], &[11.0, 12.0, 13.0]).unwrap();
        assert!((r.t + 12.24744871391589).abs() < 1e-9);
        assert!((r.df - 4.0).abs() < 1e-9);
        assert!((r.p - 0.00025521674944192687).abs() < 1e-9);
        assert!(r.significant(0.01));
    }

    #[test]
    fn fixed_vectors_reference_values() {
        let r = welch_t(&[0.1, 0.2, 0.15, 0.18], &[0.05, 0.07, 0.06, 0.08]).unwrap();
        assert!((r.t - 4.077686888957082).abs() < 1e-9);
        assert!((r.df - 3.5245623832540587).abs() < 1e-9);
        assert!((r.p - 0.0194809399124638).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(matches!(welch_t(&[1.0], &[1.0, 2.0]), Err(Error::Stat(_))));
        assert!(matches!(welch_t(&[1.0, 1.0], &[2.0, 2.0]), Err(Error::Stat(_))));
        let r = welch_t(&[1.0, 1.0], &[2.0, 3.0]).unwrap();
        assert!((r.df - 1.0).abs() < 1e-12);
    }
}
