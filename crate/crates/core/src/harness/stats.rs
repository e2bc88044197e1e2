//! Paired significance tests over per-run costs.

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Significance {
    /// Two-sided paired t-test p-value.
    pub p_value: f64,
    /// `None` when the differences have zero variance.
    pub t_statistic: Option<f64>,
    /// Zero-variance differences with a nonzero mean; `p_value` is set to 0.
    pub degenerate: bool,
    /// Every difference is exactly zero.
    pub no_difference: bool,
}

fn check_pairs(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("paired test needs at least 2 pairs".into()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("paired test inputs must be finite".into()));
    }
    Ok(())
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<Significance> {
    check_pairs(a, b)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        let zero = mean == 0.0;
        return Ok(Significance {
            p_value: if zero { 1.0 } else { 0.0 },
            t_statistic: None,
            degenerate: !zero,
            no_difference: zero,
        });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| Error::Logic(e.to_string()))?;
    Ok(Significance {
        p_value: (2.0 * dist.sf(t.abs())).min(1.0),
        t_statistic: Some(t),
        degenerate: false,
        no_difference: false,
    })
}

/// Two-sided paired t-test p-value of `a - b`.
pub fn paired_significance(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(paired_t_test(a, b)?.p_value)
}

/// Two-sided exact sign test; zero differences are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pairs(a, b)?;
    let above = a.iter().zip(b).filter(|(x, y)| x > y).count() as u64;
    let below = a.iter().zip(b).filter(|(x, y)| x < y).count() as u64;
    let n = above + below;
    if n == 0 {
        return Ok(1.0);
    }
    let dist = Binomial::new(0.5, n).map_err(|e| Error::Logic(e.to_string()))?;
    Ok((2.0 * dist.cdf(above.min(below))).min(1.0))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn identical_vectors() {
        let a = [3.0, 1.0, 4.0];
        let s = paired_t_test(&a, &a).unwrap();
        assert_eq!(s.p_value, 1.0);
        assert!(s.no_difference && !s.degenerate);
    }

    #[test]
    fn alternating_differences_give_t_zero() {
        let a = [1.0, 0.0, 1.0, 0.0];
        let b = [0.0, 1.0, 0.0, 1.0];
        let s = paired_t_test(&a, &b).unwrap();
        assert_eq!(s.t_statistic, Some(0.0));
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn constant_shift_is_degenerate() {
        let s = paired_t_test(&[2.0, 3.0], &[1.0, 2.0]).unwrap();
        assert_eq!(s.p_value, 0.0);
        assert!(s.degenerate);
    }

    #[test]
    fn reference_values() {
        // scipy.stats.ttest_rel([3,5,4,6,8], [1,2,2,3,9])
        let s = paired_t_test(&[3.0, 5.0, 4.0, 6.0, 8.0], &[1.0, 2.0, 2.0, 3.0, 9.0]).unwrap();
        assert_abs_diff_eq!(s.t_statistic.unwrap(), 2.4494897427831783, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_value, 0.07048399691021993, epsilon = 1e-9);
    }

    #[test]
    fn sign_test_reference() {
        // scipy.stats.binomtest(8, 10) and binomtest(1, 7)
        let a: Vec<f64> = (0..10).map(|i| if i < 8 { 1.0 } else { -1.0 }).collect();
        assert_abs_diff_eq!(sign_test(&a, &[0.0; 10]).unwrap(), 0.109375, epsilon = 1e-12);
        let a = [1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 0.0];
        assert_abs_diff_eq!(sign_test(&a, &[0.0; 8]).unwrap(), 0.125, epsilon = 1e-12);
        assert_eq!(sign_test(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn length_checks() {
        assert!(matches!(paired_significance(&[1.0, 2.0], &[1.0]), Err(Error::Dimension { .. })));
        assert!(paired_significance(&[1.0], &[1.0]).is_err());
    }
}
