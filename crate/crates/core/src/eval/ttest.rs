//! Paired Student's t-test with a self-contained t distribution.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub df: usize,
    /// Two-sided p-value.
    pub p: f64,
    pub mean_difference: f64,
}

impl fmt::Display for PairedTTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={:.4} df={} p={:.4}", self.t, self.df, self.p)
    }
}

/// Tests whether the mean of `a[i] - b[i]` differs from zero.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Domain(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let df = n - 1;
    // Differences equal up to rounding (0.7 - 0.6 vs 0.8 - 0.7) count as
    // constant.
    let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if var.sqrt() <= 64.0 * f64::EPSILON * scale {
        if mean == 0.0 {
            return Ok(PairedTTest {
                t: 0.0,
                df,
                p: 1.0,
                mean_difference: 0.0,
            });
        }
        return Err(Error::DegenerateVariance { mean });
    }
    let t = mean / (var.sqrt() / nf.sqrt());
    Ok(PairedTTest {
        t,
        df,
        p: two_sided_p(t, df as f64),
        mean_difference: mean,
    })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Lanczos approximation (g = 7, n = 9) of `ln Γ(x)` for `x > 0`.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `I_x(a, b)` by Lentz's continued fraction, using the symmetry
/// `I_x(a, b) = 1 − I_{1−x}(b, a)` where it converges faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Parses one sample per line; blank lines and `#` comments are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Format {
                line: i + 1,
                message: format!("not a number: {:?}", l.trim()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn identical_samples() {
        let a = [0.7, 0.8, 0.75];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
    }

    #[test]
    fn symmetric_differences() {
        let r = paired_t_test(&[1.0, -1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_through_five() {
        let r = paired_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).unwrap();
        let t = 3.0 * 5f64.sqrt() / 2.5f64.sqrt();
        assert!((r.t - t).abs() < 1e-12);
        assert_eq!(r.df, 4);
        let reference = 2.0 * StudentsT::new(0.0, 1.0, 4.0).unwrap().sf(t);
        assert!((r.p - reference).abs() < 1e-8);
        assert!((r.p - 0.0132).abs() < 1e-3);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(
            paired_t_test(&[2.0, 3.0], &[1.0, 2.0]),
            Err(Error::DegenerateVariance { .. })
        ));
        assert!(matches!(
            paired_t_test(&[0.7, 0.8], &[0.6, 0.7]),
            Err(Error::DegenerateVariance { .. })
        ));
        assert!(paired_t_test(&[1.0], &[0.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn incomplete_beta_edges() {
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 0.5), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 0.5), 1.0);
        // I_x(1, 1) = x
        assert!((regularized_incomplete_beta(0.3, 1.0, 1.0) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn sample_files() {
        assert_eq!(parse_samples("# seed accuracies\n0.5\n\n0.75\n").unwrap(), vec![0.5, 0.75]);
        assert!(matches!(parse_samples("0.5\nabc\n"), Err(Error::Format { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn p_value_matches_reference(t in -8.0f64..8.0, df in 1usize..60) {
            let reference = 2.0 * StudentsT::new(0.0, 1.0, df as f64).unwrap().sf(t.abs());
            prop_assert!((two_sided_p(t, df as f64) - reference).abs() < 1e-8);
        }

        #[test]
        fn antisymmetric(a in prop::collection::vec(-1.0f64..1.0, 3..12), shift in -0.5f64..0.5) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x * 0.5 + shift + 0.01 * i as f64).collect();
            let ab = paired_t_test(&a, &b).unwrap();
            let ba = paired_t_test(&b, &a).unwrap();
            prop_assert!((ab.t + ba.t).abs() < 1e-12 * ab.t.abs().max(1.0));
            prop_assert!((ab.p - ba.p).abs() < 1e-12);
        }
    }
}
