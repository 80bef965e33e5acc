//! Evaluation and agreement statistics: accuracy, macro F1, Pearson
//! correlation over ordinal labels, weighted Cohen's kappa, and Welch's
//! t-test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
    pub pearson: f64,
    pub confusion: Vec<Vec<u64>>,
    pub n: usize,
}

/// Exact-match accuracy, per-class F1 (0/0 counts as 0), macro F1, and
/// Pearson correlation of the labels treated as integers. `num_classes`
/// fixes the label domain; classes absent from both sides still contribute
/// an F1 of 0 to the macro average.
pub fn evaluate(gold: &[u8], pred: &[u8], num_classes: usize) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::validation("evaluate: empty label lists"));
    }
    if gold.len() != pred.len() {
        return Err(Error::validation(format!(
            "evaluate: length mismatch ({} gold vs {} predicted)",
            gold.len(),
            pred.len()
        )));
    }
    for &l in gold.iter().chain(pred.iter()) {
        if (l as usize) >= num_classes {
            return Err(Error::validation(format!(
                "evaluate: label {l} out of range for {num_classes} classes"
            )));
        }
    }

    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    for (&g, &p) in gold.iter().zip(pred.iter()) {
        confusion[g as usize][p as usize] += 1;
    }
    let correct: u64 = confusion.iter().enumerate().map(|(c, row)| row[c]).sum();
    let n = gold.len();

    let mut per_class_f1 = Vec::with_capacity(num_classes);
    #[allow(clippy::needless_range_loop)]
    for c in 0..num_classes {
        let tp = confusion[c][c] as f64;
        let gold_c: u64 = confusion[c].iter().sum();
        let pred_c: u64 = (0..num_classes).map(|g| confusion[g][c]).sum();
        let denom = gold_c as f64 + pred_c as f64;
        // F1 = 2tp / (gold_c + pred_c); 0/0 -> 0 by convention.
        per_class_f1.push(if denom == 0.0 { 0.0 } else { 2.0 * tp / denom });
    }
    let macro_f1 = per_class_f1.iter().sum::<f64>() / num_classes as f64;

    let xs: Vec<f64> = gold.iter().map(|&v| v as f64).collect();
    let ys: Vec<f64> = pred.iter().map(|&v| v as f64).collect();
    let pearson = pearson_correlation(&xs, &ys);

    Ok(EvalReport {
        accuracy: correct as f64 / n as f64,
        macro_f1,
        per_class_f1,
        pearson,
        confusion,
        n,
    })
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaWeighting {
    Linear,
    Quadratic,
}

/// Weighted Cohen's kappa over labels in {0..4}.
///
/// kappa = 1 - sum(w * O) / sum(w * E) with disagreement weights
/// w_ij = |i-j|/4 (linear) or (i-j)^2/16 (quadratic) and E from the product
/// of the raters' marginals. Two constant, equal raters have zero expected
/// disagreement and get kappa = 1 by convention.
pub fn weighted_kappa(labels_a: &[u8], labels_b: &[u8], weighting: KappaWeighting) -> Result<f64> {
    const K: usize = 5;
    if labels_a.is_empty() || labels_a.len() != labels_b.len() {
        return Err(Error::validation(
            "weighted_kappa: label lists must be nonempty and equal length",
        ));
    }
    for &l in labels_a.iter().chain(labels_b.iter()) {
        if (l as usize) >= K {
            return Err(Error::validation(format!(
                "weighted_kappa: label {l} out of range"
            )));
        }
    }
    let n = labels_a.len() as f64;
    let mut observed = [[0.0f64; K]; K];
    let mut marg_a = [0.0f64; K];
    let mut marg_b = [0.0f64; K];
    for (&a, &b) in labels_a.iter().zip(labels_b.iter()) {
        observed[a as usize][b as usize] += 1.0;
        marg_a[a as usize] += 1.0;
        marg_b[b as usize] += 1.0;
    }
    let weight = |i: usize, j: usize| -> f64 {
        let d = (i as f64 - j as f64).abs();
        match weighting {
            KappaWeighting::Linear => d / (K - 1) as f64,
            KappaWeighting::Quadratic => d * d / ((K - 1) * (K - 1)) as f64,
        }
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..K {
        for j in 0..K {
            let e = marg_a[i] * marg_b[j] / n;
            num += weight(i, j) * observed[i][j];
            den += weight(i, j) * e;
        }
    }
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - num / den)
}

/// Welch's t-test: statistic, Welch-Satterthwaite degrees of freedom, and a
/// two-sided p-value via the regularized incomplete beta function.
pub fn welch_t(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64)> {
    let stats = |s: &[f64]| -> Result<(f64, f64, f64)> {
        if s.len() < 2 {
            return Err(Error::validation("welch_t: samples need at least 2 values"));
        }
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Ok((n, mean, var))
    };
    let (na, ma, va) = stats(sample_a)?;
    let (nb, mb, vb) = stats(sample_b)?;
    if va == 0.0 && vb == 0.0 {
        return Err(Error::validation(
            "welch_t: both samples have zero variance",
        ));
    }
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let p = if t == 0.0 {
        1.0
    } else {
        // Two-sided: p = I_{df/(df+t^2)}(df/2, 1/2).
        regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    };
    Ok((t, p.clamp(0.0, 1.0)))
}

/// Regularized incomplete beta function I_x(a, b) by the Lentz continued
/// fraction, with the symmetry transform for convergence.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
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
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation of ln(Gamma(x)) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for c in COEFFS {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}
