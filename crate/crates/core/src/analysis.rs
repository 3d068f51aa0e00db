//! Curve fitting and post-processing: linear-fractional fits, critical-point
//! scans, order-parameter exponent diagnostics and Savitzky–Golay
//! derivatives.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// Result of fitting `ρ(α) = (1 − c1·α)/(1 − c2·α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub c1: f64,
    pub c2: f64,
    /// `1/c1`, the zero of the numerator.
    pub alpha_c: f64,
    /// Root mean square of `ρ − fitted ρ` over the input points.
    pub residual_rms: f64,
    /// Residual variance times the diagonal of the inverse normal matrix of
    /// the linearized problem. A dispersion proxy, not a confidence interval.
    pub c1_var: f64,
    pub c2_var: f64,
    /// True when the two regressors are collinear, which happens for
    /// constant data; the reported coefficients are then the minimum-norm
    /// solution and `c1 = c2`.
    pub degenerate: bool,
}

impl FitResult {
    pub fn predict(&self, alpha: f64) -> f64 {
        (1.0 - self.c1 * alpha) / (1.0 - self.c2 * alpha)
    }

    /// Dispersion proxy for `alpha_c`, propagated from `c1_var`.
    pub fn alpha_c_spread(&self) -> f64 {
        self.c1_var.sqrt() / (self.c1 * self.c1)
    }
}

/// Least squares on the linearized identity `1 − ρ = c1·α − c2·α·ρ`.
pub fn fit_linear_fractional(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(a, r)) = points.iter().find(|(a, r)| !a.is_finite() || !r.is_finite() || *r <= 0.0) {
        return Err(Error::InvalidInput(format!("point ({a}, {r}) is not usable (ρ must be positive)")));
    }
    let mut alphas: Vec<f64> = points.iter().map(|p| p.0).collect();
    alphas.sort_by(f64::total_cmp);
    if alphas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("α values must be distinct".into()));
    }
    let mut ata = Matrix2::<f64>::zeros();
    let mut atb = Vector2::<f64>::zeros();
    for &(a, r) in points {
        let row = Vector2::new(a, -a * r);
        ata += row * row.transpose();
        atb += row * (1.0 - r);
    }
    let scale = ata.abs().max();
    if scale == 0.0 {
        return Err(Error::Singular("all α are zero".into()));
    }
    let det = ata.determinant();
    let degenerate = det.abs() <= 1e-12 * scale * scale;
    let c = if degenerate {
        ata.svd(true, true)
            .solve(&atb, 1e-12 * scale)
            .map_err(|e| Error::Singular(e.to_string()))?
    } else {
        ata.lu()
            .solve(&atb)
            .ok_or_else(|| Error::Singular("normal matrix".into()))?
    };
    let (c1, c2) = (c[0], c[1]);
    let n = points.len() as f64;
    let mut rss_lin = 0.0;
    let mut rss = 0.0;
    for &(a, r) in points {
        let lin = (1.0 - r) - (c1 * a - c2 * a * r);
        rss_lin += lin * lin;
        let d = r - (1.0 - c1 * a) / (1.0 - c2 * a);
        rss += d * d;
    }
    let sigma2 = rss_lin / (n - 2.0).max(1.0);
    let (c1_var, c2_var) = match ata.try_inverse() {
        Some(inv) if !degenerate => (sigma2 * inv[(0, 0)], sigma2 * inv[(1, 1)]),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    Ok(FitResult {
        c1,
        c2,
        alpha_c: 1.0 / c1,
        residual_rms: (rss / n).sqrt(),
        c1_var,
        c2_var,
        degenerate,
    })
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Which side of the candidate critical point the data lie on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanSide {
    /// Points with `α < α0`, ratio `ρ/(α0 − α)`.
    Below,
    /// Points with `α > α0`, ratio `χ/(α − α0)`.
    Above,
}

/// Minimum number of usable points for a candidate to be scored.
pub const MIN_SCAN_POINTS: usize = 5;
/// Fraction of usable points, nearest the candidate, used for the slope.
pub const END_FRACTION: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    /// `(α0, score)` per grid value; `None` when too few points were usable.
    pub scores: Vec<(f64, Option<f64>)>,
    /// Grid value with the smallest score.
    pub best: Option<f64>,
    /// Neighbouring grid values around `best`.
    pub bracket: Option<(f64, f64)>,
}

fn end_window(len: usize) -> usize {
    ((len as f64 * END_FRACTION).ceil() as usize).clamp(2, len)
}

/// Scores each candidate `α0` by the absolute end-segment slope of the ratio
/// curve. Only points with a positive value on the chosen side are used.
pub fn critical_scan(points: &[(f64, f64)], grid: &[f64], side: ScanSide) -> ScanResult {
    let mut sorted: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(a, v)| a.is_finite() && v.is_finite() && *v > 0.0)
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scores: Vec<(f64, Option<f64>)> = grid
        .iter()
        .map(|&a0| {
            let mut usable: Vec<(f64, f64)> = sorted
                .iter()
                .filter(|(a, _)| match side {
                    ScanSide::Below => *a < a0,
                    ScanSide::Above => *a > a0,
                })
                .map(|&(a, v)| (a, v / (a - a0).abs()))
                .collect();
            if usable.len() < MIN_SCAN_POINTS {
                return (a0, None);
            }
            // nearest to α0 last
            if side == ScanSide::Above {
                usable.reverse();
            }
            let tail = &usable[usable.len() - end_window(usable.len())..];
            let x: Vec<f64> = tail.iter().map(|p| p.0).collect();
            let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
            (a0, Some(ols_slope(&x, &y).abs()))
        })
        .collect();
    let best_idx = scores
        .iter()
        .enumerate()
        .filter_map(|(i, (_, s))| s.map(|s| (i, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    let best = best_idx.map(|i| scores[i].0);
    let bracket = best_idx.map(|i| {
        let lo = if i > 0 { scores[i - 1].0 } else { scores[i].0 };
        let hi = scores.get(i + 1).map_or(scores[i].0, |s| s.0);
        (lo.min(hi), lo.max(hi))
    });
    ScanResult { scores, best, bracket }
}

/// One β candidate of [`beta_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct BetaCurve {
    pub beta: f64,
    /// `(−log(α_c − α), log ρ − β·log(α_c − α))`, ordered towards `α_c`.
    pub curve: Vec<(f64, f64)>,
    /// OLS slope over the end window nearest `α_c`; `NaN` with fewer than
    /// two points.
    pub end_slope: f64,
}

/// The transformed curves `log ρ − β·log(α_c − α)` against `−log(α_c − α)`;
/// the right exponent makes the curve flat as `α → α_c`.
pub fn beta_scan(points: &[(f64, f64)], alpha_c: f64, betas: &[f64]) -> Vec<BetaCurve> {
    let mut usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(a, r)| *a < alpha_c && *r > 0.0)
        .collect();
    usable.sort_by(|a, b| a.0.total_cmp(&b.0));
    betas
        .iter()
        .map(|&beta| {
            let curve: Vec<(f64, f64)> = usable
                .iter()
                .map(|&(a, r)| {
                    let l = (alpha_c - a).ln();
                    (-l, r.ln() - beta * l)
                })
                .collect();
            let end_slope = if curve.len() < 2 {
                f64::NAN
            } else {
                let tail = &curve[curve.len() - end_window(curve.len())..];
                let x: Vec<f64> = tail.iter().map(|p| p.0).collect();
                let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
                ols_slope(&x, &y)
            };
            BetaCurve { beta, curve, end_slope }
        })
        .collect()
}

/// Derivative estimates from local least-squares polynomials of `degree`
/// over `window` consecutive points. Interior points use the centred
/// window; points within half a window of either end use the first or last
/// full window, evaluated at the point itself.
pub fn savgol_derivative(xs: &[f64], ys: &[f64], window: usize, degree: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("abscissae and values differ in length".into()));
    }
    if window.is_multiple_of(2) || window < degree + 1 {
        return Err(Error::InvalidInput(format!(
            "window {window} must be odd and at least degree + 1 = {}",
            degree + 1
        )));
    }
    let n = ys.len();
    if n < window {
        return Err(Error::InvalidInput(format!("series of {n} points is shorter than the window {window}")));
    }
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if h == 0.0 || xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h.abs()) {
        return Err(Error::InvalidInput("abscissae must be uniformly spaced".into()));
    }
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half).min(n - window);
        // offsets in units of h, relative to the evaluation point
        let a = DMatrix::from_fn(window, degree + 1, |r, c| ((lo + r) as f64 - i as f64).powi(c as i32));
        let b = DVector::from_iterator(window, ys[lo..lo + window].iter().copied());
        let coef = a
            .svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::Singular(e.to_string()))?;
        out.push(if degree >= 1 { coef[1] / h } else { 0.0 });
    }
    Ok(out)
}
