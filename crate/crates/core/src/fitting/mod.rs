//! Deterministic least-squares recovery of γ, propagation losses and the
//! singles noise polynomial from rate data.
//!
//! Nonlinear fits profile out their linear amplitude (amplitude for the
//! decay model, γ² for the pair-rate model) in closed form and search the
//! remaining loss coefficients: a coarse grid (pair-rate model) or a
//! log-linear start (decay model), then Nelder–Mead refinement. Residuals are
//! unweighted unless every point carries a standard error, in which case they
//! are divided by it.

mod linalg;
mod simplex;

pub use simplex::{minimize, SimplexOptions, SimplexResult};

use crate::chain::{effective_length, WaveguideSegment};
use crate::error::{invalid, Error, Result};
use crate::units::db_to_nepers;

/// Below this normalised Gram determinant the Jacobian columns are treated
/// as linearly dependent.
pub const IDENTIFIABILITY_THRESHOLD: f64 = 1e-12;

/// Independent variable of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Nonlinear segment length (m).
    SiLength,
    /// Passive segment length (m).
    SioxLength,
    /// Pump peak power (W).
    PeakPower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
    pub sigma: Option<f64>,
    /// Passive length (m) for this point in a co-fitted pair-rate dataset.
    pub siox_length: Option<f64>,
}

impl DataPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, sigma: None, siox_length: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub role: Role,
    pub points: Vec<DataPoint>,
}

impl DataSet {
    pub fn new(role: Role, points: Vec<DataPoint>) -> Self {
        Self { role, points }
    }

    pub fn from_xy(role: Role, xs: &[f64], ys: &[f64]) -> Self {
        Self::new(role, xs.iter().zip(ys).map(|(&x, &y)| DataPoint::new(x, y)).collect())
    }

    fn check(&self, role: Role, min_points: usize) -> Result<()> {
        if self.role != role {
            return invalid(format!("dataset role {:?} does not match the model ({role:?})", self.role));
        }
        if self.points.len() < min_points {
            return Err(Error::DegenerateData(format!(
                "{} points, need at least {min_points}",
                self.points.len()
            )));
        }
        for p in &self.points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return invalid("data values must be finite");
            }
            if p.x <= 0.0 {
                return invalid(format!("x must be strictly positive, got {}", p.x));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return invalid(format!("σ must be positive, got {s}"));
                }
            }
        }
        let with_sigma = self.points.iter().filter(|p| p.sigma.is_some()).count();
        if with_sigma != 0 && with_sigma != self.points.len() {
            return invalid("either every point or no point carries σ");
        }
        Ok(())
    }

    fn weighted(&self) -> bool {
        self.points.first().is_some_and(|p| p.sigma.is_some())
    }

    fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma.map_or(1.0, |s| 1.0 / (s * s))).collect()
    }

    fn distinct_x(&self) -> usize {
        let mut xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        xs.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Decay,
    GammaAlpha,
    Polynomial,
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::Decay => "decay",
            FitModel::GammaAlpha => "gamma_alpha",
            FitModel::Polynomial => "poly",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitParameter {
    pub name: &'static str,
    pub value: f64,
    /// Approximate standard error; NaN when the fit is exactly determined.
    pub std_error: f64,
    pub identifiable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub parameters: Vec<FitParameter>,
    /// Residual sum of squares (weighted when σ supplied).
    pub rss: f64,
    pub converged: bool,
    pub evaluations: usize,
    /// As many points as parameters: an exact solve with no validation.
    pub exactly_determined: bool,
    /// Smallest RSS over the coarse grid, when a grid was used.
    pub grid_best_rss: Option<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn param(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

fn rss_of(data: &DataSet, model: impl Fn(&DataPoint) -> f64) -> f64 {
    data.points
        .iter()
        .map(|p| {
            let r = (p.y - model(p)) / p.sigma.unwrap_or(1.0);
            r * r
        })
        .sum()
}

/// Best non-negative amplitude c for y ≈ c·h in weighted least squares.
fn profile_amplitude(ys: &[f64], hs: &[f64], ws: &[f64]) -> f64 {
    let num: f64 = ys.iter().zip(hs).zip(ws).map(|((y, h), w)| w * y * h).sum();
    let den: f64 = hs.iter().zip(ws).map(|(h, w)| w * h * h).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Jacobian of the residual vector by central differences, then
/// covariance ≈ s²·(JᵀWJ)⁻¹. Returns (std errors, normalised Gram determinant).
fn curvature_errors(
    data: &DataSet,
    params: &[f64],
    model: impl Fn(&[f64], &DataPoint) -> f64,
    rss: f64,
) -> (Vec<f64>, f64) {
    let n = data.points.len();
    let k = params.len();
    let ws = data.weights();
    let mut jac = vec![vec![0.0; k]; n];
    for j in 0..k {
        let h = 1e-6 * params[j].abs().max(1e-12);
        let mut up = params.to_vec();
        let mut dn = params.to_vec();
        up[j] += h;
        dn[j] -= h;
        for (i, p) in data.points.iter().enumerate() {
            jac[i][j] = (model(&up, p) - model(&dn, p)) / (2.0 * h);
        }
    }
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| (0..n).map(|i| ws[i] * jac[i][a] * jac[i][b]).sum()).collect())
        .collect();
    let det = linalg::normalized_gram_determinant(&gram);
    if n <= k {
        return (vec![f64::NAN; k], det);
    }
    let s2 = if data.weighted() { 1.0 } else { rss / (n - k) as f64 };
    match linalg::invert(&gram) {
        Some(inv) if det > IDENTIFIABILITY_THRESHOLD => ((0..k).map(|j| (s2 * inv[j][j]).max(0.0).sqrt()).collect(), det),
        _ => (vec![f64::INFINITY; k], det),
    }
}

fn secant_root(f: impl Fn(f64) -> f64, mut x0: f64, mut x1: f64) -> Option<f64> {
    let mut f0 = f(x0);
    let mut f1 = f(x1);
    if !f0.is_finite() || !f1.is_finite() {
        return None;
    }
    // near the root the iterates wander at roundoff level; keep the best one
    let mut best = if f1.abs() <= f0.abs() { (x1, f1.abs()) } else { (x0, f0.abs()) };
    for _ in 0..60 {
        let denom = f1 - f0;
        if f1 == 0.0 || denom == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if !x2.is_finite() {
            break;
        }
        let done = (x2 - x1).abs() <= 1e-15 * x2.abs();
        (x0, f0) = (x1, f1);
        x1 = x2;
        f1 = f(x1);
        if !f1.is_finite() {
            break;
        }
        if f1.abs() <= best.1 {
            best = (x1, f1.abs());
        }
        if done {
            break;
        }
    }
    Some(best.0)
}

// ---------------------------------------------------------------------------
// Passive-length decay
// ---------------------------------------------------------------------------

/// y = A·e^(−2·α·x), α in dB/m converted to nepers.
pub fn decay_model(amplitude: f64, alpha_db_per_m: f64, x: f64) -> f64 {
    amplitude * (-2.0 * db_to_nepers(alpha_db_per_m) * x).exp()
}

pub fn decay_rss(data: &DataSet, amplitude: f64, alpha_db_per_m: f64) -> f64 {
    rss_of(data, |p| decay_model(amplitude, alpha_db_per_m, p.x))
}

/// Fits pair rate against passive length: (amplitude, α_SiOx in dB/m).
pub fn fit_sio2_decay(data: &DataSet) -> Result<FitResult> {
    data.check(Role::SioxLength, 2)?;
    if data.distinct_x() < 2 {
        return Err(Error::DegenerateData("all lengths are equal".into()));
    }
    let ws = data.weights();
    let positive: Vec<(f64, f64, f64)> = data
        .points
        .iter()
        .zip(&ws)
        .filter(|(p, _)| p.y > 0.0)
        .map(|(p, w)| (p.x, p.y.ln(), w * p.y * p.y))
        .collect();
    if positive.len() < 2 {
        return Err(Error::DegenerateData("need at least two positive rates".into()));
    }
    // weighted log-linear regression; var(ln y) ≈ σ²/y²
    let sw: f64 = positive.iter().map(|t| t.2).sum();
    let mx = positive.iter().map(|t| t.2 * t.0).sum::<f64>() / sw;
    let my = positive.iter().map(|t| t.2 * t.1).sum::<f64>() / sw;
    let sxx: f64 = positive.iter().map(|t| t.2 * (t.0 - mx).powi(2)).sum();
    let sxy: f64 = positive.iter().map(|t| t.2 * (t.0 - mx) * (t.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateData("positive rates all share one length".into()));
    }
    let slope = sxy / sxx;
    let alpha0 = -slope / 2.0 / db_to_nepers(1.0);

    let ys: Vec<f64> = data.points.iter().map(|p| p.y).collect();
    let profile = |alpha: f64| {
        let hs: Vec<f64> = data.points.iter().map(|p| decay_model(1.0, alpha, p.x)).collect();
        let a = profile_amplitude(&ys, &hs, &ws);
        (a, decay_rss(data, a, alpha))
    };

    let exactly = data.points.len() == 2;
    let (alpha, evaluations, converged) = if exactly {
        (alpha0, 0, true)
    } else {
        let scale = alpha0.abs().max(1.0);
        let r = minimize(|t| profile(t[0] * scale).1, &[alpha0 / scale], &[0.1], SimplexOptions::default());
        let nm = r.x[0] * scale;
        // polish on the stationarity condition Σ w·(y − A·h)·x·h = 0
        let gradient = |alpha: f64| {
            let (a, _) = profile(alpha);
            data.points
                .iter()
                .zip(&ws)
                .map(|(p, w)| {
                    let h = decay_model(1.0, alpha, p.x);
                    w * (p.y - a * h) * p.x * h
                })
                .sum::<f64>()
        };
        let polished = secant_root(gradient, nm, nm * (1.0 + 1e-6) + 1e-9);
        let alpha = match polished {
            Some(a) if profile(a).1 <= profile(nm).1 * (1.0 + 1e-12) => a,
            _ => nm,
        };
        (alpha, r.evaluations, r.converged)
    };
    let (amplitude, rss) = if exactly {
        let amp = (my - slope * mx).exp();
        (amp, decay_rss(data, amp, alpha))
    } else {
        profile(alpha)
    };
    let (errs, det) = curvature_errors(data, &[amplitude, alpha], |q, p| decay_model(q[0], q[1], p.x), rss);
    Ok(FitResult {
        model: FitModel::Decay,
        parameters: vec![
            FitParameter { name: "amplitude", value: amplitude, std_error: errs[0], identifiable: true },
            FitParameter {
                name: "alpha_siox_db_per_m",
                value: alpha,
                std_error: errs[1],
                identifiable: det > IDENTIFIABILITY_THRESHOLD,
            },
        ],
        rss,
        converged,
        evaluations,
        exactly_determined: exactly,
        grid_best_rss: None,
    })
}

// ---------------------------------------------------------------------------
// γ and α_Si from the length dependence of the pair rate
// ---------------------------------------------------------------------------

/// Treatment of the passive section after the nonlinear one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Downstream {
    /// Known loss (dB/m) over a known length (m); per-point lengths override it.
    Fixed { length: f64, loss_db_per_m: f64 },
    /// Loss is a free parameter; needs per-point passive lengths spanning ≥ 2 values.
    CoFit { length: f64 },
}

/// Fixed experimental parameters of the pair-rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaAlphaModel {
    /// Pump peak power (W).
    pub peak_power: f64,
    /// Pair bandwidth Δν (Hz).
    pub pair_bandwidth: f64,
    /// Pump pulse width Δt (s).
    pub pulse_fwhm: f64,
    pub downstream: Downstream,
    /// Search range of α_Si (dB/m).
    pub alpha_bounds: (f64, f64),
    /// Search range of α_SiOx (dB/m) in co-fit mode.
    pub siox_alpha_bounds: (f64, f64),
    pub grid_points: usize,
}

impl GammaAlphaModel {
    pub fn new(peak_power: f64, pair_bandwidth: f64, pulse_fwhm: f64, downstream: Downstream) -> Self {
        Self {
            peak_power,
            pair_bandwidth,
            pulse_fwhm,
            downstream,
            alpha_bounds: (1.0, 3000.0),
            siox_alpha_bounds: (0.0, 1000.0),
            grid_points: 61,
        }
    }

    fn cofit(&self) -> bool {
        matches!(self.downstream, Downstream::CoFit { .. })
    }

    fn siox_length(&self, p: &DataPoint) -> f64 {
        let default = match self.downstream {
            Downstream::Fixed { length, .. } | Downstream::CoFit { length } => length,
        };
        p.siox_length.unwrap_or(default)
    }

    /// Pairs per pulse at the passive-segment output for nonlinear length `p.x`.
    pub fn predict(&self, gamma: f64, alpha_si: f64, alpha_siox: Option<f64>, p: &DataPoint) -> f64 {
        let seg = WaveguideSegment::nonlinear(p.x, alpha_si, gamma);
        let l_eff = effective_length(alpha_si, p.x);
        let siox_loss = match (self.downstream, alpha_siox) {
            (_, Some(a)) => a,
            (Downstream::Fixed { loss_db_per_m, .. }, None) => loss_db_per_m,
            (Downstream::CoFit { .. }, None) => 0.0,
        };
        let eta_siox = WaveguideSegment::passive(self.siox_length(p), siox_loss).transmittance();
        let g = gamma * self.peak_power * l_eff;
        self.pair_bandwidth * self.pulse_fwhm * g * g * seg.transmittance().powi(2) * eta_siox * eta_siox
    }
}

pub fn gamma_alpha_rss(data: &DataSet, model: &GammaAlphaModel, gamma: f64, alpha_si: f64, alpha_siox: Option<f64>) -> f64 {
    rss_of(data, |p| model.predict(gamma, alpha_si, alpha_siox, p))
}

/// Fits (γ, α_Si) and, in co-fit mode, α_SiOx.
pub fn fit_gamma_alpha(data: &DataSet, model: &GammaAlphaModel) -> Result<FitResult> {
    let cofit = model.cofit();
    let n_params = if cofit { 3 } else { 2 };
    data.check(Role::SiLength, n_params)?;
    if !(model.peak_power > 0.0 && model.pair_bandwidth > 0.0 && model.pulse_fwhm > 0.0) {
        return invalid("peak power, bandwidth and pulse width must be positive");
    }
    if model.grid_points < 2 || !(model.alpha_bounds.0 > 0.0 && model.alpha_bounds.1 > model.alpha_bounds.0) {
        return invalid("α search range must be positive and increasing, with ≥ 2 grid points");
    }
    if data.distinct_x() < 2 {
        return Err(Error::NonIdentifiable("alpha_si_db_per_m"));
    }
    if cofit {
        let mut ls: Vec<f64> = data.points.iter().map(|p| model.siox_length(p)).collect();
        ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ls.dedup();
        if ls.len() < 2 {
            return Err(Error::NonIdentifiable("alpha_siox_db_per_m"));
        }
    }
    let ws = data.weights();
    let ys: Vec<f64> = data.points.iter().map(|p| p.y).collect();
    // profiled objective over (α_Si, α_SiOx); returns (γ, rss)
    let profile = |alpha_si: f64, alpha_siox: Option<f64>| {
        let hs: Vec<f64> = data.points.iter().map(|p| model.predict(1.0, alpha_si, alpha_siox, p)).collect();
        let g2 = profile_amplitude(&ys, &hs, &ws).max(0.0);
        let gamma = g2.sqrt();
        (gamma, gamma_alpha_rss(data, model, gamma, alpha_si, alpha_siox))
    };

    let (lo, hi) = model.alpha_bounds;
    let m = model.grid_points;
    let alpha_grid: Vec<f64> = (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect();
    let siox_grid: Vec<Option<f64>> = if cofit {
        let (a, b) = model.siox_alpha_bounds;
        (0..m).map(|i| Some(a + (b - a) * i as f64 / (m - 1) as f64)).collect()
    } else {
        vec![None]
    };
    let mut best = (f64::INFINITY, alpha_grid[0], siox_grid[0]);
    let mut evaluations = 0;
    for &a in &alpha_grid {
        for &s in &siox_grid {
            let (_, rss) = profile(a, s);
            evaluations += 1;
            if rss < best.0 {
                best = (rss, a, s);
            }
        }
    }
    let grid_best = best.0;

    let siox_scale = model.siox_alpha_bounds.1.max(1.0);
    let objective = |t: &[f64]| {
        let s = if cofit { Some(t[1] * siox_scale) } else { None };
        profile(t[0].exp(), s).1
    };
    let mut start = vec![best.1.ln()];
    let mut steps = vec![0.05];
    if let Some(s) = best.2 {
        start.push(s / siox_scale);
        steps.push(0.02);
    }
    let r = minimize(objective, &start, &steps, SimplexOptions::default());
    evaluations += r.evaluations;

    let (alpha_si, alpha_siox) = if r.value <= grid_best {
        (r.x[0].exp(), if cofit { Some(r.x[1] * siox_scale) } else { None })
    } else {
        (best.1, best.2)
    };
    let (gamma, rss) = profile(alpha_si, alpha_siox);

    let mut params = vec![gamma, alpha_si];
    if let Some(s) = alpha_siox {
        params.push(s);
    }
    let (errs, det) = curvature_errors(
        data,
        &params,
        |q, p| model.predict(q[0], q[1], q.get(2).copied(), p),
        rss,
    );
    let ident = det > IDENTIFIABILITY_THRESHOLD;
    let mut parameters = vec![
        FitParameter { name: "gamma_per_w_m", value: gamma, std_error: errs[0], identifiable: true },
        FitParameter { name: "alpha_si_db_per_m", value: alpha_si, std_error: errs[1], identifiable: ident },
    ];
    if let Some(s) = alpha_siox {
        parameters.push(FitParameter { name: "alpha_siox_db_per_m", value: s, std_error: errs[2], identifiable: ident });
    }
    Ok(FitResult {
        model: FitModel::GammaAlpha,
        parameters,
        rss,
        converged: r.converged,
        evaluations,
        exactly_determined: data.points.len() == n_params,
        grid_best_rss: Some(grid_best),
    })
}

// ---------------------------------------------------------------------------
// Singles polynomial
// ---------------------------------------------------------------------------

pub fn poly_model(n0: f64, n1: f64, a2: f64, x: f64) -> f64 {
    n0 + x * (n1 + x * a2)
}

pub fn poly_rss(data: &DataSet, n0: f64, n1: f64, a2: f64) -> f64 {
    rss_of(data, |p| poly_model(n0, n1, a2, p.x))
}

/// Linear least squares for y = n0 + n1·x + a2·x² against peak power.
pub fn fit_singles_poly(data: &DataSet) -> Result<FitResult> {
    data.check(Role::PeakPower, 3)?;
    if data.distinct_x() < 3 {
        return Err(Error::DegenerateData("polynomial fit needs three distinct powers".into()));
    }
    let ws = data.weights();
    // scale x to O(1) for conditioning
    let xs = data.points.iter().fold(0.0f64, |m, p| m.max(p.x.abs()));
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![0.0; 3];
    for (p, w) in data.points.iter().zip(&ws) {
        let u = p.x / xs;
        let row = [1.0, u, u * u];
        for a in 0..3 {
            atb[a] += w * row[a] * p.y;
            for b in 0..3 {
                ata[a][b] += w * row[a] * row[b];
            }
        }
    }
    let inv = linalg::invert(&ata).ok_or_else(|| Error::DegenerateData("rank-deficient design".into()))?;
    let c = linalg::mat_vec(&inv, &atb);
    let coef = [c[0], c[1] / xs, c[2] / (xs * xs)];
    let rss = poly_rss(data, coef[0], coef[1], coef[2]);
    let n = data.points.len();
    let exactly = n == 3;
    let s2 = if data.weighted() { 1.0 } else if exactly { f64::NAN } else { rss / (n - 3) as f64 };
    let unscale = [1.0, 1.0 / xs, 1.0 / (xs * xs)];
    let names = ["n0", "n1_per_w", "a2_per_w2"];
    let parameters = (0..3)
        .map(|j| FitParameter {
            name: names[j],
            value: coef[j],
            std_error: (s2 * inv[j][j]).max(0.0).sqrt() * unscale[j],
            identifiable: true,
        })
        .collect();
    Ok(FitResult {
        model: FitModel::Polynomial,
        parameters,
        rss,
        converged: true,
        evaluations: 1,
        exactly_determined: exactly,
        grid_best_rss: None,
    })
}
