//! Linearized-perturbation analysis around a self-consistent solution: the
//! growth exponent λ(k) in closed approximation and by direct 2-D quadrature,
//! iteration of the discretized perturbation map, power iteration for its
//! dominant eigenvalue, and stability scans over the packet width.
//!
//! A perturbation δc grows like |λ(k) - 1|ⁿ under the map; λ > 2 means the
//! fixed point is unstable at that k, λ < 2 stable.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::QuadratureSpec;
use crate::model::{GaussianPacket, KernelParams};
use crate::quad::gauss_legendre_on;
use crate::radial::RadialMap;
use crate::selfcons::alpha_roots;
use crate::specfun::bessel_i0_scaled;

/// Amplitude convention for the Gaussian fixed point ζ_k = b₀ e^{-αk²}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum B0Convention {
    SqrtPiOverAlpha,
    Sqrt2AlphaOverPi,
}

impl B0Convention {
    pub fn b0(self, alpha: f64) -> f64 {
        match self {
            B0Convention::SqrtPiOverAlpha => (std::f64::consts::PI / alpha).sqrt(),
            B0Convention::Sqrt2AlphaOverPi => (2.0 * alpha / std::f64::consts::PI).sqrt(),
        }
    }
}

impl std::str::FromStr for B0Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt_pi_over_alpha" => Ok(B0Convention::SqrtPiOverAlpha),
            "sqrt_2alpha_over_pi" => Ok(B0Convention::Sqrt2AlphaOverPi),
            other => Err(Error::InvalidInput(format!(
                "convention must be 'sqrt_pi_over_alpha' or 'sqrt_2alpha_over_pi', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Stable => "stable",
            Classification::Unstable => "unstable",
            Classification::Marginal => "marginal",
        };
        f.write_str(s)
    }
}

/// Half-width of the marginal band around the λ = 2 threshold.
pub const CLASSIFY_MARGIN: f64 = 1e-9;

/// Threshold classifier on λ: stable below 2, unstable above, marginal
/// within `CLASSIFY_MARGIN` of the threshold.
pub fn classify(lambda: f64) -> Result<Classification> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "growth exponent must be finite, got {lambda}"
        )));
    }
    if (lambda - 2.0).abs() <= CLASSIFY_MARGIN {
        Ok(Classification::Marginal)
    } else if lambda < 2.0 {
        Ok(Classification::Stable)
    } else {
        Ok(Classification::Unstable)
    }
}

/// Closed approximation of the growth exponent:
/// λ(k) = 2 b₀ e^{-(2a + 1/(8(a+α)²)) k²} √(π/(a+α)) I₀(k²/(8(a+α)²)).
///
/// Evaluated with the scaled I₀ so the e^{+x} growth of the Bessel factor
/// cancels analytically against the exponent.
pub fn lyapunov_closed(k: f64, a: f64, alpha: f64, b0: f64) -> Result<f64> {
    if !(k >= 0.0) || !(a > 0.0) || !(alpha > 0.0) || a + alpha <= 0.0 {
        return Err(Error::Precondition(format!(
            "lyapunov_closed requires k >= 0, a > 0, alpha > 0; got k={k}, a={a}, alpha={alpha}"
        )));
    }
    let s = a + alpha;
    let arg = k * k / (8.0 * s * s);
    let scaled = bessel_i0_scaled(arg)?;
    Ok(2.0 * b0 * (std::f64::consts::PI / s).sqrt() * (-2.0 * a * k * k).exp() * scaled)
}

/// Growth exponent by direct 2-D quadrature of
/// λ(k) = 2 b₀ e^{-ak²} ∫ I₀(k‖p−l‖) e^{-a(p+l)² − αp²} d²p
/// with the offset l taken colinear with k (the diagonal convention); the
/// two momentum integrals coincide by symmetry.
pub fn lyapunov_quadrature(
    k: f64,
    a: f64,
    alpha: f64,
    b0: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(k >= 0.0) || !(a > 0.0) || !(alpha > 0.0) {
        return Err(Error::Precondition(format!(
            "lyapunov_quadrature requires k >= 0, a > 0, alpha > 0; got k={k}, a={a}, alpha={alpha}"
        )));
    }
    spec.validate()?;
    if b0 == 0.0 {
        return Ok(0.0);
    }
    let s = a + alpha;
    // Worst-case angular direction puts the envelope peak at r = ak/s.
    let upper = a * k / s + (40.0 / s).sqrt();

    let eval = |n_r: usize, n_theta: usize| -> Result<f64> {
        let (rs, ws) = gauss_legendre_on(n_r, 0.0, upper);
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        let mut total = 0.0;
        for (&r, &w) in rs.iter().zip(&ws) {
            let mut ang = 0.0;
            for t in 0..n_theta {
                let c = (dtheta * t as f64).cos();
                let dist = (r * r + k * k - 2.0 * r * k * c).max(0.0).sqrt();
                let z = k * dist;
                // e^{-ak²} of the envelope is factored out in front, so the
                // exponent here carries -a(r² + 2rkc) - αr² + z with z from
                // the scaled I₀.
                let expo = z - a * (r * r + 2.0 * r * k * c) - alpha * r * r;
                ang += bessel_i0_scaled(z)? * expo.exp();
            }
            total += w * r * ang * dtheta;
        }
        Ok(2.0 * b0 * (-2.0 * a * k * k).exp() * total)
    };

    let n_r = spec.panels.max(64);
    let n_theta = 64;
    let coarse = eval(n_r, n_theta)?;
    let fine = eval(n_r * 2, n_theta * 2)?;
    let scale = fine.abs().max(coarse.abs());
    if scale > 0.0 && (fine - coarse).abs() / scale > 1e-6 {
        return Err(Error::Accuracy(format!(
            "growth-exponent quadrature did not converge under refinement \
             (relative change {:e})",
            (fine - coarse).abs() / scale
        )));
    }
    Ok(fine)
}

/// Per-sample view of λ around one fixed point.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub k_samples: Vec<f64>,
    pub lambda_closed: Vec<f64>,
    pub lambda_quadrature: Option<Vec<f64>>,
    pub classification: Vec<Classification>,
    pub b0_convention: B0Convention,
}

/// Samples λ(k) (closed form, optionally quadrature) and classifies each
/// sample. Classification follows the closed form.
pub fn stability_report(
    k_samples: &[f64],
    a: f64,
    alpha: f64,
    convention: B0Convention,
    spec: Option<&QuadratureSpec>,
) -> Result<StabilityReport> {
    let b0 = convention.b0(alpha);
    let mut closed = Vec::with_capacity(k_samples.len());
    let mut classification = Vec::with_capacity(k_samples.len());
    for &k in k_samples {
        let l = lyapunov_closed(k, a, alpha, b0)?;
        classification.push(classify(l)?);
        closed.push(l);
    }
    let quadrature = match spec {
        Some(spec) => {
            let mut q = Vec::with_capacity(k_samples.len());
            for &k in k_samples {
                q.push(lyapunov_quadrature(k, a, alpha, b0, spec)?);
            }
            Some(q)
        }
        None => None,
    };
    Ok(StabilityReport {
        k_samples: k_samples.to_vec(),
        lambda_closed: closed,
        lambda_quadrature: quadrature,
        classification,
        b0_convention: convention,
    })
}

/// Sup-norm history of Δ⁽ⁿ⁾ = (M̂ − 1)ⁿ δc⁽⁰⁾ under the discretized
/// perturbation map.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRecord {
    /// |Δ⁽ⁿ⁾| for n = 0..=steps actually taken.
    pub sup_norms: Vec<f64>,
    /// Per-step ratios |Δ⁽ⁿ⁺¹⁾| / |Δ⁽ⁿ⁾|.
    pub ratios: Vec<f64>,
    /// Asymptotic growth rate (geometric mean of the trailing ratios), the
    /// fitted |λ − 1|; None if the perturbation annihilated. Trailing ratios
    /// are used so the fit measures the dominant mode, not the transient.
    pub fitted_rate: Option<f64>,
    /// True when iteration stopped early because the iterate overflowed.
    pub divergent: bool,
}

fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Iterates Δ ← (M̂ − 1)Δ with M̂ δ = ∫ X (ζ(p)δ(q) + ζ(q)δ(p)) built from
/// the closed-form kernel, recording sup-norm growth.
pub fn iterate_perturbation(
    grid: &[f64],
    zeta: &[Complex64],
    delta0: &[Complex64],
    packet: &GaussianPacket,
    params: &KernelParams,
    n_steps: usize,
) -> Result<GrowthRecord> {
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be positive".into()));
    }
    if zeta.len() != grid.len() || delta0.len() != grid.len() {
        return Err(Error::InvalidInput(
            "zeta and delta0 must match the radial grid length".into(),
        ));
    }
    let map = RadialMap::new(grid, packet, params)?;
    let mut delta = delta0.to_vec();
    let mut sup_norms = vec![sup_norm(&delta)];
    let mut ratios = Vec::with_capacity(n_steps);
    let mut divergent = false;
    for _ in 0..n_steps {
        let m_delta = map.apply_linearized(zeta, &delta);
        let next: Vec<Complex64> = m_delta
            .iter()
            .zip(&delta)
            .map(|(&md, &d)| md - d)
            .collect();
        let norm = sup_norm(&next);
        if !norm.is_finite() {
            divergent = true;
            break;
        }
        let prev = *sup_norms.last().unwrap();
        ratios.push(if prev > 0.0 { norm / prev } else { 0.0 });
        sup_norms.push(norm);
        delta = next;
    }
    let tail: Vec<f64> = ratios
        .iter()
        .rev()
        .take(5)
        .copied()
        .filter(|&r| r > 0.0 && r.is_finite())
        .collect();
    let fitted_rate = if tail.is_empty() {
        None
    } else {
        let log_mean = tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64;
        Some(log_mean.exp())
    };
    Ok(GrowthRecord {
        sup_norms,
        ratios,
        fitted_rate,
        divergent,
    })
}

/// Dominant eigenvalue of the discretized perturbation map M̂ by power
/// iteration with a Rayleigh-quotient estimate. The map is complex
/// symmetric, not Hermitian, so the eigenvalue is complex in general.
pub fn dominant_eigenvalue(
    grid: &[f64],
    zeta: &[Complex64],
    packet: &GaussianPacket,
    params: &KernelParams,
    max_iters: usize,
    tol: f64,
) -> Result<Complex64> {
    if zeta.len() != grid.len() {
        return Err(Error::InvalidInput(
            "zeta must match the radial grid length".into(),
        ));
    }
    if !(tol > 0.0) || max_iters == 0 {
        return Err(Error::InvalidInput("tol must be positive, max_iters nonzero".into()));
    }
    let map = RadialMap::new(grid, packet, params)?;
    // deterministic non-degenerate start vector
    let mut v: Vec<Complex64> = grid
        .iter()
        .map(|&k| Complex64::new((-0.3 * k * k).exp(), 0.1 / (1.0 + k)))
        .collect();
    let mut lambda = Complex64::new(0.0, 0.0);
    for iter in 1..=max_iters {
        let mv = map.apply_linearized(zeta, &v);
        let num: Complex64 = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if den == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let next = num / den;
        let scale = mv.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        v = mv.iter().map(|&c| c / scale).collect();
        if (next - lambda).norm() <= tol * next.norm().max(1.0) {
            return Ok(next);
        }
        lambda = next;
        if iter == max_iters {
            return Err(Error::Divergence {
                iter,
                msg: format!("power iteration did not settle (last estimate {lambda})"),
            });
        }
    }
    unreachable!()
}

/// One width sample of a stability scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub a: f64,
    pub alpha: f64,
    pub b0: f64,
    pub lambda0: f64,
    pub max_lambda: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub convention: B0Convention,
    /// Width where max_k λ crosses the threshold, refined by bisection;
    /// absent when the classification does not change across the range.
    pub critical_a: Option<f64>,
}

/// λ(k) maximized over a fixed k-sample set; under the √(π/α) convention the
/// maximum sits at k = 0 since the closed form decreases in k.
fn row_for(a: f64, convention: B0Convention) -> Result<ScanRow> {
    let (alpha, _) = alpha_roots(a)?;
    let b0 = convention.b0(alpha);
    let lambda0 = lyapunov_closed(0.0, a, alpha, b0)?;
    let mut max_lambda = lambda0;
    let mut k = 0.25;
    while k <= 4.0 {
        max_lambda = max_lambda.max(lyapunov_closed(k, a, alpha, b0)?);
        k += 0.25;
    }
    Ok(ScanRow {
        a,
        alpha,
        b0,
        lambda0,
        max_lambda,
        classification: classify(max_lambda)?,
    })
}

/// Scans a ∈ [low, high] with `count` uniform samples, classifying each and
/// bisecting the threshold crossing when one exists.
pub fn scan_stability(
    low: f64,
    high: f64,
    count: usize,
    convention: B0Convention,
) -> Result<ScanResult> {
    if !(low > 0.0 && high > low) {
        return Err(Error::InvalidInput(format!(
            "scan range requires 0 < low < high, got [{low}, {high}]"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidInput("scan needs at least 2 samples".into()));
    }
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let a = low + (high - low) * i as f64 / (count - 1) as f64;
        rows.push(row_for(a, convention)?);
    }

    let mut critical_a = None;
    for pair in rows.windows(2) {
        let above_lo = pair[0].max_lambda > 2.0;
        let above_hi = pair[1].max_lambda > 2.0;
        if above_lo != above_hi {
            let mut lo = pair[0].a;
            let mut hi = pair[1].a;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let lam = row_for(mid, convention)?.max_lambda;
                if (lam - 2.0).abs() < 1e-10 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (lam > 2.0) == above_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            critical_a = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(ScanResult {
        rows,
        convention,
        critical_a,
    })
}
