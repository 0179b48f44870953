//! Integral kernels: the Airy kernel, its finite-temperature smoothing
//! `N_{t,sigma}` (by a real quadrature and by a single contour integral), the
//! two-dimensional kernel `K_{t,sigma}` and the rescaled diagonal used for the
//! Gumbel limit.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, EdgeError, Result};
use crate::specfun::{airy, composite_legendre, phi, QuadGrid, SQRT_PI};
use crate::tails::gumbel_constants;

/// Which kernel a [`KernelSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTag {
    /// `K_Ai(a + t, b + t)`.
    Airy,
    /// `N_{t,sigma}(a, b)` by real quadrature.
    FtAiry,
    /// `N_{t,sigma}(a, b)` by the contour integral.
    FtAiryContour,
    /// `K_{t,sigma}` on the half-plane `(0, inf) x R`.
    Ksigma2d,
    /// `e^{-x}` on the diagonal, zero elsewhere.
    GumbelExt,
}

/// Numerical knobs of the kernel evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelKnobs {
    /// Nodes per Gauss-Legendre panel of the inner `y` quadrature.
    pub m_z: usize,
    /// Height of the horizontal contour `R + i delta`. `None` picks the saddle
    /// height for large `sigma` and `2` otherwise.
    pub delta: Option<f64>,
    /// Half-length of the truncated contour. `None` means `12 + 2 delta`.
    pub lambda: Option<f64>,
}

impl Default for KernelKnobs {
    fn default() -> Self {
        KernelKnobs {
            m_z: 32,
            delta: None,
            lambda: None,
        }
    }
}

/// A kernel together with its shift `t` and non-Hermiticity `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub tag: KernelTag,
    pub t: f64,
    pub sigma: f64,
    pub knobs: KernelKnobs,
}

impl KernelSpec {
    pub fn new(tag: KernelTag, t: f64, sigma: f64) -> Result<Self> {
        if !t.is_finite() || !sigma.is_finite() {
            return invalid(format!("non-finite kernel parameters t = {t}, sigma = {sigma}"));
        }
        if sigma < 0.0 {
            return invalid(format!("sigma must be non-negative, got {sigma}"));
        }
        if tag == KernelTag::FtAiryContour && sigma <= 0.0 {
            return invalid("the contour representation needs sigma > 0");
        }
        Ok(KernelSpec {
            tag,
            t,
            sigma,
            knobs: KernelKnobs::default(),
        })
    }

    /// The kernel for the distribution function at `(t, sigma)`: the Airy
    /// kernel when `sigma = 0` and the finite-temperature kernel otherwise.
    pub fn for_distribution(t: f64, sigma: f64) -> Result<Self> {
        let tag = if sigma == 0.0 {
            KernelTag::Airy
        } else {
            KernelTag::FtAiry
        };
        KernelSpec::new(tag, t, sigma)
    }

    pub fn with_knobs(mut self, knobs: KernelKnobs) -> Self {
        self.knobs = knobs;
        self
    }

    /// Evaluates a one-dimensional kernel at `(a, b)` on `L^2(0, inf)`.
    pub fn eval(&self, a: f64, b: f64) -> Result<f64> {
        match self.tag {
            KernelTag::Airy => Ok(airy_kernel(a + self.t, b + self.t)),
            KernelTag::FtAiry => ft_airy_kernel(a, b, self.t, self.sigma),
            KernelTag::FtAiryContour => {
                let delta = self.knobs.delta.unwrap_or(2.0);
                let lambda = self.knobs.lambda.unwrap_or(12.0 + 2.0 * delta);
                ft_airy_kernel_contour(a, b, self.t, self.sigma, delta, lambda)
            }
            KernelTag::GumbelExt => Ok(if a == b { (-(a + self.t)).exp() } else { 0.0 }),
            KernelTag::Ksigma2d => invalid("the two-dimensional kernel takes four arguments"),
        }
    }
}

/// Below this separation the Christoffel-Darboux quotient is replaced by a
/// Taylor expansion about the midpoint.
const CD_NEAR_DIAGONAL: f64 = 1e-4;

/// `K_Ai(a, b) = int_0^inf Ai(a + z) Ai(z + b) dz`.
pub fn airy_kernel(a: f64, b: f64) -> f64 {
    let (ai_a, aip_a) = airy(a);
    let (ai_b, aip_b) = airy(b);
    airy_kernel_from_values(a, ai_a, aip_a, b, ai_b, aip_b)
}

/// Christoffel-Darboux form from precomputed `Ai`, `Ai'` values.
pub fn airy_kernel_from_values(a: f64, ai_a: f64, aip_a: f64, b: f64, ai_b: f64, aip_b: f64) -> f64 {
    let d = a - b;
    if d.abs() > CD_NEAR_DIAGONAL {
        return (ai_a * aip_b - aip_a * ai_b) / d;
    }
    airy_kernel_taylor(a, b)
}

fn airy_kernel_taylor(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (a - b);
    let (ai, aip) = airy(m);
    // K(m+h, m-h) = K(m,m) + h^2 (Ai Ai' - 2 G(m)) + O(h^4),
    // G(x) = (x^2 Ai^2 - x Ai'^2 + Ai Ai') / 3 is an antiderivative of x Ai^2.
    let g = (m * m * ai * ai - m * aip * aip + ai * aip) / 3.0;
    aip * aip - m * ai * ai + h * h * (ai * aip - 2.0 * g)
}

/// `K_Ai(a, a) = Ai'(a)^2 - a Ai(a)^2`.
pub fn airy_kernel_diag(a: f64) -> f64 {
    let (ai, aip) = airy(a);
    aip * aip - a * ai * ai
}

/// Inner quadrature for `int Phi(y/sigma) Ai(a + y + t) Ai(b + y + t) dy`.
///
/// The window `[y_lo, y_hi]` keeps every `y` where the log-concave envelope
/// `Phi(y/sigma) Ai*(a_min + y + t)^2` is within `e^{-40}` of its maximum,
/// with `Ai*` equal to `Ai` right of its largest maximum and constant to the
/// left of it. The smoothed step of `Phi` around `y = 0` gets panels of width
/// at most `2 sigma`; elsewhere the panel width resolves the Airy oscillations
/// at the deepest argument reached and the Gaussian decay of `Phi`.
#[derive(Debug, Clone)]
pub struct InnerRule {
    pub nodes: Vec<f64>,
    /// Quadrature weight times `Phi(y/sigma)`.
    pub weights: Vec<f64>,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Location of the largest maximum of `Ai`, the first zero of `Ai'`.
const AI_MAX_AT: f64 = -1.018_792_971_647_471;
const WINDOW_DROP: f64 = 40.0;

fn ln_airy_envelope(z: f64) -> f64 {
    let z = z.max(AI_MAX_AT);
    if z < 20.0 {
        2.0 * airy(z).0.ln()
    } else {
        // ln Ai(z) = -(2/3) z^{3/2} - ln(2 sqrt(pi)) - ln(z)/4 + O(z^{-3/2})
        2.0 * (-(2.0 / 3.0) * z.powf(1.5) - (2.0 * SQRT_PI).ln() - 0.25 * z.ln())
    }
}

/// Bisection for the crossing of a monotone predicate between `inside` and `outside`.
fn bisect(mut inside: f64, mut outside: f64, keep: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if keep(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    outside
}

impl InnerRule {
    pub fn new(t: f64, sigma: f64, a_min: f64, per_panel: usize) -> Result<Self> {
        if !(sigma > 0.0) {
            return invalid("the inner quadrature needs sigma > 0");
        }
        let shift = a_min + t;
        let env = |y: f64| crate::specfun::ln_phi(y / sigma) + ln_airy_envelope(y + shift);
        // The envelope is concave; ternary search for its peak.
        let (mut lo, mut hi) = (-shift.abs() - 20.0 * sigma - 20.0, shift.abs() + 20.0 * sigma + 20.0);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if env(m1) < env(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let y_peak = 0.5 * (lo + hi);
        let floor = env(y_peak) - WINDOW_DROP;
        let keep = |y: f64| env(y) >= floor;
        let mut far_left = y_peak - 10.0 * sigma - 1.0;
        while keep(far_left) {
            far_left = y_peak - 2.0 * (y_peak - far_left);
        }
        let mut far_right = y_peak + 10.0;
        while keep(far_right) {
            far_right = y_peak + 2.0 * (far_right - y_peak);
        }
        let y_lo = bisect(y_peak, far_left, keep);
        let y_hi = bisect(y_peak, far_right, keep);

        let deepest = (shift + y_lo).min(0.0).abs();
        let airy_width = (4.0 * PI / deepest.max(1.0).sqrt()).min(4.0);
        let gauss_width = 10.0 * sigma * sigma / y_lo.abs().max(sigma);
        let width = airy_width.min(gauss_width.max(2.0 * sigma));
        let mut breaks = vec![y_lo];
        let step_lo = (-8.0 * sigma).max(y_lo);
        let step_hi = (8.0 * sigma).min(y_hi);
        let push_uniform = |breaks: &mut Vec<f64>, to: f64, h_max: f64| {
            let from = *breaks.last().unwrap();
            if to > from {
                let n = ((to - from) / h_max).ceil().max(1.0) as usize;
                let h = (to - from) / n as f64;
                for k in 1..n {
                    breaks.push(from + k as f64 * h);
                }
                breaks.push(to);
            }
        };
        let mut right_width = width;
        if 2.0 * sigma < airy_width && step_hi > step_lo {
            // Fine panels through the transition region of Phi(y/sigma); to
            // its right Phi is flat and only the Airy factors set the width.
            push_uniform(&mut breaks, step_lo, width);
            push_uniform(&mut breaks, step_hi, 2.0 * sigma);
            right_width = airy_width;
        }
        push_uniform(&mut breaks, y_hi, right_width);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in breaks.windows(2) {
            let panel: QuadGrid = composite_legendre(pair[0], pair[1], 1, per_panel)?;
            for (&y, &w) in panel.nodes.iter().zip(&panel.weights) {
                let wphi = w * phi(y / sigma);
                if wphi > 0.0 {
                    nodes.push(y);
                    weights.push(wphi);
                }
            }
        }
        Ok(InnerRule {
            nodes,
            weights,
            y_lo,
            y_hi,
        })
    }
}

/// Finite-temperature Airy kernel `N_{t,sigma}(a, b)` by real quadrature.
/// `sigma = 0` gives `K_Ai(a + t, b + t)`.
pub fn ft_airy_kernel(a: f64, b: f64, t: f64, sigma: f64) -> Result<f64> {
    if sigma < 0.0 || !sigma.is_finite() {
        return invalid(format!("sigma must be a non-negative number, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(airy_kernel(a + t, b + t));
    }
    let rule = InnerRule::new(t, sigma, a.min(b), 32)?;
    let value: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&y, &w)| w * airy(a + y + t).0 * airy(b + y + t).0)
        .sum();
    if !value.is_finite() {
        return Err(EdgeError::NumericFailure(format!(
            "inner quadrature of N at ({a}, {b}; t = {t}, sigma = {sigma}) is not finite"
        )));
    }
    Ok(value)
}

/// Saddle-point height of the contour for `N_{t,sigma}(a, b)`, used when the
/// cubic term of the phase is negligible.
pub fn saddle_delta(a: f64, b: f64, t: f64, sigma: f64) -> f64 {
    ((a + b + 2.0 * t) / sigma).max(2.0)
}

const CONTOUR_PANEL: f64 = 0.5;

/// `N_{t,sigma}(a, b)` from the single contour integral over `Gamma = R + i delta`:
///
/// `e^{3 pi i/4}/(4 pi) sqrt(sigma/pi) int_Gamma exp(i[l^3/(12 sigma^3)
///  + l (a+b+2t)/(2 sigma) - sigma (a-b)^2/(4 l)] - l^2/4) l^{-3/2} dl`,
///
/// with the principal branch of `l^{-3/2}`, truncated to `Re l` in `[-lambda, lambda]`.
pub fn ft_airy_kernel_contour(a: f64, b: f64, t: f64, sigma: f64, delta: f64, lambda: f64) -> Result<f64> {
    Ok(ft_airy_kernel_contour_complex(a, b, t, sigma, delta, lambda)?.re)
}

/// Like [`ft_airy_kernel_contour`] but returns the assembled complex value;
/// its imaginary part measures the quadrature error.
pub fn ft_airy_kernel_contour_complex(
    a: f64,
    b: f64,
    t: f64,
    sigma: f64,
    delta: f64,
    lambda: f64,
) -> Result<Complex64> {
    if !(delta > 0.0) {
        return invalid(format!("contour height must be positive, got {delta}"));
    }
    if !(sigma > 0.0) {
        return invalid(format!("contour representation needs sigma > 0, got {sigma}"));
    }
    if !(lambda > 0.0) {
        return invalid(format!("contour half-length must be positive, got {lambda}"));
    }
    let panels = ((2.0 * lambda / CONTOUR_PANEL).ceil() as usize).max(2);
    let rule = composite_legendre(-lambda, lambda, panels, 20)?;
    let i = Complex64::i();
    let s3 = 12.0 * sigma.powi(3);
    let lin = (a + b + 2.0 * t) / (2.0 * sigma);
    let quad = sigma * (a - b) * (a - b) / 4.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let l = Complex64::new(s, delta);
        let expo = i * (l * l * l / s3 + l * lin - quad / l) - l * l / 4.0;
        acc += w * expo.exp() * l.powf(-1.5);
    }
    let pre = Complex64::from_polar(1.0, 0.75 * PI) / (4.0 * PI) * (sigma / PI).sqrt();
    let value = pre * acc;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(EdgeError::NumericFailure(format!(
            "contour integral at ({a}, {b}; t = {t}, sigma = {sigma}) is not finite"
        )));
    }
    Ok(value)
}

/// `K_{t,sigma}(z1, z2) = pi^{-1/2} e^{-y1^2/2} K_Ai(x1 + sigma y1 + t, x2 + sigma y2 + t) e^{-y2^2/2}`.
pub fn ksigma_2d(x1: f64, y1: f64, x2: f64, y2: f64, t: f64, sigma: f64) -> f64 {
    let k = airy_kernel(x1 + sigma * y1 + t, x2 + sigma * y2 + t);
    (-0.5 * (y1 * y1 + y2 * y2)).exp() * k / SQRT_PI
}

/// `a_sigma N_{0,sigma}(c_sigma + a_sigma x, c_sigma + a_sigma x)`, which tends
/// to `e^{-x}` as `sigma -> inf`. Evaluated on the saddle contour.
pub fn gumbel_limit_diag(x: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return invalid(format!("the Gumbel scaling needs sigma > 1, got {sigma}"));
    }
    let (a_s, c_s) = gumbel_constants(sigma)?;
    let arg = c_s + a_s * x;
    let delta = saddle_delta(arg, arg, 0.0, sigma);
    let value = ft_airy_kernel_contour(arg, arg, 0.0, sigma, delta, 12.0 + 2.0 * delta)?;
    Ok(a_s * value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gauss_legendre;
    use approx::assert_relative_eq;

    /// `int_0^Z Ai(a+z) Ai(b+z) dz` by brute-force composite quadrature.
    fn airy_kernel_by_quadrature(a: f64, b: f64, nodes: usize) -> f64 {
        let g = composite_legendre(0.0, 40.0, nodes / 20, 20).unwrap();
        g.integrate(|z| airy(a + z).0 * airy(b + z).0)
    }

    #[test]
    fn airy_kernel_examples() {
        assert_eq!(airy_kernel(0.3, 1.7), airy_kernel(1.7, 0.3));
        let k00 = airy_kernel(0.0, 0.0);
        assert_relative_eq!(k00, 0.258_819_403_792_806_8f64.powi(2), max_relative = 1e-14);
        assert_relative_eq!(k00, airy_kernel_by_quadrature(0.0, 0.0, 200), max_relative = 1e-12);
        let q = airy_kernel_by_quadrature(1.0, 2.0, 200);
        assert!((airy_kernel(1.0, 2.0) - q).abs() < 1e-9);
    }

    #[test]
    fn near_diagonal_branch_is_continuous() {
        for a in [-5.0, -1.0, 0.0, 2.5] {
            let b = a + 1.01 * CD_NEAR_DIAGONAL;
            assert!((airy_kernel(a, b) - airy_kernel_taylor(a, b)).abs() < 1e-11, "a = {a}");
            assert_relative_eq!(airy_kernel(a, a), airy_kernel_diag(a), max_relative = 1e-14);
        }
    }

    #[test]
    fn ft_kernel_small_sigma_limit_and_symmetry() {
        let n = ft_airy_kernel(1.0, 2.0, 0.0, 1e-3).unwrap();
        assert!((n - airy_kernel(1.0, 2.0)).abs() <= 1e-4);
        let (p, q) = (
            ft_airy_kernel(0.5, 2.0, 1.0, 1.5).unwrap(),
            ft_airy_kernel(2.0, 0.5, 1.0, 1.5).unwrap(),
        );
        assert_relative_eq!(p, q, max_relative = 1e-13);
        assert_eq!(ft_airy_kernel(1.0, 2.0, 0.5, 0.0).unwrap(), airy_kernel(1.5, 2.5));
    }

    #[test]
    fn ft_kernel_routes_agree() {
        let quad = ft_airy_kernel(0.2, 0.7, 2.0, 1.0).unwrap();
        let contour = ft_airy_kernel_contour_complex(0.2, 0.7, 2.0, 1.0, 2.0, 16.0).unwrap();
        assert!((quad - contour.re).abs() < 1e-8);
        assert!(contour.im.abs() < 1e-10);
    }

    #[test]
    fn contour_diagonal_matches_phi_weighted_quadrature() {
        // int Phi(y/sigma) Ai(y+t)^2 dy on a plain wide grid.
        let (t, sigma) = (3.0, 1.0);
        let g = composite_legendre(-12.0, 12.0, 48, 20).unwrap();
        let oracle = g.integrate(|y| phi(y / sigma) * airy(y + t).0.powi(2));
        let contour = ft_airy_kernel_contour(0.0, 0.0, t, sigma, 2.0, 16.0).unwrap();
        assert!((contour - oracle).abs() < 1e-8);
    }

    #[test]
    fn contour_is_delta_independent() {
        let v1 = ft_airy_kernel_contour(1.0, 1.0, 2.0, 1.0, 1.0, 14.0).unwrap();
        let v2 = ft_airy_kernel_contour(1.0, 1.0, 2.0, 1.0, 2.0, 16.0).unwrap();
        assert!((v1 - v2).abs() < 1e-9);
        assert!(ft_airy_kernel_contour(1.0, 1.0, 2.0, 1.0, 0.0, 16.0).is_err());
        assert!(ft_airy_kernel_contour(1.0, 1.0, 2.0, 1.0, -1.0, 16.0).is_err());
    }

    #[test]
    fn inner_window_tracks_the_peak() {
        let r = InnerRule::new(0.0, 1.0, 0.0, 32).unwrap();
        assert!(r.y_lo < -5.0 && r.y_lo > -12.0 && r.y_hi > 8.0, "{} {}", r.y_lo, r.y_hi);
        // Far right tail: the mass sits where Phi(y/sigma) is tiny.
        let r = InnerRule::new(30.0, 3.3, 0.0, 32).unwrap();
        assert!(r.y_lo < -30.0 && r.y_hi < 0.0, "{} {}", r.y_lo, r.y_hi);
        let w: f64 = r.weights.iter().sum();
        assert!(w > 0.0);
    }

    #[test]
    fn ksigma_examples() {
        let (t, s) = (0.4, 0.8);
        assert_relative_eq!(
            ksigma_2d(0.3, -0.7, 1.1, 0.4, t, s),
            ksigma_2d(1.1, 0.4, 0.3, -0.7, t, s),
            max_relative = 1e-14
        );
        let k0 = ksigma_2d(0.3, -0.7, 1.1, 0.4, t, 0.0);
        let direct = (-0.5 * (0.49 + 0.16f64)).exp() * airy_kernel(0.7, 1.5) / SQRT_PI;
        assert_eq!(k0, direct);
        // Gaussian envelope on the diagonal at (t, sigma) = (0, 1).
        let xs: Vec<f64> = gauss_legendre(40).unwrap().on_interval(0.0, 10.0).nodes;
        let ys = [-3.0, -1.0, 0.0, 0.5, 2.0];
        let sup = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| airy_kernel_diag(x + y)))
            .fold(0.0, f64::max);
        for &x in &xs {
            for &y in &ys {
                let k = ksigma_2d(x, y, x, y, 0.0, 1.0);
                assert!(k.abs() <= (-y * y).exp() * sup / SQRT_PI + 1e-15);
            }
        }
    }

    #[test]
    fn gumbel_diag_behaviour() {
        let target = (-1.0f64).exp();
        let errs: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&s| (gumbel_limit_diag(1.0, s).unwrap() - target).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(gumbel_limit_diag(3.0, 100.0).unwrap() < gumbel_limit_diag(1.0, 100.0).unwrap());
        for s in [2.0, 10.0, 100.0] {
            for x in [-1.0, 0.0, 2.0, 5.0] {
                assert!(gumbel_limit_diag(x, s).unwrap() > 0.0);
            }
        }
        assert!(gumbel_limit_diag(0.0, 1.0).is_err());
    }
}
