//! Asymptotic expansions of `F_sigma(t)`: right tails for moderate and large
//! `sigma`, the near-Hermitian left tail, the Gumbel scaling constants and the
//! Tracy-Widom tails.

use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{invalid, Result};
use crate::specfun::{composite_legendre, ln_phi, phi, phi_density};

/// `zeta'(-1) = 1/12 - ln A` with `ln A = 0.24875447703378426...` the
/// logarithm of the Glaisher-Kinkelin constant.
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;

/// Which asymptotic formula produced a [`TailExpansion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    RightThm2,
    RightThm3,
    LeftCor4,
    Gumbel,
    TwLeft,
    TwRight,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::RightThm2 => "right_thm2",
            Regime::RightThm3 => "right_thm3",
            Regime::LeftCor4 => "left_cor4",
            Regime::Gumbel => "gumbel",
            Regime::TwLeft => "tw_left",
            Regime::TwRight => "tw_right",
        }
    }
}

/// One evaluation of an asymptotic formula.
#[derive(Debug, Clone, PartialEq)]
pub struct TailExpansion {
    pub regime: Regime,
    pub t: f64,
    pub sigma: f64,
    /// Approximation of `F_sigma(t)`.
    pub value: f64,
    pub ln_value: f64,
    /// Approximation of `1 - F_sigma(t)`, computed without cancellation.
    pub complement: f64,
    /// Whether `(t, sigma)` lies in the window described by `window`.
    pub valid: bool,
    pub window: &'static str,
    /// Named intermediate quantities.
    pub pieces: Vec<(&'static str, f64)>,
}

impl TailExpansion {
    fn from_ln(regime: Regime, t: f64, sigma: f64, ln_value: f64, valid: bool, window: &'static str) -> Self {
        TailExpansion {
            regime,
            t,
            sigma,
            value: ln_value.exp(),
            ln_value,
            complement: -ln_value.exp_m1(),
            valid,
            window,
            pieces: Vec::new(),
        }
    }

    fn from_complement(regime: Regime, t: f64, sigma: f64, complement: f64, valid: bool, window: &'static str) -> Self {
        TailExpansion {
            regime,
            t,
            sigma,
            value: 1.0 - complement,
            ln_value: (-complement).ln_1p(),
            complement,
            valid,
            window,
            pieces: Vec::new(),
        }
    }

    pub fn piece(&self, name: &str) -> Option<f64> {
        self.pieces.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

fn check_ab_args(t: f64, sigma: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("A and B need t > 0, got {t}"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("A and B need sigma >= 0, got {sigma}"));
    }
    Ok(())
}

/// `(A, B)` in the form expanded around `sigma^4 / t = 0`.
///
/// With `q = sigma^2 / (2 sqrt t)` and `r = sqrt(1 + q^2)` the exponent is
/// `B = (4/3) t^{3/2} (r^3 - (3/2) q - q^3)`, evaluated as
/// `(4/3) t^{3/2} (1 - q / (2 (r + q))) / (r + q)` to avoid cancellation.
pub fn ab_small_sigma(t: f64, sigma: f64) -> Result<(f64, f64)> {
    check_ab_args(t, sigma)?;
    let t32 = t * t.sqrt();
    let q = sigma * sigma / (2.0 * t.sqrt());
    let r = (1.0 + q * q).sqrt();
    let b = (4.0 / 3.0) * t32 * (1.0 - q / (2.0 * (r + q))) / (r + q);
    // sqrt(4 + sigma^4/t) - sigma^2/sqrt(t) = 2 (r - q) = 2 / (r + q)
    let z = 4.0 + 4.0 * q * q;
    let a = (2.0 / (r + q)).powf(-2.5) * z.powf(-0.25) / (2.0 * PI * t32);
    Ok((a, b))
}

/// `(A, B)` in the form expanded around `t / sigma^4 = 0`; needs `sigma > 0`.
///
/// With `s = sqrt(1 + 4t/sigma^4)`, `B = (sigma^6/6)((1+x)^{3/2} - 1 - (3/2)x)`
/// factors as `(sigma^6/6)(s - 1)^2 (s + 1/2)`.
pub fn ab_large_sigma(t: f64, sigma: f64) -> Result<(f64, f64)> {
    check_ab_args(t, sigma)?;
    if sigma == 0.0 {
        return invalid("the large-sigma form of A and B needs sigma > 0");
    }
    let s4 = sigma.powi(4);
    let x = 4.0 * t / s4;
    let s = (1.0 + x).sqrt();
    let s_minus_1 = x / (s + 1.0);
    let b = sigma.powi(6) / 6.0 * s_minus_1 * s_minus_1 * (s + 0.5);
    let a = s4 / (64.0 * PI * t.powf(2.5)) * (1.0 + s).powf(2.5) * (1.0 + x).powf(-0.25);
    Ok((a, b))
}

/// `(A, B)`, dispatching on `sigma^4 <= t`.
pub fn ab_of(t: f64, sigma: f64) -> Result<(f64, f64)> {
    if sigma.powi(4) <= t {
        ab_small_sigma(t, sigma)
    } else {
        ab_large_sigma(t, sigma)
    }
}

pub fn a_of(t: f64, sigma: f64) -> Result<f64> {
    Ok(ab_of(t, sigma)?.0)
}

pub fn b_of(t: f64, sigma: f64) -> Result<f64> {
    Ok(ab_of(t, sigma)?.1)
}

const THM2_WINDOW: &str = "t >= 4 and 0 <= sigma <= t^0.9";

/// `F_sigma(t) ~ 1 - A(t, sigma) e^{-B(t, sigma)}`.
pub fn right_tail_thm2(t: f64, sigma: f64) -> Result<TailExpansion> {
    let (a, b) = ab_of(t, sigma)?;
    let valid = t >= 4.0 && sigma <= t.powf(0.9);
    let mut e = TailExpansion::from_complement(Regime::RightThm2, t, sigma, a * (-b).exp(), valid, THM2_WINDOW);
    e.pieces = vec![("A", a), ("B", b)];
    Ok(e)
}

/// The Tracy-Widom right tail, `1 - F_0(t) ~ e^{-(4/3) t^{3/2}} / (16 pi t^{3/2})`.
pub fn tw_right_tail(t: f64) -> Result<TailExpansion> {
    let mut e = right_tail_thm2(t, 0.0)?;
    e.regime = Regime::TwRight;
    e.window = "t >= 4";
    e.valid = t >= 4.0;
    Ok(e)
}

/// Nodes on `v` in `(0, v_max)` for integrals of `g(x + v^2)` where `g(z)`
/// decays like `e^{-z^2}`; past `v_max` the integrand has dropped by `e^{-64}`
/// relative to its value at `v = 0`.
fn v_grid(x: f64, panels: usize) -> Result<crate::specfun::QuadGrid> {
    let v_max = ((x * x + 64.0).sqrt() - x).sqrt();
    composite_legendre(0.0, v_max, panels, 20)
}

const CD_PANELS: usize = 8;

fn check_cd_arg(x: f64) -> Result<()> {
    if !(x >= -1.0) || !x.is_finite() {
        return invalid(format!("C and D are evaluated for x >= -1, got {x}"));
    }
    Ok(())
}

fn c_with(x: f64, panels: usize) -> Result<f64> {
    check_cd_arg(x)?;
    let g = v_grid(x, panels)?;
    Ok(2.0 / PI * g.integrate(|v| v * v * ln_phi(x + v * v)))
}

fn d_with(x: f64, panels: usize) -> Result<f64> {
    check_cd_arg(x)?;
    let g = v_grid(x, panels)?;
    Ok(2.0 / PI * g.integrate(|v| ln_phi(x + v * v)))
}

fn dprime_with(x: f64, panels: usize) -> Result<f64> {
    check_cd_arg(x)?;
    let g = v_grid(x, panels)?;
    Ok(2.0 / PI
        * g.integrate(|v| {
            let z = x + v * v;
            phi_density(z) / phi(z)
        }))
}

/// `C(x) = (1/pi) int_0^inf sqrt(y) ln Phi(x + y) dy`.
pub fn c_of(x: f64) -> Result<f64> {
    c_with(x, CD_PANELS)
}

/// `D(x) = (1/pi) int_0^inf y^{-1/2} ln Phi(x + y) dy`.
pub fn d_of(x: f64) -> Result<f64> {
    d_with(x, CD_PANELS)
}

/// `D'(x) = (1/pi) int_0^inf y^{-1/2} Phi'(x + y) / Phi(x + y) dy`.
pub fn dprime_of(x: f64) -> Result<f64> {
    dprime_with(x, CD_PANELS)
}

/// Values of `C`, `D` and `D'` with twice the nodes, for refinement checks.
pub fn cd_refined(x: f64) -> Result<(f64, f64, f64)> {
    Ok((
        c_with(x, 2 * CD_PANELS)?,
        d_with(x, 2 * CD_PANELS)?,
        dprime_with(x, 2 * CD_PANELS)?,
    ))
}

/// `(1/4) int_w^inf D'(u)^2 du`.
pub fn dprime_square_integral(w: f64) -> Result<f64> {
    check_cd_arg(w)?;
    // D'(u)^2 decays like e^{-2u^2}; the cut loses a factor e^{-70}.
    let span = (w * w + 35.0).sqrt() - w;
    let g = composite_legendre(w, w + span, 6, 20)?;
    let mut acc = 0.0;
    for (&u, &wt) in g.nodes.iter().zip(&g.weights) {
        acc += wt * dprime_of(u)?.powi(2);
    }
    Ok(0.25 * acc)
}

const THM3_WINDOW: &str = "t >= 4 and sigma >= 4";

/// `ln F_sigma(t) ~ sigma^{3/2} C(t/sigma) + (1/4) int_{t/sigma}^inf D'(u)^2 du`.
pub fn right_tail_thm3(t: f64, sigma: f64) -> Result<TailExpansion> {
    if !(sigma > 0.0) || !t.is_finite() {
        return invalid(format!("the large-sigma right tail needs sigma > 0, got {sigma}"));
    }
    let w = t / sigma;
    let c = c_of(w)?;
    let dsq = dprime_square_integral(w)?;
    let ln_value = sigma.powf(1.5) * c + dsq;
    let valid = t >= 4.0 && sigma >= 4.0;
    let mut e = TailExpansion::from_ln(Regime::RightThm3, t, sigma, ln_value, valid, THM3_WINDOW);
    e.pieces = vec![("omega", w), ("C", c), ("Dprime_sq_int", dsq)];
    Ok(e)
}

/// `t^3/12 - (1/8) ln|t| + (1/24) ln 2 + zeta'(-1)`, the leading terms of
/// `ln F_0(t)` as `t -> -inf`.
pub fn tw_left_tail_ln(t: f64) -> f64 {
    t.powi(3) / 12.0 - 0.125 * t.abs().ln() + LN_2 / 24.0 + ZETA_PRIME_MINUS_ONE
}

/// Tracy-Widom left tail as a probability.
pub fn tw_left_tail(t: f64) -> f64 {
    tw_left_tail_ln(t).exp()
}

const COR4_WINDOW: &str = "t <= -4 and 0 < sigma <= t^-2";

/// Left tail for `0 < sigma <= t^{-2}`. The correction integral
/// `int_0^{-t sqrt(sigma)} (t sqrt(sigma) + x)(u(x) - 1/(8x^2)) dx` is dropped:
/// `u(x) - 1/(8x^2) = O(x^2)` because `int (chi_[0,inf) - Phi) = 0`, so the
/// dropped term is `O((t sqrt(sigma))^4)` inside the window.
pub fn left_tail_cor4(t: f64, sigma: f64) -> Result<TailExpansion> {
    if !(t < 0.0) || !t.is_finite() {
        return invalid(format!("the left tail needs t < 0, got {t}"));
    }
    if !(sigma >= 0.0) {
        return invalid(format!("sigma must be non-negative, got {sigma}"));
    }
    let ln_value = tw_left_tail_ln(t);
    let valid = t <= -4.0 && sigma > 0.0 && sigma <= 1.0 / (t * t);
    let mut e = TailExpansion::from_ln(Regime::LeftCor4, t, sigma, ln_value, valid, COR4_WINDOW);
    let scale = t * sigma.sqrt();
    e.pieces = vec![("zeta_prime_m1", ZETA_PRIME_MINUS_ONE), ("dropped_order", scale.powi(4))];
    Ok(e)
}

/// `(int_0^inf (1 - Phi), int_{-inf}^0 Phi)`; their difference is
/// `int (chi_[0,inf) - Phi)`.
pub fn step_defect_halves() -> Result<(f64, f64)> {
    let g = composite_legendre(0.0, 8.0, 8, 20)?;
    let right = g.integrate(|y| 1.0 - phi(y));
    let left = g.integrate(|y| phi(-y));
    Ok((right, left))
}

/// `(a_sigma, c_sigma)` with `a = sigma / sqrt(6 ln sigma)` and
/// `c = a (3 ln sigma - (5/4) ln(6 ln sigma) - ln(2 pi))`.
pub fn gumbel_constants(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 1.0) || !sigma.is_finite() {
        return invalid(format!("Gumbel constants need sigma > 1, got {sigma}"));
    }
    let l = sigma.ln();
    let a = sigma / (6.0 * l).sqrt();
    let c = a * (3.0 * l - 1.25 * (6.0 * l).ln() - (2.0 * PI).ln());
    Ok((a, c))
}

/// `e^{-e^{-t}}`.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// `F_sigma(t) ~ G((t - c_sigma) / a_sigma)` for large `sigma`.
pub fn gumbel_tail(t: f64, sigma: f64) -> Result<TailExpansion> {
    let (a, c) = gumbel_constants(sigma)?;
    let x = (t - c) / a;
    let ln_value = -(-x).exp();
    let mut e = TailExpansion::from_ln(Regime::Gumbel, t, sigma, ln_value, sigma >= 100.0, "sigma >= 100");
    e.pieces = vec![("a_sigma", a), ("c_sigma", c), ("x", x)];
    Ok(e)
}

/// `gamma_n = (ln n - 5 ln ln n - ln(2 pi^4)) / 2`.
pub fn ginue_gamma(n: usize) -> Result<f64> {
    if n < 16 {
        return invalid(format!("gamma_n needs n >= 16, got {n}"));
    }
    let l = (n as f64).ln();
    Ok(0.5 * (l - 5.0 * l.ln() - (2.0 * PI.powi(4)).ln()))
}

/// Leading large-`omega` behaviour of `C(omega)`.
pub fn c_asymptotic(w: f64) -> f64 {
    -w.powf(-2.5) / (8.0 * PI * SQRT_2) * (-w * w).exp()
}

/// Leading large-`omega` behaviour of `D'(omega)`.
pub fn dprime_asymptotic(w: f64) -> f64 {
    w.powf(-0.5) / (PI * SQRT_2) * (-w * w).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zeta_constant_from_glaisher() {
        let ln_glaisher = 0.248_754_477_033_784_262_5;
        assert_relative_eq!(ZETA_PRIME_MINUS_ONE, 1.0 / 12.0 - ln_glaisher, max_relative = 1e-15);
    }

    #[test]
    fn ab_at_zero_sigma() {
        let (a, b) = ab_of(4.0, 0.0).unwrap();
        assert_relative_eq!(b, 32.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(a, 1.0 / (128.0 * PI), max_relative = 1e-15);
        assert!(ab_of(0.0, 1.0).is_err());
        assert!(ab_of(-1.0, 1.0).is_err());
        assert!(ab_large_sigma(4.0, 0.0).is_err());
    }

    #[test]
    fn ab_forms_agree_on_example() {
        let (a1, b1) = ab_small_sigma(4.0, 2.0).unwrap();
        let (a2, b2) = ab_large_sigma(4.0, 2.0).unwrap();
        assert_relative_eq!(a1, a2, max_relative = 1e-12);
        assert_relative_eq!(b1, b2, max_relative = 1e-12);
        // Direct transcription of both forms at a well-conditioned point.
        let (t, s) = (4.0f64, 2.0f64);
        let b_direct = (4.0 / 3.0) * t.powf(1.5) * (1.0 + s.powi(4) / (4.0 * t)).powf(1.5) - t * s * s - s.powi(6) / 6.0;
        let a_direct = 1.0 / (2.0 * PI * t.powf(1.5))
            * ((4.0 + s.powi(4) / t).sqrt() - s * s / t.sqrt()).powf(-2.5)
            * (4.0 + s.powi(4) / t).powf(-0.25);
        assert_relative_eq!(b1, b_direct, max_relative = 1e-12);
        assert_relative_eq!(a1, a_direct, max_relative = 1e-12);
    }

    #[test]
    fn ab_forms_agree_on_grid() {
        for i in 0..=20 {
            let t = 1.0 + 99.0 * i as f64 / 20.0;
            for j in 1..=20 {
                let s = 10.0 * j as f64 / 20.0;
                let (a1, b1) = ab_small_sigma(t, s).unwrap();
                let (a2, b2) = ab_large_sigma(t, s).unwrap();
                assert_relative_eq!(a1, a2, max_relative = 1e-12);
                assert_relative_eq!(b1, b2, max_relative = 1e-12);
                assert!(a1 > 0.0 && b1 > 0.0);
            }
        }
    }

    #[test]
    fn b_deep_sigma_expansion() {
        let (t, s) = (16.0f64, 3.0f64);
        let b = b_of(t, s).unwrap();
        let trunc = (t / s).powi(2) - 2.0 * t.powi(3) / (3.0 * s.powi(6));
        // The next term of the series is +t^4 sigma^{-10}.
        let order = t.powi(4) * s.powi(-10);
        assert!((b - trunc).abs() <= 1.5 * order, "{} vs {}", b - trunc, order);
        assert!((b - trunc - order).abs() < (b - trunc).abs());
    }

    #[test]
    fn b_large_t_expansion_has_inverse_sqrt_remainder() {
        let s = 0.5f64;
        let scaled: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0]
            .iter()
            .map(|&t: &f64| {
                let lead = (4.0 / 3.0) * t.powf(1.5) + 0.5 * s.powi(4) * t.sqrt() - t * s * s - s.powi(6) / 6.0;
                (b_of(t, s).unwrap() - lead).abs() * t.sqrt()
            })
            .collect();
        let k = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(k < 0.01, "{scaled:?}");
        for w in scaled.windows(2) {
            assert!(w[1] < 2.0 * w[0] + 1e-9, "{scaled:?}");
        }
    }

    #[test]
    fn thm2_reduces_to_tracy_widom_formula() {
        let t = 6.0f64;
        let e = right_tail_thm2(t, 0.0).unwrap();
        let tw = (-(4.0 / 3.0) * t.powf(1.5)).exp() / (16.0 * PI * t.powf(1.5));
        assert_relative_eq!(e.complement, tw, max_relative = 1e-14);
        assert_relative_eq!(tw, 4.2e-12, max_relative = 0.02);
        assert!(e.valid);
        assert!(!right_tail_thm2(5.0, 10.0).unwrap().valid);
        assert_eq!(tw_right_tail(t).unwrap().complement, e.complement);
    }

    #[test]
    fn c_and_d_signs_and_asymptotics() {
        for x in [-1.0, 0.0, 0.5, 2.0, 4.0, 6.0] {
            assert!(c_of(x).unwrap() < 0.0);
            assert!(d_of(x).unwrap() < 0.0);
            assert!(dprime_of(x).unwrap() > 0.0);
        }
        let w = 4.0;
        assert_relative_eq!(c_of(w).unwrap(), c_asymptotic(w), max_relative = 0.15);
        assert_relative_eq!(dprime_of(w).unwrap(), dprime_asymptotic(w), max_relative = 0.15);
        assert!(c_of(-2.0).is_err());
    }

    #[test]
    fn dprime_is_derivative_of_d() {
        for x in [0.0, 1.0, 2.5] {
            let h = 1e-4;
            let fd = (d_of(x + h).unwrap() - d_of(x - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(fd, dprime_of(x).unwrap(), max_relative = 1e-7);
        }
    }

    #[test]
    fn cd_refinement() {
        for i in 0..=12 {
            let x = 0.5 * i as f64;
            let (c2, d2, p2) = cd_refined(x).unwrap();
            assert!((c_of(x).unwrap() - c2).abs() <= 1e-10);
            assert!((d_of(x).unwrap() - d2).abs() <= 1e-10);
            assert!((dprime_of(x).unwrap() - p2).abs() <= 1e-10);
        }
    }

    #[test]
    fn thm3_limits() {
        let mut last = 0.0;
        for t in [8.0, 12.0, 16.0, 24.0] {
            let e = right_tail_thm3(t, 4.0).unwrap();
            assert!(e.ln_value <= 0.0);
            assert!(e.value > last, "t = {t}");
            last = e.value;
        }
        assert!(last > 1.0 - 1e-12);
    }

    #[test]
    fn left_tail_pieces() {
        let (r, l) = step_defect_halves().unwrap();
        assert!((r - l).abs() <= 1e-10);
        assert_relative_eq!(r, 0.5 / crate::specfun::SQRT_PI, max_relative = 1e-12);
        let e = left_tail_cor4(-6.0, 1e-3).unwrap();
        assert!(e.valid);
        assert_eq!(e.ln_value, tw_left_tail_ln(-6.0));
        assert_eq!(left_tail_cor4(-6.0, 0.0).unwrap().ln_value, tw_left_tail_ln(-6.0));
        assert!(!left_tail_cor4(-6.0, 0.1).unwrap().valid);
        assert!(!left_tail_cor4(-2.0, 1e-3).unwrap().valid);
    }

    #[test]
    fn gumbel_examples() {
        assert_relative_eq!(gumbel_cdf(0.0), (-1.0f64).exp(), max_relative = 1e-15);
        let s = 3.0f64.exp();
        let (a, _) = gumbel_constants(s).unwrap();
        assert_relative_eq!(a, s / 18.0f64.sqrt(), max_relative = 1e-15);
        assert!(gumbel_constants(1.0).is_err());
        assert!(ginue_gamma(15).is_err());
        assert!(ginue_gamma(256).is_ok());
        for t in [2.0, 4.0, 8.0] {
            let defect = 1.0 - gumbel_cdf(t) - (-t).exp();
            assert!(defect.abs() <= (-2.0 * t).exp());
        }
    }

    proptest! {
        #[test]
        fn ab_positive(t in 0.5f64..200.0, s in 0.0f64..12.0) {
            let (a, b) = ab_of(t, s).unwrap();
            prop_assert!(a > 0.0 && b > 0.0);
        }

        #[test]
        fn thm3_log_nonpositive(t in 4.0f64..40.0, s in 4.0f64..20.0) {
            prop_assert!(right_tail_thm3(t, s).unwrap().ln_value <= 0.0);
        }
    }
}
