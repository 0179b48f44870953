//! Real-argument special functions and quadrature rules.
//!
//! The Airy function is evaluated by its Maclaurin series near the origin and
//! by a steepest-descent integral away from it. For `x > 0` the integral runs
//! through the saddle point of `exp(s^3/3 - x s)` and has a Gaussian integrand;
//! for `x < 0` the connection formula `Ai(z) + w Ai(wz) + w^2 Ai(w^2 z) = 0`
//! maps the argument onto the rays `arg z = +-pi/3`, where the same integral
//! still converges. Both branches deliver close to full relative precision,
//! which the tail computations rely on.

use std::f64::consts::{FRAC_1_PI, PI};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// `Ai(0)`.
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai'(0)`.
pub const AIP0_NEG: f64 = 0.258_819_403_792_806_8;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

const MACLAURIN_LO: f64 = -2.0;
const MACLAURIN_HI: f64 = 1.0;

/// Returns `(Ai(x), Ai'(x))`.
pub fn airy(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if (MACLAURIN_LO..=MACLAURIN_HI).contains(&x) {
        airy_maclaurin(x)
    } else if x > 0.0 {
        // e^{-zeta} underflows well before this point.
        if x > 105.0 {
            return (0.0, -0.0);
        }
        let (ai, aip) = airy_saddle(x, 0.0);
        (ai.re, aip.re)
    } else {
        let big = -x;
        let (ai, aip) = airy_saddle(big, PI / 3.0);
        let w2 = Complex64::from_polar(1.0, 4.0 * PI / 3.0);
        let w_conj = Complex64::from_polar(1.0, -PI / 3.0);
        (-2.0 * (w2 * ai).re, 2.0 * (w_conj * aip).re)
    }
}

pub fn airy_ai(x: f64) -> f64 {
    airy(x).0
}

pub fn airy_ai_prime(x: f64) -> f64 {
    airy(x).1
}

fn airy_maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f, g and their derivatives, see DLMF 9.4.1-9.4.2.
    let mut f = 1.0;
    let mut g = x;
    let mut fp = 0.0;
    let mut gp = 1.0;
    let mut a = 1.0;
    let mut b = x;
    let mut c = x * x / 2.0;
    let mut d = 1.0;
    fp += c;
    for k in 1..60 {
        let k3 = 3.0 * k as f64;
        a *= x3 / ((k3 - 1.0) * k3);
        b *= x3 / (k3 * (k3 + 1.0));
        d *= x3 / ((k3 - 2.0) * k3);
        f += a;
        g += b;
        gp += d;
        if k > 1 {
            c *= x3 / ((k3 - 3.0) * (k3 - 1.0));
            fp += c;
        }
        if a.abs() + b.abs() + c.abs() + d.abs() < 1e-18 {
            break;
        }
    }
    (AI0 * f - AIP0_NEG * g, AI0 * fp - AIP0_NEG * gp)
}

const SADDLE_PANEL_PTS: usize = 20;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_nodes_weights(SADDLE_PANEL_PTS))
}

/// Steepest-descent representation of `Ai` and `Ai'` at `z = r e^{i theta}`,
/// valid for `|theta| < pi`:
///
/// `Ai(z)  =  e^{-zeta} / (pi r^{1/4}) * int_0^inf e^{-e^{i theta/2} s^2} cos(phi) ds`
/// `Ai'(z) = -e^{-zeta} r^{1/4} / pi * int_0^inf e^{-e^{i theta/2} s^2}
///            (e^{i theta/2} cos(phi) + s r^{-3/4} sin(phi)) ds`
///
/// with `phi = s^3 / (3 r^{3/4})` and `zeta = (2/3) z^{3/2}`.
fn airy_saddle(r: f64, theta: f64) -> (Complex64, Complex64) {
    let half = Complex64::from_polar(1.0, theta / 2.0);
    let decay = half.re;
    // Integrand magnitude e^{-decay s^2} < 1e-18 beyond s_max.
    let s_max = (41.5 / decay).sqrt();
    let r34 = r.powf(0.75);
    let phase_max = s_max.powi(3) / (3.0 * r34) + half.im * s_max * s_max;
    let panels = ((phase_max / (2.0 * PI)).ceil() as usize).clamp(3, 40);
    let (gx, gw) = panel_rule();
    let h = s_max / panels as f64;
    let mut i_ai = Complex64::new(0.0, 0.0);
    let mut i_aip = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = p as f64 * h;
        for (&u, &w) in gx.iter().zip(gw) {
            let s = lo + 0.5 * h * (u + 1.0);
            let phi = s * s * s / (3.0 * r34);
            let e = (-half * (s * s)).exp() * (0.5 * h * w);
            let (sin, cos) = phi.sin_cos();
            i_ai += e * cos;
            i_aip += e * (half * cos + s / r34 * sin);
        }
    }
    let zeta = Complex64::from_polar(2.0 / 3.0 * r.powf(1.5), 1.5 * theta);
    let pre = (-zeta).exp() * FRAC_1_PI;
    let r14 = r.powf(0.25);
    (pre * i_ai / r14, -pre * i_aip * r14)
}

/// Complementary error function with relative accuracy in the right tail.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `Phi(x) = 1 - erfc(x)/2`, the distribution function of the weight `e^{-x^2}/sqrt(pi)`.
pub fn phi(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * erfc(-x)
    } else {
        1.0 - 0.5 * erfc(x)
    }
}

/// `Phi'(x) = e^{-x^2} / sqrt(pi)`.
pub fn phi_density(x: f64) -> f64 {
    (-x * x).exp() / SQRT_PI
}

/// `ln(erfc(y) / 2)`, finite for all finite `y`.
pub fn ln_half_erfc(y: f64) -> f64 {
    if y < 25.0 {
        (0.5 * erfc(y)).ln()
    } else {
        // erfc(y) = e^{-y^2}/(y sqrt(pi)) (1 - 1/(2y^2) + 3/(4y^4) - 15/(8y^6) + ...)
        let r = 1.0 / (2.0 * y * y);
        let series = 1.0 - r + 3.0 * r * r - 15.0 * r * r * r + 105.0 * r.powi(4);
        -y * y - (2.0 * y * SQRT_PI).ln() + series.ln()
    }
}

/// `ln Phi(x)`, accurate both where `Phi` is tiny and where it is close to one.
pub fn ln_phi(x: f64) -> f64 {
    if x < 0.0 {
        ln_half_erfc(-x)
    } else {
        (-0.5 * erfc(x)).ln_1p()
    }
}

/// Which classical rule a [`QuadGrid`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Legendre,
    Hermite,
}

/// Change of variables applied to a reference rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridMap {
    /// Affine image of `(-1, 1)` onto `(a, b)`.
    Interval { a: f64, b: f64 },
    /// The half-line `(anchor, inf)` truncated to `(anchor, anchor + length)`.
    HalfLine { anchor: f64, length: f64 },
    /// Several Gauss-Legendre panels glued at the given breakpoints.
    Composite { a: f64, b: f64, panels: usize },
}

/// Quadrature nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub map: Option<GridMap>,
}

impl QuadGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Maps a Legendre rule on `(-1, 1)` onto `(a, b)`.
    pub fn on_interval(&self, a: f64, b: f64) -> QuadGrid {
        debug_assert_eq!(self.kind, RuleKind::Legendre);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadGrid {
            kind: self.kind,
            nodes: self.nodes.iter().map(|&u| mid + half * u).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
            map: Some(GridMap::Interval { a, b }),
        }
    }

    /// Maps a Legendre rule onto `(anchor, anchor + length)`.
    pub fn half_line(&self, anchor: f64, length: f64) -> QuadGrid {
        let mut g = self.on_interval(anchor, anchor + length);
        g.map = Some(GridMap::HalfLine { anchor, length });
        g
    }
}

pub fn gauss_legendre(m: usize) -> Result<QuadGrid> {
    if m == 0 {
        return invalid("Gauss-Legendre rule needs at least one node");
    }
    let (nodes, weights) = legendre_nodes_weights(m);
    Ok(QuadGrid {
        kind: RuleKind::Legendre,
        nodes,
        weights,
        map: None,
    })
}

/// Gauss-Hermite rule for the weight `e^{-u^2}` on the real line.
pub fn gauss_hermite(m: usize) -> Result<QuadGrid> {
    if m == 0 {
        return invalid("Gauss-Hermite rule needs at least one node");
    }
    let (nodes, weights) = hermite_nodes_weights(m);
    Ok(QuadGrid {
        kind: RuleKind::Hermite,
        nodes,
        weights,
        map: None,
    })
}

/// Composite Gauss-Legendre rule with `panels` equal panels on `(a, b)`.
pub fn composite_legendre(a: f64, b: f64, panels: usize, per_panel: usize) -> Result<QuadGrid> {
    if panels == 0 || per_panel == 0 || !(b > a) {
        return invalid(format!(
            "composite rule on ({a}, {b}) with {panels} panels of {per_panel} nodes"
        ));
    }
    let (gx, gw) = legendre_nodes_weights(per_panel);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (&u, &w) in gx.iter().zip(&gw) {
            nodes.push(lo + 0.5 * h * (u + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    Ok(QuadGrid {
        kind: RuleKind::Legendre,
        nodes,
        weights,
        map: Some(GridMap::Composite { a, b, panels }),
    })
}

/// Newton iteration on the three-term recurrence, nodes ascending.
pub(crate) fn legendre_nodes_weights(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_eval(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_eval(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Golub-Welsch eigenvalues as starting points, polished by Newton steps on
/// the orthonormal Hermite recurrence.
fn hermite_nodes_weights(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![0.0], vec![SQRT_PI]);
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut start: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    start.sort_by(f64::total_cmp);
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for x0 in start {
        let mut x = x0;
        let mut pp = 0.0;
        for _ in 0..20 {
            let (p, d) = hermite_orthonormal(m, x);
            pp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 * (1.0 + x.abs()) {
                pp = hermite_orthonormal(m, x).1;
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / (pp * pp));
    }
    (nodes, weights)
}

/// Orthonormal Hermite polynomial of degree `m` (times `pi^{1/4}`-normalisation
/// as in the classical `gauher` routine) and the matching derivative.
fn hermite_orthonormal(m: usize, x: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=m {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * m as f64).sqrt() * p2)
}
