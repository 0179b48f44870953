//! The integro-differential Painleve II system
//! `p'' = (t + y + 2 E(t)) p`, `E(t) = int p(t, y)^2 dnu_sigma(y)`, with
//! `p(t, y) ~ Ai(t + y)` as `t -> inf`, solved on Gauss-Hermite nodes by
//! backward adaptive Runge-Kutta integration, and the distribution function
//! `F_sigma(t) = exp(-int_t^inf (s - t) E(s) ds)` reconstructed from it.

use crate::error::{invalid, EdgeError, Result};
use crate::fredholm::{DistEval, Method};
use crate::specfun::{airy, gauss_hermite, SQRT_PI};

/// Solutions with `|p| > BLOWUP` are treated as unstable.
pub const BLOWUP: f64 = 1e6;
/// Lowest `t` the backward integration is allowed to reach.
pub const T_MIN_WALL: f64 = -2.0;

/// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output coefficients (Hairer's `contd5`).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Quartic interpolant over one accepted step `[t_start, t_start + h]`.
#[derive(Debug, Clone)]
struct Segment {
    t_start: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl Segment {
    fn theta(&self, t: f64) -> f64 {
        (t - self.t_start) / self.h
    }

    fn value(&self, i: usize, t: f64) -> f64 {
        let th = self.theta(t);
        let th1 = 1.0 - th;
        let r = &self.r;
        r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
    }

    /// `d/dt` of the interpolant.
    fn derivative(&self, i: usize, t: f64) -> f64 {
        let th = self.theta(t);
        let r = &self.r;
        // y = r0 + r1 th + r2 (th - th^2) + r3 (th^2 - th^3) + r4 (th^2 - 2 th^3 + th^4)
        let d = r[1][i]
            + r[2][i] * (1.0 - 2.0 * th)
            + r[3][i] * (2.0 * th - 3.0 * th * th)
            + r[4][i] * (2.0 * th - 6.0 * th * th + 4.0 * th * th * th);
        d / self.h
    }
}

/// Discretized solution of the integro-differential Painleve II system.
#[derive(Debug, Clone)]
pub struct PiiState {
    pub sigma: f64,
    pub t0: f64,
    pub t_min: f64,
    pub ode_tol: f64,
    /// Accepted step points, decreasing from `t0` to `t_min`.
    pub t_grid: Vec<f64>,
    /// `y_k = sigma u_k` with `u_k` the Gauss-Hermite nodes.
    pub y_nodes: Vec<f64>,
    /// Gauss-Hermite weights for `e^{-u^2}`.
    pub gh_weights: Vec<f64>,
    /// `p[i][k] = p(t_grid[i], y_k)`.
    pub p: Vec<Vec<f64>>,
    pub pdot: Vec<Vec<f64>>,
    /// `E(t_grid[i]) = pi^{-1/2} sum_k w_k p(t_grid[i], y_k)^2`.
    pub e: Vec<f64>,
    segments: Vec<Segment>,
}

struct System {
    y: Vec<f64>,
    c: Vec<f64>,
}

impl System {
    fn m(&self) -> usize {
        self.y.len()
    }

    fn energy(&self, p: &[f64]) -> f64 {
        self.c.iter().zip(p).map(|(c, p)| c * p * p).sum()
    }

    /// State `[p, p', I0, I1]` with `I0 = int_t^{t0} E`, `I1 = int_t^{t0} s E(s) ds`.
    fn rhs(&self, t: f64, u: &[f64], out: &mut [f64]) {
        let m = self.m();
        let e = self.energy(&u[..m]);
        for k in 0..m {
            out[k] = u[m + k];
            out[m + k] = (t + self.y[k] + 2.0 * e) * u[k];
        }
        out[2 * m] = -e;
        out[2 * m + 1] = -t * e;
    }
}

/// Solves the system backward from `t0` to `t_min` on `m_h` Hermite nodes.
///
/// `sigma = 0` is accepted: every node then sits at `y = 0` and the system is
/// the Hastings-McLeod equation `q'' = t q + 2 q^3`, most cheaply with `m_h = 1`.
pub fn solve_idpii(sigma: f64, t_min: f64, t0: f64, m_h: usize, ode_tol: f64) -> Result<PiiState> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be a non-negative number, got {sigma}"));
    }
    if !(t0 >= 6.0) || !t0.is_finite() {
        return invalid(format!("the seed point must satisfy t0 >= 6, got {t0}"));
    }
    if !(t_min >= T_MIN_WALL) || !(t_min < t0) {
        return invalid(format!(
            "t_min must lie in [{T_MIN_WALL}, t0); got {t_min}. Deeper left tails need the Fredholm route"
        ));
    }
    if m_h == 0 || (sigma > 0.0 && m_h < 12) {
        return invalid(format!("need at least 12 Hermite nodes for sigma > 0, got {m_h}"));
    }
    if !(ode_tol > 0.0 && ode_tol < 1e-2) {
        return invalid(format!("ode_tol must lie in (0, 1e-2), got {ode_tol}"));
    }
    let gh = gauss_hermite(m_h)?;
    let sys = System {
        y: gh.nodes.iter().map(|u| sigma * u).collect(),
        c: gh.weights.iter().map(|w| w / SQRT_PI).collect(),
    };
    let m = m_h;
    let dim = 2 * m + 2;
    let mut u = vec![0.0; dim];
    for k in 0..m {
        let (ai, aip) = airy(t0 + sys.y[k]);
        u[k] = ai;
        u[m + k] = aip;
    }

    let mut state = PiiState {
        sigma,
        t0,
        t_min,
        ode_tol,
        t_grid: vec![t0],
        y_nodes: sys.y.clone(),
        gh_weights: gh.weights.clone(),
        p: vec![u[..m].to_vec()],
        pdot: vec![u[m..2 * m].to_vec()],
        e: vec![sys.energy(&u[..m])],
        segments: Vec::new(),
    };

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    // Each component is controlled relative to the largest magnitude it has
    // reached, since p grows by orders of magnitude from its seed.
    let mut peak: Vec<f64> = u.iter().map(|v| v.abs().max(1e-300)).collect();
    peak[2 * m] = state.e[0].max(1e-300);
    peak[2 * m + 1] = (t0 * state.e[0]).abs().max(1e-300);
    let mut t = t0;
    sys.rhs(t, &u, &mut k[0]);
    let mut h = -0.01f64;
    let mut rejected_last = false;
    while t > t_min {
        if t + h < t_min {
            h = t_min - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = u[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                tmp[i] = acc;
            }
            sys.rhs(t + C[s] * h, &tmp, &mut k[s]);
            if s == 6 {
                y_new.copy_from_slice(&tmp);
            }
        }
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut est = 0.0;
            for j in 0..7 {
                est += E[j] * k[j][i];
            }
            let scale = ode_tol * peak[i].max(y_new[i].abs());
            err = err.max((h * est / scale).abs());
        }
        if !err.is_finite() {
            return Err(EdgeError::Instability { t });
        }
        if err <= 1.0 {
            let mut r: [Vec<f64>; 5] = Default::default();
            r[0] = u.clone();
            r[1] = (0..dim).map(|i| y_new[i] - u[i]).collect();
            r[2] = (0..dim).map(|i| h * k[0][i] - r[1][i]).collect();
            r[3] = (0..dim).map(|i| r[1][i] - h * k[6][i] - r[2][i]).collect();
            r[4] = (0..dim)
                .map(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>())
                .collect();
            state.segments.push(Segment { t_start: t, h, r });
            t += h;
            if (t - t_min).abs() < 1e-14 * (1.0 + t_min.abs()) {
                t = t_min;
            }
            u.copy_from_slice(&y_new);
            for (pk, v) in peak.iter_mut().zip(&u) {
                *pk = pk.max(v.abs());
            }
            let first = k[6].clone();
            k[0] = first;
            if u[..m].iter().any(|p| p.abs() > BLOWUP || !p.is_finite()) {
                return Err(EdgeError::Instability { t });
            }
            state.t_grid.push(t);
            state.p.push(u[..m].to_vec());
            state.pdot.push(u[m..2 * m].to_vec());
            state.e.push(sys.energy(&u[..m]));
            let fac = if rejected_last { 1.0 } else { 5.0 };
            h *= (0.9 * err.max(1e-10).powf(-0.2)).min(fac);
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected_last = true;
        }
        if h.abs() < 1e-12 {
            return Err(EdgeError::Instability { t });
        }
    }
    Ok(state)
}

impl PiiState {
    fn m(&self) -> usize {
        self.y_nodes.len()
    }

    fn segment(&self, t: f64) -> Result<&Segment> {
        if !(t >= self.t_min && t <= self.t0) {
            return invalid(format!("t = {t} outside the solved range [{}, {}]", self.t_min, self.t0));
        }
        // Segments run backward: t_start decreasing.
        let idx = self
            .segments
            .partition_point(|s| s.t_start + s.h > t)
            .min(self.segments.len() - 1);
        Ok(&self.segments[idx])
    }

    /// `p(t, y_k)` from the dense output.
    pub fn p_at(&self, t: f64, k: usize) -> Result<f64> {
        Ok(self.segment(t)?.value(k, t))
    }

    /// `E(t)` from the dense output.
    pub fn energy_at(&self, t: f64) -> Result<f64> {
        let s = self.segment(t)?;
        Ok((0..self.m())
            .map(|k| self.gh_weights[k] / SQRT_PI * s.value(k, t).powi(2))
            .sum())
    }

    /// `int_t^inf (s - t) E(s) ds`: the integrated part on `[t, t0]` plus the
    /// linear tail beyond `t0`, where `p(s, y) = Ai(s + y)`.
    pub fn double_integral(&self, t: f64) -> Result<f64> {
        let s = self.segment(t)?;
        let m = self.m();
        let i0 = s.value(2 * m, t);
        let i1 = s.value(2 * m + 1, t);
        Ok(i1 - t * i0 + self.linear_tail(t))
    }

    /// `int_{t0}^inf (s - t) int Ai(s + y)^2 dnu(y) ds` by the closed forms
    /// `int_X^inf Ai^2 = Ai'(X)^2 - X Ai(X)^2` and
    /// `int_X^inf x Ai^2 = -(X^2 Ai^2 - X Ai'^2 + Ai Ai')/3`.
    fn linear_tail(&self, t: f64) -> f64 {
        self.y_nodes
            .iter()
            .zip(&self.gh_weights)
            .map(|(&y, &w)| {
                let x = self.t0 + y;
                let (ai, aip) = airy(x);
                let first = aip * aip - x * ai * ai;
                let g = (x * x * ai * ai - x * aip * aip + ai * aip) / 3.0;
                w / SQRT_PI * (-g - (y + t) * first)
            })
            .sum()
    }
}

/// `F_sigma(t) = exp(-int_t^inf (s - t) E(s) ds)` from a solved state.
#[allow(non_snake_case)]
pub fn F_from_idpii(state: &PiiState, t: f64) -> Result<DistEval> {
    let d = state.double_integral(t)?;
    let ln_value = -d;
    let value = ln_value.exp();
    // The tail beyond t0 neglects the nonlinear term, of relative size E(t0).
    let e0 = state.e[0];
    let err_est = value * (10.0 * state.ode_tol * (1.0 + d.abs()) + e0 * (1.0 + d.abs()));
    Ok(DistEval {
        method: Method::Idpii,
        t,
        sigma: state.sigma,
        value,
        ln_value,
        complement: -ln_value.exp_m1(),
        err_est,
        complement_bounds: None,
        meta: vec![
            ("m_h", state.m() as f64),
            ("t0", state.t0),
            ("ode_tol", state.ode_tol),
            ("steps", state.segments.len() as f64),
        ],
        route: "idpii_dp54",
    })
}

/// `-p'' + (t + y_k + 2 E(t)) p` at `(t, y_k)`, with `p''` taken from the
/// dense output of `p'`.
pub fn stark_residual(state: &PiiState, t: f64, k: usize) -> Result<f64> {
    let m = state.m();
    if k >= m {
        return invalid(format!("node index {k} out of range for {m} nodes"));
    }
    let s = state.segment(t)?;
    let pdd = s.derivative(m + k, t);
    let p = s.value(k, t);
    let e: f64 = (0..m)
        .map(|j| state.gh_weights[j] / SQRT_PI * s.value(j, t).powi(2))
        .sum();
    Ok(-pdd + (t + state.y_nodes[k] + 2.0 * e) * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::{resolvent_at_origin, F_sigma};
    use approx::assert_relative_eq;

    #[test]
    fn argument_checks() {
        assert!(solve_idpii(1.0, -3.0, 8.0, 16, 1e-10).is_err());
        assert!(solve_idpii(1.0, -1.0, 5.0, 16, 1e-10).is_err());
        assert!(solve_idpii(1.0, -1.0, 8.0, 8, 1e-10).is_err());
        assert!(solve_idpii(-1.0, -1.0, 8.0, 16, 1e-10).is_err());
        assert!(solve_idpii(0.0, -1.0, 8.0, 1, 1e-10).is_ok());
    }

    #[test]
    fn seed_and_measure() {
        let s = solve_idpii(1.0, -2.0, 8.0, 24, 1e-10).unwrap();
        for (k, &y) in s.y_nodes.iter().enumerate() {
            assert!((s.p[0][k] - airy(8.0 + y).0).abs() <= 1e-8);
            assert_eq!(s.p_at(8.0, k).unwrap(), s.p[0][k]);
        }
        let total: f64 = s.gh_weights.iter().sum::<f64>() / SQRT_PI;
        assert!((total - 1.0).abs() < 1e-13);
        assert!(s.e.iter().all(|&e| e >= 0.0));
        for w in s.e.windows(2) {
            // t decreases along the grid, so E must not decrease.
            assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn linear_regime() {
        let s = solve_idpii(0.5, -2.0, 8.0, 24, 1e-10).unwrap();
        for t in [4.0, 5.0, 6.5] {
            assert!(2.0 * s.energy_at(t).unwrap() <= 1e-5);
            for (k, &y) in s.y_nodes.iter().enumerate() {
                assert!((s.p_at(t, k).unwrap() - airy(t + y).0).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn top_of_range_is_one() {
        let s = solve_idpii(1.0, -2.0, 8.0, 24, 1e-10).unwrap();
        assert!(F_from_idpii(&s, 8.0).unwrap().value >= 1.0 - 1e-8);
        assert!(F_from_idpii(&s, -2.5).is_err());
    }

    #[test]
    fn hastings_mcleod_against_resolvent() {
        let s = solve_idpii(0.0, -2.0, 8.0, 1, 1e-12).unwrap();
        for t in [-1.0, 0.0, 2.0] {
            let q = s.p_at(t, 0).unwrap();
            let oracle = resolvent_at_origin(t, 0.0, |x| airy(x + t).0, 80, 25.0 + 2.0 * (-t).max(0.0)).unwrap();
            assert!((q - oracle).abs() <= 1e-6, "t = {t}: {q} vs {oracle}");
        }
    }

    #[test]
    fn finite_temperature_profile_against_resolvent() {
        let s = solve_idpii(1.0, -2.0, 8.0, 24, 1e-11).unwrap();
        let k = 9;
        let y = s.y_nodes[k];
        for t in [-1.0, 1.0] {
            let oracle = resolvent_at_origin(t, 1.0, |x| airy(x + y + t).0, 80, 27.0).unwrap();
            assert!((s.p_at(t, k).unwrap() - oracle).abs() <= 1e-7, "t = {t}");
        }
    }

    #[test]
    fn agrees_with_fredholm() {
        let s = solve_idpii(1.0, -2.0, 8.0, 32, 1e-10).unwrap();
        let a = F_from_idpii(&s, 0.0).unwrap().value;
        let b = F_sigma(0.0, 1.0).unwrap().value;
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        let s0 = solve_idpii(0.0, -2.0, 8.0, 1, 1e-11).unwrap();
        let a = F_from_idpii(&s0, -2.0).unwrap().value;
        let b = F_sigma(-2.0, 0.0).unwrap().value;
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }

    #[test]
    fn hermite_resolution() {
        let a = solve_idpii(1.0, -2.0, 8.0, 16, 1e-11).unwrap();
        let b = solve_idpii(1.0, -2.0, 8.0, 32, 1e-11).unwrap();
        for t in [-2.0, 0.0, 2.0] {
            let fa = F_from_idpii(&a, t).unwrap().value;
            let fb = F_from_idpii(&b, t).unwrap().value;
            assert!((fa - fb).abs() <= 1e-7, "t = {t}: {fa} vs {fb}");
        }
    }

    #[test]
    fn stark_residuals() {
        let s = solve_idpii(1.0, -2.0, 8.0, 24, 1e-10).unwrap();
        let mid = s.y_nodes.len() / 2;
        assert!(stark_residual(&s, 0.0, mid).unwrap().abs() <= 10.0 * 1e-10);
        assert!(stark_residual(&s, 8.0, mid).unwrap().abs() <= 1e-6);
        let fine = solve_idpii(1.0, -2.0, 8.0, 24, 1e-11).unwrap();
        let coarse_max = (0..20)
            .map(|i| stark_residual(&s, -1.9 + 0.5 * i as f64, mid).unwrap().abs())
            .fold(0.0, f64::max);
        let fine_max = (0..20)
            .map(|i| stark_residual(&fine, -1.9 + 0.5 * i as f64, mid).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(fine_max < 0.5 * coarse_max, "{coarse_max} -> {fine_max}");
        assert!(stark_residual(&s, 0.0, 99).is_err());
    }

    #[test]
    fn weighted_profile_relation() {
        // q(t, u) = pi^{-1/4} e^{-u^2/2} p(t, sigma u) gives E = sum_k w_k e^{u_k^2} q_k^2.
        let s = solve_idpii(2.0, -1.0, 8.0, 20, 1e-10).unwrap();
        let t = 0.5;
        let e = s.energy_at(t).unwrap();
        let gh = gauss_hermite(20).unwrap();
        let via_q: f64 = (0..20)
            .map(|k| {
                let u = gh.nodes[k];
                let q = PI_M14 * (-0.5 * u * u).exp() * s.p_at(t, k).unwrap();
                gh.weights[k] * (u * u).exp() * q * q
            })
            .sum();
        assert_relative_eq!(e, via_q, max_relative = 1e-12);
    }

    const PI_M14: f64 = 0.751_125_544_464_942_5;
}
