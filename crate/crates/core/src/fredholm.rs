//! Fredholm determinants on `L^2(0, inf)` by Nystrom discretization, the
//! distribution function `F_sigma(t)`, and traces of powers of the kernels.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, EdgeError, Result};
use crate::kernels::{
    airy_kernel_from_values, ft_airy_kernel_contour, saddle_delta, InnerRule, KernelSpec, KernelTag,
};
use crate::specfun::{airy, composite_legendre, gauss_hermite, gauss_legendre, phi, QuadGrid, SQRT_PI};

/// Which route produced a [`DistEval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fredholm,
    Idpii,
    TailThm2,
    TailThm3,
    TailLeft,
    GumbelLimit,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fredholm => "fredholm",
            Method::Idpii => "idpii",
            Method::TailThm2 => "tail_thm2",
            Method::TailThm3 => "tail_thm3",
            Method::TailLeft => "tail_left",
            Method::GumbelLimit => "gumbel_limit",
        }
    }
}

/// One evaluation of `F_sigma(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistEval {
    pub method: Method,
    pub t: f64,
    pub sigma: f64,
    pub value: f64,
    pub ln_value: f64,
    /// `1 - value`, computed without cancellation.
    pub complement: f64,
    pub err_est: f64,
    /// `[tr - tr^2, tr]`, the trace enclosure of the complement; it stays
    /// informative where the determinant saturates in double precision.
    pub complement_bounds: Option<(f64, f64)>,
    /// Grid sizes and truncation, plus the numerical route taken.
    pub meta: Vec<(&'static str, f64)>,
    pub route: &'static str,
}

impl DistEval {
    pub fn meta_value(&self, key: &str) -> Option<f64> {
        self.meta.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
    }
}

/// Symmetrized Nystrom matrix `sqrt(w_i) K(x_i, x_j) sqrt(w_j)` on `(0, L)`.
#[derive(Debug, Clone)]
pub struct NystromMatrix {
    pub grid: QuadGrid,
    pub entries: DMatrix<f64>,
}

/// Spectral data of `I - M`.
#[derive(Debug, Clone)]
pub struct DetParts {
    pub ln_det: f64,
    pub complement: f64,
    pub trace: f64,
    pub eigenvalues: Vec<f64>,
}

impl DetParts {
    pub fn det(&self) -> f64 {
        self.ln_det.exp()
    }
}

/// Tolerance for the eigenvalue window `[-tol, 1 + tol]`.
pub const SPECTRUM_TOL: f64 = 1e-10;

fn check_grid(m: usize, l: f64) -> Result<()> {
    if m < 8 {
        return invalid(format!("Nystrom grids need m >= 8, got {m}"));
    }
    if !(l > 0.0) || !l.is_finite() {
        return invalid(format!("truncation length must be positive, got {l}"));
    }
    Ok(())
}

fn half_line_grid(m: usize, l: f64) -> Result<QuadGrid> {
    Ok(gauss_legendre(m)?.half_line(0.0, l))
}

fn check_entries(grid: &QuadGrid, k: &DMatrix<f64>) -> Result<()> {
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            if !k[(i, j)].is_finite() {
                return Err(EdgeError::NonFiniteEntry {
                    i,
                    j,
                    xi: grid.nodes[i],
                    xj: grid.nodes[j],
                });
            }
        }
    }
    Ok(())
}

/// Nystrom matrix of an arbitrary symmetric kernel on `(0, L)`.
pub fn nystrom_matrix_fn<F>(kernel: F, m: usize, l: f64) -> Result<NystromMatrix>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    check_grid(m, l)?;
    let grid = half_line_grid(m, l)?;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let cols: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            (0..m)
                .map(|i| if i < j { f64::NAN } else { sw[i] * kernel(grid.nodes[i], grid.nodes[j]) * sw[j] })
                .collect()
        })
        .collect();
    let mut k = DMatrix::from_fn(m, m, |i, j| if i >= j { cols[j][i] } else { 0.0 });
    for j in 0..m {
        for i in 0..j {
            k[(i, j)] = k[(j, i)];
        }
    }
    check_entries(&grid, &k)?;
    Ok(NystromMatrix { grid, entries: k })
}

/// Gram factor `B` with `M = B B^T` for the finite-temperature kernel.
fn ft_gram_factor(grid: &QuadGrid, t: f64, sigma: f64, per_panel: usize) -> Result<DMatrix<f64>> {
    let inner = InnerRule::new(t, sigma, 0.0, per_panel)?;
    let m = grid.len();
    let n = inner.nodes.len();
    let sv: Vec<f64> = inner.weights.iter().map(|w| w.sqrt()).collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let sw = grid.weights[i].sqrt();
            let x = grid.nodes[i];
            (0..n).map(|k| sw * airy(x + inner.nodes[k] + t).0 * sv[k]).collect()
        })
        .collect();
    Ok(DMatrix::from_fn(m, n, |i, k| rows[i][k]))
}

/// Nystrom matrix of a one-dimensional kernel on `(0, L)` with `m` nodes.
pub fn nystrom_matrix(spec: &KernelSpec, m: usize, l: f64) -> Result<NystromMatrix> {
    check_grid(m, l)?;
    let t = spec.t;
    match spec.tag {
        KernelTag::Airy => {
            let grid = half_line_grid(m, l)?;
            let vals: Vec<(f64, f64)> = grid.nodes.iter().map(|&x| airy(x + t)).collect();
            let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
            let k = DMatrix::from_fn(m, m, |i, j| {
                let (xi, xj) = (grid.nodes[i] + t, grid.nodes[j] + t);
                let v = if i == j {
                    vals[i].1 * vals[i].1 - xi * vals[i].0 * vals[i].0
                } else {
                    airy_kernel_from_values(xi, vals[i].0, vals[i].1, xj, vals[j].0, vals[j].1)
                };
                sw[i] * v * sw[j]
            });
            check_entries(&grid, &k)?;
            Ok(NystromMatrix { grid, entries: k })
        }
        KernelTag::FtAiry => {
            if spec.sigma == 0.0 {
                let airy_spec = KernelSpec { tag: KernelTag::Airy, ..*spec };
                return nystrom_matrix(&airy_spec, m, l);
            }
            let grid = half_line_grid(m, l)?;
            let b = ft_gram_factor(&grid, t, spec.sigma, spec.knobs.m_z)?;
            let k = &b * b.transpose();
            check_entries(&grid, &k)?;
            Ok(NystromMatrix { grid, entries: k })
        }
        KernelTag::FtAiryContour | KernelTag::GumbelExt => {
            let s = *spec;
            nystrom_matrix_fn(move |a, b| s.eval(a, b).unwrap_or(f64::NAN), m, l)
        }
        KernelTag::Ksigma2d => invalid("the two-dimensional kernel has no one-dimensional Nystrom matrix"),
    }
}

/// `ln det(I - M)` and friends from the symmetric eigendecomposition of `M`.
/// Negative rounding-level eigenvalues are set to zero.
pub fn det_parts(m: &DMatrix<f64>) -> Result<DetParts> {
    let n = m.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = fm
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| EdgeError::NumericFailure(format!("symmetric eigensolver failed: {e:?}")))?;
    let mut ln_det = 0.0;
    let mut trace = 0.0;
    let mut eigenvalues = Vec::with_capacity(n);
    for &nu in eig.iter() {
        if !nu.is_finite() {
            return Err(EdgeError::NumericFailure("non-finite Nystrom eigenvalue".into()));
        }
        eigenvalues.push(nu);
        let nu = nu.max(0.0);
        if nu >= 1.0 {
            return Err(EdgeError::NumericFailure(format!(
                "Nystrom eigenvalue {nu} is not below one; the determinant vanishes to working precision"
            )));
        }
        ln_det += (-nu).ln_1p();
        trace += nu;
    }
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    Ok(DetParts {
        ln_det,
        complement: -ln_det.exp_m1(),
        trace,
        eigenvalues,
    })
}

/// `det(I - K)` on `L^2(0, inf)` with `m` Gauss-Legendre nodes on `(0, L)`.
///
/// The diagonal Gumbel kernel is not trace-class smooth; for it the
/// determinant is `exp(-tr)`, the limit of the discretization as the grid is
/// refined.
pub fn nystrom_det(spec: &KernelSpec, m: usize, l: f64) -> Result<f64> {
    Ok(nystrom_det_parts(spec, m, l)?.det())
}

pub fn nystrom_det_parts(spec: &KernelSpec, m: usize, l: f64) -> Result<DetParts> {
    if spec.tag == KernelTag::GumbelExt {
        check_grid(m, l)?;
        let grid = half_line_grid(m, l)?;
        let tr = grid.integrate(|x| (-(x + spec.t)).exp());
        return Ok(DetParts {
            ln_det: -tr,
            complement: -(-tr).exp_m1(),
            trace: tr,
            eigenvalues: Vec::new(),
        });
    }
    det_parts(&nystrom_matrix(spec, m, l)?.entries)
}

/// `det(I - K)` for an arbitrary symmetric kernel.
pub fn nystrom_det_fn<F>(kernel: F, m: usize, l: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    Ok(det_parts(&nystrom_matrix_fn(kernel, m, l)?.entries)?.det())
}

/// Default truncation `L = 25 + 2 max(0, -t) + sigma^2`; for `sigma > 7` the
/// last term is capped at `7 sigma + max(0, -t)`, past which the diagonal
/// `N(x, x)` has Gaussian-decayed below `Phi(-7)`.
pub fn default_length(t: f64, sigma: f64) -> f64 {
    let neg = (-t).max(0.0);
    25.0 + 2.0 * neg + (sigma * sigma).min(7.0 * sigma + neg)
}

/// Default node count: 80, raised for `sigma > 3` where the kernel narrows
/// and the truncation grows.
pub fn default_nodes(t: f64, sigma: f64) -> usize {
    if sigma <= 3.0 {
        return 80;
    }
    let l = default_length(t, sigma);
    // Near-diagonal width of the kernel is about sqrt(2 delta / sigma).
    let width = (4.0 / sigma).sqrt();
    ((1.5 * l / width) as usize).max(80)
}

/// Above this `sigma` the distribution function is computed from a trace
/// series instead of a Nystrom determinant.
pub const TRACE_SERIES_SIGMA: f64 = 20.0;

/// `F_sigma(t)` with default grids.
#[allow(non_snake_case)]
pub fn F_sigma(t: f64, sigma: f64) -> Result<DistEval> {
    if !(sigma >= 0.0) || !sigma.is_finite() || !t.is_finite() {
        return invalid(format!("F_sigma needs finite t and sigma >= 0, got ({t}, {sigma})"));
    }
    if sigma > TRACE_SERIES_SIGMA {
        return trace_series_eval(t, sigma);
    }
    F_sigma_with(t, sigma, default_nodes(t, sigma), default_length(t, sigma))
}

/// [`F_sigma`] (or [`F_sigma_with`] when `grid` is given) at many points in
/// parallel; results keep the input order.
#[allow(non_snake_case)]
pub fn F_sigma_many(points: &[(f64, f64)], grid: Option<(usize, f64)>) -> Result<Vec<DistEval>> {
    points
        .par_iter()
        .map(|&(t, s)| match grid {
            Some((m, l)) if s <= TRACE_SERIES_SIGMA => F_sigma_with(t, s, m, l),
            _ => F_sigma(t, s),
        })
        .collect()
}

/// `F_sigma(t)` by a Nystrom determinant with `m` nodes on `(0, L)`; the error
/// estimate compares with `m/2` nodes on `(0, L - 5)`.
#[allow(non_snake_case)]
pub fn F_sigma_with(t: f64, sigma: f64, m: usize, l: f64) -> Result<DistEval> {
    if !(sigma >= 0.0) || !sigma.is_finite() || !t.is_finite() {
        return invalid(format!("F_sigma needs finite t and sigma >= 0, got ({t}, {sigma})"));
    }
    let spec = KernelSpec::for_distribution(t, sigma)?;
    let fine = nystrom_det_parts(&spec, m, l)?;
    let coarse_l = if l > 10.0 { l - 5.0 } else { 0.5 * l };
    let coarse = nystrom_det_parts(&spec, (m / 2).max(8), coarse_l)?;
    let value = fine.det();
    let err_est = (value - coarse.det()).abs();
    let complement_bounds = Some((fine.trace - fine.trace * fine.trace, fine.trace));
    Ok(DistEval {
        method: Method::Fredholm,
        t,
        sigma,
        value,
        ln_value: fine.ln_det,
        complement: fine.complement,
        err_est,
        complement_bounds,
        meta: vec![("m", m as f64), ("L", l), ("m_coarse", (m / 2).max(8) as f64), ("L_coarse", coarse_l)],
        route: if sigma == 0.0 { "nystrom_airy" } else { "nystrom_ft_airy" },
    })
}

/// `tr N^n` (`n` = 1 or 2) as `tr M^n` of the Nystrom matrix.
pub fn trace_power_1d(spec: &KernelSpec, n: u32, m: usize, l: f64) -> Result<f64> {
    if n != 1 && n != 2 {
        return invalid(format!("trace powers are implemented for n = 1, 2; got {n}"));
    }
    let mat = nystrom_matrix(spec, m, l)?.entries;
    Ok(match n {
        1 => mat.trace(),
        _ => mat.iter().map(|v| v * v).sum(),
    })
}

/// Tensor grid for the two-dimensional trace: `m_x` Legendre nodes on
/// `(0, L)` times `m_h` Hermite nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceGrid {
    pub m_x: usize,
    pub l: f64,
    pub m_h: usize,
}

impl TraceGrid {
    pub fn default_for(t: f64, sigma: f64) -> Self {
        TraceGrid {
            m_x: 64,
            l: 26.0 + 4.0 * sigma - t.min(0.0),
            m_h: 40,
        }
    }

    fn coarse(&self) -> Self {
        TraceGrid {
            m_x: self.m_x * 3 / 4,
            l: self.l - 2.0,
            m_h: self.m_h * 3 / 4,
        }
    }
}

/// Result of [`trace_power_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace2d {
    pub value: f64,
    /// Same quantity on a coarser tensor grid.
    pub coarse: f64,
    pub grid: TraceGrid,
}

fn trace_2d_on(t: f64, sigma: f64, n: u32, grid: TraceGrid) -> Result<f64> {
    let gx = composite_legendre(0.0, grid.l, 2, grid.m_x.div_ceil(2))?;
    let gh = gauss_hermite(grid.m_h)?;
    let mut pts = Vec::with_capacity(gx.len() * gh.len());
    for (&x, &wx) in gx.nodes.iter().zip(&gx.weights) {
        for (&y, &wy) in gh.nodes.iter().zip(&gh.weights) {
            let z = x + sigma * y + t;
            let (ai, aip) = airy(z);
            pts.push((z, ai, aip, (wx * wy / SQRT_PI).sqrt()));
        }
    }
    let value = match n {
        1 => pts.iter().map(|&(z, ai, aip, s)| s * s * (aip * aip - z * ai * ai)).sum(),
        2 => pts
            .par_iter()
            .enumerate()
            .map(|(i, &(zi, ai, aipi, si))| {
                let mut acc = 0.0;
                for &(zj, aj, aipj, sj) in &pts[..i] {
                    let k = si * airy_kernel_from_values(zi, ai, aipi, zj, aj, aipj) * sj;
                    acc += 2.0 * k * k;
                }
                let d = si * si * (aipi * aipi - zi * ai * ai);
                acc + d * d
            })
            .sum(),
        _ => return invalid(format!("trace powers are implemented for n = 1, 2; got {n}")),
    };
    Ok(value)
}

/// Tolerance of the self-reported refinement check in [`trace_power_2d`].
pub const TRACE_2D_REFINE_TOL: f64 = 1e-6;

/// `tr K_{t,sigma}^n` on `(0, inf) x R` with the tensor grid `grid`,
/// refusing the result if a 3/4-size grid disagrees by more than
/// [`TRACE_2D_REFINE_TOL`].
pub fn trace_power_2d(t: f64, sigma: f64, n: u32, grid: TraceGrid) -> Result<Trace2d> {
    if !(sigma >= 0.0) {
        return invalid(format!("sigma must be non-negative, got {sigma}"));
    }
    if grid.m_x < 8 || grid.m_h < 4 || !(grid.l > 2.0) {
        return invalid(format!("tensor grid too small: {grid:?}"));
    }
    let value = trace_2d_on(t, sigma, n, grid)?;
    let coarse = trace_2d_on(t, sigma, n, grid.coarse())?;
    if (value - coarse).abs() > TRACE_2D_REFINE_TOL {
        return Err(EdgeError::NumericFailure(format!(
            "two-dimensional trace not resolved: {value} vs {coarse} on the coarser grid"
        )));
    }
    Ok(Trace2d { value, coarse, grid })
}

/// `((I - N)^{-1} f)(0)` on `L^2(0, inf)` for the finite-temperature kernel
/// at `(t, sigma)`, via the Nystrom interpolant.
pub fn resolvent_at_origin<F>(t: f64, sigma: f64, f: F, m: usize, l: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let spec = KernelSpec::for_distribution(t, sigma)?;
    let nm = nystrom_matrix(&spec, m, l)?;
    let grid = &nm.grid;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    // Symmetrized unknowns s_i = sqrt(w_i) u(x_i).
    let rhs = DVector::from_fn(m, |i, _| sw[i] * f(grid.nodes[i]));
    let a = DMatrix::identity(m, m) - &nm.entries;
    let s = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| EdgeError::NumericFailure("I - N is singular on the grid".into()))?;
    let k0 = |x: f64| -> Result<f64> {
        if sigma == 0.0 {
            Ok(crate::kernels::airy_kernel(t, x + t))
        } else {
            crate::kernels::ft_airy_kernel(0.0, x, t, sigma)
        }
    };
    let mut acc = f(0.0);
    for i in 0..m {
        acc += k0(grid.nodes[i])? * sw[i] * s[i];
    }
    Ok(acc)
}

/// Below `-z` the Airy diagonal is replaced by its smooth part `sqrt(|z|)/pi`.
/// The cut is placed where `cos((4/3)|z|^{3/2})` has a zero, so the neglected
/// oscillation leaves no boundary term at leading order.
fn airy_diag_switch() -> f64 {
    let k = ((4.0 / 3.0) * 200f64.powf(1.5) / PI).round() + 0.5;
    (0.75 * k * PI).powf(2.0 / 3.0)
}

/// `tr N_{t,sigma} = int Phi((z - t)/sigma) K_Ai(z, z) dz`.
pub fn trace_n1_direct(t: f64, sigma: f64, refine: usize) -> Result<f64> {
    if !(sigma > 0.0) {
        return invalid("trace_n1_direct needs sigma > 0");
    }
    let z_sw = airy_diag_switch();
    let z_top = 16.0;
    let z_lo = t.min(0.0) - 10.0 * sigma;
    let weight = |z: f64| phi((z - t) / sigma);
    let mut total = 0.0;
    // Oscillatory part on (-z_sw, z_top): panels shorter than half a wavelength at the deep end.
    let lo = (-z_sw).max(z_lo);
    if z_top > lo {
        let panels = ((z_top - lo) / 0.3).ceil() as usize * refine;
        let g = composite_legendre(lo, z_top, panels, 12)?;
        total += g.integrate(|z| {
            let (ai, aip) = airy(z);
            weight(z) * (aip * aip - z * ai * ai)
        });
    }
    if z_lo < -z_sw {
        let span = -z_sw - z_lo;
        let panels = ((span / sigma).ceil() as usize * 4).max(16) * refine;
        let g = composite_legendre(z_lo, -z_sw, panels, 16)?;
        total += g.integrate(|z| weight(z) * (-z).sqrt() / PI);
    }
    Ok(total)
}

/// `tr N_{t,sigma}^2 = int_0^inf du int_0^u dv N((u+v)/2, (u-v)/2)^2`, with
/// `N` from the contour integral on the saddle height.
pub fn trace_n2_contour(t: f64, sigma: f64, refine: usize) -> Result<f64> {
    if !(sigma > 0.0) {
        return invalid("trace_n2_contour needs sigma > 0");
    }
    let w0 = (t / sigma).max(0.0);
    // N^2 decays like exp(-2 ((u + 2t)/(2 sigma))^2) along the diagonal.
    let u_hi = (2.0 * sigma * ((w0 * w0 + 25.0).sqrt() - w0)).max(40.0);
    let gu = composite_legendre(0.0, u_hi, 8 * refine, 20)?;
    let gv = gauss_legendre(24 * refine)?;
    let rows: Result<Vec<f64>> = gu
        .nodes
        .par_iter()
        .zip(gu.weights.par_iter())
        .map(|(&u, &wu)| {
            let delta = saddle_delta(0.5 * u, 0.5 * u, t, sigma);
            // N is Gaussian in v = a - b with variance 2 delta / sigma.
            let v_hi = u.min((80.0 * delta / sigma).sqrt());
            let g = gv.on_interval(0.0, v_hi);
            let mut acc = 0.0;
            for (&v, &wv) in g.nodes.iter().zip(&g.weights) {
                let n = ft_airy_kernel_contour(0.5 * (u + v), 0.5 * (u - v), t, sigma, delta, 12.0 + 2.0 * delta)?;
                acc += wv * n * n;
            }
            Ok(wu * acc)
        })
        .collect();
    Ok(rows?.iter().sum())
}

/// `F_sigma(t)` from `ln F = -tr N - tr N^2 / 2 - ...` truncated after two
/// terms. With `nu_max <= sqrt(tr N^2)` the remainder is bounded by
/// `tr N^2 nu_max / (3 (1 - nu_max))`.
pub fn trace_series_eval(t: f64, sigma: f64) -> Result<DistEval> {
    let tr1 = trace_n1_direct(t, sigma, 2)?;
    let tr2 = trace_n2_contour(t, sigma, 2)?;
    let nu_max = tr2.sqrt();
    if nu_max >= 0.5 {
        return Err(EdgeError::NumericFailure(format!(
            "trace series at (t, sigma) = ({t}, {sigma}) does not converge fast enough (nu_max <= {nu_max})"
        )));
    }
    let tr1_c = trace_n1_direct(t, sigma, 1)?;
    let tr2_c = trace_n2_contour(t, sigma, 1)?;
    let ln_value = -tr1 - 0.5 * tr2;
    let remainder = tr2 * nu_max / (3.0 * (1.0 - nu_max));
    let quad_err = (tr1 - tr1_c).abs() + 0.5 * (tr2 - tr2_c).abs();
    let value = ln_value.exp();
    // The remainder only lowers ln F.
    let err_est = value * ((remainder + quad_err).exp() - 1.0).max(quad_err);
    Ok(DistEval {
        method: Method::Fredholm,
        t,
        sigma,
        value,
        ln_value,
        complement: -ln_value.exp_m1(),
        err_est,
        complement_bounds: None,
        meta: vec![("tr1", tr1), ("tr2", tr2), ("nu_max_bound", nu_max), ("remainder_bound", remainder)],
        route: "trace_series",
    })
}
