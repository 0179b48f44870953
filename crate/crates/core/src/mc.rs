//! Monte Carlo sampling of GUE and elliptic Ginibre matrices and the
//! empirical edge statistics built on them.

use std::f64::consts::{PI, SQRT_2};

use faer::{c64, Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

use crate::error::{invalid, EdgeError, Result};
use crate::fredholm::F_sigma;
use crate::specfun::composite_legendre;
use crate::tails::{ginue_gamma, gumbel_cdf};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EDGELAW_THREADS";

/// Edge coordinate applied to the rightmost real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// `t = (x - sqrt(2n)) sqrt(2) n^{1/6}`.
    GueEdge,
    /// `t = (x - sqrt(n) - sqrt(gamma_n / 4)) sqrt(4 gamma_n)`.
    GinueEdge,
    /// Gumbel coordinate with centering and scale matched to the exact
    /// finite-`n` GinUE density (see [`ginue_matched_constants`]).
    GinueMatched,
    Raw,
}

impl Scaling {
    pub fn name(&self) -> &'static str {
        match self {
            Scaling::GueEdge => "gue_edge",
            Scaling::GinueEdge => "ginue_edge",
            Scaling::GinueMatched => "ginue_matched",
            Scaling::Raw => "raw",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gue" | "gue_edge" => Ok(Scaling::GueEdge),
            "ginue" | "ginue_edge" => Ok(Scaling::GinueEdge),
            "ginue_matched" => Ok(Scaling::GinueMatched),
            "raw" => Ok(Scaling::Raw),
            _ => invalid(format!("unknown scaling '{s}'")),
        }
    }
}

/// Reference law for the Kolmogorov–Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    None,
    TracyWidom,
    Gumbel,
    /// `F_sigma` with `sigma = n^{1/6} sqrt(1 - tau)`.
    WeakSigma,
}

impl Reference {
    pub fn name(&self) -> &'static str {
        match self {
            Reference::None => "none",
            Reference::TracyWidom => "tracy_widom",
            Reference::Gumbel => "gumbel",
            Reference::WeakSigma => "f_sigma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Reference::None),
            "tw" | "tracy_widom" => Ok(Reference::TracyWidom),
            "gumbel" => Ok(Reference::Gumbel),
            "f_sigma" | "weak" => Ok(Reference::WeakSigma),
            _ => invalid(format!("unknown reference law '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n: usize,
    pub tau: f64,
    pub trials: usize,
    pub seed: u64,
    pub scaling: Scaling,
    pub reference: Reference,
    /// Also measure elliptic-law containment on every sampled matrix.
    pub containment: bool,
}

impl McConfig {
    pub fn new(n: usize, tau: f64, trials: usize, seed: u64) -> Self {
        Self {
            n,
            tau,
            trials,
            seed,
            scaling: Scaling::GueEdge,
            reference: Reference::None,
            containment: false,
        }
    }

    pub fn sigma(&self) -> f64 {
        (self.n as f64).powf(1.0 / 6.0) * (1.0 - self.tau).max(0.0).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return invalid("n must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return invalid(format!("tau must lie in [0, 1], got {}", self.tau));
        }
        if self.trials < 1 {
            return invalid("trials must be >= 1");
        }
        if matches!(self.scaling, Scaling::GinueEdge | Scaling::GinueMatched) && self.tau != 0.0 {
            return invalid("Ginibre scalings need tau = 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub mean: f64,
    pub ks: Option<f64>,
    pub reference: &'static str,
    pub containment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub config: McConfig,
    /// Scaled rightmost real parts in trial order.
    pub samples: Vec<f64>,
    pub summary: McSummary,
}

/// Independent stream for one trial: the seed fixes the key, the trial index
/// selects the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// GUE with diagonal density `pi^{-1/2} e^{-x^2}` and off-diagonal density
/// `(2/pi) e^{-2|x|^2}`.
pub fn sample_gue<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let mut h = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = c64::new(normal(rng) / SQRT_2, 0.0);
        for i in j + 1..n {
            let z = c64::new(0.5 * normal(rng), 0.5 * normal(rng));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `sqrt((1+tau)/2) H1 + i sqrt((1-tau)/2) H2` with independent GUE draws.
pub fn sample_eginue<R: rand::Rng + ?Sized>(n: usize, tau: f64, rng: &mut R) -> Result<Mat<c64>> {
    if !(0.0..=1.0).contains(&tau) {
        return invalid(format!("tau must lie in [0, 1], got {tau}"));
    }
    let h1 = sample_gue(n, rng);
    if tau == 1.0 {
        return Ok(h1);
    }
    let h2 = sample_gue(n, rng);
    let a = ((1.0 + tau) / 2.0).sqrt();
    let b = ((1.0 - tau) / 2.0).sqrt();
    Ok(Mat::from_fn(n, n, |i, j| h1[(i, j)] * a + c64::new(0.0, b) * h2[(i, j)]))
}

/// GinUE with entry density `(1/pi) e^{-|x|^2}`.
pub fn sample_ginue<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let s = 1.0 / SQRT_2;
    Mat::from_fn(n, n, |_, _| c64::new(s * normal(rng), s * normal(rng)))
}

pub fn eigenvalues(x: &Mat<c64>) -> Result<Vec<c64>> {
    if x.nrows() != x.ncols() {
        return invalid("eigenvalues need a square matrix");
    }
    x.eigenvalues()
        .map_err(|e| EdgeError::NumericFailure(format!("eigensolver: {e:?}")))
}

/// Largest real part over the spectrum.
pub fn rightmost(x: &Mat<c64>) -> Result<f64> {
    let ev = eigenvalues(x)?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue of a matrix assumed Hermitian (lower triangle read).
pub fn rightmost_hermitian(x: &Mat<c64>) -> Result<f64> {
    if x.nrows() != x.ncols() {
        return invalid("eigenvalues need a square matrix");
    }
    let ev = x
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| EdgeError::NumericFailure(format!("eigensolver: {e:?}")))?;
    Ok(ev.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Expected number of GinUE eigenvalues with real part above `x`, from the
/// exact density `Q(n, |z|^2) / pi`.
pub fn ginue_expected_count(n: usize, x: f64) -> Result<f64> {
    let nf = n as f64;
    let r = composite_legendre(x, x.max(nf.sqrt()) + 10.0, 10, 20)?;
    let mut total = 0.0;
    for (&u, &wu) in r.nodes.iter().zip(&r.weights) {
        total += wu * ginue_column(n, u)?;
    }
    Ok(total)
}

/// `int rho(u, y) dy` over the vertical line `Re z = u`.
fn ginue_column(n: usize, u: f64) -> Result<f64> {
    let nf = n as f64;
    let y_max = (nf + 12.0 * (2.0 * nf).sqrt() - u * u).max(0.0).sqrt() + 4.0;
    let g = composite_legendre(0.0, y_max, 8, 20)?;
    Ok(2.0 / PI * g.integrate(|y| gamma_ur(nf, u * u + y * y)))
}

/// `(c_n, a_n)` with `E N(c_n) = 1` and `a_n = 1 / rho_1(c_n)`, so that the
/// Poisson approximation reads `P(max Re <= c_n + a_n t) ~ e^{-e^{-t}}`.
pub fn ginue_matched_constants(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return invalid("matched GinUE constants need n >= 2");
    }
    let s = (n as f64).sqrt();
    let (mut lo, mut hi) = (s - 3.0, s + 8.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ginue_expected_count(n, mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Ok((c, 1.0 / ginue_column(n, c)?))
}

/// Edge coordinate of an unnormalised rightmost real part.
pub fn edge_scale(x_max: f64, n: usize, scaling: Scaling) -> Result<f64> {
    let nf = n as f64;
    match scaling {
        Scaling::GueEdge => Ok((x_max - (2.0 * nf).sqrt()) * SQRT_2 * nf.powf(1.0 / 6.0)),
        Scaling::GinueEdge => {
            let g = positive_gamma(n)?;
            Ok((x_max - nf.sqrt() - (g / 4.0).sqrt()) * (4.0 * g).sqrt())
        }
        Scaling::GinueMatched => {
            let (c, a) = ginue_matched_constants(n)?;
            Ok((x_max - c) / a)
        }
        Scaling::Raw => Ok(x_max),
    }
}

/// Inverse of [`edge_scale`].
pub fn edge_unscale(t: f64, n: usize, scaling: Scaling) -> Result<f64> {
    let nf = n as f64;
    match scaling {
        Scaling::GueEdge => Ok((2.0 * nf).sqrt() + t / (SQRT_2 * nf.powf(1.0 / 6.0))),
        Scaling::GinueEdge => {
            let g = positive_gamma(n)?;
            Ok(nf.sqrt() + (g / 4.0).sqrt() + t / (4.0 * g).sqrt())
        }
        Scaling::GinueMatched => {
            let (c, a) = ginue_matched_constants(n)?;
            Ok(c + a * t)
        }
        Scaling::Raw => Ok(t),
    }
}

fn positive_gamma(n: usize) -> Result<f64> {
    let g = ginue_gamma(n)?;
    if g <= 0.0 {
        return invalid(format!("gamma_n = {g} is not positive at n = {n}"));
    }
    Ok(g)
}

/// Tabulated CDF with cubic interpolation of `ln F` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    pub t0: f64,
    pub h: f64,
    pub ln_f: Vec<f64>,
}

impl CdfTable {
    pub fn from_fn<F>(t0: f64, t1: f64, points: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        if points < 4 || !(t1 > t0) {
            return invalid("CDF table needs t1 > t0 and at least 4 points");
        }
        let h = (t1 - t0) / (points - 1) as f64;
        let ln_f = (0..points)
            .into_par_iter()
            .map(|i| f(t0 + h * i as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { t0, h, ln_f })
    }

    /// Table of `ln F_sigma` over a range wide enough for the law at `sigma`.
    pub fn f_sigma(sigma: f64) -> Result<Self> {
        let lo = -8.0 - sigma;
        let hi = 6.0 + 6.0 * sigma;
        let points = 281 + (40.0 * sigma) as usize;
        Self::from_fn(lo, hi, points, |t| Ok(F_sigma(t, sigma)?.ln_value))
    }

    pub fn t_max(&self) -> f64 {
        self.t0 + self.h * (self.ln_f.len() - 1) as f64
    }

    pub fn ln_cdf(&self, t: f64) -> f64 {
        let n = self.ln_f.len();
        let s = (t - self.t0) / self.h;
        if s <= 0.0 {
            // Extrapolate with the end slope; the table starts deep in the tail.
            let slope = self.ln_f[1] - self.ln_f[0];
            return self.ln_f[0] + slope * s;
        }
        if s >= (n - 1) as f64 {
            return self.ln_f[n - 1].min(0.0);
        }
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let p = |k: isize| -> f64 {
            let k = k.clamp(0, n as isize - 1) as usize;
            self.ln_f[k]
        };
        let i = i as isize;
        let (p0, p1, p2, p3) = (p(i - 1), p(i), p(i + 1), p(i + 2));
        // Catmull-Rom, falling back to one-sided slopes at the ends.
        let m1 = if i == 0 { p2 - p1 } else { 0.5 * (p2 - p0) };
        let m2 = if i as usize + 2 >= n { p2 - p1 } else { 0.5 * (p3 - p1) };
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * p1
            + (u3 - 2.0 * u2 + u) * m1
            + (-2.0 * u3 + 3.0 * u2) * p2
            + (u3 - u2) * m2;
        v.min(0.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.ln_cdf(t).exp()
    }

    /// `int t dF` over the table range, as `t_max - int F dt` with Simpson's rule
    /// on the table nodes plus the midpoints.
    pub fn mean(&self) -> f64 {
        let n = self.ln_f.len();
        let mut s = 0.0;
        for i in 0..n - 1 {
            let a = self.t0 + self.h * i as f64;
            let fa = self.ln_f[i].exp();
            let fb = self.ln_f[i + 1].exp();
            let fm = self.cdf(a + 0.5 * self.h);
            s += self.h / 6.0 * (fa + 4.0 * fm + fb);
        }
        self.t_max() - s - self.t0 * self.ln_f[0].exp()
    }
}

/// Kolmogorov–Smirnov distance between the sample and a reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Runs `f` on a pool capped by `EDGELAW_THREADS` when that is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(k) if k >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| EdgeError::NumericFailure(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn trial_matrix(cfg: &McConfig, rng: &mut ChaCha8Rng) -> Result<Mat<c64>> {
    match cfg.scaling {
        Scaling::GinueEdge | Scaling::GinueMatched => Ok(sample_ginue(cfg.n, rng)),
        _ => sample_eginue(cfg.n, cfg.tau, rng),
    }
}

/// Fraction of eigenvalues of `sqrt(2/n) X` inside the ellipse with semiaxes
/// `1 + tau`, `1 - tau` dilated by 1.05.
fn containment_count(ev: &[c64], n: usize, tau: f64) -> usize {
    let s = (2.0 / n as f64).sqrt();
    ev.iter()
        .filter(|z| {
            let (x, y) = (z.re * s, z.im * s);
            if tau >= 1.0 {
                x.abs() <= (1.0 + tau) * 1.05
            } else {
                (x / (1.0 + tau)).powi(2) + (y / (1.0 - tau)).powi(2) < 1.05 * 1.05
            }
        })
        .count()
}

/// Samples `trials` matrices in parallel and summarises the scaled rightmost
/// real parts.
pub fn run_experiment(cfg: &McConfig) -> Result<McRun> {
    cfg.validate()?;
    let hermitian = cfg.tau == 1.0 && cfg.scaling != Scaling::GinueEdge && cfg.scaling != Scaling::GinueMatched;
    let raw = with_thread_cap(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|k| -> Result<(f64, usize)> {
                let mut rng = trial_rng(cfg.seed, k as u64);
                let x = trial_matrix(cfg, &mut rng)?;
                if hermitian && !cfg.containment {
                    return Ok((rightmost_hermitian(&x)?, 0));
                }
                let ev = eigenvalues(&x)?;
                let r = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                let inside = if cfg.containment { containment_count(&ev, cfg.n, cfg.tau) } else { 0 };
                Ok((r, inside))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let samples = match cfg.scaling {
        Scaling::GinueMatched => {
            let (c, a) = ginue_matched_constants(cfg.n)?;
            raw.iter().map(|&(x, _)| (x - c) / a).collect::<Vec<_>>()
        }
        s => raw.iter().map(|&(x, _)| edge_scale(x, cfg.n, s)).collect::<Result<Vec<_>>>()?,
    };
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let ks = match cfg.reference {
        Reference::None => None,
        Reference::Gumbel => Some(ks_distance(&samples, gumbel_cdf)),
        Reference::TracyWidom => {
            let table = CdfTable::f_sigma(0.0)?;
            Some(ks_distance(&samples, |t| table.cdf(t)))
        }
        Reference::WeakSigma => {
            let table = CdfTable::f_sigma(cfg.sigma())?;
            Some(ks_distance(&samples, |t| table.cdf(t)))
        }
    };
    let containment = cfg.containment.then(|| {
        raw.iter().map(|&(_, c)| c).sum::<usize>() as f64 / (cfg.n * cfg.trials) as f64
    });
    Ok(McRun {
        config: cfg.clone(),
        samples,
        summary: McSummary { mean, ks, reference: cfg.reference.name(), containment },
    })
}

/// Elliptic-law containment fraction over `trials` seeded matrices.
pub fn elliptic_law_check(n: usize, tau: f64, trials: usize, seed: u64) -> Result<f64> {
    if n < 32 {
        return invalid(format!("elliptic-law check needs n >= 32, got {n}"));
    }
    let mut cfg = McConfig::new(n, tau, trials, seed);
    cfg.scaling = Scaling::Raw;
    cfg.containment = true;
    let run = run_experiment(&cfg)?;
    Ok(run.summary.containment.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gue_entry_moments() {
        let mut rng = trial_rng(7, 0);
        let (mut d2, mut o2, mut nd, mut no) = (0.0, 0.0, 0usize, 0usize);
        while nd < 100_000 {
            let h = sample_gue(50, &mut rng);
            for j in 0..50 {
                d2 += h[(j, j)].re.powi(2);
                nd += 1;
                assert_eq!(h[(j, j)].im, 0.0);
                for i in j + 1..50 {
                    o2 += h[(i, j)].norm_sqr();
                    no += 1;
                    assert_eq!(h[(i, j)], h[(j, i)].conj());
                }
            }
        }
        let dv = d2 / nd as f64;
        let om = o2 / no as f64;
        assert!((0.49..=0.51).contains(&dv), "{dv}");
        assert!((0.49..=0.51).contains(&om), "{om}");
    }

    fn pair_moments(tau: f64, pairs: usize, seed: u64) -> (f64, f64, f64) {
        let mut rng = trial_rng(seed, 0);
        let n = 40;
        let (mut cross, mut abs2, mut conj_re, mut count) = (c64::new(0.0, 0.0), 0.0, 0.0, 0usize);
        let (mut s1, mut s2) = (0.0, 0.0);
        while count < pairs {
            let x = sample_eginue(n, tau, &mut rng).unwrap();
            for j in 0..n {
                for i in j + 1..n {
                    let a = x[(i, j)];
                    let b = x[(j, i)];
                    cross += a * b;
                    abs2 += 0.5 * (a.norm_sqr() + b.norm_sqr());
                    conj_re += (a * b).re;
                    s1 += a.norm_sqr();
                    s2 += b.norm_sqr();
                    count += 1;
                }
            }
        }
        let c = count as f64;
        let rho = conj_re / c / ((s1 / c) * (s2 / c)).sqrt();
        (cross.re / c, abs2 / c, rho)
    }

    #[test]
    fn eginue_pair_moments() {
        let (_, _, rho) = pair_moments(0.0, 100_000, 11);
        assert!(rho.abs() <= 0.02, "{rho}");
        for tau in [0.5, 1.0] {
            let (cross, abs2, _) = pair_moments(tau, 200_000, 12);
            let rel = (cross - tau * abs2).abs() / (tau * abs2);
            assert!(rel <= 0.05, "tau {tau}: {cross} vs {}", tau * abs2);
        }
        let mut rng = trial_rng(3, 0);
        let x = sample_eginue(12, 1.0, &mut rng).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(x[(i, j)], x[(j, i)].conj());
            }
        }
        assert!(sample_eginue(4, 1.5, &mut rng).is_err());
    }

    #[test]
    fn rightmost_examples() {
        let mut d = Mat::<c64>::zeros(3, 3);
        d[(0, 0)] = c64::new(1.0, 0.0);
        d[(1, 1)] = c64::new(2.0, 3.0);
        d[(2, 2)] = c64::new(-5.0, 0.0);
        assert!((rightmost(&d).unwrap() - 2.0).abs() < 1e-14);

        let mut rng = trial_rng(5, 1);
        let h = sample_gue(60, &mut rng);
        assert!((rightmost(&h).unwrap() - rightmost_hermitian(&h).unwrap()).abs() < 1e-10);

        let x = sample_eginue(40, 0.3, &mut rng).unwrap();
        let mut p = Mat::<c64>::identity(40, 40);
        let g = sample_ginue(40, &mut rng);
        for i in 0..40 {
            for j in 0..40 {
                p[(i, j)] += g[(i, j)] * 0.02;
            }
        }
        use faer::linalg::solvers::Solve;
        let xp = &x * &p;
        let y = p.partial_piv_lu().solve(&xp);
        assert!((rightmost(&y).unwrap() - rightmost(&x).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn edge_scaling_round_trip() {
        assert_eq!(edge_scale((400f64).sqrt(), 200, Scaling::GueEdge).unwrap(), 0.0);
        let x = 21.3;
        let t = edge_scale(x, 200, Scaling::GueEdge).unwrap();
        assert!((edge_unscale(t, 200, Scaling::GueEdge).unwrap() - x).abs() < 1e-12);
        let n = 10usize.pow(12);
        let g = ginue_gamma(n).unwrap();
        let c = (n as f64).sqrt() + (g / 4.0).sqrt();
        assert!(edge_scale(c, n, Scaling::GinueEdge).unwrap().abs() < 1e-9);
        assert!(edge_scale(17.0, 256, Scaling::GinueEdge).is_err());
    }

    #[test]
    fn matched_constants_reproduce_unit_count() {
        let (c, a) = ginue_matched_constants(256).unwrap();
        assert!((ginue_expected_count(256, c).unwrap() - 1.0).abs() < 1e-9);
        // Independent adaptive 2D quadrature of the same density.
        assert!((c - 15.583_788_064_094_53).abs() < 1e-9, "{c}");
        assert!((a - 0.487_864_567_515_773_5).abs() < 1e-9, "{a}");
        let t = edge_scale(c + 0.1, 256, Scaling::GinueMatched).unwrap();
        assert!((t - 0.1 / a).abs() < 1e-12);
    }

    #[test]
    fn ks_matches_direct_definition() {
        let xs = [0.1, 0.4, 0.8];
        let d = ks_distance(&xs, |x| x);
        assert!((d - (2.0 / 3.0 - 0.4)).abs() < 1e-15);
    }

    #[test]
    fn cdf_table_reproduces_gumbel() {
        let t = CdfTable::from_fn(-3.0, 8.0, 221, |x| Ok(-(-x).exp())).unwrap();
        for x in [-2.5, -0.37, 0.0, 1.234, 7.9] {
            assert!((t.cdf(x) - gumbel_cdf(x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn runs_are_reproducible_across_thread_counts() {
        let mut cfg = McConfig::new(24, 0.6, 16, 99);
        cfg.scaling = Scaling::Raw;
        cfg.containment = true;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_experiment(&cfg)).unwrap();
        let b = four.install(|| run_experiment(&cfg)).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.summary, b.summary);
        let c = run_experiment(&cfg).unwrap();
        assert_eq!(a.samples, c.samples);
        let f = a.summary.containment.unwrap();
        assert!(f <= 1.0 && f > 0.9);
    }

    #[test]
    fn invalid_configs() {
        assert!(run_experiment(&McConfig::new(8, 1.2, 2, 0)).is_err());
        assert!(run_experiment(&McConfig::new(8, 0.5, 0, 0)).is_err());
        assert!(elliptic_law_check(16, 0.0, 2, 0).is_err());
    }
}
