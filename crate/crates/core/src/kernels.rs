//! Discrete filter construction.
//!
//! Every filter the detector uses is sampled from a continuous formula,
//! truncated, and (for single densities) renormalized to unit sum:
//!
//! * temporal kernels are causal, sampled at `t = 0, step, 2 step, ...` and cut
//!   once the remaining continuous tail mass drops below `mass_cutoff`;
//! * spatial kernels are square grids of radius `ceil(truncation * sigma)`;
//! * differences of two unit-sum densities therefore sum to zero, which is
//!   what makes a static scene produce no band-pass output at all.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Spatial Gaussians are cut at this many standard deviations.
pub const DEFAULT_TRUNCATION_SIGMAS: f64 = 3.0;

/// Temporal kernels stop once the continuous tail beyond the last tap holds
/// less than this fraction of the total mass.
pub const DEFAULT_MASS_CUTOFF: f64 = 1e-3;

/// Sampled, truncated one-dimensional filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    taps: Vec<f64>,
    step: f64,
    causal: bool,
}

impl Kernel1D {
    /// Builds a causal kernel; `taps[k]` weights the sample `k` steps in the past.
    pub fn causal(taps: Vec<f64>, step: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::parameter("taps", "a kernel needs at least one tap"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::parameter("taps", "taps must be finite"));
        }
        if !(step > 0.0) {
            return Err(Error::parameter("step", format!("must be positive, got {step}")));
        }
        Ok(Self {
            taps,
            step,
            causal: true,
        })
    }

    /// The identity filter (a single unit tap).
    pub fn identity() -> Self {
        Self {
            taps: vec![1.0],
            step: 1.0,
            causal: true,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn is_causal(&self) -> bool {
        self.causal
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Index of the largest tap (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.taps.iter().enumerate() {
            if v > self.taps[best] {
                best = k;
            }
        }
        best
    }

    /// Tap-wise `self - other`, zero-padding the shorter kernel.
    pub fn difference(&self, other: &Kernel1D) -> Kernel1D {
        let len = self.len().max(other.len());
        let taps = (0..len)
            .map(|k| {
                self.taps.get(k).copied().unwrap_or(0.0) - other.taps.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Kernel1D {
            taps,
            step: self.step,
            causal: self.causal && other.causal,
        }
    }
}

/// Square spatial filter of side `2 * radius + 1`, stored row-major.
///
/// Tap `(dx, dy)` multiplies the input sample at offset `(dx, dy)` from the
/// output pixel. All kernels built here are point-symmetric, so correlation and
/// convolution coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(radius: usize, taps: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if taps.len() != side * side {
            return Err(Error::Dimension(format!(
                "radius {radius} needs {} taps, got {}",
                side * side,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::parameter("taps", "taps must be finite"));
        }
        Ok(Self { radius, taps })
    }

    /// Single unit tap.
    pub fn identity() -> Self {
        Self {
            radius: 0,
            taps: vec![1.0],
        }
    }

    fn from_fn(radius: usize, mut f: impl FnMut(isize, isize) -> f64) -> Self {
        let r = radius as isize;
        let mut taps = Vec::with_capacity((2 * radius + 1).pow(2));
        for dy in -r..=r {
            for dx in -r..=r {
                taps.push(f(dx, dy));
            }
        }
        Self { radius, taps }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at offset `(dx, dy)`; zero outside the support.
    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        let side = self.side() as isize;
        self.taps[((dy + r) * side + dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Sum of the positive taps.
    pub fn positive_mass(&self) -> f64 {
        self.taps.iter().filter(|&&t| t > 0.0).sum()
    }

    /// Absolute sum of the negative taps.
    pub fn negative_mass(&self) -> f64 {
        -self.taps.iter().filter(|&&t| t < 0.0).sum::<f64>()
    }

    /// The same filter on a larger zero-padded grid.
    pub fn padded(&self, radius: usize) -> Kernel2D {
        assert!(radius >= self.radius, "cannot pad to a smaller radius");
        Self::from_fn(radius, |dx, dy| self.get(dx, dy))
    }

    /// Rotation of the tap grid by 90 degrees.
    pub fn rotated90(&self) -> Kernel2D {
        Self::from_fn(self.radius, |dx, dy| self.get(dy, -dx))
    }

    pub fn mirrored_horizontally(&self) -> Kernel2D {
        Self::from_fn(self.radius, |dx, dy| self.get(-dx, dy))
    }

    pub fn mirrored_vertically(&self) -> Kernel2D {
        Self::from_fn(self.radius, |dx, dy| self.get(dx, -dy))
    }

    /// Tap-wise `self + scale * other` on the union support.
    pub fn add_scaled(&self, other: &Kernel2D, scale: f64) -> Kernel2D {
        let radius = self.radius.max(other.radius);
        Self::from_fn(radius, |dx, dy| self.get(dx, dy) + scale * other.get(dx, dy))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Kernel2D {
        Kernel2D {
            radius: self.radius,
            taps: self.taps.iter().map(|&t| f(t)).collect(),
        }
    }

    /// Non-zero taps as `(dx, dy, weight)`.
    pub fn nonzero_taps(&self) -> Vec<(isize, isize, f64)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let w = self.get(dx, dy);
                if w != 0.0 {
                    out.push((dx, dy, w));
                }
            }
        }
        out
    }
}

/// Weights over the preferred-direction bins, indexed by bin difference.
///
/// `taps()[k]` weights a neighbor `k` bins away (modulo the bin count), so
/// `taps()[0]` is the self weight and `taps()[n - 1]` the neighbor one bin in
/// the other direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionKernel {
    taps: Vec<f64>,
}

impl DirectionKernel {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn bins(&self) -> usize {
        self.taps.len()
    }

    /// Weight for a signed bin offset, wrapping around the circle.
    pub fn at_offset(&self, offset: isize) -> f64 {
        let n = self.taps.len() as isize;
        self.taps[offset.rem_euclid(n) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::parameter(name, format!("must be positive and finite, got {value}")))
    }
}

fn check_cutoff(mass_cutoff: f64) -> Result<()> {
    if mass_cutoff > 0.0 && mass_cutoff < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            "mass_cutoff",
            format!("must lie in (0, 1), got {mass_cutoff}"),
        ))
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Continuous Gamma kernel `(n t)^n exp(-n t / tau) / ((n - 1)! tau^(n + 1))`.
///
/// It integrates to one and peaks at `t = tau`.
pub fn gamma_density(order: u32, tau: f64, t: f64) -> f64 {
    if t <= 0.0 || order == 0 {
        return 0.0;
    }
    let n = order as f64;
    let ln = n * (n * t).ln() - n * t / tau - ln_factorial(order - 1) - (n + 1.0) * tau.ln();
    ln.exp()
}

/// Mass of the continuous Gamma kernel beyond `t`.
///
/// The kernel is a Gamma distribution of integer shape `n + 1` and rate
/// `n / tau`, so the tail is `exp(-u) * sum_{k <= n} u^k / k!` with
/// `u = n t / tau`.
pub fn gamma_tail_mass(order: u32, tau: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let u = order as f64 * t / tau;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=order {
        term *= u / k as f64;
        sum += term;
    }
    (sum.ln() - u).exp().min(1.0)
}

/// Sampled Gamma kernel of order `order` and time constant `tau` (frames).
///
/// Taps are taken at `t = k * step` until the continuous tail mass beyond the
/// current sample falls below `mass_cutoff`, with at most `ceil(10 tau / step)`
/// taps, then renormalized to unit sum.
pub fn gamma_kernel(order: u32, tau: f64, step: f64, mass_cutoff: f64) -> Result<Kernel1D> {
    if order == 0 {
        return Err(Error::parameter("n", "the Gamma order must be at least 1"));
    }
    check_positive("tau", tau)?;
    check_positive("step", step)?;
    check_cutoff(mass_cutoff)?;

    let cap = ((10.0 * tau / step).ceil() as usize).max(1);
    let mut taps = Vec::new();
    for k in 0..cap {
        let t = k as f64 * step;
        taps.push(gamma_density(order, tau, t));
        if gamma_tail_mass(order, tau, t) < mass_cutoff {
            break;
        }
    }
    normalize(&mut taps, "tau")?;
    Kernel1D::causal(taps, step)
}

/// Lamina band-pass `H = Gamma(n1, tau1) - Gamma(n2, tau2)`.
pub fn temporal_bandpass(
    n1: u32,
    tau1: f64,
    n2: u32,
    tau2: f64,
    step: f64,
    mass_cutoff: f64,
) -> Result<Kernel1D> {
    let fast = gamma_kernel(n1, tau1, step, mass_cutoff)?;
    let slow = gamma_kernel(n2, tau2, step, mass_cutoff)?;
    Ok(fast.difference(&slow))
}

/// Sampled exponential decay `exp(-t / lambda) / lambda`, renormalized.
pub fn exp_kernel(lambda: f64, step: f64, mass_cutoff: f64) -> Result<Kernel1D> {
    check_positive("lambda", lambda)?;
    check_positive("step", step)?;
    check_cutoff(mass_cutoff)?;

    let mut taps = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 * step;
        taps.push((-t / lambda).exp() / lambda);
        if (-t / lambda).exp() < mass_cutoff {
            break;
        }
        k += 1;
    }
    normalize(&mut taps, "lambda")?;
    Kernel1D::causal(taps, step)
}

fn normalize(taps: &mut [f64], name: &'static str) -> Result<()> {
    let sum: f64 = taps.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::parameter(name, "sampled kernel has no mass"));
    }
    for t in taps.iter_mut() {
        *t /= sum;
    }
    Ok(())
}

fn truncation_radius(sigma: f64, truncation_sigmas: f64) -> Result<usize> {
    check_positive("sigma", sigma)?;
    check_positive("truncation_sigmas", truncation_sigmas)?;
    Ok((truncation_sigmas * sigma).ceil() as usize)
}

/// Unit-sum one-dimensional Gaussian over offsets `-radius..=radius`.
///
/// Its outer product with itself equals [`gaussian2d`] up to rounding.
pub fn gaussian1d(sigma: f64, truncation_sigmas: f64) -> Result<Vec<f64>> {
    let radius = truncation_radius(sigma, truncation_sigmas)? as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    normalize(&mut taps, "sigma")?;
    Ok(taps)
}

/// Isotropic Gaussian `exp(-(x^2 + y^2) / (2 sigma^2)) / (2 pi sigma^2)` sampled
/// at integer offsets within `ceil(truncation_sigmas * sigma)` and renormalized.
pub fn gaussian2d(sigma: f64, truncation_sigmas: f64) -> Result<Kernel2D> {
    let radius = truncation_radius(sigma, truncation_sigmas)?;
    let mut k = Kernel2D::from_fn(radius, |dx, dy| {
        let r2 = (dx * dx + dy * dy) as f64;
        (-r2 / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
    });
    normalize(&mut k.taps, "sigma")?;
    Ok(k)
}

/// Splits `G(sigma2) - G(sigma3)` into its positive and negative parts.
///
/// Both parts live on the support of the wider Gaussian. The negative part
/// keeps its sign (taps are `<= 0`), so the two parts add back to the DoG.
pub fn dog_split(sigma2: f64, sigma3: f64) -> Result<(Kernel2D, Kernel2D)> {
    let dog = difference_of_gaussians(sigma2, sigma3)?;
    Ok((dog.map(|t| t.max(0.0)), dog.map(|t| t.min(0.0))))
}

/// `G(narrow) - G(wide)` on the support of the wide Gaussian.
pub fn difference_of_gaussians(narrow: f64, wide: f64) -> Result<Kernel2D> {
    check_positive("sigma (narrow)", narrow)?;
    check_positive("sigma (wide)", wide)?;
    if wide <= narrow {
        return Err(Error::parameter(
            "sigma",
            format!("surround sigma {wide} must exceed center sigma {narrow}"),
        ));
    }
    let center = gaussian2d(narrow, DEFAULT_TRUNCATION_SIGMAS)?;
    let surround = gaussian2d(wide, DEFAULT_TRUNCATION_SIGMAS)?;
    Ok(center.padded(surround.radius()).add_scaled(&surround, -1.0))
}

/// Parameters of the centre-surround kernel used for size selectivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurroundParams {
    /// Centre Gaussian width (px).
    pub sigma_center: f64,
    /// Surround Gaussian width (px).
    pub sigma_surround: f64,
    /// Surround gain inside `g`.
    pub e: f64,
    /// Constant offset subtracted inside `g`.
    pub rho: f64,
    /// Weight of the positive (excitatory) part.
    pub a: f64,
    /// Weight of the negative (inhibitory) part.
    pub b: f64,
}

impl Default for SurroundParams {
    fn default() -> Self {
        Self {
            sigma_center: 1.5,
            sigma_surround: 3.0,
            e: 1.0,
            rho: 0.0,
            a: 1.0,
            b: 3.0,
        }
    }
}

impl SurroundParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("sigma4", self.sigma_center)?;
        check_positive("sigma5", self.sigma_surround)?;
        if self.sigma_surround <= self.sigma_center {
            return Err(Error::parameter(
                "sigma5",
                format!(
                    "surround sigma {} must exceed centre sigma {}",
                    self.sigma_surround, self.sigma_center
                ),
            ));
        }
        for (name, v) in [("e", self.e), ("rho", self.rho), ("A", self.a), ("B", self.b)] {
            if !v.is_finite() {
                return Err(Error::parameter(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// The un-weighted profile `g = G(sigma4) - e G(sigma5) - rho`.
    pub fn profile(&self) -> Result<Kernel2D> {
        self.validate()?;
        let center = gaussian2d(self.sigma_center, DEFAULT_TRUNCATION_SIGMAS)?;
        let surround = gaussian2d(self.sigma_surround, DEFAULT_TRUNCATION_SIGMAS)?;
        let radius = center.radius().max(surround.radius());
        let rho = self.rho;
        Ok(center
            .padded(radius)
            .add_scaled(&surround, -self.e)
            .map(|t| t - rho))
    }
}

/// Second-order lateral inhibition kernel `A [g]^+ + B [g]^-`.
pub fn w2_kernel(params: &SurroundParams) -> Result<Kernel2D> {
    let g = params.profile()?;
    let (a, b) = (params.a, params.b);
    Ok(g.map(|t| a * t.max(0.0) + b * t.min(0.0)))
}

/// Circular difference of Gaussians over `bins` direction bins.
///
/// Offsets are measured in bins (one bin is `2 pi / bins` radians). Each
/// Gaussian is normalized over the circle before differencing, so the kernel
/// sums to zero.
pub fn w3_kernel(sigma6: f64, sigma7: f64, bins: usize) -> Result<DirectionKernel> {
    check_positive("sigma6", sigma6)?;
    check_positive("sigma7", sigma7)?;
    if sigma7 < sigma6 {
        return Err(Error::parameter(
            "sigma7",
            format!("must not be smaller than sigma6 ({sigma7} < {sigma6})"),
        ));
    }
    if bins == 0 {
        return Err(Error::parameter("directions", "need at least one direction bin"));
    }
    let circular = |sigma: f64| -> Result<Vec<f64>> {
        let mut taps: Vec<f64> = (0..bins)
            .map(|k| {
                let d = k.min(bins - k) as f64;
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        normalize(&mut taps, "sigma")?;
        Ok(taps)
    };
    let narrow = circular(sigma6)?;
    let wide = circular(sigma7)?;
    Ok(DirectionKernel {
        taps: narrow.iter().zip(&wide).map(|(a, b)| a - b).collect(),
    })
}
