//! One-dimensional cumulative distribution transform.
//!
//! Densities are modeled as sums of degree-zero B-splines on a regular grid,
//! so their CDFs are piecewise linear and can be inverted exactly at any
//! level. The measure-preserving map between two densities is recovered by
//! inverting both CDFs at `L + 1` equally spaced levels and interpolating
//! the resulting quantile pairs back onto the grid.

use crate::error::{Error, Result};

/// Samples of a 1D signal on a regular grid `t_k = start + k * step`.
///
/// When used as a CDT density the samples must be strictly positive with
/// total mass `sum(c) * step = 1`; transform-space signals may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    pub start: f64,
    pub step: f64,
    pub samples: Vec<f64>,
}

impl Signal1D {
    pub fn new(start: f64, step: f64, samples: Vec<f64>) -> Result<Self> {
        if step <= 0.0 || !step.is_finite() || !start.is_finite() {
            return Err(Error::Domain("signal grid must be finite with positive step".into()));
        }
        if samples.len() < 2 {
            return Err(Error::Domain("signal needs at least 2 samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("signal contains non-finite samples".into()));
        }
        Ok(Self { start, step, samples })
    }

    /// Signal centered at zero with unit spacing, the sinogram convention.
    pub fn centered(samples: Vec<f64>) -> Result<Self> {
        let start = -((samples.len() as f64 - 1.0) / 2.0);
        Self::new(start, 1.0, samples)
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.step
    }

    /// Discrete L2 norm with the grid spacing as quadrature weight.
    pub fn norm_l2(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.step).sqrt()
    }
}

/// A monotone map sampled at the same regular grid as the signals it
/// transports between.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap1D {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl MonotoneMap1D {
    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }
}

/// Piecewise-linear CDF of a degree-zero B-spline density; knots sit at the
/// cell edges `t_k - step/2`.
struct Cdf {
    edge0: f64,
    step: f64,
    /// `cum[k]` = mass strictly left of edge k; `cum[K]` = 1 after scaling.
    cum: Vec<f64>,
}

impl Cdf {
    fn build(signal: &Signal1D) -> Result<Cdf> {
        if signal.samples.iter().any(|&c| c <= 0.0) {
            return Err(Error::Domain("CDT density must be strictly positive".into()));
        }
        let mut cum = Vec::with_capacity(signal.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for &c in &signal.samples {
            acc += c * signal.step;
            cum.push(acc);
        }
        let total = acc;
        for v in &mut cum {
            *v /= total;
        }
        Ok(Cdf { edge0: signal.start - signal.step / 2.0, step: signal.step, cum })
    }

    fn value_at(&self, x: f64) -> f64 {
        let pos = (x - self.edge0) / self.step;
        if pos <= 0.0 {
            return 0.0;
        }
        let k = pos.floor() as usize;
        if k + 1 >= self.cum.len() {
            return 1.0;
        }
        let frac = pos - k as f64;
        self.cum[k] + frac * (self.cum[k + 1] - self.cum[k])
    }

    /// Inverts the CDF at `levels + 1` equally spaced levels `l / levels`.
    /// Strictly increasing cumulative masses make every level unique.
    fn quantiles(&self, levels: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(levels + 1);
        let mut seg = 0usize;
        for l in 0..=levels {
            let rho = l as f64 / levels as f64;
            while seg + 2 < self.cum.len() && self.cum[seg + 1] < rho {
                seg += 1;
            }
            let lo = self.cum[seg];
            let hi = self.cum[seg + 1];
            let frac = if hi > lo { (rho - lo) / (hi - lo) } else { 0.0 };
            out.push(self.edge0 + (seg as f64 + frac.clamp(0.0, 1.0)) * self.step);
        }
        out
    }
}

/// Evaluates the piecewise-linear CDF of `signal` at `x`. Used as the
/// measure-preservation oracle in tests.
pub fn cdf_at(signal: &Signal1D, x: f64) -> Result<f64> {
    Ok(Cdf::build(signal)?.value_at(x))
}

fn check_pair(src: &Signal1D, reference: &Signal1D, levels: usize) -> Result<()> {
    if src.len() != reference.len()
        || (src.start - reference.start).abs() > 1e-9
        || (src.step - reference.step).abs() > 1e-12
    {
        return Err(Error::Domain("signals must share the same grid".into()));
    }
    if levels < src.len() {
        return Err(Error::Domain("level count L must be at least the grid size".into()));
    }
    if (src.mass() - reference.mass()).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "mass mismatch: {} vs {}",
            src.mass(),
            reference.mass()
        )));
    }
    Ok(())
}

/// Default number of CDF levels for a K-sample grid.
pub fn default_levels(k: usize) -> usize {
    4 * k
}

/// The monotone map `f` with `F_src(f(t)) = F_ref(t)`, sampled on the grid.
///
/// Both CDFs are inverted at levels `l / L`; the pairs `f(tau0[l]) = tau[l]`
/// are linearly interpolated onto the grid, extending the end segments'
/// slopes beyond the sampled quantile range.
pub fn transport_map_1d(src: &Signal1D, reference: &Signal1D, levels: usize) -> Result<MonotoneMap1D> {
    check_pair(src, reference, levels)?;
    let tau = Cdf::build(src)?.quantiles(levels);
    let tau0 = Cdf::build(reference)?.quantiles(levels);

    let mut values = Vec::with_capacity(reference.len());
    let mut seg = 0usize;
    for k in 0..reference.len() {
        let t = reference.t(k);
        while seg + 2 < tau0.len() && tau0[seg + 1] < t {
            seg += 1;
        }
        let (x0, x1) = (tau0[seg], tau0[seg + 1]);
        let (y0, y1) = (tau[seg], tau[seg + 1]);
        let slope = if x1 > x0 { (y1 - y0) / (x1 - x0) } else { 0.0 };
        values.push(y0 + slope * (t - x0));
    }
    // Guard against rounding-level monotonicity violations in the
    // extrapolated tails.
    for k in 1..values.len() {
        if values[k] < values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    Ok(MonotoneMap1D { start: reference.start, step: reference.step, values })
}

/// Squared 1D transport cost `integral of (f(t) - t)^2 dF_ref(t)`.
///
/// Evaluated in the quantile domain, where the substitution `rho = F_ref(t)`
/// turns it into `integral over [0,1] of (tau_src(rho) - tau_ref(rho))^2`,
/// computed by the trapezoid rule on the `L + 1` exact quantiles. The two
/// signals enter symmetrically, so swapping arguments changes nothing.
pub fn transport_cost_1d(src: &Signal1D, reference: &Signal1D, levels: usize) -> Result<f64> {
    check_pair(src, reference, levels)?;
    let tau = Cdf::build(src)?.quantiles(levels);
    let tau0 = Cdf::build(reference)?.quantiles(levels);
    let sq: Vec<f64> = tau.iter().zip(&tau0).map(|(a, b)| (a - b) * (a - b)).collect();
    let mut acc = 0.0;
    for w in sq.windows(2) {
        acc += 0.5 * (w[0] + w[1]);
    }
    Ok(acc / levels as f64)
}

/// Forward CDT: `(f - id) * sqrt(reference)` on the grid.
pub fn cdt_forward_1d(src: &Signal1D, reference: &Signal1D, levels: usize) -> Result<Signal1D> {
    let map = transport_map_1d(src, reference, levels)?;
    let samples = map
        .values
        .iter()
        .enumerate()
        .map(|(k, f)| (f - map.t(k)) * reference.samples[k].sqrt())
        .collect();
    Signal1D::new(reference.start, reference.step, samples)
}

/// Inverse CDT: recovers the density from its transform and the reference.
///
/// The recovered map is monotone-repaired with a running maximum first, since
/// transform-space linear combinations can break monotonicity marginally.
pub fn cdt_inverse_1d(transform: &Signal1D, reference: &Signal1D) -> Result<Signal1D> {
    if transform.len() != reference.len()
        || (transform.start - reference.start).abs() > 1e-9
        || (transform.step - reference.step).abs() > 1e-12
    {
        return Err(Error::Domain("transform and reference must share a grid".into()));
    }
    let k = reference.len();
    let step = reference.step;
    let mut f = Vec::with_capacity(k);
    for i in 0..k {
        let r = reference.samples[i];
        if r <= 0.0 || r.sqrt() < 1e-300 {
            return Err(Error::Domain("reference density must be strictly positive".into()));
        }
        f.push(transform.samples[i] / r.sqrt() + reference.t(i));
    }
    // Monotone repair + strictification so the inverse is single-valued.
    for i in 1..k {
        if f[i] <= f[i - 1] {
            f[i] = f[i - 1] + 1e-12 * step;
        }
    }

    // Invert by swapping axes: f_inv at the grid points.
    let grid: Vec<f64> = (0..k).map(|i| reference.t(i)).collect();
    let mut f_inv = Vec::with_capacity(k);
    let mut seg = 0usize;
    for &t in &grid {
        while seg + 2 < k && f[seg + 1] < t {
            seg += 1;
        }
        let (x0, x1) = (f[seg], f[seg + 1]);
        let (y0, y1) = (grid[seg], grid[seg + 1]);
        let slope = if x1 > x0 { (y1 - y0) / (x1 - x0) } else { 0.0 };
        f_inv.push(y0 + slope * (t - x0));
    }

    // (f_inv)' by central differences, one-sided at the ends, clamped >= 0.
    let deriv = |i: usize| -> f64 {
        let d = if i == 0 {
            (f_inv[1] - f_inv[0]) / step
        } else if i == k - 1 {
            (f_inv[k - 1] - f_inv[k - 2]) / step
        } else {
            (f_inv[i + 1] - f_inv[i - 1]) / (2.0 * step)
        };
        d.max(0.0)
    };

    // reference evaluated at f_inv(t) by linear interpolation, zero outside.
    let ref_at = |x: f64| -> f64 {
        let pos = (x - reference.start) / step;
        if pos < 0.0 || pos > (k - 1) as f64 {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(k - 2);
        let frac = pos - i as f64;
        reference.samples[i] * (1.0 - frac) + reference.samples[i + 1] * frac
    };

    let mut samples: Vec<f64> = (0..k).map(|i| deriv(i) * ref_at(f_inv[i])).collect();
    let total: f64 = samples.iter().sum::<f64>() * step;
    if total <= 0.0 {
        return Err(Error::DegenerateInput("inverse CDT produced zero mass".into()));
    }
    for v in &mut samples {
        *v /= total;
    }
    Signal1D::new(reference.start, step, samples)
}
