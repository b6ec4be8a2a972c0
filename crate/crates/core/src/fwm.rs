//! Per-span FWM efficiency factor `mu(f1, f2, f)`: the span integral of the
//! Raman-tilted power profile times the phase-mismatch oscillation.
//!
//! Three evaluators are provided. The integral kernel is an oscillation-aware
//! composite Gauss-Legendre rule and serves as the accuracy reference; the
//! Maclaurin and segment kernels are closed forms.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::config::FiberSpan;
use crate::error::{ConfigError, NumericError};
use crate::quadrature::{CompensatedSum, GaussLegendre};
use crate::raman::{effective_length, RamanContext, SrsEnvelope};
use crate::scalar::Scalar;

/// Largest node spacing of the integral kernel, km.
pub const MAX_INTEGRAL_STEP_KM: f64 = 0.5;
/// Node spacings below this are reported as [`NumericError::StepUnderflow`].
pub const MIN_INTEGRAL_STEP_KM: f64 = 1e-6;
/// Gauss-Legendre nodes per panel of the integral kernel.
pub const PANEL_NODES: usize = 8;
/// Segment kernel: exponentials are recomputed directly every this many steps.
const REANCHOR_EVERY: usize = 16;

/// Which evaluator produces `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MuMethod {
    Integral,
    Maclaurin,
    #[default]
    Segment,
}

impl MuMethod {
    pub const ALL: [MuMethod; 3] = [MuMethod::Integral, MuMethod::Maclaurin, MuMethod::Segment];

    pub fn as_str(&self) -> &'static str {
        match self {
            MuMethod::Integral => "integral",
            MuMethod::Maclaurin => "maclaurin",
            MuMethod::Segment => "segment",
        }
    }
}

impl FromStr for MuMethod {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "integral" => Ok(MuMethod::Integral),
            "maclaurin" => Ok(MuMethod::Maclaurin),
            "segment" => Ok(MuMethod::Segment),
            other => Err(ConfigError::invariant(format!(
                "mu_method must be one of integral, maclaurin, segment; got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for MuMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Phase-mismatch rate `4 pi^2 (f1 - f)(f2 - f)[beta2 + pi beta3 (f1 + f2)]`, rad/km.
#[inline]
pub fn chi<T: Scalar>(f1: T, f2: T, f: T, beta2: T, beta3: T) -> T {
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    four_pi2 * (f1 - f) * (f2 - f) * (beta2 + T::PI() * beta3 * (f1 + f2))
}

/// `(exp(w) - 1) / w` for complex `w`, accurate near zero.
#[inline]
pub fn phi1<T: Scalar>(w: Complex<T>) -> Complex<T> {
    if w.norm_sqr() < T::lit(1e-16) {
        let one = Complex::new(T::one(), T::zero());
        one + w / T::lit(2.0) + w * w / T::lit(6.0)
    } else {
        expm1(w) / w
    }
}

/// `exp(w) - 1` without cancellation for small `w`.
#[inline]
pub fn expm1<T: Scalar>(w: Complex<T>) -> Complex<T> {
    let half = w.im / T::lit(2.0);
    let s = half.sin();
    // cos(b) - 1 = -2 sin^2(b/2)
    let cos_m1 = T::lit(-2.0) * s * s;
    let ea = w.re.exp();
    Complex::new(w.re.exp_m1() * w.im.cos() + cos_m1, ea * w.im.sin())
}

/// Closed-form span integral of `exp((i chi - alpha) z)` over `[0, L]`.
pub fn analytic_eta<T: Scalar>(chi: T, alpha: T, length: T) -> Complex<T> {
    let c = Complex::new(-alpha, chi);
    phi1(c * length) * length
}

/// One `mu` evaluation request. Frequencies are offsets from the band center.
#[derive(Debug, Clone, Copy)]
pub struct MuQuery<T> {
    pub f1: T,
    pub f2: T,
    pub f: T,
    pub span: FiberSpan<T>,
    pub ctx: RamanContext<T>,
}

impl<T: Scalar> MuQuery<T> {
    pub fn chi(&self) -> T {
        chi(self.f1, self.f2, self.f, self.span.beta2, self.span.beta3)
    }

    /// The idler frequency `f1 + f2 - f`.
    pub fn f4(&self) -> T {
        self.f1 + self.f2 - self.f
    }
}

/// Per-span evaluator with everything that does not depend on the query
/// frequencies computed once.
#[derive(Debug, Clone)]
pub struct SpanKernel<T> {
    method: MuMethod,
    length: T,
    alpha: T,
    beta2: T,
    beta3: T,
    ctx: RamanContext<T>,
    plan: Plan<T>,
}

#[derive(Debug, Clone)]
enum Plan<T> {
    Integral {
        rule: GaussLegendre<T>,
        delta_z: T,
        samples_per_cycle: T,
    },
    Maclaurin,
    Segment {
        envelopes: Vec<SrsEnvelope<T>>,
    },
}

impl<T: Scalar> SpanKernel<T> {
    /// `delta_z` is the segment length (segment) or the step cap (integral);
    /// `samples_per_cycle` only affects the integral kernel.
    pub fn new(
        span: &FiberSpan<T>,
        ctx: RamanContext<T>,
        method: MuMethod,
        delta_z: T,
        samples_per_cycle: usize,
    ) -> Result<Self, NumericError> {
        if !(delta_z > T::zero()) {
            return Err(NumericError::InvalidArgument("delta_z must be positive".into()));
        }
        let plan = match method {
            MuMethod::Integral => {
                if samples_per_cycle < 2 {
                    return Err(NumericError::InvalidArgument(
                        "samples_per_cycle must be at least 2".into(),
                    ));
                }
                Plan::Integral {
                    rule: GaussLegendre::new(PANEL_NODES),
                    delta_z,
                    samples_per_cycle: T::from_count(samples_per_cycle),
                }
            }
            MuMethod::Maclaurin => Plan::Maclaurin,
            MuMethod::Segment => {
                let k = segment_count(span.length, delta_z);
                let kf = T::from_count(k);
                let envelopes = (0..k)
                    .map(|i| ctx.envelope((T::from_count(i) + T::lit(0.5)) / kf * span.length))
                    .collect();
                Plan::Segment { envelopes }
            }
        };
        Ok(Self {
            method,
            length: span.length,
            alpha: span.alpha,
            beta2: span.beta2,
            beta3: span.beta3,
            ctx,
            plan,
        })
    }

    pub fn method(&self) -> MuMethod {
        self.method
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn chi(&self, f1: T, f2: T, f: T) -> T {
        chi(f1, f2, f, self.beta2, self.beta3)
    }

    /// Number of segments (segment kernel) or `None`.
    pub fn segments(&self) -> Option<usize> {
        match &self.plan {
            Plan::Segment { envelopes } => Some(envelopes.len()),
            _ => None,
        }
    }

    /// `mu(f1, f2, f)`, km.
    pub fn mu(&self, f1: T, f2: T, f: T) -> Result<Complex<T>, NumericError> {
        let chi = self.chi(f1, f2, f);
        let f4 = f1 + f2 - f;
        match &self.plan {
            Plan::Integral {
                rule,
                delta_z,
                samples_per_cycle,
            } => self.integral(rule, *delta_z, *samples_per_cycle, chi, f4, (f1, f2, f)),
            Plan::Maclaurin => Ok(self.maclaurin(chi, f4)),
            Plan::Segment { envelopes } => {
                let weights: Vec<T> = envelopes.iter().map(|e| e.gain(f4)).collect();
                Ok(self.segment_with_weights(chi, &weights))
            }
        }
    }

    /// Segment envelope weights `srs_gain(z_k, f4)`; `None` for other kernels.
    pub fn segment_weights(&self, f4: T) -> Option<Vec<T>> {
        match &self.plan {
            Plan::Segment { envelopes } => Some(envelopes.iter().map(|e| e.gain(f4)).collect()),
            _ => None,
        }
    }

    /// Segment sum for precomputed envelope weights, one per segment.
    pub fn segment_with_weights(&self, chi: T, weights: &[T]) -> Complex<T> {
        let k = weights.len();
        let h = self.length / T::from_count(k);
        let c = Complex::new(-self.alpha, chi);
        let step = (c * h).exp();
        let mut e = Complex::new(T::one(), T::zero());
        let mut acc = Complex::new(T::zero(), T::zero());
        for (i, &w) in weights.iter().enumerate() {
            if i > 0 {
                e = if i % REANCHOR_EVERY == 0 {
                    (c * (h * T::from_count(i))).exp()
                } else {
                    e * step
                };
            }
            acc = acc + e * w;
        }
        // sum_k w_k (E_{k+1} - E_k) / c = (exp(c h) - 1) / c * sum_k w_k E_k
        acc * phi1(c * h) * h
    }

    fn maclaurin(&self, chi: T, f4: T) -> Complex<T> {
        let eta = analytic_eta(chi, self.alpha, self.length);
        if self.ctx.cr == T::zero() || f4 == T::zero() {
            return eta;
        }
        let eta2 = analytic_eta(chi, T::lit(2.0) * self.alpha, self.length);
        let k = self.ctx.p_tot * self.ctx.cr * f4 / self.alpha;
        eta - (eta - eta2) * k
    }

    fn integral(
        &self,
        rule: &GaussLegendre<T>,
        delta_z: T,
        samples_per_cycle: T,
        chi: T,
        f4: T,
        at: (T, T, T),
    ) -> Result<Complex<T>, NumericError> {
        let mut spacing = delta_z.min(T::lit(MAX_INTEGRAL_STEP_KM));
        if chi != T::zero() {
            spacing = spacing.min(T::lit(2.0) * T::PI() / (chi.abs() * samples_per_cycle));
        }
        if spacing < T::lit(MIN_INTEGRAL_STEP_KM) {
            return Err(NumericError::StepUnderflow {
                f1: at.0.as_f64(),
                f2: at.1.as_f64(),
                f: at.2.as_f64(),
                step_km: spacing.as_f64(),
            });
        }
        let n_nodes = T::from_count(rule.len());
        let panels = (self.length / (n_nodes * spacing)).ceil().to_usize().unwrap_or(1).max(1);
        let width = self.length / T::from_count(panels);
        let half = width / T::lit(2.0);
        let c = Complex::new(-self.alpha, chi);
        let mut total = CompensatedSum::new();
        for p in 0..panels {
            let mid = (T::from_count(p) + T::lit(0.5)) * width;
            let mut panel = Complex::new(T::zero(), T::zero());
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let z = mid + half * x;
                let g = self.ctx.srs_gain(z, f4);
                panel = panel + (c * z).exp() * (g * w);
            }
            total.add(panel * half);
        }
        Ok(total.value())
    }
}

/// `ceil(L / delta_z)`, at least one.
pub fn segment_count<T: Scalar>(length: T, delta_z: T) -> usize {
    let ratio = (length / delta_z).as_f64();
    // 100 / (100 / 3) must give 3, not 4
    ((ratio - 1e-12 * ratio.max(1.0)).ceil() as usize).max(1)
}

/// Midpoints `z_k = (k + 1/2) L / K` used by the segment kernel.
pub fn segment_midpoints<T: Scalar>(length: T, delta_z: T) -> Vec<T> {
    let k = segment_count(length, delta_z);
    let kf = T::from_count(k);
    (0..k).map(|i| (T::from_count(i) + T::lit(0.5)) / kf * length).collect()
}

/// Reference kernel with the default oscillation policy.
pub fn mu_integral<T: Scalar>(q: &MuQuery<T>, delta_z: T, samples_per_cycle: usize) -> Result<Complex<T>, NumericError> {
    SpanKernel::new(&q.span, q.ctx, MuMethod::Integral, delta_z, samples_per_cycle)?.mu(q.f1, q.f2, q.f)
}

/// First-order Maclaurin closed form.
pub fn mu_maclaurin<T: Scalar>(q: &MuQuery<T>) -> Complex<T> {
    let eta = analytic_eta(q.chi(), q.span.alpha, q.span.length);
    let f4 = q.f4();
    if q.ctx.cr == T::zero() || f4 == T::zero() {
        return eta;
    }
    let eta2 = analytic_eta(q.chi(), T::lit(2.0) * q.span.alpha, q.span.length);
    eta - (eta - eta2) * (q.ctx.p_tot * q.ctx.cr * f4 / q.span.alpha)
}

/// Segment closed form with `ceil(L / delta_z)` midpoint-frozen segments.
pub fn mu_segment<T: Scalar>(q: &MuQuery<T>, delta_z: T) -> Result<Complex<T>, NumericError> {
    SpanKernel::new(&q.span, q.ctx, MuMethod::Segment, delta_z, 2)?.mu(q.f1, q.f2, q.f)
}

/// Dispatches on `method`.
pub fn mu<T: Scalar>(q: &MuQuery<T>, method: MuMethod, delta_z: T, samples_per_cycle: usize) -> Result<Complex<T>, NumericError> {
    SpanKernel::new(&q.span, q.ctx, method, delta_z, samples_per_cycle)?.mu(q.f1, q.f2, q.f)
}

/// `|mu| / L_eff(L)`; equals 1 on the degenerate axis without Raman tilt.
pub fn fwm_efficiency<T: Scalar>(
    q: &MuQuery<T>,
    method: MuMethod,
    delta_z: T,
    samples_per_cycle: usize,
) -> Result<T, NumericError> {
    let m = mu(q, method, delta_z, samples_per_cycle)?;
    Ok(m.norm() / effective_length(q.span.length, q.span.alpha))
}

/// Samples of the three factors of the `mu` integrand along the span.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandTrace<T> {
    pub z: Vec<T>,
    pub total: Vec<Complex<T>>,
    pub srs_gain_term: Vec<T>,
    pub attenuation_term: Vec<T>,
    pub pmf_term: Vec<Complex<T>>,
}

impl<T: Scalar> IntegrandTrace<T> {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Samples `srs_gain(z, f4) * exp(-alpha z) * exp(i chi z)` at `n_samples`
/// equally spaced points of `[0, L]`.
pub fn integrand_trace<T: Scalar>(q: &MuQuery<T>, n_samples: usize) -> Result<IntegrandTrace<T>, NumericError> {
    if n_samples < 2 {
        return Err(NumericError::InvalidArgument("integrand trace needs at least 2 samples".into()));
    }
    let chi = q.chi();
    let f4 = q.f4();
    let step = q.span.length / T::from_count(n_samples - 1);
    let mut out = IntegrandTrace {
        z: Vec::with_capacity(n_samples),
        total: Vec::with_capacity(n_samples),
        srs_gain_term: Vec::with_capacity(n_samples),
        attenuation_term: Vec::with_capacity(n_samples),
        pmf_term: Vec::with_capacity(n_samples),
    };
    for i in 0..n_samples {
        let z = if i + 1 == n_samples {
            q.span.length
        } else {
            step * T::from_count(i)
        };
        let g = q.ctx.srs_gain(z, f4);
        let a = (-q.span.alpha * z).exp();
        let pmf = Complex::from_polar(T::one(), chi * z);
        out.z.push(z);
        out.total.push(pmf * (g * a));
        out.srs_gain_term.push(g);
        out.attenuation_term.push(a);
        out.pmf_term.push(pmf);
    }
    Ok(out)
}
