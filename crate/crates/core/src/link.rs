//! Multi-span link function `Y(f1, f2, f)`: the coherent sum of per-span FWM
//! efficiencies with accumulated dispersion phase and the power evolution of
//! the spans before and after the generating span.

use num_complex::Complex;

use crate::config::{FiberSpan, GainMode, SystemConfig};
use crate::error::{ConfigError, NumericError};
use crate::fwm::{chi, MuMethod, SpanKernel};
use crate::raman::{RamanContext, SrsEnvelope};
use crate::scalar::Scalar;

/// Ordered spans with their resolved Raman contexts and amplifier gains.
#[derive(Debug, Clone)]
pub struct SpanChain<T> {
    spans: Vec<FiberSpan<T>>,
    contexts: Vec<RamanContext<T>>,
    gains: Vec<T>,
}

impl<T: Scalar> SpanChain<T> {
    /// Resolves gains and span-input powers starting from `launch_power` (W)
    /// spread over `b_tot` (Hz).
    pub fn new(spans: Vec<FiberSpan<T>>, launch_power: T, b_tot: T) -> Result<Self, ConfigError> {
        if spans.is_empty() {
            return Err(ConfigError::invariant("span chain must not be empty"));
        }
        let mut contexts = Vec::with_capacity(spans.len());
        let mut gains = Vec::with_capacity(spans.len());
        let mut p = launch_power;
        for span in &spans {
            span.validate()?;
            contexts.push(RamanContext::new(p, span.cr, b_tot, span.alpha)?);
            // the band-averaged SRS gain is exactly one, so restoring the total
            // power only has to undo the attenuation
            let g = match span.gain_mode {
                GainMode::Transparent => (span.alpha * span.length).exp(),
                GainMode::Explicit(g) => g,
            };
            gains.push(g);
            p = p * g * (-span.alpha * span.length).exp();
        }
        Ok(Self { spans, contexts, gains })
    }

    pub fn from_config(cfg: &SystemConfig<T>) -> Result<Self, ConfigError> {
        Self::new(cfg.spans.clone(), cfg.grid.p_tot(), cfg.grid.b_tot())
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn spans(&self) -> &[FiberSpan<T>] {
        &self.spans
    }

    pub fn contexts(&self) -> &[RamanContext<T>] {
        &self.contexts
    }

    /// Linear power gain after each span.
    pub fn gains(&self) -> &[T] {
        &self.gains
    }
}

/// Source of `Y` values for the NLI quadrature.
///
/// Evaluation is split in two steps because many grid cells share the idler
/// frequency `f1 + f2 - f`; whatever depends only on it is computed once by
/// [`prepare`](LinkModel::prepare).
pub trait LinkModel<T: Scalar>: Sync {
    type Idler: Send + Sync;

    fn prepare(&self, f4: T) -> Self::Idler;

    /// `Y(f1, f2, f)` for `f1 + f2 - f` equal to the prepared idler frequency.
    fn y(&self, idler: &Self::Idler, f1: T, f2: T, f: T) -> Result<Complex<T>, NumericError>;
}

/// `Y = 1` everywhere; isolates the quadrature from the physics in tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitLink;

impl<T: Scalar> LinkModel<T> for UnitLink {
    type Idler = ();

    fn prepare(&self, _f4: T) {}

    fn y(&self, _idler: &(), _f1: T, _f2: T, _f: T) -> Result<Complex<T>, NumericError> {
        Ok(Complex::new(T::one(), T::zero()))
    }
}

#[derive(Debug, Clone)]
struct SpanTerms<T> {
    kernel: usize,
    gamma: T,
    beta2: T,
    beta3: T,
    length: T,
    gain: T,
    end_envelope: SrsEnvelope<T>,
    end_attenuation: T,
}

/// Link function of a [`SpanChain`] with one `mu` kernel per distinct span.
#[derive(Debug, Clone)]
pub struct LinkFunction<T> {
    spans: Vec<SpanTerms<T>>,
    kernels: Vec<SpanKernel<T>>,
}

/// Idler-dependent data of a [`LinkFunction`].
#[derive(Debug, Clone)]
pub struct PreparedIdler<T> {
    f4: T,
    weights: Vec<Option<Vec<T>>>,
    sqrt_rho: Vec<T>,
}

impl<T: Scalar> LinkFunction<T> {
    pub fn new(
        chain: &SpanChain<T>,
        method: MuMethod,
        delta_z: T,
        samples_per_cycle: usize,
    ) -> Result<Self, NumericError> {
        let mut kernels: Vec<SpanKernel<T>> = Vec::new();
        let mut keys: Vec<(FiberSpan<T>, RamanContext<T>)> = Vec::new();
        let mut spans = Vec::with_capacity(chain.len());
        for ((span, ctx), &gain) in chain.spans.iter().zip(&chain.contexts).zip(&chain.gains) {
            let kernel = match keys.iter().position(|(s, c)| same_kernel(s, span) && c == ctx) {
                Some(i) => i,
                None => {
                    keys.push((*span, *ctx));
                    kernels.push(SpanKernel::new(span, *ctx, method, delta_z, samples_per_cycle)?);
                    kernels.len() - 1
                }
            };
            spans.push(SpanTerms {
                kernel,
                gamma: span.gamma,
                beta2: span.beta2,
                beta3: span.beta3,
                length: span.length,
                gain,
                end_envelope: ctx.envelope(span.length),
                end_attenuation: (-span.alpha * span.length).exp(),
            });
        }
        Ok(Self { spans, kernels })
    }

    pub fn from_config(cfg: &SystemConfig<T>) -> Result<Self, crate::error::EngineError> {
        let chain = SpanChain::from_config(cfg)?;
        Ok(Self::new(
            &chain,
            cfg.numerics.mu_method,
            cfg.numerics.delta_z,
            cfg.numerics.samples_per_cycle,
        )?)
    }

    /// Number of distinct `mu` kernels after deduplicating identical spans.
    pub fn distinct_kernels(&self) -> usize {
        self.kernels.len()
    }

    /// `Y(f1, f2, f)` for total frequencies measured from the band center.
    pub fn eval(&self, f1: T, f2: T, f: T) -> Result<Complex<T>, NumericError> {
        let idler = self.prepare(f1 + f2 - f);
        self.y(&idler, f1, f2, f)
    }

    fn sqrt_rho_end(&self, s: &SpanTerms<T>, freq: T) -> T {
        (s.end_envelope.gain(freq) * s.end_attenuation).sqrt()
    }
}

fn same_kernel<T: Scalar>(a: &FiberSpan<T>, b: &FiberSpan<T>) -> bool {
    a.length == b.length && a.alpha == b.alpha && a.beta2 == b.beta2 && a.beta3 == b.beta3 && a.cr == b.cr
}

impl<T: Scalar> LinkModel<T> for LinkFunction<T> {
    type Idler = PreparedIdler<T>;

    fn prepare(&self, f4: T) -> PreparedIdler<T> {
        PreparedIdler {
            f4,
            weights: self.kernels.iter().map(|k| k.segment_weights(f4)).collect(),
            sqrt_rho: self.spans.iter().map(|s| self.sqrt_rho_end(s, f4)).collect(),
        }
    }

    fn y(&self, idler: &PreparedIdler<T>, f1: T, f2: T, f: T) -> Result<Complex<T>, NumericError> {
        let n = self.spans.len();
        let mut mus: Vec<Option<Complex<T>>> = vec![None; self.kernels.len()];
        // factor applied to span s by every later span: sqrt(g rho(L, f))
        let mut suffix = vec![T::one(); n + 1];
        for s in (0..n).rev() {
            let t = &self.spans[s];
            suffix[s] = suffix[s + 1] * t.gain.sqrt() * self.sqrt_rho_end(t, f);
        }
        let mut total = Complex::new(T::zero(), T::zero());
        let mut phase = T::zero();
        let mut prefix = T::one();
        for (s, t) in self.spans.iter().enumerate() {
            let x = chi(f1, f2, f, t.beta2, t.beta3);
            let mu = match mus[t.kernel] {
                Some(m) => m,
                None => {
                    let kernel = &self.kernels[t.kernel];
                    let m = match &idler.weights[t.kernel] {
                        Some(w) => kernel.segment_with_weights(x, w),
                        None => kernel.mu(f1, f2, f)?,
                    };
                    mus[t.kernel] = Some(m);
                    m
                }
            };
            let amplitude = t.gamma * prefix * suffix[s + 1];
            total = total + mu * Complex::from_polar(amplitude, phase);
            phase = phase + x * t.length;
            let g = t.gain;
            prefix = prefix
                * g
                * g.sqrt()
                * self.sqrt_rho_end(t, f1)
                * self.sqrt_rho_end(t, f2)
                * idler.sqrt_rho[s];
        }
        debug_assert!((f1 + f2 - f - idler.f4).abs() <= T::epsilon() * T::lit(64.0) * (T::one() + f1.abs() + f2.abs() + f.abs()));
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fwm::{mu_segment, MuQuery};
    use crate::units::db_per_km_to_alpha;

    fn span(cr: f64) -> FiberSpan<f64> {
        FiberSpan {
            length: 100.0,
            alpha: db_per_km_to_alpha(0.2),
            beta2: -21.68e-24,
            beta3: 0.0,
            gamma: 1.2,
            cr,
            gain_mode: GainMode::Transparent,
        }
    }

    fn link(n: usize, cr: f64, method: MuMethod) -> LinkFunction<f64> {
        let chain = SpanChain::new(vec![span(cr); n], 0.08, 1.01e12).unwrap();
        LinkFunction::new(&chain, method, 1.0, 20).unwrap()
    }

    #[test]
    fn single_span_is_gamma_mu() {
        let l = link(1, 1.12e-12, MuMethod::Segment);
        let (f1, f2, f) = (2e11, -1e11, 5e10);
        let s = span(1.12e-12);
        let q = MuQuery {
            f1,
            f2,
            f,
            span: s,
            ctx: RamanContext::new(0.08, s.cr, 1.01e12, s.alpha).unwrap(),
        };
        let expect = mu_segment(&q, 1.0).unwrap() * 1.2;
        assert!((l.eval(f1, f2, f).unwrap() - expect).norm() <= 1e-14 * expect.norm());
    }

    #[test]
    fn two_spans_phased_array() {
        let l = link(2, 0.0, MuMethod::Maclaurin);
        let one = link(1, 0.0, MuMethod::Maclaurin);
        let (f1, f2, f) = (3e11, 1e11, -1e11);
        let x = chi(f1, f2, f, -21.68e-24, 0.0);
        let af = (Complex::new(1.0, 0.0) + Complex::from_polar(1.0, x * 100.0)).norm_sqr();
        let expect = one.eval(f1, f2, f).unwrap().norm_sqr() * af;
        let got = l.eval(f1, f2, f).unwrap().norm_sqr();
        assert!((got - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn coherent_sum_on_degenerate_axis() {
        let l = link(5, 0.0, MuMethod::Segment);
        let one = link(1, 0.0, MuMethod::Segment);
        let y = l.eval(1e11, 2e11, 1e11).unwrap();
        let y1 = one.eval(1e11, 2e11, 1e11).unwrap();
        assert!((y - y1 * 5.0).norm() <= 1e-12 * y.norm());
    }

    #[test]
    fn identical_spans_share_one_kernel() {
        assert_eq!(link(4, 1.12e-12, MuMethod::Segment).distinct_kernels(), 1);
        let mut spans = vec![span(0.0); 2];
        spans[1].length = 80.0;
        let chain = SpanChain::new(spans, 0.08, 1e12).unwrap();
        assert_eq!(LinkFunction::new(&chain, MuMethod::Segment, 1.0, 20).unwrap().distinct_kernels(), 2);
    }

    #[test]
    fn transparent_gain_restores_launch_power() {
        let chain = SpanChain::new(vec![span(1.12e-12); 3], 0.08, 1.01e12).unwrap();
        for ctx in chain.contexts() {
            assert!((ctx.p_tot - 0.08).abs() < 1e-15);
        }
        let mut lossy = span(0.0);
        lossy.gain_mode = GainMode::Explicit(10.0);
        let chain = SpanChain::new(vec![lossy; 2], 0.08, 1e12).unwrap();
        let expect = 0.08 * 10.0 * (-lossy.alpha * 100.0).exp();
        assert!((chain.contexts()[1].p_tot - expect).abs() < 1e-15);
    }

    #[test]
    fn symmetric_in_f1_f2() {
        let l = link(3, 1.12e-12, MuMethod::Integral);
        let a = l.eval(2.5e11, -1e11, 3e10).unwrap();
        let b = l.eval(-1e11, 2.5e11, 3e10).unwrap();
        assert!((a - b).norm() <= 1e-13 * a.norm());
    }
}
