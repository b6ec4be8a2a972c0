//! ISRS power evolution under the triangular (linear-slope) Raman gain model.
//!
//! Frequencies are offsets from the WDM band center. The normalized profile is
//!
//! ```text
//! rho(z, f) = B P C_r L_eff(z) exp(-alpha z - P C_r L_eff(z) f) / (2 sinh(B P C_r L_eff(z) / 2))
//! ```
//!
//! and the SRS gain is the same expression without the `exp(-alpha z)` factor.

use crate::error::{ConfigError, NumericError};
use crate::scalar::Scalar;
use crate::units::db_per_neper;

/// Below this value of `zeta * B_tot` the sinh normalization and the tilt
/// exponential are evaluated by truncated Maclaurin series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Prefactor of the band-edge power transfer formula as printed in the
/// literature (a rounded 10 log10(e)).
pub const DELTA_RHO_PREFACTOR: f64 = 4.3;

/// `(1 - exp(-alpha z)) / alpha`, with the lossless limit handled by series.
pub fn effective_length<T: Scalar>(z: T, alpha: T) -> T {
    let x = alpha * z;
    if x.abs() < T::lit(1e-8) {
        z * (T::one() - x / T::lit(2.0) + x * x / T::lit(6.0))
    } else {
        -(-x).exp_m1() / alpha
    }
}

/// Parameters of the Raman-tilted power profile of one span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanContext<T> {
    /// Total launch power at the span input, W.
    pub p_tot: T,
    /// Raman gain slope, 1/(W km Hz).
    pub cr: T,
    /// Total WDM bandwidth, Hz.
    pub b_tot: T,
    /// Power attenuation, 1/km.
    pub alpha: T,
}

/// SRS envelope frozen at one position `z`; evaluates the gain at any `f`.
#[derive(Debug, Clone, Copy)]
pub struct SrsEnvelope<T> {
    zeta: T,
    half_width: T,
    scale: T,
    series: bool,
}

impl<T: Scalar> SrsEnvelope<T> {
    pub fn new(zeta: T, b_tot: T) -> Self {
        let x = zeta * b_tot / T::lit(2.0);
        if zeta * b_tot < T::lit(SERIES_THRESHOLD) {
            // x / sinh(x)
            let x2 = x * x;
            let scale = T::one() - x2 / T::lit(6.0) + T::lit(7.0) * x2 * x2 / T::lit(360.0);
            Self {
                zeta,
                half_width: x,
                scale,
                series: true,
            }
        } else {
            // 2x exp(-x) / (1 - exp(-2x)) times exp(-zeta f) is folded into one
            // exponential so band-edge values never overflow.
            let scale = T::lit(2.0) * x / -(-(T::lit(2.0) * x)).exp_m1();
            Self {
                zeta,
                half_width: x,
                scale,
                series: false,
            }
        }
    }

    /// `P_tot C_r L_eff(z)`, 1/Hz.
    pub fn zeta(&self) -> T {
        self.zeta
    }

    #[inline]
    pub fn gain(&self, f: T) -> T {
        if self.series {
            let u = self.zeta * f;
            self.scale * (T::one() - u + u * u / T::lit(2.0))
        } else {
            self.scale * (-self.half_width - self.zeta * f).exp()
        }
    }
}

impl<T: Scalar> RamanContext<T> {
    pub fn new(p_tot: T, cr: T, b_tot: T, alpha: T) -> Result<Self, ConfigError> {
        let ctx = Self {
            p_tot,
            cr,
            b_tot,
            alpha,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !pos(self.p_tot) {
            return Err(ConfigError::invariant("Raman context: p_tot must be > 0"));
        }
        if !pos(self.b_tot) {
            return Err(ConfigError::invariant("Raman context: b_tot must be > 0"));
        }
        if !pos(self.alpha) {
            return Err(ConfigError::invariant("Raman context: alpha must be > 0"));
        }
        if !(self.cr >= T::zero() && self.cr.is_finite()) {
            return Err(ConfigError::invariant("Raman context: cr must be >= 0"));
        }
        Ok(())
    }

    /// `P_tot C_r L_eff(z)`.
    pub fn zeta(&self, z: T) -> T {
        self.p_tot * self.cr * effective_length(z, self.alpha)
    }

    pub fn envelope(&self, z: T) -> SrsEnvelope<T> {
        SrsEnvelope::new(self.zeta(z), self.b_tot)
    }

    /// SRS gain at `(z, f)`: the power profile with attenuation removed.
    pub fn srs_gain(&self, z: T, f: T) -> T {
        self.envelope(z).gain(f)
    }

    /// Normalized power profile `rho(z, f) = srs_gain(z, f) exp(-alpha z)`.
    pub fn rho(&self, z: T, f: T) -> T {
        self.srs_gain(z, f) * (-self.alpha * z).exp()
    }

    /// Like [`rho`](Self::rho) but reports overflow instead of returning
    /// `inf`/`NaN` for extreme tilts or far out-of-band frequencies.
    pub fn checked_rho(&self, z: T, f: T) -> Result<T, NumericError> {
        let v = self.rho(z, f);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericError::NonFinite {
                what: "power profile",
                value: v.as_f64(),
                z_km: z.as_f64(),
                f_hz: f.as_f64(),
            })
        }
    }

    /// Band-edge power transfer `4.3 P_tot C_r L_eff(z) B_tot` in dB, with
    /// the rounded prefactor used by the published Table I/II anchors.
    pub fn delta_rho_db(&self, z: T) -> T {
        T::lit(DELTA_RHO_PREFACTOR) * self.zeta(z) * self.b_tot
    }

    /// Exact band-edge ratio `10 log10(rho(z, -B/2) / rho(z, B/2))`.
    pub fn delta_rho_exact_db(&self, z: T) -> T {
        db_per_neper::<T>() * self.zeta(z) * self.b_tot
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{db_per_km_to_alpha, dbm_to_w};
    use approx::assert_relative_eq;

    fn table1(cr_per_thz: f64) -> RamanContext<f64> {
        RamanContext::new(
            dbm_to_w(19.0),
            cr_per_thz * 1e-12,
            1.01e12,
            db_per_km_to_alpha(0.2),
        )
        .unwrap()
    }

    #[test]
    fn effective_length_values() {
        assert_relative_eq!(
            effective_length(100.0, 0.04605),
            (1.0 - (-4.605f64).exp()) / 0.04605,
            max_relative = 1e-14
        );
        assert!((effective_length(100.0f64, 0.04605) - 21.5).abs() < 0.01);
        assert_eq!(effective_length(0.0, 0.2), 0.0);
        assert_relative_eq!(effective_length(50.0, 1e-14), 50.0, max_relative = 1e-12);
        assert_relative_eq!(effective_length(50.0, 0.0), 50.0, max_relative = 1e-15);
    }

    #[test]
    fn rho_at_origin_is_one() {
        let ctx = table1(1.12);
        for f in [-5e11, 0.0, 3e11] {
            assert_eq!(ctx.rho(0.0, f), 1.0);
        }
    }

    #[test]
    fn raman_free_limit() {
        let ctx = RamanContext::new(0.08, 0.0, 1e12, 0.04605).unwrap();
        for f in [-5e11, 0.0, 5e11] {
            assert_eq!(ctx.srs_gain(100.0, f), 1.0);
            assert_eq!(ctx.rho(100.0, f), (-4.605f64).exp());
        }
        assert!((ctx.rho(100.0, 0.0) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn tilt_ratio_matches_transfer() {
        let ctx = table1(1.12);
        let ratio = ctx.rho(100.0, -0.505e12) / ctx.rho(100.0, 0.505e12);
        assert_relative_eq!(10.0 * ratio.log10(), ctx.delta_rho_exact_db(100.0), max_relative = 1e-12);
        assert!((ctx.delta_rho_exact_db(100.0) - 8.2).abs() < 0.25);
    }

    #[test]
    fn srs_gain_times_attenuation_is_rho() {
        let ctx = table1(1.12);
        for (z, f) in [(10.0, -3e11), (55.5, 1e11), (100.0, 4.9e11)] {
            assert_eq!(ctx.srs_gain(z, f) * (-ctx.alpha * z).exp(), ctx.rho(z, f));
        }
    }

    #[test]
    fn gain_is_decreasing_in_frequency() {
        let ctx = table1(1.12);
        let g: Vec<f64> = (-10..=10).map(|i| ctx.srs_gain(100.0, i as f64 * 5e10)).collect();
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn extreme_tilt_does_not_overflow_in_band() {
        let ctx = RamanContext::<f64>::new(10.0, 1e-9, 10e12, 0.046).unwrap();
        assert!(ctx.checked_rho(100.0, -5e12).unwrap().is_finite());
        assert!(ctx.checked_rho(100.0, 5e12).unwrap() >= 0.0);
        assert!(ctx.checked_rho(100.0, -1e15).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        // straddle the series threshold
        let b = 1e12;
        let below = SrsEnvelope::new(0.99 * SERIES_THRESHOLD / b, b);
        let above = SrsEnvelope::new(1.01 * SERIES_THRESHOLD / b, b);
        assert_relative_eq!(below.gain(4e11), above.gain(4e11), max_relative = 1e-7);
    }

    #[test]
    fn rejects_invalid_context() {
        assert!(RamanContext::new(0.0, 1e-12, 1e12, 0.04).is_err());
        assert!(RamanContext::new(0.1, -1e-12, 1e12, 0.04).is_err());
        assert!(RamanContext::new(0.1, 1e-12, 1e12, 0.0).is_err());
    }
}
