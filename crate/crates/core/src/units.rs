//! Physical constants and unit conversions.
//!
//! Internal canon: frequencies in Hz, powers in W, lengths in km, dispersion
//! in s^n/km, attenuation in natural 1/km (power), Raman slope in 1/(W km Hz).

use crate::scalar::Scalar;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference wavelength used when converting D/S to beta2/beta3, m.
pub const DEFAULT_LAMBDA_REF: f64 = 1550e-9;

/// dB per neper (power): 10 log10(e).
pub fn db_per_neper<T: Scalar>() -> T {
    T::lit(10.0) * T::LOG10_E()
}

pub fn dbm_to_w<T: Scalar>(dbm: T) -> T {
    T::lit(1e-3) * T::lit(10.0).powf(dbm / T::lit(10.0))
}

pub fn w_to_dbm<T: Scalar>(w: T) -> T {
    T::lit(10.0) * (w / T::lit(1e-3)).log10()
}

pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Scalar>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

/// dB/km to natural power attenuation in 1/km.
pub fn db_per_km_to_alpha<T: Scalar>(db_per_km: T) -> T {
    db_per_km / db_per_neper::<T>()
}

pub fn alpha_to_db_per_km<T: Scalar>(alpha: T) -> T {
    alpha * db_per_neper::<T>()
}

/// Converts dispersion `d` [ps/(nm km)] and slope `s` [ps/(nm^2 km)] at
/// wavelength `lambda_ref` [m] into (beta2 [s^2/km], beta3 [s^3/km]).
pub fn dispersion_to_beta<T: Scalar>(d: T, s: T, lambda_ref: T) -> (T, T) {
    // ps/(nm km) -> s/(m km); ps/(nm^2 km) -> s/(m^2 km)
    let d_si = d * T::lit(1e-3);
    let s_si = s * T::lit(1e6);
    let k = lambda_ref * lambda_ref / (T::lit(2.0) * T::PI() * T::lit(SPEED_OF_LIGHT));
    let beta2 = -d_si * k;
    let beta3 = k * k * (s_si + T::lit(2.0) * d_si / lambda_ref);
    (beta2, beta3)
}
