use num_complex::Complex;

use crate::error::ConfigError;
use crate::scalar::Scalar;

/// Modulation-format moment factors weighting the EGN correction terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationFormat<T> {
    name: String,
    phi: T,
    psi: T,
}

const GAUSSIAN_ALIASES: &[&str] = &["gaussian", "pm-gaussian", "pm-2d-gaussian", "2d-gaussian"];

fn normalize(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('_', "-")
}

fn is_gaussian_name(name: &str) -> bool {
    GAUSSIAN_ALIASES.contains(&normalize(name).as_str())
}

impl<T: Scalar> ModulationFormat<T> {
    /// Custom format. A Gaussian-named format must carry `phi = psi = 0`.
    pub fn new(name: impl Into<String>, phi: T, psi: T) -> Result<Self, ConfigError> {
        let name = name.into();
        if !phi.is_finite() || !psi.is_finite() {
            return Err(ConfigError::invariant("modulation: phi and psi must be finite"));
        }
        if is_gaussian_name(&name) && (phi != T::zero() || psi != T::zero()) {
            return Err(ConfigError::invariant(
                "modulation: Gaussian format requires phi = 0 and psi = 0",
            ));
        }
        Ok(Self { name, phi, psi })
    }

    pub fn gaussian() -> Self {
        Self {
            name: "pm-2d-gaussian".into(),
            phi: T::zero(),
            psi: T::zero(),
        }
    }

    /// Built-in formats. `phi` is computed from the unit-energy
    /// constellation; `psi` uses the tabulated EGN sixth-order values.
    pub fn named(name: &str) -> Result<Self, ConfigError> {
        let key = normalize(name);
        if is_gaussian_name(&key) {
            return Ok(Self::gaussian());
        }
        let (points, psi) = match key.as_str() {
            "pm-qpsk" | "qpsk" | "dp-qpsk" => (qpsk::<T>(), T::lit(4.0)),
            "pm-16qam" | "16qam" | "dp-16qam" => (square_qam::<T>(4), T::lit(52.0 / 25.0)),
            _ => return Err(ConfigError::UnknownFormat(name.to_string())),
        };
        Ok(Self {
            name: key,
            phi: fourth_moment_excess(&points),
            psi,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn psi(&self) -> T {
        self.psi
    }

    pub fn is_gaussian(&self) -> bool {
        self.phi == T::zero() && self.psi == T::zero()
    }

    pub fn cast<U: Scalar>(&self) -> ModulationFormat<U> {
        ModulationFormat {
            name: self.name.clone(),
            phi: crate::scalar::cast(self.phi),
            psi: crate::scalar::cast(self.psi),
        }
    }
}

/// `E|a|^4 / (E|a|^2)^2 - 2` over an equiprobable constellation.
pub fn fourth_moment_excess<T: Scalar>(points: &[Complex<T>]) -> T {
    let n = T::from_count(points.len());
    let m2 = points.iter().map(|p| p.norm_sqr()).sum::<T>() / n;
    let m4 = points.iter().map(|p| p.norm_sqr() * p.norm_sqr()).sum::<T>() / n;
    m4 / (m2 * m2) - T::lit(2.0)
}

fn qpsk<T: Scalar>() -> Vec<Complex<T>> {
    square_qam(2)
}

/// Square QAM with `side x side` points on the odd-integer lattice.
fn square_qam<T: Scalar>(side: usize) -> Vec<Complex<T>> {
    let levels: Vec<T> = (0..side)
        .map(|i| T::from_count(2 * i) - T::from_count(side - 1))
        .collect();
    levels
        .iter()
        .flat_map(|&re| levels.iter().map(move |&im| Complex::new(re, im)))
        .collect()
}
