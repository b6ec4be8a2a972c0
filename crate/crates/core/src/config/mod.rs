//! Validated system description: spans, channel grid, modulation format and
//! numerics policy, all in internal canonical units.

mod document;
mod modulation;

pub use document::{parse_config, to_document, to_json_string};
pub use modulation::{fourth_moment_excess, ModulationFormat};

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::fwm::MuMethod;
use crate::scalar::{cast, Scalar};

/// Amplifier behaviour at the end of a span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainMode<T> {
    /// Restores the total launch power at the next span input.
    Transparent,
    /// Fixed linear power gain.
    Explicit(T),
}

/// Per-span physical constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpan<T> {
    /// km
    pub length: T,
    /// Power attenuation, 1/km.
    pub alpha: T,
    /// s^2/km
    pub beta2: T,
    /// s^3/km
    pub beta3: T,
    /// 1/(W km)
    pub gamma: T,
    /// Raman gain slope, 1/(W km Hz).
    pub cr: T,
    pub gain_mode: GainMode<T>,
}

impl<T: Scalar> FiberSpan<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [self.length, self.alpha, self.beta2, self.beta3, self.gamma, self.cr]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ConfigError::invariant("span: all parameters must be finite"));
        }
        if !(self.length > T::zero()) {
            return Err(ConfigError::invariant("span: length > 0"));
        }
        if !(self.alpha > T::zero()) {
            return Err(ConfigError::invariant("span: alpha > 0"));
        }
        if self.gamma < T::zero() {
            return Err(ConfigError::invariant("span: gamma >= 0"));
        }
        if self.cr < T::zero() {
            return Err(ConfigError::invariant("span: cr >= 0"));
        }
        if let GainMode::Explicit(g) = self.gain_mode {
            if !(g > T::zero() && g.is_finite()) {
                return Err(ConfigError::invariant("span: explicit gain must be > 0"));
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> FiberSpan<U> {
        FiberSpan {
            length: cast(self.length),
            alpha: cast(self.alpha),
            beta2: cast(self.beta2),
            beta3: cast(self.beta3),
            gamma: cast(self.gamma),
            cr: cast(self.cr),
            gain_mode: match self.gain_mode {
                GainMode::Transparent => GainMode::Transparent,
                GainMode::Explicit(g) => GainMode::Explicit(cast(g)),
            },
        }
    }
}

/// `2M + 1` channels indexed `-M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid<T> {
    m: i32,
    symbol_rate: T,
    spacing: T,
    powers: Vec<T>,
}

impl<T: Scalar> ChannelGrid<T> {
    /// `powers` lists per-channel launch powers (W) from channel `-M` upward.
    pub fn new(symbol_rate: T, spacing: T, powers: Vec<T>) -> Result<Self, ConfigError> {
        let n = powers.len();
        if n == 0 || n % 2 == 0 {
            return Err(ConfigError::invariant(format!(
                "grid: channel count must be odd (2M+1), got {n}"
            )));
        }
        if !(symbol_rate > T::zero() && symbol_rate.is_finite()) {
            return Err(ConfigError::invariant("grid: symbol rate > 0"));
        }
        if !(spacing >= symbol_rate && spacing.is_finite()) {
            return Err(ConfigError::invariant("grid: spacing >= symbol rate"));
        }
        if powers.iter().any(|p| !(*p > T::zero() && p.is_finite())) {
            return Err(ConfigError::invariant("grid: every channel power > 0"));
        }
        Ok(Self {
            m: ((n - 1) / 2) as i32,
            symbol_rate,
            spacing,
            powers,
        })
    }

    /// Uniform grid sharing `total_power` equally.
    pub fn uniform(num_channels: usize, symbol_rate: T, spacing: T, total_power: T) -> Result<Self, ConfigError> {
        let per = total_power / T::from_count(num_channels.max(1));
        Self::new(symbol_rate, spacing, vec![per; num_channels])
    }

    /// Grid half-width `M`.
    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn num_channels(&self) -> usize {
        self.powers.len()
    }

    pub fn symbol_rate(&self) -> T {
        self.symbol_rate
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn powers(&self) -> &[T] {
        &self.powers
    }

    /// `(2M + 1) R`.
    pub fn b_tot(&self) -> T {
        T::from_count(self.num_channels()) * self.symbol_rate
    }

    pub fn p_tot(&self) -> T {
        self.powers.iter().copied().sum()
    }

    pub fn contains(&self, kappa: i32) -> bool {
        kappa.abs() <= self.m
    }

    /// Launch power of channel `kappa`; panics outside the grid.
    pub fn power(&self, kappa: i32) -> T {
        self.powers[(kappa + self.m) as usize]
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        -self.m..=self.m
    }

    /// Distance between adjacent channel centers under `convention`.
    pub fn center_shift(&self, convention: CenterConvention) -> T {
        match convention {
            CenterConvention::Spacing => self.spacing,
            CenterConvention::SymbolRate => self.symbol_rate,
        }
    }

    pub fn center_frequency(&self, kappa: i32, convention: CenterConvention) -> T {
        T::lit(kappa as f64) * self.center_shift(convention)
    }

    pub fn cast<U: Scalar>(&self) -> ChannelGrid<U> {
        ChannelGrid {
            m: self.m,
            symbol_rate: cast(self.symbol_rate),
            spacing: cast(self.spacing),
            powers: self.powers.iter().map(|&p| cast(p)).collect(),
        }
    }
}

/// Where channel `kappa` is centered: `kappa * spacing` or `kappa * R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterConvention {
    #[default]
    Spacing,
    SymbolRate,
}

impl CenterConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            CenterConvention::Spacing => "spacing",
            CenterConvention::SymbolRate => "symbol_rate",
        }
    }
}

impl FromStr for CenterConvention {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spacing" => Ok(CenterConvention::Spacing),
            "symbol_rate" | "symbol-rate" => Ok(CenterConvention::SymbolRate),
            other => Err(ConfigError::invariant(format!(
                "numerics: center_convention must be `spacing` or `symbol_rate`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for CenterConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_SAMPLES_PER_CYCLE: usize = 20;
pub const INTEGRAL_CHUNK_SIZE: usize = 1;
pub const CLOSED_FORM_CHUNK_SIZE: usize = 32;

/// Quadrature, kernel and scheduling settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericsPolicy<T> {
    /// Channel-local quadrature step, Hz.
    pub resolution: T,
    pub mu_method: MuMethod,
    /// Segment length of the segment kernel and upper bound on the integral
    /// kernel's step, km.
    pub delta_z: T,
    pub workers: usize,
    /// Islands per scheduled batch; `None` picks the method default.
    pub chunk_size: Option<usize>,
    pub samples_per_cycle: usize,
    pub center_convention: CenterConvention,
}

impl<T: Scalar> Default for NumericsPolicy<T> {
    fn default() -> Self {
        Self {
            resolution: T::lit(1e9),
            mu_method: MuMethod::Segment,
            delta_z: T::one(),
            workers: 1,
            chunk_size: None,
            samples_per_cycle: DEFAULT_SAMPLES_PER_CYCLE,
            center_convention: CenterConvention::Spacing,
        }
    }
}

impl<T: Scalar> NumericsPolicy<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.resolution > T::zero() && self.resolution.is_finite()) {
            return Err(ConfigError::invariant("numerics: resolution > 0"));
        }
        if !(self.delta_z > T::zero() && self.delta_z.is_finite()) {
            return Err(ConfigError::invariant("numerics: delta_z > 0"));
        }
        if self.workers < 1 {
            return Err(ConfigError::invariant("numerics: workers >= 1"));
        }
        if self.chunk_size == Some(0) {
            return Err(ConfigError::invariant("numerics: chunk_size >= 1"));
        }
        if self.samples_per_cycle < 2 {
            return Err(ConfigError::invariant("numerics: samples_per_cycle >= 2"));
        }
        Ok(())
    }

    /// Batch size actually used by the scheduler.
    pub fn effective_chunk_size(&self) -> usize {
        self.chunk_size.unwrap_or(match self.mu_method {
            MuMethod::Integral => INTEGRAL_CHUNK_SIZE,
            MuMethod::Maclaurin | MuMethod::Segment => CLOSED_FORM_CHUNK_SIZE,
        })
    }

    pub fn cast<U: Scalar>(&self) -> NumericsPolicy<U> {
        NumericsPolicy {
            resolution: cast(self.resolution),
            mu_method: self.mu_method,
            delta_z: cast(self.delta_z),
            workers: self.workers,
            chunk_size: self.chunk_size,
            samples_per_cycle: self.samples_per_cycle,
            center_convention: self.center_convention,
        }
    }
}

/// The single validated input object.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    pub spans: Vec<FiberSpan<T>>,
    pub grid: ChannelGrid<T>,
    pub modulation: ModulationFormat<T>,
    pub numerics: NumericsPolicy<T>,
}

impl<T: Scalar> SystemConfig<T> {
    pub fn new(
        spans: Vec<FiberSpan<T>>,
        grid: ChannelGrid<T>,
        modulation: ModulationFormat<T>,
        numerics: NumericsPolicy<T>,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            spans,
            grid,
            modulation,
            numerics,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.spans.is_empty() {
            return Err(ConfigError::invariant("at least one span is required"));
        }
        for span in &self.spans {
            span.validate()?;
        }
        self.numerics.validate()
    }

    /// Same system with the first span repeated `count` times.
    pub fn with_span_count(&self, count: usize) -> Self {
        let mut out = self.clone();
        out.spans = vec![self.spans[0]; count.max(1)];
        out
    }

    pub fn with_method(&self, method: MuMethod) -> Self {
        let mut out = self.clone();
        out.numerics.mu_method = method;
        out
    }

    pub fn cast<U: Scalar>(&self) -> SystemConfig<U> {
        SystemConfig {
            spans: self.spans.iter().map(FiberSpan::cast).collect(),
            grid: self.grid.cast(),
            modulation: self.modulation.cast(),
            numerics: self.numerics.cast(),
        }
    }
}
