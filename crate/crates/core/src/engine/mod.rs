//! Per-channel NLI variance from the island decomposition of the EGN model.

mod island;
mod terms;

pub use island::{classify_island, enumerate_islands, Island, NliClass};
pub use terms::{spectral_shape, unit_link_d, IslandField, IslandTerms, TermMask, TermSetup};

use std::time::Instant;

use num_complex::Complex;

use crate::config::SystemConfig;
use crate::error::{EngineError, NumericError};
use crate::fwm::MuMethod;
use crate::link::LinkFunction;
use crate::parallel::run_islands;
use crate::scalar::Scalar;
use crate::units::linear_to_db;

/// Weighted contributions of each term, summed over islands.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TermBreakdown<T> {
    pub d: T,
    pub e: T,
    pub f: T,
    pub g: T,
    pub h: T,
}

/// NLI result for one channel of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct NliReport<T> {
    pub coi: i32,
    /// Channel center relative to the band center, Hz.
    pub f_center: T,
    pub method: MuMethod,
    pub sigma2_nli: T,
    /// Imaginary part left over from the complex G term.
    pub imag_residue: T,
    /// `sigma2_nli / P_coi^3`.
    pub eta: T,
    pub eta_db: T,
    pub terms: TermBreakdown<T>,
    /// Contribution per [`NliClass`], indexed by [`NliClass::index`].
    pub class_sigma2: [T; 3],
    pub class_islands: [usize; 3],
    pub island_count: usize,
    pub wall_time_s: f64,
}

impl<T: Scalar> NliReport<T> {
    /// Class share of `eta` in dB, `None` if the class has no islands.
    pub fn class_eta_db(&self, class: NliClass, p_coi: T) -> Option<T> {
        let i = class.index();
        if self.class_islands[i] == 0 || !(self.class_sigma2[i] > T::zero()) {
            return None;
        }
        Some(linear_to_db(self.class_sigma2[i] / (p_coi * p_coi * p_coi)))
    }
}

/// Result of one island: its term values and weighted contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslandContribution<T> {
    pub island: Island,
    pub terms: IslandTerms<T>,
    pub value: Complex<T>,
    pub breakdown: TermBreakdown<T>,
}

/// Evaluates NLI variances for one validated configuration.
#[derive(Debug, Clone)]
pub struct NliEngine<T> {
    config: SystemConfig<T>,
    link: LinkFunction<T>,
    setup: TermSetup<T>,
}

impl<T: Scalar> NliEngine<T> {
    pub fn new(config: SystemConfig<T>) -> Result<Self, EngineError> {
        config.validate()?;
        let link = LinkFunction::from_config(&config)?;
        let setup = TermSetup::new(
            config.grid.symbol_rate(),
            config.numerics.resolution,
            config.grid.center_shift(config.numerics.center_convention),
        )?;
        Ok(Self { config, link, setup })
    }

    pub fn config(&self) -> &SystemConfig<T> {
        &self.config
    }

    pub fn link(&self) -> &LinkFunction<T> {
        &self.link
    }

    pub fn setup(&self) -> &TermSetup<T> {
        &self.setup
    }

    pub fn islands(&self, coi: i32) -> Result<Vec<Island>, EngineError> {
        let m = self.config.grid.m();
        if coi.abs() > m {
            return Err(EngineError::InvalidCoi { coi, m });
        }
        Ok(enumerate_islands(m, coi))
    }

    /// Correction terms required by the Kronecker gates and format weights.
    pub fn mask(&self, coi: i32, island: &Island) -> TermMask {
        let phi = self.config.modulation.phi() != T::zero();
        let psi = self.config.modulation.psi() != T::zero();
        let k4 = island.kappa4(coi);
        TermMask {
            e: phi && island.kappa1 == k4,
            f: phi && island.kappa2 == k4,
            g: phi && island.kappa1 == island.kappa2,
            h: psi && island.kappa1 == island.kappa2 && island.kappa2 == k4,
        }
    }

    /// Terms and weighted contribution of a single island.
    pub fn island_contribution(&self, coi: i32, island: &Island) -> Result<IslandContribution<T>, NumericError> {
        let field = IslandField::new(&self.link, &self.setup, coi, island)?;
        let terms = field.terms(self.mask(coi, island));
        let grid = &self.config.grid;
        let ppp = grid.power(island.kappa1) * grid.power(island.kappa2) * grid.power(island.kappa4(coi));
        let phi = self.config.modulation.phi();
        let psi = self.config.modulation.psi();

        let mut breakdown = TermBreakdown {
            d: ppp * terms.d,
            ..TermBreakdown::default()
        };
        let mut value = Complex::new(breakdown.d, T::zero());
        if let Some(e) = terms.e {
            breakdown.e = ppp * phi * e;
            value.re = value.re + breakdown.e;
        }
        if let Some(f) = terms.f {
            breakdown.f = ppp * phi * f;
            value.re = value.re + breakdown.f;
        }
        if let Some(g) = terms.g {
            let g = g * (ppp * phi);
            breakdown.g = g.re;
            value = value + g;
        }
        if let Some(h) = terms.h {
            breakdown.h = ppp * psi * h;
            value.re = value.re + breakdown.h;
        }
        Ok(IslandContribution {
            island: *island,
            terms,
            value,
            breakdown,
        })
    }

    /// All island contributions of `coi`, in canonical island order.
    pub fn contributions(&self, coi: i32) -> Result<Vec<IslandContribution<T>>, EngineError> {
        let islands = self.islands(coi)?;
        let n = &self.config.numerics;
        let run = run_islands(&islands, n.workers, n.effective_chunk_size(), |isl| {
            self.island_contribution(coi, isl)
        })
        .map_err(|(i, source)| EngineError::Island {
            coi,
            kappa1: islands[i].kappa1,
            kappa2: islands[i].kappa2,
            l: islands[i].l,
            source,
        })?;
        Ok(run.results)
    }

    /// NLI variance and `eta` of channel `coi`.
    pub fn nli_variance(&self, coi: i32) -> Result<NliReport<T>, EngineError> {
        let start = Instant::now();
        let contributions = self.contributions(coi)?;
        let mut report = self.reduce(coi, &contributions);
        report.wall_time_s = start.elapsed().as_secs_f64();
        Ok(report)
    }

    /// Sums island contributions in the given (canonical) order.
    pub fn reduce(&self, coi: i32, contributions: &[IslandContribution<T>]) -> NliReport<T> {
        let mut sigma2 = T::zero();
        let mut imag = T::zero();
        let mut terms = TermBreakdown::default();
        let mut class_sigma2 = [T::zero(); 3];
        let mut class_islands = [0usize; 3];
        for c in contributions {
            sigma2 = sigma2 + c.value.re;
            imag = imag + c.value.im;
            terms.d = terms.d + c.breakdown.d;
            terms.e = terms.e + c.breakdown.e;
            terms.f = terms.f + c.breakdown.f;
            terms.g = terms.g + c.breakdown.g;
            terms.h = terms.h + c.breakdown.h;
            let k = c.island.class.index();
            class_sigma2[k] = class_sigma2[k] + c.value.re;
            class_islands[k] += 1;
        }
        let p = self.config.grid.power(coi);
        let eta = sigma2 / (p * p * p);
        NliReport {
            coi,
            f_center: self
                .config
                .grid
                .center_frequency(coi, self.config.numerics.center_convention),
            method: self.config.numerics.mu_method,
            sigma2_nli: sigma2,
            imag_residue: imag,
            eta,
            eta_db: linear_to_db(eta),
            terms,
            class_sigma2,
            class_islands,
            island_count: contributions.len(),
            wall_time_s: 0.0,
        }
    }

    pub fn evaluate(&self, cois: &[i32]) -> Result<Vec<NliReport<T>>, EngineError> {
        cois.iter().map(|&c| self.nli_variance(c)).collect()
    }

    /// Every channel of the grid, from `-M` upward.
    pub fn evaluate_all(&self) -> Result<Vec<NliReport<T>>, EngineError> {
        let cois: Vec<i32> = self.config.grid.indices().collect();
        self.evaluate(&cois)
    }
}
