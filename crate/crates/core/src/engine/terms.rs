//! D/E/F/G/H quadrature of one island.
//!
//! The three channel-local variables `f1`, `f2`, `f` run over the same
//! midpoint grid. `Y` is evaluated once per grid cell and cached; each term is
//! then a weighted reduction of that cache. The rectangular constraint on the
//! idler `f1 + f2 - f - l * shift` is applied as the exact fraction of each
//! cell that satisfies it, which depends only on `i + j - k`.

use num_complex::Complex;

use crate::error::NumericError;
use crate::link::LinkModel;
use crate::quadrature::ChannelGridRule;
use crate::scalar::Scalar;

use super::island::Island;

/// Rectangular unit-energy spectrum: `1 / sqrt(R)` inside `[-R/2, R/2]`.
pub fn spectral_shape<T: Scalar>(f: T, r: T) -> T {
    if f.abs() <= r / T::lit(2.0) {
        T::one() / r.sqrt()
    } else {
        T::zero()
    }
}

/// Grid and channel geometry shared by every island of a run.
#[derive(Debug, Clone)]
pub struct TermSetup<T> {
    pub rule: ChannelGridRule<T>,
    /// Distance between adjacent channel centers, Hz.
    pub shift: T,
}

impl<T: Scalar> TermSetup<T> {
    pub fn new(symbol_rate: T, resolution: T, shift: T) -> Result<Self, NumericError> {
        Ok(Self {
            rule: ChannelGridRule::new(symbol_rate, resolution)?,
            shift,
        })
    }

    pub fn symbol_rate(&self) -> T {
        self.rule.width
    }
}

/// Which correction terms an island needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TermMask {
    pub e: bool,
    pub f: bool,
    pub g: bool,
    pub h: bool,
}

impl TermMask {
    pub const NONE: TermMask = TermMask {
        e: false,
        f: false,
        g: false,
        h: false,
    };
    pub const ALL: TermMask = TermMask {
        e: true,
        f: true,
        g: true,
        h: true,
    };
}

/// Term values of one island; corrections that were not requested are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslandTerms<T> {
    pub d: T,
    pub e: Option<T>,
    pub f: Option<T>,
    pub g: Option<Complex<T>>,
    pub h: Option<T>,
}

/// Cached `Y` over the `n^3` cells of one island.
#[derive(Debug, Clone)]
pub struct IslandField<T> {
    n: usize,
    step: T,
    r: T,
    /// Constraint fraction per idler index `i + j - k + n - 1`.
    weights: Vec<T>,
    /// `Y` at `(k, i, j)` = `(f, f1, f2)` cell, zero where the weight is zero.
    y: Vec<Complex<T>>,
}

impl<T: Scalar> IslandField<T> {
    pub fn new<L: LinkModel<T>>(
        link: &L,
        setup: &TermSetup<T>,
        coi: i32,
        island: &Island,
    ) -> Result<Self, NumericError> {
        let rule = &setup.rule;
        let n = rule.len();
        let h = rule.step;
        let r = rule.width;
        let half = r / T::lit(2.0);
        let lit = |v: i32| T::lit(v as f64);
        let l_shift = lit(island.l) * setup.shift;
        let weights: Vec<T> = (0..3 * n - 2)
            .map(|d| {
                let offset = -half + (T::from_count(d) - T::from_count(n - 1) + T::lit(0.5)) * h;
                rule.cut_cell_weight(offset - l_shift)
            })
            .collect();

        let c1 = lit(island.kappa1) * setup.shift;
        let c2 = lit(island.kappa2) * setup.shift;
        let c = lit(coi) * setup.shift;
        let c4 = lit(island.kappa1 + island.kappa2 - coi) * setup.shift;
        let mut y = vec![Complex::new(T::zero(), T::zero()); n * n * n];
        for (d, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let offset = -half + (T::from_count(d) - T::from_count(n - 1) + T::lit(0.5)) * h;
            let idler = link.prepare(c4 + offset);
            // cells with i + j - k = d - (n - 1)
            for k in 0..n {
                for i in 0..n {
                    let j = d as isize - (n as isize - 1) + k as isize - i as isize;
                    if j < 0 || j >= n as isize {
                        continue;
                    }
                    let j = j as usize;
                    let v = link.y(&idler, c1 + rule.nodes[i], c2 + rule.nodes[j], c + rule.nodes[k])?;
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(NumericError::NonFinite {
                            what: "link function",
                            value: v.norm().as_f64(),
                            z_km: f64::NAN,
                            f_hz: (c + rule.nodes[k]).as_f64(),
                        });
                    }
                    y[(k * n + i) * n + j] = v;
                }
            }
        }
        Ok(Self {
            n,
            step: h,
            r,
            weights,
            y,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn weight(&self, i: usize, j: usize, k: usize) -> T {
        self.weights[i + j + self.n - 1 - k]
    }

    #[inline]
    fn at(&self, k: usize, i: usize, j: usize) -> Complex<T> {
        self.y[(k * self.n + i) * self.n + j]
    }

    /// GN term: `16/27 R^2 * iiint |S1|^2 |S2|^2 |S4|^2 |Y|^2`.
    pub fn d(&self) -> T {
        let n = self.n;
        let mut sum = T::zero();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let w = self.weight(i, j, k);
                    if w > T::zero() {
                        sum = sum + w * self.at(k, i, j).norm_sqr();
                    }
                }
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(16.0 / 27.0) * (sum * u * u * u) * r * r
    }

    /// `16/27 R * iint df df2 |S(f2)|^2 |B(f, f2)|^2`, with
    /// `B = int df1 S(f1) S*(f4) Y`.
    pub fn e(&self) -> T {
        let n = self.n;
        let mut sum = T::zero();
        for k in 0..n {
            for j in 0..n {
                let mut b = Complex::new(T::zero(), T::zero());
                for i in 0..n {
                    b = b + self.at(k, i, j) * self.weight(i, j, k);
                }
                sum = sum + b.norm_sqr();
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(16.0 / 27.0) * (sum * u * u * u * u) * r * r
    }

    /// `32/81 R * iint df df1 |S(f1)|^2 |C(f, f1)|^2`, with
    /// `C = int df2 S(f2) S*(f4) Y`.
    pub fn f(&self) -> T {
        let n = self.n;
        let mut sum = T::zero();
        for k in 0..n {
            for i in 0..n {
                let mut c = Complex::new(T::zero(), T::zero());
                for j in 0..n {
                    c = c + self.at(k, i, j) * self.weight(i, j, k);
                }
                sum = sum + c.norm_sqr();
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(32.0 / 81.0) * (sum * u * u * u * u) * r * r
    }

    /// `16/81 R * int df iiint S(f1) S(f2) S*(f1') S*(f1 + f2 - f1') |S(f4)|^2
    /// Y(f1, f2, f) Y*(f1', f1 + f2 - f1', f)`, summed directly over all four
    /// grid variables.
    pub fn g(&self) -> Complex<T> {
        let n = self.n;
        let mut sum = Complex::new(T::zero(), T::zero());
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let w = self.weight(i, j, k);
                    if w == T::zero() {
                        continue;
                    }
                    let s = i + j;
                    let mut inner = Complex::new(T::zero(), T::zero());
                    for ip in s.saturating_sub(n - 1)..=s.min(n - 1) {
                        inner = inner + self.at(k, ip, s - ip).conj();
                    }
                    sum = sum + self.at(k, i, j) * inner * w;
                }
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        let scale = T::lit(16.0 / 81.0) * (u * u * u * u) * r;
        sum * scale
    }

    /// Same value as [`g`](Self::g) grouped by `f1 + f2`, where it becomes a
    /// sum of squared magnitudes.
    pub fn g_factorized(&self) -> T {
        let n = self.n;
        let mut sum = T::zero();
        for k in 0..n {
            for s in 0..2 * n - 1 {
                let mut a = Complex::new(T::zero(), T::zero());
                for i in s.saturating_sub(n - 1)..=s.min(n - 1) {
                    a = a + self.at(k, i, s - i);
                }
                // i + j - k is fixed by s, so is the weight
                let w = self.weights[s + n - 1 - k];
                sum = sum + w * a.norm_sqr();
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(16.0 / 81.0) * (sum * u * u * u * u) * r
    }

    /// `16/81 * int df |W(f)|^2`, with `W = iint S(f1) S(f2) S*(f4) Y`.
    pub fn h(&self) -> T {
        let n = self.n;
        let mut sum = T::zero();
        for k in 0..n {
            let mut wsum = Complex::new(T::zero(), T::zero());
            for i in 0..n {
                for j in 0..n {
                    wsum = wsum + self.at(k, i, j) * self.weight(i, j, k);
                }
            }
            sum = sum + wsum.norm_sqr();
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(16.0 / 81.0) * (sum * u * u * u * u * u) * r * r
    }

    /// [`e`](Self::e) as the unfactorized nested sum over `f, f2, f1, f1'`.
    pub fn e_direct(&self) -> T {
        let n = self.n;
        let mut sum = Complex::new(T::zero(), T::zero());
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for ip in 0..n {
                        let w = self.weight(i, j, k) * self.weight(ip, j, k);
                        sum = sum + self.at(k, i, j) * self.at(k, ip, j).conj() * w;
                    }
                }
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(16.0 / 27.0) * (sum.re * u * u * u * u) * r * r
    }

    /// [`f`](Self::f) as the unfactorized nested sum over `f, f1, f2, f2'`.
    pub fn f_direct(&self) -> T {
        let n = self.n;
        let mut sum = Complex::new(T::zero(), T::zero());
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for jp in 0..n {
                        let w = self.weight(i, j, k) * self.weight(i, jp, k);
                        sum = sum + self.at(k, i, j) * self.at(k, i, jp).conj() * w;
                    }
                }
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(32.0 / 81.0) * (sum.re * u * u * u * u) * r * r
    }

    /// [`h`](Self::h) as the unfactorized nested sum over five variables.
    pub fn h_direct(&self) -> T {
        let n = self.n;
        let mut sum = Complex::new(T::zero(), T::zero());
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for ip in 0..n {
                        for jp in 0..n {
                            let w = self.weight(i, j, k) * self.weight(ip, jp, k);
                            sum = sum + self.at(k, i, j) * self.at(k, ip, jp).conj() * w;
                        }
                    }
                }
            }
        }
        let (u, r) = (self.step / self.r, self.r);
        T::lit(16.0 / 81.0) * (sum.re * u * u * u * u * u) * r * r
    }

    pub fn terms(&self, mask: TermMask) -> IslandTerms<T> {
        IslandTerms {
            d: self.d(),
            e: mask.e.then(|| self.e()),
            f: mask.f.then(|| self.f()),
            g: mask.g.then(|| self.g()),
            h: mask.h.then(|| self.h()),
        }
    }
}

/// Unit-link D term of an island, the quadrature-only part of the model.
pub fn unit_link_d<T: Scalar>(setup: &TermSetup<T>, l: i32) -> Result<T, NumericError> {
    let island = Island {
        kappa1: 0,
        kappa2: 0,
        l,
        class: super::island::classify_island(0, 0, l, 0),
    };
    Ok(IslandField::new(&crate::link::UnitLink, setup, 0, &island)?.d())
}
