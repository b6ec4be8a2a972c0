//! Small quadrature toolkit: Gauss-Legendre rules, midpoint channel grids with
//! cut-cell weights, and compensated complex summation.

use num_complex::Complex;

use crate::error::NumericError;
use crate::scalar::Scalar;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Builds an `n`-point rule by Newton iteration on `P_n` (in `f64`).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates a real function over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<T>()
            * half
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Kahan-Babuska compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: Complex<T>,
    carry: Complex<T>,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: Complex::new(T::zero(), T::zero()),
            carry: Complex::new(T::zero(), T::zero()),
        }
    }

    #[inline]
    pub fn add(&mut self, v: Complex<T>) {
        let (re, cr) = neumaier(self.sum.re, v.re);
        let (im, ci) = neumaier(self.sum.im, v.im);
        self.sum = Complex::new(re, im);
        self.carry = self.carry + Complex::new(cr, ci);
    }

    pub fn value(&self) -> Complex<T> {
        self.sum + self.carry
    }
}

#[inline]
fn neumaier<T: Scalar>(sum: T, v: T) -> (T, T) {
    let t = sum + v;
    let c = if sum.abs() >= v.abs() {
        (sum - t) + v
    } else {
        (v - t) + sum
    };
    (t, c)
}

/// Uniform midpoint grid over one channel, `[-R/2, R/2]`, with bin-centered
/// nodes.
#[derive(Debug, Clone)]
pub struct ChannelGridRule<T> {
    /// Channel width `R` (integration interval length), Hz.
    pub width: T,
    /// Bin width, Hz.
    pub step: T,
    /// Bin centers, ascending.
    pub nodes: Vec<T>,
}

impl<T: Scalar> ChannelGridRule<T> {
    /// Grid with the smallest bin count whose step does not exceed
    /// `resolution`.
    pub fn new(width: T, resolution: T) -> Result<Self, NumericError> {
        if !(width > T::zero()) || !(resolution > T::zero()) {
            return Err(NumericError::InvalidArgument(
                "channel width and resolution must be positive".into(),
            ));
        }
        let ratio = (width / resolution).as_f64();
        // tolerate representation noise such as 10e9 / 1e9
        let n = (ratio - 1e-9).ceil().max(1.0) as usize;
        Self::with_points(width, n)
    }

    pub fn with_points(width: T, n: usize) -> Result<Self, NumericError> {
        if n < 2 {
            return Err(NumericError::GridTooCoarse { points: n });
        }
        let step = width / T::from_count(n);
        let half = width / T::lit(2.0);
        let nodes = (0..n)
            .map(|i| -half + (T::from_count(i) + T::lit(0.5)) * step)
            .collect();
        Ok(Self { width, step, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fraction of the cube cell centered at a point whose derived frequency
    /// `f1 + f2 - f - shift` has center `center` that falls inside the
    /// channel `[-R/2, R/2]`.
    ///
    /// Over the cell the derived frequency is `center + u1 + u2 - u3` with
    /// independent `u_i ~ U(-h/2, h/2)`, so the fraction is a difference of
    /// Irwin-Hall (n = 3) distribution functions.
    pub fn cut_cell_weight(&self, center: T) -> T {
        let half = self.width / T::lit(2.0);
        irwin_hall3_cdf((half - center) / self.step) - irwin_hall3_cdf((-half - center) / self.step)
    }
}

/// CDF of the sum of three independent `U(-1/2, 1/2)` variables.
pub fn irwin_hall3_cdf<T: Scalar>(t: T) -> T {
    let s = t + T::lit(1.5);
    let six = T::lit(6.0);
    if s <= T::zero() {
        T::zero()
    } else if s < T::one() {
        s * s * s / six
    } else if s < T::lit(2.0) {
        (T::lit(-2.0) * s * s * s + T::lit(9.0) * s * s - T::lit(9.0) * s + T::lit(3.0)) / six
    } else if s < T::lit(3.0) {
        let r = T::lit(3.0) - s;
        T::one() - r * r * r / six
    } else {
        T::one()
    }
}
