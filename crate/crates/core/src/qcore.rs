//! Scalar plumbing and q-Pochhammer building blocks.
//!
//! Values are [`rug::Complex`] at the context precision. Non-integer powers
//! `q^x` are always `exp(x log q)` with the principal logarithm, so every
//! half-integer power in the crate shares one branch.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::{QError, Result};

/// Arbitrary-precision complex scalar used throughout the crate.
pub type HPComplex = Complex;

/// Smallest accepted working precision in bits.
pub const MIN_PRECISION: u32 = 64;

/// Default cap on the number of factors or terms of any truncated evaluation.
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// Number of nodes of the circle mean used by [`removable_limit`].
pub const LIMIT_NODES: u32 = 8;

/// Base `q`, working precision and truncation thresholds.
#[derive(Clone, Debug)]
pub struct QContext {
    q: Complex,
    log_q: Option<Complex>,
    precision_bits: u32,
    product_tol: Float,
    series_tol: Float,
    max_terms: usize,
}

impl QContext {
    /// Context with default tolerances `2^(8-P)` for both products and series.
    pub fn new(q: &Complex, precision_bits: u32) -> Result<Self> {
        if precision_bits < MIN_PRECISION {
            return Err(QError::InvalidInput(format!(
                "precision {precision_bits} bits is below the minimum of {MIN_PRECISION}"
            )));
        }
        let q = Complex::with_val(precision_bits, q);
        if mag(&q) >= 1 {
            return Err(QError::InvalidInput("base must satisfy |q| < 1".into()));
        }
        let log_q = if q.is_zero() {
            None
        } else {
            Some(q.clone().ln())
        };
        let tol = pow2(precision_bits, 8 - precision_bits as i32);
        Ok(Self {
            q,
            log_q,
            precision_bits,
            product_tol: tol.clone(),
            series_tol: tol,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    /// Context for a base given by its real and imaginary parts.
    pub fn from_parts(re: f64, im: f64, precision_bits: u32) -> Result<Self> {
        Self::new(
            &Complex::with_val(precision_bits.max(MIN_PRECISION), (re, im)),
            precision_bits,
        )
    }

    /// Replace both truncation thresholds; each must be at least `2^(8-P)`.
    pub fn with_tolerances(mut self, product_tol: &Float, series_tol: &Float) -> Result<Self> {
        let floor = self.min_tolerance();
        if *product_tol < floor || *series_tol < floor {
            return Err(QError::InvalidInput(
                "tolerances must be at least 2^(8 - precision_bits)".into(),
            ));
        }
        self.product_tol = Float::with_val(self.precision_bits, product_tol);
        self.series_tol = Float::with_val(self.precision_bits, series_tol);
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    /// Same base at another precision, tolerances reset to the defaults there.
    pub fn with_precision(&self, precision_bits: u32) -> Self {
        let mut ctx = Self::new(&self.q, precision_bits).expect("base already validated");
        ctx.max_terms = self.max_terms;
        ctx
    }

    /// Same precision and tolerances with a different base.
    pub fn with_base(&self, base: &Complex) -> Result<Self> {
        let mut ctx = Self::new(base, self.precision_bits)?;
        ctx.product_tol = self.product_tol.clone();
        ctx.series_tol = self.series_tol.clone();
        ctx.max_terms = self.max_terms;
        Ok(ctx)
    }

    pub fn q(&self) -> &Complex {
        &self.q
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn product_tol(&self) -> &Float {
        &self.product_tol
    }

    pub fn series_tol(&self) -> &Float {
        &self.series_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `2^(8-P)`, the smallest admissible truncation threshold.
    pub fn min_tolerance(&self) -> Float {
        pow2(self.precision_bits, 8 - self.precision_bits as i32)
    }

    /// Modulus below which a computed factor `1 - x` counts as an exact zero.
    pub fn zero_tol(&self) -> Float {
        pow2(self.precision_bits, 24 - self.precision_bits as i32)
    }

    /// Principal `log q`.
    pub fn log_q(&self) -> Result<&Complex> {
        self.log_q
            .as_ref()
            .ok_or_else(|| QError::InvalidInput("log q undefined for q = 0".into()))
    }

    pub fn num(&self, re: f64, im: f64) -> Complex {
        Complex::with_val(self.precision_bits, (re, im))
    }

    pub fn real(&self, x: f64) -> Complex {
        Complex::with_val(self.precision_bits, (x, 0.0))
    }

    pub fn zero(&self) -> Complex {
        Complex::new(self.precision_bits)
    }

    pub fn one(&self) -> Complex {
        Complex::with_val(self.precision_bits, 1)
    }

    /// Round (or extend) a value to the context precision.
    pub fn lift(&self, z: &Complex) -> Complex {
        Complex::with_val(self.precision_bits, z)
    }

    /// `q^x = exp(x log q)` for complex `x`.
    pub fn pow(&self, x: &Complex) -> Result<Complex> {
        let l = self.log_q()?;
        Ok((self.lift(x) * l).exp())
    }

    /// `q^x` for a real exponent given as `f64` (exact for dyadic values).
    pub fn pow_f64(&self, x: f64) -> Result<Complex> {
        self.pow(&self.real(x))
    }

    /// Integer power of `q`.
    pub fn powi(&self, n: i64) -> Complex {
        let n = i32::try_from(n).expect("exponent fits in i32");
        self.q.clone().pow(n)
    }
}

/// Modulus of a complex value as a float at the value's precision.
pub fn mag(z: &Complex) -> Float {
    let (pr, pi) = z.prec();
    Float::with_val(pr.max(pi), z.abs_ref())
}

/// `2^e` as a float of the given precision.
pub fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, Float::i_exp(1, e))
}

/// Integer power `z^n`.
pub fn ipow(z: &Complex, n: i32) -> Complex {
    z.clone().pow(n)
}

/// `1 - z`.
pub fn one_minus(z: &Complex) -> Complex {
    let mut r = -z.clone();
    r += 1;
    r
}

/// Product of a slice of values at the context precision.
pub fn product(ctx: &QContext, xs: &[Complex]) -> Complex {
    xs.iter().fold(ctx.one(), |acc, x| acc * x)
}

/// A truncated infinite product with its bookkeeping.
#[derive(Clone, Debug)]
pub struct Truncated {
    pub value: Complex,
    /// Number of factors multiplied.
    pub terms: usize,
    /// Estimate of the relative truncation error, `|x q^m| / (1 - |q|)`.
    pub error_bound: Float,
    /// Factors whose modulus fell below [`QContext::zero_tol`].
    pub zero_factors: usize,
}

/// `(x; q)_n`, the product of `1 - x q^k` for `0 <= k < n`.
pub fn qpoch_finite(x: &Complex, ctx: &QContext, n: usize) -> Complex {
    let mut value = ctx.one();
    let mut t = ctx.lift(x);
    for _ in 0..n {
        value *= one_minus(&t);
        t *= ctx.q();
    }
    value
}

/// `(x; q)_inf`, truncated at the first `m >= 8` with `|x q^m| < product_tol`.
pub fn qpoch_infinite(x: &Complex, ctx: &QContext) -> Result<Truncated> {
    product_in_base(x, ctx.q(), ctx)
}

/// Product of `qpoch_infinite` over a list; the empty list gives 1.
pub fn qpoch_multi(xs: &[Complex], ctx: &QContext) -> Result<Truncated> {
    let mut acc = Truncated {
        value: ctx.one(),
        terms: 0,
        error_bound: Float::new(ctx.precision_bits()),
        zero_factors: 0,
    };
    for x in xs {
        let p = qpoch_infinite(x, ctx)?;
        acc.value *= &p.value;
        acc.terms += p.terms;
        acc.error_bound += &p.error_bound;
        acc.zero_factors += p.zero_factors;
    }
    Ok(acc)
}

/// `1/G(x) = prod_{m>=0} (1 - x q^(2m+1)) = (xq; q^2)_inf`.
pub fn g_inverse(x: &Complex, ctx: &QContext) -> Result<Truncated> {
    let base = Complex::with_val(ctx.precision_bits(), ctx.q().square_ref());
    let start = ctx.lift(x) * ctx.q();
    product_in_base(&start, &base, ctx)
}

fn product_in_base(x: &Complex, base: &Complex, ctx: &QContext) -> Result<Truncated> {
    let zero_tol = ctx.zero_tol();
    let mut value = ctx.one();
    let mut t = ctx.lift(x);
    let mut zero_factors = 0;
    let mut m = 0usize;
    loop {
        let tm = mag(&t);
        if m >= 8 && tm < *ctx.product_tol() {
            let denom = Float::with_val(ctx.precision_bits(), 1) - mag(base);
            return Ok(Truncated {
                value,
                terms: m,
                error_bound: tm / denom,
                zero_factors,
            });
        }
        if m >= ctx.max_terms() {
            return Err(QError::NonConvergence {
                what: "infinite product".into(),
                terms: m,
            });
        }
        let factor = one_minus(&t);
        if mag(&factor) < zero_tol {
            zero_factors += 1;
        }
        value *= factor;
        t *= base;
        m += 1;
    }
}

/// Value at `center` of a function with a removable singularity there.
///
/// The function is sampled on a circle of radius `2^-(P/2+16)` at
/// `2P + 64` bits and averaged (trapezoidal Cauchy mean). The coefficient of
/// `1/(z - center)` is estimated from the same samples; a non-negligible one
/// means a genuine pole and is reported as an error.
pub fn removable_limit<F>(ctx: &QContext, center: &Complex, f: F) -> Result<Complex>
where
    F: Fn(&QContext, &Complex) -> Result<Complex>,
{
    let p = ctx.precision_bits();
    let guard = ctx.with_precision(2 * p + 64);
    let gp = guard.precision_bits();
    let radius = pow2(gp, -((p / 2) as i32 + 16));
    let pi = Float::with_val(gp, Constant::Pi);
    let center = guard.lift(center);
    let mut c0 = guard.zero();
    let mut residue = guard.zero();
    let mut vmax = Float::new(gp);
    for k in 0..LIMIT_NODES {
        let theta = Float::with_val(gp, &pi * (2 * k)) / LIMIT_NODES;
        let (sin, cos) = theta.sin_cos(Float::new(gp));
        let w = Complex::with_val(gp, (cos, sin)) * &radius;
        let v = f(&guard, &(center.clone() + &w))?;
        let vm = mag(&v);
        if vm > vmax {
            vmax = vm;
        }
        residue += v.clone() * &w;
        c0 += v;
    }
    c0 /= LIMIT_NODES;
    residue /= LIMIT_NODES;
    let floor = vmax * pow2(gp, -((p / 2) as i32));
    let scale = if mag(&c0) > floor { mag(&c0) } else { floor };
    if mag(&residue) > radius * scale {
        return Err(QError::Pole(
            "limit point is a pole, not a removable singularity".into(),
        ));
    }
    Ok(ctx.lift(&c0))
}
