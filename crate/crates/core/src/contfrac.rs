//! Continued fractions and the closed forms of their values.
//!
//! [`eval_cf`] computes convergents of `leading / (d0 -+ n1/(d1 -+ n2/(d2 -+ ...)))`
//! by the forward three-term recurrences. The remaining items build the
//! specific fractions attached to the recurrence of [`crate::recurrence`]
//! and evaluate their closed forms as ratios of series and infinite products.

use rug::{Complex, Float};

use crate::hyperq::{
    eval_10phi9, eval_phi_generic, eval_w, eval_wtilde, PhiSpec, Vwp10phi9Instance,
};
use crate::qcore::{
    g_inverse, mag, one_minus, pow2, product, qpoch_infinite, qpoch_multi, QContext,
};
use crate::recurrence::{LimitPath, RecurrenceInstance};
use crate::{QError, Result};

/// Depth cap of the adaptive evaluation.
pub const MAX_DEPTH: usize = 200;

/// Depth below which the adaptive evaluation never stops.
pub const MIN_DEPTH: usize = 4;

/// Sign joining the partial fractions after the leading level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfSign {
    /// `d0 - n1/(d1 - n2/(d2 - ...))`
    Minus,
    /// `d0 + n1/(d1 + n2/(d2 + ...))`
    Plus,
}

/// A coefficient sequence indexed from 0 (denominators) or 1 (numerators).
pub type Coeff<'a> = Box<dyn Fn(usize) -> Result<Complex> + 'a>;

/// `leading / (d0 -+ n1/(d1 -+ ...))`.
pub struct CfSpec<'a> {
    pub leading: Complex,
    pub partial_num: Coeff<'a>,
    pub partial_den: Coeff<'a>,
    pub sign: CfSign,
    /// Number of denominators when the fraction terminates.
    pub terminating_depth: Option<usize>,
}

/// A convergent together with its change from the previous one.
#[derive(Clone, Debug)]
pub struct CfValue {
    pub value: Complex,
    /// `|v_N - v_(N-1)| / |v_N|`; infinite at depth 1.
    pub delta: Float,
    /// Number of denominators used.
    pub depth: usize,
}

/// Stopping threshold of the adaptive evaluation: `2^-(max(P - 139, P/2 - 11))`.
///
/// At 256 bits this is about `6.0e-36`; it tightens with precision so that
/// doubling the precision also deepens every continued fraction.
pub fn default_tolerance(bits: u32) -> Float {
    let e = (bits as i32 - 139).max(bits as i32 / 2 - 11);
    pow2(bits, -e)
}

/// The `depth`-th convergent, using denominators `d0 .. d_(depth-1)`.
pub fn eval_cf(spec: &CfSpec<'_>, depth: usize, ctx: &QContext) -> Result<CfValue> {
    if depth == 0 {
        return Err(QError::InvalidInput(
            "continued fraction depth must be at least 1".into(),
        ));
    }
    run(spec, ctx, depth, None)
}

/// Convergents until the relative change drops below `tol`, the fraction
/// terminates, or `max_depth` is reached.
pub fn eval_cf_adaptive(
    spec: &CfSpec<'_>,
    ctx: &QContext,
    tol: &Float,
    max_depth: usize,
) -> Result<CfValue> {
    run(spec, ctx, max_depth.max(1), Some(tol))
}

/// [`eval_cf_adaptive`] with [`default_tolerance`] and [`MAX_DEPTH`].
pub fn eval_cf_default(spec: &CfSpec<'_>, ctx: &QContext) -> Result<CfValue> {
    eval_cf_adaptive(
        spec,
        ctx,
        &default_tolerance(ctx.precision_bits()),
        MAX_DEPTH,
    )
}

fn run(
    spec: &CfSpec<'_>,
    ctx: &QContext,
    max_depth: usize,
    tol: Option<&Float>,
) -> Result<CfValue> {
    let bits = ctx.precision_bits();
    let max_depth = spec
        .terminating_depth
        .map_or(max_depth, |t| t.min(max_depth));
    let big = pow2(bits, 256);
    let small = pow2(bits, -256);
    let leading = ctx.lift(&spec.leading);
    let ratio = |p: &Complex, q: &Complex| -> Option<Complex> {
        if p.is_zero() {
            None
        } else {
            Some(leading.clone() * q / p)
        }
    };
    let (mut p_prev, mut p) = (ctx.one(), ctx.lift(&(spec.partial_den)(0)?));
    let (mut q_prev, mut q) = (ctx.zero(), ctx.one());
    let mut value = ratio(&p, &q);
    let mut delta = Float::with_val(bits, rug::float::Special::Infinity);
    let mut depth = 1;
    while depth < max_depth {
        let mut n = ctx.lift(&(spec.partial_num)(depth)?);
        if spec.sign == CfSign::Minus {
            n = -n;
        }
        let d = (spec.partial_den)(depth)?;
        let p_next = d.clone() * &p + n.clone() * &p_prev;
        let q_next = d * &q + n * &q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        depth += 1;
        let pm = mag(&p);
        if !p.is_zero() && (pm > big || pm < small) {
            let scale = Float::with_val(bits, 1) / pm;
            p *= &scale;
            q *= &scale;
            p_prev *= &scale;
            q_prev *= &scale;
        }
        let next = ratio(&p, &q);
        delta = match (&value, &next) {
            (Some(v0), Some(v1)) if !v1.is_zero() => mag(&(v1.clone() - v0)) / mag(v1),
            (Some(v0), Some(v1)) if v0.is_zero() && v1.is_zero() => Float::new(bits),
            _ => Float::with_val(bits, rug::float::Special::Infinity),
        };
        value = next;
        if let Some(t) = tol {
            if depth >= MIN_DEPTH && delta < *t {
                break;
            }
        }
    }
    match value {
        Some(v) if v.real().is_finite() && v.imag().is_finite() => Ok(CfValue {
            value: v,
            delta,
            depth,
        }),
        _ => Err(QError::Indeterminate { depth }),
    }
}

/// `1/a0 - f1 b1/a1 - b2/a2 - ...` with the recurrence coefficients of `inst`.
///
/// `path` selects the limit used where a coefficient is `0/0`; `b1_factor`
/// multiplies `b1` (2 gives the form with `2 b1` that appears at `s = q`).
pub fn recurrence_cf(inst: &RecurrenceInstance, path: LimitPath, b1_factor: u32) -> CfSpec<'_> {
    CfSpec {
        leading: inst.ctx().one(),
        partial_den: Box::new(move |n| inst.coeff_limit(n as i64, true, path)),
        partial_num: Box::new(move |n| {
            let b = inst.coeff_limit(n as i64, false, path)?;
            Ok(if n == 1 { b * b1_factor } else { b })
        }),
        sign: CfSign::Minus,
        terminating_depth: None,
    }
}

/// Value of the recurrence fraction as a ratio of minimal solutions.
///
/// With `X = W2 X1 - W1 X2` and the recurrence at `n = 0`,
/// `1/(a0 - b1/(a1 - ...)) = X_0 / (a0 X_0 - X_1)`.
pub fn theorem4_rhs(inst: &RecurrenceInstance) -> Result<Complex> {
    if inst.exponent().is_none_or(|m| m < 1) {
        return Err(QError::Unsupported(
            "closed form needs s = q^m with m >= 1".into(),
        ));
    }
    let (w1, w2) = inst.w1_w2()?;
    let x0 = inst.x3_with(0, &w1, &w2)?;
    let x1 = inst.x3_with(1, &w1, &w2)?;
    let a0 = inst.a(0)?;
    let den = a0 * &x0 - x1;
    if mag(&den) < inst.ctx().zero_tol() * mag(&x0) {
        return Err(QError::Pole("closed form denominator vanishes".into()));
    }
    Ok(x0 / den)
}

fn nonzero(ctx: &QContext, x: Complex, what: &str) -> Result<Complex> {
    if mag(&x) < ctx.zero_tol() {
        Err(QError::Pole(what.to_string()))
    } else {
        Ok(x)
    }
}

/// `q^(k n + c)`.
fn qlin(ctx: &QContext, n: &Complex, k: f64, c: f64) -> Result<Complex> {
    ctx.pow(&(ctx.lift(n) * k + c))
}

/// `q^(k n + c) + q^-(k n + c)`.
fn qsym(ctx: &QContext, n: &Complex, k: f64, c: f64) -> Result<Complex> {
    let x = qlin(ctx, n, k, c)?;
    let inv = ctx.one() / &x;
    Ok(x + inv)
}

/// `q^-(k n + c) - q^(k n + c)`.
fn qanti(ctx: &QContext, n: &Complex, k: f64, c: f64) -> Result<Complex> {
    let x = qlin(ctx, n, k, c)?;
    let inv = ctx.one() / &x;
    Ok(inv - x)
}

/// Square roots of `xs` with the last one's sign chosen so the product is `target`.
fn roots_with_product(ctx: &QContext, xs: &[Complex; 5], target: &Complex) -> [Complex; 5] {
    let mut r = xs.clone().map(|x| ctx.lift(&x).sqrt());
    let p = product(ctx, &r);
    if mag(&(p.clone() - target)) > mag(&(p + target)) {
        r[4] = -r[4].clone();
    }
    r
}

fn x_plus_inv(ctx: &QContext, x: &Complex) -> Complex {
    ctx.lift(x) + ctx.one() / x
}

/// The `s = q^2` fraction written in the parameters `alpha_i = a/b_i`.
///
/// Here `a = sqrt(q prod alpha)` (principal root) and `b..f = a/alpha`.
#[derive(Clone, Debug)]
pub struct Corollary7 {
    ctx: QContext,
    alphas: [Complex; 5],
    a: Complex,
    /// `alpha^(1/2)` with product `a / q^(1/2)`.
    roots: [Complex; 5],
}

impl Corollary7 {
    pub fn new(alphas: &[Complex; 5], ctx: &QContext) -> Result<Self> {
        let alphas = alphas.clone().map(|x| ctx.lift(&x));
        if alphas.iter().any(|x| x.is_zero()) {
            return Err(QError::InvalidInput("parameters must be nonzero".into()));
        }
        let a = (product(ctx, &alphas) * ctx.q()).sqrt();
        let target = a.clone() / ctx.pow_f64(0.5)?;
        let roots = roots_with_product(ctx, &alphas, &target);
        Ok(Self {
            ctx: ctx.clone(),
            alphas,
            a,
            roots,
        })
    }

    pub fn a(&self) -> &Complex {
        &self.a
    }

    /// The recurrence instance `(a; a/alpha_1, ..., a/alpha_5)` with `s = q^2`.
    pub fn instance(&self) -> Result<RecurrenceInstance> {
        let b = |i: usize| self.a.clone() / &self.alphas[i];
        RecurrenceInstance::with_exponent(&self.ctx, &self.a, &[b(0), b(1), b(2), b(3)], 2)
    }

    /// Simplified `a_n`.
    pub fn coeff_a(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let sq = ctx.pow_f64(0.5)?;
        let p = product(ctx, &self.roots.clone().map(|r| x_plus_inv(ctx, &r)));
        let s = self
            .alphas
            .iter()
            .fold(ctx.zero(), |acc, x| acc + x_plus_inv(ctx, x));
        let h = qsym(ctx, n, 0.5, 0.0)? * qsym(ctx, n, 0.5, 0.5)?;
        let h = nonzero(ctx, h, "a_n denominator vanishes")?;
        let mid = x_plus_inv(ctx, &sq) * qsym(ctx, n, 1.0, 0.5)?;
        let num = sq.clone() * p + sq.clone() * mid * &h - sq * (s + 2u32) * &h;
        Ok(num / h)
    }

    /// Simplified `b_n`.
    pub fn coeff_b(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let qn = qsym(ctx, n, 1.0, 0.0)?;
        let num = self
            .alphas
            .iter()
            .fold(-ctx.q().clone(), |acc, x| acc * (x_plus_inv(ctx, x) - &qn));
        let h = qsym(ctx, n, 0.5, 0.0)?;
        let den = Complex::with_val(ctx.precision_bits(), h.square_ref())
            * qanti(ctx, n, 1.0, 0.5)?
            * qanti(ctx, n, 1.0, -0.5)?;
        Ok(num / nonzero(ctx, den, "b_n denominator vanishes")?)
    }

    /// The fraction with the simplified coefficients.
    pub fn cf(&self) -> CfSpec<'_> {
        CfSpec {
            leading: self.ctx.one(),
            partial_den: Box::new(move |n| self.coeff_a(&self.ctx.real(n as f64))),
            partial_num: Box::new(move |n| self.coeff_b(&self.ctx.real(n as f64))),
            sign: CfSign::Minus,
            terminating_depth: None,
        }
    }

    /// `V = (q/a, q^2/a)_inf / (a, aq)_inf * W~1 / W~2`.
    pub fn v(&self) -> Result<Complex> {
        let ctx = &self.ctx;
        let q = ctx.q();
        let a = &self.a;
        let inst = self.instance()?;
        let p = inst.params();
        let w1 = eval_wtilde(a, &p.rest(), ctx)?;
        let w2 = eval_wtilde(&(q.clone() / a), &p.rest().map(|x| q.clone() / x), ctx)?;
        let q2 = Complex::with_val(ctx.precision_bits(), q.square_ref());
        let num = qpoch_multi(&[q.clone() / a, q2 / a], ctx)?.value;
        let den = qpoch_multi(&[a.clone(), a.clone() * q], ctx)?;
        if den.zero_factors > 0 {
            return Err(QError::Pole("(a, aq)_inf vanishes".into()));
        }
        Ok(num / den.value * w1 / nonzero(ctx, w2, "W~2 vanishes")?)
    }

    /// `2a(1-q) / (q^(3/2) prod(1-alpha)) * (1-V)/(1+V)`.
    pub fn rhs(&self) -> Result<Complex> {
        let ctx = &self.ctx;
        let lead = product(ctx, &self.alphas.clone().map(|x| one_minus(&x)));
        let lead = nonzero(ctx, lead, "prod(1 - alpha) vanishes")?;
        let v = self.v()?;
        let plus = nonzero(ctx, ctx.one() + &v, "V = -1")?;
        let pref = self.a.clone() * 2u32 * one_minus(ctx.q()) / ctx.pow_f64(1.5)? / lead;
        Ok(pref * one_minus(&v) / plus)
    }
}

/// Closed form of the `s = q^2` fraction for `alpha..epsilon`.
pub fn corollary7_rhs(alphas: &[Complex; 5], ctx: &QContext) -> Result<Complex> {
    Corollary7::new(alphas, ctx)?.rhs()
}

/// The `s = q` fraction written in the parameters `alpha_i = a^2 q / b_i^2`.
///
/// Here `a = (prod alpha / q)^(1/4)` (principal root), `alpha^(1/2) = a q^(1/2) / b`
/// with product `a^2 q^(1/2)`, and `alpha^(1/4)` with product `q^(1/4) a`.
#[derive(Clone, Debug)]
pub struct Corollary8 {
    ctx: QContext,
    a: Complex,
    halves: [Complex; 5],
    quarters: [Complex; 5],
    bs: [Complex; 5],
}

impl Corollary8 {
    pub fn new(alphas: &[Complex; 5], ctx: &QContext) -> Result<Self> {
        let alphas = alphas.clone().map(|x| ctx.lift(&x));
        if alphas.iter().any(|x| x.is_zero()) {
            return Err(QError::InvalidInput("parameters must be nonzero".into()));
        }
        let a = (product(ctx, &alphas) / ctx.q()).ln() / 4u32;
        let a = a.exp();
        let qh = ctx.pow_f64(0.5)?;
        let a2 = Complex::with_val(ctx.precision_bits(), a.square_ref());
        let halves = roots_with_product(ctx, &alphas, &(a2 * &qh));
        let quarters = roots_with_product(ctx, &halves, &(ctx.pow_f64(0.25)? * &a));
        let bs = halves.clone().map(|h| a.clone() * &qh / h);
        Ok(Self {
            ctx: ctx.clone(),
            a,
            halves,
            quarters,
            bs,
        })
    }

    pub fn a(&self) -> &Complex {
        &self.a
    }

    /// The recurrence instance `(a; b..f)` with `s = q`.
    pub fn instance(&self) -> Result<RecurrenceInstance> {
        let b = &self.bs;
        RecurrenceInstance::with_exponent(
            &self.ctx,
            &self.a,
            &[b[0].clone(), b[1].clone(), b[2].clone(), b[3].clone()],
            1,
        )
    }

    /// Simplified `a_n`.
    pub fn coeff_a(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let qh = ctx.pow_f64(0.5)?;
        let q4 = ctx.pow_f64(0.25)?;
        let h = x_plus_inv(ctx, &qh);
        let sh = self
            .halves
            .iter()
            .fold(ctx.zero(), |acc, x| acc + x_plus_inv(ctx, x));
        let pp = product(ctx, &self.quarters.clone().map(|x| x_plus_inv(ctx, &x)));
        let pm = product(
            ctx,
            &self.quarters.clone().map(|x| x.clone() - ctx.one() / &x),
        );
        let q4p = x_plus_inv(ctx, &q4);
        let q4m = q4.clone() - ctx.one() / &q4;
        let q1 = x_plus_inv(ctx, ctx.q());
        let q32 = x_plus_inv(ctx, &ctx.pow_f64(1.5)?);
        let c1 = (q4p.clone() * &pp + q4m.clone() * &pm) / 2u32 - q32;
        let c0 = q1.clone() * &h + q1 * &sh + (q4m * &h * &pm - q4p * &h * &pp) / 2u32;
        let bracket = qsym(ctx, n, 3.0, 0.0)? * &h - qsym(ctx, n, 2.0, 0.0)? * (h.clone() + &sh)
            + qsym(ctx, n, 1.0, 0.0)? * c1
            + c0;
        let den = qanti(ctx, n, 1.0, 0.5)? * qanti(ctx, n, 1.0, -0.5)?;
        Ok(qh * bracket / nonzero(ctx, den, "a_n denominator vanishes")?)
    }

    /// Simplified `b_n`.
    pub fn coeff_b(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let shift = qsym(ctx, n, 1.0, -0.5)?;
        let num = self.halves.iter().fold(ctx.q().clone(), |acc, x| {
            acc * (shift.clone() - x_plus_inv(ctx, x))
        });
        let anti = qanti(ctx, n, 1.0, -0.5)?;
        let den = qsym(ctx, n, 0.5, 0.0)?
            * qsym(ctx, n, 0.5, -0.5)?
            * Complex::with_val(ctx.precision_bits(), anti.square_ref());
        Ok(num / nonzero(ctx, den, "b_n denominator vanishes")?)
    }

    /// The fraction with the simplified coefficients and multiplier `b1_factor` on `b1`.
    pub fn cf(&self, b1_factor: u32) -> CfSpec<'_> {
        CfSpec {
            leading: self.ctx.one(),
            partial_den: Box::new(move |n| self.coeff_a(&self.ctx.real(n as f64))),
            partial_num: Box::new(move |n| {
                let b = self.coeff_b(&self.ctx.real(n as f64))?;
                Ok(if n == 1 { b * b1_factor } else { b })
            }),
            sign: CfSign::Minus,
            terminating_depth: None,
        }
    }

    /// `a^2/q (1/a)_inf^2 / ((aq)_inf (a/q)_inf) * W~1/W~2`.
    fn tail(&self) -> Result<Complex> {
        let ctx = &self.ctx;
        let q = ctx.q();
        let a = &self.a;
        let inst = self.instance()?;
        let p = inst.params();
        let w1 = eval_wtilde(a, &p.rest(), ctx)?;
        let w2 = eval_wtilde(&(q.clone() / a), &p.rest().map(|x| q.clone() / x), ctx)?;
        let inv = qpoch_infinite(&(ctx.one() / a), ctx)?.value;
        let inv2 = Complex::with_val(ctx.precision_bits(), inv.square_ref());
        let den = qpoch_multi(&[a.clone() * q, a.clone() / q], ctx)?;
        if den.zero_factors > 0 {
            return Err(QError::Pole("(aq, a/q)_inf vanishes".into()));
        }
        let a2 = Complex::with_val(ctx.precision_bits(), a.square_ref());
        Ok(a2 / q * inv2 / den.value * w1 / nonzero(ctx, w2, "W~2 vanishes")?)
    }

    /// `2 / (a0 + a^2/q (1/a)^2 / ((aq)(a/q)) W~1/W~2)`.
    pub fn rhs(&self) -> Result<Complex> {
        let ctx = &self.ctx;
        let den = self.coeff_a(&ctx.zero())? + self.tail()?;
        Ok(Complex::with_val(ctx.precision_bits(), 2)
            / nonzero(ctx, den, "closed form has a pole")?)
    }
}

/// Closed form of the `s = q` fraction for `alpha..epsilon`.
pub fn corollary8_rhs(alphas: &[Complex; 5], ctx: &QContext) -> Result<Complex> {
    Corollary8::new(alphas, ctx)?.rhs()
}

/// The two eight-factor products of the terminating product fraction.
#[derive(Clone, Debug)]
pub struct WatsonProducts {
    pub p: Complex,
    pub q: Complex,
}

/// Outcome of the terminating product fraction.
#[derive(Clone, Debug)]
pub struct WatsonResult {
    /// `(P - Q)/(P + Q)`.
    pub lhs: Complex,
    /// `A0/(beta_0 + alpha_1/(beta_1 + ...))`.
    pub rhs: Complex,
    /// Index `n` with one of the last four parameters equal to `+-q^(+-n)`.
    pub order: usize,
    /// `(|P| + |Q|) / |P + Q|`.
    pub condition: f64,
}

fn watson_arguments(sm: &[Complex; 5]) -> ([Complex; 8], [Complex; 8]) {
    let [al, be, ga, de, ep] = sm.clone();
    let p = [
        al.clone() * &be * &ga * &de * &ep,
        al.clone() * &be * &ga / (de.clone() * &ep),
        al.clone() * &be * &de / (ga.clone() * &ep),
        al.clone() * &ga * &de / (be.clone() * &ep),
        al.clone() * &be * &ep / (ga.clone() * &de),
        al.clone() * &ga * &ep / (be.clone() * &de),
        al.clone() * &de * &ep / (be.clone() * &ga),
        al.clone() / (be.clone() * &ga * &de * &ep),
    ];
    let q = [
        al.clone() * &be * &ga * &de / &ep,
        al.clone() * &be * &ga * &ep / &de,
        al.clone() * &be * &de * &ep / &ga,
        al.clone() * &ga * &de * &ep / &be,
        al.clone() * &be / (ga.clone() * &de * &ep),
        al.clone() * &ga / (be.clone() * &de * &ep),
        al.clone() * &de / (be.clone() * &ga * &ep),
        al.clone() * &ep / (be.clone() * &ga * &de),
    ];
    (p, q)
}

/// `P = 1/prod G(x)^-1` and `Q` likewise over the sixteen product arguments.
pub fn watson_products(sm: &[Complex; 5], ctx: &QContext) -> Result<WatsonProducts> {
    let sm = sm.clone().map(|x| ctx.lift(&x));
    let (pa, qa) = watson_arguments(&sm);
    let prod_inv = |xs: &[Complex; 8]| -> Result<Complex> {
        let mut acc = ctx.one();
        for x in xs {
            let g = g_inverse(x, ctx)?;
            if g.zero_factors > 0 {
                return Err(QError::Pole("product has a vanishing factor".into()));
            }
            acc *= g.value;
        }
        Ok(ctx.one() / acc)
    };
    Ok(WatsonProducts {
        p: prod_inv(&pa)?,
        q: prod_inv(&qa)?,
    })
}

/// The same products with `(x; q^2)_inf` in place of `(xq; q^2)_inf`.
pub fn watson_products_unshifted(sm: &[Complex; 5], ctx: &QContext) -> Result<WatsonProducts> {
    let sm = sm.clone().map(|x| ctx.lift(&x));
    let (pa, qa) = watson_arguments(&sm);
    let ctx2 = ctx.with_base(&Complex::with_val(
        ctx.precision_bits(),
        ctx.q().square_ref(),
    ))?;
    Ok(WatsonProducts {
        p: ctx.one() / qpoch_multi(&pa, &ctx2)?.value,
        q: ctx.one() / qpoch_multi(&qa, &ctx2)?.value,
    })
}

struct WatsonCoeffs {
    ctx: QContext,
    sm: [Complex; 5],
}

impl WatsonCoeffs {
    fn qm(&self, k: i64) -> Complex {
        let x = self.ctx.powi(k);
        let inv = self.ctx.one() / &x;
        x + inv
    }

    fn sq_sym(&self, x: &Complex) -> Complex {
        let x2 = Complex::with_val(self.ctx.precision_bits(), x.square_ref());
        x_plus_inv(&self.ctx, &x2)
    }

    fn alpha_factor(&self, x: &Complex, m: i64) -> Complex {
        self.sq_sym(x) - self.qm(2 * m)
    }

    fn alpha(&self, m: i64) -> Complex {
        let p = self
            .sm
            .iter()
            .fold(self.ctx.one(), |acc, x| acc * self.alpha_factor(x, m));
        self.qm(m + 1) * self.qm(m - 1) * p
    }

    fn beta(&self, m: i64) -> Complex {
        let ctx = &self.ctx;
        let s = self
            .sm
            .iter()
            .fold(ctx.zero(), |acc, x| acc + self.sq_sym(x));
        let px = product(ctx, &self.sm.clone().map(|x| x_plus_inv(ctx, &x)));
        let anti = ctx.powi(2 * m + 1) - ctx.one() / ctx.powi(2 * m + 1);
        let inner = self.qm(m) * self.qm(m + 1) * (s + 2u32)
            - px
            - self.qm(1) * self.qm(m) * self.qm(m + 1) * self.qm(2 * m + 1);
        anti * inner
    }
}

/// Index `i >= 1`, order `n >= 1` and value `+-q^(+-n)` of the first of
/// `beta..epsilon` that terminates the fraction, compared at the precision of `ctx`.
fn watson_termination(sm: &[Complex; 5], ctx: &QContext) -> Option<(usize, usize, Complex)> {
    let tol = ctx.zero_tol();
    let mut best: Option<(usize, usize, Complex)> = None;
    for (i, x) in sm.iter().enumerate().skip(1) {
        for n in 1..=MAX_DEPTH as i64 {
            if best.as_ref().is_some_and(|b| b.1 <= n as usize) {
                break;
            }
            let hit = [ctx.powi(n), ctx.powi(-n)]
                .into_iter()
                .flat_map(|p| [p.clone(), -p])
                .find(|t| mag(&(ctx.lift(x) - t)) < tol.clone() * mag(t));
            if let Some(t) = hit {
                best = Some((i, n as usize, t));
                break;
            }
        }
    }
    best
}

/// Both sides of the terminating product fraction, computed at twice the precision.
pub fn watson_theorem_a(sm: &[Complex; 5], ctx: &QContext) -> Result<WatsonResult> {
    let (index, order, _) = watson_termination(sm, ctx).ok_or_else(|| {
        QError::InvalidInput("none of the last four parameters is +-q^(+-n) with n >= 1".into())
    })?;
    let hi = ctx.with_precision(2 * ctx.precision_bits());
    let mut sm_hi = sm.clone().map(|x| hi.lift(&x));
    // Snap the terminating parameter so the truncation is exact at the higher precision.
    let (_, _, exact) = watson_termination(&sm_hi, ctx).expect("found above");
    sm_hi[index] = {
        let n = order as i64;
        let up = hi.powi(n);
        let down = hi.powi(-n);
        [up.clone(), -up, down.clone(), -down]
            .into_iter()
            .min_by(|a, b| mag(&(a.clone() - &exact)).total_cmp(&mag(&(b.clone() - &exact))))
            .expect("four candidates")
    };
    let coeffs = WatsonCoeffs {
        ctx: hi.clone(),
        sm: sm_hi.clone(),
    };
    let prods = watson_products(&sm_hi, &hi)?;
    let sum = prods.p.clone() + &prods.q;
    let sum_mag = mag(&sum);
    if sum_mag.is_zero() {
        return Err(QError::Pole("P + Q vanishes".into()));
    }
    let condition = ((mag(&prods.p) + mag(&prods.q)) / &sum_mag).to_f64();
    let lhs = (prods.p - prods.q) / sum;
    let a0 =
        x_plus_inv(&hi, hi.q()) * product(&hi, &sm_hi.clone().map(|x| x.clone() - hi.one() / x));
    let spec = CfSpec {
        leading: a0,
        partial_den: Box::new(|m| Ok(coeffs.beta(m as i64))),
        partial_num: Box::new(|m| Ok(coeffs.alpha(m as i64))),
        sign: CfSign::Plus,
        terminating_depth: Some(order),
    };
    let rhs = eval_cf(&spec, order, &hi)?.value;
    Ok(WatsonResult {
        lhs: ctx.lift(&lhs),
        rhs: ctx.lift(&rhs),
        order,
        condition,
    })
}

/// A terminating fraction and its product closed form.
#[derive(Clone, Debug)]
pub struct TerminatingForm {
    /// The recurrence fraction with plain `b1`.
    pub cf: CfValue,
    /// The recurrence fraction with `2 b1`.
    pub cf_doubled: Option<CfValue>,
    /// Closed form matched against `cf`.
    pub closed: Complex,
    /// Closed form matched against `cf_doubled`.
    pub closed_doubled: Option<Complex>,
    /// The product form with the transcription shown in the literature.
    pub literal: Complex,
}

/// Terminating `s = q^2` fraction in base `q^2` against the sixteen-factor products.
///
/// With `a = q prod x` and `b_i = a / x_i^2`, the fraction equals
/// `2(q^-1 - q) / (q prod(x - 1/x)) * (P - Q)/(P + Q)`.
pub fn corollary7_terminating(sm: &[Complex; 5], ctx: &QContext) -> Result<TerminatingForm> {
    let sm = sm.clone().map(|x| ctx.lift(&x));
    let q = ctx.q();
    let base = Complex::with_val(ctx.precision_bits(), q.square_ref());
    let cq = ctx.with_base(&base)?;
    let a = product(ctx, &sm) * q;
    let b = |i: usize| {
        let x2 = Complex::with_val(ctx.precision_bits(), sm[i].square_ref());
        a.clone() / x2
    };
    let inst = RecurrenceInstance::with_exponent(&cq, &a, &[b(0), b(1), b(2), b(3)], 2)?;
    let cf = eval_cf_default(&recurrence_cf(&inst, LimitPath::Index, 1), &cq)?;
    let pref = (ctx.one() / q - q) * 2u32
        / q
        / nonzero(
            ctx,
            product(ctx, &sm.clone().map(|x| x.clone() - ctx.one() / x)),
            "prod(x - 1/x) vanishes",
        )?;
    let ratio = |w: WatsonProducts| -> Result<Complex> {
        let s = nonzero(ctx, w.p.clone() + &w.q, "P + Q vanishes")?;
        Ok((w.p - w.q) / s)
    };
    let closed = pref.clone() * ratio(watson_products(&sm, ctx)?)?;
    let literal = pref * ratio(watson_products_unshifted(&sm, ctx)?)?;
    Ok(TerminatingForm {
        cf,
        cf_doubled: None,
        closed,
        closed_doubled: None,
        literal,
    })
}

/// The eight-factor products of the terminating `s = q` fraction, base `q^4`.
#[derive(Clone, Debug)]
pub struct CompanionProducts {
    pub pp: Complex,
    pub qp: Complex,
}

/// `P'` and `Q'` for `alpha..epsilon`.
pub fn companion_products(sm: &[Complex; 5], ctx: &QContext) -> Result<CompanionProducts> {
    let [a, b, c, d, e] = sm.clone().map(|x| ctx.lift(&x));
    let q = ctx.q().clone();
    let q3 = ctx.powi(3);
    let base = ctx.powi(4);
    let c4 = ctx.with_base(&base)?;
    let qa = [
        q.clone() * &a * &b * &c * &d / &e,
        q.clone() * &a * &c * &d * &e / &b,
        q.clone() * &a * &b * &e * &d / &c,
        q.clone() * &a * &e * &b * &c / &d,
        q.clone() * &a * &b / (e.clone() * &c * &d),
        q.clone() * &a * &c / (e.clone() * &b * &d),
        q.clone() * &a * &d / (e.clone() * &b * &c),
        q.clone() * &a * &e / (b.clone() * &c * &d),
    ];
    let pa = [
        q3.clone() * &a * &b * &c * &d * &e,
        q3.clone() * &a / (b.clone() * &c * &d * &e),
        q3.clone() * &a * &d * &e / (b.clone() * &c),
        q3.clone() * &a * &c * &e / (b.clone() * &d),
        q3.clone() * &c * &d * &a / (e.clone() * &b),
        q3.clone() * &a * &b * &d / (e.clone() * &c),
        q3.clone() * &a * &b * &c / (e.clone() * &d),
        q3.clone() * &a * &b * &e / (c.clone() * &d),
    ];
    let inv = |xs: &[Complex; 8]| -> Result<Complex> {
        let t = qpoch_multi(xs, &c4)?;
        if t.zero_factors > 0 {
            return Err(QError::Pole(
                "companion product has a vanishing factor".into(),
            ));
        }
        Ok(ctx.one() / t.value)
    };
    Ok(CompanionProducts {
        pp: inv(&pa)?,
        qp: inv(&qa)?,
    })
}

/// Terminating `s = q` fraction in base `q^4`, `beta = q^N` with `N` odd.
///
/// With `a = prod x / q` and `b_i = a q^2 / x_i^2`,
/// `cf = 2/(a0 - q^2/alpha^2 P'/Q')` and
/// `cf_doubled = -(alpha^2/q^2) Q'/P'` (the literal variant has `q^2/alpha^2`).
pub fn corollary8_terminating(sm: &[Complex; 5], ctx: &QContext) -> Result<TerminatingForm> {
    let sm = sm.clone().map(|x| ctx.lift(&x));
    let q = ctx.q();
    let c4 = ctx.with_base(&ctx.powi(4))?;
    let q2 = ctx.powi(2);
    let a = product(ctx, &sm) / q;
    let b = |i: usize| {
        let x2 = Complex::with_val(ctx.precision_bits(), sm[i].square_ref());
        a.clone() * &q2 / x2
    };
    let inst = RecurrenceInstance::with_exponent(&c4, &a, &[b(0), b(1), b(2), b(3)], 1)?
        .with_sqrt_s(&q2)?;
    let cf = eval_cf_default(&recurrence_cf(&inst, LimitPath::Index, 1), &c4)?;
    let cf_doubled = eval_cf_default(&recurrence_cf(&inst, LimitPath::Index, 2), &c4)?;
    let cp = companion_products(&sm, ctx)?;
    let al2 = Complex::with_val(ctx.precision_bits(), sm[0].square_ref());
    let a0 = inst.a(0)?;
    let den = nonzero(
        ctx,
        a0 - q2.clone() / &al2 * &cp.pp / &cp.qp,
        "closed form has a pole",
    )?;
    let closed = Complex::with_val(ctx.precision_bits(), 2) / den;
    let ratio = cp.qp.clone() / &cp.pp;
    let closed_doubled = -(al2.clone() / &q2) * &ratio;
    let literal = -(q2 / al2) * ratio;
    Ok(TerminatingForm {
        cf,
        cf_doubled: Some(cf_doubled),
        closed,
        closed_doubled: Some(closed_doubled),
        literal,
    })
}

fn wtilde_pair(inst: &RecurrenceInstance) -> Result<(Complex, Complex)> {
    let ctx = inst.ctx();
    let q = ctx.q();
    let p = inst.params();
    let w1 = eval_wtilde(&p.a, &p.rest(), ctx)?;
    let w2 = eval_wtilde(&(q.clone() / &p.a), &p.rest().map(|x| q.clone() / x), ctx)?;
    Ok((w1, w2))
}

fn exponent_of(inst: &RecurrenceInstance) -> Result<i64> {
    inst.exponent()
        .filter(|&m| m >= 1)
        .ok_or_else(|| QError::Unsupported("closed form needs s = q^m with m >= 1".into()))
}

/// Closed form of the `s = q^m` fraction, `m >= 1`.
///
/// ```text
/// q^((m-3)/2) (1 - a/q) / ((1 - q^(m-1)/a) prod(1 - a/p))
///   * [ (1 - q^(m-1)) 10phi9(q/a; q/b..q/f, q^(2-m), q) - T ],
/// T = W~2/W~1 (a, aq, q)_inf / (q^m/a, q^(m-1)/a, q^m)_inf
///     * prod (p q^(m-1)/a)_inf / prod (pq/a)_inf.
/// ```
/// The `10 phi 9` term carries the factor `1 - q^(m-1)` and vanishes at `m = 1`.
pub fn corollary9_rhs(inst: &RecurrenceInstance) -> Result<Complex> {
    let m = exponent_of(inst)?;
    let ctx = inst.ctx();
    let q = ctx.q();
    let p = inst.params();
    let a = &p.a;
    let ps = p.rest();
    let qm1 = ctx.powi(m - 1);
    let lead_den = one_minus(&(qm1.clone() / a))
        * product(ctx, &ps.clone().map(|x| one_minus(&(a.clone() / x))));
    let pref = ctx.pow_f64((m as f64 - 3.0) / 2.0)? * one_minus(&(a.clone() / q))
        / nonzero(ctx, lead_den, "closed form prefactor has a pole")?;
    let phi = if m == 1 {
        ctx.zero()
    } else {
        let inv = |x: &Complex| q.clone() / x;
        let series = Vwp10phi9Instance::new(
            inv(a),
            [
                inv(&ps[0]),
                inv(&ps[1]),
                inv(&ps[2]),
                inv(&ps[3]),
                inv(&ps[4]),
                ctx.powi(2 - m),
                q.clone(),
            ],
            ctx,
        )?;
        one_minus(&qm1) * eval_10phi9(&series, ctx)?
    };
    let (w1, w2) = wtilde_pair(inst)?;
    let qm = ctx.powi(m);
    let num = qpoch_multi(&[a.clone(), a.clone() * q, q.clone()], ctx)?.value
        * qpoch_multi(&ps.clone().map(|x| x * &qm1 / a), ctx)?.value;
    let den = qpoch_multi(&[qm.clone() / a, qm1.clone() / a, qm], ctx)?.value
        * qpoch_multi(&ps.clone().map(|x| x * q / a), ctx)?.value;
    let t =
        w2 / nonzero(ctx, w1, "W~1 vanishes")? * num / nonzero(ctx, den, "closed form has a pole")?;
    Ok(pref * (phi - t))
}

/// The `s = q` product form `q/a^2 W~2/W~1 (a/q, aq)_inf / (1/a)_inf^2`.
pub fn eq52_rhs(inst: &RecurrenceInstance) -> Result<Complex> {
    if inst.exponent() != Some(1) {
        return Err(QError::Unsupported("needs s = q".into()));
    }
    let ctx = inst.ctx();
    let q = ctx.q();
    let a = &inst.params().a;
    let (w1, w2) = wtilde_pair(inst)?;
    let num = qpoch_multi(&[a.clone() / q, a.clone() * q], ctx)?.value;
    let inv = qpoch_infinite(&(ctx.one() / a), ctx)?.value;
    let den = Complex::with_val(ctx.precision_bits(), inv.square_ref())
        * Complex::with_val(ctx.precision_bits(), a.square_ref());
    Ok(q.clone() * w2 / nonzero(ctx, w1, "W~1 vanishes")? * num
        / nonzero(ctx, den, "(1/a)_inf vanishes")?)
}

/// The `s = q^2` form
/// `-a/q^(3/2) (1-q)/prod(1-a/p) [1 - (a, aq)_inf / (q^2/a, q/a)_inf W~2/W~1]`.
pub fn eq54_rhs(inst: &RecurrenceInstance) -> Result<Complex> {
    if inst.exponent() != Some(2) {
        return Err(QError::Unsupported("needs s = q^2".into()));
    }
    let ctx = inst.ctx();
    let q = ctx.q();
    let a = &inst.params().a;
    let (w1, w2) = wtilde_pair(inst)?;
    let lead = product(
        ctx,
        &inst.params().rest().map(|p| one_minus(&(a.clone() / p))),
    );
    let pref = -(a.clone() / ctx.pow_f64(1.5)?) * one_minus(q)
        / nonzero(ctx, lead, "prod(1 - a/p) vanishes")?;
    let q2 = Complex::with_val(ctx.precision_bits(), q.square_ref());
    let ratio = qpoch_multi(&[a.clone(), a.clone() * q], ctx)?.value
        / nonzero(
            ctx,
            qpoch_multi(&[q2 / a, q.clone() / a], ctx)?.value,
            "(q^2/a, q/a)_inf vanishes",
        )?;
    Ok(pref * (ctx.one() - ratio * w2 / nonzero(ctx, w1, "W~1 vanishes")?))
}

/// At `s = q`: `X2_(n+1) X1_0 / (2 X1_(n+1) X2_1)`, the `(n+1)`-th convergent
/// of `1/a0 - 2b1/a1 - b2/a2 - ...`.
pub fn remark2_approximant(inst: &RecurrenceInstance, n: usize) -> Result<Complex> {
    if inst.exponent() != Some(1) {
        return Err(QError::Unsupported("needs s = q".into()));
    }
    let k = n as i64 + 1;
    let num = inst.x2(k)? * inst.x1(0)?;
    let den = inst.x1(k)? * inst.x2(1)? * 2u32;
    Ok(num / nonzero(inst.ctx(), den, "approximant denominator vanishes")?)
}

/// Relative residuals of `2 X1_1 - a0 X1_0 = 0` and `X2_2 - a1 X2_1 = 0` at `s = q`.
pub fn remark2_initial_conditions(inst: &RecurrenceInstance) -> Result<(f64, f64)> {
    let x10 = inst.x1(0)?;
    let x11 = inst.x1(1)?;
    let a0 = inst.a(0)?;
    let t = a0 * &x10;
    let r1 = mag(&(x11.clone() * 2u32 - &t)) / (mag(&x11) * 2u32 + mag(&t));
    let x21 = inst.x2(1)?;
    let x22 = inst.x2(2)?;
    let t = inst.a(1)? * &x21;
    let r2 = mag(&(x22.clone() - &t)) / (mag(&x22) + mag(&t));
    Ok((r1.to_f64(), r2.to_f64()))
}

/// The fraction `1/c0 - d1/c1 - d2/c2 - ...` in the parameters `a, b, c, d, e`.
#[derive(Clone, Debug)]
pub struct Remark3 {
    ctx: QContext,
    p: [Complex; 5],
}

impl Remark3 {
    pub fn new(params: &[Complex; 5], ctx: &QContext) -> Result<Self> {
        let p = params.clone().map(|x| ctx.lift(&x));
        if p.iter().any(|x| x.is_zero()) {
            return Err(QError::InvalidInput("parameters must be nonzero".into()));
        }
        Ok(Self {
            ctx: ctx.clone(),
            p,
        })
    }

    fn bcde(&self) -> Complex {
        product(&self.ctx, &self.p[1..])
    }

    /// `a^2 q^(n+1) / (bcde)`.
    fn lam(&self, n: i64) -> Complex {
        let a2 = Complex::with_val(self.ctx.precision_bits(), self.p[0].square_ref());
        a2 * self.ctx.powi(n + 1) / self.bcde()
    }

    pub fn c(&self, n: i64) -> Result<Complex> {
        let ctx = &self.ctx;
        let a = &self.p[0];
        let qn = ctx.powi(n);
        let qn1 = ctx.powi(n + 1);
        let t1 = product(
            ctx,
            &self.p.clone()[1..]
                .iter()
                .map(|x| one_minus(&(a.clone() / x * &qn1)))
                .collect::<Vec<_>>(),
        );
        let t2 = ctx.q().clone()
            * one_minus(&qn)
            * one_minus(&(a.clone() * &qn))
            * one_minus(&(a.clone() * &qn1))
            * one_minus(&self.lam(n));
        let t3 = self.lam(n)
            * &qn1
            * product(
                ctx,
                &self.p.clone()[1..]
                    .iter()
                    .map(one_minus)
                    .collect::<Vec<_>>(),
            );
        let den = nonzero(
            ctx,
            one_minus(&(a.clone() * qn1)),
            "c_n denominator vanishes",
        )?;
        Ok((t1 + t2 - t3) / den)
    }

    pub fn d(&self, n: i64) -> Complex {
        let ctx = &self.ctx;
        let a = &self.p[0];
        let qn = ctx.powi(n);
        self.p[1..].iter().fold(
            ctx.q().clone() * one_minus(&qn) * one_minus(&self.lam(n)),
            |acc, x| acc * one_minus(&(a.clone() / x * &qn)),
        )
    }

    pub fn cf(&self) -> CfSpec<'_> {
        CfSpec {
            leading: self.ctx.one(),
            partial_den: Box::new(move |n| self.c(n as i64)),
            partial_num: Box::new(move |n| Ok(self.d(n as i64))),
            sign: CfSign::Minus,
            terminating_depth: None,
        }
    }

    fn phi32(&self, num: [Complex; 3], den: [Complex; 2], z: &Complex) -> Result<Complex> {
        let spec = PhiSpec {
            num: num.to_vec(),
            den: den.to_vec(),
            z: z.clone(),
        };
        eval_phi_generic(&spec, &self.ctx)
    }

    fn poch(&self, xs: &[Complex]) -> Result<Complex> {
        let t = qpoch_multi(xs, &self.ctx)?;
        if t.zero_factors > 0 {
            return Err(QError::Pole("product has a vanishing factor".into()));
        }
        Ok(t.value)
    }

    /// `(1 - a/q)/(q prod(1 - a/p)) [W(q/a; q/b, q/c, q/d, q/e, q) - R]`.
    pub fn rhs(&self) -> Result<Complex> {
        let ctx = &self.ctx;
        let q = ctx.q().clone();
        let [a, b, c, d, e] = self.p.clone();
        if mag(&b) >= 1 {
            return Err(QError::OutOfDomain {
                modulus: mag(&b).to_f64(),
            });
        }
        let a2 = Complex::with_val(ctx.precision_bits(), a.square_ref());
        let q2 = Complex::with_val(ctx.precision_bits(), q.square_ref());
        let bcde = self.bcde();
        let cde = c.clone() * &d * &e;
        let w = eval_w(
            &(q.clone() / &a),
            &[
                q.clone() / &b,
                q.clone() / &c,
                q.clone() / &d,
                q.clone() / &e,
                q.clone(),
            ],
            ctx,
        )?;
        let r1 = self.poch(&[
            q.clone(),
            a.clone(),
            q2.clone() / &a,
            d.clone() * &e / &a,
            d.clone() * &c / &a,
            e.clone() * &c / &a,
        ])? / self.poch(&[
            d.clone() * &q / &a,
            e.clone() * &q / &a,
            c.clone() * &q / &a,
            cde.clone() / (a.clone() * &q),
            a.clone() * &q / &b,
            b.clone(),
        ])?;
        let first = self.phi32(
            [q.clone() / &d, q.clone() / &e, q.clone() / &c],
            [q.clone() * &b / &a, q2.clone() * &a / &cde],
            &b,
        )?;
        let second_pref = self.poch(&[
            q.clone() / &d,
            q.clone() / &e,
            q.clone() / &c,
            bcde.clone() / &a2,
            a.clone() * &q / &b,
            b.clone() / &a,
            cde.clone() / &a2,
            a2.clone() * &q / &cde,
            cde.clone() / (a.clone() * &q),
        ])? / self.poch(&[
            e.clone() * &c / &a,
            q.clone() * &b / &a,
            q.clone() * &a / &cde,
            q.clone() / &a,
            a.clone(),
            bcde.clone() / (q.clone() * &a2),
            a2.clone() * &q2 / &bcde,
            d.clone() * &e / &a,
            d.clone() * &c / &a,
        ])?;
        let second = self.phi32(
            [
                d.clone() * &e / &a,
                d.clone() * &c / &a,
                e.clone() * &c / &a,
            ],
            [bcde.clone() / &a2, cde.clone() / &a],
            &b,
        )?;
        let aqb = a.clone() * &q / &b;
        let denom = self.phi32(
            [aqb.clone() / &c, aqb.clone() / &d, aqb.clone() / &e],
            [aqb, a2 * &q2 / &bcde],
            &b,
        )?;
        let r = r1 * (first + second_pref * second)
            / nonzero(ctx, denom, "3phi2 denominator vanishes")?;
        let lead = product(
            ctx,
            &[b.clone(), c.clone(), d.clone(), e.clone()].map(|p| one_minus(&(a.clone() / p))),
        );
        let pref = one_minus(&(a / &q)) / (q * nonzero(ctx, lead, "prod(1 - a/p) vanishes")?);
        Ok(pref * (w - r))
    }
}

/// Both sides of the fraction in `a, b, c, d, e`: the adaptive convergent and the closed form.
pub fn remark3_cf(params: &[Complex; 5], ctx: &QContext) -> Result<(CfValue, Complex)> {
    let r = Remark3::new(params, ctx)?;
    let lhs = eval_cf_default(&r.cf(), ctx)?;
    Ok((lhs, r.rhs()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(x: &Complex, y: &Complex) -> f64 {
        (mag(&(x.clone() - y)) / (mag(x) + mag(y))).to_f64()
    }

    #[test]
    fn constant_fraction_fixed_point() {
        let c = QContext::from_parts(0.5, 0.0, 128).unwrap();
        let spec = CfSpec {
            leading: c.one(),
            partial_den: Box::new(|_| Ok(c.real(2.0))),
            partial_num: Box::new(|_| Ok(c.one())),
            sign: CfSign::Minus,
            terminating_depth: None,
        };
        let v = eval_cf(&spec, 30, &c).unwrap();
        assert!(rel(&v.value, &(c.real(30.0) / 31u32)) < 1e-30);
        let v = eval_cf(&spec, 100_000, &c).unwrap();
        assert!((v.value.real().to_f64() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn depth_one_is_leading_over_d0() {
        let c = QContext::from_parts(0.5, 0.0, 128).unwrap();
        let spec = CfSpec {
            leading: c.real(3.0),
            partial_den: Box::new(|_| Ok(c.real(4.0))),
            partial_num: Box::new(|_| Ok(c.one())),
            sign: CfSign::Plus,
            terminating_depth: None,
        };
        let v = eval_cf(&spec, 1, &c).unwrap();
        assert_eq!(v.value.real().to_f64(), 0.75);
        assert!(eval_cf(&spec, 0, &c).is_err());
    }

    #[test]
    fn zero_final_denominator_is_indeterminate() {
        let c = QContext::from_parts(0.5, 0.0, 128).unwrap();
        let spec = CfSpec {
            leading: c.one(),
            partial_den: Box::new(|_| Ok(c.zero())),
            partial_num: Box::new(|_| Ok(c.one())),
            sign: CfSign::Plus,
            terminating_depth: None,
        };
        assert!(matches!(
            eval_cf(&spec, 1, &c),
            Err(QError::Indeterminate { depth: 1 })
        ));
    }

    #[test]
    fn golden_ratio() {
        let c = QContext::from_parts(0.5, 0.0, 256).unwrap();
        let spec = CfSpec {
            leading: c.one(),
            partial_den: Box::new(|_| Ok(c.one())),
            partial_num: Box::new(|_| Ok(c.one())),
            sign: CfSign::Plus,
            terminating_depth: None,
        };
        let v = eval_cf_default(&spec, &c).unwrap();
        let phi = (c.real(5.0).sqrt() - 1u32) / 2u32;
        assert!(rel(&v.value, &phi) < 1e-34);
        assert!(v.delta < default_tolerance(256));
    }

    #[test]
    fn corollary7_degenerate_alpha_is_a_pole() {
        let c = QContext::from_parts(0.3, 0.0, 128).unwrap();
        let al = [c.one(), c.real(1.3), c.real(0.7), c.real(1.1), c.real(0.9)];
        assert!(matches!(corollary7_rhs(&al, &c), Err(QError::Pole(_))));
    }

    #[test]
    fn watson_needs_termination() {
        let c = QContext::from_parts(0.3, 0.0, 128).unwrap();
        let sm = [
            c.real(1.2),
            c.real(1.3),
            c.real(0.7),
            c.real(1.1),
            c.real(0.9),
        ];
        assert!(matches!(
            watson_theorem_a(&sm, &c),
            Err(QError::InvalidInput(_))
        ));
    }
}
