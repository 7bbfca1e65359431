//! The three-term recurrence `X_{n+1} - a_n X_n + b_n X_{n-1} = 0`.
//!
//! Coefficients are closed forms in `q^n` and accept complex `n`. Two
//! explicit solutions are available: `x1` for any `s`, `x2` when
//! `s = q^m`, and their combination `x3 = W2 x1 - W1 x2`, which is the
//! minimal solution inside the annulus `|s/q| < |a| < |s/q^2|`.
//!
//! When `s = q` or `s = q^2` some closed forms are `0/0` at small integer
//! `n`; [`RecurrenceInstance::a`], [`RecurrenceInstance::b`], `x1` and `x2`
//! then take the limit in continuous `n` through
//! [`removable_limit`](crate::qcore::removable_limit).

use rug::Complex;

use crate::hyperq::{eval_10phi9, eval_w, Vwp10phi9Instance, VwpParams};
use crate::qcore::{ipow, mag, one_minus, product, qpoch_multi, removable_limit, QContext};
use crate::{QError, Result};

/// Which limit defines a coefficient at a point where its closed form is `0/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitPath {
    /// Fix `s` and let the index `n` tend to the integer.
    Index,
    /// Fix the integer index and let `s` tend to its value.
    Parameter,
}

/// Which of the two explicit solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solution {
    First,
    Second,
}

/// A point of the very-well-poised family together with the branch of `sqrt(s)`.
#[derive(Clone, Debug)]
pub struct RecurrenceInstance {
    ctx: QContext,
    params: VwpParams,
    sqrt_s: Complex,
    exponent: Option<i64>,
}

/// A prefactor value and whether its numerator contains an exact zero factor.
struct Prefactor {
    value: Complex,
    vanishes: bool,
}

impl RecurrenceInstance {
    /// Generic `s`, principal `sqrt(s)`.
    pub fn new(ctx: &QContext, params: VwpParams) -> Self {
        let s = params.s(ctx);
        Self {
            ctx: ctx.clone(),
            params,
            sqrt_s: s.sqrt(),
            exponent: None,
        }
    }

    /// `s = q^m` with `f` solved from `a, b, c, d, e`; `sqrt(s) = q^(m/2)`.
    pub fn with_exponent(ctx: &QContext, a: &Complex, bcde: &[Complex; 4], m: i64) -> Result<Self> {
        let f = solve_f(ctx, a, bcde, m);
        let [b, c, d, e] = bcde.clone().map(|x| ctx.lift(&x));
        let params = VwpParams::new(ctx.lift(a), [b, c, d, e, f])?;
        let sqrt_s = ctx.pow_f64(m as f64 / 2.0)?;
        Ok(Self {
            ctx: ctx.clone(),
            params,
            sqrt_s,
            exponent: Some(m),
        })
    }

    /// Override the branch of `sqrt(s)`; `r^2` must equal `s`.
    pub fn with_sqrt_s(mut self, r: &Complex) -> Result<Self> {
        let s = self.s();
        let r = self.ctx.lift(r);
        let d = Complex::with_val(self.ctx.precision_bits(), r.square_ref()) - &s;
        if mag(&d) > self.ctx.zero_tol() * mag(&s) {
            return Err(QError::InvalidInput("sqrt_s does not square to s".into()));
        }
        self.sqrt_s = r;
        Ok(self)
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn params(&self) -> &VwpParams {
        &self.params
    }

    pub fn sqrt_s(&self) -> &Complex {
        &self.sqrt_s
    }

    pub fn exponent(&self) -> Option<i64> {
        self.exponent
    }

    pub fn s(&self) -> Complex {
        self.params.s(&self.ctx)
    }

    /// The same point at another precision. With `s = q^m` the parameter `f`
    /// is re-solved so that `s` stays exactly `q^m` at the new precision.
    pub fn at_precision(&self, bits: u32) -> Self {
        let ctx = self.ctx.with_precision(bits);
        let p = &self.params;
        match self.exponent {
            Some(m) => {
                let bcde = [p.b.clone(), p.c.clone(), p.d.clone(), p.e.clone()];
                Self::with_exponent(&ctx, &p.a, &bcde, m).expect("already validated")
            }
            None => Self {
                params: VwpParams::new(ctx.lift(&p.a), p.rest().map(|x| ctx.lift(&x)))
                    .expect("already validated"),
                sqrt_s: ctx.lift(&self.sqrt_s),
                exponent: None,
                ctx,
            },
        }
    }

    /// The point `(q/a; q/b, ..., q/f)` with `sqrt(s') = q^2 / sqrt(s)`.
    ///
    /// Under this map `s -> q^4/s`, `a_n -> a_{-n-1}` and `b_n -> b_{-n}`.
    pub fn symmetric_image(&self) -> Self {
        let ctx = &self.ctx;
        let q = ctx.q();
        let a = q.clone() / &self.params.a;
        let rest = self.params.rest().map(|p| q.clone() / p);
        let q2 = Complex::with_val(ctx.precision_bits(), q.square_ref());
        Self {
            ctx: ctx.clone(),
            params: VwpParams::new(a, rest).expect("nonzero parameters"),
            sqrt_s: q2 / &self.sqrt_s,
            exponent: self.exponent.map(|m| 4 - m),
        }
    }

    /// `s -> s (1 + delta)` by scaling `f`, with `sqrt(s)` following continuously.
    pub fn perturb_s(&self, delta: &Complex) -> Self {
        let ctx = &self.ctx;
        let one_plus = one_minus(&-ctx.lift(delta));
        let mut params = self.params.clone();
        params.f = params.f.clone() / &one_plus;
        Self {
            ctx: ctx.clone(),
            params,
            sqrt_s: self.sqrt_s.clone() * one_plus.sqrt(),
            exponent: None,
        }
    }

    fn nonzero(&self, x: Complex, what: &str) -> Result<Complex> {
        if mag(&x) < self.ctx.zero_tol() {
            Err(QError::Singular(what.to_string()))
        } else {
            Ok(x)
        }
    }

    /// `a_n` from its closed form, for complex `n`.
    pub fn coeff_a(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let q = ctx.q();
        let a = &self.params.a;
        let ps = self.params.rest();
        let s = self.s();
        let rs = &self.sqrt_s;
        let qn = ctx.pow(n)?;
        let qh = ctx.pow_f64(0.5)?;
        let at = |k: i64| qn.clone() * ctx.powi(k);
        let at2 = |k: i64| Complex::with_val(ctx.precision_bits(), qn.square_ref()) * ctx.powi(k);
        let sa = s.clone() / a;

        let d_t1 = self.nonzero(one_minus(&(s.clone() * at2(0))), "1 - s q^2n")?;
        let d_t2 = self.nonzero(one_minus(&(s.clone() * at2(-2))), "1 - s q^(2n-2)")?;
        let d_all = [
            self.nonzero(one_minus(&(s.clone() * at2(-1))), "1 - s q^(2n-1)")?,
            self.nonzero(one_minus(&(sa.clone() * at(-2))), "1 - (s/a) q^(n-2)")?,
            self.nonzero(one_minus(&(a.clone() * at(1))), "1 - a q^(n+1)")?,
        ];

        let mut t1 = qh.clone() / &qn / rs
            * one_minus(&(s.clone() * at(-1)))
            * one_minus(&(sa.clone() * at(-1)))
            * one_minus(&(sa.clone() * at(-2)));
        for p in &ps {
            t1 *= one_minus(&(a.clone() / p * at(1)));
        }
        t1 /= d_t1;

        let mut t2 = qh.clone() * q / &qn / rs
            * one_minus(&qn)
            * one_minus(&(a.clone() * &qn))
            * one_minus(&(a.clone() * at(1)));
        for p in &ps {
            t2 *= one_minus(&(p.clone() * &sa * at(-2)));
        }
        t2 /= d_t2;

        let mut t3 =
            rs.clone() / a * &qn / &qh * &d_all[0] * one_minus(&(sa.clone() / ctx.powi(2)));
        for p in &ps {
            t3 *= one_minus(p);
        }

        Ok((t1 + t2 + t3) / product(ctx, &d_all))
    }

    /// `b_n` from its closed form, for complex `n`.
    pub fn coeff_b(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let a = &self.params.a;
        let s = self.s();
        let qn = ctx.pow(n)?;
        let q2n = Complex::with_val(ctx.precision_bits(), qn.square_ref());
        let at = |k: i64| qn.clone() * ctx.powi(k);
        let at2 = |k: i64| q2n.clone() * ctx.powi(k);
        let sa = s.clone() / a;

        let d1 = self.nonzero(one_minus(&(s.clone() * at2(-1))), "1 - s q^(2n-1)")?;
        let d2 = self.nonzero(one_minus(&(s.clone() * at2(-2))), "1 - s q^(2n-2)")?;
        let d3 = self.nonzero(one_minus(&(s.clone() * at2(-3))), "1 - s q^(2n-3)")?;

        let mut r = ctx.powi(3) / &q2n / &s * one_minus(&qn) * one_minus(&(s.clone() * at(-2)));
        for p in &self.params.rest() {
            r *= one_minus(&(a.clone() / p * &qn));
            r *= one_minus(&(p.clone() * &sa * at(-2)));
        }
        let d2sq = Complex::with_val(ctx.precision_bits(), d2.square_ref());
        Ok(r / (d1 * d2sq * d3))
    }

    /// `a_n` at an integer index, through the index limit where the closed form is `0/0`.
    pub fn a(&self, n: i64) -> Result<Complex> {
        self.coeff_at(n, true, LimitPath::Index)
    }

    /// `b_n` at an integer index, through the index limit where the closed form is `0/0`.
    pub fn b(&self, n: i64) -> Result<Complex> {
        self.coeff_at(n, false, LimitPath::Index)
    }

    /// `a_n` or `b_n` at an integer index with an explicit choice of limit.
    pub fn coeff_limit(&self, n: i64, is_a: bool, path: LimitPath) -> Result<Complex> {
        self.coeff_at(n, is_a, path)
    }

    fn coeff_at(&self, n: i64, is_a: bool, path: LimitPath) -> Result<Complex> {
        let nc = self.ctx.real(n as f64);
        let eval = |inst: &Self, x: &Complex| {
            if is_a {
                inst.coeff_a(x)
            } else {
                inst.coeff_b(x)
            }
        };
        match eval(self, &nc) {
            Err(QError::Singular(_)) => {}
            other => return other,
        }
        match path {
            LimitPath::Index => removable_limit(&self.ctx, &nc, |g, x| {
                eval(&self.at_precision(g.precision_bits()), x)
            }),
            LimitPath::Parameter => removable_limit(&self.ctx, &self.ctx.zero(), |g, delta| {
                let inst = self.at_precision(g.precision_bits()).perturb_s(delta);
                eval(&inst, &g.real(n as f64))
            }),
        }
    }

    /// `q^(-n^2/2 + n) / s^(n/2)` with `s^(n/2) = exp(n log sqrt(s))`.
    pub fn normalizer(&self, n: &Complex) -> Result<Complex> {
        let ctx = &self.ctx;
        let n = ctx.lift(n);
        let n2 = Complex::with_val(ctx.precision_bits(), n.square_ref());
        let expo = n.clone() - n2 / 2u32;
        let log_rs = self.sqrt_s.clone().ln();
        Ok(ctx.pow(&expo)? / (n * log_rs).exp())
    }

    fn prefactor(&self, which: Solution, n: &Complex) -> Result<Prefactor> {
        let ctx = &self.ctx;
        let a = &self.params.a;
        let ps = self.params.rest();
        let s = self.s();
        let qn = ctx.pow(n)?;
        let q2n = Complex::with_val(ctx.precision_bits(), qn.square_ref());
        let at = |k: i64| qn.clone() * ctx.powi(k);
        let sa = s.clone() / a;
        let (num, den) = match which {
            Solution::First => {
                let num = vec![s.clone() * &q2n / ctx.q(), a.clone() * at(1)];
                let mut den = vec![s.clone() * at(-1), sa.clone() * at(-1)];
                den.extend(ps.iter().map(|p| a.clone() * at(1) / p));
                (num, den)
            }
            Solution::Second => {
                let num = vec![sa.clone() * &qn, s.clone() * &q2n / ctx.q()];
                let mut den = vec![at(1), a.clone() * &qn];
                den.extend(ps.iter().map(|p| p.clone() * &sa * at(-1)));
                (num, den)
            }
        };
        let num = qpoch_multi(&num, ctx)?;
        let den = qpoch_multi(&den, ctx)?;
        if den.zero_factors > 0 {
            return Err(QError::Singular("prefactor denominator vanishes".into()));
        }
        Ok(Prefactor {
            value: self.normalizer(n)? * num.value / den.value,
            vanishes: num.zero_factors > 0,
        })
    }

    fn resolved_prefactor(&self, which: Solution, n: i64) -> Result<Prefactor> {
        let nc = self.ctx.real(n as f64);
        match self.prefactor(which, &nc) {
            Err(QError::Singular(_)) => {}
            other => return other,
        }
        let value = removable_limit(&self.ctx, &nc, |g, x| {
            Ok(self
                .at_precision(g.precision_bits())
                .prefactor(which, x)?
                .value)
        })?;
        Ok(Prefactor {
            value,
            vanishes: false,
        })
    }

    /// First solution at integer `n >= 0`: prefactor times the terminating
    /// `10 phi 9(a; b, c, d, e, f, s q^(n-1), q^-n)`.
    pub fn x1(&self, n: i64) -> Result<Complex> {
        if n < 0 {
            return Err(QError::Unsupported("x1 needs n >= 0".into()));
        }
        let ctx = &self.ctx;
        let pre = self.resolved_prefactor(Solution::First, n)?;
        if pre.vanishes {
            return Ok(ctx.zero());
        }
        let p = &self.params;
        let g = self.s() * ctx.powi(n - 1);
        let h = ctx.powi(-n);
        let inst = Vwp10phi9Instance::new(
            p.a.clone(),
            [
                p.b.clone(),
                p.c.clone(),
                p.d.clone(),
                p.e.clone(),
                p.f.clone(),
                g,
                h,
            ],
            ctx,
        )?;
        Ok(pre.value * eval_10phi9(&inst, ctx)?)
    }

    /// Second solution at integer `n >= 0` for `s = q^m`: prefactor times the
    /// terminating `10 phi 9(q/a; q/b, ..., q/f, q^(2-n)/s, q^(n+1))`.
    pub fn x2(&self, n: i64) -> Result<Complex> {
        let m = match self.exponent {
            Some(m) if m >= 1 => m,
            _ => return Err(QError::Unsupported("x2 needs s = q^m with m >= 1".into())),
        };
        if n < 0 {
            return Err(QError::Unsupported("x2 needs n >= 0".into()));
        }
        let ctx = &self.ctx;
        let pre = self.resolved_prefactor(Solution::Second, n)?;
        if pre.vanishes {
            return Ok(ctx.zero());
        }
        if n + m - 2 < 0 {
            return Err(QError::Unsupported(
                "second solution does not terminate here".into(),
            ));
        }
        let q = ctx.q();
        let p = &self.params;
        let inv = |x: &Complex| q.clone() / x;
        let inst = Vwp10phi9Instance::new(
            inv(&p.a),
            [
                inv(&p.b),
                inv(&p.c),
                inv(&p.d),
                inv(&p.e),
                inv(&p.f),
                ctx.powi(2 - n - m),
                ctx.powi(n + 1),
            ],
            ctx,
        )?;
        Ok(pre.value * eval_10phi9(&inst, ctx)?)
    }

    /// `W1 = W(a; b..f)` and `W2 = W(q/a; q/b..q/f)`.
    pub fn w1_w2(&self) -> Result<(Complex, Complex)> {
        let ctx = &self.ctx;
        let q = ctx.q();
        let p = &self.params;
        let w1 = eval_w(&p.a, &p.rest(), ctx)?;
        let w2 = eval_w(&(q.clone() / &p.a), &p.rest().map(|x| q.clone() / x), ctx)?;
        Ok((w1, w2))
    }

    /// Minimal solution `W2 x1 - W1 x2`.
    pub fn x3(&self, n: i64) -> Result<Complex> {
        let (w1, w2) = self.w1_w2()?;
        self.x3_with(n, &w1, &w2)
    }

    /// `W2 x1(n) - W1 x2(n)` with precomputed `W1, W2`.
    pub fn x3_with(&self, n: i64, w1: &Complex, w2: &Complex) -> Result<Complex> {
        Ok(w2.clone() * self.x1(n)? - w1.clone() * self.x2(n)?)
    }

    /// Whether `|s/q| < |a| < |s/q^2|`, where both `W1` and `W2` converge.
    pub fn in_annulus(&self) -> bool {
        let q = self.ctx.q();
        let s = self.s();
        let lo = mag(&(s.clone() / q));
        let hi = mag(&(s / Complex::with_val(self.ctx.precision_bits(), q.square_ref())));
        let am = mag(&self.params.a);
        lo < am && am < hi
    }
}

/// `f = a^3 q^3 / (bcde q^m)`.
pub fn solve_f(ctx: &QContext, a: &Complex, bcde: &[Complex; 4], m: i64) -> Complex {
    let aq = ctx.lift(a) * ctx.q();
    ipow(&aq, 3) / product(ctx, bcde) / ctx.powi(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> QContext {
        QContext::from_parts(0.32, 0.11, 256).unwrap()
    }

    fn generic(c: &QContext) -> RecurrenceInstance {
        let p = VwpParams::new(
            c.num(0.6, 0.3),
            [
                c.num(1.3, -0.2),
                c.num(-0.5, 0.9),
                c.num(2.2, 0.3),
                c.num(0.6, -1.4),
                c.num(-1.1, -0.7),
            ],
        )
        .unwrap();
        RecurrenceInstance::new(c, p)
    }

    fn rel(x: &Complex, y: &Complex) -> f64 {
        (mag(&(x.clone() - y)) / (mag(x) + mag(y))).to_f64()
    }

    #[test]
    fn b_vanishes_at_zero_for_generic_s() {
        let c = ctx();
        let i = generic(&c);
        assert!(mag(&i.coeff_b(&c.zero()).unwrap()) < 1e-70);
    }

    #[test]
    fn first_solution_satisfies_recurrence() {
        let c = ctx();
        let i = generic(&c);
        let xs: Vec<Complex> = (0..8).map(|n| i.x1(n).unwrap()).collect();
        for n in 1..7 {
            let lhs = xs[n as usize + 1].clone();
            let rhs = i.a(n).unwrap() * &xs[n as usize] - i.b(n).unwrap() * &xs[n as usize - 1];
            assert!(rel(&lhs, &rhs) < 1e-60, "n = {n}");
        }
    }

    #[test]
    fn second_solution_with_limits() {
        let c = ctx();
        for m in 1..=4 {
            let bcde = [
                c.num(1.3, -0.2),
                c.num(-0.5, 0.9),
                c.num(0.8, 0.3),
                c.num(0.6, -1.4),
            ];
            let i = RecurrenceInstance::with_exponent(&c, &c.num(0.2, 0.1), &bcde, m).unwrap();
            let x: Vec<Complex> = (0..6).map(|n| i.x2(n).unwrap()).collect();
            let y: Vec<Complex> = (0..6).map(|n| i.x1(n).unwrap()).collect();
            for n in 1..5usize {
                let an = i.a(n as i64).unwrap();
                let bn = i.b(n as i64).unwrap();
                let r2 = an.clone() * &x[n] - bn.clone() * &x[n - 1];
                let r1 = an * &y[n] - bn * &y[n - 1];
                assert!(rel(&x[n + 1], &r2) < 1e-50, "x2 m = {m} n = {n}");
                assert!(rel(&y[n + 1], &r1) < 1e-50, "x1 m = {m} n = {n}");
            }
        }
    }

    #[test]
    fn symmetry_maps_coefficients() {
        let c = ctx();
        let i = generic(&c);
        let j = i.symmetric_image();
        for n in [0.0, 1.0, 2.5, 0.37] {
            let nn = c.real(n);
            let image = -nn.clone() - c.one();
            assert!(rel(&j.coeff_a(&image).unwrap(), &i.coeff_a(&nn).unwrap()) < 1e-60);
            let next = nn.clone() + c.one();
            assert!(rel(&j.coeff_b(&image).unwrap(), &i.coeff_b(&next).unwrap()) < 1e-60);
        }
    }
}
