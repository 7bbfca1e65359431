//! Basic hypergeometric series.
//!
//! One summation engine serves the generic `r phi s`, the terminating
//! very-well-poised balanced `10 phi 9` with argument `q`, and the
//! very-well-poised `8 phi 7` written `W(a; b, c, d, e, f)` with argument
//! `a^2 q^2 / (bcdef)`. The very-well-poised pair `q sqrt(a), -q sqrt(a)` over
//! `sqrt(a), -sqrt(a)` enters only through the weight `(1 - a q^2k)/(1 - a)`,
//! which keeps the square root out of the computation entirely.

use rug::{Complex, Float};

use crate::qcore::{ipow, mag, one_minus, pow2, product, qpoch_multi, QContext};
use crate::{QError, Result};

/// Extra bits carried by the running sum of a series.
const SUM_GUARD_BITS: u32 = 32;

/// Parameters of a generic `r phi s` series.
#[derive(Clone, Debug)]
pub struct PhiSpec {
    pub num: Vec<Complex>,
    pub den: Vec<Complex>,
    pub z: Complex,
}

/// The six free parameters of the very-well-poised family.
#[derive(Clone, Debug)]
pub struct VwpParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    pub e: Complex,
    pub f: Complex,
}

impl VwpParams {
    pub fn new(a: Complex, [b, c, d, e, f]: [Complex; 5]) -> Result<Self> {
        for p in [&b, &c, &d, &e, &f] {
            if p.is_zero() {
                return Err(QError::InvalidInput(
                    "parameters b..f must be nonzero".into(),
                ));
            }
        }
        Ok(Self { a, b, c, d, e, f })
    }

    /// `b, c, d, e, f` as an array.
    pub fn rest(&self) -> [Complex; 5] {
        [
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.e.clone(),
            self.f.clone(),
        ]
    }

    /// `s = a^3 q^3 / (bcdef)`, always recomputed from the parameters.
    pub fn s(&self, ctx: &QContext) -> Complex {
        let aq = ctx.lift(&self.a) * ctx.q();
        let num = ipow(&aq, 3);
        num / product(ctx, &self.rest())
    }
}

/// A `10 phi 9` instance: `a` plus the seven non-special parameters `b..h`.
#[derive(Clone, Debug)]
pub struct Vwp10phi9Instance {
    pub a: Complex,
    pub params: [Complex; 7],
    terminating: Option<usize>,
}

impl Vwp10phi9Instance {
    /// Validates the balance `a^3 q^2 = bcdefgh` to relative `2^(16-P)`.
    pub fn new(a: Complex, params: [Complex; 7], ctx: &QContext) -> Result<Self> {
        let lhs =
            ipow(&ctx.lift(&a), 3) * Complex::with_val(ctx.precision_bits(), ctx.q().square_ref());
        let rhs = product(ctx, &params);
        let tol = pow2(ctx.precision_bits(), 16 - ctx.precision_bits() as i32) * mag(&lhs);
        if mag(&(lhs - &rhs)) > tol {
            return Err(QError::InvalidInput(
                "balance condition a^3 q^2 = bcdefgh violated".into(),
            ));
        }
        let terminating = params
            .iter()
            .filter_map(|p| terminating_order(p, ctx))
            .min();
        Ok(Self {
            a,
            params,
            terminating,
        })
    }

    /// The `n` with some parameter equal to `q^-n`, if any.
    pub fn terminating_order(&self) -> Option<usize> {
        self.terminating
    }
}

/// Smallest `k >= 0` with `x q^k = 1` up to rounding, i.e. `x = q^-k`.
pub fn terminating_order(x: &Complex, ctx: &QContext) -> Option<usize> {
    let zt = ctx.zero_tol();
    let half = Float::with_val(53, 0.5);
    let mut t = ctx.lift(x);
    for k in 0..ctx.max_terms() {
        if mag(&one_minus(&t)) < zt {
            return Some(k);
        }
        if mag(&t) < half {
            return None;
        }
        t *= ctx.q();
    }
    None
}

/// Sum a generic `r phi s` with the standard `((-1)^k q^(k(k-1)/2))^(1+s-r)` factor.
pub fn eval_phi_generic(spec: &PhiSpec, ctx: &QContext) -> Result<Complex> {
    let extra = 1 + spec.den.len() as i32 - spec.num.len() as i32;
    sum_series(ctx, &spec.num, &spec.den, &spec.z, extra, None)
}

/// The terminating very-well-poised balanced `10 phi 9` with argument `q`.
pub fn eval_10phi9(inst: &Vwp10phi9Instance, ctx: &QContext) -> Result<Complex> {
    if inst.terminating.is_none() {
        return Err(QError::Unsupported("non-terminating 10phi9".into()));
    }
    let (num, den) = vwp_lists(&inst.a, &inst.params, ctx);
    sum_series(ctx, &num, &den, ctx.q(), 0, Some(&inst.a))
}

/// `W(a; b,c,d,e,f)`, the very-well-poised `8 phi 7` with argument `a^2 q^2/(bcdef)`.
pub fn eval_w(a: &Complex, rest: &[Complex; 5], ctx: &QContext) -> Result<Complex> {
    let z = w_argument(a, rest, ctx);
    let (num, den) = vwp_lists(a, rest, ctx);
    sum_series(ctx, &num, &den, &z, 0, Some(a))
}

/// `W~(a; b..f) = (aq/b, aq/c, aq/d, aq/e, aq/f)_inf W(a; b..f)`.
pub fn eval_wtilde(a: &Complex, rest: &[Complex; 5], ctx: &QContext) -> Result<Complex> {
    let aq = ctx.lift(a) * ctx.q();
    let xs: Vec<Complex> = rest.iter().map(|p| aq.clone() / p).collect();
    Ok(qpoch_multi(&xs, ctx)?.value * eval_w(a, rest, ctx)?)
}

/// `U(a; b..f) = W~(a; b..f) / (aq, b, c, d, e, f)_inf`.
pub fn eval_u(a: &Complex, rest: &[Complex; 5], ctx: &QContext) -> Result<Complex> {
    let mut xs = vec![ctx.lift(a) * ctx.q()];
    xs.extend(rest.iter().map(|p| ctx.lift(p)));
    let den = qpoch_multi(&xs, ctx)?;
    if den.zero_factors > 0 {
        return Err(QError::Pole("(aq, b, c, d, e, f)_inf vanishes".into()));
    }
    Ok(eval_wtilde(a, rest, ctx)? / den.value)
}

/// `a^2 q^2 / (bcdef)`.
pub fn w_argument(a: &Complex, rest: &[Complex; 5], ctx: &QContext) -> Complex {
    let aq = ctx.lift(a) * ctx.q();
    Complex::with_val(ctx.precision_bits(), aq.square_ref()) / product(ctx, rest)
}

fn vwp_lists(a: &Complex, rest: &[Complex], ctx: &QContext) -> (Vec<Complex>, Vec<Complex>) {
    let aq = ctx.lift(a) * ctx.q();
    let mut num = vec![ctx.lift(a)];
    num.extend(rest.iter().map(|p| ctx.lift(p)));
    let den = rest.iter().map(|p| aq.clone() / p).collect();
    (num, den)
}

/// Forward summation from the term ratio.
///
/// Stops when a numerator factor vanishes (termination) or when the tail
/// estimate `|t_k| / (1 - rho)` drops below `series_tol * |sum|`, with `rho`
/// the modulus ratio of the last two terms. `vwp` supplies the `a` of the
/// weight `(1 - a q^2k)/(1 - a)`.
fn sum_series(
    ctx: &QContext,
    num: &[Complex],
    den: &[Complex],
    z: &Complex,
    extra: i32,
    vwp: Option<&Complex>,
) -> Result<Complex> {
    let p = ctx.precision_bits();
    let zt = ctx.zero_tol();
    let terminates = num.iter().any(|x| terminating_order(x, ctx).is_some());
    if !terminates && mag(z) >= 1 {
        return Err(QError::OutOfDomain {
            modulus: mag(z).to_f64(),
        });
    }
    let weight_den = match vwp {
        Some(a) => {
            let w = one_minus(&ctx.lift(a));
            if mag(&w) < zt {
                return Err(QError::InvalidInput(
                    "very-well-poised series needs a != 1".into(),
                ));
            }
            Some((ctx.lift(a), w))
        }
        None => None,
    };
    let z = ctx.lift(z);
    let mut sum = Complex::with_val(p + SUM_GUARD_BITS, 1);
    let mut t = ctx.one();
    let mut qk = ctx.one();
    let mut prev = Float::with_val(p, 1);
    let one = Float::with_val(p, 1);
    for k in 0..ctx.max_terms() {
        let mut r = z.clone();
        for x in num {
            let f = one_minus(&(x.clone() * &qk));
            if mag(&f) < zt {
                return Ok(ctx.lift(&sum));
            }
            r *= f;
        }
        for x in den {
            let g = one_minus(&(x.clone() * &qk));
            if mag(&g) < zt {
                return Err(QError::Pole(format!(
                    "denominator parameter vanishes at term {}",
                    k + 1
                )));
            }
            r /= g;
        }
        for _ in 0..extra.unsigned_abs() {
            if extra > 0 {
                r *= -qk.clone();
            } else {
                r /= -qk.clone();
            }
        }
        qk *= ctx.q();
        r /= one_minus(&qk);
        t *= r;
        if t.is_zero() {
            return Ok(ctx.lift(&sum));
        }
        let term = match &weight_den {
            Some((a, w)) => {
                let q2k = Complex::with_val(p, qk.square_ref());
                t.clone() * one_minus(&(a.clone() * q2k)) / w
            }
            None => t.clone(),
        };
        sum += &term;
        let tm = mag(&term);
        let rho = Float::with_val(p, &tm / &prev);
        prev = tm.clone();
        if !terminates && k >= 2 && rho < one {
            let tail = tm / (one.clone() - rho);
            if tail <= Float::with_val(p, ctx.series_tol() * mag(&sum)) {
                return Ok(ctx.lift(&sum));
            }
        }
    }
    Err(QError::NonConvergence {
        what: "hypergeometric series".into(),
        terms: ctx.max_terms(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> QContext {
        QContext::from_parts(0.35, 0.12, 256).unwrap()
    }

    fn close(x: &Complex, y: &Complex, tol: f64) -> bool {
        let d = mag(&(x.clone() - y));
        d <= tol * (mag(x) + mag(y))
    }

    #[test]
    fn generic_trivial_cases() {
        let c = ctx();
        let spec = PhiSpec {
            num: vec![c.one(), c.num(0.4, 0.1)],
            den: vec![c.num(0.7, -0.2)],
            z: c.num(0.3, 0.0),
        };
        assert_eq!(eval_phi_generic(&spec, &c).unwrap(), c.one());
        let spec = PhiSpec {
            num: vec![c.num(0.2, 0.1), c.num(0.4, 0.1)],
            den: vec![c.num(0.7, -0.2)],
            z: c.zero(),
        };
        assert_eq!(eval_phi_generic(&spec, &c).unwrap(), c.one());
    }

    #[test]
    fn terminating_4phi3_matches_brute_force() {
        let c = ctx();
        let n = 4usize;
        let num = vec![
            c.powi(-(n as i64)),
            c.num(0.8, 0.3),
            c.num(1.7, -0.4),
            c.num(-0.6, 1.1),
        ];
        let den = vec![c.num(0.9, 0.9), c.num(2.1, 0.2), c.num(-1.3, 0.5)];
        let z = c.q().clone();
        let v = eval_phi_generic(
            &PhiSpec {
                num: num.clone(),
                den: den.clone(),
                z: z.clone(),
            },
            &c,
        )
        .unwrap();
        let mut brute = c.zero();
        for k in 0..=n {
            let mut t = ipow(&z, k as i32);
            for x in &num {
                t *= crate::qcore::qpoch_finite(x, &c, k);
            }
            for x in &den {
                t /= crate::qcore::qpoch_finite(x, &c, k);
            }
            t /= crate::qcore::qpoch_finite(c.q(), &c, k);
            brute += t;
        }
        assert!(close(&v, &brute, 1e-70));
    }

    fn balanced(c: &QContext, n: i64) -> Vwp10phi9Instance {
        let a = c.num(0.7, 0.4);
        let b = c.num(1.3, -0.2);
        let cc = c.num(-0.5, 0.9);
        let d = c.num(2.2, 0.3);
        let e = c.num(0.6, -1.4);
        let f = c.num(-1.1, -0.7);
        let h = c.powi(-n);
        let a3q2 = ipow(&a, 3) * Complex::with_val(256, c.q().square_ref());
        let g = a3q2
            / product(
                c,
                &[
                    b.clone(),
                    cc.clone(),
                    d.clone(),
                    e.clone(),
                    f.clone(),
                    h.clone(),
                ],
            );
        Vwp10phi9Instance::new(a, [b, cc, d, e, f, g, h], c).unwrap()
    }

    #[test]
    fn ten_phi_nine_matches_generic_engine() {
        let c = ctx();
        let inst = balanced(&c, 3);
        assert_eq!(inst.terminating_order(), Some(3));
        let v = eval_10phi9(&inst, &c).unwrap();
        let ra = inst.a.clone().sqrt();
        let qra = ra.clone() * c.q();
        let aq = inst.a.clone() * c.q();
        let mut num = vec![inst.a.clone(), qra.clone(), -qra];
        num.extend(inst.params.iter().cloned());
        let mut den = vec![ra.clone(), -ra];
        den.extend(inst.params.iter().map(|p| aq.clone() / p));
        let g = eval_phi_generic(
            &PhiSpec {
                num,
                den,
                z: c.q().clone(),
            },
            &c,
        )
        .unwrap();
        assert!(close(&v, &g, 1e-70));
    }

    #[test]
    fn ten_phi_nine_zero_order_and_balance() {
        let c = ctx();
        let inst = balanced(&c, 0);
        assert_eq!(eval_10phi9(&inst, &c).unwrap(), c.one());
        let mut params = balanced(&c, 2).params;
        params[0] *= c.real(1.001);
        assert!(Vwp10phi9Instance::new(c.num(0.7, 0.4), params, &c).is_err());
    }

    #[test]
    fn w_trivial_and_terminating() {
        let c = ctx();
        let a = c.num(0.5, 0.2);
        let rest = [
            c.one(),
            c.num(2.0, 0.1),
            c.num(1.5, -0.3),
            c.num(1.2, 0.8),
            c.num(2.5, 0.0),
        ];
        assert_eq!(eval_w(&a, &rest, &c).unwrap(), c.one());
        let rest = [
            c.num(0.9, 0.1),
            c.num(2.0, 0.1),
            c.num(1.5, -0.3),
            c.num(1.2, 0.8),
            c.powi(-2),
        ];
        let v = eval_w(&a, &rest, &c).unwrap();
        let z = w_argument(&a, &rest, &c);
        let aq = a.clone() * c.q();
        let mut brute = c.zero();
        for k in 0..=2usize {
            let q2k = c.powi(2 * k as i64);
            let mut t = one_minus(&(a.clone() * q2k)) / one_minus(&a);
            t *= crate::qcore::qpoch_finite(&a, &c, k);
            for p in &rest {
                t *= crate::qcore::qpoch_finite(p, &c, k);
                t /= crate::qcore::qpoch_finite(&(aq.clone() / p), &c, k);
            }
            t /= crate::qcore::qpoch_finite(c.q(), &c, k);
            t *= ipow(&z, k as i32);
            brute += t;
        }
        assert!(close(&v, &brute, 1e-70));
    }

    #[test]
    fn w_out_of_domain() {
        let c = ctx();
        let a = c.real(3.0);
        let rest = [
            c.real(0.7),
            c.real(0.8),
            c.real(0.9),
            c.real(0.75),
            c.real(0.85),
        ];
        assert!(matches!(
            eval_w(&a, &rest, &c),
            Err(QError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn u_pole_and_composition() {
        let c = ctx();
        let a = c.num(0.4, 0.1);
        let rest = [
            c.one(),
            c.num(2.0, 0.1),
            c.num(1.5, -0.3),
            c.num(1.2, 0.8),
            c.num(2.5, 0.0),
        ];
        assert!(matches!(eval_u(&a, &rest, &c), Err(QError::Pole(_))));
        let rest = [
            c.num(1.1, 0.4),
            c.num(2.0, 0.1),
            c.num(1.5, -0.3),
            c.num(1.2, 0.8),
            c.num(2.5, 0.0),
        ];
        let u = eval_u(&a, &rest, &c).unwrap();
        let wt = eval_wtilde(&a, &rest, &c).unwrap();
        let mut xs = vec![a.clone() * c.q()];
        xs.extend(rest.iter().cloned());
        let den = qpoch_multi(&xs, &c).unwrap().value;
        assert!(close(&(u * den), &wt, 1e-70));
    }
}
