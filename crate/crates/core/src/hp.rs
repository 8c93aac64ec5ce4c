//! Arbitrary-precision real and complex arithmetic on top of `astro-float`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 128;

/// Environment variable overriding [`DEFAULT_PRECISION`].
pub const PRECISION_ENV: &str = "PBL_PRECISION_BITS";

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working precision from `PBL_PRECISION_BITS`, or the default.
pub fn precision_from_env() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&p: &usize| p >= 32)
        .unwrap_or(DEFAULT_PRECISION)
}

/// A real number carried at a fixed binary precision.
#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    prec: usize,
}

impl Real {
    fn wrap(v: BigFloat, prec: usize) -> Self {
        Self { v, prec }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn zero(prec: usize) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        Self::wrap(BigFloat::from_i64(n, prec), prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        Self::wrap(BigFloat::from_f64(x, prec), prec)
    }

    pub fn from_bigint(n: &BigInt, prec: usize) -> Self {
        Self::parse(&n.to_string(), prec).expect("integer literal parses")
    }

    pub fn from_rational(q: &BigRational, prec: usize) -> Self {
        Self::from_bigint(q.numer(), prec) / Self::from_bigint(q.denom(), prec)
    }

    pub fn parse(s: &str, prec: usize) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, prec, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Self::wrap(v, prec))
        }
    }

    pub fn pi(prec: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.pi(prec, RM)), prec)
    }

    pub fn ln2(prec: usize) -> Self {
        Self::wrap(with_consts(|cc| cc.ln_2(prec, RM)), prec)
    }

    /// Same value carried at a different precision.
    pub fn with_prec(&self, prec: usize) -> Self {
        let mut v = self.v.clone();
        v.set_precision(prec, RM).expect("precision change");
        Self::wrap(v, prec)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.prec, RM), self.prec)
    }

    pub fn exp(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.exp(self.prec, RM, cc)), self.prec)
    }

    pub fn ln(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.ln(self.prec, RM, cc)), self.prec)
    }

    pub fn sin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.sin(self.prec, RM, cc)), self.prec)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.cos(self.prec, RM, cc)), self.prec)
    }

    pub fn atan(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.atan(self.prec, RM, cc)), self.prec)
    }

    /// `x^y` for `x > 0`.
    pub fn pow(&self, y: &Real) -> Self {
        let p = self.prec.max(y.prec);
        Self::wrap(with_consts(|cc| self.v.pow(&y.v, p, RM, cc)), p)
    }

    pub fn powi(&self, n: i64) -> Self {
        let m = self.v.powi(n.unsigned_abs() as usize, self.prec, RM);
        let m = Self::wrap(m, self.prec);
        if n < 0 {
            Self::one(self.prec) / m
        } else {
            m
        }
    }

    /// Angle of `(x, y)` in `(-pi, pi]`.
    pub fn atan2(y: &Real, x: &Real) -> Self {
        let prec = x.prec.max(y.prec);
        if x.is_zero() {
            let half_pi = Self::pi(prec) / Self::from_i64(2, prec);
            return match y.sign() {
                Ordering::Less => -half_pi,
                Ordering::Equal => Self::zero(prec),
                Ordering::Greater => half_pi,
            };
        }
        let base = (y / x).atan();
        if x.sign() == Ordering::Greater {
            base
        } else if y.sign() == Ordering::Less {
            base - Self::pi(prec)
        } else {
            base + Self::pi(prec)
        }
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn sign(&self) -> Ordering {
        if self.v.is_zero() {
            Ordering::Equal
        } else if self.v.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Full-precision decimal string that parses back to the same value.
    pub fn to_decimal(&self) -> String {
        if self.v.is_zero() {
            return "0".to_string();
        }
        // a few guard bits so the printed digits pin down the value
        let wide = self.with_prec(self.prec + 16);
        with_consts(|cc| wide.v.format(Radix::Dec, RM, cc)).expect("decimal format")
    }

    /// Nearest `f64`; saturates to infinity outside the double range.
    pub fn to_f64(&self) -> f64 {
        self.to_decimal().parse().unwrap_or(f64::NAN)
    }

    /// `|self - other| / |other|`, or the absolute difference when `other` is zero.
    pub fn rel_diff(&self, other: &Real) -> f64 {
        let d = (self - other).abs();
        if other.is_zero() {
            d.to_f64()
        } else {
            (d / other.abs()).to_f64()
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec.max(rhs.prec);
                Real::wrap(self.v.$method(&rhs.v, p, RM), p)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(self.v.neg(), self.prec)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(self.v.clone().neg(), self.prec)
    }
}

/// Complex number with [`Real`] parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: Real) -> Self {
        let p = re.prec();
        Self::new(re, Real::zero(p))
    }

    pub fn zero(prec: usize) -> Self {
        Self::from_real(Real::zero(prec))
    }

    pub fn one(prec: usize) -> Self {
        Self::from_real(Real::one(prec))
    }

    pub fn prec(&self) -> usize {
        self.re.prec().max(self.im.prec())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Real {
        Real::atan2(&self.im, &self.re)
    }

    pub fn scale(&self, s: &Real) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        Self::new(&m * self.im.cos(), &m * self.im.sin())
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        Self::new(self.abs().ln(), self.arg())
    }

    /// Principal square root, `Re >= 0`.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.re.is_zero() && self.im.is_zero() {
            return Self::zero(p);
        }
        let two = Real::from_i64(2, p);
        let r = self.abs();
        let a = ((&r + &self.re) / &two).sqrt();
        let b = ((&r - &self.re) / &two).sqrt();
        let b = if self.im.sign() == Ordering::Less {
            -b
        } else {
            b
        };
        Self::new(a, b)
    }

    pub fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 {
            &Self::one(self.prec()) / self
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `"a+bi"` with full-precision decimal parts.
    pub fn to_decimal(&self) -> String {
        let im = self.im.to_decimal();
        if im.starts_with('-') {
            format!("{}{}i", self.re.to_decimal(), im)
        } else {
            format!("{}+{}i", self.re.to_decimal(), im)
        }
    }

    pub fn rel_diff(&self, other: &Complex) -> f64 {
        let d = (self - other).abs();
        let m = other.abs();
        if m.is_zero() {
            d.to_f64()
        } else {
            (d / m).to_f64()
        }
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        Complex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        let d = rhs.norm_sqr();
        let num = self * &rhs.conj();
        Complex::new(&num.re / &d, &num.im / &d)
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, rhs: Complex) -> Complex {
        &self + &rhs
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, rhs: Complex) -> Complex {
        &self - &rhs
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, rhs: Complex) -> Complex {
        &self * &rhs
    }
}

impl Div for Complex {
    type Output = Complex;
    fn div(self, rhs: Complex) -> Complex {
        &self / &rhs
    }
}

/// `Gamma(k/2)` for a positive integer `k`, by recursion from `Gamma(1/2) = sqrt(pi)`
/// and `Gamma(1) = 1`.
pub fn gamma_half_integer(k: u32, prec: usize) -> Real {
    assert!(k > 0, "Gamma has a pole at 0");
    // Gamma(k/2) = prod_{i} (k/2 - i) * Gamma(base)
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    let mut m = k;
    while m > 2 {
        m -= 2;
        num *= m;
        den *= 2;
    }
    let factor = Real::from_rational(&BigRational::new(num, den), prec);
    if m == 1 {
        factor * Real::pi(prec).sqrt()
    } else {
        factor
    }
}

/// `1/Gamma(x)` for `x` in `(1/2) Z`, zero at the poles `x = 0, -1, -2, ...`.
pub fn recip_gamma_half(twice_x: i64, prec: usize) -> Real {
    if twice_x > 0 {
        return Real::one(prec) / gamma_half_integer(twice_x as u32, prec);
    }
    if twice_x % 2 == 0 {
        return Real::zero(prec);
    }
    // Gamma(x) = Gamma(x + m) / (x (x+1) ... (x+m-1)), shifting up to 1/2
    let mut prod = BigRational::from_integer(BigInt::from(1));
    let mut t = twice_x;
    while t < 1 {
        prod *= BigRational::new(BigInt::from(t), BigInt::from(2));
        t += 2;
    }
    debug_assert!(!prod.is_zero());
    Real::from_rational(&prod, prec) / gamma_half_integer(1, prec)
}
