//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function of
//! `dim` chart variables for every multi-index with `|α| <= order`. Arithmetic and
//! elementary functions propagate these coefficients exactly, so every partial
//! derivative up to `order` is available without finite differencing.
//!
//! Coefficients are stored densely against a canonical enumeration: multi-indices
//! sorted by total degree, then lexicographically (descending in the first
//! variable). The enumeration for order `k` is a prefix of the one for `k + 1`,
//! which makes truncation a slice operation and lets jets of different orders
//! combine at the lower of the two.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Highest order accepted by [`seed_point`].
pub const MAX_ORDER: usize = 3;
/// Embedding charts differentiate once before the metric exists, so they seed
/// one order higher than the caller asked for.
pub(crate) const INTERNAL_MAX_ORDER: usize = MAX_ORDER + 1;
pub const MAX_DIM: usize = 8;

const DIM_SLOTS: usize = MAX_DIM + 1;
const ORDER_SLOTS: usize = INTERNAL_MAX_ORDER + 1;

static LAYOUTS: [[OnceLock<Layout>; ORDER_SLOTS]; DIM_SLOTS] =
    [const { [const { OnceLock::new() }; ORDER_SLOTS] }; DIM_SLOTS];

pub(crate) struct Layout {
    dim: usize,
    order: usize,
    multi: Vec<Vec<u8>>,
    factorial: Vec<f64>,
    /// `(i, j, k)` with `α_i + α_j = α_k`.
    mul: Vec<(u16, u16, u16)>,
    /// Per variable: for each coefficient of the order-1 layout, its source index
    /// here and the factor `β_v + 1`.
    deriv: Vec<Vec<(u16, f64)>>,
}

impl Layout {
    fn get(dim: usize, order: usize) -> &'static Layout {
        assert!(
            (1..=MAX_DIM).contains(&dim) && order <= INTERNAL_MAX_ORDER,
            "jet layout ({dim}, {order}) out of range"
        );
        LAYOUTS[dim][order].get_or_init(|| Layout::build(dim, order))
    }

    fn build(dim: usize, order: usize) -> Layout {
        let mut multi = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; dim];
            enumerate_degree(&mut current, 0, degree, &mut multi);
        }
        let lookup: HashMap<Vec<u8>, usize> =
            multi.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let factorial = multi
            .iter()
            .map(|a| a.iter().map(|&k| factorial(k as usize)).product())
            .collect();

        let degree = |a: &[u8]| a.iter().map(|&k| k as usize).sum::<usize>();
        let mut mul = Vec::new();
        for (i, a) in multi.iter().enumerate() {
            for (j, b) in multi.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u16, j as u16, lookup[&sum] as u16));
            }
        }

        let mut deriv = Vec::new();
        if order > 0 {
            let lower = count(dim, order - 1);
            for v in 0..dim {
                let table = multi[..lower]
                    .iter()
                    .map(|b| {
                        let mut raised = b.clone();
                        raised[v] += 1;
                        (lookup[&raised] as u16, f64::from(b[v]) + 1.0)
                    })
                    .collect();
                deriv.push(table);
            }
        }

        Layout { dim, order, multi, factorial, mul, deriv }
    }

    fn len(&self) -> usize {
        self.multi.len()
    }

    fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        self.multi
            .iter()
            .position(|m| m.iter().zip(alpha).all(|(&a, &b)| a as usize == b))
    }
}

fn enumerate_degree(current: &mut Vec<u8>, pos: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k as u8;
        enumerate_degree(current, pos + 1, remaining - k, out);
    }
    current[pos] = 0;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Number of multi-indices of `dim` variables with total degree at most `order`,
/// i.e. `C(dim + order, order)`.
pub fn count(dim: usize, order: usize) -> usize {
    (1..=order).fold(1usize, |acc, i| acc * (dim + i) / i)
}

/// A truncated Taylor expansion of a scalar function of the chart coordinates.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

/// Seeds one jet per coordinate: value `coords[i]`, unit first partial along `i`.
pub fn seed_point(coords: &[f64], order: usize) -> Result<Vec<Jet>> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    seed_internal(coords, order)
}

pub(crate) fn seed_internal(coords: &[f64], order: usize) -> Result<Vec<Jet>> {
    let dim = coords.len();
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::DimensionMismatch { expected: MAX_DIM, got: dim });
    }
    if order > INTERNAL_MAX_ORDER {
        return Err(Error::InvalidOrder(order));
    }
    let layout = Layout::get(dim, order);
    Ok(coords
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut jet = Jet::from_layout(layout, x);
            if order > 0 {
                // Degree-one block follows the constant; descending-lex puts e_i at 1 + i.
                jet.coeffs[1 + i] = 1.0;
            }
            jet
        })
        .collect())
}

impl Jet {
    fn from_layout(layout: &'static Layout, value: f64) -> Jet {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    /// Constant jet with all derivatives zero.
    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        Jet::from_layout(Layout::get(dim, order), value)
    }

    /// Constant with the same shape as `self`.
    pub fn lift(&self, value: f64) -> Jet {
        Jet::from_layout(self.layout, value)
    }

    pub fn zero_like(&self) -> Jet {
        self.lift(0.0)
    }

    /// Builds a jet from raw coefficients in the canonical enumeration.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        if order > INTERNAL_MAX_ORDER {
            return Err(Error::InvalidOrder(order));
        }
        let layout = Layout::get(dim, order);
        if coeffs.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), got: coeffs.len() });
        }
        Ok(Jet { layout, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-indices matching [`Jet::coeffs`] position by position.
    pub fn multi_indices(&self) -> impl Iterator<Item = &[u8]> {
        self.layout.multi.iter().map(Vec::as_slice)
    }

    /// Raw Taylor coefficient `∂^α f / α!`; zero when `|α|` exceeds the order.
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        self.layout.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    /// The true partial derivative `∂^α f`.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: alpha.len() });
        }
        let got: usize = alpha.iter().sum();
        if got > self.order() {
            return Err(Error::OrderExceeded { got, order: self.order() });
        }
        let i = self.layout.index_of(alpha).expect("multi-index within order");
        Ok(self.layout.factorial[i] * self.coeffs[i])
    }

    /// First partial `∂_var f` at the expansion point.
    pub fn d1(&self, var: usize) -> f64 {
        if self.order() == 0 {
            return 0.0;
        }
        self.coeffs[1 + var]
    }

    /// The jet of `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder { needed: 1, have: 0 });
        }
        let layout = Layout::get(self.dim(), self.order() - 1);
        let coeffs = self.layout.deriv[var]
            .iter()
            .map(|&(src, factor)| factor * self.coeffs[src as usize])
            .collect();
        Ok(Jet { layout, coeffs })
    }

    /// Directional derivative along a constant vector.
    pub fn directional(&self, v: &[f64]) -> Result<Jet> {
        let mut out: Option<Jet> = None;
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let term = self.derivative(i)?.scale(vi);
            out = Some(match out {
                Some(acc) => acc + term,
                None => term,
            });
        }
        match out {
            Some(j) => Ok(j),
            None => Ok(self.derivative(0)?.zero_like()),
        }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.dim(), order);
        Jet { layout, coeffs: self.coeffs[..layout.len()].to_vec() }
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet { layout: self.layout, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// True if every derivative coefficient is exactly zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    fn common(&self, other: &Jet) -> &'static Layout {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        if self.order() <= other.order() {
            self.layout
        } else {
            other.layout
        }
    }

    fn add_jet(&self, other: &Jet, sign: f64) -> Jet {
        let layout = self.common(other);
        let coeffs = (0..layout.len()).map(|i| self.coeffs[i] + sign * other.coeffs[i]).collect();
        Jet { layout, coeffs }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let layout = self.common(other);
        let mut coeffs = vec![0.0; layout.len()];
        for &(i, j, k) in &layout.mul {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet { layout, coeffs }
    }

    /// `f(value + h) = Σ_k derivs[k] / k! · h^k` where `h` is the non-constant part.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = self.lift(derivs[0]);
        let mut power = self.lift(1.0);
        for (k, &d) in derivs.iter().enumerate().skip(1).take(self.order()) {
            power = power.mul_jet(&h);
            let c = d / factorial(k);
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += c * p;
            }
        }
        out
    }

    fn derivs_len(&self) -> usize {
        self.order() + 1
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..self.derivs_len()).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..self.derivs_len()).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.derivs_len()])
    }

    pub fn ln(&self) -> Result<Jet> {
        let x = self.value();
        if !(x > 0.0) {
            return Err(Error::LogDomain(x));
        }
        let mut d = vec![x.ln()];
        for k in 1..self.derivs_len() {
            // d^k/dx^k ln x = (-1)^(k+1) (k-1)! / x^k
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * factorial(k - 1) / x.powi(k as i32));
        }
        Ok(self.compose(&d))
    }

    pub fn recip(&self) -> Result<Jet> {
        let x = self.value();
        if x == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let d: Vec<f64> = (0..self.derivs_len())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(k) / x.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&d))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&other.recip()?))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let x = self.value();
        if !(x > 0.0) {
            return Err(Error::SqrtDomain(x));
        }
        self.powf(0.5)
    }

    /// Real power. Non-negative integer exponents work for any base; anything
    /// else needs a positive value part.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        if p >= 0.0 && p.fract() == 0.0 && p <= 64.0 {
            return Ok(self.powi(p as u32));
        }
        let x = self.value();
        if !(x > 0.0) {
            return Err(Error::PowDomain(x));
        }
        let mut d = Vec::with_capacity(self.derivs_len());
        let mut falling = 1.0;
        for k in 0..self.derivs_len() {
            d.push(falling * x.powf(p - k as f64));
            falling *= p - k as f64;
        }
        Ok(self.compose(&d))
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = self.lift(1.0);
        for _ in 0..n {
            out = out.mul_jet(self);
        }
        out
    }

    /// `self^other` with a jet exponent; falls back to [`Jet::powf`] when the
    /// exponent is constant.
    pub fn pow(&self, other: &Jet) -> Result<Jet> {
        if other.is_constant() {
            return self.powf(other.value());
        }
        Ok(other.mul_jet(&self.ln()?).exp())
    }
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

binary_ops!(Add, add, |a: &Jet, b: &Jet| a.add_jet(b, 1.0));
binary_ops!(Sub, sub, |a: &Jet, b: &Jet| a.add_jet(b, -1.0));
binary_ops!(Mul, mul, |a: &Jet, b: &Jet| a.mul_jet(b));

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = self.add_jet(rhs, 1.0);
        } else {
            for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *a += b;
            }
        }
    }
}
