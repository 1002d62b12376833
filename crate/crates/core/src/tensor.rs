//! Tensors whose components are jets.
//!
//! Components are stored row-major in slot order. Christoffel symbols use the
//! layout `Γ[k, i, j] = Γ^k_{ij}`; derivative slots are always appended last.

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JTensor {
    dim: usize,
    slots: Vec<Slot>,
    data: Vec<Jet>,
}

/// Row-major iteration over all index tuples of a given rank.
pub fn indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl JTensor {
    pub fn new(dim: usize, slots: Vec<Slot>, data: Vec<Jet>) -> JTensor {
        assert_eq!(data.len(), dim.pow(slots.len() as u32), "component count");
        JTensor { dim, slots, data }
    }

    pub fn from_fn(dim: usize, slots: Vec<Slot>, mut f: impl FnMut(&[usize]) -> Jet) -> JTensor {
        let data = indices(dim, slots.len()).map(|i| f(&i)).collect();
        JTensor { dim, slots, data }
    }

    pub fn try_from_fn(
        dim: usize,
        slots: Vec<Slot>,
        mut f: impl FnMut(&[usize]) -> Result<Jet>,
    ) -> Result<JTensor> {
        let data = indices(dim, slots.len()).map(|i| f(&i)).collect::<Result<_>>()?;
        Ok(JTensor { dim, slots, data })
    }

    pub fn scalar(j: Jet) -> JTensor {
        JTensor { dim: j.dim(), slots: Vec::new(), data: vec![j] }
    }

    pub fn vector(components: Vec<Jet>) -> JTensor {
        JTensor::new(components.len(), vec![Slot::Up], components)
    }

    pub fn covector(components: Vec<Jet>) -> JTensor {
        JTensor::new(components.len(), vec![Slot::Down], components)
    }

    /// A chart-constant vector field.
    pub fn constant_vector(v: &[f64], order: usize) -> JTensor {
        let dim = v.len();
        JTensor::vector(v.iter().map(|&x| Jet::constant(dim, order, x)).collect())
    }

    pub fn constant(dim: usize, slots: Vec<Slot>, order: usize, values: &[f64]) -> JTensor {
        JTensor::new(dim, slots, values.iter().map(|&x| Jet::constant(dim, order, x)).collect())
    }

    pub fn zeros(dim: usize, slots: Vec<Slot>, order: usize) -> JTensor {
        let n = dim.pow(slots.len() as u32);
        JTensor::new(dim, slots, vec![Jet::constant(dim, order, 0.0); n])
    }

    pub fn identity11(dim: usize, order: usize) -> JTensor {
        JTensor::from_fn(dim, vec![Slot::Up, Slot::Down], |i| {
            Jet::constant(dim, order, if i[0] == i[1] { 1.0 } else { 0.0 })
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn data(&self) -> &[Jet] {
        &self.data
    }

    /// Lowest jet order among the components.
    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[self.flat(idx)]
    }

    pub fn at(&self, i: usize) -> &Jet {
        &self.data[i]
    }

    /// Point values of all components.
    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.get(idx).value()
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JTensor {
        JTensor { dim: self.dim, slots: self.slots.clone(), data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, k: f64) -> JTensor {
        self.map(|j| j.scale(k))
    }

    pub fn scale_jet(&self, k: &Jet) -> JTensor {
        self.map(|j| j * k)
    }

    fn check_shape(&self, other: &JTensor) {
        assert_eq!(self.dim, other.dim, "tensor dimension mismatch");
        assert_eq!(self.slots, other.slots, "tensor slot mismatch");
    }

    pub fn add(&self, other: &JTensor) -> JTensor {
        self.check_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        JTensor { dim: self.dim, slots: self.slots.clone(), data }
    }

    pub fn sub(&self, other: &JTensor) -> JTensor {
        self.check_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        JTensor { dim: self.dim, slots: self.slots.clone(), data }
    }

    pub fn truncate(&self, order: usize) -> JTensor {
        self.map(|j| j.truncate(order))
    }

    /// Coordinate partial derivatives, appended as a trailing slot.
    pub fn partial(&self) -> Result<JTensor> {
        let mut slots = self.slots.clone();
        slots.push(Slot::Down);
        let mut data = Vec::with_capacity(self.data.len() * self.dim);
        for j in &self.data {
            for c in 0..self.dim {
                data.push(j.derivative(c)?);
            }
        }
        Ok(JTensor { dim: self.dim, slots, data })
    }

    /// Replaces index `slot` of `idx` by `value`.
    fn swap_index(idx: &[usize], slot: usize, value: usize) -> Vec<usize> {
        let mut out = idx.to_vec();
        out[slot] = value;
        out
    }

    /// Levi-Civita covariant derivative; the derivative slot is appended last.
    pub fn covariant(&self, gamma: &JTensor) -> Result<JTensor> {
        let d = self.partial()?;
        let n = self.dim;
        let rank = self.rank();
        let mut slots = self.slots.clone();
        slots.push(Slot::Down);
        JTensor::try_from_fn(n, slots, |full| {
            let (idx, c) = (&full[..rank], full[rank]);
            let mut acc = d.get(full).clone();
            for (s, slot) in self.slots.iter().enumerate() {
                for k in 0..n {
                    let moved = self.get(&JTensor::swap_index(idx, s, k));
                    match slot {
                        Slot::Up => acc += &(gamma.get(&[idx[s], c, k]) * moved),
                        Slot::Down => acc += &(-(gamma.get(&[k, c, idx[s]]) * moved)),
                    }
                }
            }
            Ok(acc)
        })
    }

    /// Lie derivative along the vector field `x`.
    pub fn lie(&self, x: &JTensor) -> Result<JTensor> {
        assert_eq!(x.slots, vec![Slot::Up], "lie derivative needs a vector field");
        let dt = self.partial()?;
        let dx = x.partial()?;
        let n = self.dim;
        JTensor::try_from_fn(n, self.slots.clone(), |idx| {
            let mut acc: Option<Jet> = None;
            let mut push = |term: Jet| match acc.as_mut() {
                Some(a) => *a += &term,
                None => acc = Some(term),
            };
            for c in 0..n {
                let mut full = idx.to_vec();
                full.push(c);
                push(x.at(c) * dt.get(&full));
                for (s, slot) in self.slots.iter().enumerate() {
                    let moved = self.get(&JTensor::swap_index(idx, s, c));
                    match slot {
                        Slot::Up => push(-(dx.get(&[idx[s], c]) * moved)),
                        Slot::Down => push(dx.get(&[c, idx[s]]) * moved),
                    }
                }
            }
            Ok(acc.expect("dim >= 1"))
        })
    }

    /// Contracts slot `slot` against the single index of a rank-one tensor.
    pub fn contract(&self, slot: usize, v: &JTensor) -> JTensor {
        assert_eq!(v.rank(), 1, "contraction partner must be rank one");
        let n = self.dim;
        let mut slots = self.slots.clone();
        slots.remove(slot);
        JTensor::from_fn(n, slots, |idx| {
            let mut full = idx.to_vec();
            full.insert(slot, 0);
            let mut acc = self.get(&full) * v.at(0);
            for k in 1..n {
                full[slot] = k;
                acc += &(self.get(&full) * v.at(k));
            }
            acc
        })
    }

    /// Contracts slot `slot` with a constant vector or covector.
    pub fn contract_value(&self, slot: usize, v: &[f64]) -> JTensor {
        let n = self.dim;
        let mut slots = self.slots.clone();
        slots.remove(slot);
        JTensor::from_fn(n, slots, |idx| {
            let mut full = idx.to_vec();
            full.insert(slot, 0);
            let mut acc = self.get(&full) * v[0];
            for (k, &vk) in v.iter().enumerate().skip(1) {
                full[slot] = k;
                acc += &(self.get(&full) * vk);
            }
            acc
        })
    }

    /// Full contraction of point values against one vector per slot.
    pub fn eval(&self, args: &[&[f64]]) -> f64 {
        assert_eq!(args.len(), self.rank());
        indices(self.dim, self.rank())
            .map(|idx| {
                let w: f64 = idx.iter().zip(args).map(|(&i, a)| a[i]).product();
                if w == 0.0 {
                    0.0
                } else {
                    w * self.value(&idx)
                }
            })
            .sum()
    }

    /// Partial evaluation at point values: contracts the listed slots and returns
    /// the remaining component values.
    pub fn eval_partial(&self, args: &[Option<&[f64]>]) -> Vec<f64> {
        let mut t = self.clone();
        for (slot, a) in args.iter().enumerate().rev() {
            if let Some(v) = a {
                t = t.contract_value(slot, v);
            }
        }
        t.values()
    }

    pub fn outer(&self, other: &JTensor) -> JTensor {
        assert_eq!(self.dim, other.dim);
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let r = self.rank();
        JTensor::from_fn(self.dim, slots, |idx| self.get(&idx[..r]) * other.get(&idx[r..]))
    }

    /// Trace over two slots.
    pub fn trace(&self, a: usize, b: usize) -> JTensor {
        assert!(a < b);
        let n = self.dim;
        let mut slots = self.slots.clone();
        slots.remove(b);
        slots.remove(a);
        JTensor::from_fn(n, slots, |idx| {
            let mut full = idx.to_vec();
            full.insert(a, 0);
            full.insert(b, 0);
            let mut acc = self.get(&full).clone();
            for k in 1..n {
                full[a] = k;
                full[b] = k;
                acc += self.get(&full);
            }
            acc
        })
    }

    /// Exchanges two slots.
    pub fn transpose(&self, a: usize, b: usize) -> JTensor {
        let mut slots = self.slots.clone();
        slots.swap(a, b);
        JTensor::from_fn(self.dim, slots, |idx| {
            let mut src = idx.to_vec();
            src.swap(a, b);
            self.get(&src).clone()
        })
    }

    /// Composition of (1,1) tensors: `(A∘B)^i_j = A^i_k B^k_j`.
    pub fn compose(&self, other: &JTensor) -> JTensor {
        self.outer(other).trace(1, 2)
    }

    /// Action of a (1,1) tensor on a vector field.
    pub fn act(&self, v: &JTensor) -> JTensor {
        self.contract(1, v)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|j| j.value().abs()).fold(0.0, f64::max)
    }

    /// Checked structural dimension.
    pub fn expect_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim });
        }
        Ok(())
    }
}

/// Lie bracket of vector fields: `[X,Y]^k = X^i ∂_i Y^k − Y^i ∂_i X^k`.
pub fn bracket(x: &JTensor, y: &JTensor) -> Result<JTensor> {
    let dx = x.partial()?;
    let dy = y.partial()?;
    let n = x.dim();
    Ok(JTensor::from_fn(n, vec![Slot::Up], |k| {
        let k = k[0];
        let mut acc = x.at(0) * dy.get(&[k, 0]) - y.at(0) * dx.get(&[k, 0]);
        for i in 1..n {
            acc += &(x.at(i) * dy.get(&[k, i]) - y.at(i) * dx.get(&[k, i]));
        }
        acc
    }))
}

/// Derivative of a scalar field along a vector field, `X(f)`.
pub fn derive_along(f: &JTensor, x: &JTensor) -> Result<JTensor> {
    assert_eq!(f.rank(), 0);
    Ok(f.partial()?.contract(0, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::seed_point;

    #[test]
    fn bracket_of_x_dy_with_dx() {
        let c = seed_point(&[0.3, -0.2, 1.1], 2).unwrap();
        let zero = c[0].zero_like();
        let one = c[0].lift(1.0);
        let x_dy = JTensor::vector(vec![zero.clone(), c[0].clone(), zero.clone()]);
        let dx = JTensor::vector(vec![one, zero.clone(), zero]);
        let b = bracket(&x_dy, &dx).unwrap();
        assert_eq!(b.values(), vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn bracket_is_antisymmetric_and_self_zero() {
        let c = seed_point(&[0.3, -0.2, 1.1], 2).unwrap();
        let x = JTensor::vector(vec![c[1].sin(), &c[0] * &c[2], c[2].cos()]);
        let y = JTensor::vector(vec![&c[0] * &c[0], c[1].exp(), &c[1] + &c[2]]);
        let xy = bracket(&x, &y).unwrap().values();
        let yx = bracket(&y, &x).unwrap().values();
        for (a, b) in xy.iter().zip(&yx) {
            assert!((a + b).abs() < 1e-15);
        }
        assert!(bracket(&x, &x).unwrap().values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn lie_of_function_is_directional_derivative() {
        let c = seed_point(&[0.4, 0.9], 2).unwrap();
        let f = JTensor::scalar(&c[0] * &c[1].sin());
        let x = JTensor::vector(vec![c[1].clone(), c[0].clone()]);
        let lie = f.lie(&x).unwrap();
        let direct = derive_along(&f, &x).unwrap();
        assert!((lie.at(0).value() - direct.at(0).value()).abs() < 1e-15);
    }

    #[test]
    fn trace_and_compose_of_identity() {
        let id = JTensor::identity11(3, 1);
        assert_eq!(id.trace(0, 1).at(0).value(), 3.0);
        assert_eq!(id.compose(&id).values(), id.values());
    }

    #[test]
    fn eval_matches_contractions() {
        let t = JTensor::constant(2, vec![Slot::Down, Slot::Down], 1, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.eval(&[&[1.0, 0.0], &[0.0, 1.0]]), 2.0);
        assert_eq!(t.eval(&[&[1.0, 1.0], &[1.0, 1.0]]), 10.0);
        assert_eq!(t.eval_partial(&[Some(&[0.0, 1.0]), None]), vec![3.0, 4.0]);
    }
}
