//! The obstruction tensors N⁽¹⁾ … N⁽⁵⁾.
//!
//! Arguments are vector fields as jets; pass [`LocalStructure::constant`] for
//! chart-constant extensions and `ls.xi` for the Reeb field itself.

use super::LocalStructure;
use crate::error::Result;
use crate::riemann::{exterior_derivative_eval, Geometry};
use crate::tensor::{bracket, derive_along, JTensor};

/// `N1(X,Y) = [φ,φ](X,Y) + 2 dη(X,Y) ξ`.
pub fn n1(ls: &LocalStructure, x: &JTensor, y: &JTensor) -> Result<JTensor> {
    let nij = Geometry::nijenhuis(&ls.phi, x, y)?;
    let deta = exterior_derivative_eval(&ls.eta, &[x, y])?;
    Ok(nij.add(&ls.xi.scale_jet(deta.at(0)).scale(2.0)))
}

/// `N2(X,Y) = (£_{φX} η)(Y) − (£_{φY} η)(X)`.
pub fn n2(ls: &LocalStructure, x: &JTensor, y: &JTensor) -> Result<JTensor> {
    let a = ls.eta.lie(&ls.phi.act(x))?.contract(0, y);
    let b = ls.eta.lie(&ls.phi.act(y))?.contract(0, x);
    Ok(a.sub(&b))
}

/// `N3(X) = (£_ξ φ)X = [ξ, φX] − φ[ξ, X]`.
pub fn n3(ls: &LocalStructure, x: &JTensor) -> Result<JTensor> {
    let a = bracket(&ls.xi, &ls.phi.act(x))?;
    let b = ls.phi.act(&bracket(&ls.xi, x)?);
    Ok(a.sub(&b))
}

/// `N4(X) = (£_ξ η)(X)`.
pub fn n4(ls: &LocalStructure, x: &JTensor) -> Result<JTensor> {
    Ok(ls.eta.lie(&ls.xi)?.contract(0, x))
}

/// `N5(X,Y,Z)` term by term:
///
/// ```text
/// (φZ)(g(X, Q̃Y)) − (φY)(g(X, Q̃Z)) + g([X, φZ], Q̃Y) − g([X, φY], Q̃Z)
///   + g([Y, φZ] − [Z, φY] − φ[Y, Z], Q̃X)
/// ```
pub fn n5(ls: &LocalStructure, x: &JTensor, y: &JTensor, z: &JTensor) -> Result<JTensor> {
    let g = &ls.geom;
    let qt = ls.q_tilde();
    let (qx, qy, qz) = (qt.act(x), qt.act(y), qt.act(z));
    let (py, pz) = (ls.phi.act(y), ls.phi.act(z));

    let t1 = derive_along(&g.inner(x, &qy), &pz)?;
    let t2 = derive_along(&g.inner(x, &qz), &py)?;
    let t3 = g.inner(&bracket(x, &pz)?, &qy);
    let t4 = g.inner(&bracket(x, &py)?, &qz);
    let w = bracket(y, &pz)?.sub(&bracket(z, &py)?).sub(&ls.phi.act(&bracket(y, z)?));
    let t5 = g.inner(&w, &qx);
    Ok(t1.sub(&t2).add(&t3).sub(&t4).add(&t5))
}

/// `X(g(φY, Q̃Z))`, the term that makes [`n5`] tensorial in `Y` and `Z`.
///
/// Under `Y → fY` the six-term formula picks up `−(Xf) g(φY, Q̃Z)`; this term
/// cancels it and is itself skew in `(Y, Z)`.
pub fn n5_correction(ls: &LocalStructure, x: &JTensor, y: &JTensor, z: &JTensor) -> Result<JTensor> {
    let inner = ls.geom.inner(&ls.phi.act(y), &ls.q_tilde().act(z));
    derive_along(&inner, x)
}

/// The tensor `N5` appearing in the covariant derivative of `φ`:
/// [`n5`] plus [`n5_correction`].
pub fn n5_tensorial(ls: &LocalStructure, x: &JTensor, y: &JTensor, z: &JTensor) -> Result<JTensor> {
    Ok(n5(ls, x, y, z)?.add(&n5_correction(ls, x, y, z)?))
}

/// Point values of `N1, N2, N3, N4, N5` for fixed arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct NTensorValues {
    pub n1: Vec<f64>,
    pub n2: f64,
    pub n3: Vec<f64>,
    pub n4: f64,
    pub n5: f64,
    pub n5_tensorial: f64,
}

/// Evaluates all five tensors on chart-constant extensions of `x, y, z`
/// (N3 and N4 take `x`).
pub fn compute_n_tensors(ls: &LocalStructure, x: &[f64], y: &[f64], z: &[f64]) -> Result<NTensorValues> {
    let (xf, yf, zf) = (ls.constant(x), ls.constant(y), ls.constant(z));
    Ok(NTensorValues {
        n1: n1(ls, &xf, &yf)?.values(),
        n2: n2(ls, &xf, &yf)?.at(0).value(),
        n3: n3(ls, &xf)?.values(),
        n4: n4(ls, &xf)?.at(0).value(),
        n5: n5(ls, &xf, &yf, &zf)?.at(0).value(),
        n5_tensorial: n5_tensorial(ls, &xf, &yf, &zf)?.at(0).value(),
    })
}
