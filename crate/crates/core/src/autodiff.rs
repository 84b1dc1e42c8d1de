//! Reverse-mode scalar automatic differentiation on a recording tape.
//!
//! [`DiffScalar`] implements [`Scalar`], so any generic routine in this crate
//! can be differentiated by evaluating it on tape variables. Constants created
//! through `Scalar::from_f64` never touch the tape; a node is recorded only
//! when at least one operand depends on a variable. Losses are scalar while
//! parameter vectors reach into the hundreds (network weights), so reverse
//! mode costs one backward sweep instead of one forward sweep per parameter.
//!
//! Domain violations (division by zero, `ln`/`sqrt` of a non-positive value)
//! do not panic: the offending primitive is recorded on the tape and surfaces
//! as an error from [`gradient`] after the forward pass.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::math::Scalar;

/// Sentinel parent index for unused slots.
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    parent: [u32; 2],
    weight: [f64; 2],
}

/// The primitive that triggered a domain violation during the forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primitive {
    Div,
    Ln,
    Sqrt,
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::Div => write!(f, "div"),
            Primitive::Ln => write!(f, "ln"),
            Primitive::Sqrt => write!(f, "sqrt"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AdError {
    #[error("domain violation in `{primitive}` at argument {argument}")]
    Domain { primitive: Primitive, argument: f64 },
}

/// Recording tape. One tape per differentiation; not shareable across threads.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    violation: Cell<Option<(Primitive, f64)>>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: RefCell::new(Vec::new()),
            violation: Cell::new(None),
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
            violation: Cell::new(None),
        }
    }

    /// Drop all recorded nodes but keep the allocation. Scalars created
    /// before the reset must not be used afterwards.
    pub fn reset(&self) {
        self.nodes.borrow_mut().clear();
        self.violation.set(None);
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Create an input variable.
    pub fn var(&self, value: f64) -> DiffScalar<'_> {
        let idx = self.push(Node {
            parent: [NONE, NONE],
            weight: [0.0, 0.0],
        });
        DiffScalar {
            value,
            node: Some((self, idx)),
        }
    }

    fn push(&self, node: Node) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len();
        nodes.push(node);
        idx as u32
    }

    fn record_violation(&self, primitive: Primitive, argument: f64) {
        if self.violation.get().is_none() {
            self.violation.set(Some((primitive, argument)));
        }
    }

    /// First domain violation recorded since the last reset, if any.
    pub fn check(&self) -> Result<(), AdError> {
        match self.violation.get() {
            Some((primitive, argument)) => Err(AdError::Domain {
                primitive,
                argument,
            }),
            None => Ok(()),
        }
    }

    /// Accumulate adjoints of `root` with respect to every node, visiting the
    /// tape exactly once in reverse order.
    pub fn backward(&self, root: DiffScalar<'_>) -> Gradients {
        let nodes = self.nodes.borrow();
        let mut adjoint = vec![0.0; nodes.len()];
        if let Some((_, idx)) = root.node {
            adjoint[idx as usize] = 1.0;
            for i in (0..nodes.len()).rev() {
                let d = adjoint[i];
                if d == 0.0 {
                    continue;
                }
                let n = &nodes[i];
                for k in 0..2 {
                    if n.parent[k] != NONE {
                        adjoint[n.parent[k] as usize] += n.weight[k] * d;
                    }
                }
            }
        }
        Gradients { adjoint }
    }
}

/// Adjoints produced by [`Tape::backward`].
pub struct Gradients {
    adjoint: Vec<f64>,
}

impl Gradients {
    /// Derivative of the backward root with respect to `x`.
    /// Constants (scalars without a tape node) have gradient 0.
    pub fn wrt(&self, x: DiffScalar<'_>) -> f64 {
        match x.node {
            Some((_, idx)) => self.adjoint[idx as usize],
            None => 0.0,
        }
    }
}

/// Scalar participating in reverse-mode gradient accumulation.
///
/// Arithmetic reproduces plain `f64` arithmetic on values exactly; the tape
/// records local partial derivatives on the side.
#[derive(Clone, Copy)]
pub struct DiffScalar<'t> {
    value: f64,
    node: Option<(&'t Tape, u32)>,
}

impl fmt::Debug for DiffScalar<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffScalar({})", self.value)
    }
}

impl<'t> DiffScalar<'t> {
    pub fn constant(value: f64) -> Self {
        Self { value, node: None }
    }

    fn tape(&self) -> Option<&'t Tape> {
        self.node.map(|(t, _)| t)
    }

    fn unary(self, value: f64, dv: f64) -> Self {
        match self.node {
            Some((tape, idx)) => {
                let out = tape.push(Node {
                    parent: [idx, NONE],
                    weight: [dv, 0.0],
                });
                Self {
                    value,
                    node: Some((tape, out)),
                }
            }
            None => Self::constant(value),
        }
    }

    fn binary(self, rhs: Self, value: f64, dl: f64, dr: f64) -> Self {
        let tape = match self.tape().or_else(|| rhs.tape()) {
            Some(t) => t,
            None => return Self::constant(value),
        };
        let (pl, wl) = match self.node {
            Some((_, i)) => (i, dl),
            None => (NONE, 0.0),
        };
        let (pr, wr) = match rhs.node {
            Some((_, i)) => (i, dr),
            None => (NONE, 0.0),
        };
        let out = tape.push(Node {
            parent: [pl, pr],
            weight: [wl, wr],
        });
        Self {
            value,
            node: Some((tape, out)),
        }
    }
}

impl PartialEq for DiffScalar<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for DiffScalar<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl<'t> Add for DiffScalar<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for DiffScalar<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for DiffScalar<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for DiffScalar<'t> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if rhs.value == 0.0 {
            if let Some(t) = self.tape().or_else(|| rhs.tape()) {
                t.record_violation(Primitive::Div, rhs.value);
            }
        }
        let inv = 1.0 / rhs.value;
        self.binary(rhs, self.value * inv, inv, -self.value * inv * inv)
    }
}

impl<'t> Neg for DiffScalar<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(-self.value, -1.0)
    }
}

impl<'t> Scalar for DiffScalar<'t> {
    fn from_f64(v: f64) -> Self {
        Self::constant(v)
    }

    fn value(self) -> f64 {
        self.value
    }

    fn sin(self) -> Self {
        self.unary(self.value.sin(), self.value.cos())
    }

    fn cos(self) -> Self {
        self.unary(self.value.cos(), -self.value.sin())
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(e, e)
    }

    fn ln(self) -> Self {
        if self.value <= 0.0 {
            if let Some(t) = self.tape() {
                t.record_violation(Primitive::Ln, self.value);
            }
        }
        self.unary(self.value.ln(), 1.0 / self.value)
    }

    fn sqrt(self) -> Self {
        if self.value <= 0.0 {
            if let Some(t) = self.tape() {
                t.record_violation(Primitive::Sqrt, self.value);
            }
        }
        let r = self.value.sqrt();
        self.unary(r, 0.5 / r)
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.unary(t, 1.0 - t * t)
    }

    fn abs(self) -> Self {
        // Subgradient 0 at exactly 0.
        self.unary(self.value.abs(), Scalar::sign(self.value))
    }

    fn relu(self) -> Self {
        let active = self.value > 0.0;
        self.unary(
            if active { self.value } else { 0.0 },
            if active { 1.0 } else { 0.0 },
        )
    }

    fn softplus(self) -> Self {
        let v = Scalar::softplus(self.value);
        // d/dx ln(1+exp(x)) = sigmoid(x), evaluated stably on both tails.
        let d = if self.value >= 0.0 {
            1.0 / (1.0 + (-self.value).exp())
        } else {
            let e = self.value.exp();
            e / (1.0 + e)
        };
        self.unary(v, d)
    }

    fn sign(self) -> Self {
        // Piecewise constant: derivative 0 everywhere.
        Self::constant(Scalar::sign(self.value))
    }
}

/// A scalar-valued function evaluable on both `f64` and [`DiffScalar`].
///
/// Rust closures cannot be generic over the scalar type, so gradient checking
/// takes a small trait object instead: implement `eval` once and the same
/// code path runs under the tape and under finite differences.
pub trait ScalarFn {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

impl<T: ScalarFn + ?Sized> ScalarFn for &T {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        (**self).eval(x)
    }
}

/// Gradient of `f` at `x` by reverse-mode differentiation.
pub fn gradient<F: ScalarFn>(f: &F, x: &[f64]) -> Result<Vec<f64>, AdError> {
    let tape = Tape::new();
    let vars: Vec<DiffScalar<'_>> = x.iter().map(|&v| tape.var(v)).collect();
    let y = f.eval(&vars);
    tape.check()?;
    let grads = tape.backward(y);
    Ok(vars.iter().map(|v| grads.wrt(*v)).collect())
}

/// Maximum relative disagreement between the reverse-mode gradient and a
/// central finite difference with step `h`:
/// `max_i |ad_i - fd_i| / (|fd_i| + 1e-8)`.
pub fn check_gradient<F: ScalarFn>(f: &F, x: &[f64], h: f64) -> Result<f64, AdError> {
    let ad = gradient(f, x)?;
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f.eval(&xp);
        xp[i] = x[i] - h;
        let fm = f.eval(&xp);
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((ad[i] - fd).abs() / (fd.abs() + 1e-8));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic;
    impl ScalarFn for Quadratic {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0] * x[0] + x[1] * x[1]
        }
    }

    #[test]
    fn quadratic_gradient() {
        let g = gradient(&Quadratic, &[1.0, 2.0]).unwrap();
        assert_eq!(g, vec![2.0, 4.0]);
    }

    #[test]
    fn sin_gradient_at_zero() {
        struct Sin;
        impl ScalarFn for Sin {
            fn eval<S: Scalar>(&self, x: &[S]) -> S {
                x[0].sin()
            }
        }
        let g = gradient(&Sin, &[0.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_function_has_zero_gradient_and_zero_check_error() {
        struct Const;
        impl ScalarFn for Const {
            fn eval<S: Scalar>(&self, _x: &[S]) -> S {
                S::from_f64(4.25)
            }
        }
        let g = gradient(&Const, &[0.3, -0.7]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let err = check_gradient(&Const, &[0.3, -0.7], 1e-6).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn quadratic_check_gradient_is_tight() {
        let err = check_gradient(&Quadratic, &[1.0, 2.0], 1e-6).unwrap();
        assert!(err < 1e-9, "relative error {err}");
    }

    #[test]
    fn division_by_zero_is_reported_with_primitive() {
        struct Inv;
        impl ScalarFn for Inv {
            fn eval<S: Scalar>(&self, x: &[S]) -> S {
                S::one() / (x[0] - x[0])
            }
        }
        let err = gradient(&Inv, &[3.0]).unwrap_err();
        assert_eq!(
            err,
            AdError::Domain {
                primitive: Primitive::Div,
                argument: 0.0
            }
        );
    }

    #[test]
    fn log_of_nonpositive_is_reported() {
        struct Log;
        impl ScalarFn for Log {
            fn eval<S: Scalar>(&self, x: &[S]) -> S {
                x[0].ln()
            }
        }
        assert!(matches!(
            gradient(&Log, &[-1.0]),
            Err(AdError::Domain {
                primitive: Primitive::Ln,
                ..
            })
        ));
        assert!(gradient(&Log, &[2.0]).is_ok());
    }

    #[test]
    fn values_reproduce_plain_arithmetic_exactly() {
        let inputs = [0.37, -1.25, 3.75];
        struct Mix;
        impl ScalarFn for Mix {
            fn eval<S: Scalar>(&self, x: &[S]) -> S {
                let a = x[0] * x[1] - x[2] / x[1];
                let b = a.tanh() + x[0].exp() * x[2].abs().sqrt();
                b * b + a.softplus()
            }
        }
        let on_tape = {
            let tape = Tape::new();
            let vars: Vec<_> = inputs.iter().map(|&v| tape.var(v)).collect();
            Mix.eval(&vars).value()
        };
        let plain = Mix.eval(&inputs);
        assert_eq!(on_tape.to_bits(), plain.to_bits());
    }

    #[test]
    fn gradients_are_bit_deterministic() {
        struct Mix;
        impl ScalarFn for Mix {
            fn eval<S: Scalar>(&self, x: &[S]) -> S {
                (x[0] * x[1]).sin() + (x[1] * x[1] + S::one()).ln() * x[0].tanh()
            }
        }
        let x = [0.8, -0.6];
        let g1 = gradient(&Mix, &x).unwrap();
        let g2 = gradient(&Mix, &x).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn branch_kinks_use_zero_subgradient() {
        struct Kinks;
        impl ScalarFn for Kinks {
            fn eval<S: Scalar>(&self, x: &[S]) -> S {
                x[0].relu() + x[1].abs() + x[2].sign() * x[2]
            }
        }
        let g = gradient(&Kinks, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn tape_reset_keeps_reuse_sound() {
        let tape = Tape::with_capacity(16);
        for k in 0..3 {
            tape.reset();
            let x = tape.var(1.0 + k as f64);
            let y = x * x * x;
            let g = tape.backward(y);
            let expect = 3.0 * (1.0 + k as f64).powi(2);
            assert!((g.wrt(x) - expect).abs() < 1e-12);
        }
    }
}
