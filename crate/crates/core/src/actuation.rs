//! Joint-independent actuator models mapping desired to applied torque.
//!
//! Five kinds span white-box friction models to black-box networks:
//!
//! * `Identity`     tau = tau_d
//! * `Viscous`      tau = tau_d - mu_v . qd
//! * `Stribeck`     tau = tau_d - sign(qd) . (f_s + f_d . exp(-nu_s qd^2)) - mu_v . qd
//! * `NnFriction`   tau = tau_d - sign(qd) . |net(q, qd)|   (per-joint magnitude)
//! * `NnResidual`   tau = tau_d + net(q, qd)
//! * `FfNn`         tau = net(tau_d, q, qd)
//!
//! Viscous, Stribeck and NnFriction are passive: `(tau - tau_d)^T qd <= 0`
//! for every state, so the actuated system can only dissipate energy.
//! NnResidual and FfNn carry no such guarantee. Friction coefficients are
//! stored as unrestricted square roots so gradient descent cannot drive them
//! negative.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::math::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ActuationError {
    #[error("negative friction coefficient {value} for `{name}`")]
    NegativeCoefficient { name: &'static str, value: f64 },
    #[error("coefficient vector `{name}` has length {got}, expected {expected}")]
    CoefficientLength {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("network input dimension {got}, expected {expected}")]
    InputDimension { got: usize, expected: usize },
}

/// Actuator kind tag, used for CLI flags and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActuatorKind {
    Identity,
    Viscous,
    Stribeck,
    NnFriction,
    NnResidual,
    FfNn,
}

impl ActuatorKind {
    pub const ALL: [ActuatorKind; 6] = [
        ActuatorKind::Identity,
        ActuatorKind::Viscous,
        ActuatorKind::Stribeck,
        ActuatorKind::NnFriction,
        ActuatorKind::NnResidual,
        ActuatorKind::FfNn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ActuatorKind::Identity => "identity",
            ActuatorKind::Viscous => "viscous",
            ActuatorKind::Stribeck => "stribeck",
            ActuatorKind::NnFriction => "nn-friction",
            ActuatorKind::NnResidual => "nn-residual",
            ActuatorKind::FfNn => "ff-nn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// True for kinds whose friction can only remove energy.
    pub fn is_passive(&self) -> bool {
        matches!(
            self,
            ActuatorKind::Identity
                | ActuatorKind::Viscous
                | ActuatorKind::Stribeck
                | ActuatorKind::NnFriction
        )
    }
}

/// Dense feed-forward network with tanh hidden activations and a linear
/// output layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<S> {
    /// Per layer: (weights `out x in`, bias `out`).
    pub layers: Vec<(Vec<Vec<S>>, Vec<S>)>,
}

impl<S: Scalar> Mlp<S> {
    /// Layer sizes include input and output: `[in, h1, ..., out]`.
    /// Weights start at small uniform values scaled by fan-in.
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut layers = Vec::new();
        for win in sizes.windows(2) {
            let (n_in, n_out) = (win[0], win[1]);
            let scale = (1.0 / n_in as f64).sqrt();
            let w = (0..n_out)
                .map(|_| {
                    (0..n_in)
                        .map(|_| S::from_f64(rng.random_range(-scale..scale)))
                        .collect()
                })
                .collect();
            let b = (0..n_out).map(|_| S::zero()).collect();
            layers.push((w, b));
        }
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |(w, _)| w[0].len())
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |(w, _)| w.len())
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|(w, b)| w.iter().map(Vec::len).sum::<usize>() + b.len())
            .sum()
    }

    pub fn params(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in &self.layers {
            for row in w {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(b);
        }
        out
    }

    /// Rebuild with the same shape but parameters taken from `flat`
    /// (ordering matches [`Mlp::params`]).
    pub fn with_params<T: Scalar>(&self, flat: &[T]) -> Mlp<T> {
        let mut it = flat.iter().copied();
        let layers = self
            .layers
            .iter()
            .map(|(w, b)| {
                let w2: Vec<Vec<T>> = w
                    .iter()
                    .map(|row| row.iter().map(|_| it.next().unwrap()).collect())
                    .collect();
                let b2: Vec<T> = b.iter().map(|_| it.next().unwrap()).collect();
                (w2, b2)
            })
            .collect();
        Mlp { layers }
    }

    pub fn to_f64(&self) -> Mlp<f64> {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|(w, b)| {
                    (
                        w.iter()
                            .map(|row| row.iter().map(|s| s.value()).collect())
                            .collect(),
                        b.iter().map(|s| s.value()).collect(),
                    )
                })
                .collect(),
        }
    }
}

/// Feed-forward evaluation. Deterministic; differentiable in both the
/// weights and the input.
pub fn mlp_forward<S: Scalar>(net: &Mlp<S>, input: &[S]) -> Result<Vec<S>, ActuationError> {
    if input.len() != net.input_dim() {
        return Err(ActuationError::InputDimension {
            got: input.len(),
            expected: net.input_dim(),
        });
    }
    let n_layers = net.layers.len();
    let mut x: Vec<S> = input.to_vec();
    for (li, (w, b)) in net.layers.iter().enumerate() {
        let mut y = Vec::with_capacity(w.len());
        for (row, bias) in w.iter().zip(b) {
            let mut acc = *bias;
            for (wi, xi) in row.iter().zip(&x) {
                acc = acc + *wi * *xi;
            }
            y.push(if li + 1 < n_layers { acc.tanh() } else { acc });
        }
        x = y;
    }
    Ok(x)
}

fn sqrt_coeffs(name: &'static str, c: &[f64], n: usize) -> Result<Vec<f64>, ActuationError> {
    if c.len() != n {
        return Err(ActuationError::CoefficientLength {
            name,
            got: c.len(),
            expected: n,
        });
    }
    c.iter()
        .map(|&v| {
            if v < 0.0 {
                Err(ActuationError::NegativeCoefficient { name, value: v })
            } else {
                Ok(v.sqrt())
            }
        })
        .collect()
}

/// Actuator model over `n` joints. Coefficient vectors hold the square roots
/// of the physical coefficients (`mu_v = mu_v_sqrt^2` and so on).
#[derive(Clone, Debug, PartialEq)]
pub enum ActuatorModel<S> {
    Identity,
    Viscous {
        mu_v_sqrt: Vec<S>,
    },
    Stribeck {
        f_s_sqrt: Vec<S>,
        f_d_sqrt: Vec<S>,
        nu_s_sqrt: Vec<S>,
        mu_v_sqrt: Vec<S>,
    },
    NnFriction {
        net: Mlp<S>,
    },
    NnResidual {
        net: Mlp<S>,
    },
    FfNn {
        net: Mlp<S>,
    },
}

impl ActuatorModel<f64> {
    /// Construct from physical coefficients; negatives are rejected so the
    /// passive kinds stay passive.
    pub fn viscous(mu_v: &[f64]) -> Result<Self, ActuationError> {
        Ok(ActuatorModel::Viscous {
            mu_v_sqrt: sqrt_coeffs("mu_v", mu_v, mu_v.len())?,
        })
    }

    pub fn stribeck(
        f_s: &[f64],
        f_d: &[f64],
        nu_s: &[f64],
        mu_v: &[f64],
    ) -> Result<Self, ActuationError> {
        let n = f_s.len();
        Ok(ActuatorModel::Stribeck {
            f_s_sqrt: sqrt_coeffs("f_s", f_s, n)?,
            f_d_sqrt: sqrt_coeffs("f_d", f_d, n)?,
            nu_s_sqrt: sqrt_coeffs("nu_s", nu_s, n)?,
            mu_v_sqrt: sqrt_coeffs("mu_v", mu_v, n)?,
        })
    }

    pub fn network(kind: ActuatorKind, n_joints: usize, hidden: &[usize], seed: u64) -> Self {
        let n_in = match kind {
            ActuatorKind::FfNn => 3 * n_joints,
            _ => 2 * n_joints,
        };
        let mut sizes = vec![n_in];
        sizes.extend_from_slice(hidden);
        sizes.push(n_joints);
        let net = Mlp::new(&sizes, seed);
        match kind {
            ActuatorKind::NnFriction => ActuatorModel::NnFriction { net },
            ActuatorKind::NnResidual => ActuatorModel::NnResidual { net },
            ActuatorKind::FfNn => ActuatorModel::FfNn { net },
            _ => panic!("network constructor called for non-network kind"),
        }
    }
}

impl<S: Scalar> ActuatorModel<S> {
    pub fn kind(&self) -> ActuatorKind {
        match self {
            ActuatorModel::Identity => ActuatorKind::Identity,
            ActuatorModel::Viscous { .. } => ActuatorKind::Viscous,
            ActuatorModel::Stribeck { .. } => ActuatorKind::Stribeck,
            ActuatorModel::NnFriction { .. } => ActuatorKind::NnFriction,
            ActuatorModel::NnResidual { .. } => ActuatorKind::NnResidual,
            ActuatorModel::FfNn { .. } => ActuatorKind::FfNn,
        }
    }

    /// Applied torque from desired torque and joint state.
    pub fn apply(&self, tau_d: &[S], q: &[S], qd: &[S]) -> Result<Vec<S>, ActuationError> {
        match self {
            ActuatorModel::Identity => Ok(tau_d.to_vec()),
            ActuatorModel::Viscous { mu_v_sqrt } => Ok(tau_d
                .iter()
                .zip(qd)
                .zip(mu_v_sqrt)
                .map(|((&t, &v), &ms)| t - ms * ms * v)
                .collect()),
            ActuatorModel::Stribeck {
                f_s_sqrt,
                f_d_sqrt,
                nu_s_sqrt,
                mu_v_sqrt,
            } => Ok((0..tau_d.len())
                .map(|i| {
                    let v = qd[i];
                    let fs = f_s_sqrt[i] * f_s_sqrt[i];
                    let fd = f_d_sqrt[i] * f_d_sqrt[i];
                    let nu = nu_s_sqrt[i] * nu_s_sqrt[i];
                    let mu = mu_v_sqrt[i] * mu_v_sqrt[i];
                    tau_d[i] - v.sign() * (fs + fd * (-nu * v * v).exp()) - mu * v
                })
                .collect()),
            ActuatorModel::NnFriction { net } => {
                let input: Vec<S> = q.iter().chain(qd).copied().collect();
                let f = mlp_forward(net, &input)?;
                Ok(tau_d
                    .iter()
                    .zip(qd)
                    .zip(f)
                    .map(|((&t, &v), fi)| t - v.sign() * fi.abs())
                    .collect())
            }
            ActuatorModel::NnResidual { net } => {
                let input: Vec<S> = q.iter().chain(qd).copied().collect();
                let f = mlp_forward(net, &input)?;
                Ok(tau_d.iter().zip(f).map(|(&t, fi)| t + fi).collect())
            }
            ActuatorModel::FfNn { net } => {
                let input: Vec<S> = tau_d.iter().chain(q).chain(qd).copied().collect();
                mlp_forward(net, &input)
            }
        }
    }

    /// Desired torque that would have produced `tau_applied`; defined for
    /// every kind whose friction is additive in `tau_d`. `FfNn` has no
    /// closed-form inverse and returns `None`.
    pub fn desired_from_applied(
        &self,
        tau_applied: &[S],
        q: &[S],
        qd: &[S],
    ) -> Result<Option<Vec<S>>, ActuationError> {
        if matches!(self, ActuatorModel::FfNn { .. }) {
            return Ok(None);
        }
        // tau = tau_d + r(q, qd)  =>  tau_d = tau - r(q, qd), with the
        // residual obtained by applying the model to zero desired torque.
        let zero = vec![S::zero(); tau_applied.len()];
        let residual = self.apply(&zero, q, qd)?;
        Ok(Some(
            tau_applied
                .iter()
                .zip(residual)
                .map(|(&t, r)| t - r)
                .collect(),
        ))
    }

    /// Flat trainable parameter vector (square-root coefficients or weights).
    pub fn params(&self) -> Vec<S> {
        match self {
            ActuatorModel::Identity => Vec::new(),
            ActuatorModel::Viscous { mu_v_sqrt } => mu_v_sqrt.clone(),
            ActuatorModel::Stribeck {
                f_s_sqrt,
                f_d_sqrt,
                nu_s_sqrt,
                mu_v_sqrt,
            } => {
                let mut out = f_s_sqrt.clone();
                out.extend_from_slice(f_d_sqrt);
                out.extend_from_slice(nu_s_sqrt);
                out.extend_from_slice(mu_v_sqrt);
                out
            }
            ActuatorModel::NnFriction { net }
            | ActuatorModel::NnResidual { net }
            | ActuatorModel::FfNn { net } => net.params(),
        }
    }

    /// Rebuild with parameters from `flat` (ordering matches [`params`]).
    pub fn with_params<T: Scalar>(&self, flat: &[T]) -> ActuatorModel<T> {
        match self {
            ActuatorModel::Identity => ActuatorModel::Identity,
            ActuatorModel::Viscous { mu_v_sqrt } => ActuatorModel::Viscous {
                mu_v_sqrt: flat[..mu_v_sqrt.len()].to_vec(),
            },
            ActuatorModel::Stribeck { f_s_sqrt, .. } => {
                let n = f_s_sqrt.len();
                ActuatorModel::Stribeck {
                    f_s_sqrt: flat[..n].to_vec(),
                    f_d_sqrt: flat[n..2 * n].to_vec(),
                    nu_s_sqrt: flat[2 * n..3 * n].to_vec(),
                    mu_v_sqrt: flat[3 * n..4 * n].to_vec(),
                }
            }
            ActuatorModel::NnFriction { net } => ActuatorModel::NnFriction {
                net: net.with_params(flat),
            },
            ActuatorModel::NnResidual { net } => ActuatorModel::NnResidual {
                net: net.with_params(flat),
            },
            ActuatorModel::FfNn { net } => ActuatorModel::FfNn {
                net: net.with_params(flat),
            },
        }
    }

    /// True when the parameter vector holds network weights (these train at
    /// the network learning rate).
    pub fn params_are_weights(&self) -> bool {
        matches!(
            self,
            ActuatorModel::NnFriction { .. }
                | ActuatorModel::NnResidual { .. }
                | ActuatorModel::FfNn { .. }
        )
    }

    pub fn to_f64(&self) -> ActuatorModel<f64> {
        match self {
            ActuatorModel::Identity => ActuatorModel::Identity,
            ActuatorModel::Viscous { mu_v_sqrt } => ActuatorModel::Viscous {
                mu_v_sqrt: mu_v_sqrt.iter().map(|s| s.value()).collect(),
            },
            ActuatorModel::Stribeck {
                f_s_sqrt,
                f_d_sqrt,
                nu_s_sqrt,
                mu_v_sqrt,
            } => ActuatorModel::Stribeck {
                f_s_sqrt: f_s_sqrt.iter().map(|s| s.value()).collect(),
                f_d_sqrt: f_d_sqrt.iter().map(|s| s.value()).collect(),
                nu_s_sqrt: nu_s_sqrt.iter().map(|s| s.value()).collect(),
                mu_v_sqrt: mu_v_sqrt.iter().map(|s| s.value()).collect(),
            },
            ActuatorModel::NnFriction { net } => ActuatorModel::NnFriction { net: net.to_f64() },
            ActuatorModel::NnResidual { net } => ActuatorModel::NnResidual { net: net.to_f64() },
            ActuatorModel::FfNn { net } => ActuatorModel::FfNn { net: net.to_f64() },
        }
    }
}
