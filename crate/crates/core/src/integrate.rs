//! Fixed-step RK4 integration and trajectory rollout.

use thiserror::Error;

use crate::actuation::ActuationError;
use crate::dynamics::{aba_links, DynamicsError};
use crate::math::Scalar;
use crate::model::RobotModel;

/// Default sampling rate for rollouts (250 Hz).
pub const DEFAULT_DT: f64 = 1.0 / 250.0;
/// Default divergence bound on any state component.
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("non-finite value in RK4 stage {stage}")]
    NonFiniteStage { stage: usize },
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("actuation: {0}")]
    Actuation(#[from] ActuationError),
}

/// One classical RK4 step of `xdot = f(x, u)` with zero-order-hold input.
pub fn rk4_step<S, F, E>(f: &mut F, x: &[S], u: &[S], dt: S) -> Result<Vec<S>, IntegrateError>
where
    S: Scalar,
    F: FnMut(&[S], &[S]) -> Result<Vec<S>, E>,
    E: Into<IntegrateError>,
{
    let half = S::from_f64(0.5);
    let sixth = S::from_f64(1.0 / 6.0);
    let two = S::from_f64(2.0);

    let eval = |f: &mut F, x: &[S], stage: usize| -> Result<Vec<S>, IntegrateError> {
        let k = f(x, u).map_err(Into::into)?;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFiniteStage { stage });
        }
        Ok(k)
    };
    let shift = |x: &[S], k: &[S], h: S| -> Vec<S> {
        x.iter().zip(k).map(|(&xi, &ki)| xi + ki * h).collect()
    };

    let k1 = eval(f, x, 1)?;
    let k2 = eval(f, &shift(x, &k1, half * dt), 2)?;
    let k3 = eval(f, &shift(x, &k2, half * dt), 3)?;
    let k4 = eval(f, &shift(x, &k3, dt), 4)?;

    Ok((0..x.len())
        .map(|i| x[i] + (k1[i] + two * k2[i] + two * k3[i] + k4[i]) * sixth * dt)
        .collect())
}

/// Divergence record of a truncated rollout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Divergence {
    /// Index of the first step whose state exceeded the bound.
    pub step: usize,
    /// Offending state component.
    pub state_index: usize,
    pub value: f64,
}

/// A recorded joint-space step.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
    pub tau: Vec<f64>,
}

/// Uniformly sampled rollout record. Timestamps are implicit:
/// `t_k = k * dt`, strictly increasing by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub model_id: String,
    pub states: Vec<JointState>,
    /// Set when the rollout was truncated by the divergence guard; the
    /// recorded prefix is still returned.
    pub diverged: Option<Divergence>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// Rollout options.
#[derive(Clone, Copy, Debug)]
pub struct RolloutOpts {
    pub dt: f64,
    /// Any |state component| above this stops the rollout with a flag.
    pub divergence_bound: f64,
}

impl Default for RolloutOpts {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
        }
    }
}

/// Roll out a generic second-order system `qdd = f(q, qd, u)`.
///
/// The state is `x = [q, qd]`; inputs are zero-order-held over each step.
/// Returns the recorded trajectory, truncated early (with the flag set) if
/// any state magnitude exceeds the bound or a stage fails to evaluate.
pub fn rollout_with<F>(
    mut accel: F,
    model_id: &str,
    x0: &[f64],
    inputs: &[Vec<f64>],
    opts: RolloutOpts,
) -> Result<Trajectory, IntegrateError>
where
    F: FnMut(&[f64], &[f64], &[f64]) -> Result<Vec<f64>, IntegrateError>,
{
    let n = x0.len() / 2;
    let mut traj = Trajectory {
        dt: opts.dt,
        model_id: model_id.to_string(),
        states: Vec::with_capacity(inputs.len() + 1),
        diverged: None,
    };
    let mut x = x0.to_vec();

    let record =
        |traj: &mut Trajectory, x: &[f64], qdd: &[f64], u: &[f64]| {
            traj.states.push(JointState {
                q: x[..n].to_vec(),
                qd: x[n..].to_vec(),
                qdd: qdd.to_vec(),
                tau: u.to_vec(),
            });
        };

    for (step, u) in inputs.iter().enumerate() {
        let qdd0 = accel(&x[..n], &x[n..], u)?;
        record(&mut traj, &x, &qdd0, u);

        let mut deriv = |state: &[f64], input: &[f64]| -> Result<Vec<f64>, IntegrateError> {
            let qdd = accel(&state[..n], &state[n..], input)?;
            let mut dx = state[n..].to_vec();
            dx.extend(qdd);
            Ok(dx)
        };
        x = match rk4_step(&mut deriv, &x, u, opts.dt) {
            Ok(next) => next,
            Err(IntegrateError::NonFiniteStage { .. }) => {
                traj.diverged = Some(Divergence {
                    step: step + 1,
                    state_index: 0,
                    value: f64::NAN,
                });
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };

        if let Some((idx, &value)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() > opts.divergence_bound || !v.is_finite())
        {
            traj.diverged = Some(Divergence {
                step: step + 1,
                state_index: idx,
                value,
            });
            return Ok(traj);
        }
    }
    // Final state, with the last input held for the acceleration record.
    let last_u = inputs.last().cloned().unwrap_or_else(|| vec![0.0; n]);
    let qdd = accel(&x[..n], &x[n..], &last_u)?;
    record(&mut traj, &x, &qdd, &last_u);
    Ok(traj)
}

/// Roll out a robot model under its actuator: each step applies
/// `tau = actuator(u, q, qd)` and integrates `qdd = aba(q, qd, tau)`.
pub fn rollout(
    model: &RobotModel<f64>,
    x0: &[f64],
    inputs: &[Vec<f64>],
    opts: RolloutOpts,
) -> Result<Trajectory, IntegrateError> {
    let links = model.dyn_links();
    let gravity = model.gravity;
    let actuator = model.actuator.clone();
    rollout_with(
        move |q, qd, u| {
            let tau = actuator.apply(u, q, qd)?;
            Ok(aba_links(&links, gravity, q, qd, &tau)?)
        },
        &model.name,
        x0,
        inputs,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::system_energy;
    use crate::systems;

    #[test]
    fn rk4_matches_fourth_order_taylor_of_decay() {
        // xdot = -x, x0 = 1, dt = 0.1: one step gives the 4th-order Taylor
        // polynomial of exp(-0.1) = 0.9048375.
        let mut f = |x: &[f64], _u: &[f64]| -> Result<Vec<f64>, IntegrateError> {
            Ok(vec![-x[0]])
        };
        let x1 = rk4_step(&mut f, &[1.0], &[], 0.1).unwrap();
        assert!((x1[0] - 0.904_837_5).abs() < 1e-12, "got {}", x1[0]);
    }

    #[test]
    fn rk4_is_exact_on_constants() {
        let mut zero = |_: &[f64], _: &[f64]| -> Result<Vec<f64>, IntegrateError> {
            Ok(vec![0.0])
        };
        assert_eq!(rk4_step(&mut zero, &[2.5], &[], 0.1).unwrap(), vec![2.5]);
        let mut c = |_: &[f64], _: &[f64]| -> Result<Vec<f64>, IntegrateError> {
            Ok(vec![3.0])
        };
        let x1 = rk4_step(&mut c, &[1.0], &[], 0.25).unwrap();
        assert_eq!(x1[0], 1.75);
    }

    #[test]
    fn rk4_reports_non_finite_stage() {
        let mut f = |x: &[f64], _: &[f64]| -> Result<Vec<f64>, IntegrateError> {
            Ok(vec![(x[0] - 1.0).ln()])
        };
        // ln(0) = -inf on the first stage.
        let err = rk4_step(&mut f, &[1.0], &[], 0.1).unwrap_err();
        assert!(matches!(err, IntegrateError::NonFiniteStage { stage: 1 }));
    }

    #[test]
    fn equilibrium_rollout_is_constant() {
        let spec = systems::pendulum();
        let inputs = vec![vec![0.0]; 100];
        let traj = rollout(&spec.model, &[0.0, 0.0], &inputs, RolloutOpts::default()).unwrap();
        assert!(traj.diverged.is_none());
        assert_eq!(traj.len(), 101);
        for s in &traj.states {
            assert!(s.q[0].abs() < 1e-14 && s.qd[0].abs() < 1e-14);
        }
    }

    #[test]
    fn zero_horizon_rollout_contains_only_initial_state() {
        let spec = systems::pendulum();
        let traj = rollout(&spec.model, &[0.3, 0.0], &[], RolloutOpts::default()).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.states[0].q, vec![0.3]);
    }

    #[test]
    fn pendulum_energy_drift_small_over_ten_seconds() {
        let spec = systems::pendulum();
        let steps = 2500; // 10 s at 250 Hz
        let inputs = vec![vec![0.0]; steps];
        let x0 = [std::f64::consts::FRAC_PI_2, 0.0];
        let traj = rollout(&spec.model, &x0, &inputs, RolloutOpts::default()).unwrap();
        assert!(traj.diverged.is_none());
        let energy = |q: &[f64], qd: &[f64]| {
            let (ke, pe) = system_energy(&spec.model, q, qd).unwrap();
            ke + pe
        };
        let e0 = energy(&traj.states[0].q, &traj.states[0].qd);
        // Normalize by the energy above the resting state; the raw total can
        // be zero depending on the potential reference.
        let scale = e0 - energy(&[0.0], &[0.0]);
        assert!(scale > 1.0);
        for s in &traj.states {
            let e = energy(&s.q, &s.qd);
            assert!(
                ((e - e0) / scale).abs() < 1e-3,
                "energy drift {} vs {}",
                e,
                e0
            );
        }
    }

    #[test]
    fn viscous_rollout_dissipates_monotonically() {
        let spec = systems::cartpole();
        let mut model = spec.model.clone();
        model.actuator = spec.ground_truth_actuator(crate::actuation::ActuatorKind::Viscous);
        let inputs = vec![vec![0.0, 0.0]; 1000];
        let x0 = [0.0, 2.2, 0.0, 0.0];
        let traj = rollout(&model, &x0, &inputs, RolloutOpts::default()).unwrap();
        let mut prev = f64::INFINITY;
        for s in &traj.states {
            let (ke, pe) = system_energy(&model, &s.q, &s.qd).unwrap();
            let e = ke + pe;
            assert!(e <= prev + 1e-9, "energy increased: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn divergence_guard_truncates_and_flags() {
        // Unstable linear system blows past the bound quickly.
        let mut f = |q: &[f64], qd: &[f64], _u: &[f64]| -> Result<Vec<f64>, IntegrateError> {
            let _ = qd;
            Ok(vec![50.0 * q[0]])
        };
        let inputs = vec![vec![0.0]; 2000];
        let traj = rollout_with(
            &mut f,
            "unstable",
            &[1.0, 0.0],
            &inputs,
            RolloutOpts {
                dt: 0.01,
                divergence_bound: 1e3,
            },
        )
        .unwrap();
        let d = traj.diverged.expect("must diverge");
        assert!(traj.len() < 2001);
        assert!(d.value.abs() > 1e3);
    }

    #[test]
    fn halving_dt_reduces_endpoint_error_by_rk4_order() {
        // Endpoint error against a fine reference must shrink ~16x.
        let spec = systems::pendulum();
        let x0 = [1.1, 0.0];
        let horizon = 2.0;
        let run = |dt: f64| {
            let steps = (horizon / dt).round() as usize;
            let inputs = vec![vec![0.0]; steps];
            let traj = rollout(
                &spec.model,
                &x0,
                &inputs,
                RolloutOpts {
                    dt,
                    divergence_bound: 1e6,
                },
            )
            .unwrap();
            let last = traj.states.last().unwrap();
            (last.q[0], last.qd[0])
        };
        let reference = run(1.0 / 16000.0);
        let err = |state: (f64, f64)| {
            ((state.0 - reference.0).powi(2) + (state.1 - reference.1).powi(2)).sqrt()
        };
        let e1 = err(run(1.0 / 250.0));
        let e2 = err(run(1.0 / 500.0));
        let factor = e1 / e2;
        assert!(
            (12.0..=20.0).contains(&factor),
            "order factor {factor} outside [12, 20]"
        );
    }
}
