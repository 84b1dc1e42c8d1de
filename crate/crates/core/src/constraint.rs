//! Constrained particle dynamics for a ball on an inextensible string.
//!
//! The string imposes the non-holonomic inequality constraint
//! `h = |x_B - x_C|^2 - r^2 <= 0` between the ball and the cup, where the
//! cup frame hangs off the last joint frame through a fixed transform. The
//! inequality is rewritten as an equality `g = relax(h) = 0` through a ReLU
//! (default) or softplus relaxation, and enforced on the derivative level:
//! `g = gdot = gddot = 0` along a feasible trajectory.
//!
//! On the taut branch the constraint force is closed-form (virtual work),
//! directed along the string:
//!
//! `f_c = -m_B relax'(z) (D.g - D.a_C + Dd.Dd) / (D.D + delta) D`,
//!
//! with `D = x_B - x_C`, `z = |D| - r`. Simulation adds Baumgarte feedback
//! realizing `gddot = -K_p g - K_d gdot` on the taut branch plus small
//! velocity damping; both terms keep the integration on the constraint
//! manifold and are part of the identification model as well, so synthetic
//! data and the fitted model share one code path.

use thiserror::Error;

use crate::math::{Mat3, Scalar, Vec3};
use crate::spatial::SpatialTransform;

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("non-finite loss at iteration {iteration} (sample {sample})")]
    NonFiniteLoss { iteration: usize, sample: usize },
    #[error("empty dataset")]
    EmptyDataset,
}

/// Relaxation turning the inequality constraint into an equality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Relaxation {
    /// Hard one-sided relaxation. Its derivative is taken as 1 at exactly 0
    /// (taut counts as active), so the closed-form force engages at the
    /// boundary.
    Relu,
    /// Soft relaxation `softplus(beta h) / beta`; smoother optimization at
    /// the price of a slightly active force near the boundary.
    Softplus { beta: f64 },
}

impl Relaxation {
    pub fn value<S: Scalar>(&self, h: S) -> S {
        match self {
            Relaxation::Relu => h.relu(),
            Relaxation::Softplus { beta } => {
                let b = S::from_f64(*beta);
                (h * b).softplus() / b
            }
        }
    }

    /// Derivative of the relaxation, as a differentiable expression of its
    /// argument where applicable.
    pub fn prime<S: Scalar>(&self, z: S) -> S {
        match self {
            Relaxation::Relu => {
                if z.value() >= 0.0 {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Relaxation::Softplus { beta } => sigmoid(S::from_f64(*beta) * z),
        }
    }

    /// Second derivative (zero almost everywhere for ReLU).
    pub fn second<S: Scalar>(&self, z: S) -> S {
        match self {
            Relaxation::Relu => S::zero(),
            Relaxation::Softplus { beta } => {
                let s = sigmoid(S::from_f64(*beta) * z);
                S::from_f64(*beta) * s * (S::one() - s)
            }
        }
    }
}

fn sigmoid<S: Scalar>(x: S) -> S {
    if x.value() >= 0.0 {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// String/cup parameters. `r` is the string length; `t_e` maps the last
/// joint frame to the cup frame (only its translation affects the cup
/// position, so the rotation is unidentifiable from ball data and stays at
/// its initialization).
#[derive(Clone, Debug)]
pub struct StringParams<S> {
    pub r: S,
    pub t_e: SpatialTransform<S>,
    pub m_b: S,
    /// Denominator regularizer of the closed-form force.
    pub delta: f64,
    /// Baumgarte gains realizing `gddot = -k_p g - k_d gdot` when taut.
    pub k_p: f64,
    pub k_d: f64,
    /// Small velocity damping on the ball (N s/m).
    pub damping: f64,
    pub relaxation: Relaxation,
    pub gravity: Vec3<S>,
}

impl StringParams<f64> {
    /// Desk-scale defaults: 0.40 m string, 50 g ball.
    pub fn default_ball_on_string() -> Self {
        Self {
            r: 0.40,
            t_e: SpatialTransform::identity(),
            m_b: 0.05,
            delta: 1e-6,
            k_p: 100.0,
            k_d: 20.0,
            damping: 0.05,
            relaxation: Relaxation::Relu,
            gravity: Vec3::new(0.0, 0.0, -9.81),
        }
    }

    pub fn lift<S: Scalar>(&self) -> StringParams<S> {
        StringParams {
            r: S::from_f64(self.r),
            t_e: SpatialTransform::new(
                Mat3::from_f64(self.t_e.rot.to_f64()),
                Vec3::from_f64(self.t_e.trans.to_f64()),
            ),
            m_b: S::from_f64(self.m_b),
            delta: self.delta,
            k_p: self.k_p,
            k_d: self.k_d,
            damping: self.damping,
            relaxation: self.relaxation,
            gravity: Vec3::from_f64(self.gravity.to_f64()),
        }
    }
}

/// Ball translational state.
#[derive(Clone, Copy, Debug)]
pub struct BallState<S> {
    pub pos: Vec3<S>,
    pub vel: Vec3<S>,
}

/// Cup-point kinematics in the world frame.
#[derive(Clone, Copy, Debug)]
pub struct CupKinematics<S> {
    pub pos: Vec3<S>,
    pub vel: Vec3<S>,
    pub acc: Vec3<S>,
}

impl<S: Scalar> CupKinematics<S> {
    pub fn stationary(pos: Vec3<S>) -> Self {
        Self {
            pos,
            vel: Vec3::zero(),
            acc: Vec3::zero(),
        }
    }
}

/// World-frame motion of the last joint frame: pose plus translational and
/// angular derivatives.
#[derive(Clone, Copy, Debug)]
pub struct JointFrameMotion<S> {
    pub rot: Mat3<S>,
    pub pos: Vec3<S>,
    pub vel: Vec3<S>,
    pub acc: Vec3<S>,
    pub omega: Vec3<S>,
    pub omega_dot: Vec3<S>,
}

impl<S: Scalar> JointFrameMotion<S> {
    pub fn at_rest(pos: Vec3<S>) -> Self {
        Self {
            rot: Mat3::identity(),
            pos,
            vel: Vec3::zero(),
            acc: Vec3::zero(),
            omega: Vec3::zero(),
            omega_dot: Vec3::zero(),
        }
    }
}

/// Cup kinematics induced by the joint-frame motion through `t_e`: the cup
/// point rides at offset `R p_E` from the joint origin.
pub fn cup_from_joint<S: Scalar>(
    t_e: &SpatialTransform<S>,
    j4: &JointFrameMotion<S>,
) -> CupKinematics<S> {
    let arm = j4.rot.mul_vec(t_e.trans);
    CupKinematics {
        pos: j4.pos + arm,
        vel: j4.vel + j4.omega.cross(arm),
        acc: j4.acc + j4.omega_dot.cross(arm) + j4.omega.cross(j4.omega.cross(arm)),
    }
}

/// Constraint value and first derivative: `h = |D|^2 - r^2`, `g = relax(h)`,
/// `gdot = relax'(h) 2 D . Dd`.
pub fn constraint_values<S: Scalar>(
    ball: &BallState<S>,
    cup: &CupKinematics<S>,
    p: &StringParams<S>,
) -> (S, S, S) {
    let d = ball.pos - cup.pos;
    let dd = ball.vel - cup.vel;
    let h = d.norm_sq() - p.r * p.r;
    let g = p.relaxation.value(h);
    let gdot = p.relaxation.prime(h) * S::from_f64(2.0) * d.dot(dd);
    (h, g, gdot)
}

/// Closed-form constraint force along the string direction; zero on the
/// slack branch.
pub fn constraint_force<S: Scalar>(
    ball: &BallState<S>,
    cup: &CupKinematics<S>,
    p: &StringParams<S>,
) -> Vec3<S> {
    let d = ball.pos - cup.pos;
    let dd = ball.vel - cup.vel;
    let z = d.norm() - p.r;
    let active = p.relaxation.prime(z);
    let num = d.dot(p.gravity) - d.dot(cup.acc) + dd.dot(dd);
    let scale = -(p.m_b) * active * num / (d.norm_sq() + S::from_f64(p.delta));
    d.scale(scale)
}

/// Baumgarte stabilization force realizing `gddot = -k_p g - k_d gdot` on
/// the taut branch (simulation device; part of the shared model).
fn stabilization_force<S: Scalar>(
    ball: &BallState<S>,
    cup: &CupKinematics<S>,
    p: &StringParams<S>,
) -> Vec3<S> {
    let d = ball.pos - cup.pos;
    let z = d.norm() - p.r;
    let active = p.relaxation.prime(z);
    let (_, g, gdot) = constraint_values(ball, cup, p);
    let correction = S::from_f64(0.5) * (S::from_f64(p.k_p) * g + S::from_f64(p.k_d) * gdot);
    let scale = -(p.m_b) * active * correction / (d.norm_sq() + S::from_f64(p.delta));
    d.scale(scale)
}

/// Ball acceleration: gravity, constraint force, stabilization and damping,
/// all divided by the ball mass. Free fall on the slack branch (minus
/// damping).
pub fn ball_dynamics<S: Scalar>(
    ball: &BallState<S>,
    cup: &CupKinematics<S>,
    p: &StringParams<S>,
) -> Vec3<S> {
    let f_c = constraint_force(ball, cup, p);
    let f_stab = stabilization_force(ball, cup, p);
    let f_fric = -ball.vel.scale(S::from_f64(p.damping));
    p.gravity + (f_c + f_stab + f_fric).scale(S::one() / p.m_b)
}

/// Constraint vector `(g, gdot, gddot)` with the second derivative taken
/// analytically along the model dynamics (not from data differences).
pub fn constraint_vector<S: Scalar>(
    ball: &BallState<S>,
    cup: &CupKinematics<S>,
    p: &StringParams<S>,
) -> [S; 3] {
    let d = ball.pos - cup.pos;
    let dd = ball.vel - cup.vel;
    let h = d.norm_sq() - p.r * p.r;
    let hdot = S::from_f64(2.0) * d.dot(dd);
    let acc = ball_dynamics(ball, cup, p);
    let hddot = S::from_f64(2.0) * (dd.dot(dd) + d.dot(acc - cup.acc));
    let g = p.relaxation.value(h);
    let gdot = p.relaxation.prime(h) * hdot;
    let gddot = p.relaxation.second(h) * hdot * hdot + p.relaxation.prime(h) * hddot;
    [g, gdot, gddot]
}

/// One sample of ball + joint-frame data.
#[derive(Clone, Copy, Debug)]
pub struct BallSample {
    pub ball_pos: [f64; 3],
    pub ball_vel: [f64; 3],
    pub ball_acc: [f64; 3],
    pub j4: JointFrameMotion<f64>,
}

impl BallSample {
    pub fn lift<S: Scalar>(&self) -> (BallState<S>, JointFrameMotion<S>) {
        let j = &self.j4;
        (
            BallState {
                pos: Vec3::from_f64(self.ball_pos),
                vel: Vec3::from_f64(self.ball_vel),
            },
            JointFrameMotion {
                rot: Mat3::from_f64(j.rot.to_f64()),
                pos: Vec3::from_f64(j.pos.to_f64()),
                vel: Vec3::from_f64(j.vel.to_f64()),
                acc: Vec3::from_f64(j.acc.to_f64()),
                omega: Vec3::from_f64(j.omega.to_f64()),
                omega_dot: Vec3::from_f64(j.omega_dot.to_f64()),
            },
        )
    }
}

/// Penalty `sum_i gvec_i^T Lambda gvec_i` with
/// `Lambda = diag(lambda_g, lambda_gd, lambda_gdd)`. Non-negative; zero iff
/// the constraint holds at all derivative levels on every sample.
pub fn constraint_penalty<S: Scalar>(
    samples: &[BallSample],
    p: &StringParams<S>,
    lambda: [f64; 3],
) -> S {
    let mut acc = S::zero();
    for sample in samples {
        let (ball, j4) = sample.lift::<S>();
        let cup = cup_from_joint(&p.t_e, &j4);
        let gvec = constraint_vector(&ball, &cup, p);
        for k in 0..3 {
            acc = acc + S::from_f64(lambda[k]) * gvec[k] * gvec[k];
        }
    }
    acc
}

/// Recorded ball trajectory from [`simulate_ball`].
#[derive(Clone, Debug)]
pub struct BallTrajectory {
    pub dt: f64,
    pub pos: Vec<[f64; 3]>,
    pub vel: Vec<[f64; 3]>,
    pub acc: Vec<[f64; 3]>,
}

/// RK4 simulation of the ball under a time-dependent cup motion. Time rides
/// along as an extra state so the standard stepper sees the moving cup at
/// the stage times.
pub fn simulate_ball(
    p: &StringParams<f64>,
    cup_at: &dyn Fn(f64) -> CupKinematics<f64>,
    x0: [f64; 3],
    v0: [f64; 3],
    dt: f64,
    steps: usize,
) -> BallTrajectory {
    let mut traj = BallTrajectory {
        dt,
        pos: Vec::with_capacity(steps + 1),
        vel: Vec::with_capacity(steps + 1),
        acc: Vec::with_capacity(steps + 1),
    };
    // State layout: [t, x, y, z, vx, vy, vz].
    let mut state = vec![0.0, x0[0], x0[1], x0[2], v0[0], v0[1], v0[2]];
    let mut deriv = |x: &[f64], _u: &[f64]| -> Result<Vec<f64>, crate::integrate::IntegrateError> {
        let ball = BallState {
            pos: Vec3::new(x[1], x[2], x[3]),
            vel: Vec3::new(x[4], x[5], x[6]),
        };
        let cup = cup_at(x[0]);
        let a = ball_dynamics(&ball, &cup, p).to_f64();
        Ok(vec![1.0, x[4], x[5], x[6], a[0], a[1], a[2]])
    };
    for _ in 0..=steps {
        let ball = BallState {
            pos: Vec3::new(state[1], state[2], state[3]),
            vel: Vec3::new(state[4], state[5], state[6]),
        };
        let a = ball_dynamics(&ball, &cup_at(state[0]), p).to_f64();
        traj.pos.push([state[1], state[2], state[3]]);
        traj.vel.push([state[4], state[5], state[6]]);
        traj.acc.push(a);
        state = crate::integrate::rk4_step(&mut deriv, &state, &[], dt)
            .expect("ball dynamics stays finite");
    }
    traj
}

/// Optimizer settings for string identification.
#[derive(Clone, Copy, Debug)]
pub struct StringOptimConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub iters: usize,
}

impl Default for StringOptimConfig {
    fn default() -> Self {
        Self {
            lr: 5e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            iters: 2500,
        }
    }
}

/// Result of [`identify_string`].
#[derive(Clone, Debug)]
pub struct StringFit {
    pub params: StringParams<f64>,
    pub loss_curve: Vec<f64>,
    pub final_loss: f64,
    pub final_penalty: f64,
}

/// Build the string parameters from the virtual vector
/// `[r_sqrt, te_rpy(3), te_p(3)]` and the fixed template fields.
fn string_from_virtual<S: Scalar>(theta: &[S], template: &StringParams<f64>) -> StringParams<S> {
    let r = theta[0] * theta[0];
    let t_e = crate::spatial::transform_from_rpy(
        [theta[1], theta[2], theta[3]],
        Vec3::new(theta[4], theta[5], theta[6]),
    );
    StringParams {
        r,
        t_e,
        m_b: S::from_f64(template.m_b),
        delta: template.delta,
        k_p: template.k_p,
        k_d: template.k_d,
        damping: template.damping,
        relaxation: template.relaxation,
        gravity: Vec3::from_f64(template.gravity.to_f64()),
    }
}

fn string_loss<S: Scalar>(
    theta: &[S],
    samples: &[BallSample],
    template: &StringParams<f64>,
    lambda: [f64; 3],
) -> S {
    let p = string_from_virtual(theta, template);
    let mut loss = S::zero();
    for sample in samples {
        let (ball, j4) = sample.lift::<S>();
        let cup = cup_from_joint(&p.t_e, &j4);
        let pred = ball_dynamics(&ball, &cup, &p);
        let res = pred - Vec3::from_f64(sample.ball_acc);
        loss = loss + res.norm_sq();
    }
    loss + constraint_penalty(samples, &p, lambda)
}

/// Identify string length and end-effector transform by Adam on the squared
/// acceleration residual plus the constraint penalty. The string length is
/// optimized as a square root so it stays positive; `T_E` is parameterized
/// by RPY angles and a translation.
pub fn identify_string(
    samples: &[BallSample],
    init: &StringParams<f64>,
    lambda: [f64; 3],
    cfg: &StringOptimConfig,
) -> Result<StringFit, ConstraintError> {
    if samples.is_empty() {
        return Err(ConstraintError::EmptyDataset);
    }
    // The registry template starts `t_e` at identity rotation, so the RPY
    // seed is zero; the rotation is unidentifiable and only acts as offset.
    let mut theta = vec![
        init.r.sqrt(),
        0.0,
        0.0,
        0.0,
        init.t_e.trans.x,
        init.t_e.trans.y,
        init.t_e.trans.z,
    ];
    let mut adam_m = vec![0.0; theta.len()];
    let mut adam_v = vec![0.0; theta.len()];
    let mut loss_curve = Vec::with_capacity(cfg.iters);
    let tape = crate::autodiff::Tape::with_capacity(samples.len() * 512);

    for it in 0..cfg.iters {
        tape.reset();
        let vars: Vec<crate::autodiff::DiffScalar<'_>> =
            theta.iter().map(|&v| tape.var(v)).collect();
        let loss = string_loss(&vars, samples, init, lambda);
        let loss_val = loss.value();
        if !loss_val.is_finite() {
            return Err(ConstraintError::NonFiniteLoss {
                iteration: it,
                sample: 0,
            });
        }
        loss_curve.push(loss_val);
        let grads = tape.backward(loss);
        let t = (it + 1) as f64;
        let bc1 = 1.0 - cfg.beta1.powf(t);
        let bc2 = 1.0 - cfg.beta2.powf(t);
        for (i, var) in vars.iter().enumerate() {
            let g = grads.wrt(*var);
            adam_m[i] = cfg.beta1 * adam_m[i] + (1.0 - cfg.beta1) * g;
            adam_v[i] = cfg.beta2 * adam_v[i] + (1.0 - cfg.beta2) * g * g;
            theta[i] -= cfg.lr * (adam_m[i] / bc1) / ((adam_v[i] / bc2).sqrt() + cfg.eps);
        }
    }

    let fitted = string_from_virtual(&theta, init);
    let final_penalty = constraint_penalty(samples, &fitted, lambda);
    let final_loss = string_loss(&theta, samples, init, lambda);
    Ok(StringFit {
        params: fitted,
        loss_curve,
        final_loss,
        final_penalty,
    })
}
