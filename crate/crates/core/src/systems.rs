//! Benchmark system registry: pendulum, cartpole, Furuta pendulum, planar
//! 2-link arm, each with documented ground-truth parameters and a closed-form
//! forward-dynamics oracle derived independently via Lagrangian mechanics.
//!
//! All values are declared synthetic desk-scale defaults. Joint axes follow
//! the local-z convention, so fixed transforms orient them:
//!
//! * pendulum  revolute, axis along world -y (`R_x(pi/2)`), mass hanging at
//!   local `(0, -l, 0)`; swings in the world x-z plane, `q = 0` at the
//!   stable equilibrium.
//! * cartpole  prismatic cart along world x (`R_y(pi/2)`), pole revolute
//!   about world y (`R_x(-pi/2)` in the cart frame), pole angle from the
//!   downward vertical; positive angle moves the tip toward -x.
//! * furuta    arm revolute about world z, pendulum revolute about the arm
//!   direction (`R_y(pi/2)` at the arm tip), angle from downward vertical.

use std::collections::HashMap;

use crate::actuation::{ActuatorKind, ActuatorModel};
use crate::math::Vec3;
use crate::model::{JointKind, Link, LinkParams, RobotModel};

pub const GRAVITY: f64 = 9.81;

// Pendulum.
const PEND_M: f64 = 1.0;
const PEND_L: f64 = 1.0;

// Cartpole.
const CART_M: f64 = 0.6;
const POLE_M: f64 = 0.25;
const POLE_L: f64 = 0.4;

// Furuta pendulum (small masses and lengths on purpose).
const FUR_ARM_M: f64 = 0.095;
const FUR_ARM_R: f64 = 0.0425;
const FUR_ARM_L: f64 = 0.085;
const FUR_PEND_M: f64 = 0.024;
const FUR_PEND_L: f64 = 0.0645;

// Planar 2-link arm.
const ARM_M1: f64 = 1.2;
const ARM_M2: f64 = 0.8;
const ARM_L1: f64 = 0.5;
const ARM_LC1: f64 = 0.3;
const ARM_LC2: f64 = 0.35;

/// Swing-up controller used to generate trajectory datasets.
#[derive(Clone, Copy, Debug)]
pub enum SwingupCtrl {
    /// Directly actuated pendulum: `u = gain (E* - E) qd`, which pumps
    /// energy monotonically while below the target.
    Direct { gain: f64, u_max: f64 },
    /// Under-actuated base joint: desired base acceleration proportional to
    /// `(E* - E) qd_p cos(q_p)` plus a PD term centering the base.
    ViaBase {
        dir: f64,
        gain: f64,
        u_max: f64,
        center_kp: f64,
        center_kd: f64,
        inertia_scale: f64,
    },
}

/// A benchmark system: ground-truth model, analytic forward dynamics, data
/// generation ranges and swing-up controller parameters.
pub struct SystemSpec {
    pub name: &'static str,
    pub model: RobotModel<f64>,
    /// Closed-form `qdd = f(q, qd, tau)` for the ideal (frictionless) system,
    /// independent of the recursive algorithms.
    pub analytic_forward: fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
    pub q_range: Vec<(f64, f64)>,
    pub qd_range: Vec<(f64, f64)>,
    pub tau_range: Vec<(f64, f64)>,
    /// Start state `(q, qd)` for trajectory generation.
    pub x0: Vec<f64>,
    /// Index of the pendulum joint driven through the energy controller and
    /// of the actuated joint.
    pub pend_joint: usize,
    pub act_joint: usize,
    /// Pendulum-joint energy model `E = 1/2 ml2 qd^2 - mgl cos(q)`.
    pub pend_ml2: f64,
    pub pend_mgl: f64,
    pub ctrl: SwingupCtrl,
    /// Documented ground-truth parameters for oracle tests.
    pub params: HashMap<&'static str, f64>,
}

impl SystemSpec {
    /// Torque command of the swing-up controller at state `(q, qd)`.
    pub fn swingup_torque(&self, q: &[f64], qd: &[f64]) -> Vec<f64> {
        let qp = q[self.pend_joint];
        let vp = qd[self.pend_joint];
        let energy = 0.5 * self.pend_ml2 * vp * vp - self.pend_mgl * qp.cos();
        let gap = self.pend_mgl - energy; // E* = +mgl (upright)
        let mut u = vec![0.0; q.len()];
        match self.ctrl {
            SwingupCtrl::Direct { gain, u_max } => {
                u[self.act_joint] = (gain * gap * vp).clamp(-u_max, u_max);
            }
            SwingupCtrl::ViaBase {
                dir,
                gain,
                u_max,
                center_kp,
                center_kd,
                inertia_scale,
            } => {
                let a_des = dir * gain * gap * vp * qp.cos();
                let cmd = inertia_scale * a_des
                    - center_kp * q[self.act_joint]
                    - center_kd * qd[self.act_joint];
                u[self.act_joint] = cmd.clamp(-u_max, u_max);
            }
        }
        u
    }

    /// Ground-truth actuator with desk-scale friction coefficients, used
    /// when generating trajectory datasets.
    pub fn ground_truth_actuator(&self, kind: ActuatorKind) -> ActuatorModel<f64> {
        let n = self.model.n_joints();
        match kind {
            ActuatorKind::Identity => ActuatorModel::Identity,
            ActuatorKind::Viscous => {
                let mu: Vec<f64> = match self.name {
                    "pendulum" => vec![0.05],
                    "cartpole" => vec![0.9, 0.003],
                    "furuta" => vec![0.002, 0.0001],
                    _ => vec![0.05; n],
                };
                ActuatorModel::viscous(&mu).expect("non-negative coefficients")
            }
            ActuatorKind::Stribeck => {
                let (f_s, f_d, nu_s, mu_v): (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) =
                    match self.name {
                        // High stiction on the cart drive, nearly free pole.
                        "cartpole" => (
                            vec![1.3, 0.0],
                            vec![0.6, 0.0],
                            vec![60.0, 0.0],
                            vec![0.9, 0.003],
                        ),
                        "pendulum" => (vec![0.15], vec![0.08], vec![40.0], vec![0.05]),
                        _ => (
                            vec![0.01; n],
                            vec![0.005; n],
                            vec![50.0; n],
                            vec![0.002; n],
                        ),
                    };
                ActuatorModel::stribeck(&f_s, &f_d, &nu_s, &mu_v)
                    .expect("non-negative coefficients")
            }
            other => ActuatorModel::network(other, n, &[16, 16], 0),
        }
    }
}

fn point_mass_link(
    joint: JointKind,
    parent: Option<usize>,
    theta_r: [f64; 3],
    p_k: [f64; 3],
    mass: f64,
    p_m: [f64; 3],
) -> Link<f64> {
    Link {
        joint,
        parent,
        params: LinkParams {
            theta_r,
            p_k: Vec3::from_f64(p_k),
            theta_l: [0.0; 3],
            theta_sqrt_m: mass.sqrt(),
            theta_j: [0.0; 3],
            p_m: Vec3::from_f64(p_m),
        },
    }
}

fn base_model(name: &str, links: Vec<Link<f64>>) -> RobotModel<f64> {
    let model = RobotModel {
        name: name.to_string(),
        links,
        gravity: Vec3::new(0.0, 0.0, -GRAVITY),
        actuator: ActuatorModel::Identity,
        kinematics_known: true,
    };
    model.validate().expect("registry models are well-formed");
    model
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

fn pendulum_forward(q: &[f64], qd: &[f64], tau: &[f64]) -> Vec<f64> {
    let _ = qd;
    vec![(tau[0] - PEND_M * GRAVITY * PEND_L * q[0].sin()) / (PEND_M * PEND_L * PEND_L)]
}

/// Point-mass pendulum: m = 1 kg at l = 1 m.
pub fn pendulum() -> SystemSpec {
    let model = base_model(
        "pendulum",
        vec![point_mass_link(
            JointKind::Revolute,
            None,
            [HALF_PI, 0.0, 0.0],
            [0.0; 3],
            PEND_M,
            [0.0, -PEND_L, 0.0],
        )],
    );
    SystemSpec {
        name: "pendulum",
        model,
        analytic_forward: pendulum_forward,
        q_range: vec![(-std::f64::consts::PI, std::f64::consts::PI)],
        qd_range: vec![(-6.0, 6.0)],
        tau_range: vec![(-3.0, 3.0)],
        x0: vec![0.1, 0.0],
        pend_joint: 0,
        act_joint: 0,
        pend_ml2: PEND_M * PEND_L * PEND_L,
        pend_mgl: PEND_M * GRAVITY * PEND_L,
        ctrl: SwingupCtrl::Direct {
            gain: 0.6,
            u_max: 2.5,
        },
        params: HashMap::from([("m", PEND_M), ("l", PEND_L)]),
    }
}

fn cartpole_forward(q: &[f64], qd: &[f64], tau: &[f64]) -> Vec<f64> {
    // Lagrangian oracle for the registry geometry (tip at x - l sin(theta)):
    //   (mc+mp) xdd - mp l c tdd + mp l s td^2        = F
    //   -mp l c xdd + mp l^2 tdd + mp g l s           = tau_pole
    let (th, td) = (q[1], qd[1]);
    let (s, c) = (th.sin(), th.cos());
    let a11 = CART_M + POLE_M;
    let a12 = -POLE_M * POLE_L * c;
    let a22 = POLE_M * POLE_L * POLE_L;
    let b1 = tau[0] - POLE_M * POLE_L * s * td * td;
    let b2 = tau[1] - POLE_M * GRAVITY * POLE_L * s;
    let det = a11 * a22 - a12 * a12;
    vec![(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det]
}

/// Cart (prismatic, actuated) plus point-mass pole (revolute, passive).
pub fn cartpole() -> SystemSpec {
    let model = base_model(
        "cartpole",
        vec![
            point_mass_link(
                JointKind::Prismatic,
                None,
                [0.0, HALF_PI, 0.0],
                [0.0; 3],
                CART_M,
                [0.0; 3],
            ),
            point_mass_link(
                JointKind::Revolute,
                Some(0),
                [-HALF_PI, 0.0, 0.0],
                [0.0; 3],
                POLE_M,
                [POLE_L, 0.0, 0.0],
            ),
        ],
    );
    SystemSpec {
        name: "cartpole",
        model,
        analytic_forward: cartpole_forward,
        q_range: vec![(-0.8, 0.8), (-std::f64::consts::PI, std::f64::consts::PI)],
        qd_range: vec![(-2.0, 2.0), (-8.0, 8.0)],
        tau_range: vec![(-5.0, 5.0), (0.0, 0.0)],
        x0: vec![0.0, 0.15, 0.0, 0.0],
        pend_joint: 1,
        act_joint: 0,
        pend_ml2: POLE_M * POLE_L * POLE_L,
        pend_mgl: POLE_M * GRAVITY * POLE_L,
        ctrl: SwingupCtrl::ViaBase {
            dir: 1.0,
            gain: 6.0,
            u_max: 4.5,
            center_kp: 2.5,
            center_kd: 1.6,
            inertia_scale: CART_M + POLE_M,
        },
        params: HashMap::from([
            ("m_cart", CART_M),
            ("m_pole", POLE_M),
            ("l_pole", POLE_L),
        ]),
    }
}

fn furuta_forward(q: &[f64], qd: &[f64], tau: &[f64]) -> Vec<f64> {
    // Point-mass Lagrangian oracle:
    //   (alpha + beta s^2) pdd + gamma c tdd + 2 beta s c td pd - gamma s td^2 = tau_arm
    //   gamma c pdd + beta tdd - beta s c pd^2 + mp g lp s                     = tau_pend
    let (th, pd, td) = (q[1], qd[0], qd[1]);
    let (s, c) = (th.sin(), th.cos());
    let alpha = FUR_ARM_M * FUR_ARM_R * FUR_ARM_R + FUR_PEND_M * FUR_ARM_L * FUR_ARM_L;
    let beta = FUR_PEND_M * FUR_PEND_L * FUR_PEND_L;
    let gamma = FUR_PEND_M * FUR_ARM_L * FUR_PEND_L;
    let a11 = alpha + beta * s * s;
    let a12 = gamma * c;
    let a22 = beta;
    let b1 = tau[0] - 2.0 * beta * s * c * td * pd + gamma * s * td * td;
    let b2 = tau[1] + beta * s * c * pd * pd - FUR_PEND_M * GRAVITY * FUR_PEND_L * s;
    let det = a11 * a22 - a12 * a12;
    vec![(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det]
}

/// Rotary (Furuta) pendulum: horizontal arm about the vertical axis, passive
/// pendulum at the arm tip.
pub fn furuta() -> SystemSpec {
    let model = base_model(
        "furuta",
        vec![
            point_mass_link(
                JointKind::Revolute,
                None,
                [0.0; 3],
                [0.0; 3],
                FUR_ARM_M,
                [FUR_ARM_R, 0.0, 0.0],
            ),
            point_mass_link(
                JointKind::Revolute,
                Some(0),
                [0.0, HALF_PI, 0.0],
                [FUR_ARM_L, 0.0, 0.0],
                FUR_PEND_M,
                [FUR_PEND_L, 0.0, 0.0],
            ),
        ],
    );
    SystemSpec {
        name: "furuta",
        model,
        analytic_forward: furuta_forward,
        q_range: vec![
            (-std::f64::consts::PI, std::f64::consts::PI),
            (-std::f64::consts::PI, std::f64::consts::PI),
        ],
        qd_range: vec![(-12.0, 12.0), (-12.0, 12.0)],
        tau_range: vec![(-0.4, 0.4), (0.0, 0.0)],
        x0: vec![0.0, 0.1, 0.0, 0.0],
        pend_joint: 1,
        act_joint: 0,
        pend_ml2: FUR_PEND_M * FUR_PEND_L * FUR_PEND_L,
        pend_mgl: FUR_PEND_M * GRAVITY * FUR_PEND_L,
        ctrl: SwingupCtrl::ViaBase {
            dir: -1.0,
            gain: 18.0,
            u_max: 0.25,
            center_kp: 0.01,
            center_kd: 0.004,
            inertia_scale: FUR_ARM_M * FUR_ARM_R * FUR_ARM_R
                + FUR_PEND_M * FUR_ARM_L * FUR_ARM_L,
        },
        params: HashMap::from([
            ("m_arm", FUR_ARM_M),
            ("r_arm", FUR_ARM_R),
            ("l_arm", FUR_ARM_L),
            ("m_pend", FUR_PEND_M),
            ("l_pend", FUR_PEND_L),
        ]),
    }
}

fn two_link_forward(q: &[f64], qd: &[f64], tau: &[f64]) -> Vec<f64> {
    // Invert the standard planar 2R mass matrix.
    let (c2, s2) = (q[1].cos(), q[1].sin());
    let m11 = ARM_M1 * ARM_LC1 * ARM_LC1
        + ARM_M2 * (ARM_L1 * ARM_L1 + ARM_LC2 * ARM_LC2 + 2.0 * ARM_L1 * ARM_LC2 * c2);
    let m12 = ARM_M2 * (ARM_LC2 * ARM_LC2 + ARM_L1 * ARM_LC2 * c2);
    let m22 = ARM_M2 * ARM_LC2 * ARM_LC2;
    let h = -ARM_M2 * ARM_L1 * ARM_LC2 * s2;
    let g1 = (ARM_M1 * ARM_LC1 + ARM_M2 * ARM_L1) * GRAVITY * q[0].sin()
        + ARM_M2 * ARM_LC2 * GRAVITY * (q[0] + q[1]).sin();
    let g2 = ARM_M2 * ARM_LC2 * GRAVITY * (q[0] + q[1]).sin();
    let b1 = tau[0] - h * qd[1] * qd[0] - h * (qd[0] + qd[1]) * qd[1] - g1;
    let b2 = tau[1] + h * qd[0] * qd[0] - g2;
    let det = m11 * m22 - m12 * m12;
    vec![(m22 * b1 - m12 * b2) / det, (m11 * b2 - m12 * b1) / det]
}

/// Planar 2-link arm, both joints actuated; oracle for the symbolic
/// Lagrangian cross-check.
pub fn two_link_arm() -> SystemSpec {
    let model = base_model(
        "two_link_arm",
        vec![
            point_mass_link(
                JointKind::Revolute,
                None,
                [HALF_PI, 0.0, 0.0],
                [0.0; 3],
                ARM_M1,
                [0.0, -ARM_LC1, 0.0],
            ),
            point_mass_link(
                JointKind::Revolute,
                Some(0),
                [0.0; 3],
                [0.0, -ARM_L1, 0.0],
                ARM_M2,
                [0.0, -ARM_LC2, 0.0],
            ),
        ],
    );
    SystemSpec {
        name: "two_link_arm",
        model,
        analytic_forward: two_link_forward,
        q_range: vec![
            (-std::f64::consts::PI, std::f64::consts::PI),
            (-std::f64::consts::PI, std::f64::consts::PI),
        ],
        qd_range: vec![(-4.0, 4.0), (-4.0, 4.0)],
        tau_range: vec![(-8.0, 8.0), (-4.0, 4.0)],
        x0: vec![0.2, -0.1, 0.0, 0.0],
        pend_joint: 0,
        act_joint: 0,
        pend_ml2: ARM_M1 * ARM_LC1 * ARM_LC1,
        pend_mgl: ARM_M1 * GRAVITY * ARM_LC1,
        ctrl: SwingupCtrl::Direct {
            gain: 0.5,
            u_max: 4.0,
        },
        params: HashMap::from([
            ("m1", ARM_M1),
            ("m2", ARM_M2),
            ("l1", ARM_L1),
            ("lc1", ARM_LC1),
            ("lc2", ARM_LC2),
        ]),
    }
}

/// Look up a benchmark system by CLI name.
pub fn by_name(name: &str) -> Option<SystemSpec> {
    match name {
        "pendulum" => Some(pendulum()),
        "cartpole" => Some(cartpole()),
        "furuta" => Some(furuta()),
        "two-link-arm" | "two_link_arm" => Some(two_link_arm()),
        _ => None,
    }
}

pub const SYSTEM_NAMES: [&str; 4] = ["pendulum", "cartpole", "furuta", "two-link-arm"];
