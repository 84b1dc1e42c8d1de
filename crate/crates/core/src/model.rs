//! Kinematic tree representation and the virtual-parameter maps.
//!
//! Physical parameters carry constraints: masses must be positive, rotational
//! inertias must satisfy the triangle inequalities, fixed transforms must be
//! rigid. Instead of constraining the optimizer, every physical quantity is
//! the image of *unrestricted* virtual parameters:
//!
//! * mass          `m = theta_sqrt_m^2`
//! * principal     `J_p = diag(t2^2 + t3^2, t1^2 + t3^2, t1^2 + t2^2)` from
//!   `theta_l`, where each `t_i^2` is a central second moment of mass. The
//!   triangle inequalities hold by construction.
//! * link inertia  `J = R_J J_p R_J^T - m [p_m][p_m]` about the link origin
//!   (the sign makes the shift positive semidefinite; `[a][a]` itself is
//!   negative semidefinite).
//! * kinematics    fixed transform from RPY angles `theta_r` and offset `p_k`
//!   (periodic, hence unrestricted), composed with the joint transform.
//!
//! Joint axes are aligned with the local z axis. Fixed joints are excluded;
//! terminal fixed transforms fold into the last link's fixed transform.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuation::{ActuatorKind, ActuatorModel};
use crate::math::{Mat3, Scalar, Vec3};
use crate::spatial::{transform_from_rpy, SpatialInertia, SpatialTransform, SpatialVector};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("link {0}: parent index {1} is not smaller than the link index")]
    ParentOrder(usize, usize),
    #[error("model must have exactly one root link (found {0})")]
    RootCount(usize),
    #[error("unknown joint kind `{0}`")]
    JointKind(String),
    #[error("unknown actuator kind `{0}`")]
    ActuatorKind(String),
    #[error("actuator: {0}")]
    Actuator(#[from] crate::actuation::ActuationError),
    #[error("model file: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Joint kind; the motion axis is the local z axis in both cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

impl JointKind {
    /// Unit motion vector: angular z for revolute, linear z for prismatic.
    pub fn motion_subspace<S: Scalar>(&self) -> SpatialVector<S> {
        let ez = Vec3::new(S::zero(), S::zero(), S::one());
        match self {
            JointKind::Revolute => SpatialVector::new(ez, Vec3::zero()),
            JointKind::Prismatic => SpatialVector::new(Vec3::zero(), ez),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
        }
    }
}

/// Variable joint transform: rotation about z for revolute joints,
/// translation along z for prismatic joints.
pub fn joint_transform<S: Scalar>(kind: JointKind, q: S) -> SpatialTransform<S> {
    match kind {
        JointKind::Revolute => SpatialTransform::new(crate::math::rot_z(q), Vec3::zero()),
        JointKind::Prismatic => {
            SpatialTransform::from_translation(Vec3::new(S::zero(), S::zero(), q))
        }
    }
}

/// Principal rotational inertia from the virtual moment parameters:
/// `diag(t2^2 + t3^2, t1^2 + t3^2, t1^2 + t2^2)`. Entries are non-negative
/// and satisfy `J_x <= J_y + J_z` (and cyclic) for every real input.
pub fn principal_inertia<S: Scalar>(theta_l: &[S; 3]) -> Mat3<S> {
    let sq = [
        theta_l[0] * theta_l[0],
        theta_l[1] * theta_l[1],
        theta_l[2] * theta_l[2],
    ];
    Mat3::diag(Vec3::new(sq[1] + sq[2], sq[0] + sq[2], sq[0] + sq[1]))
}

/// Virtual moment parameters reproducing a principal inertia that satisfies
/// the strict triangle inequalities (used for prior initialization).
pub fn invert_principal_inertia(j_p: [f64; 3]) -> Option<[f64; 3]> {
    let [jx, jy, jz] = j_p;
    let t1 = (jy + jz - jx) / 2.0;
    let t2 = (jx + jz - jy) / 2.0;
    let t3 = (jx + jy - jz) / 2.0;
    if t1 < 0.0 || t2 < 0.0 || t3 < 0.0 {
        return None;
    }
    Some([t1.sqrt(), t2.sqrt(), t3.sqrt()])
}

/// Per-link virtual parameters. All entries are unrestricted reals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams<S> {
    /// RPY angles of the fixed transform (kinematic).
    pub theta_r: [S; 3],
    /// Translation of the fixed transform (kinematic).
    pub p_k: Vec3<S>,
    /// Virtual central moment parameters.
    pub theta_l: [S; 3],
    /// Square root of the link mass.
    pub theta_sqrt_m: S,
    /// RPY angles of the principal-axis rotation `R_J`.
    pub theta_j: [S; 3],
    /// Center-of-mass offset from the link origin.
    pub p_m: Vec3<S>,
}

impl<S: Scalar> LinkParams<S> {
    pub fn zero() -> Self {
        Self {
            theta_r: [S::zero(); 3],
            p_k: Vec3::zero(),
            theta_l: [S::zero(); 3],
            theta_sqrt_m: S::zero(),
            theta_j: [S::zero(); 3],
            p_m: Vec3::zero(),
        }
    }

    /// Fixed part of the link transform.
    pub fn fixed_transform(&self) -> SpatialTransform<S> {
        transform_from_rpy(self.theta_r, self.p_k)
    }

    /// Full link transform `T(q) = T_fixed T_joint(q)`.
    pub fn link_transform(&self, kind: JointKind, q: S) -> SpatialTransform<S> {
        self.fixed_transform().compose(&joint_transform(kind, q))
    }

    /// Spatial inertia implied by the virtual parameters: always a physically
    /// plausible body (`m >= 0`, PSD assembled matrix, triangle inequalities).
    pub fn link_inertia(&self) -> SpatialInertia<S> {
        let m = self.theta_sqrt_m * self.theta_sqrt_m;
        let r_j = transform_from_rpy(self.theta_j, Vec3::zero()).rot;
        let j_com = r_j * principal_inertia(&self.theta_l) * r_j.transpose();
        let sk = Mat3::skew(self.p_m);
        SpatialInertia {
            moment: j_com - (sk * sk).scale(m),
            mass: m,
            h: self.p_m.scale(m),
        }
    }

    pub fn mass(&self) -> S {
        self.theta_sqrt_m * self.theta_sqrt_m
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(S) -> T) -> LinkParams<T> {
        LinkParams {
            theta_r: self.theta_r.map(&mut f),
            p_k: Vec3::new(f(self.p_k.x), f(self.p_k.y), f(self.p_k.z)),
            theta_l: self.theta_l.map(&mut f),
            theta_sqrt_m: f(self.theta_sqrt_m),
            theta_j: self.theta_j.map(&mut f),
            p_m: Vec3::new(f(self.p_m.x), f(self.p_m.y), f(self.p_m.z)),
        }
    }
}

/// One link of the kinematic tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Link<S> {
    pub joint: JointKind,
    /// Parent link index; `None` for the single root.
    pub parent: Option<usize>,
    pub params: LinkParams<S>,
}

/// Ordered kinematic tree with gravity and an attached actuator model.
#[derive(Clone, Debug)]
pub struct RobotModel<S> {
    pub name: String,
    pub links: Vec<Link<S>>,
    pub gravity: Vec3<S>,
    pub actuator: ActuatorModel<S>,
    /// When true, identification freezes the kinematic parameters
    /// (`theta_r`, `p_k`) and learns only the inertial ones.
    pub kinematics_known: bool,
}

impl<S: Scalar> RobotModel<S> {
    pub fn n_joints(&self) -> usize {
        self.links.len()
    }

    /// Topological-order and single-root invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut roots = 0;
        for (i, link) in self.links.iter().enumerate() {
            match link.parent {
                None => roots += 1,
                Some(p) if p >= i => return Err(ModelError::ParentOrder(i, p)),
                Some(_) => {}
            }
        }
        if roots != 1 {
            return Err(ModelError::RootCount(roots));
        }
        Ok(())
    }

    pub fn map<T: Scalar>(&self, mut f: impl FnMut(S) -> T) -> RobotModel<T> {
        RobotModel {
            name: self.name.clone(),
            links: self
                .links
                .iter()
                .map(|l| Link {
                    joint: l.joint,
                    parent: l.parent,
                    params: l.params.map(&mut f),
                })
                .collect(),
            gravity: Vec3::new(f(self.gravity.x), f(self.gravity.y), f(self.gravity.z)),
            actuator: self.actuator.with_params(
                &self
                    .actuator
                    .params()
                    .iter()
                    .map(|&p| f(p))
                    .collect::<Vec<T>>(),
            ),
            kinematics_known: self.kinematics_known,
        }
    }

    pub fn to_f64(&self) -> RobotModel<f64> {
        self.map(|s| s.value())
    }
}

// ---------------------------------------------------------------------------
// Model file format (TOML).
//
// name = "pendulum"
// gravity = [0.0, 0.0, -9.81]
// kinematics_known = true
//
// [actuator]
// kind = "viscous"              # identity|viscous|stribeck|nn-friction|...
// mu_v = [0.1]                  # physical coefficients, >= 0
// # f_s/f_d/nu_s for stribeck; hidden = [32,32] and seed for network kinds
//
// [[links]]
// joint = "revolute"            # revolute|prismatic
// parent = -1                   # -1 = base
// theta_r = [1.570796, 0.0, 0.0]
// p_k = [0.0, 0.0, 0.0]
// theta_l = [0.0, 0.0, 0.0]
// theta_sqrt_m = 1.0
// theta_j = [0.0, 0.0, 0.0]
// p_m = [0.0, -1.0, 0.0]
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    name: String,
    gravity: [f64; 3],
    #[serde(default = "default_true")]
    kinematics_known: bool,
    actuator: ActuatorFile,
    links: Vec<LinkFile>,
}

fn default_true() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
struct ActuatorFile {
    kind: String,
    #[serde(default)]
    mu_v: Option<Vec<f64>>,
    #[serde(default)]
    f_s: Option<Vec<f64>>,
    #[serde(default)]
    f_d: Option<Vec<f64>>,
    #[serde(default)]
    nu_s: Option<Vec<f64>>,
    #[serde(default)]
    hidden: Option<Vec<usize>>,
    #[serde(default)]
    seed: Option<u64>,
    /// Trained network weights, present when a fitted model is saved.
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct LinkFile {
    joint: String,
    parent: i64,
    theta_r: [f64; 3],
    p_k: [f64; 3],
    theta_l: [f64; 3],
    theta_sqrt_m: f64,
    theta_j: [f64; 3],
    p_m: [f64; 3],
}

impl RobotModel<f64> {
    pub fn to_toml(&self) -> String {
        let n = self.n_joints();
        let act = &self.actuator;
        let sq = |v: &Vec<f64>| v.iter().map(|s| s * s).collect::<Vec<f64>>();
        let actuator = match act {
            ActuatorModel::Identity => ActuatorFile {
                kind: "identity".into(),
                mu_v: None,
                f_s: None,
                f_d: None,
                nu_s: None,
                hidden: None,
                seed: None,
                weights: None,
            },
            ActuatorModel::Viscous { mu_v_sqrt } => ActuatorFile {
                kind: "viscous".into(),
                mu_v: Some(sq(mu_v_sqrt)),
                f_s: None,
                f_d: None,
                nu_s: None,
                hidden: None,
                seed: None,
                weights: None,
            },
            ActuatorModel::Stribeck {
                f_s_sqrt,
                f_d_sqrt,
                nu_s_sqrt,
                mu_v_sqrt,
            } => ActuatorFile {
                kind: "stribeck".into(),
                mu_v: Some(sq(mu_v_sqrt)),
                f_s: Some(sq(f_s_sqrt)),
                f_d: Some(sq(f_d_sqrt)),
                nu_s: Some(sq(nu_s_sqrt)),
                hidden: None,
                seed: None,
                weights: None,
            },
            ActuatorModel::NnFriction { net }
            | ActuatorModel::NnResidual { net }
            | ActuatorModel::FfNn { net } => {
                let hidden: Vec<usize> = net.layers[..net.layers.len() - 1]
                    .iter()
                    .map(|(w, _)| w.len())
                    .collect();
                ActuatorFile {
                    kind: act.kind().name().into(),
                    mu_v: None,
                    f_s: None,
                    f_d: None,
                    nu_s: None,
                    hidden: Some(hidden),
                    seed: None,
                    weights: Some(net.params()),
                }
            }
        };
        let file = ModelFile {
            name: self.name.clone(),
            gravity: self.gravity.to_f64(),
            kinematics_known: self.kinematics_known,
            actuator,
            links: self
                .links
                .iter()
                .map(|l| LinkFile {
                    joint: l.joint.name().into(),
                    parent: l.parent.map_or(-1, |p| p as i64),
                    theta_r: l.params.theta_r,
                    p_k: l.params.p_k.to_f64(),
                    theta_l: l.params.theta_l,
                    theta_sqrt_m: l.params.theta_sqrt_m,
                    theta_j: l.params.theta_j,
                    p_m: l.params.p_m.to_f64(),
                })
                .collect(),
        };
        let _ = n;
        toml::to_string(&file).expect("model serialization cannot fail")
    }

    pub fn from_toml(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile =
            toml::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let n = file.links.len();
        let kind = ActuatorKind::parse(&file.actuator.kind)
            .ok_or_else(|| ModelError::ActuatorKind(file.actuator.kind.clone()))?;
        let af = &file.actuator;
        let zeros = vec![0.0; n];
        let actuator = match kind {
            ActuatorKind::Identity => ActuatorModel::Identity,
            ActuatorKind::Viscous => {
                ActuatorModel::viscous(af.mu_v.as_deref().unwrap_or(&zeros))?
            }
            ActuatorKind::Stribeck => ActuatorModel::stribeck(
                af.f_s.as_deref().unwrap_or(&zeros),
                af.f_d.as_deref().unwrap_or(&zeros),
                af.nu_s.as_deref().unwrap_or(&zeros),
                af.mu_v.as_deref().unwrap_or(&zeros),
            )?,
            k => {
                let hidden = af.hidden.clone().unwrap_or_else(|| vec![32, 32]);
                let net = ActuatorModel::network(k, n, &hidden, af.seed.unwrap_or(0));
                match &af.weights {
                    Some(w) => net.with_params(w),
                    None => net,
                }
            }
        };
        let links = file
            .links
            .iter()
            .map(|lf| {
                let joint = match lf.joint.as_str() {
                    "revolute" => JointKind::Revolute,
                    "prismatic" => JointKind::Prismatic,
                    other => return Err(ModelError::JointKind(other.to_string())),
                };
                Ok(Link {
                    joint,
                    parent: if lf.parent < 0 {
                        None
                    } else {
                        Some(lf.parent as usize)
                    },
                    params: LinkParams {
                        theta_r: lf.theta_r,
                        p_k: Vec3::from_f64(lf.p_k),
                        theta_l: lf.theta_l,
                        theta_sqrt_m: lf.theta_sqrt_m,
                        theta_j: lf.theta_j,
                        p_m: Vec3::from_f64(lf.p_m),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let model = RobotModel {
            name: file.name,
            links,
            gravity: Vec3::from_f64(file.gravity),
            actuator,
            kinematics_known: file.kinematics_known,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ModelError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn principal_inertia_symmetric_body() {
        let j = principal_inertia(&[1.0, 1.0, 1.0]);
        assert_eq!(
            [j.m[0][0], j.m[1][1], j.m[2][2]],
            [2.0, 2.0, 2.0]
        );
    }

    #[test]
    fn principal_inertia_degenerate_rod_hits_triangle_equality() {
        let j = principal_inertia(&[1.0, 0.0, 0.0]);
        assert_eq!([j.m[0][0], j.m[1][1], j.m[2][2]], [0.0, 1.0, 1.0]);
        // J_x = J_y + J_z - 2*theta_1^2 would be tight here: 0 <= 1 + 1.
    }

    #[test]
    fn principal_inertia_arithmetic_case() {
        let j = principal_inertia(&[0.3, 0.4, 0.5]);
        let (jx, jy, jz) = (j.m[0][0], j.m[1][1], j.m[2][2]);
        assert!((jx - 0.41).abs() < 1e-15);
        assert!((jy - 0.34).abs() < 1e-15);
        assert!((jz - 0.25).abs() < 1e-15);
        assert!(jx <= jy + jz + 1e-15);
        assert!(jy <= jx + jz + 1e-15);
        assert!(jz <= jx + jy + 1e-15);
    }

    #[test]
    fn triangle_inequalities_hold_for_all_reals() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10_000 {
            let t = [
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            ];
            let j = principal_inertia(&t);
            let (jx, jy, jz) = (j.m[0][0], j.m[1][1], j.m[2][2]);
            assert!(jx >= 0.0 && jy >= 0.0 && jz >= 0.0);
            assert!(jx <= jy + jz + 1e-12);
            assert!(jy <= jx + jz + 1e-12);
            assert!(jz <= jx + jy + 1e-12);
        }
    }

    #[test]
    fn inversion_recovers_plausible_targets() {
        let target = [0.41, 0.34, 0.25];
        let theta = invert_principal_inertia(target).unwrap();
        let j = principal_inertia(&theta);
        for (got, want) in [j.m[0][0], j.m[1][1], j.m[2][2]].iter().zip(target) {
            assert!((got - want).abs() < 1e-12);
        }
        // Violating the triangle inequality is not representable.
        assert!(invert_principal_inertia([10.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn point_mass_inertia() {
        let mut p = LinkParams::<f64>::zero();
        p.theta_sqrt_m = 2.0;
        let inertia = p.link_inertia();
        assert_eq!(inertia.mass, 4.0);
        assert_eq!(inertia.moment, Mat3::zero());
        assert_eq!(inertia.h.to_f64(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn mass_is_sign_invariant() {
        let mut p = LinkParams::<f64>::zero();
        p.theta_sqrt_m = -3.0;
        assert_eq!(p.mass(), 9.0);
    }

    #[test]
    fn assembled_inertia_is_psd_for_random_virtuals() {
        // Eigen-solver oracle via nalgebra on the assembled 6x6 matrix.
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..300 {
            let p = LinkParams {
                theta_r: [0.0; 3],
                p_k: Vec3::zero(),
                theta_l: [
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ],
                theta_sqrt_m: rng.random_range(-3.0..3.0),
                theta_j: [
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                ],
                p_m: Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ),
            };
            let m6 = p.link_inertia().to_mat6().to_f64();
            let mat = nalgebra::Matrix6::from_fn(|i, j| m6[i][j]);
            let eig = mat.symmetric_eigenvalues();
            let min = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            assert!(min >= -1e-10, "assembled inertia has eigenvalue {min}");
        }
    }

    #[test]
    fn joint_transforms() {
        let t = joint_transform(JointKind::Revolute, 0.0_f64);
        assert_eq!(t, SpatialTransform::identity());
        let t = joint_transform(JointKind::Prismatic, 0.5_f64);
        assert_eq!(t.trans.to_f64(), [0.0, 0.0, 0.5]);
        assert_eq!(t.rot, Mat3::identity());
        let t = joint_transform(JointKind::Revolute, std::f64::consts::PI);
        assert!((t.rot.m[0][0] + 1.0).abs() < 1e-15);
        assert!((t.rot.m[1][1] + 1.0).abs() < 1e-15);
        assert!((t.rot.m[2][2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn motion_subspace_blocks() {
        let s_r = JointKind::Revolute.motion_subspace::<f64>();
        assert_eq!(s_r.ang.to_f64(), [0.0, 0.0, 1.0]);
        assert_eq!(s_r.lin.to_f64(), [0.0, 0.0, 0.0]);
        let s_p = JointKind::Prismatic.motion_subspace::<f64>();
        assert_eq!(s_p.ang.to_f64(), [0.0, 0.0, 0.0]);
        assert_eq!(s_p.lin.to_f64(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn link_transform_identity_and_offset() {
        let p = LinkParams::<f64>::zero();
        assert_eq!(
            p.link_transform(JointKind::Revolute, 0.0),
            SpatialTransform::identity()
        );
        let mut p2 = LinkParams::<f64>::zero();
        p2.p_k = Vec3::new(0.1, 0.2, 0.3);
        let t = p2.link_transform(JointKind::Revolute, 0.0);
        assert_eq!(t.trans.to_f64(), [0.1, 0.2, 0.3]);
    }

    #[test]
    fn two_link_forward_kinematics_matches_hand_composition() {
        let l1 = LinkParams {
            theta_r: [0.0, 0.0, 0.4],
            p_k: Vec3::new(0.0, 0.0, 0.1),
            ..LinkParams::zero()
        };
        let l2 = LinkParams {
            theta_r: [0.2, 0.0, 0.0],
            p_k: Vec3::new(0.5, 0.0, 0.0),
            ..LinkParams::zero()
        };
        let (q1, q2) = (0.7, -0.3);
        let chained = l1
            .link_transform(JointKind::Revolute, q1)
            .compose(&l2.link_transform(JointKind::Revolute, q2));
        // Hand-composed: T1_fixed * Rz(q1) * T2_fixed * Rz(q2).
        let hand = transform_from_rpy([0.0, 0.0, 0.4], Vec3::new(0.0, 0.0, 0.1))
            .compose(&joint_transform(JointKind::Revolute, q1))
            .compose(&transform_from_rpy([0.2, 0.0, 0.0], Vec3::new(0.5, 0.0, 0.0)))
            .compose(&joint_transform(JointKind::Revolute, q2));
        for i in 0..3 {
            for j in 0..3 {
                assert!((chained.rot.m[i][j] - hand.rot.m[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn model_file_round_trip() {
        let model = RobotModel {
            name: "test".into(),
            links: vec![
                Link {
                    joint: JointKind::Prismatic,
                    parent: None,
                    params: LinkParams {
                        theta_r: [0.0, std::f64::consts::FRAC_PI_2, 0.0],
                        p_k: Vec3::zero(),
                        theta_l: [0.0; 3],
                        theta_sqrt_m: 1.2,
                        theta_j: [0.0; 3],
                        p_m: Vec3::zero(),
                    },
                },
                Link {
                    joint: JointKind::Revolute,
                    parent: Some(0),
                    params: LinkParams {
                        theta_r: [-std::f64::consts::FRAC_PI_2, 0.0, 0.0],
                        p_k: Vec3::zero(),
                        theta_l: [0.0; 3],
                        theta_sqrt_m: 0.5,
                        theta_j: [0.1, 0.2, 0.3],
                        p_m: Vec3::new(0.4, 0.0, 0.0),
                    },
                },
            ],
            gravity: Vec3::new(0.0, 0.0, -9.81),
            actuator: ActuatorModel::stribeck(&[0.9, 0.0], &[0.4, 0.0], &[55.0, 0.0], &[0.8, 0.01])
                .unwrap(),
            kinematics_known: true,
        };
        let text = model.to_toml();
        let back = RobotModel::from_toml(&text).unwrap();
        assert_eq!(back.name, model.name);
        assert_eq!(back.links, model.links);
        assert_eq!(back.gravity, model.gravity);
        assert_eq!(back.actuator.kind(), ActuatorKind::Stribeck);
        for (a, b) in back.actuator.params().iter().zip(model.actuator.params()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_malformed_trees() {
        let mk = |parent| RobotModel::<f64> {
            name: "bad".into(),
            links: vec![Link {
                joint: JointKind::Revolute,
                parent,
                params: LinkParams::zero(),
            }],
            gravity: Vec3::zero(),
            actuator: ActuatorModel::Identity,
            kinematics_known: true,
        };
        assert!(matches!(
            mk(Some(0)).validate(),
            Err(ModelError::ParentOrder(0, 0))
        ));
        assert!(mk(None).validate().is_ok());
    }
}
