//! Recursive Newton-Euler (inverse dynamics) and Articulated Body (forward
//! dynamics) algorithms over kinematic trees, plus energy accounting.
//!
//! Both algorithms run on [`LinkDyn`] data, the per-link fixed transform,
//! joint kind and spatial inertia. Robot models lower to that form through
//! the virtual-parameter maps; the linear-regression baseline constructs it
//! directly from raw inertias. Gravity enters as a fictitious base
//! acceleration `a_base = -g` lifted to spatial form, so no per-link gravity
//! wrenches are needed.
//!
//! Everything is generic over [`Scalar`]: the same code path serves fast
//! `f64` simulation and tape-recorded identification.

use thiserror::Error;

use crate::math::{Mat6, Scalar, Vec3};
use crate::model::{joint_transform, JointKind, RobotModel};
use crate::spatial::{SpatialInertia, SpatialTransform, SpatialVector};

/// Articulated inertia below this threshold along a joint axis aborts ABA.
pub const DEGENERATE_INERTIA_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("expected {expected} joint values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate articulated inertia at link {link} (s^T M s = {value:.3e})")]
    DegenerateInertia { link: usize, value: f64 },
}

/// Per-link data consumed by the dynamics algorithms.
#[derive(Clone, Debug)]
pub struct LinkDyn<S> {
    pub joint: JointKind,
    pub parent: Option<usize>,
    /// Fixed transform from the parent frame to this link's joint frame.
    pub t_fixed: SpatialTransform<S>,
    pub inertia: SpatialInertia<S>,
}

impl<S: Scalar> LinkDyn<S> {
    /// Pose of this link's frame in the parent frame at joint value `q`.
    pub fn transform_at(&self, q: S) -> SpatialTransform<S> {
        self.t_fixed.compose(&joint_transform(self.joint, q))
    }
}

impl<S: Scalar> RobotModel<S> {
    /// Lower the virtual parameters to dynamics form.
    pub fn dyn_links(&self) -> Vec<LinkDyn<S>> {
        self.links
            .iter()
            .map(|l| LinkDyn {
                joint: l.joint,
                parent: l.parent,
                t_fixed: l.params.fixed_transform(),
                inertia: l.params.link_inertia(),
            })
            .collect()
    }
}

fn check_dims<S>(links: &[LinkDyn<S>], vecs: &[&[S]]) -> Result<(), DynamicsError> {
    for v in vecs {
        if v.len() != links.len() {
            return Err(DynamicsError::Dimension {
                expected: links.len(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// Spatial base acceleration realizing gravity: `a_0 = (0; -g)`.
fn base_acceleration<S: Scalar>(gravity: Vec3<S>) -> SpatialVector<S> {
    SpatialVector::new(Vec3::zero(), -gravity)
}

/// Inverse dynamics: joint torques for a prescribed motion.
///
/// Exact on rigid-body systems and exactly linear in `qdd` for fixed
/// `(q, qd)`.
pub fn rnea_links<S: Scalar>(
    links: &[LinkDyn<S>],
    gravity: Vec3<S>,
    q: &[S],
    qd: &[S],
    qdd: &[S],
) -> Result<Vec<S>, DynamicsError> {
    check_dims(links, &[q, qd, qdd])?;
    let n = links.len();
    let mut xf = Vec::with_capacity(n); // parent-to-link transforms
    let mut vel = Vec::with_capacity(n);
    let mut force: Vec<SpatialVector<S>> = Vec::with_capacity(n);

    for (i, link) in links.iter().enumerate() {
        let x = link.transform_at(q[i]);
        let s = link.joint.motion_subspace();
        let (v_parent, a_parent) = match link.parent {
            Some(p) => (vel[p], force[p]), // force[] temporarily holds accelerations
            None => (SpatialVector::zero(), base_acceleration(gravity)),
        };
        let v = x.inv_transform_motion(v_parent) + s.scale(qd[i]);
        let a = x.inv_transform_motion(a_parent)
            + v.cross_motion(s.scale(qd[i]))
            + s.scale(qdd[i]);
        xf.push(x);
        vel.push(v);
        force.push(a);
    }

    // Newton-Euler per body, then propagate wrenches leaf-to-root.
    for i in 0..n {
        let a = force[i];
        let v = vel[i];
        force[i] = links[i].inertia.mul(a) + v.cross_force(links[i].inertia.mul(v));
    }
    let mut tau = vec![S::zero(); n];
    for i in (0..n).rev() {
        let s = links[i].joint.motion_subspace();
        tau[i] = s.dot(force[i]);
        if let Some(p) = links[i].parent {
            let into_parent = xf[i].transform_force(force[i]);
            force[p] = force[p] + into_parent;
        }
    }
    Ok(tau)
}

/// Forward dynamics: joint accelerations from applied torques, O(n) in the
/// number of links.
pub fn aba_links<S: Scalar>(
    links: &[LinkDyn<S>],
    gravity: Vec3<S>,
    q: &[S],
    qd: &[S],
    tau: &[S],
) -> Result<Vec<S>, DynamicsError> {
    check_dims(links, &[q, qd, tau])?;
    let n = links.len();
    let mut xf = Vec::with_capacity(n);
    let mut vel = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n); // velocity-product bias
    let mut m_art: Vec<Mat6<S>> = Vec::with_capacity(n); // articulated inertia
    let mut f_bias: Vec<SpatialVector<S>> = Vec::with_capacity(n);

    // Pass 1, root to leaves: velocities and bias terms.
    for (i, link) in links.iter().enumerate() {
        let x = link.transform_at(q[i]);
        let s = link.joint.motion_subspace();
        let v_parent = match link.parent {
            Some(p) => vel[p],
            None => SpatialVector::zero(),
        };
        let v = x.inv_transform_motion(v_parent) + s.scale(qd[i]);
        eta.push(v.cross_motion(s.scale(qd[i])));
        m_art.push(link.inertia.to_mat6());
        f_bias.push(v.cross_force(link.inertia.mul(v)));
        vel.push(v);
        xf.push(x);
    }

    // Pass 2, leaves to root: lump articulated inertias and bias forces.
    for i in (0..n).rev() {
        let Some(p) = links[i].parent else { continue };
        let s = links[i].joint.motion_subspace().to_array();
        let m_s = m_art[i].mul_vec(s);
        let d = dot6(s, m_s);
        if d.value() <= DEGENERATE_INERTIA_TOL {
            return Err(DynamicsError::DegenerateInertia {
                link: i,
                value: d.value(),
            });
        }
        let inv_d = S::one() / d;
        // Projected articulated inertia seen by the parent.
        let projected = m_art[i] - Mat6::outer(m_s, m_s).scale(inv_d);
        let ad_inv = crate::spatial::adjoint(&xf[i].inverse());
        m_art[p] = m_art[p] + Mat6::congruence(ad_inv, projected);
        // Bias force passed up: own bias plus the torque-driven correction.
        let u = tau[i] - dot6(s, f_bias[i].to_array()) - dot6(m_s, eta[i].to_array());
        let beta = SpatialVector::from_array(m_art[i].mul_vec(eta[i].to_array()))
            + SpatialVector::from_array(m_s).scale(inv_d * u)
            + f_bias[i];
        f_bias[p] = f_bias[p] + xf[i].transform_force(beta);
    }

    // Pass 3, root to leaves: accelerations.
    let mut acc: Vec<SpatialVector<S>> = Vec::with_capacity(n);
    let mut qdd = vec![S::zero(); n];
    for (i, link) in links.iter().enumerate() {
        let a_parent = match link.parent {
            Some(p) => acc[p],
            None => base_acceleration(gravity),
        };
        let a_free = xf[i].inv_transform_motion(a_parent) + eta[i];
        let s = link.joint.motion_subspace().to_array();
        let m_s = m_art[i].mul_vec(s);
        let d = dot6(s, m_s);
        if d.value() <= DEGENERATE_INERTIA_TOL {
            return Err(DynamicsError::DegenerateInertia {
                link: i,
                value: d.value(),
            });
        }
        let num = tau[i]
            - dot6(s, m_art[i].mul_vec(a_free.to_array()))
            - dot6(s, f_bias[i].to_array());
        let qdd_i = num / d;
        qdd[i] = qdd_i;
        acc.push(a_free + link.joint.motion_subspace().scale(qdd_i));
    }
    Ok(qdd)
}

fn dot6<S: Scalar>(a: [S; 6], b: [S; 6]) -> S {
    let mut acc = S::zero();
    for k in 0..6 {
        acc = acc + a[k] * b[k];
    }
    acc
}

/// Model-level inverse dynamics (applied torque; no actuator model).
pub fn rnea<S: Scalar>(
    model: &RobotModel<S>,
    q: &[S],
    qd: &[S],
    qdd: &[S],
) -> Result<Vec<S>, DynamicsError> {
    rnea_links(&model.dyn_links(), model.gravity, q, qd, qdd)
}

/// Model-level forward dynamics (applied torque; no actuator model).
pub fn aba<S: Scalar>(
    model: &RobotModel<S>,
    q: &[S],
    qd: &[S],
    tau: &[S],
) -> Result<Vec<S>, DynamicsError> {
    aba_links(&model.dyn_links(), model.gravity, q, qd, tau)
}

/// Kinetic and potential energy of the system.
///
/// Kinetic is `1/2 sum v_i^T M_i v_i`; potential is `-sum m_i g . x_com,i`
/// with the world origin as reference height. Total energy is conserved
/// under zero torque and the identity actuator.
pub fn system_energy<S: Scalar>(
    model: &RobotModel<S>,
    q: &[S],
    qd: &[S],
) -> Result<(S, S), DynamicsError> {
    let links = model.dyn_links();
    check_dims(&links, &[q, qd])?;
    let mut vel: Vec<SpatialVector<S>> = Vec::with_capacity(links.len());
    let mut pose: Vec<SpatialTransform<S>> = Vec::with_capacity(links.len());
    let mut kinetic = S::zero();
    let mut potential = S::zero();
    for (i, link) in links.iter().enumerate() {
        let x = link.transform_at(q[i]);
        let s = link.joint.motion_subspace();
        let (v_parent, t_parent) = match link.parent {
            Some(p) => (vel[p], pose[p]),
            None => (SpatialVector::zero(), SpatialTransform::identity()),
        };
        let v = x.inv_transform_motion(v_parent) + s.scale(qd[i]);
        let t_world = t_parent.compose(&x);
        kinetic = kinetic + v.dot(link.inertia.mul(v)) * S::from_f64(0.5);
        let m = link.inertia.mass;
        if m.value() != 0.0 {
            let com_world = t_world.apply_point(link.inertia.com());
            potential = potential - m * model.gravity.dot(com_world);
        }
        vel.push(v);
        pose.push(t_world);
    }
    Ok((kinetic, potential))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const G: f64 = 9.81;

    #[test]
    fn pendulum_equilibrium_needs_no_torque() {
        let model = systems::pendulum().model;
        let tau = rnea(&model, &[0.0], &[0.0], &[0.0]).unwrap();
        assert!(tau[0].abs() < 1e-12, "tau at equilibrium = {}", tau[0]);
    }

    #[test]
    fn pendulum_horizontal_torque_is_mgl() {
        // Analytic oracle: tau = m g l sin(q) with m = l = 1.
        let model = systems::pendulum().model;
        let q = std::f64::consts::FRAC_PI_2;
        let tau = rnea(&model, &[q], &[0.0], &[0.0]).unwrap();
        assert!(
            (tau[0] - G).abs() < 1e-12,
            "tau = {}, expected {G}",
            tau[0]
        );
    }

    #[test]
    fn pendulum_free_fall_acceleration() {
        // Analytic oracle: qdd = -(g/l) sin(q).
        let model = systems::pendulum().model;
        let q = std::f64::consts::FRAC_PI_2;
        let qdd = aba(&model, &[q], &[0.0], &[0.0]).unwrap();
        assert!(
            (qdd[0] + G).abs() < 1e-10,
            "qdd = {}, expected {}",
            qdd[0],
            -G
        );
    }

    #[test]
    fn rnea_aba_round_trip_on_random_states() {
        let mut rng = StdRng::seed_from_u64(101);
        for spec in [systems::pendulum(), systems::cartpole(), systems::furuta()] {
            let model = &spec.model;
            let n = model.n_joints();
            for _ in 0..200 {
                let q: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let qd: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let qdd: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                let tau = rnea(model, &q, &qd, &qdd).unwrap();
                let back = aba(model, &q, &qd, &tau).unwrap();
                for (a, b) in back.iter().zip(&qdd) {
                    let scale = b.abs().max(1.0);
                    assert!(
                        (a - b).abs() / scale < 1e-9,
                        "{}: round trip {a} vs {b}",
                        spec.name
                    );
                }
            }
        }
    }

    #[test]
    fn rnea_is_affine_in_qdd() {
        // Superposition: tau(a*x + b*y) - tau(0) must equal
        // a*(tau(x) - tau(0)) + b*(tau(y) - tau(0)).
        let model = systems::cartpole().model;
        let mut rng = StdRng::seed_from_u64(7);
        let n = model.n_joints();
        for _ in 0..50 {
            let q: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let qd: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mix: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();
            let t0 = rnea(&model, &q, &qd, &vec![0.0; n]).unwrap();
            let tx = rnea(&model, &q, &qd, &x).unwrap();
            let ty = rnea(&model, &q, &qd, &y).unwrap();
            let tm = rnea(&model, &q, &qd, &mix).unwrap();
            for i in 0..n {
                let lhs = tm[i] - t0[i];
                let rhs = a * (tx[i] - t0[i]) + b * (ty[i] - t0[i]);
                assert!((lhs - rhs).abs() < 1e-9, "affinity violated: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn cartpole_matches_textbook_ode() {
        let spec = systems::cartpole();
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let q = [rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)];
            let qd = [rng.random_range(-2.0..2.0), rng.random_range(-4.0..4.0)];
            let tau = [rng.random_range(-5.0..5.0), 0.0];
            let ours = aba(&spec.model, &q, &qd, &tau).unwrap();
            let oracle = (spec.analytic_forward)(&q, &qd, &tau);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "cartpole {a} vs {b}");
            }
        }
    }

    #[test]
    fn furuta_matches_lagrangian_oracle() {
        let spec = systems::furuta();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..100 {
            let q = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let qd = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
            let tau = [rng.random_range(-1.0..1.0), 0.0];
            let ours = aba(&spec.model, &q, &qd, &tau).unwrap();
            let oracle = (spec.analytic_forward)(&q, &qd, &tau);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!(
                    (a - b).abs() < 1e-8 * b.abs().max(1.0),
                    "furuta {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn two_link_arm_matches_symbolic_lagrangian() {
        // Standard planar 2R equations of motion, derived symbolically:
        //   M(q) qdd + C(q, qd) qd + G(q) = tau
        // with angles measured from the downward vertical.
        let spec = systems::two_link_arm();
        let p = &spec.params;
        let (m1, m2, l1, lc1, lc2) = (p["m1"], p["m2"], p["l1"], p["lc1"], p["lc2"]);
        let mut rng = StdRng::seed_from_u64(19);
        for _ in 0..100 {
            let q = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let qd = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let qdd = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let (c2, s2) = (q[1].cos(), q[1].sin());
            let m11 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * c2);
            let m12 = m2 * (lc2 * lc2 + l1 * lc2 * c2);
            let m22 = m2 * lc2 * lc2;
            let h = -m2 * l1 * lc2 * s2;
            let g1 = (m1 * lc1 + m2 * l1) * G * q[0].sin() + m2 * lc2 * G * (q[0] + q[1]).sin();
            let g2 = m2 * lc2 * G * (q[0] + q[1]).sin();
            let oracle = [
                m11 * qdd[0] + m12 * qdd[1] + h * qd[1] * qd[0] + h * (qd[0] + qd[1]) * qd[1] + g1,
                m12 * qdd[0] + m22 * qdd[1] - h * qd[0] * qd[0] + g2,
            ];
            let ours = rnea(&spec.model, &q, &qd, &qdd).unwrap();
            for (a, b) in ours.iter().zip(&oracle) {
                assert!(
                    (a - b).abs() < 1e-9 * b.abs().max(1.0),
                    "2-link arm rnea {a} vs oracle {b}"
                );
            }
        }
    }

    #[test]
    fn degenerate_inertia_is_reported_with_link_index() {
        let mut model = systems::pendulum().model;
        model.links[0].params.theta_sqrt_m = 0.0;
        let err = aba(&model, &[0.3], &[0.0], &[0.0]).unwrap_err();
        assert!(matches!(
            err,
            DynamicsError::DegenerateInertia { link: 0, .. }
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let model = systems::pendulum().model;
        let err = rnea(&model, &[0.0, 0.0], &[0.0], &[0.0]).unwrap_err();
        assert_eq!(
            err,
            DynamicsError::Dimension {
                expected: 1,
                got: 2
            }
        );
    }

    #[test]
    fn energy_at_rest_and_quadratic_kinetic() {
        let model = systems::pendulum().model;
        let (ke, pe) = system_energy(&model, &[0.0], &[0.0]).unwrap();
        assert_eq!(ke, 0.0);
        // Hanging mass sits at height -l: potential = -m g l.
        assert!((pe + G).abs() < 1e-12, "potential {pe}");
        let (ke1, _) = system_energy(&model, &[0.4], &[1.5]).unwrap();
        let (ke2, _) = system_energy(&model, &[0.4], &[3.0]).unwrap();
        assert!((ke2 - 4.0 * ke1).abs() < 1e-12, "kinetic not quadratic");
    }

    #[test]
    fn gravity_only_enters_through_base_acceleration() {
        // With gravity zeroed, a static configuration needs zero torque
        // everywhere, for every system.
        for spec in [systems::pendulum(), systems::cartpole(), systems::furuta()] {
            let mut model = spec.model;
            model.gravity = Vec3::zero();
            let n = model.n_joints();
            let q: Vec<f64> = (0..n).map(|i| 0.3 * (i as f64 + 1.0)).collect();
            let tau = rnea(&model, &q, &vec![0.0; n], &vec![0.0; n]).unwrap();
            for t in tau {
                assert!(t.abs() < 1e-12);
            }
        }
    }
}
