//! SE(3)/se(3) spatial algebra: transforms, adjoints and the Newton-Euler
//! building blocks.
//!
//! Block convention, fixed project-wide: 6-D quantities store the **angular
//! block first**, `v = [w; v_lin]` for motions and `f = [moment; force]` for
//! wrenches. With that ordering the spatial inertia reads
//! `M = [[J, m[p]], [m[p]^T, m I]]` and the Lie bracket matrix is
//! `ad_v = [[w], 0; [v_lin], [w]]`. The Newton-Euler equation applies the
//! transpose, `f = M a - ad_v^T (M v)`; the rnea/aba consistency and analytic
//! pendulum tests pin this down, not notation.
//!
//! `T` stores the pose of a child frame in its parent: `x_parent = R x + p`.
//! Motion coordinates then map child-to-parent through `Ad_T`, wrenches
//! child-to-parent through `Ad_{T^{-1}}^T` (power-conjugate pairing).

use crate::math::{rot_x, rot_y, rot_z, Mat3, Mat6, Scalar, Vec3};

/// Rigid transform: orthonormal rotation (det +1) plus translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialTransform<S> {
    pub rot: Mat3<S>,
    pub trans: Vec3<S>,
}

impl<S: Scalar> SpatialTransform<S> {
    pub fn new(rot: Mat3<S>, trans: Vec3<S>) -> Self {
        Self { rot, trans }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Vec3::zero())
    }

    pub fn from_translation(trans: Vec3<S>) -> Self {
        Self::new(Mat3::identity(), trans)
    }

    /// `self` then `other`: if `self = T_ab` and `other = T_bc`, the result
    /// is `T_ac`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rot * other.rot,
            self.trans + self.rot.mul_vec(other.trans),
        )
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self::new(rt, -rt.mul_vec(self.trans))
    }

    pub fn apply_point(&self, x: Vec3<S>) -> Vec3<S> {
        self.rot.mul_vec(x) + self.trans
    }

    /// Motion coordinates child -> parent: `Ad_T v`.
    pub fn transform_motion(&self, v: SpatialVector<S>) -> SpatialVector<S> {
        let ang = self.rot.mul_vec(v.ang);
        SpatialVector::new(ang, self.trans.cross(ang) + self.rot.mul_vec(v.lin))
    }

    /// Motion coordinates parent -> child: `Ad_{T^{-1}} v`.
    pub fn inv_transform_motion(&self, v: SpatialVector<S>) -> SpatialVector<S> {
        let rt = self.rot.transpose();
        SpatialVector::new(
            rt.mul_vec(v.ang),
            rt.mul_vec(v.lin - self.trans.cross(v.ang)),
        )
    }

    /// Wrench (or momentum) coordinates child -> parent: `Ad_{T^{-1}}^T f`.
    pub fn transform_force(&self, f: SpatialVector<S>) -> SpatialVector<S> {
        let force = self.rot.mul_vec(f.lin);
        SpatialVector::new(self.rot.mul_vec(f.ang) + self.trans.cross(force), force)
    }

    /// Wrench (or momentum) coordinates parent -> child: `Ad_T^T f`.
    pub fn inv_transform_force(&self, f: SpatialVector<S>) -> SpatialVector<S> {
        let rt = self.rot.transpose();
        SpatialVector::new(
            rt.mul_vec(f.ang - self.trans.cross(f.lin)),
            rt.mul_vec(f.lin),
        )
    }
}

/// Fixed transform from RPY Euler angles and a translation:
/// `R = R_z(phi_z) R_y(phi_y) R_x(phi_x)`, translation `p_k`.
pub fn transform_from_rpy<S: Scalar>(theta_r: [S; 3], p_k: Vec3<S>) -> SpatialTransform<S> {
    let r = rot_z(theta_r[2]) * rot_y(theta_r[1]) * rot_x(theta_r[0]);
    SpatialTransform::new(r, p_k)
}

/// 6x6 adjoint of `T`: `Ad_T = [[R, 0], [[p]R, R]]`. Satisfies the
/// homomorphism `Ad(T1 T2) = Ad(T1) Ad(T2)`.
pub fn adjoint<S: Scalar>(t: &SpatialTransform<S>) -> Mat6<S> {
    Mat6::from_blocks(t.rot, Mat3::zero(), Mat3::skew(t.trans) * t.rot, t.rot)
}

/// Generalized 6-D vector; angular block first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialVector<S> {
    pub ang: Vec3<S>,
    pub lin: Vec3<S>,
}

impl<S: Scalar> SpatialVector<S> {
    pub fn new(ang: Vec3<S>, lin: Vec3<S>) -> Self {
        Self { ang, lin }
    }

    pub fn zero() -> Self {
        Self::new(Vec3::zero(), Vec3::zero())
    }

    pub fn scale(self, s: S) -> Self {
        Self::new(self.ang.scale(s), self.lin.scale(s))
    }

    pub fn dot(self, o: Self) -> S {
        self.ang.dot(o.ang) + self.lin.dot(o.lin)
    }

    pub fn to_array(self) -> [S; 6] {
        let a = self.ang.to_array();
        let l = self.lin.to_array();
        [a[0], a[1], a[2], l[0], l[1], l[2]]
    }

    pub fn from_array(v: [S; 6]) -> Self {
        Self::new(
            Vec3::new(v[0], v[1], v[2]),
            Vec3::new(v[3], v[4], v[5]),
        )
    }

    /// Motion cross product `ad_self w`.
    pub fn cross_motion(self, w: Self) -> Self {
        Self::new(
            self.ang.cross(w.ang),
            self.lin.cross(w.ang) + self.ang.cross(w.lin),
        )
    }

    /// Dual (force) cross product `-ad_self^T f`; this is the bias term of
    /// the Newton-Euler equation: `f_bias = v.cross_force(M v)`.
    pub fn cross_force(self, f: Self) -> Self {
        Self::new(
            self.ang.cross(f.ang) + self.lin.cross(f.lin),
            self.ang.cross(f.lin),
        )
    }
}

impl<S: Scalar> std::ops::Add for SpatialVector<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.ang + o.ang, self.lin + o.lin)
    }
}

impl<S: Scalar> std::ops::Sub for SpatialVector<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.ang - o.ang, self.lin - o.lin)
    }
}

impl<S: Scalar> std::ops::Neg for SpatialVector<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.ang, -self.lin)
    }
}

/// The 6x6 bracket matrix `[[w], 0; [v], [w]]` for `v = [w; v_lin]`.
/// Applied as-is it is the motion cross product; the Newton-Euler equation
/// uses its transpose (see [`SpatialVector::cross_force`]).
pub fn co_adjoint_ad<S: Scalar>(v: &SpatialVector<S>) -> Mat6<S> {
    let w = Mat3::skew(v.ang);
    Mat6::from_blocks(w, Mat3::zero(), Mat3::skew(v.lin), w)
}

/// Spatial inertia in link coordinates, stored in the standard ten-parameter
/// form: mass `m`, first moment `h = m p_com`, rotational inertia `J` about
/// the frame origin. Assembles to `M = [[J, [h]], [[h]^T, m I]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialInertia<S> {
    pub moment: Mat3<S>,
    pub mass: S,
    pub h: Vec3<S>,
}

impl<S: Scalar> SpatialInertia<S> {
    pub fn zero() -> Self {
        Self {
            moment: Mat3::zero(),
            mass: S::zero(),
            h: Vec3::zero(),
        }
    }

    /// From mass, center-of-mass offset and rotational inertia about the CoM
    /// (shifted to the frame origin internally).
    pub fn from_com(mass: S, com: Vec3<S>, inertia_com: Mat3<S>) -> Self {
        let sk = Mat3::skew(com);
        Self {
            moment: inertia_com - (sk * sk).scale(mass),
            mass,
            h: com.scale(mass),
        }
    }

    pub fn com(&self) -> Vec3<S> {
        self.h.scale(S::one() / self.mass)
    }

    /// `M v`.
    pub fn mul(&self, v: SpatialVector<S>) -> SpatialVector<S> {
        SpatialVector::new(
            self.moment.mul_vec(v.ang) + self.h.cross(v.lin),
            v.lin.scale(self.mass) - self.h.cross(v.ang),
        )
    }

    pub fn to_mat6(&self) -> Mat6<S> {
        let hx = Mat3::skew(self.h);
        Mat6::from_blocks(
            self.moment,
            hx,
            hx.transpose(),
            Mat3::identity().scale(self.mass),
        )
    }
}

impl<S: Scalar> std::ops::Add for SpatialInertia<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            moment: self.moment + o.moment,
            mass: self.mass + o.mass,
            h: self.h + o.h,
        }
    }
}
