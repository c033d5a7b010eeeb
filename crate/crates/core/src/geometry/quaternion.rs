use super::{is_unit_norm_sq, GeometryError, Mat3, UnitVec3, Vec3};

/// A rotation stored as a unit quaternion `w + xi + yj + zk`.
///
/// `q` and `-q` describe the same rotation; no sign canonicalization is
/// performed, so compare rotations with [`UnitQuaternion::same_rotation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion from raw components, rescaling when the
    /// input is not already unit length. Components whose squared norm is
    /// within a few ulps of one are kept bit-for-bit.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self, GeometryError> {
        let n2 = w * w + x * x + y * y + z * z;
        if !n2.is_finite() || !(w.is_finite() && x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if n2 == 0.0 {
            return Err(GeometryError::ZeroQuaternion);
        }
        if is_unit_norm_sq(n2) {
            return Ok(UnitQuaternion { w, x, y, z });
        }
        let inv = 1.0 / n2.sqrt();
        Ok(UnitQuaternion {
            w: w * inv,
            x: x * inv,
            y: y * inv,
            z: z * inv,
        })
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// Rotation by `angle` radians about `axis` (right-handed).
    pub fn from_axis_angle(axis: UnitVec3, angle: f64) -> Self {
        let a = axis.get();
        let (s, c) = (angle * 0.5).sin_cos();
        Self::new(c, a.x * s, a.y * s, a.z * s).unwrap_or(Self::IDENTITY)
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Components in `[w, x, y, z]` order.
    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Inverse rotation. For a unit quaternion this is the conjugate.
    pub fn inverse(self) -> Self {
        UnitQuaternion {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Hamilton product `self ⊗ rhs`, renormalized. Acting on a vector the
    /// result applies `rhs` first, then `self`.
    pub fn compose(self, rhs: UnitQuaternion) -> UnitQuaternion {
        let [w, x, y, z] = hamilton(self.to_array(), rhs.to_array());
        // The product of two unit quaternions has norm within rounding of one.
        Self::new(w, x, y, z).unwrap_or(Self::IDENTITY)
    }

    /// Rotates `v` with the sandwich product `q v q⁻¹`.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let p = [0.0, v.x, v.y, v.z];
        let r = hamilton(hamilton(self.to_array(), p), self.inverse().to_array());
        Vec3::new(r[1], r[2], r[3])
    }

    /// Rotation matrix equivalent to [`UnitQuaternion::rotate`].
    pub fn to_matrix(self) -> Mat3 {
        let UnitQuaternion { w, x, y, z } = self;
        let (xx, yy, zz) = (x * x, y * y, z * z);
        let (xy, xz, yz) = (x * y, x * z, y * z);
        let (wx, wy, wz) = (w * x, w * y, w * z);
        Mat3::from_rows([
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ])
    }

    /// True when both quaternions rotate vectors identically, i.e. they are
    /// equal up to sign within `tol` componentwise.
    pub fn same_rotation(self, other: UnitQuaternion, tol: f64) -> bool {
        let a = self.to_array();
        let b = other.to_array();
        let pos = a.iter().zip(&b).all(|(p, q)| (p - q).abs() <= tol);
        let neg = a.iter().zip(&b).all(|(p, q)| (p + q).abs() <= tol);
        pos || neg
    }
}

fn hamilton(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let [aw, ax, ay, az] = a;
    let [bw, bx, by, bz] = b;
    [
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ]
}

/// Hamilton product `q1 ⊗ q2`, renormalized.
pub fn quat_compose(q1: UnitQuaternion, q2: UnitQuaternion) -> UnitQuaternion {
    q1.compose(q2)
}

pub fn quat_to_matrix(q: UnitQuaternion) -> Mat3 {
    q.to_matrix()
}
